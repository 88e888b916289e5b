//! Line-oriented circuit format.
//!
//! ```text
//! n 9
//! registers 2
//! NOT t=3
//! CNOT c=-0 t=1
//! TOFFOLI c=+0 c=+1 t=2
//! MCT c=+0 c=+1 c=-4 t=2
//! G3 j=0,1,2 lut=01234567
//! ```
//!
//! `MCT` carries three or more controls. `#` starts a comment. The printer
//! emits the canonical form, which parses back to an identical circuit.

use std::fmt::Write;

use super::{Circuit, Control, ControlledGate, Gate, Gate3, Polarity};
use crate::error::{Error, Result};
use crate::textio::{content_lines, keyed, parse_num};

pub fn format_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "n {}", circuit.width()).unwrap();
    if let Some(r) = circuit.registers() {
        writeln!(out, "registers {r}").unwrap();
    }
    for g in circuit.gates() {
        match g {
            Gate::Controlled(c) => writeln!(out, "{c}").unwrap(),
            Gate::Three(g3) => {
                let [a, b, c] = g3.lines();
                let lut: String = g3.lut().iter().map(|v| char::from(b'0' + v)).collect();
                writeln!(out, "G3 j={a},{b},{c} lut={lut}").unwrap();
            }
        }
    }
    out
}

fn parse_control(line: usize, v: &str) -> Result<Control> {
    let (polarity, rest) = match v.as_bytes().first() {
        Some(b'+') => (Polarity::Positive, &v[1..]),
        Some(b'-') => (Polarity::Negative, &v[1..]),
        _ => return Err(Error::parse(line, format!("control {v:?} needs a +/- sign"))),
    };
    Ok(Control {
        bit: parse_num(line, rest, "control index")?,
        polarity,
    })
}

fn parse_gate(line: usize, text: &str) -> Result<Gate> {
    let mut tokens = text.split_whitespace();
    let op = tokens.next().unwrap_or_default();
    if op == "G3" {
        let mut lines = None;
        let mut lut = None;
        for tok in tokens {
            if let Some(v) = tok.strip_prefix("j=") {
                let idx: Vec<usize> = v
                    .split(',')
                    .map(|s| parse_num(line, s, "bitline"))
                    .collect::<Result<_>>()?;
                let arr: [usize; 3] = idx
                    .try_into()
                    .map_err(|_| Error::parse(line, "G3 needs exactly three bitlines"))?;
                lines = Some(arr);
            } else if let Some(v) = tok.strip_prefix("lut=") {
                if v.len() != 8 || !v.bytes().all(|b| (b'0'..=b'7').contains(&b)) {
                    return Err(Error::parse(line, format!("lut {v:?} must be 8 digits 0-7")));
                }
                let mut arr = [0u8; 8];
                for (slot, b) in arr.iter_mut().zip(v.bytes()) {
                    *slot = b - b'0';
                }
                lut = Some(arr);
            } else {
                return Err(Error::parse(line, format!("unexpected token {tok:?}")));
            }
        }
        let (Some(l), Some(p)) = (lines, lut) else {
            return Err(Error::parse(line, "G3 needs j= and lut="));
        };
        return Gate3::new(l, p)
            .map(Gate::Three)
            .map_err(|e| Error::parse(line, e.to_string()));
    }

    let mut controls = Vec::new();
    let mut target = None;
    for tok in tokens {
        if let Some(v) = tok.strip_prefix("c=") {
            controls.push(parse_control(line, v)?);
        } else if let Some(v) = tok.strip_prefix("t=") {
            if target.is_some() {
                return Err(Error::parse(line, "target given twice"));
            }
            target = Some(parse_num(line, v, "target")?);
        } else {
            return Err(Error::parse(line, format!("unexpected token {tok:?}")));
        }
    }
    let target = target.ok_or_else(|| Error::parse(line, "missing t="))?;
    let expected = match op {
        "NOT" => controls.is_empty(),
        "CNOT" => controls.len() == 1,
        "TOFFOLI" => controls.len() == 2,
        "MCT" => controls.len() >= 3,
        _ => return Err(Error::parse(line, format!("unknown gate {op:?}"))),
    };
    if !expected {
        return Err(Error::parse(
            line,
            format!("{op} cannot take {} controls", controls.len()),
        ));
    }
    // controls must already be in canonical (sorted) order for an exact round trip
    if controls.windows(2).any(|w| w[0].bit >= w[1].bit) {
        return Err(Error::parse(line, "controls must be listed in increasing bit order"));
    }
    ControlledGate::new(target, controls)
        .map(Gate::Controlled)
        .map_err(|e| Error::parse(line, e.to_string()))
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut lines = content_lines(text).peekable();
    let (ln, head) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty circuit file, expected `n <width>`"))?;
    let width: usize = keyed(ln, head, "n")?;
    let mut circuit = Circuit::new(width);
    if let Some(&(ln, l)) = lines.peek() {
        if l.starts_with("registers") {
            let r: u8 = keyed(ln, l, "registers")?;
            if !(1..=2).contains(&r) {
                return Err(Error::parse(ln, "registers must be 1 or 2"));
            }
            circuit.set_registers(Some(r));
            lines.next();
        }
    }
    for (ln, l) in lines {
        let g = parse_gate(ln, l)?;
        circuit.push(g).map_err(|e| Error::parse(ln, e.to_string()))?;
    }
    Ok(circuit)
}
