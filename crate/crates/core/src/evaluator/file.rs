//! Text form of an evaluator.
//!
//! ```text
//! eoc-evaluator 1
//! n 27
//! registers 1
//! chips 40
//! randomized 1
//! random-seed 00..00
//! random-bits 312
//! linear-layers 3
//! nonlinear-layers 3
//! seed-gates 2
//! expansion 13 27
//! pass-through implicit
//! chip level 3 kind not width 9
//! ...
//! ```

use std::fmt::Write;

use super::{Evaluator, Provenance};
use crate::chip::{format_chip, parse_chip, PassThrough};
use crate::error::{Error, Result};
use crate::textio::{content_lines, format_seed, keyed, next_line, num_list, parse_seed};

const MAGIC: &str = "eoc-evaluator 1";

pub fn format_evaluator(ev: &Evaluator, pass: PassThrough) -> String {
    let p = &ev.provenance;
    let mut s = String::new();
    writeln!(s, "{MAGIC}").unwrap();
    writeln!(s, "n {}", ev.n).unwrap();
    writeln!(s, "registers {}", ev.registers).unwrap();
    writeln!(s, "chips {}", ev.chips.len()).unwrap();
    writeln!(s, "randomized {}", u8::from(p.randomized)).unwrap();
    writeln!(s, "random-seed {}", format_seed(&p.random_seed)).unwrap();
    writeln!(s, "random-bits {}", p.random_bits).unwrap();
    writeln!(s, "linear-layers {}", p.linear_layers).unwrap();
    writeln!(s, "nonlinear-layers {}", p.nonlinear_layers).unwrap();
    writeln!(s, "seed-gates {}", p.chips_per_gate.len()).unwrap();
    let exp: Vec<String> = p.chips_per_gate.iter().map(usize::to_string).collect();
    writeln!(s, "expansion {}", exp.join(" ")).unwrap();
    let mode = match pass {
        PassThrough::Implicit => "implicit",
        PassThrough::Explicit => "explicit",
    };
    writeln!(s, "pass-through {mode}").unwrap();
    for c in &ev.chips {
        format_chip(c, pass, &mut s);
    }
    s
}

pub fn parse_evaluator(text: &str) -> Result<Evaluator> {
    let mut lines = content_lines(text);
    let (ln, head) = next_line(&mut lines, "header")?;
    if head != MAGIC {
        return Err(Error::parse(ln, format!("expected `{MAGIC}`")));
    }
    let n = num(&mut lines, "n")? as usize;
    let registers = num(&mut lines, "registers")? as usize;
    let count = num(&mut lines, "chips")? as usize;
    let randomized = match num(&mut lines, "randomized")? {
        0 => false,
        1 => true,
        _ => return Err(Error::parse(0, "randomized must be 0 or 1")),
    };
    let (sl, hex) = raw(&mut lines, "random-seed")?;
    let random_seed = parse_seed(sl, hex)?;
    let random_bits = num(&mut lines, "random-bits")?;
    let linear_layers = num(&mut lines, "linear-layers")? as usize;
    let nonlinear_layers = num(&mut lines, "nonlinear-layers")? as usize;
    let seed_gates = num(&mut lines, "seed-gates")? as usize;
    let (el, exp) = raw(&mut lines, "expansion")?;
    let chips_per_gate: Vec<usize> = num_list(el, exp, "expansion")?;
    if chips_per_gate.len() != seed_gates {
        return Err(Error::parse(el, "expansion list length differs from seed-gates"));
    }
    if chips_per_gate.iter().sum::<usize>() != count {
        return Err(Error::parse(el, "expansion list does not add up to the chip count"));
    }
    let (pl, mode) = raw(&mut lines, "pass-through")?;
    if mode != "implicit" && mode != "explicit" {
        return Err(Error::parse(pl, "pass-through must be implicit or explicit"));
    }
    let mut chips = Vec::with_capacity(count);
    for _ in 0..count {
        chips.push(parse_chip(&mut lines, n)?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(ln, "trailing content after the last chip"));
    }
    let provenance = Provenance {
        chips_per_gate,
        randomized,
        random_seed,
        random_bits,
        linear_layers,
        nonlinear_layers,
    };
    Evaluator::new(n, registers, chips, provenance)
}

fn raw<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<(usize, &'a str)> {
    let (ln, l) = next_line(lines, name)?;
    match l.split_once(' ') {
        Some((k, v)) if k == name => Ok((ln, v.trim())),
        // an empty value, as in `expansion` with no gates
        None if l == name => Ok((ln, "")),
        _ => Err(Error::parse(ln, format!("expected `{name} <value>`"))),
    }
}

fn num<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<u64> {
    let (ln, l) = next_line(lines, name)?;
    keyed(ln, l, name)
}
