//! Key file format.
//!
//! ```text
//! eoc-key 1
//! n 9
//! nd 2
//! na 1
//! ng 6
//! ll 4
//! ln 2
//! seed <64 hex digits>
//! perm 4 0 7 ...
//! linear 1
//! a 0 4 7 110101111 010
//! ...
//! nonlinear 1
//! g 0 4 7 30125674
//! ```
//!
//! Affine records list the bitlines, the matrix row-major (`M[i][j]` is
//! output bit `i` for input basis vector `j`) and the shift bits. An
//! optional `perm-n` line after `perm` gives a separate nonlinear-stage
//! permutation.

use std::fmt::Write;

use super::{CipherKey, RegisterLayout};
use crate::error::{Error, Result};
use crate::gate::{AffineGate3, Gate3};
use crate::textio::{content_lines, format_seed, keyed, next_line, num_list, parse_num, parse_seed};

const MAGIC: &str = "eoc-key 1";

fn bit_string(bits: impl Iterator<Item = bool>) -> String {
    bits.map(|b| if b { '1' } else { '0' }).collect()
}

pub fn format_key(key: &CipherKey) -> String {
    let l = key.layout();
    let mut s = String::new();
    writeln!(s, "{MAGIC}").unwrap();
    writeln!(s, "n {}", l.n()).unwrap();
    writeln!(s, "nd {}", l.n_d()).unwrap();
    writeln!(s, "na {}", l.n_a()).unwrap();
    writeln!(s, "ng {}", l.n_g()).unwrap();
    writeln!(s, "ll {}", key.linear_layers().len()).unwrap();
    writeln!(s, "ln {}", key.nonlinear_layers().len()).unwrap();
    let seed = format_seed(key.seed());
    writeln!(s, "seed {seed}").unwrap();
    let join = |p: &[usize]| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(s, "perm {}", join(key.permutation())).unwrap();
    if key.has_separate_permutations() {
        writeln!(s, "perm-n {}", join(key.nonlinear_permutation())).unwrap();
    }
    for (i, layer) in key.linear_layers().iter().enumerate() {
        writeln!(s, "linear {}", i + 1).unwrap();
        for g in layer {
            let [a, b, c] = g.lines();
            let cols = g.columns();
            let m = bit_string((0..9).map(|k| cols[k % 3] >> (k / 3) & 1 == 1));
            let sh = bit_string((0..3).map(|k| g.shift() >> k & 1 == 1));
            writeln!(s, "a {a} {b} {c} {m} {sh}").unwrap();
        }
    }
    for (i, layer) in key.nonlinear_layers().iter().enumerate() {
        writeln!(s, "nonlinear {}", i + 1).unwrap();
        for g in layer {
            let [a, b, c] = g.lines();
            let lut: String = g.lut().iter().map(|v| char::from(b'0' + v)).collect();
            writeln!(s, "g {a} {b} {c} {lut}").unwrap();
        }
    }
    s
}

fn parse_bits(line: usize, s: &str, len: usize) -> Result<Vec<bool>> {
    if s.len() != len || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::parse(line, format!("expected {len} binary digits, got {s:?}")));
    }
    Ok(s.bytes().map(|b| b == b'1').collect())
}

fn parse_lines3(line: usize, toks: &[&str]) -> Result<[usize; 3]> {
    Ok([
        parse_num(line, toks[1], "bitline")?,
        parse_num(line, toks[2], "bitline")?,
        parse_num(line, toks[3], "bitline")?,
    ])
}

pub fn parse_key(text: &str) -> Result<CipherKey> {
    let mut lines = content_lines(text).peekable();
    let (ln, magic) = next_line(&mut lines, "key header")?;
    if magic != MAGIC {
        return Err(Error::parse(ln, format!("expected `{MAGIC}`")));
    }
    let mut field = |name: &str| -> Result<usize> {
        let (ln, l) = next_line(&mut lines, name)?;
        keyed(ln, l, name)
    };
    let n = field("n")?;
    let nd = field("nd")?;
    let na = field("na")?;
    let ng = field("ng")?;
    let ll = field("ll")?;
    let lnl = field("ln")?;
    let layout = RegisterLayout::with_padding(n, nd, na, ng)?;

    let (sl, seed_line) = next_line(&mut lines, "seed")?;
    let hex = seed_line
        .strip_prefix("seed ")
        .ok_or_else(|| Error::parse(sl, "expected `seed <hex>`"))?;
    let seed = parse_seed(sl, hex)?;

    let (pl, perm_line) = next_line(&mut lines, "perm")?;
    let perm: Vec<usize> = num_list(
        pl,
        perm_line
            .strip_prefix("perm ")
            .ok_or_else(|| Error::parse(pl, "expected `perm ...`"))?,
        "permutation entry",
    )?;
    let mut perm_n = None;
    if let Some(&(pl, l)) = lines.peek() {
        if let Some(rest) = l.strip_prefix("perm-n ") {
            perm_n = Some(num_list(pl, rest, "permutation entry")?);
            lines.next();
        }
    }

    let per_layer = n / 3;
    let mut linear = Vec::with_capacity(ll);
    for i in 1..=ll {
        let (hl, h) = next_line(&mut lines, "linear layer header")?;
        if keyed::<usize>(hl, h, "linear")? != i {
            return Err(Error::parse(hl, format!("expected `linear {i}`")));
        }
        let mut layer = Vec::with_capacity(per_layer);
        for _ in 0..per_layer {
            let (gl, g) = next_line(&mut lines, "affine gate record")?;
            let toks: Vec<&str> = g.split_whitespace().collect();
            if toks.len() != 6 || toks[0] != "a" {
                return Err(Error::parse(gl, "expected `a j1 j2 j3 <9 bits> <3 bits>`"));
            }
            let m = parse_bits(gl, toks[4], 9)?;
            let sh = parse_bits(gl, toks[5], 3)?;
            let mut cols = [0u8; 3];
            for (k, &b) in m.iter().enumerate() {
                if b {
                    cols[k % 3] |= 1 << (k / 3);
                }
            }
            let shift = sh.iter().enumerate().fold(0u8, |a, (k, &b)| a | (b as u8) << k);
            let gate = AffineGate3::new(parse_lines3(gl, &toks)?, cols, shift)
                .map_err(|e| Error::parse(gl, e.to_string()))?;
            layer.push(gate);
        }
        linear.push(layer);
    }
    let mut nonlinear = Vec::with_capacity(lnl);
    for i in 1..=lnl {
        let (hl, h) = next_line(&mut lines, "nonlinear layer header")?;
        if keyed::<usize>(hl, h, "nonlinear")? != i {
            return Err(Error::parse(hl, format!("expected `nonlinear {i}`")));
        }
        let mut layer = Vec::with_capacity(per_layer);
        for _ in 0..per_layer {
            let (gl, g) = next_line(&mut lines, "nonlinear gate record")?;
            let toks: Vec<&str> = g.split_whitespace().collect();
            if toks.len() != 5 || toks[0] != "g" || toks[4].len() != 8 {
                return Err(Error::parse(gl, "expected `g j1 j2 j3 <8 lut digits>`"));
            }
            let mut lut = [0u8; 8];
            for (slot, b) in lut.iter_mut().zip(toks[4].bytes()) {
                if !(b'0'..=b'7').contains(&b) {
                    return Err(Error::parse(gl, "lut digits must be 0-7"));
                }
                *slot = b - b'0';
            }
            let gate = Gate3::new(parse_lines3(gl, &toks)?, lut)
                .map_err(|e| Error::parse(gl, e.to_string()))?;
            layer.push(gate);
        }
        nonlinear.push(layer);
    }
    if let Some((el, _)) = lines.next() {
        return Err(Error::parse(el, "trailing content after last layer"));
    }
    CipherKey::from_parts(layout, perm, perm_n, linear, nonlinear, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{keygen, KeygenOptions};
    use crate::gateset::{enumerate_inflationary, enumerate_super_nonlinear, Predicate};

    #[test]
    fn key_file_round_trip_is_exact() {
        let l = enumerate_inflationary();
        let nl = enumerate_super_nonlinear(Predicate::Strict);
        for (n, sep) in [(9, false), (27, true)] {
            let layout = RegisterLayout::new(n, 2, 1).unwrap();
            let opts = KeygenOptions {
                separate_permutations: sep,
                ..Default::default()
            };
            let k = keygen(layout, &l, &nl, [7; 32], &opts).unwrap();
            let text = format_key(&k);
            let back = parse_key(&text).unwrap();
            assert_eq!(back, k);
            assert_eq!(format_key(&back), text);
        }
    }

    #[test]
    fn corrupt_key_rejected() {
        let l = enumerate_inflationary();
        let nl = enumerate_super_nonlinear(Predicate::Strict);
        let layout = RegisterLayout::new(9, 2, 1).unwrap();
        let k = keygen(layout, &l, &nl, [1; 32], &KeygenOptions::default()).unwrap();
        let text = format_key(&k);
        let bad = text.replacen("eoc-key 1", "eoc-key 2", 1);
        assert!(parse_key(&bad).is_err());
        let truncated: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(parse_key(&truncated).is_err());
    }
}
