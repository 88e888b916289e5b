//! Helpers shared by the line-oriented text formats.

use std::str::FromStr;

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Non-blank lines with `#` comments stripped, paired with 1-based line
/// numbers.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub fn parse_num<T: FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {what} {token:?}")))
}

/// Parses `key value` where the key must match `expect`.
pub fn keyed<T: FromStr>(line: usize, text: &str, expect: &str) -> Result<T> {
    let mut it = text.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(k), Some(v), None) if k == expect => parse_num(line, v, expect),
        _ => Err(Error::parse(line, format!("expected `{expect} <value>`"))),
    }
}

/// Whitespace-separated list of numbers.
pub fn num_list<T: FromStr>(line: usize, text: &str, what: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|t| parse_num(line, t, what))
        .collect()
}

/// Pulls the next content line or fails with a message naming `what`.
pub fn next_line<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    what: &str,
) -> Result<(usize, &'a str)> {
    lines
        .next()
        .ok_or_else(|| Error::parse(0, format!("unexpected end of input, expected {what}")))
}

/// Plaintext or ciphertext file: `bits <N>` header and one hex line,
/// bytes packed LSB-first.
pub fn format_bits_file(bits: &Bits) -> String {
    format!("bits {}\n{}\n", bits.len(), bits.to_hex())
}

pub fn parse_bits_file(text: &str) -> Result<Bits> {
    let mut lines = content_lines(text);
    let (ln, head) = next_line(&mut lines, "`bits` header")?;
    let len: usize = keyed(ln, head, "bits")?;
    let hex = match lines.next() {
        Some((_, h)) => h,
        None if len == 0 => "",
        None => return Err(Error::parse(ln + 1, "missing hex payload")),
    };
    let out = Bits::from_hex(hex, len)?;
    if let Some((extra, _)) = lines.next() {
        return Err(Error::parse(extra, "trailing content after hex payload"));
    }
    Ok(out)
}

pub fn format_seed(seed: &[u8; 32]) -> String {
    seed.iter().map(|b| format!("{b:02x}")).collect()
}

/// 64 hex digits into a 32-byte seed.
pub fn parse_seed(line: usize, hex: &str) -> Result<[u8; 32]> {
    if hex.len() != 64 || !hex.is_ascii() {
        return Err(Error::parse(line, "seed must be 64 hex digits"));
    }
    let mut seed = [0u8; 32];
    for (i, b) in seed.iter_mut().enumerate() {
        *b = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
            .map_err(|_| Error::parse(line, "bad seed hex"))?;
    }
    Ok(seed)
}
