//! Fixed-width bit vectors used for register states and GF(2) vectors.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// A fixed-length vector of bits, stored little-endian in 64-bit words.
///
/// Bit `i` of a register is bitline `i`. When a `Bits` value is converted
/// to or from an integer, bitline 0 is the least significant bit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut b = Bits::zeros(len);
        for i in 0..len.min(64) {
            if value >> i & 1 == 1 {
                b.set(i, true);
            }
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Bits::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// Bitlines listed in `ones` set, everything else clear.
    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bits::zeros(len);
        for i in ones {
            b.set(i, true);
        }
        b
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut b = Bits::zeros(len);
        for w in b.words.iter_mut() {
            *w = rng.gen();
        }
        b.mask_tail();
        b
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Integer value with bitline 0 as the least significant bit.
    pub fn to_u64(&self) -> Result<u64> {
        if self.len > 64 {
            return Err(Error::InvalidInput(format!(
                "{}-bit vector does not fit in 64 bits",
                self.len
            )));
        }
        Ok(self.words.first().copied().unwrap_or(0))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.ones().next()
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &Bits) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Copy of `self[start..start + len]`.
    pub fn slice(&self, start: usize, len: usize) -> Bits {
        let mut out = Bits::zeros(len);
        for i in 0..len {
            out.set(i, self.get(start + i));
        }
        out
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = Bits::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Packs bits LSB-first into bytes and renders them as lowercase hex.
    pub fn to_hex(&self) -> String {
        let nbytes = self.len.div_ceil(8);
        let mut s = String::with_capacity(nbytes * 2);
        for byte in 0..nbytes {
            let w = self.words[byte / 8] >> ((byte % 8) * 8) & 0xff;
            s.push_str(&format!("{w:02x}"));
        }
        s
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Bits> {
        let hex = hex.trim();
        if hex.len() != len.div_ceil(8) * 2 {
            return Err(Error::InvalidInput(format!(
                "hex string of {} chars cannot hold exactly {len} bits",
                hex.len()
            )));
        }
        let mut out = Bits::zeros(len);
        for (byte, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let txt = std::str::from_utf8(chunk).map_err(|_| Error::InvalidInput("bad hex".into()))?;
            let v = u8::from_str_radix(txt, 16)
                .map_err(|_| Error::InvalidInput(format!("bad hex digit pair {txt:?}")))?;
            for k in 0..8 {
                let i = byte * 8 + k;
                if v >> k & 1 == 1 {
                    if i >= len {
                        return Err(Error::InvalidInput("hex sets bits beyond declared length".into()));
                    }
                    out.set(i, true);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

/// Renders bitline 0 first.
impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
