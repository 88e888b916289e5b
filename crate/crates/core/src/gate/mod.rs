//! Reversible gates and circuits with exact simulation.
//!
//! Two gate families are modelled:
//!
//! * [`ControlledGate`]: flips a target bit when a conjunction of polarized
//!   control literals holds. NOT, CNOT and Toffoli are the 0, 1 and 2
//!   control cases; more controls are allowed as rewrite intermediates.
//! * [`Gate3`]: an arbitrary permutation of the 8 values of three bitlines,
//!   given by a lookup table. [`AffineGate3`] is the affine subfamily
//!   `y = Mx ^ c` used by the linear cipher stage.
//!
//! A [`Circuit`] lists gates in execution order: `gates[0]` acts on the
//! state first.

mod text;

use std::fmt;

use crate::bits::Bits;
use crate::error::{Error, Result};

pub use text::{format_circuit, parse_circuit};

/// Widest circuit the truth-table oracle will tabulate.
pub const ORACLE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    /// Control fires when the bit is 1.
    Positive,
    /// Control fires when the bit is 0.
    Negative,
}

impl Polarity {
    pub fn from_negated(negated: bool) -> Self {
        if negated {
            Polarity::Negative
        } else {
            Polarity::Positive
        }
    }

    pub fn is_negative(self) -> bool {
        self == Polarity::Negative
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Control {
    pub bit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn pos(bit: usize) -> Self {
        Control {
            bit,
            polarity: Polarity::Positive,
        }
    }

    pub fn neg(bit: usize) -> Self {
        Control {
            bit,
            polarity: Polarity::Negative,
        }
    }

    #[inline]
    pub fn holds(&self, value: bool) -> bool {
        value != self.polarity.is_negative()
    }

    pub fn flipped(self) -> Self {
        Control {
            bit: self.bit,
            polarity: self.polarity.flipped(),
        }
    }
}

impl fmt::Display for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.polarity.is_negative() { '-' } else { '+' };
        write!(f, "{sign}{}", self.bit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Not,
    Cnot,
    Toffoli,
    /// Three or more controls.
    Multi(usize),
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::Not => "NOT",
            GateKind::Cnot => "CNOT",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Multi(_) => "MCT",
        }
    }
}

/// Bit flip on `target` conditioned on the conjunction of `controls`.
///
/// Controls are kept sorted by bit index so that structurally equal gates
/// compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ControlledGate {
    target: usize,
    controls: Vec<Control>,
}

impl ControlledGate {
    pub fn new(target: usize, mut controls: Vec<Control>) -> Result<Self> {
        controls.sort();
        for w in controls.windows(2) {
            if w[0].bit == w[1].bit {
                return Err(Error::InvalidInput(format!(
                    "control bit {} listed twice",
                    w[0].bit
                )));
            }
        }
        if controls.iter().any(|c| c.bit == target) {
            return Err(Error::InvalidInput(format!(
                "target {target} is also a control"
            )));
        }
        Ok(ControlledGate { target, controls })
    }

    pub fn not(target: usize) -> Self {
        ControlledGate {
            target,
            controls: Vec::new(),
        }
    }

    pub fn cnot(control: Control, target: usize) -> Result<Self> {
        Self::new(target, vec![control])
    }

    pub fn toffoli(c1: Control, c2: Control, target: usize) -> Result<Self> {
        Self::new(target, vec![c1, c2])
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn control_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().map(|c| c.bit)
    }

    pub fn has_control_on(&self, bit: usize) -> bool {
        self.controls.iter().any(|c| c.bit == bit)
    }

    pub fn control_on(&self, bit: usize) -> Option<Control> {
        self.controls.iter().copied().find(|c| c.bit == bit)
    }

    /// All bitlines the gate reads or writes, target last.
    pub fn lines(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.control_bits().collect();
        v.push(self.target);
        v
    }

    pub fn max_bit(&self) -> usize {
        self.control_bits().chain([self.target]).max().unwrap_or(0)
    }

    pub fn kind(&self) -> GateKind {
        match self.controls.len() {
            0 => GateKind::Not,
            1 => GateKind::Cnot,
            2 => GateKind::Toffoli,
            k => GateKind::Multi(k),
        }
    }

    /// Same gate with the controls replaced.
    pub fn with_controls(&self, controls: Vec<Control>) -> Result<Self> {
        Self::new(self.target, controls)
    }

    #[inline]
    pub fn fires(&self, state: &Bits) -> bool {
        self.controls.iter().all(|c| c.holds(state.get(c.bit)))
    }

    #[inline]
    pub fn fires_u64(&self, x: u64) -> bool {
        self.controls.iter().all(|c| c.holds(x >> c.bit & 1 == 1))
    }

    /// In-place application; indices are assumed validated.
    #[inline]
    pub fn apply_in_place(&self, state: &mut Bits) {
        if self.fires(state) {
            state.flip(self.target);
        }
    }

    #[inline]
    pub fn apply_u64(&self, x: u64) -> u64 {
        if self.fires_u64(x) {
            x ^ (1 << self.target)
        } else {
            x
        }
    }

    fn check_width(&self, width: usize) -> Result<()> {
        let m = self.max_bit();
        if m >= width {
            return Err(Error::IndexOutOfRange { index: m, width });
        }
        Ok(())
    }
}

impl fmt::Display for ControlledGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind().name())?;
        for c in &self.controls {
            write!(f, " c={c}")?;
        }
        write!(f, " t={}", self.target)
    }
}

/// Returns `state` with `gate` applied.
pub fn apply_gate(gate: &ControlledGate, state: &Bits) -> Result<Bits> {
    gate.check_width(state.len())?;
    let mut out = state.clone();
    gate.apply_in_place(&mut out);
    Ok(out)
}

/// Checks that `lut` is a permutation of 0..8.
pub fn is_permutation8(lut: &[u8; 8]) -> bool {
    let mut seen = 0u8;
    for &v in lut {
        if v >= 8 {
            return false;
        }
        seen |= 1 << v;
    }
    seen == 0xff
}

pub fn invert_lut(lut: &[u8; 8]) -> [u8; 8] {
    let mut inv = [0u8; 8];
    for (x, &y) in lut.iter().enumerate() {
        inv[y as usize] = x as u8;
    }
    inv
}

/// Three-bit permutation gate on bitlines `j1 < j2 < j3`.
///
/// The local value read from the lines is `x_j1 + 2 x_j2 + 4 x_j3`; the gate
/// replaces it with `lut[value]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate3 {
    lines: [usize; 3],
    lut: [u8; 8],
}

impl Gate3 {
    pub fn new(lines: [usize; 3], lut: [u8; 8]) -> Result<Self> {
        if !(lines[0] < lines[1] && lines[1] < lines[2]) {
            return Err(Error::InvalidInput(format!(
                "gate bitlines must be strictly increasing, got {lines:?}"
            )));
        }
        if !is_permutation8(&lut) {
            return Err(Error::InvalidInput(format!("lut {lut:?} is not a permutation")));
        }
        Ok(Gate3 { lines, lut })
    }

    /// Builds a gate on an arbitrary (distinct) triple by sorting the lines
    /// and relabelling the lut to match.
    pub fn on_unsorted(lines: [usize; 3], lut: [u8; 8]) -> Result<Self> {
        let mut idx = [0usize, 1, 2];
        idx.sort_by_key(|&k| lines[k]);
        let sorted = [lines[idx[0]], lines[idx[1]], lines[idx[2]]];
        // local bit k of the sorted gate is bit idx[k] of the original
        let to_orig = |v: u8| -> u8 {
            (0..3).fold(0, |acc, k| acc | ((v >> k & 1) << idx[k]))
        };
        let from_orig = |v: u8| -> u8 {
            (0..3).fold(0, |acc, k| acc | ((v >> idx[k] & 1) << k))
        };
        let mut out = [0u8; 8];
        for (v, slot) in out.iter_mut().enumerate() {
            *slot = from_orig(lut[to_orig(v as u8) as usize]);
        }
        Gate3::new(sorted, out)
    }

    pub fn identity(lines: [usize; 3]) -> Result<Self> {
        Gate3::new(lines, [0, 1, 2, 3, 4, 5, 6, 7])
    }

    pub fn lines(&self) -> [usize; 3] {
        self.lines
    }

    pub fn lut(&self) -> [u8; 8] {
        self.lut
    }

    pub fn inverse(&self) -> Gate3 {
        Gate3 {
            lines: self.lines,
            lut: invert_lut(&self.lut),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.lut == [0, 1, 2, 3, 4, 5, 6, 7]
    }

    /// Output coordinate `k` (0..3) as a function of the local input value.
    #[inline]
    pub fn output_bit(&self, k: usize, local: u8) -> bool {
        self.lut[local as usize] >> k & 1 == 1
    }

    #[inline]
    pub fn read_local(&self, state: &Bits) -> u8 {
        (state.get(self.lines[0]) as u8)
            | (state.get(self.lines[1]) as u8) << 1
            | (state.get(self.lines[2]) as u8) << 2
    }

    #[inline]
    pub fn apply_in_place(&self, state: &mut Bits) {
        let y = self.lut[self.read_local(state) as usize];
        for (k, &l) in self.lines.iter().enumerate() {
            state.set(l, y >> k & 1 == 1);
        }
    }

    #[inline]
    pub fn apply_u64(&self, x: u64) -> u64 {
        let [a, b, c] = self.lines;
        let v = (x >> a & 1) | (x >> b & 1) << 1 | (x >> c & 1) << 2;
        let y = self.lut[v as usize] as u64;
        let cleared = x & !(1 << a | 1 << b | 1 << c);
        cleared | (y & 1) << a | (y >> 1 & 1) << b | (y >> 2 & 1) << c
    }

    fn check_width(&self, width: usize) -> Result<()> {
        if self.lines[2] >= width {
            return Err(Error::IndexOutOfRange {
                index: self.lines[2],
                width,
            });
        }
        Ok(())
    }
}

/// Returns `state` with the three-bit gate applied.
pub fn apply_gate3(gate: &Gate3, state: &Bits) -> Result<Bits> {
    gate.check_width(state.len())?;
    let mut out = state.clone();
    gate.apply_in_place(&mut out);
    Ok(out)
}

/// Multiplies a 3x3 GF(2) matrix, stored as three column bytes, by `x`.
#[inline]
pub fn mat3_mul(columns: &[u8; 3], x: u8) -> u8 {
    (0..3).fold(0, |acc, j| if x >> j & 1 == 1 { acc ^ columns[j] } else { acc })
}

/// Inverse of a 3x3 GF(2) matrix given by columns, if it exists.
pub fn mat3_inverse(columns: &[u8; 3]) -> Option<[u8; 3]> {
    // the map is a permutation of 0..8 iff invertible; read the inverse off it
    let mut inv = [0u8; 3];
    let mut found = [false; 3];
    for x in 1u8..8 {
        let y = mat3_mul(columns, x);
        if y == 0 {
            return None;
        }
        for (j, slot) in inv.iter_mut().enumerate() {
            if y == 1 << j {
                *slot = x;
                found[j] = true;
            }
        }
    }
    found.iter().all(|&f| f).then_some(inv)
}

pub fn mat3_transpose(columns: &[u8; 3]) -> [u8; 3] {
    let mut out = [0u8; 3];
    for (j, col) in columns.iter().enumerate() {
        for (i, slot) in out.iter_mut().enumerate() {
            if col >> i & 1 == 1 {
                *slot |= 1 << j;
            }
        }
    }
    out
}

/// Affine three-bit gate `y = M x ^ shift` on bitlines `j1 < j2 < j3`.
///
/// `columns[j]` is the image of the local basis vector `e_j` under `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AffineGate3 {
    lines: [usize; 3],
    columns: [u8; 3],
    shift: u8,
}

impl AffineGate3 {
    pub fn new(lines: [usize; 3], columns: [u8; 3], shift: u8) -> Result<Self> {
        if !(lines[0] < lines[1] && lines[1] < lines[2]) {
            return Err(Error::InvalidInput(format!(
                "gate bitlines must be strictly increasing, got {lines:?}"
            )));
        }
        if columns.iter().any(|&c| c >= 8) || shift >= 8 {
            return Err(Error::InvalidInput("matrix entries must be 3-bit".into()));
        }
        if mat3_inverse(&columns).is_none() {
            return Err(Error::Singular);
        }
        Ok(AffineGate3 {
            lines,
            columns,
            shift,
        })
    }

    /// Extracts `(M, c)` from a lut if the permutation is affine.
    pub fn from_gate3(gate: &Gate3) -> Option<Self> {
        let (columns, shift) = affine_parts(&gate.lut())?;
        Some(AffineGate3 {
            lines: gate.lines(),
            columns,
            shift,
        })
    }

    pub fn lines(&self) -> [usize; 3] {
        self.lines
    }

    pub fn columns(&self) -> [u8; 3] {
        self.columns
    }

    pub fn shift(&self) -> u8 {
        self.shift
    }

    #[inline]
    pub fn apply_local(&self, x: u8) -> u8 {
        mat3_mul(&self.columns, x) ^ self.shift
    }

    pub fn lut(&self) -> [u8; 8] {
        let mut lut = [0u8; 8];
        for (x, slot) in lut.iter_mut().enumerate() {
            *slot = self.apply_local(x as u8);
        }
        lut
    }

    pub fn to_gate3(&self) -> Gate3 {
        Gate3 {
            lines: self.lines,
            lut: self.lut(),
        }
    }

    pub fn inverse_columns(&self) -> [u8; 3] {
        mat3_inverse(&self.columns).expect("validated invertible")
    }

    /// `x = M^-1 (y ^ c)`, itself affine with shift `M^-1 c`.
    pub fn inverse(&self) -> AffineGate3 {
        let inv = self.inverse_columns();
        AffineGate3 {
            lines: self.lines,
            columns: inv,
            shift: mat3_mul(&inv, self.shift),
        }
    }
}

/// Splits a lut into `(M, c)` when it is affine over GF(2).
pub fn affine_parts(lut: &[u8; 8]) -> Option<([u8; 3], u8)> {
    let c = lut[0];
    let linear = |x: usize| lut[x] ^ c;
    for x in 0..8 {
        for y in 0..8 {
            if linear(x ^ y) != linear(x) ^ linear(y) {
                return None;
            }
        }
    }
    Some(([linear(1), linear(2), linear(4)], c))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Controlled(ControlledGate),
    Three(Gate3),
}

impl Gate {
    #[inline]
    pub fn apply_in_place(&self, state: &mut Bits) {
        match self {
            Gate::Controlled(g) => g.apply_in_place(state),
            Gate::Three(g) => g.apply_in_place(state),
        }
    }

    #[inline]
    pub fn apply_u64(&self, x: u64) -> u64 {
        match self {
            Gate::Controlled(g) => g.apply_u64(x),
            Gate::Three(g) => g.apply_u64(x),
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Controlled(g) => Gate::Controlled(g.clone()),
            Gate::Three(g) => Gate::Three(g.inverse()),
        }
    }

    pub fn max_bit(&self) -> usize {
        match self {
            Gate::Controlled(g) => g.max_bit(),
            Gate::Three(g) => g.lines[2],
        }
    }

    pub fn as_controlled(&self) -> Option<&ControlledGate> {
        match self {
            Gate::Controlled(g) => Some(g),
            Gate::Three(_) => None,
        }
    }
}

impl From<ControlledGate> for Gate {
    fn from(g: ControlledGate) -> Self {
        Gate::Controlled(g)
    }
}

impl From<Gate3> for Gate {
    fn from(g: Gate3) -> Self {
        Gate::Three(g)
    }
}

impl From<AffineGate3> for Gate {
    fn from(g: AffineGate3) -> Self {
        Gate::Three(g.to_gate3())
    }
}

/// A reversible circuit on `width` bitlines, gates in execution order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
    registers: Option<u8>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
            registers: None,
        }
    }

    pub fn from_gates(width: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(width);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn from_controlled(
        width: usize,
        gates: impl IntoIterator<Item = ControlledGate>,
    ) -> Result<Self> {
        Self::from_gates(width, gates.into_iter().map(Gate::Controlled))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn registers(&self) -> Option<u8> {
        self.registers
    }

    pub fn set_registers(&mut self, registers: Option<u8>) {
        self.registers = registers;
    }

    pub fn push(&mut self, gate: impl Into<Gate>) -> Result<()> {
        let gate = gate.into();
        let m = gate.max_bit();
        if m >= self.width {
            return Err(Error::IndexOutOfRange {
                index: m,
                width: self.width,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Controlled gates only; `None` if any 3-bit gate is present.
    pub fn controlled_gates(&self) -> Option<Vec<ControlledGate>> {
        self.gates
            .iter()
            .map(|g| g.as_controlled().cloned())
            .collect()
    }

    pub fn apply(&self, state: &Bits) -> Result<Bits> {
        if state.len() != self.width {
            return Err(Error::InvalidInput(format!(
                "state has {} bits, circuit width is {}",
                state.len(),
                self.width
            )));
        }
        let mut s = state.clone();
        self.apply_in_place(&mut s);
        Ok(s)
    }

    pub fn apply_in_place(&self, state: &mut Bits) {
        for g in &self.gates {
            g.apply_in_place(state);
        }
    }

    #[inline]
    pub fn apply_u64(&self, x: u64) -> u64 {
        self.gates.iter().fold(x, |s, g| g.apply_u64(s))
    }

    /// Appends `other` after `self` (so `other` acts second).
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if self.width != other.width {
            return Err(Error::InvalidInput("circuit widths differ".into()));
        }
        let mut out = self.clone();
        out.gates.extend(other.gates.iter().cloned());
        Ok(out)
    }

    /// Same gates on a wider register.
    pub fn widened(&self, width: usize) -> Result<Circuit> {
        if width < self.width {
            return Err(Error::InvalidInput("cannot narrow a circuit".into()));
        }
        Ok(Circuit {
            width,
            gates: self.gates.clone(),
            registers: self.registers,
        })
    }

    /// Full permutation table, `table[x] = circuit(x)`.
    pub fn truth_table(&self) -> Result<Vec<u32>> {
        truth_table_with_limit(self, ORACLE_LIMIT)
    }
}

pub fn truth_table_with_limit(circuit: &Circuit, limit: usize) -> Result<Vec<u32>> {
    let n = circuit.width();
    if n > limit || n > 31 {
        return Err(Error::OracleLimit { width: n, limit });
    }
    Ok((0..1u64 << n)
        .map(|x| circuit.apply_u64(x) as u32)
        .collect())
}

pub fn truth_table(circuit: &Circuit) -> Result<Vec<u32>> {
    circuit.truth_table()
}

/// Inverse circuit: reversed order, each gate inverted.
pub fn invert_circuit(circuit: &Circuit) -> Circuit {
    Circuit {
        width: circuit.width,
        gates: circuit.gates.iter().rev().map(Gate::inverse).collect(),
        registers: circuit.registers,
    }
}

/// `(second after first)[x] = second[first[x]]`.
pub fn compose_tables(first: &[u32], second: &[u32]) -> Vec<u32> {
    first.iter().map(|&y| second[y as usize]).collect()
}

pub fn invert_table(table: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; table.len()];
    for (x, &y) in table.iter().enumerate() {
        inv[y as usize] = x as u32;
    }
    inv
}

pub fn is_permutation_table(table: &[u32]) -> bool {
    let mut seen = vec![false; table.len()];
    for &y in table {
        let y = y as usize;
        if y >= seen.len() || seen[y] {
            return false;
        }
        seen[y] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Bits {
        Bits::from_bools(&s.chars().map(|c| c == '1').collect::<Vec<_>>())
    }

    #[test]
    fn toffoli_examples() {
        let t = ControlledGate::toffoli(Control::pos(0), Control::pos(1), 2).unwrap();
        assert_eq!(apply_gate(&t, &bits("110")).unwrap(), bits("111"));
        assert_eq!(apply_gate(&t, &bits("100")).unwrap(), bits("100"));
    }

    #[test]
    fn negative_cnot_against_truth_table() {
        let g = ControlledGate::cnot(Control::neg(0), 1).unwrap();
        // rows (x0, x1) -> (x0, x1 ^ !x0)
        for (inp, out) in [("00", "01"), ("01", "00"), ("10", "10"), ("11", "11")] {
            assert_eq!(apply_gate(&g, &bits(inp)).unwrap(), bits(out), "{inp}");
        }
    }

    #[test]
    fn gate_validation() {
        assert!(ControlledGate::cnot(Control::pos(1), 1).is_err());
        assert!(ControlledGate::new(3, vec![Control::pos(1), Control::neg(1)]).is_err());
        let g = ControlledGate::cnot(Control::pos(5), 0).unwrap();
        assert!(matches!(
            apply_gate(&g, &Bits::zeros(4)),
            Err(Error::IndexOutOfRange { index: 5, width: 4 })
        ));
        assert!(Gate3::new([0, 2, 1], [0, 1, 2, 3, 4, 5, 6, 7]).is_err());
        assert!(Gate3::new([0, 1, 2], [0, 0, 2, 3, 4, 5, 6, 7]).is_err());
    }

    #[test]
    fn identity_gate3_leaves_state() {
        let g = Gate3::identity([1, 3, 4]).unwrap();
        let s = bits("10110");
        assert_eq!(apply_gate3(&g, &s).unwrap(), s);
    }

    #[test]
    fn affine_first_column_example() {
        // columns written (y_j1, y_j2, y_j3): 011, 101, 111
        let col = |s: &str| bits(s).to_u64().unwrap() as u8;
        let a = AffineGate3::new([0, 1, 2], [col("011"), col("101"), col("111")], 0).unwrap();
        let out = apply_gate3(&a.to_gate3(), &bits("100")).unwrap();
        assert_eq!(out, bits("011"));
    }

    #[test]
    fn lut_and_affine_agree_exhaustively() {
        for cols in 0u32..512 {
            let columns = [(cols & 7) as u8, (cols >> 3 & 7) as u8, (cols >> 6 & 7) as u8];
            for shift in 0..8 {
                let Ok(a) = AffineGate3::new([1, 2, 4], columns, shift) else { continue };
                let g = a.to_gate3();
                for x in 0u64..8 {
                    let s = Bits::from_u64(x << 1, 5);
                    let via_lut = apply_gate3(&g, &s).unwrap();
                    let local = a.apply_local(g.read_local(&s));
                    let mut via_affine = s.clone();
                    for (k, &l) in a.lines().iter().enumerate() {
                        via_affine.set(l, local >> k & 1 == 1);
                    }
                    assert_eq!(via_lut, via_affine);
                }
                assert_eq!(AffineGate3::from_gate3(&g), Some(a));
                let inv = a.inverse();
                for x in 0..8 {
                    assert_eq!(inv.apply_local(a.apply_local(x)), x);
                }
            }
        }
    }

    #[test]
    fn unsorted_lines_relabel_lut() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut lut = [0u8, 1, 2, 3, 4, 5, 6, 7];
            for i in (1..8).rev() {
                lut.swap(i, rng.gen_range(0..=i));
            }
            let lines = [4usize, 0, 2];
            let g = Gate3::on_unsorted(lines, lut).unwrap();
            for x in 0u64..32 {
                let v = (x >> 4 & 1) | (x & 1) << 1 | (x >> 2 & 1) << 2;
                let y = lut[v as usize] as u64;
                let mut expect = x & !(1 << 4 | 1 | 1 << 2);
                expect |= (y & 1) << 4 | (y >> 1 & 1) | (y >> 2 & 1) << 2;
                assert_eq!(g.apply_u64(x), expect);
            }
        }
    }

    #[test]
    fn truth_table_basics() {
        assert_eq!(Circuit::new(3).truth_table().unwrap(), (0..8).collect::<Vec<u32>>());
        let mut c = Circuit::new(1);
        c.push(ControlledGate::not(0)).unwrap();
        assert_eq!(c.truth_table().unwrap(), vec![1, 0]);
        assert!(matches!(
            Circuit::new(21).truth_table(),
            Err(Error::OracleLimit { width: 21, .. })
        ));
    }

    fn random_circuit(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Circuit {
        let mut c = Circuit::new(n);
        for _ in 0..m {
            if rng.gen_bool(0.3) {
                let mut lines: Vec<usize> = rand::seq::index::sample(rng, n, 3).into_vec();
                lines.sort();
                let mut lut = [0u8, 1, 2, 3, 4, 5, 6, 7];
                for i in (1..8).rev() {
                    lut.swap(i, rng.gen_range(0..=i));
                }
                c.push(Gate3::new([lines[0], lines[1], lines[2]], lut).unwrap()).unwrap();
            } else {
                let k = rng.gen_range(0..3);
                let lines = rand::seq::index::sample(rng, n, k + 1).into_vec();
                let controls = lines[1..]
                    .iter()
                    .map(|&b| Control {
                        bit: b,
                        polarity: Polarity::from_negated(rng.gen()),
                    })
                    .collect();
                c.push(ControlledGate::new(lines[0], controls).unwrap()).unwrap();
            }
        }
        c
    }

    #[test]
    fn inverse_composes_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let c = random_circuit(&mut rng, 6, 10);
            let inv = invert_circuit(&c);
            let both = c.then(&inv).unwrap();
            assert_eq!(both.truth_table().unwrap(), (0..64).collect::<Vec<u32>>());
            let t = c.truth_table().unwrap();
            assert!(is_permutation_table(&t));
            assert_eq!(inv.truth_table().unwrap(), invert_table(&t));
        }
    }

    #[test]
    fn inversion_is_anti_homomorphic() {
        let g = Gate3::new([0, 1, 2], [1, 2, 3, 4, 5, 6, 7, 0]).unwrap();
        let h = ControlledGate::cnot(Control::pos(0), 2).unwrap();
        let c = Circuit::from_gates(3, [Gate::Three(g), Gate::Controlled(h.clone())]).unwrap();
        let inv = invert_circuit(&c);
        assert_eq!(inv.gates(), &[Gate::Controlled(h), Gate::Three(g.inverse())]);
        let single = Circuit::from_controlled(1, [ControlledGate::not(0)]).unwrap();
        assert_eq!(invert_circuit(&single), single);
    }

    #[test]
    fn circuit_action_is_a_group_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = random_circuit(&mut rng, 5, 6);
            let b = random_circuit(&mut rng, 5, 6);
            let ab = a.then(&b).unwrap();
            assert_eq!(
                ab.truth_table().unwrap(),
                compose_tables(&a.truth_table().unwrap(), &b.truth_table().unwrap())
            );
        }
    }

    #[test]
    fn controlled_gates_are_involutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let c = random_circuit(&mut rng, 6, 1);
            if let Gate::Controlled(g) = &c.gates()[0] {
                for x in 0..64u64 {
                    assert_eq!(g.apply_u64(g.apply_u64(x)), x);
                }
            }
        }
    }
}
