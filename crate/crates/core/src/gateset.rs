//! The 3-bit gate sets drawn by the cipher.
//!
//! Gates are identified by their lut on local bitlines (bit `k` of the local
//! value is the `k`-th line of the triple). The linear stage draws from the
//! 144 inflationary affine gates; the nonlinear stage draws from a
//! super-nonlinear set selected by a [`Predicate`].

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use itertools::Itertools;

use crate::gate::{
    affine_parts, is_permutation8, mat3_inverse, mat3_mul, AffineGate3, Control, ControlledGate,
    Gate3,
};
use crate::error::{Error, Result};
use crate::textio::{content_lines, num_list};

/// Cardinality quoted for the super-nonlinear set.
pub const SUPER_NONLINEAR_TARGET: usize = 10752;
/// Cardinality of the inflationary set.
pub const INFLATIONARY_COUNT: usize = 144;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSet {
    name: String,
    predicate: String,
    members: Vec<[u8; 8]>,
    index: HashMap<[u8; 8], usize>,
}

impl GateSet {
    pub fn new(
        name: impl Into<String>,
        predicate: impl Into<String>,
        members: Vec<[u8; 8]>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(members.len());
        for (i, lut) in members.iter().enumerate() {
            if !is_permutation8(lut) {
                return Err(Error::InvalidInput(format!("{lut:?} is not a permutation")));
            }
            if index.insert(*lut, i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate gate {lut:?}")));
            }
        }
        Ok(GateSet {
            name: name.into(),
            predicate: predicate.into(),
            members,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn members(&self) -> &[[u8; 8]] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, lut: &[u8; 8]) -> bool {
        self.index.contains_key(lut)
    }

    pub fn position(&self, lut: &[u8; 8]) -> Option<usize> {
        self.index.get(lut).copied()
    }

    /// One lut per line, 8 space-separated integers.
    pub fn to_text(&self) -> String {
        self.members
            .iter()
            .map(|l| l.iter().join(" ") + "\n")
            .collect()
    }

    pub fn from_text(name: &str, text: &str) -> Result<Self> {
        let mut members = Vec::new();
        for (ln, line) in content_lines(text) {
            let v: Vec<u8> = num_list(ln, line, "lut entry")?;
            let lut: [u8; 8] = v
                .try_into()
                .map_err(|_| Error::parse(ln, "a lut needs exactly 8 entries"))?;
            if !is_permutation8(&lut) {
                return Err(Error::parse(ln, "lut is not a permutation of 0..7"));
            }
            members.push(lut);
        }
        GateSet::new(name, "external-list", members)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        GateSet::from_text(&path.display().to_string(), &text)
    }
}

pub fn is_affine(lut: &[u8; 8]) -> bool {
    affine_parts(lut).is_some()
}

/// Affine with every single-bit input flip changing at least two outputs.
pub fn is_inflationary(gate: &Gate3) -> bool {
    is_inflationary_lut(&gate.lut())
}

pub fn is_inflationary_lut(lut: &[u8; 8]) -> bool {
    match affine_parts(lut) {
        Some((cols, _)) => cols.iter().all(|c| c.count_ones() >= 2),
        None => false,
    }
}

/// Invertible matrices whose columns all have weight at least 2, in
/// lexicographic column order.
pub fn inflationary_matrices() -> Vec<[u8; 3]> {
    let heavy: Vec<u8> = (1u8..8).filter(|c| c.count_ones() >= 2).collect();
    let mut out = Vec::new();
    for &a in &heavy {
        for &b in &heavy {
            for &c in &heavy {
                let cols = [a, b, c];
                if mat3_inverse(&cols).is_some() {
                    out.push(cols);
                }
            }
        }
    }
    out
}

/// All 144 inflationary gates, built constructively as matrix × shift.
pub fn enumerate_inflationary() -> GateSet {
    let mut members = Vec::with_capacity(INFLATIONARY_COUNT);
    for cols in inflationary_matrices() {
        for shift in 0..8 {
            let g = AffineGate3::new([0, 1, 2], cols, shift).expect("invertible by construction");
            members.push(g.lut());
        }
    }
    assert_eq!(
        members.len(),
        INFLATIONARY_COUNT,
        "inflationary enumeration produced the wrong count"
    );
    GateSet::new("inflationary", "affine, all column weights >= 2", members)
        .expect("members distinct by construction")
}

/// Number of weight-2 and weight-3 columns summed over a gate set.
pub fn column_weight_counts(set: &GateSet) -> (usize, usize) {
    let mut w2 = 0;
    let mut w3 = 0;
    for lut in set.members() {
        if let Some((cols, _)) = affine_parts(lut) {
            for c in cols {
                match c.count_ones() {
                    2 => w2 += 1,
                    3 => w3 += 1,
                    _ => {}
                }
            }
        }
    }
    (w2, w3)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topology {
    A,
    B,
    C,
    D,
}

impl Topology {
    pub const ALL: [Topology; 4] = [Topology::A, Topology::B, Topology::C, Topology::D];
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Topology::A => 'A',
            Topology::B => 'B',
            Topology::C => 'C',
            Topology::D => 'D',
        };
        write!(f, "{c}")
    }
}

fn mat3_order(cols: &[u8; 3]) -> usize {
    let id = [1u8, 2, 4];
    let mut p = *cols;
    for k in 1..=8 {
        if p == id {
            return k;
        }
        p = [mat3_mul(cols, p[0]), mat3_mul(cols, p[1]), mat3_mul(cols, p[2])];
    }
    unreachable!("GL(3,2) elements have order at most 7")
}

/// Number of ones on the diagonal; unchanged by relabelling bitlines.
fn diagonal_weight(cols: &[u8; 3]) -> u32 {
    (0..3).map(|j| (cols[j] >> j & 1) as u32).sum()
}

/// Topology class of an inflationary gate.
///
/// The four classes are the orbits of the 18 inflationary matrices under
/// simultaneous relabelling of input and output bitlines; the shift (NOT
/// polarity) is ignored. Two orbits need four CNOTs (matrix order 4) and two
/// need three (order 7); within each pair the diagonal weight separates them.
pub fn classify_topology(gate: &Gate3) -> Result<Topology> {
    let (cols, _) = affine_parts(&gate.lut()).ok_or(Error::NotInflationary)?;
    if cols.iter().any(|c| c.count_ones() < 2) {
        return Err(Error::NotInflationary);
    }
    let t = match (mat3_order(&cols), diagonal_weight(&cols)) {
        (4, 1) => Topology::A,
        (4, 3) => Topology::B,
        (7, 2) => Topology::C,
        (7, 3) => Topology::D,
        other => {
            return Err(Error::Internal(format!(
                "unexpected inflationary invariant {other:?}"
            )))
        }
    };
    Ok(t)
}

pub fn topology_histogram(set: &GateSet) -> Result<[usize; 4]> {
    let mut h = [0usize; 4];
    for lut in set.members() {
        let g = Gate3::new([0, 1, 2], *lut)?;
        h[classify_topology(&g)? as usize] += 1;
    }
    Ok(h)
}

/// Shortest NOT/CNOT circuit on the gate's own lines realizing an affine
/// gate, found by breadth-first search over the 168 invertible matrices.
pub fn decompose_affine(gate: &AffineGate3) -> Vec<ControlledGate> {
    // CNOT(c -> t) on columns: row t += row c, i.e. each column gets bit t ^= bit c
    let moves: Vec<(usize, usize)> = (0..3)
        .flat_map(|c| (0..3).filter(move |&t| t != c).map(move |t| (c, t)))
        .collect();
    let apply = |cols: [u8; 3], (c, t): (usize, usize)| -> [u8; 3] {
        cols.map(|col| col ^ ((col >> c & 1) << t))
    };
    let id = [1u8, 2, 4];
    let mut prev: HashMap<[u8; 3], ([u8; 3], (usize, usize))> = HashMap::new();
    let mut queue = VecDeque::from([id]);
    let target = gate.columns();
    let mut seen = std::collections::HashSet::from([id]);
    while let Some(m) = queue.pop_front() {
        if m == target {
            break;
        }
        for &mv in &moves {
            let next = apply(m, mv);
            if seen.insert(next) {
                prev.insert(next, (m, mv));
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = target;
    while cur != id {
        let (p, mv) = prev[&cur];
        path.push(mv);
        cur = p;
    }
    path.reverse();
    let lines = gate.lines();
    let mut out: Vec<ControlledGate> = path
        .into_iter()
        .map(|(c, t)| {
            ControlledGate::cnot(Control::pos(lines[c]), lines[t]).expect("distinct lines")
        })
        .collect();
    // y = Mx ^ shift: the NOTs act after the linear part
    for (k, &l) in lines.iter().enumerate() {
        if gate.shift() >> k & 1 == 1 {
            out.push(ControlledGate::not(l));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// Every nonzero XOR of output bits has algebraic degree at least 2.
    Strict,
    /// Each output bit separately has degree at least 2.
    Coordinatewise,
}

impl Predicate {
    pub fn name(self) -> &'static str {
        match self {
            Predicate::Strict => "strict",
            Predicate::Coordinatewise => "coordinatewise",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Predicate::Strict),
            "coordinatewise" => Ok(Predicate::Coordinatewise),
            _ => Err(Error::InvalidInput(format!("unknown predicate {s:?}"))),
        }
    }

    pub fn holds(self, lut: &[u8; 8]) -> bool {
        let masks: &[u8] = match self {
            Predicate::Strict => &[1, 2, 3, 4, 5, 6, 7],
            Predicate::Coordinatewise => &[1, 2, 4],
        };
        masks.iter().all(|&m| algebraic_degree(component(lut, m)) >= 2)
    }
}

/// Truth table (bit x) of the output combination selected by `mask`.
fn component(lut: &[u8; 8], mask: u8) -> u8 {
    (0..8).fold(0, |acc, x| {
        acc | (((lut[x] & mask).count_ones() & 1) as u8) << x
    })
}

/// Degree of the algebraic normal form of a 3-variable function.
pub fn algebraic_degree(truth: u8) -> u32 {
    let mut anf = truth;
    for i in 0..3 {
        for x in 0..8u8 {
            if x >> i & 1 == 1 {
                anf ^= (anf >> (x ^ (1 << i)) & 1) << x;
            }
        }
    }
    (0..8u8)
        .filter(|&m| anf >> m & 1 == 1)
        .map(|m| m.count_ones())
        .max()
        .unwrap_or(0)
}

/// All 40320 elements of S8 in lexicographic order.
pub fn all_s8() -> impl Iterator<Item = [u8; 8]> {
    (0u8..8)
        .permutations(8)
        .map(|p| p.try_into().expect("length 8"))
}

pub fn enumerate_super_nonlinear(pred: Predicate) -> GateSet {
    let members: Vec<[u8; 8]> = all_s8().filter(|l| pred.holds(l)).collect();
    GateSet::new(
        format!("super-nonlinear/{}", pred.name()),
        pred.name(),
        members,
    )
    .expect("S8 elements are distinct")
}

/// Super-nonlinear set used when no external list is configured: the
/// built-in predicate whose cardinality matches the target count.
pub fn default_super_nonlinear() -> Result<GateSet> {
    for p in [Predicate::Strict, Predicate::Coordinatewise] {
        let s = enumerate_super_nonlinear(p);
        if s.len() == SUPER_NONLINEAR_TARGET {
            return Ok(s);
        }
    }
    Err(Error::InvalidInput(
        "no built-in predicate reproduces the super-nonlinear count; supply an external list"
            .into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_not_inflationary() {
        assert!(!is_inflationary(&Gate3::identity([0, 1, 2]).unwrap()));
    }

    #[test]
    fn example_columns_are_inflationary_for_every_shift() {
        for shift in 0..8 {
            let g = AffineGate3::new([0, 1, 2], [0b110, 0b101, 0b111], shift).unwrap();
            let lut = g.lut();
            // oracle: flip each input bit of each input and count output changes
            for x in 0..8 {
                for k in 0..3 {
                    assert!((lut[x] ^ lut[x ^ (1 << k)]).count_ones() >= 2);
                }
            }
            assert!(is_inflationary_lut(&lut));
        }
    }

    #[test]
    fn non_affine_luts_are_rejected() {
        let toffoli = [0, 1, 2, 7, 4, 5, 6, 3];
        assert!(!is_affine(&toffoli));
        assert!(!is_inflationary_lut(&toffoli));
    }

    #[test]
    fn inflationary_counts() {
        let set = enumerate_inflationary();
        assert_eq!(set.len(), 144);
        assert_eq!(topology_histogram(&set).unwrap(), [24, 24, 48, 48]);
        let (w2, w3) = column_weight_counts(&set);
        assert_eq!(w2, 2 * w3);
    }

    #[test]
    fn inflationary_set_closed_under_inverse() {
        let set = enumerate_inflationary();
        for lut in set.members() {
            let inv = crate::gate::invert_lut(lut);
            assert!(set.contains(&inv));
        }
    }

    #[test]
    fn topology_invariant_under_relabelling() {
        let set = enumerate_inflationary();
        for lut in set.members() {
            let g = Gate3::new([0, 1, 2], *lut).unwrap();
            let t = classify_topology(&g).unwrap();
            for perm in (0usize..3).permutations(3) {
                let relabelled = Gate3::on_unsorted([perm[0], perm[1], perm[2]], *lut).unwrap();
                assert_eq!(classify_topology(&relabelled).unwrap(), t);
            }
        }
    }

    #[test]
    fn cnot_counts_follow_topology() {
        let set = enumerate_inflationary();
        for lut in set.members() {
            let g = Gate3::new([2, 5, 7], *lut).unwrap();
            let a = AffineGate3::from_gate3(&g).unwrap();
            let d = decompose_affine(&a);
            let cnots = d.iter().filter(|x| x.controls().len() == 1).count();
            let expect = match classify_topology(&g).unwrap() {
                Topology::A | Topology::B => 4,
                Topology::C | Topology::D => 3,
            };
            assert_eq!(cnots, expect);
            let c = crate::gate::Circuit::from_controlled(8, d).unwrap();
            let c3 = crate::gate::Circuit::from_gates(8, [g.into()]).unwrap();
            assert_eq!(c.truth_table().unwrap(), c3.truth_table().unwrap());
        }
    }

    #[test]
    fn degree_of_simple_functions() {
        assert_eq!(algebraic_degree(0), 0);
        assert_eq!(algebraic_degree(0xff), 0);
        assert_eq!(algebraic_degree(0b1010_1010), 1);
        assert_eq!(algebraic_degree(0b1000_1000), 2); // x0 x1
        assert_eq!(algebraic_degree(0b1000_0000), 3);
    }

    #[test]
    fn gate_set_file_round_trip() {
        let set = enumerate_inflationary();
        let back = GateSet::from_text("x", &set.to_text()).unwrap();
        assert_eq!(back.members(), set.members());
        assert!(GateSet::from_text("x", "0 1 2 3 4 5 6 6\n").is_err());
    }
}
