//! Conjugation of elementary gates through the affine stage.
//!
//! A gate is lifted to an [`AffineControlledFlip`], transported through each
//! affine layer exactly, and expanded back into NOT/CNOT/Toffoli gates. For a
//! layer `A(x) = Mx ^ c` the conjugate `A g A^-1` (execution order
//! `[A^-1, g, A]`) flips `Mv` under the forms `(M^-T a)·y ^ σ ^ a·(M^-1 c)`.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::bits::Bits;
use crate::cipher::CipherKey;
use crate::error::{Error, Result};
use crate::gate::{
    invert_circuit, mat3_mul, mat3_transpose, AffineGate3, Circuit, Control, ControlledGate,
    Polarity,
};
use crate::gateset::decompose_affine;
use crate::rewrite::{commute_past, simplify_with, Rules};

/// One factor `a·x ^ σ` of a control product.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineForm {
    pub support: Bits,
    pub constant: bool,
}

impl AffineForm {
    pub fn eval(&self, x: &Bits) -> bool {
        self.support.dot(x) ^ self.constant
    }
}

/// `x -> x ^ v · prod_k (a_k·x ^ σ_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineControlledFlip {
    pub targets: Bits,
    pub controls: Vec<AffineForm>,
}

impl AffineControlledFlip {
    pub fn width(&self) -> usize {
        self.targets.len()
    }

    pub fn fires(&self, x: &Bits) -> bool {
        self.controls.iter().all(|f| f.eval(x))
    }

    pub fn apply(&self, x: &Bits) -> Bits {
        if self.fires(x) {
            x.xor(&self.targets)
        } else {
            x.clone()
        }
    }

    /// `|v| * prod |a_k|`, the number of gates a plain expansion emits.
    pub fn term_count(&self) -> usize {
        self.controls
            .iter()
            .fold(self.targets.count_ones(), |acc, f| acc * f.support.count_ones())
    }
}

pub fn lift(gate: &ControlledGate, n: usize) -> Result<AffineControlledFlip> {
    if gate.controls().len() > 2 {
        return Err(Error::UnsupportedGate(format!(
            "{gate} has more than two controls; factorize it first"
        )));
    }
    if gate.max_bit() >= n {
        return Err(Error::IndexOutOfRange {
            index: gate.max_bit(),
            width: n,
        });
    }
    Ok(AffineControlledFlip {
        targets: Bits::from_indices(n, [gate.target()]),
        controls: gate
            .controls()
            .iter()
            .map(|c| AffineForm {
                support: Bits::from_indices(n, [c.bit]),
                constant: c.polarity.is_negative(),
            })
            .collect(),
    })
}

fn read3(x: &Bits, lines: [usize; 3]) -> u8 {
    lines
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &l)| acc | (x.get(l) as u8) << k)
}

fn write3(x: &mut Bits, lines: [usize; 3], v: u8) {
    for (k, &l) in lines.iter().enumerate() {
        x.set(l, v >> k & 1 == 1);
    }
}

/// Transports `g` through one layer of disjoint affine gates.
pub fn conjugate_affine_layer(
    g: &AffineControlledFlip,
    layer: &[AffineGate3],
) -> AffineControlledFlip {
    let mut out = g.clone();
    for gate in layer {
        let lines = gate.lines();
        let cols = gate.columns();
        let inv = gate.inverse_columns();
        let inv_t = mat3_transpose(&inv);
        // M^-1 c, the local input offset of A^-1
        let back_shift = mat3_mul(&inv, gate.shift());
        let v = read3(&g.targets, lines);
        write3(&mut out.targets, lines, mat3_mul(&cols, v));
        for (src, dst) in g.controls.iter().zip(out.controls.iter_mut()) {
            let a = read3(&src.support, lines);
            write3(&mut dst.support, lines, mat3_mul(&inv_t, a));
            dst.constant ^= (a & back_shift).count_ones() % 2 == 1;
        }
    }
    out
}

/// Literal list of one form: the constant negates the lowest support bit.
/// `None` means the form is the constant zero; an empty list is constant one.
fn form_literals(f: &AffineForm) -> Option<Vec<Control>> {
    let mut lits: Vec<Control> = f.support.ones().map(Control::pos).collect();
    match lits.first_mut() {
        Some(first) if f.constant => first.polarity = Polarity::Negative,
        Some(_) => {}
        None if f.constant => {}
        None => return None,
    }
    Some(lits)
}

/// Distributes the XOR-forms into a sum of literal products. Equal products
/// cancel in pairs; products holding `x` and `x'` vanish.
fn product_terms(forms: &[AffineForm]) -> Vec<Vec<Control>> {
    let mut terms: BTreeMap<Vec<Control>, bool> = BTreeMap::from([(Vec::new(), true)]);
    for f in forms {
        let Some(lits) = form_literals(f) else {
            return Vec::new();
        };
        if lits.is_empty() {
            continue;
        }
        let mut next: BTreeMap<Vec<Control>, bool> = BTreeMap::new();
        for term in terms.keys() {
            for &lit in &lits {
                let mut t = term.clone();
                match t.iter().find(|c| c.bit == lit.bit) {
                    Some(c) if c.polarity != lit.polarity => continue,
                    Some(_) => {}
                    None => {
                        t.push(lit);
                        t.sort();
                    }
                }
                *next.entry(t).or_insert(false) ^= true;
            }
        }
        next.retain(|_, odd| *odd);
        terms = next;
    }
    terms.into_keys().collect()
}

/// Expands `g` into elementary gates with the same action.
///
/// When a control form touches a target line, the targets are first folded
/// onto a pivot line with CNOTs; the forms then avoid the pivot because each
/// has even overlap with the targets.
pub fn expand(g: &AffineControlledFlip) -> Result<Vec<ControlledGate>> {
    let n = g.width();
    let overlap = g.controls.iter().any(|f| f.support.intersects(&g.targets));
    if !overlap {
        let terms = product_terms(&g.controls);
        let mut out = Vec::with_capacity(terms.len() * g.targets.count_ones());
        for t in g.targets.ones() {
            for term in &terms {
                out.push(ControlledGate::new(t, term.clone()).map_err(|e| {
                    Error::Internal(format!("expansion produced an invalid gate: {e}"))
                })?);
            }
        }
        return Ok(out);
    }
    let p = g.targets.first_one().expect("overlap implies targets");
    if g.controls.iter().any(|f| f.support.dot(&g.targets)) {
        return Err(Error::Internal(
            "control form has odd overlap with the targets".into(),
        ));
    }
    let fold: Vec<ControlledGate> = g
        .targets
        .ones()
        .filter(|&t| t != p)
        .map(|t| ControlledGate::cnot(Control::pos(p), t).expect("distinct lines"))
        .collect();
    // after folding, the form a·x reads (E^T a)·y, which clears the pivot bit
    let forms: Vec<AffineForm> = g
        .controls
        .iter()
        .map(|f| {
            let mut support = f.support.clone();
            support.set(p, false);
            AffineForm {
                support,
                constant: f.constant,
            }
        })
        .collect();
    let core = AffineControlledFlip {
        targets: Bits::from_indices(n, [p]),
        controls: forms,
    };
    let mut out = fold.clone();
    out.extend(expand(&core)?);
    out.extend(fold);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationStats {
    pub seed: ControlledGate,
    /// Plain-expansion term count after each layer.
    pub layer_terms: Vec<usize>,
    /// Ratio of consecutive term counts, one per layer.
    pub layer_factors: Vec<f64>,
    pub gate_count: usize,
    pub elapsed: Duration,
}

impl fmt::Display for ConjugationStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let factors: Vec<String> = self.layer_factors.iter().map(|x| format!("{x:.3}")).collect();
        write!(
            f,
            "seed {} | factors {} | gates {} | micros {}",
            self.seed,
            factors.join(","),
            self.gate_count,
            self.elapsed.as_micros()
        )
    }
}

/// Conjugates `gate` through `layers` (layer 1 first) and expands the result.
pub fn conjugate_through_layers(
    gate: &ControlledGate,
    n: usize,
    layers: &[Vec<AffineGate3>],
) -> Result<(Vec<ControlledGate>, ConjugationStats)> {
    let start = Instant::now();
    let mut g = lift(gate, n)?;
    let mut layer_terms = Vec::with_capacity(layers.len());
    let mut layer_factors = Vec::with_capacity(layers.len());
    let mut prev = g.term_count().max(1);
    for layer in layers {
        g = conjugate_affine_layer(&g, layer);
        let terms = g.term_count();
        layer_terms.push(terms);
        layer_factors.push(terms as f64 / prev as f64);
        prev = terms.max(1);
    }
    let gates = simplify_with(&expand(&g)?, &Rules::CANCEL_ONLY);
    let stats = ConjugationStats {
        seed: gate.clone(),
        layer_terms,
        layer_factors,
        gate_count: gates.len(),
        elapsed: start.elapsed(),
    };
    Ok((gates, stats))
}

/// `L f L^-1` for a NOT, CNOT or Toffoli `f`, as a circuit on the key width.
pub fn conjugate_through_l(
    gate: &ControlledGate,
    key: &CipherKey,
) -> Result<(Circuit, ConjugationStats)> {
    let (gates, stats) = conjugate_through_layers(gate, key.n(), key.linear_layers())?;
    Ok((Circuit::from_controlled(key.n(), gates)?, stats))
}

/// Counts rewrite steps taken by [`conjugate_by_rewriting`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RewriteTally {
    pub interchanges: usize,
    pub debris_gates: usize,
}

/// Independent conjugation path: each affine gate becomes CNOTs and NOTs,
/// which are then interchanged one by one across the gate block using the
/// collision rules.
///
/// With `D` the layer's gates, `[D^-1, B, D] = [D^-1, D, B']` and the outer
/// pair cancels, so `B'` is the conjugated block.
pub fn conjugate_by_rewriting(
    gates: &[ControlledGate],
    layers: &[Vec<AffineGate3>],
    tally: &mut RewriteTally,
) -> Vec<ControlledGate> {
    let mut block = gates.to_vec();
    for layer in layers {
        let d: Vec<ControlledGate> = layer.iter().flat_map(decompose_affine).collect();
        for c in &d {
            // move c from the right end of the block to its left end
            let mut moved: Vec<ControlledGate> = Vec::with_capacity(block.len() + 4);
            let mut suffix: Vec<ControlledGate> = Vec::new();
            for b in block.iter().rev() {
                let step = commute_past(b, c);
                tally.interchanges += 1;
                tally.debris_gates += step.debris.len();
                let mut piece = step.debris;
                piece.push(b.clone());
                piece.extend(suffix);
                suffix = piece;
            }
            moved.extend(suffix);
            block = simplify_with(&moved, &Rules::CANCEL_ONLY);
        }
    }
    block
}

/// Affine map `x -> Mx ^ c` on `n` bits, `M` stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    rows: Vec<Bits>,
    shift: Bits,
}

impl AffineMap {
    pub fn from_columns(columns: &[Bits], shift: Bits) -> Result<Self> {
        let n = columns.len();
        if shift.len() != n || columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInput("affine map must be square".into()));
        }
        let rows = (0..n)
            .map(|i| Bits::from_bools(&columns.iter().map(|c| c.get(i)).collect::<Vec<_>>()))
            .collect();
        Ok(AffineMap { rows, shift })
    }

    /// Recovers the map from its values on `0` and the `n` basis vectors.
    pub fn probe(n: usize, f: impl Fn(&Bits) -> Bits) -> Result<Self> {
        let shift = f(&Bits::zeros(n));
        let columns: Vec<Bits> = (0..n)
            .map(|j| f(&Bits::from_indices(n, [j])).xor(&shift))
            .collect();
        Self::from_columns(&columns, shift)
    }

    pub fn width(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, x: &Bits) -> Bits {
        let mut y = self.shift.clone();
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(x) {
                y.flip(i);
            }
        }
        y
    }
}

/// NOT/CNOT circuit for an invertible affine map by Gaussian elimination;
/// at most `n^2` CNOTs plus `n` NOTs.
pub fn synthesize_linear(map: &AffineMap) -> Result<Circuit> {
    let n = map.width();
    let mut rows = map.rows.clone();
    // row_i ^= row_j is CNOT(j -> i) applied after M
    let mut ops: Vec<(usize, usize)> = Vec::new();
    let add = |rows: &mut Vec<Bits>, ops: &mut Vec<(usize, usize)>, i: usize, j: usize| {
        let rj = rows[j].clone();
        rows[i].xor_assign(&rj);
        ops.push((j, i));
    };
    for col in 0..n {
        if !rows[col].get(col) {
            let Some(r) = (col + 1..n).find(|&r| rows[r].get(col)) else {
                return Err(Error::Singular);
            };
            add(&mut rows, &mut ops, col, r);
        }
        for r in 0..n {
            if r != col && rows[r].get(col) {
                add(&mut rows, &mut ops, r, col);
            }
        }
    }
    // E_k..E_1 M = I, so M = E_1..E_k and E_k runs first
    let mut circuit = Circuit::new(n);
    for &(c, t) in ops.iter().rev() {
        circuit.push(ControlledGate::cnot(Control::pos(c), t)?)?;
    }
    for i in map.shift.ones() {
        circuit.push(ControlledGate::not(i))?;
    }
    Ok(circuit)
}

/// `[L] + [f] + [L^-1]` in operator order: runs `L^-1`, then `f`, then `L`.
pub fn reference_conjugate(gate: &ControlledGate, key: &CipherKey) -> Result<Circuit> {
    let l = key.linear_circuit();
    let mut f = Circuit::new(key.n());
    f.push(gate.clone())?;
    invert_circuit(&l).then(&f)?.then(&l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{keygen, KeygenOptions, RegisterLayout};
    use crate::gateset::{enumerate_inflationary, enumerate_super_nonlinear, Predicate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(n: usize, gates: &[ControlledGate]) -> Vec<u32> {
        Circuit::from_controlled(n, gates.iter().cloned())
            .unwrap()
            .truth_table()
            .unwrap()
    }

    fn flip_table(g: &AffineControlledFlip) -> Vec<u32> {
        let n = g.width();
        (0..1u64 << n)
            .map(|x| g.apply(&Bits::from_u64(x, n)).to_u64().unwrap() as u32)
            .collect()
    }

    fn key9(seed: u8) -> CipherKey {
        let layout = RegisterLayout::new(9, 2, 1).unwrap();
        keygen(
            layout,
            &enumerate_inflationary(),
            &enumerate_super_nonlinear(Predicate::Strict),
            [seed; 32],
            &KeygenOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn lift_examples() {
        let g = lift(&ControlledGate::not(3), 5).unwrap();
        assert_eq!(g.targets.ones().collect::<Vec<_>>(), vec![3]);
        assert!(g.controls.is_empty());
        let c = lift(&ControlledGate::cnot(Control::neg(1), 0).unwrap(), 5).unwrap();
        assert_eq!(c.controls[0].support.ones().collect::<Vec<_>>(), vec![1]);
        assert!(c.controls[0].constant);
        let wide = ControlledGate::new(4, vec![Control::pos(0), Control::pos(1), Control::pos(2)])
            .unwrap();
        assert!(matches!(lift(&wide, 5), Err(Error::UnsupportedGate(_))));
    }

    #[test]
    fn expand_examples() {
        let (a, b, c, t) = (0, 1, 2, 3);
        let g = AffineControlledFlip {
            targets: Bits::from_indices(4, [t]),
            controls: vec![
                AffineForm {
                    support: Bits::from_indices(4, [a, b]),
                    constant: false,
                },
                AffineForm {
                    support: Bits::from_indices(4, [c]),
                    constant: false,
                },
            ],
        };
        let e = expand(&g).unwrap();
        let tof = |x: Control, y: Control| ControlledGate::toffoli(x, y, t).unwrap();
        assert_eq!(e, vec![tof(Control::pos(a), Control::pos(c)), tof(Control::pos(b), Control::pos(c))]);
        assert_eq!(table(4, &e), flip_table(&g));

        let mut g2 = g.clone();
        g2.controls[0].constant = true;
        let e2 = expand(&g2).unwrap();
        assert_eq!(e2, vec![tof(Control::neg(a), Control::pos(c)), tof(Control::pos(b), Control::pos(c))]);
        assert_eq!(table(4, &e2), flip_table(&g2));

        let nots = AffineControlledFlip {
            targets: Bits::from_indices(4, [1, 3]),
            controls: vec![],
        };
        assert_eq!(expand(&nots).unwrap(), vec![ControlledGate::not(1), ControlledGate::not(3)]);
    }

    #[test]
    fn expand_with_overlap_uses_pivot() {
        // v = {0,1}, a = {0,1,2}: even overlap
        let g = AffineControlledFlip {
            targets: Bits::from_indices(4, [0, 1]),
            controls: vec![AffineForm {
                support: Bits::from_indices(4, [0, 1, 2]),
                constant: true,
            }],
        };
        assert_eq!(table(4, &expand(&g).unwrap()), flip_table(&g));
    }

    #[test]
    fn random_flips_expand_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        let mut done = 0;
        while done < 400 {
            let targets = Bits::random(n, &mut rng);
            if targets.is_zero() {
                continue;
            }
            let k = rng.gen_range(0..=2);
            let controls: Vec<AffineForm> = (0..k)
                .map(|_| AffineForm {
                    support: Bits::random(n, &mut rng),
                    constant: rng.gen(),
                })
                .collect();
            // invertibility needs every form to have even overlap with v
            if controls.iter().any(|f| f.support.dot(&targets)) {
                continue;
            }
            let g = AffineControlledFlip { targets, controls };
            assert_eq!(table(n, &expand(&g).unwrap()), flip_table(&g));
            done += 1;
        }
    }

    #[test]
    fn identity_layer_leaves_gate_unchanged() {
        let id: Vec<AffineGate3> = (0..3)
            .map(|t| AffineGate3::new([3 * t, 3 * t + 1, 3 * t + 2], [1, 2, 4], 0).unwrap())
            .collect();
        let g = lift(&ControlledGate::toffoli(Control::pos(0), Control::neg(4), 8).unwrap(), 9).unwrap();
        assert_eq!(conjugate_affine_layer(&g, &id), g);
    }

    #[test]
    fn single_layer_matches_operator_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let set = enumerate_inflationary();
        for _ in 0..50 {
            let layer: Vec<AffineGate3> = (0..3)
                .map(|t| {
                    let m = &set.members()[rng.gen_range(0..set.len())];
                    AffineGate3::from_gate3(&crate::gate::Gate3::new([3 * t, 3 * t + 1, 3 * t + 2], *m).unwrap())
                        .unwrap()
                })
                .collect();
            let seed = ControlledGate::toffoli(Control::pos(1), Control::neg(5), 7).unwrap();
            let g = conjugate_affine_layer(&lift(&seed, 9).unwrap(), &layer);
            let a: Vec<ControlledGate> = layer.iter().flat_map(decompose_affine).collect();
            let a_inv: Vec<ControlledGate> = a.iter().rev().cloned().collect();
            let mut reference = a_inv;
            reference.push(seed.clone());
            reference.extend(a);
            assert_eq!(flip_table(&g), table(9, &reference));
            // three singleton forms spread over distinct triplets: at most 3^3 offspring
            assert!(expand(&g).unwrap().len() <= 27);
        }
    }

    #[test]
    fn cnot_through_weight_two_transfer_gains_control_line() {
        // columns e0 -> e0 + e1: the inverse transpose spreads a control on line 0
        let gate = AffineGate3::new([0, 1, 2], [0b011, 0b010, 0b100], 0).unwrap();
        let seed = ControlledGate::cnot(Control::pos(0), 3).unwrap();
        let mut g = lift(&seed, 4).unwrap();
        g = conjugate_affine_layer(&g, &[gate]);
        let lines: Vec<usize> = g.controls[0].support.ones().collect();
        assert_eq!(lines.len(), 1);
        // a control on line 1 spreads over two lines instead
        let seed = ControlledGate::cnot(Control::pos(1), 3).unwrap();
        let g = conjugate_affine_layer(&lift(&seed, 4).unwrap(), &[gate]);
        assert_eq!(g.controls[0].support.count_ones(), 2);
        let mut reference = decompose_affine(&gate);
        reference.reverse();
        reference.push(seed);
        reference.extend(decompose_affine(&gate));
        assert_eq!(table(4, &expand(&g).unwrap()), table(4, &reference));
    }

    #[test]
    fn key_conjugation_is_exact_on_nine_lines() {
        let key = key9(3);
        let seeds = [
            ControlledGate::not(4),
            ControlledGate::cnot(Control::neg(2), 6).unwrap(),
            ControlledGate::toffoli(Control::pos(0), Control::pos(8), 3).unwrap(),
        ];
        for seed in &seeds {
            let (c, stats) = conjugate_through_l(seed, &key).unwrap();
            let reference = reference_conjugate(seed, &key).unwrap();
            assert_eq!(c.truth_table().unwrap(), reference.truth_table().unwrap(), "{seed}");
            assert_eq!(stats.layer_factors.len(), 4);
            assert!(stats.gate_count <= 27usize.pow(4));
        }
        let (c, _) = conjugate_through_l(&seeds[0], &key).unwrap();
        assert!(c
            .controlled_gates()
            .unwrap()
            .iter()
            .all(|g| g.controls().is_empty()));
    }

    #[test]
    fn offspring_never_gain_controls() {
        let key = key9(9);
        let seed = ControlledGate::cnot(Control::pos(1), 5).unwrap();
        let (c, _) = conjugate_through_l(&seed, &key).unwrap();
        for g in c.controlled_gates().unwrap() {
            assert!(g.controls().len() <= 1);
        }
    }

    #[test]
    fn rewriting_path_agrees_with_algebra() {
        let key = key9(4);
        let seed = ControlledGate::toffoli(Control::neg(1), Control::pos(4), 7).unwrap();
        let mut tally = RewriteTally::default();
        let rw = conjugate_by_rewriting(std::slice::from_ref(&seed), key.linear_layers(), &mut tally);
        let (alg, _) = conjugate_through_l(&seed, &key).unwrap();
        assert_eq!(table(9, &rw), alg.truth_table().unwrap());
        assert!(tally.interchanges > 0);
    }

    #[test]
    fn synthesis_examples() {
        let id = AffineMap::probe(5, |x| x.clone()).unwrap();
        assert!(synthesize_linear(&id).unwrap().is_empty());
        let shift = Bits::from_indices(5, [1, 3]);
        let s = AffineMap::probe(5, |x| x.xor(&shift)).unwrap();
        assert_eq!(synthesize_linear(&s).unwrap().len(), 2);
        let singular = AffineMap::from_columns(&vec![Bits::from_indices(3, [0]); 3], Bits::zeros(3)).unwrap();
        assert!(matches!(synthesize_linear(&singular), Err(Error::Singular)));
    }

    #[test]
    fn random_invertible_map_synthesizes_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 8;
        for _ in 0..20 {
            // random invertible map from a random CNOT/NOT circuit
            let mut src = Circuit::new(n);
            for _ in 0..40 {
                let c = rng.gen_range(0..n);
                let t = (c + rng.gen_range(1..n)) % n;
                src.push(ControlledGate::cnot(Control::pos(c), t).unwrap()).unwrap();
            }
            src.push(ControlledGate::not(rng.gen_range(0..n))).unwrap();
            let map = AffineMap::probe(n, |x| src.apply(x).unwrap()).unwrap();
            let out = synthesize_linear(&map).unwrap();
            assert!(out.len() <= 2 * n * n);
            assert_eq!(out.truth_table().unwrap(), src.truth_table().unwrap());
        }
    }
}
