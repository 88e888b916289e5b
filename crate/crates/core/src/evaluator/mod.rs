//! Compilation of a plaintext circuit `F` into an evaluator for `E F E^-1`
//! and its execution on ciphertexts.
//!
//! Compilation conjugates every gate of `F` through the affine stage, seeds
//! one chip per resulting gate (or per bridging unit in two-register mode),
//! then conjugates all chips through the nonlinear layers one layer at a
//! time. Before each layer, NOT pairs may be placed on the wires between
//! consecutive chips and absorbed into them.

mod file;

pub use file::{format_evaluator, parse_evaluator};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::bits::Bits;
use crate::chip::{
    conjugate_chip_layer, layer_index, seed_chip, seed_chip_from_gates, seed_swap_chip, Chip,
    SeedKind,
};
use crate::cipher::CipherKey;
use crate::conjugate::conjugate_through_layers;
use crate::error::{Error, Result};
use crate::gate::{AffineGate3, Circuit, Control, ControlledGate, Gate, Gate3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RegisterMode {
    #[default]
    Single,
    Two,
}

impl RegisterMode {
    pub fn registers(self) -> usize {
        match self {
            RegisterMode::Single => 1,
            RegisterMode::Two => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub mode: RegisterMode,
    /// Inject random NOT pairs between layers.
    pub randomize: bool,
    pub seed: [u8; 32],
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            mode: RegisterMode::Single,
            randomize: true,
            seed: [0; 32],
            jobs: None,
        }
    }
}

/// Where an evaluator came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    /// Chips contributed by each gate of `F`, in order.
    pub chips_per_gate: Vec<usize>,
    pub randomized: bool,
    pub random_seed: [u8; 32],
    /// Random bits actually drawn.
    pub random_bits: u64,
    pub linear_layers: usize,
    pub nonlinear_layers: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluator {
    n: usize,
    registers: usize,
    chips: Vec<Chip>,
    provenance: Provenance,
}

impl Evaluator {
    pub fn new(n: usize, registers: usize, chips: Vec<Chip>, provenance: Provenance) -> Result<Self> {
        if !(1..=2).contains(&registers) || !n.is_multiple_of(registers) {
            return Err(Error::InvalidInput(format!(
                "{registers} registers cannot split {n} lines"
            )));
        }
        if let Some(c) = chips.iter().find(|c| c.n() != n) {
            return Err(Error::InvalidInput(format!(
                "chip of width {} in an evaluator of width {n}",
                c.n()
            )));
        }
        Ok(Evaluator {
            n,
            registers,
            chips,
            provenance,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn chips(&self) -> &[Chip] {
        &self.chips
    }

    pub fn chips_mut(&mut self) -> &mut Vec<Chip> {
        &mut self.chips
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn run(&self, ct: &Bits) -> Result<Bits> {
        run(self, ct)
    }

    /// Permutation of all `2^n` states, for `n` up to the oracle limit.
    pub fn table(&self) -> Result<Vec<u32>> {
        if self.n > crate::gate::ORACLE_LIMIT {
            return Err(Error::OracleLimit {
                width: self.n,
                limit: crate::gate::ORACLE_LIMIT,
            });
        }
        let states: Vec<Bits> = (0..1u64 << self.n).map(|x| Bits::from_u64(x, self.n)).collect();
        Ok(run_batch(self, &states)?
            .into_iter()
            .map(|b| b.to_u64().expect("fits") as u32)
            .collect())
    }
}

/// Maps each bit of `F` to its line in the (joint) register: the data and
/// ancilla sections of register A, then those of register B.
pub fn payload_lines(keys: &[CipherKey]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut base = 0;
    for k in keys {
        out.extend(base..base + k.layout().n_payload());
        base += k.n();
    }
    out
}

fn check_keys(keys: &[CipherKey], mode: RegisterMode) -> Result<()> {
    if keys.len() != mode.registers() {
        return Err(Error::InvalidInput(format!(
            "{:?} mode needs {} key(s), got {}",
            mode,
            mode.registers(),
            keys.len()
        )));
    }
    if keys.windows(2).any(|w| w[0].n() != w[1].n()) {
        return Err(Error::InvalidInput("both registers must have the same width".into()));
    }
    Ok(())
}

/// Affine layers of `E_A ⊗ E_B`, register B shifted by its offset.
pub fn joint_linear_layers(keys: &[CipherKey]) -> Result<Vec<Vec<AffineGate3>>> {
    let count = keys[0].linear_layers().len();
    if keys.iter().any(|k| k.linear_layers().len() != count) {
        return Err(Error::InvalidInput("keys differ in linear depth".into()));
    }
    let mut out = vec![Vec::new(); count];
    for (r, k) in keys.iter().enumerate() {
        let off = r * k.n();
        for (layer, dst) in k.linear_layers().iter().zip(out.iter_mut()) {
            for g in layer {
                dst.push(AffineGate3::new(g.lines().map(|l| l + off), g.columns(), g.shift())?);
            }
        }
    }
    Ok(out)
}

pub fn joint_nonlinear_layers(keys: &[CipherKey]) -> Result<Vec<Vec<Gate3>>> {
    let count = keys[0].nonlinear_layers().len();
    if keys.iter().any(|k| k.nonlinear_layers().len() != count) {
        return Err(Error::InvalidInput("keys differ in nonlinear depth".into()));
    }
    let mut out = vec![Vec::new(); count];
    for (r, k) in keys.iter().enumerate() {
        let off = r * k.n();
        for (layer, dst) in k.nonlinear_layers().iter().zip(out.iter_mut()) {
            for g in layer {
                dst.push(Gate3::new(g.lines().map(|l| l + off), g.lut())?);
            }
        }
    }
    Ok(out)
}

/// `E` of the whole (joint) register as a circuit.
pub fn joint_cipher_circuit(keys: &[CipherKey]) -> Result<Circuit> {
    let n: usize = keys.iter().map(CipherKey::n).sum();
    let lin = joint_linear_layers(keys)?;
    let nl = joint_nonlinear_layers(keys)?;
    let gates = lin
        .iter()
        .flatten()
        .map(|g| Gate::from(*g))
        .chain(nl.iter().flatten().map(|g| Gate::Three(*g)));
    Circuit::from_gates(n, gates)
}

/// Encrypts a joint payload (register A's data and ancilla, then B's)
/// with the given padding per register.
pub fn encrypt_joint(keys: &[CipherKey], payload: &Bits, paddings: &[Bits]) -> Result<Bits> {
    let want: usize = keys.iter().map(|k| k.layout().n_payload()).sum();
    if payload.len() != want || paddings.len() != keys.len() {
        return Err(Error::InvalidInput(format!(
            "payload of {} bits and {} paddings for {} key(s) with {want} payload bits",
            payload.len(),
            paddings.len(),
            keys.len()
        )));
    }
    let mut out = Bits::zeros(0);
    let mut at = 0;
    for (k, pad) in keys.iter().zip(paddings) {
        let l = k.layout();
        let reg = l.assemble(&payload.slice(at, l.n_d()), &payload.slice(at + l.n_d(), l.n_a()), pad)?;
        out = out.concat(&k.apply(&reg)?);
        at += l.n_payload();
    }
    Ok(out)
}

/// Inverse of [`encrypt_joint`]: the joint payload and each register's padding.
pub fn decrypt_joint(keys: &[CipherKey], ct: &Bits) -> Result<(Bits, Vec<Bits>)> {
    let want: usize = keys.iter().map(CipherKey::n).sum();
    if ct.len() != want {
        return Err(Error::InvalidInput(format!(
            "ciphertext has {} bits, keys expect {want}",
            ct.len()
        )));
    }
    let mut payload = Bits::zeros(0);
    let mut paddings = Vec::with_capacity(keys.len());
    for (r, k) in keys.iter().enumerate() {
        let p = crate::cipher::decrypt(k, &ct.slice(r * k.n(), k.n()))?;
        payload = payload.concat(&p.data).concat(&p.ancilla);
        paddings.push(p.padding);
    }
    Ok((payload, paddings))
}

/// One chip's worth of gates produced by bridging.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BridgeUnit {
    Gate(ControlledGate),
    /// Exchange of two lines in different registers.
    Swap(usize, usize),
}

impl BridgeUnit {
    pub fn gates(&self) -> Vec<ControlledGate> {
        match self {
            BridgeUnit::Gate(g) => vec![g.clone()],
            BridgeUnit::Swap(a, b) => crate::chip::swap_gates(*a, *b).expect("distinct lines"),
        }
    }

    fn chip(&self, n: usize) -> Result<Chip> {
        match self {
            BridgeUnit::Gate(g) => seed_chip(g, n),
            BridgeUnit::Swap(a, b) => seed_swap_chip(*a, *b, n),
        }
    }
}

fn relabel(gate: &ControlledGate, map: impl Fn(usize) -> usize) -> ControlledGate {
    let cs = gate
        .controls()
        .iter()
        .map(|c| Control {
            bit: map(c.bit),
            polarity: c.polarity,
        })
        .collect();
    ControlledGate::new(map(gate.target()), cs).expect("relabelling is a bijection")
}

/// Rewrites a gate on two registers of `n` lines each so that multi-line
/// gates straddle the registers: a CNOT gets its lines in different
/// registers; a Toffoli gets two lines in one first-layer triplet of one
/// register and the third line in the other register. Uses at most two
/// SWAPs on each side, so at most five units.
pub fn bridge_two_register(
    gate: &ControlledGate,
    n: usize,
    first_layer: &[Gate3],
) -> Result<Vec<BridgeUnit>> {
    let of = layer_index(first_layer, 2 * n)?;
    if gate.max_bit() >= 2 * n {
        return Err(Error::IndexOutOfRange {
            index: gate.max_bit(),
            width: 2 * n,
        });
    }
    let reg = |x: usize| x / n;
    let mirror = |x: usize| if x < n { x + n } else { x - n };
    let wrap = |swaps: Vec<(usize, usize)>| -> Vec<BridgeUnit> {
        let map = |x: usize| {
            swaps.iter().fold(x, |x, &(a, b)| {
                if x == a {
                    b
                } else if x == b {
                    a
                } else {
                    x
                }
            })
        };
        let mut out: Vec<BridgeUnit> = swaps.iter().map(|&(a, b)| BridgeUnit::Swap(a, b)).collect();
        out.push(BridgeUnit::Gate(relabel(gate, map)));
        out.extend(swaps.iter().rev().map(|&(a, b)| BridgeUnit::Swap(a, b)));
        out
    };
    let lines = gate.lines();
    match lines.len() {
        1 => Ok(vec![BridgeUnit::Gate(gate.clone())]),
        2 => {
            let (c, t) = (lines[0], lines[1]);
            if reg(c) != reg(t) {
                Ok(vec![BridgeUnit::Gate(gate.clone())])
            } else {
                Ok(wrap(vec![(c, mirror(c))]))
            }
        }
        3 => {
            let triples = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
            let paired = |i: usize, j: usize| {
                reg(lines[i]) == reg(lines[j]) && of[lines[i]] == of[lines[j]]
            };
            // already in place
            for &(i, j, k) in &triples {
                if paired(i, j) && reg(lines[k]) != reg(lines[i]) {
                    return Ok(vec![BridgeUnit::Gate(gate.clone())]);
                }
            }
            // a pair shares a triplet, the third line must leave
            for &(i, j, k) in &triples {
                if paired(i, j) {
                    return Ok(wrap(vec![(lines[k], mirror(lines[k]))]));
                }
            }
            // two lines in one register, the third alone in the other
            for &(i, j, k) in &triples {
                if reg(lines[i]) == reg(lines[j]) && reg(lines[k]) != reg(lines[i]) {
                    let z = lines[k];
                    let b = first_layer[of[z]]
                        .lines()
                        .into_iter()
                        .find(|&b| b != z)
                        .expect("triplets have three lines");
                    return Ok(wrap(vec![(lines[i], b)]));
                }
            }
            // all three in one register, in distinct triplets
            let dest = first_layer[of[mirror(lines[0])]].lines();
            Ok(wrap(vec![(lines[0], dest[0]), (lines[1], dest[1])]))
        }
        _ => Err(Error::UnsupportedGate(format!("{gate}: bridging takes at most two controls"))),
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Draws one bit per wire between consecutive chips sharing a line and,
/// where it is set, absorbs a NOT into both ends. Returns the bits drawn.
pub fn inject_not_pairs<R: Rng + ?Sized>(chips: &mut [Chip], rng: &mut R) -> u64 {
    let n = chips.first().map_or(0, Chip::n);
    let mut last: Vec<Option<usize>> = vec![None; n];
    let mut wires = Vec::new();
    for (idx, chip) in chips.iter().enumerate() {
        for line in chip.footprint() {
            if let Some(prev) = last[line] {
                wires.push((prev, idx, line));
            }
            last[line] = Some(idx);
        }
    }
    for &(up, down, line) in &wires {
        if rng.gen::<bool>() {
            chips[up].absorb_output_not(line);
            chips[down].absorb_input_not(line);
        }
    }
    wires.len() as u64
}

/// Compiles `f` for ciphertexts under `keys` (one key, or two for
/// two-register mode).
pub fn compile(f: &Circuit, keys: &[CipherKey], opts: &CompileOptions) -> Result<Evaluator> {
    check_keys(keys, opts.mode)?;
    let lines = payload_lines(keys);
    if f.width() != lines.len() {
        return Err(Error::InvalidInput(format!(
            "circuit width {} does not match the {} payload lines",
            f.width(),
            lines.len()
        )));
    }
    let width: usize = keys.iter().map(CipherKey::n).sum();
    let mut seeds = Vec::with_capacity(f.len());
    for g in f.gates() {
        let g = g
            .as_controlled()
            .ok_or_else(|| Error::UnsupportedGate("3-bit gates cannot be compiled".into()))?;
        if g.controls().len() > 2 {
            return Err(Error::UnsupportedGate(format!("{g}: factorize to Toffolis first")));
        }
        seeds.push(relabel(g, |b| lines[b]));
    }
    let linear = joint_linear_layers(keys)?;
    let nonlinear = joint_nonlinear_layers(keys)?;
    let n_reg = keys[0].n();
    with_pool(opts.jobs, || -> Result<Evaluator> {
        let conjugated: Vec<Vec<ControlledGate>> = seeds
            .par_iter()
            .map(|g| conjugate_through_layers(g, width, &linear).map(|(gs, _)| gs))
            .collect::<Result<_>>()?;
        let mut units: Vec<BridgeUnit> = Vec::new();
        let mut chips_per_gate = Vec::with_capacity(seeds.len());
        for gates in &conjugated {
            let before = units.len();
            for g in gates {
                match opts.mode {
                    RegisterMode::Single => units.push(BridgeUnit::Gate(g.clone())),
                    RegisterMode::Two => units.extend(bridge_two_register(g, n_reg, &nonlinear[0])?),
                }
            }
            chips_per_gate.push(units.len() - before);
        }
        let mut chips: Vec<Chip> = units
            .par_iter()
            .map(|u| u.chip(width))
            .collect::<Result<_>>()?;
        let mut rng = ChaCha20Rng::from_seed(opts.seed);
        let mut random_bits = 0;
        for layer in &nonlinear {
            // layer barrier: every chip finishes the previous layer first
            if opts.randomize {
                random_bits += inject_not_pairs(&mut chips, &mut rng);
            }
            chips = chips
                .par_iter()
                .map(|c| conjugate_chip_layer(c, layer))
                .collect::<Result<_>>()?;
        }
        let provenance = Provenance {
            chips_per_gate,
            randomized: opts.randomize,
            random_seed: opts.seed,
            random_bits,
            linear_layers: linear.len(),
            nonlinear_layers: nonlinear.len(),
        };
        Evaluator::new(width, keys.len(), chips, provenance)
    })?
}

/// Applies every chip in order.
pub fn run(ev: &Evaluator, ct: &Bits) -> Result<Bits> {
    if ct.len() != ev.n {
        return Err(Error::InvalidInput(format!(
            "ciphertext has {} bits, evaluator expects {}",
            ct.len(),
            ev.n
        )));
    }
    let mut s = ct.clone();
    for c in &ev.chips {
        s = c.eval(&s)?;
    }
    Ok(s)
}

/// [`run`] on many ciphertexts, 64 at a time.
pub fn run_batch(ev: &Evaluator, cts: &[Bits]) -> Result<Vec<Bits>> {
    if let Some(c) = cts.iter().find(|c| c.len() != ev.n) {
        return Err(Error::InvalidInput(format!(
            "ciphertext has {} bits, evaluator expects {}",
            c.len(),
            ev.n
        )));
    }
    let out: Vec<Vec<Bits>> = cts
        .par_chunks(64)
        .map(|batch| {
            let mut words = vec![0u64; ev.n];
            for (k, ct) in batch.iter().enumerate() {
                for j in ct.ones() {
                    words[j] |= 1 << k;
                }
            }
            let mut scratch = Vec::new();
            for c in &ev.chips {
                c.eval_words(&mut words, &mut scratch);
            }
            (0..batch.len())
                .map(|k| {
                    Bits::from_indices(ev.n, (0..ev.n).filter(|&j| words[j] >> k & 1 == 1))
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyAccount {
    /// `sum over registers of n log3 n`.
    pub lower_bound: f64,
    pub drawn: u64,
}

pub fn entropy_lower_bound(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    n as f64 * (n as f64).ln() / 3f64.ln()
}

pub fn entropy_injected(ev: &Evaluator) -> EntropyAccount {
    let per = ev.n / ev.registers;
    EntropyAccount {
        lower_bound: ev.registers as f64 * entropy_lower_bound(per),
        drawn: ev.provenance.random_bits,
    }
}

/// Counts chips by seed kind.
pub fn kind_counts(ev: &Evaluator) -> Vec<(SeedKind, usize)> {
    let kinds = [
        SeedKind::Not,
        SeedKind::Cnot,
        SeedKind::Toffoli,
        SeedKind::Swap,
        SeedKind::Composite,
    ];
    kinds
        .into_iter()
        .map(|k| (k, ev.chips.iter().filter(|c| c.kind() == k).count()))
        .filter(|&(_, c)| c > 0)
        .collect()
}

/// Builds a chip list directly from gates on the joint register, with no
/// linear stage; used by tests and for single-gate experiments.
pub fn chips_for_gates(gates: &[ControlledGate], n: usize) -> Result<Vec<Chip>> {
    gates.iter().map(|g| seed_chip_from_gates(std::slice::from_ref(g), n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{keygen, KeygenOptions, RegisterLayout};
    use crate::gate::{compose_tables, invert_table, Polarity};
    use crate::gateset::{enumerate_inflationary, enumerate_super_nonlinear, Predicate};
    use rand_chacha::ChaCha8Rng;

    fn key(n: usize, nd: usize, na: usize, seed: u8) -> CipherKey {
        keygen(
            RegisterLayout::new(n, nd, na).unwrap(),
            &enumerate_inflationary(),
            &enumerate_super_nonlinear(Predicate::Strict),
            [seed; 32],
            &KeygenOptions::default(),
        )
        .unwrap()
    }

    fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> ControlledGate {
        let k = rng.gen_range(0..=2usize.min(n - 1));
        let lines = rand::seq::index::sample(rng, n, k + 1).into_vec();
        let cs = lines[1..]
            .iter()
            .map(|&b| Control {
                bit: b,
                polarity: Polarity::from_negated(rng.gen()),
            })
            .collect();
        ControlledGate::new(lines[0], cs).unwrap()
    }

    /// `E F E^-1` over the joint register, by truth tables.
    fn expected(f: &Circuit, keys: &[CipherKey]) -> Vec<u32> {
        let e = joint_cipher_circuit(keys).unwrap().truth_table().unwrap();
        let width: usize = keys.iter().map(CipherKey::n).sum();
        let lines = payload_lines(keys);
        let gates: Vec<ControlledGate> = f
            .controlled_gates()
            .unwrap()
            .iter()
            .map(|g| relabel(g, |b| lines[b]))
            .collect();
        let fw = Circuit::from_controlled(width, gates).unwrap().truth_table().unwrap();
        // E^-1, then F, then E
        compose_tables(&compose_tables(&invert_table(&e), &fw), &e)
    }

    #[test]
    fn empty_circuit_gives_empty_evaluator() {
        let k = key(9, 2, 1, 1);
        let ev = compile(&Circuit::new(3), &[k], &CompileOptions::default()).unwrap();
        assert!(ev.chips().is_empty());
        let s = Bits::from_u64(300, 9);
        assert_eq!(ev.run(&s).unwrap(), s);
    }

    #[test]
    fn single_register_defining_identity() {
        let k = key(9, 2, 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = Circuit::from_controlled(3, (0..4).map(|_| random_gate(&mut rng, 3))).unwrap();
        for randomize in [false, true] {
            let opts = CompileOptions {
                randomize,
                seed: [9; 32],
                ..Default::default()
            };
            let ev = compile(&f, std::slice::from_ref(&k), &opts).unwrap();
            assert_eq!(ev.table().unwrap(), expected(&f, std::slice::from_ref(&k)));
            assert_eq!(ev.provenance().random_bits > 0, randomize);
        }
    }

    #[test]
    fn bridging_units_and_equivalence() {
        let ka = key(9, 2, 1, 3);
        let kb = key(9, 2, 1, 4);
        let nl = joint_nonlinear_layers(&[ka, kb]).unwrap();
        let first = &nl[0];
        let table = |gates: &[ControlledGate]| {
            Circuit::from_controlled(18, gates.iter().cloned()).unwrap().truth_table().unwrap()
        };
        let cross = ControlledGate::cnot(Control::pos(2), 11).unwrap();
        assert_eq!(bridge_two_register(&cross, 9, first).unwrap().len(), 1);
        let same = ControlledGate::cnot(Control::neg(2), 5).unwrap();
        let u = bridge_two_register(&same, 9, first).unwrap();
        assert_eq!(u.len(), 3);
        let flat: Vec<ControlledGate> = u.iter().flat_map(BridgeUnit::gates).collect();
        assert_eq!(table(&flat), table(&[same]));
        // Toffolis in every placement class
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = [false; 3];
        for _ in 0..60 {
            let lines = rand::seq::index::sample(&mut rng, 18, 3).into_vec();
            let g = ControlledGate::toffoli(Control::pos(lines[0]), Control::neg(lines[1]), lines[2]).unwrap();
            let u = bridge_two_register(&g, 9, first).unwrap();
            assert!(u.len() <= 5);
            seen[u.len() / 2] = true;
            let flat: Vec<ControlledGate> = u.iter().flat_map(BridgeUnit::gates).collect();
            assert_eq!(table(&flat), table(&[g]));
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn two_register_defining_identity() {
        let ka = key(9, 2, 1, 5);
        let kb = key(9, 2, 1, 6);
        let keys = [ka, kb];
        let f = Circuit::from_controlled(
            6,
            [
                ControlledGate::cnot(Control::pos(0), 4).unwrap(),
                ControlledGate::toffoli(Control::pos(1), Control::pos(3), 5).unwrap(),
                ControlledGate::not(2),
            ],
        )
        .unwrap();
        let opts = CompileOptions {
            mode: RegisterMode::Two,
            seed: [1; 32],
            ..Default::default()
        };
        let ev = compile(&f, &keys, &opts).unwrap();
        assert_eq!(ev.registers(), 2);
        // 2^18 states: check a sample against the tables
        let want = expected(&f, &keys);
        let states: Vec<Bits> = (0..4096u64).map(|x| Bits::from_u64(x * 61 % (1 << 18), 18)).collect();
        let got = run_batch(&ev, &states).unwrap();
        for (s, g) in states.iter().zip(&got) {
            assert_eq!(g.to_u64().unwrap() as u32, want[s.to_u64().unwrap() as usize]);
        }
    }

    #[test]
    fn randomization_changes_chips_not_function() {
        let k = key(9, 2, 1, 7);
        let f = Circuit::from_controlled(3, [ControlledGate::cnot(Control::pos(0), 1).unwrap()]).unwrap();
        let a = compile(&f, std::slice::from_ref(&k), &CompileOptions { seed: [1; 32], ..Default::default() }).unwrap();
        let b = compile(&f, std::slice::from_ref(&k), &CompileOptions { seed: [2; 32], ..Default::default() }).unwrap();
        assert_eq!(a.table().unwrap(), b.table().unwrap());
        assert_ne!(a.chips(), b.chips());
    }

    #[test]
    fn entropy_accounting() {
        let k = key(9, 2, 1, 8);
        let f = Circuit::from_controlled(3, [ControlledGate::not(0)]).unwrap();
        let off = compile(&f, std::slice::from_ref(&k), &CompileOptions { randomize: false, ..Default::default() }).unwrap();
        assert_eq!(entropy_injected(&off).drawn, 0);
        assert!((entropy_lower_bound(27) - 81.0).abs() < 1e-9);
    }

    #[test]
    fn width_mismatch_refused() {
        let k = key(9, 2, 1, 9);
        assert!(compile(&Circuit::new(5), &[k], &CompileOptions::default()).is_err());
    }
}
