#![allow(dead_code)]

use std::sync::OnceLock;

use eoc::cipher::{keygen, CipherKey, KeygenOptions, RegisterLayout};
use eoc::gate::{Circuit, Control, ControlledGate, Polarity};
use eoc::gateset::{enumerate_inflationary, enumerate_super_nonlinear, GateSet, Predicate};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sets() -> &'static (GateSet, GateSet) {
    static S: OnceLock<(GateSet, GateSet)> = OnceLock::new();
    S.get_or_init(|| {
        (
            enumerate_inflationary(),
            enumerate_super_nonlinear(Predicate::Strict),
        )
    })
}

pub fn seed32(seed: u64) -> [u8; 32] {
    let mut s = [0u8; 32];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut s);
    s
}

pub fn key(n: usize, nd: usize, na: usize, seed: u64) -> CipherKey {
    let (lin, nl) = sets();
    keygen(
        RegisterLayout::new(n, nd, na).unwrap(),
        lin,
        nl,
        seed32(seed),
        &KeygenOptions::default(),
    )
    .unwrap()
}

/// NOT, CNOT or Toffoli on `width` lines with random polarities; `max_controls`
/// caps the kind.
pub fn random_gate<R: Rng>(rng: &mut R, width: usize, max_controls: usize) -> ControlledGate {
    let k = rng.gen_range(0..=max_controls.min(width - 1));
    let lines = rand::seq::index::sample(rng, width, k + 1).into_vec();
    let cs = lines[1..]
        .iter()
        .map(|&b| Control {
            bit: b,
            polarity: Polarity::from_negated(rng.gen()),
        })
        .collect();
    ControlledGate::new(lines[0], cs).unwrap()
}

pub fn random_circuit<R: Rng>(rng: &mut R, width: usize, len: usize, max_controls: usize) -> Circuit {
    Circuit::from_controlled(width, (0..len).map(|_| random_gate(rng, width, max_controls))).unwrap()
}

/// `len` gates with exactly `toffolis` Toffolis at random positions, the
/// rest NOTs and CNOTs.
pub fn light_circuit<R: Rng>(rng: &mut R, width: usize, len: usize, toffolis: usize) -> Circuit {
    let mut gates: Vec<ControlledGate> = (0..len - toffolis)
        .map(|_| random_gate(rng, width, 1))
        .collect();
    for _ in 0..toffolis {
        let at = rng.gen_range(0..=gates.len());
        let lines = rand::seq::index::sample(rng, width, 3).into_vec();
        let g = ControlledGate::toffoli(
            Control { bit: lines[0], polarity: Polarity::from_negated(rng.gen()) },
            Control { bit: lines[1], polarity: Polarity::from_negated(rng.gen()) },
            lines[2],
        )
        .unwrap();
        gates.insert(at, g);
    }
    Circuit::from_controlled(width, gates).unwrap()
}
