mod common;

use common::{key, light_circuit, random_circuit};
use eoc::analysis::{format_report, verify_report, OracleBudget};
use eoc::chip::{conjugate_chip_layer, seed_chip, PassThrough};
use eoc::cipher::{decrypt, encrypt_with_padding};
use eoc::conjugate::conjugate_through_l;
use eoc::evaluator::{
    compile, decrypt_joint, encrypt_joint, format_evaluator, joint_cipher_circuit, parse_evaluator,
    run, CompileOptions, Evaluator, Provenance, RegisterMode,
};
use eoc::gate::{compose_tables, Circuit, Control, ControlledGate, Gate3};
use eoc::{Bits, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn joint_circuit_is_the_key() {
    let k = key(9, 2, 1, 11);
    let c = joint_cipher_circuit(std::slice::from_ref(&k)).unwrap();
    for x in 0..512u64 {
        let s = Bits::from_u64(x, 9);
        assert_eq!(c.apply(&s).unwrap(), k.apply(&s).unwrap());
    }
}

#[test]
fn single_not_end_to_end_exhaustive() {
    let k = key(9, 2, 1, 12);
    let f = Circuit::from_controlled(3, [ControlledGate::not(1)]).unwrap();
    let ev = compile(&f, std::slice::from_ref(&k), &CompileOptions { seed: [5; 32], ..Default::default() }).unwrap();
    for x in 0..512u64 {
        let reg = Bits::from_u64(x, 9);
        let p = k.layout().split(&reg).unwrap();
        let ct = encrypt_with_padding(&k, &p.data, &p.ancilla, &p.padding).unwrap();
        let back = decrypt(&k, &run(&ev, &ct.bits).unwrap()).unwrap();
        let want = f.apply(&p.data.concat(&p.ancilla)).unwrap();
        assert_eq!(back.data.concat(&back.ancilla), want);
        assert_eq!(back.padding, p.padding);
    }
}

#[test]
fn homomorphism_over_composition() {
    let k = key(9, 2, 1, 13);
    let keys = std::slice::from_ref(&k);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let f = random_circuit(&mut rng, 3, 3, 2);
    let g = random_circuit(&mut rng, 3, 3, 2);
    let opts = CompileOptions { seed: [1; 32], ..Default::default() };
    let both = compile(&g.then(&f).unwrap(), keys, &opts).unwrap().table().unwrap();
    let tf = compile(&f, keys, &opts).unwrap().table().unwrap();
    let tg = compile(&g, keys, &CompileOptions { seed: [2; 32], ..opts.clone() }).unwrap().table().unwrap();
    assert_eq!(both, compose_tables(&tg, &tf));
}

#[test]
fn two_register_end_to_end_sampled() {
    let keys = [key(9, 2, 1, 14), key(9, 2, 1, 15)];
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let f = light_circuit(&mut rng, 6, 8, 2);
    for randomize in [false, true] {
        let opts = CompileOptions { mode: RegisterMode::Two, randomize, seed: [3; 32], jobs: None };
        let ev = compile(&f, &keys, &opts).unwrap();
        for _ in 0..300 {
            let x = Bits::random(6, &mut rng);
            let pads = [Bits::random(6, &mut rng), Bits::random(6, &mut rng)];
            let ct = encrypt_joint(&keys, &x, &pads).unwrap();
            let (y, q) = decrypt_joint(&keys, &run(&ev, &ct).unwrap()).unwrap();
            assert_eq!(y, f.apply(&x).unwrap());
            assert_eq!(q, pads);
        }
    }
}

#[test]
fn plain_compile_matches_chipwise_conjugation() {
    let k = key(9, 2, 1, 16);
    let g = ControlledGate::cnot(Control::neg(0), 2).unwrap();
    let f = Circuit::from_controlled(3, [g.clone()]).unwrap();
    let ev = compile(&f, std::slice::from_ref(&k), &CompileOptions { randomize: false, ..Default::default() }).unwrap();
    let (post_l, _) = conjugate_through_l(&g, &k).unwrap();
    let want: Vec<_> = post_l
        .controlled_gates()
        .unwrap()
        .iter()
        .map(|h| {
            let mut c = seed_chip(h, 9).unwrap();
            for layer in k.nonlinear_layers() {
                c = conjugate_chip_layer(&c, layer).unwrap();
            }
            c
        })
        .collect();
    assert_eq!(ev.chips(), &want[..]);
}

#[test]
fn thread_count_does_not_change_output() {
    let k = key(9, 2, 1, 17);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let f = random_circuit(&mut rng, 3, 4, 2);
    let base = CompileOptions { seed: [8; 32], ..Default::default() };
    let a = compile(&f, std::slice::from_ref(&k), &base).unwrap();
    let b = compile(&f, std::slice::from_ref(&k), &CompileOptions { jobs: Some(3), ..base }).unwrap();
    assert_eq!(format_evaluator(&a, PassThrough::Implicit), format_evaluator(&b, PassThrough::Implicit));
}

#[test]
fn file_round_trip_preserves_function() {
    let k = key(9, 2, 1, 18);
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let f = random_circuit(&mut rng, 3, 3, 2);
    let ev = compile(&f, std::slice::from_ref(&k), &CompileOptions::default()).unwrap();
    let back = parse_evaluator(&format_evaluator(&ev, PassThrough::Explicit)).unwrap();
    assert_eq!(back.table().unwrap(), ev.table().unwrap());
}

#[test]
fn report_on_empty_evaluator() {
    let k = key(9, 2, 1, 19);
    let prov = Provenance {
        chips_per_gate: vec![],
        randomized: false,
        random_seed: [0; 32],
        random_bits: 0,
        linear_layers: k.linear_layers().len(),
        nonlinear_layers: k.nonlinear_layers().len(),
    };
    let ev = Evaluator::new(9, 1, vec![], prov).unwrap();
    let budget = OracleBudget { exhaustive: true, ..Default::default() };
    let r = verify_report(&ev, &[k], None, &budget).unwrap();
    assert!(r.chips.is_empty() && r.passed());
    assert_eq!(r.oracle.checked, 512);
    let text = format_report(&r);
    assert!(text.starts_with("eoc-report 1\nstatus pass\n"));
}

#[test]
fn report_on_not_only_circuit_at_27() {
    let k = key(27, 2, 1, 20);
    let f = Circuit::from_controlled(3, [ControlledGate::not(0), ControlledGate::not(2)]).unwrap();
    let ev = compile(&f, std::slice::from_ref(&k), &CompileOptions::default()).unwrap();
    let r = verify_report(&ev, std::slice::from_ref(&k), Some(&f), &OracleBudget::default()).unwrap();
    assert!(r.passed(), "{}", format_report(&r));
    assert!(r.chips.iter().all(|c| c.slack().unwrap() >= 0));
    assert_eq!(r.oracle.mismatches, 0);
}

#[test]
fn report_flags_corrupt_chip() {
    let k = key(9, 2, 1, 21);
    let f = Circuit::from_controlled(3, [ControlledGate::cnot(Control::pos(0), 1).unwrap()]).unwrap();
    let mut ev = compile(&f, std::slice::from_ref(&k), &CompileOptions::default()).unwrap();
    let budget = OracleBudget { exhaustive: true, ..Default::default() };
    assert!(verify_report(&ev, std::slice::from_ref(&k), Some(&f), &budget).unwrap().passed());
    let line = ev.chips()[0].footprint().next().unwrap();
    ev.chips_mut()[0].absorb_output_not(line);
    let r = verify_report(&ev, std::slice::from_ref(&k), None, &budget).unwrap();
    assert!(!r.passed());
    assert!(r.oracle.mismatches > 0);
    assert!(format_report(&r).contains("\nfailure oracle"));
}

#[test]
fn report_flags_wrong_circuit() {
    let k = key(9, 2, 1, 22);
    let f = Circuit::from_controlled(3, [ControlledGate::not(0)]).unwrap();
    let other = Circuit::from_controlled(3, [ControlledGate::not(1)]).unwrap();
    let ev = compile(&f, std::slice::from_ref(&k), &CompileOptions::default()).unwrap();
    let r = verify_report(&ev, std::slice::from_ref(&k), Some(&other), &OracleBudget::default()).unwrap();
    assert!(!r.passed());
}

#[test]
fn compile_refusals() {
    let k = key(9, 2, 1, 23);
    let opts = CompileOptions::default();
    // width must match the payload
    assert!(compile(&Circuit::new(4), std::slice::from_ref(&k), &opts).is_err());
    let g3 = Circuit::from_gates(3, [Gate3::identity([0, 1, 2]).unwrap().into()]).unwrap();
    assert!(matches!(
        compile(&g3, std::slice::from_ref(&k), &opts),
        Err(Error::UnsupportedGate(_))
    ));
    let two = CompileOptions { mode: RegisterMode::Two, ..Default::default() };
    assert!(compile(&Circuit::new(3), std::slice::from_ref(&k), &two).is_err());
}
