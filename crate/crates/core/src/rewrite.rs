//! Equivalence rules for controlled gates: collisions with debris,
//! simplification, polarity mutation and factorization.
//!
//! Sequences are in execution order throughout. Interchanging `[g, h]`
//! yields `[h, D.., g]`, where the debris `D` is computed algebraically from
//! the two gates' control products.

use crate::error::{Error, Result};
use crate::gate::{Circuit, Control, ControlledGate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CollisionKind {
    NoCollision,
    HeadOnHead,
    OneHead,
    TwoHead,
}

pub fn classify_collision(g: &ControlledGate, h: &ControlledGate) -> CollisionKind {
    if g.target() == h.target() {
        return CollisionKind::HeadOnHead;
    }
    let g_hits_h = h.has_control_on(g.target());
    let h_hits_g = g.has_control_on(h.target());
    match (g_hits_h, h_hits_g) {
        (false, false) => CollisionKind::NoCollision,
        (true, true) => CollisionKind::TwoHead,
        _ => CollisionKind::OneHead,
    }
}

/// Two gates commute exactly when they do not collide or share a head.
pub fn commutes(g: &ControlledGate, h: &ControlledGate) -> bool {
    matches!(
        classify_collision(g, h),
        CollisionKind::NoCollision | CollisionKind::HeadOnHead
    )
}

/// Conjunction of two control products. Repeated literals merge; opposite
/// literals on one bit make the product identically zero (`None`).
pub fn product_controls(a: &[Control], b: &[Control]) -> Option<Vec<Control>> {
    let mut out: Vec<Control> = a.to_vec();
    for &c in b {
        match out.iter().find(|x| x.bit == c.bit) {
            Some(x) if x.polarity == c.polarity => {}
            Some(_) => return None,
            None => out.push(c),
        }
    }
    out.sort();
    Some(out)
}

fn without(controls: &[Control], bit: usize) -> Vec<Control> {
    controls.iter().copied().filter(|c| c.bit != bit).collect()
}

/// Gate `target ^= product`, or nothing when the product vanishes.
fn product_gate(target: usize, a: &[Control], b: &[Control]) -> Option<ControlledGate> {
    let controls = product_controls(a, b)?;
    Some(ControlledGate::new(target, controls).expect("target kept out of the product"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commuted {
    pub first: ControlledGate,
    pub debris: Vec<ControlledGate>,
    pub last: ControlledGate,
    pub kind: CollisionKind,
}

impl Commuted {
    pub fn gates(&self) -> Vec<ControlledGate> {
        let mut v = vec![self.first.clone()];
        v.extend(self.debris.iter().cloned());
        v.push(self.last.clone());
        v
    }
}

/// Rewrites `[g, h]` as `[h, debris.., g]`.
pub fn commute_past(g: &ControlledGate, h: &ControlledGate) -> Commuted {
    let kind = classify_collision(g, h);
    let (t, s) = (g.target(), h.target());
    let debris = match kind {
        CollisionKind::NoCollision | CollisionKind::HeadOnHead => Vec::new(),
        CollisionKind::OneHead if g.has_control_on(s) => {
            // g = t ^= L(x_s) G', h = s ^= H: D = t ^= G' H
            product_gate(t, &without(g.controls(), s), h.controls())
                .into_iter()
                .collect()
        }
        CollisionKind::OneHead => {
            // h = s ^= L(x_t) H', g = t ^= G: D = s ^= H' G
            product_gate(s, &without(h.controls(), t), g.controls())
                .into_iter()
                .collect()
        }
        CollisionKind::TwoHead => {
            // D = [t ^= G H', s ^= H G']
            let d1 = product_gate(t, g.controls(), &without(h.controls(), t));
            let d2 = product_gate(s, h.controls(), &without(g.controls(), s));
            d1.into_iter().chain(d2).collect()
        }
    };
    Commuted {
        first: h.clone(),
        debris,
        last: g.clone(),
        kind,
    }
}

/// Which same-target merges [`simplify_with`] may perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rules {
    pub annihilation: bool,
    pub elimination: bool,
    pub reversal: bool,
    /// Maximum distance scanned for a merge partner; `None` is unbounded.
    pub window: Option<usize>,
}

impl Rules {
    pub const ALL: Rules = Rules {
        annihilation: true,
        elimination: true,
        reversal: true,
        window: None,
    };

    pub const CANCEL_ONLY: Rules = Rules {
        annihilation: true,
        elimination: true,
        reversal: false,
        window: Some(64),
    };
}

/// Combines two gates on the same target into at most one gate.
///
/// Returns `Some(None)` when they annihilate, `Some(Some(g))` when they
/// merge into `g`, and `None` when no rule applies.
pub fn merge_same_target(
    a: &ControlledGate,
    b: &ControlledGate,
    rules: &Rules,
) -> Option<Option<ControlledGate>> {
    if a.target() != b.target() {
        return None;
    }
    if a == b {
        return rules.annihilation.then_some(None);
    }
    let (ca, cb) = (a.controls(), b.controls());
    if rules.elimination && ca.len() == cb.len() {
        // same bits, exactly one polarity differs: X x + X x' = X
        let diffs: Vec<usize> = ca
            .iter()
            .zip(cb)
            .filter(|(x, y)| x != y)
            .map(|(x, _)| x.bit)
            .collect();
        let same_bits = ca.iter().zip(cb).all(|(x, y)| x.bit == y.bit);
        if same_bits && diffs.len() == 1 {
            return Some(Some(a.with_controls(without(ca, diffs[0])).expect("subset")));
        }
    }
    if rules.reversal {
        // X + X x = X x'
        let (small, big) = if ca.len() < cb.len() { (ca, cb) } else { (cb, ca) };
        if big.len() == small.len() + 1 && small.iter().all(|c| big.contains(c)) {
            let extra = big.iter().find(|c| !small.contains(c)).expect("one extra");
            let mut controls = small.to_vec();
            controls.push(extra.flipped());
            return Some(Some(a.with_controls(controls).expect("disjoint from target")));
        }
    }
    None
}

/// Applies annihilation, control elimination and control reversal until
/// none applies. Partners may be separated by gates that commute with the
/// moving gate. Every step removes a gate, so the loop terminates, and the
/// result is a fixpoint (applying it again changes nothing).
pub fn simplify_with(gates: &[ControlledGate], rules: &Rules) -> Vec<ControlledGate> {
    let mut cur: Vec<Option<ControlledGate>> = gates.iter().cloned().map(Some).collect();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < cur.len() {
            let Some(gi) = cur[i].clone() else {
                i += 1;
                continue;
            };
            let mut j = i + 1;
            let mut scanned = 0;
            while j < cur.len() {
                if let Some(gj) = &cur[j] {
                    if let Some(merged) = merge_same_target(&gi, gj, rules) {
                        // gi slides right to j and fuses with gj
                        cur[i] = None;
                        cur[j] = merged;
                        changed = true;
                        break;
                    }
                    if !commutes(&gi, gj) {
                        break;
                    }
                    scanned += 1;
                    if rules.window.is_some_and(|w| scanned >= w) {
                        break;
                    }
                }
                j += 1;
            }
            i += 1;
        }
        cur.retain(Option::is_some);
        if !changed {
            break;
        }
    }
    cur.into_iter().flatten().collect()
}

pub fn simplify(gates: &[ControlledGate]) -> Vec<ControlledGate> {
    simplify_with(gates, &Rules::ALL)
}

/// Circuit form of [`simplify`]; 3-bit gates are not rewritten.
pub fn simplify_circuit(circuit: &Circuit) -> Result<Circuit> {
    let gates = circuit
        .controlled_gates()
        .ok_or_else(|| Error::UnsupportedGate("simplify works on controlled gates only".into()))?;
    let mut out = Circuit::from_controlled(circuit.width(), simplify(&gates))?;
    out.set_registers(circuit.registers());
    Ok(out)
}

/// Lines touched by a gate list, sorted.
fn lines_of(gates: &[&ControlledGate]) -> Vec<usize> {
    let mut v: Vec<usize> = gates.iter().flat_map(|g| g.lines()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Permutation of the local state space spanned by `lines`.
fn local_table(gates: &[&ControlledGate], lines: &[usize]) -> Vec<u32> {
    let pos = |b: usize| lines.iter().position(|&l| l == b).expect("line listed");
    let local: Vec<ControlledGate> = gates
        .iter()
        .map(|g| {
            let cs = g
                .controls()
                .iter()
                .map(|c| Control {
                    bit: pos(c.bit),
                    polarity: c.polarity,
                })
                .collect();
            ControlledGate::new(pos(g.target()), cs).expect("relabelling keeps validity")
        })
        .collect();
    (0..1u64 << lines.len())
        .map(|x| local.iter().fold(x, |s, g| g.apply_u64(s)) as u32)
        .collect()
}

/// Polarity mutations of a gate pair: every pair with the same targets and
/// control bits but different control polarities, in either order, that
/// realizes the same product. Found by exhaustive search; callers decide
/// whether to use them.
pub fn polarity_mutations(
    g: &ControlledGate,
    h: &ControlledGate,
) -> Vec<(ControlledGate, ControlledGate)> {
    let lines = lines_of(&[g, h]);
    let want = local_table(&[g, h], &lines);
    let kg = g.controls().len();
    let kh = h.controls().len();
    let recolor = |gate: &ControlledGate, mask: u32| -> ControlledGate {
        let cs = gate
            .controls()
            .iter()
            .enumerate()
            .map(|(k, c)| if mask >> k & 1 == 1 { c.flipped() } else { *c })
            .collect();
        gate.with_controls(cs).expect("same bits")
    };
    let mut out = Vec::new();
    for mg in 0..1u32 << kg {
        for mh in 0..1u32 << kh {
            let g2 = recolor(g, mg);
            let h2 = recolor(h, mh);
            for (a, b) in [(&g2, &h2), (&h2, &g2)] {
                if (a, b) == (g, h) {
                    continue;
                }
                if local_table(&[a, b], &lines) == want {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// How the controls of a wide gate are divided between the two factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Split {
    /// The first `ceil(k/2)` controls go to the ancilla gate.
    #[default]
    Leading,
    /// The last `ceil(k/2)` controls go to the ancilla gate.
    Trailing,
}

/// Factorizes `gate` into gates with at most `max_controls` controls,
/// borrowing a dirty ancilla line that is returned to its initial value.
///
/// With controls split into `X` and `Y` and ancilla `a`, the identity
/// `t ^= XY  ==  [a ^= X, t ^= aY, a ^= X, t ^= aY]` is applied
/// recursively; the sub-factorizations borrow `t` or a line of `X`.
pub fn factorize(
    gate: &ControlledGate,
    max_controls: usize,
    ancillas: &[usize],
    split: Split,
) -> Result<Vec<ControlledGate>> {
    if max_controls < 2 {
        return Err(Error::InvalidInput("max_controls must be at least 2".into()));
    }
    if gate.controls().len() <= max_controls {
        return Ok(vec![gate.clone()]);
    }
    let used = gate.lines();
    let a = ancillas
        .iter()
        .copied()
        .find(|x| !used.contains(x))
        .ok_or(Error::NoAncilla {
            controls: gate.controls().len(),
        })?;
    let mut out = Vec::new();
    factor_rec(gate, max_controls, a, split, &mut out);
    Ok(out)
}

fn factor_rec(
    gate: &ControlledGate,
    max: usize,
    a: usize,
    split: Split,
    out: &mut Vec<ControlledGate>,
) {
    let cs = gate.controls();
    if cs.len() <= max {
        out.push(gate.clone());
        return;
    }
    let k = cs.len();
    let nx = k.div_ceil(2);
    let (x, y): (Vec<Control>, Vec<Control>) = match split {
        Split::Leading => (cs[..nx].to_vec(), cs[nx..].to_vec()),
        Split::Trailing => (cs[k - nx..].to_vec(), cs[..k - nx].to_vec()),
    };
    let t = gate.target();
    let ax = ControlledGate::new(a, x.clone()).expect("ancilla outside the gate");
    let mut ay_controls = y;
    ay_controls.push(Control::pos(a));
    let ty = ControlledGate::new(t, ay_controls).expect("ancilla outside the gate");
    // t is free while a ^= X runs; a line of X is free while t ^= aY runs
    let spare_for_ty = x[0].bit;
    for (g, spare) in [(&ax, t), (&ty, spare_for_ty), (&ax, t), (&ty, spare_for_ty)] {
        factor_rec(g, max, spare, split, out);
    }
}
