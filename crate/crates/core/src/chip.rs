//! Chips: conjugated gates stored as one BDD per touched output line.
//!
//! A chip at level `l` computes `N_l..N_1 g N_1^-1..N_l^-1` for its seed
//! `g`. Lines outside the footprint pass through unchanged. Every output
//! BDD reads its own input variable last.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::gate::{invert_lut, Control, ControlledGate, Gate3, GateKind};
use crate::robdd::{format_packed, order_of, parse_packed, Bdd, Order, PackedBdd, Store};
use crate::textio::{keyed, next_line, parse_num};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeedKind {
    Not,
    Cnot,
    Toffoli,
    /// A cross-register SWAP used for bridging.
    Swap,
    /// Any other gate list.
    Composite,
}

impl SeedKind {
    pub fn name(self) -> &'static str {
        match self {
            SeedKind::Not => "not",
            SeedKind::Cnot => "cnot",
            SeedKind::Toffoli => "toffoli",
            SeedKind::Swap => "swap",
            SeedKind::Composite => "composite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SeedKind::Not,
            SeedKind::Cnot,
            SeedKind::Toffoli,
            SeedKind::Swap,
            SeedKind::Composite,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

impl fmt::Display for SeedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chip {
    n: usize,
    level: usize,
    kind: SeedKind,
    outputs: BTreeMap<usize, PackedBdd>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChipMetrics {
    pub width: usize,
    /// Largest output node count, terminals included.
    pub size: usize,
    /// Sum of output node counts.
    pub volume: usize,
}

impl Chip {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn kind(&self) -> SeedKind {
        self.kind
    }

    pub fn outputs(&self) -> &BTreeMap<usize, PackedBdd> {
        &self.outputs
    }

    pub fn output(&self, line: usize) -> Option<&PackedBdd> {
        self.outputs.get(&line)
    }

    pub fn footprint(&self) -> impl Iterator<Item = usize> + '_ {
        self.outputs.keys().copied()
    }

    pub fn touches(&self, line: usize) -> bool {
        self.outputs.contains_key(&line)
    }

    pub fn metrics(&self) -> ChipMetrics {
        let counts = self.outputs.values().map(PackedBdd::node_count);
        ChipMetrics {
            width: self.outputs.len(),
            size: counts.clone().max().unwrap_or(0),
            volume: counts.sum(),
        }
    }

    /// Applies the chip to one state.
    pub fn eval(&self, state: &Bits) -> Result<Bits> {
        if state.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "state has {} bits, chip expects {}",
                state.len(),
                self.n
            )));
        }
        let mut out = state.clone();
        for (&line, f) in &self.outputs {
            out.set(line, f.evaluate(state)?);
        }
        Ok(out)
    }

    /// Applies the chip to 64 states at once; `words[j]` holds line `j`.
    pub fn eval_words(&self, words: &mut [u64], scratch: &mut Vec<u64>) {
        let new: Vec<(usize, u64)> = self
            .outputs
            .iter()
            .map(|(&line, f)| (line, f.evaluate_words(words, scratch)))
            .collect();
        for (line, w) in new {
            words[line] = w;
        }
    }
}

pub fn chip_eval(chip: &Chip, state: &Bits) -> Result<Bits> {
    chip.eval(state)
}

pub fn chip_metrics(chip: &Chip) -> ChipMetrics {
    chip.metrics()
}

fn kind_of(gates: &[ControlledGate]) -> SeedKind {
    match gates {
        [g] => match g.kind() {
            GateKind::Not => SeedKind::Not,
            GateKind::Cnot => SeedKind::Cnot,
            GateKind::Toffoli => SeedKind::Toffoli,
            GateKind::Multi(_) => SeedKind::Composite,
        },
        _ => SeedKind::Composite,
    }
}

/// Level-0 chip of a single NOT, CNOT or Toffoli.
pub fn seed_chip(gate: &ControlledGate, n: usize) -> Result<Chip> {
    if gate.controls().len() > 2 {
        return Err(Error::UnsupportedGate(format!("{gate}: chips take at most two controls")));
    }
    seed_chip_from_gates(std::slice::from_ref(gate), n)
}

/// Level-0 chip computing a gate list, with footprint the lines it touches.
pub fn seed_chip_from_gates(gates: &[ControlledGate], n: usize) -> Result<Chip> {
    let lines: BTreeSet<usize> = gates.iter().flat_map(|g| g.lines()).collect();
    if let Some(&max) = lines.last() {
        if max >= n {
            return Err(Error::IndexOutOfRange { index: max, width: n });
        }
    }
    let order = order_of(lines.iter().map(|&l| l as u32));
    let mut store = Store::new();
    let mut cur: BTreeMap<usize, Bdd> = BTreeMap::new();
    for &l in &lines {
        cur.insert(l, store.var_in(l as u32, &order)?);
    }
    for g in gates {
        let mut fire = store.constant(true, &order);
        for c in g.controls() {
            let lit = &cur[&c.bit];
            let lit = if c.polarity.is_negative() {
                store.not(lit)
            } else {
                lit.clone()
            };
            fire = store.and(&fire, &lit)?;
        }
        let t = store.xor(&cur[&g.target()], &fire)?;
        cur.insert(g.target(), t);
    }
    let outputs = cur
        .into_iter()
        .map(|(l, f)| {
            let f = store.reorder_var_last(&f, l as u32);
            (l, store.pack(&f))
        })
        .collect();
    Ok(Chip {
        n,
        level: 0,
        kind: kind_of(gates),
        outputs,
    })
}

/// Level-0 chip exchanging lines `a` and `b`.
pub fn seed_swap_chip(a: usize, b: usize, n: usize) -> Result<Chip> {
    let mut chip = seed_chip_from_gates(&swap_gates(a, b)?, n)?;
    chip.kind = SeedKind::Swap;
    Ok(chip)
}

/// SWAP as three CNOTs.
pub fn swap_gates(a: usize, b: usize) -> Result<Vec<ControlledGate>> {
    Ok(vec![
        ControlledGate::cnot(Control::pos(a), b)?,
        ControlledGate::cnot(Control::pos(b), a)?,
        ControlledGate::cnot(Control::pos(a), b)?,
    ])
}

/// Validates that `layer` partitions `0..n` and maps each line to its gate.
pub fn layer_index(layer: &[Gate3], n: usize) -> Result<Vec<usize>> {
    let mut of = vec![usize::MAX; n];
    for (k, g) in layer.iter().enumerate() {
        for l in g.lines() {
            if l >= n || of[l] != usize::MAX {
                return Err(Error::Layout(format!("layer does not partition {n} lines at {l}")));
            }
            of[l] = k;
        }
    }
    if of.contains(&usize::MAX) {
        return Err(Error::Layout(format!("layer leaves some of {n} lines uncovered")));
    }
    Ok(of)
}

/// Replaces each variable of `order` by its triplet, keeping first
/// occurrences, and moves the block of triplet `last` to the end.
fn expand_order(order: &Order, layer: &[Gate3], of: &[usize], last: usize) -> Order {
    let pos = |v: u32| order.iter().position(|&x| x == v);
    let mut seen = BTreeSet::new();
    let mut out: Vec<u32> = Vec::with_capacity(order.len() * 3);
    let mut tail: Vec<u32> = Vec::new();
    for &v in order.iter() {
        let t = of[v as usize];
        if !seen.insert(t) {
            continue;
        }
        let mut present: Vec<u32> = layer[t]
            .lines()
            .iter()
            .map(|&l| l as u32)
            .filter(|&l| pos(l).is_some())
            .collect();
        present.sort_by_key(|&l| pos(l));
        let fresh = layer[t]
            .lines()
            .into_iter()
            .map(|l| l as u32)
            .filter(|&l| pos(l).is_none());
        present.extend(fresh);
        if t == last {
            tail = present;
        } else {
            out.extend(present);
        }
    }
    out.extend(tail);
    out.into()
}

fn minterm(store: &mut Store, lines: [usize; 3], value: u8, order: &Order) -> Result<Bdd> {
    let mut m = store.constant(true, order);
    for (k, &l) in lines.iter().enumerate() {
        let lit = store.literal(l as u32, value >> k & 1 == 1, order)?;
        m = store.and(&m, &lit)?;
    }
    Ok(m)
}

/// Coordinate `k` of the 3-bit permutation `lut` on `lines`, read in `order`.
fn coordinate(
    store: &mut Store,
    lines: [usize; 3],
    lut: &[u8; 8],
    k: usize,
    order: &Order,
) -> Result<Bdd> {
    let mut acc = store.constant(false, order);
    for u in 0u8..8 {
        if lut[u as usize] >> k & 1 == 1 {
            let m = minterm(store, lines, u, order)?;
            acc = store.or(&acc, &m)?;
        }
    }
    Ok(acc)
}

/// Conjugates the chip by one layer: the result computes `G h G^-1`.
pub fn conjugate_chip_layer(chip: &Chip, layer: &[Gate3]) -> Result<Chip> {
    let of = layer_index(layer, chip.n)?;
    let touched: BTreeSet<usize> = chip.outputs.keys().map(|&l| of[l]).collect();
    let mut store = Store::new();
    let current: BTreeMap<usize, Bdd> = chip
        .outputs
        .iter()
        .map(|(&l, p)| (l, store.unpack(p)))
        .collect();
    let inverses: Vec<[u8; 8]> = layer.iter().map(|g| invert_lut(&g.lut())).collect();
    let mut outputs = BTreeMap::new();
    for &t in &touched {
        let gate = &layer[t];
        let lines = gate.lines();
        let anchor = lines
            .iter()
            .find(|l| current.contains_key(l))
            .expect("touched triplet meets the footprint");
        let order = expand_order(current[anchor].order(), layer, &of, t);
        // step 1: read every output of this triplet through G^-1
        let mut subs = HashMap::new();
        for &s in &touched {
            let tl = layer[s].lines();
            for (k, &l) in tl.iter().enumerate() {
                subs.insert(l as u32, coordinate(&mut store, tl, &inverses[s], k, &order)?);
            }
        }
        let mut tilde: Vec<Bdd> = Vec::with_capacity(3);
        for &l in &lines {
            let f = match current.get(&l) {
                Some(h) => store.vector_compose(h, &subs, &order)?,
                None => subs[&(l as u32)].clone(),
            };
            tilde.push(f);
        }
        // step 2: recombine through G's coordinate functions
        let lut = gate.lut();
        let mut products = Vec::with_capacity(8);
        for w in 0u8..8 {
            let mut p = store.constant(true, &order);
            for (k, h) in tilde.iter().enumerate() {
                let lit = if w >> k & 1 == 1 { h.clone() } else { store.not(h) };
                p = store.and(&p, &lit)?;
            }
            products.push(p);
        }
        for (k, &l) in lines.iter().enumerate() {
            let mut f = store.constant(false, &order);
            for w in 0..8 {
                if lut[w] >> k & 1 == 1 {
                    f = store.or(&f, &products[w])?;
                }
            }
            let f = store.reorder_var_last(&f, l as u32);
            outputs.insert(l, store.pack(&f));
        }
    }
    Ok(Chip {
        n: chip.n,
        level: chip.level + 1,
        kind: chip.kind,
        outputs,
    })
}

fn identity_output(line: usize) -> PackedBdd {
    PackedBdd::literal(line as u32, true)
}

impl Chip {
    /// In-place form of [`absorb_input_not`].
    pub fn absorb_input_not(&mut self, line: usize) {
        self.outputs.entry(line).or_insert_with(|| identity_output(line));
        for f in self.outputs.values_mut() {
            f.flip_var_branches(line as u32);
        }
    }

    /// In-place form of [`absorb_output_not`].
    pub fn absorb_output_not(&mut self, line: usize) {
        self.outputs
            .entry(line)
            .or_insert_with(|| identity_output(line))
            .swap_terminals();
    }
}

/// Absorbs a NOT placed before the chip on `line`. A line outside the
/// footprint gains a negated identity output.
pub fn absorb_input_not(chip: &Chip, line: usize) -> Chip {
    let mut out = chip.clone();
    out.absorb_input_not(line);
    out
}

/// Absorbs a NOT placed after the chip on `line`.
pub fn absorb_output_not(chip: &Chip, line: usize) -> Chip {
    let mut out = chip.clone();
    out.absorb_output_not(line);
    out
}

/// How lines outside the footprint are written.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PassThrough {
    /// Footprint lines only.
    #[default]
    Implicit,
    /// Every line, with identity BDDs for the pass-through ones.
    Explicit,
}

/// ```text
/// chip level 2 kind not width 9
/// out 4
/// bdd ...
/// pass 0
/// bdd 1 root 2
/// order 0
/// 2 0 0 1
/// ```
pub fn format_chip(chip: &Chip, pass: PassThrough, out: &mut String) {
    writeln!(
        out,
        "chip level {} kind {} width {}",
        chip.level,
        chip.kind,
        chip.outputs.len()
    )
    .unwrap();
    for line in 0..chip.n {
        match chip.outputs.get(&line) {
            Some(f) => {
                writeln!(out, "out {line}").unwrap();
                format_packed(f, out);
            }
            None if pass == PassThrough::Explicit => {
                writeln!(out, "pass {line}").unwrap();
                format_packed(&identity_output(line), out);
            }
            None => {}
        }
    }
}

pub fn parse_chip<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, n: usize) -> Result<Chip> {
    let (hl, head) = next_line(lines, "chip header")?;
    let t: Vec<&str> = head.split_whitespace().collect();
    if t.len() != 7 || t[0] != "chip" || t[1] != "level" || t[3] != "kind" || t[5] != "width" {
        return Err(Error::parse(hl, "expected `chip level <l> kind <k> width <w>`"));
    }
    let level: usize = parse_num(hl, t[2], "level")?;
    let kind = SeedKind::parse(t[4]).ok_or_else(|| Error::parse(hl, format!("unknown kind {}", t[4])))?;
    let width: usize = parse_num(hl, t[6], "width")?;
    let mut outputs = BTreeMap::new();
    let mut last: Option<usize> = None;
    while outputs.len() < width {
        let (ll, l) = next_line(lines, "chip output")?;
        let (pass, line) = match l.split_once(' ') {
            Some(("out", _)) => (false, keyed::<usize>(ll, l, "out")?),
            Some(("pass", _)) => (true, keyed::<usize>(ll, l, "pass")?),
            _ => return Err(Error::parse(ll, "expected `out <line>` or `pass <line>`")),
        };
        if line >= n || last.is_some_and(|p| p >= line) {
            return Err(Error::parse(ll, "output lines must increase and fit the register"));
        }
        last = Some(line);
        let f = parse_packed(lines)?;
        if pass {
            if f != identity_output(line) {
                return Err(Error::parse(ll, "pass-through line is not the identity"));
            }
        } else {
            outputs.insert(line, f);
        }
    }
    Ok(Chip {
        n,
        level,
        kind,
        outputs,
    })
}
