//! The two-stage cipher `E = N L` on a register of `n = 3^q` bitlines.
//!
//! The register holds `[data | ancilla | padding]`. Both stages are
//! tree-structured: layer `l` groups the abstract indices `0..n` into
//! triplets that differ in a single trit, and a key permutation `pi` maps
//! each abstract index to a physical bitline. `L` has `ceil(log2 n)` layers
//! of inflationary affine gates; `N` has `q` layers of super-nonlinear
//! gates.

mod keyfile;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::gate::{AffineGate3, Circuit, Gate, Gate3};
use crate::gateset::GateSet;

pub use keyfile::{format_key, parse_key};

/// Returns `q` with `n = 3^q`, or `None` when `n` is not a power of 3.
pub fn log3_exact(n: usize) -> Option<u32> {
    let mut q = 0;
    let mut m = 1usize;
    while m < n {
        m = m.checked_mul(3)?;
        q += 1;
    }
    (m == n).then_some(q)
}

/// `ceil(log2 n)`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    n: usize,
    n_d: usize,
    n_a: usize,
    n_g: usize,
    q: u32,
}

impl RegisterLayout {
    /// Layout with all remaining bitlines used as padding.
    pub fn new(n: usize, n_d: usize, n_a: usize) -> Result<Self> {
        let n_g = n
            .checked_sub(n_d + n_a)
            .ok_or_else(|| Error::Layout(format!("{n_d} data + {n_a} ancilla bits exceed n = {n}")))?;
        Self::with_padding(n, n_d, n_a, n_g)
    }

    pub fn with_padding(n: usize, n_d: usize, n_a: usize, n_g: usize) -> Result<Self> {
        let q = log3_exact(n)
            .filter(|&q| q >= 1)
            .ok_or_else(|| Error::Layout(format!("n = {n} is not a power of 3")))?;
        if n_d + n_a + n_g != n {
            return Err(Error::Layout(format!(
                "n_d + n_a + n_g = {} differs from n = {n}",
                n_d + n_a + n_g
            )));
        }
        if 3 * n_g < 2 * n {
            return Err(Error::Layout(format!(
                "padding fraction {n_g}/{n} is below 2/3"
            )));
        }
        Ok(RegisterLayout { n, n_d, n_a, n_g, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn n_d(&self) -> usize {
        self.n_d
    }
    pub fn n_a(&self) -> usize {
        self.n_a
    }
    pub fn n_g(&self) -> usize {
        self.n_g
    }
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Data plus ancilla: the width of plaintext programs.
    pub fn n_payload(&self) -> usize {
        self.n_d + self.n_a
    }

    /// Register assembled as `[data | ancilla | padding]`.
    pub fn assemble(&self, data: &Bits, ancilla: &Bits, padding: &Bits) -> Result<Bits> {
        for (b, want, what) in [
            (data, self.n_d, "data"),
            (ancilla, self.n_a, "ancilla"),
            (padding, self.n_g, "padding"),
        ] {
            if b.len() != want {
                return Err(Error::InvalidInput(format!(
                    "{what} has {} bits, layout expects {want}",
                    b.len()
                )));
            }
        }
        Ok(data.concat(ancilla).concat(padding))
    }

    pub fn split(&self, register: &Bits) -> Result<Plaintext> {
        if register.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "register has {} bits, layout expects {}",
                register.len(),
                self.n
            )));
        }
        Ok(Plaintext {
            data: register.slice(0, self.n_d),
            ancilla: register.slice(self.n_d, self.n_a),
            padding: register.slice(self.n_d + self.n_a, self.n_g),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plaintext {
    pub data: Bits,
    pub ancilla: Bits,
    pub padding: Bits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub bits: Bits,
    /// 0 for a single register or register A, 1 for register B.
    pub register: u8,
}

/// Abstract-index triplets of layer `ell` (1-based) for `n = 3^q`.
///
/// Layers past `q` recycle: layer `ell` uses trit `(ell - 1) mod q`.
pub fn layer_triplets(q: u32, ell: usize) -> Vec<[usize; 3]> {
    assert!(q >= 1 && ell >= 1, "layer_triplets needs q >= 1 and ell >= 1");
    let n = 3usize.pow(q);
    let trit = (ell - 1) % q as usize;
    let stride = 3usize.pow(trit as u32);
    (0..n)
        .filter(|i| (i / stride).is_multiple_of(3))
        .map(|i| [i, i + stride, i + 2 * stride])
        .collect()
}

fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

/// Physical triplets of a layer after the bitline permutation.
pub fn physical_triplets(perm: &[usize], q: u32, ell: usize) -> Vec<[usize; 3]> {
    layer_triplets(q, ell)
        .into_iter()
        .map(|t| sorted3(t.map(|i| perm[i])))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[derive(Default)]
pub struct KeygenOptions {
    /// Override for the number of linear layers (experimental; the default
    /// is `ceil(log2 n)`).
    pub linear_layers: Option<usize>,
    /// Draw an independent permutation for the nonlinear stage.
    pub separate_permutations: bool,
}


#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherKey {
    layout: RegisterLayout,
    perm: Vec<usize>,
    perm_nonlinear: Option<Vec<usize>>,
    linear: Vec<Vec<AffineGate3>>,
    nonlinear: Vec<Vec<Gate3>>,
    seed: [u8; 32],
}

impl CipherKey {
    /// Assembles and validates a key: every layer's gates must sit on that
    /// layer's physical triplets, in triplet order.
    pub fn from_parts(
        layout: RegisterLayout,
        perm: Vec<usize>,
        perm_nonlinear: Option<Vec<usize>>,
        linear: Vec<Vec<AffineGate3>>,
        nonlinear: Vec<Vec<Gate3>>,
        seed: [u8; 32],
    ) -> Result<Self> {
        let n = layout.n();
        for p in std::iter::once(&perm).chain(perm_nonlinear.as_ref()) {
            check_permutation(p, n)?;
        }
        if nonlinear.len() != layout.q() as usize {
            return Err(Error::InvalidInput(format!(
                "expected {} nonlinear layers, got {}",
                layout.q(),
                nonlinear.len()
            )));
        }
        let q = layout.q();
        for (l, layer) in linear.iter().enumerate() {
            let want = physical_triplets(&perm, q, l + 1);
            let got: Vec<[usize; 3]> = layer.iter().map(|g| g.lines()).collect();
            if want != got {
                return Err(Error::InvalidInput(format!(
                    "linear layer {} does not match its triplet schedule",
                    l + 1
                )));
            }
        }
        let pn = perm_nonlinear.as_ref().unwrap_or(&perm);
        for (l, layer) in nonlinear.iter().enumerate() {
            let want = physical_triplets(pn, q, l + 1);
            let got: Vec<[usize; 3]> = layer.iter().map(|g| g.lines()).collect();
            if want != got {
                return Err(Error::InvalidInput(format!(
                    "nonlinear layer {} does not match its triplet schedule",
                    l + 1
                )));
            }
        }
        Ok(CipherKey {
            layout,
            perm,
            perm_nonlinear,
            linear,
            nonlinear,
            seed,
        })
    }

    /// Key whose every gate is the identity, with `pi` the identity.
    pub fn identity(layout: RegisterLayout, linear_layers: usize) -> Self {
        let perm: Vec<usize> = (0..layout.n()).collect();
        let q = layout.q();
        let linear = (1..=linear_layers)
            .map(|l| {
                physical_triplets(&perm, q, l)
                    .into_iter()
                    .map(|t| AffineGate3::new(t, [1, 2, 4], 0).expect("identity"))
                    .collect()
            })
            .collect();
        let nonlinear = (1..=q as usize)
            .map(|l| {
                physical_triplets(&perm, q, l)
                    .into_iter()
                    .map(|t| Gate3::identity(t).expect("sorted"))
                    .collect()
            })
            .collect();
        CipherKey {
            layout,
            perm,
            perm_nonlinear: None,
            linear,
            nonlinear,
            seed: [0; 32],
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }
    pub fn n(&self) -> usize {
        self.layout.n()
    }
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }
    pub fn nonlinear_permutation(&self) -> &[usize] {
        self.perm_nonlinear.as_deref().unwrap_or(&self.perm)
    }
    pub fn has_separate_permutations(&self) -> bool {
        self.perm_nonlinear.is_some()
    }
    pub fn linear_layers(&self) -> &[Vec<AffineGate3>] {
        &self.linear
    }
    pub fn nonlinear_layers(&self) -> &[Vec<Gate3>] {
        &self.nonlinear
    }
    pub fn seed(&self) -> &[u8; 32] {
        &self.seed
    }

    /// `L` as a circuit, layer 1 first.
    pub fn linear_circuit(&self) -> Circuit {
        let gates = self.linear.iter().flatten().map(|g| Gate::from(*g));
        Circuit::from_gates(self.n(), gates).expect("key gates fit the register")
    }

    pub fn nonlinear_circuit(&self) -> Circuit {
        let gates = self.nonlinear.iter().flatten().map(|g| Gate::Three(*g));
        Circuit::from_gates(self.n(), gates).expect("key gates fit the register")
    }

    /// The full cipher `E`: `L` followed by `N`.
    pub fn circuit(&self) -> Circuit {
        self.linear_circuit()
            .then(&self.nonlinear_circuit())
            .expect("same width")
    }

    pub fn apply(&self, register: &Bits) -> Result<Bits> {
        let mut s = self.check_len(register)?;
        for g in self.linear.iter().flatten() {
            Gate::from(*g).apply_in_place(&mut s);
        }
        for g in self.nonlinear.iter().flatten() {
            g.apply_in_place(&mut s);
        }
        Ok(s)
    }

    pub fn apply_inverse(&self, register: &Bits) -> Result<Bits> {
        let mut s = self.check_len(register)?;
        for g in self.nonlinear.iter().flatten().rev() {
            g.inverse().apply_in_place(&mut s);
        }
        for g in self.linear.iter().flatten().rev() {
            Gate::from(g.inverse()).apply_in_place(&mut s);
        }
        Ok(s)
    }

    fn check_len(&self, register: &Bits) -> Result<Bits> {
        if register.len() != self.n() {
            return Err(Error::InvalidInput(format!(
                "register has {} bits, key expects {}",
                register.len(),
                self.n()
            )));
        }
        Ok(register.clone())
    }
}

fn check_permutation(p: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if p.len() != n {
        return Err(Error::InvalidInput(format!(
            "permutation has {} entries, expected {n}",
            p.len()
        )));
    }
    for &v in p {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidInput("bitline permutation is not a bijection".into()));
        }
    }
    Ok(())
}

/// Random `pi` such that every first-layer triplet holds at most one data
/// or ancilla bitline.
fn constrained_permutation<R: Rng>(layout: &RegisterLayout, rng: &mut R) -> Vec<usize> {
    let n = layout.n();
    let triplets = layer_triplets(layout.q(), 1);
    let payload: Vec<usize> = (0..layout.n_payload()).collect();
    let mut padding: Vec<usize> = (layout.n_payload()..n).collect();
    padding.shuffle(rng);
    // the 2/3 padding rule guarantees payload.len() <= triplets.len()
    let chosen = rand::seq::index::sample(rng, triplets.len(), payload.len()).into_vec();
    let mut perm = vec![usize::MAX; n];
    for (&bit, &t) in payload.iter().zip(&chosen) {
        let slot = triplets[t][rng.gen_range(0..3)];
        perm[slot] = bit;
    }
    let mut pad = padding.into_iter();
    for slot in perm.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = pad.next().expect("enough padding bitlines");
    }
    perm
}

/// Draws a key from `seed`: a constrained random permutation and uniform
/// gate choices per triplet per layer.
pub fn keygen(
    layout: RegisterLayout,
    linear_set: &GateSet,
    nonlinear_set: &GateSet,
    seed: [u8; 32],
    opts: &KeygenOptions,
) -> Result<CipherKey> {
    if linear_set.is_empty() || nonlinear_set.is_empty() {
        return Err(Error::InvalidInput("gate sets must be non-empty".into()));
    }
    let linear_members: Vec<AffineGate3> = linear_set
        .members()
        .iter()
        .map(|lut| {
            let g = Gate3::new([0, 1, 2], *lut)?;
            AffineGate3::from_gate3(&g)
                .ok_or_else(|| Error::InvalidInput("linear gate set has a non-affine member".into()))
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha20Rng::from_seed(seed);
    let perm = constrained_permutation(&layout, &mut rng);
    let perm_nonlinear = opts.separate_permutations.then(|| {
        let mut p: Vec<usize> = (0..layout.n()).collect();
        p.shuffle(&mut rng);
        p
    });
    let q = layout.q();
    let ell_l = opts.linear_layers.unwrap_or_else(|| ceil_log2(layout.n()));
    let linear = (1..=ell_l)
        .map(|l| {
            physical_triplets(&perm, q, l)
                .into_iter()
                .map(|t| {
                    let m = linear_members[rng.gen_range(0..linear_members.len())];
                    AffineGate3::new(t, m.columns(), m.shift()).expect("validated member")
                })
                .collect()
        })
        .collect();
    let pn = perm_nonlinear.as_ref().unwrap_or(&perm);
    let nonlinear = (1..=q as usize)
        .map(|l| {
            physical_triplets(pn, q, l)
                .into_iter()
                .map(|t| {
                    let lut = nonlinear_set.members()[rng.gen_range(0..nonlinear_set.len())];
                    Gate3::new(t, lut).expect("validated member")
                })
                .collect()
        })
        .collect();
    Ok(CipherKey {
        layout,
        perm,
        perm_nonlinear,
        linear,
        nonlinear,
        seed,
    })
}

/// Fresh 256-bit seed from the operating system.
pub fn os_seed() -> [u8; 32] {
    let mut s = [0u8; 32];
    rand::rngs::OsRng.fill_bytes(&mut s);
    s
}

/// Encrypts with uniformly drawn padding.
pub fn encrypt<R: Rng + ?Sized>(
    key: &CipherKey,
    data: &Bits,
    ancilla: &Bits,
    rng: &mut R,
) -> Result<Ciphertext> {
    let padding = Bits::random(key.layout().n_g(), rng);
    encrypt_with_padding(key, data, ancilla, &padding)
}

pub fn encrypt_with_padding(
    key: &CipherKey,
    data: &Bits,
    ancilla: &Bits,
    padding: &Bits,
) -> Result<Ciphertext> {
    let reg = key.layout().assemble(data, ancilla, padding)?;
    Ok(Ciphertext {
        bits: key.apply(&reg)?,
        register: 0,
    })
}

pub fn decrypt(key: &CipherKey, ct: &Bits) -> Result<Plaintext> {
    let reg = key.apply_inverse(ct)?;
    key.layout().split(&reg)
}

/// Empirical avalanche matrix of a permutation on `n` bits: entry
/// `[i][j]` is the fraction of random states for which flipping input bit
/// `i` flips output bit `j`.
pub fn sac_matrix<R: Rng + ?Sized>(
    n: usize,
    samples: usize,
    rng: &mut R,
    f: impl Fn(&Bits) -> Bits,
) -> Vec<Vec<f64>> {
    let mut counts = vec![vec![0usize; n]; n];
    for _ in 0..samples {
        let x = Bits::random(n, rng);
        let y = f(&x);
        for (i, row) in counts.iter_mut().enumerate() {
            let mut xi = x.clone();
            xi.flip(i);
            let d = f(&xi).xor(&y);
            for j in d.ones() {
                row[j] += 1;
            }
        }
    }
    counts
        .into_iter()
        .map(|row| row.into_iter().map(|c| c as f64 / samples as f64).collect())
        .collect()
}

pub fn avalanche_probe<R: Rng + ?Sized>(
    key: &CipherKey,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let c = key.circuit();
    Ok(sac_matrix(key.n(), samples, rng, |x| {
        let mut s = x.clone();
        c.apply_in_place(&mut s);
        s
    }))
}
