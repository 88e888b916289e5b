//! Size and expansion bounds, empirical samplers and evaluator reports.

use std::fmt::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::bits::Bits;
use crate::chip::SeedKind;
use crate::cipher::CipherKey;
use crate::conjugate::{conjugate_affine_layer, lift};
use crate::error::{Error, Result};
use crate::evaluator::{decrypt_joint, encrypt_joint, run_batch, Evaluator};
use crate::gate::{AffineGate3, Circuit, Control, ControlledGate, Gate3, Polarity, ORACLE_LIMIT};
use crate::gateset::GateSet;

/// Worst-case offspring exponent: `3 log2 3`.
pub fn mu3() -> f64 {
    3.0 * 3f64.log2()
}

/// Average offspring exponent: `3 log2(7/3)`.
pub fn nu3() -> f64 {
    3.0 * (7.0f64 / 3.0).log2()
}

/// Chip size growth exponent `log3 7`.
pub fn gamma() -> f64 {
    7f64.ln() / 3f64.ln()
}

/// Largest output BDD of a NOT-seeded chip after `ell` nonlinear layers.
pub fn bmax_bound(ell: u32) -> u64 {
    7u64.pow(ell) + 2
}

/// Wire counts `a_m` into each module of the tree network of depth `ell`,
/// followed by the single output wire.
pub fn network_wire_profile(ell: u32) -> Vec<u32> {
    let mut a = vec![0u32];
    for _ in 0..ell {
        a = a.iter().flat_map(|&x| [x, x + 1, x + 2]).collect();
    }
    a.push(1);
    a
}

pub fn wire_profile_sum(profile: &[u32]) -> u64 {
    profile.iter().map(|&a| 1u64 << a).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem1Bounds {
    /// `n^mu3`.
    pub max: f64,
    /// `n^nu3`.
    pub avg: f64,
}

/// Offspring bounds for one gate conjugated through the linear stage.
pub fn theorem1_bounds(n: usize) -> Result<Theorem1Bounds> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("offspring bounds need n >= 2, got {n}")));
    }
    let n = n as f64;
    Ok(Theorem1Bounds {
        max: n.powf(mu3()),
        avg: n.powf(nu3()),
    })
}

/// One layer of random gates from `set` on a random partition of `n` lines.
pub fn random_affine_layer<R: Rng + ?Sized>(
    n: usize,
    set: &GateSet,
    rng: &mut R,
) -> Result<Vec<AffineGate3>> {
    if !n.is_multiple_of(3) || set.is_empty() {
        return Err(Error::InvalidInput(format!(
            "cannot fill {n} lines with triplets from a set of {}",
            set.len()
        )));
    }
    let mut lines: Vec<usize> = (0..n).collect();
    lines.shuffle(rng);
    lines
        .chunks(3)
        .map(|c| {
            let mut t = [c[0], c[1], c[2]];
            t.sort_unstable();
            let lut = set.members()[rng.gen_range(0..set.len())];
            let g = Gate3::new(t, lut)?;
            AffineGate3::from_gate3(&g).ok_or_else(|| Error::InvalidInput("set is not affine".into()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionSample {
    pub samples: usize,
    pub max: usize,
    pub mean: f64,
    /// Standard error of the mean.
    pub sem: f64,
}

impl ExpansionSample {
    pub fn from_counts(counts: &[usize]) -> Self {
        let k = counts.len().max(1) as f64;
        let mean = counts.iter().sum::<usize>() as f64 / k;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        ExpansionSample {
            samples: counts.len(),
            max: counts.iter().copied().max().unwrap_or(0),
            mean,
            sem: (var / k).sqrt(),
        }
    }
}

/// Offspring of random Toffolis conjugated through one random layer.
pub fn sample_toffoli_expansion<R: Rng + ?Sized>(
    n: usize,
    set: &GateSet,
    samples: usize,
    rng: &mut R,
) -> Result<ExpansionSample> {
    if n < 3 {
        return Err(Error::InvalidInput("a Toffoli needs three lines".into()));
    }
    let mut counts = Vec::with_capacity(samples);
    for _ in 0..samples {
        let l = rand::seq::index::sample(rng, n, 3).into_vec();
        let pol = |rng: &mut R| Polarity::from_negated(rng.gen());
        let g = ControlledGate::toffoli(
            Control { bit: l[0], polarity: pol(rng) },
            Control { bit: l[1], polarity: pol(rng) },
            l[2],
        )?;
        let layer = random_affine_layer(n, set, rng)?;
        counts.push(conjugate_affine_layer(&lift(&g, n)?, &layer).term_count());
    }
    Ok(ExpansionSample::from_counts(&counts))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// How much of the functional oracle to run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    /// Random plaintexts to check; ignored when exhaustive.
    pub samples: usize,
    /// Every joint plaintext state (needs a small register).
    pub exhaustive: bool,
    pub seed: [u8; 32],
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            samples: 256,
            exhaustive: false,
            seed: [0; 32],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChipRow {
    pub index: usize,
    pub kind: SeedKind,
    pub level: usize,
    pub width: usize,
    pub size: usize,
    pub volume: usize,
    /// Size bound, asserted only for NOT-seeded chips.
    pub bound: Option<u64>,
}

impl ChipRow {
    pub fn slack(&self) -> Option<i64> {
        self.bound.map(|b| b as i64 - self.size as i64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleOutcome {
    pub mode: &'static str,
    pub checked: usize,
    pub mismatches: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub registers: usize,
    pub chips: Vec<ChipRow>,
    pub expansion: Vec<usize>,
    /// `ln(mean chips per gate) / ln n`, compared against `nu3`.
    pub expansion_exponent: Option<f64>,
    /// `ln(max NOT chip size) / ln n`, compared against `gamma`.
    pub size_exponent: Option<f64>,
    pub oracle: OracleOutcome,
    pub failures: Vec<String>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Recomputes every chip's metrics, checks them against the bounds and
/// runs the functional oracle. Without `f` the oracle checks that the
/// padding survives `decrypt . run . encrypt`; with `f` it also checks the
/// payload against `f`.
pub fn verify_report(
    ev: &Evaluator,
    keys: &[CipherKey],
    f: Option<&Circuit>,
    budget: &OracleBudget,
) -> Result<BoundReport> {
    if keys.len() != ev.registers() || keys.iter().map(CipherKey::n).sum::<usize>() != ev.n() {
        return Err(Error::InvalidInput(format!(
            "{} key(s) do not match an evaluator of {} lines in {} register(s)",
            keys.len(),
            ev.n(),
            ev.registers()
        )));
    }
    let payload: usize = keys.iter().map(|k| k.layout().n_payload()).sum();
    if let Some(f) = f {
        if f.width() != payload {
            return Err(Error::InvalidInput(format!(
                "circuit width {} does not match the {payload} payload bits",
                f.width()
            )));
        }
    }
    let mut failures = Vec::new();
    let chips: Vec<ChipRow> = ev
        .chips()
        .par_iter()
        .enumerate()
        .map(|(index, c)| {
            let m = c.metrics();
            ChipRow {
                index,
                kind: c.kind(),
                level: c.level(),
                width: m.width,
                size: m.size,
                volume: m.volume,
                bound: (c.kind() == SeedKind::Not).then(|| bmax_bound(c.level() as u32)),
            }
        })
        .collect();
    for r in &chips {
        if r.slack().is_some_and(|s| s < 0) {
            failures.push(format!("chip {} size {} exceeds bound {}", r.index, r.size, r.bound.unwrap()));
        }
        if r.kind == SeedKind::Not && r.width > 3usize.pow(r.level as u32) {
            failures.push(format!("chip {} width {} exceeds 3^{}", r.index, r.width, r.level));
        }
    }
    let expansion = ev.provenance().chips_per_gate.clone();
    let n = ev.n() as f64;
    let expansion_exponent = (!expansion.is_empty() && n > 1.0).then(|| {
        let mean = expansion.iter().sum::<usize>() as f64 / expansion.len() as f64;
        mean.max(1.0).ln() / n.ln()
    });
    let size_exponent = chips
        .iter()
        .filter(|r| r.kind == SeedKind::Not)
        .map(|r| r.size)
        .max()
        .filter(|_| n > 1.0)
        .map(|s| (s.max(1) as f64).ln() / n.ln());

    let oracle = run_oracle(ev, keys, f, budget, &mut failures)?;
    Ok(BoundReport {
        n: ev.n(),
        registers: ev.registers(),
        chips,
        expansion,
        expansion_exponent,
        size_exponent,
        oracle,
        failures,
    })
}

fn run_oracle(
    ev: &Evaluator,
    keys: &[CipherKey],
    f: Option<&Circuit>,
    budget: &OracleBudget,
    failures: &mut Vec<String>,
) -> Result<OracleOutcome> {
    let payload: usize = keys.iter().map(|k| k.layout().n_payload()).sum();
    let pads: Vec<usize> = keys.iter().map(|k| k.layout().n_g()).collect();
    // each case is a joint payload plus one padding per register
    let cases: Vec<(Bits, Vec<Bits>)> = if budget.exhaustive {
        if ev.n() > ORACLE_LIMIT {
            return Err(Error::OracleLimit {
                width: ev.n(),
                limit: ORACLE_LIMIT,
            });
        }
        (0..1u64 << ev.n())
            .map(|x| {
                let all = Bits::from_u64(x, ev.n());
                let mut at = payload;
                let p = pads
                    .iter()
                    .map(|&g| {
                        let b = all.slice(at, g);
                        at += g;
                        b
                    })
                    .collect();
                (all.slice(0, payload), p)
            })
            .collect()
    } else {
        let mut rng = ChaCha20Rng::from_seed(budget.seed);
        (0..budget.samples)
            .map(|_| {
                let x = Bits::random(payload, &mut rng);
                let p = pads.iter().map(|&g| Bits::random(g, &mut rng)).collect();
                (x, p)
            })
            .collect()
    };
    let cts: Vec<Bits> = cases
        .par_iter()
        .map(|(x, p)| encrypt_joint(keys, x, p))
        .collect::<Result<_>>()?;
    let outs = run_batch(ev, &cts)?;
    let mut mismatches = 0;
    for ((x, p), out) in cases.iter().zip(&outs) {
        let (y, q) = decrypt_joint(keys, out)?;
        let want = match f {
            Some(f) => f.apply(x)?,
            None => y.clone(),
        };
        if &q != p || y != want {
            if mismatches == 0 {
                failures.push(format!("oracle mismatch on payload {x} padding {}", p.iter().map(Bits::to_string).collect::<Vec<_>>().join("/")));
            }
            mismatches += 1;
        }
    }
    if mismatches > 0 {
        failures.push(format!("oracle {mismatches} of {} cases wrong", cases.len()));
    }
    Ok(OracleOutcome {
        mode: if budget.exhaustive { "exhaustive" } else { "sampled" },
        checked: cases.len(),
        mismatches,
    })
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Stable text form, one record per line.
pub fn format_report(r: &BoundReport) -> String {
    let mut s = String::new();
    writeln!(s, "eoc-report 1").unwrap();
    writeln!(s, "status {}", if r.passed() { "pass" } else { "fail" }).unwrap();
    writeln!(s, "n {}", r.n).unwrap();
    writeln!(s, "registers {}", r.registers).unwrap();
    writeln!(s, "chips {}", r.chips.len()).unwrap();
    writeln!(
        s,
        "oracle {} checked {} mismatches {}",
        r.oracle.mode, r.oracle.checked, r.oracle.mismatches
    )
    .unwrap();
    let exp: Vec<String> = r.expansion.iter().map(usize::to_string).collect();
    writeln!(s, "expansion {}", exp.join(" ")).unwrap();
    writeln!(
        s,
        "fit expansion {} nu3 {:.4} mu3 {:.4}",
        opt(r.expansion_exponent.map(|x| format!("{x:.4}"))),
        nu3(),
        mu3()
    )
    .unwrap();
    writeln!(
        s,
        "fit size {} gamma {:.4}",
        opt(r.size_exponent.map(|x| format!("{x:.4}"))),
        gamma()
    )
    .unwrap();
    for c in &r.chips {
        writeln!(
            s,
            "chip {} kind {} level {} width {} size {} volume {} bound {} slack {}",
            c.index,
            c.kind,
            c.level,
            c.width,
            c.size,
            c.volume,
            opt(c.bound),
            opt(c.slack())
        )
        .unwrap();
    }
    for f in &r.failures {
        writeln!(s, "failure {f}").unwrap();
    }
    s
}
