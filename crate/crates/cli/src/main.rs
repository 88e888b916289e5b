//! `eoc`: key generation, encryption, evaluator compilation and checks.
//!
//! Exit codes: 0 success, 1 invalid input or I/O failure, 2 a verification
//! that ran and failed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use eoc::analysis::{format_report, verify_report, OracleBudget};
use eoc::chip::{PassThrough, SeedKind};
use eoc::cipher::{
    avalanche_probe, decrypt, encrypt_with_padding, format_key, keygen, os_seed, parse_key,
    CipherKey, KeygenOptions, RegisterLayout,
};
use eoc::evaluator::{
    compile, entropy_injected, format_evaluator, kind_counts, parse_evaluator, run, CompileOptions,
    Evaluator, RegisterMode,
};
use eoc::gate::{parse_circuit, Circuit};
use eoc::gateset::{
    column_weight_counts, enumerate_inflationary, enumerate_super_nonlinear, topology_histogram,
    Predicate, SUPER_NONLINEAR_TARGET,
};
use eoc::rewrite::{factorize, Split};
use eoc::textio::{format_bits_file, format_seed, parse_bits_file, parse_seed};
use eoc::{Bits, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Computing on encrypted bit registers with conjugated reversible circuits.
///
/// File formats: keys (`eoc-key 1`), circuits (`n`, gate lines), bit files
/// (`bits N` + hex, LSB first), evaluators (`eoc-evaluator 1`) and reports
/// (`eoc-report 1`). Seeds are 64 hex digits; when omitted they are drawn
/// from the OS and echoed.
#[derive(Parser, Debug)]
#[command(name = "eoc", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Draw a cipher key.
    Keygen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        nd: usize,
        #[arg(long)]
        na: usize,
        #[arg(long)]
        seed: Option<String>,
        /// Linear depth override (experimental; default ceil(log2 n)).
        #[arg(long)]
        linear_layers: Option<usize>,
        /// Independent line permutation for the nonlinear stage.
        #[arg(long)]
        separate_permutations: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Encrypt a data file (ancilla defaults to zeros, padding is random).
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        ancilla: Option<PathBuf>,
        /// Seed for the padding.
        #[arg(long)]
        seed: Option<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Decrypt a ciphertext and print its data section.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        /// Also write the ancilla section here.
        #[arg(long)]
        ancilla_out: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compile a circuit into an evaluator. Two keys select two-register mode.
    Compile {
        #[arg(long = "key", required = true)]
        keys: Vec<PathBuf>,
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        no_random: bool,
        #[arg(long)]
        two_register: bool,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value_t = PassMode::Implicit)]
        pass_through: PassMode,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run an evaluator on ciphertexts, one `--ct` per register.
    Run {
        #[arg(long)]
        evaluator: PathBuf,
        #[arg(long = "ct", required = true)]
        cts: Vec<PathBuf>,
        /// One output per `--ct`; stdout if omitted with a single register.
        #[arg(short, long = "out")]
        outs: Vec<PathBuf>,
    },
    /// Check chip bounds and run the functional oracle; exits 2 on failure.
    Verify {
        #[arg(long)]
        evaluator: PathBuf,
        #[arg(long = "key", required = true)]
        keys: Vec<PathBuf>,
        /// Check payloads against this circuit too.
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the built-in gate sets.
    Gatesets {
        #[arg(long, value_enum, default_value_t = PredicateArg::All)]
        predicate: PredicateArg,
    },
    /// Summarize an evaluator.
    Stats {
        #[arg(long)]
        evaluator: PathBuf,
    },
    /// Avalanche matrix of a key.
    Sac {
        #[arg(long)]
        key: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<String>,
        /// Print the full matrix.
        #[arg(long)]
        matrix: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PassMode {
    Implicit,
    Explicit,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PredicateArg {
    Strict,
    Coordinatewise,
    All,
}

enum Failure {
    Invalid(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

type CmdResult = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(Error::InvalidInput(msg.into()))
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn seed_arg(seed: Option<&str>) -> Result<[u8; 32], Error> {
    match seed {
        Some(s) => parse_seed(0, s).map_err(|_| Error::InvalidInput(format!("seed must be 64 hex digits, got {s:?}"))),
        None => {
            let s = os_seed();
            eprintln!("seed {}", format_seed(&s));
            Ok(s)
        }
    }
}

fn load_key(p: &Path) -> Result<CipherKey, Error> {
    parse_key(&read(p)?)
}

fn load_bits(p: &Path) -> Result<Bits, Error> {
    parse_bits_file(&read(p)?)
}

fn bits_with_seed(bits: &Bits, seed: &[u8; 32]) -> String {
    format!("# seed {}\n{}", format_seed(seed), format_bits_file(bits))
}

/// Replaces gates with three or more controls by Toffolis, borrowing any
/// other line of the circuit as a dirty ancilla.
fn lower_wide_gates(c: &Circuit) -> Result<Circuit, Error> {
    let lines: Vec<usize> = (0..c.width()).collect();
    let mut out = Circuit::new(c.width());
    out.set_registers(c.registers());
    for g in c.gates() {
        match g.as_controlled() {
            Some(cg) if cg.controls().len() > 2 => {
                for h in factorize(cg, 2, &lines, Split::Leading)? {
                    out.push(h)?;
                }
            }
            _ => out.push(g.clone())?,
        }
    }
    Ok(out)
}

fn cmd_keygen(
    n: usize,
    nd: usize,
    na: usize,
    seed: Option<&str>,
    linear_layers: Option<usize>,
    separate_permutations: bool,
    out: Option<&Path>,
) -> CmdResult {
    let layout = RegisterLayout::new(n, nd, na)?;
    let seed = seed_arg(seed)?;
    let opts = KeygenOptions {
        linear_layers,
        separate_permutations,
    };
    let nl = eoc::gateset::default_super_nonlinear()?;
    let key = keygen(layout, &enumerate_inflationary(), &nl, seed, &opts)?;
    emit(out, &format_key(&key))?;
    Ok(())
}

fn cmd_encrypt(key: &Path, data: &Path, ancilla: Option<&Path>, seed: Option<&str>, out: Option<&Path>) -> CmdResult {
    let k = load_key(key)?;
    let d = load_bits(data)?;
    let a = match ancilla {
        Some(p) => load_bits(p)?,
        None => Bits::zeros(k.layout().n_a()),
    };
    let seed = seed_arg(seed)?;
    let mut rng = ChaCha20Rng::from_seed(seed);
    let pad = Bits::random(k.layout().n_g(), &mut rng);
    let ct = encrypt_with_padding(&k, &d, &a, &pad)?;
    emit(out, &bits_with_seed(&ct.bits, &seed))?;
    Ok(())
}

fn cmd_decrypt(key: &Path, ct: &Path, ancilla_out: Option<&Path>, out: Option<&Path>) -> CmdResult {
    let k = load_key(key)?;
    let p = decrypt(&k, &load_bits(ct)?)?;
    if let Some(a) = ancilla_out {
        emit(Some(a), &format_bits_file(&p.ancilla))?;
    }
    emit(out, &format_bits_file(&p.data))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compile(
    keys: &[PathBuf],
    circuit: &Path,
    no_random: bool,
    two_register: bool,
    seed: Option<&str>,
    jobs: Option<usize>,
    pass: PassMode,
    out: Option<&Path>,
) -> CmdResult {
    let keys: Vec<CipherKey> = keys.iter().map(|p| load_key(p)).collect::<Result<_, _>>()?;
    let f = lower_wide_gates(&parse_circuit(&read(circuit)?)?)?;
    let wants_two = two_register || f.registers() == Some(2);
    let mode = match (keys.len(), wants_two) {
        (1, false) => RegisterMode::Single,
        (2, _) => RegisterMode::Two,
        (1, true) => return Err(invalid("two-register mode needs two --key files")),
        (k, _) => return Err(invalid(format!("expected one or two --key files, got {k}"))),
    };
    let opts = CompileOptions {
        mode,
        randomize: !no_random,
        seed: seed_arg(seed)?,
        jobs,
    };
    let ev = compile(&f, &keys, &opts)?;
    let pass = match pass {
        PassMode::Implicit => PassThrough::Implicit,
        PassMode::Explicit => PassThrough::Explicit,
    };
    emit(out, &format_evaluator(&ev, pass))?;
    Ok(())
}

fn load_evaluator(p: &Path) -> Result<Evaluator, Error> {
    parse_evaluator(&read(p)?)
}

fn cmd_run(evaluator: &Path, cts: &[PathBuf], outs: &[PathBuf]) -> CmdResult {
    let ev = load_evaluator(evaluator)?;
    if cts.len() != ev.registers() {
        return Err(invalid(format!(
            "evaluator has {} register(s), got {} --ct file(s)",
            ev.registers(),
            cts.len()
        )));
    }
    if !(outs.is_empty() && cts.len() == 1) && outs.len() != cts.len() {
        return Err(invalid("give one --out per --ct"));
    }
    let mut joint = Bits::zeros(0);
    for p in cts {
        joint = joint.concat(&load_bits(p)?);
    }
    let y = run(&ev, &joint)?;
    let per = ev.n() / ev.registers();
    if outs.is_empty() {
        emit(None, &format_bits_file(&y))?;
    }
    for (r, p) in outs.iter().enumerate() {
        emit(Some(p), &format_bits_file(&y.slice(r * per, per)))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    evaluator: &Path,
    keys: &[PathBuf],
    circuit: Option<&Path>,
    exhaustive: bool,
    samples: usize,
    seed: Option<&str>,
    jobs: Option<usize>,
    out: Option<&Path>,
) -> CmdResult {
    let ev = load_evaluator(evaluator)?;
    let keys: Vec<CipherKey> = keys.iter().map(|p| load_key(p)).collect::<Result<_, _>>()?;
    let f = match circuit {
        Some(p) => Some(lower_wide_gates(&parse_circuit(&read(p)?)?)?),
        None => None,
    };
    let budget = OracleBudget {
        samples,
        exhaustive,
        seed: seed_arg(seed)?,
    };
    let work = || verify_report(&ev, &keys, f.as_ref(), &budget);
    let report = match jobs {
        Some(j) => rayon_pool(j)?.install(work)?,
        None => work()?,
    };
    let mut text = format!("# seed {}\n", format_seed(&budget.seed));
    text.push_str(&format_report(&report));
    emit(out, &text)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verify(format!("{} problem(s), first: {}", report.failures.len(), report.failures[0])))
    }
}

fn rayon_pool(jobs: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))
}

fn cmd_gatesets(predicate: PredicateArg) -> CmdResult {
    let lin = enumerate_inflationary();
    let h = topology_histogram(&lin)?;
    let (w2, w3) = column_weight_counts(&lin);
    let mut s = String::new();
    writeln!(s, "inflationary: {}", lin.len()).unwrap();
    writeln!(s, "topology: A {} B {} C {} D {}", h[0], h[1], h[2], h[3]).unwrap();
    writeln!(s, "column weights: 2 -> {w2}, 3 -> {w3}").unwrap();
    let preds: &[Predicate] = match predicate {
        PredicateArg::Strict => &[Predicate::Strict],
        PredicateArg::Coordinatewise => &[Predicate::Coordinatewise],
        PredicateArg::All => &[Predicate::Strict, Predicate::Coordinatewise],
    };
    for &p in preds {
        let n = enumerate_super_nonlinear(p).len();
        let tag = if n == SUPER_NONLINEAR_TARGET { "match" } else { "differs" };
        writeln!(s, "super-nonlinear/{}: {n} (target {SUPER_NONLINEAR_TARGET}, {tag})", p.name()).unwrap();
    }
    emit(None, &s)?;
    Ok(())
}

fn cmd_stats(evaluator: &Path) -> CmdResult {
    let ev = load_evaluator(evaluator)?;
    let p = ev.provenance();
    let mut s = String::new();
    writeln!(s, "n {}", ev.n()).unwrap();
    writeln!(s, "registers {}", ev.registers()).unwrap();
    writeln!(s, "chips {}", ev.chips().len()).unwrap();
    writeln!(s, "seed-gates {}", p.chips_per_gate.len()).unwrap();
    for (kind, count) in kind_counts(&ev) {
        let ms: Vec<_> = ev.chips().iter().filter(|c| c.kind() == kind).map(|c| c.metrics()).collect();
        let max_size = ms.iter().map(|m| m.size).max().unwrap_or(0);
        let max_width = ms.iter().map(|m| m.width).max().unwrap_or(0);
        writeln!(s, "kind {kind} chips {count} max-width {max_width} max-size {max_size}").unwrap();
    }
    let volume: usize = ev.chips().iter().map(|c| c.metrics().volume).sum();
    writeln!(s, "volume {volume}").unwrap();
    let acc = entropy_injected(&ev);
    writeln!(s, "random-bits {} lower-bound {:.1}", acc.drawn, acc.lower_bound).unwrap();
    writeln!(s, "random-seed {}", format_seed(&p.random_seed)).unwrap();
    let not_chips = ev.chips().iter().filter(|c| c.kind() == SeedKind::Not).count();
    writeln!(s, "not-chips {not_chips}").unwrap();
    emit(None, &s)?;
    Ok(())
}

fn cmd_sac(key: &Path, samples: usize, seed: Option<&str>, matrix: bool) -> CmdResult {
    let k = load_key(key)?;
    let seed = seed_arg(seed)?;
    let mut rng = ChaCha20Rng::from_seed(seed);
    let m = avalanche_probe(&k, samples, &mut rng)?;
    let sigma = (0.25 / samples as f64).sqrt();
    let flat: Vec<f64> = m.iter().flatten().copied().collect();
    let mean = flat.iter().sum::<f64>() / flat.len() as f64;
    let worst = flat.iter().map(|p| (p - 0.5).abs()).fold(0.0, f64::max);
    let outside = flat.iter().filter(|p| (*p - 0.5).abs() > 5.0 * sigma).count();
    let mut s = String::new();
    writeln!(s, "seed {}", format_seed(&seed)).unwrap();
    writeln!(s, "n {} samples {samples}", k.n()).unwrap();
    writeln!(s, "mean {mean:.4} worst-deviation {worst:.4} sigma {sigma:.4} outside-5-sigma {outside}/{}", flat.len()).unwrap();
    if matrix {
        for row in &m {
            let r: Vec<String> = row.iter().map(|p| format!("{p:.3}")).collect();
            writeln!(s, "{}", r.join(" ")).unwrap();
        }
    }
    emit(None, &s)?;
    Ok(())
}

fn dispatch(cmd: Cmd) -> CmdResult {
    match cmd {
        Cmd::Keygen { n, nd, na, seed, linear_layers, separate_permutations, out } => {
            cmd_keygen(n, nd, na, seed.as_deref(), linear_layers, separate_permutations, out.as_deref())
        }
        Cmd::Encrypt { key, data, ancilla, seed, out } => {
            cmd_encrypt(&key, &data, ancilla.as_deref(), seed.as_deref(), out.as_deref())
        }
        Cmd::Decrypt { key, ct, ancilla_out, out } => cmd_decrypt(&key, &ct, ancilla_out.as_deref(), out.as_deref()),
        Cmd::Compile { keys, circuit, no_random, two_register, seed, jobs, pass_through, out } => cmd_compile(
            &keys,
            &circuit,
            no_random,
            two_register,
            seed.as_deref(),
            jobs,
            pass_through,
            out.as_deref(),
        ),
        Cmd::Run { evaluator, cts, outs } => cmd_run(&evaluator, &cts, &outs),
        Cmd::Verify { evaluator, keys, circuit, exhaustive, samples, seed, jobs, out } => cmd_verify(
            &evaluator,
            &keys,
            circuit.as_deref(),
            exhaustive,
            samples,
            seed.as_deref(),
            jobs,
            out.as_deref(),
        ),
        Cmd::Gatesets { predicate } => cmd_gatesets(predicate),
        Cmd::Stats { evaluator } => cmd_stats(&evaluator),
        Cmd::Sac { key, samples, seed, matrix } => cmd_sac(&key, samples, seed.as_deref(), matrix),
    }
}

fn category(e: &Error) -> &'static str {
    match e {
        Error::Io(_) => "io",
        Error::Parse { .. } => "parse",
        Error::Internal(_) => "internal",
        _ => "invalid",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error[{}]: {e}", category(&e));
            ExitCode::from(1)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("verify failed: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use eoc::gate::truth_table;

    #[test]
    fn lowering_keeps_the_function() {
        let c = parse_circuit("n 6\nMCT c=+0 c=-1 c=+2 c=+3 t=5\nTOFFOLI c=+0 c=+1 t=4\n").unwrap();
        let low = lower_wide_gates(&c).unwrap();
        assert!(low.gates().iter().all(|g| g.as_controlled().is_some_and(|h| h.controls().len() <= 2)));
        assert_eq!(truth_table(&low).unwrap(), truth_table(&c).unwrap());
    }
}
