use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use extprob::detector::{self, ColorModel};
use extprob::extmeasure::{self, LhvMode, SignedLhvModel, SINGLET_SETTINGS};
use extprob::io::{self, AnyOperator, AnyVector, ChshDoc, JointDoc, MeasureDoc, Order};
use extprob::spectral::{left_eigen_real, SpectralRing};
use extprob::verify;
use extprob::{CliffordElement, Error, ModuleVector, Quaternion, RingKind, RingOperator, Tolerances};

/// Quaternion and Clifford quantum mechanics with extended probabilities.
#[derive(Parser, Debug)]
#[command(name = "extprob", version)]
struct Cli {
    /// Master seed for randomized commands.
    #[arg(long, global = true, env = "EXTPROB_SEED", default_value_t = 0)]
    seed: u64,

    /// Residual tolerance override (positive).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Write the result here (atomically) instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; csv is available for chsh and detector-sim only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ChshMode {
    Raw,
    Renorm,
    Quantum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Ab,
    Ba,
    Sym,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the ring and module identities; exit 1 if any residual exceeds the tolerance.
    VerifyAlgebra {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Rebuild the commuting but incompatible pair A = diag(λ, μ), B = diag(γ0, -γ0).
    Counterexample {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        mu: f64,
    },
    /// Decide physicality of an operator and print its real orthonormal eigenbasis.
    Spectral {
        #[arg(long)]
        operator: PathBuf,
    },
    /// Extended-probability distribution of an observable in a state.
    Measure {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        observable: PathBuf,
    },
    /// Joint statistics of two commuting observables measured in sequence.
    Joint {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = OrderArg::Ab)]
        order: OrderArg,
    },
    /// CHSH values of signed hidden-variable models or of a two-party state.
    Chsh {
        #[arg(long, value_enum)]
        mode: ChshMode,
        /// Number of random signed models (raw and renorm modes).
        #[arg(long)]
        scan: Option<usize>,
        /// Signed model file {weights, a_outcomes, b_outcomes} (raw and renorm modes).
        #[arg(long, conflicts_with = "scan")]
        model: Option<PathBuf>,
        /// Rank-4 state file (quantum mode); defaults to the singlet.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Ring of the default singlet (quantum mode).
        #[arg(long, value_enum, default_value_t = RingArg::Quaternion)]
        ring: RingArg,
        /// Alice's angles a,a' (quantum mode).
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        alice: Option<Vec<f64>>,
        /// Bob's angles b,b' (quantum mode).
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        bob: Option<Vec<f64>>,
    },
    /// Monte Carlo of a detector with integer colors, or its closed form.
    DetectorSim {
        /// Model file {colors: [{n, p}, ...]}.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        shots: u64,
        /// Parallel shards; the result does not depend on this.
        #[arg(long)]
        shards: Option<usize>,
        /// Print the closed-form expectations instead of simulating.
        #[arg(long)]
        exact: bool,
    },
    /// Count compatible and incompatible commuting Clifford pairs over random frames.
    ConjectureScan {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RingArg {
    Quaternion,
    Clifford,
}

/// Failure classes; each has its own exit code.
#[derive(Debug)]
enum Failure {
    /// Domain error or failed check: exit 1.
    Domain { kind: String, reason: String },
    /// Malformed or missing input: exit 2.
    Input { kind: String, reason: String },
    /// The output could not be written: exit 3.
    Output { reason: String },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain { .. } => 1,
            Failure::Input { .. } => 2,
            Failure::Output { .. } => 3,
        }
    }

    fn input(reason: impl Into<String>) -> Self {
        Failure::Input {
            kind: "InvalidInput".into(),
            reason: reason.into(),
        }
    }

    fn check(reason: impl Into<String>) -> Self {
        Failure::Domain {
            kind: "CheckFailed".into(),
            reason: reason.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = e.kind().to_string();
        let reason = e.to_string();
        match e {
            Error::InvalidInput(_) | Error::RingMismatch { .. } | Error::RankMismatch { .. } => {
                Failure::Input { kind, reason }
            }
            _ => Failure::Domain { kind, reason },
        }
    }
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    status: &'static str,
    exit_code: u8,
    kind: &'a str,
    reason: &'a str,
}

/// A finished command: the document to emit, a summary line, and an
/// optional failure to report after the document is written.
struct Outcome {
    body: String,
    summary: String,
    failure: Option<Failure>,
}

impl Outcome {
    fn ok(body: String, summary: String) -> Self {
        Outcome {
            body,
            summary,
            failure: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| {
        emit(&cli, &outcome)?;
        match outcome.failure {
            Some(f) => Err(f),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            let (kind, reason) = match &f {
                Failure::Domain { kind, reason } | Failure::Input { kind, reason } => (kind.as_str(), reason.as_str()),
                Failure::Output { reason } => ("OutputError", reason.as_str()),
            };
            let doc = ErrorDoc {
                status: "error",
                exit_code: code,
                kind,
                reason,
            };
            eprintln!("{}", serde_json::to_string(&doc).expect("error document serializes"));
            ExitCode::from(code)
        }
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => {
            write_atomic(path, &outcome.body).map_err(|e| Failure::Output {
                reason: format!("cannot write {}: {e}", path.display()),
            })?;
            println!("{} -> {}", outcome.summary, path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Output {
                    reason: format!("cannot write standard output: {e}"),
                })?;
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(())
}

fn write_atomic(path: &Path, body: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Failure::Input {
            kind: "InputNotFound".into(),
            reason: format!("input not found: {}", path.display()),
        },
        _ => Failure::Input {
            kind: "InputUnreadable".into(),
            reason: format!("cannot read {}: {e}", path.display()),
        },
    })
}

fn parse_input<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_input(path)?;
    io::from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = io::to_json(value);
    s.push('\n');
    s
}

fn tolerances(cli: &Cli) -> Result<Tolerances, Failure> {
    match cli.tol {
        None => Ok(Tolerances::default()),
        Some(t) if t > 0.0 && t.is_finite() => Ok(Tolerances::default().with_residual(t)),
        Some(t) => Err(Failure::input(format!("--tol must be positive, got {t}"))),
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Chsh { .. } | Command::DetectorSim { .. }) {
        return Err(Failure::input("csv output is only available for chsh and detector-sim"));
    }
    let tol = tolerances(cli)?;
    match &cli.command {
        Command::VerifyAlgebra { inject_fault } => {
            let t = cli.tol.unwrap_or(tol.algebra);
            let report = verify::algebra_suite(t, cli.seed, *inject_fault);
            let failed = report.failed();
            let summary = format!(
                "verify-algebra: {}/{} identities within {t:e}",
                report.checks.len() - failed.len(),
                report.checks.len()
            );
            let failure = (!failed.is_empty()).then(|| Failure::check(format!("failed: {}", failed.join("; "))));
            Ok(Outcome {
                body: json(&report),
                summary,
                failure,
            })
        }
        Command::Counterexample { lambda, mu } => {
            let report = verify::counterexample(*lambda, *mu, &tol);
            let failed: Vec<&str> = report.facts.iter().filter(|f| !f.holds).map(|f| f.name.as_str()).collect();
            let summary = format!(
                "counterexample: λ = {lambda}, μ = {mu}, compatible = {}, {}/{} facts hold",
                report.compatible,
                report.facts.len() - failed.len(),
                report.facts.len()
            );
            let failure = (!failed.is_empty()).then(|| Failure::check(format!("failed: {}", failed.join("; "))));
            Ok(Outcome {
                body: json(&report),
                summary,
                failure,
            })
        }
        Command::Spectral { operator } => {
            let op = AnyOperator::parse(&read_input(operator)?).map_err(|e| located(operator, e))?;
            match op {
                AnyOperator::Quaternion(a) => spectral_outcome(&a, &tol),
                AnyOperator::Clifford(a) => spectral_outcome(&a, &tol),
            }
        }
        Command::Measure { state, observable } => {
            let psi = AnyVector::parse(&read_input(state)?).map_err(|e| located(state, e))?;
            let op = AnyOperator::parse(&read_input(observable)?).map_err(|e| located(observable, e))?;
            match (psi, op) {
                (AnyVector::Quaternion(v), AnyOperator::Quaternion(a)) => measure_outcome(&v, &a, &tol),
                (AnyVector::Clifford(v), AnyOperator::Clifford(a)) => measure_outcome(&v, &a, &tol),
                (v, a) => Err(ring_mismatch(v.ring(), a.ring())),
            }
        }
        Command::Joint { state, a, b, order } => {
            let psi = AnyVector::parse(&read_input(state)?).map_err(|e| located(state, e))?;
            let oa = AnyOperator::parse(&read_input(a)?).map_err(|e| located(a, e))?;
            let ob = AnyOperator::parse(&read_input(b)?).map_err(|e| located(b, e))?;
            let order = match order {
                OrderArg::Ab => Order::Ab,
                OrderArg::Ba => Order::Ba,
                OrderArg::Sym => Order::Sym,
            };
            match (psi, oa, ob) {
                (AnyVector::Quaternion(v), AnyOperator::Quaternion(x), AnyOperator::Quaternion(y)) => {
                    joint_outcome(&v, &x, &y, order, &tol)
                }
                (AnyVector::Clifford(v), AnyOperator::Clifford(x), AnyOperator::Clifford(y)) => {
                    joint_outcome(&v, &x, &y, order, &tol)
                }
                (v, x, y) => {
                    let other = if x.ring() != v.ring() { x.ring() } else { y.ring() };
                    Err(ring_mismatch(v.ring(), other))
                }
            }
        }
        Command::Chsh {
            mode,
            scan,
            model,
            state,
            ring,
            alice,
            bob,
        } => chsh_outcome(cli, *mode, *scan, model.as_deref(), state.as_deref(), *ring, alice, bob, &tol),
        Command::DetectorSim {
            model,
            shots,
            shards,
            exact,
        } => detector_outcome(cli, model, *shots, *shards, *exact),
        Command::ConjectureScan { samples } => {
            let report = extprob::spectral::conjecture_scan(*samples, cli.seed, &tol);
            let summary = format!(
                "conjecture-scan: {} samples, {} commuting physical pairs, {} compatible, {} incompatible",
                report.samples, report.commuting, report.compatible, report.incompatible
            );
            Ok(Outcome::ok(json(&report), summary))
        }
    }
}

fn located(path: &Path, e: Error) -> Failure {
    match e {
        Error::InvalidInput(msg) => Failure::input(format!("{}: {msg}", path.display())),
        other => other.into(),
    }
}

fn ring_mismatch(left: RingKind, right: RingKind) -> Failure {
    Error::RingMismatch {
        left: left.to_string(),
        right: right.to_string(),
    }
    .into()
}

fn spectral_outcome<R: SpectralRing>(a: &RingOperator<R>, tol: &Tolerances) -> Result<Outcome, Failure> {
    let doc = io::spectral_doc(a, tol)?;
    let summary = if doc.physical {
        format!("spectral: physical, eigenvalues {:?}", doc.eigenvalues)
    } else {
        format!("spectral: not physical ({})", doc.diagnostics.reason.as_deref().unwrap_or("unknown"))
    };
    let failure = (!doc.physical).then(|| Failure::Domain {
        kind: "NotPhysical".into(),
        reason: doc.diagnostics.reason.clone().unwrap_or_default(),
    });
    Ok(Outcome {
        body: json(&doc),
        summary,
        failure,
    })
}

fn measure_outcome<R: SpectralRing>(
    psi: &ModuleVector<R>,
    a: &RingOperator<R>,
    tol: &Tolerances,
) -> Result<Outcome, Failure> {
    if psi.rank() != a.rank() {
        return Err(Error::RankMismatch {
            expected: a.rank(),
            found: psi.rank(),
        }
        .into());
    }
    let spec = left_eigen_real(a, tol)?;
    let distribution = extmeasure::measure(psi, &spec)?;
    let summary = format!(
        "measure: {} outcomes, raw total {:.6}",
        distribution.entries.len(),
        distribution.total()
    );
    Ok(Outcome::ok(
        json(&MeasureDoc {
            ring: R::KIND,
            distribution,
        }),
        summary,
    ))
}

fn joint_outcome<R: SpectralRing>(
    psi: &ModuleVector<R>,
    a: &RingOperator<R>,
    b: &RingOperator<R>,
    order: Order,
    tol: &Tolerances,
) -> Result<Outcome, Failure> {
    for op in [a, b] {
        if psi.rank() != op.rank() {
            return Err(Error::RankMismatch {
                expected: op.rank(),
                found: psi.rank(),
            }
            .into());
        }
    }
    let sa = left_eigen_real(a, tol)?;
    let sb = left_eigen_real(b, tol)?;
    let table = match order {
        Order::Ab => extmeasure::joint_table(psi, &sa, &sb, tol)?,
        Order::Ba => extmeasure::joint_table(psi, &sb, &sa, tol)?.transpose(),
        Order::Sym => extmeasure::symmetrized_table(psi, &sa, &sb, tol)?,
    };
    let doc = JointDoc {
        ring: R::KIND,
        order,
        a_marginal: table.first_marginal(),
        b_marginal: table.second_marginal(),
        a_values: table.first_values,
        b_values: table.second_values,
        probabilities: table.probabilities,
    };
    let summary = format!(
        "joint: {}x{} table, order {:?}",
        doc.a_values.len(),
        doc.b_values.len(),
        order
    );
    Ok(Outcome::ok(json(&doc), summary))
}

fn angles(given: &Option<Vec<f64>>, default: [f64; 2]) -> [f64; 2] {
    match given {
        Some(v) => [v[0], v[1]],
        None => default,
    }
}

#[allow(clippy::too_many_arguments)]
fn chsh_outcome(
    cli: &Cli,
    mode: ChshMode,
    scan: Option<usize>,
    model: Option<&Path>,
    state: Option<&Path>,
    ring: RingArg,
    alice: &Option<Vec<f64>>,
    bob: &Option<Vec<f64>>,
    tol: &Tolerances,
) -> Result<Outcome, Failure> {
    let (values, seed, label) = match mode {
        ChshMode::Raw | ChshMode::Renorm => {
            if state.is_some() || alice.is_some() || bob.is_some() {
                return Err(Failure::input("--state, --alice and --bob apply to --mode quantum only"));
            }
            let lhv = if mode == ChshMode::Raw {
                LhvMode::Raw
            } else {
                LhvMode::Renormalized
            };
            let label = if mode == ChshMode::Raw { "raw" } else { "renorm" };
            match (scan, model) {
                (Some(n), _) => (extmeasure::chsh_scan(n, cli.seed, lhv)?, Some(cli.seed), label),
                (None, Some(path)) => {
                    let m: SignedLhvModel = parse_input(path)?;
                    (vec![extmeasure::chsh_signed_lhv(&m, lhv)?], None, label)
                }
                (None, None) => (
                    vec![extmeasure::chsh_signed_lhv(&SignedLhvModel::witness(), lhv)?],
                    None,
                    label,
                ),
            }
        }
        ChshMode::Quantum => {
            if scan.is_some() || model.is_some() {
                return Err(Failure::input("--scan and --model apply to --mode raw and renorm only"));
            }
            let a = angles(alice, SINGLET_SETTINGS.0);
            let b = angles(bob, SINGLET_SETTINGS.1);
            let s = match state {
                Some(path) => match AnyVector::parse(&read_input(path)?).map_err(|e| located(path, e))? {
                    AnyVector::Quaternion(v) => extmeasure::two_party_chsh(&v, a, b, tol)?,
                    AnyVector::Clifford(v) => extmeasure::two_party_chsh(&v, a, b, tol)?,
                },
                None => match ring {
                    RingArg::Quaternion => extmeasure::singlet_chsh::<Quaternion>(a, b, tol)?,
                    RingArg::Clifford => extmeasure::singlet_chsh::<CliffordElement>(a, b, tol)?,
                },
            };
            (vec![s], None, "quantum")
        }
    };
    let max_abs = values.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let summary = format!("chsh: mode {label}, {} value(s), max |S| = {max_abs}", values.len());
    let body = match cli.format {
        Format::Json => json(&ChshDoc {
            mode: label.into(),
            seed,
            values,
            max_abs,
        }),
        Format::Csv => {
            let mut s = String::from("index,s\n");
            for (k, v) in values.iter().enumerate() {
                s.push_str(&format!("{k},{v}\n"));
            }
            s
        }
    };
    Ok(Outcome::ok(body, summary))
}

fn detector_outcome(
    cli: &Cli,
    path: &Path,
    shots: u64,
    shards: Option<usize>,
    exact: bool,
) -> Result<Outcome, Failure> {
    let model: ColorModel = parse_input(path)?;
    model.validate()?;
    if exact {
        let e = detector::exact_expectations(&model)?;
        let summary = format!("detector-sim: exact P_a = {}, 1 - P_0 = {}", e.p_a, e.coarse);
        let body = match cli.format {
            Format::Json => json(&e),
            Format::Csv => {
                let mut s = String::from("n,p\n");
                for c in &e.p_n {
                    s.push_str(&format!("{},{}\n", c.n, c.p));
                }
                s
            }
        };
        return Ok(Outcome::ok(body, summary));
    }
    if shots == 0 {
        return Err(Failure::input("--shots must be at least 1"));
    }
    let run = match shards {
        Some(0) => return Err(Failure::input("--shards must be at least 1")),
        Some(k) => detector::simulate_sharded(&model, shots, cli.seed, k)?,
        None => detector::simulate(&model, shots, cli.seed)?,
    };
    let summary = format!(
        "detector-sim: {} shots, P_a = {}, 1 - P_0 = {}, mismatch = {}",
        run.shots, run.p_a, run.coarse, run.mismatch
    );
    let body = match cli.format {
        Format::Json => json(&run),
        Format::Csv => {
            let mut s = String::from("n,count,p\n");
            for c in &run.counts {
                s.push_str(&format!("{},{},{}\n", c.n, c.count, c.p));
            }
            s
        }
    };
    Ok(Outcome::ok(body, summary))
}
