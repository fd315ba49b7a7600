//! `hsl`: seeded experiment runner over `hsl-core`.
//!
//! Every run prints or writes one JSON envelope (or a CSV projection of it).
//! Exit codes: 0 ok, 1 failed built-in check or I/O failure, 2 invalid
//! input, 3 resource cap.

mod commands;
mod envelope;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hsl_core::finite_field::{Field, FieldCtx};
use hsl_core::geometry::Space;

use crate::envelope::{write_output, ResultEnvelope, Table};

#[derive(Debug, Parser, Serialize)]
#[command(name = "hsl", version, about = "Finite-field hidden structure laboratory")]
pub struct Cli {
    /// Field order q = p^m (odd).
    #[arg(long, global = true)]
    pub q: Option<u64>,
    /// Field characteristic; combine with --m.
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Extension degree, default 1.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Dimension of the ambient space F_q^d.
    #[arg(long, global = true, default_value_t = 3)]
    pub d: usize,
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,
    /// Worker threads; falls back to HSL_THREADS, then to all cores.
    #[arg(long, global = true, env = "HSL_THREADS")]
    pub threads: Option<usize>,
    /// Output file; written atomically. Stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Field construction and element arithmetic.
    #[command(subcommand)]
    Field(FieldCmd),
    /// Gauss, Kloosterman and Salié sums.
    #[command(subcommand)]
    Sums(SumsCmd),
    /// Sphere sizes and sphere Fourier transforms.
    #[command(subcommand)]
    Sphere(SphereCmd),
    /// NDJSON session against a hidden-radius shifted-subset instance.
    Oracle(OracleArgs),
    /// Hidden radius: distributions, the chi(r) classifier, total variation.
    #[command(subcommand)]
    Hrp(HrpCmd),
    /// Hidden flat of centers: walk, sample, reconstruct.
    #[command(subcommand)]
    Hfc(HfcCmd),
    /// Hidden polynomial: fidelities, bounds, typicality census.
    #[command(subcommand)]
    Hpp(HppCmd),
    /// Run the built-in acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldCmd {
    /// Modulus, primitive element and character data.
    Info,
    /// Apply one operation to elements written "c0,c1,..".
    Eval {
        #[arg(long, value_enum)]
        op: FieldOp,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Inv,
    Sqrt,
    Chi,
    Trace,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumsCmd {
    /// Quadratic Gauss sum.
    Gauss,
    /// Salié sum by its closed form.
    Salie(PairArgs),
    /// Kloosterman sum by direct summation.
    Kloosterman {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = Eta::Trivial)]
        eta: Eta,
    },
    /// Every (a, b) for one kind, with the closed form checked against
    /// direct summation.
    Grid {
        #[arg(long, value_enum, default_value_t = SumKind::Salie)]
        kind: SumKind,
    },
    /// Angle histogram of K(1, a) against the semicircle law.
    SatoTate {
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct PairArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Eta {
    Trivial,
    Quadratic,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SumKind {
    Salie,
    Kloosterman,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereCmd {
    /// |S_r| by formula and by enumeration, for every r.
    Sizes,
    /// Fourier coefficient of S_r at k, closed form against direct sum.
    /// Without --k every nonzero k is compared.
    Fourier {
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        #[arg(long)]
        k: Option<String>,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Hidden radius of the instance.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub r: String,
    /// Key of the encryption; defaults to --seed.
    #[arg(long)]
    pub key: Option<u64>,
    /// Query file, one JSON request per line; stdin when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HrpCmd {
    /// Exact Pr(k | r) per level of d(k).
    Dist {
        #[arg(long, allow_hyphen_values = true)]
        r: String,
    },
    /// One classifier run plus a Monte Carlo success rate.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// TV between two radii, or the full table when --r is absent.
    Tv {
        #[arg(long, allow_hyphen_values = true)]
        r: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        r2: Option<String>,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HfcCmd {
    /// One end-to-end recovery of a secret flat.
    Run {
        #[arg(long, default_value_t = 1)]
        flat_dim: usize,
        #[arg(long, default_value_t = 400)]
        shots: usize,
        /// Walk time as a multiple of 1/sqrt(q^(d-1) ln q).
        #[arg(long, default_value_t = 1.0)]
        t_factor: f64,
        /// Also report the lemma bands over a grid of times.
        #[arg(long)]
        time_scan: bool,
        /// Secret base point; random when absent.
        #[arg(long)]
        base: Option<String>,
        /// Secret direction, repeatable.
        #[arg(long = "dir")]
        dirs: Vec<String>,
    },
    /// Success rate over random secrets.
    Trials {
        #[arg(long, default_value_t = 1)]
        flat_dim: usize,
        #[arg(long, default_value_t = 400)]
        shots: usize,
        #[arg(long, default_value_t = 1.0)]
        t_factor: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct PairSelection {
    /// Polynomial degree bound for random pairs.
    #[arg(long, default_value_t = 2)]
    pub deg: u32,
    #[arg(long, default_value_t = 20)]
    pub pairs: usize,
    /// Explicit first polynomial, e.g. "x1^2 + 3*x2".
    #[arg(long, requires = "h2")]
    pub h: Option<String>,
    #[arg(long, requires = "h")]
    pub h2: Option<String>,
    /// Candidate count N for the copy estimate.
    #[arg(long)]
    pub candidates: Option<u64>,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HppCmd {
    /// Exact fidelities with both bounds.
    Fidelity(PairSelection),
    /// Bounds with their extracted parameters and hypothesis status.
    Bounds(PairSelection),
    /// Fraction of bivariate polynomials that are not absolutely irreducible.
    Census {
        #[arg(long, default_value_t = 2)]
        deg: u32,
        /// Sample this many polynomials instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
    pub level: LevelArg,
    /// Run only these check ids (c01..c12); skips the determinism rerun.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Add this offset to the Salié closed form in the closed-form check.
    #[arg(long, hide = true)]
    pub perturb_salie: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelArg {
    Fast,
    Full,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Resource(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Resource(m) => write!(f, "resource cap: {m}"),
            CliError::Internal(m) => write!(f, "{m}"),
        }
    }
}

impl From<hsl_core::Error> for CliError {
    fn from(e: hsl_core::Error) -> Self {
        use hsl_core::Error as E;
        match e {
            E::SizeOverflow { .. } | E::ResourceCap(_) => CliError::Resource(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("i/o: {e}"))
    }
}

/// What a command produces before it is wrapped in an envelope.
pub struct Outcome {
    pub payload: serde_json::Value,
    pub table: Option<Table>,
    pub checks: Vec<envelope::CheckFlag>,
    pub timings: Option<serde_json::Value>,
}

impl Outcome {
    pub fn new(payload: serde_json::Value) -> Self {
        Outcome { payload, table: None, checks: Vec::new(), timings: None }
    }

    pub fn table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    pub fn check(mut self, name: &str, passed: bool) -> Self {
        self.checks.push(envelope::CheckFlag { name: name.into(), passed });
        self
    }
}

impl Cli {
    pub fn field(&self) -> Result<Field, CliError> {
        let ctx = match (self.q, self.p) {
            (Some(_), Some(_)) => return Err(CliError::Validation("give either --q or --p, not both".into())),
            (Some(q), None) => {
                let ctx = FieldCtx::from_order(q)?;
                if self.m.is_some_and(|m| m != ctx.m()) {
                    return Err(CliError::Validation(format!("--m disagrees with --q {q}")));
                }
                ctx
            }
            (None, Some(p)) => FieldCtx::new(p, self.m.unwrap_or(1))?,
            (None, None) => return Err(CliError::Validation("a field is required: pass --q or --p".into())),
        };
        Ok(Arc::new(ctx))
    }

    pub fn space(&self) -> Result<Space, CliError> {
        Ok(Space::new(self.field()?, self.d)?)
    }

    fn threads(&self) -> usize {
        self.threads
            .filter(|&t| t > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if matches!(cli.command, Command::Oracle(_)) {
        return commands::oracle(cli).map(|_| true);
    }
    let start = Instant::now();
    let threads = cli.threads();
    let outcome = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?
        .install(|| commands::dispatch(cli, threads))?;
    let config = serde_json::to_value(cli).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut env = ResultEnvelope::new(config, outcome.payload, outcome.checks, start.elapsed().as_secs_f64());
    env.timings = outcome.timings;
    let passed = env.all_passed();
    let bytes = match cli.format {
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Internal(e.to_string()))?;
            b.push(b'\n');
            b
        }
        Format::Csv => outcome.table.unwrap_or_else(|| Table::flatten(&env.payload)).to_csv()?,
    };
    write_output(cli.out.as_deref(), &bytes)?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("hsl: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("hsl: {e}");
            ExitCode::from(e.code())
        }
    }
}
