//! Command-line front end: single rates, thresholds, sweeps, PE-scheme
//! comparison and oracle verification.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use qkd_finite::report::{
    write_rows, CheckRecord, ComparePeRecord, Format, RateRecord, Record, SweepRecord,
    ThresholdRecord,
};
use qkd_finite::{
    find_threshold_n0, key_rate, optimize_rate, Bound, DeviationRule, Family, GridSpec, LeakPoint,
    PeKind, ProtocolSpec, QkdError, RateOptions, RateProblem, SecurityBudget, YieldRule,
};

mod verify;

pub use verify::{run_checks, VerifySettings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

/// Dimensions swept when the qudit family is selected without `--dimension`.
pub const DEFAULT_DIMENSIONS: [usize; 7] = [2, 3, 5, 7, 11, 13, 17];

#[derive(Debug, Parser)]
#[command(name = "qkd-finite", version, about = "Finite-key QKD rate engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key rate at one point, optimized unless the budget and q are given.
    Rate(RateArgs),
    /// Threshold signal number N0 over a QBER grid.
    Threshold(ThresholdArgs),
    /// Optimized rate against the total number of signals.
    Sweep(SweepArgs),
    /// Paired IPOVM and CPOVM rates with the relative improvement.
    ComparePe(ComparePeArgs),
    /// Oracle agreement suites and the Monte Carlo estimation check.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Bb84,
    SixState,
    DBases,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Vn,
    Min,
}

impl From<BoundArg> for Bound {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Vn => Bound::VonNeumann,
            BoundArg::Min => Bound::MinEntropy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PeArg {
    Ipovm,
    Cpovm,
}

impl From<PeArg> for PeKind {
    fn from(p: PeArg) -> Self {
        match p {
            PeArg::Ipovm => PeKind::Ipovm,
            PeArg::Cpovm => PeKind::Cpovm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum YieldArg {
    Paper,
    PerBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LeakArg {
    WorstCase,
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeviationArg {
    HalfDistance,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{s} is not a positive number"))
    }
}

fn probability(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{s} is not in [0, 1)"))
    }
}

/// Options shared by every engine-backed command.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Protocols; inferred from --dimension when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub protocol: Vec<ProtocolArg>,
    /// Prime dimensions of the qudit family.
    #[arg(long, value_delimiter = ',')]
    pub dimension: Vec<usize>,
    #[arg(long = "pe", value_enum, default_value = "cpovm")]
    pub pe: PeArg,
    #[arg(long = "yield", value_enum, default_value = "paper")]
    pub yield_rule: YieldArg,
    #[arg(long, default_value = "1e-9", value_parser = positive)]
    pub eps: f64,
    #[arg(long = "eps-ec", default_value = "1e-10", value_parser = positive)]
    pub eps_ec: f64,
    #[arg(long = "leak-factor", default_value = "1.2", value_parser = positive)]
    pub leak_factor: f64,
    /// Error rate at which the reconciliation leakage is charged.
    #[arg(long = "leak-at", value_enum, default_value = "worst-case")]
    pub leak_at: LeakArg,
    /// Whether the estimation bound limits half the deviation or all of it.
    #[arg(long, value_enum, default_value = "half-distance")]
    pub deviation: DeviationArg,
    #[arg(long = "grid-points", default_value_t = 15)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 3)]
    pub refinements: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, default_value = "vn")]
    pub bound: BoundArg,
    #[arg(long, default_value = "0.05", value_parser = probability)]
    pub qber: f64,
    #[arg(long, value_parser = positive)]
    pub signals: f64,
    /// Fixed key-basis probability; skips the optimizer together with the
    /// two budget shares below.
    #[arg(long = "q-key", requires_all = ["eps_pe", "eps_pa"])]
    pub q_key: Option<f64>,
    #[arg(long = "eps-pe", requires = "q_key", value_parser = positive)]
    pub eps_pe: Option<f64>,
    #[arg(long = "eps-pa", requires = "q_key", value_parser = positive)]
    pub eps_pa: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Bounds; both when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub bound: Vec<BoundArg>,
    /// Explicit QBER values; overrides the linear grid.
    #[arg(long, value_delimiter = ',', value_parser = probability)]
    pub qber: Vec<f64>,
    #[arg(long = "qber-min", default_value = "0.002", value_parser = probability)]
    pub qber_min: f64,
    #[arg(long = "qber-max", default_value = "0.038", value_parser = probability)]
    pub qber_max: f64,
    #[arg(long = "qber-steps", default_value_t = 10)]
    pub qber_steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub bound: Vec<BoundArg>,
    #[arg(long, default_value = "0.05", value_parser = probability)]
    pub qber: f64,
    #[arg(long = "signals-min", default_value = "1e3", value_parser = positive)]
    pub signals_min: f64,
    #[arg(long = "signals-max", default_value = "1e12", value_parser = positive)]
    pub signals_max: f64,
    #[arg(long = "per-decade", default_value_t = 4)]
    pub per_decade: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ComparePeArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, default_value = "vn")]
    pub bound: BoundArg,
    #[arg(long, default_value = "0.05", value_parser = probability)]
    pub qber: f64,
    #[arg(long, value_delimiter = ',', value_parser = positive, default_value = "1e6,1e10")]
    pub signals: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Outcome distribution of the Monte Carlo check.
    #[arg(long = "mc-dist", value_delimiter = ',', default_value = "0.95,0.05")]
    pub mc_dist: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Error surfaced to the user with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<QkdError> for Failure {
    fn from(e: QkdError) -> Self {
        Failure::config(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::config(e.to_string())
    }
}

struct Engine {
    protocols: Vec<ProtocolSpec>,
    options: RateOptions<f64>,
    grid: GridSpec,
    eps: f64,
    eps_ec: f64,
}

impl Engine {
    fn problem(
        &self,
        bound: Bound,
        protocol: ProtocolSpec,
        q_err: f64,
        n_total: f64,
    ) -> RateProblem<f64> {
        RateProblem {
            bound,
            protocol,
            q_err,
            n_total,
            eps_total: self.eps,
            eps_ec: self.eps_ec,
            options: self.options,
        }
    }
}

fn resolve_protocols(
    args: &EngineArgs,
    pe: PeKind,
    default: &[ProtocolArg],
) -> Result<Vec<ProtocolSpec>, Failure> {
    let mut kinds = args.protocol.clone();
    if kinds.is_empty() {
        if args.dimension.iter().any(|&d| d > 2) {
            kinds.push(ProtocolArg::DBases);
        } else {
            kinds.extend_from_slice(default);
        }
    }
    let mut out = Vec::new();
    for kind in kinds {
        match kind {
            ProtocolArg::Bb84 | ProtocolArg::SixState => {
                if let Some(&d) = args.dimension.iter().find(|&&d| d != 2) {
                    return Err(Failure::config(format!(
                        "dimension {d} requires --protocol d-bases"
                    )));
                }
                out.push(if kind == ProtocolArg::Bb84 {
                    ProtocolSpec::bb84(pe)
                } else {
                    ProtocolSpec::six_state(pe)
                });
            }
            ProtocolArg::DBases => {
                let dims: &[usize] = if args.dimension.is_empty() {
                    &DEFAULT_DIMENSIONS
                } else {
                    &args.dimension
                };
                for &d in dims {
                    out.push(ProtocolSpec::d_bases(d, pe)?);
                }
            }
        }
    }
    Ok(out)
}

fn engine(args: &EngineArgs, default: &[ProtocolArg]) -> Result<Engine, Failure> {
    if args.eps_ec >= args.eps || args.eps >= 1.0 {
        return Err(Failure::config("need 0 < eps-ec < eps < 1"));
    }
    if args.grid_points < 2 {
        return Err(Failure::config("--grid-points must be at least 2"));
    }
    let options = RateOptions {
        yield_rule: match args.yield_rule {
            YieldArg::Paper => YieldRule::PaperLiteral,
            YieldArg::PerBasis => YieldRule::PerBasis,
        },
        leak_factor: args.leak_factor,
        leak_at: match args.leak_at {
            LeakArg::WorstCase => LeakPoint::WorstCase,
            LeakArg::Measured => LeakPoint::Measured,
        },
        deviation: match args.deviation {
            DeviationArg::HalfDistance => DeviationRule::HalfDistance,
            DeviationArg::Absolute => DeviationRule::Absolute,
        },
    };
    Ok(Engine {
        protocols: resolve_protocols(args, args.pe.into(), default)?,
        options,
        grid: GridSpec {
            points: args.grid_points,
            refinements: args.refinements,
            ..GridSpec::default()
        },
        eps: args.eps,
        eps_ec: args.eps_ec,
    })
}

fn bounds(list: &[BoundArg]) -> Vec<Bound> {
    if list.is_empty() {
        vec![Bound::VonNeumann, Bound::MinEntropy]
    } else {
        list.iter().map(|&b| b.into()).collect()
    }
}

fn emit<R: Record>(rows: &[R], output: &OutputArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let format = match output.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    match &output.out {
        Some(path) => {
            let file = BufWriter::new(File::create(path)?);
            write_rows(rows, format, file)?;
        }
        None => write_rows(rows, format, &mut *stdout)?,
    }
    Ok(())
}

fn rate(args: &RateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let e = engine(&args.engine, &[ProtocolArg::Bb84])?;
    let bound = args.bound.into();
    let mut rows = Vec::new();
    for &p in &e.protocols {
        let breakdown = match (args.q_key, args.eps_pe, args.eps_pa) {
            (Some(q), Some(pe), Some(pa)) => {
                let budget = SecurityBudget::with_remainder(e.eps, e.eps_ec, pe, pa)?;
                key_rate(bound, &p, args.qber, args.signals, &budget, q, &e.options)?
            }
            _ => optimize_rate(&e.problem(bound, p, args.qber, args.signals), &e.grid)?.best,
        };
        rows.push(RateRecord::new(&p, &breakdown));
    }
    emit(&rows, &args.engine.output, stdout)
}

fn threshold(args: &ThresholdArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let e = engine(&args.engine, &[ProtocolArg::Bb84])?;
    let qbers = if args.qber.is_empty() {
        if args.qber_steps < 1 || args.qber_max < args.qber_min {
            return Err(Failure::config("empty QBER grid"));
        }
        if args.qber_steps == 1 {
            vec![args.qber_min]
        } else {
            (0..args.qber_steps)
                .map(|i| {
                    args.qber_min
                        + (args.qber_max - args.qber_min) * i as f64 / (args.qber_steps - 1) as f64
                })
                .collect()
        }
    } else {
        args.qber.clone()
    };
    let mut jobs = Vec::new();
    for &p in &e.protocols {
        for b in bounds(&args.bound) {
            for &q in &qbers {
                jobs.push((p, b, q));
            }
        }
    }
    let rows: Vec<ThresholdRecord> = jobs
        .par_iter()
        .map(|&(p, b, q)| {
            let t = find_threshold_n0(&e.problem(b, p, q, 1.0), &e.grid)?;
            Ok(ThresholdRecord {
                family: p.family,
                dimension: p.dimension,
                pe_scheme: p.pe_scheme,
                bound: b,
                q_err: q,
                n0: t.n0,
                n0_scaled: t.n0_scaled,
            })
        })
        .collect::<Result<_, QkdError>>()?;
    emit(&rows, &args.engine.output, stdout)
}

fn sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let e = engine(&args.engine, &[ProtocolArg::SixState, ProtocolArg::Bb84])?;
    if args.signals_max < args.signals_min || args.per_decade == 0 {
        return Err(Failure::config("empty signal grid"));
    }
    let lo = args.signals_min.log10();
    let steps = ((args.signals_max.log10() - lo) * args.per_decade as f64 + 1e-9).floor() as usize;
    let signals: Vec<f64> = (0..=steps)
        .map(|i| 10f64.powf(lo + i as f64 / args.per_decade as f64))
        .collect();
    let mut jobs = Vec::new();
    for &p in &e.protocols {
        for b in bounds(&args.bound) {
            for &n in &signals {
                jobs.push((p, b, n));
            }
        }
    }
    let rows: Vec<SweepRecord> = jobs
        .par_iter()
        .map(|&(p, b, n)| {
            let o = optimize_rate(&e.problem(b, p, args.qber, n), &e.grid)?;
            Ok(SweepRecord {
                family: p.family,
                dimension: p.dimension,
                pe_scheme: p.pe_scheme,
                bound: b,
                q_err: args.qber,
                n_total: n,
                n_scaled: n * (p.dimension as f64).log2(),
                rate: o.best.rate,
                rate_clamped: o.best.rate.max(0.0),
                q_key: o.best.q_key,
            })
        })
        .collect::<Result<_, QkdError>>()?;
    emit(&rows, &args.engine.output, stdout)
}

fn compare_pe(args: &ComparePeArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let e = engine(&args.engine, &[ProtocolArg::SixState, ProtocolArg::Bb84])?;
    if e.protocols
        .iter()
        .any(|p| p.family == Family::DPlusOneBases && p.dimension > 2)
    {
        return Err(Failure::config(
            "IPOVM estimation is only defined for qubits; compare-pe needs d = 2",
        ));
    }
    let bound = args.bound.into();
    let mut jobs = Vec::new();
    for &p in &e.protocols {
        for &n in &args.signals {
            jobs.push((p, n));
        }
    }
    let rows: Vec<ComparePeRecord> = jobs
        .par_iter()
        .map(|&(p, n)| {
            let i = optimize_rate(
                &e.problem(bound, p.with_pe(PeKind::Ipovm), args.qber, n),
                &e.grid,
            )?;
            let c = optimize_rate(
                &e.problem(bound, p.with_pe(PeKind::Cpovm), args.qber, n),
                &e.grid,
            )?;
            let (ri, rc) = (i.best.rate, c.best.rate);
            Ok(ComparePeRecord {
                family: p.family,
                dimension: p.dimension,
                bound,
                q_err: args.qber,
                n_total: n,
                rate_ipovm: ri,
                rate_cpovm: rc,
                improvement_pct: (ri > 0.0 && rc > 0.0).then(|| 100.0 * (rc / ri - 1.0)),
            })
        })
        .collect::<Result<_, QkdError>>()?;
    emit(&rows, &args.engine.output, stdout)
}

fn verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let settings = VerifySettings {
        seed: args.seed,
        trials: args.trials,
        mc_dist: args.mc_dist.clone(),
    };
    let rows: Vec<CheckRecord> = run_checks(&settings)?;
    emit(&rows, &args.output, stdout)?;
    if rows.iter().all(|r| r.passed) {
        Ok(())
    } else {
        let failed: Vec<&str> = rows
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.check.as_str())
            .collect();
        Err(Failure {
            code: EXIT_VERIFY,
            message: format!("verification failed: {}", failed.join(", ")),
        })
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Rate(a) => rate(a, stdout),
        Command::Threshold(a) => threshold(a, stdout),
        Command::Sweep(a) => sweep(a, stdout),
        Command::ComparePe(a) => compare_pe(a, stdout),
        Command::Verify(a) => verify(a, stdout),
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
