//! Subcommands of the `rxtx` tool. Each command writes its report to the
//! given writer and returns an [`Outcome`]; `main` maps that to an exit code.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rxtx_core::bench::{run_bench, BenchConfig, BenchReport};
use rxtx_core::discovery::{discover, format_combination, CoverOptions, Discovery, DiscoveryConfig, SamplingMode};
use rxtx_core::gemm::DEFAULT_WINOGRAD_CUTOFF;
use rxtx_core::opcount::{csv_columns, count_optimal_cutoff, count_recurrence, emit_ratio_table, TableOptions};
use rxtx_core::plan::{plan_for, rxtx_direct_plan, rxtx_optimized_plan};
use rxtx_core::scheme::Algebra;
use rxtx_core::{
    export_scheme, import_scheme, naive_gram, rxtx_scheme, scheme_gram, strassen_xxt_scheme, verify_scheme,
    Algorithm, BackendKind, BilinearScheme, DenseMatrix, Error, ExactInt, GemmBackend, GramOptions, Metric,
    PlanKind,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A verification or correctness check failed.
    Failure,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::InvalidSize { .. } | Error::Parse { .. } => EXIT_USAGE,
            _ => EXIT_FAILED,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { code: EXIT_FAILED, message: e.to_string() }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError { code: EXIT_FAILED, message: format!("cannot write {}: {e}", path.display()) })
}

#[derive(Debug, Parser)]
#[command(name = "rxtx", version, about = "Fast X·Xᵗ: scheme verification, operation counts, benchmarks, and scheme search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prove the built-in schemes (or a scheme file) and cross-check the fast
    /// algorithms against the naive Gram product on random integer inputs.
    Verify(VerifyArgs),
    /// Print an exact operation count.
    Count(CountArgs),
    /// Write the table of counts and ratios as CSV.
    #[command(after_help = TABLE_HELP)]
    Table(TableArgs),
    /// Time depth-limited RXTX against a direct Gram product.
    Bench(BenchArgs),
    /// Search for a product-minimal X·Xᵗ scheme on a small matrix.
    Discover(DiscoverArgs),
    /// Print a built-in scheme in the plain-text scheme format.
    ExportScheme(ExportArgs),
}

const TABLE_HELP: &str = "\
CSV columns:
  n                 matrix size
  R, S, M           multiplications: RXTX, recursive Strassen X·Xᵗ, Strassen-Winograd
  naive_mults       n²(n+1)/2
  R_plus, S_plus, M_plus   multiplications plus additions
  naive_ops         (2n-1)·n(n+1)/2
  R_opt … S_plus_opt       counts when each level may fall back to the cheapest method
  r_over_s … r_plus_opt_over_naive_ops   ratios, rounded half-up to 6 decimals
RXTX columns are empty where n is not a power of 4 (only with --pow2).";

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Verify this scheme file instead of the built-in schemes.
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    /// Random integer cases for the oracle comparison.
    #[arg(long, default_value_t = 24)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgoArg {
    Rxtx,
    StrassenXxt,
    Winograd,
    NaiveGram,
    NaiveGemm,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Rxtx => Algorithm::Rxtx,
            AlgoArg::StrassenXxt => Algorithm::StrassenXxt,
            AlgoArg::Winograd => Algorithm::Winograd,
            AlgoArg::NaiveGram => Algorithm::NaiveGram,
            AlgoArg::NaiveGemm => Algorithm::NaiveGemm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Mults,
    Ops,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Mults => Metric::Mults,
            MetricArg::Ops => Metric::TotalOps,
        }
    }
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    #[arg(long, value_enum, default_value = "mults")]
    pub metric: MetricArg,
    #[arg(long)]
    pub n: u64,
    /// Allow every recursion level to fall back to a cheaper method.
    #[arg(long)]
    pub opt: bool,
    /// With --opt, also print the method chosen at each size.
    #[arg(long, requires = "opt")]
    pub steps: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Largest exponent k; rows run over n = 4¹ … 4ᵏ.
    #[arg(long, default_value_t = 10)]
    pub max_exp: u32,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the optimal-cutoff columns.
    #[arg(long)]
    pub no_opt: bool,
    /// Include every power of two, not only powers of 4.
    #[arg(long)]
    pub pow2: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Naive,
    Winograd,
    External,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "naive")]
    pub backend: BackendArg,
    /// Naive-kernel cutoff for the Strassen-Winograd backend.
    #[arg(long, default_value_t = DEFAULT_WINOGRAD_CUTOFF)]
    pub cutoff: usize,
    /// RXTX recursion levels.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// Time the first rep too.
    #[arg(long)]
    pub no_warmup: bool,
    #[arg(long, env = "RXTX_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl BenchArgs {
    pub fn config(&self) -> BenchConfig {
        BenchConfig {
            n: self.n,
            reps: self.reps,
            seed: self.seed,
            backend: match self.backend {
                BackendArg::Naive => BackendKind::Naive,
                BackendArg::Winograd => BackendKind::StrassenWinograd { cutoff: self.cutoff },
                BackendArg::External => BackendKind::External,
            },
            depth: self.depth,
            warmup: !self.no_warmup,
            threads: self.threads,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Random,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: ModeArg,
    /// Pairs to draw in random mode.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 12)]
    pub max_products: usize,
    /// Maximum number of subspaces to examine.
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: u64,
    /// Write the scheme to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WhichScheme {
    Rxtx,
    StrassenXxt,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_enum, default_value = "rxtx")]
    pub which: WhichScheme,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Verify(a) => cmd_verify(a, out),
        Command::Count(a) => cmd_count(a, out),
        Command::Table(a) => cmd_table(a, out),
        Command::Bench(a) => cmd_bench(a, out).map(|_| Outcome::Success),
        Command::Discover(a) => cmd_discover(a, out).map(|_| Outcome::Success),
        Command::ExportScheme(a) => {
            let s = match a.which {
                WhichScheme::Rxtx => rxtx_scheme(),
                WhichScheme::StrassenXxt => strassen_xxt_scheme(),
            };
            emit(out, a.out.as_deref(), &export_scheme(s))?;
            Ok(Outcome::Success)
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

/// Proves one scheme; prints a summary line and, on failure, the first
/// failing identity.
fn prove(name: &str, scheme: &BilinearScheme, out: &mut dyn Write) -> Result<bool, CliError> {
    let v = verify_scheme(scheme)?;
    writeln!(out, "{name}: {}/{} output identities verified", v.passed(), v.checked)?;
    if let Some(f) = v.failures.first() {
        writeln!(out, "FAILED {f}")?;
    }
    Ok(v.is_ok())
}

/// Random integer inputs through every plan, compared with the naive Gram
/// product. Returns the number of agreeing cases.
fn oracle_cases(
    plans: &[(&str, rxtx_core::AdditionPlan)],
    cases: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<usize, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = 0;
    for _ in 0..cases {
        let n = rng.random_range(1..=24);
        let m = rng.random_range(1..=24);
        let cutoff = [1usize, 2, 4][rng.random_range(0..3)];
        let x = DenseMatrix::<ExactInt>::random_int(n, m, -9, 9, &mut rng);
        let want = naive_gram(&x)?;
        let mut ok = true;
        for (name, plan) in plans {
            let got = scheme_gram(&x, plan, GramOptions::cutoff(cutoff), &GemmBackend::naive())?;
            if got != want {
                writeln!(out, "FAILED oracle: {name} differs from naive at n={n} m={m} cutoff={cutoff}")?;
                ok = false;
            }
        }
        agree += usize::from(ok);
    }
    Ok(agree)
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let mut ok = true;
    let mut plans: Vec<(String, rxtx_core::AdditionPlan)> = Vec::new();
    if let Some(path) = &args.scheme {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError { code: EXIT_USAGE, message: format!("cannot read {}: {e}", path.display()) })?;
        let scheme = import_scheme(&text)?;
        ok &= prove(&path.display().to_string(), &scheme, out)?;
        if ok && scheme.algebra == Algebra::Block && scheme.grid >= 2 {
            match plan_for(&scheme, PlanKind::Direct) {
                Ok(p) => plans.push(("scheme".into(), p)),
                Err(e) => writeln!(out, "oracle: skipped ({e})")?,
            }
        } else if scheme.algebra == Algebra::Commutative {
            writeln!(out, "oracle: skipped (commutative scheme cannot run on blocks)")?;
        }
    } else {
        ok &= prove("rxtx", rxtx_scheme(), out)?;
        ok &= prove("strassen-xxt", strassen_xxt_scheme(), out)?;
        for (name, plan) in [("optimized", rxtx_optimized_plan()), ("direct", rxtx_direct_plan())] {
            let c = plan.addition_count();
            match plan.check_against(rxtx_scheme()) {
                Ok(()) => writeln!(
                    out,
                    "rxtx {name} plan: matches scheme, {} + {} = {} additions",
                    c.stage1,
                    c.stage2,
                    c.total()
                )?,
                Err(e) => {
                    writeln!(out, "FAILED rxtx {name} plan: {e}")?;
                    ok = false;
                }
            }
        }
        plans.push(("rxtx optimized".into(), rxtx_optimized_plan().clone()));
        plans.push(("rxtx direct".into(), rxtx_direct_plan().clone()));
        plans.push(("strassen-xxt".into(), plan_for(strassen_xxt_scheme(), PlanKind::Direct)?));
    }
    if ok && !plans.is_empty() && args.cases > 0 {
        let named: Vec<(&str, rxtx_core::AdditionPlan)> = plans.iter().map(|(n, p)| (n.as_str(), p.clone())).collect();
        let agree = oracle_cases(&named, args.cases, args.seed, out)?;
        writeln!(out, "oracle: {agree}/{} random integer cases agree with the naive Gram product", args.cases)?;
        ok &= agree == args.cases;
    }
    Ok(if ok { Outcome::Success } else { Outcome::Failure })
}

pub fn cmd_count(args: &CountArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let (alg, metric) = (args.algo.into(), args.metric.into());
    if args.opt {
        let r = count_optimal_cutoff(alg, metric, args.n)?;
        writeln!(out, "{}", r.value)?;
        if args.steps {
            for (n, s) in &r.gram_steps {
                writeln!(out, "gram {n}: {s:?}")?;
            }
            for (n, s) in &r.gemm_steps {
                writeln!(out, "gemm {n}: {s:?}")?;
            }
        }
    } else {
        writeln!(out, "{}", count_recurrence(alg, metric, args.n)?)?;
    }
    Ok(Outcome::Success)
}

pub fn table_csv(args: &TableArgs) -> Result<String, CliError> {
    let t = emit_ratio_table(args.max_exp, TableOptions { include_opt: !args.no_opt, powers_of_two: args.pow2 })?;
    Ok(t.to_csv())
}

pub fn cmd_table(args: &TableArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let csv = table_csv(args)?;
    debug_assert_eq!(csv.lines().next().map(|l| l.split(',').count()), Some(csv_columns(!args.no_opt).len()));
    emit(out, args.out.as_deref(), &csv)?;
    Ok(Outcome::Success)
}

pub fn bench_csv(r: &BenchReport) -> String {
    let mut s = String::from("rep,rxtx_seconds,baseline_seconds,relative_deviation,max_abs_deviation\n");
    for (i, x) in r.runs.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{:.9},{:.9},{:e},{:e}",
            i + 1,
            x.rxtx_seconds,
            x.baseline_seconds,
            x.relative_deviation,
            x.max_abs_deviation
        );
    }
    s
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<BenchReport, CliError> {
    let report = run_bench(&args.config())?;
    if let Some(w) = &report.warning {
        eprintln!("warning: {w}");
    }
    let text = match args.format {
        ReportFormat::Json => {
            let mut j = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError { code: EXIT_FAILED, message: e.to_string() })?;
            j.push('\n');
            j
        }
        ReportFormat::Csv => bench_csv(&report),
    };
    emit(out, args.out.as_deref(), &text)?;
    Ok(report)
}

pub fn discovery_summary(d: &Discovery) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "candidates: {} drawn, {} distinct up to sign", d.drawn, d.distinct);
    let _ = writeln!(s, "minimal cover: {} products ({} subspaces examined)", d.cover.len(), d.cover.examined);
    for (k, p) in d.cover.products.iter().enumerate() {
        let _ = writeln!(s, "  p{} = {p}", k + 1);
    }
    for (o, comb) in d.scheme.outputs.iter().zip(&d.cover.combinations) {
        let _ = writeln!(s, "  C{}{} = {}", o.row + 1, o.col + 1, format_combination(comb, "p"));
    }
    s
}

pub fn cmd_discover(args: &DiscoverArgs, out: &mut dyn Write) -> Result<Discovery, CliError> {
    let config = DiscoveryConfig {
        dim: args.dim,
        mode: match args.mode {
            ModeArg::Exhaustive => SamplingMode::Exhaustive,
            ModeArg::Random => SamplingMode::Random { count: args.samples, seed: args.seed },
        },
        cover: CoverOptions { max_products: args.max_products, budget: args.budget },
    };
    let d = discover(&config)?;
    let v = verify_scheme(&d.scheme)?;
    out.write_all(discovery_summary(&d).as_bytes())?;
    writeln!(out, "verified: {}/{} output identities", v.passed(), v.checked)?;
    let text = export_scheme(&d.scheme);
    match &args.out {
        Some(p) => write_file(p, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(d)
}
