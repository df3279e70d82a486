//! Depth-limited RXTX timing against a direct Gram baseline.
//!
//! Each rep draws a fresh standard-normal n×n matrix from one seeded stream,
//! runs RXTX (by default one level: 26 backend products and 8 flat Gram
//! products on n/4 blocks) and the baseline on it, and records both wall
//! times and the deviation between the two results.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{rxtx_gram, GramOptions};
use crate::gemm::{BackendKind, GemmBackend};
use crate::matrix::{naive_gram, DenseMatrix};
use crate::plan::PlanKind;

pub const SAMPLER: &str = "rand_distr::StandardNormal (ziggurat) over rand_chacha::ChaCha8Rng";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub backend: BackendKind,
    /// RXTX recursion levels; 1 applies the scheme once.
    pub depth: usize,
    /// Run one untimed rep first.
    pub warmup: bool,
    /// Worker threads for the independent products of each level.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { n: 512, reps: 5, seed: 0, backend: BackendKind::Naive, depth: 1, warmup: true, threads: 1 }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidSize { n: self.n as u64, reason: "benchmark size must be at least 4" });
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be at least 1".into()));
        }
        if self.depth == 0 {
            return Err(Error::InvalidArgument("depth must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidArgument("threads must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepTiming {
    pub rxtx_seconds: f64,
    pub baseline_seconds: f64,
    /// ‖RXTX − baseline‖_F / ‖baseline‖_F.
    pub relative_deviation: f64,
    pub max_abs_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let len = v.len();
        let median = if len % 2 == 1 { v[len / 2] } else { (v[len / 2 - 1] + v[len / 2]) / 2.0 };
        Self { mean: v.iter().sum::<f64>() / len as f64, median, min: v[0], max: v[len - 1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub backend: String,
    pub depth: usize,
    pub warmup: bool,
    pub threads: usize,
    pub baseline: String,
    pub sampler: String,
    /// Set when n is not a multiple of 4 and blocks were zero padded.
    pub warning: Option<String>,
    pub runs: Vec<RepTiming>,
    pub rxtx: Summary,
    pub baseline_times: Summary,
    /// Share of reps where RXTX beat the baseline.
    pub fraction_rxtx_faster: f64,
    pub max_relative_deviation: f64,
    pub max_abs_deviation: f64,
}

fn baseline_description(kind: BackendKind) -> &'static str {
    match kind {
        BackendKind::Naive => "naive Gram kernel on the full matrix",
        BackendKind::StrassenWinograd { .. } => "Strassen-Winograd product X * X^T on the full matrix",
        BackendKind::External => "external dgemm X * X^T on the full matrix",
    }
}

fn baseline(x: &DenseMatrix<f64>, backend: &GemmBackend) -> Result<DenseMatrix<f64>> {
    match backend.kind() {
        BackendKind::Naive => naive_gram(x),
        _ => backend.gemm(x, &x.transpose()),
    }
}

pub fn normal_matrix(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng))
}

fn seconds(start: Instant) -> f64 {
    // Clamp so recorded times stay strictly positive on coarse clocks.
    start.elapsed().as_secs_f64().max(1e-9)
}

/// Runs every rep; product-level parallelism comes from the enclosing pool.
fn run_reps(cfg: &BenchConfig, backend: &GemmBackend) -> Result<Vec<RepTiming>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let opts = GramOptions { cutoff: 1, max_depth: Some(cfg.depth) };
    if cfg.warmup {
        let x = normal_matrix(cfg.n, &mut ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed));
        rxtx_gram(&x, opts, backend, PlanKind::Optimized)?;
        baseline(&x, backend)?;
    }
    let mut runs = Vec::with_capacity(cfg.reps);
    for _ in 0..cfg.reps {
        let x = normal_matrix(cfg.n, &mut rng);
        let t = Instant::now();
        let r = rxtx_gram(&x, opts, backend, PlanKind::Optimized)?;
        let rxtx_seconds = seconds(t);
        let t = Instant::now();
        let b = baseline(&x, backend)?;
        let baseline_seconds = seconds(t);
        let max_abs = r.data().iter().zip(b.data()).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        runs.push(RepTiming {
            rxtx_seconds,
            baseline_seconds,
            relative_deviation: r.relative_frobenius_error(&b),
            max_abs_deviation: max_abs,
        });
    }
    Ok(runs)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let backend = GemmBackend::new(cfg.backend).with_parallel(cfg.threads > 1);
    if !backend.is_available::<f64>() {
        return Err(Error::Unavailable(format!("{} backend", cfg.backend)));
    }
    let runs = if cfg.threads > 1 {
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::Unavailable(format!("thread pool: {e}")))?;
            pool.install(|| run_reps(cfg, &backend))?
        }
        #[cfg(not(feature = "parallel"))]
        {
            return Err(Error::Unavailable("multithreading (built without the `parallel` feature)".into()));
        }
    } else {
        run_reps(cfg, &backend)?
    };
    let rx: Vec<f64> = runs.iter().map(|r| r.rxtx_seconds).collect();
    let bl: Vec<f64> = runs.iter().map(|r| r.baseline_seconds).collect();
    let faster = runs.iter().filter(|r| r.rxtx_seconds < r.baseline_seconds).count();
    let warning = (!cfg.n.is_multiple_of(4)).then(|| {
        format!("n = {} is not a multiple of 4; blocks are zero padded to {}", cfg.n, cfg.n.next_multiple_of(4))
    });
    Ok(BenchReport {
        n: cfg.n,
        reps: cfg.reps,
        seed: cfg.seed,
        backend: cfg.backend.to_string(),
        depth: cfg.depth,
        warmup: cfg.warmup,
        threads: cfg.threads,
        baseline: baseline_description(cfg.backend).into(),
        sampler: SAMPLER.into(),
        warning,
        rxtx: Summary::of(&rx),
        baseline_times: Summary::of(&bl),
        fraction_rxtx_faster: faster as f64 / runs.len() as f64,
        max_relative_deviation: runs.iter().map(|r| r.relative_deviation).fold(0.0, f64::max),
        max_abs_deviation: runs.iter().map(|r| r.max_abs_deviation).fold(0.0, f64::max),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bench_is_accurate() {
        let cfg = BenchConfig { n: 64, reps: 2, ..Default::default() };
        let rep = run_bench(&cfg).unwrap();
        assert_eq!(rep.runs.len(), 2);
        assert!(rep.runs.iter().all(|r| r.rxtx_seconds > 0.0 && r.baseline_seconds > 0.0));
        assert!(rep.max_relative_deviation <= 1e-10);
        assert!(rep.warning.is_none());
    }

    #[test]
    fn seed_fixes_inputs() {
        let cfg = BenchConfig { n: 30, reps: 2, warmup: false, ..Default::default() };
        let a = run_bench(&cfg).unwrap();
        let b = run_bench(&cfg).unwrap();
        let dev = |r: &BenchReport| r.runs.iter().map(|x| x.relative_deviation).collect::<Vec<_>>();
        assert_eq!(dev(&a), dev(&b));
        assert!(a.warning.as_deref().unwrap().contains("padded to 32"));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(run_bench(&BenchConfig { n: 2, ..Default::default() }).is_err());
        assert!(run_bench(&BenchConfig { reps: 0, ..Default::default() }).is_err());
        assert!(run_bench(&BenchConfig { depth: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn summary_median() {
        assert_eq!(Summary::of(&[3.0, 1.0, 2.0]).median, 2.0);
        assert_eq!(Summary::of(&[4.0, 1.0, 2.0, 3.0]).median, 2.5);
    }
}
