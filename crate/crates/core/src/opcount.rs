//! Exact operation counts: recurrences, closed forms, optimal-cutoff
//! dynamic programming, and ratio tables.
//!
//! All arithmetic is on big integers and rationals; floating point appears
//! only in rendered decimals. Sizes are square n×n. Naive conventions: a
//! Gram product costs n²(n+1)/2 multiplications and (2n−1)n(n+1)/2
//! operations; a general product n³ and 2n³ − n².

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Algorithm {
    Rxtx,
    StrassenXxt,
    Winograd,
    NaiveGram,
    NaiveGemm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Rxtx, Algorithm::StrassenXxt, Algorithm::Winograd, Algorithm::NaiveGram, Algorithm::NaiveGemm];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Rxtx => "rxtx",
            Algorithm::StrassenXxt => "strassen-xxt",
            Algorithm::Winograd => "winograd",
            Algorithm::NaiveGram => "naive-gram",
            Algorithm::NaiveGemm => "naive-gemm",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rxtx" => Algorithm::Rxtx,
            "strassen-xxt" | "strassen" => Algorithm::StrassenXxt,
            "winograd" | "strassen-winograd" => Algorithm::Winograd,
            "naive-gram" | "naive" => Algorithm::NaiveGram,
            "naive-gemm" => Algorithm::NaiveGemm,
            _ => return Err(Error::InvalidArgument(format!("unknown algorithm `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Metric {
    Mults,
    /// Multiplications plus additions.
    TotalOps,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Mults => "mults",
            Metric::TotalOps => "ops",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mults" | "multiplications" => Ok(Metric::Mults),
            "ops" | "total" | "total-ops" => Ok(Metric::TotalOps),
            _ => Err(Error::InvalidArgument(format!("unknown metric `{s}`"))),
        }
    }
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_u(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

/// log₂ n when n is a power of two.
fn log2_exact(n: u64) -> Option<u32> {
    (n.is_power_of_two()).then(|| n.trailing_zeros())
}

fn require_power(alg: Algorithm, n: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidSize { n, reason: "size must be positive" });
    }
    let k = log2_exact(n);
    match alg {
        Algorithm::Rxtx => k.filter(|k| k % 2 == 0).ok_or(Error::InvalidSize { n, reason: "rxtx needs a power of 4" }),
        Algorithm::StrassenXxt | Algorithm::Winograd => {
            k.ok_or(Error::InvalidSize { n, reason: "needs a power of 2" })
        }
        Algorithm::NaiveGram | Algorithm::NaiveGemm => Ok(k.unwrap_or(0)),
    }
}

pub fn naive_gram_count(metric: Metric, n: u64) -> BigUint {
    let n = big(n);
    let entries = &n * (&n + 1u32) / 2u32;
    match metric {
        Metric::Mults => entries * &n,
        Metric::TotalOps => entries * (&n * 2u32 - 1u32),
    }
}

pub fn naive_gemm_count(metric: Metric, n: u64) -> BigUint {
    let n = big(n);
    let cube = &n * &n * &n;
    match metric {
        Metric::Mults => cube,
        Metric::TotalOps => cube * 2u32 - &n * &n,
    }
}

/// Additions charged per recursion level, in units of the squared block
/// size.
fn adds(metric: Metric, per_level: u64) -> u64 {
    match metric {
        Metric::Mults => 0,
        Metric::TotalOps => per_level,
    }
}

pub const RXTX_ADDITIONS: u64 = 100;
pub const STRASSEN_XXT_ADDITIONS: u64 = 3;
pub const WINOGRAD_ADDITIONS: u64 = 15;

/// Strassen–Winograd counts for 1, 2, 4, …, 2^k.
fn winograd_series(metric: Metric, k: u32) -> Vec<BigUint> {
    let mut m = vec![BigUint::one()];
    for i in 1..=k {
        let half_sq = big(4).pow(i - 1);
        let v = &m[i as usize - 1] * 7u32 + half_sq * adds(metric, WINOGRAD_ADDITIONS);
        m.push(v);
    }
    m
}

/// Exact count by direct evaluation of the recurrence:
///
/// - Winograd: M(n) = 7M(n/2) + 15(n/2)²
/// - recursive Strassen: S(n) = 4S(n/2) + 2M(n/2) + 3(n/2)²
/// - RXTX: R(n) = 8R(n/4) + 26M(n/4) + 100(n/4)²
///
/// with all base cases equal to 1 and the addition terms dropped for
/// [`Metric::Mults`].
pub fn count_recurrence(alg: Algorithm, metric: Metric, n: u64) -> Result<BigUint> {
    let k = require_power(alg, n)?;
    Ok(match alg {
        Algorithm::NaiveGram => naive_gram_count(metric, n),
        Algorithm::NaiveGemm => naive_gemm_count(metric, n),
        Algorithm::Winograd => winograd_series(metric, k).pop().expect("non-empty"),
        Algorithm::StrassenXxt => {
            let m = winograd_series(metric, k);
            let mut s = BigUint::one();
            for i in 1..=k {
                let half_sq = big(4).pow(i - 1);
                s = s * 4u32 + &m[i as usize - 1] * 2u32 + half_sq * adds(metric, STRASSEN_XXT_ADDITIONS);
            }
            s
        }
        Algorithm::Rxtx => {
            let m = winograd_series(metric, k);
            let mut r = BigUint::one();
            for j in 1..=k / 2 {
                let quarter_sq = big(16).pow(j - 1);
                r = r * 8u32 + &m[2 * (j as usize - 1)] * 26u32 + quarter_sq * adds(metric, RXTX_ADDITIONS);
            }
            r
        }
    })
}

/// Coefficients of the closed forms, stored exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostModel {
    /// R(n) = α·n^{log₂7} + β·n^{3/2}
    pub rxtx_alpha: BigRational,
    pub rxtx_beta: BigRational,
    /// S(n) = γ·n^{log₂7} + δ·n²
    pub strassen_gamma: BigRational,
    pub strassen_delta: BigRational,
    /// R₊(n) = a·n^{log₂7} + b·n² + c·n^{3/2}
    pub rxtx_plus: [BigRational; 3],
    /// S₊(n) = a·n^{log₂7} + b·n²·log₂n + c·n²
    pub strassen_plus: [BigRational; 3],
    /// M₊(n) = a·n^{log₂7} + b·n²
    pub winograd_plus: [BigRational; 2],
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            rxtx_alpha: rat(26, 41),
            rxtx_beta: rat(15, 41),
            strassen_gamma: rat(2, 3),
            strassen_delta: rat(1, 3),
            rxtx_plus: [rat(156, 41), rat(-615, 164), rat(155, 164)],
            strassen_plus: [rat(4, 1), rat(-7, 4), rat(-3, 1)],
            winograd_plus: [rat(6, 1), rat(-5, 1)],
        }
    }
}

impl CostModel {
    /// Every closed form must give exactly 1 at n = 1.
    pub fn satisfies_unit_base(&self) -> bool {
        let one = BigRational::one();
        [
            &self.rxtx_alpha + &self.rxtx_beta,
            &self.strassen_gamma + &self.strassen_delta,
            self.rxtx_plus.iter().sum(),
            &self.strassen_plus[0] + &self.strassen_plus[2],
            self.winograd_plus.iter().sum(),
        ]
        .iter()
        .all(|v| *v == one)
    }

    /// Evaluates the closed form at `n`, using n^{log₂7} = 7^{log₂n} and
    /// n^{3/2} = 8^{log₄n}.
    pub fn closed_form(&self, alg: Algorithm, metric: Metric, n: u64) -> Result<BigRational> {
        let k = require_power(alg, n)?;
        let pow7 = rat_u(&big(7).pow(k));
        let n2 = rat_u(&(big(n) * big(n)));
        Ok(match (alg, metric) {
            (Algorithm::NaiveGram, m) => rat_u(&naive_gram_count(m, n)),
            (Algorithm::NaiveGemm, m) => rat_u(&naive_gemm_count(m, n)),
            (Algorithm::Winograd, Metric::Mults) => pow7,
            (Algorithm::Winograd, Metric::TotalOps) => &self.winograd_plus[0] * pow7 + &self.winograd_plus[1] * n2,
            (Algorithm::StrassenXxt, Metric::Mults) => &self.strassen_gamma * pow7 + &self.strassen_delta * n2,
            (Algorithm::StrassenXxt, Metric::TotalOps) => {
                let lg = BigRational::from_integer(BigInt::from(k));
                &self.strassen_plus[0] * pow7 + &self.strassen_plus[1] * &n2 * lg + &self.strassen_plus[2] * &n2
            }
            (Algorithm::Rxtx, m) => {
                let n32 = rat_u(&big(8).pow(k / 2));
                match m {
                    Metric::Mults => &self.rxtx_alpha * pow7 + &self.rxtx_beta * n32,
                    Metric::TotalOps => {
                        &self.rxtx_plus[0] * pow7 + &self.rxtx_plus[1] * n2 + &self.rxtx_plus[2] * n32
                    }
                }
            }
        })
    }
}

pub fn count_closed_form(alg: Algorithm, metric: Metric, n: u64) -> Result<BigRational> {
    CostModel::default().closed_form(alg, metric, n)
}

/// Decision taken for a Gram product of a given size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GramStep {
    Naive,
    StrassenXxt,
    Rxtx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GemmStep {
    Naive,
    Winograd,
}

/// Result of the optimal-cutoff search: the count plus the decision made at
/// every power-of-two size up to n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalCount {
    pub value: BigUint,
    pub gram_steps: Vec<(u64, GramStep)>,
    pub gemm_steps: Vec<(u64, GemmStep)>,
}

/// Cheapest count when every recursion level may stop and fall back to a
/// cheaper method.
///
/// General products choose between the naive kernel and one more
/// Strassen–Winograd level. For Gram products, `StrassenXxt` chooses between
/// naive and one more recursive-Strassen level; `Rxtx` may additionally take
/// an RXTX level wherever the size is divisible by 4, and at every level
/// switches to whichever method is cheapest. Ties go to the simpler method.
/// `n` must be a power of two (any size for the naive algorithms).
pub fn count_optimal_cutoff(alg: Algorithm, metric: Metric, n: u64) -> Result<OptimalCount> {
    match alg {
        Algorithm::NaiveGram => {
            return Ok(OptimalCount { value: naive_gram_count(metric, n), gram_steps: vec![], gemm_steps: vec![] })
        }
        Algorithm::NaiveGemm => {
            return Ok(OptimalCount { value: naive_gemm_count(metric, n), gram_steps: vec![], gemm_steps: vec![] })
        }
        _ => {}
    }
    let k = log2_exact(n).ok_or(Error::InvalidSize { n, reason: "needs a power of 2" })?;
    let mut gemm = vec![BigUint::one()];
    let mut gemm_steps = vec![(1u64, GemmStep::Naive)];
    for i in 1..=k {
        let size = 1u64 << i;
        let naive = naive_gemm_count(metric, size);
        let rec = &gemm[i as usize - 1] * 7u32 + big(4).pow(i - 1) * adds(metric, WINOGRAD_ADDITIONS);
        let (v, step) = if rec < naive { (rec, GemmStep::Winograd) } else { (naive, GemmStep::Naive) };
        gemm.push(v);
        gemm_steps.push((size, step));
    }
    if alg == Algorithm::Winograd {
        return Ok(OptimalCount { value: gemm[k as usize].clone(), gram_steps: vec![], gemm_steps });
    }
    let allow_rxtx = alg == Algorithm::Rxtx;
    let mut gram = vec![BigUint::one()];
    let mut gram_steps = vec![(1u64, GramStep::Naive)];
    for i in 1..=k as usize {
        let size = 1u64 << i;
        let mut best = (naive_gram_count(metric, size), GramStep::Naive);
        let s = &gram[i - 1] * 4u32 + &gemm[i - 1] * 2u32 + big(4).pow(i as u32 - 1) * adds(metric, STRASSEN_XXT_ADDITIONS);
        if s < best.0 {
            best = (s, GramStep::StrassenXxt);
        }
        if allow_rxtx && i >= 2 {
            let r = &gram[i - 2] * 8u32 + &gemm[i - 2] * 26u32 + big(4).pow(i as u32 - 2) * adds(metric, RXTX_ADDITIONS);
            if r < best.0 {
                best = (r, GramStep::Rxtx);
            }
        }
        gram.push(best.0);
        gram_steps.push((size, best.1));
    }
    Ok(OptimalCount { value: gram[k as usize].clone(), gram_steps, gemm_steps })
}

/// One row of the ratio table. Counts without a defined value at this size
/// (RXTX without cutoff at a non-power of 4) are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRow {
    pub n: u64,
    pub r: Option<BigUint>,
    pub s: BigUint,
    pub m: BigUint,
    pub naive_mults: BigUint,
    pub r_plus: Option<BigUint>,
    pub s_plus: BigUint,
    pub m_plus: BigUint,
    pub naive_ops: BigUint,
    pub opt: Option<OptColumns>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptColumns {
    pub r: BigUint,
    pub s: BigUint,
    pub r_plus: BigUint,
    pub s_plus: BigUint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TableOptions {
    pub include_opt: bool,
    /// Tabulate every power of two up to 4^k instead of powers of 4 only.
    pub powers_of_two: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub rows: Vec<CountRow>,
    pub options: TableOptions,
}

pub const MAX_TABLE_EXP: u32 = 20;

/// Counts and ratios for n = 4¹…4^max_exp.
pub fn emit_ratio_table(max_exp: u32, options: TableOptions) -> Result<CountTable> {
    if max_exp == 0 || max_exp > MAX_TABLE_EXP {
        return Err(Error::InvalidArgument(format!("max exponent must be in 1..={MAX_TABLE_EXP}")));
    }
    let sizes: Vec<u64> = if options.powers_of_two {
        (1..=2 * max_exp).map(|i| 1u64 << i).collect()
    } else {
        (1..=max_exp).map(|i| 1u64 << (2 * i)).collect()
    };
    let mut rows = Vec::with_capacity(sizes.len());
    for n in sizes {
        let rxtx_ok = n.trailing_zeros() % 2 == 0;
        let get = |a, m| count_recurrence(a, m, n);
        let opt = if options.include_opt {
            Some(OptColumns {
                r: count_optimal_cutoff(Algorithm::Rxtx, Metric::Mults, n)?.value,
                s: count_optimal_cutoff(Algorithm::StrassenXxt, Metric::Mults, n)?.value,
                r_plus: count_optimal_cutoff(Algorithm::Rxtx, Metric::TotalOps, n)?.value,
                s_plus: count_optimal_cutoff(Algorithm::StrassenXxt, Metric::TotalOps, n)?.value,
            })
        } else {
            None
        };
        rows.push(CountRow {
            n,
            r: rxtx_ok.then(|| get(Algorithm::Rxtx, Metric::Mults)).transpose()?,
            s: get(Algorithm::StrassenXxt, Metric::Mults)?,
            m: get(Algorithm::Winograd, Metric::Mults)?,
            naive_mults: get(Algorithm::NaiveGram, Metric::Mults)?,
            r_plus: rxtx_ok.then(|| get(Algorithm::Rxtx, Metric::TotalOps)).transpose()?,
            s_plus: get(Algorithm::StrassenXxt, Metric::TotalOps)?,
            m_plus: get(Algorithm::Winograd, Metric::TotalOps)?,
            naive_ops: get(Algorithm::NaiveGram, Metric::TotalOps)?,
            opt,
        });
    }
    Ok(CountTable { rows, options })
}

/// `num/den` rounded half-up to six decimal places.
pub fn decimal6(num: &BigUint, den: &BigUint) -> String {
    let scaled = num * big(1_000_000) * 2u32 + den;
    let q = scaled.div_floor(&(den * 2u32));
    let (int, frac) = q.div_rem(&big(1_000_000));
    format!("{int}.{:06}", frac.to_u64().expect("below 10^6"))
}

pub fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    let r = BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()));
    r.to_f64().unwrap_or(f64::NAN)
}

impl CountRow {
    /// Named ratios in CSV column order.
    pub fn ratios(&self) -> Vec<(&'static str, Option<(&BigUint, &BigUint)>)> {
        let mut v = vec![
            ("r_over_s", self.r.as_ref().map(|r| (r, &self.s))),
            ("r_over_naive", self.r.as_ref().map(|r| (r, &self.naive_mults))),
            ("r_plus_over_s_plus", self.r_plus.as_ref().map(|r| (r, &self.s_plus))),
            ("r_plus_over_naive_ops", self.r_plus.as_ref().map(|r| (r, &self.naive_ops))),
        ];
        if let Some(o) = &self.opt {
            v.extend([
                ("r_opt_over_s_opt", Some((&o.r, &o.s))),
                ("r_opt_over_naive", Some((&o.r, &self.naive_mults))),
                ("r_plus_opt_over_s_plus_opt", Some((&o.r_plus, &o.s_plus))),
                ("r_plus_opt_over_naive_ops", Some((&o.r_plus, &self.naive_ops))),
            ]);
        }
        v
    }
}

/// Column names of [`CountTable::to_csv`], in order.
pub fn csv_columns(include_opt: bool) -> Vec<&'static str> {
    let mut cols = vec!["n", "R", "S", "M", "naive_mults", "R_plus", "S_plus", "M_plus", "naive_ops"];
    if include_opt {
        cols.extend(["R_opt", "S_opt", "R_plus_opt", "S_plus_opt"]);
    }
    cols.extend(["r_over_s", "r_over_naive", "r_plus_over_s_plus", "r_plus_over_naive_ops"]);
    if include_opt {
        cols.extend([
            "r_opt_over_s_opt",
            "r_opt_over_naive",
            "r_plus_opt_over_s_plus_opt",
            "r_plus_opt_over_naive_ops",
        ]);
    }
    cols
}

impl CountTable {
    pub fn to_csv(&self) -> String {
        let mut out = csv_columns(self.options.include_opt).join(",");
        out.push('\n');
        let opt_str = |v: &Option<BigUint>| v.as_ref().map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            let mut cells = vec![
                row.n.to_string(),
                opt_str(&row.r),
                row.s.to_string(),
                row.m.to_string(),
                row.naive_mults.to_string(),
                opt_str(&row.r_plus),
                row.s_plus.to_string(),
                row.m_plus.to_string(),
                row.naive_ops.to_string(),
            ];
            if let Some(o) = &row.opt {
                cells.extend([o.r.to_string(), o.s.to_string(), o.r_plus.to_string(), o.s_plus.to_string()]);
            }
            for (_, pair) in row.ratios() {
                cells.push(pair.map(|(a, b)| decimal6(a, b)).unwrap_or_default());
            }
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}
