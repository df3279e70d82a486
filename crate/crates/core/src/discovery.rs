//! Small-scale search for product-minimal X·Xᵗ schemes.
//!
//! X is a d×d matrix of scalars x₁…x_{d²} (row-major). A candidate product
//! is (α·x)(β·x) with α, β ∈ {−1, 0, 1}^{d²}; its expansion is a quadratic
//! form, stored as an integer vector over the monomials xᵢxⱼ (i ≤ j). A set
//! of products covers the targets when every target entry of X·Xᵗ lies in
//! their linear span.
//!
//! The cover search works in the quotient of the form space by the span T
//! of the targets: k independent products cover T exactly when their images
//! span a subspace of dimension k − dim T. Subspaces are enumerated by
//! increasing dimension and deduplicated by a canonical echelon key, so the
//! first feasible dimension found is the minimum over the candidate pool.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed as _, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scheme::{Algebra, BilinearScheme, OutputSpec, ProductSpec};

type Q = Rational64;

/// Index of monomial xᵢxⱼ (i ≤ j) among the N(N+1)/2 monomials in N
/// variables, ordered (0,0), (0,1), …, (0,N−1), (1,1), ….
pub fn monomial_index(n_vars: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n_vars - i * (i + 1) / 2 + j
}

fn num_monomials(n_vars: usize) -> usize {
    n_vars * (n_vars + 1) / 2
}

#[cfg(test)]
fn monomial_pairs(n_vars: usize) -> Vec<(usize, usize)> {
    (0..n_vars).flat_map(|i| (i..n_vars).map(move |j| (i, j))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidateProduct {
    pub alpha: Vec<i8>,
    pub beta: Vec<i8>,
    /// Integer coefficients over the monomials xᵢxⱼ, i ≤ j.
    pub form: Vec<i64>,
}

impl CandidateProduct {
    pub fn new(alpha: Vec<i8>, beta: Vec<i8>) -> Self {
        let n = alpha.len();
        assert_eq!(n, beta.len(), "alpha/beta length mismatch");
        let mut form = vec![0i64; num_monomials(n)];
        for i in 0..n {
            for j in 0..n {
                let c = i64::from(alpha[i]) * i64::from(beta[j]);
                if c != 0 {
                    form[monomial_index(n, i, j)] += c;
                }
            }
        }
        Self { alpha, beta, form }
    }

    pub fn n_vars(&self) -> usize {
        self.alpha.len()
    }

    /// Symmetric matrix S with (α·x)(β·x) = xᵗSx, i.e. (αβᵗ + βαᵗ)/2.
    pub fn symmetric_form(&self) -> Vec<Vec<BigRational>> {
        let n = self.n_vars();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = i64::from(self.alpha[i]) * i64::from(self.beta[j])
                            + i64::from(self.alpha[j]) * i64::from(self.beta[i]);
                        BigRational::from_integer(BigInt::from(v)) * &half
                    })
                    .collect()
            })
            .collect()
    }

    fn negated(&self) -> Self {
        Self {
            alpha: self.alpha.iter().map(|v| -v).collect(),
            beta: self.beta.clone(),
            form: self.form.iter().map(|v| -v).collect(),
        }
    }

    /// Same product up to sign, with the first nonzero form coefficient
    /// positive and the first nonzero entry of α positive.
    fn canonical(self) -> Self {
        let c = match self.form.iter().find(|&&v| v != 0) {
            Some(&v) if v < 0 => self.negated(),
            _ => self,
        };
        match c.alpha.iter().find(|&&v| v != 0) {
            Some(&v) if v < 0 => Self {
                alpha: c.alpha.iter().map(|v| -v).collect(),
                beta: c.beta.iter().map(|v| -v).collect(),
                form: c.form,
            },
            _ => c,
        }
    }
}

fn linear_form(coeffs: &[i8]) -> String {
    let mut s = String::new();
    for (i, &c) in coeffs.iter().enumerate().filter(|(_, &c)| c != 0) {
        match (s.is_empty(), c < 0) {
            (true, false) => {}
            (true, true) => s.push('-'),
            (false, false) => s.push_str(" + "),
            (false, true) => s.push_str(" - "),
        }
        s.push_str(&format!("x{}", i + 1));
    }
    s
}

impl fmt::Display for CandidateProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})({})", linear_form(&self.alpha), linear_form(&self.beta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Every pair of nonzero ternary vectors.
    Exhaustive,
    /// `count` pairs drawn uniformly with a seeded ChaCha8 generator.
    Random { count: usize, seed: u64 },
}

/// Largest variable count for which exhaustive enumeration is allowed
/// (3⁴ − 1 = 80 vectors, 6400 pairs).
pub const MAX_EXHAUSTIVE_VARS: usize = 4;

#[derive(Debug, Clone)]
pub struct CandidatePool {
    /// Raw (α, β) pairs examined, before deduplication.
    pub drawn: usize,
    /// Distinct forms up to sign, sorted by form.
    pub candidates: Vec<CandidateProduct>,
}

fn ternary_vectors(n: usize) -> Vec<Vec<i8>> {
    let total = 3usize.pow(n as u32);
    (0..total)
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let d = (code % 3) as i8 - 1;
                    code /= 3;
                    d
                })
                .collect::<Vec<i8>>()
        })
        .filter(|v| v.iter().any(|&c| c != 0))
        .collect()
}

/// Candidate products for a `dim`×`dim` input.
pub fn sample_candidates(dim: usize, mode: SamplingMode) -> Result<CandidatePool> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let n = dim * dim;
    let mut seen: HashMap<Vec<i64>, CandidateProduct> = HashMap::new();
    let mut keep = |c: CandidateProduct| {
        if c.form.iter().any(|&v| v != 0) {
            let c = c.canonical();
            seen.entry(c.form.clone()).or_insert(c);
        }
    };
    let drawn = match mode {
        SamplingMode::Exhaustive => {
            if n > MAX_EXHAUSTIVE_VARS {
                return Err(Error::InvalidArgument(format!(
                    "exhaustive enumeration supports at most {MAX_EXHAUSTIVE_VARS} variables, got {n}; use random sampling"
                )));
            }
            let vs = ternary_vectors(n);
            for a in &vs {
                for b in &vs {
                    keep(CandidateProduct::new(a.clone(), b.clone()));
                }
            }
            vs.len() * vs.len()
        }
        SamplingMode::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draw = |rng: &mut ChaCha8Rng| loop {
                let v: Vec<i8> = (0..n).map(|_| rng.random_range(-1i8..=1)).collect();
                if v.iter().any(|&c| c != 0) {
                    break v;
                }
            };
            for _ in 0..count {
                let a = draw(&mut rng);
                let b = draw(&mut rng);
                keep(CandidateProduct::new(a, b));
            }
            count
        }
    };
    let mut candidates: Vec<CandidateProduct> = seen.into_values().collect();
    candidates.sort_by(|a, b| a.form.cmp(&b.form).then_with(|| a.alpha.cmp(&b.alpha)));
    Ok(CandidatePool { drawn, candidates })
}

/// Entries of X·Xᵗ to be covered, as forms over the monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    pub dim: usize,
    /// Zero-based (row, col) of each target entry.
    pub entries: Vec<(usize, usize)>,
    pub forms: Vec<Vec<i64>>,
}

impl TargetSet {
    /// Entries (i, j) of X·Xᵗ for the given positions.
    pub fn from_entries(dim: usize, entries: &[(usize, usize)]) -> Result<Self> {
        let n = dim * dim;
        let mut forms = Vec::with_capacity(entries.len());
        for &(i, j) in entries {
            if i >= dim || j >= dim {
                return Err(Error::InvalidArgument(format!("target C{}{} outside {dim}x{dim}", i + 1, j + 1)));
            }
            let mut f = vec![0i64; num_monomials(n)];
            for k in 0..dim {
                let (a, b) = (i * dim + k, j * dim + k);
                f[monomial_index(n, a, b)] += 1;
            }
            forms.push(f);
        }
        Ok(Self { dim, entries: entries.to_vec(), forms })
    }

    pub fn name(&self, t: usize) -> String {
        let (i, j) = self.entries[t];
        format!("C{}{}", i + 1, j + 1)
    }

    /// Whether these are exactly the upper-triangle entries in row-major
    /// order, so a cover can be turned into a complete scheme.
    pub fn is_full_upper(&self) -> bool {
        let d = self.dim;
        let want: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
        self.entries == want
    }
}

/// All upper-triangle entries of X·Xᵗ for a `dim`×`dim` input.
pub fn xxt_targets(dim: usize) -> TargetSet {
    let entries: Vec<(usize, usize)> = (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect();
    TargetSet::from_entries(dim, &entries).expect("in range")
}

fn to_q(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| Q::from_integer(x)).collect()
}

/// Reduced row echelon form in place; drops zero rows, returns pivots.
fn rref(rows: &mut Vec<Vec<Q>>) -> Vec<usize> {
    let width = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let lead = rows[r][c];
        for v in rows[r].iter_mut() {
            *v /= lead;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c];
                let (src, dst) = if i < r {
                    let (a, b) = rows.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = rows.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

fn rank(vectors: &[Vec<Q>]) -> usize {
    let mut rows = vectors.to_vec();
    rref(&mut rows).len()
}

/// Echelon basis for membership tests and reduction.
#[derive(Debug, Clone)]
struct Echelon {
    rows: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl Echelon {
    fn new(mut rows: Vec<Vec<Q>>) -> Self {
        let pivots = rref(&mut rows);
        Self { rows, pivots }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut [Q]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let f = v[p];
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= f * r;
                }
            }
        }
    }

    fn contains(&self, v: &[Q]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(Zero::is_zero)
    }

    /// Coordinates of v in the complement of the pivot columns after
    /// reduction: the image in the quotient by this subspace.
    fn quotient_image(&self, v: &[Q]) -> Vec<Q> {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.into_iter().enumerate().filter(|(i, _)| !self.pivots.contains(i)).map(|(_, x)| x).collect()
    }

    /// Canonical key: each echelon row scaled to a primitive integer vector.
    fn key(&self) -> Vec<i64> {
        self.rows.iter().flat_map(|r| primitive(r).unwrap_or_default()).collect()
    }
}

/// Primitive integer vector on the same line, first nonzero entry positive.
fn primitive(v: &[Q]) -> Option<Vec<i64>> {
    let first = v.iter().find(|x| !x.is_zero())?;
    let lcm = v.iter().fold(1i64, |acc, x| acc.lcm(x.denom()));
    let ints: Vec<i64> = v.iter().map(|x| (x * Q::from_integer(lcm)).to_integer()).collect();
    let g = ints.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    let sign = if first.is_negative() { -1 } else { 1 };
    Some(ints.into_iter().map(|x| sign * x / g).collect())
}

/// Solves Σ cᵢ vᵢ = t exactly; `None` when t is outside the span. Free
/// variables are set to zero.
fn solve_combination(vectors: &[&[i64]], target: &[i64]) -> Option<Vec<BigRational>> {
    let k = vectors.len();
    let m = target.len();
    // Augmented system: m equations in k unknowns.
    let mut rows: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut r: Vec<BigRational> =
                vectors.iter().map(|v| BigRational::from_integer(BigInt::from(v[i]))).collect();
            r.push(BigRational::from_integer(BigInt::from(target[i])));
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let lead = rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v /= &lead;
        }
        for i in 0..m {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let src = rows[r].clone();
                for (d, s) in rows[i].iter_mut().zip(&src) {
                    *d -= &f * s;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); k];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][k].clone();
    }
    Some(x)
}

/// A minimal identity t = Σ cᵢ pᵢ with every cᵢ nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub target: usize,
    /// (candidate index, coefficient), indices ascending.
    pub terms: Vec<(usize, BigRational)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationOptions {
    /// Largest relation size to look for, 1..=3.
    pub max_size: usize,
    /// Stop after this many relations per target.
    pub per_target_cap: usize,
}

impl Default for RelationOptions {
    fn default() -> Self {
        Self { max_size: 2, per_target_cap: 64 }
    }
}

/// Minimal relations expressing single targets through candidate products.
/// Relations are grouped by target, then ordered by size and index.
pub fn enumerate_relations(
    candidates: &[CandidateProduct],
    targets: &TargetSet,
    opts: RelationOptions,
) -> Result<Vec<Relation>> {
    if !(1..=3).contains(&opts.max_size) {
        return Err(Error::InvalidArgument("relation size must be 1, 2 or 3".into()));
    }
    let mut out = Vec::new();
    for (ti, tf) in targets.forms.iter().enumerate() {
        let line = Echelon::new(vec![to_q(tf)]);
        let images: Vec<Vec<Q>> = candidates.iter().map(|c| line.quotient_image(&to_q(&c.form))).collect();
        let mut found: Vec<Relation> = Vec::new();
        let push = |idx: &[usize], found: &mut Vec<Relation>| -> bool {
            if found.len() >= opts.per_target_cap {
                return false;
            }
            let vs: Vec<&[i64]> = idx.iter().map(|&i| candidates[i].form.as_slice()).collect();
            if let Some(c) = solve_combination(&vs, tf) {
                if c.iter().all(|x| !x.is_zero()) {
                    found.push(Relation { target: ti, terms: idx.iter().copied().zip(c).collect() });
                }
            }
            true
        };
        // Size 1: candidates on the target line.
        let mut directions: Vec<(Vec<i64>, Vec<usize>)> = Vec::new();
        let mut dir_index: HashMap<Vec<i64>, usize> = HashMap::new();
        for (i, img) in images.iter().enumerate() {
            match primitive(img) {
                None => {
                    push(&[i], &mut found);
                }
                Some(key) => {
                    let slot = *dir_index.entry(key.clone()).or_insert_with(|| {
                        directions.push((key, Vec::new()));
                        directions.len() - 1
                    });
                    directions[slot].1.push(i);
                }
            }
        }
        // Size 2: parallel images; the difference lands on the target line.
        if opts.max_size >= 2 {
            let mut pairs: Vec<[usize; 2]> = directions
                .iter()
                .flat_map(|(_, m)| {
                    m.iter().enumerate().flat_map(move |(a, &i)| m[a + 1..].iter().map(move |&j| [i, j]))
                })
                .collect();
            pairs.sort();
            for p in pairs {
                if !push(&p, &mut found) {
                    break;
                }
            }
        }
        // Size 3: pairwise non-parallel images spanning a common plane.
        if opts.max_size >= 3 && found.len() < opts.per_target_cap {
            let dir_of: HashMap<usize, usize> =
                directions.iter().enumerate().flat_map(|(d, (_, m))| m.iter().map(move |&i| (i, d))).collect();
            let mut planes: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
            let reps: Vec<usize> = directions.iter().map(|(_, m)| m[0]).collect();
            for a in 0..reps.len() {
                for b in a + 1..reps.len() {
                    let key = Echelon::new(vec![images[reps[a]].clone(), images[reps[b]].clone()]).key();
                    let e = planes.entry(key).or_default();
                    for d in [a, b] {
                        if !e.contains(&d) {
                            e.push(d);
                        }
                    }
                }
            }
            let mut triples = Vec::new();
            for dirs in planes.values().filter(|d| d.len() >= 3) {
                let members: Vec<usize> = dirs.iter().flat_map(|&d| directions[d].1.iter().copied()).collect();
                for (x, &i) in members.iter().enumerate() {
                    for (y, &j) in members.iter().enumerate().skip(x + 1) {
                        for &k in &members[y + 1..] {
                            if dir_of[&i] != dir_of[&j] && dir_of[&j] != dir_of[&k] && dir_of[&i] != dir_of[&k] {
                                let mut t = [i, j, k];
                                t.sort();
                                triples.push(t);
                            }
                        }
                    }
                }
            }
            triples.sort();
            triples.dedup();
            for t in triples {
                if !push(&t, &mut found) {
                    break;
                }
            }
        }
        found.sort_by(|a, b| {
            a.terms.len().cmp(&b.terms.len()).then_with(|| {
                let ia: Vec<usize> = a.terms.iter().map(|t| t.0).collect();
                let ib: Vec<usize> = b.terms.iter().map(|t| t.0).collect();
                ia.cmp(&ib)
            })
        });
        out.extend(found);
    }
    Ok(out)
}

/// A set of products covering all targets, with the exact combination
/// producing each target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub products: Vec<CandidateProduct>,
    /// `combinations[t][k]` multiplies product k in target t.
    pub combinations: Vec<Vec<BigRational>>,
    /// Subspaces examined during the search.
    pub examined: u64,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverOptions {
    /// Give up (with [`Error::Infeasible`]) beyond this many products.
    pub max_products: usize,
    /// Give up (with [`Error::BudgetExhausted`]) after examining this many
    /// subspaces.
    pub budget: u64,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self { max_products: 12, budget: 2_000_000 }
    }
}

struct Search<'a> {
    candidates: &'a [CandidateProduct],
    forms: Vec<Vec<Q>>,
    /// Candidates lying in the target span.
    inside: Vec<usize>,
    /// Direction classes of the remaining images, in candidate order.
    directions: Vec<(Vec<Q>, Vec<usize>)>,
    target_dim: usize,
    examined: u64,
    budget: u64,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<()> {
        self.examined += 1;
        if self.examined > self.budget {
            return Err(Error::BudgetExhausted(self.budget));
        }
        Ok(())
    }

    /// Smallest-index spanning set of size target_dim + r from the members
    /// of a subspace, if the members span its full preimage.
    fn pick(&self, dirs: &[usize], r: usize) -> Option<Vec<usize>> {
        let mut members: Vec<usize> = self.inside.clone();
        for &d in dirs {
            members.extend(&self.directions[d].1);
        }
        members.sort_unstable();
        let want = self.target_dim + r;
        let mut chosen: Vec<usize> = Vec::new();
        let mut basis: Vec<Vec<Q>> = Vec::new();
        for &m in &members {
            basis.push(self.forms[m].clone());
            if rank(&basis) == basis.len() {
                chosen.push(m);
                if chosen.len() == want {
                    return Some(chosen);
                }
            } else {
                basis.pop();
            }
        }
        None
    }
}

/// Finds a smallest set of candidates whose span contains every target.
///
/// Subspaces of the quotient by the target span are tried in increasing
/// dimension: lines through each image direction, then planes through pairs
/// of directions, then higher dimensions by extension. Within a dimension the
/// first feasible subspace in candidate order wins, and its products are
/// picked greedily by index, so the result is deterministic.
pub fn select_minimal_cover(
    candidates: &[CandidateProduct],
    targets: &TargetSet,
    opts: CoverOptions,
) -> Result<Cover> {
    if targets.forms.is_empty() {
        return Err(Error::InvalidArgument("no targets".into()));
    }
    let tspan = Echelon::new(targets.forms.iter().map(|f| to_q(f)).collect());
    let target_dim = tspan.dim();
    let forms: Vec<Vec<Q>> = candidates.iter().map(|c| to_q(&c.form)).collect();
    let mut inside = Vec::new();
    let mut directions: Vec<(Vec<Q>, Vec<usize>)> = Vec::new();
    let mut dir_index: HashMap<Vec<i64>, usize> = HashMap::new();
    for (i, f) in forms.iter().enumerate() {
        let img = tspan.quotient_image(f);
        match primitive(&img) {
            None => inside.push(i),
            Some(key) => {
                let slot = *dir_index.entry(key).or_insert_with(|| {
                    directions.push((img.clone(), Vec::new()));
                    directions.len() - 1
                });
                directions[slot].1.push(i);
            }
        }
    }
    let mut s = Search { candidates, forms, inside, directions, target_dim, examined: 0, budget: opts.budget };
    let finish = |s: &Search, chosen: Vec<usize>| -> Result<Cover> {
        let products: Vec<CandidateProduct> = chosen.iter().map(|&i| s.candidates[i].clone()).collect();
        let vs: Vec<&[i64]> = products.iter().map(|p| p.form.as_slice()).collect();
        let combinations = targets
            .forms
            .iter()
            .map(|t| solve_combination(&vs, t).expect("cover spans every target"))
            .collect();
        Ok(Cover { products, combinations, examined: s.examined })
    };

    let nd = s.directions.len();
    let mut layer: Vec<(Echelon, Vec<usize>)> = Vec::new();
    for r in 0.. {
        if target_dim + r > opts.max_products {
            return Err(Error::Infeasible(format!(
                "no cover with at most {} products among {} candidates",
                opts.max_products,
                candidates.len()
            )));
        }
        match r {
            0 => {
                s.tick()?;
                if let Some(c) = s.pick(&[], 0) {
                    return finish(&s, c);
                }
            }
            1 => {
                for d in 0..nd {
                    s.tick()?;
                    if let Some(c) = s.pick(&[d], 1) {
                        return finish(&s, c);
                    }
                }
            }
            2 => {
                // Every direction in a plane pairs with its first direction,
                // so grouping pairs by key yields exact membership.
                let mut order: Vec<Vec<i64>> = Vec::new();
                let mut planes: HashMap<Vec<i64>, (Echelon, Vec<usize>)> = HashMap::new();
                for a in 0..nd {
                    for b in a + 1..nd {
                        let e = Echelon::new(vec![s.directions[a].0.clone(), s.directions[b].0.clone()]);
                        let key = e.key();
                        let entry = planes.entry(key.clone()).or_insert_with(|| {
                            order.push(key);
                            (e, Vec::new())
                        });
                        for d in [a, b] {
                            if !entry.1.contains(&d) {
                                entry.1.push(d);
                            }
                        }
                    }
                }
                for key in &order {
                    s.tick()?;
                    let dirs = &planes[key].1;
                    if let Some(c) = s.pick(dirs, 2) {
                        return finish(&s, c);
                    }
                }
                layer = order.into_iter().map(|k| planes.remove(&k).expect("present")).collect();
            }
            _ => {
                let mut next: Vec<(Echelon, Vec<usize>)> = Vec::new();
                let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
                for (space, dirs) in &layer {
                    for d in 0..nd {
                        if dirs.contains(&d) {
                            continue;
                        }
                        let mut rows = space.rows.clone();
                        rows.push(s.directions[d].0.clone());
                        let e = Echelon::new(rows);
                        let key = e.key();
                        if seen.insert(key, ()).is_some() {
                            continue;
                        }
                        s.tick()?;
                        let members: Vec<usize> = (0..nd).filter(|&x| e.contains(&s.directions[x].0)).collect();
                        if let Some(c) = s.pick(&members, r) {
                            return finish(&s, c);
                        }
                        next.push((e, members));
                    }
                }
                layer = next;
            }
        }
    }
    unreachable!("loop returns or errors")
}

/// Renders Σ cₖ·{name}k over the nonzero coefficients, e.g. `p1 - 1/2·p3`.
pub fn format_combination(coeffs: &[BigRational], name: &str) -> String {
    let mut s = String::new();
    for (k, c) in coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        let mag = c.abs();
        match (s.is_empty(), c.is_negative()) {
            (true, true) => s.push('-'),
            (false, true) => s.push_str(" - "),
            (false, false) => s.push_str(" + "),
            (true, false) => {}
        }
        if !mag.is_one() {
            s.push_str(&format!("{mag}·"));
        }
        s.push_str(&format!("{name}{}", k + 1));
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn small_rational(x: &BigRational) -> Result<Rational64> {
    match (x.numer().to_i64(), x.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Rational64::new(n, d)),
        _ => Err(Error::Overflow("scheme coefficient")),
    }
}

/// Turns a cover of all upper-triangle entries into a scheme on a d×d grid
/// of scalar blocks. Combinations may use rational coefficients and rely on
/// commuting scalars, so the scheme is tagged [`Algebra::Commutative`].
pub fn cover_to_scheme(cover: &Cover, targets: &TargetSet) -> Result<BilinearScheme> {
    if !targets.is_full_upper() {
        return Err(Error::InvalidArgument("a scheme needs every upper-triangle entry as a target".into()));
    }
    let products = cover
        .products
        .iter()
        .map(|p| ProductSpec {
            left: p.alpha.iter().map(|&v| i64::from(v)).collect(),
            right: p.beta.iter().map(|&v| i64::from(v)).collect(),
        })
        .collect();
    let outputs = targets
        .entries
        .iter()
        .zip(&cover.combinations)
        .map(|(&(row, col), comb)| {
            Ok(OutputSpec { row, col, products: comb.iter().map(small_rational).collect::<Result<_>>()?, calls: vec![] })
        })
        .collect::<Result<Vec<_>>>()?;
    let scheme = BilinearScheme { grid: targets.dim, algebra: Algebra::Commutative, products, calls: vec![], outputs };
    scheme.validate()?;
    Ok(scheme)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscoveryConfig {
    pub dim: usize,
    pub mode: SamplingMode,
    pub cover: CoverOptions,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self { dim: 2, mode: SamplingMode::Exhaustive, cover: CoverOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub drawn: usize,
    pub distinct: usize,
    pub cover: Cover,
    pub scheme: BilinearScheme,
}

/// Samples candidates, finds a minimal cover of X·Xᵗ, and emits it as a
/// scheme.
pub fn discover(config: &DiscoveryConfig) -> Result<Discovery> {
    let pool = sample_candidates(config.dim, config.mode)?;
    let targets = xxt_targets(config.dim);
    let cover = select_minimal_cover(&pool.candidates, &targets, config.cover)?;
    let scheme = cover_to_scheme(&cover, &targets)?;
    Ok(Discovery { drawn: pool.drawn, distinct: pool.candidates.len(), cover, scheme })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_indexing() {
        let pairs = monomial_pairs(4);
        assert_eq!(pairs.len(), 10);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            assert_eq!(monomial_index(4, i, j), k);
            assert_eq!(monomial_index(4, j, i), k);
        }
    }

    #[test]
    fn display() {
        let c = CandidateProduct::new(vec![1, 0, -1, 0], vec![0, 1, 0, 1]);
        assert_eq!(c.to_string(), "(x1 - x3)(x2 + x4)");
        let c = CandidateProduct::new(vec![-1, 0, 0, 0], vec![0, 0, 0, 1]);
        assert_eq!(c.to_string(), "(-x1)(x4)");
    }

    #[test]
    fn rref_and_keys() {
        let a = Echelon::new(vec![to_q(&[2, 4, 0]), to_q(&[1, 1, 1])]);
        let b = Echelon::new(vec![to_q(&[3, 5, 1]), to_q(&[0, 2, -2])]);
        assert_eq!(a.key(), b.key());
        assert!(a.contains(&to_q(&[3, 5, 1])));
        assert!(!a.contains(&to_q(&[0, 0, 1])));
        assert_eq!(primitive(&to_q(&[0, -2, 4])), Some(vec![0, 1, -2]));
    }

    #[test]
    fn solve_exact() {
        let a = [1i64, 0, 1];
        let b = [0i64, 1, 1];
        let x = solve_combination(&[&a, &b], &[2, 3, 5]).unwrap();
        assert_eq!(x, vec![BigRational::from_integer(2.into()), BigRational::from_integer(3.into())]);
        assert!(solve_combination(&[&a, &b], &[1, 1, 0]).is_none());
    }
}
