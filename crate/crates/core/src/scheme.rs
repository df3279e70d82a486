//! Block algorithms for X·Xᵗ stored as data: per-product coefficient
//! vectors, recursive Gram calls, and output combinations. Includes the
//! 26-product RXTX table, the 2x2 recursive-Strassen baseline, the exact
//! verifier, and the plain-text exchange format.

use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expr::{indexed, parse_signed_sum};

/// How block monomials behave under verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub enum Algebra {
    /// Blocks are matrices: Xₐ·X_bᵗ and X_b·Xₐᵗ are distinct monomials.
    /// Only block schemes can be executed recursively.
    #[default]
    Block,
    /// Entries are scalars: xₐx_b = x_bxₐ.
    Commutative,
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algebra::Block => "block",
            Algebra::Commutative => "commutative",
        })
    }
}

/// Product k realizes (Σᵢ leftᵢ Xᵢ)·(Σⱼ rightⱼ Xⱼ)ᵗ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpec {
    pub left: Vec<i64>,
    pub right: Vec<i64>,
}

/// One upper-triangle output block C(row, col), zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    pub row: usize,
    pub col: usize,
    pub products: Vec<Rational64>,
    pub calls: Vec<Rational64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearScheme {
    pub grid: usize,
    pub algebra: Algebra,
    pub products: Vec<ProductSpec>,
    /// Zero-based block index of each recursive Gram call.
    pub calls: Vec<usize>,
    /// Upper-triangle outputs in row-major order.
    pub outputs: Vec<OutputSpec>,
}

const RXTX_PRODUCTS: [(&str, &str); 26] = [
    ("-X2 + X3 - X4 + X8", "X8 + X11"),
    ("X1 - X5 - X6 + X7", "X15 + X5"),
    ("-X2 + X12", "-X10 + X16 + X12"),
    ("X9 - X6", "X13 + X9 - X14"),
    ("X2 + X11", "-X6 + X15 - X7"),
    ("X6 + X11", "X6 + X7 - X11"),
    ("X11", "X6 + X7"),
    ("X2", "-X14 - X10 + X6 - X15 + X7 + X16 + X12"),
    ("X6", "X13 + X9 - X14 - X10 + X6 + X7 - X11"),
    ("X2 - X3 + X7 + X11 + X4 - X8", "X11"),
    ("X5 + X6 - X7", "X5"),
    ("X2 - X3 + X4", "X8"),
    ("-X1 + X5 + X6 + X3 - X7 + X11", "X15"),
    ("-X1 + X5 + X6", "X13 + X9 + X15"),
    ("X2 + X4 - X8", "X11 + X16 + X12"),
    ("X1 - X8", "X9 - X16"),
    ("X12", "X10 - X12"),
    ("X9", "X13 - X14"),
    ("-X2 + X3", "-X15 + X7 + X8"),
    ("X5 + X9 - X8", "X9"),
    ("X8", "X9 - X8 + X12"),
    ("-X6 + X7", "X5 + X7 - X11"),
    ("X1", "X13 - X5 + X16"),
    ("-X1 + X4 + X12", "X16"),
    ("X9 + X2 + X10", "X14"),
    ("X6 + X10 + X12", "X10"),
];

const RXTX_CALLS: [usize; 8] = [1, 2, 3, 4, 13, 14, 15, 16];

const RXTX_OUTPUTS: [(&str, &str); 10] = [
    ("C11", "s1 + s2 + s3 + s4"),
    ("C12", "m2 - m5 - m7 + m11 + m12 + m13 + m19"),
    ("C13", "m1 + m3 + m12 + m15 + m16 + m17 + m21 - m24"),
    ("C14", "m2 - m3 - m5 - m7 - m8 + m11 + m13 - m17 + m23 + m24"),
    ("C22", "m1 + m6 - m7 + m10 + m11 + m12 + m22"),
    ("C23", "m1 - m4 + m6 - m7 - m9 + m10 + m12 + m18 + m20 + m21"),
    ("C24", "m2 + m4 + m11 + m14 + m16 - m18 - m20 + m23"),
    ("C33", "m4 - m6 + m7 + m9 - m17 - m18 + m26"),
    ("C34", "m3 + m5 + m7 + m8 + m17 + m18 + m25"),
    ("C44", "s5 + s6 + s7 + s8"),
];

/// The RXTX block scheme: 26 general products and 8 recursive calls on a
/// 4x4 block grid.
pub fn rxtx_scheme() -> &'static BilinearScheme {
    static SCHEME: OnceLock<BilinearScheme> = OnceLock::new();
    SCHEME.get_or_init(|| {
        let calls: Vec<usize> = RXTX_CALLS.iter().map(|b| b - 1).collect();
        BilinearScheme::from_text_tables(4, &RXTX_PRODUCTS, calls, &RXTX_OUTPUTS)
            .expect("built-in RXTX table is well formed")
    })
}

/// Recursive Strassen for X·Xᵗ on a 2x2 grid [A B; C D]:
/// C11 = AAᵗ + BBᵗ, C12 = ACᵗ + BDᵗ, C22 = CCᵗ + DDᵗ.
pub fn strassen_xxt_scheme() -> &'static BilinearScheme {
    static SCHEME: OnceLock<BilinearScheme> = OnceLock::new();
    SCHEME.get_or_init(|| {
        BilinearScheme::from_text_tables(
            2,
            &[("X1", "X3"), ("X2", "X4")],
            vec![0, 1, 2, 3],
            &[("C11", "s1 + s2"), ("C12", "m1 + m2"), ("C22", "s3 + s4")],
        )
        .expect("built-in Strassen table is well formed")
    })
}

fn parse_output_label(label: &str, grid: usize) -> Result<(usize, usize)> {
    let digits = label
        .strip_prefix('C')
        .filter(|d| d.len() == 2 && d.bytes().all(|b| b.is_ascii_digit()))
        .ok_or_else(|| Error::MalformedScheme(format!("bad output label `{label}`")))?;
    let b = digits.as_bytes();
    let (i, j) = ((b[0] - b'0') as usize, (b[1] - b'0') as usize);
    if i == 0 || j == 0 || i > grid || j > grid || i > j {
        return Err(Error::MalformedScheme(format!("`{label}` is not an upper-triangle block")));
    }
    Ok((i - 1, j - 1))
}

impl BilinearScheme {
    /// Builds a block scheme from readable tables: each product is a pair of
    /// signed sums over `X1…X{g²}`, each output a signed sum over `m*` and
    /// `s*`.
    pub fn from_text_tables(
        grid: usize,
        products: &[(&str, &str)],
        calls: Vec<usize>,
        outputs: &[(&str, &str)],
    ) -> Result<Self> {
        let nblocks = grid * grid;
        let coeffs = |expr: &str| -> Result<Vec<i64>> {
            let mut v = vec![0i64; nblocks];
            for (sign, name) in parse_signed_sum(expr)? {
                let idx = indexed(&name, "X")
                    .filter(|&i| i < nblocks)
                    .ok_or_else(|| Error::MalformedScheme(format!("unknown block `{name}`")))?;
                v[idx] += sign;
            }
            Ok(v)
        };
        let products = products
            .iter()
            .map(|(l, r)| Ok(ProductSpec { left: coeffs(l)?, right: coeffs(r)? }))
            .collect::<Result<Vec<_>>>()?;
        let mut outs = Vec::new();
        for (label, expr) in outputs {
            let (row, col) = parse_output_label(label, grid)?;
            let mut pc = vec![Rational64::zero(); products.len()];
            let mut cc = vec![Rational64::zero(); calls.len()];
            for (sign, name) in parse_signed_sum(expr)? {
                let slot = if let Some(k) = indexed(&name, "m").filter(|&k| k < pc.len()) {
                    &mut pc[k]
                } else if let Some(k) = indexed(&name, "s").filter(|&k| k < cc.len()) {
                    &mut cc[k]
                } else {
                    return Err(Error::MalformedScheme(format!("unknown term `{name}` in {label}")));
                };
                *slot += Rational64::from_integer(sign);
            }
            outs.push(OutputSpec { row, col, products: pc, calls: cc });
        }
        let s = Self { grid, algebra: Algebra::Block, products, calls, outputs: outs };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid;
        if g == 0 {
            return Err(Error::MalformedScheme("grid size is zero".into()));
        }
        let nb = g * g;
        for (k, p) in self.products.iter().enumerate() {
            if p.left.len() != nb || p.right.len() != nb {
                return Err(Error::MalformedScheme(format!(
                    "product {} has coefficient vectors of length {}/{}, expected {nb}",
                    k + 1,
                    p.left.len(),
                    p.right.len()
                )));
            }
        }
        if let Some(b) = self.calls.iter().find(|&&b| b >= nb) {
            return Err(Error::MalformedScheme(format!("recursive call on block {} of {nb}", b + 1)));
        }
        let expected: Vec<(usize, usize)> = (0..g).flat_map(|i| (i..g).map(move |j| (i, j))).collect();
        let got: Vec<(usize, usize)> = self.outputs.iter().map(|o| (o.row, o.col)).collect();
        if got != expected {
            return Err(Error::MalformedScheme(format!(
                "outputs must be the {} upper-triangle blocks in row-major order",
                expected.len()
            )));
        }
        for o in &self.outputs {
            if o.products.len() != self.products.len() || o.calls.len() != self.calls.len() {
                return Err(Error::MalformedScheme(format!(
                    "C{}{} has {} product and {} call coefficients",
                    o.row + 1,
                    o.col + 1,
                    o.products.len(),
                    o.calls.len()
                )));
            }
        }
        Ok(())
    }

    pub fn num_blocks(&self) -> usize {
        self.grid * self.grid
    }

    pub fn output(&self, row: usize, col: usize) -> Option<&OutputSpec> {
        self.outputs.iter().find(|o| o.row == row && o.col == col)
    }

    /// True when every coefficient is an integer in {−1, 0, 1}.
    pub fn has_unit_coefficients(&self) -> bool {
        let unit_int = |v: i64| (-1..=1).contains(&v);
        let unit_rat = |r: &Rational64| r.is_integer() && unit_int(r.to_integer());
        self.products.iter().all(|p| p.left.iter().chain(&p.right).all(|&v| unit_int(v)))
            && self.outputs.iter().all(|o| o.products.iter().chain(&o.calls).all(unit_rat))
    }
}

/// Coefficients of the monomials Xₐ·X_bᵗ, indexed `[a][b]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialMatrix {
    size: usize,
    data: Vec<BigRational>,
}

impl MonomialMatrix {
    pub fn zeros(size: usize) -> Self {
        Self { size, data: vec![BigRational::zero(); size * size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, a: usize, b: usize) -> &BigRational {
        &self.data[a * self.size + b]
    }

    fn add_scaled_outer(&mut self, scale: &BigRational, left: &[i64], right: &[i64]) {
        for (a, &l) in left.iter().enumerate() {
            if l == 0 {
                continue;
            }
            for (b, &r) in right.iter().enumerate() {
                if r != 0 {
                    self.data[a * self.size + b] += scale * BigRational::from_integer(BigInt::from(l * r));
                }
            }
        }
    }

    /// Folds (a, b) and (b, a) together, giving the canonical form of a
    /// commutative polynomial.
    fn symmetrized(&self) -> Self {
        let n = self.size;
        let mut out = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                out.data[lo * n + hi] += &self.data[a * n + b];
            }
        }
        out
    }

    /// Target for output block (i, j) of X·Xᵗ on a `grid`x`grid` block grid:
    /// Σₖ X(i,k)·X(j,k)ᵗ.
    pub fn target(grid: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(grid * grid);
        for k in 0..grid {
            m.data[(row * grid + k) * grid * grid + col * grid + k] = BigRational::one();
        }
        m
    }

    /// Expansion of one output of `scheme` in the monomial basis.
    pub fn of_output(scheme: &BilinearScheme, output: &OutputSpec) -> Self {
        let nb = scheme.num_blocks();
        let mut m = Self::zeros(nb);
        for (p, g) in scheme.products.iter().zip(&output.products) {
            if !g.is_zero() {
                m.add_scaled_outer(&to_big(g), &p.left, &p.right);
            }
        }
        for (&blk, g) in scheme.calls.iter().zip(&output.calls) {
            if !g.is_zero() {
                m.data[blk * nb + blk] += to_big(g);
            }
        }
        m
    }
}

fn to_big(r: &Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialDiff {
    pub left: usize,
    pub right: usize,
    pub expected: BigRational,
    pub actual: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryFailure {
    pub row: usize,
    pub col: usize,
    pub diffs: Vec<MonomialDiff>,
}

impl fmt::Display for EntryFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}{}:", self.row + 1, self.col + 1)?;
        for d in &self.diffs {
            write!(f, " X{}·X{}ᵗ expected {} got {};", d.left + 1, d.right + 1, d.expected, d.actual)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub checked: usize,
    pub failures: Vec<EntryFailure>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn passed(&self) -> usize {
        self.checked - self.failures.len()
    }
}

/// Proves a scheme by expanding every output into the monomial basis
/// {Xₐ·X_bᵗ} and comparing coefficients exactly with the X·Xᵗ target. For
/// block schemes the monomials are free (blocks do not commute), so an exact
/// match holds for every input; commutative schemes are compared after
/// folding Xₐ·X_bᵗ with X_b·Xₐᵗ.
pub fn verify_scheme(scheme: &BilinearScheme) -> Result<Verdict> {
    scheme.validate()?;
    let mut failures = Vec::new();
    for o in &scheme.outputs {
        let mut got = MonomialMatrix::of_output(scheme, o);
        let mut want = MonomialMatrix::target(scheme.grid, o.row, o.col);
        if scheme.algebra == Algebra::Commutative {
            got = got.symmetrized();
            want = want.symmetrized();
        }
        let n = got.size();
        let diffs: Vec<MonomialDiff> = (0..n * n)
            .filter(|&i| got.data[i] != want.data[i])
            .map(|i| MonomialDiff {
                left: i / n,
                right: i % n,
                expected: want.data[i].clone(),
                actual: got.data[i].clone(),
            })
            .collect();
        if !diffs.is_empty() {
            failures.push(EntryFailure { row: o.row, col: o.col, diffs });
        }
    }
    Ok(Verdict { checked: scheme.outputs.len(), failures })
}

/// Writes the plain-text exchange format:
///
/// ```text
/// grid 4
/// algebra block
/// calls : 1 2 3 4 13 14 15 16
/// 1 : alpha[16] | beta[16]
/// C12 : gamma[26] | sigma[8]
/// ```
///
/// Block indices are one-based; coefficients are integers or `p/q`.
pub fn export_scheme(scheme: &BilinearScheme) -> String {
    let mut s = String::new();
    let join_i = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let join_r = |v: &[Rational64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "grid {}", scheme.grid);
    let _ = writeln!(s, "algebra {}", scheme.algebra);
    let calls: Vec<i64> = scheme.calls.iter().map(|&b| b as i64 + 1).collect();
    let _ = writeln!(s, "calls : {}", join_i(&calls));
    for (k, p) in scheme.products.iter().enumerate() {
        let _ = writeln!(s, "{} : {} | {}", k + 1, join_i(&p.left), join_i(&p.right));
    }
    for o in &scheme.outputs {
        let _ = writeln!(s, "C{}{} : {} | {}", o.row + 1, o.col + 1, join_r(&o.products), join_r(&o.calls));
    }
    s
}

fn parse_rational(tok: &str, line: usize) -> Result<Rational64> {
    let err = || Error::Parse { line, message: format!("bad coefficient `{tok}`") };
    match tok.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.parse().map_err(|_| err())?;
            let d: i64 = d.parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            Ok(Rational64::new(n, d))
        }
        None => tok.parse::<i64>().map(Rational64::from_integer).map_err(|_| err()),
    }
}

fn parse_ints(s: &str, line: usize) -> Result<Vec<i64>> {
    s.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| Error::Parse { line, message: format!("bad integer `{t}`") }))
        .collect()
}

/// Reads the format written by [`export_scheme`]. `grid` may be omitted
/// when it can be inferred from the coefficient vector length; `calls` may
/// be omitted for schemes without recursive calls. `#` starts a comment.
pub fn import_scheme(text: &str) -> Result<BilinearScheme> {
    let mut grid = None;
    let mut algebra = Algebra::Block;
    let mut calls = Vec::new();
    let mut products = Vec::new();
    let mut outputs_raw = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |m: String| Error::Parse { line: line_no, message: m };
        if let Some(v) = line.strip_prefix("grid") {
            grid = Some(v.trim().parse::<usize>().map_err(|_| perr(format!("bad grid `{}`", v.trim())))?);
            continue;
        }
        if let Some(v) = line.strip_prefix("algebra") {
            algebra = match v.trim() {
                "block" => Algebra::Block,
                "commutative" => Algebra::Commutative,
                other => return Err(perr(format!("unknown algebra `{other}`"))),
            };
            continue;
        }
        let (head, body) = line.split_once(':').ok_or_else(|| perr("expected `label : values`".into()))?;
        let head = head.trim();
        if head == "calls" {
            calls = parse_ints(body, line_no)?
                .into_iter()
                .map(|b| if b >= 1 { Ok(b as usize - 1) } else { Err(perr(format!("bad call block {b}"))) })
                .collect::<Result<_>>()?;
            continue;
        }
        let (lhs, rhs) = body.split_once('|').ok_or_else(|| perr("expected `|` separator".into()))?;
        if head.starts_with('C') {
            let prods = lhs.split_whitespace().map(|t| parse_rational(t, line_no)).collect::<Result<Vec<_>>>()?;
            let cs = rhs.split_whitespace().map(|t| parse_rational(t, line_no)).collect::<Result<Vec<_>>>()?;
            outputs_raw.push((line_no, head.to_string(), prods, cs));
        } else {
            let k: usize = head.parse().map_err(|_| perr(format!("bad product index `{head}`")))?;
            if k != products.len() + 1 {
                return Err(perr(format!("product {k} out of order")));
            }
            products.push(ProductSpec { left: parse_ints(lhs, line_no)?, right: parse_ints(rhs, line_no)? });
        }
    }
    let grid = match grid {
        Some(g) => g,
        None => {
            let len = products.first().map(|p| p.left.len()).unwrap_or(0);
            let g = (len as f64).sqrt().round() as usize;
            if g == 0 || g * g != len {
                return Err(Error::MalformedScheme("cannot infer grid size".into()));
            }
            g
        }
    };
    let mut outputs = Vec::new();
    for (line, label, prods, cs) in outputs_raw {
        let (row, col) =
            parse_output_label(&label, grid).map_err(|e| Error::Parse { line, message: e.to_string() })?;
        outputs.push(OutputSpec { row, col, products: prods, calls: cs });
    }
    outputs.sort_by_key(|o| (o.row, o.col));
    let s = BilinearScheme { grid, algebra, products, calls, outputs };
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> usize {
        i - 1
    }

    #[test]
    fn rxtx_shape() {
        let s = rxtx_scheme();
        assert_eq!(s.grid, 4);
        assert_eq!(s.products.len(), 26);
        assert_eq!(s.calls, vec![0, 1, 2, 3, 12, 13, 14, 15]);
        assert_eq!(s.outputs.len(), 10);
        assert!(s.has_unit_coefficients());
    }

    #[test]
    fn rxtx_product_seven() {
        let p = &rxtx_scheme().products[6];
        let mut left = vec![0; 16];
        left[x(11)] = 1;
        let mut right = vec![0; 16];
        right[x(6)] = 1;
        right[x(7)] = 1;
        assert_eq!(p.left, left);
        assert_eq!(p.right, right);
    }

    #[test]
    fn rxtx_c11_uses_only_calls() {
        let c11 = rxtx_scheme().output(0, 0).unwrap();
        assert!(c11.products.iter().all(|g| g.is_zero()));
        let one = Rational64::one();
        assert_eq!(c11.calls, vec![one, one, one, one, 0.into(), 0.into(), 0.into(), 0.into()]);
    }

    #[test]
    fn strassen_c12_is_two_products() {
        let s = strassen_xxt_scheme();
        assert_eq!((s.products.len(), s.calls.len()), (2, 4));
        let c12 = s.output(0, 1).unwrap();
        assert_eq!(c12.products, vec![Rational64::one(), Rational64::one()]);
        assert_eq!(s.products[0].left, vec![1, 0, 0, 0]);
        assert_eq!(s.products[0].right, vec![0, 0, 1, 0]);
        assert_eq!(s.products[1].left, vec![0, 1, 0, 0]);
        assert_eq!(s.products[1].right, vec![0, 0, 0, 1]);
    }

    #[test]
    fn builtins_verify() {
        let v = verify_scheme(rxtx_scheme()).unwrap();
        assert!(v.is_ok(), "{:?}", v.failures);
        assert_eq!(v.checked, 10);
        let v = verify_scheme(strassen_xxt_scheme()).unwrap();
        assert!(v.is_ok());
        assert_eq!(v.checked, 3);
    }

    #[test]
    fn flipping_m7_right_x7_breaks_c12() {
        let mut s = rxtx_scheme().clone();
        s.products[6].right[x(7)] = -1;
        let v = verify_scheme(&s).unwrap();
        assert!(!v.is_ok());
        assert!(v.failures.iter().any(|f| (f.row, f.col) == (0, 1)));
    }

    #[test]
    fn every_single_flip_is_detected() {
        let base = rxtx_scheme();
        let mut flips = 0;
        for k in 0..26 {
            for b in 0..16 {
                for side in 0..2 {
                    let mut s = base.clone();
                    let v = if side == 0 { &mut s.products[k].left[b] } else { &mut s.products[k].right[b] };
                    if *v == 0 {
                        continue;
                    }
                    *v = -*v;
                    flips += 1;
                    assert!(!verify_scheme(&s).unwrap().is_ok(), "product {} block {}", k + 1, b + 1);
                }
            }
        }
        for o in 0..10 {
            let n_prod = base.outputs[o].products.len();
            for t in 0..n_prod + 8 {
                let mut s = base.clone();
                let v = if t < n_prod { &mut s.outputs[o].products[t] } else { &mut s.outputs[o].calls[t - n_prod] };
                if v.is_zero() {
                    continue;
                }
                *v = -*v;
                flips += 1;
                assert!(!verify_scheme(&s).unwrap().is_ok());
            }
        }
        // 77 + 26·2 coefficients in the factors, 62 + 10 in the outputs.
        assert_eq!(flips, 129 + 72);
    }

    #[test]
    fn malformed_vectors_are_rejected() {
        let mut s = rxtx_scheme().clone();
        s.products[0].left.pop();
        assert!(matches!(verify_scheme(&s), Err(Error::MalformedScheme(_))));
        let mut s = strassen_xxt_scheme().clone();
        s.outputs.swap(0, 1);
        assert!(s.validate().is_err());
    }

    #[test]
    fn text_roundtrip() {
        for s in [rxtx_scheme(), strassen_xxt_scheme()] {
            let text = export_scheme(s);
            assert_eq!(&import_scheme(&text).unwrap(), s);
        }
    }

    #[test]
    fn import_infers_grid_and_accepts_rationals() {
        let text = "# x1*x1 and x2*x2 as a commutative 2x2 fragment\nalgebra commutative\n\
                    1 : 1 0 0 0 | 1 0 0 0\n\
                    C11 : 1/2 | \nC12 : 0 | \nC22 : 0 | \n";
        let s = import_scheme(text).unwrap();
        assert_eq!(s.grid, 2);
        assert_eq!(s.outputs[0].products[0], Rational64::new(1, 2));
        assert!(!verify_scheme(&s).unwrap().is_ok());
    }

    #[test]
    fn import_errors_carry_line_numbers() {
        let err = import_scheme("grid 2\n1 : 1 0 0 0 | x 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = import_scheme("grid 2\n2 : 1 0 0 0 | 1 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(import_scheme("grid 2\nC21 : | \n").is_err());
    }

    #[test]
    fn commutative_mode_accepts_scalar_identities() {
        // x1x3 = ((x1+x3)² − x1² − x3²) / 2 holds for scalars but not for
        // blocks, where (X1+X3)(X1+X3)ᵗ also yields X3·X1ᵗ.
        let text = "grid 2\nalgebra commutative\n\
                    1 : 1 0 1 0 | 1 0 1 0\n2 : 1 0 0 0 | 1 0 0 0\n3 : 0 1 0 0 | 0 1 0 0\n\
                    4 : 0 0 1 0 | 0 0 1 0\n5 : 0 0 0 1 | 0 0 0 1\n6 : 0 1 0 0 | 0 0 0 1\n\
                    C11 : 0 1 1 0 0 0 | \nC12 : 1/2 -1/2 0 -1/2 0 1 | \nC22 : 0 0 0 1 1 0 | \n";
        let mut s = import_scheme(text).unwrap();
        assert!(verify_scheme(&s).unwrap().is_ok());
        s.algebra = Algebra::Block;
        let v = verify_scheme(&s).unwrap();
        assert_eq!(v.failures.len(), 1);
        assert_eq!((v.failures[0].row, v.failures[0].col), (0, 1));
    }
}
