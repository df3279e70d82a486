//! Dense row-major matrices over a pluggable element domain, block
//! partitioning with zero padding, and the elementary kernels (addition,
//! naive product, naive Gram product) every other module builds on.

use std::fmt;

use rand::Rng;

use crate::counter::{tally_adds, tally_mults, OpCounter};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ElementDomain {
    Float64,
    ExactInt,
}

/// Scalar type a [`DenseMatrix`] can hold. Arithmetic is checked: a `None`
/// result means the exact domain overflowed.
pub trait Element: Copy + PartialEq + fmt::Debug + Send + Sync + 'static {
    const DOMAIN: ElementDomain;

    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(self) -> f64;
    fn checked_add(self, rhs: Self) -> Option<Self>;
    fn checked_sub(self, rhs: Self) -> Option<Self>;
    fn checked_mul(self, rhs: Self) -> Option<Self>;
    fn checked_neg(self) -> Option<Self>;

    /// Platform-optimized product, if one is linked for this domain.
    fn external_gemm(_a: &DenseMatrix<Self>, _b: &DenseMatrix<Self>) -> Option<DenseMatrix<Self>> {
        None
    }
}

impl Element for f64 {
    const DOMAIN: ElementDomain = ElementDomain::Float64;

    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn checked_add(self, rhs: Self) -> Option<Self> {
        Some(self + rhs)
    }
    #[inline]
    fn checked_sub(self, rhs: Self) -> Option<Self> {
        Some(self - rhs)
    }
    #[inline]
    fn checked_mul(self, rhs: Self) -> Option<Self> {
        Some(self * rhs)
    }
    #[inline]
    fn checked_neg(self) -> Option<Self> {
        Some(-self)
    }

    #[cfg(feature = "external")]
    fn external_gemm(a: &DenseMatrix<Self>, b: &DenseMatrix<Self>) -> Option<DenseMatrix<Self>> {
        let (m, k, n) = (a.rows, a.cols, b.cols);
        let mut c = vec![0.0; m * n];
        // SAFETY: slices are exactly m*k, k*n and m*n long with row-major strides.
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                a.data.as_ptr(),
                k as isize,
                1,
                b.data.as_ptr(),
                n as isize,
                1,
                0.0,
                c.as_mut_ptr(),
                n as isize,
                1,
            );
        }
        Some(DenseMatrix { rows: m, cols: n, data: c })
    }
}

/// Exact 64-bit integer. Every operation is checked; overflow surfaces as
/// [`Error::Overflow`] instead of wrapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactInt(pub i64);

impl Element for ExactInt {
    const DOMAIN: ElementDomain = ElementDomain::ExactInt;

    fn zero() -> Self {
        ExactInt(0)
    }
    fn from_i64(v: i64) -> Self {
        ExactInt(v)
    }
    fn to_f64(self) -> f64 {
        self.0 as f64
    }
    #[inline]
    fn checked_add(self, rhs: Self) -> Option<Self> {
        self.0.checked_add(rhs.0).map(ExactInt)
    }
    #[inline]
    fn checked_sub(self, rhs: Self) -> Option<Self> {
        self.0.checked_sub(rhs.0).map(ExactInt)
    }
    #[inline]
    fn checked_mul(self, rhs: Self) -> Option<Self> {
        self.0.checked_mul(rhs.0).map(ExactInt)
    }
    #[inline]
    fn checked_neg(self) -> Option<Self> {
        self.0.checked_neg().map(ExactInt)
    }
}

impl fmt::Display for ExactInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Element> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{} elements for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix {rows}x{cols}");
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| T::from_i64((i == j) as i64))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix {rows}x{cols}");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from integer rows; panics on ragged input.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        assert!(rows.iter().all(|r| r.as_ref().len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| T::from_i64(rows[i].as_ref()[j]))
    }

    /// Uniform integer entries in `lo..=hi`.
    pub fn random_int<R: Rng + ?Sized>(rows: usize, cols: usize, lo: i64, hi: i64, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| T::from_i64(rng.random_range(lo..=hi)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn neg(&self) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|v| v.checked_neg().ok_or(Error::Overflow("neg")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Copies the `rows`x`cols` window at (`r0`, `c0`), filling cells that
    /// fall outside the matrix with zero.
    pub fn window(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        let rmax = self.rows.saturating_sub(r0).min(rows);
        let cmax = self.cols.saturating_sub(c0).min(cols);
        if cmax == 0 {
            return out;
        }
        for i in 0..rmax {
            let src = &self.data[(r0 + i) * self.cols + c0..(r0 + i) * self.cols + c0 + cmax];
            out.data[i * cols..i * cols + cmax].copy_from_slice(src);
        }
        out
    }

    /// Top-left `rows`x`cols` corner.
    pub fn crop(&self, rows: usize, cols: usize) -> Self {
        if (rows, cols) == self.dims() {
            return self.clone();
        }
        self.window(0, 0, rows, cols)
    }

    /// Writes `block` with its top-left corner at (`r0`, `c0`), clipping
    /// whatever falls outside.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &Self) {
        let rmax = self.rows.saturating_sub(r0).min(block.rows);
        let cmax = self.cols.saturating_sub(c0).min(block.cols);
        if cmax == 0 {
            return;
        }
        for i in 0..rmax {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + cmax].copy_from_slice(&block.data[i * block.cols..i * block.cols + cmax]);
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

impl<T: Element> DenseMatrix<T> {
    /// Frobenius norm computed in f64.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.to_f64() * v.to_f64()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.to_f64().abs()))
    }

    /// ‖self − other‖_F / ‖other‖_F, or the absolute difference when
    /// `other` is zero.
    pub fn relative_frobenius_error(&self, other: &Self) -> f64 {
        assert_eq!(self.dims(), other.dims());
        let diff: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let d = a.to_f64() - b.to_f64();
                d * d
            })
            .sum::<f64>()
            .sqrt();
        let base = other.frobenius();
        if base == 0.0 {
            diff
        } else {
            diff / base
        }
    }
}

fn check_same_dims<T: Element>(op: &'static str, a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch { op, left: a.dims(), right: b.dims() });
    }
    Ok(())
}

fn zip_with<T: Element>(
    op: &'static str,
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    f: impl Fn(T, T) -> Option<T>,
) -> Result<DenseMatrix<T>> {
    check_same_dims(op, a, b)?;
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| f(x, y).ok_or(Error::Overflow(op)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DenseMatrix { rows: a.rows, cols: a.cols, data })
}

pub fn add<T: Element>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    add_counted(a, b, None)
}

pub fn sub<T: Element>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    sub_counted(a, b, None)
}

pub fn add_counted<T: Element>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    counter: Option<&OpCounter>,
) -> Result<DenseMatrix<T>> {
    let c = zip_with("add", a, b, T::checked_add)?;
    tally_adds(counter, c.data.len());
    Ok(c)
}

pub fn sub_counted<T: Element>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    counter: Option<&OpCounter>,
) -> Result<DenseMatrix<T>> {
    let c = zip_with("sub", a, b, T::checked_sub)?;
    tally_adds(counter, c.data.len());
    Ok(c)
}

pub fn naive_multiply<T: Element>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    naive_multiply_counted(a, b, None)
}

/// Schoolbook product. Counted as `r·k·c` multiplications and `r·(k−1)·c`
/// additions.
pub fn naive_multiply_counted<T: Element>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    counter: Option<&OpCounter>,
) -> Result<DenseMatrix<T>> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch { op: "multiply", left: a.dims(), right: b.dims() });
    }
    let (r, k, c) = (a.rows, a.cols, b.cols);
    let mut out = vec![T::zero(); r * c];
    for i in 0..r {
        let orow = &mut out[i * c..(i + 1) * c];
        for p in 0..k {
            let aip = a.data[i * k + p];
            let brow = &b.data[p * c..(p + 1) * c];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                let prod = aip.checked_mul(bv).ok_or(Error::Overflow("multiply"))?;
                *o = o.checked_add(prod).ok_or(Error::Overflow("multiply"))?;
            }
        }
    }
    tally_mults(counter, r * k * c);
    tally_adds(counter, r * (k - 1) * c);
    Ok(DenseMatrix { rows: r, cols: c, data: out })
}

pub fn naive_gram<T: Element>(x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    naive_gram_counted(x, None)
}

/// X·Xᵗ by computing the upper triangle as row dot products and mirroring.
/// For an n×m input that is `n(n+1)/2·m` multiplications and
/// `n(n+1)/2·(m−1)` additions.
pub fn naive_gram_counted<T: Element>(x: &DenseMatrix<T>, counter: Option<&OpCounter>) -> Result<DenseMatrix<T>> {
    let (n, m) = x.dims();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let ri = x.row(i);
        for j in i..n {
            let rj = x.row(j);
            let mut acc = ri[0].checked_mul(rj[0]).ok_or(Error::Overflow("gram"))?;
            for p in 1..m {
                let prod = ri[p].checked_mul(rj[p]).ok_or(Error::Overflow("gram"))?;
                acc = acc.checked_add(prod).ok_or(Error::Overflow("gram"))?;
            }
            out.set(i, j, acc);
            out.set(j, i, acc);
        }
    }
    let entries = n * (n + 1) / 2;
    tally_mults(counter, entries * m);
    tally_adds(counter, entries * (m - 1));
    Ok(out)
}

/// A matrix cut into a `grid`x`grid` array of equal blocks after zero
/// padding each dimension up to a multiple of the grid size. Blocks are
/// stored in row-major block order, so for a 4x4 grid `block(0..4)` is the
/// first block row (X₁…X₄).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition<T> {
    source: (usize, usize),
    grid: usize,
    padded: (usize, usize),
    blocks: Vec<DenseMatrix<T>>,
}

fn round_up(v: usize, g: usize) -> usize {
    v.div_ceil(g) * g
}

pub fn partition<T: Element>(x: &DenseMatrix<T>, grid: usize) -> BlockPartition<T> {
    assert!(grid > 0, "grid size must be positive");
    let (n, m) = x.dims();
    let (pn, pm) = (round_up(n, grid), round_up(m, grid));
    let (bn, bm) = (pn / grid, pm / grid);
    let blocks = (0..grid * grid)
        .map(|idx| x.window((idx / grid) * bn, (idx % grid) * bm, bn, bm))
        .collect();
    BlockPartition { source: (n, m), grid, padded: (pn, pm), blocks }
}

impl<T: Element> BlockPartition<T> {
    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn source_dims(&self) -> (usize, usize) {
        self.source
    }

    pub fn padded_dims(&self) -> (usize, usize) {
        self.padded
    }

    pub fn block_dims(&self) -> (usize, usize) {
        (self.padded.0 / self.grid, self.padded.1 / self.grid)
    }

    /// Block by zero-based linear index (X₁ is index 0).
    pub fn block(&self, idx: usize) -> &DenseMatrix<T> {
        &self.blocks[idx]
    }

    pub fn block_at(&self, i: usize, j: usize) -> &DenseMatrix<T> {
        &self.blocks[i * self.grid + j]
    }

    pub fn blocks(&self) -> &[DenseMatrix<T>] {
        &self.blocks
    }

    /// Reassembles the blocks and crops the padding away.
    pub fn assemble(&self) -> DenseMatrix<T> {
        let (bn, bm) = self.block_dims();
        let mut out = DenseMatrix::zeros(self.source.0, self.source.1);
        for (idx, b) in self.blocks.iter().enumerate() {
            out.paste((idx / self.grid) * bn, (idx % self.grid) * bm, b);
        }
        out
    }
}

/// Builds the symmetric `n`x`n` result from the upper-triangle blocks of a
/// `grid`x`grid` block matrix, given in row-major order over (i, j) with
/// i ≤ j. Off-diagonal lower blocks are transposes of their upper partners;
/// inside diagonal blocks the strict lower part is mirrored from the upper
/// part, so the output is symmetric bit for bit.
pub fn assemble_symmetric<T: Element>(upper: &[DenseMatrix<T>], grid: usize, n: usize) -> Result<DenseMatrix<T>> {
    let expected = grid * (grid + 1) / 2;
    if upper.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "{} upper blocks for grid {grid}, expected {expected}",
            upper.len()
        )));
    }
    let b = upper[0].rows();
    if upper.iter().any(|blk| blk.dims() != (b, b)) || b * grid < n {
        return Err(Error::InvalidArgument("upper blocks must be square, equal and cover n".into()));
    }
    let size = b * grid;
    let mut full = DenseMatrix::zeros(size, size);
    let mut it = upper.iter();
    for i in 0..grid {
        for j in i..grid {
            full.paste(i * b, j * b, it.next().expect("counted above"));
        }
    }
    for r in 0..size {
        for c in 0..r {
            let v = full.get(c, r);
            full.set(r, c, v);
        }
    }
    Ok(full.crop(n, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = DenseMatrix<ExactInt>;

    #[test]
    fn add_identity_and_inverse() {
        let a = M::from_rows(&[[1, 2], [3, 4]]);
        let z = M::zeros(2, 2);
        assert_eq!(add(&a, &z).unwrap(), a);
        let one = M::from_rows(&[[1]]);
        let minus = M::from_rows(&[[-1]]);
        assert_eq!(add(&one, &minus).unwrap(), M::from_rows(&[[0]]));
    }

    #[test]
    fn add_rejects_mismatched_dims() {
        let a = M::zeros(2, 3);
        let b = M::zeros(3, 2);
        assert!(matches!(add(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(sub(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn exact_overflow_is_reported() {
        let a = M::from_rows(&[[i64::MAX]]);
        let b = M::from_rows(&[[1]]);
        assert_eq!(add(&a, &b), Err(Error::Overflow("add")));
        assert_eq!(naive_multiply(&a, &a), Err(Error::Overflow("multiply")));
        assert_eq!(naive_gram(&a), Err(Error::Overflow("gram")));
        let c = M::from_rows(&[[i64::MIN]]);
        assert!(c.neg().is_err());
    }

    #[test]
    fn multiply_examples() {
        let a = M::from_rows(&[[1, 2], [3, 4]]);
        let b = M::from_rows(&[[5, 6], [7, 8]]);
        assert_eq!(naive_multiply(&a, &b).unwrap(), M::from_rows(&[[19, 22], [43, 50]]));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = M::random_int(3, 5, -9, 9, &mut rng);
        assert_eq!(naive_multiply(&M::identity(3), &m).unwrap(), m);

        let c = OpCounter::new();
        let x = M::random_int(4, 4, -9, 9, &mut rng);
        naive_multiply_counted(&x, &x, Some(&c)).unwrap();
        assert_eq!(c.snapshot().mults, 64);
        assert_eq!(c.snapshot().adds, 48);
        assert!(naive_multiply(&M::zeros(2, 3), &M::zeros(2, 3)).is_err());
    }

    #[test]
    fn gram_examples() {
        assert_eq!(naive_gram(&M::zeros(3, 2)).unwrap(), M::zeros(3, 3));
        let x = M::from_rows(&[[1, 2], [3, 4]]);
        assert_eq!(naive_gram(&x).unwrap(), M::from_rows(&[[5, 11], [11, 25]]));

        let c = OpCounter::new();
        naive_gram_counted(&M::zeros(4, 4), Some(&c)).unwrap();
        assert_eq!(c.snapshot().mults, 40);
        assert_eq!(c.snapshot().total(), 70);
    }

    #[test]
    fn partition_layout() {
        let x = M::from_fn(4, 4, |i, j| ExactInt((i * 4 + j) as i64));
        let p = partition(&x, 4);
        assert_eq!(p.blocks().len(), 16);
        assert_eq!(p.block_dims(), (1, 1));
        assert_eq!(p.block(5).get(0, 0), x.get(1, 1));
        assert_eq!(p.block_at(3, 2).get(0, 0), x.get(3, 2));
    }

    #[test]
    fn partition_pads_with_zeros() {
        let x = M::from_fn(5, 7, |_, _| ExactInt(1));
        let p = partition(&x, 4);
        assert_eq!(p.padded_dims(), (8, 8));
        assert_eq!(p.block_dims(), (2, 2));
        // Block (2,3) covers rows 4..6, cols 6..8: only (4,6) is real.
        let b = p.block_at(2, 3);
        assert_eq!(b.get(0, 0), ExactInt(1));
        assert_eq!(b.get(0, 1), ExactInt(0));
        assert_eq!(b.get(1, 0), ExactInt(0));
        assert_eq!(p.block_at(3, 3), &M::zeros(2, 2));
        assert_eq!(p.assemble(), x);
    }

    #[test]
    fn assemble_symmetric_mirrors_upper() {
        let x = M::from_fn(4, 4, |i, j| ExactInt((i * 4 + j) as i64));
        let p = partition(&x, 2);
        let upper = vec![p.block_at(0, 0).clone(), p.block_at(0, 1).clone(), p.block_at(1, 1).clone()];
        let s = assemble_symmetric(&upper, 2, 3).unwrap();
        assert!(s.is_symmetric());
        assert_eq!(s.dims(), (3, 3));
        assert_eq!(s.get(0, 2), x.get(0, 2));
        assert_eq!(s.get(2, 0), x.get(0, 2));
        assert_eq!(s.get(1, 0), x.get(0, 1));
        assert!(assemble_symmetric(&upper[..2], 2, 3).is_err());
    }

    proptest! {
        #[test]
        fn add_then_sub_roundtrips(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = M::random_int(3, 5, -1000, 1000, &mut rng);
            let b = M::random_int(3, 5, -1000, 1000, &mut rng);
            prop_assert_eq!(sub(&add(&a, &b).unwrap(), &b).unwrap(), a);
        }

        #[test]
        fn partition_roundtrip(n in 1usize..14, m in 1usize..14, four in any::<bool>(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = M::random_int(n, m, -9, 9, &mut rng);
            let grid = if four { 4 } else { 2 };
            let p = partition(&x, grid);
            let (bn, bm) = p.block_dims();
            prop_assert!(p.blocks().iter().all(|b| b.dims() == (bn, bm)));
            prop_assert_eq!(p.assemble(), x);
        }

        #[test]
        fn gram_matches_product_with_transpose(n in 1usize..10, m in 1usize..10, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = M::random_int(n, m, -9, 9, &mut rng);
            let g = naive_gram(&x).unwrap();
            prop_assert!(g.is_symmetric());
            prop_assert_eq!(g, naive_multiply(&x, &x.transpose()).unwrap());
        }
    }
}
