//! Recursive executor for block schemes computing X·Xᵗ.
//!
//! One level: partition into the plan's block grid (zero padding as
//! needed), form the product factors (stage 1), run the general products on
//! the GEMM backend and the recursive calls on this executor, combine
//! (stage 2), and assemble the upper-triangle blocks into a symmetric
//! result. At or below the cutoff the naive Gram kernel runs.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gemm::{BackendKind, GemmBackend};
use crate::matrix::{
    add_counted, assemble_symmetric, naive_gram_counted, partition, sub_counted, DenseMatrix, Element,
};
use crate::plan::{plan_for, AdditionPlan, Operand, PlanKind, SumNode};
use crate::scheme::{rxtx_scheme, strassen_xxt_scheme};

/// Recursion control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramOptions {
    /// Inputs with at most this many rows go straight to the naive kernel.
    pub cutoff: usize,
    /// Optional limit on recursion levels; `Some(1)` applies the scheme once
    /// and computes every sub-problem with flat kernels.
    pub max_depth: Option<usize>,
}

impl GramOptions {
    pub fn cutoff(cutoff: usize) -> Self {
        Self { cutoff, max_depth: None }
    }

    pub fn depth(depth: usize) -> Self {
        Self { cutoff: 1, max_depth: Some(depth) }
    }
}

/// A block value that may carry a pending negation. Negations are folded
/// into the signs of later sums instead of being materialized.
#[derive(Clone)]
struct Signed<T> {
    negated: bool,
    value: Arc<DenseMatrix<T>>,
}

impl<T: Element> Signed<T> {
    fn plain(m: DenseMatrix<T>) -> Self {
        Self { negated: false, value: Arc::new(m) }
    }

    fn materialize(self) -> Result<DenseMatrix<T>> {
        let m = Arc::try_unwrap(self.value).unwrap_or_else(|a| (*a).clone());
        if self.negated {
            m.neg()
        } else {
            Ok(m)
        }
    }
}

fn eval_sum<T: Element>(
    node: &SumNode,
    fetch: impl Fn(Operand) -> Signed<T>,
    zero_dims: (usize, usize),
    backend: &GemmBackend,
) -> Result<Signed<T>> {
    let terms: Vec<(bool, Signed<T>)> = node
        .terms
        .iter()
        .map(|&(c, op)| {
            let v = fetch(op);
            ((c < 0) != v.negated, v)
        })
        .collect();
    match terms.len() {
        0 => return Ok(Signed::plain(DenseMatrix::zeros(zero_dims.0, zero_dims.1))),
        1 => {
            let (neg, v) = terms.into_iter().next().expect("one term");
            return Ok(Signed { negated: neg, value: v.value });
        }
        _ => {}
    }
    // Start from a positive term when there is one; otherwise sum the
    // negated terms and mark the result negated.
    let start = terms.iter().position(|(neg, _)| !neg);
    let (flip, start) = match start {
        Some(i) => (false, i),
        None => (true, 0),
    };
    let mut acc = (*terms[start].1.value).clone();
    for (i, (neg, v)) in terms.iter().enumerate() {
        if i == start {
            continue;
        }
        acc = if *neg != flip {
            sub_counted(&acc, &v.value, backend.counter())?
        } else {
            add_counted(&acc, &v.value, backend.counter())?
        };
    }
    Ok(Signed { negated: flip, value: Arc::new(acc) })
}

/// Flat X·Xᵗ used at the leaves: the naive Gram kernel, except on the
/// external backend, which computes X·Xᵗ as one library call and mirrors
/// the upper triangle.
pub fn direct_gram<T: Element>(x: &DenseMatrix<T>, backend: &GemmBackend) -> Result<DenseMatrix<T>> {
    if backend.kind() != BackendKind::External {
        return naive_gram_counted(x, backend.counter());
    }
    let mut c = backend.gemm(x, &x.transpose())?;
    for i in 0..c.rows() {
        for j in 0..i {
            c.set(i, j, c.get(j, i));
        }
    }
    Ok(c)
}

/// X·Xᵗ by recursively applying `plan`.
pub fn scheme_gram<T: Element>(
    x: &DenseMatrix<T>,
    plan: &AdditionPlan,
    opts: GramOptions,
    backend: &GemmBackend,
) -> Result<DenseMatrix<T>> {
    if opts.cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    if plan.grid < 2 {
        return Err(Error::InvalidArgument("plan grid must be at least 2".into()));
    }
    if !backend.is_available::<T>() {
        return Err(Error::Unavailable(format!("{} backend for {:?}", backend.kind(), T::DOMAIN)));
    }
    recurse(x, plan, opts.cutoff, opts.max_depth, backend)
}

fn recurse<T: Element>(
    x: &DenseMatrix<T>,
    plan: &AdditionPlan,
    cutoff: usize,
    depth_left: Option<usize>,
    backend: &GemmBackend,
) -> Result<DenseMatrix<T>> {
    let n = x.rows();
    if n <= cutoff || depth_left == Some(0) {
        return direct_gram(x, backend);
    }
    let g = plan.grid;
    let part = partition(x, g);
    let (bn, bm) = part.block_dims();

    let mut s1: Vec<Signed<T>> = Vec::with_capacity(plan.stage1.len());
    for node in &plan.stage1 {
        let v = eval_sum(
            node,
            |op| match op {
                Operand::Input(i) => Signed::plain(part.block(i).clone()),
                Operand::Node(i) => s1[i].clone(),
                _ => unreachable!("stage 1 reads inputs and stage-1 nodes only"),
            },
            (bn, bm),
            backend,
        )?;
        s1.push(v);
    }

    let next_depth = depth_left.map(|d| d - 1);
    let product = |k: usize| -> Result<Signed<T>> {
        let (l, r) = (&s1[plan.left[k]], &s1[plan.right[k]]);
        let m = backend.gemm(&l.value, &r.value.transpose())?;
        Ok(Signed { negated: l.negated != r.negated, value: Arc::new(m) })
    };
    let call = |k: usize| -> Result<Signed<T>> {
        Ok(Signed::plain(recurse(part.block(plan.calls[k]), plan, cutoff, next_depth, backend)?))
    };
    let np = plan.num_products();
    let jobs = np + plan.calls.len();
    let run = |j: usize| if j < np { product(j) } else { call(j - np) };
    let results: Vec<Result<Signed<T>>> = {
        #[cfg(feature = "parallel")]
        {
            if backend.parallel() {
                use rayon::prelude::*;
                (0..jobs).into_par_iter().map(run).collect()
            } else {
                (0..jobs).map(run).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..jobs).map(run).collect()
        }
    };
    let mut done = results.into_iter().collect::<Result<Vec<_>>>()?;
    let calls_done = done.split_off(np);
    let products = done;
    drop(s1);

    let mut s2: Vec<Signed<T>> = Vec::with_capacity(plan.stage2.len());
    for node in &plan.stage2 {
        let v = eval_sum(
            node,
            |op| match op {
                Operand::Product(k) => products[k].clone(),
                Operand::Call(k) => calls_done[k].clone(),
                Operand::Node(i) => s2[i].clone(),
                Operand::Input(_) => unreachable!("stage 2 never reads input blocks"),
            },
            (bn, bn),
            backend,
        )?;
        s2.push(v);
    }
    let upper = plan
        .outputs
        .iter()
        .map(|&(_, _, node)| s2[node].clone().materialize())
        .collect::<Result<Vec<_>>>()?;
    assemble_symmetric(&upper, g, n)
}

/// X·Xᵗ with the RXTX scheme (8 recursive calls, 26 general products).
pub fn rxtx_gram<T: Element>(
    x: &DenseMatrix<T>,
    opts: GramOptions,
    backend: &GemmBackend,
    kind: PlanKind,
) -> Result<DenseMatrix<T>> {
    let plan = plan_for(rxtx_scheme(), kind)?;
    scheme_gram(x, &plan, opts, backend)
}

/// X·Xᵗ with recursive Strassen on a 2x2 grid (4 recursive calls, 2
/// general products, 3 block additions).
pub fn strassen_xxt_gram<T: Element>(
    x: &DenseMatrix<T>,
    opts: GramOptions,
    backend: &GemmBackend,
) -> Result<DenseMatrix<T>> {
    let plan = plan_for(strassen_xxt_scheme(), PlanKind::Direct)?;
    scheme_gram(x, &plan, opts, backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counter::OpCounter;
    use crate::matrix::{naive_gram, ExactInt};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = DenseMatrix<ExactInt>;

    fn counted_sw() -> (GemmBackend, Arc<OpCounter>) {
        let c = Arc::new(OpCounter::new());
        (GemmBackend::strassen_winograd(1).with_counter(c.clone()), c)
    }

    #[test]
    fn rxtx_on_one_to_sixteen() {
        let x = M::from_fn(4, 4, |i, j| ExactInt((i * 4 + j + 1) as i64));
        let want = naive_gram(&x).unwrap();
        for kind in [PlanKind::Direct, PlanKind::Optimized] {
            let got = rxtx_gram(&x, GramOptions::cutoff(1), &GemmBackend::naive(), kind).unwrap();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn rxtx_counts_at_four() {
        let x = M::zeros(4, 4);
        let (be, c) = counted_sw();
        rxtx_gram(&x, GramOptions::cutoff(1), &be, PlanKind::Optimized).unwrap();
        assert_eq!(c.snapshot().mults, 34);
        assert_eq!(c.snapshot().total(), 134);

        let (be, c) = counted_sw();
        rxtx_gram(&x, GramOptions::cutoff(1), &be, PlanKind::Direct).unwrap();
        assert_eq!(c.snapshot().mults, 34);
        assert_eq!(c.snapshot().total(), 34 + 139);
    }

    #[test]
    fn rxtx_counts_at_sixteen_follow_recurrence() {
        let x = M::zeros(16, 16);
        let (be, c) = counted_sw();
        rxtx_gram(&x, GramOptions::cutoff(1), &be, PlanKind::Optimized).unwrap();
        // 8·R(4) + 26·M(4) and 8·R₊(4) + 26·M₊(4) + 100·16
        assert_eq!(c.snapshot().mults, 8 * 34 + 26 * 49);
        assert_eq!(c.snapshot().total(), 8 * 134 + 26 * 214 + 1600);
    }

    #[test]
    fn strassen_counts() {
        let (be, c) = counted_sw();
        strassen_xxt_gram(&M::zeros(4, 4), GramOptions::cutoff(1), &be).unwrap();
        assert_eq!(c.snapshot().mults, 38);
        assert_eq!(c.snapshot().total(), 92);
        let (be, c) = counted_sw();
        strassen_xxt_gram(&M::zeros(2, 2), GramOptions::cutoff(1), &be).unwrap();
        assert_eq!(c.snapshot().mults, 6);
        assert_eq!(c.snapshot().total(), 9);
    }

    #[test]
    fn strassen_random_eight() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = M::random_int(8, 8, -9, 9, &mut rng);
        let got = strassen_xxt_gram(&x, GramOptions::cutoff(1), &GemmBackend::strassen_winograd(1)).unwrap();
        assert_eq!(got, naive_gram(&x).unwrap());
    }

    #[test]
    fn rectangular_and_odd_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (n, m) in [(1, 1), (2, 7), (5, 3), (7, 1), (9, 13), (13, 6)] {
            let x = M::random_int(n, m, -9, 9, &mut rng);
            let want = naive_gram(&x).unwrap();
            for cutoff in [1, 2, 4] {
                let got = rxtx_gram(&x, GramOptions::cutoff(cutoff), &GemmBackend::naive(), PlanKind::Optimized).unwrap();
                assert_eq!(got, want, "{n}x{m} cutoff {cutoff}");
            }
        }
    }

    #[test]
    fn depth_one_applies_the_scheme_once() {
        let x = M::zeros(16, 16);
        let c = Arc::new(OpCounter::new());
        let be = GemmBackend::naive().with_counter(c.clone());
        rxtx_gram(&x, GramOptions::depth(1), &be, PlanKind::Optimized).unwrap();
        // 8 naive Gram products and 26 naive products of 4x4 blocks.
        assert_eq!(c.snapshot().mults, 8 * 40 + 26 * 64);
    }

    #[test]
    fn float_result_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = DenseMatrix::<f64>::from_fn(37, 20, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let got = rxtx_gram(&x, GramOptions::cutoff(2), &GemmBackend::naive(), PlanKind::Optimized).unwrap();
        assert!(got.is_symmetric());
        assert!(got.relative_frobenius_error(&naive_gram(&x).unwrap()) < 1e-13);
    }

    #[test]
    fn overflow_propagates() {
        let x = M::from_fn(4, 4, |_, _| ExactInt(i64::MAX / 2));
        let err = rxtx_gram(&x, GramOptions::cutoff(1), &GemmBackend::naive(), PlanKind::Optimized).unwrap_err();
        assert!(matches!(err, Error::Overflow(_)));
    }

    #[test]
    fn rejects_bad_options() {
        let x = M::zeros(4, 4);
        let r = rxtx_gram(&x, GramOptions::cutoff(0), &GemmBackend::naive(), PlanKind::Optimized);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let r = rxtx_gram(&x, GramOptions::cutoff(1), &GemmBackend::external(), PlanKind::Optimized);
        assert!(matches!(r, Err(Error::Unavailable(_))));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_serial() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = M::random_int(32, 24, -9, 9, &mut rng);
        let c = Arc::new(OpCounter::new());
        let be = GemmBackend::strassen_winograd(1).with_counter(c.clone()).with_parallel(true);
        let got = rxtx_gram(&x, GramOptions::cutoff(1), &be, PlanKind::Optimized).unwrap();
        assert_eq!(got, naive_gram(&x).unwrap());
        let serial = Arc::new(OpCounter::new());
        let be = GemmBackend::strassen_winograd(1).with_counter(serial.clone());
        rxtx_gram(&x, GramOptions::cutoff(1), &be, PlanKind::Optimized).unwrap();
        assert_eq!(c.snapshot(), serial.snapshot());
    }
}
