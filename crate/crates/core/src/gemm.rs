//! General matrix-product engines: the schoolbook kernel, Strassen–Winograd
//! recursion with a cutoff, and an adapter for a platform-optimized kernel.

use std::fmt;
use std::sync::Arc;

use crate::counter::OpCounter;
use crate::error::{Error, Result};
use crate::matrix::{add_counted, naive_multiply_counted, partition, sub_counted, DenseMatrix, Element};

pub const DEFAULT_WINOGRAD_CUTOFF: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Naive,
    /// Recurse while every dimension exceeds `cutoff`, then fall back to the
    /// schoolbook kernel.
    StrassenWinograd { cutoff: usize },
    /// Optimized provider linked behind the `external` feature (f64 only).
    External,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Naive => write!(f, "naive"),
            BackendKind::StrassenWinograd { cutoff } => write!(f, "strassen-winograd(cutoff={cutoff})"),
            BackendKind::External => write!(f, "external"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GemmBackend {
    kind: BackendKind,
    counter: Option<Arc<OpCounter>>,
    parallel: bool,
}

impl GemmBackend {
    pub fn new(kind: BackendKind) -> Self {
        if let BackendKind::StrassenWinograd { cutoff } = kind {
            assert!(cutoff >= 1, "cutoff must be at least 1");
        }
        Self { kind, counter: None, parallel: false }
    }

    pub fn naive() -> Self {
        Self::new(BackendKind::Naive)
    }

    pub fn strassen_winograd(cutoff: usize) -> Self {
        Self::new(BackendKind::StrassenWinograd { cutoff })
    }

    pub fn external() -> Self {
        Self::new(BackendKind::External)
    }

    pub fn with_counter(mut self, counter: Arc<OpCounter>) -> Self {
        self.counter = Some(counter);
        self
    }

    /// Evaluate independent sub-products on the rayon pool. Has no effect
    /// without the `parallel` feature.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn counter(&self) -> Option<&OpCounter> {
        self.counter.as_deref()
    }

    pub fn parallel(&self) -> bool {
        self.parallel && cfg!(feature = "parallel")
    }

    /// Whether this backend can multiply matrices of element type `T`.
    pub fn is_available<T: Element>(&self) -> bool {
        match self.kind {
            BackendKind::External => {
                let probe = DenseMatrix::<T>::zeros(1, 1);
                T::external_gemm(&probe, &probe).is_some()
            }
            _ => true,
        }
    }

    pub fn gemm<T: Element>(&self, a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if a.cols() != b.rows() {
            return Err(Error::DimensionMismatch { op: "gemm", left: a.dims(), right: b.dims() });
        }
        match self.kind {
            BackendKind::Naive => naive_multiply_counted(a, b, self.counter()),
            BackendKind::StrassenWinograd { cutoff } => self.winograd(a, b, cutoff),
            BackendKind::External => {
                let c = T::external_gemm(a, b)
                    .ok_or_else(|| Error::Unavailable(format!("no external gemm for {:?}", T::DOMAIN)))?;
                if let Some(counter) = self.counter() {
                    let (r, k, n) = (a.rows() as u64, a.cols() as u64, b.cols() as u64);
                    counter.add_mults(r * k * n);
                    counter.add_adds(r * (k - 1) * n);
                }
                Ok(c)
            }
        }
    }

    fn winograd<T: Element>(&self, a: &DenseMatrix<T>, b: &DenseMatrix<T>, cutoff: usize) -> Result<DenseMatrix<T>> {
        let (p, q, r) = (a.rows(), a.cols(), b.cols());
        if p.min(q).min(r) <= cutoff {
            return naive_multiply_counted(a, b, self.counter());
        }
        let pa = partition(a, 2);
        let pb = partition(b, 2);
        let mut slots: Vec<Option<DenseMatrix<T>>> = vec![None; Slot::COUNT];
        for i in 0..4 {
            slots[Slot::A(i).index()] = Some(pa.block(i as usize).clone());
            slots[Slot::B(i).index()] = Some(pb.block(i as usize).clone());
        }
        let get = |slots: &[Option<DenseMatrix<T>>], s: Slot| -> DenseMatrix<T> {
            slots[s.index()].clone().expect("winograd step reads an unset slot")
        };

        // Pre-additions, then the seven products (independent), then the
        // post-additions.
        let mut muls = Vec::new();
        for step in WINOGRAD_STEP.iter() {
            match *step {
                Step::Mul(dst, l, rr) => muls.push((dst, l, rr)),
                Step::Add(dst, l, rr) | Step::Sub(dst, l, rr) => {
                    if !muls.is_empty() {
                        self.run_products(&mut slots, &mut muls, cutoff)?;
                    }
                    let (x, y) = (get(&slots, l), get(&slots, rr));
                    let v = if matches!(step, Step::Add(..)) {
                        add_counted(&x, &y, self.counter())?
                    } else {
                        sub_counted(&x, &y, self.counter())?
                    };
                    slots[dst.index()] = Some(v);
                }
            }
        }
        let c11 = get(&slots, C_OUT[0]);
        let (bp, br) = c11.dims();
        let mut out = DenseMatrix::zeros(p, r);
        for (idx, s) in C_OUT.iter().enumerate() {
            out.paste((idx / 2) * bp, (idx % 2) * br, &get(&slots, *s));
        }
        Ok(out)
    }

    fn run_products<T: Element>(
        &self,
        slots: &mut [Option<DenseMatrix<T>>],
        muls: &mut Vec<(Slot, Slot, Slot)>,
        cutoff: usize,
    ) -> Result<()> {
        let jobs: Vec<_> = muls
            .drain(..)
            .map(|(dst, l, r)| {
                let lhs = slots[l.index()].clone().expect("unset slot");
                let rhs = slots[r.index()].clone().expect("unset slot");
                (dst, lhs, rhs)
            })
            .collect();
        let results: Vec<Result<(Slot, DenseMatrix<T>)>> = {
            #[cfg(feature = "parallel")]
            {
                if self.parallel {
                    use rayon::prelude::*;
                    jobs.par_iter().map(|(d, l, r)| Ok((*d, self.winograd(l, r, cutoff)?))).collect()
                } else {
                    jobs.iter().map(|(d, l, r)| Ok((*d, self.winograd(l, r, cutoff)?))).collect()
                }
            }
            #[cfg(not(feature = "parallel"))]
            {
                jobs.iter().map(|(d, l, r)| Ok((*d, self.winograd(l, r, cutoff)?))).collect()
            }
        };
        for res in results {
            let (dst, m) = res?;
            slots[dst.index()] = Some(m);
        }
        Ok(())
    }
}

/// Convenience wrapper for [`GemmBackend::gemm`].
pub fn gemm<T: Element>(backend: &GemmBackend, a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    backend.gemm(a, b)
}

/// Named block storage for one Strassen–Winograd level. `A(0..4)` and
/// `B(0..4)` are the input quadrants in row-major order (11, 12, 21, 22).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    A(u8),
    B(u8),
    S(u8),
    T(u8),
    P(u8),
    U(u8),
}

impl Slot {
    const COUNT: usize = 4 + 4 + 4 + 4 + 7 + 7;

    fn index(self) -> usize {
        match self {
            Slot::A(i) => i as usize,
            Slot::B(i) => 4 + i as usize,
            Slot::S(i) => 8 + i as usize - 1,
            Slot::T(i) => 12 + i as usize - 1,
            Slot::P(i) => 16 + i as usize - 1,
            Slot::U(i) => 23 + i as usize - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Add(Slot, Slot, Slot),
    Sub(Slot, Slot, Slot),
    Mul(Slot, Slot, Slot),
}

use Slot::{A, B, P, S, T, U};

const A11: Slot = A(0);
const A12: Slot = A(1);
const A21: Slot = A(2);
const A22: Slot = A(3);
const B11: Slot = B(0);
const B12: Slot = B(1);
const B21: Slot = B(2);
const B22: Slot = B(3);

/// One level of the Winograd form of Strassen's algorithm: 8 pre-additions,
/// 7 products, 7 post-additions.
pub const WINOGRAD_STEP: [Step; 22] = [
    Step::Add(S(1), A21, A22),
    Step::Sub(S(2), S(1), A11),
    Step::Sub(S(3), A11, A21),
    Step::Sub(S(4), A12, S(2)),
    Step::Sub(T(1), B12, B11),
    Step::Sub(T(2), B22, T(1)),
    Step::Sub(T(3), B22, B12),
    Step::Sub(T(4), T(2), B21),
    Step::Mul(P(1), A11, B11),
    Step::Mul(P(2), A12, B21),
    Step::Mul(P(3), S(4), B22),
    Step::Mul(P(4), A22, T(4)),
    Step::Mul(P(5), S(1), T(1)),
    Step::Mul(P(6), S(2), T(2)),
    Step::Mul(P(7), S(3), T(3)),
    Step::Add(U(1), P(1), P(2)),
    Step::Add(U(2), P(1), P(6)),
    Step::Add(U(3), U(2), P(7)),
    Step::Add(U(4), U(2), P(5)),
    Step::Add(U(5), U(4), P(3)),
    Step::Sub(U(6), U(3), P(4)),
    Step::Add(U(7), U(3), P(5)),
];

/// Result quadrants C11, C12, C21, C22.
const C_OUT: [Slot; 4] = [U(1), U(5), U(6), U(7)];

/// Block additions/subtractions in one level of [`WINOGRAD_STEP`].
pub fn winograd_addition_count() -> usize {
    WINOGRAD_STEP.iter().filter(|s| !matches!(s, Step::Mul(..))).count()
}

pub fn winograd_multiplication_count() -> usize {
    WINOGRAD_STEP.iter().filter(|s| matches!(s, Step::Mul(..))).count()
}
