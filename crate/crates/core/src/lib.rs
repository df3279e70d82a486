//! RXTX: a recursive 4x4-block algorithm for X·Xᵗ using 8 recursive calls
//! and 26 general products, with its baselines (recursive Strassen for
//! X·Xᵗ, Strassen–Winograd, naive), an exact verifier for block schemes,
//! operation-count models, and a small product-search toy.
//!
//! For XᵗX, transpose the input first: XᵗX = (Xᵗ)(Xᵗ)ᵗ.

pub mod bench;
pub mod counter;
pub mod discovery;
pub mod error;
pub mod exec;
mod expr;
pub mod gemm;
pub mod matrix;
pub mod opcount;
pub mod plan;
pub mod scheme;

pub use counter::{OpCount, OpCounter};
pub use error::{Error, Result};
pub use exec::{rxtx_gram, scheme_gram, strassen_xxt_gram, GramOptions};
pub use gemm::{gemm, BackendKind, GemmBackend};
pub use matrix::{naive_gram, naive_multiply, DenseMatrix, Element, ElementDomain, ExactInt};
pub use opcount::{count_closed_form, count_optimal_cutoff, count_recurrence, emit_ratio_table, Algorithm, Metric};
pub use plan::{count_scheme_additions, AdditionPlan, PlanKind};
pub use scheme::{export_scheme, import_scheme, rxtx_scheme, strassen_xxt_scheme, verify_scheme, BilinearScheme};
