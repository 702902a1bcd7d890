//! Exact-arithmetic kernel for one-dimensional q-deformed crystalline
//! calculus: delta-structures on `R[x]` and `R[x][xi]`, the twisted
//! divided-power algebra with its Frobenius and gamma maps, the flip and
//! diagonal groupoid structure, and the ring of q-differential operators
//! with stratification round-trips. Every closed identity is machine-checked
//! in exact arithmetic over `Z[q]`.

pub mod context;
pub mod deltaring;
pub mod error;
pub mod groupoid;
pub mod qarith;
pub mod qdiff;
pub mod report;
pub mod suites;
pub mod twisted;

pub use context::Context;
pub use error::{QError, QResult};
