//! Block-sparse compressed sensing toolkit.
//!
//! Signals are partitioned into uniform length-`d` blocks; recovery exploits
//! the block structure through block-coherence analysis, block orthogonal
//! matching pursuit, and constrained mixed l2/l1 minimization. All arithmetic
//! is complex double-precision; real inputs embed with zero imaginary parts.
//!
//! Block indices are 0-based throughout the API and 1-based in CLI output
//! and rendered reports.
//!
//! Everything here is a pure function over immutable values, safe to call
//! concurrently.

pub mod coherence;
pub mod dictionary;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod norms;
pub mod recovery;
pub mod types;
pub mod uncertainty;

pub use error::{Error, Result};
pub use types::{BlockMatrix, BlockShape, BlockVector, SupportSet};

pub use nalgebra;
pub use num_complex::Complex64;
