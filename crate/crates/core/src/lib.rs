//! Machine-number format evaluation for the implicitly restarted Arnoldi
//! method.
//!
//! The crate is organized bottom-up:
//!
//! - [`formats`]: bit-exact OFP8, bfloat16, IEEE, posit and takum scalars plus
//!   the 128-bit [`Reference`] scalar;
//! - [`matrix`]: Matrix Market and edge-list ingestion, squareness repair,
//!   test-set filtering and the portable matrix archive;
//! - [`laplacian`]: average symmetrization, the symmetrically normalized
//!   Laplacian and the graph class table;
//! - [`arnoldi`]: a type-generic Krylov–Schur partial Schur solver;
//! - [`align`]: cosine-similarity matching, sign resolution and error metrics;
//! - [`harness`]: the per-(matrix, format) experiment protocol, sweeps and CSV
//!   reports.

pub mod align;
pub mod arnoldi;
pub mod formats;
pub mod harness;
pub mod laplacian;
pub mod matrix;

pub use formats::{Format, FormatDescriptor, Reference, Scalar, SoftScalar};
