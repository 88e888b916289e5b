//! Encrypted operator computing: reversible-circuit ciphers, conjugated
//! BDD chips and evaluators that run plaintext circuits on ciphertexts.
//!
//! The pipeline, bottom up:
//!
//! * [`gate`]: reversible gates, circuits and exact simulation.
//! * [`gateset`]: the inflationary and super-nonlinear 3-bit gate sets.
//! * [`cipher`]: the two-stage cipher `E = N L` on `n = 3^q` bitlines.
//! * [`rewrite`]: gate collisions, simplification and factorization.
//! * [`conjugate`]: transport of controlled gates through the linear stage.
//! * [`robdd`] and [`chip`]: BDD bundles for gates conjugated by `N`.
//! * [`evaluator`]: compilation of a circuit into a chip sequence and its
//!   execution on ciphertexts.
//! * [`analysis`]: size and expansion bounds, and report generation.

pub mod analysis;
pub mod bits;
pub mod chip;
pub mod cipher;
pub mod conjugate;
pub mod error;
pub mod evaluator;
pub mod gate;
pub mod gateset;
pub mod rewrite;
pub mod robdd;
pub mod textio;

pub use bits::Bits;
pub use error::{Error, Result};
