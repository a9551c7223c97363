//! Hidden signals in integer sequences.
//!
//! The crate builds greedy numeration systems and the sequences obtained by
//! writing `n` in one base and reading the digits in another, evaluates the
//! Hofstadter family of meta-recursions, and measures how `β·aₙ mod 1` is
//! distributed: Weyl sums, FFT scans, circle histograms and the analytic
//! limits that explain them. Frequencies `β` are carried as rigorous
//! enclosures so that `‖β·aₙ‖` stays meaningful far beyond machine range.
//!
//! Module map:
//!
//! * [`seqcore`]: exact prefixes of the integer sequences (recurrences, Ulam, factorial sums).
//! * [`numeration`]: greedy base-`aᵢ` codec, signatures and replacement sequences.
//! * [`hofstadter`]: direct and shift-based evaluation of `H(n) = n − H^{(d)}(n−1)`.
//! * [`precision`]: extended-precision enclosures, algebraic constants and decay classification.
//! * [`algebra`]: polynomial roots, unit-circle counts, Pisot tests and closed forms.
//! * [`weyl`]: Weyl sums, spectral scans, histograms and Fourier coefficients.
//! * [`limits`]: limit-distribution analytics built on top of the above.
//! * [`reproduce`]: the numbered reproduction checks shared by the test suite and the CLI.

pub mod algebra;
pub mod error;
pub mod hofstadter;
pub mod limits;
pub mod numeration;
pub mod precision;
pub mod reproduce;
pub mod seqcore;
pub mod svg;
pub mod weyl;

pub use error::{Error, Result};
