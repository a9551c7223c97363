//! Rigorous real arithmetic for distance-to-integer questions.
//!
//! [`ExtReal`] is a dyadic enclosure, [`AlgebraicReal`] a root of an integer
//! polynomial refined on demand, and [`Real`] the expression type frequencies
//! are written in. [`decay`] builds on them to classify windows of `‖β·a_k‖`.

pub mod algebraic;
pub mod decay;
pub mod ext;
pub mod real;

pub use algebraic::{constants, AlgebraicReal};
pub use decay::{
    classify_decay, dist_to_int, nearest_integer, nearest_integer_sequence, recover_coefficients,
    DecayClass, DecayConfig, DecayReport, NearestIntegerSequence,
};
pub use ext::ExtReal;
pub use real::Real;
