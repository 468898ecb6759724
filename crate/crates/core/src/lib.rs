//! Reduction gadgets between geometric matching problems (EMD, asymmetric
//! EMD, low-rank assignment) and Boolean vector problems (orthogonal
//! vectors, hitting set, Find-OV, maximum orthogonal matching), with the
//! exact solvers and brute-force oracles that check them.

pub mod error;
pub mod exact;
pub mod gadgets;
pub mod generate;
pub mod matching;
pub mod ov;
pub mod pipeline;
pub mod ratio;
pub mod real;
pub mod seed;
pub mod squares;
pub mod vectors;
pub mod verify;

pub use error::{Error, Result};
pub use matching::{Cost, CostOracle, Matching, MatchingKind};
pub use real::Real;
pub use vectors::{BinaryVector, Instance, IntVector, PointSetPair, Vector, VectorKind};
