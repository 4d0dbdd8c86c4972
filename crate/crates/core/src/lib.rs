//! Decides pure point dynamical spectrum for primitive substitution Delone multi-colour sets
//! and self-affine tilings, via overlap coincidence, algebraic coincidence, and cut-and-project
//! window estimation.

pub mod coincidence;
pub mod corpus;
pub mod cps;
pub mod geometry;
pub mod par;
pub mod report;
pub mod ring;
pub mod system;
pub mod tiling;

pub use par::Execution;
