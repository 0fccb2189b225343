//! Exact strong and weak simulation of hypercube-structured IQP circuits.

pub mod bits;
pub mod circuit;
pub mod cli;
pub mod engine;
pub mod gf2kernel;
pub mod oracle;
pub mod phasepoly;
pub mod rng;
pub mod sampler;
pub mod slicer;

pub use bits::BitString;
pub use circuit::{Circuit, GeneratorSpec};
