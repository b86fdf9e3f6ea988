//! Mixed-state interference phase arg Tr(Uρ), its singularities, and the
//! fringe patterns it predicts.
//!
//! * [`qmatrix`]: dense complex matrices, density-matrix and unitary validation.
//! * [`phase`]: the functional Tr(Uρ) and the spin-1/2 / spin-j families.
//! * [`topology`]: unwrapped phase along paths, winding numbers, singularity scans.
//! * [`interferogram`]: synthesized interference patterns and peak extraction.

pub mod error;
pub mod interferogram;
pub mod phase;
pub mod qmatrix;
pub mod topology;

pub use error::{Error, Result};
pub use num_complex::Complex64;
