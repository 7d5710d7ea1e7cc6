//! Spectral laboratory for heavy-tailed densities on the line.
//!
//! Builds symmetric stable and Linnik (geometric-stable) densities on a
//! shared uniform grid, applies Riesz fractional derivatives spectrally,
//! evaluates entropy / Fisher-information functionals with analytic tail and
//! origin-cusp corrections, evolves densities under the exact Fourier-space
//! solution of the fractional Fokker-Planck equation, and runs quantitative
//! central-limit cascades with the associated inequality checks.

pub mod cascade;
pub mod completion;
pub mod density;
pub mod error;
pub mod evolve;
pub mod functionals;
pub mod grid;
pub mod report;
pub mod riesz;
pub mod series;
pub mod special;
pub mod transforms;
pub mod verification;

pub use error::{LabError, Result};
pub use grid::Grid;
pub use transforms::{DensitySample, Spectrum};
