use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("Hermitian symmetry violated: imaginary residue {residue:.3e} exceeds 1e-6")]
    SymmetryViolation { residue: f64 },

    #[error("scaled frequency {requested:.3} exceeds dual-grid extent {max:.3} and no analytic form is available")]
    RangeError { requested: f64, max: f64 },

    #[error("support mismatch: {excess_mass:.3e} of f-mass lies where the reference is below floor")]
    SupportMismatch { excess_mass: f64 },

    #[error("degenerate mask: every node is below the density floor")]
    DegenerateMask,

    #[error("inapplicable input: {0}")]
    InapplicableInput(String),

    #[error("monotonicity violated at step {index}: {value:.6e} > {prev:.6e} + slack")]
    MonotonicityViolation { index: usize, value: f64, prev: f64 },
}

pub type Result<T> = std::result::Result<T, LabError>;
