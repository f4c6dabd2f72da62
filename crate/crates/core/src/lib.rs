//! Temporal linear stability of Hagen–Poiseuille (pipe) flow.
//!
//! Perturbations ∝ exp(i(αx + nθ − ωt)) about the parabolic profile U = 1 − r²
//! are expanded in Chebyshev polynomials of y = r², which keeps every unknown
//! analytic across the axis.  The crate computes discrete spectra and
//! eigenfunctions for all wavenumber cases, analytic zero-wavenumber decay
//! rates, inviscid optimal transient-growth patterns, and an independent
//! primitive-variable solver used for cross-validation.

pub mod assembly;
pub mod bdref;
pub mod cli;
pub mod coeffs;
pub mod eig;
pub mod fields;
pub mod grid;
mod linalg;
pub mod optimal;
pub mod output;
pub mod reference;
pub mod stokes;

use grid::Mapping;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Params(String),
    #[error("grid construction: {0}")]
    Grid(String),
    #[error("assembly: {0}")]
    Assembly(String),
    #[error("eigenvalue solve: {0}")]
    Eig(String),
    #[error("series evaluation: {0}")]
    Series(String),
    #[error("validation mismatch: {0}")]
    Validation(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("output encoding: {0}")]
    Encode(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Numerical knobs with safe defaults; override only for experiments.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// |β| below `beta_floor`·‖Q‖ marks an infinite QZ eigenvalue.
    pub beta_floor: f64,
    /// Relative residual target for shift-invert refinement.
    pub refine_tol: f64,
    /// Matrix–vector product budget for refinement.
    pub refine_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { beta_floor: 1e-12, refine_tol: 1e-12, refine_max_iter: 200 }
    }
}

/// One modal computation: wavenumbers, Reynolds number, resolution, mapping.
#[derive(Clone, Copy, Debug)]
pub struct FlowParams {
    /// Axial wavenumber α ≥ 0.
    pub alpha: f64,
    /// Azimuthal wavenumber n (signed integer).
    pub n: i32,
    /// Reynolds number based on centreline velocity and radius.
    pub re: f64,
    /// Polynomial degree N of the collocation grid.
    pub n_poly: usize,
    /// Radial mapping; `None` selects the built-in rule.
    pub mapping: Option<Mapping>,
    pub tol: Tolerances,
}

impl FlowParams {
    pub fn new(alpha: f64, n: i32, re: f64, n_poly: usize) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::Params(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        if !re.is_finite() || re <= 0.0 {
            return Err(Error::Params(format!("re must be finite and > 0, got {re}")));
        }
        Ok(FlowParams { alpha, n, re, n_poly, mapping: None, tol: Tolerances::default() })
    }

    pub fn with_mapping(mut self, mapping: Mapping) -> Self {
        self.mapping = Some(mapping);
        self
    }

    /// Mapping actually used: explicit choice, else the auto rule.
    pub fn resolve_mapping(&self) -> Mapping {
        self.mapping.unwrap_or_else(|| Mapping::auto(self.alpha, self.n, self.re))
    }
}
