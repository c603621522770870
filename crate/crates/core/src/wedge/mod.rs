//! Closed-form analytics for a planar wedge with oblique reflection.
//!
//! In polar coordinates `(r, z)` the wedge is `K = {r > 0, 0 < z < ζ}` with
//! constant reflection vectors `g¹` on `{z = 0}` and `g²` on `{z = ζ}`.
//! With `α* = (ζ₁ + ζ₂)/ζ` the function
//!
//! ```text
//! Ψ(r, z) = r^α* cos(α* z - ζ₁)      (α* ≠ 0)
//! Ψ(r, z) = -ln r - z tan ζ₁          (α* = 0)
//! ```
//!
//! is harmonic in `K` with `g·∇Ψ = 0` on both faces. Everything else in
//! this module (the distance-like `Φ`, the auxiliary functions, the
//! hitting-ratio constant) is built from `Ψ`.
//!
//! Only `d = 2` is covered.

mod aux;
mod cone;
mod conditions;
mod fd;
mod hitting;
mod report;
mod spec;

pub use aux::{
    select_delta_star, AuxField, AuxFieldRef, AuxFunctionSet, AuxKind, DELTA_STAR_MARGIN,
};
pub use cone::{ConeField, ConeFieldRef, ConeFunctionSet};
pub use conditions::{check_condition_g3, condition_g4, find_e_vector, G0Arc, G4Check};
pub use fd::{
    boundary_flux, fd_gradient, laplacian_fd, richardson_order, FnField, ScalarField,
};
pub use hitting::{hitting_ratio_constant, HittingGrid, HittingRatio};
pub use report::{analytics_report, field_table, FieldRow, WedgeAnalyticsReport};
pub use spec::{
    reflection_angles, Face, Regime, WedgeSpec, WedgeSpecFile, ALPHA_ZERO_TOL, UNIT_INPUT_TOL,
};

/// A point or vector in the plane.
pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WedgeError {
    #[error("opening angle {0} must lie in (0, 2π)")]
    InvalidOpening(f64),
    #[error("reflection vector on the {face:?} face has norm {norm}, expected 1")]
    NotUnit { face: Face, norm: f64 },
    #[error("Condition G(i) violated on the {face:?} face: g·n ≤ 0")]
    ConditionG1 { face: Face },
    #[error("Condition G(iv) fails: g1 and g2 are opposite, no e with e·g > 0")]
    ConditionG4,
    #[error("perturbation size {0} must be a finite non-negative number")]
    InvalidPerturbation(f64),
    #[error("perturbed reflection vector on the {face:?} face vanishes")]
    DegeneratePerturbation { face: Face },
    #[error("radius {0} must be positive")]
    Domain(f64),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("delta* = {delta} too large: {reason}")]
    DeltaStar { delta: f64, reason: String },
    #[error("no admissible delta* on the dyadic grid")]
    NoDeltaStar,
    #[error("stencil of half-width {h} leaves the domain at ({x}, {y}); margin {margin}")]
    StencilOutside { x: f64, y: f64, h: f64, margin: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Small fixed-size vector helpers.
pub mod vec2 {
    use super::Vec2;

    pub fn dot(a: Vec2, b: Vec2) -> f64 {
        a[0] * b[0] + a[1] * b[1]
    }

    pub fn norm(a: Vec2) -> f64 {
        a[0].hypot(a[1])
    }

    pub fn add(a: Vec2, b: Vec2) -> Vec2 {
        [a[0] + b[0], a[1] + b[1]]
    }

    pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
        [a[0] - b[0], a[1] - b[1]]
    }

    pub fn scale(a: Vec2, s: f64) -> Vec2 {
        [a[0] * s, a[1] * s]
    }

    pub fn from_angle(theta: f64) -> Vec2 {
        [theta.cos(), theta.sin()]
    }

    pub fn polar(r: f64, theta: f64) -> Vec2 {
        [r * theta.cos(), r * theta.sin()]
    }

    pub fn unit(a: Vec2) -> Vec2 {
        scale(a, 1.0 / norm(a))
    }
}
