use serde::{Deserialize, Serialize};

use super::aux::{angles, dyadic_radii};
use super::{vec2, AuxField, AuxFunctionSet, AuxKind, WedgeError, WedgeSpec};

/// Log-radial by angular grid on which shell infima and suprema are taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingGrid {
    /// Radii per factor of two below δ*.
    pub per_octave: usize,
    /// Number of octaves below δ*.
    pub octaves: usize,
    /// Angular intervals on `[0, ζ]`.
    pub n_angular: usize,
}

impl Default for HittingGrid {
    fn default() -> Self {
        Self {
            per_octave: 4,
            octaves: 40,
            n_angular: 64,
        }
    }
}

impl HittingGrid {
    fn refined(self) -> Self {
        Self {
            per_octave: 2 * self.per_octave,
            octaves: self.octaves,
            n_angular: 2 * self.n_angular,
        }
    }
}

/// Grid approximation of the lower bound on the ratio of hitting
/// probabilities from two points of the same shell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingRatio {
    pub value: f64,
    /// `inf_δ inf_{|u|=δ} V₁ / sup_{|u|=δ} V₂`.
    pub first_factor: f64,
    /// `inf_δ inf_{|u|=δ} V₂ / sup_{|u|=δ} V₁`.
    pub second_factor: f64,
    /// Finest grid evaluated.
    pub grid: HittingGrid,
    pub refinements: usize,
    /// Whether the last refinement moved the value by less than 1%.
    pub stable: bool,
}

const MAX_REFINEMENTS: usize = 6;

/// `c₀ = inf_δ [inf V₁ / sup V₂] · inf_δ [inf V₂ / sup V₁]` over shells
/// `|u| = δ ≤ δ*`, taken on `grid` and refined by halving the spacing until
/// it changes by less than 1%.
pub fn hitting_ratio_constant(
    spec: &WedgeSpec,
    delta_star: f64,
    grid: HittingGrid,
) -> Result<HittingRatio, WedgeError> {
    if grid.per_octave == 0 || grid.n_angular == 0 {
        return Err(WedgeError::InvalidGrid(format!("{grid:?}")));
    }
    let aux = AuxFunctionSet::new(spec, delta_star)?;
    if aux.kind() != AuxKind::Pair {
        return Err(WedgeError::UnsupportedRegime(
            "the hitting ratio needs 0 < alpha* < 1".into(),
        ));
    }
    let mut grid = grid;
    let mut best = evaluate(&aux, grid);
    let mut refinements = 0;
    let mut stable = false;
    while refinements < MAX_REFINEMENTS {
        let finer = grid.refined();
        let next = evaluate(&aux, finer);
        refinements += 1;
        stable = (next.0 * next.1 - best.0 * best.1).abs() < 0.01 * best.0 * best.1;
        grid = finer;
        best = next;
        if stable {
            break;
        }
    }
    Ok(HittingRatio {
        value: best.0 * best.1,
        first_factor: best.0,
        second_factor: best.1,
        grid,
        refinements,
        stable,
    })
}

fn evaluate(aux: &AuxFunctionSet, grid: HittingGrid) -> (f64, f64) {
    let zeta = aux.cone().spec().zeta();
    let thetas: Vec<f64> = angles(zeta, grid.n_angular).collect();
    let (mut first, mut second) = (f64::INFINITY, f64::INFINITY);
    for delta in dyadic_radii(aux.delta_star(), grid.per_octave, grid.octaves) {
        let (mut v1_lo, mut v1_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut v2_lo, mut v2_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &z in &thetas {
            let p = vec2::polar(delta, z);
            let v1 = aux.value(AuxField::V1, p);
            let v2 = aux.value(AuxField::V2, p);
            v1_lo = v1_lo.min(v1);
            v1_hi = v1_hi.max(v1);
            v2_lo = v2_lo.min(v2);
            v2_hi = v2_hi.max(v2);
        }
        first = first.min(v1_lo / v2_hi);
        second = second.min(v2_lo / v1_hi);
    }
    (first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wedge::select_delta_star;
    use std::f64::consts::PI;

    #[test]
    fn constant_in_unit_interval_and_stable() {
        let spec = WedgeSpec::from_angles(0.75 * PI, 3.0 * PI / 16.0, 3.0 * PI / 16.0).unwrap();
        let d = select_delta_star(&spec).unwrap();
        let c = hitting_ratio_constant(&spec, d, HittingGrid::default()).unwrap();
        assert!(c.value > 0.0 && c.value <= 1.0, "{c:?}");
        assert!(c.stable);
    }

    #[test]
    fn wrong_regime_is_rejected() {
        let spec = WedgeSpec::from_angles(PI / 2.0, 0.2, -0.2).unwrap();
        let d = select_delta_star(&spec).unwrap();
        assert!(matches!(
            hitting_ratio_constant(&spec, d, HittingGrid::default()),
            Err(WedgeError::UnsupportedRegime(_))
        ));
    }
}
