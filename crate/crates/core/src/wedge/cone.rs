use super::fd::ScalarField;
use super::{vec2, Regime, Vec2, WedgeError, WedgeSpec};

/// The harmonic function `Ψ` of a wedge and the derived `Φ`.
///
/// `Φ = 1/Ψ` for `α* < 0`, `e^{-Ψ}` for `α* = 0` and `Ψ` for `α* > 0`; in
/// each case `Φ > 0` on `K \ {0}` and `Φ → 0` at the tip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeFunctionSet {
    spec: WedgeSpec,
    alpha: f64,
    regime: Regime,
    tan_zeta1: f64,
}

impl ConeFunctionSet {
    pub fn new(spec: &WedgeSpec) -> Self {
        Self {
            spec: *spec,
            alpha: spec.alpha_star(),
            regime: spec.regime(),
            tan_zeta1: spec.zeta1().tan(),
        }
    }

    pub fn spec(&self) -> &WedgeSpec {
        &self.spec
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Angular profile: `ψ(z) = cos(α* z - ζ₁)`, or `ψ⁰(z) = -z tan ζ₁`.
    pub fn profile(&self, z: f64) -> f64 {
        match self.regime {
            Regime::AlphaZero => -z * self.tan_zeta1,
            _ => (self.alpha * z - self.spec.zeta1()).cos(),
        }
    }

    pub fn profile_derivative(&self, z: f64) -> f64 {
        match self.regime {
            Regime::AlphaZero => -self.tan_zeta1,
            _ => -self.alpha * (self.alpha * z - self.spec.zeta1()).sin(),
        }
    }

    /// `Ψ(r, z)`.
    pub fn harmonic(&self, r: f64, z: f64) -> Result<f64, WedgeError> {
        check_radius(r)?;
        Ok(self.harmonic_polar(r, z))
    }

    /// `Φ(r, z)`.
    pub fn gauge(&self, r: f64, z: f64) -> Result<f64, WedgeError> {
        check_radius(r)?;
        Ok(self.gauge_from(self.harmonic_polar(r, z)))
    }

    /// `∇Ψ` in Cartesian coordinates.
    pub fn harmonic_grad(&self, r: f64, z: f64) -> Result<Vec2, WedgeError> {
        check_radius(r)?;
        Ok(self.harmonic_grad_polar(r, z))
    }

    pub fn harmonic_at(&self, p: Vec2) -> f64 {
        self.harmonic_polar(vec2::norm(p), self.spec.angle(p))
    }

    pub fn gauge_at(&self, p: Vec2) -> f64 {
        self.gauge_from(self.harmonic_at(p))
    }

    pub fn harmonic_grad_at(&self, p: Vec2) -> Vec2 {
        self.harmonic_grad_polar(vec2::norm(p), self.spec.angle(p))
    }

    pub fn gauge_grad_at(&self, p: Vec2) -> Vec2 {
        let psi = self.harmonic_at(p);
        let g = self.harmonic_grad_at(p);
        let factor = match self.regime {
            Regime::AlphaNegative => -1.0 / (psi * psi),
            Regime::AlphaZero => -(-psi).exp(),
            Regime::AlphaPositive => 1.0,
        };
        vec2::scale(g, factor)
    }

    /// `ΔΦ`, using `ΔΨ = 0`.
    pub fn gauge_laplacian_at(&self, p: Vec2) -> f64 {
        let psi = self.harmonic_at(p);
        let g = self.harmonic_grad_at(p);
        let g2 = vec2::dot(g, g);
        match self.regime {
            Regime::AlphaNegative => 2.0 * g2 / (psi * psi * psi),
            Regime::AlphaZero => (-psi).exp() * g2,
            Regime::AlphaPositive => 0.0,
        }
    }

    pub fn field(&self, kind: ConeField) -> ConeFieldRef<'_> {
        ConeFieldRef { set: self, kind }
    }

    pub(crate) fn harmonic_polar(&self, r: f64, z: f64) -> f64 {
        match self.regime {
            Regime::AlphaZero => -r.ln() + self.profile(z),
            _ => r.powf(self.alpha) * self.profile(z),
        }
    }

    pub(crate) fn harmonic_grad_polar(&self, r: f64, z: f64) -> Vec2 {
        // ∇Ψ = ∂_r Ψ r̂ + (1/r) ∂_z Ψ ẑ.
        let (dr, dz_over_r) = match self.regime {
            Regime::AlphaZero => (-1.0 / r, -self.tan_zeta1 / r),
            _ => {
                let scale = r.powf(self.alpha - 1.0);
                (
                    self.alpha * scale * self.profile(z),
                    scale * self.profile_derivative(z),
                )
            }
        };
        let (s, c) = z.sin_cos();
        [dr * c - dz_over_r * s, dr * s + dz_over_r * c]
    }

    fn gauge_from(&self, psi: f64) -> f64 {
        match self.regime {
            Regime::AlphaNegative => 1.0 / psi,
            Regime::AlphaZero => (-psi).exp(),
            Regime::AlphaPositive => psi,
        }
    }
}

fn check_radius(r: f64) -> Result<(), WedgeError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(WedgeError::Domain(r))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeField {
    Harmonic,
    Gauge,
}

/// A cone function viewed as a scalar field on the wedge.
#[derive(Clone, Copy, Debug)]
pub struct ConeFieldRef<'a> {
    set: &'a ConeFunctionSet,
    kind: ConeField,
}

impl ScalarField for ConeFieldRef<'_> {
    fn value(&self, p: Vec2) -> f64 {
        match self.kind {
            ConeField::Harmonic => self.set.harmonic_at(p),
            ConeField::Gauge => self.set.gauge_at(p),
        }
    }

    fn gradient(&self, p: Vec2) -> Option<Vec2> {
        Some(match self.kind {
            ConeField::Harmonic => self.set.harmonic_grad_at(p),
            ConeField::Gauge => self.set.gauge_grad_at(p),
        })
    }

    fn laplacian(&self, p: Vec2) -> Option<f64> {
        Some(match self.kind {
            ConeField::Harmonic => 0.0,
            ConeField::Gauge => self.set.gauge_laplacian_at(p),
        })
    }

    fn margin(&self, p: Vec2) -> f64 {
        self.set.spec.interior_margin(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, FRAC_PI_8};

    #[test]
    fn positive_regime_example() {
        let spec = WedgeSpec::from_angles(FRAC_PI_2, FRAC_PI_6, FRAC_PI_6 / 2.0).unwrap();
        let c = ConeFunctionSet::new(&spec);
        assert!((c.profile(FRAC_PI_3) - 1.0).abs() < 1e-15);
        assert!((c.harmonic(4.0, FRAC_PI_3).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(c.gauge(4.0, FRAC_PI_3), c.harmonic(4.0, FRAC_PI_3));
    }

    #[test]
    fn zero_regime_on_lower_face() {
        let spec = WedgeSpec::from_angles(FRAC_PI_2, 0.2, -0.2).unwrap();
        let c = ConeFunctionSet::new(&spec);
        assert_eq!(c.regime(), Regime::AlphaZero);
        assert_eq!(c.profile(0.0), 0.0);
        assert_eq!(c.harmonic(3.0, 0.0).unwrap(), -(3.0f64.ln()));
    }

    #[test]
    fn negative_regime_gauge_vanishes_at_tip() {
        let spec = WedgeSpec::from_angles(FRAC_PI_2, -FRAC_PI_8, -FRAC_PI_8).unwrap();
        let c = ConeFunctionSet::new(&spec);
        let z = 0.7;
        for r in [1e-2, 1e-4, 1e-8] {
            let phi = c.gauge(r, z).unwrap();
            assert!((phi - r.sqrt() / c.profile(z)).abs() < 1e-15);
        }
        assert!(c.gauge(1e-12, z).unwrap() < 1e-5);
    }

    #[test]
    fn rejects_non_positive_radius() {
        let spec = WedgeSpec::from_angles(FRAC_PI_2, 0.0, 0.0).unwrap();
        let c = ConeFunctionSet::new(&spec);
        assert_eq!(c.harmonic(0.0, 0.1), Err(WedgeError::Domain(0.0)));
        assert!(c.gauge(-1.0, 0.1).is_err());
    }

    #[test]
    fn gradient_matches_central_difference() {
        for (z1, z2) in [(0.3, 0.2), (0.2, -0.2), (-0.3, -0.1)] {
            let spec = WedgeSpec::from_angles(1.9, z1, z2).unwrap();
            let c = ConeFunctionSet::new(&spec);
            let p = vec2::polar(0.8, 0.9);
            let g = c.harmonic_grad_at(p);
            let h = 1e-6;
            let dx = (c.harmonic_at([p[0] + h, p[1]]) - c.harmonic_at([p[0] - h, p[1]])) / (2.0 * h);
            let dy = (c.harmonic_at([p[0], p[1] + h]) - c.harmonic_at([p[0], p[1] - h])) / (2.0 * h);
            assert!((g[0] - dx).abs() < 1e-8 && (g[1] - dy).abs() < 1e-8);
        }
    }
}
