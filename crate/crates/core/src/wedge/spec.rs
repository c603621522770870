use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{vec2, Vec2, WedgeError};

/// `|α*|` below this is treated as the logarithmic (`α* = 0`) regime.
pub const ALPHA_ZERO_TOL: f64 = 1e-12;

/// Slack on the unit-length check of reflection vectors read from input.
pub const UNIT_INPUT_TOL: f64 = 1e-9;

/// One of the two faces of the wedge `{(r, z) : r > 0, 0 < z < ζ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    /// `z = 0`, along `(1, 0)`.
    Lower,
    /// `z = ζ`, along `(cos ζ, sin ζ)`.
    Upper,
}

impl Face {
    pub const BOTH: [Face; 2] = [Face::Lower, Face::Upper];

    pub fn other(self) -> Face {
        match self {
            Face::Lower => Face::Upper,
            Face::Upper => Face::Lower,
        }
    }
}

/// Sign regime of the corner exponent `α*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    AlphaNegative,
    AlphaZero,
    AlphaPositive,
}

/// Serialized form: `{ "zeta": …, "g1": [x, y], "g2": [x, y] }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WedgeSpecFile {
    pub zeta: f64,
    pub g1: Vec2,
    pub g2: Vec2,
}

/// A planar wedge of opening `ζ` with constant oblique reflection on each face.
///
/// Orientation table (inward normal `n`, radial unit `r̂`):
///
/// | face  | boundary ray       | `n`                | `r̂`             |
/// |-------|--------------------|--------------------|-----------------|
/// | lower | `z = 0`            | `(0, 1)`           | `(1, 0)`        |
/// | upper | `z = ζ`            | `(sin ζ, -cos ζ)`  | `(cos ζ, sin ζ)` |
///
/// The reflection angle on face `i` is `ζ_i = atan2(-g·r̂, g·n)`, so
/// `g = cos ζ_i n - sin ζ_i r̂` and `ζ_i > 0` exactly when `g` has a negative
/// radial component, i.e. points towards the tip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WedgeSpec {
    zeta: f64,
    g1: Vec2,
    g2: Vec2,
    zeta1: f64,
    zeta2: f64,
    alpha_star: f64,
}

impl WedgeSpec {
    /// Validates the geometry and derives the reflection angles and `α*`.
    ///
    /// Reflection vectors must be unit length within [`UNIT_INPUT_TOL`]; they
    /// are renormalized so the stored vectors are unit to rounding.
    pub fn new(zeta: f64, g1: Vec2, g2: Vec2) -> Result<Self, WedgeError> {
        if !(zeta > 0.0 && zeta < TAU) {
            return Err(WedgeError::InvalidOpening(zeta));
        }
        let g1 = unit_input(g1, Face::Lower)?;
        let g2 = unit_input(g2, Face::Upper)?;
        let (zeta1, zeta2) = reflection_angles(zeta, g1, g2)?;
        Ok(Self {
            zeta,
            g1,
            g2,
            zeta1,
            zeta2,
            alpha_star: (zeta1 + zeta2) / zeta,
        })
    }

    /// Builds the spec whose reflection vectors make angles `ζ₁`, `ζ₂` with the
    /// inward normals.
    pub fn from_angles(zeta: f64, zeta1: f64, zeta2: f64) -> Result<Self, WedgeError> {
        for (face, a) in [(Face::Lower, zeta1), (Face::Upper, zeta2)] {
            if !(a.abs() < FRAC_PI_2) {
                return Err(WedgeError::ConditionG1 { face });
            }
        }
        let frame = |face| {
            let n = normal(zeta, face);
            let r = radial(zeta, face);
            let a = if face == Face::Lower { zeta1 } else { zeta2 };
            vec2::sub(vec2::scale(n, a.cos()), vec2::scale(r, a.sin()))
        };
        let mut spec = Self::new(zeta, frame(Face::Lower), frame(Face::Upper))?;
        // Keep the requested angles exactly rather than their atan2 round trip.
        spec.zeta1 = zeta1;
        spec.zeta2 = zeta2;
        spec.alpha_star = (zeta1 + zeta2) / zeta;
        Ok(spec)
    }

    pub fn from_file(file: &WedgeSpecFile) -> Result<Self, WedgeError> {
        Self::new(file.zeta, file.g1, file.g2)
    }

    pub fn to_file(&self) -> WedgeSpecFile {
        WedgeSpecFile {
            zeta: self.zeta,
            g1: self.g1,
            g2: self.g2,
        }
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn zeta1(&self) -> f64 {
        self.zeta1
    }

    pub fn zeta2(&self) -> f64 {
        self.zeta2
    }

    /// `α* = (ζ₁ + ζ₂) / ζ`.
    pub fn alpha_star(&self) -> f64 {
        self.alpha_star
    }

    pub fn regime(&self) -> Regime {
        if self.alpha_star.abs() < ALPHA_ZERO_TOL {
            Regime::AlphaZero
        } else if self.alpha_star < 0.0 {
            Regime::AlphaNegative
        } else {
            Regime::AlphaPositive
        }
    }

    pub fn g(&self, face: Face) -> Vec2 {
        match face {
            Face::Lower => self.g1,
            Face::Upper => self.g2,
        }
    }

    pub fn normal(&self, face: Face) -> Vec2 {
        normal(self.zeta, face)
    }

    pub fn radial(&self, face: Face) -> Vec2 {
        radial(self.zeta, face)
    }

    /// Boundary point of radius `r` on `face`.
    pub fn boundary_point(&self, face: Face, r: f64) -> Vec2 {
        vec2::scale(self.radial(face), r)
    }

    pub fn is_convex(&self) -> bool {
        self.zeta <= PI
    }

    /// Polar angle of `p` measured so that the cut lies opposite the wedge:
    /// the result is in `(ζ/2 - π, ζ/2 + π]`.
    pub fn angle(&self, p: Vec2) -> f64 {
        let half = 0.5 * self.zeta;
        let mut d = p[1].atan2(p[0]) - half;
        if d <= -PI {
            d += TAU;
        } else if d > PI {
            d -= TAU;
        }
        half + d
    }

    /// Closed-wedge membership by half-plane tests.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        let a = vec2::dot(p, self.normal(Face::Lower)) >= -tol;
        let b = vec2::dot(p, self.normal(Face::Upper)) >= -tol;
        if self.is_convex() {
            a && b
        } else {
            a || b
        }
    }

    /// Distance from an interior point to `∂K ∪ {0}`; negative outside.
    pub fn interior_margin(&self, p: Vec2) -> f64 {
        let to_ray = |face: Face| {
            let r = self.radial(face);
            let along = vec2::dot(p, r);
            if along >= 0.0 {
                vec2::dot(p, self.normal(face)).abs()
            } else {
                vec2::norm(p)
            }
        };
        let d = to_ray(Face::Lower).min(to_ray(Face::Upper));
        let z = self.angle(p);
        if (0.0..=self.zeta).contains(&z) {
            d
        } else {
            -d
        }
    }

    /// The spec seen through the reflection `z ↦ ζ - z`; faces and their
    /// reflection vectors swap.
    pub fn mirrored(&self) -> Self {
        let (c, s) = (self.zeta.cos(), self.zeta.sin());
        let reflect = |v: Vec2| [c * v[0] + s * v[1], s * v[0] - c * v[1]];
        let mut out = Self::new(self.zeta, reflect(self.g2), reflect(self.g1))
            .expect("mirror image of a valid spec is valid");
        out.zeta1 = self.zeta2;
        out.zeta2 = self.zeta1;
        out.alpha_star = (out.zeta1 + out.zeta2) / out.zeta;
        out
    }

    /// Tilts each reflection vector towards the tip: `g - ε r̂`, renormalized.
    ///
    /// The normal component is unchanged, so admissibility is preserved and
    /// both reflection angles, hence `α*`, strictly increase with `ε`.
    pub fn perturbed(&self, eps: f64) -> Result<Self, WedgeError> {
        if eps == 0.0 {
            return Ok(*self);
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(WedgeError::InvalidPerturbation(eps));
        }
        let tilt = |face: Face| -> Result<Vec2, WedgeError> {
            let v = vec2::sub(self.g(face), vec2::scale(self.radial(face), eps));
            let n = vec2::norm(v);
            if n < 1e-12 {
                return Err(WedgeError::DegeneratePerturbation { face });
            }
            Ok(vec2::scale(v, 1.0 / n))
        };
        Self::new(self.zeta, tilt(Face::Lower)?, tilt(Face::Upper)?)
    }

    /// Warning text when `α* ≥ 1` even though Conditions G(iii) and G(iv)
    /// hold; such a combination cannot occur for a consistent spec.
    pub fn alpha_warning(&self) -> Option<String> {
        if self.alpha_star >= 1.0
            && super::check_condition_g3(self)
            && super::condition_g4(self).holds()
        {
            Some(format!(
                "alpha* = {} >= 1 although conditions G(iii) and G(iv) hold",
                self.alpha_star
            ))
        } else {
            None
        }
    }
}

fn normal(zeta: f64, face: Face) -> Vec2 {
    match face {
        Face::Lower => [0.0, 1.0],
        Face::Upper => [zeta.sin(), -zeta.cos()],
    }
}

fn radial(zeta: f64, face: Face) -> Vec2 {
    match face {
        Face::Lower => [1.0, 0.0],
        Face::Upper => [zeta.cos(), zeta.sin()],
    }
}

fn unit_input(g: Vec2, face: Face) -> Result<Vec2, WedgeError> {
    let n = vec2::norm(g);
    if !n.is_finite() || (n - 1.0).abs() > UNIT_INPUT_TOL {
        return Err(WedgeError::NotUnit { face, norm: n });
    }
    Ok(vec2::scale(g, 1.0 / n))
}

/// Signed angles `(ζ₁, ζ₂)` between each reflection vector and the inward
/// normal of its face, positive when the vector points towards the tip.
pub fn reflection_angles(zeta: f64, g1: Vec2, g2: Vec2) -> Result<(f64, f64), WedgeError> {
    let angle = |face: Face, g: Vec2| {
        let gn = vec2::dot(g, normal(zeta, face));
        if !(gn > 0.0) {
            return Err(WedgeError::ConditionG1 { face });
        }
        Ok((-vec2::dot(g, radial(zeta, face))).atan2(gn))
    };
    Ok((angle(Face::Lower, g1)?, angle(Face::Upper, g2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8};

    #[test]
    fn normal_reflection_has_zero_angles() {
        let n2 = [FRAC_PI_2.sin(), -FRAC_PI_2.cos()];
        let s = WedgeSpec::new(FRAC_PI_2, [0.0, 1.0], n2).unwrap();
        assert_eq!((s.zeta1(), s.zeta2()), (0.0, 0.0));
        assert_eq!(s.alpha_star(), 0.0);
        assert_eq!(s.regime(), Regime::AlphaZero);
    }

    #[test]
    fn tilt_sign_convention() {
        // Tilted π/6 towards the origin: g = cos(π/6) n - sin(π/6) r̂.
        let toward = [-(FRAC_PI_6.sin()), FRAC_PI_6.cos()];
        let s = WedgeSpec::new(FRAC_PI_2, toward, [1.0, 0.0]).unwrap();
        assert!((s.zeta1() - FRAC_PI_6).abs() < 1e-15);
        let away = [FRAC_PI_6.sin(), FRAC_PI_6.cos()];
        let s = WedgeSpec::new(FRAC_PI_2, away, [1.0, 0.0]).unwrap();
        assert!((s.zeta1() + FRAC_PI_6).abs() < 1e-15);
    }

    #[test]
    fn alpha_examples() {
        let s = WedgeSpec::from_angles(FRAC_PI_2, FRAC_PI_6, PI / 12.0).unwrap();
        assert!((s.alpha_star() - 0.5).abs() < 1e-15);
        let s = WedgeSpec::from_angles(FRAC_PI_2, -FRAC_PI_8, -FRAC_PI_8).unwrap();
        assert!((s.alpha_star() + 0.5).abs() < 1e-15);
        assert_eq!(s.regime(), Regime::AlphaNegative);
    }

    #[test]
    fn from_angles_round_trips_through_vectors() {
        let s = WedgeSpec::from_angles(3.0 * FRAC_PI_4, 0.3, -0.2).unwrap();
        let t = WedgeSpec::new(s.zeta(), s.g(Face::Lower), s.g(Face::Upper)).unwrap();
        assert!((t.zeta1() - 0.3).abs() < 1e-14);
        assert!((t.zeta2() + 0.2).abs() < 1e-14);
    }

    #[test]
    fn outward_or_tangential_vectors_rejected() {
        assert!(matches!(
            WedgeSpec::new(FRAC_PI_2, [1.0, 0.0], [1.0, 0.0]),
            Err(WedgeError::ConditionG1 { face: Face::Lower })
        ));
        assert!(matches!(
            WedgeSpec::new(FRAC_PI_2, [0.0, 1.0], [-1.0, 0.0]),
            Err(WedgeError::ConditionG1 { face: Face::Upper })
        ));
        assert!(matches!(
            WedgeSpec::new(FRAC_PI_2, [0.0, 2.0], [1.0, 0.0]),
            Err(WedgeError::NotUnit { .. })
        ));
    }

    #[test]
    fn perturbation_raises_alpha() {
        let s = WedgeSpec::from_angles(FRAC_PI_2, 0.0, 0.0).unwrap();
        assert_eq!(s.perturbed(0.0).unwrap(), s);
        let mut last = s.alpha_star();
        for eps in [0.05, 0.1, 0.2] {
            let a = s.perturbed(eps).unwrap().alpha_star();
            assert!(a > last);
            last = a;
        }
        assert!(s.perturbed(0.1).unwrap().zeta1() > 0.0);
        assert!(s.perturbed(0.1).unwrap().zeta2() > 0.0);
    }

    #[test]
    fn mirror_swaps_angles() {
        let s = WedgeSpec::from_angles(3.0 * FRAC_PI_4, 0.3, -0.1).unwrap();
        let m = s.mirrored();
        let direct = WedgeSpec::new(m.zeta(), m.g(Face::Lower), m.g(Face::Upper)).unwrap();
        assert!((direct.zeta1() + 0.1).abs() < 1e-14);
        assert!((direct.zeta2() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn membership_and_angle() {
        let s = WedgeSpec::from_angles(FRAC_PI_2, 0.0, 0.0).unwrap();
        assert!(s.contains([1.0, 1.0], 0.0));
        assert!(!s.contains([-1.0, 1.0], 0.0));
        let wide = WedgeSpec::from_angles(1.5 * PI, 0.0, 0.0).unwrap();
        assert!(wide.contains([-1.0, -0.5], 0.0));
        assert!(!wide.contains([1.0, -0.5], 0.0));
        assert!((wide.angle([0.0, -1.0]) - 1.5 * PI).abs() < 1e-15);
        assert!(s.angle([1.0, -1e-3]) < 0.0);
        assert!((s.interior_margin([1.0, 0.5]) - 0.5).abs() < 1e-15);
        assert!(s.interior_margin([1.0, -0.5]) < 0.0);
    }
}
