use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::fd::ScalarField;
use super::{find_e_vector, vec2, ConeFunctionSet, Regime, Vec2, WedgeError, WedgeSpec};

/// Strict inequalities defining δ* must hold with this relative margin.
pub const DELTA_STAR_MARGIN: f64 = 1e-6;

/// Deepest dyadic level tried when selecting δ*.
const MAX_DYADIC_LEVEL: i32 = 60;

/// Which auxiliary functions a regime uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxKind {
    /// `α* < 0`: `V = ln ln Ψ - c_V e·x`.
    LogLog,
    /// `α* = 0`: `V = ln Ψ - c_V e·x`.
    Log,
    /// `0 < α* < 1`: `V₁ = e^Ψ - 1 + e·x` and `V₂ = ln(Ψ + 1) - e·x`.
    Pair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxField {
    V,
    V1,
    V2,
}

/// Lyapunov-type functions near the tip of the exact wedge, with closed-form
/// gradients and Laplacians.
///
/// On `0 < |x| ≤ δ*`:
///
/// * `α* ≤ 0`: `ΔV ≤ 0`, `g·∇V = -c_V e·g ≤ -c_V c_e` and `V → ∞` at the tip;
/// * `0 < α* < 1`: `ΔV₁ ≥ 0`, `ΔV₂ ≤ 0`, `g·∇V₁ = e·g ≥ c_e`,
///   `g·∇V₂ = -e·g ≤ -c_e`, and both vanish at the tip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxFunctionSet {
    cone: ConeFunctionSet,
    kind: AuxKind,
    e: Vec2,
    c_e: f64,
    c_v: Option<f64>,
    delta_star: f64,
}

impl AuxFunctionSet {
    /// Builds the auxiliary functions on the ball of radius `delta_star`,
    /// checking that it is small enough for them to be well defined.
    pub fn new(spec: &WedgeSpec, delta_star: f64) -> Result<Self, WedgeError> {
        let kind = aux_kind(spec)?;
        if !(delta_star > 0.0 && delta_star.is_finite()) {
            return Err(WedgeError::Domain(delta_star));
        }
        let cone = ConeFunctionSet::new(spec);
        let (e, c_e) = find_e_vector(spec)?;
        let mut set = Self {
            cone,
            kind,
            e,
            c_e,
            c_v: None,
            delta_star,
        };
        if let Some(reason) = set.violation(delta_star) {
            return Err(WedgeError::DeltaStar {
                delta: delta_star,
                reason,
            });
        }
        if kind != AuxKind::Pair {
            set.c_v = Some(0.5 * set.f_over_radius_infimum());
        }
        Ok(set)
    }

    pub fn kind(&self) -> AuxKind {
        self.kind
    }

    pub fn e(&self) -> Vec2 {
        self.e
    }

    pub fn c_e(&self) -> f64 {
        self.c_e
    }

    /// `c_V`, present for `α* ≤ 0`.
    pub fn c_v(&self) -> Option<f64> {
        self.c_v
    }

    pub fn delta_star(&self) -> f64 {
        self.delta_star
    }

    pub fn cone(&self) -> &ConeFunctionSet {
        &self.cone
    }

    pub fn has(&self, field: AuxField) -> bool {
        matches!(
            (self.kind, field),
            (AuxKind::Pair, AuxField::V1 | AuxField::V2)
                | (AuxKind::Log | AuxKind::LogLog, AuxField::V)
        )
    }

    pub fn field(&self, field: AuxField) -> Result<AuxFieldRef<'_>, WedgeError> {
        if self.has(field) {
            Ok(AuxFieldRef { set: self, field })
        } else {
            Err(WedgeError::UnsupportedRegime(format!(
                "{field:?} is not defined for {:?}",
                self.kind
            )))
        }
    }

    pub fn value(&self, field: AuxField, p: Vec2) -> f64 {
        let psi = self.cone.harmonic_at(p);
        let ex = vec2::dot(self.e, p);
        match field {
            AuxField::V => self.f(psi) - self.c_v.unwrap_or(0.0) * ex,
            AuxField::V1 => psi.exp_m1() + ex,
            AuxField::V2 => psi.ln_1p() - ex,
        }
    }

    pub fn gradient(&self, field: AuxField, p: Vec2) -> Vec2 {
        let psi = self.cone.harmonic_at(p);
        let grad = self.cone.harmonic_grad_at(p);
        match field {
            AuxField::V => vec2::sub(
                vec2::scale(grad, self.f_prime(psi)),
                vec2::scale(self.e, self.c_v.unwrap_or(0.0)),
            ),
            AuxField::V1 => vec2::add(vec2::scale(grad, psi.exp()), self.e),
            AuxField::V2 => vec2::sub(vec2::scale(grad, 1.0 / (psi + 1.0)), self.e),
        }
    }

    pub fn laplacian(&self, field: AuxField, p: Vec2) -> f64 {
        let psi = self.cone.harmonic_at(p);
        let grad = self.cone.harmonic_grad_at(p);
        let g2 = vec2::dot(grad, grad);
        match field {
            AuxField::V => self.f_second(psi) * g2,
            AuxField::V1 => psi.exp() * g2,
            AuxField::V2 => -g2 / ((psi + 1.0) * (psi + 1.0)),
        }
    }

    fn f(&self, u: f64) -> f64 {
        match self.kind {
            AuxKind::LogLog => u.ln().ln(),
            _ => u.ln(),
        }
    }

    fn f_prime(&self, u: f64) -> f64 {
        match self.kind {
            AuxKind::LogLog => 1.0 / (u * u.ln()),
            _ => 1.0 / u,
        }
    }

    fn f_second(&self, u: f64) -> f64 {
        match self.kind {
            AuxKind::LogLog => {
                let l = u.ln();
                -(1.0 + l) / (u * l).powi(2)
            }
            _ => -1.0 / (u * u),
        }
    }

    /// Why `delta` is not an admissible δ*, if it is not.
    fn violation(&self, delta: f64) -> Option<String> {
        match self.kind {
            // Ψ decreases in r and its angular profile is concave or linear,
            // so its minimum over the ball sits at a corner of the shell.
            AuxKind::LogLog | AuxKind::Log => {
                let zeta = self.cone.spec().zeta();
                let lo = self
                    .cone
                    .harmonic_polar(delta, 0.0)
                    .min(self.cone.harmonic_polar(delta, zeta));
                (lo <= E * (1.0 + DELTA_STAR_MARGIN))
                    .then(|| format!("min Psi on the shell is {lo}, need > e"))
            }
            AuxKind::Pair => {
                let zeta = self.cone.spec().zeta();
                for r in dyadic_radii(delta, 4, 40) {
                    for z in angles(zeta, 64) {
                        let p = vec2::polar(r, z);
                        let psi = self.cone.harmonic_polar(r, z);
                        let v = self.value(AuxField::V1, p).min(self.value(AuxField::V2, p));
                        if !(v > DELTA_STAR_MARGIN * psi) {
                            return Some(format!("V1 or V2 not positive at r = {r}, z = {z}"));
                        }
                    }
                }
                None
            }
        }
    }

    /// Grid infimum of `f(Ψ(x))/|x|` over the ball, refined until stable to 1%.
    fn f_over_radius_infimum(&self) -> f64 {
        let zeta = self.cone.spec().zeta();
        let eval = |per_octave: usize, n_ang: usize| {
            let mut inf = f64::INFINITY;
            for r in dyadic_radii(self.delta_star, per_octave, 40) {
                for z in angles(zeta, n_ang) {
                    inf = inf.min(self.f(self.cone.harmonic_polar(r, z)) / r);
                }
            }
            inf
        };
        let (mut per_octave, mut n_ang) = (4, 32);
        let mut last = eval(per_octave, n_ang);
        for _ in 0..6 {
            per_octave *= 2;
            n_ang *= 2;
            let next = eval(per_octave, n_ang);
            let stable = (next - last).abs() <= 0.01 * last.abs();
            last = next;
            if stable {
                break;
            }
        }
        last
    }
}

fn aux_kind(spec: &WedgeSpec) -> Result<AuxKind, WedgeError> {
    match spec.regime() {
        Regime::AlphaNegative => Ok(AuxKind::LogLog),
        Regime::AlphaZero => Ok(AuxKind::Log),
        Regime::AlphaPositive if spec.alpha_star() < 1.0 => Ok(AuxKind::Pair),
        Regime::AlphaPositive => Err(WedgeError::UnsupportedRegime(format!(
            "alpha* = {} >= 1",
            spec.alpha_star()
        ))),
    }
}

/// Largest `δ = 2^{-j}`, `j ≥ 0`, on which the auxiliary functions are well
/// defined: `Ψ > e` on the ball for `α* ≤ 0`, and `V₁, V₂ > 0` for
/// `0 < α* < 1`, each with relative margin [`DELTA_STAR_MARGIN`].
pub fn select_delta_star(spec: &WedgeSpec) -> Result<f64, WedgeError> {
    aux_kind(spec)?;
    for j in 0..=MAX_DYADIC_LEVEL {
        let delta = 0.5f64.powi(j);
        if AuxFunctionSet::new(spec, delta).is_ok() {
            return Ok(delta);
        }
    }
    Err(WedgeError::NoDeltaStar)
}

/// `δ 2^{-i/per_octave}` for `i = 0, …, per_octave·octaves`.
pub(crate) fn dyadic_radii(delta: f64, per_octave: usize, octaves: usize) -> impl Iterator<Item = f64> {
    (0..=per_octave * octaves).map(move |i| delta * (-(i as f64) / per_octave as f64).exp2())
}

/// `n + 1` equally spaced angles covering `[0, ζ]`.
pub(crate) fn angles(zeta: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| zeta * i as f64 / n as f64)
}

/// An auxiliary function viewed as a scalar field on `K ∩ B(0, δ*)`.
#[derive(Clone, Copy, Debug)]
pub struct AuxFieldRef<'a> {
    set: &'a AuxFunctionSet,
    field: AuxField,
}

impl ScalarField for AuxFieldRef<'_> {
    fn value(&self, p: Vec2) -> f64 {
        self.set.value(self.field, p)
    }

    fn gradient(&self, p: Vec2) -> Option<Vec2> {
        Some(self.set.gradient(self.field, p))
    }

    fn laplacian(&self, p: Vec2) -> Option<f64> {
        Some(self.set.laplacian(self.field, p))
    }

    fn margin(&self, p: Vec2) -> f64 {
        self.set
            .cone
            .spec()
            .interior_margin(p)
            .min(self.set.delta_star - vec2::norm(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wedge::fd::fd_gradient;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};

    fn positive_spec() -> WedgeSpec {
        WedgeSpec::from_angles(0.75 * PI, 3.0 * PI / 16.0, 3.0 * PI / 16.0).unwrap()
    }

    #[test]
    fn pair_vanishes_at_tip_and_is_positive() {
        let spec = positive_spec();
        let d = select_delta_star(&spec).unwrap();
        let aux = AuxFunctionSet::new(&spec, d).unwrap();
        assert_eq!(aux.kind(), AuxKind::Pair);
        for z in angles(spec.zeta(), 16) {
            for r in dyadic_radii(d, 1, 30) {
                let p = vec2::polar(r, z);
                assert!(aux.value(AuxField::V1, p) > 0.0);
                assert!(aux.value(AuxField::V2, p) > 0.0);
            }
            let tiny = vec2::polar(1e-14, z);
            assert!(aux.value(AuxField::V1, tiny) < 1e-6);
            assert!(aux.value(AuxField::V2, tiny) < 1e-6);
        }
    }

    #[test]
    fn log_regime_blows_up_at_tip() {
        let spec = WedgeSpec::from_angles(FRAC_PI_2, 0.25, -0.25).unwrap();
        let d = select_delta_star(&spec).unwrap();
        let aux = AuxFunctionSet::new(&spec, d).unwrap();
        assert_eq!(aux.kind(), AuxKind::Log);
        assert!(aux.c_v().unwrap() > 0.0);
        let mut last = f64::NEG_INFINITY;
        for r in dyadic_radii(d, 1, 40).skip(1) {
            let v = aux.value(AuxField::V, vec2::polar(r, 0.5));
            assert!(v > last);
            last = v;
        }
        assert!(last > 3.0);
    }

    #[test]
    fn loglog_regime_needs_small_delta() {
        let spec = WedgeSpec::from_angles(FRAC_PI_2, -FRAC_PI_8, -FRAC_PI_8).unwrap();
        assert!(matches!(
            AuxFunctionSet::new(&spec, 1.0),
            Err(WedgeError::DeltaStar { .. })
        ));
        let d = select_delta_star(&spec).unwrap();
        let aux = AuxFunctionSet::new(&spec, d).unwrap();
        assert!(aux.c_v().unwrap() > 0.0);
        assert!(AuxFunctionSet::new(&spec, 2.0 * d).is_err());
    }

    #[test]
    fn large_alpha_is_unsupported() {
        let spec = WedgeSpec::from_angles(0.5, 0.4, 0.4).unwrap();
        assert!(matches!(
            select_delta_star(&spec),
            Err(WedgeError::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn closed_form_gradients_match_differences() {
        let specs = [
            positive_spec(),
            WedgeSpec::from_angles(FRAC_PI_2, 0.25, -0.25).unwrap(),
            WedgeSpec::from_angles(FRAC_PI_2, -FRAC_PI_8, -FRAC_PI_8).unwrap(),
        ];
        for spec in specs {
            let aux = AuxFunctionSet::new(&spec, select_delta_star(&spec).unwrap()).unwrap();
            let p = vec2::polar(0.3 * aux.delta_star(), 0.6);
            for f in [AuxField::V, AuxField::V1, AuxField::V2] {
                let Ok(field) = aux.field(f) else { continue };
                let exact = field.gradient(p).unwrap();
                let approx = fd_gradient(&field, p, 1e-7 * aux.delta_star());
                let scale = vec2::norm(exact).max(1.0);
                assert!(vec2::norm(vec2::sub(exact, approx)) < 1e-5 * scale, "{f:?}");
            }
        }
    }
}
