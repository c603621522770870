use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{vec2, Vec2, WedgeError, WedgeSpec};
use super::spec::Face;

/// Tolerance under which `g¹` and `g²` are treated as opposite.
const OPPOSITE_TOL: f64 = 1e-12;

/// Polar-angle arc covered by the cone `G(0) = {a g¹ + b g² : a, b ≥ 0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct G0Arc {
    /// Start angle in `[0, 2π)`.
    pub start: f64,
    /// Counter-clockwise length in `[0, π]`.
    pub length: f64,
    /// `g¹ = -g²`: the cone is a line and only the two endpoints belong to it.
    pub degenerate_line: bool,
}

impl G0Arc {
    pub fn of(spec: &WedgeSpec) -> Self {
        let a1 = angle_of(spec.g(Face::Lower));
        let a2 = angle_of(spec.g(Face::Upper));
        let ccw = (a2 - a1).rem_euclid(TAU);
        let degenerate_line = vec2::dot(spec.g(Face::Lower), spec.g(Face::Upper)) <= -1.0 + OPPOSITE_TOL;
        if ccw <= PI {
            Self {
                start: a1,
                length: ccw,
                degenerate_line,
            }
        } else {
            Self {
                start: a2,
                length: TAU - ccw,
                degenerate_line,
            }
        }
    }

    /// The part of the arc lying in `[0, ζ]`, as `(lo, hi)` with `lo ≤ hi`,
    /// when it meets the open sector `(0, ζ)`.
    pub fn interior_part(&self, zeta: f64) -> Option<(f64, f64)> {
        if self.degenerate_line {
            return [self.start, self.start + PI]
                .into_iter()
                .map(|a| a.rem_euclid(TAU))
                .find(|a| *a > 0.0 && *a < zeta)
                .map(|a| (a, a));
        }
        let mut best: Option<(f64, f64)> = None;
        for shift in [0.0, -TAU] {
            let lo = (self.start + shift).max(0.0);
            let hi = (self.start + shift + self.length).min(zeta);
            let meets = if lo < hi {
                true
            } else {
                lo == hi && lo > 0.0 && lo < zeta
            };
            if meets && best.is_none_or(|(a, b)| hi - lo > b - a) {
                best = Some((lo, hi));
            }
        }
        best
    }

    /// Midpoint direction of the part of `G(0)` inside the wedge.
    pub fn interior_midpoint(&self, zeta: f64) -> Option<Vec2> {
        self.interior_part(zeta)
            .map(|(lo, hi)| vec2::from_angle(0.5 * (lo + hi)))
    }
}

fn angle_of(v: Vec2) -> f64 {
    v[1].atan2(v[0]).rem_euclid(TAU)
}

/// Condition G(iii): some non-negative combination of `g¹`, `g²` points
/// strictly into the wedge.
pub fn check_condition_g3(spec: &WedgeSpec) -> bool {
    let arc = G0Arc::of(spec);
    if arc.degenerate_line {
        return arc.interior_part(spec.zeta()).is_some();
    }
    let s = arc.start.rem_euclid(TAU);
    let l = arc.length;
    (s > 0.0 && s < spec.zeta()) || s + l > TAU || (s == 0.0 && l > 0.0)
}

/// The unit vector maximizing `min(e·g¹, e·g²)` over the whole circle, and
/// the attained value `c_e`.
pub fn find_e_vector(spec: &WedgeSpec) -> Result<(Vec2, f64), WedgeError> {
    let (g1, g2) = (spec.g(Face::Lower), spec.g(Face::Upper));
    if vec2::dot(g1, g2) <= -1.0 + OPPOSITE_TOL {
        return Err(WedgeError::ConditionG4);
    }
    let e = vec2::unit(vec2::add(g1, g2));
    let c_e = vec2::dot(e, g1).min(vec2::dot(e, g2));
    if c_e <= 0.0 {
        return Err(WedgeError::ConditionG4);
    }
    Ok((e, c_e))
}

/// Condition G(iv) with `e` restricted to the normal cone at the tip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct G4Check {
    /// Best `e` in `N(0)`; `None` when `N(0) = {0}` (reflex wedge).
    pub e: Option<Vec2>,
    pub c_e: f64,
    /// `N(0)` as a polar-angle interval.
    pub normal_cone: Option<(f64, f64)>,
}

impl G4Check {
    pub fn holds(&self) -> bool {
        self.e.is_some() && self.c_e > 0.0
    }
}

/// Evaluates Condition G(iv): maximizes `min(e·g¹, e·g²)` over unit `e` in
/// `N(0) = {n : n·x ≥ 0 on K}`, the arc `[ζ - π/2, π/2]` for `ζ ≤ π`.
pub fn condition_g4(spec: &WedgeSpec) -> G4Check {
    if !spec.is_convex() {
        return G4Check {
            e: None,
            c_e: f64::NEG_INFINITY,
            normal_cone: None,
        };
    }
    let (lo, hi) = (spec.zeta() - FRAC_PI_2, FRAC_PI_2);
    let (g1, g2) = (spec.g(Face::Lower), spec.g(Face::Upper));
    let score = |e: Vec2| vec2::dot(e, g1).min(vec2::dot(e, g2));
    let mut candidates = vec![vec2::from_angle(lo), vec2::from_angle(hi)];
    if let Ok((bis, _)) = find_e_vector(spec) {
        // Angles in (-π, π] so the arc test needs no wrapping.
        let theta = bis[1].atan2(bis[0]);
        if theta >= lo && theta <= hi {
            candidates.push(bis);
        }
    }
    let (e, c_e) = candidates
        .into_iter()
        .map(|e| (e, score(e)))
        .fold((None, f64::NEG_INFINITY), |best, (e, s)| {
            if s > best.1 {
                (Some(e), s)
            } else {
                best
            }
        });
    G4Check {
        e,
        c_e,
        normal_cone: Some((lo, hi)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn spec_with(zeta: f64, g1: Vec2, g2: Vec2) -> WedgeSpec {
        WedgeSpec::new(zeta, g1, g2).unwrap()
    }

    #[test]
    fn e_vector_examples() {
        let s = WedgeSpec::from_angles(FRAC_PI_2, 0.0, 0.0).unwrap();
        let (e, c) = find_e_vector(&s).unwrap();
        assert!((c - SQRT_2 / 2.0).abs() < 1e-15);
        assert!((e[0] - e[1]).abs() < 1e-15);

        // Same direction on both faces.
        let u = vec2::from_angle(FRAC_PI_4);
        let (e, c) = find_e_vector(&spec_with(FRAC_PI_2, u, u)).unwrap();
        assert!((c - 1.0).abs() < 1e-15 && vec2::norm(vec2::sub(e, u)) < 1e-15);
    }

    #[test]
    fn opposite_vectors_fail_g4() {
        // A reflex wedge admits g¹ = -g² with both pointing inward.
        let zeta = 1.5 * PI;
        let g1 = vec2::from_angle(FRAC_PI_4);
        let g2 = [-g1[0], -g1[1]];
        let s = spec_with(zeta, g1, g2);
        assert_eq!(find_e_vector(&s), Err(WedgeError::ConditionG4));
    }

    #[test]
    fn g3_examples() {
        assert!(check_condition_g3(&WedgeSpec::from_angles(FRAC_PI_2, 0.0, 0.0).unwrap()));
        // Both vectors nearly tangential and tilted past the tip, so G(0)
        // lies in the sector opposite K.
        let s = WedgeSpec::from_angles(FRAC_PI_4, 1.4, 1.4).unwrap();
        assert!(!check_condition_g3(&s));
        // g¹ strictly inside K suffices.
        let inside = vec2::from_angle(FRAC_PI_4);
        let s = spec_with(FRAC_PI_2, inside, vec2::from_angle(-0.3));
        assert!(check_condition_g3(&s));
    }

    #[test]
    fn g0_midpoint_for_symmetric_tilt() {
        let z = 3.0 * PI / 4.0;
        let s = WedgeSpec::from_angles(z, 3.0 * PI / 16.0, 3.0 * PI / 16.0).unwrap();
        let arc = G0Arc::of(&s);
        assert!((arc.start - PI / 16.0).abs() < 1e-12);
        assert!((arc.length - 10.0 * PI / 16.0).abs() < 1e-12);
        let m = arc.interior_midpoint(z).unwrap();
        assert!((m[1].atan2(m[0]) - 3.0 * PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn g4_uses_bisector_inside_normal_cone() {
        let z = 3.0 * PI / 4.0;
        let s = WedgeSpec::from_angles(z, 3.0 * PI / 16.0, 3.0 * PI / 16.0).unwrap();
        let g4 = condition_g4(&s);
        assert!(g4.holds());
        assert!((g4.c_e - (5.0 * PI / 16.0).cos()).abs() < 1e-12);
        let reflex = WedgeSpec::from_angles(1.5 * PI, 0.0, 0.0).unwrap();
        assert!(!condition_g4(&reflex).holds());
    }

    #[test]
    fn g4_clamps_to_normal_cone_edge() {
        // Both vectors lean towards the lower face, so the bisector leaves N(0).
        let s = spec_with(FRAC_PI_2, vec2::from_angle(0.5), vec2::from_angle(-1.2));
        let (bis, _) = find_e_vector(&s).unwrap();
        assert!(bis[1] < 0.0);
        let g4 = condition_g4(&s);
        let e = g4.e.unwrap();
        assert!((e[0] - 1.0).abs() < 1e-15);
        assert!(g4.holds());
    }
}
