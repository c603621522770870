use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::wedge::{vec2, Face, G0Arc, Vec2, WedgeSpec, WedgeSpecFile};

/// Relative slack for membership tests, absorbing rounding in the pushback.
pub(crate) const FEASIBILITY_TOL: f64 = 1e-12;

/// Pushback iterations for curved faces.
const CURVED_PUSH_ITERATIONS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    ExactWedge,
    PerturbedWedge,
    /// The whole plane, without boundary; used for sanity checks.
    Plane,
}

/// Quadratic boundary bumps: the faces sit at polar angles `-β₁(r)/r` and
/// `ζ + β₂(r)/r`, with arc-length offsets `βᵢ(r) = aᵢ r²` for `r ≤ r_D` and
/// `aᵢ r_D r` beyond, where the faces become straight rays.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub a1: f64,
    pub a2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub wedge: WedgeSpecFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    /// Constant of the Hausdorff bound `d_H ≤ c_D r²` on `r ≤ r_D`.
    #[serde(default = "one")]
    pub c_d: f64,
    #[serde(default = "one")]
    pub r_d: f64,
}

fn one() -> f64 {
    1.0
}

impl DomainSpec {
    pub fn exact(wedge: &WedgeSpec) -> Self {
        Self {
            kind: DomainKind::ExactWedge,
            wedge: wedge.to_file(),
            perturbation: None,
            c_d: 1.0,
            r_d: 1.0,
        }
    }

    pub fn perturbed(wedge: &WedgeSpec, perturbation: Perturbation, c_d: f64, r_d: f64) -> Self {
        Self {
            kind: DomainKind::PerturbedWedge,
            wedge: wedge.to_file(),
            perturbation: Some(perturbation),
            c_d,
            r_d,
        }
    }

    /// The plane; the wedge entry only supplies a restart direction.
    pub fn plane() -> Self {
        let w = WedgeSpec::from_angles(std::f64::consts::PI, 0.0, 0.0).expect("half plane");
        Self {
            kind: DomainKind::Plane,
            wedge: w.to_file(),
            perturbation: None,
            c_d: 1.0,
            r_d: 1.0,
        }
    }
}

/// A validated domain ready for stepping.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    spec: DomainSpec,
    wedge: WedgeSpec,
    kind: DomainKind,
    normals: [Vec2; 2],
    g: [Vec2; 2],
    convex: bool,
    a: [f64; 2],
    r_d: f64,
    g0: Vec2,
}

impl Domain {
    pub fn new(spec: &DomainSpec) -> Result<Self, SimError> {
        let wedge = WedgeSpec::from_file(&spec.wedge)?;
        let (a, r_d) = match (spec.kind, spec.perturbation) {
            (DomainKind::PerturbedWedge, Some(p)) => ([p.a1, p.a2], spec.r_d),
            (DomainKind::PerturbedWedge, None) => {
                return Err(SimError::InvalidDomain(
                    "perturbed_wedge requires a perturbation".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(SimError::InvalidDomain(
                    "perturbation given for an unperturbed domain".into(),
                ))
            }
            _ => ([0.0; 2], spec.r_d),
        };
        if !(r_d > 0.0 && spec.c_d > 0.0) || a.iter().any(|v| !v.is_finite()) {
            return Err(SimError::InvalidDomain("c_D, r_D must be positive and offsets finite".into()));
        }
        let g0 = match spec.kind {
            DomainKind::Plane => [1.0, 0.0],
            _ => G0Arc::of(&wedge).interior_midpoint(wedge.zeta()).ok_or_else(|| {
                SimError::InvalidDomain("Condition G(iii) fails: no restart direction in G(0) ∩ K".into())
            })?,
        };
        let domain = Self {
            spec: *spec,
            wedge,
            kind: spec.kind,
            normals: [wedge.normal(Face::Lower), wedge.normal(Face::Upper)],
            g: [wedge.g(Face::Lower), wedge.g(Face::Upper)],
            convex: wedge.is_convex(),
            a,
            r_d,
            g0,
        };
        if spec.kind == DomainKind::PerturbedWedge {
            domain.check_perturbation()?;
        }
        Ok(domain)
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn wedge(&self) -> &WedgeSpec {
        &self.wedge
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Restart direction: midpoint of the arc `G(0) ∩ K`.
    pub fn g0(&self) -> Vec2 {
        self.g0
    }

    /// Angular offsets of the two faces at radius `r`: the faces sit at
    /// `-lower` and `ζ + upper`.
    pub fn face_offsets(&self, r: f64) -> (f64, f64) {
        let rr = r.min(self.r_d);
        (self.a[0] * rr, self.a[1] * rr)
    }

    /// Polar-angle interval of the shell of radius `r`.
    pub fn shell_arc(&self, r: f64) -> (f64, f64) {
        match self.kind {
            DomainKind::Plane => (0.0, TAU),
            _ => {
                let (l, u) = self.face_offsets(r);
                (-l, self.wedge.zeta() + u)
            }
        }
    }

    /// Angle of `p` in the convention of [`Domain::shell_arc`].
    pub fn angle(&self, p: Vec2) -> f64 {
        match self.kind {
            DomainKind::Plane => p[1].atan2(p[0]).rem_euclid(TAU),
            _ => self.wedge.angle(p),
        }
    }

    /// Position of `p` within its shell arc, in `[0, 1]`.
    pub fn arc_fraction(&self, p: Vec2) -> f64 {
        let (lo, hi) = self.shell_arc(vec2::norm(p));
        ((self.angle(p) - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    /// Bin index of `p` among `m` equal bins of its shell arc.
    pub fn bin_of(&self, p: Vec2, m: usize) -> usize {
        ((self.arc_fraction(p) * m as f64) as usize).min(m - 1)
    }

    /// Midpoint of bin `j` of `m` on the shell of radius `r`.
    pub fn bin_midpoint(&self, r: f64, j: usize, m: usize) -> Vec2 {
        let (lo, hi) = self.shell_arc(r);
        vec2::polar(r, lo + (hi - lo) * (j as f64 + 0.5) / m as f64)
    }

    /// Closed-domain membership with a rounding slack relative to `|p|`.
    pub fn contains(&self, p: Vec2) -> bool {
        let tol = FEASIBILITY_TOL * vec2::norm(p);
        match self.kind {
            DomainKind::Plane => true,
            DomainKind::ExactWedge => {
                let c1 = vec2::dot(p, self.normals[0]) >= -tol;
                let c2 = vec2::dot(p, self.normals[1]) >= -tol;
                if self.convex {
                    c1 && c2
                } else {
                    c1 || c2
                }
            }
            DomainKind::PerturbedWedge => {
                let r = vec2::norm(p);
                if r == 0.0 {
                    return true;
                }
                let (lo, hi) = self.shell_arc(r);
                let z = self.wedge.angle(p);
                z >= lo - FEASIBILITY_TOL && z <= hi + FEASIBILITY_TOL
            }
        }
    }

    /// Projects an infeasible proposal back into the closed domain.
    ///
    /// Returns the corrected point and the push length `s ≥ 0`, or `None`
    /// when no admissible push exists.
    pub fn push(&self, p: Vec2) -> Option<(Vec2, f64)> {
        match self.kind {
            DomainKind::Plane => Some((p, 0.0)),
            DomainKind::ExactWedge => self.push_exact(p),
            DomainKind::PerturbedWedge => self.push_curved(p),
        }
    }

    fn push_exact(&self, p: Vec2) -> Option<(Vec2, f64)> {
        let c = [vec2::dot(p, self.normals[0]), vec2::dot(p, self.normals[1])];
        let inside = if self.convex {
            c[0] >= 0.0 && c[1] >= 0.0
        } else {
            c[0] >= 0.0 || c[1] >= 0.0
        };
        if inside {
            return Some((p, 0.0));
        }
        // Faces to try, most violated first so that ties favour it.
        let order: [usize; 2] = if c[0] <= c[1] { [0, 1] } else { [1, 0] };
        let candidates: &[usize] = if self.convex {
            if c[0] < 0.0 && c[1] < 0.0 {
                &order
            } else {
                // One violated face; the other is a fallback near the corner.
                let v = if c[0] < 0.0 { 0 } else { 1 };
                if let Some(s) = self.min_push(c, self.g[v]) {
                    return Some((vec2::add(p, vec2::scale(self.g[v], s)), s));
                }
                return self
                    .min_push(c, self.g[1 - v])
                    .map(|s| (vec2::add(p, vec2::scale(self.g[1 - v], s)), s));
            }
        } else {
            // Reflex wedge: the nearest face is the less violated one.
            let near = if c[0].abs() < c[1].abs() { 0 } else if c[1].abs() < c[0].abs() { 1 } else { 2 };
            if near < 2 {
                return self
                    .min_push(c, self.g[near])
                    .map(|s| (vec2::add(p, vec2::scale(self.g[near], s)), s));
            }
            &order
        };
        let mut best: Option<(f64, usize)> = None;
        for &i in candidates {
            if let Some(s) = self.min_push(c, self.g[i]) {
                if best.is_none_or(|(b, _)| s < b) {
                    best = Some((s, i));
                }
            }
        }
        best.map(|(s, i)| (vec2::add(p, vec2::scale(self.g[i], s)), s))
    }

    /// Smallest `s ≥ 0` with `p + s g` in the closed wedge, given the face
    /// constraint values `c = (p·n¹, p·n²)`.
    fn min_push(&self, c: [f64; 2], g: Vec2) -> Option<f64> {
        let d = [vec2::dot(g, self.normals[0]), vec2::dot(g, self.normals[1])];
        if self.convex {
            let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
            for j in 0..2 {
                if d[j] > 0.0 {
                    lo = lo.max(-c[j] / d[j]);
                } else if d[j] < 0.0 {
                    hi = hi.min(c[j] / -d[j]);
                } else if c[j] < 0.0 {
                    return None;
                }
            }
            (lo <= hi).then_some(lo)
        } else {
            (0..2)
                .filter(|&j| d[j] > 0.0)
                .map(|j| (-c[j] / d[j]).max(0.0))
                .min_by(f64::total_cmp)
        }
    }

    fn push_curved(&self, mut p: Vec2) -> Option<(Vec2, f64)> {
        let mut total = 0.0;
        for _ in 0..CURVED_PUSH_ITERATIONS {
            let r = vec2::norm(p);
            if r == 0.0 {
                return Some((p, total));
            }
            let (lo, hi) = self.shell_arc(r);
            let z = self.wedge.angle(p);
            let face = if z < lo {
                0
            } else if z > hi {
                1
            } else {
                return Some((p, total));
            };
            // Face curve c(r) = r (cos φ(r), sin φ(r)); tangent c'(r).
            let (phi, dphi) = if face == 0 {
                (lo, if r < self.r_d { -self.a[0] } else { 0.0 })
            } else {
                (hi, if r < self.r_d { self.a[1] } else { 0.0 })
            };
            let q = vec2::polar(r, phi);
            let (s_phi, c_phi) = phi.sin_cos();
            let t = [c_phi - r * dphi * s_phi, s_phi + r * dphi * c_phi];
            let n = vec2::unit(if face == 0 { [-t[1], t[0]] } else { [t[1], -t[0]] });
            let g = self.g[face];
            let gn = vec2::dot(g, n);
            if gn <= 0.0 {
                return None;
            }
            let s = -vec2::dot(vec2::sub(p, q), n) / gn;
            let s = s.max(0.0);
            p = vec2::add(p, vec2::scale(g, s));
            total += s;
        }
        self.contains(p).then_some((p, total))
    }

    /// Checks `d_H ≤ c_D r²` between the perturbed and exact shell arcs on a
    /// radial grid over `(0, r_D]`, and that the faces stay ordered.
    fn check_perturbation(&self) -> Result<(), SimError> {
        let zeta = self.wedge.zeta();
        for i in 1..=200 {
            let r = self.r_d * i as f64 / 200.0;
            let (l, u) = self.face_offsets(r);
            let chord = |off: f64| 2.0 * r * (0.5 * off.abs()).min(std::f64::consts::FRAC_PI_2).sin();
            let dh = chord(l).max(chord(u));
            if dh > self.spec.c_d * r * r * (1.0 + 1e-12) {
                return Err(SimError::InvalidDomain(format!(
                    "Hausdorff bound violated at r = {r}: {dh} > c_D r^2 = {}",
                    self.spec.c_d * r * r
                )));
            }
            let opening = zeta + l + u;
            if !(opening > 0.0 && opening < TAU) || l.abs() >= 0.5 || u.abs() >= 0.5 {
                return Err(SimError::InvalidDomain(format!(
                    "face offsets ({l}, {u}) at r = {r} too large"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn quadrant() -> Domain {
        Domain::new(&DomainSpec::exact(&WedgeSpec::from_angles(FRAC_PI_2, 0.0, 0.0).unwrap())).unwrap()
    }

    #[test]
    fn normal_reflection_projects() {
        let d = quadrant();
        let (q, s) = d.push([0.5, -0.1]).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-15 && q[1].abs() < 1e-15);
        assert!((s - 0.1).abs() < 1e-15);
        assert_eq!(d.push([0.5, 0.1]), Some(([0.5, 0.1], 0.0)));
    }

    #[test]
    fn corner_pushes_are_feasible() {
        let w = WedgeSpec::from_angles(0.75 * PI, 3.0 * PI / 16.0, 3.0 * PI / 16.0).unwrap();
        let d = Domain::new(&DomainSpec::exact(&w)).unwrap();
        for k in 0..360 {
            let p = vec2::polar(1e-3, k as f64 * TAU / 360.0);
            if let Some((q, s)) = d.push(p) {
                assert!(d.contains(q), "{p:?} -> {q:?}");
                assert!(s >= 0.0);
            }
        }
    }

    #[test]
    fn reflex_wedge_push() {
        let w = WedgeSpec::from_angles(1.5 * PI, 0.2, -0.1).unwrap();
        let d = Domain::new(&DomainSpec::exact(&w)).unwrap();
        assert!(d.contains([-1.0, -0.5]));
        for k in 0..100 {
            let theta = 1.5 * PI + 0.5 * PI * (k as f64 + 0.5) / 100.0;
            let p = vec2::polar(0.3, theta);
            assert!(!d.contains(p));
            let (q, s) = d.push(p).unwrap();
            assert!(d.contains(q) && s > 0.0);
        }
    }

    #[test]
    fn curved_faces() {
        let w = WedgeSpec::from_angles(FRAC_PI_2, 0.1, 0.1).unwrap();
        let spec = DomainSpec::perturbed(&w, Perturbation { a1: 0.3, a2: -0.2 }, 0.31, 1.0);
        let d = Domain::new(&spec).unwrap();
        let (lo, hi) = d.shell_arc(0.5);
        assert!((lo + 0.15).abs() < 1e-15 && (hi - FRAC_PI_2 + 0.1).abs() < 1e-15);
        let (q, s) = d.push(vec2::polar(0.5, -0.3)).unwrap();
        assert!(s > 0.0 && d.contains(q));
        let (q, _) = d.push(vec2::polar(0.5, FRAC_PI_2 + 0.1)).unwrap();
        assert!(d.contains(q));
    }

    #[test]
    fn hausdorff_bound_is_enforced() {
        let w = WedgeSpec::from_angles(FRAC_PI_2, 0.0, 0.0).unwrap();
        let spec = DomainSpec::perturbed(&w, Perturbation { a1: 0.3, a2: 0.0 }, 0.1, 1.0);
        assert!(matches!(Domain::new(&spec), Err(SimError::InvalidDomain(_))));
    }

    #[test]
    fn bins_partition_the_arc() {
        let d = quadrant();
        for j in 0..16 {
            assert_eq!(d.bin_of(d.bin_midpoint(0.7, j, 16), 16), j);
        }
        assert_eq!(d.bin_of([1.0, -1e-18], 16), 0);
        assert_eq!(d.bin_of([0.0, 1.0], 16), 15);
    }
}
