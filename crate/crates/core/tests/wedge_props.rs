use std::f64::consts::{E, FRAC_PI_2, PI};

use conelab::wedge::{
    check_condition_g3, find_e_vector, select_delta_star, vec2, AuxField, AuxFunctionSet, ConeFunctionSet, Face,
    Regime, WedgeSpec,
};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = WedgeSpec> {
    (0.3f64..PI, -1.4f64..1.4, -1.4f64..1.4)
        .prop_filter_map("admissible", |(z, a, b)| WedgeSpec::from_angles(z, a, b).ok())
        .prop_filter("clear of the log regime", |s| s.alpha_star().abs() > 1e-6)
}

/// Test-side five-point Laplacian.
fn fd_laplacian(f: impl Fn([f64; 2]) -> f64, p: [f64; 2], h: f64) -> f64 {
    (f([p[0] + h, p[1]]) + f([p[0] - h, p[1]]) + f([p[0], p[1] + h]) + f([p[0], p[1] - h]) - 4.0 * f(p)) / (h * h)
}

fn fd_grad(f: impl Fn([f64; 2]) -> f64, p: [f64; 2], h: f64) -> [f64; 2] {
    [
        (f([p[0] + h, p[1]]) - f([p[0] - h, p[1]])) / (2.0 * h),
        (f([p[0], p[1] + h]) - f([p[0], p[1] - h])) / (2.0 * h),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn alpha_is_the_angle_sum_over_opening(s in spec_strategy()) {
        prop_assert!((s.alpha_star() - (s.zeta1() + s.zeta2()) / s.zeta()).abs() <= 1e-12);
        // Reflection angles recovered from the vectors, via the face frames.
        for (face, zi) in [(Face::Lower, s.zeta1()), (Face::Upper, s.zeta2())] {
            let g = s.g(face);
            let expect = vec2::sub(vec2::scale(s.normal(face), zi.cos()), vec2::scale(s.radial(face), zi.sin()));
            prop_assert!(vec2::norm(vec2::sub(g, expect)) <= 1e-12);
        }
    }

    #[test]
    fn harmonic_function_is_homogeneous(s in spec_strategy(), r in 0.01f64..10.0, t in 0.0f64..1.0, lambda in 0.1f64..10.0) {
        let cone = ConeFunctionSet::new(&s);
        let z = t * s.zeta();
        let a = s.alpha_star();
        let lhs = cone.harmonic(lambda * r, z).unwrap();
        let rhs = lambda.powf(a) * cone.harmonic(r, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn mirror_preserves_exponent_and_field(s in spec_strategy(), r in 0.05f64..5.0, t in 0.0f64..1.0) {
        let m = s.mirrored();
        prop_assert!((m.alpha_star() - s.alpha_star()).abs() <= 1e-12);
        prop_assert!((m.zeta1() - s.zeta2()).abs() <= 1e-12 && (m.zeta2() - s.zeta1()).abs() <= 1e-12);
        let (c, m_cone) = (ConeFunctionSet::new(&s), ConeFunctionSet::new(&m));
        let z = t * s.zeta();
        let lhs = m_cone.harmonic(r, s.zeta() - z).unwrap();
        let rhs = c.harmonic(r, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn harmonic_with_zero_oblique_flux(s in spec_strategy(), r in 0.2f64..2.0, t in 0.2f64..0.8) {
        let cone = ConeFunctionSet::new(&s);
        let psi = |p: [f64; 2]| cone.harmonic_at(p);
        let p = vec2::polar(r, t * s.zeta());
        let h = 1e-3 * r;
        let scale = r.powf(s.alpha_star() - 2.0);
        prop_assert!(fd_laplacian(psi, p, h).abs() <= 1e-3 * scale);
        for face in Face::BOTH {
            let q = s.boundary_point(face, r);
            let grad = cone.harmonic_grad_at(q);
            prop_assert!(vec2::dot(s.g(face), grad).abs() <= 1e-10 * (1.0 + vec2::norm(grad)));
            let fd = fd_grad(psi, q, 1e-6 * r);
            prop_assert!(vec2::norm(vec2::sub(fd, grad)) <= 1e-5 * (1.0 + vec2::norm(grad)));
        }
    }

    #[test]
    fn e_vector_is_optimal_on_the_circle(s in spec_strategy()) {
        let (g1, g2) = (s.g(Face::Lower), s.g(Face::Upper));
        let brute = (0..10_000)
            .map(|i| vec2::from_angle(2.0 * PI * i as f64 / 10_000.0))
            .map(|e| vec2::dot(e, g1).min(vec2::dot(e, g2)))
            .fold(f64::NEG_INFINITY, f64::max);
        match find_e_vector(&s) {
            Ok((e, c)) => {
                prop_assert!((vec2::norm(e) - 1.0).abs() <= 1e-12);
                // The grid misses the kink by at most half its spacing.
                prop_assert!(c >= brute - 1e-12 && c <= brute + PI / 10_000.0, "c = {}, brute = {}", c, brute);
            }
            Err(_) => prop_assert!(brute <= 1e-6),
        }
    }

    #[test]
    fn alpha_increases_under_tilt(s in spec_strategy(), eps in 0.01f64..0.3) {
        let a = s.perturbed(eps).unwrap().alpha_star();
        let b = s.perturbed(2.0 * eps).unwrap().alpha_star();
        prop_assert!(s.alpha_star() < a && a < b);
    }
}

#[test]
fn log_regime_shifts_by_log_lambda() {
    let s = WedgeSpec::from_angles(FRAC_PI_2, PI / 8.0, -PI / 8.0).unwrap();
    assert_eq!(s.regime(), Regime::AlphaZero);
    let cone = ConeFunctionSet::new(&s);
    for (r, z, l) in [(0.3, 0.2, 4.0), (1.7, 1.1, 0.25), (0.01, 0.7, 10.0)] {
        let lhs = cone.harmonic(l * r, z).unwrap();
        let rhs = cone.harmonic(r, z).unwrap() - f64::ln(l);
        assert!((lhs - rhs).abs() < 1e-12);
    }
}

#[test]
fn delta_star_negative_wedge_closed_form() {
    // Ψ = r^α cos(αz − ζ₁) with α = −1/2, ζ₁ = −π/8: the angular minimum is
    // cos(π/8), so Ψ > e on the ball iff δ < (cos(π/8)/e)².
    let s = WedgeSpec::from_angles(FRAC_PI_2, -PI / 8.0, -PI / 8.0).unwrap();
    assert_eq!(s.alpha_star(), -0.5);
    let limit = ((PI / 8.0).cos() / E).powi(2);
    let oracle = (0..).map(|j| 0.5f64.powi(j)).find(|d| *d < limit).unwrap();
    let delta = select_delta_star(&s).unwrap();
    assert_eq!(delta, oracle);
    assert_eq!(delta, 0.0625);
}

/// Largest dyadic δ ≤ 1 on which `e^Ψ − 1 + e·x` and `ln(Ψ + 1) − e·x` are
/// positive, by brute force on a polar grid.
fn pair_delta_oracle(s: &WedgeSpec) -> f64 {
    let e = vec2::unit(vec2::add(s.g(Face::Lower), s.g(Face::Upper)));
    let a = s.alpha_star();
    let ok = |d: f64| {
        (1..=400).all(|i| {
            let r = d * i as f64 / 400.0;
            (0..=200).all(|j| {
                let z = s.zeta() * j as f64 / 200.0;
                let psi = r.powf(a) * (a * z - s.zeta1()).cos();
                let ex = vec2::dot(e, vec2::polar(r, z));
                psi.exp() - 1.0 + ex > 0.0 && (psi + 1.0).ln() - ex > 0.0
            })
        })
    };
    (0..40).map(|j| 0.5f64.powi(j)).find(|d| ok(*d)).unwrap()
}

#[test]
fn delta_star_positive_wedges_match_brute_force() {
    for (z, z1, z2) in [(FRAC_PI_2, PI / 6.0, PI / 12.0), (0.75 * PI, 3.0 * PI / 16.0, 3.0 * PI / 16.0), (1.2, 0.3, 0.1)] {
        let s = WedgeSpec::from_angles(z, z1, z2).unwrap();
        assert_eq!(select_delta_star(&s).unwrap(), pair_delta_oracle(&s), "{z} {z1} {z2}");
    }
    let half = WedgeSpec::from_angles(FRAC_PI_2, PI / 6.0, PI / 12.0).unwrap();
    assert!((half.alpha_star() - 0.5).abs() < 1e-15);
    assert_eq!(select_delta_star(&half).unwrap(), 0.5);
}

#[test]
fn admissible_radii_are_nested() {
    for (z, z1, z2) in [(FRAC_PI_2, -PI / 8.0, -PI / 8.0), (FRAC_PI_2, PI / 8.0, -PI / 8.0), (FRAC_PI_2, PI / 6.0, PI / 12.0)] {
        let s = WedgeSpec::from_angles(z, z1, z2).unwrap();
        let d = select_delta_star(&s).unwrap();
        for k in 0..8 {
            assert!(AuxFunctionSet::new(&s, d * 0.5f64.powi(k)).is_ok());
        }
        if d < 1.0 {
            assert!(AuxFunctionSet::new(&s, 2.0 * d).is_err());
        }
    }
}

#[test]
fn auxiliary_signs_on_a_polar_grid() {
    let cases = [
        ((FRAC_PI_2, -PI / 8.0, -PI / 8.0), vec![(AuxField::V, -1.0)]),
        ((FRAC_PI_2, PI / 8.0, -PI / 8.0), vec![(AuxField::V, -1.0)]),
        ((0.75 * PI, 3.0 * PI / 16.0, 3.0 * PI / 16.0), vec![(AuxField::V1, 1.0), (AuxField::V2, -1.0)]),
    ];
    for ((z, z1, z2), fields) in cases {
        let s = WedgeSpec::from_angles(z, z1, z2).unwrap();
        let d = select_delta_star(&s).unwrap();
        let aux = AuxFunctionSet::new(&s, d).unwrap();
        for (field, sign) in fields {
            let f = |p: [f64; 2]| aux.value(field, p);
            for i in 1..=20 {
                let r = d * i as f64 / 21.0;
                for j in 1..20 {
                    let p = vec2::polar(r, s.zeta() * j as f64 / 20.0);
                    let h = (1e-3 * r).min(s.interior_margin(p) / 3.0);
                    let lap = 0.5 * fd_laplacian(f, p, h);
                    let closed = 0.5 * aux.laplacian(field, p);
                    assert!(sign * closed >= -1e-8, "{field:?} at {p:?}: {closed}");
                    assert!((lap - closed).abs() <= 1e-3 * (1.0 + closed.abs()), "{field:?} at {p:?}: fd {lap} vs {closed}");
                }
                for face in Face::BOTH {
                    let q = s.boundary_point(face, r);
                    let flux = vec2::dot(s.g(face), aux.gradient(field, q));
                    // V and V₂ push down along g, V₁ pushes up.
                    assert!(sign * flux > 0.0 || (field != AuxField::V1 && flux < 0.0), "{field:?} flux {flux}");
                }
            }
        }
    }
    assert!(check_condition_g3(&WedgeSpec::from_angles(FRAC_PI_2, PI / 6.0, PI / 12.0).unwrap()));
}
