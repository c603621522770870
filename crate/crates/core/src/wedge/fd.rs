use super::spec::Face;
use super::{vec2, Vec2, WedgeError, WedgeSpec};

/// A real function on (part of) the plane.
pub trait ScalarField {
    fn value(&self, p: Vec2) -> f64;

    /// Closed-form gradient, when known.
    fn gradient(&self, p: Vec2) -> Option<Vec2> {
        let _ = p;
        None
    }

    /// Closed-form Laplacian, when known.
    fn laplacian(&self, p: Vec2) -> Option<f64> {
        let _ = p;
        None
    }

    /// Distance from `p` to the edge of the field's domain.
    fn margin(&self, p: Vec2) -> f64 {
        let _ = p;
        f64::INFINITY
    }
}

/// Wraps a closure defined on the whole plane.
#[derive(Clone, Copy, Debug)]
pub struct FnField<F>(pub F);

impl<F: Fn(Vec2) -> f64> ScalarField for FnField<F> {
    fn value(&self, p: Vec2) -> f64 {
        (self.0)(p)
    }
}

/// Five-point central-difference Laplacian.
pub fn laplacian_fd<S: ScalarField + ?Sized>(field: &S, p: Vec2, h: f64) -> Result<f64, WedgeError> {
    let margin = field.margin(p);
    if !(h > 0.0) || !(margin > 2.0 * h) {
        return Err(WedgeError::StencilOutside {
            x: p[0],
            y: p[1],
            h,
            margin,
        });
    }
    let c = field.value(p);
    let sum = field.value([p[0] + h, p[1]])
        + field.value([p[0] - h, p[1]])
        + field.value([p[0], p[1] + h])
        + field.value([p[0], p[1] - h]);
    Ok((sum - 4.0 * c) / (h * h))
}

/// Central-difference gradient. Does not check the domain, so it can be
/// used at boundary points of fields that extend smoothly across.
pub fn fd_gradient<S: ScalarField + ?Sized>(field: &S, p: Vec2, h: f64) -> Vec2 {
    let dx = (field.value([p[0] + h, p[1]]) - field.value([p[0] - h, p[1]])) / (2.0 * h);
    let dy = (field.value([p[0], p[1] + h]) - field.value([p[0], p[1] - h])) / (2.0 * h);
    [dx, dy]
}

/// `gⁱ·∇f` at the boundary point of radius `r` on `face`.
pub fn boundary_flux<S: ScalarField + ?Sized>(spec: &WedgeSpec, field: &S, r: f64, face: Face) -> f64 {
    let p = spec.boundary_point(face, r);
    let grad = field
        .gradient(p)
        .unwrap_or_else(|| fd_gradient(field, p, 1e-6 * r));
    vec2::dot(spec.g(face), grad)
}

/// Least-squares slope of `log error` against `log h`.
pub fn richardson_order(hs: &[f64], errors: &[f64]) -> f64 {
    assert_eq!(hs.len(), errors.len(), "one error per step size");
    assert!(hs.len() >= 2, "at least two step sizes");
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_laplacian_is_four() {
        let f = FnField(|p: Vec2| p[0] * p[0] + p[1] * p[1]);
        for p in [[0.3, -1.2], [5.0, 7.0]] {
            let l = laplacian_fd(&f, p, 1e-3).unwrap();
            assert!((l - 4.0).abs() < 1e-6, "{l}");
        }
    }

    #[test]
    fn stencil_must_stay_inside() {
        let spec = WedgeSpec::from_angles(std::f64::consts::FRAC_PI_2, 0.0, 0.0).unwrap();
        let cone = super::super::ConeFunctionSet::new(&spec);
        let f = cone.field(super::super::ConeField::Harmonic);
        assert!(laplacian_fd(&f, [1.0, 0.01], 0.01).is_err());
        assert!(laplacian_fd(&f, [1.0, 0.5], 0.01).is_ok());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let hs = [1e-2, 5e-3, 2.5e-3];
        let errs: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        assert!((richardson_order(&hs, &errs) - 2.0).abs() < 1e-12);
    }
}
