use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::rng::stream;
use crate::wedge::Vec2;

/// Row-major 2×2 matrix.
pub type Mat2 = [[f64; 2]; 2];

const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn frobenius(m: &Mat2) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Affine drift `b(x) = b₀ + B x` and diffusion `σ(x) = I + x₁ A₁ + x₂ A₂`.
///
/// `σ(0) = I` by construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    #[serde(default)]
    pub b0: Vec2,
    #[serde(default)]
    pub b_linear: Mat2,
    /// `[A₁, A₂]`.
    #[serde(default)]
    pub sigma_linear: [Mat2; 2],
    /// Declared Lipschitz constant for `|b(x) - b(y)| + ‖σ(x) - σ(y)‖_F`.
    pub lipschitz_bound: f64,
}

impl Coefficients {
    /// Standard Brownian motion.
    pub fn brownian() -> Self {
        Self {
            b0: [0.0; 2],
            b_linear: [[0.0; 2]; 2],
            sigma_linear: [[[0.0; 2]; 2]; 2],
            lipschitz_bound: 0.0,
        }
    }

    pub fn is_brownian(&self) -> bool {
        self.b0 == [0.0; 2]
            && self.b_linear.iter().flatten().all(|v| *v == 0.0)
            && self.sigma_linear.iter().flatten().flatten().all(|v| *v == 0.0)
    }

    pub fn drift(&self, x: Vec2) -> Vec2 {
        let l = mat_vec(&self.b_linear, x);
        [self.b0[0] + l[0], self.b0[1] + l[1]]
    }

    pub fn sigma(&self, x: Vec2) -> Mat2 {
        let mut s = IDENTITY;
        for (k, a) in self.sigma_linear.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] += x[k] * a[i][j];
                }
            }
        }
        s
    }

    /// Exact global Lipschitz constant of the affine parts.
    pub fn lipschitz_constant(&self) -> f64 {
        let b = {
            // Spectral norm of B from the 2×2 singular value formula.
            let m = &self.b_linear;
            let p = m.iter().flatten().map(|v| v * v).sum::<f64>();
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            (0.5 * (p + (p * p - 4.0 * det * det).max(0.0).sqrt())).sqrt()
        };
        let s = (frobenius(&self.sigma_linear[0]).powi(2) + frobenius(&self.sigma_linear[1]).powi(2)).sqrt();
        b + s
    }

    /// Checks finiteness and spot-checks the declared Lipschitz bound on
    /// seeded random point pairs in `[-1, 1]²`.
    pub fn validate(&self) -> Result<(), SimError> {
        let all = self
            .b0
            .iter()
            .chain(self.b_linear.iter().flatten())
            .chain(self.sigma_linear.iter().flatten().flatten())
            .chain(std::iter::once(&self.lipschitz_bound));
        for v in all {
            if !v.is_finite() {
                return Err(SimError::InvalidCoefficients("non-finite entry".into()));
            }
        }
        if self.lipschitz_bound < 0.0 {
            return Err(SimError::InvalidCoefficients("negative Lipschitz bound".into()));
        }
        let mut rng = stream(0, "lipschitz_spot_check", 0);
        for _ in 0..1000 {
            let x: [f64; 2] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let y: [f64; 2] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let dist = (x[0] - y[0]).hypot(x[1] - y[1]);
            if dist == 0.0 {
                continue;
            }
            let db = self.drift(x);
            let db2 = self.drift(y);
            let (sx, sy) = (self.sigma(x), self.sigma(y));
            let mut ds = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    ds[i][j] = sx[i][j] - sy[i][j];
                }
            }
            let ratio = ((db[0] - db2[0]).hypot(db[1] - db2[1]) + frobenius(&ds)) / dist;
            if ratio > self.lipschitz_bound * (1.0 + 1e-9) + 1e-12 {
                return Err(SimError::InvalidCoefficients(format!(
                    "declared Lipschitz bound {} is exceeded: ratio {ratio} between {x:?} and {y:?}",
                    self.lipschitz_bound
                )));
            }
        }
        Ok(())
    }

    /// One Euler proposal `x + b(x) h + σ(x) √h ξ`.
    #[inline]
    pub(crate) fn propose(&self, brownian: bool, x: Vec2, xi: Vec2, h: f64, sqrt_h: f64) -> Vec2 {
        if brownian {
            return [x[0] + sqrt_h * xi[0], x[1] + sqrt_h * xi[1]];
        }
        let b = self.drift(x);
        let s = self.sigma(x);
        let n = mat_vec(&s, xi);
        [
            x[0] + b[0] * h + sqrt_h * n[0],
            x[1] + b[1] * h + sqrt_h * n[1],
        ]
    }
}

impl Default for Coefficients {
    fn default() -> Self {
        Self::brownian()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Coefficients {
        Coefficients {
            b0: [1.0, -2.0],
            b_linear: [[0.5, 0.0], [0.0, -0.5]],
            sigma_linear: [[[0.1, 0.0], [0.0, 0.1]], [[0.0, 0.2], [0.0, 0.0]]],
            lipschitz_bound: 1.0,
        }
    }

    #[test]
    fn sigma_at_origin_is_identity() {
        assert_eq!(sample().sigma([0.0, 0.0]), IDENTITY);
        assert_eq!(Coefficients::brownian().sigma([3.0, 4.0]), IDENTITY);
    }

    #[test]
    fn lipschitz_spot_check() {
        let c = sample();
        assert!(c.lipschitz_constant() < 1.0);
        c.validate().unwrap();
        let tight = Coefficients {
            lipschitz_bound: 0.1,
            ..c
        };
        assert!(matches!(
            tight.validate(),
            Err(SimError::InvalidCoefficients(_))
        ));
    }

    #[test]
    fn brownian_detection() {
        assert!(Coefficients::brownian().is_brownian());
        assert!(!sample().is_brownian());
    }
}
