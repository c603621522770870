use serde::{Deserialize, Serialize};

use super::SimError;
use crate::wedge::Vec2;

/// Default `h / (target radius)²`.
pub const DEFAULT_H_FACTOR: f64 = 1e-4;

/// Default step budget per excursion.
pub const DEFAULT_MAX_STEPS: u64 = 100_000_000;

/// Halvings of `h` tried before a step that cannot be pushed back is skipped.
pub const DEFAULT_MAX_HALVINGS: u32 = 40;

/// How the time step is chosen for an excursion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum StepRule {
    /// The same `h` for every excursion.
    Absolute(f64),
    /// `h = factor · (target radius)²`, so rescaled excursions see the same
    /// effective resolution.
    RelativeToTarget(f64),
}

/// How the absorption radius `η` is chosen for an excursion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum EtaRule {
    Absolute(f64),
    RelativeToTarget(f64),
}

/// Discretization and bookkeeping parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    #[serde(default = "default_step")]
    pub h: StepRule,
    pub eta: EtaRule,
    /// Restart displacement; `η/2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Restart direction; the domain's `g⁰` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<Vec2>,
    /// Overridden by the lab's master seed.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default = "default_halvings")]
    pub max_halvings: u32,
    /// Worker threads; results do not depend on it.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_step() -> StepRule {
    StepRule::RelativeToTarget(DEFAULT_H_FACTOR)
}

fn default_max_steps() -> u64 {
    DEFAULT_MAX_STEPS
}

fn default_halvings() -> u32 {
    DEFAULT_MAX_HALVINGS
}

fn default_workers() -> usize {
    1
}

impl SimParams {
    /// Relative step and absorption radius, single worker.
    pub fn new(eta_relative: f64, seed: u64) -> Self {
        Self {
            h: default_step(),
            eta: EtaRule::RelativeToTarget(eta_relative),
            rho: None,
            g0: None,
            seed,
            max_steps: DEFAULT_MAX_STEPS,
            max_halvings: DEFAULT_MAX_HALVINGS,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_step(mut self, h: StepRule) -> Self {
        self.h = h;
        self
    }

    pub fn with_eta(mut self, eta: EtaRule) -> Self {
        self.eta = eta;
        self
    }

    pub fn step_for(&self, target: f64) -> f64 {
        match self.h {
            StepRule::Absolute(h) => h,
            StepRule::RelativeToTarget(f) => f * target * target,
        }
    }

    pub fn eta_for(&self, target: f64) -> f64 {
        match self.eta {
            EtaRule::Absolute(e) => e,
            EtaRule::RelativeToTarget(f) => f * target,
        }
    }

    pub fn rho_for(&self, target: f64) -> f64 {
        self.rho.unwrap_or_else(|| 0.5 * self.eta_for(target))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SimError::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        match self.h {
            StepRule::Absolute(v) | StepRule::RelativeToTarget(v) => positive("h", v)?,
        }
        match self.eta {
            EtaRule::Absolute(v) => {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(SimError::InvalidParams(format!("eta must be non-negative, got {v}")));
                }
            }
            EtaRule::RelativeToTarget(v) => {
                if !(0.0..1.0).contains(&v) {
                    return Err(SimError::InvalidParams(format!(
                        "relative eta must lie in [0, 1), got {v}"
                    )));
                }
            }
        }
        if let Some(r) = self.rho {
            positive("rho", r)?;
        }
        if let Some(g) = self.g0 {
            if ((g[0].hypot(g[1])) - 1.0).abs() > 1e-9 {
                return Err(SimError::InvalidParams("g0 must be a unit vector".into()));
            }
        }
        if self.max_steps == 0 {
            return Err(SimError::InvalidParams("max_steps must be positive".into()));
        }
        if self.workers == 0 {
            return Err(SimError::InvalidParams("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Dyadic circles `E_n = {|x| = δ* 4^{-n}}`, each cut into `m` angular bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellLadder {
    pub delta_star: f64,
    pub n_max: usize,
    #[serde(default = "default_bins")]
    pub m: usize,
}

fn default_bins() -> usize {
    16
}

impl ShellLadder {
    pub fn new(delta_star: f64, n_max: usize, m: usize) -> Result<Self, SimError> {
        let l = Self {
            delta_star,
            n_max,
            m,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.delta_star > 0.0 && self.delta_star.is_finite()) || self.m == 0 {
            return Err(SimError::InvalidParams(format!("invalid shell ladder {self:?}")));
        }
        Ok(())
    }

    /// `δ* 2^{-2n}`.
    pub fn radius(&self, n: usize) -> f64 {
        self.delta_star * (-2.0 * n as f64).exp2()
    }

    /// `δ* 2^{-2n+1}`, midway in log scale between `E_n` and `E_{n-1}`.
    pub fn halfway_radius(&self, n: usize) -> f64 {
        self.delta_star * (1.0 - 2.0 * n as f64).exp2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_radii() {
        let l = ShellLadder::new(1.0, 4, 16).unwrap();
        assert_eq!(l.radius(0), 1.0);
        assert_eq!(l.radius(2), 1.0 / 16.0);
        assert_eq!(l.halfway_radius(1), 0.5);
    }

    #[test]
    fn relative_rules_scale() {
        let p = SimParams::new(1e-3, 1);
        assert_eq!(p.step_for(0.5), 0.25e-4);
        assert_eq!(p.eta_for(0.5), 0.5e-3);
        assert_eq!(p.rho_for(0.5), 0.25e-3);
        p.validate().unwrap();
        assert!(SimParams::new(1.5, 1).validate().is_err());
    }

    #[test]
    fn serde_shape() {
        let p = SimParams::new(1e-3, 9);
        let v = serde_json::to_value(p).unwrap();
        assert_eq!(v["h"]["rule"], "relative_to_target");
        let back: SimParams = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }
}
