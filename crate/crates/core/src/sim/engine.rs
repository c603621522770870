use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Coefficients, Domain, SimError, SimParams};
use crate::rng::StreamRng;
use crate::wedge::{vec2, Vec2};

/// Relative slack when deciding that a start point already lies on the
/// target shell.
const ON_SHELL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    ShellHit { bin: usize },
    Absorbed,
    Timeout,
}

/// How one excursion ended.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub terminal: Terminal,
    pub elapsed: f64,
    /// Total pushback length, a proxy for boundary local time.
    pub pushes: f64,
    pub steps: u64,
    pub restarts: u64,
    /// Smallest radius visited, including the terminal point.
    pub min_radius: f64,
    /// Position after the last step.
    pub end_point: Vec2,
    /// Position of the end point within its shell arc, in `[0, 1]`.
    pub arc_fraction: f64,
    /// Steps whose pushback produced a point outside the closed domain.
    pub infeasible: u64,
    /// Steps skipped because no halving of `h` admitted a pushback.
    pub skipped: u64,
}

impl PathOutcome {
    pub fn survived(&self) -> bool {
        matches!(self.terminal, Terminal::ShellHit { .. })
    }

    pub fn bin(&self) -> Option<usize> {
        match self.terminal {
            Terminal::ShellHit { bin } => Some(bin),
            _ => None,
        }
    }
}

/// One recorded point of a path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub step: u64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub pushback: f64,
}

/// Result of one Euler step with pushback.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub point: Vec2,
    pub push: f64,
    /// Time actually advanced, `h / 2^halvings`.
    pub dt: f64,
    pub halvings: u32,
}

/// One step `x + b(x) h + σ(x) √h ξ`, pushed back into the domain when the
/// proposal leaves it. If no pushback exists the step is retried with `h`
/// halved, reusing `ξ`.
pub fn reflect_step(
    domain: &Domain,
    coeffs: &Coefficients,
    x: Vec2,
    xi: Vec2,
    h: f64,
    max_halvings: u32,
) -> Result<StepOutcome, SimError> {
    step_with(domain, coeffs, coeffs.is_brownian(), x, xi, h, h.sqrt(), max_halvings).ok_or_else(
        || SimError::InvalidParams(format!("no admissible pushback from {x:?} after {max_halvings} halvings")),
    )
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn step_with(
    domain: &Domain,
    coeffs: &Coefficients,
    brownian: bool,
    x: Vec2,
    xi: Vec2,
    h: f64,
    sqrt_h: f64,
    max_halvings: u32,
) -> Option<StepOutcome> {
    let (mut h, mut sqrt_h) = (h, sqrt_h);
    for halvings in 0..=max_halvings {
        let proposal = coeffs.propose(brownian, x, xi, h, sqrt_h);
        if let Some((point, push)) = domain.push(proposal) {
            return Some(StepOutcome {
                point,
                push,
                dt: h,
                halvings,
            });
        }
        h *= 0.5;
        sqrt_h *= std::f64::consts::FRAC_1_SQRT_2;
    }
    None
}

/// Resolved settings for one excursion.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Excursion {
    pub target: f64,
    pub eta: f64,
    pub h: f64,
    pub rho: f64,
    pub g0: Vec2,
    pub restart: bool,
    pub max_steps: u64,
    pub max_halvings: u32,
    pub bins: usize,
}

impl Excursion {
    pub fn new(domain: &Domain, params: &SimParams, target: f64, restart: bool, bins: usize) -> Self {
        Self {
            target,
            eta: params.eta_for(target),
            h: params.step_for(target),
            rho: params.rho_for(target),
            g0: params.g0.unwrap_or(domain.g0()),
            restart,
            max_steps: params.max_steps,
            max_halvings: params.max_halvings,
            bins,
        }
    }

    pub fn restart_point(&self) -> Vec2 {
        vec2::scale(self.g0, self.rho)
    }

    pub fn validate(&self, domain: &Domain, x0: Vec2) -> Result<(), SimError> {
        if !(self.target > 0.0) || !(self.h > 0.0) || self.bins == 0 {
            return Err(SimError::InvalidParams(format!(
                "target {} and h {} must be positive, bins {} nonzero",
                self.target, self.h, self.bins
            )));
        }
        if self.eta >= self.target {
            return Err(SimError::InvalidParams(format!(
                "eta {} must be below the target radius {}",
                self.eta, self.target
            )));
        }
        if !domain.contains(x0) {
            return Err(SimError::StartOutside { x: x0[0], y: x0[1] });
        }
        let r0 = vec2::norm(x0);
        let too_close = if self.restart { false } else { self.eta > 0.0 && r0 <= self.eta };
        if too_close || r0 > self.target * (1.0 + ON_SHELL_TOL) {
            return Err(SimError::StartRadius {
                radius: r0,
                eta: self.eta,
                target: self.target,
            });
        }
        if self.restart && !domain.contains(self.restart_point()) {
            return Err(SimError::InvalidParams("restart point lies outside the domain".into()));
        }
        Ok(())
    }
}

/// Runs until `|X| ≥ target` or `|X| ≤ η`, calling `observe` after each step.
pub(crate) fn run_excursion<F: FnMut(u64, f64, Vec2, f64)>(
    domain: &Domain,
    coeffs: &Coefficients,
    x0: Vec2,
    exc: &Excursion,
    rng: &mut StreamRng,
    mut observe: F,
) -> PathOutcome {
    let brownian = coeffs.is_brownian();
    let sqrt_h = exc.h.sqrt();
    let target2 = exc.target * exc.target;
    let eta2 = exc.eta * exc.eta;
    let mut x = x0;
    let mut r2 = vec2::dot(x, x);
    let mut min_r2 = r2;
    let mut out = PathOutcome {
        terminal: Terminal::Timeout,
        elapsed: 0.0,
        pushes: 0.0,
        steps: 0,
        restarts: 0,
        min_radius: r2.sqrt(),
        end_point: x,
        arc_fraction: 0.0,
        infeasible: 0,
        skipped: 0,
    };
    if r2 >= target2 * (1.0 - ON_SHELL_TOL) {
        out.terminal = Terminal::ShellHit {
            bin: domain.bin_of(x, exc.bins),
        };
        out.arc_fraction = domain.arc_fraction(x);
        return out;
    }
    while out.steps < exc.max_steps {
        let xi = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        out.steps += 1;
        match step_with(domain, coeffs, brownian, x, xi, exc.h, sqrt_h, exc.max_halvings) {
            Some(s) => {
                if s.push > 0.0 && !domain.contains(s.point) {
                    out.infeasible += 1;
                }
                x = s.point;
                out.elapsed += s.dt;
                out.pushes += s.push;
                observe(out.steps, out.elapsed, x, s.push);
            }
            None => {
                out.skipped += 1;
                out.elapsed += exc.h;
                observe(out.steps, out.elapsed, x, 0.0);
            }
        }
        r2 = vec2::dot(x, x);
        min_r2 = min_r2.min(r2);
        if r2 >= target2 {
            out.terminal = Terminal::ShellHit {
                bin: domain.bin_of(x, exc.bins),
            };
            break;
        }
        if r2 <= eta2 {
            if exc.restart {
                x = exc.restart_point();
                out.restarts += 1;
            } else {
                out.terminal = Terminal::Absorbed;
                break;
            }
        }
    }
    out.min_radius = min_r2.sqrt();
    out.end_point = x;
    out.arc_fraction = domain.arc_fraction(x);
    out
}

/// Simulates from `x0` until the shell `|x| = target` is reached or the path
/// enters `B_η(0)`, where it is absorbed.
pub fn simulate_to_shell(
    domain: &Domain,
    coeffs: &Coefficients,
    x0: Vec2,
    target: f64,
    bins: usize,
    params: &SimParams,
    rng: &mut StreamRng,
) -> Result<PathOutcome, SimError> {
    params.validate()?;
    let exc = Excursion::new(domain, params, target, false, bins);
    exc.validate(domain, x0)?;
    Ok(run_excursion(domain, coeffs, x0, &exc, rng, |_, _, _, _| {}))
}

/// Like [`simulate_to_shell`], recording every point, optionally in restart
/// mode.
#[allow(clippy::too_many_arguments)]
pub fn simulate_path(
    domain: &Domain,
    coeffs: &Coefficients,
    x0: Vec2,
    target: f64,
    bins: usize,
    restart: bool,
    params: &SimParams,
    rng: &mut StreamRng,
) -> Result<(PathOutcome, Vec<PathPoint>), SimError> {
    params.validate()?;
    let exc = Excursion::new(domain, params, target, restart, bins);
    exc.validate(domain, x0)?;
    let mut points = vec![PathPoint {
        step: 0,
        t: 0.0,
        x: x0[0],
        y: x0[1],
        pushback: 0.0,
    }];
    let out = run_excursion(domain, coeffs, x0, &exc, rng, |step, t, p, push| {
        points.push(PathPoint {
            step,
            t,
            x: p[0],
            y: p[1],
            pushback: push,
        })
    });
    Ok((out, points))
}

/// Evaluates `f(0), …, f(n - 1)` on `workers` threads, returning results in
/// index order.
pub fn run_replicates<T, F>(n: u64, workers: usize, f: F) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if workers <= 1 {
        return Ok((0..n).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::sim::{DomainSpec, EtaRule};
    use crate::wedge::WedgeSpec;
    use std::f64::consts::FRAC_PI_2;

    fn quadrant() -> Domain {
        Domain::new(&DomainSpec::exact(&WedgeSpec::from_angles(FRAC_PI_2, 0.0, 0.0).unwrap())).unwrap()
    }

    #[test]
    fn interior_step_has_no_push() {
        let d = quadrant();
        let s = reflect_step(&d, &Coefficients::brownian(), [0.5, 0.5], [0.3, -0.2], 1e-4, 10).unwrap();
        assert_eq!(s.push, 0.0);
        assert_eq!(s.point, [0.5 + 0.01 * 0.3, 0.5 - 0.01 * 0.2]);
    }

    #[test]
    fn start_on_shell_hits_immediately() {
        let d = quadrant();
        let p = SimParams::new(1e-3, 1);
        let x0 = d.bin_midpoint(1.0, 3, 16);
        let out = simulate_to_shell(&d, &Coefficients::brownian(), x0, 1.0, 16, &p, &mut stream(1, "t", 0)).unwrap();
        assert_eq!(out.terminal, Terminal::ShellHit { bin: 3 });
        assert_eq!((out.elapsed, out.steps), (0.0, 0));
    }

    #[test]
    fn paths_stay_feasible_and_time_adds_up() {
        let d = quadrant();
        let p = SimParams::new(1e-2, 1);
        for i in 0..20 {
            let (out, pts) = simulate_path(
                &d, &Coefficients::brownian(), [0.3, 0.2], 1.0, 8, false, &p, &mut stream(5, "t", i),
            )
            .unwrap();
            assert!(pts.iter().all(|q| d.contains([q.x, q.y])));
            assert_eq!(out.infeasible, 0);
            assert!((out.elapsed - out.steps as f64 * 1e-4).abs() <= 1e-4);
            assert!(out.pushes >= 0.0);
            assert_eq!(pts.len() as u64, out.steps + 1);
        }
    }

    #[test]
    fn start_radius_checked() {
        let d = quadrant();
        let p = SimParams::new(0.1, 1).with_eta(EtaRule::Absolute(0.1));
        let err = simulate_to_shell(&d, &Coefficients::brownian(), [0.05, 0.05], 1.0, 4, &p, &mut stream(1, "t", 0));
        assert!(matches!(err, Err(SimError::StartRadius { .. })));
        let err = simulate_to_shell(&d, &Coefficients::brownian(), [-0.5, 0.5], 1.0, 4, &p, &mut stream(1, "t", 0));
        assert!(matches!(err, Err(SimError::StartOutside { .. })));
    }

    #[test]
    fn replicates_independent_of_workers() {
        let f = |i: u64| i * i;
        assert_eq!(run_replicates(100, 1, f).unwrap(), run_replicates(100, 4, f).unwrap());
    }
}
