use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::engine::{run_excursion, run_replicates, Excursion};
use super::stats::{mean_and_stderr, wilson_interval, WILSON_Z};
use super::{Coefficients, Domain, EtaRule, PathOutcome, ShellLadder, SimError, SimParams, Terminal};
use crate::kernel::interchange::KernelRecord;
use crate::kernel::{ChainSequence, FiniteStateSpace, MeasureVec, SubKernel};
use crate::rng::stream;
use crate::wedge::{vec2, Vec2};

/// Parametric bootstrap replicates used for standard errors of derived
/// quantities.
const BOOTSTRAP_REPLICATES: u64 = 200;

fn shell_space(n: usize, m: usize) -> Result<FiniteStateSpace, SimError> {
    Ok(FiniteStateSpace::indexed(&format!("E{n}:"), m)?)
}

fn point_label(prefix: &str, x: Vec2, r: f64) -> String {
    format!(
        "{prefix}:{:016x}:{:016x}:{:016x}",
        x[0].to_bits(),
        x[1].to_bits(),
        r.to_bits()
    )
}

/// Binomial estimate of `P(τ^δ < ϑ_η)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub eta: f64,
    pub n: u64,
    pub survived: u64,
    pub absorbed: u64,
    /// Excluded from the estimate.
    pub timeouts: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub wilson: (f64, f64),
}

impl SurvivalEstimate {
    fn from_counts(eta: f64, survived: u64, absorbed: u64, timeouts: u64) -> Self {
        let n = survived + absorbed;
        let p_hat = if n > 0 { survived as f64 / n as f64 } else { f64::NAN };
        Self {
            eta,
            n: n + timeouts,
            survived,
            absorbed,
            timeouts,
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
            wilson: wilson_interval(survived, n, WILSON_Z),
        }
    }
}

/// Survival probabilities from `x` for several absorption radii at once.
///
/// Paths do not depend on `η` until they are absorbed, so one run with the
/// smallest radius decides every larger one from the minimum radius along the
/// path; the estimates are the ones separate runs on shared streams would
/// give, and are monotone in `η` by construction.
#[allow(clippy::too_many_arguments)]
pub fn survival_sweep(
    domain: &Domain,
    coeffs: &Coefficients,
    x: Vec2,
    delta: f64,
    etas: &[f64],
    params: &SimParams,
    n: u64,
) -> Result<Vec<SurvivalEstimate>, SimError> {
    params.validate()?;
    if n == 0 || etas.is_empty() {
        return Err(SimError::EmptyRequest("survival needs n > 0 and at least one eta".into()));
    }
    let eta_min = etas.iter().copied().fold(f64::INFINITY, f64::min);
    let run_params = params.with_eta(EtaRule::Absolute(eta_min));
    let exc = Excursion::new(domain, &run_params, delta, false, 1);
    exc.validate(domain, x)?;
    let label = point_label("survival", x, delta);
    let outcomes = run_replicates(n, params.workers, |i| {
        let mut rng = stream(params.seed, &label, i);
        run_excursion(domain, coeffs, x, &exc, &mut rng, |_, _, _, _| {})
    })?;
    Ok(etas
        .iter()
        .map(|&eta| {
            let (mut s, mut a, mut t) = (0, 0, 0);
            for o in &outcomes {
                match o.terminal {
                    Terminal::Timeout => t += 1,
                    _ if o.min_radius <= eta => a += 1,
                    Terminal::ShellHit { .. } => s += 1,
                    Terminal::Absorbed => a += 1,
                }
            }
            SurvivalEstimate::from_counts(eta, s, a, t)
        })
        .collect())
}

/// `P(τ^δ < ϑ_η)` from `x`, with `η` taken from `params` for target `δ`.
pub fn survival_probability(
    domain: &Domain,
    coeffs: &Coefficients,
    x: Vec2,
    delta: f64,
    params: &SimParams,
    n: u64,
) -> Result<SurvivalEstimate, SimError> {
    let eta = params.eta_for(delta);
    Ok(survival_sweep(domain, coeffs, x, delta, &[eta], params, n)?[0])
}

/// Hitting kernel `Q̂_n` from the bins of shell `n` to those of shell `n - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalKernel {
    pub level: usize,
    pub kernel: SubKernel,
    pub counts: Vec<Vec<u64>>,
    /// Completed excursions per row (timeouts excluded).
    pub trials: Vec<u64>,
    pub stderr: Vec<Vec<f64>>,
    pub timeouts: u64,
}

impl EmpiricalKernel {
    fn from_counts(level: usize, m: usize, counts: Vec<Vec<u64>>, trials: Vec<u64>, timeouts: u64) -> Result<Self, SimError> {
        let mut rows = Vec::with_capacity(m);
        let mut stderr = Vec::with_capacity(m);
        for (row, &t) in counts.iter().zip(&trials) {
            let t_f = (t.max(1)) as f64;
            let p: Vec<f64> = row.iter().map(|&c| c as f64 / t_f).collect();
            stderr.push(p.iter().map(|p| (p * (1.0 - p) / t_f).sqrt()).collect());
            rows.push(p);
        }
        let kernel = SubKernel::from_rows(shell_space(level, m)?, shell_space(level - 1, m)?, &rows)?;
        Ok(Self {
            level,
            kernel,
            counts,
            trials,
            stderr,
            timeouts,
        })
    }

    /// Empirical survival probability per row.
    pub fn survival(&self) -> Vec<f64> {
        self.kernel.row_masses()
    }

    pub fn to_record(&self, source_index: usize, target_index: usize) -> KernelRecord {
        KernelRecord {
            source_index,
            target_index,
            rows: self.kernel.rows().map(<[f64]>::to_vec).collect(),
            counts: Some(self.counts.clone()),
            stderr: Some(self.stderr.clone()),
        }
    }

    /// A multinomial resample of every row.
    fn resample<R: Rng>(&self, rng: &mut R) -> Result<SubKernel, SimError> {
        let rows: Vec<Vec<f64>> = self
            .counts
            .iter()
            .zip(&self.trials)
            .map(|(row, &t)| {
                let probs: Vec<f64> = row.iter().map(|&c| c as f64 / t.max(1) as f64).collect();
                multinomial(rng, t, &probs)
                    .into_iter()
                    .map(|c| c as f64 / t.max(1) as f64)
                    .collect()
            })
            .collect();
        Ok(SubKernel::from_rows(
            self.kernel.source().clone(),
            self.kernel.target().clone(),
            &rows,
        )?)
    }
}

fn multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut left = n;
    let mut mass_left = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for &p in probs {
        if left == 0 || mass_left <= 0.0 {
            out.push(0);
            continue;
        }
        let q = (p / mass_left).clamp(0.0, 1.0);
        let c = Binomial::new(left, q).expect("probability in [0, 1]").sample(rng);
        out.push(c);
        left -= c;
        mass_left -= p;
    }
    out
}

/// Estimates `Q̂_n` by running `n_per_bin` excursions from every bin
/// midpoint of shell `n` to shell `n - 1`.
pub fn estimate_kernel(
    domain: &Domain,
    coeffs: &Coefficients,
    ladder: &ShellLadder,
    n: usize,
    n_per_bin: u64,
    params: &SimParams,
) -> Result<EmpiricalKernel, SimError> {
    params.validate()?;
    ladder.validate()?;
    if n == 0 || n > ladder.n_max {
        return Err(SimError::EmptyRequest(format!(
            "kernel level {n} outside 1..={}",
            ladder.n_max
        )));
    }
    if n_per_bin == 0 {
        return Err(SimError::EmptyRequest("N_per_bin must be positive".into()));
    }
    let m = ladder.m;
    let (r_from, r_to) = (ladder.radius(n), ladder.radius(n - 1));
    let exc = Excursion::new(domain, params, r_to, false, m);
    let starts: Vec<Vec2> = (0..m).map(|j| domain.bin_midpoint(r_from, j, m)).collect();
    for x in &starts {
        exc.validate(domain, *x)?;
    }
    let labels: Vec<String> = (0..m).map(|j| format!("kernel:{n}:{j}")).collect();
    let outcomes = run_replicates(m as u64 * n_per_bin, params.workers, |idx| {
        let (j, i) = ((idx / n_per_bin) as usize, idx % n_per_bin);
        let mut rng = stream(params.seed, &labels[j], i);
        run_excursion(domain, coeffs, starts[j], &exc, &mut rng, |_, _, _, _| {}).terminal
    })?;
    let mut counts = vec![vec![0u64; m]; m];
    let mut trials = vec![0u64; m];
    let mut timeouts = 0;
    for (idx, t) in outcomes.iter().enumerate() {
        let j = idx / n_per_bin as usize;
        match t {
            Terminal::ShellHit { bin } => {
                counts[j][*bin] += 1;
                trials[j] += 1;
            }
            Terminal::Absorbed => trials[j] += 1,
            Terminal::Timeout => timeouts += 1,
        }
    }
    EmpiricalKernel::from_counts(n, m, counts, trials, timeouts)
}

/// `Q̂_{first}, …, Q̂_{last}` in chain order.
pub fn estimate_kernel_chain(
    domain: &Domain,
    coeffs: &Coefficients,
    ladder: &ShellLadder,
    first: usize,
    last: usize,
    n_per_bin: u64,
    params: &SimParams,
) -> Result<Vec<EmpiricalKernel>, SimError> {
    (first..=last)
        .map(|n| estimate_kernel(domain, coeffs, ladder, n, n_per_bin, params))
        .collect()
}

/// Law of the first-hit bin on shell `n` for the process started at the
/// origin and restarted at `ρ g⁰` whenever it enters `B_η(0)`.
pub fn entry_law(
    domain: &Domain,
    coeffs: &Coefficients,
    ladder: &ShellLadder,
    n: usize,
    samples: u64,
    params: &SimParams,
) -> Result<(MeasureVec, Vec<u64>, u64), SimError> {
    let outcomes = restart_runs(domain, coeffs, ladder.radius(n), ladder.m, &format!("entry:{n}"), samples, params)?;
    let mut counts = vec![0u64; ladder.m];
    let mut timeouts = 0;
    for o in &outcomes {
        match o.bin() {
            Some(b) => counts[b] += 1,
            None => timeouts += 1,
        }
    }
    let done: u64 = counts.iter().sum();
    if done == 0 {
        return Err(SimError::EmptyRequest("every entry-law run timed out".into()));
    }
    let mass = counts.iter().map(|&c| c as f64 / done as f64).collect();
    Ok((MeasureVec::probability(shell_space(n, ladder.m)?, mass)?, counts, timeouts))
}

fn restart_runs(
    domain: &Domain,
    coeffs: &Coefficients,
    target: f64,
    bins: usize,
    label: &str,
    samples: u64,
    params: &SimParams,
) -> Result<Vec<PathOutcome>, SimError> {
    params.validate()?;
    if samples == 0 {
        return Err(SimError::EmptyRequest("sample count must be positive".into()));
    }
    let exc = Excursion::new(domain, params, target, true, bins);
    let x0 = exc.restart_point();
    exc.validate(domain, x0)?;
    run_replicates(samples, params.workers, |i| {
        let mut rng = stream(params.seed, label, i);
        run_excursion(domain, coeffs, x0, &exc, &mut rng, |_, _, _, _| {})
    })
}

/// `n` excursions from `x0` to the shell `target`, replicate `i` drawing from
/// stream `(seed, label, i)`.
#[allow(clippy::too_many_arguments)]
pub fn replicate_outcomes(
    domain: &Domain,
    coeffs: &Coefficients,
    x0: Vec2,
    target: f64,
    bins: usize,
    restart: bool,
    params: &SimParams,
    n: u64,
    label: &str,
) -> Result<Vec<PathOutcome>, SimError> {
    params.validate()?;
    let exc = Excursion::new(domain, params, target, restart, bins);
    exc.validate(domain, x0)?;
    run_replicates(n, params.workers, |i| {
        let mut rng = stream(params.seed, label, i);
        run_excursion(domain, coeffs, x0, &exc, &mut rng, |_, _, _, _| {})
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeEstimate {
    pub delta: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub timeouts: u64,
    pub mean_restarts: f64,
}

/// Mean of `τ^δ` for the process started at the origin, with restarts.
pub fn mean_exit_time(
    domain: &Domain,
    coeffs: &Coefficients,
    delta: f64,
    params: &SimParams,
    n: u64,
) -> Result<ExitTimeEstimate, SimError> {
    let label = format!("exit_time:{:016x}", delta.to_bits());
    let outcomes = restart_runs(domain, coeffs, delta, 1, &label, n, params)?;
    let done: Vec<&PathOutcome> = outcomes.iter().filter(|o| o.survived()).collect();
    let times: Vec<f64> = done.iter().map(|o| o.elapsed).collect();
    let (mean, stderr) = mean_and_stderr(&times);
    let restarts = done.iter().map(|o| o.restarts as f64).sum::<f64>() / done.len().max(1) as f64;
    Ok(ExitTimeEstimate {
        delta,
        mean,
        stderr,
        n,
        timeouts: n - done.len() as u64,
        mean_restarts: restarts,
    })
}

/// Exit positions on a shell, as fractions of the shell arc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitLaw {
    pub n: usize,
    pub start: Vec2,
    pub target: f64,
    /// Arc fractions of surviving paths, in replicate order.
    pub fractions: Vec<f64>,
    pub absorbed: u64,
    pub timeouts: u64,
}

impl ExitLaw {
    pub fn histogram(&self, bins: usize) -> Vec<u64> {
        let mut h = vec![0u64; bins];
        for f in &self.fractions {
            h[((f * bins as f64) as usize).min(bins - 1)] += 1;
        }
        h
    }
}

/// Exit law on shell `n - 1` from `x̄ 4^{-n}`, so that the rescaled process
/// `4^n X(4^{-2n} t)` starts at `x̄` and exits at radius `4 δ*`.
///
/// With `n = 0` this is the direct law from `x̄`. `label` names the random
/// streams; reusing it across `n` couples the runs.
#[allow(clippy::too_many_arguments)]
pub fn rescaled_exit_law(
    domain: &Domain,
    coeffs: &Coefficients,
    ladder: &ShellLadder,
    n: usize,
    x_bar: Vec2,
    label: &str,
    params: &SimParams,
    samples: u64,
) -> Result<ExitLaw, SimError> {
    params.validate()?;
    if samples == 0 {
        return Err(SimError::EmptyRequest("sample count must be positive".into()));
    }
    let scale = (-2.0 * n as f64).exp2();
    let start = vec2::scale(x_bar, scale);
    let target = 4.0 * ladder.delta_star * scale;
    let exc = Excursion::new(domain, params, target, false, ladder.m);
    exc.validate(domain, start)?;
    let outcomes = run_replicates(samples, params.workers, |i| {
        let mut rng = stream(params.seed, label, i);
        run_excursion(domain, coeffs, start, &exc, &mut rng, |_, _, _, _| {})
    })?;
    let mut law = ExitLaw {
        n,
        start,
        target,
        fractions: Vec::with_capacity(outcomes.len()),
        absorbed: 0,
        timeouts: 0,
    };
    for o in &outcomes {
        match o.terminal {
            Terminal::ShellHit { .. } => law.fractions.push(o.arc_fraction),
            Terminal::Absorbed => law.absorbed += 1,
            Terminal::Timeout => law.timeouts += 1,
        }
    }
    Ok(law)
}

/// Both sides of the basic identity on shell `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicIdentity {
    pub n: usize,
    pub k: usize,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub combined_stderr: f64,
}

/// Shared Monte Carlo inputs for basic-identity checks on shell `n` with up
/// to `k_max` kernels.
#[derive(Clone, Debug)]
pub struct IdentityInputs {
    pub n: usize,
    /// First-hit bins on shell `n` of the restarted process.
    pub direct: Vec<usize>,
    /// Entry-law counts on shells `n + 1, …, n + k_max`.
    pub entry_counts: Vec<Vec<u64>>,
    /// `Q̂_{n+1}, …, Q̂_{n+k_max}`.
    pub kernels: Vec<EmpiricalKernel>,
    seed: u64,
    m: usize,
}

impl IdentityInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn collect(
        domain: &Domain,
        coeffs: &Coefficients,
        ladder: &ShellLadder,
        n: usize,
        k_max: usize,
        n_per_bin: u64,
        n_direct: u64,
        params: &SimParams,
    ) -> Result<Self, SimError> {
        if k_max == 0 || n + k_max > ladder.n_max {
            return Err(SimError::EmptyRequest(format!(
                "need 1 <= k and n + k <= {}",
                ladder.n_max
            )));
        }
        let direct: Vec<usize> = restart_runs(domain, coeffs, ladder.radius(n), ladder.m, &format!("entry:{n}"), n_direct, params)?
            .iter()
            .filter_map(PathOutcome::bin)
            .collect();
        let mut entry_counts = Vec::with_capacity(k_max);
        for l in n + 1..=n + k_max {
            entry_counts.push(entry_law(domain, coeffs, ladder, l, n_direct, params)?.1);
        }
        let kernels = estimate_kernel_chain(domain, coeffs, ladder, n + 1, n + k_max, n_per_bin, params)?;
        Ok(Self {
            n,
            direct,
            entry_counts,
            kernels,
            seed: params.seed,
            m: ladder.m,
        })
    }

    fn rhs_from(&self, k: usize, kernels: Vec<SubKernel>, entry: &[u64], f: &[f64]) -> Result<f64, SimError> {
        let total: u64 = entry.iter().sum();
        let mass = entry.iter().map(|&c| c as f64 / total as f64).collect();
        let nu = MeasureVec::probability(shell_space(self.n + k, self.m)?, mass)?;
        let chain = ChainSequence::new(kernels)?;
        Ok(chain.ergodic_ratio(k, f, &nu)?)
    }

    /// Evaluates both sides with `k` kernels for the bin function `f`.
    pub fn check(&self, k: usize, f: &[f64]) -> Result<BasicIdentity, SimError> {
        if k == 0 || k > self.kernels.len() {
            return Err(SimError::EmptyRequest(format!("k = {k} outside 1..={}", self.kernels.len())));
        }
        if f.len() != self.m {
            return Err(SimError::EmptyRequest(format!("f needs {} entries", self.m)));
        }
        let values: Vec<f64> = self.direct.iter().map(|&b| f[b]).collect();
        let (lhs, lhs_stderr) = mean_and_stderr(&values);
        let entry = &self.entry_counts[k - 1];
        let kernels: Vec<SubKernel> = self.kernels[..k].iter().map(|q| q.kernel.clone()).collect();
        let rhs = self.rhs_from(k, kernels, entry, f)?;

        let label = format!("identity_bootstrap:{}:{k}", self.n);
        let mut draws = Vec::with_capacity(BOOTSTRAP_REPLICATES as usize);
        for b in 0..BOOTSTRAP_REPLICATES {
            let mut rng = stream(self.seed, &label, b);
            let ks = self.kernels[..k]
                .iter()
                .map(|q| q.resample(&mut rng))
                .collect::<Result<Vec<_>, _>>()?;
            let total: u64 = entry.iter().sum();
            let probs: Vec<f64> = entry.iter().map(|&c| c as f64 / total as f64).collect();
            let e = multinomial(&mut rng, total, &probs);
            if let Ok(v) = self.rhs_from(k, ks, &e, f) {
                draws.push(v);
            }
        }
        let rhs_stderr = if draws.len() > 1 {
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64).sqrt()
        } else {
            f64::NAN
        };
        // Every sample equals f's common value when f is constant.
        let lhs_stderr = if lhs_stderr.is_nan() { 0.0 } else { lhs_stderr };
        Ok(BasicIdentity {
            n: self.n,
            k,
            lhs,
            lhs_stderr,
            rhs,
            rhs_stderr,
            combined_stderr: lhs_stderr.hypot(rhs_stderr),
        })
    }
}

/// One-shot version of [`IdentityInputs::check`].
#[allow(clippy::too_many_arguments)]
pub fn basic_identity_check(
    domain: &Domain,
    coeffs: &Coefficients,
    ladder: &ShellLadder,
    n: usize,
    k: usize,
    f: &[f64],
    n_per_bin: u64,
    n_direct: u64,
    params: &SimParams,
) -> Result<BasicIdentity, SimError> {
    IdentityInputs::collect(domain, coeffs, ladder, n, k, n_per_bin, n_direct, params)?.check(k, f)
}

/// Observed contraction of `T_k f` along a chain of empirical kernels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionTransfer {
    /// `osc(T_k f)` for `k = 0, …, K`.
    pub spreads: Vec<f64>,
    /// Largest one-step ratio among spreads above the noise floor.
    pub measured_rate: f64,
    pub eps0_hat: f64,
    pub c0_hat: f64,
    /// `1 - ε̂₀ ĉ₀`.
    pub bound: f64,
    /// Bootstrap standard error of `ε̂₀ ĉ₀`.
    pub bound_stderr: f64,
}

impl ContractionTransfer {
    pub fn holds(&self) -> bool {
        self.measured_rate <= self.bound + 3.0 * self.bound_stderr
    }
}

/// Spreads below this are treated as converged when measuring the rate.
const SPREAD_FLOOR: f64 = 1e-12;

pub fn contraction_transfer(
    kernels: &[EmpiricalKernel],
    f: &[f64],
    seed: u64,
) -> Result<ContractionTransfer, SimError> {
    let chain = ChainSequence::new(kernels.iter().map(|q| q.kernel.clone()).collect())?;
    let osc = |v: &[f64]| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        hi - lo
    };
    let mut spreads = vec![osc(f)];
    for k in 1..=chain.len() {
        spreads.push(osc(&chain.tk_apply(k, f)?));
    }
    let measured_rate = spreads
        .windows(2)
        .filter(|w| w[0] > SPREAD_FLOOR)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    let eps0_hat = chain.condition_eps0();
    let (c0_hat, _) = chain.min_c0()?;
    let mut products = Vec::with_capacity(BOOTSTRAP_REPLICATES as usize);
    for b in 0..BOOTSTRAP_REPLICATES {
        let mut rng = stream(seed, "contraction_bootstrap", b);
        let ks = kernels.iter().map(|q| q.resample(&mut rng)).collect::<Result<Vec<_>, _>>()?;
        if let Ok(c) = ChainSequence::new(ks) {
            if let Ok((c0, _)) = c.min_c0() {
                products.push(c.condition_eps0() * c0);
            }
        }
    }
    let (_, se_mean) = mean_and_stderr(&products);
    let bound_stderr = se_mean * (products.len() as f64).sqrt();
    Ok(ContractionTransfer {
        spreads,
        measured_rate,
        eps0_hat,
        c0_hat,
        bound: 1.0 - eps0_hat * c0_hat,
        bound_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::DomainSpec;
    use crate::wedge::WedgeSpec;
    use std::f64::consts::PI;

    fn positive() -> Domain {
        let w = WedgeSpec::from_angles(0.75 * PI, 3.0 * PI / 16.0, 3.0 * PI / 16.0).unwrap();
        Domain::new(&DomainSpec::exact(&w)).unwrap()
    }

    #[test]
    fn kernel_requests_are_validated() {
        let d = positive();
        let ladder = ShellLadder::new(1.0, 3, 4).unwrap();
        let p = SimParams::new(1e-3, 1).with_step(super::super::StepRule::RelativeToTarget(1e-2));
        let c = Coefficients::brownian();
        assert!(matches!(estimate_kernel(&d, &c, &ladder, 1, 0, &p), Err(SimError::EmptyRequest(_))));
        assert!(estimate_kernel(&d, &c, &ladder, 0, 10, &p).is_err());
        let a = estimate_kernel(&d, &c, &ladder, 2, 50, &p).unwrap();
        let b = estimate_kernel(&d, &c, &ladder, 2, 50, &p.with_workers(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.survival().iter().all(|s| *s > 0.0 && *s <= 1.0));
    }

    #[test]
    fn survival_on_shell_is_one() {
        let d = positive();
        let p = SimParams::new(1e-3, 1);
        let x = d.bin_midpoint(1.0, 0, 1);
        let s = survival_probability(&d, &Coefficients::brownian(), x, 1.0, &p, 20).unwrap();
        assert_eq!(s.p_hat, 1.0);
    }

    #[test]
    fn constant_function_identity_is_exact() {
        let d = positive();
        let ladder = ShellLadder::new(1.0, 3, 4).unwrap();
        let p = SimParams::new(1e-3, 4).with_step(super::super::StepRule::RelativeToTarget(1e-2));
        let inputs = IdentityInputs::collect(&d, &Coefficients::brownian(), &ladder, 0, 2, 40, 60, &p).unwrap();
        for k in 1..=2 {
            let r = inputs.check(k, &[1.0; 4]).unwrap();
            assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        }
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = stream(3, "m", 0);
        let c = multinomial(&mut rng, 1000, &[0.2, 0.3, 0.1]);
        assert!(c.iter().sum::<u64>() <= 1000);
        let c = multinomial(&mut rng, 1000, &[0.5, 0.5]);
        assert_eq!(c.iter().sum::<u64>(), 1000);
    }
}
