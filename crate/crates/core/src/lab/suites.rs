use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Check, Oracle};
use crate::kernel::{random_chain, ChainSequence, FiniteStateSpace, KernelError, MeasureVec, RandomChainSpec, SubKernel};
use crate::rng::{stream, sub_seed};
use crate::sim::{
    contraction_transfer, estimate_kernel_chain, ks_critical_1pct, ks_two_sample, mean_exit_time,
    rescaled_exit_law, survival_probability, survival_sweep, Coefficients, Domain, DomainSpec, EtaRule,
    IdentityInputs, ShellLadder, SimError, SimParams, StepRule,
};
use crate::wedge::{
    boundary_flux, hitting_ratio_constant, laplacian_fd, richardson_order, select_delta_star, vec2, AuxField,
    AuxFunctionSet, AuxKind, ConeField, ConeFunctionSet, Face, HittingGrid, Vec2, WedgeSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Kernel,
    Wedge,
    Sim,
    All,
}

/// Sample sizes used by the Monte Carlo checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// The sizes the checks are specified at.
    #[default]
    Full,
    /// A tenth of the samples, for smoke runs.
    Reduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub workers: usize,
    pub scale: Scale,
}

impl SuiteOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            workers: 1,
            scale: Scale::Full,
        }
    }

    fn samples(&self, full: u64) -> u64 {
        match self.scale {
            Scale::Full => full,
            Scale::Reduced => (full / 10).max(1),
        }
    }

    fn group_seed(&self, group: &str) -> u64 {
        sub_seed(self.seed, group)
    }
}

/// `α* = -1/2`: opening `π/2`, both reflection angles `-π/8`.
pub fn wedge_alpha_negative() -> WedgeSpec {
    WedgeSpec::from_angles(PI / 2.0, -PI / 8.0, -PI / 8.0).expect("valid wedge")
}

/// `α* = 0`: opening `π/2`, reflection angles `±π/8`.
pub fn wedge_alpha_zero() -> WedgeSpec {
    WedgeSpec::from_angles(PI / 2.0, PI / 8.0, -PI / 8.0).expect("valid wedge")
}

/// `α* = 1/2`: opening `3π/4`, both reflection angles `3π/16`.
pub fn wedge_alpha_positive() -> WedgeSpec {
    WedgeSpec::from_angles(0.75 * PI, 3.0 * PI / 16.0, 3.0 * PI / 16.0).expect("valid wedge")
}

/// Runs every check of `suite`, group by group, recording each group's
/// wall-clock time on its checks.
pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Vec<Check> {
    let groups: Vec<Group> = match suite {
        Suite::Kernel => kernel_groups(),
        Suite::Wedge => wedge_groups(),
        Suite::Sim => sim_groups(),
        Suite::All => [kernel_groups(), wedge_groups(), sim_groups()].concat(),
    };
    let mut out = Vec::new();
    for (_, group) in groups {
        out.extend(timed(|| group(opts)));
    }
    out
}

type Group = (&'static str, fn(&SuiteOptions) -> Vec<Check>);

fn kernel_groups() -> Vec<Group> {
    vec![
        ("contraction_law", contraction_law),
        ("tv_pair_bound", tv_pair_bound),
        ("nu_independence", nu_independence),
        ("determinism", kernel_determinism),
    ]
}

fn wedge_groups() -> Vec<Group> {
    vec![
        ("cone_analytics", cone_analytics),
        ("aux_signs", aux_signs),
        ("alpha_monotonicity", alpha_monotonicity),
    ]
}

fn sim_groups() -> Vec<Group> {
    vec![
        ("survival", survival),
        ("hitting_ratio", hitting_ratio),
        ("exit_time_scaling", exit_time_scaling),
        ("scaling_limit", scaling_limit),
        ("basic_identity", basic_identity),
    ]
}

fn timed(f: impl FnOnce() -> Vec<Check>) -> Vec<Check> {
    let start = Instant::now();
    let mut checks = f();
    let elapsed = start.elapsed();
    for c in &mut checks {
        c.runtime = elapsed;
    }
    checks
}

// ---------------------------------------------------------------- kernels

fn dense(k: &SubKernel) -> Vec<Vec<f64>> {
    k.rows().map(<[f64]>::to_vec).collect()
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn max_row_tv(m: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            worst = worst.max(tv(&m[i], &m[j]));
        }
    }
    worst
}

fn seeded_chain(seed: u64, label: &str, index: u64, levels: usize) -> Result<ChainSequence, KernelError> {
    let mut rng = stream(seed, label, index);
    let sizes: Vec<usize> = (0..=levels).map(|_| rng.random_range(2..=12)).collect();
    random_chain(&RandomChainSpec::new(sizes, 0.3, 0.2, sub_seed(seed, &format!("{label}:{index}"))))
}

const CHAIN_LEVELS: usize = 20;

/// Total variation between any two rows of `P_{j+k} ⋯ P_{j+1}` against
/// `(1 - ε₀c₀)^k`, over every window of every chain.
fn contraction_law(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "contraction_law";
    let seed = opts.group_seed(G);
    let mut worst = f64::NEG_INFINITY;
    for c in 0..50 {
        let chain = match seeded_chain(seed, G, c, CHAIN_LEVELS) {
            Ok(ch) => ch,
            Err(e) => return vec![Check::error(G, "tv_within_rate_power", Oracle::Analytic, e)],
        };
        let (cert, p) = match (chain.certificate(), chain.normalized_kernels()) {
            (Ok(c), Ok(p)) => (c, p),
            (Err(e), _) | (_, Err(e)) => return vec![Check::error(G, "tv_within_rate_power", Oracle::Analytic, e)],
        };
        for j in 0..p.len() {
            let mut m = dense(&p[j]);
            for k in 1..=p.len() - j {
                if k > 1 {
                    m = p[j + k - 1].rows().map(|row| mat_row(row, &m)).collect();
                }
                worst = worst.max(max_row_tv(&m) - cert.at(k));
            }
        }
    }
    vec![Check::at_most(G, "tv_within_rate_power", worst, 0.0, 1e-12, Oracle::Analytic)
        .with_detail("max over 50 chains, all windows and state pairs of TV - (1 - eps0 c0)^k")]
}

fn mat_row(row: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; m[0].len()];
    for (w, r) in row.iter().zip(m) {
        for (o, v) in out.iter_mut().zip(r) {
            *o += w * v;
        }
    }
    out
}

fn random_subkernel<R: Rng>(rng: &mut R, source: usize, target: usize, level: usize) -> SubKernel {
    let rows: Vec<Vec<f64>> = (0..source)
        .map(|_| {
            let mut row: Vec<f64> = (0..target)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() })
                .collect();
            if row.iter().all(|v| *v == 0.0) {
                row[rng.random_range(0..target)] = 1.0;
            }
            let total: f64 = row.iter().sum();
            let mass = rng.random_range(0.05..=1.0);
            row.iter().map(|v| v * mass / total).collect()
        })
        .collect();
    SubKernel::from_rows(
        FiniteStateSpace::indexed(&format!("E{level}:"), source).expect("nonempty"),
        FiniteStateSpace::indexed(&format!("E{}:", level - 1), target).expect("nonempty"),
        &rows,
    )
    .expect("rows are sub-stochastic")
}

/// `sup_A |p(A) - q(A)|` by enumerating every subset.
fn brute_force_tv(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len();
    (0u32..1 << n)
        .map(|mask| {
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| p[i] - q[i])
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

fn tv_pair_bound(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "tv_pair_bound";
    let seed = opts.group_seed(G);
    let mut order = f64::NEG_INFINITY;
    let mut mismatch: f64 = 0.0;
    for t in 0..200 {
        let mut rng = stream(seed, G, t);
        let n0 = rng.random_range(1..=6);
        let n1 = rng.random_range(1..=6);
        let n2 = rng.random_range(2..=6);
        let q1 = random_subkernel(&mut rng, n1, n0, 1);
        let q2 = random_subkernel(&mut rng, n2, n1, 2);
        let chain = ChainSequence::new(vec![q1, q2]).expect("adjacent spaces agree");
        let p = match chain.normalized_kernel(2) {
            Ok(p) => p,
            Err(e) => return vec![Check::error(G, "brute_force_tv_ordering", Oracle::Analytic, e)],
        };
        for x in 0..n2 {
            for y in x + 1..n2 {
                let c = chain.tv_bound_check(2, x, y).expect("states in range");
                let brute = brute_force_tv(p.row(x), p.row(y));
                order = order.max(brute - c.rhs1).max(c.rhs1 - c.rhs2);
                mismatch = mismatch.max((brute - c.lhs).abs());
            }
        }
    }
    vec![
        Check::at_most(G, "brute_force_tv_ordering", order, 0.0, 1e-12, Oracle::Analytic)
            .with_detail("max of (TV - rhs1, rhs1 - rhs2) over 200 kernel pairs"),
        Check::at_most(G, "library_tv_matches_brute_force", mismatch, 0.0, 1e-12, Oracle::Structural),
    ]
}

fn nu_independence(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "nu_independence";
    let seed = opts.group_seed(G);
    let mut worst = f64::NEG_INFINITY;
    let mut constant_exact = true;
    for c in 0..10 {
        let chain = match seeded_chain(seed, G, c, CHAIN_LEVELS) {
            Ok(ch) => ch,
            Err(e) => return vec![Check::error(G, "extremal_entry_laws", Oracle::Analytic, e)],
        };
        let m0 = chain.space(0).expect("level 0").size();
        let mut rng = stream(seed, "nu_independence:f", c);
        let f: Vec<f64> = (0..m0).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let f_norm = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let rate = chain.certificate().expect("floors hold").rate;
        for k in 1..=chain.len() {
            let t = chain.tk_apply(k, &f).expect("live chain");
            let (lo, hi) = argmin_max(&t);
            let space = chain.space(k).expect("level k").clone();
            let r_hi = chain.ergodic_ratio(k, &f, &MeasureVec::point_mass(space.clone(), hi));
            let r_lo = chain.ergodic_ratio(k, &f, &MeasureVec::point_mass(space, lo));
            match (r_hi, r_lo) {
                (Ok(a), Ok(b)) => {
                    worst = worst.max((a - b).abs() - 2.0 * rate.powi(k as i32 - 1) * f_norm);
                }
                (Err(e), _) | (_, Err(e)) => {
                    return vec![Check::error(G, "extremal_entry_laws", Oracle::Analytic, e)]
                }
            }
        }
        let ones = vec![1.0; m0];
        constant_exact &= chain.ergodic_limit(&ones, 1e-12).is_ok_and(|l| l.value == 1.0);
    }
    vec![
        Check::at_most(G, "extremal_entry_laws", worst, 0.0, 1e-12, Oracle::Analytic)
            .with_detail("max over chains and k <= 20 of |ratio gap| - 2 (1 - eps0 c0)^(k-1) |f|"),
        Check::holds(G, "constant_limit_is_one", constant_exact, Oracle::Structural),
    ]
}

fn argmin_max(v: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[lo] {
            lo = i;
        }
        if *x > v[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

/// Re-runs the kernel checks and compares their serialized form.
fn kernel_determinism(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "determinism";
    let run = || {
        let checks: Vec<Check> = [contraction_law(opts), tv_pair_bound(opts), nu_independence(opts)].concat();
        serde_json::to_string(&checks).expect("checks serialize")
    };
    vec![Check::holds(G, "kernel_checks_byte_identical", run() == run(), Oracle::Structural)]
}

// ---------------------------------------------------------------- wedge

/// Reflection vector at angle `ζ_i` from the inward normal of `face`.
fn reflection_from_angle(zeta: f64, face: Face, angle: f64) -> Vec2 {
    let (n, r) = match face {
        Face::Lower => ([0.0, 1.0], [1.0, 0.0]),
        Face::Upper => ([zeta.sin(), -zeta.cos()], [zeta.cos(), zeta.sin()]),
    };
    vec2::sub(vec2::scale(n, angle.cos()), vec2::scale(r, angle.sin()))
}

/// Twenty `(ζ, ζ₁, ζ₂)` with `α*` spread over `[-0.6, 0.9]`.
pub fn alpha_table() -> Vec<(f64, f64, f64)> {
    let openings = [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 0.75 * PI, 5.0 * PI / 6.0];
    let angle_pairs = [(0.3, 0.1), (-0.2, 0.1), (0.5, -0.5), (-0.25, -0.15)];
    let mut out = Vec::with_capacity(20);
    for &zeta in &openings {
        for &(a, b) in &angle_pairs {
            out.push((zeta, a * PI / 2.0, b * PI / 2.0));
        }
    }
    out
}

fn cone_analytics(_opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "cone_analytics";
    let mut alpha_err: f64 = 0.0;
    let mut flux: f64 = 0.0;
    for (zeta, z1, z2) in alpha_table() {
        let g1 = reflection_from_angle(zeta, Face::Lower, z1);
        let g2 = reflection_from_angle(zeta, Face::Upper, z2);
        let spec = match WedgeSpec::new(zeta, g1, g2) {
            Ok(s) => s,
            Err(e) => return vec![Check::error(G, "alpha_table", Oracle::Analytic, e)],
        };
        alpha_err = alpha_err.max((spec.alpha_star() - (z1 + z2) / zeta).abs());
        let cone = ConeFunctionSet::new(&spec);
        for i in 0..=24 {
            let r = 10f64.powf(-3.0 + 0.25 * i as f64);
            for face in [Face::Lower, Face::Upper] {
                for kind in [ConeField::Harmonic, ConeField::Gauge] {
                    flux = flux.max(boundary_flux(&spec, &cone.field(kind), r, face).abs());
                }
            }
        }
    }

    let hs = [1e-2, 5e-3, 2.5e-3];
    let mut order = f64::INFINITY;
    for spec in [wedge_alpha_negative(), wedge_alpha_zero(), wedge_alpha_positive()] {
        let cone = ConeFunctionSet::new(&spec);
        let psi = cone.field(ConeField::Harmonic);
        let points: Vec<Vec2> = [0.5, 1.0, 2.0]
            .iter()
            .flat_map(|&r| [1.0 / 3.0, 0.5, 2.0 / 3.0].map(|t| vec2::polar(r, t * spec.zeta())))
            .collect();
        let mut errs = Vec::with_capacity(hs.len());
        for &h in &hs {
            let mut e: f64 = 0.0;
            for &p in &points {
                match laplacian_fd(&psi, p, h) {
                    Ok(v) => e = e.max(v.abs()),
                    Err(err) => return vec![Check::error(G, "laplacian_order", Oracle::Analytic, err)],
                }
            }
            errs.push(e);
        }
        order = order.min(richardson_order(&hs, &errs));
    }

    vec![
        Check::at_most(G, "alpha_table", alpha_err, 0.0, 1e-12, Oracle::Analytic)
            .with_detail("max |alpha* - (zeta1 + zeta2)/zeta| over 20 wedges"),
        Check::at_least(G, "laplacian_order", order, 1.9, 0.0, Oracle::Analytic)
            .with_detail("least-squares order of the 5-point Laplacian of Psi, h = 1e-2, 5e-3, 2.5e-3"),
        Check::at_most(G, "oblique_flux", flux, 0.0, 1e-10, Oracle::Analytic)
            .with_detail("max |g.grad Psi|, |g.grad Phi| on both faces, r in [1e-3, 1e3]"),
    ]
}

fn aux_signs(_opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "aux_signs";
    let mut lap_violation = f64::NEG_INFINITY;
    let mut flux_violation = f64::NEG_INFINITY;
    for spec in [wedge_alpha_negative(), wedge_alpha_zero(), wedge_alpha_positive()] {
        let aux = match select_delta_star(&spec).and_then(|d| AuxFunctionSet::new(&spec, d)) {
            Ok(a) => a,
            Err(e) => return vec![Check::error(G, "laplacian_signs", Oracle::Analytic, e)],
        };
        // Sign s such that s·(value) ≤ 0 is the required inequality.
        let fields: &[(AuxField, f64)] = match aux.kind() {
            AuxKind::Pair => &[(AuxField::V1, -1.0), (AuxField::V2, 1.0)],
            AuxKind::Log | AuxKind::LogLog => &[(AuxField::V, 1.0)],
        };
        let d = aux.delta_star();
        let zeta = spec.zeta();
        for &(field, sign) in fields {
            let f = aux.field(field).expect("field exists in this regime");
            for i in 0..100 {
                let r = 0.99 * d * 10f64.powf(-4.0 * i as f64 / 99.0);
                for j in 0..100 {
                    let p = vec2::polar(r, zeta * (j as f64 + 0.5) / 100.0);
                    let h = (1e-3 * r).min(spec.interior_margin(p) / 3.0);
                    match laplacian_fd(&f, p, h) {
                        Ok(v) => lap_violation = lap_violation.max(sign * 0.5 * v),
                        Err(e) => return vec![Check::error(G, "laplacian_signs", Oracle::Analytic, e)],
                    }
                }
                let rb = d * 10f64.powf(-4.0 * i as f64 / 99.0);
                for face in [Face::Lower, Face::Upper] {
                    flux_violation = flux_violation.max(sign * boundary_flux(&spec, &f, rb, face));
                }
            }
        }
    }
    vec![
        Check::at_most(G, "laplacian_signs", lap_violation, 0.0, 1e-8, Oracle::Analytic)
            .with_detail("worst wrong-signed FD value of (1/2) Laplacian of V, V1, V2 on 1e4-point grids"),
        Check::at_most(G, "flux_signs", flux_violation, 0.0, 0.0, Oracle::Analytic)
            .with_detail("worst wrong-signed g.grad V, V1, V2 on both faces"),
    ]
}

fn alpha_monotonicity(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "alpha_monotonicity";
    let seed = opts.group_seed(G);
    let eps = [0.05, 0.1, 0.2];
    let mut min_step = f64::INFINITY;
    for i in 0..10 {
        let mut rng = stream(seed, G, i);
        let zeta = rng.random_range(0.3..3.0);
        let spec = match WedgeSpec::from_angles(zeta, rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2)) {
            Ok(s) => s,
            Err(e) => return vec![Check::error(G, "strictly_increasing", Oracle::Analytic, e)],
        };
        let alphas: Result<Vec<f64>, _> = eps.iter().map(|&e| spec.perturbed(e).map(|s| s.alpha_star())).collect();
        match alphas {
            Ok(a) => {
                for w in a.windows(2) {
                    min_step = min_step.min(w[1] - w[0]);
                }
            }
            Err(e) => return vec![Check::error(G, "strictly_increasing", Oracle::Analytic, e)],
        }
    }
    vec![Check::above(G, "strictly_increasing", min_step, 0.0, Oracle::Analytic)
        .with_detail("smallest increase of alpha* between eps = 0.05, 0.1, 0.2 over 10 wedges")]
}

// ---------------------------------------------------------------- simulation

fn exact(spec: &WedgeSpec) -> Domain {
    Domain::new(&DomainSpec::exact(spec)).expect("exact wedges are valid domains")
}

fn sim_error(group: &'static str, name: &'static str) -> impl Fn(SimError) -> Vec<Check> {
    move |e| vec![Check::error(group, name, Oracle::Statistical, e)]
}

pub const SURVIVAL_ETAS: [f64; 3] = [1e-2, 3e-3, 1e-3];

/// Survival from `0.75 δ*` on the bisector of the `α* = -1/2` wedge at
/// `η ∈ {1e-2, 3e-3, 1e-3}·δ*`.
pub fn survival_estimates(opts: &SuiteOptions, workers: usize) -> Result<Vec<crate::sim::SurvivalEstimate>, SimError> {
    let spec = wedge_alpha_negative();
    let delta = select_delta_star(&spec)?;
    let domain = exact(&spec);
    let x = vec2::polar(0.75 * delta, 0.5 * spec.zeta());
    let params = SimParams::new(1e-3, opts.group_seed("survival")).with_workers(workers);
    let etas: Vec<f64> = SURVIVAL_ETAS.iter().map(|e| e * delta).collect();
    survival_sweep(&domain, &Coefficients::brownian(), x, delta, &etas, &params, opts.samples(10_000))
}

fn survival(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "survival";
    let est = match survival_estimates(opts, opts.workers) {
        Ok(e) => e,
        Err(e) => return sim_error(G, "survival_at_smallest_eta")(e),
    };
    let drop = est.windows(2).map(|w| w[0].p_hat - w[1].p_hat).fold(f64::NEG_INFINITY, f64::max);
    let last = est.last().expect("three radii");
    let timeouts: u64 = est[0].timeouts;
    let summary = est
        .iter()
        .zip(SURVIVAL_ETAS)
        .map(|(e, rel)| format!("eta/delta={rel:.0e}: p={:.4} se={:.4}", e.p_hat, e.stderr))
        .collect::<Vec<_>>()
        .join("; ");
    let other = if opts.workers == 4 { 1 } else { 4 };
    let same = survival_estimates(opts, other).is_ok_and(|e| e == est);
    vec![
        Check::at_most(G, "nondecreasing_as_eta_shrinks", drop, 0.0, 0.0, Oracle::Statistical).with_detail(summary),
        Check::at_least(G, "survival_at_smallest_eta", last.p_hat, 0.99, 0.0, Oracle::Statistical)
            .with_detail(format!("N = {}, timeouts = {timeouts}", last.n)),
        Check::holds("determinism", "survival_worker_invariant", same, Oracle::Structural)
            .with_detail(format!("workers {} and {other}", opts.workers)),
    ]
}

fn hitting_ratio(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "hitting_ratio";
    let spec = wedge_alpha_positive();
    let run = || -> Result<(f64, f64, f64, String), SimError> {
        let delta = select_delta_star(&spec)?;
        let c0 = hitting_ratio_constant(&spec, delta, HittingGrid::default())?.value;
        let domain = exact(&spec);
        let params = SimParams::new(1e-3, opts.group_seed(G)).with_workers(opts.workers);
        let zeta = spec.zeta();
        let pairs = [(0.0, 1.0), (0.0, 0.5), (0.25, 0.75), (0.5, 1.0)];
        let mut worst = f64::INFINITY;
        let mut min_ratio = f64::INFINITY;
        let mut rows = Vec::new();
        for radius in [0.5 * delta, 0.25 * delta] {
            for (a, b) in pairs {
                let x = vec2::polar(radius, a * zeta);
                let y = vec2::polar(radius, b * zeta);
                let n = opts.samples(10_000);
                let px = survival_probability(&domain, &Coefficients::brownian(), x, delta, &params, n)?;
                let py = survival_probability(&domain, &Coefficients::brownian(), y, delta, &params, n)?;
                let ratio = (px.p_hat / py.p_hat).min(py.p_hat / px.p_hat);
                let se = ratio * ((px.stderr / px.p_hat).powi(2) + (py.stderr / py.p_hat).powi(2)).sqrt();
                worst = worst.min(ratio + 3.0 * se);
                min_ratio = min_ratio.min(ratio);
                rows.push(format!("r={radius:.3} ({a},{b})zeta: {:.4}/{:.4}", px.p_hat, py.p_hat));
            }
        }
        Ok((worst, c0, min_ratio, rows.join("; ")))
    };
    match run() {
        Ok((worst, c0, min_ratio, rows)) => vec![Check::at_least(G, "ratio_above_constant", worst, c0, 0.0, Oracle::Statistical)
            .with_detail(format!("min ratio {min_ratio:.4}; measured is min of ratio + 3 se; {rows}"))],
        Err(e) => sim_error(G, "ratio_above_constant")(e),
    }
}

fn exit_time_scaling(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "exit_time_scaling";
    let spec = wedge_alpha_positive();
    let run = || -> Result<(f64, String), SimError> {
        let delta = select_delta_star(&spec)?;
        let domain = exact(&spec);
        let params = SimParams::new(1e-3, opts.group_seed(G)).with_workers(opts.workers);
        let n = opts.samples(10_000);
        let big = mean_exit_time(&domain, &Coefficients::brownian(), delta, &params, n)?;
        let small = mean_exit_time(&domain, &Coefficients::brownian(), 0.25 * delta, &params, n)?;
        Ok((
            big.mean / small.mean,
            format!(
                "t(delta) = {:.5} +- {:.5}, t(delta/4) = {:.6} +- {:.6}",
                big.mean, big.stderr, small.mean, small.stderr
            ),
        ))
    };
    match run() {
        Ok((ratio, detail)) => vec![Check::at_most(G, "ratio_near_sixteen", (ratio - 16.0).abs(), 3.2, 0.0, Oracle::Statistical)
            .with_detail(format!("ratio {ratio:.4}; {detail}"))],
        Err(e) => sim_error(G, "ratio_near_sixteen")(e),
    }
}

/// Constant plus rotational drift used by the scaling-limit check.
pub fn scaling_drift() -> Coefficients {
    let mut c = Coefficients::brownian();
    c.b0 = [1.0, 0.0];
    c.b_linear = [[0.0, -0.5], [0.5, 0.0]];
    c.lipschitz_bound = 0.5;
    c
}

fn scaling_limit(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "scaling_limit";
    let spec = wedge_alpha_positive();
    let run = || -> Result<(Vec<f64>, f64), SimError> {
        let delta = select_delta_star(&spec)?;
        let domain = exact(&spec);
        let ladder = ShellLadder::new(delta, 4, 16)?;
        let params = SimParams::new(1e-3, opts.group_seed(G)).with_workers(opts.workers);
        let x_bar = vec2::polar(delta, 0.5 * spec.zeta());
        let n = opts.samples(10_000);
        let reference = rescaled_exit_law(&domain, &Coefficients::brownian(), &ladder, 0, x_bar, "scaling:reference", &params, n)?;
        let drift = scaling_drift();
        let mut ks = Vec::new();
        let mut crit = f64::NAN;
        for level in 1..=3 {
            let law = rescaled_exit_law(&domain, &drift, &ladder, level, x_bar, "scaling:drift", &params, n)?;
            ks.push(ks_two_sample(&law.fractions, &reference.fractions));
            crit = ks_critical_1pct(law.fractions.len(), reference.fractions.len());
        }
        Ok((ks, crit))
    };
    match run() {
        Ok((ks, crit)) => {
            let rise = ks.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            let detail = format!("KS at n = 1, 2, 3: {:.4}, {:.4}, {:.4}", ks[0], ks[1], ks[2]);
            vec![
                Check::at_most(G, "shell3_ks_below_critical", ks[2], crit, 0.0, Oracle::Statistical).with_detail(detail.clone()),
                Check::at_most(G, "ks_nonincreasing", rise, 0.0, 0.0, Oracle::Statistical).with_detail(detail),
            ]
        }
        Err(e) => sim_error(G, "shell3_ks_below_critical")(e),
    }
}

fn basic_identity(opts: &SuiteOptions) -> Vec<Check> {
    const G: &str = "basic_identity";
    let spec = wedge_alpha_positive();
    let run = || -> Result<Vec<Check>, SimError> {
        let delta = select_delta_star(&spec)?;
        let domain = exact(&spec);
        let brownian = Coefficients::brownian();
        let seed = opts.group_seed(G);
        let m = 16;
        let ladder = ShellLadder::new(delta, 5, m)?;
        // One step size and absorption radius for every shell, so the direct
        // runs and the kernels describe the same discretized process.
        let params = SimParams::new(1e-3, seed)
            .with_step(StepRule::Absolute(1e-4 * delta * delta))
            .with_eta(EtaRule::Absolute(1e-3 * delta))
            .with_workers(opts.workers);
        let n = opts.samples(10_000);
        let inputs = IdentityInputs::collect(&domain, &brownian, &ladder, 0, 2, n, n, &params)?;
        let one = vec![1.0; m];
        let mut bin = vec![0.0; m];
        bin[0] = 1.0;
        let mut checks = Vec::new();
        let mut rhs_bin = Vec::new();
        for (label, f) in [("constant", &one), ("bin0", &bin)] {
            for k in 1..=2 {
                let r = inputs.check(k, f)?;
                if label == "bin0" {
                    rhs_bin.push((r.rhs, r.rhs_stderr));
                }
                checks.push(
                    Check::at_most(G, &format!("{label}_k{k}"), (r.lhs - r.rhs).abs(), 3.0 * r.combined_stderr, 0.0, Oracle::Statistical)
                        .with_detail(format!(
                            "lhs {:.5} +- {:.5}, rhs {:.5} +- {:.5}",
                            r.lhs, r.lhs_stderr, r.rhs, r.rhs_stderr
                        )),
                );
            }
        }
        let ((r1, s1), (r2, s2)) = (rhs_bin[0], rhs_bin[1]);
        checks.push(Check::at_most(G, "bin0_k1_vs_k2", (r1 - r2).abs(), 3.0 * s1.hypot(s2), 0.0, Oracle::Statistical));

        let rel = SimParams::new(1e-3, seed).with_workers(opts.workers);
        let kernels = estimate_kernel_chain(&domain, &brownian, &ladder, 1, 5, opts.samples(1_000), &rel)?;
        let t = contraction_transfer(&kernels, &bin, seed)?;
        checks.push(
            Check::at_most(G, "contraction_transfer", t.measured_rate, t.bound, 3.0 * t.bound_stderr, Oracle::Statistical)
                .with_detail(format!(
                    "eps0 {:.4}, c0 {:.4}, bound sigma {:.4}, spreads {:?}",
                    t.eps0_hat, t.c0_hat, t.bound_stderr, t.spreads
                )),
        );
        Ok(checks)
    };
    run().unwrap_or_else(sim_error(G, "constant_k1"))
}

/// Validates a kernel file and runs the contraction checks on it.
pub fn chain_checks(chain: &ChainSequence) -> Vec<Check> {
    const G: &str = "kernel_file";
    let cert = match chain.certificate() {
        Ok(c) => c,
        Err(e) => return vec![Check::error(G, "certificate", Oracle::Analytic, e)],
    };
    let mut checks = vec![
        Check::above(G, "c0_positive", cert.c0, 0.0, Oracle::Analytic),
        Check::above(G, "eps0_positive", cert.eps0, 0.0, Oracle::Analytic),
    ];
    if let Ok(p) = chain.normalized_kernels() {
        let mut worst = f64::NEG_INFINITY;
        let mut m = dense(&p[0]);
        for k in 1..=p.len() {
            if k > 1 {
                m = p[k - 1].rows().map(|row| mat_row(row, &m)).collect();
            }
            worst = worst.max(max_row_tv(&m) - cert.at(k));
        }
        checks.push(Check::at_most(G, "tv_within_rate_power", worst, 0.0, 1e-12, Oracle::Analytic));
    }
    checks
}
