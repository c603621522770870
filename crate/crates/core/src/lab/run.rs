use std::path::Path;

use serde::Serialize;

use super::config::{load_coefficients, load_domain, load_wedge};
use super::{
    chain_checks, emit_tables, run_suite, Artifact, Check, ConfigError, CsvTable, ExperimentConfig,
    LabError, Manifest, Oracle, Scenario, Suite, SuiteOptions, VerificationReport,
};
use crate::kernel::interchange::ChainDocument;
use crate::kernel::{random_chain, ChainSequence, RandomChainSpec};
use crate::rng::sub_seed;
use crate::sim::{
    estimate_kernel_chain, kernel_document, mean_and_stderr, outcome_csv, path_csv, real, replicate_outcomes,
    simulate_path, wilson_interval, Fingerprint, Terminal, WILSON_Z,
};
use crate::wedge::{analytics_report, field_table};

/// The report of a finished scenario and the manifest of what it wrote.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub report: VerificationReport,
    pub manifest: Manifest,
}

impl RunOutcome {
    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            0
        } else {
            1
        }
    }
}

/// Executes `scenario` and writes its artifacts, `report.json` and
/// `manifest.json` under `out_dir`.
pub fn run(cfg: &ExperimentConfig, scenario: Scenario, out_dir: &Path) -> Result<RunOutcome, LabError> {
    cfg.check_scenario(scenario)?;
    let (checks, mut artifacts) = match scenario {
        Scenario::ErgodicSynthetic => ergodic(cfg)?,
        Scenario::WedgeAnalyze => wedge(cfg)?,
        Scenario::Simulate => simulate(cfg)?,
        Scenario::EstimateKernels => kernels(cfg)?,
        Scenario::Verify => verify(cfg),
    };
    let report = VerificationReport::new(scenario.name(), cfg.seed, checks);
    artifacts.push(Artifact::text("report.json", report.to_json()));
    let manifest = emit_tables(out_dir, &artifacts)?;
    Ok(RunOutcome { report, manifest })
}

type Produced = (Vec<Check>, Vec<Artifact>);

fn fingerprint(cfg: &ExperimentConfig, scenario: Scenario) -> Fingerprint {
    Fingerprint::new(scenario.name(), cfg.seed).with_hash("config", cfg)
}

fn osc(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    hi - lo
}

#[derive(Serialize)]
struct ErgodicSummary {
    levels: usize,
    c0: f64,
    eps0: f64,
    rate: f64,
    limit: Option<f64>,
    k_used: Option<usize>,
    certified_error: Option<f64>,
    lower: f64,
    upper: f64,
}

fn ergodic(cfg: &ExperimentConfig) -> Result<Produced, LabError> {
    const G: &str = "ergodic";
    let section = cfg.ergodic.clone().unwrap_or_default();
    let chain = match &section.chain {
        Some(r) => r.load_chain("ergodic.chain", &cfg.base_dir)?,
        None => {
            let r = &section.random;
            let spec = RandomChainSpec::new(r.sizes.clone(), r.c0_floor, r.eps0_floor, sub_seed(cfg.seed, "ergodic_synthetic"));
            random_chain(&spec).map_err(|e| ConfigError::new("ergodic.random", e))?
        }
    };
    let m0 = chain.space(0)?.size();
    let f = match &section.f {
        Some(f) if f.len() != m0 => {
            return Err(ConfigError::new("ergodic.f", format!("expected {m0} values, found {}", f.len())).into())
        }
        Some(f) => f.clone(),
        None => (0..m0).map(|i| i as f64 / (m0.max(2) - 1) as f64).collect(),
    };
    let fp = fingerprint(cfg, Scenario::ErgodicSynthetic);
    let cert = chain.certificate()?;
    let mut table = CsvTable::new(&["k", "max_spread", "bound"]).with_header(fp.header_line());
    let mut worst = f64::NEG_INFINITY;
    let osc_f = osc(&f);
    table.push(vec![0usize.into(), osc_f.into(), osc_f.into()]);
    for k in 1..=chain.len() {
        let spread = osc(&chain.tk_apply(k, &f)?);
        let bound = cert.at(k) * osc_f;
        worst = worst.max(spread - bound);
        table.push(vec![k.into(), spread.into(), bound.into()]);
    }
    let limit = chain.ergodic_limit(&f, section.tol);
    let t = chain.tk_apply(chain.len(), &f)?;
    let summary = ErgodicSummary {
        levels: chain.len(),
        c0: cert.c0,
        eps0: cert.eps0,
        rate: cert.rate,
        limit: limit.as_ref().ok().map(|l| l.value),
        k_used: limit.as_ref().ok().map(|l| l.k_used),
        certified_error: limit.as_ref().ok().map(|l| l.certified_error),
        lower: t.iter().copied().fold(f64::INFINITY, f64::min),
        upper: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    let mut doc = ChainDocument::from_chain(&chain);
    doc.fingerprint = Some(fp.summary());
    let checks = vec![
        Check::above(G, "c0_positive", cert.c0, 0.0, Oracle::Analytic),
        Check::above(G, "eps0_positive", cert.eps0, 0.0, Oracle::Analytic),
        Check::at_most(G, "spread_within_bound", worst, 0.0, 1e-12, Oracle::Analytic),
        match &limit {
            Ok(l) => Check::at_most(G, "limit_converged", l.upper - l.lower, section.tol, 0.0, Oracle::Analytic),
            Err(e) => Check::error(G, "limit_converged", Oracle::Analytic, e),
        },
    ];
    let artifacts = vec![
        Artifact::text("chain.json", doc.to_json() + "\n"),
        Artifact::text("contraction.csv", table.render()),
        Artifact::json("ergodic.json", &summary),
    ];
    Ok((checks, artifacts))
}

fn wedge(cfg: &ExperimentConfig) -> Result<Produced, LabError> {
    const G: &str = "wedge";
    let section = cfg.wedge.as_ref().ok_or_else(|| ExperimentConfig::missing(Scenario::WedgeAnalyze))?;
    let spec = load_wedge(&section.spec, "wedge.spec", &cfg.base_dir)?;
    let report = analytics_report(&spec, section.grid)?;
    let radii = section
        .radii
        .clone()
        .unwrap_or_else(|| (0..=12).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect());
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(ConfigError::new("wedge.radii", "radii must be positive").into());
    }
    let fp = fingerprint(cfg, Scenario::WedgeAnalyze);
    let mut table = CsvTable::new(&["r", "z", "Psi", "Phi", "V", "V1", "V2"]).with_header(fp.header_line());
    for row in field_table(&spec, &radii, section.n_angular) {
        table.push(vec![row.r.into(), row.z.into(), row.psi.into(), row.phi.into(), row.v.into(), row.v1.into(), row.v2.into()]);
    }
    let mut checks = vec![
        Check::holds(G, "condition_G3", report.condition_g3, Oracle::Analytic),
        Check::holds(G, "condition_G4", report.condition_g4, Oracle::Analytic),
    ];
    if report.alpha_star < 1.0 {
        checks.push(Check::holds(G, "delta_star_found", report.delta_star.is_some(), Oracle::Analytic));
    }
    Ok((checks, vec![Artifact::json("analytics.json", &report), Artifact::text("fields.csv", table.render())]))
}

#[derive(Serialize)]
struct SimulationSummary {
    replicates: u64,
    survived: u64,
    absorbed: u64,
    timeouts: u64,
    survival: f64,
    survival_wilson: (f64, f64),
    mean_exit_time: f64,
    mean_exit_time_stderr: f64,
    mean_pushes: f64,
    mean_restarts: f64,
}

fn simulate(cfg: &ExperimentConfig) -> Result<Produced, LabError> {
    const G: &str = "simulate";
    let s = cfg.simulate.as_ref().ok_or_else(|| ExperimentConfig::missing(Scenario::Simulate))?;
    let domain = load_domain(&s.domain, "simulate.domain", &cfg.base_dir)?;
    let coeffs = load_coefficients(s.coefficients.as_ref(), "simulate.coefficients", &cfg.base_dir)?;
    let params = cfg.params("simulate.params", &s.params)?;
    if s.replicates == 0 || s.bins == 0 {
        return Err(ConfigError::new("simulate.replicates", "replicates and bins must be positive").into());
    }
    let label = "simulate";
    let outcomes = replicate_outcomes(&domain, &coeffs, s.start, s.target, s.bins, s.restart, &params, s.replicates, label)
        .map_err(|e| ConfigError::new("simulate", e))?;
    let fp = fingerprint(cfg, Scenario::Simulate)
        .with_hash("domain", domain.spec())
        .with_hash("coefficients", &coeffs)
        .with("h", params.step_for(s.target))
        .with("eta", params.eta_for(s.target))
        .with("rho", params.rho_for(s.target));
    let mut paths = Vec::new();
    for i in 0..s.record_paths.min(s.replicates) {
        let mut rng = crate::rng::stream(params.seed, label, i);
        let (_, pts) = simulate_path(&domain, &coeffs, s.start, s.target, s.bins, s.restart, &params, &mut rng)?;
        paths.push((i, pts));
    }
    let survived = outcomes.iter().filter(|o| o.survived()).count() as u64;
    let timeouts = outcomes.iter().filter(|o| o.terminal == Terminal::Timeout).count() as u64;
    let absorbed = s.replicates - survived - timeouts;
    let times: Vec<f64> = outcomes.iter().filter(|o| o.survived()).map(|o| o.elapsed).collect();
    let (mean_t, se_t) = mean_and_stderr(&times);
    let n = s.replicates as f64;
    let summary = SimulationSummary {
        replicates: s.replicates,
        survived,
        absorbed,
        timeouts,
        survival: survived as f64 / (survived + absorbed).max(1) as f64,
        survival_wilson: wilson_interval(survived, survived + absorbed, WILSON_Z),
        mean_exit_time: mean_t,
        mean_exit_time_stderr: se_t,
        mean_pushes: outcomes.iter().map(|o| o.pushes).sum::<f64>() / n,
        mean_restarts: outcomes.iter().map(|o| o.restarts as f64).sum::<f64>() / n,
    };
    let infeasible: u64 = outcomes.iter().map(|o| o.infeasible).sum();
    let checks = vec![
        Check::at_most(G, "timeout_fraction", timeouts as f64 / n, 1e-3, 0.0, Oracle::Structural),
        Check::at_most(G, "infeasible_points", infeasible as f64, 0.0, 0.0, Oracle::Structural),
    ];
    let mut artifacts = vec![Artifact::text("outcomes.csv", outcome_csv(&fp, &outcomes)), Artifact::json("summary.json", &summary)];
    if !paths.is_empty() {
        artifacts.push(Artifact::text("paths.csv", path_csv(&fp, &paths)));
    }
    Ok((checks, artifacts))
}

fn kernels(cfg: &ExperimentConfig) -> Result<Produced, LabError> {
    const G: &str = "kernels";
    let s = cfg.kernels.as_ref().ok_or_else(|| ExperimentConfig::missing(Scenario::EstimateKernels))?;
    let domain = load_domain(&s.domain, "kernels.domain", &cfg.base_dir)?;
    let coeffs = load_coefficients(s.coefficients.as_ref(), "kernels.coefficients", &cfg.base_dir)?;
    let params = cfg.params("kernels.params", &s.params)?;
    s.ladder.validate().map_err(|e| ConfigError::new("kernels.ladder", e))?;
    if s.first == 0 || s.first > s.last || s.last > s.ladder.n_max {
        return Err(ConfigError::new("kernels.last", format!("need 1 <= first <= last <= n_max = {}", s.ladder.n_max)).into());
    }
    if s.n_per_bin == 0 {
        return Err(ConfigError::new("kernels.n_per_bin", "must be positive").into());
    }
    let estimated = estimate_kernel_chain(&domain, &coeffs, &s.ladder, s.first, s.last, s.n_per_bin, &params)?;
    let fp = fingerprint(cfg, Scenario::EstimateKernels)
        .with_hash("domain", domain.spec())
        .with_hash("coefficients", &coeffs)
        .with("h", format!("{:?}", params.h))
        .with("eta", format!("{:?}", params.eta));
    let doc = kernel_document(&fp, &estimated);
    let json = doc.to_json();
    let round_trip = ChainDocument::from_json(&json)
        .ok()
        .and_then(|d| d.to_chain().ok())
        .is_some_and(|c| c.kernels().iter().zip(&estimated).all(|(a, b)| a == &b.kernel));
    let chain = ChainSequence::new(estimated.iter().map(|q| q.kernel.clone()).collect())?;
    let mut table = CsvTable::new(&["level", "min_survival", "max_survival", "min_overlap", "c0", "timeouts"])
        .with_header(fp.header_line());
    let mut timeouts = 0;
    let mut total = 0;
    for (i, q) in estimated.iter().enumerate() {
        let s = q.survival();
        let c0: Option<f64> = chain.condition_c0(i + 1).ok();
        table.push(vec![
            q.level.into(),
            s.iter().copied().fold(f64::INFINITY, f64::min).into(),
            s.iter().copied().fold(f64::NEG_INFINITY, f64::max).into(),
            q.kernel.min_overlap().0.into(),
            c0.into(),
            q.timeouts.into(),
        ]);
        timeouts += q.timeouts;
        total += q.trials.iter().sum::<u64>() + q.timeouts;
    }
    let checks = vec![
        Check::holds(G, "interchange_round_trip", round_trip, Oracle::Structural),
        Check::at_most(G, "timeout_fraction", timeouts as f64 / total.max(1) as f64, 1e-3, 0.0, Oracle::Structural),
    ];
    let artifacts = vec![
        Artifact::text("kernels.json", json + "\n"),
        Artifact::text("kernel_summary.csv", table.render()),
    ];
    Ok((checks, artifacts))
}

fn verify(cfg: &ExperimentConfig) -> Produced {
    let section = cfg.verify.clone().unwrap_or_default();
    let opts = SuiteOptions {
        seed: cfg.seed,
        workers: cfg.workers,
        scale: section.scale,
    };
    let mut checks = run_suite(section.suite.unwrap_or(Suite::All), &opts);
    if let Some(r) = &section.chain {
        match r.load_chain("verify.chain", &cfg.base_dir) {
            Ok(chain) => checks.extend(chain_checks(&chain)),
            Err(e) => checks.push(Check::error("kernel_file", "valid_kernel_file", Oracle::Structural, e)),
        }
    }
    let mut csv = String::from("group,name,status,measured,bound,tolerance\n");
    for c in &checks {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.group,
            c.name,
            c.status.as_str(),
            real(c.measured),
            real(c.bound),
            real(c.tolerance)
        ));
    }
    (checks, vec![Artifact::text("checks.csv", csv)])
}
