//! Runs every verification suite at full scale and prints one line per
//! acceptance criterion.

use std::time::Duration;

use conelab::lab::{run_suite, Check, Status, Suite, SuiteOptions};

const SEED: u64 = 2024;

struct Criterion {
    id: u32,
    groups: &'static [&'static str],
    tolerance: &'static str,
    /// `None` where no runtime bound is stated.
    budget: Option<Duration>,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, groups: &["contraction_law"], tolerance: "TV <= (1 - eps0 c0)^k + 1e-12", budget: secs(10) },
    Criterion { id: 2, groups: &["tv_pair_bound"], tolerance: "lhs <= rhs1 <= rhs2 within 1e-12", budget: secs(5) },
    Criterion { id: 3, groups: &["nu_independence"], tolerance: "gap <= 2 (1 - eps0 c0)^(k-1) |f|, C(1) = 1", budget: secs(5) },
    Criterion { id: 4, groups: &["cone_analytics"], tolerance: "1e-12 alpha, order >= 1.9, flux <= 1e-10", budget: secs(10) },
    Criterion { id: 5, groups: &["aux_signs"], tolerance: "Laplacian signs within 1e-8, strict flux signs", budget: secs(30) },
    Criterion { id: 6, groups: &["alpha_monotonicity"], tolerance: "strictly increasing", budget: secs(1) },
    Criterion { id: 7, groups: &["survival"], tolerance: "nondecreasing, p >= 0.99", budget: secs(600) },
    Criterion { id: 8, groups: &["hitting_ratio"], tolerance: "ratio >= c0 - 3 se", budget: secs(600) },
    Criterion { id: 9, groups: &["exit_time_scaling"], tolerance: "ratio in [12.8, 19.2]", budget: secs(300) },
    Criterion { id: 10, groups: &["scaling_limit"], tolerance: "KS below 1% critical, nonincreasing", budget: secs(900) },
    Criterion { id: 11, groups: &["basic_identity"], tolerance: "|lhs - rhs| <= 3 se, rate <= 1 - eps0 c0 + 3 sigma", budget: secs(1200) },
    Criterion { id: 12, groups: &["determinism"], tolerance: "byte-identical, worker-invariant", budget: None },
];

fn group_runtime(checks: &[&Check]) -> Duration {
    // Checks of one group share its wall time; sum distinct groups.
    let mut seen: Vec<&str> = Vec::new();
    let mut total = Duration::ZERO;
    for c in checks {
        if !seen.contains(&c.group.as_str()) {
            seen.push(&c.group);
            total += c.runtime;
        }
    }
    total
}

fn main() {
    let checks = run_suite(Suite::All, &SuiteOptions::new(SEED));
    let mut failed = Vec::new();
    println!();
    for crit in &CRITERIA {
        let mine: Vec<&Check> = checks.iter().filter(|c| crit.groups.contains(&c.group.as_str())).collect();
        let runtime = group_runtime(&mine);
        let checks_ok = !mine.is_empty() && mine.iter().all(|c| c.status == Status::Pass);
        let ok = checks_ok && crit.budget.is_none_or(|b| runtime <= b);
        let passed = mine.iter().filter(|c| c.status == Status::Pass).count();
        println!(
            "{} criterion {:>2} [{}]: {}/{} checks at {}; runtime {:.2?} (budget {})",
            if ok { "PASS" } else { "FAIL" },
            crit.id,
            crit.groups.join(","),
            passed,
            mine.len(),
            crit.tolerance,
            runtime,
            crit.budget.map_or("none stated".to_string(), |b| format!("{b:?}")),
        );
        for c in &mine {
            println!(
                "       {:<7} {}: measured {:.6e}, bound {:.6e}, tol {:.1e}",
                format!("{:?}", c.status).to_lowercase(),
                c.name,
                c.measured,
                c.bound,
                c.tolerance
            );
        }
        if !ok {
            failed.push(crit.id);
        }
    }
    let unmapped: Vec<&Check> = checks
        .iter()
        .filter(|c| !CRITERIA.iter().any(|k| k.groups.contains(&c.group.as_str())))
        .collect();
    assert!(unmapped.is_empty(), "checks without a criterion: {:?}", unmapped.iter().map(|c| &c.name).collect::<Vec<_>>());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
