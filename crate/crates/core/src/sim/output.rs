use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EmpiricalKernel, PathOutcome, PathPoint, Terminal};
use crate::kernel::interchange::ChainDocument;

/// Provenance stamped on every emitted table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    /// Further `key=value` pairs, such as hashes of the domain and
    /// coefficients or the resolved `h`, `η` and `ρ`.
    pub fields: BTreeMap<String, String>,
}

impl Fingerprint {
    pub fn new(experiment: &str, seed: u64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            seed,
            fields: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.insert(key.to_string(), value.to_string());
        self
    }

    /// Adds `key=<sha256 of the JSON form of value>`.
    pub fn with_hash<T: Serialize>(self, key: &str, value: &T) -> Self {
        let json = serde_json::to_string(value).expect("fingerprinted values serialize");
        self.with(key, sha256_hex(json.as_bytes()))
    }

    /// `conelab <version> experiment=<name> seed=<seed> key=value …`
    pub fn summary(&self) -> String {
        let mut s = format!(
            "conelab {} experiment={} seed={}",
            self.version, self.experiment, self.seed
        );
        for (k, v) in &self.fields {
            let _ = write!(s, " {k}={v}");
        }
        s
    }

    pub fn header_line(&self) -> String {
        format!("# {}", self.summary())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// A real with 17 significant digits, enough to round-trip any `f64`.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Path dump with columns `replicate,step,t,x,y,pushback`.
pub fn path_csv(fp: &Fingerprint, paths: &[(u64, Vec<PathPoint>)]) -> String {
    let mut out = fp.header_line();
    out.push_str("\nreplicate,step,t,x,y,pushback\n");
    for (rep, points) in paths {
        for p in points {
            let _ = writeln!(
                out,
                "{rep},{},{},{},{},{}",
                p.step,
                real(p.t),
                real(p.x),
                real(p.y),
                real(p.pushback)
            );
        }
    }
    out
}

/// One row per replicate, in replicate order.
pub fn outcome_csv(fp: &Fingerprint, outcomes: &[PathOutcome]) -> String {
    let mut out = fp.header_line();
    out.push_str(
        "\nreplicate,terminal_kind,bin,elapsed,pushes,steps,restarts,min_radius,end_x,end_y,arc_fraction\n",
    );
    for (i, o) in outcomes.iter().enumerate() {
        let (kind, bin) = match o.terminal {
            Terminal::ShellHit { bin } => ("shell_hit", bin.to_string()),
            Terminal::Absorbed => ("absorbed", String::new()),
            Terminal::Timeout => ("timeout", String::new()),
        };
        let _ = writeln!(
            out,
            "{i},{kind},{bin},{},{},{},{},{},{},{},{}",
            real(o.elapsed),
            real(o.pushes),
            o.steps,
            o.restarts,
            real(o.min_radius),
            real(o.end_point[0]),
            real(o.end_point[1]),
            real(o.arc_fraction)
        );
    }
    out
}

/// Interchange document for consecutive empirical kernels, with counts and
/// standard errors attached.
pub fn kernel_document(fp: &Fingerprint, kernels: &[EmpiricalKernel]) -> ChainDocument {
    let mut spaces = Vec::with_capacity(kernels.len() + 1);
    if let Some(first) = kernels.first() {
        spaces.push(first.kernel.target().labels().to_vec());
    }
    let mut records = Vec::with_capacity(kernels.len());
    for (i, q) in kernels.iter().enumerate() {
        spaces.push(q.kernel.source().labels().to_vec());
        records.push(q.to_record(i + 1, i));
    }
    ChainDocument {
        fingerprint: Some(fp.summary()),
        spaces,
        kernels: records,
    }
}
