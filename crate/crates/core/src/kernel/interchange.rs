//! JSON interchange for kernel chains.
//!
//! ```json
//! {
//!   "spaces": [["a", "b"], ["c", "d", "e"]],
//!   "kernels": [{ "source_index": 1, "target_index": 0, "rows": [[0.5, 0.1], …] }]
//! }
//! ```
//!
//! Kernels are listed as `Q_1, Q_2, …`. Empirical kernels may carry
//! per-entry `counts` and `stderr` sidecars and a top-level `fingerprint`.
//! Reals are written in shortest round-trip form, so a write/read cycle is
//! bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::SubKernel;
use super::{ChainSequence, FiniteStateSpace, KernelError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub source_index: usize,
    pub target_index: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    pub spaces: Vec<Vec<String>>,
    pub kernels: Vec<KernelRecord>,
}

/// A validation failure located by a JSON path such as `kernels[1].rows[0][2]`.
#[derive(Debug, thiserror::Error)]
pub enum InterchangeError {
    #[error("malformed kernel document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: KernelError,
    },
    #[error("{path}: {message}")]
    Structure { path: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ChainDocument {
    pub fn from_chain(chain: &ChainSequence) -> Self {
        let mut spaces = vec![chain.kernels()[0].target().labels().to_vec()];
        let mut kernels = Vec::with_capacity(chain.len());
        for (i, q) in chain.kernels().iter().enumerate() {
            spaces.push(q.source().labels().to_vec());
            kernels.push(KernelRecord {
                source_index: i + 1,
                target_index: i,
                rows: q.rows().map(<[f64]>::to_vec).collect(),
                counts: None,
                stderr: None,
            });
        }
        Self {
            fingerprint: None,
            spaces,
            kernels,
        }
    }

    /// Validates every invariant and builds the chain, reporting the first
    /// violation with its location.
    pub fn to_chain(&self) -> Result<ChainSequence, InterchangeError> {
        let spaces = self
            .spaces
            .iter()
            .enumerate()
            .map(|(i, labels)| {
                FiniteStateSpace::new(labels.iter().cloned()).map_err(|e| InterchangeError::Invalid {
                    path: format!("spaces[{i}]"),
                    source: e,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if self.kernels.is_empty() {
            return Err(InterchangeError::Structure {
                path: "kernels".into(),
                message: "at least one kernel is required".into(),
            });
        }
        let mut kernels = Vec::with_capacity(self.kernels.len());
        for (i, rec) in self.kernels.iter().enumerate() {
            let space = |idx: usize, field: &str| {
                spaces.get(idx).cloned().ok_or_else(|| InterchangeError::Structure {
                    path: format!("kernels[{i}].{field}"),
                    message: format!("space index {idx} out of range ({} spaces)", spaces.len()),
                })
            };
            let source = space(rec.source_index, "source_index")?;
            let target = space(rec.target_index, "target_index")?;
            if i > 0 && rec.target_index != self.kernels[i - 1].source_index {
                return Err(InterchangeError::Structure {
                    path: format!("kernels[{i}].target_index"),
                    message: format!(
                        "Q_{} must map into the source space of Q_{} (index {})",
                        i + 1,
                        i,
                        self.kernels[i - 1].source_index
                    ),
                });
            }
            let q = SubKernel::from_rows(source, target, &rec.rows).map_err(|e| {
                let path = match &e {
                    KernelError::InvalidEntry { row, col, .. } => {
                        format!("kernels[{i}].rows[{row}][{col}]")
                    }
                    KernelError::RowMassExceeded { row, .. } => format!("kernels[{i}].rows[{row}]"),
                    KernelError::ColumnCount { row, .. } => format!("kernels[{i}].rows[{row}]"),
                    _ => format!("kernels[{i}].rows"),
                };
                InterchangeError::Invalid { path, source: e }
            })?;
            kernels.push(q);
        }
        ChainSequence::new(kernels).map_err(|e| InterchangeError::Invalid {
            path: "kernels".into(),
            source: e,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("kernel documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, InterchangeError> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn write_chain(path: &Path, chain: &ChainSequence) -> Result<(), InterchangeError> {
    std::fs::write(path, ChainDocument::from_chain(chain).to_json()).map_err(|e| {
        InterchangeError::Io {
            path: path.display().to_string(),
            source: e,
        }
    })
}

pub fn read_chain(path: &Path) -> Result<ChainSequence, InterchangeError> {
    let text = std::fs::read_to_string(path).map_err(|e| InterchangeError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    ChainDocument::from_json(&text)?.to_chain()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{random_chain, RandomChainSpec};
    use proptest::prelude::*;

    #[test]
    fn reports_row_mass_with_path() {
        let doc = r#"{"spaces": [["a","b"],["c","d"]],
            "kernels": [{"source_index":1,"target_index":0,"rows":[[0.5,0.5],[1.0,0.5]]}]}"#;
        let err = ChainDocument::from_json(doc).unwrap().to_chain().unwrap_err();
        assert!(err.to_string().starts_with("kernels[0].rows[1]"), "{err}");
    }

    #[test]
    fn reports_space_linkage() {
        let doc = r#"{"spaces": [["a"],["b"],["c"]],
            "kernels": [{"source_index":1,"target_index":0,"rows":[[0.5]]},
                        {"source_index":2,"target_index":0,"rows":[[0.5]]}]}"#;
        let err = ChainDocument::from_json(doc).unwrap().to_chain().unwrap_err();
        assert!(err.to_string().starts_with("kernels[1].target_index"), "{err}");
    }

    #[test]
    fn reports_duplicate_labels() {
        let doc = r#"{"spaces": [["a","a"],["b"]],
            "kernels": [{"source_index":1,"target_index":0,"rows":[[0.5,0.5]]}]}"#;
        let err = ChainDocument::from_json(doc).unwrap().to_chain().unwrap_err();
        assert!(err.to_string().starts_with("spaces[0]"), "{err}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn roundtrip_is_bit_exact(seed in any::<u64>(), n in 1usize..5, levels in 1usize..4) {
            let chain = random_chain(&RandomChainSpec::new(vec![n; levels + 1], 0.2, 0.1, seed)).unwrap();
            let text = ChainDocument::from_chain(&chain).to_json();
            let back = ChainDocument::from_json(&text).unwrap().to_chain().unwrap();
            for (a, b) in chain.kernels().iter().zip(back.kernels()) {
                for (x, y) in a.rows().flatten().zip(b.rows().flatten()) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }
}
