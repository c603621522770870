use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::LabError;
use crate::sim::{real, sha256_hex};

/// A file to be written under the output directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    pub fn text(name: &str, contents: String) -> Self {
        Self {
            name: name.to_string(),
            contents: contents.into_bytes(),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn json<T: Serialize + ?Sized>(name: &str, value: &T) -> Self {
        let mut s = serde_json::to_string_pretty(value).expect("artifacts always serialize");
        s.push('\n');
        Self::text(name, s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Empty,
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

/// CSV with a fixed column order and 17-significant-digit reals.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    header: Option<String>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            header: None,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// A comment line written above the column names.
    pub fn with_header(mut self, line: String) -> Self {
        self.header = Some(line);
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the columns");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(h) = &self.header {
            out.push_str(h);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Real(v) => real(*v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Every emitted artifact with its content hash, sorted by path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub artifacts: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Writes the artifacts and `manifest.json` under `out_dir`, creating it if
/// needed.
pub fn emit_tables(out_dir: &Path, artifacts: &[Artifact]) -> Result<Manifest, LabError> {
    let io = |path: &Path, source: std::io::Error| LabError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let mut entries = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = out_dir.join(&a.name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
        }
        fs::write(&path, &a.contents).map_err(|e| io(&path, e))?;
        entries.push(ManifestEntry {
            path: a.name.clone(),
            sha256: sha256_hex(&a.contents),
            bytes: a.contents.len() as u64,
        });
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        schema_version: super::SCHEMA_VERSION,
        artifacts: entries,
    };
    let m = Artifact::json(MANIFEST_NAME, &manifest);
    let path = out_dir.join(MANIFEST_NAME);
    fs::write(&path, &m.contents).map_err(|e| io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_result_set_gives_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = emit_tables(dir.path(), &[]).unwrap();
        assert!(m.artifacts.is_empty());
        let text = fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["artifacts"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(&["k", "max_spread"]).with_header("# x".into());
        t.push(vec![1usize.into(), 0.5.into()]);
        assert_eq!(t.render(), "# x\nk,max_spread\n1,5.0000000000000000e-1\n");
    }

    #[test]
    fn manifest_hashes_contents() {
        let dir = tempfile::tempdir().unwrap();
        let m = emit_tables(dir.path(), &[Artifact::text("b.txt", "".into()), Artifact::text("a/x.txt", "x".into())]).unwrap();
        assert_eq!(m.artifacts[0].path, "a/x.txt");
        assert_eq!(
            m.artifacts[1].sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
