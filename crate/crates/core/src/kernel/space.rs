use std::fmt;

use serde::{Deserialize, Serialize};

use super::KernelError;

/// An ordered, finite collection of distinct state labels.
///
/// States are addressed by their position; labels are opaque and only used
/// for interchange and diagnostics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FiniteStateSpace {
    labels: Vec<String>,
}

impl FiniteStateSpace {
    pub fn new<I, S>(labels: I) -> Result<Self, KernelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(KernelError::EmptySpace);
        }
        for (i, a) in labels.iter().enumerate() {
            if let Some(j) = labels[i + 1..].iter().position(|b| b == a) {
                return Err(KernelError::DuplicateLabel {
                    label: a.clone(),
                    first: i,
                    second: i + 1 + j,
                });
            }
        }
        Ok(Self { labels })
    }

    /// A space labelled `"{prefix}{i}"` for `i in 0..size`.
    pub fn indexed(prefix: &str, size: usize) -> Result<Self, KernelError> {
        Self::new((0..size).map(|i| format!("{prefix}{i}")))
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

impl TryFrom<Vec<String>> for FiniteStateSpace {
    type Error = KernelError;

    fn try_from(labels: Vec<String>) -> Result<Self, Self::Error> {
        Self::new(labels)
    }
}

impl From<FiniteStateSpace> for Vec<String> {
    fn from(space: FiniteStateSpace) -> Self {
        space.labels
    }
}

impl fmt::Display for FiniteStateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_duplicates() {
        assert!(matches!(
            FiniteStateSpace::new(Vec::<String>::new()),
            Err(KernelError::EmptySpace)
        ));
        let err = FiniteStateSpace::new(["a", "b", "a"]).unwrap_err();
        assert!(matches!(
            err,
            KernelError::DuplicateLabel {
                first: 0,
                second: 2,
                ..
            }
        ));
    }

    #[test]
    fn indexed_labels() {
        let s = FiniteStateSpace::indexed("s", 3).unwrap();
        assert_eq!(s.size(), 3);
        assert_eq!(s.label(2), "s2");
        assert_eq!(s.index_of("s1"), Some(1));
    }
}
