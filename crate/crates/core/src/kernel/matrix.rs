use super::{FiniteStateSpace, KernelError};

/// Absolute slack allowed on row sums and measure totals.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A sub-stochastic kernel from `source` to `target`.
///
/// Rows are indexed by source states, columns by target states. Every entry
/// is nonnegative, every row sums to at most one, and at least one row has
/// positive mass. The deficit `1 - row sum` is the killing probability.
#[derive(Clone, Debug, PartialEq)]
pub struct SubKernel {
    source: FiniteStateSpace,
    target: FiniteStateSpace,
    weights: Vec<f64>,
}

impl SubKernel {
    /// Builds a kernel from rows, validating every invariant.
    ///
    /// Negative entries no larger than [`MASS_TOLERANCE`] in magnitude are
    /// clamped to zero; anything else out of range is rejected with the
    /// offending indices.
    pub fn from_rows(
        source: FiniteStateSpace,
        target: FiniteStateSpace,
        rows: &[Vec<f64>],
    ) -> Result<Self, KernelError> {
        if rows.len() != source.size() {
            return Err(KernelError::RowCount {
                expected: source.size(),
                found: rows.len(),
            });
        }
        let mut weights = Vec::with_capacity(source.size() * target.size());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != target.size() {
                return Err(KernelError::ColumnCount {
                    row: i,
                    expected: target.size(),
                    found: row.len(),
                });
            }
            weights.extend_from_slice(row);
        }
        Self::from_flat(source, target, weights)
    }

    /// Builds a kernel from a row-major weight buffer.
    pub fn from_flat(
        source: FiniteStateSpace,
        target: FiniteStateSpace,
        mut weights: Vec<f64>,
    ) -> Result<Self, KernelError> {
        let cols = target.size();
        if weights.len() != source.size() * cols {
            return Err(KernelError::DimensionMismatch {
                expected: source.size() * cols,
                found: weights.len(),
            });
        }
        let mut any_mass = false;
        for (i, row) in weights.chunks_mut(cols).enumerate() {
            let mut sum = 0.0;
            for (j, w) in row.iter_mut().enumerate() {
                if !w.is_finite() || *w < -MASS_TOLERANCE {
                    return Err(KernelError::InvalidEntry {
                        row: i,
                        col: j,
                        value: *w,
                    });
                }
                if *w < 0.0 {
                    *w = 0.0;
                }
                sum += *w;
            }
            if sum > 1.0 + MASS_TOLERANCE {
                return Err(KernelError::RowMassExceeded { row: i, sum });
            }
            any_mass |= sum > 0.0;
        }
        if !any_mass {
            return Err(KernelError::ZeroKernel);
        }
        Ok(Self {
            source,
            target,
            weights,
        })
    }

    pub fn identity(space: FiniteStateSpace) -> Self {
        let n = space.size();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            weights[i * n + i] = 1.0;
        }
        Self {
            source: space.clone(),
            target: space,
            weights,
        }
    }

    pub fn source(&self) -> &FiniteStateSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteStateSpace {
        &self.target
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.weights.chunks_exact(self.target.size())
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let m = self.target.size();
        &self.weights[x * m..(x + 1) * m]
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.weights[x * self.target.size() + y]
    }

    pub fn row_masses(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    /// `(K f)(x) = Σ_y K(x, y) f(y)`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>, KernelError> {
        if f.len() != self.target.size() {
            return Err(KernelError::DimensionMismatch {
                expected: self.target.size(),
                found: f.len(),
            });
        }
        Ok(self.apply_unchecked(f))
    }

    pub(crate) fn apply_unchecked(&self, f: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| row.iter().zip(f).map(|(k, v)| k * v).sum())
            .collect()
    }

    /// Pushes a measure on the source forward to the target: `(μK)(y)`.
    pub fn push_forward(&self, mu: &[f64]) -> Result<Vec<f64>, KernelError> {
        if mu.len() != self.source.size() {
            return Err(KernelError::DimensionMismatch {
                expected: self.source.size(),
                found: mu.len(),
            });
        }
        let mut out = vec![0.0; self.target.size()];
        for (row, m) in self.rows().zip(mu) {
            for (o, k) in out.iter_mut().zip(row) {
                *o += m * k;
            }
        }
        Ok(out)
    }

    /// Common mass of two rows, `Σ_y min(K(x, y), K(x̃, y))`.
    ///
    /// On a finite space the relative-density construction of the overlap
    /// coefficient reduces to this, since
    /// `min(a/(a+b), b/(a+b)) (a+b) = min(a, b)`.
    pub fn overlap(&self, x: usize, x_tilde: usize) -> f64 {
        self.row(x)
            .iter()
            .zip(self.row(x_tilde))
            .map(|(a, b)| a.min(*b))
            .sum()
    }

    /// Smallest overlap over all ordered state pairs, with its witness.
    pub fn min_overlap(&self) -> (f64, usize, usize) {
        let n = self.source.size();
        let mut best = (f64::INFINITY, 0, 0);
        for x in 0..n {
            for y in x..n {
                let eps = self.overlap(x, y);
                if eps < best.0 {
                    best = (eps, x, y);
                }
            }
        }
        best
    }
}

/// A nonnegative mass vector over a finite state space.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureVec {
    space: FiniteStateSpace,
    mass: Vec<f64>,
}

impl MeasureVec {
    /// A sub-probability measure (total at most one).
    pub fn sub_probability(space: FiniteStateSpace, mass: Vec<f64>) -> Result<Self, KernelError> {
        let m = Self::nonnegative(space, mass)?;
        let total = m.total();
        if total > 1.0 + MASS_TOLERANCE {
            return Err(KernelError::MeasureMass { total });
        }
        Ok(m)
    }

    /// A probability measure (total one within [`MASS_TOLERANCE`]).
    pub fn probability(space: FiniteStateSpace, mass: Vec<f64>) -> Result<Self, KernelError> {
        let m = Self::nonnegative(space, mass)?;
        let total = m.total();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(KernelError::MeasureMass { total });
        }
        Ok(m)
    }

    pub fn point_mass(space: FiniteStateSpace, x: usize) -> Self {
        let mut mass = vec![0.0; space.size()];
        mass[x] = 1.0;
        Self { space, mass }
    }

    fn nonnegative(space: FiniteStateSpace, mass: Vec<f64>) -> Result<Self, KernelError> {
        if mass.len() != space.size() {
            return Err(KernelError::DimensionMismatch {
                expected: space.size(),
                found: mass.len(),
            });
        }
        if let Some((i, &v)) = mass
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(KernelError::NegativeMass { index: i, value: v });
        }
        Ok(Self { space, mass })
    }

    pub fn space(&self) -> &FiniteStateSpace {
        &self.space
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `⟨μ, f⟩`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.mass.iter().zip(f).map(|(m, v)| m * v).sum()
    }
}

/// Total variation distance `½ Σ |μ - ν|`.
///
/// For probability vectors this equals `sup_C |μ(C) - ν(C)|`; it is only
/// meaningful as a supremum over events when the two masses agree, which is
/// how it is used on normalized kernels.
pub fn tv_distance(mu: &MeasureVec, nu: &MeasureVec) -> Result<f64, KernelError> {
    if mu.space() != nu.space() {
        return Err(KernelError::SpaceMismatch {
            context: "tv_distance".into(),
        });
    }
    Ok(tv_slices(mu.mass(), nu.mass()))
}

pub(crate) fn tv_slices(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: usize) -> FiniteStateSpace {
        FiniteStateSpace::indexed("s", n).unwrap()
    }

    fn kernel(rows: &[Vec<f64>]) -> SubKernel {
        SubKernel::from_rows(sp(rows.len()), sp(rows[0].len()), rows).unwrap()
    }

    #[test]
    fn apply_examples() {
        let id = SubKernel::identity(sp(2));
        assert_eq!(id.apply(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);

        let k = kernel(&[vec![0.5, 0.3], vec![0.2, 0.6]]);
        let out = k.apply(&[1.0, 1.0]).unwrap();
        assert!((out[0] - 0.8).abs() < 1e-12 && (out[1] - 0.8).abs() < 1e-12);

        let k = kernel(&[vec![0.5, 0.0], vec![0.2, 0.2]]);
        let out = k.apply(&[2.0, 4.0]).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-12 && (out[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn apply_dimension_mismatch() {
        let k = SubKernel::identity(sp(2));
        assert!(matches!(
            k.apply(&[1.0]),
            Err(KernelError::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn overlap_examples() {
        let k = kernel(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!((k.overlap(0, 1) - 1.0).abs() < 1e-12);
        let k = kernel(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(k.overlap(0, 1), 0.0);
        let k = kernel(&[vec![0.5, 0.3], vec![0.2, 0.6]]);
        assert!((k.overlap(0, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tv_examples() {
        let s = sp(2);
        let p = |v: Vec<f64>| MeasureVec::probability(s.clone(), v).unwrap();
        assert_eq!(tv_distance(&p(vec![0.7, 0.3]), &p(vec![0.7, 0.3])).unwrap(), 0.0);
        assert_eq!(tv_distance(&p(vec![1.0, 0.0]), &p(vec![0.0, 1.0])).unwrap(), 1.0);
        let d = tv_distance(&p(vec![0.7, 0.3]), &p(vec![0.4, 0.6])).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn validation_reports_indices() {
        let err = SubKernel::from_rows(sp(2), sp(2), &[vec![0.5, 0.5], vec![1.0, 0.5]]).unwrap_err();
        assert!(matches!(err, KernelError::RowMassExceeded { row: 1, .. }));
        let err = SubKernel::from_rows(sp(1), sp(2), &[vec![0.5, -0.1]]).unwrap_err();
        assert!(matches!(err, KernelError::InvalidEntry { row: 0, col: 1, .. }));
        let err = SubKernel::from_rows(sp(1), sp(2), &[vec![0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, KernelError::ZeroKernel));
        let k = SubKernel::from_rows(sp(1), sp(2), &[vec![0.5, -1e-14]]).unwrap();
        assert_eq!(k.get(0, 1), 0.0);
    }
}
