use super::matrix::{tv_slices, MeasureVec, SubKernel};
use super::{FiniteStateSpace, KernelError};

/// Kernels `Q_1, …, Q_K` of an inhomogeneous killed chain, with `Q_l` mapping
/// `E_l` to `E_{l-1}`.
///
/// Levels are 1-based throughout, matching the backward-product notation:
/// `kernel(1)` is `Q_1` and its target is `E_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSequence {
    kernels: Vec<SubKernel>,
}

/// Outcome of the two-sided total-variation bound for one pair of states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TvBoundCheck {
    /// `‖P_l(x, ·) - P_l(x̃, ·)‖_TV`.
    pub lhs: f64,
    /// `1 - ε_l(x, x̃) · min s_{l-1} / max s_l`.
    pub rhs1: f64,
    /// `1 - ε_l(x, x̃) · min s_{l-1} / max s_{l-1}`.
    pub rhs2: f64,
}

impl TvBoundCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs1 + tol && self.rhs1 <= self.rhs2 + tol
    }
}

/// Geometric contraction guarantee `(1 - ε₀c₀)^k` for a chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionCertificate {
    pub c0: f64,
    pub eps0: f64,
    pub rate: f64,
    pub k: usize,
    pub bound: f64,
}

impl ContractionCertificate {
    pub fn new(c0: f64, eps0: f64, k: usize) -> Self {
        let rate = 1.0 - eps0 * c0;
        Self {
            c0,
            eps0,
            rate,
            k,
            bound: rate.powi(k as i32),
        }
    }

    /// Bound after `k` steps for the same floors.
    pub fn at(&self, k: usize) -> f64 {
        self.rate.powi(k as i32)
    }
}

/// The reverse ergodic limit `C(f)` with its certified error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErgodicLimit {
    pub value: f64,
    pub k_used: usize,
    pub certified_error: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ChainSequence {
    /// `kernels[0]` is `Q_1`. Adjacent spaces must agree:
    /// `kernels[l].target == kernels[l - 1].source`.
    pub fn new(kernels: Vec<SubKernel>) -> Result<Self, KernelError> {
        if kernels.is_empty() {
            return Err(KernelError::EmptyChain);
        }
        for l in 1..kernels.len() {
            if kernels[l].target() != kernels[l - 1].source() {
                return Err(KernelError::IncompatibleLevels { level: l + 1 });
            }
        }
        Ok(Self { kernels })
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn kernels(&self) -> &[SubKernel] {
        &self.kernels
    }

    /// `Q_l`, 1-based.
    pub fn kernel(&self, level: usize) -> Result<&SubKernel, KernelError> {
        level
            .checked_sub(1)
            .and_then(|i| self.kernels.get(i))
            .ok_or(KernelError::LevelOutOfRange {
                level,
                len: self.kernels.len(),
            })
    }

    /// `E_l` for `l = 0..=K`.
    pub fn space(&self, level: usize) -> Result<&FiniteStateSpace, KernelError> {
        if level == 0 {
            Ok(self.kernels[0].target())
        } else {
            Ok(self.kernel(level)?.source())
        }
    }

    /// Survival vectors `s_k = Q_k ⋯ Q_1 1` for `k = 1..=K` (index `k - 1`).
    pub fn survival_products(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.kernels.len());
        let mut s = vec![1.0; self.kernels[0].target().size()];
        for q in &self.kernels {
            s = q.apply_unchecked(&s);
            out.push(s.clone());
        }
        out
    }

    /// `s_k`, with `s_0 ≡ 1`.
    pub fn survival(&self, k: usize) -> Result<Vec<f64>, KernelError> {
        if k == 0 {
            return Ok(vec![1.0; self.kernels[0].target().size()]);
        }
        self.kernel(k)?;
        let mut s = vec![1.0; self.kernels[0].target().size()];
        for q in &self.kernels[..k] {
            s = q.apply_unchecked(&s);
        }
        Ok(s)
    }

    /// `Q_k ⋯ Q_1 f`.
    pub fn backward_product(&self, k: usize, f: &[f64]) -> Result<Vec<f64>, KernelError> {
        self.check_f(f)?;
        if k == 0 {
            return Ok(f.to_vec());
        }
        self.kernel(k)?;
        let mut v = f.to_vec();
        for q in &self.kernels[..k] {
            v = q.apply_unchecked(&v);
        }
        Ok(v)
    }

    fn check_f(&self, f: &[f64]) -> Result<(), KernelError> {
        let n = self.kernels[0].target().size();
        if f.len() != n {
            return Err(KernelError::DimensionMismatch {
                expected: n,
                found: f.len(),
            });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(KernelError::NonFinite);
        }
        Ok(())
    }

    /// The probability kernel
    /// `P_l(x, y) = Q_l(x, y) s_{l-1}(y) / s_l(x)`.
    pub fn normalized_kernel(&self, level: usize) -> Result<SubKernel, KernelError> {
        let q = self.kernel(level)?;
        let prev = self.survival(level - 1)?;
        let s = q.apply_unchecked(&prev);
        normalize_with(q, &prev, &s, level)
    }

    /// All of `P_1, …, P_K`.
    pub fn normalized_kernels(&self) -> Result<Vec<SubKernel>, KernelError> {
        let mut prev = vec![1.0; self.kernels[0].target().size()];
        let mut out = Vec::with_capacity(self.kernels.len());
        for (i, q) in self.kernels.iter().enumerate() {
            let s = q.apply_unchecked(&prev);
            out.push(normalize_with(q, &prev, &s, i + 1)?);
            prev = s;
        }
        Ok(out)
    }

    /// Evaluates both sides of the total-variation bound for `P_l` at a pair.
    pub fn tv_bound_check(
        &self,
        level: usize,
        x: usize,
        x_tilde: usize,
    ) -> Result<TvBoundCheck, KernelError> {
        let q = self.kernel(level)?;
        let prev = self.survival(level - 1)?;
        let s = q.apply_unchecked(&prev);
        let p = normalize_with(q, &prev, &s, level)?;
        let n = q.source().size();
        if x >= n || x_tilde >= n {
            return Err(KernelError::StateOutOfRange {
                state: x.max(x_tilde),
                size: n,
            });
        }
        let lhs = tv_slices(p.row(x), p.row(x_tilde));
        let eps = q.overlap(x, x_tilde);
        let (prev_min, prev_max) = min_max(&prev);
        let (_, s_max) = min_max(&s);
        Ok(TvBoundCheck {
            lhs,
            rhs1: 1.0 - eps * prev_min / s_max,
            rhs2: 1.0 - eps * prev_min / prev_max,
        })
    }

    /// `min s_k / max s_k`.
    pub fn condition_c0(&self, k: usize) -> Result<f64, KernelError> {
        let s = self.survival(k)?;
        let (lo, hi) = min_max(&s);
        if hi <= 0.0 {
            return Err(KernelError::DeadChain { level: k });
        }
        Ok(lo / hi)
    }

    /// Smallest `condition_c0(k)` over `k = 1..=K`, with the level attaining it.
    pub fn min_c0(&self) -> Result<(f64, usize), KernelError> {
        let mut best = (f64::INFINITY, 0);
        for (i, s) in self.survival_products().iter().enumerate() {
            let (lo, hi) = min_max(s);
            if hi <= 0.0 {
                return Err(KernelError::DeadChain { level: i + 1 });
            }
            if lo / hi < best.0 {
                best = (lo / hi, i + 1);
            }
        }
        Ok(best)
    }

    /// `min_l min_{x, x̃} ε_l(x, x̃)`.
    pub fn condition_eps0(&self) -> f64 {
        self.eps0_witness().0
    }

    /// The overlap floor together with `(level, x, x̃)` attaining it.
    pub fn eps0_witness(&self) -> (f64, usize, usize, usize) {
        let mut best = (f64::INFINITY, 0, 0, 0);
        for (i, q) in self.kernels.iter().enumerate() {
            let (eps, x, y) = q.min_overlap();
            if eps < best.0 {
                best = (eps, i + 1, x, y);
            }
        }
        best
    }

    /// Contraction certificate from the instance's own floors.
    pub fn certificate(&self) -> Result<ContractionCertificate, KernelError> {
        let (c0, _) = self.min_c0()?;
        Ok(ContractionCertificate::new(
            c0,
            self.condition_eps0(),
            self.kernels.len(),
        ))
    }

    /// `T_k f(x) = Q_k ⋯ Q_1 f(x) / Q_k ⋯ Q_1 1(x)`.
    pub fn tk_apply(&self, k: usize, f: &[f64]) -> Result<Vec<f64>, KernelError> {
        let num = self.backward_product(k, f)?;
        let den = self.survival(k)?;
        ratio(&num, &den, k)
    }

    /// `⟨ν_k, Q_k ⋯ Q_1 f⟩ / ⟨ν_k, Q_k ⋯ Q_1 1⟩`.
    pub fn ergodic_ratio(&self, k: usize, f: &[f64], nu: &MeasureVec) -> Result<f64, KernelError> {
        if nu.space() != self.space(k)? {
            return Err(KernelError::SpaceMismatch {
                context: format!("entry law is not on E_{k}"),
            });
        }
        let num = nu.integrate(&self.backward_product(k, f)?);
        let den = nu.integrate(&self.survival(k)?);
        if den <= 0.0 {
            return Err(KernelError::DeadEntryLaw);
        }
        Ok(num / den)
    }

    /// Extracts `C(f)` as the midpoint of `[min T_k f, max T_k f]` at the
    /// first `k` where the spread is at most `tol`.
    ///
    /// Every later `T_{k'} f(x)` is a `P`-average of `T_k f`, so `C(f)` lies
    /// in the bracket. The certified error adds the contraction tail
    /// `(1 - ε₀c₀)^k · osc(f)` on top of the half spread.
    pub fn ergodic_limit(&self, f: &[f64], tol: f64) -> Result<ErgodicLimit, KernelError> {
        self.check_f(f)?;
        let (c0, c0_level) = self.min_c0()?;
        if c0 <= 0.0 {
            return Err(KernelError::ConditionViolated {
                condition: "c0",
                level: c0_level,
                pair: None,
                value: c0,
            });
        }
        let (eps0, level, x, y) = self.eps0_witness();
        if eps0 <= 0.0 {
            return Err(KernelError::ConditionViolated {
                condition: "eps0",
                level,
                pair: Some((x, y)),
                value: eps0,
            });
        }
        let cert = ContractionCertificate::new(c0, eps0, self.kernels.len());
        let (f_min, f_max) = min_max(f);
        let osc = f_max - f_min;

        let mut num = f.to_vec();
        let mut den = vec![1.0; f.len()];
        let mut best = (f64::NEG_INFINITY, f64::INFINITY, 0);
        for (i, q) in self.kernels.iter().enumerate() {
            let k = i + 1;
            num = q.apply_unchecked(&num);
            den = q.apply_unchecked(&den);
            let t = ratio(&num, &den, k)?;
            let (lo, hi) = min_max(&t);
            best = (lo, hi, k);
            let spread = hi - lo;
            if spread <= tol {
                return Ok(ErgodicLimit {
                    value: 0.5 * (lo + hi),
                    k_used: k,
                    certified_error: 0.5 * spread + cert.at(k) * osc,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Err(KernelError::HorizonExhausted {
            k: best.2,
            lower: best.0,
            upper: best.1,
        })
    }
}

fn normalize_with(
    q: &SubKernel,
    prev: &[f64],
    s: &[f64],
    level: usize,
) -> Result<SubKernel, KernelError> {
    let m = q.target().size();
    let mut w = Vec::with_capacity(q.source().size() * m);
    for (x, (row, sx)) in q.rows().zip(s).enumerate() {
        if *sx <= 0.0 {
            return Err(KernelError::DeadState { state: x, level });
        }
        w.extend(row.iter().zip(prev).map(|(k, p)| k * p / sx));
    }
    SubKernel::from_flat(q.source().clone(), q.target().clone(), w)
}

fn ratio(num: &[f64], den: &[f64], level: usize) -> Result<Vec<f64>, KernelError> {
    num.iter()
        .zip(den)
        .enumerate()
        .map(|(x, (n, d))| {
            if *d <= 0.0 {
                Err(KernelError::DeadState { state: x, level })
            } else {
                Ok(n / d)
            }
        })
        .collect()
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}
