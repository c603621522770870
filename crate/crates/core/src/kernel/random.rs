use rand::Rng;

use super::matrix::SubKernel;
use super::{ChainSequence, FiniteStateSpace, KernelError};
use crate::rng::stream;

/// Parameters for [`random_chain`].
#[derive(Clone, Debug, PartialEq)]
pub struct RandomChainSpec {
    /// Sizes of `E_0, E_1, …, E_K`; the chain has `sizes.len() - 1` kernels.
    pub sizes: Vec<usize>,
    /// Required `min s_k / max s_k` at every level.
    pub c0_floor: f64,
    /// Required pairwise row overlap at every level.
    pub eps0_floor: f64,
    pub seed: u64,
    /// Candidate kernels drawn per level before giving up.
    pub max_attempts: usize,
}

impl RandomChainSpec {
    pub fn new(sizes: Vec<usize>, c0_floor: f64, eps0_floor: f64, seed: u64) -> Self {
        Self {
            sizes,
            c0_floor,
            eps0_floor,
            seed,
            max_attempts: 10_000,
        }
    }
}

/// Draws a killed chain satisfying both contraction floors.
///
/// Each level is rejection-sampled: a candidate kernel mixes a shared row
/// profile with per-row noise, scaled by random row masses, and is kept only
/// if the overlap floor holds for it and the survival ratio floor holds for
/// the resulting `s_k`. The floors are re-checked on the finished chain.
pub fn random_chain(spec: &RandomChainSpec) -> Result<ChainSequence, KernelError> {
    let in_unit = |v: f64| v > 0.0 && v < 1.0;
    if !in_unit(spec.c0_floor) || !in_unit(spec.eps0_floor) {
        return Err(KernelError::InvalidFloors {
            c0: spec.c0_floor,
            eps0: spec.eps0_floor,
        });
    }
    if spec.sizes.len() < 2 || spec.sizes.contains(&0) {
        return Err(KernelError::InvalidSizes(spec.sizes.clone()));
    }
    let spaces = spec
        .sizes
        .iter()
        .enumerate()
        .map(|(l, &n)| FiniteStateSpace::indexed(&format!("E{l}:"), n))
        .collect::<Result<Vec<_>, _>>()?;

    let mut kernels = Vec::with_capacity(spaces.len() - 1);
    let mut prev = vec![1.0; spec.sizes[0]];
    for level in 1..spaces.len() {
        let mut rng = stream(spec.seed, "random_chain", level as u64);
        let mut accepted = None;
        for _ in 0..spec.max_attempts {
            let q = draw_kernel(&mut rng, &spaces[level], &spaces[level - 1], spec);
            if q.min_overlap().0 < spec.eps0_floor {
                continue;
            }
            let s = q.apply_unchecked(&prev);
            let (lo, hi) = super::chain::min_max(&s);
            if hi > 0.0 && lo / hi >= spec.c0_floor {
                accepted = Some((q, s));
                break;
            }
        }
        let (q, s) = accepted.ok_or(KernelError::RejectionBudget {
            level,
            attempts: spec.max_attempts,
        })?;
        kernels.push(q);
        prev = s;
    }
    let chain = ChainSequence::new(kernels)?;

    let (c0, level) = chain.min_c0()?;
    if c0 < spec.c0_floor {
        return Err(KernelError::ConditionViolated {
            condition: "c0",
            level,
            pair: None,
            value: c0,
        });
    }
    let (eps0, level, x, y) = chain.eps0_witness();
    if eps0 < spec.eps0_floor {
        return Err(KernelError::ConditionViolated {
            condition: "eps0",
            level,
            pair: Some((x, y)),
            value: eps0,
        });
    }
    Ok(chain)
}

fn draw_kernel<R: Rng>(
    rng: &mut R,
    source: &FiniteStateSpace,
    target: &FiniteStateSpace,
    spec: &RandomChainSpec,
) -> SubKernel {
    let m = target.size();
    // Shared weight w bounds the pairwise overlap below by w · min mass.
    let w = rng.random_range(spec.eps0_floor.sqrt()..=1.0);
    let mass_lo = spec.eps0_floor.sqrt().max(spec.c0_floor);
    let common = simplex(rng, m);
    let mut weights = Vec::with_capacity(source.size() * m);
    for _ in 0..source.size() {
        let mass = rng.random_range(mass_lo..=1.0);
        let own = simplex(rng, m);
        weights.extend(
            common
                .iter()
                .zip(&own)
                .map(|(c, o)| mass * (w * c + (1.0 - w) * o)),
        );
    }
    SubKernel::from_flat(source.clone(), target.clone(), weights)
        .expect("generated rows are sub-stochastic")
}

fn simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}
