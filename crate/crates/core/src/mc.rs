//! Monte Carlo approximation of per-cell information content.
//!
//! Masks are sampled by an independent fair coin per cell, so the empirical
//! mean of the satisfaction indicator is an unbiased estimate of the exact
//! value. The iteration planner turns an accuracy `epsilon` and confidence
//! `1 - delta` into a sample count via the Hoeffding bound
//! `n >= 2 ln(2/delta) / epsilon^2`.
//!
//! Randomness is drawn from counter-mode ChaCha streams keyed by
//! `(seed, row, attribute)` with random access by sample index, so results
//! are bit-identical under any parallel schedule and any worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::error::EntropyError;
use crate::exact::{
    enumerate_witnesses_unchecked, exact_entropy_witness_unchecked, CellSpace, EngineConfig,
    WitnessSet,
};
use crate::fd::{check_satisfaction, FdSet, FRESH};
use crate::matrix::{CellEntropy, EntropyMatrix, Method};
use crate::reduce::{build_subtable, Subtable};
use crate::relation::{Instance, Position};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(f64),
    #[error("delta must lie strictly between 0 and 1, got {0}")]
    DeltaOutOfRange(f64),
    #[error("iteration count must be positive")]
    ZeroIterations,
    #[error("required iterations exceed the supported range")]
    IterationOverflow,
}

/// A sampling plan: either derived from `(epsilon, delta)` via the
/// Hoeffding bound or an explicit iteration count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McPlan {
    epsilon: Option<f64>,
    delta: Option<f64>,
    iterations: u64,
}

impl McPlan {
    /// A plan that bypasses the bound with a fixed iteration count.
    pub fn explicit(iterations: u64) -> Result<Self, PlanError> {
        if iterations == 0 {
            return Err(PlanError::ZeroIterations);
        }
        Ok(McPlan {
            epsilon: None,
            delta: None,
            iterations,
        })
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }
}

/// Smallest iteration count guaranteeing accuracy `epsilon` with
/// confidence `1 - delta`: `ceil(2 ln(2/delta) / epsilon^2)`.
pub fn plan_iterations(epsilon: f64, delta: f64) -> Result<McPlan, PlanError> {
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(PlanError::EpsilonOutOfRange(epsilon));
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(PlanError::DeltaOutOfRange(delta));
    }
    let raw = 2.0 * (2.0 / delta).ln() / (epsilon * epsilon);
    let iterations = raw.ceil();
    if !iterations.is_finite() || iterations >= u64::MAX as f64 {
        return Err(PlanError::IterationOverflow);
    }
    Ok(McPlan {
        epsilon: Some(epsilon),
        delta: Some(delta),
        iterations: iterations as u64,
    })
}

/// A Monte Carlo estimate with full provenance. `value` is the fraction of
/// sampled masks under which a fresh focus value keeps the dependencies
/// satisfied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    /// Samples actually drawn; zero when the cell short-circuits to one.
    pub iterations: u64,
    pub seed: u64,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

/// Samples one mask uniformly from the subsets of the non-focus positions
/// (independent fair coin per cell) and reports whether a fresh value at
/// the focus keeps the dependencies satisfied — the full definitional
/// check, no witness shortcut.
pub fn sample_indicator<R: RngCore>(
    instance: &Instance,
    p: Position,
    fds: &FdSet,
    rng: &mut R,
) -> Result<bool, EntropyError> {
    check_satisfaction(instance, fds)?;
    let space = CellSpace::new(instance, p)?;
    let words: Vec<u64> = (0..space.n_bits().div_ceil(64))
        .map(|_| rng.next_u64())
        .collect();
    Ok(space.satisfies_block_mask(fds, FRESH, &words))
}

/// ChaCha stream for one cell's samples, keyed by the run seed and the
/// cell coordinates.
fn cell_rng(seed: u64, row: u32, attr: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&u64::from(row).to_le_bytes());
    key[16..24].copy_from_slice(&attr.to_le_bytes());
    key[24..32].copy_from_slice(b"q-sample");
    ChaCha12Rng::from_seed(key)
}

/// Sampling state for one focus cell: witness sets compiled down to bit
/// masks over only the cells that can influence the indicator.
struct CellSampler {
    /// Words drawn per sample.
    words_per_sample: u64,
    /// Witness bit masks over the relevant-cell index space.
    witnesses: Vec<Vec<u64>>,
}

impl CellSampler {
    fn new(instance: &Instance, p: Position, witnesses: &[WitnessSet]) -> Result<Self, EntropyError> {
        let space = CellSpace::new(instance, p)?;
        // Only bits that occur in some witness can change the indicator;
        // projecting the uniform mask onto them preserves its distribution.
        let mut relevant: Vec<u32> = witnesses
            .iter()
            .flat_map(|w| w.cells())
            .map(|cell| {
                let dense = instance.dense_row(cell.row).expect("witness cell exists");
                space.bit(dense, cell.attr.0).expect("witness avoids focus")
            })
            .collect();
        relevant.sort_unstable();
        relevant.dedup();

        let blocks = relevant.len().div_ceil(64).max(1);
        let compact = |bit: u32| relevant.binary_search(&bit).expect("relevant bit") as u32;
        let witness_masks = witnesses
            .iter()
            .map(|w| {
                let mut mask = vec![0u64; blocks];
                for cell in w.cells() {
                    let dense = instance.dense_row(cell.row).expect("witness cell exists");
                    let bit = compact(space.bit(dense, cell.attr.0).expect("witness avoids focus"));
                    mask[(bit / 64) as usize] |= 1 << (bit % 64);
                }
                mask
            })
            .collect();
        Ok(CellSampler {
            words_per_sample: blocks as u64,
            witnesses: witness_masks,
        })
    }

    /// Counts satisfied samples in `[first, first + count)` of the cell's
    /// stream. A sample is satisfied when every witness has at least one
    /// masked cell.
    fn count_hits(&self, rng_base: &ChaCha12Rng, first: u64, count: u64) -> u64 {
        let mut rng = rng_base.clone();
        // next_u64 consumes two 32-bit words.
        rng.set_word_pos(u128::from(first) * 2 * u128::from(self.words_per_sample));
        let mut drawn = vec![0u64; self.words_per_sample as usize];
        let mut hits = 0;
        for _ in 0..count {
            for word in drawn.iter_mut() {
                *word = rng.next_u64();
            }
            let violated = self.witnesses.iter().any(|witness| {
                witness
                    .iter()
                    .zip(drawn.iter())
                    .all(|(w, q)| w & q == 0)
            });
            if !violated {
                hits += 1;
            }
        }
        hits
    }
}

const SAMPLE_BLOCK: u64 = 1 << 16;

fn estimate_with_key(
    instance: &Instance,
    p: Position,
    witnesses: &[WitnessSet],
    iterations: u64,
    seed: u64,
    key: Position,
    deadline: Option<std::time::Instant>,
) -> Result<f64, EntropyError> {
    let sampler = CellSampler::new(instance, p, witnesses)?;
    let rng_base = cell_rng(seed, key.row, key.attr.0 as u64);
    let n_blocks = iterations.div_ceil(SAMPLE_BLOCK);
    let hits: u64 = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            if let Some(deadline) = deadline {
                if std::time::Instant::now() >= deadline {
                    return Err(EntropyError::Timeout);
                }
            }
            let first = block * SAMPLE_BLOCK;
            let count = SAMPLE_BLOCK.min(iterations - first);
            Ok(sampler.count_hits(&rng_base, first, count))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(hits as f64 / iterations as f64)
}

/// Estimates the information content of one cell by sampling `plan.n`
/// masks. Unique cells short-circuit to exactly one without drawing any
/// samples. Deterministic for a fixed `(instance, fds, plan, seed)`
/// regardless of parallelism.
pub fn estimate_entropy(
    instance: &Instance,
    p: Position,
    fds: &FdSet,
    plan: &McPlan,
    seed: u64,
) -> Result<McEstimate, EntropyError> {
    check_satisfaction(instance, fds)?;
    if !instance.contains(p) {
        return Err(EntropyError::Position(instance.value_at(p).unwrap_err()));
    }
    let witnesses = enumerate_witnesses_unchecked(instance, p, fds);
    if witnesses.is_empty() {
        return Ok(McEstimate {
            value: 1.0,
            iterations: 0,
            seed,
            epsilon: plan.epsilon,
            delta: plan.delta,
        });
    }
    let value = estimate_with_key(instance, p, &witnesses, plan.iterations, seed, p, None)?;
    Ok(McEstimate {
        value,
        iterations: plan.iterations,
        seed,
        epsilon: plan.epsilon,
        delta: plan.delta,
    })
}

/// Shared matrix scaffolding: validate, reduce, run `per_cell` on every
/// non-unique position (original and reduced coordinates), fill ones
/// elsewhere.
fn matrix_with<F>(
    instance: &Instance,
    fds: &FdSet,
    per_cell: F,
) -> Result<EntropyMatrix, EntropyError>
where
    F: Fn(&Subtable, Position, Position) -> Result<CellEntropy, EntropyError> + Sync,
{
    check_satisfaction(instance, fds)?;
    let sub = build_subtable(instance, fds);
    let ones: std::collections::HashSet<Position> =
        sub.plan.ones_positions().iter().copied().collect();
    let compute: Vec<Position> = instance.positions().filter(|p| !ones.contains(p)).collect();

    let mut matrix = EntropyMatrix::all_ones(instance);
    let results: Vec<(Position, CellEntropy)> = compute
        .par_iter()
        .map(|&p| {
            let reduced_p = sub.plan.to_reduced(p).expect("non-unique cells are kept");
            debug_assert_eq!(
                sub.instance.value_at(reduced_p).ok(),
                instance.value_at(p).ok()
            );
            Ok((p, per_cell(&sub, p, reduced_p)?))
        })
        .collect::<Result<_, EntropyError>>()?;
    for (p, cell) in results {
        matrix.set(p, cell);
    }
    Ok(matrix)
}

/// Monte Carlo entropy matrix: unique cells preset to one, the rest
/// estimated on the reduced instance. Per-cell substreams are keyed by the
/// original position, so the matrix is reproducible from `(inputs, plan,
/// seed)` alone.
pub fn entropy_matrix_mc(
    instance: &Instance,
    fds: &FdSet,
    plan: &McPlan,
    seed: u64,
    cfg: &EngineConfig,
) -> Result<EntropyMatrix, EntropyError> {
    matrix_with(instance, fds, |sub, p, reduced_p| {
        let witnesses = enumerate_witnesses_unchecked(&sub.instance, reduced_p, &sub.fds);
        debug_assert!(!witnesses.is_empty(), "non-unique cell has a witness");
        let value = estimate_with_key(
            &sub.instance,
            reduced_p,
            &witnesses,
            plan.iterations,
            seed,
            p,
            cfg.deadline,
        )?;
        Ok(CellEntropy {
            value,
            method: Method::Mc {
                iterations: plan.iterations,
                seed,
                epsilon: plan.epsilon,
                delta: plan.delta,
            },
        })
    })
}

/// Per-cell automatic engine choice: exact witness inclusion-exclusion
/// whenever the witness count is within the cap, Monte Carlo otherwise.
pub fn entropy_matrix_auto(
    instance: &Instance,
    fds: &FdSet,
    plan: &McPlan,
    seed: u64,
    cfg: &EngineConfig,
) -> Result<EntropyMatrix, EntropyError> {
    matrix_with(instance, fds, |sub, p, reduced_p| {
        let witnesses = enumerate_witnesses_unchecked(&sub.instance, reduced_p, &sub.fds);
        if witnesses.len() <= cfg.max_witnesses.min(62) {
            let value = exact_entropy_witness_unchecked(&sub.instance, reduced_p, &witnesses, cfg)?;
            Ok(CellEntropy::exact(value))
        } else {
            let value = estimate_with_key(
                &sub.instance,
                reduced_p,
                &witnesses,
                plan.iterations,
                seed,
                p,
                cfg.deadline,
            )?;
            Ok(CellEntropy {
                value,
                method: Method::Mc {
                    iterations: plan.iterations,
                    seed,
                    epsilon: plan.epsilon,
                    delta: plan.delta,
                },
            })
        }
    })
}
