//! Exact per-cell information content.
//!
//! Three routes compute the same quantity:
//!
//! * [`conditional_entropy_finite_k`] — the definitional conditional entropy
//!   over a bounded value domain `{1..k}`; its normalization by `log2 k`
//!   converges to the exact value as `k` grows.
//! * [`exact_entropy_naive`] — counts, over all subsets `Q` of the other
//!   positions, how often inserting a fresh value at the focus cell leaves
//!   the dependencies satisfied. The result is the dyadic rational
//!   `count / 2^(#positions - 1)`.
//! * [`exact_entropy_witness`] — observes that inserting a fresh value
//!   violates a dependency exactly when some *witness set* of cells is fully
//!   unmasked, and evaluates `1 - Pr[some witness fully unmasked]` by
//!   inclusion-exclusion over the witness sets. This avoids the
//!   `2^cells` subset sweep entirely and is exponential only in the number
//!   of witnesses.
//!
//! The first two enumerate subsets and are capped by configuration; the
//! witness route handles arbitrarily many cells as long as the witness
//! count stays within its cap.

use std::collections::HashSet;
use std::time::Instant;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::One;
use rayon::prelude::*;

use crate::dyadic::DyadicValue;
use crate::error::EntropyError;
use crate::fd::{check_satisfaction, satisfies_masked_core, FdSet, FRESH};
use crate::matrix::{CellEntropy, EntropyMatrix};
use crate::reduce::build_subtable;
use crate::relation::{Instance, Position};

/// Caps and deadline for the engines. The defaults keep the worst case
/// around 10^8 indicator evaluations; they are configuration, not
/// constants.
#[derive(Clone, Copy, Debug)]
pub struct EngineConfig {
    /// Cell cap for the naive subset-enumeration engine (`2^(cells-1)`
    /// subsets per focus cell).
    pub max_naive_cells: usize,
    /// Cell cap for the finite-k definitional engine (`2^(cells-1) * k`
    /// checks per focus cell).
    pub max_finite_k_cells: usize,
    /// Witness cap for inclusion-exclusion (`2^witnesses` terms).
    pub max_witnesses: usize,
    /// Cooperative deadline; long-running loops poll it and bail out with
    /// [`EntropyError::Timeout`].
    pub deadline: Option<Instant>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_naive_cells: 25,
            max_finite_k_cells: 20,
            max_witnesses: 20,
            deadline: None,
        }
    }
}

impl EngineConfig {
    fn check_deadline(&self) -> Result<(), EntropyError> {
        match self.deadline {
            Some(deadline) if Instant::now() >= deadline => Err(EntropyError::Timeout),
            _ => Ok(()),
        }
    }
}

/// Domain bound for the finite-k definitional entropy.
#[derive(Clone, Copy, Debug)]
pub struct FiniteKConfig {
    pub k: u64,
}

impl FiniteKConfig {
    pub fn new(k: u64) -> Self {
        FiniteKConfig { k }
    }
}

/// Flat addressing of the maskable cells around one focus position: every
/// position except the focus gets a bit index, in row-major order.
pub(crate) struct CellSpace<'a> {
    instance: &'a Instance,
    focus_dense: usize,
    focus_attr: usize,
    /// `dense_row * arity + attr -> bit`, `u32::MAX` for the focus cell.
    bit_of: Vec<u32>,
    n_bits: usize,
}

impl<'a> CellSpace<'a> {
    pub(crate) fn new(instance: &'a Instance, p: Position) -> Result<Self, EntropyError> {
        let focus_dense = instance
            .dense_row(p.row)
            .filter(|_| p.attr.0 < instance.arity())
            .ok_or_else(|| EntropyError::Position(instance.value_at(p).unwrap_err()))?;
        let arity = instance.arity();
        let mut bit_of = vec![u32::MAX; instance.n_rows() * arity];
        let mut n_bits = 0;
        for r in 0..instance.n_rows() {
            for a in 0..arity {
                if r == focus_dense && a == p.attr.0 {
                    continue;
                }
                bit_of[r * arity + a] = n_bits as u32;
                n_bits += 1;
            }
        }
        Ok(CellSpace {
            instance,
            focus_dense,
            focus_attr: p.attr.0,
            bit_of,
            n_bits,
        })
    }

    pub(crate) fn n_bits(&self) -> usize {
        self.n_bits
    }

    /// Bit index of a maskable cell, if it has one.
    pub(crate) fn bit(&self, dense_row: usize, attr: usize) -> Option<u32> {
        let b = self.bit_of[dense_row * self.instance.arity() + attr];
        (b != u32::MAX).then_some(b)
    }

    /// Evaluates satisfaction with `value` at the focus and the mask given
    /// as one machine word (bit set = cell masked). Only valid while
    /// `n_bits <= 64`.
    pub(crate) fn satisfies_word_mask(&self, fds: &FdSet, value: u32, mask: u64) -> bool {
        let arity = self.instance.arity();
        let bit_of = &self.bit_of;
        let is_masked = move |r: usize, a: usize| -> bool {
            let b = bit_of[r * arity + a];
            b < 64 && mask >> b & 1 == 1
        };
        satisfies_masked_core(
            self.instance.rows_raw(),
            fds,
            Some((self.focus_dense, self.focus_attr, value)),
            &is_masked,
        )
    }

    /// Evaluates satisfaction with `value` at the focus and the mask given
    /// as a block bitset over bit indices.
    pub(crate) fn satisfies_block_mask(&self, fds: &FdSet, value: u32, mask: &[u64]) -> bool {
        let arity = self.instance.arity();
        let bit_of = &self.bit_of;
        let is_masked = move |r: usize, a: usize| -> bool {
            let b = bit_of[r * arity + a];
            b != u32::MAX && mask[(b / 64) as usize] >> (b % 64) & 1 == 1
        };
        satisfies_masked_core(
            self.instance.rows_raw(),
            fds,
            Some((self.focus_dense, self.focus_attr, value)),
            &is_masked,
        )
    }
}

fn ensure_satisfied(instance: &Instance, fds: &FdSet) -> Result<(), EntropyError> {
    check_satisfaction(instance, fds)?;
    Ok(())
}

/// Definitional conditional entropy of the focus cell over the value domain
/// `{1..k}`, in bits: the average over all masks `Q` of `log2 #V_Q`, where
/// `V_Q` is the set of values admissible at the focus under `Q`.
///
/// Unnormalized; divide by `log2 k` to compare against the exact engines.
pub fn conditional_entropy_finite_k(
    instance: &Instance,
    p: Position,
    fds: &FdSet,
    k_cfg: FiniteKConfig,
    cfg: &EngineConfig,
) -> Result<f64, EntropyError> {
    ensure_satisfied(instance, fds)?;
    let space = CellSpace::new(instance, p)?;
    let cells = instance.n_positions();
    let max = cfg.max_finite_k_cells.min(64);
    if cells > max {
        return Err(EntropyError::TooManyCells { cells, max });
    }
    let min_k = instance.fresh_value(p.attr) as u64;
    if k_cfg.k < min_k {
        return Err(EntropyError::DomainBoundTooSmall {
            k: k_cfg.k,
            min: min_k,
        });
    }
    let max_k = (u32::MAX - 1) as u64;
    if k_cfg.k > max_k {
        return Err(EntropyError::DomainBoundTooLarge {
            k: k_cfg.k,
            max: max_k,
        });
    }

    let n_subsets = 1u64 << space.n_bits();
    let mut sum = 0.0;
    for mask in 0..n_subsets {
        if mask & 0xFFF == 0 {
            cfg.check_deadline()?;
        }
        let admissible = (1..=k_cfg.k)
            .filter(|&v| space.satisfies_word_mask(fds, v as u32, mask))
            .count();
        debug_assert!(admissible >= 1, "the original value is always admissible");
        sum += (admissible as f64).log2();
    }
    Ok(sum / n_subsets as f64)
}

/// Exact information content by brute-force subset enumeration: the
/// fraction of masks under which a fresh value at the focus keeps the
/// dependencies satisfied.
pub fn exact_entropy_naive(
    instance: &Instance,
    p: Position,
    fds: &FdSet,
    cfg: &EngineConfig,
) -> Result<DyadicValue, EntropyError> {
    ensure_satisfied(instance, fds)?;
    exact_entropy_naive_unchecked(instance, p, fds, cfg)
}

pub(crate) fn exact_entropy_naive_unchecked(
    instance: &Instance,
    p: Position,
    fds: &FdSet,
    cfg: &EngineConfig,
) -> Result<DyadicValue, EntropyError> {
    let space = CellSpace::new(instance, p)?;
    let cells = instance.n_positions();
    let max = cfg.max_naive_cells.min(64);
    if cells > max {
        return Err(EntropyError::TooManyCells { cells, max });
    }
    let n_subsets = 1u64 << space.n_bits();
    let mut admitted = 0u64;
    for mask in 0..n_subsets {
        if mask & 0xFFFF == 0 {
            cfg.check_deadline()?;
        }
        if space.satisfies_word_mask(fds, FRESH, mask) {
            admitted += 1;
        }
    }
    Ok(DyadicValue::new(
        BigUint::from(admitted),
        space.n_bits() as u64,
    ))
}

/// The cells whose joint presence forces a violation once the focus holds a
/// fresh value: for a dependency `A_1..A_s -> B` with `B` the focus
/// attribute and a partner row `j'` sharing the focus row's left-hand
/// projection, the witness is `{(j, A_i)} ∪ {(j', A_i)} ∪ {(j', B)}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WitnessSet {
    cells: Vec<Position>,
}

impl WitnessSet {
    pub fn cells(&self) -> &[Position] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Enumerates all witness sets of the focus position. Empty exactly when
/// the focus value is unique with respect to the dependencies.
pub fn enumerate_witnesses(
    instance: &Instance,
    p: Position,
    fds: &FdSet,
) -> Result<Vec<WitnessSet>, EntropyError> {
    ensure_satisfied(instance, fds)?;
    if !instance.contains(p) {
        return Err(EntropyError::Position(instance.value_at(p).unwrap_err()));
    }
    Ok(enumerate_witnesses_unchecked(instance, p, fds))
}

pub(crate) fn enumerate_witnesses_unchecked(
    instance: &Instance,
    p: Position,
    fds: &FdSet,
) -> Vec<WitnessSet> {
    let rows = instance.rows_raw();
    let focus_dense = instance.dense_row(p.row).expect("valid position");
    let mut witnesses: Vec<WitnessSet> = Vec::new();
    for fd in fds.iter() {
        if fd.rhs() != p.attr || fd.is_trivial() {
            continue;
        }
        for (dense, row) in rows.iter().enumerate() {
            if dense == focus_dense {
                continue;
            }
            if fd.lhs().iter().all(|a| row[a.0] == rows[focus_dense][a.0]) {
                let partner = instance.row_ids()[dense];
                let mut cells: Vec<Position> = fd
                    .lhs()
                    .iter()
                    .flat_map(|&a| [Position::new(p.row, a), Position::new(partner, a)])
                    .collect();
                cells.push(Position::new(partner, p.attr));
                cells.sort_unstable();
                witnesses.push(WitnessSet { cells });
            }
        }
    }
    // Identical witness sets would double-count the same violation event in
    // inclusion-exclusion.
    witnesses.sort_unstable();
    witnesses.dedup();
    witnesses
}

/// Sums `(-1)^(|T|+1) * 2^(exponent - |union of T|)` over the non-empty
/// subsets `T` of the witness bit sets, grouping terms by union size so the
/// big-integer work is a single pass at the end.
fn inclusion_exclusion_numerator(witness_bits: &[Vec<u32>], exponent: u64) -> BigUint {
    let mut coeff: Vec<i64> = vec![0; exponent as usize + 1];
    let mut counts: Vec<u32> = vec![0; exponent as usize];

    fn recurse(
        witness_bits: &[Vec<u32>],
        idx: usize,
        included: usize,
        union_size: usize,
        counts: &mut [u32],
        coeff: &mut [i64],
    ) {
        if idx == witness_bits.len() {
            if included > 0 {
                let sign = if included % 2 == 1 { 1 } else { -1 };
                coeff[union_size] += sign;
            }
            return;
        }
        recurse(witness_bits, idx + 1, included, union_size, counts, coeff);
        let mut grown = union_size;
        for &bit in &witness_bits[idx] {
            counts[bit as usize] += 1;
            if counts[bit as usize] == 1 {
                grown += 1;
            }
        }
        recurse(witness_bits, idx + 1, included + 1, grown, counts, coeff);
        for &bit in &witness_bits[idx] {
            counts[bit as usize] -= 1;
        }
    }

    recurse(witness_bits, 0, 0, 0, &mut counts, &mut coeff);

    let mut hit_probability = BigInt::ZERO;
    for (union_size, &c) in coeff.iter().enumerate() {
        if c != 0 {
            hit_probability += BigInt::from(c) << (exponent - union_size as u64);
        }
    }
    let numerator = (BigInt::one() << exponent) - hit_probability;
    let (sign, magnitude) = numerator.into_parts();
    assert!(sign != Sign::Minus, "union probability cannot exceed one");
    magnitude
}

/// Exact information content via witness sets: `1 - Pr[some witness fully
/// unmasked]` by inclusion-exclusion. Equals [`exact_entropy_naive`]
/// wherever both run, but tolerates arbitrarily many cells.
pub fn exact_entropy_witness(
    instance: &Instance,
    p: Position,
    fds: &FdSet,
    cfg: &EngineConfig,
) -> Result<DyadicValue, EntropyError> {
    ensure_satisfied(instance, fds)?;
    if !instance.contains(p) {
        return Err(EntropyError::Position(instance.value_at(p).unwrap_err()));
    }
    let witnesses = enumerate_witnesses_unchecked(instance, p, fds);
    exact_entropy_witness_unchecked(instance, p, &witnesses, cfg)
}

pub(crate) fn exact_entropy_witness_unchecked(
    instance: &Instance,
    p: Position,
    witnesses: &[WitnessSet],
    cfg: &EngineConfig,
) -> Result<DyadicValue, EntropyError> {
    // 2^62 inclusion-exclusion terms is already absurd; the hard bound just
    // keeps the signed coefficients within i64.
    let max = cfg.max_witnesses.min(62);
    if witnesses.len() > max {
        return Err(EntropyError::TooManyWitnesses {
            count: witnesses.len(),
            max,
        });
    }
    cfg.check_deadline()?;
    let space = CellSpace::new(instance, p)?;
    let witness_bits: Vec<Vec<u32>> = witnesses
        .iter()
        .map(|w| {
            w.cells()
                .iter()
                .map(|&cell| {
                    let dense = instance.dense_row(cell.row).expect("witness cell exists");
                    space.bit(dense, cell.attr.0).expect("witness avoids focus")
                })
                .collect()
        })
        .collect();
    let exponent = space.n_bits() as u64;
    let numerator = inclusion_exclusion_numerator(&witness_bits, exponent);
    Ok(DyadicValue::new(numerator, exponent))
}

/// Which exact engine a matrix computation uses per cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactStrategy {
    Naive,
    Witness,
}

/// Exact entropy matrix: marks unique cells as one, reduces the instance to
/// the relevant subtable, and runs the chosen engine on the remaining
/// cells. Cells are independent and computed in parallel; results are
/// identical for any worker count.
pub fn entropy_matrix_exact(
    instance: &Instance,
    fds: &FdSet,
    strategy: ExactStrategy,
    cfg: &EngineConfig,
) -> Result<EntropyMatrix, EntropyError> {
    ensure_satisfied(instance, fds)?;
    let sub = build_subtable(instance, fds);
    let ones: HashSet<Position> = sub.plan.ones_positions().iter().copied().collect();
    let compute: Vec<Position> = instance.positions().filter(|p| !ones.contains(p)).collect();

    let mut matrix = EntropyMatrix::all_ones(instance);
    if compute.is_empty() {
        return Ok(matrix);
    }

    let results: Vec<(Position, DyadicValue)> = compute
        .par_iter()
        .map(|&p| {
            let reduced_p = sub.plan.to_reduced(p).expect("non-unique cells are kept");
            debug_assert_eq!(
                sub.instance.value_at(reduced_p).ok(),
                instance.value_at(p).ok()
            );
            let value = match strategy {
                ExactStrategy::Naive => {
                    exact_entropy_naive_unchecked(&sub.instance, reduced_p, &sub.fds, cfg)?
                }
                ExactStrategy::Witness => {
                    let witnesses =
                        enumerate_witnesses_unchecked(&sub.instance, reduced_p, &sub.fds);
                    exact_entropy_witness_unchecked(&sub.instance, reduced_p, &witnesses, cfg)?
                }
            };
            Ok((p, value))
        })
        .collect::<Result<_, EntropyError>>()?;

    for (p, value) in results {
        matrix.set(p, CellEntropy::exact(value));
    }
    Ok(matrix)
}

/// The straightforward whole-instance computation with every shortcut
/// disabled: the naive engine on the full instance at every position. Only
/// useful for benchmarking against the optimized pipeline.
pub fn entropy_matrix_exact_unoptimized(
    instance: &Instance,
    fds: &FdSet,
    cfg: &EngineConfig,
) -> Result<EntropyMatrix, EntropyError> {
    ensure_satisfied(instance, fds)?;
    let positions: Vec<Position> = instance.positions().collect();
    let results: Vec<(Position, DyadicValue)> = positions
        .par_iter()
        .map(|&p| Ok((p, exact_entropy_naive_unchecked(instance, p, fds, cfg)?)))
        .collect::<Result<_, EntropyError>>()?;
    let mut matrix = EntropyMatrix::all_ones(instance);
    for (p, value) in results {
        matrix.set(p, CellEntropy::exact(value));
    }
    Ok(matrix)
}
