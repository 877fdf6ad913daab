//! Errors shared by the exact and Monte Carlo entropy engines.

use thiserror::Error;

use crate::fd::SatisfactionError;
use crate::relation::PositionError;

#[derive(Debug, Error)]
pub enum EntropyError {
    /// Information content is only defined for satisfying instances, so the
    /// engines verify `instance |= fds` before doing any work.
    #[error("precondition failed: {0}")]
    Precondition(#[from] SatisfactionError),
    #[error(transparent)]
    Position(#[from] PositionError),
    #[error("{cells} cells exceed the subset-enumeration cap of {max}; use the Monte Carlo engine for instances this large")]
    TooManyCells { cells: usize, max: usize },
    #[error("{count} witness sets exceed the inclusion-exclusion cap of {max}; use the Monte Carlo engine instead")]
    TooManyWitnesses { count: usize, max: usize },
    #[error("domain bound k = {k} is too small for the focus column; need at least {min}")]
    DomainBoundTooSmall { k: u64, min: u64 },
    #[error("domain bound k = {k} exceeds the supported maximum {max}")]
    DomainBoundTooLarge { k: u64, max: u64 },
    #[error("computation exceeded its deadline")]
    Timeout,
}
