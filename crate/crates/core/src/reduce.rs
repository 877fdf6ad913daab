//! Provably lossless problem-size reductions.
//!
//! Two shortcuts run before any per-cell computation: cells whose value is
//! unique with respect to the dependencies are assigned entropy one
//! outright, and the instance is restricted to the rows containing a
//! non-unique cell and the attributes appearing in some dependency. Cell
//! entropies on the reduced instance equal those on the original at every
//! surviving position, so the reduction never changes results, only cost.

use std::collections::{HashMap, HashSet};

use crate::fd::{FdSet, FunctionalDependency};
use crate::relation::{AttrId, Instance, Position, ValueId};

/// Positions of cells that are not unique, i.e. the cells that actually
/// need entropy computation. Grouping rows per dependency makes this a
/// single pass per dependency instead of a per-cell scan.
pub(crate) fn non_unique_positions(instance: &Instance, fds: &FdSet) -> HashSet<Position> {
    let rows = instance.rows_raw();
    let mut out = HashSet::new();
    for fd in fds.iter().filter(|fd| !fd.is_trivial()) {
        let mut groups: HashMap<Vec<ValueId>, Vec<usize>> = HashMap::new();
        for (dense, row) in rows.iter().enumerate() {
            let key: Vec<ValueId> = fd.lhs().iter().map(|a| row[a.0]).collect();
            groups.entry(key).or_default().push(dense);
        }
        for group in groups.values().filter(|g| g.len() >= 2) {
            for &dense in group {
                out.insert(Position::new(instance.row_ids()[dense], fd.rhs()));
            }
        }
    }
    out
}

/// Exactly the positions where the cell value is unique with respect to the
/// dependencies; callers may set these to entropy one without computation.
pub fn mark_unique_ones(instance: &Instance, fds: &FdSet) -> Vec<Position> {
    let non_unique = non_unique_positions(instance, fds);
    instance
        .positions()
        .filter(|p| !non_unique.contains(p))
        .collect()
}

/// How an instance was shrunk: preset-one positions plus the kept rows and
/// attributes. Row labels survive the reduction unchanged, so mapping a
/// position only translates the attribute index.
#[derive(Clone, Debug)]
pub struct ReductionPlan {
    ones_positions: Vec<Position>,
    kept_rows: Vec<u32>,
    kept_attributes: Vec<AttrId>,
}

impl ReductionPlan {
    pub fn ones_positions(&self) -> &[Position] {
        &self.ones_positions
    }

    pub fn kept_rows(&self) -> &[u32] {
        &self.kept_rows
    }

    pub fn kept_attributes(&self) -> &[AttrId] {
        &self.kept_attributes
    }

    /// Maps an original position into the reduced instance, if it survived.
    pub fn to_reduced(&self, p: Position) -> Option<Position> {
        if self.kept_rows.binary_search(&p.row).is_err() {
            return None;
        }
        let attr = self.kept_attributes.binary_search(&p.attr).ok()?;
        Some(Position::new(p.row, AttrId(attr)))
    }

    /// Maps a reduced-instance position back to the original instance.
    pub fn to_original(&self, p: Position) -> Position {
        Position::new(p.row, self.kept_attributes[p.attr.0])
    }
}

/// Result of [`build_subtable`]: the plan, the reduced instance, and the
/// dependencies re-resolved against the reduced schema.
#[derive(Clone, Debug)]
pub struct Subtable {
    pub plan: ReductionPlan,
    pub instance: Instance,
    pub fds: FdSet,
}

/// Restricts the instance to the rows containing any non-unique cell and
/// the attributes involved in any dependency.
pub fn build_subtable(instance: &Instance, fds: &FdSet) -> Subtable {
    let non_unique = non_unique_positions(instance, fds);

    let mut kept_rows: Vec<u32> = non_unique.iter().map(|p| p.row).collect();
    kept_rows.sort_unstable();
    kept_rows.dedup();

    let mut kept_attributes: Vec<AttrId> = fds
        .iter()
        .flat_map(|fd| fd.lhs().iter().copied().chain(std::iter::once(fd.rhs())))
        .collect();
    kept_attributes.sort_unstable();
    kept_attributes.dedup();

    let reduced = instance.project(&kept_rows, &kept_attributes);
    let remap = |attr: AttrId| -> AttrId {
        AttrId(
            kept_attributes
                .binary_search(&attr)
                .expect("dependency attribute is kept"),
        )
    };
    let reduced_fds = FdSet::new(fds.iter().map(|fd| {
        FunctionalDependency::new(fd.lhs().iter().copied().map(remap), remap(fd.rhs()))
            .expect("non-empty lhs")
    }));

    let ones_positions = instance
        .positions()
        .filter(|p| !non_unique.contains(p))
        .collect();

    Subtable {
        plan: ReductionPlan {
            ones_positions,
            kept_rows,
            kept_attributes,
        },
        instance: reduced,
        fds: reduced_fds,
    }
}
