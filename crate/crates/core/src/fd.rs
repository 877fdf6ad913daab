//! Functional dependencies: parsing, validation, and satisfaction checking,
//! including the variable-aware semantics for instances with masked cells.
//!
//! A masked cell stands for a fresh variable distinct from every other
//! value, so it compares equal to nothing. A dependency constrains a row
//! pair only when both right-hand-side cells are unmasked, and a left-hand
//! side containing any masked cell matches no other left-hand side.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::relation::{AttrId, Instance, Mask, Position, Schema, ValueId};

/// Sentinel for the focus value when probing with a value that must not
/// compare equal to anything in its column. Dictionary ids never reach it.
pub(crate) const FRESH: ValueId = ValueId::MAX;

/// A dependency `A_1 .. A_s -> B` with a non-empty left-hand side and a
/// single right-hand attribute.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FunctionalDependency {
    lhs: Vec<AttrId>,
    rhs: AttrId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FdError {
    #[error("left-hand side must not be empty")]
    EmptyLhs,
}

impl FunctionalDependency {
    pub fn new(lhs: impl IntoIterator<Item = AttrId>, rhs: AttrId) -> Result<Self, FdError> {
        let mut lhs: Vec<AttrId> = lhs.into_iter().collect();
        lhs.sort_unstable();
        lhs.dedup();
        if lhs.is_empty() {
            return Err(FdError::EmptyLhs);
        }
        Ok(FunctionalDependency { lhs, rhs })
    }

    pub fn lhs(&self) -> &[AttrId] {
        &self.lhs
    }

    pub fn rhs(&self) -> AttrId {
        self.rhs
    }

    /// A dependency whose right-hand attribute also appears on the left can
    /// never be violated: equal left-hand sides already force equal
    /// right-hand cells.
    pub fn is_trivial(&self) -> bool {
        self.lhs.contains(&self.rhs)
    }

    pub fn display(&self, schema: &Schema) -> String {
        let lhs: Vec<&str> = self.lhs.iter().map(|&a| schema.attribute(a)).collect();
        format!("{} -> {}", lhs.join(", "), schema.attribute(self.rhs))
    }
}

/// A duplicate-free list of dependencies in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FdSet {
    fds: Vec<FunctionalDependency>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FdParseError {
    #[error("line {line}: unknown attribute `{name}`")]
    UnknownAttribute { line: usize, name: String },
    #[error("line {line}: left-hand side is empty")]
    EmptyLhs { line: usize },
    #[error("line {line}: right-hand side is empty")]
    EmptyRhs { line: usize },
    #[error("line {line}: expected exactly one `->`")]
    MalformedArrow { line: usize },
}

impl FdSet {
    pub fn new(fds: impl IntoIterator<Item = FunctionalDependency>) -> Self {
        let mut out = FdSet::default();
        for fd in fds {
            out.insert(fd);
        }
        out
    }

    fn insert(&mut self, fd: FunctionalDependency) {
        if !self.fds.contains(&fd) {
            self.fds.push(fd);
        }
    }

    /// Parses the one-dependency-per-line text format.
    ///
    /// Blank lines and `#` comments are ignored; a multi-attribute
    /// right-hand side `-> B, C` decomposes into one dependency per
    /// attribute.
    pub fn parse(source: &str, schema: &Schema) -> Result<Self, FdParseError> {
        let mut out = FdSet::default();
        for (idx, raw_line) in source.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut sides = content.split("->");
            let (lhs_text, rhs_text) = match (sides.next(), sides.next(), sides.next()) {
                (Some(l), Some(r), None) => (l, r),
                _ => return Err(FdParseError::MalformedArrow { line }),
            };
            let resolve = |name: &str| -> Result<AttrId, FdParseError> {
                schema
                    .attr_id(name)
                    .ok_or_else(|| FdParseError::UnknownAttribute {
                        line,
                        name: name.to_owned(),
                    })
            };
            let lhs: Vec<AttrId> = lhs_text
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(resolve)
                .collect::<Result<_, _>>()?;
            if lhs.is_empty() {
                return Err(FdParseError::EmptyLhs { line });
            }
            let rhs: Vec<AttrId> = rhs_text
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(resolve)
                .collect::<Result<_, _>>()?;
            if rhs.is_empty() {
                return Err(FdParseError::EmptyRhs { line });
            }
            for rhs_attr in rhs {
                out.insert(
                    FunctionalDependency::new(lhs.iter().copied(), rhs_attr)
                        .expect("non-empty lhs"),
                );
            }
        }
        Ok(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FunctionalDependency> {
        self.fds.iter()
    }

    pub fn len(&self) -> usize {
        self.fds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fds.is_empty()
    }

    pub fn union(&self, other: &FdSet) -> FdSet {
        FdSet::new(self.iter().chain(other.iter()).cloned())
    }

    pub(crate) fn max_attr(&self) -> Option<usize> {
        self.fds
            .iter()
            .flat_map(|fd| fd.lhs.iter().chain(std::iter::once(&fd.rhs)))
            .map(|a| a.0)
            .max()
    }
}

/// First dependency violation found in an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Rendered dependency, e.g. `A -> C`.
    pub fd: String,
    /// 1-based labels of the two conflicting rows.
    pub rows: (u32, u32),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dependency `{}` is violated by rows {} and {}",
            self.fd, self.rows.0, self.rows.1
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SatisfactionError {
    #[error("dependency references attribute index {attr}, but the schema has arity {arity}")]
    AttributeOutOfRange { attr: usize, arity: usize },
    #[error("{0}")]
    Violated(Violation),
}

fn validate_attrs(instance: &Instance, fds: &FdSet) -> Result<(), SatisfactionError> {
    if let Some(max) = fds.max_attr() {
        if max >= instance.arity() {
            return Err(SatisfactionError::AttributeOutOfRange {
                attr: max,
                arity: instance.arity(),
            });
        }
    }
    Ok(())
}

/// Checks `instance |= fds`, reporting the first violating dependency and
/// row pair in row order.
pub fn check_satisfaction(instance: &Instance, fds: &FdSet) -> Result<(), SatisfactionError> {
    validate_attrs(instance, fds)?;
    let rows = instance.rows_raw();
    for fd in fds.iter() {
        if fd.is_trivial() {
            continue;
        }
        // Group rows by left-hand projection; remember the first row of each
        // group so the reported pair is deterministic.
        let mut groups: HashMap<Vec<ValueId>, (usize, ValueId)> = HashMap::new();
        for (dense, row) in rows.iter().enumerate() {
            let key: Vec<ValueId> = fd.lhs.iter().map(|a| row[a.0]).collect();
            let rhs_val = row[fd.rhs.0];
            match groups.entry(key) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert((dense, rhs_val));
                }
                std::collections::hash_map::Entry::Occupied(e) => {
                    let &(first_dense, first_val) = e.get();
                    if first_val != rhs_val {
                        return Err(SatisfactionError::Violated(Violation {
                            fd: fd.display(instance.schema()),
                            rows: (
                                instance.row_ids()[first_dense],
                                instance.row_ids()[dense],
                            ),
                        }));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Core masked-satisfaction evaluator shared by the public check and the
/// entropy engines. `focus` substitutes a value at one dense cell; the
/// `is_masked` predicate is queried with dense row and attribute indices.
pub(crate) fn satisfies_masked_core<F>(
    rows: &[Vec<ValueId>],
    fds: &FdSet,
    focus: Option<(usize, usize, ValueId)>,
    is_masked: &F,
) -> bool
where
    F: Fn(usize, usize) -> bool,
{
    let value = |r: usize, a: usize| -> ValueId {
        match focus {
            Some((fr, fa, v)) if fr == r && fa == a => v,
            _ => rows[r][a],
        }
    };
    // Cells equal only when both are unmasked and hold the same id.
    let cells_equal = |r1: usize, r2: usize, a: usize| -> bool {
        !is_masked(r1, a) && !is_masked(r2, a) && value(r1, a) == value(r2, a)
    };

    for fd in fds.iter() {
        if fd.is_trivial() {
            continue;
        }
        let rhs = fd.rhs.0;
        if rows.len() <= 16 {
            for r1 in 0..rows.len() {
                for r2 in (r1 + 1)..rows.len() {
                    if is_masked(r1, rhs) || is_masked(r2, rhs) {
                        continue;
                    }
                    if value(r1, rhs) != value(r2, rhs)
                        && fd.lhs.iter().all(|a| cells_equal(r1, r2, a.0))
                    {
                        return false;
                    }
                }
            }
        } else {
            // Hash-group rows whose left-hand side is fully unmasked; within
            // a group every unmasked right-hand cell must agree.
            let mut groups: HashMap<Vec<ValueId>, ValueId> = HashMap::new();
            'row: for r in 0..rows.len() {
                let mut key = Vec::with_capacity(fd.lhs.len());
                for a in &fd.lhs {
                    if is_masked(r, a.0) {
                        continue 'row;
                    }
                    key.push(value(r, a.0));
                }
                if is_masked(r, rhs) {
                    continue;
                }
                let rhs_val = value(r, rhs);
                match groups.entry(key) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(rhs_val);
                    }
                    std::collections::hash_map::Entry::Occupied(e) => {
                        if *e.get() != rhs_val {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Evaluates `(I_{Q <- X})_{p <- v} |= F` under variable semantics, where
/// `Q` and `p` come from the mask.
///
/// The dependencies must have been resolved against this instance's schema;
/// out-of-range attributes are a caller bug and panic.
pub fn check_masked_satisfaction(
    instance: &Instance,
    mask: &Mask,
    value: ValueId,
    fds: &FdSet,
) -> bool {
    assert!(
        fds.max_attr().is_none_or(|m| m < instance.arity()),
        "dependency attribute outside schema"
    );
    let focus = mask.focus();
    let focus_dense = instance
        .dense_row(focus.row)
        .expect("mask validated against instance");
    let is_masked = |r: usize, a: usize| -> bool {
        mask.is_masked(Position::new(instance.row_ids()[r], AttrId(a)))
    };
    satisfies_masked_core(
        instance.rows_raw(),
        fds,
        Some((focus_dense, focus.attr.0, value)),
        &is_masked,
    )
}

/// True when no other row shares the left-hand projection of `p`'s row for
/// any non-trivial dependency whose right-hand side is `p`'s attribute.
/// Such cells always carry full information content.
pub fn is_unique(instance: &Instance, p: Position, fds: &FdSet) -> bool {
    assert!(instance.contains(p), "position outside instance");
    let dense = instance.dense_row(p.row).expect("checked above");
    let rows = instance.rows_raw();
    for fd in fds.iter() {
        if fd.rhs != p.attr || fd.is_trivial() {
            continue;
        }
        for (other, row) in rows.iter().enumerate() {
            if other != dense && fd.lhs.iter().all(|a| row[a.0] == rows[dense][a.0]) {
                return false;
            }
        }
    }
    true
}
