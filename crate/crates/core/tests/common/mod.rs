//! Shared generators for the randomized corpus: tiny instances with small
//! value domains plus dependency sets filtered down to the satisfied ones.

// Each test target compiles its own copy and uses a different subset.
#![allow(dead_code)]

use plaque_core::{check_satisfaction, AttrId, FdSet, FunctionalDependency, Instance};
use proptest::prelude::*;

pub const ATTR_NAMES: [&str; 4] = ["A", "B", "C", "D"];

/// Raw material for one corpus case: a value grid and candidate
/// dependencies given as `(lhs attribute indices, rhs attribute index)`.
pub type RawCase = (Vec<Vec<u8>>, Vec<(Vec<usize>, usize)>);

/// Instances of up to `max_rows x max_attrs` cells with values in `{1..3}`
/// and up to three candidate dependencies.
pub fn raw_case(max_rows: usize, max_attrs: usize) -> impl Strategy<Value = RawCase> {
    (1..=max_rows, 1..=max_attrs).prop_flat_map(|(rows, attrs)| {
        let grid = prop::collection::vec(
            prop::collection::vec(1..=3u8, attrs..=attrs),
            rows..=rows,
        );
        let fds = prop::collection::vec(
            (prop::collection::vec(0..attrs, 1..=attrs), 0..attrs),
            0..=3,
        );
        (grid, fds)
    })
}

pub fn build_instance(grid: &[Vec<u8>]) -> Instance {
    let attrs: Vec<&str> = ATTR_NAMES[..grid[0].len()].to_vec();
    let rows: Vec<Vec<String>> = grid
        .iter()
        .map(|row| row.iter().map(|v| format!("v{v}")).collect())
        .collect();
    let row_refs: Vec<Vec<&str>> = rows
        .iter()
        .map(|row| row.iter().map(String::as_str).collect())
        .collect();
    let slices: Vec<&[&str]> = row_refs.iter().map(Vec::as_slice).collect();
    Instance::from_string_rows(&attrs, &slices).unwrap()
}

/// Builds the dependency set from the candidates the instance satisfies,
/// checked one dependency at a time.
pub fn satisfied_fds(instance: &Instance, candidates: &[(Vec<usize>, usize)]) -> FdSet {
    let kept = candidates.iter().filter_map(|(lhs, rhs)| {
        let fd =
            FunctionalDependency::new(lhs.iter().map(|&a| AttrId(a)), AttrId(*rhs)).ok()?;
        check_satisfaction(instance, &FdSet::new([fd.clone()]))
            .is_ok()
            .then_some(fd)
    });
    FdSet::new(kept)
}

/// All dependencies from the candidates, satisfied or not.
pub fn unfiltered_fds(candidates: &[(Vec<usize>, usize)]) -> FdSet {
    FdSet::new(candidates.iter().filter_map(|(lhs, rhs)| {
        FunctionalDependency::new(lhs.iter().map(|&a| AttrId(a)), AttrId(*rhs)).ok()
    }))
}
