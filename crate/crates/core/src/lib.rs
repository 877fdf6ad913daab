//! Per-cell information content of relational data under functional
//! dependencies.
//!
//! Given an instance and a set of dependencies it satisfies, every cell is
//! assigned a value in `[0, 1]`: one means the cell's value cannot be
//! inferred from the rest of the instance, lower values mean the
//! dependencies make the cell increasingly redundant. Shading the low
//! values over the table yields a "plaque test" that makes redundancy
//! visible at a glance.
//!
//! The crate provides:
//!
//! * [`relation`] — CSV ingestion into dictionary-encoded, order-preserving
//!   instances, and cell addressing.
//! * [`fd`] — dependency parsing and satisfaction checking, including the
//!   variable semantics for instances with masked cells.
//! * [`exact`] — exact engines: the definitional finite-domain entropy, a
//!   brute-force subset enumeration, and witness-set inclusion-exclusion.
//! * [`reduce`] — lossless shortcuts that preset unique cells to one and
//!   shrink the instance before any computation.
//! * [`mc`] — Hoeffding-planned Monte Carlo estimation with deterministic
//!   keyed substreams.
//! * [`report`] — heatmap, histogram, and matrix exports.
//!
//! ```
//! use plaque_core::{
//!     entropy_matrix_exact, EngineConfig, ExactStrategy, FdSet, Instance, Position,
//! };
//!
//! let instance = Instance::from_string_rows(
//!     &["A", "B", "C", "D"],
//!     &[
//!         &["7", "2", "8", "4"],
//!         &["5", "2", "8", "6"],
//!         &["7", "2", "8", "6"],
//!     ],
//! )?;
//! let fds = FdSet::parse("A -> C", instance.schema())?;
//!
//! let matrix = entropy_matrix_exact(
//!     &instance,
//!     &fds,
//!     ExactStrategy::Witness,
//!     &EngineConfig::default(),
//! )?;
//!
//! // Rows 1 and 3 share A = 7, so their C cells are mutually redundant.
//! let c = instance.schema().attr_id("C").unwrap();
//! assert_eq!(matrix.get(Position::new(1, c)).unwrap().value, 0.875);
//! assert_eq!(matrix.get(Position::new(2, c)).unwrap().value, 1.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod dyadic;
pub mod error;
pub mod exact;
pub mod fd;
pub mod matrix;
pub mod mc;
pub mod reduce;
pub mod relation;
pub mod report;

pub use dyadic::DyadicValue;
pub use error::EntropyError;
pub use exact::{
    conditional_entropy_finite_k, entropy_matrix_exact, entropy_matrix_exact_unoptimized,
    enumerate_witnesses, exact_entropy_naive, exact_entropy_witness, EngineConfig, ExactStrategy,
    FiniteKConfig, WitnessSet,
};
pub use fd::{
    check_masked_satisfaction, check_satisfaction, is_unique, FdParseError, FdSet,
    FunctionalDependency, SatisfactionError, Violation,
};
pub use matrix::{CellEntropy, EntropyMatrix, Method};
pub use mc::{
    entropy_matrix_auto, entropy_matrix_mc, estimate_entropy, plan_iterations, sample_indicator,
    McEstimate, McPlan, PlanError,
};
pub use reduce::{build_subtable, mark_unique_ones, ReductionPlan, Subtable};
pub use relation::{
    AttrId, IngestError, IngestOptions, Instance, Mask, Position, Schema, ValueId,
};
pub use report::{
    export_matrix_csv, export_matrix_json, export_values_csv, parse_matrix_csv,
    parse_matrix_json, render_heatmap, render_histogram, ColorScale, HeatmapOptions, ReportError,
    RunMeta,
};
