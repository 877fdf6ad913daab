//! Per-cell entropy results for a whole instance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dyadic::DyadicValue;
use crate::relation::{Instance, Position};

/// How a cell's value was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    /// Exact dyadic value; `value` is its nearest float.
    Exact { dyadic: DyadicValue },
    /// Monte Carlo estimate with its sampling provenance. `epsilon` and
    /// `delta` are absent when the iteration count was given explicitly.
    Mc {
        iterations: u64,
        seed: u64,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        epsilon: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        delta: Option<f64>,
    },
}

/// One cell of an [`EntropyMatrix`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellEntropy {
    pub value: f64,
    #[serde(flatten)]
    pub method: Method,
}

impl CellEntropy {
    pub fn exact(dyadic: DyadicValue) -> Self {
        CellEntropy {
            value: dyadic.to_f64(),
            method: Method::Exact { dyadic },
        }
    }

    pub fn preset_one() -> Self {
        CellEntropy::exact(DyadicValue::one())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("matrix shape mismatch: {0}")]
pub struct MatrixShapeError(pub String);

/// Entropy values for every position of an instance, in the instance's own
/// shape. Preset cells carry exact value one.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyMatrix {
    attributes: Vec<String>,
    row_ids: Vec<u32>,
    cells: Vec<Vec<CellEntropy>>,
}

impl EntropyMatrix {
    pub fn new(
        attributes: Vec<String>,
        row_ids: Vec<u32>,
        cells: Vec<Vec<CellEntropy>>,
    ) -> Result<Self, MatrixShapeError> {
        if cells.len() != row_ids.len() {
            return Err(MatrixShapeError(format!(
                "{} cell rows for {} row ids",
                cells.len(),
                row_ids.len()
            )));
        }
        if let Some(bad) = cells.iter().position(|row| row.len() != attributes.len()) {
            return Err(MatrixShapeError(format!(
                "row {} has {} cells for {} attributes",
                bad + 1,
                cells[bad].len(),
                attributes.len()
            )));
        }
        Ok(EntropyMatrix {
            attributes,
            row_ids,
            cells,
        })
    }

    /// Matrix of the instance's shape with every cell preset to exact one.
    pub fn all_ones(instance: &Instance) -> Self {
        EntropyMatrix {
            attributes: instance.schema().attributes().map(str::to_owned).collect(),
            row_ids: instance.row_ids().to_vec(),
            cells: vec![vec![CellEntropy::preset_one(); instance.arity()]; instance.n_rows()],
        }
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn row_ids(&self) -> &[u32] {
        &self.row_ids
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn get(&self, p: Position) -> Option<&CellEntropy> {
        let dense = self.row_ids.binary_search(&p.row).ok()?;
        self.cells.get(dense)?.get(p.attr.0)
    }

    pub(crate) fn set(&mut self, p: Position, cell: CellEntropy) {
        let dense = self
            .row_ids
            .binary_search(&p.row)
            .expect("position within matrix");
        self.cells[dense][p.attr.0] = cell;
    }

    /// Cell by storage index rather than row label.
    pub fn dense(&self, row: usize, attr: usize) -> &CellEntropy {
        &self.cells[row][attr]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[CellEntropy]> {
        self.cells.iter().map(Vec::as_slice)
    }

    /// Smallest entropy in the matrix; one for an empty matrix.
    pub fn min_value(&self) -> f64 {
        self.cells
            .iter()
            .flatten()
            .map(|c| c.value)
            .fold(1.0, f64::min)
    }

    pub(crate) fn into_cells(self) -> Vec<Vec<CellEntropy>> {
        self.cells
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_has_instance_shape() {
        let inst = Instance::from_string_rows(&["A", "B"], &[&["1", "2"], &["3", "4"]]).unwrap();
        let m = EntropyMatrix::all_ones(&inst);
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.arity(), 2);
        assert_eq!(m.min_value(), 1.0);
        assert!(m.rows().flatten().all(|c| c.value == 1.0));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let err = EntropyMatrix::new(
            vec!["A".into()],
            vec![1, 2],
            vec![vec![CellEntropy::preset_one()]],
        )
        .unwrap_err();
        assert!(err.to_string().contains("cell rows"));
    }
}
