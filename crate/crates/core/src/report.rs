//! Report generation: the heatmap overlay, entropy histograms, and
//! machine-readable matrix exports.
//!
//! The heatmap is a single self-contained HTML file with inline styles.
//! Colors are calibrated per dataset: entropy one renders white and the
//! dataset minimum renders the darkest blue, linearly in between, so hues
//! from different datasets are not comparable.

use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{CellEntropy, EntropyMatrix};
use crate::relation::Instance;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("matrix does not match the instance: {0}")]
    DimensionMismatch(String),
    #[error("unsupported matrix document version {0}")]
    Version(u32),
    #[error("parse: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

const WHITE: [u8; 3] = [255, 255, 255];
const DARKEST_BLUE: [u8; 3] = [8, 48, 107];

/// Per-dataset linear color ramp: one maps to white, the dataset minimum to
/// the darkest blue.
#[derive(Clone, Copy, Debug)]
pub struct ColorScale {
    min_entropy: f64,
}

impl ColorScale {
    pub fn new(min_entropy: f64) -> Self {
        ColorScale {
            min_entropy: min_entropy.clamp(0.0, 1.0),
        }
    }

    pub fn for_matrix(matrix: &EntropyMatrix) -> Self {
        ColorScale::new(matrix.min_value())
    }

    pub fn min_entropy(&self) -> f64 {
        self.min_entropy
    }

    /// All cells carry entropy one, so there is nothing to shade.
    pub fn is_degenerate(&self) -> bool {
        self.min_entropy >= 1.0
    }

    pub fn color(&self, value: f64) -> [u8; 3] {
        if self.is_degenerate() {
            return WHITE;
        }
        let t = ((1.0 - value) / (1.0 - self.min_entropy)).clamp(0.0, 1.0);
        let mut rgb = [0u8; 3];
        for (out, (&w, &d)) in rgb.iter_mut().zip(WHITE.iter().zip(DARKEST_BLUE.iter())) {
            *out = (f64::from(w) + t * (f64::from(d) - f64::from(w))).round() as u8;
        }
        rgb
    }

    pub fn css_color(&self, value: f64) -> String {
        let [r, g, b] = self.color(value);
        format!("#{r:02x}{g:02x}{b:02x}")
    }
}

#[derive(Clone, Debug)]
pub struct HeatmapOptions {
    pub title: String,
}

impl Default for HeatmapOptions {
    fn default() -> Self {
        HeatmapOptions {
            title: "Plaque test".to_owned(),
        }
    }
}

fn escape_html(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn ensure_matching(instance: &Instance, matrix: &EntropyMatrix) -> Result<(), ReportError> {
    let attrs_match = instance.arity() == matrix.arity()
        && instance
            .schema()
            .attributes()
            .zip(matrix.attributes())
            .all(|(a, b)| a == b);
    if !attrs_match || instance.row_ids() != matrix.row_ids() {
        return Err(ReportError::DimensionMismatch(format!(
            "instance is {}x{}, matrix is {}x{}",
            instance.n_rows(),
            instance.arity(),
            matrix.n_rows(),
            matrix.arity()
        )));
    }
    Ok(())
}

/// Renders the instance as a standalone HTML table with the original cell
/// values as text, backgrounds colored by entropy, and the numeric value in
/// a hover tooltip. Byte-for-byte deterministic for a given matrix.
pub fn render_heatmap(
    instance: &Instance,
    matrix: &EntropyMatrix,
    options: &HeatmapOptions,
) -> Result<String, ReportError> {
    ensure_matching(instance, matrix)?;
    let scale = ColorScale::for_matrix(matrix);
    let title = escape_html(&options.title);

    let mut html = String::new();
    html.push_str("<!doctype html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str(&format!("<title>{title}</title>\n"));
    html.push_str("<style>\n");
    html.push_str("body { font-family: sans-serif; margin: 1.5em; }\n");
    html.push_str("table { border-collapse: collapse; }\n");
    html.push_str("th, td { border: 1px solid #c8c8c8; padding: 2px 8px; font-size: 13px; }\n");
    html.push_str("th { background: #f0f0f0; }\n");
    html.push_str(".legend { margin: 0.8em 0; font-size: 13px; }\n");
    html.push_str(".swatch { display: inline-block; width: 1.2em; height: 1em; border: 1px solid #c8c8c8; vertical-align: middle; }\n");
    html.push_str("</style>\n</head>\n<body>\n");
    html.push_str(&format!("<h1>{title}</h1>\n"));

    html.push_str("<div class=\"legend\">");
    if scale.is_degenerate() {
        html.push_str("no plaque detected: every cell has entropy 1.00");
    } else {
        html.push_str(&format!(
            "entropy 1.00 <span class=\"swatch\" style=\"background-color:{}\"></span>",
            scale.css_color(1.0)
        ));
        for step in 1..=4 {
            let v = 1.0 - (1.0 - scale.min_entropy()) * f64::from(step) / 4.0;
            html.push_str(&format!(
                " <span class=\"swatch\" style=\"background-color:{}\"></span>",
                scale.css_color(v)
            ));
        }
        html.push_str(&format!(
            " minimum {:.2}; colors are scaled to this dataset's minimum",
            scale.min_entropy()
        ));
    }
    html.push_str("</div>\n");

    html.push_str("<table>\n<tr>");
    for name in matrix.attributes() {
        html.push_str(&format!("<th>{}</th>", escape_html(name)));
    }
    html.push_str("</tr>\n");
    for (dense, &row_id) in matrix.row_ids().iter().enumerate() {
        html.push_str("<tr>");
        for attr in instance.schema().attr_ids() {
            let cell = matrix.dense(dense, attr.0);
            let text = instance
                .text_at(crate::relation::Position::new(row_id, attr))
                .expect("dimensions checked");
            html.push_str(&format!(
                "<td style=\"background-color:{}\" title=\"{:.2}\">{}</td>",
                scale.css_color(cell.value),
                cell.value,
                escape_html(text)
            ));
        }
        html.push_str("</tr>\n");
    }
    html.push_str("</table>\n</body>\n</html>\n");
    Ok(html)
}

/// Histogram over all cell entropies as `bin_lower,bin_upper,count` CSV.
/// Bins partition `[0, 1]` left-closed, with the final bin closed on both
/// ends; counts always sum to the number of positions.
pub fn render_histogram(matrix: &EntropyMatrix, bins: NonZeroUsize) -> String {
    let bins = bins.get();
    let mut counts = vec![0usize; bins];
    for row in matrix.rows() {
        for cell in row {
            let idx = ((cell.value * bins as f64).floor() as usize).min(bins - 1);
            counts[idx] += 1;
        }
    }
    let mut out = String::from("bin_lower,bin_upper,count\n");
    for (i, count) in counts.iter().enumerate() {
        let lower = i as f64 / bins as f64;
        let upper = (i + 1) as f64 / bins as f64;
        out.push_str(&format!("{lower},{upper},{count}\n"));
    }
    out
}

/// Run-level provenance embedded in the JSON export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub mode: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<u64>,
    /// Hex digest of the dependency file the matrix was computed under.
    pub fd_digest: String,
}

const MATRIX_DOC_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct MatrixDocument {
    version: u32,
    attributes: Vec<String>,
    row_ids: Vec<u32>,
    min_entropy: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    meta: Option<RunMeta>,
    cells: Vec<Vec<CellEntropy>>,
}

/// Entropy values in the table's own shape, as CSV with the attribute
/// header. Full float precision; shortest round-trip formatting keeps the
/// bytes deterministic.
pub fn export_matrix_csv(matrix: &EntropyMatrix) -> String {
    if matrix.arity() == 0 {
        return String::new();
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(matrix.attributes())
        .expect("writing to memory");
    for row in matrix.rows() {
        writer
            .write_record(row.iter().map(|c| c.value.to_string()))
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory"))
        .expect("csv output is utf-8")
}

/// Parses a values-only CSV export back into attribute names and values.
pub fn parse_matrix_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), ReportError> {
    if text.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| ReportError::Parse("missing header".into()))?
        .map_err(|e| ReportError::Parse(e.to_string()))?;
    let attributes: Vec<String> = header.iter().map(str::to_owned).collect();
    let mut values = Vec::new();
    for record in records {
        let record = record.map_err(|e| ReportError::Parse(e.to_string()))?;
        let row: Vec<f64> = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|e| ReportError::Parse(format!("bad value `{field}`: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != attributes.len() {
            return Err(ReportError::Parse("ragged matrix row".into()));
        }
        values.push(row);
    }
    Ok((attributes, values))
}

/// Re-serializes parsed CSV values; `export -> parse -> export` is
/// byte-identical.
pub fn export_values_csv(attributes: &[String], values: &[Vec<f64>]) -> String {
    if attributes.is_empty() {
        return String::new();
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(attributes).expect("writing to memory");
    for row in values {
        writer
            .write_record(row.iter().map(f64::to_string))
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory"))
        .expect("csv output is utf-8")
}

/// Full-fidelity JSON export: per-cell values with method and provenance,
/// plus run metadata. The schema carries a version field.
pub fn export_matrix_json(matrix: &EntropyMatrix, meta: Option<&RunMeta>) -> String {
    let doc = MatrixDocument {
        version: MATRIX_DOC_VERSION,
        attributes: matrix.attributes().to_vec(),
        row_ids: matrix.row_ids().to_vec(),
        min_entropy: matrix.min_value(),
        meta: meta.cloned(),
        cells: matrix.clone().into_cells(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("matrix serializes");
    text.push('\n');
    text
}

pub fn parse_matrix_json(text: &str) -> Result<(EntropyMatrix, Option<RunMeta>), ReportError> {
    let doc: MatrixDocument = serde_json::from_str(text)?;
    if doc.version != MATRIX_DOC_VERSION {
        return Err(ReportError::Version(doc.version));
    }
    let matrix = EntropyMatrix::new(doc.attributes, doc.row_ids, doc.cells)
        .map_err(|e| ReportError::Parse(e.to_string()))?;
    Ok((matrix, doc.meta))
}
