//! Relational instances with stable row order and dictionary-encoded values.
//!
//! An instance is a finite, ordered list of total tuples over a single
//! relation schema. Row labels are 1-based and survive projection, so a cell
//! keeps its identity when the instance is reduced to a subtable. Values are
//! dictionary-encoded per attribute: two cells compare equal exactly when
//! their raw strings are equal within the same column, which is the only
//! kind of equality dependency checking ever needs.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dictionary-assigned value identifier, always `>= 1`.
pub type ValueId = u32;

/// Index of an attribute within a [`Schema`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct AttrId(pub usize);

/// A single cell address: 1-based row label plus attribute.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Position {
    pub row: u32,
    pub attr: AttrId,
}

impl Position {
    pub fn new(row: u32, attr: AttrId) -> Self {
        Position { row, attr }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("attribute name at column {0} is empty")]
    EmptyName(usize),
    #[error("duplicate attribute name `{0}`")]
    DuplicateName(String),
}

/// Ordered list of distinct, non-empty attribute names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    attributes: Vec<String>,
}

impl Schema {
    pub fn new<S: Into<String>>(attributes: impl IntoIterator<Item = S>) -> Result<Self, SchemaError> {
        let attributes: Vec<String> = attributes.into_iter().map(Into::into).collect();
        let mut seen = HashMap::new();
        for (i, name) in attributes.iter().enumerate() {
            if name.is_empty() {
                return Err(SchemaError::EmptyName(i + 1));
            }
            if seen.insert(name.clone(), i).is_some() {
                return Err(SchemaError::DuplicateName(name.clone()));
            }
        }
        Ok(Schema { attributes })
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    /// Name of an attribute; panics on an out-of-range id.
    pub fn attribute(&self, id: AttrId) -> &str {
        &self.attributes[id.0]
    }

    pub fn attr_id(&self, name: &str) -> Option<AttrId> {
        self.attributes.iter().position(|a| a == name).map(AttrId)
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(String::as_str)
    }

    pub fn attr_ids(&self) -> impl Iterator<Item = AttrId> {
        (0..self.attributes.len()).map(AttrId)
    }
}

/// Per-attribute bidirectional map between raw strings and value ids.
#[derive(Clone, Debug, Default)]
struct Dictionary {
    values: Vec<String>,
    ids: HashMap<String, ValueId>,
}

impl Dictionary {
    fn encode(&mut self, raw: &str) -> ValueId {
        if let Some(&id) = self.ids.get(raw) {
            return id;
        }
        let id = (self.values.len() + 1) as ValueId;
        self.values.push(raw.to_owned());
        self.ids.insert(raw.to_owned(), id);
        id
    }

    fn decode(&self, id: ValueId) -> Option<&str> {
        if id == 0 {
            return None;
        }
        self.values.get(id as usize - 1).map(String::as_str)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("line {line}: row has {found} fields, expected {expected}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("input contains no records")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("position ({row}, attribute {attr}) is outside a {rows}x{arity} instance")]
pub struct PositionError {
    pub row: u32,
    pub attr: usize,
    pub rows: usize,
    pub arity: usize,
}

/// Options for [`Instance::ingest_csv`].
#[derive(Clone, Copy, Debug)]
pub struct IngestOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Keep only the first `n` data rows (applied after the header).
    pub limit_rows: Option<usize>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: b',',
            has_header: true,
            limit_rows: None,
        }
    }
}

/// An ordered, duplicate-tolerant relational instance.
#[derive(Clone, Debug)]
pub struct Instance {
    schema: Schema,
    rows: Vec<Vec<ValueId>>,
    /// Original 1-based row labels, strictly ascending.
    row_ids: Vec<u32>,
    dictionaries: Vec<Dictionary>,
}

impl Instance {
    /// Reads a delimited text stream into a dictionary-encoded instance.
    ///
    /// The empty string is an ordinary value. Without a header, attributes
    /// are named `col1..colN` after the first record's width.
    pub fn ingest_csv<R: Read>(source: R, options: &IngestOptions) -> Result<Self, IngestError> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(options.delimiter)
            .has_headers(false)
            .flexible(true)
            .from_reader(source);

        let mut records = reader.records();
        let first = match records.next() {
            Some(record) => record?,
            None => return Err(IngestError::Empty),
        };

        let (schema, seed_row) = if options.has_header {
            let schema = Schema::new(first.iter().map(str::to_owned))?;
            (schema, None)
        } else {
            let schema = Schema::new((1..=first.len()).map(|i| format!("col{i}")))?;
            (schema, Some(first))
        };

        let mut instance = Instance::empty(schema);
        let limit = options.limit_rows.unwrap_or(usize::MAX);

        let push = |instance: &mut Instance, record: csv::StringRecord| {
            if record.len() != instance.arity() {
                let line = record.position().map(|p| p.line()).unwrap_or(0);
                return Err(IngestError::RaggedRow {
                    line,
                    expected: instance.arity(),
                    found: record.len(),
                });
            }
            instance.push_row(record.iter());
            Ok(())
        };

        if let Some(record) = seed_row {
            if limit > 0 {
                push(&mut instance, record)?;
            }
        }
        while instance.n_rows() < limit {
            match records.next() {
                Some(record) => push(&mut instance, record?)?,
                None => break,
            }
        }
        Ok(instance)
    }

    /// Builds an instance from literal rows; handy for fixtures and docs.
    pub fn from_string_rows(
        attributes: &[&str],
        rows: &[&[&str]],
    ) -> Result<Self, IngestError> {
        let schema = Schema::new(attributes.iter().copied())?;
        let mut instance = Instance::empty(schema);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != instance.arity() {
                return Err(IngestError::RaggedRow {
                    line: (i + 2) as u64,
                    expected: instance.arity(),
                    found: row.len(),
                });
            }
            instance.push_row(row.iter().copied());
        }
        Ok(instance)
    }

    fn empty(schema: Schema) -> Self {
        let dictionaries = vec![Dictionary::default(); schema.arity()];
        Instance {
            schema,
            rows: Vec::new(),
            row_ids: Vec::new(),
            dictionaries,
        }
    }

    fn push_row<'a>(&mut self, fields: impl Iterator<Item = &'a str>) {
        let encoded: Vec<ValueId> = fields
            .enumerate()
            .map(|(a, raw)| self.dictionaries[a].encode(raw))
            .collect();
        debug_assert_eq!(encoded.len(), self.arity());
        self.rows.push(encoded);
        self.row_ids.push(self.row_ids.len() as u32 + 1);
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn arity(&self) -> usize {
        self.schema.arity()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_positions(&self) -> usize {
        self.n_rows() * self.arity()
    }

    /// Original 1-based labels of the rows, in storage order.
    pub fn row_ids(&self) -> &[u32] {
        &self.row_ids
    }

    /// All positions in row-major order.
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        self.row_ids.iter().flat_map(move |&row| {
            self.schema.attr_ids().map(move |attr| Position::new(row, attr))
        })
    }

    pub fn contains(&self, p: Position) -> bool {
        p.attr.0 < self.arity() && self.dense_row(p.row).is_some()
    }

    fn position_error(&self, p: Position) -> PositionError {
        PositionError {
            row: p.row,
            attr: p.attr.0,
            rows: self.n_rows(),
            arity: self.arity(),
        }
    }

    /// Storage index of the row with the given label, if present.
    pub(crate) fn dense_row(&self, row_label: u32) -> Option<usize> {
        self.row_ids.binary_search(&row_label).ok()
    }

    pub(crate) fn rows_raw(&self) -> &[Vec<ValueId>] {
        &self.rows
    }

    /// Value id stored at `p`.
    pub fn value_at(&self, p: Position) -> Result<ValueId, PositionError> {
        if p.attr.0 >= self.arity() {
            return Err(self.position_error(p));
        }
        let row = self.dense_row(p.row).ok_or_else(|| self.position_error(p))?;
        Ok(self.rows[row][p.attr.0])
    }

    /// Raw string stored at `p`.
    pub fn text_at(&self, p: Position) -> Result<&str, PositionError> {
        let id = self.value_at(p)?;
        Ok(self.decode(p.attr, id).expect("stored id decodes"))
    }

    pub fn decode(&self, attr: AttrId, id: ValueId) -> Option<&str> {
        self.dictionaries.get(attr.0)?.decode(id)
    }

    pub fn encode_lookup(&self, attr: AttrId, raw: &str) -> Option<ValueId> {
        self.dictionaries.get(attr.0)?.ids.get(raw).copied()
    }

    /// A value id strictly greater than every id used in the column, i.e.
    /// one that cannot compare equal to any present cell of that attribute.
    /// Deterministically `max + 1`, and `1` on an empty relation.
    pub fn fresh_value(&self, attr: AttrId) -> ValueId {
        assert!(attr.0 < self.arity(), "attribute out of range");
        self.rows
            .iter()
            .map(|row| row[attr.0])
            .max()
            .map_or(1, |max| max + 1)
    }

    /// Restriction to the given row labels and attributes, preserving row
    /// labels, per-attribute dictionaries and hence value ids.
    pub(crate) fn project(&self, row_labels: &[u32], attrs: &[AttrId]) -> Instance {
        let schema = Schema {
            attributes: attrs
                .iter()
                .map(|a| self.schema.attributes[a.0].clone())
                .collect(),
        };
        let dictionaries = attrs
            .iter()
            .map(|a| self.dictionaries[a.0].clone())
            .collect();
        let mut rows = Vec::with_capacity(row_labels.len());
        for &label in row_labels {
            let dense = self.dense_row(label).expect("projected row exists");
            rows.push(attrs.iter().map(|a| self.rows[dense][a.0]).collect());
        }
        Instance {
            schema,
            rows,
            row_ids: row_labels.to_vec(),
            dictionaries,
        }
    }

    /// Writes the instance back out as delimited text with a header row.
    pub fn write_csv<W: Write>(&self, out: W, delimiter: u8) -> csv::Result<()> {
        let mut writer = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
        writer.write_record(self.schema.attributes())?;
        for (dense, _) in self.rows.iter().enumerate() {
            let fields: Vec<&str> = (0..self.arity())
                .map(|a| {
                    self.dictionaries[a]
                        .decode(self.rows[dense][a])
                        .expect("stored id decodes")
                })
                .collect();
            writer.write_record(fields)?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MaskError {
    #[error("the focus position cannot be masked")]
    FocusMasked,
    #[error("masked {0}")]
    OutOfRange(PositionError),
}

/// A set `Q` of positions replaced by pairwise-distinct variables, together
/// with the focus position `p` that is never a member of `Q`.
///
/// A masked cell compares equal to nothing, not even another masked cell;
/// the representation never needs materialized variables because engines
/// only ever test cell equality.
#[derive(Clone, Debug)]
pub struct Mask {
    focus: Position,
    masked: Vec<Position>,
}

impl Mask {
    pub fn new(
        instance: &Instance,
        focus: Position,
        positions: impl IntoIterator<Item = Position>,
    ) -> Result<Self, MaskError> {
        if !instance.contains(focus) {
            return Err(MaskError::OutOfRange(instance.position_error(focus)));
        }
        let mut masked: Vec<Position> = Vec::new();
        for p in positions {
            if p == focus {
                return Err(MaskError::FocusMasked);
            }
            if !instance.contains(p) {
                return Err(MaskError::OutOfRange(instance.position_error(p)));
            }
            masked.push(p);
        }
        masked.sort_unstable();
        masked.dedup();
        Ok(Mask { focus, masked })
    }

    pub fn focus(&self) -> Position {
        self.focus
    }

    pub fn positions(&self) -> &[Position] {
        &self.masked
    }

    pub fn is_masked(&self, p: Position) -> bool {
        self.masked.binary_search(&p).is_ok()
    }
}
