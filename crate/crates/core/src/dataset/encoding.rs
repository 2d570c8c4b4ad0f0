//! One-hot encoding schema fitted on cleaned records.

use super::clean::CleanSummary;
use super::record::{CellValue, Column, ColumnKind, GdscRecord};
use super::DatasetError;
use crate::matrix::DenseMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

/// Why a column was excluded from the feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DropReason {
    /// Unique identifier of a cell line or compound.
    Identifier,
    /// Alternative summary of the dose response; would leak the target.
    ResponseLeakage,
    /// Cancer-type label duplicating the subtype filter.
    CancerTypeLabel,
    /// More cells missing than the cleaning threshold allows.
    MissingFraction { fraction: f64 },
    /// Requested by the caller.
    Requested,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::Identifier => f.write_str("identifier column"),
            DropReason::ResponseLeakage => f.write_str("response-derived column (target leakage)"),
            DropReason::CancerTypeLabel => f.write_str("cancer-type label"),
            DropReason::MissingFraction { fraction } => {
                write!(f, "missing fraction {fraction:.4} above threshold")
            }
            DropReason::Requested => f.write_str("requested"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub column: Column,
    pub reason: DropReason,
}

/// Value used to fill gaps in a retained column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ImputedValue {
    Text(String),
    Real(f64),
}

/// Columns removed before encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropList(pub Vec<DroppedColumn>);

impl Default for DropList {
    /// Identifiers, AUC and Z_SCORE, and the cancer-type label columns.
    /// `DRUG_NAME`, `TARGET` and `TARGET_PATHWAY` stay in as predictors.
    fn default() -> Self {
        use Column::*;
        let mut drops = vec![];
        for c in [CosmicId, CellLineName, DrugId] {
            drops.push(DroppedColumn { column: c, reason: DropReason::Identifier });
        }
        for c in [Auc, ZScore] {
            drops.push(DroppedColumn { column: c, reason: DropReason::ResponseLeakage });
        }
        for c in [TcgaDesc, TissueDescriptor1, TissueDescriptor2, CancerType] {
            drops.push(DroppedColumn { column: c, reason: DropReason::CancerTypeLabel });
        }
        DropList(drops)
    }
}

impl DropList {
    /// The default list with `Z_SCORE` kept as a feature. Only useful to
    /// measure how much that column leaks the response.
    pub fn keeping_z_score() -> Self {
        let mut list = Self::default();
        list.0.retain(|d| d.column != Column::ZScore);
        list
    }

    pub fn contains(&self, column: Column) -> bool {
        self.0.iter().any(|d| d.column == column)
    }
}

/// Fitted mapping from raw records to the numeric design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSchema {
    /// Levels per categorical column, lexicographically sorted.
    pub categorical_levels: BTreeMap<Column, Vec<String>>,
    pub numeric_columns: Vec<Column>,
    pub dropped_columns: Vec<DroppedColumn>,
    pub imputation_values: BTreeMap<Column, ImputedValue>,
    pub target_column: Column,
}

/// Provenance of one encoded row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowId {
    /// Position in the encoded input.
    pub index: usize,
    pub cosmic_id: Option<String>,
    pub drug_id: Option<String>,
}

/// Encoded features plus their names and row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: DenseMatrix,
    pub feature_names: Vec<String>,
    pub row_ids: Vec<RowId>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select_rows(indices),
            feature_names: self.feature_names.clone(),
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }

    /// Write the matrix with a trailing `LN_IC50` column.
    pub fn write_csv<W: Write>(&self, out: W, target: &[f64]) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.feature_names.clone();
        header.push(Column::LnIc50.key().to_string());
        w.write_record(&header)?;
        for (row, y) in self.values.iter_rows().zip(target) {
            let cells: Vec<String> = row.iter().chain(std::iter::once(y)).map(|v| v.to_string()).collect();
            w.write_record(&cells)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A raw, pre-encoding value supplied for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Number(f64),
    Text(String),
}

/// Fit the encoding on cleaned records. Columns dropped by `clean` and by
/// `drop_list` are excluded; every other categorical column becomes a one-hot
/// group over the levels seen in `records`.
pub fn fit_encoding(
    records: &[GdscRecord],
    cleaned: &CleanSummary,
    drop_list: &DropList,
) -> Result<EncodingSchema, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let mut dropped_columns = cleaned.dropped_columns.clone();
    for d in &drop_list.0 {
        if !dropped_columns.iter().any(|e| e.column == d.column) {
            dropped_columns.push(d.clone());
        }
    }
    let is_dropped = |c: Column| dropped_columns.iter().any(|d| d.column == c);

    let mut categorical_levels = BTreeMap::new();
    let mut numeric_columns = Vec::new();
    for column in Column::ALL {
        if is_dropped(column) {
            continue;
        }
        match column.kind() {
            ColumnKind::Response => {}
            ColumnKind::Numeric => numeric_columns.push(column),
            ColumnKind::Categorical => {
                let levels: BTreeSet<&str> = records
                    .iter()
                    .filter_map(|r| match r.get(column) {
                        Some(CellValue::Text(t)) => Some(t),
                        _ => None,
                    })
                    .collect();
                categorical_levels.insert(column, levels.into_iter().map(String::from).collect());
            }
        }
    }

    let imputation_values = cleaned
        .imputation_values
        .iter()
        .filter(|(c, _)| !is_dropped(**c))
        .map(|(c, v)| (*c, v.clone()))
        .collect();

    Ok(EncodingSchema {
        categorical_levels,
        numeric_columns,
        dropped_columns,
        imputation_values,
        target_column: Column::LnIc50,
    })
}

enum Slot {
    OneHot { column: Column, offset: usize, levels: Vec<String> },
    Numeric { column: Column, offset: usize },
}

impl EncodingSchema {
    /// Encoded columns in order: `KEY=level` for one-hot groups, `KEY` for
    /// numeric pass-through columns, following export column order.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for column in self.feature_columns() {
            match self.categorical_levels.get(&column) {
                Some(levels) => names.extend(levels.iter().map(|l| format!("{}={}", column.key(), l))),
                None => names.push(column.key().to_string()),
            }
        }
        names
    }

    /// Raw columns that feed the encoder, in export order.
    pub fn feature_columns(&self) -> Vec<Column> {
        Column::ALL
            .into_iter()
            .filter(|c| self.categorical_levels.contains_key(c) || self.numeric_columns.contains(c))
            .collect()
    }

    pub fn n_features(&self) -> usize {
        self.categorical_levels.values().map(Vec::len).sum::<usize>() + self.numeric_columns.len()
    }

    fn slots(&self) -> Vec<Slot> {
        let mut offset = 0;
        let mut slots = Vec::new();
        for column in self.feature_columns() {
            if let Some(levels) = self.categorical_levels.get(&column) {
                slots.push(Slot::OneHot { column, offset, levels: levels.clone() });
                offset += levels.len();
            } else {
                slots.push(Slot::Numeric { column, offset });
                offset += 1;
            }
        }
        slots
    }

    /// Encode cleaned records. Levels not seen at fit time encode as an
    /// all-zero group.
    pub fn encode(&self, records: &[GdscRecord]) -> Result<(FeatureMatrix, Vec<f64>), DatasetError> {
        let width = self.n_features();
        let slots = self.slots();
        let mut data = vec![0.0; records.len() * width];
        let mut row_ids = Vec::with_capacity(records.len());
        let mut target = Vec::with_capacity(records.len());

        for (i, record) in records.iter().enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            for slot in &slots {
                match slot {
                    Slot::OneHot { column, offset, levels } => match record.get(*column) {
                        Some(CellValue::Text(t)) => {
                            if let Ok(pos) = levels.binary_search_by(|l| l.as_str().cmp(t)) {
                                row[offset + pos] = 1.0;
                            }
                        }
                        _ => return Err(mismatch(i, *column)),
                    },
                    Slot::Numeric { column, offset } => match record.get(*column) {
                        Some(CellValue::Real(v)) if v.is_finite() => row[*offset] = v,
                        _ => return Err(mismatch(i, *column)),
                    },
                }
            }
            row_ids.push(RowId {
                index: i,
                cosmic_id: record.cosmic_id.clone(),
                drug_id: record.drug_id.clone(),
            });
            target.push(record.ln_ic50);
        }

        Ok((
            FeatureMatrix {
                values: DenseMatrix::new(records.len(), width, data),
                feature_names: self.feature_names(),
                row_ids,
            },
            target,
        ))
    }

    /// Encode a single column→value assignment keyed by column keys
    /// (e.g. `{"DRUG_NAME": "Erlotinib", "MSI": "MSS/MSI-L"}`).
    pub fn encode_assignment(&self, values: &BTreeMap<String, RawValue>) -> Result<Vec<f64>, DatasetError> {
        let columns = self.feature_columns();
        for key in values.keys() {
            if !Column::from_key(key).is_some_and(|c| columns.contains(&c)) {
                return Err(DatasetError::UnknownColumn(key.clone()));
            }
        }
        let mut row = vec![0.0; self.n_features()];
        for slot in self.slots() {
            match slot {
                Slot::OneHot { column, offset, levels } => {
                    let level = match values.get(column.key()) {
                        Some(RawValue::Text(t)) => t.clone(),
                        Some(RawValue::Number(v)) => v.to_string(),
                        None => return Err(DatasetError::SchemaMismatch { row: 0, column }),
                    };
                    if let Ok(pos) = levels.binary_search(&level) {
                        row[offset + pos] = 1.0;
                    }
                }
                Slot::Numeric { column, offset } => {
                    let v = match values.get(column.key()) {
                        Some(RawValue::Number(v)) => *v,
                        Some(RawValue::Text(t)) => t.trim().parse::<f64>().map_err(|_| {
                            DatasetError::InvalidValue { column, value: t.clone() }
                        })?,
                        None => return Err(DatasetError::SchemaMismatch { row: 0, column }),
                    };
                    if !v.is_finite() {
                        return Err(DatasetError::InvalidValue { column, value: v.to_string() });
                    }
                    row[offset] = v;
                }
            }
        }
        Ok(row)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        serde_json::from_str(text).map_err(|e| DatasetError::InvalidSchema(e.to_string()))
    }
}

fn mismatch(row: usize, column: Column) -> DatasetError {
    DatasetError::SchemaMismatch { row, column }
}

/// Levels per one-hot column plus the numeric columns.
pub type DecodedColumns = (BTreeMap<Column, Vec<String>>, Vec<Column>);

/// Recover the per-column level structure from encoded feature names.
pub fn decode_feature_names(names: &[String]) -> Result<DecodedColumns, DatasetError> {
    let mut levels: BTreeMap<Column, Vec<String>> = BTreeMap::new();
    let mut numeric = Vec::new();
    for name in names {
        let (key, level) = match name.split_once('=') {
            Some((k, l)) => (k, Some(l)),
            None => (name.as_str(), None),
        };
        let column = Column::from_key(key).ok_or_else(|| DatasetError::UnknownColumn(key.to_string()))?;
        match level {
            Some(l) => levels.entry(column).or_default().push(l.to_string()),
            None => numeric.push(column),
        }
    }
    Ok((levels, numeric))
}
