//! Subtype filtering, row removal and gap imputation.

use super::record::{CellValue, Column, ColumnKind, GdscRecord};
use super::{DatasetError, DropReason, DroppedColumn, ImputedValue};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Default fraction of missing cells above which a column is dropped.
pub const DEFAULT_MISSING_THRESHOLD: f64 = 0.05;

/// Keep exactly the records whose `TCGA_DESC` is in `keep`, preserving order.
pub fn filter_subtypes(records: &[GdscRecord], keep: &BTreeSet<String>) -> Vec<GdscRecord> {
    records
        .iter()
        .filter(|r| r.tcga_desc.as_ref().is_some_and(|d| keep.contains(d)))
        .cloned()
        .collect()
}

/// What `clean` removed and filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanSummary {
    pub missing_threshold: f64,
    pub rows_in: usize,
    pub rows_without_target: usize,
    pub dropped_columns: Vec<DroppedColumn>,
    /// Mode (categorical) or mean (numeric) of every retained column.
    pub imputation_values: BTreeMap<Column, ImputedValue>,
}

/// Drop rows with no drug `TARGET`, drop columns whose missing fraction exceeds
/// `missing_threshold`, then fill the remaining gaps with the column mode
/// (categorical) or mean (numeric). Mode ties go to the lexicographically
/// smallest level.
///
/// Missing fractions are measured on the rows that survive the target rule.
pub fn clean(
    records: &[GdscRecord],
    missing_threshold: f64,
) -> Result<(Vec<GdscRecord>, CleanSummary), DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    if !(missing_threshold > 0.0 && missing_threshold < 1.0) {
        return Err(DatasetError::InvalidThreshold(missing_threshold));
    }

    let mut kept: Vec<GdscRecord> = records
        .iter()
        .filter(|r| r.target.is_some())
        .cloned()
        .collect();
    let rows_without_target = records.len() - kept.len();
    if kept.is_empty() {
        return Err(DatasetError::AllRowsDropped);
    }

    let n = kept.len() as f64;
    let mut dropped_columns = Vec::new();
    let mut imputation_values = BTreeMap::new();

    for column in Column::ALL {
        if column.kind() == ColumnKind::Response {
            continue;
        }
        let missing = kept.iter().filter(|r| r.is_missing(column)).count();
        let fraction = missing as f64 / n;
        if fraction > missing_threshold {
            dropped_columns.push(DroppedColumn {
                column,
                reason: DropReason::MissingFraction { fraction },
            });
            continue;
        }

        let fill = match column.kind() {
            ColumnKind::Categorical => ImputedValue::Text(column_mode(&kept, column)),
            _ => ImputedValue::Real(column_mean(&kept, column)),
        };
        if missing > 0 {
            for record in &mut kept {
                match &fill {
                    ImputedValue::Text(level) => {
                        if let Some(slot) = record.text_slot_mut(column) {
                            slot.get_or_insert_with(|| level.clone());
                        }
                    }
                    ImputedValue::Real(mean) => {
                        if let Some(slot) = record.real_slot_mut(column) {
                            slot.get_or_insert(*mean);
                        }
                    }
                }
            }
        }
        imputation_values.insert(column, fill);
    }

    let summary = CleanSummary {
        missing_threshold,
        rows_in: records.len(),
        rows_without_target,
        dropped_columns,
        imputation_values,
    };
    Ok((kept, summary))
}

fn column_mode(records: &[GdscRecord], column: Column) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        if let Some(CellValue::Text(t)) = r.get(column) {
            *counts.entry(t).or_default() += 1;
        }
    }
    let mut best: Option<(&str, usize)> = None;
    for (level, count) in counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((level, count));
        }
    }
    best.map(|(l, _)| l.to_string()).unwrap_or_default()
}

fn column_mean(records: &[GdscRecord], column: Column) -> f64 {
    let (sum, count) = records.iter().fold((0.0, 0usize), |(s, c), r| match r.get(column) {
        Some(CellValue::Real(v)) => (s + v, c + 1),
        _ => (s, c),
    });
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
