//! CSV ingestion of GDSC exports.

use super::record::{Column, GdscRecord};
use super::DatasetError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Read;

/// Maps each logical column to the header text expected in the CSV.
///
/// Header matching ignores ASCII case and surrounding whitespace. A column's
/// short key (e.g. `MSI`) is always accepted as an alias for its header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub headers: BTreeMap<Column, String>,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        Self {
            headers: Column::ALL
                .into_iter()
                .map(|c| (c, c.default_header().to_string()))
                .collect(),
        }
    }
}

impl SchemaConfig {
    fn header_for(&self, column: Column) -> &str {
        self.headers
            .get(&column)
            .map(String::as_str)
            .unwrap_or_else(|| column.default_header())
    }

    /// Resolve every column to its position in `header`.
    fn resolve(&self, header: &csv::StringRecord) -> Result<BTreeMap<Column, usize>, DatasetError> {
        let normalized: Vec<String> = header.iter().map(normalize).collect();
        let mut positions = BTreeMap::new();
        for column in Column::ALL {
            let wanted = normalize(self.header_for(column));
            let alias = normalize(column.key());
            match normalized.iter().position(|h| *h == wanted || *h == alias) {
                Some(idx) => {
                    positions.insert(column, idx);
                }
                None if column.is_optional_header() => {}
                None => {
                    return Err(DatasetError::MissingColumn(
                        self.header_for(column).to_string(),
                    ))
                }
            }
        }
        Ok(positions)
    }
}

fn normalize(s: &str) -> String {
    s.trim().to_ascii_lowercase()
}

fn text(cell: &str) -> Option<String> {
    let t = cell.trim();
    (!t.is_empty()).then(|| t.to_string())
}

fn real(cell: &str, line: u64, column: Column) -> Result<Option<f64>, DatasetError> {
    let t = cell.trim();
    if t.is_empty() {
        return Ok(None);
    }
    t.parse::<f64>()
        .map(Some)
        .map_err(|_| DatasetError::MalformedRow {
            line,
            reason: format!("column {column}: cannot parse {t:?} as a number"),
        })
}

/// Parse an RFC-4180 CSV stream into records.
pub fn parse_gdsc<R: Read>(source: R, config: &SchemaConfig) -> Result<Vec<GdscRecord>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(source);
    let header = reader
        .headers()
        .map_err(|e| DatasetError::MalformedRow { line: 1, reason: e.to_string() })?
        .clone();
    let positions = config.resolve(&header)?;

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| DatasetError::MalformedRow {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let cell = |c: Column| positions.get(&c).and_then(|&i| row.get(i)).unwrap_or("");

        let ln_ic50 = match real(cell(Column::LnIc50), line, Column::LnIc50)? {
            Some(v) if v.is_finite() => v,
            Some(v) => {
                return Err(DatasetError::MalformedRow {
                    line,
                    reason: format!("LN_IC50 is not finite ({v})"),
                })
            }
            None => {
                return Err(DatasetError::MalformedRow {
                    line,
                    reason: "LN_IC50 is empty".to_string(),
                })
            }
        };

        let mut record = GdscRecord {
            ln_ic50,
            auc: real(cell(Column::Auc), line, Column::Auc)?,
            z_score: real(cell(Column::ZScore), line, Column::ZScore)?,
            ..GdscRecord::default()
        };
        for column in Column::ALL {
            if let Some(slot) = record.text_slot_mut(column) {
                *slot = text(cell(column));
            }
        }
        records.push(record);
    }
    Ok(records)
}

/// Write records with the default GDSC header row.
pub fn write_gdsc_csv<W: std::io::Write>(records: &[GdscRecord], out: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(Column::ALL.iter().map(|c| c.default_header()))?;
    for r in records {
        let cells: Vec<String> = Column::ALL
            .iter()
            .map(|&c| match c {
                Column::LnIc50 => r.ln_ic50.to_string(),
                Column::Auc => r.auc.map(|v| v.to_string()).unwrap_or_default(),
                Column::ZScore => r.z_score.map(|v| v.to_string()).unwrap_or_default(),
                other => r.text_slot(other).cloned().flatten().unwrap_or_default(),
            })
            .collect();
        w.write_record(&cells)?;
    }
    w.flush()?;
    Ok(())
}
