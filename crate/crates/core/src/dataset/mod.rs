//! GDSC ingestion: parsing, subtype filtering, cleaning, one-hot encoding and
//! hold-out splitting.

mod clean;
mod encoding;
mod parse;
mod record;
mod split;
pub mod synthetic;

pub use clean::{clean, filter_subtypes, CleanSummary, DEFAULT_MISSING_THRESHOLD};
pub use encoding::{
    decode_feature_names, fit_encoding, DecodedColumns, DropList, DropReason, DroppedColumn, EncodingSchema,
    FeatureMatrix, ImputedValue, RawValue, RowId,
};
pub use parse::{parse_gdsc, write_gdsc_csv, SchemaConfig};
pub use record::{CellValue, Column, ColumnKind, GdscRecord};
pub use split::{test_size, train_test_split, SplitPair, Subset};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing column {0:?} in CSV header")]
    MissingColumn(String),
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("no record survived cleaning")]
    AllRowsDropped,
    #[error("empty input")]
    EmptyInput,
    #[error("missing threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("record {row} has no value for schema column {column}")]
    SchemaMismatch { row: usize, column: Column },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("invalid value {value:?} for column {column}")]
    InvalidValue { column: Column, value: String },
    #[error("test fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("too few rows to split ({rows})")]
    TooFewRows { rows: usize },
    #[error("matrix has {rows} rows but {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("invalid schema document: {0}")]
    InvalidSchema(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
