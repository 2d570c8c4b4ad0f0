//! Shared inputs for the benchmarks.

use drugshap_core::dataset::synthetic::{generate, SyntheticConfig};
use drugshap_core::pipeline::{prepare, PrepareOptions, PreparedData};

/// Encoded synthetic screen of `cell_lines` lung lines by `drugs` drugs.
pub fn screen(cell_lines: usize, drugs: usize) -> PreparedData {
    let config = SyntheticConfig { lung_cell_lines: cell_lines, other_cell_lines: 0, drugs, ..Default::default() };
    prepare(&generate(&config), &PrepareOptions::default()).expect("synthetic screen prepares")
}
