//! Raw GDSC screen rows and the column vocabulary used to address them.

use serde::{Deserialize, Serialize};
use std::fmt;

/// How a column participates in modeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Free-text or categorical value; one-hot encoded when retained.
    Categorical,
    /// Real-valued column other than the response.
    Numeric,
    /// The regression response (LN_IC50).
    Response,
}

/// The 19 columns of a GDSC drug-response export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Column {
    #[serde(rename = "COSMIC_ID")]
    CosmicId,
    #[serde(rename = "CELL_LINE_NAME")]
    CellLineName,
    #[serde(rename = "TCGA_DESC")]
    TcgaDesc,
    #[serde(rename = "DRUG_ID")]
    DrugId,
    #[serde(rename = "DRUG_NAME")]
    DrugName,
    #[serde(rename = "LN_IC50")]
    LnIc50,
    #[serde(rename = "AUC")]
    Auc,
    #[serde(rename = "Z_SCORE")]
    ZScore,
    #[serde(rename = "TISSUE_DESCRIPTOR_1")]
    TissueDescriptor1,
    #[serde(rename = "TISSUE_DESCRIPTOR_2")]
    TissueDescriptor2,
    #[serde(rename = "CANCER_TYPE")]
    CancerType,
    #[serde(rename = "MSI")]
    Msi,
    #[serde(rename = "SCREEN_MEDIUM")]
    ScreenMedium,
    #[serde(rename = "GROWTH_PROPERTIES")]
    GrowthProperties,
    #[serde(rename = "CNA")]
    Cna,
    #[serde(rename = "GENE_EXPRESSION")]
    GeneExpression,
    #[serde(rename = "METHYLATION")]
    Methylation,
    #[serde(rename = "TARGET")]
    Target,
    #[serde(rename = "TARGET_PATHWAY")]
    TargetPathway,
}

impl Column {
    /// All columns in export order.
    pub const ALL: [Column; 19] = [
        Column::CosmicId,
        Column::CellLineName,
        Column::TcgaDesc,
        Column::DrugId,
        Column::DrugName,
        Column::LnIc50,
        Column::Auc,
        Column::ZScore,
        Column::TissueDescriptor1,
        Column::TissueDescriptor2,
        Column::CancerType,
        Column::Msi,
        Column::ScreenMedium,
        Column::GrowthProperties,
        Column::Cna,
        Column::GeneExpression,
        Column::Methylation,
        Column::Target,
        Column::TargetPathway,
    ];

    /// Short stable key used in schemas and encoded feature names.
    pub fn key(self) -> &'static str {
        match self {
            Column::CosmicId => "COSMIC_ID",
            Column::CellLineName => "CELL_LINE_NAME",
            Column::TcgaDesc => "TCGA_DESC",
            Column::DrugId => "DRUG_ID",
            Column::DrugName => "DRUG_NAME",
            Column::LnIc50 => "LN_IC50",
            Column::Auc => "AUC",
            Column::ZScore => "Z_SCORE",
            Column::TissueDescriptor1 => "TISSUE_DESCRIPTOR_1",
            Column::TissueDescriptor2 => "TISSUE_DESCRIPTOR_2",
            Column::CancerType => "CANCER_TYPE",
            Column::Msi => "MSI",
            Column::ScreenMedium => "SCREEN_MEDIUM",
            Column::GrowthProperties => "GROWTH_PROPERTIES",
            Column::Cna => "CNA",
            Column::GeneExpression => "GENE_EXPRESSION",
            Column::Methylation => "METHYLATION",
            Column::Target => "TARGET",
            Column::TargetPathway => "TARGET_PATHWAY",
        }
    }

    /// Header text used by the public GDSC export.
    pub fn default_header(self) -> &'static str {
        match self {
            Column::TissueDescriptor1 => "GDSC Tissue descriptor 1",
            Column::TissueDescriptor2 => "GDSC Tissue descriptor 2",
            Column::CancerType => "Cancer Type (matching TCGA label)",
            Column::Msi => "Microsatellite instability Status (MSI)",
            Column::ScreenMedium => "Screen Medium",
            Column::GrowthProperties => "Growth Properties",
            Column::GeneExpression => "Gene Expression",
            Column::Methylation => "Methylation",
            other => other.key(),
        }
    }

    pub fn from_key(key: &str) -> Option<Column> {
        Column::ALL.into_iter().find(|c| c.key() == key)
    }

    pub fn kind(self) -> ColumnKind {
        match self {
            Column::LnIc50 => ColumnKind::Response,
            Column::Auc | Column::ZScore => ColumnKind::Numeric,
            _ => ColumnKind::Categorical,
        }
    }

    /// Columns that may be absent from a header without aborting ingestion.
    pub fn is_optional_header(self) -> bool {
        matches!(
            self,
            Column::TissueDescriptor1 | Column::TissueDescriptor2 | Column::CancerType
        )
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A cell value addressed by column.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue<'a> {
    Text(&'a str),
    Real(f64),
}

/// One row of the pharmacogenomic screen: a cell line exposed to a drug.
///
/// Every field except `ln_ic50` is optional so that the cleaning pass can
/// treat gaps uniformly; empty CSV cells become `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GdscRecord {
    pub cosmic_id: Option<String>,
    pub cell_line_name: Option<String>,
    pub tcga_desc: Option<String>,
    pub drug_id: Option<String>,
    pub drug_name: Option<String>,
    pub ln_ic50: f64,
    pub auc: Option<f64>,
    pub z_score: Option<f64>,
    pub tissue_descriptor_1: Option<String>,
    pub tissue_descriptor_2: Option<String>,
    pub cancer_type: Option<String>,
    pub msi_status: Option<String>,
    pub screen_medium: Option<String>,
    pub growth_properties: Option<String>,
    pub cna: Option<String>,
    pub gene_expression: Option<String>,
    pub methylation: Option<String>,
    pub target: Option<String>,
    pub target_pathway: Option<String>,
}

impl GdscRecord {
    /// Text slot for a categorical column, `None` for numeric columns.
    pub fn text_slot(&self, column: Column) -> Option<&Option<String>> {
        Some(match column {
            Column::CosmicId => &self.cosmic_id,
            Column::CellLineName => &self.cell_line_name,
            Column::TcgaDesc => &self.tcga_desc,
            Column::DrugId => &self.drug_id,
            Column::DrugName => &self.drug_name,
            Column::TissueDescriptor1 => &self.tissue_descriptor_1,
            Column::TissueDescriptor2 => &self.tissue_descriptor_2,
            Column::CancerType => &self.cancer_type,
            Column::Msi => &self.msi_status,
            Column::ScreenMedium => &self.screen_medium,
            Column::GrowthProperties => &self.growth_properties,
            Column::Cna => &self.cna,
            Column::GeneExpression => &self.gene_expression,
            Column::Methylation => &self.methylation,
            Column::Target => &self.target,
            Column::TargetPathway => &self.target_pathway,
            Column::LnIc50 | Column::Auc | Column::ZScore => return None,
        })
    }

    pub fn text_slot_mut(&mut self, column: Column) -> Option<&mut Option<String>> {
        Some(match column {
            Column::CosmicId => &mut self.cosmic_id,
            Column::CellLineName => &mut self.cell_line_name,
            Column::TcgaDesc => &mut self.tcga_desc,
            Column::DrugId => &mut self.drug_id,
            Column::DrugName => &mut self.drug_name,
            Column::TissueDescriptor1 => &mut self.tissue_descriptor_1,
            Column::TissueDescriptor2 => &mut self.tissue_descriptor_2,
            Column::CancerType => &mut self.cancer_type,
            Column::Msi => &mut self.msi_status,
            Column::ScreenMedium => &mut self.screen_medium,
            Column::GrowthProperties => &mut self.growth_properties,
            Column::Cna => &mut self.cna,
            Column::GeneExpression => &mut self.gene_expression,
            Column::Methylation => &mut self.methylation,
            Column::Target => &mut self.target,
            Column::TargetPathway => &mut self.target_pathway,
            Column::LnIc50 | Column::Auc | Column::ZScore => return None,
        })
    }

    /// Optional numeric slot for AUC / Z_SCORE.
    pub fn real_slot_mut(&mut self, column: Column) -> Option<&mut Option<f64>> {
        match column {
            Column::Auc => Some(&mut self.auc),
            Column::ZScore => Some(&mut self.z_score),
            _ => None,
        }
    }

    /// Present value of `column`, or `None` if the cell is empty.
    pub fn get(&self, column: Column) -> Option<CellValue<'_>> {
        match column {
            Column::LnIc50 => Some(CellValue::Real(self.ln_ic50)),
            Column::Auc => self.auc.map(CellValue::Real),
            Column::ZScore => self.z_score.map(CellValue::Real),
            other => self
                .text_slot(other)
                .and_then(|s| s.as_deref())
                .map(CellValue::Text),
        }
    }

    pub fn is_missing(&self, column: Column) -> bool {
        self.get(column).is_none()
    }
}
