//! Serializable result documents.

use serde::Serialize;

use crate::graded_algebra::PresentationDoc;
use crate::moore_ss::{CollapseReport, LabeledElement, ResolutionStatus};

#[derive(Debug, Clone, Serialize)]
pub struct WindowRecord {
    pub max_filtration: usize,
    pub q_min: i32,
    pub q_max: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Choices {
    pub diagonal_convention: String,
    pub zeta_construction: String,
    pub lifting_depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fundamental_class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bv_evaluation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_bar_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_cell_limit: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub presentation_hash: String,
    pub presentation: PresentationDoc,
    pub window: WindowRecord,
    pub seed: u64,
    pub choices: Choices,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HhCell {
    pub p: i32,
    pub q: i32,
    pub dim: usize,
    pub basis: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub left_cell: (i32, i32),
    pub right_cell: (i32, i32),
    pub cell: (i32, i32),
    pub product: LabeledElement,
}

#[derive(Debug, Clone, Serialize)]
pub struct BvEntry {
    pub class: String,
    pub cell: (i32, i32),
    pub delta: LabeledElement,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graded_delta: Option<LabeledElement>,
    pub status: ResolutionStatus,
    pub ambiguity: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionEntry {
    pub operation: String,
    pub operands: Vec<String>,
    pub status: ResolutionStatus,
    pub value: LabeledElement,
    pub filtration: i32,
    pub ambiguity: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BvSweep {
    pub triples_checked: usize,
    pub identity_failures: Vec<String>,
    pub delta_squared_failures: Vec<String>,
    pub theta_rank_failures: Vec<(i32, i32)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCell {
    pub p: i32,
    pub q: i32,
    pub koszul_tate_dim: usize,
    pub bar_dim: usize,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub agree: bool,
    pub bar_length: usize,
    pub estimated_largest_cell: usize,
    pub cells: Vec<OracleCell>,
    pub edge_cells_excluded: Vec<(i32, i32)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub metadata: Metadata,
    pub hh_table: Vec<HhCell>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub product_table: Vec<ProductEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bv_table: Vec<BvEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extension_report: Vec<ExtensionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bv_sweep: Option<BvSweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_report: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CollapseReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub invariants: Vec<InvariantResult>,
}
