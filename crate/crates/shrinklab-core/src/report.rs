//! Machine-readable report types shared by the auditors and the CLI.

use crate::immersion::Immersion;
use serde::Serialize;

/// One named check with its measured value and threshold. `applicable`
/// distinguishes binding checks from informational rows (e.g. hypothesis
/// flags on degenerate inputs); the overall verdict conjoins only the
/// applicable rows.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    /// What the row verifies, stated by content.
    pub claim: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub applicable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub grid: String,
    pub background: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl Metadata {
    pub fn for_immersion(f: &Immersion, lambda: Option<f64>) -> Self {
        let grid = if f.grid().dim() == 1 {
            format!("{}", f.grid().size(0))
        } else {
            format!("{}x{}", f.grid().size(0), f.grid().size(1))
        };
        Metadata {
            grid,
            background: f.background().id(),
            lambda,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<bool>,
    pub checks: Vec<CheckRow>,
    pub metadata: Metadata,
}

/// Serialize any report deterministically (struct field order, shortest
/// round-trip float formatting).
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}
