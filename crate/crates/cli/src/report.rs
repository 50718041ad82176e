//! JSON report types. Every numeric result carries full shortest-round-trip
//! precision in `value` plus a five-significant-digit `display` field.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumberField {
    pub value: f64,
    pub display: String,
}

pub fn num(value: f64) -> NumberField {
    NumberField {
        value,
        display: format!("{:.4e}", value),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightsUsed {
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub alpha3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha4: Option<Option<f64>>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructuredResult {
    pub sparsity_preserved: bool,
    pub xi: NumberField,
    pub weighted_norm_of_perturbations: NumberField,
    pub perturbed_residual_norm: NumberField,
    pub mask_violations: usize,
    pub hermitian_deviation_e: NumberField,
    pub hermitian_deviation_g: NumberField,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation_dir: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub case: String,
    pub n: usize,
    pub m: usize,
    pub unstructured_be: NumberField,
    pub residual_norm: NumberField,
    pub weights: WeightsUsed,
    pub structured: Vec<StructuredResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    pub size: usize,
    pub solver: String,
    pub iterations: usize,
    pub converged: bool,
    pub final_relative_residual: Option<NumberField>,
    pub unstructured_be: NumberField,
    pub structured_be_sparse: NumberField,
    pub structured_be_plain: NumberField,
    pub backward_stable: bool,
    pub strongly_backward_stable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReportFile {
    pub threshold: NumberField,
    pub rows: Vec<StabilityRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub residual_norm: NumberField,
    pub hermitian_deviation_e: NumberField,
    pub hermitian_deviation_g: NumberField,
    pub mask_violations: usize,
    pub excluded_violations: usize,
    pub weighted_norm: NumberField,
}
