//! The report schema: plain structured JSON with decimal-string numerics to
//! 17 significant digits, so acceptance runs diff cleanly.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use drazinkit_core::scalar::{format_complex, format_real};

#[derive(Debug, Serialize)]
pub struct CertRecord {
    pub name: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    /// None marks a reported-only quantity that does not gate the verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub model_digest: String,
    pub analysis: String,
    pub parameters: BTreeMap<String, String>,
    pub certificates: Vec<CertRecord>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub spectra: BTreeMap<String, Vec<String>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub matrices: BTreeMap<String, Vec<Vec<String>>>,
    pub verdict: String,
    pub artifacts: Vec<String>,
    pub timestamp: String,
}

impl AnalysisReport {
    pub fn new(analysis: &str, model_digest: String) -> Self {
        AnalysisReport {
            model_digest,
            analysis: analysis.to_string(),
            parameters: BTreeMap::new(),
            certificates: Vec::new(),
            spectra: BTreeMap::new(),
            matrices: BTreeMap::new(),
            verdict: String::new(),
            artifacts: Vec::new(),
            timestamp: String::new(),
        }
    }

    pub fn parameter(&mut self, key: &str, value: impl Into<String>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    /// A residual that gates the verdict.
    pub fn checked(&mut self, name: &str, value: f64, threshold: f64) {
        self.certificates.push(CertRecord {
            name: name.to_string(),
            value: format_real(value),
            threshold: Some(format_real(threshold)),
            pass: Some(value <= threshold),
        });
    }

    /// A boolean condition that gates the verdict.
    pub fn condition(&mut self, name: &str, pass: bool) {
        self.certificates.push(CertRecord {
            name: name.to_string(),
            value: pass.to_string(),
            threshold: None,
            pass: Some(pass),
        });
    }

    /// A quantity recorded for the reader without gating the verdict.
    pub fn reported(&mut self, name: &str, value: f64) {
        self.certificates.push(CertRecord {
            name: name.to_string(),
            value: format_real(value),
            threshold: None,
            pass: None,
        });
    }

    pub fn spectrum(&mut self, name: &str, values: &[Complex64]) {
        self.spectra
            .insert(name.to_string(), values.iter().map(|&z| format_complex(z)).collect());
    }

    pub fn matrix(&mut self, name: &str, m: &Array2<Complex64>) {
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| format_complex(m[[i, j]])).collect())
            .collect();
        self.matrices.insert(name.to_string(), rows);
    }

    /// Verdict is pass iff every gating record passed.
    pub fn finalize(&mut self) -> bool {
        let pass = self.certificates.iter().all(|c| c.pass.unwrap_or(true));
        self.verdict = if pass { "pass" } else { "fail" }.to_string();
        self.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_default();
        pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}
