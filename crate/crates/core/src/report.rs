//! Versioned JSON run reports.
//!
//! Every CLI command can emit a [`RunReport`]. Reports from `evaluate` carry an
//! [`EvaluationReport`] and are what `compare` reads back.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bias::{EvaluationReport, ExtremeReport, SubspaceMethod};
use crate::error::{Error, Result};
use crate::io::Format;
use crate::stats::{two_proportion_z, ProportionTest};
use crate::vector::{AnalogyQuery, AnalogyResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub path: String,
    pub format: Format,
    pub limit: Option<usize>,
    pub vocab: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebiasSummary {
    pub output_path: String,
    pub output_format: Format,
    pub subspace_method: SubspaceMethod,
    pub subspace_rank: usize,
    pub neutralized_count: usize,
    pub equalized_count: usize,
    pub skipped_oov: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub label_a: String,
    pub label_b: String,
    pub test: ProportionTest,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunResults {
    Analogy {
        query: AnalogyQuery,
        result: AnalogyResult,
    },
    Evaluation(EvaluationReport),
    Extremes {
        she: ExtremeReport,
        he: ExtremeReport,
    },
    Comparison(Comparison),
    Debias(DebiasSummary),
    Conversion {
        output_path: String,
        output_format: Format,
        rows: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub timestamp: String,
    pub command: String,
    pub model: Option<ModelMeta>,
    pub parameters: BTreeMap<String, Value>,
    pub results: RunResults,
}

impl RunReport {
    pub fn new(
        command: impl Into<String>,
        timestamp: impl Into<String>,
        model: Option<ModelMeta>,
        parameters: BTreeMap<String, Value>,
        results: RunResults,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: crate::VERSION.to_owned(),
            timestamp: timestamp.into(),
            command: command.into(),
            model,
            parameters,
            results,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Value = serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))?;
        match raw.get("schema_version").and_then(Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::Report(format!(
                    "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(Error::Report("missing schema_version".into())),
        }
        serde_json::from_value(raw).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn evaluation(&self) -> Result<&EvaluationReport> {
        match &self.results {
            RunResults::Evaluation(e) => Ok(e),
            _ => Err(Error::Report(format!(
                "report from `{}` has no evaluation results",
                self.command
            ))),
        }
    }
}

/// Two-proportion test of `a.accuracy` against `b.accuracy`, using correct
/// counts over evaluated counts. Differences in the evaluated pair lists or
/// query settings are returned as warnings; the test is computed regardless.
pub fn compare_evaluations(
    a: &EvaluationReport,
    b: &EvaluationReport,
) -> Result<(ProportionTest, Vec<String>)> {
    let mut warnings = Vec::new();
    let pairs = |r: &EvaluationReport| -> Vec<_> {
        r.outcomes
            .iter()
            .filter(|o| !o.skipped())
            .map(|o| o.pair.clone())
            .collect()
    };
    if pairs(a) != pairs(b) {
        warnings.push("the reports evaluated different profession pair lists".to_owned());
    }
    if a.seed != b.seed {
        warnings.push(format!(
            "seed pairs differ: {}/{} vs {}/{}",
            a.seed.0, a.seed.1, b.seed.0, b.seed.1
        ));
    }
    if a.top_k_match != b.top_k_match {
        warnings.push(format!(
            "top_k_match differs: {} vs {}",
            a.top_k_match, b.top_k_match
        ));
    }
    let test = two_proportion_z(
        a.correct_count as u64,
        a.evaluated_count as u64,
        b.correct_count as u64,
        b.evaluated_count as u64,
    )?;
    Ok((test, warnings))
}
