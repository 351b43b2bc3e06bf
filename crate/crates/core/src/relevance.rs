//! TF-IDF style scoring of methods across traces.
//!
//! `tf` is the share of a trace's raw invocations that went to a method,
//! `idf = log10(D / D_j)`, and a method's score sums `tf * idf` over traces.
//! Methods that show up in every trace score exactly zero.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{MethodKey, TraceMethodCounts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: MethodKey,
    /// `tf_ij * idf_j` per trace, in trace order (zero where absent).
    pub cells: Vec<f64>,
    pub idf: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScoreTable {
    pub trace_ids: Vec<String>,
    /// Per trace: method -> tf.
    pub tf: Vec<BTreeMap<MethodKey, f64>>,
    /// Sorted by method key.
    pub methods: Vec<MethodScore>,
}

impl MethodScoreTable {
    pub fn score(&self, method: &MethodKey) -> Option<f64> {
        self.get(method).map(|m| m.score)
    }

    pub fn get(&self, method: &MethodKey) -> Option<&MethodScore> {
        self.methods
            .binary_search_by(|m| m.method.cmp(method))
            .ok()
            .map(|i| &self.methods[i])
    }

    /// Methods by descending score, then key.
    pub fn ranked(&self) -> Vec<&MethodScore> {
        let mut ranked: Vec<_> = self.methods.iter().collect();
        ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.method.cmp(&b.method)));
        ranked
    }
}

pub fn score_methods(counts: &TraceMethodCounts) -> Result<MethodScoreTable> {
    let num_traces = counts.num_traces();
    if num_traces == 0 {
        return Err(Error::Empty("no traces to score".into()));
    }

    let mut tf = Vec::with_capacity(num_traces);
    for (trace_id, row) in &counts.traces {
        let total: u64 = row.values().sum();
        if total == 0 {
            return Err(Error::Empty(format!(
                "trace `{trace_id}` has no method invocations"
            )));
        }
        let total = total as f64;
        tf.push(
            row.iter()
                .filter(|(_, &n)| n > 0)
                .map(|(k, &n)| (k.clone(), n as f64 / total))
                .collect::<BTreeMap<_, _>>(),
        );
    }

    let d = num_traces as f64;
    let methods = counts
        .doc_freq
        .iter()
        .map(|(method, &dj)| {
            let idf = (d / dj as f64).log10();
            let cells: Vec<f64> = tf
                .iter()
                .map(|row| row.get(method).map_or(0.0, |t| t * idf))
                .collect();
            let score = cells.iter().sum();
            MethodScore {
                method: method.clone(),
                cells,
                idf,
                score,
            }
        })
        .collect();

    Ok(MethodScoreTable {
        trace_ids: counts.traces.iter().map(|(id, _)| id.clone()).collect(),
        tf,
        methods,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub threshold: f64,
    pub kept: BTreeSet<MethodKey>,
    /// Removed methods with their scores, by descending score.
    pub removed: Vec<(MethodKey, f64)>,
}

/// Keeps methods with `score >= threshold`.
pub fn filter_methods(table: &MethodScoreTable, threshold: f64) -> Result<FilterOutcome> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::Parameter(format!(
            "score threshold must be >= 0, got {threshold}"
        )));
    }
    let mut kept = BTreeSet::new();
    let mut removed = Vec::new();
    for m in table.ranked() {
        if m.score >= threshold {
            kept.insert(m.method.clone());
        } else {
            removed.push((m.method.clone(), m.score));
        }
    }
    if kept.is_empty() {
        let max = table.methods.iter().map(|m| m.score).fold(0.0f64, f64::max);
        return Err(Error::Empty(format!(
            "threshold {threshold} removes all {} methods (max score {max}); nothing left to analyze",
            table.methods.len()
        )));
    }
    Ok(FilterOutcome {
        threshold,
        kept,
        removed,
    })
}

/// Delimited score report: one row per method, ordered by descending score
/// then key.
pub fn score_report(table: &MethodScoreTable, kept: Option<&BTreeSet<MethodKey>>) -> String {
    let mut out = String::from("method");
    for id in &table.trace_ids {
        out.push('\t');
        out.push_str(id);
    }
    out.push_str("\tscore\tkept\n");
    for m in table.ranked() {
        out.push_str(m.method.as_str());
        for c in &m.cells {
            out.push('\t');
            out.push_str(&c.to_string());
        }
        let keep = kept.is_none_or(|k| k.contains(&m.method));
        out.push_str(&format!("\t{}\t{}\n", m.score, u8::from(keep)));
    }
    out
}
