use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{method_term_vector, FactsStore, LexiconOptions};
use crate::trace::{MethodKey, Trace};

/// Sorted vocabulary; a term's id is its position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct TermDictionary {
    terms: Vec<String>,
    ids: HashMap<String, usize>,
}

impl From<Vec<String>> for TermDictionary {
    fn from(terms: Vec<String>) -> Self {
        let ids = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        TermDictionary { terms, ids }
    }
}

impl From<TermDictionary> for Vec<String> {
    fn from(d: TermDictionary) -> Self {
        d.terms
    }
}

impl TermDictionary {
    /// Deduplicates and sorts.
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = terms.into_iter().map(Into::into).collect();
        Self::from(set.into_iter().collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// `id<TAB>term` per line.
    pub fn to_text(&self) -> String {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| format!("{i}\t{t}\n"))
            .collect()
    }
}

/// Sparse row: `(column, count)` sorted by column.
pub type SparseRow = Vec<(usize, u32)>;

/// Traces as documents, identifier terms as words.
///
/// `rows` is the product of the binary trace-method factor (`trace_methods`)
/// and the method-identifier count factor (`method_terms`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceIdentifierMatrix {
    pub trace_ids: Vec<String>,
    /// Columns of the trace-method factor.
    pub methods: Vec<MethodKey>,
    /// Per trace: indices into `methods` of the methods present (sorted).
    pub trace_methods: Vec<Vec<usize>>,
    /// Per method: term counts.
    pub method_terms: Vec<SparseRow>,
    pub rows: Vec<SparseRow>,
    pub dictionary: TermDictionary,
    /// Kept methods missing from the facts store.
    pub unresolved: Vec<MethodKey>,
}

impl TraceIdentifierMatrix {
    /// A matrix given directly as counts, with no method factors.
    pub fn from_counts(
        trace_ids: Vec<String>,
        dictionary: TermDictionary,
        rows: Vec<SparseRow>,
    ) -> Result<Self> {
        if trace_ids.len() != rows.len() {
            return Err(Error::Matrix(format!(
                "{} trace ids for {} rows",
                trace_ids.len(),
                rows.len()
            )));
        }
        let v = dictionary.len();
        for (id, row) in trace_ids.iter().zip(&rows) {
            if row.iter().any(|&(t, _)| t >= v) {
                return Err(Error::Matrix(format!("row `{id}` has a term id outside 0..{v}")));
            }
            if row.iter().all(|&(_, n)| n == 0) {
                return Err(Error::Matrix(format!("trace `{id}` has no terms")));
            }
        }
        Ok(TraceIdentifierMatrix {
            trace_ids,
            methods: Vec::new(),
            trace_methods: Vec::new(),
            method_terms: Vec::new(),
            rows,
            dictionary,
            unresolved: Vec::new(),
        })
    }

    pub fn num_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.dictionary.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter().map(|&(_, n)| u64::from(n)))
            .sum()
    }

    pub fn dense_row(&self, doc: usize) -> Vec<u32> {
        let mut dense = vec![0; self.vocab_size()];
        for &(t, n) in &self.rows[doc] {
            dense[t] = n;
        }
        dense
    }

    pub fn method_index(&self, key: &MethodKey) -> Option<usize> {
        self.methods.binary_search(key).ok()
    }

    /// Header line with the number of traces, then `term:count` pairs per
    /// trace in trace order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.num_docs());
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|&(t, n)| format!("{}:{}", self.dictionary.terms[t], n))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Builds the trace-by-identifier matrix from kept methods.
///
/// Presence is binary: a method contributes its term vector once per trace no
/// matter how often it was invoked. Kept methods with no facts are skipped
/// with a warning. The dictionary holds only terms that reach some trace.
pub fn build_matrix(
    corpus: &[Trace],
    kept: &BTreeSet<MethodKey>,
    store: &FactsStore,
    opts: &LexiconOptions,
) -> Result<TraceIdentifierMatrix> {
    if kept.is_empty() {
        return Err(Error::Matrix("no kept methods".into()));
    }

    let mut methods = Vec::new();
    let mut vectors = Vec::new();
    let mut unresolved = Vec::new();
    for key in kept {
        match store.method(key).and_then(|m| store.class(&m.class_name).map(|c| (m, c))) {
            Some((m, c)) => {
                methods.push(key.clone());
                vectors.push(method_term_vector(m, c, opts));
            }
            None => {
                log::warn!("method {key} has no facts; skipped");
                unresolved.push(key.clone());
            }
        }
    }

    let trace_methods: Vec<Vec<usize>> = corpus
        .iter()
        .map(|t| {
            t.distinct_methods()
                .iter()
                .filter_map(|k| methods.binary_search(k).ok())
                .collect()
        })
        .collect();

    let dictionary = TermDictionary::from_terms(
        trace_methods
            .iter()
            .flatten()
            .flat_map(|&m| vectors[m].keys().cloned()),
    );
    if dictionary.is_empty() {
        return Err(Error::Matrix("vocabulary is empty".into()));
    }

    let method_terms: Vec<SparseRow> = vectors
        .iter()
        .map(|v| {
            v.iter()
                .filter_map(|(term, &n)| dictionary.id(term).map(|id| (id, n)))
                .collect()
        })
        .collect();

    let rows = trace_methods
        .iter()
        .map(|present| multiply_row(present, &method_terms))
        .collect::<Vec<_>>();
    for (trace, row) in corpus.iter().zip(&rows) {
        if row.is_empty() {
            return Err(Error::Matrix(format!(
                "trace `{}` has no terms after filtering",
                trace.trace_id
            )));
        }
    }

    Ok(TraceIdentifierMatrix {
        trace_ids: corpus.iter().map(|t| t.trace_id.clone()).collect(),
        methods,
        trace_methods,
        method_terms,
        rows,
        dictionary,
        unresolved,
    })
}

/// One row of (binary trace-method) x (method-identifier).
fn multiply_row(present: &[usize], method_terms: &[SparseRow]) -> SparseRow {
    let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
    for &m in present {
        for &(t, n) in &method_terms[m] {
            *acc.entry(t).or_insert(0) += n;
        }
    }
    acc.into_iter().filter(|&(_, n)| n > 0).collect()
}
