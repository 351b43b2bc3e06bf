//! Inverted index over topics, classes, methods and traces, and free-text
//! feature queries against it.
//!
//! A query is tokenized with the same tokenizer that built the vocabulary;
//! each topic scores `Σ_term φ[topic][term]` over the query terms it knows.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{topic_weights, ClassTopicMatrix};
use crate::error::{Error, Result};
use crate::lexicon::{FactsStore, TraceIdentifierMatrix, Tokenizer};
use crate::topics::TopicModel;

pub const INDEX_VERSION: u32 = 1;

/// `(entity, weight)` ranked by descending weight, ties by entity name.
pub type Ranked = Vec<(String, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryIndex {
    pub version: u32,
    pub num_topics: usize,
    pub stop_words: Vec<String>,
    pub keywords: Vec<String>,
    /// Top words per topic.
    pub topic_words: Vec<Vec<(String, f64)>>,
    /// term -> (topic, φ) ranked by φ.
    pub term_topics: BTreeMap<String, Vec<(usize, f64)>>,
    /// term -> classes with the term count.
    pub term_classes: BTreeMap<String, Vec<(String, u32)>>,
    /// term -> methods with the term count.
    pub term_methods: BTreeMap<String, Vec<(String, u32)>>,
    pub topic_classes: Vec<Ranked>,
    pub topic_methods: Vec<Ranked>,
    /// θ column per topic.
    pub topic_traces: Vec<Ranked>,
    /// method -> traces it appears in.
    pub method_traces: BTreeMap<String, Vec<String>>,
}

fn rank(mut entries: Ranked) -> Ranked {
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries
}

fn stale(artifact: &str, reason: String) -> Error {
    Error::StaleArtifact {
        artifact: artifact.to_string(),
        reason,
    }
}

/// Cross-links the fitted model, class-topic matrix, facts and corpus.
pub fn build_index(
    model: &TopicModel,
    ctm: &ClassTopicMatrix,
    store: &FactsStore,
    matrix: &TraceIdentifierMatrix,
    tokenizer: &Tokenizer,
) -> Result<QueryIndex> {
    let k = model.num_topics();
    if k == 0 {
        return Err(Error::Empty("model has no topics".into()));
    }
    if model.dictionary != matrix.dictionary {
        return Err(stale("model", "vocabulary differs from the matrix".into()));
    }
    if model.doc_ids != matrix.trace_ids {
        return Err(stale("model", "trace ids differ from the matrix".into()));
    }
    if ctm.num_topics != k {
        return Err(stale(
            "class-topic matrix",
            format!("{} topics, model has {k}", ctm.num_topics),
        ));
    }
    if let Some(c) = ctm.classes.iter().find(|c| store.class(c).is_none()) {
        return Err(stale("class-topic matrix", format!("class `{c}` not in facts")));
    }
    if let Some(m) = matrix.methods.iter().find(|m| store.method(m).is_none()) {
        return Err(stale("matrix", format!("method `{m}` not in facts")));
    }

    let dict = &model.dictionary;
    let mut term_topics = BTreeMap::new();
    for (v, term) in dict.terms().iter().enumerate() {
        let mut postings: Vec<(usize, f64)> = (0..k).map(|t| (t, model.phi[t][v])).collect();
        postings.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        term_topics.insert(term.clone(), postings);
    }

    let mut term_classes: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
    let mut term_methods: BTreeMap<String, Vec<(String, u32)>> = BTreeMap::new();
    let mut topic_methods = vec![Vec::new(); k];
    for (key, terms) in matrix.methods.iter().zip(&matrix.method_terms) {
        for &(v, n) in terms {
            let term = dict.terms()[v].clone();
            *term_classes
                .entry(term.clone())
                .or_default()
                .entry(key.class_name().to_string())
                .or_insert(0) += n;
            term_methods.entry(term).or_default().push((key.to_string(), n));
        }
        if let Some(w) = topic_weights(&model.phi, terms) {
            for (t, p) in w.into_iter().enumerate() {
                topic_methods[t].push((key.to_string(), p));
            }
        }
    }
    let rank_counts = |mut v: Vec<(String, u32)>| {
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v
    };
    let term_classes = term_classes
        .into_iter()
        .map(|(t, m)| (t, rank_counts(m.into_iter().collect())))
        .collect();
    let term_methods = term_methods
        .into_iter()
        .map(|(t, v)| (t, rank_counts(v)))
        .collect();

    let topic_classes = (0..k)
        .map(|t| {
            rank(
                ctm.classes
                    .iter()
                    .zip(&ctm.weights)
                    .map(|(c, w)| (c.clone(), w[t]))
                    .collect(),
            )
        })
        .collect();
    let topic_traces = (0..k)
        .map(|t| {
            rank(
                model
                    .doc_ids
                    .iter()
                    .zip(&model.theta)
                    .map(|(id, th)| (id.clone(), th[t]))
                    .collect(),
            )
        })
        .collect();

    let mut method_traces: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (trace, present) in matrix.trace_ids.iter().zip(&matrix.trace_methods) {
        for &m in present {
            method_traces
                .entry(matrix.methods[m].to_string())
                .or_default()
                .push(trace.clone());
        }
    }
    for traces in method_traces.values_mut() {
        traces.sort();
    }

    Ok(QueryIndex {
        version: INDEX_VERSION,
        num_topics: k,
        stop_words: tokenizer.stop_words(),
        keywords: tokenizer.keywords(),
        topic_words: model.top_words(model.config.top_n.min(model.vocab_size())),
        term_topics,
        term_classes,
        term_methods,
        topic_classes,
        topic_methods: topic_methods.into_iter().map(rank).collect(),
        topic_traces,
        method_traces,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDetail {
    pub topic: usize,
    pub words: Vec<String>,
    pub classes: Ranked,
    pub methods: Ranked,
    pub traces: Ranked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicHit {
    pub topic: usize,
    pub score: f64,
    pub words: Vec<String>,
    pub detail: TopicDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query: String,
    pub terms: Vec<String>,
    /// Query terms absent from the vocabulary.
    pub unknown_terms: Vec<String>,
    pub topics: Vec<TopicHit>,
    pub notice: Option<String>,
}

impl QueryIndex {
    pub fn tokenizer(&self) -> Tokenizer {
        Tokenizer::new()
            .with_stop_words(self.stop_words.iter().cloned())
            .with_keywords(self.keywords.iter().cloned())
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let index: QueryIndex = serde_json::from_slice(bytes)?;
        if index.version != INDEX_VERSION {
            return Err(stale(
                "index",
                format!("format version {} (expected {INDEX_VERSION})", index.version),
            ));
        }
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&bytes)
    }

    /// Ranked classes, methods and traces for a topic. `limit` caps each list.
    pub fn drill_down(&self, topic: usize, limit: Option<usize>) -> Result<TopicDetail> {
        if topic >= self.num_topics {
            return Err(Error::NotFound(format!(
                "topic {topic} (model has {} topics)",
                self.num_topics
            )));
        }
        let cap = |v: &Ranked| -> Ranked {
            v.iter().take(limit.unwrap_or(usize::MAX)).cloned().collect()
        };
        Ok(TopicDetail {
            topic,
            words: self.topic_words[topic].iter().map(|(w, _)| w.clone()).collect(),
            classes: cap(&self.topic_classes[topic]),
            methods: cap(&self.topic_methods[topic]),
            traces: cap(&self.topic_traces[topic]),
        })
    }

    pub fn query(&self, q: &str, limit: Option<usize>) -> Result<QueryResult> {
        let terms = self.tokenizer().tokenize(q);
        if terms.is_empty() {
            return Err(Error::EmptyQuery);
        }
        let mut scores = vec![0.0f64; self.num_topics];
        let mut unknown = BTreeSet::new();
        for term in &terms {
            match self.term_topics.get(term) {
                Some(postings) => {
                    for &(t, w) in postings {
                        scores[t] += w;
                    }
                }
                None => {
                    unknown.insert(term.clone());
                }
            }
        }
        let mut ranked: Vec<(usize, f64)> = scores
            .into_iter()
            .enumerate()
            .filter(|&(_, s)| s > 0.0)
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        let topics = ranked
            .into_iter()
            .map(|(topic, score)| {
                let detail = self.drill_down(topic, limit)?;
                Ok(TopicHit {
                    topic,
                    score,
                    words: detail.words.clone(),
                    detail,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let notice = topics
            .is_empty()
            .then(|| "no topic contains any of the query terms".to_string());
        Ok(QueryResult {
            query: q.to_string(),
            terms,
            unknown_terms: unknown.into_iter().collect(),
            topics,
            notice,
        })
    }
}

/// Aligned-column rendering for terminals.
pub fn render_result(result: &QueryResult) -> String {
    let mut out = format!("query: {}  (terms: {})\n", result.query, result.terms.join(" "));
    if let Some(notice) = &result.notice {
        out.push_str(notice);
        out.push('\n');
        return out;
    }
    for hit in &result.topics {
        out.push_str(&format!(
            "\ntopic {:<4} score {:.6}  \"{}\"\n",
            hit.topic,
            hit.score,
            hit.words.join(", ")
        ));
        let width = hit
            .detail
            .classes
            .iter()
            .chain(&hit.detail.methods)
            .map(|(n, _)| n.len())
            .max()
            .unwrap_or(0);
        for (label, rows) in [("class", &hit.detail.classes), ("method", &hit.detail.methods)] {
            for (name, p) in rows {
                out.push_str(&format!("  {label:<7} {name:<width$}  {p:.6}\n"));
            }
        }
        let traces: Vec<&str> = hit.detail.traces.iter().map(|(t, _)| t.as_str()).collect();
        out.push_str(&format!("  traces  {}\n", traces.join(" ")));
    }
    out
}
