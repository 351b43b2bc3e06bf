//! End-to-end orchestration and the on-disk artifact layout.
//!
//! ```text
//! <out>/
//!   corpus.json          ingested traces
//!   stats.tsv            per use case counts (filtered column after scoring)
//!   scores.tsv           method scores, descending
//!   filter.json          kept and removed methods
//!   matrix.txt           "<num traces>" then "term:count ..." per trace
//!   dictionary.tsv       "id<TAB>term"
//!   matrix.json          matrix with both factors
//!   model/theta.tsv      trace-topic
//!   model/phi.tsv        topic-identifier
//!   model/topwords.tsv   top words per topic
//!   model/model.json     full sampler state
//!   model/assignments.txt  (optional) token topics
//!   analysis/categories.tsv, class_topic.tsv, heatmap.tsv, closure.tsv,
//!   analysis/clusters.tsv, analysis.json
//!   index.json           query index
//!   manifest.json        per stage input/output hashes
//! ```
//!
//! Every numeric artifact is a pure function of the inputs and the seed;
//! only `manifest.json` carries timestamps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    class_topic_matrix, export_heatmap, group_topics, ClassTopicMatrix, ClusterPartition,
    FuzzyClassClustering, Heatmap, ShadeNormalization, TopicGrouping,
};
use crate::error::{Error, Result};
use crate::lexicon::{build_matrix, ingest_facts, LexiconOptions, TraceIdentifierMatrix, Tokenizer};
use crate::query::{build_index, QueryIndex};
use crate::relevance::{filter_methods, score_methods, score_report, FilterOutcome};
use crate::topics::{fit, LdaConfig, TopicModel};
use crate::trace::{
    compress_trace, corpus_stats, ingest_manifest, CorpusManifest, CorpusStats, ManifestEntry,
    Trace, TraceMethodCounts,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Corpus manifest file, or a directory of `*.trace` files.
    pub traces: PathBuf,
    pub facts: PathBuf,
    pub out_dir: PathBuf,
    pub marked_only: bool,
    pub score_threshold: f64,
    pub lda: LdaConfig,
    pub category_threshold: f64,
    pub lambda: f64,
    pub heatmap: ShadeNormalization,
    pub include_class_facts: bool,
    pub stop_words: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub dump_assignments: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            traces: PathBuf::from("traces"),
            facts: PathBuf::from("facts.tsv"),
            out_dir: PathBuf::from("out"),
            marked_only: false,
            score_threshold: 0.0,
            lda: LdaConfig::new(30),
            category_threshold: 0.6,
            lambda: 0.912,
            heatmap: ShadeNormalization::Global,
            include_class_facts: false,
            stop_words: None,
            keywords: None,
            dump_assignments: false,
        }
    }
}

impl PipelineConfig {
    /// Flat `key = value` text; `#` starts a comment line. Relative paths are
    /// resolved against `base`. Unknown keys are rejected.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                file: "config".into(),
                line: idx + 1,
                message: "expected `key = value`".into(),
            })?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        cfg.apply(&pairs, base)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or_else(|| Path::new("")))
    }

    /// Applies `key = value` overrides. `alpha` follows `topics` unless it
    /// was set explicitly, here or earlier.
    pub fn apply(&mut self, pairs: &[(String, String)], base: &Path) -> Result<()> {
        let mut alpha_set = self.lda.alpha != 50.0 / self.lda.num_topics.max(1) as f64;
        for (key, value) in pairs {
            let path = || base.join(value);
            match key.as_str() {
                "traces" => self.traces = path(),
                "facts" => self.facts = path(),
                "out_dir" => self.out_dir = path(),
                "marked_only" => self.marked_only = parse_value(key, value)?,
                "score_threshold" => self.score_threshold = parse_value(key, value)?,
                "topics" => self.lda.num_topics = parse_value(key, value)?,
                "alpha" => {
                    self.lda.alpha = parse_value(key, value)?;
                    alpha_set = true;
                }
                "beta" => self.lda.beta = parse_value(key, value)?,
                "iterations" => self.lda.iterations = parse_value(key, value)?,
                "seed" => self.lda.seed = parse_value(key, value)?,
                "top_n" => self.lda.top_n = parse_value(key, value)?,
                "category_threshold" => self.category_threshold = parse_value(key, value)?,
                "lambda" => self.lambda = parse_value(key, value)?,
                "heatmap" => {
                    self.heatmap = match value.as_str() {
                        "global" => ShadeNormalization::Global,
                        "per_row" => ShadeNormalization::PerRow,
                        _ => {
                            return Err(Error::Parameter(format!(
                                "heatmap must be `global` or `per_row`, got `{value}`"
                            )))
                        }
                    }
                }
                "include_class_facts" => self.include_class_facts = parse_value(key, value)?,
                "stop_words" => self.stop_words = Some(path()),
                "keywords" => self.keywords = Some(path()),
                "dump_assignments" => self.dump_assignments = parse_value(key, value)?,
                _ => return Err(Error::Parameter(format!("unknown config key `{key}`"))),
            }
        }
        if pairs.iter().any(|(k, _)| k == "topics") && !alpha_set {
            self.lda.alpha = 50.0 / self.lda.num_topics.max(1) as f64;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.lda.validate()?;
        if self.score_threshold.is_nan() || self.score_threshold < 0.0 {
            return Err(Error::Parameter("score_threshold must be >= 0".into()));
        }
        if !(self.category_threshold > 0.0 && self.category_threshold <= 1.0) {
            return Err(Error::Parameter("category_threshold must be in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Parameter("lambda must be in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn lexicon_options(&self) -> Result<LexiconOptions> {
        let mut tokenizer = Tokenizer::new();
        if let Some(p) = &self.stop_words {
            tokenizer = tokenizer.with_stop_words(Tokenizer::read_word_list(p)?);
        }
        if let Some(p) = &self.keywords {
            tokenizer = tokenizer.with_keywords(Tokenizer::read_word_list(p)?);
        }
        Ok(LexiconOptions {
            tokenizer,
            include_class_facts: self.include_class_facts,
        })
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parameter(format!("bad value `{value}` for `{key}`")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Score,
    Matrix,
    Lda,
    Analyze,
    Index,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Score,
        Stage::Matrix,
        Stage::Lda,
        Stage::Analyze,
        Stage::Index,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Score => "score",
            Stage::Matrix => "matrix",
            Stage::Lda => "lda",
            Stage::Analyze => "analyze",
            Stage::Index => "index",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    /// path -> sha256
    pub inputs: BTreeMap<String, String>,
    /// path relative to the run directory -> sha256
    pub outputs: BTreeMap<String, String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn new(seed: u64) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            seed,
            stages: Vec::new(),
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        read_json(&dir.join(Self::FILE))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(Self::FILE), self)
    }

    pub fn is_complete(&self) -> bool {
        Stage::ALL
            .iter()
            .all(|s| self.stages.iter().any(|r| r.stage == *s))
    }

    /// Final digest of each output, from the last stage that wrote it.
    pub fn outputs(&self) -> BTreeMap<&str, (Stage, &str)> {
        let mut latest = BTreeMap::new();
        for record in &self.stages {
            for (rel, digest) in &record.outputs {
                latest.insert(rel.as_str(), (record.stage, digest.as_str()));
            }
        }
        latest
    }

    /// Every recorded output exists and hashes to its recorded digest.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for (rel, (stage, digest)) in self.outputs() {
            let actual = hash_file(&dir.join(rel)).map_err(|_| Error::StaleArtifact {
                artifact: rel.to_string(),
                reason: "missing".into(),
            })?;
            if actual != digest {
                return Err(Error::StaleArtifact {
                    artifact: rel.to_string(),
                    reason: format!("{stage} output changed since the run"),
                });
            }
        }
        Ok(())
    }

    fn record(&mut self, record: StageRecord) {
        self.stages.retain(|r| r.stage != record.stage);
        self.stages.push(record);
        self.stages.sort_by_key(|r| r.stage);
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub source: Error,
    pub partial: RunManifest,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `{}` failed: {}", self.stage, self.source)
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hash_bytes(&bytes))
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let bytes = serde_json::to_vec(value)?;
    write_file(path, &bytes)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Everything the analysis stage produces, in one structured file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisArtifacts {
    pub top_words: Vec<Vec<(String, f64)>>,
    pub categories: TopicGrouping,
    pub class_topic: ClassTopicMatrix,
    pub heatmap: Heatmap,
    pub clustering: FuzzyClassClustering,
    pub clusters: ClusterPartition,
}

/// Lists the traces to ingest: a manifest file as is, or every `*.trace`
/// below a directory (use case = containing directory name).
pub fn resolve_corpus(path: &Path) -> Result<CorpusManifest> {
    if path.is_file() {
        return CorpusManifest::load(path);
    }
    let mut files = Vec::new();
    collect_trace_files(path, &mut files)?;
    files.sort();
    let entries = files
        .into_iter()
        .map(|p| ManifestEntry {
            trace_id: p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            use_case_id: p
                .parent()
                .and_then(Path::file_name)
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "default".into()),
            path: p,
        })
        .collect();
    Ok(CorpusManifest { entries })
}

fn collect_trace_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_trace_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "trace") {
            out.push(path);
        }
    }
    Ok(())
}

/// Runs stages one at a time against an output directory, recording each in
/// the manifest.
pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub manifest: RunManifest,
}

type StageOutputs = Vec<(String, Vec<u8>)>;

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let manifest = RunManifest::load(&cfg.out_dir).unwrap_or_else(|_| RunManifest::new(cfg.lda.seed));
        Ok(Pipeline { cfg, manifest })
    }

    fn out(&self, rel: &str) -> PathBuf {
        self.cfg.out_dir.join(rel)
    }

    fn load<T: DeserializeOwned>(&self, rel: &str) -> Result<T> {
        read_json(&self.out(rel))
    }

    fn commit(&mut self, stage: Stage, inputs: Vec<PathBuf>, outputs: StageOutputs, started: u128) -> Result<()> {
        let mut record = StageRecord {
            stage,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            started_unix_ms: started,
            finished_unix_ms: 0,
        };
        for input in inputs {
            let digest = hash_file(&input)?;
            record.inputs.insert(input.display().to_string(), digest);
        }
        for (rel, bytes) in outputs {
            write_file(&self.out(&rel), &bytes)?;
            record.outputs.insert(rel, hash_bytes(&bytes));
        }
        record.finished_unix_ms = now_ms();
        self.manifest.seed = self.cfg.lda.seed;
        self.manifest.record(record);
        self.manifest.save(&self.cfg.out_dir)
    }

    pub fn run_stage(&mut self, stage: Stage) -> std::result::Result<(), PipelineError> {
        let result = match stage {
            Stage::Ingest => self.ingest(),
            Stage::Score => self.score(),
            Stage::Matrix => self.matrix(),
            Stage::Lda => self.lda(),
            Stage::Analyze => self.analyze(),
            Stage::Index => self.index(),
        };
        result.map_err(|source| PipelineError {
            stage,
            source,
            partial: self.manifest.clone(),
        })
    }

    pub fn ingest(&mut self) -> Result<()> {
        let started = now_ms();
        let corpus_manifest = resolve_corpus(&self.cfg.traces)?;
        if corpus_manifest.entries.is_empty() {
            return Err(Error::Empty(format!("no traces under {}", self.cfg.traces.display())));
        }
        let traces = ingest_manifest(&corpus_manifest, self.cfg.marked_only)?;
        let stats = corpus_stats(&traces)?;
        let inputs = corpus_manifest.entries.iter().map(|e| e.path.clone()).collect();
        let outputs = vec![
            ("corpus.json".to_string(), serde_json::to_vec(&traces)?),
            ("stats.tsv".to_string(), stats.to_tsv().into_bytes()),
        ];
        self.commit(Stage::Ingest, inputs, outputs, started)
    }

    pub fn score(&mut self) -> Result<()> {
        let started = now_ms();
        let traces: Vec<Trace> = self.load("corpus.json")?;
        let counts = TraceMethodCounts::from_traces(&traces);
        let table = score_methods(&counts)?;
        let outcome = filter_methods(&table, self.cfg.score_threshold)?;
        let stats = corpus_stats(&traces)?.with_filtered(&traces, &outcome.kept);
        let outputs = vec![
            ("scores.tsv".to_string(), score_report(&table, Some(&outcome.kept)).into_bytes()),
            ("filter.json".to_string(), serde_json::to_vec(&outcome)?),
            ("stats.tsv".to_string(), stats.to_tsv().into_bytes()),
        ];
        self.commit(Stage::Score, vec![self.out("corpus.json")], outputs, started)
    }

    pub fn matrix(&mut self) -> Result<()> {
        let started = now_ms();
        let traces: Vec<Trace> = self.load("corpus.json")?;
        let outcome: FilterOutcome = self.load("filter.json")?;
        let store = ingest_facts(&self.cfg.facts)?;
        let compressed: Vec<Trace> = traces.iter().map(compress_trace).collect();
        let matrix = build_matrix(&compressed, &outcome.kept, &store, &self.cfg.lexicon_options()?)?;
        let outputs = vec![
            ("matrix.txt".to_string(), matrix.to_text().into_bytes()),
            ("dictionary.tsv".to_string(), matrix.dictionary.to_text().into_bytes()),
            ("matrix.json".to_string(), serde_json::to_vec(&matrix)?),
        ];
        let inputs = vec![self.out("corpus.json"), self.out("filter.json"), self.cfg.facts.clone()];
        self.commit(Stage::Matrix, inputs, outputs, started)
    }

    pub fn lda(&mut self) -> Result<()> {
        let started = now_ms();
        let matrix: TraceIdentifierMatrix = self.load("matrix.json")?;
        let model = fit(&matrix, &self.cfg.lda)?;
        let mut outputs = vec![
            ("model/theta.tsv".to_string(), model.theta_text().into_bytes()),
            ("model/phi.tsv".to_string(), model.phi_text().into_bytes()),
            (
                "model/topwords.tsv".to_string(),
                model.top_words_text(self.cfg.lda.top_n.min(model.vocab_size())).into_bytes(),
            ),
            ("model/model.json".to_string(), serde_json::to_vec(&model)?),
        ];
        if self.cfg.dump_assignments {
            outputs.push(("model/assignments.txt".to_string(), model.assignments_text().into_bytes()));
        }
        self.commit(Stage::Lda, vec![self.out("matrix.json")], outputs, started)
    }

    pub fn analyze(&mut self) -> Result<()> {
        let started = now_ms();
        let matrix: TraceIdentifierMatrix = self.load("matrix.json")?;
        let model: TopicModel = self.load("model/model.json")?;
        let artifacts = analyze(&model, &matrix, &self.cfg)?;
        let outputs = vec![
            (
                "analysis/categories.tsv".to_string(),
                artifacts.categories.to_text(&artifacts.top_words).into_bytes(),
            ),
            ("analysis/class_topic.tsv".to_string(), artifacts.class_topic.to_text().into_bytes()),
            ("analysis/heatmap.tsv".to_string(), artifacts.heatmap.to_text().into_bytes()),
            ("analysis/closure.tsv".to_string(), artifacts.clustering.closure_text().into_bytes()),
            ("analysis/clusters.tsv".to_string(), artifacts.clusters.to_text().into_bytes()),
            ("analysis/analysis.json".to_string(), serde_json::to_vec(&artifacts)?),
        ];
        let inputs = vec![self.out("matrix.json"), self.out("model/model.json")];
        self.commit(Stage::Analyze, inputs, outputs, started)
    }

    pub fn index(&mut self) -> Result<()> {
        let started = now_ms();
        let matrix: TraceIdentifierMatrix = self.load("matrix.json")?;
        let model: TopicModel = self.load("model/model.json")?;
        let artifacts: AnalysisArtifacts = self.load("analysis/analysis.json")?;
        let store = ingest_facts(&self.cfg.facts)?;
        let traces: Vec<Trace> = self.load("corpus.json")?;
        let corpus_ids: Vec<&String> = traces.iter().map(|t| &t.trace_id).collect();
        if corpus_ids != matrix.trace_ids.iter().collect::<Vec<_>>() {
            return Err(Error::StaleArtifact {
                artifact: "matrix.json".into(),
                reason: "trace ids differ from corpus.json".into(),
            });
        }
        let tokenizer = self.cfg.lexicon_options()?.tokenizer;
        let index = build_index(&model, &artifacts.class_topic, &store, &matrix, &tokenizer)?;
        let outputs = vec![("index.json".to_string(), index.to_json()?)];
        let inputs = vec![
            self.out("matrix.json"),
            self.out("model/model.json"),
            self.out("analysis/analysis.json"),
            self.cfg.facts.clone(),
        ];
        self.commit(Stage::Index, inputs, outputs, started)
    }
}

/// Categories, class-topic weights, heat map and λ-cut clusters for a model.
pub fn analyze(model: &TopicModel, matrix: &TraceIdentifierMatrix, cfg: &PipelineConfig) -> Result<AnalysisArtifacts> {
    let top_words = model.top_words(cfg.lda.top_n.min(model.vocab_size()));
    let categories = group_topics(&model.phi, cfg.category_threshold)?;
    let class_topic = class_topic_matrix(model, matrix)?;
    let heatmap = export_heatmap(&class_topic, cfg.heatmap)?;
    let clustering = FuzzyClassClustering::new(&class_topic)?;
    let clusters = clustering.cut(cfg.lambda)?;
    Ok(AnalysisArtifacts {
        top_words,
        categories,
        class_topic,
        heatmap,
        clustering,
        clusters,
    })
}

/// Runs every stage in order.
pub fn run_pipeline(cfg: &PipelineConfig) -> std::result::Result<RunManifest, PipelineError> {
    let mut pipeline = Pipeline::new(cfg.clone()).map_err(|source| PipelineError {
        stage: Stage::Ingest,
        source,
        partial: RunManifest::new(cfg.lda.seed),
    })?;
    pipeline.manifest = RunManifest::new(cfg.lda.seed);
    for stage in Stage::ALL {
        pipeline.run_stage(stage)?;
    }
    Ok(pipeline.manifest)
}

/// Paths of the numeric artifacts, relative to the run directory.
pub fn numeric_artifacts(manifest: &RunManifest) -> BTreeSet<String> {
    manifest.outputs().keys().map(|k| k.to_string()).collect()
}

/// Loads the stats table written by the ingest/score stages.
pub fn load_stats(dir: &Path) -> Result<CorpusStats> {
    let traces: Vec<Trace> = read_json(&dir.join("corpus.json"))?;
    let stats = corpus_stats(&traces)?;
    match read_json::<FilterOutcome>(&dir.join("filter.json")) {
        Ok(outcome) => Ok(stats.with_filtered(&traces, &outcome.kept)),
        Err(_) => Ok(stats),
    }
}

/// Loads the query index and analysis artifacts of a finished run, after
/// checking the manifest.
pub fn load_run(dir: &Path) -> Result<(RunManifest, QueryIndex, AnalysisArtifacts, CorpusStats)> {
    let manifest = RunManifest::load(dir).map_err(|e| Error::StaleArtifact {
        artifact: RunManifest::FILE.into(),
        reason: e.to_string(),
    })?;
    if !manifest.is_complete() {
        let missing: Vec<&str> = Stage::ALL
            .iter()
            .filter(|s| !manifest.stages.iter().any(|r| r.stage == **s))
            .map(|s| s.name())
            .collect();
        return Err(Error::StaleArtifact {
            artifact: RunManifest::FILE.into(),
            reason: format!("incomplete run, missing stages: {}", missing.join(", ")),
        });
    }
    manifest.verify(dir)?;
    let index = QueryIndex::load(&dir.join("index.json"))?;
    let analysis: AnalysisArtifacts = read_json(&dir.join("analysis/analysis.json"))?;
    if analysis.class_topic.num_topics != index.num_topics {
        return Err(Error::StaleArtifact {
            artifact: "analysis/analysis.json".into(),
            reason: "topic count differs from index.json".into(),
        });
    }
    let stats = load_stats(dir)?;
    Ok((manifest, index, analysis, stats))
}
