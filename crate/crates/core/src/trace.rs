//! Execution traces: ingestion, compression and corpus statistics.
//!
//! A trace file holds one event per line:
//!
//! ```text
//! # comment
//! START
//! M <thread> <class>.<method><signature>
//! STOP
//! ```
//!
//! Threads are flattened into a single sequence in file order; `seq` is the
//! position of the event in the retained sequence.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    MethodEntry,
    MarkerStart,
    MarkerStop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub thread_id: String,
    pub kind: EventKind,
    pub class_name: String,
    pub method_name: String,
    pub signature: String,
    pub seq: u64,
}

impl TraceEvent {
    pub fn marker(kind: EventKind, seq: u64) -> Self {
        TraceEvent {
            thread_id: String::new(),
            kind,
            class_name: String::new(),
            method_name: String::new(),
            signature: String::new(),
            seq,
        }
    }

    /// `None` for marker events.
    pub fn method_key(&self) -> Option<MethodKey> {
        match self.kind {
            EventKind::MethodEntry => Some(MethodKey::new(
                &self.class_name,
                &self.method_name,
                &self.signature,
            )),
            _ => None,
        }
    }
}

/// `class.method(signature)`, compared byte-for-byte.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MethodKey(String);

impl MethodKey {
    pub fn new(class_name: &str, method_name: &str, signature: &str) -> Self {
        MethodKey(format!("{class_name}.{method_name}{signature}"))
    }

    /// Parses a qualified name. The signature starts at the first `(`; the
    /// class/method split is the last `.` before it.
    pub fn parse(qualified: &str) -> Option<Self> {
        let (class, method, sig) = split_qualified(qualified)?;
        Some(MethodKey::new(class, method, sig))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn class_name(&self) -> &str {
        split_qualified(&self.0).map(|(c, _, _)| c).unwrap_or("")
    }

    pub fn method_name(&self) -> &str {
        split_qualified(&self.0).map(|(_, m, _)| m).unwrap_or("")
    }

    pub fn signature(&self) -> &str {
        split_qualified(&self.0).map(|(_, _, s)| s).unwrap_or("")
    }
}

impl fmt::Display for MethodKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn split_qualified(qualified: &str) -> Option<(&str, &str, &str)> {
    let sig_start = qualified.find('(').unwrap_or(qualified.len());
    let (head, sig) = qualified.split_at(sig_start);
    let dot = head.rfind('.')?;
    let (class, method) = (&head[..dot], &head[dot + 1..]);
    if class.is_empty() || method.is_empty() {
        return None;
    }
    Some((class, method, sig))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub trace_id: String,
    pub use_case_id: String,
    pub events: Vec<TraceEvent>,
    pub marked_only: bool,
    /// Non-fatal ingestion notes (empty file, unterminated marker, ...).
    pub warnings: Vec<String>,
}

impl Trace {
    pub fn new(trace_id: impl Into<String>, use_case_id: impl Into<String>) -> Self {
        Trace {
            trace_id: trace_id.into(),
            use_case_id: use_case_id.into(),
            events: Vec::new(),
            marked_only: false,
            warnings: Vec::new(),
        }
    }

    /// Builds an unmarked trace from qualified method names, mostly for tests
    /// and examples.
    pub fn from_methods<'a>(
        trace_id: impl Into<String>,
        use_case_id: impl Into<String>,
        methods: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut trace = Trace::new(trace_id, use_case_id);
        for (seq, name) in methods.into_iter().enumerate() {
            let (class, method, sig) = split_qualified(name).ok_or_else(|| {
                Error::Parameter(format!("`{name}` is not a qualified method name"))
            })?;
            trace.events.push(TraceEvent {
                thread_id: "main".to_string(),
                kind: EventKind::MethodEntry,
                class_name: class.to_string(),
                method_name: method.to_string(),
                signature: sig.to_string(),
                seq: seq as u64,
            });
        }
        Ok(trace)
    }

    pub fn method_keys(&self) -> impl Iterator<Item = MethodKey> + '_ {
        self.events.iter().filter_map(TraceEvent::method_key)
    }

    pub fn method_entry_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::MethodEntry)
            .count()
    }

    /// Raw invocation count per method.
    pub fn counts(&self) -> BTreeMap<MethodKey, u64> {
        let mut counts = BTreeMap::new();
        for key in self.method_keys() {
            *counts.entry(key).or_insert(0) += 1;
        }
        counts
    }

    pub fn distinct_methods(&self) -> BTreeSet<MethodKey> {
        self.method_keys().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Parses trace text. `file` is only used in error messages.
pub fn parse_trace(
    text: &str,
    file: &str,
    trace_id: &str,
    use_case_id: &str,
    marked_only: bool,
) -> Result<Trace> {
    let mut trace = Trace::new(trace_id, use_case_id);
    trace.marked_only = marked_only;
    let mut in_region = false;
    let mut seq = 0u64;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            file: file.to_string(),
            line: line_no,
            message,
        };

        match line {
            "START" => {
                if in_region {
                    trace
                        .warnings
                        .push(format!("line {line_no}: nested START restarts marked region"));
                }
                in_region = true;
                trace.events.push(TraceEvent::marker(EventKind::MarkerStart, seq));
                seq += 1;
            }
            "STOP" => {
                if !in_region {
                    return Err(Error::Structure {
                        file: file.to_string(),
                        message: format!("line {line_no}: STOP without matching START"),
                    });
                }
                in_region = false;
                trace.events.push(TraceEvent::marker(EventKind::MarkerStop, seq));
                seq += 1;
            }
            _ => {
                let mut fields = line.splitn(3, ' ');
                let tag = fields.next().unwrap_or_default();
                if tag != "M" {
                    return Err(parse_err(format!("unknown event tag `{tag}`")));
                }
                let thread = fields
                    .next()
                    .filter(|t| !t.is_empty())
                    .ok_or_else(|| parse_err("missing thread id".into()))?;
                let name = fields
                    .next()
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| parse_err("missing method name".into()))?;
                let (class, method, sig) = split_qualified(name)
                    .ok_or_else(|| parse_err(format!("`{name}` is not <class>.<method><sig>")))?;

                if marked_only && !in_region {
                    continue;
                }
                trace.events.push(TraceEvent {
                    thread_id: thread.to_string(),
                    kind: EventKind::MethodEntry,
                    class_name: class.to_string(),
                    method_name: method.to_string(),
                    signature: sig.to_string(),
                    seq,
                });
                seq += 1;
            }
        }
    }

    if in_region {
        trace
            .warnings
            .push("START without STOP at end of file".to_string());
    }
    if trace.events.is_empty() {
        trace.warnings.push("empty trace".to_string());
    }
    Ok(trace)
}

pub fn serialize_trace(trace: &Trace) -> String {
    let mut out = String::new();
    for event in &trace.events {
        match event.kind {
            EventKind::MarkerStart => out.push_str("START\n"),
            EventKind::MarkerStop => out.push_str("STOP\n"),
            EventKind::MethodEntry => {
                out.push_str("M ");
                out.push_str(&event.thread_id);
                out.push(' ');
                out.push_str(&event.class_name);
                out.push('.');
                out.push_str(&event.method_name);
                out.push_str(&event.signature);
                out.push('\n');
            }
        }
    }
    out
}

pub fn read_trace_file(
    path: &Path,
    trace_id: &str,
    use_case_id: &str,
    marked_only: bool,
) -> Result<Trace> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(
        &text,
        &path.display().to_string(),
        trace_id,
        use_case_id,
        marked_only,
    )
}

/// One trace per file. The trace id is the file stem and the use case is the
/// name of the parent directory.
pub fn ingest_traces<P: AsRef<Path>>(paths: &[P], marked_only: bool) -> Result<Vec<Trace>> {
    let entries = paths
        .iter()
        .map(|p| {
            let path = p.as_ref();
            let trace_id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let use_case_id = path
                .parent()
                .and_then(Path::file_name)
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "default".to_string());
            ManifestEntry {
                trace_id,
                use_case_id,
                path: path.to_path_buf(),
            }
        })
        .collect::<Vec<_>>();
    ingest_entries(&entries, marked_only)
}

pub fn ingest_manifest(manifest: &CorpusManifest, marked_only: bool) -> Result<Vec<Trace>> {
    ingest_entries(&manifest.entries, marked_only)
}

fn ingest_entries(entries: &[ManifestEntry], marked_only: bool) -> Result<Vec<Trace>> {
    let mut seen = HashSet::new();
    for entry in entries {
        if !seen.insert(entry.trace_id.as_str()) {
            return Err(Error::Parameter(format!(
                "duplicate trace id `{}`",
                entry.trace_id
            )));
        }
    }

    // Files are independent; parse them on scoped threads and keep input order.
    let results: Vec<Result<Trace>> = std::thread::scope(|scope| {
        let handles: Vec<_> = entries
            .iter()
            .map(|entry| {
                scope.spawn(move || {
                    read_trace_file(&entry.path, &entry.trace_id, &entry.use_case_id, marked_only)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trace reader panicked"))
            .collect()
    });
    let traces = results.into_iter().collect::<Result<Vec<_>>>()?;
    for trace in &traces {
        for warning in &trace.warnings {
            log::warn!("trace {}: {}", trace.trace_id, warning);
        }
    }
    Ok(traces)
}

/// Keeps the first occurrence of every method; markers are left in place.
pub fn compress_trace(trace: &Trace) -> Trace {
    let mut seen = HashSet::new();
    let events = trace
        .events
        .iter()
        .filter(|e| match e.method_key() {
            Some(key) => seen.insert(key),
            None => true,
        })
        .cloned()
        .collect();
    Trace {
        events,
        ..trace.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub trace_id: String,
    pub use_case_id: String,
    pub path: PathBuf,
}

/// Tab-separated `trace_id  use_case_id  path`; relative paths resolve
/// against the manifest's directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, &path.display().to_string(), base)
    }

    pub fn parse(text: &str, file: &str, base: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                return Err(Error::Parse {
                    file: file.to_string(),
                    line: idx + 1,
                    message: "expected `trace_id<TAB>use_case_id<TAB>path`".to_string(),
                });
            }
            let path = Path::new(fields[2]);
            entries.push(ManifestEntry {
                trace_id: fields[0].to_string(),
                use_case_id: fields[1].to_string(),
                path: if path.is_absolute() {
                    path.to_path_buf()
                } else {
                    base.join(path)
                },
            });
        }
        Ok(CorpusManifest { entries })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# trace_id\tuse_case_id\tpath\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                e.trace_id,
                e.use_case_id,
                e.path.display()
            ));
        }
        out
    }
}

/// Per-trace raw counts plus document frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMethodCounts {
    pub traces: Vec<(String, BTreeMap<MethodKey, u64>)>,
    pub doc_freq: BTreeMap<MethodKey, usize>,
}

impl TraceMethodCounts {
    pub fn from_traces(traces: &[Trace]) -> Self {
        let rows: Vec<_> = traces
            .iter()
            .map(|t| (t.trace_id.clone(), t.counts()))
            .collect();
        Self::from_rows(rows)
    }

    pub fn from_rows(traces: Vec<(String, BTreeMap<MethodKey, u64>)>) -> Self {
        let mut doc_freq = BTreeMap::new();
        for (_, counts) in &traces {
            for (key, &n) in counts {
                if n > 0 {
                    *doc_freq.entry(key.clone()).or_insert(0) += 1;
                }
            }
        }
        TraceMethodCounts { traces, doc_freq }
    }

    pub fn num_traces(&self) -> usize {
        self.traces.len()
    }

    pub fn methods(&self) -> impl Iterator<Item = &MethodKey> {
        self.doc_freq.keys()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseCaseStats {
    pub use_case_id: String,
    pub scenarios: usize,
    pub methods: usize,
    pub distinct_methods: usize,
    /// Method entries left after relevance filtering, once known.
    pub filtered_methods: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub rows: Vec<UseCaseStats>,
}

pub fn corpus_stats(corpus: &[Trace]) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus has no traces".into()));
    }
    let mut groups: BTreeMap<&str, Vec<&Trace>> = BTreeMap::new();
    for trace in corpus {
        groups.entry(&trace.use_case_id).or_default().push(trace);
    }
    let rows = groups
        .into_iter()
        .map(|(use_case, traces)| {
            let distinct: BTreeSet<MethodKey> =
                traces.iter().flat_map(|t| t.method_keys()).collect();
            UseCaseStats {
                use_case_id: use_case.to_string(),
                scenarios: traces.len(),
                methods: traces.iter().map(|t| t.method_entry_count()).sum(),
                distinct_methods: distinct.len(),
                filtered_methods: None,
            }
        })
        .collect();
    Ok(CorpusStats { rows })
}

impl CorpusStats {
    /// Fills the filtered column: method entries whose key is in `kept`.
    pub fn with_filtered(mut self, corpus: &[Trace], kept: &BTreeSet<MethodKey>) -> Self {
        for row in &mut self.rows {
            let n = corpus
                .iter()
                .filter(|t| t.use_case_id == row.use_case_id)
                .flat_map(|t| t.method_keys())
                .filter(|k| kept.contains(k))
                .count();
            row.filtered_methods = Some(n);
        }
        self
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("use_case\tscenarios\tmethods\tdistinct_methods\tfiltered_methods\n");
        for r in &self.rows {
            let filtered = r
                .filtered_methods
                .map(|n| n.to_string())
                .unwrap_or_else(|| "-".to_string());
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                r.use_case_id, r.scenarios, r.methods, r.distinct_methods, filtered
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, marked: bool) -> Result<Trace> {
        parse_trace(text, "t.trace", "t", "u", marked)
    }

    #[test]
    fn tallies_method_entries() {
        let t = parse("M t1 A.f()\nM t1 A.g()\nM t1 A.f()\n", false).unwrap();
        assert_eq!(t.events.len(), 3);
        let counts = t.counts();
        assert_eq!(counts[&MethodKey::parse("A.f()").unwrap()], 2);
        assert_eq!(counts[&MethodKey::parse("A.g()").unwrap()], 1);
    }

    #[test]
    fn marked_only_drops_events_outside_markers() {
        let t = parse("START\nM t1 A.f()\nSTOP\nM t1 A.g()\n", true).unwrap();
        let counts = t.counts();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&MethodKey::parse("A.f()").unwrap()], 1);

        let all = parse("START\nM t1 A.f()\nSTOP\nM t1 A.g()\n", false).unwrap();
        assert_eq!(all.counts().len(), 2);
    }

    #[test]
    fn unmatched_stop_is_structural_error() {
        let err = parse("M t1 A.f()\nSTOP\n", true).unwrap_err();
        assert!(matches!(err, Error::Structure { .. }), "{err}");
    }

    #[test]
    fn nested_start_restarts_region() {
        let t = parse("START\nM t1 A.f()\nSTART\nM t1 A.g()\nSTOP\n", true).unwrap();
        assert_eq!(t.counts().len(), 2);
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn malformed_line_names_file_and_line() {
        let err = parse("# header\nM t1 A.f()\nX nope\n", false).unwrap_err();
        match err {
            Error::Parse { file, line, .. } => {
                assert_eq!(file, "t.trace");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(parse("M t1 nodot\n", false).is_err());
        assert!(parse("M t1\n", false).is_err());
    }

    #[test]
    fn empty_file_gives_empty_trace_with_warning() {
        let t = parse("# nothing\n\n", false).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.warnings, vec!["empty trace".to_string()]);
    }

    #[test]
    fn signature_with_spaces_and_dots() {
        let t = parse("M main org.jhotdraw.Figure.draw(java.awt.Graphics2D, int)\n", false).unwrap();
        let e = &t.events[0];
        assert_eq!(e.class_name, "org.jhotdraw.Figure");
        assert_eq!(e.method_name, "draw");
        assert_eq!(e.signature, "(java.awt.Graphics2D, int)");
        let key = e.method_key().unwrap();
        assert_eq!(key.class_name(), "org.jhotdraw.Figure");
        assert_eq!(key.method_name(), "draw");
    }

    #[test]
    fn compression_keeps_first_occurrences() {
        let t = Trace::from_methods("t2", "u", ["A.m1()", "A.m2()", "A.m1()", "A.m4()"]).unwrap();
        let c = compress_trace(&t);
        let names: Vec<_> = c.method_keys().map(|k| k.to_string()).collect();
        assert_eq!(names, ["A.m1()", "A.m2()", "A.m4()"]);
        assert_eq!(c.counts()[&MethodKey::parse("A.m1()").unwrap()], 1);
        assert_eq!(t.counts()[&MethodKey::parse("A.m1()").unwrap()], 2);

        let distinct = Trace::from_methods("t", "u", ["A.a()", "A.b()"]).unwrap();
        assert_eq!(compress_trace(&distinct), distinct);
        let empty = Trace::new("e", "u");
        assert_eq!(compress_trace(&empty), empty);
    }

    #[test]
    fn stats_per_use_case() {
        assert!(corpus_stats(&[]).is_err());
        let a = Trace::from_methods("a", "U1", ["A.f()", "A.g()"]).unwrap();
        let b = Trace::from_methods("b", "U1", ["A.f()", "B.h()", "B.h()"]).unwrap();
        let stats = corpus_stats(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(stats.rows.len(), 1);
        assert_eq!(stats.rows[0].scenarios, 2);
        assert_eq!(stats.rows[0].methods, 5);
        assert_eq!(stats.rows[0].distinct_methods, 3);

        let single = corpus_stats(&[Trace::from_methods("s", "U", ["A.a()", "A.b()", "A.c()"]).unwrap()])
            .unwrap();
        assert_eq!((single.rows[0].scenarios, single.rows[0].methods), (1, 3));

        let kept: BTreeSet<_> = [MethodKey::parse("A.f()").unwrap()].into();
        let filtered = stats.with_filtered(&[a, b], &kept);
        assert_eq!(filtered.rows[0].filtered_methods, Some(2));
    }

    #[test]
    fn manifest_resolves_relative_paths() {
        let m = CorpusManifest::parse("# c\nt1\tU1\ttraces/a.trace\n", "m", Path::new("/base")).unwrap();
        assert_eq!(m.entries[0].path, Path::new("/base/traces/a.trace"));
        assert!(CorpusManifest::parse("t1\tU1\n", "m", Path::new("")).is_err());
    }
}
