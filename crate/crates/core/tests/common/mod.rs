#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use featloc::lexicon::{build_matrix, ingest_facts, TraceIdentifierMatrix};
use featloc::pipeline::{resolve_corpus, PipelineConfig};
use featloc::relevance::{filter_methods, score_methods};
use featloc::trace::{compress_trace, ingest_manifest, MethodKey, Trace, TraceMethodCounts};
use proptest::prelude::*;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/micro")
}

pub fn fixture_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(&fixture_dir().join("featloc.conf")).unwrap();
    cfg.out_dir = out.to_path_buf();
    cfg
}

pub fn fixture_traces() -> Vec<Trace> {
    let cfg = fixture_config(Path::new("unused"));
    ingest_manifest(&resolve_corpus(&cfg.traces).unwrap(), false).unwrap()
}

/// Ingest, score, filter and build, in memory.
pub fn fixture_matrix() -> TraceIdentifierMatrix {
    let cfg = fixture_config(Path::new("unused"));
    let traces = fixture_traces();
    let table = score_methods(&TraceMethodCounts::from_traces(&traces)).unwrap();
    let kept = filter_methods(&table, cfg.score_threshold).unwrap().kept;
    let store = ingest_facts(&cfg.facts).unwrap();
    let compressed: Vec<Trace> = traces.iter().map(compress_trace).collect();
    build_matrix(&compressed, &kept, &store, &cfg.lexicon_options().unwrap()).unwrap()
}

pub fn method(j: usize) -> MethodKey {
    MethodKey::new(&format!("C{j:02}"), &format!("m{j:02}"), "()")
}

/// Dense `traces x methods` invocation counts as a scoring input.
pub fn counts_from_dense(rows: &[Vec<u64>]) -> TraceMethodCounts {
    TraceMethodCounts::from_rows(
        rows.iter()
            .enumerate()
            .map(|(i, row)| {
                let counts: BTreeMap<MethodKey, u64> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &n)| n > 0)
                    .map(|(j, &n)| (method(j), n))
                    .collect();
                (format!("T{}", i + 1), counts)
            })
            .collect(),
    )
}

/// Three nested loops over methods, traces and traces again.
pub fn brute_force_scores(rows: &[Vec<u64>]) -> Vec<f64> {
    let d = rows.len() as f64;
    let m = rows[0].len();
    let mut scores = vec![0.0; m];
    for j in 0..m {
        let mut dj = 0.0;
        for row in rows {
            if row[j] > 0 {
                dj += 1.0;
            }
        }
        if dj == 0.0 {
            continue;
        }
        for row in rows {
            let total: u64 = row.iter().sum();
            scores[j] += row[j] as f64 / total as f64 * (d / dj).log10();
        }
    }
    scores
}

/// Up to 8 traces over up to 12 methods; every trace invokes something.
pub fn dense_corpus() -> impl Strategy<Value = Vec<Vec<u64>>> {
    (1usize..=8, 1usize..=12).prop_flat_map(|(d, m)| {
        prop::collection::vec(prop::collection::vec(0u64..5, m), d).prop_map(|mut rows| {
            for (i, row) in rows.iter_mut().enumerate() {
                if row.iter().all(|&n| n == 0) {
                    let j = i % row.len();
                    row[j] = 1;
                }
            }
            rows
        })
    })
}

/// The 3-trace / 4-method example; m4 runs in every trace.
pub fn three_trace_rows() -> Vec<Vec<u64>> {
    vec![vec![1, 1, 1, 1], vec![2, 1, 0, 1], vec![0, 0, 2, 2]]
}

pub const REFERENCE_CLASSES: [&str; 11] = [
    "AddTool",
    "PolyLineFigure",
    "PolyLineConnector",
    "PolygonTool",
    "PaletteButton",
    "TextAreaFigure",
    "DragTracker",
    "NestedCreationTool",
    "TriangleFigure",
    "FigureChange",
    "FigureChangeAdapter",
];

pub fn reference_class_weights() -> Vec<Vec<f64>> {
    vec![
        vec![0.352631, 0.243412, 0.237861, 0.012321],
        vec![0.123021, 0.534300, 0.030045, 0.320000],
        vec![0.000120, 0.650132, 0.120000, 0.400521],
        vec![0.000521, 0.670120, 0.064521, 0.414211],
        vec![0.214211, 0.124832, 0.214211, 0.300000],
        vec![0.400000, 0.517232, 0.490000, 0.135432],
        vec![0.135462, 0.111213, 0.567262, 0.520000],
        vec![0.342401, 0.000000, 0.220000, 0.124221],
        vec![0.526342, 0.131212, 0.652123, 0.004211],
        vec![0.621001, 0.106423, 0.323232, 0.000000],
        vec![0.600000, 0.006423, 0.124242, 0.122462],
    ]
}

/// Rows with no zero vector, for cosine-based clustering.
pub fn weight_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=9, 1usize..=5).prop_flat_map(|(n, k)| {
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, k), n).prop_map(|mut rows| {
            for row in rows.iter_mut() {
                if row.iter().all(|&x| x < 1e-6) {
                    row[0] = 0.5;
                }
            }
            rows
        })
    })
}

pub mod linearity {
    use std::collections::{BTreeMap, BTreeSet};

    use featloc::lexicon::method_term_vector;
    use featloc::lexicon::{build_matrix, ClassFact, FactsStore, LexiconOptions, MethodFact};
    use featloc::trace::{MethodKey, Trace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const WORDS: [&str; 10] = [
        "paint", "shape", "undo", "mouse", "drag", "figure", "handle", "tool", "connect", "text",
    ];

    pub struct Instance {
        pub traces: Vec<Trace>,
        pub kept: BTreeSet<MethodKey>,
        pub store: FactsStore,
    }

    pub fn instance(seed: u64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let num_methods = rng.random_range(1..=8);
        let keys: Vec<MethodKey> = (0..num_methods)
            .map(|j| MethodKey::new(&format!("pkg.K{}", j % 3), &format!("op{j}"), "()"))
            .collect();
        let mut store = FactsStore::new();
        for c in 0..3 {
            store.insert_class(ClassFact::new(format!("pkg.K{c}"))).unwrap();
        }
        for key in &keys {
            if rng.random_bool(0.1) {
                continue;
            }
            let mut fact = MethodFact::new(key.clone());
            let n = rng.random_range(0..5);
            fact.comment_terms = (0..n)
                .map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string())
                .collect();
            if rng.random_bool(0.5) {
                fact.arguments.push(WORDS[rng.random_range(0..WORDS.len())].to_string());
            }
            store.insert_method(fact).unwrap();
        }
        let traces = (0..rng.random_range(1..=6))
            .map(|i| {
                let calls: Vec<String> = (0..rng.random_range(1..=10))
                    .map(|_| keys[rng.random_range(0..keys.len())].to_string())
                    .collect();
                Trace::from_methods(format!("T{i}"), "u", calls.iter().map(String::as_str)).unwrap()
            })
            .collect();
        let mut kept: BTreeSet<MethodKey> =
            keys.iter().filter(|_| rng.random_bool(0.7)).cloned().collect();
        if kept.is_empty() {
            kept.insert(keys[0].clone());
        }
        Instance { traces, kept, store }
    }

    /// `B (traces x methods, 0/1) * C (methods x terms, counts)` by term name,
    /// zero columns dropped.
    pub fn dense_oracle(inst: &Instance, opts: &LexiconOptions) -> Vec<BTreeMap<String, u32>> {
        let methods: Vec<&MethodKey> = inst
            .kept
            .iter()
            .filter(|k| inst.store.method(k).is_some())
            .collect();
        let c: Vec<BTreeMap<String, u32>> = methods
            .iter()
            .map(|k| {
                let m = inst.store.method(k).unwrap();
                method_term_vector(m, inst.store.class(&m.class_name).unwrap(), opts)
            })
            .collect();
        inst.traces
            .iter()
            .map(|t| {
                let present = t.distinct_methods();
                let mut row = BTreeMap::new();
                for (j, key) in methods.iter().enumerate() {
                    let b = u32::from(present.contains(*key));
                    for (term, &n) in &c[j] {
                        *row.entry(term.clone()).or_insert(0) += b * n;
                    }
                }
                row.retain(|_, n| *n > 0);
                row
            })
            .collect()
    }

    /// Ok when build_matrix agrees with the oracle cell by cell, or both
    /// reject the instance.
    pub fn check(seed: u64) -> Result<(), String> {
        let inst = instance(seed);
        let opts = LexiconOptions::default();
        let oracle = dense_oracle(&inst, &opts);
        let built = build_matrix(&inst.traces, &inst.kept, &inst.store, &opts);
        let degenerate = oracle.iter().any(|r| r.is_empty());
        match built {
            Err(_) if degenerate => Ok(()),
            Err(e) => Err(format!("seed {seed}: unexpected error {e}")),
            Ok(_) if degenerate => Err(format!("seed {seed}: empty row accepted")),
            Ok(m) => {
                for (d, expected) in oracle.iter().enumerate() {
                    let got: BTreeMap<String, u32> = m.rows[d]
                        .iter()
                        .map(|&(v, n)| (m.dictionary.term(v).unwrap().to_string(), n))
                        .collect();
                    if &got != expected {
                        return Err(format!("seed {seed}, trace {d}: {got:?} != {expected:?}"));
                    }
                }
                let terms: BTreeSet<&String> = oracle.iter().flat_map(|r| r.keys()).collect();
                if terms.len() != m.vocab_size() {
                    return Err(format!("seed {seed}: dictionary has unused terms"));
                }
                Ok(())
            }
        }
    }
}
