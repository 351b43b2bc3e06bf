//! Builds the trace-by-identifier matrix for the bundled fixture.

use std::path::Path;

use featloc::lexicon::{build_matrix, ingest_facts, LexiconOptions};
use featloc::pipeline::resolve_corpus;
use featloc::relevance::{filter_methods, score_methods};
use featloc::trace::{compress_trace, ingest_manifest, Trace, TraceMethodCounts};

fn main() -> featloc::Result<()> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/micro");
    let traces = ingest_manifest(&resolve_corpus(&fixture.join("manifest.tsv"))?, false)?;
    let table = score_methods(&TraceMethodCounts::from_traces(&traces))?;
    let kept = filter_methods(&table, 0.01)?.kept;
    let store = ingest_facts(&fixture.join("facts.tsv"))?;

    let compressed: Vec<Trace> = traces.iter().map(compress_trace).collect();
    let matrix = build_matrix(&compressed, &kept, &store, &LexiconOptions::default())?;
    println!(
        "{} traces x {} terms, {} tokens, {} methods",
        matrix.num_docs(),
        matrix.vocab_size(),
        matrix.total_tokens(),
        matrix.methods.len()
    );
    for (id, row) in matrix.trace_ids.iter().zip(&matrix.rows) {
        let terms: Vec<String> = row
            .iter()
            .map(|&(v, n)| format!("{}:{n}", matrix.dictionary.term(v).unwrap_or("?")))
            .collect();
        println!("{id:<12} {}", terms.join(" "));
    }

    let with_class = LexiconOptions {
        include_class_facts: true,
        ..LexiconOptions::default()
    };
    let wider = build_matrix(&compressed, &kept, &store, &with_class)?;
    println!("with class facts: {} terms", wider.vocab_size());
    Ok(())
}
