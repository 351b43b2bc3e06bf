//! Runs every stage on the fixture and prints the manifest.
//!
//! ```text
//! cargo run --example run_pipeline -- [out_dir]
//! ```

use std::path::{Path, PathBuf};

use featloc::pipeline::{run_pipeline, PipelineConfig, RunManifest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/micro");
    let mut cfg = PipelineConfig::load(&fixture.join("featloc.conf"))?;
    cfg.out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("featloc-run-example"));

    let manifest = match run_pipeline(&cfg) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}; finished: {:?}", e.partial.stages.iter().map(|r| r.stage).collect::<Vec<_>>());
            std::process::exit(1);
        }
    };
    for record in &manifest.stages {
        println!("{} ({} ms)", record.stage, record.finished_unix_ms - record.started_unix_ms);
        for (path, digest) in &record.outputs {
            println!("  {path:<26} {}", &digest[..12]);
        }
    }

    RunManifest::load(&cfg.out_dir)?.verify(&cfg.out_dir)?;
    println!("verified {}", cfg.out_dir.display());
    print!("{}", std::fs::read_to_string(cfg.out_dir.join("model/topwords.tsv"))?);
    Ok(())
}
