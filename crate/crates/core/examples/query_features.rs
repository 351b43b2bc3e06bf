//! Runs the fixture pipeline into a temp directory and asks it about features.

use std::path::Path;

use featloc::pipeline::{run_pipeline, PipelineConfig};
use featloc::query::{render_result, QueryIndex};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/micro");
    let mut cfg = PipelineConfig::load(&fixture.join("featloc.conf"))?;
    cfg.out_dir = std::env::temp_dir().join("featloc-query-example");
    run_pipeline(&cfg)?;

    let index = QueryIndex::load(&cfg.out_dir.join("index.json"))?;
    for q in ["draw rectangle", "undo the last edit", "zebra"] {
        print!("{}", render_result(&index.query(q, Some(3))?));
        println!();
    }
    if let Err(e) = index.query("if the", None) {
        println!("rejected: {e}");
    }

    let detail = index.drill_down(0, Some(2))?;
    println!("topic 0 [{}]: {:?}", detail.words.join(" "), detail.traces);
    Ok(())
}
