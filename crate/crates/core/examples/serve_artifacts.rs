//! Answers the HTTP API's requests in-process. Pass `--listen` to serve the
//! same run on 127.0.0.1:8080 instead.

use std::collections::HashMap;
use std::path::Path;

use featloc::pipeline::{run_pipeline, PipelineConfig};
use featloc::service::{serve, ArtifactService};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/micro");
    let mut cfg = PipelineConfig::load(&fixture.join("featloc.conf"))?;
    cfg.out_dir = std::env::temp_dir().join("featloc-serve-example");
    run_pipeline(&cfg)?;

    if std::env::args().any(|a| a == "--listen") {
        let rt = tokio::runtime::Runtime::new()?;
        rt.block_on(serve(&cfg.out_dir, "127.0.0.1:8080".parse()?, None))?;
        return Ok(());
    }

    let service = ArtifactService::open(&cfg.out_dir)?;
    let requests = [
        ("/v1/topics", vec![]),
        ("/v1/query", vec![("q", "undo")]),
        ("/v1/query", vec![("q", "")]),
        ("/v1/topics/1/detail", vec![("limit", "2")]),
        ("/v1/clusters", vec![("lambda", "0.5")]),
        ("/v1/stats", vec![]),
    ];
    for (path, params) in requests {
        let params: HashMap<String, String> =
            params.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let resp = service.handle(path, &params);
        let body = resp.body.to_string();
        println!("{path} {params:?} -> {} {}", resp.status, &body[..body.len().min(160)]);
    }
    Ok(())
}
