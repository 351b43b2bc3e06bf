//! Fits LDA to a synthetic corpus with two planted topics and prints what it
//! finds next to what was planted.

use featloc::topics::synthetic::{planted, PlantedSpec};
use featloc::topics::{fit, LdaConfig};

fn main() -> featloc::Result<()> {
    let corpus = planted(&PlantedSpec {
        num_docs: 40,
        words_per_topic: vec![10, 10],
        alpha: 0.1,
        mean_length: 60.0,
        seed: 1,
    })?;
    let mut cfg = LdaConfig::new(2);
    cfg.iterations = 500;
    cfg.seed = 1;
    let model = fit(&corpus.matrix, &cfg)?;

    for (t, words) in model.top_words(10).iter().enumerate() {
        let names: Vec<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
        println!("topic {t}: {}", names.join(" "));
    }
    for (t, words) in corpus.topics.iter().enumerate() {
        println!("planted {t}: {}", words.join(" "));
    }
    for (sweep, ll) in &model.likelihood {
        println!("sweep {sweep:>4}  log-likelihood {ll:.3}");
    }
    Ok(())
}
