//! Identifier splitting, stop-word removal and stemming.

use featloc::lexicon::stem::stem;
use featloc::lexicon::{split_words, Tokenizer};

fn main() {
    let tokenizer = Tokenizer::new();
    for raw in [
        "DrawingEditor",
        "m_figureCount2",
        "HTTPResponseHandler",
        "getUndoActivity",
        "Returns the bounding box of this figure.",
    ] {
        println!("{raw:<45} {:?} -> {:?}", split_words(raw), tokenizer.tokenize(raw));
    }

    for word in ["connected", "relational", "generalizations", "hopping"] {
        println!("{word} -> {}", stem(word));
    }

    let custom = Tokenizer::new().with_keywords(["figure"]);
    println!("custom keywords: {:?}", custom.tokenize("figure handle"));
}
