//! Source facts, identifier tokenization and the trace-by-identifier matrix.

mod facts;
mod matrix;
pub mod stem;
mod tokenize;

use std::collections::BTreeMap;

pub use facts::{ingest_facts, ClassFact, FactsStore, MethodFact};
pub use matrix::{build_matrix, TermDictionary, TraceIdentifierMatrix};
pub use tokenize::{split_words, Tokenizer};

/// Settings shared by everything that turns facts into terms.
#[derive(Debug, Clone, Default)]
pub struct LexiconOptions {
    pub tokenizer: Tokenizer,
    /// Also draw terms from the owning class's parent, interfaces and fields.
    pub include_class_facts: bool,
}

/// Term counts for one method: its name, arguments, return type and value,
/// comment words and the owning class's simple name.
pub fn method_term_vector(
    method: &MethodFact,
    class: &ClassFact,
    opts: &LexiconOptions,
) -> BTreeMap<String, u32> {
    let tok = &opts.tokenizer;
    let mut counts = BTreeMap::new();
    let mut add = |raw: &str| {
        for term in tok.tokenize(raw) {
            *counts.entry(term).or_insert(0) += 1;
        }
    };

    add(method.method_name());
    for arg in &method.arguments {
        add(arg);
    }
    add(&method.return_type);
    if let Some(value) = &method.return_value {
        add(value);
    }
    for word in &method.comment_terms {
        add(word);
    }
    add(class.simple_name());

    if opts.include_class_facts {
        if let Some(parent) = &class.inherits_from {
            add(parent);
        }
        for name in class.implements_to.iter().chain(&class.variables) {
            add(name);
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::MethodKey;

    fn fact(key: &str, args: &[&str], comment: &str) -> MethodFact {
        let mut m = MethodFact::new(MethodKey::parse(key).unwrap());
        m.arguments = args.iter().map(|s| s.to_string()).collect();
        m.return_type = "void".into();
        m.comment_terms = comment.split_whitespace().map(str::to_string).collect();
        m
    }

    #[test]
    fn rectangle_draw_figure_vector() {
        let m = fact("RectangleFigure.drawFigure(Graphics2D)", &["Graphics2D"], "draw the rectangle");
        let c = ClassFact::new("RectangleFigure");
        let v = method_term_vector(&m, &c, &LexiconOptions::default());
        let expected: BTreeMap<String, u32> = [("draw", 2), ("figur", 2), ("rectangl", 2), ("graphic", 1)]
            .into_iter()
            .map(|(k, n)| (k.to_string(), n))
            .collect();
        assert_eq!(v, expected);
    }

    #[test]
    fn bare_method_uses_name_and_class() {
        let m = fact("pkg.UndoManager.undo()", &[], "");
        let c = ClassFact::new("pkg.UndoManager");
        let v = method_term_vector(&m, &c, &LexiconOptions::default());
        assert_eq!(v.get("undo"), Some(&2));
        assert_eq!(v.get("manag"), Some(&1));
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn class_facts_behind_flag() {
        let m = fact("Box.size()", &[], "");
        let mut c = ClassFact::new("Box");
        c.inherits_from = Some("AbstractShape".into());
        c.variables = vec!["cornerRadius".into()];
        let plain = method_term_vector(&m, &c, &LexiconOptions::default());
        assert!(!plain.contains_key("shape"));
        let opts = LexiconOptions {
            include_class_facts: true,
            ..Default::default()
        };
        let full = method_term_vector(&m, &c, &opts);
        assert_eq!(full.get("shape"), Some(&1));
        assert_eq!(full.get("radiu"), Some(&1));
    }
}
