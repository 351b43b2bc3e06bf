//! Flat-file store of class and method facts.
//!
//! One record per line, tab-separated, list fields comma-separated:
//!
//! ```text
//! C  <class>  <inherits_from>  <implements,...>  <variables,...>
//! M  <class>.<method><sig>  <arguments,...>  <return_type>  <return_value>  <comment>
//! ```
//!
//! Empty fields are allowed. A method's owning class is the class part of its
//! key and must have a `C` record somewhere in the file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::MethodKey;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFact {
    pub class_name: String,
    pub inherits_from: Option<String>,
    pub implements_to: Vec<String>,
    pub variables: Vec<String>,
}

impl ClassFact {
    pub fn new(class_name: impl Into<String>) -> Self {
        ClassFact {
            class_name: class_name.into(),
            inherits_from: None,
            implements_to: Vec::new(),
            variables: Vec::new(),
        }
    }

    /// Class name without its package prefix.
    pub fn simple_name(&self) -> &str {
        self.class_name.rsplit('.').next().unwrap_or(&self.class_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodFact {
    pub method_key: MethodKey,
    pub class_name: String,
    pub arguments: Vec<String>,
    pub return_type: String,
    pub return_value: Option<String>,
    /// Raw comment words, untokenized.
    pub comment_terms: Vec<String>,
}

impl MethodFact {
    pub fn new(method_key: MethodKey) -> Self {
        MethodFact {
            class_name: method_key.class_name().to_string(),
            method_key,
            arguments: Vec::new(),
            return_type: String::new(),
            return_value: None,
            comment_terms: Vec::new(),
        }
    }

    pub fn method_name(&self) -> &str {
        self.method_key.method_name()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactsStore {
    classes: BTreeMap<String, ClassFact>,
    methods: BTreeMap<MethodKey, MethodFact>,
}

impl FactsStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_class(&mut self, class: ClassFact) -> Result<()> {
        if self.classes.contains_key(&class.class_name) {
            return Err(Error::Facts(format!("duplicate class `{}`", class.class_name)));
        }
        self.classes.insert(class.class_name.clone(), class);
        Ok(())
    }

    /// Does not check the owning class; see [`FactsStore::validate`].
    pub fn insert_method(&mut self, method: MethodFact) -> Result<()> {
        if self.methods.contains_key(&method.method_key) {
            return Err(Error::Facts(format!(
                "duplicate method key `{}`",
                method.method_key
            )));
        }
        self.methods.insert(method.method_key.clone(), method);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let orphans: Vec<&str> = self
            .methods
            .values()
            .filter(|m| !self.classes.contains_key(&m.class_name))
            .map(|m| m.method_key.as_str())
            .collect();
        if orphans.is_empty() {
            Ok(())
        } else {
            Err(Error::Facts(format!(
                "methods reference unknown classes: {}",
                orphans.join(", ")
            )))
        }
    }

    pub fn class(&self, name: &str) -> Option<&ClassFact> {
        self.classes.get(name)
    }

    pub fn method(&self, key: &MethodKey) -> Option<&MethodFact> {
        self.methods.get(key)
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassFact> {
        self.classes.values()
    }

    pub fn methods(&self) -> impl Iterator<Item = &MethodFact> {
        self.methods.values()
    }

    pub fn methods_of<'a>(&'a self, class_name: &'a str) -> impl Iterator<Item = &'a MethodFact> + 'a {
        self.methods.values().filter(move |m| m.class_name == class_name)
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty() && self.methods.is_empty()
    }

    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut store = FactsStore::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                file: file.to_string(),
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "C" => {
                    if fields.len() != 5 {
                        return Err(err(format!("class record needs 5 fields, got {}", fields.len())));
                    }
                    if fields[1].is_empty() {
                        return Err(err("empty class name".into()));
                    }
                    store
                        .insert_class(ClassFact {
                            class_name: fields[1].to_string(),
                            inherits_from: non_empty(fields[2]),
                            implements_to: split_list(fields[3]),
                            variables: split_list(fields[4]),
                        })
                        .map_err(|e| err(e.to_string()))?;
                }
                "M" => {
                    if fields.len() != 6 {
                        return Err(err(format!("method record needs 6 fields, got {}", fields.len())));
                    }
                    let key = MethodKey::parse(fields[1])
                        .ok_or_else(|| err(format!("`{}` is not <class>.<method><sig>", fields[1])))?;
                    let mut method = MethodFact::new(key);
                    method.arguments = split_list(fields[2]);
                    method.return_type = fields[3].to_string();
                    method.return_value = non_empty(fields[4]);
                    method.comment_terms = fields[5].split_whitespace().map(str::to_string).collect();
                    store.insert_method(method).map_err(|e| err(e.to_string()))?;
                }
                other => return Err(err(format!("unknown record kind `{other}`"))),
            }
        }
        store.validate()?;
        Ok(store)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in self.classes.values() {
            out.push_str(&format!(
                "C\t{}\t{}\t{}\t{}\n",
                c.class_name,
                c.inherits_from.as_deref().unwrap_or(""),
                c.implements_to.join(","),
                c.variables.join(",")
            ));
        }
        for m in self.methods.values() {
            out.push_str(&format!(
                "M\t{}\t{}\t{}\t{}\t{}\n",
                m.method_key,
                m.arguments.join(","),
                m.return_type,
                m.return_value.as_deref().unwrap_or(""),
                m.comment_terms.join(" ")
            ));
        }
        out
    }
}

pub fn ingest_facts(path: &Path) -> Result<FactsStore> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let store = FactsStore::parse(&text, &path.display().to_string())?;
    if store.is_empty() {
        log::warn!("facts file {} holds no records", path.display());
    }
    Ok(store)
}

fn non_empty(s: &str) -> Option<String> {
    let s = s.trim();
    (!s.is_empty()).then(|| s.to_string())
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# facts
C\tEllipseFigure\tAbstractFigure\tFigure,Cloneable\tellipse,bounds
M\tEllipseFigure.draw(Graphics2D)\tGraphics2D\tvoid\t\tdraws the ellipse figure
";

    #[test]
    fn method_retrievable_by_key() {
        let store = FactsStore::parse(SAMPLE, "f").unwrap();
        let key = MethodKey::parse("EllipseFigure.draw(Graphics2D)").unwrap();
        let m = store.method(&key).unwrap();
        assert_eq!(m.class_name, "EllipseFigure");
        assert_eq!(m.comment_terms, ["draws", "the", "ellipse", "figure"]);
        assert_eq!(m.arguments, ["Graphics2D"]);
        assert_eq!(m.return_value, None);
        let c = store.class("EllipseFigure").unwrap();
        assert_eq!(c.inherits_from.as_deref(), Some("AbstractFigure"));
        assert_eq!(c.implements_to, ["Figure", "Cloneable"]);
    }

    #[test]
    fn text_round_trip() {
        let store = FactsStore::parse(SAMPLE, "f").unwrap();
        assert_eq!(FactsStore::parse(&store.to_text(), "g").unwrap(), store);
    }

    #[test]
    fn empty_file_gives_empty_store() {
        assert!(FactsStore::parse("", "f").unwrap().is_empty());
    }

    #[test]
    fn duplicate_method_rejected() {
        let text = format!("{SAMPLE}M\tEllipseFigure.draw(Graphics2D)\t\tvoid\t\t\n");
        let err = FactsStore::parse(&text, "f").unwrap_err();
        assert!(err.to_string().contains("duplicate method"), "{err}");
    }

    #[test]
    fn unknown_class_lists_offender() {
        let text = "M\tGhost.boo()\t\tvoid\t\t\n";
        let err = FactsStore::parse(text, "f").unwrap_err();
        assert!(err.to_string().contains("Ghost.boo()"), "{err}");
    }

    #[test]
    fn bad_records() {
        assert!(FactsStore::parse("X\tfoo\n", "f").is_err());
        assert!(FactsStore::parse("C\tA\t\t\n", "f").is_err());
        assert!(FactsStore::parse("C\tA\t\t\t\nM\tnodot\t\t\t\t\n", "f").is_err());
    }
}
