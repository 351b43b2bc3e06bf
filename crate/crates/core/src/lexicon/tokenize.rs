use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lexicon::stem::stem;

const ENGLISH_STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
];

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "false", "final",
    "finally", "float", "for", "goto", "if", "implements", "import", "instanceof", "int",
    "interface", "long", "native", "new", "null", "package", "private", "protected", "public",
    "return", "short", "static", "strictfp", "super", "switch", "synchronized", "this", "throw",
    "throws", "transient", "true", "try", "void", "volatile", "while",
];

/// Splits identifiers and comment text into stemmed terms.
///
/// Words are cut at non-alphanumerics, underscores, digits and camelCase
/// boundaries (`HTTPServer` -> `http`, `server`), lowercased, filtered against
/// the stop and keyword lists and the minimum length, then stemmed.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stop_words: HashSet<String>,
    keywords: HashSet<String>,
    min_len: usize,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer {
            stop_words: ENGLISH_STOP_WORDS.iter().map(|s| s.to_string()).collect(),
            keywords: JAVA_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            min_len: 2,
        }
    }
}

impl Tokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_stop_words<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stop_words = words.into_iter().map(|w| w.into().to_lowercase()).collect();
        self
    }

    pub fn with_keywords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.keywords = words.into_iter().map(|w| w.into().to_lowercase()).collect();
        self
    }

    pub fn stop_words(&self) -> Vec<String> {
        sorted(&self.stop_words)
    }

    pub fn keywords(&self) -> Vec<String> {
        sorted(&self.keywords)
    }

    /// Reads a whitespace-separated word list (lines starting with `#` skipped).
    pub fn read_word_list(path: &Path) -> Result<Vec<String>> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(str::split_whitespace)
            .map(str::to_string)
            .collect())
    }

    pub fn tokenize(&self, raw: &str) -> Vec<String> {
        split_words(raw)
            .into_iter()
            .map(|w| w.to_lowercase())
            .filter(|w| self.accepts(w))
            .map(|w| stem(&w))
            .filter(|w| w.len() >= self.min_len && !self.stop_words.contains(w))
            .collect()
    }

    fn accepts(&self, word: &str) -> bool {
        word.len() >= self.min_len && !self.stop_words.contains(word) && !self.keywords.contains(word)
    }
}

fn sorted(set: &HashSet<String>) -> Vec<String> {
    let mut v: Vec<String> = set.iter().cloned().collect();
    v.sort();
    v
}

/// Raw word pieces before case folding.
pub fn split_words(raw: &str) -> Vec<&str> {
    let mut words = Vec::new();
    for chunk in raw.split(|c: char| !c.is_alphabetic()) {
        if chunk.is_empty() {
            continue;
        }
        let chars: Vec<(usize, char)> = chunk.char_indices().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let prev = chars[i - 1].1;
            let cur = chars[i].1;
            let next_lower = chars.get(i + 1).is_some_and(|(_, c)| c.is_lowercase());
            let boundary = (prev.is_lowercase() && cur.is_uppercase())
                || (prev.is_uppercase() && cur.is_uppercase() && next_lower);
            if boundary {
                words.push(&chunk[start..chars[i].0]);
                start = chars[i].0;
            }
        }
        words.push(&chunk[start..]);
    }
    words
}
