//! Penn Treebank POS tags: pass-through of pre-tagged input and a small
//! lexicon + suffix heuristic tagger for smoke tests. The heuristic tagger is
//! not a substitute for a trained tagger.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub trait PosTagger: Send + Sync {
    /// One tag per word.
    fn tag(&self, words: &[&str]) -> Result<Vec<String>>;
}

/// Tags a word list with the given provider.
pub fn tag_pos(words: &[&str], tagger: &dyn PosTagger) -> Result<Vec<String>> {
    tagger.tag(words)
}

/// Reads tags from `surface<TAB>tag` entries.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassThroughTagger;

impl PosTagger for PassThroughTagger {
    fn tag(&self, words: &[&str]) -> Result<Vec<String>> {
        words
            .iter()
            .enumerate()
            .map(|(i, w)| parse_tagged_line(w, i + 1).map(|(_, tag)| tag))
            .collect()
    }
}

fn parse_tagged_line(line: &str, line_no: usize) -> Result<(String, String)> {
    let bad = |reason: &str| Error::TagFormat {
        line: line_no,
        reason: reason.to_string(),
    };
    let mut parts = line.split('\t');
    let surface = parts.next().unwrap_or_default();
    let tag = parts.next().ok_or_else(|| bad("expected surface<TAB>tag"))?;
    if parts.next().is_some() {
        return Err(bad("more than two columns"));
    }
    if surface.is_empty() || surface.chars().any(char::is_whitespace) {
        return Err(bad("empty surface or surface with whitespace"));
    }
    let tag = tag.trim_end_matches('\r');
    if tag.is_empty() || tag.chars().any(char::is_whitespace) {
        return Err(bad("empty tag or tag with whitespace"));
    }
    Ok((surface.to_string(), tag.to_string()))
}

/// Parses the pre-tagged corpus format: one `surface<TAB>tag` per line,
/// blank lines between documents.
pub fn read_tagged_corpus(text: &str) -> Result<Vec<Vec<(String, String)>>> {
    let mut docs = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                docs.push(std::mem::take(&mut current));
            }
            continue;
        }
        current.push(parse_tagged_line(line, i + 1)?);
    }
    if !current.is_empty() {
        docs.push(current);
    }
    Ok(docs)
}

/// Lexicon and suffix rules over the Penn Treebank tagset.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicTagger;

fn lexicon() -> &'static HashMap<&'static str, &'static str> {
    static LEXICON: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    LEXICON.get_or_init(|| {
        let groups: &[(&str, &[&str])] = &[
            ("DT", &["the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "no", "all", "both"]),
            ("IN", &["of", "in", "on", "at", "by", "for", "with", "from", "about", "into", "over", "after", "before", "under", "between", "through", "during", "without", "against", "among", "since", "than", "as", "because", "if", "while", "though", "although", "upon", "near", "across", "behind", "within"]),
            ("TO", &["to"]),
            ("CC", &["and", "or", "but", "nor", "yet"]),
            ("PRP", &["i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them"]),
            ("PRP$", &["my", "your", "his", "its", "our", "their", "her"]),
            ("MD", &["will", "would", "can", "could", "may", "might", "must", "shall", "should"]),
            ("VBZ", &["is", "has", "does"]),
            ("VBP", &["are", "have", "do", "am"]),
            ("VBD", &["was", "were", "had", "did", "said", "went", "came", "made", "took"]),
            ("VB", &["be"]),
            ("VBN", &["been"]),
            ("VBG", &["being"]),
            ("WDT", &["which"]),
            ("WP", &["who", "what", "whom"]),
            ("WRB", &["when", "where", "why", "how"]),
            ("RB", &["not", "very", "also", "just", "only", "too", "never", "now", "then", "there", "here", "often", "always"]),
        ];
        groups
            .iter()
            .flat_map(|(tag, words)| words.iter().map(move |w| (*w, *tag)))
            .collect()
    })
}

fn punctuation_tag(word: &str) -> Option<&'static str> {
    Some(match word {
        "." | "!" | "?" => ".",
        "," => ",",
        ":" | ";" | "-" | "--" | "..." => ":",
        "(" | "[" | "{" => "(",
        ")" | "]" | "}" => ")",
        "\"" | "``" => "``",
        "''" => "''",
        "'" => "POS",
        "$" => "$",
        "#" => "#",
        _ if word.chars().all(|c| !c.is_alphanumeric()) => "SYM",
        _ => return None,
    })
}

fn is_number(word: &str) -> bool {
    word.chars().any(|c| c.is_ascii_digit())
        && word.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-' | '/'))
}

fn suffix_tag(lower: &str) -> &'static str {
    const JJ_SUFFIXES: &[&str] = &["ous", "ful", "able", "ible", "ive", "ic", "less", "al"];
    if lower.len() > 3 && lower.ends_with("ly") {
        "RB"
    } else if lower.len() > 4 && lower.ends_with("ing") {
        "VBG"
    } else if lower.len() > 3 && lower.ends_with("ed") {
        "VBD"
    } else if lower.len() > 4 && lower.ends_with("est") {
        "JJS"
    } else if JJ_SUFFIXES.iter().any(|s| lower.len() > s.len() + 2 && lower.ends_with(s)) {
        "JJ"
    } else if lower.len() > 3 && lower.ends_with('s') && !lower.ends_with("ss") {
        "NNS"
    } else {
        "NN"
    }
}

impl HeuristicTagger {
    pub fn tag_word(&self, word: &str, sentence_initial: bool) -> &'static str {
        if let Some(tag) = punctuation_tag(word) {
            return tag;
        }
        if is_number(word) {
            return "CD";
        }
        let lower = word.to_lowercase();
        let capitalized = word.chars().next().is_some_and(char::is_uppercase);
        if capitalized && !sentence_initial {
            return "NNP";
        }
        if let Some(tag) = lexicon().get(lower.as_str()) {
            return tag;
        }
        suffix_tag(&lower)
    }
}

impl PosTagger for HeuristicTagger {
    fn tag(&self, words: &[&str]) -> Result<Vec<String>> {
        let mut sentence_initial = true;
        Ok(words
            .iter()
            .map(|w| {
                let tag = self.tag_word(w, sentence_initial);
                sentence_initial = matches!(*w, "." | "!" | "?");
                tag.to_string()
            })
            .collect())
    }
}
