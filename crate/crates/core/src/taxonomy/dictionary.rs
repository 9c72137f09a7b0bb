//! The three-tier review dictionary and its text format.
//!
//! ```text
//! # comment
//! [business]
//! [business/property]
//! [business/property/interiors]
//! clean
//! comfortable
//! ```
//!
//! A header names a category by its full path; parents must be declared
//! before children. Every other non-blank line is one word belonging to the
//! most recent level-3 header. Words are unique across the whole file.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::Serialize;

use crate::corpus::tokenize;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Tier {
    Level1 = 1,
    Level2 = 2,
    Level3 = 3,
}

impl Tier {
    pub fn from_level(level: u8) -> Result<Tier> {
        match level {
            1 => Ok(Tier::Level1),
            2 => Ok(Tier::Level2),
            3 => Ok(Tier::Level3),
            n => Err(Error::config(format!("dictionary tier must be 1, 2 or 3, not {n}"))),
        }
    }

    pub fn level(self) -> u8 {
        self as u8
    }
}

/// A dictionary category: tier plus label. Labels are unique within a tier
/// but may repeat across tiers (a level-2 and a level-3 category can share a
/// name).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Category {
    pub tier: Tier,
    pub label: String,
}

impl Category {
    pub fn new(tier: Tier, label: impl Into<String>) -> Self {
        Category {
            tier,
            label: label.into(),
        }
    }

    pub fn level1(label: impl Into<String>) -> Self {
        Category::new(Tier::Level1, label)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}:{}", self.tier.level(), self.label)
    }
}

/// The full category path of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordPath<'a> {
    pub level1: &'a str,
    pub level2: &'a str,
    pub level3: &'a str,
}

/// Immutable three-tier dictionary mapping each word to one level-3
/// category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    level1: BTreeSet<String>,
    level2: BTreeMap<String, String>,
    level3: BTreeMap<String, String>,
    words: BTreeMap<String, String>,
}

pub const BUSINESS: &str = "business";
pub const SOCIAL: &str = "social";

impl Dictionary {
    /// Assemble and validate a dictionary.
    pub fn new(
        level1: BTreeSet<String>,
        level2: BTreeMap<String, String>,
        level3: BTreeMap<String, String>,
        words: BTreeMap<String, String>,
    ) -> Result<Self> {
        for (l2, parent) in &level2 {
            if !level1.contains(parent) {
                return Err(Error::Data(format!(
                    "level-2 category `{l2}` has unknown parent `{parent}`"
                )));
            }
        }
        for (l3, parent) in &level3 {
            if !level2.contains_key(parent) {
                return Err(Error::Data(format!(
                    "level-3 category `{l3}` has unknown parent `{parent}`"
                )));
            }
        }
        for (w, parent) in &words {
            if !level3.contains_key(parent) {
                return Err(Error::Data(format!("word `{w}` has unknown category `{parent}`")));
            }
        }
        Ok(Dictionary {
            level1,
            level2,
            level3,
            words,
        })
    }

    /// The bundled reference dictionary.
    pub fn reference() -> Self {
        parse_dictionary(include_str!("../../data/reference_dictionary.dict"))
            .expect("bundled dictionary is valid")
            .0
    }

    pub fn level1(&self) -> impl Iterator<Item = &str> {
        self.level1.iter().map(String::as_str)
    }

    /// `(level-2, parent level-1)` pairs.
    pub fn level2(&self) -> impl Iterator<Item = (&str, &str)> {
        self.level2.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// `(level-3, parent level-2)` pairs.
    pub fn level3(&self) -> impl Iterator<Item = (&str, &str)> {
        self.level3.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// `(word, level-3)` pairs in word order.
    pub fn words(&self) -> impl Iterator<Item = (&str, &str)> {
        self.words.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn category_counts(&self) -> (usize, usize, usize) {
        (self.level1.len(), self.level2.len(), self.level3.len())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains_key(word)
    }

    pub fn path_of(&self, word: &str) -> Option<WordPath<'_>> {
        let l3 = self.words.get(word)?;
        let l2 = &self.level3[l3];
        let l1 = &self.level2[l2];
        Some(WordPath {
            level1: l1,
            level2: l2,
            level3: l3,
        })
    }

    pub fn level1_of(&self, word: &str) -> Option<&str> {
        self.path_of(word).map(|p| p.level1)
    }

    pub fn has_category(&self, c: &Category) -> bool {
        match c.tier {
            Tier::Level1 => self.level1.contains(&c.label),
            Tier::Level2 => self.level2.contains_key(&c.label),
            Tier::Level3 => self.level3.contains_key(&c.label),
        }
    }

    /// Parent of a category (`None` for level-1).
    pub fn parent(&self, c: &Category) -> Option<Category> {
        match c.tier {
            Tier::Level1 => None,
            Tier::Level2 => self.level2.get(&c.label).map(|p| Category::new(Tier::Level1, p)),
            Tier::Level3 => self.level3.get(&c.label).map(|p| Category::new(Tier::Level2, p)),
        }
    }

    /// Level-3 categories under `c` (itself when `c` is level-3).
    pub fn level3_under(&self, c: &Category) -> Result<Vec<&str>> {
        if !self.has_category(c) {
            return Err(Error::Lookup(c.to_string()));
        }
        Ok(self
            .level3
            .iter()
            .filter(|(l3, l2)| match c.tier {
                Tier::Level3 => *l3 == &c.label,
                Tier::Level2 => *l2 == &c.label,
                Tier::Level1 => self.level2[*l2] == c.label,
            })
            .map(|(l3, _)| l3.as_str())
            .collect())
    }

    /// Every word in `c` or any of its descendants.
    pub fn words_in(&self, c: &Category) -> Result<BTreeSet<&str>> {
        let l3: BTreeSet<&str> = self.level3_under(c)?.into_iter().collect();
        Ok(self
            .words
            .iter()
            .filter(|(_, cat)| l3.contains(cat.as_str()))
            .map(|(w, _)| w.as_str())
            .collect())
    }

    /// All categories, ordered by tier then label.
    pub fn categories(&self) -> Vec<Category> {
        let mut out: Vec<Category> = self.level1.iter().map(|l| Category::new(Tier::Level1, l)).collect();
        out.extend(self.level2.keys().map(|l| Category::new(Tier::Level2, l)));
        out.extend(self.level3.keys().map(|l| Category::new(Tier::Level3, l)));
        out
    }

    /// Serialise to the text format. Output is sorted, so equal
    /// dictionaries serialise identically.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for l1 in &self.level1 {
            let _ = writeln!(s, "[{l1}]");
            for (l2, _) in self.level2.iter().filter(|(_, p)| *p == l1) {
                let _ = writeln!(s, "[{l1}/{l2}]");
                for (l3, _) in self.level3.iter().filter(|(_, p)| *p == l2) {
                    let _ = writeln!(s, "[{l1}/{l2}/{l3}]");
                    for (w, _) in self.words.iter().filter(|(_, c)| *c == l3) {
                        let _ = writeln!(s, "{w}");
                    }
                }
            }
            s.push('\n');
        }
        s
    }

    /// Stable content hash of the serialised form.
    pub fn content_hash(&self) -> String {
        crate::manifest::sha256_hex(self.to_text().as_bytes())
    }

    /// Compact integer index used by the adoption metrics.
    pub fn index(&self) -> DictionaryIndex {
        let l1: Vec<String> = self.level1.iter().cloned().collect();
        let l2: Vec<String> = self.level2.keys().cloned().collect();
        let l3: Vec<String> = self.level3.keys().cloned().collect();
        let pos = |v: &[String], x: &str| v.iter().position(|y| y == x).expect("validated");
        let l2_parent = l2.iter().map(|x| pos(&l1, &self.level2[x])).collect();
        let l3_parent = l3.iter().map(|x| pos(&l2, &self.level3[x])).collect();
        let word_l3 = self
            .words
            .iter()
            .map(|(w, c)| (w.clone(), pos(&l3, c)))
            .collect();
        DictionaryIndex {
            l1,
            l2,
            l3,
            l2_parent,
            l3_parent,
            word_l3,
        }
    }
}

/// Integer view of a [`Dictionary`].
#[derive(Debug, Clone)]
pub struct DictionaryIndex {
    pub l1: Vec<String>,
    pub l2: Vec<String>,
    pub l3: Vec<String>,
    pub l2_parent: Vec<usize>,
    pub l3_parent: Vec<usize>,
    pub word_l3: HashMap<String, usize>,
}

impl DictionaryIndex {
    /// Level-3 ids under a category.
    pub fn level3_ids(&self, c: &Category) -> Result<Vec<usize>> {
        let find = |v: &[String]| v.iter().position(|x| *x == c.label).ok_or_else(|| Error::Lookup(c.to_string()));
        Ok(match c.tier {
            Tier::Level3 => vec![find(&self.l3)?],
            Tier::Level2 => {
                let id = find(&self.l2)?;
                (0..self.l3.len()).filter(|&i| self.l3_parent[i] == id).collect()
            }
            Tier::Level1 => {
                let id = find(&self.l1)?;
                (0..self.l3.len())
                    .filter(|&i| self.l2_parent[self.l3_parent[i]] == id)
                    .collect()
            }
        })
    }
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.contains(['/', '[', ']']) && !label.chars().any(char::is_whitespace)
}

/// Parse the text format. Returns the dictionary and any warnings (empty
/// categories are allowed but reported).
pub fn parse_dictionary(text: &str) -> Result<(Dictionary, Vec<String>)> {
    let mut level1 = BTreeSet::new();
    let mut level2: BTreeMap<String, String> = BTreeMap::new();
    let mut level3: BTreeMap<String, String> = BTreeMap::new();
    let mut words: BTreeMap<String, String> = BTreeMap::new();
    let mut word_line: HashMap<String, usize> = HashMap::new();
    let mut current: Option<String> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| format_err(line_no, "unterminated category header"))?;
            let parts: Vec<&str> = inner.split('/').map(str::trim).collect();
            if parts.iter().any(|p| !valid_label(p)) {
                return Err(format_err(line_no, format!("bad category path `{inner}`")));
            }
            match parts.as_slice() {
                [l1] => {
                    level1.insert(l1.to_string());
                    current = None;
                }
                [l1, l2] => {
                    if !level1.contains(*l1) {
                        return Err(format_err(line_no, format!("unknown level-1 category `{l1}`")));
                    }
                    if let Some(prev) = level2.insert(l2.to_string(), l1.to_string()) {
                        if prev != *l1 {
                            return Err(format_err(line_no, format!("level-2 category `{l2}` has two parents")));
                        }
                    }
                    current = None;
                }
                [l1, l2, l3] => {
                    if level2.get(*l2).map(String::as_str) != Some(*l1) {
                        return Err(format_err(line_no, format!("unknown level-2 category `{l1}/{l2}`")));
                    }
                    if let Some(prev) = level3.insert(l3.to_string(), l2.to_string()) {
                        if prev != *l2 {
                            return Err(format_err(line_no, format!("level-3 category `{l3}` has two parents")));
                        }
                    }
                    current = Some(l3.to_string());
                }
                _ => return Err(format_err(line_no, format!("category path `{inner}` is deeper than 3 tiers"))),
            }
            continue;
        }
        let Some(cat) = &current else {
            return Err(format_err(line_no, format!("word `{line}` has no level-3 category")));
        };
        if tokenize(line) != [line] {
            return Err(format_err(line_no, format!("`{line}` is not a single lowercase word")));
        }
        if let Some(first) = word_line.get(line) {
            return Err(format_err(
                line_no,
                format!("word `{line}` listed twice (lines {first} and {line_no})"),
            ));
        }
        word_line.insert(line.to_owned(), line_no);
        words.insert(line.to_owned(), cat.clone());
    }

    let mut warnings = Vec::new();
    for l1 in &level1 {
        if !level2.values().any(|p| p == l1) {
            warnings.push(format!("level-1 category `{l1}` is empty"));
        }
    }
    for l2 in level2.keys() {
        if !level3.values().any(|p| p == l2) {
            warnings.push(format!("level-2 category `{l2}` is empty"));
        }
    }
    for l3 in level3.keys() {
        if !words.values().any(|c| c == l3) {
            warnings.push(format!("level-3 category `{l3}` is empty"));
        }
    }
    Ok((Dictionary::new(level1, level2, level3, words)?, warnings))
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<Dictionary> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (dict, warnings) = parse_dictionary(&text)?;
    for w in warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(dict)
}

pub fn serialize_dictionary(dict: &Dictionary, path: impl AsRef<Path>) -> Result<()> {
    crate::manifest::write_atomic(path.as_ref(), dict.to_text().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_shape() {
        let d = Dictionary::reference();
        assert_eq!(d.category_counts(), (2, 4, 13));
        assert_eq!(d.word_count(), 355);
        let loc = d.words_in(&Category::new(Tier::Level3, "location")).unwrap();
        assert_eq!(loc.len(), 109);
        for w in ["quiet", "area", "walk", "located", "restaurants"] {
            assert!(loc.contains(w));
        }
        assert_eq!(d.words_in(&Category::level1(BUSINESS)).unwrap().len(), 287);
        assert_eq!(d.words_in(&Category::level1(SOCIAL)).unwrap().len(), 68);
        assert_eq!(d.level1_of("husband"), Some(SOCIAL));
    }

    #[test]
    fn round_trip() {
        let d = Dictionary::reference();
        let (back, warnings) = parse_dictionary(&d.to_text()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(back, d);
    }

    #[test]
    fn duplicate_word_names_both_lines() {
        let text = "[a]\n[a/b]\n[a/b/c]\nhouse\nflat\n[a/b/d]\nhouse\n";
        match parse_dictionary(text) {
            Err(Error::Format { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains("lines 4 and 7"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn word_without_category() {
        assert!(matches!(parse_dictionary("[a]\nhouse\n"), Err(Error::Format { line: 2, .. })));
        assert!(matches!(parse_dictionary("[a]\n[x/b]\n"), Err(Error::Format { line: 2, .. })));
    }

    #[test]
    fn empty_category_warns() {
        let (d, warnings) = parse_dictionary("[a]\n[a/b]\n[a/b/c]\n[a/b/e]\nword\n").unwrap();
        assert_eq!(d.word_count(), 1);
        assert_eq!(warnings, vec!["level-3 category `c` is empty".to_string()]);
    }

    #[test]
    fn shared_label_across_tiers() {
        let d = Dictionary::reference();
        let l2 = d.words_in(&Category::new(Tier::Level2, "location")).unwrap();
        let l3 = d.words_in(&Category::new(Tier::Level3, "location")).unwrap();
        assert_eq!(l2, l3);
        assert!(d.words_in(&Category::new(Tier::Level1, "location")).is_err());
    }
}
