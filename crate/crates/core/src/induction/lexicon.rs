use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifest::write_atomic;

/// How a word entered a lexicon.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "origin", rename_all = "snake_case")]
pub enum Origin {
    /// Induced from labeled sentences.
    Seed { tf: f64, tf_out: f64, gain: f64 },
    /// Added as an embedding neighbour of a seed word.
    Expanded { neighbor_of: String, cosine: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LexiconEntry {
    pub theme: String,
    pub origin: Origin,
}

/// Per-theme word sets; each word belongs to one theme.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Lexicon {
    pub themes: BTreeSet<String>,
    pub entries: BTreeMap<String, LexiconEntry>,
}

impl Lexicon {
    pub fn new(themes: impl IntoIterator<Item = String>) -> Self {
        Lexicon {
            themes: themes.into_iter().collect(),
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn theme_of(&self, word: &str) -> Option<&str> {
        self.entries.get(word).map(|e| e.theme.as_str())
    }

    /// Insert a word. Fails if the word already belongs to a theme.
    pub fn insert(&mut self, word: impl Into<String>, entry: LexiconEntry) -> Result<()> {
        let word = word.into();
        if let Some(prev) = self.entries.get(&word) {
            return Err(Error::Data(format!(
                "word `{word}` already in theme `{}`",
                prev.theme
            )));
        }
        self.themes.insert(entry.theme.clone());
        self.entries.insert(word, entry);
        Ok(())
    }

    /// Words of one theme, sorted.
    pub fn words_of(&self, theme: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, e)| e.theme == theme)
            .map(|(w, _)| w.as_str())
            .collect()
    }

    /// Theme -> sorted words, including empty themes.
    pub fn by_theme(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = self.themes.iter().map(|t| (t.as_str(), Vec::new())).collect();
        for (w, e) in &self.entries {
            out.entry(e.theme.as_str()).or_default().push(w);
        }
        out
    }

    pub fn words(&self) -> BTreeSet<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

const HEADER: &str = "word\ttheme\torigin\ttf\ttf_out\tgain\tneighbor_of\tcosine";

/// Tab-separated lexicon with one row per word.
pub fn lexicon_to_tsv(lex: &Lexicon) -> String {
    let mut s = String::new();
    s.push_str("# themes:");
    for t in &lex.themes {
        s.push(' ');
        s.push_str(t);
    }
    s.push('\n');
    s.push_str(HEADER);
    s.push('\n');
    for (w, e) in &lex.entries {
        match &e.origin {
            Origin::Seed { tf, tf_out, gain } => {
                writeln!(s, "{w}\t{}\tseed\t{tf}\t{tf_out}\t{gain}\t\t", e.theme).unwrap();
            }
            Origin::Expanded { neighbor_of, cosine } => {
                writeln!(s, "{w}\t{}\texpanded\t\t\t\t{neighbor_of}\t{cosine}", e.theme).unwrap();
            }
        }
    }
    s
}

pub fn write_lexicon(lex: &Lexicon, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), lexicon_to_tsv(lex).as_bytes())
}

/// One plain word list per theme, named `<prefix><theme>.txt`.
pub fn write_theme_lists(lex: &Lexicon, dir: impl AsRef<Path>, prefix: &str) -> Result<()> {
    for (theme, words) in lex.by_theme() {
        let mut body = words.join("\n");
        if !body.is_empty() {
            body.push('\n');
        }
        write_atomic(&dir.as_ref().join(format!("{prefix}{theme}.txt")), body.as_bytes())?;
    }
    Ok(())
}

pub fn parse_lexicon(text: &str) -> Result<Lexicon> {
    let mut lex = Lexicon::default();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let ferr = |m: String| Error::Format { line: ln, message: m };
        if let Some(rest) = line.strip_prefix("# themes:") {
            lex.themes.extend(rest.split_whitespace().map(str::to_owned));
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != HEADER {
                return Err(ferr("missing lexicon header".into()));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 8 {
            return Err(ferr(format!("expected 8 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| ferr(format!("bad number `{s}`")));
        let origin = match f[2] {
            "seed" => Origin::Seed {
                tf: num(f[3])?,
                tf_out: num(f[4])?,
                gain: num(f[5])?,
            },
            "expanded" => Origin::Expanded {
                neighbor_of: f[6].to_owned(),
                cosine: num(f[7])?,
            },
            o => return Err(ferr(format!("unknown origin `{o}`"))),
        };
        lex.insert(
            f[0],
            LexiconEntry {
                theme: f[1].to_owned(),
                origin,
            },
        )
        .map_err(|e| ferr(e.to_string()))?;
    }
    Ok(lex)
}

pub fn read_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut lex = Lexicon::new(["location".to_string(), "property".to_string()]);
        lex.insert(
            "quiet",
            LexiconEntry {
                theme: "location".into(),
                origin: Origin::Seed {
                    tf: 0.1,
                    tf_out: 0.0125,
                    gain: 8.0,
                },
            },
        )
        .unwrap();
        lex.insert(
            "peaceful",
            LexiconEntry {
                theme: "location".into(),
                origin: Origin::Expanded {
                    neighbor_of: "quiet".into(),
                    cosine: 0.8125,
                },
            },
        )
        .unwrap();
        let back = parse_lexicon(&lexicon_to_tsv(&lex)).unwrap();
        assert_eq!(back, lex);
        assert_eq!(back.by_theme()["property"].len(), 0);
        assert!(lex
            .insert(
                "quiet",
                LexiconEntry {
                    theme: "property".into(),
                    origin: Origin::Seed {
                        tf: 0.1,
                        tf_out: 0.0,
                        gain: 1.0
                    }
                }
            )
            .is_err());
    }
}
