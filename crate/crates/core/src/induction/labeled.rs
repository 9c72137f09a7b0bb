use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use serde::Serialize;

use crate::corpus::tokenize;
use crate::error::{Error, Result};

/// A sentence with per-theme annotator vote counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSentence {
    pub sentence_id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub votes: BTreeMap<String, u32>,
    pub n_annotators: u32,
}

impl LabeledSentence {
    pub fn new(
        sentence_id: impl Into<String>,
        text: impl Into<String>,
        n_annotators: u32,
        votes: impl IntoIterator<Item = (String, u32)>,
    ) -> Result<Self> {
        let text = text.into();
        let sentence_id = sentence_id.into();
        if n_annotators == 0 {
            return Err(Error::Data(format!("sentence {sentence_id}: no annotators")));
        }
        let votes: BTreeMap<String, u32> = votes.into_iter().collect();
        if let Some((t, v)) = votes.iter().find(|(_, &v)| v > n_annotators) {
            return Err(Error::Data(format!(
                "sentence {sentence_id}: {v} votes for `{t}` from {n_annotators} annotators"
            )));
        }
        Ok(LabeledSentence {
            tokens: tokenize(&text),
            sentence_id,
            text,
            votes,
            n_annotators,
        })
    }

    pub fn votes_for(&self, theme: &str) -> u32 {
        self.votes.get(theme).copied().unwrap_or(0)
    }

    /// At least three quarters of the annotators chose `theme`.
    pub fn agrees_on(&self, theme: &str) -> bool {
        4 * self.votes_for(theme) >= 3 * self.n_annotators
    }

    pub fn contains(&self, word: &str) -> bool {
        self.tokens.iter().any(|t| t == word)
    }
}

impl AsRef<[String]> for LabeledSentence {
    fn as_ref(&self) -> &[String] {
        &self.tokens
    }
}

const FIXED_COLUMNS: [&str; 3] = ["sentence_id", "text", "n_annotators"];

/// Read the labeled-sentence CSV. Every column other than `sentence_id`,
/// `text` and `n_annotators` is a theme vote count. Returns the sentences
/// and the theme labels in column order.
pub fn read_labeled_sentences(path: impl AsRef<Path>) -> Result<(Vec<LabeledSentence>, Vec<String>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_owned(),
            })
    };
    let (ci, ct, cn) = (col("sentence_id")?, col("text")?, col("n_annotators")?);
    let themes: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !FIXED_COLUMNS.contains(&h.trim()))
        .map(|(i, h)| (i, h.trim().to_owned()))
        .collect();
    if themes.is_empty() {
        return Err(Error::Data(format!("{}: no theme vote columns", path.display())));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let line = row + 2;
        let num = |i: usize| -> Result<u32> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| Error::Format {
                    line,
                    message: format!("`{}` is not a count", rec.get(i).unwrap_or("")),
                })
        };
        let id = rec.get(ci).unwrap_or("").to_owned();
        if !seen.insert(id.clone()) {
            return Err(Error::Format {
                line,
                message: format!("duplicate sentence id `{id}`"),
            });
        }
        let votes = themes
            .iter()
            .map(|(i, t)| Ok((t.clone(), num(*i)?)))
            .collect::<Result<Vec<_>>>()?;
        let s = LabeledSentence::new(id, rec.get(ct).unwrap_or(""), num(cn)?, votes)
            .map_err(|e| Error::Format {
                line,
                message: e.to_string(),
            })?;
        out.push(s);
    }
    Ok((out, themes.into_iter().map(|(_, t)| t).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn reads_csv() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "sentence_id,text,n_annotators,property,social_interaction").unwrap();
        writeln!(f, "s1,\"Lovely flat, very clean.\",4,4,0").unwrap();
        writeln!(f, "s2,We had dinner together,4,0,3").unwrap();
        let (s, themes) = read_labeled_sentences(f.path()).unwrap();
        assert_eq!(themes, ["property", "social_interaction"]);
        assert_eq!(s.len(), 2);
        assert!(s[0].agrees_on("property"));
        assert!(s[1].agrees_on("social_interaction"));
        assert!(s[0].contains("clean"));
    }

    #[test]
    fn rejects_excess_votes() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "sentence_id,text,n_annotators,property").unwrap();
        writeln!(f, "s1,x,4,5").unwrap();
        assert!(matches!(read_labeled_sentences(f.path()), Err(Error::Format { line: 2, .. })));
    }

    #[test]
    fn missing_column() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "sentence_id,text,property").unwrap();
        assert!(matches!(read_labeled_sentences(f.path()), Err(Error::MissingColumn { .. })));
    }
}
