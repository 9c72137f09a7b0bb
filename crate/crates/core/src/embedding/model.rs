use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::manifest::write_atomic;

/// Word vectors with a vocabulary index.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    /// Row-major `|V| x dim`.
    vectors: Vec<f32>,
}

impl EmbeddingModel {
    /// Build from `(word, vector)` rows.
    pub fn from_rows(rows: impl IntoIterator<Item = (String, Vec<f32>)>) -> Result<Self> {
        let mut words = Vec::new();
        let mut index = HashMap::new();
        let mut vectors = Vec::new();
        let mut dim = None;
        for (w, v) in rows {
            let d = *dim.get_or_insert(v.len());
            if v.len() != d {
                return Err(Error::Data(format!("vector for `{w}` has {} dimensions, expected {d}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Data(format!("vector for `{w}` is not finite")));
            }
            if index.insert(w.clone(), words.len()).is_some() {
                return Err(Error::Data(format!("word `{w}` listed twice")));
            }
            words.push(w);
            vectors.extend(v);
        }
        let dim = dim.unwrap_or(0);
        Self::from_parts(words, index, dim, vectors)
    }

    pub(crate) fn from_parts(
        words: Vec<String>,
        index: HashMap<String, usize>,
        dim: usize,
        vectors: Vec<f32>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::config(format!("embedding dimension must be at least 2, got {dim}")));
        }
        debug_assert_eq!(vectors.len(), words.len() * dim);
        Ok(EmbeddingModel {
            words,
            index,
            dim,
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Vocabulary in model order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.id(word).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine similarity of two vocabulary words.
    pub fn cosine(&self, w1: &str, w2: &str) -> Result<f64> {
        let a = self.vector(w1).ok_or_else(|| Error::Lookup(format!("`{w1}` not in vocabulary")))?;
        let b = self.vector(w2).ok_or_else(|| Error::Lookup(format!("`{w2}` not in vocabulary")))?;
        let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
        for (&x, &y) in a.iter().zip(b) {
            let (x, y) = (x as f64, y as f64);
            ab += x * y;
            aa += x * x;
            bb += y * y;
        }
        if aa == 0.0 || bb == 0.0 {
            let w = if aa == 0.0 { w1 } else { w2 };
            return Err(Error::arith(format!("`{w}` has a zero vector")));
        }
        Ok((ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0))
    }

    /// Unit-length copies of every row in f64; zero rows stay zero.
    pub(crate) fn normalised_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                let r: Vec<f64> = self.row(i).iter().map(|&x| x as f64).collect();
                let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 0.0 {
                    r.into_iter().map(|x| x / n).collect()
                } else {
                    r
                }
            })
            .collect()
    }

    /// Text format: a `|V| d` line, then one `word v1 ... vd` line per word.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.vectors.len() * 12);
        writeln!(s, "{} {}", self.len(), self.dim).unwrap();
        for (i, w) in self.words.iter().enumerate() {
            s.push_str(w);
            for x in self.row(i) {
                write!(s, " {x}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or(Error::Format {
            line: 1,
            message: "empty vector file".into(),
        })?;
        let hf: Vec<&str> = head.split_whitespace().collect();
        let parse_usize = |s: &str| s.parse::<usize>().ok();
        let (n, d) = match hf.as_slice() {
            [a, b] => match (parse_usize(a), parse_usize(b)) {
                (Some(n), Some(d)) => (n, d),
                _ => {
                    return Err(Error::Format {
                        line: 1,
                        message: "header must be `<vocabulary size> <dimension>`".into(),
                    })
                }
            },
            _ => {
                return Err(Error::Format {
                    line: 1,
                    message: "header must be `<vocabulary size> <dimension>`".into(),
                })
            }
        };
        let mut rows = Vec::with_capacity(n);
        for (i, line) in lines {
            let mut f = line.split_whitespace();
            let w = f.next().unwrap_or_default().to_owned();
            let v = f
                .map(|x| x.parse::<f32>())
                .collect::<std::result::Result<Vec<f32>, _>>()
                .map_err(|e| Error::Format {
                    line: i + 1,
                    message: format!("bad float: {e}"),
                })?;
            if v.len() != d {
                return Err(Error::Format {
                    line: i + 1,
                    message: format!("expected {d} values, found {}", v.len()),
                });
            }
            rows.push((w, v));
        }
        if rows.len() != n {
            return Err(Error::Format {
                line: 1,
                message: format!("header announces {n} words, file has {}", rows.len()),
            });
        }
        Self::from_rows(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model() -> EmbeddingModel {
        EmbeddingModel::from_rows([
            ("a".to_string(), vec![1.0, 2.0]),
            ("b".to_string(), vec![2.0, 4.0]),
            ("c".to_string(), vec![-2.0, 1.0]),
            ("z".to_string(), vec![0.0, 0.0]),
        ])
        .unwrap()
    }

    #[test]
    fn cosines() {
        let m = model();
        assert_abs_diff_eq!(m.cosine("a", "a").unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.cosine("a", "b").unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.cosine("a", "c").unwrap(), 0.0, epsilon = 1e-12);
        let e = m.cosine("a", "nope").unwrap_err();
        assert!(matches!(e, Error::Lookup(ref s) if s.contains("nope")));
        assert!(matches!(m.cosine("a", "z"), Err(Error::Arithmetic(_))));
    }

    #[test]
    fn text_round_trip() {
        let m = EmbeddingModel::from_rows([
            ("x".to_string(), vec![0.1, -3.25e-7, 12.5]),
            ("y".to_string(), vec![1.0 / 3.0, 0.0, -0.0]),
        ])
        .unwrap();
        let back = EmbeddingModel::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn bad_files() {
        assert!(EmbeddingModel::parse("2 2\na 1 2\n").is_err());
        assert!(EmbeddingModel::parse("1 2\na 1\n").is_err());
        assert!(EmbeddingModel::parse("1 1\na 1\n").is_err());
        assert!(EmbeddingModel::parse("").is_err());
    }
}
