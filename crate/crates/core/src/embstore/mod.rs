//! Static word vectors, contextual token-embedding records and occurrence
//! averaging.

mod average;
mod records;
mod text_format;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use average::{average_occurrences, AverageAccumulator};
pub use records::{RecordReader, RecordWriter, TokenEmbeddingRecord};
pub use text_format::{load_static, read_static, save_static, write_static, LoadStats};

use crate::{Error, Result};

/// Output level of a three-layer contextual model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    #[serde(rename = "CNN")]
    Cnn,
    #[serde(rename = "LSTM1")]
    Lstm1,
    #[serde(rename = "LSTM2")]
    Lstm2,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Cnn, Layer::Lstm1, Layer::Lstm2];

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Cnn => "CNN",
            Layer::Lstm1 => "LSTM1",
            Layer::Lstm2 => "LSTM2",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CNN" => Ok(Layer::Cnn),
            "LSTM1" => Ok(Layer::Lstm1),
            "LSTM2" => Ok(Layer::Lstm2),
            other => Err(Error::InvalidArgument(format!("unknown layer '{other}'"))),
        }
    }
}

/// Vocabulary-aligned matrix of word vectors, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StaticEmbeddings {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f32>,
}

impl StaticEmbeddings {
    /// Checks the invariants: at least one word, no duplicates, `dim > 0`,
    /// `data.len() == words.len() * dim`, all components finite.
    pub fn new(words: Vec<String>, data: Vec<f32>, dim: usize) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::InvalidArgument("embedding set has no words".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        if data.len() != words.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: words.len() * dim,
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite component in the vector of '{}'",
                words[i / dim]
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate word '{w}'")));
            }
        }
        Ok(StaticEmbeddings {
            words,
            index,
            dim,
            data,
        })
    }

    /// Builds from (word, vector) pairs; all vectors must have the same length.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f32>)>,
    {
        let mut words = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (w, v) in pairs {
            let d = *dim.get_or_insert(v.len());
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: v.len(),
                });
            }
            words.push(w);
            data.extend(v);
        }
        Self::new(words, data, dim.unwrap_or(0))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.data.chunks_exact(self.dim))
    }

    /// Copy with every component multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Result<Self> {
        Self::new(
            self.words.clone(),
            self.data.iter().map(|v| v * factor).collect(),
            self.dim,
        )
    }
}

/// Cosine similarity `u·v / (|u||v|)`, accumulated in double precision.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0f64, 0f64, 0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine distance as shown in reports: `1 - similarity`.
pub fn cosine_distance(u: &[f32], v: &[f32]) -> Result<f64> {
    cosine(u, v).map(|s| 1.0 - s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - 0.70710678).abs() < 1e-8);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
        assert!((cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariants_are_checked() {
        assert!(StaticEmbeddings::new(vec![], vec![], 2).is_err());
        assert!(StaticEmbeddings::new(vec!["a".into(), "a".into()], vec![0.0; 4], 2).is_err());
        assert!(StaticEmbeddings::new(vec!["a".into()], vec![f32::NAN, 0.0], 2).is_err());
        assert!(StaticEmbeddings::new(vec!["a".into()], vec![0.0; 3], 2).is_err());
        let e = StaticEmbeddings::new(vec!["a".into(), "b".into()], vec![1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(e.get("b"), Some(&[3.0f32, 4.0][..]));
        assert_eq!(e.index_of("c"), None);
    }

    #[test]
    fn layer_names() {
        for l in Layer::ALL {
            assert_eq!(l.as_str().parse::<Layer>().unwrap(), l);
        }
        assert!("lstm1".parse::<Layer>().is_err());
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric_and_scale_free(
            u in prop::collection::vec(-10.0f32..10.0, 4),
            v in prop::collection::vec(-10.0f32..10.0, 4),
            c in 0.01f32..100.0,
        ) {
            prop_assume!(u.iter().any(|x| x.abs() > 1e-3) && v.iter().any(|x| x.abs() > 1e-3));
            let a = cosine(&u, &v).unwrap();
            prop_assert_eq!(a, cosine(&v, &u).unwrap());
            let cu: Vec<f32> = u.iter().map(|x| x * c).collect();
            prop_assert!((cosine(&u, &cu).unwrap() - 1.0).abs() < 1e-6);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }
}
