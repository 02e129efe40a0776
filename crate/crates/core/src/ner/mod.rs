//! NER datasets reduced to the `PER`/`LOC`/`ORG`/`O` label set.
//!
//! Files are two-column UTF-8: one `token label` pair per line, a blank line
//! between sentences. Prediction files use the same format.

mod compare;
mod metrics;
mod split;

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use compare::{compare_systems, ComparisonRow, SystemScores};
pub use metrics::{aggregate_runs, class_scores, macro_f1, relative_difference, ClassF1, RunScore, RunSummary, Scores};
pub use split::{split, test_size, SplitSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NerLabel {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "ORG")]
    Org,
    O,
}

impl NerLabel {
    /// The entity classes scored by macro-F1.
    pub const ENTITIES: [NerLabel; 3] = [NerLabel::Per, NerLabel::Loc, NerLabel::Org];

    pub fn as_str(self) -> &'static str {
        match self {
            NerLabel::Per => "PER",
            NerLabel::Loc => "LOC",
            NerLabel::Org => "ORG",
            NerLabel::O => "O",
        }
    }
}

impl fmt::Display for NerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NerLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PER" => Ok(NerLabel::Per),
            "LOC" => Ok(NerLabel::Loc),
            "ORG" => Ok(NerLabel::Org),
            "O" => Ok(NerLabel::O),
            _ => Err(Error::InvalidArgument(format!("unknown NER label '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerSentence {
    tokens: Vec<String>,
    labels: Vec<NerLabel>,
}

impl NerSentence {
    pub fn new(tokens: Vec<String>, labels: Vec<NerLabel>) -> Result<Self> {
        if tokens.is_empty() || tokens.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "NER sentence needs as many labels as tokens (at least one), got {} tokens and {} labels",
                tokens.len(),
                labels.len()
            )));
        }
        if let Some(t) = tokens.iter().find(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
            return Err(Error::InvalidArgument(format!("invalid NER token {t:?}")));
        }
        Ok(NerSentence { tokens, labels })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn labels(&self) -> &[NerLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Maps source labels onto the reduced set.
///
/// Explicit entries are tried on the raw label first. Otherwise a BIO-style
/// prefix (`B-`, `I-`, `E-`, `S-`, `L-`, `U-`) is stripped and the rest is
/// looked up again, then matched against `PER`, `LOC`, `ORG` and `O`.
/// Anything else becomes `O` and is counted as unmapped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelMap {
    entries: HashMap<String, NerLabel>,
}

impl LabelMap {
    pub fn insert(&mut self, source: impl Into<String>, target: NerLabel) {
        self.entries.insert(source.into(), target);
    }

    /// Reads `source target` lines; `#` starts a comment.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        let mut map = LabelMap::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let [source, target] = cols[..] else {
                return Err(Error::format(&name, i + 1, "expected 'source target'"));
            };
            let target = target.parse().map_err(|e: Error| Error::format(&name, i + 1, e.to_string()))?;
            map.insert(source, target);
        }
        Ok(map)
    }

    /// The reduced label, or `None` when the label is unmapped.
    pub fn map(&self, label: &str) -> Option<NerLabel> {
        if let Some(&l) = self.entries.get(label) {
            return Some(l);
        }
        let bare = match label.split_once('-') {
            Some((p, rest)) if matches!(p, "B" | "I" | "E" | "S" | "L" | "U") => rest,
            _ => label,
        };
        self.entries.get(bare).copied().or_else(|| bare.parse().ok())
    }
}

/// Sentences of a NER file and the number of labels mapped to `O` by default.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NerData {
    pub sentences: Vec<NerSentence>,
    pub unmapped: usize,
}

pub fn parse_ner(path: impl AsRef<Path>, map: &LabelMap) -> Result<NerData> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ner(BufReader::new(file), &path.display().to_string(), map)
}

pub fn read_ner<R: BufRead>(reader: R, name: &str, map: &LabelMap) -> Result<NerData> {
    let mut data = NerData::default();
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    let flush = |tokens: &mut Vec<String>, labels: &mut Vec<NerLabel>, data: &mut NerData| {
        if !tokens.is_empty() {
            data.sentences.push(NerSentence {
                tokens: std::mem::take(tokens),
                labels: std::mem::take(labels),
            });
        }
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut tokens, &mut labels, &mut data);
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let [token, label] = cols[..] else {
            return Err(Error::format(name, i + 1, format!("expected 2 columns, found {}", cols.len())));
        };
        let label = map.map(label).unwrap_or_else(|| {
            data.unmapped += 1;
            NerLabel::O
        });
        tokens.push(token.to_owned());
        labels.push(label);
    }
    flush(&mut tokens, &mut labels, &mut data);
    if data.unmapped > 0 {
        log::warn!("{name}: {} labels outside PER/LOC/ORG/O mapped to O", data.unmapped);
    }
    Ok(data)
}

pub fn write_ner<W: Write>(sentences: &[NerSentence], mut out: W) -> Result<()> {
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        for (t, l) in s.tokens.iter().zip(&s.labels) {
            writeln!(out, "{t}\t{l}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_ner(sentences: &[NerSentence], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_ner(sentences, BufWriter::new(file))
}

/// Entity token counts and their share of all tokens.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub per: u64,
    pub loc: u64,
    pub org: u64,
    pub n: u64,
    pub density: f64,
}

impl LabelStats {
    pub fn from_counts(per: u64, loc: u64, org: u64, n: u64) -> Result<Self> {
        if per + loc + org > n {
            return Err(Error::InvalidArgument(format!(
                "{} entity tokens exceed the {n} tokens in total",
                per + loc + org
            )));
        }
        let density = if n == 0 { 0.0 } else { (per + loc + org) as f64 / n as f64 };
        Ok(LabelStats { per, loc, org, n, density })
    }
}

pub fn label_stats(sentences: &[NerSentence]) -> LabelStats {
    let mut counts = [0u64; 4];
    for s in sentences {
        for l in &s.labels {
            counts[*l as usize] += 1;
        }
    }
    let n = counts.iter().sum();
    LabelStats::from_counts(counts[0], counts[1], counts[2], n).expect("counts are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, map: &LabelMap) -> Result<NerData> {
        read_ner(text.as_bytes(), "t", map)
    }

    #[test]
    fn bio_prefixes_collapse() {
        let d = read("Ivan B-PER\nje O\n\n", &LabelMap::default()).unwrap();
        assert_eq!(d.sentences.len(), 1);
        assert_eq!(d.sentences[0].labels(), [NerLabel::Per, NerLabel::O]);
        assert_eq!(d.unmapped, 0);
    }

    #[test]
    fn blocks_make_sentences() {
        let d = read("a O\nb B-LOC\n\n\nc I-ORG\n", &LabelMap::default()).unwrap();
        assert_eq!(d.sentences.len(), 2);
        assert_eq!(d.sentences[1].labels(), [NerLabel::Org]);
    }

    #[test]
    fn unmapped_becomes_other() {
        let d = read("x MISC\ny B-PER\n", &LabelMap::default()).unwrap();
        assert_eq!(d.sentences[0].labels(), [NerLabel::O, NerLabel::Per]);
        assert_eq!(d.unmapped, 1);
        let mut map = LabelMap::default();
        map.insert("MISC", NerLabel::O);
        map.insert("PERSON", NerLabel::Per);
        let d = read("x B-MISC\ny I-PERSON\n", &map).unwrap();
        assert_eq!(d.sentences[0].labels(), [NerLabel::O, NerLabel::Per]);
        assert_eq!(d.unmapped, 0);
    }

    #[test]
    fn wrong_column_count_names_the_line() {
        let e = read("a O\nb c O\n", &LabelMap::default()).unwrap_err();
        assert!(e.to_string().contains(":2"), "{e}");
    }

    #[test]
    fn write_then_read() {
        let d = read("a PER\nb O\n\nc LOC\n", &LabelMap::default()).unwrap();
        let mut buf = Vec::new();
        write_ner(&d.sentences, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "a\tPER\nb\tO\n\nc\tLOC\n");
        assert_eq!(read_ner(&buf[..], "t", &LabelMap::default()).unwrap(), d);
    }

    #[test]
    fn density() {
        let s = LabelStats::from_counts(10241, 7445, 11216, 506457).unwrap();
        assert!((s.density - 0.057).abs() <= 0.0005);
        let d = read("a O\nb O\n", &LabelMap::default()).unwrap();
        assert_eq!(label_stats(&d.sentences).density, 0.0);
        let d = read("a PER\nb O\nc ORG\nd O\n", &LabelMap::default()).unwrap();
        let st = label_stats(&d.sentences);
        assert_eq!((st.per, st.loc, st.org, st.n), (1, 0, 1, 4));
        assert_eq!(st.density, 0.5);
    }
}
