use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{AnalogyQuestion, Kind};
use crate::{Error, Result};

/// Assigns a kind to each category: explicit entries first, then by
/// category ordinal (the first `semantic_count` categories are semantic).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KindTable {
    pub explicit: HashMap<String, Kind>,
    pub semantic_count: usize,
}

impl Default for KindTable {
    fn default() -> Self {
        KindTable {
            explicit: HashMap::new(),
            semantic_count: 5,
        }
    }
}

impl KindTable {
    /// Reads `category <whitespace> semantic|syntactic` lines.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        let mut explicit = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [cat, kind] = fields[..] else {
                return Err(Error::format(&name, i + 1, "expected '<category> <kind>'"));
            };
            let kind = match kind {
                "semantic" => Kind::Semantic,
                "syntactic" => Kind::Syntactic,
                other => return Err(Error::format(&name, i + 1, format!("unknown kind '{other}'"))),
            };
            explicit.insert(cat.trim_start_matches(':').trim().to_owned(), kind);
        }
        Ok(KindTable {
            explicit,
            ..Default::default()
        })
    }

    /// `ordinal` is 1-based.
    pub fn kind_of(&self, category: &str, ordinal: usize) -> Kind {
        match self.explicit.get(category) {
            Some(&k) => k,
            None if ordinal <= self.semantic_count => Kind::Semantic,
            None => Kind::Syntactic,
        }
    }
}

pub fn parse_analogy_dataset(path: impl AsRef<Path>, kinds: &KindTable) -> Result<Vec<AnalogyQuestion>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_analogy_dataset(BufReader::new(file), &path.display().to_string(), kinds)
}

/// Parses the `: category` / `w1 w2 w3 w4` text format.
pub fn read_analogy_dataset<R: BufRead>(reader: R, name: &str, kinds: &KindTable) -> Result<Vec<AnalogyQuestion>> {
    let mut questions = Vec::new();
    let mut current: Option<(String, Kind)> = None;
    let mut ordinal = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(cat) = line.strip_prefix(':') {
            let cat = cat.trim();
            if cat.is_empty() {
                return Err(Error::format(name, lineno, "empty category name"));
            }
            ordinal += 1;
            current = Some((cat.to_owned(), kinds.kind_of(cat, ordinal)));
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let [a, b, c, d] = words[..] else {
            return Err(Error::format(
                name,
                lineno,
                format!("expected 4 words, found {}", words.len()),
            ));
        };
        let Some((category, kind)) = &current else {
            return Err(Error::format(name, lineno, "question before any category header"));
        };
        let distinct: HashSet<&str> = words.iter().copied().collect();
        if distinct.len() != 4 {
            return Err(Error::format(name, lineno, "question words must be distinct"));
        }
        questions.push(AnalogyQuestion {
            a: a.to_owned(),
            b: b.to_owned(),
            c: c.to_owned(),
            d: d.to_owned(),
            category: category.clone(),
            kind: *kind,
        });
    }
    Ok(questions)
}

/// Distinct words of the dataset in order of first appearance.
pub fn dataset_vocabulary(questions: &[AnalogyQuestion]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for q in questions {
        for w in q.words() {
            if seen.insert(w) {
                out.push(w.to_owned());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<Vec<AnalogyQuestion>> {
        read_analogy_dataset(Cursor::new(text.as_bytes()), "test", &KindTable::default())
    }

    #[test]
    fn one_question() {
        let qs = parse(": capital-common-countries\nHelsinki Finland Stockholm Sweden\n").unwrap();
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].category, "capital-common-countries");
        assert_eq!(qs[0].words(), ["Helsinki", "Finland", "Stockholm", "Sweden"]);
        assert_eq!(qs[0].kind, Kind::Semantic);
    }

    #[test]
    fn empty_file() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn wrong_arity_names_line() {
        let err = parse(": c\na b c\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn question_before_header() {
        assert!(matches!(parse("a b c d\n"), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn ordinal_kinds() {
        let text: String = (1..=7).map(|i| format!(": cat{i}\nw{i}a w{i}b w{i}c w{i}d\n")).collect();
        let qs = parse(&text).unwrap();
        let kinds: Vec<Kind> = qs.iter().map(|q| q.kind).collect();
        assert_eq!(&kinds[..5], &[Kind::Semantic; 5]);
        assert_eq!(&kinds[5..], &[Kind::Syntactic; 2]);
    }

    #[test]
    fn explicit_kinds_win() {
        let mut table = KindTable::default();
        table.explicit.insert("first".into(), Kind::Syntactic);
        let qs = read_analogy_dataset(Cursor::new(": first\na b c d\n"), "t", &table).unwrap();
        assert_eq!(qs[0].kind, Kind::Syntactic);
    }

    #[test]
    fn vocabulary_in_first_appearance_order() {
        let qs = parse(": c\na b c d\nc d a b\ne b a f\n").unwrap();
        assert_eq!(dataset_vocabulary(&qs), ["a", "b", "c", "d", "e", "f"]);
    }
}
