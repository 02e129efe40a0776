//! Template sentences for the substitution method.
//!
//! A pattern names four slots `{A}`, `{B}`, `{C}`, `{D}`, each exactly once,
//! with `{D}` the last slot. The text between slots is tokenized with the
//! language's tokenizer; slot words are inserted verbatim as single tokens.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::AnalogyQuestion;
use crate::corpus::{Sentence, Tokenizer};
use crate::{Error, Result};

const BUILTIN: &[(&str, &str)] = &[
    ("en", include_str!("../../data/templates/en.txt")),
    ("et", include_str!("../../data/templates/et.txt")),
    ("fi", include_str!("../../data/templates/fi.txt")),
    ("hr", include_str!("../../data/templates/hr.txt")),
    ("lt", include_str!("../../data/templates/lt.txt")),
    ("lv", include_str!("../../data/templates/lv.txt")),
    ("sl", include_str!("../../data/templates/sl.txt")),
    ("sv", include_str!("../../data/templates/sv.txt")),
];

const SLOTS: [&str; 4] = ["{A}", "{B}", "{C}", "{D}"];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Segment {
    Literal(Vec<String>),
    Slot(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSpec {
    pub lang: String,
    pub pattern: String,
    segments: Vec<Segment>,
}

/// A filled template with the token positions of the four slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSentence {
    pub tokens: Vec<String>,
    pub slots: [usize; 4],
}

impl TemplateSentence {
    pub fn d_index(&self) -> usize {
        self.slots[3]
    }

    /// Tokens with the last slot replaced by `word`.
    pub fn with_d(&self, word: &str) -> Vec<String> {
        let mut t = self.tokens.clone();
        t[self.slots[3]] = word.to_owned();
        t
    }
}

impl TemplateSpec {
    pub fn parse(lang: &str, pattern: &str) -> Result<Self> {
        let tokenizer = Tokenizer::for_language(lang);
        let invalid = |msg: String| Error::InvalidArgument(format!("template {pattern:?}: {msg}"));
        let mut found: Vec<(usize, usize)> = Vec::new();
        for (slot, marker) in SLOTS.iter().enumerate() {
            let hits: Vec<usize> = pattern.match_indices(marker).map(|(i, _)| i).collect();
            match hits[..] {
                [pos] => found.push((pos, slot)),
                _ => return Err(invalid(format!("slot {marker} must appear exactly once"))),
            }
        }
        found.sort();
        if found.last().map(|&(_, s)| s) != Some(3) {
            return Err(invalid("slot {D} must be the last slot".into()));
        }
        let mut segments = Vec::new();
        let mut cursor = 0;
        for (pos, slot) in found {
            let literal = tokenizer.tokenize(&pattern[cursor..pos]);
            if !literal.is_empty() {
                segments.push(Segment::Literal(literal.into_tokens()));
            }
            segments.push(Segment::Slot(slot));
            cursor = pos + SLOTS[slot].len();
        }
        let tail = tokenizer.tokenize(&pattern[cursor..]);
        if !tail.is_empty() {
            segments.push(Segment::Literal(tail.into_tokens()));
        }
        Ok(TemplateSpec {
            lang: lang.to_owned(),
            pattern: pattern.to_owned(),
            segments,
        })
    }

    pub fn fill(&self, words: [&str; 4]) -> Result<TemplateSentence> {
        let mut tokens = Vec::new();
        let mut slots = [0; 4];
        for seg in &self.segments {
            match seg {
                Segment::Literal(t) => tokens.extend(t.iter().cloned()),
                Segment::Slot(s) => {
                    let w = words[*s];
                    if w.is_empty() || w.chars().any(char::is_whitespace) {
                        return Err(Error::InvalidArgument(format!(
                            "slot word {w:?} is not a single token"
                        )));
                    }
                    slots[*s] = tokens.len();
                    tokens.push(w.to_owned());
                }
            }
        }
        Ok(TemplateSentence { tokens, slots })
    }

    pub fn build(&self, q: &AnalogyQuestion) -> Result<TemplateSentence> {
        self.fill(q.words())
    }
}

/// Fills `t` with the question's words; returns the sentence and the index of
/// the last slot.
pub fn build_template_sentence(q: &AnalogyQuestion, t: &TemplateSpec) -> Result<(Sentence, usize)> {
    let filled = t.build(q)?;
    let d = filled.d_index();
    Ok((Sentence::new(filled.tokens)?, d))
}

/// A default template plus per-category overrides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSet {
    pub default: TemplateSpec,
    pub overrides: HashMap<String, TemplateSpec>,
}

impl TemplateSet {
    /// Parses template file text: `pattern` lines set the default,
    /// `category<TAB>pattern` lines add overrides, `#` starts a comment.
    pub fn parse(lang: &str, text: &str) -> Result<Self> {
        let mut default = None;
        let mut overrides = HashMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('\t') {
                Some((cat, pattern)) => {
                    overrides.insert(cat.trim().to_owned(), TemplateSpec::parse(lang, pattern.trim())?);
                }
                None => default = Some(TemplateSpec::parse(lang, line)?),
            }
        }
        let default = default.ok_or_else(|| Error::InvalidArgument("template file has no default pattern".into()))?;
        Ok(TemplateSet { default, overrides })
    }

    pub fn from_file(lang: &str, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(lang, &text)
    }

    /// Shipped template for `lang`.
    pub fn builtin(lang: &str) -> Result<Self> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(l, _)| *l == lang)
            .ok_or_else(|| Error::InvalidArgument(format!("no built-in template for language '{lang}'")))?;
        Self::parse(lang, text)
    }

    pub fn single(spec: TemplateSpec) -> Self {
        TemplateSet {
            default: spec,
            overrides: HashMap::new(),
        }
    }

    pub fn for_category(&self, category: &str) -> &TemplateSpec {
        self.overrides.get(category).unwrap_or(&self.default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analogy::Kind;

    fn q(words: [&str; 4]) -> AnalogyQuestion {
        AnalogyQuestion {
            a: words[0].into(),
            b: words[1].into(),
            c: words[2].into(),
            d: words[3].into(),
            category: "capitals".into(),
            kind: Kind::Semantic,
        }
    }

    #[test]
    fn english_sentence() {
        let set = TemplateSet::builtin("en").unwrap();
        let (s, d) = build_template_sentence(&q(["Rome", "Italy", "Paris", "France"]), &set.default).unwrap();
        assert_eq!(
            s.to_string(),
            "If the word Rome corresponds to the word Italy , then the word Paris corresponds to the word France"
        );
        assert_eq!(s.tokens()[d], "France");
        assert_eq!(d, s.len() - 1);
    }

    #[test]
    fn slot_positions_and_substitution() {
        let t = TemplateSpec::parse("en", "{A} is to {B} as {C} is to {D}.").unwrap();
        let s = t.build(&q(["a", "b", "c", "d"])).unwrap();
        assert_eq!(s.tokens, ["a", "is", "to", "b", "as", "c", "is", "to", "d", "."]);
        assert_eq!(s.slots, [0, 3, 5, 8]);
        assert_eq!(s.with_d("x")[8], "x");
    }

    #[test]
    fn words_are_inserted_verbatim() {
        let set = TemplateSet::builtin("lv").unwrap();
        let s = set.default.build(&q(["Rīga", "Latvija", "Viļņa", "Lietuva"])).unwrap();
        assert_eq!(s.tokens[s.slots[0]], "Rīga");
        assert_eq!(s.tokens[s.slots[2]], "Viļņa");
    }

    #[test]
    fn multiword_slots_fail() {
        let set = TemplateSet::builtin("en").unwrap();
        assert!(set.default.build(&q(["New York", "b", "c", "d"])).is_err());
    }

    #[test]
    fn invalid_patterns() {
        assert!(TemplateSpec::parse("en", "{A} {B} {C}").is_err());
        assert!(TemplateSpec::parse("en", "{A} {B} {D} {C}").is_err());
        assert!(TemplateSpec::parse("en", "{A} {A} {B} {C} {D}").is_err());
    }

    #[test]
    fn overrides_by_category() {
        let set = TemplateSet::parse("en", "{A} {B} {C} {D}\nplural\t{A} and {B} , {C} and {D}\n").unwrap();
        assert_eq!(set.for_category("plural").pattern, "{A} and {B} , {C} and {D}");
        assert_eq!(set.for_category("other").pattern, "{A} {B} {C} {D}");
    }

    #[test]
    fn all_builtins_parse() {
        for (lang, _) in BUILTIN {
            let set = TemplateSet::builtin(lang).unwrap();
            let s = set.default.build(&q(["w1", "w2", "w3", "w4"])).unwrap();
            assert_eq!(s.tokens[s.d_index()], "w4");
        }
    }
}
