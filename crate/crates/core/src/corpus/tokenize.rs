//! Rule-based sentence segmentation and word tokenization.
//!
//! Sentences end at `.`, `!`, `?` or `…` (optionally followed by closing
//! quotes or brackets) when the next whitespace-separated chunk starts with an
//! uppercase letter or a digit. A period does not end a sentence after a word
//! from the language's abbreviation table or after a single uppercase initial.
//!
//! Tokens are maximal runs of word characters. Hyphens and apostrophes between
//! word characters stay inside the token, as do `.`, `,` and `:` between two
//! digits. Abbreviations from the table keep their periods. Every other
//! character is a standalone token, except that runs of `.` or `-` form a
//! single token (`...`, `--`).

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use log::warn;

use super::Sentence;
use crate::{Error, Result};

const TABLES: &[(&str, &str)] = &[
    ("en", include_str!("../../data/abbrev/en.txt")),
    ("et", include_str!("../../data/abbrev/et.txt")),
    ("fi", include_str!("../../data/abbrev/fi.txt")),
    ("lt", include_str!("../../data/abbrev/lt.txt")),
    ("lv", include_str!("../../data/abbrev/lv.txt")),
    ("sl", include_str!("../../data/abbrev/sl.txt")),
    ("sv", include_str!("../../data/abbrev/sv.txt")),
];

const DEFAULT_TABLE: &str = include_str!("../../data/abbrev/default.txt");

const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '«', '»', '„', '“', '‘', '‚'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '»', '«', '”', '“', '’'];

/// Maps a language code onto the code of the rule table it uses.
///
/// Croatian shares the Slovene table.
fn table_language(lang: &str) -> &str {
    match lang {
        "hr" => "sl",
        other => other,
    }
}

/// Returns true when a built-in rule table exists for `lang`.
pub fn has_builtin_rules(lang: &str) -> bool {
    let key = table_language(lang);
    TABLES.iter().any(|(code, _)| *code == key)
}

#[derive(Clone, Debug)]
pub struct Tokenizer {
    lang: String,
    abbreviations: HashSet<String>,
}

impl Tokenizer {
    /// Tokenizer with the built-in rules for `lang`. Unknown languages fall
    /// back to the generic table and log a warning.
    pub fn for_language(lang: &str) -> Self {
        let key = table_language(lang);
        let table = match TABLES.iter().find(|(code, _)| *code == key) {
            Some((_, table)) => table,
            None => {
                warn!("no tokenizer rules for language '{lang}', using the default rule set");
                DEFAULT_TABLE
            }
        };
        Self::with_table(lang, table)
    }

    /// Builds a tokenizer from abbreviation table text: one abbreviation per
    /// line, `#` starts a comment line.
    pub fn with_table(lang: &str, table: &str) -> Self {
        let abbreviations = table
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.trim_end_matches('.').to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        Tokenizer {
            lang: lang.to_owned(),
            abbreviations,
        }
    }

    pub fn from_table_file(lang: &str, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::with_table(lang, &text))
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    /// `word` is given without its trailing period.
    pub fn is_abbreviation(&self, word: &str) -> bool {
        self.abbreviations.contains(&word.to_lowercase())
    }

    /// Splits a paragraph into sentence spans. Whitespace inside a span is
    /// collapsed to single spaces.
    pub fn segment_sentences(&self, paragraph: &str) -> Vec<String> {
        let chunks: Vec<&str> = paragraph.split_whitespace().collect();
        let mut spans = Vec::new();
        let mut start = 0;
        for i in 0..chunks.len() {
            let boundary = match chunks.get(i + 1) {
                None => true,
                Some(next) => self.ends_sentence(chunks[i]) && starts_sentence(next),
            };
            if boundary {
                spans.push(chunks[start..=i].join(" "));
                start = i + 1;
            }
        }
        spans
    }

    fn ends_sentence(&self, chunk: &str) -> bool {
        let core = chunk.trim_end_matches(CLOSERS);
        if core.ends_with(['!', '?', '…']) {
            return true;
        }
        if !core.ends_with('.') {
            return false;
        }
        if core.ends_with("..") {
            return true;
        }
        let word = core.trim_start_matches(OPENERS);
        let word = &word[..word.len() - 1];
        if word.is_empty() {
            return true;
        }
        if self.is_abbreviation(word) {
            return false;
        }
        let mut chars = word.chars();
        let is_initial = matches!((chars.next(), chars.next()), (Some(c), None) if c.is_uppercase());
        !is_initial
    }

    /// Tokenizes one sentence span. The result is empty only when the span
    /// contains nothing but whitespace.
    pub fn tokenize(&self, span: &str) -> Sentence {
        let mut tokens = Vec::new();
        for chunk in span.split_whitespace() {
            self.tokenize_chunk(chunk, &mut tokens);
        }
        Sentence::from_tokens_unchecked(tokens)
    }

    /// Segments and tokenizes a paragraph.
    pub fn tokenize_paragraph(&self, paragraph: &str) -> Vec<Sentence> {
        self.segment_sentences(paragraph)
            .iter()
            .map(|span| self.tokenize(span))
            .filter(|s| !s.is_empty())
            .collect()
    }

    fn tokenize_chunk(&self, chunk: &str, out: &mut Vec<String>) {
        let chars: Vec<char> = chunk.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let start = i;
            if is_word_char(c) {
                if let Some(end) = self.abbreviation_end(&chars, i) {
                    out.push(chars[start..end].iter().collect());
                    i = end;
                    continue;
                }
                i += 1;
                while i < chars.len() {
                    let c = chars[i];
                    if is_word_char(c) {
                        i += 1;
                        continue;
                    }
                    let next = chars.get(i + 1).copied();
                    let prev = chars[i - 1];
                    let joins_words = matches!(c, '-' | '\'' | '’') && next.is_some_and(is_word_char);
                    let joins_digits = matches!(c, '.' | ',' | ':')
                        && prev.is_numeric()
                        && next.is_some_and(char::is_numeric);
                    if joins_words || joins_digits {
                        i += 1;
                    } else {
                        break;
                    }
                }
            } else {
                i += 1;
                if matches!(c, '.' | '-') {
                    while i < chars.len() && chars[i] == c {
                        i += 1;
                    }
                }
            }
            out.push(chars[start..i].iter().collect());
        }
    }

    /// End index of the longest abbreviation (`word.` or `w.w.` forms)
    /// starting at `start`, if any.
    fn abbreviation_end(&self, chars: &[char], start: usize) -> Option<usize> {
        let mut best = None;
        let mut j = start;
        loop {
            let mut k = j;
            while k < chars.len() && is_word_char(chars[k]) {
                k += 1;
            }
            if k == j || k >= chars.len() || chars[k] != '.' {
                break;
            }
            let word: String = chars[start..k].iter().collect();
            if self.is_abbreviation(&word) {
                best = Some(k + 1);
            }
            j = k + 1;
            if j >= chars.len() || !is_word_char(chars[j]) {
                break;
            }
        }
        best
    }
}

fn starts_sentence(chunk: &str) -> bool {
    chunk
        .trim_start_matches(OPENERS)
        .chars()
        .next()
        .is_some_and(|c| c.is_uppercase() || c.is_numeric())
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || is_combining_mark(c)
}

fn is_combining_mark(c: char) -> bool {
    matches!(c as u32,
        0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}
