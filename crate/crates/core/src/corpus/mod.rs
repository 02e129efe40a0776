//! Corpus ingestion and the one-sentence-per-line format.
//!
//! In the canonical format every sentence is one line with its tokens joined
//! by single spaces, and paragraphs are separated by a blank line. Raw input
//! uses the same paragraph convention: one or more blank lines end a
//! paragraph.

mod tokenize;

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use tokenize::{has_builtin_rules, Tokenizer};

use crate::{Error, Result};

/// One sentence: a non-empty list of tokens without whitespace.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidArgument("sentence has no tokens".into()));
        }
        if let Some(bad) = tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(Error::InvalidArgument(format!("invalid token {bad:?}")));
        }
        Ok(Sentence { tokens })
    }

    /// Splits a canonical line on whitespace.
    pub fn from_line(line: &str) -> Option<Self> {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        (!tokens.is_empty()).then_some(Sentence { tokens })
    }

    pub(crate) fn from_tokens_unchecked(tokens: Vec<String>) -> Self {
        Sentence { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Paragraph {
    /// Untokenized text with line breaks replaced by single spaces.
    Raw(String),
    Sentences(Vec<Sentence>),
}

impl Paragraph {
    pub fn token_count(&self) -> usize {
        match self {
            Paragraph::Raw(text) => text.split_whitespace().count(),
            Paragraph::Sentences(s) => s.iter().map(Sentence::len).sum(),
        }
    }

    /// Tokenizes a raw paragraph; tokenized paragraphs pass through unchanged.
    pub fn tokenized(self, tokenizer: &Tokenizer) -> Paragraph {
        match self {
            Paragraph::Raw(text) => Paragraph::Sentences(tokenizer.tokenize_paragraph(&text)),
            tokenized => tokenized,
        }
    }

    pub fn sentences(&self) -> &[Sentence] {
        match self {
            Paragraph::Raw(_) => &[],
            Paragraph::Sentences(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub paragraphs: Vec<Paragraph>,
}

impl Document {
    pub fn tokenized(self, tokenizer: &Tokenizer) -> Document {
        let paragraphs = self
            .paragraphs
            .into_par_iter()
            .map(|p| p.tokenized(tokenizer))
            .filter(|p| !p.sentences().is_empty())
            .collect();
        Document {
            id: self.id,
            paragraphs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    RawText,
    Pretokenized,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" | "raw-text" => Ok(InputFormat::RawText),
            "pretok" | "pretokenized" | "pretokenized-lines" => Ok(InputFormat::Pretokenized),
            other => Err(Error::InvalidArgument(format!("unknown corpus format '{other}'"))),
        }
    }
}

/// Streaming paragraph reader.
///
/// Invalid UTF-8 sequences are replaced with U+FFFD and counted in
/// [`CorpusReader::replacements`].
pub struct CorpusReader<R> {
    reader: R,
    format: InputFormat,
    replacements: usize,
    buf: Vec<u8>,
    done: bool,
}

impl CorpusReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, format: InputFormat) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(CorpusReader::new(BufReader::new(file), format))
    }
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, format: InputFormat) -> Self {
        CorpusReader {
            reader,
            format,
            replacements: 0,
            buf: Vec::new(),
            done: false,
        }
    }

    pub fn replacements(&self) -> usize {
        self.replacements
    }

    fn next_line(&mut self) -> Result<Option<String>> {
        self.buf.clear();
        if self.reader.read_until(b'\n', &mut self.buf)? == 0 {
            return Ok(None);
        }
        let line = match std::str::from_utf8(&self.buf) {
            Ok(s) => s.to_owned(),
            Err(_) => {
                self.replacements += self
                    .buf
                    .utf8_chunks()
                    .filter(|c| !c.invalid().is_empty())
                    .count();
                String::from_utf8_lossy(&self.buf).into_owned()
            }
        };
        Ok(Some(line))
    }

    fn read_paragraph(&mut self) -> Result<Option<Paragraph>> {
        let mut lines: Vec<String> = Vec::new();
        while let Some(line) = self.next_line()? {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                if lines.is_empty() {
                    continue;
                }
                break;
            }
            lines.push(trimmed.to_owned());
        }
        if lines.is_empty() {
            return Ok(None);
        }
        Ok(Some(match self.format {
            InputFormat::RawText => Paragraph::Raw(lines.join(" ")),
            InputFormat::Pretokenized => {
                Paragraph::Sentences(lines.iter().filter_map(|l| Sentence::from_line(l)).collect())
            }
        }))
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Paragraph>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_paragraph() {
            Ok(Some(p)) => Some(Ok(p)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Number of invalid UTF-8 sequences replaced with U+FFFD.
    pub replacements: usize,
}

/// Reads a whole file as one document whose id is the file path.
///
/// Large inputs should be streamed with [`CorpusReader`] instead.
pub fn load_corpus(path: impl AsRef<Path>, format: InputFormat) -> Result<(Document, LoadReport)> {
    let path = path.as_ref();
    let mut reader = CorpusReader::open(path, format)?;
    let paragraphs = reader.by_ref().collect::<Result<Vec<_>>>()?;
    let report = LoadReport {
        replacements: reader.replacements(),
    };
    if report.replacements > 0 {
        log::warn!(
            "{}: replaced {} invalid UTF-8 sequence(s)",
            path.display(),
            report.replacements
        );
    }
    Ok((
        Document {
            id: path.display().to_string(),
            paragraphs,
        },
        report,
    ))
}

/// Writes paragraphs in the canonical format, inserting a blank line between
/// paragraphs.
pub struct LineWriter<W: Write> {
    out: W,
    paragraphs: usize,
    tokens: u64,
}

impl<W: Write> LineWriter<W> {
    pub fn new(out: W) -> Self {
        LineWriter {
            out,
            paragraphs: 0,
            tokens: 0,
        }
    }

    /// Empty paragraphs are skipped.
    pub fn write_paragraph(&mut self, sentences: &[Sentence]) -> Result<()> {
        if sentences.is_empty() {
            return Ok(());
        }
        if self.paragraphs > 0 {
            self.out.write_all(b"\n")?;
        }
        for s in sentences {
            let mut first = true;
            for t in s.tokens() {
                if !first {
                    self.out.write_all(b" ")?;
                }
                self.out.write_all(t.as_bytes())?;
                first = false;
            }
            self.out.write_all(b"\n")?;
            self.tokens += s.len() as u64;
        }
        self.paragraphs += 1;
        Ok(())
    }

    pub fn tokens_written(&self) -> u64 {
        self.tokens
    }

    pub fn finish(mut self) -> Result<(W, u64)> {
        self.out.flush()?;
        Ok((self.out, self.tokens))
    }
}

/// Writes tokenized documents to `out` and returns the number of tokens
/// written. Raw paragraphs are rejected.
pub fn emit_lines<I>(docs: I, out: impl AsRef<Path>) -> Result<u64>
where
    I: IntoIterator<Item = Document>,
{
    let out = out.as_ref();
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut writer = LineWriter::new(BufWriter::new(file));
    for doc in docs {
        for p in &doc.paragraphs {
            match p {
                Paragraph::Raw(_) => {
                    return Err(Error::InvalidArgument(format!(
                        "document {} has untokenized paragraphs",
                        doc.id
                    )))
                }
                Paragraph::Sentences(s) => writer.write_paragraph(s)?,
            }
        }
    }
    let (_, tokens) = writer.finish()?;
    Ok(tokens)
}

/// Streams `input` through the tokenizer into `output` in batches,
/// tokenizing each batch in parallel. Returns tokens written and the load
/// report.
pub fn tokenize_file(
    input: impl AsRef<Path>,
    format: InputFormat,
    tokenizer: &Tokenizer,
    output: impl AsRef<Path>,
) -> Result<(u64, LoadReport)> {
    const BATCH: usize = 4096;
    let output = output.as_ref();
    let mut reader = CorpusReader::open(input.as_ref(), format)?;
    let file = File::create(output).map_err(|e| Error::io(output, e))?;
    let mut writer = LineWriter::new(BufWriter::new(file));
    loop {
        let batch = reader.by_ref().take(BATCH).collect::<Result<Vec<_>>>()?;
        if batch.is_empty() {
            break;
        }
        let tokenized: Vec<Paragraph> = batch
            .into_par_iter()
            .map(|p| p.tokenized(tokenizer))
            .collect();
        for p in &tokenized {
            writer.write_paragraph(p.sentences())?;
        }
    }
    let (_, tokens) = writer.finish()?;
    Ok((
        tokens,
        LoadReport {
            replacements: reader.replacements(),
        },
    ))
}
