//! Token counting and frequency-thresholded vocabularies.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::{Error, Result};

pub type TokenCounts = HashMap<String, u64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VocabEntry {
    pub token: String,
    pub count: u64,
    /// 1-based position in descending-count order.
    pub rank: usize,
}

/// Counts whitespace-separated tokens over lines.
pub fn count_tokens<I, S>(lines: I) -> TokenCounts
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts = TokenCounts::new();
    for line in lines {
        add_line(&mut counts, line.as_ref());
    }
    counts
}

fn add_line(counts: &mut TokenCounts, line: &str) {
    for t in line.split_whitespace() {
        match counts.get_mut(t) {
            Some(c) => *c += 1,
            None => {
                counts.insert(t.to_owned(), 1);
            }
        }
    }
}

pub fn merge_counts(mut a: TokenCounts, b: TokenCounts) -> TokenCounts {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (t, c) in b {
        *a.entry(t).or_insert(0) += c;
    }
    a
}

/// Parallel count over line shards. The result does not depend on how the
/// lines are sharded.
pub fn count_tokens_parallel(lines: &[String]) -> TokenCounts {
    lines
        .par_chunks(8192)
        .map(|chunk| count_tokens(chunk))
        .reduce(TokenCounts::new, merge_counts)
}

/// Streams a canonical file and counts its tokens, processing batches of
/// lines in parallel.
pub fn count_file(path: impl AsRef<Path>) -> Result<TokenCounts> {
    const BATCH: usize = 1 << 16;
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut total = TokenCounts::new();
    let mut batch = Vec::with_capacity(BATCH);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let eof = reader.read_until(b'\n', &mut buf)? == 0;
        if !eof {
            batch.push(String::from_utf8_lossy(&buf).into_owned());
        }
        if batch.len() == BATCH || (eof && !batch.is_empty()) {
            total = merge_counts(total, count_tokens_parallel(&batch));
            batch.clear();
        }
        if eof {
            break;
        }
    }
    Ok(total)
}

/// Default minimum count for a corpus of `total_tokens` tokens: 15 below
/// 100M tokens, 25 from 1B tokens, and one step up per 90M tokens in
/// between.
pub fn default_min_count(total_tokens: u64) -> u64 {
    const LOW: u64 = 100_000_000;
    const HIGH: u64 = 1_000_000_000;
    if total_tokens < LOW {
        15
    } else if total_tokens >= HIGH {
        25
    } else {
        15 + (total_tokens - LOW) / ((HIGH - LOW) / 10)
    }
}

/// Keeps tokens with `count >= min_count`, ordered by descending count with
/// ties broken by code-point order, truncated to `max_size`.
pub fn build_vocab(counts: &TokenCounts, min_count: u64, max_size: Option<usize>) -> Result<Vec<VocabEntry>> {
    if min_count < 1 {
        return Err(Error::InvalidArgument("min_count must be at least 1".into()));
    }
    let mut kept: Vec<(&str, u64)> = counts
        .iter()
        .filter(|(_, &c)| c >= min_count)
        .map(|(t, &c)| (t.as_str(), c))
        .collect();
    kept.par_sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if let Some(max) = max_size {
        kept.truncate(max);
    }
    Ok(kept
        .into_iter()
        .enumerate()
        .map(|(i, (t, c))| VocabEntry {
            token: t.to_owned(),
            count: c,
            rank: i + 1,
        })
        .collect())
}

pub fn write_vocab(entries: &[VocabEntry], path: impl AsRef<Path>, with_counts: bool) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for e in entries {
        if with_counts {
            writeln!(w, "{}\t{}", e.token, e.count)?;
        } else {
            writeln!(w, "{}", e.token)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a vocabulary file (token per line, optional tab-separated count) in
/// rank order.
pub fn read_vocab(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut tokens = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if let Some(token) = line.split('\t').next().map(str::trim).filter(|t| !t.is_empty()) {
            tokens.push(token.to_owned());
        }
    }
    Ok(tokens)
}
