//! Near-duplicate removal keeping one instance of repeated content.
//!
//! Units (paragraphs or sentences) are processed in corpus order in a single
//! pass. Each unit is cut into shingles, the contiguous `n`-token windows.
//! A unit whose fraction of already-seen shingles is strictly greater than
//! the threshold is dropped; a kept unit adds its shingles to the seen set.
//!
//! A shingle is hashed as `xxh3_64` (seed 0) of its tokens joined by single
//! ASCII spaces, case preserved. Units shorter than `n` tokens yield one
//! shingle covering the whole unit.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64;

use crate::corpus::{CorpusReader, InputFormat, LineWriter, Paragraph, Sentence};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DedupUnit {
    Paragraph,
    Sentence,
}

impl FromStr for DedupUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paragraph" => Ok(DedupUnit::Paragraph),
            "sentence" => Ok(DedupUnit::Sentence),
            other => Err(Error::InvalidArgument(format!("unknown dedup unit '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DedupConfig {
    /// Shingle length in tokens.
    pub n: usize,
    /// Duplicate-content fraction above which a unit is dropped.
    pub threshold: f64,
    pub unit: DedupUnit,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            n: 9,
            threshold: 0.9,
            unit: DedupUnit::Paragraph,
        }
    }
}

impl DedupConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidArgument("shingle length must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidArgument(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Hashes of all `n`-token windows of `unit`, or a single whole-unit hash when
/// the unit is shorter than `n`.
pub fn shingle<S: AsRef<str>>(unit: &[S], n: usize) -> Vec<u64> {
    let n = n.max(1);
    if unit.is_empty() {
        return Vec::new();
    }
    let mut buf = String::new();
    let mut hash_window = |window: &[S]| {
        buf.clear();
        for (i, t) in window.iter().enumerate() {
            if i > 0 {
                buf.push(' ');
            }
            buf.push_str(t.as_ref());
        }
        xxh3_64(buf.as_bytes())
    };
    if unit.len() < n {
        return vec![hash_window(unit)];
    }
    unit.windows(n).map(hash_window).collect()
}

const SHARD_BITS: u32 = 6;

/// Set of seen shingle hashes, sharded by the top hash bits.
#[derive(Debug)]
pub struct ShingleSet {
    shards: Vec<HashSet<u64>>,
    count: usize,
}

impl Default for ShingleSet {
    fn default() -> Self {
        ShingleSet {
            shards: (0..1 << SHARD_BITS).map(|_| HashSet::new()).collect(),
            count: 0,
        }
    }
}

impl ShingleSet {
    pub fn new() -> Self {
        Self::default()
    }

    fn shard(hash: u64) -> usize {
        (hash >> (64 - SHARD_BITS)) as usize
    }

    pub fn contains(&self, hash: u64) -> bool {
        self.shards[Self::shard(hash)].contains(&hash)
    }

    /// Returns true when the hash was not present before.
    pub fn insert(&mut self, hash: u64) -> bool {
        let fresh = self.shards[Self::shard(hash)].insert(hash);
        if fresh {
            self.count += 1;
        }
        fresh
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupStats {
    pub units_in: u64,
    pub units_kept: u64,
    pub tokens_in: u64,
    pub tokens_kept: u64,
    pub distinct_shingles: u64,
}

impl DedupStats {
    pub fn units_dropped(&self) -> u64 {
        self.units_in - self.units_kept
    }

    pub fn tokens_dropped(&self) -> u64 {
        self.tokens_in - self.tokens_kept
    }
}

/// Sequential keep/drop state over an ordered stream of units.
#[derive(Debug)]
pub struct Deduplicator {
    cfg: DedupConfig,
    seen: ShingleSet,
    stats: DedupStats,
}

impl Deduplicator {
    pub fn new(cfg: DedupConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Deduplicator {
            cfg,
            seen: ShingleSet::new(),
            stats: DedupStats::default(),
        })
    }

    pub fn config(&self) -> &DedupConfig {
        &self.cfg
    }

    /// Fraction of `shingles` already in the seen set; 0 for an empty list.
    pub fn duplicate_ratio(&self, shingles: &[u64]) -> f64 {
        if shingles.is_empty() {
            return 0.0;
        }
        let seen = shingles.iter().filter(|&&h| self.seen.contains(h)).count();
        seen as f64 / shingles.len() as f64
    }

    /// Decides on a unit given its precomputed shingles and commits the
    /// shingles of kept units. Returns true when the unit is kept.
    pub fn offer_shingles(&mut self, shingles: &[u64], tokens: usize) -> bool {
        let keep = self.duplicate_ratio(shingles) <= self.cfg.threshold;
        self.stats.units_in += 1;
        self.stats.tokens_in += tokens as u64;
        if keep {
            for &h in shingles {
                self.seen.insert(h);
            }
            self.stats.units_kept += 1;
            self.stats.tokens_kept += tokens as u64;
        }
        keep
    }

    pub fn offer<S: AsRef<str>>(&mut self, unit: &[S]) -> bool {
        let shingles = shingle(unit, self.cfg.n);
        self.offer_shingles(&shingles, unit.len())
    }

    /// Shingles the batch in parallel, then decides sequentially in order.
    /// The result equals calling [`Deduplicator::offer`] on each unit.
    pub fn offer_batch<S: AsRef<str> + Sync>(&mut self, units: &[Vec<S>]) -> Vec<bool> {
        let n = self.cfg.n;
        let shingled: Vec<Vec<u64>> = units.par_iter().map(|u| shingle(u, n)).collect();
        shingled
            .iter()
            .zip(units)
            .map(|(s, u)| self.offer_shingles(s, u.len()))
            .collect()
    }

    pub fn stats(&self) -> DedupStats {
        DedupStats {
            distinct_shingles: self.seen.len() as u64,
            ..self.stats
        }
    }
}

/// Deduplicates an ordered list of token units, returning the kept units in
/// order.
pub fn dedup_stream(units: Vec<Vec<String>>, cfg: DedupConfig) -> Result<(Vec<Vec<String>>, DedupStats)> {
    let mut dedup = Deduplicator::new(cfg)?;
    let decisions = dedup.offer_batch(&units);
    let kept = units
        .into_iter()
        .zip(decisions)
        .filter_map(|(u, keep)| keep.then_some(u))
        .collect();
    Ok((kept, dedup.stats()))
}

/// Deduplicates a canonical one-sentence-per-line file, keeping its paragraph
/// structure. In sentence mode a paragraph left without sentences is removed.
pub fn dedup_file(input: impl AsRef<Path>, output: impl AsRef<Path>, cfg: DedupConfig) -> Result<DedupStats> {
    const BATCH: usize = 4096;
    let output = output.as_ref();
    let mut dedup = Deduplicator::new(cfg)?;
    let mut reader = CorpusReader::open(input.as_ref(), InputFormat::Pretokenized)?;
    let file = File::create(output).map_err(|e| Error::io(output, e))?;
    let mut writer = LineWriter::new(BufWriter::new(file));
    loop {
        let batch: Vec<Vec<Sentence>> = reader
            .by_ref()
            .take(BATCH)
            .map(|p| {
                p.map(|p| match p {
                    Paragraph::Sentences(s) => s,
                    Paragraph::Raw(_) => unreachable!("pretokenized reader yields sentences"),
                })
            })
            .collect::<Result<_>>()?;
        if batch.is_empty() {
            break;
        }
        match cfg.unit {
            DedupUnit::Paragraph => {
                let units: Vec<Vec<&str>> = batch
                    .iter()
                    .map(|p| p.iter().flat_map(|s| s.tokens()).map(String::as_str).collect())
                    .collect();
                let keep = dedup.offer_batch(&units);
                for (p, k) in batch.iter().zip(keep) {
                    if k {
                        writer.write_paragraph(p)?;
                    }
                }
            }
            DedupUnit::Sentence => {
                let units: Vec<Vec<&str>> = batch
                    .iter()
                    .flatten()
                    .map(|s| s.tokens().iter().map(String::as_str).collect())
                    .collect();
                let mut keep = dedup.offer_batch(&units).into_iter();
                for p in &batch {
                    let kept: Vec<Sentence> = p
                        .iter()
                        .filter(|_| keep.next().unwrap_or(false))
                        .cloned()
                        .collect();
                    writer.write_paragraph(&kept)?;
                }
            }
        }
    }
    writer.finish()?;
    Ok(dedup.stats())
}

pub fn write_stats(stats: &DedupStats, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, stats)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
