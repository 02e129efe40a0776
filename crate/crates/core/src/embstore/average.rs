use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use xxhash_rust::xxh3::xxh3_64;

use super::{Layer, StaticEmbeddings, TokenEmbeddingRecord};
use crate::{Error, Result};

/// Running double-precision sum of a token's occurrence vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct AverageAccumulator {
    sum: Vec<f64>,
    count: u64,
}

impl AverageAccumulator {
    pub fn new(dim: usize) -> Self {
        AverageAccumulator {
            sum: vec![0.0; dim],
            count: 0,
        }
    }

    pub fn add(&mut self, v: &[f32]) {
        for (s, &x) in self.sum.iter_mut().zip(v) {
            *s += x as f64;
        }
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Mean vector; `None` before the first occurrence.
    pub fn mean(&self) -> Option<Vec<f64>> {
        (self.count > 0).then(|| self.sum.iter().map(|s| s / self.count as f64).collect())
    }
}

#[derive(Default)]
struct Shard {
    tokens: HashMap<String, (u64, AverageAccumulator)>,
}

const BATCH: usize = 8192;

/// Averages the vectors of every occurrence of each token at `layer`.
///
/// Tokens are partitioned over `shards` workers by token hash, so every
/// token is accumulated by one worker in record-stream order and the result
/// is the same for any shard count. Output rows follow `vocab_filter` order
/// when a filter is given, and first-occurrence order otherwise.
pub fn average_occurrences<I>(
    records: I,
    layer: Layer,
    vocab_filter: Option<&[String]>,
    shards: usize,
) -> Result<StaticEmbeddings>
where
    I: IntoIterator<Item = Result<TokenEmbeddingRecord>>,
{
    let shards = shards.max(1);
    let filter: Option<HashSet<&str>> = vocab_filter.map(|v| v.iter().map(String::as_str).collect());
    let mut states: Vec<Shard> = (0..shards).map(|_| Shard::default()).collect();
    let mut dim = None;
    let mut seq = 0u64;
    let mut batch: Vec<(u64, TokenEmbeddingRecord)> = Vec::with_capacity(BATCH);
    let mut matched_layer = false;

    let flush = |batch: &mut Vec<(u64, TokenEmbeddingRecord)>, states: &mut Vec<Shard>| {
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); shards];
        for (i, (_, r)) in batch.iter().enumerate() {
            buckets[(xxh3_64(r.token.as_bytes()) % shards as u64) as usize].push(i);
        }
        let batch_ref = &*batch;
        states
            .par_iter_mut()
            .zip(buckets)
            .for_each(|(state, idx)| {
                for i in idx {
                    let (seq, r) = &batch_ref[i];
                    let entry = match state.tokens.get_mut(&r.token) {
                        Some(e) => e,
                        None => state
                            .tokens
                            .entry(r.token.clone())
                            .or_insert_with(|| (*seq, AverageAccumulator::new(r.vector.len()))),
                    };
                    entry.1.add(&r.vector);
                }
            });
        batch.clear();
    };

    for rec in records {
        let rec = rec?;
        if rec.layer != layer {
            continue;
        }
        matched_layer = true;
        let d = *dim.get_or_insert(rec.vector.len());
        if rec.vector.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: rec.vector.len(),
            });
        }
        if filter.as_ref().is_some_and(|f| !f.contains(rec.token.as_str())) {
            continue;
        }
        batch.push((seq, rec));
        seq += 1;
        if batch.len() == BATCH {
            flush(&mut batch, &mut states);
        }
    }
    if !batch.is_empty() {
        flush(&mut batch, &mut states);
    }
    if !matched_layer {
        return Err(Error::EmptyResult(layer.to_string()));
    }

    let mut rows: Vec<(u64, String, AverageAccumulator)> = states
        .into_iter()
        .flat_map(|s| s.tokens.into_iter().map(|(t, (first, acc))| (first, t, acc)))
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyResult(format!("{layer} (after vocabulary filter)")));
    }
    match vocab_filter {
        Some(order) => {
            let rank: HashMap<&str, usize> = order.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
            rows.sort_by_key(|(_, t, _)| rank[t.as_str()]);
        }
        None => rows.sort_by_key(|(first, _, _)| *first),
    }
    let dim = dim.unwrap_or(0);
    let mut words = Vec::with_capacity(rows.len());
    let mut data = Vec::with_capacity(rows.len() * dim);
    for (_, t, acc) in rows {
        words.push(t);
        data.extend(acc.mean().unwrap_or_default().into_iter().map(|x| x as f32));
    }
    StaticEmbeddings::new(words, data, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(token: &str, layer: Layer, v: &[f32]) -> Result<TokenEmbeddingRecord> {
        Ok(TokenEmbeddingRecord {
            sentence_id: "0".into(),
            position: 0,
            token: token.into(),
            layer,
            vector: v.to_vec(),
        })
    }

    #[test]
    fn mean_of_two() {
        let recs = vec![rec("x", Layer::Cnn, &[1.0, 0.0]), rec("x", Layer::Cnn, &[0.0, 1.0])];
        let e = average_occurrences(recs, Layer::Cnn, None, 1).unwrap();
        assert_eq!(e.get("x"), Some(&[0.5f32, 0.5][..]));
    }

    #[test]
    fn single_occurrence_is_identity() {
        let e = average_occurrences(vec![rec("y", Layer::Lstm1, &[0.3, -7.25])], Layer::Lstm1, None, 4).unwrap();
        assert_eq!(e.get("y"), Some(&[0.3f32, -7.25][..]));
    }

    #[test]
    fn three_occurrences() {
        let recs = vec![
            rec("z", Layer::Lstm2, &[1.0, 1.0]),
            rec("z", Layer::Cnn, &[9.0, 9.0]),
            rec("z", Layer::Lstm2, &[2.0, 2.0]),
            rec("z", Layer::Lstm2, &[3.0, 3.0]),
        ];
        let e = average_occurrences(recs, Layer::Lstm2, None, 2).unwrap();
        assert_eq!(e.get("z"), Some(&[2.0f32, 2.0][..]));
    }

    #[test]
    fn missing_layer_is_an_error() {
        let recs = vec![rec("x", Layer::Cnn, &[1.0])];
        assert!(matches!(average_occurrences(recs, Layer::Lstm1, None, 1), Err(Error::EmptyResult(_))));
    }

    #[test]
    fn filter_orders_and_restricts() {
        let recs = vec![
            rec("a", Layer::Cnn, &[1.0]),
            rec("b", Layer::Cnn, &[2.0]),
            rec("c", Layer::Cnn, &[3.0]),
        ];
        let filter = vec!["c".to_string(), "missing".into(), "a".into()];
        let e = average_occurrences(recs, Layer::Cnn, Some(&filter), 3).unwrap();
        assert_eq!(e.words(), ["c", "a"]);
    }

    #[test]
    fn first_occurrence_order_without_filter() {
        let recs = vec![
            rec("q", Layer::Cnn, &[1.0]),
            rec("p", Layer::Cnn, &[2.0]),
            rec("q", Layer::Cnn, &[3.0]),
        ];
        let e = average_occurrences(recs, Layer::Cnn, None, 5).unwrap();
        assert_eq!(e.words(), ["q", "p"]);
    }
}
