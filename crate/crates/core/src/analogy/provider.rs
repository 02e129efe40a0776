//! Embedding providers for the template-substitution method.
//!
//! The file protocol: a request file holds one sentence per line in the
//! canonical format; the response is a record file (see
//! [`crate::embstore::RecordReader`]) whose `sentence_id` is the 0-based line
//! number of the sentence in the request.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xxhash_rust::xxh3::xxh3_64;

use crate::embstore::{Layer, RecordReader, RecordWriter, StaticEmbeddings};
use crate::{Error, Result};

/// Maps sentences to per-token vectors at one layer.
pub trait EmbeddingProvider {
    /// One vector per token for each sentence, in request order.
    fn embed(&mut self, sentences: &[Vec<String>], layer: Layer) -> Result<Vec<Vec<Vec<f32>>>>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for &mut P {
    fn embed(&mut self, sentences: &[Vec<String>], layer: Layer) -> Result<Vec<Vec<Vec<f32>>>> {
        (**self).embed(sentences, layer)
    }
}

/// Context-free provider returning a fixed vector per token, the same for
/// every layer. Tokens without a vector get the zero vector, so template
/// words need not be in the table.
pub struct StaticProvider {
    emb: StaticEmbeddings,
}

impl StaticProvider {
    pub fn new(emb: StaticEmbeddings) -> Self {
        StaticProvider { emb }
    }
}

impl EmbeddingProvider for StaticProvider {
    fn embed(&mut self, sentences: &[Vec<String>], _layer: Layer) -> Result<Vec<Vec<Vec<f32>>>> {
        Ok(sentences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| self.emb.get(t).map_or_else(|| vec![0.0; self.emb.dim()], <[f32]>::to_vec))
                    .collect()
            })
            .collect())
    }
}

/// Context-free deterministic provider: each (token, layer) vector is drawn
/// uniformly from `[-1, 1)^dim` by a ChaCha8 generator seeded with the
/// token's `xxh3_64` hash, the layer and `seed`.
#[derive(Clone, Copy, Debug)]
pub struct HashMockProvider {
    pub dim: usize,
    pub seed: u64,
}

impl HashMockProvider {
    pub fn new(dim: usize, seed: u64) -> Self {
        HashMockProvider { dim, seed }
    }

    pub fn vector(&self, token: &str, layer: Layer) -> Vec<f32> {
        let mix = xxh3_64(token.as_bytes()) ^ self.seed.rotate_left(17) ^ (layer.index() as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(mix);
        (0..self.dim).map(|_| rng.random_range(-1.0f32..1.0)).collect()
    }
}

impl EmbeddingProvider for HashMockProvider {
    fn embed(&mut self, sentences: &[Vec<String>], layer: Layer) -> Result<Vec<Vec<Vec<f32>>>> {
        Ok(sentences
            .iter()
            .map(|s| s.iter().map(|t| self.vector(t, layer)).collect())
            .collect())
    }
}

/// Reads sentences from a request file (blank lines keep their line number
/// but are not embedded).
fn read_request(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let tokens: Vec<String> = line?.split_whitespace().map(str::to_owned).collect();
        if !tokens.is_empty() {
            out.push((i, tokens));
        }
    }
    Ok(out)
}

/// Answers a request file with `provider`, writing all three layers.
/// Returns the number of records written.
pub fn serve_request<P: EmbeddingProvider + ?Sized>(provider: &mut P, request: &Path, response: &Path) -> Result<usize> {
    let sentences = read_request(request)?;
    let tokens: Vec<Vec<String>> = sentences.iter().map(|(_, t)| t.clone()).collect();
    let layers = Layer::ALL
        .iter()
        .map(|&l| provider.embed(&tokens, l))
        .collect::<Result<Vec<_>>>()?;
    let file = File::create(response).map_err(|e| Error::io(response, e))?;
    let mut w = RecordWriter::new(BufWriter::new(file));
    let mut n = 0;
    for (s, (line, toks)) in sentences.iter().enumerate() {
        let id = line.to_string();
        for (pos, tok) in toks.iter().enumerate() {
            for (li, layer) in Layer::ALL.iter().enumerate() {
                w.write(&id, pos, tok, *layer, &layers[li][s][pos])?;
                n += 1;
            }
        }
    }
    w.into_inner()?.flush()?;
    Ok(n)
}

/// Collects the vectors of `layer` from a record file, grouped by sentence id
/// and position. Each entry holds the token and its vector.
fn collect_layer(path: &Path, layer: Layer) -> Result<HashMap<String, Vec<Option<(String, Vec<f32>)>>>> {
    let mut by_sentence: HashMap<String, Vec<Option<(String, Vec<f32>)>>> = HashMap::new();
    for rec in RecordReader::open(path)? {
        let rec = rec?;
        if rec.layer != layer {
            continue;
        }
        let slots = by_sentence.entry(rec.sentence_id).or_default();
        if slots.len() <= rec.position {
            slots.resize(rec.position + 1, None);
        }
        slots[rec.position] = Some((rec.token, rec.vector));
    }
    Ok(by_sentence)
}

static REQUEST_COUNTER: AtomicUsize = AtomicUsize::new(0);

/// Runs an external command per batch:
/// `program [args…] --embed-in <request> --embed-out <response>`.
pub struct SubprocessProvider {
    program: PathBuf,
    args: Vec<String>,
    work_dir: PathBuf,
}

impl SubprocessProvider {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        SubprocessProvider {
            program: program.into(),
            args,
            work_dir: std::env::temp_dir(),
        }
    }

    /// Directory for request and response files.
    pub fn with_work_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.work_dir = dir.into();
        self
    }
}

impl EmbeddingProvider for SubprocessProvider {
    fn embed(&mut self, sentences: &[Vec<String>], layer: Layer) -> Result<Vec<Vec<Vec<f32>>>> {
        let id = REQUEST_COUNTER.fetch_add(1, Ordering::Relaxed);
        let stem = format!("embkit-provider-{}-{id}", std::process::id());
        let request = self.work_dir.join(format!("{stem}.in.txt"));
        let response = self.work_dir.join(format!("{stem}.out.tsv"));
        {
            let file = File::create(&request).map_err(|e| Error::io(&request, e))?;
            let mut w = BufWriter::new(file);
            for s in sentences {
                writeln!(w, "{}", s.join(" "))?;
            }
            w.flush()?;
        }
        let output = Command::new(&self.program)
            .args(&self.args)
            .arg("--embed-in")
            .arg(&request)
            .arg("--embed-out")
            .arg(&response)
            .output()
            .map_err(|e| Error::Provider(format!("cannot run {}: {e}", self.program.display())))?;
        let result = if !output.status.success() {
            Err(Error::Provider(format!(
                "{} exited with {}: {}",
                self.program.display(),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )))
        } else {
            collect_layer(&response, layer).and_then(|mut by_sentence| {
                sentences
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let slots = by_sentence.remove(&i.to_string()).unwrap_or_default();
                        assemble(i, s, slots, layer)
                    })
                    .collect()
            })
        };
        let _ = fs::remove_file(&request);
        let _ = fs::remove_file(&response);
        result
    }
}

fn assemble(index: usize, tokens: &[String], slots: Vec<Option<(String, Vec<f32>)>>, layer: Layer) -> Result<Vec<Vec<f32>>> {
    if slots.len() != tokens.len() {
        return Err(Error::Protocol(format!(
            "sentence {index}: expected {} tokens at layer {layer}, response has {}",
            tokens.len(),
            slots.len()
        )));
    }
    tokens
        .iter()
        .zip(slots)
        .enumerate()
        .map(|(pos, (want, slot))| match slot {
            Some((got, v)) if &got == want => Ok(v),
            Some((got, _)) => Err(Error::Protocol(format!(
                "sentence {index} position {pos}: expected token '{want}', response has '{got}'"
            ))),
            None => Err(Error::Protocol(format!(
                "sentence {index} position {pos}: missing vector at layer {layer}"
            ))),
        })
        .collect()
}

/// Looks sentences up in a precomputed record file, matching on the
/// space-joined token sequence.
pub struct RecordFileProvider {
    layer: Layer,
    sentences: HashMap<String, Vec<Vec<f32>>>,
}

impl RecordFileProvider {
    pub fn open(path: impl AsRef<Path>, layer: Layer) -> Result<Self> {
        let by_sentence = collect_layer(path.as_ref(), layer)?;
        let mut sentences = HashMap::with_capacity(by_sentence.len());
        for (id, slots) in by_sentence {
            let mut tokens = Vec::with_capacity(slots.len());
            let mut vectors = Vec::with_capacity(slots.len());
            for (pos, slot) in slots.into_iter().enumerate() {
                let (t, v) = slot.ok_or_else(|| {
                    Error::Protocol(format!("sentence {id}: missing position {pos} at layer {layer}"))
                })?;
                tokens.push(t);
                vectors.push(v);
            }
            sentences.insert(tokens.join(" "), vectors);
        }
        Ok(RecordFileProvider { layer, sentences })
    }
}

impl EmbeddingProvider for RecordFileProvider {
    fn embed(&mut self, sentences: &[Vec<String>], layer: Layer) -> Result<Vec<Vec<Vec<f32>>>> {
        if layer != self.layer {
            return Err(Error::Provider(format!(
                "precomputed records were loaded for layer {}, not {layer}",
                self.layer
            )));
        }
        sentences
            .iter()
            .map(|s| {
                let key = s.join(" ");
                self.sentences
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| Error::Provider(format!("sentence not in precomputed records: {key}")))
            })
            .collect()
    }
}
