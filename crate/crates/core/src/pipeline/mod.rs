//! Staged runs from raw text to evaluation reports.
//!
//! Stages run in a fixed order and exchange files in the work directory.
//! Each stage writes its artifacts under a `.partial` name, renames them
//! once complete, and records a manifest in `manifests/<stage>.json` with
//! its parameters and the SHA-256 digests of its inputs and outputs. A
//! failed stage leaves its `.partial` files behind.

mod config;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analogy::{
    dataset_vocabulary, method_a_evaluate, method_b_evaluate, parse_analogy_dataset, serve_request, AnalogyQuestion,
    CslsConfig, EmbeddingProvider, HashMockProvider, KindTable, MethodBConfig, Ranking, SubprocessProvider,
    TemplateSet,
};
use crate::corpus::{tokenize_file, InputFormat, Tokenizer};
use crate::dedup::{dedup_file, DedupConfig, DedupUnit};
use crate::embstore::{average_occurrences, load_static, save_static, RecordReader};
use crate::ner::{label_stats, parse_ner, save_ner, split, LabelMap, SplitSpec};
use crate::report::{category_table, emit_report, ReportFormat};
use crate::vocab::{build_vocab, count_file, default_min_count, read_vocab, write_vocab};
use crate::{Error, Result};

pub use config::{
    AnalogySection, AverageSection, CorpusSection, DedupSection, EmbedSection, NerSection, PipelineConfig,
    VocabSection, CONFIG_ENV,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Tokenize,
    Dedup,
    Vocab,
    Embed,
    Average,
    EvalA,
    EvalB,
    NerStats,
    NerSplit,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Tokenize,
        Stage::Dedup,
        Stage::Vocab,
        Stage::Embed,
        Stage::Average,
        Stage::EvalA,
        Stage::EvalB,
        Stage::NerStats,
        Stage::NerSplit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Tokenize => "tokenize",
            Stage::Dedup => "dedup",
            Stage::Vocab => "vocab",
            Stage::Embed => "embed",
            Stage::Average => "average",
            Stage::EvalA => "eval-a",
            Stage::EvalB => "eval-b",
            Stage::NerStats => "ner-stats",
            Stage::NerSplit => "ner-split",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown stage '{s}'")))
    }
}

/// Artifact names inside the work directory.
pub mod artifacts {
    pub const TOKENS: &str = "tokens.txt";
    pub const DEDUP: &str = "dedup.txt";
    pub const DEDUP_STATS: &str = "dedup_stats.json";
    pub const VOCAB: &str = "vocab.txt";
    pub const RECORDS: &str = "records.tsv";
    pub const VECTORS: &str = "vectors.txt";
    pub const ANALOGY_A: &str = "analogy_a.json";
    pub const ANALOGY_A_TSV: &str = "analogy_a.tsv";
    pub const ANALOGY_B: &str = "analogy_b.json";
    pub const ANALOGY_B_TSV: &str = "analogy_b.tsv";
    pub const NER_STATS: &str = "ner_stats.json";
    pub const NER_TRAIN: &str = "ner_train.txt";
    pub const NER_TEST: &str = "ner_test.txt";
    pub const MANIFESTS: &str = "manifests";
}

use artifacts as a;

/// Stages whose configuration is present, in run order.
pub fn configured_stages(cfg: &PipelineConfig) -> Vec<Stage> {
    let mut out = Vec::new();
    if cfg.corpus.input.is_some() {
        out.extend([Stage::Tokenize, Stage::Dedup, Stage::Vocab]);
    }
    if cfg.embed.provider.is_some() && cfg.average.records.is_none() {
        out.push(Stage::Embed);
    }
    if cfg.embed.provider.is_some() || cfg.average.records.is_some() {
        out.push(Stage::Average);
    }
    if cfg.analogy.dataset.is_some() {
        out.push(Stage::EvalA);
        if cfg.embed.provider.is_some() {
            out.push(Stage::EvalB);
        }
    }
    if cfg.ner.data.is_some() {
        out.extend([Stage::NerStats, Stage::NerSplit]);
    }
    out
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    stage: &'a str,
    language: &'a str,
    params: Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    work: PathBuf,
}

/// A stage's output files, written under `.partial` names until committed.
struct Outputs {
    finals: Vec<PathBuf>,
}

fn partial_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

impl Outputs {
    fn partial(&self, i: usize) -> PathBuf {
        partial_path(&self.finals[i])
    }

    fn commit(&self) -> Result<()> {
        for f in &self.finals {
            let p = partial_path(f);
            fs::rename(&p, f).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

/// What the run produced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineRun {
    pub stages: Vec<Stage>,
    pub manifests: Vec<PathBuf>,
}

impl<'a> Runner<'a> {
    fn art(&self, name: &str) -> PathBuf {
        self.work.join(name)
    }

    fn records_path(&self) -> PathBuf {
        match &self.cfg.average.records {
            Some(p) => self.cfg.resolve(p),
            None => self.art(a::RECORDS),
        }
    }

    /// Path label for manifests: relative to the work directory when inside
    /// it, otherwise as configured.
    fn label(&self, p: &Path, configured: Option<&Path>) -> String {
        match p.strip_prefix(&self.work) {
            Ok(rel) => rel.to_string_lossy().into_owned(),
            Err(_) => configured.unwrap_or(p).to_string_lossy().into_owned(),
        }
    }

    fn digest_list(&self, files: &[(PathBuf, Option<PathBuf>)]) -> Result<Vec<FileDigest>> {
        files
            .iter()
            .map(|(p, conf)| {
                Ok(FileDigest {
                    path: self.label(p, conf.as_deref()),
                    sha256: sha256_file(p)?,
                })
            })
            .collect()
    }

    fn write_manifest(&self, stage: Stage, params: Value, inputs: &[(PathBuf, Option<PathBuf>)], outputs: &[PathBuf]) -> Result<PathBuf> {
        let dir = self.art(a::MANIFESTS);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let outs: Vec<(PathBuf, Option<PathBuf>)> = outputs.iter().map(|p| (p.clone(), None)).collect();
        let m = Manifest {
            stage: stage.as_str(),
            language: &self.cfg.language,
            params,
            inputs: self.digest_list(inputs)?,
            outputs: self.digest_list(&outs)?,
        };
        let path = dir.join(format!("{stage}.json"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, &m)?;
        writeln!(w)?;
        w.flush()?;
        Ok(path)
    }

    /// Inputs a stage reads: (resolved path, path as configured).
    fn inputs(&self, stage: Stage) -> Vec<(PathBuf, Option<PathBuf>)> {
        let c = self.cfg;
        let conf = |p: &Option<PathBuf>| p.as_ref().map(|p| (c.resolve(p), Some(p.clone())));
        let work = |name: &str| (self.art(name), None);
        let mut v = Vec::new();
        match stage {
            Stage::Tokenize => {
                v.extend(conf(&c.corpus.input));
                v.extend(conf(&c.corpus.abbreviations));
            }
            Stage::Dedup => v.push(work(a::TOKENS)),
            Stage::Vocab => v.push(work(a::DEDUP)),
            Stage::Embed => v.push(work(a::DEDUP)),
            Stage::Average => {
                v.push((self.records_path(), c.average.records.clone()));
                v.push(work(a::VOCAB));
            }
            Stage::EvalA => {
                v.push(work(a::VECTORS));
                v.extend(conf(&c.analogy.dataset));
                v.extend(conf(&c.analogy.kinds));
            }
            Stage::EvalB => {
                v.extend(conf(&c.analogy.dataset));
                v.extend(conf(&c.analogy.kinds));
                v.extend(conf(&c.analogy.template));
                v.extend(conf(&c.analogy.candidate_vocab));
                if c.analogy.full_vocab {
                    v.push(work(a::VOCAB));
                }
            }
            Stage::NerStats | Stage::NerSplit => {
                v.extend(conf(&c.ner.data));
                v.extend(conf(&c.ner.label_map));
            }
        }
        v
    }

    fn outputs(&self, stage: Stage) -> Outputs {
        let names: &[&str] = match stage {
            Stage::Tokenize => &[a::TOKENS],
            Stage::Dedup => &[a::DEDUP, a::DEDUP_STATS],
            Stage::Vocab => &[a::VOCAB],
            Stage::Embed => &[a::RECORDS],
            Stage::Average => &[a::VECTORS],
            Stage::EvalA => &[a::ANALOGY_A, a::ANALOGY_A_TSV],
            Stage::EvalB => &[a::ANALOGY_B, a::ANALOGY_B_TSV],
            Stage::NerStats => &[a::NER_STATS],
            Stage::NerSplit => &[a::NER_TRAIN, a::NER_TEST],
        };
        Outputs { finals: names.iter().map(|n| self.art(n)).collect() }
    }

    fn validate(&self, stages: &[Stage]) -> Result<()> {
        let c = self.cfg;
        let missing = |what: &str| Err(Error::Config(format!("{what} is required")));
        for &s in stages {
            match s {
                Stage::Tokenize => {
                    if c.corpus.input.is_none() {
                        return missing("corpus.input");
                    }
                    c.corpus.format.parse::<InputFormat>()?;
                }
                Stage::Dedup => {
                    self.dedup_config()?.validate()?;
                }
                Stage::Vocab => {
                    if c.vocab.min_count == Some(0) {
                        return Err(Error::Config("vocab.min_count must be at least 1".into()));
                    }
                }
                Stage::Embed => self.check_provider()?,
                Stage::Average => {
                    if c.average.shards == 0 {
                        return Err(Error::Config("average.shards must be at least 1".into()));
                    }
                }
                Stage::EvalA | Stage::EvalB => {
                    if c.analogy.dataset.is_none() {
                        return missing("analogy.dataset");
                    }
                    if c.analogy.topn.is_empty() || c.analogy.topn.contains(&0) {
                        return Err(Error::Config("analogy.topn needs positive cutoffs".into()));
                    }
                    if c.analogy.candidates == 0 {
                        return Err(Error::Config("analogy.candidates must be at least 1".into()));
                    }
                    if s == Stage::EvalB {
                        self.check_provider()?;
                        self.ranking()?;
                    }
                }
                Stage::NerStats | Stage::NerSplit => {
                    if c.ner.data.is_none() {
                        return missing("ner.data");
                    }
                    self.split_spec().validate()?;
                }
            }
            // every input must exist now or come from an earlier stage of this run
            for (path, _) in self.inputs(s) {
                let produced = stages
                    .iter()
                    .take_while(|&&e| e != s)
                    .any(|&e| self.outputs(e).finals.contains(&path));
                if !produced && !path.exists() {
                    return Err(Error::Config(format!(
                        "stage {s}: input {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_provider(&self) -> Result<()> {
        let e = &self.cfg.embed;
        match e.provider.as_deref() {
            Some("mock") if e.dim > 0 => Ok(()),
            Some("mock") => Err(Error::Config("embed.dim must be at least 1".into())),
            Some("command") if !e.command.is_empty() => Ok(()),
            Some("command") => Err(Error::Config("embed.command is empty".into())),
            Some(other) => Err(Error::Config(format!("unknown embed.provider '{other}'"))),
            None => Err(Error::Config("embed.provider is required".into())),
        }
    }

    fn provider(&self) -> Result<Box<dyn EmbeddingProvider>> {
        self.check_provider()?;
        let e = &self.cfg.embed;
        Ok(match e.provider.as_deref() {
            Some("mock") => Box::new(HashMockProvider::new(e.dim, e.seed)),
            _ => Box::new(
                SubprocessProvider::new(self.cfg.resolve(Path::new(&e.command[0])), e.command[1..].to_vec())
                    .with_work_dir(&self.work),
            ),
        })
    }

    fn ranking(&self) -> Result<Ranking> {
        match self.cfg.analogy.ranking.as_str() {
            "cosine" => Ok(Ranking::Cosine),
            "csls" => {
                let k = CslsConfig { k: self.cfg.analogy.csls_k };
                if k.k == 0 {
                    return Err(Error::Config("analogy.csls_k must be at least 1".into()));
                }
                Ok(Ranking::Csls(k))
            }
            other => Err(Error::Config(format!("unknown analogy.ranking '{other}'"))),
        }
    }

    fn dedup_config(&self) -> Result<DedupConfig> {
        let d = &self.cfg.dedup;
        Ok(DedupConfig { n: d.n, threshold: d.threshold, unit: d.unit.parse::<DedupUnit>()? })
    }

    fn split_spec(&self) -> SplitSpec {
        SplitSpec { train_fraction: self.cfg.ner.train_fraction, seed: self.cfg.ner.seed }
    }

    fn questions(&self) -> Result<Vec<AnalogyQuestion>> {
        let c = &self.cfg.analogy;
        let kinds = match &c.kinds {
            Some(p) => KindTable::from_file(self.cfg.resolve(p))?,
            None => KindTable::default(),
        };
        parse_analogy_dataset(self.cfg.resolve(c.dataset.as_ref().expect("validated")), &kinds)
    }

    fn run_stage(&self, stage: Stage) -> Result<Value> {
        let c = self.cfg;
        let out = self.outputs(stage);
        match stage {
            Stage::Tokenize => {
                let format: InputFormat = c.corpus.format.parse()?;
                let tokenizer = match &c.corpus.abbreviations {
                    Some(p) => Tokenizer::from_table_file(&c.language, c.resolve(p))?,
                    None => Tokenizer::for_language(&c.language),
                };
                let input = c.resolve(c.corpus.input.as_ref().expect("validated"));
                let (tokens, report) = tokenize_file(&input, format, &tokenizer, out.partial(0))?;
                info!("tokenize: {tokens} tokens, {} invalid UTF-8 sequences replaced", report.replacements);
                Ok(json!({ "format": c.corpus.format, "tokens": tokens, "replacements": report.replacements }))
            }
            Stage::Dedup => {
                let cfg = self.dedup_config()?;
                let stats = dedup_file(self.art(a::TOKENS), out.partial(0), cfg)?;
                crate::dedup::write_stats(&stats, out.partial(1))?;
                info!("dedup: kept {} of {} units", stats.units_kept, stats.units_in);
                Ok(serde_json::to_value(&c.dedup)?)
            }
            Stage::Vocab => {
                let counts = count_file(self.art(a::DEDUP))?;
                let total: u64 = counts.values().sum();
                let min_count = c.vocab.min_count.unwrap_or_else(|| default_min_count(total));
                let entries = build_vocab(&counts, min_count, c.vocab.max_size)?;
                write_vocab(&entries, out.partial(0), true)?;
                info!("vocab: {} entries from {total} tokens", entries.len());
                Ok(json!({ "min_count": min_count, "max_size": c.vocab.max_size, "total_tokens": total }))
            }
            Stage::Embed => {
                let mut provider = self.provider()?;
                let n = serve_request(&mut *provider, &self.art(a::DEDUP), &out.partial(0))?;
                info!("embed: {n} records");
                Ok(serde_json::to_value(&c.embed)?)
            }
            Stage::Average => {
                let vocab = read_vocab(self.art(a::VOCAB))?;
                let records = RecordReader::open(self.records_path())?;
                let emb = average_occurrences(records, c.average.layer, Some(&vocab), c.average.shards)?;
                save_static(&emb, out.partial(0))?;
                info!("average: {} vectors of dimension {}", emb.len(), emb.dim());
                // the shard count does not change the output, so it is not a parameter
                Ok(json!({ "layer": c.average.layer }))
            }
            Stage::EvalA => {
                let emb = load_static(self.art(a::VECTORS), None)?;
                let questions = self.questions()?;
                let results = method_a_evaluate(&emb, &questions, c.analogy.candidates, &c.analogy.topn)?;
                let table = category_table(&results, &c.analogy.topn);
                emit_report(&table, ReportFormat::Json, create(&out.partial(0))?)?;
                emit_report(&table, ReportFormat::Tsv, create(&out.partial(1))?)?;
                Ok(json!({ "candidates": c.analogy.candidates, "topn": c.analogy.topn }))
            }
            Stage::EvalB => {
                let questions = self.questions()?;
                let templates = match &c.analogy.template {
                    Some(p) => TemplateSet::from_file(&c.language, c.resolve(p))?,
                    None => TemplateSet::builtin(&c.language)?,
                };
                let candidates = self.template_candidates(&questions)?;
                let cfg = MethodBConfig {
                    layer: c.analogy.layer,
                    ns: c.analogy.topn.clone(),
                    ranking: self.ranking()?,
                    batch_size: c.analogy.batch_size,
                };
                let mut provider = self.provider()?;
                let results = method_b_evaluate(&mut *provider, &questions, &templates, &candidates, &cfg)?;
                let table = category_table(&results, &c.analogy.topn);
                emit_report(&table, ReportFormat::Json, create(&out.partial(0))?)?;
                emit_report(&table, ReportFormat::Tsv, create(&out.partial(1))?)?;
                Ok(json!({
                    "layer": c.analogy.layer,
                    "topn": c.analogy.topn,
                    "ranking": cfg.ranking,
                    "candidates": candidates.len(),
                    "provider": c.embed,
                }))
            }
            Stage::NerStats => {
                let map = self.label_map()?;
                let data = parse_ner(c.resolve(c.ner.data.as_ref().expect("validated")), &map)?;
                let stats = label_stats(&data.sentences);
                let mut w = create(&out.partial(0))?;
                serde_json::to_writer_pretty(
                    &mut w,
                    &json!({ "sentences": data.sentences.len(), "unmapped": data.unmapped, "stats": stats }),
                )?;
                writeln!(w)?;
                w.flush()?;
                Ok(json!({}))
            }
            Stage::NerSplit => {
                let map = self.label_map()?;
                let data = parse_ner(c.resolve(c.ner.data.as_ref().expect("validated")), &map)?;
                let spec = self.split_spec();
                let (train, test) = split(&data.sentences, &spec)?;
                save_ner(&train, out.partial(0))?;
                save_ner(&test, out.partial(1))?;
                Ok(serde_json::to_value(spec)?)
            }
        }
    }

    fn label_map(&self) -> Result<LabelMap> {
        match &self.cfg.ner.label_map {
            Some(p) => LabelMap::from_file(self.cfg.resolve(p)),
            None => Ok(LabelMap::default()),
        }
    }

    /// Dataset words, then extra vocabulary words, without repeats; or the
    /// first `candidates` vocabulary words in full-vocabulary mode.
    fn template_candidates(&self, questions: &[AnalogyQuestion]) -> Result<Vec<String>> {
        let c = &self.cfg.analogy;
        let mut words = if c.full_vocab {
            let mut v = read_vocab(self.art(a::VOCAB))?;
            v.truncate(c.candidates);
            v
        } else {
            dataset_vocabulary(questions)
        };
        if let Some(p) = &c.candidate_vocab {
            words.extend(read_vocab(self.cfg.resolve(p))?);
        }
        let mut seen = std::collections::HashSet::new();
        words.retain(|w| seen.insert(w.clone()));
        Ok(words)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Runs `stages` (all configured stages when empty) in pipeline order.
///
/// Configuration and inputs are validated for every requested stage before
/// the first one starts.
pub fn run_pipeline(cfg: &PipelineConfig, stages: &[Stage]) -> Result<PipelineRun> {
    let mut stages = if stages.is_empty() { configured_stages(cfg) } else { stages.to_vec() };
    stages.sort();
    stages.dedup();
    if stages.is_empty() {
        return Err(Error::Config("no stages configured".into()));
    }
    let runner = Runner { cfg, work: cfg.work_dir() };
    runner.validate(&stages)?;
    fs::create_dir_all(&runner.work).map_err(|e| Error::io(&runner.work, e))?;
    let mut run = PipelineRun::default();
    for &stage in &stages {
        info!("stage {stage}");
        let out = runner.outputs(stage);
        let params = runner
            .run_stage(stage)
            .map_err(|e| Error::Stage { stage: stage.to_string(), source: Box::new(e) })?;
        out.commit()?;
        let manifest = runner.write_manifest(stage, params, &runner.inputs(stage), &out.finals)?;
        run.stages.push(stage);
        run.manifests.push(manifest);
    }
    Ok(run)
}

/// Reads a manifest back as JSON.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Value> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}
