//! Command-line interface of the `embkit` binary.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::Command;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;

use crate::analogy::{
    aggregate, dataset_vocabulary, method_a_evaluate, method_b_evaluate, parse_analogy_dataset, serve_request,
    CslsConfig, EmbeddingProvider, HashMockProvider, KindTable, MethodBConfig, Ranking, RecordFileProvider,
    SubprocessProvider, TemplateSet,
};
use crate::corpus::{tokenize_file, InputFormat, Tokenizer};
use crate::dedup::{dedup_file, write_stats, DedupConfig, DedupUnit};
use crate::embstore::{average_occurrences, load_static, save_static, Layer, RecordReader};
use crate::ner::{
    aggregate_runs, compare_systems, label_stats, macro_f1, parse_ner, save_ner, split, LabelMap, NerData,
    RunScore, RunSummary, SplitSpec, SystemScores,
};
use crate::pipeline::{run_pipeline, PipelineConfig, Stage};
use crate::report::{
    analogy_by_language, analogy_by_layer, category_table, comparison_table, emit_report, kind_accuracy_from_table,
    label_stats_table, ner_systems_table, run_summary_table, ReportFormat, Table,
};
use crate::vocab::{build_vocab, count_file, default_min_count, read_vocab, write_vocab};

#[derive(Debug, Parser)]
#[command(name = "embkit", version, about = "Corpus preprocessing and word-embedding evaluation")]
pub struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output; repeat for debug messages.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Sentence segmentation and tokenization.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Near-duplicate removal over a tokenized file.
    Dedup(DedupArgs),
    /// Frequency-thresholded vocabulary.
    Vocab(VocabArgs),
    /// Static and contextual embeddings.
    #[command(subcommand)]
    Emb(EmbCmd),
    /// Word-analogy evaluation.
    #[command(subcommand)]
    Analogy(AnalogyCmd),
    /// NER datasets and scoring.
    #[command(subcommand)]
    Ner(NerCmd),
    /// Staged runs driven by a configuration file.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Subcommand)]
pub enum CorpusCmd {
    /// Writes one sentence per line, blank lines between paragraphs.
    Tokenize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "en")]
        lang: String,
        /// `raw` or `pretok`.
        #[arg(long, default_value = "raw")]
        format: InputFormat,
        /// Abbreviation table replacing the built-in one.
        #[arg(long)]
        abbreviations: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 9)]
    n: usize,
    #[arg(long, default_value_t = 0.9)]
    threshold: f64,
    /// `paragraph` or `sentence`.
    #[arg(long, default_value = "paragraph")]
    unit: DedupUnit,
    /// Write statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Defaults to the corpus-size rule (15 to 25).
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    max_size: Option<usize>,
    /// Write tokens only.
    #[arg(long)]
    no_counts: bool,
}

#[derive(Debug, Subcommand)]
pub enum EmbCmd {
    /// Averages contextual vectors over all occurrences of each token.
    Average {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        layer: Layer,
        /// Restrict to (and order by) these tokens.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        shards: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Answers a provider request with deterministic context-free vectors.
    MockProvide {
        #[arg(long = "embed-in")]
        embed_in: PathBuf,
        #[arg(long = "embed-out")]
        embed_out: PathBuf,
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Analogy questions in the `: category` text format.
    #[arg(long)]
    dataset: PathBuf,
    /// Category kinds; defaults to the first five categories semantic.
    #[arg(long)]
    kinds: Option<PathBuf>,
    /// Cutoffs, comma-separated.
    #[arg(long, default_value = "1,5", value_delimiter = ',')]
    topn: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `json`, `tsv` or `markdown`.
    #[arg(long, default_value = "tsv")]
    report: ReportFormat,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnalogyCmd {
    /// Nearest neighbours of `b - a + c` among static vectors.
    EvalA {
        #[arg(long)]
        emb: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        candidates: usize,
        #[command(flatten)]
        data: DatasetArgs,
        #[command(flatten)]
        out: ReportArgs,
    },
    /// Template substitution with contextual vectors.
    EvalB(EvalBArgs),
    /// Summarizes per-category reports (JSON) into a language/layer table.
    Table {
        /// `LANG:GROUP=report.json`, repeated.
        #[arg(long = "entry", required = true)]
        entries: Vec<String>,
        /// Cutoff to summarize.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Languages as rows (`by-language`) or layers as rows (`by-layer`).
        #[arg(long, default_value = "by-language")]
        shape: String,
        #[command(flatten)]
        out: ReportArgs,
    },
}

#[derive(Debug, Args)]
pub struct EvalBArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Provider command, run as `CMD --embed-in FILE --embed-out FILE`.
    #[arg(long, num_args = 1.., allow_hyphen_values = false, conflicts_with_all = ["records", "mock_dim"])]
    provider: Option<Vec<String>>,
    /// Precomputed records of every template sentence.
    #[arg(long, conflicts_with = "mock_dim")]
    records: Option<PathBuf>,
    /// Use the hash-seeded mock provider with this dimension.
    #[arg(long)]
    mock_dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    mock_seed: u64,
    #[arg(long, default_value = "LSTM1")]
    layer: Layer,
    #[arg(long, default_value = "en")]
    lang: String,
    /// Template file; defaults to the built-in template of `--lang`.
    #[arg(long)]
    template: Option<PathBuf>,
    /// `csls` or `cosine`.
    #[arg(long, default_value = "csls")]
    ranking: String,
    #[arg(long, default_value_t = 10)]
    csls_k: usize,
    /// Extra candidates besides the dataset's own words.
    #[arg(long)]
    candidate_vocab: Option<PathBuf>,
    /// Only the first `--candidates` words of `--candidate-vocab`, without
    /// the dataset words.
    #[arg(long)]
    full_vocab: bool,
    #[arg(long, default_value_t = 200_000)]
    candidates: usize,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[command(flatten)]
    out: ReportArgs,
}

#[derive(Debug, Subcommand)]
pub enum NerCmd {
    /// Label counts and density per dataset.
    Stats {
        /// `LANG=path`, repeated.
        #[arg(long = "data", required = true)]
        data: Vec<String>,
        #[arg(long)]
        label_map: Option<PathBuf>,
        #[command(flatten)]
        out: ReportArgs,
    },
    /// Seeded train/test split.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        label_map: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Macro-F1 of one or more prediction files.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long = "pred", required = true)]
        preds: Vec<PathBuf>,
        #[arg(long)]
        label_map: Option<PathBuf>,
        #[command(flatten)]
        out: ReportArgs,
    },
    /// Compares systems against a baseline over repeated runs.
    Compare(CompareArgs),
    /// Mean macro-F1 per language and system from `ner score --report json`
    /// summaries.
    Table {
        /// `LANG:SYSTEM=summary.json`, repeated.
        #[arg(long = "entry", required = true)]
        entries: Vec<String>,
        #[command(flatten)]
        out: ReportArgs,
    },
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    lang: String,
    /// Test file scored against.
    #[arg(long)]
    gold: PathBuf,
    /// Full dataset for the density and size covariates; defaults to `--gold`.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    label_map: Option<PathBuf>,
    /// `NAME=pred1,pred2,...`, repeated; the first is the baseline unless
    /// `--baseline` names another.
    #[arg(long = "system")]
    systems: Vec<String>,
    /// `NAME=COMMAND`, repeated. The command runs once per run with `{seed}`,
    /// `{run}` and `{out}` replaced; it must write its predictions to `{out}`.
    #[arg(long = "run")]
    run_cmds: Vec<String>,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for predictions produced by `--run` commands.
    #[arg(long, default_value = ".")]
    work_dir: PathBuf,
    #[arg(long)]
    baseline: Option<String>,
    #[command(flatten)]
    out: ReportArgs,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Configuration file; defaults to `$EMBKIT_CONFIG`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `section.key=value` overrides, repeated.
    #[arg(long = "set")]
    overrides: Vec<String>,
    /// Stages to run, comma-separated; defaults to every configured stage.
    #[arg(long, value_delimiter = ',')]
    stages: Vec<Stage>,
}

fn write_table(table: &Table, out: &ReportArgs) -> anyhow::Result<()> {
    match &out.output {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            emit_report(table, out.report, BufWriter::new(f))?;
        }
        None => emit_report(table, out.report, io::stdout().lock())?,
    }
    Ok(())
}

fn label_map(path: &Option<PathBuf>) -> anyhow::Result<LabelMap> {
    Ok(match path {
        Some(p) => LabelMap::from_file(p)?,
        None => LabelMap::default(),
    })
}

fn kinds(path: &Option<PathBuf>) -> anyhow::Result<KindTable> {
    Ok(match path {
        Some(p) => KindTable::from_file(p)?,
        None => KindTable::default(),
    })
}

/// Splits `KEY=VALUE`.
fn key_value(s: &str) -> anyhow::Result<(&str, &str)> {
    s.split_once('=').ok_or_else(|| anyhow!("expected KEY=VALUE, got '{s}'"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("parsing {}", path.display()))
}

fn run_tokenize(input: &Path, output: &Path, lang: &str, format: InputFormat, abbreviations: &Option<PathBuf>) -> anyhow::Result<()> {
    let tokenizer = match abbreviations {
        Some(p) => Tokenizer::from_table_file(lang, p)?,
        None => Tokenizer::for_language(lang),
    };
    let (tokens, report) = tokenize_file(input, format, &tokenizer, output)?;
    info!("{tokens} tokens written, {} invalid UTF-8 sequences replaced", report.replacements);
    Ok(())
}

fn run_dedup(a: &DedupArgs) -> anyhow::Result<()> {
    let cfg = DedupConfig { n: a.n, threshold: a.threshold, unit: a.unit };
    let stats = dedup_file(&a.input, &a.output, cfg)?;
    info!(
        "kept {} of {} units ({} of {} tokens)",
        stats.units_kept, stats.units_in, stats.tokens_kept, stats.tokens_in
    );
    if let Some(p) = &a.stats {
        write_stats(&stats, p)?;
    }
    Ok(())
}

fn run_vocab(a: &VocabArgs) -> anyhow::Result<()> {
    let counts = count_file(&a.input)?;
    let total: u64 = counts.values().sum();
    let min_count = a.min_count.unwrap_or_else(|| default_min_count(total));
    let entries = build_vocab(&counts, min_count, a.max_size)?;
    write_vocab(&entries, &a.output, !a.no_counts)?;
    info!("{} entries with count >= {min_count} from {total} tokens", entries.len());
    Ok(())
}

fn run_emb(cmd: &EmbCmd) -> anyhow::Result<()> {
    match cmd {
        EmbCmd::Average { records, layer, vocab, shards, output } => {
            let filter = vocab.as_ref().map(read_vocab).transpose()?;
            let emb = average_occurrences(RecordReader::open(records)?, *layer, filter.as_deref(), *shards)?;
            save_static(&emb, output)?;
            info!("{} vectors of dimension {}", emb.len(), emb.dim());
        }
        EmbCmd::MockProvide { embed_in, embed_out, dim, seed } => {
            if *dim == 0 {
                bail!("--dim must be positive");
            }
            serve_request(&mut HashMockProvider::new(*dim, *seed), embed_in, embed_out)?;
        }
    }
    Ok(())
}

fn run_eval_b(a: &EvalBArgs) -> anyhow::Result<()> {
    let questions = parse_analogy_dataset(&a.data.dataset, &kinds(&a.data.kinds)?)?;
    let templates = match &a.template {
        Some(p) => TemplateSet::from_file(&a.lang, p)?,
        None => TemplateSet::builtin(&a.lang)?,
    };
    let mut candidates = if a.full_vocab {
        let p = a.candidate_vocab.as_ref().ok_or_else(|| anyhow!("--full-vocab needs --candidate-vocab"))?;
        let mut v = read_vocab(p)?;
        v.truncate(a.candidates);
        v
    } else {
        let mut v = dataset_vocabulary(&questions);
        if let Some(p) = &a.candidate_vocab {
            v.extend(read_vocab(p)?);
        }
        v
    };
    let mut seen = std::collections::HashSet::new();
    candidates.retain(|w| seen.insert(w.clone()));
    let ranking = match a.ranking.as_str() {
        "cosine" => Ranking::Cosine,
        "csls" => Ranking::Csls(CslsConfig { k: a.csls_k }),
        other => bail!("unknown ranking '{other}'"),
    };
    let cfg = MethodBConfig { layer: a.layer, ns: a.data.topn.clone(), ranking, batch_size: a.batch_size };
    let mut provider: Box<dyn EmbeddingProvider> = if let Some(cmd) = &a.provider {
        Box::new(SubprocessProvider::new(&cmd[0], cmd[1..].to_vec()))
    } else if let Some(r) = &a.records {
        Box::new(RecordFileProvider::open(r, a.layer)?)
    } else if let Some(dim) = a.mock_dim {
        Box::new(HashMockProvider::new(dim, a.mock_seed))
    } else {
        bail!("one of --provider, --records or --mock-dim is required");
    };
    let results = method_b_evaluate(&mut *provider, &questions, &templates, &candidates, &cfg)?;
    write_table(&category_table(&results, &a.data.topn), &a.out)
}

fn run_analogy(cmd: &AnalogyCmd) -> anyhow::Result<()> {
    match cmd {
        AnalogyCmd::EvalA { emb, candidates, data, out } => {
            let emb = load_static(emb, None)?;
            let questions = parse_analogy_dataset(&data.dataset, &kinds(&data.kinds)?)?;
            let results = method_a_evaluate(&emb, &questions, *candidates, &data.topn)?;
            for n in &data.topn {
                let acc = aggregate(&results, *n);
                info!("acc@{n}: {}", crate::analogy::format_summary_row("all", &acc, 3));
            }
            write_table(&category_table(&results, &data.topn), out)
        }
        AnalogyCmd::EvalB(a) => run_eval_b(a),
        AnalogyCmd::Table { entries, n, shape, out } => {
            // language -> group -> accuracy, in first-seen order
            let mut langs: Vec<String> = Vec::new();
            let mut groups: Vec<String> = Vec::new();
            let mut cells = BTreeMap::new();
            for e in entries {
                let (key, path) = key_value(e)?;
                let (lang, group) = key.split_once(':').ok_or_else(|| anyhow!("expected LANG:GROUP=path, got '{e}'"))?;
                let table = Table::from_json(BufReader::new(File::open(path).with_context(|| format!("opening {path}"))?))?;
                let acc = kind_accuracy_from_table(&table, *n)?;
                if !langs.iter().any(|l| l == lang) {
                    langs.push(lang.to_owned());
                }
                if !groups.iter().any(|g| g == group) {
                    groups.push(group.to_owned());
                }
                cells.insert((lang.to_owned(), group.to_owned()), acc);
            }
            let get = |l: &String, g: &String| cells.get(&(l.clone(), g.clone())).copied().unwrap_or_default();
            let table = match shape.as_str() {
                "by-language" => {
                    let rows: Vec<_> = langs.iter().map(|l| (l.clone(), groups.iter().map(|g| get(l, g)).collect())).collect();
                    analogy_by_language(&groups.iter().map(String::as_str).collect::<Vec<_>>(), &rows)
                }
                "by-layer" => {
                    let rows: Vec<_> = groups.iter().map(|g| (g.clone(), langs.iter().map(|l| get(l, g)).collect())).collect();
                    analogy_by_layer(&langs.iter().map(String::as_str).collect::<Vec<_>>(), &rows)
                }
                other => bail!("unknown table shape '{other}'"),
            };
            write_table(&table, out)
        }
    }
}

fn score_runs(gold: &NerData, preds: &[PathBuf], map: &LabelMap) -> anyhow::Result<RunSummary> {
    let mut runs = Vec::with_capacity(preds.len());
    for (i, p) in preds.iter().enumerate() {
        let pred = parse_ner(p, map)?;
        let mut s: RunScore = macro_f1(&gold.sentences, &pred.sentences).with_context(|| format!("scoring {}", p.display()))?;
        s.run = i;
        runs.push(s);
    }
    Ok(aggregate_runs(&runs)?)
}

fn run_compare(a: &CompareArgs) -> anyhow::Result<()> {
    let map = label_map(&a.label_map)?;
    let gold = parse_ner(&a.gold, &map)?;
    let stats = match &a.dataset {
        Some(p) => label_stats(&parse_ner(p, &map)?.sentences),
        None => label_stats(&gold.sentences),
    };
    let mut systems: Vec<SystemScores> = Vec::new();
    for s in &a.systems {
        let (name, files) = key_value(s)?;
        let preds: Vec<PathBuf> = files.split(',').map(PathBuf::from).collect();
        systems.push(SystemScores { system: name.to_owned(), summary: score_runs(&gold, &preds, &map)? });
    }
    for r in &a.run_cmds {
        let (name, template) = key_value(r)?;
        fs::create_dir_all(&a.work_dir)?;
        let mut preds = Vec::with_capacity(a.runs);
        for run in 0..a.runs {
            let out = a.work_dir.join(format!("{name}.run{run}.pred.txt"));
            let cmd = template
                .replace("{seed}", &(a.seed + run as u64).to_string())
                .replace("{run}", &run.to_string())
                .replace("{out}", &out.to_string_lossy());
            info!("{name} run {run}: {cmd}");
            let status = Command::new("sh").arg("-c").arg(&cmd).status().with_context(|| format!("running {cmd}"))?;
            if !status.success() {
                bail!("{name} run {run} failed with {status}");
            }
            preds.push(out);
        }
        systems.push(SystemScores { system: name.to_owned(), summary: score_runs(&gold, &preds, &map)? });
    }
    if systems.len() < 2 {
        bail!("comparison needs a baseline and at least one other system");
    }
    let base_idx = match &a.baseline {
        Some(b) => systems.iter().position(|s| &s.system == b).ok_or_else(|| anyhow!("no system named '{b}'"))?,
        None => 0,
    };
    let baseline = systems.remove(base_idx);
    let rows = compare_systems(&a.lang, &stats, &baseline, &systems)?;
    write_table(&comparison_table(&rows), &a.out)
}

fn run_ner(cmd: &NerCmd) -> anyhow::Result<()> {
    match cmd {
        NerCmd::Stats { data, label_map: lm, out } => {
            let map = label_map(lm)?;
            let mut rows = Vec::new();
            for d in data {
                let (lang, path) = key_value(d)?;
                let parsed = parse_ner(path, &map)?;
                rows.push((lang.to_owned(), label_stats(&parsed.sentences)));
            }
            write_table(&label_stats_table(&rows), out)
        }
        NerCmd::Split { data, label_map: lm, seed, train_fraction, train_out, test_out } => {
            let parsed = parse_ner(data, &label_map(lm)?)?;
            let spec = SplitSpec { train_fraction: *train_fraction, seed: *seed };
            let (train, test) = split(&parsed.sentences, &spec)?;
            save_ner(&train, train_out)?;
            save_ner(&test, test_out)?;
            info!("{} train and {} test sentences (seed {seed})", train.len(), test.len());
            Ok(())
        }
        NerCmd::Score { gold, preds, label_map: lm, out } => {
            let map = label_map(lm)?;
            let summary = score_runs(&parse_ner(gold, &map)?, preds, &map)?;
            if out.report == ReportFormat::Json {
                let text = serde_json::to_string_pretty(&summary)? + "\n";
                match &out.output {
                    Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
                    None => io::stdout().lock().write_all(text.as_bytes())?,
                }
                Ok(())
            } else {
                write_table(&run_summary_table(&summary), out)
            }
        }
        NerCmd::Compare(a) => run_compare(a),
        NerCmd::Table { entries, out } => {
            let mut langs: Vec<String> = Vec::new();
            let mut systems: Vec<String> = Vec::new();
            let mut cells = BTreeMap::new();
            for e in entries {
                let (key, path) = key_value(e)?;
                let (lang, system) = key.split_once(':').ok_or_else(|| anyhow!("expected LANG:SYSTEM=path, got '{e}'"))?;
                let summary: RunSummary = read_json(Path::new(path))?;
                if !langs.iter().any(|l| l == lang) {
                    langs.push(lang.to_owned());
                }
                if !systems.iter().any(|s| s == system) {
                    systems.push(system.to_owned());
                }
                cells.insert((lang.to_owned(), system.to_owned()), summary.mean.macro_f1);
            }
            let rows: Vec<_> = langs
                .iter()
                .map(|l| (l.clone(), systems.iter().map(|s| cells.get(&(l.clone(), s.clone())).copied()).collect()))
                .collect();
            write_table(&ner_systems_table(&systems.iter().map(String::as_str).collect::<Vec<_>>(), &rows), out)
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Cmd::Corpus(CorpusCmd::Tokenize { input, output, lang, format, abbreviations }) => {
            run_tokenize(input, output, lang, *format, abbreviations)
        }
        Cmd::Dedup(a) => run_dedup(a),
        Cmd::Vocab(a) => run_vocab(a),
        Cmd::Emb(c) => run_emb(c),
        Cmd::Analogy(c) => run_analogy(c),
        Cmd::Ner(c) => run_ner(c),
        Cmd::Pipeline(a) => {
            let cfg = PipelineConfig::load(a.config.as_deref(), &a.overrides)?;
            let run = run_pipeline(&cfg, &a.stages)?;
            for (s, m) in run.stages.iter().zip(&run.manifests) {
                println!("{s}\t{}", m.display());
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_topn_list_and_layer() {
        let cli = Cli::parse_from([
            "embkit", "analogy", "eval-a", "--emb", "v.txt", "--dataset", "q.txt", "--topn", "1,5,10", "--report", "json",
        ]);
        match cli.command {
            Cmd::Analogy(AnalogyCmd::EvalA { data, out, .. }) => {
                assert_eq!(data.topn, [1, 5, 10]);
                assert_eq!(out.report, ReportFormat::Json);
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["embkit", "emb", "average", "--records", "r", "--layer", "lstm1", "--output", "o"]).is_err());
    }

    #[test]
    fn pipeline_stage_list() {
        let cli = Cli::parse_from(["embkit", "--threads", "2", "pipeline", "--stages", "tokenize,dedup", "--set", "dedup.n=5"]);
        assert_eq!(cli.threads, Some(2));
        match cli.command {
            Cmd::Pipeline(a) => {
                assert_eq!(a.stages, [Stage::Tokenize, Stage::Dedup]);
                assert_eq!(a.overrides, ["dedup.n=5"]);
            }
            other => panic!("{other:?}"),
        }
    }
}
