use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embstore::Layer;
use crate::{Error, Result};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "EMBKIT_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    pub input: Option<PathBuf>,
    /// `raw` or `pretok`.
    pub format: String,
    /// Abbreviation table replacing the built-in one.
    pub abbreviations: Option<PathBuf>,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection { input: None, format: "raw".into(), abbreviations: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DedupSection {
    pub n: usize,
    pub threshold: f64,
    /// `paragraph` or `sentence`.
    pub unit: String,
}

impl Default for DedupSection {
    fn default() -> Self {
        DedupSection { n: 9, threshold: 0.9, unit: "paragraph".into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VocabSection {
    /// Defaults to the corpus-size rule.
    pub min_count: Option<u64>,
    pub max_size: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedSection {
    /// `mock` or `command`.
    pub provider: Option<String>,
    /// Program and leading arguments for the `command` provider.
    pub command: Vec<String>,
    pub dim: usize,
    pub seed: u64,
}

impl Default for EmbedSection {
    fn default() -> Self {
        EmbedSection { provider: None, command: Vec::new(), dim: 16, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AverageSection {
    /// Precomputed records; defaults to the embed stage's output.
    pub records: Option<PathBuf>,
    pub layer: Layer,
    pub shards: usize,
}

impl Default for AverageSection {
    fn default() -> Self {
        AverageSection { records: None, layer: Layer::Lstm1, shards: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalogySection {
    pub dataset: Option<PathBuf>,
    /// Category kind table; defaults to the first five categories semantic.
    pub kinds: Option<PathBuf>,
    pub candidates: usize,
    pub topn: Vec<usize>,
    pub template: Option<PathBuf>,
    /// `csls` or `cosine`.
    pub ranking: String,
    pub csls_k: usize,
    pub layer: Layer,
    /// Extra candidate words for the template method.
    pub candidate_vocab: Option<PathBuf>,
    /// Use the first `candidates` vocabulary words as template candidates.
    pub full_vocab: bool,
    pub batch_size: usize,
}

impl Default for AnalogySection {
    fn default() -> Self {
        AnalogySection {
            dataset: None,
            kinds: None,
            candidates: 200_000,
            topn: vec![1, 5],
            template: None,
            ranking: "csls".into(),
            csls_k: 10,
            layer: Layer::Lstm1,
            candidate_vocab: None,
            full_vocab: false,
            batch_size: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NerSection {
    pub data: Option<PathBuf>,
    pub label_map: Option<PathBuf>,
    pub seed: u64,
    pub train_fraction: f64,
    pub runs: usize,
}

impl Default for NerSection {
    fn default() -> Self {
        NerSection { data: None, label_map: None, seed: 0, train_fraction: 0.9, runs: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub language: String,
    pub work_dir: PathBuf,
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub dedup: DedupSection,
    #[serde(default)]
    pub vocab: VocabSection,
    #[serde(default)]
    pub embed: EmbedSection,
    #[serde(default)]
    pub average: AverageSection,
    #[serde(default)]
    pub analogy: AnalogySection,
    #[serde(default)]
    pub ner: NerSection,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Sets `section.key` (or a top-level `key`) in a parsed document. The value
/// is read as a TOML value, falling back to a plain string.
fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_owned()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    match parts[..] {
        [k] => {
            doc.insert(k.to_owned(), value);
        }
        [section, k] => {
            let entry = doc
                .entry(section.to_owned())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let table = entry
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("'{section}' is not a section")))?;
            table.insert(k.to_owned(), value);
        }
        _ => return Err(Error::Config(format!("override key '{key}' must be key or section.key"))),
    }
    Ok(())
}

impl PipelineConfig {
    /// Parses configuration text, then applies `section.key=value` overrides.
    pub fn parse(text: &str, overrides: &[String], base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg: PipelineConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    /// Loads `path`, or the file named by [`CONFIG_ENV`] when `path` is `None`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let path = match path {
            Some(p) => p.to_path_buf(),
            None => env::var_os(CONFIG_ENV)
                .map(PathBuf::from)
                .ok_or_else(|| Error::Config(format!("no configuration file given and {CONFIG_ENV} is not set")))?,
        };
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, overrides, base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn work_dir(&self) -> PathBuf {
        self.resolve(&self.work_dir)
    }
}
