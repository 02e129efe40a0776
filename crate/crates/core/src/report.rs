//! Result tables rendered as JSON, TSV or Markdown.
//!
//! Every report is a [`Table`] with a fixed column order. JSON keeps full
//! precision and parses back with [`Table::from_json`]; TSV and Markdown
//! round numbers to the table's `decimals`. Missing values render as `N/A`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analogy::{CategoryResult, KindAccuracy};
use crate::ner::{ComparisonRow, LabelStats, RunSummary, Scores};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Missing,
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self, decimals: usize) -> String {
        match self {
            Cell::Missing => "N/A".to_owned(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.decimals$}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Decimal places for TSV and Markdown.
    pub decimals: usize,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>, decimals: usize) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            decimals,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let t: Table = serde_json::from_reader(reader)?;
        if let Some(r) = t.rows.iter().find(|r| r.len() != t.columns.len()) {
            return Err(Error::InvalidArgument(format!(
                "report row has {} cells for {} columns",
                r.len(),
                t.columns.len()
            )));
        }
        Ok(t)
    }

    fn to_tsv(&self) -> String {
        let mut s = self.columns.join("\t");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| c.render(self.decimals)).collect();
            s.push_str(&cells.join("\t"));
            s.push('\n');
        }
        s
    }

    fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "| {} |", self.columns.join(" | "));
        let align: Vec<&str> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let numeric = !self.rows.is_empty()
                    && self.rows.iter().all(|r| !matches!(r[i], Cell::Text(_)));
                if numeric { "---:" } else { "---" }
            })
            .collect();
        let _ = writeln!(s, "|{}|", align.join("|"));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| c.render(self.decimals)).collect();
            let _ = writeln!(s, "| {} |", cells.join(" | "));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Tsv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "tsv" => Ok(ReportFormat::Tsv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(Error::InvalidArgument(format!("unknown report format '{s}'"))),
        }
    }
}

pub fn emit_report<W: Write>(table: &Table, format: ReportFormat, mut out: W) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, table)?;
            writeln!(out)?;
        }
        ReportFormat::Tsv => out.write_all(table.to_tsv().as_bytes())?,
        ReportFormat::Markdown => out.write_all(table.to_markdown().as_bytes())?,
    }
    out.flush()?;
    Ok(())
}

pub fn write_report(table: &Table, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    emit_report(table, format, BufWriter::new(file))
}

/// Per-category counts and accuracy at each cutoff.
pub fn category_table(results: &[CategoryResult], ns: &[usize]) -> Table {
    let mut cols: Vec<String> = ["category", "kind", "asked", "skipped_oov", "answered"]
        .map(String::from)
        .to_vec();
    cols.extend(ns.iter().map(|n| format!("acc@{n}")));
    let mut t = Table::new(cols, 3);
    for r in results {
        let mut row: Vec<Cell> = vec![
            r.category.as_str().into(),
            r.kind.to_string().into(),
            r.asked.into(),
            r.skipped_oov.into(),
            r.answered().into(),
        ];
        row.extend(ns.iter().map(|&n| Cell::from(r.accuracy(n))));
        t.push(row);
    }
    t
}

/// Languages as rows, each group (usually a layer) as a sem/syn column pair.
pub fn analogy_by_language(groups: &[&str], rows: &[(String, Vec<KindAccuracy>)]) -> Table {
    let mut cols = vec!["language".to_owned()];
    for g in groups {
        cols.push(format!("{g} sem"));
        cols.push(format!("{g} syn"));
    }
    let mut t = Table::new(cols, 2);
    for (lang, accs) in rows {
        let mut row: Vec<Cell> = vec![lang.as_str().into()];
        for i in 0..groups.len() {
            let a = accs.get(i).copied().unwrap_or_default();
            row.push(a.semantic.into());
            row.push(a.syntactic.into());
        }
        t.push(row);
    }
    t
}

/// Each group (usually a layer) as a semantic and a syntactic row, languages
/// as columns.
pub fn analogy_by_layer(languages: &[&str], groups: &[(String, Vec<KindAccuracy>)]) -> Table {
    let mut cols = vec!["layer".to_owned(), "category".to_owned()];
    cols.extend(languages.iter().map(|l| l.to_string()));
    let mut t = Table::new(cols, 3);
    for (group, accs) in groups {
        for kind in ["semantic", "syntactic"] {
            let mut row: Vec<Cell> = vec![group.as_str().into(), kind.into()];
            for i in 0..languages.len() {
                let a = accs.get(i).copied().unwrap_or_default();
                row.push(if kind == "semantic" { a.semantic } else { a.syntactic }.into());
            }
            t.push(row);
        }
    }
    t
}

/// Entity counts, density and size per dataset.
pub fn label_stats_table(rows: &[(String, LabelStats)]) -> Table {
    let mut t = Table::new(["language", "PER", "LOC", "ORG", "density", "N"], 3);
    for (lang, s) in rows {
        t.push(vec![
            lang.as_str().into(),
            s.per.into(),
            s.loc.into(),
            s.org.into(),
            s.density.into(),
            s.n.into(),
        ]);
    }
    t
}

/// Mean macro-F1 per language and system; `None` marks a missing system.
pub fn ner_systems_table(systems: &[&str], rows: &[(String, Vec<Option<f64>>)]) -> Table {
    let mut cols = vec!["language".to_owned()];
    cols.extend(systems.iter().map(|s| s.to_string()));
    let mut t = Table::new(cols, 2);
    for (lang, scores) in rows {
        let mut row: Vec<Cell> = vec![lang.as_str().into()];
        row.extend((0..systems.len()).map(|i| Cell::from(scores.get(i).copied().flatten())));
        t.push(row);
    }
    t
}

fn score_cells(s: &Scores) -> [Cell; 4] {
    [s.per.into(), s.loc.into(), s.org.into(), s.macro_f1.into()]
}

/// Every run, then the mean and sample standard deviation.
pub fn run_summary_table(summary: &RunSummary) -> Table {
    let mut t = Table::new(["run", "PER", "LOC", "ORG", "macro_f1"], 4);
    for r in &summary.runs {
        let mut row = vec![Cell::Text(r.run.to_string())];
        row.extend(score_cells(&r.scores));
        t.push(row);
    }
    if !summary.runs.is_empty() {
        for (label, s) in [("mean", &summary.mean), ("stddev", &summary.stddev)] {
            let mut row = vec![Cell::from(label)];
            row.extend(score_cells(s));
            t.push(row);
        }
    }
    t
}

pub fn comparison_table(rows: &[ComparisonRow]) -> Table {
    let mut t = Table::new(
        [
            "language",
            "system",
            "baseline",
            "macro_f1",
            "baseline_macro_f1",
            "relative_difference",
            "density",
            "size",
        ],
        4,
    );
    for r in rows {
        t.push(vec![
            r.language.as_str().into(),
            r.system.as_str().into(),
            r.baseline.as_str().into(),
            r.macro_f1.into(),
            r.baseline_macro_f1.into(),
            r.relative_difference.into(),
            r.density.into(),
            r.size.into(),
        ]);
    }
    t
}

/// Per-kind mean of the `acc@n` column of a [`category_table`].
pub fn kind_accuracy_from_table(table: &Table, n: usize) -> Result<KindAccuracy> {
    let col = |name: &str| {
        table
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("report has no '{name}' column")))
    };
    let (kind_col, acc_col) = (col("kind")?, col(&format!("acc@{n}"))?);
    let mut sums = [(0.0, 0usize); 2];
    for row in &table.rows {
        let slot = match &row[kind_col] {
            Cell::Text(k) if k == "semantic" => 0,
            Cell::Text(k) if k == "syntactic" => 1,
            other => return Err(Error::InvalidArgument(format!("unexpected kind cell {other:?}"))),
        };
        let v = match row[acc_col] {
            Cell::Float(v) => v,
            Cell::Int(v) => v as f64,
            ref other => return Err(Error::InvalidArgument(format!("unexpected accuracy cell {other:?}"))),
        };
        sums[slot].0 += v;
        sums[slot].1 += 1;
    }
    let mean = |(s, c): (f64, usize)| (c > 0).then(|| s / c as f64);
    Ok(KindAccuracy { semantic: mean(sums[0]), syntactic: mean(sums[1]) })
}
