//! Word-analogy evaluation.
//!
//! Two methods are provided:
//!
//! * [`method_a_evaluate`] ranks static vectors (for example occurrence
//!   averages) by cosine similarity to `b - a + c`.
//! * [`method_b_evaluate`] places the four words in a template sentence,
//!   embeds it with an [`EmbeddingProvider`], substitutes every candidate in
//!   the last slot and ranks the candidates' contextual vectors by cosine or
//!   CSLS.
//!
//! In both methods the three query words are never candidates, and
//! questions whose words are missing from the candidate set are counted as
//! skipped rather than as misses.

mod csls;
mod dataset;
mod method_a;
mod method_b;
mod provider;
mod ranking;
mod template;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use csls::{csls_rank, csls_rank_with_queries, csls_scores_single_query, csls_scores_with_queries, CslsConfig};
pub use dataset::{dataset_vocabulary, parse_analogy_dataset, read_analogy_dataset, KindTable};
pub use method_a::{method_a_answer, method_a_evaluate};
pub use method_b::{method_b_evaluate, MethodBConfig, Ranking};
pub use provider::{
    serve_request, EmbeddingProvider, HashMockProvider, RecordFileProvider, StaticProvider,
    SubprocessProvider,
};
pub use ranking::{analogy_query, dot, normalize, rank_of, top_n, NormalizedRows};
pub use template::{build_template_sentence, TemplateSentence, TemplateSet, TemplateSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Semantic,
    Syntactic,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Semantic => "semantic",
            Kind::Syntactic => "syntactic",
        })
    }
}

/// `a : b :: c : d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub category: String,
    pub kind: Kind,
}

impl AnalogyQuestion {
    pub fn words(&self) -> [&str; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }
}

/// Per-category hit counts at each requested cutoff.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryResult {
    pub category: String,
    pub kind: Kind,
    pub asked: usize,
    pub skipped_oov: usize,
    pub hits: BTreeMap<usize, usize>,
}

impl CategoryResult {
    pub fn new(category: &str, kind: Kind, ns: &[usize]) -> Self {
        CategoryResult {
            category: category.to_owned(),
            kind,
            asked: 0,
            skipped_oov: 0,
            hits: ns.iter().map(|&n| (n, 0)).collect(),
        }
    }

    pub fn answered(&self) -> usize {
        self.asked - self.skipped_oov
    }

    /// `hits@n / answered`, 0 when nothing was answered.
    pub fn accuracy(&self, n: usize) -> f64 {
        let answered = self.answered();
        if answered == 0 {
            return 0.0;
        }
        self.hits.get(&n).copied().unwrap_or(0) as f64 / answered as f64
    }
}

/// Outcome of one question: skipped, or the 0-based rank of the expected
/// answer among the candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Skipped,
    Ranked(usize),
}

/// Folds per-question outcomes into category results, in order of first
/// appearance of each category.
pub(crate) fn collect_results(questions: &[AnalogyQuestion], outcomes: &[Outcome], ns: &[usize]) -> Vec<CategoryResult> {
    let mut results: Vec<CategoryResult> = Vec::new();
    for (q, o) in questions.iter().zip(outcomes) {
        let r = match results.iter_mut().position(|r| r.category == q.category) {
            Some(i) => &mut results[i],
            None => {
                results.push(CategoryResult::new(&q.category, q.kind, ns));
                results.last_mut().unwrap()
            }
        };
        r.asked += 1;
        match *o {
            Outcome::Skipped => r.skipped_oov += 1,
            Outcome::Ranked(rank) => {
                for (&n, h) in r.hits.iter_mut() {
                    if rank < n {
                        *h += 1;
                    }
                }
            }
        }
    }
    results
}

/// Mean per-category accuracy within each kind; `None` for a kind without
/// categories.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KindAccuracy {
    pub semantic: Option<f64>,
    pub syntactic: Option<f64>,
}

/// Averages accuracy@n over categories first, then over categories of the
/// same kind, so every category has equal weight.
pub fn aggregate(results: &[CategoryResult], n: usize) -> KindAccuracy {
    let mean = |kind: Kind| {
        let accs: Vec<f64> = results
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.accuracy(n))
            .collect();
        (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
    };
    KindAccuracy {
        semantic: mean(Kind::Semantic),
        syntactic: mean(Kind::Syntactic),
    }
}

/// One-line summary such as `sl | sem 0.41 | syn 0.79`.
pub fn format_summary_row(label: &str, acc: &KindAccuracy, decimals: usize) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "N/A".to_owned(), |v| format!("{v:.decimals$}"));
    format!("{label} | sem {} | syn {}", cell(acc.semantic), cell(acc.syntactic))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(cat: &str, kind: Kind, asked: usize, skipped: usize, hits1: usize) -> CategoryResult {
        CategoryResult {
            category: cat.into(),
            kind,
            asked,
            skipped_oov: skipped,
            hits: [(1, hits1)].into_iter().collect(),
        }
    }

    #[test]
    fn unweighted_mean_over_categories() {
        let rs = vec![
            result("s1", Kind::Syntactic, 10, 0, 2),
            result("s2", Kind::Syntactic, 100, 50, 20),
        ];
        let agg = aggregate(&rs, 1);
        assert!((agg.syntactic.unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(agg.semantic, None);
    }

    #[test]
    fn single_category() {
        let rs = vec![result("c", Kind::Semantic, 4, 0, 1)];
        assert_eq!(aggregate(&rs, 1).semantic, Some(0.25));
    }

    #[test]
    fn zero_answered_is_zero_accuracy() {
        assert_eq!(result("c", Kind::Semantic, 3, 3, 0).accuracy(1), 0.0);
    }

    #[test]
    fn summary_row_layout() {
        let acc = KindAccuracy { semantic: Some(0.41), syntactic: Some(0.79) };
        assert_eq!(format_summary_row("sl", &acc, 2), "sl | sem 0.41 | syn 0.79");
    }

    #[test]
    fn outcomes_fold_per_category() {
        let q = |cat: &str| AnalogyQuestion {
            a: "a".into(),
            b: "b".into(),
            c: "c".into(),
            d: "d".into(),
            category: cat.into(),
            kind: Kind::Semantic,
        };
        let qs = vec![q("x"), q("y"), q("x"), q("x")];
        let os = [Outcome::Ranked(0), Outcome::Ranked(3), Outcome::Skipped, Outcome::Ranked(4)];
        let rs = collect_results(&qs, &os, &[1, 5]);
        assert_eq!(rs.len(), 2);
        assert_eq!((rs[0].asked, rs[0].skipped_oov), (3, 1));
        assert_eq!(rs[0].hits[&1], 1);
        assert_eq!(rs[0].hits[&5], 2);
        assert_eq!(rs[1].hits[&5], 1);
    }
}
