use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{NerLabel, NerSentence};
use crate::{Error, Result};

/// Token-level counts and scores for one class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassF1 {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl ClassF1 {
    /// Scores from counts, with 0/0 taken as 0.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let precision = ratio(tp as f64, (tp + fp) as f64);
        let recall = ratio(tp as f64, (tp + fn_) as f64);
        let f1 = ratio(2.0 * precision * recall, precision + recall);
        ClassF1 { tp, fp, fn_, precision, recall, f1 }
    }
}

/// Per-class F1 for the three entity classes and their mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub per: f64,
    pub loc: f64,
    pub org: f64,
    pub macro_f1: f64,
}

impl Scores {
    fn fields(&self) -> [f64; 4] {
        [self.per, self.loc, self.org, self.macro_f1]
    }

    fn from_fields(f: [f64; 4]) -> Self {
        Scores { per: f[0], loc: f[1], org: f[2], macro_f1: f[3] }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunScore {
    pub run: usize,
    #[serde(flatten)]
    pub scores: Scores,
}

fn check_alignment(gold: &[NerSentence], pred: &[NerSentence]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::Alignment(format!(
            "gold has {} sentences, prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Alignment(format!(
                "sentence {}: gold has {} tokens, prediction has {}",
                i + 1,
                g.len(),
                p.len()
            )));
        }
        if let Some(j) = g.tokens.iter().zip(&p.tokens).position(|(a, b)| a != b) {
            return Err(Error::Alignment(format!(
                "sentence {} token {}: gold '{}', prediction '{}'",
                i + 1,
                j + 1,
                g.tokens[j],
                p.tokens[j]
            )));
        }
    }
    Ok(())
}

/// Token-level precision, recall and F1 of PER, LOC and ORG, in that order.
pub fn class_scores(gold: &[NerSentence], pred: &[NerSentence]) -> Result<[ClassF1; 3]> {
    check_alignment(gold, pred)?;
    // [class][tp, fp, fn]
    let counts = gold
        .par_iter()
        .zip(pred)
        .map(|(g, p)| {
            let mut c = [[0u64; 3]; 3];
            for (&gl, &pl) in g.labels.iter().zip(&p.labels) {
                for (k, &class) in NerLabel::ENTITIES.iter().enumerate() {
                    match (gl == class, pl == class) {
                        (true, true) => c[k][0] += 1,
                        (false, true) => c[k][1] += 1,
                        (true, false) => c[k][2] += 1,
                        (false, false) => {}
                    }
                }
            }
            c
        })
        .reduce(
            || [[0u64; 3]; 3],
            |mut a, b| {
                for k in 0..3 {
                    for j in 0..3 {
                        a[k][j] += b[k][j];
                    }
                }
                a
            },
        );
    Ok(counts.map(|[tp, fp, fn_]| ClassF1::from_counts(tp, fp, fn_)))
}

/// Macro-F1 over PER, LOC and ORG; `O` is not scored.
pub fn macro_f1(gold: &[NerSentence], pred: &[NerSentence]) -> Result<RunScore> {
    let [per, loc, org] = class_scores(gold, pred)?.map(|c| c.f1);
    Ok(RunScore {
        run: 0,
        scores: Scores { per, loc, org, macro_f1: (per + loc + org) / 3.0 },
    })
}

/// Runs with their component-wise mean and sample standard deviation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub runs: Vec<RunScore>,
    pub mean: Scores,
    pub stddev: Scores,
}

pub fn aggregate_runs(runs: &[RunScore]) -> Result<RunSummary> {
    if runs.is_empty() {
        return Err(Error::InvalidArgument("no runs to aggregate".into()));
    }
    let n = runs.len() as f64;
    let mut mean = [0.0; 4];
    for r in runs {
        for (m, v) in mean.iter_mut().zip(r.scores.fields()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut sd = [0.0; 4];
    if runs.len() > 1 {
        for r in runs {
            for ((s, v), m) in sd.iter_mut().zip(r.scores.fields()).zip(mean) {
                *s += (v - m) * (v - m);
            }
        }
        sd.iter_mut().for_each(|s| *s = (*s / (n - 1.0)).sqrt());
    }
    Ok(RunSummary {
        runs: runs.to_vec(),
        mean: Scores::from_fields(mean),
        stddev: Scores::from_fields(sd),
    })
}

/// `(a - b) / b`, the change of `a` relative to the baseline `b`.
pub fn relative_difference(a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "relative difference needs a positive finite baseline, got a = {a}, b = {b}"
        )));
    }
    Ok((a - b) / b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use NerLabel::*;

    fn sent(labels: &[NerLabel]) -> NerSentence {
        let tokens = (0..labels.len()).map(|i| format!("t{i}")).collect();
        NerSentence::new(tokens, labels.to_vec()).unwrap()
    }

    #[test]
    fn hand_confusion_matrix() {
        let r = macro_f1(&[sent(&[Per, O, Loc])], &[sent(&[Per, O, Org])]).unwrap();
        assert_eq!((r.scores.per, r.scores.loc, r.scores.org), (1.0, 0.0, 0.0));
        assert!((r.scores.macro_f1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_all_other() {
        let g = vec![sent(&[Per, O, Loc]), sent(&[Org, O])];
        assert_eq!(macro_f1(&g, &g).unwrap().scores.macro_f1, 1.0);
        let p = vec![sent(&[O, O, O]), sent(&[O, O])];
        assert_eq!(macro_f1(&g, &p).unwrap().scores.macro_f1, 0.0);
        // an absent class scores 0 even when predictions are perfect
        let g = vec![sent(&[Per, O])];
        assert!((macro_f1(&g, &g).unwrap().scores.macro_f1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn alignment_errors_name_the_position() {
        let g = vec![sent(&[O, O])];
        let mut p = vec![NerSentence::new(vec!["t0".into(), "x".into()], vec![O, O]).unwrap()];
        let e = macro_f1(&g, &p).unwrap_err().to_string();
        assert!(e.contains("sentence 1 token 2"), "{e}");
        p = vec![sent(&[O])];
        assert!(matches!(macro_f1(&g, &p), Err(Error::Alignment(_))));
        assert!(matches!(macro_f1(&g, &[]), Err(Error::Alignment(_))));
    }

    #[test]
    fn run_aggregation() {
        let run = |i, m| RunScore { run: i, scores: Scores { per: m, loc: m, org: m, macro_f1: m } };
        let s = aggregate_runs(&[run(0, 0.8), run(1, 0.9)]).unwrap();
        assert!((s.mean.macro_f1 - 0.85).abs() < 1e-12);
        assert!((s.stddev.macro_f1 - (0.005f64).sqrt()).abs() < 1e-12);
        let s = aggregate_runs(&[run(0, 0.7)]).unwrap();
        assert_eq!((s.mean.macro_f1, s.stddev.macro_f1), (0.7, 0.0));
        let s = aggregate_runs(&[run(0, 0.6); 5]).unwrap();
        assert!((s.mean.per - 0.6).abs() < 1e-15);
        assert!(s.stddev.per.abs() < 1e-15);
        assert!(aggregate_runs(&[]).is_err());
    }

    #[test]
    fn relative_differences() {
        assert!((relative_difference(0.82, 0.62).unwrap() - 0.3226).abs() < 5e-5);
        assert!((relative_difference(0.91, 0.89).unwrap() - 0.0225).abs() < 5e-5);
        assert_eq!(relative_difference(0.5, 0.5).unwrap(), 0.0);
        assert!(relative_difference(0.5, 0.0).is_err());
    }

    fn label() -> impl Strategy<Value = NerLabel> {
        prop_oneof![Just(Per), Just(Loc), Just(Org), Just(O)]
    }

    proptest! {
        #[test]
        fn symmetric_under_class_permutation(
            pairs in prop::collection::vec((label(), label()), 1..20),
            perm in Just([Per, Loc, Org]).prop_shuffle(),
        ) {
            let relabel = |l: NerLabel| match l {
                Per => perm[0],
                Loc => perm[1],
                Org => perm[2],
                O => O,
            };
            let g = vec![sent(&pairs.iter().map(|p| p.0).collect::<Vec<_>>())];
            let p = vec![sent(&pairs.iter().map(|p| p.1).collect::<Vec<_>>())];
            let g2 = vec![sent(&pairs.iter().map(|p| relabel(p.0)).collect::<Vec<_>>())];
            let p2 = vec![sent(&pairs.iter().map(|p| relabel(p.1)).collect::<Vec<_>>())];
            let a = macro_f1(&g, &p).unwrap().scores.macro_f1;
            let b = macro_f1(&g2, &p2).unwrap().scores.macro_f1;
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
