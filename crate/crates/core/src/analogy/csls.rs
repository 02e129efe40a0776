//! Cross-domain similarity local scaling.
//!
//! `CSLS(q, y) = 2 cos(q, y) - r(q) - r(y)`, where `r(q)` is the mean cosine
//! of `q` to its `K` nearest candidates and `r(y)` the mean cosine of
//! candidate `y` to its `K` nearest queries. With a single query the query
//! neighbourhood of every candidate is that query, so `r(y) = cos(y, q)`.
//! Rankings are by descending score with ties broken by candidate index.

use serde::{Deserialize, Serialize};

use crate::embstore::cosine;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CslsConfig {
    /// Neighbourhood size.
    pub k: usize,
}

impl Default for CslsConfig {
    fn default() -> Self {
        CslsConfig { k: 10 }
    }
}

impl CslsConfig {
    /// Requires `1 <= k <= candidates - 1`.
    pub fn validate(&self, candidates: usize) -> Result<()> {
        if self.k < 1 || self.k + 1 > candidates {
            return Err(Error::InvalidArgument(format!(
                "CSLS neighbourhood size {} invalid for {candidates} candidates",
                self.k
            )));
        }
        Ok(())
    }
}

/// Mean of the `k` largest values.
fn mean_top_k(values: &mut [f64], k: usize) -> f64 {
    let k = k.min(values.len());
    if k == 0 {
        return 0.0;
    }
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    values[..k].iter().sum::<f64>() / k as f64
}

fn ranked(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// CSLS scores of every candidate for `query`, with neighbourhoods of the
/// candidates taken over `query_set`.
pub fn csls_scores_with_queries<Q, C>(query: &[f32], query_set: &[Q], candidates: &[C], cfg: &CslsConfig) -> Result<Vec<f64>>
where
    Q: AsRef<[f32]>,
    C: AsRef<[f32]>,
{
    cfg.validate(candidates.len())?;
    if query_set.is_empty() {
        return Err(Error::InvalidArgument("CSLS query set is empty".into()));
    }
    let sims: Vec<f64> = candidates
        .iter()
        .map(|y| cosine(query, y.as_ref()))
        .collect::<Result<_>>()?;
    let r_q = mean_top_k(&mut sims.clone(), cfg.k);
    let mut scores = Vec::with_capacity(candidates.len());
    let mut buf = Vec::with_capacity(query_set.len());
    for (y, &s) in candidates.iter().zip(&sims) {
        buf.clear();
        for q2 in query_set {
            buf.push(cosine(y.as_ref(), q2.as_ref())?);
        }
        let r_y = mean_top_k(&mut buf, cfg.k);
        scores.push(2.0 * s - r_q - r_y);
    }
    Ok(scores)
}

/// CSLS scores for a lone query from its cosine similarities to the
/// candidates.
pub fn csls_scores_single_query(sims: &[f64], cfg: &CslsConfig) -> Result<Vec<f64>> {
    cfg.validate(sims.len())?;
    let r_q = mean_top_k(&mut sims.to_vec(), cfg.k);
    Ok(sims.iter().map(|&s| 2.0 * s - r_q - s).collect())
}

/// Candidate indices ranked by CSLS for a lone query.
pub fn csls_rank<C: AsRef<[f32]>>(query: &[f32], candidates: &[C], cfg: &CslsConfig) -> Result<Vec<usize>> {
    csls_rank_with_queries(query, &[query], candidates, cfg)
}

/// Candidate indices ranked by CSLS, with candidate neighbourhoods taken over
/// `query_set`.
pub fn csls_rank_with_queries<Q, C>(query: &[f32], query_set: &[Q], candidates: &[C], cfg: &CslsConfig) -> Result<Vec<usize>>
where
    Q: AsRef<[f32]>,
    C: AsRef<[f32]>,
{
    Ok(ranked(&csls_scores_with_queries(query, query_set, candidates, cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cands(v: &[[f32; 2]]) -> Vec<Vec<f32>> {
        v.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn k_range() {
        let c = cands(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        assert!(csls_rank(&[1.0, 0.0], &c, &CslsConfig { k: 0 }).is_err());
        assert!(csls_rank(&[1.0, 0.0], &c, &CslsConfig { k: 3 }).is_err());
        assert!(csls_rank(&[1.0, 0.0], &c, &CslsConfig { k: 2 }).is_ok());
    }

    #[test]
    fn hand_computed_two_queries() {
        // candidates y0=(1,0), y1=(0,1), y2=(1,1); query q=(1,0); query set {q, p=(0,1)}; K=1.
        // cos(q,y) = 1, 0, 1/√2; r(q) = 1.
        // r(y0) = max(cos(y0,q), cos(y0,p)) = 1; r(y1) = 1; r(y2) = 1/√2.
        // CSLS: y0 = 2 - 1 - 1 = 0; y1 = 0 - 1 - 1 = -2; y2 = √2 - 1 - 1/√2 = 1/√2 - 1 ≈ -0.293.
        let c = cands(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let qs = cands(&[[1.0, 0.0], [0.0, 1.0]]);
        let s = csls_scores_with_queries(&[1.0, 0.0], &qs, &c, &CslsConfig { k: 1 }).unwrap();
        assert!((s[0] - 0.0).abs() < 1e-12);
        assert!((s[1] + 2.0).abs() < 1e-12);
        assert!((s[2] - (std::f64::consts::FRAC_1_SQRT_2 - 1.0)).abs() < 1e-7);
        assert_eq!(csls_rank_with_queries(&[1.0, 0.0], &qs, &c, &CslsConfig { k: 1 }).unwrap(), [0, 2, 1]);
    }

    #[test]
    fn duplicate_candidates_rank_adjacent_by_index() {
        let c = cands(&[[0.0, 1.0], [1.0, 0.2], [1.0, 0.2], [-1.0, 0.0]]);
        let r = csls_rank(&[1.0, 0.0], &c, &CslsConfig { k: 2 }).unwrap();
        assert_eq!(&r[..2], &[1, 2]);
    }

    #[test]
    fn single_query_matches_general_route() {
        let c = cands(&[[0.3, 1.0], [1.0, 0.2], [-0.5, 0.7], [0.9, -0.4]]);
        let q = [0.8f32, 0.1];
        let sims: Vec<f64> = c.iter().map(|y| cosine(&q, y).unwrap()).collect();
        let a = csls_scores_single_query(&sims, &CslsConfig { k: 2 }).unwrap();
        let b = csls_scores_with_queries(&q, &[q], &c, &CslsConfig { k: 2 }).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    proptest! {
        // With identical candidate neighbourhood terms CSLS orders like cosine.
        #[test]
        fn single_query_ranking_equals_cosine_ranking(
            q in prop::collection::vec(-1.0f32..1.0, 3),
            c in prop::collection::vec(prop::collection::vec(-1.0f32..1.0, 3), 3..10),
            k in 1usize..3,
        ) {
            prop_assume!(q.iter().any(|x| x.abs() > 1e-2));
            prop_assume!(c.iter().all(|y| y.iter().any(|x| x.abs() > 1e-2)));
            let sims: Vec<f64> = c.iter().map(|y| cosine(&q, y).unwrap()).collect();
            let by_cos = ranked(&sims);
            let by_csls = csls_rank(&q, &c, &CslsConfig { k }).unwrap();
            // compare orders only where cosines are separated
            for w in by_cos.windows(2) {
                if (sims[w[0]] - sims[w[1]]).abs() > 1e-9 {
                    let p0 = by_csls.iter().position(|&i| i == w[0]).unwrap();
                    let p1 = by_csls.iter().position(|&i| i == w[1]).unwrap();
                    prop_assert!(p0 < p1);
                }
            }
        }

        #[test]
        fn shifting_all_scores_keeps_rank(
            s in prop::collection::vec(-2.0f64..2.0, 1..12),
            shift in -5.0f64..5.0,
        ) {
            let shifted: Vec<f64> = s.iter().map(|x| x + shift).collect();
            let a = ranked(&s);
            let b = ranked(&shifted);
            for w in a.windows(2) {
                if (s[w[0]] - s[w[1]]).abs() > 1e-9 {
                    let p0 = b.iter().position(|&i| i == w[0]).unwrap();
                    let p1 = b.iter().position(|&i| i == w[1]).unwrap();
                    prop_assert!(p0 < p1);
                }
            }
        }
    }
}
