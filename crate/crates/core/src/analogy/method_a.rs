use log::warn;
use rayon::prelude::*;

use super::ranking::{analogy_query, rank_of, top_n, NormalizedRows};
use super::{collect_results, AnalogyQuestion, CategoryResult, Outcome};
use crate::embstore::StaticEmbeddings;
use crate::{Error, Result};

fn candidate_rows(emb: &StaticEmbeddings, candidate_limit: usize) -> Result<(usize, NormalizedRows)> {
    if candidate_limit == 0 {
        return Err(Error::InvalidArgument("candidate set is empty".into()));
    }
    let limit = if candidate_limit > emb.len() {
        warn!(
            "candidate limit {candidate_limit} exceeds vocabulary size {}, using all words",
            emb.len()
        );
        emb.len()
    } else {
        candidate_limit
    };
    let rows = NormalizedRows::from_rows((0..limit).map(|i| emb.row(i)), emb.dim());
    Ok((limit, rows))
}

/// Evaluates questions against the first `candidate_limit` words of `emb`.
///
/// The query `b - a + c` is compared by cosine similarity with every
/// candidate except `a`, `b` and `c`; a question scores a hit at `n` when
/// `d` ranks among the best `n`. Questions with a word outside the candidate
/// set are skipped.
pub fn method_a_evaluate(
    emb: &StaticEmbeddings,
    questions: &[AnalogyQuestion],
    candidate_limit: usize,
    ns: &[usize],
) -> Result<Vec<CategoryResult>> {
    let (limit, rows) = candidate_rows(emb, candidate_limit)?;
    let lookup = |w: &str| emb.index_of(w).filter(|&i| i < limit);
    let outcomes: Vec<Outcome> = questions
        .par_iter()
        .map(|q| {
            let [Some(a), Some(b), Some(c), Some(d)] = q.words().map(lookup) else {
                return Outcome::Skipped;
            };
            let query = analogy_query(emb.row(a), emb.row(b), emb.row(c));
            let scores = rows.scores(&query);
            Outcome::Ranked(rank_of(&scores, d, &[a, b, c]))
        })
        .collect();
    Ok(collect_results(questions, &outcomes, ns))
}

/// The `n` best answers to `a : b :: c : ?` with their cosine similarities.
pub fn method_a_answer(
    emb: &StaticEmbeddings,
    a: &str,
    b: &str,
    c: &str,
    candidate_limit: usize,
    n: usize,
) -> Result<Vec<(String, f64)>> {
    let (_, rows) = candidate_rows(emb, candidate_limit)?;
    let idx = |w: &str| {
        emb.index_of(w)
            .ok_or_else(|| Error::InvalidArgument(format!("'{w}' is not in the vocabulary")))
    };
    let (ia, ib, ic) = (idx(a)?, idx(b)?, idx(c)?);
    let query = analogy_query(emb.row(ia), emb.row(ib), emb.row(ic));
    let scores = rows.scores(&query);
    Ok(top_n(&scores, n, &[ia, ib, ic])
        .into_iter()
        .map(|i| (emb.word(i).to_owned(), scores[i]))
        .collect())
}
