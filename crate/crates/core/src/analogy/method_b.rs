use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::csls::{csls_scores_single_query, CslsConfig};
use super::provider::EmbeddingProvider;
use super::ranking::{analogy_query, rank_of, NormalizedRows};
use super::template::TemplateSet;
use super::{collect_results, AnalogyQuestion, CategoryResult, Outcome};
use crate::embstore::Layer;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Ranking {
    Cosine,
    Csls(CslsConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodBConfig {
    pub layer: Layer,
    pub ns: Vec<usize>,
    pub ranking: Ranking,
    /// Sentences per provider call.
    pub batch_size: usize,
}

impl Default for MethodBConfig {
    fn default() -> Self {
        MethodBConfig {
            layer: Layer::Lstm2,
            ns: vec![1, 5],
            ranking: Ranking::Csls(CslsConfig::default()),
            batch_size: 256,
        }
    }
}

fn check_shape(sentences: &[Vec<String>], out: &[Vec<Vec<f32>>], dim: &mut Option<usize>) -> Result<()> {
    if out.len() != sentences.len() {
        return Err(Error::Protocol(format!(
            "requested {} sentences, provider returned {}",
            sentences.len(),
            out.len()
        )));
    }
    for (i, (s, v)) in sentences.iter().zip(out).enumerate() {
        if s.len() != v.len() {
            return Err(Error::Protocol(format!(
                "sentence {i}: {} tokens, provider returned {} vectors",
                s.len(),
                v.len()
            )));
        }
        for x in v {
            let d = *dim.get_or_insert(x.len());
            if x.len() != d || d == 0 {
                return Err(Error::Protocol(format!(
                    "sentence {i}: vector of dimension {}, expected {d}",
                    x.len()
                )));
            }
        }
    }
    Ok(())
}

/// Embeds `sentences` in batches, returning the vector at `slot` of each.
fn slot_vectors<P: EmbeddingProvider + ?Sized>(
    provider: &mut P,
    sentences: Vec<Vec<String>>,
    slot: usize,
    cfg: &MethodBConfig,
    dim: &mut Option<usize>,
) -> Result<Vec<Vec<f32>>> {
    let mut out = Vec::with_capacity(sentences.len());
    for batch in sentences.chunks(cfg.batch_size.max(1)) {
        let vecs = provider.embed(batch, cfg.layer)?;
        check_shape(batch, &vecs, dim)?;
        out.extend(vecs.into_iter().map(|mut v| v.swap_remove(slot)));
    }
    Ok(out)
}

fn rank_question<P: EmbeddingProvider + ?Sized>(
    provider: &mut P,
    q: &AnalogyQuestion,
    templates: &TemplateSet,
    candidates: &[String],
    cfg: &MethodBConfig,
) -> Result<Outcome> {
    let pool: Vec<&String> = candidates
        .iter()
        .filter(|w| **w != q.a && **w != q.b && **w != q.c)
        .collect();
    let Some(target) = pool.iter().position(|w| **w == q.d) else {
        return Ok(Outcome::Skipped);
    };
    let filled = templates.for_category(&q.category).build(q)?;
    let mut dim = None;

    let context = provider.embed(std::slice::from_ref(&filled.tokens), cfg.layer)?;
    check_shape(std::slice::from_ref(&filled.tokens), &context, &mut dim)?;
    let ctx = &context[0];
    let query = analogy_query(&ctx[filled.slots[0]], &ctx[filled.slots[1]], &ctx[filled.slots[2]]);

    let sentences: Vec<Vec<String>> = pool.iter().map(|w| filled.with_d(w)).collect();
    let d_vectors = slot_vectors(provider, sentences, filled.d_index(), cfg, &mut dim)?;
    let rows = NormalizedRows::from_rows(d_vectors.iter().map(Vec::as_slice), dim.unwrap_or(0));
    let sims = rows.scores(&query);
    let scores = match cfg.ranking {
        Ranking::Cosine => sims,
        Ranking::Csls(c) => csls_scores_single_query(&sims, &c)?,
    };
    Ok(Outcome::Ranked(rank_of(&scores, target, &[])))
}

/// Evaluates questions by template substitution.
///
/// For each question the filled template is embedded once to form the query
/// `b - a + c` from the contextual slot vectors, then every candidate other
/// than `a`, `b` and `c` is substituted at the last slot and re-embedded; its
/// vector there is its representation. Candidates are ranked in the given
/// order on ties. Questions whose answer is not a candidate are skipped.
pub fn method_b_evaluate<P: EmbeddingProvider + ?Sized>(
    provider: &mut P,
    questions: &[AnalogyQuestion],
    templates: &TemplateSet,
    candidates: &[String],
    cfg: &MethodBConfig,
) -> Result<Vec<CategoryResult>> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("candidate set is empty".into()));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = candidates.iter().find(|w| !seen.insert(w.as_str())) {
        return Err(Error::InvalidArgument(format!("duplicate candidate '{dup}'")));
    }
    let mut outcomes = Vec::with_capacity(questions.len());
    for (i, q) in questions.iter().enumerate() {
        let outcome = rank_question(provider, q, templates, candidates, cfg).map_err(|e| {
            let ctx = format!("question {} ({} {} {} {}) in {}", i + 1, q.a, q.b, q.c, q.d, q.category);
            match e {
                Error::Protocol(m) => Error::Protocol(format!("{ctx}: {m}")),
                Error::Provider(m) => Error::Provider(format!("{ctx}: {m}")),
                Error::InvalidArgument(m) => Error::InvalidArgument(format!("{ctx}: {m}")),
                other => Error::Provider(format!("{ctx}: {other}")),
            }
        })?;
        outcomes.push(outcome);
    }
    Ok(collect_results(questions, &outcomes, &cfg.ns))
}
