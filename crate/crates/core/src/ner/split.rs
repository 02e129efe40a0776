use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NerSentence;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.9, seed: 0 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// `max(1, round((1 - fraction) * n))`, halves rounded up, capped at `n - 1`.
///
/// Products within 1e-9 of a half count as the half, so `n = 95` at 0.9
/// gives 10 even though `0.1 * 95` is slightly below 9.5 in binary.
pub fn test_size(n: usize, train_fraction: f64) -> usize {
    let x = (1.0 - train_fraction) * n as f64;
    let rounded = (x + 0.5 + 1e-9).floor() as usize;
    rounded.max(1).min(n.saturating_sub(1))
}

/// Seeded shuffle of sentence indices; the first `test_size` shuffled
/// sentences form the test part. Both parts keep input order.
pub fn split(sentences: &[NerSentence], spec: &SplitSpec) -> Result<(Vec<NerSentence>, Vec<NerSentence>)> {
    spec.validate()?;
    let n = sentences.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cannot split {n} sentences")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut is_test = vec![false; n];
    for &i in &order[..test_size(n, spec.train_fraction)] {
        is_test[i] = true;
    }
    let (test, train): (Vec<_>, Vec<_>) = sentences.iter().cloned().zip(is_test).partition(|(_, t)| *t);
    Ok((train.into_iter().map(|p| p.0).collect(), test.into_iter().map(|p| p.0).collect()))
}
