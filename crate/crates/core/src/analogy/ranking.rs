//! Exact brute-force cosine ranking over row-normalized vectors.

/// `v / |v|`; a zero vector stays zero.
pub fn normalize(v: &[f32]) -> Vec<f32> {
    let norm = v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; v.len()];
    }
    v.iter().map(|&x| (x as f64 / norm) as f32).collect()
}

/// Dot product accumulated in double precision.
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

/// `b - a + c`.
pub fn analogy_query(a: &[f32], b: &[f32], c: &[f32]) -> Vec<f32> {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((&a, &b), &c)| (b - a) + c)
        .collect()
}

/// Unit-length copies of a list of rows.
#[derive(Clone, Debug, Default)]
pub struct NormalizedRows {
    dim: usize,
    data: Vec<f32>,
}

impl NormalizedRows {
    pub fn new(dim: usize) -> Self {
        NormalizedRows { dim, data: Vec::new() }
    }

    pub fn from_rows<'a, I>(rows: I, dim: usize) -> Self
    where
        I: IntoIterator<Item = &'a [f32]>,
    {
        let mut m = Self::new(dim);
        for r in rows {
            m.push(r);
        }
        m
    }

    pub fn push(&mut self, row: &[f32]) {
        debug_assert_eq!(row.len(), self.dim);
        self.data.extend(normalize(row));
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine similarity of every row to `query`.
    pub fn scores(&self, query: &[f32]) -> Vec<f64> {
        let q = normalize(query);
        self.data.chunks_exact(self.dim.max(1)).map(|r| dot(r, &q)).collect()
    }
}

/// 0-based rank of `target` among the non-excluded candidates: the number of
/// candidates scoring higher, or equal with a lower index.
pub fn rank_of(scores: &[f64], target: usize, excluded: &[usize]) -> usize {
    let t = scores[target];
    scores
        .iter()
        .enumerate()
        .filter(|&(i, &s)| i != target && !excluded.contains(&i) && (s > t || (s == t && i < target)))
        .count()
}

/// Indices of the `n` best non-excluded candidates, best first, ties by index.
pub fn top_n(scores: &[f64], n: usize, excluded: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|i| !excluded.contains(i)).collect();
    let cmp = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    if n < idx.len() {
        idx.select_nth_unstable_by(n, cmp);
        idx.truncate(n);
    }
    idx.sort_by(cmp);
    idx
}
