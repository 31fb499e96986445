//! Cosine geometry and the analogy query.
//!
//! [`most_similar`] averages the unit-normalized query vectors (positives with
//! weight +1, negatives with weight -1), then ranks every row of the model by
//! cosine to that mean. Query words never appear in the result. Ties are
//! broken by ascending row id, so the ranking does not depend on how the scan
//! is partitioned across threads.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EmbeddingModel;

/// Rows per parallel work item.
const SCAN_CHUNK: usize = 8192;

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// `<a, b> / (|a| |b|)` accumulated in f64 and clamped to `[-1, 1]`.
pub fn cosine<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    check_len(a.len(), b.len())?;
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x.into(), y.into());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

pub fn norm<T: Copy + Into<f64>>(v: &[T]) -> f64 {
    v.iter()
        .map(|&x| {
            let x = x.into();
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

pub fn dot<A, B>(a: &[A], b: &[B]) -> f64
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    a.iter().zip(b).map(|(&x, &y)| x.into() * y.into()).sum()
}

/// `v / |v|` in f64.
pub fn unit<T: Copy + Into<f64>>(v: &[T]) -> Result<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|&x| x.into() / n).collect())
}

// Fixed four-lane accumulation: the summation order is a function of the row
// alone, which keeps scores bit-identical between sequential and parallel scans.
#[inline]
fn dot_row(q: &[f64], row: &[f32]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut qc = q.chunks_exact(4);
    let mut rc = row.chunks_exact(4);
    for (qs, rs) in (&mut qc).zip(&mut rc) {
        acc[0] += qs[0] * f64::from(rs[0]);
        acc[1] += qs[1] * f64::from(rs[1]);
        acc[2] += qs[2] * f64::from(rs[2]);
        acc[3] += qs[3] * f64::from(rs[3]);
    }
    let mut tail = 0.0;
    for (&x, &y) in qc.remainder().iter().zip(rc.remainder()) {
        tail += x * f64::from(y);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// A multiset of +1/-1 weighted query words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyQuery {
    positives: Vec<String>,
    negatives: Vec<String>,
    top_n: usize,
}

impl AnalogyQuery {
    pub fn new<P, N, S>(positives: P, negatives: N, top_n: usize) -> Result<Self>
    where
        P: IntoIterator<Item = S>,
        N: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let positives: Vec<String> = positives.into_iter().map(Into::into).collect();
        let negatives: Vec<String> = negatives.into_iter().map(Into::into).collect();
        if positives.is_empty() {
            return Err(Error::InvalidQuery(
                "at least one positive word is required".into(),
            ));
        }
        if top_n == 0 {
            return Err(Error::InvalidQuery("top_n must be positive".into()));
        }
        let all: Vec<&String> = positives.iter().chain(&negatives).collect();
        for (i, w) in all.iter().enumerate() {
            if all[..i].contains(w) {
                return Err(Error::InvalidQuery(format!("{w:?} appears more than once")));
            }
        }
        Ok(Self {
            positives,
            negatives,
            top_n,
        })
    }

    pub fn positives(&self) -> &[String] {
        &self.positives
    }

    pub fn negatives(&self) -> &[String] {
        &self.negatives
    }

    pub fn top_n(&self) -> usize {
        self.top_n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub word: String,
    pub score: f64,
}

/// Ranked neighbours, best first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalogyResult {
    pub ranked: Vec<Neighbor>,
}

impl AnalogyResult {
    pub fn top(&self) -> Option<&Neighbor> {
        self.ranked.first()
    }

    pub fn words(&self) -> Vec<&str> {
        self.ranked.iter().map(|n| n.word.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scan {
    Sequential,
    /// Split the row scan over the current rayon pool.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Hit {
    pub score: f64,
    pub row: usize,
}

// Greater = better: higher score, then lower row id.
impl Ord for Hit {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.row.cmp(&self.row))
    }
}

impl PartialOrd for Hit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Hit {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Hit {}

fn scan_range(
    model: &EmbeddingModel,
    q: &[f64],
    exclude: &[usize],
    top_n: usize,
    rows: std::ops::Range<usize>,
) -> Vec<Hit> {
    let mut heap: BinaryHeap<Reverse<Hit>> = BinaryHeap::with_capacity(top_n + 1);
    for row in rows {
        let n = model.norm(row);
        // Zero rows have no direction and are never ranked.
        if n == 0.0 || exclude.contains(&row) {
            continue;
        }
        let hit = Hit {
            score: (dot_row(q, model.row(row)) / n).clamp(-1.0, 1.0),
            row,
        };
        if heap.len() < top_n {
            heap.push(Reverse(hit));
        } else if let Some(mut worst) = heap.peek_mut() {
            if hit > worst.0 {
                *worst = Reverse(hit);
            }
        }
    }
    let mut hits: Vec<Hit> = heap.into_iter().map(|r| r.0).collect();
    hits.sort_unstable_by(|a, b| b.cmp(a));
    hits
}

fn merge(a: Vec<Hit>, b: Vec<Hit>, top_n: usize) -> Vec<Hit> {
    let mut out = Vec::with_capacity(top_n.min(a.len() + b.len()));
    let (mut a, mut b) = (a.into_iter().peekable(), b.into_iter().peekable());
    while out.len() < top_n {
        let next = match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => {
                if x >= y {
                    a.next()
                } else {
                    b.next()
                }
            }
            (Some(_), None) => a.next(),
            (None, Some(_)) => b.next(),
            (None, None) => break,
        };
        out.extend(next);
    }
    out
}

/// Top `top_n` rows by cosine to the unit vector `q`, skipping `exclude`.
pub(crate) fn rank_rows(
    model: &EmbeddingModel,
    q: &[f64],
    exclude: &[usize],
    top_n: usize,
    scan: Scan,
) -> Vec<Hit> {
    let n = model.len();
    match scan {
        Scan::Sequential => scan_range(model, q, exclude, top_n, 0..n),
        Scan::Parallel => (0..n.div_ceil(SCAN_CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let start = chunk * SCAN_CHUNK;
                scan_range(model, q, exclude, top_n, start..(start + SCAN_CHUNK).min(n))
            })
            .reduce(Vec::new, |a, b| merge(a, b, top_n)),
    }
}

/// Unit-normalized mean of the weighted unit query vectors, plus the rows to exclude.
pub(crate) fn query_vector(
    model: &EmbeddingModel,
    query: &AnalogyQuery,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let mut mean = vec![0.0f64; model.dim()];
    let mut rows = Vec::with_capacity(query.positives.len() + query.negatives.len());
    let weighted = query
        .positives
        .iter()
        .map(|w| (w, 1.0))
        .chain(query.negatives.iter().map(|w| (w, -1.0)));
    for (word, weight) in weighted {
        let row = model.require(word)?;
        let u = unit(model.row(row))
            .map_err(|_| Error::Degenerate(format!("query word {word:?} has a zero vector")))?;
        for (m, x) in mean.iter_mut().zip(&u) {
            *m += weight * x;
        }
        rows.push(row);
    }
    let count = rows.len() as f64;
    mean.iter_mut().for_each(|m| *m /= count);
    let q = unit(&mean).map_err(|_| Error::Degenerate("query vectors cancel to zero".into()))?;
    Ok((q, rows))
}

pub fn most_similar(model: &EmbeddingModel, query: &AnalogyQuery) -> Result<AnalogyResult> {
    most_similar_with(model, query, Scan::Parallel)
}

/// Exhaustive 3CosAdd search over the whole vocabulary.
pub fn most_similar_with(
    model: &EmbeddingModel,
    query: &AnalogyQuery,
    scan: Scan,
) -> Result<AnalogyResult> {
    let (q, exclude) = query_vector(model, query)?;
    let ranked = rank_rows(model, &q, &exclude, query.top_n, scan)
        .into_iter()
        .map(|hit| Neighbor {
            word: model.word(hit.row).to_owned(),
            score: hit.score,
        })
        .collect();
    Ok(AnalogyResult { ranked })
}

/// Nearest neighbours of a single word.
pub fn top_neighbors(model: &EmbeddingModel, word: &str, top_n: usize) -> Result<AnalogyResult> {
    let query = AnalogyQuery::new([word], Vec::<&str>::new(), top_n)?;
    most_similar(model, &query)
}
