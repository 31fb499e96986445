//! Gender direction, profession-analogy accuracy, direct bias and extreme
//! analogies.

use std::fmt;

use log::debug;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EmbeddingModel;
use crate::vector::{cosine, dot, most_similar, unit, AnalogyQuery};

/// A (female, male) word pair. Used for professions and for definitional and
/// equalize pairs alike.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProfessionPair {
    pub female: String,
    pub male: String,
}

impl ProfessionPair {
    pub fn new(female: impl Into<String>, male: impl Into<String>) -> Result<Self> {
        let (female, male) = (female.into(), male.into());
        if female.is_empty() || male.is_empty() {
            return Err(Error::Config("pair words must be nonempty".into()));
        }
        if female == male {
            return Err(Error::Config(format!(
                "pair ({female}, {male}) repeats a word"
            )));
        }
        Ok(Self { female, male })
    }
}

impl fmt::Display for ProfessionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.female, self.male)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceMethod {
    #[default]
    PairDifference,
    Pca,
}

/// Orthonormal basis of the gender subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSubspace {
    pub basis: Vec<Vec<f64>>,
    pub method: SubspaceMethod,
    pub source_pairs: Vec<ProfessionPair>,
}

impl BiasSubspace {
    /// Wraps a single direction, normalizing it.
    pub fn from_direction(direction: &[f64]) -> Result<Self> {
        Ok(Self {
            basis: vec![unit(direction)?],
            method: SubspaceMethod::PairDifference,
            source_pairs: Vec::new(),
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.first().map_or(0, Vec::len)
    }

    /// The single direction of a rank-1 subspace.
    pub fn direction(&self) -> Result<&[f64]> {
        match self.basis.as_slice() {
            [g] => Ok(g),
            _ => Err(Error::Config(format!(
                "expected a one-dimensional subspace, got rank {}",
                self.rank()
            ))),
        }
    }
}

fn unit_row(model: &EmbeddingModel, word: &str) -> Result<Vec<f64>> {
    let row = model.require(word)?;
    unit(model.row(row)).map_err(|_| Error::Degenerate(format!("{word:?} has a zero vector")))
}

/// `unit(mean(unit(f) - unit(m)))`, oriented toward the female words.
pub fn gender_direction_diff(
    model: &EmbeddingModel,
    pairs: &[ProfessionPair],
) -> Result<BiasSubspace> {
    if pairs.is_empty() {
        return Err(Error::Config("no definitional pairs".into()));
    }
    let mut mean = vec![0.0; model.dim()];
    for pair in pairs {
        let f = unit_row(model, &pair.female)?;
        let m = unit_row(model, &pair.male)?;
        for ((acc, a), b) in mean.iter_mut().zip(&f).zip(&m) {
            *acc += a - b;
        }
    }
    let scale = pairs.len() as f64;
    mean.iter_mut().for_each(|x| *x /= scale);
    let g = unit(&mean)
        .map_err(|_| Error::Degenerate("pair differences cancel to a zero mean".into()))?;
    Ok(BiasSubspace {
        basis: vec![g],
        method: SubspaceMethod::PairDifference,
        source_pairs: pairs.to_vec(),
    })
}

/// Top-`k` principal directions of the pair-centred unit vectors.
///
/// Each pair contributes its two unit vectors minus their mean. The basis is
/// the top right singular vectors of that `2p x dim` matrix, each flipped so
/// its first nonzero coordinate is positive.
pub fn gender_direction_pca(
    model: &EmbeddingModel,
    pairs: &[ProfessionPair],
    k: usize,
) -> Result<BiasSubspace> {
    if pairs.is_empty() {
        return Err(Error::Config("no definitional pairs".into()));
    }
    if k == 0 {
        return Err(Error::Config(
            "number of components must be positive".into(),
        ));
    }
    let dim = model.dim();
    let mut centred: Vec<Vec<f64>> = Vec::with_capacity(2 * pairs.len());
    for pair in pairs {
        let f = unit_row(model, &pair.female)?;
        let m = unit_row(model, &pair.male)?;
        let mu: Vec<f64> = f.iter().zip(&m).map(|(a, b)| (a + b) / 2.0).collect();
        centred.push(f.iter().zip(&mu).map(|(a, c)| a - c).collect());
        centred.push(m.iter().zip(&mu).map(|(a, c)| a - c).collect());
    }

    // The sample count is tiny next to dim, so decompose the Gram matrix
    // X X^T and lift its eigenvectors back to right singular vectors.
    let n = centred.len();
    let gram = DMatrix::from_fn(n, n, |i, j| dot(&centred[i], &centred[j]));
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let top = eig.eigenvalues[order[0]].max(0.0).sqrt();
    let tol = top * 1e-8;
    let rank = order
        .iter()
        .take_while(|&&i| top > 0.0 && eig.eigenvalues[i].max(0.0).sqrt() > tol)
        .count()
        .min(dim);
    if k > rank {
        return Err(Error::RankDeficient { requested: k, rank });
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let sigma = eig.eigenvalues[i].sqrt();
        let mut v = vec![0.0; dim];
        for (row, x) in centred.iter().enumerate() {
            let w = eig.eigenvectors[(row, i)] / sigma;
            for (acc, xi) in v.iter_mut().zip(x) {
                *acc += w * xi;
            }
        }
        // Re-orthogonalize against earlier components to remove rounding drift.
        for b in &basis {
            let p = dot(&v, b);
            for (acc, bi) in v.iter_mut().zip(b) {
                *acc -= p * bi;
            }
        }
        let mut v = unit(&v).map_err(|_| Error::RankDeficient {
            requested: k,
            rank: basis.len(),
        })?;
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        basis.push(v);
    }
    debug!("pca subspace: rank {rank}, kept {k}, top singular value {top:.6}");
    Ok(BiasSubspace {
        basis,
        method: SubspaceMethod::Pca,
        source_pairs: pairs.to_vec(),
    })
}

pub fn gender_subspace(
    model: &EmbeddingModel,
    pairs: &[ProfessionPair],
    method: SubspaceMethod,
    components: usize,
) -> Result<BiasSubspace> {
    match method {
        SubspaceMethod::PairDifference => gender_direction_diff(model, pairs),
        SubspaceMethod::Pca => gender_direction_pca(model, pairs, components),
    }
}

/// Knobs for [`evaluate_professions`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationOptions {
    /// (female pronoun, male pronoun) anchoring the analogy.
    pub seed: (String, String),
    /// Record pairs with out-of-vocabulary words as skipped instead of failing.
    pub skip_oov: bool,
    /// A pair counts as correct when the female word is within the top `k`.
    pub top_k_match: usize,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self {
            seed: ("ela".into(), "ele".into()),
            skip_oov: false,
            top_k_match: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub pair: ProfessionPair,
    /// Top-1 analogy word; `None` when the pair was skipped.
    pub predicted: Option<String>,
    pub score: Option<f64>,
    pub correct: bool,
}

impl PairOutcome {
    pub fn skipped(&self) -> bool {
        self.predicted.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub seed: (String, String),
    pub top_k_match: usize,
    pub outcomes: Vec<PairOutcome>,
    pub evaluated_count: usize,
    pub skipped_count: usize,
    pub correct_count: usize,
    /// `correct_count / evaluated_count`, or 0 when nothing was evaluated.
    pub accuracy: f64,
}

/// Scores each pair by whether `seed.female + male - seed.male` lands on the
/// pair's female word.
pub fn evaluate_professions(
    model: &EmbeddingModel,
    pairs: &[ProfessionPair],
    options: &EvaluationOptions,
) -> Result<EvaluationReport> {
    let (she, he) = (&options.seed.0, &options.seed.1);
    model.require(she)?;
    model.require(he)?;
    if options.top_k_match == 0 {
        return Err(Error::Config("top_k_match must be positive".into()));
    }

    let mut outcomes = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let missing = [&pair.female, &pair.male]
            .into_iter()
            .find(|w| !model.contains(w));
        if let Some(word) = missing {
            if !options.skip_oov {
                return Err(Error::OutOfVocabulary(word.clone()));
            }
            debug!("skipping {pair}: {word:?} not in vocabulary");
            outcomes.push(PairOutcome {
                pair: pair.clone(),
                predicted: None,
                score: None,
                correct: false,
            });
            continue;
        }
        let query = AnalogyQuery::new(
            [she.as_str(), pair.male.as_str()],
            [he.as_str()],
            options.top_k_match,
        )?;
        let result = most_similar(model, &query)?;
        let top = result.top();
        outcomes.push(PairOutcome {
            pair: pair.clone(),
            predicted: Some(top.map_or_else(String::new, |n| n.word.clone())),
            score: top.map(|n| n.score),
            correct: result.ranked.iter().any(|n| n.word == pair.female),
        });
    }

    let evaluated_count = outcomes.iter().filter(|o| !o.skipped()).count();
    let correct_count = outcomes.iter().filter(|o| o.correct).count();
    Ok(EvaluationReport {
        seed: options.seed.clone(),
        top_k_match: options.top_k_match,
        skipped_count: outcomes.len() - evaluated_count,
        evaluated_count,
        correct_count,
        accuracy: if evaluated_count > 0 {
            correct_count as f64 / evaluated_count as f64
        } else {
            0.0
        },
        outcomes,
    })
}

/// Mean of `|cos(w, g)|^strictness` over `words`.
pub fn direct_bias<S: AsRef<str>>(
    model: &EmbeddingModel,
    subspace: &BiasSubspace,
    words: &[S],
    strictness: f64,
) -> Result<f64> {
    let g = subspace.direction()?;
    if g.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: g.len(),
        });
    }
    if words.is_empty() {
        return Err(Error::Config("no neutral words".into()));
    }
    if strictness.is_nan() || strictness < 0.0 {
        return Err(Error::Config("strictness must be nonnegative".into()));
    }
    let mut total = 0.0;
    for word in words {
        let row = model.require(word.as_ref())?;
        total += cosine(model.row(row), g)?.abs().powf(strictness);
    }
    Ok(total / words.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    She,
    He,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::She => "she",
            Side::He => "he",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeRow {
    pub probe: String,
    pub analogy: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeReport {
    pub side: Side,
    pub rows: Vec<ExtremeRow>,
}

/// Top-1 analogy of every probe toward one side, keeping the `per_side`
/// probes with the highest scores. Equal scores keep probe order.
pub fn extreme_side<S: AsRef<str>>(
    model: &EmbeddingModel,
    seed: (&str, &str),
    side: Side,
    probes: &[S],
    per_side: usize,
) -> Result<ExtremeReport> {
    let (toward, away) = match side {
        Side::She => seed,
        Side::He => (seed.1, seed.0),
    };
    model.require(toward)?;
    model.require(away)?;
    let mut rows = Vec::with_capacity(probes.len());
    for probe in probes {
        let probe = probe.as_ref();
        let query = AnalogyQuery::new([toward, probe], [away], 1)?;
        if let Some(top) = most_similar(model, &query)?.ranked.into_iter().next() {
            rows.push(ExtremeRow {
                probe: probe.to_owned(),
                analogy: top.word,
                score: top.score,
            });
        }
    }
    rows.sort_by(|a, b| b.score.total_cmp(&a.score));
    rows.truncate(per_side);
    Ok(ExtremeReport { side, rows })
}

/// Both sides of [`extreme_side`] over one probe list: `(she, he)`.
pub fn extreme_analogies<S: AsRef<str>>(
    model: &EmbeddingModel,
    seed: (&str, &str),
    probes: &[S],
    per_side: usize,
) -> Result<(ExtremeReport, ExtremeReport)> {
    Ok((
        extreme_side(model, seed, Side::She, probes, per_side)?,
        extreme_side(model, seed, Side::He, probes, per_side)?,
    ))
}
