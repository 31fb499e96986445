//! Hard debiasing: neutralize gender-neutral words, equalize gendered pairs.
//!
//! All arithmetic happens on unit-normalized rows in f64; every row that is
//! rewritten is stored back as a unit vector. Rows that are neither
//! neutralized nor equalized are copied bit-for-bit.

use std::collections::HashSet;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::{gender_subspace, BiasSubspace, ProfessionPair, SubspaceMethod};
use crate::error::{Error, Result};
use crate::model::EmbeddingModel;
use crate::vector::{dot, norm, unit};

/// Below this norm a vector is treated as lying entirely inside the subspace.
const DEGENERATE_NORM: f64 = 1e-9;

/// `sum_b <v, b> b` over the subspace basis.
pub fn project_onto(v: &[f64], subspace: &BiasSubspace) -> Result<Vec<f64>> {
    if subspace.dim() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: subspace.dim(),
            found: v.len(),
        });
    }
    let mut out = vec![0.0; v.len()];
    for b in &subspace.basis {
        let c = dot(v, b);
        for (o, bi) in out.iter_mut().zip(b) {
            *o += c * bi;
        }
    }
    Ok(out)
}

fn check_dim(model: &EmbeddingModel, subspace: &BiasSubspace) -> Result<()> {
    if subspace.rank() == 0 || subspace.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: subspace.dim(),
        });
    }
    Ok(())
}

fn neutralized_row(row: &[f32], subspace: &BiasSubspace, word: &str) -> Result<Vec<f32>> {
    let degenerate = || Error::Degenerate(format!("{word:?} lies inside the bias subspace"));
    let u = unit(row).map_err(|_| degenerate())?;
    let p = project_onto(&u, subspace)?;
    let rest: Vec<f64> = u.iter().zip(&p).map(|(a, b)| a - b).collect();
    if norm(&rest) <= DEGENERATE_NORM {
        return Err(degenerate());
    }
    Ok(unit(&rest)?.into_iter().map(|x| x as f32).collect())
}

fn neutralize_rows(
    model: &EmbeddingModel,
    matrix: &mut [f32],
    selected: &[bool],
    subspace: &BiasSubspace,
) -> Result<()> {
    let dim = model.dim();
    matrix
        .par_chunks_mut(dim)
        .enumerate()
        .filter(|(row, _)| selected[*row])
        .try_for_each(|(row, out)| {
            let v = neutralized_row(model.row(row), subspace, model.word(row))?;
            out.copy_from_slice(&v);
            Ok(())
        })
}

/// Replaces each listed word by the unit vector of its component orthogonal
/// to the subspace. Other rows are untouched.
pub fn neutralize<S: AsRef<str>>(
    model: &EmbeddingModel,
    subspace: &BiasSubspace,
    words: &[S],
) -> Result<EmbeddingModel> {
    check_dim(model, subspace)?;
    let mut selected = vec![false; model.len()];
    for w in words {
        selected[model.require(w.as_ref())?] = true;
    }
    let mut matrix = model.matrix().to_vec();
    neutralize_rows(model, &mut matrix, &selected, subspace)?;
    Ok(model.with_matrix(matrix))
}

/// Equalized unit vectors for one pair, or `None` when both members project
/// to the same point of the subspace.
fn equalized_pair(
    a: &[f32],
    b: &[f32],
    subspace: &BiasSubspace,
) -> Result<Option<(Vec<f32>, Vec<f32>)>> {
    let a = unit(a)?;
    let b = unit(b)?;
    let mu: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
    let mu_b = project_onto(&mu, subspace)?;
    let nu: Vec<f64> = mu.iter().zip(&mu_b).map(|(m, p)| m - p).collect();
    // |nu| <= 1 for unit inputs; clamp the rounding overshoot.
    let radius = (1.0 - dot(&nu, &nu)).max(0.0).sqrt();

    let place = |w: &[f64]| -> Result<Option<Vec<f32>>> {
        let w_b = project_onto(w, subspace)?;
        let offset: Vec<f64> = w_b.iter().zip(&mu_b).map(|(x, m)| x - m).collect();
        let len = norm(&offset);
        if len <= DEGENERATE_NORM {
            return Ok(None);
        }
        Ok(Some(
            nu.iter()
                .zip(&offset)
                .map(|(n, o)| (n + radius * o / len) as f32)
                .collect(),
        ))
    };
    match (place(&a)?, place(&b)?) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        _ => Ok(None),
    }
}

fn check_pairs_disjoint(pairs: &[ProfessionPair]) -> Result<()> {
    let mut seen = HashSet::new();
    for p in pairs {
        for w in [&p.female, &p.male] {
            if !seen.insert(w.as_str()) {
                return Err(Error::Config(format!(
                    "{w:?} appears in more than one equalize pair"
                )));
            }
        }
    }
    Ok(())
}

fn equalize_into(
    model: &EmbeddingModel,
    matrix: &mut [f32],
    subspace: &BiasSubspace,
    pairs: &[ProfessionPair],
) -> Result<usize> {
    let dim = model.dim();
    let mut done = 0;
    for pair in pairs {
        let ra = model.require(&pair.female)?;
        let rb = model.require(&pair.male)?;
        let a = &matrix[ra * dim..(ra + 1) * dim];
        let b = &matrix[rb * dim..(rb + 1) * dim];
        match equalized_pair(a, b, subspace) {
            Ok(Some((a, b))) => {
                matrix[ra * dim..(ra + 1) * dim].copy_from_slice(&a);
                matrix[rb * dim..(rb + 1) * dim].copy_from_slice(&b);
                done += 1;
            }
            Ok(None) => warn!("equalize: {pair} is symmetric inside the subspace, skipped"),
            Err(Error::ZeroVector) => warn!("equalize: {pair} has a zero vector, skipped"),
            Err(e) => return Err(e),
        }
    }
    Ok(done)
}

/// Moves each pair to unit vectors that share their component outside the
/// subspace and mirror each other inside it. Returns the new model and the
/// number of pairs actually equalized (degenerate pairs are skipped).
pub fn equalize(
    model: &EmbeddingModel,
    subspace: &BiasSubspace,
    pairs: &[ProfessionPair],
) -> Result<(EmbeddingModel, usize)> {
    check_dim(model, subspace)?;
    check_pairs_disjoint(pairs)?;
    let mut matrix = model.matrix().to_vec();
    let done = equalize_into(model, &mut matrix, subspace, pairs)?;
    Ok((model.with_matrix(matrix), done))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebiasConfig {
    pub definitional_pairs: Vec<ProfessionPair>,
    pub equalize_pairs: Vec<ProfessionPair>,
    /// Words left exactly as they are.
    pub gender_specific: Vec<String>,
    pub subspace_method: SubspaceMethod,
    pub pca_components: usize,
}

impl Default for DebiasConfig {
    fn default() -> Self {
        Self {
            definitional_pairs: Vec::new(),
            equalize_pairs: Vec::new(),
            gender_specific: Vec::new(),
            subspace_method: SubspaceMethod::PairDifference,
            pca_components: 1,
        }
    }
}

impl DebiasConfig {
    pub fn validate(&self) -> Result<()> {
        if self.definitional_pairs.is_empty() {
            return Err(Error::Config("no definitional pairs".into()));
        }
        if self.pca_components == 0 {
            return Err(Error::Config("pca_components must be positive".into()));
        }
        check_pairs_disjoint(&self.equalize_pairs)
    }

    fn protected(&self) -> HashSet<&str> {
        self.gender_specific
            .iter()
            .map(String::as_str)
            .chain(
                self.definitional_pairs
                    .iter()
                    .chain(&self.equalize_pairs)
                    .flat_map(|p| [p.female.as_str(), p.male.as_str()]),
            )
            .collect()
    }

    /// The words `hard_debias` neutralizes: the vocabulary minus gender-specific,
    /// definitional and equalize words.
    pub fn neutral_words<'m>(&self, model: &'m EmbeddingModel) -> Vec<&'m str> {
        let protected = self.protected();
        model
            .vocab()
            .iter()
            .map(String::as_str)
            .filter(|w| !protected.contains(w))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct DebiasOutcome {
    pub model: EmbeddingModel,
    pub subspace: BiasSubspace,
    pub neutralized_count: usize,
    pub equalized_count: usize,
    /// Configured words missing from the vocabulary, in config order.
    pub skipped_oov: Vec<String>,
}

/// Builds the gender subspace from the definitional pairs, neutralizes every
/// remaining word, then equalizes the configured pairs. The source model is
/// not modified.
///
/// Configured pairs with an out-of-vocabulary word are left out and listed in
/// [`DebiasOutcome::skipped_oov`].
pub fn hard_debias(model: &EmbeddingModel, config: &DebiasConfig) -> Result<DebiasOutcome> {
    config.validate()?;
    let mut skipped_oov: Vec<String> = Vec::new();
    let mut note_missing = |w: &str| {
        if !model.contains(w) && !skipped_oov.iter().any(|s| s == w) {
            skipped_oov.push(w.to_owned());
        }
    };
    let mut present = |pairs: &[ProfessionPair]| -> Vec<ProfessionPair> {
        pairs
            .iter()
            .filter(|p| {
                note_missing(&p.female);
                note_missing(&p.male);
                model.contains(&p.female) && model.contains(&p.male)
            })
            .cloned()
            .collect()
    };
    let definitional = present(&config.definitional_pairs);
    let equalize_pairs = present(&config.equalize_pairs);
    for w in &config.gender_specific {
        note_missing(w);
    }
    if definitional.is_empty() {
        return Err(Error::Config(
            "no definitional pair is fully in the vocabulary".into(),
        ));
    }

    let subspace = gender_subspace(
        model,
        &definitional,
        config.subspace_method,
        config.pca_components,
    )?;

    let protected = config.protected();
    let selected: Vec<bool> = model
        .vocab()
        .iter()
        .map(|w| !protected.contains(w.as_str()))
        .collect();
    let neutralized_count = selected.iter().filter(|&&s| s).count();
    if neutralized_count == 0 {
        return Err(Error::Config("no words left to neutralize".into()));
    }

    let mut matrix = model.matrix().to_vec();
    neutralize_rows(model, &mut matrix, &selected, &subspace)?;
    let equalized_count = equalize_into(model, &mut matrix, &subspace, &equalize_pairs)?;

    Ok(DebiasOutcome {
        model: model.with_matrix(matrix),
        subspace,
        neutralized_count,
        equalized_count,
        skipped_oov,
    })
}
