//! Test fixtures and brute-force reference implementations.
//!
//! The references here deliberately avoid the library's scan code: plain
//! loops, full sorts, no heaps, no chunking.

#![allow(dead_code)]

use std::collections::HashMap;

use embias::{AnalogyQuery, DebiasConfig, EmbeddingModel, ProfessionPair, SubspaceMethod};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

/// Alphabet for random vocabulary, including multi-byte UTF-8.
const LETTERS: &[&str] = &["a", "e", "o", "r", "s", "ã", "é", "ç", "í", "ü", "日", "ß"];

pub fn random_words<R: Rng>(rng: &mut R, n: usize) -> Vec<String> {
    let mut words = Vec::with_capacity(n);
    for i in 0..n {
        let len = rng.gen_range(0..4);
        let suffix: String = (0..len).map(|_| *LETTERS.choose(rng).unwrap()).collect();
        words.push(format!("w{i}{suffix}"));
    }
    words
}

pub fn random_model<R: Rng>(rng: &mut R, n: usize, dim: usize) -> EmbeddingModel {
    let words = random_words(rng, n);
    let matrix: Vec<f32> = (0..n * dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    EmbeddingModel::new(words, dim, matrix).unwrap()
}

/// Every finite bit pattern is fair game: subnormals, signed zero, extremes.
pub fn random_bits_model<R: Rng>(rng: &mut R, n: usize, dim: usize) -> EmbeddingModel {
    let words = random_words(rng, n);
    let matrix: Vec<f32> = (0..n * dim)
        .map(|_| loop {
            let v = f32::from_bits(rng.gen());
            if v.is_finite() {
                break v;
            }
        })
        .collect();
    EmbeddingModel::new(words, dim, matrix).unwrap()
}

/// Random model where some rows are exact copies or power-of-two multiples of
/// earlier rows, so cosine ties are exact.
pub fn model_with_ties<R: Rng>(rng: &mut R, n: usize, dim: usize) -> EmbeddingModel {
    let words = random_words(rng, n);
    let mut matrix: Vec<f32> = (0..n * dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    for row in 1..n {
        let roll: f64 = rng.gen();
        if roll < 0.15 {
            let src = rng.gen_range(0..row);
            let scale = [1.0f32, 2.0, 0.5][rng.gen_range(0..3)];
            for k in 0..dim {
                matrix[row * dim + k] = matrix[src * dim + k] * scale;
            }
        }
    }
    EmbeddingModel::new(words, dim, matrix).unwrap()
}

/// Sets one row. Panics on a bad word.
pub fn with_row(model: &EmbeddingModel, word: &str, values: &[f32]) -> EmbeddingModel {
    let row = model.row_of(word).unwrap();
    let mut matrix = model.matrix().to_vec();
    matrix[row * model.dim()..(row + 1) * model.dim()].copy_from_slice(values);
    EmbeddingModel::new(model.vocab().to_vec(), model.dim(), matrix).unwrap()
}

pub fn scaled(model: &EmbeddingModel, factor: f32) -> EmbeddingModel {
    let matrix = model.matrix().iter().map(|v| v * factor).collect();
    EmbeddingModel::new(model.vocab().to_vec(), model.dim(), matrix).unwrap()
}

fn f64_row(model: &EmbeddingModel, row: usize) -> Vec<f64> {
    model.row(row).iter().map(|&x| x as f64).collect()
}

fn len(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Reference 3CosAdd: full score table, stable sort by (score desc, row asc).
pub fn naive_most_similar(
    model: &EmbeddingModel,
    positives: &[&str],
    negatives: &[&str],
    top_n: usize,
) -> Vec<(String, f64)> {
    let dim = model.dim();
    let mut q = vec![0.0f64; dim];
    let mut query_rows = Vec::new();
    for (words, sign) in [(positives, 1.0), (negatives, -1.0)] {
        for w in words {
            let r = model.row_of(w).unwrap();
            query_rows.push(r);
            let v = f64_row(model, r);
            let n = len(&v);
            for k in 0..dim {
                q[k] += sign * v[k] / n;
            }
        }
    }
    let count = query_rows.len() as f64;
    for x in q.iter_mut() {
        *x /= count;
    }
    let qn = len(&q);

    let mut scored: Vec<(usize, f64)> = Vec::new();
    for r in 0..model.len() {
        if query_rows.contains(&r) {
            continue;
        }
        let v = f64_row(model, r);
        let vn = len(&v);
        if vn == 0.0 {
            continue;
        }
        let mut dot = 0.0;
        for k in 0..dim {
            dot += q[k] * v[k];
        }
        scored.push((r, (dot / (qn * vn)).clamp(-1.0, 1.0)));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored
        .into_iter()
        .take(top_n)
        .map(|(r, s)| (model.word(r).to_owned(), s))
        .collect()
}

pub fn norm32(v: &[f32]) -> f64 {
    v.iter()
        .map(|&x| (x as f64) * (x as f64))
        .sum::<f64>()
        .sqrt()
}

pub fn cos_ref(a: &[f32], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(&x, y)| x as f64 * y).sum();
    dot / (norm32(a) * len(b))
}

pub fn cos32(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    dot / (norm32(a) * norm32(b))
}

/// Planted profession-analogy model: `n` profession pairs of which the first `k`
/// (in list order) satisfy `ela + male - ele = female` exactly. For the rest a
/// decoy word takes the top spot.
pub fn planted_profession_model(k: usize, n: usize) -> (EmbeddingModel, Vec<(String, String)>) {
    assert!(k <= n);
    let dim = 2 * n + 2;
    let basis = |i: usize| {
        let mut v = vec![0.0f32; dim];
        v[i] = 1.0;
        v
    };
    let mut rows: Vec<(String, Vec<f32>)> =
        vec![("ela".into(), basis(0)), ("ele".into(), basis(1))];
    let mut pairs = Vec::new();
    for i in 0..n {
        let male_axis = 2 + 2 * i;
        let target: Vec<f32> = (0..dim)
            .map(|d| match d {
                0 => 1.0,
                1 => -1.0,
                d if d == male_axis => 1.0,
                _ => 0.0,
            })
            .collect();
        let (female, male) = (format!("prof{i}a"), format!("prof{i}o"));
        rows.push((male.clone(), basis(male_axis)));
        if i < k {
            rows.push((female.clone(), target));
        } else {
            rows.push((female.clone(), basis(male_axis + 1)));
            rows.push((format!("decoy{i}"), target));
        }
        pairs.push((female, male));
    }
    (EmbeddingModel::from_rows(dim, rows).unwrap(), pairs)
}

/// Rows whose direction is shared with no other row.
///
/// Query words are drawn from these: a copy of a query word ties analytically
/// with copies of the other query words (e.g. `cos(a, a+b) = cos(b, a+b)` for
/// unit `a`, `b`) without being bit-identical, so neither implementation can
/// be expected to order them the same way. Copies of non-query rows are exact
/// ties and stay in play.
pub fn unique_direction_rows(model: &EmbeddingModel) -> Vec<usize> {
    let mut groups: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    for r in 0..model.len() {
        let v = f64_row(model, r);
        let n = len(&v);
        let key = v.iter().map(|x| (x / n).to_bits()).collect();
        groups.entry(key).or_default().push(r);
    }
    let mut rows: Vec<usize> = groups
        .into_values()
        .filter(|g| g.len() == 1)
        .map(|g| g[0])
        .collect();
    rows.sort_unstable();
    rows
}

/// One to three distinct query words with at least one positive.
pub fn random_query<R: Rng>(rng: &mut R, model: &EmbeddingModel, top_n: usize) -> AnalogyQuery {
    let pool = unique_direction_rows(model);
    let n_words = rng.gen_range(1..=3.min(pool.len()));
    let picks = sample(rng, pool.len(), n_words).into_vec();
    let n_pos = rng.gen_range(1..=n_words);
    let words: Vec<&str> = picks.iter().map(|&i| model.word(pool[i])).collect();
    AnalogyQuery::new(words[..n_pos].to_vec(), words[n_pos..].to_vec(), top_n).unwrap()
}

/// Vocabulary-sized debias scenario: random rows with a planted gender axis
/// along `e0`, `n_def` definitional pairs, `n_eq` disjoint equalize pairs and a
/// few gender-specific words. Returns the model and the three lists.
pub struct DebiasFixture {
    pub model: EmbeddingModel,
    pub definitional: Vec<(String, String)>,
    pub equalize: Vec<(String, String)>,
    pub gender_specific: Vec<String>,
}

pub fn debias_fixture<R: Rng>(
    rng: &mut R,
    vocab: usize,
    dim: usize,
    n_def: usize,
    n_eq: usize,
) -> DebiasFixture {
    assert!(vocab >= 2 * (n_def + n_eq) + 10 && dim >= 2);
    let mut rows: Vec<(String, Vec<f32>)> = Vec::with_capacity(vocab);
    let gendered = |rng: &mut R, sign: f32| {
        let mut v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-0.3..0.3)).collect();
        v[0] = sign * rng.gen_range(0.6..1.0);
        v
    };
    let mut definitional = Vec::new();
    for i in 0..n_def {
        let (f, m) = (format!("def{i}a"), format!("def{i}o"));
        rows.push((f.clone(), gendered(rng, 1.0)));
        rows.push((m.clone(), gendered(rng, -1.0)));
        definitional.push((f, m));
    }
    let mut equalize = Vec::new();
    for i in 0..n_eq {
        let (f, m) = (format!("eq{i}a"), format!("eq{i}o"));
        rows.push((f.clone(), gendered(rng, 1.0)));
        rows.push((m.clone(), gendered(rng, -1.0)));
        equalize.push((f, m));
    }
    let gender_specific: Vec<String> = (0..5).map(|i| format!("gs{i}")).collect();
    for (i, w) in gender_specific.iter().enumerate() {
        rows.push((
            w.clone(),
            gendered(rng, if i % 2 == 0 { 1.0 } else { -1.0 }),
        ));
    }
    while rows.len() < vocab {
        let mut v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // neutral words carry some gender component before debiasing
        v[0] *= 0.5;
        rows.push((format!("n{}", rows.len()), v));
    }
    DebiasFixture {
        model: EmbeddingModel::from_rows(dim, rows).unwrap(),
        definitional,
        equalize,
        gender_specific,
    }
}

impl DebiasFixture {
    pub fn config(&self, method: SubspaceMethod) -> DebiasConfig {
        let pairs = |v: &[(String, String)]| {
            v.iter()
                .map(|(f, m)| ProfessionPair::new(f.as_str(), m.as_str()).unwrap())
                .collect()
        };
        DebiasConfig {
            definitional_pairs: pairs(&self.definitional),
            equalize_pairs: pairs(&self.equalize),
            gender_specific: self.gender_specific.clone(),
            subspace_method: method,
            pca_components: 1,
        }
    }
}
