use std::collections::HashMap;

use crate::error::{Error, Result};

/// A vocabulary-indexed dense `f32` matrix.
///
/// Row `i` of the matrix is the vector of `vocab()[i]`; vocabulary order is the
/// order the words were supplied in (file order for loaded models). Models are
/// immutable once built. Transforms such as debiasing construct a new model.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    dim: usize,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Vec<f32>,
    // L2 norm of every row, accumulated in f64. Used to score rows by cosine
    // without keeping a second, unit-normalized copy of the matrix.
    norms: Vec<f64>,
}

/// A borrowed view of one row of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordVector<'a> {
    pub word: &'a str,
    pub values: &'a [f32],
}

impl EmbeddingModel {
    /// Builds a model from a vocabulary and a row-major matrix.
    ///
    /// Rejects a zero dimension, a matrix whose length is not
    /// `vocab.len() * dim`, duplicate words and non-finite values.
    pub fn new(vocab: Vec<String>, dim: usize, matrix: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::MalformedHeader("dimension must be positive".into()));
        }
        if matrix.len() != vocab.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: vocab.len() * dim,
                found: matrix.len(),
            });
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (row, word) in vocab.iter().enumerate() {
            if let Some(&first) = index.get(word.as_str()) {
                return Err(Error::DuplicateWord {
                    word: word.clone(),
                    record: row,
                    first,
                });
            }
            index.insert(word.clone(), row);
        }
        for (row, values) in matrix.chunks_exact(dim).enumerate() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    word: vocab[row].clone(),
                    record: row,
                });
            }
        }
        let norms = row_norms(&matrix, dim);
        Ok(Self {
            dim,
            vocab,
            index,
            matrix,
            norms,
        })
    }

    /// Builds a model from `(word, vector)` rows.
    pub fn from_rows<S, I>(dim: usize, rows: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<f32>)>,
    {
        let mut vocab = Vec::new();
        let mut matrix = Vec::new();
        for (word, values) in rows {
            if values.len() != dim {
                return Err(Error::Arity {
                    record: vocab.len(),
                    expected: dim,
                    found: values.len(),
                });
            }
            vocab.push(word.into());
            matrix.extend_from_slice(&values);
        }
        Self::new(vocab, dim, matrix)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// The whole row-major matrix.
    pub fn matrix(&self) -> &[f32] {
        &self.matrix
    }

    /// Row id of `word`, exact match (case and diacritics significant).
    pub fn row_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.matrix[row * self.dim..(row + 1) * self.dim]
    }

    pub fn word(&self, row: usize) -> &str {
        &self.vocab[row]
    }

    pub(crate) fn norm(&self, row: usize) -> f64 {
        self.norms[row]
    }

    /// Exact-match lookup; `None` when the word is out of vocabulary.
    pub fn lookup(&self, word: &str) -> Option<WordVector<'_>> {
        self.row_of(word).map(|row| WordVector {
            word: &self.vocab[row],
            values: self.row(row),
        })
    }

    /// Like [`lookup`](Self::lookup) but reports the missing word as an error.
    pub fn require(&self, word: &str) -> Result<usize> {
        self.row_of(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))
    }

    pub fn iter(&self) -> impl Iterator<Item = WordVector<'_>> {
        self.vocab
            .iter()
            .zip(self.matrix.chunks_exact(self.dim))
            .map(|(word, values)| WordVector { word, values })
    }

    /// Keeps the first `limit` rows.
    pub fn truncated(&self, limit: usize) -> Self {
        let n = limit.min(self.len());
        let vocab = self.vocab[..n].to_vec();
        let index = vocab
            .iter()
            .enumerate()
            .map(|(row, w)| (w.clone(), row))
            .collect();
        Self {
            dim: self.dim,
            vocab,
            index,
            matrix: self.matrix[..n * self.dim].to_vec(),
            norms: self.norms[..n].to_vec(),
        }
    }

    /// Same vocabulary, new matrix. Callers guarantee shape and finiteness.
    pub(crate) fn with_matrix(&self, matrix: Vec<f32>) -> Self {
        debug_assert_eq!(matrix.len(), self.matrix.len());
        debug_assert!(matrix.iter().all(|v| v.is_finite()));
        let norms = row_norms(&matrix, self.dim);
        Self {
            dim: self.dim,
            vocab: self.vocab.clone(),
            index: self.index.clone(),
            matrix,
            norms,
        }
    }

    /// Bitwise equality of vocabulary, dimension and every stored float.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.vocab == other.vocab
            && self.matrix.len() == other.matrix.len()
            && self
                .matrix
                .iter()
                .zip(&other.matrix)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl PartialEq for EmbeddingModel {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vocab == other.vocab && self.matrix == other.matrix
    }
}

fn row_norms(matrix: &[f32], dim: usize) -> Vec<f64> {
    matrix
        .chunks_exact(dim)
        .map(|row| {
            row.iter()
                .map(|&x| f64::from(x) * f64::from(x))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}
