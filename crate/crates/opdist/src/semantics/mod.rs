//! Semantic-distance providers: word-vector stores, precomputed embedding
//! tables, TF-IDF vectors, stopwords, and word-mover distance over texts.

mod tfidf;
mod word2vec;

pub use tfidf::TfidfModel;
pub use word2vec::{load_word_vectors, save_word_vectors_binary, VectorFormat};

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::matching::transport::solve_transport_with_masses;
use crate::scalar::Real;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
    #[error("vector for word #{index} ({word:?}) has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        word: String,
        got: usize,
        expected: usize,
    },
    #[error("cosine distance undefined for a zero vector")]
    ZeroVector,
    #[error("vectors have mismatched dimensions {0} vs {1}")]
    MixedDimensions(usize, usize),
}

/// Dense word vectors of a fixed dimension.
#[derive(Debug, Clone, Default)]
pub struct VectorStore<F = Scalar> {
    vectors: HashMap<String, Vec<F>>,
    dim: usize,
}

impl<F: Real> VectorStore<F> {
    pub fn from_entries<I, S>(entries: I) -> Result<Self, SemanticsError>
    where
        I: IntoIterator<Item = (S, Vec<F>)>,
        S: Into<String>,
    {
        let mut store = VectorStore {
            vectors: HashMap::new(),
            dim: 0,
        };
        for (word, vec) in entries {
            store.insert(word.into(), vec)?;
        }
        Ok(store)
    }

    pub(crate) fn insert(&mut self, word: String, vec: Vec<F>) -> Result<(), SemanticsError> {
        if self.dim == 0 {
            self.dim = vec.len();
        } else if vec.len() != self.dim {
            return Err(SemanticsError::MixedDimensions(self.dim, vec.len()));
        }
        self.vectors.insert(word, vec);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[F]> {
        self.vectors.get(word).map(|v| v.as_slice())
    }

    /// Deterministically ordered (word, vector) pairs, for serialization.
    pub fn sorted_entries(&self) -> Vec<(&str, &[F])> {
        let mut entries: Vec<(&str, &[F])> = self
            .vectors
            .iter()
            .map(|(w, v)| (w.as_str(), v.as_slice()))
            .collect();
        entries.sort_by_key(|(w, _)| *w);
        entries
    }
}

/// Mean of the in-vocabulary token vectors; `None` when every token is OOV.
pub fn phrase_vector<F: Real, S: AsRef<str>>(
    store: &VectorStore<F>,
    phrase: &[S],
) -> Option<Vec<F>> {
    let hits: Vec<&[F]> = phrase
        .iter()
        .filter_map(|t| store.get(t.as_ref()))
        .collect();
    if hits.is_empty() {
        return None;
    }
    let mut mean = vec![F::zero(); store.dim()];
    for v in &hits {
        for (m, x) in mean.iter_mut().zip(v.iter()) {
            *m = *m + *x;
        }
    }
    let count = F::from_usize_c(hits.len());
    for m in &mut mean {
        *m = *m / count;
    }
    Some(mean)
}

/// Cosine distance clamped to [0, 1]. Errors on zero vectors.
pub fn semantic_distance<F: Real>(u: &[F], v: &[F]) -> Result<F, SemanticsError> {
    if u.len() != v.len() {
        return Err(SemanticsError::MixedDimensions(u.len(), v.len()));
    }
    let dot: F = u.iter().zip(v.iter()).map(|(&a, &b)| a * b).sum();
    let nu: F = u.iter().map(|&a| a * a).sum::<F>().sqrt();
    let nv: F = v.iter().map(|&b| b * b).sum::<F>().sqrt();
    if nu == F::zero() || nv == F::zero() {
        return Err(SemanticsError::ZeroVector);
    }
    let sim = dot / (nu * nv);
    Ok((F::one() - sim).max(F::zero()).min(F::one()))
}

/// File-loaded opinion- or concept-level embeddings (stand-in for document
/// embedding models).
#[derive(Debug, Clone, Default)]
pub struct PrecomputedEmbeddings<F = Scalar> {
    vectors: HashMap<String, Vec<F>>,
    dim: usize,
}

impl<F: Real> PrecomputedEmbeddings<F> {
    pub fn get(&self, id: &str) -> Option<&[F]> {
        self.vectors.get(id).map(|v| v.as_slice())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Load a TSV of `id\tv1\t...\tvD` rows with a uniform dimension.
pub fn load_precomputed_embeddings<F: Real>(
    path: &Path,
) -> Result<PrecomputedEmbeddings<F>, SemanticsError> {
    let raw = fs::read_to_string(path).map_err(|source| SemanticsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut vectors = HashMap::new();
    let mut dim = 0usize;
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let id = parts.next().unwrap_or_default().to_string();
        let values: Result<Vec<F>, _> = parts
            .map(|p| {
                p.trim().parse::<f64>().map(F::from_f64_c).map_err(|_| {
                    SemanticsError::Malformed {
                        path: path.display().to_string(),
                        message: format!("line {}: bad number {p:?}", idx + 1),
                    }
                })
            })
            .collect();
        let values = values?;
        if values.is_empty() || id.is_empty() {
            return Err(SemanticsError::Malformed {
                path: path.display().to_string(),
                message: format!("line {}: expected id\\tv1..vD", idx + 1),
            });
        }
        if dim == 0 {
            dim = values.len();
        } else if values.len() != dim {
            return Err(SemanticsError::DimensionMismatch {
                index: idx,
                word: id,
                got: values.len(),
                expected: dim,
            });
        }
        vectors.insert(id, values);
    }
    Ok(PrecomputedEmbeddings { vectors, dim })
}

/// Stopword set, one lowercased word per line.
pub type Stopwords = BTreeSet<String>;

pub fn load_stopwords(path: &Path) -> Result<Stopwords, SemanticsError> {
    let raw = fs::read_to_string(path).map_err(|source| SemanticsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_stopwords(&raw))
}

pub fn default_stopwords() -> Stopwords {
    parse_stopwords(include_str!("../../resources/stopwords.txt"))
}

fn parse_stopwords(raw: &str) -> Stopwords {
    raw.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

/// How subject phrases/concepts are embedded for the cost matrix.
pub enum SemanticProvider<'a> {
    /// Mean word vector over the phrase tokens.
    WordVectors(&'a VectorStore<Scalar>),
    /// Lookup by canonical concept id.
    Precomputed(&'a PrecomputedEmbeddings<Scalar>),
}

impl SemanticProvider<'_> {
    /// Embedding for a subject given its canonical id and phrase tokens.
    pub fn subject_vector(&self, canonical: &str, tokens: &[String]) -> Option<Vec<Scalar>> {
        match self {
            SemanticProvider::WordVectors(store) => phrase_vector(store, tokens),
            SemanticProvider::Precomputed(embs) => embs.get(canonical).map(|v| v.to_vec()),
        }
    }
}

/// Word-mover distance between two token multisets: exact transport between
/// normalized term-frequency masses over in-vocabulary non-stopword tokens,
/// with cosine ground costs. `None` when either side has no mass.
pub fn text_wmd<F: Real, S: AsRef<str>>(
    tokens1: &[S],
    tokens2: &[S],
    store: &VectorStore<F>,
    stopwords: &Stopwords,
) -> Option<F> {
    let masses = |tokens: &[S]| -> (Vec<String>, Vec<F>) {
        let mut counts: Vec<(String, usize)> = Vec::new();
        for t in tokens {
            let t = t.as_ref();
            if stopwords.contains(t) || store.get(t).is_none() {
                continue;
            }
            match counts.iter_mut().find(|(w, _)| w == t) {
                Some((_, c)) => *c += 1,
                None => counts.push((t.to_string(), 1)),
            }
        }
        let total: usize = counts.iter().map(|(_, c)| c).sum();
        let total = F::from_usize_c(total.max(1));
        let words = counts.iter().map(|(w, _)| w.clone()).collect();
        let mass = counts
            .iter()
            .map(|(_, c)| F::from_usize_c(*c) / total)
            .collect();
        (words, mass)
    };
    let (words1, mass1) = masses(tokens1);
    let (words2, mass2) = masses(tokens2);
    if words1.is_empty() || words2.is_empty() {
        return None;
    }
    let mut cost = Vec::with_capacity(words1.len() * words2.len());
    for w1 in &words1 {
        for w2 in &words2 {
            let d = semantic_distance(store.get(w1).unwrap(), store.get(w2).unwrap())
                .expect("store vectors are nonzero in practice");
            cost.push(d);
        }
    }
    Some(solve_transport_with_masses(&cost, &mass1, &mass2).objective)
}
