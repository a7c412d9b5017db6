//! Opinion distance toolkit.
//!
//! Represents free-text opinions as (subject, polarity) tuples — subjects come
//! from a gazetteer/TagMe concept spotter (`od`) or from dependency-tree
//! pattern extraction over pre-parsed sentences (`od-parse`) — then scores the
//! distance between two opinions by matching subjects with an exact optimal
//! transport plan and aggregating polarity differences over the mapped pairs.
//! Baseline distances (TF-IDF cosine, word-mover distance over word vectors,
//! precomputed document embeddings), clustering (k-means / k-medoids /
//! spectral), cluster-quality metrics (ARI, NMI, Silhouette, inter/intra
//! percent difference) and a supervised pairwise-classification protocol are
//! included, plus a batch CLI driving the whole pipeline.
//!
//! Numeric kernels (transport solver, difference functions, clustering,
//! metrics, logistic regression, vector math) are generic over the scalar
//! type via [`scalar::Real`]; the pipeline layer uses the concrete [`Scalar`]
//! alias.

pub mod corpus;
pub mod deppat;
pub mod distance;
pub mod evaluation;
pub mod lexicon;
pub mod matching;
pub mod pipeline;
pub mod polarity;
pub mod scalar;
pub mod semantics;
pub mod spotter;
pub mod synthetic;

/// Concrete scalar used by the pipeline layer.
pub type Scalar = f64;

pub use scalar::Real;
