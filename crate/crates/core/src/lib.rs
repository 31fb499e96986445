//! Gender-bias auditing for word2vec-format embeddings.
//!
//! The crate covers the whole audit loop: load a model ([`io`]), probe it with
//! analogy queries ([`vector`]), measure profession-analogy accuracy and direct
//! bias ([`bias`]), apply hard debiasing ([`debias`]), and compare two accuracy
//! figures with a pooled two-proportion z-test ([`stats`]). Word lists and JSON
//! run reports used by the command-line tool live in [`wordlist`] and
//! [`report`].

pub mod bias;
pub mod debias;
pub mod error;
pub mod io;
pub mod model;
pub mod report;
pub mod stats;
pub mod vector;
pub mod wordlist;

pub use bias::{
    direct_bias, evaluate_professions, extreme_analogies, extreme_side, gender_direction_diff,
    gender_direction_pca, gender_subspace, BiasSubspace, EvaluationOptions, EvaluationReport,
    ExtremeReport, ExtremeRow, PairOutcome, ProfessionPair, Side, SubspaceMethod,
};
pub use debias::{equalize, hard_debias, neutralize, project_onto, DebiasConfig, DebiasOutcome};
pub use error::{Error, Result};
pub use io::{
    load_binary_model, load_model, load_path, load_text_model, to_bytes, write_model, Format,
};
pub use model::{EmbeddingModel, WordVector};
pub use report::{
    compare_evaluations, Comparison, DebiasSummary, ModelMeta, RunReport, RunResults,
    SCHEMA_VERSION,
};
pub use stats::{
    normal_cdf, normal_sf, two_proportion_z, ProportionTest, Significance, CONFIDENCE_LEVELS,
};
pub use vector::{
    cosine, most_similar, most_similar_with, top_neighbors, unit, AnalogyQuery, AnalogyResult,
    Neighbor, Scan,
};
pub use wordlist::{read_pairs, read_pairs_path, read_words, read_words_path, WordListKind};

/// Crate version, stamped into run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
