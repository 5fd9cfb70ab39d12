//! Generic classifiers for TV-series reviews.
//!
//! Series-specific role and actor names are replaced with importance-ranked
//! surrogate tags (`role_1`, `actor_2`, ...) so that a classifier trained on
//! some series transfers to unseen ones. The crate covers the whole pipeline:
//!
//! - [`corpus`]: labeled review corpora and the annotator agreement filter
//! - [`preprocess`]: surrogate substitution, segmentation, stop words, vocabulary
//! - [`topic_model`]: collapsed Gibbs LDA used to survey a corpus
//! - [`feature_select`]: contingency tables, chi-square and DRC rankings
//! - [`classify`]: Bernoulli naive Bayes, logistic regression, linear SVM, one-vs-rest
//! - [`evaluate`]: synthetic corpora, feature-size sweeps, cross-series experiments
//! - [`cli`]: the `tvreview` command line

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod feature_select;
pub mod io;
pub mod preprocess;
pub mod topic_model;

pub use corpus::{Category, Corpus, Review};
pub use error::{Error, Result};
