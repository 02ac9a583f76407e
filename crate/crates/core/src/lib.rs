//! Text classification of court rulings.
//!
//! The pipeline cleans a corpus of rulings, derives task labels (law area,
//! ruling outcome, decision period), masks every surface form of the target
//! label from the case description, extracts n-gram count features and
//! evaluates a one-vs-rest linear SVM against a stratified dummy baseline with
//! stratified k-fold cross-validation.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod labels;
pub mod masking;
pub mod svm;
pub mod textnorm;

pub use error::{Error, Result};
