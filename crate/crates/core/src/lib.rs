//! Probabilistic sentence embeddings where every word is a diagonal affine
//! operator on a Gaussian, plus word-averaging and word-summing baselines.
//!
//! A sentence starts as `z_0 ~ N(0, I)`; word `i` maps `z -> a_i ⊙ (z + b_i)`.
//! Models are trained on paraphrase pairs with a margin loss and evaluated
//! on how well entropy (or vector norm) tracks sentence specificity.
//!
//! Module map:
//!
//! - [`gauss`]: entropy, KL to the standard normal, expected log inner product, cosine
//! - [`vocab`], [`model`]: tokenization, vocabulary, encoders
//! - [`grad`]: analytic gradients and finite-difference checking
//! - [`train`]: mega-batch negatives, scrambling, sparse Adam, epoch loop
//! - [`eval`], [`stats`]: specificity, entailment and similarity protocols
//! - [`analyze`]: word and sentence profiles
//! - [`checkpoint`], [`data`]: file formats
//! - [`synth`]: synthetic corpus with planted specific words

pub mod analyze;
pub mod checkpoint;
pub mod data;
pub mod error;
pub mod eval;
pub mod gauss;
pub mod grad;
pub mod model;
pub mod stats;
pub mod synth;
pub mod train;
pub mod vocab;

pub use error::{Error, Result};
pub use gauss::DiagonalGaussian;
pub use model::{Model, ModelKind, Representation, WloOperator};
pub use train::{train, ParaphrasePair, TrainConfig, TrainingLog};
pub use vocab::{tokenize, Vocabulary};
