//! Personalized similar-product recommendations.
//!
//! The pipeline runs in two stages. A non-personalized candidate set is
//! generated per query item from item-item cosine similarity over the
//! sparse user-item rating matrix. A latent-factor model (implicit ALS or
//! BPR) then supplies per-user preference scores, and the final ranking
//! blends both signals with a configurable weight.
//!
//! Modules follow the pipeline order:
//!
//! * [`interactions`] — event ingestion and the weighted implicit rating matrix
//! * [`similarity`] — sparse cosine algebra and top-N candidate generation
//! * [`als`] — confidence-weighted alternating least squares
//! * [`bpr`] — Bayesian personalized ranking via SGD over sampled triplets
//! * [`model`] — shared latent-factor model container and text persistence
//! * [`rerank`] — alpha-blended final ranking over the candidate set
//! * [`eval`] — Precision/Recall/MAP@K and the query/ground-truth protocol
//! * [`synth`] — synthetic event-log generator with planted user tastes

pub mod als;
pub mod bpr;
pub mod error;
pub mod eval;
pub mod interactions;
pub mod model;
pub mod rerank;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};
