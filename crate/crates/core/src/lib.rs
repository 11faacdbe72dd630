//! Toolkit for auditing audio-captioning metrics, augmenting captioned audio
//! corpora and analysing caption vocabulary imbalance.
//!
//! - [`corpus`]: caption normalization, dataset ingestion, WAV I/O, manifests
//!   and vocabulary statistics.
//! - [`metrics`]: BLEU, ROUGE-L, METEOR-lite, CIDEr-D and FENSE-style scores.
//! - [`perturb`]: type-1/type-2 perturbation pairs and metric suitability.
//! - [`augment`]: concatenation and mixing augmentation.
//! - [`lossfn`]: vocabulary-balanced cross-entropy and focal loss.

pub mod augment;
pub mod corpus;
pub mod error;
pub mod lossfn;
pub mod metrics;
pub mod perturb;
pub mod report;
pub mod seed;

pub use corpus::{Caption, CaptionedClip, Corpus, Source};
pub use error::{Error, Result};
pub use metrics::{Metric, MetricScore, Scorer};
pub use perturb::{ErrorKind, PerturbationPair, SuitabilityResult, VerbLexicon};
