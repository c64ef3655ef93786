//! Dictionary-based time series classification.
//!
//! Every classifier in this crate follows the same four stages: a sliding
//! window is approximated (PAA or truncated DFT), discretised into a word
//! (Gaussian breakpoints or multiple coefficient binning), words are counted
//! into a sparse histogram with numerosity reduction, and histograms are
//! compared by a nearest-neighbour rule under a configurable measure.
//!
//! On top of the shared pipeline the crate provides:
//!
//! * the BOP/BOSS variant matrix ([`classifiers::Variant`]), including the
//!   92% retention ensemble,
//! * SAXVSM class vectors with tf·idf weighting ([`classifiers::saxvsm`]),
//! * spatial-pyramid BOSS ([`pyramid`]),
//! * bag of temporal SIFT words ([`botsw`]),
//! * UCR-format I/O, stratified resampling and a synthetic generator ([`data`]),
//! * rank statistics for comparing classifiers over many datasets ([`eval`]).
//!
//! Signal-processing code is generic over the [`Scalar`] trait, so `f32` and
//! `f64` series are both supported. Histograms and distances always work in
//! `f64`. The aliases at the crate root fix the common `f64` instantiations.

pub mod bagging;
pub mod botsw;
pub mod classifiers;
pub mod data;
pub mod distances;
pub mod error;
pub mod eval;
pub mod pyramid;
pub mod scalar;
pub mod symbolic;

pub use bagging::{Approximation, BagConfig, Discretisation, SparseHistogram};
pub use distances::{Measure, WeightedVector};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use symbolic::Word;

/// A univariate series of `f64` values.
pub type Series = data::TimeSeries<f64>;
/// A labelled `f64` dataset, the usual unit of work.
pub type Dataset = data::LabeledDataset<f64>;
/// Single precision dataset.
pub type Dataset32 = data::LabeledDataset<f32>;
/// Fitted breakpoints over `f64` coefficients.
pub type Breakpoints = symbolic::BreakpointTable<f64>;
/// BOTSW codebook over `f64` descriptors.
pub type Codebook = botsw::Codebook<f64>;
/// A BOP/BOSS-family classifier over `f64` series.
pub type DictionaryClassifier = classifiers::DictionaryClassifier<f64>;
/// Spatial-pyramid BOSS over `f64` series.
pub type SpClassifier = pyramid::SpClassifier<f64>;
/// BOTSW ensemble over `f64` series.
pub type BotswClassifier = botsw::BotswClassifier<f64>;
