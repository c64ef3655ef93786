//! Bag of temporal SIFT words: gradient-block descriptors at regularly
//! sampled keypoints over several Gaussian scales, quantised against a
//! k-means codebook into signed-square-root, l2-normalised bags.

mod descriptor;
mod kmeans;

pub use descriptor::{describe_keypoint, gaussian_filter, gaussian_kernel, sample_keypoints};
pub use kmeans::{kmeans_fit, kmeans_plus_plus, lloyd, Codebook, KMeansFit, MAX_ITERATIONS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{accuracy_of, loocv_correct, majority_vote, nn_classify, retained_len};
use crate::data::LabeledDataset;
use crate::distances::{Measure, WeightedVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `1.6 * 2^(j/2)` for `j = 0..n_s`.
pub fn default_scales(n_s: usize) -> Vec<f64> {
    (0..n_s).map(|j| 1.6 * 2f64.powf(j as f64 / 2.0)).collect()
}

/// Keypoint sampling and scale settings shared by every grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub r: usize,
    pub scales: Vec<f64>,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            r: 4,
            scales: default_scales(4),
        }
    }
}

/// Descriptor and codebook size of one BOTSW model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BotswParams {
    pub n_b: usize,
    pub a: usize,
    pub k: usize,
}

/// Candidate values of the searched BOTSW parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BotswGrid {
    pub n_b: Vec<usize>,
    pub a: Vec<usize>,
    pub k: Vec<usize>,
}

impl Default for BotswGrid {
    fn default() -> Self {
        BotswGrid {
            n_b: vec![4, 8, 12, 16, 20],
            a: vec![4, 8],
            k: vec![32, 64, 128, 256, 512, 1024],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BotswConfig {
    pub grid: BotswGrid,
    pub sampling: Sampling,
    pub measure: Measure,
    pub seed: u64,
}

impl BotswConfig {
    pub fn new(measure: Measure) -> Self {
        BotswConfig {
            grid: BotswGrid::default(),
            sampling: Sampling::default(),
            measure,
            seed: 0,
        }
    }
}

/// The series smoothed at every scale.
pub fn filter_scales<T: Scalar>(series: &[T], sampling: &Sampling) -> Result<Vec<Vec<T>>> {
    sampling.scales.iter().map(|&s| gaussian_filter(series, s)).collect()
}

/// Descriptors of every keypoint at every scale, scale-major.
pub fn describe_filtered<T: Scalar>(filtered: &[Vec<T>], r: usize, n_b: usize, a: usize) -> Result<Vec<Vec<T>>> {
    let mut out = Vec::new();
    for f in filtered {
        for pos in sample_keypoints(f.len(), r)? {
            out.push(describe_keypoint(f, pos, n_b, a)?);
        }
    }
    Ok(out)
}

/// Signed square root of every entry, then l2 normalisation. A zero vector
/// stays zero.
pub fn ssr_l2(values: &[f64]) -> Vec<f64> {
    let ssr: Vec<f64> = values.iter().map(|&x| x.signum() * x.abs().sqrt()).collect();
    let norm = ssr.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return ssr;
    }
    ssr.into_iter().map(|v| v / norm).collect()
}

/// Codeword histogram of a set of descriptors, normalised by [`ssr_l2`].
pub fn quantise<T: Scalar>(descriptors: &[Vec<T>], codebook: &Codebook<T>) -> Result<WeightedVector> {
    let mut counts = vec![0.0; codebook.k()];
    for d in descriptors {
        counts[codebook.nearest(d).0] += 1.0;
    }
    WeightedVector::from_dense(&ssr_l2(&counts))
}

/// BOTSW bag of one series.
pub fn botsw_bag<T: Scalar>(
    series: &[T],
    codebook: &Codebook<T>,
    sampling: &Sampling,
    n_b: usize,
    a: usize,
) -> Result<WeightedVector> {
    if codebook.dim() != 2 * n_b {
        return Err(Error::param(format!(
            "codebook has dimension {} but descriptors have {}",
            codebook.dim(),
            2 * n_b
        )));
    }
    let filtered = filter_scales(series, sampling)?;
    quantise(&describe_filtered(&filtered, sampling.r, n_b, a)?, codebook)
}

/// A retained BOTSW model.
#[derive(Clone, Debug)]
pub struct BotswMember<T> {
    pub params: BotswParams,
    pub codebook: Codebook<T>,
    pub train_bags: Vec<(WeightedVector, usize)>,
    pub train_acc: f64,
}

impl<T: Scalar> BotswMember<T> {
    pub fn classify(&self, series: &[T], sampling: &Sampling, measure: Measure) -> Result<usize> {
        let bag = botsw_bag(series, &self.codebook, sampling, self.params.n_b, self.params.a)?;
        nn_classify(&bag, &self.train_bags, measure)
    }
}

/// Fits every grid cell on the training set and keeps those within 92% of
/// the best leave-one-out accuracy. Members are ordered by accuracy
/// descending, ties by `(n_b, a, k)` ascending.
pub fn build_botsw_ensemble<T: Scalar>(train: &LabeledDataset<T>, config: &BotswConfig) -> Result<Vec<BotswMember<T>>> {
    if train.len() < 2 {
        return Err(Error::input("BOTSW ensemble needs at least two training cases"));
    }
    let grid = &config.grid;
    if grid.n_b.is_empty() || grid.a.is_empty() || grid.k.is_empty() {
        return Err(Error::config("every BOTSW grid axis needs at least one value"));
    }
    let filtered = train
        .series()
        .par_iter()
        .map(|s| filter_scales(s.values(), &config.sampling))
        .collect::<Result<Vec<_>>>()?;
    let n = train.len() as f64;
    let mut members = Vec::new();
    for &n_b in &grid.n_b {
        for &a in &grid.a {
            let per_series = filtered
                .par_iter()
                .map(|f| describe_filtered(f, config.sampling.r, n_b, a))
                .collect::<Result<Vec<_>>>()?;
            let pooled: Vec<Vec<T>> = per_series.iter().flatten().cloned().collect();
            for &k in &grid.k {
                let fit = kmeans_fit(&pooled, k, config.seed)?;
                let bags = per_series
                    .par_iter()
                    .zip(train.labels().par_iter())
                    .map(|(d, &c)| Ok((quantise(d, &fit.codebook)?, c)))
                    .collect::<Result<Vec<_>>>()?;
                let acc = loocv_correct(&bags, config.measure) as f64 / n;
                log::debug!("BOTSW n_b={n_b} a={a} k={k}: {acc:.4}");
                members.push(BotswMember {
                    params: BotswParams { n_b, a, k },
                    codebook: fit.codebook,
                    train_bags: bags,
                    train_acc: acc,
                });
            }
        }
    }
    members.sort_by(|x, y| {
        y.train_acc
            .partial_cmp(&x.train_acc)
            .expect("finite accuracy")
            .then_with(|| x.params.cmp(&y.params))
    });
    let accs: Vec<f64> = members.iter().map(|m| m.train_acc).collect();
    members.truncate(retained_len(&accs, true));
    Ok(members)
}

/// BOTSW ensemble classifier.
#[derive(Clone, Debug)]
pub struct BotswClassifier<T> {
    pub config: BotswConfig,
    pub members: Vec<BotswMember<T>>,
    pub class_names: Vec<String>,
}

impl<T: Scalar> BotswClassifier<T> {
    pub fn fit(train: &LabeledDataset<T>, config: &BotswConfig) -> Result<Self> {
        Ok(BotswClassifier {
            config: config.clone(),
            members: build_botsw_ensemble(train, config)?,
            class_names: train.class_names().to_vec(),
        })
    }

    pub fn predict(&self, series: &[T]) -> Result<usize> {
        let votes = self
            .members
            .iter()
            .map(|m| m.classify(series, &self.config.sampling, self.config.measure))
            .collect::<Result<Vec<_>>>()?;
        majority_vote(&votes, self.class_names.len())
    }

    pub fn predict_dataset(&self, data: &LabeledDataset<T>) -> Result<Vec<usize>> {
        data.series().par_iter().map(|s| self.predict(s.values())).collect()
    }

    pub fn accuracy(&self, data: &LabeledDataset<T>) -> Result<f64> {
        accuracy_of(&self.predict_dataset(data)?, data.labels())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ssr_then_l2() {
        let out = ssr_l2(&[4.0, 0.0, 9.0]);
        let s = 13f64.sqrt();
        assert_abs_diff_eq!(out[0], 2.0 / s, epsilon = 1e-15);
        assert_eq!(out[1], 0.0);
        assert_abs_diff_eq!(out[2], 3.0 / s, epsilon = 1e-15);
        assert_eq!(ssr_l2(&[7.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn default_scale_ladder() {
        let s = default_scales(4);
        assert_abs_diff_eq!(s[0], 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(s[2], 3.2, epsilon = 1e-12);
        assert_abs_diff_eq!(s[3] / s[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn bag_has_unit_norm() {
        let series: Vec<f64> = (0..64).map(|t| (t as f64 * 0.3).sin() * 2.0 + t as f64 * 0.01).collect();
        let sampling = Sampling::default();
        let filtered = filter_scales(&series, &sampling).unwrap();
        let descriptors = describe_filtered(&filtered, sampling.r, 4, 4).unwrap();
        let fit = kmeans_fit(&descriptors, 8, 3).unwrap();
        let bag = botsw_bag(&series, &fit.codebook, &sampling, 4, 4).unwrap();
        assert_abs_diff_eq!(bag.norm(), 1.0, epsilon = 1e-12);
        assert!(botsw_bag(&series, &fit.codebook, &sampling, 5, 4).is_err());
    }
}
