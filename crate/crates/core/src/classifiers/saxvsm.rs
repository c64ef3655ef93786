use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bagging::{bag_series, BagConfig, Discretisation, SparseHistogram};
use crate::classifiers::accuracy_of;
use crate::data::LabeledDataset;
use crate::distances::{Measure, SparseVector, WeightedVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbolic::Approximation;

/// `ln(1 + tf) * ln(c / df)`, or 0 for a word no class contains.
pub fn tfidf_weight(tf: u64, df: usize, c: usize) -> f64 {
    if df == 0 {
        return 0.0;
    }
    (tf as f64).ln_1p() * (c as f64 / df as f64).ln()
}

/// Class-level tf·idf vectors over SAX words, compared by cosine similarity.
#[derive(Clone, Debug)]
pub struct SaxVsm {
    pub bag_config: BagConfig,
    pub class_vectors: Vec<WeightedVector>,
}

impl SaxVsm {
    pub fn bag_config(w: usize, l: usize, alpha: usize) -> BagConfig {
        BagConfig {
            w,
            l,
            alpha,
            p: false,
            approx: Approximation::Paa,
            disc: Discretisation::Gaussian,
            numerosity: true,
        }
    }

    pub fn fit<T: Scalar>(train: &LabeledDataset<T>, w: usize, l: usize, alpha: usize) -> Result<Self> {
        let bag_config = Self::bag_config(w, l, alpha);
        let bags = train
            .series()
            .par_iter()
            .map(|s| bag_series(s.values(), &bag_config, None))
            .collect::<Result<Vec<_>>>()?;
        let class_vectors = Self::class_vectors(&bags, train.labels(), train.n_classes())?;
        Ok(SaxVsm {
            bag_config,
            class_vectors,
        })
    }

    /// Pools bags per class and weights each `(class, word)` by tf·idf.
    pub fn class_vectors(bags: &[SparseHistogram], labels: &[usize], n_classes: usize) -> Result<Vec<WeightedVector>> {
        let mut tf: Vec<BTreeMap<u64, u64>> = vec![BTreeMap::new(); n_classes];
        let mut cases = vec![0usize; n_classes];
        for (bag, &c) in bags.iter().zip(labels) {
            cases[c] += 1;
            for &(k, n) in bag.entries() {
                *tf[c].entry(k).or_default() += n as u64;
            }
        }
        if let Some(c) = cases.iter().position(|&n| n == 0) {
            return Err(Error::input(format!("class {c} has no training cases")));
        }
        let mut df: BTreeMap<u64, usize> = BTreeMap::new();
        for class in &tf {
            for &k in class.keys() {
                *df.entry(k).or_default() += 1;
            }
        }
        tf.iter()
            .map(|class| WeightedVector::new(class.iter().map(|(&k, &t)| (k, tfidf_weight(t, df[&k], n_classes)))))
            .collect()
    }

    /// Class whose vector has the highest cosine with the query's word counts.
    pub fn predict<T: Scalar>(&self, series: &[T]) -> Result<usize> {
        let bag = bag_series(series, &self.bag_config, None)?;
        let query = WeightedVector::new((0..bag.n_entries()).map(|i| bag.entry(i)))?;
        let mut best = (0, f64::INFINITY);
        for (c, v) in self.class_vectors.iter().enumerate() {
            let s = Measure::Cosine.score(&query, v, f64::INFINITY);
            if s < best.1 {
                best = (c, s);
            }
        }
        Ok(best.0)
    }

    pub fn predict_dataset<T: Scalar>(&self, data: &LabeledDataset<T>) -> Result<Vec<usize>> {
        data.series().par_iter().map(|s| self.predict(s.values())).collect()
    }

    pub fn accuracy<T: Scalar>(&self, data: &LabeledDataset<T>) -> Result<f64> {
        accuracy_of(&self.predict_dataset(data)?, data.labels())
    }
}
