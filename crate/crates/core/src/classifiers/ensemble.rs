use rayon::prelude::*;

use crate::bagging::{bag_dataset, bag_series, BagConfig, SparseHistogram};
use crate::classifiers::grid::{grid_search, CellScore, MemberParams};
use crate::classifiers::nn::nn_classify;
use crate::classifiers::DictionaryConfig;
use crate::data::LabeledDataset;
use crate::distances::Measure;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbolic::BreakpointTable;

/// Fraction of the best training accuracy a member needs to be retained.
pub const RETENTION: f64 = 0.92;

/// Absorbs rounding in `RETENTION * best` so exact ratios are retained.
const RETENTION_TOLERANCE: f64 = 1e-12;

/// Length of the prefix of `accuracies` (sorted descending) that is retained.
pub fn retained_len(accuracies: &[f64], ensemble: bool) -> usize {
    let Some(&best) = accuracies.first() else {
        return 0;
    };
    if !ensemble {
        return 1;
    }
    let threshold = RETENTION * best - RETENTION_TOLERANCE;
    accuracies.iter().take_while(|&&a| a >= threshold).count()
}

/// Keeps every cell within 92% of the best, or only the best without ensembling.
pub fn retain_ensemble(scores: &[CellScore], ensemble: bool) -> Vec<CellScore> {
    let accs: Vec<f64> = scores.iter().map(|s| s.accuracy).collect();
    scores[..retained_len(&accs, ensemble)].to_vec()
}

/// The most frequent label; ties go to the lowest class index.
pub fn majority_vote(votes: &[usize], n_classes: usize) -> Result<usize> {
    if votes.is_empty() {
        return Err(Error::input("majority vote over no votes"));
    }
    let mut counts = vec![0usize; n_classes.max(votes.iter().max().map_or(0, |&m| m + 1))];
    for &v in votes {
        counts[v] += 1;
    }
    let best = *counts.iter().max().expect("non-empty counts");
    Ok(counts.iter().position(|&c| c == best).expect("maximum present"))
}

/// One retained parameter cell with the training bags it classifies against.
#[derive(Clone, Debug)]
pub struct EnsembleMember<T> {
    pub params: MemberParams,
    pub bag_config: BagConfig,
    pub train_bags: Vec<(SparseHistogram, usize)>,
    pub disc_model: Option<BreakpointTable<T>>,
    pub train_acc: f64,
}

impl<T: Scalar> EnsembleMember<T> {
    pub fn build(train: &LabeledDataset<T>, cfg: &DictionaryConfig, score: &CellScore) -> Result<Self> {
        let bag_config = score.params.bag_config(cfg);
        let bagged = bag_dataset(train, &bag_config)?;
        Ok(EnsembleMember {
            params: score.params,
            bag_config,
            train_bags: bagged.bags,
            disc_model: bagged.model,
            train_acc: score.accuracy,
        })
    }

    pub fn transform(&self, series: &[T]) -> Result<SparseHistogram> {
        bag_series(series, &self.bag_config, self.disc_model.as_ref())
    }

    pub fn classify(&self, series: &[T], measure: Measure) -> Result<usize> {
        nn_classify(&self.transform(series)?, &self.train_bags, measure)
    }
}

/// Majority vote of the members' 1-NN predictions.
pub fn ensemble_classify<T: Scalar>(
    series: &[T],
    members: &[EnsembleMember<T>],
    measure: Measure,
    n_classes: usize,
) -> Result<usize> {
    let votes = members
        .iter()
        .map(|m| m.classify(series, measure))
        .collect::<Result<Vec<_>>>()?;
    majority_vote(&votes, n_classes)
}

/// A trained BOP/BOSS-family classifier.
#[derive(Clone, Debug)]
pub struct DictionaryClassifier<T> {
    pub config: DictionaryConfig,
    pub members: Vec<EnsembleMember<T>>,
    pub class_names: Vec<String>,
}

impl<T: Scalar> DictionaryClassifier<T> {
    /// Grid search, retention and member construction.
    pub fn fit(train: &LabeledDataset<T>, config: &DictionaryConfig) -> Result<Self> {
        let scores = grid_search(train, config)?;
        let kept = retain_ensemble(&scores, config.ensemble);
        log::info!(
            "{}: {} of {} cells retained, best train accuracy {:.4}",
            train.name(),
            kept.len(),
            scores.len(),
            kept[0].accuracy
        );
        Self::from_scores(train, config, &kept)
    }

    /// Builds members for already chosen cells.
    pub fn from_scores(train: &LabeledDataset<T>, config: &DictionaryConfig, kept: &[CellScore]) -> Result<Self> {
        let members = kept
            .par_iter()
            .map(|s| EnsembleMember::build(train, config, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(DictionaryClassifier {
            config: config.clone(),
            members,
            class_names: train.class_names().to_vec(),
        })
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn predict(&self, series: &[T]) -> Result<usize> {
        ensemble_classify(series, &self.members, self.config.measure, self.n_classes())
    }

    pub fn predict_dataset(&self, data: &LabeledDataset<T>) -> Result<Vec<usize>> {
        data.series().par_iter().map(|s| self.predict(s.values())).collect()
    }

    pub fn accuracy(&self, data: &LabeledDataset<T>) -> Result<f64> {
        accuracy_of(&self.predict_dataset(data)?, data.labels())
    }
}

pub(crate) fn accuracy_of(predicted: &[usize], labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::input("accuracy of an empty test set"));
    }
    let correct = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / labels.len() as f64)
}
