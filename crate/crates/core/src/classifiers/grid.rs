use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bagging::{
    fit_mcb_from_approximations, keys_from_rows, surviving_windows, BagConfig, Discretisation, SparseHistogram,
};
use crate::classifiers::nn::loocv_correct;
use crate::classifiers::DictionaryConfig;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbolic::{check_word_space, Approximation, BreakpointTable, WindowApproximator};

/// Candidate values for each searched parameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub windows: Vec<usize>,
    pub word_lengths: Vec<usize>,
    pub alphas: Vec<usize>,
    pub p_values: Vec<bool>,
}

impl ParameterGrid {
    pub fn new(windows: Vec<usize>, word_lengths: Vec<usize>, alphas: Vec<usize>, p_values: Vec<bool>) -> Result<Self> {
        let grid = ParameterGrid {
            windows,
            word_lengths,
            alphas,
            p_values,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.windows.is_empty() || self.word_lengths.is_empty() || self.alphas.is_empty() || self.p_values.is_empty()
        {
            return Err(Error::config("every parameter grid axis needs at least one value"));
        }
        Ok(())
    }

    /// `w` in `10..=m`, `l` in `{8, 10, 12, 14, 16}`, `alpha = 4`, both `p`.
    pub fn boss(m: usize) -> Self {
        ParameterGrid {
            windows: (10..=m).collect(),
            word_lengths: vec![8, 10, 12, 14, 16],
            alphas: vec![4],
            p_values: vec![true, false],
        }
    }

    /// A single cell.
    pub fn single(w: usize, l: usize, alpha: usize, p: bool) -> Self {
        ParameterGrid {
            windows: vec![w],
            word_lengths: vec![l],
            alphas: vec![alpha],
            p_values: vec![p],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.windows.len() * self.word_lengths.len() * self.alphas.len() * self.p_values.len()
    }
}

/// Parameters of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MemberParams {
    pub w: usize,
    pub l: usize,
    pub alpha: usize,
    pub p: bool,
}

impl MemberParams {
    pub fn bag_config(&self, cfg: &DictionaryConfig) -> BagConfig {
        BagConfig {
            w: self.w,
            l: self.l,
            alpha: self.alpha,
            p: self.p,
            approx: cfg.approx,
            disc: cfg.disc,
            numerosity: cfg.numerosity,
        }
    }

    /// Sort key for deterministic ordering of equally accurate cells.
    pub(crate) fn order_key(&self) -> (usize, usize, bool, usize) {
        (self.w, self.l, self.p, self.alpha)
    }
}

/// A grid cell with its leave-one-out training accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub params: MemberParams,
    pub accuracy: f64,
}

/// Orders by accuracy descending, then `(w, l, p, alpha)` ascending.
pub(crate) fn sort_scores(scores: &mut [CellScore]) {
    scores.sort_by(|a, b| {
        b.accuracy
            .partial_cmp(&a.accuracy)
            .expect("finite accuracy")
            .then_with(|| a.params.order_key().cmp(&b.params.order_key()))
    });
}

fn viable(approx: Approximation, w: usize, l: usize, alpha: usize, p: bool, m: usize) -> bool {
    if w < 2 || w > m || check_word_space(l, alpha).is_err() {
        return false;
    }
    match approx {
        Approximation::Paa => (1..=w).contains(&l),
        Approximation::Dft => l > 0 && l % 2 == 0 && l / 2 + usize::from(p) <= w,
    }
}

/// Cells sharing `(alpha, w, p)` reuse one pass of window approximation.
struct Group {
    alpha: usize,
    w: usize,
    p: bool,
    ls: Vec<usize>,
}

fn groups(cfg: &DictionaryConfig, grid: &ParameterGrid, m: usize) -> Vec<Group> {
    // p only affects the Fourier approximation
    let mut p_values: Vec<bool> = match cfg.approx {
        Approximation::Paa => vec![false],
        Approximation::Dft => grid.p_values.clone(),
    };
    p_values.sort_unstable();
    p_values.dedup();
    let mut ls = grid.word_lengths.clone();
    ls.sort_unstable();
    ls.dedup();
    let mut out = Vec::new();
    for &alpha in &grid.alphas {
        for &w in &grid.windows {
            for &p in &p_values {
                let cell_ls: Vec<usize> = ls.iter().copied().filter(|&l| viable(cfg.approx, w, l, alpha, p, m)).collect();
                if !cell_ls.is_empty() {
                    out.push(Group { alpha, w, p, ls: cell_ls });
                }
            }
        }
    }
    out
}

fn bags_from_keys<T: Scalar>(
    approximations: &[Vec<T>],
    stride: usize,
    l: usize,
    table: &BreakpointTable<T>,
    numerosity: bool,
    labels: &[usize],
) -> Vec<(SparseHistogram, usize)> {
    approximations
        .iter()
        .zip(labels)
        .map(|(a, &label)| {
            let words = keys_from_rows(a, stride, l, table);
            (
                SparseHistogram::from_words(surviving_windows(&words, numerosity).map(|j| words[j])),
                label,
            )
        })
        .collect()
}

fn score_group<T: Scalar>(
    train: &LabeledDataset<T>,
    cfg: &DictionaryConfig,
    group: &Group,
) -> Result<Vec<CellScore>> {
    let labels = train.labels();
    let n = train.len() as f64;
    let mut scores = Vec::with_capacity(group.ls.len());
    let mut push = |l: usize, bags: Vec<(SparseHistogram, usize)>| {
        let correct = loocv_correct(&bags, cfg.measure);
        scores.push(CellScore {
            params: MemberParams {
                w: group.w,
                l,
                alpha: group.alpha,
                p: group.p,
            },
            accuracy: correct as f64 / n,
        });
    };
    match cfg.approx {
        Approximation::Paa => {
            for &l in &group.ls {
                let bag_cfg = MemberParams {
                    w: group.w,
                    l,
                    alpha: group.alpha,
                    p: group.p,
                }
                .bag_config(cfg);
                let approximator = bag_cfg.approximator()?;
                let approximations = train
                    .series()
                    .iter()
                    .map(|s| approximator.all_windows(s.values()))
                    .collect::<Result<Vec<_>>>()?;
                let table = match cfg.disc {
                    Discretisation::Mcb => fit_mcb_from_approximations(&approximations, &approximator, l, group.alpha)?,
                    Discretisation::Gaussian => BreakpointTable::<T>::gaussian(l, group.alpha)?,
                };
                push(l, bags_from_keys(&approximations, l, l, &table, cfg.numerosity, labels));
            }
        }
        Approximation::Dft => {
            // words for shorter l are prefixes of the longest word
            let l_max = *group.ls.last().expect("non-empty group");
            let standardise = cfg.disc == Discretisation::Gaussian;
            let approximator = WindowApproximator::new(Approximation::Dft, group.w, l_max, group.p, standardise)?;
            let approximations = train
                .series()
                .iter()
                .map(|s| approximator.all_windows(s.values()))
                .collect::<Result<Vec<_>>>()?;
            let full = match cfg.disc {
                Discretisation::Mcb => fit_mcb_from_approximations(&approximations, &approximator, l_max, group.alpha)?,
                Discretisation::Gaussian => BreakpointTable::<T>::gaussian(l_max, group.alpha)?,
            };
            for &l in &group.ls {
                let table = full.prefix(l)?;
                push(l, bags_from_keys(&approximations, l_max, l, &table, cfg.numerosity, labels));
            }
        }
    }
    Ok(scores)
}

/// Leave-one-out accuracy of every viable grid cell.
///
/// Cells the series length cannot support (`w > m`, PAA with `l > w`, odd or
/// too long DFT words) are skipped. The result is sorted by accuracy
/// descending, ties by `(w, l, p, alpha)` ascending.
pub fn grid_search<T: Scalar>(train: &LabeledDataset<T>, cfg: &DictionaryConfig) -> Result<Vec<CellScore>> {
    if train.len() < 2 {
        return Err(Error::input("grid search needs at least two training cases"));
    }
    let m = train.series_length();
    let grid = cfg.grid_for(m);
    grid.validate()?;
    let groups = groups(cfg, &grid, m);
    if groups.is_empty() {
        return Err(Error::config(format!(
            "no parameter cell is viable for series of length {m}"
        )));
    }
    log::debug!("{}: {} window groups", train.name(), groups.len());
    let per_group = groups
        .par_iter()
        .map(|g| score_group(train, cfg, g))
        .collect::<Result<Vec<_>>>()?;
    let mut scores: Vec<CellScore> = per_group.into_iter().flatten().collect();
    sort_scores(&mut scores);
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paa_ignores_p_and_drops_long_words() {
        let cfg = DictionaryConfig {
            grid: Some(ParameterGrid::new(vec![4, 6], vec![4, 5, 6], vec![4], vec![true, false]).unwrap()),
            ..DictionaryConfig::bop()
        };
        let gs = groups(&cfg, cfg.grid.as_ref().unwrap(), 20);
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0].ls, vec![4]);
        assert_eq!(gs[1].ls, vec![4, 5, 6]);
        assert!(gs.iter().all(|g| !g.p));
    }

    #[test]
    fn dft_needs_even_words_that_fit() {
        assert!(viable(Approximation::Dft, 10, 8, 4, true, 100));
        assert!(!viable(Approximation::Dft, 10, 9, 4, true, 100));
        assert!(!viable(Approximation::Dft, 8, 16, 4, true, 100));
        assert!(viable(Approximation::Dft, 8, 16, 4, false, 100));
        assert!(!viable(Approximation::Dft, 101, 8, 4, false, 100));
    }

    #[test]
    fn ties_sort_by_parameters() {
        let mk = |w, l, p, acc| CellScore {
            params: MemberParams { w, l, alpha: 4, p },
            accuracy: acc,
        };
        let mut s = vec![mk(12, 8, true, 0.5), mk(10, 10, false, 0.5), mk(10, 8, true, 0.5), mk(30, 8, false, 0.9)];
        sort_scores(&mut s);
        let order: Vec<_> = s.iter().map(|c| (c.params.w, c.params.l, c.params.p)).collect();
        assert_eq!(order, vec![(30, 8, false), (10, 8, true), (10, 10, false), (12, 8, true)]);
    }
}
