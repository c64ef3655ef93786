//! Spatial pyramids over BOSS bags and the pyramid ensemble.
//!
//! Level `l` (1-based) of an `L`-level pyramid splits the series into
//! `2^(l-1)` contiguous segments; every surviving window is counted in the
//! segment containing its start index at every level, and segment counts are
//! weighted by `1 / 2^(L-l)`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bagging::{
    bag_dataset, fit_mcb_from_approximations, keys_from_rows, series_words, surviving_windows, BagConfig,
    Discretisation, SparseHistogram,
};
use crate::classifiers::{loocv_correct, majority_vote, nearest_index, MemberParams, ParameterGrid};
use crate::data::LabeledDataset;
use crate::distances::{boss_distance, histogram_intersection, Measure, SparseVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbolic::{Approximation, BreakpointTable, WindowApproximator};

/// Largest pyramid depth searched.
pub const MAX_LEVELS: usize = 3;

/// Maximum number of pyramid ensemble members.
pub const SP_CAP: usize = 100;

/// Segment `s` of `n_segments` containing index `j` of a length-`m` series.
///
/// The first `m % n_segments` segments are one index longer.
pub fn segment_of(j: usize, m: usize, n_segments: usize) -> usize {
    let base = m / n_segments;
    let rem = m % n_segments;
    let long_span = rem * (base + 1);
    if j < long_span {
        j / (base + 1)
    } else {
        rem + (j - long_span) / base.max(1)
    }
}

/// Shortest segment length at the deepest level.
fn min_segment_length(m: usize, levels: usize) -> usize {
    m >> (levels - 1)
}

/// Weighted per-segment word counts of one series.
#[derive(Clone, Debug, PartialEq)]
pub struct PyramidHistogram {
    levels: usize,
    /// Weight of segment id `2^(l-1) - 1 + s`.
    weights: Vec<f64>,
    /// `((segment id, word key), count)`, sorted by key.
    entries: Vec<((u32, u64), u32)>,
}

fn segment_id(level: usize, segment: usize) -> u32 {
    ((1usize << (level - 1)) - 1 + segment) as u32
}

fn id_level_segment(id: u32) -> (usize, usize) {
    let id = id as usize + 1;
    let level = usize::BITS as usize - id.leading_zeros() as usize;
    (level, id - (1 << (level - 1)))
}

impl PyramidHistogram {
    /// Pyramid from the word of every window `0..=m-w`.
    pub fn from_words(words: &[u64], m: usize, levels: usize, numerosity: bool) -> Result<Self> {
        if levels == 0 {
            return Err(Error::param("a pyramid needs at least one level"));
        }
        let weights = (1..=levels)
            .flat_map(|l| {
                let weight = 1.0 / (1u64 << (levels - l)) as f64;
                std::iter::repeat(weight).take(1 << (l - 1))
            })
            .collect();
        let mut keys = Vec::new();
        for j in surviving_windows(words, numerosity) {
            for l in 1..=levels {
                keys.push((segment_id(l, segment_of(j, m, 1 << (l - 1))), words[j]));
            }
        }
        keys.sort_unstable();
        let mut entries: Vec<((u32, u64), u32)> = Vec::new();
        for k in keys {
            match entries.last_mut() {
                Some((last, c)) if *last == k => *c += 1,
                _ => entries.push((k, 1)),
            }
        }
        Ok(PyramidHistogram {
            levels,
            weights,
            entries,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `2^L - 1`.
    pub fn n_sub_histograms(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, level: usize, segment: usize) -> f64 {
        self.weights[segment_id(level, segment) as usize]
    }

    pub fn entries(&self) -> &[((u32, u64), u32)] {
        &self.entries
    }

    /// Histogram of one segment, carrying its weight as scale.
    pub fn segment(&self, level: usize, segment: usize) -> SparseHistogram {
        let id = segment_id(level, segment);
        SparseHistogram::from_counts(
            self.entries
                .iter()
                .filter(|((s, _), _)| *s == id)
                .map(|&((_, k), c)| (k, c)),
        )
        .with_scale(self.weights[id as usize])
    }

    /// Unweighted sum of a level's segments.
    pub fn level_histogram(&self, level: usize) -> SparseHistogram {
        let lo = segment_id(level, 0);
        let hi = lo + (1u32 << (level - 1));
        SparseHistogram::from_counts(
            self.entries
                .iter()
                .filter(|((s, _), _)| (lo..hi).contains(s))
                .map(|&((_, k), c)| (k, c)),
        )
    }

    /// `L k level.segment:key:count ...`, levels 1-based, segments 0-based.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}", self.levels, self.entries.len());
        for &((id, k), c) in &self.entries {
            let (l, seg) = id_level_segment(id);
            let _ = write!(s, " {l}.{seg}:{k}:{c}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields = text.split_whitespace();
        let mut next_num = |what: &str| -> Result<usize> {
            fields
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::input(format!("pyramid line is missing its {what}")))
        };
        let levels = next_num("level count")?;
        let n = next_num("entry count")?;
        if levels == 0 || levels > 16 {
            return Err(Error::input(format!("unsupported pyramid depth {levels}")));
        }
        let mut pyramid = PyramidHistogram::from_words(&[], 1, levels, false)?;
        for f in fields {
            let bad = || Error::input(format!("bad pyramid entry {f:?}"));
            let mut parts = f.split(':');
            let (ls, k, c) = (
                parts.next().ok_or_else(bad)?,
                parts.next().ok_or_else(bad)?,
                parts.next().ok_or_else(bad)?,
            );
            let (l, seg) = ls.split_once('.').ok_or_else(bad)?;
            let l: usize = l.parse().map_err(|_| bad())?;
            let seg: usize = seg.parse().map_err(|_| bad())?;
            if l == 0 || l > levels || seg >= 1 << (l - 1) {
                return Err(bad());
            }
            pyramid.entries.push((
                (segment_id(l, seg), k.parse().map_err(|_| bad())?),
                c.parse().map_err(|_| bad())?,
            ));
        }
        if pyramid.entries.len() != n {
            return Err(Error::input(format!(
                "pyramid declares {n} entries but lists {}",
                pyramid.entries.len()
            )));
        }
        pyramid.entries.sort_unstable_by_key(|&(k, _)| k);
        Ok(pyramid)
    }
}

impl SparseVector for PyramidHistogram {
    type Key = (u32, u64);

    fn n_entries(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    fn entry(&self, i: usize) -> ((u32, u64), f64) {
        let ((s, k), c) = self.entries[i];
        ((s, k), c as f64 * self.weights[s as usize])
    }
}

/// Pyramid of one series.
pub fn build_pyramid<T: Scalar>(
    series: &[T],
    cfg: &BagConfig,
    disc_model: Option<&BreakpointTable<T>>,
    levels: usize,
) -> Result<PyramidHistogram> {
    check_depth(series.len(), cfg.w, levels)?;
    let words = series_words(series, cfg, disc_model)?;
    PyramidHistogram::from_words(&words, series.len(), levels, cfg.numerosity)
}

fn check_depth(m: usize, w: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::param("a pyramid needs at least one level"));
    }
    if levels > 1 && min_segment_length(m, levels) < w {
        return Err(Error::param(format!(
            "segments of {} points at level {levels} are shorter than the window {w}",
            min_segment_length(m, levels)
        )));
    }
    Ok(())
}

/// Weighted BOSS distance or histogram intersection between pyramids.
pub fn pyramid_distance(test: &PyramidHistogram, train: &PyramidHistogram, measure: Measure) -> Result<f64> {
    if test.levels != train.levels {
        return Err(Error::input(format!(
            "pyramids have {} and {} levels",
            test.levels, train.levels
        )));
    }
    match measure {
        Measure::BossDistance => Ok(boss_distance(test, train)),
        Measure::HistogramIntersection => histogram_intersection(test, train),
        other => Err(Error::param(format!("pyramids support boss and hi, not {other}"))),
    }
}

/// One retained `(w, l, p, L)` feature set.
#[derive(Clone, Debug)]
pub struct SpMember<T> {
    pub params: MemberParams,
    pub levels: usize,
    pub bag_config: BagConfig,
    pub train: Vec<(PyramidHistogram, usize)>,
    pub disc_model: Option<BreakpointTable<T>>,
    pub train_acc: f64,
}

impl<T: Scalar> SpMember<T> {
    pub fn build(train: &LabeledDataset<T>, params: MemberParams, levels: usize, train_acc: f64) -> Result<Self> {
        let bag_config = sp_bag_config(params);
        let disc_model = fit_model(train, &bag_config)?;
        let pyramids = train
            .series()
            .par_iter()
            .zip(train.labels().par_iter())
            .map(|(s, &c)| Ok((build_pyramid(s.values(), &bag_config, disc_model.as_ref(), levels)?, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpMember {
            params,
            levels,
            bag_config,
            train: pyramids,
            disc_model,
            train_acc,
        })
    }

    pub fn transform(&self, series: &[T]) -> Result<PyramidHistogram> {
        build_pyramid(series, &self.bag_config, self.disc_model.as_ref(), self.levels)
    }

    pub fn classify(&self, series: &[T], measure: Measure) -> Result<usize> {
        let query = self.transform(series)?;
        nearest_index(&query, &self.train, measure, None)
            .map(|j| self.train[j].1)
            .ok_or_else(|| Error::input("pyramid member has no training cases"))
    }
}

fn fit_model<T: Scalar>(train: &LabeledDataset<T>, cfg: &BagConfig) -> Result<Option<BreakpointTable<T>>> {
    match cfg.disc {
        Discretisation::Mcb => Ok(bag_dataset(train, cfg)?.model),
        Discretisation::Gaussian => Ok(None),
    }
}

/// BOSS transform settings for a pyramid member.
pub fn sp_bag_config(params: MemberParams) -> BagConfig {
    BagConfig {
        w: params.w,
        l: params.l,
        alpha: params.alpha,
        p: params.p,
        approx: Approximation::Dft,
        disc: Discretisation::Mcb,
        numerosity: true,
    }
}

/// Best feature set of one window size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpWindowScore {
    pub params: MemberParams,
    pub levels: usize,
    pub accuracy: f64,
}

fn score_window<T: Scalar>(
    train: &LabeledDataset<T>,
    grid: &ParameterGrid,
    alpha: usize,
    w: usize,
    measure: Measure,
) -> Result<Option<SpWindowScore>> {
    let m = train.series_length();
    let n = train.len() as f64;
    let mut ls = grid.word_lengths.clone();
    ls.sort_unstable();
    ls.dedup();
    let mut ps = grid.p_values.clone();
    ps.sort_unstable();
    ps.dedup();

    // per p: the approximations at the longest viable word, words for shorter l are prefixes
    let mut best: Option<(SpWindowScore, Vec<Vec<u64>>)> = None;
    for &p in &ps {
        let viable: Vec<usize> = ls.iter().copied().filter(|&l| l % 2 == 0 && l > 0 && l / 2 + usize::from(p) <= w).collect();
        let Some(&l_max) = viable.last() else { continue };
        if crate::symbolic::check_word_space(l_max, alpha).is_err() {
            continue;
        }
        let approximator = WindowApproximator::new(Approximation::Dft, w, l_max, p, false)?;
        let approximations = train
            .series()
            .iter()
            .map(|s| approximator.all_windows(s.values()))
            .collect::<Result<Vec<_>>>()?;
        let full = fit_mcb_from_approximations(&approximations, &approximator, l_max, alpha)?;
        for &l in &viable {
            let table = full.prefix(l)?;
            let words: Vec<Vec<u64>> = approximations.iter().map(|a| keys_from_rows(a, l_max, l, &table)).collect();
            let pyramids = pyramids_of(&words, train.labels(), m, 1)?;
            let acc = loocv_correct(&pyramids, measure) as f64 / n;
            if best.as_ref().map_or(true, |(b, _)| acc > b.accuracy) {
                let params = MemberParams { w, l, alpha, p };
                best = Some((SpWindowScore { params, levels: 1, accuracy: acc }, words));
            }
        }
    }
    let Some((mut score, words)) = best else {
        return Ok(None);
    };
    for levels in 2..=MAX_LEVELS {
        if check_depth(m, w, levels).is_err() {
            break;
        }
        let pyramids = pyramids_of(&words, train.labels(), m, levels)?;
        let acc = loocv_correct(&pyramids, measure) as f64 / n;
        if acc > score.accuracy {
            score.accuracy = acc;
            score.levels = levels;
        }
    }
    Ok(Some(score))
}

fn pyramids_of(words: &[Vec<u64>], labels: &[usize], m: usize, levels: usize) -> Result<Vec<(PyramidHistogram, usize)>> {
    words
        .iter()
        .zip(labels)
        .map(|(w, &c)| Ok((PyramidHistogram::from_words(w, m, levels, true)?, c)))
        .collect()
}

/// Per-window best `(l, p, L)` by leave-one-out, then the 92% rule across
/// windows and a cap of [`SP_CAP`] members.
///
/// Within a window a later setting replaces the current best only when
/// strictly more accurate; word lengths are tried ascending with `p = false`
/// first, then deeper pyramids on the winning words. Members are ordered by
/// accuracy descending, ties by window ascending.
pub fn sp_window_scores<T: Scalar>(
    train: &LabeledDataset<T>,
    grid: &ParameterGrid,
    measure: Measure,
) -> Result<Vec<SpWindowScore>> {
    if train.len() < 2 {
        return Err(Error::input("pyramid ensemble needs at least two training cases"));
    }
    if !matches!(measure, Measure::BossDistance | Measure::HistogramIntersection) {
        return Err(Error::param(format!("pyramids support boss and hi, not {measure}")));
    }
    grid.validate()?;
    let m = train.series_length();
    let cells: Vec<(usize, usize)> = grid
        .alphas
        .iter()
        .flat_map(|&a| grid.windows.iter().filter(|&&w| w >= 2 && w <= m).map(move |&w| (a, w)))
        .collect();
    let mut scores: Vec<SpWindowScore> = cells
        .par_iter()
        .map(|&(a, w)| score_window(train, grid, a, w, measure))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if scores.is_empty() {
        return Err(Error::config(format!("no window size is viable for series of length {m}")));
    }
    scores.sort_by(|a, b| {
        b.accuracy
            .partial_cmp(&a.accuracy)
            .expect("finite accuracy")
            .then_with(|| a.params.order_key().cmp(&b.params.order_key()))
    });
    Ok(scores)
}

/// Retained window scores: the 92% rule, then the size cap.
pub fn retain_sp(scores: &[SpWindowScore]) -> Vec<SpWindowScore> {
    let accs: Vec<f64> = scores.iter().map(|s| s.accuracy).collect();
    let kept = crate::classifiers::retained_len(&accs, true).min(SP_CAP);
    scores[..kept].to_vec()
}

/// Trains the pyramid ensemble.
pub fn build_sp_ensemble<T: Scalar>(
    train: &LabeledDataset<T>,
    grid: &ParameterGrid,
    measure: Measure,
) -> Result<Vec<SpMember<T>>> {
    let scores = sp_window_scores(train, grid, measure)?;
    let kept = retain_sp(&scores);
    log::info!(
        "{}: {} of {} windows retained for the pyramid ensemble",
        train.name(),
        kept.len(),
        scores.len()
    );
    kept.par_iter()
        .map(|s| SpMember::build(train, s.params, s.levels, s.accuracy))
        .collect()
}

/// Spatial-pyramid BOSS ensemble.
#[derive(Clone, Debug)]
pub struct SpClassifier<T> {
    pub measure: Measure,
    pub members: Vec<SpMember<T>>,
    pub class_names: Vec<String>,
}

impl<T: Scalar> SpClassifier<T> {
    /// `grid` defaults to the BOSS grid for the training series length.
    pub fn fit(train: &LabeledDataset<T>, grid: Option<&ParameterGrid>, measure: Measure) -> Result<Self> {
        let grid = grid.cloned().unwrap_or_else(|| ParameterGrid::boss(train.series_length()));
        Ok(SpClassifier {
            measure,
            members: build_sp_ensemble(train, &grid, measure)?,
            class_names: train.class_names().to_vec(),
        })
    }

    pub fn predict(&self, series: &[T]) -> Result<usize> {
        let votes = self
            .members
            .iter()
            .map(|m| m.classify(series, self.measure))
            .collect::<Result<Vec<_>>>()?;
        majority_vote(&votes, self.class_names.len())
    }

    pub fn predict_dataset(&self, data: &LabeledDataset<T>) -> Result<Vec<usize>> {
        data.series().par_iter().map(|s| self.predict(s.values())).collect()
    }

    pub fn accuracy(&self, data: &LabeledDataset<T>) -> Result<f64> {
        crate::classifiers::accuracy_of(&self.predict_dataset(data)?, data.labels())
    }
}
