//! Sliding-window word extraction and sparse word histograms.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
pub use crate::symbolic::Approximation;
use crate::symbolic::{check_word_space, mcb_fit_with, BreakpointTable, WindowApproximator};

/// How approximation values become symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Discretisation {
    /// Fixed standard-normal quantiles (SAX).
    Gaussian,
    /// Equi-depth bins learnt per coefficient from training data.
    Mcb,
}

/// Parameters of one bag transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BagConfig {
    pub w: usize,
    pub l: usize,
    pub alpha: usize,
    /// Drop the mean Fourier term; ignored by PAA.
    pub p: bool,
    pub approx: Approximation,
    pub disc: Discretisation,
    pub numerosity: bool,
}

impl BagConfig {
    /// The window approximator for this configuration.
    ///
    /// Fixed Gaussian breakpoints assume unit-variance inputs, so DFT terms are
    /// standardised when paired with them.
    pub fn approximator(&self) -> Result<WindowApproximator> {
        check_word_space(self.l, self.alpha)?;
        let standardise = self.approx == Approximation::Dft && self.disc == Discretisation::Gaussian;
        WindowApproximator::new(self.approx, self.w, self.l, self.p, standardise)
    }
}

/// Word counts of one series, sorted by word key.
///
/// `scale` multiplies every count when the histogram is part of a weighted
/// feature (spatial pyramids); plain bags use 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHistogram {
    entries: Vec<(u64, u32)>,
    scale: f64,
}

impl Default for SparseHistogram {
    fn default() -> Self {
        SparseHistogram {
            entries: Vec::new(),
            scale: 1.0,
        }
    }
}

impl SparseHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts an arbitrary sequence of word keys.
    pub fn from_words(words: impl IntoIterator<Item = u64>) -> Self {
        let mut keys: Vec<u64> = words.into_iter().collect();
        keys.sort_unstable();
        let mut entries: Vec<(u64, u32)> = Vec::new();
        for k in keys {
            match entries.last_mut() {
                Some((last, c)) if *last == k => *c += 1,
                _ => entries.push((k, 1)),
            }
        }
        SparseHistogram { entries, scale: 1.0 }
    }

    /// Builds from `(key, count)` pairs; zero counts are dropped, duplicates summed.
    pub fn from_counts(counts: impl IntoIterator<Item = (u64, u32)>) -> Self {
        let mut pairs: Vec<(u64, u32)> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        pairs.sort_unstable_by_key(|&(k, _)| k);
        let mut entries: Vec<(u64, u32)> = Vec::with_capacity(pairs.len());
        for (k, c) in pairs {
            match entries.last_mut() {
                Some((last, total)) if *last == k => *total += c,
                _ => entries.push((k, c)),
            }
        }
        SparseHistogram { entries, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn entries(&self) -> &[(u64, u32)] {
        &self.entries
    }

    pub fn get(&self, key: u64) -> u32 {
        self.entries
            .binary_search_by_key(&key, |&(k, _)| k)
            .map_or(0, |i| self.entries[i].1)
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of counts, ignoring the scale.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    /// `k key:count ...` with keys ascending.
    pub fn to_text(&self) -> String {
        let mut s = self.entries.len().to_string();
        for (k, c) in &self.entries {
            let _ = write!(s, " {k}:{c}");
        }
        s
    }

    /// Parses the output of [`SparseHistogram::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields = text.split_whitespace();
        let n: usize = fields
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::input("bag line must start with its entry count"))?;
        let entries = fields
            .map(|f| {
                let (k, c) = f
                    .split_once(':')
                    .ok_or_else(|| Error::input(format!("bad bag entry {f:?}")))?;
                let k = k.parse().map_err(|_| Error::input(format!("bad word key {k:?}")))?;
                let c = c.parse().map_err(|_| Error::input(format!("bad count {c:?}")))?;
                Ok((k, c))
            })
            .collect::<Result<Vec<(u64, u32)>>>()?;
        if entries.len() != n {
            return Err(Error::input(format!(
                "bag declares {n} entries but lists {}",
                entries.len()
            )));
        }
        Ok(SparseHistogram::from_counts(entries))
    }
}

/// Indices of windows that survive numerosity reduction.
///
/// A window is dropped when its word equals the immediately preceding
/// window's word, whether or not that one was itself dropped.
pub fn surviving_windows(words: &[u64], numerosity: bool) -> impl Iterator<Item = usize> + '_ {
    (0..words.len()).filter(move |&j| !numerosity || j == 0 || words[j] != words[j - 1])
}

/// Packed keys of the first `l` symbols of every approximation row.
pub(crate) fn keys_from_rows<T: Scalar>(
    approximations: &[T],
    stride: usize,
    l: usize,
    table: &BreakpointTable<T>,
) -> Vec<u64> {
    approximations
        .chunks_exact(stride)
        .map(|row| table.key_of(row, l))
        .collect()
}

fn resolve_table<T: Scalar>(
    cfg: &BagConfig,
    disc_model: Option<&BreakpointTable<T>>,
) -> Result<BreakpointTable<T>> {
    match (cfg.disc, disc_model) {
        (Discretisation::Mcb, Some(table)) => {
            if table.word_length() != cfg.l || table.alpha() != cfg.alpha {
                return Err(Error::config(format!(
                    "breakpoint table is {}x{} but the bag needs l = {}, alpha = {}",
                    table.word_length(),
                    table.alpha(),
                    cfg.l,
                    cfg.alpha
                )));
            }
            Ok(table.clone())
        }
        (Discretisation::Mcb, None) => Err(Error::config("MCB bags need a fitted breakpoint table")),
        (Discretisation::Gaussian, None) => BreakpointTable::gaussian(cfg.l, cfg.alpha),
        (Discretisation::Gaussian, Some(_)) => Err(Error::config(
            "Gaussian discretisation does not take a fitted breakpoint table",
        )),
    }
}

/// One word key per window `0..=m-w`, before numerosity reduction.
pub fn series_words<T: Scalar>(
    series: &[T],
    cfg: &BagConfig,
    disc_model: Option<&BreakpointTable<T>>,
) -> Result<Vec<u64>> {
    let approximator = cfg.approximator()?;
    let table = resolve_table(cfg, disc_model)?;
    let approx = approximator.all_windows(series)?;
    Ok(keys_from_rows(&approx, cfg.l, cfg.l, &table))
}

/// Bag of words of one series.
pub fn bag_series<T: Scalar>(
    series: &[T],
    cfg: &BagConfig,
    disc_model: Option<&BreakpointTable<T>>,
) -> Result<SparseHistogram> {
    let words = series_words(series, cfg, disc_model)?;
    Ok(SparseHistogram::from_words(
        surviving_windows(&words, cfg.numerosity).map(|j| words[j]),
    ))
}

/// Bags of a whole dataset plus the model needed to bag unseen series.
#[derive(Clone, Debug)]
pub struct BaggedDataset<T> {
    pub bags: Vec<(SparseHistogram, usize)>,
    pub model: Option<BreakpointTable<T>>,
}

/// Fits MCB when configured, then bags every series in input order.
pub fn bag_dataset<T: Scalar>(data: &LabeledDataset<T>, cfg: &BagConfig) -> Result<BaggedDataset<T>> {
    if data.is_empty() {
        return Ok(BaggedDataset {
            bags: Vec::new(),
            model: None,
        });
    }
    let approximator = cfg.approximator()?;
    let approximations = data
        .series()
        .par_iter()
        .map(|s| approximator.all_windows(s.values()))
        .collect::<Result<Vec<_>>>()?;
    let model = match cfg.disc {
        Discretisation::Mcb => Some(fit_mcb_from_approximations(
            &approximations,
            &approximator,
            cfg.l,
            cfg.alpha,
        )?),
        Discretisation::Gaussian => None,
    };
    let table = resolve_table(cfg, model.as_ref())?;
    let bags = approximations
        .par_iter()
        .zip(data.labels().par_iter())
        .map(|(approx, &label)| {
            let words = keys_from_rows(approx, cfg.l, cfg.l, &table);
            let bag = SparseHistogram::from_words(surviving_windows(&words, cfg.numerosity).map(|j| words[j]));
            (bag, label)
        })
        .collect();
    Ok(BaggedDataset { bags, model })
}

/// MCB over precomputed approximations (`approximator.l` values per window);
/// only the first `l` coefficients are binned.
pub(crate) fn fit_mcb_from_approximations<T: Scalar>(
    approximations: &[Vec<T>],
    approximator: &WindowApproximator,
    l: usize,
    alpha: usize,
) -> Result<BreakpointTable<T>> {
    let mut pools: Vec<Vec<T>> = vec![Vec::new(); l];
    for approx in approximations {
        for row in approximator.disjoint_rows(approx) {
            for (pool, &v) in pools.iter_mut().zip(row) {
                pool.push(v);
            }
        }
    }
    crate::symbolic::mcb_from_pools(pools, alpha)
}

/// MCB table for a bag configuration, fitted on `series`.
pub fn fit_mcb<T: Scalar>(series: &[&[T]], cfg: &BagConfig) -> Result<BreakpointTable<T>> {
    mcb_fit_with(series, &cfg.approximator()?, cfg.alpha)
}

/// `label k key:count ...` lines, one per bag.
pub fn bags_to_text(bags: &[(SparseHistogram, usize)]) -> String {
    let mut s = String::new();
    for (bag, label) in bags {
        let _ = writeln!(s, "{label} {}", bag.to_text());
    }
    s
}

pub fn bags_from_text(text: &str) -> Result<Vec<(SparseHistogram, usize)>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let line = line.trim();
            let (label, rest) = line
                .split_once(' ')
                .ok_or_else(|| Error::input(format!("bad bag line {line:?}")))?;
            let label = label
                .parse()
                .map_err(|_| Error::input(format!("bad label {label:?}")))?;
            Ok((SparseHistogram::from_text(rest)?, label))
        })
        .collect()
}
