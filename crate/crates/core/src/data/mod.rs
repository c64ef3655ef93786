//! Datasets, UCR-format I/O, resampling and synthetic data.

mod resample;
mod synthetic;
mod ucr;

pub use resample::{split_per_class, stratified_resample};
pub use synthetic::{generate_dictionary_data, DictionaryDataConfig, GeneratedData, Placement, ShapeletKind};
pub use ucr::{find_split_files, read_ucr, read_ucr_split, write_ucr};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A univariate real-valued series.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries<T>(Vec<T>);

impl<T: Scalar> TimeSeries<T> {
    pub fn new(values: Vec<T>) -> Self {
        TimeSeries(values)
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T: Scalar> From<Vec<T>> for TimeSeries<T> {
    fn from(values: Vec<T>) -> Self {
        TimeSeries(values)
    }
}

/// Equal-length series with 0-based class labels.
///
/// `class_names[c]` keeps the label string the class had on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset<T> {
    name: String,
    series: Vec<TimeSeries<T>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(
        name: impl Into<String>,
        series: Vec<Vec<T>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if series.len() != labels.len() {
            return Err(Error::input(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        if let Some(first) = series.first() {
            let m = first.len();
            if let Some(i) = series.iter().position(|s| s.len() != m) {
                return Err(Error::input(format!(
                    "series {i} has length {}, expected {m}",
                    series[i].len()
                )));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= class_names.len()) {
            return Err(Error::input(format!(
                "label {bad} but only {} classes",
                class_names.len()
            )));
        }
        if series.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input("series contain non-finite values"));
        }
        Ok(LabeledDataset {
            name: name.into(),
            series: series.into_iter().map(TimeSeries).collect(),
            labels,
            class_names,
        })
    }

    /// Dataset whose classes are named `"0".."c-1"`.
    pub fn from_labels(name: impl Into<String>, series: Vec<Vec<T>>, labels: Vec<usize>) -> Result<Self> {
        let c = labels.iter().max().map_or(0, |&m| m + 1);
        let names = (0..c).map(|i| i.to_string()).collect();
        Self::new(name, series, labels, names)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn series(&self) -> &[TimeSeries<T>] {
        &self.series
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Common series length, 0 for an empty dataset.
    pub fn series_length(&self) -> usize {
        self.series.first().map_or(0, |s| s.len())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[T], usize)> {
        self.series.iter().map(|s| s.values()).zip(self.labels.iter().copied())
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.labels {
            counts[c] += 1;
        }
        counts
    }

    /// The cases at `indices`, in that order, keeping the class mapping.
    pub fn subset(&self, indices: &[usize]) -> Self {
        LabeledDataset {
            name: self.name.clone(),
            series: indices.iter().map(|&i| self.series[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Converts the element type, e.g. to run an `f32` pipeline on `f64` data.
    pub fn cast<U: Scalar>(&self) -> LabeledDataset<U> {
        LabeledDataset {
            name: self.name.clone(),
            series: self
                .series
                .iter()
                .map(|s| TimeSeries(s.values().iter().map(|&v| U::of(v.as_f64())).collect()))
                .collect(),
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
        }
    }
}
