//! Two-class dictionary data: classes differ only in how many shapelets
//! are embedded at random, non-overlapping positions.
//!
//! Each shapelet is either one period of a sine wave or a head-and-shoulders
//! shape (three positive lobes, the middle one tallest, tapered to zero at
//! both ends). Both shapes start at exactly zero, so with no noise every
//! embedded shapelet is a separate run of non-zero samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryDataConfig {
    pub n_per_class: usize,
    pub length: usize,
    /// Shapelets per series for class 0 and class 1.
    pub counts: (usize, usize),
    pub noise_std: f64,
    pub seed: u64,
    pub shapelet_length: usize,
    pub amplitude: f64,
}

impl Default for DictionaryDataConfig {
    fn default() -> Self {
        DictionaryDataConfig {
            n_per_class: 50,
            length: 500,
            counts: (6, 2),
            noise_std: 1.0,
            seed: 0,
            shapelet_length: 29,
            amplitude: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeletKind {
    Sine,
    HeadAndShoulders,
}

impl ShapeletKind {
    /// Shape of unit amplitude sampled at `len` points.
    pub fn shape(self, len: usize) -> Vec<f64> {
        match self {
            ShapeletKind::Sine => (0..len)
                .map(|t| (std::f64::consts::TAU * t as f64 / len as f64).sin())
                .collect(),
            ShapeletKind::HeadAndShoulders => {
                let bump = |u: f64, centre: f64, height: f64| {
                    height * (-(u - centre).powi(2) / (2.0 * 0.07f64.powi(2))).exp()
                };
                (0..len)
                    .map(|t| {
                        let u = t as f64 / (len - 1) as f64;
                        let lobes = bump(u, 0.2, 0.55) + bump(u, 0.5, 1.0) + bump(u, 0.8, 0.55);
                        (std::f64::consts::PI * u).sin() * lobes
                    })
                    .map(|v| if v.abs() < 1e-15 { 0.0 } else { v })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub offset: usize,
    pub kind: ShapeletKind,
}

#[derive(Clone, Debug)]
pub struct GeneratedData<T> {
    pub dataset: LabeledDataset<T>,
    /// Shapelets embedded in each series, ordered by offset.
    pub placements: Vec<Vec<Placement>>,
}

/// `k` uniformly placed, non-overlapping intervals of length `len` in `0..m`.
fn place(rng: &mut ChaCha8Rng, k: usize, len: usize, m: usize) -> Vec<usize> {
    let free = m - k * len;
    let mut gaps: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=free)).collect();
    gaps.sort_unstable();
    gaps.iter().enumerate().map(|(i, g)| g + i * len).collect()
}

pub fn generate_dictionary_data<T: Scalar>(config: &DictionaryDataConfig) -> Result<GeneratedData<T>> {
    let (k1, k2) = config.counts;
    if k1 == k2 {
        return Err(Error::param("class shapelet counts must differ"));
    }
    if config.shapelet_length < 2 {
        return Err(Error::param("shapelet length must be at least 2"));
    }
    if k1.max(k2) * config.shapelet_length > config.length {
        return Err(Error::param(format!(
            "cannot pack {} shapelets of length {} into {} points",
            k1.max(k2),
            config.shapelet_length,
            config.length
        )));
    }
    if !(config.noise_std >= 0.0 && config.noise_std.is_finite()) {
        return Err(Error::param("noise standard deviation must be finite and non-negative"));
    }
    let noise = Normal::new(0.0, config.noise_std).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let shapes = [
        ShapeletKind::Sine.shape(config.shapelet_length),
        ShapeletKind::HeadAndShoulders.shape(config.shapelet_length),
    ];

    let mut series = Vec::with_capacity(2 * config.n_per_class);
    let mut labels = Vec::with_capacity(2 * config.n_per_class);
    let mut placements = Vec::with_capacity(2 * config.n_per_class);
    for (class, k) in [(0usize, k1), (1, k2)] {
        for _ in 0..config.n_per_class {
            let mut values: Vec<f64> = if config.noise_std > 0.0 {
                (0..config.length).map(|_| noise.sample(&mut rng)).collect()
            } else {
                vec![0.0; config.length]
            };
            let mut placed = Vec::with_capacity(k);
            for offset in place(&mut rng, k, config.shapelet_length, config.length) {
                let kind = if rng.gen_bool(0.5) {
                    ShapeletKind::Sine
                } else {
                    ShapeletKind::HeadAndShoulders
                };
                let shape = &shapes[kind as usize];
                for (t, &v) in shape.iter().enumerate() {
                    values[offset + t] += config.amplitude * v;
                }
                placed.push(Placement { offset, kind });
            }
            series.push(values.into_iter().map(T::of).collect());
            labels.push(class);
            placements.push(placed);
        }
    }
    let dataset = LabeledDataset::new(
        format!("Dictionary{}x{}", k1, k2),
        series,
        labels,
        vec!["0".into(), "1".into()],
    )?;
    Ok(GeneratedData { dataset, placements })
}
