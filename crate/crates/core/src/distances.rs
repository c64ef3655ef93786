//! Comparison measures between sparse bags.
//!
//! Every bag-like type exposes its entries as `(key, weight)` pairs sorted by
//! key through [`SparseVector`]; the measures are merge walks over two such
//! sequences, so bags of different concrete types never mix.

use serde::{Deserialize, Serialize};

use crate::bagging::SparseHistogram;
use crate::error::{Error, Result};

/// A sorted sparse vector with non-zero weights.
pub trait SparseVector {
    type Key: Ord + Copy;

    /// Number of stored entries.
    fn n_entries(&self) -> usize;

    /// Entry `i` as `(key, weight)`; keys strictly increase with `i`.
    fn entry(&self, i: usize) -> (Self::Key, f64);

    /// Sum of weights.
    fn mass(&self) -> f64 {
        (0..self.n_entries()).map(|i| self.entry(i).1).sum()
    }

    /// Divisor applied before histogram intersection in [`Measure::score`].
    fn intersection_mass(&self) -> f64 {
        self.mass()
    }
}

impl SparseVector for SparseHistogram {
    type Key = u64;

    fn n_entries(&self) -> usize {
        self.entries().len()
    }

    #[inline]
    fn entry(&self, i: usize) -> (u64, f64) {
        let (k, c) = self.entries()[i];
        (k, c as f64 * self.scale())
    }
}

/// Real-valued sparse vector keyed by word (tf·idf class vectors, BOTSW bags).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedVector {
    entries: Vec<(u64, f64)>,
}

impl WeightedVector {
    /// Builds from pairs; zero weights are dropped and duplicate keys summed.
    pub fn new(pairs: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(u64, f64)> = pairs.into_iter().collect();
        if pairs.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::input("weights must be finite"));
        }
        pairs.sort_by_key(|&(k, _)| k);
        let mut entries: Vec<(u64, f64)> = Vec::with_capacity(pairs.len());
        for (k, v) in pairs {
            match entries.last_mut() {
                Some((last, total)) if *last == k => *total += v,
                _ => entries.push((k, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        Ok(WeightedVector { entries })
    }

    /// Dense vector with keys `0..values.len()`.
    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().enumerate().map(|(i, &v)| (i as u64, v)))
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn get(&self, key: u64) -> f64 {
        self.entries
            .binary_search_by_key(&key, |&(k, _)| k)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl SparseVector for WeightedVector {
    type Key = u64;

    fn n_entries(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    fn entry(&self, i: usize) -> (u64, f64) {
        self.entries[i]
    }

    /// Weighted vectors are already normalised by their producer.
    fn intersection_mass(&self) -> f64 {
        1.0
    }
}

/// Walks the union of keys, calling `f(a_value, b_value)` with 0 for absent
/// entries. `f` returns `false` to stop early.
#[inline]
fn merge_walk<V: SparseVector>(a: &V, b: &V, mut f: impl FnMut(f64, f64) -> bool) {
    let (na, nb) = (a.n_entries(), b.n_entries());
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let go_on = if j == nb {
            let (_, x) = a.entry(i);
            i += 1;
            f(x, 0.0)
        } else if i == na {
            let (_, y) = b.entry(j);
            j += 1;
            f(0.0, y)
        } else {
            let (ka, x) = a.entry(i);
            let (kb, y) = b.entry(j);
            match ka.cmp(&kb) {
                std::cmp::Ordering::Less => {
                    i += 1;
                    f(x, 0.0)
                }
                std::cmp::Ordering::Greater => {
                    j += 1;
                    f(0.0, y)
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    f(x, y)
                }
            }
        };
        if !go_on {
            return;
        }
    }
}

/// Walks the keys of `a` only, pairing each with `b`'s weight (0 if absent).
#[inline]
fn left_walk<V: SparseVector>(a: &V, b: &V, mut f: impl FnMut(f64, f64) -> bool) {
    let nb = b.n_entries();
    let mut j = 0;
    for i in 0..a.n_entries() {
        let (ka, x) = a.entry(i);
        while j < nb && b.entry(j).0 < ka {
            j += 1;
        }
        let y = if j < nb && b.entry(j).0 == ka { b.entry(j).1 } else { 0.0 };
        if !f(x, y) {
            return;
        }
    }
}

fn euclidean_bounded<V: SparseVector>(a: &V, b: &V, bound: f64) -> f64 {
    let mut sum = 0.0;
    merge_walk(a, b, |x, y| {
        sum += (x - y) * (x - y);
        sum <= bound
    });
    sum
}

fn boss_bounded<V: SparseVector>(test: &V, train: &V, bound: f64) -> f64 {
    let mut sum = 0.0;
    left_walk(test, train, |x, y| {
        if x > 0.0 {
            sum += (x - y) * (x - y);
        }
        sum <= bound
    });
    sum
}

/// Squared Euclidean distance over the union of keys.
pub fn euclidean_sq<V: SparseVector>(a: &V, b: &V) -> f64 {
    euclidean_bounded(a, b, f64::INFINITY)
}

/// Squared differences over the words present in `test` only.
pub fn boss_distance<V: SparseVector>(test: &V, train: &V) -> f64 {
    boss_bounded(test, train, f64::INFINITY)
}

fn check_non_negative<V: SparseVector>(v: &V) -> Result<()> {
    if (0..v.n_entries()).any(|i| v.entry(i).1 < 0.0) {
        return Err(Error::input("histogram intersection needs non-negative entries"));
    }
    Ok(())
}

fn intersection<V: SparseVector>(a: &V, b: &V, scale_a: f64, scale_b: f64) -> f64 {
    let mut sum = 0.0;
    merge_walk(a, b, |x, y| {
        sum += (x * scale_a).min(y * scale_b);
        true
    });
    sum
}

/// `sum_k min(a_k, b_k)`.
pub fn histogram_intersection<V: SparseVector>(a: &V, b: &V) -> Result<f64> {
    check_non_negative(a)?;
    check_non_negative(b)?;
    Ok(intersection(a, b, 1.0, 1.0))
}

fn dot_and_norms<V: SparseVector>(a: &V, b: &V) -> (f64, f64, f64) {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    merge_walk(a, b, |x, y| {
        dot += x * y;
        na += x * x;
        nb += y * y;
        true
    });
    (dot, na.sqrt(), nb.sqrt())
}

/// `a . b / (|a| |b|)`.
pub fn cosine_similarity<V: SparseVector>(a: &V, b: &V) -> Result<f64> {
    let (dot, na, nb) = dot_and_norms(a, b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::input("cosine similarity of a zero vector"));
    }
    Ok(dot / (na * nb))
}

/// Comparison used by nearest-neighbour search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    Euclidean,
    BossDistance,
    HistogramIntersection,
    Cosine,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Euclidean => "euclidean",
            Measure::BossDistance => "boss",
            Measure::HistogramIntersection => "hi",
            Measure::Cosine => "cosine",
        }
    }

    pub fn is_similarity(self) -> bool {
        matches!(self, Measure::HistogramIntersection | Measure::Cosine)
    }

    /// Dissimilarity of `query` to `reference`: lower is closer.
    ///
    /// Similarities are negated. Histogram intersection compares count vectors
    /// after l1 normalisation (an empty one intersects nothing); weighted
    /// vectors are compared as they are. A zero vector has
    /// cosine 0, so scoring never fails. Distances stop accumulating once
    /// they exceed `bound`; the returned value is then some number above it.
    #[inline]
    pub fn score<V: SparseVector>(self, query: &V, reference: &V, bound: f64) -> f64 {
        match self {
            Measure::Euclidean => euclidean_bounded(query, reference, bound),
            Measure::BossDistance => boss_bounded(query, reference, bound),
            Measure::HistogramIntersection => {
                let (ma, mb) = (query.intersection_mass(), reference.intersection_mass());
                if ma <= 0.0 || mb <= 0.0 {
                    return 0.0;
                }
                -intersection(query, reference, 1.0 / ma, 1.0 / mb)
            }
            Measure::Cosine => {
                let (dot, na, nb) = dot_and_norms(query, reference);
                if na == 0.0 || nb == 0.0 {
                    0.0
                } else {
                    -(dot / (na * nb))
                }
            }
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "euclid" | "ed" => Ok(Measure::Euclidean),
            "boss" | "bd" | "boss_dist" | "boss-distance" => Ok(Measure::BossDistance),
            "hi" | "intersection" | "histogram-intersection" => Ok(Measure::HistogramIntersection),
            "cosine" | "cos" => Ok(Measure::Cosine),
            _ => Err(Error::param(format!("unknown measure {s:?}"))),
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h(pairs: &[(u64, u32)]) -> SparseHistogram {
        SparseHistogram::from_counts(pairs.iter().copied())
    }

    const X: u64 = 1;
    const Y: u64 = 2;
    const Z: u64 = 3;

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_sq(&h(&[(X, 2)]), &h(&[(X, 2)])), 0.0);
        assert_eq!(euclidean_sq(&h(&[(X, 2)]), &h(&[(Y, 3)])), 13.0);
        assert_eq!(euclidean_sq(&h(&[(X, 2), (Y, 1)]), &h(&[(X, 1), (Y, 5)])), 17.0);
    }

    #[test]
    fn boss_examples() {
        let a = h(&[(X, 2)]);
        let b = h(&[(X, 1), (Y, 5)]);
        assert_eq!(boss_distance(&a, &b), 1.0);
        assert_eq!(boss_distance(&b, &a), 26.0);
        assert_eq!(boss_distance(&h(&[]), &b), 0.0);
    }

    #[test]
    fn intersection_examples() {
        let a = h(&[(X, 1), (Y, 3), (Z, 2)]);
        let b = h(&[(X, 2), (Y, 1), (Z, 2)]);
        assert_eq!(histogram_intersection(&a, &b).unwrap(), 4.0);
        assert_eq!(histogram_intersection(&a, &a).unwrap(), 6.0);
        assert_eq!(histogram_intersection(&h(&[(X, 4)]), &h(&[(Y, 4)])).unwrap(), 0.0);
        let neg = WeightedVector::new([(X, -1.0)]).unwrap();
        let pos = WeightedVector::new([(X, 1.0)]).unwrap();
        assert!(matches!(histogram_intersection(&neg, &pos), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn cosine_examples() {
        let a = WeightedVector::new([(X, 1.0)]).unwrap();
        let b = WeightedVector::new([(X, 1.0), (Y, 1.0)]).unwrap();
        assert_abs_diff_eq!(cosine_similarity(&b, &b).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cosine_similarity(&a, &b).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);
        let c = WeightedVector::new([(Z, 2.0)]).unwrap();
        assert_eq!(cosine_similarity(&a, &c).unwrap(), 0.0);
        let zero = WeightedVector::default();
        assert!(matches!(cosine_similarity(&zero, &a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn scores_order_neighbours() {
        let q = h(&[(X, 3), (Y, 1)]);
        let near = h(&[(X, 3), (Y, 1)]);
        let far = h(&[(Z, 9)]);
        for m in [
            Measure::Euclidean,
            Measure::BossDistance,
            Measure::HistogramIntersection,
            Measure::Cosine,
        ] {
            assert!(m.score(&q, &near, f64::INFINITY) < m.score(&q, &far, f64::INFINITY), "{m}");
        }
    }

    #[test]
    fn bounded_score_exceeds_bound_when_abandoned() {
        let q = h(&[(X, 10), (Y, 10)]);
        let r = h(&[(Z, 10)]);
        let full = Measure::Euclidean.score(&q, &r, f64::INFINITY);
        let cut = Measure::Euclidean.score(&q, &r, 50.0);
        assert_eq!(full, 300.0);
        assert!(cut > 50.0 && cut <= full);
    }

    #[test]
    fn measure_names_parse() {
        for m in [
            Measure::Euclidean,
            Measure::BossDistance,
            Measure::HistogramIntersection,
            Measure::Cosine,
        ] {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert!("manhattan".parse::<Measure>().is_err());
    }
}
