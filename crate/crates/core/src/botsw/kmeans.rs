use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lloyd iteration cap.
pub const MAX_ITERATIONS: usize = 100;

/// `k` centroids of equal dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook<T> {
    centroids: Vec<Vec<T>>,
}

#[inline]
fn sq_dist<T: Scalar>(a: &[T], b: &[T], bound: f64) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x.as_f64() - y.as_f64();
        sum += d * d;
        if sum > bound {
            break;
        }
    }
    sum
}

impl<T: Scalar> Codebook<T> {
    pub fn new(centroids: Vec<Vec<T>>) -> Result<Self> {
        let Some(first) = centroids.first() else {
            return Err(Error::param("a codebook needs at least one centroid"));
        };
        let d = first.len();
        if centroids.iter().any(|c| c.len() != d) {
            return Err(Error::param("codebook centroids differ in dimension"));
        }
        if centroids.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::param("codebook centroids must be finite"));
        }
        Ok(Codebook { centroids })
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids[0].len()
    }

    pub fn centroids(&self) -> &[Vec<T>] {
        &self.centroids
    }

    /// Nearest centroid and its squared distance; ties go to the lowest index.
    pub fn nearest(&self, v: &[T]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in self.centroids.iter().enumerate() {
            let d = sq_dist(v, centroid, best.1);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    }

    /// One centroid per line, values space separated with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.centroids {
            let row: Vec<String> = c.iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, line)| {
                line.split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>().map(T::of).map_err(|e| Error::Parse {
                            path: "<codebook>".into(),
                            line: n + 1,
                            message: format!("bad centroid value {tok:?}: {e}"),
                        })
                    })
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// A fitted codebook with its optimisation trace.
#[derive(Clone, Debug)]
pub struct KMeansFit<T> {
    pub codebook: Codebook<T>,
    /// Within-cluster sum of squares after each assignment step.
    pub inertia: Vec<f64>,
    pub assignments: Vec<usize>,
}

fn check_vectors<T: Scalar>(vectors: &[Vec<T>]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Err(Error::input("k-means needs at least one vector"));
    };
    let d = first.len();
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::input("k-means vectors differ in dimension"));
    }
    Ok(d)
}

/// Seeded k-means++ initial centroids.
pub fn kmeans_plus_plus<T: Scalar>(vectors: &[Vec<T>], k: usize, seed: u64) -> Result<Vec<Vec<T>>> {
    check_vectors(vectors)?;
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let n = vectors.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = vec![vectors[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = vectors
        .iter()
        .map(|v| sq_dist(v, &centroids[0], f64::INFINITY))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        let c = vectors[pick].clone();
        d2.par_iter_mut()
            .zip(vectors.par_iter())
            .for_each(|(d, v)| *d = d.min(sq_dist(v, &c, *d)));
        centroids.push(c);
    }
    Ok(centroids)
}

/// Lloyd iterations from seeded k-means++ initialisation.
pub fn kmeans_fit<T: Scalar>(vectors: &[Vec<T>], k: usize, seed: u64) -> Result<KMeansFit<T>> {
    let init = kmeans_plus_plus(vectors, k, seed)?;
    lloyd(vectors, init)
}

/// Lloyd iterations from given centroids.
///
/// Stops when assignments repeat or after [`MAX_ITERATIONS`]. A centroid
/// left without points moves onto the point farthest from its current
/// centroid.
pub fn lloyd<T: Scalar>(vectors: &[Vec<T>], init: Vec<Vec<T>>) -> Result<KMeansFit<T>> {
    let d = check_vectors(vectors)?;
    let mut codebook = Codebook::new(init)?;
    if codebook.dim() != d {
        return Err(Error::param("initial centroids do not match the vector dimension"));
    }
    let k = codebook.k();
    let mut inertia = Vec::new();
    let mut assignments: Vec<usize> = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let nearest: Vec<(usize, f64)> = vectors.par_iter().map(|v| codebook.nearest(v)).collect();
        inertia.push(nearest.iter().map(|&(_, d)| d).sum());
        let labels: Vec<usize> = nearest.iter().map(|&(c, _)| c).collect();
        if labels == assignments {
            break;
        }
        assignments = labels;

        let mut sums = vec![vec![0.0f64; d]; k];
        let mut counts = vec![0usize; k];
        for (v, &c) in vectors.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(v) {
                *s += x.as_f64();
            }
        }
        let mut far: Vec<(usize, f64)> = nearest.iter().map(|&(_, d)| d).enumerate().collect();
        far.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite distance").then(a.0.cmp(&b.0)));
        let mut far = far.into_iter();
        let centroids: Vec<Vec<T>> = (0..k)
            .map(|c| {
                if counts[c] > 0 {
                    sums[c].iter().map(|&s| T::of(s / counts[c] as f64)).collect()
                } else {
                    let (i, _) = far.next().unwrap_or((0, 0.0));
                    vectors[i].clone()
                }
            })
            .collect();
        codebook = Codebook { centroids };
    }
    if assignments.is_empty() {
        assignments = vectors.iter().map(|v| codebook.nearest(v).0).collect();
    }
    Ok(KMeansFit {
        codebook,
        inertia,
        assignments,
    })
}
