//! Accuracy tables and rank-based comparison of classifiers across datasets.
//!
//! Ranks are 1 for the most accurate classifier, tied accuracies share the
//! mean of their ranks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// One resample of one classifier on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub classifier: String,
    pub dataset: String,
    pub resample: u64,
    pub accuracy: f64,
    #[serde(default)]
    pub train_time_s: f64,
    #[serde(default)]
    pub params: String,
}

/// Results CSV columns.
pub const RESULT_HEADER: [&str; 6] = ["classifier", "dataset", "resample", "accuracy", "train_time_s", "params"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(rows: Vec<ResultRow>) -> Self {
        ResultTable { rows }
    }

    /// Reads `classifier,dataset,resample,accuracy[,train_time_s,params]`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path)
    }

    pub fn from_reader(reader: impl std::io::Read, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<ResultRow>().enumerate() {
            // line 1 is the header
            let line = i + 2;
            let row = rec.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            })?;
            if !(0.0..=1.0).contains(&row.accuracy) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("accuracy {} outside [0, 1]", row.accuracy),
                });
            }
            rows.push(row);
        }
        Ok(ResultTable { rows })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Appends rows to `path`, writing the header first if the file is new
    /// or empty.
    pub fn append_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn classifiers(&self) -> Vec<String> {
        unique(self.rows.iter().map(|r| &r.classifier))
    }

    pub fn datasets(&self) -> Vec<String> {
        unique(self.rows.iter().map(|r| &r.dataset))
    }

    fn cell(&self, classifier: &str, dataset: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.classifier == classifier && r.dataset == dataset)
            .map(|r| r.accuracy)
            .collect()
    }

    /// Mean accuracy and its standard error over resamples.
    pub fn mean_accuracy(&self, classifier: &str, dataset: &str) -> Result<(f64, f64)> {
        mean_and_stderr(&self.cell(classifier, dataset))
            .map_err(|_| Error::input(format!("no results for {classifier} on {dataset}")))
    }

    /// Mean accuracies, `[dataset][classifier]`, with names sorted.
    ///
    /// Fails naming every missing `(classifier, dataset)` pair.
    pub fn mean_matrix(&self) -> Result<(Vec<String>, Vec<String>, Vec<Vec<f64>>)> {
        let classifiers = self.classifiers();
        let datasets = self.datasets();
        let mut sums: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = sums.entry((&r.classifier, &r.dataset)).or_default();
            e.0 += r.accuracy;
            e.1 += 1;
        }
        let mut missing = Vec::new();
        let mut matrix = Vec::with_capacity(datasets.len());
        for d in &datasets {
            let mut row = Vec::with_capacity(classifiers.len());
            for c in &classifiers {
                match sums.get(&(c.as_str(), d.as_str())) {
                    Some(&(s, n)) => row.push(s / n as f64),
                    None => {
                        missing.push(format!("{c}/{d}"));
                        row.push(f64::NAN);
                    }
                }
            }
            matrix.push(row);
        }
        if !missing.is_empty() {
            return Err(Error::input(format!("missing results for {}", missing.join(", "))));
        }
        Ok((classifiers, datasets, matrix))
    }
}

fn unique<'a>(names: impl Iterator<Item = &'a String>) -> Vec<String> {
    names.collect::<BTreeSet<_>>().into_iter().cloned().collect()
}

/// Arithmetic mean and `sd / sqrt(n)` with the sample standard deviation.
/// A single value has standard error 0.
pub fn mean_and_stderr(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::input("mean of no values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        log::warn!("standard error from a single resample is reported as 0");
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Mid-ranks of `values` with rank 1 for the largest.
pub fn rank_descending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("comparable values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mid;
        }
        i = j + 1;
    }
    ranks
}

/// Per-dataset ranks, `[dataset][classifier]`.
pub fn rank_matrix(means: &[Vec<f64>]) -> Vec<Vec<f64>> {
    means.iter().map(|row| rank_descending(row)).collect()
}

/// Mean rank of each classifier over datasets (`means[dataset][classifier]`).
pub fn average_ranks(means: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = means.first().map_or(0, Vec::len);
    if means.is_empty() || k < 2 {
        return Err(Error::input("ranking needs at least one dataset and two classifiers"));
    }
    if means.iter().any(|r| r.len() != k) {
        return Err(Error::input("accuracy matrix is not rectangular"));
    }
    let ranks = rank_matrix(means);
    Ok((0..k)
        .map(|c| ranks.iter().map(|r| r[c]).sum::<f64>() / means.len() as f64)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Friedman {
    pub statistic: f64,
    pub p_value: f64,
}

/// Friedman chi-square test on a `[dataset][classifier]` rank matrix.
pub fn friedman_test(ranks: &[Vec<f64>]) -> Result<Friedman> {
    let n = ranks.len();
    let k = ranks.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(Error::input("the Friedman test needs at least two datasets and two classifiers"));
    }
    if ranks.iter().any(|r| r.len() != k) {
        return Err(Error::input("rank matrix is not rectangular"));
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = (0..k)
        .map(|c| {
            let r = ranks.iter().map(|row| row[c]).sum::<f64>() / nf;
            r * r
        })
        .sum();
    let statistic = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let chi = ChiSquared::new(kf - 1.0).expect("positive degrees of freedom");
    Ok(Friedman {
        statistic,
        p_value: (1.0 - chi.cdf(statistic)).clamp(0.0, 1.0),
    })
}

/// Differences closer than this are treated as equal.
const TIE_TOLERANCE: f64 = 1e-12;

/// Two-sided Wilcoxon signed-rank p-value by normal approximation with tie
/// and continuity corrections. Zero differences are dropped; when none
/// remain the p-value is 1.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::input("Wilcoxon test needs paired samples of equal length"));
    }
    let mut d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|v| v.abs() > TIE_TOLERANCE)
        .collect();
    let n = d.len();
    if n == 0 {
        log::warn!("all paired differences are zero; Wilcoxon p-value set to 1");
        return Ok(1.0);
    }
    if n < 5 {
        log::warn!("only {n} non-zero differences; the normal approximation is unreliable");
    }
    d.sort_by(|x, y| x.abs().partial_cmp(&y.abs()).expect("finite differences"));
    let mut w_plus = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && (d[j + 1].abs() - d[i].abs()).abs() <= TIE_TOLERANCE {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        let mid = (i + j) as f64 / 2.0 + 1.0;
        w_plus += d[i..=j].iter().filter(|v| **v > 0.0).count() as f64 * mid;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return Ok(1.0);
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok((2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0))
}

/// Holm step-down: the sorted p-values are rejected in turn while
/// `p_(i) <= alpha / (k - i + 1)`; the first failure stops the procedure.
pub fn holm_reject(p_values: &[f64], alpha: f64) -> Vec<bool> {
    let k = p_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).expect("comparable p-values"));
    let mut rejected = vec![false; k];
    for (i, &idx) in order.iter().enumerate() {
        if p_values[idx] <= alpha / (k - i) as f64 {
            rejected[idx] = true;
        } else {
            break;
        }
    }
    rejected
}

/// Significance of every pair after Holm correction.
pub fn holm_pairwise(pairwise_p: &[Vec<f64>], alpha: f64) -> Vec<Vec<bool>> {
    let k = pairwise_p.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let ps: Vec<f64> = pairs.iter().map(|&(i, j)| pairwise_p[i][j]).collect();
    let rejected = holm_reject(&ps, alpha);
    let mut out = vec![vec![false; k]; k];
    for (&(i, j), &r) in pairs.iter().zip(&rejected) {
        out[i][j] = r;
        out[j][i] = r;
    }
    out
}

/// Classifier indices in rank order (best first, ties by index).
pub fn rank_order(avg_ranks: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..avg_ranks.len()).collect();
    order.sort_by(|&a, &b| {
        avg_ranks[a]
            .partial_cmp(&avg_ranks[b])
            .expect("finite ranks")
            .then(a.cmp(&b))
    });
    order
}

/// Maximal runs of rank-ordered classifiers with no significant pair inside.
///
/// Every classifier belongs to at least one clique; a run contained in an
/// earlier one is not reported.
pub fn holm_cliques(avg_ranks: &[f64], pairwise_p: &[Vec<f64>], alpha: f64) -> Vec<Vec<usize>> {
    let rejected = holm_pairwise(pairwise_p, alpha);
    let order = rank_order(avg_ranks);
    let k = order.len();
    let mut cliques = Vec::new();
    let mut covered_to: Option<usize> = None;
    for s in 0..k {
        let mut e = s;
        while e + 1 < k && (s..=e).all(|i| !rejected[order[i]][order[e + 1]]) {
            e += 1;
        }
        if covered_to.map_or(true, |c| e > c) {
            cliques.push(order[s..=e].to_vec());
            covered_to = Some(e);
        }
    }
    cliques
}

/// Everything reported by a rank comparison.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub classifiers: Vec<String>,
    pub datasets: Vec<String>,
    pub avg_ranks: Vec<f64>,
    pub friedman: Option<Friedman>,
    pub pairwise_p: Vec<Vec<f64>>,
    pub cliques: Vec<Vec<usize>>,
    pub alpha: f64,
}

impl RankReport {
    pub fn from_table(table: &ResultTable, alpha: f64) -> Result<Self> {
        let (classifiers, datasets, means) = table.mean_matrix()?;
        let avg_ranks = average_ranks(&means)?;
        let ranks = rank_matrix(&means);
        let friedman = if datasets.len() >= 2 {
            Some(friedman_test(&ranks)?)
        } else {
            log::warn!("the Friedman test needs at least two datasets; skipped");
            None
        };
        let k = classifiers.len();
        let column = |c: usize| -> Vec<f64> { means.iter().map(|r| r[c]).collect() };
        let mut pairwise_p = vec![vec![1.0; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let p = wilcoxon_signed_rank(&column(i), &column(j))?;
                pairwise_p[i][j] = p;
                pairwise_p[j][i] = p;
            }
        }
        let cliques = holm_cliques(&avg_ranks, &pairwise_p, alpha);
        Ok(RankReport {
            classifiers,
            datasets,
            avg_ranks,
            friedman,
            pairwise_p,
            cliques,
            alpha,
        })
    }

    /// Writes `ranks.csv`, `friedman.txt`, `pairwise.csv` and `cliques.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
        };
        write("ranks.csv", self.ranks_csv())?;
        write("friedman.txt", self.friedman_text())?;
        write("pairwise.csv", self.pairwise_csv())?;
        write("cliques.txt", self.cliques_text())?;
        Ok(())
    }

    pub fn ranks_csv(&self) -> String {
        let mut s = String::from("classifier,avg_rank\n");
        for i in rank_order(&self.avg_ranks) {
            let _ = writeln!(s, "{},{:.6}", self.classifiers[i], self.avg_ranks[i]);
        }
        s
    }

    pub fn friedman_text(&self) -> String {
        match self.friedman {
            Some(f) => format!(
                "classifiers {}\ndatasets {}\nstatistic {:.6}\np_value {:.6e}\n",
                self.classifiers.len(),
                self.datasets.len(),
                f.statistic,
                f.p_value
            ),
            None => format!(
                "classifiers {}\ndatasets {}\nnot computed: needs at least two datasets\n",
                self.classifiers.len(),
                self.datasets.len()
            ),
        }
    }

    pub fn pairwise_csv(&self) -> String {
        let mut s = String::from("classifier");
        for c in &self.classifiers {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
        for (c, row) in self.classifiers.iter().zip(&self.pairwise_p) {
            s.push_str(c);
            for p in row {
                let _ = write!(s, ",{p:.6e}");
            }
            s.push('\n');
        }
        s
    }

    /// One clique per line, best rank first: `rank_lo-rank_hi: A, B, C`.
    pub fn cliques_text(&self) -> String {
        let mut s = format!("alpha {}\n", self.alpha);
        for clique in &self.cliques {
            let lo = self.avg_ranks[clique[0]];
            let hi = self.avg_ranks[*clique.last().expect("non-empty clique")];
            let names: Vec<&str> = clique.iter().map(|&i| self.classifiers[i].as_str()).collect();
            let _ = writeln!(s, "{lo:.3}-{hi:.3}: {}", names.join(", "));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_and_standard_error() {
        assert_eq!(mean_and_stderr(&[1.0, 1.0]).unwrap(), (1.0, 0.0));
        let (m, se) = mean_and_stderr(&[0.8, 1.0]).unwrap();
        assert_abs_diff_eq!(m, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(se, 0.1, epsilon = 1e-12);
        assert_eq!(mean_and_stderr(&[0.7]).unwrap(), (0.7, 0.0));
        assert!(mean_and_stderr(&[]).is_err());
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_descending(&[0.9, 0.8, 0.7]), vec![1.0, 2.0, 3.0]);
        assert_eq!(rank_descending(&[0.9, 0.9, 0.7]), vec![1.5, 1.5, 3.0]);
        let m = vec![vec![0.9, 0.8, 0.7]; 4];
        assert_eq!(average_ranks(&m).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn friedman_two_classifiers() {
        let ranks = vec![vec![1.0, 2.0]; 10];
        let f = friedman_test(&ranks).unwrap();
        assert_abs_diff_eq!(f.statistic, 10.0, epsilon = 1e-12);
        assert!(f.p_value < 0.01);
        let tied = vec![vec![1.5, 1.5]; 10];
        let f = friedman_test(&tied).unwrap();
        assert_eq!(f.statistic, 0.0);
        assert_abs_diff_eq!(f.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn wilcoxon_cases() {
        let a: Vec<f64> = (0..20).map(|i| 0.5 + i as f64 * 0.01).collect();
        assert_eq!(wilcoxon_signed_rank(&a, &a).unwrap(), 1.0);
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + 0.001 * (i + 1) as f64).collect();
        let p = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(p < 0.001);
        assert_eq!(p, wilcoxon_signed_rank(&b, &a).unwrap());
    }

    #[test]
    fn holm_step_down() {
        assert_eq!(holm_reject(&[0.001, 0.6, 0.7], 0.05), vec![true, false, false]);
        // 0.02 > 0.05 / 2 stops the procedure before 0.03
        assert_eq!(holm_reject(&[0.01, 0.02, 0.03], 0.05), vec![true, true, true]);
        assert_eq!(holm_reject(&[0.04, 0.01, 0.03], 0.05), vec![false, true, false]);
    }

    #[test]
    fn clique_shapes() {
        let ranks = [1.0, 2.0, 3.0];
        let ones = vec![vec![1.0; 3]; 3];
        assert_eq!(holm_cliques(&ranks, &ones, 0.05), vec![vec![0, 1, 2]]);
        let zeros = vec![vec![0.0; 3]; 3];
        assert_eq!(holm_cliques(&ranks, &zeros, 0.05), vec![vec![0], vec![1], vec![2]]);
        // only the extreme pair differs
        let mut p = ones.clone();
        p[0][2] = 0.0;
        p[2][0] = 0.0;
        assert_eq!(holm_cliques(&ranks, &p, 0.05), vec![vec![0, 1], vec![1, 2]]);
    }
}
