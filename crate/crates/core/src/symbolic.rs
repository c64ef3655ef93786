//! Window approximation and discretisation.
//!
//! A window of `w` raw values is compressed to `l` reals, either by piecewise
//! aggregate approximation (PAA) or by keeping the first Fourier terms, and
//! each real is mapped to one of `alpha` symbols by a row of breakpoints.
//!
//! Conventions shared by every discretiser:
//!
//! * a value equal to a breakpoint falls in the lower bin, i.e. the symbol is
//!   the number of breakpoints strictly below the value;
//! * the DFT is unnormalised (`q_k = sum_j x_j e^{-2 pi i jk/w}`) and laid out
//!   as interleaved `(re, im)` pairs;
//! * a window whose standard deviation is below [`FLAT_STD`] standardises to
//!   all zeros.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Windows flatter than this are treated as constant when standardised.
pub const FLAT_STD: f64 = 1e-8;

/// How a window is compressed from `w` to `l` values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approximation {
    /// Piecewise aggregate approximation of the z-normalised window.
    Paa,
    /// Truncated discrete Fourier transform.
    Dft,
}

/// A discretised window: `l` symbols over an alphabet of size `alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<u8>,
    alpha: usize,
}

impl Word {
    pub fn new(symbols: Vec<u8>, alpha: usize) -> Result<Self> {
        check_word_space(symbols.len(), alpha)?;
        if let Some(bad) = symbols.iter().find(|&&s| s as usize >= alpha) {
            return Err(Error::param(format!(
                "symbol {bad} outside alphabet of size {alpha}"
            )));
        }
        Ok(Word { symbols, alpha })
    }

    /// Unpacks a key produced by [`Word::key`].
    pub fn from_key(key: u64, l: usize, alpha: usize) -> Result<Self> {
        check_word_space(l, alpha)?;
        let a = alpha as u64;
        let mut rest = key;
        let mut symbols = Vec::with_capacity(l);
        for _ in 0..l {
            symbols.push((rest % a) as u8);
            rest /= a;
        }
        if rest != 0 {
            return Err(Error::param(format!(
                "key {key} does not fit {l} symbols over alphabet {alpha}"
            )));
        }
        Ok(Word { symbols, alpha })
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `sum symbols[i] * alpha^i`.
    pub fn key(&self) -> u64 {
        pack(&self.symbols, self.alpha)
    }
}

/// Checks that every word of `l` symbols over `alpha` has a distinct `u64` key.
pub fn check_word_space(l: usize, alpha: usize) -> Result<()> {
    if !(2..=256).contains(&alpha) {
        return Err(Error::param(format!(
            "alphabet size must be in 2..=256, got {alpha}"
        )));
    }
    let mut space: u128 = 1;
    for _ in 0..l {
        space *= alpha as u128;
        if space > 1u128 << 64 {
            return Err(Error::param(format!(
                "{alpha}^{l} words do not fit a 64-bit key"
            )));
        }
    }
    Ok(())
}

pub(crate) fn pack(symbols: &[u8], alpha: usize) -> u64 {
    let a = alpha as u64;
    symbols
        .iter()
        .rev()
        .fold(0u64, |acc, &s| acc.wrapping_mul(a).wrapping_add(s as u64))
}

/// Mean and population standard deviation; flat windows report a zero deviation.
pub fn window_stats<T: Scalar>(window: &[T]) -> (T, T) {
    let n = T::of_usize(window.len());
    let mean = window.iter().fold(T::zero(), |acc, &x| acc + x) / n;
    let var = window
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x - mean) * (x - mean))
        / n;
    let sd = var.sqrt();
    if sd.as_f64() < FLAT_STD {
        (mean, T::zero())
    } else {
        (mean, sd)
    }
}

/// Z-normalises a window. Flat windows map to all zeros.
pub fn z_normalize<T: Scalar>(window: &[T]) -> Vec<T> {
    let (mean, sd) = window_stats(window);
    if sd == T::zero() {
        return vec![T::zero(); window.len()];
    }
    window.iter().map(|&x| (x - mean) / sd).collect()
}

/// Piecewise aggregate approximation of `window` to `l` chunk means.
///
/// When `l` does not divide the window length each sample is weighted by its
/// overlap with the chunk, so every chunk covers exactly `w / l` samples.
pub fn paa<T: Scalar>(window: &[T], l: usize) -> Result<Vec<T>> {
    let w = window.len();
    if l < 1 || l > w {
        return Err(Error::param(format!(
            "PAA needs 1 <= l <= w, got l = {l}, w = {w}"
        )));
    }
    let mut out = Vec::with_capacity(l);
    for i in 0..l {
        // chunk i covers [i*w, (i+1)*w) on a grid where each sample spans l units
        let lo = i * w;
        let hi = (i + 1) * w;
        let mut sum = T::zero();
        let mut j = lo / l;
        while j * l < hi {
            let overlap = hi.min((j + 1) * l) - lo.max(j * l);
            sum = sum + window[j] * T::of_usize(overlap);
            j += 1;
        }
        out.push(sum / T::of_usize(w));
    }
    Ok(out)
}

/// PAA of the window `series[start..start + w]` from prefix sums, `O(l)`.
fn paa_from_prefix<T: Scalar>(
    series: &[T],
    prefix: &[T],
    start: usize,
    w: usize,
    l: usize,
    out: &mut [T],
) {
    for (i, slot) in out.iter_mut().enumerate().take(l) {
        let lo = i * w;
        let hi = (i + 1) * w;
        let first_full = lo.div_ceil(l);
        let end_full = hi / l;
        let mut sum = T::zero();
        if end_full > first_full {
            sum = (prefix[start + end_full] - prefix[start + first_full]) * T::of_usize(l);
        }
        if lo < first_full * l {
            sum = sum + series[start + first_full - 1] * T::of_usize(first_full * l - lo);
        }
        if hi > end_full * l {
            sum = sum + series[start + end_full] * T::of_usize(hi - end_full * l);
        }
        *slot = sum / T::of_usize(w);
    }
}

/// Standard-normal quantiles at `i / alpha` for `i = 1..alpha`.
pub fn gaussian_breakpoints(alpha: usize) -> Result<Vec<f64>> {
    if alpha < 2 {
        return Err(Error::param(format!(
            "alphabet size must be at least 2, got {alpha}"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut bps: Vec<f64> = (1..alpha)
        .map(|i| normal.inverse_cdf(i as f64 / alpha as f64))
        .collect();
    // enforce exact antisymmetry; the quantile routine is only accurate to ~1e-15
    let n = bps.len();
    for i in 0..n / 2 {
        let v = 0.5 * (bps[n - 1 - i] - bps[i]);
        bps[i] = -v;
        bps[n - 1 - i] = v;
    }
    if n % 2 == 1 {
        bps[n / 2] = 0.0;
    }
    Ok(bps)
}

/// SAX word of one window: z-normalise, PAA, then Gaussian bins.
///
/// Normalisation is applied after averaging, `(paa(x) - mean) / sd`, which is
/// the same quantity as `paa(z_normalize(x))` by linearity.
pub fn sax_word<T: Scalar>(window: &[T], l: usize, alpha: usize) -> Result<Word> {
    let raw = paa(window, l)?;
    let table = BreakpointTable::<T>::gaussian(l, alpha)?;
    let (mean, sd) = window_stats(window);
    let approx: Vec<T> = if sd == T::zero() {
        vec![T::zero(); l]
    } else {
        raw.iter().map(|&v| (v - mean) / sd).collect()
    };
    table.discretise(&approx)
}

fn check_dft_params(w: usize, l: usize, p: bool) -> Result<()> {
    if l == 0 || l % 2 != 0 {
        return Err(Error::param(format!(
            "DFT word length must be even and positive, got {l}"
        )));
    }
    let needed = l / 2 + usize::from(p);
    if needed > w {
        return Err(Error::param(format!(
            "window of length {w} has too few Fourier terms for l = {l}"
        )));
    }
    Ok(())
}

/// `cos` and `sin` of `2 pi n / w` for `n = 0..w`.
fn twiddles<T: Scalar>(w: usize) -> (Vec<T>, Vec<T>) {
    let step = T::TAU() / T::of_usize(w);
    (0..w)
        .map(|n| {
            let angle = step * T::of_usize(n);
            (angle.cos(), angle.sin())
        })
        .unzip()
}

/// Direct DFT of coefficients `first..first + count`, interleaved into `out`.
fn dft_direct<T: Scalar>(window: &[T], first: usize, count: usize, cos: &[T], sin: &[T], out: &mut [T]) {
    let w = window.len();
    for c in 0..count {
        let k = first + c;
        let mut re = T::zero();
        let mut im = T::zero();
        for (j, &x) in window.iter().enumerate() {
            let n = (j * k) % w;
            re = re + x * cos[n];
            im = im - x * sin[n];
        }
        out[2 * c] = re;
        out[2 * c + 1] = im;
    }
}

/// Truncated DFT of one window.
///
/// With `p` the mean term is dropped and `q_1 .. q_{l/2}` are returned,
/// otherwise `q_0 .. q_{l/2 - 1}` (the imaginary part of `q_0` is always zero
/// but still emitted).
pub fn dft_truncate<T: Scalar>(window: &[T], l: usize, p: bool) -> Result<Vec<T>> {
    check_dft_params(window.len(), l, p)?;
    let (cos, sin) = twiddles::<T>(window.len());
    let mut out = vec![T::zero(); l];
    dft_direct(window, usize::from(p), l / 2, &cos, &sin, &mut out);
    Ok(out)
}

/// Per-position breakpoints mapping an approximation vector to a word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakpointTable<T> {
    rows: Vec<Vec<T>>,
    alpha: usize,
}

impl<T: Scalar> BreakpointTable<T> {
    /// Validates rows: equal width `alpha - 1`, non-decreasing, finite.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let alpha = rows.first().map(|r| r.len() + 1).unwrap_or(2);
        if alpha < 2 {
            return Err(Error::param("breakpoint rows must be non-empty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() + 1 != alpha {
                return Err(Error::param(format!(
                    "breakpoint row {i} has {} values, expected {}",
                    row.len(),
                    alpha - 1
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::param(format!("breakpoint row {i} is not finite")));
            }
            if row.windows(2).any(|p| p[1] < p[0]) {
                return Err(Error::param(format!("breakpoint row {i} is decreasing")));
            }
        }
        check_word_space(rows.len(), alpha)?;
        Ok(BreakpointTable { rows, alpha })
    }

    /// The fixed SAX table: every row holds the Gaussian breakpoints.
    pub fn gaussian(l: usize, alpha: usize) -> Result<Self> {
        let row: Vec<T> = gaussian_breakpoints(alpha)?
            .into_iter()
            .map(T::of)
            .collect();
        check_word_space(l, alpha)?;
        Ok(BreakpointTable {
            rows: vec![row; l],
            alpha,
        })
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn word_length(&self) -> usize {
        self.rows.len()
    }

    /// The table restricted to its first `l` rows.
    pub fn prefix(&self, l: usize) -> Result<Self> {
        if l > self.rows.len() {
            return Err(Error::param(format!(
                "table has {} rows, {l} requested",
                self.rows.len()
            )));
        }
        Ok(BreakpointTable {
            rows: self.rows[..l].to_vec(),
            alpha: self.alpha,
        })
    }

    /// Symbol of `value` in row `i`: the number of breakpoints strictly below it.
    #[inline]
    pub fn symbol(&self, i: usize, value: T) -> u8 {
        self.rows[i].partition_point(|&b| b < value) as u8
    }

    pub fn discretise(&self, coeffs: &[T]) -> Result<Word> {
        if coeffs.len() != self.rows.len() {
            return Err(Error::param(format!(
                "{} coefficients against a table of {} rows",
                coeffs.len(),
                self.rows.len()
            )));
        }
        let symbols = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| self.symbol(i, c))
            .collect();
        Ok(Word {
            symbols,
            alpha: self.alpha,
        })
    }

    /// Packed key of the first `l` symbols of `coeffs`.
    #[inline]
    pub(crate) fn key_of(&self, coeffs: &[T], l: usize) -> u64 {
        let a = self.alpha as u64;
        let mut key = 0u64;
        for i in (0..l).rev() {
            key = key.wrapping_mul(a).wrapping_add(self.symbol(i, coeffs[i]) as u64);
        }
        key
    }

    /// One row per line, values space separated with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map(T::of).map_err(|e| Error::Parse {
                        path: "<breakpoints>".into(),
                        line: n + 1,
                        message: format!("bad breakpoint {tok:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Equi-depth breakpoints of one pooled sample.
///
/// Breakpoint `j` (0-based) is the sorted value at 1-based rank
/// `ceil((j + 1) * n / alpha)`.
pub fn equi_depth_breakpoints<T: Scalar>(pool: &mut [T], alpha: usize) -> Result<Vec<T>> {
    if pool.is_empty() {
        return Err(Error::input("cannot bin an empty sample"));
    }
    if alpha < 2 {
        return Err(Error::param(format!(
            "alphabet size must be at least 2, got {alpha}"
        )));
    }
    pool.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
    let n = pool.len();
    Ok((0..alpha - 1)
        .map(|j| {
            let rank = ((j + 1) * n).div_ceil(alpha);
            pool[rank.max(1) - 1]
        })
        .collect())
}

/// Compresses every window of a series; the shared first stage of all bags.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowApproximator {
    pub approx: Approximation,
    pub w: usize,
    pub l: usize,
    pub p: bool,
    /// Scale DFT terms to unit variance for fixed Gaussian breakpoints.
    pub standardise: bool,
}

impl WindowApproximator {
    pub fn new(approx: Approximation, w: usize, l: usize, p: bool, standardise: bool) -> Result<Self> {
        if w < 2 {
            return Err(Error::param(format!("window length must be at least 2, got {w}")));
        }
        match approx {
            Approximation::Paa if l < 1 || l > w => {
                return Err(Error::param(format!(
                    "PAA needs 1 <= l <= w, got l = {l}, w = {w}"
                )))
            }
            Approximation::Dft => check_dft_params(w, l, p)?,
            _ => {}
        }
        Ok(WindowApproximator {
            approx,
            w,
            l,
            p,
            standardise,
        })
    }

    pub fn n_windows(&self, m: usize) -> usize {
        (m + 1).saturating_sub(self.w)
    }

    /// Approximations of windows `0..=m-w`, flattened row-major (`l` per window).
    pub fn all_windows<T: Scalar>(&self, series: &[T]) -> Result<Vec<T>> {
        let m = series.len();
        if m < self.w {
            return Err(Error::param(format!(
                "window exceeds series length ({} > {m})",
                self.w
            )));
        }
        let n = self.n_windows(m);
        let mut out = vec![T::zero(); n * self.l];
        match self.approx {
            Approximation::Paa => self.paa_windows(series, &mut out),
            Approximation::Dft => self.dft_windows(series, &mut out),
        }
        Ok(out)
    }

    /// Rows of `all_windows` output that start a disjoint window (`j % w == 0`).
    pub fn disjoint_rows<'a, T: Scalar>(&self, approximations: &'a [T]) -> impl Iterator<Item = &'a [T]> + 'a {
        let l = self.l;
        let w = self.w;
        approximations.chunks_exact(l).step_by(w)
    }

    fn paa_windows<T: Scalar>(&self, series: &[T], out: &mut [T]) {
        let (w, l) = (self.w, self.l);
        let mut prefix = Vec::with_capacity(series.len() + 1);
        prefix.push(T::zero());
        for &x in series {
            let last = *prefix.last().expect("non-empty prefix");
            prefix.push(last + x);
        }
        for (j, row) in out.chunks_exact_mut(l).enumerate() {
            let (mean, sd) = window_stats(&series[j..j + w]);
            if sd == T::zero() {
                row.iter_mut().for_each(|v| *v = T::zero());
                continue;
            }
            paa_from_prefix(series, &prefix, j, w, l, row);
            row.iter_mut().for_each(|v| *v = (*v - mean) / sd);
        }
    }

    /// Sliding DFT, recomputed directly at every disjoint-window start.
    ///
    /// `q_k(j+1) = (q_k(j) - x_j + x_{j+w}) e^{2 pi i k / w}`.
    fn dft_windows<T: Scalar>(&self, series: &[T], out: &mut [T]) {
        let (w, l) = (self.w, self.l);
        let first = usize::from(self.p);
        let count = l / 2;
        let (cos, sin) = twiddles::<T>(w);
        let rot: Vec<(T, T)> = (0..count)
            .map(|c| {
                let n = (first + c) % w;
                (cos[n], sin[n])
            })
            .collect();
        let mut state = vec![T::zero(); l];
        let n = out.len() / l;
        for j in 0..n {
            if j % w == 0 {
                dft_direct(&series[j..j + w], first, count, &cos, &sin, &mut state);
            } else {
                let d = series[j + w - 1] - series[j - 1];
                for (c, &(rc, rs)) in rot.iter().enumerate() {
                    let re = state[2 * c] + d;
                    let im = state[2 * c + 1];
                    state[2 * c] = re * rc - im * rs;
                    state[2 * c + 1] = re * rs + im * rc;
                }
            }
            out[j * l..(j + 1) * l].copy_from_slice(&state);
        }
        if self.standardise {
            let scale = (T::of(2.0) / T::of_usize(w)).sqrt();
            for (j, row) in out.chunks_exact_mut(l).enumerate() {
                let (_, sd) = window_stats(&series[j..j + w]);
                for (c, pair) in row.chunks_exact_mut(2).enumerate() {
                    if sd == T::zero() || first + c == 0 {
                        pair[0] = T::zero();
                        pair[1] = T::zero();
                    } else {
                        pair[0] = pair[0] / sd * scale;
                        pair[1] = pair[1] / sd * scale;
                    }
                }
            }
        }
    }
}

/// Multiple coefficient binning over approximations of disjoint windows.
///
/// Row `i` holds the equi-depth breakpoints of coefficient `i` pooled over
/// the non-overlapping windows starting at `0, w, 2w, ...` of every series; a
/// trailing partial window is discarded.
pub fn mcb_fit_with<T: Scalar>(
    series: &[&[T]],
    approximator: &WindowApproximator,
    alpha: usize,
) -> Result<BreakpointTable<T>> {
    if series.is_empty() {
        return Err(Error::param("MCB needs at least one training series"));
    }
    let l = approximator.l;
    let mut pools: Vec<Vec<T>> = vec![Vec::new(); l];
    for s in series {
        let approx = approximator.all_windows(s)?;
        for row in approximator.disjoint_rows(&approx) {
            for (pool, &v) in pools.iter_mut().zip(row) {
                pool.push(v);
            }
        }
    }
    mcb_from_pools(pools, alpha)
}

pub(crate) fn mcb_from_pools<T: Scalar>(pools: Vec<Vec<T>>, alpha: usize) -> Result<BreakpointTable<T>> {
    let rows = pools
        .into_iter()
        .map(|mut pool| equi_depth_breakpoints(&mut pool, alpha))
        .collect::<Result<Vec<_>>>()?;
    BreakpointTable::from_rows(rows)
}

/// MCB breakpoints for truncated-DFT words of a training set.
pub fn mcb_fit<T: Scalar>(
    train: &LabeledDataset<T>,
    w: usize,
    l: usize,
    alpha: usize,
    p: bool,
) -> Result<BreakpointTable<T>> {
    if train.is_empty() {
        return Err(Error::param("MCB needs at least one training series"));
    }
    let approximator = WindowApproximator::new(Approximation::Dft, w, l, p, false)?;
    let views: Vec<&[T]> = train.series().iter().map(|s| s.values()).collect();
    mcb_fit_with(&views, &approximator, alpha)
}

/// Word of an approximation vector under a fitted table.
pub fn mcb_discretise<T: Scalar>(coeffs: &[T], table: &BreakpointTable<T>) -> Result<Word> {
    table.discretise(coeffs)
}
