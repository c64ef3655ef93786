use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Keypoint positions `0, r, 2r, ...` below `m`.
pub fn sample_keypoints(m: usize, r: usize) -> Result<Vec<usize>> {
    if r == 0 {
        return Err(Error::param("sampling rate must be at least 1"));
    }
    Ok((0..m).step_by(r).collect())
}

/// Maps any integer index into `0..m` by mirror reflection about the edges,
/// repeating the edge sample (`d c b a | a b c d | d c b a`).
#[inline]
pub(crate) fn reflect(i: isize, m: usize) -> usize {
    let m = m as isize;
    let period = 2 * m;
    let mut j = i.rem_euclid(period);
    if j >= m {
        j = period - 1 - j;
    }
    j as usize
}

/// Normalised Gaussian kernel of standard deviation `s` on `-radius..=radius`.
pub fn gaussian_kernel(s: f64) -> Result<Vec<f64>> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param(format!("filter width must be positive, got {s}")));
    }
    let radius = (4.0 * s).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * s * s)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / total).collect())
}

/// Convolution with a truncated Gaussian, reflecting past both ends.
pub fn gaussian_filter<T: Scalar>(series: &[T], s: f64) -> Result<Vec<T>> {
    let kernel = gaussian_kernel(s)?;
    let m = series.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let radius = (kernel.len() / 2) as isize;
    Ok((0..m as isize)
        .map(|t| {
            let acc: f64 = kernel
                .iter()
                .enumerate()
                .map(|(i, &k)| k * series[reflect(t + i as isize - radius, m)].as_f64())
                .sum();
            T::of(acc)
        })
        .collect())
}

/// Block gradient descriptor of length `2 * n_b` around `pos`.
///
/// The span covers `n_b * a` points starting `n_b * a / 2` before `pos`;
/// positions past either end are reflected back into the series. Each
/// point's central-difference gradient is weighted by
/// `exp(-d^2 / (2 sigma^2))`, `d` its offset from `pos` and
/// `sigma = n_b * a / 2`. Entry `2i` sums the positive weighted gradients
/// of block `i`, entry `2i + 1` the negative ones.
pub fn describe_keypoint<T: Scalar>(filtered: &[T], pos: usize, n_b: usize, a: usize) -> Result<Vec<T>> {
    if n_b == 0 || a == 0 {
        return Err(Error::param("descriptor needs at least one block of at least one point"));
    }
    let m = filtered.len();
    if pos >= m {
        return Err(Error::param(format!("keypoint {pos} outside series of length {m}")));
    }
    let span = n_b * a;
    let sigma = span as f64 / 2.0;
    let start = pos as isize - (span / 2) as isize;
    let mut out = vec![T::zero(); 2 * n_b];
    for t in 0..span {
        let point = start + t as isize;
        let at = reflect(point, m) as isize;
        let g = (filtered[reflect(at + 1, m)].as_f64() - filtered[reflect(at - 1, m)].as_f64()) / 2.0;
        let d = (point - pos as isize) as f64;
        let weighted = g * (-(d * d) / (2.0 * sigma * sigma)).exp();
        let block = t / a;
        if weighted > 0.0 {
            out[2 * block] = out[2 * block] + T::of(weighted);
        } else if weighted < 0.0 {
            out[2 * block + 1] = out[2 * block + 1] + T::of(weighted);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn keypoint_progressions() {
        assert_eq!(sample_keypoints(10, 3).unwrap(), vec![0, 3, 6, 9]);
        assert_eq!(sample_keypoints(4, 1).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(sample_keypoints(5, 9).unwrap(), vec![0]);
        assert!(sample_keypoints(5, 0).is_err());
    }

    #[test]
    fn reflection() {
        let idx: Vec<usize> = (-4..8).map(|i| reflect(i, 4)).collect();
        assert_eq!(idx, vec![3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
    }

    #[test]
    fn filter_keeps_constants_and_rejects_bad_width() {
        let out = gaussian_filter(&[2.5f64; 12], 1.3).unwrap();
        assert!(out.iter().all(|v| (v - 2.5).abs() < 1e-12));
        assert!(gaussian_filter(&[1.0, 2.0], 0.0).is_err());
        assert!(gaussian_filter(&[1.0, 2.0], -1.0).is_err());
    }

    #[test]
    fn ramp_descriptor_by_hand() {
        // x_t = t: interior gradients are 1, edge gradient (x1 - x0) / 2
        let x: Vec<f64> = (0..10).map(|t| t as f64).collect();
        let d = describe_keypoint(&x, 5, 2, 2).unwrap();
        // span 3..7, sigma 2
        let w = |off: f64| (-(off * off) / 8.0).exp();
        assert_abs_diff_eq!(d[0], w(-2.0) + w(-1.0), epsilon = 1e-12);
        assert_eq!(d[1], 0.0);
        assert_abs_diff_eq!(d[2], w(0.0) + w(1.0), epsilon = 1e-12);
        assert_eq!(d[3], 0.0);
    }
}
