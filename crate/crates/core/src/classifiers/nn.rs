use rayon::prelude::*;

use crate::distances::{Measure, SparseVector};
use crate::error::{Error, Result};

/// Index of the closest reference, skipping `skip`. Ties keep the lowest index.
pub(crate) fn nearest_index<V: SparseVector>(
    query: &V,
    refs: &[(V, usize)],
    measure: Measure,
    skip: Option<usize>,
) -> Option<usize> {
    let mut best = f64::INFINITY;
    let mut best_idx = None;
    for (j, (reference, _)) in refs.iter().enumerate() {
        if Some(j) == skip {
            continue;
        }
        let s = measure.score(query, reference, best);
        if s < best || best_idx.is_none() {
            best = s;
            best_idx = Some(j);
        }
    }
    best_idx
}

/// Label of the nearest reference under `measure`.
pub fn nn_classify<V: SparseVector>(query: &V, refs: &[(V, usize)], measure: Measure) -> Result<usize> {
    nearest_index(query, refs, measure, None)
        .map(|j| refs[j].1)
        .ok_or_else(|| Error::input("nearest-neighbour search needs at least one reference"))
}

/// Number of cases whose nearest other case shares their label.
pub(crate) fn loocv_correct<V: SparseVector + Sync>(bags: &[(V, usize)], measure: Measure) -> usize {
    (0..bags.len())
        .into_par_iter()
        .filter(|&i| {
            nearest_index(&bags[i].0, bags, measure, Some(i)).is_some_and(|j| bags[j].1 == bags[i].1)
        })
        .count()
}

/// Leave-one-out 1-NN accuracy.
pub fn loocv_accuracy<V: SparseVector + Sync>(bags: &[(V, usize)], measure: Measure) -> Result<f64> {
    if bags.len() < 2 {
        return Err(Error::input("leave-one-out needs at least two cases"));
    }
    Ok(loocv_correct(bags, measure) as f64 / bags.len() as f64)
}
