use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Stratified redraw of a train/test split.
///
/// Seed 0 returns the original split. Any other seed pools both sets, shuffles
/// each class and redraws with the original per-class train and test counts.
/// Output cases are grouped by class.
pub fn stratified_resample<T: Scalar>(
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
    seed: u64,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    if train.class_names() != test.class_names() {
        return Err(Error::input("train and test use different class mappings"));
    }
    if train.series_length() != test.series_length() && !train.is_empty() && !test.is_empty() {
        return Err(Error::input("train and test series lengths differ"));
    }
    if seed == 0 {
        return Ok((train.clone(), test.clone()));
    }

    let n_classes = train.n_classes();
    let train_counts = train.class_counts();
    let mut pools: Vec<Vec<(bool, usize)>> = vec![Vec::new(); n_classes];
    for (i, &c) in train.labels().iter().enumerate() {
        pools[c].push((true, i));
    }
    for (i, &c) in test.labels().iter().enumerate() {
        pools[c].push((false, i));
    }
    if let Some(c) = pools.iter().position(Vec::is_empty) {
        return Err(Error::input(format!(
            "class {:?} has no cases to resample",
            train.class_names()[c]
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut new_train = (Vec::new(), Vec::new());
    let mut new_test = (Vec::new(), Vec::new());
    for (c, pool) in pools.iter_mut().enumerate() {
        pool.shuffle(&mut rng);
        for (k, &(from_train, i)) in pool.iter().enumerate() {
            let values = if from_train {
                train.series()[i].values().to_vec()
            } else {
                test.series()[i].values().to_vec()
            };
            let dest = if k < train_counts[c] {
                &mut new_train
            } else {
                &mut new_test
            };
            dest.0.push(values);
            dest.1.push(c);
        }
    }
    let names = train.class_names().to_vec();
    Ok((
        LabeledDataset::new(train.name(), new_train.0, new_train.1, names.clone())?,
        LabeledDataset::new(test.name(), new_test.0, new_test.1, names)?,
    ))
}

/// Splits `data` into train and test sets holding the first `n_train`
/// cases of each class and the rest, in their original order.
pub fn split_per_class<T: Scalar>(
    data: &LabeledDataset<T>,
    n_train: usize,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    let mut seen = vec![0usize; data.n_classes()];
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, &c) in data.labels().iter().enumerate() {
        if seen[c] < n_train {
            train.push(i);
        } else {
            test.push(i);
        }
        seen[c] += 1;
    }
    if let Some(c) = seen.iter().position(|&n| n <= n_train) {
        return Err(Error::input(format!(
            "class {:?} has {} cases, too few for {n_train} training cases and a test case",
            data.class_names()[c],
            seen[c]
        )));
    }
    Ok((data.subset(&train), data.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split() -> (LabeledDataset<f64>, LabeledDataset<f64>) {
        let names = vec!["a".to_string(), "b".to_string()];
        let train = LabeledDataset::new(
            "d",
            (0..5).map(|i| vec![i as f64, 0.0]).collect(),
            vec![0, 0, 1, 1, 1],
            names.clone(),
        )
        .unwrap();
        let test = LabeledDataset::new(
            "d",
            (5..12).map(|i| vec![i as f64, 0.0]).collect(),
            vec![0, 1, 0, 1, 0, 1, 1],
            names,
        )
        .unwrap();
        (train, test)
    }

    #[test]
    fn seed_zero_is_identity() {
        let (tr, te) = split();
        let (a, b) = stratified_resample(&tr, &te, 0).unwrap();
        assert_eq!(a, tr);
        assert_eq!(b, te);
    }

    #[test]
    fn counts_membership_and_determinism() {
        let (tr, te) = split();
        for seed in 1..20 {
            let (a, b) = stratified_resample(&tr, &te, seed).unwrap();
            assert_eq!(a.class_counts(), tr.class_counts());
            assert_eq!(b.class_counts(), te.class_counts());
            let mut all: Vec<f64> = a.series().iter().chain(b.series()).map(|s| s.values()[0]).collect();
            all.sort_by(|x, y| x.partial_cmp(y).unwrap());
            assert_eq!(all, (0..12).map(|i| i as f64).collect::<Vec<_>>());
            let (a2, b2) = stratified_resample(&tr, &te, seed).unwrap();
            assert_eq!((a2, b2), (a, b));
        }
    }

    #[test]
    fn per_class_split() {
        let (tr, _) = split();
        let (a, b) = split_per_class(&tr, 1).unwrap();
        assert_eq!(a.labels(), &[0, 1]);
        assert_eq!(b.labels(), &[0, 1, 1]);
        assert_eq!(a.series()[1].values()[0], 2.0);
        assert!(split_per_class(&tr, 2).is_err());
    }

    #[test]
    fn empty_class_is_rejected() {
        let names = vec!["a".to_string(), "b".to_string(), "ghost".to_string()];
        let tr = LabeledDataset::new("d", vec![vec![1.0], vec![2.0]], vec![0, 1], names.clone()).unwrap();
        let te = LabeledDataset::new("d", vec![vec![3.0]], vec![0], names).unwrap();
        assert!(matches!(stratified_resample(&tr, &te, 3), Err(Error::InvalidInput(_))));
    }
}
