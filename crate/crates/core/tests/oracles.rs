use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsdict::bagging::bag_dataset;
use tsdict::classifiers::{
    grid_search, loocv_accuracy, majority_vote, nn_classify, retain_ensemble, retained_len, tfidf_weight, CellScore,
    DictionaryClassifier, DictionaryConfig, MemberParams, ParameterGrid, SaxVsm, Variant,
};
use tsdict::distances::{histogram_intersection, SparseVector};
use tsdict::pyramid::{
    pyramid_distance, retain_sp, segment_of, sp_window_scores, PyramidHistogram, SpClassifier, SpWindowScore, SP_CAP,
};
use tsdict::{Dataset, Measure, SparseHistogram};

fn h(pairs: &[(u64, u32)]) -> SparseHistogram {
    SparseHistogram::from_counts(pairs.iter().copied())
}

#[test]
fn loocv_four_bags() {
    // b ties a and d, c is closest to d, d ties b and c
    let bags = vec![
        (h(&[(0, 3)]), 0),
        (h(&[(0, 2), (1, 1)]), 0),
        (h(&[(1, 3)]), 1),
        (h(&[(0, 1), (1, 2)]), 1),
    ];
    assert_eq!(loocv_accuracy(&bags, Measure::Euclidean).unwrap(), 0.75);
    assert!(loocv_accuracy(&bags[..1], Measure::Euclidean).is_err());
}

#[test]
fn nearest_neighbour_ties_keep_the_first_reference() {
    let refs = vec![(h(&[(0, 1)]), 1), (h(&[(1, 1)]), 0), (h(&[(0, 1)]), 0)];
    let query = h(&[(0, 1), (1, 1)]);
    assert_eq!(nn_classify(&query, &refs, Measure::Euclidean).unwrap(), 1);
    assert_eq!(nn_classify(&h(&[(1, 1)]), &refs, Measure::Euclidean).unwrap(), 0);
    assert_eq!(nn_classify(&query, &refs, Measure::HistogramIntersection).unwrap(), 1);
    assert!(nn_classify(&query, &[], Measure::Euclidean).is_err());

    // boss distance ignores words missing from the query
    let refs = vec![(h(&[(0, 1), (5, 9)]), 1), (h(&[(0, 2)]), 0)];
    assert_eq!(nn_classify(&h(&[(0, 1)]), &refs, Measure::BossDistance).unwrap(), 1);
    assert_eq!(nn_classify(&h(&[(0, 1)]), &refs, Measure::Euclidean).unwrap(), 0);
}

fn random_dataset(seed: u64, n: usize, m: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let series = labels
        .iter()
        .map(|&c| {
            let freq = if c == 0 { 2.0 } else { 5.0 };
            (0..m)
                .map(|t| (freq * t as f64 / m as f64 * std::f64::consts::TAU).sin() + rng.gen_range(-0.8..0.8))
                .collect()
        })
        .collect();
    Dataset::from_labels("random", series, labels).unwrap()
}

#[test]
fn grid_search_matches_brute_force() {
    let data = random_dataset(3, 10, 40);
    let grid = ParameterGrid::new(vec![8, 12, 40, 41], vec![2, 4, 6], vec![3, 4], vec![false, true]).unwrap();
    for variant in Variant::ALL {
        let cfg = variant.config().with_grid(grid.clone());
        let scores = grid_search(&data, &cfg).unwrap();

        let mut expected = Vec::new();
        for &w in &grid.windows {
            for &l in &grid.word_lengths {
                for &alpha in &grid.alphas {
                    for &p in &grid.p_values {
                        let params = MemberParams { w, l, alpha, p };
                        let bag_cfg = params.bag_config(&cfg);
                        let dft = cfg.approx == tsdict::Approximation::Dft;
                        if w > data.series_length() || (!dft && p) || (dft && l / 2 + usize::from(p) > w) {
                            continue;
                        }
                        let bags = bag_dataset(&data, &bag_cfg).unwrap().bags;
                        let accuracy = loocv_accuracy(&bags, cfg.measure).unwrap();
                        expected.push(CellScore { params, accuracy });
                    }
                }
            }
        }
        expected.sort_by(|a, b| {
            b.accuracy
                .partial_cmp(&a.accuracy)
                .unwrap()
                .then((a.params.w, a.params.l, a.params.p, a.params.alpha).cmp(&(
                    b.params.w,
                    b.params.l,
                    b.params.p,
                    b.params.alpha,
                )))
        });
        assert_eq!(scores, expected, "{}", variant.name());
    }
}

#[test]
fn retention_examples() {
    assert_eq!(retained_len(&[1.0, 0.95, 0.92, 0.91], true), 3);
    assert_eq!(retained_len(&[0.5, 0.46, 0.45], true), 2);
    assert_eq!(retained_len(&[0.75, 0.69, 0.6], true), 2);
    assert_eq!(retained_len(&[1.0, 0.95, 0.92], false), 1);
    assert_eq!(retained_len(&[], true), 0);

    let cell = |w, accuracy| CellScore {
        params: MemberParams { w, l: 8, alpha: 4, p: true },
        accuracy,
    };
    let kept = retain_ensemble(&[cell(10, 0.9), cell(11, 0.85), cell(12, 0.8)], true);
    assert_eq!(kept.iter().map(|c| c.params.w).collect::<Vec<_>>(), vec![10, 11]);
}

#[test]
fn majority_vote_examples() {
    assert_eq!(majority_vote(&[1, 1, 0], 2).unwrap(), 1);
    assert_eq!(majority_vote(&[1, 0], 2).unwrap(), 0);
    assert_eq!(majority_vote(&[2, 1, 1, 2, 0], 3).unwrap(), 1);
    assert!(majority_vote(&[], 2).is_err());
}

#[test]
fn ensemble_fits_retained_members() {
    let train = random_dataset(5, 12, 48);
    let grid = ParameterGrid::new(vec![8, 12, 16, 24], vec![4, 6], vec![4], vec![true, false]).unwrap();
    let cfg = DictionaryConfig::boss().with_grid(grid);
    let scores = grid_search(&train, &cfg).unwrap();
    let clf = DictionaryClassifier::fit(&train, &cfg).unwrap();
    let best = scores[0].accuracy;
    let n_kept = scores.iter().filter(|s| s.accuracy >= 0.92 * best - 1e-12).count();
    assert_eq!(clf.members.len(), n_kept);
    for (member, score) in clf.members.iter().zip(&scores) {
        assert_eq!(member.params, score.params);
        assert_eq!(member.train_acc, score.accuracy);
    }
    let test = random_dataset(6, 20, 48);
    assert!(clf.accuracy(&test).unwrap() >= 0.5);
}

#[test]
fn tfidf_table() {
    assert_eq!(tfidf_weight(5, 0, 3), 0.0);
    assert_eq!(tfidf_weight(7, 3, 3), 0.0);
    assert!((tfidf_weight(1, 1, 2) - 2f64.ln() * 2f64.ln()).abs() < 1e-15);
    assert!((tfidf_weight(3, 1, 4) - 4f64.ln() * 4f64.ln()).abs() < 1e-15);

    let bags = [h(&[(1, 2), (2, 1)]), h(&[(1, 1)]), h(&[(2, 3), (3, 1)])];
    let vectors = SaxVsm::class_vectors(&bags, &[0, 0, 1], 2).unwrap();
    let ln2 = 2f64.ln();
    assert!((vectors[0].get(1) - 4f64.ln() * ln2).abs() < 1e-15);
    assert_eq!(vectors[0].get(2), 0.0);
    assert_eq!(vectors[1].get(2), 0.0);
    assert!((vectors[1].get(3) - ln2 * ln2).abs() < 1e-15);
    assert_eq!(vectors[0].get(3), 0.0);
    assert!(SaxVsm::class_vectors(&bags, &[0, 0, 0], 2).is_err());
}

#[test]
fn saxvsm_separates_frequencies() {
    let train = random_dataset(8, 12, 64);
    let test = random_dataset(9, 20, 64);
    let model = SaxVsm::fit(&train, 16, 4, 4).unwrap();
    assert!(model.accuracy(&test).unwrap() >= 0.8);
}

#[test]
fn segment_examples() {
    let sizes = |m: usize, n: usize| {
        let mut s = vec![0; n];
        for j in 0..m {
            s[segment_of(j, m, n)] += 1;
        }
        s
    };
    assert_eq!(sizes(10, 4), vec![3, 3, 2, 2]);
    assert_eq!(sizes(8, 2), vec![4, 4]);
    assert_eq!(sizes(7, 1), vec![7]);
    assert_eq!(sizes(9, 4), vec![3, 2, 2, 2]);
}

#[test]
fn pyramid_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let m = rng.gen_range(16..64);
        let n_windows = rng.gen_range(1..=m - 4);
        let words: Vec<u64> = (0..n_windows).map(|_| rng.gen_range(0..4)).collect();
        let levels = rng.gen_range(1..=4);
        let numerosity = rng.gen_bool(0.5);
        let pyr = PyramidHistogram::from_words(&words, m, levels, numerosity).unwrap();
        let flat = SparseHistogram::from_words(
            tsdict::bagging::surviving_windows(&words, numerosity).map(|j| words[j]),
        );
        assert_eq!(pyr.n_sub_histograms(), (1 << levels) - 1);
        // each level stores at most the flat entries
        assert!(pyr.entries().len() <= ((1 << levels) - 1) * flat.len());
        let mut weighted_mass = 0.0;
        for l in 1..=levels {
            assert_eq!(pyr.level_histogram(l), flat);
            let segments: Vec<SparseHistogram> = (0..1 << (l - 1)).map(|s| pyr.segment(l, s)).collect();
            assert_eq!(segments.iter().map(SparseHistogram::total).sum::<u64>(), flat.total());
            for (s, seg) in segments.iter().enumerate() {
                let weight = 1.0 / f64::from(1u32 << (levels - l));
                assert_eq!(pyr.weight(l, s), weight);
                assert_eq!(seg.scale(), weight);
                weighted_mass += seg.total() as f64 * weight;
            }
        }
        assert!((pyr.mass() - weighted_mass).abs() < 1e-12);
        let hi = pyramid_distance(&pyr, &pyr, Measure::HistogramIntersection).unwrap();
        assert!((hi - weighted_mass).abs() < 1e-12);
        assert_eq!(pyramid_distance(&pyr, &pyr, Measure::BossDistance).unwrap(), 0.0);
        assert!(pyramid_distance(&pyr, &pyr, Measure::Euclidean).is_err());
        assert_eq!(PyramidHistogram::from_text(&pyr.to_text()).unwrap(), pyr);
    }
    let shallow = PyramidHistogram::from_words(&[1, 2], 8, 1, true).unwrap();
    let deep = PyramidHistogram::from_words(&[1, 2], 8, 2, true).unwrap();
    assert!(pyramid_distance(&shallow, &deep, Measure::BossDistance).is_err());
    assert!(PyramidHistogram::from_words(&[1], 8, 0, true).is_err());
}

#[test]
fn top_level_outweighs_the_coarse_level() {
    // words 7 and 9 in opposite halves: same flat bag, different halves
    let a = PyramidHistogram::from_words(&[7, 7, 7, 7, 9, 9, 9, 9], 8, 2, true).unwrap();
    let b = PyramidHistogram::from_words(&[9, 9, 9, 9, 7, 7, 7, 7], 8, 2, true).unwrap();
    // level 1 counts once at weight 1/2; level 2 differs in both halves at weight 1
    assert_eq!(pyramid_distance(&a, &b, Measure::BossDistance).unwrap(), 2.0);
    assert_eq!(histogram_intersection(&a.level_histogram(1), &b.level_histogram(1)).unwrap(), 2.0);
    assert_eq!(pyramid_distance(&a, &b, Measure::HistogramIntersection).unwrap(), 1.0);
}

#[test]
fn pyramid_retention_caps_the_ensemble() {
    let score = |w, accuracy| SpWindowScore {
        params: MemberParams { w, l: 8, alpha: 4, p: true },
        levels: 1,
        accuracy,
    };
    let flat: Vec<SpWindowScore> = (0..150).map(|w| score(10 + w, 1.0)).collect();
    let kept = retain_sp(&flat);
    assert_eq!(kept.len(), SP_CAP);
    assert_eq!(kept[0].params.w, 10);
    assert_eq!(kept[99].params.w, 109);

    let graded = vec![score(10, 0.9), score(12, 0.83), score(11, 0.828), score(13, 0.5)];
    assert_eq!(retain_sp(&graded).len(), 3);
}

#[test]
fn perfect_flat_windows_keep_one_level() {
    let train = random_dataset(11, 16, 64);
    let grid = ParameterGrid::new(vec![12, 16, 20, 24], vec![4, 6], vec![4], vec![true, false]).unwrap();
    let scores = sp_window_scores(&train, &grid, Measure::HistogramIntersection).unwrap();
    assert_eq!(scores.len(), 4);
    assert!(scores.iter().any(|s| s.accuracy == 1.0));
    for s in scores.iter().filter(|s| s.accuracy == 1.0) {
        assert_eq!(s.levels, 1, "{s:?}");
    }
}

#[test]
fn single_window_grid_gives_one_member() {
    let train = random_dataset(12, 12, 48);
    let grid = ParameterGrid::new(vec![12], vec![4, 6], vec![4], vec![true, false]).unwrap();
    let clf = SpClassifier::fit(&train, Some(&grid), Measure::BossDistance).unwrap();
    assert_eq!(clf.members.len(), 1);
    assert_eq!(clf.members[0].params.w, 12);
}
