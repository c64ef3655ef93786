use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tsdict::botsw::{
    botsw_bag, describe_filtered, filter_scales, gaussian_filter, gaussian_kernel, kmeans_fit, kmeans_plus_plus, lloyd,
    sample_keypoints, BotswConfig, BotswGrid, Sampling,
};
use tsdict::distances::SparseVector;
use tsdict::{BotswClassifier, Dataset, Measure};

fn random_series(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let mut level = 0.0;
    (0..m)
        .map(|_| {
            level += rng.gen_range(-1.0..1.0);
            level
        })
        .collect()
}

#[test]
fn keypoints_and_kernel() {
    assert_eq!(sample_keypoints(10, 4).unwrap(), vec![0, 4, 8]);
    assert_eq!(sample_keypoints(8, 4).unwrap(), vec![0, 4]);
    assert!(sample_keypoints(8, 0).is_err());
    for s in [0.5, 1.6, 3.2] {
        let k = gaussian_kernel(s).unwrap();
        assert_eq!(k.len() % 2, 1);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mid = k.len() / 2;
        assert!(k.iter().all(|&v| v <= k[mid]));
    }
    let flat = gaussian_filter(&[3.0f64; 9], 2.0).unwrap();
    assert!(flat.iter().all(|v| (v - 3.0).abs() < 1e-12));
}

#[test]
fn descriptors_ignore_offsets_and_scale_with_amplitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sampling = Sampling::default();
    for _ in 0..20 {
        let m = rng.gen_range(30..90);
        let x = random_series(&mut rng, m);
        let (c, a) = (rng.gen_range(-50.0..50.0), rng.gen_range(0.1..5.0));
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v * a).collect();
        let base = describe_filtered(&filter_scales(&x, &sampling).unwrap(), 4, 4, 4).unwrap();
        let off = describe_filtered(&filter_scales(&shifted, &sampling).unwrap(), 4, 4, 4).unwrap();
        let amp = describe_filtered(&filter_scales(&scaled, &sampling).unwrap(), 4, 4, 4).unwrap();
        assert_eq!(base.len(), sampling.scales.len() * m.div_ceil(4));
        for ((d, o), s) in base.iter().zip(&off).zip(&amp) {
            for i in 0..d.len() {
                assert!((d[i] - o[i]).abs() < 1e-9);
                assert!((a * d[i] - s[i]).abs() < 1e-9 * (1.0 + s[i].abs()));
            }
        }
    }
}

#[test]
fn bags_have_unit_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sampling = Sampling::default();
    let series: Vec<Vec<f64>> = (0..6).map(|_| random_series(&mut rng, 64)).collect();
    let descriptors: Vec<Vec<f64>> = series
        .iter()
        .flat_map(|s| describe_filtered(&filter_scales(s, &sampling).unwrap(), 4, 4, 4).unwrap())
        .collect();
    let codebook = kmeans_fit(&descriptors, 8, 0).unwrap().codebook;
    for s in &series {
        let bag = botsw_bag(s, &codebook, &sampling, 4, 4).unwrap();
        assert!((bag.norm() - 1.0).abs() < 1e-12);
        assert!(bag.entries().iter().all(|&(k, v)| k < 8 && v > 0.0));
        assert!((0..bag.n_entries()).all(|i| bag.entry(i).1 <= 1.0));
    }
    assert!(botsw_bag(&series[0], &codebook, &sampling, 3, 4).is_err());
}

#[test]
fn lloyd_never_increases_inertia() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let vectors: Vec<Vec<f64>> = (0..120)
        .map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .collect();
    for init_seed in 0..50 {
        let k = 2 + init_seed as usize % 6;
        let init = kmeans_plus_plus(&vectors, k, init_seed).unwrap();
        let fit = lloyd(&vectors, init).unwrap();
        assert!(!fit.inertia.is_empty());
        for pair in fit.inertia.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "{:?}", fit.inertia);
        }
        assert!(fit.inertia.len() <= tsdict::botsw::MAX_ITERATIONS);
        assert_eq!(fit.assignments.len(), vectors.len());
    }
}

#[test]
fn recovers_separated_clusters() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let centres = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
    let mut vectors = Vec::new();
    let mut truth = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..30 {
            vectors.push(centre.iter().map(|&x| x + noise.sample(&mut rng)).collect::<Vec<f64>>());
            truth.push(c);
        }
    }
    for seed in 0..5 {
        let fit = kmeans_fit(&vectors, 3, seed).unwrap();
        // the same partition up to relabelling
        for i in 0..vectors.len() {
            for j in 0..vectors.len() {
                assert_eq!(truth[i] == truth[j], fit.assignments[i] == fit.assignments[j]);
            }
        }
        for centre in &centres {
            let (_, d) = fit.codebook.nearest(centre);
            assert!(d < 0.1, "centroid off by {d}");
        }
    }
}

#[test]
fn kmeans_is_seeded() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vectors: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
    let a = kmeans_fit(&vectors, 4, 11).unwrap();
    let b = kmeans_fit(&vectors, 4, 11).unwrap();
    assert_eq!(a.codebook.centroids(), b.codebook.centroids());
    assert!(kmeans_fit::<f64>(&[], 2, 0).is_err());
    assert!(kmeans_fit(&vectors, 0, 0).is_err());
}

#[test]
fn classifier_separates_bumps_from_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let make = |rng: &mut ChaCha8Rng, n: usize| {
        let mut series = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let at = rng.gen_range(10..50);
            let s: Vec<f64> = (0..64)
                .map(|t| {
                    let d = t as f64 - at as f64;
                    let shape = if c == 0 { (-d * d / 8.0).exp() * 4.0 } else if t >= at { 4.0 } else { 0.0 };
                    shape + rng.gen_range(-0.2..0.2)
                })
                .collect();
            series.push(s);
            labels.push(c);
        }
        Dataset::from_labels("bumps", series, labels).unwrap()
    };
    let train = make(&mut rng, 16);
    let test = make(&mut rng, 20);
    let config = BotswConfig {
        grid: BotswGrid {
            n_b: vec![4],
            a: vec![4],
            k: vec![4, 8],
        },
        ..BotswConfig::new(Measure::HistogramIntersection)
    };
    let clf = BotswClassifier::fit(&train, &config).unwrap();
    assert!(clf.accuracy(&test).unwrap() >= 0.8);
}
