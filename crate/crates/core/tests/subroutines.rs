use std::collections::BTreeSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nasenc_core::benchmark::TabularBenchmark;
use nasenc_core::encodings::{EncodingFamily, EncodingKind, Truncation};
use nasenc_core::search_space::{
    canonical_representative, enumerate_space, Architecture, Enumeration, SearchSpaceSpec,
};
use nasenc_core::subroutines::{
    perturb, sample_random, EnsembleConfig, EnsemblePredictor, GaussianProcess, GpPredictor,
    NeuralEnsemble, Predictor, UniformSpaceSampler,
};
use nasenc_core::Error;

fn spec(nodes: usize, max_edges: usize, num_ops: usize) -> Arc<SearchSpaceSpec> {
    Arc::new(SearchSpaceSpec::new(nodes, max_edges, num_ops).unwrap())
}

fn kind(spec: &Arc<SearchSpaceSpec>, family: EncodingFamily, trunc: Truncation) -> EncodingKind {
    EncodingKind::new(Arc::clone(spec), family, trunc).unwrap()
}

#[test]
fn every_encoding_samples_members_deterministically() {
    let five = spec(5, 6, 2);
    let four = spec(4, 5, 2);
    let kinds = vec![
        kind(&five, EncodingFamily::AdjacencyOneHot, Truncation::Full),
        kind(&five, EncodingFamily::AdjacencyCategorical, Truncation::Full),
        kind(&five, EncodingFamily::AdjacencyContinuous, Truncation::Full),
        kind(&five, EncodingFamily::AdjacencyOneHot, Truncation::Bits(5)),
        kind(&five, EncodingFamily::PathOneHot, Truncation::PathLength(2)),
        kind(&five, EncodingFamily::PathCategorical, Truncation::PathLength(2)),
        kind(&five, EncodingFamily::PathContinuous, Truncation::PathLength(2)),
        kind(&four, EncodingFamily::PathOneHot, Truncation::Full),
    ];
    for k in kinds {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let first: Vec<Architecture> = (0..30).map(|_| sample_random(&k, &mut rng).unwrap()).collect();
        for arch in &first {
            assert!(
                k.spec().contains(arch),
                "{} produced a non-member",
                k.family().name()
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let second: Vec<Architecture> =
            (0..30).map(|_| sample_random(&k, &mut rng).unwrap()).collect();
        assert_eq!(first, second, "{} resample differs", k.family().name());
    }
}

#[test]
fn uniform_sampler_covers_every_class() {
    let spec = spec(4, 6, 2);
    let all: BTreeSet<String> = enumerate_space(&spec, Enumeration::Classes)
        .unwrap()
        .iter()
        .map(|a| a.canonical_key().unwrap().into_string())
        .collect();

    let sampler = UniformSpaceSampler::enumerate(&spec).unwrap();
    assert_eq!(sampler.len(), all.len());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let seen: BTreeSet<String> = (0..2000)
        .map(|_| sampler.sample(&mut rng).canonical_key().unwrap().into_string())
        .collect();
    assert_eq!(seen, all);

    let bench = TabularBenchmark::synthetic(Arc::clone(&spec), 11).unwrap();
    let from_bench = UniformSpaceSampler::from_benchmark(&bench).unwrap();
    assert_eq!(from_bench.len(), bench.len());
}

#[test]
fn perturbation_stays_in_the_space() {
    let five = spec(5, 6, 2);
    let k = kind(&five, EncodingFamily::AdjacencyOneHot, Truncation::Full);
    let arch = {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        sample_random(&k, &mut rng).unwrap()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let unchanged = perturb(&k, &arch, 0.0, &mut rng).unwrap();
    assert!(!unchanged.exhausted);
    assert_eq!(unchanged.arch, arch);

    let mut changed_any = false;
    for trial in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + trial);
        let p = perturb(&k, &arch, 2.0, &mut rng).unwrap();
        assert!(!p.exhausted);
        assert!(five.contains(&p.arch));
        if p.arch != arch {
            changed_any = true;
        }
    }
    assert!(changed_any, "twenty perturbations never moved the point");

    let mut a = ChaCha8Rng::seed_from_u64(42);
    let mut b = ChaCha8Rng::seed_from_u64(42);
    assert_eq!(
        perturb(&k, &arch, 3.0, &mut a).unwrap().arch,
        perturb(&k, &arch, 3.0, &mut b).unwrap().arch
    );
}

#[test]
fn zero_width_encoding_degenerates_gracefully() {
    let five = spec(5, 6, 2);
    let k = kind(&five, EncodingFamily::AdjacencyOneHot, Truncation::Bits(0));
    assert_eq!(k.dim(), 0);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    match sample_random(&k, &mut rng) {
        Err(Error::AcceptanceTooLow(_)) => {}
        other => panic!("expected sampling to give up, got {other:?}"),
    }

    let member = {
        let full = kind(&five, EncodingFamily::AdjacencyOneHot, Truncation::Full);
        sample_random(&full, &mut rng).unwrap()
    };
    let p = perturb(&k, &member, 1.0, &mut rng).unwrap();
    assert!(p.exhausted);
    assert_eq!(p.arch, member);
}

/// Training rows: every class of a small space, encoded; targets from the
/// synthetic table.
fn regression_data(
    spec: &Arc<SearchSpaceSpec>,
    k: &EncodingKind,
) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Architecture>) {
    let bench = TabularBenchmark::synthetic(Arc::clone(spec), 9).unwrap();
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut archs = Vec::new();
    for (key, record) in bench.records() {
        let rep = canonical_representative(spec, key).unwrap();
        rows.push(k.encode(&rep).unwrap());
        targets.push(record.val_error);
        archs.push(rep);
    }
    (rows, targets, archs)
}

#[test]
fn gaussian_process_fits_training_data() {
    let five = spec(5, 6, 2);
    let k = kind(&five, EncodingFamily::AdjacencyOneHot, Truncation::Full);
    let (rows, targets, _) = regression_data(&five, &k);
    let (train_rows, train_targets) = (rows[..rows.len() - 5].to_vec(), targets[..rows.len() - 5].to_vec());
    let held_out = &rows[rows.len() - 5..];

    let gp = GaussianProcess::fit(k.clone(), train_rows.clone(), train_targets.clone()).unwrap();

    let n = train_targets.len() as f64;
    let mean = train_targets.iter().sum::<f64>() / n;
    let std = (train_targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mae: f64 = train_rows
        .iter()
        .zip(&train_targets)
        .map(|(row, &y)| (gp.predict(row).unwrap().0 - y).abs())
        .sum::<f64>()
        / n;
    assert!(
        mae < 0.25 * std,
        "train MAE {mae} not well below target spread {std}"
    );

    let train_unc: f64 = train_rows
        .iter()
        .map(|row| gp.predict(row).unwrap().1)
        .sum::<f64>()
        / n;
    let far_unc: f64 = held_out
        .iter()
        .map(|row| gp.predict(row).unwrap().1)
        .sum::<f64>()
        / held_out.len() as f64;
    assert!(train_unc >= 0.0 && far_unc >= 0.0);
    assert!(
        train_unc < far_unc,
        "uncertainty at training points ({train_unc}) should undercut held-out ({far_unc})"
    );
}

#[test]
fn predictor_wrappers_match_their_models() {
    let five = spec(5, 6, 2);
    let k = kind(&five, EncodingFamily::AdjacencyOneHot, Truncation::Full);
    let (rows, targets, _) = regression_data(&five, &k);
    let probe = rows[0].clone();

    let mut gp_wrapper = GpPredictor::new(k.clone());
    assert!(gp_wrapper.predict(&probe).is_err());
    gp_wrapper.refit(rows.clone(), targets.clone(), 0).unwrap();
    let direct = GaussianProcess::fit(k.clone(), rows.clone(), targets.clone()).unwrap();
    let wrapped = gp_wrapper.predict(&probe).unwrap();
    let (mean, std) = direct.predict(&probe).unwrap();
    assert_eq!(wrapped.mean, mean);
    assert_eq!(wrapped.uncertainty, std);

    let config = EnsembleConfig {
        members: 3,
        hidden: vec![8],
        epochs: 10,
        batch: 8,
        learning_rate: 0.05,
    };
    let mut nn_wrapper = EnsemblePredictor::new(k.clone(), config.clone());
    assert!(nn_wrapper.predict(&probe).is_err());
    nn_wrapper.refit(rows.clone(), targets.clone(), 17).unwrap();
    let direct = NeuralEnsemble::fit(k.clone(), rows, targets, &config, 17).unwrap();
    let wrapped = nn_wrapper.predict(&probe).unwrap();
    let (mean, std) = direct.predict(&probe).unwrap();
    assert_eq!(wrapped.mean, mean);
    assert_eq!(wrapped.uncertainty, std);
    assert!(wrapped.uncertainty >= 0.0);
}

#[test]
fn neural_ensemble_learns_and_tracks_its_seed() {
    let five = spec(5, 6, 2);
    let k = kind(&five, EncodingFamily::AdjacencyOneHot, Truncation::Full);
    let (rows, targets, _) = regression_data(&five, &k);
    let config = EnsembleConfig {
        members: 3,
        hidden: vec![16],
        epochs: 60,
        batch: 8,
        learning_rate: 0.05,
    };

    let ensemble = NeuralEnsemble::fit(k.clone(), rows.clone(), targets.clone(), &config, 4).unwrap();

    let n = targets.len() as f64;
    let y_mean = targets.iter().sum::<f64>() / n;
    let baseline: f64 = targets.iter().map(|y| (y - y_mean).abs()).sum::<f64>() / n;
    let mae: f64 = rows
        .iter()
        .zip(&targets)
        .map(|(row, &y)| (ensemble.predict(row).unwrap().0 - y).abs())
        .sum::<f64>()
        / n;
    assert!(
        mae < baseline,
        "training MAE {mae} no better than constant-mean baseline {baseline}"
    );

    let again = NeuralEnsemble::fit(k.clone(), rows.clone(), targets.clone(), &config, 4).unwrap();
    let other = NeuralEnsemble::fit(k.clone(), rows.clone(), targets.clone(), &config, 5).unwrap();
    let mut any_seed_difference = false;
    for row in rows.iter().take(10) {
        let (m1, s1) = ensemble.predict(row).unwrap();
        let (m2, s2) = again.predict(row).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(s1, s2);
        assert!(s1 >= 0.0);
        if (ensemble.predict(row).unwrap().0 - other.predict(row).unwrap().0).abs() > 1e-12 {
            any_seed_difference = true;
        }
    }
    assert!(any_seed_difference, "two seeds trained identical ensembles");
}
