use std::collections::BTreeSet;
use std::sync::Arc;

use nasenc_core::algorithms::{
    neighborhood, run_search, tune_hyperparameters, Acquisition, Algorithm, BananasConfig,
    BoConfig, Budget, EvolutionConfig, Mutation, SearchContext, TuningProtocol,
};
use nasenc_core::benchmark::TabularBenchmark;
use nasenc_core::encodings::{EncodingFamily, EncodingKind, Truncation};
use nasenc_core::search_space::{enumerate_space, Enumeration, SearchSpaceSpec};
use nasenc_core::subroutines::{ArchitectureSampler, EnsembleConfig};
use nasenc_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(nodes: usize, max_edges: usize, num_ops: usize) -> Arc<SearchSpaceSpec> {
    Arc::new(SearchSpaceSpec::new(nodes, max_edges, num_ops).unwrap())
}

fn adj_one_hot(spec: &Arc<SearchSpaceSpec>) -> EncodingKind {
    EncodingKind::new(
        Arc::clone(spec),
        EncodingFamily::AdjacencyOneHot,
        Truncation::Full,
    )
    .unwrap()
}

fn lean_bananas() -> Algorithm {
    Algorithm::Bananas(BananasConfig {
        initial_queries: 5,
        num_parents: 3,
        pool_size: 9,
        mutation_magnitude: 1.0,
        acquisition: Acquisition::Thompson,
        ensemble: EnsembleConfig {
            members: 3,
            hidden: vec![8],
            epochs: 5,
            batch: 16,
            learning_rate: 0.05,
        },
    })
}

fn all_algorithms() -> Vec<Algorithm> {
    vec![
        Algorithm::RandomSearch,
        Algorithm::RegularizedEvolution(EvolutionConfig {
            population: 8,
            tournament: 3,
            mutation_magnitude: 1.0,
        }),
        Algorithm::LocalSearch,
        Algorithm::BayesianOptimization(BoConfig {
            initial_queries: 5,
            pool_size: 20,
            mutation_magnitude: 1.0,
        }),
        lean_bananas(),
    ]
}

#[test]
fn one_query_budget_gives_one_event() {
    let spec = spec(4, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&spec), 3).unwrap();
    let ctx = SearchContext::homogeneous(adj_one_hot(&spec));
    let result = run_search(
        &Algorithm::RandomSearch,
        &ctx,
        &bench,
        Budget::queries(1),
        9,
    )
    .unwrap();
    assert_eq!(result.trace.len(), 1);
    assert_eq!(result.queries, 1);
    assert_eq!(result.best.as_ref().unwrap().1.val_error, result.trace[0].val_error);
}

#[test]
fn equal_seeds_replay_bit_identically() {
    let spec = spec(5, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&spec), 5).unwrap();
    let ctx = SearchContext::homogeneous(adj_one_hot(&spec));
    for algorithm in all_algorithms() {
        let a = run_search(&algorithm, &ctx, &bench, Budget::queries(25), 71).unwrap();
        let b = run_search(&algorithm, &ctx, &bench, Budget::queries(25), 71).unwrap();
        assert_eq!(a, b, "{} diverged between replays", algorithm.name());
        let c = run_search(&algorithm, &ctx, &bench, Budget::queries(25), 72).unwrap();
        assert!(
            a.trace != c.trace,
            "{} ignored its seed entirely",
            algorithm.name()
        );
    }
}

#[test]
fn traces_respect_time_and_improvement_invariants() {
    let spec = spec(5, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&spec), 5).unwrap();
    let ctx = SearchContext::homogeneous(adj_one_hot(&spec));
    for algorithm in all_algorithms() {
        let result = run_search(&algorithm, &ctx, &bench, Budget::seconds(3000.0), 13).unwrap();
        assert!(!result.trace.is_empty(), "{} queried nothing", algorithm.name());
        let mut last_time = 0.0;
        let mut last_best = f64::INFINITY;
        for (i, event) in result.trace.iter().enumerate() {
            assert!(event.time > last_time, "time not strictly increasing");
            assert!(event.best_val <= last_best, "best regressed");
            assert_eq!(event.queries, i + 1);
            last_time = event.time;
            last_best = event.best_val;
        }
        // The final query may overshoot; everything before it must not.
        if result.trace.len() > 1 {
            assert!(result.trace[result.trace.len() - 2].time < 3000.0);
        }
        assert_eq!(result.elapsed, result.trace.last().unwrap().time);
    }
}

#[test]
fn cache_stops_repeat_charges_on_a_tiny_space() {
    let spec = spec(3, 3, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&spec), 1).unwrap();
    assert_eq!(bench.len(), 5);
    let ctx = SearchContext::homogeneous(adj_one_hot(&spec));
    let result = run_search(
        &Algorithm::RandomSearch,
        &ctx,
        &bench,
        Budget::queries(50),
        2,
    )
    .unwrap();
    assert_eq!(result.queries, 5, "every class queried exactly once");
    let keys: BTreeSet<_> = result.trace.iter().map(|e| e.arch.clone()).collect();
    assert_eq!(keys.len(), 5);
    let expected_time: f64 = bench.records().map(|(_, r)| r.train_time).sum();
    assert!((result.elapsed - expected_time).abs() < 1e-9);
}

#[test]
fn local_search_finds_the_global_optimum_of_a_small_space() {
    let spec = spec(4, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&spec), 8).unwrap();
    let ctx = SearchContext::homogeneous(adj_one_hot(&spec));
    let result = run_search(
        &Algorithm::LocalSearch,
        &ctx,
        &bench,
        Budget::queries(bench.len() * 3),
        4,
    )
    .unwrap();
    let optimum = bench
        .records()
        .map(|(_, r)| r.val_error)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(result.final_best_val(), optimum);
}

#[test]
fn zero_width_mutation_degrades_to_random_draws() {
    let spec = spec(4, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&spec), 6).unwrap();
    let classes = enumerate_space(&spec, Enumeration::Classes).unwrap().len();
    let zero = EncodingKind::new(
        Arc::clone(&spec),
        EncodingFamily::AdjacencyOneHot,
        Truncation::Bits(0),
    )
    .unwrap();
    let ctx = SearchContext::new(
        ArchitectureSampler::Encoding(adj_one_hot(&spec)),
        Some(Mutation::Feature(zero)),
        None,
    );
    let algorithm = Algorithm::RegularizedEvolution(EvolutionConfig {
        population: 5,
        tournament: 2,
        mutation_magnitude: 1.0,
    });
    let budget = 30;
    let result = run_search(&algorithm, &ctx, &bench, Budget::queries(budget), 11).unwrap();
    assert_eq!(result.queries, budget.min(classes));
}

#[test]
fn missing_slots_are_rejected() {
    let spec = spec(4, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&spec), 6).unwrap();
    let ctx = SearchContext::new(
        ArchitectureSampler::Encoding(adj_one_hot(&spec)),
        None,
        None,
    );
    for algorithm in [
        Algorithm::RegularizedEvolution(EvolutionConfig::default()),
        Algorithm::LocalSearch,
        Algorithm::BayesianOptimization(BoConfig::default()),
        lean_bananas(),
    ] {
        match run_search(&algorithm, &ctx, &bench, Budget::queries(5), 0) {
            Err(Error::Config(_)) => {}
            other => panic!("{} accepted a bare context: {other:?}", algorithm.name()),
        }
    }
    // Random search needs only the sampler.
    assert!(run_search(&Algorithm::RandomSearch, &ctx, &bench, Budget::queries(5), 0).is_ok());
}

#[test]
fn bananas_acquisitions_all_run() {
    let spec = spec(5, 6, 2);
    let bench = TabularBenchmark::synthetic(Arc::clone(&spec), 5).unwrap();
    let ctx = SearchContext::homogeneous(adj_one_hot(&spec));
    for acquisition in [
        Acquisition::Thompson,
        Acquisition::GreedyMean,
        Acquisition::MeanMinusUncertainty { weight: 1.0 },
    ] {
        let algorithm = match lean_bananas() {
            Algorithm::Bananas(mut c) => {
                c.acquisition = acquisition;
                Algorithm::Bananas(c)
            }
            _ => unreachable!(),
        };
        let result = run_search(&algorithm, &ctx, &bench, Budget::queries(15), 3).unwrap();
        assert_eq!(result.queries, 15);
    }
}

#[test]
fn one_hot_neighborhood_is_contained_in_categorical() {
    let spec = spec(5, 4, 2);
    let one_hot = adj_one_hot(&spec);
    let categorical = EncodingKind::new(
        Arc::clone(&spec),
        EncodingFamily::AdjacencyCategorical,
        Truncation::Full,
    )
    .unwrap();
    let sampler = ArchitectureSampler::Encoding(one_hot.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let arch = sampler.sample(&mut rng).unwrap();
        let own = arch.canonical_key().unwrap();
        let hot: BTreeSet<_> = neighborhood(&one_hot, &arch)
            .unwrap()
            .iter()
            .map(|a| a.canonical_key().unwrap())
            .collect();
        let cat: BTreeSet<_> = neighborhood(&categorical, &arch)
            .unwrap()
            .iter()
            .map(|a| a.canonical_key().unwrap())
            .collect();
        assert!(!hot.contains(&own));
        assert!(
            hot.is_subset(&cat),
            "edge toggles must all be single categorical moves"
        );
        for neighbor in neighborhood(&one_hot, &arch).unwrap() {
            assert!(spec.contains(&neighbor));
        }
    }
}

#[test]
fn tuning_refuses_the_evaluation_benchmark_and_tunes_evolution() {
    let spec = spec(4, 6, 2);
    let tuning_bench = TabularBenchmark::synthetic(Arc::clone(&spec), 100).unwrap();
    let eval_bench = TabularBenchmark::synthetic(Arc::clone(&spec), 200).unwrap();
    let ctx = SearchContext::homogeneous(adj_one_hot(&spec));
    let base = Algorithm::RegularizedEvolution(EvolutionConfig::default());
    let protocol = TuningProtocol {
        iterations: 3,
        trial_queries: 12,
        trial_seeds: 2,
    };

    match tune_hyperparameters(&base, &ctx, &tuning_bench, &tuning_bench, &protocol, 5) {
        Err(Error::Config(msg)) => assert!(msg.contains("identical")),
        other => panic!("identity check missing: {other:?}"),
    }

    let tuned = tune_hyperparameters(&base, &ctx, &tuning_bench, &eval_bench, &protocol, 5).unwrap();
    assert_eq!(tuned.candidates_evaluated, 3);
    let score = tuned.score.unwrap();
    assert!(score.is_finite());
    assert!(matches!(tuned.algorithm, Algorithm::RegularizedEvolution(_)));

    let again =
        tune_hyperparameters(&base, &ctx, &tuning_bench, &eval_bench, &protocol, 5).unwrap();
    assert_eq!(tuned.algorithm, again.algorithm);
    assert_eq!(tuned.score, again.score);

    let rs = tune_hyperparameters(
        &Algorithm::RandomSearch,
        &ctx,
        &tuning_bench,
        &eval_bench,
        &protocol,
        5,
    )
    .unwrap();
    assert_eq!(rs.algorithm, Algorithm::RandomSearch);
    assert!(rs.score.is_none());
    assert_eq!(rs.candidates_evaluated, 0);
}
