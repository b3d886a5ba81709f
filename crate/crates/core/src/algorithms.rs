//! Five black-box search strategies over a tabular benchmark, each drawing
//! its architecture-level moves from the encoding-dependent subroutines:
//! random search, regularized evolution, local search, Bayesian optimization
//! with a Gaussian process, and an ensemble-guided search.
//!
//! A run is mediated by a [`QuerySession`]: it charges simulated time per
//! distinct architecture (repeat queries hit a cache and cost nothing),
//! records a trace event per fresh query, and cuts the run off at the
//! configured budget or after a long streak of non-fresh queries.
//!
//! Runs are deterministic: a fixed (algorithm, context, benchmark, budget,
//! seed) tuple always yields a bit-identical trace.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::benchmark::{BenchRecord, TabularBenchmark};
use crate::encodings::EncodingKind;
use crate::exec::derive_seed;
use crate::search_space::{Architecture, CanonicalKey};
use crate::subroutines::{
    perturb, ArchitectureSampler, EnsembleConfig, GaussianProcess, NeuralEnsemble,
};
use crate::{Error, Result};

/// Consecutive non-fresh query outcomes (cache hits or architectures absent
/// from the benchmark) after which a session reports itself exhausted. Keeps
/// runs finite when the reachable space is smaller than the budget.
pub const STALL_LIMIT: u64 = 10_000;

/// Stopping rule for a run; unset fields do not constrain it.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Budget {
    pub max_queries: Option<usize>,
    pub max_seconds: Option<f64>,
}

impl Budget {
    pub fn queries(n: usize) -> Self {
        Budget {
            max_queries: Some(n),
            max_seconds: None,
        }
    }

    pub fn seconds(s: f64) -> Self {
        Budget {
            max_queries: None,
            max_seconds: Some(s),
        }
    }
}

/// One fresh benchmark query and the running optimum at that moment.
/// `best_test` is the test error of the best-validation architecture, not
/// the best test error seen.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub queries: usize,
    pub arch: CanonicalKey,
    pub val_error: f64,
    pub test_error: f64,
    pub best_val: f64,
    pub best_test: f64,
}

/// What a single query attempt produced.
#[derive(Clone, Copy, Debug)]
pub enum QueryOutcome {
    /// First time this equivalence class is seen: charged and traced.
    Fresh(BenchRecord),
    /// Repeat of an earlier query: free, not traced.
    Cached(BenchRecord),
    /// Not in the benchmark: free, skippable.
    Unknown,
    /// Budget or stall limit already hit; nothing was looked up.
    Exhausted,
}

/// Budget-metered, caching access to a benchmark during one run.
pub struct QuerySession<'a> {
    bench: &'a TabularBenchmark,
    budget: Budget,
    stall_limit: u64,
    cache: BTreeMap<CanonicalKey, BenchRecord>,
    history: Vec<(Architecture, BenchRecord)>,
    trace: Vec<TraceEvent>,
    time: f64,
    stalls: u64,
    best: Option<(CanonicalKey, Architecture, BenchRecord)>,
}

impl<'a> QuerySession<'a> {
    pub fn new(bench: &'a TabularBenchmark, budget: Budget) -> Self {
        Self {
            bench,
            budget,
            stall_limit: STALL_LIMIT,
            cache: BTreeMap::new(),
            history: Vec::new(),
            trace: Vec::new(),
            time: 0.0,
            stalls: 0,
            best: None,
        }
    }

    pub fn exhausted(&self) -> bool {
        if self.stalls >= self.stall_limit {
            return true;
        }
        if let Some(q) = self.budget.max_queries {
            if self.trace.len() >= q {
                return true;
            }
        }
        if let Some(s) = self.budget.max_seconds {
            if self.time >= s {
                return true;
            }
        }
        false
    }

    /// Looks the architecture up by canonical form. Only a fresh hit charges
    /// simulated time and appends a trace event; the last fresh query may
    /// push elapsed time past the budget.
    pub fn query(&mut self, arch: &Architecture) -> Result<QueryOutcome> {
        if self.exhausted() {
            return Ok(QueryOutcome::Exhausted);
        }
        let key = arch.canonical_key()?;
        if let Some(&record) = self.cache.get(&key) {
            self.stalls += 1;
            return Ok(QueryOutcome::Cached(record));
        }
        let Some(&record) = self.bench.lookup(&key) else {
            self.stalls += 1;
            return Ok(QueryOutcome::Unknown);
        };
        self.stalls = 0;
        self.cache.insert(key.clone(), record);
        self.time += record.train_time;
        if self
            .best
            .as_ref()
            .is_none_or(|(_, _, b)| record.val_error < b.val_error)
        {
            self.best = Some((key.clone(), arch.clone(), record));
        }
        let (best_val, best_test) = self
            .best
            .as_ref()
            .map(|(_, _, b)| (b.val_error, b.test_error))
            .expect("a fresh query implies a best record");
        self.history.push((arch.clone(), record));
        self.trace.push(TraceEvent {
            time: self.time,
            queries: self.trace.len() + 1,
            arch: key,
            val_error: record.val_error,
            test_error: record.test_error,
            best_val,
            best_test,
        });
        Ok(QueryOutcome::Fresh(record))
    }

    pub fn queries(&self) -> usize {
        self.trace.len()
    }

    pub fn elapsed(&self) -> f64 {
        self.time
    }

    /// Fresh queries in order: the queried architecture and its record.
    pub fn history(&self) -> &[(Architecture, BenchRecord)] {
        &self.history
    }

    pub fn already_queried(&self, key: &CanonicalKey) -> bool {
        self.cache.contains_key(key)
    }

    pub fn best(&self) -> Option<(&CanonicalKey, &Architecture, BenchRecord)> {
        self.best.as_ref().map(|(k, a, r)| (k, a, *r))
    }

    fn into_result(self) -> SearchResult {
        SearchResult {
            queries: self.trace.len(),
            elapsed: self.time,
            best: self.best.map(|(k, _, r)| (k, r)),
            trace: self.trace,
        }
    }
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub trace: Vec<TraceEvent>,
    pub best: Option<(CanonicalKey, BenchRecord)>,
    pub queries: usize,
    pub elapsed: f64,
}

impl SearchResult {
    /// Validation error of the best architecture found, infinite when the
    /// run made no fresh query at all.
    pub fn final_best_val(&self) -> f64 {
        self.best
            .as_ref()
            .map_or(f64::INFINITY, |(_, r)| r.val_error)
    }

    pub fn final_best_test(&self) -> f64 {
        self.best
            .as_ref()
            .map_or(f64::INFINITY, |(_, r)| r.test_error)
    }
}

/// How mutation proposes a nearby architecture.
#[derive(Clone, Debug)]
pub enum Mutation {
    /// Resample features of this encoding around the parent.
    Feature(EncodingKind),
    /// Ignore the parent and draw fresh from the context's sampler.
    UniformDraw,
}

/// Encoding assignment for the three subroutine slots an algorithm may use:
/// how to draw random architectures, how to mutate one, and which feature
/// space the surrogate model sees.
#[derive(Clone, Debug)]
pub struct SearchContext {
    sampler: ArchitectureSampler,
    mutation: Option<Mutation>,
    predictor: Option<EncodingKind>,
}

impl SearchContext {
    pub fn new(
        sampler: ArchitectureSampler,
        mutation: Option<Mutation>,
        predictor: Option<EncodingKind>,
    ) -> Self {
        Self {
            sampler,
            mutation,
            predictor,
        }
    }

    /// One encoding serving every slot.
    pub fn homogeneous(kind: EncodingKind) -> Self {
        Self {
            sampler: ArchitectureSampler::Encoding(kind.clone()),
            mutation: Some(Mutation::Feature(kind.clone())),
            predictor: Some(kind),
        }
    }

    pub fn sampler(&self) -> &ArchitectureSampler {
        &self.sampler
    }

    pub fn mutation(&self) -> Option<&Mutation> {
        self.mutation.as_ref()
    }

    pub fn predictor(&self) -> Option<&EncodingKind> {
        self.predictor.as_ref()
    }

    fn require_mutation(&self) -> Result<&Mutation> {
        self.mutation
            .as_ref()
            .ok_or_else(|| Error::Config("algorithm needs the perturb slot assigned".into()))
    }

    fn require_predictor(&self) -> Result<&EncodingKind> {
        self.predictor
            .as_ref()
            .ok_or_else(|| Error::Config("algorithm needs the predictor slot assigned".into()))
    }

    /// Mutates `parent`. A perturbation that exhausts its attempt ceiling
    /// carries no information, so it degrades to a fresh sampler draw; a
    /// zero-width encoding therefore mutates by unconditioned resampling.
    fn mutate(
        &self,
        mutation: &Mutation,
        parent: &Architecture,
        magnitude: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Architecture> {
        match mutation {
            Mutation::Feature(kind) => {
                let p = perturb(kind, parent, magnitude, rng)?;
                if p.exhausted {
                    self.sampler.sample(rng)
                } else {
                    Ok(p.arch)
                }
            }
            Mutation::UniformDraw => self.sampler.sample(rng),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub population: usize,
    pub tournament: usize,
    pub mutation_magnitude: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population: 30,
            tournament: 10,
            mutation_magnitude: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoConfig {
    pub initial_queries: usize,
    pub pool_size: usize,
    pub mutation_magnitude: f64,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            initial_queries: 10,
            pool_size: 100,
            mutation_magnitude: 1.0,
        }
    }
}

/// How the ensemble-guided search scores candidates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Acquisition {
    /// Per candidate, one uniformly drawn ensemble member's prediction.
    Thompson,
    /// Ensemble mean.
    GreedyMean,
    /// Ensemble mean minus `weight` times the member spread.
    MeanMinusUncertainty { weight: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BananasConfig {
    pub initial_queries: usize,
    pub num_parents: usize,
    pub pool_size: usize,
    pub mutation_magnitude: f64,
    pub acquisition: Acquisition,
    pub ensemble: EnsembleConfig,
}

impl Default for BananasConfig {
    fn default() -> Self {
        Self {
            initial_queries: 10,
            num_parents: 10,
            pool_size: 50,
            mutation_magnitude: 1.0,
            acquisition: Acquisition::Thompson,
            ensemble: EnsembleConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm {
    RandomSearch,
    RegularizedEvolution(EvolutionConfig),
    LocalSearch,
    BayesianOptimization(BoConfig),
    Bananas(BananasConfig),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::RandomSearch => "random-search",
            Algorithm::RegularizedEvolution(_) => "regularized-evolution",
            Algorithm::LocalSearch => "local-search",
            Algorithm::BayesianOptimization(_) => "bayesian-optimization",
            Algorithm::Bananas(_) => "bananas",
        }
    }

    /// Rejects unusable settings; returns human-readable warnings for legal
    /// but degenerate ones.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        match self {
            Algorithm::RandomSearch | Algorithm::LocalSearch => {}
            Algorithm::RegularizedEvolution(c) => {
                if c.population == 0 || c.tournament == 0 {
                    return Err(Error::Config(
                        "evolution needs a nonempty population and tournament".into(),
                    ));
                }
                if c.tournament > c.population {
                    return Err(Error::Config(format!(
                        "tournament {} exceeds population {}",
                        c.tournament, c.population
                    )));
                }
                if c.mutation_magnitude == 0.0 {
                    warnings.push(
                        "mutation magnitude 0 freezes the population after initialization"
                            .into(),
                    );
                }
            }
            Algorithm::BayesianOptimization(c) => {
                if c.pool_size == 0 {
                    return Err(Error::Config("candidate pool must be nonempty".into()));
                }
            }
            Algorithm::Bananas(c) => {
                if c.pool_size == 0 || c.num_parents == 0 {
                    return Err(Error::Config(
                        "parent count and candidate pool must be nonempty".into(),
                    ));
                }
                if c.ensemble.members == 0 {
                    return Err(Error::Config("ensemble needs at least one member".into()));
                }
            }
        }
        Ok(warnings)
    }
}

/// Runs one seeded trial of `algorithm` against `bench` and returns its
/// trace. Identical inputs give identical results.
pub fn run_search(
    algorithm: &Algorithm,
    ctx: &SearchContext,
    bench: &TabularBenchmark,
    budget: Budget,
    seed: u64,
) -> Result<SearchResult> {
    algorithm.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut session = QuerySession::new(bench, budget);
    match algorithm {
        Algorithm::RandomSearch => random_search(ctx, &mut session, &mut rng)?,
        Algorithm::RegularizedEvolution(c) => evolution(c, ctx, &mut session, &mut rng)?,
        Algorithm::LocalSearch => local_search(ctx, &mut session, &mut rng)?,
        Algorithm::BayesianOptimization(c) => {
            bayesian_optimization(c, ctx, &mut session, &mut rng)?
        }
        Algorithm::Bananas(c) => bananas(c, ctx, &mut session, &mut rng)?,
    }
    Ok(session.into_result())
}

fn random_search(
    ctx: &SearchContext,
    session: &mut QuerySession,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    while !session.exhausted() {
        let arch = ctx.sampler.sample(rng)?;
        if matches!(session.query(&arch)?, QueryOutcome::Exhausted) {
            break;
        }
    }
    Ok(())
}

fn evolution(
    cfg: &EvolutionConfig,
    ctx: &SearchContext,
    session: &mut QuerySession,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mutation = ctx.require_mutation()?.clone();
    // (insertion id, architecture, validation error); ids grow forever so
    // ties resolve to the longest-standing member.
    let mut population: Vec<(u64, Architecture, f64)> = Vec::new();
    let mut next_id = 0u64;

    while population.len() < cfg.population && !session.exhausted() {
        let arch = ctx.sampler.sample(rng)?;
        match session.query(&arch)? {
            QueryOutcome::Fresh(r) | QueryOutcome::Cached(r) => {
                population.push((next_id, arch, r.val_error));
                next_id += 1;
            }
            QueryOutcome::Unknown => {}
            QueryOutcome::Exhausted => return Ok(()),
        }
    }

    while !session.exhausted() {
        if population.is_empty() {
            let arch = ctx.sampler.sample(rng)?;
            match session.query(&arch)? {
                QueryOutcome::Fresh(r) | QueryOutcome::Cached(r) => {
                    population.push((next_id, arch, r.val_error));
                    next_id += 1;
                }
                QueryOutcome::Unknown => {}
                QueryOutcome::Exhausted => break,
            }
            continue;
        }
        let draw = index::sample(rng, population.len(), cfg.tournament.min(population.len()));
        let parent_idx = draw
            .iter()
            .min_by(|&a, &b| {
                population[a]
                    .2
                    .total_cmp(&population[b].2)
                    .then(population[a].0.cmp(&population[b].0))
            })
            .expect("tournament is nonempty");
        let parent = population[parent_idx].1.clone();
        let child = ctx.mutate(&mutation, &parent, cfg.mutation_magnitude, rng)?;
        match session.query(&child)? {
            QueryOutcome::Fresh(r) | QueryOutcome::Cached(r) => {
                population.push((next_id, child, r.val_error));
                next_id += 1;
                if population.len() > cfg.population {
                    let worst = population
                        .iter()
                        .enumerate()
                        .max_by(|(_, a), (_, b)| a.2.total_cmp(&b.2).then(b.0.cmp(&a.0)))
                        .map(|(i, _)| i)
                        .expect("population is nonempty");
                    population.remove(worst);
                }
            }
            QueryOutcome::Unknown => {}
            QueryOutcome::Exhausted => break,
        }
    }
    Ok(())
}

/// All distinct member architectures one feature change away under `kind`,
/// deduplicated by canonical form and excluding `arch`'s own class.
pub fn neighborhood(kind: &EncodingKind, arch: &Architecture) -> Result<Vec<Architecture>> {
    let base = kind.encode(arch)?;
    let mut seen = BTreeSet::new();
    seen.insert(arch.canonical_key()?);
    let mut out = Vec::new();
    for (i, class) in kind.feature_classes().iter().enumerate() {
        for alternate in class.alternates(base[i]) {
            let mut candidate = base.clone();
            candidate[i] = alternate;
            match kind.decode(&candidate) {
                Ok(a) if kind.spec().contains(&a) => {
                    if seen.insert(a.canonical_key()?) {
                        out.push(a);
                    }
                }
                Ok(_) | Err(Error::NotRealizable(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

fn local_search(
    ctx: &SearchContext,
    session: &mut QuerySession,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mutation = ctx.require_mutation()?.clone();
    'outer: while !session.exhausted() {
        let start = ctx.sampler.sample(rng)?;
        let (mut current, mut current_val) = match session.query(&start)? {
            QueryOutcome::Fresh(r) | QueryOutcome::Cached(r) => (start, r.val_error),
            QueryOutcome::Unknown => continue,
            QueryOutcome::Exhausted => break,
        };
        loop {
            // A uniform-draw mutation slot has no feature space, so the
            // neighborhood is empty and every start is a local optimum.
            let neighbors = match &mutation {
                Mutation::Feature(kind) => neighborhood(kind, &current)?,
                Mutation::UniformDraw => Vec::new(),
            };
            let mut best: Option<(f64, Architecture)> = None;
            for neighbor in neighbors {
                match session.query(&neighbor)? {
                    QueryOutcome::Fresh(r) | QueryOutcome::Cached(r) => {
                        if r.val_error < current_val
                            && best.as_ref().is_none_or(|(v, _)| r.val_error < *v)
                        {
                            best = Some((r.val_error, neighbor));
                        }
                    }
                    QueryOutcome::Unknown => {}
                    QueryOutcome::Exhausted => break 'outer,
                }
            }
            match best {
                Some((val, arch)) => {
                    current = arch;
                    current_val = val;
                }
                None => continue 'outer,
            }
        }
    }
    Ok(())
}

/// Draws `count` fresh queries from the sampler (or gives up at budget or
/// stall exhaustion).
fn seed_queries(
    count: usize,
    ctx: &SearchContext,
    session: &mut QuerySession,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    while session.queries() < count && !session.exhausted() {
        let arch = ctx.sampler.sample(rng)?;
        if matches!(session.query(&arch)?, QueryOutcome::Exhausted) {
            break;
        }
    }
    Ok(())
}

/// Candidates not yet queried and present in the benchmark, deduplicated by
/// canonical form, pool order preserved.
fn filter_pool(
    pool: Vec<Architecture>,
    session: &QuerySession,
) -> Result<Vec<(CanonicalKey, Architecture)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for arch in pool {
        let key = arch.canonical_key()?;
        if session.already_queried(&key) || session.bench.lookup(&key).is_none() {
            continue;
        }
        if seen.insert(key.clone()) {
            out.push((key, arch));
        }
    }
    Ok(out)
}

/// Expected amount by which a Gaussian with the given mean and deviation
/// undershoots the incumbent.
fn expected_improvement(incumbent: f64, mean: f64, std: f64) -> f64 {
    if std <= 0.0 {
        return (incumbent - mean).max(0.0);
    }
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let z = (incumbent - mean) / std;
    (incumbent - mean) * unit.cdf(z) + std * unit.pdf(z)
}

/// Picks the candidate maximizing `score`, ties to the lowest canonical key.
fn argmax_candidate(
    scored: Vec<(CanonicalKey, Architecture, f64)>,
) -> Option<Architecture> {
    scored
        .into_iter()
        .max_by(|(ka, _, sa), (kb, _, sb)| sa.total_cmp(sb).then_with(|| kb.cmp(ka)))
        .map(|(_, arch, _)| arch)
}

fn bayesian_optimization(
    cfg: &BoConfig,
    ctx: &SearchContext,
    session: &mut QuerySession,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mutation = ctx.require_mutation()?.clone();
    let kind = ctx.require_predictor()?.clone();
    seed_queries(cfg.initial_queries, ctx, session, rng)?;

    while !session.exhausted() {
        let Some((_, incumbent_arch, incumbent)) = session.best() else {
            seed_queries(session.queries() + 1, ctx, session, rng)?;
            continue;
        };
        let incumbent_arch = incumbent_arch.clone();

        let mut rows = Vec::with_capacity(session.history().len());
        let mut targets = Vec::with_capacity(session.history().len());
        for (arch, record) in session.history() {
            rows.push(kind.encode(arch)?);
            targets.push(record.val_error);
        }
        let gp = GaussianProcess::fit(kind.clone(), rows, targets)?;

        let mut pool = Vec::with_capacity(cfg.pool_size);
        for i in 0..cfg.pool_size {
            let candidate = if i % 2 == 0 {
                ctx.sampler.sample(rng)?
            } else {
                ctx.mutate(&mutation, &incumbent_arch, cfg.mutation_magnitude, rng)?
            };
            pool.push(candidate);
        }
        let pool = filter_pool(pool, session)?;
        if pool.is_empty() {
            let arch = ctx.sampler.sample(rng)?;
            if matches!(session.query(&arch)?, QueryOutcome::Exhausted) {
                break;
            }
            continue;
        }

        let mut scored = Vec::with_capacity(pool.len());
        for (key, arch) in pool {
            let (mean, std) = gp.predict(&kind.encode(&arch)?)?;
            scored.push((key, arch, expected_improvement(incumbent.val_error, mean, std)));
        }
        let choice = argmax_candidate(scored).expect("pool is nonempty");
        if matches!(session.query(&choice)?, QueryOutcome::Exhausted) {
            break;
        }
    }
    Ok(())
}

fn bananas(
    cfg: &BananasConfig,
    ctx: &SearchContext,
    session: &mut QuerySession,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mutation = ctx.require_mutation()?.clone();
    let kind = ctx.require_predictor()?.clone();
    seed_queries(cfg.initial_queries, ctx, session, rng)?;

    while !session.exhausted() {
        if session.history().is_empty() {
            seed_queries(1, ctx, session, rng)?;
            if session.history().is_empty() {
                break;
            }
            continue;
        }

        let mut rows = Vec::with_capacity(session.history().len());
        let mut targets = Vec::with_capacity(session.history().len());
        for (arch, record) in session.history() {
            rows.push(kind.encode(arch)?);
            targets.push(record.val_error);
        }
        let fit_seed = rng.random::<u64>();
        let ensemble =
            NeuralEnsemble::fit(kind.clone(), rows, targets, &cfg.ensemble, fit_seed)?;

        // Parents: the best observed architectures by validation error.
        let mut ranked: Vec<(f64, &CanonicalKey, &Architecture)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, (arch, record)) in session.history().iter().enumerate() {
            let key = &session.trace[i].arch;
            if seen.insert(key.clone()) {
                ranked.push((record.val_error, key, arch));
            }
        }
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        let parents: Vec<Architecture> = ranked
            .iter()
            .take(cfg.num_parents)
            .map(|(_, _, a)| (*a).clone())
            .collect();

        let per_parent = (cfg.pool_size / parents.len().max(1)).max(1);
        let mut pool = Vec::with_capacity(parents.len() * per_parent);
        for parent in &parents {
            for _ in 0..per_parent {
                pool.push(ctx.mutate(&mutation, parent, cfg.mutation_magnitude, rng)?);
            }
        }
        let pool = filter_pool(pool, session)?;
        if pool.is_empty() {
            let arch = ctx.sampler.sample(rng)?;
            if matches!(session.query(&arch)?, QueryOutcome::Exhausted) {
                break;
            }
            continue;
        }

        let mut scored = Vec::with_capacity(pool.len());
        for (key, arch) in pool {
            let features = kind.encode(&arch)?;
            let score = match cfg.acquisition {
                Acquisition::Thompson => {
                    let members = ensemble.member_predictions(&features)?;
                    members[rng.random_range(0..members.len())]
                }
                Acquisition::GreedyMean => ensemble.predict(&features)?.0,
                Acquisition::MeanMinusUncertainty { weight } => {
                    let (mean, std) = ensemble.predict(&features)?;
                    mean - weight * std
                }
            };
            // Acquisition scores are minimized; negate for the shared argmax.
            scored.push((key, arch, -score));
        }
        let choice = argmax_candidate(scored).expect("pool is nonempty");
        if matches!(session.query(&choice)?, QueryOutcome::Exhausted) {
            break;
        }
    }
    Ok(())
}

/// Shape of a tuning run: how many random configurations to try and how
/// each is judged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TuningProtocol {
    pub iterations: usize,
    pub trial_queries: usize,
    pub trial_seeds: usize,
}

impl Default for TuningProtocol {
    fn default() -> Self {
        Self {
            iterations: 50,
            trial_queries: 200,
            trial_seeds: 10,
        }
    }
}

/// Winning configuration of a tuning run. `score` is the mean final
/// best-validation error over the trial seeds; absent when the algorithm
/// has nothing to tune.
#[derive(Clone, Debug)]
pub struct TunedAlgorithm {
    pub algorithm: Algorithm,
    pub score: Option<f64>,
    pub candidates_evaluated: usize,
}

/// Random search over the algorithm's hyperparameter region, judged on the
/// tuning benchmark. The evaluation benchmark is taken only to assert the
/// two differ; tuning on the table to be evaluated is refused.
pub fn tune_hyperparameters(
    base: &Algorithm,
    ctx: &SearchContext,
    tuning: &TabularBenchmark,
    evaluation: &TabularBenchmark,
    protocol: &TuningProtocol,
    seed: u64,
) -> Result<TunedAlgorithm> {
    if tuning.digest() == evaluation.digest() {
        return Err(Error::Config(
            "tuning benchmark is identical to the evaluation benchmark".into(),
        ));
    }
    if protocol.iterations == 0 || protocol.trial_seeds == 0 {
        return Err(Error::Config(
            "tuning needs at least one iteration and one trial seed".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Algorithm)> = None;
    let mut evaluated = 0;
    for i in 0..protocol.iterations {
        let Some(candidate) = sample_region(base, &mut rng) else {
            return Ok(TunedAlgorithm {
                algorithm: base.clone(),
                score: None,
                candidates_evaluated: 0,
            });
        };
        let mut total = 0.0;
        for s in 0..protocol.trial_seeds {
            let trial_seed = derive_seed(seed, (i * protocol.trial_seeds + s) as u64 + 1);
            let result = run_search(
                &candidate,
                ctx,
                tuning,
                Budget::queries(protocol.trial_queries),
                trial_seed,
            )?;
            total += result.final_best_val();
        }
        let score = total / protocol.trial_seeds as f64;
        evaluated += 1;
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, candidate));
        }
    }
    let (score, algorithm) = best.expect("at least one iteration ran");
    Ok(TunedAlgorithm {
        algorithm,
        score: Some(score),
        candidates_evaluated: evaluated,
    })
}

/// One uniform draw from the algorithm's declared hyperparameter region;
/// `None` when the algorithm has no tunables.
fn sample_region(base: &Algorithm, rng: &mut ChaCha8Rng) -> Option<Algorithm> {
    match base {
        Algorithm::RandomSearch | Algorithm::LocalSearch => None,
        Algorithm::RegularizedEvolution(_) => {
            let population = rng.random_range(5..=60);
            Some(Algorithm::RegularizedEvolution(EvolutionConfig {
                population,
                tournament: rng.random_range(2..=25usize.min(population)),
                mutation_magnitude: rng.random_range(0.25..=4.0),
            }))
        }
        Algorithm::BayesianOptimization(_) => Some(Algorithm::BayesianOptimization(BoConfig {
            initial_queries: rng.random_range(5..=25),
            pool_size: rng.random_range(20..=200),
            mutation_magnitude: rng.random_range(0.25..=4.0),
        })),
        Algorithm::Bananas(b) => {
            let num_parents = rng.random_range(2..=20);
            Some(Algorithm::Bananas(BananasConfig {
                initial_queries: rng.random_range(5..=25),
                num_parents,
                pool_size: rng.random_range(num_parents.max(10)..=100),
                mutation_magnitude: rng.random_range(0.25..=4.0),
                acquisition: match rng.random_range(0..3) {
                    0 => Acquisition::Thompson,
                    1 => Acquisition::GreedyMean,
                    _ => Acquisition::MeanMinusUncertainty {
                        weight: rng.random_range(0.25..=2.0),
                    },
                },
                ensemble: b.ensemble.clone(),
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_improvement_by_hand() {
        // Zero spread: improvement is the plain gap, floored at zero.
        assert_eq!(expected_improvement(10.0, 8.0, 0.0), 2.0);
        assert_eq!(expected_improvement(10.0, 12.0, 0.0), 0.0);
        // At mean == incumbent, EI = std / sqrt(2 pi).
        let ei = expected_improvement(10.0, 10.0, 2.0);
        assert!((ei - 2.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        // More uncertainty never hurts an equal mean.
        assert!(expected_improvement(10.0, 11.0, 3.0) > expected_improvement(10.0, 11.0, 1.0));
    }

    #[test]
    fn budget_constructors() {
        assert_eq!(Budget::queries(5).max_queries, Some(5));
        assert_eq!(Budget::seconds(2.5).max_seconds, Some(2.5));
        assert_eq!(Budget::default(), Budget { max_queries: None, max_seconds: None });
    }

    #[test]
    fn validation_catches_degenerate_configs() {
        let frozen = Algorithm::RegularizedEvolution(EvolutionConfig {
            mutation_magnitude: 0.0,
            ..EvolutionConfig::default()
        });
        assert_eq!(frozen.validate().unwrap().len(), 1);

        let bad = Algorithm::RegularizedEvolution(EvolutionConfig {
            population: 4,
            tournament: 9,
            mutation_magnitude: 1.0,
        });
        assert!(bad.validate().is_err());

        assert!(Algorithm::RandomSearch.validate().unwrap().is_empty());
    }
}
