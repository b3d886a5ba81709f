//! Batch experiment runners behind the CLI: JSON-configured studies that
//! fan seeded search trials out over benchmarks and write their traces and
//! summaries to an output directory.
//!
//! Every runner writes the same skeleton: `config.json` echoes the resolved
//! configuration (overrides applied) next to the master seed, `traces/`
//! holds one JSONL file per searched trial, and `summary.csv` holds the
//! aggregated table. All files are replaced atomically and every byte is a
//! pure function of (configuration, seed), so reruns reproduce outputs
//! exactly regardless of worker count.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    run_search, tune_hyperparameters, Acquisition, Algorithm, BananasConfig, BoConfig, Budget,
    EvolutionConfig, Mutation, SearchContext, SearchResult, TraceEvent, TuningProtocol,
};
use crate::benchmark::TabularBenchmark;
use crate::encodings::{EncodingFamily, EncodingKind, Truncation};
use crate::error::{Error, Result};
use crate::exec::{self, derive_seed};
use crate::random_graph::RandomGraphModel;
use crate::search_space::{canonical_representative, CanonicalKey, SearchSpaceSpec};
use crate::subroutines::{ArchitectureSampler, EnsembleConfig, NeuralEnsemble, UniformSpaceSampler};

/// Checkpoints per curve when the configuration does not say otherwise.
const DEFAULT_CHECKPOINTS: usize = 20;
/// Trials per cell when the configuration does not say otherwise.
const DEFAULT_TRIALS: usize = 100;

fn default_checkpoints() -> usize {
    DEFAULT_CHECKPOINTS
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

/// Search space dimensions in configuration files.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub nodes: usize,
    pub max_edges: usize,
    pub num_ops: usize,
}

impl SpecConfig {
    pub fn build(&self) -> Result<Arc<SearchSpaceSpec>> {
        Ok(Arc::new(SearchSpaceSpec::new(
            self.nodes,
            self.max_edges,
            self.num_ops,
        )?))
    }
}

/// Truncation selector in configuration files: `"full"`,
/// `{"path_length": x}`, or `{"bits": b}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum TruncationChoice {
    #[default]
    Full,
    PathLength(usize),
    Bits(usize),
}

impl TruncationChoice {
    pub fn build(self) -> Truncation {
        match self {
            TruncationChoice::Full => Truncation::Full,
            TruncationChoice::PathLength(x) => Truncation::PathLength(x),
            TruncationChoice::Bits(b) => Truncation::Bits(b),
        }
    }
}

/// Encoding selector in configuration files: family by name plus an
/// optional truncation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct EncodingChoice {
    pub family: String,
    #[serde(default)]
    pub truncation: TruncationChoice,
}

impl EncodingChoice {
    pub fn build(&self, spec: &Arc<SearchSpaceSpec>) -> Result<EncodingKind> {
        let family = parse_family(&self.family)?;
        EncodingKind::new(spec.clone(), family, self.truncation.build())
    }
}

fn parse_family(name: &str) -> Result<EncodingFamily> {
    EncodingFamily::ALL
        .into_iter()
        .find(|f| f.name() == name)
        .ok_or_else(|| {
            let valid: Vec<&str> = EncodingFamily::ALL.iter().map(|f| f.name()).collect();
            Error::Config(format!(
                "unknown encoding family {name:?}; valid families: {}",
                valid.join(", ")
            ))
        })
}

/// One column label per concrete encoding, stable across runs.
pub fn encoding_label(kind: &EncodingKind) -> String {
    let suffix = match kind.truncation() {
        Truncation::Full => String::new(),
        Truncation::PathLength(x) => format!("-x{x}"),
        Truncation::Bits(b) => format!("-b{b}"),
    };
    format!("{}{suffix}", kind.family().name())
}

/// Where a runner gets its benchmark table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchmarkSource {
    /// Generated table over the full space, seeded independently of the
    /// experiment's master seed so the table stays fixed across runs.
    Synthetic {
        seed: u64,
        #[serde(default)]
        complete_only: bool,
    },
    /// JSONL file of `{arch, val_error, test_error, train_time}` lines.
    File { path: String },
}

impl BenchmarkSource {
    pub fn load(&self, spec: &Arc<SearchSpaceSpec>) -> Result<TabularBenchmark> {
        match self {
            BenchmarkSource::Synthetic {
                seed,
                complete_only,
            } => {
                if *complete_only {
                    TabularBenchmark::synthetic_complete(spec.clone(), *seed)
                } else {
                    TabularBenchmark::synthetic(spec.clone(), *seed)
                }
            }
            BenchmarkSource::File { path } => {
                let p = Path::new(path);
                let name = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.clone());
                TabularBenchmark::from_jsonl(spec.clone(), p, &name)
            }
        }
    }
}

/// Query budget in configuration files; at least one bound must be set.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_queries: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_seconds: Option<f64>,
}

impl BudgetConfig {
    pub fn build(&self) -> Result<Budget> {
        match (self.max_queries, self.max_seconds) {
            (None, None) => Err(Error::Config(
                "budget needs max_queries or max_seconds".into(),
            )),
            (Some(0), _) => Err(Error::Config("budget of zero queries".into())),
            (_, Some(s)) if !(s > 0.0) => Err(Error::Config("budget of zero seconds".into())),
            (q, s) => Ok(Budget {
                max_queries: q,
                max_seconds: s,
            }),
        }
    }
}

/// Surrogate ensemble shape in configuration files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EnsembleWireConfig {
    pub members: usize,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
}

impl Default for EnsembleWireConfig {
    fn default() -> Self {
        Self::from_config(&EnsembleConfig::default())
    }
}

impl EnsembleWireConfig {
    pub fn build(&self) -> EnsembleConfig {
        EnsembleConfig {
            members: self.members,
            hidden: self.hidden.clone(),
            epochs: self.epochs,
            batch: self.batch,
            learning_rate: self.learning_rate,
        }
    }

    fn from_config(c: &EnsembleConfig) -> Self {
        Self {
            members: c.members,
            hidden: c.hidden.clone(),
            epochs: c.epochs,
            batch: c.batch,
            learning_rate: c.learning_rate,
        }
    }
}

/// Candidate scoring rule in configuration files.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AcquisitionConfig {
    #[default]
    Thompson,
    GreedyMean,
    MeanMinusUncertainty { weight: f64 },
}

impl AcquisitionConfig {
    fn build(self) -> Acquisition {
        match self {
            AcquisitionConfig::Thompson => Acquisition::Thompson,
            AcquisitionConfig::GreedyMean => Acquisition::GreedyMean,
            AcquisitionConfig::MeanMinusUncertainty { weight } => {
                Acquisition::MeanMinusUncertainty { weight }
            }
        }
    }

    fn from_acquisition(a: Acquisition) -> Self {
        match a {
            Acquisition::Thompson => AcquisitionConfig::Thompson,
            Acquisition::GreedyMean => AcquisitionConfig::GreedyMean,
            Acquisition::MeanMinusUncertainty { weight } => {
                AcquisitionConfig::MeanMinusUncertainty { weight }
            }
        }
    }
}

fn default_population() -> usize {
    EvolutionConfig::default().population
}

fn default_tournament() -> usize {
    EvolutionConfig::default().tournament
}

fn default_magnitude() -> f64 {
    1.0
}

fn default_initial_queries() -> usize {
    BoConfig::default().initial_queries
}

fn default_bo_pool() -> usize {
    BoConfig::default().pool_size
}

fn default_parents() -> usize {
    BananasConfig::default().num_parents
}

fn default_bananas_pool() -> usize {
    BananasConfig::default().pool_size
}

/// Search algorithm plus hyperparameters in configuration files. Omitted
/// hyperparameters take the algorithm's defaults.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum AlgorithmConfig {
    RandomSearch,
    RegularizedEvolution {
        #[serde(default = "default_population")]
        population: usize,
        #[serde(default = "default_tournament")]
        tournament: usize,
        #[serde(default = "default_magnitude")]
        mutation_magnitude: f64,
    },
    LocalSearch,
    BayesianOptimization {
        #[serde(default = "default_initial_queries")]
        initial_queries: usize,
        #[serde(default = "default_bo_pool")]
        pool_size: usize,
        #[serde(default = "default_magnitude")]
        mutation_magnitude: f64,
    },
    Bananas {
        #[serde(default = "default_initial_queries")]
        initial_queries: usize,
        #[serde(default = "default_parents")]
        num_parents: usize,
        #[serde(default = "default_bananas_pool")]
        pool_size: usize,
        #[serde(default = "default_magnitude")]
        mutation_magnitude: f64,
        #[serde(default)]
        acquisition: AcquisitionConfig,
        #[serde(default)]
        ensemble: EnsembleWireConfig,
    },
}

impl AlgorithmConfig {
    pub fn build(&self) -> Result<Algorithm> {
        let algorithm = match self {
            AlgorithmConfig::RandomSearch => Algorithm::RandomSearch,
            AlgorithmConfig::RegularizedEvolution {
                population,
                tournament,
                mutation_magnitude,
            } => Algorithm::RegularizedEvolution(EvolutionConfig {
                population: *population,
                tournament: *tournament,
                mutation_magnitude: *mutation_magnitude,
            }),
            AlgorithmConfig::LocalSearch => Algorithm::LocalSearch,
            AlgorithmConfig::BayesianOptimization {
                initial_queries,
                pool_size,
                mutation_magnitude,
            } => Algorithm::BayesianOptimization(BoConfig {
                initial_queries: *initial_queries,
                pool_size: *pool_size,
                mutation_magnitude: *mutation_magnitude,
            }),
            AlgorithmConfig::Bananas {
                initial_queries,
                num_parents,
                pool_size,
                mutation_magnitude,
                acquisition,
                ensemble,
            } => Algorithm::Bananas(BananasConfig {
                initial_queries: *initial_queries,
                num_parents: *num_parents,
                pool_size: *pool_size,
                mutation_magnitude: *mutation_magnitude,
                acquisition: acquisition.build(),
                ensemble: ensemble.build(),
            }),
        };
        algorithm.validate()?;
        Ok(algorithm)
    }

    /// Wire form of a concrete algorithm, used to echo tuned winners.
    pub fn from_algorithm(algorithm: &Algorithm) -> Self {
        match algorithm {
            Algorithm::RandomSearch => AlgorithmConfig::RandomSearch,
            Algorithm::RegularizedEvolution(c) => AlgorithmConfig::RegularizedEvolution {
                population: c.population,
                tournament: c.tournament,
                mutation_magnitude: c.mutation_magnitude,
            },
            Algorithm::LocalSearch => AlgorithmConfig::LocalSearch,
            Algorithm::BayesianOptimization(c) => AlgorithmConfig::BayesianOptimization {
                initial_queries: c.initial_queries,
                pool_size: c.pool_size,
                mutation_magnitude: c.mutation_magnitude,
            },
            Algorithm::Bananas(c) => AlgorithmConfig::Bananas {
                initial_queries: c.initial_queries,
                num_parents: c.num_parents,
                pool_size: c.pool_size,
                mutation_magnitude: c.mutation_magnitude,
                acquisition: AcquisitionConfig::from_acquisition(c.acquisition),
                ensemble: EnsembleWireConfig::from_config(&c.ensemble),
            },
        }
    }
}

/// What fills one subroutine slot: `"unused"`, `"vary"` (swept by the
/// experiment), `"uniform"` (space-uniform draws), or a fixed encoding.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(rename_all = "snake_case")]
pub enum SlotConfig {
    #[default]
    Unused,
    Vary,
    Uniform,
    Fixed(EncodingChoice),
}

/// Slot assignments for the three encoding-dependent subroutines.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct SlotAssignments {
    #[serde(default)]
    pub sample: SlotConfig,
    #[serde(default)]
    pub perturb: SlotConfig,
    #[serde(default)]
    pub predictor: SlotConfig,
}

impl SlotAssignments {
    fn varying(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.sample == SlotConfig::Vary {
            v.push("sample");
        }
        if self.perturb == SlotConfig::Vary {
            v.push("perturb");
        }
        if self.predictor == SlotConfig::Vary {
            v.push("predictor");
        }
        v
    }

    /// Rejects assignments that leave a needed slot empty or fill an unused
    /// one; the algorithm defines which slots it consumes.
    fn check_against(&self, algorithm: &Algorithm) -> Result<()> {
        let (needs_perturb, needs_predictor) = slot_requirements(algorithm);
        let name = algorithm.name();
        if self.sample == SlotConfig::Unused {
            return Err(Error::Config(format!("{name} needs the sample slot")));
        }
        match (needs_perturb, self.perturb == SlotConfig::Unused) {
            (true, true) => {
                return Err(Error::Config(format!("{name} needs the perturb slot")));
            }
            (false, false) => {
                return Err(Error::Config(format!(
                    "{name} does not perturb; leave the perturb slot unused"
                )));
            }
            _ => {}
        }
        match (needs_predictor, self.predictor == SlotConfig::Unused) {
            (true, true) => {
                return Err(Error::Config(format!("{name} needs the predictor slot")));
            }
            (false, false) => {
                return Err(Error::Config(format!(
                    "{name} has no surrogate; leave the predictor slot unused"
                )));
            }
            _ => {}
        }
        Ok(())
    }

    fn build_context(
        &self,
        vary: Option<&EncodingKind>,
        spec: &Arc<SearchSpaceSpec>,
        bench: &TabularBenchmark,
    ) -> Result<SearchContext> {
        let varying = |slot: &str| {
            vary.cloned().ok_or_else(|| {
                Error::Config(format!("the {slot} slot varies but nothing is swept"))
            })
        };
        let sampler = match &self.sample {
            SlotConfig::Unused => {
                return Err(Error::Config("the sample slot is required".into()));
            }
            SlotConfig::Vary => ArchitectureSampler::Encoding(varying("sample")?),
            SlotConfig::Uniform => {
                ArchitectureSampler::Uniform(UniformSpaceSampler::from_benchmark(bench)?)
            }
            SlotConfig::Fixed(choice) => ArchitectureSampler::Encoding(choice.build(spec)?),
        };
        let mutation = match &self.perturb {
            SlotConfig::Unused => None,
            SlotConfig::Vary => Some(Mutation::Feature(varying("perturb")?)),
            SlotConfig::Uniform => Some(Mutation::UniformDraw),
            SlotConfig::Fixed(choice) => Some(Mutation::Feature(choice.build(spec)?)),
        };
        let predictor = match &self.predictor {
            SlotConfig::Unused => None,
            SlotConfig::Vary => Some(varying("predictor")?),
            SlotConfig::Uniform => {
                return Err(Error::Config(
                    "the predictor slot needs a concrete encoding".into(),
                ));
            }
            SlotConfig::Fixed(choice) => Some(choice.build(spec)?),
        };
        Ok(SearchContext::new(sampler, mutation, predictor))
    }
}

/// Which slots an algorithm consumes beyond sampling.
fn slot_requirements(algorithm: &Algorithm) -> (bool, bool) {
    match algorithm {
        Algorithm::RandomSearch => (false, false),
        Algorithm::RegularizedEvolution(_) | Algorithm::LocalSearch => (true, false),
        Algorithm::BayesianOptimization(_) => (true, true),
        Algorithm::Bananas(_) => (true, true),
    }
}

/// One algorithm column of an ablation: the algorithm and how its slots are
/// filled, with exactly one slot marked `vary`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AblationEntry {
    #[serde(flatten)]
    pub algorithm: AlgorithmConfig,
    pub slots: SlotAssignments,
}

/// Sweeps encodings through one slot of each listed algorithm and records
/// best-test-error curves per (algorithm, encoding) cell.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AblationConfig {
    pub space: SpecConfig,
    pub benchmark: BenchmarkSource,
    pub encodings: Vec<EncodingChoice>,
    pub entries: Vec<AblationEntry>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub budget: BudgetConfig,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
}

/// Degrades two one-hot encodings bit by bit and records how the final
/// search error grows as features disappear.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TruncationSweepConfig {
    pub space: SpecConfig,
    pub benchmark: BenchmarkSource,
    #[serde(flatten)]
    pub algorithm: AlgorithmConfig,
    /// Kept-feature counts below the full width; the full encodings are
    /// always swept as baselines.
    pub bits_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub budget: BudgetConfig,
}

/// Subset rule over canonical classes, matched on the pruned graph.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(deny_unknown_fields)]
pub struct PartitionRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_edges: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_edges: Option<usize>,
}

impl PartitionRule {
    fn matches(&self, key: &CanonicalKey) -> bool {
        let nodes = key.pruned_node_count();
        let edges = key.pruned_edge_count();
        self.max_nodes.is_none_or(|m| nodes <= m)
            && self.min_edges.is_none_or(|m| edges >= m)
            && self.max_edges.is_none_or(|m| edges <= m)
    }
}

fn default_train_size() -> usize {
    1000
}

fn default_test_size() -> usize {
    5000
}

fn default_top_k() -> usize {
    10
}

/// Surrogate used by the extrapolation study.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PredictorChoice {
    #[default]
    NeuralEnsemble,
    NeuralEnsembleWith {
        ensemble: EnsembleWireConfig,
    },
    /// Predicts the true validation error; isolates the selection step from
    /// model quality.
    Oracle,
}

/// Trains surrogates on one benchmark partition, predicts on a disjoint
/// one, and scores the architectures each encoding would have picked.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutsideConfig {
    pub space: SpecConfig,
    pub benchmark: BenchmarkSource,
    pub encodings: Vec<EncodingChoice>,
    pub train: PartitionRule,
    pub test: PartitionRule,
    #[serde(default = "default_train_size")]
    pub train_size: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub predictor: PredictorChoice,
}

/// One (nodes, expected edges) curve of the short-path fraction.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BCurvePoint {
    pub nodes: usize,
    pub expected_edges: f64,
}

/// Tabulates the exact short-path fraction against its Monte Carlo
/// estimate over every cutoff, with the threshold markers the closed-form
/// regime bounds use.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BCurveConfig {
    pub points: Vec<BCurvePoint>,
    pub draws: u64,
    /// Regime constant; thresholds scale linearly with it.
    pub base: f64,
}

fn default_eval_trials() -> usize {
    DEFAULT_TRIALS
}

/// Tuning protocol knobs in configuration files.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct TuningWireConfig {
    pub iterations: usize,
    pub trial_queries: usize,
    pub trial_seeds: usize,
}

impl Default for TuningWireConfig {
    fn default() -> Self {
        let p = TuningProtocol::default();
        Self {
            iterations: p.iterations,
            trial_queries: p.trial_queries,
            trial_seeds: p.trial_seeds,
        }
    }
}

impl TuningWireConfig {
    fn build(self) -> TuningProtocol {
        TuningProtocol {
            iterations: self.iterations,
            trial_queries: self.trial_queries,
            trial_seeds: self.trial_seeds,
        }
    }
}

/// Tunes an algorithm's hyperparameters on one benchmark, then compares
/// default and tuned configurations on a different one.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TuneExperimentConfig {
    pub space: SpecConfig,
    pub tuning_benchmark: BenchmarkSource,
    pub evaluation_benchmark: BenchmarkSource,
    #[serde(flatten)]
    pub algorithm: AlgorithmConfig,
    pub slots: SlotAssignments,
    #[serde(default)]
    pub protocol: TuningWireConfig,
    #[serde(default = "default_eval_trials")]
    pub eval_trials: usize,
    pub eval_budget: BudgetConfig,
}

/// Top-level experiment file: a tagged union over the five runners.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Ablation(AblationConfig),
    Truncation(TruncationSweepConfig),
    OutsideSearchSpace(OutsideConfig),
    BCurve(BCurveConfig),
    Tune(TuneExperimentConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::Ablation(_) => "ablation",
            ExperimentConfig::Truncation(_) => "truncation",
            ExperimentConfig::OutsideSearchSpace(_) => "outside-search-space",
            ExperimentConfig::BCurve(_) => "b-curve",
            ExperimentConfig::Tune(_) => "tune",
        }
    }

    /// Applies a command-line trial override to whichever field plays the
    /// trial role for this experiment.
    pub fn with_trials(&self, trials: Option<usize>) -> Self {
        let mut resolved = self.clone();
        if let Some(n) = trials {
            match &mut resolved {
                ExperimentConfig::Ablation(c) => c.trials = n,
                ExperimentConfig::Truncation(c) => c.trials = n,
                ExperimentConfig::OutsideSearchSpace(c) => c.trials = n,
                ExperimentConfig::BCurve(_) => {}
                ExperimentConfig::Tune(c) => c.eval_trials = n,
            }
        }
        resolved
    }

    /// Structural checks that need no benchmark: counts, budgets, slot
    /// usage, and the one-varying-slot rule.
    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::Ablation(c) => {
                if c.entries.is_empty() {
                    return Err(Error::Config("ablation lists no algorithms".into()));
                }
                if c.encodings.is_empty() {
                    return Err(Error::Config("ablation sweeps no encodings".into()));
                }
                if c.trials == 0 || c.checkpoints == 0 {
                    return Err(Error::Config(
                        "ablation needs at least one trial and one checkpoint".into(),
                    ));
                }
                c.budget.build()?;
                for entry in &c.entries {
                    let algorithm = entry.algorithm.build()?;
                    entry.slots.check_against(&algorithm)?;
                    let varying = entry.slots.varying();
                    if varying.len() != 1 {
                        return Err(Error::Config(format!(
                            "{} must mark exactly one slot as varying, found {}",
                            algorithm.name(),
                            if varying.is_empty() {
                                "none".to_string()
                            } else {
                                varying.join(" and ")
                            }
                        )));
                    }
                }
                Ok(())
            }
            ExperimentConfig::Truncation(c) => {
                if c.trials == 0 {
                    return Err(Error::Config("sweep needs at least one trial".into()));
                }
                c.budget.build()?;
                c.algorithm.build()?;
                Ok(())
            }
            ExperimentConfig::OutsideSearchSpace(c) => {
                if c.encodings.is_empty() {
                    return Err(Error::Config("study compares no encodings".into()));
                }
                if c.trials == 0 || c.top_k == 0 || c.train_size == 0 || c.test_size == 0 {
                    return Err(Error::Config(
                        "trials, top_k, and partition sizes must be positive".into(),
                    ));
                }
                Ok(())
            }
            ExperimentConfig::BCurve(c) => {
                if c.points.is_empty() {
                    return Err(Error::Config("curve lists no (nodes, edges) points".into()));
                }
                if c.draws == 0 {
                    return Err(Error::Config("curve needs at least one draw".into()));
                }
                if !(c.base > 1.0) {
                    return Err(Error::Config("regime constant must exceed 1".into()));
                }
                Ok(())
            }
            ExperimentConfig::Tune(c) => {
                if c.eval_trials == 0 {
                    return Err(Error::Config("evaluation needs at least one trial".into()));
                }
                if c.protocol.iterations == 0
                    || c.protocol.trial_queries == 0
                    || c.protocol.trial_seeds == 0
                {
                    return Err(Error::Config(
                        "tuning protocol fields must be positive".into(),
                    ));
                }
                c.eval_budget.build()?;
                let algorithm = c.algorithm.build()?;
                c.slots.check_against(&algorithm)?;
                if !c.slots.varying().is_empty() {
                    return Err(Error::Config(
                        "tuning has no sweep; no slot may be marked varying".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Invocation parameters that live outside the experiment file.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Replaces the configured trial count when set.
    pub trials: Option<usize>,
    /// Caps worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

/// What a finished run left behind.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub summary_rows: usize,
    pub warnings: Vec<String>,
}

struct SummaryTable {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
    warnings: Vec<String>,
}

/// Runs one experiment end to end: echoes the resolved configuration,
/// executes the runner, and writes `summary.csv`.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentReport> {
    let resolved = config.with_trials(options.trials);
    resolved.validate()?;
    std::fs::create_dir_all(&options.out_dir)?;
    write_config_echo(&resolved, options)?;

    let table = exec::with_workers(options.workers, || match &resolved {
        ExperimentConfig::Ablation(c) => run_ablation(c, options.seed, &options.out_dir),
        ExperimentConfig::Truncation(c) => run_truncation_sweep(c, options.seed, &options.out_dir),
        ExperimentConfig::OutsideSearchSpace(c) => run_outside_search_space(c, options.seed),
        ExperimentConfig::BCurve(c) => run_bcurve(c, options.seed),
        ExperimentConfig::Tune(c) => run_tune(c, options.seed, &options.out_dir),
    })?;

    write_csv(&options.out_dir.join("summary.csv"), &table)?;
    Ok(ExperimentReport {
        out_dir: options.out_dir.clone(),
        summary_rows: table.rows.len(),
        warnings: table.warnings,
    })
}

#[derive(Serialize)]
struct EchoConfig<'a> {
    seed: u64,
    #[serde(flatten)]
    experiment: &'a ExperimentConfig,
}

fn write_config_echo(config: &ExperimentConfig, options: &RunOptions) -> Result<()> {
    let echo = EchoConfig {
        seed: options.seed,
        experiment: config,
    };
    let mut text = serde_json::to_string_pretty(&echo)?;
    text.push('\n');
    exec::replace_file(&options.out_dir.join("config.json"), &text)?;
    Ok(())
}

fn write_csv(path: &Path, table: &SummaryTable) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(table.header)?;
    for row in &table.rows {
        writer.write_record(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    exec::replace_file(path, &text)?;
    Ok(())
}

#[derive(Serialize)]
struct TraceLine<'a> {
    time: f64,
    queries: usize,
    arch: &'a str,
    val_error: f64,
    test_error: f64,
    best_val: f64,
    best_test: f64,
}

fn write_trace(dir: &Path, cell: &str, trial: usize, trace: &[TraceEvent]) -> Result<()> {
    let mut text = String::new();
    for event in trace {
        let line = TraceLine {
            time: event.time,
            queries: event.queries,
            arch: event.arch.as_str(),
            val_error: event.val_error,
            test_error: event.test_error,
            best_val: event.best_val,
            best_test: event.best_test,
        };
        text.push_str(&serde_json::to_string(&line)?);
        text.push('\n');
    }
    exec::replace_file(&dir.join(format!("{cell}__t{trial:04}.jsonl")), &text)?;
    Ok(())
}

fn traces_dir(out_dir: &Path) -> Result<PathBuf> {
    let dir = out_dir.join("traces");
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Sample mean and standard error (n-1 denominator); the error is zero for
/// fewer than two values.
fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Where along a run the ablation samples its curves: event counts for
/// query-bounded budgets, simulated times otherwise.
enum CheckpointAxis {
    Queries(Vec<usize>),
    Time(Vec<f64>),
}

impl CheckpointAxis {
    fn from_budget(budget: &BudgetConfig, count: usize) -> Self {
        if let Some(limit) = budget.max_seconds {
            let times = (1..=count).map(|i| limit * i as f64 / count as f64).collect();
            return CheckpointAxis::Time(times);
        }
        let max = budget.max_queries.unwrap_or(count);
        let mut marks: Vec<usize> = (1..=count)
            .map(|i| ((max as f64 * i as f64 / count as f64).round() as usize).max(1))
            .collect();
        marks.dedup();
        CheckpointAxis::Queries(marks)
    }

    fn label(&self) -> &'static str {
        match self {
            CheckpointAxis::Queries(_) => "queries",
            CheckpointAxis::Time(_) => "time",
        }
    }

    fn len(&self) -> usize {
        match self {
            CheckpointAxis::Queries(m) => m.len(),
            CheckpointAxis::Time(m) => m.len(),
        }
    }

    fn mark(&self, i: usize) -> String {
        match self {
            CheckpointAxis::Queries(m) => m[i].to_string(),
            CheckpointAxis::Time(m) => m[i].to_string(),
        }
    }

    /// Best test error a trial had reached by checkpoint `i`; `None` before
    /// its first query.
    fn value(&self, i: usize, trace: &[TraceEvent]) -> Option<f64> {
        match self {
            CheckpointAxis::Queries(marks) => {
                if trace.is_empty() {
                    None
                } else {
                    Some(trace[marks[i].min(trace.len()) - 1].best_test)
                }
            }
            CheckpointAxis::Time(marks) => trace
                .iter()
                .take_while(|e| e.time <= marks[i])
                .last()
                .map(|e| e.best_test),
        }
    }
}

/// Seeded trials of one (algorithm, context) cell, trial `t` always running
/// under `derive_seed(seed, t)` so cells share random streams.
fn run_cell(
    algorithm: &Algorithm,
    ctx: &SearchContext,
    bench: &TabularBenchmark,
    budget: Budget,
    seed: u64,
    trials: usize,
) -> Result<Vec<SearchResult>> {
    exec::map((0..trials).collect(), |t| {
        run_search(algorithm, ctx, bench, budget, derive_seed(seed, t as u64))
    })
    .into_iter()
    .collect()
}

const ABLATION_HEADER: &[&str] = &[
    "entry",
    "algorithm",
    "varied_slot",
    "encoding",
    "axis",
    "checkpoint",
    "trials",
    "mean_best_test",
    "stderr_best_test",
];

fn run_ablation(config: &AblationConfig, seed: u64, out_dir: &Path) -> Result<SummaryTable> {
    let spec = config.space.build()?;
    let bench = config.benchmark.load(&spec)?;
    let budget = config.budget.build()?;
    let axis = CheckpointAxis::from_budget(&config.budget, config.checkpoints);
    let traces = traces_dir(out_dir)?;

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (entry_idx, entry) in config.entries.iter().enumerate() {
        let algorithm = entry.algorithm.build()?;
        warnings.extend(algorithm.validate()?);
        let varied = entry.slots.varying()[0];
        for choice in &config.encodings {
            let kind = choice.build(&spec)?;
            let label = encoding_label(&kind);
            let ctx = entry.slots.build_context(Some(&kind), &spec, &bench)?;
            let results = run_cell(&algorithm, &ctx, &bench, budget, seed, config.trials)?;

            let cell = format!("{entry_idx:02}-{}__{varied}__{label}", algorithm.name());
            for (t, result) in results.iter().enumerate() {
                write_trace(&traces, &cell, t, &result.trace)?;
            }
            for i in 0..axis.len() {
                let values: Vec<f64> = results
                    .iter()
                    .filter_map(|r| axis.value(i, &r.trace))
                    .filter(|v| v.is_finite())
                    .collect();
                let (mean, stderr) = mean_and_stderr(&values);
                rows.push(vec![
                    entry_idx.to_string(),
                    algorithm.name().to_string(),
                    varied.to_string(),
                    label.clone(),
                    axis.label().to_string(),
                    axis.mark(i),
                    values.len().to_string(),
                    mean.to_string(),
                    stderr.to_string(),
                ]);
            }
        }
    }
    Ok(SummaryTable {
        header: ABLATION_HEADER,
        rows,
        warnings,
    })
}

const TRUNCATION_HEADER: &[&str] = &[
    "encoding",
    "family",
    "kept_bits",
    "full_bits",
    "trials",
    "mean_final_val",
    "stderr_final_val",
    "mean_final_test",
    "stderr_final_test",
];

fn run_truncation_sweep(
    config: &TruncationSweepConfig,
    seed: u64,
    out_dir: &Path,
) -> Result<SummaryTable> {
    let spec = config.space.build()?;
    let bench = config.benchmark.load(&spec)?;
    let budget = config.budget.build()?;
    let algorithm = config.algorithm.build()?;
    let (_, needs_predictor) = slot_requirements(&algorithm);
    let traces = traces_dir(out_dir)?;
    let sampler = UniformSpaceSampler::from_benchmark(&bench)?;

    let mut rows = Vec::new();
    let mut warnings = algorithm.validate()?;
    for family in [EncodingFamily::AdjacencyOneHot, EncodingFamily::PathOneHot] {
        let full_bits = EncodingKind::new(spec.clone(), family, Truncation::Full)?.dim();
        let mut points = vec![Truncation::Full];
        let mut seen = BTreeSet::from([full_bits]);
        for &b in &config.bits_grid {
            if b >= full_bits {
                if b > full_bits {
                    warnings.push(format!(
                        "{}: grid point {b} exceeds the full width {full_bits}; skipped",
                        family.name()
                    ));
                }
                continue;
            }
            if seen.insert(b) {
                points.push(Truncation::Bits(b));
            }
        }

        for truncation in points {
            let kind = EncodingKind::new(spec.clone(), family, truncation)?;
            let label = encoding_label(&kind);
            let ctx = SearchContext::new(
                ArchitectureSampler::Uniform(sampler.clone()),
                Some(Mutation::Feature(kind.clone())),
                needs_predictor.then(|| kind.clone()),
            );
            let results = run_cell(&algorithm, &ctx, &bench, budget, seed, config.trials)?;
            for (t, result) in results.iter().enumerate() {
                write_trace(&traces, &label, t, &result.trace)?;
            }

            let vals: Vec<f64> = results
                .iter()
                .map(SearchResult::final_best_val)
                .filter(|v| v.is_finite())
                .collect();
            let tests: Vec<f64> = results
                .iter()
                .map(SearchResult::final_best_test)
                .filter(|v| v.is_finite())
                .collect();
            let (val_mean, val_stderr) = mean_and_stderr(&vals);
            let (test_mean, test_stderr) = mean_and_stderr(&tests);
            rows.push(vec![
                label,
                family.name().to_string(),
                kind.dim().to_string(),
                full_bits.to_string(),
                tests.len().to_string(),
                val_mean.to_string(),
                val_stderr.to_string(),
                test_mean.to_string(),
                test_stderr.to_string(),
            ]);
        }
    }
    Ok(SummaryTable {
        header: TRUNCATION_HEADER,
        rows,
        warnings,
    })
}

const OUTSIDE_HEADER: &[&str] = &[
    "encoding",
    "predictor",
    "train_pool",
    "test_pool",
    "trials",
    "top_k",
    "topk_val_mean",
    "topk_val_stderr",
    "topk_test_mean",
    "topk_test_stderr",
    "top1_val_mean",
    "top1_val_stderr",
    "top1_test_mean",
    "top1_test_stderr",
];

/// Mean true errors of the architectures a predictor ranks best.
#[derive(Clone, Copy)]
struct SelectionScore {
    topk_val: f64,
    topk_test: f64,
    top1_val: f64,
    top1_test: f64,
}

fn run_outside_search_space(config: &OutsideConfig, seed: u64) -> Result<SummaryTable> {
    let spec = config.space.build()?;
    let bench = config.benchmark.load(&spec)?;

    let train_pool: Vec<&CanonicalKey> =
        bench.keys().filter(|k| config.train.matches(k)).collect();
    let test_pool: Vec<&CanonicalKey> = bench.keys().filter(|k| config.test.matches(k)).collect();
    if train_pool.is_empty() || test_pool.is_empty() {
        return Err(Error::Config(format!(
            "empty partition: train matches {} classes, test matches {} of {}",
            train_pool.len(),
            test_pool.len(),
            bench.len()
        )));
    }
    let test_set: BTreeSet<&CanonicalKey> = test_pool.iter().copied().collect();
    let overlap = train_pool.iter().filter(|k| test_set.contains(*k)).count();
    if overlap > 0 {
        return Err(Error::Config(format!(
            "train and test partitions share {overlap} classes; they must be disjoint"
        )));
    }

    let ensemble = match &config.predictor {
        PredictorChoice::NeuralEnsemble => Some(EnsembleConfig::default()),
        PredictorChoice::NeuralEnsembleWith { ensemble } => Some(ensemble.build()),
        PredictorChoice::Oracle => None,
    };
    let predictor_label = match &config.predictor {
        PredictorChoice::Oracle => "oracle",
        _ => "neural-ensemble",
    };

    let kinds: Vec<EncodingKind> = config
        .encodings
        .iter()
        .map(|c| c.build(&spec))
        .collect::<Result<_>>()?;

    // Trials resample both partitions; the surrogate's view of the space is
    // the only thing that changes between encodings within a trial.
    let per_trial: Vec<Result<Vec<SelectionScore>>> =
        exec::map((0..config.trials).collect(), |t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            let train_n = config.train_size.min(train_pool.len());
            let test_n = config.test_size.min(test_pool.len());
            let train_keys: Vec<&CanonicalKey> =
                rand::seq::index::sample(&mut rng, train_pool.len(), train_n)
                    .iter()
                    .map(|i| train_pool[i])
                    .collect();
            let test_keys: Vec<&CanonicalKey> =
                rand::seq::index::sample(&mut rng, test_pool.len(), test_n)
                    .iter()
                    .map(|i| test_pool[i])
                    .collect();

            kinds
                .iter()
                .enumerate()
                .map(|(e, kind)| {
                    score_selection(
                        kind,
                        &bench,
                        &train_keys,
                        &test_keys,
                        config.top_k,
                        ensemble.as_ref(),
                        derive_seed(derive_seed(seed, t as u64), e as u64),
                    )
                })
                .collect()
        });

    let per_trial: Vec<Vec<SelectionScore>> = per_trial.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (e, kind) in kinds.iter().enumerate() {
        let column = |f: fn(&SelectionScore) -> f64| -> Vec<f64> {
            per_trial.iter().map(|scores| f(&scores[e])).collect()
        };
        let (tkv, tkv_se) = mean_and_stderr(&column(|s| s.topk_val));
        let (tkt, tkt_se) = mean_and_stderr(&column(|s| s.topk_test));
        let (t1v, t1v_se) = mean_and_stderr(&column(|s| s.top1_val));
        let (t1t, t1t_se) = mean_and_stderr(&column(|s| s.top1_test));
        rows.push(vec![
            encoding_label(kind),
            predictor_label.to_string(),
            train_pool.len().to_string(),
            test_pool.len().to_string(),
            config.trials.to_string(),
            config.top_k.to_string(),
            tkv.to_string(),
            tkv_se.to_string(),
            tkt.to_string(),
            tkt_se.to_string(),
            t1v.to_string(),
            t1v_se.to_string(),
            t1t.to_string(),
            t1t_se.to_string(),
        ]);
    }
    Ok(SummaryTable {
        header: OUTSIDE_HEADER,
        rows,
        warnings: Vec::new(),
    })
}

/// Fits one surrogate on the train keys, ranks the test keys by predicted
/// validation error, and reports the true errors of the picks. `None` for
/// the ensemble means the oracle: predictions are the true values.
fn score_selection(
    kind: &EncodingKind,
    bench: &TabularBenchmark,
    train_keys: &[&CanonicalKey],
    test_keys: &[&CanonicalKey],
    top_k: usize,
    ensemble: Option<&EnsembleConfig>,
    fit_seed: u64,
) -> Result<SelectionScore> {
    let encode = |key: &CanonicalKey| -> Result<Vec<f64>> {
        kind.encode(&canonical_representative(kind.spec(), key)?)
    };
    let record = |key: &CanonicalKey| {
        bench
            .lookup(key)
            .copied()
            .ok_or_else(|| Error::UnknownArchitecture(key.to_string()))
    };

    let mut predicted: Vec<(f64, &CanonicalKey)> = match ensemble {
        Some(config) => {
            let rows: Vec<Vec<f64>> = train_keys.iter().map(|k| encode(k)).collect::<Result<_>>()?;
            let targets: Vec<f64> = train_keys
                .iter()
                .map(|k| record(k).map(|r| r.val_error))
                .collect::<Result<_>>()?;
            let model = NeuralEnsemble::fit(kind.clone(), rows, targets, config, fit_seed)?;
            test_keys
                .iter()
                .map(|k| Ok((model.predict(&encode(k)?)?.0, *k)))
                .collect::<Result<_>>()?
        }
        None => test_keys
            .iter()
            .map(|k| record(k).map(|r| (r.val_error, *k)))
            .collect::<Result<_>>()?,
    };
    predicted.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));

    let picks: Vec<crate::benchmark::BenchRecord> = predicted
        .iter()
        .take(top_k.min(predicted.len()))
        .map(|(_, k)| record(k))
        .collect::<Result<_>>()?;
    let k = picks.len() as f64;
    Ok(SelectionScore {
        topk_val: picks.iter().map(|r| r.val_error).sum::<f64>() / k,
        topk_test: picks.iter().map(|r| r.test_error).sum::<f64>() / k,
        top1_val: picks[0].val_error,
        top1_test: picks[0].test_error,
    })
}

const BCURVE_HEADER: &[&str] = &[
    "nodes",
    "expected_edges",
    "cutoff",
    "b_exact",
    "b_mc",
    "mc_stderr",
    "draws",
    "base",
    "short_threshold",
    "long_threshold",
];

fn run_bcurve(config: &BCurveConfig, seed: u64) -> Result<SummaryTable> {
    let mut rows = Vec::new();
    let mut unit = 0u64;
    for point in &config.points {
        let model = RandomGraphModel::new(point.nodes, point.expected_edges)?;
        let scale = point.expected_edges / point.nodes as f64;
        let long_threshold = 2.0 * std::f64::consts::E * config.base * scale;
        let short_threshold = scale / (2.0 * std::f64::consts::E * config.base);
        for cutoff in 0..point.nodes {
            let exact = model.short_path_fraction(cutoff);
            let estimate = model.monte_carlo_short_fraction(
                cutoff,
                config.draws,
                derive_seed(seed, unit),
            )?;
            unit += 1;
            rows.push(vec![
                point.nodes.to_string(),
                point.expected_edges.to_string(),
                cutoff.to_string(),
                exact.to_string(),
                estimate.value.to_string(),
                estimate.stderr.to_string(),
                estimate.draws.to_string(),
                config.base.to_string(),
                short_threshold.to_string(),
                long_threshold.to_string(),
            ]);
        }
    }
    Ok(SummaryTable {
        header: BCURVE_HEADER,
        rows,
        warnings: Vec::new(),
    })
}

const TUNE_HEADER: &[&str] = &[
    "variant",
    "algorithm",
    "trials",
    "mean_best_val",
    "stderr_best_val",
    "mean_best_test",
    "stderr_best_test",
];

#[derive(Serialize)]
struct TunedEcho {
    algorithm: AlgorithmConfig,
    score: Option<f64>,
    candidates_evaluated: usize,
}

fn run_tune(config: &TuneExperimentConfig, seed: u64, out_dir: &Path) -> Result<SummaryTable> {
    let spec = config.space.build()?;
    let tuning_bench = config.tuning_benchmark.load(&spec)?;
    let eval_bench = config.evaluation_benchmark.load(&spec)?;
    let base = config.algorithm.build()?;
    let mut warnings = base.validate()?;

    let tuning_ctx = config.slots.build_context(None, &spec, &tuning_bench)?;
    let eval_ctx = config.slots.build_context(None, &spec, &eval_bench)?;

    let tuned = tune_hyperparameters(
        &base,
        &tuning_ctx,
        &tuning_bench,
        &eval_bench,
        &config.protocol.build(),
        derive_seed(seed, 0),
    )?;
    if tuned.score.is_none() {
        warnings.push(format!(
            "{} has no tunable hyperparameters; the tuned variant equals the default",
            base.name()
        ));
    }
    let echo = TunedEcho {
        algorithm: AlgorithmConfig::from_algorithm(&tuned.algorithm),
        score: tuned.score,
        candidates_evaluated: tuned.candidates_evaluated,
    };
    let mut text = serde_json::to_string_pretty(&echo)?;
    text.push('\n');
    exec::replace_file(&out_dir.join("tuned.json"), &text)?;

    let budget = config.eval_budget.build()?;
    let traces = traces_dir(out_dir)?;
    let mut rows = Vec::new();
    for (variant, algorithm) in [("default", &base), ("tuned", &tuned.algorithm)] {
        // Both variants replay the same trial seeds, so the comparison is
        // paired.
        let results = run_cell(
            algorithm,
            &eval_ctx,
            &eval_bench,
            budget,
            derive_seed(seed, 1),
            config.eval_trials,
        )?;
        for (t, result) in results.iter().enumerate() {
            write_trace(&traces, variant, t, &result.trace)?;
        }
        let vals: Vec<f64> = results
            .iter()
            .map(SearchResult::final_best_val)
            .filter(|v| v.is_finite())
            .collect();
        let tests: Vec<f64> = results
            .iter()
            .map(SearchResult::final_best_test)
            .filter(|v| v.is_finite())
            .collect();
        let (val_mean, val_stderr) = mean_and_stderr(&vals);
        let (test_mean, test_stderr) = mean_and_stderr(&tests);
        rows.push(vec![
            variant.to_string(),
            algorithm.name().to_string(),
            vals.len().to_string(),
            val_mean.to_string(),
            val_stderr.to_string(),
            test_mean.to_string(),
            test_stderr.to_string(),
        ]);
    }
    Ok(SummaryTable {
        header: TUNE_HEADER,
        rows,
        warnings,
    })
}
