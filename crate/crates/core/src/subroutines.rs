//! Subroutines whose behavior depends on the encoding: random sampling,
//! perturbation, and two trainable performance predictors.
//!
//! Sampling and perturbation work in feature space: draw or redraw feature
//! values class by class, decode, and keep the result only if it lands on a
//! member of the space. How often that happens, and which members are
//! reachable, is a property of the encoding under study.
//!
//! The predictors regress validation error from feature vectors: a Gaussian
//! process whose kernel decays with edit distance, and an ensemble of small
//! feed-forward networks. Both are deterministic given their seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nalgebra::{DMatrix, DVector, Dyn};

use crate::benchmark::TabularBenchmark;
use crate::encodings::{EncodingKind, FeatureClass};
use crate::exec::{self, derive_seed};
use crate::search_space::{canonical_representative, enumerate_space, Architecture, Enumeration, SearchSpaceSpec};
use crate::{Error, Result};

/// Decode attempts before random sampling reports the encoding as
/// practically unusable for sampling.
const SAMPLE_CEILING: u64 = 100_000;

/// Decode attempts before perturbation gives up and returns its input.
const PERTURB_CEILING: u64 = 10_000;

/// Length-scale grid searched when fitting the Gaussian process.
const SIGMA_GRID: [f64; 7] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// Observation noise added to the kernel diagonal (targets are scaled to
/// unit spread before fitting).
const GP_NOISE: f64 = 1e-4;

/// Draws feature vectors class by class and decodes until one lands on a
/// member of the space. Fails with [`Error::AcceptanceTooLow`] when the
/// encoding (practically) never produces a member.
pub fn sample_random<R: Rng + ?Sized>(kind: &EncodingKind, rng: &mut R) -> Result<Architecture> {
    let spec = kind.spec();
    for _ in 0..SAMPLE_CEILING {
        let features: Vec<f64> = kind.feature_classes().iter().map(|c| c.sample(rng)).collect();
        match kind.decode(&features) {
            Ok(arch) if spec.contains(&arch) => return Ok(arch),
            Ok(_) | Err(Error::NotRealizable(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::AcceptanceTooLow(SAMPLE_CEILING))
}

/// Uniform draw over equivalence classes, from a pre-materialized list of
/// canonical representatives.
#[derive(Clone, Debug)]
pub struct UniformSpaceSampler {
    representatives: Vec<Architecture>,
}

impl UniformSpaceSampler {
    /// Enumerates every class of the space.
    pub fn enumerate(spec: &SearchSpaceSpec) -> Result<Self> {
        Self::from_representatives(enumerate_space(spec, Enumeration::Classes)?)
    }

    /// One representative per benchmark record.
    pub fn from_benchmark(bench: &TabularBenchmark) -> Result<Self> {
        let spec = bench.spec();
        Self::from_representatives(
            bench
                .keys()
                .map(|key| canonical_representative(spec, key))
                .collect::<Result<_>>()?,
        )
    }

    fn from_representatives(representatives: Vec<Architecture>) -> Result<Self> {
        if representatives.is_empty() {
            return Err(Error::InvalidParameter("no classes to sample from".into()));
        }
        Ok(Self { representatives })
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Architecture {
        &self.representatives[rng.random_range(0..self.representatives.len())]
    }
}

/// How architectures enter a search: feature-space rejection sampling under
/// an encoding, or a uniform draw over classes.
#[derive(Clone, Debug)]
pub enum ArchitectureSampler {
    Encoding(EncodingKind),
    Uniform(UniformSpaceSampler),
}

impl ArchitectureSampler {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Architecture> {
        match self {
            ArchitectureSampler::Encoding(kind) => sample_random(kind, rng),
            ArchitectureSampler::Uniform(u) => Ok(u.sample(rng).clone()),
        }
    }
}

/// Result of a perturbation attempt. `exhausted` marks a fallback to the
/// unmodified input after the attempt ceiling.
#[derive(Clone, Debug)]
pub struct Perturbed {
    pub arch: Architecture,
    pub exhausted: bool,
}

/// Resamples each feature independently with probability
/// `magnitude / dim`, decodes, and retries from the same base until the
/// result is a member. `magnitude` is the expected number of features
/// redrawn.
pub fn perturb<R: Rng + ?Sized>(
    kind: &EncodingKind,
    arch: &Architecture,
    magnitude: f64,
    rng: &mut R,
) -> Result<Perturbed> {
    let base = kind.encode(arch)?;
    let dim = kind.dim();
    if dim == 0 {
        return Ok(Perturbed {
            arch: arch.clone(),
            exhausted: true,
        });
    }
    let rate = (magnitude / dim as f64).clamp(0.0, 1.0);
    let spec = kind.spec();
    for _ in 0..PERTURB_CEILING {
        let candidate: Vec<f64> = kind
            .feature_classes()
            .iter()
            .zip(&base)
            .map(|(class, &value)| {
                if rng.random_bool(rate) {
                    class.sample(rng)
                } else {
                    value
                }
            })
            .collect();
        match kind.decode(&candidate) {
            Ok(a) if spec.contains(&a) => {
                return Ok(Perturbed {
                    arch: a,
                    exhausted: false,
                })
            }
            Ok(_) | Err(Error::NotRealizable(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(Perturbed {
        arch: arch.clone(),
        exhausted: true,
    })
}

/// Mean and spread of one prediction.
#[derive(Clone, Copy, Debug)]
pub struct PredictedValue {
    pub mean: f64,
    pub uncertainty: f64,
}

/// A refittable regressor from feature vectors to a scalar target.
pub trait Predictor {
    fn encoding(&self) -> &EncodingKind;
    fn refit(&mut self, rows: Vec<Vec<f64>>, targets: Vec<f64>, seed: u64) -> Result<()>;
    fn predict(&self, features: &[f64]) -> Result<PredictedValue>;
}

/// Gaussian process with kernel `exp(-edit_distance / sigma)`, the length
/// scale picked from a fixed grid by marginal likelihood. Targets are
/// centered and scaled to unit spread internally.
pub struct GaussianProcess {
    kind: EncodingKind,
    rows: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    chol: nalgebra::Cholesky<f64, Dyn>,
    sigma: f64,
    diagonal: f64,
    y_mean: f64,
    y_scale: f64,
}

impl GaussianProcess {
    pub fn fit(kind: EncodingKind, rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if rows.is_empty() || rows.len() != targets.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows against {} targets",
                rows.len(),
                targets.len()
            )));
        }
        let n = rows.len();
        let y_mean = targets.iter().sum::<f64>() / n as f64;
        let y_scale = (targets.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / n as f64)
            .sqrt()
            .max(1e-8);
        let y = DVector::from_iterator(n, targets.iter().map(|t| (t - y_mean) / y_scale));

        let mut distances = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let d = kind.edit_distance(&rows[i], &rows[j])?;
                distances[(i, j)] = d;
                distances[(j, i)] = d;
            }
        }

        let mut best: Option<(f64, f64, f64, nalgebra::Cholesky<f64, Dyn>)> = None;
        for sigma in SIGMA_GRID {
            let Some((chol, diagonal)) = factor_kernel(&distances, sigma) else {
                continue;
            };
            let alpha = chol.solve(&y);
            let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
            let lml = -0.5 * y.dot(&alpha)
                - log_det
                - n as f64 / 2.0 * (2.0 * std::f64::consts::PI).ln();
            if best.as_ref().is_none_or(|(b, ..)| lml > *b) {
                best = Some((lml, sigma, diagonal, chol));
            }
        }
        let Some((_, sigma, diagonal, chol)) = best else {
            return Err(Error::SingularKernel);
        };
        let alpha = chol.solve(&y);
        Ok(Self {
            kind,
            rows,
            alpha,
            chol,
            sigma,
            diagonal,
            y_mean,
            y_scale,
        })
    }

    pub fn length_scale(&self) -> f64 {
        self.sigma
    }

    /// Posterior mean and standard deviation at `features`.
    pub fn predict(&self, features: &[f64]) -> Result<(f64, f64)> {
        let k = DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|row| {
                    self.kind
                        .edit_distance(row, features)
                        .map(|d| (-d / self.sigma).exp())
                })
                .collect::<Result<Vec<f64>>>()?,
        );
        let mean = self.y_mean + self.y_scale * k.dot(&self.alpha);
        let solved = self.chol.solve(&k);
        let var = (self.diagonal - k.dot(&solved)).max(0.0);
        Ok((mean, self.y_scale * var.sqrt()))
    }
}

/// Factors `exp(-D / sigma) + jitter I`, escalating the jitter tenfold up to
/// 1.0 until the factorization succeeds.
fn factor_kernel(
    distances: &DMatrix<f64>,
    sigma: f64,
) -> Option<(nalgebra::Cholesky<f64, Dyn>, f64)> {
    let mut jitter = GP_NOISE;
    while jitter <= 1.0 {
        let k = DMatrix::from_fn(distances.nrows(), distances.ncols(), |i, j| {
            let base = (-distances[(i, j)] / sigma).exp();
            if i == j {
                base + jitter
            } else {
                base
            }
        });
        if let Some(chol) = nalgebra::Cholesky::new(k) {
            return Some((chol, 1.0 + jitter));
        }
        jitter *= 10.0;
    }
    None
}

impl Predictor for GaussianProcess {
    fn encoding(&self) -> &EncodingKind {
        &self.kind
    }

    fn refit(&mut self, rows: Vec<Vec<f64>>, targets: Vec<f64>, _seed: u64) -> Result<()> {
        *self = GaussianProcess::fit(self.kind.clone(), rows, targets)?;
        Ok(())
    }

    fn predict(&self, features: &[f64]) -> Result<PredictedValue> {
        let (mean, std) = GaussianProcess::predict(self, features)?;
        Ok(PredictedValue {
            mean,
            uncertainty: std,
        })
    }
}

/// Builder wrapper so a Gaussian process can be handed to a search before
/// any data exists.
pub struct GpPredictor {
    kind: EncodingKind,
    fitted: Option<GaussianProcess>,
}

impl GpPredictor {
    pub fn new(kind: EncodingKind) -> Self {
        Self { kind, fitted: None }
    }
}

impl Predictor for GpPredictor {
    fn encoding(&self) -> &EncodingKind {
        &self.kind
    }

    fn refit(&mut self, rows: Vec<Vec<f64>>, targets: Vec<f64>, _seed: u64) -> Result<()> {
        self.fitted = Some(GaussianProcess::fit(self.kind.clone(), rows, targets)?);
        Ok(())
    }

    fn predict(&self, features: &[f64]) -> Result<PredictedValue> {
        let gp = self
            .fitted
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("predict before first refit".into()))?;
        let (mean, std) = gp.predict(features)?;
        Ok(PredictedValue {
            mean,
            uncertainty: std,
        })
    }
}

/// Feed-forward regressor: ReLU hidden layers, linear output, trained with
/// minibatch SGD on mean absolute error under a linearly decaying step size.
pub struct Mlp {
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

impl Mlp {
    /// Uniform `(-1/sqrt(fan_in), 1/sqrt(fan_in))` initialization per layer.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            weights.push(DMatrix::from_fn(fan_out, fan_in, |_, _| {
                rng.random_range(-bound..bound)
            }));
            biases.push(DVector::from_fn(fan_out, |_, _| {
                rng.random_range(-bound..bound)
            }));
        }
        Self { weights, biases }
    }

    pub fn forward(&self, x: &DVector<f64>) -> f64 {
        let mut a = x.clone();
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            a = w * a + b;
            if l < last {
                a.apply(|v| *v = v.max(0.0));
            }
        }
        a[0]
    }

    /// Every trainable scalar in a fixed order: each layer's weight matrix in
    /// column-major order followed by that layer's biases.  The same order
    /// flattens the gradients returned by [`Mlp::loss_and_grad`].
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    /// Overwrites the trainable scalars from the [`Mlp::flat_params`] layout.
    pub fn set_flat_params(&mut self, params: &[f64]) {
        let mut offset = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let len = w.len();
            w.as_mut_slice().copy_from_slice(&params[offset..offset + len]);
            offset += len;
            let len = b.len();
            b.as_mut_slice().copy_from_slice(&params[offset..offset + len]);
            offset += len;
        }
        assert_eq!(offset, params.len(), "parameter vector length mismatch");
    }

    /// Mean absolute error over the batch and its gradient with respect to
    /// every weight and bias.
    pub fn loss_and_grad(
        &self,
        xs: &[DVector<f64>],
        ys: &[f64],
    ) -> (f64, Vec<DMatrix<f64>>, Vec<DVector<f64>>) {
        let layers = self.weights.len();
        let mut grad_w: Vec<DMatrix<f64>> = self
            .weights
            .iter()
            .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
            .collect();
        let mut grad_b: Vec<DVector<f64>> =
            self.biases.iter().map(|b| DVector::zeros(b.nrows())).collect();
        let scale = 1.0 / xs.len() as f64;
        let mut loss = 0.0;

        for (x, &y) in xs.iter().zip(ys) {
            // Forward pass keeping pre- and post-activations per layer.
            let mut acts = vec![x.clone()];
            let mut pre = Vec::with_capacity(layers);
            for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
                let z = w * acts.last().expect("activation") + b;
                let a = if l < layers - 1 {
                    z.map(|v| v.max(0.0))
                } else {
                    z.clone()
                };
                pre.push(z);
                acts.push(a);
            }
            let prediction = acts.last().expect("output")[0];
            loss += (prediction - y).abs() * scale;

            let mut delta = DVector::from_element(1, (prediction - y).signum() * scale);
            for l in (0..layers).rev() {
                grad_w[l] += &delta * acts[l].transpose();
                grad_b[l] += &delta;
                if l > 0 {
                    let back = self.weights[l].transpose() * delta;
                    delta = back.zip_map(&pre[l - 1], |g, z| if z > 0.0 { g } else { 0.0 });
                }
            }
        }
        (loss, grad_w, grad_b)
    }

    fn step(&mut self, grad_w: &[DMatrix<f64>], grad_b: &[DVector<f64>], lr: f64) {
        for l in 0..self.weights.len() {
            self.weights[l] -= &grad_w[l] * lr;
            self.biases[l] -= &grad_b[l] * lr;
        }
    }
}

/// Training shape of [`NeuralEnsemble`].
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub members: usize,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            members: 5,
            hidden: vec![64, 64],
            epochs: 200,
            batch: 32,
            learning_rate: 0.01,
        }
    }
}

/// Ensemble of independently initialized [`Mlp`]s; the spread of member
/// outputs serves as the uncertainty estimate. Inputs are scaled by each
/// feature's admissible range, targets are centered.
pub struct NeuralEnsemble {
    kind: EncodingKind,
    members: Vec<Mlp>,
    offsets: Vec<f64>,
    spans: Vec<f64>,
    y_mean: f64,
}

impl NeuralEnsemble {
    pub fn fit(
        kind: EncodingKind,
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
        config: &EnsembleConfig,
        seed: u64,
    ) -> Result<Self> {
        if rows.is_empty() || rows.len() != targets.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows against {} targets",
                rows.len(),
                targets.len()
            )));
        }
        if config.members == 0 || config.batch == 0 {
            return Err(Error::InvalidParameter(
                "ensemble needs at least one member and a nonempty batch".into(),
            ));
        }
        for row in &rows {
            kind.validate_features(row)?;
        }
        let (offsets, spans) = feature_ranges(kind.feature_classes());
        let y_mean = targets.iter().sum::<f64>() / targets.len() as f64;

        let scaled: Vec<DVector<f64>> = rows
            .iter()
            .map(|row| {
                DVector::from_iterator(
                    row.len(),
                    row.iter()
                        .zip(offsets.iter().zip(&spans))
                        .map(|(&v, (&lo, &span))| (v - lo) / span),
                )
            })
            .collect();
        let centered: Vec<f64> = targets.iter().map(|y| y - y_mean).collect();

        let mut sizes = vec![kind.dim()];
        sizes.extend(&config.hidden);
        sizes.push(1);

        let members = exec::map((0..config.members as u64).collect(), |m| {
            train_member(&sizes, &scaled, &centered, config, derive_seed(seed, m))
        });
        Ok(Self {
            kind,
            members,
            offsets,
            spans,
            y_mean,
        })
    }

    /// Member-mean prediction and the population spread across members.
    pub fn predict(&self, features: &[f64]) -> Result<(f64, f64)> {
        let outputs = self.member_predictions(features)?;
        let mean = outputs.iter().sum::<f64>() / outputs.len() as f64;
        let var =
            outputs.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / outputs.len() as f64;
        Ok((mean, var.sqrt()))
    }

    /// Each member's prediction, in member order.
    pub fn member_predictions(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.kind.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} features, encoding has {}",
                features.len(),
                self.kind.dim()
            )));
        }
        let x = DVector::from_iterator(
            features.len(),
            features
                .iter()
                .zip(self.offsets.iter().zip(&self.spans))
                .map(|(&v, (&lo, &span))| (v - lo) / span),
        );
        Ok(self
            .members
            .iter()
            .map(|m| m.forward(&x) + self.y_mean)
            .collect())
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }
}

fn train_member(
    sizes: &[usize],
    xs: &[DVector<f64>],
    ys: &[f64],
    config: &EnsembleConfig,
    seed: u64,
) -> Mlp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mlp = Mlp::init(sizes, &mut rng);
    let batches_per_epoch = xs.len().div_ceil(config.batch);
    let total_steps = (config.epochs * batches_per_epoch).max(1);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut step = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch) {
            let bx: Vec<DVector<f64>> = chunk.iter().map(|&i| xs[i].clone()).collect();
            let by: Vec<f64> = chunk.iter().map(|&i| ys[i]).collect();
            let (_, gw, gb) = mlp.loss_and_grad(&bx, &by);
            let lr = config.learning_rate * (total_steps - step) as f64 / total_steps as f64;
            mlp.step(&gw, &gb, lr);
            step += 1;
        }
    }
    mlp
}

/// Fits on the training split and reports mean absolute prediction error on
/// the test split.
pub fn evaluate_mae(
    predictor: &mut dyn Predictor,
    train_rows: Vec<Vec<f64>>,
    train_targets: Vec<f64>,
    test_rows: &[Vec<f64>],
    test_targets: &[f64],
    seed: u64,
) -> Result<f64> {
    if test_rows.is_empty() || test_rows.len() != test_targets.len() {
        return Err(Error::InvalidParameter(format!(
            "{} test rows against {} targets",
            test_rows.len(),
            test_targets.len()
        )));
    }
    predictor.refit(train_rows, train_targets, seed)?;
    let mut total = 0.0;
    for (row, &truth) in test_rows.iter().zip(test_targets) {
        total += (predictor.predict(row)?.mean - truth).abs();
    }
    Ok(total / test_rows.len() as f64)
}

/// Offset and span of the admissible values per feature class; constants
/// scale to zero.
fn feature_ranges(classes: &[FeatureClass]) -> (Vec<f64>, Vec<f64>) {
    let mut offsets = Vec::with_capacity(classes.len());
    let mut spans = Vec::with_capacity(classes.len());
    for class in classes {
        let (lo, span) = match *class {
            FeatureClass::Binary => (0.0, 1.0),
            FeatureClass::Categorical { cardinality } => {
                (0.0, ((cardinality - 1) as f64).max(1.0))
            }
            FeatureClass::Count { min, max } => (min as f64, ((max - min) as f64).max(1.0)),
            FeatureClass::Continuous => (0.0, 1.0),
            FeatureClass::Constant(v) => (v, 1.0),
        };
        offsets.push(lo);
        spans.push(span);
    }
    (offsets, spans)
}

/// Builder wrapper pairing an encoding with an ensemble configuration.
pub struct EnsemblePredictor {
    kind: EncodingKind,
    config: EnsembleConfig,
    fitted: Option<NeuralEnsemble>,
}

impl EnsemblePredictor {
    pub fn new(kind: EncodingKind, config: EnsembleConfig) -> Self {
        Self {
            kind,
            config,
            fitted: None,
        }
    }
}

impl Predictor for EnsemblePredictor {
    fn encoding(&self) -> &EncodingKind {
        &self.kind
    }

    fn refit(&mut self, rows: Vec<Vec<f64>>, targets: Vec<f64>, seed: u64) -> Result<()> {
        self.fitted = Some(NeuralEnsemble::fit(
            self.kind.clone(),
            rows,
            targets,
            &self.config,
            seed,
        )?);
        Ok(())
    }

    fn predict(&self, features: &[f64]) -> Result<PredictedValue> {
        let ensemble = self
            .fitted
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("predict before first refit".into()))?;
        let (mean, std) = ensemble.predict(features)?;
        Ok(PredictedValue {
            mean,
            uncertainty: std,
        })
    }
}
