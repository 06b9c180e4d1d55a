//! Loss, gradient estimation and the training loop.
//!
//! Optimisation uses simultaneous-perturbation gradient estimates (two circuit
//! evaluations per step regardless of the parameter count) with plain
//! gradient descent on the mean batch cross-entropy. The estimator is the
//! standard central-difference Rademacher form; it carries no momentum or
//! perturbation schedule.
//!
//! A run is a pure function of the datasets and the [`TrainConfig`]: a single
//! ChaCha8 stream seeded from `config.seed` is consumed in a fixed order
//! (parameter initialisation, then for each epoch one shuffle followed by one
//! perturbation direction per batch).

mod gradient;
mod loss;
mod metrics;

pub use gradient::{coordinate_variance, finite_diff_gradient, relative_l2_error, spsb_gradient};
pub use loss::cross_entropy;
pub use metrics::{accuracy, f1_score, predict};

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{run_circuit, Architecture, FeatureVector, ModelError, ParameterVector, Prediction};
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("label {0} is not 0 or 1")]
    InvalidLabel(u8),
    #[error("sample {index} has {got} features, architecture expects {expected}")]
    Dimension { index: usize, expected: usize, got: usize },
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Starting point of the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// i.i.d. uniform on `[0, 2pi)`.
    #[default]
    RandomUniform,
    Zeros,
    /// Every angle `2pi`; each rotation is then `-I`.
    TwoPi,
}

impl InitMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitMode::RandomUniform => "random_uniform",
            InitMode::Zeros => "zeros",
            InitMode::TwoPi => "two_pi",
        }
    }
}

impl FromStr for InitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random_uniform" => Ok(InitMode::RandomUniform),
            "zeros" => Ok(InitMode::Zeros),
            "two_pi" => Ok(InitMode::TwoPi),
            other => Err(format!("unknown init mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Perturbation size of the gradient estimator, radians.
    pub spsb_epsilon: f64,
    pub init_mode: InitMode,
    pub seed: u64,
    /// Probabilities are clipped to `[prob_clamp, 1 - prob_clamp]` inside the log.
    pub prob_clamp: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            learning_rate: 0.1,
            batch_size: 32,
            spsb_epsilon: 0.05,
            init_mode: InitMode::RandomUniform,
            seed: 0,
            prob_clamp: 1e-10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |what: &str| Err(TrainError::Config(what.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        // zero is allowed: it freezes the parameters
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if !(self.spsb_epsilon > 0.0 && self.spsb_epsilon.is_finite()) {
            return bad("spsb_epsilon must be positive");
        }
        if !(self.prob_clamp > 0.0 && self.prob_clamp < 0.5) {
            return bad("prob_clamp must lie in (0, 0.5)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample<T> {
    pub features: FeatureVector<T>,
    pub label: u8,
}

/// One row of the per-epoch history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub train_f1: f64,
    pub test_f1: f64,
    /// Mean cross-entropy over the training set.
    pub train_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<T> {
    pub history: Vec<EpochMetrics>,
    pub params: ParameterVector<T>,
}

/// Accuracy, F1 of class 1 and mean cross-entropy of a parameter setting on a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub f1: f64,
    pub mean_loss: f64,
}

pub fn init_params<T: Real, R: Rng + ?Sized>(
    arch: &Architecture,
    mode: InitMode,
    rng: &mut R,
) -> ParameterVector<T> {
    let n = arch.param_count();
    let angles = match mode {
        InitMode::Zeros => vec![T::zero(); n],
        InitMode::TwoPi => vec![T::TAU(); n],
        InitMode::RandomUniform => {
            (0..n).map(|_| T::lit(rng.gen_range(0.0..std::f64::consts::TAU))).collect()
        }
    };
    ParameterVector::new(arch, angles).expect("length matches architecture")
}

fn p1_of<T: Real>(arch: &Architecture, params: &[T], features: &[T]) -> Result<T, ModelError> {
    let (state, survivor) = run_circuit(arch, params, features)?;
    Ok(Prediction::from_expectation(state.expectation_z(survivor)?).p1)
}

/// Mean cross-entropy of `samples` under `params`.
pub fn mean_loss<T: Real>(
    arch: &Architecture,
    params: &[T],
    samples: &[&LabeledSample<T>],
    clamp: T,
) -> Result<T, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyInput);
    }
    let mut p1 = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    for s in samples {
        p1.push(p1_of(arch, params, s.features.as_slice())?);
        labels.push(s.label);
    }
    let total = cross_entropy(&p1, &labels, clamp)?;
    Ok(total / T::from_usize(samples.len()).expect("batch size fits the scalar"))
}

pub fn evaluate<T: Real>(
    arch: &Architecture,
    params: &ParameterVector<T>,
    samples: &[LabeledSample<T>],
    clamp: f64,
) -> Result<Evaluation, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyInput);
    }
    let mut p1 = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    for s in samples {
        p1.push(p1_of(arch, params.as_slice(), s.features.as_slice())?);
        labels.push(s.label);
    }
    let preds: Vec<u8> = p1.iter().map(|&p| predict(p)).collect();
    let loss = cross_entropy(&p1, &labels, T::lit(clamp))?.to_f64_lossy() / samples.len() as f64;
    Ok(Evaluation {
        accuracy: accuracy(&preds, &labels)?,
        f1: f1_score(&preds, &labels, 1)?,
        mean_loss: loss,
    })
}

fn check_dataset<T: Real>(arch: &Architecture, samples: &[LabeledSample<T>]) -> Result<(), TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyInput);
    }
    for (index, s) in samples.iter().enumerate() {
        if s.features.len() != arch.feature_count() {
            return Err(TrainError::Dimension {
                index,
                expected: arch.feature_count(),
                got: s.features.len(),
            });
        }
        if s.label > 1 {
            return Err(TrainError::InvalidLabel(s.label));
        }
    }
    Ok(())
}

/// Trains with mini-batch SPSB descent and records metrics after every epoch.
pub fn train_model<T: Real>(
    arch: &Architecture,
    train: &[LabeledSample<T>],
    test: &[LabeledSample<T>],
    config: &TrainConfig,
) -> Result<TrainOutcome<T>, TrainError> {
    train_model_with(arch, train, test, config, |_| {})
}

/// As [`train_model`], calling `on_epoch` as soon as each epoch's metrics are known.
pub fn train_model_with<T: Real>(
    arch: &Architecture,
    train: &[LabeledSample<T>],
    test: &[LabeledSample<T>],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome<T>, TrainError> {
    config.validate()?;
    check_dataset(arch, train)?;
    check_dataset(arch, test)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params: ParameterVector<T> = init_params(arch, config.init_mode, &mut rng);
    let lr = T::lit(config.learning_rate);
    let eps = T::lit(config.spsb_epsilon);
    let clamp = T::lit(config.prob_clamp);

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let samples: Vec<&LabeledSample<T>> = batch.iter().map(|&i| &train[i]).collect();
            let grad = spsb_gradient(
                |theta: &[T]| mean_loss(arch, theta, &samples, clamp),
                params.as_slice(),
                eps,
                &mut rng,
            )?;
            for (p, g) in params.as_mut_slice().iter_mut().zip(grad) {
                *p = *p - lr * g;
            }
        }

        let on_train = evaluate(arch, &params, train, config.prob_clamp)?;
        let on_test = evaluate(arch, &params, test, config.prob_clamp)?;
        let metrics = EpochMetrics {
            epoch,
            train_accuracy: on_train.accuracy,
            test_accuracy: on_test.accuracy,
            train_f1: on_train.f1,
            test_f1: on_test.f1,
            train_loss: on_train.mean_loss,
        };
        on_epoch(&metrics);
        history.push(metrics);
    }
    Ok(TrainOutcome { history, params })
}

/// Single-sample cross-entropy as a function of the parameters.
pub fn sample_loss<'a, T: Real>(
    arch: &'a Architecture,
    sample: &'a LabeledSample<T>,
    clamp: T,
) -> impl Fn(&[T]) -> Result<T, TrainError> + 'a {
    move |theta: &[T]| {
        let p1 = p1_of(arch, theta, sample.features.as_slice())?;
        cross_entropy(&[p1], &[sample.label], clamp)
    }
}

/// Step used by the variance probe: `eps^(1/3)` balances truncation and
/// rounding error of a central difference.
fn probe_step<T: Real>() -> T {
    T::epsilon().cbrt()
}

/// Per-parameter variance of the finite-difference gradient of a single-sample
/// loss over `num_samples` random draws of parameters (uniform on `[0, 2pi)`),
/// features (uniform on `[0, pi/2]`) and label.
pub fn gradient_variance_probe<T: Real, R: Rng + ?Sized>(
    arch: &Architecture,
    num_samples: usize,
    rng: &mut R,
) -> Result<Vec<T>, TrainError> {
    let clamp = T::lit(1e-10);
    gradient_variance_with(arch.param_count(), num_samples, rng, |rng| {
        let params: ParameterVector<T> = init_params(arch, InitMode::RandomUniform, rng);
        let features: Vec<T> = (0..arch.feature_count())
            .map(|_| T::lit(rng.gen_range(0.0..=std::f64::consts::FRAC_PI_2)))
            .collect();
        let sample = LabeledSample { features: FeatureVector::new(features)?, label: rng.gen_range(0..=1) };
        finite_diff_gradient(sample_loss(arch, &sample, clamp), params.as_slice(), probe_step())
    })
}

/// Variance of `draw_gradient` outputs across `num_samples` calls.
pub fn gradient_variance_with<T, R, F>(
    num_params: usize,
    num_samples: usize,
    rng: &mut R,
    mut draw_gradient: F,
) -> Result<Vec<T>, TrainError>
where
    T: Real,
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Result<Vec<T>, TrainError>,
{
    if num_samples == 0 {
        return Err(TrainError::EmptyInput);
    }
    let grads = (0..num_samples).map(|_| draw_gradient(rng)).collect::<Result<Vec<_>, _>>()?;
    if let Some(g) = grads.iter().find(|g| g.len() != num_params) {
        return Err(TrainError::LengthMismatch { left: g.len(), right: num_params });
    }
    Ok(coordinate_variance(&grads))
}
