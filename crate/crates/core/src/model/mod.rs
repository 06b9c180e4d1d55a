//! QCNN architectures and the forward pass.
//!
//! An `n`-layer network runs on `2^n` qubits. Every layer applies a
//! convolution (two-qubit gates on neighbouring active qubits, first on the
//! even pairs, then on the odd pairs) followed by a pooling step that halves
//! the active register. The last surviving qubit is measured in the Z basis.
//!
//! With layered uploading, a fresh block of features is encoded on the active
//! qubits before every convolution, so the network consumes `2(2^n - 1)`
//! features instead of `2^n` without adding qubits or parameters.

mod layers;

pub use layers::{conv_layer, encode, pool_layer};

use std::ops::Range;

use thiserror::Error;

use crate::sim::{SimError, StateVector, MAX_QUBITS};
use crate::Real;

/// Deepest network the simulator can hold (`2^4 = 16` qubits).
pub const MAX_LAYERS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("number of layers {0} outside [1, {MAX_LAYERS}]")]
    Layers(usize),
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("expected {expected} features, got {got}")]
    FeatureCount { expected: usize, got: usize },
    #[error("feature {index} = {value} outside [0, pi/2]")]
    FeatureRange { index: usize, value: f64 },
    #[error("active register of width {0} must be an even number of at least two qubits")]
    Width(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Parameter ranges of one layer inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSlices {
    pub conv: Range<usize>,
    pub pool: Range<usize>,
}

/// Shape of a QCNN: qubit bookkeeping plus parameter and feature layouts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    num_layers: usize,
    uploading: bool,
    active: Vec<Vec<usize>>,
    slices: Vec<LayerSlices>,
    feature_blocks: Vec<usize>,
}

impl Architecture {
    pub fn new(num_layers: usize, uploading: bool) -> Result<Self, ModelError> {
        if !(1..=MAX_LAYERS).contains(&num_layers) {
            return Err(ModelError::Layers(num_layers));
        }
        debug_assert!(1 << num_layers <= 1 << MAX_QUBITS);
        let total = 1usize << num_layers;

        let mut active = Vec::with_capacity(num_layers);
        let mut slices = Vec::with_capacity(num_layers);
        let mut current: Vec<usize> = (0..total).collect();
        let mut offset = 0;
        for _ in 0..num_layers {
            let w = current.len();
            let conv = offset..offset + 2 * (w - 1);
            let pool = conv.end..conv.end + w;
            offset = pool.end;
            slices.push(LayerSlices { conv, pool });
            let survivors = current.iter().skip(1).step_by(2).copied().collect();
            active.push(std::mem::replace(&mut current, survivors));
        }

        let feature_blocks = if uploading {
            active.iter().map(Vec::len).collect()
        } else {
            vec![total]
        };

        Ok(Self { num_layers, uploading, active, slices, feature_blocks })
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn uploading(&self) -> bool {
        self.uploading
    }

    pub fn total_qubits(&self) -> usize {
        1 << self.num_layers
    }

    /// Active qubit indices at the start of each layer.
    pub fn active_qubits_per_layer(&self) -> &[Vec<usize>] {
        &self.active
    }

    /// The single qubit left after the last pooling step.
    pub fn survivor(&self) -> usize {
        self.total_qubits() - 1
    }

    pub fn param_count(&self) -> usize {
        self.slices.last().map_or(0, |s| s.pool.end)
    }

    /// `6(2^n - 1) - 2n`.
    pub fn closed_form_param_count(num_layers: usize) -> usize {
        6 * ((1 << num_layers) - 1) - 2 * num_layers
    }

    pub fn feature_count(&self) -> usize {
        self.feature_blocks.iter().sum()
    }

    /// Feature block sizes in encoding order.
    pub fn feature_blocks(&self) -> &[usize] {
        &self.feature_blocks
    }

    /// Contiguous, disjoint per-layer parameter ranges covering `0..param_count`.
    pub fn param_slices(&self) -> &[LayerSlices] {
        &self.slices
    }

    fn block_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.feature_blocks
            .iter()
            .map(|&len| {
                let r = start..start + len;
                start += len;
                r
            })
            .collect()
    }
}

/// Flat rotation angles in layer-major order: for every layer the
/// convolution pairs `(theta1, theta2)` (even sublayer then odd sublayer),
/// then the pooling pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector<T>(Vec<T>);

impl<T: Real> ParameterVector<T> {
    pub fn new(arch: &Architecture, angles: Vec<T>) -> Result<Self, ModelError> {
        if angles.len() != arch.param_count() {
            return Err(ModelError::ParamCount { expected: arch.param_count(), got: angles.len() });
        }
        Ok(Self(angles))
    }

    pub fn zeros(arch: &Architecture) -> Self {
        Self(vec![T::zero(); arch.param_count()])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Encoding angles, each in `[0, pi/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T>(Vec<T>);

impl<T: Real> FeatureVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self, ModelError> {
        check_feature_range(&values)?;
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The leading `len` features.
    pub fn truncated(&self, len: usize) -> Self {
        Self(self.0[..len.min(self.0.len())].to_vec())
    }
}

pub(crate) fn check_feature_range<T: Real>(values: &[T]) -> Result<(), ModelError> {
    for (index, &v) in values.iter().enumerate() {
        if !(v >= T::zero() && v <= T::FRAC_PI_2()) {
            return Err(ModelError::FeatureRange { index, value: v.to_f64_lossy() });
        }
    }
    Ok(())
}

/// Readout of the measured qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    /// `<Z>` on the surviving qubit.
    pub expectation: T,
    pub p0: T,
    /// Probability of class 1, `(1 - <Z>) / 2`.
    pub p1: T,
}

impl<T: Real> Prediction<T> {
    pub fn from_expectation(z: T) -> Self {
        let half = T::lit(0.5);
        Self { expectation: z, p0: half * (T::one() + z), p1: half * (T::one() - z) }
    }
}

/// Runs the circuit and returns the final register together with the survivor
/// qubit. Pooled-away qubits are left in place, never touched again.
pub fn run_circuit<T: Real>(
    arch: &Architecture,
    params: &[T],
    features: &[T],
) -> Result<(StateVector<T>, usize), ModelError> {
    if params.len() != arch.param_count() {
        return Err(ModelError::ParamCount { expected: arch.param_count(), got: params.len() });
    }
    if features.len() != arch.feature_count() {
        return Err(ModelError::FeatureCount { expected: arch.feature_count(), got: features.len() });
    }
    let mut state = StateVector::new_zero(arch.total_qubits())?;
    let blocks = arch.block_ranges();
    for (layer, (active, slices)) in arch.active.iter().zip(&arch.slices).enumerate() {
        if layer == 0 || arch.uploading {
            encode(&mut state, active, &features[blocks[layer].clone()])?;
        }
        conv_layer(&mut state, active, &params[slices.conv.clone()])?;
        pool_layer(&mut state, active, &params[slices.pool.clone()])?;
    }
    Ok((state, arch.survivor()))
}

/// Class probabilities for one input.
pub fn forward<T: Real>(
    arch: &Architecture,
    params: &ParameterVector<T>,
    features: &FeatureVector<T>,
) -> Result<Prediction<T>, ModelError> {
    let (state, survivor) = run_circuit(arch, params.as_slice(), features.as_slice())?;
    Ok(Prediction::from_expectation(state.expectation_z(survivor)?))
}
