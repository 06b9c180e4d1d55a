//! Quantum convolutional neural networks on a dense state-vector simulator.
//!
//! The crate is split into four layers:
//!
//! - [`sim`]: an in-place state-vector simulator with exactly the gate set a QCNN
//!   needs (RX/RY/RZ, CNOT, value-controlled rotations) and Z-basis expectation values.
//! - [`model`]: QCNN architectures (standard and layered uploading), their parameter
//!   and feature layouts, and the forward pass.
//! - [`train`]: cross-entropy loss, simultaneous-perturbation gradient estimation,
//!   the epoch loop and classification metrics.
//! - [`data`]: IDX and raw-binary loaders, the grayscale byte-to-image transform,
//!   bilinear resizing, PCA, min-max scaling and deterministic splits.
//!
//! The numerical core is generic over the scalar type through [`Real`]; the
//! aliases at the crate root fix it to `f64`, which is what the experiment
//! runner uses.

pub mod data;
pub mod model;
pub mod sim;
pub mod train;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the simulator, the model and the trainer.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

pub use model::{Architecture, LayerSlices, Prediction};
pub use sim::{Axis, Gate, SimError, MAX_QUBITS};
pub use train::{EpochMetrics, InitMode, TrainConfig};

/// Double precision state vector.
pub type StateVector = sim::StateVector<f64>;
/// Single precision state vector.
pub type StateVector32 = sim::StateVector<f32>;
/// Double precision parameter vector.
pub type ParameterVector = model::ParameterVector<f64>;
/// Double precision feature vector.
pub type FeatureVector = model::FeatureVector<f64>;
/// Double precision labelled sample.
pub type LabeledSample = train::LabeledSample<f64>;
/// Double precision training result.
pub type TrainOutcome = train::TrainOutcome<f64>;
