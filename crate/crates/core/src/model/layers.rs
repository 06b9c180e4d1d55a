use super::{check_feature_range, ModelError};
use crate::sim::{Axis, StateVector};
use crate::Real;

/// Angle encoding: `RY(2 x_i)` on `qubits[i]`, which maps `|0>` to
/// `cos(x_i)|0> + sin(x_i)|1>`.
pub fn encode<T: Real>(
    state: &mut StateVector<T>,
    qubits: &[usize],
    features: &[T],
) -> Result<(), ModelError> {
    if qubits.len() != features.len() {
        return Err(ModelError::FeatureCount { expected: qubits.len(), got: features.len() });
    }
    check_feature_range(features)?;
    let two = T::lit(2.0);
    for (&q, &x) in qubits.iter().zip(features) {
        state.apply_ry(q, two * x)?;
    }
    Ok(())
}

fn check_width(w: usize) -> Result<(), ModelError> {
    if w < 2 || !w.is_multiple_of(2) {
        Err(ModelError::Width(w))
    } else {
        Ok(())
    }
}

/// One convolution: gates on pairs `(a0,a1),(a2,a3),...` then `(a1,a2),(a3,a4),...`.
/// Each gate consumes its own `(theta1, theta2)`: `RY(theta1)` on the first
/// qubit, `RY(theta2)` on the second, then `CNOT(first -> second)`.
pub fn conv_layer<T: Real>(
    state: &mut StateVector<T>,
    active: &[usize],
    params: &[T],
) -> Result<(), ModelError> {
    let w = active.len();
    check_width(w)?;
    let expected = 2 * (w - 1);
    if params.len() != expected {
        return Err(ModelError::ParamCount { expected, got: params.len() });
    }
    let pairs = active.chunks_exact(2).chain(active[1..].chunks_exact(2));
    for (pair, theta) in pairs.zip(params.chunks_exact(2)) {
        let (first, second) = (pair[0], pair[1]);
        state.apply_ry(first, theta[0])?;
        state.apply_ry(second, theta[1])?;
        state.apply_cnot(first, second)?;
    }
    Ok(())
}

/// One pooling step. For each pair `(control, target)`: `RZ(theta1)` on the
/// target if the control is `|1>`, then `RX(theta2)` if it is `|0>`. Returns the
/// surviving targets; the controls are considered traced out.
pub fn pool_layer<T: Real>(
    state: &mut StateVector<T>,
    active: &[usize],
    params: &[T],
) -> Result<Vec<usize>, ModelError> {
    let w = active.len();
    check_width(w)?;
    if params.len() != w {
        return Err(ModelError::ParamCount { expected: w, got: params.len() });
    }
    let mut survivors = Vec::with_capacity(w / 2);
    for (pair, theta) in active.chunks_exact(2).zip(params.chunks_exact(2)) {
        let (control, target) = (pair[0], pair[1]);
        state.apply_controlled_rot(control, target, Axis::Z, theta[0], true)?;
        state.apply_controlled_rot(control, target, Axis::X, theta[1], false)?;
        survivors.push(target);
    }
    Ok(survivors)
}
