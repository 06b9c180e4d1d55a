use num_complex::Complex;

use super::{SimError, StateVector};
use crate::Real;

/// `Tr(rho_reduced Z_qubit)` where `rho_reduced` is built by an explicit partial
/// trace of `|psi><psi|` over `traced`.
///
/// This materialises the reduced density matrix and is meant as a verification
/// oracle for small registers; the simulator itself never needs it.
pub fn reduced_expectation_oracle<T: Real>(
    state: &StateVector<T>,
    qubit: usize,
    traced: &[usize],
) -> Result<T, SimError> {
    let n = state.num_qubits();
    for &q in traced.iter().chain(std::iter::once(&qubit)) {
        if q >= n {
            return Err(SimError::QubitOutOfRange { qubit: q, num_qubits: n });
        }
    }
    if traced.contains(&qubit) {
        return Err(SimError::MeasuredQubitTraced(qubit));
    }
    let mut traced: Vec<usize> = traced.to_vec();
    traced.sort_unstable();
    traced.dedup();
    let kept: Vec<usize> = (0..n).filter(|q| !traced.contains(q)).collect();

    // basis index of the full register from (kept bits, traced bits), both
    // read most-significant-first in qubit order
    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut index = 0;
        for (pos, &q) in kept.iter().enumerate() {
            if kept_bits >> (kept.len() - 1 - pos) & 1 == 1 {
                index |= state.mask(q);
            }
        }
        for (pos, &q) in traced.iter().enumerate() {
            if traced_bits >> (traced.len() - 1 - pos) & 1 == 1 {
                index |= state.mask(q);
            }
        }
        index
    };

    let kept_dim = 1usize << kept.len();
    let traced_dim = 1usize << traced.len();
    let amps = state.amplitudes();
    let zero = Complex::new(T::zero(), T::zero());
    let mut rho = vec![zero; kept_dim * kept_dim];
    for a in 0..kept_dim {
        for b in 0..kept_dim {
            let mut acc = zero;
            for t in 0..traced_dim {
                acc = acc + amps[compose(a, t)] * amps[compose(b, t)].conj();
            }
            rho[a * kept_dim + b] = acc;
        }
    }

    let pos = kept.iter().position(|&q| q == qubit).expect("measured qubit is kept");
    let bit = kept.len() - 1 - pos;
    let mut value = T::zero();
    for a in 0..kept_dim {
        let diag = rho[a * kept_dim + a].re;
        if a >> bit & 1 == 0 {
            value = value + diag;
        } else {
            value = value - diag;
        }
    }
    Ok(value)
}
