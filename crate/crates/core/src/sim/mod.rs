//! Dense state-vector simulation.
//!
//! Qubit `k` of an `n`-qubit register lives at bit `n - 1 - k` of the basis
//! index, so qubit 0 is the most significant bit and `|b0 b1 ... b(n-1)>` is
//! basis index `sum b_k 2^(n-1-k)`.
//!
//! Rotations follow the half-angle convention `R_A(theta) = exp(-i theta A / 2)`.
//! All gates are applied in place by walking the pairs of basis indices that
//! differ only in the target bit.

mod oracle;

pub use oracle::reduced_expectation_oracle;

use num_complex::Complex;
use thiserror::Error;

use crate::Real;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("number of qubits {0} outside [1, {MAX_QUBITS}]")]
    Size(usize),
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("gate qubits must be distinct (got {0} twice)")]
    DuplicateQubit(usize),
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
    #[error("qubit {0} is both measured and traced out")]
    MeasuredQubitTraced(usize),
}

/// Rotation axis of a (controlled) single-qubit rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One gate of the supported set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<T> {
    Rx { qubit: usize, angle: T },
    Ry { qubit: usize, angle: T },
    Rz { qubit: usize, angle: T },
    Cnot { control: usize, target: usize },
    /// Rotation of `target` applied only on the branch where `control` reads `control_value`.
    ControlledRot { control: usize, target: usize, axis: Axis, angle: T, control_value: bool },
}

impl<T: Real> Gate<T> {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } | Gate::ControlledRot { control, target, .. } => {
                vec![control, target]
            }
        }
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Self {
        match *self {
            Gate::Rx { qubit, angle } => Gate::Rx { qubit, angle: -angle },
            Gate::Ry { qubit, angle } => Gate::Ry { qubit, angle: -angle },
            Gate::Rz { qubit, angle } => Gate::Rz { qubit, angle: -angle },
            g @ Gate::Cnot { .. } => g,
            Gate::ControlledRot { control, target, axis, angle, control_value } => {
                Gate::ControlledRot { control, target, axis, angle: -angle, control_value }
            }
        }
    }
}

/// 2x2 complex matrix, row-major.
type Mat2<T> = [[Complex<T>; 2]; 2];

fn rotation<T: Real>(axis: Axis, angle: T) -> Mat2<T> {
    let half = angle / T::lit(2.0);
    let (s, c) = half.sin_cos();
    let zero = T::zero();
    match axis {
        Axis::X => [
            [Complex::new(c, zero), Complex::new(zero, -s)],
            [Complex::new(zero, -s), Complex::new(c, zero)],
        ],
        Axis::Y => [
            [Complex::new(c, zero), Complex::new(-s, zero)],
            [Complex::new(s, zero), Complex::new(c, zero)],
        ],
        Axis::Z => [
            [Complex::new(c, -s), Complex::new(zero, zero)],
            [Complex::new(zero, zero), Complex::new(c, s)],
        ],
    }
}

/// Pure state of `num_qubits` qubits as `2^num_qubits` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    num_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn new_zero(num_qubits: usize) -> Result<Self, SimError> {
        if !(1..=MAX_QUBITS).contains(&num_qubits) {
            return Err(SimError::Size(num_qubits));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << num_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Ok(Self { num_qubits, amps })
    }

    /// Wraps an existing amplitude vector. The caller is responsible for normalisation.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self, SimError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::BadLength(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(SimError::Size(num_qubits));
        }
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    /// Sum of squared amplitude moduli.
    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Largest element-wise amplitude distance to `other`.
    pub fn max_distance(&self, other: &Self) -> T {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }

    /// Bit mask of `qubit` within a basis index.
    #[inline]
    pub fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), SimError> {
        if qubit >= self.num_qubits {
            Err(SimError::QubitOutOfRange { qubit, num_qubits: self.num_qubits })
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), SimError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(SimError::DuplicateQubit(a));
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &Gate<T>) -> Result<(), SimError> {
        match *gate {
            Gate::Rx { qubit, angle } => self.apply_rx(qubit, angle),
            Gate::Ry { qubit, angle } => self.apply_ry(qubit, angle),
            Gate::Rz { qubit, angle } => self.apply_rz(qubit, angle),
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            Gate::ControlledRot { control, target, axis, angle, control_value } => {
                self.apply_controlled_rot(control, target, axis, angle, control_value)
            }
        }
    }

    pub fn apply_rx(&mut self, qubit: usize, angle: T) -> Result<(), SimError> {
        self.check_qubit(qubit)?;
        self.apply_matrix(self.mask(qubit), None, &rotation(Axis::X, angle));
        Ok(())
    }

    pub fn apply_ry(&mut self, qubit: usize, angle: T) -> Result<(), SimError> {
        self.check_qubit(qubit)?;
        let (s, c) = (angle / T::lit(2.0)).sin_cos();
        let mask = self.mask(qubit);
        // real rotation, no need for the full complex 2x2 product
        for_each_pair(self.amps.len(), mask, None, |i, j| {
            let (a, b) = (self.amps[i], self.amps[j]);
            self.amps[i] = a * c - b * s;
            self.amps[j] = a * s + b * c;
        });
        Ok(())
    }

    pub fn apply_rz(&mut self, qubit: usize, angle: T) -> Result<(), SimError> {
        self.check_qubit(qubit)?;
        self.apply_matrix(self.mask(qubit), None, &rotation(Axis::Z, angle));
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check_pair(control, target)?;
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        for_each_pair(self.amps.len(), tmask, Some((cmask, true)), |i, j| self.amps.swap(i, j));
        Ok(())
    }

    /// Rotates `target` about `axis` on the subspace where `control` equals `control_value`.
    pub fn apply_controlled_rot(
        &mut self,
        control: usize,
        target: usize,
        axis: Axis,
        angle: T,
        control_value: bool,
    ) -> Result<(), SimError> {
        self.check_pair(control, target)?;
        let m = rotation(axis, angle);
        self.apply_matrix(self.mask(target), Some((self.mask(control), control_value)), &m);
        Ok(())
    }

    fn apply_matrix(&mut self, tmask: usize, control: Option<(usize, bool)>, m: &Mat2<T>) {
        let amps = &mut self.amps;
        for_each_pair(amps.len(), tmask, control, |i, j| {
            let (a, b) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        });
    }

    /// `<psi| Z_qubit |psi>`.
    pub fn expectation_z(&self, qubit: usize) -> Result<T, SimError> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        let z = self.amps.iter().enumerate().fold(T::zero(), |acc, (i, a)| {
            if i & mask == 0 {
                acc + a.norm_sqr()
            } else {
                acc - a.norm_sqr()
            }
        });
        Ok(z)
    }
}

/// Calls `f(i, j)` for every index pair with `i` having the target bit clear,
/// `j = i | tmask`, and (if given) the control bit equal to the control value.
#[inline]
fn for_each_pair(
    len: usize,
    tmask: usize,
    control: Option<(usize, bool)>,
    mut f: impl FnMut(usize, usize),
) {
    let mut block = 0;
    while block < len {
        for i in block..block + tmask {
            if let Some((cmask, value)) = control {
                if (i & cmask != 0) != value {
                    continue;
                }
            }
            f(i, i | tmask);
        }
        block += tmask << 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn assert_amps(state: &StateVector<f64>, expected: &[C]) {
        assert_eq!(state.amplitudes().len(), expected.len());
        for (i, (a, e)) in state.amplitudes().iter().zip(expected).enumerate() {
            assert!((a - e).norm() < 1e-12, "amp {i}: {a} vs {e}");
        }
    }

    fn plus() -> StateVector<f64> {
        StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    #[test]
    fn zero_state() {
        assert_amps(&StateVector::new_zero(1).unwrap(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = StateVector::<f64>::new_zero(2).unwrap();
        assert_amps(&s, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(StateVector::<f64>::new_zero(17), Err(SimError::Size(17)));
        assert_eq!(StateVector::<f64>::new_zero(0), Err(SimError::Size(0)));
        assert_eq!(StateVector::<f64>::new_zero(16).unwrap().amplitudes().len(), 65536);
    }

    #[test]
    fn ry_examples() {
        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_ry(0, PI).unwrap();
        assert_amps(&s, &[c(0.0, 0.0), c(1.0, 0.0)]);

        let mut s = plus();
        s.apply_ry(0, 0.0).unwrap();
        assert_amps(&s, plus().amplitudes());

        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_ry(0, PI / 2.0).unwrap();
        assert_amps(&s, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);

        assert!(matches!(s.apply_ry(1, 0.3), Err(SimError::QubitOutOfRange { .. })));
    }

    #[test]
    fn rz_examples() {
        let theta = 0.7;
        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_rz(0, theta).unwrap();
        assert_amps(&s, &[C::from_polar(1.0, -theta / 2.0), c(0.0, 0.0)]);

        let mut s = plus();
        s.apply_rz(0, 0.0).unwrap();
        assert_amps(&s, plus().amplitudes());

        let mut s = plus();
        s.apply_rz(0, 2.0 * PI).unwrap();
        assert_amps(&s, &[c(-FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]);
    }

    #[test]
    fn rx_examples() {
        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_rx(0, PI).unwrap();
        assert_amps(&s, &[c(0.0, 0.0), c(0.0, -1.0)]);

        let mut s = plus();
        s.apply_rx(0, 0.0).unwrap();
        assert_amps(&s, plus().amplitudes());

        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_rx(0, PI / 2.0).unwrap();
        assert_amps(&s, &[c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)]);
    }

    fn basis(n: usize, index: usize) -> StateVector<f64> {
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[index] = c(1.0, 0.0);
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn cnot_examples() {
        // |10> is index 2 with qubit 0 as the high bit
        let mut s = basis(2, 0b10);
        s.apply_cnot(0, 1).unwrap();
        assert_amps(&s, basis(2, 0b11).amplitudes());

        let mut s = basis(2, 0b00);
        s.apply_cnot(0, 1).unwrap();
        assert_amps(&s, basis(2, 0b00).amplitudes());

        let mut s = basis(3, 0b110);
        s.apply_ry(2, 0.4).unwrap();
        let before = s.clone();
        s.apply_cnot(1, 2).unwrap();
        s.apply_cnot(1, 2).unwrap();
        assert!(s.max_distance(&before) < 1e-15);

        assert_eq!(s.apply_cnot(1, 1), Err(SimError::DuplicateQubit(1)));
    }

    #[test]
    fn controlled_rot_examples() {
        let mut s = basis(2, 0b00);
        s.apply_controlled_rot(0, 1, Axis::X, PI, false).unwrap();
        assert_amps(&s, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let mut s = basis(2, 0b00);
        s.apply_controlled_rot(0, 1, Axis::Z, 1.1, true).unwrap();
        assert_amps(&s, basis(2, 0).amplitudes());

        let theta: f64 = 0.9;
        let mut s = basis(2, 0b10);
        s.apply_controlled_rot(0, 1, Axis::Y, theta, true).unwrap();
        let (sn, cs) = (theta / 2.0).sin_cos();
        assert_amps(&s, &[c(0.0, 0.0), c(0.0, 0.0), c(cs, 0.0), c(sn, 0.0)]);

        assert_eq!(
            s.apply_controlled_rot(1, 1, Axis::X, 0.1, true),
            Err(SimError::DuplicateQubit(1))
        );
    }

    #[test]
    fn expectation_examples() {
        let s = StateVector::<f64>::new_zero(1).unwrap();
        assert_eq!(s.expectation_z(0).unwrap(), 1.0);
        let s = basis(1, 1);
        assert_eq!(s.expectation_z(0).unwrap(), -1.0);
        assert!(plus().expectation_z(0).unwrap().abs() < 1e-15);
        // qubit ordering: qubit 1 of |01> is set, qubit 0 is not
        let s = basis(2, 0b01);
        assert_eq!(s.expectation_z(0).unwrap(), 1.0);
        assert_eq!(s.expectation_z(1).unwrap(), -1.0);
        assert!(s.expectation_z(2).is_err());
    }

    #[test]
    fn single_precision_agrees() {
        let mut a = StateVector::<f32>::new_zero(3).unwrap();
        let mut b = StateVector::<f64>::new_zero(3).unwrap();
        for (q, angle) in [(0usize, 0.3), (1, 1.2), (2, 2.5)] {
            a.apply_ry(q, angle as f32).unwrap();
            b.apply_ry(q, angle).unwrap();
        }
        a.apply_cnot(0, 2).unwrap();
        b.apply_cnot(0, 2).unwrap();
        a.apply_controlled_rot(1, 0, Axis::X, 0.8f32, false).unwrap();
        b.apply_controlled_rot(1, 0, Axis::X, 0.8, false).unwrap();
        for q in 0..3 {
            let za = a.expectation_z(q).unwrap() as f64;
            let zb = b.expectation_z(q).unwrap();
            assert!((za - zb).abs() < 1e-6);
        }
    }
}
