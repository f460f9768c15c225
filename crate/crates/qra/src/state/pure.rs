//! Statevector representation.

use num_complex::Complex64;

use crate::error::Result;
use crate::state::{
    check_num_qubits, check_pair, check_qubit, rotation_matrix, z_sign, Axis, GateAngle,
};

/// A pure quantum state as a dense vector of 2^Nq complex amplitudes.
#[derive(Clone, Debug)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

impl PureState {
    /// |+>^(x)Nq: uniform amplitude 2^(-Nq/2) on every basis state.
    pub fn plus_state(num_qubits: usize) -> Result<Self> {
        check_num_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self { amplitudes: vec![amp; dim], num_qubits })
    }

    /// The computational basis state |index>.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_num_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, num_qubits })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn rotate(&mut self, qubit: usize, axis: Axis, angle: GateAngle) -> Result<()> {
        check_qubit(qubit, self.num_qubits)?;
        let u = rotation_matrix(axis, angle.radians());
        self.apply_one_qubit(qubit, &u);
        Ok(())
    }

    /// exp(-i * angle * Z_i Z_j / 2), decomposed as CNOT_ij RZ_j CNOT_ij.
    pub fn rzz(&mut self, qubit_i: usize, qubit_j: usize, angle: GateAngle) -> Result<()> {
        check_pair(qubit_i, qubit_j, self.num_qubits)?;
        self.cnot(qubit_i, qubit_j)?;
        self.rotate(qubit_j, Axis::Z, angle)?;
        self.cnot(qubit_i, qubit_j)?;
        Ok(())
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        check_pair(control, target, self.num_qubits)?;
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for k in 0..self.amplitudes.len() {
            // Visit each swapped pair once, from its target-bit-0 member.
            if k & cbit != 0 && k & tbit == 0 {
                self.amplitudes.swap(k, k | tbit);
            }
        }
        Ok(())
    }

    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.num_qubits)?;
        let mut sum = 0.0;
        for (k, a) in self.amplitudes.iter().enumerate() {
            sum += z_sign(k, qubit) * a.norm_sqr();
        }
        Ok(sum)
    }

    pub fn expect_zz(&self, qubit_i: usize, qubit_j: usize) -> Result<f64> {
        check_pair(qubit_i, qubit_j, self.num_qubits)?;
        let mut sum = 0.0;
        for (k, a) in self.amplitudes.iter().enumerate() {
            sum += z_sign(k, qubit_i) * z_sign(k, qubit_j) * a.norm_sqr();
        }
        Ok(sum)
    }

    pub fn basis_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn apply_one_qubit(&mut self, qubit: usize, u: &[[Complex64; 2]; 2]) {
        let step = 1usize << qubit;
        let dim = self.amplitudes.len();
        let mut base = 0;
        while base < dim {
            for offset in base..base + step {
                let j = offset;
                let k = offset | step;
                let a = self.amplitudes[j];
                let b = self.amplitudes[k];
                self.amplitudes[j] = u[0][0] * a + u[0][1] * b;
                self.amplitudes[k] = u[1][0] * a + u[1][1] * b;
            }
            base += 2 * step;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn angle(theta: f64) -> GateAngle {
        GateAngle::new(theta).unwrap()
    }

    #[test]
    fn plus_state_single_qubit() {
        let s = PureState::plus_state(1).unwrap();
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, FRAC_1_SQRT_2, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn plus_state_two_qubits() {
        let s = PureState::plus_state(2).unwrap();
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn rx_zero_is_identity() {
        let mut s = PureState::plus_state(2).unwrap();
        let before = s.amplitudes().to_vec();
        s.rotate(1, Axis::X, angle(0.0)).unwrap();
        for (a, b) in s.amplitudes().iter().zip(&before) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rx_pi_flips_z() {
        let mut s = PureState::basis_state(1, 0).unwrap();
        s.rotate(0, Axis::X, angle(PI)).unwrap();
        assert_abs_diff_eq!(s.expect_z(0).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn ry_half_pi_balances_z() {
        // Oracle: R_y(pi/2)|0> = (cos(pi/4), sin(pi/4)) by direct 2x2 matrix-vector product.
        let mut s = PureState::basis_state(1, 0).unwrap();
        s.rotate(0, Axis::Y, angle(PI / 2.0)).unwrap();
        assert_abs_diff_eq!(s.expect_z(0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[0].re, (PI / 4.0).cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, (PI / 4.0).sin(), epsilon = 1e-12);
    }

    #[test]
    fn rzz_zero_is_identity() {
        let mut s = PureState::plus_state(2).unwrap();
        let before = s.amplitudes().to_vec();
        s.rzz(0, 1, angle(0.0)).unwrap();
        for (a, b) in s.amplitudes().iter().zip(&before) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rzz_pi_on_00_keeps_zz() {
        let mut s = PureState::basis_state(2, 0).unwrap();
        s.rzz(0, 1, angle(PI)).unwrap();
        assert_abs_diff_eq!(s.expect_zz(0, 1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rzz_half_pi_on_plus_plus() {
        // Oracle: the dense 4x4 matrix exp(-i*theta*ZZ/2) applied to |++>.
        let theta = PI / 2.0;
        let mut s = PureState::plus_state(2).unwrap();
        s.rzz(0, 1, angle(theta)).unwrap();

        let mut oracle = [Complex64::new(0.5, 0.0); 4];
        for (k, v) in oracle.iter_mut().enumerate() {
            let parity = ((k & 1) ^ ((k >> 1) & 1)) as f64;
            let sign = 1.0 - 2.0 * parity; // ZZ eigenvalue
            *v *= Complex64::from_polar(1.0, -sign * theta / 2.0);
        }
        for (a, b) in s.amplitudes().iter().zip(&oracle) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(s.expect_zz(0, 1).unwrap(), 0.0, epsilon = 1e-12);

        // <X0> computed on the oracle vector: |++> starts at +1 and the
        // entangling phase pulls it to cos(theta) = 0.
        let mut x0 = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            x0 += oracle[k].conj() * oracle[k ^ 0b01];
        }
        assert_abs_diff_eq!(x0.re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x0.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn plus_state_has_zero_z_expectations() {
        let s = PureState::plus_state(3).unwrap();
        for q in 0..3 {
            assert_abs_diff_eq!(s.expect_z(q).unwrap(), 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.expect_zz(0, 2).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn index_errors() {
        let mut s = PureState::plus_state(2).unwrap();
        assert!(s.rotate(2, Axis::X, angle(1.0)).is_err());
        assert!(s.rzz(0, 0, angle(1.0)).is_err());
        assert!(s.expect_z(5).is_err());
    }
}
