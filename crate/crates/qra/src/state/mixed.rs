//! Density-matrix representation with CPTP reset channels.
//!
//! Single-qubit operations act through a 4x4 superoperator on the 2x2
//! sub-blocks addressed by the target qubit's bit in the row and column
//! indices, so every gate and channel costs O(4^Nq) rather than a dense
//! matrix product.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{
    check_num_qubits, check_pair, check_qubit, rotation_matrix, z_sign, Axis, GateAngle,
    PureState,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A mixed quantum state as a dense row-major 2^Nq x 2^Nq density matrix.
#[derive(Clone, Debug)]
pub struct MixedState {
    rho: Vec<Complex64>,
    dim: usize,
    num_qubits: usize,
}

impl MixedState {
    /// The rank-1 projector onto |+>^(x)Nq: every entry equals 2^(-Nq).
    pub fn plus_state(num_qubits: usize) -> Result<Self> {
        check_num_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        let value = Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self { rho: vec![value; dim * dim], dim, num_qubits })
    }

    /// |psi><psi| for a pure state.
    pub fn from_pure(state: &PureState) -> Self {
        let dim = state.dim();
        let amps = state.amplitudes();
        let mut rho = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                rho.push(amps[i] * amps[j].conj());
            }
        }
        Self { rho, dim, num_qubits: state.num_qubits() }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.rho[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.rho[i * self.dim + i]).sum()
    }

    /// Largest elementwise deviation from Hermitian symmetry, max |rho - rho^dagger|.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let delta = (self.rho[i * self.dim + j] - self.rho[j * self.dim + i].conj()).norm();
                worst = worst.max(delta);
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part; intended for validation at
    /// small qubit counts, not for hot paths.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry(i, j));
        let sym = nalgebra::linalg::SymmetricEigen::new(m);
        sym.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn rotate(&mut self, qubit: usize, axis: Axis, angle: GateAngle) -> Result<()> {
        check_qubit(qubit, self.num_qubits)?;
        match axis {
            // Z is diagonal: rho_ij picks up a phase only when the target bit
            // differs between row and column.
            Axis::Z => self.apply_z_phase(qubit, angle.radians()),
            _ => {
                let u = rotation_matrix(axis, angle.radians());
                let m = unitary_superop(&u);
                self.apply_one_qubit_superop(qubit, &m);
            }
        }
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
        let d = self.dim;
        // Conjugation by a permutation: exchange rows, then columns.
        for r in 0..d {
            if r & cbit != 0 && r & tbit == 0 {
                let (a, b) = (r * d, (r | tbit) * d);
                for c in 0..d {
                    self.rho.swap(a + c, b + c);
                }
            }
        }
        for r in 0..d {
            let row = r * d;
            for c in 0..d {
                if c & cbit != 0 && c & tbit == 0 {
                    self.rho.swap(row + c, row + (c | tbit));
                }
            }
        }
        Ok(())
    }

    /// Apply the probabilistic reset channel as the Kraus sum
    /// rho <- sum_k K_k rho K_k^dagger with the three operators
    /// sqrt(1-p) I, sqrt(p)|0><0|, sqrt(p)|0><1| on the target qubit.
    pub fn apply_reset_channel(&mut self, qubit: usize, p: f64) -> Result<()> {
        check_qubit(qubit, self.num_qubits)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!(
                "reset probability must be in [0, 1], got {p}"
            )));
        }
        let m = kraus_superop(&reset_kraus_ops(p));
        self.apply_one_qubit_superop(qubit, &m);
        self.resymmetrize();
        Ok(())
    }

    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.num_qubits)?;
        let mut sum = 0.0;
        for k in 0..self.dim {
            sum += z_sign(k, qubit) * self.rho[k * self.dim + k].re;
        }
        Ok(sum)
    }

    pub fn expect_zz(&self, qubit_i: usize, qubit_j: usize) -> Result<f64> {
        check_pair(qubit_i, qubit_j, self.num_qubits)?;
        let mut sum = 0.0;
        for k in 0..self.dim {
            sum += z_sign(k, qubit_i) * z_sign(k, qubit_j) * self.rho[k * self.dim + k].re;
        }
        Ok(sum)
    }

    pub fn basis_probabilities(&self) -> Vec<f64> {
        (0..self.dim).map(|k| self.rho[k * self.dim + k].re).collect()
    }

    /// rho <- (rho + rho^dagger) / 2, bounding accumulated asymmetry.
    fn resymmetrize(&mut self) {
        let d = self.dim;
        for i in 0..d {
            let diag = i * d + i;
            self.rho[diag] = Complex64::new(self.rho[diag].re, 0.0);
            for j in i + 1..d {
                let upper = i * d + j;
                let lower = j * d + i;
                let avg = 0.5 * (self.rho[upper] + self.rho[lower].conj());
                self.rho[upper] = avg;
                self.rho[lower] = avg.conj();
            }
        }
    }

    fn apply_z_phase(&mut self, qubit: usize, theta: f64) {
        let bit = 1usize << qubit;
        let d = self.dim;
        // Phase factor indexed by (row bit, col bit): equal bits cancel.
        let plus = Complex64::from_polar(1.0, -theta);
        let minus = Complex64::from_polar(1.0, theta);
        for r in 0..d {
            let row = r * d;
            let rbit = r & bit != 0;
            for c in 0..d {
                let cbit = c & bit != 0;
                if rbit != cbit {
                    self.rho[row + c] *= if rbit { minus } else { plus };
                }
            }
        }
    }

    /// Transform every 2x2 sub-block addressed by `qubit` with a 4x4
    /// superoperator acting on (b00, b01, b10, b11).
    fn apply_one_qubit_superop(&mut self, qubit: usize, m: &[[Complex64; 4]; 4]) {
        let step = 1usize << qubit;
        let d = self.dim;
        let rho = &mut self.rho;
        let mut rblock = 0;
        while rblock < d {
            for r in rblock..rblock + step {
                let row0 = r * d;
                let row1 = (r | step) * d;
                let mut cblock = 0;
                while cblock < d {
                    for c in cblock..cblock + step {
                        let i00 = row0 + c;
                        let i01 = row0 + (c | step);
                        let i10 = row1 + c;
                        let i11 = row1 + (c | step);
                        let v0 = rho[i00];
                        let v1 = rho[i01];
                        let v2 = rho[i10];
                        let v3 = rho[i11];
                        rho[i00] = m[0][0] * v0 + m[0][1] * v1 + m[0][2] * v2 + m[0][3] * v3;
                        rho[i01] = m[1][0] * v0 + m[1][1] * v1 + m[1][2] * v2 + m[1][3] * v3;
                        rho[i10] = m[2][0] * v0 + m[2][1] * v1 + m[2][2] * v2 + m[2][3] * v3;
                        rho[i11] = m[3][0] * v0 + m[3][1] * v1 + m[3][2] * v2 + m[3][3] * v3;
                    }
                    cblock += 2 * step;
                }
            }
            rblock += 2 * step;
        }
    }
}

/// Numerical completeness defect of the reset channel's Kraus set at `p`:
/// max |sum_k K_k^dagger K_k - I|.
pub fn mixed_state_kraus_check(p: f64) -> f64 {
    let mut sum = [[ZERO; 2]; 2];
    for k in &reset_kraus_ops(p) {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    sum[a][b] += k[c][a].conj() * k[c][b];
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for (a, row) in sum.iter().enumerate() {
        for (b, value) in row.iter().enumerate() {
            let expected = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((value - Complex64::new(expected, 0.0)).norm());
        }
    }
    worst
}

/// The three Kraus operators of the reset channel with probability `p`.
pub fn reset_kraus_ops(p: f64) -> [[[Complex64; 2]; 2]; 3] {
    let keep = Complex64::new((1.0 - p).sqrt(), 0.0);
    let reset = Complex64::new(p.sqrt(), 0.0);
    [
        [[keep, ZERO], [ZERO, keep]],
        [[reset, ZERO], [ZERO, ZERO]],
        [[ZERO, reset], [ZERO, ZERO]],
    ]
}

/// Superoperator of a unitary conjugation, U (x) conj(U) in block coordinates.
fn unitary_superop(u: &[[Complex64; 2]; 2]) -> [[Complex64; 4]; 4] {
    kraus_superop(std::slice::from_ref(u))
}

/// Superoperator of a Kraus sum, sum_k K_k (x) conj(K_k): row (a, b) and
/// column (c, e) hold K[a][c] * conj(K[b][e]).
fn kraus_superop(kraus: &[[[Complex64; 2]; 2]]) -> [[Complex64; 4]; 4] {
    let mut m = [[ZERO; 4]; 4];
    for k in kraus {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for e in 0..2 {
                        m[a * 2 + b][c * 2 + e] += k[a][c] * k[b][e].conj();
                    }
                }
            }
        }
    }
    m
}
