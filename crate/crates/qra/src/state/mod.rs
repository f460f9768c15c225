//! Dense quantum state engine.
//!
//! Two representations are supported: [`PureState`] holds a statevector of
//! 2^Nq complex amplitudes, [`MixedState`] holds the full 2^Nq x 2^Nq density
//! matrix and additionally supports CPTP reset channels. Qubit 0 is the
//! least-significant bit of the basis-state index. All rotations use the
//! half-angle convention R(theta) = exp(-i * theta * sigma / 2).

mod mixed;
mod pure;

pub use mixed::{mixed_state_kraus_check, reset_kraus_ops, MixedState};
pub use pure::PureState;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported qubit count; the density matrix at 15 qubits would no
/// longer fit comfortably in memory.
pub const MAX_QUBITS: usize = 14;

/// Rotation axis for single-qubit rotations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A rotation angle in radians, guaranteed finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateAngle(f64);

impl GateAngle {
    pub fn new(radians: f64) -> Result<Self> {
        if radians.is_finite() {
            Ok(Self(radians))
        } else {
            Err(Error::Config(format!("gate angle must be finite, got {radians}")))
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for GateAngle {
    type Error = Error;

    fn try_from(radians: f64) -> Result<Self> {
        Self::new(radians)
    }
}

/// Which representation a state should use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    Pure,
    Mixed,
}

/// A quantum state in either representation, with a uniform operation surface.
#[derive(Clone, Debug)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(MixedState),
}

impl QuantumState {
    /// Initialize |+>^(x)Nq in the requested representation.
    pub fn init_plus(num_qubits: usize, mode: SimMode) -> Result<Self> {
        Ok(match mode {
            SimMode::Pure => QuantumState::Pure(PureState::plus_state(num_qubits)?),
            SimMode::Mixed => QuantumState::Mixed(MixedState::plus_state(num_qubits)?),
        })
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.num_qubits(),
            QuantumState::Mixed(s) => s.num_qubits(),
        }
    }

    /// Apply R_axis(angle) = exp(-i * angle * sigma_axis / 2) on `qubit`.
    pub fn rotate(&mut self, qubit: usize, axis: Axis, angle: GateAngle) -> Result<()> {
        match self {
            QuantumState::Pure(s) => s.rotate(qubit, axis, angle),
            QuantumState::Mixed(s) => s.rotate(qubit, axis, angle),
        }
    }

    /// Apply exp(-i * angle * Z_i Z_j / 2) via the CNOT - RZ - CNOT decomposition.
    pub fn rzz(&mut self, qubit_i: usize, qubit_j: usize, angle: GateAngle) -> Result<()> {
        match self {
            QuantumState::Pure(s) => s.rzz(qubit_i, qubit_j, angle),
            QuantumState::Mixed(s) => s.rzz(qubit_i, qubit_j, angle),
        }
    }

    /// Apply the probabilistic reset channel with probability `p` on `qubit`.
    ///
    /// Only density matrices can represent the resulting mixed state; calling
    /// this on a pure state is a mode error.
    pub fn apply_reset_channel(&mut self, qubit: usize, p: f64) -> Result<()> {
        match self {
            QuantumState::Pure(_) => Err(Error::Mode { required: "mixed (density matrix)" }),
            QuantumState::Mixed(s) => s.apply_reset_channel(qubit, p),
        }
    }

    /// Exact expectation value <Z_qubit>.
    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        match self {
            QuantumState::Pure(s) => s.expect_z(qubit),
            QuantumState::Mixed(s) => s.expect_z(qubit),
        }
    }

    /// Exact expectation value <Z_i Z_j>.
    pub fn expect_zz(&self, qubit_i: usize, qubit_j: usize) -> Result<f64> {
        match self {
            QuantumState::Pure(s) => s.expect_zz(qubit_i, qubit_j),
            QuantumState::Mixed(s) => s.expect_zz(qubit_i, qubit_j),
        }
    }

    /// Probabilities of every computational basis state.
    pub fn basis_probabilities(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure(s) => s.basis_probabilities(),
            QuantumState::Mixed(s) => s.basis_probabilities(),
        }
    }
}

pub(crate) fn check_num_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Config(format!(
            "num_qubits must be in 1..={MAX_QUBITS}, got {num_qubits}"
        )));
    }
    Ok(())
}

pub(crate) fn check_qubit(index: usize, num_qubits: usize) -> Result<()> {
    if index >= num_qubits {
        return Err(Error::IndexOutOfRange { index, num_qubits });
    }
    Ok(())
}

pub(crate) fn check_pair(i: usize, j: usize, num_qubits: usize) -> Result<()> {
    check_qubit(i, num_qubits)?;
    check_qubit(j, num_qubits)?;
    if i == j {
        return Err(Error::DuplicateQubit(i));
    }
    Ok(())
}

/// 2x2 matrix of R_axis(theta) = exp(-i * theta * sigma_axis / 2).
pub(crate) fn rotation_matrix(axis: Axis, theta: f64) -> [[Complex64; 2]; 2] {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    match axis {
        Axis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Axis::Z => [
            [Complex64::from_polar(1.0, -theta / 2.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, theta / 2.0)],
        ],
    }
}

/// Sign of Z on `qubit` for basis index `k`: +1 for |0>, -1 for |1>.
#[inline]
pub(crate) fn z_sign(k: usize, qubit: usize) -> f64 {
    if (k >> qubit) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}
