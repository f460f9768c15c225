//! Key generation and the element-wise tanh encode/decode maps.
//!
//! A key of length Nc + Nq + 1 splits into Nc per-position factors and an
//! offset tail of length n_e = Nq + 1; position i of the encoded output is
//! tanh(k_i * c_i + k_{Nc + (i mod n_e)}). The decode map has the identical
//! form with the secret key and the incoming ciphertext.

use rand::Rng;

use crate::error::{Error, Result};

/// A real key vector with entries in [-1, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Key(Vec<f64>);

impl Key {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || v.abs() > 1.0) {
            return Err(Error::Data("key entries must be finite and in [-1, 1]".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A plaintext vector with entries in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Plaintext(Vec<f64>);

impl Plaintext {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data("plaintext must have length >= 1".into()));
        }
        if values.iter().any(|v| !v.is_finite() || v.abs() > 1.0) {
            return Err(Error::Data("plaintext entries must be finite and in [-1, 1]".into()));
        }
        Ok(Self(values))
    }

    /// Entries drawn i.i.d. uniform on [-1, 1).
    pub fn random<R: Rng>(length: usize, rng: &mut R) -> Result<Self> {
        Self::from_values((0..length).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A ciphertext vector; same dimension as the plaintext it encodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Ciphertext(Vec<f64>);

impl Ciphertext {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Draw a key of length Nc + Nq + 1 with i.i.d. Uniform[-1, 1) entries.
pub fn generate_key<R: Rng>(length_nc: usize, num_qubits: usize, rng: &mut R) -> Key {
    let len = length_nc + num_qubits + 1;
    Key((0..len).map(|_| rng.random_range(-1.0..1.0)).collect())
}

/// Element-wise encode map F: output_i = tanh(k_i * c_i + k_{Nc + (i mod n_e)}).
pub fn encode_f(key: &Key, c: &Plaintext) -> Result<Vec<f64>> {
    tanh_map(key.values(), c.values())
}

/// Element-wise decode map G; identical form with the secret key and the
/// incoming vector.
pub fn decode_g(secret: &Key, e: &[f64]) -> Result<Vec<f64>> {
    tanh_map(secret.values(), e)
}

fn tanh_map(key: &[f64], input: &[f64]) -> Result<Vec<f64>> {
    let nc = input.len();
    if key.len() <= nc {
        return Err(Error::Data(format!(
            "key of length {} cannot encode {nc} positions (needs an offset tail)",
            key.len()
        )));
    }
    let n_e = key.len() - nc;
    Ok(input
        .iter()
        .enumerate()
        .map(|(i, &x)| (key[i] * x + key[nc + (i % n_e)]).tanh())
        .collect())
}
