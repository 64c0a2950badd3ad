//! Phase-free qudit Pauli labels over Z_d.
//!
//! A label `(x, z)` stands for `X^x Z^z` on each site, with the clock and
//! shift matrices obeying `Z X = w X Z`, `w = exp(2 pi i / d)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u32),
    #[error("x and z exponent vectors differ in length ({0} vs {1})")]
    RaggedExponents(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliLabel {
    d: u32,
    x: Vec<u32>,
    z: Vec<u32>,
}

impl PauliLabel {
    pub fn new(d: u32, x: Vec<u32>, z: Vec<u32>) -> Result<Self, PauliError> {
        if d < 2 {
            return Err(PauliError::BadModulus(d));
        }
        if x.len() != z.len() {
            return Err(PauliError::RaggedExponents(x.len(), z.len()));
        }
        let x = x.into_iter().map(|v| v % d).collect();
        let z = z.into_iter().map(|v| v % d).collect();
        Ok(Self { d, x, z })
    }

    pub fn identity(d: u32, k: usize) -> Self {
        Self { d, x: vec![0; k], z: vec![0; k] }
    }

    /// Single-site label.
    pub fn site(d: u32, x: u32, z: u32) -> Self {
        Self { d, x: vec![x % d], z: vec![z % d] }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_exps(&self) -> &[u32] {
        &self.x
    }

    pub fn z_exps(&self) -> &[u32] {
        &self.z
    }

    /// Restriction to site `i`.
    pub fn at(&self, i: usize) -> PauliLabel {
        PauliLabel::site(self.d, self.x[i], self.z[i])
    }

    /// Restriction to a contiguous range of sites.
    pub fn slice(&self, range: std::ops::Range<usize>) -> PauliLabel {
        PauliLabel { d: self.d, x: self.x[range.clone()].to_vec(), z: self.z[range].to_vec() }
    }

    /// Label of the product, ignoring the global phase.
    pub fn mul(&self, other: &PauliLabel) -> Result<PauliLabel, PauliError> {
        self.check(other)?;
        let d = self.d;
        let x = self.x.iter().zip(&other.x).map(|(a, b)| (a + b) % d).collect();
        let z = self.z.iter().zip(&other.z).map(|(a, b)| (a + b) % d).collect();
        Ok(PauliLabel { d, x, z })
    }

    pub fn concat(&self, other: &PauliLabel) -> Result<PauliLabel, PauliError> {
        if self.d != other.d {
            return Err(PauliError::ModulusMismatch(self.d, other.d));
        }
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        Ok(PauliLabel { d: self.d, x, z })
    }

    fn check(&self, other: &PauliLabel) -> Result<(), PauliError> {
        if self.d != other.d {
            return Err(PauliError::ModulusMismatch(self.d, other.d));
        }
        if self.len() != other.len() {
            return Err(PauliError::LengthMismatch(self.len(), other.len()));
        }
        Ok(())
    }
}

/// Exponent of the commutator phase at a single site:
/// `[X^a Z^b, X^c Z^e] = w^(b c - a e)`.
#[inline]
pub fn site_phase(d: u32, a: u32, b: u32, c: u32, e: u32) -> u32 {
    let d64 = d as u64;
    let bc = (b as u64 * c as u64) % d64;
    let ae = (a as u64 * e as u64) % d64;
    ((bc + d64 - ae) % d64) as u32
}

/// `cor_r(q)`: the exponent `c` with `sigma_q sigma_r sigma_q^-1 sigma_r^-1 = w^c I`.
pub fn commutation_phase(q: &PauliLabel, r: &PauliLabel) -> Result<u32, PauliError> {
    q.check(r)?;
    let d = q.d;
    let mut acc = 0u64;
    for i in 0..q.len() {
        acc += site_phase(d, q.x[i], q.z[i], r.x[i], r.z[i]) as u64;
    }
    Ok((acc % d as u64) as u32)
}

/// Checks that the per-site sum agrees with evaluating the label as a whole.
///
/// The whole-label value is computed from the symplectic inner product of
/// the full exponent vectors, which is a different code path from the
/// site-by-site accumulation.
pub fn cor_is_local_check(q: &PauliLabel, r: &PauliLabel) -> Result<bool, PauliError> {
    q.check(r)?;
    let d = q.d as u64;
    let local: u64 = (0..q.len())
        .map(|i| commutation_phase(&q.at(i), &r.at(i)).unwrap() as u64)
        .sum::<u64>()
        % d;
    let zx: u64 = q.z.iter().zip(&r.x).map(|(b, c)| *b as u64 * *c as u64).sum::<u64>() % d;
    let xz: u64 = q.x.iter().zip(&r.z).map(|(a, e)| *a as u64 * *e as u64).sum::<u64>() % d;
    let whole = (zx + d - xz) % d;
    Ok(local == whole && whole == commutation_phase(q, r)? as u64)
}
