//! Tensors for the worked examples.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::basis::{omega, pauli_x, pauli_y, pauli_z, shift};
use crate::error::{GlueError, Result};
use crate::linalg::{c, expm_herm, eye, gcd, CMat, ZERO};
use crate::mps::{normalize, MpsTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Example {
    DeformedGhz,
    DeformedCluster,
    DeformedTrivial,
    Aklt,
    NogoCombined,
    DipoleSpt,
}

impl Example {
    pub const ALL: [Example; 6] = [
        Example::DeformedGhz,
        Example::DeformedCluster,
        Example::DeformedTrivial,
        Example::Aklt,
        Example::NogoCombined,
        Example::DipoleSpt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Example::DeformedGhz => "deformed_ghz",
            Example::DeformedCluster => "deformed_cluster",
            Example::DeformedTrivial => "deformed_trivial",
            Example::Aklt => "aklt",
            Example::NogoCombined => "nogo_combined",
            Example::DipoleSpt => "dipole_spt",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = GlueError;
    fn from_str(s: &str) -> Result<Self> {
        Example::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| GlueError::UnknownExample(s.to_string()))
    }
}

fn norm_or_panic(a: MpsTensor) -> MpsTensor {
    normalize(&a).expect("example tensors have nonzero transfer spectrum")
}

/// e^{βX}/sqrt(cosh 2β) as a 2×2 matrix.
fn gx(beta: f64) -> CMat {
    let n = (2.0 * beta).cosh().sqrt();
    (eye(2) * c(beta.cosh(), 0.0) + pauli_x() * c(beta.sinh(), 0.0)) / c(n, 0.0)
}

/// Normalized e^{αX} with tanh α = e^{−2β}, written as (1 + τX)/sqrt(1 + τ²).
fn g_trivial(beta: f64) -> CMat {
    let tau = (-2.0 * beta).exp();
    (eye(2) + pauli_x() * c(tau, 0.0)) / c((1.0 + tau * tau).sqrt(), 0.0)
}

fn hadamard() -> CMat {
    let h = 1.0 / 2f64.sqrt();
    CMat::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

pub fn deformed_ghz(beta: f64) -> MpsTensor {
    let g = gx(beta);
    norm_or_panic(MpsTensor::from_fn(2, 2, |i, s, j| if i == j { g[(s, i)] } else { ZERO }).unwrap())
}

pub fn deformed_cluster(beta: f64) -> MpsTensor {
    let g = gx(beta);
    let h = hadamard();
    norm_or_panic(MpsTensor::from_fn(2, 2, |i, s, j| g[(s, i)] * h[(i, j)]).unwrap())
}

pub fn deformed_trivial(beta: f64) -> MpsTensor {
    let g = g_trivial(beta);
    norm_or_panic(MpsTensor::from_fn(2, 2, |i, s, j| if s == i { g[(i, j)] } else { ZERO }).unwrap())
}

/// A^α = t_α σ^α with σ = (𝟙, X, Y, Z) and t = (0, 1, 1, 1)/√3.
pub fn aklt() -> MpsTensor {
    let t = 1.0 / 3f64.sqrt();
    let sig = [eye(2) * ZERO, pauli_x() * c(t, 0.0), pauli_y() * c(t, 0.0), pauli_z() * c(t, 0.0)];
    norm_or_panic(MpsTensor::from_matrices(&sig).unwrap())
}

/// Deformed trivial tensor at β′ with e^{βX} on the physical leg.
pub fn nogo_combined(beta: f64, beta_prime: f64) -> MpsTensor {
    let triv = deformed_trivial(beta_prime);
    let p = expm_herm(&pauli_x(), beta);
    norm_or_panic(triv.apply_physical(&p).unwrap())
}

/// (H_η)_{gh} = ω^{η g (h − g)} / sqrt(N).
pub fn dipole_hadamard(n: usize, eta: usize) -> CMat {
    let s = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |g, h| omega(n, (eta * g) as i64 * (h as i64 - g as i64)) * s)
}

pub fn dipole_spt(n: usize, eta: usize, beta: f64) -> Result<MpsTensor> {
    if n < 2 {
        return Err(GlueError::InvalidArg(format!("N must be at least 2, got {n}")));
    }
    if gcd(n, eta) != 1 {
        return Err(GlueError::NotCoprime { n, eta });
    }
    let x = shift(n);
    let b = expm_herm(&(&x + x.adjoint()), beta);
    let h = dipole_hadamard(n, eta);
    Ok(norm_or_panic(MpsTensor::from_fn(n, n, |i, s, j| b[(s, i)] * h[(i, j)])?))
}

fn param(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    let v = *params.get(key).ok_or_else(|| GlueError::MissingParam(key.to_string()))?;
    if !v.is_finite() {
        return Err(GlueError::InvalidArg(format!("{key} must be finite")));
    }
    Ok(v)
}

fn int_param(params: &BTreeMap<String, f64>, key: &str) -> Result<usize> {
    let v = param(params, key)?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(GlueError::InvalidArg(format!("{key} must be a non-negative integer")));
    }
    Ok(v as usize)
}

/// Build a named example. Keys: beta, beta_prime, N, eta.
pub fn build_example(ex: Example, params: &BTreeMap<String, f64>) -> Result<MpsTensor> {
    match ex {
        Example::DeformedGhz => Ok(deformed_ghz(param(params, "beta")?)),
        Example::DeformedCluster => Ok(deformed_cluster(param(params, "beta")?)),
        Example::DeformedTrivial => Ok(deformed_trivial(param(params, "beta")?)),
        Example::Aklt => Ok(aklt()),
        Example::NogoCombined => Ok(nogo_combined(param(params, "beta")?, param(params, "beta_prime")?)),
        Example::DipoleSpt => {
            let n = int_param(params, "N")?;
            let eta = int_param(params, "eta")?;
            if n >= 2 && gcd(n, eta) != 1 {
                return Err(GlueError::NotCoprime { n, eta });
            }
            dipole_spt(n, eta, param(params, "beta")?)
        }
    }
}
