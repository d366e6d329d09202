//! Unitary error bases and their commutation phases.

use crate::error::{GlueError, Result};
use crate::linalg::{
    c, eye, frob, gauge_fix, gcd, hs, proportional, unitarity_residual, CMat, C64, ONE, ZERO,
};

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

/// 𝒳|g⟩ = |g+1 mod N⟩.
pub fn shift(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == (j + 1) % n { ONE } else { ZERO })
}

/// 𝒵|g⟩ = ω^g |g⟩.
pub fn clock(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j { omega(n, i as i64) } else { ZERO })
}

/// ω^k with ω = e^{2πi/N}.
pub fn omega(n: usize, k: i64) -> C64 {
    let k = k.rem_euclid(n as i64) as f64;
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorBasis {
    pub chi: usize,
    pub ops: Vec<CMat>,
    pub labels: Vec<String>,
}

impl ErrorBasis {
    /// Build a basis from χ² operators. Each operator is rephased so that its
    /// first largest-magnitude entry is real positive.
    pub fn new(chi: usize, ops: Vec<CMat>, labels: Vec<String>) -> Result<Self> {
        if chi == 0 {
            return Err(GlueError::InvalidArg("chi must be positive".into()));
        }
        if ops.len() != chi * chi {
            return Err(GlueError::DimensionMismatch { expected: chi * chi, got: ops.len() });
        }
        if labels.len() != ops.len() {
            return Err(GlueError::DimensionMismatch { expected: ops.len(), got: labels.len() });
        }
        for op in &ops {
            if op.shape() != (chi, chi) {
                return Err(GlueError::InvalidArg("operators must be chi x chi".into()));
            }
            if op.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(GlueError::InvalidArg("non-finite operator entry".into()));
            }
        }
        let ops = ops.iter().map(|o| gauge_fix(o).0).collect();
        Ok(ErrorBasis { chi, ops, labels })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Index and phase λ with `m ≈ λ·V_γ`, if any.
    pub fn find(&self, m: &CMat, tol: f64) -> Option<(usize, C64)> {
        self.ops
            .iter()
            .enumerate()
            .find_map(|(k, v)| proportional(m, v, tol).map(|p| (k, p)))
    }

    /// Tensor product basis, ordered with the first factor's index outermost.
    pub fn tensor(&self, other: &ErrorBasis) -> Result<ErrorBasis> {
        let mut ops = Vec::new();
        let mut labels = Vec::new();
        for (a, la) in self.ops.iter().zip(&self.labels) {
            for (b, lb) in other.ops.iter().zip(&other.labels) {
                ops.push(a.kronecker(b));
                labels.push(format!("{la}{lb}"));
            }
        }
        ErrorBasis::new(self.chi * other.chi, ops, labels)
    }
}

/// {𝟙, X, Z, ZX}.
pub fn pauli_basis() -> ErrorBasis {
    let (x, z) = (pauli_x(), pauli_z());
    ErrorBasis::new(
        2,
        vec![eye(2), x.clone(), z.clone(), &z * &x],
        vec!["I".into(), "X".into(), "Z".into(), "ZX".into()],
    )
    .expect("pauli basis")
}

/// {𝒳^a 𝒵^b} with index a + N·b.
pub fn clock_shift_basis(n: usize) -> Result<ErrorBasis> {
    if n < 2 {
        return Err(GlueError::InvalidArg(format!("clock-shift basis needs N >= 2, got {n}")));
    }
    let (x, z) = (shift(n), clock(n));
    let mut ops = Vec::with_capacity(n * n);
    let mut labels = Vec::with_capacity(n * n);
    let mut zb = eye(n);
    for b in 0..n {
        let mut xa = eye(n);
        for a in 0..n {
            ops.push(&xa * &zb);
            labels.push(match (a, b) {
                (0, 0) => "I".to_string(),
                (a, 0) => format!("X{a}"),
                (0, b) => format!("Z{b}"),
                (a, b) => format!("X{a}Z{b}"),
            });
            xa = &x * xa;
        }
        zb = &z * zb;
    }
    ErrorBasis::new(n, ops, labels)
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// max |tr(V_α†V_β) − χδ_{αβ}|.
    pub orthonormality_residual: f64,
    /// Frobenius distance of each V_α to the nearest unitary.
    pub unitarity_residuals: Vec<f64>,
    pub unitary: bool,
    pub orthonormal: bool,
    /// ops[0] is the identity.
    pub normalized: bool,
    /// max |tr V_α| over α ≠ 0.
    pub trace_residual: f64,
    /// Products stay in the basis up to phase.
    pub closed: bool,
    pub nice: bool,
}

pub fn validate(basis: &ErrorBasis) -> ValidationReport {
    let chi = basis.chi as f64;
    let mut ortho: f64 = 0.0;
    for (a, va) in basis.ops.iter().enumerate() {
        for (b, vb) in basis.ops.iter().enumerate() {
            let want = if a == b { chi } else { 0.0 };
            ortho = ortho.max((hs(va, vb) - c(want, 0.0)).norm());
        }
    }
    let unit: Vec<f64> = basis.ops.iter().map(unitarity_residual).collect();
    let unitary = unit.iter().all(|&r| r < 1e-10);
    let orthonormal = ortho < 1e-10;
    let normalized = basis.ops.first().map(|v| frob(&(v - eye(basis.chi))) < 1e-10).unwrap_or(false);
    let trace_residual = basis.ops.iter().skip(1).map(|v| v.trace().norm()).fold(0.0, f64::max);
    let closed = unitary
        && basis
            .ops
            .iter()
            .all(|a| basis.ops.iter().all(|b| basis.find(&(a * b), 1e-9).is_some()));
    let nice = unitary && orthonormal && normalized && trace_residual < 1e-10 && closed;
    ValidationReport {
        orthonormality_residual: ortho,
        unitarity_residuals: unit,
        unitary,
        orthonormal,
        normalized,
        trace_residual,
        closed,
        nice,
    }
}

#[derive(Clone, Debug)]
pub struct PhaseTable {
    pub chi2: usize,
    /// phases[(α, β)] with V_α V_β = phases[(α,β)] V_β V_α; NaN where undefined.
    pub phases: CMat,
    pub abelian: bool,
}

impl PhaseTable {
    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.phases[(a, b)]
    }
}

pub fn phase_table(basis: &ErrorBasis) -> PhaseTable {
    let n = basis.len();
    let chi = basis.chi;
    let mut phases = CMat::zeros(n, n);
    let mut abelian = true;
    for a in 0..n {
        for b in 0..n {
            let (va, vb) = (&basis.ops[a], &basis.ops[b]);
            let k = va * vb * va.adjoint() * vb.adjoint();
            let lam = k.trace() / c(chi as f64, 0.0);
            let dev = frob(&(&k - eye(chi) * lam));
            if dev <= 1e-9 && (lam.norm() - 1.0).abs() <= 1e-9 {
                phases[(a, b)] = lam / lam.norm();
            } else {
                phases[(a, b)] = c(f64::NAN, f64::NAN);
                abelian = false;
            }
        }
    }
    PhaseTable { chi2: n, phases, abelian }
}

/// Whether gcd(η, N) = 1.
pub fn coprime(n: usize, eta: usize) -> bool {
    gcd(n, eta) == 1
}
