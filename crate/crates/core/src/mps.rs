//! Translation-invariant MPS tensors and the quantities derived from them.
//!
//! Index order is always (left, physical, right).

use crate::error::{GlueError, Result};
use crate::linalg::{
    self, c, eigenvalues, eye, frob, herm_eig, kron, null_space, sort_spectrum, sqrtm_psd,
    svd_sorted, unvec_rm, vec_rm, CMat, CVec, C64, ONE, ZERO,
};

#[derive(Clone, Debug, PartialEq)]
pub struct MpsTensor {
    chi: usize,
    d: usize,
    data: Vec<C64>,
}

impl MpsTensor {
    pub fn new(chi: usize, d: usize, data: Vec<C64>) -> Result<Self> {
        if chi == 0 || d == 0 {
            return Err(GlueError::InvalidTensor("chi and d must be positive".into()));
        }
        if data.len() != chi * d * chi {
            return Err(GlueError::InvalidTensor(format!(
                "expected {} entries, got {}",
                chi * d * chi,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GlueError::InvalidTensor("non-finite entry".into()));
        }
        Ok(MpsTensor { chi, d, data })
    }

    pub fn from_fn(chi: usize, d: usize, f: impl Fn(usize, usize, usize) -> C64) -> Result<Self> {
        let mut data = Vec::with_capacity(chi * d * chi);
        for l in 0..chi {
            for s in 0..d {
                for r in 0..chi {
                    data.push(f(l, s, r));
                }
            }
        }
        Self::new(chi, d, data)
    }

    /// Build from the d matrices A^s (each χ×χ).
    pub fn from_matrices(mats: &[CMat]) -> Result<Self> {
        let d = mats.len();
        if d == 0 {
            return Err(GlueError::InvalidTensor("no physical components".into()));
        }
        let chi = mats[0].nrows();
        for m in mats {
            if m.shape() != (chi, chi) {
                return Err(GlueError::InvalidTensor("components must be square of equal size".into()));
            }
        }
        Self::from_fn(chi, d, |l, s, r| mats[s][(l, r)])
    }

    /// Inverse of [`MpsTensor::phys_matrix`].
    pub fn from_phys_matrix(m: &CMat, chi: usize) -> Result<Self> {
        if m.ncols() != chi * chi {
            return Err(GlueError::DimensionMismatch { expected: chi * chi, got: m.ncols() });
        }
        Self::from_fn(chi, m.nrows(), |l, s, r| m[(s, l * chi + r)])
    }

    pub fn chi(&self) -> usize {
        self.chi
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, l: usize, s: usize, r: usize) -> C64 {
        self.data[(l * self.d + s) * self.chi + r]
    }

    pub fn matrix(&self, s: usize) -> CMat {
        CMat::from_fn(self.chi, self.chi, |l, r| self.get(l, s, r))
    }

    pub fn matrices(&self) -> Vec<CMat> {
        (0..self.d).map(|s| self.matrix(s)).collect()
    }

    /// The d×χ² matrix M with M[s, l·χ + r] = A^s_{lr}.
    pub fn phys_matrix(&self) -> CMat {
        let chi = self.chi;
        CMat::from_fn(self.d, chi * chi, |s, k| self.get(k / chi, s, k % chi))
    }

    pub fn scaled(&self, f: C64) -> MpsTensor {
        MpsTensor { chi: self.chi, d: self.d, data: self.data.iter().map(|z| z * f).collect() }
    }

    /// A^s -> X^{-1} A^s X.
    pub fn gauge_transform(&self, x: &CMat) -> Result<MpsTensor> {
        let xi = x
            .clone()
            .try_inverse()
            .ok_or_else(|| GlueError::InvalidArg("gauge matrix is singular".into()))?;
        let mats: Vec<CMat> = self.matrices().iter().map(|a| &xi * a * x).collect();
        Self::from_matrices(&mats)
    }

    /// A^s -> Σ_t U_{st} A^t.
    pub fn apply_physical(&self, u: &CMat) -> Result<MpsTensor> {
        if u.ncols() != self.d {
            return Err(GlueError::DimensionMismatch { expected: self.d, got: u.ncols() });
        }
        Self::from_phys_matrix(&(u * self.phys_matrix()), self.chi)
    }

    /// Block k consecutive sites into one tensor of physical dimension d^k.
    pub fn block(&self, k: usize) -> Result<MpsTensor> {
        if k == 0 {
            return Err(GlueError::InvalidArg("block size must be positive".into()));
        }
        let mats = self.matrices();
        let mut cur = mats.clone();
        for _ in 1..k {
            let mut next = Vec::with_capacity(cur.len() * self.d);
            for a in &cur {
                for b in &mats {
                    next.push(a * b);
                }
            }
            cur = next;
        }
        Self::from_matrices(&cur)
    }

    /// ‖Σ_s A^s A^{s†} − 𝟙‖_F.
    pub fn right_canonical_residual(&self) -> f64 {
        frob(&(e_right(self, &eye(self.chi)) - eye(self.chi)))
    }
}

/// E_R(X) = Σ_s A^s X A^{s†}.
pub fn e_right(a: &MpsTensor, x: &CMat) -> CMat {
    let mut out = CMat::zeros(a.chi, a.chi);
    for s in 0..a.d {
        let m = a.matrix(s);
        out += &m * x * m.adjoint();
    }
    out
}

/// E_L(X) = Σ_s A^{s†} X A^s.
pub fn e_left(a: &MpsTensor, x: &CMat) -> CMat {
    let mut out = CMat::zeros(a.chi, a.chi);
    for s in 0..a.d {
        let m = a.matrix(s);
        out += m.adjoint() * x * &m;
    }
    out
}

#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub dim: usize,
    pub matrix: CMat,
    pub eigenvalues: Vec<C64>,
    pub numerical_rank: usize,
    pub singular_values: Vec<f64>,
}

impl TransferMatrix {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.first().map(|z| z.norm()).unwrap_or(0.0)
    }
}

/// T = Σ_s A^s ⊗ conj(A^s), acting on row-major vec(X) as E_R.
pub fn transfer_matrix_raw(a: &MpsTensor) -> CMat {
    let n = a.chi * a.chi;
    let mut t = CMat::zeros(n, n);
    for s in 0..a.d {
        let m = a.matrix(s);
        t += kron(&m, &m.map(|z| z.conj()));
    }
    t
}

pub fn transfer_matrix(a: &MpsTensor) -> Result<TransferMatrix> {
    transfer_matrix_with(a, 1e-10)
}

pub fn transfer_matrix_with(a: &MpsTensor, rank_tol: f64) -> Result<TransferMatrix> {
    if a.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(GlueError::InvalidTensor("non-finite entry".into()));
    }
    let t = transfer_matrix_raw(a);
    let ev = sort_spectrum(eigenvalues(&t));
    let sv = linalg::singular_values(&t);
    let thr = rank_tol * sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&x| x > thr && x > 0.0).count();
    Ok(TransferMatrix { dim: t.nrows(), matrix: t, eigenvalues: ev, numerical_rank: rank, singular_values: sv })
}

/// Scale A so that the spectral radius of its transfer matrix is 1.
pub fn normalize(a: &MpsTensor) -> Result<MpsTensor> {
    let t = transfer_matrix_raw(a);
    let r = eigenvalues(&t).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(r > 1e-300) || !r.is_finite() {
        return Err(GlueError::InvalidTensor("transfer matrix has zero spectral radius".into()));
    }
    Ok(a.scaled(c(r.powf(-0.5), 0.0)))
}

/// Positive fixed point of a CP map given as a χ²×χ² matrix, normalized to unit trace.
/// The dominant eigenspace is projected onto with the spectral projector and
/// the image of 𝟙 is Hermitized. Returns the fixed point and the dimension of
/// the dominant eigenspace.
pub fn dominant_fixed_point(map: &CMat, chi: usize) -> Result<(CMat, usize)> {
    let ev = eigenvalues(map);
    let r = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(r > 1e-300) {
        return Err(GlueError::CanonicalizationFailed("zero transfer matrix".into()));
    }
    let k = map - eye(map.nrows()) * c(r, 0.0);
    let right = null_space(&k, 1e-9);
    let left = null_space(&k.adjoint(), 1e-9);
    let dim = right.ncols();
    if dim == 0 || left.ncols() != dim {
        return Err(GlueError::CanonicalizationFailed("dominant eigenspace not found".into()));
    }
    let g = left.adjoint() * &right;
    let gi = g
        .try_inverse()
        .ok_or_else(|| GlueError::CanonicalizationFailed("defective dominant eigenvalue".into()))?;
    let proj = &right * gi * left.adjoint();
    let x = unvec_rm(&(proj * vec_rm(&eye(chi))), chi, chi);
    let mut x = (&x + x.adjoint()) * c(0.5, 0.0);
    let tr = x.trace();
    if tr.norm() < 1e-12 {
        return Err(GlueError::CanonicalizationFailed("fixed point has zero trace".into()));
    }
    x /= tr;
    Ok((x, dim))
}

/// Right fixed point R with E_R(R) = R, trace one.
pub fn right_fixed_point(a: &MpsTensor) -> Result<(CMat, usize)> {
    dominant_fixed_point(&transfer_matrix_raw(a), a.chi)
}

/// Left fixed point L with E_L(L) = L, trace one.
pub fn left_fixed_point(a: &MpsTensor) -> Result<(CMat, usize)> {
    dominant_fixed_point(&transfer_matrix_raw(a).adjoint(), a.chi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    pub values: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn is_flat(&self, tol: f64) -> bool {
        let max = self.values.iter().copied().fold(f64::MIN, f64::max);
        let min = self.values.iter().copied().fold(f64::MAX, f64::min);
        max - min <= tol
    }
}

#[derive(Clone, Debug)]
pub struct Canonical {
    pub tensor: MpsTensor,
    pub spectrum: SchmidtSpectrum,
    /// X with A' = X^{-1} A X (up to the normalization scale).
    pub gauge: CMat,
    /// Dimension of the dominant eigenspace; above one means long-range entangled.
    pub degeneracy: usize,
}

impl Canonical {
    pub fn degenerate(&self) -> bool {
        self.degeneracy > 1
    }
}

fn positive_check(x: &CMat, what: &str) -> Result<()> {
    let (vals, _) = herm_eig(x);
    let max = vals.first().copied().unwrap_or(0.0);
    let min = vals.last().copied().unwrap_or(0.0);
    if max <= 0.0 || min < -1e-9 * max {
        return Err(GlueError::CanonicalizationFailed(format!("{what} fixed point is not positive")));
    }
    if min <= 1e-12 * max {
        return Err(GlueError::CanonicalizationFailed(format!("{what} fixed point is singular")));
    }
    Ok(())
}

/// Normalize and apply the Hermitian gauge X = sqrt(χ R) so that Σ A A† = 𝟙.
/// No unitary rotation is applied. Returns the new tensor and X.
pub fn hermitian_gauge(a: &MpsTensor) -> Result<(MpsTensor, CMat)> {
    let a = normalize(a)?;
    let (r, _) = right_fixed_point(&a)?;
    positive_check(&r, "right")?;
    let x = sqrtm_psd(&(r * c(a.chi as f64, 0.0)));
    let out = a.gauge_transform(&x)?;
    Ok((out, x))
}

/// Bring A to right-canonical form with a diagonal left fixed point Λ².
pub fn right_canonicalize(a: &MpsTensor) -> Result<Canonical> {
    let (a1, x) = hermitian_gauge(a)?;
    let (rho, deg) = left_fixed_point(&a1)?;
    positive_check(&rho, "left")?;
    let chi = a.chi;
    let offdiag: f64 = (0..chi)
        .flat_map(|i| (0..chi).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| rho[(i, j)].norm_sqr())
        .sum::<f64>()
        .sqrt();
    let w = if offdiag <= 1e-12 * frob(&rho) {
        let mut idx: Vec<usize> = (0..chi).collect();
        idx.sort_by(|&p, &q| rho[(q, q)].re.partial_cmp(&rho[(p, p)].re).unwrap());
        CMat::from_fn(chi, chi, |i, j| if idx[j] == i { ONE } else { ZERO })
    } else {
        herm_eig(&rho).1
    };
    let a2 = a1.gauge_transform(&w)?;
    let d = w.adjoint() * &rho * &w;
    let mut vals: Vec<f64> = (0..chi).map(|i| d[(i, i)].re.max(0.0)).collect();
    let s: f64 = vals.iter().sum();
    vals.iter_mut().for_each(|v| *v /= s);
    let res = a2.right_canonical_residual();
    if res > 1e-9 {
        return Err(GlueError::CanonicalizationFailed(format!("residual {res:.3e}")));
    }
    Ok(Canonical { tensor: a2, spectrum: SchmidtSpectrum { values: vals }, gauge: x * w, degeneracy: deg })
}

pub fn entanglement_spectrum(a: &MpsTensor) -> Result<SchmidtSpectrum> {
    Ok(right_canonicalize(a)?.spectrum)
}

#[derive(Clone, Debug)]
pub struct DefiniteForm {
    pub chi: usize,
    /// 𝔸 = sqrt(M†M), χ²×χ².
    pub matrix: CMat,
    /// W with M = W 𝔸 (d×χ²).
    pub isometry: CMat,
}

impl DefiniteForm {
    /// The definite form read as an MPS tensor with physical dimension χ².
    pub fn as_tensor(&self) -> Result<MpsTensor> {
        MpsTensor::from_phys_matrix(&self.matrix, self.chi)
    }
}

/// Definite form via the polar decomposition of M.
pub fn definite_form(a: &MpsTensor) -> DefiniteForm {
    let m = a.phys_matrix();
    let (u, s, vt) = svd_sorted(&m);
    let sd = CMat::from_diagonal(&CVec::from_iterator(s.len(), s.iter().map(|&x| c(x, 0.0))));
    let q = vt.adjoint() * sd * &vt;
    let q = (&q + q.adjoint()) * c(0.5, 0.0);
    DefiniteForm { chi: a.chi, matrix: q, isometry: u * vt }
}

/// Definite form via the Hermitian square root of 𝕋 = M†M.
pub fn definite_form_sqrt(a: &MpsTensor) -> CMat {
    let m = a.phys_matrix();
    let t = m.adjoint() * m;
    // eigenvalues at rounding level would otherwise turn into O(1e-8) noise
    let cut = 1e-13 * frob(&t);
    linalg::herm_fn(&t, |x| if x > cut { x.sqrt() } else { 0.0 })
}

/// How the virtual legs at the chain ends are treated by [`expand_statevector`].
#[derive(Clone, Debug)]
pub enum Boundary {
    /// Keep both virtual legs as boundary qudits: layout (l, s1..sn, r).
    Open,
    /// Contract with v_L = sqrt(L)·(1,..,1) and v_R = (1,..,1).
    Default,
    /// Contract with the given vectors.
    Vectors(CVec, CVec),
    /// Left leg weighted by sqrt(L) and kept; right leg kept. Reduced states
    /// of the physical sites equal the infinite-chain ones for canonical A.
    Canonical,
}

/// Contract n sites into a state vector, normalized to unit norm.
pub fn expand_statevector(a: &MpsTensor, n: usize, boundary: &Boundary, guard: u128) -> Result<CVec> {
    if n == 0 {
        return Err(GlueError::InvalidArg("n_sites must be positive".into()));
    }
    let (chi, d) = (a.chi, a.d);
    let requested = (chi as u128).pow(2).saturating_mul((d as u128).saturating_pow(n as u32));
    if requested > guard {
        return Err(GlueError::TooLarge { requested, limit: guard });
    }
    // psi laid out as (i, s1..sk, m)
    let mut psi: Vec<C64> = a.data.clone();
    let mut prefix = chi * d;
    for _ in 1..n {
        let mut next = vec![ZERO; prefix * d * chi];
        for p in 0..prefix {
            for m in 0..chi {
                let v = psi[p * chi + m];
                if v == ZERO {
                    continue;
                }
                for s in 0..d {
                    let base = (p * d + s) * chi;
                    for j in 0..chi {
                        next[base + j] += v * a.get(m, s, j);
                    }
                }
            }
        }
        psi = next;
        prefix *= d;
    }
    let body = prefix / chi; // d^n
    let out: Vec<C64> = match boundary {
        Boundary::Open => psi,
        Boundary::Canonical => {
            let (rho, _) = left_fixed_point(a)?;
            let sr = sqrtm_psd(&rho);
            let mut out = vec![ZERO; psi.len()];
            for l in 0..chi {
                for i in 0..chi {
                    let w = sr[(l, i)];
                    if w == ZERO {
                        continue;
                    }
                    for k in 0..body * chi {
                        out[l * body * chi + k] += w * psi[i * body * chi + k];
                    }
                }
            }
            out
        }
        Boundary::Default | Boundary::Vectors(..) => {
            let (vl, vr) = match boundary {
                Boundary::Vectors(l, r) => {
                    if l.len() != chi || r.len() != chi {
                        return Err(GlueError::DimensionMismatch { expected: chi, got: l.len().min(r.len()) });
                    }
                    (l.clone(), r.clone())
                }
                _ => {
                    let (rho, _) = left_fixed_point(a)?;
                    let ones = CVec::from_element(chi, ONE);
                    (sqrtm_psd(&rho) * &ones, ones)
                }
            };
            let mut out = vec![ZERO; body];
            for i in 0..chi {
                for (b, o) in out.iter_mut().enumerate() {
                    for j in 0..chi {
                        *o += vl[i] * psi[(i * body + b) * chi + j] * vr[j];
                    }
                }
            }
            out
        }
    };
    let v = CVec::from_vec(out);
    let nrm = v.norm();
    if !(nrm > 1e-300) {
        return Err(GlueError::InvalidArg("boundary contraction gives the zero vector".into()));
    }
    Ok(v / c(nrm, 0.0))
}

/// E_O(X) = Σ_{s,s'} O_{ss'} A^{s'} X A^{s†}.
fn e_op(a: &MpsTensor, o: &CMat, x: &CMat) -> CMat {
    let mats = a.matrices();
    let mut out = CMat::zeros(a.chi, a.chi);
    for s in 0..a.d {
        for t in 0..a.d {
            let w = o[(s, t)];
            if w != ZERO {
                out += (&mats[t] * x * mats[s].adjoint()) * w;
            }
        }
    }
    out
}

/// Infinite-chain ⟨O1(x) O2(x+r)⟩ for a right-canonical tensor.
pub fn two_point_correlator(a: &MpsTensor, o1: &CMat, o2: &CMat, r: usize) -> Result<C64> {
    let d = a.d;
    if o1.shape() != (d, d) || o2.shape() != (d, d) {
        return Err(GlueError::DimensionMismatch { expected: d, got: o1.nrows() });
    }
    let residual = a.right_canonical_residual();
    if residual > 1e-9 {
        return Err(GlueError::NotCanonical { residual });
    }
    let (rho, _) = left_fixed_point(a)?;
    let id = eye(a.chi);
    let x = if r == 0 {
        e_op(a, &(o1 * o2), &id)
    } else {
        let mut x = e_op(a, o2, &id);
        for _ in 1..r {
            x = e_right(a, &x);
        }
        e_op(a, o1, &x)
    };
    Ok((rho * x).trace())
}
