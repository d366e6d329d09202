//! Small dense linear algebra helpers on top of nalgebra.
//!
//! All vectorizations are row-major: `vec(X)[i*cols + j] = X[i, j]`, so
//! `vec(P X Q) = (P ⊗ Qᵀ) vec(X)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn frob(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMat) -> C64 {
    a.trace()
}

/// Hilbert-Schmidt inner product tr(P† Q).
pub fn hs(p: &CMat, q: &CMat) -> C64 {
    p.iter().zip(q.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_rm(m: &CMat) -> CVec {
    let (r, cc) = m.shape();
    CVec::from_fn(r * cc, |k, _| m[(k / cc, k % cc)])
}

pub fn unvec_rm(v: &CVec, rows: usize, cols: usize) -> CMat {
    assert_eq!(v.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// SVD with singular values sorted in descending order.
/// Returns (U: m×k, s, Vt: k×n) with k = min(m, n).
fn raw_svd(a: &CMat) -> (CMat, DVector<f64>, CMat) {
    let svd = a.clone().svd(true, true);
    (svd.u.expect("svd u"), svd.singular_values, svd.v_t.expect("svd v_t"))
}

fn svd_defect(a: &CMat, u: &CMat, s: &DVector<f64>, vt: &CMat) -> f64 {
    let mut us = u.clone();
    for (j, &x) in s.iter().enumerate() {
        us.column_mut(j).scale_mut(x);
    }
    let k = s.len();
    frob(&(us * vt - a))
        + frob(&(u.adjoint() * u - eye(k)))
        + frob(&(vt * vt.adjoint() - eye(k)))
}

/// Haar-like unitary from the QR of a seeded Gaussian matrix.
fn scrambler(n: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMat::from_fn(n, n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    g.qr().q()
}

/// Thin SVD with singular values in descending order.
///
/// The LAPACK-free complex SVD occasionally loses accuracy on nearly
/// diagonal inputs with clustered singular values; such results are
/// detected and recomputed on a unitarily scrambled copy P·A·Q.
pub fn svd_sorted(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    let scale = frob(a).max(1.0);
    let tol = 1e-12 * scale * ((a.nrows() + a.ncols()) as f64).sqrt();
    let (mut u, mut s, mut vt) = raw_svd(a);
    let mut err = svd_defect(a, &u, &s, &vt);
    let mut seed = 1u64;
    while err > tol && seed <= 4 {
        let p = scrambler(a.nrows(), seed);
        let q = scrambler(a.ncols(), seed + 100);
        let (u2, s2, vt2) = raw_svd(&(p.adjoint() * a * &q));
        let (u2, vt2) = (p * u2, vt2 * q.adjoint());
        let e2 = svd_defect(a, &u2, &s2, &vt2);
        if e2 < err {
            (u, s, vt, err) = (u2, s2, vt2, e2);
        }
        seed += 1;
    }
    let k = s.len();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&x, &y| s[y].partial_cmp(&s[x]).unwrap_or(std::cmp::Ordering::Equal));
    let us = CMat::from_fn(u.nrows(), k, |i, j| u[(i, idx[j])]);
    let vts = CMat::from_fn(k, vt.ncols(), |i, j| vt[(idx[i], j)]);
    let ss = idx.iter().map(|&i| s[i]).collect();
    (us, ss, vts)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    svd_sorted(a).1
}

/// Numerical rank: singular values above `tol * max(1, σ_max)`.
pub fn rank(a: &CMat, tol: f64) -> usize {
    let s = singular_values(a);
    let thr = tol * s.first().copied().unwrap_or(0.0).max(1.0);
    s.iter().filter(|&&x| x > thr).count()
}

/// Orthonormal basis (columns) of the right null space of `a`.
/// A singular value counts as zero when it is below `tol * max(1, σ_max)`.
pub fn null_space(a: &CMat, tol: f64) -> CMat {
    let (m, n) = a.shape();
    let sq = if m < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let (_, s, vt) = svd_sorted(&sq);
    let thr = tol * s.first().copied().unwrap_or(0.0).max(1.0);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= thr).collect();
    CMat::from_fn(n, keep.len(), |i, j| vt[(keep[j], i)].conj())
}

/// Hermitian eigendecomposition, eigenvalues descending.
pub fn herm_eig(a: &CMat) -> (Vec<f64>, CMat) {
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| {
        eig.eigenvalues[y]
            .partial_cmp(&eig.eigenvalues[x])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, idx[j])]);
    (vals, vecs)
}

pub fn herm_fn(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, v) = herm_eig(a);
    let d = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&x| c(f(x), 0.0))));
    &v * d * v.adjoint()
}

/// Square root of a positive semidefinite matrix; small negative eigenvalues are clamped.
pub fn sqrtm_psd(a: &CMat) -> CMat {
    herm_fn(a, |x| x.max(0.0).sqrt())
}

/// Unitary polar factor of a square matrix.
pub fn polar_unitary(a: &CMat) -> CMat {
    let (u, _, vt) = svd_sorted(a);
    u * vt
}

/// Frobenius distance to the nearest unitary.
pub fn unitarity_residual(a: &CMat) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    frob(&(a - polar_unitary(a)))
}

/// Moore-Penrose pseudoinverse with relative cutoff.
pub fn pinv(a: &CMat, tol: f64) -> CMat {
    let (u, s, vt) = svd_sorted(a);
    let thr = tol * s.first().copied().unwrap_or(0.0);
    let mut out = CMat::zeros(a.ncols(), a.nrows());
    for (k, &sk) in s.iter().enumerate() {
        if sk > thr && sk > 0.0 {
            let col = vt.row(k).adjoint();
            let row = u.column(k).adjoint();
            out += (col * row) * c(1.0 / sk, 0.0);
        }
    }
    out
}

/// Matrix exponential of a Hermitian matrix times a real scalar: exp(t H).
pub fn expm_herm(h: &CMat, t: f64) -> CMat {
    herm_fn(h, |x| (t * x).exp())
}

/// Eigenvalues of a general square matrix, via complex Schur form.
pub fn eigenvalues(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    if n == 0 {
        return vec![];
    }
    let schur = a.clone().schur();
    let (_, t) = schur.unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

/// Sort by magnitude (descending), then by argument (ascending).
/// Imaginary parts that are negligible relative to the modulus are zeroed.
pub fn sort_spectrum(mut v: Vec<C64>) -> Vec<C64> {
    for z in v.iter_mut() {
        let m = z.norm();
        if z.im.abs() <= 1e-12 * m.max(1e-300) || z.im.abs() < 1e-15 {
            *z = c(z.re, 0.0);
        }
        if z.re.abs() < 1e-15 && m < 1e-15 {
            *z = ZERO;
        }
    }
    v.sort_by(|a, b| {
        let (ma, mb) = (a.norm(), b.norm());
        if (ma - mb).abs() > 1e-9 * ma.max(mb).max(1e-300) {
            mb.partial_cmp(&ma).unwrap()
        } else {
            a.arg().partial_cmp(&b.arg()).unwrap()
        }
    });
    v
}

/// Multiply by a phase so that the first largest-magnitude entry (row-major) is real positive.
/// Returns the rephased matrix and the phase removed.
pub fn gauge_fix(m: &CMat) -> (CMat, C64) {
    let max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return (m.clone(), ONE);
    }
    let (r, cc) = m.shape();
    for i in 0..r {
        for j in 0..cc {
            let z = m[(i, j)];
            if z.norm() >= max * (1.0 - 1e-9) {
                let ph = z / z.norm();
                return (m * ph.conj(), ph);
            }
        }
    }
    unreachable!()
}

/// If `p ≈ λ q`, return λ. Proportionality is judged by the normalized overlap.
pub fn proportional(p: &CMat, q: &CMat, tol: f64) -> Option<C64> {
    if p.shape() != q.shape() {
        return None;
    }
    let np = frob(p);
    let nq = frob(q);
    if nq == 0.0 || np == 0.0 {
        return None;
    }
    let ov = hs(q, p);
    if ov.norm() / (np * nq) >= 1.0 - tol {
        Some(ov / (nq * nq))
    } else {
        None
    }
}

/// Phase-insensitive equality of unitaries: |tr(P†Q)|/χ ≥ 1 - tol.
pub fn equal_up_to_phase(p: &CMat, q: &CMat, tol: f64) -> bool {
    if p.shape() != q.shape() {
        return false;
    }
    let chi = p.nrows() as f64;
    hs(p, q).norm() / chi >= 1.0 - tol
}

pub fn is_identity_up_to_phase(p: &CMat, tol: f64) -> bool {
    equal_up_to_phase(p, &eye(p.nrows()), tol)
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
