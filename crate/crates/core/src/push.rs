//! Push-through solver: V A^s = phase · Σ_{s'} U_{ss'} A^{s'} V'.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::basis::ErrorBasis;
use crate::config::{Config, Tolerances};
use crate::error::{GlueError, Result};
use crate::linalg::{
    self, c, equal_up_to_phase, eye, frob, gauge_fix, hs, is_identity_up_to_phase, kron,
    null_space, polar_unitary, svd_sorted, unitarity_residual, unvec_rm, CMat, CVec as CVecN, C64, ONE,
};
use crate::mps::{self, MpsTensor, SchmidtSpectrum};

#[derive(Clone, Debug)]
pub struct PushStep {
    pub v_in: CMat,
    pub v_out: CMat,
    pub u_phys: CMat,
    pub phase: C64,
    /// sqrt(Σ_s ‖V A^s − phase Σ U A V'‖²).
    pub residual: f64,
    /// ‖(V⊗V̄)T − T(V'⊗V̄')‖_F.
    pub transfer_residual: f64,
}

/// Precomputed data about a right-canonical tensor shared by many pushes.
pub struct PushContext {
    a: MpsTensor,
    mats: Vec<CMat>,
    t: CMat,
    /// Orthonormal basis of the physical support, d×r.
    q: CMat,
    /// Reduced components Ã^t = Σ_s conj(Q_{st}) A^s.
    reduced: Vec<CMat>,
    tol: Tolerances,
    /// Extra V' candidates tried before the general solvers.
    hints: Vec<CMat>,
}

impl PushContext {
    pub fn new(a: &MpsTensor, tol: &Tolerances) -> Result<Self> {
        let residual = a.right_canonical_residual();
        if residual > tol.canonical_tol {
            return Err(GlueError::NotCanonical { residual });
        }
        let m = a.phys_matrix();
        let (u, s, _) = svd_sorted(&m);
        let thr = tol.rank_tol * s.first().copied().unwrap_or(0.0);
        let r = s.iter().filter(|&&x| x > thr).count();
        let q = u.columns(0, r).into_owned();
        let red = q.adjoint() * &m;
        let chi = a.chi();
        let reduced = (0..r)
            .map(|t| CMat::from_fn(chi, chi, |i, j| red[(t, i * chi + j)]))
            .collect();
        Ok(PushContext {
            a: a.clone(),
            mats: a.matrices(),
            t: mps::transfer_matrix_raw(a),
            q,
            reduced,
            tol: tol.clone(),
            hints: Vec::new(),
        })
    }

    /// Try these operators as V' right after 𝟙 and V.
    pub fn with_hints(mut self, hints: Vec<CMat>) -> Self {
        self.hints = hints;
        self
    }

    pub fn tensor(&self) -> &MpsTensor {
        &self.a
    }

    pub fn chi(&self) -> usize {
        self.a.chi()
    }

    fn transfer_residual(&self, v: &CMat, vp: &CMat) -> f64 {
        let l = kron(v, &v.map(|z| z.conj())) * &self.t;
        let r = &self.t * kron(vp, &vp.map(|z| z.conj()));
        frob(&(l - r))
    }

    /// Build and check the full step for a candidate V'. Returns the step
    /// even if the residuals are large.
    pub fn evaluate(&self, v: &CMat, vp: &CMat) -> PushStep {
        let chi = self.chi();
        let d = self.a.d();
        let r = self.reduced.len();
        let (vp, _) = gauge_fix(&polar_unitary(vp));
        // Procrustes on the support: C̃ = Ũ Ã
        let ct = CMat::from_fn(r, chi * chi, |t, k| {
            let m = v * &self.reduced[t] * vp.adjoint();
            m[(k / chi, k % chi)]
        });
        let at = CMat::from_fn(r, chi * chi, |t, k| self.reduced[t][(k / chi, k % chi)]);
        let ut = if r > 0 { polar_unitary(&(ct * at.adjoint())) } else { CMat::zeros(0, 0) };
        let u_full = &self.q * ut * self.q.adjoint() + (eye(d) - &self.q * self.q.adjoint());
        let (u, phase) = gauge_fix(&u_full);
        let mut res2 = 0.0;
        for s in 0..d {
            let mut rhs = CMat::zeros(chi, chi);
            for sp in 0..d {
                let w = u[(s, sp)];
                if w != linalg::ZERO {
                    rhs += &self.mats[sp] * w;
                }
            }
            let diff = v * &self.mats[s] - rhs * &vp * phase;
            res2 += diff.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let tres = self.transfer_residual(v, &vp);
        PushStep {
            v_in: v.clone(),
            v_out: vp,
            u_phys: u,
            phase,
            residual: res2.sqrt(),
            transfer_residual: tres,
        }
    }

    fn accept(&self, s: &PushStep) -> bool {
        s.residual <= self.tol.push_tol && s.transfer_residual <= self.tol.push_tol
    }

    /// Candidate from W = T⁺(V⊗V̄)T realigned into vec(V')vec(V')†.
    fn pinv_candidate(&self, v: &CMat) -> Option<CMat> {
        let chi = self.chi();
        let n = chi * chi;
        let w = linalg::pinv(&self.t, self.tol.rank_tol) * kron(v, &v.map(|z| z.conj())) * &self.t;
        // W_{(i i'),(j j')} -> R_{(i j),(i' j')}
        let r = CMat::from_fn(n, n, |row, col| {
            let (i, j) = (row / chi, row % chi);
            let (ip, jp) = (col / chi, col % chi);
            w[(i * chi + ip, j * chi + jp)]
        });
        let (u, s, _) = svd_sorted(&r);
        if s[0] <= 0.0 || s.get(1).copied().unwrap_or(0.0) / s[0] > self.tol.factor_tol {
            return None;
        }
        let col = u.column(0).into_owned();
        Some(unvec_rm(&col, chi, chi))
    }

    /// Candidates from the linear system Σ_k W_{tk} (V Ã^k) = Ã^t V'.
    fn nullspace_candidates(&self, v: &CMat) -> Vec<CMat> {
        let chi = self.chi();
        let r = self.reduced.len();
        let nw = r * r;
        let nv = chi * chi;
        let mut l = CMat::zeros(r * nv, nw + nv);
        let va: Vec<CMat> = self.reduced.iter().map(|a| v * a).collect();
        for t in 0..r {
            for i in 0..chi {
                for j in 0..chi {
                    let row = t * nv + i * chi + j;
                    for k in 0..r {
                        l[(row, t * r + k)] = va[k][(i, j)];
                    }
                    for a in 0..chi {
                        l[(row, nw + a * chi + j)] = -self.reduced[t][(i, a)];
                    }
                }
            }
        }
        let ns = null_space(&l, 1e-9);
        let k = ns.ncols();
        let bs: Vec<CMat> = (0..k)
            .map(|m| CMat::from_fn(chi, chi, |i, j| ns[(nw + i * chi + j, m)]))
            .collect();
        match k {
            0 => vec![],
            1 => bs,
            _ => {
                let ws: Vec<CMat> = (0..k)
                    .map(|m| CMat::from_fn(r, r, |i, j| ns[(i * r + j, m)]))
                    .collect();
                let mut out = unitary_combinations(&bs, &ws);
                out.extend(alternating_candidates(&ns, nw, r, chi));
                out
            }
        }
    }

    /// Solve for V' and U given V.
    pub fn push(&self, v: &CMat) -> Result<PushStep> {
        let chi = self.chi();
        if v.shape() != (chi, chi) {
            return Err(GlueError::DimensionMismatch { expected: chi, got: v.nrows() });
        }
        let ur = unitarity_residual(v);
        if ur > 1e-9 {
            return Err(GlueError::NotUnitary { residual: ur });
        }
        let mut best: Option<PushStep> = None;
        let consider = |s: PushStep, best: &mut Option<PushStep>| -> bool {
            let ok = self.accept(&s);
            let worse = best
                .as_ref()
                .map(|b| b.residual + b.transfer_residual > s.residual + s.transfer_residual)
                .unwrap_or(true);
            if ok || worse {
                *best = Some(s);
            }
            ok
        };
        // local first, then uniform
        for cand in [eye(chi), v.clone()] {
            if consider(self.evaluate(v, &cand), &mut best) {
                return Ok(best.unwrap());
            }
        }
        for cand in &self.hints {
            if consider(self.evaluate(v, cand), &mut best) {
                return Ok(best.unwrap());
            }
        }
        if let Some(cand) = self.pinv_candidate(v) {
            if consider(self.evaluate(v, &cand), &mut best) {
                return Ok(best.unwrap());
            }
        }
        for cand in self.nullspace_candidates(v) {
            if frob(&cand) == 0.0 {
                continue;
            }
            if consider(self.evaluate(v, &cand), &mut best) {
                return Ok(best.unwrap());
            }
        }
        let residual = best.map(|b| b.residual.max(b.transfer_residual)).unwrap_or(f64::INFINITY);
        Err(GlueError::NoPush { residual })
    }
}

/// Alternate between the solution span (columns of `ns`, W block first) and
/// pairs (W, V') that are both proportional to unitaries with a common scale.
fn alternating_candidates(ns: &CMat, nw: usize, r: usize, chi: usize) -> Vec<CMat> {
    let k = ns.ncols();
    let mut starts: Vec<CVecN> = (0..k).map(|j| ns.column(j).into_owned()).collect();
    starts.push((0..k).fold(CVecN::zeros(ns.nrows()), |acc, j| acc + ns.column(j)));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..32 {
        let coef = CVecN::from_fn(k, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        starts.push(ns * coef);
    }
    let mut out = Vec::new();
    for mut z in starts {
        for _ in 0..300 {
            let w = CMat::from_fn(r, r, |i, j| z[i * r + j]);
            let vp = CMat::from_fn(chi, chi, |i, j| z[nw + i * chi + j]);
            let scale = ((frob(&w).powi(2) + frob(&vp).powi(2)) / (r + chi) as f64).sqrt();
            if scale < 1e-14 {
                break;
            }
            let target = {
                let (pw, pv) = (polar_unitary(&w) * c(scale, 0.0), polar_unitary(&vp) * c(scale, 0.0));
                let mut t = CVecN::zeros(ns.nrows());
                for i in 0..r * r {
                    t[i] = pw[(i / r, i % r)];
                }
                for i in 0..chi * chi {
                    t[nw + i] = pv[(i / chi, i % chi)];
                }
                t
            };
            let next = ns * (ns.adjoint() * &target);
            let moved = (&next - &z).norm();
            z = next;
            if moved <= 1e-13 * scale {
                break;
            }
        }
        let z = polish(ns, &z, nw, r, chi);
        out.push(CMat::from_fn(chi, chi, |i, j| z[nw + i * chi + j]));
    }
    out
}

/// Residual of "W and V' are unitary up to one common scale, ‖c‖ = 1" at z = ns·c.
fn unitarity_defect(ns: &CMat, coef: &CVecN, nw: usize, r: usize, chi: usize) -> Vec<f64> {
    let z = ns * coef;
    let w = CMat::from_fn(r, r, |i, j| z[i * r + j]);
    let vp = CMat::from_fn(chi, chi, |i, j| z[nw + i * chi + j]);
    let sigma = (frob(&w).powi(2) + frob(&vp).powi(2)) / (r + chi) as f64;
    let mut f = Vec::with_capacity(2 * (r * r + chi * chi) + 1);
    for m in [w.adjoint() * &w - eye(r) * c(sigma, 0.0), vp.adjoint() * &vp - eye(chi) * c(sigma, 0.0)] {
        for x in m.iter() {
            f.push(x.re);
            f.push(x.im);
        }
    }
    f.push(coef.norm_squared() - 1.0);
    f
}

/// Gauss-Newton steps on the unitarity defect, finite-difference Jacobian.
fn polish(ns: &CMat, z: &CVecN, nw: usize, r: usize, chi: usize) -> CVecN {
    let k = ns.ncols();
    let mut coef = ns.adjoint() * z;
    let n0 = coef.norm();
    if n0 < 1e-14 {
        return z.clone();
    }
    coef /= c(n0, 0.0);
    let h = 1e-7;
    for _ in 0..30 {
        let f = unitarity_defect(ns, &coef, nw, r, chi);
        let fnorm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        if fnorm < 1e-14 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(f.len(), 2 * k);
        for p in 0..2 * k {
            let mut cp = coef.clone();
            cp[p / 2] += if p % 2 == 0 { c(h, 0.0) } else { c(0.0, h) };
            let fp = unitarity_defect(ns, &cp, nw, r, chi);
            for (row, (a, b)) in fp.iter().zip(&f).enumerate() {
                jac[(row, p)] = (a - b) / h;
            }
        }
        let rhs = DMatrix::from_column_slice(f.len(), 1, &f);
        let Ok(step) = jac.svd(true, true).solve(&rhs, 1e-12) else { break };
        for q in 0..k {
            coef[q] -= c(step[(2 * q, 0)], step[(2 * q + 1, 0)]);
        }
    }
    ns * coef
}

/// Real null space of a real matrix (columns), relative cutoff.
fn real_null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let sq = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = sq.svd(false, true);
    let vt = svd.v_t.unwrap();
    let s = svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max).max(1.0);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= tol * smax).collect();
    DMatrix::from_fn(n, keep.len(), |i, j| vt[(keep[j], i)])
}

/// Given bases B_a (for V') and W_a (for the paired physical map), look for
/// coefficient vectors c with Σ c_a B_a and Σ c_a W_a both proportional to
/// unitaries. The quadratic conditions are linear in X = c c†; the dominant
/// eigenvectors of the solutions are returned as candidates.
fn unitary_combinations(bs: &[CMat], ws: &[CMat]) -> Vec<CMat> {
    let k = bs.len();
    let chi = bs[0].nrows() as f64;
    let r = ws[0].nrows() as f64;
    // Hermitian X parametrized by k² reals: diag, then (Re, Im) of upper entries
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            pairs.push((a, b));
        }
    }
    let np = k + 2 * pairs.len();
    // X_{ba} as a linear function of the parameters, for each (a, b)
    let x_coef = |a: usize, b: usize| -> Vec<C64> {
        let mut v = vec![linalg::ZERO; np];
        if a == b {
            v[a] = ONE;
        } else {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let p = pairs.iter().position(|&q| q == (lo, hi)).unwrap();
            // X_{lo,hi} = p + i q, X_{hi,lo} = p − i q; we need X_{b,a}
            v[k + 2 * p] = ONE;
            v[k + 2 * p + 1] = if (b, a) == (lo, hi) { c(0.0, 1.0) } else { c(0.0, -1.0) };
        }
        v
    };
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut add_forms = |fs: &dyn Fn(usize, usize) -> CMat, dim: usize| {
        let mut acc = vec![vec![linalg::ZERO; np]; dim * dim];
        for a in 0..k {
            for b in 0..k {
                let f = fs(a, b);
                let xc = x_coef(a, b);
                for e in 0..dim * dim {
                    let fe = f[(e / dim, e % dim)];
                    if fe != linalg::ZERO {
                        for (p, xv) in xc.iter().enumerate() {
                            acc[e][p] += fe * xv;
                        }
                    }
                }
            }
        }
        rows.extend(acc);
    };
    let cb = bs[0].nrows();
    add_forms(
        &|a, b| {
            let g = bs[a].adjoint() * &bs[b];
            let tr = g.trace() / c(chi, 0.0);
            g - eye(cb) * tr
        },
        cb,
    );
    let cw = ws[0].nrows();
    add_forms(
        &|a, b| {
            let g = ws[a].adjoint() * &ws[b];
            let tr = g.trace() / c(r, 0.0);
            g - eye(cw) * tr
        },
        cw,
    );
    // tie the scales: tr(V'†V')/χ = tr(W†W)/r
    add_forms(
        &|a, b| {
            let s = hs(&bs[a], &bs[b]) / c(chi, 0.0) - hs(&ws[a], &ws[b]) / c(r, 0.0);
            CMat::from_element(1, 1, s)
        },
        1,
    );
    let mut real = DMatrix::<f64>::zeros(2 * rows.len(), np);
    for (i, row) in rows.iter().enumerate() {
        for (p, z) in row.iter().enumerate() {
            real[(2 * i, p)] = z.re;
            real[(2 * i + 1, p)] = z.im;
        }
    }
    let ns = real_null_space(&real, 1e-9);
    let to_x = |v: &[f64]| -> CMat {
        let mut x = CMat::zeros(k, k);
        for a in 0..k {
            x[(a, a)] = c(v[a], 0.0);
        }
        for (p, &(a, b)) in pairs.iter().enumerate() {
            x[(a, b)] = c(v[k + 2 * p], v[k + 2 * p + 1]);
            x[(b, a)] = c(v[k + 2 * p], -v[k + 2 * p + 1]);
        }
        x
    };
    let mut xs: Vec<CMat> = (0..ns.ncols())
        .map(|j| to_x(ns.column(j).as_slice()))
        .collect();
    if xs.len() > 1 {
        let sum = xs.iter().fold(CMat::zeros(k, k), |acc, x| acc + x);
        // singular members of each pencil X_i − λX_j are the rank-deficient directions
        let m = xs.len().min(4);
        let mut extra = vec![sum];
        for i in 0..m {
            for j in 0..m {
                if i == j || xs[j].determinant().norm() < 1e-12 {
                    continue;
                }
                let Some(inv) = xs[j].clone().try_inverse() else { continue };
                for lam in linalg::eigenvalues(&(inv * &xs[i])) {
                    extra.push(&xs[i] - &xs[j] * c(lam.re, 0.0));
                }
            }
        }
        xs.extend(extra);
    }
    let mut out = Vec::new();
    for x in xs {
        let (vals, vecs) = linalg::herm_eig(&x);
        for idx in [0, k - 1] {
            if vals[idx].abs() < 1e-12 {
                continue;
            }
            let cv = vecs.column(idx);
            let mut m = CMat::zeros(bs[0].nrows(), bs[0].ncols());
            for a in 0..k {
                m += &bs[a] * cv[a];
            }
            out.push(m);
        }
    }
    out
}

/// One push of V through a right-canonical tensor.
pub fn push_once(a: &MpsTensor, v: &CMat, tol: &Tolerances) -> Result<PushStep> {
    PushContext::new(a, tol)?.push(v)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ErrorClass {
    Local,
    TopologicalUniform,
    /// V^{[k+period]} ∝ V^{[k]} for all k ≥ preperiod.
    TopologicalPeriodic { period: usize, preperiod: usize },
    Unresolved,
}

impl ErrorClass {
    pub fn label(&self) -> String {
        match self {
            ErrorClass::Local => "local".into(),
            ErrorClass::TopologicalUniform => "topological_uniform".into(),
            ErrorClass::TopologicalPeriodic { .. } => "topological_periodic".into(),
            ErrorClass::Unresolved => "unresolved".into(),
        }
    }

    pub fn is_topological(&self) -> bool {
        matches!(self, ErrorClass::TopologicalUniform | ErrorClass::TopologicalPeriodic { .. })
    }
}

#[derive(Clone, Debug)]
pub struct PushRecord {
    pub steps: Vec<PushStep>,
    pub classification: ErrorClass,
    pub trivialize_index: Option<usize>,
    /// Set when the sequence stopped because a push failed.
    pub failure: Option<String>,
}

impl PushRecord {
    /// V^{[n]} for any n, extended by the detected periodicity or by 𝟙 after trivialization.
    pub fn operator_at(&self, n: usize) -> Option<CMat> {
        if let Some(s) = self.steps.get(n) {
            return Some(s.v_in.clone());
        }
        match &self.classification {
            ErrorClass::Local => Some(eye(self.steps[0].v_in.nrows())),
            ErrorClass::TopologicalUniform => Some(self.steps[0].v_in.clone()),
            ErrorClass::TopologicalPeriodic { period, preperiod } => {
                let k = preperiod + (n - preperiod) % period;
                Some(self.steps[k].v_in.clone())
            }
            ErrorClass::Unresolved => None,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.steps.iter().map(|s| s.residual.max(s.transfer_residual)).fold(0.0, f64::max)
    }
}

pub fn push_sequence(a: &MpsTensor, v: &CMat, cfg: &Config) -> Result<PushRecord> {
    let ctx = PushContext::new(a, &cfg.tol)?;
    push_sequence_ctx(&ctx, v, cfg.max_depth)
}

pub fn push_sequence_ctx(ctx: &PushContext, v: &CMat, max_depth: usize) -> Result<PushRecord> {
    let mut steps: Vec<PushStep> = Vec::new();
    let mut cur = v.clone();
    for n in 0..max_depth {
        let step = match ctx.push(&cur) {
            Ok(s) => s,
            Err(GlueError::NoPush { residual }) => {
                return Ok(PushRecord {
                    steps,
                    classification: ErrorClass::Unresolved,
                    trivialize_index: None,
                    failure: Some(format!("no push at depth {n} (best residual {residual:.3e})")),
                })
            }
            Err(e) => return Err(e),
        };
        let out = step.v_out.clone();
        steps.push(step);
        for k in 0..=n {
            if equal_up_to_phase(&out, &steps[k].v_in, 1e-9) {
                let period = n + 1 - k;
                let classification = if period == 1 && k == 0 {
                    ErrorClass::TopologicalUniform
                } else {
                    ErrorClass::TopologicalPeriodic { period, preperiod: k }
                };
                return Ok(PushRecord { steps, classification, trivialize_index: None, failure: None });
            }
        }
        if is_identity_up_to_phase(&out, 1e-9) {
            return Ok(PushRecord {
                steps,
                classification: ErrorClass::Local,
                trivialize_index: Some(n),
                failure: None,
            });
        }
        cur = out;
    }
    Ok(PushRecord {
        steps,
        classification: ErrorClass::Unresolved,
        trivialize_index: None,
        failure: Some(format!("max_depth {max_depth} reached")),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    RightGluable,
    NotGluable,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::RightGluable => "right_gluable",
            Verdict::NotGluable => "not_gluable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NogoReport {
    pub nonflat: bool,
    pub fullrank: bool,
    pub nogo: bool,
    pub numerical_rank: usize,
    pub spectrum: Vec<f64>,
}

pub fn nogo_check(a: &MpsTensor, tol: &Tolerances) -> Result<NogoReport> {
    let spec = mps::entanglement_spectrum(a)?;
    let tm = mps::transfer_matrix_with(a, tol.rank_tol)?;
    let nonflat = !spec.is_flat(tol.flat_tol);
    let fullrank = tm.numerical_rank == tm.dim;
    Ok(NogoReport {
        nonflat,
        fullrank,
        nogo: nonflat && fullrank,
        numerical_rank: tm.numerical_rank,
        spectrum: spec.values,
    })
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub flat_spectrum: bool,
    pub correlation_zeros: bool,
    pub nogo_triggered: bool,
}

#[derive(Clone, Debug)]
pub struct GluabilityReport {
    pub verdict: Verdict,
    pub labels: Vec<String>,
    pub per_error: Vec<PushRecord>,
    /// Right-canonical residual of the input tensor.
    pub canonical_residual: f64,
    pub basis_preserved: bool,
    pub diagnostics: Diagnostics,
    pub spectrum: Option<SchmidtSpectrum>,
    pub correlation_eigenvalues: Vec<C64>,
    pub numerical_rank: usize,
    pub degenerate: bool,
    /// The tensor the pushes were computed on (Hermitian gauge of the input).
    pub tensor: MpsTensor,
    pub notes: Vec<String>,
}

impl GluabilityReport {
    pub fn record(&self, label: &str) -> Option<&PushRecord> {
        self.labels.iter().position(|l| l == label).map(|i| &self.per_error[i])
    }
}

fn basis_preserved(records: &[PushRecord], chi: usize) -> bool {
    if records.iter().any(|r| r.classification == ErrorClass::Unresolved) {
        return false;
    }
    let mut depth = 1usize;
    let mut lcm = 1usize;
    for r in records {
        depth = depth.max(r.steps.len() + 1);
        if let ErrorClass::TopologicalPeriodic { period, .. } = r.classification {
            lcm = lcm / linalg::gcd(lcm, period) * period;
            lcm = lcm.min(64);
        }
    }
    for n in 0..(depth + lcm) {
        let ops: Vec<CMat> = records.iter().map(|r| r.operator_at(n).unwrap()).collect();
        for a in 0..ops.len() {
            for b in 0..ops.len() {
                let want = if a == b { chi as f64 } else { 0.0 };
                if (hs(&ops[a], &ops[b]) - c(want, 0.0)).norm() > 1e-8 {
                    return false;
                }
            }
        }
    }
    true
}

/// Push every basis element through the tensor and decide right-gluability.
pub fn gluability_check(a: &MpsTensor, basis: &ErrorBasis, cfg: &Config) -> GluabilityReport {
    let canonical_residual = a.right_canonical_residual();
    let mut notes = Vec::new();
    let inconclusive = |notes: Vec<String>, t: MpsTensor| GluabilityReport {
        verdict: Verdict::Inconclusive,
        labels: basis.labels.clone(),
        per_error: vec![],
        canonical_residual,
        basis_preserved: false,
        diagnostics: Diagnostics::default(),
        spectrum: None,
        correlation_eigenvalues: vec![],
        numerical_rank: 0,
        degenerate: false,
        tensor: t,
        notes,
    };
    if basis.chi != a.chi() {
        notes.push(format!("basis chi {} does not match tensor chi {}", basis.chi, a.chi()));
        return inconclusive(notes, a.clone());
    }
    let tensor = if canonical_residual > cfg.tol.canonical_tol {
        match mps::hermitian_gauge(a) {
            Ok((t, _)) => {
                notes.push("input was not right-canonical; Hermitian gauge applied".into());
                t
            }
            Err(e) => {
                notes.push(format!("canonicalization failed: {e}"));
                return inconclusive(notes, a.clone());
            }
        }
    } else {
        a.clone()
    };
    let val = crate::basis::validate(basis);
    if !val.unitary {
        notes.push("basis is not unitary".into());
        return inconclusive(notes, tensor);
    }
    let ctx = match PushContext::new(&tensor, &cfg.tol) {
        Ok(c) => c.with_hints(basis.ops.clone()),
        Err(e) => {
            notes.push(e.to_string());
            return inconclusive(notes, tensor);
        }
    };
    let pool = thread_pool(cfg.threads);
    let results: Vec<Result<PushRecord>> = pool.install(|| {
        basis
            .ops
            .par_iter()
            .map(|v| push_sequence_ctx(&ctx, v, cfg.max_depth))
            .collect()
    });
    let mut per_error = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(rec) => per_error.push(rec),
            Err(e) => {
                notes.push(e.to_string());
                return inconclusive(notes, tensor);
            }
        }
    }
    let tm = mps::transfer_matrix_with(&tensor, cfg.tol.rank_tol).ok();
    let (ev, rank) = tm.map(|t| (t.eigenvalues, t.numerical_rank)).unwrap_or((vec![], 0));
    let chi2 = tensor.chi() * tensor.chi();
    let can = mps::right_canonicalize(&tensor);
    let (spectrum, degenerate) = match &can {
        Ok(cn) => (Some(cn.spectrum.clone()), cn.degenerate()),
        Err(e) => {
            notes.push(format!("no canonical spectrum: {e}"));
            (None, false)
        }
    };
    let flat = spectrum.as_ref().map(|s| s.is_flat(cfg.tol.flat_tol)).unwrap_or(false);
    let diagnostics = Diagnostics {
        flat_spectrum: flat,
        correlation_zeros: rank < chi2,
        nogo_triggered: spectrum.is_some() && !flat && rank == chi2,
    };
    let any_nopush = per_error.iter().any(|r| r.failure.as_deref().map(|f| f.starts_with("no push")).unwrap_or(false));
    let all_resolved = per_error.iter().all(|r| r.classification != ErrorClass::Unresolved);
    let minimal = spectrum.as_ref().map(|s| s.values.iter().all(|&x| x > 1e-12)).unwrap_or(false);
    let verdict = if any_nopush {
        Verdict::NotGluable
    } else if all_resolved && minimal {
        Verdict::RightGluable
    } else {
        Verdict::Inconclusive
    };
    let preserved = basis_preserved(&per_error, tensor.chi());
    GluabilityReport {
        verdict,
        labels: basis.labels.clone(),
        per_error,
        canonical_residual,
        basis_preserved: preserved,
        diagnostics,
        spectrum,
        correlation_eigenvalues: ev,
        numerical_rank: rank,
        degenerate,
        tensor,
        notes,
    }
}

/// Mirror check: reverse the virtual legs (A^s → A^{sT}) and test right-gluability.
pub fn left_gluability_check(a: &MpsTensor, basis: &ErrorBasis, cfg: &Config) -> Result<GluabilityReport> {
    let mats: Vec<CMat> = a.matrices().iter().map(|m| m.transpose()).collect();
    Ok(gluability_check(&MpsTensor::from_matrices(&mats)?, basis, cfg))
}

pub(crate) fn thread_pool(threads: usize) -> rayon::ThreadPool {
    let n = if threads > 0 {
        threads
    } else {
        std::env::var("GLUEKIT_THREADS").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool")
}

/// Vectorized (V⊗V̄) for convenience in tests.
pub fn doubled(v: &CMat) -> CMat {
    kron(v, &v.map(|z| z.conj()))
}
