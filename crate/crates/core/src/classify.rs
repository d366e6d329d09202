//! Commutant families, the abelian t/μ parameterizations, and SPT diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::basis::{clock, omega, phase_table, shift, ErrorBasis, PhaseTable};
use crate::config::Config;
use crate::error::{GlueError, Result};
use crate::linalg::{
    c, eye, frob, herm_eig, hs, is_identity_up_to_phase, kron, proportional, sqrtm_psd, CMat, C64,
};
use crate::mps::{self, MpsTensor};
use crate::push::{gluability_check, push_sequence, ErrorClass, GluabilityReport, PushRecord, Verdict};

/// S = Vᵀ ⊗ V'†; the definite form of a tensor with V A = U A V' commutes with it.
pub fn pair_operator(v: &CMat, v_next: &CMat) -> CMat {
    kron(&v.transpose(), &v_next.adjoint())
}

#[derive(Clone, Debug)]
pub struct CommutantBasis {
    pub dim: usize,
    pub generators: Vec<CMat>,
    /// Hilbert-Schmidt orthonormal.
    pub basis: Vec<CMat>,
    /// max ‖[S_i, B_k]‖_F.
    pub max_residual: f64,
}

impl CommutantBasis {
    /// Orthogonal projection of `x` onto the span; returns the projection and the residual norm.
    pub fn project(&self, x: &CMat) -> (CMat, f64) {
        let mut p = CMat::zeros(x.nrows(), x.ncols());
        for b in &self.basis {
            p += b * hs(b, x);
        }
        let r = frob(&(x - &p));
        (p, r)
    }

    pub fn contains(&self, x: &CMat, tol: f64) -> bool {
        self.project(x).1 <= tol * frob(x).max(1.0)
    }
}

/// Joint commutant of square matrices, from the null space of
/// Σ_i K_i†K_i with K_i = S_i⊗𝟙 − 𝟙⊗S_iᵀ.
pub fn commutant(mats: &[CMat]) -> Result<CommutantBasis> {
    let n = match mats.first() {
        Some(m) => m.nrows(),
        None => return Err(GlueError::InvalidArg("no generators".into())),
    };
    for m in mats {
        if m.shape() != (n, n) {
            return Err(GlueError::InvalidArg("generators must be square of equal size".into()));
        }
    }
    let id = eye(n);
    let mut g = CMat::zeros(n * n, n * n);
    for s in mats {
        let st = s.transpose();
        let sb = s.map(|z| z.conj());
        g += kron(&(s.adjoint() * s), &id);
        g -= kron(&s.adjoint(), &st);
        g -= kron(s, &sb);
        g += kron(&id, &(&sb * &st));
    }
    let (vals, vecs) = herm_eig(&g);
    let top = vals.first().copied().unwrap_or(0.0).max(1.0);
    let mut basis = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v <= 1e-9 * top {
            let col = vecs.column(k);
            basis.push(CMat::from_fn(n, n, |i, j| col[i * n + j]));
        }
    }
    let max_residual = basis
        .iter()
        .flat_map(|b| mats.iter().map(move |s| frob(&(s * b - b * s))))
        .fold(0.0, f64::max);
    Ok(CommutantBasis { dim: basis.len(), generators: mats.to_vec(), basis, max_residual })
}

/// The operators V^{[0]}, V^{[1]}, … of one error, given by a pre-period and one period.
#[derive(Clone, Debug)]
pub struct PushedSequence {
    pub ops: Vec<CMat>,
    /// The successor of the last operator is ops[preperiod].
    pub preperiod: usize,
}

impl PushedSequence {
    pub fn uniform(v: &CMat) -> Self {
        PushedSequence { ops: vec![v.clone()], preperiod: 0 }
    }

    /// V followed by the identity forever.
    pub fn local(v: &CMat) -> Self {
        PushedSequence { ops: vec![v.clone(), eye(v.nrows())], preperiod: 1 }
    }

    pub fn from_record(r: &PushRecord) -> Result<Self> {
        let ops: Vec<CMat> = r.steps.iter().map(|s| s.v_in.clone()).collect();
        match &r.classification {
            ErrorClass::Local => {
                let mut ops = ops;
                let n = ops.len();
                ops.push(eye(ops[0].nrows()));
                Ok(PushedSequence { ops, preperiod: n })
            }
            ErrorClass::TopologicalUniform => Ok(PushedSequence { ops, preperiod: 0 }),
            ErrorClass::TopologicalPeriodic { preperiod, .. } => Ok(PushedSequence { ops, preperiod: *preperiod }),
            ErrorClass::Unresolved => Err(GlueError::InvalidArg("unresolved push record".into())),
        }
    }

    /// Consecutive pairs (V^{[n]}, V^{[n+1]}) covering one full period.
    pub fn pairs(&self) -> Vec<(CMat, CMat)> {
        let len = self.ops.len();
        (0..len)
            .map(|k| {
                let next = if k + 1 < len { k + 1 } else { self.preperiod };
                (self.ops[k].clone(), self.ops[next].clone())
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Family {
    pub chi: usize,
    pub commutant: CommutantBasis,
}

/// Commutant of all pair operators of the given sequences.
pub fn gluable_family(basis: &ErrorBasis, sequences: &[PushedSequence]) -> Result<Family> {
    let val = crate::basis::validate(basis);
    if !val.unitary {
        return Err(GlueError::InvalidArg("basis is not unitary".into()));
    }
    if sequences.len() != basis.len() {
        return Err(GlueError::DimensionMismatch { expected: basis.len(), got: sequences.len() });
    }
    for s in sequences {
        if s.ops.is_empty() || s.preperiod >= s.ops.len() {
            return Err(GlueError::InvalidArg("sequence needs a non-empty period".into()));
        }
        if s.ops.iter().any(|o| o.shape() != (basis.chi, basis.chi)) {
            return Err(GlueError::DimensionMismatch { expected: basis.chi, got: s.ops[0].nrows() });
        }
    }
    let mut gens: Vec<CMat> = Vec::new();
    for s in sequences {
        for (a, b) in s.pairs() {
            let g = pair_operator(&a, &b);
            if !gens.iter().any(|h| proportional(&g, h, 1e-12).is_some()) {
                gens.push(g);
            }
        }
    }
    let cb = commutant(&gens)?;
    if cb.dim == 0 {
        return Err(GlueError::EmptyFamily);
    }
    Ok(Family { chi: basis.chi, commutant: cb })
}

/// Uniform sequences V_α → V_α for every basis element.
pub fn uniform_sequences(basis: &ErrorBasis) -> Vec<PushedSequence> {
    basis.ops.iter().map(PushedSequence::uniform).collect()
}

impl Family {
    /// Draw a random member: H Hermitian in the commutant, 𝔸 = |H|, rows of 𝔸 as A^s.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<MpsTensor> {
        let n = self.chi * self.chi;
        let mut h = CMat::zeros(n, n);
        for b in &self.commutant.basis {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h += b * c(re, im);
        }
        let h = (&h + h.adjoint()) * c(0.5, 0.0);
        let a = sqrtm_psd(&(h.adjoint() * &h));
        if frob(&a) < 1e-12 {
            return Err(GlueError::EmptyFamily);
        }
        mps::normalize(&MpsTensor::from_phys_matrix(&a, self.chi)?)
    }

    pub fn sample_seeded(&self, seed: u64, count: usize) -> Result<Vec<MpsTensor>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TVector {
    t: Vec<C64>,
}

impl TVector {
    pub fn new(t: Vec<C64>) -> Result<Self> {
        let n: f64 = t.iter().map(|z| z.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-12 {
            return Err(GlueError::InvalidArg(format!("t is not normalized (norm² {n})")));
        }
        Ok(TVector { t })
    }

    pub fn normalized(t: Vec<C64>) -> Result<Self> {
        let n: f64 = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GlueError::InvalidArg("t vector is zero".into()));
        }
        Ok(TVector { t: t.iter().map(|z| z / n).collect() })
    }

    pub fn values(&self) -> &[C64] {
        &self.t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuVector {
    pub mu: Vec<C64>,
    /// Σ μ_α S_α is positive semidefinite.
    pub physical: bool,
}

fn require_abelian(basis: &ErrorBasis) -> Result<PhaseTable> {
    let pt = phase_table(basis);
    if !pt.abelian {
        return Err(GlueError::NonAbelianBasis);
    }
    Ok(pt)
}

/// A^α = t_α V_α (physical dimension χ²).
pub fn from_t_vector(basis: &ErrorBasis, t: &TVector) -> Result<MpsTensor> {
    require_abelian(basis)?;
    if t.t.len() != basis.len() {
        return Err(GlueError::DimensionMismatch { expected: basis.len(), got: t.t.len() });
    }
    let mats: Vec<CMat> = basis.ops.iter().zip(&t.t).map(|(v, &ta)| v * ta).collect();
    mps::normalize(&MpsTensor::from_matrices(&mats)?)
}

/// Checked character matrix χ_{γ,α}.
fn characters(basis: &ErrorBasis) -> Result<CMat> {
    let pt = require_abelian(basis)?;
    let n = basis.len() as f64;
    let cm = pt.phases.clone();
    let dev = frob(&(&cm * cm.adjoint() - eye(basis.len()) * c(n, 0.0)));
    if dev > 1e-9 * n {
        return Err(GlueError::ConversionFailed("character matrix is singular".into()));
    }
    Ok(cm)
}

/// 𝔸 = Σ_α μ_α S_α with S_α = V_αᵀ ⊗ V_α†.
pub fn definite_form_from_mu(basis: &ErrorBasis, mu: &[C64]) -> Result<CMat> {
    if mu.len() != basis.len() {
        return Err(GlueError::DimensionMismatch { expected: basis.len(), got: mu.len() });
    }
    let n = basis.len();
    let mut a = CMat::zeros(n, n);
    for (v, &m) in basis.ops.iter().zip(mu) {
        a += pair_operator(v, v) * m;
    }
    Ok(a)
}

fn is_psd(a: &CMat) -> bool {
    let herm = frob(&(a - a.adjoint())) <= 1e-9 * frob(a).max(1.0);
    herm && herm_eig(a).0.last().map(|&x| x >= -1e-9).unwrap_or(true)
}

/// μ_α = tr(S_α† 𝔸)/χ², plus the residual of 𝔸 outside span{S_α}.
pub fn mu_from_definite_form(basis: &ErrorBasis, a: &CMat) -> Result<(MuVector, f64)> {
    let n = basis.len();
    if a.shape() != (n, n) {
        return Err(GlueError::DimensionMismatch { expected: n, got: a.nrows() });
    }
    let mu: Vec<C64> = basis
        .ops
        .iter()
        .map(|v| hs(&pair_operator(v, v), a) / c(n as f64, 0.0))
        .collect();
    let rebuilt = definite_form_from_mu(basis, &mu)?;
    let residual = frob(&(a - &rebuilt));
    Ok((MuVector { physical: is_psd(&rebuilt), mu }, residual))
}

/// μ_α = Σ_γ λ_γ χ_{γ,α} / χ² with λ = √χ·t.
pub fn t_to_mu(basis: &ErrorBasis, t: &TVector) -> Result<MuVector> {
    let cm = characters(basis)?;
    let n = basis.len();
    if t.t.len() != n {
        return Err(GlueError::DimensionMismatch { expected: n, got: t.t.len() });
    }
    let sq = (basis.chi as f64).sqrt();
    let mu: Vec<C64> = (0..n)
        .map(|a| (0..n).map(|g| t.t[g] * sq * cm[(g, a)]).sum::<C64>() / c(n as f64, 0.0))
        .collect();
    let physical = is_psd(&definite_form_from_mu(basis, &mu)?);
    Ok(MuVector { mu, physical })
}

/// λ_γ = Σ_α μ_α conj(χ_{γ,α}), normalized to a unit t-vector.
pub fn mu_to_t(basis: &ErrorBasis, mu: &MuVector) -> Result<TVector> {
    let cm = characters(basis)?;
    let n = basis.len();
    if mu.mu.len() != n {
        return Err(GlueError::DimensionMismatch { expected: n, got: mu.mu.len() });
    }
    let lam: Vec<C64> = (0..n)
        .map(|g| (0..n).map(|a| mu.mu[a] * cm[(g, a)].conj()).sum())
        .collect();
    TVector::normalized(lam)
}

#[derive(Clone, Debug)]
pub struct SymmetryGenerator {
    pub label: String,
    pub u: CMat,
    /// U restricted to the physical support is a multiple of 𝟙.
    pub virtual_symmetry: bool,
    /// tr of U on the physical support.
    pub character: C64,
}

#[derive(Clone, Debug)]
pub struct IndexGroup {
    /// Order of the closure of {V_α ⊗ V̄_α}.
    pub order: usize,
    pub abelian: bool,
    pub generators: Vec<SymmetryGenerator>,
    /// Order of the group generated by the U_α on the support, up to phase.
    pub physical_order: usize,
    pub long_range_entangled: bool,
}

fn closure(gens: &[CMat], up_to_phase: bool, cap: usize) -> Option<Vec<CMat>> {
    let n = gens.first()?.nrows();
    let same = |a: &CMat, b: &CMat| {
        if up_to_phase {
            hs(a, b).norm() / n as f64 >= 1.0 - 1e-8
        } else {
            frob(&(a - b)) <= 1e-8 * (n as f64).sqrt()
        }
    };
    let mut elems = vec![eye(n)];
    let mut frontier = vec![eye(n)];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = &x * g;
            if !elems.iter().any(|e| same(e, &y)) {
                if elems.len() >= cap {
                    return None;
                }
                elems.push(y.clone());
                frontier.push(y);
            }
        }
    }
    Some(elems)
}

/// Physical symmetry group of a uniformly gluable tensor.
pub fn index_group(report: &GluabilityReport, basis: &ErrorBasis) -> Result<IndexGroup> {
    if report.verdict != Verdict::RightGluable {
        return Err(GlueError::NotUniform(format!("verdict is {}", report.verdict.label())));
    }
    for (l, r) in report.labels.iter().zip(&report.per_error) {
        if r.classification != ErrorClass::TopologicalUniform {
            return Err(GlueError::NotUniform(format!("{l} is {}", r.classification.label())));
        }
    }
    let doubled: Vec<CMat> = basis.ops.iter().map(|v| kron(v, &v.map(|z| z.conj()))).collect();
    let elems = closure(&doubled, false, 4096)
        .ok_or_else(|| GlueError::InvalidArg("index group exceeds 4096 elements".into()))?;
    let abelian = elems
        .iter()
        .all(|a| elems.iter().all(|b| frob(&(a * b - b * a)) <= 1e-8));
    let m = report.tensor.phys_matrix();
    let (u, s, _) = crate::linalg::svd_sorted(&m);
    let r = s.iter().filter(|&&x| x > 1e-10 * s[0]).count();
    let q = u.columns(0, r).into_owned();
    let mut generators = Vec::new();
    let mut restricted = Vec::new();
    for (l, rec) in report.labels.iter().zip(&report.per_error) {
        let uu = rec.steps[0].u_phys.clone() * rec.steps[0].phase;
        let ur = q.adjoint() * &uu * &q;
        let vs = l != &report.labels[0] && is_identity_up_to_phase(&ur, 1e-9);
        generators.push(SymmetryGenerator { label: l.clone(), character: ur.trace(), u: uu, virtual_symmetry: vs });
        restricted.push(ur);
    }
    let physical_order = closure(&restricted, true, 4096).map(|e| e.len()).unwrap_or(0);
    let long_range_entangled = generators.iter().any(|g| g.virtual_symmetry);
    Ok(IndexGroup { order: elems.len(), abelian, generators, physical_order, long_range_entangled })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SptVerdict {
    NontrivialSpt,
    TrivialSpt,
    /// Degenerate dominant eigenvalue; no SPT statement is made.
    LongRangeEntangled,
    NonAbelian,
}

impl SptVerdict {
    pub fn label(self) -> &'static str {
        match self {
            SptVerdict::NontrivialSpt => "nontrivial_spt",
            SptVerdict::TrivialSpt => "trivial",
            SptVerdict::LongRangeEntangled => "long_range_entangled",
            SptVerdict::NonAbelian => "non_abelian",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SptReport {
    pub short_range: bool,
    pub abelian: bool,
    pub phases: PhaseTable,
    pub nontrivial_phases: bool,
    /// Indices α whose phases with every β are 1.
    pub projective_center: Vec<usize>,
    pub index_group: IndexGroup,
    pub verdict: SptVerdict,
}

pub fn spt_diagnostics(a: &MpsTensor, basis: &ErrorBasis, cfg: &Config) -> Result<SptReport> {
    let report = gluability_check(a, basis, cfg);
    let group = index_group(&report, basis)?;
    let ev = &report.correlation_eigenvalues;
    let dominant = ev.iter().filter(|z| z.norm() >= 1.0 - 1e-9).count();
    let short_range = dominant == 1;
    let phases = phase_table(basis);
    let abelian = phases.abelian;
    let n = basis.len();
    let nontrivial_phases = abelian && phases.phases.iter().any(|p| (p - c(1.0, 0.0)).norm() > 1e-9);
    let projective_center = if abelian {
        (0..n)
            .filter(|&a| (0..n).all(|b| (phases.get(a, b) - c(1.0, 0.0)).norm() <= 1e-9))
            .collect()
    } else {
        vec![]
    };
    let verdict = if !short_range {
        SptVerdict::LongRangeEntangled
    } else if !abelian {
        SptVerdict::NonAbelian
    } else if nontrivial_phases {
        SptVerdict::NontrivialSpt
    } else {
        SptVerdict::TrivialSpt
    };
    Ok(SptReport { short_range, abelian, phases, nontrivial_phases, projective_center, index_group: group, verdict })
}

#[derive(Clone, Debug)]
pub struct DipoleRules {
    /// (name, residual) of each verified relation.
    pub relations: Vec<(String, f64)>,
    /// Push records of 𝒵^{−η} and 𝒵^{−2η}𝒳.
    pub records: Vec<(String, PushRecord)>,
    /// Size of the group generated (up to phase) by all pushed virtual operators.
    pub generated_order: usize,
    pub spans_basis: bool,
}

/// Check the dipole push relations of the tensor A^s_{ij} = B_{si}(H_η)_{ij}:
///   𝒵^{−η} A^s = A^s 𝒳†,
///   𝒵^{−2η}𝒳 A^s = ω^{−η} Σ_{s'} (𝒳†)_{ss'} A^{s'} 𝒵^{−η},
/// and that the pushed operators generate the whole clock-shift group.
pub fn dipole_push_rules(a: &MpsTensor, n: usize, eta: usize, cfg: &Config) -> Result<DipoleRules> {
    if n < 2 {
        return Err(GlueError::InvalidArg(format!("N must be at least 2, got {n}")));
    }
    if crate::linalg::gcd(n, eta) != 1 {
        return Err(GlueError::NotCoprime { n, eta });
    }
    if a.chi() != n || a.d() != n {
        return Err(GlueError::DimensionMismatch { expected: n, got: a.chi() });
    }
    let (x, z) = (shift(n), clock(n));
    let zpow = |k: i64| -> CMat {
        let k = k.rem_euclid(n as i64) as usize;
        (0..k).fold(eye(n), |acc, _| acc * &z)
    };
    let e = eta as i64;
    let g1 = zpow(-e);
    let g2 = zpow(-2 * e) * &x;
    let mats = a.matrices();
    let xd = x.adjoint();
    let phys = |u: &CMat, s: usize| -> CMat {
        (0..n).fold(CMat::zeros(n, n), |acc, t| acc + &mats[t] * u[(s, t)])
    };
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    for s in 0..n {
        r1 += frob(&(&g1 * &mats[s] - &mats[s] * &xd)).powi(2);
        let rhs = phys(&xd, s) * zpow(-e) * omega(n, -e);
        r2 += frob(&(&g2 * &mats[s] - rhs)).powi(2);
    }
    let relations = vec![
        ("Z^-eta -> X^dag (no physical action)".to_string(), r1.sqrt()),
        ("Z^-2eta X -> Z^-eta (physical X^dag)".to_string(), r2.sqrt()),
    ];
    for (name, r) in &relations {
        if *r > 1e-9 {
            return Err(GlueError::RuleViolation(format!("{name}: residual {r:.3e}")));
        }
    }
    let mut records = Vec::new();
    let mut pushed = Vec::new();
    for (name, g) in [("Z^-eta", &g1), ("Z^-2eta X", &g2)] {
        let rec = push_sequence(a, g, cfg)?;
        if !rec.classification.is_topological() && rec.classification != ErrorClass::Local {
            return Err(GlueError::RuleViolation(format!("{name} did not resolve")));
        }
        for s in &rec.steps {
            pushed.push(s.v_in.clone());
            pushed.push(s.v_out.clone());
        }
        records.push((name.to_string(), rec));
    }
    let generated_order = closure(&pushed, true, n * n + 1).map(|e| e.len()).unwrap_or(n * n + 1);
    Ok(DipoleRules { relations, records, generated_order, spans_basis: generated_order == n * n })
}
