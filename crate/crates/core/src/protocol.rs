//! Statevector simulation of the measure-and-correct preparation protocol.
//!
//! Registers are ordered most significant first. A chain of clusters is
//! (l_0, s_0, r_0, l_1, s_1, r_1, ...); measuring the bond (r_k, l_{k+1})
//! removes both qudits. Outcome α projects onto (V̄_α ⊗ 𝟙)Σ|ii⟩/√χ, which
//! inserts V_α on the bond.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::basis::ErrorBasis;
use crate::config::Config;
use crate::error::{GlueError, Result};
use crate::linalg::{eye, CMat, C64, ZERO};
use crate::mps::{self, Boundary, MpsTensor};
use crate::push::{thread_pool, PushContext};

#[derive(Clone, Debug)]
pub struct ChainState {
    pub dims: Vec<usize>,
    pub amplitudes: Vec<C64>,
}

impl ChainState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for z in self.amplitudes.iter_mut() {
                *z *= inv;
                if z.norm_sqr() < 1e-300 {
                    *z = ZERO;
                }
            }
        }
    }

    /// self ⊗ other, with self more significant.
    pub fn tensor(&self, other: &ChainState) -> ChainState {
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for &a in &self.amplitudes {
            for &b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        ChainState { dims, amplitudes: amps }
    }

    fn split(&self, pos: usize) -> (usize, usize, usize) {
        let pre: usize = self.dims[..pos].iter().product();
        let post: usize = self.dims[pos + 1..].iter().product();
        (pre, self.dims[pos], post)
    }

    /// Apply a single-qudit operator at register position `pos`.
    pub fn apply(&mut self, pos: usize, op: &CMat) -> Result<()> {
        let (pre, d, post) = self.split(pos);
        if op.shape() != (d, d) {
            return Err(GlueError::DimensionMismatch { expected: d, got: op.nrows() });
        }
        let mut col = vec![ZERO; d];
        for p in 0..pre {
            for q in 0..post {
                for (k, v) in col.iter_mut().enumerate() {
                    *v = self.amplitudes[(p * d + k) * post + q];
                }
                for i in 0..d {
                    let mut acc = ZERO;
                    for (k, v) in col.iter().enumerate() {
                        acc += op[(i, k)] * v;
                    }
                    self.amplitudes[(p * d + i) * post + q] = acc;
                }
            }
        }
        Ok(())
    }

    /// Unnormalized post-measurement states of the qudit pair (pos, pos+1)
    /// for every outcome, with the pair removed from the register.
    fn project_pair(&self, pos: usize, basis: &ErrorBasis) -> Result<Vec<Vec<C64>>> {
        let chi = basis.chi;
        if pos + 1 >= self.dims.len() || self.dims[pos] != chi || self.dims[pos + 1] != chi {
            return Err(GlueError::DimensionMismatch { expected: chi, got: self.dims.get(pos).copied().unwrap_or(0) });
        }
        let pre: usize = self.dims[..pos].iter().product();
        let post: usize = self.dims[pos + 2..].iter().product();
        let s = 1.0 / (chi as f64).sqrt();
        Ok(basis
            .ops
            .iter()
            .map(|v| {
                let mut out = vec![ZERO; pre * post];
                for p in 0..pre {
                    for r in 0..chi {
                        for l in 0..chi {
                            let w = v[(r, l)] * s;
                            if w == ZERO {
                                continue;
                            }
                            let base = ((p * chi + r) * chi + l) * post;
                            let o = &mut out[p * post..(p + 1) * post];
                            for (q, x) in o.iter_mut().enumerate() {
                                *x += w * self.amplitudes[base + q];
                            }
                        }
                    }
                }
                out
            })
            .collect())
    }
}

/// How a bond outcome is chosen.
#[derive(Clone, Copy, Debug)]
pub enum Choice {
    /// Born-rule sample using a uniform draw in [0, 1).
    Sample(f64),
    Forced(usize),
}

#[derive(Clone, Debug)]
pub struct BondResult {
    pub outcome: usize,
    pub prob: f64,
    pub probs: Vec<f64>,
}

/// Measure the qudit pair (pos, pos+1) in the basis; the pair is removed.
pub fn measure_pair(state: &mut ChainState, pos: usize, basis: &ErrorBasis, choice: Choice) -> Result<BondResult> {
    let branches = state.project_pair(pos, basis)?;
    let total = state.norm().powi(2);
    let probs: Vec<f64> = branches
        .iter()
        .map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>() / total)
        .collect();
    if probs.iter().all(|&p| p < 1e-14) {
        return Err(GlueError::DegenerateMeasurement("all outcome probabilities vanish".into()));
    }
    let outcome = match choice {
        Choice::Forced(a) => {
            if a >= probs.len() {
                return Err(GlueError::InvalidArg(format!("outcome {a} out of range")));
            }
            if probs[a] < 1e-14 {
                return Err(GlueError::DegenerateMeasurement(format!("forced outcome {a} has zero probability")));
            }
            a
        }
        Choice::Sample(u) => {
            let mut acc = 0.0;
            let mut pick = None;
            for (a, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc && p > 0.0 {
                    pick = Some(a);
                    break;
                }
            }
            pick.unwrap_or_else(|| probs.iter().rposition(|&p| p > 0.0).unwrap())
        }
    };
    let mut dims = state.dims.clone();
    dims.drain(pos..pos + 2);
    *state = ChainState { dims, amplitudes: branches.into_iter().nth(outcome).unwrap() };
    state.normalize();
    Ok(BondResult { outcome, prob: probs[outcome], probs })
}

fn cluster_state(a: &MpsTensor) -> ChainState {
    let mut st = ChainState { dims: vec![a.chi(), a.d(), a.chi()], amplitudes: a.data().to_vec() };
    st.normalize();
    st
}

fn guard_check(requested: u128, guard: u128) -> Result<()> {
    if requested > guard {
        return Err(GlueError::TooLarge { requested, limit: guard });
    }
    Ok(())
}

/// Product of n normalized clusters.
pub fn make_clusters(a: &MpsTensor, n: usize, guard: u128) -> Result<ChainState> {
    if n == 0 {
        return Err(GlueError::InvalidArg("need at least one cluster".into()));
    }
    let per = (a.chi() * a.chi() * a.d()) as u128;
    guard_check(per.saturating_pow(n as u32), guard)?;
    let cl = cluster_state(a);
    let mut st = cl.clone();
    for _ in 1..n {
        st = st.tensor(&cl);
    }
    Ok(st)
}

fn bond_draw(seed: u64, trial: u64, bond: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.set_word_pos(bond as u128 * 16);
    rng.random::<f64>()
}

/// Measure every bond of a full cluster chain, left to right.
pub fn measure_bonds(state: &mut ChainState, basis: &ErrorBasis, seed: u64) -> Result<Vec<BondResult>> {
    let chi = basis.chi;
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let pos = k + 2;
        if pos + 1 >= state.dims.len() || state.dims[pos] != chi {
            break;
        }
        out.push(measure_pair(state, pos, basis, Choice::Sample(bond_draw(seed, 0, k)))?);
        k += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Corrections {
    /// Operator applied to each site's physical qudit (site 0 is always 𝟙).
    pub sites: Vec<CMat>,
    /// Operator applied to the right boundary qudit.
    pub boundary: CMat,
}

/// Left-to-right feedback: site k+1 receives u† from pushing the
/// accumulated bond operator E·V_{α_k}; the right boundary gets conj(E).
pub fn plan_corrections(ctx: &PushContext, basis: &ErrorBasis, outcomes: &[usize]) -> Result<Corrections> {
    let chi = ctx.chi();
    let d = ctx.tensor().d();
    let mut sites = vec![eye(d)];
    let mut e = eye(chi);
    for (k, &a) in outcomes.iter().enumerate() {
        let w = &e * &basis.ops[a];
        let step = ctx
            .push(&w)
            .map_err(|err| GlueError::CorrectionFailed(format!("bond {k}: {err}")))?;
        sites.push(step.u_phys.adjoint());
        e = step.v_out;
    }
    Ok(Corrections { sites, boundary: e.map(|z| z.conj()) })
}

/// Apply corrections to a chain whose bonds have all been measured,
/// register layout (l_0, s_0, ..., s_{n-1}, r_{n-1}).
pub fn apply_corrections(state: &mut ChainState, corr: &Corrections) -> Result<()> {
    for (k, u) in corr.sites.iter().enumerate() {
        state.apply(k + 1, u)?;
    }
    let last = state.dims.len() - 1;
    state.apply(last, &corr.boundary)
}

pub fn correct(state: &mut ChainState, ctx: &PushContext, basis: &ErrorBasis, outcomes: &[usize]) -> Result<Corrections> {
    let corr = plan_corrections(ctx, basis, outcomes)?;
    apply_corrections(state, &corr)?;
    Ok(corr)
}

/// |⟨target|state⟩|² against the open-boundary MPS state.
pub fn fidelity(state: &ChainState, a: &MpsTensor, guard: u128) -> Result<f64> {
    let body = state.dims.len().saturating_sub(2);
    let target = mps::expand_statevector(a, body, &Boundary::Open, guard)?;
    fidelity_against(state, target.as_slice())
}

pub fn fidelity_against(state: &ChainState, target: &[C64]) -> Result<f64> {
    if target.len() != state.amplitudes.len() {
        return Err(GlueError::DimensionMismatch { expected: target.len(), got: state.amplitudes.len() });
    }
    let ov: C64 = target.iter().zip(&state.amplitudes).map(|(t, s)| t.conj() * s).sum();
    let n = state.norm();
    Ok(ov.norm_sqr() / (n * n))
}

#[derive(Clone, Debug)]
pub struct ProtocolTrace {
    pub outcomes: Vec<usize>,
    pub probs: Vec<f64>,
    /// Born probabilities of all outcomes at each bond.
    pub bond_probs: Vec<Vec<f64>>,
    pub corrections: Corrections,
    pub fidelity: f64,
}

/// Run one protocol instance, gluing clusters one at a time.
/// `choose(bond)` picks each outcome.
pub fn run_protocol(
    ctx: &PushContext,
    basis: &ErrorBasis,
    n: usize,
    target: &[C64],
    mut choose: impl FnMut(usize) -> Choice,
) -> Result<ProtocolTrace> {
    let a = ctx.tensor();
    let cl = cluster_state(a);
    let mut st = cl.clone();
    let mut outcomes = Vec::new();
    let mut probs = Vec::new();
    let mut bond_probs = Vec::new();
    for k in 0..n.saturating_sub(1) {
        st = st.tensor(&cl);
        let pos = st.dims.len() - 4;
        let r = measure_pair(&mut st, pos, basis, choose(k))?;
        outcomes.push(r.outcome);
        probs.push(r.prob);
        bond_probs.push(r.probs);
    }
    let corr = correct(&mut st, ctx, basis, &outcomes)?;
    let fid = fidelity_against(&st, target)?;
    Ok(ProtocolTrace { outcomes, probs, bond_probs, corrections: corr, fidelity: fid })
}

#[derive(Clone, Debug)]
pub struct TrialStats {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    /// max |p_α − 1/χ²| over every computed Born probability.
    pub max_prob_deviation: f64,
    pub histogram: Vec<u64>,
    pub labels: Vec<String>,
    pub traces: Vec<ProtocolTrace>,
}

/// Chi-square statistic of counts against the uniform distribution, with its p-value.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, usize, f64) {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    if k < 2 || total == 0 {
        return (0.0, k.saturating_sub(1), 1.0);
    }
    let e = total as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
    let dof = k - 1;
    let p = 1.0 - ChiSquared::new(dof as f64).expect("dof > 0").cdf(stat);
    (stat, dof, p)
}

/// Monte Carlo over independent trials keyed by (seed, trial, bond).
pub fn run_trials(a: &MpsTensor, basis: &ErrorBasis, n: usize, trials: usize, cfg: &Config) -> Result<TrialStats> {
    if n == 0 || trials == 0 {
        return Err(GlueError::InvalidArg("sites and trials must be positive".into()));
    }
    if basis.chi != a.chi() {
        return Err(GlueError::DimensionMismatch { expected: a.chi(), got: basis.chi });
    }
    let (chi, d) = (a.chi() as u128, a.d() as u128);
    guard_check(chi.pow(4).saturating_mul(d.saturating_pow(n as u32)), cfg.memory_guard)?;
    let a = if a.right_canonical_residual() > cfg.tol.canonical_tol {
        mps::hermitian_gauge(a)?.0
    } else {
        a.clone()
    };
    let ctx = PushContext::new(&a, &cfg.tol)?.with_hints(basis.ops.clone());
    let target = mps::expand_statevector(&a, n, &Boundary::Open, cfg.memory_guard)?;
    let seed = cfg.seed;
    let pool = thread_pool(cfg.threads);
    let results: Vec<Result<ProtocolTrace>> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                run_protocol(&ctx, basis, n, target.as_slice(), |bond| {
                    Choice::Sample(bond_draw(seed, t as u64, bond))
                })
            })
            .collect()
    });
    let traces: Vec<ProtocolTrace> = results.into_iter().collect::<Result<_>>()?;
    let k = basis.len();
    let mut histogram = vec![0u64; k];
    let uniform = 1.0 / k as f64;
    let mut dev: f64 = 0.0;
    for tr in &traces {
        for &o in &tr.outcomes {
            histogram[o] += 1;
        }
        for bp in &tr.bond_probs {
            for &p in bp {
                dev = dev.max((p - uniform).abs());
            }
        }
    }
    let (chi_square, dof, p_value) = chi_square_uniform(&histogram);
    let min_fidelity = traces.iter().map(|t| t.fidelity).fold(f64::INFINITY, f64::min);
    let mean_fidelity = traces.iter().map(|t| t.fidelity).sum::<f64>() / trials as f64;
    Ok(TrialStats {
        n,
        trials,
        seed,
        min_fidelity,
        mean_fidelity,
        chi_square,
        dof,
        p_value,
        max_prob_deviation: dev,
        histogram,
        labels: basis.labels.clone(),
        traces,
    })
}
