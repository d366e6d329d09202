//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::process::ExitCode;

use gluekit::basis::{pauli_x, pauli_y, pauli_z};
use gluekit::builders::*;
use gluekit::classify::*;
use gluekit::linalg::{c, equal_up_to_phase, eye, frob, kron, CMat, C64};
use gluekit::mps::{self, Boundary};
use gluekit::protocol::run_trials;
use gluekit::push::{gluability_check, push_once, ErrorClass, Verdict};
use gluekit::{clock_shift_basis, pauli_basis, Config, ErrorBasis, MpsTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const BETAS: [f64; 3] = [0.25, 0.5, 1.0];

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Greedy matching of two multisets of complex numbers; returns the worst distance.
fn spectrum_distance(got: &[C64], want: &[C64]) -> f64 {
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; want.len()];
    let mut worst: f64 = 0.0;
    for g in got {
        let (k, d) = want
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (g - w).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

fn real(xs: &[f64]) -> Vec<C64> {
    xs.iter().map(|&x| c(x, 0.0)).collect()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for b in BETAS {
        let t = (2.0 * b).tanh();
        let cases = [
            ("ghz", deformed_ghz(b), real(&[1.0, 1.0, t, t])),
            ("cluster", deformed_cluster(b), real(&[1.0, t.sqrt(), -t.sqrt(), -t])),
            ("trivial", deformed_trivial(b), real(&[1.0, t, 0.0, 0.0])),
        ];
        for (name, a, want) in cases {
            let ev = mps::transfer_matrix(&a).map_err(|e| e.to_string())?.eigenvalues;
            let d = spectrum_distance(&ev, &want);
            ensure(d <= 1e-9, || format!("{name} beta={b}: deviation {d:.3e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("max eigenvalue deviation {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for b in BETAS {
        let delta = 1.0 / (2.0 * b).cosh();
        let cases = [
            ("ghz", deformed_ghz(b), vec![0.5, 0.5]),
            ("cluster", deformed_cluster(b), vec![0.5, 0.5]),
            ("trivial", deformed_trivial(b), vec![(1.0 + delta) / 2.0, (1.0 - delta) / 2.0]),
        ];
        for (name, a, want) in cases {
            let mut got = mps::entanglement_spectrum(&a).map_err(|e| e.to_string())?.values;
            got.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let d = got.iter().zip(&want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
            ensure(got.len() == 2 && d <= 1e-9, || format!("{name} beta={b}: {got:?} vs {want:?}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("max Schmidt deviation {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let (x, z, id) = (pauli_x(), pauli_z(), eye(2));
    let tol = Config::default().tol;
    let mut worst: f64 = 0.0;
    for b in BETAS {
        let table: Vec<(&str, MpsTensor, &CMat, &CMat, &CMat)> = vec![
            ("ghz X", deformed_ghz(b), &x, &x, &x),
            ("ghz Z", deformed_ghz(b), &z, &z, &id),
            ("cluster X", deformed_cluster(b), &x, &z, &x),
            ("cluster Z", deformed_cluster(b), &z, &x, &id),
            ("trivial X", deformed_trivial(b), &x, &x, &x),
            ("trivial Z", deformed_trivial(b), &z, &id, &z),
        ];
        for (name, a, v, v_out, u) in table {
            let st = push_once(&a, v, &tol).map_err(|e| format!("{name} beta={b}: {e}"))?;
            ensure(equal_up_to_phase(&st.v_out, v_out, 1e-9), || format!("{name} beta={b}: wrong V'"))?;
            ensure(equal_up_to_phase(&st.u_phys, u, 1e-9), || format!("{name} beta={b}: wrong U"))?;
            let r = st.residual.max(st.transfer_residual);
            ensure(r <= 1e-9, || format!("{name} beta={b}: residual {r:.3e}"))?;
            worst = worst.max(r);
        }
    }
    Ok(format!("18 push relations, max residual {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let cfg = Config::default();
    let p = pauli_basis();
    let c3 = clock_shift_basis(3).unwrap();
    let gluable: Vec<(&str, MpsTensor, &ErrorBasis)> = vec![
        ("deformed_ghz", deformed_ghz(0.5), &p),
        ("deformed_cluster", deformed_cluster(0.5), &p),
        ("deformed_trivial", deformed_trivial(0.5), &p),
        ("aklt", aklt(), &p),
        ("dipole_spt(3,1)", dipole_spt(3, 1, 0.3).unwrap(), &c3),
    ];
    for (name, a, b) in gluable {
        let r = gluability_check(&a, b, &cfg);
        ensure(r.verdict == Verdict::RightGluable, || format!("{name}: {}", r.verdict.label()))?;
    }
    let r = gluability_check(&nogo_combined(0.4, 0.4), &p, &cfg);
    ensure(r.verdict == Verdict::NotGluable, || format!("nogo: {}", r.verdict.label()))?;
    ensure(r.diagnostics.nogo_triggered, || "nogo diagnostic not triggered".into())?;
    Ok("5 right_gluable, nogo_combined not_gluable with nogo_triggered".into())
}

fn criterion_5() -> Outcome {
    let mut cfg = Config::default();
    cfg.seed = 2024;
    let p = pauli_basis();
    let c3 = clock_shift_basis(3).unwrap();
    let cases: Vec<(&str, MpsTensor, &ErrorBasis)> = vec![
        ("deformed_ghz", deformed_ghz(0.5), &p),
        ("deformed_cluster", deformed_cluster(0.5), &p),
        ("deformed_trivial", deformed_trivial(0.5), &p),
        ("aklt", aklt(), &p),
        ("dipole_spt(3,1)", dipole_spt(3, 1, 0.3).unwrap(), &c3),
    ];
    let mut worst_f: f64 = 1.0;
    let mut worst_p: f64 = 0.0;
    let mut min_pv: f64 = 1.0;
    for (name, a, b) in cases {
        let s = run_trials(&a, b, 6, 200, &cfg).map_err(|e| format!("{name}: {e}"))?;
        ensure(s.min_fidelity >= 1.0 - 1e-9, || format!("{name}: min fidelity {}", s.min_fidelity))?;
        ensure(s.max_prob_deviation <= 1e-9, || format!("{name}: Born deviation {:.3e}", s.max_prob_deviation))?;
        ensure(s.p_value > 0.001, || format!("{name}: chi-square p = {:.4}", s.p_value))?;
        worst_f = worst_f.min(s.min_fidelity);
        worst_p = worst_p.max(s.max_prob_deviation);
        min_pv = min_pv.min(s.p_value);
    }
    Ok(format!(
        "min fidelity 1-{:.1e}, Born deviation {worst_p:.1e}, smallest p-value {min_pv:.3}",
        1.0 - worst_f
    ))
}

fn hermitian_paulis() -> Vec<CMat> {
    vec![eye(2), pauli_x(), pauli_y(), pauli_z()]
}

/// Component of m outside span(ops), by least squares on the Gram matrix.
fn outside_span(m: &CMat, ops: &[CMat]) -> f64 {
    let k = ops.len();
    let g = CMat::from_fn(k, k, |i, j| (ops[i].adjoint() * &ops[j]).trace());
    let rhs = CMat::from_fn(k, 1, |i, _| (ops[i].adjoint() * m).trace());
    let coef = g.lu().solve(&rhs).unwrap();
    let fit = (0..k).fold(CMat::zeros(m.nrows(), m.ncols()), |acc, i| acc + &ops[i] * coef[(i, 0)]);
    frob(&(m - fit))
}

fn criterion_6() -> Outcome {
    let p = pauli_basis();
    let fam = gluable_family(&p, &uniform_sequences(&p)).map_err(|e| e.to_string())?;
    ensure(fam.commutant.dim == 4, || format!("commutant dim {}", fam.commutant.dim))?;
    let span: Vec<CMat> = hermitian_paulis().iter().map(|s| kron(s, s)).collect();
    let mut off: f64 = 0.0;
    for b in &fam.commutant.basis {
        off = off.max(outside_span(b, &span));
    }
    for s in &span {
        let (proj, _) = fam.commutant.project(s);
        off = off.max(frob(&(s - proj)));
    }
    ensure(off <= 1e-9, || format!("commutant differs from span{{σ⊗σ}} by {off:.3e}"))?;

    let cfg = Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_t: f64 = 0.0;
    for k in 0..200 {
        let raw: Vec<C64> = (0..4).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let t = TVector::normalized(raw).unwrap();
        let a = from_t_vector(&p, &t).map_err(|e| e.to_string())?;
        let r = gluability_check(&a, &p, &cfg);
        ensure(r.verdict == Verdict::RightGluable, || format!("t sample {k}: {}", r.verdict.label()))?;
        let want = p
            .ops
            .iter()
            .zip(t.values())
            .fold(CMat::zeros(4, 4), |acc, (v, tv)| acc + kron(v, &v.map(|z| z.conj())) * c(tv.norm_sqr(), 0.0));
        let d = frob(&(mps::transfer_matrix_raw(&a) - want));
        ensure(d <= 1e-10, || format!("t sample {k}: transfer matrix off by {d:.3e}"))?;
        worst_t = worst_t.max(d);
    }
    Ok(format!("commutant dim 4 (span deviation {off:.1e}); 200/200 t-samples right_gluable, T deviation {worst_t:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bases = [pauli_basis(), clock_shift_basis(3).unwrap()];
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let b = &bases[k % 2];
        let raw: Vec<C64> = (0..b.len()).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let t = TVector::normalized(raw).unwrap();
        let mu = t_to_mu(b, &t).map_err(|e| e.to_string())?;
        let back = mu_to_t(b, &mu).map_err(|e| e.to_string())?;
        let d = t.values().iter().zip(back.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let mu2 = t_to_mu(b, &back).map_err(|e| e.to_string())?;
        let d2 = mu.mu.iter().zip(&mu2.mu).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        ensure(d.max(d2) <= 1e-10, || format!("input {k}: round trip error {:.3e}", d.max(d2)))?;
        worst = worst.max(d.max(d2));
    }
    // 𝔸 = Σ μ_σ σ⊗σ with μ_1 = μ_z = cosh β/2, μ_x = −μ_y = sinh β/2
    let beta: f64 = 0.5;
    let (ch, sh) = (beta.cosh() / 2.0, beta.sinh() / 2.0);
    let mus = [ch, sh, -sh, ch];
    let a_def = hermitian_paulis()
        .iter()
        .zip(mus)
        .fold(CMat::zeros(4, 4), |acc, (s, m)| acc + kron(s, s) * c(m, 0.0));
    let p = pauli_basis();
    let (mu, resid) = mu_from_definite_form(&p, &a_def).map_err(|e| e.to_string())?;
    ensure(resid <= 1e-12, || format!("definite form outside the S span by {resid:.3e}"))?;
    let t = mu_to_t(&p, &mu).map_err(|e| e.to_string())?;
    // 𝟙 and Z components only, with t_1² − t_Z² = tanh 2β (the GHZ correlation length)
    let norm = (2.0 * (2.0 * beta).cosh()).sqrt();
    let want = [c(beta.exp() / norm, 0.0), c(0.0, 0.0), c((-beta).exp() / norm, 0.0), c(0.0, 0.0)];
    let d = t.values().iter().zip(want).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    ensure(d <= 1e-9, || format!("GHZ t-vector {:?} vs {want:?}", t.values()))?;
    let ev = mps::transfer_matrix(&from_t_vector(&p, &t).unwrap()).unwrap().eigenvalues;
    let t2 = (2.0 * beta).tanh();
    let sd = spectrum_distance(&ev, &real(&[1.0, 1.0, t2, t2]));
    ensure(sd <= 1e-9, || format!("GHZ t-vector spectrum off by {sd:.3e}"))?;
    Ok(format!("100 round trips (max error {worst:.1e}); GHZ mu -> (t1,0,t4,0) within {d:.1e}"))
}

fn oracle_overlap(a: &MpsTensor, n: usize, oracle: &[C64]) -> Result<f64, String> {
    let v = mps::expand_statevector(a, n, &Boundary::Open, 1 << 24).map_err(|e| e.to_string())?;
    Ok(common::overlap(v.as_slice(), oracle))
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 1.0;
    let mut count = 0;
    for n in 1..=8 {
        for b in BETAS {
            let cases: Vec<(&str, MpsTensor, Vec<C64>)> = vec![
                ("ghz", deformed_ghz(b), common::ghz_oracle(b, n)),
                ("cluster", deformed_cluster(b), common::cluster_oracle(b, n)),
                ("trivial", deformed_trivial(b), common::trivial_oracle(b, n)),
                ("nogo", nogo_combined(b, 0.4), common::nogo_oracle(b, 0.4, n)),
            ];
            for (name, a, o) in cases {
                let f = oracle_overlap(&a, n, &o)?;
                ensure(f >= 1.0 - 1e-9, || format!("{name} n={n} beta={b}: overlap {f}"))?;
                worst = worst.min(f);
                count += 1;
            }
        }
        for (nn, eta) in [(3, 1), (3, 2)] {
            if n <= 6 {
                let f = oracle_overlap(&dipole_spt(nn, eta, 0.3).unwrap(), n, &common::dipole_oracle(nn, eta, 0.3, n))?;
                ensure(f >= 1.0 - 1e-9, || format!("dipole({nn},{eta}) n={n}: overlap {f}"))?;
                worst = worst.min(f);
                count += 1;
            }
        }
        if n <= 6 {
            let f = oracle_overlap(&aklt(), n, &common::aklt_oracle(n))?;
            ensure(f >= 1.0 - 1e-9, || format!("aklt n={n}: overlap {f}"))?;
            worst = worst.min(f);
            count += 1;
        }
    }
    let a = aklt();
    let sz = CMat::from_fn(4, 4, |i, j| match (i, j) {
        (1, 2) => c(0.0, -1.0),
        (2, 1) => c(0.0, 1.0),
        _ => c(0.0, 0.0),
    });
    for r in 1..=5 {
        let got = mps::two_point_correlator(&a, &sz, &sz, r).map_err(|e| e.to_string())?;
        let want = 4.0 / 3.0 * (-1.0f64 / 3.0).powi(r as i32);
        ensure((got - c(want, 0.0)).norm() <= 1e-10, || format!("AKLT <SzSz>({r}) = {got}, want {want}"))?;
    }
    let beta: f64 = 0.5;
    let zz = mps::two_point_correlator(&deformed_ghz(beta), &pauli_z(), &pauli_z(), 3).map_err(|e| e.to_string())?;
    let want = (1.0 / (2.0 * beta).cosh()).powi(2);
    ensure((zz - c(want, 0.0)).norm() <= 1e-7, || format!("GHZ <ZZ> = {zz}, want {want}"))?;
    Ok(format!("{count} oracle states, min overlap 1-{:.1e}; AKLT and GHZ correlators match", 1.0 - worst))
}

fn criterion_9() -> Outcome {
    let cfg = Config::default();
    let p = pauli_basis();
    let c3 = clock_shift_basis(3).unwrap();
    let (x, z) = (pauli_x(), pauli_z());
    let zx = &z * &x;

    let mut topo = 0;
    let mut worst_flat: f64 = 0.0;
    let families_a: Vec<(&ErrorBasis, Vec<PushedSequence>, usize)> = vec![
        (&p, uniform_sequences(&p), 60),
        (
            &p,
            vec![
                PushedSequence::uniform(&eye(2)),
                PushedSequence { ops: vec![x.clone(), z.clone()], preperiod: 0 },
                PushedSequence { ops: vec![z.clone(), x.clone()], preperiod: 0 },
                PushedSequence::uniform(&zx),
            ],
            40,
        ),
        (&c3, uniform_sequences(&c3), 30),
    ];
    for (seed, (b, seqs, count)) in families_a.into_iter().enumerate() {
        let fam = gluable_family(b, &seqs).map_err(|e| e.to_string())?;
        for a in fam.sample_seeded(90 + seed as u64, count).map_err(|e| e.to_string())? {
            let r = gluability_check(&a, b, &cfg);
            let all_topo = r.per_error.iter().all(|e| e.classification.is_topological());
            if r.verdict == Verdict::RightGluable && all_topo && r.basis_preserved {
                let sp = r.spectrum.as_ref().unwrap();
                let spread = sp.values.iter().map(|v| (v - 1.0 / b.chi as f64).abs()).fold(0.0, f64::max);
                ensure(spread <= 1e-8, || format!("non-flat spectrum {:?}", sp.values))?;
                worst_flat = worst_flat.max(spread);
                topo += 1;
            }
        }
    }
    ensure(topo >= 100, || format!("only {topo} all-topological samples"))?;

    let mut local = 0;
    let seqs_b = vec![
        PushedSequence::uniform(&eye(2)),
        PushedSequence::uniform(&x),
        PushedSequence::local(&z),
        PushedSequence { ops: vec![zx.clone(), x.clone()], preperiod: 1 },
    ];
    let fam = gluable_family(&p, &seqs_b).map_err(|e| e.to_string())?;
    let mut samples = fam.sample_seeded(99, 100).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        samples.push(deformed_trivial(rng.random_range(0.05..2.0)));
    }
    for a in samples {
        let r = gluability_check(&a, &p, &cfg);
        if r.per_error.iter().any(|e| e.classification == ErrorClass::Local) {
            ensure(r.numerical_rank < 4, || format!("local error but full rank {}", r.numerical_rank))?;
            local += 1;
        }
    }
    ensure(local >= 100, || format!("only {local} samples with a local error"))?;
    Ok(format!("{topo} all-topological samples flat (max {worst_flat:.1e}); {local} local-error samples rank-deficient"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 correlation spectra", criterion_1),
        ("2 entanglement spectra", criterion_2),
        ("3 push relations", criterion_3),
        ("4 gluability verdicts", criterion_4),
        ("5 protocol simulation", criterion_5),
        ("6 classifier", criterion_6),
        ("7 t/mu conversion", criterion_7),
        ("8 oracle equivalence", criterion_8),
        ("9 property suites", criterion_9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = std::time::Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
