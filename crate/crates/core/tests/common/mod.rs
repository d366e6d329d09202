//! Brute-force wavefunctions built gate by gate, independent of the MPS code.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C;

pub fn cx(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Dense register, most significant qudit first.
#[derive(Clone, Debug)]
pub struct Reg {
    pub dims: Vec<usize>,
    pub psi: Vec<C>,
}

impl Reg {
    pub fn product(states: &[Vec<C>]) -> Reg {
        let mut psi = vec![cx(1.0, 0.0)];
        for s in states {
            psi = psi.iter().flat_map(|a| s.iter().map(move |b| a * b)).collect();
        }
        Reg { dims: states.iter().map(|s| s.len()).collect(), psi }
    }

    fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        out
    }

    fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (d, n)| acc * n + d)
    }

    /// op given row-major as op[i][j].
    pub fn apply1(&mut self, pos: usize, op: &[Vec<C>]) {
        let mut out = vec![cx(0.0, 0.0); self.psi.len()];
        for (idx, &amp) in self.psi.iter().enumerate() {
            if amp == cx(0.0, 0.0) {
                continue;
            }
            let mut dg = self.digits(idx);
            let j = dg[pos];
            for (i, row) in op.iter().enumerate() {
                dg[pos] = i;
                out[self.index(&dg)] += row[j] * amp;
            }
        }
        self.psi = out;
    }

    /// Diagonal two-qudit gate |a,b⟩ → f(a,b)|a,b⟩.
    pub fn diag2(&mut self, p: usize, q: usize, f: impl Fn(usize, usize) -> C) {
        for idx in 0..self.psi.len() {
            let dg = self.digits(idx);
            self.psi[idx] *= f(dg[p], dg[q]);
        }
    }

    pub fn diag1(&mut self, p: usize, f: impl Fn(usize) -> C) {
        for idx in 0..self.psi.len() {
            let dg = self.digits(idx);
            self.psi[idx] *= f(dg[p]);
        }
    }

    /// |a⟩|b⟩ → |a⟩|b + a⟩ on (src, dst).
    pub fn add_into(&mut self, src: usize, dst: usize) {
        let mut out = vec![cx(0.0, 0.0); self.psi.len()];
        for (idx, &amp) in self.psi.iter().enumerate() {
            let mut dg = self.digits(idx);
            dg[dst] = (dg[dst] + dg[src]) % self.dims[dst];
            out[self.index(&dg)] += amp;
        }
        self.psi = out;
    }
}

pub fn basis_state(n: usize, k: usize) -> Vec<C> {
    (0..n).map(|i| cx(if i == k { 1.0 } else { 0.0 }, 0.0)).collect()
}

pub fn plus(n: usize) -> Vec<C> {
    vec![cx(1.0 / (n as f64).sqrt(), 0.0); n]
}

/// |⟨a|b⟩|² / (‖a‖²‖b‖²).
pub fn overlap(a: &[C], b: &[C]) -> f64 {
    let ip: C = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    ip.norm_sqr() / (na * nb)
}

/// cosh β 𝟙 + sinh β X.
pub fn exp_beta_x(beta: f64) -> Vec<Vec<C>> {
    let (ch, sh) = (cx(beta.cosh(), 0.0), cx(beta.sinh(), 0.0));
    vec![vec![ch, sh], vec![sh, ch]]
}

/// e^{β(X + X†)} for the N-state shift, through its Fourier eigenbasis.
pub fn exp_shift_sum(n: usize, beta: f64) -> Vec<Vec<C>> {
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    (0..n)
                        .map(|k| {
                            let th = 2.0 * PI * k as f64 / n as f64;
                            cx(0.0, th * (a as f64 - b as f64)).exp() * (2.0 * beta * th.cos()).exp()
                        })
                        .sum::<C>()
                        / n as f64
                })
                .collect()
        })
        .collect()
}

fn chain_positions(n: usize) -> (usize, Vec<usize>, usize) {
    (0, (1..=n).collect(), n + 1)
}

/// (𝟙 ⊗ e^{βX}^{⊗n} ⊗ 𝟙)|GHZ_{n+2}⟩ on (l, s_1..s_n, r).
pub fn ghz_oracle(beta: f64, n: usize) -> Vec<C> {
    let mut psi = vec![cx(0.0, 0.0); 1 << (n + 2)];
    psi[0] = cx(1.0, 0.0);
    psi[(1 << (n + 2)) - 1] = cx(1.0, 0.0);
    let mut reg = Reg { dims: vec![2; n + 2], psi };
    for p in 1..=n {
        reg.apply1(p, &exp_beta_x(beta));
    }
    reg.psi
}

/// Sites and right leg in a |+⟩ chain with two-body weights w, left leg a copy of s_1,
/// then the on-site map g.
fn chain_oracle(
    dim: usize,
    n: usize,
    w: impl Fn(usize, usize) -> C,
    onsite_phase: impl Fn(usize) -> C,
    g: Option<Vec<Vec<C>>>,
) -> Vec<C> {
    let mut states = vec![basis_state(dim, 0)];
    for _ in 0..=n {
        states.push(plus(dim));
    }
    let mut reg = Reg::product(&states);
    let (l, sites, r) = chain_positions(n);
    for k in 0..n {
        let next = if k + 1 < n { sites[k + 1] } else { r };
        reg.diag2(sites[k], next, &w);
        reg.diag1(sites[k], &onsite_phase);
    }
    reg.add_into(sites[0], l);
    if let Some(g) = g {
        for &p in &sites {
            reg.apply1(p, &g);
        }
    }
    reg.psi
}

/// CZ chain on |+⟩, e^{βX} on every site.
pub fn cluster_oracle(beta: f64, n: usize) -> Vec<C> {
    chain_oracle(
        2,
        n,
        |a, b| cx(if a * b == 1 { -1.0 } else { 1.0 }, 0.0),
        |_| cx(1.0, 0.0),
        Some(exp_beta_x(beta)),
    )
}

/// e^{βΣZZ}|+…+⟩.
pub fn trivial_oracle(beta: f64, n: usize) -> Vec<C> {
    chain_oracle(
        2,
        n,
        |a, b| cx((beta * if a == b { 1.0 } else { -1.0 }).exp(), 0.0),
        |_| cx(1.0, 0.0),
        None,
    )
}

/// e^{βX} on every site of the β′ trivial state.
pub fn nogo_oracle(beta: f64, beta_prime: f64, n: usize) -> Vec<C> {
    let mut reg = Reg { dims: vec![2; n + 2], psi: trivial_oracle(beta_prime, n) };
    for p in 1..=n {
        reg.apply1(p, &exp_beta_x(beta));
    }
    reg.psi
}

/// Controlled clock phases ω^{ηab}, on-site ω^{−ηa²}, then e^{β(X+X†)}.
pub fn dipole_oracle(big_n: usize, eta: usize, beta: f64, n: usize) -> Vec<C> {
    let om = |k: i64| {
        let k = k.rem_euclid(big_n as i64) as f64;
        cx(0.0, 2.0 * PI * k / big_n as f64).exp()
    };
    let e = eta as i64;
    chain_oracle(
        big_n,
        n,
        |a, b| om(e * a as i64 * b as i64),
        |a| om(-e * (a * a) as i64),
        Some(exp_shift_sum(big_n, beta)),
    )
}

/// Valence bonds |Φ⟩ between neighbouring sites, each site projected by
/// P = Σ_a |a⟩ vec(σ^a)† with σ = (0, X, Y, Z)/√3. Register (l, s_1..s_n, r).
pub fn aklt_oracle(n: usize) -> Vec<C> {
    let s = 1.0 / 3f64.sqrt();
    let sig: [[[C; 2]; 2]; 4] = [
        [[cx(0.0, 0.0); 2]; 2],
        [[cx(0.0, 0.0), cx(s, 0.0)], [cx(s, 0.0), cx(0.0, 0.0)]],
        [[cx(0.0, 0.0), cx(0.0, -s)], [cx(0.0, s), cx(0.0, 0.0)]],
        [[cx(s, 0.0), cx(0.0, 0.0)], [cx(0.0, 0.0), cx(-s, 0.0)]],
    ];
    // virtual register: (l, [a_1, b_1], [a_2, b_2], ..., [a_n, b_n], r) with bonds (b_k, a_{k+1}) and (l,a_1), (b_n,r)
    let nv = 2 * n + 2;
    let mut psi = vec![cx(0.0, 0.0); 1 << nv];
    for bonds in 0..(1usize << (n + 1)) {
        let mut idx = 0usize;
        for k in 0..=n {
            let bit = (bonds >> k) & 1;
            idx = (idx << 2) | (bit << 1) | bit;
        }
        psi[idx] = cx(1.0, 0.0);
    }
    // contract pairs (a_k, b_k) into a physical index of dimension 4
    let mut out = vec![cx(0.0, 0.0); 2 * 4usize.pow(n as u32) * 2];
    for (idx, &amp) in psi.iter().enumerate() {
        if amp == cx(0.0, 0.0) {
            continue;
        }
        let bits: Vec<usize> = (0..nv).map(|k| (idx >> (nv - 1 - k)) & 1).collect();
        for phys in 0..4usize.pow(n as u32) {
            let mut w = amp;
            let mut rest = phys;
            let mut ss = vec![0; n];
            for k in (0..n).rev() {
                ss[k] = rest % 4;
                rest /= 4;
            }
            for k in 0..n {
                w *= sig[ss[k]][bits[1 + 2 * k]][bits[2 + 2 * k]];
            }
            if w == cx(0.0, 0.0) {
                continue;
            }
            out[(bits[0] * 4usize.pow(n as u32) + phys) * 2 + bits[nv - 1]] += w;
        }
    }
    out
}
