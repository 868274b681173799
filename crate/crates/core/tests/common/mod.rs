//! Independent reference computations shared by the integration tests.
//!
//! Nothing in here calls into the crate's numerical paths except for the
//! types it returns.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<C64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule on `[a, b]`.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for k in 0..order {
            out.push((lo + 0.5 * h * (x[k] + 1.0), 0.5 * h * w[k]));
        }
    }
    out
}

/// `(1/π) ∫_Ω ⟨m|β⟩⟨β|n⟩⟨n|α⟩⟨α|m⟩ d²β` for all `n, m ≤ k_max` by direct
/// Cartesian quadrature over the lower (`Im β < 0`) or upper halfplane.
///
/// Entry `[(n, m)]` of the result is `g(m, n)` in the `⟨m|E|n⟩⟨n|α⟩⟨α|m⟩`
/// labelling.
pub fn halfplane_quadrature(alpha: f64, k_max: usize, lower: bool) -> CMat {
    let l = 9.0;
    let us = composite_rule(-l, l, 36, 12);
    let vs = if lower {
        composite_rule(-l, 0.0, 18, 12)
    } else {
        composite_rule(0.0, l, 18, 12)
    };
    let size = k_max + 1;
    let fact: Vec<f64> = (0..=size)
        .scan(1.0, |acc, k| {
            if k > 0 {
                *acc *= k as f64;
            }
            Some(*acc)
        })
        .collect();
    let mut acc = CMat::zeros(size, size);
    let mut f = vec![C64::new(0.0, 0.0); size];
    for &(u, wu) in &us {
        for &(v, wv) in &vs {
            let beta = C64::new(u, v);
            let env = (-0.5 * beta.norm_sqr()).exp();
            let mut pow = C64::new(1.0, 0.0);
            for k in 0..size {
                f[k] = pow * env / fact[k].sqrt();
                pow *= beta;
            }
            let w = wu * wv;
            for m in 0..size {
                for n in 0..size {
                    // ⟨m|β⟩⟨β|n⟩
                    acc[(n, m)] += f[m] * f[n].conj() * w;
                }
            }
        }
    }
    CMat::from_fn(size, size, |n, m| {
        let overlap = (-alpha * alpha).exp() * alpha.powi((n + m) as i32) / (fact[n] * fact[m]).sqrt();
        acc[(n, m)] / PI * overlap
    })
}

pub fn eigh(a: &CMat) -> (DVector<f64>, CMat) {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let e = SymmetricEigen::new(h);
    (e.eigenvalues, e.eigenvectors)
}

pub fn trace_norm_hermitian(a: &CMat) -> f64 {
    eigh(a).0.iter().map(|v| v.abs()).sum()
}

/// `exp(M)` by scaling and squaring of a long Taylor series.
pub fn expm_taylor(m: &CMat) -> CMat {
    let norm: f64 = m.iter().map(|z| z.norm()).sum();
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0) as u32;
    let scaled = m / C64::new(2f64.powi(squarings as i32), 0.0);
    let n = m.nrows();
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..40 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn random_complex_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMat {
    let g = random_complex_matrix(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q.clone();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = d / d.norm();
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

pub fn random_density(rng: &mut impl Rng, n: usize) -> CMat {
    let g = random_complex_matrix(rng, n, n);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn random_pure(rng: &mut impl Rng, n: usize) -> DVector<C64> {
    let v = DVector::from_fn(n, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Random Kraus operators (not trace preserving), scaled to norm ≲ 1.
pub fn random_kraus(rng: &mut impl Rng, d: usize, count: usize) -> Vec<CMat> {
    (0..count)
        .map(|_| random_complex_matrix(rng, d, d) / C64::new((2.0 * d as f64 * count as f64).sqrt(), 0.0))
        .collect()
}

/// Choi matrix `Σ_ij E(|i⟩⟨j|) ⊗ |i⟩⟨j|` of `ρ ↦ Σ K ρ K†` (output factor first).
pub fn choi_from_kraus(ops: &[CMat]) -> CMat {
    let d_out = ops[0].nrows();
    let d_in = ops[0].ncols();
    let mut j = CMat::zeros(d_out * d_in, d_out * d_in);
    for i in 0..d_in {
        for k in 0..d_in {
            let mut e = CMat::zeros(d_in, d_in);
            e[(i, k)] = C64::new(1.0, 0.0);
            let mut out = CMat::zeros(d_out, d_out);
            for op in ops {
                out += op * &e * op.adjoint();
            }
            for a in 0..d_out {
                for b in 0..d_out {
                    j[(a * d_in + i, b * d_in + k)] = out[(a, b)];
                }
            }
        }
    }
    j
}

/// `(Φ ⊗ id)(|ψ⟩⟨ψ|)` for `ψ ∈ in ⊗ ref`, straight from the Choi blocks.
pub fn extended_output(j: &CMat, psi: &DVector<C64>, d_out: usize, d_in: usize) -> CMat {
    let mut out = CMat::zeros(d_out * d_in, d_out * d_in);
    for i in 0..d_in {
        for jj in 0..d_in {
            // Φ(|i⟩⟨j|)_{ab} = J[(a,i),(b,j)]
            for k in 0..d_in {
                for l in 0..d_in {
                    let c = psi[i * d_in + k] * psi[jj * d_in + l].conj();
                    if c.norm() == 0.0 {
                        continue;
                    }
                    for a in 0..d_out {
                        for b in 0..d_out {
                            out[(a * d_in + k, b * d_in + l)] += j[(a * d_in + i, b * d_in + jj)] * c;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Lower estimate of `‖Φ‖◇` by maximising `‖(Φ⊗id)(ψψ†)‖₁` over pure inputs:
/// random sampling followed by shrinking random-perturbation hill climbing.
pub fn brute_force_diamond(j: &CMat, d_out: usize, d_in: usize, samples: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let dim = d_in * d_in;
    let value = |psi: &DVector<C64>| trace_norm_hermitian(&extended_output(j, psi, d_out, d_in));
    let mut starts: Vec<(f64, DVector<C64>)> = (0..samples)
        .map(|_| {
            let psi = random_pure(&mut rng, dim);
            (value(&psi), psi)
        })
        .collect();
    // maximally entangled input is always a candidate
    let mut omega = DVector::zeros(dim);
    for i in 0..d_in {
        omega[i * d_in + i] = C64::new(1.0 / (d_in as f64).sqrt(), 0.0);
    }
    starts.push((value(&omega), omega));
    starts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut best = starts[0].0;
    for (mut v, mut psi) in starts.into_iter().take(4) {
        let mut radius = 0.3;
        while radius > 1e-7 {
            let mut improved = false;
            for _ in 0..40 {
                let kick = random_pure(&mut rng, dim) * C64::new(radius, 0.0);
                let cand = &psi + kick;
                let norm = cand.norm();
                let cand = cand / C64::new(norm, 0.0);
                let cv = value(&cand);
                if cv > v {
                    v = cv;
                    psi = cand;
                    improved = true;
                }
            }
            if !improved {
                radius *= 0.5;
            }
        }
        best = best.max(v);
    }
    best
}
