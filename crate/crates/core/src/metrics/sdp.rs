//! Barrier-method solver for the diamond norm of a Hermitian-preserving map.
//!
//! For a Choi matrix `J` on `out ⊗ in` (output factor first) the diamond norm is
//!
//! ```text
//! primal:  max_ρ ‖(I ⊗ √ρ) J (I ⊗ √ρ)‖₁         over densities ρ on `in`
//! dual:    min λ  s.t.  A ⪰ 0,  A - J ⪰ 0,  λ I ⪰ Tr_out(2A - J)
//! ```
//!
//! The dual is followed along its central path. Every strictly feasible
//! iterate is an upper certificate, and the primal density `ρ ∝ S⁻¹`
//! (with `S = λI - Tr_out(2A - J)`) evaluated exactly gives a lower one.
//!
//! Newton systems are solved without forming the dense Hessian. Writing
//! `B = A - J`, the `A`-block `Δ ↦ A⁻¹ΔA⁻¹ + B⁻¹ΔB⁻¹` is inverted through a
//! congruence that diagonalises both terms at once; the coupling through
//! `Tr_out` and `λ` only touches a `d_in² + 1` dimensional system.

use nalgebra::DVector;

use crate::linalg::{self, CMat};
use crate::C64;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Certificates {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

const T_GROWTH: f64 = 16.0;
const T_MAX: f64 = 1e14;
const MAX_NEWTON: usize = 600;
const CENTERING_DECREMENT: f64 = 1e-9;

pub(crate) fn tr_out(x: &CMat, d_out: usize, d_in: usize) -> CMat {
    CMat::from_fn(d_in, d_in, |i, j| {
        (0..d_out).map(|a| x[(a * d_in + i, a * d_in + j)]).sum()
    })
}

/// `I_out ⊗ y`.
pub(crate) fn lift(y: &CMat, d_out: usize) -> CMat {
    linalg::kron(&linalg::identity(d_out), y)
}

/// Exact primal value at a density `rho`: `‖(I ⊗ √ρ) J (I ⊗ √ρ)‖₁`.
pub(crate) fn primal_value(j: &CMat, rho: &CMat, d_out: usize) -> f64 {
    let root = lift(&linalg::sqrt_psd(rho), d_out);
    let m = &root * j * &root;
    linalg::eigvalsh(&m).iter().map(|v| v.abs()).sum()
}

/// Upper certificate from a dual point; repairs tiny infeasibility of
/// `A ⪰ 0`, `A ⪰ J` by an identity shift, which costs `2·d_out·shift`.
fn dual_value(j: &CMat, a: &CMat, d_out: usize, d_in: usize) -> f64 {
    let b = a - j;
    let shift = (-linalg::min_eigenvalue(a))
        .max(-linalg::min_eigenvalue(&b))
        .max(0.0);
    let reduced = tr_out(&(a * C64::new(2.0, 0.0) - j), d_out, d_in);
    linalg::max_eigenvalue(&reduced) + 2.0 * d_out as f64 * shift
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
struct Chol {
    l: CMat,
}

impl Chol {
    /// Fails on any non-positive pivot, which is the feasibility test.
    fn new(x: &CMat) -> Option<Self> {
        let n = x.nrows();
        let mut l = CMat::zeros(n, n);
        for j in 0..n {
            let mut diag = x[(j, j)].re;
            for k in 0..j {
                diag -= l[(j, k)].norm_sqr();
            }
            if !(diag > 0.0) {
                return None;
            }
            let ljj = diag.sqrt();
            l[(j, j)] = C64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut s = x[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        Some(Self { l })
    }

    fn logdet(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|z| z.re.ln()).sum::<f64>()
    }

    fn inverse(&self) -> CMat {
        let n = self.l.nrows();
        let l_inv = self
            .l
            .solve_lower_triangular(&linalg::identity(n))
            .expect("positive pivots");
        l_inv.adjoint() * l_inv
    }
}

fn chol(x: &CMat) -> Option<Chol> {
    Chol::new(&linalg::hermitian_part(x))
}

struct Point {
    a: CMat,
    lam: f64,
}

struct Factors {
    a: Chol,
    b: Chol,
    s: Chol,
}

struct Problem<'a> {
    j: &'a CMat,
    d_out: usize,
    d_in: usize,
}

impl Problem<'_> {
    fn slack(&self, p: &Point) -> CMat {
        let reduced = tr_out(&(&p.a * C64::new(2.0, 0.0) - self.j), self.d_out, self.d_in);
        linalg::identity(self.d_in) * C64::new(p.lam, 0.0) - reduced
    }

    fn factor(&self, p: &Point) -> Option<Factors> {
        Some(Factors {
            a: chol(&p.a)?,
            b: chol(&(&p.a - self.j))?,
            s: chol(&self.slack(p))?,
        })
    }

    fn barrier(&self, t: f64, p: &Point, f: &Factors) -> f64 {
        t * p.lam - f.a.logdet() - f.b.logdet() - f.s.logdet()
    }

    /// Newton direction `(ΔA, Δλ)` and squared Newton decrement.
    fn newton(&self, t: f64, f: &Factors) -> Option<(CMat, f64, f64)> {
        let (d_out, d_in) = (self.d_out, self.d_in);
        let a_inv = f.a.inverse();
        let b_inv = f.b.inverse();
        let s_inv = f.s.inverse();
        let s_inv2 = &s_inv * &s_inv;

        let grad_a = lift(&s_inv, d_out) * C64::new(2.0, 0.0) - &a_inv - &b_inv;
        let grad_lam = t - s_inv.trace().re;

        // Congruence N with N† A⁻¹ N = I and N† B⁻¹ N = D.
        let l = &f.a.l;
        let k = l.adjoint() * &b_inv * l;
        let (d, v) = linalg::eigh(&k);
        let n = l * v;
        let n_adj = n.adjoint();
        let dim = d.len();
        let t_inv = |g: &CMat| -> CMat {
            let mut inner = &n_adj * g * &n;
            for r in 0..dim {
                for c in 0..dim {
                    inner[(r, c)] /= 1.0 + d[r] * d[c];
                }
            }
            &n * inner * &n_adj
        };

        let q2 = d_in * d_in;
        let mut basis_solves = Vec::with_capacity(q2);
        let mut m_op = CMat::zeros(q2, q2);
        for idx in 0..q2 {
            let mut e = CMat::zeros(d_in, d_in);
            e[(idx / d_in, idx % d_in)] = C64::new(1.0, 0.0);
            let x = t_inv(&lift(&e, d_out));
            let y = tr_out(&x, d_out, d_in);
            for r in 0..q2 {
                m_op[(r, idx)] = y[(r / d_in, r % d_in)];
            }
            basis_solves.push(x);
        }
        let neg_grad_a = -&grad_a;
        let x0 = t_inv(&neg_grad_a);
        let y0 = tr_out(&x0, d_out, d_in);

        // y ↦ S⁻¹ y S⁻¹ in row-major vec form.
        let p_op = CMat::from_fn(q2, q2, |r, c| {
            let (i, j) = (r / d_in, r % d_in);
            let (kk, ll) = (c / d_in, c % d_in);
            s_inv[(i, kk)] * s_inv[(ll, j)]
        });
        let vec_s2 = DVector::from_fn(q2, |r, _| s_inv2[(r / d_in, r % d_in)]);
        let m_s2 = &m_op * &vec_s2;

        let mut sys = CMat::zeros(q2 + 1, q2 + 1);
        let mp = &m_op * &p_op * C64::new(4.0, 0.0);
        for r in 0..q2 {
            for c in 0..q2 {
                sys[(r, c)] = mp[(r, c)];
            }
            sys[(r, r)] += C64::new(1.0, 0.0);
            sys[(r, q2)] = -m_s2[r] * 2.0;
        }
        for c in 0..q2 {
            let (kk, ll) = (c / d_in, c % d_in);
            sys[(q2, c)] = -s_inv2[(ll, kk)] * 2.0;
        }
        sys[(q2, q2)] = C64::new(s_inv2.trace().re, 0.0);
        let mut rhs = DVector::zeros(q2 + 1);
        for r in 0..q2 {
            rhs[r] = y0[(r / d_in, r % d_in)];
        }
        rhs[q2] = C64::new(-grad_lam, 0.0);

        let sol = sys.lu().solve(&rhs)?;
        let d_lam = sol[q2].re;
        let y = CMat::from_fn(d_in, d_in, |i, j| sol[i * d_in + j]);
        let z = &s_inv * y * &s_inv * C64::new(4.0, 0.0) - &s_inv2 * C64::new(2.0 * d_lam, 0.0);
        let mut d_a = x0;
        for (idx, x) in basis_solves.iter().enumerate() {
            let coef = z[(idx / d_in, idx % d_in)];
            d_a -= x * coef;
        }
        let d_a = linalg::hermitian_part(&d_a);

        let slope = (&grad_a * &d_a).trace().re + grad_lam * d_lam;
        if !slope.is_finite() {
            return None;
        }
        Some((d_a, d_lam, -slope))
    }

    fn lower_certificate(&self, f: &Factors) -> f64 {
        let s_inv = f.s.inverse();
        let tr = s_inv.trace().re;
        let rho = linalg::hermitian_part(&(s_inv / C64::new(tr, 0.0)));
        primal_value(self.j, &rho, self.d_out)
    }
}

/// Solve for `‖Φ‖◇` of the Choi matrix `j` (Hermitian, normalised so that
/// `‖J‖₁ = 1`) until the certified gap drops below `target_gap`.
pub(crate) fn solve(j: &CMat, d_out: usize, d_in: usize, target_gap: f64) -> Certificates {
    let prob = Problem { j, d_out, d_in };
    let n = d_out * d_in;

    let (vals, vecs) = linalg::eigh(j);
    let pos = CMat::from_diagonal(&DVector::from_fn(n, |i, _| C64::new(vals[i].max(0.0), 0.0)));
    let a0 = &vecs * pos * vecs.adjoint() + linalg::identity(n);
    let lam0 = linalg::max_eigenvalue(&tr_out(&(&a0 * C64::new(2.0, 0.0) - j), d_out, d_in)) + 1.0;
    let mut pt = Point { a: a0, lam: lam0 };

    let mut best_upper = dual_value(j, &pt.a, d_out, d_in);
    let mut best_lower = 0.0f64;
    let mut iterations = 0;
    let mut t = 1.0;

    let mut factors = match prob.factor(&pt) {
        Some(f) => f,
        None => {
            return Certificates {
                lower: best_lower,
                upper: best_upper,
                iterations,
            }
        }
    };

    'outer: while t < T_MAX {
        loop {
            if iterations >= MAX_NEWTON {
                break 'outer;
            }
            let Some((d_a, d_lam, dec2)) = prob.newton(t, &factors) else {
                break 'outer;
            };
            iterations += 1;
            if dec2 / 2.0 < CENTERING_DECREMENT {
                break;
            }
            let f0 = prob.barrier(t, &pt, &factors);
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial = Point {
                    a: &pt.a + &d_a * C64::new(step, 0.0),
                    lam: pt.lam + step * d_lam,
                };
                if let Some(ft) = prob.factor(&trial) {
                    if prob.barrier(t, &trial, &ft) <= f0 - 0.25 * step * dec2 {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
                step *= 0.5;
            }
            match accepted {
                Some((trial, ft)) => {
                    pt = trial;
                    factors = ft;
                }
                // No progress possible at this t; treat as centred.
                None => break,
            }
        }

        best_upper = best_upper.min(dual_value(j, &pt.a, d_out, d_in));
        best_lower = best_lower.max(prob.lower_certificate(&factors));
        if best_upper - best_lower <= target_gap {
            return Certificates {
                lower: best_lower,
                upper: best_upper,
                iterations,
            };
        }
        t *= T_GROWTH;
    }

    Certificates {
        lower: best_lower,
        upper: best_upper,
        iterations,
    }
}
