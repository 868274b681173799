//! Fock-basis matrix elements of the halfplane coherent-state POVM.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::C64;

/// Readout result. `Plus` is the outcome associated with qubit 1 in `|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

/// `ln k!` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `ln Γ(s/2 + 1)` for odd `s`, from `Γ(k + ½) = (2k)! √π / (4ᵏ k!)`.
fn ln_gamma_half_odd(s: usize, ln_fact: &[f64]) -> f64 {
    debug_assert!(s % 2 == 1);
    // s/2 + 1 = k + 1/2
    let k = (s + 1) / 2;
    ln_fact[2 * k] - (k as f64) * 4f64.ln() - ln_fact[k] + 0.5 * PI.ln()
}

/// Fock matrix element `g_x(m, n) = ⟨m|E_x|n⟩⟨n|α⟩⟨α|m⟩` of the outcome-`x`
/// POVM after loading the coherent state `|α⟩`, `α` real.
///
/// `chi_sign` selects the halfplane orientation: outcome `x` integrates over
/// the lower halfplane when `x · chi_sign = +1` and the upper one otherwise.
pub fn g_coefficient(alpha: f64, x: Outcome, n: usize, m: usize, chi_sign: f64) -> C64 {
    let ln_fact = ln_factorials(2 * (n + m) + 4);
    g_with_table(alpha, x.sign() * chi_sign.signum(), n, m, &ln_fact)
}

fn g_with_table(alpha: f64, orientation: f64, n: usize, m: usize, ln_fact: &[f64]) -> C64 {
    let a2 = alpha * alpha;
    if n == m {
        let w = if alpha == 0.0 {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-a2 + 2.0 * n as f64 * alpha.ln() - ln_fact[n]).exp()
        };
        return C64::new(0.5 * w, 0.0);
    }
    let diff = m as i64 - n as i64;
    if diff.rem_euclid(2) == 0 || alpha == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let s = n + m;
    let ln_mag = -a2 + s as f64 * alpha.ln() + ln_gamma_half_odd(s, ln_fact) - ln_fact[n] - ln_fact[m];
    let mag = ln_mag.exp() / (PI * diff as f64);
    C64::new(0.0, -orientation * mag)
}

/// Coefficients `c(n, m) = g_x(m, n)` multiplying `Qₙ ρ Qₘ†`, for
/// `n, m ∈ [0, n_max]`. The table is Hermitian by construction.
pub(crate) fn coefficient_table(alpha: f64, x: Outcome, chi_sign: f64, n_max: usize) -> CMat {
    let ln_fact = ln_factorials(4 * n_max + 4);
    let orientation = x.sign() * chi_sign.signum();
    let size = n_max + 1;
    let mut c = CMat::zeros(size, size);
    for n in 0..size {
        for m in n..size {
            let g = g_with_table(alpha, orientation, n, m, &ln_fact);
            c[(n, m)] = g;
            c[(m, n)] = g.conj();
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_gamma() {
        let lf = ln_factorials(40);
        // Γ(3/2) = √π/2, Γ(5/2) = 3√π/4
        assert!((ln_gamma_half_odd(1, &lf) - (PI.sqrt() / 2.0).ln()).abs() < 1e-14);
        assert!((ln_gamma_half_odd(3, &lf) - (3.0 * PI.sqrt() / 4.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn even_difference_vanishes() {
        for a in [0.5, 1.0, 2.0] {
            assert_eq!(g_coefficient(a, Outcome::Plus, 0, 2, 1.0), C64::new(0.0, 0.0));
            assert_eq!(g_coefficient(a, Outcome::Minus, 3, 7, -1.0), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn first_off_diagonal_magnitude() {
        let g = g_coefficient(1.0, Outcome::Plus, 0, 1, 1.0);
        let expected = (-1.0f64).exp() / (2.0 * PI.sqrt());
        assert!((g.norm() - expected).abs() < 1e-15);
        assert!((g.norm() - 0.10378).abs() < 1e-5);
        assert_eq!(g.re, 0.0);
    }

    #[test]
    fn orientation_flips_with_outcome_and_chi_sign() {
        let a = g_coefficient(1.3, Outcome::Plus, 2, 5, 1.0);
        assert_eq!(g_coefficient(1.3, Outcome::Minus, 2, 5, 1.0), -a);
        assert_eq!(g_coefficient(1.3, Outcome::Plus, 2, 5, -1.0), -a);
        assert_eq!(g_coefficient(1.3, Outcome::Minus, 2, 5, -1.0), a);
    }

    #[test]
    fn hermitian_symmetry() {
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            for x in Outcome::BOTH {
                let c = coefficient_table(alpha, x, 1.0, 30);
                for n in 0..=30 {
                    for m in 0..=30 {
                        let gnm = g_coefficient(alpha, x, n, m, 1.0);
                        let gmn = g_coefficient(alpha, x, m, n, 1.0);
                        assert!((gnm - gmn.conj()).norm() < 1e-15);
                        assert!((c[(n, m)] - gnm).norm() < 1e-15 * (1.0 + gnm.norm()));
                    }
                }
            }
        }
    }

    #[test]
    fn poisson_normalisation() {
        let alpha: f64 = 2.0;
        let total: f64 = (0..=60)
            .map(|n| {
                (g_coefficient(alpha, Outcome::Plus, n, n, 1.0)
                    + g_coefficient(alpha, Outcome::Minus, n, n, 1.0))
                .re
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn large_indices_do_not_overflow() {
        let g = g_coefficient(12.0, Outcome::Plus, 300, 301, 1.0);
        assert!(g.norm().is_finite() && g.norm() > 0.0);
        let d = g_coefficient(12.0, Outcome::Plus, 144, 144, 1.0);
        assert!(d.re.is_finite() && d.re > 0.0);
    }

    #[test]
    fn zero_amplitude_is_fair_coin() {
        assert_eq!(g_coefficient(0.0, Outcome::Plus, 0, 0, 1.0).re, 0.5);
        assert_eq!(g_coefficient(0.0, Outcome::Plus, 1, 1, 1.0).re, 0.0);
        assert_eq!(g_coefficient(0.0, Outcome::Plus, 0, 1, 1.0).norm(), 0.0);
    }
}
