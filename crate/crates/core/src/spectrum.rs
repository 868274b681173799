//! Two-qubit Hamiltonian restricted to a readout-resonator Fock sector.
//!
//! With the resonator occupation replaced by a scalar `n`, the qubit
//! Hamiltonian in the bare ordering `|00⟩, |01⟩, |10⟩, |11⟩` is
//!
//! ```text
//! diag(-(ω₁+ω₂)/2 + χn,  δₙ,  -δₙ,  (ω₁+ω₂)/2 - χn)  +  J (|01⟩⟨10| + |10⟩⟨01|)
//! ```
//!
//! with `δₙ = (ω₂ - ω₁)/2 + χn`. The only non-trivial block is the real 2×2
//! `[[δₙ, J], [J, -δₙ]]`, diagonalised by a rotation through the mixing angle
//! `γₙ` with `tan 2γₙ = J/δₙ`. The branch is fixed so that the rotation is the
//! identity as `J → 0`, i.e. `γₙ ∈ (-π/4, π/4)` whenever `δₙ ≠ 0`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::linalg::{CMat, ONE};
use crate::{Error, Result, C64};

/// `sgn(x)` with `sgn(0) = +1`.
pub(crate) fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Physical parameters of the two-qubit readout model.
///
/// All frequencies are angular frequencies in one common (arbitrary) unit;
/// every reported quantity depends only on their ratios to `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega1: f64,
    pub omega2: f64,
    /// Effective qubit-qubit exchange coupling.
    pub j: f64,
    /// Dispersive shift; must be nonzero.
    pub chi: f64,
    /// Real amplitude of the coherent probe.
    pub alpha: f64,
    /// Fock-space truncation (inclusive).
    pub n_max: usize,
}

impl SystemParams {
    pub fn new(omega1: f64, omega2: f64, j: f64, chi: f64, alpha: f64, n_max: usize) -> Result<Self> {
        let p = Self {
            omega1,
            omega2,
            j,
            chi,
            alpha,
            n_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters from the half-detuning `δ₀`, with `ω₁ = -δ₀` and `ω₂ = +δ₀`.
    pub fn from_detuning(delta0: f64, j: f64, chi: f64, alpha: f64, n_max: usize) -> Result<Self> {
        Self::new(-delta0, delta0, j, chi, alpha, n_max)
    }

    /// `δ₀ = 102, J = 3.8, α = 2, n_max = 40` at the given dispersive shift.
    pub fn fig2(chi: f64) -> Self {
        Self::from_detuning(102.0, 3.8, chi, 2.0, 40).expect("preset is valid for chi != 0")
    }

    /// `δ₀ = 80, J = 10, χ = 20, n_max = 40` at the given probe amplitude.
    pub fn fig4(alpha: f64) -> Self {
        Self::from_detuning(80.0, 10.0, 20.0, alpha, 40).expect("preset is valid for alpha >= 0")
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega1, self.omega2, self.j, self.chi, self.alpha]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("all parameters must be finite".into()));
        }
        if self.chi == 0.0 {
            return Err(Error::InvalidParameter(
                "chi must be nonzero (the interaction time pi/(2|chi|) is undefined)".into(),
            ));
        }
        if self.alpha < 0.0 {
            return Err(Error::InvalidParameter("alpha must be >= 0".into()));
        }
        Ok(())
    }

    pub fn delta0(&self) -> f64 {
        (self.omega2 - self.omega1) / 2.0
    }

    pub fn delta_n(&self, n: f64) -> f64 {
        self.delta0() + self.chi * n
    }

    /// Interaction time `π / (2|χ|)`.
    pub fn t_m(&self) -> f64 {
        FRAC_PI_2 / self.chi.abs()
    }

    /// `√(δ₀² + J²)`, the zero-photon splitting of the exchange block.
    pub fn dressed_splitting(&self) -> f64 {
        self.delta0().hypot(self.j)
    }

    pub fn with_chi(self, chi: f64) -> Self {
        Self { chi, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_n_max(self, n_max: usize) -> Self {
        Self { n_max, ..self }
    }

    /// Shift both qubit frequencies by a common offset.
    pub fn shifted(self, d_omega: f64) -> Self {
        Self {
            omega1: self.omega1 + d_omega,
            omega2: self.omega2 + d_omega,
            ..self
        }
    }

    /// Multiply every frequency by `lambda`.
    pub fn scaled(self, lambda: f64) -> Self {
        Self {
            omega1: self.omega1 * lambda,
            omega2: self.omega2 * lambda,
            j: self.j * lambda,
            chi: self.chi * lambda,
            ..self
        }
    }

    /// Heuristic lower bound on `n_max` keeping the Poisson tail negligible.
    pub fn recommended_n_max(alpha: f64) -> usize {
        (alpha * alpha + 6.0 * alpha + 10.0).ceil() as usize
    }

    pub fn truncation_ok(&self) -> bool {
        self.n_max >= Self::recommended_n_max(self.alpha)
    }
}

/// A basis from the family interpolating bare (`γ = 0`) and dressed states.
///
/// The basis vectors, in order, are `|00⟩`, `cos γ|01⟩ + sin γ|10⟩`,
/// `-sin γ|01⟩ + cos γ|10⟩` and `|11⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisAngle {
    gamma: f64,
}

impl BasisAngle {
    pub const BARE: BasisAngle = BasisAngle { gamma: 0.0 };

    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma.abs() > FRAC_PI_4 + 1e-15 {
            return Err(Error::InvalidParameter(format!(
                "basis angle {gamma} outside [-pi/4, pi/4]"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Unitary whose columns are the γ-rotated basis states.
    pub fn rotation(&self) -> CMat {
        let (s, c) = self.gamma.sin_cos();
        let mut r = CMat::zeros(4, 4);
        r[(0, 0)] = ONE;
        r[(3, 3)] = ONE;
        r[(1, 1)] = C64::new(c, 0.0);
        r[(2, 1)] = C64::new(s, 0.0);
        r[(1, 2)] = C64::new(-s, 0.0);
        r[(2, 2)] = C64::new(c, 0.0);
        r
    }

    /// Projector onto the γ-basis states with qubit 1 in `|0̃⟩` (`k = 0`)
    /// or `|1̃⟩` (`k = 1`).
    pub fn qubit1_projector(&self, k: usize) -> CMat {
        let r = self.rotation();
        let mut p = CMat::zeros(4, 4);
        let (a, b) = if k == 0 { (0, 1) } else { (2, 3) };
        for col in [a, b] {
            let v = r.column(col);
            p += &v * v.adjoint();
        }
        p
    }
}

/// Eigen-decomposition of the qubit Hamiltonian in one Fock sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub n: f64,
    pub gamma_n: f64,
    /// Eigenvalues paired with the γₙ-basis vectors, in basis order.
    pub energies: [f64; 4],
}

/// Mixing angle `γₙ` of the exchange block at occupation `n`.
///
/// At `δₙ = 0` the continuous limit `sgn(J)·π/4` is returned.
pub fn mixing_angle(params: &SystemParams, n: f64) -> Result<BasisAngle> {
    let delta = params.delta_n(n);
    let j = params.j;
    if delta == 0.0 {
        if j == 0.0 {
            return Err(Error::UndefinedMixingAngle { n });
        }
        return Ok(BasisAngle {
            gamma: j.signum() * FRAC_PI_4,
        });
    }
    Ok(BasisAngle {
        gamma: 0.5 * (j / delta).atan(),
    })
}

pub fn eigenenergies(params: &SystemParams, n: f64) -> EigenSystem {
    let delta = params.delta_n(n);
    let outer = -(params.omega1 + params.omega2) / 2.0 + params.chi * n;
    let split = sgn(delta) * delta.hypot(params.j);
    // The exchange block vanishes identically when δₙ = J = 0; any rotation diagonalises it.
    let gamma_n = mixing_angle(params, n).map(|b| b.gamma).unwrap_or(0.0);
    EigenSystem {
        n,
        gamma_n,
        energies: [outer, split, -split, -outer],
    }
}

pub fn qubit_hamiltonian(params: &SystemParams, n: f64) -> CMat {
    let delta = params.delta_n(n);
    let outer = -(params.omega1 + params.omega2) / 2.0 + params.chi * n;
    let mut h = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(outer, 0.0),
        C64::new(delta, 0.0),
        C64::new(-delta, 0.0),
        C64::new(-outer, 0.0),
    ]));
    h[(1, 2)] = C64::new(params.j, 0.0);
    h[(2, 1)] = C64::new(params.j, 0.0);
    h
}

/// `exp(-i Hₙ t)` through the exact block rotation.
pub fn propagator(params: &SystemParams, n: f64, t: f64) -> CMat {
    let eig = eigenenergies(params, n);
    let phases: Vec<C64> = eig
        .energies
        .iter()
        .map(|&e| C64::from_polar(1.0, -e * t))
        .collect();
    diagonal_in_basis(&BasisAngle { gamma: eig.gamma_n }, &phases)
}

/// `R diag(values) R†` for the rotation of `basis`.
pub(crate) fn diagonal_in_basis(basis: &BasisAngle, values: &[C64]) -> CMat {
    let r = basis.rotation();
    let mut scaled = r.clone();
    for (j, v) in values.iter().enumerate() {
        for x in scaled.column_mut(j).iter_mut() {
            *x *= *v;
        }
    }
    scaled * r.adjoint()
}

/// Qubit Hamiltonian at occupation `n` expressed in the `basis` frame: `R† Hₙ R`.
pub fn hamiltonian_in_basis(params: &SystemParams, basis: &BasisAngle, n: f64) -> CMat {
    let r = basis.rotation();
    r.adjoint() * qubit_hamiltonian(params, n) * r
}

/// Occupation `n(γ)` at which the γ-basis diagonalises the Hamiltonian,
/// `n(γ) = (J cot 2γ - δ₀) / χ`.
pub fn n_of_gamma(params: &SystemParams, gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::BareBasisDiverges);
    }
    let two_g = 2.0 * gamma;
    Ok((params.j * two_g.cos() / two_g.sin() - params.delta0()) / params.chi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverEstimate {
    /// `√(δ₀²+J²)/α²`, absent for `α = 0`.
    pub chi_c: Option<f64>,
    /// `(√(δ₀²+J²)/χ)^{1/2}`, absent for `χ ≤ 0`.
    pub alpha_c: Option<f64>,
}

pub fn crossover_estimates(params: &SystemParams) -> CrossoverEstimate {
    let split = params.dressed_splitting();
    let a2 = params.alpha * params.alpha;
    CrossoverEstimate {
        chi_c: (a2 > 0.0).then(|| split / a2),
        alpha_c: (params.chi > 0.0).then(|| (split / params.chi).sqrt()),
    }
}

/// Diagonal of the zero-photon Hamiltonian in the `basis` frame; these are the
/// frequencies an idealised measurement in that basis evolves with.
pub(crate) fn frame_energies(params: &SystemParams, basis: &BasisAngle) -> [f64; 4] {
    let h = hamiltonian_in_basis(params, basis, 0.0);
    [h[(0, 0)].re, h[(1, 1)].re, h[(2, 2)].re, h[(3, 3)].re]
}
