//! Idealised single-qubit reference measurements in a γ-rotated basis.

use serde::{Deserialize, Serialize};

use super::{Outcome, Provenance, SuperOp};
use crate::linalg::CMat;
use crate::spectrum::{diagonal_in_basis, frame_energies, n_of_gamma, propagator, BasisAngle, SystemParams};
use crate::{Error, Result, C64};

/// How the free evolution accompanying the reference measurement is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdealVariant {
    /// Phases from the diagonal of the zero-photon Hamiltonian in the γ frame.
    /// Defined for every γ, including the bare basis.
    #[default]
    Diagonal,
    /// The exact propagator at occupation `n(γ)`, which the γ basis diagonalises.
    Literal,
}

/// Outcome weights of the reference measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Snr {
    /// Perfect projective readout.
    #[default]
    Perfect,
    /// Finite signal-to-noise set by the probe amplitude.
    Finite,
}

/// Process matrix of the finite-SNR single-qubit measurement for one outcome,
/// indexed by the qubit-1 projectors `(P₀, P₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiMatrix {
    pub entries: [[f64; 2]; 2],
}

/// `½ [[1 + x erf α, e^{-2α²}], [e^{-2α²}, 1 - x erf α]]`.
pub fn chi_matrix(alpha: f64, x: Outcome) -> ChiMatrix {
    let e = libm::erf(alpha);
    let off = (-2.0 * alpha * alpha).exp();
    let s = x.sign();
    ChiMatrix {
        entries: [[0.5 * (1.0 + s * e), 0.5 * off], [0.5 * off, 0.5 * (1.0 - s * e)]],
    }
}

impl ChiMatrix {
    /// Weights of an ideal projective measurement.
    pub fn projective(x: Outcome) -> Self {
        match x {
            Outcome::Plus => ChiMatrix {
                entries: [[1.0, 0.0], [0.0, 0.0]],
            },
            Outcome::Minus => ChiMatrix {
                entries: [[0.0, 0.0], [0.0, 1.0]],
            },
        }
    }

    fn to_matrix(self) -> CMat {
        CMat::from_fn(2, 2, |i, j| C64::new(self.entries[i][j], 0.0))
    }
}

/// Reference measurement `ρ ↦ Σ_ij w_ij P̃ᵢ U ρ U† P̃ⱼ` in the basis `gamma`.
///
/// `P̃₀`, `P̃₁` project qubit 1 onto `|0̃⟩`, `|1̃⟩` of the γ basis and `U` is the
/// free evolution over `t_m` selected by `variant`. The weights `w` are the
/// projective ones or [`chi_matrix`] depending on `snr`.
pub fn ideal_channel(
    params: &SystemParams,
    gamma: BasisAngle,
    x: Outcome,
    variant: IdealVariant,
    snr: Snr,
) -> Result<SuperOp> {
    params.validate()?;
    let t_m = params.t_m();
    let u = match variant {
        IdealVariant::Diagonal => {
            let phases: Vec<C64> = frame_energies(params, &gamma)
                .iter()
                .map(|&e| C64::from_polar(1.0, -e * t_m))
                .collect();
            diagonal_in_basis(&gamma, &phases)
        }
        IdealVariant::Literal => {
            if gamma.gamma() == 0.0 {
                return Err(Error::LiteralAtBare);
            }
            let n = n_of_gamma(params, gamma.gamma())?;
            propagator(params, n, t_m)
        }
    };
    let weights = match snr {
        Snr::Perfect => ChiMatrix::projective(x),
        Snr::Finite => chi_matrix(params.alpha, x),
    };
    let ops = vec![gamma.qubit1_projector(0) * &u, gamma.qubit1_projector(1) * &u];
    let provenance = match snr {
        Snr::Perfect => Provenance::Ideal {
            gamma: gamma.gamma(),
            variant,
        },
        Snr::Finite => Provenance::Snr {
            gamma: gamma.gamma(),
            variant,
        },
    };
    SuperOp::from_kraus_pairs(ops, weights.to_matrix(), provenance, x, *params)
}
