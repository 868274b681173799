//! Measurement superoperators on the two-qubit space.
//!
//! Every channel is stored as a Kraus-pair expansion
//! `E(ρ) = Σ_{kl} c_{kl} K_k ρ K_l†` with a Hermitian coefficient table `c`,
//! together with its Choi matrix
//!
//! ```text
//! J(E) = Σ_ij E(|i⟩⟨j|) ⊗ |i⟩⟨j|          (output factor first, input second)
//!      = Σ_kl c_kl vec(K_k) vec(K_l)†     (row-major vec)
//! ```
//!
//! so `J[(a·4 + i, b·4 + j)] = E(|i⟩⟨j|)[(a, b)]`.

mod povm;
mod reference;

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};
use crate::spectrum::{propagator, SystemParams};
use crate::{Error, Result, C64};

pub use povm::{g_coefficient, Outcome};
pub use reference::{chi_matrix, ideal_channel, ChiMatrix, IdealVariant, Snr};

/// Two-qubit Hilbert-space dimension.
pub const DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Readout,
    Ideal { gamma: f64, variant: IdealVariant },
    Snr { gamma: f64, variant: IdealVariant },
}

/// A completely positive, trace-non-increasing map on two qubits.
#[derive(Debug, Clone)]
pub struct SuperOp {
    ops: Vec<CMat>,
    coeffs: CMat,
    choi: CMat,
    pub provenance: Provenance,
    pub outcome: Outcome,
    pub params: SystemParams,
}

impl SuperOp {
    pub fn from_kraus_pairs(
        ops: Vec<CMat>,
        coeffs: CMat,
        provenance: Provenance,
        outcome: Outcome,
        params: SystemParams,
    ) -> Result<Self> {
        let k = ops.len();
        if coeffs.shape() != (k, k) {
            return Err(Error::Dimension(format!(
                "coefficient table {:?} does not match {k} operators",
                coeffs.shape()
            )));
        }
        if let Some(bad) = ops.iter().find(|q| q.shape() != (DIM, DIM)) {
            return Err(Error::Dimension(format!("operator of shape {:?}", bad.shape())));
        }
        let mut v = CMat::zeros(DIM * DIM, k);
        for (col, q) in ops.iter().enumerate() {
            v.set_column(col, &linalg::vec_rows(q));
        }
        let choi = linalg::hermitian_part(&(&v * &coeffs * v.adjoint()));
        Ok(Self {
            ops,
            coeffs,
            choi,
            provenance,
            outcome,
            params,
        })
    }

    pub fn choi(&self) -> &CMat {
        &self.choi
    }

    pub fn operators(&self) -> &[CMat] {
        &self.ops
    }

    pub fn coefficients(&self) -> &CMat {
        &self.coeffs
    }

    /// Evaluate the map on a density matrix, returning the unnormalised
    /// post-measurement state (its trace is the outcome probability).
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        check_density(rho)?;
        Ok(self.apply_unchecked(rho))
    }

    /// Kraus-pair evaluation without input validation; linear in `rho`.
    pub fn apply_unchecked(&self, rho: &CMat) -> CMat {
        let left: Vec<CMat> = self.ops.iter().map(|q| q * rho).collect();
        let mut out = CMat::zeros(DIM, DIM);
        for (m, qm) in self.ops.iter().enumerate() {
            let mut acc = CMat::zeros(DIM, DIM);
            for (n, l) in left.iter().enumerate() {
                let c = self.coeffs[(n, m)];
                if c != C64::new(0.0, 0.0) {
                    acc += l * c;
                }
            }
            out += acc * qm.adjoint();
        }
        out
    }

    /// Evaluate the map by contracting its Choi matrix with `rho`.
    pub fn apply_via_choi(&self, rho: &CMat) -> CMat {
        contract_choi(&self.choi, rho, DIM, DIM)
    }
}

/// `E(ρ)_{ab} = Σ_ij J[(a,i),(b,j)] ρ_ij` for a Choi matrix with output factor first.
pub fn contract_choi(choi: &CMat, rho: &CMat, d_out: usize, d_in: usize) -> CMat {
    DMatrix::from_fn(d_out, d_out, |a, b| {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..d_in {
            for j in 0..d_in {
                s += choi[(a * d_in + i, b * d_in + j)] * rho[(i, j)];
            }
        }
        s
    })
}

pub(crate) fn check_density(rho: &CMat) -> Result<()> {
    if rho.shape() != (DIM, DIM) {
        return Err(Error::NotDensity(format!("shape {:?}, expected 4x4", rho.shape())));
    }
    let herm = linalg::hermitian_deviation(rho);
    if herm > 1e-10 {
        return Err(Error::NotDensity(format!("not Hermitian (deviation {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::NotDensity(format!("trace {tr} != 1")));
    }
    let min = linalg::min_eigenvalue(rho);
    if min < -1e-10 {
        return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// Readout superoperator for outcome `x`: load `|α⟩`, evolve for `t_m`,
/// apply the halfplane POVM element and trace out the resonator.
///
/// The Fock sum is truncated at `params.n_max`; a warning is logged when that
/// is below `α² + 6α + 10`.
pub fn readout_channel(params: &SystemParams, x: Outcome) -> Result<SuperOp> {
    params.validate()?;
    if !params.truncation_ok() {
        warn!(
            "n_max = {} is below the recommended {} for alpha = {}",
            params.n_max,
            SystemParams::recommended_n_max(params.alpha),
            params.alpha
        );
    }
    let t_m = params.t_m();
    let ops: Vec<CMat> = (0..=params.n_max)
        .map(|n| propagator(params, n as f64, t_m))
        .collect();
    let coeffs = povm::coefficient_table(params.alpha, x, params.chi.signum(), params.n_max);
    SuperOp::from_kraus_pairs(ops, coeffs, Provenance::Readout, x, *params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::metrics::{partial_trace, TraceOut};

    #[test]
    fn zero_amplitude_is_half_of_free_evolution() {
        let p = SystemParams::fig2(5.0).with_alpha(0.0);
        let e = readout_channel(&p, Outcome::Plus).unwrap();
        let q0 = propagator(&p, 0.0, p.t_m());
        let mut rho = CMat::zeros(4, 4);
        rho[(1, 1)] = C64::new(0.5, 0.0);
        rho[(2, 2)] = C64::new(0.5, 0.0);
        rho[(1, 2)] = C64::new(0.0, 0.5);
        rho[(2, 1)] = C64::new(0.0, -0.5);
        let out = e.apply(&rho).unwrap();
        let expected = &q0 * &rho * q0.adjoint() * C64::new(0.5, 0.0);
        assert!(max_abs_diff(&out, &expected) < 1e-14);
        assert!((out.trace().re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn outcome_pair_is_trace_preserving() {
        let p = SystemParams::fig2(5.0);
        let sum = readout_channel(&p, Outcome::Plus).unwrap().choi()
            + readout_channel(&p, Outcome::Minus).unwrap().choi();
        let reduced = partial_trace(&sum, TraceOut::Output, 4, 4).unwrap();
        assert!(max_abs_diff(&reduced, &CMat::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn rejects_non_density_input() {
        let e = readout_channel(&SystemParams::fig2(5.0), Outcome::Plus).unwrap();
        assert!(e.apply(&CMat::identity(4, 4)).is_err());
        assert!(e.apply(&CMat::identity(3, 3)).is_err());
        let mut bad = CMat::zeros(4, 4);
        bad[(0, 0)] = C64::new(1.5, 0.0);
        bad[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(e.apply(&bad).is_err());
    }
}
