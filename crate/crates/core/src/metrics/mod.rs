//! Operator and superoperator norms.
//!
//! Choi matrices follow the convention of [`crate::channels`]: output factor
//! first, input factor second.

mod sdp;

use serde::{Deserialize, Serialize};

use crate::channels::SuperOp;
use crate::linalg::{self, CMat};
use crate::{Error, Result};

/// Certified widths below this are not pursued; the Choi bracket is reported instead.
pub const PRECISION_FLOOR: f64 = 1e-9;

pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiamondStatus {
    Converged,
    BoundOnly,
    Failed,
}

impl DiamondStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DiamondStatus::Converged => "converged",
            DiamondStatus::BoundOnly => "bound_only",
            DiamondStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiamondResult {
    pub value: f64,
    pub lower_cert: f64,
    pub upper_cert: f64,
    pub status: DiamondStatus,
    pub iterations: usize,
}

impl DiamondResult {
    pub fn gap(&self) -> f64 {
        self.upper_cert - self.lower_cert
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOut {
    Output,
    Input,
}

/// Sum of singular values. Hermitian input takes the eigenvalue path.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("trace norm of {:?} matrix", a.shape())));
    }
    let scale = linalg::max_abs(a).max(1.0);
    if linalg::hermitian_deviation(a) <= 1e-14 * scale {
        Ok(linalg::eigvalsh(a).iter().map(|v| v.abs()).sum())
    } else {
        Ok(trace_norm_svd(a))
    }
}

/// Trace norm through the singular value decomposition, for any square matrix.
pub fn trace_norm_svd(a: &CMat) -> f64 {
    a.clone().svd(false, false).singular_values.iter().sum()
}

/// Trace out one tensor factor of a `(d_out·d_in)`-dimensional Choi matrix.
pub fn partial_trace(j: &CMat, which: TraceOut, d_out: usize, d_in: usize) -> Result<CMat> {
    let n = d_out * d_in;
    if j.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "expected {n}x{n} for d_out = {d_out}, d_in = {d_in}, got {:?}",
            j.shape()
        )));
    }
    Ok(match which {
        TraceOut::Output => sdp::tr_out(j, d_out, d_in),
        TraceOut::Input => CMat::from_fn(d_out, d_out, |a, b| {
            (0..d_in).map(|i| j[(a * d_in + i, b * d_in + i)]).sum()
        }),
    })
}

fn square_dim(j: &CMat) -> Result<usize> {
    let n = j.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if !j.is_square() || d * d != n {
        return Err(Error::Dimension(format!(
            "Choi matrix of shape {:?} is not d^2 x d^2",
            j.shape()
        )));
    }
    Ok(d)
}

/// `(‖J‖₁ / d, ‖J‖₁)`, a bracket on the diamond norm for input dimension `d`.
pub fn choi_bounds(j: &CMat) -> Result<(f64, f64)> {
    let d = square_dim(j)?;
    choi_bounds_dims(j, d)
}

pub fn choi_bounds_dims(j: &CMat, d_in: usize) -> Result<(f64, f64)> {
    let norm = trace_norm(&linalg::hermitian_part(j))?;
    Ok((norm / d_in as f64, norm))
}

/// Diamond norm of the map with Choi matrix `j`, input and output dimension equal.
pub fn diamond_norm(j: &CMat, tol: f64) -> Result<DiamondResult> {
    let d = square_dim(j)?;
    diamond_norm_dims(j, d, d, tol)
}

/// Diamond norm of a Hermitian-preserving map with the given factor dimensions.
///
/// `tol` is the requested absolute width of the certificate interval. When
/// the map is too small for a certified solve (`‖J‖₁` below
/// [`PRECISION_FLOOR`]) or the solver cannot reach `tol`, the result carries
/// `BoundOnly` with the best valid bracket and `value` set inside it.
pub fn diamond_norm_dims(j: &CMat, d_out: usize, d_in: usize, tol: f64) -> Result<DiamondResult> {
    let n = d_out * d_in;
    if j.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "expected {n}x{n} Choi matrix, got {:?}",
            j.shape()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let scale = linalg::max_abs(j).max(1.0);
    let dev = linalg::hermitian_deviation(j);
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let jh = linalg::hermitian_part(j);
    let (lo26, hi26) = choi_bounds_dims(&jh, d_in)?;

    if hi26 < PRECISION_FLOOR {
        return Ok(DiamondResult {
            value: hi26,
            lower_cert: lo26,
            upper_cert: hi26,
            status: DiamondStatus::BoundOnly,
            iterations: 0,
        });
    }

    let normalised = &jh / crate::C64::new(hi26, 0.0);
    let cert = sdp::solve(&normalised, d_out, d_in, tol / hi26);
    if !(cert.lower.is_finite() && cert.upper.is_finite()) {
        return Ok(DiamondResult {
            value: hi26,
            lower_cert: lo26,
            upper_cert: hi26,
            status: DiamondStatus::Failed,
            iterations: cert.iterations,
        });
    }
    let lower = (cert.lower * hi26).max(lo26);
    let upper = (cert.upper * hi26).min(hi26).max(lower);
    let status = if upper - lower <= tol {
        DiamondStatus::Converged
    } else {
        DiamondStatus::BoundOnly
    };
    Ok(DiamondResult {
        value: 0.5 * (lower + upper),
        lower_cert: lower,
        upper_cert: upper,
        status,
        iterations: cert.iterations,
    })
}

/// `‖E - F‖◇` computed from the Choi difference.
pub fn diamond_distance(e: &SuperOp, f: &SuperOp, tol: f64) -> Result<DiamondResult> {
    if e.choi().shape() != f.choi().shape() {
        return Err(Error::Dimension("superoperators act on different spaces".into()));
    }
    diamond_norm(&(e.choi() - f.choi()), tol)
}

/// `‖(I ⊗ √ρ) J (I ⊗ √ρ)‖₁`: the trace norm of the map applied to the
/// purification of `rho`; a lower bound on the diamond norm for any density.
pub fn purified_output_norm(j: &CMat, rho: &CMat, d_out: usize) -> f64 {
    sdp::primal_value(&linalg::hermitian_part(j), rho, d_out)
}
