//! Single-qubit dispersive readout on a pair of coupled qubits.
//!
//! The crate builds the discretised readout superoperator (coherent probe,
//! unitary interaction for `t_m = π/(2|χ|)`, halfplane POVM on the resonator,
//! resonator traced out), builds idealised single-qubit reference measurements
//! in a one-parameter family of two-qubit bases, and compares them with a
//! certified diamond norm.
//!
//! Module map:
//!
//! * [`spectrum`]: qubit Hamiltonian per Fock sector, mixing angles, propagators.
//! * [`channels`]: readout and reference superoperators (Kraus-pair and Choi form).
//! * [`metrics`]: trace norm, partial traces, Choi bounds, diamond norm SDP.
//! * [`sweeps`]: χ / α / γ scans and crossover search.
//! * [`cli`]: JSON configuration, presets, CSV and manifest output.

pub mod channels;
pub mod cli;
mod error;
pub mod linalg;
pub mod metrics;
pub mod spectrum;
pub mod sweeps;

pub use error::{Error, Result};

pub use channels::{
    chi_matrix, g_coefficient, ideal_channel, readout_channel, ChiMatrix, IdealVariant,
    Outcome, Provenance, Snr, SuperOp,
};
pub use metrics::{
    choi_bounds, diamond_distance, diamond_norm, partial_trace, trace_norm, DiamondResult,
    DiamondStatus, TraceOut,
};
pub use spectrum::{BasisAngle, EigenSystem, SystemParams};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
