//! Dense statevector, stabilizer tableau and Pauli-frame simulators.

mod frame;
mod statevector;
mod tableau;

pub use frame::{frame_run, frame_run_stages, FrameStage, PauliFrame};
pub use statevector::{
    magic_state, magic_state_flipped, plus_state, sv_run, zero_state, Qubit, Statevector,
};
pub use tableau::{tab_run, ControlRead, TabOutcome, Tableau};

use thiserror::Error;

use crate::pauli::PauliError;

/// A wire counts as a basis state when P(|1⟩) is within this of 0 or 1.
pub const BASIS_TOLERANCE: f64 = 1e-9;
/// Output fidelity assertions.
pub const FIDELITY_TOLERANCE: f64 = 1e-10;
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Largest circuit the statevector simulator accepts.
pub const MAX_SV_WIRES: usize = 20;
/// Hard cap including coherent-reset ancillas (2^22 amplitudes = 64 MiB).
pub const MAX_SV_WIRES_WITH_ANCILLAS: usize = 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{n_wires} wires exceeds the statevector limit of {max}")]
    TooManyWires { n_wires: usize, max: usize },
    #[error("state has {state} wires but circuit has {circuit}")]
    WireMismatch { state: usize, circuit: usize },
    #[error("wire {wire} is not in a computational basis state (P(1) = {prob_one:.3e})")]
    NotBasisState { wire: usize, prob_one: f64 },
    #[error("norm drifted to {norm}")]
    NormDrift { norm: f64 },
    #[error("gate {gate_index} is not Clifford (replace T gates before stabilizer simulation)")]
    NonClifford { gate_index: usize },
    #[error("gate {gate_index}: control wire {wire} has no deterministic Z value")]
    IndeterminateControl { gate_index: usize, wire: usize },
    #[error("gate {gate_index}: wire {wire} is not classical during feedback")]
    NonClassicalControl { gate_index: usize, wire: usize },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}
