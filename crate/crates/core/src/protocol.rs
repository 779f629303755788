//! The distillation circuit: encoded |+⟩, transversal T†, Z noise, decoder and
//! feedback, with one failure indicator per simulator.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::cfn::{
    derive_flip_table, derive_sector_table, synthesize_cfn, CfnBackend, CfnError, FlipTable, Sector,
};
use crate::circuit::{Circuit, CircuitError, Gate};
use crate::code::{build_code, synthesize_encoder, CodeError, EncoderBundle, StabilizerCode};
use crate::pauli::{CliffordGate, PauliString};
use crate::sim::{
    frame_run, magic_state, sv_run, tab_run, zero_state, FrameStage, SimError, Statevector,
    Tableau, FIDELITY_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistillError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Cfn(#[from] CfnError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("message wire ended in a mixed outcome (fidelity {fidelity})")]
    IndefiniteOutcome { fidelity: f64 },
    #[error("message wire has no deterministic X value after the stabilizer run")]
    IndeterminateMessage,
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DecoderKind {
    #[default]
    Full,
    Simplified,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Full => "full",
            DecoderKind::Simplified => "simplified",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(DecoderKind::Full),
            "simplified" => Ok(DecoderKind::Simplified),
            _ => Err(format!(
                "unknown decoder `{s}` (expected full or simplified)"
            )),
        }
    }
}

/// Everything needed to run and score the protocol for one decoder and backend.
#[derive(Debug)]
pub struct Distiller {
    pub code: StabilizerCode,
    pub bundle: EncoderBundle,
    pub decoder_kind: DecoderKind,
    pub backend: CfnBackend,
    pub table: FlipTable,
    pub cfn: Circuit,
    suffix: Circuit,
    encoded: OnceLock<Statevector>,
    encoded_tab: Tableau,
}

impl Distiller {
    pub fn new(decoder_kind: DecoderKind, backend: CfnBackend) -> Result<Self, DistillError> {
        let code = build_code();
        let bundle = synthesize_encoder(&code)?;
        Self::from_parts(code, bundle, decoder_kind, backend)
    }

    pub fn from_parts(
        code: StabilizerCode,
        bundle: EncoderBundle,
        decoder_kind: DecoderKind,
        backend: CfnBackend,
    ) -> Result<Self, DistillError> {
        let decoder = match decoder_kind {
            DecoderKind::Full => &bundle.decoder,
            DecoderKind::Simplified => &bundle.simplified_decoder,
        };
        let table = match derive_flip_table(decoder) {
            Ok(t) => t,
            Err(_) if decoder_kind == DecoderKind::Simplified => {
                derive_sector_table(decoder, &[Sector::Z])?
            }
            Err(e) => return Err(e.into()),
        };
        let cfn = synthesize_cfn(&table, backend)?;
        Self::with_cfn(code, bundle, decoder_kind, backend, table, cfn)
    }

    /// Uses a caller-supplied feedback block instead of a synthesized one.
    pub fn with_cfn(
        code: StabilizerCode,
        bundle: EncoderBundle,
        decoder_kind: DecoderKind,
        backend: CfnBackend,
        table: FlipTable,
        cfn: Circuit,
    ) -> Result<Self, DistillError> {
        let decoder = match decoder_kind {
            DecoderKind::Full => &bundle.decoder,
            DecoderKind::Simplified => &bundle.simplified_decoder,
        };
        let mut suffix = decoder.clone();
        suffix.extend(&cfn)?;
        let mut encoded_tab = Tableau::new(code.n);
        encoded_tab.apply_clifford(&CliffordGate::H(0))?;
        let encoded_tab = tab_run(&bundle.encoder, encoded_tab)?.tableau;
        Ok(Distiller {
            code,
            bundle,
            decoder_kind,
            backend,
            table,
            cfn,
            suffix,
            encoded: OnceLock::new(),
            encoded_tab,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.code.n
    }

    pub fn decoder(&self) -> &Circuit {
        match self.decoder_kind {
            DecoderKind::Full => &self.bundle.decoder,
            DecoderKind::Simplified => &self.bundle.simplified_decoder,
        }
    }

    /// Decoder followed by the feedback block.
    pub fn suffix(&self) -> &Circuit {
        &self.suffix
    }

    /// H on the message, encoder, then T† on every wire. Noise acts after this.
    pub fn preparation(&self) -> Circuit {
        let n = self.code.n;
        let mut c = Circuit::new(n);
        c.push(CliffordGate::H(0)).expect("wire 0");
        c.extend(&self.bundle.encoder).expect("same register");
        for q in 0..n {
            c.push(Gate::Tdg(q)).expect("in range");
        }
        c.copy_roles_from(&self.bundle.encoder);
        c
    }

    /// The whole noiseless protocol as one circuit.
    pub fn distillation_circuit(&self) -> Circuit {
        let mut c = self.preparation();
        c.extend(&self.suffix).expect("same register");
        c
    }

    /// State right before the noise layer (computed once).
    pub fn encoded_state(&self) -> Result<&Statevector, DistillError> {
        if let Some(s) = self.encoded.get() {
            return Ok(s);
        }
        let s = sv_run(&self.preparation(), Statevector::zero(self.code.n)?, false)?;
        Ok(self.encoded.get_or_init(|| s))
    }

    fn flips_to_pauli(&self, flips: u64) -> PauliString {
        let n = self.code.n;
        let mut p = PauliString::identity(n);
        for q in (0..n).filter(|q| flips >> q & 1 == 1) {
            p.toggle_z(q);
        }
        p
    }

    /// Fidelity of the message wire with |A⟩ after Z flips on the inputs in `flips`.
    pub fn sv_fidelity(&self, flips: u64) -> Result<f64, DistillError> {
        let mut state = self.encoded_state()?.clone();
        for q in (0..self.code.n).filter(|q| flips >> q & 1 == 1) {
            state.apply_clifford(&CliffordGate::Z(q));
        }
        let out = sv_run(&self.suffix, state, false)?;
        Ok(out.wire_fidelity(0, &magic_state()))
    }

    /// Statevector failure indicator; the outcome of a Pauli trajectory must be definite.
    pub fn sv_failure(&self, flips: u64) -> Result<bool, DistillError> {
        let fidelity = self.sv_fidelity(flips)?;
        if fidelity > 1.0 - FIDELITY_TOLERANCE {
            Ok(false)
        } else if fidelity < FIDELITY_TOLERANCE {
            Ok(true)
        } else {
            Err(DistillError::IndefiniteOutcome { fidelity })
        }
    }

    /// Stabilizer failure indicator with every T gate replaced by the identity.
    pub fn tab_failure(&self, flips: u64) -> Result<bool, DistillError> {
        let mut t = self.encoded_tab.clone();
        t.apply_pauli(&self.flips_to_pauli(flips))?;
        let out = tab_run(&self.suffix, t)?;
        out.tableau
            .peek_x(0)
            .ok_or(DistillError::IndeterminateMessage)
    }

    pub fn frame_failure(&self, flips: u64) -> Result<bool, DistillError> {
        Ok(frame_run(self.decoder(), &self.cfn, &self.flips_to_pauli(flips), 0)?.z_bit(0))
    }

    /// Applies exp(−iθZ/2) to each listed input wire and returns the message
    /// fidelity with |A⟩, keeping controlled resets unitary.
    pub fn coherent_fidelity(&self, rotations: &[(usize, f64)]) -> Result<f64, DistillError> {
        let mut state = self.encoded_state()?.clone();
        for &(q, theta) in rotations {
            state.apply_rz(q, theta);
        }
        let out = sv_run(&self.suffix, state, true)?;
        Ok(out.wire_fidelity(0, &magic_state()))
    }

    /// Per-round frame stages of the `rounds`-fold composed protocol on 15^rounds
    /// inputs. Round k takes the outputs of round k−1 as its inputs; the final
    /// output is wire 0.
    pub fn composed_stages(&self, rounds: u32) -> Result<Vec<FrameStage>, DistillError> {
        let n = self.code.n;
        let total = n
            .checked_pow(rounds)
            .filter(|&t| rounds >= 1 && t <= 1 << 24)
            .ok_or_else(|| DistillError::Unsupported(format!("{rounds} rounds is out of range")))?;
        let mut stages = Vec::new();
        for k in 1..=rounds {
            let stride = n.pow(k - 1);
            let blocks = n.pow(rounds - k);
            let mut decoder = Circuit::new(total);
            let mut cfn = Circuit::new(total);
            let mut quantum = Vec::with_capacity(blocks);
            for b in 0..blocks {
                let map: Vec<usize> = (0..n).map(|j| (b * n + j) * stride).collect();
                decoder.extend(&self.decoder().remap(&map, total)?)?;
                cfn.extend(&self.cfn.remap(&map, total)?)?;
                quantum.push(map[0]);
            }
            stages.push(FrameStage {
                decoder,
                cfn,
                quantum_wires: quantum,
            });
        }
        Ok(stages)
    }
}

/// Reference state for the noiseless statevector check: |A⟩ on the message, |0⟩ elsewhere.
pub fn ideal_output(n_wires: usize) -> Result<Statevector, SimError> {
    let mut q = vec![zero_state(); n_wires];
    q[0] = magic_state();
    Statevector::product(&q)
}
