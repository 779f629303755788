use super::SimError;
use crate::circuit::{Circuit, ControlledBase, Gate};
use crate::pauli::{CliffordGate, PauliString};

/// Pauli difference between a noisy run and the ideal run. Phase is ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliFrame {
    pauli: PauliString,
}

impl PauliFrame {
    pub fn new(n_wires: usize) -> Self {
        PauliFrame {
            pauli: PauliString::identity(n_wires),
        }
    }

    pub fn from_pauli(p: &PauliString) -> Self {
        let mut pauli = p.clone();
        pauli.set_phase(Default::default());
        PauliFrame { pauli }
    }

    pub fn pauli(&self) -> &PauliString {
        &self.pauli
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.pauli.x_bit(q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.pauli.z_bit(q)
    }

    pub fn propagate(&mut self, gate_index: usize, gate: &Gate) -> Result<(), SimError> {
        match gate {
            Gate::Clifford(g) => Ok(self.pauli.conjugate_in_place(g)?),
            _ => Err(SimError::NonClifford { gate_index }),
        }
    }

    /// Propagates through a Clifford-only circuit.
    pub fn run_clifford(&mut self, circuit: &Circuit) -> Result<(), SimError> {
        for (i, g) in circuit.gates().iter().enumerate() {
            self.propagate(i, g)?;
        }
        Ok(())
    }

    /// Evaluates a feedback block whose control and reset wires are classical.
    ///
    /// The ideal run starts the block with every wire except `quantum_wires` at |0⟩;
    /// a wire's actual value is its ideal value XOR the frame's X bit. A controlled
    /// gate contributes its Pauli to the frame exactly when it fires in one run but
    /// not the other.
    pub fn run_feedback(&mut self, cfn: &Circuit, quantum_wires: &[usize]) -> Result<(), SimError> {
        let mut ideal = vec![false; cfn.n_wires()];
        let classical = |i: usize, w: usize| {
            if quantum_wires.contains(&w) {
                Err(SimError::NonClassicalControl {
                    gate_index: i,
                    wire: w,
                })
            } else {
                Ok(())
            }
        };
        for (i, gate) in cfn.gates().iter().enumerate() {
            match gate {
                Gate::Clifford(g) => {
                    match *g {
                        CliffordGate::X(q) | CliffordGate::Y(q) => ideal[q] ^= true,
                        CliffordGate::Cx(c, t) => {
                            classical(i, c)?;
                            ideal[t] ^= ideal[c];
                        }
                        CliffordGate::Swap(a, b) => ideal.swap(a, b),
                        CliffordGate::H(q) if !quantum_wires.contains(&q) => {
                            return Err(SimError::NonClassicalControl {
                                gate_index: i,
                                wire: q,
                            })
                        }
                        _ => {}
                    }
                    self.pauli.conjugate_in_place(g)?;
                }
                Gate::T(_) | Gate::Tdg(_) => return Err(SimError::NonClifford { gate_index: i }),
                Gate::MultiControlled {
                    base,
                    controls,
                    target,
                } => {
                    let mut fires_actual = true;
                    let mut fires_ideal = true;
                    for c in controls {
                        classical(i, c.wire)?;
                        let ideal_bit = ideal[c.wire];
                        fires_ideal &= c.satisfied_by(ideal_bit);
                        fires_actual &= c.satisfied_by(ideal_bit ^ self.pauli.x_bit(c.wire));
                    }
                    if *base == ControlledBase::X && fires_ideal {
                        ideal[*target] ^= true;
                    }
                    if fires_actual != fires_ideal {
                        match base {
                            ControlledBase::X => self.pauli.toggle_x(*target),
                            ControlledBase::Z => self.pauli.toggle_z(*target),
                        }
                    }
                }
                Gate::ControlledReset { control, targets } => {
                    classical(i, control.wire)?;
                    let ideal_bit = ideal[control.wire];
                    let fires_ideal = control.satisfied_by(ideal_bit);
                    let fires_actual =
                        control.satisfied_by(ideal_bit ^ self.pauli.x_bit(control.wire));
                    for &t in targets {
                        classical(i, t)?;
                        let actual = ideal[t] ^ self.pauli.x_bit(t);
                        let new_actual = !fires_actual && actual;
                        let new_ideal = !fires_ideal && ideal[t];
                        ideal[t] = new_ideal;
                        if self.pauli.x_bit(t) != (new_actual ^ new_ideal) {
                            self.pauli.toggle_x(t);
                        }
                        if fires_actual && self.pauli.z_bit(t) {
                            self.pauli.toggle_z(t);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Decoder followed by its feedback block, both over the same register.
#[derive(Debug, Clone)]
pub struct FrameStage {
    pub decoder: Circuit,
    pub cfn: Circuit,
    /// Wires that are not classical at feedback time (message outputs).
    pub quantum_wires: Vec<usize>,
}

/// Propagates `flips` through decoder then feedback; returns the final frame.
pub fn frame_run(
    decoder: &Circuit,
    cfn: &Circuit,
    flips: &PauliString,
    message_wire: usize,
) -> Result<PauliFrame, SimError> {
    let mut frame = PauliFrame::from_pauli(flips);
    frame.run_clifford(decoder)?;
    frame.run_feedback(cfn, &[message_wire])?;
    Ok(frame)
}

/// Runs a sequence of stages (e.g. the rounds of a composed distillation circuit).
pub fn frame_run_stages(
    stages: &[FrameStage],
    flips: &PauliString,
) -> Result<PauliFrame, SimError> {
    let mut frame = PauliFrame::from_pauli(flips);
    for stage in stages {
        frame.run_clifford(&stage.decoder)?;
        frame.run_feedback(&stage.cfn, &stage.quantum_wires)?;
    }
    Ok(frame)
}
