use super::SimError;
use crate::circuit::{Circuit, Gate};
use crate::pauli::{CliffordGate, Pauli, PauliString, Phase};

/// Stabilizer tableau with destabilizers (Aaronson–Gottesman layout).
/// Rows are stored as real-phase Pauli strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    n_wires: usize,
    destabilizers: Vec<PauliString>,
    stabilizers: Vec<PauliString>,
}

/// Value read from a control wire while resolving a multi-controlled gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlRead {
    pub gate_index: usize,
    pub wire: usize,
    pub value: bool,
}

#[derive(Debug, Clone)]
pub struct TabOutcome {
    pub tableau: Tableau,
    pub reads: Vec<ControlRead>,
}

impl Tableau {
    /// |0…0⟩.
    pub fn new(n_wires: usize) -> Self {
        let row = |q: usize, p: Pauli| PauliString::single(n_wires, q, p).expect("wire in range");
        Tableau {
            n_wires,
            destabilizers: (0..n_wires).map(|q| row(q, Pauli::X)).collect(),
            stabilizers: (0..n_wires).map(|q| row(q, Pauli::Z)).collect(),
        }
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    pub fn apply_clifford(&mut self, g: &CliffordGate) -> Result<(), SimError> {
        for row in self
            .destabilizers
            .iter_mut()
            .chain(self.stabilizers.iter_mut())
        {
            row.conjugate_in_place(g)?;
        }
        Ok(())
    }

    /// Applies a Pauli operator (phase ignored) as a gate.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<(), SimError> {
        for q in p.support() {
            let g = match p.get(q) {
                Pauli::X => CliffordGate::X(q),
                Pauli::Y => CliffordGate::Y(q),
                Pauli::Z => CliffordGate::Z(q),
                Pauli::I => continue,
            };
            self.apply_clifford(&g)?;
        }
        Ok(())
    }

    /// Deterministic Z-basis value of `wire`, or `None` if a measurement would be random.
    pub fn peek_z(&self, wire: usize) -> Option<bool> {
        if self.stabilizers.iter().any(|s| s.x_bit(wire)) {
            return None;
        }
        let mut acc = PauliString::identity(self.n_wires);
        for (d, s) in self.destabilizers.iter().zip(&self.stabilizers) {
            if d.x_bit(wire) {
                acc = acc.mul(s).expect("equal widths");
            }
        }
        Some(acc.phase() == Phase::MINUS_ONE)
    }

    /// Deterministic X-basis value (`true` for |−⟩).
    pub fn peek_x(&self, wire: usize) -> Option<bool> {
        let mut t = self.clone();
        t.apply_clifford(&CliffordGate::H(wire)).ok()?;
        t.peek_z(wire)
    }

    /// Checks the symplectic relations of the generator set: stabilizers commute
    /// pairwise, destabilizer i anticommutes only with stabilizer i, all phases real.
    pub fn check_invariants(&self) -> bool {
        let n = self.n_wires;
        for i in 0..n {
            if !self.stabilizers[i].phase().is_real() || !self.destabilizers[i].phase().is_real() {
                return false;
            }
            for j in 0..n {
                let ss = self.stabilizers[i]
                    .commutes(&self.stabilizers[j])
                    .unwrap_or(false);
                let dd = self.destabilizers[i]
                    .commutes(&self.destabilizers[j])
                    .unwrap_or(false);
                let ds = self.destabilizers[i]
                    .commutes(&self.stabilizers[j])
                    .unwrap_or(true);
                if !ss || !dd || ds != (i != j) {
                    return false;
                }
            }
        }
        true
    }

    fn read_control(&self, gate_index: usize, wire: usize) -> Result<bool, SimError> {
        self.peek_z(wire)
            .ok_or(SimError::IndeterminateControl { gate_index, wire })
    }

    /// Applies one gate; multi-controlled gates and resets are resolved classically.
    pub fn apply(
        &mut self,
        gate_index: usize,
        gate: &Gate,
        reads: &mut Vec<ControlRead>,
    ) -> Result<(), SimError> {
        match gate {
            Gate::Clifford(g) => self.apply_clifford(g)?,
            Gate::T(_) | Gate::Tdg(_) => return Err(SimError::NonClifford { gate_index }),
            Gate::MultiControlled {
                base,
                controls,
                target,
            } => {
                let mut fire = true;
                for c in controls {
                    let value = self.read_control(gate_index, c.wire)?;
                    reads.push(ControlRead {
                        gate_index,
                        wire: c.wire,
                        value,
                    });
                    fire &= c.satisfied_by(value);
                }
                if fire {
                    let g = match base {
                        crate::circuit::ControlledBase::X => CliffordGate::X(*target),
                        crate::circuit::ControlledBase::Z => CliffordGate::Z(*target),
                    };
                    self.apply_clifford(&g)?;
                }
            }
            Gate::ControlledReset { control, targets } => {
                let value = self.read_control(gate_index, control.wire)?;
                reads.push(ControlRead {
                    gate_index,
                    wire: control.wire,
                    value,
                });
                if control.satisfied_by(value) {
                    for &t in targets {
                        if self.read_control(gate_index, t)? {
                            self.apply_clifford(&CliffordGate::X(t))?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs a Clifford circuit (plus classically resolvable controlled gates) on `state`.
pub fn tab_run(circuit: &Circuit, state: Tableau) -> Result<TabOutcome, SimError> {
    if state.n_wires() != circuit.n_wires() {
        return Err(SimError::WireMismatch {
            state: state.n_wires(),
            circuit: circuit.n_wires(),
        });
    }
    let mut tableau = state;
    let mut reads = Vec::new();
    for (i, g) in circuit.gates().iter().enumerate() {
        tableau.apply(i, g, &mut reads)?;
    }
    Ok(TabOutcome { tableau, reads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Control, ControlledBase};

    #[test]
    fn bell_pair_reads() {
        let mut t = Tableau::new(2);
        t.apply_clifford(&CliffordGate::H(0)).unwrap();
        assert_eq!(t.peek_x(0), Some(false));
        assert_eq!(t.peek_z(0), None);
        t.apply_clifford(&CliffordGate::Cx(0, 1)).unwrap();
        assert_eq!(t.peek_z(1), None);
        assert!(t.check_invariants());
        t.apply_clifford(&CliffordGate::X(0)).unwrap();
        t.apply_clifford(&CliffordGate::H(0)).unwrap();
        t.apply_clifford(&CliffordGate::H(1)).unwrap();
        // (|10⟩+|01⟩) in the X basis: still entangled
        assert_eq!(t.peek_z(0), None);
    }

    #[test]
    fn basis_values_follow_x_gates() {
        let mut t = Tableau::new(3);
        t.apply_clifford(&CliffordGate::X(1)).unwrap();
        t.apply_clifford(&CliffordGate::Cx(1, 2)).unwrap();
        assert_eq!(t.peek_z(0), Some(false));
        assert_eq!(t.peek_z(1), Some(true));
        assert_eq!(t.peek_z(2), Some(true));
        t.apply_clifford(&CliffordGate::H(0)).unwrap();
        t.apply_clifford(&CliffordGate::Z(0)).unwrap();
        assert_eq!(t.peek_x(0), Some(true));
    }

    #[test]
    fn controlled_gates_resolve_classically() {
        let mut c = Circuit::new(3);
        c.push(CliffordGate::X(1)).unwrap();
        c.push(Gate::MultiControlled {
            base: ControlledBase::X,
            controls: vec![Control::positive(1), Control::negative(2)],
            target: 0,
        })
        .unwrap();
        c.push(Gate::ControlledReset {
            control: Control::positive(0),
            targets: vec![1],
        })
        .unwrap();
        let out = tab_run(&c, Tableau::new(3)).unwrap();
        assert_eq!(out.tableau.peek_z(0), Some(true));
        assert_eq!(out.tableau.peek_z(1), Some(false));
        assert_eq!(out.reads.len(), 3);
    }

    #[test]
    fn indeterminate_control_is_an_error() {
        let mut c = Circuit::new(2);
        c.push(CliffordGate::H(1)).unwrap();
        c.push(Gate::MultiControlled {
            base: ControlledBase::Z,
            controls: vec![Control::positive(1)],
            target: 0,
        })
        .unwrap();
        assert!(matches!(
            tab_run(&c, Tableau::new(2)),
            Err(SimError::IndeterminateControl {
                gate_index: 1,
                wire: 1
            })
        ));
        let mut t = Circuit::new(1);
        t.push(Gate::T(0)).unwrap();
        assert!(tab_run(&t, Tableau::new(1)).is_err());
        assert!(tab_run(&t.without_t_gates(), Tableau::new(1)).is_ok());
    }
}
