use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;

use super::{SimError, BASIS_TOLERANCE, MAX_SV_WIRES, MAX_SV_WIRES_WITH_ANCILLAS, NORM_TOLERANCE};
use crate::circuit::{Circuit, Control, ControlledBase, Gate, Polarity};
use crate::pauli::CliffordGate;

/// Single-qubit state as (amplitude of |0⟩, amplitude of |1⟩).
pub type Qubit = [Complex64; 2];

/// |A⟩ = (|0⟩ + e^{iπ/4}|1⟩)/√2.
pub fn magic_state() -> Qubit {
    [
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::from_polar(FRAC_1_SQRT_2, FRAC_PI_4),
    ]
}

/// Z|A⟩, the state a flipped input decays to.
pub fn magic_state_flipped() -> Qubit {
    let [a, b] = magic_state();
    [a, -b]
}

pub fn zero_state() -> Qubit {
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
}

pub fn plus_state() -> Qubit {
    [
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(FRAC_1_SQRT_2, 0.0),
    ]
}

/// Dense amplitudes; wire `q` is bit `q` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_wires: usize,
    amps: Vec<Complex64>,
}

/// Calls `f` on every index whose bits under `mask` equal `value`.
#[inline]
fn for_each_index(n_wires: usize, mask: usize, value: usize, mut f: impl FnMut(usize)) {
    let free = ((1usize << n_wires) - 1) & !mask;
    let mut s = 0usize;
    loop {
        f(s | value);
        s = s.wrapping_sub(free) & free;
        if s == 0 {
            break;
        }
    }
}

impl Statevector {
    pub fn zero(n_wires: usize) -> Result<Self, SimError> {
        Self::basis(n_wires, 0)
    }

    pub fn basis(n_wires: usize, index: usize) -> Result<Self, SimError> {
        if n_wires > MAX_SV_WIRES_WITH_ANCILLAS {
            return Err(SimError::TooManyWires {
                n_wires,
                max: MAX_SV_WIRES_WITH_ANCILLAS,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_wires];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_wires, amps })
    }

    /// Tensor product, `states[q]` on wire `q`.
    pub fn product(states: &[Qubit]) -> Result<Self, SimError> {
        let n = states.len();
        let mut sv = Self::zero(n)?;
        for (i, a) in sv.amps.iter_mut().enumerate() {
            *a = states
                .iter()
                .enumerate()
                .map(|(q, s)| s[(i >> q) & 1])
                .product();
        }
        Ok(sv)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n || n > MAX_SV_WIRES_WITH_ANCILLAS {
            return Err(SimError::TooManyWires {
                n_wires: n,
                max: MAX_SV_WIRES_WITH_ANCILLAS,
            });
        }
        Ok(Statevector { n_wires: n, amps })
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Appends `extra` wires in |0⟩ above the current ones.
    pub fn with_ancillas(&self, extra: usize) -> Result<Statevector, SimError> {
        let n = self.n_wires + extra;
        if n > MAX_SV_WIRES_WITH_ANCILLAS {
            return Err(SimError::TooManyWires {
                n_wires: n,
                max: MAX_SV_WIRES_WITH_ANCILLAS,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[..self.amps.len()].copy_from_slice(&self.amps);
        Ok(Statevector { n_wires: n, amps })
    }

    pub fn prob_one(&self, wire: usize) -> f64 {
        let bit = 1 << wire;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Computational-basis value of `wire` when it is within tolerance of |0⟩ or |1⟩.
    pub fn basis_value(&self, wire: usize) -> Option<bool> {
        let p1 = self.prob_one(wire);
        if p1 <= BASIS_TOLERANCE {
            Some(false)
        } else if p1 >= 1.0 - BASIS_TOLERANCE {
            Some(true)
        } else {
            None
        }
    }

    /// Reduced density matrix of one wire.
    pub fn reduced(&self, wire: usize) -> [[Complex64; 2]; 2] {
        let bit = 1 << wire;
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        for_each_index(self.n_wires, bit, 0, |i0| {
            let a0 = self.amps[i0];
            let a1 = self.amps[i0 | bit];
            rho[0][0] += a0 * a0.conj();
            rho[0][1] += a0 * a1.conj();
            rho[1][0] += a1 * a0.conj();
            rho[1][1] += a1 * a1.conj();
        });
        rho
    }

    /// ⟨ψ|ρ_wire|ψ⟩.
    pub fn wire_fidelity(&self, wire: usize, psi: &Qubit) -> f64 {
        let rho = self.reduced(wire);
        let mut f = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                f += psi[i].conj() * rho[i][j] * psi[j];
            }
        }
        f.re
    }

    fn check_norm(&self) -> Result<(), SimError> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE.max(1e-12 * self.amps.len() as f64) {
            return Err(SimError::NormDrift { norm });
        }
        Ok(())
    }

    pub fn apply_clifford(&mut self, g: &CliffordGate) {
        let n = self.n_wires;
        let amps = &mut self.amps;
        match *g {
            CliffordGate::H(q) => {
                let b = 1 << q;
                let s = FRAC_1_SQRT_2;
                for_each_index(n, b, 0, |i| {
                    let (x, y) = (amps[i], amps[i | b]);
                    amps[i] = (x + y) * s;
                    amps[i | b] = (x - y) * s;
                });
            }
            CliffordGate::S(q) => self.phase_on(1 << q, Complex64::new(0.0, 1.0)),
            CliffordGate::Sdg(q) => self.phase_on(1 << q, Complex64::new(0.0, -1.0)),
            CliffordGate::Z(q) => self.phase_on(1 << q, Complex64::new(-1.0, 0.0)),
            CliffordGate::X(q) => {
                let b = 1 << q;
                for_each_index(n, b, 0, |i| amps.swap(i, i | b));
            }
            CliffordGate::Y(q) => {
                let b = 1 << q;
                let im = Complex64::new(0.0, 1.0);
                for_each_index(n, b, 0, |i| {
                    let (x, y) = (amps[i], amps[i | b]);
                    amps[i] = -im * y;
                    amps[i | b] = im * x;
                });
            }
            CliffordGate::Cx(c, t) => {
                let (cb, tb) = (1 << c, 1 << t);
                for_each_index(n, cb | tb, cb, |i| amps.swap(i, i | tb));
            }
            CliffordGate::Cz(a, b) => self.phase_on((1 << a) | (1 << b), Complex64::new(-1.0, 0.0)),
            CliffordGate::Swap(a, b) => {
                let (ab, bb) = (1 << a, 1 << b);
                for_each_index(n, ab | bb, ab, |i| amps.swap(i, i ^ ab ^ bb));
            }
        }
    }

    /// Multiplies by `phase` every amplitude whose bits under `mask` are all set.
    fn phase_on(&mut self, mask: usize, phase: Complex64) {
        let amps = &mut self.amps;
        for_each_index(self.n_wires, mask, mask, |i| amps[i] *= phase);
    }

    fn control_mask(controls: &[Control]) -> (usize, usize) {
        let mut mask = 0;
        let mut value = 0;
        for c in controls {
            mask |= 1 << c.wire;
            if c.polarity == Polarity::Positive {
                value |= 1 << c.wire;
            }
        }
        (mask, value)
    }

    pub fn apply_multi_controlled(
        &mut self,
        base: ControlledBase,
        controls: &[Control],
        target: usize,
    ) {
        let (mask, value) = Self::control_mask(controls);
        let tb = 1 << target;
        let amps = &mut self.amps;
        match base {
            ControlledBase::X => {
                for_each_index(self.n_wires, mask | tb, value, |i| amps.swap(i, i | tb))
            }
            ControlledBase::Z => {
                for_each_index(self.n_wires, mask | tb, value | tb, |i| amps[i] = -amps[i])
            }
        }
    }

    /// Trajectory semantics: within the control-active branch each target must be
    /// (to tolerance) a basis state; it is then set to |0⟩.
    pub fn apply_reset_trajectory(
        &mut self,
        control: &Control,
        targets: &[usize],
    ) -> Result<(), SimError> {
        let (mask, value) = Self::control_mask(std::slice::from_ref(control));
        let total: f64 = {
            let mut t = 0.0;
            let amps = &self.amps;
            for_each_index(self.n_wires, mask, value, |i| t += amps[i].norm_sqr());
            t
        };
        if total <= BASIS_TOLERANCE {
            return Ok(());
        }
        for &t in targets {
            let tb = 1 << t;
            let mut w1 = 0.0;
            {
                let amps = &self.amps;
                for_each_index(self.n_wires, mask | tb, value | tb, |i| {
                    w1 += amps[i].norm_sqr()
                });
            }
            let p1 = w1 / total;
            let amps = &mut self.amps;
            if p1 >= 1.0 - BASIS_TOLERANCE {
                for_each_index(self.n_wires, mask | tb, value, |i| {
                    amps[i] = amps[i | tb];
                    amps[i | tb] = Complex64::new(0.0, 0.0);
                });
            } else if p1 <= BASIS_TOLERANCE {
                for_each_index(self.n_wires, mask | tb, value | tb, |i| {
                    amps[i] = Complex64::new(0.0, 0.0)
                });
            } else {
                return Err(SimError::NotBasisState {
                    wire: t,
                    prob_one: p1,
                });
            }
        }
        let norm = self.norm();
        for a in self.amps.iter_mut() {
            *a /= norm;
        }
        Ok(())
    }

    /// Unitary reset: swaps each target with its own fresh |0⟩ ancilla when the control fires.
    pub fn apply_reset_coherent(
        &mut self,
        control: &Control,
        targets: &[usize],
        ancillas: &[usize],
    ) {
        let (mask, value) = Self::control_mask(std::slice::from_ref(control));
        for (&t, &a) in targets.iter().zip(ancillas) {
            let (tb, ab) = (1 << t, 1 << a);
            let amps = &mut self.amps;
            for_each_index(self.n_wires, mask | tb | ab, value | tb, |i| {
                amps.swap(i, i ^ tb ^ ab)
            });
        }
    }

    pub fn apply_t(&mut self, wire: usize, dagger: bool) {
        let angle = if dagger { -FRAC_PI_4 } else { FRAC_PI_4 };
        self.phase_on(1 << wire, Complex64::from_polar(1.0, angle));
    }

    /// exp(-iθZ/2) on one wire.
    pub fn apply_rz(&mut self, wire: usize, theta: f64) {
        let b = 1 << wire;
        let lo = Complex64::from_polar(1.0, -theta / 2.0);
        let hi = Complex64::from_polar(1.0, theta / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & b == 0 { lo } else { hi };
        }
    }

    /// Applies one gate. `ancillas` supplies fresh wires for coherent resets;
    /// `None` selects trajectory semantics with basis-purity checks.
    pub fn apply(&mut self, gate: &Gate, ancillas: Option<&[usize]>) -> Result<(), SimError> {
        match gate {
            Gate::Clifford(g) => self.apply_clifford(g),
            Gate::T(q) => self.apply_t(*q, false),
            Gate::Tdg(q) => self.apply_t(*q, true),
            Gate::MultiControlled {
                base,
                controls,
                target,
            } => {
                if ancillas.is_none() {
                    for c in controls {
                        if self.basis_value(c.wire).is_none() {
                            return Err(SimError::NotBasisState {
                                wire: c.wire,
                                prob_one: self.prob_one(c.wire),
                            });
                        }
                    }
                }
                self.apply_multi_controlled(*base, controls, *target)
            }
            Gate::ControlledReset { control, targets } => match ancillas {
                Some(a) => self.apply_reset_coherent(control, targets, a),
                None => self.apply_reset_trajectory(control, targets)?,
            },
        }
        Ok(())
    }
}

/// Runs `circuit` on `input`. In coherent mode every controlled-reset target gets
/// a fresh ancilla wire appended above the circuit's wires, so the output may be wider.
pub fn sv_run(
    circuit: &Circuit,
    input: Statevector,
    coherent_mode: bool,
) -> Result<Statevector, SimError> {
    if circuit.n_wires() > MAX_SV_WIRES {
        return Err(SimError::TooManyWires {
            n_wires: circuit.n_wires(),
            max: MAX_SV_WIRES,
        });
    }
    if input.n_wires() != circuit.n_wires() {
        return Err(SimError::WireMismatch {
            state: input.n_wires(),
            circuit: circuit.n_wires(),
        });
    }
    let reset_targets: usize = circuit
        .gates()
        .iter()
        .map(|g| match g {
            Gate::ControlledReset { targets, .. } => targets.len(),
            _ => 0,
        })
        .sum();
    let mut state = if coherent_mode && reset_targets > 0 {
        input.with_ancillas(reset_targets)?
    } else {
        input
    };
    let mut next_ancilla = circuit.n_wires();
    for gate in circuit.gates() {
        if coherent_mode {
            let fresh: Vec<usize> = match gate {
                Gate::ControlledReset { targets, .. } => {
                    let v = (next_ancilla..next_ancilla + targets.len()).collect();
                    next_ancilla += targets.len();
                    v
                }
                _ => Vec::new(),
            };
            state.apply(gate, Some(&fresh))?;
        } else {
            state.apply(gate, None)?;
        }
    }
    state.check_norm()?;
    Ok(state)
}
