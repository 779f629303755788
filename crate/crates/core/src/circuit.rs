//! Gate-list circuit representation and its line-oriented text format.
//!
//! ```text
//! wires 15; message 0; syndrome 1 2 3
//! H 3
//! CX 2 7
//! T 0
//! MCZ c+1 c+2 c-14 t0
//! CRESET c+14 t1 t2 t8
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::pauli::CliffordGate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("gate {index} ({gate}): wire {wire} out of range for {n_wires} wires")]
    WireOutOfRange {
        index: usize,
        gate: String,
        wire: usize,
        n_wires: usize,
    },
    #[error("gate {index} ({gate}) uses wire {wire} twice")]
    RepeatedWire {
        index: usize,
        gate: String,
        wire: usize,
    },
    #[error("gate {index} ({gate}) needs at least one {what}")]
    Empty {
        index: usize,
        gate: String,
        what: &'static str,
    },
    #[error("controlled reset at gate {index} is irreversible")]
    Irreversible { index: usize },
    #[error("line {line}, token {token:?}: {reason}")]
    Parse {
        line: usize,
        token: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    /// Fires on |1⟩.
    Positive,
    /// Fires on |0⟩.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub wire: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn positive(wire: usize) -> Self {
        Control {
            wire,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(wire: usize) -> Self {
        Control {
            wire,
            polarity: Polarity::Negative,
        }
    }

    /// Whether a computational-basis value on the control wire activates it.
    pub fn satisfied_by(&self, bit: bool) -> bool {
        match self.polarity {
            Polarity::Positive => bit,
            Polarity::Negative => !bit,
        }
    }
}

impl fmt::Display for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.polarity {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        };
        write!(f, "c{sign}{}", self.wire)
    }
}

/// Pauli applied by a multi-controlled gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlledBase {
    X,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    Clifford(CliffordGate),
    T(usize),
    Tdg(usize),
    MultiControlled {
        base: ControlledBase,
        controls: Vec<Control>,
        target: usize,
    },
    ControlledReset {
        control: Control,
        targets: Vec<usize>,
    },
}

impl From<CliffordGate> for Gate {
    fn from(g: CliffordGate) -> Self {
        Gate::Clifford(g)
    }
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Clifford(g) => g.name(),
            Gate::T(_) => "T",
            Gate::Tdg(_) => "TDG",
            Gate::MultiControlled {
                base: ControlledBase::X,
                ..
            } => "MCX",
            Gate::MultiControlled {
                base: ControlledBase::Z,
                ..
            } => "MCZ",
            Gate::ControlledReset { .. } => "CRESET",
        }
    }

    pub fn wires(&self) -> Vec<usize> {
        match self {
            Gate::Clifford(g) => g.wires(),
            Gate::T(q) | Gate::Tdg(q) => vec![*q],
            Gate::MultiControlled {
                controls, target, ..
            } => controls
                .iter()
                .map(|c| c.wire)
                .chain(std::iter::once(*target))
                .collect(),
            Gate::ControlledReset { control, targets } => std::iter::once(control.wire)
                .chain(targets.iter().copied())
                .collect(),
        }
    }

    pub fn is_clifford(&self) -> bool {
        matches!(self, Gate::Clifford(_))
    }

    pub fn as_clifford(&self) -> Option<&CliffordGate> {
        match self {
            Gate::Clifford(g) => Some(g),
            _ => None,
        }
    }

    pub fn is_cx(&self) -> bool {
        matches!(self, Gate::Clifford(CliffordGate::Cx(..)))
    }

    pub fn inverse(&self) -> Option<Gate> {
        match self {
            Gate::Clifford(g) => Some(Gate::Clifford(g.inverse())),
            Gate::T(q) => Some(Gate::Tdg(*q)),
            Gate::Tdg(q) => Some(Gate::T(*q)),
            Gate::MultiControlled { .. } => Some(self.clone()),
            Gate::ControlledReset { .. } => None,
        }
    }

    /// Same gate with every wire `w` replaced by `map[w]`.
    pub fn remap(&self, map: &[usize]) -> Gate {
        let m = |w: usize| map[w];
        match self {
            Gate::Clifford(g) => Gate::Clifford(match *g {
                CliffordGate::H(q) => CliffordGate::H(m(q)),
                CliffordGate::S(q) => CliffordGate::S(m(q)),
                CliffordGate::Sdg(q) => CliffordGate::Sdg(m(q)),
                CliffordGate::X(q) => CliffordGate::X(m(q)),
                CliffordGate::Y(q) => CliffordGate::Y(m(q)),
                CliffordGate::Z(q) => CliffordGate::Z(m(q)),
                CliffordGate::Cx(a, b) => CliffordGate::Cx(m(a), m(b)),
                CliffordGate::Cz(a, b) => CliffordGate::Cz(m(a), m(b)),
                CliffordGate::Swap(a, b) => CliffordGate::Swap(m(a), m(b)),
            }),
            Gate::T(q) => Gate::T(m(*q)),
            Gate::Tdg(q) => Gate::Tdg(m(*q)),
            Gate::MultiControlled {
                base,
                controls,
                target,
            } => Gate::MultiControlled {
                base: *base,
                controls: controls
                    .iter()
                    .map(|c| Control {
                        wire: m(c.wire),
                        polarity: c.polarity,
                    })
                    .collect(),
                target: m(*target),
            },
            Gate::ControlledReset { control, targets } => Gate::ControlledReset {
                control: Control {
                    wire: m(control.wire),
                    polarity: control.polarity,
                },
                targets: targets.iter().map(|&t| m(t)).collect(),
            },
        }
    }

    fn validate(&self, index: usize, n_wires: usize) -> Result<(), CircuitError> {
        match self {
            Gate::MultiControlled { controls, .. } if controls.is_empty() => {
                return Err(CircuitError::Empty {
                    index,
                    gate: self.to_string(),
                    what: "control",
                })
            }
            Gate::ControlledReset { targets, .. } if targets.is_empty() => {
                return Err(CircuitError::Empty {
                    index,
                    gate: self.to_string(),
                    what: "target",
                })
            }
            _ => {}
        }
        let wires = self.wires();
        for (i, &w) in wires.iter().enumerate() {
            if w >= n_wires {
                return Err(CircuitError::WireOutOfRange {
                    index,
                    gate: self.to_string(),
                    wire: w,
                    n_wires,
                });
            }
            if wires[..i].contains(&w) {
                return Err(CircuitError::RepeatedWire {
                    index,
                    gate: self.to_string(),
                    wire: w,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        match self {
            Gate::MultiControlled {
                controls, target, ..
            } => {
                for c in controls {
                    write!(f, " {c}")?;
                }
                write!(f, " t{target}")
            }
            Gate::ControlledReset { control, targets } => {
                write!(f, " {control}")?;
                for t in targets {
                    write!(f, " t{t}")?;
                }
                Ok(())
            }
            _ => {
                for w in self.wires() {
                    write!(f, " {w}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WireRole {
    Message,
    Syndrome,
    Input,
}

impl WireRole {
    fn keyword(self) -> &'static str {
        match self {
            WireRole::Message => "message",
            WireRole::Syndrome => "syndrome",
            WireRole::Input => "input",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    n_wires: usize,
    gates: Vec<Gate>,
    roles: Vec<Option<WireRole>>,
}

impl Circuit {
    pub fn new(n_wires: usize) -> Self {
        Circuit {
            n_wires,
            gates: Vec::new(),
            roles: vec![None; n_wires],
        }
    }

    pub fn from_gates(n_wires: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(n_wires);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: impl Into<Gate>) -> Result<(), CircuitError> {
        let gate = gate.into();
        gate.validate(self.gates.len(), self.n_wires)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(())
    }

    pub fn role(&self, wire: usize) -> Option<WireRole> {
        self.roles.get(wire).copied().flatten()
    }

    pub fn set_role(&mut self, wire: usize, role: WireRole) {
        self.roles[wire] = Some(role);
    }

    pub fn roles(&self) -> &[Option<WireRole>] {
        &self.roles
    }

    pub fn copy_roles_from(&mut self, other: &Circuit) {
        for (w, r) in other.roles.iter().enumerate().take(self.n_wires) {
            self.roles[w] = *r;
        }
    }

    pub fn message_wire(&self) -> Option<usize> {
        self.roles
            .iter()
            .position(|r| *r == Some(WireRole::Message))
    }

    pub fn syndrome_wires(&self) -> Vec<usize> {
        (0..self.n_wires)
            .filter(|&w| self.role(w) == Some(WireRole::Syndrome))
            .collect()
    }

    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(Gate::is_clifford)
    }

    pub fn count_cx(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cx()).count()
    }

    /// Copy with gate `index` removed.
    pub fn without_gate(&self, index: usize) -> Circuit {
        let mut c = self.clone();
        c.gates.remove(index);
        c
    }

    /// Reverses gate order and inverts each gate.
    pub fn invert(&self) -> Result<Circuit, CircuitError> {
        let mut out = Circuit::new(self.n_wires);
        out.roles = self.roles.clone();
        for (i, g) in self.gates.iter().enumerate().rev() {
            out.gates
                .push(g.inverse().ok_or(CircuitError::Irreversible { index: i })?);
        }
        Ok(out)
    }

    /// Rewrites every negative control as a positive one sandwiched by X gates.
    pub fn compile_polarity(&self) -> Circuit {
        let mut out = Circuit::new(self.n_wires);
        out.roles = self.roles.clone();
        for g in &self.gates {
            let negs: Vec<usize> = match g {
                Gate::MultiControlled { controls, .. } => controls
                    .iter()
                    .filter(|c| c.polarity == Polarity::Negative)
                    .map(|c| c.wire)
                    .collect(),
                Gate::ControlledReset { control, .. } if control.polarity == Polarity::Negative => {
                    vec![control.wire]
                }
                _ => Vec::new(),
            };
            if negs.is_empty() {
                out.gates.push(g.clone());
                continue;
            }
            let positive = match g {
                Gate::MultiControlled {
                    base,
                    controls,
                    target,
                } => Gate::MultiControlled {
                    base: *base,
                    controls: controls.iter().map(|c| Control::positive(c.wire)).collect(),
                    target: *target,
                },
                Gate::ControlledReset { control, targets } => Gate::ControlledReset {
                    control: Control::positive(control.wire),
                    targets: targets.clone(),
                },
                _ => unreachable!(),
            };
            for &w in &negs {
                out.gates.push(Gate::Clifford(CliffordGate::X(w)));
            }
            out.gates.push(positive);
            for &w in &negs {
                out.gates.push(Gate::Clifford(CliffordGate::X(w)));
            }
        }
        out
    }

    /// Stabilizer-simulation pass: drops every T and T† gate.
    pub fn without_t_gates(&self) -> Circuit {
        let mut out = self.clone();
        out.gates
            .retain(|g| !matches!(g, Gate::T(_) | Gate::Tdg(_)));
        out
    }

    /// Embeds this circuit into a larger register; `map[w]` is the new wire of `w`.
    pub fn remap(&self, map: &[usize], n_wires: usize) -> Result<Circuit, CircuitError> {
        let mut out = Circuit::new(n_wires);
        for g in &self.gates {
            out.push(g.remap(map))?;
        }
        Ok(out)
    }

    pub fn serialize(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Circuit, CircuitError> {
        let perr = |line: usize, token: &str, reason: &str| CircuitError::Parse {
            line,
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some(c) = circuit.as_mut() else {
                circuit = Some(parse_header(line, line_no)?);
                continue;
            };
            let mut tokens = line.split_whitespace();
            let name = tokens.next().unwrap_or_default();
            let args: Vec<&str> = tokens.collect();
            let wire = |tok: &str| -> Result<usize, CircuitError> {
                tok.parse::<usize>()
                    .map_err(|_| perr(line_no, tok, "expected wire index"))
            };
            let arity = |n: usize| -> Result<(), CircuitError> {
                if args.len() != n {
                    Err(perr(
                        line_no,
                        name,
                        &format!("expected {n} wire(s), got {}", args.len()),
                    ))
                } else {
                    Ok(())
                }
            };
            let gate = match name {
                "H" | "S" | "SDG" | "X" | "Y" | "Z" | "T" | "TDG" => {
                    arity(1)?;
                    let q = wire(args[0])?;
                    match name {
                        "H" => Gate::Clifford(CliffordGate::H(q)),
                        "S" => Gate::Clifford(CliffordGate::S(q)),
                        "SDG" => Gate::Clifford(CliffordGate::Sdg(q)),
                        "X" => Gate::Clifford(CliffordGate::X(q)),
                        "Y" => Gate::Clifford(CliffordGate::Y(q)),
                        "Z" => Gate::Clifford(CliffordGate::Z(q)),
                        "T" => Gate::T(q),
                        _ => Gate::Tdg(q),
                    }
                }
                "CX" | "CZ" | "SWAP" => {
                    arity(2)?;
                    let (a, b) = (wire(args[0])?, wire(args[1])?);
                    match name {
                        "CX" => Gate::Clifford(CliffordGate::Cx(a, b)),
                        "CZ" => Gate::Clifford(CliffordGate::Cz(a, b)),
                        _ => Gate::Clifford(CliffordGate::Swap(a, b)),
                    }
                }
                "MCX" | "MCZ" => {
                    let mut controls = Vec::new();
                    let mut target = None;
                    for tok in &args {
                        if let Some(t) = tok.strip_prefix('t') {
                            if target.is_some() {
                                return Err(perr(line_no, tok, "second target"));
                            }
                            target = Some(wire(t).map_err(|_| perr(line_no, tok, "bad target"))?);
                        } else if target.is_some() {
                            return Err(perr(line_no, tok, "control after target"));
                        } else {
                            controls.push(parse_control(tok, line_no)?);
                        }
                    }
                    let target = target.ok_or_else(|| perr(line_no, name, "missing target"))?;
                    let base = if name == "MCX" {
                        ControlledBase::X
                    } else {
                        ControlledBase::Z
                    };
                    Gate::MultiControlled {
                        base,
                        controls,
                        target,
                    }
                }
                "CRESET" => {
                    let first = args
                        .first()
                        .ok_or_else(|| perr(line_no, name, "missing control"))?;
                    let control = parse_control(first, line_no)?;
                    let mut targets = Vec::new();
                    for tok in &args[1..] {
                        let t = tok
                            .strip_prefix('t')
                            .ok_or_else(|| perr(line_no, tok, "expected target tN"))?;
                        targets.push(wire(t).map_err(|_| perr(line_no, tok, "bad target"))?);
                    }
                    Gate::ControlledReset { control, targets }
                }
                other => return Err(perr(line_no, other, "unknown gate")),
            };
            c.push(gate)
                .map_err(|e| perr(line_no, name, &e.to_string()))?;
        }
        circuit.ok_or_else(|| perr(0, "", "missing header line"))
    }
}

fn parse_control(tok: &str, line: usize) -> Result<Control, CircuitError> {
    let err = || CircuitError::Parse {
        line,
        token: tok.to_string(),
        reason: "expected control c+N or c-N".to_string(),
    };
    let rest = tok.strip_prefix('c').ok_or_else(err)?;
    let (polarity, num) = if let Some(n) = rest.strip_prefix('+') {
        (Polarity::Positive, n)
    } else if let Some(n) = rest.strip_prefix('-') {
        (Polarity::Negative, n)
    } else {
        return Err(err());
    };
    let wire = num.parse().map_err(|_| err())?;
    Ok(Control { wire, polarity })
}

fn parse_header(line: &str, line_no: usize) -> Result<Circuit, CircuitError> {
    let perr = |token: &str, reason: &str| CircuitError::Parse {
        line: line_no,
        token: token.to_string(),
        reason: reason.to_string(),
    };
    let mut sections = line.split(';').map(str::trim);
    let first = sections.next().unwrap_or_default();
    let mut toks = first.split_whitespace();
    if toks.next() != Some("wires") {
        return Err(perr(first, "header must start with `wires N`"));
    }
    let n_tok = toks
        .next()
        .ok_or_else(|| perr(first, "missing wire count"))?;
    let n: usize = n_tok.parse().map_err(|_| perr(n_tok, "bad wire count"))?;
    let mut c = Circuit::new(n);
    for section in sections {
        if section.is_empty() {
            continue;
        }
        let mut toks = section.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let role = match key {
            "message" => WireRole::Message,
            "syndrome" => WireRole::Syndrome,
            "input" => WireRole::Input,
            other => return Err(perr(other, "unknown header field")),
        };
        for tok in toks {
            let w: usize = tok.parse().map_err(|_| perr(tok, "bad wire index"))?;
            if w >= n {
                return Err(perr(tok, "wire out of range"));
            }
            c.set_role(w, role);
        }
    }
    Ok(c)
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "wires {}", self.n_wires)?;
        for role in [WireRole::Message, WireRole::Syndrome, WireRole::Input] {
            let wires: Vec<String> = (0..self.n_wires)
                .filter(|&w| self.role(w) == Some(role))
                .map(|w| w.to_string())
                .collect();
            if !wires.is_empty() {
                write!(f, "; {} {}", role.keyword(), wires.join(" "))?;
            }
        }
        writeln!(f)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Circuit::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_multi_controlled_line() {
        let c = Circuit::parse("wires 15; message 0\nMCX c+3 c-14 t0\n").unwrap();
        assert_eq!(
            c.gates()[0],
            Gate::MultiControlled {
                base: ControlledBase::X,
                controls: vec![Control::positive(3), Control::negative(14)],
                target: 0,
            }
        );
        assert_eq!(c.message_wire(), Some(0));
    }

    #[test]
    fn empty_circuit_is_header_only() {
        let c = Circuit::new(15);
        assert_eq!(c.serialize(), "wires 15\n");
        assert_eq!(Circuit::parse("wires 15\n").unwrap(), c);
    }

    #[test]
    fn parse_errors_carry_line_and_token() {
        let err = Circuit::parse("wires 3\nH 0\nFOO 1\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 3, ref token, .. } if token == "FOO"));
        let err = Circuit::parse("wires 3\nCX 0 0\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        let err = Circuit::parse("wires 3\nCX 0 9\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        let err = Circuit::parse("H 0\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 1, .. }));
        assert!(Circuit::parse("wires 3\nMCZ c+1\n").is_err());
        assert!(Circuit::parse("wires 3\nMCZ t0\n").is_err());
        assert!(Circuit::parse("wires 3\nCRESET c+1\n").is_err());
    }

    #[test]
    fn comments_are_ignored() {
        let c = Circuit::parse("# seed = 3\nwires 2 # two\n\nCX 0 1 # entangle\n").unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn invert_swaps_t_and_rejects_reset() {
        let mut c = Circuit::new(2);
        c.push(Gate::T(0)).unwrap();
        c.push(CliffordGate::S(1)).unwrap();
        let inv = c.invert().unwrap();
        assert_eq!(
            inv.gates(),
            &[Gate::Clifford(CliffordGate::Sdg(1)), Gate::Tdg(0)]
        );
        assert_eq!(inv.invert().unwrap(), c);
        c.push(Gate::ControlledReset {
            control: Control::positive(0),
            targets: vec![1],
        })
        .unwrap();
        assert_eq!(
            c.invert().unwrap_err(),
            CircuitError::Irreversible { index: 2 }
        );
    }

    #[test]
    fn polarity_compilation() {
        let mut c = Circuit::new(3);
        c.push(CliffordGate::H(0)).unwrap();
        assert_eq!(c.compile_polarity(), c);
        let mut c = Circuit::new(3);
        c.push(Gate::MultiControlled {
            base: ControlledBase::Z,
            controls: vec![Control::positive(1), Control::negative(2)],
            target: 0,
        })
        .unwrap();
        let compiled = c.compile_polarity();
        assert_eq!(compiled.serialize(), "wires 3\nX 2\nMCZ c+1 c+2 t0\nX 2\n");
    }

    #[test]
    fn construction_rejects_bad_gates() {
        let mut c = Circuit::new(3);
        assert!(c.push(CliffordGate::H(3)).is_err());
        assert!(c
            .push(Gate::MultiControlled {
                base: ControlledBase::X,
                controls: vec![],
                target: 0
            })
            .is_err());
        assert!(c
            .push(Gate::MultiControlled {
                base: ControlledBase::X,
                controls: vec![Control::positive(0)],
                target: 0
            })
            .is_err());
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let wires = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
        (0u8..13, wires, prop::collection::vec(any::<bool>(), n)).prop_map(move |(k, w, pol)| {
            let ctrl = |i: usize| Control {
                wire: w[i],
                polarity: if pol[i] {
                    Polarity::Positive
                } else {
                    Polarity::Negative
                },
            };
            match k {
                0 => Gate::Clifford(CliffordGate::H(w[0])),
                1 => Gate::Clifford(CliffordGate::S(w[0])),
                2 => Gate::Clifford(CliffordGate::Sdg(w[0])),
                3 => Gate::Clifford(CliffordGate::X(w[0])),
                4 => Gate::Clifford(CliffordGate::Y(w[0])),
                5 => Gate::Clifford(CliffordGate::Z(w[0])),
                6 => Gate::Clifford(CliffordGate::Cx(w[0], w[1])),
                7 => Gate::Clifford(CliffordGate::Cz(w[0], w[1])),
                8 => Gate::Clifford(CliffordGate::Swap(w[0], w[1])),
                9 => Gate::T(w[0]),
                10 => Gate::Tdg(w[0]),
                11 => Gate::MultiControlled {
                    base: if pol[0] {
                        ControlledBase::X
                    } else {
                        ControlledBase::Z
                    },
                    controls: (1..1 + (w[0] % 3) + 1).map(ctrl).collect(),
                    target: w[0],
                },
                _ => Gate::ControlledReset {
                    control: ctrl(0),
                    targets: w[1..2 + w[2] % 2].to_vec(),
                },
            }
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(gates in prop::collection::vec(arb_gate(6), 0..30), msg in 0usize..6) {
            let mut c = Circuit::from_gates(6, gates).unwrap();
            c.set_role(msg, WireRole::Message);
            let text = c.serialize();
            let back = Circuit::parse(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.serialize(), text);
        }
    }
}
