//! Bit-packed symplectic Pauli operators and their conjugation by Clifford gates.
//!
//! A [`PauliString`] stores an operator as `i^phase · ⊗_q σ(x_q, z_q)` where
//! `σ(0,0)=I`, `σ(1,0)=X`, `σ(0,1)=Z` and `σ(1,1)=Y`. Every tensor factor is
//! Hermitian, and `Y = iXZ`. Wire `q` lives in bit `q % 64` of word `q / 64`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("wire {wire} out of range for {n_wires}-wire operator")]
    WireOutOfRange { wire: usize, n_wires: usize },
    #[error("gate {gate} repeats wire {wire}")]
    RepeatedWire { gate: String, wire: usize },
    #[error("wire count mismatch: {left} vs {right}")]
    WireCountMismatch { left: usize, right: usize },
    #[error("cannot parse Pauli string {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// Single-wire Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Power of `i` in {0,1,2,3}: +1, +i, -1, -i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn negate(self) -> Phase {
        self.mul(Phase::MINUS_ONE)
    }

    /// True for ±1.
    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    fn token(self) -> &'static str {
        match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }
}

/// Clifford gate alphabet used by encoders, decoders and the frame simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    /// Control, target.
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl CliffordGate {
    pub fn name(&self) -> &'static str {
        match self {
            CliffordGate::H(_) => "H",
            CliffordGate::S(_) => "S",
            CliffordGate::Sdg(_) => "SDG",
            CliffordGate::X(_) => "X",
            CliffordGate::Y(_) => "Y",
            CliffordGate::Z(_) => "Z",
            CliffordGate::Cx(..) => "CX",
            CliffordGate::Cz(..) => "CZ",
            CliffordGate::Swap(..) => "SWAP",
        }
    }

    pub fn wires(&self) -> Vec<usize> {
        match *self {
            CliffordGate::H(q)
            | CliffordGate::S(q)
            | CliffordGate::Sdg(q)
            | CliffordGate::X(q)
            | CliffordGate::Y(q)
            | CliffordGate::Z(q) => vec![q],
            CliffordGate::Cx(a, b) | CliffordGate::Cz(a, b) | CliffordGate::Swap(a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn inverse(&self) -> CliffordGate {
        match *self {
            CliffordGate::S(q) => CliffordGate::Sdg(q),
            CliffordGate::Sdg(q) => CliffordGate::S(q),
            g => g,
        }
    }

    /// Checks wire range and distinctness against an `n_wires` register.
    pub fn validate(&self, n_wires: usize) -> Result<(), PauliError> {
        let wires = self.wires();
        for &w in &wires {
            if w >= n_wires {
                return Err(PauliError::WireOutOfRange { wire: w, n_wires });
            }
        }
        if wires.len() == 2 && wires[0] == wires[1] {
            return Err(PauliError::RepeatedWire {
                gate: self.name().to_string(),
                wire: wires[0],
            });
        }
        Ok(())
    }
}

#[inline]
fn word_bit(q: usize) -> (usize, u64) {
    (q / 64, 1u64 << (q % 64))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_wires: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n_wires: usize) -> Self {
        let words = n_wires.div_ceil(64).max(1);
        PauliString {
            n_wires,
            x: vec![0; words],
            z: vec![0; words],
            phase: Phase::ONE,
        }
    }

    /// `P` on wire `q`, identity elsewhere.
    pub fn single(n_wires: usize, wire: usize, pauli: Pauli) -> Result<Self, PauliError> {
        let mut p = Self::identity(n_wires);
        p.set(wire, pauli)?;
        Ok(p)
    }

    /// Same letter on every listed wire.
    pub fn uniform(n_wires: usize, wires: &[usize], pauli: Pauli) -> Result<Self, PauliError> {
        let mut p = Self::identity(n_wires);
        for &w in wires {
            p.set(w, pauli)?;
        }
        Ok(p)
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    fn check_wire(&self, wire: usize) -> Result<(), PauliError> {
        if wire >= self.n_wires {
            Err(PauliError::WireOutOfRange {
                wire,
                n_wires: self.n_wires,
            })
        } else {
            Ok(())
        }
    }

    pub fn x_bit(&self, q: usize) -> bool {
        let (w, b) = word_bit(q);
        self.x[w] & b != 0
    }

    pub fn z_bit(&self, q: usize) -> bool {
        let (w, b) = word_bit(q);
        self.z[w] & b != 0
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Overwrites the letter on `q` without touching the phase.
    pub fn set(&mut self, q: usize, pauli: Pauli) -> Result<(), PauliError> {
        self.check_wire(q)?;
        let (x, z) = pauli.bits();
        self.set_bits(q, x, z);
        Ok(())
    }

    #[inline]
    fn set_bits(&mut self, q: usize, x: bool, z: bool) {
        let (w, b) = word_bit(q);
        if x {
            self.x[w] |= b;
        } else {
            self.x[w] &= !b;
        }
        if z {
            self.z[w] |= b;
        } else {
            self.z[w] &= !b;
        }
    }

    pub fn toggle_x(&mut self, q: usize) {
        let (w, b) = word_bit(q);
        self.x[w] ^= b;
    }

    pub fn toggle_z(&mut self, q: usize) {
        let (w, b) = word_bit(q);
        self.z[w] ^= b;
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Wires with a nontrivial letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_wires)
            .filter(|&q| self.x_bit(q) || self.z_bit(q))
            .collect()
    }

    /// Equality of the Pauli letters, ignoring phase.
    pub fn same_letters(&self, other: &PauliString) -> bool {
        self.n_wires == other.n_wires && self.x == other.x && self.z == other.z
    }

    /// Symplectic inner product test.
    pub fn commutes(&self, other: &PauliString) -> Result<bool, PauliError> {
        if self.n_wires != other.n_wires {
            return Err(PauliError::WireCountMismatch {
                left: self.n_wires,
                right: other.n_wires,
            });
        }
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        Ok(parity == 0)
    }

    /// Operator product `self · other` with exact phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString, PauliError> {
        if self.n_wires != other.n_wires {
            return Err(PauliError::WireCountMismatch {
                left: self.n_wires,
                right: other.n_wires,
            });
        }
        let mut plus = 0u32;
        let mut minus = 0u32;
        let mut out = PauliString::identity(self.n_wires);
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let (y1, xo1, zo1) = (x1 & z1, x1 & !z1, !x1 & z1);
            let (y2, xo2, zo2) = (x2 & z2, x2 & !z2, !x2 & z2);
            plus += ((y1 & zo2) | (xo1 & y2) | (zo1 & xo2)).count_ones();
            minus += ((y1 & xo2) | (xo1 & zo2) | (zo1 & y2)).count_ones();
            out.x[i] = x1 ^ x2;
            out.z[i] = z1 ^ z2;
        }
        let k = self.phase.power() as u32 + other.phase.power() as u32 + plus + 3 * minus;
        out.phase = Phase::from_power(k);
        Ok(out)
    }

    /// Heisenberg update `P ← U P U†` for one Clifford gate, in place.
    pub fn conjugate_in_place(&mut self, gate: &CliffordGate) -> Result<(), PauliError> {
        gate.validate(self.n_wires)?;
        let mut flip = false;
        match *gate {
            CliffordGate::H(q) => {
                let (x, z) = (self.x_bit(q), self.z_bit(q));
                flip = x && z;
                self.set_bits(q, z, x);
            }
            CliffordGate::S(q) => {
                let (x, z) = (self.x_bit(q), self.z_bit(q));
                flip = x && z;
                self.set_bits(q, x, z ^ x);
            }
            CliffordGate::Sdg(q) => {
                let (x, z) = (self.x_bit(q), self.z_bit(q));
                flip = x && !z;
                self.set_bits(q, x, z ^ x);
            }
            CliffordGate::X(q) => flip = self.z_bit(q),
            CliffordGate::Z(q) => flip = self.x_bit(q),
            CliffordGate::Y(q) => flip = self.x_bit(q) ^ self.z_bit(q),
            CliffordGate::Cx(c, t) => {
                let (xc, zc, xt, zt) = (self.x_bit(c), self.z_bit(c), self.x_bit(t), self.z_bit(t));
                flip = xc && zt && !(xt ^ zc);
                self.set_bits(t, xt ^ xc, zt);
                self.set_bits(c, xc, zc ^ zt);
            }
            CliffordGate::Cz(a, b) => {
                let (xa, za, xb, zb) = (self.x_bit(a), self.z_bit(a), self.x_bit(b), self.z_bit(b));
                flip = xa && xb && (za ^ zb);
                self.set_bits(a, xa, za ^ xb);
                self.set_bits(b, xb, zb ^ xa);
            }
            CliffordGate::Swap(a, b) => {
                let (xa, za, xb, zb) = (self.x_bit(a), self.z_bit(a), self.x_bit(b), self.z_bit(b));
                self.set_bits(a, xb, zb);
                self.set_bits(b, xa, za);
            }
        }
        if flip {
            self.phase = self.phase.negate();
        }
        Ok(())
    }

    pub fn conjugate(&self, gate: &CliffordGate) -> Result<PauliString, PauliError> {
        let mut out = self.clone();
        out.conjugate_in_place(gate)?;
        Ok(out)
    }

    /// Parses the text form produced by `Display`, e.g. `"+Z0 X1 X8"` or `"-iY3"`.
    pub fn parse(text: &str, n_wires: usize) -> Result<Self, PauliError> {
        let err = |reason: &str| PauliError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        let (phase, rest) = if let Some(r) = trimmed.strip_prefix("+i") {
            (Phase::I, r)
        } else if let Some(r) = trimmed.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = trimmed.strip_prefix('+') {
            (Phase::ONE, r)
        } else if let Some(r) = trimmed.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else {
            return Err(err("missing sign"));
        };
        let mut p = PauliString::identity(n_wires);
        p.phase = phase;
        if rest.trim() == "I" {
            return Ok(p);
        }
        let mut last: Option<usize> = None;
        for token in rest.split_whitespace() {
            let mut chars = token.chars();
            let letter = match chars.next() {
                Some('X') => Pauli::X,
                Some('Y') => Pauli::Y,
                Some('Z') => Pauli::Z,
                _ => return Err(err(&format!("bad token {token:?}"))),
            };
            let wire: usize = chars
                .as_str()
                .parse()
                .map_err(|_| err(&format!("bad wire in {token:?}")))?;
            if last.is_some_and(|l| wire <= l) {
                return Err(err("wires must be strictly ascending"));
            }
            last = Some(wire);
            p.set(wire, letter).map_err(|e| err(&e.to_string()))?;
        }
        if last.is_none() {
            return Err(err("empty operator (write +I for identity)"));
        }
        Ok(p)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase.token())?;
        let support = self.support();
        if support.is_empty() {
            return write!(f, "I");
        }
        for (i, q) in support.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", self.get(*q).letter(), q)?;
        }
        Ok(())
    }
}
