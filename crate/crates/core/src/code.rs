//! The [[15,1,3]] punctured Reed–Muller code, its unitary encoder and the
//! Z-sector decoder simplification pass.
//!
//! Code qubits are labelled by the fifteen nonzero 4-bit strings `v`; code
//! qubit index `i` carries label `i + 1`.

use thiserror::Error;

use crate::cfn::{derive_sector_table, CfnError, Sector};
use crate::circuit::{Circuit, CircuitError, WireRole};
use crate::gf2::{self, Basis};
use crate::pauli::{CliffordGate, Pauli, PauliError, PauliString};
use crate::sim::{tab_run, SimError, Tableau};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodeError {
    #[error("encoder condition ({condition}) violated: {detail}")]
    Condition { condition: char, detail: String },
    #[error("code must be CSS with k = 1 and n <= 64")]
    Unsupported,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Cfn(#[from] CfnError),
}

fn cond(condition: char, detail: impl Into<String>) -> CodeError {
    CodeError::Condition {
        condition,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerCode {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub x_generators: Vec<PauliString>,
    pub z_generators: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
}

/// Packs the letters of an operator on at most 64 qubits as `x | z << 64`.
pub fn symplectic(p: &PauliString) -> u128 {
    p.x_words()[0] as u128 | (p.z_words()[0] as u128) << 64
}

fn mask_of(p: &PauliString) -> (u64, u64) {
    (p.x_words()[0], p.z_words()[0])
}

fn from_mask(n: usize, mask: u64, pauli: Pauli) -> PauliString {
    let wires: Vec<usize> = (0..n).filter(|&q| mask >> q & 1 == 1).collect();
    PauliString::uniform(n, &wires, pauli).expect("mask within n")
}

/// Reduces an X-support mask modulo the RREF rows so it vanishes on every pivot.
fn reduce_on_pivots(mut v: u64, rows: &[u64], pivots: &[usize]) -> u64 {
    for (r, &p) in rows.iter().zip(pivots) {
        if v >> p & 1 == 1 {
            v ^= r;
        }
    }
    v
}

/// Builds the [[15,1,3]] code.
pub fn build_code() -> StabilizerCode {
    let n = 15;
    let labels = |pred: &dyn Fn(usize) -> bool| -> u64 {
        (0..n)
            .filter(|&i| pred(i + 1))
            .fold(0u64, |m, i| m | 1 << i)
    };
    let bit = |v: usize, b: usize| v >> b & 1 == 1;
    let x_generators: Vec<PauliString> = (0..4)
        .map(|b| from_mask(n, labels(&|v| bit(v, b)), Pauli::X))
        .collect();
    let mut z_generators: Vec<PauliString> = (0..4)
        .map(|b| from_mask(n, labels(&|v| bit(v, b)), Pauli::Z))
        .collect();
    for b in 0..4 {
        for c in b + 1..4 {
            z_generators.push(from_mask(n, labels(&|v| bit(v, b) && bit(v, c)), Pauli::Z));
        }
    }
    // Projective line {0001, 0010, 0011}.
    let logical_z = from_mask(n, labels(&|v| v <= 3), Pauli::Z);
    let x_rows: Vec<u64> = x_generators.iter().map(|g| mask_of(g).0).collect();
    let (rows, pivots) = gf2::rref(&x_rows, n);
    let all = (1u64 << n) - 1;
    let logical_x = from_mask(n, reduce_on_pivots(all, &rows, &pivots), Pauli::X);
    StabilizerCode {
        n,
        k: 1,
        d: 3,
        x_generators,
        z_generators,
        logical_x,
        logical_z,
    }
}

impl StabilizerCode {
    pub fn generators(&self) -> impl Iterator<Item = &PauliString> {
        self.x_generators.iter().chain(&self.z_generators)
    }

    pub fn stabilizer_basis(&self) -> Basis {
        let mut b = Basis::new();
        for g in self.generators() {
            b.insert(symplectic(g));
        }
        b
    }

    /// Letters of `p` lie in the stabilizer group (phase ignored).
    pub fn in_stabilizer_group(&self, p: &PauliString) -> bool {
        self.stabilizer_basis().contains(symplectic(p))
    }

    pub fn commutes_with_all(&self, p: &PauliString) -> bool {
        self.generators().all(|g| g.commutes(p).unwrap_or(false))
    }

    /// Structural checks: commutation, generator count, CSS form, logical algebra.
    pub fn check(&self) -> Result<(), String> {
        let gens: Vec<&PauliString> = self.generators().collect();
        if gens.len() != self.n - self.k {
            return Err(format!(
                "{} generators, expected {}",
                gens.len(),
                self.n - self.k
            ));
        }
        if gf2::rank(&gens.iter().map(|g| symplectic(g)).collect::<Vec<_>>()) != gens.len() {
            return Err("generators are dependent".into());
        }
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                if !a.commutes(b).unwrap_or(false) {
                    return Err(format!("{a} and {b} anticommute"));
                }
            }
        }
        if self
            .x_generators
            .iter()
            .any(|g| g.z_words().iter().any(|&w| w != 0))
            || self
                .z_generators
                .iter()
                .any(|g| g.x_words().iter().any(|&w| w != 0))
        {
            return Err("not in CSS form".into());
        }
        for l in [&self.logical_x, &self.logical_z] {
            if !self.commutes_with_all(l) {
                return Err(format!("logical {l} anticommutes with a generator"));
            }
        }
        if self.logical_x.commutes(&self.logical_z).unwrap_or(true) {
            return Err("logical X and Z commute".into());
        }
        Ok(())
    }
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        start: usize,
        n: usize,
        k: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..n {
            cur.push(i);
            if rec(i + 1, n, k, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f)
}

/// Smallest weight ≤ `w_max` of an undetectable nontrivial logical operator, by
/// exhaustive enumeration of all Paulis of that weight. `None` when none exists.
pub fn verify_distance(code: &StabilizerCode, w_max: usize) -> Option<usize> {
    let stab = code.stabilizer_basis();
    let gens: Vec<u128> = code.generators().map(symplectic).collect();
    let commutes_all = |v: u128| {
        gens.iter().all(|&g| {
            let (vx, vz) = (v as u64, (v >> 64) as u64);
            let (gx, gz) = (g as u64, (g >> 64) as u64);
            ((vx & gz) ^ (vz & gx)).count_ones() % 2 == 0
        })
    };
    for w in 1..=w_max {
        let mut found = false;
        combinations(code.n, w, &mut |support| {
            for letters in 0..3usize.pow(w as u32) {
                let mut v = 0u128;
                let mut l = letters;
                for &q in support {
                    let (x, z) = [(1, 0), (1, 1), (0, 1)][l % 3];
                    l /= 3;
                    v |= (x as u128) << q | (z as u128) << (64 + q);
                }
                if commutes_all(v) && !stab.contains(v) {
                    found = true;
                    return true;
                }
            }
            false
        });
        if found {
            return Some(w);
        }
    }
    None
}

/// Encoder, decoder and Z-sector simplified decoder for one code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderBundle {
    pub encoder: Circuit,
    pub decoder: Circuit,
    pub simplified_decoder: Circuit,
    /// `wire_map[i]` is the circuit wire carrying code qubit `i`; the message is wire 0.
    pub wire_map: Vec<usize>,
    /// Number of leading encoder gates that rotate the syndrome basis.
    pub alignment_gates: usize,
}

impl EncoderBundle {
    /// Relabels a code-qubit operator onto circuit wires.
    pub fn to_wires(&self, p: &PauliString) -> PauliString {
        let mut out = PauliString::identity(p.n_wires());
        for q in p.support() {
            out.set(self.wire_map[q], p.get(q)).expect("bijection");
        }
        out.set_phase(p.phase());
        out
    }
}

/// Heisenberg image `C P C†` of `p` through a Clifford-only circuit.
pub fn conjugate_through(p: &PauliString, circuit: &Circuit) -> Result<PauliString, CodeError> {
    let mut out = p.clone();
    for (i, g) in circuit.gates().iter().enumerate() {
        let g = g
            .as_clifford()
            .ok_or(SimError::NonClifford { gate_index: i })?;
        out.conjugate_in_place(g)?;
    }
    Ok(out)
}

/// Synthesizes a CSS encoder: message fan-out of the reduced logical X,
/// Hadamards on the RREF pivots of the X-check matrix, and one CX fan per
/// X generator. A leading block of CX gates on the pivot wires rotates the
/// syndrome basis so that the message-flip parity of single Z errors lands on
/// a single wire.
pub fn synthesize_encoder(code: &StabilizerCode) -> Result<EncoderBundle, CodeError> {
    let n = code.n;
    if code.k != 1 || n > 64 {
        return Err(CodeError::Unsupported);
    }
    code.check().map_err(|e| cond('c', e))?;
    let x_rows: Vec<u64> = code.x_generators.iter().map(|g| mask_of(g).0).collect();
    let (rows, pivots) = gf2::rref(&x_rows, n);
    let (lx_mask, lx_z) = mask_of(&code.logical_x);
    if lx_z != 0 || mask_of(&code.logical_z).0 != 0 {
        return Err(CodeError::Unsupported);
    }
    let l_red = reduce_on_pivots(lx_mask, &rows, &pivots);
    let lz_mask = mask_of(&code.logical_z).1;
    // Message qubit: a non-pivot in the logical X support whose Z image is the logical Z.
    let message = (0..n)
        .filter(|q| !pivots.contains(q) && l_red >> q & 1 == 1)
        .find(|&m| {
            let image = rows
                .iter()
                .zip(&pivots)
                .filter(|(r, _)| *r >> m & 1 == 1)
                .fold(1u64 << m, |acc, (_, &p)| acc | 1 << p);
            image == lz_mask
        })
        .ok_or_else(|| {
            cond(
                'a',
                "no message qubit maps Z onto the logical Z representative",
            )
        })?;

    let mut wire_map = vec![0usize; n];
    let mut next = 1;
    for (q, w) in wire_map.iter_mut().enumerate() {
        if q == message {
            *w = 0;
        } else {
            *w = next;
            next += 1;
        }
    }
    let w = |q: usize| wire_map[q];

    let mut body = Circuit::new(n);
    for t in (0..n).filter(|&t| t != message && l_red >> t & 1 == 1) {
        body.push(CliffordGate::Cx(w(message), w(t)))?;
    }
    for &p in &pivots {
        body.push(CliffordGate::H(w(p)))?;
    }
    for (r, &p) in rows.iter().zip(&pivots) {
        for t in (0..n).filter(|&t| t != p && r >> t & 1 == 1) {
            body.push(CliffordGate::Cx(w(p), w(t)))?;
        }
    }

    let alignment = syndrome_alignment(&body, &pivots.iter().map(|&p| w(p)).collect::<Vec<_>>())?;
    let mut encoder = Circuit::new(n);
    encoder.extend(&alignment)?;
    encoder.extend(&body)?;
    encoder.set_role(0, WireRole::Message);
    for wire in 1..n {
        encoder.set_role(wire, WireRole::Syndrome);
    }
    let decoder = encoder.invert()?;
    let mut bundle = EncoderBundle {
        encoder,
        decoder: decoder.clone(),
        simplified_decoder: decoder,
        wire_map,
        alignment_gates: alignment.len(),
    };
    check_encoder_conditions(code, &bundle)?;
    bundle.simplified_decoder = simplify_decoder(&bundle)?;
    Ok(bundle)
}

/// CX gates on the pivot wires (acting first, on |0⟩) that make the
/// message-flip function of single Z errors a veto on one syndrome wire.
/// Empty when the flip function is not affine in the syndrome.
fn syndrome_alignment(body: &Circuit, pivot_wires: &[usize]) -> Result<Circuit, CodeError> {
    let n = body.n_wires();
    let decoder = body.invert()?;
    let mut out = Circuit::new(n);
    let mut samples = Vec::new();
    for q in 0..n {
        let img = conjugate_through(&PauliString::single(n, q, Pauli::Z)?, &decoder)?;
        let s: Vec<bool> = pivot_wires.iter().map(|&p| img.x_bit(p)).collect();
        samples.push((s, img.z_bit(0)));
    }
    // flip(s) = 1 ⊕ c·s on nonzero syndromes; c_i read off the unit syndromes.
    let mut c = vec![false; pivot_wires.len()];
    for (i, ci) in c.iter_mut().enumerate() {
        let unit = samples
            .iter()
            .find(|(s, _)| s.iter().enumerate().all(|(j, &b)| b == (i == j)));
        match unit {
            Some((_, flip)) => *ci = !flip,
            None => return Ok(out),
        }
    }
    let affine = samples.iter().all(|(s, flip)| {
        s.iter().all(|b| !b) || *flip == !s.iter().zip(&c).fold(false, |a, (x, y)| a ^ (x & y))
    });
    let ones: Vec<usize> = (0..c.len()).filter(|&i| c[i]).collect();
    if !affine || ones.len() < 2 {
        return Ok(out);
    }
    let veto = *ones.last().expect("nonempty");
    for &i in &ones[..ones.len() - 1] {
        out.push(CliffordGate::Cx(pivot_wires[i], pivot_wires[veto]))?;
    }
    Ok(out)
}

/// Conditions (a)–(d) on a synthesized encoder, checked by Pauli conjugation.
pub fn check_encoder_conditions(
    code: &StabilizerCode,
    bundle: &EncoderBundle,
) -> Result<(), CodeError> {
    let n = code.n;
    let enc = &bundle.encoder;
    // Stabilizer group and logicals in wire coordinates.
    let mut stab = Basis::new();
    for g in code.generators() {
        stab.insert(symplectic(&bundle.to_wires(g)));
    }
    let z_img = conjugate_through(&PauliString::single(n, 0, Pauli::Z)?, enc)?;
    if !z_img.same_letters(&bundle.to_wires(&code.logical_z)) || !z_img.phase().is_real() {
        return Err(cond('a', format!("E Z0 E† = {z_img}")));
    }
    let x_img = conjugate_through(&PauliString::single(n, 0, Pauli::X)?, enc)?;
    if !x_img.same_letters(&bundle.to_wires(&code.logical_x)) || !x_img.phase().is_real() {
        return Err(cond('b', format!("E X0 E† = {x_img}")));
    }
    let mut images = Vec::new();
    for j in 1..n {
        let img = conjugate_through(&PauliString::single(n, j, Pauli::Z)?, enc)?;
        if !stab.contains(symplectic(&img)) {
            return Err(cond('c', format!("E Z{j} E† = {img} is not a stabilizer")));
        }
        images.push(symplectic(&img));
    }
    if gf2::rank(&images) != n - 1 {
        return Err(cond(
            'c',
            "syndrome images do not generate the stabilizer group",
        ));
    }
    let mut z_support = 0u64;
    let mut x_support = 0u64;
    for q in 0..n {
        for (pauli, acc) in [(Pauli::Z, &mut z_support), (Pauli::X, &mut x_support)] {
            let img = conjugate_through(&PauliString::single(n, q, pauli)?, &bundle.decoder)?;
            *acc |= img.x_words()[0] & !1;
        }
    }
    if z_support & x_support != 0 {
        return Err(cond(
            'd',
            format!("sectors overlap on wires {:#x}", z_support & x_support),
        ));
    }
    Ok(())
}

/// True when `decoder` undoes `encoder` on the message for every input and
/// leaves each wire in `zero_wires` at |0⟩, checked with the message prepared
/// in |0⟩ and in |+⟩ (which suffices for a Clifford map).
pub fn decodes_noiselessly(
    encoder: &Circuit,
    decoder: &Circuit,
    zero_wires: &[usize],
) -> Result<bool, CodeError> {
    for plus in [false, true] {
        let mut t = Tableau::new(encoder.n_wires());
        if plus {
            t.apply_clifford(&CliffordGate::H(0))?;
        }
        let t = tab_run(encoder, t)?.tableau;
        let t = tab_run(decoder, t)?.tableau;
        let msg = if plus { t.peek_x(0) } else { t.peek_z(0) };
        if msg != Some(false) || zero_wires.iter().any(|&w| t.peek_z(w) != Some(false)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Greedily deletes CX gates from the decoder (last to first). A deletion is
/// kept when the Z-sector flip table still flips the message for exactly the
/// same input errors, stays consistent, and noiseless decoding still returns
/// the message with the Z-sector syndrome wires at |0⟩.
pub fn simplify_decoder(bundle: &EncoderBundle) -> Result<Circuit, CodeError> {
    let base = derive_sector_table(&bundle.decoder, &[Sector::Z])?;
    let flips = base.flipping_errors(Sector::Z);
    let mut current = bundle.decoder.clone();
    for i in (0..current.len()).rev() {
        if !current.gates()[i].is_cx() {
            continue;
        }
        let trial = current.without_gate(i);
        let Ok(table) = derive_sector_table(&trial, &[Sector::Z]) else {
            continue;
        };
        if table.flipping_errors(Sector::Z) != flips {
            continue;
        }
        if decodes_noiselessly(&bundle.encoder, &trial, &table.support(Sector::Z))? {
            current = trial;
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_counts_and_weights() {
        let code = build_code();
        assert_eq!(
            code.x_generators.len() + code.z_generators.len(),
            code.n - code.k
        );
        let mut xw: Vec<usize> = code.x_generators.iter().map(PauliString::weight).collect();
        let mut zw: Vec<usize> = code.z_generators.iter().map(PauliString::weight).collect();
        xw.sort();
        zw.sort();
        assert_eq!(xw, vec![8; 4]);
        assert_eq!(zw, vec![4, 4, 4, 4, 4, 4, 8, 8, 8, 8]);
        assert_eq!(code.logical_x.weight(), 7);
        assert_eq!(code.logical_z.to_string(), "+Z0 Z1 Z2");
        code.check().unwrap();
    }

    #[test]
    fn all_generator_pairs_commute() {
        let code = build_code();
        let gens: Vec<_> = code.generators().collect();
        for a in &gens {
            for b in &gens {
                assert!(a.commutes(b).unwrap());
            }
            assert!(a.commutes(&code.logical_x).unwrap());
            assert!(a.commutes(&code.logical_z).unwrap());
        }
        assert!(!code.logical_x.commutes(&code.logical_z).unwrap());
    }

    #[test]
    fn distance_is_three() {
        let code = build_code();
        assert_eq!(verify_distance(&code, 1), None);
        assert_eq!(verify_distance(&code, 2), None);
        assert_eq!(verify_distance(&code, 3), Some(3));
        // the line itself is an undetectable weight-3 logical
        assert!(code.commutes_with_all(&code.logical_z));
        assert!(!code.in_stabilizer_group(&code.logical_z));
    }

    #[test]
    fn encoder_conditions_hold() {
        let code = build_code();
        let b = synthesize_encoder(&code).unwrap();
        check_encoder_conditions(&code, &b).unwrap();
        assert_eq!(b.decoder, b.encoder.invert().unwrap());
        assert!(b.encoder.is_clifford());
        assert_eq!(b.wire_map[2], 0, "label 0011 carries the message");
        assert!(decodes_noiselessly(&b.encoder, &b.decoder, &(1..15).collect::<Vec<_>>()).unwrap());
    }

    #[test]
    fn broken_encoder_is_reported() {
        let code = build_code();
        let mut b = synthesize_encoder(&code).unwrap();
        let last = b.encoder.len() - 1;
        b.encoder = b.encoder.without_gate(last);
        b.decoder = b.encoder.invert().unwrap();
        assert!(matches!(
            check_encoder_conditions(&code, &b),
            Err(CodeError::Condition { .. })
        ));
    }

    #[test]
    fn simplified_decoder_is_a_subcircuit() {
        let code = build_code();
        let b = synthesize_encoder(&code).unwrap();
        let d = &b.simplified_decoder;
        assert!(
            d.count_cx() < b.decoder.count_cx(),
            "at least one CX is removable"
        );
        // deletion-only: d is a subsequence of the decoder
        let mut it = b.decoder.gates().iter();
        for g in d.gates() {
            assert!(it.any(|h| h == g));
        }
        let table = derive_sector_table(d, &[Sector::Z]).unwrap();
        let full = derive_sector_table(&b.decoder, &[Sector::Z]).unwrap();
        assert_eq!(
            table.flipping_errors(Sector::Z),
            full.flipping_errors(Sector::Z)
        );
    }
}
