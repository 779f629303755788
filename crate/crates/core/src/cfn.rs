//! Flip tables and coherent feedback network synthesis.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Control, ControlledBase, Gate, WireRole};
use crate::pauli::{CliffordGate, Pauli, PauliError, PauliString};
use crate::sim::{magic_state, sv_run, zero_state, SimError, Statevector, FIDELITY_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CfnError {
    #[error("{sector}-sector syndrome {pattern} both flips and keeps the message")]
    Inconsistent { sector: Sector, pattern: String },
    #[error("{sector} error on wire {wire} flips the message with an empty syndrome")]
    ZeroSyndromeFlip { sector: Sector, wire: usize },
    #[error("sector supports overlap on wires {0:?}")]
    SectorOverlap(Vec<usize>),
    #[error("structure not expressible: {0}")]
    NotExpressible(String),
    #[error("decoder has more than 64 wires")]
    TooWide,
    #[error("flip table line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Which single-qubit input error an entry describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sector {
    X,
    Z,
}

impl Sector {
    pub const ALL: [Sector; 2] = [Sector::Z, Sector::X];

    pub fn pauli(self) -> Pauli {
        match self {
            Sector::X => Pauli::X,
            Sector::Z => Pauli::Z,
        }
    }

    pub fn correction(self) -> ControlledBase {
        match self {
            Sector::X => ControlledBase::X,
            Sector::Z => ControlledBase::Z,
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::X => "X",
            Sector::Z => "Z",
        })
    }
}

/// Outcome of one single-qubit input error after the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlipEntry {
    pub sector: Sector,
    pub wire: usize,
    pub message_flip: bool,
    /// Bit `w` set when syndrome wire `w` is flipped.
    pub syndrome: u64,
}

fn mask_wires(mask: u64) -> Vec<usize> {
    (0..64).filter(|&w| mask >> w & 1 == 1).collect()
}

fn pattern_text(mask: u64) -> String {
    if mask == 0 {
        return "-".into();
    }
    mask_wires(mask)
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipTable {
    pub n_wires: usize,
    pub message_wire: usize,
    pub entries: Vec<FlipEntry>,
}

impl FlipTable {
    pub fn entries(&self, sector: Sector) -> impl Iterator<Item = &FlipEntry> {
        self.entries.iter().filter(move |e| e.sector == sector)
    }

    pub fn entry(&self, sector: Sector, wire: usize) -> Option<&FlipEntry> {
        self.entries(sector).find(|e| e.wire == wire)
    }

    pub fn support_mask(&self, sector: Sector) -> u64 {
        self.entries(sector).fold(0, |m, e| m | e.syndrome)
    }

    /// Syndrome wires flipped by some error of this sector.
    pub fn support(&self, sector: Sector) -> Vec<usize> {
        mask_wires(self.support_mask(sector))
    }

    /// Input wires whose error of this sector flips the message.
    pub fn flipping_errors(&self, sector: Sector) -> Vec<usize> {
        self.entries(sector)
            .filter(|e| e.message_flip)
            .map(|e| e.wire)
            .collect()
    }

    /// Distinct syndromes with the given message outcome, ascending. The empty
    /// syndrome always counts as a no-flip pattern.
    pub fn patterns(&self, sector: Sector, flip: bool) -> Vec<u64> {
        let mut set: BTreeSet<u64> = self
            .entries(sector)
            .filter(|e| e.message_flip == flip)
            .map(|e| e.syndrome)
            .collect();
        if !flip {
            set.insert(0);
        }
        set.into_iter().collect()
    }

    /// Consistency, nonzero flip syndromes and sector disjointness.
    pub fn check(&self) -> Result<(), CfnError> {
        for sector in Sector::ALL {
            for e in self.entries(sector).filter(|e| e.message_flip) {
                if e.syndrome == 0 {
                    return Err(CfnError::ZeroSyndromeFlip {
                        sector,
                        wire: e.wire,
                    });
                }
            }
            let keep = self.patterns(sector, false);
            if let Some(p) = self
                .patterns(sector, true)
                .into_iter()
                .find(|p| keep.contains(p))
            {
                return Err(CfnError::Inconsistent {
                    sector,
                    pattern: pattern_text(p),
                });
            }
        }
        let overlap = self.support_mask(Sector::X) & self.support_mask(Sector::Z);
        if overlap != 0 {
            return Err(CfnError::SectorOverlap(mask_wires(overlap)));
        }
        Ok(())
    }

    /// Copy restricted to one sector's entries.
    pub fn only(&self, sector: Sector) -> FlipTable {
        FlipTable {
            entries: self.entries(sector).copied().collect(),
            ..self.clone()
        }
    }

    /// Two-sector layout with "no flip" and "flip 0" columns of distinct syndromes.
    pub fn render_columns(&self) -> String {
        let cols: Vec<Vec<String>> = [Sector::Z, Sector::X]
            .iter()
            .flat_map(|&s| [false, true].map(|f| (s, f)))
            .map(|(s, f)| {
                let mut pats = self.patterns(s, f);
                if pats.is_empty() {
                    return Vec::new();
                }
                pats.sort_by_key(|p| (p.count_ones(), *p));
                pats.into_iter().map(pattern_text).collect()
            })
            .collect();
        let rows = cols.iter().map(Vec::len).max().unwrap_or(0);
        let width = cols
            .iter()
            .flatten()
            .map(String::len)
            .chain([9])
            .max()
            .unwrap_or(9);
        let cell =
            |c: &Vec<String>, r: usize| format!("{:<width$}", c.get(r).map_or("", String::as_str));
        let mut out = format!(
            "{:<w2$} || {}\n",
            "Z-sector",
            "X-sector",
            w2 = 2 * width + 3
        );
        let heads = ["no flip", "flip 0", "no flip", "flip 0"].map(|h| format!("{h:<width$}"));
        out.push_str(&format!(
            "{} | {} || {} | {}\n",
            heads[0], heads[1], heads[2], heads[3]
        ));
        for r in 0..rows {
            out.push_str(
                format!(
                    "{} | {} || {} | {}",
                    cell(&cols[0], r),
                    cell(&cols[1], r),
                    cell(&cols[2], r),
                    cell(&cols[3], r)
                )
                .trim_end(),
            );
            out.push('\n');
        }
        out
    }

    /// Text form: header, one line per entry, and the column layout as comments.
    pub fn serialize(&self) -> String {
        let mut out = format!("wires {}; message {}\n", self.n_wires, self.message_wire);
        for e in &self.entries {
            let outcome = if e.message_flip { "flip" } else { "keep" };
            out.push_str(&format!(
                "{} {} {} {}\n",
                e.sector,
                e.wire,
                outcome,
                pattern_text(e.syndrome).replace(", ", " ")
            ));
        }
        for line in self.render_columns().lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<FlipTable, CfnError> {
        let err = |line: usize, reason: &str| CfnError::Parse {
            line,
            reason: reason.into(),
        };
        let mut header = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if header.is_none() {
                let mut n = None;
                let mut m = None;
                for part in line.split(';') {
                    let mut it = part.split_whitespace();
                    match (it.next(), it.next()) {
                        (Some("wires"), Some(v)) => n = v.parse::<usize>().ok(),
                        (Some("message"), Some(v)) => m = v.parse::<usize>().ok(),
                        _ => return Err(err(line_no, "expected `wires N; message M`")),
                    }
                }
                match (n, m) {
                    (Some(n), Some(m)) if n <= 64 && m < n => header = Some((n, m)),
                    _ => return Err(err(line_no, "expected `wires N; message M`")),
                }
                continue;
            }
            let (n_wires, _) = header.expect("set above");
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < 4 {
                return Err(err(line_no, "expected `SECTOR WIRE flip|keep SYNDROME`"));
            }
            let sector = match toks[0] {
                "X" => Sector::X,
                "Z" => Sector::Z,
                t => return Err(err(line_no, &format!("unknown sector `{t}`"))),
            };
            let wire: usize = toks[1]
                .parse()
                .ok()
                .filter(|&w| w < n_wires)
                .ok_or_else(|| err(line_no, &format!("bad wire `{}`", toks[1])))?;
            let message_flip = match toks[2] {
                "flip" => true,
                "keep" => false,
                t => return Err(err(line_no, &format!("expected flip or keep, got `{t}`"))),
            };
            let mut syndrome = 0u64;
            if toks[3..] != ["-"] {
                for t in &toks[3..] {
                    let w: usize = t
                        .parse()
                        .ok()
                        .filter(|&w| w < n_wires)
                        .ok_or_else(|| err(line_no, &format!("bad syndrome wire `{t}`")))?;
                    syndrome |= 1 << w;
                }
            }
            entries.push(FlipEntry {
                sector,
                wire,
                message_flip,
                syndrome,
            });
        }
        let (n_wires, message_wire) = header.ok_or_else(|| err(1, "missing header"))?;
        Ok(FlipTable {
            n_wires,
            message_wire,
            entries,
        })
    }
}

impl FromStr for FlipTable {
    type Err = CfnError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FlipTable::parse(s)
    }
}

/// Propagates every single-qubit error of the listed sectors through a Clifford
/// decoder and records the message flip and the syndrome wires it flips.
pub fn derive_sector_table(decoder: &Circuit, sectors: &[Sector]) -> Result<FlipTable, CfnError> {
    let n = decoder.n_wires();
    if n > 64 {
        return Err(CfnError::TooWide);
    }
    let message_wire = decoder.message_wire().unwrap_or(0);
    let mut entries = Vec::new();
    for &sector in sectors {
        for wire in 0..n {
            let mut p = PauliString::single(n, wire, sector.pauli())?;
            for (i, g) in decoder.gates().iter().enumerate() {
                let g = g
                    .as_clifford()
                    .ok_or(SimError::NonClifford { gate_index: i })?;
                p.conjugate_in_place(g)?;
            }
            let message_flip = match sector {
                Sector::Z => p.z_bit(message_wire),
                Sector::X => p.x_bit(message_wire),
            };
            entries.push(FlipEntry {
                sector,
                wire,
                message_flip,
                syndrome: p.x_words()[0] & !(1 << message_wire),
            });
        }
    }
    let table = FlipTable {
        n_wires: n,
        message_wire,
        entries,
    };
    table.check()?;
    Ok(table)
}

/// Table for all 30 single-qubit X and Z errors.
pub fn derive_flip_table(decoder: &Circuit) -> Result<FlipTable, CfnError> {
    derive_sector_table(decoder, &Sector::ALL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CfnBackend {
    #[default]
    ExactPattern,
    Anf,
    ControlledReset,
}

impl CfnBackend {
    pub const ALL: [CfnBackend; 3] = [
        CfnBackend::ExactPattern,
        CfnBackend::Anf,
        CfnBackend::ControlledReset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CfnBackend::ExactPattern => "exact_pattern",
            CfnBackend::Anf => "anf",
            CfnBackend::ControlledReset => "controlled_reset",
        }
    }
}

impl fmt::Display for CfnBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CfnBackend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CfnBackend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                format!("unknown backend `{s}` (expected exact_pattern, anf or controlled_reset)")
            })
    }
}

/// Flip function of the form (OR over `generators`) AND NOT (OR over `veto`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VetoOr {
    pub generators: Vec<usize>,
    pub veto: Vec<usize>,
}

impl VetoOr {
    pub fn eval(&self, syndrome: u64) -> bool {
        let any = |ws: &[usize]| ws.iter().any(|&w| syndrome >> w & 1 == 1);
        any(&self.generators) && !any(&self.veto)
    }
}

/// Recognizes a veto-OR flip function for one sector of the table. Generators
/// are the wires appearing in flip patterns; the rest of the support is the veto set.
pub fn recognize_veto_or(table: &FlipTable, sector: Sector) -> Option<VetoOr> {
    let flips = table.patterns(sector, true);
    if flips.is_empty() {
        return None;
    }
    let g_mask = flips.iter().fold(0, |m, p| m | p);
    let form = VetoOr {
        generators: mask_wires(g_mask),
        veto: mask_wires(table.support_mask(sector) & !g_mask),
    };
    let ok = flips.iter().all(|&p| form.eval(p))
        && table.patterns(sector, false).iter().all(|&p| !form.eval(p));
    ok.then_some(form)
}

fn full_polarity(support: &[usize], pattern: u64) -> Vec<Control> {
    support
        .iter()
        .map(|&w| {
            if pattern >> w & 1 == 1 {
                Control::positive(w)
            } else {
                Control::negative(w)
            }
        })
        .collect()
}

fn exact_pattern_gates(
    table: &FlipTable,
    sector: Sector,
    out: &mut Circuit,
) -> Result<(), CfnError> {
    let support = table.support(sector);
    for p in table.patterns(sector, true) {
        out.push(Gate::MultiControlled {
            base: sector.correction(),
            controls: full_polarity(&support, p),
            target: table.message_wire,
        })?;
    }
    Ok(())
}

/// Algebraic normal form of the tabled flip function over the sector support.
/// Returns the monomials as wire lists.
pub fn anf_monomials(table: &FlipTable, sector: Sector) -> Vec<Vec<usize>> {
    let support = table.support(sector);
    let k = support.len();
    let compress = |p: u64| {
        support
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &w)| acc | ((p >> w & 1) as usize) << i)
    };
    let mut f = vec![false; 1 << k];
    for p in table.patterns(sector, true) {
        f[compress(p)] = true;
    }
    for i in 0..k {
        for s in 0..1usize << k {
            if s >> i & 1 == 1 {
                f[s] ^= f[s ^ 1 << i];
            }
        }
    }
    let mut monos: Vec<usize> = (0..1usize << k).filter(|&s| f[s]).collect();
    monos.sort_by_key(|&s| (s.count_ones(), s));
    monos
        .into_iter()
        .map(|s| {
            (0..k)
                .filter(|&i| s >> i & 1 == 1)
                .map(|i| support[i])
                .collect()
        })
        .collect()
}

fn anf_gates(table: &FlipTable, sector: Sector, out: &mut Circuit) -> Result<(), CfnError> {
    for mono in anf_monomials(table, sector) {
        out.push(Gate::MultiControlled {
            base: sector.correction(),
            controls: mono.into_iter().map(Control::positive).collect(),
            target: table.message_wire,
        })?;
    }
    Ok(())
}

fn reset_chain(table: &FlipTable, form: &VetoOr, out: &mut Circuit) -> Result<(), CfnError> {
    let msg = table.message_wire;
    let g = &form.generators;
    for &v in &form.veto {
        out.push(Gate::ControlledReset {
            control: Control::positive(v),
            targets: g.clone(),
        })?;
    }
    for (i, &gi) in g.iter().enumerate() {
        out.push(CliffordGate::Cz(gi, msg))?;
        if i + 1 < g.len() {
            out.push(Gate::ControlledReset {
                control: Control::positive(gi),
                targets: g[i + 1..].to_vec(),
            })?;
        }
    }
    Ok(())
}

/// Correction block that follows the decoder. Z-sector gates come first.
pub fn synthesize_cfn(table: &FlipTable, backend: CfnBackend) -> Result<Circuit, CfnError> {
    table.check()?;
    let mut out = Circuit::new(table.n_wires);
    out.set_role(table.message_wire, WireRole::Message);
    for sector in Sector::ALL {
        if table.patterns(sector, true).is_empty() {
            continue;
        }
        match (backend, sector) {
            (CfnBackend::ExactPattern, _) | (CfnBackend::ControlledReset, Sector::X) => {
                exact_pattern_gates(table, sector, &mut out)?
            }
            (CfnBackend::Anf, _) => anf_gates(table, sector, &mut out)?,
            (CfnBackend::ControlledReset, Sector::Z) => {
                let form = recognize_veto_or(table, sector).ok_or_else(|| {
                    CfnError::NotExpressible(
                        "Z-sector flip function is not of the form (OR of generators) AND NOT (OR of vetoes)".into(),
                    )
                })?;
                reset_chain(table, &form, &mut out)?
            }
        }
    }
    Ok(out)
}

/// Drops every gate that corrects the message with an X (the X-sector block).
pub fn without_x_sector(cfn: &Circuit) -> Circuit {
    let mut out = Circuit::new(cfn.n_wires());
    out.copy_roles_from(cfn);
    for g in cfn.gates() {
        if !matches!(
            g,
            Gate::MultiControlled {
                base: ControlledBase::X,
                ..
            }
        ) {
            out.push(g.clone()).expect("same register");
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorFidelity {
    /// `None` for the error-free run.
    pub error: Option<(Pauli, usize)>,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfnReport {
    pub results: Vec<ErrorFidelity>,
}

impl CfnReport {
    pub fn failures(&self, tolerance: f64) -> Vec<&ErrorFidelity> {
        self.results
            .iter()
            .filter(|r| r.fidelity < 1.0 - tolerance)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures(FIDELITY_TOLERANCE).is_empty()
    }

    pub fn min_fidelity(&self) -> f64 {
        self.results.iter().map(|r| r.fidelity).fold(1.0, f64::min)
    }
}

/// Encodes |A⟩ with `encoder`, inserts each of the 45 single-qubit Paulis (and
/// no error), then runs decoder and CFN and records the fidelity of the message
/// wire with |A⟩.
pub fn verify_cfn(
    encoder: &Circuit,
    decoder: &Circuit,
    cfn: &Circuit,
) -> Result<CfnReport, CfnError> {
    let n = encoder.n_wires();
    let msg = decoder.message_wire().unwrap_or(0);
    let mut inputs = vec![zero_state(); n];
    inputs[msg] = magic_state();
    let encoded = sv_run(encoder, Statevector::product(&inputs)?, false)?;
    let mut tail = decoder.clone();
    tail.extend(cfn)?;
    let mut errors = vec![None];
    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
        errors.extend((0..n).map(|q| Some((p, q))));
    }
    let mut results = Vec::with_capacity(errors.len());
    for error in errors {
        let mut state = encoded.clone();
        if let Some((p, q)) = error {
            state.apply_clifford(&match p {
                Pauli::X => CliffordGate::X(q),
                Pauli::Y => CliffordGate::Y(q),
                _ => CliffordGate::Z(q),
            });
        }
        let out = sv_run(&tail, state, false)?;
        results.push(ErrorFidelity {
            error,
            fidelity: out.wire_fidelity(msg, &magic_state()),
        });
    }
    Ok(CfnReport { results })
}
