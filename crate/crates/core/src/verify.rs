//! The verification suite behind `mfmsd verify`.

use std::fmt::Write as _;

use crate::cfn::{derive_flip_table, verify_cfn, CfnBackend, FlipTable};
use crate::circuit::Circuit;
use crate::code::{
    build_code, check_encoder_conditions, decodes_noiselessly, synthesize_encoder, verify_distance,
};
use crate::protocol::{DecoderKind, Distiller};
use crate::sim::FIDELITY_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvSweep {
    /// Statevector cross-check on every pattern of weight ≤ 2.
    #[default]
    LowWeight,
    /// All 2^15 patterns (minutes).
    All,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub backend: CfnBackend,
    pub decoder_kind: DecoderKind,
    pub sv_sweep: SvSweep,
    /// Replaces the selected decoder (mutation testing).
    pub decoder_override: Option<Circuit>,
    /// Replaces the synthesized feedback block.
    pub cfn_override: Option<Circuit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, result: Result<String, String>) -> bool {
        let passed = result.is_ok();
        let detail = result.unwrap_or_else(|e| e);
        self.checks.push(CheckResult {
            name,
            passed,
            detail,
        });
        passed
    }

    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut s = String::new();
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            let _ = writeln!(s, "{mark} {:<width$}  {}", c.name, c.detail);
        }
        s
    }
}

fn sv_patterns(sweep: SvSweep, n: usize) -> Vec<u64> {
    match sweep {
        SvSweep::All => (0..1u64 << n).collect(),
        SvSweep::LowWeight => (0..1u64 << n).filter(|f| f.count_ones() <= 2).collect(),
    }
}

/// Runs every check; later checks are skipped (and reported) when a
/// prerequisite fails.
pub fn run_verification(opts: &VerifyOptions) -> VerifyReport {
    let mut report = VerifyReport::default();
    let code = build_code();
    report.push(
        "code structure",
        code.check().map(|_| {
            format!(
                "[[{},{},{}]], {} generators",
                code.n,
                code.k,
                code.d,
                code.n - code.k
            )
        }),
    );
    report.push(
        "distance",
        match verify_distance(&code, 3) {
            Some(3) => Ok("no undetectable logical below weight 3; one at weight 3".into()),
            other => Err(format!(
                "minimal undetectable logical weight {other:?}, expected 3"
            )),
        },
    );
    let mut bundle = match synthesize_encoder(&code) {
        Ok(b) => b,
        Err(e) => {
            report.push("encoder conditions", Err(e.to_string()));
            return report;
        }
    };
    report.push(
        "encoder conditions",
        check_encoder_conditions(&code, &bundle)
            .map(|_| "(a)-(d) hold".into())
            .map_err(|e| e.to_string()),
    );
    if let Some(dec) = &opts.decoder_override {
        match opts.decoder_kind {
            DecoderKind::Full => bundle.decoder = dec.clone(),
            DecoderKind::Simplified => bundle.simplified_decoder = dec.clone(),
        }
    }
    let decoder = match opts.decoder_kind {
        DecoderKind::Full => bundle.decoder.clone(),
        DecoderKind::Simplified => bundle.simplified_decoder.clone(),
    };
    let all_syndromes: Vec<usize> = (1..code.n).collect();
    let zero_wires: &[usize] = match opts.decoder_kind {
        DecoderKind::Full => &all_syndromes,
        DecoderKind::Simplified => &[],
    };
    report.push(
        "noiseless decoding",
        match decodes_noiselessly(&bundle.encoder, &decoder, zero_wires) {
            Ok(true) => Ok(format!("{} decoder returns the message", opts.decoder_kind)),
            Ok(false) => Err(format!(
                "{} decoder does not undo the encoder",
                opts.decoder_kind
            )),
            Err(e) => Err(e.to_string()),
        },
    );
    let table: Result<FlipTable, String> = match opts.decoder_kind {
        DecoderKind::Full => derive_flip_table(&decoder).map_err(|e| e.to_string()),
        DecoderKind::Simplified => {
            crate::cfn::derive_sector_table(&decoder, &[crate::cfn::Sector::Z])
                .map_err(|e| e.to_string())
        }
    };
    if !report.push(
        "flip table",
        table
            .as_ref()
            .map(|t| format!("{} entries, consistent, sectors disjoint", t.entries.len()))
            .map_err(Clone::clone),
    ) {
        return report;
    }
    let table = table.expect("checked above");
    let distiller = match &opts.cfn_override {
        Some(cfn) => Distiller::with_cfn(
            code.clone(),
            bundle.clone(),
            opts.decoder_kind,
            opts.backend,
            table,
            cfn.clone(),
        ),
        None => Distiller::from_parts(
            code.clone(),
            bundle.clone(),
            opts.decoder_kind,
            opts.backend,
        ),
    };
    let d = match distiller {
        Ok(d) => d,
        Err(e) => {
            report.push("feedback synthesis", Err(e.to_string()));
            return report;
        }
    };
    report.push(
        "feedback synthesis",
        Ok(format!("{} gates ({})", d.cfn.len(), opts.backend)),
    );

    let cfn_check = match verify_cfn(&bundle.encoder, &decoder, &d.cfn) {
        Ok(r) => {
            let bad: Vec<String> = r
                .failures(FIDELITY_TOLERANCE)
                .iter()
                .map(|f| match f.error {
                    Some((p, q)) => format!("{}{q}", p.letter()),
                    None => "none".into(),
                })
                .collect();
            if bad.is_empty() {
                Ok(format!(
                    "{} runs, min fidelity {:.12}",
                    r.results.len(),
                    r.min_fidelity()
                ))
            } else {
                Err(format!("uncorrected: {}", bad.join(" ")))
            }
        }
        Err(e) => Err(e.to_string()),
    };
    let label = if opts.decoder_kind == DecoderKind::Full {
        "single-error correction (45 Paulis)"
    } else {
        "single-error correction (Z sector)"
    };
    match opts.decoder_kind {
        DecoderKind::Full => {
            report.push(label, cfn_check);
        }
        DecoderKind::Simplified => {
            let r = (0..code.n)
                .map(|q| d.sv_failure(1 << q).map_err(|e| e.to_string()))
                .collect::<Result<Vec<bool>, _>>()
                .and_then(|v| match v.iter().position(|&b| b) {
                    None => Ok("all 15 Z errors corrected".into()),
                    Some(q) => Err(format!("Z{q} not corrected")),
                });
            report.push(label, r);
        }
    }

    let n = d.n_inputs();
    let mut mismatch = None;
    for f in 0..1u64 << n {
        match (d.frame_failure(f), d.tab_failure(f)) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => {
                mismatch = Some(format!("pattern {f:#06x}: frame {a:?} tableau {b:?}"));
                break;
            }
        }
    }
    report.push(
        "frame = tableau (all patterns)",
        mismatch.map_or_else(|| Ok(format!("{} patterns agree", 1u64 << n)), Err),
    );
    let patterns = sv_patterns(opts.sv_sweep, n);
    let mut mismatch = None;
    for &f in &patterns {
        match (d.frame_failure(f), d.sv_failure(f)) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => {
                mismatch = Some(format!("pattern {f:#06x}: frame {a:?} statevector {b:?}"));
                break;
            }
        }
    }
    report.push(
        "frame = statevector",
        mismatch.map_or_else(|| Ok(format!("{} patterns agree", patterns.len())), Err),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes() {
        let r = run_verification(&VerifyOptions::default());
        assert!(r.passed(), "{}", r.render());
    }

    #[test]
    fn empty_feedback_fails() {
        let opts = VerifyOptions {
            cfn_override: Some(Circuit::new(15)),
            ..Default::default()
        };
        let r = run_verification(&opts);
        assert!(!r.passed());
        let c = r
            .checks
            .iter()
            .find(|c| c.name.starts_with("single-error"))
            .unwrap();
        assert!(!c.passed);
        let listed: Vec<&str> = c.detail.split_whitespace().skip(1).collect();
        let count = |l: char| listed.iter().filter(|e| e.starts_with(l)).count();
        assert_eq!((count('Z'), count('X')), (7, 3));
        // Y fails exactly where Z or X does
        assert!(count('Y') >= 7 && count('Y') <= 10);
    }
}
