//! Cross-checks against references that do not go through the synthesized circuits.

use mfmsd_core::cfn::{synthesize_cfn, without_x_sector, CfnBackend, Sector};
use mfmsd_core::code::build_code;
use mfmsd_core::experiments::{
    census_threshold, exact_census, monte_carlo, sample_flips, trial_rng, AnalyticModel,
    ErrorCensus, MonteCarloConfig, SimMode,
};
use mfmsd_core::pauli::{CliffordGate, Pauli, PauliString};
use mfmsd_core::protocol::{DecoderKind, Distiller};
use mfmsd_core::sim::{plus_state, sv_run, tab_run, zero_state, Qubit, Statevector, Tableau};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn distiller(kind: DecoderKind, backend: CfnBackend) -> Distiller {
    Distiller::new(kind, backend).unwrap()
}

/// Labels 1..=15 of the code qubits flipped by a wire pattern.
fn labels(d: &Distiller, flips: u64) -> Vec<u32> {
    (0..15)
        .filter(|&q| flips >> d.bundle.wire_map[q] & 1 == 1)
        .map(|q| q as u32 + 1)
        .collect()
}

/// Lookup decoding straight from the binary labels: a nonzero syndrome names the
/// qubit to correct, and a residual Z-type stabilizer is logical iff its weight is odd.
fn label_oracle(labels: &[u32]) -> bool {
    let s = labels.iter().fold(0, |a, &l| a ^ l);
    let odd = labels.len() % 2 == 1;
    if s == 0 {
        odd
    } else {
        !odd
    }
}

fn oracle_census() -> Vec<u64> {
    let mut n = vec![0u64; 16];
    for f in 0..1u32 << 15 {
        let ls: Vec<u32> = (0..15).filter(|q| f >> q & 1 == 1).map(|q| q + 1).collect();
        if label_oracle(&ls) {
            n[ls.len()] += 1;
        }
    }
    n
}

#[test]
fn generator_weights_follow_from_labels() {
    let code = build_code();
    let bit_sets: Vec<usize> = (0..4)
        .map(|b| (1..16u32).filter(|v| v >> b & 1 == 1).count())
        .collect();
    assert_eq!(bit_sets, vec![8; 4]);
    let mut xw: Vec<usize> = code.x_generators.iter().map(PauliString::weight).collect();
    let mut zw: Vec<usize> = code.z_generators.iter().map(PauliString::weight).collect();
    xw.sort_unstable();
    zw.sort_unstable();
    assert_eq!(xw, vec![8; 4]);
    assert_eq!(zw, [vec![4; 6], vec![8; 4]].concat());
    assert_eq!(code.logical_z.support(), vec![0, 1, 2]);
    assert_eq!(code.logical_x.weight(), 7);
}

#[test]
fn frame_census_matches_label_decoding() {
    let oracle = oracle_census();
    for kind in [DecoderKind::Full, DecoderKind::Simplified] {
        let d = distiller(kind, CfnBackend::ExactPattern);
        for f in 0..1u64 << 15 {
            assert_eq!(
                d.frame_failure(f).unwrap(),
                label_oracle(&labels(&d, f)),
                "{kind} pattern {f:#x}"
            );
        }
        assert_eq!(exact_census(&d).unwrap().failures, oracle);
    }
    assert_eq!(
        oracle,
        vec![0, 0, 105, 35, 1260, 168, 4725, 435, 6000, 280, 2835, 105, 420, 0, 15, 1]
    );
}

#[test]
fn every_backend_gives_the_oracle_census() {
    let oracle = oracle_census();
    for backend in CfnBackend::ALL {
        let d = distiller(DecoderKind::Full, backend);
        assert_eq!(exact_census(&d).unwrap().failures, oracle, "{backend}");
    }
}

fn oracle_curve(p: f64) -> f64 {
    oracle_census()
        .iter()
        .enumerate()
        .map(|(w, &c)| c as f64 * p.powi(w as i32) * (1.0 - p).powi(15 - w as i32))
        .sum()
}

#[test]
fn threshold_and_composition_match_oracle_polynomial() {
    let d = distiller(DecoderKind::Full, CfnBackend::ExactPattern);
    let census = exact_census(&d).unwrap();
    let curve = census.curve();
    for p in [1e-4, 1e-3, 1e-2, 0.1, 0.4] {
        assert!((curve.eval(p).unwrap() - oracle_curve(p)).abs() < 1e-15);
    }
    // independent bisection on the oracle polynomial
    let (mut a, mut b) = (0.005, 0.02);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if oracle_curve(m) < m {
            a = m;
        } else {
            b = m;
        }
    }
    let t = census_threshold(&census).unwrap();
    assert!(t.lo <= a && a <= t.hi + 1e-12, "{t:?} vs {a}");
    assert!((t.p - 0.010930249).abs() < 1e-6);

    let mut x = 1e-3;
    for r in 1..=4 {
        x = oracle_curve(x);
        assert!((curve.compose(1e-3, r).unwrap() / x - 1.0).abs() < 1e-12);
    }
    assert!(curve.eval(t.p / 2.0).unwrap() < t.p / 2.0);
    for p in [0.02, 0.05, 0.2] {
        assert!(curve.compose(p, 2).unwrap() > curve.eval(p).unwrap());
        assert!(curve.eval(p).unwrap() > p);
    }
    let ratio = curve.eval(1e-4).unwrap() / (105.0 * 1e-8);
    assert!((ratio - 0.9987).abs() < 1e-3);
    let model = AnalyticModel::default();
    assert!((model.rate(1e-3, 1) - 105.0 * 1e-6).abs() < 1e-18);
}

fn expectation(state: &Statevector, p: &PauliString) -> f64 {
    let mut s = state.clone();
    for q in p.support() {
        let g = match p.get(q) {
            Pauli::X => CliffordGate::X(q),
            Pauli::Y => CliffordGate::Y(q),
            Pauli::Z => CliffordGate::Z(q),
            Pauli::I => continue,
        };
        s.apply_clifford(&g);
    }
    state.inner(&s).re
}

#[test]
fn encoded_plus_is_stabilized_by_the_code() {
    let d = distiller(DecoderKind::Full, CfnBackend::ExactPattern);
    let mut input = vec![zero_state(); 15];
    input[0] = plus_state();
    let out = sv_run(
        &d.bundle.encoder,
        Statevector::product(&input).unwrap(),
        false,
    )
    .unwrap();
    for g in d.code.generators() {
        assert!((expectation(&out, &d.bundle.to_wires(g)) - 1.0).abs() < 1e-10);
    }
    assert!((expectation(&out, &d.bundle.to_wires(&d.code.logical_x)) - 1.0).abs() < 1e-10);
    assert!(expectation(&out, &d.bundle.to_wires(&d.code.logical_z)).abs() < 1e-10);
}

fn random_qubit(rng: &mut impl Rng) -> Qubit {
    let v: [f64; 4] = rng.gen();
    let a = Complex64::new(v[0] - 0.5, v[1] - 0.5);
    let b = Complex64::new(v[2] - 0.5, v[3] - 0.5);
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    [a / n, b / n]
}

fn random_state(n: usize, rng: &mut impl Rng) -> Statevector {
    let mut amps: Vec<Complex64> = (0..1 << n)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    Statevector::from_amplitudes(amps).unwrap()
}

#[test]
fn decoder_inverts_encoder() {
    let d = distiller(DecoderKind::Full, CfnBackend::ExactPattern);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let psi = random_state(15, &mut rng);
        let mut round = d.bundle.encoder.clone();
        round.extend(&d.bundle.decoder).unwrap();
        let out = sv_run(&round, psi.clone(), false).unwrap();
        assert!((psi.inner(&out).norm() - 1.0).abs() < 1e-10);
    }
    for kind in [DecoderKind::Full, DecoderKind::Simplified] {
        let d = distiller(kind, CfnBackend::ExactPattern);
        let msg = random_qubit(&mut rng);
        let mut input = vec![zero_state(); 15];
        input[0] = msg;
        let mut round = d.bundle.encoder.clone();
        round.extend(d.decoder()).unwrap();
        let out = sv_run(&round, Statevector::product(&input).unwrap(), false).unwrap();
        assert!((out.wire_fidelity(0, &msg) - 1.0).abs() < 1e-10);
        for q in 1..15 {
            assert_eq!(out.basis_value(q), Some(false), "{kind} wire {q}");
        }
    }
}

#[test]
fn flip_table_matches_tableau_readout() {
    let d = distiller(DecoderKind::Full, CfnBackend::ExactPattern);
    for entry in &d.table.entries {
        let mut t = Tableau::new(15);
        if entry.sector == Sector::Z {
            t.apply_clifford(&CliffordGate::H(0)).unwrap();
        }
        let mut t = tab_run(&d.bundle.encoder, t).unwrap().tableau;
        t.apply_pauli(&PauliString::single(15, entry.wire, entry.sector.pauli()).unwrap())
            .unwrap();
        let t = tab_run(&d.bundle.decoder, t).unwrap().tableau;
        let flip = match entry.sector {
            Sector::Z => t.peek_x(0),
            Sector::X => t.peek_z(0),
        };
        assert_eq!(flip, Some(entry.message_flip), "{entry:?}");
        let syndrome = (1..15).fold(0u64, |acc, w| acc | (t.peek_z(w).unwrap() as u64) << w);
        assert_eq!(syndrome, entry.syndrome, "{entry:?}");
    }
}

#[test]
fn exact_pattern_and_anf_agree_on_tabled_syndromes() {
    let d = distiller(DecoderKind::Full, CfnBackend::ExactPattern);
    let exact = synthesize_cfn(&d.table, CfnBackend::ExactPattern).unwrap();
    let anf = synthesize_cfn(&d.table, CfnBackend::Anf).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for sector in Sector::ALL {
        for flip in [false, true] {
            for pattern in d.table.patterns(sector, flip) {
                let msg = random_qubit(&mut rng);
                let mut input: Vec<Qubit> = (0..15)
                    .map(|w| {
                        if pattern >> w & 1 == 1 {
                            [zero_state()[1], zero_state()[0]]
                        } else {
                            zero_state()
                        }
                    })
                    .collect();
                input[0] = msg;
                let psi = Statevector::product(&input).unwrap();
                let a = sv_run(&exact, psi.clone(), false).unwrap();
                let b = sv_run(&anf, psi, false).unwrap();
                assert!(
                    (a.inner(&b).norm() - 1.0).abs() < 1e-10,
                    "{sector:?} {pattern:#x}"
                );
            }
        }
    }
}

#[test]
fn polarity_compilation_preserves_feedback_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for backend in [CfnBackend::ExactPattern, CfnBackend::Anf] {
        let d = distiller(DecoderKind::Full, backend);
        let psi = random_state(15, &mut rng);
        let a = sv_run(&d.cfn, psi.clone(), true).unwrap();
        let b = sv_run(&d.cfn.compile_polarity(), psi, true).unwrap();
        assert!(
            (a.inner(&b) - Complex64::new(1.0, 0.0)).norm() < 1e-10,
            "{backend}"
        );
    }
}

#[test]
fn sampled_flip_frequency() {
    let mut rng = trial_rng(5, 0, 0);
    let draws = 1_000_000usize;
    let hits: usize = (0..1000)
        .map(|_| {
            sample_flips(0.3, 1000, &mut rng)
                .into_iter()
                .filter(|&b| b)
                .count()
        })
        .sum();
    let sigma = (0.3 * 0.7 / draws as f64).sqrt();
    assert!((hits as f64 / draws as f64 - 0.3).abs() < 4.0 * sigma);
}

fn cfg(
    p: f64,
    trials: u64,
    rounds: u32,
    mode: SimMode,
    workers: Option<usize>,
) -> MonteCarloConfig {
    MonteCarloConfig {
        p,
        trials,
        rounds,
        mode,
        seed: 99,
        workers,
    }
}

#[test]
fn monte_carlo_is_deterministic() {
    let d = distiller(DecoderKind::Full, CfnBackend::ExactPattern);
    let zero = monte_carlo(&d, &cfg(0.0, 2000, 1, SimMode::Frame, None)).unwrap();
    assert_eq!(zero.failures, 0);
    assert_eq!(zero.ci_low, 0.0);
    let a = monte_carlo(&d, &cfg(0.05, 5000, 1, SimMode::Frame, Some(1))).unwrap();
    let b = monte_carlo(&d, &cfg(0.05, 5000, 1, SimMode::Frame, Some(3))).unwrap();
    let c = monte_carlo(&d, &cfg(0.05, 5000, 1, SimMode::Tableau, None)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.failures, c.failures);
    let sv = monte_carlo(&d, &cfg(0.05, 200, 1, SimMode::Statevector, None)).unwrap();
    let fr = monte_carlo(&d, &cfg(0.05, 200, 1, SimMode::Frame, None)).unwrap();
    assert_eq!(sv.failures, fr.failures);
    let composed = monte_carlo(&d, &cfg(0.03, 500, 2, SimMode::Frame, None)).unwrap();
    let blockwise = monte_carlo(&d, &cfg(0.03, 500, 2, SimMode::Tableau, None)).unwrap();
    assert_eq!(composed.failures, blockwise.failures);
    assert!(monte_carlo(&d, &cfg(0.03, 10, 2, SimMode::Statevector, None)).is_err());
}

#[test]
fn half_rotation_is_a_flip() {
    let d = distiller(DecoderKind::Full, CfnBackend::ExactPattern);
    let pi = std::f64::consts::PI;
    for wires in [vec![4usize], vec![1, 9], vec![0, 5, 13]] {
        let flips = wires.iter().fold(0u64, |a, &w| a | 1 << w);
        let rot: Vec<(usize, f64)> = wires.iter().map(|&w| (w, pi)).collect();
        let coherent = d.coherent_fidelity(&rot).unwrap();
        assert!(
            (coherent - d.sv_fidelity(flips).unwrap()).abs() < 1e-10,
            "{wires:?}"
        );
    }
}

#[test]
fn x_sector_is_idle_under_z_noise() {
    for backend in CfnBackend::ALL {
        let d = distiller(DecoderKind::Full, backend);
        let reduced = Distiller::with_cfn(
            d.code.clone(),
            d.bundle.clone(),
            d.decoder_kind,
            backend,
            d.table.clone(),
            without_x_sector(&d.cfn),
        )
        .unwrap();
        assert_eq!(
            exact_census(&reduced).unwrap().failures,
            exact_census(&d).unwrap().failures
        );
    }
}

#[test]
fn simplified_decoder_drops_the_alignment_stage() {
    let d = distiller(DecoderKind::Simplified, CfnBackend::ExactPattern);
    let full = &d.bundle.decoder;
    assert_eq!(full.count_cx() - d.decoder().count_cx(), 3);
    assert!(synthesize_cfn(&d.table, CfnBackend::ControlledReset).is_err());
    let census: ErrorCensus = exact_census(&d).unwrap();
    assert_eq!(census.failures, oracle_census());
}
