//! Noise sampling, exact census, error curves, Monte Carlo and threshold search.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::pauli::PauliString;
use crate::protocol::{DistillError, Distiller};
use crate::sim::frame_run_stages;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("no sign change of f(p) - p in ({lo}, {hi})")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Distill(#[from] DistillError),
}

fn check_p(p: f64) -> Result<(), ExperimentError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ExperimentError::BadProbability(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    StochasticZ,
    /// exp(−iθZ/2) on every input; twirls to p = sin²(θ/2).
    CoherentZ {
        theta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub p: f64,
    pub kind: NoiseKind,
}

impl NoiseModel {
    pub fn stochastic(p: f64) -> Result<Self, ExperimentError> {
        check_p(p)?;
        Ok(NoiseModel {
            p,
            kind: NoiseKind::StochasticZ,
        })
    }

    pub fn coherent(theta: f64) -> Self {
        NoiseModel {
            p: (theta / 2.0).sin().powi(2),
            kind: NoiseKind::CoherentZ { theta },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampledInput {
    /// Per-wire Z flips.
    Flips(Vec<bool>),
    /// Per-wire rotation angles.
    Rotations(Vec<f64>),
}

/// Generator for one trial: seeded from `seed`, stream chosen by `(round, trial)`.
pub fn trial_rng(seed: u64, round: u32, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((round as u64) << 40 | trial);
    rng
}

pub fn sample_flips(p: f64, n: usize, rng: &mut impl Rng) -> Vec<bool> {
    (0..n).map(|_| rng.gen::<f64>() < p).collect()
}

pub fn sample_inputs(model: &NoiseModel, n: usize, rng: &mut impl Rng) -> SampledInput {
    match model.kind {
        NoiseKind::StochasticZ => SampledInput::Flips(sample_flips(model.p, n, rng)),
        NoiseKind::CoherentZ { theta } => SampledInput::Rotations(vec![theta; n]),
    }
}

fn pack(flips: &[bool]) -> u64 {
    flips
        .iter()
        .enumerate()
        .fold(0, |m, (q, &f)| m | (f as u64) << q)
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Failure counts by input weight over all Z-flip patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorCensus {
    pub n: usize,
    /// `failures[w]` = failing patterns of weight `w`.
    pub failures: Vec<u64>,
    pub backend: String,
}

impl ErrorCensus {
    /// Enumerates all 2^n patterns with the given failure indicator.
    pub fn collect(
        n: usize,
        backend: impl Into<String>,
        fails: impl Fn(u64) -> Result<bool, DistillError> + Sync,
    ) -> Result<Self, DistillError> {
        let failing: Vec<u64> = (0..1u64 << n)
            .into_par_iter()
            .map(|f| fails(f).map(|bad| if bad { f } else { u64::MAX }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut failures = vec![0u64; n + 1];
        for f in failing.into_iter().filter(|&f| f != u64::MAX) {
            failures[f.count_ones() as usize] += 1;
        }
        Ok(ErrorCensus {
            n,
            failures,
            backend: backend.into(),
        })
    }

    pub fn total_patterns(&self) -> u64 {
        (0..=self.n).map(|w| binomial(self.n, w)).sum()
    }

    pub fn patterns_of_weight(&self, w: usize) -> u64 {
        binomial(self.n, w)
    }

    pub fn curve(&self) -> ErrorCurve {
        ErrorCurve {
            n: self.n,
            failures: self.failures.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("weight,total_patterns,failures\n");
        for (w, f) in self.failures.iter().enumerate() {
            s.push_str(&format!("{w},{},{f}\n", binomial(self.n, w)));
        }
        s
    }
}

/// Exact census with the Pauli-frame indicator.
pub fn exact_census(d: &Distiller) -> Result<ErrorCensus, DistillError> {
    ErrorCensus::collect(d.n_inputs(), d.backend.name(), |f| d.frame_failure(f))
}

/// p_out(p) = Σ_w N_w p^w (1−p)^(n−w).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorCurve {
    pub n: usize,
    pub failures: Vec<u64>,
}

impl ErrorCurve {
    pub fn eval(&self, p: f64) -> Result<f64, ExperimentError> {
        check_p(p)?;
        Ok(self.eval_unchecked(p))
    }

    fn eval_unchecked(&self, p: f64) -> f64 {
        let q = 1.0 - p;
        self.failures
            .iter()
            .enumerate()
            .map(|(w, &c)| c as f64 * p.powi(w as i32) * q.powi((self.n - w) as i32))
            .sum()
    }

    /// r-fold composition of the round map.
    pub fn compose(&self, p: f64, rounds: u32) -> Result<f64, ExperimentError> {
        check_p(p)?;
        Ok((0..rounds).fold(p, |x, _| self.eval_unchecked(x)))
    }
}

/// Leading-order model c^{-1/t} (c^{1/t} p)^{(t+1)^r}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticModel {
    pub c: f64,
    pub t: u32,
}

impl Default for AnalyticModel {
    fn default() -> Self {
        AnalyticModel { c: 105.0, t: 1 }
    }
}

impl AnalyticModel {
    pub fn rate(&self, p: f64, rounds: u32) -> f64 {
        let t = self.t as f64;
        let c_t = self.c.powf(1.0 / t);
        (c_t * p).powf(((self.t + 1) as f64).powi(rounds as i32)) / c_t
    }

    pub fn fixed_point(&self) -> f64 {
        self.c.powf(-1.0 / self.t as f64)
    }
}

pub fn analytic_rate(model: &AnalyticModel, p: f64, rounds: u32) -> f64 {
    model.rate(p, rounds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Threshold {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Smallest root of f(p) = p in (1e−4, 0.5): a log grid locates the first
/// sign change of f(p) − p, then bisection narrows it below `tol`.
pub fn threshold_solve(f: impl Fn(f64) -> f64, tol: f64) -> Result<Threshold, ExperimentError> {
    let (lo, hi) = (1e-4f64, 0.5f64);
    let g = |p: f64| f(p) - p;
    let steps = 400;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| lo * (hi / lo).powf(i as f64 / steps as f64))
        .collect();
    let bracket = grid
        .windows(2)
        .find(|w| g(w[0]) < 0.0 && g(w[1]) >= 0.0)
        .ok_or(ExperimentError::NoSignChange { lo, hi })?;
    let (mut a, mut b) = (bracket[0], bracket[1]);
    while b - a >= tol {
        let m = 0.5 * (a + b);
        if g(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Threshold {
        p: 0.5 * (a + b),
        lo: a,
        hi: b,
    })
}

pub fn census_threshold(census: &ErrorCensus) -> Result<Threshold, ExperimentError> {
    let curve = census.curve();
    threshold_solve(|p| curve.eval_unchecked(p), 1e-6)
}

const Z95: f64 = 1.959_963_984_540_054;
const Z95_ONE_SIDED: f64 = 1.644_853_626_951_472_2;

/// Wilson score interval. With no failures the upper end is the one-sided 95% bound.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = failures as f64 / n;
    let z = if failures == 0 { Z95_ONE_SIDED } else { Z95 };
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    if failures == 0 {
        (0.0, centre + half)
    } else {
        ((centre - half).max(0.0), (centre + half).min(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SimMode {
    #[default]
    Frame,
    Tableau,
    Statevector,
}

impl SimMode {
    pub fn name(self) -> &'static str {
        match self {
            SimMode::Frame => "frame",
            SimMode::Tableau => "tableau",
            SimMode::Statevector => "sv",
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frame" => Ok(SimMode::Frame),
            "tableau" => Ok(SimMode::Tableau),
            "sv" | "statevector" => Ok(SimMode::Statevector),
            _ => Err(format!(
                "unknown mode `{s}` (expected frame, tableau or sv)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub p: f64,
    pub trials: u64,
    pub rounds: u32,
    pub mode: SimMode,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub p: f64,
    pub rounds: u32,
    pub mode: SimMode,
    pub trials: u64,
    pub failures: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl Estimate {
    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

fn trial_failure(
    d: &Distiller,
    cfg: &MonteCarloConfig,
    stages: &[crate::sim::FrameStage],
    trial: u64,
) -> Result<bool, DistillError> {
    let n = d.n_inputs();
    let mut rng = trial_rng(cfg.seed, 0, trial);
    if cfg.rounds == 1 {
        let flips = pack(&sample_flips(cfg.p, n, &mut rng));
        return match cfg.mode {
            SimMode::Frame => d.frame_failure(flips),
            SimMode::Tableau => d.tab_failure(flips),
            SimMode::Statevector => d.sv_failure(flips),
        };
    }
    let total = n.pow(cfg.rounds);
    let flips = sample_flips(cfg.p, total, &mut rng);
    match cfg.mode {
        SimMode::Frame => {
            let mut p = PauliString::identity(total);
            for q in (0..total).filter(|&q| flips[q]) {
                p.toggle_z(q);
            }
            Ok(frame_run_stages(stages, &p)?.z_bit(0))
        }
        SimMode::Tableau => {
            // Block by block: round-k inputs are the failure bits of round k−1.
            let mut level = flips;
            while level.len() > 1 {
                level = level
                    .chunks(n)
                    .map(|block| d.tab_failure(pack(block)))
                    .collect::<Result<Vec<_>, _>>()?;
            }
            Ok(level[0])
        }
        SimMode::Statevector => unreachable!("rejected before sampling"),
    }
}

/// Estimates the output failure rate. Trial `i` draws its inputs from
/// `trial_rng(seed, 0, i)`, so results do not depend on the worker count.
pub fn monte_carlo(d: &Distiller, cfg: &MonteCarloConfig) -> Result<Estimate, ExperimentError> {
    check_p(cfg.p)?;
    if cfg.trials == 0 || cfg.rounds == 0 {
        return Err(ExperimentError::Invalid(
            "trials and rounds must be at least 1".into(),
        ));
    }
    if cfg.mode == SimMode::Statevector && cfg.rounds > 1 {
        return Err(ExperimentError::Invalid(
            "statevector mode supports a single round only (15^r wires)".into(),
        ));
    }
    let stages = if cfg.rounds > 1 && cfg.mode == SimMode::Frame {
        d.composed_stages(cfg.rounds)?
    } else {
        Vec::new()
    };
    let run = || -> Result<(u64, u64), DistillError> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| trial_failure(d, cfg, &stages, i).map(|f| (f as u64, 1u64)))
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
    };
    let (failures, trials) = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| ExperimentError::Invalid(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let (ci_low, ci_high) = wilson_interval(failures, trials);
    Ok(Estimate {
        p: cfg.p,
        rounds: cfg.rounds,
        mode: cfg.mode,
        trials,
        failures,
        estimate: failures as f64 / trials as f64,
        ci_low,
        ci_high,
        seed: cfg.seed,
    })
}

/// Message fidelity with |A⟩ after exp(−iθZ/2) on each of `wires`.
pub fn coherent_probe(d: &Distiller, theta: f64, wires: &[usize]) -> Result<f64, DistillError> {
    let rotations: Vec<(usize, f64)> = wires.iter().map(|&w| (w, theta)).collect();
    d.coherent_fidelity(&rotations)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect(),
    }
}

pub fn default_p_grid() -> Vec<f64> {
    log_grid(1e-4, 3e-2, 25)
}

pub const RECORD_HEADER: &str =
    "p,rounds,backend,mode,trials,failures,estimate,ci_low,ci_high,exact,analytic,seed";

/// One CSV result row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub p: f64,
    pub rounds: u32,
    pub backend: String,
    pub mode: String,
    pub trials: u64,
    pub failures: u64,
    pub estimate: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub exact: f64,
    pub analytic: f64,
    pub seed: u64,
}

impl ResultRecord {
    pub fn from_estimate(e: &Estimate, backend: &str, exact: f64, analytic: f64) -> Self {
        ResultRecord {
            p: e.p,
            rounds: e.rounds,
            backend: backend.into(),
            mode: e.mode.name().into(),
            trials: e.trials,
            failures: e.failures,
            estimate: Some(e.estimate),
            ci_low: Some(e.ci_low),
            ci_high: Some(e.ci_high),
            exact,
            analytic,
            seed: e.seed,
        }
    }

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        format!(
            "{:e},{},{},{},{},{},{},{},{},{:e},{:e},{}",
            self.p,
            self.rounds,
            self.backend,
            self.mode,
            self.trials,
            self.failures,
            opt(self.estimate),
            opt(self.ci_low),
            opt(self.ci_high),
            self.exact,
            self.analytic,
            self.seed
        )
    }
}
