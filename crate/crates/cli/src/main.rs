mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use mfmsd_core::cfn::{
    derive_flip_table, derive_sector_table, synthesize_cfn, CfnBackend, FlipTable, Sector,
};
use mfmsd_core::circuit::Circuit;
use mfmsd_core::code::{build_code, synthesize_encoder, EncoderBundle};
use mfmsd_core::experiments::{
    census_threshold, coherent_probe, monte_carlo, AnalyticModel, ErrorCensus, MonteCarloConfig,
    ResultRecord, SimMode, RECORD_HEADER,
};
use mfmsd_core::protocol::{DecoderKind, Distiller};
use mfmsd_core::verify::{run_verification, SvSweep, VerifyOptions};

use config::{grid_arg, wires_arg, CommonArgs, Grid, RunConfig, UsageError, Wires};

#[derive(Debug, Parser)]
#[command(
    name = "mfmsd",
    version,
    about = "Measurement-free 15-to-1 magic state distillation"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write encoder, decoders, flip table and feedback networks
    Synthesize,
    /// Run the verification suite
    Verify {
        /// Compare statevector and frame results on all 2^15 patterns
        #[arg(long)]
        exhaustive: bool,
        /// Use this decoder circuit instead of the synthesized one
        #[arg(long)]
        decoder_file: Option<PathBuf>,
        /// Use this feedback circuit instead of the synthesized one
        #[arg(long)]
        cfn_file: Option<PathBuf>,
    },
    /// Exact failure counts by input weight
    Census,
    /// Monte Carlo estimates over the p-grid
    Montecarlo,
    /// Monte Carlo, exact and analytic curves for rounds 1..=R
    Figure2,
    /// Fixed point of the exact round map and of the analytic model
    Threshold,
    /// Message fidelity under coherent Z rotations
    CoherentProbe {
        /// Rotation angles in radians: comma list or log:LO:HI:N
        #[arg(long, value_parser = grid_arg)]
        thetas: Option<Grid>,
        /// Rotate these wires together (default: each wire on its own)
        #[arg(long, value_parser = wires_arg)]
        wires: Option<Wires>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn distiller(cfg: &RunConfig) -> anyhow::Result<Distiller> {
    Distiller::new(cfg.decoder, cfg.backend)
        .with_context(|| format!("{} backend on the {} decoder", cfg.backend, cfg.decoder))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Synthesize => synthesize(&RunConfig::resolve(&cli.common, 1, 1)?),
        Command::Verify {
            exhaustive,
            decoder_file,
            cfn_file,
        } => verify(
            &RunConfig::resolve(&cli.common, 1, 1)?,
            exhaustive,
            decoder_file,
            cfn_file,
        ),
        Command::Census => census(&RunConfig::resolve(&cli.common, 1, 1)?),
        Command::Montecarlo => montecarlo(&RunConfig::resolve(&cli.common, 1, 100_000)?),
        Command::Figure2 => figure2(&RunConfig::resolve(&cli.common, 2, 10_000)?),
        Command::Threshold => threshold(&RunConfig::resolve(&cli.common, 1, 1)?),
        Command::CoherentProbe { thetas, wires } => coherent(
            &RunConfig::resolve(&cli.common, 1, 1)?,
            thetas.map(|g| g.0),
            wires.map(|w| w.0),
        ),
    }
}

fn with_header(header: &str, body: &str) -> String {
    format!("{header}{body}")
}

fn cfn_sections(cfg: &RunConfig, table: &FlipTable) -> anyhow::Result<String> {
    let backends: Vec<CfnBackend> = if cfg.backend_explicit {
        vec![cfg.backend]
    } else {
        CfnBackend::ALL.to_vec()
    };
    let mut s = String::new();
    for b in backends {
        match synthesize_cfn(table, b) {
            Ok(c) => {
                s.push_str(&format!("# backend {b}\n"));
                s.push_str(&c.serialize());
            }
            Err(e) if !cfg.backend_explicit => s.push_str(&format!("# backend {b}: {e}\n")),
            Err(e) => bail!("{b} backend: {e}"),
        }
    }
    Ok(s)
}

fn synthesize(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let code = build_code();
    let bundle: EncoderBundle = synthesize_encoder(&code).context("encoder synthesis")?;
    let decoder = match cfg.decoder {
        DecoderKind::Full => &bundle.decoder,
        DecoderKind::Simplified => &bundle.simplified_decoder,
    };
    let table = match cfg.decoder {
        DecoderKind::Full => derive_flip_table(decoder)?,
        DecoderKind::Simplified => {
            derive_flip_table(decoder).or_else(|_| derive_sector_table(decoder, &[Sector::Z]))?
        }
    };
    let cfn = cfn_sections(cfg, &table)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("synth"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let header = cfg.header("synthesize", &[]);
    let mut wire_map = String::from("# code qubit label -> wire:");
    for (q, w) in bundle.wire_map.iter().enumerate() {
        wire_map.push_str(&format!(" {:04b}->{w}", q + 1));
    }
    wire_map.push('\n');
    let files = [
        (
            "encoder.circ",
            format!("{wire_map}{}", bundle.encoder.serialize()),
        ),
        ("decoder.circ", bundle.decoder.serialize()),
        (
            "decoder_simplified.circ",
            bundle.simplified_decoder.serialize(),
        ),
        ("flip_table.txt", table.serialize()),
        ("cfn.circ", cfn),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, with_header(&header, &body))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn read_circuit(path: &Path) -> anyhow::Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Circuit::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn verify(
    cfg: &RunConfig,
    exhaustive: bool,
    decoder_file: Option<PathBuf>,
    cfn_file: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let opts = VerifyOptions {
        backend: cfg.backend,
        decoder_kind: cfg.decoder,
        sv_sweep: if exhaustive {
            SvSweep::All
        } else {
            SvSweep::LowWeight
        },
        decoder_override: decoder_file.as_deref().map(read_circuit).transpose()?,
        cfn_override: cfn_file.as_deref().map(read_circuit).transpose()?,
    };
    let report = run_verification(&opts);
    let text = with_header(
        &cfg.header("verify", &[("exhaustive", exhaustive.to_string())]),
        &report.render(),
    );
    emit(cfg.out.as_deref(), &text)?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("verification failed");
        Ok(ExitCode::from(1))
    }
}

fn census_for(cfg: &RunConfig, d: &Distiller) -> anyhow::Result<ErrorCensus> {
    let census = ErrorCensus::collect(d.n_inputs(), d.backend.name(), |f| match cfg.mode {
        SimMode::Frame => d.frame_failure(f),
        SimMode::Tableau => d.tab_failure(f),
        SimMode::Statevector => d.sv_failure(f),
    })?;
    Ok(census)
}

fn census(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let d = distiller(cfg)?;
    let c = census_for(cfg, &d)?;
    emit(
        cfg.out.as_deref(),
        &with_header(&cfg.header("census", &[]), &c.to_csv()),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn mc_config(cfg: &RunConfig, p: f64, rounds: u32, mode: SimMode) -> MonteCarloConfig {
    MonteCarloConfig {
        p,
        trials: cfg.trials,
        rounds,
        mode,
        seed: cfg.seed,
        workers: cfg.workers,
    }
}

fn montecarlo(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let d = distiller(cfg)?;
    let curve = mfmsd_core::experiments::exact_census(&d)?.curve();
    let model = AnalyticModel::default();
    let mut body = format!("{RECORD_HEADER}\n");
    for &p in &cfg.p_grid {
        let e = monte_carlo(&d, &mc_config(cfg, p, cfg.rounds, cfg.mode))?;
        let rec = ResultRecord::from_estimate(
            &e,
            d.backend.name(),
            curve.compose(p, cfg.rounds)?,
            model.rate(p, cfg.rounds),
        );
        body.push_str(&rec.to_csv_row());
        body.push('\n');
    }
    emit(
        cfg.out.as_deref(),
        &with_header(&cfg.header("montecarlo", &[]), &body),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn figure2(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let d = distiller(cfg)?;
    let curve = mfmsd_core::experiments::exact_census(&d)?.curve();
    let model = AnalyticModel::default();
    let mode = if cfg.mode == SimMode::Statevector {
        SimMode::Frame
    } else {
        cfg.mode
    };
    let mut body = format!("{RECORD_HEADER}\n");
    for &p in &cfg.p_grid {
        for r in 1..=cfg.rounds {
            let m = if r == 1 { cfg.mode } else { mode };
            let e = monte_carlo(&d, &mc_config(cfg, p, r, m))?;
            let rec = ResultRecord::from_estimate(
                &e,
                d.backend.name(),
                curve.compose(p, r)?,
                model.rate(p, r),
            );
            body.push_str(&rec.to_csv_row());
            body.push('\n');
        }
    }
    emit(
        cfg.out.as_deref(),
        &with_header(&cfg.header("figure2", &[]), &body),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn threshold(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let d = distiller(cfg)?;
    let c = census_for(cfg, &d)?;
    let t = census_threshold(&c)?;
    let model = AnalyticModel::default();
    let body = format!(
        "source,fixed_point,bracket_low,bracket_high\nexact,{:.9},{:.9},{:.9}\nanalytic,{:.9},{:.9},{:.9}\n",
        t.p,
        t.lo,
        t.hi,
        model.fixed_point(),
        model.fixed_point(),
        model.fixed_point()
    );
    emit(
        cfg.out.as_deref(),
        &with_header(&cfg.header("threshold", &[]), &body),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn coherent(
    cfg: &RunConfig,
    thetas: Option<Vec<f64>>,
    wires: Option<Vec<usize>>,
) -> anyhow::Result<ExitCode> {
    let d = distiller(cfg)?;
    let thetas = thetas.unwrap_or_else(|| {
        (0..=8)
            .map(|i| i as f64 * std::f64::consts::PI / 8.0)
            .collect()
    });
    let n = d.n_inputs();
    let sets: Vec<Vec<usize>> = match wires {
        Some(w) => {
            if w.iter().any(|&q| q >= n) {
                return Err(UsageError(format!("wires must be below {n}")).into());
            }
            vec![w]
        }
        None => (0..n).map(|q| vec![q]).collect(),
    };
    let mut body = String::from("theta,wires,twirled_p,fidelity\n");
    for &theta in &thetas {
        for set in &sets {
            let f = coherent_probe(&d, theta, set)?;
            let names: Vec<String> = set.iter().map(usize::to_string).collect();
            body.push_str(&format!(
                "{theta:.9},{},{:.6e},{f:.12}\n",
                names.join(" "),
                (theta / 2.0).sin().powi(2)
            ));
        }
    }
    let extra = [("thetas", format!("{thetas:?}"))];
    emit(
        cfg.out.as_deref(),
        &with_header(&cfg.header("coherent-probe", &extra), &body),
    )?;
    Ok(ExitCode::SUCCESS)
}
