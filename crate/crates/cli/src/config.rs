use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use mfmsd_core::cfn::CfnBackend;
use mfmsd_core::experiments::{default_p_grid, log_grid, SimMode};
use mfmsd_core::protocol::DecoderKind;
use serde::Deserialize;

/// Bad flags, environment values or config files (exit status 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// A comma list or log grid given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid)
}

/// Wire list given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Wires(pub Vec<usize>);

pub fn wires_arg(s: &str) -> Result<Wires, String> {
    parse_wires(s).map(Wires)
}

/// Parses `0.001,0.002` or `log:LO:HI:N`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    if let Some(spec) = s.strip_prefix("log:") {
        let parts: Vec<&str> = spec.split(':').collect();
        if let [lo, hi, n] = parts[..] {
            let lo: f64 = lo.parse().map_err(|_| format!("bad grid start `{lo}`"))?;
            let hi: f64 = hi.parse().map_err(|_| format!("bad grid end `{hi}`"))?;
            let n: usize = n.parse().map_err(|_| format!("bad grid size `{n}`"))?;
            if !(lo > 0.0 && hi >= lo) {
                return Err("log grid needs 0 < LO <= HI".into());
            }
            return Ok(log_grid(lo, hi, n));
        }
        return Err("expected log:LO:HI:N".into());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number `{t}`"))
        })
        .collect()
}

fn parse_wires(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad wire `{t}`"))
        })
        .collect()
}

/// Flags shared by every subcommand. Each may also come from the environment
/// or from the config file; explicit flags win, then environment, then file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with default values for any of these options
    #[arg(long, global = true, env = "MFMSD_CONFIG")]
    pub config: Option<PathBuf>,
    /// Input error rates: comma list or log:LO:HI:N
    #[arg(long, global = true, env = "MFMSD_P_GRID", value_parser = grid_arg)]
    pub p_grid: Option<Grid>,
    #[arg(long, global = true, env = "MFMSD_ROUNDS")]
    pub rounds: Option<u32>,
    #[arg(long, global = true, env = "MFMSD_TRIALS")]
    pub trials: Option<u64>,
    /// exact_pattern, anf or controlled_reset
    #[arg(long, global = true, env = "MFMSD_BACKEND")]
    pub backend: Option<CfnBackend>,
    /// frame, tableau or sv
    #[arg(long, global = true, env = "MFMSD_MODE")]
    pub mode: Option<SimMode>,
    #[arg(long, global = true, env = "MFMSD_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "MFMSD_WORKERS")]
    pub workers: Option<usize>,
    /// Output file, or directory for synthesize
    #[arg(long, global = true, env = "MFMSD_OUT")]
    pub out: Option<PathBuf>,
    /// full or simplified
    #[arg(long, global = true, env = "MFMSD_DECODER")]
    pub decoder: Option<DecoderKind>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    p_grid: Option<GridValue>,
    rounds: Option<u32>,
    trials: Option<u64>,
    backend: Option<String>,
    mode: Option<String>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    decoder: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GridValue {
    List(Vec<f64>),
    Text(String),
}

/// Effective settings after merging flags, environment, config file and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p_grid: Vec<f64>,
    pub rounds: u32,
    pub trials: u64,
    pub backend: CfnBackend,
    pub backend_explicit: bool,
    pub mode: SimMode,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub decoder: DecoderKind,
}

fn load_file(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(
        args: &CommonArgs,
        default_rounds: u32,
        default_trials: u64,
    ) -> anyhow::Result<RunConfig> {
        let file = match &args.config {
            Some(p) => load_file(p)?,
            None => FileConfig::default(),
        };
        let file_grid = match file.p_grid {
            Some(GridValue::List(v)) => Some(v),
            Some(GridValue::Text(s)) => Some(parse_grid(&s).map_err(usage)?),
            None => None,
        };
        let file_backend = file
            .backend
            .as_deref()
            .map(str::parse::<CfnBackend>)
            .transpose()
            .map_err(usage)?;
        let file_mode = file
            .mode
            .as_deref()
            .map(str::parse::<SimMode>)
            .transpose()
            .map_err(usage)?;
        let file_decoder = file
            .decoder
            .as_deref()
            .map(str::parse::<DecoderKind>)
            .transpose()
            .map_err(usage)?;
        let p_grid = args
            .p_grid
            .clone()
            .map(|g| g.0)
            .or(file_grid)
            .unwrap_or_else(default_p_grid);
        if p_grid.is_empty() || p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(usage("p-grid values must lie in [0, 1]"));
        }
        let backend = args.backend.or(file_backend);
        let cfg = RunConfig {
            p_grid,
            rounds: args.rounds.or(file.rounds).unwrap_or(default_rounds),
            trials: args.trials.or(file.trials).unwrap_or(default_trials),
            backend: backend.unwrap_or_default(),
            backend_explicit: backend.is_some(),
            mode: args.mode.or(file_mode).unwrap_or_default(),
            seed: args.seed.or(file.seed).unwrap_or(1),
            workers: args.workers.or(file.workers),
            out: args.out.clone().or(file.out),
            decoder: args.decoder.or(file_decoder).unwrap_or_default(),
        };
        if cfg.rounds == 0 || cfg.trials == 0 {
            return Err(usage("rounds and trials must be at least 1"));
        }
        if cfg.workers == Some(0) {
            return Err(usage("workers must be at least 1"));
        }
        Ok(cfg)
    }

    /// `# key = value` lines describing this run.
    pub fn header(&self, command: &str, extra: &[(&str, String)]) -> String {
        let grid: Vec<String> = self.p_grid.iter().map(|p| format!("{p:e}")).collect();
        let mut lines = vec![
            format!("# mfmsd {command} {}", env!("CARGO_PKG_VERSION")),
            format!("# decoder = {}", self.decoder),
            format!("# backend = {}", self.backend),
            format!("# mode = {}", self.mode),
            format!("# seed = {}", self.seed),
            format!("# rounds = {}", self.rounds),
            format!("# trials = {}", self.trials),
            format!("# p_grid = {}", grid.join(",")),
        ];
        for (k, v) in extra {
            lines.push(format!("# {k} = {v}"));
        }
        lines.join("\n") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        let g = parse_grid("log:1e-3:1e-1:3").unwrap();
        assert!((g[1] - 1e-2).abs() < 1e-15);
        assert!(parse_grid("log:1:2").is_err());
        assert!(parse_grid("a").is_err());
    }
}
