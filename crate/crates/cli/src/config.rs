//! Command line, config file and their merge into a [`RunConfig`].
//!
//! Precedence is flag > config file > `WALLKIT_SEED` (seed only) > default.
//! A flag that overrides a different value from the file leaves a warning.

use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::io::{MatrixLiteral, OperatorLiteral};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TOL_RANK: f64 = 1e-9;
pub const DEFAULT_TOL_SUPPORT: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "wallkit", version, about = "Find, build and probe wall unitaries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Close a generating set under products and adjoints
    Close,
    /// Commutant of a generated algebra
    Commutant,
    /// Center of a generated algebra
    Center,
    /// Block decomposition of a generated algebra
    Decompose,
    /// Build a wall unitary
    Synth,
    /// Check the left and right wall conditions
    Verify,
    /// Support of an evolved operator over time
    Lightcone,
    /// Invariant algebras of a wall
    Invariants,
    /// Conserved algebra on the center
    Conserved,
    /// Signatures along a Haar-gauged wall sequence
    GaugeSeq,
    /// Dimensions of the operator-space fragments
    Fragments,
    /// Search a brickwork chain for wall windows
    Scan,
    /// Schmidt ranks of evolved product states
    Arealaw,
    /// Interleave wall steps with central measurements
    Measure,
    /// Spectral form factor, Monte Carlo against closed form
    Sff,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Close => "close",
            Command::Commutant => "commutant",
            Command::Center => "center",
            Command::Decompose => "decompose",
            Command::Synth => "synth",
            Command::Verify => "verify",
            Command::Lightcone => "lightcone",
            Command::Invariants => "invariants",
            Command::Conserved => "conserved",
            Command::GaugeSeq => "gauge-seq",
            Command::Fragments => "fragments",
            Command::Scan => "scan",
            Command::Arealaw => "arealaw",
            Command::Measure => "measure",
            Command::Sff => "sff",
        }
    }

    pub const ALL: [Command; 15] = [
        Command::Close,
        Command::Commutant,
        Command::Center,
        Command::Decompose,
        Command::Synth,
        Command::Verify,
        Command::Lightcone,
        Command::Invariants,
        Command::Conserved,
        Command::GaugeSeq,
        Command::Fragments,
        Command::Scan,
        Command::Arealaw,
        Command::Measure,
        Command::Sff,
    ];

    /// Commands that can write a CSV table.
    pub fn has_csv(self) -> bool {
        matches!(
            self,
            Command::Lightcone | Command::GaugeSeq | Command::Scan | Command::Arealaw | Command::Measure | Command::Sff
        )
    }

    /// `t_max` when neither flag nor file sets it. For `measure` it counts rounds,
    /// for `gauge-seq` steps.
    pub fn default_t_max(self) -> usize {
        match self {
            Command::Lightcone => 20,
            Command::GaugeSeq => 20,
            Command::Arealaw => 100,
            Command::Measure => 10,
            Command::Sff => 12,
            _ => 0,
        }
    }

    /// `samples` when unset: Monte Carlo draws for `sff`, initial states for `arealaw`.
    pub fn default_samples(self) -> usize {
        match self {
            Command::Sff => 4000,
            Command::Arealaw => 20,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    /// Walls around the configured central algebra
    Wall,
    /// Haar unitaries on the whole space
    Haar,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Named wall: abelian-pair, soliton-x, reducible-composite, uncoupled-center, swap-zz, fswap, nonabelian-cnot
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// JSON config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long = "t-max", global = true)]
    pub t_max: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Rank cutoff for closures and nullspaces
    #[arg(long = "tol-rank", global = true)]
    pub tol_rank: Option<f64>,
    /// Relative weight below which a site counts as outside the support
    #[arg(long = "tol-support", global = true)]
    pub tol_support: Option<f64>,
    /// Artifact path
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Worker threads for parallel stages
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Comma-separated Pauli strings, e.g. XI,ZX
    #[arg(long, global = true)]
    pub generators: Option<String>,
    /// Site dimensions as LEFT:CENTER,…:RIGHT, e.g. 2:2,2:2
    #[arg(long, global = true)]
    pub dims: Option<String>,
    /// Central observable (Pauli string or matrix literal in JSON)
    #[arg(long, global = true)]
    pub observable: Option<String>,
    /// Seed operator for lightcone (Pauli string or matrix literal in JSON)
    #[arg(long = "seed-op", global = true)]
    pub seed_op: Option<String>,
    /// Chain length for scan
    #[arg(long, global = true)]
    pub sites: Option<usize>,
    /// Bond carrying the embedded wall for scan
    #[arg(long = "wall-site", global = true)]
    pub wall_site: Option<usize>,
    /// Widest window tried by scan
    #[arg(long = "max-width", global = true)]
    pub max_width: Option<usize>,
    #[arg(long, value_enum, global = true)]
    pub ensemble: Option<Ensemble>,
    /// Dimension of the Haar ensemble for sff
    #[arg(long = "haar-dim", global = true)]
    pub haar_dim: Option<usize>,
}

/// Region dimensions `L | C₁ … C_k | R`, each flank a single site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub left: usize,
    pub center: Vec<usize>,
    pub right: usize,
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.center.iter().map(usize::to_string).collect();
        write!(f, "{}:{}:{}", self.left, c.join(","), self.right)
    }
}

impl std::str::FromStr for Dims {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("--dims: expected LEFT:CENTER:RIGHT, got \"{s}\"");
        }
        let num = |p: &str| -> anyhow::Result<usize> {
            let n: usize = p.trim().parse().with_context(|| format!("--dims: \"{p}\" is not a dimension"))?;
            if n == 0 {
                bail!("--dims: dimensions must be positive");
            }
            Ok(n)
        };
        Ok(Dims {
            left: num(parts[0])?,
            center: parts[1].split(',').map(num).collect::<anyhow::Result<_>>()?,
            right: num(parts[2])?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraConfig {
    /// `"diag"` or `"full"`
    Named(String),
    Generated(GeneratedAlgebra),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratedAlgebra {
    pub generators: Vec<OperatorLiteral>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallConfig {
    pub algebra: AlgebraConfig,
    /// Block `i` is sent to block `permutation[i]`.
    #[serde(default)]
    pub permutation: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub sites: Option<usize>,
    pub wall_site: Option<usize>,
    pub max_width: Option<usize>,
}

/// Everything a config file may set. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub dims: Option<Dims>,
    pub wall: Option<WallConfig>,
    /// Explicit unitary over `dims`.
    pub unitary: Option<MatrixLiteral>,
    pub generators: Option<Vec<OperatorLiteral>>,
    /// Site dimensions for matrix generators; Pauli generators imply qubits.
    pub site_dims: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub t_max: Option<usize>,
    pub samples: Option<usize>,
    pub tol_rank: Option<f64>,
    pub tol_support: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub observable: Option<OperatorLiteral>,
    pub seed_op: Option<OperatorLiteral>,
    pub chain: Option<ChainConfig>,
    pub ensemble: Option<Ensemble>,
    pub haar_dim: Option<usize>,
}

impl FileConfig {
    /// Parses a config document; errors name the path of the offending field.
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("config field `{path}`: {}", e.into_inner())
        })
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<String>,
    pub dims: Option<Dims>,
    pub wall: Option<WallConfig>,
    pub unitary: Option<MatrixLiteral>,
    pub generators: Option<Vec<OperatorLiteral>>,
    pub site_dims: Option<Vec<usize>>,
    pub seed: u64,
    pub t_max: usize,
    pub samples: usize,
    pub tol_rank: f64,
    pub tol_support: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: Option<usize>,
    pub observable: Option<OperatorLiteral>,
    pub seed_op: Option<OperatorLiteral>,
    pub chain: ChainConfig,
    pub ensemble: Ensemble,
    pub haar_dim: Option<usize>,
    pub warnings: Vec<String>,
}

/// Flag value if given, else the file value; warns when both disagree.
fn pick<T: PartialEq + fmt::Debug>(flag: Option<T>, file: Option<T>, name: &str, warnings: &mut Vec<String>) -> Option<T> {
    match (flag, file) {
        (Some(f), Some(g)) => {
            if f != g {
                warnings.push(format!("--{name} {f:?} overrides config value {g:?}"));
            }
            Some(f)
        }
        (f, g) => f.or(g),
    }
}

/// A flag holding either a Pauli string or a JSON matrix literal.
fn operator_flag(s: &str, name: &str) -> anyhow::Result<OperatorLiteral> {
    if s.trim_start().starts_with('[') {
        let m: MatrixLiteral = serde_json::from_str(s).with_context(|| format!("--{name}: bad matrix literal"))?;
        Ok(OperatorLiteral::Matrix(m))
    } else {
        Ok(OperatorLiteral::Pauli(s.trim().to_string()))
    }
}

pub fn parse_config(cli: Cli, env_seed: Option<&str>) -> anyhow::Result<RunConfig> {
    let Cli { command, flags } = cli;
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            FileConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let mut warnings = Vec::new();
    let w = &mut warnings;

    let env_seed = match env_seed {
        Some(s) => Some(
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("WALLKIT_SEED: \"{s}\" is not an unsigned integer"))?,
        ),
        None => None,
    };
    let seed = pick(flags.seed, file.seed, "seed", w).or(env_seed).unwrap_or(DEFAULT_SEED);

    let dims = match flags.dims.as_deref() {
        Some(s) => Some(s.parse::<Dims>()?),
        None => None,
    };
    if let (Some(f), Some(g)) = (&dims, &file.dims) {
        if f != g {
            w.push(format!("--dims {f} overrides config value {g}"));
        }
    }
    let dims = dims.or(file.dims);

    let generators = match flags.generators.as_deref() {
        Some(s) => Some(
            s.split(',')
                .map(|g| OperatorLiteral::Pauli(g.trim().to_string()))
                .collect::<Vec<_>>(),
        ),
        None => None,
    };
    if generators.is_some() && file.generators.is_some() {
        w.push("--generators overrides config generators".into());
    }
    let generators = generators.or(file.generators);

    let observable = match flags.observable.as_deref() {
        Some(s) => Some(operator_flag(s, "observable")?),
        None => None,
    };
    if observable.is_some() && file.observable.is_some() {
        w.push("--observable overrides config observable".into());
    }
    let seed_op = match flags.seed_op.as_deref() {
        Some(s) => Some(operator_flag(s, "seed-op")?),
        None => None,
    };
    if seed_op.is_some() && file.seed_op.is_some() {
        w.push("--seed-op overrides config seed_op".into());
    }

    let file_chain = file.chain.unwrap_or_default();
    let chain = ChainConfig {
        sites: pick(flags.sites, file_chain.sites, "sites", w),
        wall_site: pick(flags.wall_site, file_chain.wall_site, "wall-site", w),
        max_width: pick(flags.max_width, file_chain.max_width, "max-width", w),
    };

    let t_max = pick(flags.t_max, file.t_max, "t-max", w).unwrap_or(command.default_t_max());
    let samples = pick(flags.samples, file.samples, "samples", w).unwrap_or(command.default_samples());
    let tol_rank = pick(flags.tol_rank, file.tol_rank, "tol-rank", w).unwrap_or(DEFAULT_TOL_RANK);
    let tol_support = pick(flags.tol_support, file.tol_support, "tol-support", w).unwrap_or(DEFAULT_TOL_SUPPORT);
    for (name, v) in [("tol-rank", tol_rank), ("tol-support", tol_support)] {
        if !(v.is_finite() && v > 0.0) {
            bail!("--{name} must be a positive number, got {v}");
        }
    }
    let format = pick(flags.format, file.format, "format", w).unwrap_or(if command.has_csv() {
        Format::Csv
    } else {
        Format::Json
    });
    if format == Format::Csv && !command.has_csv() {
        bail!("{} writes JSON only; drop --format csv", command.name());
    }
    let workers = pick(flags.workers, file.workers, "workers", w);
    if workers == Some(0) {
        bail!("--workers must be at least 1");
    }

    let cfg = RunConfig {
        command,
        preset: pick(flags.preset, file.preset, "preset", w),
        dims,
        wall: file.wall,
        unitary: file.unitary,
        generators,
        site_dims: file.site_dims,
        seed,
        t_max,
        samples,
        tol_rank,
        tol_support,
        out: pick(flags.out, file.out, "out", w),
        format,
        workers,
        observable: observable.or(file.observable),
        seed_op: seed_op.or(file.seed_op),
        chain,
        ensemble: pick(flags.ensemble, file.ensemble, "ensemble", w).unwrap_or(Ensemble::Wall),
        haar_dim: pick(flags.haar_dim, file.haar_dim, "haar-dim", w),
        warnings,
    };
    let sources = [cfg.preset.is_some(), cfg.wall.is_some(), cfg.unitary.is_some()];
    if sources.iter().filter(|&&s| s).count() > 1 {
        bail!("give at most one of preset, wall, unitary");
    }
    Ok(cfg)
}
