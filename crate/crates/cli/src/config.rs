//! Experiment configuration.
//!
//! Every subcommand reads its flags into one of the structs below.  With
//! `--config FILE` the same keys (flag names without the dashes) are first
//! read from a TOML file and the flags given on the command line override
//! them.  Operator keys live in an `[operator]` table and the output paths in
//! an `[output]` table with keys `csv` and `summary`:
//!
//! ```toml
//! experiment = "simulate"   # optional, must match the subcommand
//! horizon = 64
//! radii = [16, 32, 64]
//!
//! [operator]
//! preset = "fibonacci"
//! theta-a = 0.5235987755982988
//! theta-b = 1.0471975511965976
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "unitrans",
    version,
    about = "Transport, spectral-measure and subordinacy experiments for CMV matrices and quantum walks",
    after_help = "Set UNITRANS_WORKERS to fix the number of worker threads. Output bytes do not depend on it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve delta_n and write per-step mass, moments and ball probabilities.
    Simulate(SimulateConfig),
    /// Cesaro-averaged moments at dyadic horizons and the fitted transport exponents.
    Exponents(ExponentsConfig),
    /// Damped time sum against the resolvent integral on |z| = e^{1/K}.
    ParsevalCheck(ParsevalConfig),
    /// Power-law growth of transfer-matrix solutions on a grid of z.
    Subordinacy(SubordinacyConfig),
    /// Fibonacci-walk transport bound beta(z) on a grid and over the spectrum.
    FibBound(FibBoundConfig),
    /// Fejer integrals, dyadic arc masses and Caratheodory probes of a measure.
    MeasureDiag(MeasureDiagConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Identity coin on every site (free walk).
    Identity,
    /// Hadamard coin on every site.
    Hadamard,
    /// Real rotation coin by --theta on every site.
    Rotation,
    /// Independent random coins drawn from --seed.
    RandomCoins,
    /// Fibonacci subshift coins with angles --theta-a and --theta-b.
    Fibonacci,
    /// Verblunsky coefficients identically zero.
    FreeCmv,
    /// Independent random coefficients with |alpha| <= --alpha-max, drawn from --seed.
    RandomCmv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct OperatorArgs {
    /// Named operator; exactly one of --preset, --coins, --verblunsky is required
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Coin file, one line `n re(c11) im(c11) re(c12) im(c12) re(c21) im(c21) re(c22) im(c22)` per site
    #[arg(long, value_name = "FILE")]
    pub coins: Option<PathBuf>,
    /// Verblunsky file, one line `n re(alpha) im(alpha)` per index
    #[arg(long, value_name = "FILE")]
    pub verblunsky: Option<PathBuf>,
    /// Read the Verblunsky file or CMV preset as a half-line sequence (alpha_n, n >= 0)
    #[arg(long)]
    pub half_line: bool,
    /// Coin angle of the rotation preset
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Coin angle of letter a (fibonacci preset)
    #[arg(long, allow_negative_numbers = true)]
    pub theta_a: Option<f64>,
    /// Coin angle of letter b (fibonacci preset)
    #[arg(long, allow_negative_numbers = true)]
    pub theta_b: Option<f64>,
    /// Largest |alpha| of the random-cmv preset [default: 0.5]
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// Seed of the random presets [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Basis index n of the initial state delta_n [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub initial: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct OutputArgs {
    /// CSV output file [default: stdout]
    #[arg(long = "output", value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// JSON summary file [default: stdout when --output is a file, otherwise none]
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateConfig {
    /// TOML file supplying defaults for every flag
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// Number of states K (times 0..K-1)
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Ball radii R for P_in(R, k) and P_out(R, k) [default: 1, 2, 4, ... up to 2K]
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<i64>,
    /// Moment orders p [default: 1, 2]
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExponentsConfig {
    /// TOML file supplying defaults for every flag
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// Largest horizon K
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Smallest horizon of the dyadic fit window [default: 16, or 2 when K < 32]
    #[arg(long)]
    pub k_min: Option<usize>,
    /// Moment orders p [default: 1, 2]
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ParsevalConfig {
    /// TOML file supplying defaults for every flag
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// Horizons K [default: 16, 64, 256]
    #[arg(long, value_delimiter = ',')]
    pub horizons: Vec<usize>,
    /// Basis index n whose probability a(n, k) is summed [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub site: Option<i64>,
    /// Quadrature nodes [default: 32 K]
    #[arg(long)]
    pub quad_nodes: Option<usize>,
    /// Resolvent window radius in units of K [default: 24]
    #[arg(long)]
    pub window_factor: Option<i64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SubordinacyConfig {
    /// TOML file supplying defaults for every flag
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// Number of points z_j = exp(2 pi i (j + 1/2) / M) [default: 16]
    #[arg(long)]
    pub z_grid: Option<usize>,
    /// Smallest length exponent: L runs over 2^l-min ..= 2^l-max [default: 3]
    #[arg(long)]
    pub l_min: Option<i32>,
    /// Largest length exponent [default: 12]
    #[arg(long)]
    pub l_max: Option<i32>,
    /// Number of boundary conditions (1, exp(2 pi i k / B)) [default: 8]
    #[arg(long)]
    pub boundary_samples: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FibBoundConfig {
    /// TOML file supplying defaults for every flag
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Coin angle of letter a [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub theta_a: Option<f64>,
    /// Coin angle of letter b [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub theta_b: Option<f64>,
    /// Constant K(z) entering gamma2 = 4 log2 K [default: 16]
    #[arg(long = "K", value_name = "K")]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    /// K(z) table, one line `arg(z) K` per node, interpolated linearly in the angle
    #[arg(long = "K-table", value_name = "FILE", conflicts_with = "k")]
    #[serde(rename = "K-table")]
    pub k_table: Option<PathBuf>,
    /// Number of points z_j = exp(2 pi i j / M) [default: 64]
    #[arg(long)]
    pub z_grid: Option<usize>,
    /// Size N of the paraorthogonal truncation approximating the spectrum [default: 1024]
    #[arg(long = "trunc-N", value_name = "N")]
    #[serde(rename = "trunc-N")]
    pub trunc_n: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct MeasureDiagConfig {
    /// TOML file supplying defaults for every flag
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Measure file, one line `re(z) im(z) w` per atom
    #[arg(long, value_name = "FILE")]
    pub measure: Option<PathBuf>,
    /// Operator whose paraorthogonal truncation supplies the measure when no file is given
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// Truncation size N of the operator measure [default: 1024]
    #[arg(long = "trunc-N", value_name = "N")]
    #[serde(rename = "trunc-N")]
    pub trunc_n: Option<usize>,
    /// Angle of the boundary phase of the truncation [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub phase: Option<f64>,
    /// Angle of the probe point z0 [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub z0: Option<f64>,
    /// Exponent alpha in (0, 1) [default: 0.5]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Horizons K of the Fejer integral [default: 16, 32, ..., 1024]
    #[arg(long, value_delimiter = ',')]
    pub horizons: Vec<u64>,
    /// Dyadic levels N of the arc partition [default: 4..=10]
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<u32>,
    /// Radii r in (0, 1) of the Caratheodory probe [default: 0.9, 0.99, 0.999]
    #[arg(long, value_delimiter = ',')]
    pub r_grid: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Common handling of the subcommand configurations.
pub trait Experiment: Serialize + DeserializeOwned + Clone {
    const NAME: &'static str;

    fn config_file(&self) -> Option<&Path>;
    fn output(&self) -> &OutputArgs;
    /// Input files whose contents enter the configuration digest.
    fn input_files(&self) -> Vec<&Path>;
}

fn operator_files(op: &OperatorArgs) -> Vec<&Path> {
    op.coins.iter().chain(&op.verblunsky).map(PathBuf::as_path).collect()
}

macro_rules! experiment {
    ($ty:ty, $name:literal, |$cfg:ident| $files:expr) => {
        impl Experiment for $ty {
            const NAME: &'static str = $name;

            fn config_file(&self) -> Option<&Path> {
                self.config.as_deref()
            }

            fn output(&self) -> &OutputArgs {
                &self.output
            }

            fn input_files(&self) -> Vec<&Path> {
                let $cfg = self;
                $files
            }
        }
    };
}

experiment!(SimulateConfig, "simulate", |c| operator_files(&c.operator));
experiment!(ExponentsConfig, "exponents", |c| operator_files(&c.operator));
experiment!(ParsevalConfig, "parseval-check", |c| operator_files(&c.operator));
experiment!(SubordinacyConfig, "subordinacy", |c| operator_files(&c.operator));
experiment!(FibBoundConfig, "fib-bound", |c| c.k_table.iter().map(PathBuf::as_path).collect());
experiment!(MeasureDiagConfig, "measure-diag", |c| {
    let mut files: Vec<&Path> = c.measure.iter().map(PathBuf::as_path).collect();
    files.extend(operator_files(&c.operator));
    files
});

/// Drop unset values so they do not override the file.
fn prune(v: Value) -> Option<Value> {
    match v {
        Value::Null | Value::Bool(false) => None,
        Value::Array(a) if a.is_empty() => None,
        Value::Object(map) => {
            let kept: Map<String, Value> = map
                .into_iter()
                .filter_map(|(k, v)| prune(v).map(|v| (k, v)))
                .collect();
            (!kept.is_empty()).then_some(Value::Object(kept))
        }
        other => Some(other),
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parse a configuration file for experiment `name` into a JSON tree.
pub fn parse_config_text(text: &str, name: &str) -> CliResult<Value> {
    let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let mut value = serde_json::to_value(table).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(kind) = obj.remove("experiment") {
            if kind.as_str() != Some(name) {
                return Err(CliError::Config(format!(
                    "file is for experiment {kind}, not \"{name}\""
                )));
            }
        }
    }
    Ok(value)
}

/// A complete configuration read from file text alone, with no flags layered on.
pub fn config_from_text<T: Experiment>(text: &str) -> CliResult<T> {
    let value = parse_config_text(text, T::NAME)?;
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

/// Layer the command-line values of `cli` over its `--config` file.
pub fn resolve<T: Experiment>(cli: &T) -> CliResult<T> {
    let mut base = match cli.config_file() {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_config_text(&text, T::NAME).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        None => Value::Object(Map::new()),
    };
    let flags = serde_json::to_value(cli).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(flags) = prune(flags) {
        merge(&mut base, flags);
    }
    serde_json::from_value(base).map_err(|e| CliError::Config(e.to_string()))
}

/// SHA-256 over the experiment name, the configuration without output paths,
/// and the bytes of every input file.
pub fn digest<T: Experiment>(cfg: &T) -> CliResult<String> {
    let mut value = serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("output");
    }
    let mut hasher = Sha256::new();
    hasher.update(T::NAME.as_bytes());
    hasher.update([0]);
    hasher.update(value.to_string().as_bytes());
    for path in cfg.input_files() {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        hasher.update([0]);
        hasher.update(&bytes);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_config_from_text() {
        let cfg: FibBoundConfig = config_from_text("K = 2.0\ntrunc-N = 64\ntheta-a = 0.5\n").unwrap();
        assert_eq!((cfg.k, cfg.trunc_n, cfg.theta_a), (Some(2.0), Some(64), Some(0.5)));
        assert!(config_from_text::<SimulateConfig>("horizon = -1\n").is_err());
        assert!(config_from_text::<SimulateConfig>("[operator]\npreset = \"nope\"\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_text(
            "experiment = \"simulate\"\nhorizon = 32\np = [1.0]\n[operator]\npreset = \"hadamard\"\nseed = 4\n",
            "simulate",
        )
        .unwrap();
        let cli = SimulateConfig {
            horizon: Some(64),
            operator: OperatorArgs {
                initial: Some(2),
                ..Default::default()
            },
            ..Default::default()
        };
        let mut base = file;
        merge(&mut base, prune(serde_json::to_value(&cli).unwrap()).unwrap());
        let cfg: SimulateConfig = serde_json::from_value(base).unwrap();
        assert_eq!(cfg.horizon, Some(64));
        assert_eq!(cfg.p, vec![1.0]);
        assert_eq!(cfg.operator.preset, Some(Preset::Hadamard));
        assert_eq!(cfg.operator.seed, Some(4));
        assert_eq!(cfg.operator.initial, Some(2));
    }

    #[test]
    fn unknown_keys_and_wrong_experiment_rejected() {
        let v = parse_config_text("horizon = 3\nbogus = 1\n", "simulate").unwrap();
        assert!(serde_json::from_value::<SimulateConfig>(v).is_err());
        assert!(parse_config_text("experiment = \"exponents\"\n", "simulate").is_err());
        assert!(parse_config_text("horizon = \n", "simulate").is_err());
    }

    #[test]
    fn fib_bound_keys_keep_their_case() {
        let v = parse_config_text("K = 2.0\ntrunc-N = 64\ntheta-a = 0.1\n", "fib-bound").unwrap();
        let cfg: FibBoundConfig = serde_json::from_value(v).unwrap();
        assert_eq!(cfg.k, Some(2.0));
        assert_eq!(cfg.trunc_n, Some(64));
        assert_eq!(cfg.theta_a, Some(0.1));
    }

    #[test]
    fn digest_ignores_output_paths() {
        let a = FibBoundConfig {
            k: Some(16.0),
            ..Default::default()
        };
        let mut b = a.clone();
        b.output.csv = Some("x.csv".into());
        assert_eq!(digest(&a).unwrap(), digest(&b).unwrap());
        b.k = Some(2.0);
        assert_ne!(digest(&a).unwrap(), digest(&b).unwrap());
    }
}
