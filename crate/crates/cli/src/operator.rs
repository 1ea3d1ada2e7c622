//! Operators named by [`OperatorArgs`].

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unitrans::cmv::{build_extended_cmv, build_half_line_cmv, VerblunskySequence};
use unitrans::fibonacci::{fibonacci_coins, FibonacciParams};
use unitrans::io::{parse_coins, parse_verblunsky};
use unitrans::qwalk::{build_walk_operator, cgmv_gauge, Coin, CoinSequence};
use unitrans::{BandedUnitary, Error, LatticeVector, Window};

use crate::config::{OperatorArgs, Preset};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
enum CoinPlan {
    File(CoinSequence),
    Identity,
    Hadamard,
    Rotation(f64),
    Random(u64),
    Fibonacci(FibonacciParams),
}

#[derive(Debug, Clone)]
enum AlphaPlan {
    File(VerblunskySequence),
    Free,
    Random { seed: u64, max: f64 },
}

#[derive(Debug, Clone)]
enum Plan {
    Walk(CoinPlan),
    Cmv { alphas: AlphaPlan, half_line: bool },
}

/// A validated operator description; coefficients are generated on demand
/// for whatever range a computation needs.
#[derive(Debug, Clone)]
pub struct OperatorPlan {
    plan: Plan,
    initial: i64,
}

pub(crate) fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn in_file<T>(path: &Path, r: unitrans::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn required(value: Option<f64>, flag: &str, preset: &str) -> CliResult<f64> {
    let v = value.ok_or_else(|| CliError::Config(format!("preset {preset} needs --{flag}")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("--{flag} = {v} is not finite")));
    }
    Ok(v)
}

/// Coin at `site` drawn from its own ChaCha stream, so it does not depend on
/// which range is generated.
fn random_coin(seed: u64, site: i64) -> Coin {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(site as u64);
    let theta = rng.random_range(0.0..FRAC_PI_2);
    let [phi, a, b] = [0; 3].map(|_| rng.random_range(0.0..TAU));
    let e = |t: f64| Complex64::from_polar(1.0, t);
    let (s, c) = theta.sin_cos();
    Coin::new(
        e(phi + a) * c,
        e(phi + b) * s,
        -e(phi - b) * s,
        e(phi - a) * c,
    )
    .expect("parametrized coins are unitary")
}

fn random_alpha(seed: u64, max: f64, n: i64) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    let r = max * rng.random_range(0.0f64..1.0).sqrt();
    Complex64::from_polar(r, rng.random_range(0.0..TAU))
}

impl OperatorPlan {
    pub fn from_args(args: &OperatorArgs) -> CliResult<Self> {
        let given = [args.preset.is_some(), args.coins.is_some(), args.verblunsky.is_some()];
        match given.iter().filter(|&&g| g).count() {
            0 => return Err(CliError::Config("no operator: give --preset, --coins or --verblunsky".into())),
            1 => {}
            _ => {
                return Err(CliError::Config(
                    "--preset, --coins and --verblunsky are mutually exclusive".into(),
                ))
            }
        }
        let seed = args.seed.unwrap_or(0);
        let plan = if let Some(path) = &args.coins {
            Plan::Walk(CoinPlan::File(in_file(path, parse_coins(&read_file(path)?))?))
        } else if let Some(path) = &args.verblunsky {
            let seq = in_file(path, parse_verblunsky(&read_file(path)?, args.half_line))?;
            if seq.is_empty() {
                return Err(CliError::Input {
                    path: path.clone(),
                    source: Error::Input("no coefficients".into()),
                });
            }
            Plan::Cmv {
                alphas: AlphaPlan::File(seq),
                half_line: args.half_line,
            }
        } else {
            match args.preset.expect("one source is set") {
                Preset::Identity => Plan::Walk(CoinPlan::Identity),
                Preset::Hadamard => Plan::Walk(CoinPlan::Hadamard),
                Preset::Rotation => Plan::Walk(CoinPlan::Rotation(required(args.theta, "theta", "rotation")?)),
                Preset::RandomCoins => Plan::Walk(CoinPlan::Random(seed)),
                Preset::Fibonacci => {
                    let a = required(args.theta_a, "theta-a", "fibonacci")?;
                    let b = required(args.theta_b, "theta-b", "fibonacci")?;
                    Plan::Walk(CoinPlan::Fibonacci(FibonacciParams::new(a, b)?))
                }
                Preset::FreeCmv => Plan::Cmv {
                    alphas: AlphaPlan::Free,
                    half_line: args.half_line,
                },
                Preset::RandomCmv => {
                    let max = args.alpha_max.unwrap_or(0.5);
                    if !(0.0..1.0).contains(&max) {
                        return Err(Error::Domain(format!("--alpha-max = {max} outside [0, 1)")).into());
                    }
                    Plan::Cmv {
                        alphas: AlphaPlan::Random { seed, max },
                        half_line: args.half_line,
                    }
                }
            }
        };
        let initial = args.initial.unwrap_or(0);
        if let Plan::Cmv { half_line: true, .. } = plan {
            if initial < 0 {
                return Err(Error::Domain(format!("initial index {initial} is negative on the half line")).into());
            }
        }
        Ok(OperatorPlan { plan, initial })
    }

    pub fn initial(&self) -> i64 {
        self.initial
    }

    pub fn is_walk(&self) -> bool {
        matches!(self.plan, Plan::Walk(_))
    }

    fn coins(&self, sites: std::ops::Range<i64>) -> CliResult<CoinSequence> {
        let Plan::Walk(plan) = &self.plan else {
            unreachable!("coins requested from a CMV plan")
        };
        Ok(match plan {
            CoinPlan::File(seq) => seq.clone(),
            CoinPlan::Identity => CoinSequence::identity(sites),
            CoinPlan::Hadamard => CoinSequence::from_fn(sites, |_| Coin::hadamard())?,
            CoinPlan::Rotation(t) => CoinSequence::rotation(sites, *t),
            CoinPlan::Random(seed) => CoinSequence::from_fn(sites, |n| random_coin(*seed, n))?,
            CoinPlan::Fibonacci(params) => fibonacci_coins(sites, params)?,
        })
    }

    fn alphas(&self, indices: std::ops::Range<i64>) -> CliResult<VerblunskySequence> {
        let Plan::Cmv { alphas, half_line } = &self.plan else {
            unreachable!("coefficients requested from a walk plan")
        };
        let indices = if *half_line { indices.start.max(0)..indices.end } else { indices };
        Ok(match alphas {
            AlphaPlan::File(seq) => seq.clone(),
            AlphaPlan::Free => VerblunskySequence::constant(*half_line, indices, Complex64::new(0.0, 0.0))?,
            AlphaPlan::Random { seed, max } => {
                VerblunskySequence::from_fn(*half_line, indices, |n| random_alpha(*seed, *max, n))?
            }
        })
    }

    /// The operator with coefficients covering `reach` basis indices on
    /// either side of the initial state, and the initial state itself.
    pub fn operator(&self, reach: i64) -> CliResult<(BandedUnitary, LatticeVector)> {
        let n0 = self.initial;
        // window growth overshoots the support by up to a quarter of its length
        let reach = 2 * reach;
        let psi = LatticeVector::delta(n0);
        let u = match &self.plan {
            Plan::Walk(_) => {
                let site = n0.div_euclid(2);
                let coins = self.coins(site - reach / 2 - 4..site + reach / 2 + 5)?;
                let lo = 2 * site - 8;
                build_walk_operator(&coins, Window::new(lo, lo + 18))?
            }
            Plan::Cmv { half_line: false, .. } => {
                let alphas = self.alphas(n0 - reach - 12..n0 + reach + 13)?;
                let lo = 2 * n0.div_euclid(2) - 6;
                build_extended_cmv(&alphas, Window::new(lo, lo + 14))?
            }
            Plan::Cmv { half_line: true, .. } => {
                let alphas = self.alphas(0..n0 + reach + 13)?;
                build_half_line_cmv(&alphas, (n0 + 8).max(8) as usize)?
            }
        };
        if !u.window().contains(n0) {
            return Err(Error::Alignment(format!("initial index {n0} outside the operator window")).into());
        }
        Ok((u, psi))
    }

    /// Verblunsky coefficients `alpha_0 .. alpha_{count-1}`; walks are gauged
    /// to CMV form first.
    pub fn forward_alphas(&self, count: usize) -> CliResult<VerblunskySequence> {
        let count = count as i64;
        let source = match &self.plan {
            Plan::Walk(_) => {
                let sites = count.div_euclid(2) + 1;
                let coins = self.coins(0..sites)?;
                cgmv_gauge(&coins, Window::new(0, sites))?.1
            }
            Plan::Cmv { .. } => self.alphas(0..count)?,
        };
        source.require(0..count)?;
        Ok(VerblunskySequence::from_fn(true, 0..count, |n| {
            source.get(n).expect("checked by require")
        })?)
    }
}
