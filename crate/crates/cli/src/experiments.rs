//! The six experiments.  Each one checks its whole configuration before it
//! computes anything and returns a [`Report`].

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use unitrans::cmv::{paraorthogonal_spectrum_szego, DiscreteMeasure};
use unitrans::dynamics::{parseval_check, transport_exponent, ParsevalOptions, TransportSeries};
use unitrans::fibonacci::{bound_on_grid, max_beta_over_spectrum, FibonacciParams, KOfZ};
use unitrans::io::parse_measure;
use unitrans::measure::{alpha_derivative_probe, dyadic_quantities, fejer_integral, uah_constant};
use unitrans::subordinacy::{boundary_conditions, dyadic_lengths, power_law_fit, whole_line_solution};
use unitrans::Error;

use crate::config::{
    ExponentsConfig, FibBoundConfig, MeasureDiagConfig, ParsevalConfig, SimulateConfig, SubordinacyConfig,
};
use crate::error::{CliError, CliResult};
use crate::operator::{in_file, read_file, OperatorPlan};
use crate::output::{num, Report};

/// Longest evolution `simulate` and `exponents` accept; the cost grows like `K^2`.
pub const MAX_HORIZON: usize = 1 << 18;

/// Largest `parseval-check` horizon.  Quadrature nodes and resolvent window
/// both grow with `K`, so K = 1024 already takes minutes.
pub const MAX_PARSEVAL_HORIZON: usize = 1 << 10;

/// Largest paraorthogonal truncation; the spectrum costs about `N^2` work.
pub const MAX_TRUNCATION: usize = 1 << 13;

/// Largest number of transfer-matrix steps a subordinacy run may take.
pub const MAX_TRANSFER_STEPS: u64 = 1 << 34;

/// Largest `--l-max`.
pub const MAX_LENGTH_EXPONENT: i32 = 26;

fn truncation(value: Option<usize>) -> CliResult<usize> {
    let n = value.unwrap_or(1024);
    if n < 2 {
        return Err(invalid(format!("--trunc-N = {n} must be at least 2")));
    }
    if n > MAX_TRUNCATION {
        return Err(Error::Resource {
            message: format!("--trunc-N = {n} exceeds the limit {MAX_TRUNCATION}"),
            feasible: MAX_TRUNCATION as u64,
        }
        .into());
    }
    Ok(n)
}

fn invalid(msg: impl Into<String>) -> CliError {
    Error::Input(msg.into()).into()
}

fn horizon(value: Option<usize>, flag: &str) -> CliResult<usize> {
    let k = value.ok_or_else(|| CliError::Config(format!("--{flag} is required")))?;
    if k == 0 {
        return Err(invalid(format!("--{flag} must be positive")));
    }
    if k > MAX_HORIZON {
        return Err(Error::Resource {
            message: format!("horizon {k} exceeds the limit {MAX_HORIZON}"),
            feasible: MAX_HORIZON as u64,
        }
        .into());
    }
    Ok(k)
}

fn moment_orders(p: &[f64]) -> CliResult<Vec<f64>> {
    if p.is_empty() {
        return Ok(vec![1.0, 2.0]);
    }
    if let Some(bad) = p.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(invalid(format!("moment order {bad} must be positive and finite")));
    }
    Ok(p.to_vec())
}

fn finite(value: f64, flag: &str) -> CliResult<f64> {
    if !value.is_finite() {
        return Err(invalid(format!("--{flag} = {value} is not finite")));
    }
    Ok(value)
}

pub fn simulate(cfg: &SimulateConfig) -> CliResult<Report> {
    let plan = OperatorPlan::from_args(&cfg.operator)?;
    let k = horizon(cfg.horizon, "horizon")?;
    let radii = if cfg.radii.is_empty() {
        std::iter::successors(Some(1i64), |r| Some(r * 2))
            .take_while(|&r| r <= 2 * k as i64)
            .collect()
    } else {
        if let Some(r) = cfg.radii.iter().find(|&&r| r < 0) {
            return Err(invalid(format!("radius {r} is negative")));
        }
        cfg.radii.clone()
    };
    let p = moment_orders(&cfg.p)?;

    let (mut u, psi0) = plan.operator(2 * k as i64 + 8)?;
    let series = TransportSeries::stream(&mut u, &psi0, k, &radii, &p)?;
    let mut report = Report::new(&["k", "quantity", "parameter", "value"]);
    report.header("horizon", k);
    report.header("initial", plan.initial());
    let mut drift: f64 = 0.0;
    for step in 0..k {
        let cell = |q: &str, param: String, v: f64| vec![step.to_string(), q.to_string(), param, num(v)];
        drift = drift.max((series.mass(step) - 1.0).abs());
        report.row(cell("mass", String::new(), series.mass(step)));
        for &q in &p {
            report.row(cell("moment", num(q), series.moment_at(q, step)?));
        }
        for &r in &radii {
            report.row(cell("p_in", r.to_string(), series.p_in(r, step)?));
            report.row(cell("p_out", r.to_string(), series.p_out(r, step)?));
        }
    }
    let averages: Vec<_> = p
        .iter()
        .map(|&q| Ok(json!({ "p": q, "moment": series.moment(q, k)? })))
        .collect::<CliResult<_>>()?;
    report.summary = json!({
        "horizon": k,
        "initial": plan.initial(),
        "max_mass_drift": drift,
        "cesaro_moments": averages,
    });
    Ok(report)
}

pub fn exponents(cfg: &ExponentsConfig) -> CliResult<Report> {
    let plan = OperatorPlan::from_args(&cfg.operator)?;
    let k = horizon(cfg.horizon, "horizon")?;
    let k_min = cfg.k_min.unwrap_or(if k < 32 { 2 } else { 16 });
    if k_min == 0 || k_min >= k {
        return Err(invalid(format!("--k-min = {k_min} must lie in 1..{k}")));
    }
    let mut horizons: Vec<usize> = std::iter::successors(Some(k_min), |h| Some(h * 2))
        .take_while(|&h| h < k)
        .collect();
    horizons.push(k);
    let p = moment_orders(&cfg.p)?;

    let (mut u, psi0) = plan.operator(2 * k as i64 + 8)?;
    let series = TransportSeries::stream(&mut u, &psi0, k, &[0], &p)?;
    let mut report = Report::new(&["K", "quantity", "parameter", "value"]);
    report.header("horizon", k);
    let mut fits = Vec::new();
    for &q in &p {
        let curve = series.moment_curve(q, &horizons)?;
        for (kk, m) in &curve {
            report.row(vec![(*kk as usize).to_string(), "moment".into(), num(q), num(*m)]);
        }
        let e = transport_exponent(&curve, q)?;
        fits.push(json!({
            "p": q,
            "estimate": e.estimate,
            "raw": e.raw,
            "lower": e.lower,
            "upper": e.upper,
        }));
    }
    report.summary = json!({ "horizons": horizons, "exponents": fits });
    Ok(report)
}

pub fn parseval(cfg: &ParsevalConfig) -> CliResult<Report> {
    let plan = OperatorPlan::from_args(&cfg.operator)?;
    let horizons = if cfg.horizons.is_empty() {
        vec![16, 64, 256]
    } else {
        cfg.horizons.clone()
    };
    if horizons.contains(&0) {
        return Err(invalid("horizons must be positive"));
    }
    if let Some(&k) = horizons.iter().find(|&&k| k > MAX_PARSEVAL_HORIZON) {
        return Err(Error::Resource {
            message: format!("horizon {k} exceeds the parseval-check limit {MAX_PARSEVAL_HORIZON}"),
            feasible: MAX_PARSEVAL_HORIZON as u64,
        }
        .into());
    }
    let mut opts = ParsevalOptions {
        quad_nodes: cfg.quad_nodes,
        ..ParsevalOptions::default()
    };
    if let Some(f) = cfg.window_factor {
        if f < 1 {
            return Err(invalid(format!("--window-factor = {f} must be at least 1")));
        }
        opts.window_factor = f;
    }
    if let Some(nodes) = cfg.quad_nodes {
        if let Some(k) = horizons.iter().find(|&&k| nodes < 4 * k) {
            return Err(invalid(format!("--quad-nodes = {nodes} is below 4K = {}", 4 * k)));
        }
    }
    let site = cfg.site.unwrap_or(0);
    let k_max = *horizons.iter().max().expect("nonempty") as i64;
    // the damped time sum runs about 20 K steps of at most two sites each
    let reach = (40 * k_max).max(opts.window_factor.saturating_mul(k_max)) + (site - plan.initial()).abs() + 32;
    if reach as usize > opts.max_window {
        let feasible = (opts.max_window as i64 / 40.max(opts.window_factor)).max(0) as u64;
        return Err(Error::Resource {
            message: format!("horizon {k_max} needs coefficients over {reach} sites"),
            feasible,
        }
        .into());
    }

    let (u, psi0) = plan.operator(reach)?;
    let mut report = Report::new(&["K", "site", "lhs", "rhs", "reldiff", "steps", "quad_nodes"]);
    let mut worst: f64 = 0.0;
    for &k in &horizons {
        let r = parseval_check(&u, &psi0, site, k, &opts)?;
        worst = worst.max(r.reldiff);
        report.row(vec![
            k.to_string(),
            site.to_string(),
            num(r.lhs),
            num(r.rhs),
            num(r.reldiff),
            r.steps.to_string(),
            r.quad_nodes.to_string(),
        ]);
    }
    report.summary = json!({ "site": site, "max_reldiff": worst });
    Ok(report)
}

pub fn subordinacy(cfg: &SubordinacyConfig) -> CliResult<Report> {
    let plan = OperatorPlan::from_args(&cfg.operator)?;
    let m = cfg.z_grid.unwrap_or(16);
    let (lo, hi) = (cfg.l_min.unwrap_or(3), cfg.l_max.unwrap_or(12));
    let b = cfg.boundary_samples.unwrap_or(8);
    if m == 0 {
        return Err(invalid("--z-grid must be positive"));
    }
    if !(0 <= lo && lo < hi && hi <= 30) {
        return Err(invalid(format!("length exponents need 0 <= l-min < l-max <= 30, got {lo} and {hi}")));
    }
    if b == 0 {
        return Err(invalid("--boundary-samples must be positive"));
    }
    // the coefficients alone take 16 * 2^l-max bytes
    if hi > MAX_LENGTH_EXPONENT {
        return Err(Error::Resource {
            message: format!("--l-max = {hi} exceeds the limit {MAX_LENGTH_EXPONENT}"),
            feasible: MAX_LENGTH_EXPONENT as u64,
        }
        .into());
    }
    // every (z, boundary condition) pair runs one solution out to 2^l-max
    let per_length = (m as u64).saturating_mul(b as u64);
    if per_length.saturating_mul(1u64 << hi) > MAX_TRANSFER_STEPS {
        let feasible = (MAX_TRANSFER_STEPS / per_length).max(1).ilog2();
        return Err(Error::Resource {
            message: format!("{m} grid points x {b} boundary conditions x 2^{hi} steps exceeds 2^34 transfer steps"),
            feasible: feasible as u64,
        }
        .into());
    }

    let ls = dyadic_lengths(lo, hi);
    let alphas = plan.forward_alphas((1usize << hi) + 2)?;
    let bcs = boundary_conditions(b);
    let grid: Vec<Complex64> = (0..m)
        .map(|j| Complex64::from_polar(1.0, TAU * (j as f64 + 0.5) / m as f64))
        .collect();
    let fits = grid
        .par_iter()
        .map(|&z| {
            let norms = bcs
                .iter()
                .map(|&(x, y)| whole_line_solution(&alphas, z, x, y, &ls))
                .collect::<unitrans::Result<Vec<_>>>()?;
            power_law_fit(&norms)
        })
        .collect::<unitrans::Result<Vec<_>>>()?;
    let mut report = Report::new(&["z_re", "z_im", "arg", "gamma1", "gamma2", "alpha"]);
    for (z, f) in grid.iter().zip(&fits) {
        report.row(vec![num(z.re), num(z.im), num(z.arg()), num(f.gamma1), num(f.gamma2), num(f.alpha)]);
    }
    let min_alpha = fits.iter().map(|f| f.alpha).fold(f64::INFINITY, f64::min);
    let max_alpha = fits.iter().map(|f| f.alpha).fold(f64::NEG_INFINITY, f64::max);
    report.summary = json!({
        "lengths": ls,
        "boundary_samples": b,
        "alpha_range": [min_alpha, max_alpha],
    });
    Ok(report)
}

fn k_table(path: &Path) -> CliResult<KOfZ> {
    let text = read_file(path)?;
    unitrans::io::parse_k_table(&text).map_err(|source| CliError::Input { path: path.to_path_buf(), source })
}

pub fn fib_bound(cfg: &FibBoundConfig) -> CliResult<Report> {
    let ta = finite(cfg.theta_a.unwrap_or(0.0), "theta-a")?;
    let tb = finite(cfg.theta_b.unwrap_or(0.0), "theta-b")?;
    let mut params = FibonacciParams::new(ta, tb)?;
    let k_label = match (&cfg.k, &cfg.k_table) {
        (Some(_), Some(_)) => return Err(CliError::Config("--K and --K-table are mutually exclusive".into())),
        (_, Some(path)) => {
            params = params.with_k(k_table(path)?);
            format!("table {}", path.display())
        }
        (k, None) => {
            let k = finite(k.unwrap_or(unitrans::fibonacci::DEFAULT_K), "K")?;
            if !(k > 1.0) {
                return Err(Error::Domain(format!("K = {k} must exceed 1")).into());
            }
            params = params.with_k(KOfZ::Constant(k));
            num(k)
        }
    };
    let m = cfg.z_grid.unwrap_or(64);
    if m == 0 {
        return Err(invalid("--z-grid must be positive"));
    }
    let n = truncation(cfg.trunc_n)?;

    let grid: Vec<Complex64> = (0..m)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / m as f64))
        .collect();
    let rows = bound_on_grid(&grid, &params)?;
    let spectrum = max_beta_over_spectrum(&params, n)?;
    let mut report = Report::new(&["z_re", "z_im", "arg", "I", "C", "gamma1", "K", "gamma2", "beta"]);
    report.header("K", &k_label);
    report.header("trunc-N", n);
    report.header("max-beta", num(spectrum.max_beta));
    for r in &rows {
        report.row(vec![
            num(r.z.re),
            num(r.z.im),
            num(r.z.arg()),
            num(r.i),
            num(r.c),
            num(r.gamma1),
            num(r.k),
            num(r.gamma2),
            num(r.beta),
        ]);
    }
    report.summary = json!({
        "theta_a": ta,
        "theta_b": tb,
        "K": k_label,
        "trunc_N": n,
        "atoms": spectrum.rows.len(),
        "max_beta": spectrum.max_beta,
        "argmax": { "re": spectrum.argmax.re, "im": spectrum.argmax.im, "arg": spectrum.argmax.arg() },
    });
    Ok(report)
}

pub fn measure_diag(cfg: &MeasureDiagConfig) -> CliResult<Report> {
    enum Source {
        File(DiscreteMeasure),
        Operator(OperatorPlan, usize, Complex64),
    }
    let has_operator = cfg.operator.preset.is_some() || cfg.operator.coins.is_some() || cfg.operator.verblunsky.is_some();
    let source = match (&cfg.measure, has_operator) {
        (Some(_), true) => {
            return Err(CliError::Config("give either --measure or an operator, not both".into()));
        }
        (Some(path), false) => Source::File(in_file(path, parse_measure(&read_file(path)?))?),
        (None, _) => {
            let plan = OperatorPlan::from_args(&cfg.operator)?;
            let n = truncation(cfg.trunc_n)?;
            let phase = Complex64::from_polar(1.0, finite(cfg.phase.unwrap_or(0.0), "phase")?);
            Source::Operator(plan, n, phase)
        }
    };
    let z0_arg = finite(cfg.z0.unwrap_or(0.0), "z0")?;
    let z0 = Complex64::from_polar(1.0, z0_arg);
    let alpha = cfg.alpha.unwrap_or(0.5);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("--alpha = {alpha} outside (0, 1)")));
    }
    let horizons = if cfg.horizons.is_empty() {
        (4..=10).map(|j| 1u64 << j).collect()
    } else {
        cfg.horizons.clone()
    };
    if horizons.contains(&0) {
        return Err(invalid("horizons must be positive"));
    }
    let levels = if cfg.levels.is_empty() { (4..=10).collect() } else { cfg.levels.clone() };
    if let Some(l) = levels.iter().find(|&&l| l > 40) {
        return Err(invalid(format!("level {l} exceeds 40")));
    }
    let r_grid = if cfg.r_grid.is_empty() { vec![0.9, 0.99, 0.999] } else { cfg.r_grid.clone() };
    if r_grid.len() < 2 || r_grid.windows(2).any(|w| !(w[1] > w[0])) || r_grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(invalid("--r-grid must be increasing, inside (0, 1), with at least two points"));
    }

    let mu = match source {
        Source::File(mu) => mu,
        Source::Operator(plan, n, phase) => paraorthogonal_spectrum_szego(&plan.forward_alphas(n - 1)?, n, phase)?,
    };
    let mut report = Report::new(&["quantity", "parameter", "value"]);
    report.header("z0-arg", num(z0_arg));
    report.header("alpha", num(alpha));
    let fejer = horizons
        .par_iter()
        .map(|&k| fejer_integral(&mu, z0, k))
        .collect::<unitrans::Result<Vec<_>>>()?;
    for (k, v) in horizons.iter().zip(&fejer) {
        report.row(vec!["fejer".into(), k.to_string(), num(*v)]);
    }
    for &level in &levels {
        let d = dyadic_quantities(&mu, level, alpha)?;
        report.row(vec!["b".into(), level.to_string(), num(d.b)]);
        report.row(vec!["light_arcs".into(), level.to_string(), d.light_count.to_string()]);
    }
    let probe = alpha_derivative_probe(&mu, z0, alpha, &r_grid)?;
    for row in &probe.rows {
        report.row(vec!["probe".into(), num(row.r), num(row.value)]);
    }
    let arcs: Vec<f64> = levels.iter().map(|&l| TAU / 2f64.powi(l as i32)).collect();
    let uah = uah_constant(&mu, alpha, &arcs)?;
    report.summary = json!({
        "atoms": mu.len(),
        "total_mass": mu.total_mass(),
        "resolution": mu.resolution(),
        "probe_slope": probe.slope,
        "probe_warnings": probe.warnings,
        "uah_constant": uah,
        "z0": { "re": z0.re, "im": z0.im },
    });
    Ok(report)
}
