//! One function per subcommand. Each returns the JSON result, a CSV table
//! and the list of violated invariants; nothing here touches the
//! filesystem.

use std::collections::HashMap;

use lindley2d_core::chunk::ChunkRunner;
use lindley2d_core::classify::classify_regime;
use lindley2d_core::estimate::{
    decay_check, fit_tail_exponent, flat_tail_check, geometric_grid, occupation_series, survival_curve, FitWindow,
};
use lindley2d_core::harmonic::{
    h1_estimate, h2d_estimate, one_step_residual, superharmonic_check, uniform_grid, HarmonicEstimate, LatticeH1,
    LyapunovSpec,
};
use lindley2d_core::model::{derive_seed, Marginal1D};
use lindley2d_core::simulate::{duality_deviation, random_duality_trial};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, ExperimentConfig, HarmonicMode};
use crate::Command;

/// Lattice `h₁` residuals above this are violations.
const LATTICE_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Seed tag for the residual evaluations of the 2-D harmonic function,
/// kept apart from the per-point tags `0, 1, 2, …`.
const RESIDUAL_SEED_TAG: u64 = 1 << 32;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] lindley2d_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl RunError {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        use lindley2d_core::Error as E;
        match self {
            RunError::Config(_) => "config",
            RunError::Core(e) => match e {
                E::WrongRegime { .. } => "regime_mismatch",
                E::InsufficientSurvivors { .. } => "insufficient_survivors",
                E::BudgetExceeded { .. } => "budget_exceeded",
                E::InvalidDistribution(_) => "invalid_distribution",
                E::NotLattice => "not_lattice",
                _ => "numerical",
            },
            RunError::Io(_) | RunError::Csv(_) | RunError::Json(_) => "io",
            RunError::Pool(_) => "runtime",
        }
    }
}

/// A header and rows of already formatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub command: Command,
    pub result: Value,
    pub table: Table,
    pub violations: Vec<String>,
}

fn cell<T: ToString>(v: T) -> String {
    v.to_string()
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

/// Runs `command` on an already resolved configuration.
pub fn run_command<R: ChunkRunner>(
    command: Command,
    config: &ExperimentConfig,
    runner: &R,
) -> Result<Outcome, RunError> {
    let (result, table, violations) = match command {
        Command::Classify => classify(config)?,
        Command::Tail => tail(config, runner)?,
        Command::Harmonic => harmonic(config, runner)?,
        Command::Lyapunov => lyapunov(config)?,
        Command::Duality => duality(config)?,
        Command::Occupation => occupation(config, runner)?,
    };
    Ok(Outcome {
        command,
        result,
        table,
        violations,
    })
}

type Parts = (Value, Table, Vec<String>);

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, RunError> {
    s.as_ref()
        .ok_or_else(|| ConfigError::Field {
            field: name.to_string(),
            message: "section missing (resolve the configuration first)".into(),
        })
        .map_err(RunError::from)
}

fn classify(config: &ExperimentConfig) -> Result<Parts, RunError> {
    let params = section(&config.classify, "classify")?;
    let dist = config.distribution()?;
    let moments = dist.moments();
    let assumptions = dist.check_assumptions();
    let class = classify_regime(&moments, &assumptions, params.delta)?;
    let mut violations = Vec::new();
    if let Some(v) = &params.expected_verdict {
        if class.verdict.to_string() != *v {
            violations.push(format!("verdict {} differs from expected {v}", class.verdict));
        }
    }
    if let Some(c) = &params.expected_case {
        if class.case_label.to_string() != *c {
            violations.push(format!("case {} differs from expected {c}", class.case_label));
        }
    }
    let mut table = Table::new(&["quantity", "value"]);
    table.push([cell("case"), class.case_label.to_string()]);
    table.push([cell("verdict"), class.verdict.to_string()]);
    table.push([cell("tail_exponent"), opt_cell(class.tail_exponent)]);
    table.push([cell("required_moment_order"), opt_cell(class.required_moment_order)]);
    table.push([cell("rho"), opt_cell(class.rho)]);
    for (i, m) in moments.marginals.iter().enumerate() {
        table.push([format!("mean_{}", i + 1), cell(m.mean)]);
        table.push([format!("variance_{}", i + 1), cell(m.variance)]);
    }
    for h in &class.hypotheses_met {
        table.push([format!("hypothesis:{}", h.name), cell(h.passed)]);
    }
    let result = json!({
        "classification": class,
        "moments": moments,
        "assumptions": assumptions,
        "assumptions_hold": assumptions.holds(),
    });
    Ok((result, table, violations))
}

fn tail<R: ChunkRunner>(config: &ExperimentConfig, runner: &R) -> Result<Parts, RunError> {
    let params = section(&config.tail, "tail")?;
    let dist = config.distribution()?;
    let class = classify_regime(
        &dist.moments(),
        &dist.check_assumptions(),
        lindley2d_core::DEFAULT_DELTA,
    )?;
    let grid = match &params.n_grid {
        Some(g) => g.clone(),
        None => geometric_grid(1, params.n_max, params.per_decade),
    };
    let curve = survival_curve(&dist, params.start, &grid, params.paths, config.seed, runner)?;
    let window = match params.window {
        Some([lo, hi]) => FitWindow::Explicit { n_min: lo, n_max: hi },
        None => FitWindow::Default,
    };
    let mut violations = Vec::new();
    let (fit, fit_error) = match fit_tail_exponent(&curve, window) {
        Ok(f) => (Some(f), None),
        // A fit is only mandatory when an exponent range is asserted.
        Err(e) if params.expected_exponent.is_some() => return Err(e.into()),
        Err(e) => (None, Some(e.to_string())),
    };
    if let (Some([lo, hi]), Some(f)) = (params.expected_exponent, &fit) {
        if !(f.exponent >= lo && f.exponent <= hi) {
            violations.push(format!("fitted exponent {} outside [{lo}, {hi}]", f.exponent));
        }
    }
    let decay = match params.decay_power {
        Some(r) => {
            let [lo, hi] = params.decay_window.unwrap_or([params.n_max / 100, params.n_max]);
            let d = decay_check(&curve, r, lo, hi)?;
            if !d.passed {
                violations.push(format!("survival exceeds c·n^-{r} (max ratio {})", d.max_ratio));
            }
            Some(d)
        }
        None => None,
    };
    let flat = match params.flat {
        Some([n_ref, n_far]) => {
            let f = flat_tail_check(&curve, n_ref, n_far)?;
            if !f.passed {
                violations.push(format!(
                    "P[tau > {n_far}] = {} outside the interval {:?} at n = {n_ref}",
                    f.far_estimate, f.ref_ci
                ));
            }
            Some(f)
        }
        None => None,
    };
    let mut table = Table::new(&["n", "survivors", "estimate", "ci_low", "ci_high"]);
    for i in 0..curve.n_grid.len() {
        table.push([
            cell(curve.n_grid[i]),
            cell(curve.survivors[i]),
            cell(curve.estimates[i]),
            cell(curve.ci_low[i]),
            cell(curve.ci_high[i]),
        ]);
    }
    let result = json!({
        "case": class.case_label,
        "predicted_exponent": class.tail_exponent,
        "paths": curve.paths,
        "censor_horizon": curve.censor_horizon,
        "start": curve.start,
        "fit": fit,
        "fit_error": fit_error,
        "decay_check": decay,
        "flat_tail_check": flat,
    });
    Ok((result, table, violations))
}

fn estimate_row(e: &HarmonicEstimate) -> Vec<String> {
    let mut row: Vec<String> = e.point.iter().map(|&v| cell(v)).collect();
    if row.len() == 1 {
        row.push(String::new());
    }
    let bias = e.truncation_bias_bound;
    row.extend([
        cell(e.value),
        cell(e.stat_error),
        opt_cell(bias.map(|b| b.below)),
        opt_cell(bias.map(|b| b.above)),
        opt_cell(e.censored_fraction),
    ]);
    row
}

fn harmonic<R: ChunkRunner>(config: &ExperimentConfig, runner: &R) -> Result<Parts, RunError> {
    let params = section(&config.harmonic, "harmonic")?;
    let mut table = Table::new(&[
        "x1",
        "x2",
        "value",
        "stat_error",
        "bias_below",
        "bias_above",
        "censored_fraction",
    ]);
    let mut violations = Vec::new();
    let arity = if params.mode == HarmonicMode::H2d { 2 } else { 1 };
    for (i, p) in params.points.iter().enumerate() {
        if p.len() != arity {
            return Err(ConfigError::Field {
                field: format!("harmonic.points[{i}]"),
                message: format!("expected {arity} coordinate(s), found {}", p.len()),
            }
            .into());
        }
    }
    let mut extra = json!(null);
    let estimates: Vec<HarmonicEstimate> = match params.mode {
        HarmonicMode::H1 => {
            let marginal = config.marginal()?;
            params
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    h1_estimate(
                        &marginal,
                        p[0],
                        params.horizon,
                        params.paths,
                        derive_seed(config.seed, i as u64),
                        runner,
                    )
                })
                .collect::<Result<_, _>>()?
        }
        HarmonicMode::H1Exact => {
            let marginal = config.marginal()?;
            let solved = LatticeH1::solve(&marginal, params.truncation)?;
            let max_residual = solved.max_residual(params.residual_upto);
            if max_residual > LATTICE_RESIDUAL_TOLERANCE {
                violations.push(format!(
                    "lattice residual {max_residual} on 1..={} exceeds {LATTICE_RESIDUAL_TOLERANCE}",
                    params.residual_upto
                ));
            }
            extra = json!({ "d": solved.d(), "max_residual": max_residual, "residual_upto": params.residual_upto });
            params
                .points
                .iter()
                .map(|p| solved.estimate(p[0]))
                .collect::<Result<_, _>>()?
        }
        HarmonicMode::H2d => {
            let dist = config.distribution()?;
            let estimates: Vec<HarmonicEstimate> = params
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    h2d_estimate(
                        &dist,
                        [p[0], p[1]],
                        params.horizon,
                        params.paths,
                        derive_seed(config.seed, i as u64),
                        runner,
                    )
                })
                .collect::<Result<_, _>>()?;
            if let Some(k) = params.residual_grid {
                let atoms = dist.finite_atoms().ok_or_else(|| ConfigError::Field {
                    field: "harmonic.residual_grid".into(),
                    message: "residuals need a finite-support distribution".into(),
                })?;
                let residual_seed = derive_seed(config.seed, RESIDUAL_SEED_TAG);
                // One estimate per point, seeded by order of first use.
                let mut cache: HashMap<[u64; 2], HarmonicEstimate> = HashMap::new();
                let mut residuals = Vec::new();
                for a in 1..=k {
                    for b in 1..=k {
                        let r = one_step_residual(&atoms, [a as f64, b as f64], |y| {
                            let key = [y[0].to_bits(), y[1].to_bits()];
                            if let Some(e) = cache.get(&key) {
                                return Ok(e.clone());
                            }
                            let seed = derive_seed(residual_seed, cache.len() as u64);
                            let e = h2d_estimate(&dist, y, params.horizon, params.residual_paths, seed, runner)?;
                            cache.insert(key, e.clone());
                            Ok(e)
                        })?;
                        if r.z.abs() > 4.0 {
                            violations.push(format!("residual at {:?} is {} sigma", r.point, r.z));
                        }
                        residuals.push(r);
                    }
                }
                extra = json!({ "residuals": residuals });
            }
            estimates
        }
    };
    for e in &estimates {
        if let Some(v) = &e.violation {
            violations.push(v.clone());
        }
        table.push(estimate_row(e));
    }
    let result = json!({ "mode": params.mode, "estimates": estimates, "details": extra });
    Ok((result, table, violations))
}

fn lyapunov(config: &ExperimentConfig) -> Result<Parts, RunError> {
    let params = section(&config.lyapunov, "lyapunov")?;
    let marginal = config.marginal()?;
    let spec = LyapunovSpec::build(&marginal)?;
    let tolerance = params.tolerance.unwrap_or(match marginal {
        Marginal1D::FiniteSupport(_) => 1e-12,
        _ => 1e-6,
    });
    let report = superharmonic_check(&spec, &uniform_grid(params.grid_end, params.grid_step), tolerance)?;
    let mut violations = Vec::new();
    if !report.violations.is_empty() {
        violations.push(format!(
            "Delta exceeds {tolerance} at {} grid points (max {} at x = {})",
            report.violations.len(),
            report.max_delta,
            report.argmax
        ));
    }
    if !report.monotone {
        violations.push("a, b or m is not monotone on the grid".into());
    }
    let mut table = Table::new(&["x", "a", "b", "m", "a_bar", "v", "delta"]);
    for r in &report.rows {
        table.push([r.x, r.a, r.b, r.m, r.a_bar, r.v, r.delta].map(cell));
    }
    let result = json!({
        "spec": report.spec,
        "max_delta": report.max_delta,
        "argmax": report.argmax,
        "tolerance": report.tolerance,
        "violations": report.violations,
        "monotone": report.monotone,
        "passed": report.passed,
    });
    Ok((result, table, violations))
}

#[derive(Serialize)]
struct DualitySummary {
    trials: u64,
    lattice_trials: u64,
    max_abs_lattice: f64,
    max_rel_continuous: f64,
    tolerance: f64,
    failures: u64,
}

fn duality(config: &ExperimentConfig) -> Result<Parts, RunError> {
    let params = section(&config.duality, "duality")?;
    let mut table = Table::new(&["trial", "lattice", "length", "max_abs", "max_rel", "passed"]);
    let mut s = DualitySummary {
        trials: params.trials,
        lattice_trials: 0,
        max_abs_lattice: 0.0,
        max_rel_continuous: 0.0,
        tolerance: params.tolerance,
        failures: 0,
    };
    let mut violations = Vec::new();
    for i in 0..params.trials {
        let trial = random_duality_trial(config.seed, i, params.max_len);
        let dev = duality_deviation(&trial.increments);
        let passed = if trial.lattice {
            s.lattice_trials += 1;
            s.max_abs_lattice = s.max_abs_lattice.max(dev.max_abs);
            dev.max_abs == 0.0
        } else {
            s.max_rel_continuous = s.max_rel_continuous.max(dev.max_rel);
            dev.max_rel <= params.tolerance
        };
        if !passed {
            s.failures += 1;
            violations.push(format!(
                "trial {i}: deviation {} (relative {})",
                dev.max_abs, dev.max_rel
            ));
        }
        table.push([
            cell(i),
            cell(trial.lattice),
            cell(trial.increments.len()),
            cell(dev.max_abs),
            cell(dev.max_rel),
            cell(passed),
        ]);
    }
    Ok((serde_json::to_value(&s)?, table, violations))
}

fn occupation<R: ChunkRunner>(config: &ExperimentConfig, runner: &R) -> Result<Parts, RunError> {
    let params = section(&config.occupation, "occupation")?;
    let dist = config.distribution()?;
    let class = classify_regime(
        &dist.moments(),
        &dist.check_assumptions(),
        lindley2d_core::DEFAULT_DELTA,
    )?;
    let series = occupation_series(&dist, params.corner, params.n_max, params.paths, config.seed, runner)?;
    let mut violations = Vec::new();
    if series.max_abs_z > params.z_limit {
        violations.push(format!(
            "Lindley and exit-time series disagree: max |z| = {} > {}",
            series.max_abs_z, params.z_limit
        ));
    }
    let mut table = Table::new(&[
        "n",
        "lindley_term",
        "exit_term",
        "lindley_partial_sum",
        "exit_partial_sum",
        "z",
    ]);
    for i in 0..series.n.len() {
        table.push([
            cell(series.n[i]),
            cell(series.lindley_terms[i]),
            cell(series.exit_terms[i]),
            cell(series.lindley_partial_sums[i]),
            cell(series.exit_partial_sums[i]),
            cell(series.z_scores[i]),
        ]);
    }
    let last = series.n.len() - 1;
    let result = json!({
        "case": class.case_label,
        "verdict": class.verdict,
        "box_corner": series.box_corner,
        "n_max": series.n_max,
        "paths": series.paths,
        "max_abs_z": series.max_abs_z,
        "log_growth": series.log_growth,
        "lindley_total": series.lindley_partial_sums[last],
        "exit_total": series.exit_partial_sums[last],
    });
    Ok((result, table, violations))
}
