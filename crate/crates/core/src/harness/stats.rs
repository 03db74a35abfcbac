use crate::bandit::RunResult;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::run::{run_experiment_with, Parallelism};

/// Normal quantile for two-sided 95% intervals.
pub const Z_95: f64 = 1.96;

/// Offset between the seeds used for reported runs and for sweeps.
pub const HELD_OUT_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Mean cumulative regret across replications with 95% normal intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub mean: Vec<f64>,
    pub half_width: Vec<f64>,
    pub finals: Vec<f64>,
}

impl AggregateResult {
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_half_width(&self) -> f64 {
        self.half_width.last().copied().unwrap_or(0.0)
    }
}

/// Mean and `1.96 s / sqrt(n)` of `xs` (sample standard deviation; zero
/// width for a single value).
pub fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, Z_95 * var.sqrt() / n.sqrt())
}

pub fn aggregate(results: &[RunResult]) -> Result<AggregateResult> {
    let first = results
        .first()
        .ok_or_else(|| Error::Dimension("nothing to aggregate".into()))?;
    let len = first.regret.len();
    if results.iter().any(|r| r.regret.len() != len) {
        return Err(Error::Dimension("replications have different lengths".into()));
    }
    let mut mean = Vec::with_capacity(len);
    let mut half_width = Vec::with_capacity(len);
    let mut column = vec![0.0; results.len()];
    for t in 0..len {
        for (slot, r) in column.iter_mut().zip(results) {
            *slot = r.regret[t];
        }
        let (m, h) = mean_ci(&column);
        mean.push(m);
        half_width.push(h);
    }
    Ok(AggregateResult {
        mean,
        half_width,
        finals: results.iter().map(RunResult::final_regret).collect(),
    })
}

/// Least-squares line through `(ln T, ln regret)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub t_grid: Vec<usize>,
    pub mean_finals: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Grid points left out because their mean regret was not positive.
    pub excluded: Vec<usize>,
}

pub const MIN_FIT_POINTS: usize = 4;

pub fn fit_power_law(t_grid: &[usize], mean_finals: &[f64]) -> Result<ScalingFit> {
    if t_grid.len() != mean_finals.len() {
        return Err(Error::Dimension("T grid and regrets differ in length".into()));
    }
    let mut excluded = Vec::new();
    let mut pts = Vec::new();
    for (&t, &r) in t_grid.iter().zip(mean_finals) {
        if r > 0.0 && t > 0 {
            pts.push(((t as f64).ln(), r.ln()));
        } else {
            excluded.push(t);
        }
    }
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Config(format!(
            "scaling fit needs {MIN_FIT_POINTS} points with positive regret, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("scaling fit needs distinct horizons".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(ScalingFit {
        t_grid: t_grid.to_vec(),
        mean_finals: mean_finals.to_vec(),
        half_widths: vec![0.0; t_grid.len()],
        exponent,
        intercept,
        r_squared,
        excluded,
    })
}

/// Checks that `grid` has at least four strictly increasing points with a
/// constant ratio.
pub fn check_geometric(grid: &[usize]) -> Result<()> {
    if grid.len() < MIN_FIT_POINTS {
        return Err(Error::Config(format!("T grid needs at least {MIN_FIT_POINTS} points")));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("T grid must be positive and strictly increasing".into()));
    }
    let ratio = grid[1] as f64 / grid[0] as f64;
    if grid
        .windows(2)
        .any(|w| ((w[1] as f64 / w[0] as f64) / ratio - 1.0).abs() > 0.01)
    {
        return Err(Error::Config("T grid must be geometric".into()));
    }
    Ok(())
}

/// Runs `template` at every horizon in `t_grid` and fits the regret exponent.
pub fn scaling_fit(template: &ExperimentConfig, t_grid: &[usize], parallelism: Parallelism) -> Result<ScalingFit> {
    check_geometric(t_grid)?;
    let mut means = Vec::new();
    let mut widths = Vec::new();
    for &t in t_grid {
        let cfg = ExperimentConfig {
            horizon: t,
            keep_logs: false,
            ..template.clone()
        };
        let finals: Vec<f64> = run_experiment_with(&cfg, parallelism)?
            .iter()
            .map(RunResult::final_regret)
            .collect();
        let (m, h) = mean_ci(&finals);
        means.push(m);
        widths.push(h);
    }
    let mut fit = fit_power_law(t_grid, &means)?;
    fit.half_widths = widths;
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub mean_final: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param: String,
    pub rows: Vec<SweepRow>,
    /// Row with the smallest mean final regret.
    pub best: usize,
}

/// Config used for sweep runs: `template` with `param` set and the seed moved
/// to the held-out range.
pub fn sweep_config(template: &ExperimentConfig, param: &str, value: &str) -> Result<ExperimentConfig> {
    let mut cfg = template.clone();
    cfg.set(param, value)?;
    cfg.seed = template.seed.wrapping_add(HELD_OUT_SEED_OFFSET);
    cfg.keep_logs = false;
    cfg.validate()?;
    Ok(cfg)
}

/// Final regret for every value of one configuration key, on seeds disjoint
/// from the template's.
pub fn sweep(template: &ExperimentConfig, param: &str, grid: &[String], parallelism: Parallelism) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for value in grid {
        let cfg = sweep_config(template, param, value)?;
        let finals: Vec<f64> = run_experiment_with(&cfg, parallelism)?
            .iter()
            .map(RunResult::final_regret)
            .collect();
        let (mean_final, half_width) = mean_ci(&finals);
        rows.push(SweepRow {
            value: value.clone(),
            mean_final,
            half_width,
        });
    }
    let best = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.mean_final.total_cmp(&b.1.mean_final))
        .map(|(i, _)| i)
        .expect("grid is nonempty");
    Ok(SweepResult {
        param: param.to_string(),
        rows,
        best,
    })
}
