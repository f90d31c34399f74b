//! Ensemble sweeps: search cost against constraint density, against
//! problem size, for the extreme problems, and relative to the
//! unstructured-search scaling `√(N_L / S)`.
//!
//! Every sweep returns a table with a fixed CSV header. Instances of one
//! sweep point run on the rayon pool; results are collected in instance
//! order before any reduction, so tables are identical for any thread count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::Simulator;
use crate::error::{Error, Result};
use crate::lattice::binomial_f64;
use crate::oracle::{solution_count, PhasePolicy};
use crate::problems::{gen_random_csp, m_max, EnsembleSpec, ExtremeKind};
use crate::reduced::{MaxSimulator, MinSimulator};
use crate::transform::SimulationLimits;

pub const DEFAULT_INSTANCES: usize = 200;

/// Settings shared by the ensemble sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub instances: usize,
    pub policy: PhasePolicy,
    pub seed: u64,
    pub limits: SimulationLimits,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            instances: DEFAULT_INSTANCES,
            policy: PhasePolicy::Staged,
            seed: 1,
            limits: SimulationLimits::default(),
        }
    }
}

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanStderr {
    /// Sample standard deviation over `√count`; zero for fewer than two values.
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return MeanStderr { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        if count < 2 {
            return MeanStderr { mean, stderr: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64;
        MeanStderr { mean, stderr: (var / count as f64).sqrt() }
    }
}

/// `m = round(α n)`, ties to even.
pub fn constraint_count(alpha: f64, n: usize) -> usize {
    (alpha * n as f64).round_ties_even().max(0.0) as usize
}

/// `min, min + step, ...` up to `max` inclusive, each value rounded to
/// 12 decimals so grids print cleanly.
pub fn alpha_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= min) || min < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha grid needs 0 <= min <= max and step > 0 (got {min}, {max}, {step})"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Result of one random instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InstanceOutcome {
    pub index: u64,
    pub steps: usize,
    pub cost: f64,
    pub p_soln: f64,
    pub solutions: usize,
}

/// Generates instance `index` and finds its best step count up to `L`.
pub fn evaluate_instance(spec: &EnsembleSpec, index: u64, cfg: &SweepConfig) -> Result<InstanceOutcome> {
    let problem = gen_random_csp(spec, index)?;
    let sim = Simulator::new(&problem, &cfg.limits)?;
    let l = problem.solution_size();
    let record = sim.run(l.max(1), cfg.policy, false)?;
    let (steps, cost) = record.best()?;
    Ok(InstanceOutcome {
        index,
        steps,
        cost,
        p_soln: record.p_soln[steps],
        solutions: solution_count(sim.consistency()),
    })
}

/// Evaluates every instance of the ensemble, in instance order.
pub fn evaluate_ensemble(spec: &EnsembleSpec, cfg: &SweepConfig) -> Result<Vec<InstanceOutcome>> {
    cfg.limits.check(spec.n)?;
    (0..spec.instances as u64)
        .into_par_iter()
        .map(|k| evaluate_instance(spec, k, cfg))
        .collect()
}

/// Which ensemble a row was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Density {
    /// `m = round(α n)`.
    Alpha(f64),
    /// `m = 0`: only the necessary nogoods.
    Unconstrained,
    /// `m = m_max`: a single solution.
    FullyConstrained,
}

impl Density {
    pub fn constraint_count(self, n: usize) -> usize {
        match self {
            Density::Alpha(a) => constraint_count(a, n),
            Density::Unconstrained => 0,
            Density::FullyConstrained => m_max(n / 2),
        }
    }

    pub fn label(self) -> String {
        match self {
            Density::Alpha(a) => format!("alpha={a}"),
            Density::Unconstrained => "m=0".into(),
            Density::FullyConstrained => "m=m_max".into(),
        }
    }
}

/// One aggregated sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    /// Requested density, e.g. `alpha=1.25` or `m=0`.
    pub ensemble: String,
    /// `m / n` after rounding `m`.
    pub alpha_realized: f64,
    pub n: usize,
    pub m: usize,
    pub instances: usize,
    pub cost: MeanStderr,
    pub solutions: MeanStderr,
    /// `P_soln` at each instance's best step count.
    pub p_soln: MeanStderr,
    pub steps: MeanStderr,
    /// `C / √(N_L / S)`; present in ratio sweeps.
    pub ratio: Option<MeanStderr>,
    pub policy: PhasePolicy,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Transition,
    Scaling,
    Ratio,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn csv_header(kind: SweepKind) -> &'static str {
        match kind {
            SweepKind::Transition | SweepKind::Scaling => {
                "ensemble,alpha_realized,n,m,instances,mean_cost,stderr_cost,mean_solutions,stderr_solutions,mean_p_soln,stderr_p_soln,mean_steps,stderr_steps,policy,seed"
            }
            SweepKind::Ratio => {
                "ensemble,alpha_realized,n,m,instances,mean_ratio,stderr_ratio,mean_cost,stderr_cost,mean_solutions,stderr_solutions,policy,seed"
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(Self::csv_header(self.kind));
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{},{},{},", r.ensemble, r.alpha_realized, r.n, r.m, r.instances);
            match self.kind {
                SweepKind::Transition | SweepKind::Scaling => {
                    let _ = write!(
                        out,
                        "{},{},{},{},{},{},{},{},",
                        r.cost.mean,
                        r.cost.stderr,
                        r.solutions.mean,
                        r.solutions.stderr,
                        r.p_soln.mean,
                        r.p_soln.stderr,
                        r.steps.mean,
                        r.steps.stderr
                    );
                }
                SweepKind::Ratio => {
                    let ratio = r.ratio.unwrap_or(MeanStderr { mean: f64::NAN, stderr: f64::NAN });
                    let _ = write!(
                        out,
                        "{},{},{},{},{},{},",
                        ratio.mean, ratio.stderr, r.cost.mean, r.cost.stderr, r.solutions.mean, r.solutions.stderr
                    );
                }
            }
            let _ = writeln!(out, "{},{}", r.policy, r.seed);
        }
        out
    }
}

fn aggregate(
    density: Density,
    spec: &EnsembleSpec,
    cfg: &SweepConfig,
    outcomes: &[InstanceOutcome],
    with_ratio: bool,
) -> SweepRow {
    let col = |f: fn(&InstanceOutcome) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
    let ratio = with_ratio.then(|| {
        let complete = binomial_f64(spec.n, spec.solution_size());
        let ratios: Vec<f64> = outcomes
            .iter()
            .map(|o| o.cost / (complete / o.solutions as f64).sqrt())
            .collect();
        MeanStderr::of(&ratios)
    });
    SweepRow {
        ensemble: density.label(),
        alpha_realized: spec.alpha(),
        n: spec.n,
        m: spec.m,
        instances: outcomes.len(),
        cost: MeanStderr::of(&col(|o| o.cost)),
        solutions: MeanStderr::of(&col(|o| o.solutions as f64)),
        p_soln: MeanStderr::of(&col(|o| o.p_soln)),
        steps: MeanStderr::of(&col(|o| o.steps as f64)),
        ratio,
        policy: cfg.policy,
        seed: cfg.seed,
    }
}

fn sweep_point(density: Density, n: usize, cfg: &SweepConfig, with_ratio: bool) -> Result<SweepRow> {
    let spec = EnsembleSpec::new(n, density.constraint_count(n), cfg.instances, cfg.seed)?;
    let outcomes = evaluate_ensemble(&spec, cfg)?;
    Ok(aggregate(density, &spec, cfg, &outcomes, with_ratio))
}

/// Mean cost against `α = m / n` at fixed `n`. Grid points whose `m`
/// exceeds `m_max` are skipped with a warning.
pub fn transition_sweep(n: usize, alphas: &[f64], cfg: &SweepConfig) -> Result<SweepResult> {
    if n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("n must be even, got {n}")));
    }
    cfg.limits.check(n)?;
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let m = constraint_count(alpha, n);
        if m > m_max(n / 2) {
            log::warn!("skipping alpha = {alpha}: m = {m} exceeds m_max = {}", m_max(n / 2));
            continue;
        }
        rows.push(sweep_point(Density::Alpha(alpha), n, cfg, false)?);
    }
    Ok(SweepResult { kind: SweepKind::Transition, rows })
}

/// Mean cost against `n` for one ensemble density.
pub fn scaling_sweep(density: Density, ns: &[usize], cfg: &SweepConfig) -> Result<SweepResult> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        cfg.limits.check(n)?;
        let m = density.constraint_count(n);
        if m > m_max(n / 2) {
            log::warn!("skipping n = {n}: m = {m} exceeds m_max = {}", m_max(n / 2));
            continue;
        }
        rows.push(sweep_point(density, n, cfg, false)?);
    }
    Ok(SweepResult { kind: SweepKind::Scaling, rows })
}

/// Mean of `C / √(N_L / S)` against `n`, with `N_L = C(n, L)` and `S` the
/// exact solution count of each instance.
pub fn unstructured_ratio(density: Density, ns: &[usize], cfg: &SweepConfig) -> Result<SweepResult> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        cfg.limits.check(n)?;
        let m = density.constraint_count(n);
        if m > m_max(n / 2) {
            log::warn!("skipping n = {n}: m = {m} exceeds m_max = {}", m_max(n / 2));
            continue;
        }
        rows.push(sweep_point(density, n, cfg, true)?);
    }
    Ok(SweepResult { kind: SweepKind::Ratio, rows })
}

/// Best step count and cost of one extreme problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremeRow {
    pub kind: ExtremeKind,
    pub n: usize,
    pub l: usize,
    pub policy: PhasePolicy,
    pub steps: usize,
    pub cost: f64,
    pub p_soln: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremeCurve {
    pub rows: Vec<ExtremeRow>,
}

impl ExtremeCurve {
    pub const CSV_HEADER: &'static str = "kind,n,L,policy,steps,cost,p_soln";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{},{}", r.kind, r.n, r.l, r.policy, r.steps, r.cost, r.p_soln);
        }
        out
    }

    pub fn of_kind(&self, kind: ExtremeKind) -> impl Iterator<Item = &ExtremeRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }
}

/// Cost of one extreme problem with `L = n/2`, trying every `J <= L`.
pub fn extreme_point(kind: ExtremeKind, n: usize, policy: PhasePolicy) -> Result<ExtremeRow> {
    let l = n / 2;
    let record = match kind {
        ExtremeKind::Min => MinSimulator::new(n)?.run(l, l.max(1), policy)?,
        ExtremeKind::Max => MaxSimulator::new(n, l)?.run(l.max(1), policy)?,
    };
    let (steps, cost) = record.best()?;
    Ok(ExtremeRow { kind, n, l, policy, steps, cost, p_soln: record.p_soln[steps] })
}

/// Both extreme problems for every `n`, with the reduced simulators.
pub fn extreme_cost_curve(ns: &[usize], policy: PhasePolicy) -> Result<ExtremeCurve> {
    if let Some(&n) = ns.iter().find(|&&n| n % 2 != 0 || n < 2) {
        return Err(Error::InvalidParameter(format!("extreme curve needs even n >= 2, got {n}")));
    }
    let jobs: Vec<(ExtremeKind, usize)> = [ExtremeKind::Min, ExtremeKind::Max]
        .into_iter()
        .flat_map(|k| ns.iter().map(move |&n| (k, n)))
        .collect();
    let rows = jobs
        .into_par_iter()
        .map(|(kind, n)| extreme_point(kind, n, policy))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtremeCurve { rows })
}

/// Sidecar describing how a table was produced.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub command: String,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub policy: PhasePolicy,
    pub instances: Option<usize>,
    pub threads: usize,
    pub wall_time_secs: f64,
}

impl RunMetadata {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serialization is infallible") + "\n"
    }
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
