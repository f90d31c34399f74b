//! The search iteration on the full lattice.
//!
//! Step `j` multiplies every amplitude by its phase `ρ_s` and then applies
//! `U`. The record keeps the solution probability after every step, so the
//! best stopping point `J* = argmin_j j / P_soln(j)` comes from a single run.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{apply_phases, close_nogoods, ConsistencyMap, PhasePolicy, ProblemInstance};
use crate::transform::{apply_u_in_place, DiagonalSigns, StateVector};

pub use crate::transform::SimulationLimits;

/// Largest tolerated `|‖ψ‖² - 1|` after any step.
pub const NORM_TOLERANCE: f64 = 1e-10;

// Above this many terms, sums over the lattice use compensated summation.
const KAHAN_THRESHOLD: usize = 1 << 16;

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    /// Steps executed, `J`.
    pub steps: usize,
    /// `P_soln` after step `j`, for `j = 0..=J`; entry 0 is the initial state.
    pub p_soln: Vec<f64>,
    /// Per step, per set size: probability held by goods of that size.
    pub level_profile: Option<Vec<Vec<f64>>>,
    /// Largest `|‖ψ‖² - 1|` seen over all steps.
    pub max_norm_error: f64,
    /// Step count minimizing `j / P_soln(j)`, if any step had solution amplitude.
    pub chosen_steps: Option<usize>,
    /// Expected cost `C = J* / P_soln(J*)`.
    pub cost: Option<f64>,
}

impl RunRecord {
    pub(crate) fn finish(
        steps: usize,
        p_soln: Vec<f64>,
        level_profile: Option<Vec<Vec<f64>>>,
        max_norm_error: f64,
    ) -> Self {
        let best = best_cost(&p_soln);
        RunRecord {
            steps,
            p_soln,
            level_profile,
            max_norm_error,
            chosen_steps: best.map(|b| b.0),
            cost: best.map(|b| b.1),
        }
    }

    /// `j / P_soln(j)`, or `None` when the step had no solution amplitude.
    pub fn cost_at(&self, step: usize) -> Option<f64> {
        let p = *self.p_soln.get(step)?;
        (step > 0 && p > 0.0).then(|| step as f64 / p)
    }

    /// `(J*, C)` or [`Error::NoSolutionAmplitude`].
    pub fn best(&self) -> Result<(usize, f64)> {
        match (self.chosen_steps, self.cost) {
            (Some(j), Some(c)) => Ok((j, c)),
            _ => Err(Error::NoSolutionAmplitude),
        }
    }
}

/// Smallest-`j` minimizer of `j / p[j]` over `j >= 1` with `p[j] > 0`.
pub fn best_cost(p_soln: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &p) in p_soln.iter().enumerate().skip(1) {
        if p <= 0.0 {
            continue;
        }
        let c = j as f64 / p;
        if best.is_none_or(|(_, b)| c < b) {
            best = Some((j, c));
        }
    }
    best
}

/// A problem with its consistency map, ready for repeated trials.
#[derive(Clone, Debug)]
pub struct Simulator {
    consistency: ConsistencyMap,
    signs: DiagonalSigns,
}

impl Simulator {
    pub fn new(problem: &ProblemInstance, limits: &SimulationLimits) -> Result<Self> {
        Ok(Self::from_consistency(close_nogoods(problem, limits)?))
    }

    pub fn from_consistency(consistency: ConsistencyMap) -> Self {
        let signs = DiagonalSigns::new(consistency.n());
        Simulator { consistency, signs }
    }

    pub fn consistency(&self) -> &ConsistencyMap {
        &self.consistency
    }

    /// Runs `steps` steps from the empty set and returns the final state.
    /// `observe` sees the state after each step (and at step 0).
    pub fn evolve<F>(&self, steps: usize, policy: PhasePolicy, mut observe: F) -> Result<StateVector>
    where
        F: FnMut(usize, &StateVector),
    {
        let mut state = StateVector::basis(self.consistency.n(), 0);
        observe(0, &state);
        for j in 1..=steps {
            apply_phases(state.amplitudes_mut(), &self.consistency, policy, j);
            apply_u_in_place(state.amplitudes_mut(), &self.signs);
            let deviation = (sum_squares(state.amplitudes()) - 1.0).abs();
            if !(deviation < NORM_TOLERANCE) {
                return Err(Error::NormDrift { step: j, deviation });
            }
            observe(j, &state);
        }
        Ok(state)
    }

    pub fn run(&self, steps: usize, policy: PhasePolicy, profile: bool) -> Result<RunRecord> {
        let mut p_soln = Vec::with_capacity(steps + 1);
        let mut levels = profile.then(|| Vec::with_capacity(steps + 1));
        let mut max_norm_error = 0.0f64;
        self.evolve(steps, policy, |_, state| {
            p_soln.push(solution_probability(state, &self.consistency));
            max_norm_error = max_norm_error.max((sum_squares(state.amplitudes()) - 1.0).abs());
            if let Some(levels) = levels.as_mut() {
                levels.push(level_profile(state, &self.consistency));
            }
        })?;
        Ok(RunRecord::finish(steps, p_soln, levels, max_norm_error))
    }
}

/// One trial of `steps` steps under the default size cap.
pub fn run_trial(problem: &ProblemInstance, steps: usize, policy: PhasePolicy) -> Result<RunRecord> {
    Simulator::new(problem, &SimulationLimits::default())?.run(steps, policy, false)
}

/// Best step count up to `max_steps` and its expected cost.
pub fn optimal_steps(
    problem: &ProblemInstance,
    max_steps: usize,
    policy: PhasePolicy,
) -> Result<(usize, f64)> {
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
    }
    run_trial(problem, max_steps, policy)?.best()
}

/// `Σ_{s ∈ solutions} ψ_s²`.
pub fn solution_probability(state: &StateVector, consistency: &ConsistencyMap) -> f64 {
    let amp = state.amplitudes();
    let terms = consistency.solutions().iter().map(|s| {
        let a = amp[s.index()];
        a * a
    });
    if consistency.solutions().len() > KAHAN_THRESHOLD {
        kahan_sum(terms)
    } else {
        terms.sum()
    }
}

/// For each size `k`, the probability held by goods of size `k`.
pub fn level_profile(state: &StateVector, consistency: &ConsistencyMap) -> Vec<f64> {
    let n = consistency.n();
    let mut out = vec![0.0; n + 1];
    for (i, a) in state.amplitudes().iter().enumerate() {
        if consistency.good().get(i) {
            out[i.count_ones() as usize] += a * a;
        }
    }
    out
}

/// Probability held by nogoods.
pub fn nogood_probability(state: &StateVector, consistency: &ConsistencyMap) -> f64 {
    let terms = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| !consistency.good().get(*i))
        .map(|(_, a)| a * a);
    kahan_sum(terms)
}

fn sum_squares(amp: &[f64]) -> f64 {
    let terms = amp.iter().map(|a| a * a);
    if amp.len() > KAHAN_THRESHOLD {
        kahan_sum(terms)
    } else {
        terms.sum()
    }
}

pub(crate) fn kahan_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for t in terms {
        let y = t - c;
        let s = sum + y;
        c = (s - sum) - y;
        sum = s;
    }
    sum
}
