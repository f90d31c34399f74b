//! Problem-dependent consistency: nogood closure over the lattice, the
//! solution list, and the per-step phase choice.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{AssumptionSet, MAX_ASSUMPTIONS};
use crate::transform::SimulationLimits;

/// Variable/value layout of a CSP: assumption `(v, κ)` is number
/// `values * (v - 1) + κ + 1` for `v` in `1..=variables`, `κ` in `0..values`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableStructure {
    pub variables: usize,
    pub values: usize,
}

impl VariableStructure {
    pub fn assumption_count(&self) -> usize {
        self.variables * self.values
    }

    /// 1-based assumption number for variable `v` (1-based) taking value `kappa`.
    pub fn assumption(&self, v: usize, kappa: usize) -> usize {
        debug_assert!(v >= 1 && v <= self.variables && kappa < self.values);
        self.values * (v - 1) + kappa + 1
    }

    /// `(variable, value)` of a 1-based assumption number.
    pub fn decode(&self, assumption: usize) -> (usize, usize) {
        let i = assumption - 1;
        (i / self.values + 1, i % self.values)
    }

    /// The complete assignment `v ↦ values[v - 1]`.
    pub fn assignment(&self, values: &[usize]) -> AssumptionSet {
        debug_assert_eq!(values.len(), self.variables);
        values
            .iter()
            .enumerate()
            .fold(AssumptionSet::EMPTY, |s, (v, &kappa)| s.with(self.assumption(v + 1, kappa)))
    }
}

/// A search problem: find a consistent set of `solution_size` assumptions
/// out of `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    n: usize,
    solution_size: usize,
    nogoods: Vec<AssumptionSet>,
    structure: Option<VariableStructure>,
    solution: Option<AssumptionSet>,
}

impl ProblemInstance {
    pub fn new(n: usize, solution_size: usize, nogoods: Vec<AssumptionSet>) -> Result<Self> {
        let p = ProblemInstance {
            n,
            solution_size,
            nogoods,
            structure: None,
            solution: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_structure(mut self, structure: VariableStructure) -> Result<Self> {
        self.structure = Some(structure);
        self.validate()?;
        Ok(self)
    }

    pub fn with_solution(mut self, solution: AssumptionSet) -> Result<Self> {
        self.solution = Some(solution);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedProblem(msg));
        if self.n == 0 || self.n > MAX_ASSUMPTIONS {
            return bad(format!("n = {} outside 1..={MAX_ASSUMPTIONS}", self.n));
        }
        if self.solution_size > self.n {
            return bad(format!("L = {} exceeds n = {}", self.solution_size, self.n));
        }
        for g in &self.nogoods {
            if g.is_empty() {
                return bad("empty nogood".into());
            }
            if !g.fits(self.n) {
                return bad(format!("nogood {g:?} mentions an assumption beyond n = {}", self.n));
            }
        }
        if let Some(st) = self.structure {
            if st.assumption_count() != self.n {
                return bad(format!(
                    "{} variables x {} values != n = {}",
                    st.variables, st.values, self.n
                ));
            }
        }
        if let Some(sol) = self.solution {
            if !sol.fits(self.n) || sol.len() != self.solution_size {
                return bad(format!("solution {sol:?} is not a size-{} set", self.solution_size));
            }
            if let Some(g) = self.nogoods.iter().find(|g| g.is_subset_of(sol)) {
                return bad(format!("nogood {g:?} is a subset of the solution"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `L`.
    pub fn solution_size(&self) -> usize {
        self.solution_size
    }

    pub fn nogoods(&self) -> &[AssumptionSet] {
        &self.nogoods
    }

    pub fn structure(&self) -> Option<VariableStructure> {
        self.structure
    }

    pub fn prespecified_solution(&self) -> Option<AssumptionSet> {
        self.solution
    }

    /// True when no base nogood is a subset of `s`.
    pub fn is_consistent(&self, s: AssumptionSet) -> bool {
        !self.nogoods.iter().any(|g| g.is_subset_of(s))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&InstanceFile::from(self))
            .expect("instance serialization is infallible");
        out.push('\n');
        out
    }
}

/// On-disk layout of a problem instance. Assumptions are 1-based.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    #[serde(rename = "L")]
    solution_size: usize,
    nogoods: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variables: Option<VariableStructure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solution: Option<Vec<usize>>,
}

fn to_set(items: &[usize], n: usize) -> Result<AssumptionSet> {
    if let Some(&i) = items.iter().find(|&&i| i == 0 || i > n) {
        return Err(Error::MalformedProblem(format!("assumption {i} outside 1..={n}")));
    }
    let mut seen = AssumptionSet::EMPTY;
    for &i in items {
        if seen.contains(i) {
            return Err(Error::MalformedProblem(format!("assumption {i} repeated in {items:?}")));
        }
        seen = seen.with(i);
    }
    Ok(seen)
}

impl TryFrom<InstanceFile> for ProblemInstance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        if f.n == 0 || f.n > MAX_ASSUMPTIONS {
            return Err(Error::MalformedProblem(format!("n = {} outside 1..={MAX_ASSUMPTIONS}", f.n)));
        }
        let nogoods = f
            .nogoods
            .iter()
            .map(|g| to_set(g, f.n))
            .collect::<Result<Vec<_>>>()?;
        let mut p = ProblemInstance::new(f.n, f.solution_size, nogoods)?;
        if let Some(st) = f.variables {
            p = p.with_structure(st)?;
        }
        if let Some(sol) = f.solution {
            p = p.with_solution(to_set(&sol, f.n)?)?;
        }
        Ok(p)
    }
}

impl From<&ProblemInstance> for InstanceFile {
    fn from(p: &ProblemInstance) -> Self {
        InstanceFile {
            n: p.n,
            solution_size: p.solution_size,
            nogoods: p.nogoods.iter().map(|g| g.assumptions().collect()).collect(),
            variables: p.structure,
            solution: p.solution.map(|s| s.assumptions().collect()),
        }
    }
}

/// A bitmap over lattice positions `0..2^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBitmap {
    n: usize,
    words: Vec<u64>,
}

// Bits of a word whose in-word position has bit `b` clear.
const LOW_HALF: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

impl LatticeBitmap {
    fn zeros(n: usize) -> Self {
        let words = (1usize << n).div_ceil(64);
        LatticeBitmap { n, words: vec![0; words] }
    }

    pub fn get(&self, index: usize) -> bool {
        self.words[index / 64] >> (index % 64) & 1 == 1
    }

    fn set(&mut self, index: usize) {
        self.words[index / 64] |= 1 << (index % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Marks every superset of a marked set.
    fn close_upward(&mut self) {
        for (b, &low) in LOW_HALF.iter().enumerate().take(self.n.min(6)) {
            for w in &mut self.words {
                *w |= (*w & low) << (1 << b);
            }
        }
        for b in 6..self.n {
            let stride = 1usize << (b - 6);
            for i in 0..self.words.len() {
                if i & stride != 0 {
                    self.words[i] |= self.words[i ^ stride];
                }
            }
        }
    }

    fn complement(&self) -> Self {
        let mut out = self.clone();
        let len = 1usize << self.n;
        for w in &mut out.words {
            *w = !*w;
        }
        if len < 64 {
            out.words[0] &= (1u64 << len) - 1;
        }
        out
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Good/nogood status of every set plus the solutions.
#[derive(Clone, Debug)]
pub struct ConsistencyMap {
    n: usize,
    solution_size: usize,
    good: LatticeBitmap,
    solution_bits: LatticeBitmap,
    solutions: Vec<AssumptionSet>,
}

impl ConsistencyMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solution_size(&self) -> usize {
        self.solution_size
    }

    pub fn is_good(&self, s: AssumptionSet) -> bool {
        self.good.get(s.index())
    }

    pub fn is_solution(&self, s: AssumptionSet) -> bool {
        self.solution_bits.get(s.index())
    }

    pub fn good(&self) -> &LatticeBitmap {
        &self.good
    }

    /// Solutions in lattice order.
    pub fn solutions(&self) -> &[AssumptionSet] {
        &self.solutions
    }

    pub fn good_count(&self) -> usize {
        self.good.count_ones()
    }
}

/// Computes the good/nogood status of all `2^n` sets in `O(n 2^n)`.
pub fn close_nogoods(problem: &ProblemInstance, limits: &SimulationLimits) -> Result<ConsistencyMap> {
    let n = problem.n;
    limits.check(n)?;
    let mut bad = LatticeBitmap::zeros(n);
    for g in &problem.nogoods {
        if !g.fits(n) {
            return Err(Error::MalformedProblem(format!("nogood {g:?} beyond n = {n}")));
        }
        bad.set(g.index());
    }
    bad.close_upward();
    let good = bad.complement();

    let l = problem.solution_size;
    let mut solution_bits = LatticeBitmap::zeros(n);
    let mut solutions = Vec::new();
    for s in sets_of_size(n, l) {
        if good.get(s as usize) {
            solution_bits.set(s as usize);
            solutions.push(AssumptionSet::from_bits(s));
        }
    }
    Ok(ConsistencyMap {
        n,
        solution_size: l,
        good,
        solution_bits,
        solutions,
    })
}

/// Masks of `k`-subsets of `n` bits in increasing order.
pub fn sets_of_size(n: usize, k: usize) -> impl Iterator<Item = u64> {
    assert!(n < 64);
    let limit = 1u64 << n;
    let first = if k > n { limit } else { (1u64 << k) - 1 };
    let mut next = Some(first);
    std::iter::from_fn(move || {
        let cur = next?;
        if cur >= limit {
            next = None;
            return None;
        }
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack.
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur)
    })
}

/// All pairs assigning two different values to one variable.
pub fn necessary_nogoods(variables: usize, values: usize) -> Vec<AssumptionSet> {
    let st = VariableStructure { variables, values };
    let mut out = Vec::with_capacity(variables * values * values.saturating_sub(1) / 2);
    for v in 1..=variables {
        for a in 0..values {
            for b in a + 1..values {
                out.push(AssumptionSet::EMPTY.with(st.assumption(v, a)).with(st.assumption(v, b)));
            }
        }
    }
    out
}

/// How each step chooses which sets get a phase inversion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhasePolicy {
    /// Invert nogoods and, at step `j`, goods smaller than `min(L, j - 1)`.
    #[default]
    Staged,
    /// Invert nogoods only.
    NogoodOnly,
}

impl PhasePolicy {
    /// Goods below this size are inverted at step `j` (1-based).
    pub fn size_threshold(self, step: usize, solution_size: usize) -> usize {
        match self {
            PhasePolicy::Staged => solution_size.min(step.saturating_sub(1)),
            PhasePolicy::NogoodOnly => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PhasePolicy::Staged => "staged",
            PhasePolicy::NogoodOnly => "nogood-only",
        }
    }
}

impl fmt::Display for PhasePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhasePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "staged" => Ok(PhasePolicy::Staged),
            "nogood-only" => Ok(PhasePolicy::NogoodOnly),
            other => Err(Error::InvalidParameter(format!(
                "unknown policy {other:?} (expected staged or nogood-only)"
            ))),
        }
    }
}

/// Per-set phases `ρ_s` for step `j`.
pub fn phase_vector(
    consistency: &ConsistencyMap,
    policy: PhasePolicy,
    step: usize,
    solution_size: usize,
) -> Vec<i8> {
    let threshold = policy.size_threshold(step, solution_size);
    (0..1usize << consistency.n)
        .map(|i| {
            if !consistency.good.get(i) || (i.count_ones() as usize) < threshold {
                -1
            } else {
                1
            }
        })
        .collect()
}

/// Multiplies `amp` by the step's phases without materializing them.
pub(crate) fn apply_phases(
    amp: &mut [f64],
    consistency: &ConsistencyMap,
    policy: PhasePolicy,
    step: usize,
) {
    let threshold = policy.size_threshold(step, consistency.solution_size) as u32;
    for (w, (chunk, &word)) in amp.chunks_mut(64).zip(consistency.good.words()).enumerate() {
        for (bit, a) in chunk.iter_mut().enumerate() {
            let good = word >> bit & 1 == 1;
            if !good || ((w * 64 + bit).count_ones()) < threshold {
                *a = -*a;
            }
        }
    }
}

pub fn solution_count(consistency: &ConsistencyMap) -> usize {
    consistency.solutions.len()
}
