//! Problem generation and encoding.
//!
//! Random ensembles are binary CSPs with `L = n/2` variables and `m`
//! constraint nogoods of size 2, built around a prespecified solution so
//! every instance is soluble. Instance `k` of an ensemble with seed `s` is
//! drawn from ChaCha20 seeded with `s` on stream `k`, so instances can be
//! generated independently and in parallel.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{AssumptionSet, MAX_ASSUMPTIONS};
use crate::oracle::{necessary_nogoods, sets_of_size, ProblemInstance, VariableStructure};
use crate::transform::{SimulationLimits, HARD_MAX_N};

/// Largest complete-assignment space enumerated by the brute-force counter.
pub const BRUTE_FORCE_LIMIT: u64 = 1 << 24;

/// Largest number of constraint nogoods for a soluble binary CSP with `L`
/// variables: every variable pair has four assignments, one of which is in
/// the prespecified solution.
pub fn m_max(l: usize) -> usize {
    3 * l * l.saturating_sub(1) / 2
}

/// An ensemble of random soluble binary CSPs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub m: usize,
    pub instances: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(n: usize, m: usize, instances: usize, seed: u64) -> Result<Self> {
        let spec = EnsembleSpec { n, m, instances, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn solution_size(&self) -> usize {
        self.n / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 || self.n > MAX_ASSUMPTIONS {
            return Err(Error::InvalidParameter(format!(
                "ensemble n must be even and in 2..={MAX_ASSUMPTIONS}, got {}",
                self.n
            )));
        }
        let max = m_max(self.solution_size());
        if self.m > max {
            return Err(Error::InfeasibleSpec { m: self.m, m_max: max });
        }
        Ok(())
    }

    /// `α = m / n`.
    pub fn alpha(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

/// The random stream for instance `index` of an ensemble.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Instance `index` of the ensemble.
///
/// 1. Draw the solution's value for each variable uniformly.
/// 2. Draw `m` distinct positions, uniformly without replacement, in the
///    lexicographic list of size-2 assignments that are not subsets of the
///    solution.
/// 3. Add the necessary nogoods.
pub fn gen_random_csp(spec: &EnsembleSpec, index: u64) -> Result<ProblemInstance> {
    spec.validate()?;
    let l = spec.solution_size();
    let structure = VariableStructure { variables: l, values: 2 };
    let mut rng = instance_rng(spec.seed, index);

    let values: Vec<usize> = (0..l).map(|_| rng.gen_range(0..2)).collect();
    let solution = structure.assignment(&values);

    let pool = eligible_pairs(structure, solution);
    debug_assert_eq!(pool.len(), m_max(l));
    let mut picks = index::sample(&mut rng, pool.len(), spec.m).into_vec();
    picks.sort_unstable();

    let mut nogoods = necessary_nogoods(l, 2);
    nogoods.extend(picks.into_iter().map(|i| pool[i]));
    ProblemInstance::new(spec.n, l, nogoods)?
        .with_structure(structure)?
        .with_solution(solution)
}

/// Size-2 assignments (two different variables) not contained in `solution`,
/// ordered lexicographically by assumption number.
pub fn eligible_pairs(structure: VariableStructure, solution: AssumptionSet) -> Vec<AssumptionSet> {
    let n = structure.assumption_count();
    let mut out = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if structure.decode(a).0 == structure.decode(b).0 {
                continue;
            }
            if solution.contains(a) && solution.contains(b) {
                continue;
            }
            out.push(AssumptionSet::EMPTY.with(a).with(b));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremeKind {
    /// Goods are exactly the sets of size `<= L`.
    Min,
    /// Goods are exactly the subsets of `{1, ..., L}`.
    Max,
}

impl ExtremeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtremeKind::Min => "min",
            ExtremeKind::Max => "max",
        }
    }
}

impl std::fmt::Display for ExtremeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExtremeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(ExtremeKind::Min),
            "max" => Ok(ExtremeKind::Max),
            other => Err(Error::InvalidParameter(format!("unknown kind {other:?} (expected min or max)"))),
        }
    }
}

/// The minimum- or maximum-nogood problem as an explicit instance.
///
/// The min problem lists every set of size `L + 1`; the max problem lists
/// the singletons outside `{1, ..., L}`, which already make every other
/// non-subset of the solution nogood.
pub fn extreme_problem(kind: ExtremeKind, n: usize, l: usize) -> Result<ProblemInstance> {
    if n > HARD_MAX_N {
        return Err(Error::CapExceeded { n, cap: HARD_MAX_N });
    }
    if l > n {
        return Err(Error::InvalidParameter(format!("L = {l} exceeds n = {n}")));
    }
    match kind {
        ExtremeKind::Min => {
            let nogoods = sets_of_size(n, l + 1).map(AssumptionSet::from_bits).collect();
            ProblemInstance::new(n, l, nogoods)
        }
        ExtremeKind::Max => {
            let nogoods = (l + 1..=n)
                .map(|i| AssumptionSet::EMPTY.with(i))
                .collect();
            ProblemInstance::new(n, l, nogoods)?.with_solution(AssumptionSet::prefix(l))
        }
    }
}

/// Graph coloring with `colors` colors: each edge forbids both endpoints
/// taking the same color.
pub fn encode_graph_coloring(
    edges: &[(usize, usize)],
    nodes: usize,
    colors: usize,
) -> Result<ProblemInstance> {
    if nodes == 0 || colors == 0 {
        return Err(Error::MalformedGraph("need at least one node and one color".into()));
    }
    if nodes * colors > MAX_ASSUMPTIONS {
        return Err(Error::MalformedGraph(format!(
            "{nodes} nodes x {colors} colors exceeds {MAX_ASSUMPTIONS} assumptions"
        )));
    }
    let structure = VariableStructure { variables: nodes, values: colors };
    let mut seen = std::collections::HashSet::new();
    let mut nogoods = necessary_nogoods(nodes, colors);
    for &(u, v) in edges {
        if u == v {
            return Err(Error::MalformedGraph(format!("self-loop at node {u}")));
        }
        if u == 0 || v == 0 || u > nodes || v > nodes {
            return Err(Error::MalformedGraph(format!("edge ({u}, {v}) outside nodes 1..={nodes}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::MalformedGraph(format!("duplicate edge ({u}, {v})")));
        }
        for kappa in 0..colors {
            nogoods.push(
                AssumptionSet::EMPTY
                    .with(structure.assumption(u, kappa))
                    .with(structure.assumption(v, kappa)),
            );
        }
    }
    ProblemInstance::new(nodes * colors, nodes, nogoods)?.with_structure(structure)
}

/// A 3-SAT clause as signed 1-based variable references (`-3` is `¬V₃`).
pub type Clause = [i64; 3];

/// Value index of `false`/`true` in the boolean variable structure.
pub const FALSE: usize = 0;
pub const TRUE: usize = 1;

/// 3-SAT: each clause contributes the single size-3 assignment falsifying it.
pub fn encode_3sat(clauses: &[Clause], variables: usize) -> Result<ProblemInstance> {
    if variables == 0 || 2 * variables > MAX_ASSUMPTIONS {
        return Err(Error::MalformedClause(format!(
            "variable count {variables} outside 1..={}",
            MAX_ASSUMPTIONS / 2
        )));
    }
    let structure = VariableStructure { variables, values: 2 };
    let mut nogoods = necessary_nogoods(variables, 2);
    for clause in clauses {
        let mut vars = [0usize; 3];
        for (slot, &lit) in vars.iter_mut().zip(clause) {
            let v = lit.unsigned_abs() as usize;
            if lit == 0 || v > variables {
                return Err(Error::MalformedClause(format!(
                    "literal {lit} in {clause:?} outside variables 1..={variables}"
                )));
            }
            *slot = v;
        }
        if vars[0] == vars[1] || vars[0] == vars[2] || vars[1] == vars[2] {
            return Err(Error::MalformedClause(format!("repeated variable in {clause:?}")));
        }
        let nogood = clause.iter().fold(AssumptionSet::EMPTY, |s, &lit| {
            let falsifying = if lit > 0 { FALSE } else { TRUE };
            s.with(structure.assumption(lit.unsigned_abs() as usize, falsifying))
        });
        nogoods.push(nogood);
    }
    ProblemInstance::new(2 * variables, variables, nogoods)?.with_structure(structure)
}

/// Solutions found by testing candidates directly against the base
/// nogoods, without the lattice closure. Structured problems enumerate
/// complete assignments; others enumerate all sets of size `L`.
pub fn enumerate_solutions_bruteforce(problem: &ProblemInstance) -> Result<Vec<AssumptionSet>> {
    let mut out = match problem.structure() {
        Some(st) => {
            let space = (st.values as u64).checked_pow(st.variables as u32);
            if space.is_none_or(|s| s > BRUTE_FORCE_LIMIT) {
                return Err(Error::SearchSpaceTooLarge(format!(
                    "{}^{} complete assignments",
                    st.values, st.variables
                )));
            }
            let mut values = vec![0usize; st.variables];
            let mut found = Vec::new();
            loop {
                let s = st.assignment(&values);
                if problem.is_consistent(s) {
                    found.push(s);
                }
                // Odometer increment.
                let mut v = 0;
                while v < st.variables {
                    values[v] += 1;
                    if values[v] < st.values {
                        break;
                    }
                    values[v] = 0;
                    v += 1;
                }
                if v == st.variables {
                    break;
                }
            }
            found
        }
        None => {
            SimulationLimits::default().check(problem.n()).map_err(|_| {
                Error::SearchSpaceTooLarge(format!("all size-{} subsets of n = {}", problem.solution_size(), problem.n()))
            })?;
            sets_of_size(problem.n(), problem.solution_size())
                .map(AssumptionSet::from_bits)
                .filter(|&s| problem.is_consistent(s))
                .collect()
        }
    };
    out.sort_unstable();
    Ok(out)
}

pub fn count_solutions_bruteforce(problem: &ProblemInstance) -> Result<usize> {
    enumerate_solutions_bruteforce(problem).map(|s| s.len())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
}

/// Parses an edge list: one `u v` pair of 1-based node numbers per line,
/// `#` starts a comment. Returns the edges and the largest node number.
pub fn parse_edge_list(text: &str) -> Result<(Vec<(usize, usize)>, usize)> {
    let mut edges = Vec::new();
    let mut max_node = 0;
    for (lineno, line) in content_lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed: Option<Vec<usize>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed.as_deref() {
            Some(&[u, v]) => {
                max_node = max_node.max(u).max(v);
                edges.push((u, v));
            }
            _ => return Err(Error::MalformedGraph(format!("line {lineno}: expected `u v`, got {line:?}"))),
        }
    }
    Ok((edges, max_node))
}

/// Parses a clause list: three signed variable numbers per line with an
/// optional trailing `0`. Lines starting with `c` or `p` (DIMACS headers)
/// and `#` comments are skipped. Returns the clauses and the largest
/// variable number.
pub fn parse_clause_list(text: &str) -> Result<(Vec<Clause>, usize)> {
    let mut clauses = Vec::new();
    let mut max_var = 0;
    for (lineno, line) in content_lines(text) {
        if line.starts_with('c') || line.starts_with('p') {
            continue;
        }
        let mut lits: Vec<i64> = line
            .split_whitespace()
            .map(|f| f.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::MalformedClause(format!("line {lineno}: {e}")))?;
        if lits.last() == Some(&0) {
            lits.pop();
        }
        let clause: Clause = lits
            .as_slice()
            .try_into()
            .map_err(|_| Error::MalformedClause(format!("line {lineno}: expected 3 literals, got {line:?}")))?;
        max_var = clause.iter().map(|l| l.unsigned_abs() as usize).fold(max_var, usize::max);
        clauses.push(clause);
    }
    Ok((clauses, max_var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{close_nogoods, solution_count};

    fn set(items: &[usize]) -> AssumptionSet {
        AssumptionSet::from_assumptions(items.iter().copied()).unwrap()
    }

    #[test]
    fn m_max_values() {
        assert_eq!(m_max(6), 45);
        assert_eq!(m_max(1), 0);
        assert_eq!(m_max(8), 84);
        assert_eq!(m_max(8) as f64 / 16.0, 5.25);
    }

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::new(16, 84, 1, 0).is_ok());
        assert!(matches!(
            EnsembleSpec::new(16, 85, 1, 0),
            Err(Error::InfeasibleSpec { m: 85, m_max: 84 })
        ));
        assert!(EnsembleSpec::new(15, 0, 1, 0).is_err());
    }

    #[test]
    fn pool_size() {
        for l in 1..=8 {
            let st = VariableStructure { variables: l, values: 2 };
            let sol = st.assignment(&vec![1; l]);
            assert_eq!(eligible_pairs(st, sol).len(), 4 * l * (l.max(1) - 1) / 2 - l * (l.max(1) - 1) / 2);
        }
    }

    #[test]
    fn unconstrained_ensemble() {
        let spec = EnsembleSpec::new(10, 0, 1, 7).unwrap();
        let p = gen_random_csp(&spec, 0).unwrap();
        assert_eq!(p.nogoods(), necessary_nogoods(5, 2).as_slice());
        assert_eq!(count_solutions_bruteforce(&p).unwrap(), 32);
    }

    #[test]
    fn fully_constrained_ensemble_has_one_solution() {
        let spec = EnsembleSpec::new(12, m_max(6), 1, 3).unwrap();
        for k in 0..5 {
            let p = gen_random_csp(&spec, k).unwrap();
            let sols = enumerate_solutions_bruteforce(&p).unwrap();
            assert_eq!(sols, vec![p.prespecified_solution().unwrap()]);
        }
    }

    #[test]
    fn generation_is_deterministic_per_stream() {
        let spec = EnsembleSpec::new(16, 20, 4, 42).unwrap();
        assert_eq!(gen_random_csp(&spec, 3).unwrap(), gen_random_csp(&spec, 3).unwrap());
        assert_ne!(gen_random_csp(&spec, 3).unwrap(), gen_random_csp(&spec, 2).unwrap());
    }

    #[test]
    fn extreme_problems_small() {
        let max = extreme_problem(ExtremeKind::Max, 4, 2).unwrap();
        let c = close_nogoods(&max, &SimulationLimits::default()).unwrap();
        let goods: Vec<usize> = (0..16).filter(|&i| c.good().get(i)).collect();
        assert_eq!(goods, vec![0, 1, 2, 3]);
        assert_eq!(solution_count(&c), 1);

        let min = extreme_problem(ExtremeKind::Min, 4, 2).unwrap();
        let c = close_nogoods(&min, &SimulationLimits::default()).unwrap();
        let nogoods: Vec<usize> = (0..16).filter(|&i| !c.good().get(i)).collect();
        assert_eq!(nogoods.len(), 5);
        assert!(nogoods.iter().all(|i| i.count_ones() >= 3));
        assert_eq!(solution_count(&c), 6);
    }

    #[test]
    fn max_extreme_vs_fully_constrained_csp() {
        // With solution {1,...,L} the extreme problem differs from the CSP
        // closure only in the singletons above L.
        let n = 8;
        let l = 4;
        let st = VariableStructure { variables: l, values: 2 };
        // Solution with all variables at value 0 and then relabel so that it
        // is {1,...,L}: assumptions 1,3,5,7 -> 1,2,3,4.
        let relabel = |s: AssumptionSet| {
            let map = [0, 1, 5, 2, 6, 3, 7, 4, 8];
            AssumptionSet::from_assumptions(s.assumptions().map(|a| map[a])).unwrap()
        };
        let sol = st.assignment(&vec![0; l]);
        let mut nogoods = necessary_nogoods(l, 2);
        nogoods.extend(eligible_pairs(st, sol));
        let csp = ProblemInstance::new(n, l, nogoods.into_iter().map(relabel).collect()).unwrap();
        let csp_c = close_nogoods(&csp, &SimulationLimits::default()).unwrap();
        let ext_c = close_nogoods(&extreme_problem(ExtremeKind::Max, n, l).unwrap(), &SimulationLimits::default()).unwrap();
        let differing: Vec<usize> = (0..1usize << n)
            .filter(|&i| csp_c.good().get(i) != ext_c.good().get(i))
            .collect();
        let singletons: Vec<usize> = (l..n).map(|b| 1 << b).collect();
        assert_eq!(differing, singletons);
    }

    #[test]
    fn coloring_encodings() {
        let triangle = encode_graph_coloring(&[(1, 2), (2, 3), (1, 3)], 3, 3).unwrap();
        assert_eq!(triangle.nogoods().len(), 9 + 9);
        assert_eq!(count_solutions_bruteforce(&triangle).unwrap(), 6);

        let edge = encode_graph_coloring(&[(1, 2)], 2, 2).unwrap();
        assert_eq!(count_solutions_bruteforce(&edge).unwrap(), 2);

        let empty = encode_graph_coloring(&[], 3, 2).unwrap();
        assert_eq!(count_solutions_bruteforce(&empty).unwrap(), 8);

        assert!(matches!(
            encode_graph_coloring(&[(2, 2)], 3, 2),
            Err(Error::MalformedGraph(_))
        ));
        assert!(encode_graph_coloring(&[(1, 4)], 3, 2).is_err());
    }

    #[test]
    fn sat_encodings() {
        let p = encode_3sat(&[[1, 2, -3]], 3).unwrap();
        // V1=false is assumption 1, V2=false is 3, V3=true is 6.
        assert_eq!(*p.nogoods().last().unwrap(), set(&[1, 3, 6]));

        let empty = encode_3sat(&[], 2).unwrap();
        assert_eq!(count_solutions_bruteforce(&empty).unwrap(), 4);

        let all: Vec<Clause> = (0..8)
            .map(|bits| {
                let lit = |v: i64, b: i64| if bits >> b & 1 == 1 { -v } else { v };
                [lit(1, 0), lit(2, 1), lit(3, 2)]
            })
            .collect();
        let unsat = encode_3sat(&all, 3).unwrap();
        assert_eq!(count_solutions_bruteforce(&unsat).unwrap(), 0);

        assert!(matches!(encode_3sat(&[[1, 1, 2]], 3), Err(Error::MalformedClause(_))));
        assert!(encode_3sat(&[[1, 2, 4]], 3).is_err());
    }

    #[test]
    fn bruteforce_limits() {
        let st = VariableStructure { variables: 25, values: 2 };
        let big = ProblemInstance::new(50, 25, vec![]).unwrap().with_structure(st).unwrap();
        assert!(matches!(
            count_solutions_bruteforce(&big),
            Err(Error::SearchSpaceTooLarge(_))
        ));
        let plain = ProblemInstance::new(30, 2, vec![]).unwrap();
        assert!(count_solutions_bruteforce(&plain).is_err());
    }

    #[test]
    fn text_formats() {
        let (edges, nodes) = parse_edge_list("# triangle\n1 2\n2 3 # middle\n\n1 3\n").unwrap();
        assert_eq!(edges, vec![(1, 2), (2, 3), (1, 3)]);
        assert_eq!(nodes, 3);
        assert!(parse_edge_list("1 2 3\n").is_err());

        let (clauses, vars) = parse_clause_list("c demo\np cnf 4 2\n1 2 -3 0\n-4 2 1\n").unwrap();
        assert_eq!(clauses, vec![[1, 2, -3], [-4, 2, 1]]);
        assert_eq!(vars, 4);
        assert!(parse_clause_list("1 2\n").is_err());
    }
}
