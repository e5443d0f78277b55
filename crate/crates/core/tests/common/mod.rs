//! Test support: random knowledge bases and a brute-force oracle that reads
//! the constraints straight off the indicator function, world by world.

#![allow(dead_code)]

use crep::kb::KnowledgeBase;
use crep::worlds::{indicator, IndicatorValue, World};
use rand::Rng;

pub const BIRDS: &str = include_str!("../fixtures/birds.kb");
pub const PENGUINS: &str = include_str!("../fixtures/penguins.kb");

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

fn random_term(rng: &mut impl Rng, m: usize) -> String {
    let lits: Vec<String> = NAMES[..m]
        .iter()
        .filter_map(|name| match rng.gen_range(0..4) {
            0 => Some(name.to_string()),
            1 => Some(format!("!{name}")),
            _ => None,
        })
        .collect();
    if lits.is_empty() {
        "top".to_string()
    } else {
        lits.join(", ")
    }
}

fn random_formula(rng: &mut impl Rng, m: usize) -> String {
    if rng.gen_ratio(1, 40) {
        return "bot".to_string();
    }
    let terms = rng.gen_range(1..=2);
    (0..terms).map(|_| random_term(rng, m)).collect::<Vec<_>>().join(" ; ")
}

/// Random KB text with `1..=max_atoms` atoms and `1..=max_rules` rules.
pub fn random_kb_text(rng: &mut impl Rng, max_atoms: usize, max_rules: usize) -> String {
    let m = rng.gen_range(1..=max_atoms);
    let n = rng.gen_range(1..=max_rules);
    let mut text = format!("vars: {}\n", NAMES[..m].join(", "));
    for _ in 0..n {
        text.push_str(&format!(
            "rule: ({} | {})\n",
            random_formula(rng, m),
            random_formula(rng, m)
        ));
    }
    text
}

/// Constraints of every rule evaluated from scratch, `min(empty) = infinity`.
pub fn oracle_is_solution(kb: &KnowledgeBase, v: &[u32]) -> bool {
    let worlds: Vec<World> = (0..1u32 << kb.m()).map(World).collect();
    let conds = kb.conditionals();
    (0..conds.len()).all(|i| {
        let mut vmin: Option<u64> = None;
        let mut fmin: Option<u64> = None;
        for &w in &worlds {
            let side = indicator(&conds[i], w);
            if side == IndicatorValue::NotApplicable {
                continue;
            }
            let s: u64 = (0..conds.len())
                .filter(|&j| j != i && indicator(&conds[j], w) == IndicatorValue::Falsifies)
                .map(|j| v[j] as u64)
                .sum();
            let slot = if side == IndicatorValue::Verifies {
                &mut vmin
            } else {
                &mut fmin
            };
            *slot = Some(slot.map_or(s, |x: u64| x.min(s)));
        }
        match (vmin, fmin) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(a), Some(b)) => v[i] as i64 > a as i64 - b as i64,
        }
    })
}

/// Every vector in `[0, bound]^n`, in lexicographic order.
pub fn box_vectors(n: usize, bound: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=bound).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

pub fn oracle_solutions(kb: &KnowledgeBase, bound: u32) -> Vec<Vec<u32>> {
    box_vectors(kb.n(), bound)
        .into_iter()
        .filter(|v| oracle_is_solution(kb, v))
        .collect()
}

pub fn oracle_min_sum(solutions: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let sum = |v: &Vec<u32>| v.iter().map(|&x| x as u64).sum::<u64>();
    let Some(best) = solutions.iter().map(sum).min() else {
        return Vec::new();
    };
    solutions.iter().filter(|v| sum(v) == best).cloned().collect()
}

fn le(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Non-dominated subset under componentwise order.
pub fn oracle_pareto(solutions: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let wide = |v: &Vec<u32>| v.iter().map(|&x| x as u64).collect::<Vec<u64>>();
    solutions
        .iter()
        .filter(|v| !solutions.iter().any(|u| u != *v && le(&wide(u), &wide(v))))
        .cloned()
        .collect()
}

/// Ranks of every world, ascending world index, from the indicator directly.
pub fn oracle_ranks(kb: &KnowledgeBase, v: &[u32]) -> Vec<u64> {
    (0..1u32 << kb.m())
        .map(|w| {
            kb.conditionals()
                .iter()
                .zip(v)
                .filter(|(c, _)| indicator(c, World(w)) == IndicatorValue::Falsifies)
                .map(|(_, &x)| x as u64)
                .sum()
        })
        .collect()
}

/// Solutions whose OCF is not strictly below another solution's OCF.
pub fn oracle_ocf_min(kb: &KnowledgeBase, solutions: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let ranks: Vec<Vec<u64>> = solutions.iter().map(|v| oracle_ranks(kb, v)).collect();
    solutions
        .iter()
        .enumerate()
        .filter(|(i, _)| !ranks.iter().any(|r| r != &ranks[*i] && le(r, &ranks[*i])))
        .map(|(_, v)| v.clone())
        .collect()
}

fn as_vecs(set: &crep::SolutionSet) -> Vec<Vec<u32>> {
    set.vectors.iter().map(|v| v.0.clone()).collect()
}

fn solved_or_empty(result: Result<crep::SolutionSet, crep::SolveError>) -> Result<Vec<Vec<u32>>, String> {
    match result {
        Ok(set) => Ok(as_vecs(&set)),
        Err(crep::SolveError::InfeasibleWithinBound { .. } | crep::SolveError::DegenerateRule { .. }) => Ok(Vec::new()),
        Err(e) => Err(e.to_string()),
    }
}

/// Compares every solver operation on `kb` with the brute-force oracle.
pub fn compare_with_oracle(kb: &KnowledgeBase) -> Result<(), String> {
    let problem = crep::build_problem(kb);
    let expected = oracle_solutions(kb, problem.bound());
    let checks = [
        (
            "enumerate",
            as_vecs(&crep::enumerate_solutions(&problem, None)),
            expected.clone(),
        ),
        (
            "all_min_sum",
            solved_or_empty(crep::all_min_sum(&problem))?,
            oracle_min_sum(&expected),
        ),
        (
            "pareto_min",
            solved_or_empty(crep::pareto_min(&problem))?,
            oracle_pareto(&expected),
        ),
        (
            "ocf_min",
            solved_or_empty(crep::ocf_min(&problem))?,
            oracle_ocf_min(kb, &expected),
        ),
    ];
    for (name, got, want) in checks {
        if got != want {
            return Err(format!("{name}: solver {got:?}, oracle {want:?}\n{}", kb.render()));
        }
    }
    for v in &expected {
        if !crep::check_solution(&problem, &crep::KappaVector(v.clone())) {
            return Err(format!("check_solution rejects {v:?}\n{}", kb.render()));
        }
    }
    Ok(())
}

/// Every solution induces an OCF that accepts each rule and has minimum rank 0.
pub fn check_acceptance_property(kb: &KnowledgeBase) -> Result<usize, String> {
    let problem = crep::build_problem(kb);
    let solutions = crep::enumerate_solutions(&problem, None);
    for v in &solutions.vectors {
        let ocf = crep::induced_ocf(kb, v).map_err(|e| e.to_string())?;
        if let Some(c) = kb.conditionals().iter().find(|c| !ocf.accepts(c)) {
            return Err(format!("{v} does not accept {}\n{}", c.render(kb.atoms()), kb.render()));
        }
        if ocf.min_rank() != 0 {
            return Err(format!("{v} has minimum rank {}\n{}", ocf.min_rank(), kb.render()));
        }
    }
    Ok(solutions.vectors.len())
}
