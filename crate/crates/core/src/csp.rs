//! The constraint satisfaction problem whose solutions are the
//! c-representations of a knowledge base, and a small propagate-and-label
//! engine that solves it.
//!
//! For every rule `i` a solution vector `k` must satisfy
//!
//! ```text
//! k[i] > min_{w in V_i} sum_{j != i, w in F_j} k[j]  -  min_{w in F_i} sum_{j != i, w in F_j} k[j]
//! ```
//!
//! where `V_i` / `F_i` are the worlds verifying / falsifying rule `i` and
//! `min` over the empty set is infinite. Every variable ranges over
//! `[0, bound]`, with `bound = n` unless overridden.
//!
//! Search labels variables in rule order with ascending values, so
//! solutions always come out in lexicographic order.

use std::fmt;
use std::ops::ControlFlow;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::kb::KnowledgeBase;
use crate::worlds::{build_partitions, FalsificationMatrix, World};

/// Candidate or solution vector `(k_1, ..., k_n)` of penalty values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct KappaVector(pub Vec<u32>);

impl KappaVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().map(|&k| k as u64).sum()
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by_or_equal(&self, other: &KappaVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl From<Vec<u32>> for KappaVector {
    fn from(v: Vec<u32>) -> Self {
        KappaVector(v)
    }
}

impl fmt::Display for KappaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Which notion of minimality produced a [`SolutionSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionOrdering {
    /// Every solution in the box, no minimality filter.
    All,
    /// Minimal sum of components.
    Sum,
    /// Minimal under componentwise comparison.
    Componentwise,
    /// Minimal under pointwise comparison of the induced ranking functions.
    InducedOcf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub ordering: SolutionOrdering,
    /// Upper bound of every variable's domain; results are complete relative to it.
    pub bound: u32,
    /// Lexicographically sorted, no duplicates.
    pub vectors: Vec<KappaVector>,
    /// Smallest component sum over all solutions in the box, when known.
    pub minimal_sum: Option<u64>,
    /// Set when a limit cut the enumeration short.
    pub truncated: bool,
}

#[derive(Serialize)]
struct SolutionSetJson<'a> {
    ordering: SolutionOrdering,
    bound: u32,
    solutions: &'a [KappaVector],
    minimal_sum: Option<u64>,
    truncated: bool,
}

impl SolutionSet {
    /// `{"ordering": .., "bound": .., "solutions": [[..], ..], "minimal_sum": .., "truncated": ..}`
    pub fn to_json(&self) -> String {
        serde_json::to_string(&SolutionSetJson {
            ordering: self.ordering,
            bound: self.bound,
            solutions: &self.vectors,
            minimal_sum: self.minimal_sum,
            truncated: self.truncated,
        })
        .expect("solution sets always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("infeasible_within_bound: no solution with every value in [0, {bound}]")]
    InfeasibleWithinBound { bound: u32 },
    #[error("degenerate_rule: rule {rule} has no verifying world")]
    DegenerateRule { rule: usize },
    #[error("search exceeded its time limit")]
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Domain {
    pub lo: u32,
    pub hi: u32,
}

impl Domain {
    pub fn is_fixed(&self) -> bool {
        self.lo == self.hi
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Compiled form of one rule's constraint.
///
/// Each world contributes the set of *other* rules it falsifies as a bitmask.
/// Only subset-minimal masks are kept: with nonnegative values a superset's
/// sum can never be the smaller one, so the minima are unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RuleConstraint {
    verify: Vec<u64>,
    falsify: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct CRProblem {
    n: usize,
    bound: u32,
    partitions: FalsificationMatrix,
    rules: Vec<RuleConstraint>,
    domains: Vec<Domain>,
    /// Distinct falsification masks over all worlds, used for OCF comparison.
    world_masks: Vec<u64>,
}

pub fn build_problem(kb: &KnowledgeBase) -> CRProblem {
    let partitions = build_partitions(kb);
    let n = kb.n();
    let m = kb.m();
    let masks: Vec<u64> = (0..1u32 << m).map(|w| partitions.falsified_mask(World(w))).collect();

    let rules = (0..n)
        .map(|i| {
            let own = !(1u64 << i);
            let collect =
                |set: &crate::worlds::WorldSet| minimal_masks(set.iter().map(|w| masks[w.0 as usize] & own).collect());
            RuleConstraint {
                verify: collect(partitions.verifying(i)),
                falsify: collect(partitions.falsifying(i)),
            }
        })
        .collect();

    let mut world_masks = masks;
    world_masks.sort_unstable();
    world_masks.dedup();

    let bound = n as u32;
    CRProblem {
        n,
        bound,
        partitions,
        rules,
        domains: vec![Domain { lo: 0, hi: bound }; n],
        world_masks,
    }
}

fn minimal_masks(mut masks: Vec<u64>) -> Vec<u64> {
    masks.sort_unstable_by_key(|m| (m.count_ones(), *m));
    masks.dedup();
    let mut kept: Vec<u64> = Vec::new();
    for m in masks {
        if !kept.iter().any(|&k| k & !m == 0) {
            kept.push(m);
        }
    }
    kept
}

impl CRProblem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn partitions(&self) -> &FalsificationMatrix {
        &self.partitions
    }

    /// Same problem with every domain reset to `[0, bound]`.
    pub fn with_bound(mut self, bound: u32) -> Self {
        self.bound = bound;
        self.domains = vec![Domain { lo: 0, hi: bound }; self.n];
        self
    }

    /// 1-based id of the first rule without any verifying world.
    pub fn degenerate_rule(&self) -> Option<usize> {
        (0..self.n)
            .find(|&i| self.partitions.verifying(i).is_empty())
            .map(|i| i + 1)
    }

    /// Distinct falsification masks over all worlds (bit `j` = rule `j+1` falsified).
    pub fn world_masks(&self) -> &[u64] {
        &self.world_masks
    }
}

/// `sum_{j != rule, w in F_j} v[j]`, with `rule` a 1-based id.
pub fn falsified_sum(p: &CRProblem, rule: usize, w: World, v: &KappaVector) -> u64 {
    (0..p.n)
        .filter(|&j| j + 1 != rule && p.partitions.falsifying(j).contains(w))
        .map(|j| v.0[j] as u64)
        .sum()
}

/// Evaluates every constraint directly over the world partitions, with
/// `min(empty) = infinity`. An infinite verifying minimum can never be
/// beaten; an infinite falsifying minimum (with a finite verifying one)
/// makes the constraint vacuous.
pub fn check_solution(p: &CRProblem, v: &KappaVector) -> bool {
    if v.len() != p.n {
        return false;
    }
    (0..p.n).all(|i| {
        let rule = i + 1;
        let vmin = p
            .partitions
            .verifying(i)
            .iter()
            .map(|w| falsified_sum(p, rule, w, v))
            .min();
        let fmin = p
            .partitions
            .falsifying(i)
            .iter()
            .map(|w| falsified_sum(p, rule, w, v))
            .min();
        match (vmin, fmin) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(vm), Some(fm)) => (v.0[i] as i64) > vm as i64 - fm as i64,
        }
    })
}

fn mask_sum(mask: u64, doms: &[Domain], pick: impl Fn(&Domain) -> u32) -> i64 {
    let mut bits = mask;
    let mut s = 0i64;
    while bits != 0 {
        let j = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        s += pick(&doms[j]) as i64;
    }
    s
}

fn raise_lo(doms: &mut [Domain], j: usize, lo: i64, changed: &mut bool) -> bool {
    if lo > doms[j].lo as i64 {
        if lo > doms[j].hi as i64 {
            return false;
        }
        doms[j].lo = lo as u32;
        *changed = true;
    }
    true
}

fn lower_hi(doms: &mut [Domain], j: usize, hi: i64, changed: &mut bool) -> bool {
    if hi < doms[j].hi as i64 {
        if hi < doms[j].lo as i64 {
            return false;
        }
        doms[j].hi = hi as u32;
        *changed = true;
    }
    true
}

/// Bounds propagation to a fixpoint. Returns `false` when some domain empties.
///
/// Per rule `i` with verifying masks `V` and falsifying masks `F`:
/// * `lo_i >= min_V sum(lo) - min_F sum(hi) + 1`;
/// * every falsifying sum is at least `min_V sum(lo) + 1 - hi_i`, which raises
///   lower bounds inside each `F` mask;
/// * some verifying sum is at most `hi_i + min_F sum(hi) - 1`; when a single
///   mask can still meet that, its variables' upper bounds drop.
///
/// An optional cap bounds the total sum.
fn propagate_domains(rules: &[RuleConstraint], doms: &mut [Domain], cap: Option<u64>) -> bool {
    loop {
        let mut changed = false;

        if let Some(cap) = cap {
            let total: i64 = doms.iter().map(|d| d.lo as i64).sum();
            if total > cap as i64 {
                return false;
            }
            for j in 0..doms.len() {
                let slack = cap as i64 - (total - doms[j].lo as i64);
                if !lower_hi(doms, j, slack, &mut changed) {
                    return false;
                }
            }
        }

        for (i, rule) in rules.iter().enumerate() {
            if rule.verify.is_empty() {
                return false;
            }
            if rule.falsify.is_empty() {
                continue;
            }
            let vmin_lo = rule.verify.iter().map(|&m| mask_sum(m, doms, |d| d.lo)).min().unwrap();
            let fmin_hi = rule.falsify.iter().map(|&m| mask_sum(m, doms, |d| d.hi)).min().unwrap();

            if !raise_lo(doms, i, vmin_lo - fmin_hi + 1, &mut changed) {
                return false;
            }

            let need = vmin_lo + 1 - doms[i].hi as i64;
            if need > 0 {
                for &m in &rule.falsify {
                    let s = mask_sum(m, doms, |d| d.hi);
                    if s < need {
                        return false;
                    }
                    let mut bits = m;
                    while bits != 0 {
                        let j = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let lo = need - (s - doms[j].hi as i64);
                        if !raise_lo(doms, j, lo, &mut changed) {
                            return false;
                        }
                    }
                }
            }

            let fmin_hi = rule.falsify.iter().map(|&m| mask_sum(m, doms, |d| d.hi)).min().unwrap();
            let vcap = doms[i].hi as i64 + fmin_hi - 1;
            let mut witness = None;
            let mut witnesses = 0;
            for &m in &rule.verify {
                let s = mask_sum(m, doms, |d| d.lo);
                if s <= vcap {
                    witnesses += 1;
                    witness = Some((m, s));
                }
            }
            match (witnesses, witness) {
                (0, _) => return false,
                (1, Some((m, s))) => {
                    let mut bits = m;
                    while bits != 0 {
                        let j = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let hi = vcap - (s - doms[j].lo as i64);
                        if !lower_hi(doms, j, hi, &mut changed) {
                            return false;
                        }
                    }
                }
                _ => {}
            }
        }

        if !changed {
            return true;
        }
    }
}

/// Tightens the domains of `p` to the propagation fixpoint.
pub fn propagate(p: &CRProblem) -> Result<CRProblem, SolveError> {
    let mut doms = p.domains.clone();
    if propagate_domains(&p.rules, &mut doms, None) {
        Ok(CRProblem {
            domains: doms,
            ..p.clone()
        })
    } else {
        Err(SolveError::InfeasibleWithinBound { bound: p.bound })
    }
}

trait Visitor {
    /// Current upper limit on the component sum, if any.
    fn cap(&self) -> Option<u64> {
        None
    }

    /// Whether the subtree under these domains can be skipped.
    fn prune(&self, _doms: &[Domain]) -> bool {
        false
    }

    fn solution(&mut self, v: &[u32]) -> ControlFlow<()>;
}

/// Runs solve operations on a problem, optionally under a deadline.
#[derive(Debug, Clone)]
pub struct Solver<'p> {
    problem: &'p CRProblem,
    deadline: Option<Instant>,
}

struct Labeling<'p> {
    rules: &'p [RuleConstraint],
    deadline: Option<Instant>,
    nodes: u64,
}

impl Labeling<'_> {
    fn run(&mut self, doms: Vec<Domain>, visitor: &mut dyn Visitor) -> Result<ControlFlow<()>, SolveError> {
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            if let Some(deadline) = self.deadline {
                if Instant::now() > deadline {
                    return Err(SolveError::Timeout);
                }
            }
        }

        let mut doms = doms;
        if !propagate_domains(self.rules, &mut doms, visitor.cap()) || visitor.prune(&doms) {
            return Ok(ControlFlow::Continue(()));
        }

        let Some(var) = doms.iter().position(|d| !d.is_fixed()) else {
            let v: Vec<u32> = doms.iter().map(|d| d.lo).collect();
            return Ok(visitor.solution(&v));
        };

        let Domain { lo, hi } = doms[var];
        for value in lo..=hi {
            let mut child = doms.clone();
            child[var] = Domain { lo: value, hi: value };
            if self.run(child, visitor)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

struct Collect {
    found: Vec<KappaVector>,
    limit: Option<usize>,
    cap: Option<u64>,
}

impl Visitor for Collect {
    fn cap(&self) -> Option<u64> {
        self.cap
    }

    fn solution(&mut self, v: &[u32]) -> ControlFlow<()> {
        self.found.push(KappaVector(v.to_vec()));
        match self.limit {
            Some(limit) if self.found.len() >= limit => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        }
    }
}

/// Branch and bound: every improvement tightens the sum cap by one below it.
struct MinSum {
    best: Option<KappaVector>,
    best_sum: u64,
}

impl Visitor for MinSum {
    fn cap(&self) -> Option<u64> {
        self.best.as_ref().map(|_| self.best_sum - 1)
    }

    fn solution(&mut self, v: &[u32]) -> ControlFlow<()> {
        let v = KappaVector(v.to_vec());
        let s = v.sum();
        if s == 0 {
            self.best = Some(v);
            self.best_sum = 0;
            return ControlFlow::Break(());
        }
        self.best_sum = s;
        self.best = Some(v);
        ControlFlow::Continue(())
    }
}

/// Componentwise-minimal vectors. Solutions arrive in lexicographic order,
/// so any dominating vector has already been seen and the frontier only grows.
struct Frontier {
    kept: Vec<KappaVector>,
}

impl Frontier {
    fn dominates(&self, lo: impl Fn(usize) -> u32) -> bool {
        self.kept
            .iter()
            .any(|u| u.0.iter().enumerate().all(|(k, &x)| x <= lo(k)))
    }
}

impl Visitor for Frontier {
    fn prune(&self, doms: &[Domain]) -> bool {
        self.dominates(|k| doms[k].lo)
    }

    fn solution(&mut self, v: &[u32]) -> ControlFlow<()> {
        if !self.dominates(|k| v[k]) {
            self.kept.push(KappaVector(v.to_vec()));
        }
        ControlFlow::Continue(())
    }
}

impl<'p> Solver<'p> {
    pub fn new(problem: &'p CRProblem) -> Self {
        Solver {
            problem,
            deadline: None,
        }
    }

    pub fn with_deadline(mut self, deadline: Instant) -> Self {
        self.deadline = Some(deadline);
        self
    }

    fn label(&self, visitor: &mut dyn Visitor) -> Result<(), SolveError> {
        let mut labeling = Labeling {
            rules: &self.problem.rules,
            deadline: self.deadline,
            nodes: 0,
        };
        let _ = labeling.run(self.problem.domains.clone(), visitor)?;
        Ok(())
    }

    fn ensure_solvable(&self) -> Result<(), SolveError> {
        match self.problem.degenerate_rule() {
            Some(rule) => Err(SolveError::DegenerateRule { rule }),
            None => Ok(()),
        }
    }

    fn infeasible(&self) -> SolveError {
        SolveError::InfeasibleWithinBound {
            bound: self.problem.bound,
        }
    }

    fn set(&self, ordering: SolutionOrdering, vectors: Vec<KappaVector>, minimal_sum: Option<u64>) -> SolutionSet {
        SolutionSet {
            ordering,
            bound: self.problem.bound,
            vectors,
            minimal_sum,
            truncated: false,
        }
    }

    /// All solutions in lexicographic order, stopping after `limit` if given.
    pub fn enumerate(&self, limit: Option<usize>) -> Result<SolutionSet, SolveError> {
        if self.problem.degenerate_rule().is_some() || limit == Some(0) {
            return Ok(SolutionSet {
                truncated: limit == Some(0),
                ..self.set(SolutionOrdering::All, Vec::new(), None)
            });
        }
        let mut collect = Collect {
            found: Vec::new(),
            limit,
            cap: None,
        };
        self.label(&mut collect)?;
        let truncated = limit.is_some_and(|l| collect.found.len() >= l);
        let minimal_sum = if truncated {
            None
        } else {
            collect.found.iter().map(KappaVector::sum).min()
        };
        Ok(SolutionSet {
            truncated,
            ..self.set(SolutionOrdering::All, collect.found, minimal_sum)
        })
    }

    /// The lexicographically least vector among those with minimal sum.
    pub fn min_sum(&self) -> Result<(u64, KappaVector), SolveError> {
        self.ensure_solvable()?;
        let mut bb = MinSum {
            best: None,
            best_sum: 0,
        };
        self.label(&mut bb)?;
        match bb.best {
            Some(v) => Ok((bb.best_sum, v)),
            None => Err(self.infeasible()),
        }
    }

    /// Exactly the solutions whose sum equals the minimum: find the minimum
    /// first, then enumerate under that sum.
    pub fn all_min_sum(&self) -> Result<SolutionSet, SolveError> {
        let (best, _) = self.min_sum()?;
        let mut collect = Collect {
            found: Vec::new(),
            limit: None,
            cap: Some(best),
        };
        self.label(&mut collect)?;
        Ok(self.set(SolutionOrdering::Sum, collect.found, Some(best)))
    }

    pub fn pareto_min(&self) -> Result<SolutionSet, SolveError> {
        self.ensure_solvable()?;
        let mut frontier = Frontier { kept: Vec::new() };
        self.label(&mut frontier)?;
        if frontier.kept.is_empty() {
            return Err(self.infeasible());
        }
        let minimal_sum = frontier.kept.iter().map(KappaVector::sum).min();
        Ok(self.set(SolutionOrdering::Componentwise, frontier.kept, minimal_sum))
    }

    /// Solutions whose induced ranking function is not strictly below
    /// another solution's, pointwise over all worlds.
    ///
    /// A strictly smaller ranking function always has a componentwise-minimal
    /// generator below it, so only the componentwise-minimal vectors need to
    /// be tried as dominators.
    pub fn ocf_min(&self) -> Result<SolutionSet, SolveError> {
        let pareto = self.pareto_min()?;
        let ranks = |v: &KappaVector| -> Vec<u64> {
            self.problem
                .world_masks
                .iter()
                .map(|&mask| {
                    (0..self.problem.n)
                        .filter(|j| mask >> j & 1 == 1)
                        .map(|j| v.0[j] as u64)
                        .sum()
                })
                .collect()
        };
        let mut dominators: Vec<Vec<u64>> = pareto.vectors.iter().map(ranks).collect();
        dominators.sort();
        dominators.dedup();

        let all = self.enumerate(None)?;
        let kept = all
            .vectors
            .into_iter()
            .filter(|v| {
                let r = ranks(v);
                !dominators
                    .iter()
                    .any(|d| d != &r && d.iter().zip(&r).all(|(a, b)| a <= b))
            })
            .collect();
        Ok(self.set(SolutionOrdering::InducedOcf, kept, pareto.minimal_sum))
    }
}

pub fn enumerate_solutions(p: &CRProblem, limit: Option<usize>) -> SolutionSet {
    Solver::new(p).enumerate(limit).expect("no deadline is set")
}

pub fn solve_min_sum(p: &CRProblem) -> Result<(u64, KappaVector), SolveError> {
    Solver::new(p).min_sum()
}

pub fn all_min_sum(p: &CRProblem) -> Result<SolutionSet, SolveError> {
    Solver::new(p).all_min_sum()
}

pub fn pareto_min(p: &CRProblem) -> Result<SolutionSet, SolveError> {
    Solver::new(p).pareto_min()
}

pub fn ocf_min(p: &CRProblem) -> Result<SolutionSet, SolveError> {
    Solver::new(p).ocf_min()
}
