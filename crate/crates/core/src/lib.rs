//! Ranking-function semantics for qualitative conditional knowledge bases.
//!
//! A knowledge base of default rules `(B | A)` is compiled into a finite
//! domain constraint problem whose solutions are penalty vectors; every
//! solution induces a ranking function over possible worlds that accepts
//! all rules. The crate enumerates solutions, finds all minimal ones under
//! several orderings, and answers rank and acceptance queries.

pub mod bench;
pub mod cli;
pub mod csp;
pub mod kb;
pub mod ocf;
pub mod worlds;

pub use csp::{
    all_min_sum, build_problem, check_solution, enumerate_solutions, falsified_sum, ocf_min, pareto_min, propagate,
    solve_min_sum, CRProblem, KappaVector, SolutionOrdering, SolutionSet, SolveError, Solver,
};
pub use kb::{parse_conditional, parse_formula, parse_kb, Conditional, Formula, KnowledgeBase, ParseError};
pub use ocf::{induced_ocf, Rank, RankingFunction};
