//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when no solution exists within the bound (or
//! a checked vector is not a solution), 2 on usage, I/O and parse errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::bench::{run_bench, to_csv, BenchError, Operation, SyntheticSpec};
use crate::csp::{build_problem, check_solution, CRProblem, KappaVector, SolutionSet, SolveError, Solver};
use crate::kb::{parse_conditional, parse_kb, Conditional, KnowledgeBase, ParseError};
use crate::ocf::{induced_ocf, LengthMismatch};

#[derive(Debug, Parser)]
#[command(
    name = "crep",
    version,
    about = "Minimal c-representations of conditional knowledge bases"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    All,
    Min,
    MinAll,
    Pareto,
    OcfMin,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the constraint problem of a knowledge base.
    Solve {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Stop after this many solutions (mode `all` only).
        #[arg(long)]
        limit: Option<usize>,
        /// Upper bound of every value (default: number of rules).
        #[arg(long)]
        bound: Option<u32>,
        #[arg(long)]
        json: bool,
        file: PathBuf,
    },
    /// Ask whether a ranking function accepts a conditional `(B | A)`.
    Query {
        /// Use the lexicographically least sum-minimal solution.
        #[arg(long, conflicts_with = "vector", required_unless_present = "vector")]
        min: bool,
        /// Explicit comma separated vector.
        #[arg(long)]
        vector: Option<String>,
        #[arg(long)]
        bound: Option<u32>,
        conditional: String,
        file: PathBuf,
    },
    /// Print the ranking function induced by a vector.
    ShowOcf {
        #[arg(long)]
        vector: String,
        #[arg(long)]
        json: bool,
        file: PathBuf,
    },
    /// Check whether a vector solves the constraint problem.
    Check {
        #[arg(long)]
        vector: String,
        file: PathBuf,
    },
    /// Time solver runs over the synthetic kb(n) family and emit CSV.
    Bench {
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
        /// Trailing conditionals removed from each kb(n).
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value = "min-all")]
        op: Operation,
        /// Per-run time limit in seconds.
        #[arg(long)]
        timeout: Option<f64>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("conditional: {0}")]
    Query(ParseError),
    #[error(transparent)]
    Length(#[from] LengthMismatch),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solve(_) => 1,
            _ => 2,
        }
    }
}

/// Parses argv, runs the command and returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_kb(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_vector(text: &str) -> Result<KappaVector, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(KappaVector(Vec::new()));
    }
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("invalid vector component `{}`", part.trim())))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(KappaVector)
}

fn problem_for(kb: &KnowledgeBase, bound: Option<u32>) -> CRProblem {
    let problem = build_problem(kb);
    match bound {
        Some(b) => problem.with_bound(b),
        None => problem,
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Solve {
            mode,
            limit,
            bound,
            json,
            file,
        } => {
            let kb = load_kb(&file)?;
            let problem = problem_for(&kb, bound);
            let solver = Solver::new(&problem);
            let mut set = match mode {
                Mode::All => solver.enumerate(limit)?,
                Mode::Min => {
                    let (sum, v) = solver.min_sum()?;
                    SolutionSet {
                        ordering: crate::csp::SolutionOrdering::Sum,
                        bound: problem.bound(),
                        vectors: vec![v],
                        minimal_sum: Some(sum),
                        truncated: false,
                    }
                }
                Mode::MinAll => solver.all_min_sum()?,
                Mode::Pareto => solver.pareto_min()?,
                Mode::OcfMin => solver.ocf_min()?,
            };
            if set.vectors.is_empty() {
                if let Some(rule) = problem.degenerate_rule() {
                    return Err(SolveError::DegenerateRule { rule }.into());
                }
                if !set.truncated {
                    return Err(SolveError::InfeasibleWithinBound { bound: problem.bound() }.into());
                }
            }
            if set.minimal_sum.is_none() {
                set.minimal_sum = solver.min_sum().ok().map(|(s, _)| s);
            }
            if json {
                writeln!(out, "{}", set.to_json()).map_err(io)?;
            } else {
                for v in &set.vectors {
                    writeln!(out, "{v}").map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Query {
            min,
            vector,
            bound,
            conditional,
            file,
        } => {
            let kb = load_kb(&file)?;
            let v = if min {
                let problem = problem_for(&kb, bound);
                let minima = Solver::new(&problem).all_min_sum()?;
                if minima.vectors.len() > 1 {
                    writeln!(
                        err,
                        "warning: {} sum-minimal solutions exist; using the lexicographically least",
                        minima.vectors.len()
                    )
                    .map_err(io)?;
                }
                minima.vectors[0].clone()
            } else {
                parse_vector(vector.as_deref().unwrap_or_default())?
            };
            let (consequent, antecedent) = parse_conditional(&conditional, kb.atoms()).map_err(CliError::Query)?;
            let query = Conditional {
                id: 0,
                antecedent,
                consequent,
                label: None,
            };
            let ocf = induced_ocf(&kb, &v)?;
            let (verify, falsify) = ocf.conditional_ranks(&query);
            let verdict = if ocf.accepts(&query) { "ACCEPTED" } else { "REJECTED" };
            writeln!(out, "{verdict}").map_err(io)?;
            writeln!(out, "conditional: {}", query.render(kb.atoms())).map_err(io)?;
            writeln!(out, "vector: {v}").map_err(io)?;
            writeln!(out, "kappa(verifying) = {verify}").map_err(io)?;
            writeln!(out, "kappa(falsifying) = {falsify}").map_err(io)?;
            writeln!(out, "kappa(conditional) = {}", ocf.rank_conditional(&query)).map_err(io)?;
            Ok(0)
        }
        Command::ShowOcf { vector, json, file } => {
            let kb = load_kb(&file)?;
            let v = parse_vector(&vector)?;
            let ocf = induced_ocf(&kb, &v)?;
            if json {
                let rows = serde_json::to_string(&ocf.table()).expect("rows serialize");
                writeln!(out, "{rows}").map_err(io)?;
            } else {
                out.write_all(ocf.render_table().as_bytes()).map_err(io)?;
            }
            Ok(0)
        }
        Command::Check { vector, file } => {
            let kb = load_kb(&file)?;
            let v = parse_vector(&vector)?;
            if v.len() != kb.n() {
                return Err(LengthMismatch {
                    expected: kb.n(),
                    got: v.len(),
                }
                .into());
            }
            let problem = build_problem(&kb);
            if check_solution(&problem, &v) {
                writeln!(out, "VALID").map_err(io)?;
                return Ok(0);
            }
            writeln!(out, "INVALID").map_err(io)?;
            let ocf = induced_ocf(&kb, &v)?;
            for c in kb.conditionals() {
                if !ocf.accepts(c) {
                    writeln!(out, "rule {} not accepted: {}", c.id, c.render(kb.atoms())).map_err(io)?;
                }
            }
            Ok(1)
        }
        Command::Bench {
            n_from,
            n_to,
            j,
            reps,
            csv,
            op,
            timeout,
        } => {
            if n_from > n_to {
                return Err(CliError::Usage(format!("--n-from {n_from} exceeds --n-to {n_to}")));
            }
            let specs = (n_from..=n_to)
                .map(|n| SyntheticSpec::new(n, j))
                .collect::<Result<Vec<_>, _>>()?;
            let records = run_bench(&specs, op, reps, timeout.map(Duration::from_secs_f64));
            let text = to_csv(&records);
            match csv {
                Some(path) => fs::write(&path, text).map_err(|source| CliError::Io { path, source })?,
                None => out.write_all(text.as_bytes()).map_err(io)?,
            }
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_parse() {
        assert_eq!(parse_vector("1, 2,3").unwrap(), KappaVector(vec![1, 2, 3]));
        assert_eq!(parse_vector("").unwrap(), KappaVector(vec![]));
        assert!(matches!(parse_vector("1,-2"), Err(CliError::Usage(_))));
    }

    #[test]
    fn usage_errors_exit_two() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(["crep".to_string(), "solve".into()], &mut out, &mut err);
        assert_eq!(code, 2);
        assert!(!err.is_empty());
    }

    #[test]
    fn missing_file_exits_two() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let args = ["crep", "solve", "--mode", "min", "/nonexistent/kb.txt"].map(String::from);
        assert_eq!(main_with(args, &mut out, &mut err), 2);
        assert!(String::from_utf8(err)
            .unwrap()
            .starts_with("error: /nonexistent/kb.txt"));
    }
}
