//! Synthetic chain knowledge bases and a timing harness over them.
//!
//! `kb(n)` uses atoms `f, a1, ..., an` and lists `(f | ai)` for odd `i`,
//! `(!f | ai)` for even `i`, then the chain `(ai | ai+1)`. Each subclass
//! `a(i+1)` is exceptional to `ai` regarding `f`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::csp::{build_problem, SolveError, Solver};
use crate::kb::{parse_kb, KnowledgeBase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    /// Chain length.
    pub n: usize,
    /// Trailing conditionals removed.
    pub j: usize,
}

impl SyntheticSpec {
    pub fn new(n: usize, j: usize) -> Result<Self, BenchError> {
        if n == 0 || j > 2 * n - 2 || n + 1 > crate::kb::MAX_ATOMS || 2 * n - 1 > crate::kb::MAX_RULES {
            return Err(BenchError::OutOfRange { n, j });
        }
        Ok(SyntheticSpec { n, j })
    }

    pub fn rules(&self) -> usize {
        2 * self.n - 1 - self.j
    }

    /// Name in the `kb(n,rules)` style.
    pub fn name(&self) -> String {
        format!("kb({},{})", self.n, self.rules())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("kb(n) needs n >= 1 and 0 <= j <= 2n-2 within the size caps (got n={n}, j={j})")]
    OutOfRange { n: usize, j: usize },
    #[error("unknown operation `{0}` (expected min-all, enumerate or min)")]
    UnknownOperation(String),
}

/// Text of `kb(n)` with its last `j` rules removed.
pub fn synthetic_text(n: usize, j: usize) -> Result<String, BenchError> {
    let spec = SyntheticSpec::new(n, j)?;
    let mut vars = vec!["f".to_string()];
    vars.extend((1..=n).map(|i| format!("a{i}")));
    let mut rules = Vec::new();
    for i in 1..=n {
        let head = if i % 2 == 1 { "f" } else { "!f" };
        rules.push(format!("({head} | a{i})"));
    }
    for i in 1..n {
        rules.push(format!("(a{i} | a{})", i + 1));
    }
    rules.truncate(spec.rules());

    let mut text = format!("# {}\nvars: {}\n", spec.name(), vars.join(", "));
    for r in rules {
        text.push_str(&format!("rule: {r}\n"));
    }
    Ok(text)
}

pub fn gen_synthetic(n: usize, j: usize) -> Result<KnowledgeBase, BenchError> {
    let text = synthetic_text(n, j)?;
    Ok(parse_kb(&text).expect("generated knowledge bases are well formed"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    MinAll,
    Enumerate,
    Min,
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operation::MinAll => "min-all",
            Operation::Enumerate => "enumerate",
            Operation::Min => "min",
        })
    }
}

impl FromStr for Operation {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min-all" => Ok(Operation::MinAll),
            "enumerate" => Ok(Operation::Enumerate),
            "min" => Ok(Operation::Min),
            other => Err(BenchError::UnknownOperation(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub kb_name: String,
    pub variables: usize,
    pub conditionals: usize,
    pub operation: Operation,
    /// Median over the repetitions, in seconds.
    pub wall_time: f64,
    pub solutions_found: usize,
    /// Set when a repetition hit the time limit; `wall_time` is then the limit.
    pub timed_out: bool,
}

pub const CSV_HEADER: &str = "kb_name,vars,conditionals,operation,wall_time_s,solutions_found";

impl BenchRecord {
    /// One CSV row. A timed out record reports `timeout` as its solution count.
    pub fn csv_row(&self) -> String {
        let found = if self.timed_out {
            "timeout".to_string()
        } else {
            self.solutions_found.to_string()
        };
        format!(
            "\"{}\",{},{},{},{:.6},{}",
            self.kb_name, self.variables, self.conditionals, self.operation, self.wall_time, found
        )
    }
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn run_once(kb: &KnowledgeBase, op: Operation, deadline: Option<Instant>) -> Result<usize, SolveError> {
    let problem = build_problem(kb);
    let mut solver = Solver::new(&problem);
    if let Some(d) = deadline {
        solver = solver.with_deadline(d);
    }
    match op {
        Operation::MinAll => solver.all_min_sum().map(|s| s.vectors.len()),
        Operation::Enumerate => solver.enumerate(None).map(|s| s.vectors.len()),
        Operation::Min => solver.min_sum().map(|_| 1),
    }
}

/// Times `op` on each spec, sequentially, and reports the median of
/// `repetitions` runs. Infeasible problems count zero solutions.
pub fn run_bench(
    specs: &[SyntheticSpec],
    op: Operation,
    repetitions: usize,
    timeout: Option<Duration>,
) -> Vec<BenchRecord> {
    let repetitions = repetitions.max(1);
    specs
        .iter()
        .map(|spec| {
            let kb = gen_synthetic(spec.n, spec.j).expect("specs are validated on construction");
            let mut times = Vec::with_capacity(repetitions);
            let mut found = 0;
            let mut timed_out = false;
            for _ in 0..repetitions {
                let start = Instant::now();
                let outcome = run_once(&kb, op, timeout.map(|t| start + t));
                let elapsed = start.elapsed().as_secs_f64();
                match outcome {
                    Ok(count) => found = count,
                    Err(SolveError::Timeout) => {
                        timed_out = true;
                        break;
                    }
                    Err(_) => found = 0,
                }
                times.push(elapsed);
            }
            let wall_time = if timed_out {
                timeout.map_or(0.0, |t| t.as_secs_f64())
            } else {
                median(&mut times)
            };
            BenchRecord {
                kb_name: spec.name(),
                variables: kb.m(),
                conditionals: kb.n(),
                operation: op,
                wall_time,
                solutions_found: found,
                timed_out,
            }
        })
        .collect()
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::all_min_sum;

    fn rule_texts(kb: &KnowledgeBase) -> Vec<String> {
        kb.conditionals().iter().map(|c| c.render(kb.atoms())).collect()
    }

    #[test]
    fn kb_4_7() {
        let kb = gen_synthetic(4, 0).unwrap();
        assert_eq!(kb.m(), 5);
        assert_eq!(
            rule_texts(&kb),
            [
                "(f | a1)",
                "(!f | a2)",
                "(f | a3)",
                "(!f | a4)",
                "(a1 | a2)",
                "(a2 | a3)",
                "(a3 | a4)"
            ]
        );
    }

    #[test]
    fn truncation_drops_trailing_rules() {
        let kb = gen_synthetic(4, 2).unwrap();
        assert_eq!(
            rule_texts(&kb),
            ["(f | a1)", "(!f | a2)", "(f | a3)", "(!f | a4)", "(a1 | a2)"]
        );
        assert_eq!(SyntheticSpec::new(4, 2).unwrap().name(), "kb(4,5)");
    }

    #[test]
    fn single_link_chain() {
        let kb = gen_synthetic(1, 0).unwrap();
        assert_eq!(rule_texts(&kb), ["(f | a1)"]);
    }

    #[test]
    fn sizes() {
        for n in 1..=6 {
            let kb = gen_synthetic(n, 0).unwrap();
            assert_eq!((kb.n(), kb.m()), (2 * n - 1, n + 1));
        }
    }

    #[test]
    fn out_of_range() {
        assert_eq!(gen_synthetic(0, 0).unwrap_err(), BenchError::OutOfRange { n: 0, j: 0 });
        assert!(gen_synthetic(3, 5).is_err());
        assert!(gen_synthetic(3, 4).is_ok());
    }

    #[test]
    fn bench_min_all_small() {
        let records = run_bench(&[SyntheticSpec::new(3, 0).unwrap()], Operation::MinAll, 1, None);
        assert_eq!(records.len(), 1);
        let expected = all_min_sum(&build_problem(&gen_synthetic(3, 0).unwrap()))
            .unwrap()
            .vectors
            .len();
        assert!(records[0].solutions_found >= 1);
        assert_eq!(records[0].solutions_found, expected);
        assert_eq!(records[0].kb_name, "kb(3,5)");
        assert!(records[0].wall_time >= 0.0);
    }

    #[test]
    fn empty_spec_list() {
        assert!(run_bench(&[], Operation::Min, 3, None).is_empty());
    }

    #[test]
    fn timeouts_are_flagged() {
        let records = run_bench(
            &[SyntheticSpec::new(6, 0).unwrap()],
            Operation::Enumerate,
            2,
            Some(Duration::from_millis(1)),
        );
        assert!(records[0].timed_out);
        assert!(records[0].csv_row().ends_with(",timeout"));
    }

    #[test]
    fn csv_format() {
        let r = BenchRecord {
            kb_name: "kb(2,3)".into(),
            variables: 3,
            conditionals: 3,
            operation: Operation::MinAll,
            wall_time: 0.25,
            solutions_found: 1,
            timed_out: false,
        };
        assert_eq!(
            to_csv(&[r]),
            format!("{CSV_HEADER}\n\"kb(2,3)\",3,3,min-all,0.250000,1\n")
        );
    }

    #[test]
    fn operations_parse() {
        assert_eq!("min-all".parse::<Operation>().unwrap(), Operation::MinAll);
        assert!("max".parse::<Operation>().is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
