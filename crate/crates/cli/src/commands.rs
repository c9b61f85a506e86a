//! The `solve`, `verify` and `oracle` commands. Each returns a result
//! document and an exit code.

use modsched::greedy::TraceRecord;
use modsched::makespan::solve_makespan_with;
use modsched::mcilp::{
    solve_equality_with_stats, solve_inequality_with_stats, McilpSolution, SolveStats,
};
use modsched::oracle::{brute_makespan, brute_mcilp, brute_partition, RowSense};
use modsched::partition::{solve_partition_with, PartitionOptions, PivotOutcome};
use modsched::verify::{verify_makespan, verify_partition};
use modsched::{Assignment, Error, ExactRational, PartitionInstance, SchedulingInstance};
use serde_json::{json, Map, Value};

use crate::doc::{Document, InputError, Kind, McilpDoc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub document: Value,
    pub code: i32,
}

impl Outcome {
    fn new(document: Value, positive: bool) -> Self {
        let code = if positive { EXIT_OK } else { EXIT_NEGATIVE };
        Outcome { document, code }
    }
}

/// Failure of a command that is not a negative answer.
#[derive(Debug)]
pub enum Failure {
    Input(InputError),
    /// The solver or oracle could not finish (budget, overflow, internal
    /// invariant).
    Solver(Error),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "input error: {e}"),
            Failure::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Solver(_) => EXIT_INCOMPLETE,
        }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInstance(m) | Error::InvalidArgument(m) => Failure::Input(InputError(m)),
            other => Failure::Solver(other),
        }
    }
}

pub type CmdResult = Result<Outcome, Failure>;

fn wrong_kind(expected: Kind, got: Kind) -> Failure {
    Failure::Input(InputError(format!(
        "field `kind`: expected a {} document, got {}",
        expected.name(),
        got.name()
    )))
}

pub fn stats_value(stats: &SolveStats) -> Value {
    json!({
        "layers": stats.layers,
        "peak_states": stats.peak_states,
        "total_states": stats.total_states,
        "ball_rejections": stats.ball_rejections,
        "bound_rejections": stats.bound_rejections,
    })
}

fn trace_value(trace: &[TraceRecord]) -> Value {
    trace
        .iter()
        .map(|r| json!({"phase": r.phase.name(), "machine": r.machine, "size": r.size, "jobs": r.jobs}))
        .collect()
}

fn outcome_name(outcome: PivotOutcome) -> &'static str {
    match outcome {
        PivotOutcome::Skipped => "skipped",
        PivotOutcome::Infeasible => "infeasible",
        PivotOutcome::Solved => "solved",
    }
}

fn assignment_fields(obj: &mut Map<String, Value>, sizes: &[u64], asg: &Assignment) {
    obj.insert("sizes".into(), json!(sizes));
    obj.insert("assignment".into(), json!(asg.rows()));
    obj.insert("loads".into(), json!(asg.loads(sizes)));
}

pub fn solve_partition_doc(inst: &PartitionInstance, pivot: Option<u64>, trace: bool) -> CmdResult {
    let report = solve_partition_with(inst, &PartitionOptions { pivot })?;
    let mut obj = Map::new();
    obj.insert("feasible".into(), json!(report.assignment.is_some()));
    if let Some(asg) = &report.assignment {
        assignment_fields(&mut obj, inst.jobs().sizes(), asg);
        obj.insert("pivot".into(), json!(report.pivot));
    }
    let attempts: Vec<Value> = report
        .attempts
        .iter()
        .map(|&(p, o)| json!({"pivot": p, "outcome": outcome_name(o)}))
        .collect();
    obj.insert("attempts".into(), Value::Array(attempts));
    obj.insert("stats".into(), stats_value(&report.ilp_stats));
    if trace {
        obj.insert("trace".into(), trace_value(&report.trace));
    }
    let feasible = report.assignment.is_some();
    Ok(Outcome::new(Value::Object(obj), feasible))
}

pub fn solve_makespan_doc(inst: &SchedulingInstance, pivot: Option<u64>) -> CmdResult {
    let solution = solve_makespan_with(inst, &PartitionOptions { pivot })?;
    let mut obj = Map::new();
    obj.insert("optimal".into(), json!(solution.value.to_string()));
    assignment_fields(&mut obj, inst.jobs().sizes(), &solution.assignment);
    obj.insert("probes".into(), json!(solution.probes));
    obj.insert("stats".into(), stats_value(&solution.stats));
    Ok(Outcome::new(Value::Object(obj), true))
}

fn ilp_value(solution: Option<&McilpSolution>) -> Map<String, Value> {
    let mut obj = Map::new();
    obj.insert("feasible".into(), json!(solution.is_some()));
    if let Some(s) = solution {
        obj.insert("x".into(), json!(s.x));
        obj.insert("objective".into(), json!(s.objective));
    }
    obj
}

pub fn solve_ilp_doc(doc: &McilpDoc) -> CmdResult {
    let (solution, stats) = match doc.sense {
        RowSense::Equal => solve_equality_with_stats(&doc.instance)?,
        RowSense::AtMost => solve_inequality_with_stats(&doc.instance)?,
    };
    let mut obj = ilp_value(solution.as_ref());
    obj.insert("stats".into(), stats_value(&stats));
    Ok(Outcome::new(Value::Object(obj), solution.is_some()))
}

pub fn solve(kind: Kind, doc: &Document, pivot: Option<u64>, trace: bool) -> CmdResult {
    match (kind, doc) {
        (Kind::Partition, Document::Partition(inst, _)) => solve_partition_doc(inst, pivot, trace),
        (Kind::Scheduling, Document::Scheduling(inst, _)) => solve_makespan_doc(inst, pivot),
        (Kind::Mcilp, Document::Mcilp(doc)) => solve_ilp_doc(doc),
        (expected, doc) => Err(wrong_kind(expected, doc.kind())),
    }
}

pub fn verify(doc: &Document) -> CmdResult {
    let missing = || Failure::Input(InputError("field `assignment`: missing".into()));
    match doc {
        Document::Partition(inst, asg) => {
            let asg = asg.as_ref().ok_or_else(missing)?;
            let report = verify_partition(inst, asg)?;
            let passed = report.passed();
            let document = json!({
                "passed": passed,
                "loads": report.loads,
                "targets": report.targets,
                "mismatched_machines": report.mismatched_machines,
                "unbalanced_sizes": report.unbalanced_sizes,
            });
            Ok(Outcome::new(document, passed))
        }
        Document::Scheduling(inst, asg) => {
            let asg = asg.as_ref().ok_or_else(missing)?;
            let loads = asg.loads(inst.jobs().sizes());
            let document = match verify_makespan(inst, asg) {
                Ok(value) => json!({"passed": true, "loads": loads, "makespan": value.to_string()}),
                Err(Error::InvalidArgument(reason)) => {
                    json!({"passed": false, "loads": loads, "reason": reason})
                }
                Err(e) => return Err(e.into()),
            };
            let passed = document["passed"] == json!(true);
            Ok(Outcome::new(document, passed))
        }
        Document::Mcilp(_) => Err(Failure::Input(InputError(
            "field `kind`: verify takes a partition or scheduling document".into(),
        ))),
    }
}

pub fn oracle(doc: &Document, budget: u64) -> CmdResult {
    match doc {
        Document::Partition(inst, _) => {
            let asg = brute_partition(inst, budget)?;
            let mut obj = Map::new();
            obj.insert("feasible".into(), json!(asg.is_some()));
            if let Some(asg) = &asg {
                assignment_fields(&mut obj, inst.jobs().sizes(), asg);
            }
            Ok(Outcome::new(Value::Object(obj), asg.is_some()))
        }
        Document::Scheduling(inst, _) => {
            let (value, asg): (ExactRational, Assignment) = brute_makespan(inst, budget)?;
            let mut obj = Map::new();
            obj.insert("optimal".into(), json!(value.to_string()));
            assignment_fields(&mut obj, inst.jobs().sizes(), &asg);
            Ok(Outcome::new(Value::Object(obj), true))
        }
        Document::Mcilp(doc) => {
            let solution = brute_mcilp(&doc.instance, doc.sense, budget)?;
            Ok(Outcome::new(
                Value::Object(ilp_value(solution.as_ref())),
                solution.is_some(),
            ))
        }
    }
}
