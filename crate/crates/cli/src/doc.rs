//! JSON instance documents.
//!
//! Every instance document is an object with a `kind` field (`partition`,
//! `scheduling` or `mcilp`). When `kind` is missing it is inferred from the
//! presence of `targets`, `speeds` or `matrix`. Numbers may be JSON integers
//! or decimal strings.

use std::fmt;
use std::str::FromStr;

use modsched::mcilp::McilpInstance;
use modsched::oracle::RowSense;
use modsched::{Assignment, JobProfile, PartitionInstance, SchedulingInstance};
use serde_json::{json, Map, Value};

/// Largest natural-encoding job list accepted.
pub const NATURAL_LIMIT: usize = 1_000_000;

/// Malformed input. The message names the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub type InputResult<T> = Result<T, InputError>;

fn field_error(field: &str, message: impl fmt::Display) -> InputError {
    InputError(format!("field `{field}`: {message}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Partition,
    Scheduling,
    Mcilp,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Partition => "partition",
            Kind::Scheduling => "scheduling",
            Kind::Mcilp => "mcilp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McilpDoc {
    pub instance: McilpInstance,
    pub sense: RowSense,
}

/// A parsed document. Assignments, when present, index columns by the
/// normalized (sorted, distinct) sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Partition(PartitionInstance, Option<Assignment>),
    Scheduling(SchedulingInstance, Option<Assignment>),
    Mcilp(McilpDoc),
}

impl Document {
    pub fn kind(&self) -> Kind {
        match self {
            Document::Partition(..) => Kind::Partition,
            Document::Scheduling(..) => Kind::Scheduling,
            Document::Mcilp(_) => Kind::Mcilp,
        }
    }
}

pub fn parse_document(text: &str) -> InputResult<Document> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| InputError(format!("malformed JSON: {e}")))?;
    let Value::Object(obj) = value else {
        return Err(InputError("document must be a JSON object".into()));
    };
    match detect_kind(&obj)? {
        Kind::Partition => {
            let (jobs, columns) = parse_jobs(&obj)?;
            let targets = list(&obj, "targets")?;
            let inst =
                PartitionInstance::new(jobs, targets).map_err(|e| field_error("targets", e))?;
            let asg = parse_assignment(&obj, inst.machines(), &columns)?;
            Ok(Document::Partition(inst, asg))
        }
        Kind::Scheduling => {
            let (jobs, columns) = parse_jobs(&obj)?;
            let speeds = list(&obj, "speeds")?;
            let inst =
                SchedulingInstance::new(jobs, speeds).map_err(|e| field_error("speeds", e))?;
            let asg = parse_assignment(&obj, inst.machines(), &columns)?;
            Ok(Document::Scheduling(inst, asg))
        }
        Kind::Mcilp => parse_mcilp(&obj).map(Document::Mcilp),
    }
}

fn detect_kind(obj: &Map<String, Value>) -> InputResult<Kind> {
    match obj.get("kind") {
        Some(Value::String(k)) => match k.as_str() {
            "partition" => Ok(Kind::Partition),
            "scheduling" => Ok(Kind::Scheduling),
            "mcilp" => Ok(Kind::Mcilp),
            other => Err(field_error(
                "kind",
                format!("unknown kind {other:?}, expected partition, scheduling or mcilp"),
            )),
        },
        Some(_) => Err(field_error("kind", "expected a string")),
        None if obj.contains_key("targets") => Ok(Kind::Partition),
        None if obj.contains_key("speeds") => Ok(Kind::Scheduling),
        None if obj.contains_key("matrix") => Ok(Kind::Mcilp),
        None => Err(field_error("kind", "missing and not inferable")),
    }
}

fn number<T: FromStr>(value: &Value, field: &str) -> InputResult<T>
where
    T::Err: fmt::Display,
{
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        _ => return Err(field_error(field, "expected an integer or decimal string")),
    };
    text.parse()
        .map_err(|e| field_error(field, format!("{text:?}: {e}")))
}

fn array<'a>(value: &'a Value, field: &str) -> InputResult<&'a Vec<Value>> {
    value
        .as_array()
        .ok_or_else(|| field_error(field, "expected an array"))
}

fn required<'a>(obj: &'a Map<String, Value>, field: &str) -> InputResult<&'a Value> {
    obj.get(field).ok_or_else(|| field_error(field, "missing"))
}

fn numbers<T: FromStr>(value: &Value, field: &str) -> InputResult<Vec<T>>
where
    T::Err: fmt::Display,
{
    array(value, field)?
        .iter()
        .enumerate()
        .map(|(i, v)| number(v, &format!("{field}[{i}]")))
        .collect()
}

fn list<T: FromStr>(obj: &Map<String, Value>, field: &str) -> InputResult<Vec<T>>
where
    T::Err: fmt::Display,
{
    numbers(required(obj, field)?, field)
}

fn matrix<T: FromStr>(obj: &Map<String, Value>, field: &str) -> InputResult<Vec<Vec<T>>>
where
    T::Err: fmt::Display,
{
    array(required(obj, field)?, field)?
        .iter()
        .enumerate()
        .map(|(i, row)| numbers(row, &format!("{field}[{i}]")))
        .collect()
}

/// Jobs plus, for each input column, its column in the sorted profile.
fn parse_jobs(obj: &Map<String, Value>) -> InputResult<(JobProfile, Vec<usize>)> {
    match (obj.get("jobs"), obj.get("sizes")) {
        (Some(_), Some(_)) => Err(field_error(
            "jobs",
            "give either `jobs` or `sizes`/`counts`, not both",
        )),
        (Some(jobs), None) => {
            let raw = array(jobs, "jobs")?;
            if raw.len() > NATURAL_LIMIT {
                return Err(field_error(
                    "jobs",
                    format!(
                        "{} entries exceed the natural-encoding limit of {NATURAL_LIMIT}; use `sizes` and `counts`",
                        raw.len()
                    ),
                ));
            }
            let jobs: Vec<u64> = numbers(jobs, "jobs")?;
            let profile = JobProfile::normalize(&jobs).map_err(|e| field_error("jobs", e))?;
            let columns = (0..profile.d()).collect();
            Ok((profile, columns))
        }
        (None, _) => {
            let sizes: Vec<u64> = list(obj, "sizes")?;
            let counts: Vec<u64> = list(obj, "counts")?;
            if sizes.len() != counts.len() {
                return Err(field_error(
                    "counts",
                    format!("{} counts for {} sizes", counts.len(), sizes.len()),
                ));
            }
            let mut order: Vec<usize> = (0..sizes.len()).collect();
            order.sort_by_key(|&k| sizes[k]);
            let mut columns = vec![0; sizes.len()];
            for (sorted, &k) in order.iter().enumerate() {
                columns[k] = sorted;
            }
            let profile = JobProfile::new(
                order.iter().map(|&k| sizes[k]).collect(),
                order.iter().map(|&k| counts[k]).collect(),
            )
            .map_err(|e| field_error("sizes", e))?;
            Ok((profile, columns))
        }
    }
}

/// Reads the optional assignment, whose columns follow the input size order.
fn parse_assignment(
    obj: &Map<String, Value>,
    machines: usize,
    columns: &[usize],
) -> InputResult<Option<Assignment>> {
    let d = columns.len();
    if !obj.contains_key("assignment") {
        return Ok(None);
    }
    let rows: Vec<Vec<u64>> = matrix(obj, "assignment")?;
    if rows.len() != machines || rows.iter().any(|r| r.len() != d) {
        return Err(field_error(
            "assignment",
            format!("expected {machines} rows of {d} counts"),
        ));
    }
    let rows = rows
        .into_iter()
        .map(|row| {
            let mut sorted = vec![0; d];
            for (k, n) in row.into_iter().enumerate() {
                sorted[columns[k]] = n;
            }
            sorted
        })
        .collect();
    Assignment::from_rows(rows)
        .map(Some)
        .map_err(|e| field_error("assignment", e))
}

fn parse_mcilp(obj: &Map<String, Value>) -> InputResult<McilpDoc> {
    let objective: Vec<i64> = list(obj, "objective")?;
    let matrix: Vec<Vec<i64>> = matrix(obj, "matrix")?;
    let rhs = list(obj, "rhs")?;
    let sets: Vec<Vec<usize>> = self::matrix(obj, "sets")?;
    let cardinalities = list(obj, "cardinalities")?;
    let sense = match obj.get("sense").map(|v| v.as_str()) {
        None | Some(Some("equal")) => RowSense::Equal,
        Some(Some("at_most")) => RowSense::AtMost,
        _ => return Err(field_error("sense", "expected \"equal\" or \"at_most\"")),
    };
    let instance = McilpInstance::new(objective.len(), matrix, rhs, objective, sets, cardinalities)
        .map_err(|e| field_error("matrix", e))?;
    Ok(McilpDoc { instance, sense })
}

fn jobs_value(jobs: &JobProfile, obj: &mut Map<String, Value>) {
    obj.insert("sizes".into(), json!(jobs.sizes()));
    obj.insert("counts".into(), json!(jobs.counts()));
}

/// Serializes a document in its canonical high-multiplicity form.
pub fn document_value(doc: &Document) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(doc.kind().name()));
    match doc {
        Document::Partition(inst, asg) => {
            jobs_value(inst.jobs(), &mut obj);
            obj.insert("targets".into(), json!(inst.targets()));
            if let Some(asg) = asg {
                obj.insert("assignment".into(), json!(asg.rows()));
            }
        }
        Document::Scheduling(inst, asg) => {
            jobs_value(inst.jobs(), &mut obj);
            obj.insert("speeds".into(), json!(inst.speeds()));
            if let Some(asg) = asg {
                obj.insert("assignment".into(), json!(asg.rows()));
            }
        }
        Document::Mcilp(doc) => {
            let inst = &doc.instance;
            obj.insert("matrix".into(), json!(inst.matrix()));
            obj.insert("rhs".into(), json!(inst.rhs()));
            obj.insert("objective".into(), json!(inst.objective()));
            obj.insert("sets".into(), json!(inst.sets()));
            obj.insert("cardinalities".into(), json!(inst.cardinalities()));
            let sense = match doc.sense {
                RowSense::Equal => "equal",
                RowSense::AtMost => "at_most",
            };
            obj.insert("sense".into(), json!(sense));
        }
    }
    Value::Object(obj)
}

pub fn render(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}
