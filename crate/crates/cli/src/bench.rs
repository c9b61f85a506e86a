//! Benchmark harness over a directory of instance documents.

use std::fs;
use std::path::Path;
use std::time::Instant;

use modsched::verify::{verify_makespan, verify_partition};
use serde::Serialize;

use crate::commands::{solve, Failure};
use crate::doc::{parse_document, Document, InputError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub id: String,
    pub kind: String,
    pub verdict: String,
    pub verified: bool,
    /// Fastest of the repetitions, in milliseconds.
    pub wall_ms: f64,
    pub peak_states: usize,
    pub layers: usize,
}

fn bench_one(id: String, text: &str, repetitions: usize) -> BenchRow {
    let mut row = BenchRow {
        id,
        kind: String::new(),
        verdict: String::new(),
        verified: false,
        wall_ms: 0.0,
        peak_states: 0,
        layers: 0,
    };
    let doc = match parse_document(text) {
        Ok(doc) => doc,
        Err(e) => {
            row.verdict = format!("input error: {e}");
            return row;
        }
    };
    row.kind = doc.kind().name().to_string();
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repetitions {
        let start = Instant::now();
        let result = solve(doc.kind(), &doc, None, false);
        best = best.min(start.elapsed().as_secs_f64() * 1e3);
        last = Some(result);
    }
    row.wall_ms = (best * 1e3).round() / 1e3;
    let outcome = match last.expect("at least one repetition") {
        Ok(outcome) => outcome,
        Err(Failure::Input(e)) => {
            row.verdict = format!("input error: {e}");
            return row;
        }
        Err(Failure::Solver(e)) => {
            row.verdict = format!("error: {e}");
            return row;
        }
    };
    let document = &outcome.document;
    row.peak_states = document["stats"]["peak_states"].as_u64().unwrap_or(0) as usize;
    row.layers = document["stats"]["layers"].as_u64().unwrap_or(0) as usize;
    let rows = || -> Option<modsched::Assignment> {
        let rows = serde_json::from_value(document["assignment"].clone()).ok()?;
        modsched::Assignment::from_rows(rows).ok()
    };
    (row.verdict, row.verified) = match &doc {
        Document::Partition(inst, _) => match rows() {
            Some(asg) => {
                let ok = verify_partition(inst, &asg)
                    .map(|r| r.passed())
                    .unwrap_or(false);
                ("feasible".into(), ok)
            }
            None => ("infeasible".into(), true),
        },
        Document::Scheduling(inst, _) => {
            let optimal = document["optimal"].as_str().unwrap_or_default().to_string();
            let ok = rows()
                .and_then(|asg| verify_makespan(inst, &asg).ok())
                .is_some_and(|v| v.to_string() == optimal);
            (optimal, ok)
        }
        Document::Mcilp(doc) => {
            if document["feasible"] == serde_json::json!(true) {
                let ok = serde_json::from_value::<Vec<u64>>(document["x"].clone()).is_ok_and(|x| {
                    match doc.sense {
                        modsched::oracle::RowSense::Equal => doc.instance.is_feasible_equality(&x),
                        modsched::oracle::RowSense::AtMost => {
                            doc.instance.is_feasible_inequality(&x)
                        }
                    }
                });
                (format!("objective {}", document["objective"]), ok)
            } else {
                ("infeasible".into(), true)
            }
        }
    };
    row
}

/// Solves every `*.json` file in `dir`, in file-name order.
pub fn run_bench(dir: &Path, repetitions: usize) -> Result<Vec<BenchRow>, InputError> {
    if repetitions == 0 {
        return Err(InputError("field `repetitions`: must be at least 1".into()));
    }
    let entries = fs::read_dir(dir)
        .map_err(|e| InputError(format!("corpus directory {}: {e}", dir.display())))?;
    let mut files: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut rows = Vec::with_capacity(files.len());
    for path in files {
        let id = path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let text = fs::read_to_string(&path)
            .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        rows.push(bench_one(id, &text, repetitions));
    }
    Ok(rows)
}

pub fn render_rows(rows: &[BenchRow], format: Format) -> String {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            if rows.is_empty() {
                writer
                    .write_record([
                        "id",
                        "kind",
                        "verdict",
                        "verified",
                        "wall_ms",
                        "peak_states",
                        "layers",
                    ])
                    .expect("write to memory");
            }
            for row in rows {
                writer.serialize(row).expect("write to memory");
            }
            String::from_utf8(writer.into_inner().expect("flush to memory")).expect("CSV is UTF-8")
        }
    }
}
