//! Instance and assignment files.
//!
//! An instance is a JSON object `{"m": 2, "n": 1, "p": [[3, null]]}` with one
//! row per job and `null` for a machine the job cannot run on. An assignment
//! is a JSON array of 1-based machine indices, one per job.

use serde_json::Value;
use thiserror::Error;
use tightspan_core::rational::Rational;
use tightspan_core::{Assignment, AssignmentError, Instance, InstanceError, MAX_TIME};

/// Rows and columns are 1-based, matching how the files read.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("row {row}, column {column}: {message}")]
    Entry {
        row: usize,
        column: usize,
        message: String,
    },
    #[error("assignment entry {index}: {message}")]
    Assignment { index: usize, message: String },
}

fn syntax(e: serde_json::Error) -> ParseError {
    ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn count(obj: &serde_json::Map<String, Value>, field: &'static str) -> Result<usize, ParseError> {
    let value = obj.get(field).ok_or(ParseError::Field {
        field,
        message: "missing".into(),
    })?;
    value
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| ParseError::Field {
            field,
            message: format!("expected a non-negative integer, found {value}"),
        })
}

pub fn parse_instance(bytes: &[u8]) -> Result<Instance, ParseError> {
    let value: Value = serde_json::from_slice(bytes).map_err(syntax)?;
    let obj = value.as_object().ok_or(ParseError::Field {
        field: "<root>",
        message: "expected an object".into(),
    })?;
    let m = count(obj, "m")?;
    let n = count(obj, "n")?;
    if m == 0 {
        return Err(ParseError::Field {
            field: "m",
            message: "at least one machine is required".into(),
        });
    }
    let rows = obj
        .get("p")
        .and_then(Value::as_array)
        .ok_or(ParseError::Field {
            field: "p",
            message: "expected an array of rows".into(),
        })?;
    if rows.len() != n {
        return Err(ParseError::Field {
            field: "p",
            message: format!("{} rows but n = {n}", rows.len()),
        });
    }
    let mut matrix = Vec::with_capacity(n);
    for (j, row) in rows.iter().enumerate() {
        let row_no = j + 1;
        let entries = row.as_array().ok_or(ParseError::Row {
            row: row_no,
            message: "expected an array".into(),
        })?;
        if entries.len() != m {
            return Err(ParseError::Row {
                row: row_no,
                message: format!("{} entries but m = {m}", entries.len()),
            });
        }
        let mut parsed = Vec::with_capacity(m);
        for (i, entry) in entries.iter().enumerate() {
            let time = match entry {
                Value::Null => None,
                v => match v.as_u64() {
                    Some(t) if (1..=MAX_TIME).contains(&t) => Some(t),
                    _ => {
                        return Err(ParseError::Entry {
                            row: row_no,
                            column: i + 1,
                            message: format!("expected null or an integer in [1, {MAX_TIME}], found {v}"),
                        })
                    }
                },
            };
            parsed.push(time);
        }
        matrix.push(parsed);
    }
    Instance::new(m, matrix).map_err(|e| match e {
        InstanceError::NoFeasibleMachine { job } => ParseError::Row {
            row: job + 1,
            message: "no feasible machine".into(),
        },
        other => ParseError::Field {
            field: "p",
            message: other.to_string(),
        },
    })
}

/// One row per line, so instance files diff cleanly.
pub fn emit_instance(inst: &Instance) -> String {
    let mut out = format!("{{\"m\": {}, \"n\": {}, \"p\": [", inst.machines(), inst.jobs());
    for (j, row) in inst.rows().enumerate() {
        out.push_str(if j == 0 { "\n  " } else { ",\n  " });
        out.push_str(&serde_json::to_string(row).expect("plain integers serialize"));
    }
    if inst.jobs() > 0 {
        out.push('\n');
    }
    out.push_str("]}\n");
    out
}

pub fn parse_assignment(bytes: &[u8], inst: &Instance) -> Result<Assignment, ParseError> {
    let raw: Vec<Value> = serde_json::from_slice(bytes).map_err(syntax)?;
    let mut machines = Vec::with_capacity(raw.len());
    for (k, v) in raw.iter().enumerate() {
        match v.as_u64() {
            Some(i) if i >= 1 => machines.push(i as usize - 1),
            _ => {
                return Err(ParseError::Assignment {
                    index: k + 1,
                    message: format!("expected a machine index >= 1, found {v}"),
                })
            }
        }
    }
    Assignment::new(inst, machines).map_err(|e| match e {
        AssignmentError::Length { .. } => ParseError::Field {
            field: "<assignment>",
            message: e.to_string(),
        },
        AssignmentError::MachineOutOfRange { job, machine, machines } => ParseError::Assignment {
            index: job + 1,
            message: format!("machine {} out of range (m = {machines})", machine + 1),
        },
        AssignmentError::Infeasible { job, machine } => ParseError::Assignment {
            index: job + 1,
            message: format!("job cannot run on machine {}", machine + 1),
        },
    })
}

pub fn emit_assignment(a: &Assignment) -> String {
    let one_based: Vec<usize> = a.as_slice().iter().map(|&i| i + 1).collect();
    let mut out = serde_json::to_string(&one_based).expect("integers serialize");
    out.push('\n');
    out
}


/// `"7"`, `"-3"` or `"10/3"`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let bad = || format!("expected an integer or num/den, found `{s}`");
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: i128 = num.parse().map_err(|_| bad())?;
    let den: i128 = den.parse().map_err(|_| bad())?;
    if den == 0 {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Rational::new(num, den))
}
