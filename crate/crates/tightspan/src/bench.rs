//! Batch evaluation of instance files, concurrently, with rows in a fixed
//! order.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;
use tightspan_core::balance::UmOutcome;
use tightspan_core::oracle::optimal_makespan;
use tightspan_core::restricted::{ratio_bound, solve_restricted, Strategy};
use tightspan_core::Instance;

use crate::driver::auto_drive_general;
use crate::format::{parse_instance, ParseError};
use crate::report::{FailedRow, Mode, Row, SolveReport};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A named instance, or the reason its file could not be parsed.
#[derive(Debug, Clone)]
pub struct BenchInput {
    pub id: String,
    pub instance: Result<Instance, ParseError>,
}

/// Every `*.json` file of `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<BenchInput>, BenchError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| BenchError::Io { path, source }
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.is_file())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let bytes = std::fs::read(&path).map_err(io(&path))?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(BenchInput {
                id,
                instance: parse_instance(&bytes),
            })
        })
        .collect()
}

fn failed(id: &str, mode: Mode, error: impl ToString) -> Row {
    Row::Failed(FailedRow {
        id: id.to_string(),
        mode,
        error: error.to_string(),
    })
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Rows for one instance, in `general, restricted, oracle` order. When the
/// oracle is among the modes its optimum is attached to the other rows.
pub fn evaluate(id: &str, inst: &Instance, modes: &[Mode]) -> Vec<Row> {
    let mut modes = modes.to_vec();
    modes.sort();
    modes.dedup();

    let oracle = modes.contains(&Mode::Oracle).then(|| {
        let start = Instant::now();
        optimal_makespan(inst).map(|r| (SolveReport::oracle(id, inst, &r), elapsed_ms(start)))
    });
    let opt = match &oracle {
        Some(Ok((row, _))) => row.opt,
        _ => None,
    };
    let attach = |row: SolveReport| match opt {
        Some(o) => row.with_opt(o),
        None => row,
    };

    let mut rows = Vec::new();
    for mode in modes {
        let row = match mode {
            Mode::General => {
                let start = Instant::now();
                match auto_drive_general(inst) {
                    Ok(run) => match &run.outcome {
                        UmOutcome::Scheduled(s) => Row::Solved(attach(
                            SolveReport::general(id, inst, run.t, run.l, s)
                                .with_wall_ms(elapsed_ms(start)),
                        )),
                        UmOutcome::Infeasible { .. } => failed(id, mode, "LP infeasible"),
                    },
                    Err(e) => failed(id, mode, e),
                }
            }
            Mode::Restricted => {
                let start = Instant::now();
                match solve_restricted(inst, Strategy::Descent)
                    .and_then(|s| ratio_bound(inst).map(|c| (s, c)))
                {
                    Ok((s, cert)) => Row::Solved(attach(
                        SolveReport::restricted(id, inst, &s, &cert)
                            .with_wall_ms(elapsed_ms(start)),
                    )),
                    Err(e) => failed(id, mode, e),
                }
            }
            Mode::Oracle => match &oracle {
                Some(Ok((row, ms))) => Row::Solved(row.clone().with_wall_ms(*ms)),
                Some(Err(e)) => failed(id, mode, e),
                None => unreachable!("oracle result computed above"),
            },
        };
        rows.push(row);
    }
    rows
}

/// Evaluates all inputs in parallel; rows follow input order.
pub fn run(inputs: &[BenchInput], modes: &[Mode]) -> Vec<Row> {
    inputs
        .par_iter()
        .map(|input| match &input.instance {
            Ok(inst) => evaluate(&input.id, inst, modes),
            Err(e) => vec![failed(&input.id, modes.first().copied().unwrap_or(Mode::General), e)],
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
