//! Sub-machine packing and min-cost matching rounding of a fractional
//! assignment.
//!
//! Each machine `i` is split into `k_i = ceil(sum_j x_ij)` unit bins. The
//! fractions `x_ij` are poured into the bins in non-increasing order of
//! `p_ij`, a job spilling over into the next bin when the current one
//! fills. A min-cost matching of jobs to bins then picks one machine per
//! job. Because each bin's jobs are no longer than any job of the previous
//! bin, every machine ends up with load at most `T` plus its largest job.

use alloc::vec::Vec;

use thiserror::Error;

use crate::matching::{min_cost_left_saturating, WeightedEdge};
use crate::model::{Assignment, Instance, Time};
use crate::simplex::{FractionalAssignment, ZERO_TOL};

/// Slack when deciding that a bin is full or a fraction fits.
const FILL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoundingError {
    #[error("fractional assignment is {found:?} but the instance is {expected:?} (jobs, machines)")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("job {job} has positive weight on machine {machine}, which is not legal for it")]
    IllegalSupport { job: usize, machine: usize },
    #[error("no matching covers every job; the packing is inconsistent")]
    NoPerfectMatching,
}

/// One packed piece of a job inside a bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub job: usize,
    pub fraction: f64,
}

/// `bins[i][s]` lists the pieces in bin `s` of machine `i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubMachinePacking {
    pub bins: Vec<Vec<Vec<Piece>>>,
}

impl SubMachinePacking {
    pub fn bin_count(&self, machine: usize) -> usize {
        self.bins[machine].len()
    }

    pub fn total_bins(&self) -> usize {
        self.bins.iter().map(Vec::len).sum()
    }
}

/// Packs the fractions of `x` into unit bins, machine by machine.
///
/// Jobs are taken in non-increasing `p_ij`, ties by ascending job index.
/// Fractions below the zero tolerance are ignored.
pub fn pack_bins(
    inst: &Instance,
    x: &FractionalAssignment,
) -> Result<SubMachinePacking, RoundingError> {
    check_shape(inst, x)?;
    let mut bins = Vec::with_capacity(inst.machines());
    for i in 0..inst.machines() {
        let mut order: Vec<(usize, Time, f64)> = Vec::new();
        for j in 0..inst.jobs() {
            let v = x.get(j, i);
            if v >= ZERO_TOL {
                let p = inst
                    .time(j, i)
                    .ok_or(RoundingError::IllegalSupport { job: j, machine: i })?;
                order.push((j, p, v));
            }
        }
        order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

        let mut machine_bins: Vec<Vec<Piece>> = Vec::new();
        let mut space = 0.0f64;
        for (job, _, value) in order {
            let mut rest = value;
            while rest > FILL_TOL {
                if space <= FILL_TOL {
                    machine_bins.push(Vec::new());
                    space = 1.0;
                }
                let bin = machine_bins.last_mut().expect("a bin was just opened");
                if rest <= space + FILL_TOL {
                    bin.push(Piece {
                        job,
                        fraction: rest,
                    });
                    space -= rest;
                    rest = 0.0;
                } else {
                    bin.push(Piece {
                        job,
                        fraction: space,
                    });
                    rest -= space;
                    space = 0.0;
                }
            }
        }
        bins.push(machine_bins);
    }
    Ok(SubMachinePacking { bins })
}

fn check_shape(inst: &Instance, x: &FractionalAssignment) -> Result<(), RoundingError> {
    if x.jobs() != inst.jobs() || x.machines() != inst.machines() {
        return Err(RoundingError::Shape {
            expected: (inst.jobs(), inst.machines()),
            found: (x.jobs(), x.machines()),
        });
    }
    Ok(())
}

/// A bin node of the rounding graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubMachine {
    pub machine: usize,
    pub slot: usize,
}

/// Bipartite graph between jobs and bins; edge `(j, v)` carries `c_ij` and
/// exists iff a positive fraction of `x_ij` sits in bin `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingGraph {
    pub jobs: usize,
    pub sub_machines: Vec<SubMachine>,
    pub edges: Vec<WeightedEdge>,
}

pub fn build_rounding_graph(inst: &Instance, packing: &SubMachinePacking) -> RoundingGraph {
    let mut sub_machines = Vec::new();
    let mut edges = Vec::new();
    for (i, machine_bins) in packing.bins.iter().enumerate() {
        for (s, bin) in machine_bins.iter().enumerate() {
            let node = sub_machines.len();
            sub_machines.push(SubMachine {
                machine: i,
                slot: s,
            });
            for piece in bin {
                let cost = inst
                    .time(piece.job, i)
                    .expect("packed pieces sit on feasible machines");
                edges.push(WeightedEdge {
                    left: piece.job,
                    right: node,
                    cost: cost as i64,
                });
            }
        }
    }
    RoundingGraph {
        jobs: inst.jobs(),
        sub_machines,
        edges,
    }
}

/// Job-saturating matching of minimum total cost: `(bin per job, cost)`.
pub fn min_cost_perfect_matching(g: &RoundingGraph) -> Result<(Vec<usize>, i64), RoundingError> {
    min_cost_left_saturating(g.jobs, g.sub_machines.len(), &g.edges)
        .ok_or(RoundingError::NoPerfectMatching)
}

/// Rounds `x` to an integral assignment.
///
/// For `x` feasible for the LP with threshold `T`, the result has cost at
/// most the fractional cost and every machine's load without its largest job
/// is at most `T`.
pub fn round(
    inst: &Instance,
    x: &FractionalAssignment,
    t: Time,
) -> Result<Assignment, RoundingError> {
    check_shape(inst, x)?;
    for j in 0..inst.jobs() {
        for i in 0..inst.machines() {
            if x.get(j, i) >= ZERO_TOL && !inst.is_legal(i, j, t) {
                return Err(RoundingError::IllegalSupport { job: j, machine: i });
            }
        }
    }
    let packing = pack_bins(inst, x)?;
    let graph = build_rounding_graph(inst, &packing);
    let (mate, _) = min_cost_perfect_matching(&graph)?;
    let machines = mate
        .into_iter()
        .map(|v| graph.sub_machines[v].machine)
        .collect();
    Ok(Assignment::from_vec_unchecked(machines))
}

/// Load of `machine` minus its largest job.
pub fn load_without_largest(inst: &Instance, a: &Assignment, machine: usize) -> Time {
    let mut total = 0;
    let mut largest = 0;
    for j in a.jobs_on(machine) {
        let p = inst.assigned_time(a, j);
        total += p;
        largest = largest.max(p);
    }
    total - largest
}

/// Machines whose load minus their largest job exceeds `t`.
pub fn small_jobs_violations(inst: &Instance, a: &Assignment, t: Time) -> Vec<usize> {
    (0..inst.machines())
        .filter(|&i| load_without_largest(inst, a, i) > t)
        .collect()
}
