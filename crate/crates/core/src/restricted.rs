//! Balancing restricted instances (`p_ij` in `{p_j, inf}`).
//!
//! With `w = p_max`, `eps = k_min / m` and `L = W / m` (where `W = sum_j p_j`)
//! machines split into underloaded (`<= L/eps`), middle and overloaded
//! (`> w + L/eps`). Once no job can move to a machine where it would finish
//! strictly earlier, no machine is overloaded, so the makespan is at most
//! `p_max + L/eps`.
//!
//! Two strategies reach that state:
//!
//! * [`Strategy::Descent`]: repeatedly apply the best single-job move. The
//!   sum of squared loads drops by at least 2 per move, which bounds the
//!   number of moves by `W^2 / 2`.
//! * [`Strategy::PathPush`]: push jobs along shortest overloaded-to-
//!   underloaded paths of the assignment graph, then finish with descent.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{Assignment, Instance, Time};
use crate::rational::{int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestrictedError {
    #[error("instance is not restricted: job {job} has distinct finite times")]
    NotRestricted { job: usize },
    #[error("job {job} cannot be pushed to machine {machine}")]
    IllegalPush { job: usize, machine: usize },
    #[error("move limit {limit} exceeded")]
    MoveLimitExceeded { limit: u128 },
    #[error("move of job {job} did not decrease the sum of squared loads by 2")]
    PotentialNotDecreasing { job: usize },
    #[error("overloaded machine {machine} has no path to an underloaded machine")]
    NoAugmentingPath { machine: usize },
    #[error("terminal makespan {makespan} exceeds p_max + L/eps = {bound}")]
    BoundViolated { makespan: Time, bound: Rational },
    #[error("terminal assignment still has overloaded machines {machines:?}")]
    Overloaded { machines: Vec<usize> },
}

fn ensure_restricted(inst: &Instance) -> Result<(), RestrictedError> {
    for j in 0..inst.jobs() {
        let p = inst.size(j);
        if inst.row(j).iter().flatten().any(|&t| t != p) {
            return Err(RestrictedError::NotRestricted { job: j });
        }
    }
    Ok(())
}

/// Largest job first, each onto the currently least-loaded machine it can
/// run on (lowest index among ties). The result is `p_max`-feasible.
pub fn initial_assignment(inst: &Instance) -> Assignment {
    let mut order: Vec<usize> = (0..inst.jobs()).collect();
    order.sort_by(|&a, &b| inst.size(b).cmp(&inst.size(a)).then(a.cmp(&b)));
    let mut loads = vec![0 as Time; inst.machines()];
    let mut machine = vec![0; inst.jobs()];
    for j in order {
        let target = inst
            .feasible_machines(j)
            .min_by_key(|&i| (loads[i], i))
            .expect("every job has a feasible machine");
        loads[target] += inst.size(j);
        machine[j] = target;
    }
    Assignment::from_vec_unchecked(machine)
}

/// Overloaded / middle / underloaded machines for parameters `w` and `delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedPartition {
    pub w: Time,
    pub delta: Rational,
    /// Load `> w + delta`.
    pub plus: Vec<usize>,
    /// `delta < load <= w + delta`.
    pub zero: Vec<usize>,
    /// Load `<= delta`.
    pub minus: Vec<usize>,
}

pub fn partition(inst: &Instance, a: &Assignment, w: Time, delta: Rational) -> RestrictedPartition {
    partition_loads(&inst.loads(a), w, delta)
}

fn partition_loads(loads: &[Time], w: Time, delta: Rational) -> RestrictedPartition {
    let high = int(w) + delta;
    let mut out = RestrictedPartition {
        w,
        delta,
        plus: Vec::new(),
        zero: Vec::new(),
        minus: Vec::new(),
    };
    for (i, &load) in loads.iter().enumerate() {
        let load = int(load);
        if load > high {
            out.plus.push(i);
        } else if load > delta {
            out.zero.push(i);
        } else {
            out.minus.push(i);
        }
    }
    out
}

/// Directed machine/job graph: arc `i -> j` iff job `j` sits on `i`, arc
/// `j -> i` iff `j` sits elsewhere and `p_ij <= w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentGraph {
    pub machine_jobs: Vec<Vec<usize>>,
    pub job_targets: Vec<Vec<usize>>,
}

pub fn build_assignment_graph(inst: &Instance, a: &Assignment, w: Time) -> AssignmentGraph {
    let mut machine_jobs = vec![Vec::new(); inst.machines()];
    let mut job_targets = vec![Vec::new(); inst.jobs()];
    for (j, targets) in job_targets.iter_mut().enumerate() {
        let home = a.machine_of(j);
        machine_jobs[home].push(j);
        *targets = (0..inst.machines())
            .filter(|&i| i != home && inst.is_legal(i, j, w))
            .collect();
    }
    AssignmentGraph {
        machine_jobs,
        job_targets,
    }
}

/// Alternating path `i_0 -> j_1 -> i_1 -> ... -> j_t -> i_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentingPath {
    /// `i_0 .. i_t`
    pub machines: Vec<usize>,
    /// `j_1 .. j_t`
    pub jobs: Vec<usize>,
}

/// Shortest path (breadth-first, all sources at once) from any machine in
/// `sources` to any machine in `sinks`.
pub fn path_exists(
    g: &AssignmentGraph,
    sources: &[usize],
    sinks: &[usize],
) -> Option<AugmentingPath> {
    let m = g.machine_jobs.len();
    let mut is_sink = vec![false; m];
    for &i in sinks {
        is_sink[i] = true;
    }
    // via[i] = (previous machine, job) on the BFS tree
    let mut via: Vec<Option<(usize, usize)>> = vec![None; m];
    let mut seen = vec![false; m];
    let mut job_seen = vec![false; g.job_targets.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(i) = queue.pop_front() {
        for &j in &g.machine_jobs[i] {
            if job_seen[j] {
                continue;
            }
            job_seen[j] = true;
            for &next in &g.job_targets[j] {
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                via[next] = Some((i, j));
                if is_sink[next] {
                    let mut machines = vec![next];
                    let mut jobs = Vec::new();
                    let mut cur = next;
                    while let Some((prev, job)) = via[cur] {
                        jobs.push(job);
                        machines.push(prev);
                        cur = prev;
                    }
                    machines.reverse();
                    jobs.reverse();
                    return Some(AugmentingPath { machines, jobs });
                }
                queue.push_back(next);
            }
        }
    }
    None
}

/// Moves each `j_k` of the path from `i_{k-1}` to `i_k`.
pub fn push_along_path(
    inst: &Instance,
    a: &Assignment,
    path: &AugmentingPath,
    w: Time,
) -> Result<Assignment, RestrictedError> {
    let mut out = a.clone();
    for (k, &job) in path.jobs.iter().enumerate() {
        let from = path.machines[k];
        let to = path.machines[k + 1];
        if a.machine_of(job) != from || from == to || !inst.is_legal(to, job, w) {
            return Err(RestrictedError::IllegalPush { job, machine: to });
        }
        out.set(job, to);
    }
    Ok(out)
}

/// A single-job move that strictly lowers the larger of the two loads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub job: usize,
    pub from: usize,
    pub to: usize,
    /// `load(from) - load(to) - p_j > 0`
    pub gain: Time,
}

/// Best move by gain; ties by lowest job, then lowest target machine.
pub fn improving_move(inst: &Instance, a: &Assignment) -> Option<Move> {
    best_move(inst, a, &inst.loads(a))
}

fn best_move(inst: &Instance, a: &Assignment, loads: &[Time]) -> Option<Move> {
    let mut best: Option<Move> = None;
    for j in 0..inst.jobs() {
        let from = a.machine_of(j);
        let p = inst.assigned_time(a, j);
        for (to, t) in inst.row(j).iter().enumerate() {
            let Some(q) = *t else { continue };
            if to == from || loads[from] <= loads[to] + q {
                continue;
            }
            let gain = loads[from] - loads[to] - q;
            // a restricted instance has q == p
            debug_assert_eq!(q, p);
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(Move {
                    job: j,
                    from,
                    to,
                    gain,
                });
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Strategy {
    #[default]
    Descent,
    PathPush,
}

/// Terminal schedule of [`solve_restricted`] with its certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedSolution {
    pub assignment: Assignment,
    pub makespan: Time,
    /// `p_max + W / k_min`
    pub bound: Rational,
    pub epsilon: Rational,
    pub average_load: Rational,
    pub k_min: usize,
    pub p_max: Time,
    pub total_size: Time,
    pub moves: u64,
    pub pushes: u64,
    /// Path pushing hit its iteration cap before clearing the overloaded set.
    pub push_cap_hit: bool,
}

pub fn solve_restricted(
    inst: &Instance,
    strategy: Strategy,
) -> Result<RestrictedSolution, RestrictedError> {
    ensure_restricted(inst)?;
    let p_max = inst.p_max();
    let total = inst.total_size();
    let k_min = inst.k_min();
    let m = inst.machines();
    // L / eps = (W / m) / (k / m) = W / k
    let delta = ratio(total as i128, k_min as i128);

    let mut a = initial_assignment(inst);
    let mut pushes = 0u64;
    let mut push_cap_hit = false;
    if strategy == Strategy::PathPush {
        let cap = (m as u64) * total;
        loop {
            let part = partition(inst, &a, p_max, delta);
            let Some(&first) = part.plus.first() else { break };
            if pushes >= cap {
                push_cap_hit = true;
                break;
            }
            let g = build_assignment_graph(inst, &a, p_max);
            let path = path_exists(&g, &part.plus, &part.minus)
                .ok_or(RestrictedError::NoAugmentingPath { machine: first })?;
            a = push_along_path(inst, &a, &path, p_max)?;
            pushes += 1;
        }
    }

    let moves = descend(inst, &mut a, total)?;

    let makespan = inst.makespan(&a);
    let bound = int(p_max) + delta;
    // makespan <= p_max + W/k  <=>  makespan k <= p_max k + W
    if (makespan as u128) * (k_min as u128) > (p_max as u128) * (k_min as u128) + total as u128 {
        return Err(RestrictedError::BoundViolated { makespan, bound });
    }
    let part = partition(inst, &a, p_max, delta);
    if !part.plus.is_empty() {
        return Err(RestrictedError::Overloaded {
            machines: part.plus,
        });
    }
    Ok(RestrictedSolution {
        assignment: a,
        makespan,
        bound,
        epsilon: inst.restricted_feasibility_factor(),
        average_load: inst.restricted_average_load(),
        k_min,
        p_max,
        total_size: total,
        moves,
        pushes,
        push_cap_hit,
    })
}

/// Best-response descent until no improving move is left. Returns the
/// number of moves.
fn descend(inst: &Instance, a: &mut Assignment, total: Time) -> Result<u64, RestrictedError> {
    let limit = (total as u128) * (total as u128) / 2 + 1;
    let mut loads = inst.loads(a);
    let mut moves = 0u64;
    while let Some(mv) = best_move(inst, a, &loads) {
        if moves as u128 >= limit {
            return Err(RestrictedError::MoveLimitExceeded { limit });
        }
        let p = inst.size(mv.job);
        let before = sq(loads[mv.from]) + sq(loads[mv.to]);
        loads[mv.from] -= p;
        loads[mv.to] += p;
        let after = sq(loads[mv.from]) + sq(loads[mv.to]);
        if after + 2 > before {
            return Err(RestrictedError::PotentialNotDecreasing { job: mv.job });
        }
        a.set(mv.job, mv.to);
        moves += 1;
    }
    Ok(moves)
}

fn sq(x: Time) -> u128 {
    (x as u128) * (x as u128)
}

/// Approximation certificate of a restricted instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioCertificate {
    /// `q = L / p_max`
    pub q: Rational,
    pub epsilon: Rational,
    /// `p_max + L/eps`, holds unconditionally.
    pub absolute_bound: Rational,
    /// `1 + q/eps`, only when `q < eps`.
    pub ratio: Option<Rational>,
    /// The certified ratio is at most 33/17, so it improves on
    /// `33/17 + delta` for every `delta > 0`.
    pub beats_33_17: bool,
}

pub const SVENSSON_RATIO: (i128, i128) = (33, 17);

pub fn ratio_bound(inst: &Instance) -> Result<RatioCertificate, RestrictedError> {
    ensure_restricted(inst)?;
    let p_max = inst.p_max();
    let total = inst.total_size() as i128;
    let k = inst.k_min() as i128;
    let epsilon = inst.restricted_feasibility_factor();
    let absolute_bound = int(p_max) + ratio(total, k);
    if p_max == 0 {
        return Ok(RatioCertificate {
            q: int(0),
            epsilon,
            absolute_bound,
            ratio: None,
            beats_33_17: false,
        });
    }
    let q = ratio(total, inst.machines() as i128 * p_max as i128);
    let ratio_value = (q < epsilon).then(|| int(1) + ratio(total, k * p_max as i128));
    let threshold = ratio(SVENSSON_RATIO.0, SVENSSON_RATIO.1);
    let beats_33_17 = ratio_value.is_some_and(|r| r <= threshold);
    Ok(RatioCertificate {
        q,
        epsilon,
        absolute_bound,
        ratio: ratio_value,
        beats_33_17,
    })
}
