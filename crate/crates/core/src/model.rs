//! Instance and assignment data model with exact load arithmetic.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::rational::{ratio, Rational};

/// Processing times and machine loads, in integer time units.
pub type Time = u64;

/// Largest admissible finite processing time.
pub const MAX_TIME: Time = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("instance must have at least one machine")]
    NoMachines,
    #[error("job {job} has {found} entries, expected {expected}")]
    RowLength {
        job: usize,
        expected: usize,
        found: usize,
    },
    #[error("job {job}, machine {machine}: processing time {value} outside [1, {MAX_TIME}]")]
    TimeOutOfRange {
        job: usize,
        machine: usize,
        value: Time,
    },
    #[error("job {job} has no feasible machine")]
    NoFeasibleMachine { job: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("assignment has {found} entries, instance has {expected} jobs")]
    Length { expected: usize, found: usize },
    #[error("job {job} mapped to machine {machine}, but only {machines} machines exist")]
    MachineOutOfRange {
        job: usize,
        machine: usize,
        machines: usize,
    },
    #[error("job {job} mapped to machine {machine} where it cannot run")]
    Infeasible { job: usize, machine: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("machine index {index} out of range (m = {machines})")]
pub struct MachineIndexError {
    pub index: usize,
    pub machines: usize,
}

/// A job x machine matrix of processing times. `None` marks a machine the
/// job cannot run on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    machines: usize,
    jobs: usize,
    // row-major, one row of `machines` entries per job
    times: Vec<Option<Time>>,
}

impl Instance {
    /// Builds an instance from one row per job.
    pub fn new(machines: usize, rows: Vec<Vec<Option<Time>>>) -> Result<Self, InstanceError> {
        if machines == 0 {
            return Err(InstanceError::NoMachines);
        }
        let jobs = rows.len();
        let mut times = Vec::with_capacity(jobs * machines);
        for (job, row) in rows.into_iter().enumerate() {
            if row.len() != machines {
                return Err(InstanceError::RowLength {
                    job,
                    expected: machines,
                    found: row.len(),
                });
            }
            let mut any = false;
            for (machine, entry) in row.iter().enumerate() {
                if let Some(value) = *entry {
                    if value == 0 || value > MAX_TIME {
                        return Err(InstanceError::TimeOutOfRange {
                            job,
                            machine,
                            value,
                        });
                    }
                    any = true;
                }
            }
            if !any {
                return Err(InstanceError::NoFeasibleMachine { job });
            }
            times.extend(row);
        }
        Ok(Self {
            machines,
            jobs,
            times,
        })
    }

    /// Restricted instance: job `j` has size `sizes[j]` on every machine in
    /// `feasible[j]` and cannot run elsewhere.
    pub fn restricted(
        machines: usize,
        sizes: &[Time],
        feasible: &[Vec<usize>],
    ) -> Result<Self, InstanceError> {
        let rows = sizes
            .iter()
            .zip(feasible)
            .map(|(&p, set)| {
                let mut row = vec![None; machines];
                for &i in set {
                    if i < machines {
                        row[i] = Some(p);
                    }
                }
                row
            })
            .collect();
        Self::new(machines, rows)
    }

    /// Every job runs everywhere with the same size.
    pub fn identical(machines: usize, sizes: &[Time]) -> Result<Self, InstanceError> {
        let rows = sizes.iter().map(|&p| vec![Some(p); machines]).collect();
        Self::new(machines, rows)
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    /// Processing time of `job` on `machine`, `None` if infeasible.
    #[inline]
    pub fn time(&self, job: usize, machine: usize) -> Option<Time> {
        self.times[job * self.machines + machine]
    }

    pub fn row(&self, job: usize) -> &[Option<Time>] {
        &self.times[job * self.machines..(job + 1) * self.machines]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Option<Time>]> {
        self.times.chunks(self.machines)
    }

    /// Machines where `job` can run at all.
    pub fn feasible_machines(&self, job: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(job)
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|_| i))
    }

    /// Number of machines with a finite time for `job`.
    pub fn feasible_count(&self, job: usize) -> usize {
        self.row(job).iter().filter(|t| t.is_some()).count()
    }

    /// Smallest finite processing time of `job`.
    pub fn min_time(&self, job: usize) -> Time {
        self.row(job)
            .iter()
            .flatten()
            .copied()
            .min()
            .expect("every job has a feasible machine")
    }

    /// `max_j min_i p_ij`, a lower bound on any makespan. 0 with no jobs.
    pub fn max_min_time(&self) -> Time {
        (0..self.jobs).map(|j| self.min_time(j)).max().unwrap_or(0)
    }

    /// `sum_j min_i p_ij`.
    pub fn total_min_time(&self) -> Time {
        (0..self.jobs).map(|j| self.min_time(j)).sum()
    }

    /// True iff in every row all finite entries are equal.
    pub fn is_restricted(&self) -> bool {
        self.rows().all(|row| {
            let mut finite = row.iter().flatten();
            match finite.next() {
                Some(first) => finite.all(|t| t == first),
                None => true,
            }
        })
    }

    /// Size `p_j` of a job in a restricted instance (its common finite time).
    pub fn size(&self, job: usize) -> Time {
        self.min_time(job)
    }

    /// `p_max`: the largest job size of a restricted instance.
    pub fn p_max(&self) -> Time {
        self.max_min_time()
    }

    /// `W = sum_j p_j` for restricted instances.
    pub fn total_size(&self) -> Time {
        self.total_min_time()
    }

    /// `S = sum_j |{i : p_ij finite}|`.
    pub fn feasible_pairs(&self) -> usize {
        self.times.iter().filter(|t| t.is_some()).count()
    }

    /// Smallest number of machines any job can run on (`k_min`), ignoring
    /// thresholds. Equals `m` when there are no jobs.
    pub fn k_min(&self) -> usize {
        (0..self.jobs)
            .map(|j| self.feasible_count(j))
            .min()
            .unwrap_or(self.machines)
    }

    /// Machine `machine` is legal for `job` under threshold `t`.
    #[inline]
    pub fn is_legal(&self, machine: usize, job: usize, t: Time) -> bool {
        matches!(self.time(job, machine), Some(p) if p <= t)
    }

    /// Number of legal machines for `job` under threshold `t`.
    pub fn legal_count(&self, job: usize, t: Time) -> usize {
        (0..self.machines)
            .filter(|&i| self.is_legal(i, job, t))
            .count()
    }

    /// `k_min(t) = min_j |{i legal for j}|`.
    pub fn legal_k_min(&self, t: Time) -> usize {
        (0..self.jobs)
            .map(|j| self.legal_count(j, t))
            .min()
            .unwrap_or(self.machines)
    }

    /// Feasibility factor `eps(t) = k_min(t) / m`; zero if some job has no
    /// legal machine under `t`.
    pub fn feasibility_factor(&self, t: Time) -> Rational {
        ratio(self.legal_k_min(t) as i128, self.machines as i128)
    }

    /// Load of `machine` under `a`.
    pub fn load(&self, a: &Assignment, machine: usize) -> Result<Time, MachineIndexError> {
        if machine >= self.machines {
            return Err(MachineIndexError {
                index: machine,
                machines: self.machines,
            });
        }
        Ok(a.jobs_on(machine)
            .map(|j| self.assigned_time(a, j))
            .sum())
    }

    /// All machine loads.
    pub fn loads(&self, a: &Assignment) -> Vec<Time> {
        let mut loads = vec![0; self.machines];
        for (j, &i) in a.as_slice().iter().enumerate() {
            loads[i] += self.assigned_time(a, j);
        }
        loads
    }

    pub fn makespan(&self, a: &Assignment) -> Time {
        self.loads(a).into_iter().max().unwrap_or(0)
    }

    /// Total processing time `sum_j p_{a(j), j}`.
    pub fn total_load(&self, a: &Assignment) -> Time {
        (0..self.jobs).map(|j| self.assigned_time(a, j)).sum()
    }

    /// Average machine load, exactly.
    pub fn average_load(&self, a: &Assignment) -> Rational {
        ratio(self.total_load(a) as i128, self.machines as i128)
    }

    /// Average load of any schedule of a restricted instance, `W / m`.
    pub fn restricted_average_load(&self) -> Rational {
        ratio(self.total_size() as i128, self.machines as i128)
    }

    /// Feasibility factor of a restricted instance, `k_min / m`.
    pub fn restricted_feasibility_factor(&self) -> Rational {
        ratio(self.k_min() as i128, self.machines as i128)
    }

    /// Processing time of `job` on the machine `a` puts it on.
    #[inline]
    pub fn assigned_time(&self, a: &Assignment, job: usize) -> Time {
        self.time(job, a.machine_of(job))
            .expect("assignment places jobs on feasible machines")
    }

    /// Largest job on `machine` (lowest index among equals), if any.
    pub fn largest_job(&self, a: &Assignment, machine: usize) -> Option<usize> {
        let mut best: Option<(usize, Time)> = None;
        for j in a.jobs_on(machine) {
            let p = self.assigned_time(a, j);
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((j, p));
            }
        }
        best.map(|(j, _)| j)
    }
}

/// Total map from jobs to machines, valid for a particular instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    machine: Vec<usize>,
}

impl Assignment {
    /// Validates that every job is mapped to a machine where it can run.
    pub fn new(inst: &Instance, machine: Vec<usize>) -> Result<Self, AssignmentError> {
        if machine.len() != inst.jobs() {
            return Err(AssignmentError::Length {
                expected: inst.jobs(),
                found: machine.len(),
            });
        }
        for (job, &i) in machine.iter().enumerate() {
            if i >= inst.machines() {
                return Err(AssignmentError::MachineOutOfRange {
                    job,
                    machine: i,
                    machines: inst.machines(),
                });
            }
            if inst.time(job, i).is_none() {
                return Err(AssignmentError::Infeasible { job, machine: i });
            }
        }
        Ok(Self { machine })
    }

    /// Caller guarantees validity; used by solvers that only ever move jobs
    /// to feasible machines.
    pub(crate) fn from_vec_unchecked(machine: Vec<usize>) -> Self {
        Self { machine }
    }

    #[inline]
    pub fn machine_of(&self, job: usize) -> usize {
        self.machine[job]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.machine
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.machine
    }

    pub fn len(&self) -> usize {
        self.machine.len()
    }

    pub fn is_empty(&self) -> bool {
        self.machine.is_empty()
    }

    /// Jobs currently on `machine`, ascending.
    pub fn jobs_on(&self, machine: usize) -> impl Iterator<Item = usize> + '_ {
        self.machine
            .iter()
            .enumerate()
            .filter_map(move |(j, &i)| (i == machine).then_some(j))
    }

    /// Every job sits on a machine where its time is at most `w`.
    pub fn is_w_feasible(&self, inst: &Instance, w: Time) -> bool {
        self.machine
            .iter()
            .enumerate()
            .all(|(j, &i)| inst.is_legal(i, j, w))
    }

    pub(crate) fn set(&mut self, job: usize, machine: usize) {
        self.machine[job] = machine;
    }
}
