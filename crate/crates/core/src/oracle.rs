//! Exact reference answers for small instances by branch and bound.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{Assignment, Instance, Time};
use crate::rational::{floor, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_jobs: usize,
    pub max_machines: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_jobs: 12,
            max_machines: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance with {jobs} jobs on {machines} machines exceeds the oracle limit of {max_jobs} jobs on {max_machines} machines")]
    LimitExceeded {
        jobs: usize,
        machines: usize,
        max_jobs: usize,
        max_machines: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub opt_makespan: Time,
    /// An assignment attaining `opt_makespan`.
    pub witness: Assignment,
    pub nodes_explored: u64,
}

fn check_limits(inst: &Instance, limits: OracleLimits) -> Result<(), OracleError> {
    if inst.jobs() > limits.max_jobs || inst.machines() > limits.max_machines {
        return Err(OracleError::LimitExceeded {
            jobs: inst.jobs(),
            machines: inst.machines(),
            max_jobs: limits.max_jobs,
            max_machines: limits.max_machines,
        });
    }
    Ok(())
}

/// Jobs by non-increasing minimum time, ties by index.
fn job_order(inst: &Instance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..inst.jobs()).collect();
    order.sort_by(|&a, &b| inst.min_time(b).cmp(&inst.min_time(a)).then(a.cmp(&b)));
    order
}

pub fn optimal_makespan(inst: &Instance) -> Result<OracleResult, OracleError> {
    optimal_makespan_with(inst, OracleLimits::default())
}

pub fn optimal_makespan_with(
    inst: &Instance,
    limits: OracleLimits,
) -> Result<OracleResult, OracleError> {
    check_limits(inst, limits)?;
    let order = job_order(inst);
    // suffix sums of minimum times along the branching order
    let mut rest_min = vec![0 as Time; order.len() + 1];
    for k in (0..order.len()).rev() {
        rest_min[k] = rest_min[k + 1] + inst.min_time(order[k]);
    }
    let mut search = MinMakespan {
        inst,
        order: &order,
        rest_min: &rest_min,
        floor: inst.max_min_time(),
        loads: vec![0; inst.machines()],
        current: vec![0; inst.jobs()],
        best: Time::MAX,
        best_assignment: Vec::new(),
        nodes: 0,
    };
    search.dfs(0, 0, 0);
    Ok(OracleResult {
        opt_makespan: search.best,
        witness: Assignment::from_vec_unchecked(search.best_assignment),
        nodes_explored: search.nodes,
    })
}

struct MinMakespan<'a> {
    inst: &'a Instance,
    order: &'a [usize],
    rest_min: &'a [Time],
    floor: Time,
    loads: Vec<Time>,
    current: Vec<usize>,
    best: Time,
    best_assignment: Vec<usize>,
    nodes: u64,
}

impl MinMakespan<'_> {
    fn dfs(&mut self, depth: usize, makespan: Time, total: Time) {
        self.nodes += 1;
        if depth == self.order.len() {
            if makespan < self.best {
                self.best = makespan;
                self.best_assignment = self.current.clone();
            }
            return;
        }
        let m = self.loads.len() as Time;
        let average = (total + self.rest_min[depth]).div_ceil(m);
        if makespan.max(average).max(self.floor) >= self.best {
            return;
        }
        let job = self.order[depth];
        for i in 0..self.loads.len() {
            let Some(p) = self.inst.time(job, i) else { continue };
            let load = self.loads[i] + p;
            if load >= self.best {
                continue;
            }
            self.loads[i] = load;
            self.current[job] = i;
            self.dfs(depth + 1, makespan.max(load), total + p);
            self.loads[i] -= p;
            if self.best == self.floor {
                return;
            }
        }
    }
}

/// An assignment with makespan at most `t` and total processing time at
/// most `m * l` (integral loads make this `floor(m l)`), if one exists.
pub fn schedule_exists(
    inst: &Instance,
    t: Time,
    l: Rational,
) -> Result<Option<Assignment>, OracleError> {
    schedule_exists_with(inst, t, l, OracleLimits::default())
}

pub fn schedule_exists_with(
    inst: &Instance,
    t: Time,
    l: Rational,
    limits: OracleLimits,
) -> Result<Option<Assignment>, OracleError> {
    check_limits(inst, limits)?;
    let budget = floor(&(l * inst.machines() as i128));
    if budget < 0 {
        return Ok(None);
    }
    let order = job_order(inst);
    // cheapest legal time of each job under t
    let mut rest_min = vec![0i128; order.len() + 1];
    for k in (0..order.len()).rev() {
        let job = order[k];
        let cheapest = inst.row(job).iter().flatten().filter(|&&p| p <= t).min();
        match cheapest {
            Some(&p) => rest_min[k] = rest_min[k + 1] + p as i128,
            None => return Ok(None),
        }
    }
    let mut search = Bounded {
        inst,
        order: &order,
        rest_min: &rest_min,
        t,
        budget,
        loads: vec![0; inst.machines()],
        current: vec![0; inst.jobs()],
    };
    Ok(search
        .dfs(0, 0)
        .then(|| Assignment::from_vec_unchecked(search.current)))
}

struct Bounded<'a> {
    inst: &'a Instance,
    order: &'a [usize],
    rest_min: &'a [i128],
    t: Time,
    budget: i128,
    loads: Vec<Time>,
    current: Vec<usize>,
}

impl Bounded<'_> {
    fn dfs(&mut self, depth: usize, total: i128) -> bool {
        if total + self.rest_min[depth] > self.budget {
            return false;
        }
        if depth == self.order.len() {
            return true;
        }
        let job = self.order[depth];
        for i in 0..self.loads.len() {
            let Some(p) = self.inst.time(job, i) else { continue };
            if self.loads[i] + p > self.t {
                continue;
            }
            self.loads[i] += p;
            self.current[job] = i;
            if self.dfs(depth + 1, total + p as i128) {
                return true;
            }
            self.loads[i] -= p;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn brute_force(inst: &Instance) -> Time {
        let (n, m) = (inst.jobs(), inst.machines());
        let mut best = Time::MAX;
        let mut code = vec![0usize; n];
        loop {
            let mut loads = vec![0; m];
            let mut ok = true;
            for (j, &i) in code.iter().enumerate() {
                match inst.time(j, i) {
                    Some(p) => loads[i] += p,
                    None => ok = false,
                }
            }
            if ok {
                best = best.min(loads.into_iter().max().unwrap_or(0));
            }
            let mut k = 0;
            while k < n && code[k] == m - 1 {
                code[k] = 0;
                k += 1;
            }
            if k == n {
                return best;
            }
            code[k] += 1;
        }
    }

    #[test]
    fn small_examples() {
        let inst = Instance::identical(2, &[3, 3, 2, 2, 2]).unwrap();
        let r = optimal_makespan(&inst).unwrap();
        assert_eq!(r.opt_makespan, 6);
        assert_eq!(inst.makespan(&r.witness), 6);

        let inst = Instance::new(
            2,
            vec![vec![Some(2), Some(5)], vec![Some(4), Some(1)], vec![Some(3), None]],
        )
        .unwrap();
        let r = optimal_makespan(&inst).unwrap();
        assert_eq!(r.opt_makespan, 5);
        assert!(Assignment::new(&inst, r.witness.into_vec()).is_ok());
    }

    #[test]
    fn spec_examples() {
        let inst = Instance::identical(2, &[1, 1]).unwrap();
        assert_eq!(optimal_makespan(&inst).unwrap().opt_makespan, 1);
        let inst = Instance::identical(1, &[4, 5, 6]).unwrap();
        assert_eq!(optimal_makespan(&inst).unwrap().opt_makespan, 15);
        let inst = Instance::identical(4, &[10, 2, 2, 2]).unwrap();
        assert_eq!(optimal_makespan(&inst).unwrap().opt_makespan, 10);

        let one = Instance::identical(1, &[3, 4]).unwrap();
        assert!(schedule_exists(&one, 7, int(7)).unwrap().is_some());
        let inst = Instance::new(2, vec![vec![Some(2), Some(4)], vec![Some(3), Some(2)]]).unwrap();
        assert!(schedule_exists(&inst, 1, int(10)).unwrap().is_none());
        let a = schedule_exists(&inst, 3, int(2)).unwrap().unwrap();
        assert_eq!(a.as_slice(), &[0, 1]);
    }

    #[test]
    fn empty_instance() {
        let inst = Instance::new(2, vec![]).unwrap();
        let r = optimal_makespan(&inst).unwrap();
        assert_eq!(r.opt_makespan, 0);
        assert!(r.witness.is_empty());
    }

    #[test]
    fn limits() {
        let inst = Instance::identical(5, &[1]).unwrap();
        assert!(matches!(
            optimal_makespan(&inst),
            Err(OracleError::LimitExceeded { machines: 5, .. })
        ));
        let inst = Instance::identical(1, &[1; 13]).unwrap();
        assert!(optimal_makespan(&inst).is_err());
        let wide = OracleLimits {
            max_jobs: 13,
            max_machines: 1,
        };
        assert_eq!(optimal_makespan_with(&inst, wide).unwrap().opt_makespan, 13);
    }

    #[test]
    fn matches_brute_force() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = |bound: u64| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % bound
        };
        for _ in 0..200 {
            let m = 1 + next(3) as usize;
            let n = next(7) as usize;
            let rows = (0..n)
                .map(|_| {
                    let mut row: Vec<Option<Time>> = (0..m)
                        .map(|_| (next(4) != 0).then(|| 1 + next(9)))
                        .collect();
                    if row.iter().all(Option::is_none) {
                        row[0] = Some(1 + next(9));
                    }
                    row
                })
                .collect();
            let inst = Instance::new(m, rows).unwrap();
            let r = optimal_makespan(&inst).unwrap();
            assert_eq!(r.opt_makespan, brute_force(&inst));
            assert_eq!(inst.makespan(&r.witness), r.opt_makespan);
        }
    }

    #[test]
    fn budgeted_existence() {
        // job 0 costs 1 on machine 0 or 4 on machine 1; job 1 costs 1 or 4
        let inst = Instance::new(
            2,
            vec![vec![Some(1), Some(4)], vec![Some(1), Some(4)]],
        )
        .unwrap();
        // makespan 2 with both on machine 0, total 2
        assert!(schedule_exists(&inst, 2, int(1)).unwrap().is_some());
        assert!(schedule_exists(&inst, 1, int(5)).unwrap().is_none());
        // makespan 4 allows spreading, but total 5 > floor(2 * 2.4) = 4
        let a = schedule_exists(&inst, 4, ratio(12, 5)).unwrap().unwrap();
        assert!(inst.makespan(&a) <= 4 && inst.total_load(&a) <= 4);
        assert!(schedule_exists(&inst, 1, ratio(5, 2)).unwrap().is_none());
        assert!(schedule_exists(&inst, 10, int(-1)).unwrap().is_none());
    }
}
