//! The assignment LP and a dense two-phase simplex solver.
//!
//! Variables exist only for pairs `(i, j)` with `p_ij <= T`. Rows:
//!
//! * one equality `sum_i x_ij = 1` per job,
//! * one capacity row `sum_j p_ij x_ij <= T` per machine,
//! * optionally one budget row `sum c_ij x_ij <= budget`.
//!
//! The solver is a textbook dense tableau with Bland's rule. Models here
//! have a few hundred columns at most.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{Instance, Time};
use crate::rational::{to_f64, Rational};

/// Pivot elements smaller than this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;
/// Allowed absolute row violation of a returned solution.
pub const FEAS_TOL: f64 = 1e-6;
/// Tolerance on a job row summing to one.
pub const ROW_TOL: f64 = 1e-7;
/// Fractions below this are snapped to zero.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("job {job} has no legal machine under the threshold")]
    NoLegalMachine { job: usize },
    #[error("simplex exceeded the pivot limit ({limit})")]
    IterationLimit { limit: usize },
    #[error("simplex lost feasibility: {reason}")]
    Numerical { reason: &'static str },
}

/// One LP column: the fraction of `job` placed on `machine`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpVariable {
    pub job: usize,
    pub machine: usize,
    pub time: Time,
    pub cost: Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub jobs: usize,
    pub machines: usize,
    pub threshold: Time,
    pub variables: Vec<LpVariable>,
    /// Upper bound on `sum c_ij x_ij`; `None` drops the row.
    pub budget: Option<Rational>,
}

impl LpModel {
    pub fn rows(&self) -> usize {
        self.jobs + self.machines + usize::from(self.budget.is_some())
    }

    pub fn columns(&self) -> usize {
        self.variables.len()
    }

    pub fn without_budget(&self) -> Self {
        Self {
            budget: None,
            ..self.clone()
        }
    }
}

/// Builds the LP for threshold `t` with budget `sum p_ij x_ij <= budget`.
pub fn build_lp(inst: &Instance, t: Time, budget: Rational) -> Result<LpModel, LpError> {
    let mut model = build_lp_unbudgeted(inst, t)?;
    model.budget = Some(budget);
    Ok(model)
}

/// The LP without the budget row, as used to find the cheapest fractional
/// schedule for a threshold.
pub fn build_lp_unbudgeted(inst: &Instance, t: Time) -> Result<LpModel, LpError> {
    let mut variables = Vec::new();
    for j in 0..inst.jobs() {
        let before = variables.len();
        for i in 0..inst.machines() {
            if let Some(p) = inst.time(j, i) {
                if p <= t {
                    variables.push(LpVariable {
                        job: j,
                        machine: i,
                        time: p,
                        cost: p,
                    });
                }
            }
        }
        if variables.len() == before {
            return Err(LpError::NoLegalMachine { job: j });
        }
    }
    Ok(LpModel {
        jobs: inst.jobs(),
        machines: inst.machines(),
        threshold: t,
        variables,
        budget: None,
    })
}

/// Dense `jobs x machines` matrix of fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAssignment {
    jobs: usize,
    machines: usize,
    x: Vec<f64>,
}

impl FractionalAssignment {
    pub fn zeros(jobs: usize, machines: usize) -> Self {
        Self {
            jobs,
            machines,
            x: vec![0.0; jobs * machines],
        }
    }

    /// Row-major `jobs x machines` values.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let machines = rows.first().map_or(0, Vec::len);
        let mut out = Self::zeros(rows.len(), machines);
        for (j, row) in rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                out.set(j, i, v);
            }
        }
        out
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    #[inline]
    pub fn get(&self, job: usize, machine: usize) -> f64 {
        self.x[job * self.machines + machine]
    }

    pub fn set(&mut self, job: usize, machine: usize, value: f64) {
        self.x[job * self.machines + machine] = value;
    }

    pub fn row(&self, job: usize) -> &[f64] {
        &self.x[job * self.machines..(job + 1) * self.machines]
    }

    /// `sum_ij p_ij x_ij`.
    pub fn cost(&self, inst: &Instance) -> f64 {
        let mut total = 0.0;
        for j in 0..self.jobs {
            for i in 0..self.machines {
                let v = self.get(j, i);
                if v > 0.0 {
                    total += v * inst.time(j, i).map_or(f64::INFINITY, |p| p as f64);
                }
            }
        }
        total
    }

    /// `sum_j p_ij x_ij` for one machine.
    pub fn machine_time(&self, inst: &Instance, machine: usize) -> f64 {
        (0..self.jobs)
            .filter(|&j| self.get(j, machine) > 0.0)
            .map(|j| self.get(j, machine) * inst.time(j, machine).map_or(f64::INFINITY, |p| p as f64))
            .sum()
    }

    /// Drops values below [`ZERO_TOL`] and rescales each row to sum to one.
    pub fn clean(&mut self) {
        for j in 0..self.jobs {
            let row = &mut self.x[j * self.machines..(j + 1) * self.machines];
            let mut sum = 0.0;
            for v in row.iter_mut() {
                if *v < ZERO_TOL {
                    *v = 0.0;
                }
                sum += *v;
            }
            if sum > 0.0 {
                for v in row.iter_mut() {
                    *v /= sum;
                }
            }
        }
    }

    /// Checks every row of `model` within the solver tolerances.
    pub fn satisfies(&self, inst: &Instance, model: &LpModel) -> bool {
        let legal = |j: usize, i: usize| matches!(inst.time(j, i), Some(p) if p <= model.threshold);
        for j in 0..self.jobs {
            let mut sum = 0.0;
            for i in 0..self.machines {
                let v = self.get(j, i);
                if v < -FEAS_TOL || (v > 0.0 && !legal(j, i)) {
                    return false;
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_TOL {
                return false;
            }
        }
        for i in 0..self.machines {
            if self.machine_time(inst, i) > model.threshold as f64 + FEAS_TOL {
                return false;
            }
        }
        match &model.budget {
            Some(b) => self.cost(inst) <= to_f64(b) + FEAS_TOL,
            None => true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimplexOptions {
    /// Pivot cap; `None` means `50 * rows * cols`.
    pub max_pivots: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: FractionalAssignment,
    /// `sum c_ij x_ij` of the returned point.
    pub objective: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Feasible(LpSolution),
    /// Phase one stopped with a positive sum of artificials.
    Infeasible { phase_one_objective: f64, pivots: usize },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }

    pub fn feasible(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Feasible(s) => Some(s),
            LpOutcome::Infeasible { .. } => None,
        }
    }

    pub fn pivots(&self) -> usize {
        match self {
            LpOutcome::Feasible(s) => s.pivots,
            LpOutcome::Infeasible { pivots, .. } => *pivots,
        }
    }
}

/// Any point satisfying all rows of `model` (phase one only).
pub fn solve_feasible(model: &LpModel, opts: SimplexOptions) -> Result<LpOutcome, LpError> {
    solve(model, opts, false)
}

/// A point minimizing `sum c_ij x_ij` over the rows of `model`.
pub fn min_cost(model: &LpModel, opts: SimplexOptions) -> Result<LpOutcome, LpError> {
    solve(model, opts, true)
}

fn solve(model: &LpModel, opts: SimplexOptions, optimize: bool) -> Result<LpOutcome, LpError> {
    let budget = model.budget.as_ref().map(to_f64);
    if let Some(b) = budget {
        // costs are non-negative, so a negative budget is unreachable
        if b < 0.0 {
            return Ok(LpOutcome::Infeasible {
                phase_one_objective: -b,
                pivots: 0,
            });
        }
    }
    let mut tab = Tableau::new(model, budget);
    let limit = opts
        .max_pivots
        .unwrap_or(50 * tab.rows.max(1) * tab.cols.max(1));

    tab.set_phase_one_objective();
    tab.run(limit, true)?;
    let infeasibility = -tab.objective_value_neg();
    if infeasibility > FEAS_TOL {
        return Ok(LpOutcome::Infeasible {
            phase_one_objective: infeasibility,
            pivots: tab.pivots,
        });
    }
    tab.evict_artificials();
    if optimize {
        tab.set_phase_two_objective(model);
        tab.run(limit, false)?;
    }

    let mut x = FractionalAssignment::zeros(model.jobs, model.machines);
    for (r, &col) in tab.basis.iter().enumerate() {
        if col < model.variables.len() {
            let v = &model.variables[col];
            let value = tab.rhs(r);
            x.set(v.job, v.machine, if value > 0.0 { value } else { 0.0 });
        }
    }
    x.clean();
    let objective = model
        .variables
        .iter()
        .map(|v| v.cost as f64 * x.get(v.job, v.machine))
        .sum();
    Ok(LpOutcome::Feasible(LpSolution {
        x,
        objective,
        pivots: tab.pivots,
    }))
}

/// Dense tableau `[A | b]` with the reduced-cost row stored last.
struct Tableau {
    rows: usize,
    cols: usize,
    // (rows + 1) x (cols + 1), row-major
    data: Vec<f64>,
    basis: Vec<usize>,
    first_artificial: usize,
    pivots: usize,
}

impl Tableau {
    fn new(model: &LpModel, budget: Option<f64>) -> Self {
        let nv = model.variables.len();
        let n = model.jobs;
        let m = model.machines;
        let ineq = m + usize::from(budget.is_some());
        let rows = n + ineq;
        // variables | slacks (one per inequality row) | artificials (one per job row)
        let first_artificial = nv + ineq;
        let cols = first_artificial + n;
        let width = cols + 1;
        let mut data = vec![0.0; (rows + 1) * width];
        let mut basis = vec![0; rows];

        for (c, v) in model.variables.iter().enumerate() {
            data[v.job * width + c] = 1.0;
            data[(n + v.machine) * width + c] = v.time as f64;
            if budget.is_some() {
                data[(n + m) * width + c] = v.cost as f64;
            }
        }
        for j in 0..n {
            data[j * width + first_artificial + j] = 1.0;
            data[j * width + cols] = 1.0;
            basis[j] = first_artificial + j;
        }
        for k in 0..ineq {
            let r = n + k;
            data[r * width + nv + k] = 1.0;
            data[r * width + cols] = if k < m {
                model.threshold as f64
            } else {
                budget.unwrap_or(0.0)
            };
            basis[r] = nv + k;
        }
        Self {
            rows,
            cols,
            data,
            basis,
            first_artificial,
            pivots: 0,
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    /// The objective row keeps `-z` in its right-hand-side slot.
    fn objective_value_neg(&self) -> f64 {
        self.at(self.rows, self.cols)
    }

    fn set_objective(&mut self, costs: &[f64]) {
        let w = self.width();
        let obj = self.rows * w;
        for (c, cell) in self.data[obj..obj + w].iter_mut().enumerate() {
            *cell = if c < self.cols { costs[c] } else { 0.0 };
        }
        // price out the basic columns
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                for c in 0..w {
                    let v = self.data[r * w + c];
                    self.data[obj + c] -= cb * v;
                }
            }
        }
    }

    fn set_phase_one_objective(&mut self) {
        let mut costs = vec![0.0; self.cols];
        for c in costs.iter_mut().skip(self.first_artificial) {
            *c = 1.0;
        }
        self.set_objective(&costs);
    }

    fn set_phase_two_objective(&mut self, model: &LpModel) {
        let mut costs = vec![0.0; self.cols];
        for (c, v) in model.variables.iter().enumerate() {
            costs[c] = v.cost as f64;
        }
        self.set_objective(&costs);
    }

    /// Bland's rule: lowest-index improving column enters; ratio ties go to
    /// the lowest-index basic variable.
    fn run(&mut self, limit: usize, allow_artificial: bool) -> Result<(), LpError> {
        loop {
            let enter_limit = if allow_artificial {
                self.cols
            } else {
                self.first_artificial
            };
            let Some(q) = (0..enter_limit).find(|&c| self.at(self.rows, c) < -PIVOT_TOL) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, q);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-12
                                || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((p, _)) = leave else {
                // every model here is bounded (x <= 1 via the job rows)
                return Err(LpError::Numerical {
                    reason: "unbounded direction in a bounded model",
                });
            };
            if self.pivots >= limit {
                return Err(LpError::IterationLimit { limit });
            }
            self.pivot(p, q);
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width();
        let inv = 1.0 / self.data[p * w + q];
        for c in 0..w {
            self.data[p * w + c] *= inv;
        }
        self.data[p * w + q] = 1.0;
        for r in 0..=self.rows {
            if r == p {
                continue;
            }
            let factor = self.data[r * w + q];
            if factor != 0.0 {
                for c in 0..w {
                    let v = self.data[p * w + c];
                    if v != 0.0 {
                        self.data[r * w + c] -= factor * v;
                    }
                }
                self.data[r * w + q] = 0.0;
            }
        }
        self.basis[p] = q;
        self.pivots += 1;
    }

    /// After a successful phase one, pivot zero-valued artificials out of the
    /// basis where a structural column allows it. Rows where none does are
    /// redundant and keep their artificial at zero.
    fn evict_artificials(&mut self) {
        for r in 0..self.rows {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            if let Some(c) =
                (0..self.first_artificial).find(|&c| self.at(r, c).abs() > PIVOT_TOL)
            {
                self.pivot(r, c);
            }
        }
    }
}
