//! Rebalancing a rounded schedule for general instances.
//!
//! Given an assignment with makespan at most `2T` and average load at most
//! `L`, machines are split into *bad* (load `> T + gamma L`) and *good*
//! (load `<= gamma L`). With `gamma = 1/eps` and `eps > L/T` a matching
//! saturating the bad side exists in the graph joining each bad machine to
//! the good machines legal for its largest job. Moving every bad machine's
//! largest job to its partner yields makespan at most `T + L/eps`.
//!
//! [`a_um`] runs the whole pipeline: LP, rounding, classification, matching
//! and the transfer round.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::matching::{hall_violation, max_matching, neighborhood};
use crate::model::{Assignment, Instance, Time};
use crate::rational::{int, to_f64, Rational};
use crate::rounding::{round, small_jobs_violations, RoundingError};
use crate::simplex::{build_lp, solve_feasible, LpError, LpOutcome, SimplexOptions, FEAS_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BalanceError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(&'static str),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error("bad machine {machine} has no jobs")]
    EmptyBadMachine { machine: usize },
    #[error("bad machines {deficient:?} only reach good machines {neighbors:?}")]
    NoSaturatingMatching {
        deficient: Vec<usize>,
        neighbors: Vec<usize>,
    },
    #[error(
        "no matching saturates the bad machines although eps > L/T \
         (bad {bad:?}, good {good:?}, deficient {deficient:?}, neighbors {neighbors:?})"
    )]
    MatchingFailure {
        bad: Vec<usize>,
        good: Vec<usize>,
        deficient: Vec<usize>,
        neighbors: Vec<usize>,
    },
    #[error("job {job} cannot be moved to machine {machine}")]
    IllegalTransfer { job: usize, machine: usize },
    #[error("rounded machines {machines:?} exceed T after removing their largest job")]
    SmallJobsBound { machines: Vec<usize> },
    #[error("machine {machine} has load {load}, above the certified bound {bound}")]
    BoundViolated {
        machine: usize,
        load: Time,
        bound: Rational,
    },
    #[error("rounded total load {total} exceeds the budget m*L = {budget}")]
    BudgetExceeded { total: Time, budget: Rational },
}

/// Bad / good / other partition of the machines for a given `gamma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineClassification {
    pub gamma: Rational,
    pub threshold: Time,
    pub average: Rational,
    /// Loads `> T + gamma L`, ascending machine index.
    pub bad: Vec<usize>,
    /// Loads `<= gamma L`.
    pub good: Vec<usize>,
    pub other: Vec<usize>,
}

impl MachineClassification {
    /// Machines of `good` that are legal for `job` (the set `Good_j`).
    pub fn good_for(&self, inst: &Instance, job: usize) -> Vec<usize> {
        self.good
            .iter()
            .copied()
            .filter(|&i| inst.is_legal(i, job, self.threshold))
            .collect()
    }
}

pub fn classify(
    inst: &Instance,
    a: &Assignment,
    t: Time,
    l: Rational,
    gamma: Rational,
) -> MachineClassification {
    let high = int(t) + gamma * l;
    let low = gamma * l;
    let mut cls = MachineClassification {
        gamma,
        threshold: t,
        average: l,
        bad: Vec::new(),
        good: Vec::new(),
        other: Vec::new(),
    };
    for (i, load) in inst.loads(a).into_iter().enumerate() {
        let load = int(load);
        if load > high {
            cls.bad.push(i);
        } else if load <= low {
            cls.good.push(i);
        } else {
            cls.other.push(i);
        }
    }
    cls
}

/// A bad machine together with its largest job.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BadMachine {
    pub machine: usize,
    pub largest_job: usize,
}

/// Bipartite graph from bad machines to the good machines legal for their
/// largest job. `adj[k]` indexes into `good`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferGraph {
    pub bad: Vec<BadMachine>,
    pub good: Vec<usize>,
    pub adj: Vec<Vec<usize>>,
}

impl TransferGraph {
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    fn machines_of_bad(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&k| self.bad[k].machine).collect()
    }

    fn machines_of_good(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&k| self.good[k]).collect()
    }
}

pub fn build_transfer_graph(
    inst: &Instance,
    a: &Assignment,
    cls: &MachineClassification,
    t: Time,
) -> Result<TransferGraph, BalanceError> {
    let mut bad = Vec::with_capacity(cls.bad.len());
    let mut adj = Vec::with_capacity(cls.bad.len());
    for &i in &cls.bad {
        let job = inst
            .largest_job(a, i)
            .ok_or(BalanceError::EmptyBadMachine { machine: i })?;
        bad.push(BadMachine {
            machine: i,
            largest_job: job,
        });
        adj.push(
            cls.good
                .iter()
                .enumerate()
                .filter_map(|(k, &g)| inst.is_legal(g, job, t).then_some(k))
                .collect(),
        );
    }
    Ok(TransferGraph {
        bad,
        good: cls.good.clone(),
        adj,
    })
}

/// Outcome of the Hall test on a transfer graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HallCheck {
    Satisfied,
    /// Bad machines `set` with fewer good neighbors than members.
    Violated {
        set: Vec<usize>,
        neighbors: Vec<usize>,
    },
}

impl HallCheck {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, HallCheck::Satisfied)
    }
}

/// Hall's condition via maximum matching; a violation comes with the
/// deficient set read off the final alternating search.
pub fn check_hall(g: &TransferGraph) -> HallCheck {
    let mm = max_matching(&g.adj, g.good.len());
    match hall_violation(&g.adj, &mm) {
        None => HallCheck::Satisfied,
        Some(set) => {
            let neighbors = neighborhood(&g.adj, &set, g.good.len());
            HallCheck::Violated {
                set: g.machines_of_bad(&set),
                neighbors: g.machines_of_good(&neighbors),
            }
        }
    }
}

/// `(bad machine, good machine)` pairs saturating the bad side.
pub fn saturating_matching(g: &TransferGraph) -> Result<Vec<(usize, usize)>, BalanceError> {
    let mm = max_matching(&g.adj, g.good.len());
    if let Some(set) = hall_violation(&g.adj, &mm) {
        let neighbors = neighborhood(&g.adj, &set, g.good.len());
        return Err(BalanceError::NoSaturatingMatching {
            deficient: g.machines_of_bad(&set),
            neighbors: g.machines_of_good(&neighbors),
        });
    }
    Ok(mm
        .pairs()
        .into_iter()
        .map(|(b, k)| (g.bad[b].machine, g.good[k]))
        .collect())
}

/// Moves the largest job of each bad machine to its matched good machine.
pub fn apply_transfers(
    inst: &Instance,
    a: &Assignment,
    pairs: &[(usize, usize)],
    t: Time,
) -> Result<Assignment, BalanceError> {
    let mut out = a.clone();
    let mut receivers = vec![false; inst.machines()];
    for &(from, to) in pairs {
        let job = inst
            .largest_job(a, from)
            .ok_or(BalanceError::EmptyBadMachine { machine: from })?;
        if to >= inst.machines() || receivers[to] || !inst.is_legal(to, job, t) {
            return Err(BalanceError::IllegalTransfer { job, machine: to });
        }
        receivers[to] = true;
        out.set(job, to);
    }
    Ok(out)
}

/// Check of the counting lemma on one classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingReport {
    pub bad: usize,
    pub good: usize,
    /// `|bad| (gamma + 1) < m`.
    pub few_bad: bool,
    /// `|good| > (1 - 1/gamma) m + (|bad|/gamma)(T/L)`; `None` when `L = 0`.
    pub many_good_strict: Option<bool>,
    /// The same with `>=`.
    pub many_good: Option<bool>,
    /// Right-hand side of the good-machine bound, when defined.
    pub good_threshold: Option<Rational>,
}

impl CountingReport {
    /// Both parts hold, using `>=` for the second.
    pub fn holds(&self) -> bool {
        self.few_bad && self.many_good.unwrap_or(true)
    }

    /// The good-machine count sits exactly on the bound.
    pub fn is_equality_case(&self) -> bool {
        self.many_good == Some(true) && self.many_good_strict == Some(false)
    }
}

/// Counts bad and good machines against the bounds implied by makespan
/// `<= 2T` and average load `<= L`.
pub fn check_lemma2(
    cls: &MachineClassification,
    t: Time,
    l: Rational,
    gamma: Rational,
    m: usize,
) -> CountingReport {
    let bad = cls.bad.len();
    let good = cls.good.len();
    let m_r = int(m as i128);
    let few_bad = int(bad as i128) * (gamma + int(1)) < m_r;
    let good_threshold = (l > int(0)).then(|| {
        (int(1) - gamma.recip()) * m_r + int(bad as i128) / gamma * (int(t) / l)
    });
    let good_r = int(good as i128);
    CountingReport {
        bad,
        good,
        few_bad,
        many_good_strict: good_threshold.map(|th| good_r > th),
        many_good: good_threshold.map(|th| good_r >= th),
        good_threshold,
    }
}

/// Which bound an [`a_um`] schedule is certified against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// `T + L/eps`, available when `eps > L/T`.
    TPlusLOverEps,
    /// `2T`, the rounding guarantee alone.
    TwoT,
}

/// A schedule produced by [`a_um`], with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct UmSchedule {
    pub assignment: Assignment,
    /// The rounded assignment before any transfer.
    pub rounded: Assignment,
    pub epsilon: Rational,
    pub bound: Rational,
    pub bound_kind: BoundKind,
    pub makespan: Time,
    /// Present when the transfer round ran.
    pub classification: Option<MachineClassification>,
    /// `(job, from, to)` for each moved job.
    pub transfers: Vec<(usize, usize, usize)>,
    pub lp_cost: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    /// Some job has no machine with `p_ij <= T`.
    NoLegalMachine { job: usize },
    /// Phase one ended with a positive sum of artificials.
    Lp { phase_one_objective: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum UmOutcome {
    /// No fractional (hence no integral) schedule with makespan `<= T` and
    /// average load `<= L` exists.
    Infeasible { reason: Infeasibility, pivots: usize },
    Scheduled(UmSchedule),
}

impl UmOutcome {
    pub fn schedule(&self) -> Option<&UmSchedule> {
        match self {
            UmOutcome::Scheduled(s) => Some(s),
            UmOutcome::Infeasible { .. } => None,
        }
    }
}

/// LP, rounding and one transfer round for thresholds `T` and `L <= T`.
pub fn a_um(inst: &Instance, t: Time, l: Rational) -> Result<UmOutcome, BalanceError> {
    a_um_with(inst, t, l, SimplexOptions::default())
}

pub fn a_um_with(
    inst: &Instance,
    t: Time,
    l: Rational,
    opts: SimplexOptions,
) -> Result<UmOutcome, BalanceError> {
    if t == 0 {
        return Err(BalanceError::InvalidParameters("T must be at least 1"));
    }
    if l < int(0) || l > int(t) {
        return Err(BalanceError::InvalidParameters("L must lie in [0, T]"));
    }
    let m = inst.machines();
    let budget = l * int(m as i128);
    let model = match build_lp(inst, t, budget) {
        Ok(model) => model,
        Err(LpError::NoLegalMachine { job }) => {
            return Ok(UmOutcome::Infeasible {
                reason: Infeasibility::NoLegalMachine { job },
                pivots: 0,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let solution = match solve_feasible(&model, opts)? {
        LpOutcome::Feasible(s) => s,
        LpOutcome::Infeasible {
            phase_one_objective,
            pivots,
        } => {
            return Ok(UmOutcome::Infeasible {
                reason: Infeasibility::Lp {
                    phase_one_objective,
                },
                pivots,
            })
        }
    };

    let rounded = round(inst, &solution.x, t)?;
    let violations = small_jobs_violations(inst, &rounded, t);
    if !violations.is_empty() {
        return Err(BalanceError::SmallJobsBound {
            machines: violations,
        });
    }
    let total = inst.total_load(&rounded);
    if total as f64 > to_f64(&budget) + FEAS_TOL {
        return Err(BalanceError::BudgetExceeded { total, budget });
    }

    let epsilon = inst.feasibility_factor(t);
    let two_t = int(2 * t);
    // eps <= L/T  <=>  eps T <= L
    if epsilon * int(t) <= l {
        let makespan = inst.makespan(&rounded);
        check_loads(inst, &rounded, &two_t)?;
        return Ok(UmOutcome::Scheduled(UmSchedule {
            assignment: rounded.clone(),
            rounded,
            epsilon,
            bound: two_t,
            bound_kind: BoundKind::TwoT,
            makespan,
            classification: None,
            transfers: Vec::new(),
            lp_cost: solution.objective,
            pivots: solution.pivots,
        }));
    }

    let gamma = epsilon.recip();
    let cls = classify(inst, &rounded, t, l, gamma);
    let graph = build_transfer_graph(inst, &rounded, &cls, t)?;
    if let HallCheck::Violated { set, neighbors } = check_hall(&graph) {
        return Err(BalanceError::MatchingFailure {
            bad: cls.bad.clone(),
            good: cls.good.clone(),
            deficient: set,
            neighbors,
        });
    }
    let pairs = saturating_matching(&graph)?;
    let assignment = apply_transfers(inst, &rounded, &pairs, t)?;
    let transfers = pairs
        .iter()
        .map(|&(from, to)| {
            let job = inst.largest_job(&rounded, from).expect("bad machines have jobs");
            (job, from, to)
        })
        .collect();

    let bound = int(t) + l / epsilon;
    check_loads(inst, &assignment, &bound)?;
    Ok(UmOutcome::Scheduled(UmSchedule {
        makespan: inst.makespan(&assignment),
        assignment,
        rounded,
        epsilon,
        bound,
        bound_kind: BoundKind::TPlusLOverEps,
        classification: Some(cls),
        transfers,
        lp_cost: solution.objective,
        pivots: solution.pivots,
    }))
}

fn check_loads(inst: &Instance, a: &Assignment, bound: &Rational) -> Result<(), BalanceError> {
    for (machine, load) in inst.loads(a).into_iter().enumerate() {
        if int(load) > *bound {
            return Err(BalanceError::BoundViolated {
                machine,
                load,
                bound: *bound,
            });
        }
    }
    Ok(())
}
