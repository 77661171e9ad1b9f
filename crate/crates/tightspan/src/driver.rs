//! Picks `(T, L)` for the general pipeline when the caller supplies neither.
//!
//! `T` is the smallest integer threshold whose unbudgeted LP is feasible,
//! found by bisection over `[max_j min_i p_ij, sum_j min_i p_ij]`; `L` is the
//! LP's optimal cost at that `T` divided by `m`.

use thiserror::Error;
use tightspan_core::balance::{a_um, BalanceError, UmOutcome};
use tightspan_core::rational::{approximate, int, Rational};
use tightspan_core::simplex::{build_lp_unbudgeted, min_cost, LpError, SimplexOptions};
use tightspan_core::{Instance, Time};

/// Tolerance and denominator cap for turning the LP optimum into `L`.
pub const COST_TOLERANCE: f64 = 1e-7;
pub const COST_MAX_DENOMINATOR: i128 = 1_000_000;

#[derive(Debug, Error)]
pub enum DriveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error("LP infeasible at the upper bracket T = {0}")]
    BracketInfeasible(Time),
    #[error("T = {0} is not minimal: T - 1 is LP-feasible")]
    NotMinimal(Time),
    #[error("LP cost {0} has no rational form within tolerance")]
    CostConversion(f64),
    #[error("a_um reported infeasibility for the auto-selected T = {t}, L = {l}")]
    UnexpectedInfeasibility { t: Time, l: Rational },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoDrive {
    pub t: Time,
    pub l: Rational,
    pub lp_cost: f64,
    /// LP solves spent on the search.
    pub lp_solves: usize,
    pub outcome: UmOutcome,
}

/// Optimal unbudgeted LP cost at threshold `t`, or `None` when infeasible.
fn lp_cost(inst: &Instance, t: Time, solves: &mut usize) -> Result<Option<f64>, LpError> {
    let model = match build_lp_unbudgeted(inst, t) {
        Ok(model) => model,
        Err(LpError::NoLegalMachine { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    *solves += 1;
    Ok(min_cost(&model, SimplexOptions::default())?
        .feasible()
        .map(|s| s.objective))
}

/// Smallest feasible `T`, its LP cost, and the number of LP solves.
pub fn minimal_threshold(inst: &Instance) -> Result<(Time, f64, usize), DriveError> {
    let mut solves = 0;
    let mut lo = inst.max_min_time().max(1);
    let mut hi = inst.total_min_time().max(lo);
    let mut best = lp_cost(inst, hi, &mut solves)?.ok_or(DriveError::BracketInfeasible(hi))?;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match lp_cost(inst, mid, &mut solves)? {
            Some(cost) => {
                hi = mid;
                best = cost;
            }
            None => lo = mid + 1,
        }
    }
    if hi > 1 && lp_cost(inst, hi - 1, &mut solves)?.is_some() {
        return Err(DriveError::NotMinimal(hi));
    }
    Ok((hi, best, solves))
}

/// The minimal `T` and `L = cost / m`, plus the LP cost and solve count.
pub fn auto_thresholds(inst: &Instance) -> Result<(Time, Rational, f64, usize), DriveError> {
    let (t, cost, lp_solves) = minimal_threshold(inst)?;
    let m = inst.machines() as i128;
    let total = approximate(cost, COST_TOLERANCE, COST_MAX_DENOMINATOR)
        .ok_or(DriveError::CostConversion(cost))?;
    // cost <= m T always holds; clamp float noise at the boundary
    let l = (total / int(m)).min(int(t));
    Ok((t, l, cost, lp_solves))
}

pub fn auto_drive_general(inst: &Instance) -> Result<AutoDrive, DriveError> {
    let (t, l, cost, lp_solves) = auto_thresholds(inst)?;
    let outcome = a_um(inst, t, l)?;
    if let UmOutcome::Infeasible { .. } = outcome {
        return Err(DriveError::UnexpectedInfeasibility { t, l });
    }
    Ok(AutoDrive {
        t,
        l,
        lp_cost: cost,
        lp_solves,
        outcome,
    })
}
