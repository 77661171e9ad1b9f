//! Independent re-verification of an assignment against every invariant
//! the solvers certify.

use serde::Serialize;
use tightspan_core::balance::{build_transfer_graph, check_hall, check_lemma2, classify, HallCheck};
use tightspan_core::rational::{int, ratio, Rational};
use tightspan_core::restricted::{
    build_assignment_graph, improving_move, partition, path_exists,
};
use tightspan_core::rounding::load_without_largest;
use tightspan_core::{Assignment, Instance, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    /// Informational: the property is not claimed for arbitrary
    /// assignments, only for the solver's intermediate ones.
    Note,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub makespan: Time,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn failed(&self) -> bool {
        self.items.iter().any(|c| c.status == Status::Fail)
    }

    fn push(&mut self, name: &'static str, ok: bool, weak: bool, detail: String) {
        let status = match (ok, weak) {
            (true, _) => Status::Pass,
            (false, true) => Status::Note,
            (false, false) => Status::Fail,
        };
        self.items.push(CheckItem {
            name,
            status,
            detail,
        });
    }
}

/// General-instance checks at thresholds `(T, L)`, plus the restricted
/// ones when the instance is restricted.
///
/// Only the makespan bound of the instance's own pipeline is a hard
/// failure (Theorem 1's `min{T + L/eps, 2T}` for general instances,
/// `p_max + L/eps` for restricted ones). The structural lemmas are hard
/// failures only when their preconditions hold for the given assignment.
pub fn check(inst: &Instance, a: &Assignment, t: Time, l: Rational) -> CheckReport {
    let loads = inst.loads(a);
    let makespan = loads.iter().copied().max().unwrap_or(0);
    let m = inst.machines();
    let mut report = CheckReport {
        makespan,
        items: Vec::new(),
    };

    let assigned: Time = (0..inst.jobs()).map(|j| inst.assigned_time(a, j)).sum();
    report.push(
        "conservation",
        loads.iter().sum::<Time>() == assigned,
        false,
        format!("sum of loads {} vs assigned time {assigned}", loads.iter().sum::<Time>()),
    );

    let restricted = inst.is_restricted();
    let average = inst.average_load(a);
    let within_budget = average <= l;
    let within_2t = makespan <= 2 * t;
    report.push(
        "average_load",
        within_budget,
        true,
        format!("average load {average} vs L = {l}"),
    );

    let over: Vec<usize> = (0..m)
        .filter(|&i| load_without_largest(inst, a, i) > t)
        .map(|i| i + 1)
        .collect();
    report.push(
        "lemma1",
        over.is_empty(),
        true,
        if over.is_empty() {
            format!("every machine's load without its largest job is <= T = {t}")
        } else {
            format!("machines {over:?} exceed T = {t} without their largest job")
        },
    );

    let eps = inst.feasibility_factor(t);
    let (bound, kind) = if eps * int(t) > l {
        (int(t) + l / eps, "T + L/eps")
    } else {
        (int(2 * t), "2T")
    };
    report.push(
        "theorem1_bound",
        int(makespan) <= bound,
        restricted,
        format!("makespan {makespan} vs {kind} = {bound} (eps = {eps})"),
    );

    if eps > int(0) && l <= int(t) {
        let gamma = eps.recip();
        let cls = classify(inst, a, t, l, gamma);
        let counting = check_lemma2(&cls, t, l, gamma, m);
        let applies = within_2t && within_budget;
        report.push(
            "lemma2",
            counting.holds(),
            !applies,
            format!(
                "|bad| = {}, |good| = {}, good threshold {}{}",
                counting.bad,
                counting.good,
                counting
                    .good_threshold
                    .map(|r| r.to_string())
                    .unwrap_or_else(|| "undefined (L = 0)".into()),
                if counting.is_equality_case() { " (attained with equality)" } else { "" }
            ),
        );
        match build_transfer_graph(inst, a, &cls, t) {
            Ok(g) => {
                let hall = check_hall(&g);
                let detail = match &hall {
                    HallCheck::Satisfied => format!("{} bad machines can all be matched", g.bad.len()),
                    HallCheck::Violated { set, neighbors } => format!(
                        "bad machines {:?} have only good neighbors {:?}",
                        one_based(set),
                        one_based(neighbors)
                    ),
                };
                report.push("hall", hall.is_satisfied(), !(applies && eps * int(t) > l), detail);
            }
            Err(e) => report.push("hall", false, true, e.to_string()),
        }
    }

    if restricted {
        let w = inst.p_max();
        let k = inst.k_min() as u64;
        let total = inst.total_size();
        let delta = ratio(total as i128, k as i128);
        let part = partition(inst, a, w, delta);
        report.push(
            "restricted_bound",
            makespan * k <= w * k + total,
            false,
            format!("makespan {makespan} vs p_max + L/eps = {}", int(w) + delta),
        );
        report.push(
            "partition",
            part.plus.is_empty(),
            true,
            format!(
                "|M+| = {}, |M0| = {}, |M-| = {} (w = {w}, delta = {delta})",
                part.plus.len(),
                part.zero.len(),
                part.minus.len()
            ),
        );
        if !part.plus.is_empty() {
            let g = build_assignment_graph(inst, a, w);
            let found = path_exists(&g, &part.plus, &part.minus).is_some();
            report.push(
                "lemma4_path",
                found,
                false,
                "an overloaded machine must reach an underloaded one".into(),
            );
        }
        let mv = improving_move(inst, a);
        report.push(
            "local_optimum",
            mv.is_none(),
            true,
            match mv {
                None => "no single-job move lowers the larger load".into(),
                Some(mv) => format!(
                    "job {} could move from machine {} to {} (gain {})",
                    mv.job + 1,
                    mv.from + 1,
                    mv.to + 1,
                    mv.gain
                ),
            },
        );
    }
    report
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|&i| i + 1).collect()
}
