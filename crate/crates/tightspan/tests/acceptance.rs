//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! All bound comparisons are exact (rationals, integer cross-multiplication).
//! The only floating-point tolerances are the LP's, pinned below, and the
//! wall-clock budgets. Run with `cargo test -p tightspan --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tightspan::driver::auto_drive_general;
use tightspan::generate::{generate, GeneratorSpec};
use tightspan_core::balance::{
    a_um, build_transfer_graph, check_hall, check_lemma2, classify, saturating_matching,
    BalanceError, UmOutcome, UmSchedule,
};
use tightspan_core::oracle::{optimal_makespan, schedule_exists};
use tightspan_core::rational::{int, ratio, Rational};
use tightspan_core::restricted::{
    build_assignment_graph, partition, path_exists, ratio_bound, solve_restricted, Strategy,
};
use tightspan_core::rounding::small_jobs_violations;
use tightspan_core::simplex::{FEAS_TOL, PIVOT_TOL, ROW_TOL, ZERO_TOL};
use tightspan_core::{Assignment, Instance, Time};

const BASE_SEED: u64 = 0x5eed_2024;
const GENERAL_INSTANCES: usize = 200;
const CLASSIFICATIONS: usize = 1000;
const RESTRICTED_INSTANCES: usize = 500;
const ORACLE_INSTANCES: usize = 100;
const PATH_STATES: usize = 1000;
const THEOREM1_BUDGET: Duration = Duration::from_secs(60);
const THEOREM2_BUDGET: Duration = Duration::from_secs(60);
const ORACLE_BUDGET: Duration = Duration::from_secs(300);

/// Set to `1` to make any FAIL line, including known conflicts, fail the run.
const STRICT_ENV: &str = "ACCEPTANCE_STRICT";

/// Criteria that cannot be met as stated. They still print FAIL when hit.
const KNOWN_CONFLICTS: &[(u8, &str)] = &[(
    9,
    "at q = (16/17) eps the ratio is exactly 33/17, so a row there cannot be both flagged and strictly below 33/17",
)];

struct Line {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

/// `(m, k)` pairs with `k/m` in {1/2, 3/4, 1} and `m` in 3..=6.
const EPS_GRID: [(usize, usize); 7] = [(3, 3), (4, 2), (4, 3), (4, 4), (5, 5), (6, 3), (6, 6)];

fn general_spec(rng: &mut ChaCha8Rng, seed: u64) -> GeneratorSpec {
    let (m, k) = EPS_GRID[rng.random_range(0..EPS_GRID.len())];
    GeneratorSpec {
        m,
        n: rng.random_range(8..=24),
        pmax: 20,
        k,
        seed,
        restricted: false,
    }
}

fn restricted_spec(rng: &mut ChaCha8Rng, seed: u64, n: std::ops::RangeInclusive<usize>) -> GeneratorSpec {
    let m = rng.random_range(3..=6);
    GeneratorSpec {
        m,
        n: rng.random_range(n),
        pmax: 20,
        k: rng.random_range(1..=m),
        seed,
        restricted: true,
    }
}

struct GeneralRun {
    t: Time,
    l: Rational,
    schedule: UmSchedule,
}

#[derive(Default)]
struct GeneralTally {
    instances: usize,
    violations: usize,
    errors: Vec<String>,
    lemma1_machines: usize,
    lemma1_violations: usize,
    transfer_runs: usize,
    hall_failures: usize,
    matching_failures: usize,
    classifications: usize,
    lemma2_violations: usize,
    lemma2_equalities: usize,
}

impl GeneralTally {
    fn absorb(&mut self, inst: &Instance, run: &GeneralRun, count_bound: bool) {
        let (t, l, s) = (run.t, run.l, &run.schedule);
        if count_bound {
            self.instances += 1;
            let eps = inst.feasibility_factor(t);
            let mut bound = int(2 * t);
            if eps > int(0) {
                bound = bound.min(int(t) + l / eps);
            }
            if int(s.makespan) > bound {
                self.violations += 1;
            }
            self.lemma1_machines += inst.machines();
            self.lemma1_violations += small_jobs_violations(inst, &s.rounded, t).len();
            if eps * int(t) > l {
                self.transfer_runs += 1;
                let cls = classify(inst, &s.rounded, t, l, eps.recip());
                match build_transfer_graph(inst, &s.rounded, &cls, t) {
                    Ok(g) => {
                        if !check_hall(&g).is_satisfied() {
                            self.hall_failures += 1;
                        }
                        if saturating_matching(&g).is_err() {
                            self.matching_failures += 1;
                        }
                    }
                    Err(_) => self.hall_failures += 1,
                }
            }
        }
        let eps = inst.feasibility_factor(t);
        if eps > int(0) {
            let gamma = eps.recip();
            let cls = classify(inst, &s.rounded, t, l, gamma);
            let report = check_lemma2(&cls, t, l, gamma, inst.machines());
            self.classifications += 1;
            if !report.holds() {
                self.lemma2_violations += 1;
            }
            if report.is_equality_case() {
                self.lemma2_equalities += 1;
            }
        }
    }
}

fn run_general(inst: &Instance) -> Result<GeneralRun, String> {
    let drive = auto_drive_general(inst).map_err(|e| e.to_string())?;
    match drive.outcome {
        UmOutcome::Scheduled(schedule) => Ok(GeneralRun {
            t: drive.t,
            l: drive.l,
            schedule,
        }),
        UmOutcome::Infeasible { .. } => Err("auto-driver produced an infeasible pair".into()),
    }
}

fn general_criteria(lines: &mut Vec<Line>) {
    let mut tally = GeneralTally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let start = Instant::now();
    let mut theorem1_time = Duration::ZERO;
    let mut seed = BASE_SEED;
    while tally.instances < GENERAL_INSTANCES || tally.classifications < CLASSIFICATIONS {
        seed += 1;
        let in_theorem1 = tally.instances < GENERAL_INSTANCES;
        let inst = generate(&general_spec(&mut rng, seed)).unwrap();
        match run_general(&inst) {
            Ok(run) => tally.absorb(&inst, &run, in_theorem1),
            Err(e) => {
                if e.contains("matching") || e.contains("Hall") {
                    tally.matching_failures += 1;
                }
                tally.errors.push(format!("seed {seed}: {e}"));
                if in_theorem1 {
                    tally.instances += 1;
                }
            }
        }
        if in_theorem1 && tally.instances == GENERAL_INSTANCES {
            theorem1_time = start.elapsed();
        }
    }

    lines.push(Line {
        id: 1,
        name: "Theorem 1 bound min{T+L/eps, 2T}",
        pass: tally.violations == 0 && tally.errors.is_empty() && theorem1_time < THEOREM1_BUDGET,
        detail: format!(
            "{} instances, {} violations, {} errors, {:.2?} (budget {:?}){}",
            tally.instances,
            tally.violations,
            tally.errors.len(),
            theorem1_time,
            THEOREM1_BUDGET,
            tally.errors.first().map(|e| format!("; first error: {e}")).unwrap_or_default()
        ),
    });
    lines.push(Line {
        id: 2,
        name: "Lemma 1 load minus largest job <= T",
        pass: tally.lemma1_violations == 0 && tally.lemma1_machines > 0,
        detail: format!(
            "{} machines over {} rounded assignments, {} violations",
            tally.lemma1_machines, tally.instances, tally.lemma1_violations
        ),
    });
    lines.push(Line {
        id: 3,
        name: "Corollary 1 / Lemma 3 Hall + saturating matching",
        pass: tally.hall_failures == 0 && tally.matching_failures == 0,
        detail: format!(
            "{} runs with eps > L/T, {} Hall failures, {} MatchingFailure events",
            tally.transfer_runs, tally.hall_failures, tally.matching_failures
        ),
    });
    lines.push(Line {
        id: 4,
        name: "Lemma 2 counting (gamma = 1/eps, >= form)",
        pass: tally.lemma2_violations == 0 && tally.classifications >= CLASSIFICATIONS,
        detail: format!(
            "{} classifications, {} violations, {} equality cases logged",
            tally.classifications, tally.lemma2_violations, tally.lemma2_equalities
        ),
    });
}

/// Restricted instances shared by criteria 5 and 9.
fn restricted_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED ^ 0x5);
    (0..RESTRICTED_INSTANCES as u64)
        .map(|s| generate(&restricted_spec(&mut rng, BASE_SEED + 10_000 + s, 8..=24)).unwrap())
        .collect()
}

fn theorem2(lines: &mut Vec<Line>, instances: &[Instance]) {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut max_moves = 0u64;
    let mut push_runs = 0;
    for (idx, inst) in instances.iter().enumerate() {
        let w = inst.p_max();
        let k = inst.k_min() as u128;
        let total = inst.total_size() as u128;
        for strategy in [Strategy::Descent, Strategy::PathPush] {
            let s = match solve_restricted(inst, strategy) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("#{idx} {strategy:?}: {e}"));
                    continue;
                }
            };
            let delta = ratio(total as i128, k as i128);
            let part = partition(inst, &s.assignment, w, delta);
            let bound_ok = s.makespan as u128 * k <= w as u128 * k + total;
            let moves_ok = (s.moves as u128) <= total * total / 2;
            if !part.plus.is_empty() || !bound_ok || !moves_ok {
                failures.push(format!("#{idx} {strategy:?}: certificate failed"));
            }
            max_moves = max_moves.max(s.moves);
            if strategy == Strategy::PathPush && s.pushes > 0 {
                push_runs += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    lines.push(Line {
        id: 5,
        name: "Theorem 2 / Lemma 4 restricted balancing",
        pass: failures.is_empty() && elapsed < THEOREM2_BUDGET,
        detail: format!(
            "{} instances x 2 strategies, {} failures, max moves {}, {} path-push runs pushed, {:.2?} (budget {:?}){}",
            instances.len(),
            failures.len(),
            max_moves,
            push_runs,
            elapsed,
            THEOREM2_BUDGET,
            failures.first().map(|e| format!("; first: {e}")).unwrap_or_default()
        ),
    });
}

fn oracle_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED ^ 0x6);
    (0..ORACLE_INSTANCES as u64 * 2)
        .map(|s| {
            let m = rng.random_range(2..=3);
            let spec = GeneratorSpec {
                m,
                n: rng.random_range(2..=9),
                pmax: 20,
                k: rng.random_range(1..=m),
                seed: BASE_SEED + 20_000 + s,
                restricted: s % 2 == 0,
            };
            generate(&spec).unwrap()
        })
        .collect()
}

fn oracle_ratios(lines: &mut Vec<Line>, instances: &[Instance]) {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (mut restricted, mut certified, mut general) = (0, 0, 0);
    let mut worst_general = int(0);
    for (idx, inst) in instances.iter().enumerate() {
        let opt = match optimal_makespan(inst) {
            Ok(r) => r.opt_makespan as i128,
            Err(e) => {
                failures.push(format!("#{idx}: {e}"));
                continue;
            }
        };
        if inst.is_restricted() {
            restricted += 1;
            let s = solve_restricted(inst, Strategy::Descent).unwrap();
            let cert = ratio_bound(inst).unwrap();
            if let Some(r) = cert.ratio {
                certified += 1;
                if ratio(s.makespan as i128, opt) > r {
                    failures.push(format!("#{idx}: restricted ratio above 1 + q/eps"));
                }
            }
        } else {
            general += 1;
            match run_general(inst) {
                Ok(run) => {
                    let r = ratio(run.schedule.makespan as i128, opt);
                    worst_general = worst_general.max(r);
                    if r > int(2) {
                        failures.push(format!("#{idx}: general ratio {r} above 2"));
                    }
                }
                Err(e) => failures.push(format!("#{idx}: {e}")),
            }
        }
    }
    let elapsed = start.elapsed();
    lines.push(Line {
        id: 6,
        name: "Oracle ratios (m <= 3, n <= 9)",
        pass: failures.is_empty() && restricted + general >= ORACLE_INSTANCES && elapsed < ORACLE_BUDGET,
        detail: format!(
            "{restricted} restricted ({certified} with q < eps), {general} general (worst ratio {worst_general}), {} failures, {:.2?} (budget {:?})",
            failures.len(),
            elapsed,
            ORACLE_BUDGET
        ),
    });
}

fn lemma4_paths(lines: &mut Vec<Line>) {
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED ^ 0x7);
    let (mut states, mut failures, mut draws) = (0, 0, 0);
    while states < PATH_STATES {
        draws += 1;
        let inst = generate(&restricted_spec(&mut rng, BASE_SEED + 30_000 + draws, 4..=20)).unwrap();
        // lean on the lowest-index feasible machine so overload is common
        let machines = (0..inst.jobs())
            .map(|j| {
                let options: Vec<usize> = inst.feasible_machines(j).collect();
                if rng.random_bool(0.8) {
                    options[0]
                } else {
                    options[rng.random_range(0..options.len())]
                }
            })
            .collect();
        let a = Assignment::new(&inst, machines).unwrap();
        let w = inst.p_max();
        let delta = ratio(inst.total_size() as i128, inst.k_min() as i128);
        let part = partition(&inst, &a, w, delta);
        if part.plus.is_empty() {
            continue;
        }
        states += 1;
        let g = build_assignment_graph(&inst, &a, w);
        if path_exists(&g, &part.plus, &part.minus).is_none() {
            failures += 1;
        }
    }
    lines.push(Line {
        id: 7,
        name: "Lemma 4 path from M+ to M-",
        pass: failures == 0,
        detail: format!("{states} states with M+ nonempty ({draws} drawn), {failures} without a path"),
    });
}

fn infeasibility_soundness(lines: &mut Vec<Line>, instances: &[Instance]) {
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED ^ 0x8);
    let (mut trials, mut infeasible, mut contradictions, mut errors) = (0, 0, 0, 0);
    for inst in instances {
        let m = inst.machines() as i128;
        for _ in 0..5 {
            let t = rng.random_range(1..=inst.total_min_time().max(1));
            let l = ratio(rng.random_range(0..=t as i128 * m), m);
            trials += 1;
            match a_um(inst, t, l) {
                Ok(UmOutcome::Infeasible { .. }) => {
                    infeasible += 1;
                    if schedule_exists(inst, t, l).unwrap().is_some() {
                        contradictions += 1;
                    }
                }
                Ok(UmOutcome::Scheduled(_)) => {}
                Err(BalanceError::InvalidParameters(_)) | Err(_) => errors += 1,
            }
        }
    }
    lines.push(Line {
        id: 8,
        name: "Infeasibility soundness vs schedule_exists",
        pass: contradictions == 0 && errors == 0 && infeasible > 0,
        detail: format!(
            "{trials} user-supplied (T, L) pairs, {infeasible} INFEASIBLE, {contradictions} contradictions, {errors} errors"
        ),
    });
}

fn svensson_flag(lines: &mut Vec<Line>, instances: &[Instance]) {
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED ^ 0x9);
    // short instances push q below eps, so the flag is actually exercised
    let short: Vec<Instance> = (0..RESTRICTED_INSTANCES as u64)
        .map(|s| generate(&restricted_spec(&mut rng, BASE_SEED + 40_000 + s, 1..=8)).unwrap())
        .collect();
    let (mut rows, mut should_flag, mut flagged, mut missed, mut equality, mut not_strict) =
        (0, 0, 0, 0, 0, 0);
    for inst in instances.iter().chain(&short) {
        rows += 1;
        let cert = ratio_bound(inst).unwrap();
        let k = inst.k_min() as i128;
        let p = inst.p_max() as i128;
        let w = inst.total_size() as i128;
        // q <= (16/17) eps  <=>  17 W <= 16 k p_max
        let under = 17 * w <= 16 * k * p;
        if under {
            should_flag += 1;
            if !cert.beats_33_17 {
                missed += 1;
            }
        }
        if cert.beats_33_17 {
            flagged += 1;
            // 1 + q/eps < 33/17  <=>  17 (k p_max + W) < 33 k p_max
            if 17 * (k * p + w) >= 33 * k * p {
                not_strict += 1;
            }
            if 17 * (k * p + w) == 33 * k * p {
                equality += 1;
            }
        }
    }
    lines.push(Line {
        id: 9,
        name: "33/17 improvement flag",
        pass: missed == 0 && not_strict == 0 && flagged > 0,
        detail: format!(
            "{rows} restricted instances, {should_flag} with q <= 16/17 eps, {flagged} flagged, {missed} missed, {not_strict} flagged rows not strictly below 33/17 ({equality} at equality)"
        ),
    });
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture are accepted and ignored
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    println!(
        "tolerances: bounds exact (rational / integer); LP pivot {PIVOT_TOL:e}, feasibility {FEAS_TOL:e}, row sums {ROW_TOL:e}, zero snap {ZERO_TOL:e}"
    );
    let mut lines = Vec::new();
    general_criteria(&mut lines);
    let restricted = restricted_instances();
    theorem2(&mut lines, &restricted);
    let small = oracle_instances();
    oracle_ratios(&mut lines, &small);
    lemma4_paths(&mut lines);
    infeasibility_soundness(&mut lines, &small);
    svensson_flag(&mut lines, &restricted);

    lines.sort_by_key(|l| l.id);
    for l in &lines {
        println!(
            "criterion {}: {} - {}: {}",
            l.id,
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.detail
        );
    }
    let failed: Vec<u8> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    let unexpected: Vec<u8> = failed
        .iter()
        .copied()
        .filter(|id| !KNOWN_CONFLICTS.iter().any(|(k, _)| k == id))
        .collect();
    for (id, why) in KNOWN_CONFLICTS {
        if failed.contains(id) {
            println!("criterion {id}: known conflict: {why}");
        }
    }
    println!(
        "acceptance: {} passed, {} failed ({} unexpected)",
        lines.len() - failed.len(),
        failed.len(),
        unexpected.len()
    );
    let strict = std::env::var_os(STRICT_ENV).is_some_and(|v| v == "1");
    if unexpected.is_empty() && (failed.is_empty() || !strict) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
