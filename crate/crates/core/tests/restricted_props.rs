mod common;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tightspan_core::rational::{int, ratio};
use tightspan_core::restricted::{
    build_assignment_graph, improving_move, partition, path_exists, push_along_path,
    ratio_bound, solve_restricted, Strategy,
};
use tightspan_core::{Assignment, Instance};

/// Piles jobs onto their lowest-index feasible machine most of the time so
/// that overloaded machines are common.
fn skewed_assignment(rng: &mut ChaCha8Rng, inst: &Instance) -> Assignment {
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
    Assignment::new(inst, machines).unwrap()
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let m = rng.random_range(2..=6);
    let n = rng.random_range(4..=20);
    let k = rng.random_range(1..=m);
    common::restricted(rng, m, n, k, 20)
}

#[test]
fn overloaded_machines_always_reach_an_underloaded_one() {
    let mut states = 0;
    let mut seed = 0;
    while states < 1000 {
        seed += 1;
        let mut rng = common::rng(seed);
        let inst = random_instance(&mut rng);
        let a = skewed_assignment(&mut rng, &inst);
        let w = inst.p_max() + rng.random_range(0..=2);
        let delta = ratio(inst.total_size() as i128, inst.k_min() as i128);
        let part = partition(&inst, &a, w, delta);
        if part.plus.is_empty() {
            continue;
        }
        states += 1;
        let g = build_assignment_graph(&inst, &a, w);
        let path = path_exists(&g, &part.plus, &part.minus)
            .unwrap_or_else(|| panic!("seed {seed}: no path from M+ to M-"));
        assert!(part.plus.contains(&path.machines[0]));
        assert!(part.minus.contains(path.machines.last().unwrap()));

        let before = inst.loads(&a);
        let b = push_along_path(&inst, &a, &path, w).unwrap();
        let after = inst.loads(&b);
        assert_eq!(before.iter().sum::<u64>(), after.iter().sum::<u64>());
        for i in 0..inst.machines() {
            if !path.machines.contains(&i) {
                assert_eq!(before[i], after[i]);
            }
        }
        let sink = *path.machines.last().unwrap();
        assert!(int(after[sink]) <= delta + int(w), "seed {seed}");
        let source = path.machines[0];
        assert_eq!(after[source], before[source] - inst.size(path.jobs[0]));
    }
}

#[test]
fn descent_decreases_the_potential() {
    for seed in 0..300 {
        let mut rng = common::rng(40_000 + seed);
        let inst = random_instance(&mut rng);
        let mut a = skewed_assignment(&mut rng, &inst);
        let total = inst.total_size();
        let mut moves = 0u64;
        let potential = |a: &Assignment| -> u64 { inst.loads(a).iter().map(|l| l * l).sum() };
        while let Some(mv) = improving_move(&inst, &a) {
            let before = potential(&a);
            let mut v = a.clone().into_vec();
            v[mv.job] = mv.to;
            a = Assignment::new(&inst, v).unwrap();
            assert!(potential(&a) + 2 <= before, "seed {seed}");
            assert_eq!(inst.total_load(&a), total);
            moves += 1;
        }
        assert!(moves <= total * total / 2);
    }
}

#[test]
fn both_strategies_certify_the_bound() {
    for seed in 0..300 {
        let mut rng = common::rng(80_000 + seed);
        let inst = random_instance(&mut rng);
        let w = inst.p_max();
        let k = inst.k_min() as u64;
        let total = inst.total_size();
        let delta = ratio(total as i128, k as i128);
        for strategy in [Strategy::Descent, Strategy::PathPush] {
            let s = solve_restricted(&inst, strategy).unwrap();
            assert!(s.makespan * k <= w * k + total, "seed {seed}");
            assert!(improving_move(&inst, &s.assignment).is_none());
            let part = partition(&inst, &s.assignment, w, delta);
            assert!(part.plus.is_empty());
            let g = build_assignment_graph(&inst, &s.assignment, w);
            assert!(path_exists(&g, &part.plus, &part.minus).is_none());
            assert_eq!(inst.average_load(&s.assignment), ratio(total as i128, inst.machines() as i128));
            assert!(!s.push_cap_hit);
        }
    }
}

#[test]
fn ratio_certificate_is_consistent() {
    for seed in 0..500 {
        let mut rng = common::rng(120_000 + seed);
        let inst = random_instance(&mut rng);
        let r = ratio_bound(&inst).unwrap();
        assert_eq!(r.q, inst.restricted_average_load() / int(inst.p_max()));
        match r.ratio {
            Some(value) => {
                assert!(r.q < r.epsilon);
                assert_eq!(value, int(1) + r.q / r.epsilon);
                assert_eq!(r.beats_33_17, value <= ratio(33, 17));
                assert_eq!(value * int(inst.p_max()), r.absolute_bound);
            }
            None => {
                assert!(r.q >= r.epsilon);
                assert!(!r.beats_33_17);
            }
        }
    }
}
