use std::f64::consts::FRAC_PI_4;

use qsec_core::grover::{grover_subspace, plan_iterations, GroverBackend, Oracle, StatevectorBackend, SubspaceBackend};
use qsec_core::registry::{grover_backends, SimConfig};
use qsec_core::Seed;

#[test]
fn statevector_matches_subspace() {
    let sv = StatevectorBackend::default();
    for n in 1..=10u32 {
        for m in [1u64, 2, 4] {
            if m > 1 << n {
                continue;
            }
            let targets: Vec<u64> = (0..m).map(|i| (i * 37 + 5) % (1 << n)).collect();
            let oracle = Oracle::from_targets(n, &targets).unwrap();
            assert_eq!(oracle.marked_count(), m);
            let k_max = (2.0 * (FRAC_PI_4 * 2f64.powi(n as i32).sqrt()).ceil()) as u64;
            let (_, history) = sv.evolve(&oracle, k_max).unwrap();
            for (k, mass) in history.iter().enumerate() {
                let closed = grover_subspace(n, m as u128, k as u64).unwrap();
                assert!((mass - closed).abs() < 1e-9, "n={n} m={m} k={k}: {mass} vs {closed}");
            }
        }
    }
}

#[test]
fn backends_agree_through_the_registry() {
    let cfg = SimConfig::default();
    let oracle = Oracle::from_targets(6, &[9, 40]).unwrap();
    let k = plan_iterations(6, 2).unwrap().iterations;
    let runs: Vec<_> = grover_backends()
        .names()
        .into_iter()
        .map(|name| {
            let b = grover_backends().create(name, &cfg).unwrap();
            b.run(&oracle, k, &mut Seed::new(4).stream()).unwrap()
        })
        .collect();
    assert!((runs[0].success_probability - runs[1].success_probability).abs() < 1e-9);
    assert_eq!(runs[0].history.len(), runs[1].history.len());
}

#[test]
fn worked_example_is_exact() {
    let oracle = Oracle::from_targets(2, &[3]).unwrap();
    let run = StatevectorBackend::default().run(&oracle, 1, &mut Seed::new(0).stream()).unwrap();
    assert!((run.success_probability - 1.0).abs() < 1e-9);
    assert_eq!(run.measured, "11");
    assert_eq!(run.oracle_queries, 1);
}

#[test]
fn subspace_samples_track_success_probability() {
    let oracle = Oracle::from_targets(8, &[77]).unwrap();
    let plan = plan_iterations(8, 1).unwrap();
    let mut rng = Seed::new(12).stream();
    let trials = 2000;
    let hits = (0..trials)
        .filter(|_| SubspaceBackend.run(&oracle, plan.iterations, &mut rng).unwrap().measured_value == 77)
        .count();
    let p = plan.predicted_success;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((hits as f64 / trials as f64 - p).abs() <= 4.0 * sigma + 1e-3);
}

#[test]
fn statevector_respects_cap() {
    let oracle = Oracle::from_targets(12, &[1]).unwrap();
    assert!(StatevectorBackend::new(10).run(&oracle, 1, &mut Seed::new(0).stream()).is_err());
}
