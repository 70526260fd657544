use qsec_core::shor::{classical_order, pow_mod, shor_factor, ClassicalOrder, FailureReason, PeriodCircuit, QuantumPeriodFinder};
use qsec_core::{Error, Seed};

#[test]
fn classical_factors_small_semiprimes() {
    for (n, want) in [(15, (3, 5)), (21, (3, 7)), (91, (7, 13))] {
        for seed in 0..20 {
            let a = shor_factor(n, &ClassicalOrder, Seed::new(seed), 20).unwrap();
            let b = shor_factor(n, &ClassicalOrder, Seed::new(seed), 20).unwrap();
            assert_eq!(a.factors, Some(want));
            assert_eq!(a, b);
        }
    }
}

#[test]
fn quantum_factors_15_and_21() {
    let finder = QuantumPeriodFinder::default();
    for n in [15u64, 21] {
        let ok = (0..100)
            .filter(|&s| shor_factor(n, &finder, Seed::new(s), 20).is_ok_and(|r| r.factors.is_some()))
            .count();
        assert!(ok >= 95, "n={n}: {ok}/100");
    }
}

#[test]
fn qft_support_for_2_mod_15() {
    let c = PeriodCircuit::prepare(2, 15, 24).unwrap();
    assert_eq!(c.r1_width(), 8);
    let dist = c.r1_distribution().unwrap();
    let support: Vec<usize> = (0..dist.len()).filter(|&m| dist[m] > 1e-9).collect();
    assert_eq!(support, [0, 64, 128, 192]);
    for m in support {
        assert!((dist[m] - 0.25).abs() < 1e-9);
    }
}

#[test]
fn classical_order_is_minimal() {
    let mut rng = Seed::new(77).stream();
    for n in 3..=1000u64 {
        for _ in 0..20 {
            let a = rng.range(2, n);
            if qsec_core::shor::gcd(a, n) != 1 {
                continue;
            }
            let r = classical_order(a, n).unwrap();
            assert_eq!(pow_mod(a, r, n), 1);
            assert!((1..r).all(|s| pow_mod(a, s, n) != 1), "a={a} n={n} r={r}");
        }
    }
}

#[test]
fn primes_and_exhaustion_carry_traces() {
    match shor_factor(13, &ClassicalOrder, Seed::new(0), 5) {
        Err(Error::NoFactorsFound(r)) => assert_eq!(r.failure, Some(FailureReason::Prime)),
        other => panic!("{other:?}"),
    }
    match shor_factor(91, &QuantumPeriodFinder::new(24, 1), Seed::new(0), 0) {
        Err(Error::NoFactorsFound(r)) => {
            assert_eq!(r.failure, Some(FailureReason::AttemptsExhausted));
            assert!(r.attempts.is_empty());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn large_modulus_exceeds_statevector_cap() {
    // 3·⌈log₂ 1003⌉ = 30 qubits
    assert!(matches!(
        shor_factor(1003, &QuantumPeriodFinder::default(), Seed::new(1), 3),
        Err(Error::Resource { .. })
    ));
}
