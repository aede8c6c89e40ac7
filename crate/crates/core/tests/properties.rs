use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use pol_core::classify::is_quasi_normal;
use pol_core::generators::{generate, GeneratorSpec};
use pol_core::hilbert::{projector_matrix, random_unit_vector, run_map, StopRule, SubspaceSystem};
use pol_core::partition::{
    decompose, enumerate_valid_partitions, greedy_partition, greedy_starts_in_word,
};
use pol_core::seqspace::{
    distance, in_ball, Alphabet, Distance, DyadicRadius, Symbol, SymbolicSequence,
};

fn seq_strategy(n: u32) -> impl Strategy<Value = SymbolicSequence> {
    (
        prop::collection::vec(1..=n, 0..6),
        prop::collection::vec(1..=n, 1..6),
    )
        .prop_map(move |(t, p)| {
            SymbolicSequence::eventually_periodic(Alphabet::new(n).unwrap(), t, p).unwrap()
        })
}

fn exponent(d: Distance) -> Option<u64> {
    match d {
        Distance::Zero => None,
        Distance::Dyadic(r) => Some(r.0),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_is_symmetric_ultrametric(x in seq_strategy(3), y in seq_strategy(3), z in seq_strategy(3)) {
        let dxy = distance(&x, &y).unwrap();
        prop_assert_eq!(dxy, distance(&y, &x).unwrap());
        prop_assert_eq!(distance(&x, &x).unwrap(), Distance::Zero);
        let dxz = distance(&x, &z).unwrap().value();
        let dzy = distance(&z, &y).unwrap().value();
        prop_assert!(dxy.value() <= dxz.max(dzy));
        if let Some(e) = exponent(dxy) {
            // d = 2^{-e}: first disagreement at position e
            let e = e as usize;
            let a = x.prefix(e).unwrap();
            let b = y.prefix(e).unwrap();
            prop_assert_eq!(&a[..e - 1], &b[..e - 1]);
            prop_assert_ne!(a[e - 1], b[e - 1]);
        }
    }

    #[test]
    fn balls_are_cylinders(x in seq_strategy(2), y in seq_strategy(2), j in 0u64..8) {
        let inside = distance(&x, &y).unwrap().is_less_than(DyadicRadius(j));
        let px = x.prefix(j as usize).unwrap();
        let py = y.prefix(j as usize + 4).unwrap();
        prop_assert_eq!(inside, px == py[..j as usize]);
        prop_assert_eq!(inside, in_ball(&px, DyadicRadius(j), &py));
    }

    #[test]
    fn greedy_is_pointwise_minimal(word in prop::collection::vec(1u32..=3, 0..14), l in 3usize..5) {
        let a = Alphabet::new(3).unwrap();
        let greedy = greedy_starts_in_word(&word, a, l, usize::MAX);
        for p in enumerate_valid_partitions(&word, a, l).unwrap() {
            prop_assert!(p.len() <= greedy.len());
            for (g, r) in greedy.iter().zip(&p) {
                prop_assert!(g <= r);
            }
        }
    }

    #[test]
    fn decomposition_identity(x in seq_strategy(3), l in 3usize..6) {
        let g = greedy_partition(&x, l, 12).unwrap();
        let d = decompose(&x, &g.starts, l).unwrap();
        prop_assert!(d.identity_holds());
    }

    #[test]
    fn projectors_are_orthogonal(dim in 1usize..=20, n in 1usize..4, seed in any::<u64>()) {
        let system = SubspaceSystem::random(dim, n, seed).unwrap();
        let meet = system.intersection_basis(1e-10);
        let p_meet = projector_matrix(&meet);
        for i in 1..=n as Symbol {
            let p = projector_matrix(system.basis(i).unwrap());
            prop_assert!((&p * &p - &p).abs().max() <= 1e-10);
            prop_assert!((&p - p.transpose()).abs().max() <= 1e-10);
            prop_assert!((&p * &p_meet - &p_meet).abs().max() <= 1e-10);
        }
    }

    #[test]
    fn map_is_nonexpansive(dim in 2usize..=8, seed in any::<u64>(), m in 3usize..6) {
        let system = SubspaceSystem::random(dim, 3, seed).unwrap();
        let a = Alphabet::new(3).unwrap();
        let order = generate(&GeneratorSpec::QuasiPeriodic { m, seed }, a).unwrap();
        prop_assert!(is_quasi_normal(&order).is_ok());
        let xi0 = random_unit_vector(dim, seed ^ 1);
        let stop = StopRule { tol: 1e-9, max_iters: 2000, log_stride: 50 };
        let t = run_map(&system, &order, &xi0, stop).unwrap();
        prop_assert!(t.max_increase <= 1e-12);
        prop_assert!(t.final_distance <= (&xi0 - &t.target).norm() + 1e-12);
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), m in 3usize..7) {
        let a = Alphabet::new(3).unwrap();
        for spec in [
            GeneratorSpec::QuasiPeriodic { m, seed },
            GeneratorSpec::IidUniform { seed, length: 64 },
        ] {
            prop_assert_eq!(generate(&spec, a).unwrap(), generate(&spec, a).unwrap());
        }
        let v1 = random_unit_vector(5, seed);
        let v2: DVector<f64> = random_unit_vector(5, seed);
        prop_assert_eq!(v1, v2);
        let s1 = SubspaceSystem::random(5, 2, seed).unwrap();
        let s2 = SubspaceSystem::random(5, 2, seed).unwrap();
        let b1: &DMatrix<f64> = s1.basis(1).unwrap();
        prop_assert_eq!(b1, s2.basis(1).unwrap());
    }
}
