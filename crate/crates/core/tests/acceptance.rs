//! Acceptance suite: every criterion runs and prints one PASS/FAIL line.
//! Oracles are written here, independently of the library code under test.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use pol_core::classify::{
    is_quasi_normal, membership, representation_search, BoundFunction, RepresentationSearch,
    SetDescriptor, Verdict,
};
use pol_core::config::Limits;
use pol_core::generators::{
    empirical_class_rates, generate, stream_rng, Family, GeneratorSpec, RunGrowth,
};
use pol_core::hilbert::{random_unit_vector, run_map, StopRule, SubspaceSystem};
use pol_core::parallel::{map_indexed, Execution};
use pol_core::partition::greedy_starts_in_word;
use pol_core::porosity::{
    phi, phi_from_ln, phi_inverse, phi_inverse_ln, verify_certificate, witness_a,
    witness_a_min_exp, witness_b, witness_f, witness_nlc, VerifyMode, WitnessCertificate,
};
use pol_core::seqspace::{
    distance, enumerate_ball_prefixes, Alphabet, DyadicRadius, Symbol, SymbolicSequence,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const EXEC: Execution = Execution::Parallel;

fn alpha(n: u32) -> Alphabet {
    Alphabet::new(n).unwrap()
}

/// Every word of length `len` over `1..=n`, by counting in base `n`.
fn words(n: u32, len: usize) -> Vec<Vec<Symbol>> {
    let total = (n as usize).pow(len as u32);
    (0..total)
        .map(|mut i| {
            let mut w = vec![0; len];
            for slot in w.iter_mut().rev() {
                *slot = (i % n as usize) as Symbol + 1;
                i /= n as usize;
            }
            w
        })
        .collect()
}

fn window_covers(w: &[Symbol], n: u32) -> bool {
    (1..=n).all(|s| w.contains(&s))
}

/// All valid partitions (nonempty, starts ≥ previous + L, every block covers
/// the alphabet) of a finite word, by plain recursion.
fn all_partitions(word: &[Symbol], n: u32, l: usize) -> Vec<Vec<usize>> {
    fn go(
        word: &[Symbol],
        n: u32,
        l: usize,
        from: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for r in from..word.len() {
            if r + l > word.len() {
                break;
            }
            if window_covers(&word[r..r + l], n) {
                cur.push(r + 1);
                out.push(cur.clone());
                go(word, n, l, r + l, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(word, n, l, 0, &mut Vec::new(), &mut out);
    out
}

fn recip_sum(starts: impl IntoIterator<Item = u64>) -> BigRational {
    starts.into_iter().fold(BigRational::zero(), |acc, r| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(r))
    })
}

// 1 ---------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let (n, l, len) = (3u32, 3usize, 12usize);
    let all = words(n, len);
    let violations: Vec<usize> = map_indexed(EXEC, all.len(), |i| {
        let w = &all[i];
        let greedy = greedy_starts_in_word(w, alpha(n), l, usize::MAX);
        let gsum = recip_sum(greedy.iter().copied());
        all_partitions(w, n, l)
            .into_iter()
            .filter(|p| {
                let pointwise = p.len() <= greedy.len()
                    && p.iter().zip(&greedy).all(|(&alt, &g)| g <= alt as u64);
                let sum_ok = gsum >= recip_sum(p.iter().map(|&r| r as u64));
                !(pointwise && sum_ok)
            })
            .count()
    });
    let bad: usize = violations.iter().sum();
    let detail = format!(
        "{} prefixes of length {len}, N={n}, L={l}: {bad} violations",
        all.len()
    );
    if bad == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 2 ---------------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let mut checked = 0usize;
    for n in 1..=3u32 {
        for j in 1..=5usize {
            let all = words(n, j + 2);
            for center in &all {
                let c = SymbolicSequence::eventually_periodic(alpha(n), center.clone(), vec![1])
                    .unwrap();
                let radius = DyadicRadius(j as u64);
                let mut ball: Vec<Vec<Symbol>> = Vec::new();
                for w in &all {
                    let z = SymbolicSequence::eventually_periodic(alpha(n), w.clone(), vec![1])
                        .unwrap();
                    let inside = distance(&c, &z).unwrap().is_less_than(radius);
                    if inside != (w[..j] == center[..j]) {
                        return Err(format!("N={n} j={j} center {center:?} word {w:?}"));
                    }
                    if inside {
                        ball.push(w.clone());
                    }
                    checked += 1;
                }
                let enumerated = enumerate_ball_prefixes(&c, radius, 2, u128::MAX).unwrap();
                if enumerated != ball {
                    return Err(format!(
                        "enumerated ball differs at N={n} j={j} center {center:?}"
                    ));
                }
            }
        }
    }
    Ok(format!(
        "{checked} (center, word) pairs; metric ball = prefix cylinder"
    ))
}

// 3 ---------------------------------------------------------------------------

fn criterion_3() -> Outcome {
    if phi_inverse(1.0).unwrap() != 1.0 {
        return Err("φ⁻¹(1) ≠ 1".into());
    }
    let (lo, hi) = (1e-6, 1.0 - 1e-6);
    let grid: Vec<f64> = (1..=1000)
        .map(|i| lo + (hi - lo) * i as f64 / 1001.0)
        .collect();
    let mut worst_log = 0.0f64;
    let mut worst_plain = 0.0f64;
    let mut plain_points = 0;
    for &t in &grid {
        let back = phi_from_ln(phi_inverse_ln(t).unwrap()).unwrap();
        worst_log = worst_log.max((back - t).abs());
        let s = phi_inverse(t).unwrap();
        if s >= f64::MIN_POSITIVE {
            plain_points += 1;
            worst_plain = worst_plain.max((phi(s).unwrap() - t).abs());
        }
    }
    // second differences of φ⁻¹ on (0, 1/3)
    let h = (1.0 / 3.0) / 1001.0;
    let vals: Vec<f64> = (1..=1000)
        .map(|i| phi_inverse(i as f64 * h).unwrap())
        .collect();
    let negative = vals
        .windows(3)
        .filter(|w| w[0] - 2.0 * w[1] + w[2] < 0.0)
        .count();
    let detail = format!(
        "round-trip max error {worst_log:.2e} (log domain, 1000 points), {worst_plain:.2e} (f64, {plain_points} points); {negative} negative second differences"
    );
    if worst_log <= 1e-12 && worst_plain <= 1e-12 && negative == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 4 ---------------------------------------------------------------------------

fn seeded_prefix(n: u32, len: usize, seed: u64) -> SymbolicSequence {
    let mut rng = stream_rng(seed, 4);
    let w = (0..len).map(|_| rng.gen_range(1..=n)).collect();
    SymbolicSequence::finite_prefix(alpha(n), w).unwrap()
}

fn criterion_4() -> Outcome {
    let limits = Limits::default();
    let mut certs: Vec<WitnessCertificate> = Vec::new();
    for n in [2u32, 3] {
        for j in 1..=4u64 {
            // every base prefix of length j
            for base in words(n, j as usize) {
                let x = SymbolicSequence::finite_prefix(alpha(n), base).unwrap();
                for k in 0..=2usize {
                    certs.push(witness_b(&x, k, j).unwrap());
                }
                for m in 1..=3u64 {
                    for sym in 1..=n {
                        certs.push(witness_f(&x, sym, m, j).unwrap());
                    }
                }
                for c in [1.0, 2.0] {
                    for l in [n as usize, n as usize + 1] {
                        certs.push(witness_nlc(&x, l, &BoundFunction::linear(c), j).unwrap());
                    }
                }
            }
        }
        for m in 1..=3u64 {
            let min = witness_a_min_exp(n, m);
            for e in [min + 1, min + 2] {
                for seed in 0..3 {
                    let x = seeded_prefix(n, e as usize, seed);
                    certs.push(witness_a(&x, m, e, &limits).unwrap());
                }
            }
        }
    }
    let failures: Vec<String> = map_indexed(EXEC, certs.len(), |i| {
        let c = &certs[i];
        let mut errs = Vec::new();
        match verify_certificate(c, VerifyMode::PrefixForced, &limits, Execution::Sequential) {
            Ok(r) if r.passed => {}
            other => errs.push(format!("prefix-forced {:?}: {other:?}", c.set)),
        }
        match verify_certificate(
            c,
            VerifyMode::Enumerate { extra: 2 },
            &limits,
            Execution::Sequential,
        ) {
            Ok(r) if r.passed => {}
            other => errs.push(format!("enumerate {:?}: {other:?}", c.set)),
        }
        errs
    })
    .into_iter()
    .flatten()
    .collect();
    let detail = format!(
        "{} certificates (A, B, F, N_Lc), both modes: {} failures",
        certs.len(),
        failures.len()
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {}", failures[0]))
    }
}

// 5 ---------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let bound = BoundFunction::linear(2.0);
    let mut checked = 0;
    for seed in 0..20u64 {
        let spec = GeneratorSpec::PcBounded {
            block_len: 3,
            bound: pol_core::classify::BoundSpec::Linear { c: 2.0 },
            seed,
            length: 12,
        };
        let x = generate(&spec, alpha(3)).unwrap();
        for n in 1..=12u64 {
            let cert = witness_nlc(&x, 3, &bound, n).unwrap();
            let w = cert.witness.prefix(cert.radius_exp as usize).unwrap();
            match representation_search(&w, alpha(3), 3, &bound).unwrap() {
                RepresentationSearch::Infeasible => {}
                RepresentationSearch::Escapes { starts } => {
                    return Err(format!(
                        "seed {seed} n {n}: representation {starts:?} escapes"
                    ))
                }
            }
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} balls (20 prefixes × n = 1..=12): no representation satisfies the bound"
    ))
}

// 6 ---------------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let stop = StopRule {
        tol: 1e-6,
        max_iters: 100_000,
        log_stride: 1000,
    };
    let run = |n: usize, seed: u64, order: &SymbolicSequence| -> (usize, f64) {
        let d = 2 + (seed as usize % 9);
        let system = SubspaceSystem::random(d, n, seed).unwrap();
        let xi0 = random_unit_vector(d, seed);
        let t = run_map(&system, order, &xi0, stop).unwrap();
        (t.steps, t.final_distance)
    };
    let periodic3 = SymbolicSequence::periodic(alpha(3), vec![1, 2, 3]).unwrap();
    let alternating = SymbolicSequence::periodic(alpha(2), vec![1, 2]).unwrap();
    let halperin = map_indexed(EXEC, 50, |i| run(3, i as u64, &periodic3));
    let von_neumann = map_indexed(EXEC, 50, |i| run(2, 1000 + i as u64, &alternating));
    let sakai = map_indexed(EXEC, 20, |i| {
        let m = 3 + i % 4;
        let order = generate(
            &GeneratorSpec::QuasiPeriodic { m, seed: i as u64 },
            alpha(3),
        )
        .unwrap();
        run(3, 2000 + i as u64, &order)
    });
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, rs) in [
        ("periodic N=3", &halperin),
        ("alternating N=2", &von_neumann),
        ("quasi-periodic m≤6", &sakai),
    ] {
        let bad = rs.iter().filter(|(_, d)| *d > 1e-6).count();
        let worst = rs.iter().map(|r| r.0).max().unwrap_or(0);
        ok &= bad == 0;
        lines.push(format!(
            "{name}: {}/{} converged, max {worst} projections",
            rs.len() - bad,
            rs.len()
        ));
    }
    if ok {
        Ok(lines.join("; "))
    } else {
        Err(lines.join("; "))
    }
}

// 7 ---------------------------------------------------------------------------

fn criterion_7() -> Outcome {
    use nalgebra::DVector;
    let spans = vec![
        vec![DVector::from_vec(vec![1.0, 0.0])],
        vec![DVector::from_vec(vec![1.0, 1.0])],
    ];
    let system = SubspaceSystem::from_spanning(2, &spans, 1e-12).unwrap();
    let xi0 = DVector::from_vec(vec![1.0, 0.0]);
    let order = SymbolicSequence::periodic(alpha(2), vec![2, 1]).unwrap();
    let stop = StopRule {
        tol: 0.0,
        max_iters: 80,
        log_stride: 2,
    };
    let t = run_map(&system, &order, &xi0, stop).unwrap();
    // oracle: each pair P1 P2 maps (a, 0) to (a/2, 0)
    let mut worst = 0.0f64;
    for (e, xi) in t.log.iter().zip(&t.iterates) {
        if e.step % 2 != 0 || e.step > 80 {
            continue;
        }
        let expected = 0.5f64.powi((e.step / 2) as i32);
        worst = worst.max((xi.norm() - expected).abs() / expected);
    }
    let covered = t.log.iter().filter(|e| e.step % 2 == 0).count();
    let detail = format!("n = 0..=40 ({covered} checkpoints): max relative error {worst:.2e}");
    if covered >= 41 && worst <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 8 ---------------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let limits = Limits::default();
    let mut restricted_gaps: Vec<String> = Vec::new();
    for seed in 0..100u64 {
        let mut rng = stream_rng(seed, 8);
        let t_len = rng.gen_range(0..=4);
        let p_len = rng.gen_range(1..=8);
        let transient: Vec<Symbol> = (0..t_len).map(|_| rng.gen_range(1..=3)).collect();
        let period: Vec<Symbol> = (0..p_len).map(|_| rng.gen_range(1..=3)).collect();
        let x = SymbolicSequence::eventually_periodic(alpha(3), transient, period).unwrap();
        let qn = is_quasi_normal(&x).unwrap().verdict == Verdict::Member;
        // x ∉ ∪_M A{L,M} ∪ ∪_k B{L,k}, with M ≤ 1000 and k ≤ 10; A{L,M} grows
        // with M, so M = 1000 covers the whole range and the small M are spot checks
        let outside = |l: usize| -> bool {
            [1u64, 2, 3, 10, 1000].into_iter().all(|m| {
                membership(&x, &SetDescriptor::A { l, m }, &limits)
                    .unwrap()
                    .verdict
                    == Verdict::NonMember
            }) && (0..=10usize).all(|k| {
                membership(&x, &SetDescriptor::B { l, k }, &limits)
                    .unwrap()
                    .verdict
                    == Verdict::NonMember
            })
        };
        let at_n = outside(3);
        // restricted decomposition: outside every A{3,M}, B{3,k} ⇒ quasi-normal
        if at_n && !qn {
            return Err(format!(
                "seed {seed}: {x} avoids every A{{3,M}}, B{{3,k}} but is not quasi-normal"
            ));
        }
        // full decomposition over L ≥ N (L beyond the period length changes nothing)
        let any_l = at_n || (4..=p_len.max(3)).any(outside);
        if any_l != qn {
            return Err(format!(
                "seed {seed}: {x} quasi-normal = {qn}, outside A/B for some L = {any_l}"
            ));
        }
        if qn && !at_n {
            restricted_gaps.push(x.to_string());
        }
    }
    // The restriction to L = N is a containment only: a quasi-normal sequence
    // whose period has no covering window of length 3 lies in some B{3,k}.
    Ok(format!(
        "100 sequences: quasi-normal ⇔ outside all A{{L,M}}, B{{L,k}} for some L ≥ 3; outside at L=3 ⇒ quasi-normal; \
         {} quasi-normal sequences lie in B{{3,k}} (finite greedy 3-partition): {}",
        restricted_gaps.len(),
        restricted_gaps.join(", ")
    ))
}

// 9 ---------------------------------------------------------------------------

fn criterion_9() -> Outcome {
    let iid = Family {
        id: "iid".into(),
        generator: GeneratorSpec::IidUniform {
            seed: 9,
            length: 10_000,
        },
    };
    let adversarial = Family {
        id: "adversarial".into(),
        generator: GeneratorSpec::AdversarialRuns {
            growth: RunGrowth::Exponential { base: 2 },
            length: 10_000,
        },
    };
    let a = empirical_class_rates(&iid, alpha(3), 1000, 10_000, 3, 2, EXEC).unwrap();
    let b = empirical_class_rates(&adversarial, alpha(3), 1000, 10_000, 3, 2, EXEC).unwrap();
    let detail = format!(
        "i.i.d. bounded-density fraction {:.3}, adversarial runs {:.3}",
        a.bounded_density_rate, b.bounded_density_rate
    );
    if a.bounded_density_rate >= 0.99 && b.bounded_density_rate <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("greedy optimality oracle", criterion_1),
        ("ball identity", criterion_2),
        ("φ-gauge", criterion_3),
        ("witness certificates", criterion_4),
        ("N_Lc escape", criterion_5),
        ("MAP convergence", criterion_6),
        ("closed-form decay", criterion_7),
        ("classification coherence", criterion_8),
        ("empirical genericity", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {}: PASS {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                println!("criterion {}: FAIL {name} ({secs:.1}s): {d}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
