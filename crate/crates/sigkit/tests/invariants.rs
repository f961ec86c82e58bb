//! Cross-module laws: unranking against a brute-force oracle, the exact
//! cardinality identities behind the ratio updates, grid geometry of scaled
//! compositions, and the statistical behaviour of the estimators.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

use sigkit::{
    cohen_kappa, composition_count, enumerate_all, exact_varrho, gamma, gamma_inv,
    information_agreement, mc_rho, mc_varrho, project, sample_simplex, to_probability,
    unrank_lex, unrank_lex_fast, ConfusionMatrix, Measure, ProbabilityMatrix64, RngStream,
    WeakComposition,
};

/// Independent oracle: recursive generation of all weak compositions of `m`
/// into `k` parts, sorted lexicographically afterwards. Shares no code with
/// the iterator or the unranking walks.
fn brute_force_compositions(m: u64, k: u64) -> Vec<Vec<u64>> {
    fn rec(m: u64, k: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if k == 1 {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=m {
            prefix.push(v);
            rec(m - v, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, &mut Vec::new(), &mut out);
    out.sort();
    out
}

#[test]
fn unranking_matches_brute_force_for_small_spaces() {
    for m in 0..=6u64 {
        for k in 1..=6u64 {
            let oracle = brute_force_compositions(m, k);
            let count = composition_count(m, k);
            assert_eq!(BigUint::from(oracle.len()), count);

            let enumerated: Vec<Vec<u64>> =
                enumerate_all(m, k).map(WeakComposition::into_parts).collect();
            assert_eq!(enumerated, oracle);

            let mut previous: Option<WeakComposition> = None;
            let mut rank = BigUint::zero();
            for expected in &oracle {
                let slow = unrank_lex(m, k, &rank).unwrap();
                let fast = unrank_lex_fast(m, k, &rank).unwrap();
                assert_eq!(slow.parts(), expected.as_slice());
                assert_eq!(fast, slow);
                if let Some(prev) = previous {
                    assert!(prev < slow, "lexicographic order violated at rank {rank}");
                }
                previous = Some(slow);
                rank += 1u32;
            }
        }
    }
}

#[test]
fn fast_and_slow_unranking_agree_exhaustively() {
    for m in 0..=8u64 {
        for k in 1..=6u64 {
            let count = composition_count(m, k).to_u64().unwrap();
            for rank in 0..count {
                let rank = BigUint::from(rank);
                assert_eq!(
                    unrank_lex_fast(m, k, &rank).unwrap(),
                    unrank_lex(m, k, &rank).unwrap()
                );
            }
        }
    }
}

#[test]
fn fast_and_slow_unranking_agree_on_large_random_inputs() {
    let mut rng = RngStream::new(0xC0FFEE, 0);
    for _ in 0..1000 {
        let m = rng.next_u64() % 10_001;
        let k = 1 + rng.next_u64() % 25;
        let count = composition_count(m, k);
        let rank = rng.uniform_below(&count);
        assert_eq!(
            unrank_lex_fast(m, k, &rank).unwrap(),
            unrank_lex(m, k, &rank).unwrap(),
            "mismatch at m={m} k={k} rank={rank}"
        );
    }
}

#[test]
fn cardinality_ratio_identities_hold_exactly() {
    // m * |C(m,k)| = (m+k-1) * |C(m-1,k)| and
    // (k-1) * |C(m,k)| = (m+k-1) * |C(m,k-1)| in exact integers.
    for m in 1..=50u64 {
        for k in 2..=50u64 {
            let c_mk = composition_count(m, k);
            let num = &c_mk * m;
            let den = BigUint::from(m + k - 1);
            assert!((&num % &den).is_zero());
            assert_eq!(num / &den, composition_count(m - 1, k));

            let num = &c_mk * (k - 1);
            assert!((&num % &den).is_zero());
            assert_eq!(num / den, composition_count(m, k - 1));
        }
    }
}

#[test]
fn scaled_projected_compositions_form_a_grid_with_spacing_one_over_m() {
    for m in [3u64, 5, 10] {
        let points: Vec<Vec<f64>> = enumerate_all(m, 4)
            .map(|c| {
                let scaled: Vec<f64> = c.parts().iter().map(|&p| p as f64 / m as f64).collect();
                project(&scaled).unwrap()
            })
            .collect();
        let mut min_dist = f64::INFINITY;
        let mut minimizers_differ_in_one_coord = true;
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let diff: Vec<f64> = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| a - b)
                    .collect();
                let dist = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
                if dist < min_dist - 1e-12 {
                    min_dist = dist;
                    minimizers_differ_in_one_coord =
                        diff.iter().filter(|d| d.abs() > 1e-12).count() == 1;
                } else if (dist - min_dist).abs() <= 1e-12
                    && diff.iter().filter(|d| d.abs() > 1e-12).count() != 1
                {
                    minimizers_differ_in_one_coord = false;
                }
            }
        }
        assert!(
            (min_dist - 1.0 / m as f64).abs() <= 1e-12,
            "m={m}: min distance {min_dist}"
        );
        assert!(minimizers_differ_in_one_coord, "m={m}");
    }
}

#[test]
fn counting_through_probabilities_matches_counting_through_confusion_matrices() {
    // Two routes to the same count: evaluate the measure on the probability
    // matrix induced by each integer matrix, or on a directly constructed
    // float matrix. Also pins the denominator to the space cardinality.
    for measure in [Measure::Kappa, Measure::Ia] {
        for m in 1..=10u64 {
            let c = 0.37;
            let result = exact_varrho(&measure, 2, m, c).unwrap();
            assert_eq!(result.denominator, composition_count(m, 4));

            let mut direct = 0u64;
            for comp in enumerate_all(m, 4) {
                let confusion = ConfusionMatrix::from_flat(comp.parts().to_vec()).unwrap();
                let p = to_probability::<f64>(&confusion).unwrap();
                let value = match measure {
                    Measure::Kappa => cohen_kappa(&p),
                    Measure::Ia => information_agreement(&p),
                };
                if value < c {
                    direct += 1;
                }
            }
            assert_eq!(result.numerator, BigUint::from(direct));
        }
    }
}

#[test]
fn measure_outputs_stay_in_their_declared_ranges() {
    let mut rng = RngStream::new(2024, 0);
    for draw in 0..10_000 {
        let n = 1 + (draw % 5) as u64;
        let point = sample_simplex(n * n, &mut rng);
        let p = ProbabilityMatrix64::from_flat(point.into_coords()).unwrap();
        let kappa = cohen_kappa(&p);
        assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&kappa), "kappa {kappa}");
        let ia = information_agreement(&p);
        assert!((-1e-12..=1.0 + 1e-12).contains(&ia), "ia {ia}");
    }
}

#[test]
fn kappa_is_invariant_under_simultaneous_row_column_permutation() {
    let mut rng = RngStream::new(77, 0);
    for _ in 0..500 {
        let n = 2 + (rng.next_u64() % 3) as usize;
        let point = sample_simplex((n * n) as u64, &mut rng);
        let p = ProbabilityMatrix64::from_flat(point.into_coords()).unwrap();
        // Random permutation by sorting random keys.
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            perm.swap(i, j);
        }
        let mut permuted = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                permuted[perm[i] * n + perm[j]] = p.get(i, j);
            }
        }
        let q = ProbabilityMatrix64::from_flat(permuted).unwrap();
        assert!((cohen_kappa(&p) - cohen_kappa(&q)).abs() <= 1e-12);
    }
}

#[test]
fn mc_varrho_tracks_the_exact_value_across_seeds() {
    // 100 independent seeds, each within 4 plug-in standard errors of the
    // exact value in at least 99 cases.
    let measure = Measure::Kappa;
    let c = 0.3;
    let exact = exact_varrho(&measure, 2, 20, c).unwrap().value();
    let mut within = 0;
    for seed in 0..100u64 {
        let est = mc_varrho(&measure, 2, 20, c, 10_000, seed, 1).unwrap();
        let tolerance = 4.0 * est.std_error;
        if (est.value - exact).abs() <= tolerance {
            within += 1;
        }
    }
    assert!(within >= 99, "only {within}/100 seeds within 4 standard errors");
}

#[test]
fn mc_rho_spread_scales_like_one_over_sqrt_n() {
    let spread = |samples: u64| {
        let values: Vec<f64> = (0..50u64)
            .map(|seed| {
                mc_rho(&Measure::Kappa, 2, 0.5, samples, 1000 + seed, 1)
                    .unwrap()
                    .value
            })
            .collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
    };
    // Ten times the samples should shrink the spread by about sqrt(10).
    let ratio = spread(1_000) / spread(10_000);
    assert!(
        (2.0..=5.0).contains(&ratio),
        "spread ratio {ratio} outside [2, 5]"
    );
}

proptest! {
    #[test]
    fn gamma_round_trips(x in proptest::collection::vec(0u64..1000, 1..=36)) {
        let len = x.len();
        match gamma(&x) {
            Ok(rows) => {
                let n = rows.len();
                prop_assert_eq!(n * n, len);
                prop_assert_eq!(gamma_inv(&rows).unwrap(), x);
            }
            Err(_) => {
                let n = (len as f64).sqrt() as usize;
                prop_assert_ne!(n * n, len);
            }
        }
    }

    #[test]
    fn projection_drops_exactly_one_coordinate(x in proptest::collection::vec(-10.0f64..10.0, 2..=20)) {
        let projected = project(&x).unwrap();
        prop_assert_eq!(projected.len(), x.len() - 1);
        prop_assert_eq!(projected.as_slice(), &x[..x.len() - 1]);
    }

    #[test]
    fn normalization_sums_to_one(entries in proptest::collection::vec(0u64..50, 4usize), extra in 1u64..100) {
        // Guarantee at least one positive test.
        let mut entries = entries;
        entries[0] += extra;
        let matrix = ConfusionMatrix::from_flat(entries).unwrap();
        let p = to_probability::<f64>(&matrix).unwrap();
        let sum: f64 = p.entries().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn measures_are_scale_invariant(entries in proptest::collection::vec(0u64..30, 4usize), scale in 1u64..1000, extra in 1u64..10) {
        let mut entries = entries;
        entries[2] += extra;
        let base = ConfusionMatrix::from_flat(entries.clone()).unwrap();
        let scaled = ConfusionMatrix::from_flat(entries.iter().map(|&e| e * scale).collect()).unwrap();
        let p = to_probability::<f64>(&base).unwrap();
        let q = to_probability::<f64>(&scaled).unwrap();
        // Division is correctly rounded, so the induced distributions are
        // bitwise identical and so are the measure values.
        prop_assert_eq!(p.entries(), q.entries());
        prop_assert_eq!(cohen_kappa(&p), cohen_kappa(&q));
        prop_assert_eq!(information_agreement(&p), information_agreement(&q));
    }
}
