use pdarray_core::allocation::{brute_force_allocation_search, gamma_mrc, majorizes, optimal_allocation, AllocationProblem};
use pdarray_core::beam::CaptureProfile;
use pdarray_core::scaling::{achievable_rate, beta_min, beta_min_floor, compare_to_reference, loss_factor, reference_rate, PdRegime};
use proptest::prelude::*;

fn regime() -> impl Strategy<Value = PdRegime> {
    prop_oneof![
        Just(PdRegime::CapacitanceLimited),
        Just(PdRegime::ThicknessOptimized),
        Just(PdRegime::TransitTimeLimited),
    ]
}

/// A probability vector and a T-transform of it, which the original majorizes.
fn majorizing_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..8)
        .prop_flat_map(|n| (prop::collection::vec(0.0f64..1.0, n), 0..n, 0..n, 0.0f64..=1.0))
        .prop_filter("distinct indices", |(_, i, j, _)| i != j)
        .prop_filter("nonzero", |(v, ..)| v.iter().sum::<f64>() > 1e-6)
        .prop_map(|(v, i, j, lambda)| {
            let total: f64 = v.iter().sum();
            let p: Vec<f64> = v.iter().map(|x| x / total).collect();
            let mut q = p.clone();
            q[i] = lambda * p[i] + (1.0 - lambda) * p[j];
            q[j] = lambda * p[j] + (1.0 - lambda) * p[i];
            (p, q)
        })
}

proptest! {
    #[test]
    fn beta_min_is_a_decreasing_fraction(m in 1u64..100_000, dm in 1u64..1000, g in 1e-3f64..1e5, dg in 1e-3f64..10.0, r in regime()) {
        let b = beta_min(m, r, g).unwrap();
        prop_assert!(b > 0.0 && b <= 1.0 + 1e-12);
        if m > 1 && r != PdRegime::TransitTimeLimited {
            prop_assert!(beta_min(m, r, g * (1.0 + dg)).unwrap() < b);
        } else {
            prop_assert!((b - 1.0).abs() < 1e-12);
        }
        if r != PdRegime::TransitTimeLimited {
            prop_assert!(beta_min(m + dm, r, g).unwrap() < b);
            prop_assert!(b >= beta_min_floor(g).unwrap() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn floor_decreases_with_snr(g in 1e-6f64..1e6, dg in 1e-3f64..10.0) {
        prop_assert!(beta_min_floor(g * (1.0 + dg)).unwrap() < beta_min_floor(g).unwrap());
    }

    #[test]
    fn crossover_matches_beta_min(m in 1u64..1_000_000, r in regime(), snr_db in -10.0f64..40.0, beta_sq in 0.0f64..1.0) {
        let g = 10f64.powf(snr_db / 10.0);
        let report = compare_to_reference(m, r, beta_sq, g, 1.0).unwrap();
        let rates = report.rate_array >= report.rate_ref;
        // Exactly at the threshold both sides are equal up to rounding.
        if ((beta_sq - report.beta_min_sq) / report.beta_min_sq).abs() > 1e-9 {
            prop_assert_eq!(rates, report.meets_reference);
        }
    }

    #[test]
    fn alpha_restores_reference_rate(m in 1u64..1_000_000, r in regime(), snr_db in -10.0f64..40.0, beta_sq in 1e-6f64..1.0) {
        let g = 10f64.powf(snr_db / 10.0);
        let report = compare_to_reference(m, r, beta_sq, g, 3.0).unwrap();
        let scaled = achievable_rate(m, r, beta_sq * report.alpha * report.alpha, g, 3.0).unwrap();
        let target = reference_rate(g, 3.0).unwrap();
        prop_assert!(((scaled - target) / target).abs() < 1e-12, "{} vs {}", scaled, target);
    }

    #[test]
    fn loss_factor_is_schur_convex((p, q) in majorizing_pair()) {
        prop_assert!(majorizes(&p, &q, 1e-12));
        let lp = loss_factor(&CaptureProfile::from_fractions(p).unwrap());
        let lq = loss_factor(&CaptureProfile::from_fractions(q).unwrap());
        prop_assert!(lp >= lq - 1e-15);
    }

    #[test]
    fn vertex_beats_every_grid_point(
        resp in prop::collection::vec(0.1f64..2.0, 1..=4),
        noise_scale in prop::collection::vec(0.1f64..5.0, 4),
    ) {
        let m = resp.len();
        let noise: Vec<f64> = noise_scale[..m].iter().map(|n| n * 1e-21).collect();
        let problem = AllocationProblem::new(1e-3, resp, noise, 1e9).unwrap();
        let vertex = gamma_mrc(&problem, &optimal_allocation(&problem)).unwrap();
        let (_, best) = brute_force_allocation_search(&problem, 40).unwrap();
        prop_assert!(best <= vertex * (1.0 + 1e-12));
        prop_assert!((best - vertex).abs() <= 1e-12 * vertex);
    }
}
