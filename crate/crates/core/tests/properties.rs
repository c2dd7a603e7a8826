mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spillover::dgp::{balance, ScaleRule};
use spillover::distance::{total_variation, wasserstein, DesignDistribution};
use spillover::estimators::{estimands, ArmSums, EstimandMode};
use spillover::metrics::{c_moment, dependence_matrix, pair_metrics, spectral_radius};
use spillover::mixing::{mixing_coefficients, DEFAULT_ATOM_LIMIT};
use spillover::montecarlo::error_stats;
use spillover::transport;
use spillover::{AssignmentVector, DesignSpec, InterferenceGraph, RegularityConstants};

use common::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = InterferenceGraph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.15), n * n).prop_map(move |bits| {
            let edges = (0..n * n).filter(|&k| bits[k]).map(|k| (k / n, k % n));
            InterferenceGraph::from_edges(n, edges).unwrap()
        })
    })
}

fn even_graph_strategy(max_half: usize) -> impl Strategy<Value = (InterferenceGraph, u64)> {
    (1..=max_half).prop_flat_map(|half| {
        let n = 2 * half;
        (proptest::collection::vec(proptest::bool::weighted(0.15), n * n), any::<u64>()).prop_map(move |(bits, seed)| {
            let edges = (0..n * n).filter(|&k| bits[k]).map(|k| (k / n, k % n));
            (InterferenceGraph::from_edges(n, edges).unwrap(), seed)
        })
    })
}

/// A distribution on `{0,1}^n` with random positive weights on a random subset.
fn distribution_strategy(n: usize) -> impl Strategy<Value = DesignDistribution> {
    proptest::collection::vec(0u32..4, 1 << n).prop_filter_map("empty support", move |w| {
        let total: u32 = w.iter().sum();
        if total == 0 {
            return None;
        }
        let points = (0..1u64 << n)
            .filter(|&m| w[m as usize] > 0)
            .map(|m| (AssignmentVector::from_mask(m, n), w[m as usize] as f64 / total as f64))
            .collect();
        Some(DesignDistribution::new(n, points).unwrap())
    })
}

fn design_strategy(n: usize) -> impl Strategy<Value = DesignSpec> {
    prop_oneof![
        proptest::collection::vec(0.05f64..0.95, n).prop_map(|p| DesignSpec::bernoulli(p).unwrap()),
        (1..n).prop_map(move |k| DesignSpec::complete(n, k).unwrap()),
        any::<u64>().prop_map(move |seed| DesignSpec::paired(random_pairing(n, &mut ChaCha8Rng::seed_from_u64(seed))).unwrap()),
    ]
}

proptest! {
    #[test]
    fn moment_inequalities_hold((graph, seed) in even_graph_strategy(16)) {
        let n = graph.n() as f64;
        let d_avg = dependence_matrix(&graph).d_avg();
        let c1 = c_moment(&graph, 1.0).unwrap();
        let c2 = c_moment(&graph, 2.0).unwrap();
        let cinf = c_moment(&graph, f64::INFINITY).unwrap();
        let partner = random_pairing(graph.n(), &mut ChaCha8Rng::seed_from_u64(seed));
        let (e_avg, _) = pair_metrics(&graph, &partner).unwrap();
        let tol = 1e-9;
        prop_assert!(c1.max(cinf * cinf / n) <= d_avg + tol);
        prop_assert!(d_avg <= c2 * c2 + tol);
        prop_assert!(c2 <= cinf + tol);
        prop_assert!(e_avg <= c2 * c2 + tol);
    }

    #[test]
    fn spectral_radius_between_average_and_max(graph in graph_strategy(24)) {
        let d = dependence_matrix(&graph);
        let lambda = spectral_radius(&d, 1e-12, 200_000).unwrap();
        prop_assert!(d.d_avg() <= lambda + 1e-6);
        prop_assert!(lambda <= d.d_max() as f64 + 1e-6);
    }

    #[test]
    fn ht_mean_equals_adse(seed in any::<u64>(), design in (2usize..=3).prop_flat_map(|h| design_strategy(2 * h))) {
        let oracle = random_table_oracle(design.n(), &mut ChaCha8Rng::seed_from_u64(seed));
        let p = design.marginal_probs();
        let mean: f64 = design
            .enumerate_support(1 << 10)
            .unwrap()
            .iter()
            .map(|(z, w)| w * ht_by_hand(z, &spillover::PotentialOutcomes::evaluate(&oracle, z), &p))
            .sum();
        let v = estimands(&oracle, &design, EstimandMode::Exact { limit: 1 << 10 }).unwrap();
        prop_assert!((mean - v.adse).abs() < 1e-12);
    }

    #[test]
    fn hajek_equals_ht_when_balanced(ys in proptest::collection::vec(-50.0f64..50.0, 2..40), seed in any::<u64>()) {
        let n = ys.len() / 2 * 2;
        let y = &ys[..n];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for design in [DesignSpec::complete(n, n / 2).unwrap(), DesignSpec::paired(random_pairing(n, &mut rng)).unwrap()] {
            let z = design.sample(&mut rng);
            let sums = ArmSums::compute(&z, y, &design.marginal_probs());
            prop_assert_eq!(sums.ht().point.to_bits(), sums.hajek().unwrap().point.to_bits());
        }
    }

    #[test]
    fn total_variation_is_a_bounded_symmetric_distance(p in distribution_strategy(3), q in distribution_strategy(3)) {
        let pq = total_variation(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        prop_assert!((pq - total_variation(&q, &p).unwrap()).abs() < 1e-12);
        prop_assert!(total_variation(&p, &p).unwrap() < 1e-12);
        // Distinct points are at Hamming distance between 1 and n.
        let w1 = wasserstein(&p, &q, 1.0).unwrap();
        prop_assert!(pq <= w1 + 1e-9);
        prop_assert!(w1 <= 3.0 * pq + 1e-9);
    }

    #[test]
    fn wasserstein_triangle(p in distribution_strategy(3), q in distribution_strategy(3), s in distribution_strategy(3), r in 1.0f64..3.0) {
        let pq = wasserstein(&p, &q, r).unwrap();
        let qs = wasserstein(&q, &s, r).unwrap();
        let ps = wasserstein(&p, &s, r).unwrap();
        prop_assert!(ps <= pq + qs + 1e-9);
        prop_assert!((pq - wasserstein(&q, &p, r).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn transport_strong_duality(
        m in 1usize..7,
        k in 1usize..7,
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut supply: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let mut demand: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let (ts, td): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
        supply.iter_mut().for_each(|s| *s /= ts);
        demand.iter_mut().for_each(|d| *d /= td);
        let cost: Vec<f64> = (0..m * k).map(|_| rng.random_range(0.0..5.0)).collect();
        let sol = transport::solve(&supply, &demand, &cost).unwrap();
        let dual: f64 = supply.iter().zip(&sol.u).map(|(a, u)| a * u).sum::<f64>()
            + demand.iter().zip(&sol.v).map(|(b, v)| b * v).sum::<f64>();
        prop_assert!((dual - sol.cost).abs() < 1e-9);
        for i in 0..m {
            for j in 0..k {
                prop_assert!(sol.u[i] + sol.v[j] <= cost[i * k + j] + 1e-9);
            }
        }
        let primal: f64 = sol.plan.iter().map(|&(i, j, f)| f * cost[i * k + j]).sum();
        prop_assert!((primal - sol.cost).abs() < 1e-9);
    }

    #[test]
    fn rmse_decomposes(est in proptest::collection::vec(-100.0f64..100.0, 1..200), reference in -10.0f64..10.0) {
        let (bias, sd, rmse) = error_stats(&est, reference).unwrap();
        prop_assert!((rmse * rmse - (bias * bias + sd * sd)).abs() <= 1e-8 * (1.0 + rmse * rmse));
    }

    #[test]
    fn balance_is_antisymmetric(bits in proptest::collection::vec(any::<bool>(), 1..30), weighted in any::<bool>(), seed in any::<u64>()) {
        use rand::Rng;
        let n = bits.len();
        let z = AssignmentVector::from_bools(&bits).unwrap();
        let flipped = AssignmentVector::from_bools(&bits.iter().map(|b| !b).collect::<Vec<_>>()).unwrap();
        let set: Vec<u32> = (0..n as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        let w = weighted.then_some(weights.as_slice());
        prop_assert_eq!(balance(&set, &z, w), -balance(&set, &flipped, w));
    }

    #[test]
    fn sampled_assignments_lie_in_the_support(design in (1usize..=5).prop_flat_map(|h| design_strategy(2 * h)), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let support = design.enumerate_support(1 << 10).unwrap();
        for _ in 0..20 {
            let z = design.sample(&mut rng);
            prop_assert!(support.iter().any(|(s, w)| *s == z && *w > 0.0));
            match &design {
                DesignSpec::Complete { treated, .. } => prop_assert_eq!(z.treated_count(), *treated),
                DesignSpec::Paired { partner } => {
                    for (i, &j) in partner.iter().enumerate() {
                        prop_assert!(z.is_treated(i) != z.is_treated(j));
                    }
                }
                _ => {}
            }
        }
        let total: f64 = support.iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixing_coefficients_are_at_most_a_quarter((graph, seed) in even_graph_strategy(3), which in 0usize..3) {
        let n = graph.n();
        let design = match which {
            0 => DesignSpec::bernoulli_uniform(n, 0.4).unwrap(),
            1 => DesignSpec::complete(n, n / 2).unwrap(),
            _ => DesignSpec::paired(random_pairing(n, &mut ChaCha8Rng::seed_from_u64(seed))).unwrap(),
        };
        let constants = RegularityConstants::new(2.0, f64::INFINITY, f64::INFINITY).unwrap();
        let report = mixing_coefficients(&design, &graph, &constants, DEFAULT_ATOM_LIMIT).unwrap();
        for (_, _, a) in &report.pair_alphas {
            prop_assert!((-1e-12..=0.25 + 1e-12).contains(a));
        }
        for a in &report.unit_alphas {
            prop_assert!((-1e-12..=0.25 + 1e-12).contains(a));
        }
    }

    #[test]
    fn edge_list_round_trip(graph in graph_strategy(20)) {
        let text = graph.to_edge_list();
        prop_assert_eq!(InterferenceGraph::parse_edge_list(&text, Some(graph.n())).unwrap(), graph);
    }

    #[test]
    fn design_json_round_trip(design in (1usize..=6).prop_flat_map(|h| design_strategy(2 * h))) {
        prop_assert_eq!(DesignSpec::from_json(&design.to_json()).unwrap(), design);
    }

    #[test]
    fn scale_rules_stay_in_range(coef in 0.01f64..100.0, exponent in 0.0f64..1.0, n in 1usize..100_000) {
        let a = ScaleRule::power(coef, exponent).value(n);
        prop_assert!((1.0..=n as f64).contains(&a));
    }
}
