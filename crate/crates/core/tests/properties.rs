//! Property tests for the cover, graph, coloring, and prep invariants,
//! each checked against independent brute-force recomputation.

use proptest::prelude::*;

use ballmapper::cloud::{filter_range, normalize_minmax, rolling_moments, PointCloud};
use ballmapper::color::{color_by_axis, color_by_distance, color_by_outcome, ReferenceSpec};
use ballmapper::cloud::{MetaColumn, MetaValue};
use ballmapper::graph::{build_graph, connected_components, BMGraph};
use ballmapper::net::{greedy_net, pairwise_distance, BallCover, Metric, NetPolicy, PickOrder};
use ballmapper::synth::{gen_correlated, pearson, standardize};

fn make_cloud(rows: Vec<Vec<f64>>) -> PointCloud {
    let d = rows[0].len();
    let names = (0..d).map(|i| format!("a{i}")).collect();
    let n = rows.len();
    PointCloud::new(names, rows, vec![], (0..n).collect()).unwrap()
}

fn cloud_strategy(max_n: usize, max_d: usize) -> impl Strategy<Value = PointCloud> {
    (1..=max_d).prop_flat_map(move |d| {
        prop::collection::vec(
            prop::collection::vec(-10.0..10.0f64, d),
            1..=max_n,
        )
        .prop_map(make_cloud)
    })
}

/// Brute-force membership of one ball: every point within ε of its center.
fn brute_members(cloud: &PointCloud, center: usize, epsilon: f64, metric: Metric) -> Vec<usize> {
    (0..cloud.n())
        .filter(|&p| pairwise_distance(cloud, center, p, metric) <= epsilon)
        .collect()
}

fn check_cover_invariants(cloud: &PointCloud, cover: &BallCover) {
    // Completeness: every point in at least one ball.
    for (p, balls) in cover.membership.iter().enumerate() {
        assert!(!balls.is_empty(), "point {p} uncovered");
    }
    // Net separation: distinct centers pairwise more than ε apart.
    for (i, &a) in cover.centers.iter().enumerate() {
        for &b in &cover.centers[i + 1..] {
            let dist = pairwise_distance(cloud, a, b, cover.metric);
            assert!(dist > cover.epsilon, "centers {a},{b} at {dist}");
        }
    }
    // membership and members are mutually consistent inverses.
    for (ball, members) in cover.members.iter().enumerate() {
        assert!(members.windows(2).all(|w| w[0] < w[1]), "unsorted members");
        for &p in members {
            assert!(cover.membership[p].contains(&ball));
        }
    }
    for (p, balls) in cover.membership.iter().enumerate() {
        for &ball in balls {
            assert!(cover.members[ball].contains(&p));
        }
    }
}

proptest! {
    #[test]
    fn cover_satisfies_all_invariants(
        cloud in cloud_strategy(50, 4),
        epsilon in 0.1..8.0f64,
        euclidean in any::<bool>(),
    ) {
        let metric = if euclidean { Metric::Euclidean } else { Metric::Manhattan };
        let cover = greedy_net(&cloud, epsilon, metric, &NetPolicy::default()).unwrap();
        check_cover_invariants(&cloud, &cover);
    }

    #[test]
    fn cover_matches_brute_force_membership(
        cloud in cloud_strategy(40, 3),
        epsilon in 0.1..6.0f64,
    ) {
        let cover = greedy_net(&cloud, epsilon, Metric::Euclidean, &NetPolicy::default()).unwrap();
        for (ball, &center) in cover.centers.iter().enumerate() {
            let expected = brute_members(&cloud, center, epsilon, Metric::Euclidean);
            prop_assert_eq!(&cover.members[ball], &expected);
        }
    }

    #[test]
    fn random_pick_order_still_yields_valid_cover(
        cloud in cloud_strategy(40, 3),
        epsilon in 0.1..6.0f64,
        seed in any::<u64>(),
    ) {
        let policy = NetPolicy { pick_order: PickOrder::RandomWithSeed, seed };
        let cover = greedy_net(&cloud, epsilon, Metric::Euclidean, &policy).unwrap();
        check_cover_invariants(&cloud, &cover);
    }

    #[test]
    fn edges_match_brute_force_intersections(
        cloud in cloud_strategy(40, 3),
        epsilon in 0.1..6.0f64,
    ) {
        let cover = greedy_net(&cloud, epsilon, Metric::Euclidean, &NetPolicy::default()).unwrap();
        let graph = build_graph(&cover);
        let k = cover.ball_count();
        let mut expected = Vec::new();
        for a in 0..k {
            for b in (a + 1)..k {
                let shared = cover.members[a]
                    .iter()
                    .filter(|p| cover.members[b].contains(p))
                    .count();
                if shared > 0 {
                    expected.push((a, b, shared));
                }
            }
        }
        let got: Vec<(usize, usize, usize)> =
            graph.edges.iter().map(|e| (e.a, e.b, e.shared)).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn edge_set_is_scan_order_invariant(
        cloud in cloud_strategy(40, 3),
        epsilon in 0.1..6.0f64,
    ) {
        // Algorithm scans points in row order; re-deriving edges from the
        // membership lists in reverse point order must give the same set.
        let cover = greedy_net(&cloud, epsilon, Metric::Euclidean, &NetPolicy::default()).unwrap();
        let graph = build_graph(&cover);
        let mut reversed: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
        for balls in cover.membership.iter().rev() {
            for (i, &a) in balls.iter().enumerate() {
                for &b in &balls[i + 1..] {
                    *reversed.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
        let got: Vec<(usize, usize, usize)> =
            graph.edges.iter().map(|e| (e.a, e.b, e.shared)).collect();
        let expected: Vec<(usize, usize, usize)> =
            reversed.into_iter().map(|((a, b), s)| (a, b, s)).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn components_partition_the_vertices(
        cloud in cloud_strategy(40, 3),
        epsilon in 0.1..6.0f64,
    ) {
        let cover = greedy_net(&cloud, epsilon, Metric::Euclidean, &NetPolicy::default()).unwrap();
        let graph = build_graph(&cover);
        let comps = connected_components(&graph);
        let mut seen = vec![0usize; graph.vertex_count()];
        for comp in &comps {
            for &v in comp {
                seen[v] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn vertex_count_sum_covers_all_points(
        cloud in cloud_strategy(40, 3),
        epsilon in 0.1..6.0f64,
    ) {
        let cover = greedy_net(&cloud, epsilon, Metric::Euclidean, &NetPolicy::default()).unwrap();
        let graph = build_graph(&cover);
        let total: usize = graph.nodes.iter().map(|v| v.count).sum();
        prop_assert!(total >= cloud.n());
    }

    #[test]
    fn cover_is_deterministic_byte_for_byte(
        cloud in cloud_strategy(30, 3),
        epsilon in 0.1..6.0f64,
        seed in any::<u64>(),
    ) {
        for policy in [
            NetPolicy::default(),
            NetPolicy { pick_order: PickOrder::RandomWithSeed, seed },
        ] {
            let a = greedy_net(&cloud, epsilon, Metric::Euclidean, &policy).unwrap();
            let b = greedy_net(&cloud, epsilon, Metric::Euclidean, &policy).unwrap();
            prop_assert_eq!(
                serde_json::to_vec(&a).unwrap(),
                serde_json::to_vec(&b).unwrap()
            );
        }
    }

    #[test]
    fn coloring_values_are_member_means(
        cloud in cloud_strategy(40, 3),
        epsilon in 0.1..6.0f64,
    ) {
        let cover = greedy_net(&cloud, epsilon, Metric::Euclidean, &NetPolicy::default()).unwrap();
        let graph = build_graph(&cover);
        let coloring = color_by_axis(&graph, &cloud, "a0").unwrap();
        for (node, &value) in graph.nodes.iter().zip(&coloring.values) {
            let mut sum = 0.0;
            for &p in &node.members {
                sum += cloud.row(p)[0];
            }
            let expected = sum / node.members.len() as f64;
            prop_assert!((value - expected).abs() <= 1e-12);
        }
        prop_assert_eq!(coloring.v_min, coloring.values.iter().cloned().fold(f64::INFINITY, f64::min));
        prop_assert_eq!(coloring.v_max, coloring.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }

    #[test]
    fn distance_coloring_matches_l1_oracle(
        cloud in cloud_strategy(40, 3),
        epsilon in 0.1..6.0f64,
    ) {
        let cover = greedy_net(&cloud, epsilon, Metric::Euclidean, &NetPolicy::default()).unwrap();
        let graph = build_graph(&cover);
        let reference = ReferenceSpec::Rows(vec![0]);
        let coloring = color_by_distance(&graph, &cloud, &reference).unwrap();
        let centroid: Vec<f64> = cloud.row(0).to_vec();
        for (node, &value) in graph.nodes.iter().zip(&coloring.values) {
            let mut expected = 0.0;
            for a in 0..cloud.d() {
                let mean: f64 = node.members.iter().map(|&p| cloud.row(p)[a]).sum::<f64>()
                    / node.members.len() as f64;
                expected += (mean - centroid[a]).abs();
            }
            prop_assert!((value - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn rolling_agrees_with_raw_moment_oracle(
        series in prop::collection::vec(-50.0..50.0f64, 4..40),
        window in 2usize..6,
    ) {
        prop_assume!(series.len() >= window);
        let got = rolling_moments(&series, window).unwrap();
        prop_assert_eq!(got.len(), series.len() - window + 1);
        for (i, m) in got.iter().enumerate() {
            let win = &series[i..i + window];
            let w = window as f64;
            // Mean and sd against raw power sums (different algebraic route).
            let s1: f64 = win.iter().sum();
            let s2: f64 = win.iter().map(|x| x * x).sum();
            let mean = s1 / w;
            let m2 = s2 / w - mean * mean;
            prop_assert!((m.mean - mean).abs() <= 1e-9);
            let var_sample = m2 * w / (w - 1.0);
            prop_assert!((m.sd - var_sample.max(0.0).sqrt()).abs() <= 1e-8);
            // Skewness against a from-scratch centered recomputation: the
            // ratio m3/m2^1.5 is ill conditioned as m2 -> 0, so the oracle
            // must evaluate the same centered route to stay comparable.
            if let Some(skew) = m.skewness {
                let c_mean = win.iter().sum::<f64>() / w;
                let c_m2 = win.iter().map(|x| (x - c_mean) * (x - c_mean)).sum::<f64>() / w;
                let c_m3 = win
                    .iter()
                    .map(|x| (x - c_mean) * (x - c_mean) * (x - c_mean))
                    .sum::<f64>()
                    / w;
                prop_assert!(c_m2 > 0.0);
                prop_assert!((skew - c_m3 / c_m2.powf(1.5)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn normalize_attains_unit_interval_and_is_idempotent(
        cloud in cloud_strategy(30, 3),
    ) {
        let constant_axis = (0..cloud.d()).any(|a| {
            let v = cloud.axis_values(a);
            v.iter().all(|&x| x == v[0])
        });
        prop_assume!(!constant_axis);
        let (once, _) = normalize_minmax(&cloud).unwrap();
        for a in 0..once.d() {
            let v = once.axis_values(a);
            prop_assert_eq!(v.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
            prop_assert_eq!(v.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
        let (twice, _) = normalize_minmax(&once).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn filter_output_is_subset_with_consistent_report(
        cloud in cloud_strategy(40, 2),
        lo in -5.0..0.0f64,
        span in 0.0..10.0f64,
    ) {
        let hi = lo + span;
        match filter_range(&cloud, "a0", lo, hi) {
            Ok((out, report)) => {
                prop_assert!(report.consistent());
                prop_assert_eq!(report.rows_out, out.n());
                // Every surviving row id existed in the input.
                for id in out.row_ids() {
                    prop_assert!(cloud.row_ids().contains(id));
                }
                for i in 0..out.n() {
                    prop_assert!(out.row(i)[0] >= lo && out.row(i)[0] <= hi);
                }
            }
            Err(ballmapper::Error::EmptyCloud) => {}
            Err(other) => return Err(TestCaseError::fail(format!("{other}"))),
        }
    }

    #[test]
    fn generated_correlation_is_exact(
        seed in any::<u64>(),
        r in -0.99..0.99f64,
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x0 = ballmapper::synth::standard_normal_series(300, &mut rng);
        let y0 = ballmapper::synth::standard_normal_series(300, &mut rng);
        let x = gen_correlated(&x0, &y0, r).unwrap();
        prop_assert!((pearson(&x, &x0) - r).abs() <= 1e-8);
    }

    #[test]
    fn standardize_idempotent_property(
        seed in any::<u64>(),
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = ballmapper::synth::standard_normal_series(100, &mut rng);
        let once = standardize(&x).unwrap();
        let twice = standardize(&once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn singleton_regime_and_single_ball_regime() {
    // Distinct points with ε below the minimum pairwise gap: n balls.
    let cloud = make_cloud(vec![vec![0.0], vec![1.0], vec![3.0], vec![7.0]]);
    let cover = greedy_net(&cloud, 0.9, Metric::Euclidean, &NetPolicy::default()).unwrap();
    assert_eq!(cover.ball_count(), 4);
    let graph = build_graph(&cover);
    assert_eq!(graph.edge_count(), 0);

    // ε at least the diameter: one ball, no edges.
    let cover = greedy_net(&cloud, 7.0, Metric::Euclidean, &NetPolicy::default()).unwrap();
    assert_eq!(cover.ball_count(), 1);
    assert_eq!(build_graph(&cover).edge_count(), 0);
}

#[test]
fn distance_coloring_is_translation_invariant_exactly() {
    // All quantities dyadic and group sizes powers of two, so the mean and
    // the translation commute exactly in floating point.
    let base = vec![
        vec![0.25, 1.5],
        vec![0.75, 2.5],
        vec![4.0, 8.0],
        vec![5.0, 6.0],
        vec![40.0, -3.0],
    ];
    let shift = (2.0, -4.0);
    let shifted: Vec<Vec<f64>> = base
        .iter()
        .map(|r| vec![r[0] + shift.0, r[1] + shift.1])
        .collect();
    let reference = ReferenceSpec::Rows(vec![2, 3]);

    let value_sets: Vec<Vec<f64>> = [base, shifted]
        .into_iter()
        .map(|rows| {
            let cloud = make_cloud(rows);
            let cover = greedy_net(&cloud, 1.0, Metric::Euclidean, &NetPolicy::default()).unwrap();
            let graph = build_graph(&cover);
            color_by_distance(&graph, &cloud, &reference).unwrap().values
        })
        .collect();
    assert_eq!(value_sets[0], value_sets[1]);
}

#[test]
fn relabeling_balls_permutes_coloring_values() {
    let cloud = make_cloud(vec![vec![0.0], vec![1.0], vec![2.0], vec![50.0]]);
    let cover = greedy_net(&cloud, 1.0, Metric::Euclidean, &NetPolicy::default()).unwrap();
    let graph = build_graph(&cover);
    let coloring = color_by_axis(&graph, &cloud, "a0").unwrap();

    let mut permuted = BMGraph {
        epsilon: graph.epsilon,
        metric: graph.metric,
        axis_names: graph.axis_names.clone(),
        cloud_hash: graph.cloud_hash,
        nodes: graph.nodes.clone(),
        edges: graph.edges.clone(),
    };
    permuted.nodes.reverse();
    let re = color_by_axis(&permuted, &cloud, "a0").unwrap();
    let mut reversed = re.values.clone();
    reversed.reverse();
    assert_eq!(coloring.values, reversed);
    assert_eq!(coloring.v_min, re.v_min);
    assert_eq!(coloring.v_max, re.v_max);
}

#[test]
fn outcome_coloring_tracks_dominant_coefficient_at_ball_level() {
    // Outcome 0.3*x0 + 0.6*y0 + noise: across balls, the outcome coloring
    // should correlate more with the y0-axis coloring than with x0's.
    use ballmapper::cloud::PointCloud;
    use ballmapper::synth::{gen_outcome, standard_normal_series, OutcomeSpec};
    use rand::SeedableRng;

    let n = 1000;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(314);
    let x0 = standard_normal_series(n, &mut rng);
    let y0 = standard_normal_series(n, &mut rng);
    let m = gen_outcome(&x0, &y0, &OutcomeSpec::default(), 314).unwrap();

    let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![x0[i], y0[i]]).collect();
    let cloud = PointCloud::new(
        vec!["x0".into(), "y0".into()],
        rows,
        vec![MetaColumn {
            name: "m".into(),
            values: m.iter().map(|&v| MetaValue::Number(v)).collect(),
        }],
        (0..n).collect(),
    )
    .unwrap();

    let cover = greedy_net(&cloud, 0.5, Metric::Euclidean, &NetPolicy::default()).unwrap();
    let graph = build_graph(&cover);
    let by_outcome = color_by_outcome(&graph, &cloud, "m").unwrap();
    let by_x0 = color_by_axis(&graph, &cloud, "x0").unwrap();
    let by_y0 = color_by_axis(&graph, &cloud, "y0").unwrap();

    let corr_y0 = pearson(&by_outcome.values, &by_y0.values);
    let corr_x0 = pearson(&by_outcome.values, &by_x0.values);
    assert!(
        corr_y0 > corr_x0,
        "ball-level correlations: y0 {corr_y0} vs x0 {corr_x0}"
    );
}
