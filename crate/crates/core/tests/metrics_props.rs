//! Property tests for the diversity metrics: oracle equivalence of the
//! exact Wasserstein-1 solver, the W1 metric axioms, permutation
//! invariance, and linear scaling.

use divdrive_core::geom::Vec2;
use divdrive_core::metrics::{
    inter_policy_diversity, wasserstein1, wasserstein1_costs, EvaluationTable,
};
use divdrive_core::trajectory::Trajectory;
use divdrive_core::trajlog::Outcome;
use divdrive_testutil::transport;
use proptest::prelude::*;

fn arb_set(max: usize) -> impl Strategy<Value = Vec<Trajectory<f64>>> {
    prop::collection::vec(
        prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..10),
        1..=max,
    )
    .prop_map(|sets| {
        sets.into_iter()
            .map(|pts| {
                Trajectory::new(pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect(), 0.1)
                    .unwrap()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w1_matches_the_assignment_oracle(cost in prop::collection::vec(
        prop::collection::vec(0.0f64..40.0, 1..=5), 1..=5)) {
        // Rectangularize the random rows.
        let n = cost.iter().map(Vec::len).min().unwrap();
        let cost: Vec<Vec<f64>> = cost.into_iter().map(|r| r[..n].to_vec()).collect();
        let ours = wasserstein1_costs(&cost).unwrap();
        let oracle = transport::wasserstein1_by_assignment(&cost);
        prop_assert!((ours - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
            "{ours} vs oracle {oracle}");
    }

    #[test]
    fn w1_metric_axioms(a in arb_set(4), b in arb_set(4), c in arb_set(4)) {
        let ab = wasserstein1(&a, &b).unwrap();
        let ba = wasserstein1(&b, &a).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0), "symmetry: {ab} vs {ba}");
        let ac = wasserstein1(&a, &c).unwrap();
        let cb = wasserstein1(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-9, "triangle: {ab} > {ac} + {cb}");
        prop_assert!((wasserstein1(&a, &a).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn w1_scales_linearly(a in arb_set(4), b in arb_set(4), factor in 0.01f64..50.0) {
        let base = wasserstein1(&a, &b).unwrap();
        let sa: Vec<_> = a.iter().map(|t| t.scaled(factor)).collect();
        let sb: Vec<_> = b.iter().map(|t| t.scaled(factor)).collect();
        let scaled = wasserstein1(&sa, &sb).unwrap();
        prop_assert!((scaled - factor * base).abs() <= 1e-9 * (factor * base).max(1e-9));
    }
}

#[test]
fn inter_policy_diversity_is_permutation_invariant() {
    // 4 policies, 3 scenarios, deterministic synthetic trajectories.
    let scenarios: Vec<String> = (0..3).map(|s| format!("s{s}")).collect();
    let policies: Vec<String> = (0..4).map(|p| format!("p{p}")).collect();
    let mut table = EvaluationTable::new(scenarios.clone(), policies.clone()).unwrap();
    for (si, sid) in scenarios.iter().enumerate() {
        for (pi, pid) in policies.iter().enumerate() {
            let pts = (0..6)
                .map(|t| Vec2::new(t as f64 + si as f64, (pi * (si + 1)) as f64 * 0.7))
                .collect();
            let tr = Trajectory::new(pts, 0.1).unwrap();
            table.set_cell(sid, pid, Outcome::Goal, tr).unwrap();
        }
    }
    let base = inter_policy_diversity(&table, &policies).unwrap();
    let mut shuffled = policies.clone();
    shuffled.swap(0, 3);
    shuffled.swap(1, 2);
    let permuted = inter_policy_diversity(&table, &shuffled).unwrap();
    assert!((base - permuted).abs() < 1e-12);
}

#[test]
fn w1_oracle_cross_validation_on_vertex_enumeration() {
    // Where the vertex enumeration is tractable, all three routes agree:
    // production flow solver, lcm-assignment oracle, polytope vertices.
    let costs = [
        vec![vec![2.0, 7.5, 1.0], vec![0.5, 3.0, 9.0]],
        vec![vec![4.0, 4.0], vec![1.0, 0.0], vec![3.5, 2.0]],
        vec![vec![1.25]],
    ];
    for cost in &costs {
        let ours = wasserstein1_costs(cost).unwrap();
        let hungarian = transport::wasserstein1_by_assignment(cost);
        let vertices = transport::wasserstein1_by_vertex_enumeration(cost);
        assert!((ours - hungarian).abs() < 1e-9);
        assert!((ours - vertices).abs() < 1e-9);
    }
}
