//! Property tests for diverse policy selection: the greedy certificate
//! (every pick maximizes its min-distance at the moment of selection) and
//! exact agreement with an independent greedy re-simulation.

use divdrive_core::metrics::DistanceMatrix;
use divdrive_core::select::{select_diverse, Candidate, CandidatePool};
use divdrive_testutil::fps;
use proptest::prelude::*;

fn build_pool(n: usize, raw: &[f64]) -> (CandidatePool<f64>, Vec<Vec<Option<f64>>>) {
    let ids: Vec<String> = (0..n).map(|i| format!("c{i:02}")).collect();
    let mut entries = vec![vec![None; n]; n];
    for i in 0..n {
        entries[i][i] = Some(0.0);
        for j in (i + 1)..n {
            let v = raw[(i * n + j) % raw.len()].abs() % 97.0;
            entries[i][j] = Some(v);
            entries[j][i] = Some(v);
        }
    }
    let matrix = DistanceMatrix::from_entries(ids.clone(), entries.clone()).unwrap();
    let candidates = (0..n)
        .map(|i| Candidate { policy_id: ids[i].clone(), session: 0, step: i as u64, score: 1.0 })
        .collect();
    (CandidatePool::new(candidates, matrix).unwrap(), entries)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matches_independent_resimulation(
        n in 2usize..20,
        k in 1usize..10,
        raw in prop::collection::vec(0.0f64..100.0, 32..96),
        seed in 0u64..1000,
    ) {
        let (pool, entries) = build_pool(n, &raw);
        let selection = select_diverse(&pool, k, seed).unwrap();
        let ids: Vec<String> = (0..n).map(|i| format!("c{i:02}")).collect();
        let first = ids.iter().position(|i| *i == selection.picks[0].policy_id).unwrap();
        let expect = fps::greedy_resimulate(&ids, &entries, first, k);
        let got: Vec<usize> = selection
            .picks
            .iter()
            .map(|p| ids.iter().position(|i| *i == p.policy_id).unwrap())
            .collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn greedy_certificate_holds(
        n in 2usize..16,
        k in 2usize..8,
        raw in prop::collection::vec(0.0f64..100.0, 32..96),
        seed in 0u64..1000,
    ) {
        let (pool, _) = build_pool(n, &raw);
        let selection = select_diverse(&pool, k, seed).unwrap();
        let index_of = |id: &str| pool.candidates.iter().position(|c| c.policy_id == id).unwrap();
        let mut chosen: Vec<usize> = vec![index_of(&selection.picks[0].policy_id)];
        for pick in &selection.picks[1..] {
            let picked = index_of(&pick.policy_id);
            let min_to = |cand: usize| -> f64 {
                chosen
                    .iter()
                    .map(|&s| pool.distances.get(cand, s).unwrap())
                    .fold(f64::INFINITY, f64::min)
            };
            let picked_min = min_to(picked);
            for other in 0..n {
                if chosen.contains(&other) || other == picked {
                    continue;
                }
                prop_assert!(picked_min >= min_to(other) - 1e-12,
                    "pick {} is not max-min optimal", pick.policy_id);
            }
            // The reported distance matches the recomputation.
            prop_assert!((pick.min_dist.unwrap() - picked_min).abs() < 1e-12);
            chosen.push(picked);
        }
        // No duplicates, all within the pool.
        let mut unique = chosen.clone();
        unique.sort_unstable();
        unique.dedup();
        prop_assert_eq!(unique.len(), chosen.len());
    }
}
