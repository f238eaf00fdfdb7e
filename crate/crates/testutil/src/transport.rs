//! Brute-force oracles for the uniform-mass transportation problem
//! (Wasserstein-1 between uniform discrete distributions).
//!
//! The primary oracle replicates each row `L/m` times and each column
//! `L/n` times (`L = lcm(m, n)`) and solves the resulting `L x L`
//! assignment problem: the transportation polytope with integer margins
//! has integral vertices, so the assignment optimum divided by `L` is the
//! exact Wasserstein-1 value. The assignment layer itself is
//! cross-checked against permutation brute force, and for small instances
//! an independent transportation-polytope vertex enumeration confirms the
//! optimum.

use crate::assignment::hungarian;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Exact W1 between uniform masses over the rows and columns of `cost`,
/// via lcm replication + Hungarian assignment.
pub fn wasserstein1_by_assignment(cost: &[Vec<f64>]) -> f64 {
    let m = cost.len();
    let n = cost[0].len();
    let scale = lcm(m as u64, n as u64) as usize;
    let (rep_r, rep_c) = (scale / m, scale / n);
    let big: Vec<Vec<f64>> = (0..scale)
        .map(|i| (0..scale).map(|j| cost[i / rep_r][j / rep_c]).collect())
        .collect();
    hungarian(&big) / scale as f64
}

/// Exact W1 by enumerating every basic feasible solution (vertex) of the
/// transportation polytope: all cell subsets of size `m + n - 1` that form
/// a spanning tree of the bipartite support graph, each solved exactly for
/// its unique flow. Exponential; keep `m * n` small (<= ~12 cells).
pub fn wasserstein1_by_vertex_enumeration(cost: &[Vec<f64>]) -> f64 {
    let m = cost.len();
    let n = cost[0].len();
    let scale = lcm(m as u64, n as u64) as i64;
    let supply = vec![scale / m as i64; m];
    let demand = vec![scale / n as i64; n];
    let cells: Vec<(usize, usize)> =
        (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(k);
    enumerate_subsets(&cells, k, 0, &mut chosen, &mut |subset| {
        if let Some(flow) = solve_tree(subset, &supply, &demand, m, n) {
            let total: f64 = subset
                .iter()
                .zip(&flow)
                .map(|(&(i, j), &f)| cost[i][j] * f as f64)
                .sum();
            if total < best {
                best = total;
            }
        }
    });
    best / scale as f64
}

fn enumerate_subsets(
    cells: &[(usize, usize)],
    k: usize,
    from: usize,
    chosen: &mut Vec<(usize, usize)>,
    visit: &mut impl FnMut(&[(usize, usize)]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    if cells.len() - from < k - chosen.len() {
        return;
    }
    for i in from..cells.len() {
        chosen.push(cells[i]);
        enumerate_subsets(cells, k, i + 1, chosen, visit);
        chosen.pop();
    }
}

/// Solve the unique flow on a candidate basis by peeling degree-1 nodes;
/// returns `None` when the subset is not a spanning tree or the flow goes
/// negative (infeasible basis).
fn solve_tree(
    subset: &[(usize, usize)],
    supply: &[i64],
    demand: &[i64],
    m: usize,
    n: usize,
) -> Option<Vec<i64>> {
    let k = subset.len();
    let mut flow = vec![0i64; k];
    let mut need: Vec<i64> = supply.iter().chain(demand.iter()).copied().collect();
    // Node ids: rows 0..m, columns m..m+n. Demands count negative.
    for d in need.iter_mut().skip(m) {
        *d = -*d;
    }
    let mut alive = vec![true; k];
    let mut remaining = k;
    while remaining > 0 {
        // Find a node incident to exactly one alive cell.
        let mut progress = false;
        'nodes: for node in 0..m + n {
            let mut last = None;
            let mut count = 0;
            for (e, &(i, j)) in subset.iter().enumerate() {
                if !alive[e] {
                    continue;
                }
                let touches = if node < m { i == node } else { j == node - m };
                if touches {
                    count += 1;
                    last = Some(e);
                    if count > 1 {
                        continue 'nodes;
                    }
                }
            }
            if count == 1 {
                let e = last.unwrap();
                let (i, j) = subset[e];
                // Push the leaf node's whole remaining balance through its
                // only edge.
                let f = if node < m { need[node] } else { -need[m + j] };
                if f < 0 {
                    return None;
                }
                flow[e] = f;
                need[i] -= f;
                need[m + j] += f;
                alive[e] = false;
                remaining -= 1;
                progress = true;
                break;
            }
        }
        if !progress {
            return None; // a cycle: not a tree basis
        }
    }
    if need.iter().any(|&b| b != 0) {
        return None;
    }
    Some(flow)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replication_and_vertex_enumeration_agree() {
        let costs = [
            vec![vec![0.0, 3.0, 6.0], vec![6.0, 3.0, 0.0]],
            vec![vec![1.0, 2.0], vec![3.0, 0.5], vec![2.0, 2.0]],
            vec![vec![5.0]],
            vec![vec![1.0, 7.0], vec![4.0, 2.0]],
        ];
        for cost in &costs {
            let a = wasserstein1_by_assignment(cost);
            let b = wasserstein1_by_vertex_enumeration(cost);
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn hand_checked_value() {
        // 2x3, scale 6: supplies (3,3), demands (2,2,2); optimal plan costs
        // 6 in total -> W1 = 1.
        let cost = vec![vec![0.0, 3.0, 6.0], vec![6.0, 3.0, 0.0]];
        assert!((wasserstein1_by_assignment(&cost) - 1.0).abs() < 1e-12);
    }
}
