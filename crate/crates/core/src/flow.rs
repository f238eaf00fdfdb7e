//! Exact minimum-cost transportation on a dense bipartite instance.
//!
//! Supplies and demands are integers (trajectory-set masses are scaled to a
//! common denominator upstream), costs stay in floating point, and flow is
//! integral throughout, so the optimum is exact up to cost summation
//! rounding. Successive shortest augmenting paths with Bellman-Ford path
//! search; augmentation always follows the lowest-index shortest path, so
//! the result is deterministic even when the optimal coupling is not
//! unique.

use crate::error::{Error, Result};
use crate::scalar::Real;

struct Edge<T> {
    to: usize,
    cap: u64,
    cost: T,
    rev: usize,
}

struct Graph<T> {
    adj: Vec<Vec<Edge<T>>>,
}

impl<T: Real> Graph<T> {
    fn new(n: usize) -> Self {
        Self { adj: (0..n).map(|_| Vec::new()).collect() }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u64, cost: T) {
        let rev_from = self.adj[to].len();
        let rev_to = self.adj[from].len();
        self.adj[from].push(Edge { to, cap, cost, rev: rev_from });
        self.adj[to].push(Edge { to: from, cap: 0, cost: -cost, rev: rev_to });
    }
}

/// Minimum total cost of shipping `supply[i]` units from each source `i` to
/// meet `demand[j]` units at each sink `j`, at unit cost `cost(i, j)`.
/// Total supply must equal total demand; all costs must be finite.
pub fn min_cost_transport<T: Real>(
    supply: &[u64],
    demand: &[u64],
    cost: impl Fn(usize, usize) -> T,
) -> Result<T> {
    if supply.is_empty() || demand.is_empty() {
        return Err(Error::InvalidInput("transportation instance must be non-empty".into()));
    }
    let total: u64 = supply.iter().sum();
    if total != demand.iter().sum::<u64>() {
        return Err(Error::InvalidInput("total supply must equal total demand".into()));
    }
    let (m, n) = (supply.len(), demand.len());
    let source = m + n;
    let sink = m + n + 1;
    let mut g = Graph::new(m + n + 2);
    for (i, &s) in supply.iter().enumerate() {
        g.add_edge(source, i, s, T::zero());
    }
    for i in 0..m {
        for j in 0..n {
            let c = cost(i, j);
            if !c.is_finite() {
                return Err(Error::InvalidInput("transport cost must be finite".into()));
            }
            g.add_edge(i, m + j, u64::MAX, c);
        }
    }
    for (j, &d) in demand.iter().enumerate() {
        g.add_edge(m + j, sink, d, T::zero());
    }

    let node_count = m + n + 2;
    let mut total_cost = T::zero();
    let mut shipped = 0u64;
    let mut dist = vec![T::zero(); node_count];
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; node_count];
    let mut reachable = vec![false; node_count];

    while shipped < total {
        // Bellman-Ford from the source over residual edges. Strict
        // improvement keeps the first (lowest-index) shortest path found.
        for v in 0..node_count {
            dist[v] = T::zero();
            reachable[v] = false;
            prev[v] = None;
        }
        reachable[source] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..node_count {
                if !reachable[v] {
                    continue;
                }
                for (ei, e) in g.adj[v].iter().enumerate() {
                    if e.cap == 0 {
                        continue;
                    }
                    let nd = dist[v] + e.cost;
                    if !reachable[e.to] || nd < dist[e.to] {
                        reachable[e.to] = true;
                        dist[e.to] = nd;
                        prev[e.to] = Some((v, ei));
                        changed = true;
                    }
                }
            }
        }
        if !reachable[sink] {
            return Err(Error::InvalidInput("transportation instance is disconnected".into()));
        }

        // Bottleneck along the path, then push.
        let mut bottleneck = total - shipped;
        let mut v = sink;
        while let Some((u, ei)) = prev[v] {
            bottleneck = bottleneck.min(g.adj[u][ei].cap);
            v = u;
        }
        let mut v = sink;
        while let Some((u, ei)) = prev[v] {
            g.adj[u][ei].cap -= bottleneck;
            let rev = g.adj[u][ei].rev;
            g.adj[v][rev].cap += bottleneck;
            v = u;
        }
        total_cost += dist[sink] * T::from_u64(bottleneck).unwrap();
        shipped += bottleneck;
    }
    Ok(total_cost)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_to_one() {
        let c = min_cost_transport(&[3], &[3], |_, _| 2.5f64).unwrap();
        assert_eq!(c, 7.5);
    }

    #[test]
    fn two_by_two_prefers_cheap_diagonal() {
        // Hand-solved: ship 1 unit on each diagonal cell (cost 1), nothing on
        // the off-diagonal (cost 10): optimum 2.
        let costs = [[1.0f64, 10.0], [10.0, 1.0]];
        let c = min_cost_transport(&[1, 1], &[1, 1], |i, j| costs[i][j]).unwrap();
        assert_eq!(c, 2.0);
    }

    #[test]
    fn two_by_three_hand_solved() {
        // Supplies (3, 3), demands (2, 2, 2).
        // Costs:      b0  b1  b2
        //        a0 [  1,  4,  6 ]
        //        a1 [  5,  2,  1 ]
        // Optimal: a0 -> b0: 2 (2), a0 -> b1: 1 (4), a1 -> b1: 1 (2),
        //          a1 -> b2: 2 (2); total = 2 + 4 + 2 + 2 = 10.
        let costs = [[1.0f64, 4.0, 6.0], [5.0, 2.0, 1.0]];
        let c = min_cost_transport(&[3, 3], &[2, 2, 2], |i, j| costs[i][j]).unwrap();
        assert_eq!(c, 10.0);
    }

    #[test]
    fn zero_cost_identity() {
        let c = min_cost_transport(&[2, 2], &[2, 2], |i, j| if i == j { 0.0f64 } else { 7.0 })
            .unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn imbalance_is_rejected() {
        assert!(min_cost_transport(&[1], &[2], |_, _| 1.0f64).is_err());
    }

    #[test]
    fn lcm_gcd() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(lcm(4, 6), 12);
        assert_eq!(lcm(5, 5), 5);
        assert_eq!(lcm(1, 7), 7);
    }
}
