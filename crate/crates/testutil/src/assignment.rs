//! Exact assignment solvers: O(n!) permutation brute force for tiny
//! instances and the O(n^3) shortest-augmenting-path (Hungarian) method
//! for the rest. Both solve min-cost perfect matching on a square cost
//! matrix.

/// Brute force over all permutations. Only sane for n <= 8.
pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    assert!(n > 0 && n <= 8, "brute force limited to n <= 8");
    let mut cols: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut cols, 0, &mut |perm| {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if total < best {
            best = total;
        }
    });
    best
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Hungarian algorithm (Jonker-Volgenant style shortest augmenting paths
/// with potentials). Returns the minimum total cost of a perfect matching.
pub fn hungarian(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    assert!(n > 0 && cost.iter().all(|r| r.len() == n), "square matrix required");
    // 1-indexed potentials and matching, the classic formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row matched to column j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hungarian_matches_brute_force() {
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=6 {
            for _ in 0..40 {
                let cost: Vec<Vec<f64>> =
                    (0..n).map(|_| (0..n).map(|_| next() * 10.0).collect()).collect();
                let bf = brute_force_assignment(&cost);
                let hu = hungarian(&cost);
                assert!((bf - hu).abs() < 1e-9, "n={n}: {bf} vs {hu}");
            }
        }
    }

    #[test]
    fn known_instance() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        // Optimal: (0,1) + (1,0) + (2,2) = 1 + 2 + 2 = 5.
        assert_eq!(hungarian(&cost), 5.0);
    }
}
