//! Independent greedy max-min re-simulation and the exhaustive subset
//! optimizer, for checking the production farthest-point selector.

/// Re-simulate greedy max-min selection from a forced first pick.
/// `dist[i][j]` entries of `None` mean "no evidence"; they order below
/// every real distance and break ties by the id strings.
pub fn greedy_resimulate(
    ids: &[String],
    dist: &[Vec<Option<f64>>],
    first: usize,
    k: usize,
) -> Vec<usize> {
    let n = ids.len();
    let mut selected = vec![first];
    let mut remaining: Vec<usize> = (0..n).filter(|&i| i != first).collect();
    while selected.len() < k.min(n) {
        let mut best: Option<(usize, Option<f64>)> = None;
        for &c in &remaining {
            let mut min_d: Option<f64> = None;
            let mut any = false;
            for &s in &selected {
                if let Some(d) = dist[c][s] {
                    min_d = Some(match min_d {
                        None => d,
                        Some(m) => m.min(d),
                    });
                    any = true;
                }
            }
            let candidate = if any { min_d } else { None };
            let better = match &best {
                None => true,
                Some((b, bd)) => match (candidate, bd) {
                    (Some(c_), Some(b_)) => {
                        c_ > *b_ || (c_ == *b_ && ids[c] < ids[*b])
                    }
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    (None, None) => ids[c] < ids[*b],
                },
            };
            if better {
                best = Some((c, candidate));
            }
        }
        let (chosen, _) = best.expect("remaining non-empty");
        selected.push(chosen);
        remaining.retain(|&i| i != chosen);
    }
    selected
}

/// Mean pairwise distance of a subset; `None` when some pair is undefined.
pub fn mean_pairwise(dist: &[Vec<Option<f64>>], subset: &[usize]) -> Option<f64> {
    let mut sum = 0.0;
    let mut pairs = 0.0;
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            sum += dist[i][j]?;
            pairs += 1.0;
        }
    }
    Some(sum / pairs)
}

/// Exhaustively enumerate all size-k subsets and return the best mean
/// pairwise distance (the quantity the greedy approximates). Exponential;
/// for tiny pools only.
pub fn exhaustive_best_subset(dist: &[Vec<Option<f64>>], n: usize, k: usize) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut subset = Vec::with_capacity(k);
    fn recurse(
        dist: &[Vec<Option<f64>>],
        n: usize,
        k: usize,
        from: usize,
        subset: &mut Vec<usize>,
        best: &mut Option<f64>,
    ) {
        if subset.len() == k {
            if let Some(v) = mean_pairwise(dist, subset) {
                if best.map_or(true, |b| v > b) {
                    *best = Some(v);
                }
            }
            return;
        }
        for i in from..n {
            subset.push(i);
            recurse(dist, n, k, i + 1, subset, best);
            subset.pop();
        }
    }
    recurse(dist, n, k, 0, &mut subset, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<Option<f64>>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { Some(0.0) } else { Some(f(i.min(j), i.max(j))) }).collect())
            .collect()
    }

    #[test]
    fn hand_simulated_instance() {
        let d = full(4, |a, b| match (a, b) {
            (0, 1) => 1.0,
            (0, 2) => 5.0,
            (0, 3) => 2.0,
            (1, 2) => 4.0,
            (1, 3) => 3.0,
            (2, 3) => 6.0,
            _ => unreachable!(),
        });
        let ids: Vec<String> = (0..4).map(|i| format!("c{i}")).collect();
        assert_eq!(greedy_resimulate(&ids, &d, 0, 4), vec![0, 2, 3, 1]);
    }

    #[test]
    fn exhaustive_on_trivial_matrix() {
        let d = full(4, |a, b| (a + b) as f64);
        // Best pair by mean distance is {2, 3} with 5.0.
        assert_eq!(exhaustive_best_subset(&d, 4, 2), Some(5.0));
    }
}
