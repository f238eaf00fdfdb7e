//! Driving-score filtering and greedy farthest-point selection of a
//! mutually distant policy subset.
//!
//! The first pick is uniform random under the given seed; every later pick
//! maximizes the minimum distance to the already-selected set. Ties break
//! toward the lowest policy id. Pairs with no shared success scenario carry
//! no distance evidence: they sort below every real distance in the max-min
//! step (never bridged through) and such picks are reported.

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;
use crate::scalar::Real;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, Write};

/// One policy snapshot eligible for selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub policy_id: String,
    pub session: u32,
    pub step: u64,
    /// Driving score: fraction of evaluation scenarios ending in a goal.
    pub score: f64,
}

/// Candidates plus their pairwise distance matrix (ids aligned by index).
#[derive(Clone, Debug)]
pub struct CandidatePool<T> {
    pub candidates: Vec<Candidate>,
    pub distances: DistanceMatrix<T>,
}

impl<T: Real> CandidatePool<T> {
    pub fn new(candidates: Vec<Candidate>, distances: DistanceMatrix<T>) -> Result<Self> {
        if candidates.len() != distances.len() {
            return Err(Error::InvalidInput("pool and matrix sizes differ".into()));
        }
        for (c, id) in candidates.iter().zip(distances.ids()) {
            if &c.policy_id != id {
                return Err(Error::InvalidInput(format!(
                    "pool/matrix id mismatch: `{}` vs `{id}`",
                    c.policy_id
                )));
            }
        }
        Ok(Self { candidates, distances })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Keep exactly the candidates whose driving score is not less than
/// `delta`, preserving order and distances. An empty result is legal.
pub fn filter_by_score<T: Real>(pool: &CandidatePool<T>, delta: f64) -> Result<CandidatePool<T>> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidInput(format!("delta must be in [0, 1], got {delta}")));
    }
    let keep: Vec<usize> =
        (0..pool.len()).filter(|&i| pool.candidates[i].score >= delta).collect();
    Ok(CandidatePool {
        candidates: keep.iter().map(|&i| pool.candidates[i].clone()).collect(),
        distances: pool.distances.submatrix(&keep),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionPick {
    pub rank: usize,
    pub policy_id: String,
    pub session: u32,
    pub step: u64,
    pub score: f64,
    /// Minimum distance to the previously selected set at the moment of
    /// selection; `None` for the random first pick and for picks whose
    /// distance to every selected policy is undefined.
    pub min_dist: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub picks: Vec<SelectionPick>,
    /// True when the requested size exceeded the pool, in which case the
    /// whole pool is returned in selection order.
    pub truncated: bool,
    /// Picks whose min-distance was undefined (no shared success scenario
    /// with any already-selected policy).
    pub isolated: Vec<String>,
}

impl Selection {
    pub fn policy_ids(&self) -> Vec<String> {
        self.picks.iter().map(|p| p.policy_id.clone()).collect()
    }
}

/// Greedy max-min (farthest point) selection of `k` policies.
/// Deterministic given `seed`; if `k` exceeds the pool size, the entire
/// pool is returned in selection order and the result is flagged.
pub fn select_diverse<T: Real>(
    pool: &CandidatePool<T>,
    k: usize,
    seed: u64,
) -> Result<Selection> {
    if pool.is_empty() {
        return Err(Error::NoCandidates);
    }
    if k == 0 {
        return Err(Error::InvalidInput("selection size must be at least 1".into()));
    }
    let n = pool.len();
    let truncated = k > n;
    let take = k.min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..n);

    let mut selected: Vec<usize> = vec![first];
    let mut picks = vec![make_pick(pool, 1, first, None)];
    let mut isolated = Vec::new();

    // min_dist[i]: minimum distance from candidate i to the selected set;
    // None is "no evidence", ordered below every real distance.
    let mut min_dist: Vec<Option<T>> = (0..n)
        .map(|i| if i == first { Some(T::zero()) } else { pool.distances.get(i, first) })
        .collect();
    let mut in_set = vec![false; n];
    in_set[first] = true;

    while selected.len() < take {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if in_set[i] {
                continue;
            }
            best = Some(match best {
                None => i,
                Some(b) => match cmp_pick(min_dist[i], min_dist[b]) {
                    std::cmp::Ordering::Greater => i,
                    std::cmp::Ordering::Equal
                        if pool.candidates[i].policy_id < pool.candidates[b].policy_id =>
                    {
                        i
                    }
                    _ => b,
                },
            });
        }
        let chosen = best.expect("pool not exhausted");
        let dist = min_dist[chosen];
        if dist.is_none() {
            isolated.push(pool.candidates[chosen].policy_id.clone());
        }
        picks.push(make_pick(pool, selected.len() + 1, chosen, dist.map(Real::to_f64_lossy)));
        selected.push(chosen);
        in_set[chosen] = true;
        for i in 0..n {
            if in_set[i] {
                continue;
            }
            let d = pool.distances.get(i, chosen);
            min_dist[i] = match (min_dist[i], d) {
                (Some(a), Some(b)) => Some(if b < a { b } else { a }),
                (Some(a), None) => Some(a),
                (None, other) => other,
            };
        }
    }

    Ok(Selection { picks, truncated, isolated })
}

/// Order candidate min-distances: `None` (no shared scenario) sorts below
/// every defined distance, so such candidates are picked last.
fn cmp_pick<T: Real>(a: Option<T>, b: Option<T>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(&y).expect("distances are never NaN"),
        (Some(_), None) => std::cmp::Ordering::Greater,
        (None, Some(_)) => std::cmp::Ordering::Less,
        (None, None) => std::cmp::Ordering::Equal,
    }
}

fn make_pick<T: Real>(
    pool: &CandidatePool<T>,
    rank: usize,
    idx: usize,
    min_dist: Option<f64>,
) -> SelectionPick {
    let c = &pool.candidates[idx];
    SelectionPick {
        rank,
        policy_id: c.policy_id.clone(),
        session: c.session,
        step: c.step,
        score: c.score,
        min_dist,
    }
}

/// Selection report: one line per pick,
/// `rank policy_id session_id training_step driving_score min_dist_at_selection`.
pub fn write_selection_report<W: Write>(
    w: &mut W,
    header_lines: &[String],
    selection: &Selection,
) -> Result<()> {
    for h in header_lines {
        writeln!(w, "# {h}")?;
    }
    if selection.truncated {
        writeln!(w, "# note: requested size exceeded the pool; whole pool selected")?;
    }
    for id in &selection.isolated {
        writeln!(w, "# note: `{id}` shares no success scenario with the selected set")?;
    }
    writeln!(w, "rank policy_id session_id training_step driving_score min_dist_at_selection")?;
    for p in &selection.picks {
        let d = p.min_dist.map(|v| format!("{v}")).unwrap_or_else(|| "-".into());
        writeln!(w, "{} {} sess{:02} {} {} {}", p.rank, p.policy_id, p.session, p.step, p.score, d)?;
    }
    Ok(())
}

pub fn selection_report_to_string(header_lines: &[String], selection: &Selection) -> String {
    let mut buf = Vec::new();
    write_selection_report(&mut buf, header_lines, selection).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("report text is ASCII")
}

/// Parse a selection report back into picks (headers returned separately).
pub fn read_selection_report<R: BufRead>(r: R) -> Result<(Vec<String>, Vec<SelectionPick>)> {
    let mut headers = Vec::new();
    let mut picks = Vec::new();
    let mut saw_column_row = false;
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(h) = t.strip_prefix('#') {
            headers.push(h.trim().to_string());
            continue;
        }
        if !saw_column_row {
            if !t.starts_with("rank ") {
                return Err(Error::Parse("selection report missing column row".into()));
            }
            saw_column_row = true;
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 6 {
            return Err(Error::Parse(format!("selection row needs 6 fields, got {}", f.len())));
        }
        let session = f[2]
            .strip_prefix("sess")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad session id `{}`", f[2])))?;
        picks.push(SelectionPick {
            rank: f[0].parse().map_err(|_| Error::Parse("bad rank".into()))?,
            policy_id: f[1].to_string(),
            session,
            step: f[3].parse().map_err(|_| Error::Parse("bad step".into()))?,
            score: f[4].parse().map_err(|_| Error::Parse("bad score".into()))?,
            min_dist: if f[5] == "-" {
                None
            } else {
                Some(f[5].parse().map_err(|_| Error::Parse("bad distance".into()))?)
            },
        });
    }
    Ok((headers, picks))
}

/// Uniform random selection of `k` distinct candidates (partial
/// Fisher-Yates), the baseline the greedy selector is compared against.
pub fn select_random<T: Real>(pool: &CandidatePool<T>, k: usize, seed: u64) -> Result<Selection> {
    if pool.is_empty() {
        return Err(Error::NoCandidates);
    }
    if k == 0 {
        return Err(Error::InvalidInput("selection size must be at least 1".into()));
    }
    let n = pool.len();
    let truncated = k > n;
    let take = k.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..take {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }
    let picks = order[..take]
        .iter()
        .enumerate()
        .map(|(r, &idx)| make_pick(pool, r + 1, idx, None))
        .collect();
    Ok(Selection { picks, truncated, isolated: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool_from(
        scores: &[f64],
        entries: Vec<Vec<Option<f64>>>,
    ) -> CandidatePool<f64> {
        let ids: Vec<String> = (0..scores.len()).map(|i| format!("c{i}")).collect();
        let candidates = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| Candidate {
                policy_id: ids[i].clone(),
                session: 0,
                step: i as u64,
                score: s,
            })
            .collect();
        let matrix = DistanceMatrix::from_entries(ids, entries).unwrap();
        CandidatePool::new(candidates, matrix).unwrap()
    }

    fn full(n: usize, d: &dyn Fn(usize, usize) -> f64) -> Vec<Vec<Option<f64>>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { Some(0.0) } else { Some(d(i, j)) }).collect())
            .collect()
    }

    #[test]
    fn filter_is_boundary_inclusive() {
        let p = pool_from(&[0.95, 0.90, 0.89], full(3, &|_, _| 1.0));
        let f = filter_by_score(&p, 0.90).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.candidates[0].policy_id, "c0");
        assert_eq!(f.candidates[1].policy_id, "c1");
    }

    #[test]
    fn filter_extremes() {
        let p = pool_from(&[0.5, 1.0, 0.0], full(3, &|_, _| 1.0));
        assert_eq!(filter_by_score(&p, 0.0).unwrap().len(), 3);
        assert_eq!(filter_by_score(&p, 1.0).unwrap().len(), 1);
        assert!(filter_by_score(&p, 1.5).is_err());
    }

    #[test]
    fn greedy_follows_max_min() {
        // d(0,1)=1 d(0,2)=5 d(0,3)=2 d(1,2)=4 d(1,3)=3 d(2,3)=6.
        // Starting from c0 the max-min order is c0, c2, c3, c1.
        let d = |i: usize, j: usize| -> f64 {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            match (a, b) {
                (0, 1) => 1.0,
                (0, 2) => 5.0,
                (0, 3) => 2.0,
                (1, 2) => 4.0,
                (1, 3) => 3.0,
                (2, 3) => 6.0,
                _ => unreachable!(),
            }
        };
        let p = pool_from(&[1.0; 4], full(4, &d));
        // Find a seed whose first uniform pick is index 0.
        let seed = (0..64)
            .find(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                rng.random_range(0..4usize) == 0
            })
            .expect("some small seed starts at 0");
        let sel = select_diverse(&p, 4, seed).unwrap();
        let ids = sel.policy_ids();
        assert_eq!(ids, vec!["c0", "c2", "c3", "c1"]);
        // Min-distances at selection: c2 joins at 5, c3 at min(2,6)=2,
        // c1 at min(1,4,3)=1.
        assert_eq!(sel.picks[1].min_dist, Some(5.0));
        assert_eq!(sel.picks[2].min_dist, Some(2.0));
        assert_eq!(sel.picks[3].min_dist, Some(1.0));
        assert!(!sel.truncated);
    }

    #[test]
    fn oversize_request_returns_whole_pool() {
        let p = pool_from(&[1.0; 3], full(3, &|_, _| 1.0));
        let sel = select_diverse(&p, 10, 1).unwrap();
        assert_eq!(sel.picks.len(), 3);
        assert!(sel.truncated);
    }

    #[test]
    fn empty_pool_errors() {
        let p = pool_from(&[0.0], full(1, &|_, _| 0.0));
        let f = filter_by_score(&p, 0.5).unwrap();
        assert!(matches!(select_diverse(&f, 1, 0), Err(Error::NoCandidates)));
    }

    #[test]
    fn unknown_pairs_are_picked_last_and_reported() {
        // c2 has no shared scenario with anyone.
        let entries = vec![
            vec![Some(0.0), Some(2.0), None],
            vec![Some(2.0), Some(0.0), None],
            vec![None, None, Some(0.0)],
        ];
        let p = pool_from(&[1.0; 3], entries);
        let seed = (0..64)
            .find(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                rng.random_range(0..3usize) == 0
            })
            .unwrap();
        let sel = select_diverse(&p, 3, seed).unwrap();
        assert_eq!(sel.policy_ids(), vec!["c0", "c1", "c2"]);
        assert_eq!(sel.isolated, vec!["c2".to_string()]);
        assert_eq!(sel.picks[2].min_dist, None);
    }

    #[test]
    fn deterministic_under_seed() {
        let p = pool_from(&[1.0; 6], full(6, &|i, j| {
            let (a, b) = (i.min(j), i.max(j));
            ((a * 7 + b * 3) % 11) as f64 + 1.0
        }));
        let a = select_diverse(&p, 4, 99).unwrap();
        let b = select_diverse(&p, 4, 99).unwrap();
        assert_eq!(a, b);
        let r1 = select_random(&p, 4, 7).unwrap();
        let r2 = select_random(&p, 4, 7).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.picks.len(), 4);
        let mut ids = r1.policy_ids();
        ids.dedup();
        assert_eq!(ids.len(), 4);
    }

    #[test]
    fn report_round_trip() {
        let p = pool_from(&[0.9, 0.8], full(2, &|_, _| 1.5));
        let sel = select_diverse(&p, 2, 3).unwrap();
        let text = selection_report_to_string(&["config_hash: 00".into()], &sel);
        let (headers, picks) = read_selection_report(text.as_bytes()).unwrap();
        assert_eq!(headers, vec!["config_hash: 00".to_string()]);
        assert_eq!(picks, sel.picks);
    }
}
