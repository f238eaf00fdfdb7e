//! Policy-diversity metrics over per-scenario trajectory sets.
//!
//! Two measures are computed from an [`EvaluationTable`]:
//!
//! - inter-policy diversity: the mean pairwise trajectory distance of two
//!   policies over the scenarios where both reach the goal, averaged over
//!   all (unordered) policy pairs;
//! - overall diversity: the exact Wasserstein-1 distance between the set of
//!   successful trajectories and a reference trajectory set, averaged over
//!   scenarios. Lower is better.
//!
//! The Wasserstein-1 optimum is solved exactly: the uniform masses
//! `1/|A|` and `1/|B|` are scaled by `lcm(|A|, |B|)` to integers and the
//! resulting transportation problem goes through the min-cost-flow solver
//! in [`crate::flow`].

use crate::error::{Error, Result};
use crate::flow;
use crate::scalar::Real;
use crate::trajectory::{trajectory_distance, Trajectory};
use crate::trajlog::Outcome;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

#[derive(Clone, Debug)]
pub struct EvalCell<T> {
    pub outcome: Outcome,
    pub trajectory: Trajectory<T>,
}

/// Outcome and trajectory for every (scenario, policy) pair. All cells must
/// be filled before metrics are computed.
#[derive(Clone, Debug)]
pub struct EvaluationTable<T> {
    scenario_ids: Vec<String>,
    policy_ids: Vec<String>,
    cells: Vec<Option<EvalCell<T>>>, // row-major: [scenario][policy]
}

impl<T: Real> EvaluationTable<T> {
    pub fn new(scenario_ids: Vec<String>, policy_ids: Vec<String>) -> Result<Self> {
        if scenario_ids.is_empty() || policy_ids.is_empty() {
            return Err(Error::InvalidInput("table needs scenarios and policies".into()));
        }
        for ids in [&scenario_ids, &policy_ids] {
            let mut sorted = ids.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != ids.len() {
                return Err(Error::InvalidInput("duplicate ids in evaluation table".into()));
            }
        }
        let cells = vec![None; scenario_ids.len() * policy_ids.len()];
        Ok(Self { scenario_ids, policy_ids, cells })
    }

    pub fn scenario_ids(&self) -> &[String] {
        &self.scenario_ids
    }

    pub fn policy_ids(&self) -> &[String] {
        &self.policy_ids
    }

    pub fn scenario_index(&self, id: &str) -> Result<usize> {
        self.scenario_ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scenario `{id}`")))
    }

    pub fn policy_index(&self, id: &str) -> Result<usize> {
        self.policy_ids
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown policy `{id}`")))
    }

    fn idx(&self, s: usize, p: usize) -> usize {
        s * self.policy_ids.len() + p
    }

    pub fn set_cell(
        &mut self,
        scenario_id: &str,
        policy_id: &str,
        outcome: Outcome,
        trajectory: Trajectory<T>,
    ) -> Result<()> {
        let s = self.scenario_index(scenario_id)?;
        let p = self.policy_index(policy_id)?;
        let i = self.idx(s, p);
        self.cells[i] = Some(EvalCell { outcome, trajectory });
        Ok(())
    }

    pub fn cell(&self, s: usize, p: usize) -> Option<&EvalCell<T>> {
        self.cells[self.idx(s, p)].as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "evaluation table has unfilled cells; run evaluation first".into(),
            ))
        }
    }

    /// Scenario indices where the policy reached the goal.
    pub fn success_scenarios(&self, p: usize) -> Vec<usize> {
        (0..self.scenario_ids.len())
            .filter(|&s| matches!(self.cell(s, p), Some(c) if c.outcome == Outcome::Goal))
            .collect()
    }

    /// Policy indices (within `policies`, or all when `None`) that reached
    /// the goal in scenario `s`.
    pub fn successful_policies(&self, s: usize, policies: Option<&[usize]>) -> Vec<usize> {
        let all: Vec<usize> = (0..self.policy_ids.len()).collect();
        policies
            .unwrap_or(&all)
            .iter()
            .copied()
            .filter(|&p| matches!(self.cell(s, p), Some(c) if c.outcome == Outcome::Goal))
            .collect()
    }

    /// Fraction of scenarios in which the policy reached the goal.
    pub fn driving_score(&self, policy_id: &str) -> Result<f64> {
        let p = self.policy_index(policy_id)?;
        self.require_complete()?;
        let wins = self.success_scenarios(p).len();
        Ok(wins as f64 / self.scenario_ids.len() as f64)
    }
}

/// Mean trajectory distance of two policies over the scenarios where both
/// reached the goal.
pub fn pairwise_diversity<T: Real>(
    table: &EvaluationTable<T>,
    policy_a: &str,
    policy_b: &str,
) -> Result<T> {
    if policy_a == policy_b {
        return Err(Error::InvalidInput("pairwise diversity needs two distinct policies".into()));
    }
    table.require_complete()?;
    let pa = table.policy_index(policy_a)?;
    let pb = table.policy_index(policy_b)?;
    let mut sum = T::zero();
    let mut count = 0usize;
    for s in 0..table.scenario_ids().len() {
        let (ca, cb) = (table.cell(s, pa).unwrap(), table.cell(s, pb).unwrap());
        if ca.outcome == Outcome::Goal && cb.outcome == Outcome::Goal {
            sum += trajectory_distance(&ca.trajectory, &cb.trajectory)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::NoSharedScenario(policy_a.to_string(), policy_b.to_string()));
    }
    Ok(sum / T::from_usize(count).unwrap())
}

/// Mean pairwise diversity over a policy set. The double sum over ordered
/// pairs divided by `n(n-1)` equals the mean over unordered pairs because
/// the pairwise measure is symmetric.
pub fn inter_policy_diversity<T: Real>(
    table: &EvaluationTable<T>,
    policies: &[String],
) -> Result<T> {
    if policies.len() < 2 {
        return Err(Error::InvalidInput("inter-policy diversity needs at least 2 policies".into()));
    }
    let mut sum = T::zero();
    let mut pairs = 0usize;
    for i in 0..policies.len() {
        for j in (i + 1)..policies.len() {
            sum += pairwise_diversity(table, &policies[i], &policies[j])?;
            pairs += 1;
        }
    }
    Ok(sum / T::from_usize(pairs).unwrap())
}

/// Exact Wasserstein-1 distance between two trajectory sets under uniform
/// masses, with the average-Euclidean trajectory distance as ground cost.
/// Both sets must come from the same scenario.
pub fn wasserstein1<T: Real>(set_a: &[Trajectory<T>], set_b: &[Trajectory<T>]) -> Result<T> {
    if set_a.is_empty() || set_b.is_empty() {
        return Err(Error::InvalidInput("wasserstein1 needs non-empty trajectory sets".into()));
    }
    let mut costs = vec![vec![T::zero(); set_b.len()]; set_a.len()];
    for (i, a) in set_a.iter().enumerate() {
        for (j, b) in set_b.iter().enumerate() {
            costs[i][j] = trajectory_distance(a, b)?;
        }
    }
    wasserstein1_costs(&costs)
}

/// Wasserstein-1 between uniform distributions over the rows and columns of
/// a prepared ground-cost matrix.
pub fn wasserstein1_costs<T: Real>(costs: &[Vec<T>]) -> Result<T> {
    let m = costs.len();
    if m == 0 || costs[0].is_empty() {
        return Err(Error::InvalidInput("empty cost matrix".into()));
    }
    let n = costs[0].len();
    if costs.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput("ragged cost matrix".into()));
    }
    let scale = flow::lcm(m as u64, n as u64);
    let supply = vec![scale / m as u64; m];
    let demand = vec![scale / n as u64; n];
    let total = flow::min_cost_transport(&supply, &demand, |i, j| costs[i][j])?;
    Ok(total / T::from_u64(scale).unwrap())
}

/// Overall diversity of a policy set against per-scenario reference sets:
/// the per-scenario Wasserstein-1 between the set's successful trajectories
/// and the references, averaged over all scenarios in the table.
pub fn overall_diversity<T: Real>(
    table: &EvaluationTable<T>,
    policies: &[String],
    refs: &BTreeMap<String, Vec<Trajectory<T>>>,
) -> Result<T> {
    table.require_complete()?;
    if policies.is_empty() {
        return Err(Error::InvalidInput("overall diversity needs a policy set".into()));
    }
    let indices: Vec<usize> =
        policies.iter().map(|p| table.policy_index(p)).collect::<Result<_>>()?;
    let mut sum = T::zero();
    for (s, sid) in table.scenario_ids().iter().enumerate() {
        let winners = table.successful_policies(s, Some(&indices));
        if winners.is_empty() {
            return Err(Error::EmptySuccessSet(sid.clone()));
        }
        let own: Vec<Trajectory<T>> =
            winners.iter().map(|&p| table.cell(s, p).unwrap().trajectory.clone()).collect();
        let reference = refs
            .get(sid)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| Error::InvalidInput(format!("no reference set for scenario `{sid}`")))?;
        sum += wasserstein1(&own, reference)?;
    }
    Ok(sum / T::from_usize(table.scenario_ids().len()).unwrap())
}

/// Symmetric matrix of pairwise inter-policy diversities with the
/// shared-success count per pair. Pairs that never both succeed have a
/// count of zero and no defined distance.
#[derive(Clone, Debug)]
pub struct DistanceMatrix<T> {
    ids: Vec<String>,
    dist: Vec<T>,    // n*n, row-major
    shared: Vec<u32>, // n*n
}

impl<T: Real> DistanceMatrix<T> {
    pub fn from_table(table: &EvaluationTable<T>, policies: &[String]) -> Result<Self> {
        table.require_complete()?;
        let n = policies.len();
        let idx: Vec<usize> = policies.iter().map(|p| table.policy_index(p)).collect::<Result<_>>()?;
        let mut dist = vec![T::zero(); n * n];
        let mut shared = vec![0u32; n * n];
        for i in 0..n {
            shared[i * n + i] = table.success_scenarios(idx[i]).len() as u32;
            for j in (i + 1)..n {
                let mut sum = T::zero();
                let mut count = 0u32;
                for s in 0..table.scenario_ids().len() {
                    let (ca, cb) = (table.cell(s, idx[i]).unwrap(), table.cell(s, idx[j]).unwrap());
                    if ca.outcome == Outcome::Goal && cb.outcome == Outcome::Goal {
                        sum += trajectory_distance(&ca.trajectory, &cb.trajectory)?;
                        count += 1;
                    }
                }
                if count > 0 {
                    let d = sum / T::from_u32(count).unwrap();
                    dist[i * n + j] = d;
                    dist[j * n + i] = d;
                }
                shared[i * n + j] = count;
                shared[j * n + i] = count;
            }
        }
        Ok(Self { ids: policies.to_vec(), dist, shared })
    }

    /// Build directly from known entries; `None` marks pairs with no shared
    /// success scenario. Used by selection tests and report parsing.
    pub fn from_entries(ids: Vec<String>, entries: Vec<Vec<Option<T>>>) -> Result<Self> {
        let n = ids.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("distance matrix shape mismatch".into()));
        }
        let mut dist = vec![T::zero(); n * n];
        let mut shared = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::InvalidInput("distance matrix must be symmetric".into()));
                }
                match entries[i][j] {
                    Some(d) if i != j => {
                        if !d.is_finite() {
                            return Err(Error::InvalidInput("distances must be finite".into()));
                        }
                        dist[i * n + j] = d;
                        shared[i * n + j] = 1;
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { ids, dist, shared })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Pairwise diversity of entries `i`, `j`; `None` when the pair shares
    /// no success scenario. The diagonal is zero.
    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        if i == j {
            return Some(T::zero());
        }
        let n = self.len();
        if self.shared[i * n + j] > 0 {
            Some(self.dist[i * n + j])
        } else {
            None
        }
    }

    pub fn shared_count(&self, i: usize, j: usize) -> u32 {
        self.shared[i * self.len() + j]
    }

    /// Mean pairwise distance over a subset of entry indices.
    pub fn mean_pairwise(&self, subset: &[usize]) -> Result<T> {
        if subset.len() < 2 {
            return Err(Error::InvalidInput("mean pairwise needs at least 2 entries".into()));
        }
        let mut sum = T::zero();
        let mut pairs = 0usize;
        for a in 0..subset.len() {
            for b in (a + 1)..subset.len() {
                let (i, j) = (subset[a], subset[b]);
                sum += self.get(i, j).ok_or_else(|| {
                    Error::NoSharedScenario(self.ids[i].clone(), self.ids[j].clone())
                })?;
                pairs += 1;
            }
        }
        Ok(sum / T::from_usize(pairs).unwrap())
    }

    /// Sub-matrix restricted to the given entry indices, order preserved.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let n = self.len();
        let k = keep.len();
        let mut dist = vec![T::zero(); k * k];
        let mut shared = vec![0u32; k * k];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                dist[a * k + b] = self.dist[i * n + j];
                shared[a * k + b] = self.shared[i * n + j];
            }
        }
        Self { ids: keep.iter().map(|&i| self.ids[i].clone()).collect(), dist, shared }
    }
}

/// Metrics report: the summary fields plus the full distance matrix,
/// as structured text. Missing values (for example inter-policy diversity
/// of a set with an undefined pair) print as `-`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub success_rate_mean: f64,
    pub inter_policy_diversity: Option<f64>,
    pub overall_diversity: Option<f64>,
    pub matrix_ids: Vec<String>,
    pub matrix: Vec<Vec<Option<f64>>>,
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "-".to_string(),
    }
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s == "-" {
        Ok(None)
    } else {
        s.parse::<f64>().map(Some).map_err(|_| Error::Parse(format!("bad number `{s}`")))
    }
}

impl MetricsReport {
    pub fn write<W: Write>(&self, w: &mut W, header_lines: &[String]) -> Result<()> {
        for h in header_lines {
            writeln!(w, "# {h}")?;
        }
        writeln!(w, "success_rate_mean: {}", self.success_rate_mean)?;
        writeln!(w, "inter_policy_diversity: {}", fmt_opt(self.inter_policy_diversity))?;
        writeln!(w, "overall_diversity: {}", fmt_opt(self.overall_diversity))?;
        writeln!(w, "[distance_matrix]")?;
        writeln!(w, "ids: {}", self.matrix_ids.join(" "))?;
        for (i, id) in self.matrix_ids.iter().enumerate() {
            let row: Vec<String> = self.matrix[i].iter().map(|&v| fmt_opt(v)).collect();
            writeln!(w, "{id} {}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn to_string_with(&self, header_lines: &[String]) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, header_lines).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("report text is ASCII")
    }

    pub fn read<R: BufRead>(r: R) -> Result<(Vec<String>, Self)> {
        let mut headers = Vec::new();
        let mut success = None;
        let mut inter = None;
        let mut overall = None;
        let mut ids: Vec<String> = Vec::new();
        let mut matrix: Vec<Vec<Option<f64>>> = Vec::new();
        let mut in_matrix = false;
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
            if t == "[distance_matrix]" {
                in_matrix = true;
                continue;
            }
            if !in_matrix {
                if let Some(v) = t.strip_prefix("success_rate_mean:") {
                    success = Some(
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Parse("bad success_rate_mean".into()))?,
                    );
                } else if let Some(v) = t.strip_prefix("inter_policy_diversity:") {
                    inter = Some(parse_opt(v.trim())?);
                } else if let Some(v) = t.strip_prefix("overall_diversity:") {
                    overall = Some(parse_opt(v.trim())?);
                } else {
                    return Err(Error::Parse(format!("unexpected report line `{t}`")));
                }
            } else if let Some(v) = t.strip_prefix("ids:") {
                ids = v.split_whitespace().map(str::to_string).collect();
            } else {
                let mut fields = t.split_whitespace();
                let id = fields.next().ok_or_else(|| Error::Parse("empty matrix row".into()))?;
                let row_idx = matrix.len();
                if ids.get(row_idx).map(String::as_str) != Some(id) {
                    return Err(Error::Parse(format!("matrix row `{id}` out of order")));
                }
                let row: Vec<Option<f64>> =
                    fields.map(parse_opt).collect::<Result<_>>()?;
                if row.len() != ids.len() {
                    return Err(Error::Parse(format!("matrix row `{id}` has wrong width")));
                }
                matrix.push(row);
            }
        }
        if matrix.len() != ids.len() {
            return Err(Error::Parse("matrix row count does not match ids".into()));
        }
        Ok((
            headers,
            Self {
                success_rate_mean: success.ok_or_else(|| Error::Parse("missing success_rate_mean".into()))?,
                inter_policy_diversity: inter
                    .ok_or_else(|| Error::Parse("missing inter_policy_diversity".into()))?,
                overall_diversity: overall
                    .ok_or_else(|| Error::Parse("missing overall_diversity".into()))?,
                matrix_ids: ids,
                matrix,
            },
        ))
    }
}

impl<T: Real> DistanceMatrix<T> {
    /// Rows for the report's matrix block.
    pub fn to_report_rows(&self) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
        let n = self.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).map(Real::to_f64_lossy)).collect())
            .collect();
        (self.ids.clone(), rows)
    }
}
