//! Line-delimited trajectory log files.
//!
//! One step record per line:
//!
//! ```text
//! scenario_id,policy_id,step,x,y,v,theta,phi,a
//! ```
//!
//! followed by one episode summary record:
//!
//! ```text
//! scenario_id,policy_id,outcome,steps      (outcome: GOAL|COLLISION|TIMEOUT)
//! ```
//!
//! Values are decimal text with a `.` radix, written in shortest
//! round-trip form, so parsing restores the exact `f64` bits. Lines
//! starting with `#` are header/comment lines; a file may hold several
//! episodes (reference sets do).

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Real;
use crate::trajectory::Trajectory;
use std::fmt;
use std::io::{BufRead, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Goal,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Goal => "GOAL",
            Outcome::Collision => "COLLISION",
            Outcome::Timeout => "TIMEOUT",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "GOAL" => Ok(Outcome::Goal),
            "COLLISION" => Ok(Outcome::Collision),
            "TIMEOUT" => Ok(Outcome::Timeout),
            other => Err(Error::Parse(format!("unknown outcome `{other}`"))),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One simulation step of the ego vehicle. Step 0 is the initial pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
    pub phi: f64,
    pub accel: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub scenario_id: String,
    pub policy_id: String,
    pub outcome: Outcome,
    pub records: Vec<StepRecord>,
}

impl EpisodeLog {
    /// Number of simulation steps (the summary field): records minus the
    /// initial pose.
    pub fn steps(&self) -> u64 {
        (self.records.len() as u64).saturating_sub(1)
    }

    pub fn trajectory<T: Real>(&self) -> Result<Trajectory<T>> {
        let points = self
            .records
            .iter()
            .map(|r| Vec2::new(T::of(r.x), T::of(r.y)))
            .collect();
        let speeds = self.records.iter().map(|r| T::of(r.v)).collect();
        let headings = self.records.iter().map(|r| T::of(r.theta)).collect();
        Trajectory::with_kinematics(points, T::of(crate::DT), speeds, headings)
    }
}

pub fn write_episodes<W: Write>(
    w: &mut W,
    header_lines: &[String],
    episodes: &[EpisodeLog],
) -> Result<()> {
    for h in header_lines {
        writeln!(w, "# {h}")?;
    }
    for ep in episodes {
        for r in &ep.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                ep.scenario_id, ep.policy_id, r.step, r.x, r.y, r.v, r.theta, r.phi, r.accel
            )?;
        }
        writeln!(w, "{},{},{},{}", ep.scenario_id, ep.policy_id, ep.outcome, ep.steps())?;
    }
    Ok(())
}

pub fn episodes_to_string(header_lines: &[String], episodes: &[EpisodeLog]) -> String {
    let mut buf = Vec::new();
    write_episodes(&mut buf, header_lines, episodes).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("log text is ASCII")
}

fn parse_f64(field: &str, line_no: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line_no}: bad number `{field}`")))
}

/// Parse a log; returns header lines (without the leading `#`) and episodes.
pub fn read_episodes<R: BufRead>(r: R) -> Result<(Vec<String>, Vec<EpisodeLog>)> {
    let mut headers = Vec::new();
    let mut episodes: Vec<EpisodeLog> = Vec::new();
    let mut current: Option<EpisodeLog> = None;

    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(h) = trimmed.strip_prefix('#') {
            headers.push(h.trim().to_string());
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        match fields.len() {
            9 => {
                let rec = StepRecord {
                    step: fields[2]
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {line_no}: bad step index")))?,
                    x: parse_f64(fields[3], line_no)?,
                    y: parse_f64(fields[4], line_no)?,
                    v: parse_f64(fields[5], line_no)?,
                    theta: parse_f64(fields[6], line_no)?,
                    phi: parse_f64(fields[7], line_no)?,
                    accel: parse_f64(fields[8], line_no)?,
                };
                let cur = current.get_or_insert_with(|| EpisodeLog {
                    scenario_id: fields[0].to_string(),
                    policy_id: fields[1].to_string(),
                    outcome: Outcome::Timeout, // placeholder until the summary
                    records: Vec::new(),
                });
                if cur.scenario_id != fields[0] || cur.policy_id != fields[1] {
                    return Err(Error::Parse(format!(
                        "line {line_no}: episode changed ids without a summary record"
                    )));
                }
                cur.records.push(rec);
            }
            4 => {
                let mut ep = current.take().ok_or_else(|| {
                    Error::Parse(format!("line {line_no}: summary without step records"))
                })?;
                if ep.scenario_id != fields[0] || ep.policy_id != fields[1] {
                    return Err(Error::Parse(format!(
                        "line {line_no}: summary ids do not match the episode"
                    )));
                }
                ep.outcome = Outcome::parse(fields[2])?;
                let steps: u64 = fields[3]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {line_no}: bad step count")))?;
                if steps != ep.steps() {
                    return Err(Error::Parse(format!(
                        "line {line_no}: summary says {steps} steps but {} were recorded",
                        ep.steps()
                    )));
                }
                episodes.push(ep);
            }
            n => {
                return Err(Error::Parse(format!(
                    "line {line_no}: expected 9 or 4 fields, found {n}"
                )));
            }
        }
    }
    if current.is_some() {
        return Err(Error::Parse("log ended before the episode summary".into()));
    }
    Ok((headers, episodes))
}
