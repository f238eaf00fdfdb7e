//! Scenario files: a fully seeded episode specification. The same scenario
//! with the same ego policy always reproduces the identical trajectory.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::map::ZoneMap;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Eval,
    Train,
}

/// How a vehicle is controlled during the episode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicyBinding {
    /// The evaluated / trained agent slot. Exactly one per scenario.
    Ego,
    /// Additional agent slots driven by a copy of the ego policy
    /// (decentralized multi-agent mode).
    SharedEgo,
    /// Non-reactive route follower with proportional control.
    Scripted,
    /// A frozen snapshot loaded from the given path.
    Snapshot(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VehicleSpec<T> {
    pub route: usize,
    /// Initial position as arc length along the route.
    pub start_arc: T,
    pub start_speed: T,
    /// Uniform perturbation bound for the start arc (meters along the
    /// route); drawn once per episode from the scenario seed.
    pub perturb: T,
    pub binding: PolicyBinding,
    /// When set, this vehicle's vehicle-distance rays do not see the ego
    /// (non-reactive traffic keeps scenario-constant trajectories).
    pub ignore_ego: bool,
}

#[derive(Clone, Debug)]
pub struct Scenario<T> {
    pub id: String,
    pub map: ZoneMap<T>,
    pub vehicles: Vec<VehicleSpec<T>>,
    pub seed: u64,
    /// Episode time limit in seconds.
    pub time_limit: f64,
    pub mode: Mode,
}

impl<T: Real> Scenario<T> {
    pub fn time_limit_steps(&self) -> u64 {
        (self.time_limit / crate::DT).round() as u64
    }

    pub fn ego_index(&self) -> Result<usize> {
        let egos: Vec<usize> = self
            .vehicles
            .iter()
            .enumerate()
            .filter(|(_, v)| v.binding == PolicyBinding::Ego)
            .map(|(i, _)| i)
            .collect();
        match egos.as_slice() {
            [one] => Ok(*one),
            [] => Err(Error::Config(format!("scenario `{}` has no ego vehicle", self.id))),
            _ => Err(Error::Config(format!("scenario `{}` has multiple ego vehicles", self.id))),
        }
    }

    /// Indices of agent-controlled vehicles (the ego plus shared copies).
    pub fn agent_indices(&self) -> Vec<usize> {
        self.vehicles
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v.binding, PolicyBinding::Ego | PolicyBinding::SharedEgo))
            .map(|(i, _)| i)
            .collect()
    }

    /// The scenario re-seeded and re-labelled as evaluation variant `i`.
    /// Evaluation suites are fixed families `s000..s0NN` of one base
    /// scenario with different perturbation draws.
    pub fn variant(&self, i: u32) -> Self {
        let mut s = self.clone();
        s.id = format!("s{i:03}");
        s.seed = self.seed.wrapping_add(u64::from(i));
        s
    }

    pub fn from_file_spec(file: &ScenarioFile, map: ZoneMap<T>, id: String) -> Result<Self> {
        let mode = match file.mode.as_str() {
            "eval" => Mode::Eval,
            "train" => Mode::Train,
            other => return Err(Error::Config(format!("unknown scenario mode `{other}`"))),
        };
        let vehicles: Vec<VehicleSpec<T>> = file
            .vehicles
            .iter()
            .map(|v| {
                let binding = match v.policy.as_str() {
                    "ego" => PolicyBinding::Ego,
                    "shared" => PolicyBinding::SharedEgo,
                    "scripted" => PolicyBinding::Scripted,
                    other => match other.strip_prefix("snapshot:") {
                        Some(p) => PolicyBinding::Snapshot(p.to_string()),
                        None => {
                            return Err(Error::Config(format!("unknown policy binding `{other}`")))
                        }
                    },
                };
                Ok(VehicleSpec {
                    route: v.route,
                    start_arc: T::of(v.start_arc),
                    start_speed: T::of(v.start_speed),
                    perturb: T::of(v.perturb),
                    binding,
                    ignore_ego: v.ignore_ego,
                })
            })
            .collect::<Result<_>>()?;
        let scenario = Self {
            id,
            map,
            vehicles,
            seed: file.seed,
            time_limit: file.time_limit,
            mode,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<()> {
        if self.vehicles.is_empty() {
            return Err(Error::Config(format!("scenario `{}` has no vehicles", self.id)));
        }
        if self.time_limit <= 0.0 {
            return Err(Error::Config("scenario time limit must be positive".into()));
        }
        for (i, v) in self.vehicles.iter().enumerate() {
            if v.route >= self.map.routes.len() {
                return Err(Error::Config(format!(
                    "vehicle {i} references route {} of map `{}`",
                    v.route, self.map.name
                )));
            }
            if v.perturb < T::zero() {
                return Err(Error::Config("perturbation bound must be non-negative".into()));
            }
        }
        let ego = self.ego_index()?;
        if self.mode == Mode::Eval
            && self.map.goal_for_route(self.vehicles[ego].route).is_none()
        {
            return Err(Error::Config(format!(
                "eval scenario `{}` has no goal area for the ego route",
                self.id
            )));
        }
        Ok(())
    }

    /// Load a scenario file; the map path inside it resolves relative to
    /// the scenario file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read scenario `{}`: {e}", path.display()))
        })?;
        let file: ScenarioFile = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("scenario `{}`: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let map_path = base.join(&file.map);
        let map = ZoneMap::load(&map_path)?;
        let id = file.name.clone();
        Self::from_file_spec(&file, map, id)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    pub map: PathBuf,
    pub seed: u64,
    pub time_limit: f64,
    pub mode: String,
    pub vehicles: Vec<VehicleSpecFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VehicleSpecFile {
    pub route: usize,
    pub start_arc: f64,
    #[serde(default)]
    pub start_speed: f64,
    #[serde(default)]
    pub perturb: f64,
    pub policy: String,
    #[serde(default)]
    pub ignore_ego: bool,
}
