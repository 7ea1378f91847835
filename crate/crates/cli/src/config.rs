//! Run configuration: one JSON document fixes the schedule, base dimension,
//! tolerances, seed and output target, so any run replays bit-for-bit from
//! the config file alone.

use serde::{Deserialize, Serialize};

use octnorm_core::{BaseSpace, ScheduleKind, ShapeSchedule, Tolerances, TowerSpace};

pub const DEFAULT_SEED: u64 = 0x0c7a_4ed1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub schedule: ScheduleSpec,
    pub base_dim: usize,
    pub tolerances: ToleranceSpec,
    pub seed: u64,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub levels: usize,
    pub z: Vec<f64>,
    pub l: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceSpec {
    pub solver_rel: f64,
    pub solver_max_iter: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            schedule: ScheduleSpec::default(),
            base_dim: 3,
            tolerances: ToleranceSpec::default(),
            seed: DEFAULT_SEED,
            output: OutputSpec::default(),
        }
    }
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec {
            kind: ScheduleKind::DefaultGeometric,
            levels: 48,
            z: Vec::new(),
            l: Vec::new(),
            s: Vec::new(),
        }
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            solver_rel: 1e-12,
            solver_max_iter: 200,
        }
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            path: None,
            format: OutputFormat::Json,
        }
    }
}

impl Config {
    pub fn load(path: Option<&str>) -> Result<Config, String> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config {p}: {e}"))?;
                serde_json::from_str(&text).map_err(|e| format!("config {p}: {e}"))
            }
        }
    }

    /// Validates every referenced value and builds the ambient space.
    pub fn space(&self) -> Result<TowerSpace, octnorm_core::Error> {
        let schedule = match self.schedule.kind {
            ScheduleKind::DefaultGeometric => {
                ShapeSchedule::default_geometric(self.schedule.levels)?
            }
            ScheduleKind::Explicit => ShapeSchedule::explicit(
                self.schedule.z.clone(),
                self.schedule.l.clone(),
                self.schedule.s.clone(),
            )?,
        };
        TowerSpace::new(
            BaseSpace::euclidean(self.base_dim)?,
            schedule,
            Tolerances {
                rel: self.tolerances.solver_rel,
                max_iter: self.tolerances.solver_max_iter,
            },
            self.seed,
        )
    }
}
