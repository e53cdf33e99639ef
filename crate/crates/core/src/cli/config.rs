use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasets::{PhaseInterval, DEFAULT_CIRCLES_FACTOR};
use crate::dqc1::{ControlPrep, NoiseModel, RegisterPrep, ShotPlan};
use crate::error::{Error, Result};
use crate::kernel::GramMode;
use crate::svm::{DEFAULT_MAX_PASSES, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Moons,
    Circles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RegisterKind {
    Mixed,
    Pure,
}

impl RegisterKind {
    pub fn prep(self) -> RegisterPrep {
        match self {
            RegisterKind::Mixed => RegisterPrep::MaximallyMixed,
            RegisterKind::Pure => RegisterPrep::AllZerosPure,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    Exact,
    Sampled,
    Noisy,
}

/// A single C value or a list to choose from by cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CSetting {
    Single(f64),
    Scan(Vec<f64>),
}

impl CSetting {
    pub fn values(&self) -> Vec<f64> {
        match self {
            CSetting::Single(c) => vec![*c],
            CSetting::Scan(cs) => cs.clone(),
        }
    }
}

/// One experiment, as read from a JSON config file and overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    pub zeta: f64,
    pub n: usize,
    pub factor: f64,
    pub train_fraction: f64,
    pub seed: u64,
    pub r: usize,
    pub register: RegisterKind,
    pub kernel_mode: KernelMode,
    pub shots: Option<u64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub beta: Option<f64>,
    pub noise_p: Option<f64>,
    pub svm_c: CSetting,
    pub folds: usize,
    pub tol: f64,
    pub max_passes: usize,
    pub phase_interval: PhaseInterval,
    pub output_dir: PathBuf,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetKind::Moons,
            zeta: 0.1,
            n: 2000,
            factor: DEFAULT_CIRCLES_FACTOR,
            train_fraction: 0.8,
            seed: 0,
            r: 3,
            register: RegisterKind::Mixed,
            kernel_mode: KernelMode::Exact,
            shots: None,
            epsilon: None,
            delta: None,
            beta: None,
            noise_p: None,
            svm_c: CSetting::Single(1.0),
            folds: 5,
            tol: DEFAULT_TOL,
            max_passes: DEFAULT_MAX_PASSES,
            phase_interval: PhaseInterval::default(),
            output_dir: PathBuf::from("out"),
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line() as u64,
            msg: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return bad(format!("zeta must be finite and >= 0, got {}", self.zeta));
        }
        if self.n < 4 || self.n % 2 != 0 {
            return bad(format!("n must be even and at least 4, got {}", self.n));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return bad(format!("factor must lie in (0, 1), got {}", self.factor));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.r == 0 {
            return bad("r must be at least 1".into());
        }
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if !(self.tol > 0.0) || self.max_passes == 0 {
            return bad("tol must be positive and max_passes at least 1".into());
        }
        let cs = self.svm_c.values();
        if cs.is_empty() || cs.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return bad(format!("svm_c values must be positive, got {cs:?}"));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        PhaseInterval::new(self.phase_interval.start, self.phase_interval.width)?;

        let sampling = self.shots.is_some()
            || self.epsilon.is_some()
            || self.delta.is_some()
            || self.beta.is_some();
        match self.kernel_mode {
            KernelMode::Exact => {
                if sampling || self.noise_p.is_some() {
                    return bad("exact mode takes no shots/epsilon/delta/beta/noise_p".into());
                }
            }
            KernelMode::Sampled => {
                if self.noise_p.is_some() {
                    return bad("noise_p applies only to noisy mode".into());
                }
                match (self.shots, self.epsilon, self.delta) {
                    (Some(_), None, None) | (None, Some(_), Some(_)) => {}
                    _ => {
                        return bad(
                            "sampled mode needs either shots or both epsilon and delta".into(),
                        )
                    }
                }
                self.gram_mode()?;
            }
            KernelMode::Noisy => {
                if sampling {
                    return bad("shots/epsilon/delta/beta apply only to sampled mode".into());
                }
                if self.noise_p.is_none() {
                    return bad("noisy mode needs noise_p".into());
                }
                self.gram_mode()?;
            }
        }
        Ok(())
    }

    pub fn control(&self) -> Result<ControlPrep> {
        ControlPrep::new(self.beta.unwrap_or(1.0))
    }

    pub fn shot_plan(&self) -> Result<ShotPlan> {
        match (self.shots, self.epsilon, self.delta) {
            (Some(s), _, _) => ShotPlan::fixed(s, s),
            (None, Some(e), Some(d)) => ShotPlan::from_accuracy(e, d, self.control()?.beta()),
            _ => Err(Error::invalid("no shot budget configured")),
        }
    }

    pub fn gram_mode(&self) -> Result<GramMode> {
        Ok(match self.kernel_mode {
            KernelMode::Exact => GramMode::Exact,
            KernelMode::Sampled => GramMode::Sampled {
                plan: self.shot_plan()?,
                control: self.control()?,
                seed: self.seed,
            },
            KernelMode::Noisy => GramMode::Noisy {
                noise: NoiseModel::depolarizing(self.noise_p.unwrap_or(0.0))?,
            },
        })
    }
}
