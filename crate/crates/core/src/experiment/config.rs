use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Plan, ResolvedPolicy, DISCOUNT_GRID, WINDOW_GRID};
use crate::change_detection::{RbocdConfig, DEFAULT_MAX_CANDIDATES};
use crate::divergence::Divergence;
use crate::environments::{
    Environment, JcasEnvironment, JcasParams, PiecewiseBernoulli, PiecewiseSpec, TraceEnvironment,
};
use crate::error::{Error, Result};
use crate::policies::{PolicyConfig, RestartScope, WrapperConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentConfig {
    /// The built-in 4-arm, 3-objective bank with 4 breakpoints.
    Synthetic,
    /// An inline piecewise Bernoulli spec.
    Piecewise {
        spec: PiecewiseSpec,
    },
    /// A piecewise Bernoulli spec stored as JSON.
    PiecewiseFile {
        path: PathBuf,
    },
    Jcas {
        #[serde(default)]
        params: JcasParams,
    },
    JcasFile {
        path: PathBuf,
    },
    Trace {
        path: PathBuf,
        #[serde(default)]
        segment_length: Option<usize>,
    },
}

impl EnvironmentConfig {
    pub fn build(&self) -> Result<Box<dyn Environment>> {
        Ok(match self {
            EnvironmentConfig::Synthetic => Box::new(PiecewiseBernoulli::synthetic()),
            EnvironmentConfig::Piecewise { spec } => {
                Box::new(PiecewiseBernoulli::new(spec.clone())?)
            }
            EnvironmentConfig::PiecewiseFile { path } => {
                Box::new(PiecewiseBernoulli::from_json_file(path)?)
            }
            EnvironmentConfig::Jcas { params } => Box::new(JcasEnvironment::new(params.clone())?),
            EnvironmentConfig::JcasFile { path } => {
                Box::new(JcasEnvironment::new(JcasParams::from_json_file(path)?)?)
            }
            EnvironmentConfig::Trace {
                path,
                segment_length,
            } => Box::new(TraceEnvironment::from_csv(path, *segment_length)?),
        })
    }

    /// Resolves relative file paths against `base`.
    fn rebase(&mut self, base: &Path) {
        match self {
            EnvironmentConfig::PiecewiseFile { path }
            | EnvironmentConfig::JcasFile { path }
            | EnvironmentConfig::Trace { path, .. }
                if path.is_relative() =>
            {
                *path = base.join(&*path);
            }
            _ => {}
        }
    }
}

/// A policy entry in an experiment config. Missing hyperparameters take
/// their defaults; a missing window or discount triggers a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    Oracle,
    ParetoUcb {
        #[serde(default)]
        divergence: Divergence,
        #[serde(default)]
        exponent: f64,
    },
    RbocdParetoUcb {
        #[serde(default)]
        divergence: Divergence,
        #[serde(default)]
        exponent: f64,
        /// Detector confidence; derived from the horizon when absent.
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default = "default_max_candidates")]
        max_candidates: usize,
        #[serde(default)]
        scope: RestartScope,
        #[serde(default)]
        forced_exploration: f64,
    },
    SwParetoUcb {
        #[serde(default)]
        divergence: Divergence,
        #[serde(default)]
        exponent: f64,
        #[serde(default)]
        window: Option<usize>,
    },
    DParetoUcb {
        #[serde(default)]
        divergence: Divergence,
        #[serde(default)]
        exponent: f64,
        #[serde(default)]
        discount: Option<f64>,
    },
}

fn default_max_candidates() -> usize {
    DEFAULT_MAX_CANDIDATES
}

impl PolicySpec {
    pub fn rbocd() -> Self {
        PolicySpec::RbocdParetoUcb {
            divergence: Divergence::KlBernoulli,
            exponent: 0.0,
            delta: None,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            scope: RestartScope::Global,
            forced_exploration: 0.0,
        }
    }

    pub fn sliding_window(window: Option<usize>) -> Self {
        PolicySpec::SwParetoUcb {
            divergence: Divergence::KlBernoulli,
            exponent: 0.0,
            window,
        }
    }

    pub fn discounted(discount: Option<f64>) -> Self {
        PolicySpec::DParetoUcb {
            divergence: Divergence::KlBernoulli,
            exponent: 0.0,
            discount,
        }
    }

    /// Detector confidence `gamma_T / T` when breakpoints are known,
    /// otherwise `1 / T`.
    pub fn default_delta(breakpoints: usize, horizon: usize, known: bool) -> f64 {
        let count = if known { breakpoints.max(1) } else { 1 };
        (count as f64 / horizon as f64).min(0.5)
    }

    pub(crate) fn plan(
        &self,
        env: &dyn Environment,
        horizon: usize,
        breakpoints_known: bool,
    ) -> Result<Plan> {
        let base = |divergence: Divergence, exponent: f64| {
            let config = PolicyConfig::new(env.num_arms(), env.num_objectives())
                .with_divergence(divergence)
                .with_exponent(exponent);
            config.validate().map(|_| config)
        };
        let plan = match *self {
            PolicySpec::Oracle => Plan::Fixed(ResolvedPolicy::Oracle),
            PolicySpec::ParetoUcb {
                divergence,
                exponent,
            } => Plan::Fixed(ResolvedPolicy::ParetoUcb {
                config: base(divergence, exponent)?,
            }),
            PolicySpec::RbocdParetoUcb {
                divergence,
                exponent,
                delta,
                max_candidates,
                scope,
                forced_exploration,
            } => {
                let breakpoints = env.breakpoints().iter().filter(|&&b| b <= horizon).count();
                let delta = delta.unwrap_or_else(|| {
                    Self::default_delta(breakpoints, horizon, breakpoints_known)
                });
                let detector = RbocdConfig {
                    delta,
                    max_candidates,
                };
                crate::change_detection::Rbocd::new(detector)?;
                Plan::Fixed(ResolvedPolicy::RbocdParetoUcb {
                    config: base(divergence, exponent)?,
                    detector,
                    wrapper: WrapperConfig {
                        scope,
                        forced_exploration,
                        seed: 0,
                    },
                })
            }
            PolicySpec::SwParetoUcb {
                divergence,
                exponent,
                window,
            } => {
                let config = base(divergence, exponent)?;
                let k = env.num_arms();
                match window {
                    Some(w) => {
                        if w < k {
                            return Err(Error::Config(format!("window {w} shorter than {k} arms")));
                        }
                        Plan::Fixed(ResolvedPolicy::SwParetoUcb { config, window: w })
                    }
                    None => Plan::Grid {
                        parameter: "window",
                        candidates: WINDOW_GRID
                            .iter()
                            .filter(|&&w| w >= k)
                            .map(|&w| (w as f64, ResolvedPolicy::SwParetoUcb { config, window: w }))
                            .collect(),
                    },
                }
            }
            PolicySpec::DParetoUcb {
                divergence,
                exponent,
                discount,
            } => {
                let config = base(divergence, exponent)?;
                match discount {
                    Some(g) => {
                        if !(g > 0.0 && g < 1.0) {
                            return Err(Error::Config(format!(
                                "discount must be in (0, 1), got {g}"
                            )));
                        }
                        Plan::Fixed(ResolvedPolicy::DParetoUcb {
                            config,
                            discount: g,
                        })
                    }
                    None => Plan::Grid {
                        parameter: "discount",
                        candidates: DISCOUNT_GRID
                            .iter()
                            .map(|&g| {
                                (
                                    g,
                                    ResolvedPolicy::DParetoUcb {
                                        config,
                                        discount: g,
                                    },
                                )
                            })
                            .collect(),
                    },
                }
            }
        };
        Ok(plan)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentConfig,
    pub policies: Vec<PolicySpec>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Rounds to simulate; the environment's full horizon when absent.
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Whether the breakpoint count may be used to set detector confidence.
    #[serde(default)]
    pub breakpoints_known: bool,
}

fn default_replications() -> usize {
    100
}

impl ExperimentConfig {
    pub fn new(environment: EnvironmentConfig, policies: Vec<PolicySpec>) -> Self {
        Self {
            environment,
            policies,
            replications: default_replications(),
            horizon: None,
            seed: 0,
            output: None,
            format: OutputFormat::Csv,
            breakpoints_known: false,
        }
    }

    /// Reads a JSON config; relative paths inside it resolve against the
    /// config file's directory.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut config: Self = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.environment.rebase(base);
        if let Some(out) = &mut config.output {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("no policies configured".into()));
        }
        if self.horizon == Some(0) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let text = r#"{
            "environment": {"type": "synthetic"},
            "policies": [
                {"type": "rbocd_pareto_ucb"},
                {"type": "sw_pareto_ucb", "window": 200},
                {"type": "d_pareto_ucb"},
                {"type": "oracle"}
            ],
            "replications": 3,
            "seed": 7
        }"#;
        let config: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.policies[0], PolicySpec::rbocd());
        assert_eq!(config.policies[1], PolicySpec::sliding_window(Some(200)));
        assert_eq!(config.format, OutputFormat::Csv);
        assert!(!config.breakpoints_known);
    }

    #[test]
    fn rejects_unknown_names() {
        let text = r#"{"environment": {"type": "synthetic"}, "policies": [{"type": "thompson"}]}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
        let text = r#"{"environment": {"type": "moon"}, "policies": [{"type": "oracle"}]}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
        let text = r#"{"environment": {"type": "synthetic"}, "policies": [], "replications": 1}"#;
        let config: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn default_delta() {
        assert_eq!(PolicySpec::default_delta(4, 1500, true), 4.0 / 1500.0);
        assert_eq!(PolicySpec::default_delta(4, 1500, false), 1.0 / 1500.0);
        assert_eq!(PolicySpec::default_delta(0, 1000, true), 1e-3);
    }

    #[test]
    fn grid_plans() {
        let env = PiecewiseBernoulli::synthetic();
        match PolicySpec::sliding_window(None)
            .plan(&env, 1500, false)
            .unwrap()
        {
            Plan::Grid { candidates, .. } => assert_eq!(candidates.len(), 5),
            Plan::Fixed(_) => panic!("expected a grid"),
        }
        match PolicySpec::discounted(None)
            .plan(&env, 1500, false)
            .unwrap()
        {
            Plan::Grid { candidates, .. } => assert_eq!(candidates.len(), 4),
            Plan::Fixed(_) => panic!("expected a grid"),
        }
        assert!(PolicySpec::sliding_window(Some(2))
            .plan(&env, 1500, false)
            .is_err());
        assert!(PolicySpec::discounted(Some(1.0))
            .plan(&env, 1500, false)
            .is_err());
    }
}
