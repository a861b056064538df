//! Run configuration shared by every command: one TOML file with `system`,
//! `controller`, `network`, `analysis`, `simulation` and `output` sections.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::criterion::{uncertainty_gain, ControllerSpec, CriterionOptions};
use crate::error::{Error, Result};
use crate::ltisys::TransferFunction;
use crate::netsim::{
    DelaySource, LoopController, P3Policy, Reference, SimConfig, DIVERGENCE_FACTOR,
};
use crate::uncertainty::Protocol;

/// The bundled benchmark loop.
pub const EXAMPLE_CONFIG: &str = include_str!("../example-paper.cfg");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub controller: ControllerConfig,
    pub network: NetworkConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Plant `z^-d_hat * num/den` in descending powers of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "one")]
    pub h: f64,
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    pub d_hat: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerConfig {
    SmithPredictor {
        c_num: Vec<f64>,
        c_den: Vec<f64>,
        filter_pole: f64,
        #[serde(default = "unit")]
        v_num: Vec<f64>,
        #[serde(default = "unit")]
        v_den: Vec<f64>,
    },
    Direct {
        r_num: Vec<f64>,
        r_den: Vec<f64>,
        #[serde(default = "unit")]
        v_num: Vec<f64>,
        #[serde(default = "unit")]
        v_den: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub tau_lo: u32,
    pub tau_hi: u32,
    pub protocol: Protocol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub t_max: Option<u32>,
    pub budget: u64,
    pub causal: bool,
    pub overestimate: bool,
    /// Largest span tried by the admissible-delay scan.
    pub span_cap: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            t_max: None,
            budget: crate::uncertainty::DEFAULT_BUDGET,
            causal: false,
            overestimate: false,
            span_cap: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub horizon: usize,
    pub amplitude: f64,
    pub onset: usize,
    pub delays: DelaySource,
    pub p3_policy: P3Policy,
    pub divergence_factor: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            horizon: 500,
            amplitude: 1.0,
            onset: 0,
            delays: DelaySource::Uniform { seed: 1 },
            p3_policy: P3Policy::Oldest,
            divergence_factor: DIVERGENCE_FACTOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    pub path: Option<String>,
}

fn one() -> f64 {
    1.0
}

fn unit() -> Vec<f64> {
    vec![1.0]
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn example() -> Self {
        Self::parse(EXAMPLE_CONFIG).expect("bundled config is valid")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data")
    }

    /// Builds every transfer function once so errors surface at load time.
    pub fn validate(&self) -> Result<()> {
        self.plant()?;
        self.controller_spec()?;
        self.prefilter()?;
        if self.network.tau_lo > self.network.tau_hi {
            return Err(Error::DelayBounds {
                lo: self.network.tau_lo,
                hi: self.network.tau_hi,
            });
        }
        if self.analysis.causal && self.analysis.overestimate {
            return Err(Error::Config(
                "analysis.causal and analysis.overestimate are exclusive".into(),
            ));
        }
        Ok(())
    }

    fn tf(&self, num: &[f64], den: &[f64]) -> Result<TransferFunction> {
        TransferFunction::new(num, den, 0, self.system.h)
    }

    /// Plant including its dead time.
    pub fn plant(&self) -> Result<TransferFunction> {
        TransferFunction::new(
            &self.system.num,
            &self.system.den,
            self.system.d_hat,
            self.system.h,
        )
    }

    pub fn controller_spec(&self) -> Result<ControllerSpec> {
        Ok(match &self.controller {
            ControllerConfig::SmithPredictor {
                c_num,
                c_den,
                filter_pole,
                ..
            } => ControllerSpec::SmithPredictor {
                c: self.tf(c_num, c_den)?,
                filter_pole: *filter_pole,
            },
            ControllerConfig::Direct { r_num, r_den, .. } => ControllerSpec::Direct {
                r: self.tf(r_num, r_den)?,
            },
        })
    }

    pub fn prefilter(&self) -> Result<TransferFunction> {
        match &self.controller {
            ControllerConfig::SmithPredictor { v_num, v_den, .. }
            | ControllerConfig::Direct { v_num, v_den, .. } => self.tf(v_num, v_den),
        }
    }

    pub fn criterion_options(&self) -> CriterionOptions {
        CriterionOptions {
            causal: self.analysis.causal,
            overestimate: self.analysis.overestimate,
            t_max: self.analysis.t_max,
        }
    }

    /// Closed-loop simulation set up with the shift the analysis picks for the
    /// configured span.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let plant = self.plant()?;
        let v = self.prefilter()?;
        let (lo, hi) = (self.network.tau_lo, self.network.tau_hi);
        let controller = match self.controller_spec()? {
            ControllerSpec::SmithPredictor { c, filter_pole } => {
                let tau_a = if hi > lo {
                    uncertainty_gain(self.network.protocol, hi - lo, &self.criterion_options())?.0
                } else {
                    0
                };
                LoopController::smith_predictor(&plant, &c, &v, filter_pole, lo, tau_a)?
            }
            ControllerSpec::Direct { r } => LoopController::Direct { r, v },
        };
        let s = &self.simulation;
        Ok(SimConfig {
            plant,
            controller,
            protocol: self.network.protocol,
            p3_policy: s.p3_policy.clone(),
            tau_lo: lo,
            tau_hi: hi,
            delays: s.delays.clone(),
            horizon: s.horizon,
            reference: Reference {
                amplitude: s.amplitude,
                onset: s.onset,
            },
            divergence_factor: s.divergence_factor,
        })
    }
}
