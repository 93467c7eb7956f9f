//! Run configuration: an optional TOML file, then command line overrides.
//!
//! ```toml
//! seed = 7
//! chains = 2
//! out = "runs/school"
//! emit_plots = true
//!
//! [data]
//! network = "network.csv"
//! responses = "responses.csv"
//!
//! [step1]
//! iters = 60000
//! burn = 10000
//! thin = 5
//!
//! [hyper]
//! sigma_delta = 1.0
//! ```
//!
//! A `[scenario]` table (`id = "1.1"`, optional `lambda`) replaces `[data]`
//! for simulated runs.

use std::path::{Path, PathBuf};

use netinfluence::diagnostics::RhatMode;
use netinfluence::estimate::TwoStepConfig;
use netinfluence::mcmc::{McmcConfig, StepSizes};
use netinfluence::simgen::{Scenario, ScenarioSpec, SCENARIO3_LAMBDAS};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::io::read_text;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit_plots: Option<bool>,
    pub replicates: Option<usize>,
    pub data: Option<DataSection>,
    pub scenario: Option<ScenarioSection>,
    pub step1: Option<ChainSection>,
    pub step2: Option<ChainSection>,
    pub hyper: Option<HyperSection>,
    pub baseline: Option<BaselineSection>,
    pub diagnostics: Option<DiagnosticsSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub network: PathBuf,
    pub responses: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub id: String,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub iters: Option<usize>,
    pub burn: Option<usize>,
    pub thin: Option<usize>,
    pub adapt: Option<bool>,
    /// Initial proposal SDs in block order.
    pub steps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperSection {
    pub sigma_alpha: Option<f64>,
    pub sigma_beta: Option<f64>,
    pub sigma_gamma: Option<f64>,
    pub sigma_delta: Option<f64>,
    pub a_sigma: Option<f64>,
    pub b_sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    pub enabled: Option<bool>,
    pub row_normalize: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    pub hpd_mass: Option<f64>,
    pub split_rhat: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        toml::from_str(&read_text(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Command line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub iters: Option<usize>,
    pub burn: Option<usize>,
    pub thin: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit_plots: bool,
    pub scenario: Option<String>,
    pub lambda: Vec<f64>,
    pub replicates: Option<usize>,
    pub network: Option<PathBuf>,
    pub responses: Option<PathBuf>,
    pub row_normalize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Files { network: PathBuf, responses: PathBuf },
    Scenario(ScenarioSpec),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    pub fit: TwoStepConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub emit_plots: bool,
    pub replicates: usize,
    /// Grid for the sweep subcommand.
    pub lambdas: Vec<f64>,
}

fn apply_chain<S: StepSizes>(cfg: &mut McmcConfig<S>, sec: Option<&ChainSection>, ov: &Overrides) -> CliResult<()> {
    if let Some(s) = sec {
        cfg.total_iters = s.iters.unwrap_or(cfg.total_iters);
        cfg.burn_in = s.burn.unwrap_or(cfg.burn_in);
        cfg.thin = s.thin.unwrap_or(cfg.thin);
        cfg.adapt = s.adapt.unwrap_or(cfg.adapt);
        if let Some(steps) = &s.steps {
            if steps.len() != cfg.step_sizes.as_slice().len() {
                return Err(CliError::Config(format!(
                    "expected {} step sizes, got {}",
                    cfg.step_sizes.as_slice().len(),
                    steps.len()
                )));
            }
            cfg.step_sizes.set_from(steps);
        }
    }
    cfg.total_iters = ov.iters.unwrap_or(cfg.total_iters);
    cfg.burn_in = ov.burn.unwrap_or(cfg.burn_in);
    cfg.thin = ov.thin.unwrap_or(cfg.thin);
    Ok(())
}

impl RunConfig {
    /// Merges file and flags. `simulated` selects the simulation run-length
    /// defaults and requires a scenario instead of data files.
    pub fn resolve(file: &FileConfig, ov: &Overrides, simulated: bool) -> CliResult<Self> {
        let seed = ov.seed.or(file.seed).unwrap_or(1);

        let file_scenario = file.scenario.as_ref();
        let scenario_id = ov.scenario.clone().or_else(|| file_scenario.map(|s| s.id.clone()));
        let network = ov.network.clone().or_else(|| file.data.as_ref().map(|d| d.network.clone()));
        let responses = ov.responses.clone().or_else(|| file.data.as_ref().map(|d| d.responses.clone()));
        let mut lambdas = ov.lambda.clone();
        if lambdas.is_empty() {
            lambdas.extend(file_scenario.and_then(|s| s.lambda));
        }

        let source = match (simulated, scenario_id, network, responses) {
            (true, Some(id), None, None) => {
                let scenario: Scenario = id.parse()?;
                let lambda = match scenario {
                    Scenario::S3 => Some(*lambdas.first().unwrap_or(&1.0)),
                    _ => None,
                };
                Source::Scenario(ScenarioSpec::new(scenario, lambda, seed)?)
            }
            (false, None, Some(network), Some(responses)) => Source::Files { network, responses },
            (_, Some(_), Some(_), _) | (_, Some(_), _, Some(_)) => {
                return Err(CliError::Config("give either data files or a scenario, not both".into()))
            }
            (true, _, _, _) => return Err(CliError::Config("this command needs a scenario".into())),
            (false, Some(_), None, None) => {
                return Err(CliError::Config("this command reads data files; use simulate or replicate for scenarios".into()))
            }
            (false, _, _, _) => {
                return Err(CliError::Config("both a network file and a response file are required".into()))
            }
        };
        if lambdas.is_empty() {
            lambdas = SCENARIO3_LAMBDAS.to_vec();
        }
        for &l in &lambdas {
            ScenarioSpec::new(Scenario::S3, Some(l), seed)?;
        }

        let chains = ov.chains.or(file.chains).unwrap_or(1);
        let mut fit = if simulated {
            TwoStepConfig::simulation_default(seed, chains)
        } else {
            TwoStepConfig::real_data_default(seed, chains)
        };
        apply_chain(&mut fit.step1, file.step1.as_ref(), ov)?;
        apply_chain(&mut fit.step2, file.step2.as_ref(), ov)?;
        if let Some(h) = &file.hyper {
            let hp = &mut fit.hyper;
            hp.sigma_alpha = h.sigma_alpha.unwrap_or(hp.sigma_alpha);
            hp.sigma_beta = h.sigma_beta.unwrap_or(hp.sigma_beta);
            hp.sigma_gamma = h.sigma_gamma.unwrap_or(hp.sigma_gamma);
            hp.sigma_delta = h.sigma_delta.unwrap_or(hp.sigma_delta);
            hp.a_sigma = h.a_sigma.unwrap_or(hp.a_sigma);
            hp.b_sigma = h.b_sigma.unwrap_or(hp.b_sigma);
        }
        if let Some(b) = &file.baseline {
            fit.baseline = b.enabled.unwrap_or(true);
            fit.row_normalize = b.row_normalize.unwrap_or(false);
        }
        fit.row_normalize |= ov.row_normalize;
        if let Some(d) = &file.diagnostics {
            fit.hpd_mass = d.hpd_mass.unwrap_or(fit.hpd_mass);
            if d.split_rhat == Some(true) {
                fit.rhat_mode = RhatMode::Split;
            }
        }
        fit.validate()?;

        let replicates = ov.replicates.or(file.replicates).unwrap_or(1);
        if replicates == 0 {
            return Err(CliError::Config("replicates must be at least 1".into()));
        }
        Ok(Self {
            source,
            fit,
            seed,
            out: ov.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("out")),
            emit_plots: ov.emit_plots || file.emit_plots.unwrap_or(false),
            replicates,
            lambdas,
        })
    }
}
