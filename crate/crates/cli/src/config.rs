//! Scenario configuration: a flat key-value text format with dotted
//! section prefixes (`state.sigma = 1.0`, `kernel.gamma = 0.5`, ...).
//! Unknown and duplicate keys are rejected.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rhoj_core::kernel::KernelSpec;
use rhoj_core::state::{Constants, StateSpec};

use crate::CliError;

/// Sampling block of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub n_trials: usize,
    pub seed: u64,
    pub n_bins: usize,
}

/// Observed out-reading estimators for calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedConfig {
    pub std_x: f64,
    pub std_p: Option<f64>,
}

/// A fully validated scenario configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub state: StateSpec,
    pub constants: Constants,
    pub gamma: KernelSpec,
    pub lambda: KernelSpec,
    pub grid_n: usize,
    pub span_factor: f64,
    pub sampling: Option<SamplingConfig>,
    pub sweep_gammas: Vec<f64>,
    pub sweep_lambdas: Vec<f64>,
    pub observed: Option<ObservedConfig>,
    pub out_dir: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "state.x0",
    "state.sigma",
    "state.k",
    "state.omega",
    "constants.hbar",
    "constants.mass",
    "kernel.gamma",
    "kernel.lambda",
    "grid.n",
    "grid.span_factor",
    "sampling.n_trials",
    "sampling.seed",
    "sampling.n_bins",
    "sweep.gammas",
    "sweep.lambdas",
    "observed.std_x",
    "observed.std_p",
    "output.dir",
];

fn bad(key: &str, value: &str, what: &str) -> CliError {
    CliError::Config(format!("key '{key}': cannot parse '{value}' as {what}"))
}

struct RawConfig(BTreeMap<String, String>);

impl RawConfig {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("unknown key '{key}'")));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(CliError::Config(format!("duplicate key '{key}'")));
            }
        }
        Ok(Self(map))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.0
            .get(key)
            .map(|v| v.parse::<f64>().map_err(|_| bad(key, v, "a number")))
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.0
            .get(key)
            .map(|v| v.parse::<usize>().map_err(|_| bad(key, v, "a non-negative integer")))
            .transpose()
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.0
            .get(key)
            .map(|v| v.parse::<u64>().map_err(|_| bad(key, v, "a non-negative integer")))
            .transpose()
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.0
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim()
                            .parse::<f64>()
                            .map_err(|_| bad(key, v, "a comma-separated list of numbers"))
                    })
                    .collect::<Result<Vec<f64>, CliError>>()
            })
            .transpose()
    }

    fn string(&self, key: &str) -> Option<String> {
        self.0.get(key).cloned()
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let raw = RawConfig::parse(text)?;

    let state = if raw.has("state.omega") {
        for key in ["state.sigma", "state.k", "state.x0"] {
            if raw.has(key) {
                return Err(CliError::Config(format!(
                    "'state.omega' excludes '{key}': an oscillator state has fixed packet parameters"
                )));
            }
        }
        StateSpec::OscillatorGround {
            omega: raw.f64("state.omega")?.unwrap(),
        }
    } else {
        let Some(sigma) = raw.f64("state.sigma")? else {
            return Err(CliError::Config(
                "missing 'state.sigma' (or 'state.omega' for an oscillator)".into(),
            ));
        };
        StateSpec::GaussianPacket {
            x0: raw.f64("state.x0")?.unwrap_or(0.0),
            sigma,
            k: raw.f64("state.k")?.unwrap_or(0.0),
        }
    };
    state.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let constants = Constants::new(
        raw.f64("constants.hbar")?.unwrap_or(1.0),
        raw.f64("constants.mass")?.unwrap_or(1.0),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;

    let width_spec = |key: &str, width: f64| -> Result<KernelSpec, CliError> {
        KernelSpec::from_width(width)
            .map_err(|e| CliError::Config(format!("key '{key}': {e}")))
    };
    let gamma = width_spec("kernel.gamma", raw.f64("kernel.gamma")?.unwrap_or(0.0))?;
    let lambda = width_spec("kernel.lambda", raw.f64("kernel.lambda")?.unwrap_or(0.0))?;

    let grid_n = raw.usize("grid.n")?.unwrap_or(4096);
    let span_factor = raw.f64("grid.span_factor")?.unwrap_or(10.0);

    let sampling = match (
        raw.usize("sampling.n_trials")?,
        raw.u64("sampling.seed")?,
        raw.usize("sampling.n_bins")?,
    ) {
        (None, None, None) => None,
        (n_trials, seed, n_bins) => {
            let Some(n_trials) = n_trials else {
                return Err(CliError::Config(
                    "sampling block needs 'sampling.n_trials'".into(),
                ));
            };
            Some(SamplingConfig {
                n_trials,
                seed: seed.unwrap_or(0),
                n_bins: n_bins.unwrap_or(64),
            })
        }
    };

    let default_sweep = vec![0.0, 0.25, 0.5];
    let sweep_gammas = raw.f64_list("sweep.gammas")?.unwrap_or_else(|| default_sweep.clone());
    let sweep_lambdas = raw.f64_list("sweep.lambdas")?.unwrap_or(default_sweep);
    for (key, widths) in [("sweep.gammas", &sweep_gammas), ("sweep.lambdas", &sweep_lambdas)] {
        if widths.is_empty() || widths.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(CliError::Config(format!(
                "key '{key}': widths must be non-negative and finite"
            )));
        }
    }

    let observed = match (raw.f64("observed.std_x")?, raw.f64("observed.std_p")?) {
        (None, None) => None,
        (None, Some(_)) => {
            return Err(CliError::Config(
                "'observed.std_p' needs 'observed.std_x' as well".into(),
            ));
        }
        (Some(std_x), std_p) => Some(ObservedConfig { std_x, std_p }),
    };

    let out_dir = raw.string("output.dir").map(PathBuf::from);

    Ok(Config {
        state,
        constants,
        gamma,
        lambda,
        grid_n,
        span_factor,
        sampling,
        sweep_gammas,
        sweep_lambdas,
        observed,
        out_dir,
    })
}
