//! Experiment configuration.
//!
//! A configuration is a flat set of `key=value` lines -- trivially
//! diffable, no parser dependencies. Command-line flags override file
//! values. The experiment-defining fields round-trip losslessly through
//! the text format (floats use shortest round-trip formatting); the
//! runtime-only fields `threads` and `output` are deliberately excluded
//! from serialization so that result files stay byte-identical across
//! thread counts and output locations.

use roughdrift::{Error, Result};

/// Environment variable consulted for the default seed.
pub const SEED_ENV_VAR: &str = "ROUGHDRIFT_SEED";

const DEFAULT_SEED: u64 = 12345;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// One of `rate-euler`, `rate-milstein`, `coupling-gap`,
    /// `spectral-identity`, `transform-check`, `regularity`.
    pub command: String,
    /// Hölder exponent of the drift family.
    pub alpha: Option<f64>,
    /// Log-weight exponent; selects the Sobolev-type family when present.
    pub beta: Option<f64>,
    /// Moment order of the error norm.
    pub p: f64,
    /// Scheme resolutions / grid parameters for the sweeps.
    pub n_list: Vec<usize>,
    /// Monte-Carlo replications.
    pub reps: usize,
    /// Master grid refinement over the largest n.
    pub master_ratio: usize,
    pub seed: u64,
    pub x0: f64,
    /// Frequencies for the spectral identity grid.
    pub j_list: Vec<i64>,
    /// Interval lengths for the spectral identity grid.
    pub delta_list: Vec<f64>,
    /// Left endpoint of the spectral identity intervals.
    pub t_lo: f64,
    /// Master substeps per interval for the spectral identity quadrature.
    pub substeps: usize,
    /// Transform table nodes.
    pub nodes: usize,
    /// Sample pairs for the Hölder probe.
    pub samples: usize,
    /// Tensor grid size per axis for the Gagliardo probe.
    pub grid_n: usize,
    /// Overrides for the slope acceptance band.
    pub slope_min: Option<f64>,
    pub slope_max: Option<f64>,
    /// Run the pass/fail assertions (exit status reflects them).
    pub assertions: bool,
    /// Additionally dump one sample coupled path pair (coupling-gap only).
    pub dump_paths: bool,
    /// Where to write the CSV artifact; `<command>.csv` when unset.
    /// Runtime-only: not serialized.
    pub output: Option<String>,
    /// Worker thread cap. Runtime-only: not serialized; results do not
    /// depend on it.
    pub threads: Option<usize>,
}

pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV_VAR)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

impl ExperimentConfig {
    /// Per-command defaults.
    pub fn new(command: &str) -> Result<Self> {
        let (n_list, reps, p): (Vec<usize>, usize, f64) = match command {
            "rate-euler" | "rate-milstein" => {
                (vec![16, 32, 64, 128, 256, 512, 1024], 2000, 1.0)
            }
            "coupling-gap" => (vec![16, 32, 64, 128, 256], 4000, 1.0),
            "spectral-identity" => (vec![], 10_000, 1.0),
            "transform-check" | "regularity" => (vec![], 0, 1.0),
            other => return Err(Error::InvalidArgument(format!("unknown command `{other}`"))),
        };
        Ok(ExperimentConfig {
            command: command.to_string(),
            alpha: None,
            beta: None,
            p,
            n_list,
            reps,
            master_ratio: 64,
            seed: default_seed(),
            x0: 0.0,
            j_list: vec![1, 2, 4],
            delta_list: vec![0.05, 0.1],
            t_lo: 0.5,
            substeps: 512,
            nodes: 4096,
            samples: 100_000,
            grid_n: 512,
            slope_min: None,
            slope_max: None,
            assertions: true,
            dump_paths: false,
            output: None,
            threads: None,
        })
    }

    /// Serialize the experiment-defining fields as `key=value` lines.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        push("command", self.command.clone());
        if let Some(a) = self.alpha {
            push("alpha", format!("{a}"));
        }
        if let Some(b) = self.beta {
            push("beta", format!("{b}"));
        }
        push("p", format!("{}", self.p));
        push("n_list", join(&self.n_list));
        push("reps", format!("{}", self.reps));
        push("master_ratio", format!("{}", self.master_ratio));
        push("seed", format!("{}", self.seed));
        push("x0", format!("{}", self.x0));
        push("j_list", join(&self.j_list));
        push("delta_list", join(&self.delta_list));
        push("t_lo", format!("{}", self.t_lo));
        push("substeps", format!("{}", self.substeps));
        push("nodes", format!("{}", self.nodes));
        push("samples", format!("{}", self.samples));
        push("grid_n", format!("{}", self.grid_n));
        if let Some(v) = self.slope_min {
            push("slope_min", format!("{v}"));
        }
        if let Some(v) = self.slope_max {
            push("slope_max", format!("{v}"));
        }
        push("assertions", format!("{}", self.assertions));
        push("dump_paths", format!("{}", self.dump_paths));
        out
    }

    /// Parse `key=value` lines; the `command` key must be present.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut command = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("command=") {
                command = Some(v.trim().to_string());
            }
        }
        let command =
            command.ok_or_else(|| Error::InvalidArgument("config file lacks `command=`".into()))?;
        let mut config = ExperimentConfig::new(&command)?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("malformed config line `{line}`")))?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Apply one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value `{value}` for `{key}`")))
        }
        match key {
            "command" => self.command = value.to_string(),
            "alpha" => self.alpha = Some(parse(key, value)?),
            "beta" => self.beta = Some(parse(key, value)?),
            "p" => self.p = parse(key, value)?,
            "n_list" => self.n_list = split(key, value)?,
            "reps" => self.reps = parse(key, value)?,
            "master_ratio" => self.master_ratio = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "x0" => self.x0 = parse(key, value)?,
            "j_list" => self.j_list = split(key, value)?,
            "delta_list" => self.delta_list = split(key, value)?,
            "t_lo" => self.t_lo = parse(key, value)?,
            "substeps" => self.substeps = parse(key, value)?,
            "nodes" => self.nodes = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "grid_n" => self.grid_n = parse(key, value)?,
            "slope_min" => self.slope_min = Some(parse(key, value)?),
            "slope_max" => self.slope_max = Some(parse(key, value)?),
            "assertions" => self.assertions = parse(key, value)?,
            "dump_paths" => self.dump_paths = parse(key, value)?,
            "output" => self.output = Some(value.to_string()),
            "threads" => self.threads = Some(parse(key, value)?),
            other => {
                return Err(Error::InvalidArgument(format!("unknown config key `{other}`")));
            }
        }
        Ok(())
    }

    /// The drift model selected by `alpha` / `beta`.
    pub fn model(&self) -> Result<roughdrift::DriftModel> {
        let alpha = self.alpha.ok_or_else(|| {
            Error::InvalidArgument(format!("`{}` requires --alpha", self.command))
        })?;
        match self.beta {
            Some(beta) => roughdrift::DriftModel::weierstrass_sobolev(alpha, beta),
            None => roughdrift::DriftModel::weierstrass(alpha),
        }
    }

    /// Slope acceptance band: per-command default unless overridden.
    pub fn slope_band(&self) -> (f64, f64) {
        let default = match (self.command.as_str(), self.beta.is_some()) {
            ("rate-euler", _) => (0.60, 0.90),
            ("rate-milstein", _) => (0.60, 0.95),
            ("coupling-gap", false) => (0.60, 0.90),
            ("coupling-gap", true) => (0.60, 0.95),
            _ => (0.0, f64::INFINITY),
        };
        (self.slope_min.unwrap_or(default.0), self.slope_max.unwrap_or(default.1))
    }

    pub fn output_path(&self) -> String {
        self.output.clone().unwrap_or_else(|| format!("{}.csv", self.command))
    }
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn split<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad list entry `{s}` for `{key}`")))
        })
        .collect()
}
