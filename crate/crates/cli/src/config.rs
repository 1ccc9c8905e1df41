use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use pascu_core::{CertifyOptions, DiskGrid, KernelSpec, ParameterSet, TheoremId};
use serde::{Deserialize, Serialize};

use crate::sweep::{expand, expand_numbers, is_sweep};

/// A usage or configuration problem, reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "field `{}`: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Beta,
    Certify,
    Check,
    Sweep,
    Moments,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Text,
}

/// A scalar parameter or, for `sweep`, a list/range of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Value(f64),
    Spec(String),
}

impl Axis {
    pub fn parse(text: &str) -> Axis {
        match text.trim().parse::<f64>() {
            Ok(v) => Axis::Value(v),
            Err(_) => Axis::Spec(text.trim().to_string()),
        }
    }

    fn values(&self, field: &str, allow_sweep: bool) -> Result<Vec<f64>, ConfigError> {
        match self {
            Axis::Value(v) => Ok(vec![*v]),
            Axis::Spec(s) if !allow_sweep && is_sweep(s) => {
                Err(ConfigError::new(field, "sweep syntax is only accepted by the `sweep` command"))
            }
            Axis::Spec(s) => expand_numbers(s).map_err(|m| ConfigError::new(field, m)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_count: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharpness_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// CSV file for plot data (`certify` and `sweep`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Kernel in text form, e.g. `komatu c=0 delta=3`.
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Axis>,
    /// Theorem for `check`; defaults to the kernel family's theorem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<String>,
    /// Highest moment index for `moments`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub grid: GridOverrides,
    #[serde(default)]
    pub options: OptionOverrides,
    #[serde(default)]
    pub output: OutputSpec,
}

/// One fully resolved problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub kernel: KernelSpec,
    pub params: ParameterSet,
}

pub const DEFAULT_MOMENT_COUNT: usize = 20;

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string().trim_end()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::new("", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.command == Command::Moments {
            return self.kernels().map(|_| ());
        }
        let ag = self.alpha.is_some() || self.gamma.is_some();
        let mn = self.mu.is_some() || self.nu.is_some();
        let pair = "alpha/gamma, mu/nu";
        if ag && mn {
            return Err(ConfigError::new(pair, "supply either (alpha, gamma) or (mu, nu), not both"));
        }
        if !(ag || mn) {
            return Err(ConfigError::new(pair, "supply exactly one pair: (alpha, gamma) or (mu, nu)"));
        }
        if ag && !(self.alpha.is_some() && self.gamma.is_some()) {
            return Err(ConfigError::new(pair, "alpha and gamma must be given together"));
        }
        if mn && !(self.mu.is_some() && self.nu.is_some()) {
            return Err(ConfigError::new(pair, "mu and nu must be given together"));
        }
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if x.is_nan() || x <= 0.0 => {
                Err(ConfigError::new(format!("options.{name}"), format!("must be positive (got {x})")))
            }
            _ => Ok(()),
        };
        positive("tolerance", self.options.tolerance)?;
        positive("membership_tolerance", self.options.membership_tolerance)?;
        positive("sharpness_tolerance", self.options.sharpness_tolerance)?;
        if self.options.order == Some(0) {
            return Err(ConfigError::new("options.order", "must be positive"));
        }
        if let (Some(o), Some(m)) = (self.options.order, self.options.max_order) {
            if m < o {
                return Err(ConfigError::new("options.max_order", format!("must be at least order ({o})")));
            }
        }
        self.grid()
            .validate()
            .map_err(|e| ConfigError::new("grid", e.to_string().trim_start_matches("invalid grid: ").to_string()))?;
        if let Some(t) = &self.theorem {
            t.parse::<TheoremId>().map_err(|e| ConfigError::new("theorem", e.to_string()))?;
        }
        if self.plot_requested() && !matches!(self.command, Command::Certify | Command::Sweep) {
            return Err(ConfigError::new("output.plot", "plot data is produced by `certify` and `sweep` only"));
        }
        self.points().map(|_| ())
    }

    fn plot_requested(&self) -> bool {
        self.output.plot.is_some()
    }

    pub fn grid(&self) -> DiskGrid {
        let d = DiskGrid::default();
        DiskGrid {
            radii: self.grid.radii.clone().unwrap_or(d.radii),
            angles: self.grid.angles.unwrap_or(d.angles),
            epsilon_count: self.grid.epsilon_count.unwrap_or(d.epsilon_count),
        }
    }

    pub fn certify_options(&self) -> CertifyOptions {
        let d = CertifyOptions::default();
        let order = self.options.order.unwrap_or(d.order);
        CertifyOptions {
            order,
            max_order: self.options.max_order.unwrap_or(d.max_order).max(order),
            grid: self.grid(),
            tolerance: self.options.tolerance.unwrap_or(d.tolerance),
            membership_tolerance: self.options.membership_tolerance.unwrap_or(d.membership_tolerance),
            sharpness_tolerance: self.options.sharpness_tolerance.unwrap_or(d.sharpness_tolerance),
            plot_data: self.plot_requested(),
        }
    }

    pub fn theorem_for(&self, kernel: &KernelSpec) -> TheoremId {
        match &self.theorem {
            Some(t) => t.parse().expect("validated"),
            None => TheoremId::for_family(kernel.family()),
        }
    }

    pub fn moment_count(&self) -> usize {
        self.count.unwrap_or(DEFAULT_MOMENT_COUNT)
    }

    pub fn kernels(&self) -> Result<Vec<KernelSpec>, ConfigError> {
        if self.command != Command::Sweep && is_sweep(&self.kernel) {
            return Err(ConfigError::new("kernel", "sweep syntax is only accepted by the `sweep` command"));
        }
        expand(&self.kernel)
            .map_err(|m| ConfigError::new("kernel", m))?
            .into_iter()
            .map(|s| s.parse::<KernelSpec>().map_err(|e| ConfigError::new("kernel", e.to_string())))
            .collect()
    }

    /// Every problem described by the config, in sweep order.
    pub fn points(&self) -> Result<Vec<Point>, ConfigError> {
        let sweep = self.command == Command::Sweep;
        let kernels = self.kernels()?;
        let by_alpha = self.alpha.is_some();
        let (first, second) = if by_alpha {
            (("alpha", self.alpha.as_ref()), ("gamma", self.gamma.as_ref()))
        } else {
            (("mu", self.mu.as_ref()), ("nu", self.nu.as_ref()))
        };
        let axis = |name: &str, a: Option<&Axis>| {
            a.ok_or_else(|| ConfigError::new(name, "missing")).and_then(|a| a.values(name, sweep))
        };
        let xs = axis(first.0, first.1)?;
        let ys = axis(second.0, second.1)?;
        let sigmas = axis("sigma", self.sigma.as_ref())?;
        let xis = axis("xi", self.xi.as_ref())?;

        let mut out = Vec::new();
        for kernel in &kernels {
            for &x in &xs {
                for &y in &ys {
                    for &sigma in &sigmas {
                        for &xi in &xis {
                            let params = if by_alpha {
                                ParameterSet::from_alpha_gamma(x, y, sigma, xi)
                            } else {
                                ParameterSet::from_mu_nu(x, y, sigma, xi)
                            }
                            .map_err(|e| {
                                ConfigError::new(
                                    format!("{}/{}/sigma/xi", first.0, second.0),
                                    format!("{e} at ({x}, {y}, {sigma}, {xi})"),
                                )
                            })?;
                            out.push(Point { kernel: kernel.clone(), params });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunConfig {
        RunConfig {
            command: Command::Sweep,
            kernel: "komatu c=0 delta={2,3,4}".into(),
            alpha: None,
            gamma: None,
            mu: Some(Axis::Value(1.0)),
            nu: Some(Axis::Spec("[2:4:3]".into())),
            sigma: Some(Axis::Value(0.1)),
            xi: Some(Axis::Value(1.0)),
            theorem: None,
            count: None,
            grid: GridOverrides { radii: Some(vec![0.5, 0.9]), angles: Some(32), epsilon_count: None },
            options: OptionOverrides { order: Some(256), tolerance: Some(1e-6), ..Default::default() },
            output: OutputSpec { path: Some("out.csv".into()), format: Format::Csv, plot: None },
        }
    }

    #[test]
    fn toml_round_trip() {
        let cfg = sample();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(cfg.points().unwrap().len(), 9);
    }

    #[test]
    fn integers_read_as_numbers() {
        let cfg = RunConfig::from_toml(
            "command = \"beta\"\nkernel = \"bernardi c=1\"\nalpha = 3\ngamma = 1\nsigma = 0\nxi = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.alpha, Some(Axis::Value(3.0)));
        let p = &cfg.points().unwrap()[0].params;
        assert!((p.mu - 1.0).abs() < 1e-12 && (p.nu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_rules() {
        let mut cfg = sample();
        cfg.alpha = Some(Axis::Value(3.0));
        assert_eq!(cfg.validate().unwrap_err().field, "alpha/gamma, mu/nu");
        cfg.mu = None;
        cfg.nu = None;
        assert!(cfg.validate().is_err());
        cfg.gamma = Some(Axis::Value(1.0));
        cfg.validate().unwrap();
    }

    #[test]
    fn field_errors_are_named() {
        let mut cfg = sample();
        cfg.options.tolerance = Some(0.0);
        assert_eq!(cfg.validate().unwrap_err().field, "options.tolerance");
        let mut cfg = sample();
        cfg.command = Command::Certify;
        assert_eq!(cfg.validate().unwrap_err().field, "kernel");
        let mut cfg = sample();
        cfg.grid.angles = Some(0);
        assert_eq!(cfg.validate().unwrap_err().field, "grid");
        let mut cfg = sample();
        cfg.xi = None;
        assert_eq!(cfg.validate().unwrap_err().field, "xi");
        let cfg = RunConfig::from_toml("command = \"moments\"\nkernel = \"bernardi c=1\"\ncount = 4\n").unwrap();
        assert_eq!(cfg.kernels().unwrap().len(), 1);
        let err = RunConfig::from_toml("command = \"beta\"\nkernel = \"bernardi c=1\"\nsigmaa = 0\n").unwrap_err();
        assert!(err.message.contains("line 3"), "{err}");
    }
}
