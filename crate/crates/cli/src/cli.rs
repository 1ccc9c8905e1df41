use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Axis, Command, ConfigError, Format, GridOverrides, OptionOverrides, OutputSpec, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "pascu", version, about = "Sharp order and Pascu-class certification for integral transforms")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, env = "PASCU_FORMAT", value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true, env = "PASCU_OUTPUT")]
    pub output: Option<PathBuf>,
    /// Also save the resolved configuration as TOML.
    #[arg(long, global = true, value_name = "PATH")]
    pub save_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Sharp β by the quadrature and series routes.
    Beta(ProblemArgs),
    /// Full certification report.
    Certify(CertifyArgs),
    /// Theorem hypotheses and sufficient-condition margins.
    Check(CheckArgs),
    /// Certification over `{a,b}` lists and `[lo:hi:n]` ranges.
    Sweep(CertifyArgs),
    /// Kernel moments τ₀..τₙ.
    Moments(MomentsArgs),
    /// Run a TOML configuration file.
    Run { config: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Kernel, e.g. "komatu c=0 delta=3".
    #[arg(long, env = "PASCU_KERNEL")]
    pub kernel: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: String,
    #[arg(long, allow_hyphen_values = true)]
    pub xi: String,
}

#[derive(Debug, Clone, Args)]
pub struct TuningArgs {
    /// Disk radii, comma separated.
    #[arg(long, env = "PASCU_RADII", value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, env = "PASCU_ANGLES")]
    pub angles: Option<usize>,
    #[arg(long, env = "PASCU_EPSILONS")]
    pub epsilons: Option<usize>,
    /// Initial series order.
    #[arg(long, env = "PASCU_ORDER")]
    pub order: Option<usize>,
    #[arg(long, env = "PASCU_MAX_ORDER")]
    pub max_order: Option<usize>,
    #[arg(long, env = "PASCU_TOLERANCE")]
    pub tolerance: Option<f64>,
    #[arg(long, env = "PASCU_MEMBERSHIP_TOLERANCE")]
    pub membership_tolerance: Option<f64>,
    #[arg(long, env = "PASCU_SHARPNESS_TOLERANCE")]
    pub sharpness_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Write plot-ready CSV here.
    #[arg(long, value_name = "PATH")]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Theorem whose hypotheses are checked; defaults to the kernel's own.
    #[arg(long)]
    pub theorem: Option<String>,
    #[arg(long, env = "PASCU_TOLERANCE")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[arg(long, env = "PASCU_KERNEL")]
    pub kernel: String,
    /// Highest index n.
    #[arg(long, env = "PASCU_MOMENTS")]
    pub count: Option<usize>,
}

fn base(command: Command, p: &ProblemArgs) -> RunConfig {
    let axis = |s: &Option<String>| s.as_deref().map(Axis::parse);
    RunConfig {
        command,
        kernel: p.kernel.clone(),
        alpha: axis(&p.alpha),
        gamma: axis(&p.gamma),
        mu: axis(&p.mu),
        nu: axis(&p.nu),
        sigma: Some(Axis::parse(&p.sigma)),
        xi: Some(Axis::parse(&p.xi)),
        theorem: None,
        count: None,
        grid: GridOverrides::default(),
        options: OptionOverrides::default(),
        output: OutputSpec::default(),
    }
}

fn with_tuning(mut cfg: RunConfig, t: &TuningArgs, plot: &Option<PathBuf>) -> RunConfig {
    cfg.grid = GridOverrides { radii: t.radii.clone(), angles: t.angles, epsilon_count: t.epsilons };
    cfg.options = OptionOverrides {
        order: t.order,
        max_order: t.max_order,
        tolerance: t.tolerance,
        membership_tolerance: t.membership_tolerance,
        sharpness_tolerance: t.sharpness_tolerance,
    };
    cfg.output.plot = plot.clone();
    cfg
}

impl Cli {
    /// The configuration the invocation describes. `run` reads the file and
    /// lets `--format`/`--output` override it.
    pub fn to_config(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.command {
            Sub::Beta(p) => base(Command::Beta, p),
            Sub::Certify(a) => with_tuning(base(Command::Certify, &a.problem), &a.tuning, &a.plot_data),
            Sub::Sweep(a) => with_tuning(base(Command::Sweep, &a.problem), &a.tuning, &a.plot_data),
            Sub::Check(a) => {
                let mut cfg = base(Command::Check, &a.problem);
                cfg.theorem = a.theorem.clone();
                cfg.options.tolerance = a.tolerance;
                cfg
            }
            Sub::Moments(a) => RunConfig {
                command: Command::Moments,
                kernel: a.kernel.clone(),
                alpha: None,
                gamma: None,
                mu: None,
                nu: None,
                sigma: None,
                xi: None,
                theorem: None,
                count: a.count,
                grid: GridOverrides::default(),
                options: OptionOverrides::default(),
                output: OutputSpec::default(),
            },
            Sub::Run { config } => {
                let text = std::fs::read_to_string(config)
                    .map_err(|e| ConfigError::new("", format!("reading {}: {e}", config.display())))?;
                RunConfig::from_toml(&text)
                    .map_err(|e| ConfigError::new(e.field, format!("{}: {}", config.display(), e.message)))?
            }
        };
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        if let Some(p) = &self.output {
            cfg.output.path = Some(p.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
