//! Run configuration: command-line flags layered over an optional TOML file,
//! resolved against library defaults and validated before any work starts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use graphfuse::io::Format;
use graphfuse::simulate::make_latent;
use graphfuse::{
    ExperimentSpec, InvariantConfig, KappaParams, PipelineConfig, SubsetMode, WeightKind,
    WeightScheme, WindowParams,
};
use serde::{Deserialize, Serialize};

const DEFAULT_Q: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Equal,
    Adaptive,
    Both,
}

impl SchemeArg {
    fn kinds(self) -> Vec<WeightKind> {
        match self {
            SchemeArg::Equal => vec![WeightKind::Equal],
            SchemeArg::Adaptive => vec![WeightKind::Adaptive],
            SchemeArg::Both => vec![WeightKind::Equal, WeightKind::Adaptive],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Every tunable of a run. Each field is optional so that flags, the config
/// file and defaults can be layered.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunArgs {
    /// Number of vertices (simulation).
    #[arg(long)]
    pub n: Option<usize>,
    /// Kidney edge probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Egg size; the egg is vertices 0..m.
    #[arg(long)]
    pub m: Option<usize>,
    /// Egg edge probability (defaults to max(0.3, p)).
    #[arg(long)]
    pub q: Option<f64>,
    /// Comma-separated egg probabilities for power curves.
    #[arg(long = "q-grid", value_delimiter = ',')]
    pub q_grid: Option<Vec<f64>>,
    /// Change-point time (1-based).
    #[arg(long = "t-star")]
    pub t_star: Option<usize>,
    /// Number of simulated time steps.
    #[arg(long = "t-max")]
    pub t_max: Option<usize>,
    /// Length of the standardization window.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Significance level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Monte Carlo replicates.
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub reps: Option<usize>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Comma-separated 1-based feature ids to fuse (default: all nine).
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<usize>>,
    /// Master seed for all random streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Magnitude assigned when a window has zero spread.
    #[arg(long = "sigma-cap")]
    pub sigma_cap: Option<f64>,
    /// Standardize localized statistics per vertex before taking the max
    /// (default: on for observed data, off for simulations).
    #[arg(long = "vertex-standardize", num_args = 0..=1, default_missing_value = "true")]
    pub vertex_standardize: Option<bool>,
    /// Clustering as closed / open triplets instead of transitivity.
    #[arg(long = "cc-literal", num_args = 0..=1, default_missing_value = "true")]
    pub cc_literal: Option<bool>,
    /// Search all subsets of this size and report the best (power).
    #[arg(long = "d-prime")]
    pub d_prime: Option<usize>,
    /// Also report every single feature under both weightings (power).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub individual: Option<bool>,
    /// Edge-list input.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (default: from the --out extension, else csv).
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// File with one vertex label per line, pinning vertex order.
    #[arg(long = "label-map")]
    pub label_map: Option<PathBuf>,
}

macro_rules! layer {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        RunArgs { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl RunArgs {
    /// Fields set in `self` win over `fallback`.
    pub fn over(self, fallback: RunArgs) -> RunArgs {
        layer!(
            self, fallback, n, p, m, q, q_grid, t_star, t_max, ell, alpha, reps, scheme, subset,
            seed, sigma_cap, vertex_standardize, cc_literal, d_prime, individual, input, out,
            format, label_map
        )
    }

    pub fn from_file(path: &Path) -> Result<RunArgs, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Features,
    Detect,
    Power,
    Table2,
}

impl Mode {
    fn observed_data(self) -> bool {
        matches!(self, Mode::Features | Mode::Detect | Mode::Table2)
    }
}

/// A rejected configuration; reported as a usage error.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<graphfuse::Error> for ConfigError {
    fn from(e: graphfuse::Error) -> Self {
        ConfigError(e.to_string())
    }
}

/// Fully resolved and validated settings for one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub kappa: KappaParams,
    pub q_grid: Vec<f64>,
    pub pipeline: PipelineConfig,
    pub alpha: f64,
    #[serde(rename = "M")]
    pub reps: usize,
    pub schemes: Vec<WeightScheme>,
    pub d_prime: Option<usize>,
    pub individual: bool,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub label_map: Option<PathBuf>,
    /// Set only when given explicitly; observed-data modes need it for table2.
    pub t_star_given: bool,
}

impl RunConfig {
    pub fn resolve(mode: Mode, a: RunArgs) -> Result<RunConfig, ConfigError> {
        let base = KappaParams::default();
        let p = a.p.unwrap_or(base.p);
        let kappa = KappaParams {
            n: a.n.unwrap_or(base.n),
            p,
            m: a.m.unwrap_or(base.m),
            q: a.q.unwrap_or(DEFAULT_Q.max(p)),
            t_star: a.t_star.unwrap_or(base.t_star),
            t_max: a.t_max.unwrap_or(base.t_max),
        };
        let q_grid = match (&a.q_grid, a.q) {
            (Some(g), _) => g.clone(),
            (None, Some(q)) => vec![q],
            (None, None) => ExperimentSpec::default().q_grid,
        };
        let window = WindowParams {
            ell: a.ell.unwrap_or(WindowParams::default().ell),
            sigma_cap: a.sigma_cap.unwrap_or(WindowParams::default().sigma_cap),
        };
        let pipeline = PipelineConfig {
            window,
            invariants: InvariantConfig {
                cc_literal: a.cc_literal.unwrap_or(false),
                ..InvariantConfig::default()
            },
            vertex_standardize: a.vertex_standardize.unwrap_or(mode.observed_data()),
        };
        let subset = a.subset.clone().unwrap_or_else(|| (1..=9).collect());
        let schemes = a
            .scheme
            .unwrap_or(SchemeArg::Both)
            .kinds()
            .into_iter()
            .map(|kind| WeightScheme { kind, subset: subset.clone() })
            .collect();
        let format = a
            .format
            .map(Format::from)
            .or_else(|| a.out.as_deref().map(Format::from_path))
            .unwrap_or(Format::Csv);
        let cfg = RunConfig {
            mode,
            kappa,
            q_grid,
            pipeline,
            alpha: a.alpha.unwrap_or(0.05),
            reps: a.reps.unwrap_or(ExperimentSpec::default().reps),
            schemes,
            d_prime: a.d_prime,
            individual: a.individual.unwrap_or(false),
            seed: a.seed.unwrap_or(0),
            input: a.input,
            out: a.out,
            format,
            label_map: a.label_map,
            t_star_given: a.t_star.is_some(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn experiment(&self) -> ExperimentSpec {
        ExperimentSpec {
            kappa: self.kappa,
            q_grid: self.q_grid.clone(),
            reps: self.reps,
            alpha: self.alpha,
            pipeline: self.pipeline,
            schemes: self.schemes.clone(),
            subset_mode: self.d_prime.map_or(SubsetMode::Fixed, SubsetMode::BestOf),
            individual: self.individual,
            seed: self.seed,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.pipeline.window.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        for s in &self.schemes {
            s.validate(9)?;
        }
        match self.mode {
            Mode::Simulate => {
                self.kappa.validate()?;
                make_latent(self.kappa.p, self.kappa.q)?;
            }
            Mode::Power => {
                let spec = self.experiment();
                spec.validate()?;
                for &q in &spec.q_grid {
                    make_latent(self.kappa.p, q)?;
                }
            }
            Mode::Features | Mode::Detect | Mode::Table2 => {
                if self.input.is_none() {
                    return Err(ConfigError("--input is required".into()));
                }
                if self.mode == Mode::Table2 && !self.t_star_given {
                    return Err(ConfigError("table2 requires --t-star".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let flags = RunArgs { n: Some(10), ..Default::default() };
        let file: RunArgs = toml::from_str("n = 20\np = 0.1\nM = 500\nsubset = [1, 2]").unwrap();
        let merged = flags.over(file);
        assert_eq!(merged.n, Some(10));
        assert_eq!(merged.p, Some(0.1));
        assert_eq!(merged.reps, Some(500));
        assert_eq!(merged.subset, Some(vec![1, 2]));
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        assert!(toml::from_str::<RunArgs>("bogus = 1").is_err());
    }

    #[test]
    fn defaults_depend_on_mode() {
        let sim = RunConfig::resolve(Mode::Simulate, RunArgs::default()).unwrap();
        assert!(!sim.pipeline.vertex_standardize);
        assert_eq!(sim.schemes.len(), 2);
        let det = RunConfig::resolve(
            Mode::Detect,
            RunArgs { input: Some("x.tsv".into()), ..Default::default() },
        )
        .unwrap();
        assert!(det.pipeline.vertex_standardize);
    }

    #[test]
    fn q_defaults_to_at_least_p() {
        let cfg = RunConfig::resolve(
            Mode::Simulate,
            RunArgs { p: Some(1.0), ..Default::default() },
        )
        .unwrap();
        assert_eq!(cfg.kappa.q, 1.0);
    }

    #[test]
    fn invalid_values_are_rejected_up_front() {
        let bad = |a: RunArgs, mode| RunConfig::resolve(mode, a).is_err();
        assert!(bad(RunArgs { alpha: Some(1.5), ..Default::default() }, Mode::Power));
        assert!(bad(RunArgs { subset: Some(vec![0]), ..Default::default() }, Mode::Power));
        assert!(bad(RunArgs { reps: Some(10), ..Default::default() }, Mode::Power));
        assert!(bad(RunArgs::default(), Mode::Detect));
        assert!(bad(
            RunArgs { input: Some("x".into()), ..Default::default() },
            Mode::Table2
        ));
        assert!(bad(RunArgs { ell: Some(1), ..Default::default() }, Mode::Simulate));
    }
}
