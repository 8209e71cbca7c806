//! Run configuration: a flat key set accepted both from a TOML file
//! (`--config`) and from per-key command-line flags, with flags taking
//! precedence. Unknown file keys are rejected, and the fully resolved
//! configuration is echoed into every report for reproducibility.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mptv_core::{AdmmConfig, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Which solver a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Matching-pursuit TV: incremental gradient-support activation.
    Mptv,
    /// Classical TV-regularized ADMM over the full gradient field.
    TvAdmm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Mptv => "mptv",
            Method::TvAdmm => "tv-admm",
        })
    }
}

/// An explicit on/off switch (used for `refine` so file and flag spellings
/// match).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    pub fn as_bool(self) -> bool {
        matches!(self, Toggle::On)
    }
}

impl fmt::Display for Toggle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Toggle::On => "on",
            Toggle::Off => "off",
        })
    }
}

/// Keys accepted in a `--config` TOML file. Every key is optional; unknown
/// keys are an error.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub method: Option<Method>,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub r: Option<f64>,
    pub zeta: Option<f64>,
    pub kappa: Option<usize>,
    pub eps: Option<f64>,
    pub eps_in: Option<f64>,
    pub max_outer: Option<usize>,
    pub max_inner: Option<usize>,
    pub refine: Option<Toggle>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub kernel: Option<String>,
    pub output: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
}

/// Per-key flags shared by all subcommands. Each flag overrides the same key
/// from the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML configuration file; explicit flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Solver to run
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// TV regularization weight (> 0)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// ADMM penalty parameter (> 0)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Ridge weight of the dual recovery (> 0)
    #[arg(long)]
    pub r: Option<f64>,
    /// Activation-count threshold fraction in (0, 1]
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Fixed per-iteration activation count (default: derived from zeta)
    #[arg(long)]
    pub kappa: Option<usize>,
    /// Outer relative-objective stopping tolerance
    #[arg(long)]
    pub eps: Option<f64>,
    /// Inner (ADMM) relative-fit stopping tolerance
    #[arg(long, value_name = "EPS_IN")]
    pub eps_in: Option<f64>,
    /// Cap on outer iterations
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Cap on inner ADMM iterations per subproblem
    #[arg(long)]
    pub max_inner: Option<usize>,
    /// Morphological support refinement after each activation
    #[arg(long, value_enum)]
    pub refine: Option<Toggle>,
    /// Seed for all randomized generation
    #[arg(long)]
    pub seed: Option<u64>,
}

/// The fully resolved configuration of one run (defaults, then file, then
/// flags).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub lambda: f64,
    pub rho: f64,
    pub r: f64,
    pub zeta: f64,
    pub kappa: Option<usize>,
    pub eps: f64,
    pub eps_in: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub refine: Toggle,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub kernel: Option<String>,
    pub output: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            method: Method::Mptv,
            lambda: solver.lambda,
            rho: solver.rho,
            r: solver.r,
            zeta: solver.zeta,
            kappa: None,
            eps: solver.eps_outer,
            eps_in: solver.inner.eps_in,
            max_outer: solver.max_outer,
            max_inner: solver.inner.max_iters,
            refine: Toggle::Off,
            seed: 0,
            input: None,
            kernel: None,
            output: None,
            diagnostics: None,
        }
    }
}

impl RunConfig {
    /// Resolves `--config` plus flags into a concrete configuration.
    pub fn resolve(args: &ConfigArgs) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::input(format!("cannot read config {}: {e}", path.display()))
            })?;
            let file: FileConfig = toml::from_str(&text).map_err(|e| {
                CliError::input(format!("invalid config {}: {e}", path.display()))
            })?;
            cfg.apply_file(file);
        }
        cfg.apply_flags(args);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, file: FileConfig) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = file.$field {
                    self.$field = v;
                }
            };
        }
        take!(method);
        take!(lambda);
        take!(rho);
        take!(r);
        take!(zeta);
        take!(eps);
        take!(eps_in);
        take!(max_outer);
        take!(max_inner);
        take!(refine);
        take!(seed);
        if file.kappa.is_some() {
            self.kappa = file.kappa;
        }
        if file.input.is_some() {
            self.input = file.input;
        }
        if file.kernel.is_some() {
            self.kernel = file.kernel;
        }
        if file.output.is_some() {
            self.output = file.output;
        }
        if file.diagnostics.is_some() {
            self.diagnostics = file.diagnostics;
        }
    }

    fn apply_flags(&mut self, args: &ConfigArgs) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = args.$field {
                    self.$field = v;
                }
            };
        }
        take!(method);
        take!(lambda);
        take!(rho);
        take!(r);
        take!(zeta);
        take!(eps);
        take!(eps_in);
        take!(max_outer);
        take!(max_inner);
        take!(refine);
        take!(seed);
        if args.kappa.is_some() {
            self.kappa = args.kappa;
        }
    }

    /// Checks all numeric ranges by building the solver configuration.
    pub fn validate(&self) -> Result<()> {
        self.solver_config().validate()?;
        Ok(())
    }

    /// The outer-solver parameters this configuration describes.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            rho: self.rho,
            r: self.r,
            zeta: self.zeta,
            kappa: self.kappa,
            eps_outer: self.eps,
            max_outer: self.max_outer,
            refine: self.refine.as_bool(),
            inner: AdmmConfig {
                eps_in: self.eps_in,
                max_iters: self.max_inner,
                ..AdmmConfig::default()
            },
        }
    }

    /// The inner-solver parameters (used directly by the tv-admm baseline).
    pub fn admm_config(&self) -> AdmmConfig {
        self.solver_config().effective_inner()
    }

    /// The full effective configuration as `# key = value` comment lines,
    /// embedded verbatim at the top of every report.
    pub fn comment_block(&self) -> String {
        let mut out = String::from("# configuration\n");
        let mut push = |key: &str, value: String| {
            out.push_str("# ");
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        push("method", self.method.to_string());
        push("lambda", self.lambda.to_string());
        push("rho", self.rho.to_string());
        push("r", self.r.to_string());
        push("zeta", self.zeta.to_string());
        push(
            "kappa",
            self.kappa.map_or_else(|| "auto".to_string(), |k| k.to_string()),
        );
        push("eps", self.eps.to_string());
        push("eps_in", self.eps_in.to_string());
        push("max_outer", self.max_outer.to_string());
        push("max_inner", self.max_inner.to_string());
        push("refine", self.refine.to_string());
        push("seed", self.seed.to_string());
        if let Some(p) = &self.input {
            push("input", p.display().to_string());
        }
        if let Some(k) = &self.kernel {
            push("kernel", k.clone());
        }
        if let Some(p) = &self.output {
            push("output", p.display().to_string());
        }
        if let Some(p) = &self.diagnostics {
            push("diagnostics", p.display().to_string());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_solver_config() {
        let cfg = RunConfig::default();
        let solver = cfg.solver_config();
        assert!(solver.validate().is_ok());
        assert_eq!(solver.lambda, 1e-4);
        assert_eq!(solver.max_outer, 7);
        assert!(!solver.refine);
    }

    #[test]
    fn flags_override_file_values() {
        let dir = std::env::temp_dir().join("mptv-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.toml");
        std::fs::write(&path, "lambda = 0.5\nseed = 11\nrefine = \"on\"\n").unwrap();
        let args = ConfigArgs {
            config: Some(path),
            lambda: Some(0.25),
            ..ConfigArgs::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.lambda, 0.25); // flag wins
        assert_eq!(cfg.seed, 11); // file applies where no flag is given
        assert_eq!(cfg.refine, Toggle::On);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = std::env::temp_dir().join("mptv-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.toml");
        std::fs::write(&path, "lambda = 0.5\nlamda = 0.1\n").unwrap();
        let args = ConfigArgs {
            config: Some(path),
            ..ConfigArgs::default()
        };
        let err = RunConfig::resolve(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        let args = ConfigArgs {
            lambda: Some(-1.0),
            ..ConfigArgs::default()
        };
        assert_eq!(RunConfig::resolve(&args).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn comment_block_lists_every_solver_key() {
        let block = RunConfig::default().comment_block();
        for key in [
            "method", "lambda", "rho", "r ", "zeta", "kappa", "eps ", "eps_in", "max_outer",
            "max_inner", "refine", "seed",
        ] {
            assert!(block.contains(&format!("# {key}")), "missing {key}");
        }
        assert!(block.contains("# kappa = auto"));
    }
}
