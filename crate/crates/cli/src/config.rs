//! JSON run configuration with strict key checking.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use qsl_core::potential::load_table;
use qsl_core::spectrum::ScanConfig;
use qsl_core::{GridFunction, LatticeSpec, PotentialSpec, QslError};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    q: Option<f64>,
    alpha: Option<f64>,
    n_outer: Option<i64>,
    n_inner: Option<i64>,
    potential: Option<PotentialConfig>,
    scan: Option<RawScan>,
    tol: Option<RawTol>,
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    grid: Option<usize>,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTol {
    bisection: Option<f64>,
    report: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    Constant { c: f64 },
    Power { c: f64, p: f64 },
    /// A lattice-function CSV; relative paths resolve against the
    /// directory of the config file.
    Table { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSettings {
    pub grid: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub bisection: f64,
    /// Convergence tolerance for the limit-point/limit-circle verdict.
    pub report: f64,
}

/// A fully resolved and validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub q: f64,
    pub alpha: f64,
    pub n_outer: i64,
    pub n_inner: i64,
    pub potential: PotentialConfig,
    pub scan: ScanSettings,
    pub tol: Tolerances,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: 0.8,
            alpha: 0.0,
            n_outer: -30,
            n_inner: 50,
            potential: PotentialConfig::Power { c: 1.0, p: 2.0 },
            scan: ScanSettings {
                grid: 512,
                lambda_min: 0.1,
                lambda_max: 60.0,
            },
            tol: Tolerances {
                bisection: 1e-10,
                report: 1e-8,
            },
            out_dir: PathBuf::from("qsl-out"),
        }
    }
}

impl RunConfig {
    /// Reads a config file. Relative table paths resolve against its directory.
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, &path.display().to_string(), base)
    }

    /// Parses a JSON document; `origin` names it in error messages.
    pub fn parse(text: &str, origin: &str, base: &Path) -> anyhow::Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
            QslError::Validation(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })?;
        let d = Self::default();
        let scan = raw.scan.unwrap_or_default();
        let tol = raw.tol.unwrap_or_default();
        let mut potential = raw.potential.unwrap_or(d.potential);
        if let PotentialConfig::Table { path } = &mut potential {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        let cfg = Self {
            q: raw.q.unwrap_or(d.q),
            alpha: raw.alpha.unwrap_or(d.alpha),
            n_outer: raw.n_outer.unwrap_or(d.n_outer),
            n_inner: raw.n_inner.unwrap_or(d.n_inner),
            potential,
            scan: ScanSettings {
                grid: scan.grid.unwrap_or(d.scan.grid),
                lambda_min: scan.lambda_min.unwrap_or(d.scan.lambda_min),
                lambda_max: scan.lambda_max.unwrap_or(d.scan.lambda_max),
            },
            tol: Tolerances {
                bisection: tol.bisection.unwrap_or(d.tol.bisection),
                report: tol.report.unwrap_or(d.tol.report),
            },
            out_dir: raw.out_dir.unwrap_or(d.out_dir),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.lattice()?;
        if !self.alpha.is_finite() {
            bail!(QslError::Validation("alpha must be finite".into()));
        }
        if !(self.tol.report > 0.0 && self.tol.report < 1.0) {
            bail!(QslError::Validation("tol.report must lie in (0,1)".into()));
        }
        if let Some(spec) = self.builtin_potential() {
            spec.validate()?;
        }
        // Scan settings are checked where a scan is run, since flags may
        // override them.
        Ok(())
    }

    pub fn lattice(&self) -> qsl_core::Result<LatticeSpec> {
        LatticeSpec::new(self.q, self.n_outer, self.n_inner)
    }

    fn builtin_potential(&self) -> Option<PotentialSpec> {
        match self.potential {
            PotentialConfig::Zero => Some(PotentialSpec::Zero),
            PotentialConfig::Constant { c } => Some(PotentialSpec::Constant(c)),
            PotentialConfig::Power { c, p } => Some(PotentialSpec::Power { c, p }),
            PotentialConfig::Table { .. } => None,
        }
    }

    pub fn potential_spec(&self) -> qsl_core::Result<PotentialSpec> {
        match &self.potential {
            PotentialConfig::Table { path } => load_table(path, &self.lattice()?),
            _ => Ok(self.builtin_potential().expect("builtin kind")),
        }
    }

    /// The potential sampled on the configured window.
    pub fn materialize(&self) -> qsl_core::Result<GridFunction> {
        self.potential_spec()?.materialize(&self.lattice()?)
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            lambda_min: self.scan.lambda_min,
            lambda_max: self.scan.lambda_max,
            grid_points: self.scan.grid,
            tol: self.tol.bisection,
            alpha: self.alpha,
        }
    }
}
