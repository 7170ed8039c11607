//! Subcommand definitions and their file outputs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use qsl_core::expand::{self, Resolvent, PROBE_LAMBDA};
use qsl_core::spectrum::find_eigenvalues;
use qsl_core::table::{fmt_real, read_lattice_rows, write_csv, write_lattice_function};
use qsl_core::weyl::{self, MMethod};
use qsl_core::{GridFunction, QslError};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::checks;
use crate::config::RunConfig;
use crate::lambda::parse_lambda;

#[derive(Debug, Parser)]
#[command(name = "qsl", version, about = "Spectral solver for q-Sturm-Liouville problems on the lattice {q^n}")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, conflicts_with = "config_inline")]
    pub config: Option<PathBuf>,
    /// JSON configuration given inline.
    #[arg(long, global = true)]
    pub config_inline: Option<String>,
    /// Output directory, overriding `out_dir` from the configuration.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limit-point/limit-circle verdict from the Weyl disk ladder.
    Classify(ClassifyArgs),
    /// m(λ) by both methods over a grid of λ.
    Weyl(WeylArgs),
    /// Eigenvalues, residues and normalized eigenfunctions.
    Spectrum(SpectrumArgs),
    /// Eigenfunction expansion of a lattice function.
    Expand(ExpandArgs),
    /// One row of the Green's function.
    Green(GreenArgs),
    /// Runs the invariant suite; exits 0 iff every check passes.
    Selftest,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
    pub lambda: Complex64,
    /// Verdict tolerance; defaults to `tol.report`.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WeylArgs {
    /// Explicit λ values; when given, the grid flags are ignored.
    #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
    pub lambda: Vec<Complex64>,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub re_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub re_max: f64,
    /// Imaginary part shared by the grid points.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub im: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Skip the per-eigenfunction CSVs.
    #[arg(long)]
    pub no_eigenfunctions: bool,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// Lattice-function CSV (`n,x,re,im[,logscale]`) covering the window.
    #[arg(long, conflicts_with = "bump")]
    pub function: Option<PathBuf>,
    /// Index of the first point of a 1,2,1 bump (the default input).
    #[arg(long, allow_hyphen_values = true)]
    pub bump: Option<i64>,
    /// Number of eigenpairs used; all found in the scan range by default.
    #[arg(long)]
    pub k: Option<usize>,
    /// λ of the coefficient shift law for `Lf - λf`.
    #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true, default_value = "0+1i")]
    pub shift_lambda: Complex64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GreenArgs {
    #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
    pub lambda: Complex64,
    /// Lattice index of the fixed first argument.
    #[arg(long, allow_hyphen_values = true)]
    pub x: i64,
}

/// Resolves the configuration named on the command line.
pub fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match (&cli.config, &cli.config_inline) {
        (Some(path), _) => RunConfig::from_path(path)?,
        (None, Some(text)) => RunConfig::parse(text, "--config-inline", Path::new(""))?,
        (None, None) => RunConfig::default(),
    };
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    Ok(cfg)
}

/// Writes outputs into the configured directory with a sidecar per file.
struct Output<'a> {
    cfg: &'a RunConfig,
    command: &'static str,
    args: serde_json::Value,
}

impl Output<'_> {
    fn path(&self, name: &str) -> anyhow::Result<PathBuf> {
        fs::create_dir_all(&self.cfg.out_dir)
            .with_context(|| format!("cannot create {}", self.cfg.out_dir.display()))?;
        Ok(self.cfg.out_dir.join(name))
    }

    fn sidecar(&self, path: &Path) -> anyhow::Result<()> {
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
        let meta = json!({
            "file": name,
            "command": self.command,
            "args": self.args,
            "config": self.cfg,
        });
        let side = path.with_file_name(format!("{name}.meta.json"));
        fs::write(&side, serde_json::to_string_pretty(&meta)? + "\n")
            .with_context(|| format!("cannot write {}", side.display()))
    }

    fn csv(&self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> anyhow::Result<PathBuf> {
        let path = self.path(name)?;
        write_csv(&path, header, rows)?;
        self.sidecar(&path)?;
        Ok(path)
    }

    fn lattice(&self, name: &str, f: &GridFunction) -> anyhow::Result<PathBuf> {
        let path = self.path(name)?;
        write_lattice_function(&path, f)?;
        self.sidecar(&path)?;
        Ok(path)
    }

    fn json(&self, name: &str, value: &impl Serialize) -> anyhow::Result<PathBuf> {
        let path = self.path(name)?;
        fs::write(&path, serde_json::to_string_pretty(value)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
        self.sidecar(&path)?;
        Ok(path)
    }
}

fn complex_json(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

/// Runs one subcommand. Returns whether it succeeded in the sense of the
/// exit-code contract (only `selftest` can finish without error yet fail).
pub fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Classify(a) => classify(&cfg, a),
        Command::Weyl(a) => weyl_grid(&cfg, a),
        Command::Spectrum(a) => spectrum(&cfg, a),
        Command::Expand(a) => expand_cmd(&cfg, a),
        Command::Green(a) => green(&cfg, a),
        Command::Selftest => Ok(selftest()),
    }
}

fn classify(cfg: &RunConfig, a: &ClassifyArgs) -> anyhow::Result<bool> {
    let u = cfg.materialize()?;
    let tol = a.tol.unwrap_or(cfg.tol.report);
    let c = weyl::classify(a.lambda, cfg.alpha, &u, tol)?;
    let out = Output {
        cfg,
        command: "classify",
        args: json!({ "lambda": complex_json(a.lambda), "tol": tol }),
    };
    let q = cfg.q;
    let rows = c
        .radii
        .iter()
        .map(|r| {
            vec![
                r.b_index.to_string(),
                fmt_real(q.powi(r.b_index as i32)),
                fmt_real(r.log_radius.exp()),
                fmt_real(r.log_radius),
            ]
        })
        .collect();
    out.csv("classify_ladder.csv", &["b_index", "b", "radius", "log_radius"], rows)?;
    let radius = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |l| fmt_real(l.exp()));
    println!(
        "{},{},{}",
        c.verdict.as_str(),
        radius(c.last_log_radius()),
        radius(c.first_log_radius())
    );
    Ok(true)
}

fn weyl_grid(cfg: &RunConfig, a: &WeylArgs) -> anyhow::Result<bool> {
    let u = cfg.materialize()?;
    let lambdas: Vec<Complex64> = if a.lambda.is_empty() {
        if a.points < 1 || !(a.re_min <= a.re_max) || a.im == 0.0 {
            bail!(QslError::Validation(
                "the λ grid needs points >= 1, re_min <= re_max and im != 0".into()
            ));
        }
        let step = if a.points > 1 {
            (a.re_max - a.re_min) / (a.points - 1) as f64
        } else {
            0.0
        };
        (0..a.points)
            .map(|k| Complex64::new(a.re_min + step * k as f64, a.im))
            .collect()
    } else {
        a.lambda.clone()
    };
    let rows = lambdas
        .par_iter()
        .map(|&z| {
            let disk = weyl::m_function(z, cfg.alpha, &u, MMethod::DiskCenter)?;
            let decay = weyl::m_function(z, cfg.alpha, &u, MMethod::DecayingSolution)?;
            Ok(vec![
                fmt_real(z.re),
                fmt_real(z.im),
                fmt_real(disk.m.re),
                fmt_real(disk.m.im),
                fmt_real(decay.m.re),
                fmt_real(decay.m.im),
                fmt_real(disk.uncertainty.max(decay.uncertainty)),
            ])
        })
        .collect::<qsl_core::Result<Vec<_>>>()?;
    let out = Output {
        cfg,
        command: "weyl",
        args: json!({ "lambda": lambdas.iter().map(|&z| complex_json(z)).collect::<Vec<_>>() }),
    };
    let header = [
        "re_lambda",
        "im_lambda",
        "re_m_disk",
        "im_m_disk",
        "re_m_decay",
        "im_m_decay",
        "uncertainty",
    ];
    let path = out.csv("m_function.csv", &header, rows)?;
    eprintln!("wrote {}", path.display());
    Ok(true)
}

fn scan_config(
    cfg: &RunConfig,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    grid: Option<usize>,
) -> qsl_core::spectrum::ScanConfig {
    let mut sc = cfg.scan_config();
    sc.lambda_min = lambda_min.unwrap_or(sc.lambda_min);
    sc.lambda_max = lambda_max.unwrap_or(sc.lambda_max);
    sc.grid_points = grid.unwrap_or(sc.grid_points);
    sc
}

fn spectrum(cfg: &RunConfig, a: &SpectrumArgs) -> anyhow::Result<bool> {
    let u = cfg.materialize()?;
    let sc = scan_config(cfg, a.lambda_min, a.lambda_max, a.grid);
    let sp = find_eigenvalues(&sc, &u)?;
    for w in &sp.warnings {
        eprintln!("warning: {w}");
    }
    let out = Output {
        cfg,
        command: "spectrum",
        args: json!({
            "lambda_min": sc.lambda_min,
            "lambda_max": sc.lambda_max,
            "grid": sc.grid_points,
            "eigenfunctions": !a.no_eigenfunctions,
        }),
    };
    let rows = sp
        .pairs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            vec![
                k.to_string(),
                fmt_real(p.lambda),
                fmt_real(p.residue),
                fmt_real(p.norm),
                fmt_real(p.bracket.0),
                fmt_real(p.bracket.1),
            ]
        })
        .collect();
    let header = ["index", "lambda", "residue", "norm_check", "bracket_lo", "bracket_hi"];
    let path = out.csv("spectrum.csv", &header, rows)?;
    if !a.no_eigenfunctions {
        for (k, p) in sp.pairs.iter().enumerate() {
            out.lattice(&format!("eigenfunction_{k:03}.csv"), &p.psi)?;
        }
    }
    eprintln!("wrote {} ({} eigenvalues)", path.display(), sp.len());
    Ok(true)
}

fn read_function(path: &Path, cfg: &RunConfig) -> anyhow::Result<GridFunction> {
    let l = cfg.lattice()?;
    let rows = read_lattice_rows(path)?;
    let mut mantissa = vec![None; l.len()];
    let mut logscale = vec![0.0; l.len()];
    for r in rows {
        if !l.contains(r.n) {
            bail!(QslError::Ingestion {
                path: path.to_path_buf(),
                line: r.line,
                message: format!("index {} lies outside the window", r.n),
            });
        }
        let i = (r.n - l.n_outer()) as usize;
        if mantissa[i].is_some() {
            bail!(QslError::Ingestion {
                path: path.to_path_buf(),
                line: r.line,
                message: format!("duplicate index {}", r.n),
            });
        }
        mantissa[i] = Some(Complex64::new(r.re, r.im));
        logscale[i] = r.logscale;
    }
    let mantissa = l
        .indices()
        .zip(mantissa)
        .map(|(n, m)| {
            m.ok_or_else(|| {
                QslError::Validation(format!("{} is missing index {n}", path.display()))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GridFunction::from_parts(l, mantissa, logscale)?)
}

#[derive(Serialize)]
struct ExpansionJson {
    k: usize,
    lhs: f64,
    rhs: f64,
    gap: f64,
    pointwise_max_residual: f64,
    bessel_monotone: bool,
    coefficients: Vec<[f64; 2]>,
    partial_sums: Vec<f64>,
    eigenvalues: Vec<f64>,
    shift_lambda: [f64; 2],
    shift_law_max_deviation: f64,
    shift_proxy_partial_sums: Vec<f64>,
    shift_proxy_bound: f64,
    membership: MembershipJson,
}

#[derive(Serialize)]
struct MembershipJson {
    square_integrable: bool,
    lf_square_integrable: bool,
    boundary_as_listed: bool,
    boundary_as_phi: bool,
    wronskian_decay: bool,
}

fn expand_cmd(cfg: &RunConfig, a: &ExpandArgs) -> anyhow::Result<bool> {
    let u = cfg.materialize()?;
    let l = cfg.lattice()?;
    let f = match (&a.function, a.bump) {
        (Some(path), _) => read_function(path, cfg)?,
        (None, start) => {
            let start = start.unwrap_or(10);
            if !(l.n_outer() < start && start + 2 < l.n_inner()) {
                bail!(QslError::Validation(format!(
                    "bump at {start}..{} does not fit strictly inside the window",
                    start + 2
                )));
            }
            GridFunction::from_real_fn(l, |n, _| match n - start {
                0 | 2 => 1.0,
                1 => 2.0,
                _ => 0.0,
            })
        }
    };
    let class = expand::membership_check(&f, &u, cfg.alpha, PROBE_LAMBDA)?;
    let sc = scan_config(cfg, a.lambda_min, a.lambda_max, a.grid);
    let sp = find_eigenvalues(&sc, &u)?;
    for w in &sp.warnings {
        eprintln!("warning: {w}");
    }
    let k = a.k.unwrap_or(sp.len());
    let rep = expand::parseval_report(&f, &sp, k, &u, None, Some(a.shift_lambda))?;
    let rec = expand::reconstruct(&f, &sp, k, &u)?;
    let law = rep.shift_law.as_ref().expect("shift law requested");
    let body = ExpansionJson {
        k: rep.k,
        lhs: rep.lhs,
        rhs: rep.rhs,
        gap: rep.gap(),
        pointwise_max_residual: rep.pointwise_max_residual,
        bessel_monotone: rep.bessel_monotone(),
        coefficients: rep.coefficients.iter().map(|c| [c.re, c.im]).collect(),
        partial_sums: rep.partial_sums.clone(),
        eigenvalues: sp.pairs[..k].iter().map(|p| p.lambda).collect(),
        shift_lambda: [law.lambda.re, law.lambda.im],
        shift_law_max_deviation: law.max_deviation,
        shift_proxy_partial_sums: law.proxy_partial_sums.clone(),
        shift_proxy_bound: law.proxy_bound,
        membership: MembershipJson {
            square_integrable: class.square_integrable,
            lf_square_integrable: class.lf_square_integrable,
            boundary_as_listed: class.boundary_as_listed,
            boundary_as_phi: class.boundary_as_phi,
            wronskian_decay: class.wronskian_decay,
        },
    };
    let out = Output {
        cfg,
        command: "expand",
        args: json!({
            "function": a.function,
            "bump": if a.function.is_none() { Some(a.bump.unwrap_or(10)) } else { None },
            "k": k,
            "shift_lambda": complex_json(a.shift_lambda),
            "lambda_min": sc.lambda_min,
            "lambda_max": sc.lambda_max,
            "grid": sc.grid_points,
        }),
    };
    let path = out.json("expansion.json", &body)?;
    out.lattice("reconstruction.csv", &rec.values)?;
    eprintln!(
        "wrote {}: K = {k}, gap {:.3e}, pointwise residual {:.3e}",
        path.display(),
        rep.gap(),
        rep.pointwise_max_residual
    );
    Ok(true)
}

fn green(cfg: &RunConfig, a: &GreenArgs) -> anyhow::Result<bool> {
    let u = cfg.materialize()?;
    let l = cfg.lattice()?;
    if !l.contains(a.x) {
        bail!(QslError::Validation(format!(
            "x index {} outside the window [{}, {}]",
            a.x,
            l.n_outer(),
            l.n_inner()
        )));
    }
    let r = Resolvent::new(a.lambda, cfg.alpha, &u)?;
    if r.near_singular {
        eprintln!("warning: λ = {} is within reach of an eigenvalue", a.lambda);
    }
    let values = l
        .indices()
        .map(|y| r.green(a.x, y))
        .collect::<qsl_core::Result<Vec<_>>>()?;
    let slice = GridFunction::from_scaled(l, values)?;
    let out = Output {
        cfg,
        command: "green",
        args: json!({ "lambda": complex_json(a.lambda), "x": a.x }),
    };
    let path = out.lattice("green_slice.csv", &slice)?;
    eprintln!("wrote {}", path.display());
    Ok(true)
}

fn selftest() -> bool {
    let outcomes = checks::selftest();
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    failed == 0
}
