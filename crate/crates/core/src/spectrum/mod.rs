//! Real eigenvalues by decay shooting, with residues and normalized
//! eigenfunctions.
//!
//! An eigenvalue is a real `λ` at which the solution `φ` satisfying the
//! boundary condition at the origin is also the decaying solution `χ`, so
//! the normalized Wronskian `S(λ) ∝ W(χ, φ)` vanishes. Roots are bracketed
//! on a uniform grid and refined by bisection. The count of sign changes of
//! `φ` (a discrete oscillation count) tells how many roots a grid cell
//! holds.

mod tridiagonal;

pub use tridiagonal::{dense_oracle, TridiagonalOracle, MAX_ORACLE_LEN};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{QslError, Result};
use crate::lattice::{self, GridFunction};
use crate::scaled::Scaled;
use crate::solve;
use crate::weyl::{self, MMethod};

/// `|S(λ_n)|` above this marks an eigenvalue as stale.
pub const STALE_RESIDUAL: f64 = 1e-6;

/// Subdivision factor for grid cells holding more than one root.
pub const REFINE_FACTOR: usize = 8;

/// Smallest admissible scan grid.
pub const MIN_GRID: usize = 16;

fn real_lambda(lambda: f64) -> Result<Complex64> {
    if !lambda.is_finite() {
        return Err(QslError::Validation(format!("lambda must be finite, got {lambda}")));
    }
    Ok(Complex64::new(lambda, 0.0))
}

fn phi(lambda: f64, alpha: f64, u: &GridFunction) -> Result<GridFunction> {
    let (seeds, _) = solve::init_fundamental(alpha, u.lattice());
    solve::propagate_outward(seeds, real_lambda(lambda)?, u)
}

/// `ln( |(f_n, f_{n-1})| )`.
fn ln_pair_norm(f: &GridFunction, n: i64) -> f64 {
    let s = f.at(n).norm_sqr() + f.at(n - 1).norm_sqr();
    0.5 * s.ln_abs()
}

/// Index where `|χ| |φ| / x` is largest, i.e. where the two solutions are
/// best conditioned against each other, together with the log of that
/// product scaled as in the Casoratian.
fn match_point(chi: &GridFunction, phi: &GridFunction) -> (i64, f64) {
    let l = phi.lattice();
    let q = l.q();
    (l.n_outer() + 1..=l.n_inner())
        .map(|n| {
            let v = ln_pair_norm(chi, n) + ln_pair_norm(phi, n) + ((1.0 - q) / l.x(n)).ln();
            (n, v)
        })
        .fold((l.midpoint(), f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

fn shooting_from(chi: &GridFunction, phi: &GridFunction) -> Result<f64> {
    let l = phi.lattice();
    let mid = l.midpoint();
    let w = lattice::wronskian(chi, phi, mid)?;
    let (k, ln_scale) = match_point(chi, phi);
    if !ln_scale.is_finite() {
        return Err(QslError::NumericAt {
            index: k,
            detail: "solutions vanish across the window".into(),
        });
    }
    Ok((w / Scaled::from_log(1.0.into(), ln_scale)).value().re)
}

/// `W(χ, φ)` at the midpoint divided by the largest value over the window
/// of `(1-q)/x_n · |(χ_n, χ_{n-1})| · |(φ_n, φ_{n-1})|`, which bounds every
/// Casoratian of the two. `S(λ)` thus lies in `[-1, 1]`; only positive
/// factors are removed, so its sign changes exactly at eigenvalues.
pub fn shooting_function(lambda: f64, alpha: f64, u: &GridFunction) -> Result<f64> {
    let chi = solve::decaying_solution(real_lambda(lambda)?, u)?;
    shooting_from(&chi, &phi(lambda, alpha, u)?)
}

/// Number of eigenvalues below `λ`: sign changes of `φ(·, λ)` over
/// `[n_outer, n_inner - 1]`.
pub fn eigen_count(lambda: f64, alpha: f64, u: &GridFunction) -> Result<usize> {
    let f = phi(lambda, alpha, u)?;
    Ok(sign_changes(&f))
}

fn sign_changes(f: &GridFunction) -> usize {
    let (a, c) = f.lattice().integration_range();
    let mut count = 0;
    let mut last = 0.0f64;
    for n in (a..=c).rev() {
        let s = f.at(n).mantissa().re;
        if s == 0.0 {
            continue;
        }
        if last != 0.0 && (s > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = s;
    }
    count
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    lambda: f64,
    s: f64,
    count: usize,
}

fn sample(lambda: f64, alpha: f64, u: &GridFunction) -> Result<Sample> {
    let lam = real_lambda(lambda)?;
    let f = phi(lambda, alpha, u)?;
    let chi = solve::decaying_solution(lam, u)?;
    Ok(Sample {
        lambda,
        s: shooting_from(&chi, &f)?,
        count: sign_changes(&f),
    })
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|k| if k + 1 == points { hi } else { lo + step * k as f64 })
        .collect()
}

fn sample_grid(lambdas: &[f64], alpha: f64, u: &GridFunction) -> Result<Vec<Sample>> {
    lambdas.par_iter().map(|&l| sample(l, alpha, u)).collect()
}

/// Bisects `S` on a bracket with a sign change until narrower than `tol`.
fn bisect(mut a: Sample, mut b: Sample, tol: f64, alpha: f64, u: &GridFunction) -> Result<f64> {
    if a.s == 0.0 {
        return Ok(a.lambda);
    }
    if b.s == 0.0 {
        return Ok(b.lambda);
    }
    while b.lambda - a.lambda > tol {
        let mid = 0.5 * (a.lambda + b.lambda);
        if mid <= a.lambda || mid >= b.lambda {
            break;
        }
        let s = shooting_function(mid, alpha, u)?;
        if s == 0.0 {
            return Ok(mid);
        }
        let m = Sample { lambda: mid, s, count: 0 };
        if (s > 0.0) == (a.s > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a.lambda + b.lambda))
}

/// The eigenvalue problem's solution matched across the window: `φ` from
/// the origin out to the match point, and the decaying solution fitted to
/// it beyond. Beyond its peak `φ` carries a growing error proportional to
/// the eigenvalue error, which the decaying solution does not.
fn matched_solution(lambda_n: f64, alpha: f64, u: &GridFunction) -> Result<GridFunction> {
    let lam = real_lambda(lambda_n)?;
    let f = phi(lambda_n, alpha, u)?;
    let chi = solve::decaying_solution(lam, u)?;
    let s = shooting_from(&chi, &f)?;
    if !(s.abs() <= STALE_RESIDUAL) {
        return Err(QslError::StaleEigenvalue {
            lambda: lambda_n,
            residual: s.abs(),
        });
    }
    let l = *u.lattice();
    let (k, _) = match_point(&chi, &f);
    let (c0, c1) = (chi.at(k), chi.at(k - 1));
    let c = (f.at(k) * c0 + f.at(k - 1) * c1) / (c0 * c0 + c1 * c1);
    let values = l
        .indices()
        .map(|n| if n >= k { f.at(n) } else { chi.at(n) * c })
        .collect();
    GridFunction::from_scaled(l, values)
}

/// `r_n = 1 / ∫_0^∞ φ(·, λ_n)^2 d_qx`.
pub fn residue(lambda_n: f64, alpha: f64, u: &GridFunction) -> Result<f64> {
    let m = matched_solution(lambda_n, alpha, u)?;
    residue_of(&m)
}

fn residue_of(matched: &GridFunction) -> Result<f64> {
    let norm = weyl::pairing(matched, matched)?;
    let r = norm.recip().value().re;
    if !(r.is_finite() && r > 0.0) {
        return Err(QslError::Numeric(format!("residue not positive and finite: {r}")));
    }
    Ok(r)
}

/// `ψ_n = √r_n φ(·, λ_n)`.
pub fn eigenfunction(lambda_n: f64, r_n: f64, alpha: f64, u: &GridFunction) -> Result<GridFunction> {
    if !(r_n > 0.0 && r_n.is_finite()) {
        return Err(QslError::Precondition(format!("residue must be positive, got {r_n}")));
    }
    let m = matched_solution(lambda_n, alpha, u)?;
    Ok(m.scale(Scaled::from(r_n.sqrt())))
}

/// The residue of `m` at `λ_n` estimated from `iν m(λ_n + iν)` at
/// `ν = 1e-2, 1e-3, 1e-4`, extrapolated to `ν = 0`.
pub fn residue_from_m(lambda_n: f64, alpha: f64, u: &GridFunction) -> Result<f64> {
    let nus = [1e-2, 1e-3, 1e-4];
    let vals = nus
        .iter()
        .map(|&nu| {
            let m = weyl::m_function(Complex64::new(lambda_n, nu), alpha, u, MMethod::DecayingSolution)?;
            Ok((Complex64::new(0.0, nu) * m.m).re)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(neville_at_zero(&nus, &vals))
}

/// Value at zero of the interpolating polynomial through `(x_i, y_i)`.
fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p[0]
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    pub residue: f64,
    pub psi: GridFunction,
    pub bracket: (f64, f64),
    /// `∫ ψ_n^2`, which should be one.
    pub norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grid_points: usize,
    pub tol: f64,
    pub alpha: f64,
}

impl ScanConfig {
    pub fn new(lambda_min: f64, lambda_max: f64) -> Self {
        Self {
            lambda_min,
            lambda_max,
            grid_points: 512,
            tol: 1e-10,
            alpha: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda_min.is_finite() && self.lambda_max.is_finite())
            || self.lambda_min >= self.lambda_max
        {
            return Err(QslError::Validation(format!(
                "scan range [{}, {}] is empty or not finite",
                self.lambda_min, self.lambda_max
            )));
        }
        if self.grid_points < MIN_GRID {
            return Err(QslError::Validation(format!(
                "scan grid needs at least {MIN_GRID} points, got {}",
                self.grid_points
            )));
        }
        if !(self.tol > 0.0) {
            return Err(QslError::Validation("bisection tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub pairs: Vec<EigenPair>,
    pub config: ScanConfig,
    pub warnings: Vec<String>,
}

impl SpectrumResult {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Splits the scan into single-root brackets.
fn brackets(
    samples: &[Sample],
    alpha: f64,
    u: &GridFunction,
    warnings: &mut Vec<String>,
) -> Result<Vec<(Sample, Sample)>> {
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let roots = b.count.saturating_sub(a.count);
        let flips = (a.s > 0.0) != (b.s > 0.0);
        match roots {
            0 => {}
            1 if flips => out.push((a, b)),
            1 => warnings.push(format!(
                "cell [{}, {}] holds one root by count but S does not change sign",
                a.lambda, b.lambda
            )),
            k => {
                warnings.push(format!(
                    "cell [{}, {}] holds {k} roots; refining x{REFINE_FACTOR}",
                    a.lambda, b.lambda
                ));
                let fine = sample_grid(&grid(a.lambda, b.lambda, REFINE_FACTOR + 1), alpha, u)?;
                for v in fine.windows(2) {
                    let r = v[1].count.saturating_sub(v[0].count);
                    let flips = (v[0].s > 0.0) != (v[1].s > 0.0);
                    if r == 1 && flips {
                        out.push((v[0], v[1]));
                    } else if r > 0 {
                        warnings.push(format!(
                            "cell [{}, {}] still holds {r} roots after refinement; skipped",
                            v[0].lambda, v[1].lambda
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Eigenvalues in `[lambda_min, lambda_max]` with residues and eigenfunctions.
pub fn find_eigenvalues(config: &ScanConfig, u: &GridFunction) -> Result<SpectrumResult> {
    config.validate()?;
    let alpha = config.alpha;
    let samples = sample_grid(
        &grid(config.lambda_min, config.lambda_max, config.grid_points),
        alpha,
        u,
    )?;
    let mut warnings = Vec::new();
    let cells = brackets(&samples, alpha, u, &mut warnings)?;
    let pairs = cells
        .par_iter()
        .map(|&(a, b)| {
            let lambda = bisect(a, b, config.tol, alpha, u)?;
            let matched = matched_solution(lambda, alpha, u)?;
            let residue = residue_of(&matched)?;
            let psi = matched.scale(Scaled::from(residue.sqrt()));
            let norm = weyl::pairing(&psi, &psi)?.value().re;
            Ok(EigenPair {
                lambda,
                residue,
                psi,
                bracket: (a.lambda, b.lambda),
                norm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult {
        pairs,
        config: *config,
        warnings,
    })
}

/// `G_{mn} = ∫ ψ_m ψ_n` for the first `k` pairs.
pub fn gram_matrix(spectrum: &SpectrumResult, k: usize) -> Result<Vec<Vec<f64>>> {
    if k > spectrum.len() {
        return Err(QslError::Precondition(format!(
            "asked for {k} eigenfunctions, only {} available",
            spectrum.len()
        )));
    }
    let mut g = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = weyl::pairing(&spectrum.pairs[i].psi, &spectrum.pairs[j].psi)?
                .value()
                .re;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// `max |G - I|`.
pub fn identity_deviation(g: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::potential::PotentialSpec;

    fn setup() -> (LatticeSpec, GridFunction) {
        let l = LatticeSpec::new(0.8, -30, 50).unwrap();
        let u = PotentialSpec::harmonic().materialize(&l).unwrap();
        (l, u)
    }

    #[test]
    fn oscillation_count_matches_oracle() {
        let (_, u) = setup();
        for alpha in [0.0, 0.7, 2.0] {
            let o = TridiagonalOracle::new(&u, alpha).unwrap();
            for lam in [-1.0, 0.5, 3.0, 17.3, 250.0, 4000.0] {
                assert_eq!(
                    eigen_count(lam, alpha, &u).unwrap(),
                    o.count_below(lam),
                    "alpha={alpha} lambda={lam}"
                );
            }
        }
    }

    #[test]
    fn shooting_function_is_bounded_and_scale_free() {
        let (_, u) = setup();
        for lam in [0.3, 1.0, 7.5, 33.0] {
            let s = shooting_function(lam, 0.0, &u).unwrap();
            assert!(s.abs() <= 1.0);
            let chi10 = solve::propagate_inward(
                solve::Seeds::new(0.0.into(), 10.0.into()),
                lam.into(),
                &u,
            )
            .unwrap();
            let s10 = shooting_from(&chi10, &phi(lam, 0.0, &u).unwrap()).unwrap();
            assert_eq!(s.signum(), s10.signum());
            assert!((s - s10).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_matches_oracle() {
        let (_, u) = setup();
        let res = find_eigenvalues(&ScanConfig::new(0.1, 20.0), &u).unwrap();
        let oracle = TridiagonalOracle::new(&u, 0.0).unwrap().eigenvalues_in(0.1, 20.0);
        assert_eq!(res.len(), oracle.len());
        for (p, o) in res.pairs.iter().zip(&oracle) {
            assert!((p.lambda - o).abs() < 1e-8, "{} vs {o}", p.lambda);
            assert!(p.residue > 0.0);
            assert!((p.norm - 1.0).abs() < 1e-10);
            assert!(p.bracket.0 <= p.lambda && p.lambda <= p.bracket.1);
        }
        assert!(res.warnings.is_empty());
    }

    #[test]
    fn empty_range_below_spectrum() {
        let (_, u) = setup();
        let res = find_eigenvalues(&ScanConfig::new(-10.0, 0.1), &u).unwrap();
        assert!(res.is_empty());
    }

    #[test]
    fn coarse_grid_triggers_refinement() {
        let (_, u) = setup();
        let mut cfg = ScanConfig::new(0.1, 60.0);
        cfg.grid_points = 16;
        let res = find_eigenvalues(&cfg, &u).unwrap();
        assert!(!res.warnings.is_empty());
        let oracle = TridiagonalOracle::new(&u, 0.0).unwrap().eigenvalues_in(0.1, 60.0);
        assert_eq!(res.len(), oracle.len());
    }

    #[test]
    fn gram_matrix_is_identity() {
        let (_, u) = setup();
        let res = find_eigenvalues(&ScanConfig::new(0.1, 20.0), &u).unwrap();
        let g = gram_matrix(&res, 8).unwrap();
        assert!(identity_deviation(&g) < 1e-6);
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(g[i][j], g[j][i]);
            }
        }
        assert!(gram_matrix(&res, 100).is_err());
    }

    #[test]
    fn residue_agrees_with_m_pole() {
        let (_, u) = setup();
        let res = find_eigenvalues(&ScanConfig::new(0.1, 5.0), &u).unwrap();
        for p in &res.pairs {
            let r = residue_from_m(p.lambda, 0.0, &u).unwrap();
            assert!((r - p.residue).abs() < 1e-3 * p.residue, "{r} vs {}", p.residue);
        }
    }

    #[test]
    fn stale_eigenvalue_is_reported() {
        let (_, u) = setup();
        let err = residue(1.0, 0.0, &u).unwrap_err();
        assert!(matches!(err, QslError::StaleEigenvalue { .. }));
    }

    #[test]
    fn neville_recovers_quadratics() {
        let x = [1.0, 0.5, 0.25];
        let y: Vec<f64> = x.iter().map(|t| 3.0 - 2.0 * t + 0.5 * t * t).collect();
        assert!((neville_at_zero(&x, &y) - 3.0).abs() < 1e-14);
    }
}
