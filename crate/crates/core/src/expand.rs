//! Eigenfunction expansions, the Green's function and the resolvent.

use num_complex::Complex64;

use crate::error::{QslError, Result};
use crate::lattice::{self, GridFunction, LatticeSpec};
use crate::scaled::Scaled;
use crate::solve;
use crate::spectrum::{self, SpectrumResult};
use crate::weyl;

/// Spectral parameter of the decaying solution used by the Wronskian-decay
/// membership test.
pub const PROBE_LAMBDA: Complex64 = Complex64::new(0.0, 1.0);

/// Outermost points whose share of a Jackson norm decides square
/// integrability on the truncated lattice.
const TAIL_POINTS: i64 = 4;

/// Largest tolerated share of the norm carried by the tail.
const TAIL_FRACTION: f64 = 1e-6;

/// Relative tolerance of the boundary-condition flags.
const BOUNDARY_TOL: f64 = 1e-8;

/// Relative tolerance of the Wronskian-decay flag.
const DECAY_TOL: f64 = 1e-6;

fn norm_sq(f: &GridFunction) -> Result<Scaled> {
    weyl::pairing(f, &f.conj())
}

fn plain(s: Scaled, what: &str) -> Result<Complex64> {
    s.try_value()
        .ok_or_else(|| QslError::Numeric(format!("{what} is out of double range")))
}

/// `c_n = ∫ ψ_n f d_qx` for the first `k` eigenpairs.
pub fn fourier_coefficients(
    f: &GridFunction,
    spectrum: &SpectrumResult,
    k: usize,
) -> Result<Vec<Complex64>> {
    if k > spectrum.len() {
        return Err(QslError::Precondition(format!(
            "asked for {k} coefficients, only {} eigenpairs available",
            spectrum.len()
        )));
    }
    spectrum.pairs[..k]
        .iter()
        .map(|p| plain(weyl::pairing(&p.psi, f)?, "Fourier coefficient"))
        .collect()
}

/// Membership flags for the admissible class of expansion theorems.
#[derive(Clone, Debug)]
pub struct TestFunctionClass {
    pub f: GridFunction,
    /// The tail of `∫|f|^2` is negligible.
    pub square_integrable: bool,
    /// The tail of `∫|Lf|^2` is negligible.
    pub lf_square_integrable: bool,
    /// `f'(0) cos α - f(0) sin α = 0`.
    pub boundary_as_listed: bool,
    /// `f(0) cos α + f'(0) sin α = 0`, the condition met by `φ` and `Φ`.
    pub boundary_as_phi: bool,
    /// `W_x(ψ(·, λ_probe), f)` vanishes at the outer edge.
    pub wronskian_decay: bool,
}

impl TestFunctionClass {
    /// Square integrable with `Lf`, decaying Wronskian, and either reading
    /// of the boundary condition.
    pub fn is_member(&self) -> bool {
        self.square_integrable
            && self.lf_square_integrable
            && (self.boundary_as_listed || self.boundary_as_phi)
            && self.wronskian_decay
    }
}

/// Share of `∫|g|^2` carried by the outermost points.
fn tail_fraction(g: &GridFunction) -> Result<f64> {
    let l = g.lattice();
    let (a, c) = l.integration_range();
    let total = norm_sq(g)?;
    if total.is_zero() {
        return Ok(0.0);
    }
    let tail_end = (a + TAIL_POINTS - 1).min(c);
    let tail = lattice::bilinear_pairing(g, &g.conj(), a, tail_end)?;
    Ok(tail.abs_ratio(&total))
}

pub fn membership_check(
    f: &GridFunction,
    u: &GridFunction,
    alpha: f64,
    lambda_probe: Complex64,
) -> Result<TestFunctionClass> {
    f.same_lattice(u)?;
    let l = *f.lattice();
    let lf = solve::apply_l(f, u)?;
    let bd = solve::boundary_data(f)?;
    let (s, c) = alpha.sin_cos();
    let scale = bd.f0.norm().max(bd.f1.norm());
    let small = |z: Complex64| scale == 0.0 || z.norm() <= BOUNDARY_TOL * scale;
    let probe = weyl::psi(lambda_probe, alpha, u)?;
    let mut edge = 0.0f64;
    let mut peak = Scaled::zero();
    for n in l.n_outer() + 1..=l.n_inner() {
        let w = lattice::wronskian(&probe.psi, f, n)?.abs();
        if n == l.n_outer() + 1 {
            edge = w.ln_abs();
        }
        if w.ln_abs() > peak.ln_abs() {
            peak = w;
        }
    }
    let wronskian_decay = peak.is_zero() || edge - peak.ln_abs() <= DECAY_TOL.ln();
    Ok(TestFunctionClass {
        f: f.clone(),
        square_integrable: tail_fraction(f)? <= TAIL_FRACTION,
        lf_square_integrable: tail_fraction(&lf)? <= TAIL_FRACTION,
        boundary_as_listed: small(bd.f1 * c - bd.f0 * s),
        boundary_as_phi: small(bd.f0 * c + bd.f1 * s),
        wronskian_decay,
    })
}

fn require_member(f: &GridFunction, u: &GridFunction, alpha: f64) -> Result<()> {
    let class = membership_check(f, u, alpha, PROBE_LAMBDA)?;
    if !class.is_member() {
        return Err(QslError::Precondition(format!(
            "function is outside the admissible class (L2 {}, Lf in L2 {}, boundary {}/{}, decay {})",
            class.square_integrable,
            class.lf_square_integrable,
            class.boundary_as_listed,
            class.boundary_as_phi,
            class.wronskian_decay
        )));
    }
    Ok(())
}

/// Partial sum `Σ_{n<k} c_n ψ_n` and its largest deviation from `f` over
/// the support band of `f`.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub values: GridFunction,
    pub max_residual: f64,
}

fn partial_sum(spectrum: &SpectrumResult, coeffs: &[Complex64], l: LatticeSpec) -> Result<GridFunction> {
    let mut acc = GridFunction::zeros(l);
    for (p, c) in spectrum.pairs.iter().zip(coeffs) {
        acc = acc.add(&p.psi.scale(Scaled::from(*c)))?;
    }
    Ok(acc)
}

fn band_residual(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let Some((a, b)) = f.support() else {
        return Ok(0.0);
    };
    let mut worst = 0.0f64;
    for n in a..=b {
        let d = plain(f.at(n) - g.at(n), "reconstruction")?;
        worst = worst.max(d.norm());
    }
    Ok(worst)
}

pub fn reconstruct(f: &GridFunction, spectrum: &SpectrumResult, k: usize, u: &GridFunction) -> Result<Reconstruction> {
    require_member(f, u, spectrum.config.alpha)?;
    let coeffs = fourier_coefficients(f, spectrum, k)?;
    let values = partial_sum(spectrum, &coeffs, *f.lattice())?;
    let max_residual = band_residual(f, &values)?;
    Ok(Reconstruction {
        values,
        max_residual,
    })
}

/// Coefficients of `g = Lf - λf` against those of `f`.
#[derive(Clone, Debug)]
pub struct ShiftLaw {
    pub lambda: Complex64,
    /// `max_n |d_n - (λ_n - λ) c_n|`.
    pub max_deviation: f64,
    /// Partial sums of `Σ |λ_n - λ|^2 |c_n|^2`.
    pub proxy_partial_sums: Vec<f64>,
    /// `∫ |Lf - λf|^2`, which bounds the proxy.
    pub proxy_bound: f64,
}

#[derive(Clone, Debug)]
pub struct ExpansionReport {
    pub k: usize,
    pub coefficients: Vec<Complex64>,
    /// `∫ |f|^2`.
    pub lhs: f64,
    /// `Σ_{n<k} |c_n|^2`.
    pub rhs: f64,
    pub partial_sums: Vec<f64>,
    pub pointwise_max_residual: f64,
    /// `(∫ f g, Σ c_n d_n)` for a supplied second function.
    pub bilinear: Option<(Complex64, Complex64)>,
    pub shift_law: Option<ShiftLaw>,
}

impl ExpansionReport {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn bessel_monotone(&self) -> bool {
        self.partial_sums.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn bessel_bounded(&self, slack: f64) -> bool {
        self.partial_sums.iter().all(|&s| s <= self.lhs + slack)
    }
}

fn cumulative(values: impl Iterator<Item = f64>) -> Vec<f64> {
    values
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

pub fn parseval_report(
    f: &GridFunction,
    spectrum: &SpectrumResult,
    k: usize,
    u: &GridFunction,
    g: Option<&GridFunction>,
    shift_lambda: Option<Complex64>,
) -> Result<ExpansionReport> {
    require_member(f, u, spectrum.config.alpha)?;
    let coefficients = fourier_coefficients(f, spectrum, k)?;
    let lhs = plain(norm_sq(f)?, "norm")?.re;
    let partial_sums = cumulative(coefficients.iter().map(|c| c.norm_sqr()));
    let rhs = partial_sums.last().copied().unwrap_or(0.0);
    let recon = partial_sum(spectrum, &coefficients, *f.lattice())?;
    let pointwise_max_residual = band_residual(f, &recon)?;

    let bilinear = match g {
        Some(g) => {
            let d = fourier_coefficients(g, spectrum, k)?;
            let direct = plain(weyl::pairing(f, g)?, "bilinear form")?;
            let series = coefficients.iter().zip(&d).map(|(c, d)| c * d).sum();
            Some((direct, series))
        }
        None => None,
    };

    let shift_law = match shift_lambda {
        Some(lambda) => {
            let lf = solve::apply_l(f, u)?;
            let g = lf.sub(&f.scale(Scaled::from(lambda)))?;
            let d = fourier_coefficients(&g, spectrum, k)?;
            let mut max_deviation = 0.0f64;
            for ((p, c), d) in spectrum.pairs.iter().zip(&coefficients).zip(&d) {
                max_deviation = max_deviation.max((d - (p.lambda - lambda) * c).norm());
            }
            let proxy_partial_sums = cumulative(
                spectrum
                    .pairs
                    .iter()
                    .zip(&coefficients)
                    .map(|(p, c)| (p.lambda - lambda).norm_sqr() * c.norm_sqr()),
            );
            Some(ShiftLaw {
                lambda,
                max_deviation,
                proxy_partial_sums,
                proxy_bound: plain(norm_sq(&g)?, "norm")?.re,
            })
        }
        None => None,
    };

    Ok(ExpansionReport {
        k,
        coefficients,
        lhs,
        rhs,
        partial_sums,
        pointwise_max_residual,
        bilinear,
        shift_law,
    })
}

/// `(L - λ)^{-1}` on the truncated lattice, assembled from `ψ` and `φ`.
#[derive(Clone, Debug)]
pub struct Resolvent {
    pub lambda: Complex64,
    pub psi: GridFunction,
    pub phi: GridFunction,
    /// Set when `λ` is real and within reach of an eigenvalue.
    pub near_singular: bool,
}

impl Resolvent {
    pub fn new(lambda: Complex64, alpha: f64, u: &GridFunction) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(QslError::Validation(format!("lambda must be finite, got {lambda}")));
        }
        let pair = solve::solution_pair(lambda, alpha, u)?;
        let chi = solve::decaying_solution(lambda, u)?;
        let near_singular =
            lambda.im == 0.0 && spectrum::shooting_function(lambda.re, alpha, u)?.abs() < 1e-6;
        let p = weyl::psi_from(pair, &chi)?;
        Ok(Self {
            lambda,
            psi: p.psi,
            phi: p.pair.phi,
            near_singular,
        })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        self.phi.lattice()
    }

    /// `G(x, y) = -ψ(max(x, y)) φ(min(x, y))` in abscissa, i.e. `ψ` at the
    /// outer index and `φ` at the inner one.
    pub fn green(&self, nx: i64, ny: i64) -> Result<Scaled> {
        let l = self.lattice();
        l.check(nx, l.n_outer(), l.n_inner())?;
        l.check(ny, l.n_outer(), l.n_inner())?;
        let (outer, inner) = if nx <= ny { (nx, ny) } else { (ny, nx) };
        Ok(-(self.psi.at(outer) * self.phi.at(inner)))
    }

    /// `Φ(x) = ψ(x) ∫_0^x φ f + φ(x) ∫_x^∞ ψ f`, where `∫_0^x` includes the
    /// point `x` and `∫_x^∞` starts at `x/q`. Prefix sums, O(N).
    pub fn phi_transform(&self, f: &GridFunction) -> Result<GridFunction> {
        f.same_lattice(&self.phi)?;
        let l = *self.lattice();
        let (a, c) = l.integration_range();
        let len = l.len();
        // inner[n] = Σ_{k=n}^{c} w φ f, outer[n] = Σ_{k=a}^{n-1} w ψ f
        let mut inner = vec![Scaled::zero(); len + 1];
        for n in (a..=c).rev() {
            let i = l.slot(n);
            inner[i] = inner[i + 1] + self.phi.at(n) * f.at(n) * l.weight(n);
        }
        let mut outer = vec![Scaled::zero(); len];
        for n in a + 1..=l.n_inner() {
            let i = l.slot(n);
            outer[i] = outer[i - 1] + self.psi.at(n - 1) * f.at(n - 1) * l.weight(n - 1);
        }
        let values = l
            .indices()
            .map(|n| {
                let i = l.slot(n);
                self.psi.at(n) * inner[i] + self.phi.at(n) * outer[i]
            })
            .collect();
        GridFunction::from_scaled(l, values)
    }

    /// `Φ(x) = -∫_0^∞ G(x, y) f(y) d_qy`, evaluated directly. O(N^2).
    pub fn phi_transform_kernel(&self, f: &GridFunction) -> Result<GridFunction> {
        f.same_lattice(&self.phi)?;
        let l = *self.lattice();
        let (a, c) = l.integration_range();
        let values = l
            .indices()
            .map(|n| {
                (a..=c).try_fold(Scaled::zero(), |acc, k| {
                    Ok(acc - self.green(n, k)? * f.at(k) * l.weight(k))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GridFunction::from_scaled(l, values)
    }

    /// `∫_0^∞ |G(x, y)|^2 d_qy`.
    pub fn row_norm(&self, nx: i64) -> Result<f64> {
        let l = *self.lattice();
        let (a, c) = l.integration_range();
        let s = (a..=c).try_fold(Scaled::zero(), |acc, k| {
            Ok::<_, QslError>(acc + self.green(nx, k)?.norm_sqr() * l.weight(k))
        })?;
        Ok(plain(s, "Green row norm")?.re)
    }
}

pub fn greens_function(nx: i64, ny: i64, lambda: Complex64, alpha: f64, u: &GridFunction) -> Result<Complex64> {
    let r = Resolvent::new(lambda, alpha, u)?;
    plain(r.green(nx, ny)?, "Green's function")
}

pub fn phi_transform(f: &GridFunction, lambda: Complex64, alpha: f64, u: &GridFunction) -> Result<GridFunction> {
    Resolvent::new(lambda, alpha, u)?.phi_transform(f)
}

/// `Σ_{n<k} |ψ_n(x) / (λ_n - λ)|^2` against `∫ |G(x, ·)|^2`.
pub fn green_bessel(resolvent: &Resolvent, spectrum: &SpectrumResult, k: usize, nx: i64) -> Result<(f64, f64)> {
    if k > spectrum.len() {
        return Err(QslError::Precondition(format!(
            "asked for {k} eigenpairs, only {} available",
            spectrum.len()
        )));
    }
    let mut lhs = 0.0;
    for p in &spectrum.pairs[..k] {
        let v = plain(p.psi.get(nx)?, "eigenfunction")?;
        lhs += (v / (p.lambda - resolvent.lambda)).norm_sqr();
    }
    Ok((lhs, resolvent.row_norm(nx)?))
}

#[derive(Clone, Debug)]
pub struct ResolventReport {
    /// `max |Δ_qΦ - (u - λ)Φ - f|`, relative per index to the largest
    /// stencil term.
    pub stencil: f64,
    /// `max |Φ(f) - (f + Φ(Lf))/λ|` relative to `max |Φ(f)|`.
    pub eq5: f64,
    /// `max |f - ∫ G (Lf - λf)|` relative to `max |f|`.
    pub eq6: f64,
    /// `max |Φ_split - Φ_kernel|` relative to `max |Φ|`.
    pub split_vs_kernel: f64,
    /// `Φ(0) cos α + Φ'(0) sin α`, relative to the boundary data size.
    pub boundary: f64,
    pub bound_lhs: f64,
    pub bound_rhs: f64,
}

impl ResolventReport {
    pub fn bound_holds(&self) -> bool {
        self.bound_lhs < self.bound_rhs
    }
}

fn max_abs_diff(a: &GridFunction, b: &GridFunction) -> Result<Scaled> {
    let d = a.sub(b)?;
    Ok(d.max_abs())
}

fn ratio(num: Scaled, den: Scaled) -> f64 {
    if num.is_zero() {
        0.0
    } else {
        num.abs_ratio(&den)
    }
}

fn require_finite_support(f: &GridFunction) -> Result<()> {
    let l = f.lattice();
    if let Some((a, b)) = f.support() {
        if a < l.n_outer() + 2 || b > l.n_inner() - 2 {
            return Err(QslError::Precondition(format!(
                "f must vanish on the two outermost and two innermost nodes; support is [{a}, {b}]"
            )));
        }
    }
    Ok(())
}

pub fn resolvent_suite(f: &GridFunction, lambda: Complex64, alpha: f64, u: &GridFunction) -> Result<ResolventReport> {
    require_finite_support(f)?;
    f.same_lattice(u)?;
    let nu = lambda.im;
    if nu == 0.0 {
        return Err(QslError::Precondition("resolvent suite needs Im lambda != 0".into()));
    }
    if lambda == Complex64::new(0.0, 0.0) {
        return Err(QslError::Precondition("resolvent suite needs lambda != 0".into()));
    }
    let l = *f.lattice();
    let r = Resolvent::new(lambda, alpha, u)?;
    let big_phi = r.phi_transform(f)?;

    let q = l.q();
    let mut stencil = 0.0f64;
    for n in l.n_outer() + 1..l.n_inner() {
        let x2 = l.x(n).powi(2);
        let terms = [
            big_phi.at(n - 1) * (1.0 / x2),
            big_phi.at(n) * (-(1.0 + q) / (q * x2)),
            big_phi.at(n + 1) * (1.0 / (q * x2)),
            big_phi.at(n) * (Scaled::from(lambda) - u.at(n)),
            -f.at(n),
        ];
        let scale = terms
            .iter()
            .map(|t| t.abs())
            .fold(Scaled::zero(), |a, b| if b.ln_abs() > a.ln_abs() { b } else { a });
        let sum: Scaled = terms.into_iter().sum();
        stencil = stencil.max(ratio(sum, scale));
    }

    let lf = solve::apply_l(f, u)?;
    let via_lf = f.add(&r.phi_transform(&lf)?)?.scale(Scaled::from(lambda).recip());
    let eq5 = ratio(max_abs_diff(&big_phi, &via_lf)?, big_phi.max_abs());

    let g = lf.sub(&f.scale(Scaled::from(lambda)))?;
    let ginv = r.phi_transform_kernel(&g)?.scale(Scaled::from(-1.0));
    let eq6 = ratio(max_abs_diff(f, &ginv)?, f.max_abs());

    let kernel = r.phi_transform_kernel(f)?;
    let split_vs_kernel = ratio(max_abs_diff(&big_phi, &kernel)?, big_phi.max_abs());

    let bd = solve::boundary_data(&big_phi)?;
    let (s, c) = alpha.sin_cos();
    let bscale = bd.f0.norm().max(bd.f1.norm());
    let boundary = if bscale == 0.0 {
        0.0
    } else {
        (bd.f0 * c + bd.f1 * s).norm() / bscale
    };

    Ok(ResolventReport {
        stencil,
        eq5,
        eq6,
        split_vs_kernel,
        boundary,
        bound_lhs: plain(norm_sq(&big_phi)?, "norm")?.re,
        bound_rhs: plain(norm_sq(f)?, "norm")?.re / (nu * nu),
    })
}
