//! Weyl circles, the limit-point/limit-circle dichotomy and the m-function.
//!
//! Far from the origin the fundamental solutions are enormous and nearly
//! parallel, so the disks shrink to radii far below double precision
//! relative to their centers. Radii are therefore carried as natural logs,
//! and the geometric radius is computed from exact Möbius differences
//! rather than from sampled circle points.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{QslError, Result};
use crate::lattice::{self, GridFunction, LatticeSpec};
use crate::scaled::Scaled;
use crate::solve::{self, SolutionPair};

/// Largest tolerated disagreement between radius formulas, in `ln r`.
pub const RADIUS_TOL: f64 = 1e-8;

/// Ladders shorter than this are too short to classify.
pub const MIN_RUNGS: usize = 12;

fn require_complex(lambda: Complex64) -> Result<f64> {
    if lambda.im == 0.0 || !lambda.im.is_finite() || !lambda.re.is_finite() {
        return Err(QslError::Precondition(format!(
            "needs finite lambda off the real axis, got {lambda}"
        )));
    }
    Ok(lambda.im)
}

fn check_b(l: &LatticeSpec, b: i64) -> Result<()> {
    l.check(b, l.n_outer() + 1, l.n_inner() - 1)
}

fn max_abs(values: &[Scaled]) -> Scaled {
    values
        .iter()
        .map(Scaled::abs)
        .fold(Scaled::zero(), |a, b| if b.ln_abs() > a.ln_abs() { b } else { a })
}

/// Result of the Möbius map `z ↦ l(z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LValue {
    Finite(Complex64),
    /// The denominator vanished.
    Infinite,
}

impl LValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            LValue::Finite(z) => Some(z),
            LValue::Infinite => None,
        }
    }
}

/// `[θ(b), Λ⁻¹D_qθ(b), φ(b), Λ⁻¹D_qφ(b)]`.
fn mobius(pair: &SolutionPair, b: i64) -> Result<[Scaled; 4]> {
    check_b(pair.lattice(), b)?;
    Ok([
        pair.theta.at(b),
        lattice::lambda_inv_dq(&pair.theta, b)?,
        pair.phi.at(b),
        lattice::lambda_inv_dq(&pair.phi, b)?,
    ])
}

fn ratio(num: Scaled, den: Scaled) -> LValue {
    if den.is_zero() {
        return LValue::Infinite;
    }
    match (num / den).try_value() {
        Some(v) => LValue::Finite(v),
        None => LValue::Infinite,
    }
}

/// `l(z) = -(θ(b) z + Λ⁻¹D_qθ(b)) / (φ(b) z + Λ⁻¹D_qφ(b))`.
pub fn l_map(pair: &SolutionPair, b: i64, z: Complex64) -> Result<LValue> {
    require_complex(pair.lambda)?;
    let [a, bb, c, d] = mobius(pair, b)?;
    Ok(ratio(-(a * z + bb), c * z + d))
}

/// The `z → ∞` limit of [`l_map`], `-θ(b)/φ(b)`.
pub fn l_map_at_infinity(pair: &SolutionPair, b: i64) -> Result<LValue> {
    require_complex(pair.lambda)?;
    let [a, _, c, _] = mobius(pair, b)?;
    Ok(ratio(-a, c))
}

/// `l(z1) - l(z2)` without subtracting the two images.
pub fn l_map_difference(pair: &SolutionPair, b: i64, z1: Complex64, z2: Complex64) -> Result<Scaled> {
    require_complex(pair.lambda)?;
    let [_, _, c, d] = mobius(pair, b)?;
    let det = mobius_det(pair);
    Ok(-(det * (z1 - z2)) / ((c * z1 + d) * (c * z2 + d)))
}

/// `θ Λ⁻¹D_qφ - Λ⁻¹D_qθ φ = q/(1-q)^2 · W(θ, φ)`, taken from the pair's
/// Wronskian at the innermost index, where it is computed without
/// cancellation.
fn mobius_det(pair: &SolutionPair) -> Scaled {
    let q = pair.lattice().q();
    -pair.wronskian() * (q / (1.0 - q).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylDisk {
    pub center: Complex64,
    /// Natural log of the radius.
    pub log_radius: f64,
    pub b_index: i64,
}

impl WeylDisk {
    /// The radius; underflows to zero far from the origin.
    pub fn radius(&self) -> f64 {
        self.log_radius.exp()
    }

    /// Whether `inner` lies inside `self`, up to `slack` times the larger of
    /// one and the outer radius. Successive disks touch at a common point,
    /// so the test is tight and needs a scale-aware slack once radii are
    /// large.
    pub fn contains(&self, inner: &WeylDisk, slack: f64) -> bool {
        let r = self.radius();
        (self.center - inner.center).norm() <= r - inner.radius() + slack * r.max(1.0)
    }
}

/// The three evaluations of a disk radius, as natural logs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusChain {
    /// `|W(θ, φ)| / |W_b(φ, φ̄)|`.
    pub wronskian: f64,
    /// `1 / (2|ν| ∫_0^b |φ|^2)`.
    pub integral: f64,
    /// Circumradius of three images of the real `z` line.
    pub geometric: f64,
}

impl RadiusChain {
    /// Largest pairwise gap between the three logs.
    pub fn spread(&self) -> f64 {
        let v = [self.wronskian, self.integral, self.geometric];
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

struct DiskParts {
    center: Complex64,
    ln_wronskian: f64,
    ln_integral: f64,
}

fn disk_parts(pair: &SolutionPair, phibar: &GridFunction, b: i64) -> Result<DiskParts> {
    let nu = require_complex(pair.lambda)?;
    let l = pair.lattice();
    check_b(l, b)?;
    let w_pp = lattice::wronskian(&pair.phi, phibar, b)?;
    if w_pp.is_zero() {
        return Err(QslError::NumericAt {
            index: b,
            detail: "W(phi, conj phi) vanished".into(),
        });
    }
    // Far from the origin θ and φ are huge and nearly parallel, so
    // W_b(θ, φ̄) read off the samples is a cancellation. The Green identity
    // W_b(F, φ̄) = W_N(F, φ̄) + 2iν Σ_{b}^{N-1} w F φ̄ gives both Wronskians
    // of the center from sums of same-signed dominant terms instead.
    let n = l.n_inner();
    let two_i_nu = Scaled::from(Complex64::new(0.0, 2.0 * nu));
    let norm = lattice::bilinear_pairing(&pair.phi, phibar, b, n - 1)?;
    let cross = lattice::bilinear_pairing(&pair.theta, phibar, b, n - 1)?;
    let w_tp = lattice::wronskian(&pair.theta, phibar, n)? + two_i_nu * cross;
    let w_pp_sum = lattice::wronskian(&pair.phi, phibar, n)? + two_i_nu * norm;
    let center = (-(w_tp / w_pp_sum)).try_value().ok_or_else(|| QslError::NumericAt {
        index: b,
        detail: "disk center out of range".into(),
    })?;
    Ok(DiskParts {
        center,
        ln_wronskian: pair.wronskian().ln_abs() - w_pp.ln_abs(),
        ln_integral: -((2.0 * nu.abs()).ln() + norm.ln_abs()),
    })
}

fn check_agreement(b: i64, a: f64, c: f64, what: &str) -> Result<()> {
    if (a - c).abs() > RADIUS_TOL || !a.is_finite() || !c.is_finite() {
        return Err(QslError::NumericAt {
            index: b,
            detail: format!("{what} radius formulas disagree: ln r = {a} vs {c}"),
        });
    }
    Ok(())
}

/// The Weyl disk at truncation index `b`.
pub fn weyl_disk(pair: &SolutionPair, b: i64) -> Result<WeylDisk> {
    let parts = disk_parts(pair, &pair.phi.conj(), b)?;
    check_agreement(b, parts.ln_wronskian, parts.ln_integral, "Wronskian and integral")?;
    Ok(WeylDisk {
        center: parts.center,
        log_radius: parts.ln_wronskian,
        b_index: b,
    })
}

/// Circumradius (as `ln r`) of the images of three real points under the
/// l-map. The points sit at angles `0, ±π/3` as seen from the pole `p` of
/// the map, which keeps the triangle well shaped at every `b`.
///
/// Near `x = 0` the pole hugs the real axis (`|Im p| ≪ |Re p|`), so
/// `c z + d` is formed as `c (z - p)` with `z - p = Im p (tan τ - i)`
/// instead of from the rounded abscissae.
pub fn geometric_log_radius(pair: &SolutionPair, b: i64) -> Result<f64> {
    require_complex(pair.lambda)?;
    let [_, _, c, d] = mobius(pair, b)?;
    let pole = (-(d / c)).try_value().ok_or_else(|| QslError::NumericAt {
        index: b,
        detail: "l-map pole out of range".into(),
    })?;
    if pole.im == 0.0 {
        return Err(QslError::NumericAt {
            index: b,
            detail: "l-map pole on the real axis".into(),
        });
    }
    let det = mobius_det(pair);
    let t = [0.0, (PI / 3.0).tan(), -(PI / 3.0).tan()];
    let from_pole = |k: usize| Scaled::from(Complex64::new(t[k], -1.0) * pole.im);
    // l(z_i) - l(z_j) = -det (z_i - z_j) / (c^2 (z_i - p)(z_j - p))
    let diff = |i: usize, j: usize| {
        -(det * ((t[i] - t[j]) * pole.im)) / (c * c * from_pole(i) * from_pole(j))
    };
    let (d1, d2, d12) = (diff(1, 0), diff(2, 0), diff(1, 2));
    let twice_area = (d1 * d2.conj()).im().abs() * 2.0;
    Ok(d1.ln_abs() + d2.ln_abs() + d12.ln_abs() - twice_area.ln_abs())
}

/// All three radius formulas at `b`.
pub fn radius_chain(pair: &SolutionPair, b: i64) -> Result<RadiusChain> {
    let parts = disk_parts(pair, &pair.phi.conj(), b)?;
    Ok(RadiusChain {
        wronskian: parts.ln_wronskian,
        integral: parts.ln_integral,
        geometric: geometric_log_radius(pair, b)?,
    })
}

/// Disks at every truncation index from `n_inner - 1` out to `n_outer + 1`.
pub fn disk_ladder(pair: &SolutionPair) -> Result<Vec<WeylDisk>> {
    let l = *pair.lattice();
    let phibar = pair.phi.conj();
    (l.n_outer() + 1..l.n_inner())
        .rev()
        .map(|b| {
            let p = disk_parts(pair, &phibar, b)?;
            check_agreement(b, p.ln_wronskian, p.ln_integral, "Wronskian and integral")?;
            Ok(WeylDisk {
                center: p.center,
                log_radius: p.ln_wronskian,
                b_index: b,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    LimitPoint,
    LimitCircle,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::LimitPoint => "LimitPoint",
            Verdict::LimitCircle => "LimitCircle",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rung {
    pub b_index: i64,
    pub log_radius: f64,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: Verdict,
    /// Ordered by decreasing `b_index` (growing `b`).
    pub radii: Vec<Rung>,
}

impl Classification {
    pub fn first_log_radius(&self) -> Option<f64> {
        self.radii.first().map(|r| r.log_radius)
    }

    pub fn last_log_radius(&self) -> Option<f64> {
        self.radii.last().map(|r| r.log_radius)
    }
}

/// Decides between limit point and limit circle from a radius ladder.
pub fn verdict_from_ladder(radii: &[Rung], tol: f64) -> Verdict {
    if radii.len() < MIN_RUNGS || !(tol > 0.0) {
        return Verdict::Undetermined;
    }
    let first = radii[0].log_radius;
    let last = radii[radii.len() - 1].log_radius;
    let ln_tol = tol.ln();
    if last - first < ln_tol {
        return Verdict::LimitPoint;
    }
    let tail = &radii[radii.len() - 4..];
    let settled = tail
        .windows(2)
        .all(|w| (w[1].log_radius - w[0].log_radius).exp_m1().abs() < tol);
    if settled && last - first > ln_tol {
        Verdict::LimitCircle
    } else {
        Verdict::Undetermined
    }
}

pub fn classify(lambda: Complex64, alpha: f64, u: &GridFunction, tol: f64) -> Result<Classification> {
    require_complex(lambda)?;
    let pair = solve::solution_pair(lambda, alpha, u)?;
    let radii: Vec<Rung> = disk_ladder(&pair)?
        .into_iter()
        .map(|d| Rung {
            b_index: d.b_index,
            log_radius: d.log_radius,
        })
        .collect();
    Ok(Classification {
        verdict: verdict_from_ladder(&radii, tol),
        radii,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MMethod {
    DiskCenter,
    DecayingSolution,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MFunctionValue {
    pub m: Complex64,
    pub uncertainty: f64,
    pub method: MMethod,
}

/// The square-integrable solution `ψ = θ + m φ`.
#[derive(Clone, Debug)]
pub struct Psi {
    pub lambda: Complex64,
    pub m: Complex64,
    /// Spread of `m` over the Wronskian evaluation band.
    pub spread: f64,
    pub psi: GridFunction,
    pub pair: SolutionPair,
}

/// Band of indices around the midpoint used to measure Wronskian drift.
fn mid_band(l: &LatticeSpec) -> impl Iterator<Item = i64> {
    let mid = l.midpoint();
    let lo = (mid - 2).max(l.n_outer() + 1);
    let hi = (mid + 2).min(l.n_inner());
    lo..=hi
}

/// Builds `ψ` from the decaying solution `χ`: since `ψ ∝ χ` and
/// `W(φ, θ) = 1`, `ψ = -χ / W(χ, φ)` and `m = -W(χ, θ) / W(χ, φ)`.
pub(crate) fn psi_from(pair: SolutionPair, chi: &GridFunction) -> Result<Psi> {
    let l = *pair.lattice();
    let mid = l.midpoint();
    let m_at = |n: i64| -> Result<Complex64> {
        let wp = lattice::wronskian(chi, &pair.phi, n)?;
        let wt = lattice::wronskian(chi, &pair.theta, n)?;
        if wp.is_zero() {
            return Err(QslError::NumericAt {
                index: n,
                detail: "W(chi, phi) vanished".into(),
            });
        }
        (-(wt / wp)).try_value().ok_or_else(|| QslError::NumericAt {
            index: n,
            detail: "m out of range".into(),
        })
    };
    let m = m_at(mid)?;
    let mut spread = 0.0f64;
    for n in mid_band(&l) {
        spread = spread.max((m_at(n)? - m).norm());
    }
    let w = lattice::wronskian(chi, &pair.phi, mid)?;
    let psi = chi.scale(-w.recip());
    Ok(Psi {
        lambda: pair.lambda,
        m,
        spread,
        psi,
        pair,
    })
}

pub fn psi(lambda: Complex64, alpha: f64, u: &GridFunction) -> Result<Psi> {
    require_complex(lambda)?;
    let pair = solve::solution_pair(lambda, alpha, u)?;
    let chi = solve::decaying_solution(lambda, u)?;
    psi_from(pair, &chi)
}

pub fn m_function(lambda: Complex64, alpha: f64, u: &GridFunction, method: MMethod) -> Result<MFunctionValue> {
    require_complex(lambda)?;
    match method {
        MMethod::DiskCenter => {
            let pair = solve::solution_pair(lambda, alpha, u)?;
            let disk = weyl_disk(&pair, pair.lattice().n_outer() + 1)?;
            Ok(MFunctionValue {
                m: disk.center,
                uncertainty: disk.radius(),
                method,
            })
        }
        MMethod::DecayingSolution => {
            let p = psi(lambda, alpha, u)?;
            Ok(MFunctionValue {
                m: p.m,
                uncertainty: p.spread,
                method,
            })
        }
    }
}

/// Both m-function evaluations; fails when they disagree by more than
/// `max(2 r, 1e-6)` with `r` the outermost disk radius.
pub fn m_both(lambda: Complex64, alpha: f64, u: &GridFunction) -> Result<(MFunctionValue, MFunctionValue)> {
    let disk = m_function(lambda, alpha, u, MMethod::DiskCenter)?;
    let decay = m_function(lambda, alpha, u, MMethod::DecayingSolution)?;
    let bound = (2.0 * disk.uncertainty).max(1e-6);
    let gap = (disk.m - decay.m).norm();
    if gap > bound {
        return Err(QslError::Numeric(format!(
            "m-function methods disagree at lambda = {lambda}: |{} - {}| = {gap:e} > {bound:e}",
            disk.m, decay.m
        )));
    }
    Ok((disk, decay))
}

/// `∫_0^∞ f g d_qx` over the window's integration range.
pub fn pairing(f: &GridFunction, g: &GridFunction) -> Result<Scaled> {
    let (a, c) = f.lattice().integration_range();
    lattice::bilinear_pairing(f, g, a, c)
}

#[derive(Clone, Debug)]
pub struct WeylIdentityReport {
    /// `∫ ψ(λ) ψ(λ')` against `(m(λ) - m(λ'))/(λ' - λ)`, relative.
    pub eq10_residual: f64,
    pub eq10_lhs: Complex64,
    pub eq10_rhs: Complex64,
    /// `|W_x(ψ_λ, ψ_λ')|` at the five outermost Wronskian indices.
    pub tail: Vec<(i64, f64)>,
    /// `|W_x(ψ_λ, ψ_λ')|` at the midpoint.
    pub mid_wronskian: f64,
    /// Imaginary-part identity for `ψ(λ)` over the full window, relative.
    pub eq2_residual: f64,
}

pub fn weyl_identity_suite(
    lambda: Complex64,
    lambda_prime: Complex64,
    alpha: f64,
    u: &GridFunction,
) -> Result<WeylIdentityReport> {
    require_complex(lambda)?;
    require_complex(lambda_prime)?;
    if lambda == lambda_prime {
        return Err(QslError::Precondition("lambda and lambda' must differ".into()));
    }
    let a = psi(lambda, alpha, u)?;
    let b = psi(lambda_prime, alpha, u)?;
    let l = *u.lattice();
    let lhs = pairing(&a.psi, &b.psi)?.try_value().ok_or_else(|| {
        QslError::Numeric("psi pairing out of range".into())
    })?;
    let rhs = (a.m - b.m) / (lambda_prime - lambda);
    let tail = (l.n_outer() + 1..=(l.n_outer() + 5).min(l.n_inner()))
        .map(|n| Ok((n, lattice::wronskian(&a.psi, &b.psi, n)?.abs().value().re)))
        .collect::<Result<Vec<_>>>()?;
    let mid_wronskian = lattice::wronskian(&a.psi, &b.psi, l.midpoint())?
        .abs()
        .value()
        .re;
    let eq2 = solve::green_identity(
        &a.psi,
        &a.psi.conj(),
        lambda,
        lambda.conj(),
        l.n_outer() + 1,
        l.n_inner() - 1,
    )?;
    Ok(WeylIdentityReport {
        eq10_residual: (lhs - rhs).norm() / rhs.norm(),
        eq10_lhs: lhs,
        eq10_rhs: rhs,
        tail,
        mid_wronskian,
        eq2_residual: eq2.residual,
    })
}

/// Relative residual of `∫|ψ|^2 = -Im m / ν`.
pub fn norm_identity_residual(p: &Psi) -> Result<f64> {
    let nu = require_complex(p.lambda)?;
    let norm = pairing(&p.psi, &p.psi.conj())?.value().re;
    let expect = -p.m.im / nu;
    Ok((norm - expect).abs() / expect.abs())
}

/// Largest `|W_x(φ, θ) - 1|` over `[lo, hi]`, and the same measured
/// relative to the size of the products entering the Casoratian.
pub fn wronskian_drift(pair: &SolutionPair, lo: i64, hi: i64) -> Result<(f64, f64)> {
    let l = pair.lattice();
    let q = l.q();
    let mut abs_dev = 0.0f64;
    let mut rel_dev = 0.0f64;
    for n in lo..=hi {
        let w = lattice::wronskian(&pair.phi, &pair.theta, n)?;
        let dev = w - Scaled::one();
        let d = dev.try_value().map(|v| v.norm()).unwrap_or(f64::INFINITY);
        abs_dev = abs_dev.max(if d.is_nan() { f64::INFINITY } else { d });
        let factor = (1.0 - q) / l.x(n);
        let products = max_abs(&[
            pair.phi.at(n) * pair.theta.at(n - 1) * factor,
            pair.theta.at(n) * pair.phi.at(n - 1) * factor,
            Scaled::one(),
        ]);
        rel_dev = rel_dev.max(dev.abs_ratio(&products));
    }
    Ok((abs_dev, rel_dev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;

    fn setup() -> (LatticeSpec, GridFunction) {
        let l = LatticeSpec::new(0.8, -30, 50).unwrap();
        let u = PotentialSpec::harmonic().materialize(&l).unwrap();
        (l, u)
    }

    #[test]
    fn l_map_special_points() {
        let (_, u) = setup();
        let pair = solve::solution_pair(Complex64::new(1.0, 1.0), 0.3, &u).unwrap();
        let b = 40;
        let at0 = l_map(&pair, b, 0.0.into()).unwrap().finite().unwrap();
        let lt = lattice::lambda_inv_dq(&pair.theta, b).unwrap();
        let lp = lattice::lambda_inv_dq(&pair.phi, b).unwrap();
        assert!((at0 - (-(lt / lp)).value()).norm() < 1e-14 * at0.norm());
        let inf = l_map_at_infinity(&pair, b).unwrap().finite().unwrap();
        let big = l_map(&pair, b, 1e12.into()).unwrap().finite().unwrap();
        assert!((inf - big).norm() < 1e-9 * inf.norm());
        let real = solve::solution_pair(Complex64::new(1.0, 0.0), 0.3, &u).unwrap();
        assert!(matches!(l_map(&real, b, 0.0.into()), Err(QslError::Precondition(_))));
    }

    #[test]
    fn l_map_images_lie_on_the_disk_near_the_origin() {
        let (l, u) = setup();
        let pair = solve::solution_pair(Complex64::new(0.5, 2.0), 1.0, &u).unwrap();
        for b in [l.n_inner() - 1, 46, 42] {
            let disk = weyl_disk(&pair, b).unwrap();
            let r = disk.radius();
            assert!(r > 1e-4 * disk.center.norm());
            for k in 0..100 {
                let z = Complex64::new(-50.0 + k as f64 * 1.01, 0.0);
                if let LValue::Finite(w) = l_map(&pair, b, z).unwrap() {
                    let dev = ((w - disk.center).norm() - r).abs();
                    assert!(dev <= 1e-9 * r, "b={b} z={z} dev={dev:e} r={r:e}");
                }
            }
        }
    }

    #[test]
    fn radius_chain_agrees_along_the_ladder() {
        let (l, u) = setup();
        let pair = solve::solution_pair(Complex64::new(1.0, 1.0), 0.0, &u).unwrap();
        for b in (l.n_outer() + 1..l.n_inner()).rev() {
            let c = radius_chain(&pair, b).unwrap();
            assert!(c.spread() < 1e-8, "b={b}: {c:?}");
        }
    }

    #[test]
    fn disks_nest_and_shrink() {
        let (_, u) = setup();
        let pair = solve::solution_pair(Complex64::new(2.0, 0.5), 0.7, &u).unwrap();
        let ladder = disk_ladder(&pair).unwrap();
        for w in ladder.windows(2) {
            assert!(w[1].log_radius < w[0].log_radius);
            assert!(w[0].contains(&w[1], 1e-9));
        }
    }

    #[test]
    fn harmonic_potential_is_limit_point() {
        let (_, u) = setup();
        let c = classify(Complex64::new(0.0, 1.0), 0.0, &u, 1e-6).unwrap();
        assert_eq!(c.verdict, Verdict::LimitPoint);
        assert!(c.radii.windows(2).all(|w| w[1].log_radius < w[0].log_radius));
        assert!(c.radii.windows(2).all(|w| w[1].b_index < w[0].b_index));

        let short = LatticeSpec::new(0.8, 0, 7).unwrap();
        let us = PotentialSpec::harmonic().materialize(&short).unwrap();
        let c = classify(Complex64::new(0.0, 1.0), 0.0, &us, 1e-6).unwrap();
        assert_eq!(c.verdict, Verdict::Undetermined);
    }

    #[test]
    fn settled_ladder_is_limit_circle() {
        let radii: Vec<Rung> = (0..20)
            .map(|k| Rung {
                b_index: 40 - k,
                log_radius: -1.0 - (-(k as f64)).exp(),
            })
            .collect();
        assert_eq!(verdict_from_ladder(&radii, 1e-6), Verdict::LimitCircle);
    }

    #[test]
    fn m_methods_agree_and_sign_holds() {
        let (_, u) = setup();
        for lam in [Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0), Complex64::new(5.0, 0.5)] {
            let (disk, decay) = m_both(lam, 0.0, &u).unwrap();
            assert!(disk.m.im < 0.0 && decay.m.im < 0.0);
            let conj = m_function(lam.conj(), 0.0, &u, MMethod::DecayingSolution).unwrap();
            assert!((conj.m - decay.m.conj()).norm() < 1e-10 * decay.m.norm());
        }
    }

    #[test]
    fn psi_norm_identity_and_decay() {
        let (l, u) = setup();
        let p = psi(Complex64::new(1.0, 1.0), 0.0, &u).unwrap();
        assert!(norm_identity_residual(&p).unwrap() < 1e-6);
        assert!(solve::stencil_residual(&p.psi, p.lambda, &u).unwrap() < 1e-9);
        let near = p.psi.get(0).unwrap().ln_abs();
        let far = p.psi.get(l.n_outer() + 3).unwrap().ln_abs();
        assert!(far < near - 10.0);
    }

    #[test]
    fn identity_suite() {
        let (_, u) = setup();
        let r = weyl_identity_suite(Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), 0.0, &u)
            .unwrap();
        assert!(r.eq10_residual < 1e-5, "{r:?}");
        assert!(r.eq2_residual < 1e-9);
        assert!(r.tail[0].1 * 1e3 < r.mid_wronskian);
        let i = Complex64::new(0.0, 1.0);
        let r = weyl_identity_suite(i, i.conj(), 0.0, &u).unwrap();
        assert!(r.eq10_residual < 1e-5);
        assert!(r.eq10_lhs.im.abs() < 1e-12 * r.eq10_lhs.re);
    }
}
