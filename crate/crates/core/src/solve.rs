//! Solutions of `Δ_q f + (λ - u) f = 0` by three-term recurrence.
//!
//! Outward propagation starts from boundary data at the origin (the two
//! innermost nodes) and walks toward `n_outer`; inward propagation starts
//! from the outer edge and converges onto the solution that decays at
//! infinity. Both keep a running binary exponent so that solutions spanning
//! hundreds of decades stay representable.

use num_complex::Complex64;

use crate::error::{QslError, Result};
use crate::lattice::{self, GridFunction, LatticeSpec};
use crate::scaled::{ldexp, Scaled};

/// Mantissas are pulled back into `[2^-332, 2^332]` (about `1e±100`).
const RENORM_EXP: i64 = 332;

/// Value and derivative at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryData {
    pub f0: Complex64,
    pub f1: Complex64,
}

impl BoundaryData {
    pub fn new(f0: Complex64, f1: Complex64) -> Self {
        Self { f0, f1 }
    }

    pub fn real(f0: f64, f1: f64) -> Self {
        Self::new(Complex64::new(f0, 0.0), Complex64::new(f1, 0.0))
    }

    /// Two-point Taylor model `f(q^n) = f0 + q^n f1` at the innermost nodes.
    pub fn seeds(&self, lattice: &LatticeSpec) -> Seeds {
        let n = lattice.n_inner();
        Seeds {
            edge: self.f0 + self.f1 * lattice.x(n),
            next: self.f0 + self.f1 * lattice.x(n - 1),
        }
    }
}

/// Starting values at a window edge and its neighbor one step inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seeds {
    pub edge: Complex64,
    pub next: Complex64,
}

impl Seeds {
    pub fn new(edge: Complex64, next: Complex64) -> Self {
        Self { edge, next }
    }
}

/// Boundary data of `φ` and `θ` for the boundary angle `alpha`.
pub fn fundamental_data(alpha: f64, q: f64) -> (BoundaryData, BoundaryData) {
    let s = q.sqrt() / (1.0 - q);
    let (sin, cos) = alpha.sin_cos();
    (
        BoundaryData::real(s * sin, -s * cos),
        BoundaryData::real(s * cos, s * sin),
    )
}

/// Seeds of `φ` and `θ` at `n_inner` (edge) and `n_inner - 1` (next).
///
/// The initial data do not depend on `λ`.
pub fn init_fundamental(alpha: f64, lattice: &LatticeSpec) -> (Seeds, Seeds) {
    let (phi, theta) = fundamental_data(alpha, lattice.q());
    (phi.seeds(lattice), theta.seeds(lattice))
}

fn potential_at(u: &GridFunction, n: i64) -> Complex64 {
    u.at(n).value()
}

/// `x_n^2 (λ - u_n)`.
fn coupling(l: &LatticeSpec, u: &GridFunction, lambda: Complex64, n: i64) -> Complex64 {
    let x = l.x(n);
    (lambda - potential_at(u, n)) * (x * x)
}

fn mag_exp(a: Complex64, b: Complex64) -> Option<i64> {
    let m = a.re.abs().max(a.im.abs()).max(b.re.abs()).max(b.im.abs());
    if m == 0.0 {
        return None;
    }
    let e = m.log2().floor() as i64;
    if !(-RENORM_EXP..RENORM_EXP).contains(&e) {
        Some(e)
    } else {
        None
    }
}

fn shift(z: Complex64, k: i64) -> Complex64 {
    Complex64::new(ldexp(z.re, k), ldexp(z.im, k))
}

fn check_finite(z: Complex64, n: i64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(QslError::NumericAt {
            index: n,
            detail: "recurrence produced a non-finite value".into(),
        })
    }
}

fn check_potential(u: &GridFunction) -> Result<()> {
    if u.iter().any(|(_, v)| v.try_value().is_none()) {
        return Err(QslError::Contract(
            "potential samples must be finite doubles".into(),
        ));
    }
    Ok(())
}

/// Walks from `n_inner` toward `n_outer`:
/// `f_{n-1} = ((1+q)/q) f_n - f_{n+1}/q - x_n^2 (λ - u_n) f_n`.
pub fn propagate_outward(seeds: Seeds, lambda: Complex64, u: &GridFunction) -> Result<GridFunction> {
    check_potential(u)?;
    let l = *u.lattice();
    let q = l.q();
    let len = l.len();
    let mut mant = vec![Complex64::new(0.0, 0.0); len];
    let mut exps = vec![0i64; len];
    let (mut cur, mut nxt, mut e) = (seeds.next, seeds.edge, 0i64);
    check_finite(nxt, l.n_inner())?;
    check_finite(cur, l.n_inner() - 1)?;
    mant[len - 1] = nxt;
    mant[len - 2] = cur;
    for n in (l.n_outer() + 1..l.n_inner()).rev() {
        let a = (1.0 + q) / q - coupling(&l, u, lambda, n);
        let mut prev = a * cur - nxt / q;
        check_finite(prev, n - 1)?;
        if let Some(k) = mag_exp(prev, cur) {
            prev = shift(prev, -k);
            cur = shift(cur, -k);
            e += k;
        }
        let i = l.slot(n - 1);
        mant[i] = prev;
        exps[i] = e;
        nxt = cur;
        cur = prev;
    }
    Ok(GridFunction::from_raw(l, mant, exps))
}

/// Walks from `n_outer` toward `n_inner`:
/// `f_{n+1} = (1+q) f_n - q f_{n-1} - q x_n^2 (λ - u_n) f_n`.
pub fn propagate_inward(seeds: Seeds, lambda: Complex64, u: &GridFunction) -> Result<GridFunction> {
    check_potential(u)?;
    let l = *u.lattice();
    let q = l.q();
    let len = l.len();
    let mut mant = vec![Complex64::new(0.0, 0.0); len];
    let mut exps = vec![0i64; len];
    let (mut prev, mut cur, mut e) = (seeds.edge, seeds.next, 0i64);
    check_finite(prev, l.n_outer())?;
    check_finite(cur, l.n_outer() + 1)?;
    mant[0] = prev;
    mant[1] = cur;
    for n in l.n_outer() + 1..l.n_inner() {
        let c = coupling(&l, u, lambda, n);
        let mut nxt = cur * (1.0 + q) - prev * q - cur * c * q;
        check_finite(nxt, n + 1)?;
        if let Some(k) = mag_exp(nxt, cur) {
            nxt = shift(nxt, -k);
            cur = shift(cur, -k);
            e += k;
        }
        let i = l.slot(n + 1);
        mant[i] = nxt;
        exps[i] = e;
        prev = cur;
        cur = nxt;
    }
    Ok(GridFunction::from_raw(l, mant, exps))
}

/// The solution decaying toward infinity, from Dirichlet seeds `(0, 1)` at
/// the outer edge.
pub fn decaying_solution(lambda: Complex64, u: &GridFunction) -> Result<GridFunction> {
    propagate_inward(
        Seeds::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        lambda,
        u,
    )
}

/// The fundamental solutions `φ`, `θ` at a given `(λ, α)`.
#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub phi: GridFunction,
    pub theta: GridFunction,
    pub lambda: Complex64,
    pub alpha: f64,
}

impl SolutionPair {
    pub fn lattice(&self) -> &LatticeSpec {
        self.phi.lattice()
    }

    /// `W(φ, θ)` at the innermost index, where both are well conditioned.
    pub fn wronskian(&self) -> Scaled {
        let n = self.lattice().n_inner();
        lattice::wronskian(&self.phi, &self.theta, n).expect("innermost index is valid")
    }
}

pub fn solution_pair(lambda: Complex64, alpha: f64, u: &GridFunction) -> Result<SolutionPair> {
    let (sp, st) = init_fundamental(alpha, u.lattice());
    Ok(SolutionPair {
        phi: propagate_outward(sp, lambda, u)?,
        theta: propagate_outward(st, lambda, u)?,
        lambda,
        alpha,
    })
}

/// Fits `f(q^n) = f0 + q^n f1` at the two innermost indices.
pub fn boundary_data(f: &GridFunction) -> Result<BoundaryData> {
    let l = f.lattice();
    let n = l.n_inner();
    let (a, b) = (f.at(n).try_value(), f.at(n - 1).try_value());
    let (Some(fa), Some(fb)) = (a, b) else {
        return Err(QslError::Numeric(
            "boundary samples out of double range".into(),
        ));
    };
    let (xa, xb) = (l.x(n), l.x(n - 1));
    let f1 = (fb - fa) / (xb - xa);
    let f0 = fa - f1 * xa;
    Ok(BoundaryData { f0, f1 })
}

/// `(L f)(q^n) = u f - Δ_q f` at an interior index.
pub fn apply_l_at(f: &GridFunction, u: &GridFunction, n: i64) -> Result<Scaled> {
    f.same_lattice(u)?;
    Ok(f.at(n) * u.at(n) - lattice::delta_q(f, n)?)
}

/// `L f` on the interior; the two window endpoints, where the stencil is
/// not available, are set to zero.
pub fn apply_l(f: &GridFunction, u: &GridFunction) -> Result<GridFunction> {
    f.same_lattice(u)?;
    let l = *f.lattice();
    let values = l
        .indices()
        .map(|n| {
            if n == l.n_outer() || n == l.n_inner() {
                Ok(Scaled::zero())
            } else {
                apply_l_at(f, u, n)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::from_scaled(l, values)
}

/// Largest interior value of `|Δ_q f + (λ - u) f|` relative to the largest
/// stencil term at the same index.
pub fn stencil_residual(f: &GridFunction, lambda: Complex64, u: &GridFunction) -> Result<f64> {
    f.same_lattice(u)?;
    let l = *f.lattice();
    let q = l.q();
    let mut worst = 0.0f64;
    for n in l.n_outer() + 1..l.n_inner() {
        let x2 = l.x(n).powi(2);
        let terms = [
            f.at(n - 1) * (1.0 / x2),
            f.at(n) * (-(1.0 + q) / (q * x2)),
            f.at(n + 1) * (1.0 / (q * x2)),
            f.at(n) * (lambda - potential_at(u, n)),
        ];
        let scale = terms
            .iter()
            .map(|t| t.abs())
            .fold(Scaled::zero(), |a, b| if b.ln_abs() > a.ln_abs() { b } else { a });
        if scale.is_zero() {
            continue;
        }
        let sum: Scaled = terms.into_iter().sum();
        worst = worst.max(sum.abs_ratio(&scale));
    }
    Ok(worst)
}

/// Both sides of the summed Green identity
/// `(λ - λ') Σ_{n=a}^{c} w_n F_n G_n = W_a(F, G) - W_{c+1}(F, G)`
/// for solutions `F` at `λ` and `G` at `λ'`.
#[derive(Clone, Copy, Debug)]
pub struct GreenIdentity {
    pub lhs: Scaled,
    pub rhs: Scaled,
    /// `|lhs - rhs|` over the largest of `|lhs|` and the Casoratian
    /// products `(1-q)/x · F(x) G(x/q)` entering `W_a` and `W_{c+1}`.
    pub residual: f64,
    /// `|lhs - rhs|` over the largest of `|lhs|`, `|W_a|`, `|W_{c+1}|`.
    pub value_residual: f64,
}

fn casoratian_terms(f: &GridFunction, g: &GridFunction, n: i64) -> [Scaled; 2] {
    let l = f.lattice();
    let factor = (1.0 - l.q()) / l.x(n);
    [
        (f.at(n) * g.at(n - 1) * factor).abs(),
        (g.at(n) * f.at(n - 1) * factor).abs(),
    ]
}

fn largest(values: impl IntoIterator<Item = Scaled>) -> Scaled {
    values
        .into_iter()
        .fold(Scaled::zero(), |x, y| if y.ln_abs() > x.ln_abs() { y } else { x })
}

pub fn green_identity(
    f: &GridFunction,
    g: &GridFunction,
    lambda: Complex64,
    lambda_prime: Complex64,
    a: i64,
    c: i64,
) -> Result<GreenIdentity> {
    f.same_lattice(g)?;
    let l = f.lattice();
    if a > c {
        return Err(QslError::ReversedBounds { from: a, to: c });
    }
    l.check(a, l.n_outer() + 1, l.n_inner() - 1)?;
    l.check(c, l.n_outer() + 1, l.n_inner() - 1)?;
    let lhs = lattice::bilinear_pairing(f, g, a, c)? * (lambda - lambda_prime);
    let wa = lattice::wronskian(f, g, a)?;
    let wc = lattice::wronskian(f, g, c + 1)?;
    let rhs = wa - wc;
    let gap = lhs - rhs;
    let ratio = |scale: Scaled| if gap.is_zero() { 0.0 } else { gap.abs_ratio(&scale) };
    let value_residual = ratio(largest([lhs.abs(), wa.abs(), wc.abs()]));
    let mut terms = vec![lhs.abs()];
    terms.extend(casoratian_terms(f, g, a));
    terms.extend(casoratian_terms(f, g, c + 1));
    let residual = ratio(largest(terms));
    Ok(GreenIdentity {
        lhs,
        rhs,
        residual,
        value_residual,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::potential::PotentialSpec;

    fn default_lattice() -> LatticeSpec {
        LatticeSpec::new(0.8, -30, 50).unwrap()
    }

    fn harmonic(l: &LatticeSpec) -> GridFunction {
        PotentialSpec::harmonic().materialize(l).unwrap()
    }

    #[test]
    fn fundamental_data_examples() {
        let (phi, theta) = fundamental_data(0.0, 0.5);
        let s = 0.5f64.sqrt() / 0.5;
        assert_eq!(phi.f0.re, 0.0);
        assert!((phi.f1.re + s).abs() < 1e-15);
        assert!((theta.f0.re - s).abs() < 1e-15);
        assert_eq!(theta.f1.re, 0.0);
        let (phi, theta) = fundamental_data(PI / 2.0, 0.5);
        assert!((phi.f0.re - s).abs() < 1e-15);
        assert!((theta.f1.re - s).abs() < 1e-15);
    }

    #[test]
    fn linear_functions_propagate_exactly_when_free() {
        let l = LatticeSpec::new(0.5, -6, 20).unwrap();
        let u = PotentialSpec::Zero.materialize(&l).unwrap();
        let bd = BoundaryData::real(2.0, -3.0);
        let f = propagate_outward(bd.seeds(&l), Complex64::new(0.0, 0.0), &u).unwrap();
        for n in l.indices() {
            let expect = 2.0 - 3.0 * l.x(n);
            assert!((f.value(n).unwrap().re - expect).abs() < 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn propagated_solutions_satisfy_the_stencil() {
        let l = default_lattice();
        let u = harmonic(&l);
        for lambda in [Complex64::new(1.0, 1.0), Complex64::new(3.5, 0.0), Complex64::new(-2.0, 0.3)] {
            let p = solution_pair(lambda, 0.4, &u).unwrap();
            assert!(stencil_residual(&p.phi, lambda, &u).unwrap() < 1e-12);
            assert!(stencil_residual(&p.theta, lambda, &u).unwrap() < 1e-12);
            let chi = decaying_solution(lambda, &u).unwrap();
            assert!(stencil_residual(&chi, lambda, &u).unwrap() < 1e-12);
        }
    }

    #[test]
    fn renormalization_keeps_mantissas_bounded() {
        let l = default_lattice();
        let p = solution_pair(Complex64::new(0.0, 1.0), 0.0, &harmonic(&l)).unwrap();
        assert!(!p.phi.is_plain());
        for n in l.indices() {
            assert!(p.phi.mantissa(n).unwrap().norm() <= 1e100);
        }
        assert!(p.phi.get(-30).unwrap().ln_abs() > 300.0);
    }

    #[test]
    fn seeded_wronskian_is_one() {
        let l = default_lattice();
        let u = harmonic(&l);
        for alpha in [0.0, 0.3, 1.2, 2.9] {
            let p = solution_pair(Complex64::new(0.7, 1.3), alpha, &u).unwrap();
            // The seeds differ by O(x_inner), so the Casoratian loses a few digits.
            assert!((p.wronskian().value() - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn boundary_data_inverts_seeding() {
        let l = default_lattice();
        let u = harmonic(&l);
        let p = solution_pair(Complex64::new(2.0, 0.5), 0.8, &u).unwrap();
        let (dphi, _) = fundamental_data(0.8, 0.8);
        let bd = boundary_data(&p.phi).unwrap();
        assert!((bd.f0 - dphi.f0).norm() < 1e-12);
        // f1 is a difference quotient over a gap of size x_inner.
        assert!((bd.f1 - dphi.f1).norm() < 1e-9);

        let c = GridFunction::from_real_fn(l, |_, _| 4.0);
        let bd = boundary_data(&c).unwrap();
        assert_eq!((bd.f0.re, bd.f1.re), (4.0, 0.0));
        let lin = GridFunction::from_real_fn(l, |_, x| x);
        let bd = boundary_data(&lin).unwrap();
        assert!(bd.f0.norm() < 1e-15 && (bd.f1.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugate_lambda_gives_conjugate_solutions() {
        let l = default_lattice();
        let u = harmonic(&l);
        let lam = Complex64::new(1.7, 0.9);
        let a = solution_pair(lam, 0.5, &u).unwrap();
        let b = solution_pair(lam.conj(), 0.5, &u).unwrap();
        assert_eq!(a.phi.conj(), b.phi);
        assert_eq!(a.theta.conj(), b.theta);
        let ca = decaying_solution(lam, &u).unwrap();
        let cb = decaying_solution(lam.conj(), &u).unwrap();
        assert_eq!(ca.conj(), cb);
    }

    #[test]
    fn real_lambda_gives_real_solutions() {
        let l = default_lattice();
        let p = solution_pair(Complex64::new(4.2, 0.0), 1.0, &harmonic(&l)).unwrap();
        assert!(p.phi.iter().all(|(_, v)| v.mantissa().im == 0.0));
    }

    #[test]
    fn decaying_solution_is_seed_scale_invariant() {
        let l = default_lattice();
        let u = harmonic(&l);
        let lam = Complex64::new(1.0, 1.0);
        let p = solution_pair(lam, 0.0, &u).unwrap();
        let a = decaying_solution(lam, &u).unwrap();
        let b = propagate_inward(Seeds::new(0.0.into(), 10.0.into()), lam, &u).unwrap();
        let mid = l.midpoint();
        let ratio = |chi: &GridFunction| {
            let wt = lattice::wronskian(chi, &p.theta, mid).unwrap();
            let wp = lattice::wronskian(chi, &p.phi, mid).unwrap();
            (-(wt / wp)).value()
        };
        assert!((ratio(&a) - ratio(&b)).norm() < 1e-10 * ratio(&a).norm());
    }

    #[test]
    fn apply_l_examples() {
        let l = LatticeSpec::new(0.5, -4, 12).unwrap();
        let u = PotentialSpec::Constant(2.5).materialize(&l).unwrap();
        let one = GridFunction::from_real_fn(l, |_, _| 1.0);
        let lf = apply_l(&one, &u).unwrap();
        for n in -3..12 {
            assert!((lf.value(n).unwrap().re - 2.5).abs() < 1e-12);
        }
        assert!(lf.value(-4).unwrap() == Complex64::new(0.0, 0.0));

        // A spike at k spreads onto k-1, k, k+1 with the stencil weights.
        let zero = PotentialSpec::Zero.materialize(&l).unwrap();
        let k = 5;
        let spike = GridFunction::point_mass(l, k, 1.0).unwrap();
        let lf = apply_l(&spike, &zero).unwrap();
        let q: f64 = 0.5;
        let x = |n: i64| q.powi(n as i32);
        assert!((lf.value(k + 1).unwrap().re + 1.0 / x(k + 1).powi(2)).abs() < 1e-9);
        assert!((lf.value(k).unwrap().re - (1.0 + q) / (q * x(k).powi(2))).abs() < 1e-9);
        assert!((lf.value(k - 1).unwrap().re + 1.0 / (q * x(k - 1).powi(2))).abs() < 1e-9);
        assert_eq!(lf.support(), Some((k - 1, k + 1)));

        let lam = Complex64::new(0.8, 0.2);
        let uh = harmonic(&l);
        let p = solution_pair(lam, 0.2, &uh).unwrap();
        let lphi = apply_l(&p.phi, &uh).unwrap();
        for n in -3..12 {
            let want = p.phi.get(n).unwrap() * lam;
            let got = lphi.get(n).unwrap();
            let scale = p.phi.get(n).unwrap().abs() * (1.0 / l.weight(n).powi(2));
            assert!((got - want).abs_ratio(&scale) < 1e-12);
        }
    }

    #[test]
    fn green_formula_on_width_one_windows() {
        // (λ - λ') w_n F_n G_n = W_n - W_{n+1} for F at λ, G at λ'.
        let l = default_lattice();
        let u = harmonic(&l);
        let (lam, lamp) = (Complex64::new(1.0, 0.5), Complex64::new(-0.3, 2.0));
        let f = solution_pair(lam, 0.3, &u).unwrap().phi;
        let g = solution_pair(lamp, 1.1, &u).unwrap().theta;
        for n in [l.n_outer() + 1, 0, 10, l.n_inner() - 1] {
            let lhs = f.at(n) * g.at(n) * (l.weight(n) * (lam - lamp));
            let rhs = lattice::wronskian(&f, &g, n).unwrap()
                - lattice::wronskian(&f, &g, n + 1).unwrap();
            let scale = lattice::wronskian(&f, &g, n).unwrap().abs();
            assert!((lhs - rhs).abs_ratio(&scale) < 1e-10, "n={n}");
        }
    }

    #[test]
    fn summed_green_identity_and_imaginary_part() {
        let l = default_lattice();
        let u = harmonic(&l);
        let (lam, lamp) = (Complex64::new(2.0, 0.7), Complex64::new(0.5, -1.5));
        let f = solution_pair(lam, 0.9, &u).unwrap().phi;
        let g = decaying_solution(lamp, &u).unwrap();
        for (a, c) in [(-29, 49), (-10, 20), (5, 5), (30, 49)] {
            let r = green_identity(&f, &g, lam, lamp, a, c).unwrap();
            assert!(r.residual < 1e-10, "[{a},{c}] {}", r.residual);
        }
        let fb = f.conj();
        let r = green_identity(&f, &fb, lam, lam.conj(), -29, 49).unwrap();
        // 2ν Σ w |F|^2 = i (W_{c+1} - W_a)
        let lhs = r.lhs * Complex64::new(0.0, -1.0);
        assert!(lhs.value().im.abs() <= 1e-12 * lhs.abs().value().re);
        assert!(lhs.value().re > 0.0);
        assert!(r.residual < 1e-10);
        assert!(green_identity(&f, &g, lam, lamp, 5, 4).is_err());
    }

    #[test]
    fn numeric_failure_names_index() {
        let l = LatticeSpec::new(0.5, -500, 20).unwrap();
        let u = GridFunction::from_real_fn(l, |_, _| f64::MAX);
        let r = propagate_outward(Seeds::new(1.0.into(), 1.0.into()), 0.0.into(), &u);
        assert!(matches!(r, Err(QslError::NumericAt { .. })), "{r:?}");
    }
}
