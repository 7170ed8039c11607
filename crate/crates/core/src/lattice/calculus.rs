use super::{GridFunction, LatticeSpec};
use crate::error::{QslError, Result};
use crate::scaled::Scaled;

/// The lattice point `q^n`.
pub fn point(lattice: &LatticeSpec, n: i64) -> Result<f64> {
    lattice.check(n, lattice.n_outer(), lattice.n_inner())?;
    Ok(lattice.x(n))
}

/// `D_q f(q^n) = (f(q^n) - f(q^{n+1})) / ((1-q) q^n)`.
pub fn q_derivative(f: &GridFunction, n: i64) -> Result<Scaled> {
    let l = f.lattice();
    l.check(n, l.n_outer(), l.n_inner() - 1)?;
    let denom = (1.0 - l.q()) * l.x(n);
    Ok((f.at(n) - f.at(n + 1)) * denom.recip())
}

/// `Λ_q^{-1} D_q f` at `x = q^n`, i.e. `D_q f` evaluated at `x/q`.
pub fn lambda_inv_dq(f: &GridFunction, n: i64) -> Result<Scaled> {
    let l = f.lattice();
    l.check(n, l.n_outer() + 1, l.n_inner())?;
    let q = l.q();
    let factor = q / ((1.0 - q) * l.x(n));
    Ok((f.at(n - 1) - f.at(n)) * factor)
}

/// The q-Laplacian stencil
/// `(1/x^2) [f(x/q) - ((1+q)/q) f(x) + (1/q) f(qx)]` at `x = q^n`.
pub fn delta_q(f: &GridFunction, n: i64) -> Result<Scaled> {
    let l = f.lattice();
    l.check(n, l.n_outer() + 1, l.n_inner() - 1)?;
    let q = l.q();
    let x = l.x(n);
    let inv_x2 = 1.0 / (x * x);
    let sum = f.at(n - 1) - f.at(n) * ((1.0 + q) / q) + f.at(n + 1) * (1.0 / q);
    Ok(sum * inv_x2)
}

fn check_bounds(l: &LatticeSpec, n_from: i64, n_to: i64) -> Result<()> {
    if n_from > n_to {
        return Err(QslError::ReversedBounds {
            from: n_from,
            to: n_to,
        });
    }
    l.check(n_from, l.n_outer(), l.n_inner())?;
    l.check(n_to, l.n_outer(), l.n_inner())
}

/// Jackson sum `(1-q) Σ_{n=n_from}^{n_to} q^n f(q^n)`.
///
/// The bounds are lattice indices, so the sum covers the abscissae
/// `q^{n_from} ≥ x ≥ q^{n_to}`.
pub fn jackson_integral(f: &GridFunction, n_from: i64, n_to: i64) -> Result<Scaled> {
    let l = f.lattice();
    check_bounds(l, n_from, n_to)?;
    Ok((n_from..=n_to).map(|n| f.at(n) * l.weight(n)).sum())
}

/// Jackson sum of the pointwise product `f g`. Not conjugated.
pub fn bilinear_pairing(
    f: &GridFunction,
    g: &GridFunction,
    n_from: i64,
    n_to: i64,
) -> Result<Scaled> {
    f.same_lattice(g)?;
    let l = f.lattice();
    check_bounds(l, n_from, n_to)?;
    Ok((n_from..=n_to)
        .map(|n| f.at(n) * g.at(n) * l.weight(n))
        .sum())
}

/// q-Wronskian `W_x(f, g)` at `x = q^n`, in the Casoratian form
/// `((1-q)/x) (f(x) g(x/q) - g(x) f(x/q))`.
pub fn wronskian(f: &GridFunction, g: &GridFunction, n: i64) -> Result<Scaled> {
    f.same_lattice(g)?;
    let l = f.lattice();
    l.check(n, l.n_outer() + 1, l.n_inner())?;
    let factor = (1.0 - l.q()) / l.x(n);
    Ok((f.at(n) * g.at(n - 1) - g.at(n) * f.at(n - 1)) * factor)
}

/// q-Wronskian built literally from `(1-q)^2/q [f Λ⁻¹D_q g - g Λ⁻¹D_q f]`.
pub fn wronskian_definitional(f: &GridFunction, g: &GridFunction, n: i64) -> Result<Scaled> {
    f.same_lattice(g)?;
    let l = f.lattice();
    let q = l.q();
    let lg = lambda_inv_dq(g, n)?;
    let lf = lambda_inv_dq(f, n)?;
    Ok((f.at(n) * lg - g.at(n) * lf) * ((1.0 - q).powi(2) / q))
}
