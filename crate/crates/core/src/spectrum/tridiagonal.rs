//! Independent eigenvalue oracle: the truncated operator as a symmetric
//! tridiagonal matrix, solved by Sturm-sequence bisection.
//!
//! Unknowns are the samples at `n_outer + 1 ..= n_inner - 1`. The outer
//! edge is Dirichlet (`f(n_outer) = 0`) and the inner node is eliminated
//! through the two-point boundary model `f(n_inner) = ρ f(n_inner - 1)`.
//! Conjugating with the Jackson weights `w_n = (1-q) q^n` makes the matrix
//! symmetric.

use crate::error::{QslError, Result};
use crate::lattice::GridFunction;

/// Largest window accepted by the oracle.
pub const MAX_ORACLE_LEN: usize = 4096;

#[derive(Clone, Debug)]
pub struct TridiagonalOracle {
    /// Lattice index of the first unknown.
    first: i64,
    diag: Vec<f64>,
    /// `off[i]` couples unknowns `i` and `i + 1`.
    off: Vec<f64>,
}

/// Ratio `f(n_inner) / f(n_inner - 1)` for boundary data proportional to
/// `(sin α, -cos α)`.
fn inner_ratio(alpha: f64, x_in: f64, x_prev: f64) -> Result<f64> {
    let (s, c) = alpha.sin_cos();
    let den = s - x_prev * c;
    if den == 0.0 {
        return Err(QslError::Validation(format!(
            "boundary angle {alpha} makes the inner node degenerate"
        )));
    }
    Ok((s - x_in * c) / den)
}

impl TridiagonalOracle {
    pub fn new(u: &GridFunction, alpha: f64) -> Result<Self> {
        let l = *u.lattice();
        if l.len() > MAX_ORACLE_LEN {
            return Err(QslError::Validation(format!(
                "oracle window of {} points exceeds {MAX_ORACLE_LEN}",
                l.len()
            )));
        }
        if u.iter().any(|(_, v)| v.try_value().is_none_or(|z| z.im != 0.0)) {
            return Err(QslError::Contract("oracle needs a real finite potential".into()));
        }
        let q = l.q();
        let (first, last) = (l.n_outer() + 1, l.n_inner() - 1);
        let qp = |e: f64| q.powf(e);
        let weight = |n: i64| (1.0 - q) * q.powi(n as i32);
        // Stencil coefficients of L f = u f - Δ_q f.
        let sub = |n: i64| -qp(-2.0 * n as f64);
        let sup = |n: i64| -qp(-2.0 * n as f64 - 1.0);
        let mut diag: Vec<f64> = (first..=last)
            .map(|n| u.at(n).value().re + (1.0 + q) * qp(-2.0 * n as f64 - 1.0))
            .collect();
        let rho = inner_ratio(alpha, l.x(l.n_inner()), l.x(last))?;
        *diag.last_mut().expect("window has unknowns") += sup(last) * rho;

        let mut off = Vec::with_capacity(diag.len().saturating_sub(1));
        for n in first + 1..=last {
            let lower = (weight(n) / weight(n - 1)).sqrt() * sub(n);
            let upper = (weight(n - 1) / weight(n)).sqrt() * sup(n - 1);
            let closed = -qp(-2.0 * n as f64 + 0.5);
            let scale = lower.abs().max(upper.abs());
            if (lower - upper).abs() > 1e-12 * scale || (lower - closed).abs() > 1e-12 * scale {
                return Err(QslError::Contract(format!(
                    "symmetrized coupling mismatch at index {n}: {lower} vs {upper} vs {closed}"
                )));
            }
            off.push(closed);
        }
        Ok(Self { first, diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn first_index(&self) -> i64 {
        self.first
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    /// Number of eigenvalues strictly below `x` (negative LDLᵀ pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0f64;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / d };
            d = self.diag[i] - x - coupling;
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval enclosing the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.diag.len() {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + self.off.get(i).map_or(0.0, |v| v.abs());
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th eigenvalue (zero based) by bisection on the Sturm count.
    pub fn eigenvalue(&self, k: usize) -> Option<f64> {
        if k >= self.dim() {
            return None;
        }
        let (mut lo, mut hi) = self.bounds();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Eigenvalues in `[lo, hi)`, ascending.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (a, b) = (self.count_below(lo), self.count_below(hi));
        (a..b).filter_map(|k| self.eigenvalue(k)).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.dim()).filter_map(|k| self.eigenvalue(k)).collect()
    }
}

/// All eigenvalues of the truncated problem, ascending.
pub fn dense_oracle(u: &GridFunction, alpha: f64) -> Result<Vec<f64>> {
    Ok(TridiagonalOracle::new(u, alpha)?.eigenvalues())
}
