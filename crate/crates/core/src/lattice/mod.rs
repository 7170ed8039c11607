//! The geometric lattice `{q^n}` and the q-calculus primitives on it.
//!
//! Points are addressed by their integer index `n` (so `x = q^n`); indices
//! grow toward the accumulation point at zero. The usable window is
//! `[n_outer, n_inner]`, with `n_outer` the largest abscissa and `n_inner`
//! the smallest. The innermost index is the boundary node that stands in
//! for `x = 0`: boundary data are imposed there, and integrals "from 0"
//! run over `[n_outer, n_inner - 1]` (see [`LatticeSpec::integration_range`]).

mod calculus;
mod grid;

pub use calculus::{
    bilinear_pairing, delta_q, jackson_integral, lambda_inv_dq, point, q_derivative, wronskian,
    wronskian_definitional,
};
pub use grid::GridFunction;

use crate::error::{QslError, Result};

/// Smallest admissible window length.
pub const MIN_WINDOW: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    q: f64,
    n_outer: i64,
    n_inner: i64,
}

impl LatticeSpec {
    pub fn new(q: f64, n_outer: i64, n_inner: i64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QslError::Validation("q must lie in (0,1)".into()));
        }
        if n_outer >= n_inner {
            return Err(QslError::Validation(format!(
                "n_outer ({n_outer}) must be smaller than n_inner ({n_inner})"
            )));
        }
        let len = n_inner - n_outer + 1;
        if len < MIN_WINDOW as i64 {
            return Err(QslError::Validation(format!(
                "window length {len} is below the minimum of {MIN_WINDOW}"
            )));
        }
        if n_outer.abs() > i32::MAX as i64 / 4 || n_inner.abs() > i32::MAX as i64 / 4 {
            return Err(QslError::Validation("lattice indices out of range".into()));
        }
        let spec = Self {
            q,
            n_outer,
            n_inner,
        };
        // x^2 enters the recurrence, so both extremes must square into normal range.
        let big = spec.x(n_outer);
        let small = spec.x(n_inner);
        if !(big * big).is_finite() || !(small * small).is_normal() {
            return Err(QslError::Validation(format!(
                "window [{n_outer}, {n_inner}] leaves double range for q = {q}"
            )));
        }
        Ok(spec)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n_outer(&self) -> i64 {
        self.n_outer
    }

    pub fn n_inner(&self) -> i64 {
        self.n_inner
    }

    /// Number of lattice points in the window.
    pub fn len(&self) -> usize {
        (self.n_inner - self.n_outer + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.n_outer..=self.n_inner).contains(&n)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.n_outer..=self.n_inner
    }

    /// Index of the window midpoint, where forward and backward solutions
    /// are both well scaled.
    pub fn midpoint(&self) -> i64 {
        (self.n_outer + self.n_inner).div_euclid(2)
    }

    /// Inclusive index range of the Jackson sum standing for `∫_0^∞`.
    pub fn integration_range(&self) -> (i64, i64) {
        (self.n_outer, self.n_inner - 1)
    }

    /// `q^n` without bounds checking.
    pub(crate) fn x(&self, n: i64) -> f64 {
        self.q.powi(n as i32)
    }

    /// Jackson weight `(1-q) q^n`.
    pub fn weight(&self, n: i64) -> f64 {
        (1.0 - self.q) * self.x(n)
    }

    pub(crate) fn slot(&self, n: i64) -> usize {
        debug_assert!(self.contains(n));
        (n - self.n_outer) as usize
    }

    pub(crate) fn check(&self, n: i64, lo: i64, hi: i64) -> Result<()> {
        if n < lo || n > hi {
            Err(QslError::range(n, lo, hi))
        } else {
            Ok(())
        }
    }
}
