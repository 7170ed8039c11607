use std::f64::consts::LN_2;

use num_complex::Complex64;

use super::LatticeSpec;
use crate::error::{QslError, Result};
use crate::scaled::Scaled;

/// Complex samples on the lattice window with a per-index binary scale.
///
/// The value at index `n` is `mantissa[n] * exp(logscale[n])`. Plain
/// functions keep every scale at zero; propagated solutions carry the
/// exponent they accumulated during renormalization.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    lattice: LatticeSpec,
    mantissa: Vec<Complex64>,
    exp2: Vec<i64>,
}

impl GridFunction {
    pub fn zeros(lattice: LatticeSpec) -> Self {
        Self {
            lattice,
            mantissa: vec![Complex64::new(0.0, 0.0); lattice.len()],
            exp2: vec![0; lattice.len()],
        }
    }

    /// Tabulates `f(n, x)` with `x = q^n`.
    pub fn from_fn(lattice: LatticeSpec, f: impl Fn(i64, f64) -> Complex64) -> Self {
        let mantissa = lattice.indices().map(|n| f(n, lattice.x(n))).collect();
        Self {
            lattice,
            mantissa,
            exp2: vec![0; lattice.len()],
        }
    }

    pub fn from_real_fn(lattice: LatticeSpec, f: impl Fn(i64, f64) -> f64) -> Self {
        Self::from_fn(lattice, |n, x| Complex64::new(f(n, x), 0.0))
    }

    /// A function that is `value` at index `k` and zero elsewhere.
    pub fn point_mass(lattice: LatticeSpec, k: i64, value: f64) -> Result<Self> {
        lattice.check(k, lattice.n_outer(), lattice.n_inner())?;
        let mut f = Self::zeros(lattice);
        f.mantissa[lattice.slot(k)] = Complex64::new(value, 0.0);
        Ok(f)
    }

    pub fn from_values(lattice: LatticeSpec, values: Vec<Complex64>) -> Result<Self> {
        check_len(&lattice, values.len())?;
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(QslError::Validation("non-finite sample".into()));
        }
        Ok(Self {
            lattice,
            exp2: vec![0; values.len()],
            mantissa: values,
        })
    }

    pub fn from_scaled(lattice: LatticeSpec, values: Vec<Scaled>) -> Result<Self> {
        check_len(&lattice, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(QslError::Validation("non-finite sample".into()));
        }
        Ok(Self {
            lattice,
            mantissa: values.iter().map(Scaled::mantissa).collect(),
            exp2: values.iter().map(Scaled::exp2).collect(),
        })
    }

    /// Builds from explicit mantissas and natural-log scales.
    pub fn from_parts(
        lattice: LatticeSpec,
        mantissa: Vec<Complex64>,
        logscale: Vec<f64>,
    ) -> Result<Self> {
        if mantissa.len() != logscale.len() {
            return Err(QslError::Validation(
                "mantissa and logscale lengths differ".into(),
            ));
        }
        if logscale.iter().all(|&l| l == 0.0) {
            return Self::from_values(lattice, mantissa);
        }
        let values = mantissa
            .into_iter()
            .zip(logscale)
            .map(|(m, l)| Scaled::from_log(m, l))
            .collect();
        Self::from_scaled(lattice, values)
    }

    /// Raw storage, used by the propagators which manage their own scales.
    pub(crate) fn from_raw(lattice: LatticeSpec, mantissa: Vec<Complex64>, exp2: Vec<i64>) -> Self {
        debug_assert_eq!(mantissa.len(), lattice.len());
        debug_assert_eq!(exp2.len(), lattice.len());
        Self {
            lattice,
            mantissa,
            exp2,
        }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.mantissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissa.is_empty()
    }

    pub fn get(&self, n: i64) -> Result<Scaled> {
        self.lattice
            .check(n, self.lattice.n_outer(), self.lattice.n_inner())?;
        Ok(self.at(n))
    }

    /// Unchecked access; `n` must lie in the window.
    pub(crate) fn at(&self, n: i64) -> Scaled {
        let i = self.lattice.slot(n);
        Scaled::new(self.mantissa[i], self.exp2[i])
    }

    /// Plain value at `n` (may over/underflow for heavily scaled samples).
    pub fn value(&self, n: i64) -> Result<Complex64> {
        self.get(n).map(|s| s.value())
    }

    pub fn mantissa(&self, n: i64) -> Result<Complex64> {
        self.lattice
            .check(n, self.lattice.n_outer(), self.lattice.n_inner())?;
        Ok(self.mantissa[self.lattice.slot(n)])
    }

    pub fn logscale(&self, n: i64) -> Result<f64> {
        self.lattice
            .check(n, self.lattice.n_outer(), self.lattice.n_inner())?;
        Ok(self.exp2[self.lattice.slot(n)] as f64 * LN_2)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Scaled)> + '_ {
        self.lattice.indices().map(move |n| (n, self.at(n)))
    }

    /// True when no sample carries a scale.
    pub fn is_plain(&self) -> bool {
        self.exp2.iter().all(|&e| e == 0)
    }

    /// Plain values in index order.
    pub fn values(&self) -> Vec<Complex64> {
        self.iter().map(|(_, s)| s.value()).collect()
    }

    pub fn map(&self, f: impl Fn(i64, Scaled) -> Scaled) -> Self {
        let values: Vec<Scaled> = self.iter().map(|(n, s)| f(n, s)).collect();
        Self {
            lattice: self.lattice,
            mantissa: values.iter().map(Scaled::mantissa).collect(),
            exp2: values.iter().map(Scaled::exp2).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            lattice: self.lattice,
            mantissa: self.mantissa.iter().map(|m| m.conj()).collect(),
            exp2: self.exp2.clone(),
        }
    }

    pub fn scale(&self, factor: Scaled) -> Self {
        self.map(|_, s| s * factor)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul_pointwise(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &GridFunction, f: impl Fn(Scaled, Scaled) -> Scaled) -> Result<Self> {
        self.same_lattice(other)?;
        Ok(self.map(|n, a| f(a, other.at(n))))
    }

    pub(crate) fn same_lattice(&self, other: &GridFunction) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(QslError::Contract(format!(
                "lattice mismatch: {:?} vs {:?}",
                self.lattice, other.lattice
            )));
        }
        Ok(())
    }

    /// Smallest and largest index carrying a nonzero sample.
    pub fn support(&self) -> Option<(i64, i64)> {
        let mut nz = self.iter().filter(|(_, s)| !s.is_zero()).map(|(n, _)| n);
        let first = nz.next()?;
        let last = nz.last().unwrap_or(first);
        Some((first, last))
    }

    /// Largest magnitude over the window.
    pub fn max_abs(&self) -> Scaled {
        self.iter()
            .map(|(_, s)| s.abs())
            .fold(Scaled::zero(), |acc, a| if a.ln_abs() > acc.ln_abs() { a } else { acc })
    }

    /// Rewrites the function with mantissas normalized into [0.5, 1).
    pub fn renormalized(&self) -> Self {
        self.map(|_, s| s)
    }
}

fn check_len(lattice: &LatticeSpec, len: usize) -> Result<()> {
    if len != lattice.len() {
        return Err(QslError::Validation(format!(
            "expected {} samples, got {len}",
            lattice.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> LatticeSpec {
        LatticeSpec::new(0.5, -2, 8).unwrap()
    }

    #[test]
    fn from_parts_resolves_scale() {
        let l = lat();
        let m = vec![Complex64::new(1.0, 0.0); l.len()];
        let mut ls = vec![0.0; l.len()];
        ls[3] = 2.0;
        let f = GridFunction::from_parts(l, m, ls).unwrap();
        assert!((f.value(1).unwrap().re - 2f64.exp()).abs() < 1e-14);
        assert!(!f.is_plain());
        assert_eq!(f.value(0).unwrap().re, 1.0);
    }

    #[test]
    fn support_and_max() {
        let l = lat();
        let f = GridFunction::from_real_fn(l, |n, _| if (2..=4).contains(&n) { -(n as f64) } else { 0.0 });
        assert_eq!(f.support(), Some((2, 4)));
        assert_eq!(f.max_abs().value().re, 4.0);
        assert_eq!(GridFunction::zeros(l).support(), None);
    }

    #[test]
    fn lattice_mismatch_is_contract_error() {
        let a = GridFunction::zeros(lat());
        let b = GridFunction::zeros(LatticeSpec::new(0.5, -2, 9).unwrap());
        assert!(matches!(a.add(&b), Err(QslError::Contract(_))));
    }

    #[test]
    fn out_of_window_access() {
        let f = GridFunction::zeros(lat());
        assert!(matches!(f.get(9), Err(QslError::Range { .. })));
        assert!(f.get(-2).is_ok());
    }
}
