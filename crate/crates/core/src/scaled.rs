//! Complex numbers with a detached binary exponent.
//!
//! Solutions of the q-difference equation for confining potentials span
//! hundreds of decades across a modest lattice window. Every quantity that
//! combines lattice samples (Wronskians, Jackson sums, stencils) is carried
//! as `mantissa * 2^exp2` so that products never leave double range.
//! Rescaling by powers of two is exact, which keeps conjugation symmetry and
//! the Casoratian bookkeeping bit-for-bit reproducible.

use std::f64::consts::LN_2;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// `2^k` for `k` in the normal exponent range.
fn pow2(k: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// `x * 2^k`, saturating to zero or infinity outside double range.
pub(crate) fn ldexp(mut x: f64, mut k: i64) -> f64 {
    while k > 1023 {
        x *= pow2(1023);
        k -= 1023;
        if !x.is_finite() {
            return x;
        }
    }
    while k < -1022 {
        x *= pow2(-1022);
        k += 1022;
        if x == 0.0 {
            return x;
        }
    }
    x * pow2(k)
}

/// Exponent `e` such that `x = m * 2^e` with `|m|` in `[0.5, 1)`.
fn frexp_exp(x: f64) -> i64 {
    debug_assert!(x.is_finite() && x != 0.0);
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal
        frexp_exp(x * pow2(64)) - 64
    } else {
        raw - 1022
    }
}

fn ldexp_c(z: Complex64, k: i64) -> Complex64 {
    Complex64::new(ldexp(z.re, k), ldexp(z.im, k))
}

#[derive(Clone, Copy, PartialEq)]
pub struct Scaled {
    mantissa: Complex64,
    exp2: i64,
}

impl fmt::Debug for Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scaled({} * 2^{})", self.mantissa, self.exp2)
    }
}

impl Default for Scaled {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<Complex64> for Scaled {
    fn from(z: Complex64) -> Self {
        Self::new(z, 0)
    }
}

impl From<f64> for Scaled {
    fn from(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0)
    }
}

impl Scaled {
    /// Builds `mantissa * 2^exp2` and normalizes it.
    pub fn new(mantissa: Complex64, exp2: i64) -> Self {
        let mut s = Self { mantissa, exp2 };
        s.normalize();
        s
    }

    /// Builds `mantissa * exp(log_scale)`.
    pub fn from_log(mantissa: Complex64, log_scale: f64) -> Self {
        let k = (log_scale / LN_2).floor();
        let frac = log_scale - k * LN_2;
        Self::new(mantissa * frac.exp(), k as i64)
    }

    pub const fn zero() -> Self {
        Self {
            mantissa: Complex64::new(0.0, 0.0),
            exp2: 0,
        }
    }

    pub fn one() -> Self {
        Self::from(1.0)
    }

    fn normalize(&mut self) {
        let amax = self.mantissa.re.abs().max(self.mantissa.im.abs());
        if amax == 0.0 || !amax.is_finite() {
            if amax == 0.0 {
                self.exp2 = 0;
            }
            return;
        }
        let e = frexp_exp(amax);
        self.mantissa = ldexp_c(self.mantissa, -e);
        self.exp2 += e;
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    /// Natural-log scale of the binary exponent.
    pub fn log_scale(&self) -> f64 {
        self.exp2 as f64 * LN_2
    }

    /// Resolves to a plain complex; over/underflows to inf/0 when out of range.
    pub fn value(&self) -> Complex64 {
        ldexp_c(self.mantissa, self.exp2)
    }

    /// The plain value when it is representable without overflow.
    pub fn try_value(&self) -> Option<Complex64> {
        let v = self.value();
        (v.re.is_finite() && v.im.is_finite()).then_some(v)
    }

    /// `ln |z|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale()
    }

    pub fn abs(&self) -> Scaled {
        Scaled::new(Complex64::new(self.mantissa.norm(), 0.0), self.exp2)
    }

    pub fn norm_sqr(&self) -> Scaled {
        Scaled::new(Complex64::new(self.mantissa.norm_sqr(), 0.0), 2 * self.exp2)
    }

    pub fn re(&self) -> Scaled {
        Scaled::new(Complex64::new(self.mantissa.re, 0.0), self.exp2)
    }

    pub fn im(&self) -> Scaled {
        Scaled::new(Complex64::new(self.mantissa.im, 0.0), self.exp2)
    }

    pub fn conj(&self) -> Scaled {
        Scaled {
            mantissa: self.mantissa.conj(),
            exp2: self.exp2,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite()
    }

    /// `|self| / |other|` as a plain real (may be 0 or inf).
    pub fn abs_ratio(&self, other: &Scaled) -> f64 {
        let r = *self / *other;
        ldexp(r.mantissa.norm(), r.exp2)
    }

    pub fn scale(&self, factor: f64) -> Scaled {
        Scaled::new(self.mantissa * factor, self.exp2)
    }

    pub fn recip(&self) -> Scaled {
        Scaled::new(self.mantissa.inv(), -self.exp2)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: Scaled) -> Scaled {
        Scaled::new(self.mantissa * rhs.mantissa, self.exp2 + rhs.exp2)
    }
}

impl Mul<Complex64> for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: Complex64) -> Scaled {
        Scaled::new(self.mantissa * rhs, self.exp2)
    }
}

impl Mul<f64> for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: f64) -> Scaled {
        Scaled::new(self.mantissa * rhs, self.exp2)
    }
}

impl Div for Scaled {
    type Output = Scaled;
    fn div(self, rhs: Scaled) -> Scaled {
        Scaled::new(self.mantissa / rhs.mantissa, self.exp2 - rhs.exp2)
    }
}

impl Add for Scaled {
    type Output = Scaled;
    fn add(self, rhs: Scaled) -> Scaled {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return rhs;
        }
        let (big, small) = if self.exp2 >= rhs.exp2 {
            (self, rhs)
        } else {
            (rhs, self)
        };
        Scaled::new(
            big.mantissa + ldexp_c(small.mantissa, small.exp2 - big.exp2),
            big.exp2,
        )
    }
}

impl Sub for Scaled {
    type Output = Scaled;
    fn sub(self, rhs: Scaled) -> Scaled {
        self + (-rhs)
    }
}

impl Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled {
            mantissa: -self.mantissa,
            exp2: self.exp2,
        }
    }
}

impl std::iter::Sum for Scaled {
    fn sum<I: Iterator<Item = Scaled>>(iter: I) -> Scaled {
        iter.fold(Scaled::zero(), |acc, x| acc + x)
    }
}
