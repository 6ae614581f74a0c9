//! Numbers carried as `mantissa · 2^exponent` so that quantities growing or
//! decaying like `e^{±φ/h}` survive far outside the `f64` exponent range.
//!
//! The mantissa is kept in `[1, 2)` (up to sign). The scale is stored as an
//! integer binary exponent so renormalization is exact; [`ScaledValue::log_scale`]
//! reports it in natural-log units.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

const LN_2: f64 = std::f64::consts::LN_2;

/// Split a finite `v` into `(m, e)` with `v = m · 2^e` and `|m| ∈ [1, 2)`.
/// Zero maps to `(0, 0)`.
pub(crate) fn frexp(v: f64) -> (f64, i64) {
    if v == 0.0 || !v.is_finite() {
        return (v, 0);
    }
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        // subnormal
        let (m, e) = frexp(v * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    (m, biased - 1023)
}

/// `x · 2^k` without intermediate overflow for moderate `x`.
pub(crate) fn ldexp(mut x: f64, mut k: i64) -> f64 {
    if x == 0.0 {
        return x;
    }
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(k as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    mantissa: f64,
    exponent: i64,
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue { mantissa: 0.0, exponent: 0 };
    pub const ONE: ScaledValue = ScaledValue { mantissa: 1.0, exponent: 0 };

    pub fn new(v: f64) -> Self {
        Self::from_mantissa_exp2(v, 0)
    }

    /// Builds `m · 2^e` and renormalizes.
    pub fn from_mantissa_exp2(m: f64, e: i64) -> Self {
        let (mm, de) = frexp(m);
        if mm == 0.0 {
            return Self::ZERO;
        }
        Self { mantissa: mm, exponent: e + de }
    }

    /// Builds `m · e^{log_scale}` (natural log units).
    pub fn from_log_scale(m: f64, log_scale: f64) -> Self {
        if m == 0.0 {
            return Self::ZERO;
        }
        let k = (log_scale / LN_2).floor();
        let rem = log_scale - k * LN_2;
        Self::from_mantissa_exp2(m * rem.exp(), k as i64)
    }

    /// `sign · e^{ln_abs}`.
    pub fn from_ln(sign: f64, ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self::from_log_scale(sign.signum(), ln_abs)
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent2(&self) -> i64 {
        self.exponent
    }

    pub fn log_scale(&self) -> f64 {
        self.exponent as f64 * LN_2
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.log_scale()
        }
    }

    /// Plain `f64` value; overflows to `±inf` or underflows to zero.
    pub fn to_f64(&self) -> f64 {
        ldexp(self.mantissa, self.exponent)
    }

    pub fn abs(&self) -> Self {
        Self { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => {
                self.exponent.cmp(&other.exponent).then(self.mantissa.abs().total_cmp(&other.mantissa.abs()))
            }
        }
    }

    /// Ratio `self / other` as a plain number.
    pub fn ratio(&self, other: &Self) -> f64 {
        (*self / *other).to_f64()
    }
}

impl Default for ScaledValue {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for ScaledValue {
    fn from(v: f64) -> Self {
        Self::new(v)
    }
}

impl fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let l10 = self.ln_abs() / std::f64::consts::LN_10;
        let e10 = l10.floor();
        let m10 = 10f64.powf(l10 - e10) * self.signum();
        write!(f, "{m10:.6}e{e10}")
    }
}

impl Neg for ScaledValue {
    type Output = Self;
    fn neg(self) -> Self {
        Self { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

impl Mul for ScaledValue {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::from_mantissa_exp2(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Div for ScaledValue {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if rhs.is_zero() {
            return Self { mantissa: if self.is_zero() { f64::NAN } else { self.mantissa / 0.0 }, exponent: 0 };
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::from_mantissa_exp2(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl Add for ScaledValue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= rhs.exponent { (self, rhs) } else { (rhs, self) };
        let shift = small.exponent - big.exponent;
        if shift < -1100 {
            return big;
        }
        Self::from_mantissa_exp2(big.mantissa + ldexp(small.mantissa, shift), big.exponent)
    }
}

impl Sub for ScaledValue {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}
