//! Double-double real numbers with a running error bound.
//!
//! An [`HPReal`] is the unevaluated sum `hi + lo` of two machine doubles
//! (about 31 significant digits) together with `err`, an upper bound on the
//! absolute distance between `hi + lo` and the real value it stands for.
//! Every arithmetic operation adds its own rounding budget to `err`, so the
//! bound only ever grows.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Relative rounding budget charged per double-double operation (2^-104).
pub const UNIT_ROUNDOFF: f64 = 4.930380657631324e-32;

/// Extra slack for the transcendental routines (argument reduction, Taylor
/// truncation, Newton step).
const TRANSCENDENTAL_ROUNDOFF: f64 = 64.0 * UNIT_ROUNDOFF;

const LN2: HPReal = HPReal::from_parts(std::f64::consts::LN_2, 2.319046813846299558e-17);
const PI: HPReal = HPReal::from_parts(std::f64::consts::PI, 1.224646799147353207e-16);

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// A double-double value with an accumulated absolute error bound.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct HPReal {
    hi: f64,
    lo: f64,
    err: f64,
}

impl HPReal {
    pub const ZERO: HPReal = HPReal::from_parts(0.0, 0.0);
    pub const ONE: HPReal = HPReal::from_parts(1.0, 0.0);

    const fn from_parts(hi: f64, lo: f64) -> Self {
        HPReal { hi, lo, err: 0.0 }
    }

    /// Builds `hi + lo` after renormalization; `err` starts at zero.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        HPReal { hi, lo, err: 0.0 }
    }

    pub fn from_f64(x: f64) -> Self {
        HPReal {
            hi: x,
            lo: 0.0,
            err: 0.0,
        }
    }

    /// Exact for every `u64`.
    pub fn from_u64(x: u64) -> Self {
        let hi = x as f64;
        // `hi` may have rounded; the remainder fits in an i64 and is exact as f64
        let rem = x as i128 - hi as i128;
        HPReal::new(hi, rem as f64)
    }

    /// Nearest double-double to an exact rational. The conversion error is
    /// charged to `err`.
    pub fn from_ratio(r: &BigRational) -> Self {
        if r.is_zero() {
            return HPReal::ZERO;
        }
        let hi = match r.to_f64() {
            Some(h) if h.is_finite() => h,
            _ => {
                return HPReal {
                    hi: f64::NAN,
                    lo: f64::NAN,
                    err: f64::INFINITY,
                }
            }
        };
        let rem = match BigRational::from_float(hi) {
            Some(h) => r - h,
            None => return HPReal::from_f64(hi),
        };
        let lo = rem.to_f64().unwrap_or(0.0);
        let (hi, lo) = quick_two_sum(hi, lo);
        HPReal {
            hi,
            lo,
            err: hi.abs() * UNIT_ROUNDOFF,
        }
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn err(&self) -> f64 {
        self.err
    }

    pub fn to_f64(&self) -> f64 {
        self.hi + self.lo
    }

    /// Exact rational value of `hi + lo` (ignores `err`).
    pub fn to_ratio(&self) -> Option<BigRational> {
        let hi = BigRational::from_float(self.hi)?;
        let lo = BigRational::from_float(self.lo)?;
        Some(hi + lo)
    }

    /// Widens the error bound by `extra` (absolute).
    pub fn with_extra_err(mut self, extra: f64) -> Self {
        self.err += extra.abs();
        self
    }

    pub fn is_finite(&self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.hi == 0.0
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn square(self) -> Self {
        self * self
    }

    pub fn recip(self) -> Self {
        HPReal::ONE / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                HPReal {
                    hi: 0.0,
                    lo: 0.0,
                    err: self.err.sqrt(),
                }
            } else {
                HPReal {
                    hi: f64::NAN,
                    lo: f64::NAN,
                    err: f64::INFINITY,
                }
            };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (p, e) = two_prod(ax, ax);
        let diff = HPReal::from_parts(self.hi, self.lo) - HPReal::new(p, e);
        let (hi, lo) = two_sum(ax, diff.hi * (x * 0.5));
        let r = quick_two_sum(hi, lo);
        let prop = self.err / (2.0 * ax);
        HPReal {
            hi: r.0,
            lo: r.1,
            err: prop + 2.0 * r.0.abs() * UNIT_ROUNDOFF,
        }
    }

    /// Multiplication by an exact power of two.
    fn ldexp(self, k: i32) -> Self {
        let mut out = self;
        let mut k = k;
        while k != 0 {
            let step = k.clamp(-1000, 1000);
            let f = 2f64.powi(step);
            out.hi *= f;
            out.lo *= f;
            out.err *= f;
            k -= step;
        }
        out
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.7 {
            return HPReal {
                hi: f64::INFINITY,
                lo: 0.0,
                err: f64::INFINITY,
            };
        }
        if self.hi < -745.0 {
            // e^x underflows; the true value lies in [0, 2^-1074)
            return HPReal {
                hi: 0.0,
                lo: 0.0,
                err: f64::MIN_POSITIVE,
            };
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return HPReal {
                err: self.err.exp_m1(),
                ..HPReal::ONE
            };
        }
        let k = (self.hi / LN2.hi).round();
        let core = HPReal::from_parts(self.hi, self.lo) - LN2 * HPReal::from_f64(k);
        // r = core / 512, so |r| <= ln2 / 1024
        let r = core.ldexp(-9);
        let r = HPReal::from_parts(r.hi, r.lo);
        // expm1(r) by Taylor; |r|^k / k! drops below 1e-34 well before k = 12
        let mut term = r;
        let mut sum = r;
        for i in 2..=12u32 {
            term = term * r / HPReal::from_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // expm1(2y) = 2 expm1(y) + expm1(y)^2, applied nine times
        for _ in 0..9 {
            sum = sum.ldexp(1) + sum * sum;
        }
        let out = (sum + HPReal::ONE).ldexp(k as i32);
        let v = out.hi.abs();
        let prop = v * self.err.exp_m1();
        HPReal {
            hi: out.hi,
            lo: out.lo,
            err: prop + v * TRANSCENDENTAL_ROUNDOFF,
        }
    }

    /// Natural logarithm. NaN for non-positive input.
    pub fn ln(self) -> Self {
        if !(self.hi > 0.0) {
            return HPReal {
                hi: f64::NAN,
                lo: f64::NAN,
                err: f64::INFINITY,
            };
        }
        if self.hi == 1.0 && self.lo == 0.0 {
            return HPReal {
                hi: 0.0,
                lo: 0.0,
                err: self.err / (1.0 - self.err).max(f64::MIN_POSITIVE),
            };
        }
        let a = HPReal::from_parts(self.hi, self.lo);
        let x = HPReal::from_f64(self.hi.ln());
        // one Newton step on exp(x) = a doubles the 53 correct bits
        let y = x + a * (-x).exp() - HPReal::ONE;
        let y = HPReal::from_parts(y.hi, y.lo);
        let prop = if self.err < self.hi {
            self.err / (self.hi - self.err)
        } else {
            f64::INFINITY
        };
        HPReal {
            hi: y.hi,
            lo: y.lo,
            err: prop + y.hi.abs().max(1.0) * TRANSCENDENTAL_ROUNDOFF,
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = HPReal::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    pub fn pi() -> Self {
        PI
    }

    pub fn ln2() -> Self {
        LN2
    }

    /// Decimal rendering with `sig` significant digits, rounded half away
    /// from zero from the exact binary value of `hi + lo`.
    pub fn to_decimal(&self, sig: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        let Some(value) = self.to_ratio() else {
            return format!("{}", self.hi);
        };
        if value.is_zero() {
            return "0".to_string();
        }
        format_ratio(&value, sig.max(1))
    }
}

fn format_ratio(value: &BigRational, sig: usize) -> String {
    let neg = value.is_negative();
    let v = value.abs();
    // decimal exponent estimate from the f64 image, then corrected
    let approx = v.to_f64().unwrap_or(0.0);
    let mut exp10 = if approx > 0.0 && approx.is_finite() {
        approx.log10().floor() as i64
    } else {
        0
    };
    let ten = BigInt::from(10);
    let scaled_digits = |e: i64| -> BigInt {
        let shift = sig as i64 - 1 - e;
        let scaled = if shift >= 0 {
            &v * BigRational::from_integer(num_traits::pow(ten.clone(), shift as usize))
        } else {
            &v / BigRational::from_integer(num_traits::pow(ten.clone(), (-shift) as usize))
        };
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        (scaled + half).floor().to_integer()
    };
    let mut digits = scaled_digits(exp10);
    let upper = num_traits::pow(ten.clone(), sig);
    let lower = num_traits::pow(ten.clone(), sig - 1);
    if digits >= upper {
        exp10 += 1;
        digits = scaled_digits(exp10);
    } else if digits < lower {
        exp10 -= 1;
        digits = scaled_digits(exp10);
        if digits >= upper {
            exp10 += 1;
            digits = scaled_digits(exp10);
        }
    }
    let s = digits.to_string();
    let body = if (-6..21).contains(&exp10) {
        if exp10 >= 0 {
            let int_len = exp10 as usize + 1;
            if s.len() > int_len {
                format!("{}.{}", &s[..int_len], &s[int_len..])
            } else {
                format!("{}{}", s, "0".repeat(int_len - s.len()))
            }
        } else {
            format!("0.{}{}", "0".repeat((-exp10 - 1) as usize), s)
        }
    } else {
        let (head, tail) = s.split_at(1);
        if tail.is_empty() {
            format!("{head}e{exp10}")
        } else {
            format!("{head}.{tail}e{exp10}")
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

impl fmt::Display for HPReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().unwrap_or(25);
        f.write_str(&self.to_decimal(sig))
    }
}

impl From<f64> for HPReal {
    fn from(x: f64) -> Self {
        HPReal::from_f64(x)
    }
}

impl From<u64> for HPReal {
    fn from(x: u64) -> Self {
        HPReal::from_u64(x)
    }
}

impl PartialEq for HPReal {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for HPReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl Neg for HPReal {
    type Output = HPReal;
    fn neg(self) -> HPReal {
        HPReal {
            hi: -self.hi,
            lo: -self.lo,
            err: self.err,
        }
    }
}

impl Add for HPReal {
    type Output = HPReal;
    fn add(self, b: HPReal) -> HPReal {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        HPReal {
            hi,
            lo,
            err: self.err + b.err + hi.abs() * UNIT_ROUNDOFF,
        }
    }
}

impl Sub for HPReal {
    type Output = HPReal;
    fn sub(self, b: HPReal) -> HPReal {
        self + (-b)
    }
}

impl Mul for HPReal {
    type Output = HPReal;
    fn mul(self, b: HPReal) -> HPReal {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        let err = self.hi.abs() * b.err + b.hi.abs() * self.err + self.err * b.err + 2.0 * hi.abs() * UNIT_ROUNDOFF;
        HPReal { hi, lo, err }
    }
}

impl Div for HPReal {
    type Output = HPReal;
    fn div(self, b: HPReal) -> HPReal {
        let a = HPReal::from_parts(self.hi, self.lo);
        let d = HPReal::from_parts(b.hi, b.lo);
        let q1 = a.hi / d.hi;
        let r = a - d * HPReal::from_f64(q1);
        let q2 = r.hi / d.hi;
        let r = r - d * HPReal::from_f64(q2);
        let q3 = r.hi / d.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        let q = HPReal::from_parts(q1, q2) + HPReal::from_f64(q3);
        let denom = b.hi.abs() - b.err;
        let prop = if denom > 0.0 {
            (self.err + q.hi.abs() * b.err) / denom
        } else if self.err == 0.0 && b.err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        HPReal {
            hi: q.hi,
            lo: q.lo,
            err: prop + 4.0 * q.hi.abs() * UNIT_ROUNDOFF,
        }
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for HPReal {
            type Output = HPReal;
            fn $m(self, b: f64) -> HPReal {
                $tr::$m(self, HPReal::from_f64(b))
            }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);

impl std::iter::Sum for HPReal {
    fn sum<I: Iterator<Item = HPReal>>(iter: I) -> HPReal {
        iter.fold(HPReal::ZERO, |a, b| a + b)
    }
}

impl std::iter::Product for HPReal {
    fn product<I: Iterator<Item = HPReal>>(iter: I) -> HPReal {
        iter.fold(HPReal::ONE, |a, b| a * b)
    }
}
