//! Scalar backends: exact Gaussian rationals and tolerance-based complex floats.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;
use std::fmt::Debug;

pub type Q = BigRational;
pub type ExactComplex = Complex<Q>;

/// Float tolerance used by [`Complex64`] comparisons.
pub const FLOAT_EPS: f64 = 1e-9;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let v = Q::new(n, d);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Q::from_integer)
}

pub fn fmt_q(v: &Q) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

pub fn q_to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Serializes a float with 17 significant digits.
pub fn float_value(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str::<serde_json::Number>(&format!("{:.16e}", x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Field operations needed by integrals, products and comparisons.
pub trait Scalar: Clone + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_q(v: &Q) -> Self;
    fn from_parts(re: &Q, im: &Q) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, v: &Q) -> Self;
    fn div_q(&self, v: &Q) -> Self;
    fn conj(&self) -> Self;
    fn approx_eq(&self, o: &Self) -> bool;
    fn to_c64(&self) -> Complex64;
    /// True when the value is real and at least zero.
    fn is_real_nonneg(&self) -> bool;
    /// Compares real parts, `self ≤ o`, with the backend tolerance.
    fn real_le(&self, o: &Self) -> bool;
    /// `exp(2πi p)`; `None` when the exact backend cannot represent it.
    fn root_of_unity(p: &Q) -> Option<Self>;
    fn to_value(&self) -> Value;
    /// True for backends where equality is exact.
    fn exact() -> bool;

    fn is_zero(&self) -> bool {
        self.approx_eq(&Self::zero())
    }

    fn norm_sqr(&self) -> Self {
        self.mul(&self.conj())
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    fn conj_pow(&self, times: usize) -> Self {
        if times % 2 == 1 {
            self.conj()
        } else {
            self.clone()
        }
    }
}

impl Scalar for ExactComplex {
    fn zero() -> Self {
        Complex::new(Q::zero(), Q::zero())
    }
    fn one() -> Self {
        Complex::new(Q::one(), Q::zero())
    }
    fn from_q(v: &Q) -> Self {
        Complex::new(v.clone(), Q::zero())
    }
    fn from_parts(re: &Q, im: &Q) -> Self {
        Complex::new(re.clone(), im.clone())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, v: &Q) -> Self {
        Complex::new(&self.re * v, &self.im * v)
    }
    fn div_q(&self, v: &Q) -> Self {
        Complex::new(&self.re / v, &self.im / v)
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -&self.im)
    }
    fn approx_eq(&self, o: &Self) -> bool {
        self == o
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }
    fn is_real_nonneg(&self) -> bool {
        self.im.is_zero() && !self.re.is_negative()
    }
    fn real_le(&self, o: &Self) -> bool {
        self.re <= o.re
    }
    fn root_of_unity(p: &Q) -> Option<Self> {
        let frac = p - p.floor();
        let four = &frac * qi(4);
        if !four.is_integer() {
            return None;
        }
        let (re, im) = match four.to_integer().to_i64()? {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        Some(Complex::new(qi(re), qi(im)))
    }
    fn to_value(&self) -> Value {
        if self.im.is_zero() {
            Value::String(fmt_q(&self.re))
        } else {
            Value::Array(vec![Value::String(fmt_q(&self.re)), Value::String(fmt_q(&self.im))])
        }
    }
    fn exact() -> bool {
        true
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_q(v: &Q) -> Self {
        Complex64::new(q_to_f64(v), 0.0)
    }
    fn from_parts(re: &Q, im: &Q) -> Self {
        Complex64::new(q_to_f64(re), q_to_f64(im))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, v: &Q) -> Self {
        self * q_to_f64(v)
    }
    fn div_q(&self, v: &Q) -> Self {
        self / q_to_f64(v)
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn approx_eq(&self, o: &Self) -> bool {
        (self - o).norm() <= FLOAT_EPS
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn is_real_nonneg(&self) -> bool {
        self.im.abs() <= FLOAT_EPS && self.re >= -FLOAT_EPS
    }
    fn real_le(&self, o: &Self) -> bool {
        self.re <= o.re + FLOAT_EPS
    }
    fn root_of_unity(p: &Q) -> Option<Self> {
        let frac = p - p.floor();
        let angle = 2.0 * std::f64::consts::PI * q_to_f64(&frac);
        Some(Complex64::new(angle.cos(), angle.sin()))
    }
    fn to_value(&self) -> Value {
        if self.im.abs() <= FLOAT_EPS {
            float_value(self.re)
        } else {
            Value::Array(vec![float_value(self.re), float_value(self.im)])
        }
    }
    fn exact() -> bool {
        false
    }
}

/// Backend selection for front ends.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ScalarMode {
    #[default]
    Exact,
    Float { eps: f64 },
}
