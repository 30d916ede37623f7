//! Scalar backings shared by the symbolic and numeric engines.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::{BigRational, Ratio};
use num_traits::{Float, FloatConst, FromPrimitive, Num, One, ToPrimitive, Zero};

/// Real coefficient field for symbol arithmetic: floats or exact rationals.
pub trait Coeff: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// True when arithmetic is exact, so zero tests are meaningful.
    const EXACT: bool;

    fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    fn from_rational(r: &Ratio<i64>) -> Self {
        Self::from_ratio(*r.numer(), *r.denom())
    }

    /// Parse a decimal literal such as `-1.25e-3`.
    fn parse_decimal(s: &str) -> Option<Self>;
}

impl Coeff for f64 {
    const EXACT: bool = false;
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coeff for f32 {
    const EXACT: bool = false;
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Coeff for BigRational {
    const EXACT: bool = true;
    fn parse_decimal(s: &str) -> Option<Self> {
        parse_decimal_exact(s)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

fn parse_decimal_exact(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().ok()? / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

/// Parse a rational literal `p/q` or an integer.
pub fn parse_ratio(s: &str) -> Option<Ratio<i64>> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            (q != 0).then(|| Ratio::new(p, q))
        }
        None => s.parse().ok().map(Ratio::from_integer),
    }
}

/// Floating scalar used by the Fock engine and the group module.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Default + Send + Sync + Sum + 'static
{
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("representable literal")
    }
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C64 = Complex<f64>;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn czero<T: Num + Clone>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub fn cone<T: Num + Clone>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// Complex unit `i` in any coefficient field.
pub fn ci<T: Num + Clone>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

pub fn is_czero<T: Num + Clone + PartialEq>(z: &Complex<T>) -> bool {
    z.re.is_zero() && z.im.is_zero()
}

/// `i^k` for integer `k`.
pub fn ipow<T: Num + Clone + Neg<Output = T>>(k: i64) -> Complex<T> {
    match k.rem_euclid(4) {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

pub fn factorial_u128(k: u32) -> u128 {
    (1..=k as u128).product::<u128>().max(1)
}

pub fn binomial_i64(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc as i64
}

/// Generalized binomial coefficient `binom(a, k)` for rational `a`.
pub fn binomial_ratio(a: Ratio<i64>, k: u32) -> Ratio<i64> {
    let mut acc = Ratio::one();
    for i in 0..k {
        acc = acc * (a - Ratio::from_integer(i as i64)) / Ratio::from_integer(i as i64 + 1);
    }
    acc
}

pub fn ratio_to_f64(r: &Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn ratio_zero() -> Ratio<i64> {
    Ratio::zero()
}

pub fn to_c64<R: Coeff>(z: &Complex<R>) -> C64 {
    c64(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<T: Real>(z: C64) -> Complex<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}

pub fn to_c64_real<T: Real>(z: Complex<T>) -> C64 {
    c64(z.re.as_f64(), z.im.as_f64())
}
