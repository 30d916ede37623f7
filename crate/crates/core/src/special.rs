//! Gamma-type special functions on complex arguments.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::{c64, C64};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` on the principal branch, with reflection for `Re z < 1/2`.
pub fn ln_gamma_c(z: C64) -> C64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        return c64(PI.ln(), 0.0) - (z * PI).sin().ln() - ln_gamma_c(c64(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = c64(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    c64(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma_c(z: C64) -> C64 {
    if z.re < 0.5 {
        return PI / ((z * PI).sin() * gamma_c(c64(1.0, 0.0) - z));
    }
    ln_gamma_c(z).exp()
}

/// `ln Γ(x)` for real `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_c(c64(x, 0.0)).re
}

/// `1/Γ(z)`, entire.
pub fn rgamma_c(z: C64) -> C64 {
    if z.re <= 0.0 && z.im == 0.0 && z.re == z.re.round() {
        return c64(0.0, 0.0);
    }
    if z.re < 0.5 {
        return (z * PI).sin() * gamma_c(c64(1.0, 0.0) - z) / PI;
    }
    (-ln_gamma_c(z)).exp()
}

/// Upper incomplete gamma `Γ(s, x)` for real `x > 0`.
pub fn upper_gamma(s: C64, x: f64) -> C64 {
    assert!(x > 0.0, "upper_gamma needs x > 0");
    let xs = (s * x.ln() - x).exp();
    if x > 1.5 + s.norm() {
        // modified Lentz on the Legendre continued fraction
        let tiny = 1e-300;
        let mut b = c64(x + 1.0, 0.0) - s;
        let mut c = c64(1.0 / tiny, 0.0);
        let mut d = c64(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (c64(i as f64, 0.0) - s);
            b += 2.0;
            d = an * d + b;
            if d.norm() < tiny {
                d = c64(tiny, 0.0);
            }
            c = b + an / c;
            if c.norm() < tiny {
                c = c64(tiny, 0.0);
            }
            d = c64(1.0, 0.0) / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).norm() < 1e-16 {
                break;
            }
        }
        return xs * h;
    }
    // Γ(s) − γ(s, x) with the power series of γ
    let mut term = c64(1.0, 0.0) / s;
    let mut sum = term;
    for k in 1..10_000 {
        term = term * x / (s + k as f64);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    gamma_c(s) - xs * sum
}

/// `ψ′(x)` for real `x` off the non-positive integers.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 0.0 {
        // ψ′(x) = ψ′(x+1) + 1/x²
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    acc += trigamma_c(c64(x, 0.0)).re;
    acc
}

/// `ψ′(z)` for `Re z ≥ 0`, `z ≠ 0`.
pub fn trigamma_c(mut z: C64) -> C64 {
    let mut acc = c64(0.0, 0.0);
    while z.norm() < 12.0 {
        acc += c64(1.0, 0.0) / (z * z);
        z += 1.0;
    }
    let inv = c64(1.0, 0.0) / z;
    let inv2 = inv * inv;
    // asymptotic series with Bernoulli numbers B₂…B₁₀
    let series = inv
        + inv2 * 0.5
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0)))));
    acc + series
}

/// `∫_{S^{d−1}} x^α dS` on the unit sphere of `ℝ^d`, zero unless all exponents are even.
pub fn sphere_moment(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let total: u32 = alpha.iter().sum();
    let num: f64 = alpha.iter().map(|&a| gamma_half(a + 1)).product();
    2.0 * num / gamma_half(total + alpha.len() as u32)
}

/// `Γ(k/2)` for a positive integer `k`, by the exact recurrence.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "Γ(0) is singular");
    let (mut acc, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while 2.0 * x < k as f64 {
        acc *= x;
        x += 1.0;
    }
    acc
}

/// Surface area of `S^{d−1}`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d as u32)
}

/// Round to the nearest multiple of `2^{−bits}`.
pub fn round_dyadic(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = (x * BigRational::from_integer(scale.clone())).round();
    BigRational::new(scaled.to_integer(), scale)
}

/// `e^x` to about `bits` bits, by halving, Taylor series and squaring.
pub fn exp_q(x: &BigRational, bits: u32) -> BigRational {
    let work = bits + 32;
    let half = BigRational::new(1.into(), 2.into());
    let mut y = x.clone();
    let mut k = 0;
    while y.abs() > half {
        y /= BigRational::from_integer(2.into());
        k += 1;
    }
    let eps = BigRational::new(1.into(), BigInt::one() << work);
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut i = 1u32;
    while term.abs() > eps {
        term = round_dyadic(&(term * &y / BigRational::from_integer(i.into())), work);
        sum += &term;
        i += 1;
    }
    for _ in 0..k {
        sum = round_dyadic(&(&sum * &sum), work);
    }
    round_dyadic(&sum, bits)
}

/// `2 atanh(y) = 2 Σ y^{2i+1}/(2i+1)` for `|y| ≤ 1/3`.
fn two_atanh(y: &BigRational, work: u32) -> BigRational {
    let eps = BigRational::new(1.into(), BigInt::one() << work);
    let y2 = y * y;
    let mut power = y.clone();
    let mut sum = BigRational::zero();
    let mut i = 0u32;
    while power.abs() > eps {
        sum += &power / BigRational::from_integer((2 * i + 1).into());
        power = round_dyadic(&(power * &y2), work);
        i += 1;
    }
    sum * BigRational::from_integer(2.into())
}

/// `ln x` for rational `x > 0` to about `bits` bits.
pub fn ln_q(x: &BigRational, bits: u32) -> BigRational {
    assert!(x.is_positive(), "ln_q needs x > 0");
    let work = bits + 32;
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    let mut m = x.clone();
    let mut k: i64 = x.numer().bits() as i64 - x.denom().bits() as i64;
    if k >= 0 {
        m /= BigRational::from_integer(BigInt::one() << k as u64);
    } else {
        m *= BigRational::from_integer(BigInt::one() << (-k) as u64);
    }
    while m >= two {
        m /= &two;
        k += 1;
    }
    while m < one {
        m *= &two;
        k -= 1;
    }
    let y = (&m - &one) / (&m + &one);
    let ln2 = two_atanh(&BigRational::new(1.into(), 3.into()), work);
    let v = two_atanh(&y, work) + ln2 * BigRational::from_integer(k.into());
    round_dyadic(&v, bits)
}
