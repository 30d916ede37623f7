//! Sparse complex polynomials in the phase-space variables `x₁…xₙ, p₁…pₙ`.

use std::collections::BTreeMap;

use num_complex::Complex;


use super::MultiIndex;
use crate::scalar::{czero, is_czero, Coeff};

pub type Poly<R> = BTreeMap<MultiIndex, Complex<R>>;

pub fn add_term<R: Coeff>(p: &mut Poly<R>, m: MultiIndex, c: Complex<R>) {
    if is_czero(&c) {
        return;
    }
    match p.get_mut(&m) {
        Some(v) => {
            *v = v.clone() + c;
            if is_czero(v) {
                p.remove(&m);
            }
        }
        None => {
            p.insert(m, c);
        }
    }
}

pub fn add_scaled<R: Coeff>(p: &mut Poly<R>, q: &Poly<R>, s: &Complex<R>) {
    for (m, c) in q {
        add_term(p, m.clone(), c.clone() * s.clone());
    }
}

pub fn mul<R: Coeff>(a: &Poly<R>, b: &Poly<R>) -> Poly<R> {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            add_term(&mut out, ma.add(mb), ca.clone() * cb.clone());
        }
    }
    out
}

pub fn scale<R: Coeff>(a: &Poly<R>, s: &Complex<R>) -> Poly<R> {
    let mut out = Poly::new();
    add_scaled(&mut out, a, s);
    out
}

pub fn deriv<R: Coeff>(a: &Poly<R>, axis: usize) -> Poly<R> {
    let mut out = Poly::new();
    for (m, c) in a {
        let e = m.0[axis];
        if e == 0 {
            continue;
        }
        let mut mm = m.clone();
        mm.0[axis] -= 1;
        add_term(&mut out, mm, c.clone() * Complex::new(R::from_int(e as i64), R::zero()));
    }
    out
}

/// `z_axis · a`.
pub fn shift<R: Coeff>(a: &Poly<R>, axis: usize) -> Poly<R> {
    a.iter()
        .map(|(m, c)| {
            let mut mm = m.clone();
            mm.0[axis] += 1;
            (mm, c.clone())
        })
        .collect()
}

/// `|z|² = Σ z_i²` in `dim` variables.
pub fn r2<R: Coeff>(dim: usize) -> Poly<R> {
    let mut out = Poly::new();
    for i in 0..dim {
        let mut m = MultiIndex::zeros(dim);
        m.0[i] = 2;
        out.insert(m, Complex::new(R::one(), R::zero()));
    }
    out
}

pub fn r2_pow<R: Coeff>(dim: usize, k: u32) -> Poly<R> {
    let mut out = constant(dim, Complex::new(R::one(), R::zero()));
    let base = r2::<R>(dim);
    for _ in 0..k {
        out = mul(&out, &base);
    }
    out
}

pub fn constant<R: Coeff>(dim: usize, c: Complex<R>) -> Poly<R> {
    let mut out = Poly::new();
    add_term(&mut out, MultiIndex::zeros(dim), c);
    out
}

/// Exact division by `|z|²`, or `None` when a remainder is left.
///
/// For floating coefficients, remainders below `tol` relative to the input
/// scale count as zero.
pub fn div_r2<R: Coeff>(a: &Poly<R>, dim: usize) -> Option<Poly<R>> {
    if a.is_empty() {
        return Some(Poly::new());
    }
    let scale = a.values().map(|c| c.re.to_f64().abs().max(c.im.to_f64().abs())).fold(0.0, f64::max);
    let mut rem = a.clone();
    let mut quo = Poly::new();
    loop {
        let lead = rem.iter().filter(|(m, _)| m.0[0] >= 2).max_by_key(|(m, _)| m.0[0]).map(|(m, c)| (m.clone(), c.clone()));
        let Some((m, c)) = lead else { break };
        let mut q = m.clone();
        q.0[0] -= 2;
        add_term(&mut quo, q.clone(), c.clone());
        for i in 0..dim {
            let mut t = q.clone();
            t.0[i] += 2;
            add_term(&mut rem, t, -c.clone());
        }
        if !R::EXACT {
            rem.remove(&m);
        }
    }
    if R::EXACT {
        if rem.is_empty() {
            Some(quo)
        } else {
            None
        }
    } else {
        let tol = 1e-13 * scale.max(1e-300);
        let small = rem.values().all(|c| c.re.to_f64().abs() <= tol && c.im.to_f64().abs() <= tol);
        small.then_some(quo)
    }
}

pub fn eval_f64<R: Coeff>(a: &Poly<R>, point: &[f64]) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    for (m, c) in a {
        let mut v = 1.0;
        for (e, x) in m.0.iter().zip(point) {
            v *= x.powi(*e as i32);
        }
        re += c.re.to_f64() * v;
        im += c.im.to_f64() * v;
    }
    (re, im)
}

/// Substitute `z ↦ M z` (row-major `M`, square of size `dim`).
pub fn pullback<R: Coeff>(a: &Poly<R>, m: &[Vec<R>]) -> Poly<R> {
    let dim = m.len();
    let images: Vec<Poly<R>> = (0..dim)
        .map(|i| {
            let mut p = Poly::new();
            for (j, v) in m[i].iter().enumerate() {
                let mut e = MultiIndex::zeros(dim);
                e.0[j] = 1;
                add_term(&mut p, e, Complex::new(v.clone(), R::zero()));
            }
            p
        })
        .collect();
    let mut out = Poly::new();
    for (mono, c) in a {
        let mut acc = constant(dim, c.clone());
        for (i, e) in mono.0.iter().enumerate() {
            for _ in 0..*e {
                acc = mul(&acc, &images[i]);
            }
        }
        add_scaled(&mut out, &acc, &Complex::new(R::one(), R::zero()));
    }
    out
}

pub fn map_coeffs<R: Coeff, S: Coeff>(a: &Poly<R>, f: impl Fn(&R) -> S) -> Poly<S> {
    let mut out = Poly::new();
    for (m, c) in a {
        add_term(&mut out, m.clone(), Complex::new(f(&c.re), f(&c.im)));
    }
    out
}

pub fn degree<R>(a: &Poly<R>) -> Option<u32> {
    a.keys().map(|m| m.order()).max()
}

pub fn is_homogeneous<R>(a: &Poly<R>, d: u32) -> bool {
    a.keys().all(|m| m.order() == d)
}

pub fn max_abs<R: Coeff>(a: &Poly<R>) -> f64 {
    a.values().map(|c| c.re.to_f64().hypot(c.im.to_f64())).fold(0.0, f64::max)
}

pub fn zero_like<R: Coeff>() -> Complex<R> {
    czero()
}

pub fn unit<R: Coeff>() -> Complex<R> {
    Complex::new(R::one(), R::zero())
}

pub fn is_zero_poly<R: Coeff>(a: &Poly<R>) -> bool {
    a.values().all(|c| c.re.is_zero() && c.im.is_zero())
}

pub fn one_monomial(dim: usize) -> MultiIndex {
    MultiIndex::zeros(dim)
}

pub fn scalar_one<R: Coeff>() -> R {
    R::one()
}
