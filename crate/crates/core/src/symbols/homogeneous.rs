use std::collections::BTreeMap;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{One, Zero};

use super::poly::{self, Poly};
use super::{MultiIndex, SymbolError};
use crate::scalar::{ratio_to_f64, Coeff, C64};

/// One radial class `P · |z|^{−2S}` with `P` a homogeneous polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialClass<R: Coeff> {
    pub power: Ratio<i64>,
    pub poly: Poly<R>,
}

/// Exactly homogeneous function on phase space minus the origin.
///
/// Stored as a sum of radial classes, one per fractional part of the radial
/// power. Each class is reduced so that its polynomial is not divisible by
/// `|z|²` unless the power is already below one, which makes the
/// representation canonical.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousComponent<R: Coeff> {
    n: usize,
    degree: i64,
    classes: BTreeMap<Ratio<i64>, RadialClass<R>>,
}

fn frac(r: &Ratio<i64>) -> Ratio<i64> {
    r - r.floor()
}

impl<R: Coeff> HomogeneousComponent<R> {
    pub fn zero(n: usize, degree: i64) -> Self {
        Self { n, degree, classes: BTreeMap::new() }
    }

    /// Build from `(coef, monomial, s)` terms denoting `coef·z^m·|z|^{−2s}`.
    pub fn from_terms(
        n: usize,
        degree: i64,
        terms: impl IntoIterator<Item = (Complex<R>, MultiIndex, Ratio<i64>)>,
    ) -> Result<Self, SymbolError> {
        let mut out = Self::zero(n, degree);
        for (c, m, s) in terms {
            if m.dim() != 2 * n {
                return Err(SymbolError::Dimension { expected: 2 * n, found: m.dim() });
            }
            if s < Ratio::zero() {
                return Err(SymbolError::NegativeRadialPower(s.to_string()));
            }
            let d = Ratio::from_integer(m.order() as i64) - s * 2;
            if d != Ratio::from_integer(degree) {
                return Err(SymbolError::Inhomogeneous { degree, found: d.to_string() });
            }
            let mut p = Poly::new();
            poly::add_term(&mut p, m, c);
            out.add_class(RadialClass { power: s, poly: p });
        }
        Ok(out)
    }

    pub fn monomial(n: usize, c: Complex<R>, m: MultiIndex) -> Self {
        let d = m.order() as i64;
        Self::from_terms(n, d, [(c, m, Ratio::zero())]).expect("monomial is homogeneous")
    }

    /// `c·|z|^{−2s}`.
    pub fn radial(n: usize, c: Complex<R>, s: Ratio<i64>) -> Self {
        let d = -s * 2;
        assert!(d.is_integer(), "radial power must be a half integer");
        Self::from_terms(n, d.to_integer(), [(c, MultiIndex::zeros(2 * n), s)]).expect("radial term")
    }

    /// Oscillator symbol `(|x|² + |p|²)/2`.
    pub fn h2(n: usize) -> Self {
        let mut out = Self::zero(n, 2);
        let half = Complex::new(R::from_ratio(1, 2), R::zero());
        out.add_class(RadialClass { power: Ratio::zero(), poly: poly::scale(&poly::r2(2 * n), &half) });
        out
    }

    /// `c·h₂^{−k}` with `h₂ = |z|²/2`.
    pub fn h2_pow_neg(n: usize, k: i64, c: Complex<R>) -> Self {
        let scale = Complex::new(R::from_int(1i64 << k.min(62)), R::zero());
        Self::radial(n, c * scale, Ratio::from_integer(k))
    }

    /// Homogeneous polynomial of the given degree.
    pub fn from_poly(n: usize, degree: u32, p: Poly<R>) -> Result<Self, SymbolError> {
        if !poly::is_homogeneous(&p, degree) {
            return Err(SymbolError::Inhomogeneous { degree: degree as i64, found: "mixed".into() });
        }
        let mut out = Self::zero(n, degree as i64);
        out.add_class(RadialClass { power: Ratio::zero(), poly: p });
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn classes(&self) -> impl Iterator<Item = &RadialClass<R>> {
        self.classes.values()
    }

    pub fn is_zero(&self) -> bool {
        self.classes.is_empty()
    }

    /// Flattened `(coef, monomial, s)` terms.
    pub fn terms(&self) -> Vec<(Complex<R>, MultiIndex, Ratio<i64>)> {
        let mut out = Vec::new();
        for cl in self.classes.values() {
            for (m, c) in &cl.poly {
                out.push((c.clone(), m.clone(), cl.power));
            }
        }
        out
    }

    /// True when the component is a polynomial.
    pub fn is_polynomial(&self) -> bool {
        self.classes.values().all(|c| c.power.is_zero())
    }

    pub fn as_polynomial(&self) -> Option<Poly<R>> {
        if !self.is_polynomial() {
            return None;
        }
        Some(self.classes.values().next().map(|c| c.poly.clone()).unwrap_or_default())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.classes.values().map(|c| poly::max_abs(&c.poly)).fold(0.0, f64::max)
    }

    fn add_class(&mut self, cl: RadialClass<R>) {
        if cl.poly.is_empty() {
            return;
        }
        let key = frac(&cl.power);
        let dim = self.dim();
        let merged = match self.classes.remove(&key) {
            None => cl,
            Some(old) => {
                let (lo, hi) = if old.power <= cl.power { (old, cl) } else { (cl, old) };
                let gap = (hi.power - lo.power).to_integer() as u32;
                let mut p = poly::mul(&lo.poly, &poly::r2_pow(dim, gap));
                poly::add_scaled(&mut p, &hi.poly, &poly::unit());
                RadialClass { power: hi.power, poly: p }
            }
        };
        if let Some(c) = canonical(merged, dim) {
            self.classes.insert(key, c);
        }
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.n, other.n, "phase-space dimension mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch in sum");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut out = self.clone();
        for cl in other.classes.values() {
            out.add_class(cl.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-poly::unit::<R>())
    }

    pub fn scale(&self, s: &Complex<R>) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        for cl in self.classes.values() {
            out.add_class(RadialClass { power: cl.power, poly: poly::scale(&cl.poly, s) });
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "phase-space dimension mismatch");
        let mut out = Self::zero(self.n, self.degree + other.degree);
        for a in self.classes.values() {
            for b in other.classes.values() {
                out.add_class(RadialClass { power: a.power + b.power, poly: poly::mul(&a.poly, &b.poly) });
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.n, poly::unit());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn constant(n: usize, c: Complex<R>) -> Self {
        Self::monomial(n, c, MultiIndex::zeros(2 * n))
    }

    /// Partial derivative along a zero-based axis (`x_j` is `j`, `p_j` is `n + j`).
    pub fn diff(&self, axis: usize) -> Self {
        assert!(axis < self.dim(), "axis out of range");
        let dim = self.dim();
        let mut out = Self::zero(self.n, self.degree - 1);
        for cl in self.classes.values() {
            let dp = poly::deriv(&cl.poly, axis);
            if cl.power.is_zero() {
                out.add_class(RadialClass { power: cl.power, poly: dp });
                continue;
            }
            let mut p = poly::mul(&dp, &poly::r2(dim));
            let two_s = Complex::new(-R::from_rational(&(cl.power * 2)), R::zero());
            poly::add_scaled(&mut p, &poly::shift(&cl.poly, axis), &two_s);
            out.add_class(RadialClass { power: cl.power + 1, poly: p });
        }
        out
    }

    /// Derivative by a multi-index over all `2n` axes.
    pub fn diff_multi(&self, alpha: &MultiIndex) -> Self {
        let mut out = self.clone();
        for (axis, e) in alpha.0.iter().enumerate() {
            for _ in 0..*e {
                out = out.diff(axis);
            }
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> Result<C64, SymbolError> {
        if point.len() != self.dim() {
            return Err(SymbolError::Dimension { expected: self.dim(), found: point.len() });
        }
        let r2: f64 = point.iter().map(|x| x * x).sum();
        let mut acc = C64::new(0.0, 0.0);
        for cl in self.classes.values() {
            let (re, im) = poly::eval_f64(&cl.poly, point);
            let f = if cl.power.is_zero() {
                1.0
            } else {
                if r2 == 0.0 {
                    return Err(SymbolError::SingularPoint);
                }
                r2.powf(-ratio_to_f64(&cl.power))
            };
            acc += C64::new(re * f, im * f);
        }
        Ok(acc)
    }

    /// Substitute `z ↦ M z` for an orthogonal real `M`, which preserves `|z|`.
    pub fn pullback_orthogonal(&self, m: &[Vec<R>]) -> Self {
        assert_eq!(m.len(), self.dim());
        let mut out = Self::zero(self.n, self.degree);
        for cl in self.classes.values() {
            out.add_class(RadialClass { power: cl.power, poly: poly::pullback(&cl.poly, m) });
        }
        out
    }

    pub fn map_coeffs<S: Coeff>(&self, f: impl Fn(&R) -> S) -> HomogeneousComponent<S> {
        let mut out = HomogeneousComponent::zero(self.n, self.degree);
        for cl in self.classes.values() {
            out.add_class(RadialClass { power: cl.power, poly: poly::map_coeffs(&cl.poly, &f) });
        }
        out
    }

    pub fn to_f64(&self) -> HomogeneousComponent<f64> {
        self.map_coeffs(|c| c.to_f64())
    }
}

fn canonical<R: Coeff>(mut cl: RadialClass<R>, dim: usize) -> Option<RadialClass<R>> {
    if !R::EXACT {
        let tol = 1e-15 * poly::max_abs(&cl.poly);
        cl.poly.retain(|_, c| c.re.to_f64().hypot(c.im.to_f64()) > tol);
    }
    if cl.poly.is_empty() {
        return None;
    }
    while cl.power >= Ratio::one() {
        match poly::div_r2(&cl.poly, dim) {
            Some(q) => {
                cl.poly = q;
                cl.power -= 1;
            }
            None => break,
        }
    }
    Some(cl)
}
