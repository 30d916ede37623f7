use std::collections::HashMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::homogeneous::HomogeneousComponent;
use super::poly::{self, Poly};
use super::{compositions, MultiIndex, SymbolError};
use crate::scalar::{Coeff, C64};

/// Composition convention for symbol products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Standard,
    Weyl,
}

/// Integer-order classical symbol `a ∼ Σ_j a_{order−j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSymbol<R: Coeff> {
    n: usize,
    order: i64,
    components: Vec<HomogeneousComponent<R>>,
}

impl<R: Coeff> ClassicalSymbol<R> {
    pub fn new(n: usize, order: i64, components: Vec<HomogeneousComponent<R>>) -> Result<Self, SymbolError> {
        if components.is_empty() {
            return Err(SymbolError::MissingPrincipal);
        }
        for (j, c) in components.iter().enumerate() {
            if c.n() != n {
                return Err(SymbolError::Dimension { expected: 2 * n, found: c.dim() });
            }
            if c.degree() != order - j as i64 {
                return Err(SymbolError::Inhomogeneous { degree: order - j as i64, found: c.degree().to_string() });
            }
        }
        Ok(Self { n, order, components })
    }

    pub fn zero(n: usize, order: i64) -> Self {
        Self { n, order, components: vec![HomogeneousComponent::zero(n, order)] }
    }

    pub fn constant(n: usize, c: Complex<R>) -> Self {
        Self { n, order: 0, components: vec![HomogeneousComponent::constant(n, c)] }
    }

    pub fn from_component(c: HomogeneousComponent<R>) -> Self {
        Self { n: c.n(), order: c.degree(), components: vec![c] }
    }

    /// Split a polynomial into homogeneous components.
    pub fn from_poly(n: usize, p: &Poly<R>) -> Self {
        let Some(top) = poly::degree(p) else {
            return Self::zero(n, 0);
        };
        let mut comps = Vec::new();
        for d in (0..=top).rev() {
            let part: Poly<R> = p.iter().filter(|(m, _)| m.order() == d).map(|(m, c)| (m.clone(), c.clone())).collect();
            comps.push(HomogeneousComponent::from_poly(n, d, part).expect("graded part"));
        }
        Self { n, order: top as i64, components: comps }
    }

    /// Oscillator symbol `(|x|² + |p|²)/2`.
    pub fn oscillator(n: usize) -> Self {
        Self::from_component(HomogeneousComponent::h2(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn components(&self) -> &[HomogeneousComponent<R>] {
        &self.components
    }

    pub fn principal(&self) -> &HomogeneousComponent<R> {
        &self.components[0]
    }

    /// Component of degree `order − j`, zero when beyond the stored range.
    pub fn component(&self, j: usize) -> HomogeneousComponent<R> {
        self.components.get(j).cloned().unwrap_or_else(|| HomogeneousComponent::zero(self.n, self.order - j as i64))
    }

    /// Component of the given degree.
    pub fn of_degree(&self, d: i64) -> HomogeneousComponent<R> {
        let j = self.order - d;
        if j < 0 {
            HomogeneousComponent::zero(self.n, d)
        } else {
            self.component(j as usize)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn truncated(&self, len: usize) -> Self {
        let mut comps: Vec<_> = (0..len.max(1)).map(|j| self.component(j)).collect();
        comps.truncate(len.max(1));
        Self { n: self.n, order: self.order, components: comps }
    }

    /// Re-express with a higher declared order, padding zero components.
    pub fn with_order(&self, order: i64) -> Self {
        assert!(order >= self.order);
        let pad = (order - self.order) as usize;
        let mut comps: Vec<_> = (0..pad).map(|j| HomogeneousComponent::zero(self.n, order - j as i64)).collect();
        comps.extend(self.components.iter().cloned());
        Self { n: self.n, order, components: comps }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let order = self.order.max(other.order);
        let a = self.with_order(order);
        let b = other.with_order(order);
        let len = a.components.len().max(b.components.len());
        let comps = (0..len).map(|j| a.component(j).add(&b.component(j))).collect();
        Self { n: self.n, order, components: comps }
    }

    pub fn scale(&self, s: &Complex<R>) -> Self {
        Self { n: self.n, order: self.order, components: self.components.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn eval(&self, point: &[f64]) -> Result<C64, SymbolError> {
        let mut acc = C64::new(0.0, 0.0);
        for c in &self.components {
            acc += c.eval(point)?;
        }
        Ok(acc)
    }

    pub fn map_coeffs<S: Coeff>(&self, f: impl Fn(&R) -> S + Copy) -> ClassicalSymbol<S> {
        ClassicalSymbol { n: self.n, order: self.order, components: self.components.iter().map(|c| c.map_coeffs(f)).collect() }
    }

    pub fn to_f64(&self) -> ClassicalSymbol<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn pullback_orthogonal(&self, m: &[Vec<R>]) -> Self {
        Self {
            n: self.n,
            order: self.order,
            components: self.components.iter().map(|c| c.pullback_orthogonal(m)).collect(),
        }
    }
}

/// Memoized derivatives of the components of a symbol.
pub(crate) struct DerivCache<'a, R: Coeff> {
    sym: &'a ClassicalSymbol<R>,
    cache: HashMap<(usize, MultiIndex), HomogeneousComponent<R>>,
}

impl<'a, R: Coeff> DerivCache<'a, R> {
    pub(crate) fn new(sym: &'a ClassicalSymbol<R>) -> Self {
        Self { sym, cache: HashMap::new() }
    }

    pub(crate) fn get(&mut self, j: usize, alpha: &MultiIndex) -> HomogeneousComponent<R> {
        if let Some(c) = self.cache.get(&(j, alpha.clone())) {
            return c.clone();
        }
        let out = match alpha.0.iter().position(|e| *e > 0) {
            None => self.sym.component(j),
            Some(axis) => {
                let mut lower = alpha.clone();
                lower.0[axis] -= 1;
                self.get(j, &lower).diff(axis)
            }
        };
        self.cache.insert((j, alpha.clone()), out.clone());
        out
    }
}

/// Embed an `n`-index over x or p into a `2n`-index.
pub(crate) fn embed(n: usize, x: &[u32], p: &[u32]) -> MultiIndex {
    let mut v = vec![0u32; 2 * n];
    v[..n].copy_from_slice(x);
    v[n..].copy_from_slice(p);
    MultiIndex(v)
}

/// Asymptotic composition `a # b` keeping the first `n_terms` components.
pub fn symbol_compose<R: Coeff>(
    a: &ClassicalSymbol<R>,
    b: &ClassicalSymbol<R>,
    n_terms: usize,
    convention: Convention,
) -> ClassicalSymbol<R> {
    assert_eq!(a.n, b.n, "symbols act on different dimensions");
    let n = a.n;
    let order = a.order + b.order;
    let mut da = DerivCache::new(a);
    let mut db = DerivCache::new(b);
    let zeros = vec![0u32; n];
    let mut comps = Vec::with_capacity(n_terms);
    for j in 0..n_terms {
        let mut acc = HomogeneousComponent::zero(n, order - j as i64);
        for i in 0..=j {
            for k in 0..=(j - i) {
                let rest = j - i - k;
                if rest % 2 == 1 {
                    continue;
                }
                let r = (rest / 2) as u32;
                match convention {
                    Convention::Standard => {
                        for alpha in compositions(n, r) {
                            let fa = da.get(i, &embed(n, &zeros, &alpha));
                            if fa.is_zero() {
                                continue;
                            }
                            let fb = db.get(k, &embed(n, &alpha, &zeros));
                            if fb.is_zero() {
                                continue;
                            }
                            let w = crate::scalar::ipow::<R>(-(r as i64)) * inv_factorial::<R>(&alpha);
                            acc = acc.add(&fa.mul(&fb).scale(&w));
                        }
                    }
                    Convention::Weyl => {
                        for ra in 0..=r {
                            for alpha in compositions(n, ra) {
                                for beta in compositions(n, r - ra) {
                                    let fa = da.get(i, &embed(n, &beta, &alpha));
                                    if fa.is_zero() {
                                        continue;
                                    }
                                    let fb = db.get(k, &embed(n, &alpha, &beta));
                                    if fb.is_zero() {
                                        continue;
                                    }
                                    let sign = if (r - ra).is_multiple_of(2) { 1 } else { -1 };
                                    let half = R::from_ratio(1, 1i64 << r);
                                    let w = crate::scalar::ipow::<R>(-(r as i64))
                                        * Complex::new(half * R::from_int(sign), R::zero())
                                        * inv_factorial::<R>(&alpha)
                                        * inv_factorial::<R>(&beta);
                                    acc = acc.add(&fa.mul(&fb).scale(&w));
                                }
                            }
                        }
                    }
                }
            }
        }
        comps.push(acc);
    }
    ClassicalSymbol { n, order, components: comps }
}

pub(crate) fn inv_factorial<R: Coeff>(alpha: &[u32]) -> Complex<R> {
    let f: i64 = alpha.iter().map(|a| crate::scalar::factorial_u128(*a) as i64).product();
    Complex::new(R::from_ratio(1, f), R::zero())
}

impl<R: Coeff> ClassicalSymbol<R> {
    /// Convenience alias for [`symbol_compose`].
    pub fn compose(&self, other: &Self, n_terms: usize, convention: Convention) -> Self {
        symbol_compose(self, other, n_terms, convention)
    }

    /// Number of trailing zero components.
    pub fn trailing_zero_count(&self) -> usize {
        self.components.iter().rev().take_while(|c| c.is_zero()).count()
    }

    pub fn is_zero_through(&self, len: usize) -> bool {
        (0..len).all(|j| self.component(j).is_zero())
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.components.iter().position(|c| !c.is_zero())
    }

    pub fn zero_like(&self) -> Complex<R> {
        Complex::new(R::zero(), R::zero())
    }
}
