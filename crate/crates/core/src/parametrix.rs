//! Weakly parametric symbols `Σ d·(h_𝔪 + μ^𝔪)^{−L}`: resolvent parametrix,
//! composition with classical symbols, and expansion at `μ = ∞`.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{binomial_ratio, ipow, Coeff, C64};
use crate::symbols::format::ComponentSpec;
use crate::symbols::{compositions, embed, inv_factorial, ClassicalSymbol, HomogeneousComponent, MultiIndex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParametrixError {
    #[error("order of h must be at least 1, found {0}")]
    Order(i64),
    #[error("principal symbol is not positive on the unit sphere (value {0} at a sample)")]
    NotPositive(String),
    #[error("terms carry mixed μ-exponents {0} and {1}")]
    MixedExponents(i64, i64),
    #[error("dimension mismatch")]
    Dimension,
}

/// One term `d·(h_𝔪 + μ^𝔪)^{−K−ℓ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricTerm<R: Coeff> {
    pub d: HomogeneousComponent<R>,
    pub ell: i64,
    pub base_power: i64,
    pub m: i64,
    pub drop: u32,
}

impl<R: Coeff> ParametricTerm<R> {
    pub fn power(&self) -> i64 {
        self.base_power + self.ell
    }

    /// Formal bi-orders `(deg d − 𝔪(K+ℓ), 0)` and `(deg d, −𝔪(K+ℓ))`.
    pub fn bi_orders(&self) -> [(i64, i64); 2] {
        let e = self.m * self.power();
        [(self.d.degree() - e, 0), (self.d.degree(), -e)]
    }
}

/// Sum of parametric terms over a fixed `h_𝔪`, grouped by (drop, power).
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricSymbol<R: Coeff> {
    n: usize,
    m: i64,
    h_principal: HomogeneousComponent<R>,
    /// Total homogeneity of the drop-0 terms.
    top: i64,
    base_power: i64,
    terms: BTreeMap<(u32, i64), HomogeneousComponent<R>>,
    remainder_order: u32,
}

impl<R: Coeff> ParametricSymbol<R> {
    fn empty(h_principal: &HomogeneousComponent<R>, top: i64, base_power: i64, remainder_order: u32) -> Self {
        Self {
            n: h_principal.n(),
            m: h_principal.degree(),
            h_principal: h_principal.clone(),
            top,
            base_power,
            terms: BTreeMap::new(),
            remainder_order,
        }
    }

    /// Classical symbol viewed as a parametric symbol with power 0.
    pub fn from_classical(a: &ClassicalSymbol<R>, h: &ClassicalSymbol<R>, n_drop: u32) -> Self {
        let mut out = Self::empty(h.principal(), a.order(), 0, n_drop);
        for j in 0..(n_drop as usize).min(a.components().len()) {
            out.push(j as u32, 0, a.component(j));
        }
        out
    }

    /// The factor `h + μ^𝔪` itself.
    pub fn shifted_operator(h: &ClassicalSymbol<R>, n_drop: u32) -> Self {
        let mut out = Self::empty(h.principal(), h.order(), 0, n_drop);
        if n_drop > 0 {
            out.push(0, -1, HomogeneousComponent::constant(h.n(), Complex::one()));
        }
        for k in 1..(n_drop as usize).min(h.components().len()) {
            out.push(k as u32, 0, h.component(k));
        }
        out
    }

    fn push(&mut self, drop: u32, power: i64, d: HomogeneousComponent<R>) {
        if d.is_zero() || drop >= self.remainder_order {
            return;
        }
        let key = (drop, power);
        let merged = match self.terms.remove(&key) {
            Some(old) => old.add(&d),
            None => d,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn base_power(&self) -> i64 {
        self.base_power
    }

    /// Leading order `𝔞` in the bookkeeping `deg d = 𝔞 + 𝔪ℓ − j`.
    pub fn leading_order(&self) -> i64 {
        self.top + self.m * self.base_power
    }

    /// Formal remainder order `−N`.
    pub fn remainder_order(&self) -> i64 {
        -(self.remainder_order as i64)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> Vec<ParametricTerm<R>> {
        self.terms
            .iter()
            .map(|(&(drop, power), d)| ParametricTerm {
                d: d.clone(),
                ell: power - self.base_power,
                base_power: self.base_power,
                m: self.m,
                drop,
            })
            .collect()
    }

    pub fn terms_with_drop(&self, drop: u32) -> Vec<ParametricTerm<R>> {
        self.terms().into_iter().filter(|t| t.drop == drop).collect()
    }

    pub fn eval(&self, point: &[f64], mu_pow_m: C64) -> C64 {
        let h = self.h_principal.eval(point).expect("nonzero point");
        self.terms
            .iter()
            .map(|(&(_, power), d)| d.eval(point).expect("nonzero point") * (h + mu_pow_m).powi(-power as i32))
            .sum()
    }

    fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.remainder_order = out.remainder_order.min(other.remainder_order);
        let minus = -Complex::<R>::one();
        for (&(drop, power), d) in &other.terms {
            out.push(drop, power, d.scale(&minus));
        }
        out.terms.retain(|(drop, _), _| *drop < out.remainder_order);
        out
    }
}

/// Expansion of `∂^β (d·F^{−L})` as a list of `(power, coefficient)` pairs.
struct TermDerivs<'a, R: Coeff> {
    h: &'a HomogeneousComponent<R>,
    cache: HashMap<(u32, i64, MultiIndex), Vec<(i64, HomogeneousComponent<R>)>>,
}

impl<'a, R: Coeff> TermDerivs<'a, R> {
    fn new(h: &'a HomogeneousComponent<R>) -> Self {
        Self { h, cache: HashMap::new() }
    }

    fn get(&mut self, key: (u32, i64), d: &HomogeneousComponent<R>, beta: &MultiIndex) -> Vec<(i64, HomogeneousComponent<R>)> {
        let ck = (key.0, key.1, beta.clone());
        if let Some(v) = self.cache.get(&ck) {
            return v.clone();
        }
        let out = match beta.0.iter().position(|e| *e > 0) {
            None => vec![(key.1, d.clone())],
            Some(axis) => {
                let mut lower = beta.clone();
                lower.0[axis] -= 1;
                let base = self.get(key, d, &lower);
                let dh = self.h.diff(axis);
                let mut acc: BTreeMap<i64, HomogeneousComponent<R>> = BTreeMap::new();
                for (power, c) in base {
                    merge(&mut acc, power, c.diff(axis));
                    let scale = Complex::new(R::from_int(-power), R::zero());
                    merge(&mut acc, power + 1, c.mul(&dh).scale(&scale));
                }
                acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
            }
        };
        self.cache.insert(ck, out.clone());
        out
    }
}

fn merge<R: Coeff>(acc: &mut BTreeMap<i64, HomogeneousComponent<R>>, power: i64, c: HomogeneousComponent<R>) {
    if c.is_zero() {
        return;
    }
    let v = match acc.remove(&power) {
        Some(old) => old.add(&c),
        None => c,
    };
    acc.insert(power, v);
}

/// Standard composition `left # right` over a common `h_𝔪`, keeping drops
/// `< n_drop`; when `only` is set, only that drop is produced.
fn compose_terms<R: Coeff>(left: &ParametricSymbol<R>, right: &ParametricSymbol<R>, n_drop: u32, only: Option<u32>) -> ParametricSymbol<R> {
    assert_eq!(left.n, right.n, "dimension mismatch");
    assert_eq!(left.h_principal, right.h_principal, "parametric symbols over different h");
    let n = left.n;
    let n_drop = n_drop.min(left.remainder_order).min(right.remainder_order);
    let mut out = ParametricSymbol::empty(&left.h_principal, left.top + right.top, left.base_power + right.base_power, n_drop);
    let zeros = vec![0u32; n];
    let mut dl = TermDerivs::new(&left.h_principal);
    let mut dr = TermDerivs::new(&right.h_principal);
    let mut jobs = Vec::new();
    for (&kl, a) in &left.terms {
        for (&kr, b) in &right.terms {
            let mut r = 0u32;
            loop {
                let drop = kl.0 + kr.0 + 2 * r;
                if drop >= n_drop {
                    break;
                }
                if only.is_none_or(|o| o == drop) {
                    for alpha in compositions(n, r) {
                        let da = dl.get(kl, a, &embed(n, &zeros, &alpha));
                        if da.is_empty() {
                            continue;
                        }
                        let db = dr.get(kr, b, &embed(n, &alpha, &zeros));
                        if db.is_empty() {
                            continue;
                        }
                        let w = ipow::<R>(-(r as i64)) * inv_factorial::<R>(&alpha);
                        jobs.push((drop, w, da, db));
                    }
                }
                r += 1;
            }
        }
    }
    let products: Vec<Vec<(u32, i64, HomogeneousComponent<R>)>> = jobs
        .into_par_iter()
        .map(|(drop, w, da, db)| {
            let mut v = Vec::new();
            for (pa, ca) in &da {
                for (pb, cb) in &db {
                    v.push((drop, pa + pb, ca.mul(cb).scale(&w)));
                }
            }
            v
        })
        .collect();
    for v in products {
        for (drop, power, c) in v {
            out.push(drop, power, c);
        }
    }
    out
}

fn check_positive<R: Coeff>(h: &HomogeneousComponent<R>) -> Result<(), ParametrixError> {
    let dim = h.dim();
    let samples = 64;
    for s in 0..samples {
        let mut v: Vec<f64> = (0..dim).map(|i| ((s * 7 + i * 13) as f64 * 0.7548776662466927).fract() - 0.5).collect();
        if s < dim {
            v = vec![0.0; dim];
            v[s] = 1.0;
        }
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= r);
        let val = h.eval(&v).map_err(|_| ParametrixError::Dimension)?;
        if !(val.re > 0.0) || val.im.abs() > 1e-12 * val.re.abs() {
            return Err(ParametrixError::NotPositive(format!("{val}")));
        }
    }
    Ok(())
}

/// Parametrix `p ∼ Σ_j p_{−𝔪−j}` of `h + μ^𝔪` through drop `N − 1`.
pub fn resolvent_parametrix<R: Coeff>(h: &ClassicalSymbol<R>, n_drop: u32) -> Result<ParametricSymbol<R>, ParametrixError> {
    if h.order() < 1 {
        return Err(ParametrixError::Order(h.order()));
    }
    check_positive(h.principal())?;
    let right = ParametricSymbol::shifted_operator(h, n_drop);
    let mut p = ParametricSymbol::empty(h.principal(), -h.order(), 1, n_drop);
    if n_drop > 0 {
        p.push(0, 1, HomogeneousComponent::constant(h.n(), Complex::one()));
    }
    let minus = -Complex::<R>::one();
    for j in 1..n_drop {
        let c = compose_terms(&p, &right, n_drop, Some(j));
        for ((drop, power), d) in c.terms {
            p.push(drop, power + 1, d.scale(&minus));
        }
    }
    Ok(p)
}

/// `K`-th power of the parametrix, built by repeated composition.
pub fn resolvent_parametrix_power<R: Coeff>(h: &ClassicalSymbol<R>, k: u32, n_drop: u32) -> Result<ParametricSymbol<R>, ParametrixError> {
    let p = resolvent_parametrix(h, n_drop)?;
    let mut out = p.clone();
    for _ in 1..k.max(1) {
        out = compose_terms(&out, &p, n_drop, None);
    }
    Ok(out)
}

/// `a # p` with the standard convention.
pub fn compose_parametric<R: Coeff>(a: &ClassicalSymbol<R>, p: &ParametricSymbol<R>, n_drop: u32) -> ParametricSymbol<R> {
    assert_eq!(a.n(), p.n, "dimension mismatch");
    let n_drop = n_drop.min(p.remainder_order);
    let mut left = ParametricSymbol::empty(&p.h_principal, a.order(), 0, n_drop);
    for j in 0..(n_drop as usize).min(a.components().len()) {
        left.push(j as u32, 0, a.component(j));
    }
    compose_terms(&left, p, n_drop, None)
}

/// Nonzero terms of `p # (h + μ^𝔪)^K − 1` with drop `< N`.
pub fn compose_check<R: Coeff>(p: &ParametricSymbol<R>, h: &ClassicalSymbol<R>, n_drop: u32) -> Vec<ParametricTerm<R>> {
    if n_drop == 0 {
        return Vec::new();
    }
    let right = ParametricSymbol::shifted_operator(h, n_drop);
    let mut acc = p.clone();
    acc.remainder_order = n_drop;
    for _ in 0..p.base_power.max(1) {
        acc = compose_terms(&acc, &right, n_drop, None);
    }
    let mut one = ParametricSymbol::empty(&p.h_principal, 0, 0, n_drop);
    one.push(0, 0, HomogeneousComponent::constant(h.n(), Complex::one()));
    let mut res = acc.sub(&one);
    res.base_power = 0;
    res.terms()
}

/// Coefficients of `μ^{e−k}`, `k < N`, in the expansion of every term
/// `d·(h_𝔪+μ^𝔪)^{−L}` at `μ = ∞`, where `e = −𝔪L` is shared by all terms.
pub fn expand_at_infinity<R: Coeff>(
    p: &ParametricSymbol<R>,
    d_exponent: i64,
    n: u32,
) -> Result<Vec<(u32, Vec<HomogeneousComponent<R>>)>, ParametrixError> {
    for &(_, power) in p.terms.keys() {
        if -p.m * power != d_exponent {
            return Err(ParametrixError::MixedExponents(-p.m * power, d_exponent));
        }
    }
    let mut out = Vec::new();
    for k in 0..n {
        let mut coeffs = Vec::new();
        if k as i64 % p.m == 0 {
            let r = (k as i64 / p.m) as u32;
            for (&(_, power), d) in &p.terms {
                let b = binomial_ratio(Ratio::from_integer(-power), r);
                let c = Complex::new(R::from_rational(&b), R::zero());
                let v = p.h_principal.pow(r).mul(d).scale(&c);
                if !v.is_zero() {
                    coeffs.push(v);
                }
            }
        }
        out.push((k, coeffs));
    }
    Ok(out)
}

/// Interchange form of a parametric term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametricTermSpec {
    pub drop: u32,
    pub ell: i64,
    #[serde(rename = "K")]
    pub k: i64,
    pub d: ComponentSpec,
}

impl<R: Coeff> ParametricSymbol<R> {
    pub fn to_spec(&self) -> Vec<ParametricTermSpec> {
        self.terms()
            .iter()
            .map(|t| ParametricTermSpec { drop: t.drop, ell: t.ell, k: t.base_power, d: ComponentSpec::from_component(&t.d) })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    type Q = BigRational;

    fn q(a: i64, b: i64) -> Complex<Q> {
        Complex::new(Q::new(a.into(), b.into()), Q::zero())
    }

    fn mono(n: usize, c: Complex<Q>, v: &[u32]) -> HomogeneousComponent<Q> {
        HomogeneousComponent::monomial(n, c, MultiIndex(v.to_vec()))
    }

    #[test]
    fn base_term_and_first_correction() {
        let h = ClassicalSymbol::<Q>::oscillator(1);
        let p = resolvent_parametrix(&h, 1).unwrap();
        let t = p.terms();
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].ell, t[0].base_power, t[0].drop), (0, 1, 0));
        assert_eq!(t[0].d, HomogeneousComponent::constant(1, q(1, 1)));
        assert_eq!(p.remainder_order(), -1);

        let p = resolvent_parametrix(&h, 3).unwrap();
        assert!(p.terms_with_drop(1).is_empty());
        let t2 = p.terms_with_drop(2);
        assert_eq!(t2.len(), 1);
        assert_eq!(t2[0].ell, 2);
        let minus_i = Complex::new(Q::zero(), -Q::one());
        assert_eq!(t2[0].d, mono(1, minus_i, &[1, 1]));
    }

    #[test]
    fn identity_holds_exactly() {
        let h = ClassicalSymbol::<Q>::oscillator(1);
        let p = resolvent_parametrix(&h, 6).unwrap();
        assert!(compose_check(&p, &h, 6).is_empty());
    }

    #[test]
    fn first_defect_without_correction() {
        let h1 = mono(1, q(1, 1), &[1, 0]);
        let h = ClassicalSymbol::new(1, 2, vec![HomogeneousComponent::h2(1), h1.clone()]).unwrap();
        let p = resolvent_parametrix(&h, 1).unwrap();
        let res = compose_check(&p, &h, 2);
        assert_eq!(res.len(), 1);
        assert_eq!((res[0].drop, res[0].power()), (1, 1));
        assert_eq!(res[0].d, h1);
        assert!(compose_check(&p, &h, 0).is_empty());
    }

    #[test]
    fn compose_with_one_and_with_h() {
        let h = ClassicalSymbol::<Q>::oscillator(2);
        let p = resolvent_parametrix(&h, 4).unwrap();
        let one = ClassicalSymbol::constant(2, q(1, 1));
        assert_eq!(compose_parametric(&one, &p, 4), p);
        let hp = compose_parametric(&h, &p, 4);
        let lead = hp.terms_with_drop(0);
        assert_eq!(lead.len(), 1);
        assert_eq!(lead[0].d, HomogeneousComponent::h2(2));
        assert_eq!(lead[0].power(), 1);
    }

    #[test]
    fn degree_bookkeeping() {
        let h = ClassicalSymbol::<Q>::oscillator(2);
        let a = ClassicalSymbol::new(2, 1, vec![mono(2, q(1, 1), &[1, 0, 0, 0]), mono(2, q(3, 1), &[0, 0, 0, 0])]).unwrap();
        let p = resolvent_parametrix(&h, 5).unwrap();
        let ap = compose_parametric(&a, &p, 5);
        for t in ap.terms() {
            assert_eq!(t.d.degree(), ap.leading_order() + t.m * t.ell - t.drop as i64);
            if t.ell == 0 {
                assert_eq!(t.d, a.component(t.drop as usize));
            }
        }
    }

    #[test]
    fn geometric_expansion() {
        let h = ClassicalSymbol::<Q>::oscillator(1);
        let p = resolvent_parametrix(&h, 1).unwrap();
        let e = expand_at_infinity(&p, -2, 6).unwrap();
        assert_eq!(e.len(), 6);
        for (k, c) in &e {
            if k % 2 == 1 {
                assert!(c.is_empty());
            } else {
                let r = k / 2;
                let expect = HomogeneousComponent::h2(1).scale(&q(-1, 1)).pow(r);
                assert_eq!(c, &vec![expect]);
                assert_eq!(c[0].degree(), *k as i64);
            }
        }
        assert_eq!(expand_at_infinity(&p, -2, 1).unwrap().len(), 1);
        let p2 = resolvent_parametrix(&h, 3).unwrap();
        assert!(matches!(expand_at_infinity(&p2, -2, 2), Err(ParametrixError::MixedExponents(..))));
    }

    #[test]
    fn rejects_indefinite_principal_part() {
        let x2 = mono(1, q(1, 1), &[2, 0]);
        let p2 = mono(1, q(-1, 1), &[0, 2]);
        let h = ClassicalSymbol::from_component(x2.add(&p2));
        assert!(matches!(resolvent_parametrix(&h, 2), Err(ParametrixError::NotPositive(_))));
    }
}
