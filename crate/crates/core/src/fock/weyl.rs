use std::collections::BTreeMap;

use num_complex::Complex;

use super::{FockError, SparseVec, State, MAX_MODES};
use crate::scalar::{Coeff, Real};
use crate::symbols::poly::Poly;

/// `c · Π b_j^{†r_j} b_j^{s_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalTerm<T> {
    pub r: State,
    pub s: State,
    pub c: Complex<T>,
}

/// Normal-ordered polynomial in the ladder operators.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalOrdered<T> {
    pub n: usize,
    pub terms: Vec<NormalTerm<T>>,
}

type ZPoly = BTreeMap<(State, State), Complex<f64>>;

fn zmul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let mut out = ZPoly::new();
    for ((sa, ra), ca) in a {
        for ((sb, rb), cb) in b {
            let mut s = *sa;
            let mut r = *ra;
            for i in 0..MAX_MODES {
                s[i] += sb[i];
                r[i] += rb[i];
            }
            *out.entry((s, r)).or_insert(Complex::new(0.0, 0.0)) += ca * cb;
        }
    }
    out
}

fn falling(a: u32, k: u32) -> f64 {
    (0..k).map(|i| (a - i) as f64).product()
}

impl<T: Real> NormalOrdered<T> {
    /// Weyl quantization of a polynomial in `x₁…xₙ, p₁…pₙ`.
    ///
    /// With `z = (x + ip)/√2` the Weyl symbol is rewritten in `(z, z̄)` and
    /// mapped to the normal symbol by `exp(½ Σ ∂_{z_j}∂_{z̄_j})`.
    pub fn from_weyl_poly<R: Coeff>(n: usize, p: &Poly<R>) -> Result<Self, FockError> {
        if n > MAX_MODES {
            return Err(FockError::TooManyModes(n));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let unit = |j: usize, z: bool| {
            let mut s = [0u32; MAX_MODES];
            let mut r = [0u32; MAX_MODES];
            if z {
                s[j] = 1;
            } else {
                r[j] = 1;
            }
            (s, r)
        };
        let mut xs = Vec::new();
        let mut ps = Vec::new();
        for j in 0..n {
            let mut x = ZPoly::new();
            x.insert(unit(j, true), Complex::new(h, 0.0));
            x.insert(unit(j, false), Complex::new(h, 0.0));
            xs.push(x);
            let mut q = ZPoly::new();
            q.insert(unit(j, true), Complex::new(0.0, -h));
            q.insert(unit(j, false), Complex::new(0.0, h));
            ps.push(q);
        }
        let mut weyl = ZPoly::new();
        for (m, c) in p {
            if m.dim() != 2 * n {
                return Err(FockError::Dimension(m.dim() / 2, n));
            }
            let mut acc = ZPoly::new();
            acc.insert(([0; MAX_MODES], [0; MAX_MODES]), Complex::new(c.re.to_f64(), c.im.to_f64()));
            for j in 0..n {
                for _ in 0..m.0[j] {
                    acc = zmul(&acc, &xs[j]);
                }
                for _ in 0..m.0[n + j] {
                    acc = zmul(&acc, &ps[j]);
                }
            }
            for (k, v) in acc {
                *weyl.entry(k).or_insert(Complex::new(0.0, 0.0)) += v;
            }
        }
        let mut normal = ZPoly::new();
        for ((s, r), c) in &weyl {
            let mut partial: Vec<(State, State, f64)> = vec![([0; MAX_MODES], [0; MAX_MODES], 1.0)];
            for j in 0..n {
                let mut next = Vec::new();
                for (ss, rr, w) in &partial {
                    for k in 0..=s[j].min(r[j]) {
                        let coef = 0.5f64.powi(k as i32) / falling(k, k) * falling(s[j], k) * falling(r[j], k);
                        let mut s2 = *ss;
                        let mut r2 = *rr;
                        s2[j] = s[j] - k;
                        r2[j] = r[j] - k;
                        next.push((s2, r2, w * coef));
                    }
                }
                partial = next;
            }
            for (s2, r2, w) in partial {
                *normal.entry((s2, r2)).or_insert(Complex::new(0.0, 0.0)) += c * w;
            }
        }
        let terms = normal
            .into_iter()
            .filter(|(_, c)| c.norm() > 1e-15)
            .map(|((s, r), c)| NormalTerm { r, s, c: Complex::new(T::lit(c.re), T::lit(c.im)) })
            .collect();
        Ok(Self { n, terms })
    }

    pub fn adjoint(&self) -> Self {
        Self { n: self.n, terms: self.terms.iter().map(|t| NormalTerm { r: t.s, s: t.r, c: t.c.conj() }).collect() }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.r.iter().chain(&t.s).sum::<u32>()).max().unwrap_or(0)
    }

    /// Largest level decrease and increase.
    pub fn reach(&self) -> (u32, u32) {
        let down = self.terms.iter().map(|t| t.s.iter().sum::<u32>()).max().unwrap_or(0);
        let up = self.terms.iter().map(|t| t.r.iter().sum::<u32>()).max().unwrap_or(0);
        (down, up)
    }

    pub fn coef_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.c.norm().as_f64()).sum()
    }

    /// Append `c · P|α⟩` to `out` without merging.
    pub(crate) fn apply_state(&self, alpha: &State, c: Complex<T>, out: &mut SparseVec<T>) {
        'terms: for t in &self.terms {
            let mut beta = *alpha;
            let mut amp = 1.0f64;
            for j in 0..self.n {
                if beta[j] < t.s[j] {
                    continue 'terms;
                }
                for _ in 0..t.s[j] {
                    amp *= beta[j] as f64;
                    beta[j] -= 1;
                }
                for _ in 0..t.r[j] {
                    beta[j] += 1;
                    amp *= beta[j] as f64;
                }
            }
            out.push((beta, c * t.c * T::lit(amp.sqrt())));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::MultiIndex;

    fn poly1(terms: &[(&[u32], f64)]) -> Poly<f64> {
        terms.iter().map(|(m, c)| (MultiIndex(m.to_vec()), Complex::new(*c, 0.0))).collect()
    }

    #[test]
    fn oscillator_is_diagonal() {
        let h = NormalOrdered::<f64>::from_weyl_poly(1, &poly1(&[(&[2, 0], 0.5), (&[0, 2], 0.5)])).unwrap();
        for k in 0..6u32 {
            let mut out = SparseVec::new();
            h.apply_state(&[k, 0, 0, 0], Complex::new(1.0, 0.0), &mut out);
            crate::fock::normalize(&mut out);
            assert_eq!(out.len(), 1);
            assert!((out[0].1.re - (k as f64 + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn x_squared_normal_form() {
        let x2 = NormalOrdered::<f64>::from_weyl_poly(1, &poly1(&[(&[2, 0], 1.0)])).unwrap();
        let constant: f64 = x2.terms.iter().filter(|t| t.r[0] == 0 && t.s[0] == 0).map(|t| t.c.re).sum();
        assert!((constant - 0.5).abs() < 1e-15);
        assert_eq!(x2.reach(), (2, 2));
        let mut out = SparseVec::new();
        x2.apply_state(&[3, 0, 0, 0], Complex::new(1.0, 0.0), &mut out);
        crate::fock::normalize(&mut out);
        let diag = out.iter().find(|e| e.0[0] == 3).unwrap().1;
        assert!((diag.re - 3.5).abs() < 1e-14);
    }
}
