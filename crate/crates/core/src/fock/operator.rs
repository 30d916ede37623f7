use nalgebra::DMatrix;
use num_complex::Complex;

use super::{level_of, FockError, FockSpace, LevelFn, NormalOrdered, SparseVec, State, MAX_MODES};
use crate::fock::DisplacementTables;
use crate::group::Monomial;
use crate::scalar::{cis, Coeff, Real};
use crate::symbols::poly::{self, Poly};

/// Operator on the Hermite–Fock space, kept in factored form.
#[derive(Clone, Debug, PartialEq)]
pub enum FockOperator<T> {
    Identity { n: usize },
    /// Spectral function of `H₀ + shift`.
    Level { n: usize, f: LevelFn<T> },
    /// `R_g` with `R_g|α⟩ = e^{−i⟨φ, σα⟩}|σα⟩`.
    Metaplectic(Monomial<T>),
    /// `T_w`.
    Displacement(Vec<Complex<T>>),
    /// `op^w(P)` for a polynomial symbol.
    Weyl(NormalOrdered<T>),
    /// Left-to-right product.
    Product(Vec<FockOperator<T>>),
}

pub fn op_weyl_poly<T: Real, R: Coeff>(n: usize, p: &Poly<R>) -> Result<FockOperator<T>, FockError> {
    Ok(FockOperator::Weyl(NormalOrdered::from_weyl_poly(n, p)?))
}

pub fn func_of_h0<T: Real>(n: usize, f: LevelFn<T>) -> Result<FockOperator<T>, FockError> {
    if n > MAX_MODES {
        return Err(FockError::TooManyModes(n));
    }
    f.validate(n)?;
    Ok(FockOperator::Level { n, f })
}

pub fn displacement<T: Real>(w: Vec<Complex<T>>) -> Result<FockOperator<T>, FockError> {
    if w.len() > MAX_MODES {
        return Err(FockError::TooManyModes(w.len()));
    }
    Ok(FockOperator::Displacement(w))
}

pub fn metaplectic<T: Real>(g: Monomial<T>) -> Result<FockOperator<T>, FockError> {
    if g.n() > MAX_MODES {
        return Err(FockError::TooManyModes(g.n()));
    }
    Ok(FockOperator::Metaplectic(g))
}

pub fn metaplectic_diag<T: Real>(angles: Vec<T>) -> Result<FockOperator<T>, FockError> {
    metaplectic(Monomial::diagonal(angles))
}

/// `|α⟩ ↦ Π sign_j^{α_j} |σα⟩`.
pub fn metaplectic_perm<T: Real>(perm: Vec<usize>, signs: &[i8]) -> Result<FockOperator<T>, FockError> {
    if perm.len() != signs.len() {
        return Err(FockError::Dimension(perm.len(), signs.len()));
    }
    let mut angles = vec![T::zero(); perm.len()];
    for (j, &s) in perm.iter().enumerate() {
        if s >= perm.len() {
            return Err(FockError::Unsupported("permutation index out of range"));
        }
        if signs[j] < 0 {
            angles[s] = T::PI();
        }
    }
    let g = Monomial::new(perm, angles).map_err(|_| FockError::Unsupported("not a permutation"))?;
    metaplectic(g)
}

impl<T: Real> FockOperator<T> {
    pub fn n(&self) -> Option<usize> {
        match self {
            Self::Identity { n } | Self::Level { n, .. } => Some(*n),
            Self::Metaplectic(g) => Some(g.n()),
            Self::Displacement(w) => Some(w.len()),
            Self::Weyl(p) => Some(p.n),
            Self::Product(fs) => fs.iter().find_map(|f| f.n()),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut fs = Vec::new();
        for op in [self, other] {
            match op {
                Self::Product(inner) => fs.extend(inner.iter().cloned()),
                o => fs.push(o.clone()),
            }
        }
        Self::Product(fs)
    }

    pub fn product(factors: &[Self]) -> Self {
        let mut out = Self::Product(Vec::new());
        for f in factors {
            out = out.mul(f);
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        match self {
            Self::Identity { n } => Self::Identity { n: *n },
            Self::Level { n, f } => Self::Level { n: *n, f: f.adjoint() },
            Self::Metaplectic(g) => Self::Metaplectic(g.inverse()),
            Self::Displacement(w) => Self::Displacement(w.iter().map(|z| -z).collect()),
            Self::Weyl(p) => Self::Weyl(p.adjoint()),
            Self::Product(fs) => Self::Product(fs.iter().rev().map(|f| f.adjoint()).collect()),
        }
    }

    /// Leaf factors in left-to-right order.
    pub(crate) fn atoms(&self) -> Vec<&Self> {
        match self {
            Self::Product(fs) => fs.iter().flat_map(|f| f.atoms()).collect(),
            Self::Identity { .. } => Vec::new(),
            o => vec![o],
        }
    }

    /// Exact action of a displacement-free leaf on one basis state, appended to `out`.
    pub(crate) fn apply_state(&self, alpha: &State, c: Complex<T>, out: &mut SparseVec<T>) {
        match self {
            Self::Identity { .. } => out.push((*alpha, c)),
            Self::Level { n, f } => out.push((*alpha, c * f.eval(*n, level_of(alpha) as usize))),
            Self::Metaplectic(g) => {
                let mut beta = [0u32; MAX_MODES];
                for (j, &s) in g.perm.iter().enumerate() {
                    beta[s] = alpha[j];
                }
                let phase = g.angles.iter().zip(&beta).fold(T::zero(), |acc, (p, &b)| acc + *p * T::from_u32(b).unwrap());
                out.push((beta, c * cis(-phase)));
            }
            Self::Weyl(p) => p.apply_state(alpha, c, out),
            Self::Displacement(_) | Self::Product(_) => unreachable!("composite or displacement leaf"),
        }
    }

    /// `P_N A P_N v` on the truncated basis.
    pub fn apply_truncated(&self, space: &FockSpace, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        match self {
            Self::Product(fs) => {
                let mut cur = v.to_vec();
                for f in fs.iter().rev() {
                    cur = f.apply_truncated(space, &cur);
                }
                cur
            }
            Self::Displacement(w) => apply_box(w, space, v),
            leaf => {
                let mut out = vec![zero; space.dim()];
                let mut buf = SparseVec::new();
                for (i, c) in v.iter().enumerate() {
                    if *c == zero {
                        continue;
                    }
                    buf.clear();
                    leaf.apply_state(&space.states[i], *c, &mut buf);
                    for (s, x) in &buf {
                        if let Some(k) = space.index(s) {
                            out[k] = out[k] + *x;
                        }
                    }
                }
                out
            }
        }
    }

    pub fn to_dense(&self, space: &FockSpace) -> DMatrix<Complex<T>> {
        let d = space.dim();
        let zero = Complex::new(T::zero(), T::zero());
        let mut m = DMatrix::from_element(d, d, zero);
        let mut e = vec![zero; d];
        for j in 0..d {
            e[j] = Complex::new(T::one(), T::zero());
            let col = self.apply_truncated(space, &e);
            e[j] = zero;
            for (i, x) in col.into_iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }
}

/// Truncated `T_w` through the box `[0, N]ⁿ` with per-mode matrices.
fn apply_box<T: Real>(w: &[Complex<T>], space: &FockSpace, v: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = space.n;
    let side = space.cutoff + 1;
    let tables = DisplacementTables::new(w, space.cutoff);
    let mats: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| {
            let mut m = Vec::with_capacity(side * side);
            for r in 0..side {
                for c in 0..side {
                    let e = tables.entry_1d(j, r, c);
                    m.push(Complex::new(T::lit(e.re), T::lit(e.im)));
                }
            }
            m
        })
        .collect();
    let zero = Complex::new(T::zero(), T::zero());
    let strides: Vec<usize> = (0..n).map(|j| side.pow(j as u32)).collect();
    let flat = |s: &State| (0..n).map(|j| s[j] as usize * strides[j]).sum::<usize>();
    let total = side.pow(n as u32);
    let mut cur = vec![zero; total];
    for (i, c) in v.iter().enumerate() {
        cur[flat(&space.states[i])] = *c;
    }
    let mut next = vec![zero; total];
    let mut line = vec![zero; side];
    for j in 0..n {
        let st = strides[j];
        for base in 0..total {
            if !(base / st).is_multiple_of(side) {
                continue;
            }
            for k in 0..side {
                line[k] = cur[base + k * st];
            }
            if line.iter().all(|x| *x == zero) {
                for k in 0..side {
                    next[base + k * st] = zero;
                }
                continue;
            }
            for r in 0..side {
                let row = &mats[j][r * side..(r + 1) * side];
                let mut acc = zero;
                for k in 0..side {
                    acc = acc + row[k] * line[k];
                }
                next[base + r * st] = acc;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    space.states.iter().map(|s| cur[flat(s)]).collect()
}

/// Frobenius norm of `lhs − rhs` on the block `|α| ≤ interior`, both computed as truncated products.
pub fn interior_defect<T: Real>(lhs: &FockOperator<T>, rhs: &FockOperator<T>, space: &FockSpace, interior: usize) -> f64 {
    let zero = Complex::new(T::zero(), T::zero());
    let d = space.dim();
    let inner = super::dimension(space.n, interior.min(space.cutoff));
    let mut e = vec![zero; d];
    let mut acc = 0.0f64;
    for j in 0..inner {
        e[j] = Complex::new(T::one(), T::zero());
        let a = lhs.apply_truncated(space, &e);
        let b = rhs.apply_truncated(space, &e);
        e[j] = zero;
        for i in 0..inner {
            acc += (a[i] - b[i]).norm_sqr().as_f64();
        }
    }
    acc.sqrt()
}

/// Real `2n × 2n` matrix `M` with `P ∘ g = P(M·(x, p))` for `R_g⁻¹ op^w(P) R_g = op^w(P ∘ g)`.
pub fn egorov_matrix<T: Real>(g: &Monomial<T>) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut m = vec![vec![0.0; 2 * n]; 2 * n];
    for (src, &k) in g.perm.iter().enumerate() {
        let (s, c) = g.angles[k].as_f64().sin_cos();
        m[k][src] = c;
        m[k][n + src] = s;
        m[n + k][n + src] = c;
        m[n + k][src] = -s;
    }
    m
}

pub fn egorov_pullback<T: Real, R: Coeff>(g: &Monomial<T>, p: &Poly<R>) -> Poly<f64> {
    let pf = poly::map_coeffs(p, |c| c.to_f64());
    poly::pullback(&pf, &egorov_matrix(g))
}

/// Frobenius defect of `R_g⁻¹ op^w(P) R_g − op^w(P ∘ g)` on `|α| ≤ N − deg P`.
pub fn egorov_defect<T: Real, R: Coeff>(g: &Monomial<T>, p: &Poly<R>, cutoff: usize) -> Result<f64, FockError> {
    let n = g.n();
    let space = FockSpace::new(n, cutoff)?;
    let lhs = FockOperator::product(&[
        metaplectic(g.inverse())?,
        op_weyl_poly::<T, R>(n, p)?,
        metaplectic(g.clone())?,
    ]);
    let rhs = op_weyl_poly::<T, f64>(n, &egorov_pullback(g, p))?;
    let deg = poly::degree(p).unwrap_or(0) as usize;
    Ok(interior_defect(&lhs, &rhs, &space, cutoff.saturating_sub(deg)))
}
