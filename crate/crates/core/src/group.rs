//! The group `ℂⁿ ⋊ U(n)` restricted to monomial unitaries.

use std::collections::HashSet;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{cis, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("permutation is not a bijection")]
    NotPermutation,
    #[error("element is not diagonal")]
    NotDiagonal,
    #[error("conjugacy class is not known to be finite")]
    InfiniteClass,
}

/// Monomial unitary `G = diag(e^{iφ})·P_σ`, so `G e_j = e^{iφ_{σ(j)}} e_{σ(j)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial<T> {
    pub perm: Vec<usize>,
    pub angles: Vec<T>,
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut r = a % two_pi;
    if r <= -T::PI() {
        r = r + two_pi;
    } else if r > T::PI() {
        r = r - two_pi;
    }
    r
}

impl<T: Real> Monomial<T> {
    pub fn new(perm: Vec<usize>, angles: Vec<T>) -> Result<Self, GroupError> {
        if perm.len() != angles.len() {
            return Err(GroupError::Dimension(perm.len(), angles.len()));
        }
        let mut seen = vec![false; perm.len()];
        for &s in &perm {
            if s >= perm.len() || seen[s] {
                return Err(GroupError::NotPermutation);
            }
            seen[s] = true;
        }
        Ok(Self { perm, angles: angles.into_iter().map(wrap_angle).collect() })
    }

    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), angles: vec![T::zero(); n] }
    }

    pub fn diagonal(angles: Vec<T>) -> Self {
        let n = angles.len();
        Self::new((0..n).collect(), angles).expect("identity permutation")
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &s)| i == s)
    }

    pub fn is_identity(&self, tol: T) -> bool {
        self.is_diagonal() && self.angles.iter().all(|a| a.abs() <= tol)
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.n()];
        for (j, &s) in self.perm.iter().enumerate() {
            out[s] = cis(self.angles[s]) * v[j];
        }
        out
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut angles = vec![T::zero(); n];
        for (j, &s) in self.perm.iter().enumerate() {
            perm[s] = j;
            angles[j] = wrap_angle(-self.angles[s]);
        }
        Self { perm, angles }
    }

    /// `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut angles = vec![T::zero(); n];
        for j in 0..n {
            let k = self.perm[other.perm[j]];
            perm[j] = k;
            angles[k] = wrap_angle(self.angles[k] + other.angles[other.perm[j]]);
        }
        Self { perm, angles }
    }

    /// Dense matrix, row-major.
    pub fn matrix(&self) -> Vec<Vec<Complex<T>>> {
        let n = self.n();
        let mut m = vec![vec![Complex::new(T::zero(), T::zero()); n]; n];
        for (j, &s) in self.perm.iter().enumerate() {
            m[s][j] = cis(self.angles[s]);
        }
        m
    }
}

/// Group element `(w, g)` with `w = a − ik`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement<T> {
    pub w: Vec<Complex<T>>,
    pub g: Monomial<T>,
}

fn im_pairing<T: Real>(v: &[Complex<T>], w: &[Complex<T>]) -> T {
    v.iter().zip(w).map(|(a, b)| (*a * b.conj()).im).fold(T::zero(), |s, x| s + x)
}

impl<T: Real> GroupElement<T> {
    pub fn new(w: Vec<Complex<T>>, g: Monomial<T>) -> Result<Self, GroupError> {
        if w.len() != g.n() {
            return Err(GroupError::Dimension(w.len(), g.n()));
        }
        Ok(Self { w, g })
    }

    pub fn identity(n: usize) -> Self {
        Self { w: vec![Complex::new(T::zero(), T::zero()); n], g: Monomial::identity(n) }
    }

    pub fn translation(w: Vec<Complex<T>>) -> Self {
        let n = w.len();
        Self { w, g: Monomial::identity(n) }
    }

    pub fn rotation(g: Monomial<T>) -> Self {
        Self { w: vec![Complex::new(T::zero(), T::zero()); g.n()], g }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn inverse(&self) -> Self {
        let gw = self.g.apply(&self.w);
        Self { w: gw.into_iter().map(|z| -z).collect(), g: self.g.inverse() }
    }

    /// Projective product: `R_{g₁}T_{w₁}R_{g₂}T_{w₂} = phase·R_{g₁g₂}T_{g₂⁻¹w₁+w₂}`.
    pub fn compose(&self, other: &Self) -> Result<(Complex<T>, Self), GroupError> {
        if self.n() != other.n() {
            return Err(GroupError::Dimension(self.n(), other.n()));
        }
        let moved = other.g.inverse().apply(&self.w);
        let w: Vec<_> = moved.iter().zip(&other.w).map(|(a, b)| *a + *b).collect();
        let half = T::lit(0.5);
        let phase = cis(-im_pairing(&moved, &other.w) * half);
        Ok((phase, Self { w, g: self.g.mul(&other.g) }))
    }

    /// `s·self·s⁻¹` ignoring the scalar phase.
    pub fn conjugate_by(&self, s: &Self) -> Self {
        let (_, a) = s.compose(self).expect("same dimension");
        let (_, b) = a.compose(&s.inverse()).expect("same dimension");
        b
    }

    /// Rounded key for set membership.
    fn key(&self, scale: f64) -> Vec<i64> {
        let mut k = Vec::with_capacity(4 * self.n());
        for z in &self.w {
            k.push((z.re.as_f64() * scale).round() as i64);
            k.push((z.im.as_f64() * scale).round() as i64);
        }
        for (&p, &a) in self.g.perm.iter().zip(&self.g.angles) {
            k.push(p as i64);
            let mut r = (a.as_f64() * scale).round() as i64;
            if r == (-std::f64::consts::PI * scale).round() as i64 {
                r = -r;
            }
            k.push(r);
        }
        k
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.g.perm == other.g.perm
            && self.w.iter().zip(&other.w).all(|(a, b)| (*a - *b).norm() <= tol)
            && self.g.angles.iter().zip(&other.g.angles).all(|(a, b)| wrap_angle(*a - *b).abs() <= tol)
    }
}

/// Block multiplicities of the diagonal normal form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointData<T> {
    pub m: [usize; 5],
    /// Angles in block order: generic, `π/2`, `−π/2`, `π`, `0`.
    pub angles: Vec<T>,
    /// Original coordinate index of each block slot.
    pub order: Vec<usize>,
}

impl<T> FixedPointData<T> {
    pub fn m5(&self) -> usize {
        self.m[4]
    }

    pub fn block_of(&self, slot: usize) -> usize {
        let mut acc = 0;
        for (b, &c) in self.m.iter().enumerate() {
            acc += c;
            if slot < acc {
                return b;
            }
        }
        unreachable!("slot out of range")
    }
}

/// Angle tolerance used to classify special eigenvalues.
pub const ANGLE_TOL: f64 = 1e-12;

pub fn fixed_point_data<T: Real>(g: &Monomial<T>) -> Result<FixedPointData<T>, GroupError> {
    if !g.is_diagonal() {
        return Err(GroupError::NotDiagonal);
    }
    let tol = T::lit(ANGLE_TOL);
    let half_pi = T::FRAC_PI_2();
    let mut blocks: [Vec<usize>; 5] = Default::default();
    for (j, &a) in g.angles.iter().enumerate() {
        let a = wrap_angle(a);
        let b = if a.abs() <= tol {
            4
        } else if (a - T::PI()).abs() <= tol || (a + T::PI()).abs() <= tol {
            3
        } else if (a - half_pi).abs() <= tol {
            1
        } else if (a + half_pi).abs() <= tol {
            2
        } else {
            0
        };
        blocks[b].push(j);
    }
    let m = [blocks[0].len(), blocks[1].len(), blocks[2].len(), blocks[3].len(), blocks[4].len()];
    let order: Vec<usize> = blocks.iter().flatten().copied().collect();
    let mut fpd = FixedPointData { m, angles: Vec::with_capacity(order.len()), order };
    fpd.angles = (0..fpd.order.len())
        .map(|slot| match fpd.block_of(slot) {
            0 => wrap_angle(g.angles[fpd.order[slot]]),
            1 => half_pi,
            2 => -half_pi,
            3 => T::PI(),
            _ => T::zero(),
        })
        .collect();
    Ok(fpd)
}

/// Eigen-decomposition `g = u g₀ u⁻¹` of a monomial unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagonalized<T> {
    /// Unitary with eigenvectors as columns, row-major.
    pub u: Vec<Vec<Complex<T>>>,
    pub g0: Monomial<T>,
}

pub fn diagonalize_monomial<T: Real>(g: &Monomial<T>) -> Diagonalized<T> {
    let n = g.n();
    let zero = Complex::new(T::zero(), T::zero());
    let mut u = vec![vec![zero; n]; n];
    let mut angles = vec![T::zero(); n];
    let mut visited = vec![false; n];
    let two_pi = T::PI() + T::PI();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut j = g.perm[start];
        while j != start {
            visited[j] = true;
            cycle.push(j);
            j = g.perm[j];
        }
        let c = cycle.len();
        let total = cycle.iter().fold(T::zero(), |s, &k| s + g.angles[k]);
        let norm = T::one() / T::from_usize(c).unwrap().sqrt();
        let mut slots = cycle.clone();
        slots.sort_unstable();
        for (l, &col) in slots.iter().enumerate() {
            let theta = (total + two_pi * T::from_usize(l).unwrap()) / T::from_usize(c).unwrap();
            angles[col] = wrap_angle(theta);
            let lambda = cis(theta);
            let mut coef = Complex::new(norm, T::zero());
            u[cycle[0]][col] = coef;
            for k in 1..c {
                coef = coef * cis(g.angles[cycle[k]]) / lambda;
                u[cycle[k]][col] = coef;
            }
        }
    }
    Diagonalized { u, g0: Monomial::diagonal(angles) }
}

/// `{v₀ + span(basis)}` solving `v = gv + w`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFixedSet<T> {
    pub point: Vec<Complex<T>>,
    pub basis: Vec<Vec<Complex<T>>>,
}

pub fn affine_fixed_points<T: Real>(e: &GroupElement<T>, tol: T) -> Option<AffineFixedSet<T>> {
    let n = e.n();
    let d = diagonalize_monomial(&e.g);
    let zero = Complex::new(T::zero(), T::zero());
    let coords: Vec<Complex<T>> = (0..n).map(|k| (0..n).fold(zero, |s, i| s + d.u[i][k].conj() * e.w[i])).collect();
    let mut solved = vec![zero; n];
    let mut basis = Vec::new();
    for k in 0..n {
        let lambda = cis(d.g0.angles[k]);
        let gap = Complex::new(T::one(), T::zero()) - lambda;
        if gap.norm() <= tol {
            if coords[k].norm() > tol {
                return None;
            }
            basis.push((0..n).map(|i| d.u[i][k]).collect());
        } else {
            solved[k] = coords[k] / gap;
        }
    }
    let point = (0..n).map(|i| (0..n).fold(zero, |s, k| s + d.u[i][k] * solved[k])).collect();
    Some(AffineFixedSet { point, basis })
}

/// Breadth-first conjugation closure up to word length `radius`.
pub fn conjugacy_class<T: Real>(generators: &[GroupElement<T>], e: &GroupElement<T>, radius: usize) -> (Vec<GroupElement<T>>, bool) {
    let scale = 1e8;
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut elements = vec![e.clone()];
    seen.insert(e.key(scale));
    let mut gens: Vec<GroupElement<T>> = Vec::new();
    for s in generators {
        gens.push(s.clone());
        gens.push(s.inverse());
    }
    let mut frontier = vec![e.clone()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for x in &frontier {
            for s in &gens {
                let y = x.conjugate_by(s);
                if seen.insert(y.key(scale)) {
                    elements.push(y.clone());
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return (elements, true);
        }
        frontier = next;
    }
    (elements, false)
}

pub fn class_contains<T: Real>(class: &[GroupElement<T>], e: &GroupElement<T>, tol: T) -> bool {
    class.iter().any(|x| x.approx_eq(e, tol))
}
