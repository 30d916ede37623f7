use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{level_states, normalize, DisplacementTables, FockError, FockOperator, LevelFn, SparseVec, Spectral, State, MAX_MODES};
use crate::scalar::{Real, C64};

/// `c · Π (L + a)^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthTerm {
    pub c: f64,
    pub factors: Vec<(f64, f64)>,
}

/// Upper bound `|s_L| ≤ Σ terms(L)` on the level sums, valid for `L` beyond the cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub terms: Vec<GrowthTerm>,
}

impl Growth {
    pub fn constant(c: f64) -> Self {
        Self { terms: vec![GrowthTerm { c, factors: Vec::new() }] }
    }

    pub fn monomial(c: f64, a: f64, p: f64) -> Self {
        Self { terms: vec![GrowthTerm { c, factors: vec![(a, p)] }] }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().copied());
                terms.push(GrowthTerm { c: a.c * b.c, factors });
            }
        }
        Self { terms }
    }

    pub fn eval(&self, level: f64) -> f64 {
        self.terms.iter().map(|t| t.c * t.factors.iter().map(|(a, p)| (level + a).powf(*p)).product::<f64>()).sum()
    }

    fn min_offset(&self) -> f64 {
        self.terms.iter().flat_map(|t| t.factors.iter().map(|f| f.0)).fold(f64::INFINITY, f64::min)
    }

    /// Certified bound on `Σ_{L > N} |f(E_L)| · bound(L)`.
    pub fn tail<T: Real>(&self, f: &LevelFn<T>, n: usize, cutoff: usize) -> Result<f64, FockError> {
        let first = cutoff as f64 + 1.0;
        if first + self.min_offset() <= 0.0 {
            return Err(FockError::Uncertified(format!("cutoff {cutoff} below the growth offsets")));
        }
        let e0 = n as f64 * 0.5 + f.shift.as_f64();
        match &f.kind {
            Spectral::Heat(t) => {
                let t = t.as_f64();
                let mut total = 0.0;
                for term in &self.terms {
                    let up: f64 = term.factors.iter().filter(|f| f.1 > 0.0).map(|(a, p)| (1.0 + 1.0 / (first + a)).powf(*p)).product();
                    let rho = (-t).exp() * up;
                    if rho >= 1.0 {
                        return Err(FockError::Uncertified(format!("heat tail ratio {rho} at cutoff {cutoff}")));
                    }
                    let lead = term.c * term.factors.iter().map(|(a, p)| (first + a).powf(*p)).product::<f64>() * (-t * (first + e0)).exp();
                    total += lead / (1.0 - rho);
                }
                Ok(total)
            }
            Spectral::Power(z) => self.with_energy_power(z.re.as_f64(), 1.0, e0, cutoff),
            Spectral::Resolvent { k, .. } => {
                let ratio = f.resolvent_ratio(first + e0);
                if ratio <= 0.0 {
                    return Err(FockError::Uncertified("resolvent parameter on the tail spectrum".into()));
                }
                self.with_energy_power(*k as f64, ratio.powi(-(*k as i32)), e0, cutoff)
            }
            Spectral::Identity => Err(FockError::NotDamped(0)),
        }
    }

    /// Integral comparison for `Σ_{L>N} c·Π(L+a)^p · s·(L+e0)^{−q}`.
    fn with_energy_power(&self, q: f64, scale: f64, e0: f64, cutoff: usize) -> Result<f64, FockError> {
        let first = cutoff as f64 + 1.0;
        let mut total = 0.0;
        for term in &self.terms {
            let mut rho = 1.0;
            let mut p_total = -q;
            for (a, p) in &term.factors {
                // (L+a)^p ≤ ρ (L+e0)^p for L > N, by monotonicity of the ratio
                rho *= ((first + a) / (first + e0)).powf(*p).max(1.0);
                p_total += p;
            }
            if p_total >= -1.0 {
                return Err(FockError::Uncertified(format!("tail exponent {p_total} is not summable")));
            }
            let base = cutoff as f64 + e0;
            if base <= 0.0 {
                return Err(FockError::Uncertified("non-positive energy at the cutoff".into()));
            }
            total += term.c * scale * rho * base.powf(p_total + 1.0) / (-p_total - 1.0);
        }
        Ok(total)
    }
}

/// Trace with its certified truncation tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceValue {
    pub value: C64,
    pub tail: f64,
    pub cutoff: usize,
}

/// Level sums `s_L = Σ_{|α| = L} ⟨α|X|α⟩` of a product `X`, with a growth bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub n: usize,
    pub sums: Vec<C64>,
    pub growth: Growth,
}

impl LevelProfile {
    pub fn cutoff(&self) -> usize {
        self.sums.len() - 1
    }

    /// `Tr(X f(H₀ + c))` truncated at `cutoff ≤ self.cutoff()`.
    pub fn trace_at<T: Real>(&self, f: &LevelFn<T>, cutoff: usize) -> Result<TraceValue, FockError> {
        let cutoff = cutoff.min(self.cutoff());
        let tail = self.growth.tail(f, self.n, cutoff)?;
        let mut value = C64::new(0.0, 0.0);
        for (l, s) in self.sums[..=cutoff].iter().enumerate() {
            let fv = f.eval(self.n, l);
            value += s * C64::new(fv.re.as_f64(), fv.im.as_f64());
        }
        Ok(TraceValue { value, tail, cutoff })
    }

    pub fn trace<T: Real>(&self, f: &LevelFn<T>) -> Result<TraceValue, FockError> {
        self.trace_at(f, self.cutoff())
    }
}

/// Smallest cutoff whose certified tail is at most `tol`, searched up to `max_cutoff`.
pub fn select_cutoff<T: Real>(growth: &Growth, f: &LevelFn<T>, n: usize, tol: f64, max_cutoff: usize) -> Result<usize, FockError> {
    let ok = |c: usize| growth.tail(f, n, c).map(|t| t <= tol).unwrap_or(false);
    let mut hi = 8usize;
    while !ok(hi) {
        if hi >= max_cutoff {
            return Err(FockError::Uncertified(format!("tail above {tol} at cutoff {max_cutoff}")));
        }
        hi = (hi * 2).min(max_cutoff);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug)]
struct Reach {
    down: u32,
    up: u32,
}

enum Step<T> {
    Local(FockOperator<T>),
    Banded(usize),
}

struct Plan<T> {
    n: usize,
    /// Applied to `|α⟩` in order, giving `u = A†|α⟩`.
    left: Vec<Step<T>>,
    /// Applied to `|α⟩` in order, giving `v = B|α⟩`.
    right: Vec<Step<T>>,
    /// Index of the table sandwiched between `u` and `v`.
    middle: Option<usize>,
    tables: Vec<DisplacementTables>,
    bands: Vec<Vec<u32>>,
}

fn factor_bound<T: Real>(op: &FockOperator<T>, n: usize, reach: &mut Reach) -> Result<Growth, FockError> {
    match op {
        FockOperator::Weyl(p) => {
            let (down, up) = p.reach();
            reach.up += up;
            reach.down += down;
            Ok(Growth::monomial(p.coef_l1(), reach.up as f64, p.degree() as f64 * 0.5))
        }
        FockOperator::Level { f, .. } => {
            let e0 = n as f64 * 0.5 + f.shift.as_f64();
            match &f.kind {
                Spectral::Identity => Ok(Growth::constant(1.0)),
                Spectral::Heat(t) => {
                    if t.as_f64() < 0.0 || e0 < 0.0 {
                        return Err(FockError::Uncertified("growing heat factor".into()));
                    }
                    Ok(Growth::constant(1.0))
                }
                Spectral::Power(z) => {
                    let q = z.re.as_f64();
                    if q >= 0.0 {
                        Ok(Growth::monomial(1.0, e0 - reach.down as f64, -q))
                    } else {
                        Ok(Growth::monomial(1.0, e0 + reach.up as f64, -q))
                    }
                }
                Spectral::Resolvent { k, .. } => {
                    let ratio = f.resolvent_ratio(e0.max(1e-300));
                    if ratio <= 0.0 {
                        return Err(FockError::Singular(0));
                    }
                    Ok(Growth::monomial(ratio.powi(-(*k as i32)), e0 - reach.down as f64, -(*k as f64)))
                }
            }
        }
        _ => Ok(Growth::constant(1.0)),
    }
}

fn multiplicity_growth(n: usize) -> Growth {
    let mut g = Growth::constant(1.0);
    for i in 1..n {
        g = g.mul(&Growth::monomial(1.0 / i as f64, i as f64, 1.0));
    }
    g
}

fn make_tables<T: Real>(w: &[Complex<T>], kmax: usize) -> (DisplacementTables, Vec<u32>) {
    let probe = DisplacementTables::new(w, kmax);
    let b0 = probe.bands().into_iter().max().unwrap_or(0);
    let tables = DisplacementTables::new(w, kmax + b0 + 8);
    let bands = tables.bands().into_iter().map(|b| b as u32).collect();
    (tables, bands)
}

impl<T: Real> Plan<T> {
    fn build(factors: &[FockOperator<T>], n: usize, cutoff: usize) -> Result<(Self, Growth), FockError> {
        let mut atoms: Vec<&FockOperator<T>> = Vec::new();
        for f in factors {
            if let Some(m) = f.n() {
                if m != n {
                    return Err(FockError::Dimension(m, n));
                }
            }
            atoms.extend(f.atoms());
        }
        let first = atoms.iter().position(|a| matches!(a, FockOperator::Displacement(_)));
        let mut tables = Vec::new();
        let mut bands = Vec::new();
        let mut growth = multiplicity_growth(n);
        let (left_atoms, middle_atom, right_atoms) = match first {
            Some(p) => (&atoms[..p], Some(atoms[p]), &atoms[p + 1..]),
            None => (&atoms[..0], None, &atoms[..]),
        };
        // u = A†|α⟩: adjoints of A applied from its left end
        let mut left = Vec::new();
        let mut reach_l = Reach { down: 0, up: 0 };
        for op in left_atoms.iter().map(|a| a.adjoint()) {
            growth = growth.mul(&factor_bound(&op, n, &mut reach_l)?);
            left.push(Step::Local(op));
        }
        let mut right = Vec::new();
        let mut reach_r = Reach { down: 0, up: 0 };
        for op in right_atoms.iter().rev() {
            match op {
                FockOperator::Displacement(w) => {
                    let (t, b) = make_tables(w, cutoff + reach_r.up as usize);
                    let band = *b.iter().max().unwrap_or(&0);
                    reach_r.up += band;
                    reach_r.down += band;
                    tables.push(t);
                    bands.push(b);
                    right.push(Step::Banded(tables.len() - 1));
                }
                other => {
                    growth = growth.mul(&factor_bound(other, n, &mut reach_r)?);
                    right.push(Step::Local((*other).clone()));
                }
            }
        }
        let middle = match middle_atom {
            Some(FockOperator::Displacement(w)) => {
                let (t, b) = make_tables(w, cutoff + reach_l.up.max(reach_r.up) as usize);
                tables.push(t);
                bands.push(b);
                Some(tables.len() - 1)
            }
            _ => None,
        };
        Ok((Self { n, left, right, middle, tables, bands }, growth))
    }

    fn run(&self, steps: &[Step<T>], alpha: &State) -> SparseVec<T> {
        let mut cur: SparseVec<T> = SparseVec::new();
        cur.push((*alpha, Complex::new(T::one(), T::zero())));
        let mut next = SparseVec::new();
        for step in steps {
            next.clear();
            match step {
                Step::Local(op) => {
                    for (s, c) in &cur {
                        op.apply_state(s, *c, &mut next);
                    }
                }
                Step::Banded(i) => self.apply_banded(*i, &cur, &mut next),
            }
            normalize(&mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    fn apply_banded(&self, i: usize, v: &SparseVec<T>, out: &mut SparseVec<T>) {
        let t = &self.tables[i];
        let b = &self.bands[i];
        for (gamma, c) in v {
            let lo: Vec<u32> = (0..self.n).map(|j| gamma[j].saturating_sub(b[j])).collect();
            let hi: Vec<u32> = (0..self.n).map(|j| gamma[j] + b[j]).collect();
            let mut beta = [0u32; MAX_MODES];
            beta[..self.n].copy_from_slice(&lo);
            loop {
                let e = t.entry(&beta, gamma);
                if e.re != 0.0 || e.im != 0.0 {
                    out.push((beta, *c * Complex::new(T::lit(e.re), T::lit(e.im))));
                }
                let mut j = 0;
                while j < self.n {
                    if beta[j] < hi[j] {
                        beta[j] += 1;
                        break;
                    }
                    beta[j] = lo[j];
                    j += 1;
                }
                if j == self.n {
                    break;
                }
            }
        }
    }

    fn diagonal(&self, alpha: &State) -> C64 {
        let v = self.run(&self.right, alpha);
        match self.middle {
            None => v
                .iter()
                .find(|(s, _)| s == alpha)
                .map(|(_, c)| C64::new(c.re.as_f64(), c.im.as_f64()))
                .unwrap_or_default(),
            Some(i) => {
                let u = self.run(&self.left, alpha);
                let t = &self.tables[i];
                let mut acc = C64::new(0.0, 0.0);
                for (beta, cu) in &u {
                    let cu = C64::new(cu.re.as_f64(), -cu.im.as_f64());
                    for (gamma, cv) in &v {
                        acc += cu * t.entry(beta, gamma) * C64::new(cv.re.as_f64(), cv.im.as_f64());
                    }
                }
                acc
            }
        }
    }
}

/// Level sums of `Π factors` through `cutoff`, with the growth bound for the tail.
pub fn level_profile<T: Real>(factors: &[FockOperator<T>], n: usize, cutoff: usize) -> Result<LevelProfile, FockError> {
    if n > MAX_MODES {
        return Err(FockError::TooManyModes(n));
    }
    let (plan, growth) = Plan::build(factors, n, cutoff)?;
    let sums: Vec<C64> = (0..=cutoff as u32)
        .into_par_iter()
        .map(|l| {
            let mut acc = C64::new(0.0, 0.0);
            for alpha in level_states(n, l) {
                acc += plan.diagonal(&alpha);
            }
            acc
        })
        .collect();
    Ok(LevelProfile { n, sums, growth })
}

/// Growth bound of the level sums of `Π factors`.
pub fn growth_bound<T: Real>(factors: &[FockOperator<T>], n: usize, cutoff: usize) -> Result<Growth, FockError> {
    Plan::build(factors, n, cutoff).map(|p| p.1)
}

/// `Tr(F₀ F₁ ⋯)` over `|α| ≤ cutoff`, where `factors[damped]` is a spectral function of `H₀ + c`.
pub fn trace_product<T: Real>(factors: &[FockOperator<T>], damped: usize, cutoff: usize) -> Result<TraceValue, FockError> {
    let (n, f) = match factors.get(damped) {
        Some(FockOperator::Level { n, f }) if !matches!(f.kind, Spectral::Identity) => (*n, f.clone()),
        _ => return Err(FockError::NotDamped(damped)),
    };
    let rotated: Vec<FockOperator<T>> = factors[damped + 1..].iter().chain(&factors[..damped]).cloned().collect();
    level_profile(&rotated, n, cutoff)?.trace(&f)
}
