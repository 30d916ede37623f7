use nalgebra::{DMatrix, DVector};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::TraceError;
use crate::scalar::{ratio_to_f64, C64};
use crate::special::ln_q;

/// Largest accepted condition number of the column-scaled design matrix.
pub const MAX_CONDITIONING: f64 = 1e10;

/// Exponent lattice `{(j − 2m − 𝔞)/𝔪}` together with `{j, j·ln}` for integers `j ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    /// Complex dimension of the fixed space.
    pub m: i64,
    pub order_a: i64,
    pub order_h: i64,
    /// Largest exponent kept.
    pub max_exponent: Ratio<i64>,
    /// Keep only even `j` in the first family.
    pub even_only: bool,
}

impl FitSpec {
    pub fn new(m: i64, order_a: i64, order_h: i64, max_exponent: Ratio<i64>) -> Self {
        Self { m, order_a, order_h, max_exponent, even_only: false }
    }

    /// Lattice holding the first `n_terms` exponents of the first family.
    pub fn with_terms(m: i64, order_a: i64, order_h: i64, n_terms: usize) -> Self {
        let j = n_terms.max(1) as i64 - 1;
        Self::new(m, order_a, order_h, Ratio::new(j - 2 * m - order_a, order_h))
    }

    pub fn even(mut self) -> Self {
        self.even_only = true;
        self
    }

    /// Basis functions `(exponent, has_log)` in increasing order.
    pub fn basis(&self) -> Vec<(Ratio<i64>, bool)> {
        let mut exps = std::collections::BTreeSet::new();
        let step = if self.even_only { 2 } else { 1 };
        let mut j = 0i64;
        loop {
            let e = Ratio::new(j - 2 * self.m - self.order_a, self.order_h);
            if e > self.max_exponent {
                break;
            }
            exps.insert(e);
            j += step;
        }
        let top = self.max_exponent.floor().to_integer();
        for k in 0..=top {
            exps.insert(Ratio::from_integer(k));
        }
        let mut out = Vec::new();
        for e in exps {
            out.push((e, false));
            if e.is_integer() && e >= Ratio::from_integer(0) {
                out.push((e, true));
            }
        }
        out
    }
}

/// Fitted expansion coefficients on an exponent lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponents: Vec<(Ratio<i64>, bool)>,
    pub coefficients: Vec<C64>,
    pub residual_norm: f64,
    pub conditioning: f64,
}

impl FitResult {
    pub fn coefficient(&self, exponent: Ratio<i64>, log: bool) -> C64 {
        self.exponents
            .iter()
            .position(|&(e, l)| e == exponent && l == log)
            .map(|i| self.coefficients[i])
            .unwrap_or_default()
    }

    /// Largest `|c|` among log partners other than `exclude`.
    pub fn max_log_except(&self, exclude: &[Ratio<i64>]) -> f64 {
        self.exponents
            .iter()
            .zip(&self.coefficients)
            .filter(|((e, l), _)| *l && !exclude.contains(e))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// `Σ c·t^e (ln t)^l`.
    pub fn eval(&self, t: f64) -> C64 {
        self.exponents
            .iter()
            .zip(&self.coefficients)
            .map(|((e, l), c)| c * t.powf(ratio_to_f64(e)) * if *l { t.ln() } else { 1.0 })
            .sum()
    }
}

/// Column-scaled SVD least squares of `y ≈ Σ c_k φ_k(x)`.
pub(crate) fn least_squares(columns: &[Vec<f64>], y: &[C64]) -> Result<(Vec<C64>, f64, f64), TraceError> {
    let rows = y.len();
    let cols = columns.len();
    if rows < cols {
        return Err(TraceError::Fit(format!("{rows} samples for {cols} basis functions")));
    }
    let scales: Vec<f64> = columns.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    if scales.iter().any(|s| *s == 0.0 || !s.is_finite()) {
        return Err(TraceError::Fit("degenerate basis column".into()));
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| columns[j][i] / scales[j]);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = smax / smin;
    if !(cond < MAX_CONDITIONING) {
        return Err(TraceError::IllConditioned(cond));
    }
    let solve = |b: DVector<f64>| svd.solve(&b, 0.0).map_err(|e| TraceError::Fit(e.to_string()));
    let re = solve(DVector::from_iterator(rows, y.iter().map(|v| v.re)))?;
    let im = solve(DVector::from_iterator(rows, y.iter().map(|v| v.im)))?;
    let coef: Vec<C64> = (0..cols).map(|j| C64::new(re[j], im[j]) / scales[j]).collect();
    let mut res = 0.0;
    for i in 0..rows {
        let fit: C64 = (0..cols).map(|j| coef[j] * columns[j][i]).sum();
        res += (fit - y[i]).norm_sqr();
    }
    Ok((coef, res.sqrt(), cond))
}

/// Fit `Σ c t^e (ln t)^l` over the lattice of `spec`.
pub fn fit_expansion(samples: &[(f64, C64)], spec: &FitSpec) -> Result<FitResult, TraceError> {
    if samples.iter().any(|(t, _)| *t <= 0.0) {
        return Err(TraceError::Domain("fit abscissae must be positive".into()));
    }
    let basis = spec.basis();
    let columns: Vec<Vec<f64>> = basis
        .iter()
        .map(|(e, l)| {
            let ef = ratio_to_f64(e);
            samples.iter().map(|(t, _)| t.powf(ef) * if *l { t.ln() } else { 1.0 }).collect()
        })
        .collect();
    let y: Vec<C64> = samples.iter().map(|s| s.1).collect();
    let (coefficients, residual_norm, conditioning) = least_squares(&columns, &y)?;
    Ok(FitResult { exponents: basis, coefficients, residual_norm, conditioning })
}

/// Least squares in exact rational arithmetic for real data known to high precision.
/// Logarithms are evaluated to `bits` bits; every exponent of the lattice must be an integer.
pub fn fit_expansion_exact(samples: &[(BigRational, BigRational)], spec: &FitSpec, bits: u32) -> Result<FitResult, TraceError> {
    let basis = spec.basis();
    if basis.iter().any(|(e, _)| !e.is_integer()) {
        return Err(TraceError::Domain("exact fits need an integer exponent lattice".into()));
    }
    if samples.iter().any(|(t, _)| !t.is_positive()) {
        return Err(TraceError::Domain("fit abscissae must be positive".into()));
    }
    let (rows, cols) = (samples.len(), basis.len());
    if rows < cols {
        return Err(TraceError::Fit(format!("{rows} samples for {cols} basis functions")));
    }
    let design: Vec<Vec<BigRational>> = samples
        .iter()
        .map(|(t, _)| {
            let ln = ln_q(t, bits);
            basis
                .iter()
                .map(|(e, l)| {
                    let p = num_traits::pow::pow(t.clone(), e.to_integer().unsigned_abs() as usize);
                    let p = if *e.numer() < 0 { p.recip() } else { p };
                    if *l {
                        p * &ln
                    } else {
                        p
                    }
                })
                .collect()
        })
        .collect();
    let mut normal = vec![vec![BigRational::zero(); cols + 1]; cols];
    for (row, (_, y)) in design.iter().zip(samples) {
        for i in 0..cols {
            for j in i..cols {
                let v = &row[i] * &row[j];
                normal[i][j] += v;
            }
            normal[i][cols] += &row[i] * y;
        }
    }
    for i in 0..cols {
        for j in 0..i {
            normal[i][j] = normal[j][i].clone();
        }
    }
    let coef = solve_exact(normal).ok_or_else(|| TraceError::Fit("singular normal equations".into()))?;
    let columns: Vec<Vec<f64>> = (0..cols).map(|j| design.iter().map(|r| r[j].to_f64().unwrap_or(f64::NAN)).collect()).collect();
    let conditioning = scaled_conditioning(&columns);
    let mut res = 0.0;
    for (row, (_, y)) in design.iter().zip(samples) {
        let fit: BigRational = row.iter().zip(&coef).map(|(a, c)| a * c).sum();
        res += (fit - y).to_f64().unwrap_or(f64::NAN).powi(2);
    }
    Ok(FitResult {
        exponents: basis,
        coefficients: coef.iter().map(|c| C64::new(c.to_f64().unwrap_or(f64::NAN), 0.0)).collect(),
        residual_norm: res.sqrt(),
        conditioning,
    })
}

/// Gaussian elimination on an augmented square system.
fn solve_exact(mut m: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let n = m.len();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        let pivot = m[k][k].clone();
        for j in k..=n {
            m[k][j] = &m[k][j] / &pivot;
        }
        for i in 0..n {
            if i != k && !m[i][k].is_zero() {
                let f = m[i][k].clone();
                for j in k..=n {
                    let d = &f * &m[k][j];
                    m[i][j] -= d;
                }
            }
        }
    }
    debug_assert!(m.iter().enumerate().all(|(i, r)| r[i].is_one()));
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

fn scaled_conditioning(columns: &[Vec<f64>]) -> f64 {
    let rows = columns[0].len();
    let scales: Vec<f64> = columns.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let a = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i] / scales[j]);
    let sv = a.singular_values();
    sv.max() / sv.min()
}

/// Fit a resolvent trace in `μ = (−λ)^{1/𝔪}`: terms `μ^{−𝔪(e+K)}` and `μ^{−𝔪(j+K)} ln μ`.
pub fn fit_resolvent(samples: &[(f64, C64)], spec: &FitSpec, k: u32) -> Result<FitResult, TraceError> {
    let basis = spec.basis();
    let mm = spec.order_h as f64;
    let columns: Vec<Vec<f64>> = basis
        .iter()
        .map(|(e, l)| {
            let p = -mm * (ratio_to_f64(e) + k as f64);
            samples.iter().map(|(mu, _)| mu.powf(p) * if *l { mu.ln() } else { 1.0 }).collect()
        })
        .collect();
    let y: Vec<C64> = samples.iter().map(|s| s.1).collect();
    let (coefficients, residual_norm, conditioning) = least_squares(&columns, &y)?;
    Ok(FitResult { exponents: basis, coefficients, residual_norm, conditioning })
}

/// Geometric grid `t₀·r^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { start: 0.05, ratio: 2f64.powf(0.25), count: 17 }
    }
}

impl Grid {
    pub fn new(start: f64, ratio: f64, count: usize) -> Self {
        Self { start, ratio, count }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.start * self.ratio.powi(i as i32)).collect()
    }

    pub fn end(&self) -> f64 {
        self.start * self.ratio.powi(self.count as i32 - 1)
    }
}
