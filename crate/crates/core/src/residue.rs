//! Localized noncommutative residue of `R_g T_w A`: the printed closed form,
//! the Fresnel-assembled form, derivative corrections for `ord A > −2m₅`,
//! localization on conjugacy classes and the commutator harness.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::FockOperator;
use crate::group::{
    affine_fixed_points, class_contains, diagonalize_monomial, fixed_point_data, FixedPointData, GroupElement, GroupError, Monomial,
};
use crate::scalar::{c64, to_c64, Coeff, C64};
use crate::special::sphere_moment;
use crate::symbols::{compositions, ClassicalSymbol, HomogeneousComponent, MultiIndex, SymbolError};
use crate::traces::{commutator_heat_samples, log_coefficient_from, FitSpec, Grid, TraceConfig, TraceError, ORDER_H};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResidueError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("the fixed sphere is empty (m5 = 0)")]
    DegenerateSphere,
    #[error("component degree {found} differs from −2m5 = {expected}")]
    Degree { expected: i64, found: i64 },
    #[error("order {order} exceeds −2m5 = {threshold}; use the derivative-corrected residue")]
    AboveThreshold { order: i64, threshold: i64 },
    #[error("components down to degree {needed} are required, the symbol stops at {available}")]
    MissingComponents { needed: i64, available: i64 },
    #[error("angle {0} lies in πℤ/2 inside the generic block")]
    SpecialAngle(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
}

const TOL: f64 = 1e-12;

/// Quantities of the reduced stationary phase for a diagonal element, in block order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedPhaseData {
    pub fpd: FixedPointData<f64>,
    /// `α_j, β_j, γ_j` of the generic block.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Stationary shifts `(u₀ⱼ, v₀ⱼ)` for every non-fixed slot.
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
    /// `λ_j^±` as `(sin φ ∓ (1 − cos φ))/(2 cos φ)`.
    pub lambda_plus: Vec<f64>,
    pub lambda_minus: Vec<f64>,
    /// Largest gap between the two printed expressions for `λ_j^±`.
    pub lambda_form_gap: f64,
    /// Block-diagonal orthogonal matrix acting on `(u_j, v_j) ↦ (x_j, p_j)`.
    pub b: Vec<Vec<f64>>,
    pub b0: Vec<f64>,
    /// Nonzero coefficients of the quadratic phase.
    pub lambda_tilde: Vec<f64>,
    /// Number of integration variables `2n − m₂ − m₃`.
    pub n_prime: usize,
}

/// `(a, k)` with `w = a − ik`.
fn split_w(w: &[C64]) -> (Vec<f64>, Vec<f64>) {
    (w.iter().map(|z| z.re).collect(), w.iter().map(|z| -z.im).collect())
}

pub fn reduced_phase_data(e: &GroupElement<f64>, fpd: &FixedPointData<f64>) -> Result<ReducedPhaseData, ResidueError> {
    if !e.g.is_diagonal() {
        return Err(GroupError::NotDiagonal.into());
    }
    let (a, k) = split_w(&e.w);
    let [m1, m2, m3, m4, m5] = fpd.m;
    let moving = m1 + m2 + m3 + m4;
    let mut out = ReducedPhaseData {
        fpd: fpd.clone(),
        alpha: Vec::new(),
        beta: Vec::new(),
        gamma: Vec::new(),
        u0: Vec::new(),
        v0: Vec::new(),
        lambda_plus: Vec::new(),
        lambda_minus: Vec::new(),
        lambda_form_gap: 0.0,
        b: vec![vec![0.0; 2 * moving]; 2 * moving],
        b0: Vec::new(),
        lambda_tilde: Vec::new(),
        n_prime: 2 * e.n() - m2 - m3,
    };
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for slot in 0..moving {
        let j = fpd.order[slot];
        let phi = fpd.angles[slot];
        let (s, c) = phi.sin_cos();
        let block = fpd.block_of(slot);
        let (u0, v0) = match block {
            0 => {
                if s.abs() < TOL || c.abs() < TOL {
                    return Err(ResidueError::SpecialAngle(phi));
                }
                let al = -2.0 * (1.0 - c) / s;
                let be = 2.0 * k[j] / s;
                let ga = 2.0 * a[j] / phi.tan() + 2.0 * k[j];
                let lp = 0.5 * (s - (1.0 - c)) / c;
                let lm = 0.5 * (s + (1.0 - c)) / c;
                let gap = (phi.tan() / 4.0 * (2.0 + al) - lp).abs().max((phi.tan() / 4.0 * (2.0 - al) - lm).abs());
                out.lambda_form_gap = out.lambda_form_gap.max(gap);
                out.alpha.push(al);
                out.beta.push(be);
                out.gamma.push(ga);
                out.lambda_plus.push(lp);
                out.lambda_minus.push(lm);
                out.lambda_tilde.extend([-lm, -lp]);
                let den = 4.0 - al * al;
                ((2.0 * be - ga * al) / den, (2.0 * ga - be * al) / den)
            }
            1 | 2 => {
                out.lambda_tilde.push(if block == 1 { -1.0 } else { 1.0 });
                ((a[j] - k[j] * s) / 2.0, 0.0)
            }
            _ => {
                out.lambda_tilde.extend([1.0, -1.0]);
                (a[j] / 2.0, k[j] / 2.0)
            }
        };
        out.u0.push(u0);
        out.v0.push(v0);
        out.b0.extend([u0, v0]);
        let (i0, i1) = (2 * slot, 2 * slot + 1);
        if block == 1 || block == 2 {
            out.b[i0][i0] = 1.0;
            out.b[i1][i1] = 1.0;
        } else {
            out.b[i0][i0] = r;
            out.b[i0][i1] = r;
            out.b[i1][i0] = -r;
            out.b[i1][i1] = r;
        }
    }
    debug_assert_eq!(out.lambda_tilde.len() + 2 * m5, out.n_prime);
    Ok(out)
}

/// `∏ √(π/|λ̃|)·e^{i(π/4) sgn λ̃}` over the transversal phase coefficients.
pub fn fresnel_factor(rpd: &ReducedPhaseData) -> Result<C64, ResidueError> {
    let mut acc = c64(1.0, 0.0);
    for &l in &rpd.lambda_tilde {
        if l.abs() < TOL {
            return Err(ResidueError::SpecialAngle(l));
        }
        acc *= C64::from_polar((PI / l.abs()).sqrt(), PI / 4.0 * l.signum());
    }
    Ok(acc)
}

/// `∫_{S^{2m₅−1}} c dS` over the unit sphere in the coordinates `(x_j, p_j)`, `j ∈ fixed_axes`.
pub fn sphere_integral<R: Coeff>(c: &HomogeneousComponent<R>, m5: usize, fixed_axes: &[usize]) -> Result<C64, ResidueError> {
    if m5 == 0 {
        return Err(ResidueError::DegenerateSphere);
    }
    if fixed_axes.len() != m5 {
        return Err(ResidueError::Dimension(fixed_axes.len(), m5));
    }
    if c.degree() != -2 * m5 as i64 {
        return Err(ResidueError::Degree { expected: -2 * m5 as i64, found: c.degree() });
    }
    Ok(restricted_sphere_integral(c, fixed_axes))
}

fn restricted_sphere_integral<R: Coeff>(c: &HomogeneousComponent<R>, fixed_axes: &[usize]) -> C64 {
    let n = c.n();
    let mut keep = vec![false; 2 * n];
    for &j in fixed_axes {
        keep[j] = true;
        keep[n + j] = true;
    }
    let mut acc = c64(0.0, 0.0);
    for (coef, m, _) in c.terms() {
        if m.0.iter().zip(&keep).any(|(e, k)| *e > 0 && !k) {
            continue;
        }
        let alpha: Vec<u32> = fixed_axes.iter().map(|&j| m.0[j]).chain(fixed_axes.iter().map(|&j| m.0[n + j])).collect();
        acc += to_c64(&coef) * sphere_moment(&alpha);
    }
    acc
}

fn block_counts(fpd: &FixedPointData<f64>) -> (usize, usize, usize, usize, usize) {
    let [m1, m2, m3, m4, m5] = fpd.m;
    (m1, m2, m3, m4, m5)
}

fn fixed_axes(fpd: &FixedPointData<f64>) -> Vec<usize> {
    let moving = fpd.order.len() - fpd.m5();
    let mut axes = fpd.order[moving..].to_vec();
    axes.sort_unstable();
    axes
}

/// `∏_{j ≤ m₁} √(1 + i tg φ_j) · ∏_{j ≤ m₁+m₂+m₃} e^{(i/4) ctg(φ_j/2)(k_j² + a_j²)}`.
fn printed_gaussian_factors(e: &GroupElement<f64>, fpd: &FixedPointData<f64>) -> C64 {
    let (a, k) = split_w(&e.w);
    let (m1, m2, m3, _, _) = block_counts(fpd);
    let mut acc = c64(1.0, 0.0);
    for slot in 0..m1 + m2 + m3 {
        let phi = fpd.angles[slot];
        let j = fpd.order[slot];
        if slot < m1 {
            acc *= (c64(1.0, phi.tan())).sqrt();
        }
        let cot = 1.0 / (phi / 2.0).tan();
        acc *= C64::from_polar(1.0, 0.25 * cot * (k[j] * k[j] + a[j] * a[j]));
    }
    acc
}

/// The residue formula for diagonal `g` with the printed prefactor `(2π)^{−n+m₂+m₃}`.
pub fn residue_printed<R: Coeff>(e: &GroupElement<f64>, a: &HomogeneousComponent<R>) -> Result<C64, ResidueError> {
    let fpd = fixed_point_data(&e.g)?;
    if a.n() != e.n() {
        return Err(ResidueError::Dimension(a.n(), e.n()));
    }
    let (_, m2, m3, _, m5) = block_counts(&fpd);
    let integral = sphere_integral(a, m5, &fixed_axes(&fpd))?;
    let pre = (2.0 * PI).powi(m2 as i32 + m3 as i32 - e.n() as i32);
    Ok(printed_gaussian_factors(e, &fpd) * pre * integral)
}

/// `C_res`: the printed Gaussian factors with normalization `(2π)^{−n+(m₂+m₃)/2}`.
pub fn c_res(e: &GroupElement<f64>, fpd: &FixedPointData<f64>) -> C64 {
    let (_, m2, m3, _, _) = block_counts(fpd);
    let pre = (2.0 * PI).powf((m2 + m3) as f64 / 2.0 - e.n() as f64);
    printed_gaussian_factors(e, fpd) * pre
}

/// Diagonal data `(u⁻¹w, g₀)` and the symbol `a ∘ u` for a monomial element.
pub fn diagonal_reduction(e: &GroupElement<f64>, a: &ClassicalSymbol<f64>) -> Result<(GroupElement<f64>, ClassicalSymbol<f64>), ResidueError> {
    if a.n() != e.n() {
        return Err(ResidueError::Dimension(a.n(), e.n()));
    }
    if e.g.is_diagonal() {
        return Ok((e.clone(), a.clone()));
    }
    let n = e.n();
    let d = diagonalize_monomial(&e.g);
    let w: Vec<C64> = (0..n).map(|k| (0..n).map(|i| d.u[i][k].conj() * e.w[i]).sum()).collect();
    let m = real_form(&d.u);
    Ok((GroupElement::new(w, d.g0)?, a.pullback_orthogonal(&m)))
}

/// Real `2n × 2n` matrix of `ζ ↦ uζ` with `ζ = x − ip`.
pub fn real_form(u: &[Vec<C64>]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut m = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = u[i][j];
            m[i][j] = z.re;
            m[i][n + j] = z.im;
            m[n + i][j] = -z.im;
            m[n + i][n + j] = z.re;
        }
    }
    m
}

fn has_affine_fixed_point(e: &GroupElement<f64>) -> bool {
    affine_fixed_points(e, 1e-12).is_some()
}

/// Residue through `C_res · γ_Q · ∫_{S^{2m₅−1}} a_{−2m₅}` for `ord A ≤ −2m₅`.
pub fn residue_assembled(e: &GroupElement<f64>, a: &ClassicalSymbol<f64>) -> Result<C64, ResidueError> {
    let (e, a) = diagonal_reduction(e, a)?;
    let fpd = fixed_point_data(&e.g)?;
    let m5 = fpd.m5();
    let threshold = -2 * m5 as i64;
    if m5 == 0 || a.order() < threshold || !has_affine_fixed_point(&e) {
        return Ok(c64(0.0, 0.0));
    }
    if a.order() > threshold {
        return Err(ResidueError::AboveThreshold { order: a.order(), threshold });
    }
    let rpd = reduced_phase_data(&e, &fpd)?;
    let integral = sphere_integral(a.principal(), m5, &fixed_axes(&fpd))?;
    Ok(c_res(&e, &fpd) * fresnel_factor(&rpd)? * integral)
}

/// Scalar `c` and phase-space shift `δ` with `R_g T_w = c·T_v R_g T_{−v}` and
/// `T_{−v} op^w(a) T_v = op^w(a(· + δ))`, for diagonal `g` with a fixed point.
pub fn centering(e: &GroupElement<f64>) -> Result<Option<(C64, Vec<f64>)>, ResidueError> {
    if !e.g.is_diagonal() {
        return Err(GroupError::NotDiagonal.into());
    }
    let n = e.n();
    let mut v = vec![c64(0.0, 0.0); n];
    for j in 0..n {
        let gap = C64::from_polar(1.0, -e.g.angles[j]) - 1.0;
        if gap.norm() < TOL {
            if e.w[j].norm() > TOL {
                return Ok(None);
            }
        } else {
            v[j] = e.w[j] / gap;
        }
    }
    let s = GroupElement::translation(v.clone());
    let (p1, left) = s.inverse().compose(e)?;
    let (p2, _) = left.compose(&s)?;
    let delta = v.iter().map(|z| z.re).chain(v.iter().map(|z| -z.im)).collect();
    Ok(Some((p1 * p2, delta)))
}

/// `Σ_{|α| = k} δ^α/α! ∂^α c`.
fn taylor_shift(c: &HomogeneousComponent<f64>, delta: &[f64], k: u32) -> HomogeneousComponent<f64> {
    let dim = c.dim();
    let mut out = HomogeneousComponent::zero(c.n(), c.degree() - k as i64);
    if k == 0 {
        return c.clone();
    }
    let active: Vec<usize> = (0..dim).filter(|&i| delta[i] != 0.0).collect();
    if active.is_empty() {
        return out;
    }
    for comp in compositions(active.len(), k) {
        let mut alpha = vec![0u32; dim];
        let mut weight = 1.0;
        for (slot, &e) in comp.iter().enumerate() {
            let axis = active[slot];
            alpha[axis] = e;
            weight *= delta[axis].powi(e as i32) / (1..=e).map(f64::from).product::<f64>();
        }
        let d = c.diff_multi(&MultiIndex(alpha));
        out = out.add(&d.scale(&c64(weight, 0.0)));
    }
    out
}

/// `Σ_t −(i/4) ctg(φ_t/2) (∂²_{x_t} + ∂²_{p_t})` over transversal modes.
fn transversal_laplacian(c: &HomogeneousComponent<f64>, modes: &[(usize, f64)]) -> HomogeneousComponent<f64> {
    let n = c.n();
    let mut out = HomogeneousComponent::zero(n, c.degree() - 2);
    for &(j, phi) in modes {
        let cot = 1.0 / (phi / 2.0).tan();
        if cot.abs() < TOL {
            continue;
        }
        let lap = c.diff(j).diff(j).add(&c.diff(n + j).diff(n + j));
        out = out.add(&lap.scale(&c64(0.0, -0.25 * cot)));
    }
    out
}

/// One admissible `(j, |α|, J)` contribution to the derivative-corrected residue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseTerm {
    pub j: usize,
    pub alpha: u32,
    #[serde(rename = "J")]
    pub big_j: u32,
    pub value: C64,
}

/// Residue for `ord A ≥ −2m₅` from shifted components `a_{𝔞−j}`, transversal
/// Gaussian moments of order `J` and the selection rule `𝔞 − j − |α| − 2J = −2m₅`.
/// Components beyond those stored in `a` count as zero; `max_order` caps how many are consumed.
pub fn residue_case_iii_terms(e: &GroupElement<f64>, a: &ClassicalSymbol<f64>, max_order: usize) -> Result<Vec<CaseTerm>, ResidueError> {
    let (e, a) = diagonal_reduction(e, a)?;
    let fpd = fixed_point_data(&e.g)?;
    let m5 = fpd.m5();
    let target = -2 * m5 as i64;
    if m5 == 0 || a.order() < target {
        return Ok(Vec::new());
    }
    let Some((phase, delta)) = centering(&e)? else {
        return Ok(Vec::new());
    };
    let needed = (a.order() - target) as usize + 1;
    if max_order < needed {
        return Err(ResidueError::MissingComponents { needed: target, available: a.order() - max_order as i64 + 1 });
    }
    let moving = fpd.order.len() - m5;
    let modes: Vec<(usize, f64)> = (0..moving).map(|s| (fpd.order[s], fpd.angles[s])).collect();
    let mut scale = phase * (2.0 * PI).powi(-(m5 as i32));
    for &(_, phi) in &modes {
        scale /= c64(1.0, 0.0) - C64::from_polar(1.0, -phi);
    }
    let axes = fixed_axes(&fpd);
    let mut jobs = Vec::new();
    for j in 0..needed {
        let gap = (a.order() - j as i64 - target) as u32;
        for k in (0..=gap).rev().filter(|k| (gap - k).is_multiple_of(2)) {
            jobs.push((j, k, (gap - k) / 2));
        }
    }
    use rayon::prelude::*;
    let terms = jobs
        .par_iter()
        .map(|&(j, k, big_j)| {
            let mut c = taylor_shift(&a.component(j), &delta, k);
            let mut fact = 1.0;
            for i in 1..=big_j {
                c = transversal_laplacian(&c, &modes);
                fact *= i as f64;
            }
            CaseTerm { j, alpha: k, big_j, value: scale * restricted_sphere_integral(&c, &axes) / fact }
        })
        .collect();
    Ok(terms)
}

pub fn residue_case_iii(e: &GroupElement<f64>, a: &ClassicalSymbol<f64>, max_order: usize) -> Result<C64, ResidueError> {
    let terms = residue_case_iii_terms(e, a, max_order)?;
    Ok(terms.iter().map(|t| t.value).sum())
}

/// Residue by whichever closed form applies to the order of `A`.
pub fn residue(e: &GroupElement<f64>, a: &ClassicalSymbol<f64>) -> Result<C64, ResidueError> {
    match residue_assembled(e, a) {
        Err(ResidueError::AboveThreshold { .. }) => residue_case_iii(e, a, usize::MAX),
        other => other,
    }
}

/// Finite conjugacy class, as produced by [`crate::group::conjugacy_class`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyClass {
    pub elements: Vec<GroupElement<f64>>,
    pub complete: bool,
}

/// `Σ` of residues over summands whose element lies in `class`.
pub fn localized_residue(class: &ConjugacyClass, summands: &[(GroupElement<f64>, ClassicalSymbol<f64>)]) -> Result<C64, ResidueError> {
    if !class.complete {
        return Err(GroupError::InfiniteClass.into());
    }
    let mut acc = c64(0.0, 0.0);
    for (e, a) in summands {
        if class_contains(&class.elements, e, 1e-9) {
            acc += residue(e, a)?;
        }
    }
    Ok(acc)
}

/// `ord H` times the heat-trace log coefficient of `R_g T_w A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResidue {
    pub value: C64,
    pub uncertainty: f64,
}

/// Grid, lattice and cutoff settings for spectral residues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub grid: Grid,
    pub max_exponent: Ratio<i64>,
    /// Restrict the first exponent family to even `j`.
    pub even: bool,
    pub tol: f64,
    pub max_cutoff: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { grid: Grid::default(), max_exponent: Ratio::from_integer(3), even: false, tol: 1e-13, max_cutoff: 20_000 }
    }
}

impl SpectralOptions {
    /// Short grid near `t = 0` for traces with complex singularities close to the origin.
    pub fn near_zero() -> Self {
        Self { grid: Grid::new(0.005, 2f64.powf(0.25), 17), max_exponent: Ratio::from_integer(3), even: true, tol: 1e-12, max_cutoff: 20_000 }
    }

    fn spec(&self, m: usize, order: i64) -> FitSpec {
        let s = FitSpec::new(m as i64, order, ORDER_H, self.max_exponent);
        if self.even {
            s.even()
        } else {
            s
        }
    }
}

pub fn spectral_residue(cfg: &TraceConfig, opt: &SpectralOptions) -> Result<SpectralResidue, ResidueError> {
    let (samples, _) = crate::traces::heat_samples(cfg, &opt.grid, opt.tol, opt.max_cutoff)?;
    let lc = log_coefficient_from(&samples, &opt.spec(cfg.fixed_dim(), cfg.order_a))?;
    let h = ORDER_H as f64;
    Ok(SpectralResidue { value: lc.value * h, uncertainty: lc.uncertainty * h })
}

/// Factor `R_g T_w A` of the trace-property harness.
#[derive(Clone, Debug, PartialEq)]
pub struct HarnessFactor {
    pub element: GroupElement<f64>,
    pub a: FockOperator<f64>,
    pub order: i64,
}

impl HarnessFactor {
    pub fn new(element: GroupElement<f64>, a: FockOperator<f64>, order: i64) -> Self {
        Self { element, a, order }
    }

    fn is_scalar(&self) -> bool {
        self.element.g.is_identity(0.0) && self.element.w.iter().all(|z| z.norm() == 0.0) && matches!(self.a, FockOperator::Identity { .. })
    }

    fn factors(&self) -> Vec<FockOperator<f64>> {
        TraceConfig { element: self.element.clone(), a: self.a.clone(), order_a: self.order, shift: 0.0 }.factors()
    }
}

/// `|res[B₁, B₂]|` from the log coefficient of `Tr([B₁, B₂] e^{−tH})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceDefect {
    pub defect: f64,
    pub uncertainty: f64,
}

pub fn trace_defect(b1: &HarnessFactor, b2: &HarnessFactor, shift: f64, opt: &SpectralOptions) -> Result<TraceDefect, ResidueError> {
    let n = b1.element.n();
    if b2.element.n() != n {
        return Err(ResidueError::Dimension(n, b2.element.n()));
    }
    if b1.is_scalar() || b2.is_scalar() {
        return Ok(TraceDefect { defect: 0.0, uncertainty: 0.0 });
    }
    let (_, product) = b1.element.compose(&b2.element)?;
    let m = diagonalize_monomial(&product.g).g0.angles.iter().filter(|a| a.abs() < 1e-12).count();
    let samples = commutator_heat_samples(&b1.factors(), &b2.factors(), n, shift, &opt.grid, opt.tol, opt.max_cutoff)?;
    let lc = log_coefficient_from(&samples, &opt.spec(m, b1.order + b2.order))?;
    let h = ORDER_H as f64;
    Ok(TraceDefect { defect: lc.value.norm() * h, uncertainty: lc.uncertainty * h })
}

/// Monomial-unitary convenience: diagonal element from angles.
pub fn diagonal_element(w: Vec<C64>, angles: Vec<f64>) -> Result<GroupElement<f64>, ResidueError> {
    Ok(GroupElement::new(w, Monomial::diagonal(angles))?)
}

/// Inputs, both closed forms, the spectral oracle and the ratio diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueReport {
    pub n: usize,
    pub order: i64,
    pub m: [usize; 5],
    pub printed: Option<C64>,
    pub assembled: C64,
    pub oracle: Option<SpectralResidue>,
    pub ratio_assembled_printed: Option<C64>,
}

pub fn residue_report(e: &GroupElement<f64>, a: &ClassicalSymbol<f64>, oracle: Option<SpectralResidue>) -> Result<ResidueReport, ResidueError> {
    let (de, da) = diagonal_reduction(e, a)?;
    let fpd = fixed_point_data(&de.g)?;
    let assembled = residue(e, a)?;
    let printed = if fpd.m5() > 0 && da.order() == -2 * fpd.m5() as i64 { Some(residue_printed(&de, da.principal())?) } else { None };
    let ratio = printed.filter(|p| p.norm() > 0.0).map(|p| assembled / p);
    Ok(ResidueReport { n: e.n(), order: a.order(), m: fpd.m, printed, assembled, oracle, ratio_assembled_printed: ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{displacement, interior_defect, metaplectic, op_weyl_poly, FockSpace};
    use crate::symbols::poly::Poly;
    use std::f64::consts::FRAC_PI_3;

    fn h2_inv_power(n: usize) -> ClassicalSymbol<f64> {
        ClassicalSymbol::from_component(HomogeneousComponent::h2_pow_neg(n, n as i64, c64(1.0, 0.0)))
    }

    fn rot(angles: Vec<f64>) -> GroupElement<f64> {
        diagonal_element(vec![c64(0.0, 0.0); angles.len()], angles).unwrap()
    }

    #[test]
    fn identity_residue() {
        for n in 1..=3usize {
            let want = 2.0 / (1..n).map(|k| k as f64).product::<f64>();
            let e = GroupElement::identity(n);
            let a = h2_inv_power(n);
            let p = residue_printed(&e, a.principal()).unwrap();
            let s = residue_assembled(&e, &a).unwrap();
            assert!((p.re - want).abs() < 1e-12 && p.im.abs() < 1e-12, "{n} {p}");
            assert!((s - p).norm() < 1e-12);
        }
    }

    #[test]
    fn lambda_forms() {
        let e = rot(vec![FRAC_PI_3]);
        let fpd = fixed_point_data(&e.g).unwrap();
        let r = reduced_phase_data(&e, &fpd).unwrap();
        assert!(r.lambda_form_gap < 1e-15);
        assert!((r.lambda_plus[0] * r.lambda_minus[0] - 0.5).abs() < 1e-15);
        assert_eq!(r.b0, vec![0.0, 0.0]);
        assert_eq!(r.n_prime, 2);
        let b = &r.b;
        let btb: f64 = (0..2).map(|i| (0..2).map(|j| b[i][j] * b[i][j]).sum::<f64>()).sum();
        assert!((btb - 2.0).abs() < 1e-15);
    }

    #[test]
    fn fresnel_examples() {
        let e = GroupElement::identity(2);
        let fpd = fixed_point_data(&e.g).unwrap();
        assert_eq!(fresnel_factor(&reduced_phase_data(&e, &fpd).unwrap()).unwrap(), c64(1.0, 0.0));
        let phi = 0.7;
        let e = rot(vec![phi, 0.0]);
        let fpd = fixed_point_data(&e.g).unwrap();
        let r = reduced_phase_data(&e, &fpd).unwrap();
        let want = c64(0.0, -PI / (r.lambda_plus[0] * r.lambda_minus[0]).sqrt());
        assert!((fresnel_factor(&r).unwrap() - want).norm() < 1e-14);
        let e = rot(vec![PI, 0.0]);
        let fpd = fixed_point_data(&e.g).unwrap();
        assert!((fresnel_factor(&reduced_phase_data(&e, &fpd).unwrap()).unwrap() - PI).norm() < 1e-14);
    }

    #[test]
    fn sphere_parity_and_errors() {
        let mut odd = Poly::new();
        odd.insert(MultiIndex(vec![1, 0, 0, 0]), c64(1.0, 0.0));
        let c = HomogeneousComponent::from_terms(2, -2, [(c64(1.0, 0.0), MultiIndex(vec![1, 0, 0, 0]), Ratio::new(3, 2))]).unwrap();
        assert_eq!(sphere_integral(&c, 1, &[0]).unwrap(), c64(0.0, 0.0));
        assert!(matches!(sphere_integral(&c, 0, &[]), Err(ResidueError::DegenerateSphere)));
        assert!(sphere_integral(&c, 2, &[0, 1]).is_err());
    }

    #[test]
    fn rotation_closed_form() {
        for phi in [FRAC_PI_3, 2.0 * FRAC_PI_3, -1.0, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2, PI] {
            let e = rot(vec![phi, 0.0]);
            let a = ClassicalSymbol::from_component(HomogeneousComponent::h2_pow_neg(2, 1, c64(1.0, 0.0)));
            let want = 2.0 / (1.0 - C64::from_polar(1.0, -phi));
            let s = residue_assembled(&e, &a).unwrap();
            assert!((s - want).norm() < 1e-12, "{phi} {s} {want}");
            let c = residue_case_iii(&e, &a, 4).unwrap();
            assert!((c - want).norm() < 1e-12);
        }
        let e = rot(vec![0.5, 0.0]);
        let a = ClassicalSymbol::from_component(HomogeneousComponent::h2_pow_neg(2, 2, c64(1.0, 0.0)));
        assert_eq!(residue_assembled(&e, &a).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn case_iii_quadratic_amplitude() {
        let phi = 0.9;
        let z = C64::from_polar(1.0, -phi);
        let mut x1sq = Poly::new();
        x1sq.insert(MultiIndex(vec![2, 0, 0, 0]), c64(1.0, 0.0));
        let quad = ClassicalSymbol::from_poly(2, &x1sq);
        let inv = ClassicalSymbol::from_component(HomogeneousComponent::h2_pow_neg(2, 1, c64(1.0, 0.0)));
        let a = quad.compose(&inv, 3, crate::Convention::Weyl);
        let got = residue_case_iii(&rot(vec![phi, 0.0]), &a, 8).unwrap();
        let want = (1.0 + z) / ((1.0 - z) * (1.0 - z));
        assert!((got - want).norm() < 1e-12, "{got} {want}");
        let parity = residue(&rot(vec![PI, 0.0]), &quad).unwrap();
        assert!(parity.norm() < 1e-14);
    }

    #[test]
    fn centering_matches_operators() {
        let space = FockSpace::new(1, 70).unwrap();
        let w = vec![c64(0.4, -0.3)];
        let e = GroupElement::new(w.clone(), Monomial::diagonal(vec![1.2])).unwrap();
        let (c, delta) = centering(&e).unwrap().unwrap();
        let gap = C64::from_polar(1.0, -1.2) - 1.0;
        let v = vec![w[0] / gap];
        let lhs = FockOperator::product(&[
            displacement(vec![-v[0]]).unwrap(),
            metaplectic(e.g.clone()).unwrap(),
            displacement(w.clone()).unwrap(),
            displacement(v.clone()).unwrap(),
        ]);
        let l = lhs.to_dense(&space);
        let r = metaplectic::<f64>(e.g.clone()).unwrap().to_dense(&space);
        for k in 0..30 {
            assert!((l[(k, k)] - c * r[(k, k)]).norm() < 1e-10, "{k} {} {}", l[(k, k)], c * r[(k, k)]);
        }
        for axis in 0..2 {
            let mut p = Poly::new();
            let mut m = vec![0u32; 2];
            m[axis] = 1;
            p.insert(MultiIndex(m), c64(1.0, 0.0));
            let conj = FockOperator::product(&[displacement(vec![-v[0]]).unwrap(), op_weyl_poly::<f64, f64>(1, &p).unwrap(), displacement(v.clone()).unwrap()]);
            p.insert(MultiIndex(vec![0, 0]), c64(delta[axis], 0.0));
            let shifted = op_weyl_poly::<f64, f64>(1, &p).unwrap();
            assert!(interior_defect(&conj, &shifted, &space, 30) < 1e-10);
        }
        let printed = C64::from_polar(1.0, 0.25 / (0.6f64).tan() * w[0].norm_sqr());
        assert!((c - printed).norm() < 1e-12, "{c} {printed}");
    }
}
