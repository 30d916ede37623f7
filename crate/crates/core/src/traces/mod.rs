//! Heat, zeta and resolvent traces of `R_g T_w A` against `H = H₀ + c`, and
//! extraction of their asymptotic expansion coefficients.

mod fit;

use num_complex::Complex;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fit::{fit_expansion, fit_expansion_exact, fit_resolvent, FitResult, FitSpec, Grid, MAX_CONDITIONING};

use crate::fock::{
    growth_bound, level_profile, select_cutoff, FockError, FockOperator, LevelFn, LevelProfile, Spectral, TraceValue,
};
use crate::group::{affine_fixed_points, diagonalize_monomial, GroupElement};
use crate::scalar::C64;
use crate::special::{rgamma_c, upper_gamma};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("design matrix conditioning {0:.3e} exceeds the limit")]
    IllConditioned(f64),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Order of the auxiliary operator `H₀ + c`.
pub const ORDER_H: i64 = 2;

/// `R_g T_w A` against the auxiliary operator `H₀ + shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceConfig {
    pub element: GroupElement<f64>,
    pub a: FockOperator<f64>,
    /// Declared order of `A`.
    pub order_a: i64,
    pub shift: f64,
}

/// One trace sample at abscissa `x` (`t`, `μ` or `Re z`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub value: C64,
    pub tail: f64,
}

impl TraceConfig {
    pub fn new(element: GroupElement<f64>, a: FockOperator<f64>, order_a: i64, shift: f64) -> Result<Self, TraceError> {
        if shift < 0.0 {
            return Err(TraceError::Domain(format!("auxiliary shift {shift} is negative")));
        }
        if let Some(m) = a.n() {
            if m != element.n() {
                return Err(FockError::Dimension(m, element.n()).into());
            }
        }
        Ok(Self { element, a, order_a, shift })
    }

    pub fn n(&self) -> usize {
        self.element.n()
    }

    pub fn with_shift(&self, shift: f64) -> Self {
        Self { shift, ..self.clone() }
    }

    /// Complex dimension of the fixed space of `g`.
    pub fn fixed_dim(&self) -> usize {
        diagonalize_monomial(&self.element.g).g0.angles.iter().filter(|a| a.abs() < 1e-12).count()
    }

    pub fn has_fixed_points(&self) -> bool {
        affine_fixed_points(&self.element, 1e-12).is_some()
    }

    /// `[R_g, T_w, A]` with trivial factors dropped.
    pub fn factors(&self) -> Vec<FockOperator<f64>> {
        let mut out = Vec::new();
        if !self.element.g.is_identity(0.0) {
            out.push(FockOperator::Metaplectic(self.element.g.clone()));
        }
        if self.element.w.iter().any(|z| z.norm() > 0.0) {
            out.push(FockOperator::Displacement(self.element.w.clone()));
        }
        out.push(self.a.clone());
        out
    }

    pub fn profile(&self, cutoff: usize) -> Result<LevelProfile, TraceError> {
        Ok(level_profile(&self.factors(), self.n(), cutoff)?)
    }

    /// Smallest cutoff with certified tail `≤ tol` for `f`, capped at `max_cutoff`.
    pub fn cutoff_for(&self, f: &LevelFn<f64>, tol: f64, max_cutoff: usize) -> Result<usize, TraceError> {
        certified_cutoff(&self.factors(), self.n(), f, tol, max_cutoff)
    }

    /// Default fit lattice for this configuration.
    pub fn fit_spec(&self, max_exponent: Ratio<i64>) -> FitSpec {
        FitSpec::new(self.fixed_dim() as i64, self.order_a, ORDER_H, max_exponent)
    }
}

/// Smallest cutoff with certified tail `≤ tol`, probing growth bounds on doubling windows.
fn certified_cutoff(factors: &[FockOperator<f64>], n: usize, f: &LevelFn<f64>, tol: f64, max_cutoff: usize) -> Result<usize, TraceError> {
    let mut window = 256usize.min(max_cutoff);
    loop {
        let growth = growth_bound(factors, n, window)?;
        match select_cutoff(&growth, f, n, tol, window) {
            Ok(c) => return Ok(c),
            Err(e) if window >= max_cutoff => return Err(e.into()),
            Err(_) => window = (window * 4).min(max_cutoff),
        }
    }
}

/// `Tr(R_g T_w A e^{−tH})`.
pub fn heat_trace(cfg: &TraceConfig, t: f64, cutoff: usize) -> Result<TraceValue, TraceError> {
    if t <= 0.0 {
        return Err(TraceError::Domain(format!("heat time {t} must be positive")));
    }
    Ok(cfg.profile(cutoff)?.trace(&LevelFn::heat(t, cfg.shift))?)
}

/// `Tr(R_g T_w A H^{−z})` in the half-plane `𝔪 Re z > 2n + ord A`.
pub fn zeta_value(cfg: &TraceConfig, z: C64, cutoff: usize) -> Result<TraceValue, TraceError> {
    if ORDER_H as f64 * z.re <= (2 * cfg.n()) as f64 + cfg.order_a as f64 {
        return Err(TraceError::Domain(format!("Re z = {} outside the convergence half-plane", z.re)));
    }
    Ok(cfg.profile(cutoff)?.trace(&LevelFn::power(z, cfg.shift))?)
}

/// `Tr(R_g T_w A (H − λ)^{−K})`.
pub fn resolvent_trace(cfg: &TraceConfig, lambda: C64, k: u32, cutoff: usize) -> Result<TraceValue, TraceError> {
    if ORDER_H * k as i64 - cfg.order_a <= 2 * cfg.n() as i64 {
        return Err(TraceError::Domain(format!("K = {k} too small for trace class")));
    }
    let f = LevelFn::resolvent(lambda, k, cfg.shift);
    f.validate(cfg.n())?;
    Ok(cfg.profile(cutoff)?.trace(&f)?)
}

/// Heat samples on `grid` from one level profile, with the cutoff certified to `tol` at the smallest `t`.
pub fn heat_samples(cfg: &TraceConfig, grid: &Grid, tol: f64, max_cutoff: usize) -> Result<(Vec<Sample>, LevelProfile), TraceError> {
    let f0 = LevelFn::heat(grid.start, cfg.shift);
    let cutoff = cfg.cutoff_for(&f0, tol, max_cutoff).unwrap_or(max_cutoff);
    let profile = cfg.profile(cutoff)?;
    let samples = grid
        .points()
        .into_iter()
        .map(|t| {
            let v = profile.trace(&LevelFn::heat(t, cfg.shift))?;
            Ok(Sample { x: t, value: v.value, tail: v.tail })
        })
        .collect::<Result<Vec<_>, TraceError>>()?;
    Ok((samples, profile))
}

/// Log coefficient `c̃₀′` (the expansion carries `−c̃₀′ ln t`) with a leave-one-out spread.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogCoefficient {
    pub value: C64,
    pub uncertainty: f64,
    pub fit: FitResult,
}

pub fn log_coefficient_from(samples: &[Sample], spec: &FitSpec) -> Result<LogCoefficient, TraceError> {
    let pts: Vec<(f64, C64)> = samples.iter().map(|s| (s.x, s.value)).collect();
    let fit = fit_expansion(&pts, spec)?;
    let zero = Ratio::from_integer(0);
    let value = -fit.coefficient(zero, true);
    let spread = (0..pts.len())
        .into_par_iter()
        .filter_map(|i| {
            let mut sub = pts.clone();
            sub.remove(i);
            fit_expansion(&sub, spec).ok().map(|f| (-f.coefficient(zero, true) - value).norm())
        })
        .reduce(|| 0.0, f64::max);
    Ok(LogCoefficient { value, uncertainty: spread, fit })
}

/// Heat trace over `grid`, fitted on the configuration lattice up to `max_exponent`.
pub fn log_coefficient(cfg: &TraceConfig, grid: &Grid, max_exponent: Ratio<i64>, tol: f64, max_cutoff: usize) -> Result<LogCoefficient, TraceError> {
    let (samples, _) = heat_samples(cfg, grid, tol, max_cutoff)?;
    log_coefficient_from(&samples, &cfg.fit_spec(max_exponent))
}

/// Settings for the three-way comparison of the log coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeOptions {
    pub heat_grid: Grid,
    pub heat_max_exponent: Ratio<i64>,
    /// Grid in `μ`, with `−λ = μ²`.
    pub mu_grid: Grid,
    pub resolvent_power: u32,
    pub resolvent_max_exponent: Ratio<i64>,
    pub tol: f64,
    pub max_cutoff: usize,
    pub contour_radius: f64,
    pub contour_points: usize,
}

impl Default for BridgeOptions {
    fn default() -> Self {
        Self {
            heat_grid: Grid::new(0.01, 2f64.powf(0.25), 21),
            heat_max_exponent: Ratio::from_integer(3),
            mu_grid: Grid::new(50f64.sqrt(), 2f64.powf(0.125), 33),
            resolvent_power: 2,
            resolvent_max_exponent: Ratio::from_integer(2),
            tol: 1e-12,
            max_cutoff: 1_000_000,
            contour_radius: 0.25,
            contour_points: 64,
        }
    }
}

/// The three estimates of `c₀′`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub heat: C64,
    pub heat_uncertainty: f64,
    pub resolvent: C64,
    pub resolvent_uncertainty: f64,
    pub zeta: C64,
    /// `|continuation − direct|` of the zeta function at a convergent point.
    pub continuation_defect: f64,
    pub max_difference: f64,
}

/// Resolvent samples at `λ = −μ²` for `μ` on `grid`.
pub fn resolvent_samples(cfg: &TraceConfig, grid: &Grid, k: u32, tol: f64, max_cutoff: usize) -> Result<Vec<Sample>, TraceError> {
    let mus = grid.points();
    let hardest = LevelFn::resolvent(C64::new(-mus[mus.len() - 1].powi(2), 0.0), k, cfg.shift);
    let cutoff = cfg.cutoff_for(&hardest, tol, max_cutoff).unwrap_or(max_cutoff);
    let profile = cfg.profile(cutoff)?;
    mus.into_iter()
        .map(|mu| {
            let f = LevelFn::resolvent(C64::new(-mu * mu, 0.0), k, cfg.shift);
            let v = profile.trace(&f)?;
            Ok(Sample { x: mu, value: v.value, tail: v.tail })
        })
        .collect()
}

/// Zeta function continued through the fitted heat expansion on `(0, t₀]` and the level sums beyond.
pub fn zeta_continued(profile: &LevelProfile, fit: &FitResult, shift: f64, t0: f64, z: C64) -> C64 {
    let mut head = C64::new(0.0, 0.0);
    for ((e, l), c) in fit.exponents.iter().zip(&fit.coefficients) {
        let s = z + crate::scalar::ratio_to_f64(e);
        let p = (s * t0.ln()).exp();
        head += c * if *l { p * (t0.ln() / s - 1.0 / (s * s)) } else { p / s };
    }
    let n = profile.n;
    let tail: C64 = profile
        .sums
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let e = l as f64 + n as f64 * 0.5 + shift;
            s * (-z * e.ln()).exp() * upper_gamma(z, t0 * e)
        })
        .sum();
    (head + tail) * rgamma_c(z)
}

/// Heat, resolvent and zeta estimates of `c₀′` for one configuration.
pub fn coefficient_bridge_check(cfg: &TraceConfig, opt: &BridgeOptions) -> Result<BridgeReport, TraceError> {
    let (samples, profile) = heat_samples(cfg, &opt.heat_grid, opt.tol, opt.max_cutoff)?;
    let heat = log_coefficient_from(&samples, &cfg.fit_spec(opt.heat_max_exponent))?;

    let rs = resolvent_samples(cfg, &opt.mu_grid, opt.resolvent_power, opt.tol, opt.max_cutoff)?;
    let rspec = cfg.fit_spec(opt.resolvent_max_exponent);
    let pts: Vec<(f64, C64)> = rs.iter().map(|s| (s.x, s.value)).collect();
    let zero = Ratio::from_integer(0);
    let rfit = fit_resolvent(&pts, &rspec, opt.resolvent_power)?;
    let resolvent = rfit.coefficient(zero, true) / ORDER_H as f64;
    let resolvent_uncertainty = (0..pts.len())
        .filter_map(|i| {
            let mut sub = pts.clone();
            sub.remove(i);
            fit_resolvent(&sub, &rspec, opt.resolvent_power).ok().map(|f| (f.coefficient(zero, true) / ORDER_H as f64 - resolvent).norm())
        })
        .fold(0.0, f64::max);

    let t0 = opt.heat_grid.start;
    let m = opt.contour_points;
    let zeta: C64 = (0..m)
        .into_par_iter()
        .map(|k| {
            let z = C64::from_polar(opt.contour_radius, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
            zeta_continued(&profile, &heat.fit, cfg.shift, t0, z) * z
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum::<C64>()
        / m as f64;

    let probe = C64::new(cfg.n() as f64 + cfg.order_a.max(0) as f64 * 0.5 + 1.5, 0.0);
    let direct = profile.trace(&LevelFn::power(probe, cfg.shift))?.value;
    let continuation_defect = (zeta_continued(&profile, &heat.fit, cfg.shift, t0, probe) - direct).norm();

    let vals = [heat.value, resolvent, zeta];
    let mut max_difference = 0.0f64;
    for i in 0..3 {
        for j in i + 1..3 {
            max_difference = max_difference.max((vals[i] - vals[j]).norm());
        }
    }
    Ok(BridgeReport {
        heat: heat.value,
        heat_uncertainty: heat.uncertainty,
        resolvent,
        resolvent_uncertainty,
        zeta,
        continuation_defect,
        max_difference,
    })
}

/// Absolute accuracy below which heat trace values are treated as zero.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Grid used by [`vanishing_check`]: `0.02·2^{i/4}`, `i = 0…16`.
pub fn vanishing_grid() -> Grid {
    Grid::new(0.02, 2f64.powf(0.25), 17)
}

/// Super-polynomial decay of the heat trace as `t → 0` for an element without affine fixed points:
/// for every `p ≤ 10` the maximum of `|Θ(t)| t^{−p}` over the grid is not attained at its smallest point.
pub fn vanishing_check(cfg: &TraceConfig, grid: &Grid, tol: f64, max_cutoff: usize) -> Result<bool, TraceError> {
    if cfg.has_fixed_points() {
        return Err(TraceError::Precondition("the affine fixed point set is not empty".into()));
    }
    let (samples, _) = heat_samples(cfg, grid, tol, max_cutoff)?;
    if samples[0].value.norm() <= NOISE_FLOOR + samples[0].tail {
        return Ok(true);
    }
    for p in 0..=10 {
        let scaled: Vec<f64> = samples.iter().map(|s| s.value.norm() * s.x.powi(-p)).collect();
        let rest = scaled[1..].iter().cloned().fold(0.0, f64::max);
        if scaled[0] >= rest {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Tr((B₁B₂ − B₂B₁) e^{−tH})` samples for the trace-property harness.
pub fn commutator_heat_samples(
    b1: &[FockOperator<f64>],
    b2: &[FockOperator<f64>],
    n: usize,
    shift: f64,
    grid: &Grid,
    tol: f64,
    max_cutoff: usize,
) -> Result<Vec<Sample>, TraceError> {
    let ab: Vec<FockOperator<f64>> = b1.iter().chain(b2).cloned().collect();
    let ba: Vec<FockOperator<f64>> = b2.iter().chain(b1).cloned().collect();
    let f0 = LevelFn::heat(grid.start, shift);
    let c1 = certified_cutoff(&ab, n, &f0, tol, max_cutoff).unwrap_or(max_cutoff);
    let c2 = certified_cutoff(&ba, n, &f0, tol, max_cutoff).unwrap_or(max_cutoff);
    let p1 = level_profile(&ab, n, c1)?;
    let p2 = level_profile(&ba, n, c2)?;
    grid.points()
        .into_iter()
        .map(|t| {
            let f = LevelFn::heat(t, shift);
            let x = p1.trace(&f)?;
            let y = p2.trace(&f)?;
            Ok(Sample { x: t, value: x.value - y.value, tail: x.tail + y.tail })
        })
        .collect()
}

/// `A = H₀^{−k}` on `n` modes, optionally shifted.
pub fn h0_power(n: usize, k: f64, shift: f64) -> Result<FockOperator<f64>, TraceError> {
    Ok(crate::fock::func_of_h0(n, LevelFn::new(Spectral::Power(Complex::new(k, 0.0)), shift))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Monomial;

    fn trivial(n: usize, a: FockOperator<f64>, order: i64) -> TraceConfig {
        TraceConfig::new(GroupElement::identity(n), a, order, 0.0).unwrap()
    }

    #[test]
    fn heat_examples() {
        let t = 0.2;
        let cfg = trivial(2, FockOperator::Identity { n: 2 }, 0);
        let v = heat_trace(&cfg, t, 600).unwrap();
        assert!((v.value.re - (2.0 * (t / 2.0).sinh()).powi(-2)).abs() < 1e-10);
        let phi = 0.4;
        let cfg = TraceConfig::new(GroupElement::rotation(Monomial::diagonal(vec![phi])), FockOperator::Identity { n: 1 }, 0, 0.0).unwrap();
        let v = heat_trace(&cfg, t, 600).unwrap();
        let want = C64::new(-t / 2.0, 0.0).exp() / (1.0 - C64::new(-t, -phi).exp());
        assert!((v.value - want).norm() < 1e-12);
        assert!(heat_trace(&cfg, 0.0, 10).is_err());
    }

    #[test]
    fn zeta_absorbs_powers() {
        let one = trivial(1, FockOperator::Identity { n: 1 }, 0);
        let inv = trivial(1, h0_power(1, 1.0, 0.0).unwrap(), -2);
        let a = zeta_value(&one, C64::new(3.0, 0.0), 2000).unwrap();
        let b = zeta_value(&inv, C64::new(2.0, 0.0), 2000).unwrap();
        assert!((a.value - b.value).norm() < 1e-14);
        assert!(zeta_value(&one, C64::new(0.9, 0.0), 10).is_err());
    }

    #[test]
    fn resolvent_trigamma() {
        let one = trivial(1, FockOperator::Identity { n: 1 }, 0);
        let lambda = -0.7;
        let v = resolvent_trace(&one, C64::new(lambda, 0.0), 2, 200_000).unwrap();
        let want = crate::special::trigamma(0.5 - lambda);
        assert!((v.value.re - want).abs() <= v.tail + 1e-12);
    }

    #[test]
    fn vanishing_translation() {
        let e = GroupElement::translation(vec![C64::new(1.0, 0.0)]);
        let cfg = TraceConfig::new(e, FockOperator::Identity { n: 1 }, 0, 0.0).unwrap();
        assert!(vanishing_check(&cfg, &vanishing_grid(), 1e-14, 20_000).unwrap());
        let fixed = GroupElement::new(vec![C64::new(2.0, 0.0)], Monomial::diagonal(vec![std::f64::consts::PI])).unwrap();
        let cfg = TraceConfig::new(fixed, FockOperator::Identity { n: 1 }, 0, 0.0).unwrap();
        assert!(vanishing_check(&cfg, &Grid::default(), 1e-14, 20_000).is_err());
    }

    #[test]
    fn bridge_inverse_h0() {
        for shift in [0.0, 0.5, 1.0] {
            let cfg = TraceConfig::new(GroupElement::identity(1), h0_power(1, 1.0, 0.0).unwrap(), -2, shift).unwrap();
            let r = coefficient_bridge_check(&cfg, &BridgeOptions::default()).unwrap();
            assert!((r.heat - 1.0).norm() < 1e-4, "{r:?}");
            assert!(r.max_difference < 1e-3, "{r:?}");
            assert!(r.continuation_defect < 1e-6, "{r:?}");
        }
    }
}
