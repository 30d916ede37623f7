//! Fock-space operators and traces against position-space quadrature.

use num_complex::Complex;
use shubin::fock::{displacement, op_weyl_poly, state_from, FockOperator, FockSpace};
use shubin::group::{GroupElement, Monomial};
use shubin::residue::{residue, spectral_residue, SpectralOptions};
use shubin::scalar::{c64, C64};
use shubin::symbols::poly::Poly;
use shubin::traces::{h0_power, heat_trace, TraceConfig};
use shubin::{ClassicalSymbol, Convention, HomogeneousComponent, MultiIndex};

const L: f64 = 40.0;
const POINTS: usize = 16001;

/// Trapezoid rule on `[−L, L]`; spectrally accurate for Gaussian-decaying integrands.
fn integrate(f: impl Fn(f64) -> C64) -> C64 {
    let h = 2.0 * L / (POINTS - 1) as f64;
    (0..POINTS).map(|i| f(-L + h * i as f64)).sum::<C64>() * h
}

/// Hermite functions `h_0 … h_kmax` at `x`.
fn hermite(x: f64, kmax: usize) -> Vec<f64> {
    let mut h = vec![std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp()];
    if kmax >= 1 {
        h.push(2f64.sqrt() * x * h[0]);
    }
    for k in 1..kmax {
        let next = (2.0 / (k + 1) as f64).sqrt() * x * h[k] - (k as f64 / (k + 1) as f64).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// `(T_w f)(x) = e^{−iak/2} e^{ikx} f(x − a)` for `w = a − ik`.
fn translate_phase(w: C64, x: f64) -> C64 {
    let (a, k) = (w.re, -w.im);
    C64::from_polar(1.0, -a * k / 2.0 + k * x)
}

#[test]
fn displacement_matrix_elements_by_quadrature() {
    let w = c64(0.8, -0.5);
    let space = FockSpace::new(1, 40).unwrap();
    let t = displacement(vec![w]).unwrap().to_dense(&space);
    let kmax = 6;
    for m in 0..=kmax {
        for k in 0..=kmax {
            let q = integrate(|x| {
                let hm = hermite(x, kmax)[m];
                let hk = hermite(x - w.re, kmax)[k];
                translate_phase(w, x) * hm * hk
            });
            let i = space.index(&state_from(&[m as u32])).unwrap();
            let j = space.index(&state_from(&[k as u32])).unwrap();
            assert!((t[(i, j)] - q).norm() < 1e-12, "({m},{k}) {} vs {q}", t[(i, j)]);
        }
    }
}

/// Mehler kernel of `e^{−τH₀}` on the diagonal shifted by `a`: `K_τ(x − a, x)`.
fn mehler(tau: C64, x: f64, y: f64) -> C64 {
    let s = tau.sinh();
    let c = tau.cosh();
    (2.0 * std::f64::consts::PI * s).sqrt().inv() * (-((x * x + y * y) * c - 2.0 * x * y) / (2.0 * s)).exp()
}

#[test]
fn translated_heat_trace_by_mehler_quadrature() {
    let w = c64(0.7, 0.4);
    let cfg = TraceConfig::new(GroupElement::translation(vec![w]), FockOperator::Identity { n: 1 }, 0, 0.0).unwrap();
    for t in [0.1, 0.5, 1.3] {
        let tau = c64(t, 0.0);
        let q = integrate(|x| translate_phase(w, x) * mehler(tau, x - w.re, x));
        let v = heat_trace(&cfg, t, 3000).unwrap();
        assert!((v.value - q).norm() < 1e-10 * q.norm(), "{t}: {} vs {q}", v.value);
        let closed = (-(w.norm_sqr() / 4.0) / (t / 2.0).tanh()).exp() / (2.0 * (t / 2.0).sinh());
        assert!((q.re - closed).abs() < 1e-10 * closed && q.im.abs() < 1e-10 * closed);
    }
}

#[test]
fn rotation_heat_trace_by_complex_mehler() {
    let phi = 1.1;
    let cfg = TraceConfig::new(GroupElement::rotation(Monomial::diagonal(vec![phi])), FockOperator::Identity { n: 1 }, 0, 0.0).unwrap();
    for t in [0.2, 0.7] {
        let tau = c64(t, phi);
        let q = C64::from_polar(1.0, phi / 2.0) * integrate(|x| mehler(tau, x, x));
        let v = heat_trace(&cfg, t, 3000).unwrap();
        assert!((v.value - q).norm() < 1e-10, "{t}: {} vs {q}", v.value);
    }
}

#[test]
fn swap_reduction_matches_spectral_oracle() {
    let mut x1sq = Poly::new();
    x1sq.insert(MultiIndex(vec![2, 0, 0, 0]), c64(1.0, 0.0));
    let quad = ClassicalSymbol::from_poly(2, &x1sq);
    let inv = ClassicalSymbol::from_component(HomogeneousComponent::h2_pow_neg(2, 2, c64(1.0, 0.0)));
    let a = quad.compose(&inv, 3, Convention::Weyl);
    let swap = GroupElement::rotation(Monomial::new(vec![1, 0], vec![0.0, 0.0]).unwrap());
    let closed = residue(&swap, &a).unwrap();
    assert!((closed - 0.5).norm() < 1e-12);
    let op = FockOperator::Product(vec![op_weyl_poly::<f64, f64>(2, &x1sq).unwrap(), h0_power(2, 2.0, 0.0).unwrap()]);
    let cfg = TraceConfig::new(swap, op, -2, 0.0).unwrap();
    let oracle = spectral_residue(&cfg, &SpectralOptions::near_zero()).unwrap();
    assert!((oracle.value - closed).norm() < 1e-6, "{:?}", oracle);
    let _: Complex<f64> = oracle.value;
}
