//! Randomized invariants.

use proptest::prelude::*;
use shubin::fock::heisenberg_defect;
use shubin::group::{GroupElement, Monomial};
use shubin::residue::{diagonal_element, residue};
use shubin::scalar::{c64, C64};
use shubin::symbols::poly::Poly;
use shubin::traces::{fit_expansion, FitSpec, Grid};
use shubin::{ClassicalSymbol, Convention, HomogeneousComponent, MultiIndex, Symbol64};
use num_rational::Ratio;

fn quadratic_amplitude(n: usize) -> Symbol64 {
    let mut p = Poly::new();
    let mut m = vec![0u32; 2 * n];
    m[0] = 2;
    p.insert(MultiIndex(m), c64(1.0, 0.0));
    let inv = ClassicalSymbol::from_component(HomogeneousComponent::h2_pow_neg(n, 2, c64(1.0, 0.0)));
    ClassicalSymbol::from_poly(n, &p).compose(&inv, 3, Convention::Weyl)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn heisenberg_law(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0) {
        let defect = heisenberg_defect(&[c64(a, b)], &[c64(c, d)], 40, 10).unwrap();
        prop_assert!(defect < 1e-10, "{defect}");
    }

    #[test]
    fn element_times_inverse_is_identity(re in -2.0f64..2.0, im in -2.0f64..2.0, phi in -3.0f64..3.0, swap in any::<bool>()) {
        let perm = if swap { vec![1, 0] } else { vec![0, 1] };
        let e = GroupElement::new(vec![c64(re, im), c64(im, -re)], Monomial::new(perm, vec![phi, 0.3]).unwrap()).unwrap();
        let (phase, id) = e.compose(&e.inverse()).unwrap();
        prop_assert!((phase - 1.0).norm() < 1e-14);
        prop_assert!(id.approx_eq(&GroupElement::identity(2), 1e-13));
    }

    #[test]
    fn residue_is_linear(phi in 0.2f64..2.9, c1r in -2.0f64..2.0, c1i in -2.0f64..2.0, c2r in -2.0f64..2.0) {
        let e = diagonal_element(vec![c64(0.0, 0.0); 2], vec![phi, 0.0]).unwrap();
        let a = ClassicalSymbol::from_component(HomogeneousComponent::h2_pow_neg(2, 1, c64(1.0, 0.0)));
        let b = quadratic_amplitude(2);
        let (c1, c2) = (c64(c1r, c1i), c64(c2r, 0.0));
        let lhs = residue(&e, &a.scale(&c1).add(&b.scale(&c2))).unwrap();
        let rhs = c1 * residue(&e, &a).unwrap() + c2 * residue(&e, &b).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn fit_recovers_and_is_idempotent(coef in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let spec = FitSpec::new(1, 0, 2, Ratio::from_integer(2));
        let basis = spec.basis();
        let grid = Grid::default();
        let data: Vec<(f64, C64)> = grid
            .points()
            .into_iter()
            .map(|t| {
                let v: f64 = basis
                    .iter()
                    .zip(&coef)
                    .map(|((e, l), c)| c * t.powf(*e.numer() as f64 / *e.denom() as f64) * if *l { t.ln() } else { 1.0 })
                    .sum();
                (t, c64(v, 0.0))
            })
            .collect();
        let fit = fit_expansion(&data, &spec).unwrap();
        prop_assert_eq!(fit.coefficients.len(), basis.len());
        for (got, want) in fit.coefficients.iter().zip(&coef) {
            prop_assert!((got.re - want).abs() < 1e-6, "{} vs {}", got.re, want);
        }
        let again: Vec<(f64, C64)> = data.iter().map(|(t, _)| (*t, fit.eval(*t))).collect();
        let refit = fit_expansion(&again, &spec).unwrap();
        for (x, y) in fit.coefficients.iter().zip(&refit.coefficients) {
            prop_assert!((x - y).norm() < 1e-6, "{x} vs {y}");
        }
    }
}
