//! Acceptance criteria 1–9, one pass/fail line each.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use shubin::fock::{
    conjugation_defect, egorov_defect, heat_commutation_defect, heisenberg_defect, op_weyl_poly, FockOperator, LevelFn,
};
use shubin::group::{GroupElement, Monomial};
use shubin::parametrix::{compose_check, resolvent_parametrix};
use shubin::residue::{
    residue, residue_assembled, residue_case_iii, residue_printed, spectral_residue, trace_defect, HarnessFactor, SpectralOptions,
};
use shubin::scalar::{c64, C64};
use shubin::special::exp_q;
use shubin::symbols::poly::Poly;
use shubin::traces::{
    coefficient_bridge_check, fit_expansion, fit_expansion_exact, h0_power, heat_trace, log_coefficient, vanishing_check, BridgeOptions,
    FitResult, FitSpec, Grid, TraceConfig,
};
use shubin::{ClassicalSymbol, Convention, ExactSymbol, HomogeneousComponent, MultiIndex, Symbol64};

type Outcome = (bool, String);

fn mono(n: usize, m: &[u32]) -> Poly<f64> {
    assert_eq!(m.len(), 2 * n);
    let mut p = Poly::new();
    p.insert(MultiIndex(m.to_vec()), c64(1.0, 0.0));
    p
}

fn weyl(n: usize, m: &[u32]) -> FockOperator<f64> {
    op_weyl_poly::<f64, f64>(n, &mono(n, m)).unwrap()
}

fn h2_inv(n: usize, k: i64) -> Symbol64 {
    ClassicalSymbol::from_component(HomogeneousComponent::h2_pow_neg(n, k, c64(1.0, 0.0)))
}

fn rotation(angles: Vec<f64>) -> GroupElement<f64> {
    GroupElement::rotation(Monomial::diagonal(angles))
}

fn criterion_1() -> Outcome {
    let clock = Instant::now();
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    for n in 1..=3usize {
        let want = 2.0 / (1..n).map(|k| k as f64).product::<f64>();
        let e = GroupElement::identity(n);
        let a = h2_inv(n, n as i64);
        let printed = residue_printed(&e, a.principal()).unwrap();
        let assembled = residue_assembled(&e, &a).unwrap();
        let closed = (printed - want).norm().max((assembled - want).norm());
        let cfg = TraceConfig::new(e, h0_power(n, n as f64, 0.0).unwrap(), -2 * n as i64, 0.0).unwrap();
        let opt = SpectralOptions { max_cutoff: 400, ..SpectralOptions::default() };
        let oracle = (spectral_residue(&cfg, &opt).unwrap().value - want).norm();
        ok &= closed < 1e-10 && oracle < 1e-4;
        worst = (worst.0.max(closed), worst.1.max(oracle));
    }
    let secs = clock.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    (ok, format!("closed forms err {:.1e} (tol 1e-10), oracle err {:.1e} (tol 1e-4), {secs:.1} s (limit 60 s)", worst.0, worst.1))
}

fn relative_heat_error(cfg: &TraceConfig, closed: impl Fn(f64) -> C64) -> f64 {
    let mut worst = 0.0f64;
    for t in [0.05, 0.1, 0.3, 1.0, 3.0] {
        let cutoff = cfg.cutoff_for(&LevelFn::heat(t, 0.0), 1e-13, 200_000).unwrap();
        let v = heat_trace(cfg, t, cutoff).unwrap();
        let want = closed(t);
        worst = worst.max((v.value - want).norm() / want.norm());
    }
    worst
}

fn criterion_2() -> Outcome {
    let one = |t: f64| 1.0 / (2.0 * (t / 2.0).sinh());
    let rot = |phi: f64| move |t: f64| C64::new(-t / 2.0, 0.0).exp() / (1.0 - C64::new(-t, -phi).exp());
    let transl = |w: C64| move |t: f64| (-(w.norm_sqr() / 4.0) / (t / 2.0).tanh()).exp() / (2.0 * (t / 2.0).sinh());
    let id = |n| FockOperator::Identity { n };
    let mut worst = 0.0f64;
    let cfg = |e: GroupElement<f64>| TraceConfig::new(e.clone(), id(e.n()), 0, 0.0).unwrap();
    worst = worst.max(relative_heat_error(&cfg(GroupElement::identity(1)), |t| c64(one(t), 0.0)));
    worst = worst.max(relative_heat_error(&cfg(GroupElement::identity(2)), |t| c64(one(t).powi(2), 0.0)));
    let phi = 0.9;
    worst = worst.max(relative_heat_error(&cfg(rotation(vec![phi])), rot(phi)));
    worst = worst.max(relative_heat_error(&cfg(rotation(vec![phi, -2.2])), |t| rot(phi)(t) * rot(-2.2)(t)));
    let w = c64(1.1, -0.6);
    worst = worst.max(relative_heat_error(&cfg(GroupElement::translation(vec![w])), |t| c64(transl(w)(t), 0.0)));
    let (u, v) = (c64(0.6, -0.3), c64(-0.3, 0.5));
    worst = worst.max(relative_heat_error(&cfg(GroupElement::translation(vec![u, v])), |t| c64(transl(u)(t) * transl(v)(t), 0.0)));
    (worst < 1e-8, format!("max relative error {worst:.1e} over t in [0.05, 3] (tol 1e-8)"))
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for phi in [FRAC_PI_3, 2.0 * FRAC_PI_3] {
        let e = rotation(vec![phi, 0.0]);
        let want = 2.0 / (1.0 - C64::from_polar(1.0, -phi));
        let assembled = residue_assembled(&e, &h2_inv(2, 1)).unwrap();
        let printed = residue_printed(&e, h2_inv(2, 1).principal()).unwrap();
        let cfg = TraceConfig::new(e, h0_power(2, 1.0, 0.0).unwrap(), -2, 0.0).unwrap();
        let oracle = spectral_residue(&cfg, &SpectralOptions::near_zero()).unwrap();
        let (ea, eo) = ((assembled - want).norm(), (oracle.value - want).norm());
        ok &= ea < 1e-10 && eo < 1e-3;
        let ratio = printed / assembled;
        lines.push(format!("phi {phi:.4}: assembled err {ea:.1e}, oracle err {eo:.1e}, printed/assembled {:.6}{:+.6}i", ratio.re, ratio.im));
    }
    (ok, format!("{} (tol 1e-10, 1e-3)", lines.join("; ")))
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    let quad = ClassicalSymbol::from_poly(2, &mono(2, &[2, 0, 0, 0]));
    let a = quad.compose(&h2_inv(2, 1), 3, Convention::Weyl);
    for phi in [FRAC_PI_3, 2.0 * FRAC_PI_3] {
        let z = C64::from_polar(1.0, -phi);
        let want = 2.0 * (1.0 + z) / (2.0 * (1.0 - z) * (1.0 - z));
        let e = rotation(vec![phi, 0.0]);
        let op = FockOperator::product(&[weyl(2, &[2, 0, 0, 0]), h0_power(2, 1.0, 0.0).unwrap()]);
        let cfg = TraceConfig::new(e.clone(), op, 0, 0.0).unwrap();
        let coarse = spectral_residue(&cfg, &SpectralOptions::near_zero()).unwrap();
        let refined_opt = SpectralOptions { max_exponent: Ratio::from_integer(4), ..SpectralOptions::near_zero() };
        let refined = spectral_residue(&cfg, &refined_opt).unwrap();
        let engine = residue_case_iii(&e, &a, 8).unwrap();
        let (eo, ec) = ((coarse.value - want).norm(), (engine - refined.value).norm());
        ok &= eo < 1e-3 && ec < 1e-6;
        lines.push(format!("phi {phi:.4}: oracle err {eo:.1e}, |engine - refined oracle| {ec:.1e}"));
    }
    let parity = rotation(vec![PI, 0.0]);
    let e1 = residue(&parity, &quad).unwrap().norm();
    let e2 = residue_case_iii(&parity, &quad, 8).unwrap().norm();
    let cfg = TraceConfig::new(parity, weyl(2, &[2, 0, 0, 0]), 2, 0.0).unwrap();
    let trace_err = [0.1, 0.5, 2.0]
        .iter()
        .map(|&t| {
            let v = heat_trace(&cfg, t, 3000).unwrap().value;
            (v - 1.0 / (8.0 * (t / 2.0).cosh().powi(2))).norm()
        })
        .fold(0.0, f64::max);
    let oracle = spectral_residue(&cfg, &SpectralOptions { max_exponent: Ratio::from_integer(3), ..SpectralOptions::near_zero() }).unwrap().value.norm();
    ok &= e1 == 0.0 && e2 == 0.0 && trace_err < 1e-10 && oracle < 1e-6;
    lines.push(format!("parity: engines {e1:.1e} {e2:.1e}, trace err {trace_err:.1e}, oracle {oracle:.1e}"));
    (ok, format!("{} (tol 1e-3, 1e-6)", lines.join("; ")))
}

/// `1/(2 sinh(t/2))` Laurent coefficients of `t^{−1}, t, t³, t⁵, t⁷`.
const CSCH: [(i64, f64); 5] = [(-1, 1.0), (1, -1.0 / 24.0), (3, 7.0 / 5760.0), (5, -31.0 / 967_680.0), (7, 127.0 / 154_828_800.0)];

fn csch_errors(fit: &FitResult) -> (f64, f64) {
    let coef = CSCH[..3].iter().map(|&(e, c)| (fit.coefficient(Ratio::from_integer(e), false).re - c).abs()).fold(0.0, f64::max);
    (coef, fit.max_log_except(&[]))
}

fn criterion_5() -> Outcome {
    let synthetic: Vec<(f64, C64)> = Grid::default()
        .points()
        .into_iter()
        .map(|t| (t, c64(CSCH[..3].iter().map(|&(e, c)| c * t.powi(e as i32)).sum(), 0.0)))
        .collect();
    let short = FitSpec::new(1, 0, 2, Ratio::from_integer(3)).even();
    let (sc, sl) = csch_errors(&fit_expansion(&synthetic, &short).unwrap());
    let spec = FitSpec::new(1, 0, 2, Ratio::from_integer(9)).even();
    let grid = Grid::new(0.005, 2f64.powf(0.125), 33);
    let bits = 256;
    let two = BigRational::from_integer(BigInt::from(2));
    let exact: Vec<(BigRational, BigRational)> = grid
        .points()
        .into_iter()
        .map(|t| {
            let t = BigRational::from_float(t).unwrap();
            let half = &t / &two;
            (t, (exp_q(&half, bits) - exp_q(&-half, bits)).recip())
        })
        .collect();
    let (ec, el) = csch_errors(&fit_expansion_exact(&exact, &spec, bits).unwrap());
    let ok = sc < 1e-6 && sl < 1e-8 && ec < 1e-6 && el < 1e-8;
    (ok, format!("synthetic coef err {sc:.1e} logs {sl:.1e}; exact csch coef err {ec:.1e} logs {el:.1e} (tol 1e-6, 1e-8)"))
}

fn criterion_6() -> Outcome {
    let clock = Instant::now();
    let mut h2x1_1: ExactSymbol = ClassicalSymbol::oscillator(1);
    let x1 = HomogeneousComponent::from_poly(1, 1, shubin::symbols::poly::map_coeffs(&mono(1, &[1, 0]), |c| BigRational::from_float(*c).unwrap())).unwrap();
    h2x1_1 = h2x1_1.add(&ClassicalSymbol::from_component(x1));
    let cases: Vec<(&str, ExactSymbol)> = vec![
        ("1D oscillator", ClassicalSymbol::oscillator(1)),
        ("2D oscillator", ClassicalSymbol::oscillator(2)),
        ("h2 + x1", h2x1_1),
    ];
    let n_drop = 7;
    let mut residual = 0;
    for (_, h) in &cases {
        let p = resolvent_parametrix(h, n_drop).unwrap();
        residual += compose_check(&p, h, n_drop).len();
    }
    let secs = clock.elapsed().as_secs_f64();
    (residual == 0 && secs < 10.0, format!("{residual} residual terms through order -{} for 3 symbols, {secs:.2} s (limit 10 s)", n_drop - 1))
}

fn criterion_7() -> Outcome {
    let (cutoff, interior) = (60, 20);
    let mut heis = 0.0f64;
    let mut conj = 0.0f64;
    for k in 0..8 {
        let th = k as f64 * PI / 4.0;
        let v = [C64::from_polar(2.0, th)];
        let w = [C64::from_polar(1.5, 1.0 - th)];
        heis = heis.max(heisenberg_defect(&v, &w, cutoff, interior).unwrap());
        conj = conj.max(conjugation_defect(&Monomial::diagonal(vec![th + 0.3]), &v, cutoff, interior).unwrap());
    }
    let v2 = [c64(1.2, -0.9), c64(-0.6, 1.1)];
    let w2 = [c64(-0.8, 0.5), c64(1.3, 0.6)];
    let g2 = Monomial::new(vec![1, 0], vec![0.7, -1.9]).unwrap();
    heis = heis.max(heisenberg_defect(&v2, &w2, cutoff, interior).unwrap());
    conj = conj.max(conjugation_defect(&g2, &v2, cutoff, interior).unwrap());
    let mut ego = 0.0f64;
    for (g, m) in [
        (Monomial::diagonal(vec![FRAC_PI_2]), vec![1, 0]),
        (Monomial::diagonal(vec![0.4]), vec![2, 1]),
        (g2.clone(), vec![1, 0, 0, 1]),
        (g2.clone(), vec![2, 0, 1, 0]),
    ] {
        let n = g.n();
        ego = ego.max(egorov_defect(&g, &mono(n, &m), cutoff).unwrap());
    }
    let comm = heat_commutation_defect(&g2, 0.4, 30).unwrap().max(heat_commutation_defect(&Monomial::diagonal(vec![1.0]), 0.4, 60).unwrap());
    let ok = heis < 1e-10 && conj < 1e-10 && ego < 1e-10 && comm == 0.0;
    (ok, format!("Heisenberg law {heis:.1e}, conjugation {conj:.1e}, Egorov {ego:.1e} (tol 1e-10), heat commutation {comm:e} (exact)"))
}

fn criterion_8() -> Outcome {
    let g1 = rotation(vec![FRAC_PI_2, 0.0]);
    let g2 = rotation(vec![PI, 0.0]);
    let inv2 = h0_power(2, 1.0, 0.0).unwrap();
    let w0 = c64(0.7, 0.4);
    let t0 = GroupElement::translation(vec![w0]);
    let t1 = GroupElement::translation(vec![-w0]);
    let inv1 = h0_power(1, 1.0, 0.0).unwrap();
    let pairs = vec![
        (
            "metaplectic (x1, p1/H0)",
            HarnessFactor::new(g1.clone(), weyl(2, &[1, 0, 0, 0]), 1),
            HarnessFactor::new(g2.clone(), FockOperator::product(&[weyl(2, &[0, 0, 1, 0]), inv2.clone()]), -1),
        ),
        ("metaplectic (x1^2, 1/H0)", HarnessFactor::new(g1, weyl(2, &[2, 0, 0, 0]), 2), HarnessFactor::new(g2, inv2, -2)),
        ("translation (1/H0, 1)", HarnessFactor::new(t0.clone(), inv1.clone(), -2), HarnessFactor::new(t1.clone(), FockOperator::Identity { n: 1 }, 0)),
        (
            "translation (x/H0, p/H0)",
            HarnessFactor::new(t0, FockOperator::product(&[weyl(1, &[1, 0]), inv1.clone()]), -1),
            HarnessFactor::new(t1, FockOperator::product(&[weyl(1, &[0, 1]), inv1]), -1),
        ),
    ];
    let opt = SpectralOptions::near_zero();
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, a, b) in &pairs {
        let d = trace_defect(a, b, 0.0, &opt).unwrap();
        ok &= d.defect < 1e-6;
        lines.push(format!("{name} {:.1e}", d.defect));
    }
    (ok, format!("{} (tol 1e-6)", lines.join(", ")))
}

fn criterion_9() -> Outcome {
    let grid = Grid::new(0.025, 2f64.powf(0.25), 13);
    let free = [
        TraceConfig::new(GroupElement::translation(vec![c64(3.0, 0.0)]), h0_power(1, 1.0, 0.0).unwrap(), -2, 0.0).unwrap(),
        TraceConfig::new(
            GroupElement::new(vec![c64(0.0, 0.0), c64(0.0, -3.0)], Monomial::diagonal(vec![1.0, 0.0])).unwrap(),
            h0_power(2, 1.0, 0.0).unwrap(),
            -2,
            0.0,
        )
        .unwrap(),
    ];
    let mut log = 0.0f64;
    for cfg in &free {
        assert!(!cfg.has_fixed_points());
        log = log.max(log_coefficient(cfg, &grid, Ratio::from_integer(1), 1e-13, 20_000).unwrap().value.norm());
    }
    let decaying = [
        TraceConfig::new(GroupElement::translation(vec![c64(1.0, 0.0)]), FockOperator::Identity { n: 1 }, 0, 0.0).unwrap(),
        TraceConfig::new(
            GroupElement::new(vec![c64(1.0, 0.0), c64(0.0, 0.0)], Monomial::diagonal(vec![0.0, 1.0])).unwrap(),
            FockOperator::Identity { n: 2 },
            0,
            0.0,
        )
        .unwrap(),
    ];
    let mut vanish = true;
    for cfg in &decaying {
        vanish &= vanishing_check(cfg, &grid, 1e-13, 20_000).unwrap();
    }
    let base = TraceConfig::new(GroupElement::identity(1), h0_power(1, 1.0, 0.0).unwrap(), -2, 0.0).unwrap();
    let mut spread = 0.0f64;
    let mut shift_var = 0.0f64;
    let mut first: Option<[C64; 3]> = None;
    for c in [0.0, 0.5, 1.0] {
        let r = coefficient_bridge_check(&base.with_shift(c), &BridgeOptions::default()).unwrap();
        spread = spread.max(r.max_difference);
        let vals = [r.heat, r.resolvent, r.zeta];
        match first {
            None => first = Some(vals),
            Some(f) => {
                for (a, b) in vals.iter().zip(f) {
                    shift_var = shift_var.max((a - b).norm());
                }
            }
        }
    }
    let ok = log < 1e-6 && vanish && spread < 1e-3 && shift_var < 1e-4;
    (
        ok,
        format!(
            "fixed-point-free log coef {log:.1e} (tol 1e-6), decay {vanish}; bridge spread {spread:.1e} (tol 1e-3), shift variation {shift_var:.1e} (tol 1e-4)"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("identity-element residue", criterion_1),
        ("heat-trace closed forms", criterion_2),
        ("rotation residue", criterion_3),
        ("case (iii) and parity control", criterion_4),
        ("expansion fitting", criterion_5),
        ("parametrix identity", criterion_6),
        ("operator identities", criterion_7),
        ("trace property", criterion_8),
        ("vanishing and bridge", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let (ok, detail) = match std::panic::catch_unwind(run) {
            Ok(r) => r,
            Err(_) => (false, "panicked".to_string()),
        };
        if !ok {
            failed += 1;
        }
        let status = if ok { "PASS" } else { "FAIL" };
        println!("criterion {} {status} {name}: {detail} [{:.1} s]", i + 1, clock.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
