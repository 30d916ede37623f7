//! Defects of the operator identities between `T_w`, `R_g` and the heat semigroup.

use num_complex::Complex;

use super::{displacement, func_of_h0, interior_defect, metaplectic, FockError, FockOperator, FockSpace, LevelFn};
use crate::group::{GroupElement, Monomial};
use crate::scalar::C64;

fn element_op(e: &GroupElement<f64>) -> Result<FockOperator<f64>, FockError> {
    Ok(FockOperator::Product(vec![metaplectic(e.g.clone())?, displacement(e.w.clone())?]))
}

/// `‖lhs − c·rhs‖` on `|α| ≤ interior`, both as truncated products.
fn phased_defect(lhs: &FockOperator<f64>, rhs: &FockOperator<f64>, c: C64, space: &FockSpace, interior: usize) -> f64 {
    let inner = super::dimension(space.n, interior.min(space.cutoff));
    let mut e = vec![C64::new(0.0, 0.0); space.dim()];
    let mut acc = 0.0;
    for j in 0..inner {
        e[j] = C64::new(1.0, 0.0);
        let a = lhs.apply_truncated(space, &e);
        let b = rhs.apply_truncated(space, &e);
        e[j] = C64::new(0.0, 0.0);
        acc += (0..inner).map(|i| (a[i] - c * b[i]).norm_sqr()).sum::<f64>();
    }
    acc.sqrt()
}

/// `‖T_vT_w − e^{−i Im(v·w̄)/2} T_{v+w}‖` on `|α| ≤ interior`.
pub fn heisenberg_defect(v: &[C64], w: &[C64], cutoff: usize, interior: usize) -> Result<f64, FockError> {
    let space = FockSpace::new(v.len(), cutoff)?;
    let lhs = FockOperator::Product(vec![displacement(v.to_vec())?, displacement(w.to_vec())?]);
    let im: f64 = v.iter().zip(w).map(|(a, b)| (a * b.conj()).im).sum();
    let sum: Vec<C64> = v.iter().zip(w).map(|(a, b)| a + b).collect();
    let rhs = displacement(sum)?;
    Ok(phased_defect(&lhs, &rhs, Complex::from_polar(1.0, -im / 2.0), &space, interior))
}

/// `‖R_gT_wR_g⁻¹ − T_{gw}‖` on `|α| ≤ interior`.
pub fn conjugation_defect(g: &Monomial<f64>, w: &[C64], cutoff: usize, interior: usize) -> Result<f64, FockError> {
    let space = FockSpace::new(w.len(), cutoff)?;
    let lhs = FockOperator::Product(vec![metaplectic(g.clone())?, displacement(w.to_vec())?, metaplectic(g.inverse())?]);
    let rhs = displacement(g.apply(w))?;
    Ok(interior_defect(&lhs, &rhs, &space, interior))
}

/// Defect of the projective group law for `R_{g₁}T_{w₁}·R_{g₂}T_{w₂}`.
pub fn group_law_defect(e1: &GroupElement<f64>, e2: &GroupElement<f64>, cutoff: usize, interior: usize) -> Result<f64, FockError> {
    let space = FockSpace::new(e1.n(), cutoff)?;
    let lhs = FockOperator::Product(vec![element_op(e1)?, element_op(e2)?]);
    let (phase, e) = e1.compose(e2).map_err(|_| FockError::Dimension(e1.n(), e2.n()))?;
    Ok(phased_defect(&lhs, &element_op(&e)?, phase, &space, interior))
}

/// `max |⟨α|[R_g, e^{−tH₀}]|β⟩|` over the truncated space.
pub fn heat_commutation_defect(g: &Monomial<f64>, t: f64, cutoff: usize) -> Result<f64, FockError> {
    let n = g.n();
    let space = FockSpace::new(n, cutoff)?;
    let r = metaplectic(g.clone())?;
    let h = func_of_h0(n, LevelFn::heat(t, 0.0))?;
    let a = r.mul(&h).to_dense(&space);
    let b = h.mul(&r).to_dense(&space);
    Ok((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    #[test]
    fn identities_hold_inside() {
        let (v, w) = ([c64(1.2, -0.8), c64(-0.5, 0.3)], [c64(-0.9, 1.1), c64(0.4, 1.3)]);
        assert!(heisenberg_defect(&v, &w, 40, 8).unwrap() < 1e-10);
        let g = Monomial::new(vec![1, 0], vec![0.7, -1.9]).unwrap();
        assert!(conjugation_defect(&g, &w, 40, 8).unwrap() < 1e-10);
        let e1 = GroupElement::new(v.to_vec(), g.clone()).unwrap();
        let e2 = GroupElement::new(w.to_vec(), Monomial::diagonal(vec![1.3, 0.2])).unwrap();
        assert!(group_law_defect(&e1, &e2, 40, 8).unwrap() < 1e-10);
        assert_eq!(heat_commutation_defect(&g, 0.3, 12).unwrap(), 0.0);
    }
}
