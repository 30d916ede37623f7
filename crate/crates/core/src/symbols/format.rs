//! Text interchange format for symbols: decimal-string coefficients and
//! rational radial powers.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{ClassicalSymbol, HomogeneousComponent, MultiIndex, SymbolError};
use crate::scalar::{parse_ratio, Coeff};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub coef: [String; 2],
    pub monomial: Vec<u32>,
    #[serde(rename = "radialPower", default = "zero_power")]
    pub radial_power: String,
}

fn zero_power() -> String {
    "0".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub order: i64,
    pub components: Vec<ComponentSpec>,
}

impl ComponentSpec {
    pub fn build<R: Coeff>(&self, n: usize, degree: i64) -> Result<HomogeneousComponent<R>, SymbolError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let re = R::parse_decimal(&t.coef[0]).ok_or_else(|| SymbolError::Parse(t.coef[0].clone()))?;
            let im = R::parse_decimal(&t.coef[1]).ok_or_else(|| SymbolError::Parse(t.coef[1].clone()))?;
            let s = parse_ratio(&t.radial_power).ok_or_else(|| SymbolError::Parse(t.radial_power.clone()))?;
            terms.push((Complex::new(re, im), MultiIndex(t.monomial.clone()), s));
        }
        HomogeneousComponent::from_terms(n, degree, terms)
    }

    pub fn from_component<R: Coeff>(c: &HomogeneousComponent<R>) -> Self {
        let terms = c
            .terms()
            .into_iter()
            .map(|(coef, m, s)| TermSpec {
                coef: [fmt17(coef.re.to_f64()), fmt17(coef.im.to_f64())],
                monomial: m.0,
                radial_power: s.to_string(),
            })
            .collect();
        Self { terms }
    }
}

impl SymbolSpec {
    pub fn build<R: Coeff>(&self, n: usize) -> Result<ClassicalSymbol<R>, SymbolError> {
        let comps = self
            .components
            .iter()
            .enumerate()
            .map(|(j, c)| c.build(n, self.order - j as i64))
            .collect::<Result<Vec<_>, _>>()?;
        ClassicalSymbol::new(n, self.order, comps)
    }

    pub fn from_symbol<R: Coeff>(a: &ClassicalSymbol<R>) -> Self {
        Self { order: a.order(), components: a.components().iter().map(ComponentSpec::from_component).collect() }
    }
}

/// Decimal string with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.16e}")
}
