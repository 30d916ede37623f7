//! Classical Shubin symbols with exactly homogeneous components.

mod classical;
pub mod format;
mod homogeneous;
pub mod poly;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classical::{symbol_compose, ClassicalSymbol, Convention};
#[allow(unused_imports)]
pub(crate) use classical::{embed, inv_factorial, DerivCache};
pub use homogeneous::{HomogeneousComponent, RadialClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("expected {expected} coordinates, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("term is not homogeneous of degree {degree} (found {found})")]
    Inhomogeneous { degree: i64, found: String },
    #[error("negative radial power {0}")]
    NegativeRadialPower(String),
    #[error("evaluation at the origin of a singular component")]
    SingularPoint,
    #[error("symbol has no principal component")]
    MissingPrincipal,
    #[error("cannot parse literal {0:?}")]
    Parse(String),
}

/// Exponent vector over the coordinates `x₁…xₙ, p₁…pₙ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[axis] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn factorial(&self) -> u128 {
        self.0.iter().map(|a| crate::scalar::factorial_u128(*a)).product()
    }
}

/// All exponent vectors of length `n` with entries summing to `r`.
pub fn compositions(n: usize, r: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
        cur[i] = 0;
    }
    if n == 0 {
        if r == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, r, &mut cur, &mut out);
    out
}
