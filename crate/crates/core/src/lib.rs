//! Trace expansions and localized noncommutative residues for operators
//! `R_g T_w A` built from metaplectic, Heisenberg–Weyl and Shubin
//! pseudodifferential factors on `ℝⁿ`.

pub mod fock;
pub mod group;
pub mod parametrix;
pub mod residue;
pub mod scalar;
pub mod special;
pub mod symbols;
pub mod traces;

pub use scalar::{Coeff, Real, C64};
pub use symbols::{ClassicalSymbol, Convention, HomogeneousComponent, MultiIndex};

/// Symbol with exact rational coefficients.
pub type ExactSymbol = ClassicalSymbol<num_rational::BigRational>;
/// Symbol with double-precision coefficients.
pub type Symbol64 = ClassicalSymbol<f64>;
