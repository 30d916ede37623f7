//! Hermite–Fock representations of `R_g`, `T_w`, Weyl-quantized
//! polynomials and spectral functions of `H₀ + c`, with truncated-matrix
//! semantics and certified level-truncated traces.

mod displacement;
mod identities;
mod level;
mod operator;
mod trace;
mod weyl;

use std::collections::HashMap;

use num_complex::Complex;
use smallvec::SmallVec;
use thiserror::Error;

pub use displacement::{displacement_entry_1d, DisplacementTables};
pub use identities::{conjugation_defect, group_law_defect, heat_commutation_defect, heisenberg_defect};
pub use level::{LevelFn, Spectral};
pub use operator::{
    displacement, egorov_defect, egorov_matrix, egorov_pullback, func_of_h0, interior_defect, metaplectic, metaplectic_diag, metaplectic_perm,
    op_weyl_poly, FockOperator,
};
pub use trace::{growth_bound, level_profile, select_cutoff, trace_product, Growth, GrowthTerm, LevelProfile, TraceValue};
pub use weyl::{NormalOrdered, NormalTerm};

/// Largest supported number of modes.
pub const MAX_MODES: usize = 4;

/// Occupation numbers; entries beyond `n` are zero.
pub type State = [u32; MAX_MODES];

pub(crate) type SparseVec<T> = SmallVec<[(State, Complex<T>); 8]>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("at most {MAX_MODES} modes are supported, got {0}")]
    TooManyModes(usize),
    #[error("mode count mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("spectral function is singular at level {0}")]
    Singular(usize),
    #[error("no damped factor at index {0}")]
    NotDamped(usize),
    #[error("truncation tail cannot be certified: {0}")]
    Uncertified(String),
    #[error("operator kind not supported here: {0}")]
    Unsupported(&'static str),
}

pub fn level_of(s: &State) -> u32 {
    s.iter().sum()
}

/// Number of basis states with `|α| ≤ cutoff`.
pub fn dimension(n: usize, cutoff: usize) -> usize {
    crate::scalar::binomial_i64((cutoff + n) as i64, n as i64) as usize
}

/// Number of basis states with `|α| = level`.
pub fn level_multiplicity(n: usize, level: usize) -> usize {
    if n == 0 {
        return usize::from(level == 0);
    }
    crate::scalar::binomial_i64((level + n - 1) as i64, (n - 1) as i64) as usize
}

/// All states of one level, first mode descending.
pub fn level_states(n: usize, level: u32) -> impl Iterator<Item = State> {
    let mut cur: Option<State> = if n == 0 {
        None
    } else {
        let mut s = [0u32; MAX_MODES];
        s[0] = level;
        Some(s)
    };
    std::iter::from_fn(move || {
        let out = cur?;
        cur = next_state(n, out);
        Some(out)
    })
}

fn next_state(n: usize, mut s: State) -> Option<State> {
    if n < 2 {
        return None;
    }
    // rightmost position among 0..n-1 with a nonzero entry, excluding the last
    let last = n - 1;
    let tail = s[last];
    s[last] = 0;
    let i = (0..last).rev().find(|&i| s[i] > 0)?;
    s[i] -= 1;
    s[i + 1] = tail + 1;
    Some(s)
}

/// Sort by state and merge duplicates.
pub(crate) fn normalize<T: crate::scalar::Real>(v: &mut SparseVec<T>) {
    if v.len() < 2 {
        return;
    }
    v.sort_unstable_by_key(|a| a.0);
    let mut w = 0;
    for r in 1..v.len() {
        if v[r].0 == v[w].0 {
            let c = v[r].1;
            v[w].1 = v[w].1 + c;
        } else {
            w += 1;
            v[w] = v[r];
        }
    }
    v.truncate(w + 1);
}

/// Materialized basis `{|α⟩ : |α| ≤ cutoff}` ordered by level.
#[derive(Clone, Debug)]
pub struct FockSpace {
    pub n: usize,
    pub cutoff: usize,
    pub states: Vec<State>,
    index: HashMap<State, usize>,
}

impl FockSpace {
    pub fn new(n: usize, cutoff: usize) -> Result<Self, FockError> {
        if n > MAX_MODES {
            return Err(FockError::TooManyModes(n));
        }
        let mut states = Vec::with_capacity(dimension(n, cutoff));
        for l in 0..=cutoff as u32 {
            states.extend(level_states(n, l));
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Ok(Self { n, cutoff, states, index })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, s: &State) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn state(&self, i: usize) -> State {
        self.states[i]
    }

    pub fn level(&self, i: usize) -> usize {
        level_of(&self.states[i]) as usize
    }
}

pub fn state_from(v: &[u32]) -> State {
    let mut s = [0u32; MAX_MODES];
    s[..v.len()].copy_from_slice(v);
    s
}
