use num_complex::Complex;

use crate::scalar::Real;

/// Spectral function of `H₀ + c` acting on eigenvalue `E`.
#[derive(Clone, Debug, PartialEq)]
pub enum Spectral<T> {
    Identity,
    /// `e^{−tE}`.
    Heat(T),
    /// `E^{−z}`.
    Power(Complex<T>),
    /// `(E − λ)^{−K}`.
    Resolvent { lambda: Complex<T>, k: u32 },
}

/// `f(|α| + n/2 + shift)` on `|α⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelFn<T> {
    pub kind: Spectral<T>,
    pub shift: T,
}

impl<T: Real> LevelFn<T> {
    pub fn new(kind: Spectral<T>, shift: T) -> Self {
        Self { kind, shift }
    }

    pub fn heat(t: T, shift: T) -> Self {
        Self::new(Spectral::Heat(t), shift)
    }

    pub fn power(z: Complex<T>, shift: T) -> Self {
        Self::new(Spectral::Power(z), shift)
    }

    pub fn resolvent(lambda: Complex<T>, k: u32, shift: T) -> Self {
        Self::new(Spectral::Resolvent { lambda, k }, shift)
    }

    /// `(H₀ + shift)^{−1}`.
    pub fn inverse(shift: T) -> Self {
        Self::power(Complex::new(T::one(), T::zero()), shift)
    }

    pub fn energy(&self, n: usize, level: usize) -> T {
        T::from_usize(level).unwrap() + T::from_usize(n).unwrap() * T::lit(0.5) + self.shift
    }

    pub fn eval_energy(&self, e: T) -> Complex<T> {
        match &self.kind {
            Spectral::Identity => Complex::new(T::one(), T::zero()),
            Spectral::Heat(t) => Complex::new((-*t * e).exp(), T::zero()),
            Spectral::Power(z) => (-*z * e.ln()).exp(),
            Spectral::Resolvent { lambda, k } => {
                let d = Complex::new(e, T::zero()) - lambda;
                d.powi(-(*k as i32))
            }
        }
    }

    pub fn eval(&self, n: usize, level: usize) -> Complex<T> {
        self.eval_energy(self.energy(n, level))
    }

    pub fn adjoint(&self) -> Self {
        let kind = match &self.kind {
            Spectral::Power(z) => Spectral::Power(z.conj()),
            Spectral::Resolvent { lambda, k } => Spectral::Resolvent { lambda: lambda.conj(), k: *k },
            other => other.clone(),
        };
        Self { kind, shift: self.shift }
    }

    /// Lowest eigenvalue `n/2 + shift`.
    pub fn ground(&self, n: usize) -> f64 {
        n as f64 * 0.5 + self.shift.as_f64()
    }

    /// Rejects functions singular on the spectrum or a non-positive operator.
    pub fn validate(&self, n: usize) -> Result<(), super::FockError> {
        if self.ground(n) <= 0.0 && !matches!(self.kind, Spectral::Identity | Spectral::Heat(_)) {
            return Err(super::FockError::Singular(0));
        }
        if let Spectral::Resolvent { lambda, .. } = &self.kind {
            let l = lambda.re.as_f64() - self.ground(n);
            if lambda.im.as_f64() == 0.0 && l >= 0.0 && (l - l.round()).abs() < 1e-12 {
                return Err(super::FockError::Singular(l.round() as usize));
            }
        }
        Ok(())
    }

    /// `inf_{E ≥ e_min} |E − λ| / E` for the resolvent, `1` otherwise.
    pub fn resolvent_ratio(&self, e_min: f64) -> f64 {
        match &self.kind {
            Spectral::Resolvent { lambda, .. } => resolvent_ratio(lambda.re.as_f64(), lambda.im.as_f64(), e_min),
            _ => 1.0,
        }
    }
}

/// `inf_{E ≥ e_min} |1 − λ/E|`.
pub(crate) fn resolvent_ratio(re: f64, im: f64, e_min: f64) -> f64 {
    let abs2 = re * re + im * im;
    if abs2 == 0.0 {
        return 1.0;
    }
    let u_max = 1.0 / e_min;
    let f = |u: f64| ((1.0 - re * u).powi(2) + (im * u).powi(2)).sqrt();
    let u_star = re / abs2;
    if u_star > 0.0 && u_star < u_max {
        f(u_star)
    } else {
        f(u_max).min(1.0)
    }
}
