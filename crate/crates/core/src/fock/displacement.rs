use num_complex::Complex;

use super::State;
use crate::scalar::{Real, C64};
use crate::special::ln_gamma;

/// Entries `⟨k+d|D(β)|k⟩ / (β/|β|)^d` for one mode, stored per offset `d ≥ 0`.
#[derive(Clone, Debug)]
struct ModeTable {
    x: f64,
    up: Vec<C64>,
    down: Vec<C64>,
    rows: Vec<Vec<f64>>,
}

const NEGLIGIBLE: f64 = 1e-18;

impl ModeTable {
    fn new(beta: C64, kmax: usize) -> Self {
        let x = beta.norm_sqr();
        let phase = if x == 0.0 { C64::new(1.0, 0.0) } else { beta / beta.norm() };
        let mut rows = Vec::new();
        if x == 0.0 {
            rows.push(vec![1.0; kmax + 1]);
            return Self { x, up: vec![phase], down: vec![phase], rows };
        }
        let mut quiet = 0;
        for d in 0..=kmax {
            let row = laguerre_row(x, d, kmax - d.min(kmax));
            let peak = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            rows.push(row);
            if peak < NEGLIGIBLE {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        let powers = |p: C64| {
            let mut acc = C64::new(1.0, 0.0);
            (0..rows.len())
                .map(|_| {
                    let v = acc;
                    acc *= p;
                    v
                })
                .collect::<Vec<_>>()
        };
        let up = powers(phase);
        let down = powers(-phase.conj());
        Self { x, up, down, rows }
    }

    fn entry(&self, m: usize, k: usize) -> C64 {
        if self.x == 0.0 {
            return if m == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
        let (d, low, ph) = if m >= k { (m - k, k, &self.up) } else { (k - m, m, &self.down) };
        match self.rows.get(d).and_then(|r| r.get(low)) {
            Some(v) => ph[d] * *v,
            None => C64::new(0.0, 0.0),
        }
    }

    fn band(&self) -> usize {
        if self.x == 0.0 {
            0
        } else {
            self.rows.len().saturating_sub(1)
        }
    }
}

/// `√(k!/(k+d)!) x^{d/2} e^{−x/2} L_k^{(d)}(x)` for `k = 0..=kmax`.
fn laguerre_row(x: f64, d: usize, kmax: usize) -> Vec<f64> {
    let log_start = 0.5 * d as f64 * x.ln() - 0.5 * x - 0.5 * ln_gamma(d as f64 + 1.0);
    let mut out = Vec::with_capacity(kmax + 1);
    // scaled recurrence for g_k = √(k!/(k+d)!) L_k^{(d)}(x), started at 1
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    let mut log_scale = log_start;
    for k in 0..=kmax {
        out.push(if cur == 0.0 { 0.0 } else { cur.signum() * (cur.abs().ln() + log_scale).exp() });
        let kf = k as f64;
        let df = d as f64;
        let next = ((2.0 * kf + 1.0 + df - x) * cur - (kf * (kf + df)).sqrt() * prev) / ((kf + 1.0) * (kf + 1.0 + df)).sqrt();
        prev = cur;
        cur = next;
        let a = cur.abs().max(prev.abs());
        if a > 1e150 || (a < 1e-150 && a > 0.0) {
            prev /= a;
            cur /= a;
            log_scale += a.ln();
        }
    }
    out
}

/// Single-mode matrix element `⟨m|T_w|k⟩` under `T_w = D(w̄/√2)`.
pub fn displacement_entry_1d(w: C64, m: usize, k: usize) -> C64 {
    ModeTable::new(w.conj() * std::f64::consts::FRAC_1_SQRT_2, m.max(k)).entry(m, k)
}

/// Per-mode displacement tables for `T_w`.
#[derive(Clone, Debug)]
pub struct DisplacementTables {
    modes: Vec<ModeTable>,
    kmax: usize,
}

impl DisplacementTables {
    pub fn new<T: Real>(w: &[Complex<T>], kmax: usize) -> Self {
        let modes = w
            .iter()
            .map(|z| ModeTable::new(C64::new(z.re.as_f64(), -z.im.as_f64()) * std::f64::consts::FRAC_1_SQRT_2, kmax))
            .collect();
        Self { modes, kmax }
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// Per-mode band beyond which entries are below `1e-18`.
    pub fn bands(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.band()).collect()
    }

    pub fn entry(&self, m: &State, k: &State) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (j, mode) in self.modes.iter().enumerate() {
            acc *= mode.entry(m[j] as usize, k[j] as usize);
            if acc.re == 0.0 && acc.im == 0.0 {
                break;
            }
        }
        acc
    }

    pub fn entry_1d(&self, mode: usize, m: usize, k: usize) -> C64 {
        self.modes[mode].entry(m, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_overlap() {
        let w = C64::new(0.8, -1.1);
        let v = displacement_entry_1d(w, 0, 0);
        assert!((v.re - (-w.norm_sqr() / 4.0).exp()).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn unitary_columns() {
        let t = DisplacementTables::new(&[Complex::new(1.3, 0.4)], 200);
        for k in [0usize, 5, 40] {
            let s: f64 = (0..=200).map(|m| t.entry_1d(0, m, k).norm_sqr()).sum();
            assert!((s - 1.0).abs() < 1e-12, "{s}");
        }
    }
}
