//! Harmonic-oscillator eigenbasis: kinetic and position-power matrices for
//! finite-basis truncations of one-dimensional Schrödinger operators.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Truncated eigenbasis of `−(ħ²/2μ) d²/dx² + (μω²/2) x²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorBasis {
    pub size: usize,
    pub mu: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl OscillatorBasis {
    pub fn new(size: usize, mu: f64, omega: f64, hbar: f64) -> Result<Self> {
        if size == 0 || !(mu > 0.0) || !(omega > 0.0) || !(hbar > 0.0) {
            return Err(Error::Invalid(format!(
                "oscillator basis needs size >= 1 and positive mu, omega, hbar (got {size}, {mu}, {omega}, {hbar})"
            )));
        }
        Ok(OscillatorBasis { size, mu, omega, hbar })
    }

    /// `μ = ħ = 1`.
    pub fn unit(size: usize, omega: f64) -> Result<Self> {
        Self::new(size, 1.0, omega, 1.0)
    }

    pub fn with_size(self, size: usize) -> Self {
        OscillatorBasis { size, ..self }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        OscillatorBasis { omega, ..self }
    }

    /// Length scale `√(ħ/(2μω))` in `x = scale·(a + a†)`.
    pub fn length(&self) -> f64 {
        (self.hbar / (2.0 * self.mu * self.omega)).sqrt()
    }
}

/// `⟨ψ_n, −ħ² ψ_m''⟩`: `(ħμω/2)(2n+1)` on the diagonal and
/// `−(ħμω/2)√(n(n−1))` two steps off it.
pub fn kinetic_matrix(basis: &OscillatorBasis) -> DMatrix<f64> {
    let s = basis.size;
    let c = 0.5 * basis.hbar * basis.mu * basis.omega;
    let mut m = DMatrix::zeros(s, s);
    for n in 0..s {
        m[(n, n)] = c * (2 * n + 1) as f64;
        if n >= 2 {
            let v = -c * ((n * (n - 1)) as f64).sqrt();
            m[(n, n - 2)] = v;
            m[(n - 2, n)] = v;
        }
    }
    m
}

/// `⟨ψ_n, x^k ψ_m⟩` for `k ≤ 8`.
///
/// Each column is `(a + a†)^k e_m` computed in a basis padded by k levels, so
/// every entry of the returned block is exact (no boundary truncation).
/// Only the upper triangle is computed; the lower one is its mirror image.
pub fn position_power_matrix(basis: &OscillatorBasis, k: u32) -> Result<DMatrix<f64>> {
    if k > 8 {
        return Err(Error::Invalid(format!("position power {k} > 8")));
    }
    let s = basis.size;
    let k = k as usize;
    let padded = s + k;
    let scale = basis.length().powi(k as i32);
    let sqrt: Vec<f64> = (0..=padded).map(|i| (i as f64).sqrt()).collect();
    let mut m = DMatrix::zeros(s, s);
    let mut v = vec![0.0; padded + 1];
    let mut w = vec![0.0; padded + 1];
    for col in 0..s {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[col] = 1.0;
        let (mut lo, mut hi) = (col, col);
        for _ in 0..k {
            let (nlo, nhi) = (lo.saturating_sub(1), hi + 1);
            for i in nlo..=nhi {
                // (a v)_i = √(i+1) v_{i+1}; (a† v)_i = √i v_{i−1}
                let down = if i < hi { sqrt[i + 1] * v[i + 1] } else { 0.0 };
                let up = if i > lo && i <= hi + 1 { sqrt[i] * v[i - 1] } else { 0.0 };
                w[i] = down + up;
            }
            v[lo..=hi].fill(0.0);
            for i in nlo..=nhi {
                v[i] = w[i];
                w[i] = 0.0;
            }
            lo = nlo;
            hi = nhi;
        }
        for row in 0..=col {
            let x = v[row] * scale;
            m[(row, col)] = x;
            m[(col, row)] = x;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    #[test]
    fn kinetic_entries() {
        let b = OscillatorBasis::new(6, 1.3, 0.7, 1.1).unwrap();
        let k = kinetic_matrix(&b);
        let c = 0.5 * 1.1 * 1.3 * 0.7;
        assert!((k[(0, 0)] - c).abs() < 1e-15);
        assert!((k[(2, 0)] + c * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(k[(1, 0)], 0.0);
    }

    #[test]
    fn position_entries() {
        let b = OscillatorBasis::new(8, 1.0, 2.0, 1.0).unwrap();
        let x2 = position_power_matrix(&b, 2).unwrap();
        assert!((x2[(0, 0)] - 1.0 / 4.0).abs() < 1e-15);
        for n in 0..8 {
            assert!((x2[(n, n)] - (2 * n + 1) as f64 / 4.0).abs() < 1e-13);
        }
        let x1 = position_power_matrix(&b, 1).unwrap();
        assert!((x1[(1, 0)] - 0.5).abs() < 1e-15);
        let x0 = position_power_matrix(&b, 0).unwrap();
        assert_eq!(x0, DMatrix::identity(8, 8));
        assert!(position_power_matrix(&b, 9).is_err());
    }

    #[test]
    fn exact_symmetry_and_algebra() {
        let b = OscillatorBasis::new(30, 1.0, 0.8, 1.0).unwrap();
        let x = position_power_matrix(&b, 1).unwrap();
        for k in 0..=8 {
            let m = position_power_matrix(&b, k).unwrap();
            assert_eq!(m, m.transpose());
        }
        let x2 = position_power_matrix(&b, 2).unwrap();
        let prod = &x * &x;
        let inner = 28;
        assert!((prod.view((0, 0), (inner, inner)) - x2.view((0, 0), (inner, inner))).amax() < 1e-12);
        // Padding makes x⁶ exact everywhere, including the last rows.
        let big = OscillatorBasis::new(36, 1.0, 0.8, 1.0).unwrap();
        let x1 = position_power_matrix(&big, 1).unwrap();
        let x6 = position_power_matrix(&b, 6).unwrap();
        let p6 = x1.pow(6);
        assert!((p6.view((0, 0), (30, 30)) - x6).amax() < 1e-9);
    }

    #[test]
    fn exactly_solvable_oscillator() {
        let (mu, om, hb) = (1.7, 0.9, 1.3);
        let b = OscillatorBasis::new(40, mu, om, hb).unwrap();
        let h = kinetic_matrix(&b) / (2.0 * mu) + position_power_matrix(&b, 2).unwrap() * (0.5 * mu * om * om);
        let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (n, v) in e.iter().take(20).enumerate() {
            assert!((v - hb * om * (n as f64 + 0.5)).abs() < 1e-10);
        }
    }
}
