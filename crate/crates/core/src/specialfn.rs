//! Modified Bessel functions of the first kind, their ratios, and the gamma
//! family, all evaluated so that nothing overflows for arguments up to 1e5.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `I_{ν+1}(x) / I_ν(x)` by a continued fraction evaluated with Lentz's method.
///
/// The fraction is `x / (2(ν+1) + x² / (2(ν+2) + x² / (2(ν+3) + …)))`, so the
/// two Bessel values are never formed separately.
pub fn bessel_ratio(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= -0.5) || !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_ratio(nu={nu}, x={x})")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x > 50.0 * (1.0 + nu * nu) {
        return Ok(bessel_ratio_large_x(nu, x));
    }
    const TINY: f64 = 1e-300;
    let x2 = x * x;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..200_000usize {
        let a = if k == 1 { x } else { x2 };
        let b = 2.0 * (nu + k as f64);
        d = b + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(f);
        }
    }
    Err(Error::NonConvergence(format!("bessel_ratio(nu={nu}, x={x})")))
}

// Hankel expansion of I_{ν+1}/I_ν for x ≫ ν²: both numerator and denominator
// series are summed to the smallest term, then divided (they share e^x/√(2πx)).
fn bessel_ratio_large_x(nu: f64, x: f64) -> f64 {
    hankel_series(nu + 1.0, x) / hankel_series(nu, x)
}

// Σ_k (−1)^k a_k(ν) / x^k with a_k = Π_{j≤k} (4ν² − (2j−1)²) / (k! 8^k).
fn hankel_series(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        term *= -(mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `log I_ν(x)`, computed in log form throughout.
///
/// Orders down to `−1/2` are accepted (the `n = 1` sphere uses `I_{−1/2}`).
pub fn log_bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= -0.5) || !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_bessel_i(nu={nu}, x={x})")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 0.0 } else if nu > 0.0 { f64::NEG_INFINITY } else { f64::INFINITY });
    }
    if x > 40.0 + nu * nu {
        let s = hankel_series(nu, x);
        return Ok(x - 0.5 * (2.0 * PI * x).ln() + s.ln());
    }
    Ok(log_bessel_series(nu, x))
}

// Power series Σ (x²/4)^k / (k! Γ(ν+k+1)), summed relative to its largest term.
fn log_bessel_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let lead = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0);
    let mut logs = Vec::with_capacity(64);
    let mut lt = 0.0;
    let mut best = 0.0f64;
    logs.push(0.0);
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        lt += (q / (kf * (nu + kf))).ln();
        logs.push(lt);
        best = best.max(lt);
        if lt < best - 40.0 && q < kf * (nu + kf) {
            break;
        }
        k += 1;
    }
    lead + crate::logspace::log_sum_exp(&logs)
}

/// `log Γ(x)` for `x > 0` (upward shift, then Stirling's series).
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    let mut y = x;
    while y < 15.0 {
        shift += y.ln();
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360_360.0))))));
    (y - 0.5) * y.ln() - y + 0.5 * LN_2PI + series - shift
}

/// `log C(n, k)` through log-gamma; exact zero at the ends.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Digamma ψ(s) = d/ds log Γ(s).
pub fn digamma(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Pole(s));
    }
    let mut acc = 0.0;
    let mut y = s;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    // Σ B_{2k} / (2k y^{2k})
    let tail = inv2
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 120.0
                    + inv2 * (1.0 / 252.0 + inv2 * (-1.0 / 240.0 + inv2 * (1.0 / 132.0 + inv2 * (-691.0 / 32760.0))))));
    Ok(acc + y.ln() - 0.5 / y - tail)
}

/// Trigamma ψ'(s).
pub fn trigamma(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Pole(s));
    }
    let mut acc = 0.0;
    let mut y = s;
    while y < 10.0 {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // 1/y + 1/(2y²) + Σ B_{2k} / y^{2k+1}
    let tail = inv
        * inv2
        * (1.0 / 6.0
            + inv2
                * (-1.0 / 30.0
                    + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0 + inv2 * (5.0 / 66.0 + inv2 * (-691.0 / 2730.0))))));
    Ok(acc + inv + 0.5 * inv2 + tail)
}

/// `log E[e^{⟨ζ,σ⟩}]` for σ uniform on the unit sphere S^{n−1} and `|ζ| = z`,
/// i.e. `log(Γ(n/2) (2/z)^{n/2−1} I_{n/2−1}(z))`.
///
/// Closed forms are used for `n = 1` (log cosh) and `n = 3` (log sinh z / z);
/// everything else goes through [`log_bessel_i`] or the `₀F₁` series near 0.
pub fn log_sphere_mgf(n: usize, z: f64) -> f64 {
    let z = z.abs();
    match n {
        1 => log_cosh(z),
        3 => log_sinhc(z),
        _ => log_sphere_mgf_bessel(n, z),
    }
}

/// The general Bessel route to [`log_sphere_mgf`], bypassing closed forms.
pub fn log_sphere_mgf_bessel(n: usize, z: f64) -> f64 {
    let z = z.abs();
    let a = 0.5 * n as f64;
    if z < 2.0 {
        // ₀F₁(; n/2; z²/4) = Σ Γ(a) (z²/4)^k / (k! Γ(a+k)); all terms positive.
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= q / (kf * (a + kf - 1.0));
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        return sum.ln();
    }
    let nu = a - 1.0;
    ln_gamma(a) + nu * (2.0 / z).ln() + log_bessel_i(nu, z).expect("finite order and argument")
}

/// `log cosh z` without overflow.
pub fn log_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `log(sinh z / z)`, with the z → 0 limit 0.
pub fn log_sinhc(z: f64) -> f64 {
    let a = z.abs();
    if a < 1e-3 {
        let a2 = a * a;
        return a2 / 6.0 - a2 * a2 / 180.0;
    }
    a + (-(-2.0 * a).exp()).ln_1p() - (2.0 * a).ln()
}

/// `R_n(z) = I_{n/2}(z) / I_{n/2−1}(z)`, the mean-spin magnitude under a field
/// of strength z; `tanh z` for `n = 1`.
pub fn sphere_mean_ratio(n: usize, z: f64) -> f64 {
    if n == 1 {
        return z.tanh();
    }
    let z = z.abs();
    if z < 1e-4 {
        let nf = n as f64;
        return z / nf - z.powi(3) / (nf * nf * (nf + 2.0));
    }
    bessel_ratio(0.5 * n as f64 - 1.0, z).expect("finite order and argument")
}

/// `R_n(z) / z`, finite at z = 0 where it equals 1/n.
pub fn sphere_mean_ratio_over_z(n: usize, z: f64) -> f64 {
    let nf = n as f64;
    let a = z.abs();
    if a < 1e-4 {
        return 1.0 / nf - a * a / (nf * nf * (nf + 2.0));
    }
    sphere_mean_ratio(n, a) / a
}

/// `R_n'(z) = 1 − (n−1) R_n(z)/z − R_n(z)²`.
pub fn sphere_mean_ratio_deriv(n: usize, z: f64) -> f64 {
    let r = sphere_mean_ratio(n, z);
    1.0 - (n as f64 - 1.0) * sphere_mean_ratio_over_z(n, z) - r * r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_half_integer_closed_form() {
        let r = bessel_ratio(0.5, 2.0).unwrap();
        let exact = 1.0 / 2f64.tanh() - 0.5;
        assert!((r - exact).abs() < 1e-14 * exact);
        assert!((r - 0.537315).abs() < 1e-6);
        for &x in &[1e-3, 0.1, 1.0, 7.0, 40.0, 700.0, 5000.0, 1e4] {
            let r = bessel_ratio(-0.5, x).unwrap();
            assert!((r / x.tanh() - 1.0).abs() < 1e-12, "x={x}");
            let r = bessel_ratio(0.5, x).unwrap();
            let exact = if x < 0.1 {
                let x2 = x * x;
                x / 3.0 * (1.0 - x2 / 15.0 + 2.0 * x2 * x2 / 315.0)
            } else {
                1.0 / x.tanh() - 1.0 / x
            };
            assert!((r / exact - 1.0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn ratio_small_argument() {
        assert_eq!(bessel_ratio(0.0, 0.0).unwrap(), 0.0);
        let x = 1e-6;
        assert!((bessel_ratio(0.0, x).unwrap() - x / 2.0).abs() < 1e-18);
        // lim_{r→0} I_1(βr)/(r I_0(βr)) = β/2
        let r = 1e-7;
        assert!((bessel_ratio(0.0, 3.0 * r).unwrap() / r - 1.5).abs() < 1e-9);
    }

    #[test]
    fn ratio_rejects_bad_domain() {
        assert!(bessel_ratio(0.0, -1.0).is_err());
        assert!(bessel_ratio(-0.7, 1.0).is_err());
    }

    #[test]
    fn log_bessel_examples() {
        assert_eq!(log_bessel_i(0.0, 0.0).unwrap(), 0.0);
        let v = log_bessel_i(0.5, 1.0).unwrap();
        let exact = ((2.0 / PI).sqrt() * 1f64.sinh()).ln();
        assert!((v - exact).abs() < 1e-13);
        assert!((v + 0.064352).abs() < 1e-6);
        assert!((log_bessel_i(0.0, 100.0).unwrap() - 96.7797).abs() < 1e-4);
        assert!(log_bessel_i(1.5, 1e5).unwrap().is_finite());
    }

    #[test]
    fn log_bessel_half_integer_everywhere() {
        for &x in &[1e-8, 0.3, 2.0, 30.0, 39.9, 40.1, 90.0, 500.0, 1e5] {
            let exact = 0.5 * (2.0 / (PI * x)).ln() + log_sinh(x);
            let v = log_bessel_i(0.5, x).unwrap();
            assert!((v - exact).abs() < 1e-10 * exact.abs().max(1.0), "x={x}");
            let exact = 0.5 * (2.0 / (PI * x)).ln() + log_cosh(x);
            let v = log_bessel_i(-0.5, x).unwrap();
            assert!((v - exact).abs() < 1e-10 * exact.abs().max(1.0), "x={x}");
        }
    }

    fn log_sinh(x: f64) -> f64 {
        if x < 20.0 {
            x.sinh().ln()
        } else {
            x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
        }
    }

    #[test]
    fn ratio_consistent_with_log_bessel() {
        for &nu in &[0.0, 1.0, 2.5] {
            for &x in &[0.5, 5.0, 35.0, 80.0] {
                let r = bessel_ratio(nu, x).unwrap();
                let via_logs = (log_bessel_i(nu + 1.0, x).unwrap() - log_bessel_i(nu, x).unwrap()).exp();
                assert!((r / via_logs - 1.0).abs() < 1e-10, "nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn gamma_family_anchors() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0).unwrap() + euler).abs() < 1e-13);
        assert!((trigamma(1.0).unwrap() - PI * PI / 6.0).abs() < 1e-12);
        let s = 100.0;
        assert!((trigamma(s).unwrap() - (1.0 / s + 0.5 / (s * s))).abs() < 2e-6);
        assert!(digamma(0.0).is_err());
        assert!(trigamma(-1.0).is_err());
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sphere_mgf_closed_forms_match_bessel() {
        for &n in &[1usize, 2, 3] {
            for &z in &[0.0, 1e-5, 0.3, 1.9, 2.1, 8.0, 60.0, 900.0] {
                let a = log_sphere_mgf(n, z);
                let b = log_sphere_mgf_bessel(n, z);
                assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "n={n} z={z}: {a} vs {b}");
            }
        }
        // n = 2 is log I₀
        assert!((log_sphere_mgf(2, 100.0) - 96.7797).abs() < 1e-4);
    }

    #[test]
    fn mean_ratio_derivative_matches_finite_difference() {
        for &n in &[1usize, 2, 3, 5] {
            for &z in &[1e-3, 0.5, 3.0, 20.0] {
                let h = 1e-5;
                let fd = (sphere_mean_ratio(n, z + h) - sphere_mean_ratio(n, z - h)) / (2.0 * h);
                assert!((fd - sphere_mean_ratio_deriv(n, z)).abs() < 1e-8, "n={n} z={z}");
            }
        }
    }
}
