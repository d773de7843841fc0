//! Log-domain arithmetic for quantities that over- or underflow `f64`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// `log(e^a + e^b)`.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(e^a - e^b)` for `a >= b`; `-inf` when equal.
pub fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = b - a;
    if d >= 0.0 {
        return f64::NEG_INFINITY;
    }
    a + (-(d.exp())).ln_1p()
}

/// Stable `log Σ exp(x_i)`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_infinite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// A real number stored as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: f64,
    pub log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0.0, log_abs: f64::NEG_INFINITY };

    pub fn from_log(log_abs: f64) -> Self {
        SignedLog { sign: 1.0, log_abs }
    }

    pub fn new(sign: f64, log_abs: f64) -> Self {
        if sign == 0.0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { sign: sign.signum(), log_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(x.signum() * (x != 0.0) as i32 as f64, x.abs().ln())
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }

    /// Multiply by `e^l`.
    pub fn scale_log(self, l: f64) -> Self {
        SignedLog::new(self.sign, self.log_abs + l)
    }
}

impl Neg for SignedLog {
    type Output = Self;
    fn neg(self) -> Self {
        SignedLog { sign: -self.sign, log_abs: self.log_abs }
    }
}

impl Add for SignedLog {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        if self.sign == o.sign {
            return SignedLog::new(self.sign, log_add(self.log_abs, o.log_abs));
        }
        if self.log_abs >= o.log_abs {
            SignedLog::new(self.sign, log_sub(self.log_abs, o.log_abs))
        } else {
            SignedLog::new(o.sign, log_sub(o.log_abs, self.log_abs))
        }
    }
}

impl Sub for SignedLog {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + -o
    }
}

impl Mul for SignedLog {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        SignedLog::new(self.sign * o.sign, self.log_abs + o.log_abs)
    }
}

impl Div for SignedLog {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        SignedLog::new(self.sign * o.sign, self.log_abs - o.log_abs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_arithmetic_matches_plain() {
        let vals = [-3.5, -1e-3, 0.0, 2.0, 7.25];
        for &a in &vals {
            for &b in &vals {
                let (x, y) = (SignedLog::from_f64(a), SignedLog::from_f64(b));
                assert!(((x + y).to_f64() - (a + b)).abs() < 1e-12);
                assert!(((x - y).to_f64() - (a - b)).abs() < 1e-12);
                assert!(((x * y).to_f64() - a * b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_sum_exp_handles_huge_exponents() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
