//! Adaptive Gauss–Kronrod (7/15) quadrature and log-domain panel integration
//! for integrands of the form `e^{ψ(x)}` with enormous dynamic range.

use crate::error::{Error, Result};
use crate::logspace::{log_add, log_sum_exp};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: (Kronrod estimate, |Kronrod − Gauss|).
pub fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = hw * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * hw, ((k - g) * hw).abs())
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTol {
    pub rel: f64,
    pub abs: f64,
    /// Relative accuracy of the integrand itself; panels whose error estimate
    /// is below `noise·|value|` are accepted since bisection cannot improve them.
    pub noise: f64,
    pub max_depth: u32,
}

impl Default for QuadTol {
    fn default() -> Self {
        QuadTol { rel: 1e-12, abs: 0.0, noise: 0.0, max_depth: 40 }
    }
}

/// Adaptive integral over consecutive intervals `edges[i]..edges[i+1]`.
///
/// Each interval is bisected until its error estimate is below its share of
/// `max(abs, rel·|coarse total|)`; exceeding `max_depth` or meeting a
/// non-finite sample is an error.
pub fn integrate(f: &impl Fn(f64) -> f64, edges: &[f64], tol: QuadTol) -> Result<f64> {
    if edges.len() < 2 {
        return Ok(0.0);
    }
    let total_len = edges[edges.len() - 1] - edges[0];
    let coarse: f64 = edges.windows(2).map(|w| gk15(f, w[0], w[1]).0.abs()).sum();
    let target = tol.abs.max(tol.rel * coarse);
    let mut sum = 0.0;
    let mut stack: Vec<(f64, f64, u32)> = edges.windows(2).rev().map(|w| (w[0], w[1], 0)).collect();
    while let Some((a, b, depth)) = stack.pop() {
        let (val, err) = gk15(f, a, b);
        if !val.is_finite() || !err.is_finite() {
            return Err(Error::NonConvergence(format!("integrand is not finite on [{a}, {b}]")));
        }
        let share = target * (b - a) / total_len;
        if err <= share.max(tol.noise.max(1e-15) * val.abs()) || b - a < 1e-14 * (1.0 + a.abs()) {
            sum += val;
        } else if depth >= tol.max_depth {
            return Err(Error::NonConvergence(format!(
                "quadrature on [{a}, {b}] still has error {err:e} at depth {depth}"
            )));
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    Ok(sum)
}

/// `log ∫_a^b e^{ψ(x)} dx` on one panel, shifted by the panel's sampled maximum.
pub fn log_integrate_panel(psi: &impl Fn(f64) -> f64, a: f64, b: f64, tol: QuadTol) -> Result<f64> {
    if b <= a {
        return Ok(f64::NEG_INFINITY);
    }
    let shift = (0..=16)
        .map(|i| psi(a + (b - a) * i as f64 / 16.0))
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let g = |x: f64| (psi(x) - shift).exp();
    let v = integrate(&g, &[a, b], QuadTol { abs: 0.0, ..tol })?;
    Ok(shift + v.ln())
}

/// Running log-integrals `log ∫_{edges[0]}^{x} e^{ψ}` on a fixed panel grid.
#[derive(Debug, Clone)]
pub struct LogCumulative<F: Fn(f64) -> f64> {
    psi: F,
    edges: Vec<f64>,
    /// `cum[i] = log ∫_{edges[0]}^{edges[i]} e^ψ`.
    cum: Vec<f64>,
    tol: QuadTol,
}

impl<F: Fn(f64) -> f64> LogCumulative<F> {
    pub fn new(psi: F, edges: Vec<f64>, tol: QuadTol) -> Result<Self> {
        let mut cum = Vec::with_capacity(edges.len());
        cum.push(f64::NEG_INFINITY);
        let mut acc = f64::NEG_INFINITY;
        for w in edges.windows(2) {
            acc = log_add(acc, log_integrate_panel(&psi, w[0], w[1], tol)?);
            cum.push(acc);
        }
        Ok(LogCumulative { psi, edges, cum, tol })
    }

    pub fn log_total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// `log ∫_{edges[0]}^{x} e^ψ`, with x clamped to the grid.
    pub fn log_upto(&self, x: f64) -> Result<f64> {
        let e = &self.edges;
        if x <= e[0] {
            return Ok(f64::NEG_INFINITY);
        }
        if x >= e[e.len() - 1] {
            return Ok(self.log_total());
        }
        let i = e.partition_point(|&t| t <= x) - 1;
        let part = log_integrate_panel(&self.psi, e[i], x, self.tol)?;
        Ok(log_add(self.cum[i], part))
    }

    /// `log ∫_{x}^{end} e^ψ`.
    pub fn log_from(&self, x: f64) -> Result<f64> {
        let e = &self.edges;
        if x <= e[0] {
            return Ok(self.log_total());
        }
        if x >= e[e.len() - 1] {
            return Ok(f64::NEG_INFINITY);
        }
        let i = e.partition_point(|&t| t <= x) - 1;
        let part = log_integrate_panel(&self.psi, x, e[i + 1], self.tol)?;
        let rest: Vec<f64> = (i + 1..e.len() - 1)
            .map(|j| crate::logspace::log_sub(self.cum[j + 1], self.cum[j]))
            .collect();
        Ok(log_add(part, log_sum_exp(&rest)))
    }

    /// `log ∫_{x}^{y} e^ψ` for `x ≤ y`.
    pub fn log_between(&self, x: f64, y: f64) -> Result<f64> {
        if y <= x {
            return Ok(f64::NEG_INFINITY);
        }
        let e = &self.edges;
        let (x, y) = (x.max(e[0]), y.min(e[e.len() - 1]));
        let i = e.partition_point(|&t| t <= x).saturating_sub(1);
        let j = e.partition_point(|&t| t < y).saturating_sub(1);
        if i == j {
            return log_integrate_panel(&self.psi, x, y, self.tol);
        }
        let head = log_integrate_panel(&self.psi, x, e[i + 1], self.tol)?;
        let tail = log_integrate_panel(&self.psi, e[j], y, self.tol)?;
        let mut parts = vec![head, tail];
        for k in i + 1..j {
            parts.push(crate::logspace::log_sub(self.cum[k + 1], self.cum[k]));
        }
        Ok(log_sum_exp(&parts))
    }
}

/// Panel edges on `[a, b]` with local width `min(max_width, 1/scale(x))`.
pub fn adaptive_edges(a: f64, b: f64, scale: impl Fn(f64) -> f64, max_width: f64) -> Vec<f64> {
    let mut edges = vec![a];
    let mut x = a;
    while x < b {
        let w = (1.0 / scale(x)).min(max_width).max((b - a) * 1e-7);
        x = (x + w).min(b);
        if b - x < 0.25 * w {
            x = b;
        }
        edges.push(x);
    }
    edges
}

/// Merge extra breakpoints into a sorted edge list.
pub fn with_breakpoints(mut edges: Vec<f64>, points: &[f64]) -> Vec<f64> {
    let (a, b) = (edges[0], edges[edges.len() - 1]);
    for &p in points {
        if p > a && p < b {
            edges.push(p);
        }
    }
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    edges
}
