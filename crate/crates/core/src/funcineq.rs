//! One-dimensional functional-inequality constants of `ν_N` (Ising line):
//! the Muckenhoupt number B, which pins the Poincaré constant to
//! `[B/2, 4B]`, and the Bobkov–Götze pair `D₀, D₁` for the log-Sobolev
//! constant. Values span hundreds of orders of magnitude, so everything is
//! held as logarithms.

use crate::error::{Error, Result};
use crate::logspace::log_add;
use crate::measures::RenormalizedMeasure;
use crate::potential::{global_minima, ModelParams};
use crate::quad::{LogCumulative, QuadTol};
use crate::schrodinger::solve_renormalized;
use serde::{Deserialize, Serialize};

/// Absolute constants of the Bobkov–Götze characterization:
/// `K₀(D₀+D₁) ≤ 1/k ≤ K₁(D₀+D₁)`.
pub const BG_K0: f64 = 1.0 / 150.0;
pub const BG_K1: f64 = 468.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    Median,
    /// Split at the global minimum, accepted only when its left mass lies in
    /// `(0.4, 0.6)`.
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IneqOptions {
    pub split: SplitRule,
    /// Intervals in the sup scan on each side of the split.
    pub scan_intervals: usize,
    /// Golden-section polish around the best scan point.
    pub refine: bool,
}

impl Default for IneqOptions {
    fn default() -> Self {
        IneqOptions { split: SplitRule::Median, scan_intervals: 2000, refine: true }
    }
}

/// Logs of the four sup constants and the split used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqConstants {
    pub log_b0: f64,
    pub log_b1: f64,
    pub log_d0: f64,
    pub log_d1: f64,
    pub split_point: f64,
    /// `ν_N((−∞, split])`.
    pub split_mass: f64,
    pub n_spins: usize,
    pub params: ModelParams,
}

impl IneqConstants {
    pub fn b0(&self) -> f64 {
        self.log_b0.exp()
    }
    pub fn b1(&self) -> f64 {
        self.log_b1.exp()
    }
    pub fn d0(&self) -> f64 {
        self.log_d0.exp()
    }
    pub fn d1(&self) -> f64 {
        self.log_d1.exp()
    }

    /// `log B = log max(B₀, B₁)`.
    pub fn log_b(&self) -> f64 {
        self.log_b0.max(self.log_b1)
    }

    pub fn b(&self) -> f64 {
        self.log_b().exp()
    }

    /// `log(D₀ + D₁)`.
    pub fn log_d(&self) -> f64 {
        log_add(self.log_d0, self.log_d1)
    }
}

/// Log mass and log inverse-density integrals of `ν_N` on a shared panel grid.
struct Profiles<'a, F: Fn(f64) -> f64, G: Fn(f64) -> f64> {
    mass: LogCumulative<F>,
    inverse: LogCumulative<G>,
    measure: &'a RenormalizedMeasure,
}

fn tol_for(measure: &RenormalizedMeasure) -> QuadTol {
    let nf = measure.n_spins as f64;
    let (a, b) = measure.support;
    let vmax = measure.profile.v(a).abs().max(measure.profile.v(b).abs()).max(measure.v_min.abs());
    QuadTol { rel: 1e-11, abs: 0.0, noise: 8.0 * f64::EPSILON * nf * vmax, max_depth: 40 }
}

/// Which side of the split, and which functional.
#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> Profiles<'_, F, G> {
    /// `(log tail mass, log ∫ 1/p between x and the split)`.
    fn parts(&self, side: Side, x: f64, split: f64) -> Result<(f64, f64)> {
        match side {
            Side::Left => Ok((self.mass.log_upto(x)?, self.inverse.log_between(x, split)?)),
            Side::Right => Ok((self.mass.log_from(x)?, self.inverse.log_between(split, x)?)),
        }
    }

    fn log_b(&self, side: Side, x: f64, split: f64) -> Result<f64> {
        let (lm, li) = self.parts(side, x, split)?;
        Ok(lm + li)
    }

    fn log_d(&self, side: Side, x: f64, split: f64) -> Result<f64> {
        let (lm, li) = self.parts(side, x, split)?;
        // −μ log μ; μ ≥ 1 only through rounding at the far end
        let neg_log = -lm;
        if !(neg_log > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(lm + neg_log.ln() + li)
    }

    /// Sup of `f` over `(end, split)` or `(split, end)`.
    fn sup(&self, side: Side, split: f64, opts: &IneqOptions, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let end = match side {
            Side::Left => self.measure.support.0,
            Side::Right => self.measure.support.1,
        };
        let k = opts.scan_intervals.max(2);
        let xs: Vec<f64> = (1..k).map(|i| split + (end - split) * i as f64 / k as f64).collect();
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, &x) in xs.iter().enumerate() {
            let v = f(x)?;
            if v > best.0 {
                best = (v, i);
            }
        }
        if !opts.refine || best.0 == f64::NEG_INFINITY {
            return Ok(best.0);
        }
        let i = best.1;
        let a = if i == 0 { split } else { xs[i - 1] };
        let b = if i + 1 == xs.len() { end } else { xs[i + 1] };
        Ok(golden_max(&f, a, b, 60)?.max(best.0))
    }
}

/// Golden-section maximization; returns the best value seen.
fn golden_max(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, iters: usize) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut best = fc.max(fd);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
        best = best.max(fc).max(fd);
        if (b - a).abs() < 1e-12 * (1.0 + a.abs()) {
            break;
        }
    }
    Ok(best)
}

fn require_line(params: &ModelParams) -> Result<()> {
    if params.n != 1 {
        return Err(Error::Invalid(format!("functional-inequality constants are one-dimensional; n = {}", params.n)));
    }
    Ok(())
}

fn split_point(measure: &RenormalizedMeasure, rule: SplitRule) -> Result<(f64, f64)> {
    let cdf = measure.log_cdf()?;
    match rule {
        SplitRule::Median => {
            let m = measure.median()?;
            Ok((m, cdf.log_upto(m)?.exp()))
        }
        SplitRule::Minimum => {
            let min = global_minima(&measure.params)
                .first()
                .map(|c| c.location[0])
                .ok_or_else(|| Error::Regime("no global minimum".into()))?;
            let mass = cdf.log_upto(min)?.exp();
            if !(mass > 0.4 && mass < 0.6) {
                return Err(Error::Regime(format!("mass {mass} left of the minimum is outside (0.4, 0.6)")));
            }
            Ok((min, mass))
        }
    }
}

/// B₀, B₁, D₀, D₁ for `ν_N` with default options.
pub fn ineq_constants(params: &ModelParams, n_spins: usize) -> Result<IneqConstants> {
    ineq_constants_with(params, n_spins, &IneqOptions::default())
}

pub fn ineq_constants_with(params: &ModelParams, n_spins: usize, opts: &IneqOptions) -> Result<IneqConstants> {
    require_line(params)?;
    let measure = RenormalizedMeasure::new(params, n_spins)?;
    let tol = tol_for(&measure);
    let (split, split_mass) = split_point(&measure, opts.split)?;
    let mref = &measure;
    let profiles = Profiles {
        mass: LogCumulative::new(move |x| mref.log_density(x), measure.edges().to_vec(), tol)?,
        inverse: LogCumulative::new(move |x| -mref.log_density(x), measure.edges().to_vec(), tol)?,
        measure: &measure,
    };
    let log_b0 = profiles.sup(Side::Left, split, opts, |x| profiles.log_b(Side::Left, x, split))?;
    let log_b1 = profiles.sup(Side::Right, split, opts, |x| profiles.log_b(Side::Right, x, split))?;
    let log_d0 = profiles.sup(Side::Left, split, opts, |x| profiles.log_d(Side::Left, x, split))?;
    let log_d1 = profiles.sup(Side::Right, split, opts, |x| profiles.log_d(Side::Right, x, split))?;
    if ![log_b0, log_b1, log_d0, log_d1].iter().all(|v| v.is_finite()) {
        return Err(Error::NonConvergence("a sup constant is not finite".into()));
    }
    Ok(IneqConstants { log_b0, log_b1, log_d0, log_d1, split_point: split, split_mass, n_spins, params: params.clone() })
}

/// Muckenhoupt part only (the D fields are filled too; they cost the same scan).
pub fn muckenhoupt(params: &ModelParams, n_spins: usize) -> Result<IneqConstants> {
    ineq_constants(params, n_spins)
}

pub fn bobkov_gotze(params: &ModelParams, n_spins: usize) -> Result<IneqConstants> {
    ineq_constants(params, n_spins)
}

/// Poincaré constant from the Schrödinger pipeline against the Muckenhoupt
/// sandwich `B/2 ≤ c ≤ 4B`, with relative slack `tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub n_spins: usize,
    pub params: ModelParams,
    /// `log c = −log gap`.
    pub log_c: f64,
    pub log_b: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub pass: bool,
}

pub fn sandwich_check(params: &ModelParams, n_spins: usize, tol: f64) -> Result<SandwichReport> {
    require_line(params)?;
    let spec = solve_renormalized(params, n_spins, 0, 2)?;
    let log_gap = spec.log_gap.ok_or_else(|| Error::NonConvergence("no gap from the renormalized solve".into()))?;
    let consts = ineq_constants(params, n_spins)?;
    let log_c = -log_gap;
    let log_b = consts.log_b();
    let lower_ok = log_c >= log_b + (0.5 * (1.0 - tol)).ln();
    let upper_ok = log_c <= log_b + (4.0 * (1.0 + tol)).ln();
    Ok(SandwichReport { n_spins, params: params.clone(), log_c, log_b, lower_ok, upper_ok, pass: lower_ok && upper_ok })
}

/// Constants of the full N-spin measure obtained from those of `ν_N`, as
/// multipliers of the summed spin Dirichlet form: `Var ≤ sgi·E`, `Ent ≤ lsi·E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferredConstants {
    pub sgi: f64,
    pub lsi: f64,
}

impl TransferredConstants {
    /// Lower bound on the full spectral gap.
    pub fn gap_lower_bound(&self) -> f64 {
        1.0 / self.sgi
    }
}

/// `ν_N` with SGI/LSI constant λ and fluctuation constant `γ_n` give
/// `sgi = (1/γ)(1 + 4Nβ²/λ)` and `lsi = (2/γ)(1 + 8Nβ²/λ)`.
pub fn transfer_constants(lambda: f64, n_spins: usize, beta: f64, gamma_n: f64) -> Result<TransferredConstants> {
    if !(lambda > 0.0) || !(gamma_n > 0.0) || !beta.is_finite() {
        return Err(Error::Invalid(format!("transfer needs lambda > 0 and gamma > 0 (got {lambda}, {gamma_n})")));
    }
    let nb2 = n_spins as f64 * beta * beta;
    Ok(TransferredConstants { sgi: (1.0 + 4.0 * nb2 / lambda) / gamma_n, lsi: 2.0 * (1.0 + 8.0 * nb2 / lambda) / gamma_n })
}

/// Fluctuation LSI constant for `n = 1`; other n take it from configuration.
pub const GAMMA_ISING: f64 = 4.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_measure_has_equal_sides() {
        let c = ineq_constants(&ModelParams::ising(2.0, 0.0).unwrap(), 100).unwrap();
        assert!((c.log_b0 - c.log_b1).abs() < 0.01, "{c:?}");
        assert!((c.log_d0 - c.log_d1).abs() < 0.01, "{c:?}");
        assert!((c.split_mass - 0.5).abs() < 1e-6);
    }

    #[test]
    fn gaussian_limit() {
        // ν_N is nearly Gaussian with variance s² = 1/(N V''(0)), whose
        // Poincaré constant is s², so s² must lie in [B/2, 4B].
        let p = ModelParams::ising(0.5, 0.0).unwrap();
        let n = 400;
        let c = ineq_constants(&p, n).unwrap();
        let s2 = 1.0 / (n as f64 * 0.5 * (1.0 - 0.5));
        assert!(c.b() / 2.0 <= s2 && s2 <= 4.0 * c.b(), "{} {}", c.b(), s2);
    }

    #[test]
    fn transfer_arithmetic() {
        let t = transfer_constants(1e300, 10, 2.0, 4.0).unwrap();
        assert!((t.sgi - 0.25).abs() < 1e-12 && (t.lsi - 0.5).abs() < 1e-12);
        let t = transfer_constants(100.0, 100, 2.0, 4.0).unwrap();
        assert!((t.sgi - 0.25 * (1.0 + 16.0)).abs() < 1e-12);
        assert!((t.lsi - 0.5 * (1.0 + 32.0)).abs() < 1e-12);
        assert!(transfer_constants(0.0, 1, 1.0, 4.0).is_err());
    }

    #[test]
    fn split_at_minimum_needs_balanced_mass() {
        let p = ModelParams::ising(2.0, 1.0).unwrap();
        let o = IneqOptions { split: SplitRule::Minimum, ..Default::default() };
        let c = ineq_constants_with(&p, 200, &o).unwrap();
        assert!(c.split_mass > 0.4 && c.split_mass < 0.6);
        assert!(ineq_constants(&ModelParams::new(2, 1.0, vec![0.0, 0.0]).unwrap(), 10).is_err());
    }

    #[test]
    fn exponential_rates_follow_the_well_depth() {
        let p = ModelParams::ising(2.0, 0.0).unwrap();
        let depth = crate::potential::well_depth(&p).unwrap();
        let (a, b) = (ineq_constants(&p, 100).unwrap(), ineq_constants(&p, 200).unwrap());
        let slope_b = (b.log_b() - a.log_b()) / 100.0;
        let slope_d = (b.log_d() - a.log_d()) / 100.0;
        assert!((slope_b / depth - 1.0).abs() < 0.15, "{slope_b}");
        assert!((slope_d / depth - 1.0).abs() < 0.15, "{slope_d}");
    }

    #[test]
    fn subcritical_b_scales_like_the_variance() {
        let p = ModelParams::ising(0.5, 0.0).unwrap();
        let a = ineq_constants(&p, 100).unwrap().b() * 100.0;
        let b = ineq_constants(&p, 200).unwrap().b() * 200.0;
        assert!((b / a - 1.0).abs() < 0.2, "{a} {b}");
    }

    #[test]
    fn refinement_is_monotone() {
        let p = ModelParams::ising(2.0, 0.3).unwrap();
        let coarse = IneqOptions { scan_intervals: 250, refine: false, ..Default::default() };
        let fine = IneqOptions { scan_intervals: 1000, refine: false, ..Default::default() };
        let polished = IneqOptions { scan_intervals: 1000, refine: true, ..Default::default() };
        let (a, b, c) = (
            ineq_constants_with(&p, 100, &coarse).unwrap(),
            ineq_constants_with(&p, 100, &fine).unwrap(),
            ineq_constants_with(&p, 100, &polished).unwrap(),
        );
        for (x, y) in [(&a, &b), (&b, &c)] {
            assert!(y.log_b0 >= x.log_b0 && y.log_b1 >= x.log_b1);
            assert!(y.log_d0 >= x.log_d0 && y.log_d1 >= x.log_d1);
        }
    }
}
