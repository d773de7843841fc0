//! The renormalized measure `ν_N ∝ e^{−N V_n}` (radially weighted by
//! `r^{n−1}` for `n ≥ 2`), fluctuation-measure means, Laplace asymptotics and
//! the magnetization trial bound.

use crate::error::{Error, Result};
use crate::potential::{critical_points, global_minima, ModelParams, Profile};
use crate::quad::{adaptive_edges, integrate, with_breakpoints, LogCumulative, QuadTol};
use crate::specialfn::sphere_mean_ratio;

/// Numerical knobs for integrals against `ν_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    pub quad: QuadTol,
    /// The support is cut where `N(V − V_min)` first exceeds this.
    pub tail_exponent: f64,
    /// Multiplies the distance from the outermost critical point to the cutoff.
    pub cutoff_scale: f64,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions { quad: QuadTol::default(), tail_exponent: 60.0, cutoff_scale: 1.0 }
    }
}

/// `ν_N` for one model and spin count, reduced to one variable: φ on the line
/// (`n = 1`) or the radius r (`n ≥ 2`, zero field).
#[derive(Debug, Clone)]
pub struct RenormalizedMeasure {
    pub params: ModelParams,
    pub n_spins: usize,
    pub profile: Profile,
    pub v_min: f64,
    pub support: (f64, f64),
    /// `log ∫ e^{−N V} (r^{n−1}) dx`.
    pub log_normalizer: f64,
    edges: Vec<f64>,
    log_z_shifted: f64,
    opts: MeasureOptions,
}

impl RenormalizedMeasure {
    pub fn new(params: &ModelParams, n_spins: usize) -> Result<Self> {
        Self::with_options(params, n_spins, MeasureOptions::default())
    }

    pub fn with_options(params: &ModelParams, n_spins: usize, opts: MeasureOptions) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::Invalid("N must be at least 1".into()));
        }
        let profile = Profile::for_params(params)?;
        let cps = critical_points(params);
        let locs: Vec<f64> = cps.iter().map(|c| c.location[0]).collect();
        let v_min = cps.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        let nf = n_spins as f64;
        let t = opts.tail_exponent;
        let lo = locs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = locs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let reach = |start: f64, dir: f64| {
            let mut d = 1e-3;
            while nf * (profile.v(start + dir * d) - v_min) < t {
                d *= 1.25;
            }
            d * opts.cutoff_scale
        };
        let support = if profile.is_radial() {
            (0.0, hi + reach(hi, 1.0))
        } else {
            (lo - reach(lo, -1.0), hi + reach(hi, 1.0))
        };
        let edges = panel_edges(&profile, nf, support, &locs);
        // N·V is only known to about ε·N·|V|; ask no more of the quadrature.
        let vmax = profile.v(support.0).abs().max(profile.v(support.1).abs()).max(v_min.abs());
        let mut opts = opts;
        opts.quad.noise = opts.quad.noise.max(8.0 * f64::EPSILON * nf * vmax);
        let mut m = RenormalizedMeasure {
            params: params.clone(),
            n_spins,
            profile,
            v_min,
            support,
            log_normalizer: 0.0,
            edges,
            log_z_shifted: 0.0,
            opts,
        };
        let z = integrate(&|x| m.shifted_density(x), &m.edges, m.opts.quad)?;
        m.log_z_shifted = z.ln();
        m.log_normalizer = m.log_z_shifted - nf * v_min;
        Ok(m)
    }

    /// `e^{−N(V − V_min)} r^{n−1}`; at most `max(1, R^{n−1})`.
    fn shifted_density(&self, x: f64) -> f64 {
        self.log_shifted_density(x).exp()
    }

    fn log_shifted_density(&self, x: f64) -> f64 {
        let p = self.profile.weight_power();
        let w = if p == 0 { 0.0 } else if x <= 0.0 { f64::NEG_INFINITY } else { p as f64 * x.ln() };
        -(self.n_spins as f64) * (self.profile.v(x) - self.v_min) + w
    }

    /// Log of the normalized density at x.
    pub fn log_density(&self, x: f64) -> f64 {
        self.log_shifted_density(x) - self.log_z_shifted
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// `E_{ν_N}(g)`.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let v = integrate(&|x| g(x) * self.shifted_density(x), &self.edges, self.opts.quad)?;
        Ok(v / self.log_z_shifted.exp())
    }

    /// `Var_{ν_N}(g)`, computed about the mean to avoid cancellation.
    pub fn variance(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let m = self.expect(&g)?;
        self.expect(|x| (g(x) - m).powi(2))
    }

    /// Cumulative log-mass on the panel grid, for tail and median queries.
    pub fn log_cdf(&self) -> Result<LogCumulative<impl Fn(f64) -> f64 + '_>> {
        LogCumulative::new(move |x| self.log_shifted_density(x) - self.log_z_shifted, self.edges.clone(), self.opts.quad)
    }

    /// A point m with `|ν_N((−∞, m]) − 1/2| ≤ 1e−9`, by bisection that stops at
    /// the first qualifying midpoint (so a symmetric measure splits at its
    /// centre even when the mass between the wells is negligible).
    pub fn median(&self) -> Result<f64> {
        let cdf = self.log_cdf()?;
        let (mut lo, mut hi) = self.support;
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let f = cdf.log_upto(mid)?.exp();
            if (f - 0.5).abs() <= 1e-9 {
                break;
            }
            if f < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(mid)
    }
}

// Panels no wider than the local scale on which N·V changes by O(1).
fn panel_edges(profile: &Profile, nf: f64, support: (f64, f64), locs: &[f64]) -> Vec<f64> {
    let quarter = nf.powf(0.25);
    let scale = |x: f64| {
        2.0 * (nf * profile.dv(x).abs() + (nf * profile.d2v(x).abs()).sqrt() + quarter)
    };
    let edges = adaptive_edges(support.0, support.1, scale, 0.25);
    with_breakpoints(edges, locs)
}

/// `E_{ν_N}(g)` for a scalar g of φ (line) or r (radial).
pub fn expect_nu(measure: &RenormalizedMeasure, g: impl Fn(f64) -> f64) -> Result<f64> {
    measure.expect(g)
}

/// Second-order Laplace expansion of `E_{ν_N}(g)` with its separate terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceExpansion {
    pub value: f64,
    pub phi_min: f64,
    /// `g(φ_min)`.
    pub leading: f64,
    /// `g''/(2N V'')`.
    pub curvature_term: f64,
    /// `−V''' g'/(2N V''²)`.
    pub skew_term: f64,
}

fn unique_line_minimum(params: &ModelParams) -> Result<(Profile, f64)> {
    let profile = Profile::for_params(params)?;
    if profile.is_radial() {
        return Err(Error::Regime("Laplace expansion is implemented on the line (n = 1)".into()));
    }
    let minima = global_minima(params);
    if minima.len() != 1 {
        return Err(Error::Regime(format!("{} global minima; expansion needs exactly one", minima.len())));
    }
    let x = minima[0].location[0];
    if !(profile.d2v(x) > 1e-8) {
        return Err(Error::Regime("global minimum is degenerate (V'' = 0)".into()));
    }
    Ok((profile, x))
}

const FD_STEP: f64 = 1e-4;

fn fd1(g: &impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = FD_STEP;
    (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h)
}

fn fd2(g: &impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = FD_STEP;
    (-g(x + 2.0 * h) + 16.0 * g(x + h) - 30.0 * g(x) + 16.0 * g(x - h) - g(x - 2.0 * h)) / (12.0 * h * h)
}

/// `E_{ν_N}(g) = g + g''/(2NV'') − V'''g'/(2NV''²) + O(N⁻²)` at the unique
/// global minimum; derivatives of g by fourth-order central differences.
pub fn laplace_expectation(params: &ModelParams, n_spins: usize, g: impl Fn(f64) -> f64) -> Result<LaplaceExpansion> {
    let (p, x) = unique_line_minimum(params)?;
    let nf = n_spins as f64;
    let (v2, v3) = (p.d2v(x), p.d3v(x));
    let leading = g(x);
    let curvature_term = fd2(&g, x) / (2.0 * nf * v2);
    let skew_term = -v3 * fd1(&g, x) / (2.0 * nf * v2 * v2);
    Ok(LaplaceExpansion { value: leading + curvature_term + skew_term, phi_min: x, leading, curvature_term, skew_term })
}

/// Leading term `g'(φ_min)²/(N V''(φ_min))` of `Var_{ν_N}(g)`.
pub fn laplace_variance(params: &ModelParams, n_spins: usize, g: impl Fn(f64) -> f64) -> Result<f64> {
    let (p, x) = unique_line_minimum(params)?;
    Ok(fd1(&g, x).powi(2) / (n_spins as f64 * p.d2v(x)))
}

/// `E_{μ_φ}(σ(x)) = R_n(|ζ|) ζ/|ζ|` with ζ = βφ + h; `tanh(βφ + h)` for n = 1.
pub fn fluct_mean_spin(params: &ModelParams, phi: &[f64]) -> Vec<f64> {
    assert_eq!(phi.len(), params.n, "phi must have n components");
    let zeta: Vec<f64> = phi.iter().zip(&params.h).map(|(p, h)| params.beta * p + h).collect();
    if params.n == 1 {
        return vec![zeta[0].tanh()];
    }
    let z = zeta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if z == 0.0 {
        return vec![0.0; params.n];
    }
    let r = sphere_mean_ratio(params.n, z);
    zeta.iter().map(|q| r * q / z).collect()
}

/// Upper bound on the spectral gap from the normalized magnetization:
/// `β⁻¹ D / (N E_{ν_N}(R_n(β|φ|)²))` with D = 4 for n = 1 and D = 1 for n ≥ 2.
pub fn magnetization_gap_bound(params: &ModelParams, n_spins: usize) -> Result<f64> {
    magnetization_gap_bound_with(params, n_spins, MeasureOptions::default())
}

pub fn magnetization_gap_bound_with(params: &ModelParams, n_spins: usize, opts: MeasureOptions) -> Result<f64> {
    if params.has_field() {
        return Err(Error::Regime("magnetization bound is derived at zero field".into()));
    }
    let m = RenormalizedMeasure::with_options(params, n_spins, opts)?;
    let (b, n) = (params.beta, params.n);
    let second = m.expect(|x| sphere_mean_ratio(n, b * x).powi(2))?;
    let d = if n == 1 { 4.0 } else { 1.0 };
    Ok(d / (b * n_spins as f64 * second))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_constants() {
        for (n, b, h) in [(1usize, 2.0, 0.3), (1, 1.0, 0.0), (2, 3.0, 0.0), (3, 5.0, 0.0)] {
            let p = ModelParams::new(n, b, vec![h]).unwrap();
            let m = RenormalizedMeasure::new(&p, 400).unwrap();
            assert!((m.expect(|_| 1.0).unwrap() - 1.0).abs() < 1e-12);
            assert!((m.expect(|_| 3.5).unwrap() - 3.5).abs() < 1e-12);
        }
    }

    #[test]
    fn normalizer_of_gaussian_limit() {
        // β < 1, h = 0: ∫ e^{−NV} ≈ e^{−N V(0)} √(2π/(N V''(0))) for large N.
        let p = ModelParams::ising(0.5, 0.0).unwrap();
        let n = 100_000;
        let m = RenormalizedMeasure::new(&p, n).unwrap();
        let v2 = 0.5 * (1.0 - 0.5);
        let approx = -(n as f64) * 0.25 + (2.0 * std::f64::consts::PI / (n as f64 * v2)).ln() * 0.5;
        assert!((m.log_normalizer - approx).abs() < 1e-4);
    }

    #[test]
    fn rejects_field_for_multicomponent() {
        let p = ModelParams::new(2, 3.0, vec![0.5]).unwrap();
        assert!(matches!(RenormalizedMeasure::new(&p, 100), Err(Error::Regime(_))));
    }

    #[test]
    fn median_of_symmetric_measure_is_zero() {
        let p = ModelParams::ising(2.0, 0.0).unwrap();
        let m = RenormalizedMeasure::new(&p, 200).unwrap();
        assert!(m.median().unwrap().abs() < 1e-9);
        let p = ModelParams::ising(2.0, 0.3).unwrap();
        let m = RenormalizedMeasure::new(&p, 100).unwrap();
        let x = m.median().unwrap();
        let f = m.log_cdf().unwrap().log_upto(x).unwrap().exp();
        assert!((f - 0.5).abs() < 1e-8);
    }

    #[test]
    fn laplace_constant_and_regimes() {
        let p = ModelParams::ising(2.0, 0.8).unwrap();
        let e = laplace_expectation(&p, 100, |_| 2.5).unwrap();
        assert!((e.value - 2.5).abs() < 1e-9);
        assert!(laplace_variance(&p, 100, |_| 2.5).unwrap().abs() < 1e-12);
        let crit = ModelParams::ising(1.0, 0.0).unwrap();
        assert!(matches!(laplace_expectation(&crit, 100, |x| x), Err(Error::Regime(_))));
        let sym = ModelParams::ising(2.0, 0.0).unwrap();
        assert!(matches!(laplace_expectation(&sym, 100, |x| x), Err(Error::Regime(_))));
    }

    #[test]
    fn mean_spin_limits() {
        let p = ModelParams::ising(1.7, 0.0).unwrap();
        assert_eq!(fluct_mean_spin(&p, &[0.0]), vec![0.0]);
        let p = ModelParams::new(2, 10.0, vec![0.0]).unwrap();
        assert_eq!(fluct_mean_spin(&p, &[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn bound_needs_zero_field() {
        let p = ModelParams::ising(1.0, 0.1).unwrap();
        assert!(matches!(magnetization_gap_bound(&p, 100), Err(Error::Regime(_))));
    }
}
