//! Gap-versus-N series, least-squares scaling fits and the table of expected
//! behaviour for every (n, β, h).

use crate::error::{Error, Result};
use crate::ising_chain::GapMethod;
use crate::potential::{critical_field, well_depth, ModelParams, Temperature};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    /// `β = n`, `h = 0`.
    Critical,
    /// `n = 1`, `β > 1`, `|h| < h_c`.
    SupercriticalWeakH,
    /// `n = 1`, `β > 1`, `|h| = h_c`.
    CriticalH,
    /// `n = 1`, `|h| > h_c` (including `β = 1`, where `h_c = 0`).
    StrongH,
    /// `n ≥ 2`, `β > n`, `h = 0`.
    MulticomponentH0,
    /// `n ≥ 2`, `β ≥ n`, `h ≠ 0`.
    MulticomponentH,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::SupercriticalWeakH => "supercritical_weak_h",
            Regime::CriticalH => "critical_h",
            Regime::StrongH => "strong_h",
            Regime::MulticomponentH0 => "multicomponent_h0",
            Regime::MulticomponentH => "multicomponent_h",
        }
    }
}

/// Relative tolerance for deciding `|h| = h_c`.
const FIELD_MATCH: f64 = 1e-9;

pub fn classify(params: &ModelParams) -> Result<Regime> {
    let n = params.n;
    match params.temperature() {
        Temperature::Subcritical => Ok(Regime::Subcritical),
        Temperature::Critical if !params.has_field() => Ok(Regime::Critical),
        _ if n >= 2 => Ok(if params.has_field() { Regime::MulticomponentH } else { Regime::MulticomponentH0 }),
        _ => {
            let hc = critical_field(params.beta)?;
            let h = params.h[0].abs();
            if (h - hc).abs() <= FIELD_MATCH * (1.0 + hc) {
                Ok(Regime::CriticalH)
            } else if h < hc {
                Ok(Regime::SupercriticalWeakH)
            } else {
                Ok(Regime::StrongH)
            }
        }
    }
}

/// What the gap of the full measure does as N grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Expected {
    /// `gap = e^{−N·rate(1+o(1))}`.
    ExponentialRate { rate: f64 },
    /// `gap = Θ(N^{exponent})`.
    PowerLaw { exponent: f64 },
    /// Gap no smaller than `N^{full_exponent}`, checked through the growth
    /// of the renormalized operator's gap, exponent at least `renormalized`.
    PowerLawBound { full_exponent: f64, renormalized: f64 },
    Constant,
}

/// The total dispatch table.
pub fn expected(params: &ModelParams) -> Result<(Regime, Expected)> {
    let r = classify(params)?;
    let e = match r {
        Regime::Subcritical | Regime::StrongH | Regime::MulticomponentH => Expected::Constant,
        Regime::Critical => Expected::PowerLaw { exponent: -0.5 },
        Regime::MulticomponentH0 => Expected::PowerLaw { exponent: -1.0 },
        Regime::SupercriticalWeakH => Expected::ExponentialRate { rate: well_depth(params)? },
        Regime::CriticalH => Expected::PowerLawBound { full_exponent: -1.0 / 3.0, renormalized: 2.0 / 3.0 },
    };
    Ok((r, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub n_spins: usize,
    /// Log of the gap, which may sit far below `f64::MIN_POSITIVE`.
    pub log_gap: f64,
    pub method: GapMethod,
}

impl GapPoint {
    pub fn gap(&self) -> f64 {
        self.log_gap.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSeries {
    pub params: ModelParams,
    pub points: Vec<GapPoint>,
    pub regime: Regime,
}

impl GapSeries {
    pub fn new(params: &ModelParams, points: Vec<GapPoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].n_spins <= w[0].n_spins) {
            return Err(Error::Invalid("N must be strictly increasing".into()));
        }
        if points.iter().any(|p| p.log_gap.is_nan() || p.log_gap == f64::INFINITY || p.log_gap == f64::NEG_INFINITY) {
            return Err(Error::Invalid("gaps must be positive and finite".into()));
        }
        Ok(GapSeries { params: params.clone(), points, regime: classify(params)? })
    }

    /// Build from plain gaps.
    pub fn from_gaps(params: &ModelParams, method: GapMethod, data: &[(usize, f64)]) -> Result<Self> {
        if data.iter().any(|&(_, g)| !(g > 0.0)) {
            return Err(Error::Invalid("gaps must be positive".into()));
        }
        Self::new(params, data.iter().map(|&(n, g)| GapPoint { n_spins: n, log_gap: g.ln(), method }).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    PowerLaw,
    Exponential,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    /// Power-law exponent, or the decay rate `−d log gap / dN`.
    pub value: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Fits need at least this many points and a factor this large in N.
pub const MIN_POINTS: usize = 4;
pub const MIN_SPAN: f64 = 10.0;

/// The points a fit uses: all but the smallest quarter of N.
fn fit_window(series: &GapSeries) -> Result<&[GapPoint]> {
    let pts = &series.points;
    if pts.len() < MIN_POINTS {
        return Err(Error::InsufficientSpan(format!("{} points, need {MIN_POINTS}", pts.len())));
    }
    let span = pts[pts.len() - 1].n_spins as f64 / pts[0].n_spins as f64;
    if span < MIN_SPAN {
        return Err(Error::InsufficientSpan(format!("N spans a factor {span:.2}, need {MIN_SPAN}")));
    }
    Ok(&pts[pts.len() / 4..])
}

/// Ordinary least squares `y = a + b x`: (b, stderr of b, r²).
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = sxy / sxx;
    let sse: f64 = x.iter().zip(y).map(|(a, c)| (c - my - b * (a - mx)).powi(2)).sum();
    let stderr = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    let r2 = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    (b, stderr, r2)
}

/// Slope of `log gap` against `log N`.
pub fn fit_power_law(series: &GapSeries) -> Result<FitResult> {
    let w = fit_window(series)?;
    let x: Vec<f64> = w.iter().map(|p| (p.n_spins as f64).ln()).collect();
    let y: Vec<f64> = w.iter().map(|p| p.log_gap).collect();
    let (b, stderr, r_squared) = least_squares(&x, &y);
    Ok(FitResult { kind: FitKind::PowerLaw, value: b, stderr, r_squared, points_used: w.len() })
}

/// `−` slope of `log gap` against N.
pub fn fit_exponential_rate(series: &GapSeries) -> Result<FitResult> {
    let w = fit_window(series)?;
    let x: Vec<f64> = w.iter().map(|p| p.n_spins as f64).collect();
    let y: Vec<f64> = w.iter().map(|p| p.log_gap).collect();
    let (b, stderr, r_squared) = least_squares(&x, &y);
    Ok(FitResult { kind: FitKind::Exponential, value: -b, stderr, r_squared, points_used: w.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantFit {
    pub fit: FitResult,
    pub max_min_ratio: f64,
    pub pass: bool,
}

/// Boundedness verdict: all gaps within `max_ratio` of each other and a
/// power-law exponent inside `±max_exponent`. Too few points fail instead of
/// erroring.
pub fn fit_constant_with(series: &GapSeries, max_ratio: f64, max_exponent: f64) -> ConstantFit {
    let lg: Vec<f64> = series.points.iter().map(|p| p.log_gap).collect();
    let hi = lg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = lg.iter().copied().fold(f64::INFINITY, f64::min);
    let max_min_ratio = (hi - lo).exp();
    match fit_power_law(series) {
        Ok(mut fit) => {
            fit.kind = FitKind::Constant;
            let pass = max_min_ratio <= max_ratio && fit.value.abs() <= max_exponent;
            ConstantFit { fit, max_min_ratio, pass }
        }
        Err(_) => ConstantFit {
            fit: FitResult { kind: FitKind::Constant, value: f64::NAN, stderr: f64::NAN, r_squared: 0.0, points_used: 0 },
            max_min_ratio,
            pass: false,
        },
    }
}

pub fn fit_constant(series: &GapSeries) -> ConstantFit {
    let t = Tolerances::default();
    fit_constant_with(series, t.constant_ratio, t.constant_exponent)
}

/// Pass/fail windows for the scaling verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute window on power-law exponents.
    pub exponent_abs: f64,
    /// Relative window on exponential rates.
    pub rate_rel: f64,
    /// Slack on one-sided exponent bounds.
    pub one_sided: f64,
    pub constant_ratio: f64,
    pub constant_exponent: f64,
    /// Relative slack on the Muckenhoupt sandwich.
    pub sandwich: f64,
    /// Bound on `|E₀|/λ` for null eigenvalues of the renormalized operator.
    pub zero_mode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exponent_abs: 0.05,
            rate_rel: 0.10,
            one_sided: 0.05,
            constant_ratio: 3.0,
            constant_exponent: 0.1,
            sandwich: 0.05,
            zero_mode: 1e-6,
        }
    }
}

/// One line of the scaling report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub expected: Expected,
    pub fitted: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Fit a series the way its regime dictates and judge it. For the critical
/// field the series must hold gaps of the renormalized operator.
pub fn evaluate(series: &GapSeries, tol: &Tolerances) -> Result<RegimeReport> {
    let (regime, expected) = expected(&series.params)?;
    let (fitted, stderr, pass) = match expected {
        Expected::ExponentialRate { rate } => {
            let f = fit_exponential_rate(series)?;
            (f.value, f.stderr, (f.value / rate - 1.0).abs() <= tol.rate_rel)
        }
        Expected::PowerLaw { exponent } => {
            let f = fit_power_law(series)?;
            (f.value, f.stderr, (f.value - exponent).abs() <= tol.exponent_abs)
        }
        Expected::PowerLawBound { renormalized, .. } => {
            let f = fit_power_law(series)?;
            (f.value, f.stderr, f.value >= renormalized - tol.one_sided)
        }
        Expected::Constant => {
            let c = fit_constant_with(series, tol.constant_ratio, tol.constant_exponent);
            (c.fit.value, c.fit.stderr, c.pass)
        }
    };
    Ok(RegimeReport { regime, expected, fitted, stderr, pass })
}
