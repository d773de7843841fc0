//! The renormalized single-spin potential
//! `V_n(φ) = (β/2)(1 + |φ|²) − log E_σ[e^{⟨βφ+h, σ⟩}]`, its derivatives,
//! critical points, the critical field and the shallow-well depth.

use crate::error::{Error, Result};
use crate::specialfn::{
    log_sphere_mgf, sphere_mean_ratio, sphere_mean_ratio_deriv, sphere_mean_ratio_over_z,
};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// One O(n) model instance: component count, inverse temperature, field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub beta: f64,
    pub h: Vec<f64>,
}

/// Position of β relative to the mean-field critical temperature β = n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperature {
    Subcritical,
    Critical,
    Supercritical,
}

impl ModelParams {
    /// `h` may have length `n`, or length 1 for a field of that strength
    /// along the first axis.
    pub fn new(n: usize, beta: f64, h: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Invalid(format!("beta must be positive and finite, got {beta}")));
        }
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("field must be finite".into()));
        }
        let h = match h.len() {
            0 => vec![0.0; n],
            1 if n > 1 => {
                let mut v = vec![0.0; n];
                v[0] = h[0];
                v
            }
            l if l == n => h,
            l => return Err(Error::Invalid(format!("field has {l} components, model has n = {n}"))),
        };
        Ok(ModelParams { n, beta, h })
    }

    /// The Ising case `n = 1`.
    pub fn ising(beta: f64, h: f64) -> Result<Self> {
        Self::new(1, beta, vec![h])
    }

    pub fn h_norm(&self) -> f64 {
        self.h.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Signed field for `n = 1`; the field strength otherwise.
    pub fn h_scalar(&self) -> f64 {
        if self.n == 1 {
            self.h[0]
        } else {
            self.h_norm()
        }
    }

    pub fn has_field(&self) -> bool {
        self.h_norm() > 0.0
    }

    pub fn temperature(&self) -> Temperature {
        let nf = self.n as f64;
        if (self.beta - nf).abs() <= 1e-12 * nf {
            Temperature::Critical
        } else if self.beta < nf {
            Temperature::Subcritical
        } else {
            Temperature::Supercritical
        }
    }

    fn zeta(&self, phi: &[f64]) -> Vec<f64> {
        phi.iter().zip(&self.h).map(|(p, h)| self.beta * p + h).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `V_n(φ)`.
pub fn eval_v(params: &ModelParams, phi: &[f64]) -> f64 {
    assert_eq!(phi.len(), params.n, "phi must have n components");
    let z = norm(&params.zeta(phi));
    0.5 * params.beta * (1.0 + phi.iter().map(|x| x * x).sum::<f64>()) - log_sphere_mgf(params.n, z)
}

/// `∇V_n(φ) = β(φ − R_n(|ζ|) ζ/|ζ|)` with ζ = βφ + h; the ζ → 0 limit is `βφ`.
pub fn grad_v(params: &ModelParams, phi: &[f64]) -> Vec<f64> {
    assert_eq!(phi.len(), params.n, "phi must have n components");
    let zeta = params.zeta(phi);
    let z = norm(&zeta);
    let s = sphere_mean_ratio_over_z(params.n, z);
    phi.iter().zip(&zeta).map(|(p, q)| params.beta * (p - s * q)).collect()
}

/// `D²V_n(φ) = β I − β² [R' ζ̂ζ̂ᵀ + (R/|ζ|)(I − ζ̂ζ̂ᵀ)]`; at ζ = 0 both
/// coefficients tend to 1/n, giving `β(1 − β/n) I`.
pub fn hess_v(params: &ModelParams, phi: &[f64]) -> DMatrix<f64> {
    assert_eq!(phi.len(), params.n, "phi must have n components");
    let n = params.n;
    let b = params.beta;
    let zeta = params.zeta(phi);
    let z = norm(&zeta);
    let radial = sphere_mean_ratio_deriv(n, z);
    let tangential = sphere_mean_ratio_over_z(n, z);
    let mut m = DMatrix::<f64>::identity(n, n) * (b - b * b * tangential);
    if z > 0.0 {
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] -= b * b * (radial - tangential) * zeta[i] * zeta[j] / (z * z);
            }
        }
    }
    m
}

/// Hessian in the ζ-parametrization, `g'(|ζ|) ζ̂ζ̂ᵀ + g(|ζ|)(I/|ζ| − ζζᵀ/|ζ|³)`
/// with `g(r) = r/β − R_n(r)`. Equals `hess_v / β²`; singular at ζ = 0.
pub fn hessian_zeta_form(params: &ModelParams, zeta: &[f64]) -> Result<DMatrix<f64>> {
    let n = params.n;
    let z = norm(zeta);
    if z == 0.0 {
        return Err(Error::Domain("zeta-form Hessian is singular at zeta = 0".into()));
    }
    let g = z / params.beta - sphere_mean_ratio(n, z);
    let gp = 1.0 / params.beta - sphere_mean_ratio_deriv(n, z);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let outer = zeta[i] * zeta[j] / (z * z);
            let id = if i == j { 1.0 } else { 0.0 };
            m[(i, j)] = gp * outer + g * (id - outer) / z;
        }
    }
    Ok(m)
}

/// A one-variable restriction of `V_n` that every 1D solver works with: the
/// Ising line, or the radial profile for `n ≥ 2` at zero field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Line { beta: f64, h: f64 },
    Radial { n: usize, beta: f64 },
}

impl Profile {
    pub fn for_params(params: &ModelParams) -> Result<Self> {
        if params.n == 1 {
            Ok(Profile::Line { beta: params.beta, h: params.h[0] })
        } else if !params.has_field() {
            Ok(Profile::Radial { n: params.n, beta: params.beta })
        } else {
            Err(Error::Regime(format!(
                "n = {} with nonzero field has no one-dimensional reduction here",
                params.n
            )))
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Profile::Radial { .. })
    }

    /// Exponent of the radial volume weight `r^{n−1}`.
    pub fn weight_power(&self) -> usize {
        match *self {
            Profile::Line { .. } => 0,
            Profile::Radial { n, .. } => n - 1,
        }
    }

    pub fn v(&self, x: f64) -> f64 {
        match *self {
            Profile::Line { beta, h } => v1(beta, h, x),
            Profile::Radial { n, beta } => 0.5 * beta * (1.0 + x * x) - log_sphere_mgf(n, beta * x),
        }
    }

    pub fn dv(&self, x: f64) -> f64 {
        match *self {
            Profile::Line { beta, h } => v1_d1(beta, h, x),
            Profile::Radial { n, beta } => beta * x * (1.0 - beta * sphere_mean_ratio_over_z(n, beta * x)),
        }
    }

    pub fn d2v(&self, x: f64) -> f64 {
        match *self {
            Profile::Line { beta, h } => v1_d2(beta, h, x),
            Profile::Radial { n, beta } => beta - beta * beta * sphere_mean_ratio_deriv(n, beta * x),
        }
    }

    /// `V'''`; analytic on the line, a central difference of `V''` radially.
    pub fn d3v(&self, x: f64) -> f64 {
        match *self {
            Profile::Line { beta, h } => v1_d3(beta, h, x),
            Profile::Radial { .. } => {
                let s = 1e-4 * (1.0 + x.abs());
                (self.d2v(x + s) - self.d2v(x - s)) / (2.0 * s)
            }
        }
    }

    /// The Laplacian of V: `V''` on the line, `V'' + (n−1)V'/r` radially
    /// (with the `r → 0` limit `n V''(0)`).
    pub fn laplacian(&self, x: f64) -> f64 {
        match *self {
            Profile::Line { .. } => self.d2v(x),
            Profile::Radial { n, beta } => {
                let tang = beta * (1.0 - beta * sphere_mean_ratio_over_z(n, beta * x));
                self.d2v(x) + (n as f64 - 1.0) * tang
            }
        }
    }
}

/// `V₁(φ) = (β/2)(1 + φ²) − log cosh(βφ + h)`.
pub fn v1(beta: f64, h: f64, x: f64) -> f64 {
    0.5 * beta * (1.0 + x * x) - crate::specialfn::log_cosh(beta * x + h)
}

/// `V₁'(φ) = β(φ − tanh(βφ + h))`.
pub fn v1_d1(beta: f64, h: f64, x: f64) -> f64 {
    beta * (x - (beta * x + h).tanh())
}

/// `V₁''(φ) = β(1 − β sech²(βφ + h))`.
pub fn v1_d2(beta: f64, h: f64, x: f64) -> f64 {
    let s = sech2(beta * x + h);
    beta * (1.0 - beta * s)
}

/// `V₁'''(φ) = 2β³ sech²(βφ + h) tanh(βφ + h)`.
pub fn v1_d3(beta: f64, h: f64, x: f64) -> f64 {
    let z = beta * x + h;
    2.0 * beta.powi(3) * sech2(z) * z.tanh()
}

fn sech2(z: f64) -> f64 {
    let t = z.tanh();
    1.0 - t * t
}

/// Kind of a critical point, read off the Hessian spectrum. `Inflection`
/// covers every degenerate case (some eigenvalue within 1e−8 of zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Saddle,
    Inflection,
}

/// A zero of ∇V. For `n = 1` the location is the scalar γ; for `n ≥ 2` at zero
/// field it is a radius (and the Hessian is the radial second derivative);
/// otherwise it is a point of R^n on the line through h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub kind: CriticalKind,
    pub value: f64,
    pub hess_eigs: Vec<f64>,
}

const DEGENERATE: f64 = 1e-8;

fn classify(eigs: &[f64]) -> CriticalKind {
    if eigs.iter().any(|e| e.abs() < DEGENERATE) {
        CriticalKind::Inflection
    } else if eigs.iter().all(|&e| e > 0.0) {
        CriticalKind::Minimum
    } else if eigs.iter().all(|&e| e < 0.0) {
        CriticalKind::Maximum
    } else {
        CriticalKind::Saddle
    }
}

/// Roots of a scalar residual on `[a, b]`: sign changes on an `n_scan` grid
/// refined by bisection, plus tangential roots located as extrema of `f`
/// (zeros of `df`) where `|f|` vanishes to `tangency_tol`.
pub(crate) fn scalar_roots(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    n_scan: usize,
    tangency_tol: f64,
) -> Vec<f64> {
    let xs: Vec<f64> = (0..=n_scan).map(|i| a + (b - a) * i as f64 / n_scan as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..n_scan {
        if fs[i] == 0.0 {
            roots.push(xs[i]);
        } else if fs[i] * fs[i + 1] < 0.0 {
            roots.push(bisect(&f, xs[i], xs[i + 1]));
        }
    }
    if fs[n_scan] == 0.0 {
        roots.push(xs[n_scan]);
    }
    // Tangencies hide between grid points without a sign change.
    for i in 1..n_scan {
        let (l, c, r) = (fs[i - 1].abs(), fs[i].abs(), fs[i + 1].abs());
        if c <= l && c <= r && fs[i - 1] * fs[i + 1] > 0.0 {
            let (lo, hi) = (xs[i - 1], xs[i + 1]);
            if df(lo) * df(hi) < 0.0 {
                let x = bisect(&df, lo, hi);
                if f(x).abs() <= tangency_tol && !roots.iter().any(|&r| (r - x).abs() < 1e-6) {
                    roots.push(x);
                }
            }
        }
    }
    roots.sort_by(|p, q| p.partial_cmp(q).unwrap());
    // Two sign changes straddling a near-tangency collapse onto the extremum.
    let mut merged: Vec<f64> = Vec::new();
    for x in roots {
        if let Some(&last) = merged.last() {
            if x - last < 1e-6 {
                let m = if df(last) * df(x) < 0.0 { bisect(&df, last, x) } else { 0.5 * (last + x) };
                *merged.last_mut().unwrap() = m;
                continue;
            }
        }
        merged.push(x);
    }
    merged
}

pub(crate) fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-15 {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const SCAN_POINTS: usize = 10_000;

/// All critical points of `V_n`, sorted by location (first coordinate).
pub fn critical_points(params: &ModelParams) -> Vec<CriticalPoint> {
    let b = params.beta;
    if params.n == 1 {
        let h = params.h[0];
        let roots = scalar_roots(
            |x| x - (b * x + h).tanh(),
            |x| 1.0 - b * sech2(b * x + h),
            -2.0,
            2.0,
            SCAN_POINTS,
            1e-12,
        );
        return roots
            .into_iter()
            .map(|x| {
                let e = v1_d2(b, h, x);
                CriticalPoint { location: vec![x], kind: classify(&[e]), value: v1(b, h, x), hess_eigs: vec![e] }
            })
            .collect();
    }
    let n = params.n;
    if !params.has_field() {
        let prof = Profile::Radial { n, beta: b };
        let mut radii = vec![0.0];
        // f(r)/r = 1 − β R_n(βr)/(βr), so a positive root is a sign change of this.
        let q = |r: f64| 1.0 - b * sphere_mean_ratio_over_z(n, b * r);
        let dq = |r: f64| {
            let s = 1e-7 * (1.0 + r);
            (q(r + s) - q(r - s)) / (2.0 * s)
        };
        let lo = 2.0 / SCAN_POINTS as f64;
        radii.extend(scalar_roots(q, dq, lo, 2.0, SCAN_POINTS, 1e-12));
        return radii
            .into_iter()
            .map(|r| {
                let e = prof.d2v(r);
                CriticalPoint { location: vec![r], kind: classify(&[e]), value: prof.v(r), hess_eigs: vec![e] }
            })
            .collect();
    }
    // Nonzero field: ζ = s·ĥ, φ = (s − |h|)/β · ĥ, and ∇V = 0 reads
    // s − |h| − β R_n(|s|) sgn(s) = 0.
    let hn = params.h_norm();
    let dir: Vec<f64> = params.h.iter().map(|x| x / hn).collect();
    let span = b + hn + 1.0;
    let f = |s: f64| s - hn - b * sphere_mean_ratio(n, s.abs()) * s.signum();
    let df = |s: f64| 1.0 - b * sphere_mean_ratio_deriv(n, s.abs());
    let roots = scalar_roots(f, df, -span, span, SCAN_POINTS, 1e-12);
    roots
        .into_iter()
        .map(|s| {
            let t = (s - hn) / b;
            let loc: Vec<f64> = dir.iter().map(|d| t * d).collect();
            let hess = hess_v(params, &loc);
            let mut eigs: Vec<f64> = SymmetricEigen::new(hess).eigenvalues.iter().copied().collect();
            eigs.sort_by(|p, q| p.partial_cmp(q).unwrap());
            CriticalPoint { kind: classify(&eigs), value: eval_v(params, &loc), location: loc, hess_eigs: eigs }
        })
        .collect()
}

/// Global minimizers of `V_n` (ties within 1e−12 are all returned).
pub fn global_minima(params: &ModelParams) -> Vec<CriticalPoint> {
    let cps = critical_points(params);
    let best = cps
        .iter()
        .filter(|c| c.kind != CriticalKind::Maximum && c.kind != CriticalKind::Saddle)
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);
    cps.into_iter()
        .filter(|c| {
            c.kind != CriticalKind::Maximum && c.kind != CriticalKind::Saddle && c.value <= best + 1e-12
        })
        .collect()
}

/// Ising critical field `h_c(β) = √(β(β−1)) − arccosh(√β)`.
pub fn critical_field(beta: f64) -> Result<f64> {
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("critical field needs beta >= 1, got {beta}")));
    }
    Ok((beta * (beta - 1.0)).sqrt() - beta.sqrt().acosh())
}

/// Depth of the shallower Ising well, `V₁(γ₂) − V₁(γ₁)` where γ₁ < γ₂ < γ₃
/// are the three roots of `x = tanh(βx + h)`.
pub fn well_depth(params: &ModelParams) -> Result<f64> {
    if params.n != 1 {
        return Err(Error::Regime("well depth is defined for n = 1".into()));
    }
    let (b, h) = (params.beta, params.h[0]);
    if !(b > 1.0) {
        return Err(Error::Regime(format!("no double well at beta = {b} <= 1")));
    }
    let hc = critical_field(b)?;
    if !(h >= 0.0 && h < hc) {
        return Err(Error::Regime(format!("field {h} outside [0, h_c = {hc})")));
    }
    let cps = critical_points(params);
    if cps.len() != 3 {
        return Err(Error::Regime(format!("expected three critical points, found {}", cps.len())));
    }
    let (g1, g2) = (cps[0].location[0], cps[1].location[0]);
    Ok(v1(b, h, g2) - v1(b, h, g1))
}

/// The three roots γ₁ < γ₂ < γ₃ in the double-well window.
pub fn ising_roots(params: &ModelParams) -> Result<[f64; 3]> {
    well_depth(params)?;
    let cps = critical_points(params);
    Ok([cps[0].location[0], cps[1].location[0], cps[2].location[0]])
}
