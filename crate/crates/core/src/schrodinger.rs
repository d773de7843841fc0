//! Spectra of the Schrödinger operators around the renormalized potential:
//! the exact renormalized operator `Δ_ren = −Δ + (N²/4)|∇V|² − (N/2)ΔV`, and
//! the λ-independent polynomial operators it localizes to.
//!
//! Three solvers, kept independent on purpose:
//! * oscillator basis for polynomial potentials on the line,
//! * finite volumes on a uniform grid for polynomial potentials (line or
//!   radial half-line), Richardson-extrapolated over grid doublings,
//! * the renormalized operator in its generator form
//!   `∫|∇g|² e^{−NV} / ∫ g² e^{−NV}` (unitarily equivalent to `Δ_ren`), whose
//!   gap is computed in log form by birth-death inverse iteration.

use crate::error::{Error, Result};
use crate::linalg::{birth_death_log_gap, SymTridiag};
use crate::oscillator::{kinetic_matrix, position_power_matrix, OscillatorBasis};
use crate::potential::{critical_field, critical_points, global_minima, CriticalKind, ModelParams, Profile, Temperature};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    FullLine,
    /// `L²((0,∞), r^{n−1} dr)` in angular sector ℓ.
    HalfLine { n: usize, l: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `Σ c_j x^j`, `j ≤ 8`.
    Polynomial(Vec<f64>),
    Renormalized { params: ModelParams, n_spins: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub domain: Domain,
    pub potential: PotentialSpec,
    /// λ = N/2 for renormalized operators, 1 for λ-free polynomial ones.
    pub scale: f64,
}

impl OperatorSpec {
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        let s = OperatorSpec { domain: Domain::FullLine, potential: PotentialSpec::Polynomial(coeffs), scale: 1.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn radial_polynomial(n: usize, l: usize, coeffs: Vec<f64>) -> Result<Self> {
        let s = OperatorSpec { domain: Domain::HalfLine { n, l }, potential: PotentialSpec::Polynomial(coeffs), scale: 1.0 };
        s.validate()?;
        Ok(s)
    }

    /// `Δ_ren` for `ν_N`: the line for `n = 1`, sector `l` of the radial
    /// operator otherwise.
    pub fn renormalized(params: &ModelParams, n_spins: usize, l: usize) -> Result<Self> {
        let profile = Profile::for_params(params)?;
        let domain = if profile.is_radial() { Domain::HalfLine { n: params.n, l } } else { Domain::FullLine };
        let s = OperatorSpec {
            domain,
            potential: PotentialSpec::Renormalized { params: params.clone(), n_spins },
            scale: 0.5 * n_spins as f64,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if let Domain::HalfLine { n, .. } = self.domain {
            if n < 2 {
                return Err(Error::Invalid(format!("radial sectors need n >= 2, got {n}")));
            }
        }
        match &self.potential {
            PotentialSpec::Polynomial(c) => {
                if c.len() > 9 || c.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Invalid("polynomial potentials have at most 9 finite coefficients".into()));
                }
                let lead = c.iter().rposition(|&x| x != 0.0);
                let ok = match (lead, self.domain) {
                    (Some(d), Domain::FullLine) => d >= 2 && d % 2 == 0 && c[d] > 0.0,
                    (Some(d), Domain::HalfLine { .. }) => d >= 1 && c[d] > 0.0,
                    (None, _) => false,
                };
                if !ok {
                    return Err(Error::Invalid(format!("polynomial {c:?} is not confining on its domain")));
                }
                Ok(())
            }
            PotentialSpec::Renormalized { params, n_spins } => {
                if *n_spins == 0 {
                    return Err(Error::Invalid("N must be at least 1".into()));
                }
                let radial = Profile::for_params(params)?.is_radial();
                if radial != matches!(self.domain, Domain::HalfLine { .. }) {
                    return Err(Error::Invalid("domain does not match the model".into()));
                }
                Ok(())
            }
        }
    }
}

/// Lowest eigenvalues with convergence metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Basis size or number of grid cells at the final level.
    pub resolution: usize,
    pub converged: bool,
    /// Largest relative change (scaled by `max(1, |E|)` for polynomial
    /// operators) between the last two refinement levels.
    pub drift: f64,
    /// `log` of the gap for renormalized operators, where it may underflow.
    pub log_gap: Option<f64>,
}

impl SpectrumResult {
    /// Second eigenvalue (the spectral gap when the first is zero).
    pub fn gap(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }
}

pub fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_coeffs(spec: &OperatorSpec) -> Result<&[f64]> {
    match &spec.potential {
        PotentialSpec::Polynomial(c) => Ok(c),
        _ => Err(Error::Invalid("expected a polynomial potential".into())),
    }
}

/// Oscillator-basis solve of `−∂² + Σ c_j x^j` on the line.
///
/// ω minimizes the trace of the truncated Hamiltonian over 20 log-spaced
/// candidates; the basis is then doubled from `basis.size` until every
/// requested eigenvalue moves by less than `1e−8·max(1, |E|)`.
pub fn solve_polynomial(spec: &OperatorSpec, basis: &OscillatorBasis, k: usize) -> Result<SpectrumResult> {
    spec.validate()?;
    if spec.domain != Domain::FullLine {
        return Err(Error::Invalid("the oscillator basis lives on the full line".into()));
    }
    let c = poly_coeffs(spec)?;
    if k == 0 {
        return Err(Error::Invalid("k must be positive".into()));
    }
    const CAP: usize = 4096;
    let hamiltonian = |b: &OscillatorBasis| -> Result<DMatrix<f64>> {
        let mut h = kinetic_matrix(b) / (b.hbar * b.hbar);
        for (j, &cj) in c.iter().enumerate() {
            if cj != 0.0 {
                h += position_power_matrix(b, j as u32)? * cj;
            }
        }
        Ok(h)
    };
    let mut b = basis.with_size(basis.size.max(2 * k).max(16));
    // natural frequency of the leading term sets the centre of the ω scan
    let d = c.iter().rposition(|&x| x != 0.0).unwrap();
    let centre = basis.omega * c[d].powf(2.0 / (d as f64 + 2.0));
    let mut best = (f64::INFINITY, centre);
    for i in 0..20 {
        let om = centre * 10f64.powf(-1.5 + 3.0 * i as f64 / 19.0);
        let tr = hamiltonian(&b.with_omega(om))?.trace();
        if tr < best.0 {
            best = (tr, om);
        }
    }
    b = b.with_omega(best.1);
    let lowest = |b: &OscillatorBasis| -> Result<Vec<f64>> {
        let mut e: Vec<f64> = SymmetricEigen::new(hamiltonian(b)?).eigenvalues.iter().copied().collect();
        e.sort_by(|x, y| x.partial_cmp(y).unwrap());
        e.truncate(k);
        Ok(e)
    };
    let mut prev = lowest(&b)?;
    loop {
        let next_size = b.size * 2;
        if next_size > CAP {
            return Err(Error::NonConvergence(format!("oscillator basis reached {CAP} without settling")));
        }
        b = b.with_size(next_size);
        let cur = lowest(&b)?;
        let drift = cur.iter().zip(&prev).map(|(a, p)| (a - p).abs() / a.abs().max(1.0)).fold(0.0, f64::max);
        if drift < 1e-8 {
            return Ok(SpectrumResult { eigenvalues: cur, resolution: b.size, converged: true, drift, log_gap: None });
        }
        prev = cur;
    }
}

/// Finite-volume Schrödinger matrix `−Δ + U` on cells centred at
/// `r_j = (j + ½)h` of `(0, R]` with weight `r^{n−1}` and the centrifugal term
/// of sector ℓ; `u(r_R) = 0` beyond the last cell.
fn radial_schrodinger(n: usize, l: usize, cells: usize, radius: f64, u: &dyn Fn(f64) -> f64) -> SymTridiag {
    let h = radius / cells as f64;
    let nf = n as f64;
    let face = |j: usize| (j as f64 * h).powi(n as i32 - 1) / h;
    let vol = |j: usize| (((j + 1) as f64 * h).powi(n as i32) - (j as f64 * h).powi(n as i32)) / nf;
    let cent = (l * (l + n - 2)) as f64;
    let mut diag = Vec::with_capacity(cells);
    let mut off = Vec::with_capacity(cells.saturating_sub(1));
    for j in 0..cells {
        let r = (j as f64 + 0.5) * h;
        let v = vol(j);
        // the outer face of the last cell sees a ghost value 0 half a cell out
        let outer = if j + 1 < cells { face(j + 1) } else { 2.0 * face(j + 1) };
        diag.push((face(j) + outer) / v + u(r) + cent / (r * r));
        if j + 1 < cells {
            off.push(-face(j + 1) / (v * vol(j + 1)).sqrt());
        }
    }
    SymTridiag { diag, off }
}

/// Second-order differences for `−∂² + U` on `[−L, L]`, Dirichlet at ±L.
fn line_schrodinger(points: usize, half_width: f64, u: &dyn Fn(f64) -> f64) -> SymTridiag {
    let h = 2.0 * half_width / (points + 1) as f64;
    let ih2 = 1.0 / (h * h);
    let diag = (1..=points).map(|i| 2.0 * ih2 + u(-half_width + i as f64 * h)).collect();
    SymTridiag { diag, off: vec![-ih2; points - 1] }
}

/// Distance beyond which a confining polynomial exceeds 100, padded so
/// bound states have decayed far below roundoff at the wall.
fn polynomial_reach(c: &[f64], both_sides: bool) -> f64 {
    let mut l: f64 = 1.0;
    let high = |x: f64| eval_poly(c, x) >= 100.0 && (!both_sides || eval_poly(c, -x) >= 100.0);
    while !high(l) {
        l *= 1.2;
    }
    // |U| can dip below 100 again only inside [0, l] for these polynomials
    1.5 * l + 1.0
}

/// Richardson step for second-order schemes: `(4 E_{h/2} − E_h)/3`.
fn richardson(fine: &[f64], coarse: &[f64]) -> Vec<f64> {
    fine.iter().zip(coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
}

/// Refine a second-order discretization by doubling until the Richardson
/// values settle to `tol` (relative to `max(1, |E|)`).
fn refine(start: usize, max_cells: usize, tol: f64, solve: impl Fn(usize) -> Result<Vec<f64>>) -> Result<SpectrumResult> {
    let mut m = start;
    let mut coarse = solve(m)?;
    let mut prev_rich: Option<Vec<f64>> = None;
    loop {
        let m2 = 2 * m;
        if m2 > max_cells {
            return Err(Error::NonConvergence(format!("grid reached {max_cells} cells without settling")));
        }
        let fine = solve(m2)?;
        let rich = richardson(&fine, &coarse);
        if let Some(p) = &prev_rich {
            let drift = rich.iter().zip(p).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).fold(0.0, f64::max);
            if drift < tol {
                return Ok(SpectrumResult { eigenvalues: rich, resolution: m2, converged: true, drift, log_gap: None });
            }
        }
        prev_rich = Some(rich);
        coarse = fine;
        m = m2;
    }
}

/// Finite-difference solve of a polynomial operator on the line, the
/// independent check on [`solve_polynomial`].
pub fn solve_polynomial_grid(spec: &OperatorSpec, k: usize) -> Result<SpectrumResult> {
    spec.validate()?;
    if spec.domain != Domain::FullLine {
        return Err(Error::Invalid("expected a full-line operator".into()));
    }
    let c = poly_coeffs(spec)?.to_vec();
    let l = polynomial_reach(&c, true);
    refine(500, 1 << 20, 1e-9, |m| line_schrodinger(m, l, &|x| eval_poly(&c, x)).lowest(k))
}

/// Radial operator `−(∂_r² + (n−1)/r ∂_r) + ℓ(ℓ+n−2)/r² + U(r)` with a
/// polynomial U, by finite volumes in ψ on a half-step-shifted grid.
pub fn solve_radial(n: usize, l: usize, coeffs: &[f64], k: usize) -> Result<SpectrumResult> {
    let spec = OperatorSpec::radial_polynomial(n, l, coeffs.to_vec())?;
    let c = poly_coeffs(&spec)?.to_vec();
    let radius = polynomial_reach(&c, false);
    refine(500, 1 << 20, 1e-9, |m| radial_schrodinger(n, l, m, radius, &|r| eval_poly(&c, r)).lowest(k))
}

/// Local width of `e^{−NV}` around a critical point: Gaussian, cubic
/// (inflection) or quartic scale.
fn critical_width(profile: &Profile, x: f64, nf: f64) -> f64 {
    let d2 = profile.d2v(x).abs();
    let d3 = profile.d3v(x).abs();
    let w2 = if d2 > 1e-8 { 1.0 / (nf * d2).sqrt() } else { f64::INFINITY };
    let w3 = if d3 > 1e-8 { (nf * d3).powf(-1.0 / 3.0) } else { f64::INFINITY };
    w2.min(w3).min(nf.powf(-0.25))
}

/// Grid domain for the renormalized operator: out from the outermost
/// critical points until `N(V − V_c) ≥ 80`, so eigenfunctions localized at
/// any critical point have decayed by `e^{−40}` at the reflecting walls.
fn renormalized_domain(profile: &Profile, nf: f64, locs: &[f64]) -> (f64, f64) {
    let reach = |c: f64, dir: f64| {
        let vc = profile.v(c);
        let mut d = 1e-3;
        while nf * (profile.v(c + dir * d) - vc) < 80.0 {
            d *= 1.1;
        }
        c + dir * d
    };
    let lo = locs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = locs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if profile.is_radial() {
        (0.0, reach(hi, 1.0))
    } else {
        (reach(lo, -1.0), reach(hi, 1.0))
    }
}

/// Generator-form discretization: `log π_j`, `log c_{j+½}` and the sector
/// potential `ℓ(ℓ+n−2)/r_j²`, for `cells` cells on `domain`.
struct GeneratorGrid {
    log_pi: Vec<f64>,
    log_c: Vec<f64>,
    extra: Vec<f64>,
}

fn generator_grid(profile: &Profile, nf: f64, v_ref: f64, domain: (f64, f64), cells: usize, l: usize) -> GeneratorGrid {
    let (a, b) = domain;
    let h = (b - a) / cells as f64;
    let p = profile.weight_power();
    let nv = |x: f64| -nf * (profile.v(x) - v_ref);
    let mut log_pi = Vec::with_capacity(cells);
    let mut extra = Vec::with_capacity(cells);
    for j in 0..cells {
        let x = a + (j as f64 + 0.5) * h;
        let lw = if p == 0 {
            h.ln()
        } else {
            let (r0, r1) = (a + j as f64 * h, a + (j + 1) as f64 * h);
            ((r1.powi(p as i32 + 1) - r0.powi(p as i32 + 1)) / (p + 1) as f64).ln()
        };
        log_pi.push(nv(x) + lw);
        extra.push(if p == 0 { 0.0 } else { (l * (l + p - 1)) as f64 / (x * x) });
    }
    let log_c = (1..cells)
        .map(|j| {
            let x = a + j as f64 * h;
            let radial = if p == 0 { 0.0 } else { p as f64 * x.ln() };
            nv(x) + radial - h.ln()
        })
        .collect();
    GeneratorGrid { log_pi, log_c, extra }
}

impl GeneratorGrid {
    /// `diag(π)^{-1/2} (Q + diag(π·extra)) diag(π)^{-1/2}`.
    fn tridiag(&self) -> SymTridiag {
        let mut t = SymTridiag::from_birth_death(&self.log_pi, &self.log_c);
        for (d, x) in t.diag.iter_mut().zip(&self.extra) {
            *d += x;
        }
        t
    }
}

/// Spectrum of `Δ_ren` for `ν_N`, in sector `l` when `n ≥ 2`.
///
/// For the sector without a centrifugal term the lowest eigenvalue is the
/// (numerically) exact zero of the constant function, and the gap comes from
/// log-domain inverse iteration, so exponentially small gaps keep full
/// relative accuracy; the remaining eigenvalues come from Sturm bisection.
pub fn solve_renormalized(params: &ModelParams, n_spins: usize, l: usize, k: usize) -> Result<SpectrumResult> {
    solve_renormalized_with(params, n_spins, l, k, 1e-6)
}

pub fn solve_renormalized_with(params: &ModelParams, n_spins: usize, l: usize, k: usize, tol: f64) -> Result<SpectrumResult> {
    OperatorSpec::renormalized(params, n_spins, l)?;
    let profile = Profile::for_params(params)?;
    if k == 0 {
        return Err(Error::Invalid("k must be positive".into()));
    }
    if !profile.is_radial() && l != 0 {
        return Err(Error::Invalid("angular sectors exist only for n >= 2".into()));
    }
    let nf = n_spins as f64;
    let cps = critical_points(params);
    let locs: Vec<f64> = cps.iter().map(|c| c.location[0]).collect();
    let v_ref = cps.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let domain = renormalized_domain(&profile, nf, &locs);
    let width = locs.iter().map(|&x| critical_width(&profile, x, nf)).fold(f64::INFINITY, f64::min);
    let h0 = (width / 6.0).min((domain.1 - domain.0) / 400.0);
    let start = ((domain.1 - domain.0) / h0).ceil() as usize;
    let zero_mode = l == 0;

    // One level: (eigenvalues, log gap if the zero mode is present).
    let level = |cells: usize| -> Result<(Vec<f64>, Option<f64>)> {
        let g = generator_grid(&profile, nf, v_ref, domain, cells, l);
        let t = g.tridiag();
        if zero_mode {
            let mut e = t.lowest(k.max(2))?;
            let log_gap = birth_death_log_gap(&g.log_pi, &g.log_c)?;
            e[1] = log_gap.exp();
            e.truncate(k);
            Ok((e, Some(log_gap)))
        } else {
            Ok((t.lowest(k)?, None))
        }
    };

    let max_cells = 1 << 21;
    let mut m = start;
    let mut coarse = level(m)?;
    let mut prev: Option<(Vec<f64>, Option<f64>)> = None;
    loop {
        let m2 = 2 * m;
        if m2 > max_cells {
            return Err(Error::NonConvergence(format!("renormalized grid reached {max_cells} cells without settling")));
        }
        let fine = level(m2)?;
        let mut rich = richardson(&fine.0, &coarse.0);
        let log_gap = match (fine.1, coarse.1) {
            (Some(f), Some(c)) => {
                // Richardson in log form: gap may be far below f64 range
                let ratio = (c - f).exp();
                Some(f + ((4.0 - ratio) / 3.0).ln())
            }
            _ => None,
        };
        if zero_mode {
            rich[0] = fine.0[0];
            if let (Some(lg), true) = (log_gap, k > 1) {
                rich[1] = lg.exp();
            }
        }
        if let Some((p, plg)) = &prev {
            let skip = usize::from(zero_mode);
            let mut drift = rich
                .iter()
                .zip(p)
                .skip(skip)
                .map(|(a, b)| if *a == 0.0 { 0.0 } else { ((a - b) / a).abs() })
                .fold(0.0, f64::max);
            if let (Some(a), Some(b)) = (log_gap, plg) {
                drift = drift.max((a - b).abs());
            }
            if drift < tol {
                return Ok(SpectrumResult { eigenvalues: rich, resolution: m2, converged: true, drift, log_gap });
            }
        }
        prev = Some((rich, log_gap));
        coarse = fine;
        m = m2;
    }
}

/// `‖Δ_ren ψ₀‖ / (‖Δ_ren‖ ‖ψ₀‖)` for `ψ₀ = e^{−N(V − V_min)/2}` sampled on a
/// grid, with `Δ_ren` assembled directly from `(N²/4)|V'|² − (N/2)ΔV`.
/// Returns the relative residual and the Gershgorin norm estimate.
pub fn null_vector_residual(params: &ModelParams, n_spins: usize, cells: usize) -> Result<(f64, f64)> {
    let profile = Profile::for_params(params)?;
    let nf = n_spins as f64;
    let cps = critical_points(params);
    let locs: Vec<f64> = cps.iter().map(|c| c.location[0]).collect();
    let v_ref = cps.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let (a, b) = renormalized_domain(&profile, nf, &locs);
    let u = |x: f64| 0.25 * nf * nf * profile.dv(x).powi(2) - 0.5 * nf * profile.laplacian(x);
    let psi = |x: f64| (-0.5 * nf * (profile.v(x) - v_ref)).exp();
    let (t, xs): (SymTridiag, Vec<f64>) = match profile {
        Profile::Line { .. } => {
            let hw = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let t = line_schrodinger(cells, hw, &|x| u(x + mid));
            let h = 2.0 * hw / (cells + 1) as f64;
            (t, (1..=cells).map(|i| mid - hw + i as f64 * h).collect())
        }
        Profile::Radial { n, .. } => {
            let t = radial_schrodinger(n, 0, cells, b, &u);
            let h = b / cells as f64;
            (t, (0..cells).map(|j| (j as f64 + 0.5) * h).collect())
        }
    };
    // the radial matrix acts on √vol·ψ
    let h = xs[1] - xs[0];
    let p = profile.weight_power() as i32;
    let weight = |x: f64| {
        if p == 0 {
            1.0
        } else {
            ((x + 0.5 * h).powi(p + 1) - (x - 0.5 * h).powi(p + 1)).sqrt()
        }
    };
    let v: Vec<f64> = xs.iter().map(|&x| psi(x) * weight(x)).collect();
    let w = t.matvec(&v);
    let norm = |z: &[f64]| z.iter().map(|q| q * q).sum::<f64>().sqrt();
    let (lo, hi) = t.bounds();
    let op = lo.abs().max(hi.abs());
    Ok((norm(&w) / (op * norm(&v)), op))
}

/// Localization regimes of `Δ_ren` and their λ-free limit operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRegime {
    /// `n = 1` at `h = h_c`: the degenerate critical point φ₋.
    CriticalFieldInflection,
    /// `n = 1` at `h = h_c`: the nondegenerate global minimum.
    CriticalFieldMinimum,
    /// `n ≥ 2`, `β > n`, `h = 0`: the maximum at the origin.
    SupercriticalRadial0,
    /// `n ≥ 2`, `β > n`, `h = 0`: the ring of minima at `r_min`.
    SupercriticalRadialRmin,
    /// `β = n`, `h = 0`, angular sector `l` (ignored for `n = 1`).
    CriticalTemperature { l: usize },
}

/// Quartic coefficient of `V_n` at `β = n`, `h = 0`:
/// `V_n(r) = n/2 + n²/(4(n+2)) r⁴ + O(r⁶)` (fourth cumulant of a uniform
/// unit vector's coordinate).
pub fn critical_quartic_coefficient(n: usize) -> f64 {
    let nf = n as f64;
    nf * nf / (4.0 * (nf + 2.0))
}

/// `−Δ + 16a² r⁶ − 4a(n+2) r²`, which factorizes as `A*A` with zero mode
/// `e^{−a r⁴}` (on the line for n = 1).
pub fn susy_sextic(n: usize, a: f64) -> Vec<f64> {
    let mut c = vec![0.0; 7];
    c[6] = 16.0 * a * a;
    c[2] = -4.0 * a * (n as f64 + 2.0);
    c
}

/// The polynomial operator that `Δ_ren` localizes to in `regime`.
/// Eigenvalues of `Δ_ren` approach λ, λ^{2/3} or λ^{1/2} times those of the
/// returned operator, by regime.
pub fn limit_operator(params: &ModelParams, regime: LimitRegime) -> Result<OperatorSpec> {
    let profile = Profile::for_params(params)?;
    let (n, beta) = (params.n, params.beta);
    match regime {
        LimitRegime::CriticalFieldInflection | LimitRegime::CriticalFieldMinimum => {
            if n != 1 || !(beta > 1.0) {
                return Err(Error::Regime("critical-field operators need n = 1 and beta > 1".into()));
            }
            let h = params.h[0];
            let hc = critical_field(beta)?;
            if (h.abs() - hc).abs() > 1e-9 * (1.0 + hc) {
                return Err(Error::Regime(format!("field {h} is not the critical field {hc}")));
            }
            if regime == LimitRegime::CriticalFieldInflection {
                // V' ≈ V'''x²/2 near φ₋: λ²V'² − λV'' → λ^{2/3}((V'''²/4)y⁴ − V''' y)
                let phi = -h.signum() * ((beta - 1.0) / beta).sqrt();
                let d3 = profile.d3v(phi);
                OperatorSpec::polynomial(vec![0.0, -d3, 0.0, 0.0, 0.25 * d3 * d3])
            } else {
                let min = global_minima(params)
                    .into_iter()
                    .find(|c| c.kind == CriticalKind::Minimum)
                    .ok_or_else(|| Error::Regime("no nondegenerate minimum".into()))?;
                harmonic(profile.d2v(min.location[0]))
            }
        }
        LimitRegime::SupercriticalRadial0 | LimitRegime::SupercriticalRadialRmin => {
            if n < 2 || params.has_field() || params.temperature() != Temperature::Supercritical {
                return Err(Error::Regime("radial localizations need n >= 2, h = 0, beta > n".into()));
            }
            if regime == LimitRegime::SupercriticalRadial0 {
                // Hessian a·I at the origin: λ²a²r² − λ n a
                let a = profile.d2v(0.0);
                OperatorSpec::radial_polynomial(n, 0, vec![-(n as f64) * a, 0.0, a * a])
            } else {
                let rmin = critical_points(params)
                    .into_iter()
                    .find(|c| c.kind == CriticalKind::Minimum)
                    .ok_or_else(|| Error::Regime("no ring of minima".into()))?;
                harmonic(profile.d2v(rmin.location[0]))
            }
        }
        LimitRegime::CriticalTemperature { l } => {
            if params.has_field() || params.temperature() != Temperature::Critical {
                return Err(Error::Regime("critical-temperature operators need beta = n, h = 0".into()));
            }
            let c = susy_sextic(n, critical_quartic_coefficient(n));
            if n == 1 {
                OperatorSpec::polynomial(c)
            } else {
                OperatorSpec::radial_polynomial(n, l, c)
            }
        }
    }
}

/// `−∂² + b² x² − b`: the harmonic localization at a minimum with `V'' = b`.
fn harmonic(b: f64) -> Result<OperatorSpec> {
    OperatorSpec::polynomial(vec![-b, 0.0, b * b])
}

/// Dispatch on the operator kind with default resolution settings.
pub fn solve(spec: &OperatorSpec, k: usize) -> Result<SpectrumResult> {
    spec.validate()?;
    match (&spec.potential, spec.domain) {
        (PotentialSpec::Polynomial(_), Domain::FullLine) => solve_polynomial(spec, &OscillatorBasis::new(32, 1.0, 1.0, 1.0)?, k),
        (PotentialSpec::Polynomial(c), Domain::HalfLine { n, l }) => solve_radial(n, l, c, k),
        (PotentialSpec::Renormalized { params, n_spins }, Domain::FullLine) => solve_renormalized(params, *n_spins, 0, k),
        (PotentialSpec::Renormalized { params, n_spins }, Domain::HalfLine { l, .. }) => solve_renormalized(params, *n_spins, l, k),
    }
}

/// `S_{φ±} = −∂² + β³(β−1)x⁴ + 2√(β(β−1))β x`.
pub fn inflection_operator(beta: f64) -> Result<OperatorSpec> {
    if !(beta > 1.0) {
        return Err(Error::Regime(format!("inflection operator needs beta > 1, got {beta}")));
    }
    OperatorSpec::polynomial(vec![0.0, 2.0 * (beta * (beta - 1.0)).sqrt() * beta, 0.0, 0.0, beta.powi(3) * (beta - 1.0)])
}

/// `H₁(λ) = −∂² + λ² x⁶/9 − λ x²`.
pub fn critical_line_operator(lambda: f64) -> Result<OperatorSpec> {
    OperatorSpec::polynomial(vec![0.0, 0.0, -lambda, 0.0, 0.0, 0.0, lambda * lambda / 9.0])
}
