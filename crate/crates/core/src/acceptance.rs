//! The acceptance suite: eleven end-to-end checks, each timed and reported
//! as one line. Shared by the `acceptance` test target and `verify`.

use crate::funcineq::{sandwich_check, transfer_constants, GAMMA_ISING};
use crate::ising_chain::{chain_gap, fourier_subspace_check, full_gap, variance_decomposition, GapMethod, MagnetizationChain};
use crate::measures::{expect_nu, laplace_expectation, magnetization_gap_bound, RenormalizedMeasure};
use crate::oscillator::OscillatorBasis;
use crate::potential::{critical_field, eval_v, grad_v, hess_v, well_depth, ModelParams};
use crate::scaling::{fit_constant_with, fit_exponential_rate, fit_power_law, GapSeries, Tolerances};
use crate::schrodinger::{inflection_operator, limit_operator, null_vector_residual, solve, solve_polynomial, solve_renormalized, LimitRegime, OperatorSpec};
use crate::specialfn::{bessel_ratio, log_bessel_i};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub const CRITERIA: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AcceptanceOptions {
    /// Cap the expensive N sweeps at 800.
    pub quick: bool,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    /// Wall-clock budget from the criterion's statement.
    pub budget_seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<34} {}  ({:.2}s of {:.0}s)  {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

fn name_and_budget(id: usize) -> (&'static str, f64) {
    match id {
        1 => ("supercritical Ising rate", 120.0),
        2 => ("chain equals full generator", 60.0),
        3 => ("critical Ising exponent", 300.0),
        4 => ("critical multi-component exponent", 60.0),
        5 => ("strong-field constancy", 180.0),
        6 => ("critical-field exponent", 180.0),
        7 => ("supercritical radial growth", 180.0),
        8 => ("supersymmetric zero modes", 120.0),
        9 => ("Muckenhoupt sandwich", 120.0),
        10 => ("Laplace expansion order", 60.0),
        _ => ("property suites", 120.0),
    }
}

fn geometric(start: usize, factor: f64, count: usize) -> Vec<usize> {
    (0..count).map(|i| (start as f64 * factor.powi(i as i32)).round() as usize).collect()
}

fn cap(ns: Vec<usize>, quick: bool, fallback: Vec<usize>) -> Vec<usize> {
    if quick && ns.iter().any(|&n| n > 800) {
        fallback
    } else {
        ns
    }
}

/// Run one criterion (1-based).
pub fn run_criterion(id: usize, opts: &AcceptanceOptions) -> CriterionResult {
    let (name, budget) = name_and_budget(id);
    let t0 = Instant::now();
    let outcome = match id {
        1 => c1(opts),
        2 => c2(),
        3 => c3(opts),
        4 => c4(opts),
        5 => c5(opts),
        6 => c6(opts),
        7 => c7(opts),
        8 => c8(),
        9 => c9(opts),
        10 => c10(),
        11 => c11(),
        _ => Err(Error::Invalid(format!("no criterion {id}"))),
    };
    let (pass, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id, name: name.into(), pass, detail, seconds: t0.elapsed().as_secs_f64(), budget_seconds: budget }
}

pub fn run_all(opts: &AcceptanceOptions) -> Vec<CriterionResult> {
    (1..=CRITERIA).map(|i| run_criterion(i, opts)).collect()
}

/// Criteria in parallel on the current rayon pool, reported in order.
pub fn run_all_parallel(opts: &AcceptanceOptions) -> Vec<CriterionResult> {
    (1..=CRITERIA).into_par_iter().map(|i| run_criterion(i, opts)).collect()
}

type Outcome = Result<(bool, String)>;

fn chain_series(beta: f64, h: f64, ns: &[usize]) -> Result<GapSeries> {
    let p = ModelParams::ising(beta, h)?;
    let pts = ns.iter().map(|&n| chain_gap(n, beta, h).map(|g| (n, g.log_gap))).collect::<Result<Vec<_>>>()?;
    GapSeries::new(
        &p,
        pts.into_iter()
            .map(|(n, lg)| crate::scaling::GapPoint { n_spins: n, log_gap: lg, method: GapMethod::ChainExact })
            .collect(),
    )
}

fn c1(o: &AcceptanceOptions) -> Outcome {
    let ns = cap(geometric(200, 2.0, 5), o.quick, geometric(50, 2.0, 5));
    let s = chain_series(2.0, 0.0, &ns)?;
    let f = fit_exponential_rate(&s)?;
    let depth = well_depth(&ModelParams::ising(2.0, 0.0)?)?;
    let rel = f.value / depth - 1.0;
    Ok((rel.abs() <= o.tolerances.rate_rel, format!("rate {:.5} vs well depth {:.6} ({:+.2}%)", f.value, depth, 100.0 * rel)))
}

fn c2() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        for beta in [0.5, 1.0, 2.0] {
            for h in [0.0, 0.2] {
                let a = chain_gap(n, beta, h)?.gap;
                let b = full_gap(n, beta, h)?.gap;
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max |chain − full| = {worst:.2e} over 72 cases")))
}

fn c3(o: &AcceptanceOptions) -> Outcome {
    let ns = cap(vec![1000, 3000, 10000, 30000, 100000], o.quick, vec![50, 100, 200, 400, 800]);
    let s = chain_series(1.0, 0.0, &ns)?;
    let f = fit_power_law(&s)?;
    Ok(((f.value + 0.5).abs() <= o.tolerances.exponent_abs, format!("exponent {:.4} ± {:.4}", f.value, f.stderr)))
}

// The bound is a one-dimensional quadrature, so quick mode keeps the full
// sweep: below N = 800 finite-size corrections still bias the slope by 0.05.
fn c4(o: &AcceptanceOptions) -> Outcome {
    let ns = geometric(100, 10f64.sqrt(), 7);
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [2usize, 3] {
        let p = ModelParams::new(n, n as f64, vec![0.0; n])?;
        let data = ns.iter().map(|&k| magnetization_gap_bound(&p, k).map(|g| (k, g))).collect::<Result<Vec<_>>>()?;
        let f = fit_power_law(&GapSeries::from_gaps(&p, GapMethod::Bound, &data)?)?;
        pass &= (f.value + 0.5).abs() <= o.tolerances.exponent_abs;
        parts.push(format!("n={n}: {:.4}", f.value));
    }
    Ok((pass, parts.join(", ")))
}

fn renormalized_gaps(p: &ModelParams, ns: &[usize]) -> Result<Vec<(usize, f64, f64)>> {
    ns.iter()
        .map(|&n| {
            let r = solve_renormalized(p, n, 0, 2)?;
            Ok((n, r.eigenvalues[0], r.eigenvalues[1]))
        })
        .collect()
}

fn check_zero_modes(rows: &[(usize, f64, f64)], tol: f64) -> bool {
    rows.iter().all(|&(n, e0, _)| e0.abs() <= tol * 0.5 * n as f64)
}

fn c5(o: &AcceptanceOptions) -> Outcome {
    let ns = cap(geometric(100, 2.0, 5), o.quick, geometric(50, 2.0, 5));
    let p = ModelParams::ising(2.0, 1.0)?;
    let rows = renormalized_gaps(&p, &ns)?;
    let per_n: Vec<f64> = rows.iter().map(|&(n, _, g)| g / n as f64).collect();
    let spread = per_n.iter().copied().fold(f64::NEG_INFINITY, f64::max) / per_n.iter().copied().fold(f64::INFINITY, f64::min);
    let full: Vec<(usize, f64)> = rows
        .iter()
        .map(|&(n, _, g)| transfer_constants(g, n, p.beta, GAMMA_ISING).map(|t| (n, t.gap_lower_bound())))
        .collect::<Result<_>>()?;
    let verdict = fit_constant_with(
        &GapSeries::from_gaps(&p, GapMethod::Bound, &full)?,
        o.tolerances.constant_ratio,
        o.tolerances.constant_exponent,
    );
    let zero = check_zero_modes(&rows, o.tolerances.zero_mode);
    Ok((
        spread <= 1.3 && verdict.pass && zero,
        format!(
            "gap/N spread {:.4}, full-measure SGI bound {:.4}..{:.4} (constant: {})",
            spread,
            full.first().unwrap().1,
            full.last().unwrap().1,
            verdict.pass
        ),
    ))
}

fn c6(o: &AcceptanceOptions) -> Outcome {
    let ns = cap(geometric(100, 2.0, 5), o.quick, geometric(50, 2.0, 5));
    let p = ModelParams::ising(2.0, critical_field(2.0)?)?;
    let rows = renormalized_gaps(&p, &ns)?;
    let data: Vec<(usize, f64)> = rows.iter().map(|&(n, _, g)| (n, g)).collect();
    let f = fit_power_law(&GapSeries::from_gaps(&p, GapMethod::Schrodinger, &data)?)?;
    let zero = check_zero_modes(&rows, o.tolerances.zero_mode);
    Ok((f.value >= 2.0 / 3.0 - o.tolerances.one_sided && zero, format!("growth exponent {:.4} (need ≥ {:.4})", f.value, 2.0 / 3.0 - o.tolerances.one_sided)))
}

fn c7(o: &AcceptanceOptions) -> Outcome {
    let ns = geometric(50, 2.0, 5);
    let p = ModelParams::new(2, 10.0, vec![0.0, 0.0])?;
    let rows = renormalized_gaps(&p, &ns)?;
    let data: Vec<(usize, f64)> = rows.iter().map(|&(n, _, g)| (n, g)).collect();
    let f = fit_power_law(&GapSeries::from_gaps(&p, GapMethod::Schrodinger, &data)?)?;
    let zero = check_zero_modes(&rows, o.tolerances.zero_mode);
    Ok(((f.value - 1.0).abs() <= 0.07 && zero, format!("growth exponent {:.4}", f.value)))
}

fn c8() -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for n in [1usize, 2, 3] {
        let p = ModelParams::new(n, n as f64, vec![0.0; n])?;
        let e = solve(&limit_operator(&p, LimitRegime::CriticalTemperature { l: 0 })?, 1)?.eigenvalues[0];
        pass &= e.abs() < 1e-5;
        detail.push(format!("S{n}: {e:.1e}"));
    }
    let mut lowest = f64::INFINITY;
    for beta in [1.5, 2.0, 3.0, 4.0] {
        lowest = lowest.min(solve(&inflection_operator(beta)?, 1)?.eigenvalues[0]);
    }
    pass &= lowest > 0.01;
    detail.push(format!("min S_φ± ground {lowest:.4}"));
    Ok((pass, detail.join(", ")))
}

fn c9(o: &AcceptanceOptions) -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for (beta, h, n) in [(0.5, 0.0, 100), (2.0, 1.0, 200), (2.0, 0.0, 100)] {
        let r = sandwich_check(&ModelParams::ising(beta, h)?, n, o.tolerances.sandwich)?;
        pass &= r.pass;
        detail.push(format!("c/B={:.3}", (r.log_c - r.log_b).exp()));
    }
    Ok((pass, detail.join(", ") + " (window [0.475, 4.2])"))
}

fn c10() -> Outcome {
    let (beta, h) = (2.0, 0.8);
    let p = ModelParams::ising(beta, h)?;
    let g = |x: f64| (beta * x + h).tanh();
    let mut scaled = Vec::new();
    for n in [100usize, 200, 400] {
        let exact = expect_nu(&RenormalizedMeasure::new(&p, n)?, g)?;
        let approx = laplace_expectation(&p, n, g)?.value;
        scaled.push((exact - approx).abs() * (n * n) as f64);
    }
    let ratios = [scaled[1] / scaled[0], scaled[2] / scaled[1]];
    let pass = ratios.iter().all(|r| (0.7..=1.4).contains(r));
    Ok((pass, format!("N²·error {:.4e}, {:.4e}, {:.4e}; ratios {:.3}, {:.3}", scaled[0], scaled[1], scaled[2], ratios[0], ratios[1])))
}

/// Each property check returns its name on failure.
fn c11() -> Outcome {
    let mut failed: Vec<&str> = Vec::new();
    let mut check = |name: &'static str, ok: Result<bool>| {
        if !matches!(ok, Ok(true)) {
            failed.push(name);
        }
    };
    check("bessel monotonicity", bessel_monotone());
    check("turan", turan());
    check("gradient/hessian", derivatives_match());
    check("oscillator 2n+1", oscillator_levels());
    check("null vector", null_vectors());
    check("variance decomposition", variance_split());
    check("eta symmetry", eta_symmetry());
    check("magnetization identities", magnetization_identities());
    Ok((failed.is_empty(), if failed.is_empty() { "8 suites".into() } else { format!("failed: {}", failed.join(", ")) }))
}

fn bessel_monotone() -> Result<bool> {
    for n in 2..=8usize {
        let nu = 0.5 * n as f64 - 1.0;
        let mut last = 0.0;
        for i in 0..=120 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 120.0);
            let v = r / bessel_ratio(nu, r)?;
            if i > 0 && !(v > last) {
                return Ok(false);
            }
            last = v;
        }
    }
    Ok(true)
}

fn turan() -> Result<bool> {
    for n in 2..=8usize {
        let nu = 0.5 * n as f64;
        for i in 0..=60 {
            let z = 10f64.powf(-2.0 + 5.0 * i as f64 / 60.0);
            let lhs = 2.0 * log_bessel_i(nu, z)?;
            let rhs = log_bessel_i(nu - 1.0, z)? + log_bessel_i(nu + 1.0, z)?;
            if !(lhs > rhs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn derivatives_match() -> Result<bool> {
    let cases = [
        ModelParams::ising(2.0, 0.3)?,
        ModelParams::new(2, 3.0, vec![0.2, -0.1])?,
        ModelParams::new(3, 5.0, vec![0.0, 0.4, 0.1])?,
    ];
    let s = 1e-5;
    for p in &cases {
        let x: Vec<f64> = (0..p.n).map(|i| 0.3 - 0.25 * i as f64).collect();
        let g = grad_v(p, &x);
        let hm = hess_v(p, &x);
        for i in 0..p.n {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += s;
            b[i] -= s;
            let fd = (eval_v(p, &a) - eval_v(p, &b)) / (2.0 * s);
            if (fd - g[i]).abs() > 1e-7 {
                return Ok(false);
            }
            let (ga, gb) = (grad_v(p, &a), grad_v(p, &b));
            for j in 0..p.n {
                if ((ga[j] - gb[j]) / (2.0 * s) - hm[(j, i)]).abs() > 1e-6 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn oscillator_levels() -> Result<bool> {
    let s = OperatorSpec::polynomial(vec![0.0, 0.0, 1.0])?;
    let r = solve_polynomial(&s, &OscillatorBasis::unit(32, 1.0)?, 8)?;
    Ok(r.eigenvalues.iter().enumerate().all(|(k, e)| (e - (2 * k + 1) as f64).abs() < 1e-9))
}

fn null_vectors() -> Result<bool> {
    for p in [ModelParams::ising(2.0, 0.0)?, ModelParams::ising(0.5, 0.3)?, ModelParams::new(3, 5.0, vec![0.0; 3])?] {
        if null_vector_residual(&p, 200, 4000)?.0 > 1e-6 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn variance_split() -> Result<bool> {
    for n in [2usize, 5, 10] {
        for (beta, h) in [(0.5, 0.0), (2.0, 0.3)] {
            let (a, b) = variance_decomposition(n, beta, h, |m| m * m + 0.3 * m)?;
            if (a - b).abs() > 1e-9 * a.abs().max(1e-12) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn eta_symmetry() -> Result<bool> {
    for n in [5usize, 10, 101] {
        let c = MagnetizationChain::new(n, 2.0, 0.0)?;
        let w = &c.log_weights;
        if (0..w.len()).any(|i| w[i] != w[w.len() - 1 - i]) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn magnetization_identities() -> Result<bool> {
    for n in [4usize, 8] {
        let r = fourier_subspace_check(n, 0.7, 1, 4, 7)?;
        let (v, target) = r.magnetization_variance;
        if (v - target).abs() > 1e-10 * target || (r.magnetization_dirichlet - 4.0).abs() > 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}
