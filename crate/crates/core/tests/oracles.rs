//! Library results checked against oracles built independently here: power
//! series, dense eigensolvers, brute-force quadrature and statrs.

use approx::assert_relative_eq;
use meanfield_spectra::funcineq::ineq_constants;
use meanfield_spectra::ising_chain::{chain_gap, full_gap, MagnetizationChain};
use meanfield_spectra::measures::{expect_nu, fluct_mean_spin, RenormalizedMeasure};
use meanfield_spectra::oscillator::{position_power_matrix, OscillatorBasis};
use meanfield_spectra::potential::{critical_field, critical_points, well_depth, CriticalKind, ModelParams};
use meanfield_spectra::schrodinger::{solve, solve_radial, OperatorSpec};
use meanfield_spectra::specialfn::{bessel_ratio, digamma, ln_gamma, log_bessel_i};
use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma as sgamma;

/// `log I_ν(x)` by direct power series, summed in log space.
fn series_log_i(nu: f64, x: f64) -> f64 {
    let lx = (0.5 * x).ln();
    let terms: Vec<f64> = (0..400)
        .map(|k| (2 * k) as f64 * lx + nu * lx - sgamma::ln_gamma(k as f64 + 1.0) - sgamma::ln_gamma(k as f64 + nu + 1.0))
        .collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

#[test]
fn bessel_against_power_series() {
    for nu in [-0.5, 0.0, 0.5, 1.0, 1.5, 3.0] {
        for x in [1e-3, 0.1, 1.0, 5.0, 20.0, 60.0] {
            assert_relative_eq!(log_bessel_i(nu, x).unwrap(), series_log_i(nu, x), epsilon = 1e-11, max_relative = 1e-11);
            let r = (series_log_i(nu + 1.0, x) - series_log_i(nu, x)).exp();
            assert_relative_eq!(bessel_ratio(nu, x).unwrap(), r, max_relative = 1e-11);
        }
    }
}

#[test]
fn gamma_family_against_statrs() {
    for x in [0.1, 0.5, 1.0, 2.5, 10.0, 137.2, 1e4] {
        assert_relative_eq!(ln_gamma(x), sgamma::ln_gamma(x), epsilon = 1e-12, max_relative = 1e-12);
        assert_relative_eq!(digamma(x).unwrap(), sgamma::digamma(x), epsilon = 1e-12, max_relative = 1e-11);
    }
}

#[test]
fn langevin_function_for_three_components() {
    // n = 3: I_{3/2}/I_{1/2}(z) = coth z − 1/z.
    let p = ModelParams::new(3, 2.0, vec![0.0; 3]).unwrap();
    for r in [0.05, 0.7, 3.0] {
        let m = fluct_mean_spin(&p, &[0.0, 0.0, r]);
        let z = 2.0 * r;
        assert_relative_eq!(m[2], 1.0 / z.tanh() - 1.0 / z, max_relative = 1e-12);
        assert!(m[0].abs() < 1e-15 && m[1].abs() < 1e-15);
    }
}

fn v1(beta: f64, h: f64, x: f64) -> f64 {
    0.5 * beta * x * x - (beta * x + h).cosh().ln()
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(a) > 0.0) == (f(m) > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn well_depth_against_root_bracketing() {
    for (beta, h) in [(2.0, 0.0), (3.0, 0.5), (1.5, 0.05)] {
        let f = |x: f64| x - (beta * x + h).tanh();
        // Roots of V' by scanning for sign changes.
        let grid: Vec<f64> = (0..=4001).map(|i| -2.0 + 4.0 * i as f64 / 4001.0).collect();
        let roots: Vec<f64> = grid.windows(2).filter(|w| f(w[0]) * f(w[1]) < 0.0).map(|w| bisect(f, w[0], w[1])).collect();
        assert_eq!(roots.len(), 3, "β={beta} h={h}");
        let top = v1(beta, h, roots[1]);
        let shallow = (top - v1(beta, h, roots[0])).min(top - v1(beta, h, roots[2]));
        assert_relative_eq!(well_depth(&ModelParams::ising(beta, h).unwrap()).unwrap(), shallow, max_relative = 1e-9);
    }
}

#[test]
fn critical_field_separates_one_and_three_wells() {
    let count = |beta: f64, h: f64| {
        let f = |x: f64| x - (beta * x + h).tanh();
        (0..20000).filter(|&i| {
            let (a, b) = (-2.0 + 4.0 * i as f64 / 20000.0, -2.0 + 4.0 * (i + 1) as f64 / 20000.0);
            f(a) * f(b) < 0.0
        })
        .count()
    };
    for beta in [1.5, 2.0, 4.0] {
        let hc = critical_field(beta).unwrap();
        assert_eq!(count(beta, hc * 0.999), 3);
        assert_eq!(count(beta, hc * 1.001), 1);
        let p = ModelParams::ising(beta, hc * 0.99).unwrap();
        let minima = critical_points(&p).iter().filter(|c| c.kind == CriticalKind::Minimum).count();
        assert_eq!(minima, 2);
    }
}

/// Dense full generator on {±1}^N: flip rate `β⁻¹(ρ_s + ρ_t)/ρ_s`.
fn dense_full_gap(n: usize, beta: f64, h: f64) -> f64 {
    let dim = 1 << n;
    let nf = n as f64;
    let log_rho: Vec<f64> = (0..dim)
        .map(|s: usize| {
            let m = (2.0 * s.count_ones() as f64 - nf) / nf;
            0.5 * nf * beta * m * m + nf * h * m
        })
        .collect();
    let mx = log_rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rho: Vec<f64> = log_rho.iter().map(|l| (l - mx).exp()).collect();
    let mut q = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..dim {
        for x in 0..n {
            let t = s ^ (1 << x);
            let w = (rho[s] + rho[t]) / beta;
            q[(s, s)] += w / rho[s];
            q[(s, t)] -= w / (rho[s] * rho[t]).sqrt();
        }
    }
    let mut e: Vec<f64> = q.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(e[0].abs() < 1e-10);
    e[1]
}

#[test]
fn gaps_against_dense_generator() {
    for n in [1, 2, 3, 5, 8] {
        for (beta, h) in [(0.5, 0.0), (2.0, 0.0), (1.0, 0.3)] {
            let oracle = dense_full_gap(n, beta, h);
            assert_relative_eq!(full_gap(n, beta, h).unwrap().gap, oracle, max_relative = 1e-9);
            assert_relative_eq!(chain_gap(n, beta, h).unwrap().gap, oracle, max_relative = 1e-9);
        }
    }
}

#[test]
fn chain_against_dense_tridiagonal() {
    // Moderate N where dense double precision still resolves the gap.
    for (n, beta, h) in [(40, 1.2, 0.0), (60, 0.7, 0.4), (30, 2.0, 0.1)] {
        let c = MagnetizationChain::new(n, beta, h).unwrap();
        let p = c.stationary();
        let cond: Vec<f64> = c.log_conductances().iter().map(|l| (l - meanfield_spectra::logspace::log_sum_exp(&c.log_weights)).exp()).collect();
        let m = n + 1;
        let mut a = DMatrix::<f64>::zeros(m, m);
        for e in 0..n {
            a[(e, e)] += cond[e] / p[e];
            a[(e + 1, e + 1)] += cond[e] / p[e + 1];
            let off = -cond[e] / (p[e] * p[e + 1]).sqrt();
            a[(e, e + 1)] = off;
            a[(e + 1, e)] = off;
        }
        let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_relative_eq!(chain_gap(n, beta, h).unwrap().gap, ev[1], max_relative = 1e-8);
    }
}

/// Composite Simpson with `m` panels on [a, b].
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn renormalized_expectations_against_simpson() {
    for (beta, h, n) in [(2.0, 0.3, 50), (0.8, 0.0, 200), (1.0, 0.0, 1000)] {
        let nf = n as f64;
        let vmin = (0..4001).map(|i| v1(beta, h, -3.0 + 6.0 * i as f64 / 4000.0)).fold(f64::INFINITY, f64::min);
        let w = |x: f64| (-nf * (v1(beta, h, x) - vmin)).exp();
        let z = simpson(w, -3.0, 3.0, 200_000);
        let m = RenormalizedMeasure::new(&ModelParams::ising(beta, h).unwrap(), n).unwrap();
        for g in [|x: f64| x, |x: f64| x * x, |x: f64| (2.0 * x).cos()] {
            let oracle = simpson(|x| g(x) * w(x), -3.0, 3.0, 200_000) / z;
            assert_relative_eq!(expect_nu(&m, g).unwrap(), oracle, epsilon = 1e-10, max_relative = 1e-8);
        }
    }
}

#[test]
fn subcritical_measure_is_nearly_gaussian() {
    // ν_N ≈ N(0, 1/(N V''(0))) with V''(0) = β(1 − β).
    let (beta, n) = (0.5, 20_000);
    let sd = 1.0 / (n as f64 * beta * (1.0 - beta)).sqrt();
    let gauss = Normal::new(0.0, sd).unwrap();
    let m = RenormalizedMeasure::new(&ModelParams::ising(beta, 0.0).unwrap(), n).unwrap();
    for k in [0.5, 1.0, 2.0] {
        let x = k * sd;
        let tail = expect_nu(&m, |y| if y > x { 1.0 } else { 0.0 }).unwrap();
        assert_relative_eq!(tail, gauss.sf(x), max_relative = 0.02);
    }
}

#[test]
fn muckenhoupt_near_gaussian_limit() {
    // Poincaré constant of a Gaussian equals its variance; B lies within [c/4, 2c].
    let (beta, n) = (0.5, 4000);
    let c = 1.0 / (n as f64 * beta * (1.0 - beta));
    let b = ineq_constants(&ModelParams::ising(beta, 0.0).unwrap(), n).unwrap().b();
    assert!(b >= c / 4.0 && b <= 2.0 * c, "B={b}, c={c}");
}

#[test]
fn position_matrix_against_ladder_algebra() {
    // ⟨m|x²|m⟩ = (2m+1)/2 and ⟨m|x²|m+2⟩ = √((m+1)(m+2))/2 in unit oscillator length.
    let x2 = position_power_matrix(&OscillatorBasis::unit(20, 1.0).unwrap(), 2).unwrap();
    for m in 0..18 {
        assert_relative_eq!(x2[(m, m)], (2 * m + 1) as f64 / 2.0, max_relative = 1e-13);
        assert_relative_eq!(x2[(m, m + 2)], (((m + 1) * (m + 2)) as f64).sqrt() / 2.0, max_relative = 1e-13);
        assert_eq!(x2[(m, m + 1)], 0.0);
    }
}

#[test]
fn anharmonic_oscillator_reference_values() {
    // −d² + x⁴: tabulated ground and first excited levels.
    let r = solve(&OperatorSpec::polynomial(vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap(), 2).unwrap();
    assert_relative_eq!(r.eigenvalues[0], 1.0603620904841828, max_relative = 1e-9);
    assert_relative_eq!(r.eigenvalues[1], 3.799673029801394, max_relative = 1e-9);
}

#[test]
fn hydrogen_free_radial_oscillator() {
    // −Δ + r² in R^3 at angular momentum ℓ: 2(2k + ℓ) + 3.
    for l in 0..3 {
        let r = solve_radial(3, l, &[0.0, 0.0, 1.0], 3).unwrap();
        for (k, e) in r.eigenvalues.iter().enumerate() {
            assert_relative_eq!(*e, (4 * k + 2 * l + 3) as f64, max_relative = 1e-5);
        }
    }
}
