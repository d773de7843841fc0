use meanfield_spectra::funcineq::transfer_constants;
use meanfield_spectra::ising_chain::{chain_gap, variance_decomposition, zeta_log_derivative, GapMethod, MagnetizationChain};
use meanfield_spectra::logspace::{log_add, log_sum_exp};
use meanfield_spectra::oscillator::OscillatorBasis;
use meanfield_spectra::potential::{eval_v, grad_v, hess_v, ModelParams};
use meanfield_spectra::scaling::{fit_exponential_rate, fit_power_law, GapPoint, GapSeries};
use meanfield_spectra::schrodinger::{solve_polynomial, OperatorSpec};
use meanfield_spectra::specialfn::{bessel_ratio, ln_gamma, log_bessel_i};
use proptest::prelude::*;

fn log_r() -> impl Strategy<Value = f64> {
    -3.0f64..3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bessel_ratio_scaled_is_increasing(n in 2usize..=8, a in log_r(), d in 1e-3f64..1.0) {
        let nu = 0.5 * n as f64 - 1.0;
        let (r1, r2) = (10f64.powf(a), 10f64.powf(a + d));
        prop_assert!(r1 / bessel_ratio(nu, r1).unwrap() < r2 / bessel_ratio(nu, r2).unwrap());
    }

    #[test]
    fn turan_inequality(n in 2usize..=8, a in log_r()) {
        let nu = 0.5 * n as f64;
        let z = 10f64.powf(a);
        prop_assert!(2.0 * log_bessel_i(nu, z).unwrap() > log_bessel_i(nu - 1.0, z).unwrap() + log_bessel_i(nu + 1.0, z).unwrap());
        prop_assert!(bessel_ratio(nu, z).unwrap() < bessel_ratio(nu - 1.0, z).unwrap());
    }

    #[test]
    fn bessel_ratio_bounded_by_one(nu in -0.5f64..6.0, a in log_r()) {
        let r = bessel_ratio(nu, 10f64.powf(a)).unwrap();
        prop_assert!(r > 0.0 && r < 1.0);
    }

    #[test]
    fn ln_gamma_recurrence(x in 0.05f64..200.0) {
        prop_assert!((ln_gamma(x + 1.0) - ln_gamma(x) - x.ln()).abs() < 1e-11 * (1.0 + ln_gamma(x + 1.0).abs()));
    }

    #[test]
    fn log_add_matches_direct(a in -30.0f64..30.0, b in -30.0f64..30.0) {
        let direct = (a.exp() + b.exp()).ln();
        prop_assert!((log_add(a, b) - direct).abs() < 1e-13 * (1.0 + direct.abs()));
        prop_assert!((log_sum_exp(&[a, b]) - direct).abs() < 1e-13 * (1.0 + direct.abs()));
    }

    #[test]
    fn gradient_and_hessian_match_differences(
        n in 1usize..=4,
        beta in 0.3f64..6.0,
        field in prop::collection::vec(-0.8f64..0.8, 4),
        x in prop::collection::vec(-1.2f64..1.2, 4),
    ) {
        let p = ModelParams::new(n, beta, field[..n].to_vec()).unwrap();
        let x = &x[..n];
        let (g, hm) = (grad_v(&p, x), hess_v(&p, x));
        let s = 1e-5;
        for i in 0..n {
            let (mut a, mut b) = (x.to_vec(), x.to_vec());
            a[i] += s;
            b[i] -= s;
            let fd = (eval_v(&p, &a) - eval_v(&p, &b)) / (2.0 * s);
            prop_assert!((fd - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()), "grad {i}: {fd} vs {}", g[i]);
            let (ga, gb) = (grad_v(&p, &a), grad_v(&p, &b));
            for j in 0..n {
                let fd2 = (ga[j] - gb[j]) / (2.0 * s);
                prop_assert!((fd2 - hm[(j, i)]).abs() < 1e-5 * (1.0 + hm[(j, i)].abs()));
            }
        }
    }

    #[test]
    fn hessian_is_symmetric(n in 2usize..=4, beta in 0.3f64..6.0, x in prop::collection::vec(-1.2f64..1.2, 4)) {
        let p = ModelParams::new(n, beta, vec![0.1; n]).unwrap();
        let hm = hess_v(&p, &x[..n]);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((hm[(i, j)] - hm[(j, i)]).abs() < 1e-12 * (1.0 + hm[(i, j)].abs()));
            }
        }
    }

    #[test]
    fn eta_weights_symmetric_at_zero_field(n in 1usize..400, beta in 0.1f64..5.0) {
        let c = MagnetizationChain::new(n, beta, 0.0).unwrap();
        let w = &c.log_weights;
        for i in 0..w.len() {
            prop_assert_eq!(w[i], w[w.len() - 1 - i]);
        }
    }

    #[test]
    fn zeta_is_odd_at_zero_field(n in 2usize..2000, beta in 0.1f64..5.0, s in -0.95f64..0.95) {
        let a = zeta_log_derivative(n, beta, 0.0, s).unwrap();
        let b = zeta_log_derivative(n, beta, 0.0, -s).unwrap();
        prop_assert!((a + b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn detailed_balance_holds(n in 1usize..300, beta in 0.1f64..4.0, h in -1.0f64..1.0) {
        prop_assert!(MagnetizationChain::new(n, beta, h).unwrap().detailed_balance_residual() < 1e-10);
    }

    #[test]
    fn chain_gap_is_field_reflection_invariant(n in 1usize..200, beta in 0.1f64..3.0, h in 0.0f64..1.0) {
        let a = chain_gap(n, beta, h).unwrap().log_gap;
        let b = chain_gap(n, beta, -h).unwrap().log_gap;
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn transfer_is_monotone(l1 in 0.01f64..100.0, f in 1.01f64..10.0, n in 1usize..10_000, beta in 0.1f64..5.0) {
        let a = transfer_constants(l1, n, beta, 4.0).unwrap();
        let b = transfer_constants(l1 * f, n, beta, 4.0).unwrap();
        prop_assert!(b.sgi < a.sgi && b.lsi < a.lsi);
        prop_assert!(a.lsi >= a.sgi);
    }

    #[test]
    fn fits_recover_synthetic_laws(c in 0.1f64..10.0, k in -2.0f64..2.0, rate in 0.01f64..1.0) {
        let p = ModelParams::ising(2.0, 0.0).unwrap();
        let ns = [100usize, 200, 400, 800, 1600, 3200];
        let pw: Vec<(usize, f64)> = ns.iter().map(|&n| (n, c * (n as f64).powf(k))).collect();
        let f = fit_power_law(&GapSeries::from_gaps(&p, GapMethod::ChainExact, &pw).unwrap()).unwrap();
        prop_assert!((f.value - k).abs() < 1e-9);
        // Log-gaps, since e^{−rate·N} underflows at the top of the sweep.
        let ex = ns.iter().map(|&n| GapPoint { n_spins: n, log_gap: c.ln() - rate * n as f64, method: GapMethod::ChainExact }).collect();
        let f = fit_exponential_rate(&GapSeries::new(&p, ex).unwrap()).unwrap();
        prop_assert!((f.value - rate).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn variance_decomposes(
        n in 1usize..=10,
        beta in 0.1f64..3.0,
        h in -0.5f64..0.5,
        c in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let f = |m: f64| c[0] + c[1] * m + c[2] * m * m + c[3] * m * m * m;
        let (exact, split) = variance_decomposition(n, beta, h, f).unwrap();
        prop_assert!((exact - split).abs() <= 1e-8 * (1e-12 + exact.abs()), "{exact} vs {split}");
    }

    #[test]
    fn harmonic_levels_independent_of_basis_frequency(w in 0.3f64..3.0, omega in 0.5f64..2.0) {
        // −d² + w²x²: levels (2k+1)w regardless of the basis frequency.
        let spec = OperatorSpec::polynomial(vec![0.0, 0.0, w * w]).unwrap();
        let r = solve_polynomial(&spec, &OscillatorBasis::unit(160, omega).unwrap(), 4).unwrap();
        for (k, e) in r.eigenvalues.iter().enumerate() {
            prop_assert!((e - (2 * k + 1) as f64 * w).abs() < 1e-8 * (1.0 + e), "level {k}: {e}");
        }
    }
}
