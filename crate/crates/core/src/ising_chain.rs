//! Exact spectral gaps of the mean-field Ising generator.
//!
//! The generator is handled through its quadratic form
//! `β^{-1} Σ_σ ρ(σ) Σ_x (f(σ) − f(σ^x))²` and the mass `Σ ρ f²`. Functions of
//! the mean spin form an invariant subspace, on which the form becomes a
//! birth-death chain over the N+1 magnetization levels.

use crate::error::{Error, Result};
use crate::linalg::{birth_death_log_gap, lanczos_lowest};
use crate::logspace::{log_add, log_sum_exp, SignedLog};
use crate::measures::RenormalizedMeasure;
use crate::potential::{critical_field, ising_roots, ModelParams};
use crate::specialfn::{digamma, ln_binomial};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// How a gap value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    FullExact,
    ChainExact,
    TrialUpper,
    Schrodinger,
    /// Magnetization trial bound from the renormalized measure.
    Bound,
}

impl GapMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            GapMethod::FullExact => "full_exact",
            GapMethod::ChainExact => "chain_exact",
            GapMethod::TrialUpper => "trial_upper",
            GapMethod::Schrodinger => "schrodinger",
            GapMethod::Bound => "bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub gap: f64,
    /// `log gap`, exact even when `gap` underflows.
    pub log_gap: f64,
    pub method: GapMethod,
    pub n_spins: usize,
    pub params: ModelParams,
}

impl GapEstimate {
    pub fn from_log(log_gap: f64, method: GapMethod, n_spins: usize, params: ModelParams) -> Self {
        GapEstimate { gap: log_gap.exp(), log_gap, method, n_spins, params }
    }
}

/// Lumped chain on levels `i ∈ {−1, −1+2/N, …, 1}` with weights
/// `log η(i) = log C(N, k_i) − (Nβ/2)(1 − i²) + N h i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationChain {
    pub n_spins: usize,
    pub beta: f64,
    pub h: f64,
    pub levels: Vec<f64>,
    pub log_weights: Vec<f64>,
    pub up_counts: Vec<usize>,
}

impl MagnetizationChain {
    pub fn new(n_spins: usize, beta: f64, h: f64) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::Invalid("N must be at least 1".into()));
        }
        if !(beta > 0.0) || !beta.is_finite() || !h.is_finite() {
            return Err(Error::Invalid(format!("need beta > 0 and finite h, got beta={beta}, h={h}")));
        }
        let nf = n_spins as f64;
        let up_counts: Vec<usize> = (0..=n_spins).collect();
        // (2k − N)/N and the mirrored binomial make h = 0 weights exactly even.
        let levels: Vec<f64> = up_counts.iter().map(|&k| (2 * k as i64 - n_spins as i64) as f64 / nf).collect();
        let log_weights = up_counts
            .iter()
            .zip(&levels)
            .map(|(&k, &i)| ln_binomial(n_spins as u64, k.min(n_spins - k) as u64) - 0.5 * nf * beta * (1.0 - i * i) + nf * h * i)
            .collect();
        Ok(MagnetizationChain { n_spins, beta, h, levels, log_weights, up_counts })
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::ising(self.beta, self.h).expect("validated in new")
    }

    /// Stationary probabilities of the levels.
    pub fn stationary(&self) -> Vec<f64> {
        let z = log_sum_exp(&self.log_weights);
        self.log_weights.iter().map(|w| (w - z).exp()).collect()
    }

    /// `log C_e` for the edge between levels e and e+1:
    /// `C_e = β^{-1}(π_e (N − k_e) + π_{e+1} k_{e+1})`.
    pub fn log_conductances(&self) -> Vec<f64> {
        let n = self.n_spins;
        (0..n)
            .map(|e| {
                let a = self.log_weights[e] + ((n - self.up_counts[e]) as f64).ln();
                let b = self.log_weights[e + 1] + (self.up_counts[e + 1] as f64).ln();
                log_add(a, b) - self.beta.ln()
            })
            .collect()
    }

    /// Log jump rates (up, down) of the reversible chain with these
    /// conductances: `rate(e → e+1) = C_e/π_e`, `rate(e+1 → e) = C_e/π_{e+1}`.
    pub fn log_rates(&self) -> (Vec<f64>, Vec<f64>) {
        let c = self.log_conductances();
        let up = (0..self.n_spins).map(|e| c[e] - self.log_weights[e]).collect();
        let down = (0..self.n_spins).map(|e| c[e] - self.log_weights[e + 1]).collect();
        (up, down)
    }

    /// `max_e |log(π_e r_up(e)) − log(π_{e+1} r_down(e+1))|`.
    pub fn detailed_balance_residual(&self) -> f64 {
        let (up, down) = self.log_rates();
        (0..self.n_spins)
            .map(|e| ((self.log_weights[e] + up[e]) - (self.log_weights[e + 1] + down[e])).abs())
            .fold(0.0, f64::max)
    }

    /// Level with the largest weight; ties go to the largest level.
    pub fn argmax(&self) -> f64 {
        let mut best = 0;
        for (i, w) in self.log_weights.iter().enumerate() {
            if *w >= self.log_weights[best] {
                best = i;
            }
        }
        self.levels[best]
    }

    /// Rayleigh quotient `form(g)/Var(g)` for a level function given in
    /// signed-log form; returns the log.
    pub fn log_rayleigh(&self, g: &[SignedLog]) -> Result<f64> {
        if g.len() != self.levels.len() {
            return Err(Error::Size(format!("{} values for {} levels", g.len(), self.levels.len())));
        }
        let c = self.log_conductances();
        let form: Vec<f64> = (0..self.n_spins).map(|e| 2.0 * (g[e + 1] - g[e]).log_abs + c[e]).collect();
        let z = log_sum_exp(&self.log_weights);
        let mut mean = SignedLog::ZERO;
        for (v, w) in g.iter().zip(&self.log_weights) {
            mean = mean + v.scale_log(w - z);
        }
        let var: Vec<f64> = g.iter().zip(&self.log_weights).map(|(v, w)| 2.0 * (*v - mean).log_abs + w - z).collect();
        let lv = log_sum_exp(&var);
        if lv == f64::NEG_INFINITY {
            return Err(Error::Regime("trial function is constant on the chain".into()));
        }
        Ok(log_sum_exp(&form) - z - lv)
    }

    /// `Var_ρ(f(σ̄))` from the level weights.
    pub fn variance_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        let p = self.stationary();
        let mean: f64 = p.iter().zip(&self.levels).map(|(w, &i)| w * f(i)).sum();
        p.iter().zip(&self.levels).map(|(w, &i)| w * (f(i) - mean).powi(2)).sum()
    }
}

/// Gap of the full generator on `{±1}^N` for `N ≤ 12`.
pub fn full_gap(n_spins: usize, beta: f64, h: f64) -> Result<GapEstimate> {
    if n_spins == 0 || n_spins > 12 {
        return Err(Error::Size(format!("full diagonalization needs 1 <= N <= 12, got {n_spins}")));
    }
    let params = ModelParams::ising(beta, h)?;
    let n = n_spins;
    let nf = n as f64;
    let dim = 1usize << n;
    let log_rho: Vec<f64> = (0..dim)
        .map(|s| {
            let m = (2 * (s as u32).count_ones() as i64 - n as i64) as f64 / nf;
            0.5 * nf * beta * m * m + nf * h * m
        })
        .collect();
    let z = log_sum_exp(&log_rho);
    let rho: Vec<f64> = log_rho.iter().map(|l| (l - z).exp()).collect();
    let ground: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let inv_beta = 1.0 / beta;
    // Symmetrized form D^{-1/2} Q D^{-1/2}.
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|s| {
                let mut acc = 0.0;
                for x in 0..n {
                    let t = s ^ (1 << x);
                    let w = rho[s] + rho[t];
                    acc += w / rho[s] * v[s] - w / (rho[s] * rho[t]).sqrt() * v[t];
                }
                inv_beta * acc
            })
            .collect()
    };
    let vals = lanczos_lowest(apply, dim, &[ground], 1, 1e-14)?;
    let gap = vals[0];
    if !(gap > 0.0) {
        return Err(Error::NonConvergence(format!("full generator returned non-positive gap {gap}")));
    }
    Ok(GapEstimate::from_log(gap.ln(), GapMethod::FullExact, n_spins, params))
}

/// Gap of the magnetization chain (log-domain, any N).
pub fn chain_gap(n_spins: usize, beta: f64, h: f64) -> Result<GapEstimate> {
    let chain = MagnetizationChain::new(n_spins, beta, h)?;
    let log_gap = birth_death_log_gap(&chain.log_weights, &chain.log_conductances())?;
    Ok(GapEstimate::from_log(log_gap, GapMethod::ChainExact, n_spins, chain.params()))
}

/// Staircase trial function on the levels, as log-values (`−inf` for 0).
///
/// At zero field `g(m) = Σ_{0 ≤ i ≤ m, i ≤ γ₃} 1/η(i)`; for `h > 0`
/// `g(m) = Σ_{m < i < γ₃, i ≥ γ₁} 1/η(i)`.
pub fn trial_function(chain: &MagnetizationChain) -> Result<Vec<f64>> {
    let (beta, h) = (chain.beta, chain.h);
    if !(beta > 1.0) || h < 0.0 || h >= critical_field(beta)? {
        return Err(Error::Regime(format!("no double well at beta={beta}, h={h}")));
    }
    let [g1, _, g3] = ising_roots(&chain.params())?;
    let lw = &chain.log_weights;
    let m = chain.levels.len();
    let mut out = vec![f64::NEG_INFINITY; m];
    if h == 0.0 {
        let mut acc = f64::NEG_INFINITY;
        for j in 0..m {
            let i = chain.levels[j];
            if i >= 0.0 && i <= g3 {
                acc = log_add(acc, -lw[j]);
            }
            out[j] = acc;
        }
    } else {
        let mut acc = f64::NEG_INFINITY;
        for j in (0..m).rev() {
            out[j] = acc;
            let i = chain.levels[j];
            if i < g3 && i >= g1 {
                acc = log_add(acc, -lw[j]);
            }
        }
    }
    if out.iter().all(|v| *v == f64::NEG_INFINITY) || out.iter().all(|v| *v == out[0]) {
        return Err(Error::Regime("trial function collapses: empty level window".into()));
    }
    Ok(out)
}

/// Rayleigh quotient of the staircase trial function: an upper bound on the
/// chain gap.
pub fn trial_rayleigh(n_spins: usize, beta: f64, h: f64) -> Result<GapEstimate> {
    let chain = MagnetizationChain::new(n_spins, beta, h)?;
    let g: Vec<SignedLog> = trial_function(&chain)?.into_iter().map(SignedLog::from_log).collect();
    let lg = chain.log_rayleigh(&g)?;
    Ok(GapEstimate::from_log(lg, GapMethod::TrialUpper, n_spins, chain.params()))
}

/// `ζ_{N,h}(s) = ∂_s log η_{N,h}(s)` through digamma:
/// `N(βs + h) − (N/2)[ψ(1 + N(1+s)/2) − ψ(1 + N(1−s)/2)]`.
pub fn zeta_log_derivative(n_spins: usize, beta: f64, h: f64, s: f64) -> Result<f64> {
    if !(s.abs() < 1.0) {
        return Err(Error::Domain(format!("zeta needs |s| < 1, got {s}")));
    }
    let nf = n_spins as f64;
    let d = digamma(1.0 + 0.5 * nf * (1.0 + s))? - digamma(1.0 + 0.5 * nf * (1.0 - s))?;
    Ok(nf * (beta * s + h) - 0.5 * nf * d)
}

/// Magnetization level maximizing `η_{N,h}`.
pub fn eta_argmax(n_spins: usize, beta: f64, h: f64) -> Result<f64> {
    Ok(MagnetizationChain::new(n_spins, beta, h)?.argmax())
}

/// Both sides of the Fourier-subspace variance inequality, on random
/// functions supported on `|S| = k`, plus the magnetization identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierReport {
    pub n_spins: usize,
    pub beta: f64,
    pub k: usize,
    pub trials: usize,
    /// Largest observed `Var_ν(E_μ f) / Σ_x E_ρ|∇^{(x)} f|²`.
    pub max_ratio: f64,
    /// `N/(4k)`.
    pub stated_constant: f64,
    /// `N/(4k²)`.
    pub proof_constant: f64,
    pub pass: bool,
    /// `Var_ν(E_μ M)` from the Fourier expansion, and `N E_ν(tanh²(βφ))`.
    pub magnetization_variance: (f64, f64),
    /// `Σ_x E_ρ|∇^{(x)} M|²` for `M = N^{-1/2} Σ σ_x`.
    pub magnetization_dirichlet: f64,
}

fn subsets_of_size(n: usize, k: usize) -> Vec<usize> {
    (0..1usize << n).filter(|s| s.count_ones() as usize == k).collect()
}

/// `Σ_x E_ρ (f(σ) − f(σ^x))²` by enumeration.
fn hypercube_dirichlet(n: usize, rho: &[f64], f: &[f64]) -> f64 {
    let mut total = 0.0;
    for s in 0..rho.len() {
        for x in 0..n {
            let d = f[s] - f[s ^ (1 << x)];
            total += rho[s] * d * d;
        }
    }
    total
}

/// Values of `Σ_S c_S χ_S` on every configuration (bit set = spin up).
fn walsh_sum(n: usize, sets: &[usize], coef: &[f64]) -> Vec<f64> {
    (0..1usize << n)
        .map(|s| {
            sets.iter()
                .zip(coef)
                .map(|(&set, c)| {
                    // χ_S(σ) = (−1)^{#down spins in S}
                    let down = (set & !s).count_ones();
                    if down % 2 == 0 { *c } else { -*c }
                })
                .sum()
        })
        .collect()
}

pub fn fourier_subspace_check(n_spins: usize, beta: f64, k: usize, trials: usize, seed: u64) -> Result<FourierReport> {
    if n_spins == 0 || n_spins > 12 {
        return Err(Error::Size(format!("Fourier check needs 1 <= N <= 12, got {n_spins}")));
    }
    if k > n_spins {
        return Err(Error::Invalid(format!("k = {k} exceeds N = {n_spins}")));
    }
    let n = n_spins;
    let nf = n as f64;
    let params = ModelParams::ising(beta, 0.0)?;
    let measure = RenormalizedMeasure::new(&params, n)?;
    let t_moment = |p: i32| measure.expect(|x| (beta * x).tanh().powi(p));
    let (ek, e2k) = (t_moment(k as i32)?, t_moment(2 * k as i32)?);

    let dim = 1usize << n;
    let log_rho: Vec<f64> = (0..dim)
        .map(|s| {
            let m = (2 * s.count_ones() as i64 - n as i64) as f64 / nf;
            0.5 * nf * beta * m * m
        })
        .collect();
    let z = log_sum_exp(&log_rho);
    let rho: Vec<f64> = log_rho.iter().map(|l| (l - z).exp()).collect();

    let sets = subsets_of_size(n, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let coef: Vec<f64> = sets.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
        let f = walsh_sum(n, &sets, &coef);
        let dir = hypercube_dirichlet(n, &rho, &f);
        // Every χ_S has the same mean tanh^k under μ_φ, so E_μ f = (Σ c) tanh^k.
        let sum: f64 = coef.iter().sum();
        let var = sum * sum * (e2k - ek * ek);
        if dir > 0.0 {
            max_ratio = max_ratio.max(var / dir);
        }
    }

    let singles = subsets_of_size(n, 1);
    let mag = walsh_sum(n, &singles, &vec![1.0 / nf.sqrt(); n]);
    let magnetization_dirichlet = hypercube_dirichlet(n, &rho, &mag);
    let e1 = t_moment(1)?;
    let e2 = t_moment(2)?;
    let magnetization_variance = (nf * (e2 - e1 * e1), nf * e2);

    let stated_constant = if k == 0 { f64::INFINITY } else { nf / (4.0 * k as f64) };
    let proof_constant = if k == 0 { f64::INFINITY } else { nf / (4.0 * (k * k) as f64) };
    Ok(FourierReport {
        n_spins,
        beta,
        k,
        trials,
        max_ratio,
        stated_constant,
        proof_constant,
        pass: max_ratio <= stated_constant * (1.0 + 1e-9),
        magnetization_variance,
        magnetization_dirichlet,
    })
}

/// `Var_ρ(f(σ̄))` two ways: exactly from the chain, and as
/// `E_ν Var_μ(f) + Var_ν E_μ(f)` with the binomial law of the up-count
/// under the product measure `μ_φ`.
pub fn variance_decomposition(n_spins: usize, beta: f64, h: f64, f: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let chain = MagnetizationChain::new(n_spins, beta, h)?;
    let exact = chain.variance_of(&f);
    let measure = RenormalizedMeasure::new(&chain.params(), n_spins)?;
    let n = n_spins;
    let nf = n as f64;
    let lb: Vec<f64> = (0..=n).map(|k| ln_binomial(n as u64, k as u64)).collect();
    let moments = |phi: f64| {
        // Up-spin probability (1 + tanh z)/2 = 1/(1 + e^{−2z}), in stable log form.
        let z = beta * phi + h;
        let softplus = |x: f64| x.max(0.0) + (-x.abs()).exp().ln_1p();
        let (lp, lq) = (-softplus(-2.0 * z), -softplus(2.0 * z));
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (k, &lbk) in lb.iter().enumerate() {
            let w = (lbk + k as f64 * lp + (n - k) as f64 * lq).exp();
            let v = f((2 * k) as f64 / nf - 1.0);
            m1 += w * v;
            m2 += w * v * v;
        }
        (m1, m2 - m1 * m1)
    };
    let e_var = measure.expect(|x| moments(x).1)?;
    let var_e = measure.variance(|x| moments(x).0)?;
    Ok((exact, e_var + var_e))
}
