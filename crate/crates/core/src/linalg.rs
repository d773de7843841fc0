//! Eigen-solvers for the structured operators that show up here: symmetric
//! tridiagonal matrices (Sturm bisection), reversible birth-death chains with
//! exponentially varying weights (log-domain inverse iteration), and sparse
//! symmetric operators given only as a matvec (Lanczos).

use crate::error::{Error, Result};
use crate::logspace::{log_add, SignedLog};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Real symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Size(format!("tridiagonal with {} diagonal and {} off-diagonal entries", diag.len(), off.len())));
        }
        Ok(SymTridiag { diag, off })
    }

    /// `diag(π)^{-1/2} Q diag(π)^{-1/2}` for the reversible chain with weights
    /// `π` and edge conductances `c`, both given as logs.
    pub fn from_birth_death(log_pi: &[f64], log_c: &[f64]) -> Self {
        let m = log_pi.len();
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m.saturating_sub(1)];
        for e in 0..m.saturating_sub(1) {
            let (lc, p0, p1) = (log_c[e], log_pi[e], log_pi[e + 1]);
            diag[e] += (lc - p0).exp();
            diag[e + 1] += (lc - p1).exp();
            off[e] = -(lc - 0.5 * (p0 + p1)).exp();
        }
        SymTridiag { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let (lo, hi) = self.bounds();
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + lo.abs().max(hi.abs()));
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                d = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / d;
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based), bisected to roundoff.
    pub fn eigenvalue(&self, index: usize) -> Result<f64> {
        if index >= self.len() {
            return Err(Error::Size(format!("eigenvalue {index} of a {}x{} matrix", self.len(), self.len())));
        }
        let (mut lo, mut hi) = self.bounds();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * scale * 1e-3 {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Lowest `k` eigenvalues, ascending.
    pub fn lowest(&self, k: usize) -> Result<Vec<f64>> {
        (0..k).map(|i| self.eigenvalue(i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Unit eigenvector for an eigenvalue estimate, by two steps of inverse
    /// iteration with a slightly perturbed shift.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let (lo, hi) = self.bounds();
        let shift = lambda - 1e-10 * (hi - lo).max(1e-300);
        let mut x = vec![1.0; n];
        for _ in 0..3 {
            x = thomas_solve(self, shift, &x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        if x.iter().sum::<f64>() < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        x
    }
}

/// Solve `(T − s I) x = b` by the Thomas algorithm with a pivot guard.
fn thomas_solve(t: &SymTridiag, s: f64, b: &[f64]) -> Vec<f64> {
    let n = t.len();
    let guard = f64::EPSILON * (t.bounds().1 - t.bounds().0).abs().max(1e-300);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = t.diag[0] - s;
    if piv.abs() < guard {
        piv = guard;
    }
    if n > 1 {
        c[0] = t.off[0] / piv;
    }
    d[0] = b[0] / piv;
    for i in 1..n {
        let mut p = t.diag[i] - s - t.off[i - 1] * c[i - 1];
        if p.abs() < guard {
            p = guard;
        }
        if i + 1 < n {
            c[i] = t.off[i] / p;
        }
        d[i] = (b[i] - t.off[i - 1] * d[i - 1]) / p;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Spectral gap of a reversible birth-death chain given in log form.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathGap {
    pub log_gap: f64,
    pub iterations: usize,
    /// Gap eigenvector, centred and scaled so its largest entry has modulus 1.
    pub vector: Vec<SignedLog>,
}

impl BirthDeathGap {
    pub fn gap(&self) -> f64 {
        self.log_gap.exp()
    }
}

/// Running signed sum held as separate log-accumulators for each sign.
#[derive(Clone, Copy)]
struct SignedAcc {
    pos: f64,
    neg: f64,
}

impl SignedAcc {
    const ZERO: SignedAcc = SignedAcc { pos: f64::NEG_INFINITY, neg: f64::NEG_INFINITY };

    fn push(&mut self, v: SignedLog) {
        if v.sign > 0.0 {
            self.pos = log_add(self.pos, v.log_abs);
        } else if v.sign < 0.0 {
            self.neg = log_add(self.neg, v.log_abs);
        }
    }

    fn value(self) -> SignedLog {
        SignedLog::from_log(self.pos) - SignedLog::from_log(self.neg)
    }

    fn gross(self) -> f64 {
        log_add(self.pos, self.neg)
    }
}

/// Smallest nonzero eigenvalue of `form(g) = Σ_e c_e (g_{e+1} − g_e)²`
/// relative to `mass(g) = Σ_j π_j g_j²`, given `log π` (length M) and
/// `log c` (length M−1).
///
/// Inverse iteration on mean-zero vectors. The solve is exact: the flux
/// through edge e equals a partial sum of `π f`, taken from whichever end has
/// the smaller gross magnitude so that cancellation stays local. Everything is
/// carried in log form, so gaps like `e^{−1000}` are resolved to full
/// relative precision.
pub fn birth_death_gap(log_pi: &[f64], log_c: &[f64]) -> Result<BirthDeathGap> {
    let m = log_pi.len();
    if m < 2 || log_c.len() + 1 != m {
        return Err(Error::Size(format!("birth-death chain with {m} states and {} edges", log_c.len())));
    }
    if log_pi.iter().chain(log_c).any(|v| v.is_nan() || *v == f64::INFINITY) || log_c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("birth-death weights must be finite".into()));
    }
    let log_mass = crate::logspace::log_sum_exp(log_pi);
    let anchor = (0..m).fold(0, |best, j| if log_pi[j] > log_pi[best] { j } else { best });
    let mut g: Vec<SignedLog> = (0..m).map(|j| SignedLog::from_f64(j as f64 - 0.5 * (m - 1) as f64)).collect();
    let mut flux = vec![SignedLog::ZERO; m - 1];
    let mut prev = f64::NAN;
    let max_iter = 5000;
    for it in 1..=max_iter {
        // f = g − E_π g
        let mut acc = SignedAcc::ZERO;
        for j in 0..m {
            acc.push(g[j].scale_log(log_pi[j]));
        }
        let mean = acc.value().scale_log(-log_mass);
        let terms: Vec<SignedLog> = (0..m).map(|j| (g[j] - mean).scale_log(log_pi[j])).collect();

        // suffix sums; prefix sums are formed on the fly
        let mut suffix = vec![SignedAcc::ZERO; m + 1];
        for j in (0..m).rev() {
            let mut s = suffix[j + 1];
            s.push(terms[j]);
            suffix[j] = s;
        }
        let mut prefix = SignedAcc::ZERO;
        for e in 0..m - 1 {
            prefix.push(terms[e]);
            let right = suffix[e + 1];
            flux[e] = if prefix.gross() <= right.gross() { -prefix.value() } else { right.value() };
        }

        // u_{e+1} = u_e + F_e / c_e, pinned at the heaviest state so that
        // centring never cancels a large offset, then centre
        let mut u = vec![SignedLog::ZERO; m];
        for e in anchor..m - 1 {
            u[e + 1] = u[e] + flux[e].scale_log(-log_c[e]);
        }
        for e in (0..anchor).rev() {
            u[e] = u[e + 1] - flux[e].scale_log(-log_c[e]);
        }
        let mut acc = SignedAcc::ZERO;
        for j in 0..m {
            acc.push(u[j].scale_log(log_pi[j]));
        }
        let mean = acc.value().scale_log(-log_mass);
        for v in u.iter_mut() {
            *v = *v - mean;
        }

        // Rayleigh quotient of u: form = Σ F²/c, mass = Σ π u²
        let form: Vec<f64> = (0..m - 1).map(|e| 2.0 * flux[e].log_abs - log_c[e]).collect();
        let mass: Vec<f64> = (0..m).map(|j| 2.0 * u[j].log_abs + log_pi[j]).collect();
        let log_gap = crate::logspace::log_sum_exp(&form) - crate::logspace::log_sum_exp(&mass);
        if !log_gap.is_finite() {
            return Err(Error::NonConvergence("birth-death iteration lost its vector".into()));
        }

        let top = u.iter().map(|v| v.log_abs).fold(f64::NEG_INFINITY, f64::max);
        g = u.into_iter().map(|v| v.scale_log(-top)).collect();
        let step = (log_gap - prev).abs() / (1.0 + log_gap.abs());
        // past a few hundred steps, accept the roundoff floor
        if it >= 3 && (step <= 1e-14 || (it >= 300 && step <= 1e-11)) {
            return Ok(BirthDeathGap { log_gap, iterations: it, vector: g });
        }
        prev = log_gap;
    }
    Err(Error::NonConvergence(format!("birth-death inverse iteration did not settle in {max_iter} steps")))
}

/// Below this fraction of the matrix norm a Sturm eigenvalue has lost too
/// many digits and the log-domain iteration takes over.
const STURM_FLOOR: f64 = 1e-7;
/// Above this fraction Sturm bisection is accurate to about 1e−12 relative.
const STURM_SAFE: f64 = 1e-3;

/// `log` of the spectral gap of a reversible birth–death chain.
///
/// Well-resolved gaps come from Sturm bisection. Smaller ones come from
/// [`birth_death_gap`], which converges quickly exactly when the gap is
/// well separated from the next mode; it is cross-checked against the Sturm
/// value (or, below the Sturm resolution, required to stay below it).
pub fn birth_death_log_gap(log_pi: &[f64], log_c: &[f64]) -> Result<f64> {
    let t = SymTridiag::from_birth_death(log_pi, log_c);
    if t.len() < 2 {
        return Err(Error::Size("birth-death chain needs at least two states".into()));
    }
    let e1 = t.eigenvalue(1)?;
    let (lo, hi) = t.bounds();
    let norm = lo.abs().max(hi.abs());
    if e1 > STURM_SAFE * norm {
        return Ok(e1.ln());
    }
    let resolved = e1 > STURM_FLOOR * norm;
    match birth_death_gap(log_pi, log_c) {
        Ok(bd) => {
            let consistent = if resolved {
                (bd.gap() - e1).abs() <= 1e-9 * norm
            } else {
                bd.gap() <= 2.0 * STURM_FLOOR * norm
            };
            if consistent {
                Ok(bd.log_gap)
            } else if resolved {
                Ok(e1.ln())
            } else {
                Err(Error::NonConvergence("inverse iteration missed the lowest mode".into()))
            }
        }
        Err(_) if resolved => Ok(e1.ln()),
        Err(e) => Err(e),
    }
}

/// Lowest `k` eigenvalues of a symmetric operator on `R^dim`, restricted to
/// the orthogonal complement of `deflate` (unit vectors), by Lanczos with full
/// reorthogonalization.
pub fn lanczos_lowest(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    dim: usize,
    deflate: &[Vec<f64>],
    k: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let free = dim.saturating_sub(deflate.len());
    if k == 0 || k > free {
        return Err(Error::Size(format!("{k} eigenvalues requested from a {free}-dimensional space")));
    }
    let project = |v: &mut Vec<f64>, basis: &[Vec<f64>]| {
        for _ in 0..2 {
            for q in deflate.iter().chain(basis.iter()) {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
        }
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    project(&mut q, &[]);
    let nq = norm(&q);
    q.iter_mut().for_each(|x| *x /= nq);

    let max_steps = free.min(600);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last: Option<Vec<f64>> = None;
    loop {
        let mut w = apply(&q);
        let a: f64 = w.iter().zip(&q).map(|(x, y)| x * y).sum();
        alpha.push(a);
        basis.push(q.clone());
        project(&mut w, &basis);
        let b = norm(&w);
        let steps = basis.len();

        let check = steps == max_steps || b < 1e-300 || steps.is_multiple_of(10);
        if check && steps >= k {
            let t = DMatrix::from_fn(steps, steps, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut idx: Vec<usize> = (0..steps).collect();
            idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
            let vals: Vec<f64> = idx.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
            let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let resid = idx.iter().take(k).map(|&i| (b * eig.eigenvectors[(steps - 1, i)]).abs()).fold(0.0, f64::max);
            let stalled = last.as_ref().is_some_and(|p: &Vec<f64>| p.iter().zip(&vals).all(|(x, y)| (x - y).abs() <= tol * scale));
            if resid <= tol * scale || b < 1e-300 || steps == max_steps || stalled {
                if resid > 1e3 * tol * scale && !stalled && b >= 1e-300 {
                    return Err(Error::NonConvergence(format!("Lanczos residual {resid:e} after {steps} steps")));
                }
                return Ok(vals);
            }
            last = Some(vals);
        }
        if b < 1e-300 || steps == max_steps {
            return Err(Error::NonConvergence(format!("Krylov space exhausted after {steps} steps")));
        }
        beta.push(b);
        q = w.into_iter().map(|x| x / b).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_matches_dense() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 3.0).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 0.5 + ((i * 3) % 5) as f64 * 0.3).collect();
        let t = SymTridiag::new(diag.clone(), off.clone()).unwrap();
        let dense = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        let mut e: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, v) in t.lowest(n).unwrap().iter().enumerate() {
            assert!((v - e[i]).abs() < 1e-12, "{i}: {v} vs {}", e[i]);
        }
        let x = t.eigenvector(e[0]);
        let r: f64 = t.matvec(&x).iter().zip(&x).map(|(a, b)| (a - e[0] * b).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-10);
    }

    #[test]
    fn birth_death_matches_dense_generalized() {
        // π_j and c_e of moderate size; dense oracle on the symmetrized matrix.
        let log_pi = [0.0, -1.0, 0.5, -0.3, 1.2, 0.1];
        let log_c = [-0.5, 0.2, -1.0, 0.7, 0.0];
        let m = log_pi.len();
        let r = birth_death_gap(&log_pi, &log_c).unwrap();
        let q = DMatrix::from_fn(m, m, |i, j| {
            let c = |e: usize| log_c[e].exp();
            if i == j {
                (if i > 0 { c(i - 1) } else { 0.0 }) + (if i + 1 < m { c(i) } else { 0.0 })
            } else if i + 1 == j {
                -c(i)
            } else if j + 1 == i {
                -c(j)
            } else {
                0.0
            }
        });
        let s = DMatrix::from_fn(m, m, |i, j| q[(i, j)] / (log_pi[i] + log_pi[j]).mul_add(0.5, 0.0).exp());
        let mut e: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(e[0].abs() < 1e-12);
        assert!((r.gap() / e[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn birth_death_resolves_exponentially_small_gaps() {
        // Two equal wells separated by a barrier e^{-L}: the gap is
        // 2c/(π_left·π_right/(π_left+π_right)) to leading order, here 4e^{-L}
        // for unit wells joined by a single weak edge.
        let l = 800.0;
        let log_pi = [0.0, 0.0, 0.0, 0.0];
        let log_c = [5.0, -l, 5.0];
        let r = birth_death_gap(&log_pi, &log_c).unwrap();
        // Strongly coupled pairs act as single states of mass 2: gap = c(1/2+1/2).
        assert!((r.log_gap - (-l)).abs() < 1e-10, "{}", r.log_gap);
    }

    #[test]
    fn lanczos_finds_lowest_of_diagonal() {
        let d: Vec<f64> = (0..200).map(|i| 1.0 + (i as f64).powf(1.3)).collect();
        let v = lanczos_lowest(|x| x.iter().zip(&d).map(|(a, b)| a * b).collect(), 200, &[], 3, 1e-13).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-11 && (v[1] - 2.0).abs() < 1e-11);
        let mut e0 = vec![0.0; 200];
        e0[0] = 1.0;
        let w = lanczos_lowest(|x| x.iter().zip(&d).map(|(a, b)| a * b).collect(), 200, &[e0], 1, 1e-13).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-11);
    }
}
