use crate::config::{CommandKind, ConfigError, Figure, Method, RunConfig};
use crate::output::{ordered, Sink};
use meanfield_spectra::acceptance::{run_all_parallel, AcceptanceOptions};
use meanfield_spectra::funcineq::{ineq_constants, sandwich_check, transfer_constants};
use meanfield_spectra::ising_chain::{chain_gap, full_gap, trial_rayleigh, GapMethod};
use meanfield_spectra::measures::magnetization_gap_bound;
use meanfield_spectra::potential::{critical_points, Profile};
use meanfield_spectra::scaling::{evaluate, fit_power_law, GapPoint, GapSeries};
use meanfield_spectra::schrodinger::{critical_line_operator, inflection_operator, solve, solve_renormalized};
use serde_json::{json, Value};
use std::fmt;
use std::io::{self, Write};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Compute(meanfield_spectra::Error),
    Io(io::Error),
    /// The run completed but some check failed.
    Failed(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Compute(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
            RunError::Failed(s) => f.write_str(s),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<meanfield_spectra::Error> for RunError {
    fn from(e: meanfield_spectra::Error) -> Self {
        RunError::Compute(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

fn num(x: f64) -> Value {
    // serde_json maps non-finite floats to null, which is what we want
    json!(x)
}

pub fn run(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), RunError> {
    cfg.validate()?;
    match cfg.command {
        CommandKind::Potential => potential(cfg, out),
        CommandKind::Criticalpoints => criticalpoints(cfg, out),
        CommandKind::Gap => gap(cfg, out),
        CommandKind::Figures => figures(cfg, out),
        CommandKind::Ineq => ineq(cfg, out),
        CommandKind::Verify => verify(cfg, out),
    }
}

fn potential(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), RunError> {
    let params = cfg.model.params()?;
    let profile = Profile::for_params(&params)?;
    let mut sink = Sink::new(cfg, out, &["phi", "V", "dV", "d2V"])?;
    for x in cfg.grid().values() {
        sink.row(vec![num(x), num(profile.v(x)), num(profile.dv(x)), num(profile.d2v(x))])?;
    }
    let cps = critical_points(&params);
    sink.note("critical_points", serde_json::to_value(&cps).expect("plain data"));
    Ok(sink.finish()?)
}

fn criticalpoints(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), RunError> {
    let params = cfg.model.params()?;
    let mut sink = Sink::new(cfg, out, &["location", "kind", "value", "hess_eigs"])?;
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    for c in critical_points(&params) {
        let kind = serde_json::to_value(c.kind).expect("plain data");
        sink.row(vec![json!(join(&c.location)), kind, num(c.value), json!(join(&c.hess_eigs))])?;
    }
    Ok(sink.finish()?)
}

struct GapRow {
    n: usize,
    gap: f64,
    log_gap: f64,
}

fn gap_point(cfg: &RunConfig, n: usize) -> Result<GapRow, meanfield_spectra::Error> {
    let m = &cfg.model;
    let est = |e: meanfield_spectra::ising_chain::GapEstimate| GapRow { n, gap: e.gap, log_gap: e.log_gap };
    Ok(match cfg.method() {
        Method::Full => est(full_gap(n, m.beta, m.h)?),
        Method::Chain => est(chain_gap(n, m.beta, m.h)?),
        Method::Trial => est(trial_rayleigh(n, m.beta, m.h)?),
        Method::Bound => {
            let g = magnetization_gap_bound(&cfg.model.params().expect("validated"), n)?;
            GapRow { n, gap: g, log_gap: g.ln() }
        }
        Method::Schrodinger => {
            let r = solve_renormalized(&cfg.model.params().expect("validated"), n, cfg.l, 2)?;
            match r.log_gap {
                Some(lg) => GapRow { n, gap: r.eigenvalues[1], log_gap: lg },
                None => GapRow { n, gap: r.eigenvalues[0], log_gap: r.eigenvalues[0].ln() },
            }
        }
    })
}

fn gap_method(m: Method) -> GapMethod {
    match m {
        Method::Full => GapMethod::FullExact,
        Method::Chain => GapMethod::ChainExact,
        Method::Trial => GapMethod::TrialUpper,
        Method::Schrodinger => GapMethod::Schrodinger,
        Method::Bound => GapMethod::Bound,
    }
}

fn gap(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), RunError> {
    let params = cfg.model.params()?;
    let method = cfg.method();
    let sizes = cfg.sweep.as_ref().expect("validated").sizes();
    let mut sink = Sink::new(cfg, out, &["N", "gap", "log_gap", "method"])?;
    let label = gap_method(method).as_str();
    let mut points = Vec::new();
    ordered(&sizes, |&n| gap_point(cfg, n), |r| -> Result<(), RunError> {
        let r = r?;
        sink.row(vec![json!(r.n), num(r.gap), num(r.log_gap), json!(label)])?;
        points.push(GapPoint { n_spins: r.n, log_gap: r.log_gap, method: gap_method(method) });
        Ok(())
    })?;
    let series = GapSeries::new(&params, points)?;
    // The renormalized operator's growth is not the full-gap law, so it
    // only gets a bare exponent.
    let fit = if method == Method::Schrodinger {
        fit_power_law(&series).map(|f| serde_json::to_value(f).expect("plain data"))
    } else {
        evaluate(&series, &cfg.tolerances).map(|r| serde_json::to_value(r).expect("plain data"))
    };
    sink.note("fit", fit.unwrap_or_else(|e| json!({ "skipped": e.to_string() })));
    Ok(sink.finish()?)
}

fn figures(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), RunError> {
    let grid = cfg.grid().values();
    let mut sink = Sink::new(cfg, out, &["grid_value", "e1", "e2", "e3", "e4", "e5", "error"])?;
    let figure = cfg.figure;
    let point = |&x: &f64| {
        let spec = match figure {
            Figure::Sop => inflection_operator(x),
            Figure::S1 => critical_line_operator(x),
        };
        (x, spec.and_then(|s| solve(&s, 5)))
    };
    let mut failures = 0;
    ordered(&grid, point, |(x, r)| -> Result<(), RunError> {
        let mut row = vec![num(x)];
        match r {
            Ok(s) => {
                row.extend(s.eigenvalues.iter().map(|&e| num(e)));
                row.push(Value::Null);
            }
            Err(e) => {
                failures += 1;
                row.extend(std::iter::repeat_n(Value::Null, 5));
                row.push(json!(e.to_string()));
            }
        }
        sink.row(row)?;
        Ok(())
    })?;
    sink.note("failed_points", json!(failures));
    Ok(sink.finish()?)
}

fn ineq(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), RunError> {
    let params = cfg.model.params()?;
    let sizes = cfg.sweep.as_ref().expect("validated").sizes();
    let ising = cfg.model.n == 1;
    let gamma = cfg.gamma();
    let cols = [
        "N", "log_B", "B", "log_D", "split_point", "split_mass", "inverse_gap", "c_over_B", "sandwich_pass", "renormalized_gap", "sgi", "lsi",
    ];
    let mut sink = Sink::new(cfg, out, &cols)?;
    let point = |&n: &usize| -> Result<Vec<Value>, meanfield_spectra::Error> {
        let mut row = vec![json!(n)];
        // The one-dimensional constants and the chain gap exist only for n = 1.
        if ising {
            let c = ineq_constants(&params, n)?;
            let s = sandwich_check(&params, n, cfg.tolerances.sandwich)?;
            row.extend([num(c.log_b()), num(c.b()), num(c.log_d()), num(c.split_point), num(c.split_mass)]);
            row.extend([num(s.log_c.exp()), num((s.log_c - s.log_b).exp()), json!(s.pass)]);
        } else {
            row.extend(std::iter::repeat_n(Value::Null, 8));
        }
        let lambda = solve_renormalized(&params, n, 0, 2)?.eigenvalues[1];
        row.push(num(lambda));
        match gamma {
            Some(g) => {
                let t = transfer_constants(lambda, n, params.beta, g)?;
                row.extend([num(t.sgi), num(t.lsi)]);
            }
            None => row.extend([Value::Null, Value::Null]),
        }
        Ok(row)
    };
    ordered(&sizes, point, |r| -> Result<(), RunError> { Ok(sink.row(r?)?) })?;
    if gamma.is_none() {
        sink.note("transfer", json!("skipped: set gamma for n >= 2"));
    }
    Ok(sink.finish()?)
}

fn verify(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), RunError> {
    let opts = AcceptanceOptions { quick: cfg.quick, tolerances: cfg.tolerances };
    let results = run_all_parallel(&opts);
    let mut sink = Sink::new(cfg, out, &["id", "name", "pass", "seconds", "budget_seconds", "detail"])?;
    for r in &results {
        eprintln!("{}", r.line());
        sink.row(vec![json!(r.id), json!(r.name), json!(r.pass), num(r.seconds), num(r.budget_seconds), json!(r.detail)])?;
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    sink.note("summary", json!({ "passed": results.len() - failed.len(), "failed": failed }));
    sink.finish()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(RunError::Failed(format!("acceptance criteria failed: {failed:?}")))
    }
}
