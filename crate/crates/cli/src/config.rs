//! Run configuration. A TOML file, command-line flags and the tolerance
//! override in `MEANFIELD_SPECTRA_TOL` merge into one canonical [`RunConfig`].

use clap::ValueEnum;
use meanfield_spectra::potential::{critical_field, ModelParams};
use meanfield_spectra::scaling::Tolerances;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub const TOL_ENV: &str = "MEANFIELD_SPECTRA_TOL";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {msg}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Potential,
    Criticalpoints,
    Gap,
    Figures,
    Ineq,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Full,
    Chain,
    Schrodinger,
    Trial,
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which eigenvalue sweep `figures` produces: the inflection-point operator
/// over β, or the critical-line sextic operator over λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    #[default]
    Sop,
    S1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model {
    pub n: usize,
    pub beta: f64,
    /// Field strength, along the first axis when `n ≥ 2`.
    pub h: f64,
}

impl Default for Model {
    fn default() -> Self {
        Model { n: 1, beta: 2.0, h: 0.0 }
    }
}

impl Model {
    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        ModelParams::new(self.n, self.beta, vec![self.h]).map_err(|e| bad("model", e))
    }
}

/// System sizes: `start:factor:count` (geometric), a comma list, or one N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Sweep {
    List(Vec<usize>),
    Geometric { start: usize, factor: f64, count: usize },
}

impl Sweep {
    pub fn sizes(&self) -> Vec<usize> {
        match self {
            Sweep::List(v) => v.clone(),
            Sweep::Geometric { start, factor, count } => {
                (0..*count).map(|i| (*start as f64 * factor.powi(i as i32)).round() as usize).collect()
            }
        }
    }
}

impl FromStr for Sweep {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let s = s.trim();
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| bad("sweep", format!("'{t}' is not a system size")));
        let parts: Vec<&str> = s.split(':').collect();
        let sweep = match parts.len() {
            1 => Sweep::List(s.split(',').map(int).collect::<Result<_, _>>()?),
            3 => {
                let factor: f64 = parts[1].trim().parse().map_err(|_| bad("sweep", format!("'{}' is not a factor", parts[1])))?;
                Sweep::Geometric { start: int(parts[0])?, factor, count: int(parts[2])? }
            }
            _ => return Err(bad("sweep", format!("'{s}' is neither start:factor:count nor a list"))),
        };
        let sizes = sweep.sizes();
        if sizes.is_empty() {
            return Err(bad("sweep", "no system sizes"));
        }
        if sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("sweep", format!("sizes must be positive and strictly increasing, got {sizes:?}")));
        }
        Ok(sweep)
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sweep::List(v) => {
                let s: Vec<String> = v.iter().map(|n| n.to_string()).collect();
                f.write_str(&s.join(","))
            }
            Sweep::Geometric { start, factor, count } => write!(f, "{start}:{factor}:{count}"),
        }
    }
}

impl TryFrom<String> for Sweep {
    type Error = ConfigError;
    fn try_from(s: String) -> Result<Self, ConfigError> {
        s.parse()
    }
}

impl From<Sweep> for String {
    fn from(s: Sweep) -> String {
        s.to_string()
    }
}

/// Linear grid `start:stop:points`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => vec![],
            1 => vec![self.start],
            p => (0..p).map(|i| self.start + (self.stop - self.start) * i as f64 / (p - 1) as f64).collect(),
        }
    }
}

impl FromStr for Grid {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(bad("grid", format!("'{s}' is not start:stop:points")));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("grid", format!("'{t}' is not a number")));
        let points = parts[2].trim().parse().map_err(|_| bad("grid", format!("'{}' is not a point count", parts[2])))?;
        let g = Grid { start: num(parts[0])?, stop: num(parts[1])?, points };
        if !g.start.is_finite() || !g.stop.is_finite() {
            return Err(bad("grid", "endpoints must be finite"));
        }
        Ok(g)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.points)
    }
}

impl TryFrom<String> for Grid {
    type Error = ConfigError;
    fn try_from(s: String) -> Result<Self, ConfigError> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

// Plain values precede the tables so the TOML form serializes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default)]
    pub l: usize,
    #[serde(default)]
    pub figure: Figure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    /// Single-site constant for the constant transfer; 4 is used for n = 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub quick: bool,
    #[serde(default)]
    pub model: Model,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            sweep: None,
            method: None,
            l: 0,
            figure: Figure::default(),
            grid: None,
            gamma: None,
            out: None,
            format: Format::default(),
            quick: false,
            model: Model::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))
    }

    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("every field has a TOML form")
    }

    /// Overlay an inline TOML table such as `exponent_abs = 0.03` onto the
    /// tolerance block.
    /// `inline` is either TOML key/value lines or the body of an inline
    /// table (`a = 1, b = 2`), with or without the braces.
    pub fn apply_tolerance_override(&mut self, inline: &str) -> Result<(), ConfigError> {
        let patch: toml::Table = match inline.parse() {
            Ok(t) => t,
            Err(e) => {
                let body = inline.trim();
                let body = body.strip_prefix('{').and_then(|b| b.strip_suffix('}')).unwrap_or(body);
                let wrapped: toml::Table = format!("t = {{ {body} }}").parse().map_err(|_| bad(TOL_ENV, &e))?;
                match wrapped.into_iter().next() {
                    Some((_, toml::Value::Table(t))) => t,
                    _ => return Err(bad(TOL_ENV, e)),
                }
            }
        };
        let mut base = toml::Table::try_from(self.tolerances).expect("tolerances serialize");
        base.extend(patch);
        self.tolerances = base.try_into().map_err(|e| bad(TOL_ENV, e))?;
        Ok(())
    }

    pub fn method(&self) -> Method {
        self.method.unwrap_or(if self.model.n == 1 { Method::Chain } else { Method::Schrodinger })
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma.or((self.model.n == 1).then_some(meanfield_spectra::funcineq::GAMMA_ISING))
    }

    pub fn grid(&self) -> Grid {
        self.grid.unwrap_or(match self.command {
            CommandKind::Figures => match self.figure {
                Figure::Sop => Grid { start: 1.1, stop: 5.0, points: 40 },
                Figure::S1 => Grid { start: 1.0, stop: 100.0, points: 34 },
            },
            _ if self.model.n >= 2 && self.model.h == 0.0 => Grid { start: 0.0, stop: 2.0, points: 201 },
            _ => Grid { start: -1.5, stop: 1.5, points: 301 },
        })
    }

    fn sizes(&self) -> Result<Vec<usize>, ConfigError> {
        self.sweep.as_ref().map(Sweep::sizes).ok_or_else(|| bad("sweep", format!("{:?} needs --N or --sweep", self.command)))
    }

    /// Field-level checks that need no numerics beyond `h_c`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        if m.n == 0 {
            return Err(bad("model.n", "must be at least 1"));
        }
        if !(m.beta > 0.0) || !m.beta.is_finite() {
            return Err(bad("model.beta", format!("must be positive, got {}", m.beta)));
        }
        if !m.h.is_finite() {
            return Err(bad("model.h", "must be finite"));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return Err(bad("gamma", format!("must be positive, got {g}")));
            }
        }
        match self.command {
            CommandKind::Gap => {
                let sizes = self.sizes()?;
                let max = *sizes.last().unwrap();
                let method = self.method();
                let line_only = matches!(method, Method::Full | Method::Chain | Method::Trial);
                if line_only && m.n != 1 {
                    return Err(bad("method", format!("{method:?} is only defined for n = 1")));
                }
                if method == Method::Full && max > 12 {
                    return Err(bad("method", format!("full diagonalization needs N <= 12, sweep reaches {max}")));
                }
                if method == Method::Trial {
                    let hc = critical_field(m.beta).map_err(|_| bad("method", "trial needs a double well (beta > 1)"))?;
                    if m.h.abs() >= hc {
                        return Err(bad("method", format!("trial needs |h| < h_c = {hc:.6}")));
                    }
                }
                if self.l > 0 && (method != Method::Schrodinger || m.n == 1) {
                    return Err(bad("l", "angular sectors apply to the schrodinger method with n >= 2"));
                }
            }
            CommandKind::Ineq => {
                self.sizes()?;
            }
            CommandKind::Figures | CommandKind::Potential => {
                let g = self.grid();
                if g.points == 0 {
                    return Err(bad("grid", "empty grid"));
                }
                if self.command == CommandKind::Figures && self.figure == Figure::Sop && g.values().iter().any(|&b| b <= 1.0) {
                    return Err(bad("grid", "the inflection operator needs beta > 1"));
                }
                if self.command == CommandKind::Figures && self.figure == Figure::S1 && g.values().iter().any(|&x| !(x > 0.0)) {
                    return Err(bad("grid", "lambda must be positive"));
                }
            }
            CommandKind::Criticalpoints | CommandKind::Verify => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_syntax() {
        assert_eq!("200:2:5".parse::<Sweep>().unwrap().sizes(), vec![200, 400, 800, 1600, 3200]);
        assert_eq!("8".parse::<Sweep>().unwrap().sizes(), vec![8]);
        assert_eq!("10, 30,100".parse::<Sweep>().unwrap().sizes(), vec![10, 30, 100]);
        assert!("100:1.001:5".parse::<Sweep>().is_err());
        assert!("0:2:3".parse::<Sweep>().is_err());
        assert!("1:2".parse::<Sweep>().is_err());
    }

    #[test]
    fn grid_values() {
        let g: Grid = "1:3:5".parse().unwrap();
        assert_eq!(g.values(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        assert!("1:3:0".parse::<Grid>().unwrap().values().is_empty());
    }

    #[test]
    fn tolerance_override_rejects_unknown_keys() {
        let mut c = RunConfig::new(CommandKind::Verify);
        c.apply_tolerance_override("exponent_abs = 0.02\nsandwich = 0.1").unwrap();
        assert_eq!(c.tolerances.exponent_abs, 0.02);
        assert_eq!(c.tolerances.rate_rel, Tolerances::default().rate_rel);
        assert!(c.apply_tolerance_override("exponent = 1").is_err());
        assert!(c.apply_tolerance_override("exponent_abs = ").is_err());
        c.apply_tolerance_override("exponent_abs = 0.03, rate_rel = 0.2").unwrap();
        assert_eq!((c.tolerances.exponent_abs, c.tolerances.rate_rel), (0.03, 0.2));
        c.apply_tolerance_override("{ zero_mode = 1e-4 }").unwrap();
        assert_eq!(c.tolerances.zero_mode, 1e-4);
        assert!(c.apply_tolerance_override("exponent_abs = 0.03, bogus = 1").is_err());
    }
}
