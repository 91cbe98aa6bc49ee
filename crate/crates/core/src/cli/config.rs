//! Flat `section.key = value` run configuration.
//!
//! ```text
//! # comments run to the end of the line
//! order = 3
//! seed = 42
//! format = json            # json | text | latex
//! out = report.json
//! derivation.cross_check_samples = 100
//! ensemble.samples = 1000000
//! ensemble.variance_e = 1
//! ensemble.variance_h = 1
//! ensemble.eps = 2
//! ensemble.mu = 1.5
//! kubo.systems = oscillator, two_level, chain
//! oscillator.dim = 60
//! oscillator.sweep_dim = 24
//! oscillator.omega = 1
//! oscillator.mass = 1
//! oscillator.kt = 0        # 0 is the ground state
//! oscillator.eta = 0.05
//! oscillator.lambdas = 0.1, 0.03, 0.01, 0.003, 0.001
//! two_level.delta = 1
//! two_level.tilt = 0.4
//! two_level.kt = 0
//! two_level.eta = 0.05
//! two_level.lambdas = 0.1, 0.03, 0.01
//! chain.sites = 6
//! chain.j = 1
//! chain.hx = 0.9
//! chain.hz = 0.35
//! chain.kts = 0, 1
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::derivation::MAX_ORDER;
use crate::kubo::Temperature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Text,
    Latex,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            "latex" => Ok(OutputFormat::Latex),
            _ => Err(format!("format must be one of json, text, latex; got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Oscillator,
    TwoLevel,
    Chain,
}

impl FromStr for SystemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oscillator" => Ok(SystemKind::Oscillator),
            "two_level" => Ok(SystemKind::TwoLevel),
            "chain" => Ok(SystemKind::Chain),
            _ => Err(format!("system must be one of oscillator, two_level, chain; got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationConfig {
    pub cross_check_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub samples: usize,
    pub variance_e: f64,
    pub variance_h: f64,
    pub eps: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorConfig {
    pub dim: usize,
    /// Dimension used for exact time evolution.
    pub sweep_dim: usize,
    pub omega: f64,
    pub mass: f64,
    pub kt: f64,
    pub eta: f64,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelConfig {
    pub delta: f64,
    pub tilt: f64,
    pub kt: f64,
    pub eta: f64,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub sites: usize,
    pub j: f64,
    pub hx: f64,
    pub hz: f64,
    pub kts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KuboConfig {
    pub systems: Vec<SystemKind>,
    pub oscillator: OscillatorConfig,
    pub two_level: TwoLevelConfig,
    pub chain: ChainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub order: u32,
    pub seed: u64,
    pub format: OutputFormat,
    /// Where the report goes; not echoed into the report.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub derivation: DerivationConfig,
    pub ensemble: EnsembleConfig,
    pub kubo: KuboConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            order: MAX_ORDER,
            seed: 0,
            format: OutputFormat::Json,
            out: None,
            derivation: DerivationConfig {
                cross_check_samples: 100,
            },
            ensemble: EnsembleConfig {
                samples: 1_000_000,
                variance_e: 1.0,
                variance_h: 1.0,
                eps: 2.0,
                mu: 1.5,
            },
            kubo: KuboConfig {
                systems: vec![SystemKind::Oscillator, SystemKind::TwoLevel, SystemKind::Chain],
                oscillator: OscillatorConfig {
                    dim: 60,
                    sweep_dim: 24,
                    omega: 1.0,
                    mass: 1.0,
                    kt: 0.0,
                    eta: 0.05,
                    lambdas: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
                },
                two_level: TwoLevelConfig {
                    delta: 1.0,
                    tilt: 0.4,
                    kt: 0.0,
                    eta: 0.05,
                    lambdas: vec![1e-1, 3e-2, 1e-2],
                },
                chain: ChainConfig {
                    sites: 6,
                    j: 1.0,
                    hx: 0.9,
                    hz: 0.35,
                    kts: vec![0.0, 1.0],
                },
            },
        }
    }
}

/// `kt = 0` selects the ground state.
pub fn temperature(kt: f64) -> Temperature {
    if kt == 0.0 {
        Temperature::Zero
    } else {
        Temperature::Kt(kt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line in the config text; `None` for command-line values.
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?
        }
        if self.key.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.diagnostics.iter().map(|d| d.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ConfigError {}

pub const KEYS: &[&str] = &[
    "order",
    "seed",
    "format",
    "out",
    "derivation.cross_check_samples",
    "ensemble.samples",
    "ensemble.variance_e",
    "ensemble.variance_h",
    "ensemble.eps",
    "ensemble.mu",
    "kubo.systems",
    "oscillator.dim",
    "oscillator.sweep_dim",
    "oscillator.omega",
    "oscillator.mass",
    "oscillator.kt",
    "oscillator.eta",
    "oscillator.lambdas",
    "two_level.delta",
    "two_level.tilt",
    "two_level.kt",
    "two_level.eta",
    "two_level.lambdas",
    "chain.sites",
    "chain.j",
    "chain.hx",
    "chain.hz",
    "chain.kts",
];

fn suggestion(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .map(|k| {
            let tail = k.rsplit('.').next().unwrap_or(k);
            let score = strsim::jaro_winkler(key, k).max(strsim::jaro_winkler(key, tail));
            (score, *k)
        })
        .filter(|(s, _)| *s >= 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k)
}

fn int<T: TryFrom<u64>>(v: &str) -> Result<T, String> {
    let clean = v.replace('_', "");
    let n = match clean.parse::<u64>() {
        Ok(n) => n,
        Err(_) => {
            let f: f64 = clean
                .parse()
                .map_err(|_| format!("expected a non-negative integer, got `{v}`"))?;
            if f < 0.0 || f.fract() != 0.0 || f > u64::MAX as f64 {
                return Err(format!("expected a non-negative integer, got `{v}`"));
            }
            f as u64
        }
    };
    T::try_from(n).map_err(|_| format!("`{v}` is out of range"))
}

fn real(v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got `{v}`")),
    }
}

fn list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    v.split(',').map(|s| item(s.trim())).collect()
}

impl RunConfig {
    /// Applies one `key = value` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let k = &mut self.kubo;
        match key {
            "order" => self.order = int(value)?,
            "seed" => self.seed = int(value)?,
            "format" => self.format = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "derivation.cross_check_samples" => self.derivation.cross_check_samples = int(value)?,
            "ensemble.samples" => self.ensemble.samples = int(value)?,
            "ensemble.variance_e" => self.ensemble.variance_e = real(value)?,
            "ensemble.variance_h" => self.ensemble.variance_h = real(value)?,
            "ensemble.eps" => self.ensemble.eps = real(value)?,
            "ensemble.mu" => self.ensemble.mu = real(value)?,
            "kubo.systems" => k.systems = list(value, |s| s.parse())?,
            "oscillator.dim" => k.oscillator.dim = int(value)?,
            "oscillator.sweep_dim" => k.oscillator.sweep_dim = int(value)?,
            "oscillator.omega" => k.oscillator.omega = real(value)?,
            "oscillator.mass" => k.oscillator.mass = real(value)?,
            "oscillator.kt" => k.oscillator.kt = real(value)?,
            "oscillator.eta" => k.oscillator.eta = real(value)?,
            "oscillator.lambdas" => k.oscillator.lambdas = list(value, real)?,
            "two_level.delta" => k.two_level.delta = real(value)?,
            "two_level.tilt" => k.two_level.tilt = real(value)?,
            "two_level.kt" => k.two_level.kt = real(value)?,
            "two_level.eta" => k.two_level.eta = real(value)?,
            "two_level.lambdas" => k.two_level.lambdas = list(value, real)?,
            "chain.sites" => k.chain.sites = int(value)?,
            "chain.j" => k.chain.j = real(value)?,
            "chain.hx" => k.chain.hx = real(value)?,
            "chain.hz" => k.chain.hz = real(value)?,
            "chain.kts" => k.chain.kts = list(value, real)?,
            _ => {
                return Err(match suggestion(key) {
                    Some(s) => format!("unknown key (did you mean `{s}`?)"),
                    None => format!(
                        "unknown key; valid keys are order, seed, format, out and {}",
                        "derivation.*, ensemble.*, kubo.systems, oscillator.*, two_level.*, chain.*"
                    ),
                })
            }
        }
        Ok(())
    }

    /// Range checks; each problem is reported against the key that set it.
    pub fn check(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut need = |ok: bool, key: &'static str, msg: String| {
            if !ok {
                out.push((key, msg));
            }
        };
        need(
            self.order <= MAX_ORDER,
            "order",
            format!(
                "order must be <= {MAX_ORDER} (the expansion is carried to (v/c)^3), got {}",
                self.order
            ),
        );
        let e = &self.ensemble;
        need(
            e.samples >= 2,
            "ensemble.samples",
            format!("need at least 2 samples, got {}", e.samples),
        );
        need(e.variance_e > 0.0, "ensemble.variance_e", "must be positive".into());
        need(e.variance_h > 0.0, "ensemble.variance_h", "must be positive".into());
        need(e.eps > 0.0, "ensemble.eps", "must be positive".into());
        need(e.mu > 0.0, "ensemble.mu", "must be positive".into());
        need(
            self.derivation.cross_check_samples >= 1,
            "derivation.cross_check_samples",
            "need at least 1 sample".into(),
        );
        let lambdas_ok = |l: &[f64]| !l.is_empty() && l.iter().all(|x| *x != 0.0);
        let o = &self.kubo.oscillator;
        need(
            (4..=400).contains(&o.dim),
            "oscillator.dim",
            format!("must be in 4..=400, got {}", o.dim),
        );
        need(
            (4..=200).contains(&o.sweep_dim),
            "oscillator.sweep_dim",
            format!("must be in 4..=200, got {}", o.sweep_dim),
        );
        need(o.omega > 0.0, "oscillator.omega", "must be positive".into());
        need(o.mass > 0.0, "oscillator.mass", "must be positive".into());
        need(o.kt >= 0.0, "oscillator.kt", "must be non-negative".into());
        need(o.eta > 0.0, "oscillator.eta", "must be positive".into());
        need(
            lambdas_ok(&o.lambdas),
            "oscillator.lambdas",
            "need a non-empty list of nonzero couplings".into(),
        );
        let t = &self.kubo.two_level;
        need(
            t.delta != 0.0 || t.tilt != 0.0,
            "two_level.delta",
            "the two levels must be split".into(),
        );
        need(t.kt >= 0.0, "two_level.kt", "must be non-negative".into());
        need(t.eta > 0.0, "two_level.eta", "must be positive".into());
        need(
            lambdas_ok(&t.lambdas),
            "two_level.lambdas",
            "need a non-empty list of nonzero couplings".into(),
        );
        let c = &self.kubo.chain;
        need(
            (3..=10).contains(&c.sites),
            "chain.sites",
            format!("must be in 3..=10, got {}", c.sites),
        );
        need(
            !c.kts.is_empty() && c.kts.iter().all(|x| *x >= 0.0),
            "chain.kts",
            "need non-negative temperatures".into(),
        );
        out
    }
}

/// Parses configuration text, fills defaults and validates every field.
pub fn validate_config(raw: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut diagnostics = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, text) in raw.lines().enumerate() {
        let line = i + 1;
        let body = text.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            diagnostics.push(Diagnostic {
                line: Some(line),
                key: String::new(),
                message: format!("expected `key = value`, got `{body}`"),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if let Some(first) = seen.insert(key.to_string(), line) {
            diagnostics.push(Diagnostic {
                line: Some(line),
                key: key.into(),
                message: format!("duplicate key (first set on line {first})"),
            });
            continue;
        }
        if let Err(message) = cfg.set(key, value) {
            diagnostics.push(Diagnostic {
                line: Some(line),
                key: key.into(),
                message,
            });
        }
    }
    if diagnostics.is_empty() {
        diagnostics.extend(cfg.check().into_iter().map(|(key, message)| Diagnostic {
            line: seen.get(key).copied(),
            key: key.into(),
            message,
        }));
    }
    if diagnostics.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { diagnostics })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = validate_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.order, 3);
        assert_eq!(c.ensemble.samples, 1_000_000);
        assert_eq!(c.kubo.oscillator.dim, 60);
        assert_eq!(c.kubo.systems[0], SystemKind::Oscillator);
    }

    #[test]
    fn order_above_three_is_rejected() {
        let e = validate_config("# run\n\norder = 5\n").unwrap_err();
        assert_eq!(e.diagnostics.len(), 1);
        assert_eq!(e.diagnostics[0].line, Some(3));
        assert!(e.to_string().contains("order must be <= 3"), "{e}");
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        let e = validate_config("velocity = 0.1\nensemble.sample = 10").unwrap_err();
        assert_eq!(e.diagnostics[0].line, Some(1));
        assert!(e.diagnostics[0].message.starts_with("unknown key; valid keys"), "{e}");
        assert!(e.diagnostics[1].message.contains("`ensemble.samples`"), "{e}");
    }

    #[test]
    fn values_lists_and_comments_parse() {
        let c = validate_config(
            "seed = 42  # fixed\nensemble.samples = 1e5\nkubo.systems = chain, two_level\nchain.kts = 0, 2.5\nformat = text",
        )
        .unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.ensemble.samples, 100_000);
        assert_eq!(c.kubo.systems, vec![SystemKind::Chain, SystemKind::TwoLevel]);
        assert_eq!(c.kubo.chain.kts, vec![0.0, 2.5]);
        assert_eq!(c.format, OutputFormat::Text);
    }

    #[test]
    fn every_problem_is_reported_with_its_line() {
        let e = validate_config("order = x\nformat = pdf\nseed = 1\nseed = 2\nnonsense").unwrap_err();
        let lines: Vec<_> = e.diagnostics.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![Some(1), Some(2), Some(4), Some(5)]);
    }

    #[test]
    fn range_errors_point_at_their_keys() {
        let e = validate_config("ensemble.samples = 0\noscillator.eta = -1").unwrap_err();
        let keys: Vec<_> = e.diagnostics.iter().map(|d| (d.key.as_str(), d.line)).collect();
        assert_eq!(keys, vec![("ensemble.samples", Some(1)), ("oscillator.eta", Some(2))]);
    }
}
