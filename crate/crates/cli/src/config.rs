//! Flat `key = value` experiment files with `#` comments.

use std::collections::BTreeMap;
use std::path::PathBuf;

use conelab_core::operator::delta_critical;
use conelab_core::DistanceFunction;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

type Parsed<T> = Result<T, ConfigError>;

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gauge {
    Euclidean,
    Lq(u32),
}

impl Gauge {
    fn parse(s: &str) -> Parsed<Self> {
        match s {
            "euclidean" | "euclid" | "l2" => Ok(Gauge::Euclidean),
            _ => {
                let q = s
                    .strip_prefix("lq")
                    .or_else(|| s.strip_prefix('l'))
                    .and_then(|q| q.parse::<u32>().ok())
                    .ok_or_else(|| bad(format!("unknown gauge '{s}'; use euclidean or lq<q>")))?;
                if q == 2 {
                    Ok(Gauge::Euclidean)
                } else {
                    Ok(Gauge::Lq(q))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Gauge::Euclidean => "euclidean".into(),
            Gauge::Lq(q) => format!("lq{q}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeltaSpec {
    Critical,
    Value(f64),
}

pub const KEYS: &[&str] = &[
    "gauge",
    "d",
    "p",
    "delta",
    "grid",
    "pad",
    "scales",
    "seed",
    "directions",
    "resolution",
    "samples",
    "deltas",
    "levels",
    "ps",
    "radii",
    "out",
];

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub gauge: Gauge,
    pub d: usize,
    pub p: f64,
    pub delta: DeltaSpec,
    pub grid: Option<usize>,
    pub pad: Option<usize>,
    pub scales: Option<Vec<u32>>,
    pub seed: u64,
    pub directions: Option<usize>,
    pub resolution: Option<usize>,
    pub samples: Option<usize>,
    pub deltas: Option<Vec<f64>>,
    pub levels: Option<Vec<i32>>,
    pub ps: Option<Vec<f64>>,
    pub radii: Option<usize>,
    pub out: Option<PathBuf>,
    /// `tol.<name> = value` overrides, keyed by assertion name.
    pub tolerances: BTreeMap<String, f64>,
    /// Every key as written, for the summary.
    pub raw: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            gauge: Gauge::Euclidean,
            d: 2,
            p: 2.0 / 3.0,
            delta: DeltaSpec::Critical,
            grid: None,
            pad: None,
            scales: None,
            seed: 20,
            directions: None,
            resolution: None,
            samples: None,
            deltas: None,
            levels: None,
            ps: None,
            radii: None,
            out: None,
            tolerances: BTreeMap::new(),
            raw: BTreeMap::new(),
        }
    }
}

/// A real number, also accepted as a fraction `a/b`.
fn number(key: &str, v: &str) -> Parsed<f64> {
    let parsed = match v.split_once('/') {
        Some((a, b)) => match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(a), Ok(b)) if b != 0.0 => Some(a / b),
            _ => None,
        },
        None => v.parse::<f64>().ok(),
    };
    parsed
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(format!("{key}: '{v}' is not a number")))
}

fn integer<T: std::str::FromStr>(key: &str, v: &str) -> Parsed<T> {
    v.parse()
        .map_err(|_| bad(format!("{key}: '{v}' is not a valid integer")))
}

/// Comma-separated items, or an inclusive range `lo..=hi`.
fn int_list<T>(key: &str, v: &str) -> Parsed<Vec<T>>
where
    T: std::str::FromStr + Copy + Into<i64> + TryFrom<i64>,
{
    if let Some((a, b)) = v.split_once("..=") {
        let (a, b): (T, T) = (integer(key, a.trim())?, integer(key, b.trim())?);
        let (a, b) = (a.into(), b.into());
        if a > b {
            return Err(bad(format!("{key}: empty range '{v}'")));
        }
        return (a..=b)
            .map(|i| T::try_from(i).map_err(|_| bad(format!("{key}: {i} out of range"))))
            .collect();
    }
    v.split(',').map(|s| integer(key, s.trim())).collect()
}

fn num_list(key: &str, v: &str) -> Parsed<Vec<f64>> {
    v.split(',').map(|s| number(key, s.trim())).collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Parsed<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value, got '{line}'", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if cfg.raw.insert(key.to_string(), value.to_string()).is_some() {
                return Err(bad(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Parsed<()> {
        match key {
            "gauge" => self.gauge = Gauge::parse(v)?,
            "d" => self.d = integer(key, v)?,
            "p" => self.p = number(key, v)?,
            "delta" => {
                self.delta = if v == "critical" {
                    DeltaSpec::Critical
                } else {
                    DeltaSpec::Value(number(key, v)?)
                }
            }
            "grid" => self.grid = Some(integer(key, v)?),
            "pad" => self.pad = Some(integer(key, v)?),
            "scales" => self.scales = Some(int_list(key, v)?),
            "seed" => self.seed = integer(key, v)?,
            "directions" => self.directions = Some(integer(key, v)?),
            "resolution" => self.resolution = Some(integer(key, v)?),
            "samples" => self.samples = Some(integer(key, v)?),
            "deltas" => self.deltas = Some(num_list(key, v)?),
            "levels" => self.levels = Some(int_list(key, v)?),
            "ps" => self.ps = Some(num_list(key, v)?),
            "radii" => self.radii = Some(integer(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            _ => match key.strip_prefix("tol.") {
                Some(name) if !name.is_empty() => {
                    self.tolerances.insert(name.to_string(), number(key, v)?);
                }
                _ => {
                    return Err(bad(format!(
                        "unknown key '{key}'; known keys: {}, tol.<name>",
                        KEYS.join(", ")
                    )))
                }
            },
        }
        Ok(())
    }

    fn validate(&self) -> Parsed<()> {
        if self.d < 2 {
            return Err(bad(format!("d must be at least 2, got {}", self.d)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(bad(format!("p must lie in (0, 1), got {}", self.p)));
        }
        if let DeltaSpec::Value(v) = self.delta {
            if !(v > 0.0) {
                return Err(bad(format!("delta must be positive, got {v}")));
            }
        }
        if let Gauge::Lq(q) = self.gauge {
            if q < 4 || q % 2 != 0 {
                return Err(bad(format!("lq gauges need an even q ≥ 4, got {q}")));
            }
        }
        if let Some(ps) = &self.ps {
            if let Some(bad_p) = ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
                return Err(bad(format!("ps: every p must lie in (0, 1), got {bad_p}")));
            }
        }
        Ok(())
    }

    pub fn distance_function(&self) -> Parsed<DistanceFunction> {
        match self.gauge {
            Gauge::Euclidean => DistanceFunction::euclidean(self.d),
            Gauge::Lq(q) => DistanceFunction::lq(q, self.d),
        }
        .map_err(|e| bad(e.to_string()))
    }

    /// `δ`, with "critical" resolved to `δ(p)`.
    pub fn resolved_delta(&self) -> f64 {
        match self.delta {
            DeltaSpec::Value(v) => v,
            DeltaSpec::Critical => delta_critical(self.p, self.d).expect("p and d validated"),
        }
    }

    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}
