//! Run configuration: config files, flag overlay and value parsers.
//!
//! A config file is a flat JSON object. Keys `version`, `out`, `format` and
//! `threads` are global; every other key must name a parameter of the chosen
//! subcommand. Flags given on the command line replace config values.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Accepted value of the optional `version` key.
pub const CONFIG_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Globals {
    pub out: PathBuf,
    pub format: Format,
    pub threads: usize,
}

/// Contents of a config file split into global settings and parameters.
#[derive(Debug, Default)]
pub struct ConfigFile {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub params: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let Value::Object(mut map) = serde_json::from_str::<Value>(text)? else {
            bail!("config must be a JSON object");
        };
        if let Some(v) = map.remove("version") {
            if v.as_u64() != Some(CONFIG_VERSION) {
                bail!("unsupported config version {v} (expected {CONFIG_VERSION})");
            }
        }
        let out = take(&mut map, "out")?;
        let format = take(&mut map, "format")?;
        let threads = take(&mut map, "threads")?;
        Ok(Self {
            out,
            format,
            threads,
            params: map,
        })
    }
}

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, key: &str) -> Result<Option<T>> {
    map.remove(key)
        .map(serde_json::from_value)
        .transpose()
        .with_context(|| format!("key `{key}`"))
}

/// Overlay the non-null fields of `flags` on `file` and deserialize.
pub fn resolve<P: DeserializeOwned>(file: Map<String, Value>, flags: &impl Serialize) -> Result<P> {
    let mut merged = file;
    if let Value::Object(f) = serde_json::to_value(flags)? {
        for (k, v) in f {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| anyhow!("invalid parameters: {e}"))
}

/// Parse a time: decimals, rationals `p/q`, and multiples of π such as
/// `pi/9`, `2pi/27` or `2*pi/27`.
pub fn parse_time(text: &str) -> Result<f64> {
    let s: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s.as_str(), None),
    };
    let numerator = if let Some(coef) = num.strip_suffix("pi").or_else(|| num.strip_suffix('π')) {
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| anyhow!("bad time `{text}`"))?,
        };
        c * std::f64::consts::PI
    } else {
        num.parse::<f64>()
            .map_err(|_| anyhow!("bad time `{text}`"))?
    };
    let value = match den {
        Some(d) => {
            let d: f64 = d.parse().map_err(|_| anyhow!("bad time `{text}`"))?;
            if d == 0.0 {
                bail!("bad time `{text}`: zero denominator");
            }
            numerator / d
        }
        None => numerator,
    };
    if !value.is_finite() {
        bail!("bad time `{text}`");
    }
    Ok(value)
}

/// A time given as a number or as text understood by [`parse_time`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TimeRepr", into = "TimeRepr")]
pub struct Time {
    repr: TimeRepr,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum TimeRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<TimeRepr> for Time {
    type Error = anyhow::Error;
    fn try_from(repr: TimeRepr) -> Result<Self> {
        let value = match &repr {
            TimeRepr::Number(v) => *v,
            TimeRepr::Text(s) => parse_time(s)?,
        };
        Ok(Self { repr, value })
    }
}

impl From<Time> for TimeRepr {
    fn from(t: Time) -> Self {
        t.repr
    }
}

impl Time {
    pub fn text(s: &str) -> Self {
        Self::try_from(TimeRepr::Text(s.to_string())).expect("valid literal")
    }
}

/// Fraction `p/q` with positive entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ratio {
    pub p: u64,
    pub q: u64,
}

impl FromStr for Ratio {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s.trim().split_once('/').unwrap_or((s.trim(), "1"));
        let p: u64 = p.trim().parse().map_err(|_| anyhow!("bad ratio `{s}`"))?;
        let q: u64 = q.trim().parse().map_err(|_| anyhow!("bad ratio `{s}`"))?;
        if p == 0 || q == 0 {
            bail!("ratio `{s}` needs positive entries");
        }
        Ok(Self { p, q })
    }
}

impl TryFrom<String> for Ratio {
    type Error = anyhow::Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Ratio> for String {
    fn from(r: Ratio) -> Self {
        r.to_string()
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Real profile of one variable: `zero`, `one`, `gaussian:AMP,WIDTH`
/// (`AMP·e^{−x²/WIDTH²}`) or `bump:AMP,WIDTH` (smooth, supported on `|x| < WIDTH`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Shape {
    Zero,
    One,
    Gaussian { amp: f64, width: f64 },
    Bump { amp: f64, width: f64 },
}

impl FromStr for Shape {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| anyhow!("bad numbers in `{s}`"))?
        };
        let pair = |nums: &[f64]| -> Result<(f64, f64)> {
            match nums {
                [amp, width] if amp.is_finite() && *width > 0.0 => Ok((*amp, *width)),
                _ => bail!("`{s}` needs AMP,WIDTH with WIDTH > 0"),
            }
        };
        match (name, nums.is_empty()) {
            ("zero", true) => Ok(Shape::Zero),
            ("one", true) => Ok(Shape::One),
            ("gaussian", false) => pair(&nums).map(|(amp, width)| Shape::Gaussian { amp, width }),
            ("bump", false) => pair(&nums).map(|(amp, width)| Shape::Bump { amp, width }),
            _ => bail!("unknown shape `{s}` (zero, one, gaussian:AMP,WIDTH, bump:AMP,WIDTH)"),
        }
    }
}

impl TryFrom<String> for Shape {
    type Error = anyhow::Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Shape> for String {
    fn from(s: Shape) -> Self {
        s.to_string()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Zero => write!(f, "zero"),
            Shape::One => write!(f, "one"),
            Shape::Gaussian { amp, width } => write!(f, "gaussian:{amp},{width}"),
            Shape::Bump { amp, width } => write!(f, "bump:{amp},{width}"),
        }
    }
}

impl Shape {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Shape::Zero => 0.0,
            Shape::One => 1.0,
            Shape::Gaussian { amp, width } => amp * (-(x * x) / (width * width)).exp(),
            Shape::Bump { amp, width } => {
                let r = x / width;
                if r.abs() >= 1.0 {
                    0.0
                } else {
                    amp * (1.0 - 1.0 / (1.0 - r * r)).exp()
                }
            }
        }
    }

    pub fn eval_complex(&self, x: f64) -> Complex64 {
        Complex64::new(self.eval(x), 0.0)
    }

    /// Largest absolute value.
    pub fn sup(&self) -> f64 {
        match *self {
            Shape::Zero => 0.0,
            Shape::One => 1.0,
            Shape::Gaussian { amp, .. } | Shape::Bump { amp, .. } => amp.abs(),
        }
    }
}
