//! Line-oriented `key=value` configuration files.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use sps_core::dynamics::{CouplingScheme, Drive, SystemConfig};
use sps_core::Error as CoreError;

/// A configuration problem, located by line where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn at(line: usize, key: &str, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: Some(key.to_string()),
            message: message.into(),
        }
    }
}

/// A numeric model parameter that a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    GammaSigma,
    GammaA,
    PSigma,
    OmegaSigma,
    Epsilon1,
    DeltaSigma,
    DeltaA,
    GammaSigmaStar,
    GammaPhi,
    NBoost,
}

impl Param {
    pub const ALL: [Param; 10] = [
        Param::GammaSigma,
        Param::GammaA,
        Param::PSigma,
        Param::OmegaSigma,
        Param::Epsilon1,
        Param::DeltaSigma,
        Param::DeltaA,
        Param::GammaSigmaStar,
        Param::GammaPhi,
        Param::NBoost,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Param::GammaSigma => "gamma_sigma",
            Param::GammaA => "gamma_a",
            Param::PSigma => "P_sigma",
            Param::OmegaSigma => "Omega_sigma",
            Param::Epsilon1 => "epsilon_1",
            Param::DeltaSigma => "delta_sigma",
            Param::DeltaA => "delta_a",
            Param::GammaSigmaStar => "gamma_sigma_star",
            Param::GammaPhi => "gamma_phi",
            Param::NBoost => "N_boost",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.key() == key)
    }

    /// Writes the value into the configuration. Detunings are measured from
    /// the laser, which sits at zero in the rotating frame.
    pub fn set(self, c: &mut SystemConfig, v: f64) {
        match self {
            Param::GammaSigma => c.gamma_sigma = v,
            Param::GammaA => c.gamma_a = v,
            Param::PSigma => c.pump_sigma = v,
            Param::OmegaSigma => c.drive_sigma = v,
            Param::Epsilon1 => c.epsilon_1 = v,
            Param::DeltaSigma => c.freq_sigma = c.freq_laser + v,
            Param::DeltaA => c.freq_a = c.freq_laser + v,
            Param::GammaSigmaStar => c.gamma_sigma_star = v,
            Param::GammaPhi => c.gamma_phi = v,
            Param::NBoost => c.coupling_boost = v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// One swept axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: Param,
    pub scale: Scale,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                if k == 0 {
                    return self.min;
                }
                if k == n - 1 {
                    return self.max;
                }
                match self.scale {
                    Scale::Linear => self.min + t * (self.max - self.min),
                    Scale::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// A grid of one or two swept parameters over a fixed base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub base: SystemConfig,
    pub axes: Vec<SweepAxis>,
}

impl SweepPlan {
    /// Grid points in row-major order: the last axis varies fastest.
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        match self.axes.as_slice() {
            [a] => a.values().into_iter().map(|v| (v, None)).collect(),
            [a, b] => {
                let bv = b.values();
                a.values().into_iter().flat_map(|x| bv.iter().map(move |&y| (x, Some(y)))).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn config_at(&self, point: (f64, Option<f64>)) -> SystemConfig {
        let mut c = self.base;
        self.axes[0].param.set(&mut c, point.0);
        if let (Some(axis), Some(v)) = (self.axes.get(1), point.1) {
            axis.param.set(&mut c, v);
        }
        c
    }
}

/// A parsed file: the base configuration and, if `sweep.*` keys were
/// present, the sweep over it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub system: SystemConfig,
    pub sweep: Option<SweepPlan>,
}

const SWEEP_KEYS: [&str; 5] = ["sweep.param", "sweep.scale", "sweep.min", "sweep.max", "sweep.count"];

pub fn parse_config(path: &Path) -> Result<ParsedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        key: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config_str(&text)
}

fn number(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| ConfigError::at(line, key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(ConfigError::at(line, key, "must be finite"));
    }
    Ok(x)
}

fn list(v: &str) -> Vec<&str> {
    v.split(',').map(str::trim).collect()
}

pub fn parse_config_str(text: &str) -> Result<ParsedConfig, ConfigError> {
    let mut c = SystemConfig::default();
    let mut lines: HashMap<&'static str, usize> = HashMap::new();
    let mut sweep: HashMap<&str, (usize, &str)> = HashMap::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError {
            line: Some(line),
            key: None,
            message: format!("expected `key=value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());

        if let Some(&s) = SWEEP_KEYS.iter().find(|&&s| s == key) {
            if sweep.insert(s, (line, value)).is_some() {
                return Err(ConfigError::at(line, key, "given more than once"));
            }
            continue;
        }
        let name: &'static str = match key {
            "scheme" => {
                c.coupling_scheme = value.parse::<CouplingScheme>().map_err(|e| ConfigError::at(line, key, e))?;
                "scheme"
            }
            "drive" => {
                c.drive = value.parse::<Drive>().map_err(|e| ConfigError::at(line, key, e))?;
                "drive"
            }
            "n_max" => {
                c.n_max = value
                    .parse()
                    .map_err(|_| ConfigError::at(line, key, format!("`{value}` is not a nonnegative integer")))?;
                "n_max"
            }
            "tail_tol" => {
                c.tail_tol = number(line, key, value)?;
                "tail_tol"
            }
            _ => {
                let p = Param::from_key(key).ok_or_else(|| ConfigError::at(line, key, "unknown key"))?;
                p.set(&mut c, number(line, key, value)?);
                p.key()
            }
        };
        if lines.insert(name, line).is_some() {
            return Err(ConfigError::at(line, key, "given more than once"));
        }
    }

    if let Err(e) = c.validate() {
        return Err(locate(e, &lines));
    }
    let plan = if sweep.is_empty() {
        None
    } else {
        Some(parse_sweep(c, &sweep)?)
    };
    Ok(ParsedConfig { system: c, sweep: plan })
}

/// Attaches the offending key's line to a validation error.
fn locate(e: CoreError, lines: &HashMap<&'static str, usize>) -> ConfigError {
    match e {
        CoreError::InvalidParameter { name, reason } => {
            let key = match name {
                "freq_sigma" => "delta_sigma",
                "freq_a" => "delta_a",
                "coupling_boost" => "N_boost",
                other => other,
            };
            ConfigError {
                line: lines.get(key).copied(),
                key: Some(key.to_string()),
                message: reason,
            }
        }
        CoreError::InvalidCombination { .. } => ConfigError {
            line: lines.get("drive").or(lines.get("scheme")).copied(),
            key: Some("drive".into()),
            message: e.to_string(),
        },
        other => ConfigError {
            line: None,
            key: None,
            message: other.to_string(),
        },
    }
}

fn parse_sweep(base: SystemConfig, keys: &HashMap<&str, (usize, &str)>) -> Result<SweepPlan, ConfigError> {
    let get = |k: &str| {
        keys.get(k).copied().ok_or_else(|| ConfigError {
            line: None,
            key: Some(k.to_string()),
            message: "missing; a sweep needs all of sweep.param, sweep.scale, sweep.min, sweep.max, sweep.count".into(),
        })
    };
    let (pl, params) = get("sweep.param")?;
    let params = list(params);
    if params.is_empty() || params.len() > 2 {
        return Err(ConfigError::at(pl, "sweep.param", "one or two comma-separated parameters"));
    }
    let width = params.len();
    let field = |k: &'static str| -> Result<(usize, Vec<&str>), ConfigError> {
        let (l, v) = get(k)?;
        let items = list(v);
        if items.len() != width {
            return Err(ConfigError::at(l, k, format!("expected {width} comma-separated entries to match sweep.param")));
        }
        Ok((l, items))
    };
    let (sl, scales) = field("sweep.scale")?;
    let (minl, mins) = field("sweep.min")?;
    let (maxl, maxs) = field("sweep.max")?;
    let (cl, counts) = field("sweep.count")?;

    let mut axes = Vec::with_capacity(width);
    for i in 0..width {
        let param = Param::from_key(params[i])
            .ok_or_else(|| ConfigError::at(pl, "sweep.param", format!("`{}` is not a sweepable parameter", params[i])))?;
        let scale = match scales[i] {
            "linear" => Scale::Linear,
            "log" => Scale::Log,
            s => return Err(ConfigError::at(sl, "sweep.scale", format!("`{s}` is neither linear nor log"))),
        };
        let min = number(minl, "sweep.min", mins[i])?;
        let max = number(maxl, "sweep.max", maxs[i])?;
        let count: usize = counts[i]
            .parse()
            .map_err(|_| ConfigError::at(cl, "sweep.count", format!("`{}` is not an integer", counts[i])))?;
        if count < 2 {
            return Err(ConfigError::at(cl, "sweep.count", "must be at least 2"));
        }
        if scale == Scale::Log && !(min > 0.0 && max > 0.0) {
            return Err(ConfigError::at(minl, "sweep.min", "log scale needs positive bounds"));
        }
        axes.push(SweepAxis {
            param,
            scale,
            min,
            max,
            count,
        });
    }
    if width == 2 && axes[0].param == axes[1].param {
        return Err(ConfigError::at(pl, "sweep.param", "the two axes must differ"));
    }
    let plan = SweepPlan { base, axes };
    // Every grid corner must itself be a valid configuration.
    for a in plan.axes[0].values().iter().step_by(plan.axes[0].count - 1) {
        let second: Vec<Option<f64>> = match plan.axes.get(1) {
            Some(b) => b.values().iter().step_by(b.count - 1).map(|&v| Some(v)).collect(),
            None => vec![None],
        };
        for b in second {
            plan.config_at((*a, b)).validate().map_err(|e| {
                let mut err = locate(e, &HashMap::new());
                err.line = Some(minl.min(maxl));
                err
            })?;
        }
    }
    Ok(plan)
}
