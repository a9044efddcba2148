//! Line-oriented `key = value` run configuration.
//!
//! Frequencies in the file are ordinary (MHz or kHz, as named by the key)
//! and become angular on load. Times are in microseconds.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use hybridgate_core::cqed::CqedParams;
use hybridgate_core::eit::{ControlSchedule, EitChannelParams, Polarization};
use hybridgate_core::fidelity::{ChannelModel, Engine, GateConfig};
use hybridgate_core::spectral::{FrequencyGrid, GaussianPulse};
use hybridgate_core::units::{khz, mhz, us};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Number,
    Flag,
    Text,
}

struct KeySpec {
    key: &'static str,
    default: &'static str,
    kind: Kind,
}

const fn num(key: &'static str, default: &'static str) -> KeySpec {
    KeySpec { key, default, kind: Kind::Number }
}

const KEYS: &[KeySpec] = &[
    num("cat.alpha", "1.4142135623730951"),
    num("pulse.duration_us", "0.5"),
    num("pulse.delay_us", "0"),
    num("grid.center_mhz", "0"),
    num("grid.span_factor", "16"),
    num("grid.points", "2049"),
    num("cqed.g_m_over_2pi_mhz", "2.723"),
    num("cqed.kappa_over_2pi_mhz", "2"),
    num("cqed.kappa_s_over_kappa", "0.001"),
    num("cqed.gamma_s_over_2pi_khz", "4.78"),
    num("eit.omega0_over_2pi_mhz", "30"),
    num("eit.ramp_rate_per_us", "20"),
    num("eit.write_time_us", "2"),
    num("eit.storage_time_us", "16"),
    num("eit.atom_number", "60000"),
    num("eit.gamma_eg_over_2pi_mhz", "3"),
    num("eit.length_mm", "0.4"),
    num("eit_l.g_over_2pi_khz", "29"),
    num("eit_l.gamma_bc_over_2pi_khz", "3.5"),
    num("eit_r.g_over_2pi_khz", "12"),
    num("eit_r.gamma_bc_over_2pi_khz", "0.016"),
    KeySpec { key: "run.engine", default: "linear", kind: Kind::Text },
    KeySpec { key: "run.channel_model", default: "physical", kind: Kind::Text },
    KeySpec { key: "run.oracle_check", default: "false", kind: Kind::Flag },
    num("run.mean_field_tol", "1e-9"),
    num("oracle.bins", "33"),
    num("oracle.truncation", "40"),
    KeySpec { key: "linearization.alphas", default: "1, 1.4142135623730951, 2", kind: Kind::Text },
    KeySpec { key: "sweep.axis1", default: "", kind: Kind::Text },
    KeySpec { key: "sweep.axis2", default: "", kind: Kind::Text },
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Io { path: String, message: String },
    Parse { line: usize, message: String },
    UnknownKey { line: usize, key: String, suggestion: Option<String> },
    Invalid { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => write!(f, "cannot read config {path}: {message}"),
            ConfigError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ConfigError::UnknownKey { line, key, suggestion: Some(s) } => {
                write!(f, "line {line}: unknown key `{key}` (did you mean `{s}`?)")
            }
            ConfigError::UnknownKey { line, key, suggestion: None } => write!(f, "line {line}: unknown key `{key}`"),
            ConfigError::Invalid { key, message } => write!(f, "invalid value for `{key}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

fn spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

fn nearest_key(key: &str) -> Option<String> {
    KEYS.iter()
        .map(|k| (strsim::levenshtein(key, k.key), k.key))
        .min()
        .filter(|(d, _)| *d <= key.len().max(4) / 2)
        .map(|(_, k)| k.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One sweep dimension: `<key> <lin|log> <min> <max> <steps>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub spacing: Spacing,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    fn parse(source: &str, text: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(invalid(source, "expected `<key> <lin|log> <min> <max> <steps>`"));
        }
        let key = parts[0];
        match spec(key) {
            Some(s) if s.kind == Kind::Number => {}
            Some(_) => return Err(invalid(source, format!("`{key}` is not a numeric key"))),
            None => {
                let hint = nearest_key(key).map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default();
                return Err(invalid(source, format!("unknown key `{key}`{hint}")));
            }
        }
        let spacing = match parts[1] {
            "lin" => Spacing::Linear,
            "log" => Spacing::Log,
            other => return Err(invalid(source, format!("spacing must be `lin` or `log`, got `{other}`"))),
        };
        let min: f64 = parts[2].parse().map_err(|_| invalid(source, format!("bad minimum `{}`", parts[2])))?;
        let max: f64 = parts[3].parse().map_err(|_| invalid(source, format!("bad maximum `{}`", parts[3])))?;
        let steps: usize = parts[4].parse().map_err(|_| invalid(source, format!("bad step count `{}`", parts[4])))?;
        if steps < 2 {
            return Err(invalid(source, "a sweep axis needs at least 2 steps"));
        }
        if !(min.is_finite() && max.is_finite()) {
            return Err(invalid(source, "bounds must be finite"));
        }
        if spacing == Spacing::Log && !(min > 0.0 && max > 0.0) {
            return Err(invalid(source, "log spacing needs positive bounds"));
        }
        Ok(Self { key: key.to_string(), spacing, min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.steps - 1 {
                    return self.max;
                }
                let u = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * u,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * u).exp(),
                }
            })
            .collect()
    }
}

/// Fully validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gate: GateConfig,
    pub oracle_check: bool,
    pub oracle_bins: usize,
    pub oracle_truncation: usize,
    pub linearization_alphas: Vec<f64>,
    pub sweep: Vec<SweepAxis>,
    values: BTreeMap<&'static str, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_values(BTreeMap::new()).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse { line, message: format!("expected `key = value`, got `{content}`") });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigError::Parse { line, message: "missing key before `=`".into() });
            }
            let Some(s) = spec(key) else {
                return Err(ConfigError::UnknownKey { line, key: key.to_string(), suggestion: nearest_key(key) });
            };
            if values.insert(s.key, value.to_string()).is_some() {
                return Err(ConfigError::Parse { line, message: format!("duplicate key `{key}`") });
            }
        }
        Self::from_values(values)
    }

    /// Copy with one numeric key replaced, as used by sweeps.
    pub fn with_value(&self, key: &str, value: f64) -> Result<Self, ConfigError> {
        let s = spec(key).ok_or_else(|| invalid(key, "unknown key"))?;
        if s.kind != Kind::Number {
            return Err(invalid(key, "not a numeric key"));
        }
        let mut values = self.values.clone();
        values.insert(s.key, format!("{value:?}"));
        Self::from_values(values)
    }

    /// Every key with its effective value, in a fixed order.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|k| (k.key, self.values.get(k.key).cloned().unwrap_or_else(|| k.default.to_string())))
            .collect()
    }

    fn from_values(values: BTreeMap<&'static str, String>) -> Result<Self, ConfigError> {
        let get = |key: &str| -> &str {
            values.get(key).map(String::as_str).unwrap_or_else(|| spec(key).expect("registered key").default)
        };
        let number = |key: &str| -> Result<f64, ConfigError> {
            let v = get(key);
            let x: f64 = v.parse().map_err(|_| invalid(key, format!("`{v}` is not a number")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(invalid(key, "must be finite"))
            }
        };
        let positive = |key: &str| -> Result<f64, ConfigError> {
            let x = number(key)?;
            if x > 0.0 {
                Ok(x)
            } else {
                Err(invalid(key, format!("must be positive, got {x}")))
            }
        };
        let non_negative = |key: &str| -> Result<f64, ConfigError> {
            let x = number(key)?;
            if x >= 0.0 {
                Ok(x)
            } else {
                Err(invalid(key, format!("must be non-negative, got {x}")))
            }
        };
        let count = |key: &str| -> Result<usize, ConfigError> {
            let x = positive(key)?;
            if x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as usize)
            } else {
                Err(invalid(key, format!("must be a whole number, got {x}")))
            }
        };

        let alpha = non_negative("cat.alpha")?;
        let pulse = GaussianPulse::new(us(positive("pulse.duration_us")?), us(number("pulse.delay_us")?))
            .map_err(|e| invalid("pulse.duration_us", e.to_string()))?;
        let span = positive("grid.span_factor")? * pulse.bandwidth();
        let points = count("grid.points")?;
        let grid = FrequencyGrid::new(mhz(number("grid.center_mhz")?), span, points)
            .map_err(|e| invalid("grid.points", e.to_string()))?;
        grid.check_resolves(pulse.duration).map_err(|e| invalid("grid.span_factor", e.to_string()))?;

        let kappa = positive("cqed.kappa_over_2pi_mhz")?;
        let cqed = CqedParams {
            g_m: mhz(non_negative("cqed.g_m_over_2pi_mhz")?),
            kappa: mhz(kappa),
            kappa_s: mhz(kappa * non_negative("cqed.kappa_s_over_kappa")?),
            gamma_s: khz(non_negative("cqed.gamma_s_over_2pi_khz")?),
            occupied: true,
        };
        cqed.validate().map_err(|e| invalid("cqed", e.to_string()))?;

        let schedule = ControlSchedule::symmetric(
            mhz(positive("eit.omega0_over_2pi_mhz")?),
            positive("eit.ramp_rate_per_us")? / us(1.0),
            us(positive("eit.write_time_us")?),
            us(non_negative("eit.storage_time_us")?),
        )
        .map_err(|e| invalid("eit", e.to_string()))?;
        let shared = EitChannelParams {
            g: 0.0,
            atom_number: positive("eit.atom_number")?,
            schedule,
            gamma_ba: mhz(non_negative("eit.gamma_eg_over_2pi_mhz")?),
            gamma_bc: 0.0,
            length: positive("eit.length_mm")? * 1e-3,
            label: Polarization::L,
        };
        let left = EitChannelParams {
            g: khz(positive("eit_l.g_over_2pi_khz")?),
            gamma_bc: khz(non_negative("eit_l.gamma_bc_over_2pi_khz")?),
            ..shared
        };
        let right = EitChannelParams {
            g: khz(positive("eit_r.g_over_2pi_khz")?),
            gamma_bc: khz(non_negative("eit_r.gamma_bc_over_2pi_khz")?),
            label: Polarization::R,
            ..shared
        };
        left.validate().map_err(|e| invalid("eit_l", e.to_string()))?;
        right.validate().map_err(|e| invalid("eit_r", e.to_string()))?;

        let engine = match get("run.engine") {
            "linear" => Engine::Linear,
            "mean-field" => Engine::MeanField,
            other => return Err(invalid("run.engine", format!("expected `linear` or `mean-field`, got `{other}`"))),
        };
        let channel_model = match get("run.channel_model") {
            "physical" => ChannelModel::Physical,
            "ideal" => ChannelModel::Ideal,
            other => {
                return Err(invalid("run.channel_model", format!("expected `physical` or `ideal`, got `{other}`")))
            }
        };
        let oracle_check = match get("run.oracle_check") {
            "true" => true,
            "false" => false,
            other => return Err(invalid("run.oracle_check", format!("expected `true` or `false`, got `{other}`"))),
        };
        let mean_field_tol = positive("run.mean_field_tol")?;
        if !(1e-12..=1e-6).contains(&mean_field_tol) {
            return Err(invalid("run.mean_field_tol", "must lie in [1e-12, 1e-6]"));
        }
        let oracle_bins = count("oracle.bins")?;
        let oracle_truncation = count("oracle.truncation")?;

        let alphas_text = get("linearization.alphas");
        let linearization_alphas = alphas_text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s.parse::<f64>() {
                Ok(a) if a.is_finite() && a >= 0.0 => Ok(a),
                _ => Err(invalid("linearization.alphas", format!("`{s}` is not a non-negative number"))),
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut sweep = Vec::new();
        for key in ["sweep.axis1", "sweep.axis2"] {
            let text = get(key);
            if !text.is_empty() {
                sweep.push(SweepAxis::parse(key, text)?);
            }
        }
        if sweep.len() == 2 && sweep[0].key == sweep[1].key {
            return Err(invalid("sweep.axis2", "both axes sweep the same key"));
        }

        let gate = GateConfig {
            eit: [left, right],
            cqed,
            alpha,
            pulse,
            grid,
            channel_model,
            engine,
            mean_field_tol,
        };
        Ok(Self { gate, oracle_check, oracle_bins, oracle_truncation, linearization_alphas, sweep, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_sample_parameters() {
        let c = RunConfig::parse("").unwrap();
        let s = GateConfig::sample();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(c.gate.cqed.g_m, mhz(2.723)) < 1e-15);
        assert!(rel(c.gate.cqed.kappa, mhz(2.0)) < 1e-15);
        assert!(rel(c.gate.cqed.gamma_s, khz(4.78)) < 1e-15);
        assert!(rel(c.gate.pulse.duration, 0.5e-6) < 1e-15);
        assert!(rel(c.gate.eit[0].schedule.storage_time(), 16e-6) < 1e-12);
        assert!(rel(c.gate.eit[0].gamma_ba, mhz(3.0)) < 1e-15);
        assert!(rel(c.gate.eit[1].g, mhz(0.012)) < 1e-12);
        assert!(rel(c.gate.eit[0].g, mhz(0.029)) < 1e-12);
        assert!(rel(c.gate.alpha, s.alpha) < 1e-15);
        assert!(rel(c.gate.grid.span(), s.grid.span()) < 1e-12);
        assert_eq!(c.gate.grid.len(), s.grid.len());
        assert_eq!(c.gate.engine, Engine::Linear);
        assert!(c.sweep.is_empty());
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn kappa_s_is_relative_to_kappa() {
        let c = RunConfig::parse("cqed.kappa_s_over_kappa = 0.01\ncqed.kappa_over_2pi_mhz = 3").unwrap();
        assert!((c.gate.cqed.kappa_s - 0.01 * mhz(3.0)).abs() < 1e-9);
    }

    #[test]
    fn misspelled_key_names_the_nearest_key() {
        let err = RunConfig::parse("# comment\n\ncqed.kapa_over_2pi_mhz = 2\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 3,
                key: "cqed.kapa_over_2pi_mhz".into(),
                suggestion: Some("cqed.kappa_over_2pi_mhz".into())
            }
        );
        assert!(err.to_string().contains("cqed.kappa_over_2pi_mhz"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = RunConfig::parse("cat.alpha = 1\nnot a pair\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let err = RunConfig::parse("cat.alpha = 1\ncat.alpha = 2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn invalid_values_name_the_key() {
        let err = RunConfig::parse("cqed.kappa_over_2pi_mhz = -1").unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { key, .. } if key == "cqed.kappa_over_2pi_mhz"));
        let err = RunConfig::parse("run.engine = quantum").unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { key, .. } if key == "run.engine"));
        let err = RunConfig::parse("grid.points = 65").unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { key, .. } if key == "grid.span_factor"));
    }

    #[test]
    fn sweep_axes_are_parsed_and_checked() {
        let c = RunConfig::parse("sweep.axis1 = cqed.kappa_s_over_kappa log 1e-4 1e-2 3").unwrap();
        let v = c.sweep[0].values();
        assert_eq!(v.len(), 3);
        assert!((v[0] - 1e-4).abs() < 1e-18 && (v[1] - 1e-3).abs() < 1e-15 && (v[2] - 1e-2).abs() < 1e-15);
        assert!(RunConfig::parse("sweep.axis1 = cqed.kappa_s_over_kappa lin 0 1 1").is_err());
        assert!(RunConfig::parse("sweep.axis1 = cqed.kapa lin 0 1 3").is_err());
        assert!(RunConfig::parse("sweep.axis1 = run.engine lin 0 1 3").is_err());
        assert!(RunConfig::parse("sweep.axis1 = cat.alpha log 0 1 3").is_err());
    }

    #[test]
    fn with_value_round_trips_exactly() {
        let c = RunConfig::default().with_value("cat.alpha", 0.1 + 0.2).unwrap();
        assert_eq!(c.gate.alpha, 0.1 + 0.2);
        assert!(RunConfig::default().with_value("run.engine", 1.0).is_err());
    }

    #[test]
    fn resolved_lists_every_key_once() {
        let c = RunConfig::parse("cat.alpha = 2").unwrap();
        let r = c.resolved();
        assert_eq!(r.len(), KEYS.len());
        assert!(r.contains(&("cat.alpha", "2".to_string())));
    }
}
