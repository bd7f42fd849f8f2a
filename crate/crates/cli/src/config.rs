//! Config files and argument value parsers.

use std::fs;
use std::path::{Path, PathBuf};

use marton::analysis::CodebookMode;
use marton::channel::{BroadcastChannel, InputDesign};
use marton::divergence::I0Method;
use marton::Execution;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

/// Error budget in probabilities. Every field is required.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    /// Target error of the theorem; checked only in theorem mode.
    pub eps: f64,
    pub eps0: f64,
    pub eps_inf: f64,
    pub eps_tilde: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rates {
    Auto(AutoRates),
    Fixed {
        #[serde(rename = "R1")]
        rate1: u32,
        #[serde(rename = "R2")]
        rate2: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoRates {
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bands {
    pub r1: u32,
    pub r2: u32,
}

/// A `simulate` run. Paths are relative to the config file until resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub channel: PathBuf,
    pub design: PathBuf,
    pub blocklength: usize,
    pub budget: Budget,
    pub rates: Rates,
    /// Explicit band exponents; chosen automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bands: Option<Bands>,
    /// Require the budget inequality of the theorem for the setting.
    pub theorem_mode: bool,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub codebook: CodebookMode,
    #[serde(default)]
    pub i0_method: I0Method,
    #[serde(default)]
    pub execution: Execution,
}

impl SimulateConfig {
    /// Reads a config, or the config embedded in a report, with paths made absolute.
    pub fn load(path: &Path) -> CliResult<Self> {
        let parse = |source| CliError::Parse { path: path.to_path_buf(), source };
        let value: serde_json::Value = read_json(path)?;
        let mut config: Self = match value.get("config") {
            Some(embedded) => serde_json::from_value(embedded.clone()).map_err(parse)?,
            // Parse the text again so that errors carry line and column.
            None => read_json(path)?,
        };
        let base = path.parent().unwrap_or(Path::new("."));
        config.channel = absolute(base, &config.channel)?;
        config.design = absolute(base, &config.design)?;
        Ok(config)
    }

    pub fn load_channel(&self) -> CliResult<BroadcastChannel> {
        read_json(&self.channel)
    }

    pub fn load_design(&self) -> CliResult<InputDesign> {
        read_json(&self.design)
    }
}

fn absolute(base: &Path, path: &Path) -> CliResult<PathBuf> {
    let joined = base.join(path);
    fs::canonicalize(&joined).map_err(|source| CliError::Read { path: joined, source })
}

/// Accepts decimals and powers of two written `2^k`.
pub fn parse_probability(s: &str) -> Result<f64, String> {
    let value = match s.trim().strip_prefix("2^") {
        Some(exp) => exp.parse::<i32>().map(|k| 2f64.powi(k)).map_err(|e| format!("{s}: {e}"))?,
        None => s.trim().parse::<f64>().map_err(|e| format!("{s}: {e}"))?,
    };
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(format!("{s} is not in (0, 1]"))
    }
}

/// Expands lists such as `1,2,4,...,128` (geometric) or `8,16,...,64` (arithmetic when the
/// first two terms are not related by an integer ratio that continues to the end).
pub fn parse_n_list(s: &str) -> Result<NList, String> {
    expand_n_list(s).map(NList)
}

/// Parsed blocklength list; a newtype so that clap treats it as one value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NList(pub Vec<usize>);

fn expand_n_list(s: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let number = |p: &str| p.parse::<usize>().map_err(|e| format!("{p:?}: {e}"));
    let Some(gap) = parts.iter().position(|&p| p == "..." || p == "…") else {
        let list = parts.iter().map(|p| number(p)).collect::<Result<Vec<_>, _>>()?;
        return check_list(list);
    };
    if gap < 2 || gap + 2 != parts.len() {
        return Err("`...` needs two terms before it and exactly one after".into());
    }
    let head = parts[..gap].iter().map(|p| number(p)).collect::<Result<Vec<_>, _>>()?;
    let last = number(parts[gap + 1])?;
    let (a, b) = (head[gap - 2], head[gap - 1]);
    if b <= a {
        return Err("terms before `...` must increase".into());
    }
    let extend = |step: &dyn Fn(usize) -> usize| {
        let mut list = head.clone();
        while let Some(next) = list.last().map(|&cur| step(cur)).filter(|&n| n <= last) {
            list.push(next);
        }
        (list.last() == Some(&last)).then_some(list)
    };
    // A progression must also fit every term given before `...`.
    let fits = |step: &dyn Fn(usize) -> usize| head.windows(2).all(|w| step(w[0]) == w[1]);
    let ratio = |cur: usize| cur * (b / a);
    let diff = |cur: usize| cur + (b - a);
    let geometric = (a > 0 && b % a == 0 && fits(&ratio)).then(|| extend(&ratio)).flatten();
    let arithmetic = fits(&diff).then(|| extend(&diff)).flatten();
    let list = geometric.or(arithmetic).ok_or_else(|| format!("{last} is not a term of the progression"))?;
    check_list(list)
}

fn check_list(list: Vec<usize>) -> Result<Vec<usize>, String> {
    if list.is_empty() || list.contains(&0) {
        return Err("blocklengths must be positive".into());
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_list_expansion() {
        assert_eq!(expand_n_list("1,2,4,...,128").unwrap(), vec![1, 2, 4, 8, 16, 32, 64, 128]);
        assert_eq!(expand_n_list("8,16,...,40").unwrap(), vec![8, 16, 24, 32, 40]);
        assert_eq!(expand_n_list("8,16,...,64").unwrap(), vec![8, 16, 32, 64]);
        assert_eq!(expand_n_list("10,15,...,30").unwrap(), vec![10, 15, 20, 25, 30]);
        assert_eq!(expand_n_list("3, 5").unwrap(), vec![3, 5]);
        assert!(expand_n_list("1,2,4,...,100").is_err());
        assert!(expand_n_list("1,...,8").is_err());
        assert!(expand_n_list("0,1").is_err());
    }

    #[test]
    fn probability_forms() {
        assert_eq!(parse_probability("2^-10").unwrap(), 1.0 / 1024.0);
        assert_eq!(parse_probability("0.25").unwrap(), 0.25);
        assert!(parse_probability("2^3").is_err());
        assert!(parse_probability("0").is_err());
    }

    #[test]
    fn budget_fields_are_required() {
        let err = serde_json::from_str::<Budget>(r#"{"eps": 0.45, "eps0": 0.01, "eps_tilde": 0.01}"#).unwrap_err();
        assert!(err.to_string().contains("eps_inf"), "{err}");
    }

    #[test]
    fn rates_forms() {
        assert_eq!(serde_json::from_str::<Rates>(r#""auto""#).unwrap(), Rates::Auto(AutoRates::Auto));
        assert_eq!(serde_json::from_str::<Rates>(r#"{"R1": 2, "R2": 1}"#).unwrap(), Rates::Fixed { rate1: 2, rate2: 1 });
    }
}
