//! Strict flat key-value config format with one optional `[params]`
//! section. Unknown keys, duplicate keys and malformed lines are rejected
//! with line-numbered diagnostics; experiment code additionally rejects
//! parameter keys it does not recognize.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const EXPERIMENT_IDS: &[&str] = &[
    "nig-table",
    "alpha-integral",
    "sde-convention",
    "pde-price",
    "hjm-check",
    "premium-table",
    "ratio-surface",
    "volatility-verdict",
    "calibrate",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(ConfigError(format!("format must be csv or json, got {other:?}"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn name(self) -> &'static str {
        self.extension()
    }
}

/// A parsed experiment configuration. Parameter values stay as strings;
/// typed access (with consumption tracking) goes through [`Params`].
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<String>,
    /// key -> (value, 1-based source line)
    pub params: BTreeMap<String, (String, usize)>,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut experiment: Option<String> = None;
    let mut seed: Option<u64> = None;
    let mut format: Option<OutputFormat> = None;
    let mut out: Option<String> = None;
    let mut params: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut in_params = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(section) = line.strip_prefix('[') {
            let section = section
                .strip_suffix(']')
                .ok_or_else(|| ConfigError(format!("line {lineno}: unterminated section header")))?
                .trim();
            if section != "params" {
                return Err(ConfigError(format!(
                    "line {lineno}: unknown section [{section}], only [params] is allowed"
                )));
            }
            if in_params {
                return Err(ConfigError(format!("line {lineno}: duplicate [params] section")));
            }
            in_params = true;
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {lineno}: expected `key = value`")))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(ConfigError(format!("line {lineno}: empty key")));
        }
        if in_params {
            if params.insert(key.to_string(), (value.to_string(), lineno)).is_some() {
                return Err(ConfigError(format!("line {lineno}: duplicate parameter key {key:?}")));
            }
            continue;
        }
        match key {
            "experiment" => {
                if experiment.is_some() {
                    return Err(ConfigError(format!("line {lineno}: duplicate key `experiment`")));
                }
                if !EXPERIMENT_IDS.contains(&value) {
                    return Err(ConfigError(format!(
                        "line {lineno}: unknown experiment {value:?}; expected one of {}",
                        EXPERIMENT_IDS.join(", ")
                    )));
                }
                experiment = Some(value.to_string());
            }
            "seed" => {
                if seed.is_some() {
                    return Err(ConfigError(format!("line {lineno}: duplicate key `seed`")));
                }
                seed = Some(value.parse().map_err(|_| {
                    ConfigError(format!("line {lineno}: seed must be a u64, got {value:?}"))
                })?);
            }
            "format" => {
                if format.is_some() {
                    return Err(ConfigError(format!("line {lineno}: duplicate key `format`")));
                }
                format = Some(
                    OutputFormat::parse(value)
                        .map_err(|e| ConfigError(format!("line {lineno}: {}", e.0)))?,
                );
            }
            "out" => {
                if out.is_some() {
                    return Err(ConfigError(format!("line {lineno}: duplicate key `out`")));
                }
                out = Some(value.to_string());
            }
            other => {
                return Err(ConfigError(format!(
                    "line {lineno}: unknown key {other:?}; expected experiment, seed, format or out"
                )));
            }
        }
    }

    Ok(ExperimentConfig {
        experiment: experiment
            .ok_or_else(|| ConfigError("missing required key `experiment`".into()))?,
        seed: seed.unwrap_or(0),
        format: format.unwrap_or(OutputFormat::Csv),
        out,
        params,
    })
}

/// Typed parameter access with consumption tracking, so unused keys can
/// be reported as unknown.
pub struct Params {
    map: BTreeMap<String, (String, usize)>,
    consumed: std::cell::RefCell<Vec<String>>,
}

impl Params {
    pub fn new(map: BTreeMap<String, (String, usize)>) -> Self {
        Params { map, consumed: std::cell::RefCell::new(Vec::new()) }
    }

    fn raw(&self, key: &str) -> Option<&(String, usize)> {
        let v = self.map.get(key);
        if v.is_some() {
            self.consumed.borrow_mut().push(key.to_string());
        }
        v
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).map(|(v, _)| v.as_str()).unwrap_or(default)
    }

    pub fn require_str(&self, key: &str) -> Result<&str, ConfigError> {
        self.raw(key)
            .map(|(v, _)| v.as_str())
            .ok_or_else(|| ConfigError(format!("missing required parameter {key:?}")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, value: &str, line: usize) -> Result<T, ConfigError> {
        value.parse().map_err(|_| {
            ConfigError(format!(
                "line {line}: parameter {key:?} has invalid value {value:?}"
            ))
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.raw(key) {
            Some((v, line)) => self.parse(key, &v.clone(), *line),
            None => Ok(default),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        let (v, line) = self
            .raw(key)
            .cloned()
            .ok_or_else(|| ConfigError(format!("missing required parameter {key:?}")))?;
        self.parse(key, &v, line)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.raw(key) {
            Some((v, line)) => self.parse(key, &v.clone(), *line),
            None => Ok(default),
        }
    }

    /// Comma-separated list of reals.
    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.raw(key) {
            Some((v, line)) => {
                let (v, line) = (v.clone(), *line);
                v.split(',')
                    .map(|s| self.parse(key, s.trim(), line))
                    .collect()
            }
            None => Ok(default.to_vec()),
        }
    }

    /// Fails if any parameter key was never consumed by the experiment.
    pub fn finish(&self) -> Result<(), ConfigError> {
        let consumed = self.consumed.borrow();
        for (key, (_, line)) in &self.map {
            if !consumed.iter().any(|k| k == key) {
                return Err(ConfigError(format!(
                    "line {line}: unknown parameter {key:?} for this experiment"
                )));
            }
        }
        Ok(())
    }
}

/// Renders a config back to the on-disk format; the output re-parses to
/// an equivalent config and doubles as the run manifest.
pub fn render_manifest(config: &ExperimentConfig, version: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!("# ratfin {version}\n"));
    s.push_str(&format!("experiment = {}\n", config.experiment));
    s.push_str(&format!("seed = {}\n", config.seed));
    s.push_str(&format!("format = {}\n", config.format.name()));
    if let Some(out) = &config.out {
        s.push_str(&format!("out = {out}\n"));
    }
    if !config.params.is_empty() {
        s.push_str("\n[params]\n");
        for (k, (v, _)) in &config.params {
            s.push_str(&format!("{k} = {v}\n"));
        }
    }
    s
}
