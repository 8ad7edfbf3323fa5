//! Plain-text run configuration: one `key = value` per line, `#` comments.
//!
//! All physical quantities are dimensionless, expressed in units of the
//! spontaneous rate `gamma`. Parse errors carry the offending line number.

use qsync::dynamics::{SystemParams, TimeGrid};
use qsync::error::{Error, Result};
use qsync::num_complex::Complex64;
use qsync::state::InitialState;

/// Serialization format for datasets (`csv` is the default).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!(
                "output_format must be 'csv' or 'json', got '{other}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        self.extension()
    }
}

/// One simulation run: physics, grid, initial state, output format.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lambda_over_gamma: f64,
    pub d_over_gamma: f64,
    pub omega_over_gamma: f64,
    pub modulation_on: bool,
    pub t_max_gamma: f64,
    /// Steps of the output grid; derived from the physics when absent.
    pub n_steps: Option<usize>,
    /// Observation phase for sync observables.
    pub phi: f64,
    pub c_e_re: f64,
    pub c_e_im: f64,
    pub c_g_re: f64,
    pub c_g_im: f64,
    pub output_format: OutputFormat,
}

const KNOWN_KEYS: &[&str] = &[
    "lambda_over_gamma",
    "d_over_gamma",
    "omega_over_gamma",
    "modulation_on",
    "t_max_gamma",
    "n_steps",
    "phi",
    "c_e_re",
    "c_e_im",
    "c_g_re",
    "c_g_im",
    "output_format",
];

impl RunConfig {
    /// Parse and validate a configuration. `lambda_over_gamma` and
    /// `t_max_gamma` are required; everything else has defaults (equal
    /// superposition, modulation off, phi = 0, CSV output).
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            lambda_over_gamma: f64::NAN,
            d_over_gamma: 0.0,
            omega_over_gamma: 0.0,
            modulation_on: false,
            t_max_gamma: f64::NAN,
            n_steps: None,
            phi: 0.0,
            c_e_re: std::f64::consts::FRAC_1_SQRT_2,
            c_e_im: 0.0,
            c_g_re: std::f64::consts::FRAC_1_SQRT_2,
            c_g_im: 0.0,
            output_format: OutputFormat::Csv,
        };
        let mut seen: Vec<&str> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid(format!(
                    "line {line_no}: expected 'key = value', got '{line}'"
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(&canonical) = KNOWN_KEYS.iter().find(|&&k| k == key) else {
                return Err(Error::invalid(format!(
                    "line {line_no}: unknown key '{key}'"
                )));
            };
            if seen.contains(&canonical) {
                return Err(Error::invalid(format!(
                    "line {line_no}: duplicate key '{key}'"
                )));
            }
            seen.push(canonical);

            let bad_value = |what: &str| {
                Error::invalid(format!(
                    "line {line_no}: invalid value for {key}: expected {what}, got '{value}'"
                ))
            };
            match canonical {
                "lambda_over_gamma" => {
                    cfg.lambda_over_gamma = value.parse().map_err(|_| bad_value("a number"))?
                }
                "d_over_gamma" => {
                    cfg.d_over_gamma = value.parse().map_err(|_| bad_value("a number"))?
                }
                "omega_over_gamma" => {
                    cfg.omega_over_gamma = value.parse().map_err(|_| bad_value("a number"))?
                }
                "modulation_on" => {
                    cfg.modulation_on = match value {
                        "true" => true,
                        "false" => false,
                        _ => return Err(bad_value("true or false")),
                    }
                }
                "t_max_gamma" => {
                    cfg.t_max_gamma = value.parse().map_err(|_| bad_value("a number"))?
                }
                "n_steps" => {
                    cfg.n_steps =
                        Some(value.parse().map_err(|_| bad_value("a positive integer"))?)
                }
                "phi" => cfg.phi = value.parse().map_err(|_| bad_value("a number"))?,
                "c_e_re" => cfg.c_e_re = value.parse().map_err(|_| bad_value("a number"))?,
                "c_e_im" => cfg.c_e_im = value.parse().map_err(|_| bad_value("a number"))?,
                "c_g_re" => cfg.c_g_re = value.parse().map_err(|_| bad_value("a number"))?,
                "c_g_im" => cfg.c_g_im = value.parse().map_err(|_| bad_value("a number"))?,
                "output_format" => {
                    cfg.output_format = OutputFormat::parse(value)
                        .map_err(|_| bad_value("'csv' or 'json'"))?
                }
                _ => unreachable!(),
            }
        }

        if !seen.contains(&"lambda_over_gamma") {
            return Err(Error::invalid("missing required key 'lambda_over_gamma'"));
        }
        if !seen.contains(&"t_max_gamma") {
            return Err(Error::invalid("missing required key 't_max_gamma'"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Semantic validation beyond syntax; every failure is an exit-2 case.
    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if !(self.t_max_gamma.is_finite() && self.t_max_gamma > 0.0) {
            return Err(Error::invalid(format!(
                "t_max_gamma must be > 0, got {}",
                self.t_max_gamma
            )));
        }
        if let Some(n) = self.n_steps {
            if n < 2 {
                return Err(Error::invalid(format!("n_steps must be >= 2, got {n}")));
            }
        }
        if !self.phi.is_finite() {
            return Err(Error::invalid("phi must be finite"));
        }
        self.initial_state()?;
        Ok(())
    }

    /// Canonical text form; `parse(serialize(c)) == c` for any valid config.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("lambda_over_gamma = {}\n", self.lambda_over_gamma));
        out.push_str(&format!("d_over_gamma = {}\n", self.d_over_gamma));
        out.push_str(&format!("omega_over_gamma = {}\n", self.omega_over_gamma));
        out.push_str(&format!("modulation_on = {}\n", self.modulation_on));
        out.push_str(&format!("t_max_gamma = {}\n", self.t_max_gamma));
        if let Some(n) = self.n_steps {
            out.push_str(&format!("n_steps = {n}\n"));
        }
        out.push_str(&format!("phi = {}\n", self.phi));
        out.push_str(&format!("c_e_re = {}\n", self.c_e_re));
        out.push_str(&format!("c_e_im = {}\n", self.c_e_im));
        out.push_str(&format!("c_g_re = {}\n", self.c_g_re));
        out.push_str(&format!("c_g_im = {}\n", self.c_g_im));
        out.push_str(&format!("output_format = {}\n", self.output_format.name()));
        out
    }

    pub fn params(&self) -> SystemParams {
        SystemParams {
            gamma: 1.0,
            lambda: self.lambda_over_gamma,
            d: self.d_over_gamma,
            omega: self.omega_over_gamma,
            modulation_on: self.modulation_on,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        match self.n_steps {
            Some(n) => TimeGrid::new(self.t_max_gamma, n),
            None => TimeGrid::default_for(&self.params(), self.t_max_gamma),
        }
    }

    pub fn initial_state(&self) -> Result<InitialState> {
        InitialState::new(
            Complex64::new(self.c_g_re, self.c_g_im),
            Complex64::new(self.c_e_re, self.c_e_im),
        )
    }
}
