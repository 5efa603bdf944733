//! Experiment configuration.
//!
//! Configs are TOML files whose keys match the fields of [`ExperimentConfig`];
//! every key is optional and command-line flags override file values.
//!
//! ```toml
//! scenario = "decomp"
//! sweep = "n_rf"
//! values = [1, 2, 4, 8, 16]
//! bits = "inf"          # or an integer
//! p_dbm = 10.0
//! trials = 50
//! seed = 7
//! ```
//!
//! Transmit power is given in dBm and converted to watts once. The SNR is
//! `sigma_s^2 |beta|^2 P / sigma_n^2` with `sigma_s = 1`, so the noise level
//! follows from `snr_db`, `beta` and `p_dbm`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use aod_precoder::{deg, OutputPairing, QuantizerSpec};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    #[default]
    Decomp,
    Aeb,
    Quantbound,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Decomp => "decomp",
            Self::Aeb => "aeb",
            Self::Quantbound => "quantbound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    #[value(name = "n_rf")]
    NRf,
    #[value(name = "bits")]
    Bits,
    #[value(name = "n_tx")]
    NTx,
    #[value(name = "aod")]
    Aod,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            Self::NRf => "n_rf",
            Self::Bits => "bits",
            Self::NTx => "n_tx",
            Self::Aod => "aod",
        }
    }
}

/// A sweep value as written in a config: integer, float or text (`"inf"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Int(v) => write!(f, "{v}"),
            Self::Float(v) => write!(f, "{v}"),
            Self::Text(v) => f.write_str(v),
        }
    }
}

impl FromStr for SweepValue {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        Ok(if let Ok(v) = s.parse::<i64>() {
            Self::Int(v)
        } else if let Some(v) = s.parse::<f64>().ok().filter(|v| v.is_finite()) {
            Self::Float(v)
        } else {
            Self::Text(s.to_string())
        })
    }
}

impl SweepValue {
    fn as_count(&self, what: &str) -> Result<usize> {
        match *self {
            Self::Int(v) if v > 0 => Ok(v as usize),
            _ => Err(ExperimentError::Config(format!("{what} must be a positive integer, got '{self}'"))),
        }
    }

    fn as_bits(&self) -> Result<QuantizerSpec> {
        match self {
            Self::Int(v) if *v > 0 && *v <= 52 => Ok(QuantizerSpec::Finite(*v as u32)),
            Self::Text(t) => t
                .parse()
                .map_err(|_| ExperimentError::Config(format!("bad bit count '{t}'"))),
            _ => Err(ExperimentError::Config(format!("bad bit count '{self}'"))),
        }
    }

    fn as_angle(&self) -> Result<f64> {
        match *self {
            Self::Int(v) => Ok(v as f64),
            Self::Float(v) => Ok(v),
            Self::Text(_) => Err(ExperimentError::Config(format!("angle must be numeric, got '{self}'"))),
        }
    }
}

mod bits_format {
    use super::*;

    pub fn serialize<S: Serializer>(spec: &QuantizerSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
        match spec {
            QuantizerSpec::Finite(b) => s.serialize_u32(*b),
            QuantizerSpec::Infinite => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<QuantizerSpec, D::Error> {
        let v = SweepValue::deserialize(d)?;
        v.as_bits().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub sweep: Option<SweepVar>,
    pub values: Vec<SweepValue>,
    pub n_tx: usize,
    pub n_rf: usize,
    pub m_pilots: usize,
    pub p_dbm: f64,
    #[serde(with = "bits_format")]
    pub bits: QuantizerSpec,
    pub snr_db: f64,
    /// Nominal channel gain magnitude used for the design and the bound.
    pub beta: f64,
    /// Angles (degrees) at which single-UE bounds are evaluated.
    pub aod_deg: Vec<f64>,
    /// UE directions (degrees); each one centers an uncertainty interval.
    pub ue_angles: Vec<f64>,
    pub half_width_deg: f64,
    pub trials: usize,
    pub seed: u64,
    pub i_max: usize,
    pub k_max: usize,
    pub pairing: OutputPairing,
    /// Archive per-iteration decomposition diagnostics with each trial.
    pub diagnostics: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Decomp,
            sweep: None,
            values: Vec::new(),
            n_tx: 16,
            n_rf: 8,
            m_pilots: 20,
            p_dbm: 10.0,
            bits: QuantizerSpec::Finite(5),
            snr_db: 10.0,
            beta: 1.0,
            aod_deg: vec![0.0],
            ue_angles: vec![0.0],
            half_width_deg: 5.0,
            trials: 50,
            seed: 0,
            i_max: 10,
            k_max: 50,
            pairing: OutputPairing::Refit,
            diagnostics: false,
        }
    }
}

/// Concrete parameters at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub label: String,
    pub n_tx: usize,
    pub n_rf: usize,
    pub bits: QuantizerSpec,
    pub aod_deg: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    /// Transmit power in watts.
    pub fn power(&self) -> f64 {
        10f64.powf(self.p_dbm / 10.0) / 1000.0
    }

    /// Noise standard deviation giving the configured SNR with unit signal variance.
    pub fn sigma_n(&self) -> f64 {
        let snr = 10f64.powf(self.snr_db / 10.0);
        (self.beta * self.beta * self.power() / snr).sqrt()
    }

    pub fn sweep_name(&self) -> &'static str {
        self.sweep.map_or("none", |s| s.name())
    }

    /// Expands the sweep into concrete points; a config without a sweep has one point.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let base = SweepPoint {
            label: "-".into(),
            n_tx: self.n_tx,
            n_rf: self.n_rf,
            bits: self.bits,
            aod_deg: self.aod_deg.clone(),
        };
        let Some(var) = self.sweep else {
            return Ok(vec![base]);
        };
        if self.values.is_empty() {
            return Err(ExperimentError::Config(format!("sweep over {} has no values", var.name())));
        }
        self.values
            .iter()
            .map(|v| {
                let mut p = base.clone();
                p.label = v.to_string();
                match var {
                    SweepVar::NRf => p.n_rf = v.as_count("n_rf")?,
                    SweepVar::NTx => p.n_tx = v.as_count("n_tx")?,
                    SweepVar::Bits => p.bits = v.as_bits()?,
                    SweepVar::Aod => p.aod_deg = vec![v.as_angle()?],
                }
                Ok(p)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.i_max == 0 || self.k_max == 0 {
            return bad("i_max and k_max must be at least 1".into());
        }
        if self.m_pilots == 0 {
            return bad("m_pilots must be at least 1".into());
        }
        if !self.p_dbm.is_finite() || !self.snr_db.is_finite() {
            return bad("p_dbm and snr_db must be finite".into());
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad("beta must be positive".into());
        }
        if !(self.half_width_deg >= 0.0) || self.half_width_deg >= 90.0 {
            return bad("half_width_deg must lie in [0, 90)".into());
        }
        for &a in self.aod_deg.iter().chain(&self.ue_angles) {
            if !(a.abs() < 90.0) {
                return bad(format!("angle {a} deg is outside (-90, 90)"));
            }
        }
        match (self.scenario, self.sweep) {
            (Scenario::Decomp, Some(SweepVar::Aod)) => return bad("decomp cannot sweep the AoD".into()),
            (Scenario::Quantbound, Some(v)) if v != SweepVar::Bits => {
                return bad("quantbound only sweeps bits".into())
            }
            _ => {}
        }
        if self.scenario == Scenario::Aeb {
            if self.ue_angles.is_empty() {
                return bad("aeb needs at least one UE angle".into());
            }
            if self.aod_deg.is_empty() {
                return bad("aeb needs at least one evaluation angle".into());
            }
            let ues = self.ue_angles.len();
            let per_design = if ues > 1 { vec![1, ues] } else { vec![1] };
            for l in per_design {
                if self.m_pilots < 2 * l || self.m_pilots % (2 * l) != 0 {
                    return bad(format!("m_pilots = {} must be a positive multiple of {}", self.m_pilots, 2 * l));
                }
            }
            for &c in &self.ue_angles {
                if (c.abs() + self.half_width_deg) >= 90.0 {
                    return bad(format!("uncertainty interval around {c} deg leaves (-90, 90)"));
                }
            }
        }
        for p in self.points()? {
            if p.n_rf == 0 || p.n_rf > p.n_tx {
                return bad(format!("need 1 <= n_rf <= n_tx, got n_rf = {} and n_tx = {}", p.n_rf, p.n_tx));
            }
            if p.aod_deg.iter().any(|a| !(a.abs() < 90.0)) {
                return bad(format!("sweep angle {} is outside (-90, 90)", p.label));
            }
        }
        Ok(())
    }

    pub fn half_width(&self) -> f64 {
        deg(self.half_width_deg)
    }
}
