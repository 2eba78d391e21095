//! Sweep configuration and its flat `key = value` text form.
//!
//! ```text
//! # comments start with '#'
//! code = rp_a            # builtin name or path to a QCLDPC file
//! z = 384
//! lift_seed = 1
//! scenario = p2p         # p2p | distributed_cc | mrc_cc
//! relays = 2             # relay scenarios only
//! snr_db = 0:2.5:40      # start:step:stop, or a comma list
//! min_word_errors = 100
//! max_words = 10000000
//! max_iterations = 100
//! seed = 1
//! fading = nakagami      # nakagami | rayleigh | awgn
//! nakagami_m = 1.5
//! success_rule = genie   # genie | syndrome
//! decoder = sum_product  # sum_product | min_sum
//! min_sum_factor = 0.8
//! precision = f64        # f64 | f32
//! noiseless = false
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::Fading;
use crate::cooperation::SuccessRule;
use crate::decoder::CheckRule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeSource {
    Builtin(String),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepScenario {
    P2p,
    DistributedCc { relays: usize },
    MrcCc { relays: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F64,
    F32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub code: CodeSource,
    pub z: usize,
    pub lift_seed: u64,
    pub scenario: SweepScenario,
    pub snr_db: Vec<f64>,
    pub min_word_errors: u64,
    pub max_words: u64,
    pub max_iterations: usize,
    pub seed: u64,
    pub fading: Fading,
    pub success_rule: SuccessRule,
    pub decoder: CheckRule,
    pub precision: Precision,
    /// Unit gains and no noise; for plumbing checks.
    pub noiseless: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            code: CodeSource::Builtin("rp_a".into()),
            z: 384,
            lift_seed: 1,
            scenario: SweepScenario::P2p,
            snr_db: default_grid(SweepScenario::P2p),
            min_word_errors: 100,
            max_words: 10_000_000,
            max_iterations: 100,
            seed: 1,
            fading: Fading::Nakagami { m: 1.5 },
            success_rule: SuccessRule::Genie,
            decoder: CheckRule::SumProduct,
            precision: Precision::F64,
            noiseless: false,
        }
    }
}

/// 0-40 dB for point-to-point, 0-30 dB for relaying, in 2.5 dB steps.
pub fn default_grid(scenario: SweepScenario) -> Vec<f64> {
    let stop = match scenario {
        SweepScenario::P2p => 40.0,
        _ => 30.0,
    };
    grid(0.0, 2.5, stop)
}

/// `start, start+step, ...` up to `stop` inclusive (with a small tolerance).
pub fn grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start + step * i as f64).collect()
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.snr_db.is_empty() {
            return bad("snr grid is empty");
        }
        if self.snr_db.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("snr grid must be strictly increasing");
        }
        if self.snr_db.iter().any(|v| !v.is_finite()) {
            return bad("snr grid values must be finite");
        }
        if self.min_word_errors < 10 {
            return bad("min_word_errors must be at least 10");
        }
        if self.max_words == 0 {
            return bad("max_words must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if let Some(m) = self.fading.shape() {
            if m.is_nan() || m < 0.5 {
                return bad("nakagami_m must be at least 0.5");
            }
        }
        match self.scenario {
            SweepScenario::DistributedCc { relays: 0 } | SweepScenario::MrcCc { relays: 0 } => {
                return bad("relay scenarios need relays >= 1")
            }
            _ => {}
        }
        if let CheckRule::NormalizedMinSum { factor } = self.decoder {
            if !(factor > 0.0 && factor <= 1.0) {
                return bad("min_sum_factor must lie in (0, 1]");
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SweepConfig::default();
        let mut grid_set = false;
        let mut relays: Option<usize> = None;
        let mut scenario = "p2p".to_string();
        let mut fading = "nakagami".to_string();
        let mut m = 1.5;
        let mut decoder = "sum_product".to_string();
        let mut factor = 0.8;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let verr = |msg: String| ConfigError::Value {
                key: key.to_string(),
                msg,
            };
            macro_rules! num {
                () => {
                    value.parse().map_err(|e| verr(format!("{e}")))?
                };
            }
            match key {
                "code" => {
                    cfg.code = if crate::protograph::builtin(value).is_ok() {
                        CodeSource::Builtin(value.to_string())
                    } else {
                        CodeSource::File(PathBuf::from(value))
                    }
                }
                "z" => cfg.z = num!(),
                "lift_seed" => cfg.lift_seed = num!(),
                "scenario" => scenario = value.to_string(),
                "relays" => relays = Some(num!()),
                "snr_db" => {
                    cfg.snr_db = parse_grid(value).map_err(verr)?;
                    grid_set = true;
                }
                "min_word_errors" => cfg.min_word_errors = num!(),
                "max_words" => cfg.max_words = parse_count(value).map_err(verr)?,
                "max_iterations" => cfg.max_iterations = num!(),
                "seed" => cfg.seed = num!(),
                "fading" => fading = value.to_string(),
                "nakagami_m" => m = num!(),
                "success_rule" => {
                    cfg.success_rule = match value {
                        "genie" => SuccessRule::Genie,
                        "syndrome" => SuccessRule::Syndrome,
                        v => return Err(verr(format!("unknown rule `{v}`"))),
                    }
                }
                "decoder" => decoder = value.to_string(),
                "min_sum_factor" => factor = num!(),
                "precision" => {
                    cfg.precision = match value {
                        "f64" => Precision::F64,
                        "f32" => Precision::F32,
                        v => return Err(verr(format!("unknown precision `{v}`"))),
                    }
                }
                "noiseless" => cfg.noiseless = num!(),
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        cfg.scenario = match scenario.as_str() {
            "p2p" => SweepScenario::P2p,
            "distributed_cc" => SweepScenario::DistributedCc {
                relays: relays.unwrap_or(2),
            },
            "mrc_cc" => SweepScenario::MrcCc {
                relays: relays.unwrap_or(2),
            },
            v => {
                return Err(ConfigError::Value {
                    key: "scenario".into(),
                    msg: format!("unknown scenario `{v}`"),
                })
            }
        };
        cfg.fading = match fading.as_str() {
            "nakagami" => Fading::Nakagami { m },
            "rayleigh" => Fading::Rayleigh,
            "awgn" => Fading::AwgnOnly,
            v => {
                return Err(ConfigError::Value {
                    key: "fading".into(),
                    msg: format!("unknown fading `{v}`"),
                })
            }
        };
        cfg.decoder = match decoder.as_str() {
            "sum_product" => CheckRule::SumProduct,
            "min_sum" => CheckRule::NormalizedMinSum { factor },
            v => {
                return Err(ConfigError::Value {
                    key: "decoder".into(),
                    msg: format!("unknown decoder `{v}`"),
                })
            }
        };
        if !grid_set {
            cfg.snr_db = default_grid(cfg.scenario);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let code = match &self.code {
            CodeSource::Builtin(n) => n.clone(),
            CodeSource::File(p) => p.display().to_string(),
        };
        let _ = writeln!(s, "code = {code}");
        let _ = writeln!(s, "z = {}", self.z);
        let _ = writeln!(s, "lift_seed = {}", self.lift_seed);
        match self.scenario {
            SweepScenario::P2p => {
                let _ = writeln!(s, "scenario = p2p");
            }
            SweepScenario::DistributedCc { relays } => {
                let _ = writeln!(s, "scenario = distributed_cc\nrelays = {relays}");
            }
            SweepScenario::MrcCc { relays } => {
                let _ = writeln!(s, "scenario = mrc_cc\nrelays = {relays}");
            }
        }
        let grid: Vec<String> = self.snr_db.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(s, "snr_db = {}", grid.join(","));
        let _ = writeln!(s, "min_word_errors = {}", self.min_word_errors);
        let _ = writeln!(s, "max_words = {}", self.max_words);
        let _ = writeln!(s, "max_iterations = {}", self.max_iterations);
        let _ = writeln!(s, "seed = {}", self.seed);
        match self.fading {
            Fading::Nakagami { m } => {
                let _ = writeln!(s, "fading = nakagami\nnakagami_m = {m}");
            }
            Fading::Rayleigh => {
                let _ = writeln!(s, "fading = rayleigh");
            }
            Fading::AwgnOnly => {
                let _ = writeln!(s, "fading = awgn");
            }
        }
        let rule = match self.success_rule {
            SuccessRule::Genie => "genie",
            SuccessRule::Syndrome => "syndrome",
        };
        let _ = writeln!(s, "success_rule = {rule}");
        match self.decoder {
            CheckRule::SumProduct => {
                let _ = writeln!(s, "decoder = sum_product");
            }
            CheckRule::NormalizedMinSum { factor } => {
                let _ = writeln!(s, "decoder = min_sum\nmin_sum_factor = {factor}");
            }
        }
        let precision = match self.precision {
            Precision::F64 => "f64",
            Precision::F32 => "f32",
        };
        let _ = writeln!(s, "precision = {precision}");
        let _ = writeln!(s, "noiseless = {}", self.noiseless);
        s
    }

    /// Hash of the canonical text.
    pub fn config_hash(&self) -> String {
        hash_text(&self.to_text())
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn hash_text(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Positive integer, also in float notation such as `1e7`.
pub fn parse_count(v: &str) -> Result<u64, String> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = v.parse().map_err(|e| format!("{e}"))?;
    if f >= 1.0 && f.fract() == 0.0 && f < 1.8e19 {
        Ok(f as u64)
    } else {
        Err(format!("`{v}` is not a positive integer"))
    }
}

/// `start:step:stop` or a comma-separated list.
pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            return Err("range must be start:step:stop".into());
        }
        let (a, s, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(s > 0.0) || b < a {
            return Err("range needs step > 0 and stop >= start".into());
        }
        return Ok(grid(a, s, b));
    }
    v.split(',').map(num).collect()
}
