//! Experiment configuration: a flat `key = value` file with `#` comments.
//!
//! Keys (all optional, defaults in brackets):
//!
//! ```text
//! variant           1s | 1s-simplified | l2s | l2s-simplified | serial | ffe-only  [l2s-simplified]
//! num_states        2 | 3 | 4, simplified variants only                            [2]
//! alpha             post-filter coefficient used by the detector                   [0.55]
//! channel_alpha     second tap of the direct-isi channel                           [= alpha]
//! overlap           O                                                              [8]
//! data_len          R                                                              [16]
//! frame_symbols     symbols per frame                                              [1000000]
//! seeds             comma-separated list                                           [1]
//! noise_sigmas      comma-separated list                                           [0.3]
//! chain_mode        direct-isi | full-ffe-chain                                    [direct-isi]
//! channel_taps      comma-separated taps of the full-chain channel                 [1, 0.6, 0.25]
//! ffe_taps          odd tap count                                                  [15]
//! ffe_step          LMS step size                                                  [0.001]
//! ffe_epochs        LMS passes over the training symbols                           [5]
//! training_symbols  leading symbols used for training (not scored)                 [1000]
//! output_path       CSV destination                                                [none]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::blocks::{BlockConfig, BlockDetector};
use crate::cost::VariantId;
use crate::error::{MlseError, Result};

/// Receiver under test: a block detector, the serial reference Viterbi, or
/// symbol-by-symbol slicing of the pre-decision signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Receiver {
    Block(VariantId),
    Serial,
    FfeOnly,
}

impl Receiver {
    pub fn name(self) -> &'static str {
        match self {
            Receiver::Block(v) => v.name(),
            Receiver::Serial => "serial",
            Receiver::FfeOnly => "ffe-only",
        }
    }
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Receiver {
    type Err = MlseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Receiver::Serial),
            "ffe-only" | "slicer" => Ok(Receiver::FfeOnly),
            _ => Ok(Receiver::Block(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainMode {
    /// Symbols through `[1, channel_alpha]` plus noise; pre-decisions come
    /// from undoing the post-filter.
    DirectIsi,
    /// FIR channel, LMS-trained FFE, then the post-filter; pre-decisions are
    /// the FFE output.
    FullFfeChain,
}

impl ChainMode {
    pub fn name(self) -> &'static str {
        match self {
            ChainMode::DirectIsi => "direct-isi",
            ChainMode::FullFfeChain => "full-ffe-chain",
        }
    }
}

impl FromStr for ChainMode {
    type Err = MlseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct-isi" => Ok(ChainMode::DirectIsi),
            "full-ffe-chain" => Ok(ChainMode::FullFfeChain),
            _ => Err(invalid("chain_mode", format!("unknown mode `{s}`"))),
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> MlseError {
    MlseError::InvalidConfig {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub receiver: Receiver,
    pub num_states: usize,
    pub alpha: f64,
    pub channel_alpha: Option<f64>,
    pub block: BlockConfig,
    pub frame_symbols: usize,
    pub seeds: Vec<u64>,
    pub noise_sigmas: Vec<f64>,
    pub chain_mode: ChainMode,
    pub channel_taps: Vec<f64>,
    pub ffe_taps: usize,
    pub ffe_step: f64,
    pub ffe_epochs: usize,
    pub training_symbols: usize,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            receiver: Receiver::Block(VariantId::LayeredSimplified),
            num_states: 2,
            alpha: 0.55,
            channel_alpha: None,
            block: BlockConfig::default(),
            frame_symbols: 1_000_000,
            seeds: vec![1],
            noise_sigmas: vec![0.3],
            chain_mode: ChainMode::DirectIsi,
            channel_taps: vec![1.0, 0.6, 0.25],
            ffe_taps: 15,
            ffe_step: 1e-3,
            ffe_epochs: 5,
            training_symbols: 1000,
            output_path: None,
        }
    }
}

fn parse_num<T: FromStr>(field: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| invalid(field, format!("cannot parse `{}`", v.trim())))
}

fn parse_list<T: FromStr>(field: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(field, s))
        .collect()
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults. Does not validate; call
    /// [`ExperimentConfig::validate`] after applying overrides.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                invalid(
                    &format!("line {}", lineno + 1),
                    format!("expected key = value, got `{line}`"),
                )
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MlseError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one field by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "variant" => self.receiver = value.parse().map_err(|e: MlseError| invalid(key, e.to_string()))?,
            "num_states" => self.num_states = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "channel_alpha" => self.channel_alpha = Some(parse_num(key, value)?),
            "overlap" => self.block.overlap = parse_num(key, value)?,
            "data_len" => self.block.data_len = parse_num(key, value)?,
            "frame_symbols" => self.frame_symbols = parse_num(key, value)?,
            "seeds" => self.seeds = parse_list(key, value)?,
            "noise_sigmas" => self.noise_sigmas = parse_list(key, value)?,
            "chain_mode" => self.chain_mode = value.parse()?,
            "channel_taps" => self.channel_taps = parse_list(key, value)?,
            "ffe_taps" => self.ffe_taps = parse_num(key, value)?,
            "ffe_step" => self.ffe_step = parse_num(key, value)?,
            "ffe_epochs" => self.ffe_epochs = parse_num(key, value)?,
            "training_symbols" => self.training_symbols = parse_num(key, value)?,
            "output_path" => self.output_path = Some(PathBuf::from(value)),
            _ => return Err(invalid(key, "unknown key")),
        }
        Ok(())
    }

    /// Checks field ranges, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.num_states) {
            return Err(invalid("num_states", format!("{} is not 2, 3 or 4", self.num_states)));
        }
        if !self.alpha.is_finite() {
            return Err(invalid("alpha", "must be finite"));
        }
        if !self.channel_alpha().is_finite() {
            return Err(invalid("channel_alpha", "must be finite"));
        }
        if self.block.data_len == 0 {
            return Err(invalid("data_len", "must be at least 1"));
        }
        if self.frame_symbols < self.block.data_len {
            return Err(invalid(
                "frame_symbols",
                format!("{} is shorter than data_len {}", self.frame_symbols, self.block.data_len),
            ));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "list is empty"));
        }
        if self.noise_sigmas.is_empty() {
            return Err(invalid("noise_sigmas", "list is empty"));
        }
        if let Some(s) = self.noise_sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(invalid("noise_sigmas", format!("{s} must be finite and >= 0")));
        }
        if self.chain_mode == ChainMode::FullFfeChain {
            if self.channel_taps.is_empty() || self.channel_taps[0] == 0.0 {
                return Err(invalid("channel_taps", "needs a nonzero leading tap"));
            }
            if self.ffe_taps == 0 || self.ffe_taps % 2 == 0 {
                return Err(invalid("ffe_taps", format!("{} must be odd", self.ffe_taps)));
            }
            if self.training_symbols < self.ffe_taps || self.training_symbols >= self.frame_symbols {
                return Err(invalid(
                    "training_symbols",
                    "must cover the FFE taps and leave symbols to score",
                ));
            }
            if !(self.ffe_step.is_finite() && self.ffe_step >= 0.0) {
                return Err(invalid("ffe_step", "must be finite and >= 0"));
            }
        }
        self.detector().map(|_| ())
    }

    pub fn channel_alpha(&self) -> f64 {
        self.channel_alpha.unwrap_or(self.alpha)
    }

    /// Block detector for block receivers.
    pub fn detector(&self) -> Result<Option<BlockDetector>> {
        match self.receiver {
            Receiver::Block(v) => BlockDetector::new(v, self.num_states)
                .map(Some)
                .map_err(|e| invalid("num_states", e.to_string())),
            _ => Ok(None),
        }
    }

    /// States per epoch reported for the receiver: the reduced count for the
    /// simplified detectors, 4 for the other trellis receivers, 0 for slicing.
    pub fn reported_states(&self) -> usize {
        match self.receiver {
            Receiver::Block(v) if v.is_simplified() => self.num_states,
            Receiver::FfeOnly => 0,
            _ => 4,
        }
    }
}
