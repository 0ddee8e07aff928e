//! Sliding-block parallel detection.
//!
//! A frame is cut into blocks of `N = 2 O + R` samples: `O` pre-overlap
//! samples, `R` data samples and `O` post-overlap samples. Block `b` covers
//! frame samples `[b R - O, b R + R + O)`; positions outside the frame are
//! zero-padded. Every block is detected on its own with free boundary states
//! and contributes only its `R` data decisions, so blocks can run in any
//! order on any number of workers.
//!
//! Inside a block, state `k` (0..=N) is the state after block sample `k - 1`;
//! state 0 precedes the block. The data decisions are states `O + 1 ..= O + R`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cost::{CostTrace, OpCounter, VariantId};
use crate::error::{MlseError, Result};
use crate::layered::detect_block_l2s_traced;
use crate::simplified::{detect_block_1s_simplified_counted, detect_block_l2s_simplified_counted};
use crate::symbol::{Pam4Symbol, SymbolFrame};
use crate::trellis::{
    acs_from_bm, argmin4, branch_metrics, expected_outputs, traceback, AlphaCoeff, DetectionResult,
};

/// Block geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    pub overlap: usize,
    pub data_len: usize,
}

impl BlockConfig {
    pub fn new(overlap: usize, data_len: usize) -> Result<Self> {
        if data_len == 0 {
            return Err(MlseError::InvalidBlockLength(0, "R >= 1"));
        }
        Ok(BlockConfig { overlap, data_len })
    }

    /// `N = 2 O + R`.
    pub fn block_len(&self) -> usize {
        2 * self.overlap + self.data_len
    }

    pub fn block_count(&self, frame_len: usize) -> usize {
        frame_len.div_ceil(self.data_len)
    }
}

impl Default for BlockConfig {
    fn default() -> Self {
        BlockConfig {
            overlap: 8,
            data_len: 16,
        }
    }
}

/// One zero-padded block.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    /// Exactly `N` samples, padding included.
    pub samples: Vec<f64>,
    /// Pre-decisions for the `N + 1` block states (0.0 where padded); empty
    /// when the frame has none.
    pub pre: Vec<f64>,
    pub pre_pad: usize,
    pub post_pad: usize,
    /// Frame index of the first data symbol.
    pub frame_offset: usize,
    /// Number of data decisions the block emits (`R`, or fewer at the frame end).
    pub data_count: usize,
}

fn block_at(y: &[f64], pre: Option<&[f64]>, cfg: BlockConfig, b: usize) -> Block {
    let n = cfg.block_len();
    let len = y.len() as isize;
    let start = (b * cfg.data_len) as isize - cfg.overlap as isize;
    let fetch = |src: &[f64], j: isize| {
        if j >= 0 && j < len {
            src[j as usize]
        } else {
            0.0
        }
    };
    let samples = (0..n as isize).map(|k| fetch(y, start + k)).collect();
    let pre = pre
        .map(|p| (0..=n as isize).map(|k| fetch(p, start + k - 1)).collect())
        .unwrap_or_default();
    let frame_offset = b * cfg.data_len;
    Block {
        samples,
        pre,
        pre_pad: (-start).max(0) as usize,
        post_pad: (start + n as isize - len).max(0) as usize,
        frame_offset,
        data_count: cfg.data_len.min(y.len() - frame_offset),
    }
}

/// Cuts a frame into blocks. `ceil(len / R)` blocks; block `b` owns data
/// symbols `b R .. min(b R + R, len)`.
pub fn segment_frame(y: &[f64], cfg: BlockConfig) -> Result<Vec<Block>> {
    segment_frame_with(y, None, cfg)
}

/// As [`segment_frame`], also slicing pre-decisions (one per frame symbol).
pub fn segment_frame_with(y: &[f64], pre: Option<&[f64]>, cfg: BlockConfig) -> Result<Vec<Block>> {
    check_frame(y, pre)?;
    Ok((0..cfg.block_count(y.len()))
        .map(|b| block_at(y, pre, cfg, b))
        .collect())
}

fn check_frame(y: &[f64], pre: Option<&[f64]>) -> Result<()> {
    if y.is_empty() {
        return Err(MlseError::EmptyInput);
    }
    if let Some(p) = pre {
        if p.len() != y.len() {
            return Err(MlseError::MissingPreDecisions(format!(
                "{} pre-decisions for {} samples",
                p.len(),
                y.len()
            )));
        }
    }
    Ok(())
}

/// Full-state 1-step detection of one block with a free initial state.
/// Returns all `N + 1` states.
pub fn detect_block_1s(samples: &[f64], alpha: AlphaCoeff) -> Result<DetectionResult> {
    detect_block_1s_counted(samples, alpha, &mut ())
}

pub(crate) fn detect_block_1s_counted<C: OpCounter>(
    samples: &[f64],
    alpha: AlphaCoeff,
    counter: &mut C,
) -> Result<DetectionResult> {
    if samples.is_empty() {
        return Err(MlseError::EmptyInput);
    }
    let expected = expected_outputs(alpha, counter);
    let mut pm = [0.0; 4];
    let mut preds = Vec::with_capacity(samples.len());
    for (k, &y) in samples.iter().enumerate() {
        let bm = branch_metrics(y, &expected, counter);
        let (next, p) = acs_from_bm(&pm, &bm, k == 0, counter);
        pm = next;
        preds.push(p);
    }
    counter.cmp(3);
    let last = argmin4(&pm);
    Ok(DetectionResult {
        decoded: traceback(&preds, last)
            .into_iter()
            .map(Pam4Symbol::from_index)
            .collect(),
        survivor_metric: pm[last],
    })
}

/// Detector run on each block: a variant plus, for the simplified ones, the
/// number of states kept per epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockDetector {
    pub variant: VariantId,
    pub num_states: usize,
}

impl BlockDetector {
    pub fn new(variant: VariantId, num_states: usize) -> Result<Self> {
        if !(2..=4).contains(&num_states) {
            return Err(MlseError::InvalidStateCount(num_states));
        }
        let num_states = if variant.is_simplified() { num_states } else { 4 };
        Ok(BlockDetector {
            variant,
            num_states,
        })
    }

    pub fn full(variant: VariantId) -> Self {
        BlockDetector {
            variant,
            num_states: 4,
        }
    }

    pub fn needs_pre_decisions(&self) -> bool {
        self.num_states < 4
    }

    /// Runs the detector on one block, returning its `N + 1` states.
    pub fn detect<C: OpCounter>(&self, block: &Block, alpha: AlphaCoeff, counter: &mut C) -> Result<DetectionResult> {
        if self.needs_pre_decisions() && block.pre.is_empty() {
            return Err(MlseError::MissingPreDecisions(format!(
                "{} with {} states",
                self.variant, self.num_states
            )));
        }
        let layered = self.variant.is_layered();
        // layered reduction pairs samples: pad an odd block with one zero
        let padded;
        let (samples, pre) = if layered && block.samples.len() % 2 == 1 {
            let mut s = block.samples.clone();
            s.push(0.0);
            let mut p = block.pre.clone();
            if !p.is_empty() {
                p.push(0.0);
            }
            padded = (s, p);
            (&padded.0[..], &padded.1[..])
        } else {
            (&block.samples[..], &block.pre[..])
        };
        let pre = if self.num_states == 4 { &[][..] } else { pre };
        match self.variant {
            VariantId::OneStep => detect_block_1s_counted(samples, alpha, counter),
            VariantId::Layered => Ok(detect_block_l2s_traced(samples, alpha, counter)?.result),
            VariantId::OneStepSimplified => {
                detect_block_1s_simplified_counted(samples, pre, alpha, self.num_states, counter)
            }
            VariantId::LayeredSimplified => {
                detect_block_l2s_simplified_counted(samples, pre, alpha, self.num_states, counter)
            }
        }
    }
}

impl fmt::Display for BlockDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.variant.is_simplified() {
            write!(f, "{}:{}", self.variant, self.num_states)
        } else {
            write!(f, "{}", self.variant)
        }
    }
}

/// `1s`, `l2s`, `1s-simplified[:k]`, `l2s-simplified[:k]` (`k` defaults to 2).
impl FromStr for BlockDetector {
    type Err = MlseError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, states) = match s.split_once(':') {
            Some((n, k)) => (
                n,
                Some(
                    k.parse::<usize>()
                        .map_err(|_| MlseError::UnknownDetector(s.to_string()))?,
                ),
            ),
            None => (s, None),
        };
        let variant: VariantId = name.parse()?;
        match (variant.is_simplified(), states) {
            (false, Some(_)) => Err(MlseError::UnknownDetector(s.to_string())),
            (false, None) => Ok(BlockDetector::full(variant)),
            (true, k) => BlockDetector::new(variant, k.unwrap_or(2)),
        }
    }
}

fn run_blocks<T, F>(y: &[f64], pre: Option<&[f64]>, cfg: BlockConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Block) -> Result<T> + Sync,
{
    check_frame(y, pre)?;
    (0..cfg.block_count(y.len()))
        .into_par_iter()
        .map(|b| f(&block_at(y, pre, cfg, b)))
        .collect()
}

fn data_region(block: &Block, cfg: BlockConfig, r: &DetectionResult) -> Vec<Pam4Symbol> {
    let first = cfg.overlap + 1;
    r.decoded[first..first + block.data_count].to_vec()
}

/// Detects a whole frame block by block and concatenates the data decisions.
/// `pre` (one value per frame symbol) is required for reduced-state
/// detectors. The result does not depend on the worker count.
pub fn detect_frame(
    y: &[f64],
    alpha: AlphaCoeff,
    cfg: BlockConfig,
    detector: BlockDetector,
    pre: Option<&[f64]>,
) -> Result<SymbolFrame> {
    let parts = run_blocks(y, pre, cfg, |block| {
        let r = detector.detect(block, alpha, &mut ())?;
        Ok(data_region(block, cfg, &r))
    })?;
    SymbolFrame::new(parts.concat())
}

/// As [`detect_frame`], also returning the operation counts of every block
/// merged in block order.
pub fn detect_frame_instrumented(
    y: &[f64],
    alpha: AlphaCoeff,
    cfg: BlockConfig,
    detector: BlockDetector,
    pre: Option<&[f64]>,
) -> Result<(SymbolFrame, CostTrace)> {
    let n = cfg.block_len();
    let parts = run_blocks(y, pre, cfg, |block| {
        let mut trace = CostTrace::new();
        trace.begin_block(detector.variant, detector.num_states, n);
        let r = detector.detect(block, alpha, &mut trace)?;
        Ok((data_region(block, cfg, &r), trace))
    })?;
    let mut total = CostTrace::new();
    let mut decoded = Vec::with_capacity(y.len());
    for (d, t) in parts {
        decoded.extend(d);
        total.merge(&t);
    }
    Ok((SymbolFrame::new(decoded)?, total))
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send, F: FnOnce() -> T + Send>(workers: usize, f: F) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| MlseError::InvalidConfig {
            field: "workers".into(),
            reason: e.to_string(),
        })?;
    Ok(pool.install(f))
}
