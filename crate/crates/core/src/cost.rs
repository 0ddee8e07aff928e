//! Hardware cost accounting: closed-form resource counts, latency in delay
//! units, and an operation counter that detectors tick as they compute.
//!
//! Counting conventions:
//! - a squaring `|.|^2` and a product of `alpha` with data (`alpha * y`) or with
//!   itself (`alpha^2`) is one variable multiplier;
//! - a product of `alpha` or of `y` with a small constant that is not a power of
//!   two (`3 alpha`, `6 y`, `10 alpha^2`, ...) is one constant multiplier;
//! - multiplication by `+-1` or by a power of two is a free shift;
//! - `alpha`-only quantities are computed once per block;
//! - a subtraction counts as an adder.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use crate::error::{MlseError, Result};

/// Detector variants with a closed-form cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariantId {
    OneStep,
    OneStepSimplified,
    Layered,
    LayeredSimplified,
}

impl VariantId {
    pub const ALL: [VariantId; 4] = [
        VariantId::OneStep,
        VariantId::OneStepSimplified,
        VariantId::Layered,
        VariantId::LayeredSimplified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VariantId::OneStep => "1s",
            VariantId::OneStepSimplified => "1s-simplified",
            VariantId::Layered => "l2s",
            VariantId::LayeredSimplified => "l2s-simplified",
        }
    }

    pub fn is_layered(self) -> bool {
        matches!(self, VariantId::Layered | VariantId::LayeredSimplified)
    }

    pub fn is_simplified(self) -> bool {
        matches!(
            self,
            VariantId::OneStepSimplified | VariantId::LayeredSimplified
        )
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantId {
    type Err = MlseError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1s" | "1s-mlse" => Ok(VariantId::OneStep),
            "1s-simplified" | "simplified-1s" => Ok(VariantId::OneStepSimplified),
            "l2s" | "l2s-mlse" => Ok(VariantId::Layered),
            "l2s-simplified" | "simplified-l2s" => Ok(VariantId::LayeredSimplified),
            _ => Err(MlseError::UnknownDetector(s.to_string())),
        }
    }
}

/// Operation counts of one detector block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ResourceCounts {
    pub variable_multipliers: u64,
    pub constant_multipliers: u64,
    pub adders: u64,
    pub comparators: u64,
}

impl ResourceCounts {
    pub const fn new(var: u64, cst: u64, add: u64, cmp: u64) -> Self {
        ResourceCounts {
            variable_multipliers: var,
            constant_multipliers: cst,
            adders: add,
            comparators: cmp,
        }
    }

    fn scale(self, k: u64) -> Self {
        ResourceCounts::new(
            self.variable_multipliers * k,
            self.constant_multipliers * k,
            self.adders * k,
            self.comparators * k,
        )
    }
}

impl Add for ResourceCounts {
    type Output = ResourceCounts;

    fn add(self, o: ResourceCounts) -> ResourceCounts {
        ResourceCounts::new(
            self.variable_multipliers + o.variable_multipliers,
            self.constant_multipliers + o.constant_multipliers,
            self.adders + o.adders,
            self.comparators + o.comparators,
        )
    }
}

impl AddAssign for ResourceCounts {
    fn add_assign(&mut self, o: ResourceCounts) {
        *self = *self + o;
    }
}

/// Sink for operation events. The unit type discards everything.
pub trait OpCounter {
    fn var_mul(&mut self, n: u64);
    fn const_mul(&mut self, n: u64);
    fn add(&mut self, n: u64);
    fn cmp(&mut self, n: u64);
    /// An `alpha`-only precomputation was (re)done.
    fn alpha_refresh(&mut self) {}
}

impl OpCounter for () {
    #[inline(always)]
    fn var_mul(&mut self, _: u64) {}
    #[inline(always)]
    fn const_mul(&mut self, _: u64) {}
    #[inline(always)]
    fn add(&mut self, _: u64) {}
    #[inline(always)]
    fn cmp(&mut self, _: u64) {}
}

/// Counters collected while instrumented detectors process blocks of one
/// configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostTrace {
    pub variant: Option<VariantId>,
    pub num_states: usize,
    pub block_len: usize,
    pub blocks: u64,
    pub alpha_refreshes: u64,
    pub counts: ResourceCounts,
    mixed: Option<String>,
}

impl CostTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Marks the start of one block. A trace that sees two different
    /// configurations is poisoned and rejected by [`dynamic_counts`].
    pub fn begin_block(&mut self, variant: VariantId, num_states: usize, block_len: usize) {
        match self.variant {
            None => {
                self.variant = Some(variant);
                self.num_states = num_states;
                self.block_len = block_len;
            }
            Some(v) => {
                if v != variant || self.num_states != num_states || self.block_len != block_len {
                    self.mixed = Some(format!(
                        "{v}/{}/{} then {variant}/{num_states}/{block_len}",
                        self.num_states, self.block_len
                    ));
                }
            }
        }
        self.blocks += 1;
    }

    /// Folds another trace (e.g. from a different worker) into this one.
    pub fn merge(&mut self, other: &CostTrace) {
        if let Some(v) = other.variant {
            let before = self.blocks;
            self.begin_block(v, other.num_states, other.block_len);
            self.blocks = before + other.blocks;
        }
        if self.mixed.is_none() {
            self.mixed = other.mixed.clone();
        }
        self.alpha_refreshes += other.alpha_refreshes;
        self.counts += other.counts;
    }
}

impl OpCounter for CostTrace {
    fn var_mul(&mut self, n: u64) {
        self.counts.variable_multipliers += n;
    }
    fn const_mul(&mut self, n: u64) {
        self.counts.constant_multipliers += n;
    }
    fn add(&mut self, n: u64) {
        self.counts.adders += n;
    }
    fn cmp(&mut self, n: u64) {
        self.counts.comparators += n;
    }
    fn alpha_refresh(&mut self) {
        self.alpha_refreshes += 1;
    }
}

/// Observed per-block counts of an instrumented run.
pub fn dynamic_counts(trace: &CostTrace) -> Result<ResourceCounts> {
    if let Some(m) = &trace.mixed {
        return Err(MlseError::MixedTrace(m.clone()));
    }
    if trace.blocks == 0 {
        return Err(MlseError::MixedTrace("trace holds no blocks".into()));
    }
    if trace.alpha_refreshes != trace.blocks {
        return Err(MlseError::MixedTrace(format!(
            "{} alpha refreshes over {} blocks",
            trace.alpha_refreshes, trace.blocks
        )));
    }
    let c = trace.counts;
    let b = trace.blocks;
    let parts = [
        c.variable_multipliers,
        c.constant_multipliers,
        c.adders,
        c.comparators,
    ];
    if parts.iter().any(|p| p % b != 0) {
        return Err(MlseError::MixedTrace(
            "counts are not uniform across blocks".into(),
        ));
    }
    Ok(ResourceCounts::new(parts[0] / b, parts[1] / b, parts[2] / b, parts[3] / b))
}

fn check_n(variant: VariantId, n: usize) -> Result<u64> {
    if n < 2 {
        return Err(MlseError::InvalidBlockLength(n, "N >= 2"));
    }
    if variant.is_layered() && !n.is_power_of_two() {
        return Err(MlseError::InvalidBlockLength(n, "a power of two"));
    }
    if variant.is_simplified() && n % 2 != 0 {
        return Err(MlseError::InvalidBlockLength(n, "an even N"));
    }
    Ok(n as u64)
}

/// Closed-form per-block counts; the simplified variants use 2 reduced states.
pub fn static_counts(variant: VariantId, n: usize) -> Result<ResourceCounts> {
    let n = check_n(variant, n)?;
    Ok(match variant {
        VariantId::OneStep => ResourceCounts::new(16 * n, 1, 32 * n, 12 * n + 3),
        VariantId::OneStepSimplified => ResourceCounts::new(n + 1, 2 * n + 3, 16 * n + 8, 2 * n + 1),
        VariantId::Layered => ResourceCounts::new(16 * n, 1, 80 * n - 48, 48 * n - 33),
        VariantId::LayeredSimplified => {
            ResourceCounts::new(n + 1, 3 * n / 2 + 4, 57 * n / 2 + 23, 4 * n - 1)
        }
    })
}

fn check_states(k: usize) -> Result<u64> {
    match k {
        2..=4 => Ok(k as u64),
        _ => Err(MlseError::InvalidStateCount(k)),
    }
}

/// Processing stages of one block: everything up to and including the first
/// ACS layer (`front`), the remaining ACS work (`middle`: later layers, or
/// ACS steps 2..N for the 1-step detectors), and survivor selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageCounts {
    pub front: ResourceCounts,
    pub middle: ResourceCounts,
    pub survivor: ResourceCounts,
}

impl StageCounts {
    pub fn total(&self) -> ResourceCounts {
        self.front + self.middle + self.survivor
    }
}

/// Stage-by-stage counts built from per-unit costs. `num_states` applies to the
/// simplified variants only (4 means computational simplification without
/// state reduction).
pub fn stage_counts(variant: VariantId, n: usize, num_states: usize) -> Result<StageCounts> {
    let n = check_n(variant, n)?;
    let k = if variant.is_simplified() {
        check_states(num_states)?
    } else {
        4
    };
    Ok(match variant {
        VariantId::OneStep => {
            // alpha*s_prev + s_cur once per block, then y - e and squaring per branch
            let bm = ResourceCounts::new(16 * n, 1, 16 * n + 16, 0);
            // first ACS starts from zero metrics: compares only
            let first_acs = ResourceCounts::new(0, 0, 0, 12);
            StageCounts {
                front: bm + first_acs,
                middle: ResourceCounts::new(0, 0, 16, 12).scale(n - 1),
                survivor: ResourceCounts::new(0, 0, 0, 3),
            }
        }
        VariantId::OneStepSimplified => {
            let e_vec = ResourceCounts::new(1, 3, 12, 0);
            let f_vec = ResourceCounts::new(1, 2, 8, 0).scale(n);
            let e_plus_f = ResourceCounts::new(0, 0, k * k, 0).scale(n);
            let first_acs = ResourceCounts::new(0, 0, 0, k * (k - 1));
            StageCounts {
                front: e_vec + f_vec + e_plus_f + first_acs,
                middle: ResourceCounts::new(0, 0, k * k, k * (k - 1)).scale(n - 1),
                survivor: ResourceCounts::new(0, 0, 0, k - 1),
            }
        }
        VariantId::Layered => StageCounts {
            front: first_layer_counts(FirstLayerVariant::Layered, n as usize)?,
            middle: merge_unit(4).scale(n / 2 - 1),
            survivor: ResourceCounts::new(0, 0, 0, 15),
        },
        VariantId::LayeredSimplified => {
            let ac = ResourceCounts::new(1, 4, 31, 0);
            let bd = ResourceCounts::new(2, 3, 41, 0).scale(n / 2);
            StageCounts {
                front: ac + bd + merge_unit(k).scale(n / 2),
                middle: merge_unit(k).scale(n / 2 - 1),
                survivor: ResourceCounts::new(0, 0, 0, k * k - 1),
            }
        }
    })
}

/// One 2-step ACS group restricted to `k` states per epoch: `k^2` entries, each
/// a `k`-way add and compare.
fn merge_unit(k: u64) -> ResourceCounts {
    ResourceCounts::new(0, 0, k * k * k, k * k * (k - 1))
}

/// First-layer variants with published closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstLayerVariant {
    Layered,
    LayeredSimplified3,
    LayeredSimplified2,
}

/// Closed-form cost of BM calculation plus the first ACS layer.
pub fn first_layer_counts(variant: FirstLayerVariant, n: usize) -> Result<ResourceCounts> {
    if n < 2 || n % 2 != 0 {
        return Err(MlseError::InvalidBlockLength(n, "an even N"));
    }
    let n = n as u64;
    Ok(match variant {
        FirstLayerVariant::Layered => ResourceCounts::new(16 * n, 1, 48 * n + 16, 24 * n),
        FirstLayerVariant::LayeredSimplified3 => {
            ResourceCounts::new(n + 1, 3 * n / 2 + 4, 34 * n + 31, 9 * n)
        }
        FirstLayerVariant::LayeredSimplified2 => {
            ResourceCounts::new(n + 1, 3 * n / 2 + 4, 49 * n / 2 + 31, 2 * n)
        }
    })
}

/// Counts of one merge layer stage (all layers after the first) and the
/// survivor selection, for `num_states` per epoch.
pub fn merge_and_survivor_counts(n: usize, num_states: usize) -> Result<ResourceCounts> {
    if !n.is_power_of_two() || n < 2 {
        return Err(MlseError::InvalidBlockLength(n, "a power of two"));
    }
    let k = check_states(num_states)?;
    Ok(merge_unit(k).scale(n as u64 / 2 - 1) + ResourceCounts::new(0, 0, 0, k * k - 1))
}

/// Pipeline depth in delay units: `N + 2` for the 1-step detectors and
/// `log2(N) + 2` for the layered ones.
pub fn latency_units(variant: VariantId, n: usize) -> Result<u64> {
    let n = check_n(variant, n)?;
    Ok(if variant.is_layered() {
        n.trailing_zeros() as u64 + 2
    } else {
        n + 2
    })
}
