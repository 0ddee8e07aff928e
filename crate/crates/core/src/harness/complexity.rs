//! Resource tables from the closed forms, optionally cross-checked by running
//! the instrumented detectors.

use crate::blocks::{detect_frame_instrumented, BlockConfig, BlockDetector};
use crate::cost::{dynamic_counts, latency_units, static_counts, ResourceCounts, VariantId};
use crate::error::Result;
use crate::signal::{apply_channel, invert_post_filter, prbs_symbols, ChannelModel};
use crate::trellis::AlphaCoeff;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    /// Variant name; instrumented rows carry a `/instrumented` suffix.
    pub label: String,
    pub block_len: usize,
    pub counts: ResourceCounts,
    pub latency: u64,
}

pub const COMPLEXITY_HEADER: &str = "variant,N,var_mult,const_mult,adders,comparators,latency";

impl ComplexityRow {
    pub fn csv_row(&self) -> String {
        let c = &self.counts;
        format!(
            "{},{},{},{},{},{},{}",
            self.label,
            self.block_len,
            c.variable_multipliers,
            c.constant_multipliers,
            c.adders,
            c.comparators,
            self.latency
        )
    }
}

pub fn complexity_csv(rows: &[ComplexityRow]) -> String {
    let mut out = String::from(COMPLEXITY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Counts measured on a short noisy frame split into blocks of length `n`
/// (`O = n/4`, `R = n - 2O`). Simplified variants run with two states.
pub fn instrumented_counts(variant: VariantId, n: usize) -> Result<ResourceCounts> {
    let alpha = 0.55;
    let overlap = n / 4;
    let cfg = BlockConfig::new(overlap, n - 2 * overlap)?;
    let symbols = prbs_symbols(7, 8 * cfg.data_len)?.into_inner();
    let y = apply_channel(&symbols, &ChannelModel::new(vec![1.0, alpha], 0.3, 11)?)?;
    let pre = invert_post_filter(&y, alpha);
    let det = if variant.is_simplified() {
        BlockDetector::new(variant, 2)?
    } else {
        BlockDetector::full(variant)
    };
    let (_, trace) = detect_frame_instrumented(&y.samples, AlphaCoeff(alpha), cfg, det, Some(&pre.samples))?;
    dynamic_counts(&trace)
}

/// One closed-form row per (variant, N), each followed by its instrumented
/// row when `instrument` is set.
pub fn run_complexity(ns: &[usize], variants: &[VariantId], instrument: bool) -> Result<Vec<ComplexityRow>> {
    let mut rows = Vec::new();
    for &v in variants {
        for &n in ns {
            let latency = latency_units(v, n)?;
            rows.push(ComplexityRow {
                label: v.name().to_string(),
                block_len: n,
                counts: static_counts(v, n)?,
                latency,
            });
            if instrument {
                rows.push(ComplexityRow {
                    label: format!("{}/instrumented", v.name()),
                    block_len: n,
                    counts: instrumented_counts(v, n)?,
                    latency,
                });
            }
        }
    }
    Ok(rows)
}
