//! Layered 2-step detection.
//!
//! Consecutive pairs of branch-metric tables are pre-combined into 4x4
//! endpoint tables, which are then reduced pairwise in a binary tree of
//! min-plus products. A block of `N` samples needs `log2(N)` layers instead of
//! `N` serial ACS steps. Each merged entry remembers its winning middle state;
//! after picking the best of the final table's entries the tree is expanded
//! top-down to recover every state.

use crate::cost::OpCounter;
use crate::error::{MlseError, Result};
use crate::symbol::{Pam4Symbol, StateSet};
use crate::trellis::{branch_metrics, expected_outputs, AlphaCoeff, DetectionResult};

/// Accumulated metrics between two epochs, indexed `[left_state][right_state]`.
///
/// Entries outside `left_set x right_set` are `+inf`. `mid[a][c]` is the state
/// at the split epoch of the best path from `a` to `c` (for a 2-step table,
/// the single interior epoch).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub entries: [[f64; 4]; 4],
    pub mid: [[u8; 4]; 4],
    /// `(first_epoch, last_epoch)` state indices covered by the table.
    pub span: (usize, usize),
    pub left_set: StateSet,
    pub right_set: StateSet,
}

impl MetricTable {
    /// One-step table: the 16 branch metrics of a single sample.
    pub fn from_branch_metrics(bm: [[f64; 4]; 4], epoch: usize) -> Self {
        MetricTable {
            entries: bm,
            mid: [[0; 4]; 4],
            span: (epoch, epoch + 1),
            left_set: StateSet::FULL,
            right_set: StateSet::FULL,
        }
    }

    /// Min-plus identity at `epoch`: zero on the diagonal, `+inf` elsewhere.
    pub fn identity(epoch: usize) -> Self {
        let mut entries = [[f64::INFINITY; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        MetricTable {
            entries,
            mid: [[0; 4]; 4],
            span: (epoch, epoch),
            left_set: StateSet::FULL,
            right_set: StateSet::FULL,
        }
    }

    pub fn get(&self, a: Pam4Symbol, c: Pam4Symbol) -> f64 {
        self.entries[a.index()][c.index()]
    }

    pub fn argmin_mid(&self, a: Pam4Symbol, c: Pam4Symbol) -> Pam4Symbol {
        Pam4Symbol::from_index(self.mid[a.index()][c.index()] as usize)
    }

    /// Best `(left, right, metric)` over the admissible entries, scanning in
    /// lexicographic `(left, right)` order.
    pub fn best_entry(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::INFINITY);
        let mut found = false;
        for a in self.left_set.indices() {
            for c in self.right_set.indices() {
                let v = self.entries[a][c];
                if !found || v < best.2 {
                    best = (a, c, v);
                    found = true;
                }
            }
        }
        best
    }

    /// Number of admissible entries.
    pub fn entry_count(&self) -> usize {
        self.left_set.len() * self.right_set.len()
    }
}

/// Entry `(a, c) = min_b left(a, b) + right(b, c)` over the admissible states,
/// smaller middle level first on ties.
pub fn merge_tables(left: &MetricTable, right: &MetricTable) -> Result<MetricTable> {
    merge_tables_counted(left, right, &mut ())
}

pub(crate) fn merge_tables_counted<C: OpCounter>(
    left: &MetricTable,
    right: &MetricTable,
    counter: &mut C,
) -> Result<MetricTable> {
    if left.span.1 != right.span.0 {
        return Err(MlseError::SpanMismatch {
            left_last: left.span.1,
            right_first: right.span.0,
        });
    }
    let mid_set = left.right_set.intersect(right.left_set);
    if mid_set.is_empty() {
        return Err(MlseError::EmptyCandidateSet);
    }
    let k = mid_set.len() as u64;
    let mut entries = [[f64::INFINITY; 4]; 4];
    let mut mid = [[0u8; 4]; 4];
    for a in left.left_set.indices() {
        for c in right.right_set.indices() {
            counter.add(k);
            counter.cmp(k - 1);
            let mut best = f64::INFINITY;
            let mut arg = None;
            for b in mid_set.indices() {
                let cand = left.entries[a][b] + right.entries[b][c];
                if arg.is_none() || cand < best {
                    best = cand;
                    arg = Some(b as u8);
                }
            }
            entries[a][c] = best;
            mid[a][c] = arg.unwrap_or(0);
        }
    }
    Ok(MetricTable {
        entries,
        mid,
        span: (left.span.0, right.span.1),
        left_set: left.left_set,
        right_set: right.right_set,
    })
}

/// 2-step table over samples `y_n`, `y_{n+1}`: entry `(s_{n-1}, s_{n+1})` is the
/// best sum of the two branch metrics over the middle state `s_n`. Spans
/// epochs `(0, 2)`.
pub fn two_step_unit(y_n: f64, y_np1: f64, alpha: AlphaCoeff) -> MetricTable {
    let expected = expected_outputs(alpha, &mut ());
    two_step_from_expected(y_n, y_np1, &expected, 0, &mut ())
}

fn two_step_from_expected<C: OpCounter>(
    y_n: f64,
    y_np1: f64,
    expected: &[[f64; 4]; 4],
    first_epoch: usize,
    counter: &mut C,
) -> MetricTable {
    let left = MetricTable::from_branch_metrics(branch_metrics(y_n, expected, counter), first_epoch);
    let right =
        MetricTable::from_branch_metrics(branch_metrics(y_np1, expected, counter), first_epoch + 1);
    // spans line up by construction and both sets are full
    merge_tables_counted(&left, &right, counter).expect("adjacent one-step tables")
}

/// Reduction schedule of a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerPlan {
    pub block_len: usize,
    pub depth: usize,
    /// Tables produced by each layer: `N/2, N/4, ..., 1`.
    pub tables_per_layer: Vec<usize>,
}

impl LayerPlan {
    pub fn new(block_len: usize) -> Result<Self> {
        if block_len < 2 || !block_len.is_power_of_two() {
            return Err(MlseError::InvalidBlockLength(block_len, "a power of two"));
        }
        let depth = block_len.trailing_zeros() as usize;
        let tables_per_layer = (1..=depth).map(|l| block_len >> l).collect();
        Ok(LayerPlan {
            block_len,
            depth,
            tables_per_layer,
        })
    }
}

/// Delay units of the layered detector: one for branch metrics, `log2(N)` ACS
/// layers, one for survivor selection.
pub fn latency_of_plan(block_len: usize) -> Result<u64> {
    let plan = LayerPlan::new(block_len)?;
    Ok(plan.depth as u64 + 2)
}

struct Node {
    table: MetricTable,
    children: Option<(usize, usize)>,
}

/// Reduction tree built from a first layer of 2-step tables.
pub(crate) struct LayerTree {
    nodes: Vec<Node>,
    root: usize,
    /// Layers executed, counting the first one.
    pub depth: usize,
}

impl LayerTree {
    /// Pairs tables left to right until one remains. An odd table at the end of
    /// a layer is carried up unchanged.
    pub(crate) fn reduce<C: OpCounter>(first: Vec<MetricTable>, counter: &mut C) -> Result<Self> {
        if first.is_empty() {
            return Err(MlseError::EmptyInput);
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(2 * first.len());
        let mut layer: Vec<usize> = Vec::with_capacity(first.len());
        for t in first {
            layer.push(nodes.len());
            nodes.push(Node {
                table: t,
                children: None,
            });
        }
        let mut depth = 1;
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len().div_ceil(2));
            for pair in layer.chunks(2) {
                if let [l, r] = *pair {
                    let table = merge_tables_counted(&nodes[l].table, &nodes[r].table, counter)?;
                    next.push(nodes.len());
                    nodes.push(Node {
                        table,
                        children: Some((l, r)),
                    });
                } else {
                    next.push(pair[0]);
                }
            }
            layer = next;
            depth += 1;
        }
        Ok(LayerTree {
            root: layer[0],
            nodes,
            depth,
        })
    }

    pub(crate) fn root(&self) -> &MetricTable {
        &self.nodes[self.root].table
    }

    /// Picks the best final entry (`k^2 - 1` comparisons) and expands the
    /// tree. Returns the state indices over the whole span and the metric.
    pub(crate) fn survivor<C: OpCounter>(&self, counter: &mut C) -> (Vec<usize>, f64) {
        let root = self.root();
        counter.cmp(root.entry_count() as u64 - 1);
        let (a, c, metric) = root.best_entry();
        let (first, last) = root.span;
        let mut states = vec![0usize; last - first + 1];
        let mut stack = vec![(self.root, a, c)];
        while let Some((id, a, c)) = stack.pop() {
            let node = &self.nodes[id];
            let (lo, hi) = node.table.span;
            states[lo - first] = a;
            states[hi - first] = c;
            let b = node.table.mid[a][c] as usize;
            match node.children {
                Some((l, r)) => {
                    stack.push((l, a, b));
                    stack.push((r, b, c));
                }
                None if hi - lo == 2 => states[lo + 1 - first] = b,
                None => {}
            }
        }
        (states, metric)
    }
}

/// Layered detection result with the number of layers that ran.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredOutcome {
    pub result: DetectionResult,
    pub depth: usize,
}

fn check_layered_len(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(MlseError::InvalidBlockLength(n, "an even N >= 2"));
    }
    Ok(())
}

/// Layered 2-step detection of one block with free boundary states. Returns
/// all `N + 1` states. `N` must be even; power-of-two lengths give the
/// balanced `log2(N)`-layer tree, other even lengths carry odd tables upward.
pub fn detect_block_l2s(samples: &[f64], alpha: AlphaCoeff) -> Result<DetectionResult> {
    Ok(detect_block_l2s_traced(samples, alpha, &mut ())?.result)
}

pub fn detect_block_l2s_traced<C: OpCounter>(
    samples: &[f64],
    alpha: AlphaCoeff,
    counter: &mut C,
) -> Result<LayeredOutcome> {
    check_layered_len(samples.len())?;
    let expected = expected_outputs(alpha, counter);
    let first: Vec<MetricTable> = samples
        .chunks_exact(2)
        .enumerate()
        .map(|(j, p)| two_step_from_expected(p[0], p[1], &expected, 2 * j, counter))
        .collect();
    let tree = LayerTree::reduce(first, counter)?;
    let (states, metric) = tree.survivor(counter);
    Ok(LayeredOutcome {
        result: DetectionResult {
            decoded: states.into_iter().map(Pam4Symbol::from_index).collect(),
            survivor_metric: metric,
        },
        depth: tree.depth,
    })
}
