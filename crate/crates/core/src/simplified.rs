//! Computationally simplified metrics and reduced-state detection.
//!
//! Expanding `(y - alpha a - b)^2` splits every metric into a part that
//! depends only on `alpha` (tables A, C, E), a part linear in the samples
//! (tables B, D, F) and the squared samples, which are the same for every
//! competing path and are dropped. With the expansion the detectors need
//! one variable multiplication per sample plus one for `alpha^2`.
//!
//! Table indices are 1-based in the names (`A_1 .. A_16`) and 0-based in the
//! arrays. For the 2-step tables, entry `i = 4 a + b` holds the path
//! `a -> b -> -3` (A/B) or `a -> b -> -1` (C/D), with `a`, `b` state indices.
//! Paths ending in `+1`/`+3` reuse the mirrored entry with `B`/`D` negated.
//!
//! Reduced-state detection keeps only 2 or 3 levels per epoch, picked from a
//! real-valued pre-decision `d` (the equalized sample before the post-filter).

use crate::cost::OpCounter;
use crate::error::{MlseError, Result};
use crate::layered::{LayerTree, MetricTable};
use crate::symbol::{slice_pam4, Pam4Symbol, StateSet};
use crate::trellis::{AlphaCoeff, DetectionResult};

/// The `alpha`-only tables A and C of the 2-step expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct AcTables {
    pub a: [f64; 16],
    pub c: [f64; 16],
}

/// A/B/C/D tables for one sample pair.
///
/// `B = M + N + J` and `D = M + N + K`, where `M` holds the multiples of
/// `y_n + alpha y_{n+1}` (indexed by the middle state), `N` the multiples of
/// `alpha y_n` (indexed by the first state), `J = 6 y_{n+1}` and
/// `K = 2 y_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbcdTables {
    pub a: [f64; 16],
    pub b: [f64; 16],
    pub c: [f64; 16],
    pub d: [f64; 16],
    pub m_vec: [f64; 4],
    pub n_vec: [f64; 4],
    pub j_vec: f64,
    pub k_vec: f64,
}

pub fn build_ac(alpha: AlphaCoeff) -> AcTables {
    build_ac_counted(alpha, &mut ())
}

pub(crate) fn build_ac_counted<C: OpCounter>(alpha: AlphaCoeff, counter: &mut C) -> AcTables {
    let al = alpha.value();
    counter.alpha_refresh();
    counter.var_mul(1);
    let a2 = al * al;
    counter.const_mul(4);
    let (a2_10, a2_18, al_12, al_36) = (10.0 * a2, 18.0 * a2, 12.0 * al, 36.0 * al);
    // shifts
    let (a2_2, al_24, al_8, al_4) = (2.0 * a2, 2.0 * al_12, 8.0 * al, 4.0 * al);

    counter.add(7);
    let b18_18 = a2_18 + 18.0;
    let b10_10 = a2_10 + 10.0;
    let b10_18 = a2_10 + 18.0;
    let b2_10 = a2_2 + 10.0;
    let b18_10 = a2_18 + 10.0;
    let b10_2 = a2_10 + 2.0;
    let b2_2 = a2_2 + 2.0;

    counter.add(12);
    let a = [
        b18_18 + al_36,
        b10_10 + al_12,
        b10_10 - al_12,
        b18_18 - al_36,
        b10_18 + al_24,
        b2_10 + al_8,
        b2_10 - al_8,
        b10_18 - al_24,
        b10_18 + al_12,
        b2_10 + al_4,
        b2_10 - al_4,
        b10_18 - al_12,
        b18_18,
        b10_10,
        b10_10,
        b18_18,
    ];
    counter.add(12);
    let c = [
        b18_10 + al_24,
        b10_2 + al_8,
        b10_2 - al_8,
        b18_10 - al_24,
        b10_10 + al_12,
        b2_2 + al_4,
        b2_2 - al_4,
        b10_10 - al_12,
        b10_10,
        b2_2,
        b2_2,
        b10_10,
        b18_10 - al_12,
        b10_2 - al_4,
        b10_2 + al_4,
        b18_10 + al_12,
    ];
    AcTables { a, c }
}

/// Builds all four tables for the pair `(y_n, y_{n+1})`.
pub fn build_abcd(alpha: AlphaCoeff, y_n: f64, y_np1: f64) -> AbcdTables {
    let ac = build_ac(alpha);
    build_bd_counted(&ac, alpha, y_n, y_np1, &mut ())
}

pub(crate) fn build_bd_counted<C: OpCounter>(
    ac: &AcTables,
    alpha: AlphaCoeff,
    y_n: f64,
    y_np1: f64,
    counter: &mut C,
) -> AbcdTables {
    let al = alpha.value();
    counter.var_mul(2);
    let (ay_n, ay_np1) = (al * y_n, al * y_np1);
    counter.add(1);
    let m = y_n + ay_np1;
    counter.const_mul(3);
    let (m6, ay_n6, y_np1_6) = (6.0 * m, 6.0 * ay_n, 6.0 * y_np1);
    let (m2, ay_n2, y_np1_2) = (2.0 * m, 2.0 * ay_n, 2.0 * y_np1);

    let m_vec = [m6, m2, -m2, -m6];
    let n_vec = [ay_n6, ay_n2, -ay_n2, -ay_n6];
    counter.add(8);
    let nj: [f64; 4] = std::array::from_fn(|a| n_vec[a] + y_np1_6);
    let nk: [f64; 4] = std::array::from_fn(|a| n_vec[a] + y_np1_2);
    counter.add(32);
    let b: [f64; 16] = std::array::from_fn(|i| m_vec[i % 4] + nj[i / 4]);
    let d: [f64; 16] = std::array::from_fn(|i| m_vec[i % 4] + nk[i / 4]);
    AbcdTables {
        a: ac.a,
        b,
        c: ac.c,
        d,
        m_vec,
        n_vec,
        j_vec: y_np1_6,
        k_vec: y_np1_2,
    }
}

impl AbcdTables {
    /// Offset 2-step sum for the path `a -> b -> c` (state indices): the two
    /// branch metrics minus `y_n^2 + y_{n+1}^2`.
    #[inline]
    pub fn path_sum(&self, a: usize, b: usize, c: usize) -> f64 {
        match c {
            0 => self.a[4 * a + b] + self.b[4 * a + b],
            1 => self.c[4 * a + b] + self.d[4 * a + b],
            2 => {
                let j = 4 * (3 - a) + (3 - b);
                self.c[j] - self.d[j]
            }
            _ => {
                let j = 4 * (3 - a) + (3 - b);
                self.a[j] - self.b[j]
            }
        }
    }
}

/// 2-step table restricted to `left x right`, minimizing over `mid`, with the
/// squared samples dropped. Spans epochs `(0, 2)`.
pub fn eval_two_step_simplified(
    tables: &AbcdTables,
    left: StateSet,
    mid: StateSet,
    right: StateSet,
) -> Result<MetricTable> {
    eval_two_step_counted(tables, left, mid, right, 0, &mut ())
}

pub(crate) fn eval_two_step_counted<C: OpCounter>(
    tables: &AbcdTables,
    left: StateSet,
    mid: StateSet,
    right: StateSet,
    first_epoch: usize,
    counter: &mut C,
) -> Result<MetricTable> {
    if mid.is_empty() || left.is_empty() || right.is_empty() {
        return Err(MlseError::EmptyCandidateSet);
    }
    let k = mid.len() as u64;
    let mut entries = [[f64::INFINITY; 4]; 4];
    let mut mids = [[0u8; 4]; 4];
    for a in left.indices() {
        for c in right.indices() {
            counter.add(k);
            counter.cmp(k - 1);
            let mut best = f64::INFINITY;
            let mut arg = None;
            for b in mid.indices() {
                let v = tables.path_sum(a, b, c);
                if arg.is_none() || v < best {
                    best = v;
                    arg = Some(b as u8);
                }
            }
            entries[a][c] = best;
            mids[a][c] = arg.unwrap_or(0);
        }
    }
    Ok(MetricTable {
        entries,
        mid: mids,
        span: (first_epoch, first_epoch + 2),
        left_set: left,
        right_set: right,
    })
}

/// E/F tables of the 1-step expansion. Entry `i = 4 c + a` (for `c` the
/// current state index 0 or 1, `a` the previous one) holds the transition
/// `a -> c`; transitions into `+1`/`+3` use the mirrored entry with `F`
/// negated.
#[derive(Debug, Clone, PartialEq)]
pub struct EfTables {
    pub e: [f64; 8],
    pub f: [f64; 8],
}

impl EfTables {
    /// Offset branch metric `BM - y^2` of the transition `a -> c`.
    #[inline]
    pub fn metric(&self, a: usize, c: usize) -> f64 {
        ef_metric(&self.e, &self.f, a, c)
    }
}

#[inline]
fn ef_metric(e: &[f64; 8], f: &[f64; 8], a: usize, c: usize) -> f64 {
    if c < 2 {
        let i = 4 * c + a;
        e[i] + f[i]
    } else {
        let i = 4 * (3 - c) + (3 - a);
        e[i] - f[i]
    }
}

pub fn build_ef(alpha: AlphaCoeff) -> [f64; 8] {
    build_e_counted(alpha, &mut ())
}

pub(crate) fn build_e_counted<C: OpCounter>(alpha: AlphaCoeff, counter: &mut C) -> [f64; 8] {
    let al = alpha.value();
    counter.alpha_refresh();
    counter.var_mul(1);
    let a2 = al * al;
    counter.const_mul(3);
    let (a2_9, al_6, al_18) = (9.0 * a2, 6.0 * al, 18.0 * al);
    let al_2 = 2.0 * al;
    counter.add(4);
    let (b9_9, b1_9, b9_1, b1_1) = (a2_9 + 9.0, a2 + 9.0, a2_9 + 1.0, a2 + 1.0);
    counter.add(8);
    [
        b9_9 + al_18,
        b1_9 + al_6,
        b1_9 - al_6,
        b9_9 - al_18,
        b9_1 + al_6,
        b1_1 + al_2,
        b1_1 - al_2,
        b9_1 - al_6,
    ]
}

pub fn build_f(alpha: AlphaCoeff, y_n: f64) -> [f64; 8] {
    build_f_counted(alpha, y_n, &mut ())
}

pub(crate) fn build_f_counted<C: OpCounter>(alpha: AlphaCoeff, y_n: f64, counter: &mut C) -> [f64; 8] {
    counter.var_mul(1);
    let ay = alpha.value() * y_n;
    counter.const_mul(2);
    let (y6, ay6) = (6.0 * y_n, 6.0 * ay);
    let (y2, ay2) = (2.0 * y_n, 2.0 * ay);
    counter.add(8);
    [
        y6 + ay6,
        y6 + ay2,
        y6 - ay2,
        y6 - ay6,
        y2 + ay6,
        y2 + ay2,
        y2 - ay2,
        y2 - ay6,
    ]
}

/// Levels kept at one epoch, with the pre-decision they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateSet {
    pub states: StateSet,
    pub source: f64,
}

impl CandidateSet {
    pub fn levels(&self) -> Vec<Pam4Symbol> {
        self.states.symbols()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn reduced_states(d: f64, k: usize) -> Result<StateSet> {
    use Pam4Symbol::*;
    Ok(match k {
        4 => StateSet::FULL,
        3 => match slice_pam4(d) {
            Neg3 | Neg1 => StateSet::from_symbols(&[Neg3, Neg1, Pos1]),
            _ => StateSet::from_symbols(&[Neg1, Pos1, Pos3]),
        },
        // the adjacent pair whose interval contains d, clamped at the edges
        2 => {
            if d < -1.0 {
                StateSet::from_symbols(&[Neg3, Neg1])
            } else if d < 1.0 {
                StateSet::from_symbols(&[Neg1, Pos1])
            } else {
                StateSet::from_symbols(&[Pos1, Pos3])
            }
        }
        _ => return Err(MlseError::InvalidStateCount(k)),
    })
}

/// Candidate levels for pre-decision `d`.
///
/// - 4 states: the full alphabet.
/// - 3 states: `{-3,-1,1}` when `d` slices to -3 or -1, else `{-1,1,3}`.
/// - 2 states: the nearest level and the second nearest, i.e. the adjacent
///   pair bracketing `d` (`{-3,-1}` below -1, `{-1,1}` up to 1, `{1,3}` above).
pub fn candidate_set(d: f64, num_states: usize) -> Result<CandidateSet> {
    Ok(CandidateSet {
        states: reduced_states(d, num_states)?,
        source: d,
    })
}

fn epoch_sets(n: usize, pre: &[f64], num_states: usize) -> Result<Vec<StateSet>> {
    if num_states == 4 {
        if !pre.is_empty() && pre.len() != n + 1 {
            return Err(MlseError::MissingPreDecisions(format!(
                "{} values for {} state epochs",
                pre.len(),
                n + 1
            )));
        }
        return Ok(vec![StateSet::FULL; n + 1]);
    }
    reduced_states(0.0, num_states)?;
    if pre.len() != n + 1 {
        return Err(MlseError::MissingPreDecisions(format!(
            "{} values for {} state epochs with {num_states} states",
            pre.len(),
            n + 1
        )));
    }
    pre.iter().map(|&d| reduced_states(d, num_states)).collect()
}

fn sum_sq(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum()
}

/// 1-step detection over one block with simplified metrics. `pre` holds one
/// pre-decision per state epoch (`N + 1` values, the first for the state
/// before the block); it may be empty when `num_states == 4`. The reported
/// metric has the squared samples added back.
pub fn detect_block_1s_simplified(
    samples: &[f64],
    pre: &[f64],
    alpha: AlphaCoeff,
    num_states: usize,
) -> Result<DetectionResult> {
    detect_block_1s_simplified_counted(samples, pre, alpha, num_states, &mut ())
}

pub(crate) fn detect_block_1s_simplified_counted<C: OpCounter>(
    samples: &[f64],
    pre: &[f64],
    alpha: AlphaCoeff,
    num_states: usize,
    counter: &mut C,
) -> Result<DetectionResult> {
    if samples.is_empty() {
        return Err(MlseError::EmptyInput);
    }
    let sets = epoch_sets(samples.len(), pre, num_states)?;
    let e = build_e_counted(alpha, counter);
    let mut pm = [f64::INFINITY; 4];
    for i in sets[0].indices() {
        pm[i] = 0.0;
    }
    let mut preds: Vec<[u8; 4]> = Vec::with_capacity(samples.len());
    for (n, &y) in samples.iter().enumerate() {
        let f = build_f_counted(alpha, y, counter);
        let (prev_set, cur_set) = (sets[n], sets[n + 1]);
        let kp = prev_set.len() as u64;
        let kc = cur_set.len() as u64;
        counter.add(kp * kc);
        if n > 0 {
            counter.add(kp * kc);
        }
        counter.cmp(kc * (kp - 1));
        let mut next = [f64::INFINITY; 4];
        let mut pred = [0u8; 4];
        for c in cur_set.indices() {
            let mut best = f64::INFINITY;
            let mut arg = None;
            for a in prev_set.indices() {
                let v = pm[a] + ef_metric(&e, &f, a, c);
                if arg.is_none() || v < best {
                    best = v;
                    arg = Some(a as u8);
                }
            }
            next[c] = best;
            pred[c] = arg.unwrap_or(0);
        }
        pm = next;
        preds.push(pred);
    }
    let last_set = sets[samples.len()];
    counter.cmp(last_set.len() as u64 - 1);
    let mut last = None;
    for c in last_set.indices() {
        if last.is_none_or(|l: usize| pm[c] < pm[l]) {
            last = Some(c);
        }
    }
    let last = last.ok_or(MlseError::EmptyCandidateSet)?;
    let states = crate::trellis::traceback(&preds, last);
    Ok(DetectionResult {
        decoded: states.into_iter().map(Pam4Symbol::from_index).collect(),
        survivor_metric: pm[last] + sum_sq(samples),
    })
}

/// Layered 2-step detection with simplified first-layer tables and reduced
/// candidate sets. `pre` as for [`detect_block_1s_simplified`]; the block
/// length must be even.
pub fn detect_block_l2s_simplified(
    samples: &[f64],
    pre: &[f64],
    alpha: AlphaCoeff,
    num_states: usize,
) -> Result<DetectionResult> {
    detect_block_l2s_simplified_counted(samples, pre, alpha, num_states, &mut ())
}

pub(crate) fn detect_block_l2s_simplified_counted<C: OpCounter>(
    samples: &[f64],
    pre: &[f64],
    alpha: AlphaCoeff,
    num_states: usize,
    counter: &mut C,
) -> Result<DetectionResult> {
    let n = samples.len();
    if n < 2 || n % 2 != 0 {
        return Err(MlseError::InvalidBlockLength(n, "an even N >= 2"));
    }
    let sets = epoch_sets(n, pre, num_states)?;
    let ac = build_ac_counted(alpha, counter);
    let mut first = Vec::with_capacity(n / 2);
    for (j, pair) in samples.chunks_exact(2).enumerate() {
        let t = build_bd_counted(&ac, alpha, pair[0], pair[1], counter);
        let e = 2 * j;
        first.push(eval_two_step_counted(
            &t,
            sets[e],
            sets[e + 1],
            sets[e + 2],
            e,
            counter,
        )?);
    }
    let tree = LayerTree::reduce(first, counter)?;
    let (states, metric) = tree.survivor(counter);
    Ok(DetectionResult {
        decoded: states.into_iter().map(Pam4Symbol::from_index).collect(),
        survivor_metric: metric + sum_sq(samples),
    })
}
