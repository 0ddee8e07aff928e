//! Reference MLSE machinery for PAM4 over a 2-tap channel `[1, alpha]`:
//! branch metrics, add-compare-select, the serial sliding-block Viterbi
//! detector and an exhaustive search used as the correctness oracle.
//!
//! Ties are always broken toward the smaller symbol level (lexicographically
//! smaller sequence for whole paths), so every detector in the crate makes the
//! same choice on equal metrics.

use crate::cost::OpCounter;
use crate::error::{MlseError, Result};
use crate::symbol::{Pam4Symbol, ALPHABET};

/// Second coefficient of the 2-tap post-filter `[1, alpha]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaCoeff(pub f64);

impl AlphaCoeff {
    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The noiseless channel output `alpha * s_prev + s_cur`.
    #[inline]
    pub fn expected(self, s_prev: Pam4Symbol, s_cur: Pam4Symbol) -> f64 {
        self.0 * s_prev.value() + s_cur.value()
    }
}

impl From<f64> for AlphaCoeff {
    fn from(a: f64) -> Self {
        AlphaCoeff(a)
    }
}

/// `|y - (alpha s_prev + s_cur)|^2`.
#[inline]
pub fn branch_metric(y: f64, alpha: AlphaCoeff, s_prev: Pam4Symbol, s_cur: Pam4Symbol) -> f64 {
    let d = y - alpha.expected(s_prev, s_cur);
    d * d
}

/// Branch metric for an `L`-tap response. `coeffs[0]` is the cursor (1 by
/// convention) and `states[k]` is `s_{n-k}`.
pub fn branch_metric_general(y: f64, coeffs: &[f64], states: &[Pam4Symbol]) -> Result<f64> {
    if coeffs.len() != states.len() {
        return Err(MlseError::LengthMismatch {
            coeffs: coeffs.len(),
            states: states.len(),
        });
    }
    let model: f64 = coeffs.iter().zip(states).map(|(a, s)| a * s.value()).sum();
    let d = y - model;
    Ok(d * d)
}

/// The 16 noiseless outputs `alpha s_prev + s_cur`, indexed `[prev][cur]`.
/// One constant multiplication (`3 alpha`) and 16 additions, once per block.
pub(crate) fn expected_outputs<C: OpCounter>(alpha: AlphaCoeff, counter: &mut C) -> [[f64; 4]; 4] {
    counter.alpha_refresh();
    counter.const_mul(1);
    counter.add(16);
    let mut e = [[0.0; 4]; 4];
    for p in Pam4Symbol::ALL {
        for c in Pam4Symbol::ALL {
            e[p.index()][c.index()] = alpha.expected(p, c);
        }
    }
    e
}

/// All 16 branch metrics of one sample from precomputed expected outputs.
#[inline]
pub(crate) fn branch_metrics<C: OpCounter>(
    y: f64,
    expected: &[[f64; 4]; 4],
    counter: &mut C,
) -> [[f64; 4]; 4] {
    counter.add(16);
    counter.var_mul(16);
    let mut bm = [[0.0; 4]; 4];
    for p in 0..ALPHABET {
        for c in 0..ALPHABET {
            let d = y - expected[p][c];
            bm[p][c] = d * d;
        }
    }
    bm
}

/// Per-state accumulated metrics with the predecessor chosen at the last step.
/// Excluded states (reduced-state trellises) hold `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathMetrics {
    pub metrics: [f64; ALPHABET],
    pub predecessor: [u8; ALPHABET],
}

impl PathMetrics {
    /// Zero metric on every state: the free initial state.
    pub fn zero() -> Self {
        PathMetrics {
            metrics: [0.0; ALPHABET],
            predecessor: [0; ALPHABET],
        }
    }

    pub fn from_metrics(metrics: [f64; ALPHABET]) -> Self {
        PathMetrics {
            metrics,
            predecessor: [0; ALPHABET],
        }
    }

    pub fn get(&self, s: Pam4Symbol) -> f64 {
        self.metrics[s.index()]
    }

    /// Index of the smallest metric, smaller level first on ties.
    pub fn best_index(&self) -> usize {
        argmin4(&self.metrics)
    }

    pub fn min(&self) -> f64 {
        self.metrics[self.best_index()]
    }
}

#[inline]
pub(crate) fn argmin4(v: &[f64; 4]) -> usize {
    let mut best = 0;
    for i in 1..4 {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}

/// One add-compare-select step over a full 4-state trellis.
pub fn acs_step(pm_prev: &PathMetrics, y: f64, alpha: AlphaCoeff) -> PathMetrics {
    let mut next = PathMetrics::zero();
    for c in Pam4Symbol::ALL {
        let mut best = f64::INFINITY;
        let mut arg = 0u8;
        for p in Pam4Symbol::ALL {
            let cand = pm_prev.metrics[p.index()] + branch_metric(y, alpha, p, c);
            if cand < best {
                best = cand;
                arg = p.index() as u8;
            }
        }
        next.metrics[c.index()] = best;
        next.predecessor[c.index()] = arg;
    }
    next
}

/// ACS from precomputed branch metrics. `first` marks a step whose incoming
/// metrics are all zero, where the additions are skipped.
#[inline]
pub(crate) fn acs_from_bm<C: OpCounter>(
    pm: &[f64; 4],
    bm: &[[f64; 4]; 4],
    first: bool,
    counter: &mut C,
) -> ([f64; 4], [u8; 4]) {
    if !first {
        counter.add(16);
    }
    counter.cmp(12);
    let mut out = [0.0; 4];
    let mut pred = [0u8; 4];
    for c in 0..4 {
        let mut best = pm[0] + bm[0][c];
        let mut arg = 0u8;
        for p in 1..4 {
            let cand = pm[p] + bm[p][c];
            if cand < best {
                best = cand;
                arg = p as u8;
            }
        }
        out[c] = best;
        pred[c] = arg;
    }
    (out, pred)
}

/// Walks predecessor records back from `last` (state index after the final
/// step). Returns `preds.len() + 1` state indices, oldest first.
pub(crate) fn traceback(preds: &[[u8; 4]], last: usize) -> Vec<usize> {
    let mut states = vec![0usize; preds.len() + 1];
    let mut s = last;
    states[preds.len()] = s;
    for k in (0..preds.len()).rev() {
        s = preds[k][s] as usize;
        states[k] = s;
    }
    states
}

/// Decided symbols with the metric of the path they lie on.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub decoded: Vec<Pam4Symbol>,
    pub survivor_metric: f64,
}

/// Initial-state handling for path metrics and the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `s_{-1}` is a free variable with zero prior metric.
    FreeInitial,
    FixedInitial(Pam4Symbol),
}

/// Sum of branch metrics along `states`, where `states[k]` is the state after
/// sample `k`. The state before sample 0 follows `boundary`; when free it is
/// the best one for the first sample.
pub fn path_metric(y: &[f64], alpha: AlphaCoeff, states: &[Pam4Symbol], boundary: Boundary) -> f64 {
    assert_eq!(y.len(), states.len());
    if y.is_empty() {
        return 0.0;
    }
    let mut total = match boundary {
        Boundary::FreeInitial => Pam4Symbol::ALL
            .iter()
            .map(|&p| branch_metric(y[0], alpha, p, states[0]))
            .fold(f64::INFINITY, f64::min),
        Boundary::FixedInitial(p) => branch_metric(y[0], alpha, p, states[0]),
    };
    for k in 1..y.len() {
        total += branch_metric(y[k], alpha, states[k - 1], states[k]);
    }
    total
}

/// Sum of branch metrics over a block whose decoded states include the
/// initial one (`states.len() == y.len() + 1`).
pub fn block_path_metric(y: &[f64], alpha: AlphaCoeff, states: &[Pam4Symbol]) -> f64 {
    assert_eq!(states.len(), y.len() + 1);
    y.iter()
        .enumerate()
        .map(|(k, &v)| branch_metric(v, alpha, states[k], states[k + 1]))
        .sum()
}

/// Serial sliding-block Viterbi. Each block runs ACS over `data_len + overlap`
/// samples, traces back from the best final state, keeps the first `data_len`
/// decisions and hands the path metrics at the last data symbol to the next
/// block. The first block starts from zero metrics on every state.
///
/// `survivor_metric` is the branch-metric sum along the decoded sequence with a
/// free initial state; for a frame that fits in one block it is the global
/// minimum.
pub fn viterbi_detect_serial(
    y: &[f64],
    alpha: AlphaCoeff,
    data_len: usize,
    overlap: usize,
) -> Result<DetectionResult> {
    if y.is_empty() {
        return Err(MlseError::EmptyInput);
    }
    if data_len == 0 {
        return Err(MlseError::InvalidBlockLength(0, "R >= 1"));
    }
    let len = y.len();
    let expected = expected_outputs(alpha, &mut ());
    let mut decoded = Vec::with_capacity(len);
    let mut pm = [0.0f64; 4];
    let mut first = true;
    let mut start = 0;
    let mut preds: Vec<[u8; 4]> = Vec::with_capacity(data_len + overlap);
    while start < len {
        let end = (start + data_len + overlap).min(len);
        let data_end = (start + data_len).min(len);
        preds.clear();
        let mut cur = pm;
        let mut boundary = cur;
        for (k, &sample) in y.iter().enumerate().take(end).skip(start) {
            let bm = branch_metrics(sample, &expected, &mut ());
            let (next, p) = acs_from_bm(&cur, &bm, first, &mut ());
            first = false;
            cur = next;
            preds.push(p);
            if k + 1 == data_end {
                boundary = cur;
            }
        }
        // preds[0] points at the state before the block; drop it from the path
        let path = traceback(&preds, argmin4(&cur));
        decoded.extend(
            path[1..=data_end - start]
                .iter()
                .map(|&i| Pam4Symbol::from_index(i)),
        );
        let m = boundary.iter().copied().fold(f64::INFINITY, f64::min);
        pm = boundary.map(|v| v - m);
        start = data_end;
    }
    let survivor_metric = path_metric(y, alpha, &decoded, Boundary::FreeInitial);
    Ok(DetectionResult {
        decoded,
        survivor_metric,
    })
}

/// Longest input the exhaustive search accepts.
pub const BRUTE_FORCE_MAX_LEN: usize = 12;

/// Outcome of the exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Minimizing sequence including the initial state: `states[0]` is the
    /// state before sample 0, `states[k + 1]` the state after sample `k`.
    pub states: Vec<Pam4Symbol>,
    pub metric: f64,
    /// Best metric over all other sequences.
    pub runner_up: f64,
}

impl OracleResult {
    /// States after each sample (drops the initial state).
    pub fn decoded(&self) -> &[Pam4Symbol] {
        &self.states[1..]
    }

    /// Whether the minimizer beats every other sequence by more than `rel`
    /// relative to the metric scale.
    pub fn is_unique(&self, rel: f64) -> bool {
        self.runner_up - self.metric > rel * self.metric.abs().max(1.0)
    }

    pub fn into_result(self) -> DetectionResult {
        DetectionResult {
            decoded: self.states,
            survivor_metric: self.metric,
        }
    }
}

/// Exact minimizer of the branch-metric sum over every symbol sequence,
/// enumerated in lexicographic order (first minimum wins). Costs
/// `4^(len + 1)` leaves with a free initial state.
pub fn brute_force_detect(y: &[f64], alpha: AlphaCoeff, boundary: Boundary) -> Result<OracleResult> {
    if y.is_empty() {
        return Err(MlseError::EmptyInput);
    }
    if y.len() > BRUTE_FORCE_MAX_LEN {
        return Err(MlseError::OracleTooLong {
            len: y.len(),
            max: BRUTE_FORCE_MAX_LEN,
        });
    }
    let bm: Vec<[[f64; 4]; 4]> = y
        .iter()
        .map(|&v| {
            let mut t = [[0.0; 4]; 4];
            for p in Pam4Symbol::ALL {
                for c in Pam4Symbol::ALL {
                    t[p.index()][c.index()] = branch_metric(v, alpha, p, c);
                }
            }
            t
        })
        .collect();

    struct Search<'a> {
        bm: &'a [[[f64; 4]; 4]],
        path: Vec<usize>,
        best: f64,
        second: f64,
        best_path: Vec<usize>,
    }

    impl Search<'_> {
        fn leaf(&mut self, total: f64) {
            if total < self.best {
                self.second = self.best;
                self.best = total;
                self.best_path.clone_from(&self.path);
            } else if total < self.second {
                self.second = total;
            }
        }

        fn descend(&mut self, k: usize, total: f64) {
            if k == self.bm.len() {
                self.leaf(total);
                return;
            }
            let prev = *self.path.last().unwrap();
            for c in 0..4 {
                self.path.push(c);
                self.descend(k + 1, total + self.bm[k][prev][c]);
                self.path.pop();
            }
        }
    }

    let mut search = Search {
        bm: &bm,
        path: Vec::with_capacity(y.len() + 1),
        best: f64::INFINITY,
        second: f64::INFINITY,
        best_path: Vec::new(),
    };
    let initials: Vec<usize> = match boundary {
        Boundary::FreeInitial => (0..4).collect(),
        Boundary::FixedInitial(s) => vec![s.index()],
    };
    for s0 in initials {
        search.path.push(s0);
        search.descend(0, 0.0);
        search.path.pop();
    }
    Ok(OracleResult {
        states: search
            .best_path
            .iter()
            .map(|&i| Pam4Symbol::from_index(i))
            .collect(),
        metric: search.best,
        runner_up: search.second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::slice_pam4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use Pam4Symbol::*;

    fn noiseless(symbols: &[Pam4Symbol], alpha: f64, initial: Option<Pam4Symbol>) -> Vec<f64> {
        let mut prev = initial.map(|s| s.value()).unwrap_or(0.0);
        symbols
            .iter()
            .map(|s| {
                let y = s.value() + alpha * prev;
                prev = s.value();
                y
            })
            .collect()
    }

    fn random_symbols(rng: &mut ChaCha8Rng, n: usize) -> Vec<Pam4Symbol> {
        (0..n).map(|_| Pam4Symbol::from_index(rng.random_range(0..4))).collect()
    }

    #[test]
    fn branch_metric_examples() {
        assert!(branch_metric(1.55, AlphaCoeff(0.55), Pos1, Pos1).abs() < 1e-15);
        assert_eq!(branch_metric(0.0, AlphaCoeff(0.5), Neg3, Pos1), 0.25);
        assert_eq!(branch_metric(3.0, AlphaCoeff(0.0), Neg3, Pos3), 0.0);
    }

    #[test]
    fn general_metric() {
        assert_eq!(branch_metric_general(0.5, &[1.0], &[Pos1]).unwrap(), 0.25);
        assert_eq!(
            branch_metric_general(0.0, &[1.0, 0.5, 0.25], &[Pos1, Pos1, Pos1]).unwrap(),
            3.0625
        );
        assert!(matches!(
            branch_metric_general(0.0, &[1.0, 0.5], &[Pos1]),
            Err(MlseError::LengthMismatch { .. })
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let y = rng.random_range(-5.0..5.0);
            let a = rng.random_range(-1.0..1.0);
            let p = Pam4Symbol::from_index(rng.random_range(0..4));
            let c = Pam4Symbol::from_index(rng.random_range(0..4));
            let g = branch_metric_general(y, &[1.0, a], &[c, p]).unwrap();
            let b = branch_metric(y, AlphaCoeff(a), p, c);
            assert!((g - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn metric_zero_iff_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let a = AlphaCoeff(rng.random_range(0.0..1.0));
            let p = Pam4Symbol::from_index(rng.random_range(0..4));
            let c = Pam4Symbol::from_index(rng.random_range(0..4));
            let y = rng.random_range(-5.0..5.0);
            assert!(branch_metric(y, a, p, c) > 0.0);
            assert_eq!(branch_metric(a.expected(p, c), a, p, c), 0.0);
        }
    }

    #[test]
    fn acs_memoryless() {
        let pm = acs_step(&PathMetrics::zero(), 1.0, AlphaCoeff(0.0));
        assert_eq!(pm.metrics, [16.0, 4.0, 0.0, 4.0]);
    }

    #[test]
    fn acs_against_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = AlphaCoeff(0.55);
        for _ in 0..500 {
            let prev = PathMetrics::from_metrics([
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
            ]);
            let y = rng.random_range(-5.0..5.0);
            let next = acs_step(&prev, y, a);
            // all 16 sums, then a column-wise min
            let mut sums = [[0.0; 4]; 4];
            for p in 0..4 {
                for c in 0..4 {
                    let d = y - (0.55 * Pam4Symbol::from_index(p).value()
                        + Pam4Symbol::from_index(c).value());
                    sums[p][c] = prev.metrics[p] + d * d;
                }
            }
            for c in 0..4 {
                let col: Vec<f64> = (0..4).map(|p| sums[p][c]).collect();
                let m = col.iter().copied().fold(f64::INFINITY, f64::min);
                assert_eq!(next.metrics[c], m);
                assert_eq!(col[next.predecessor[c] as usize], m);
            }
            assert!(next.min() >= prev.min());
        }
    }

    #[test]
    fn acs_ties_go_to_smaller_level() {
        // alpha = 0 makes every predecessor equivalent
        let pm = acs_step(&PathMetrics::zero(), 0.3, AlphaCoeff(0.0));
        assert_eq!(pm.predecessor, [0, 0, 0, 0]);
    }

    #[test]
    fn serial_noiseless_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_symbols(&mut rng, 1000);
        let y = noiseless(&s, 0.55, Some(Pos1));
        let r = viterbi_detect_serial(&y, AlphaCoeff(0.55), 16, 8).unwrap();
        assert_eq!(r.decoded, s);
        assert!(r.survivor_metric.abs() < 1e-20);
    }

    #[test]
    fn serial_memoryless_is_slicer() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y: Vec<f64> = (0..300).map(|_| rng.random_range(-4.5..4.5)).collect();
        let r = viterbi_detect_serial(&y, AlphaCoeff(0.0), 16, 8).unwrap();
        let sliced: Vec<Pam4Symbol> = y.iter().map(|&v| slice_pam4(v)).collect();
        assert_eq!(r.decoded, sliced);
    }

    #[test]
    fn serial_rejects_empty() {
        assert_eq!(
            viterbi_detect_serial(&[], AlphaCoeff(0.5), 16, 8),
            Err(MlseError::EmptyInput)
        );
        assert!(viterbi_detect_serial(&[1.0], AlphaCoeff(0.5), 0, 8).is_err());
    }

    #[test]
    fn serial_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = AlphaCoeff(0.55);
        let mut compared = 0;
        for _ in 0..100 {
            let s = random_symbols(&mut rng, 10);
            let y: Vec<f64> = noiseless(&s, 0.55, None)
                .iter()
                .map(|v| v + rng.random_range(-0.8..0.8))
                .collect();
            let v = viterbi_detect_serial(&y, a, 16, 8).unwrap();
            let o = brute_force_detect(&y, a, Boundary::FreeInitial).unwrap();
            assert!((v.survivor_metric - o.metric).abs() <= 1e-9 * o.metric.max(1e-300));
            if o.is_unique(1e-9) {
                assert_eq!(v.decoded, o.decoded());
                compared += 1;
            }
        }
        assert!(compared > 90);
    }

    #[test]
    fn serial_multi_block_resums() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_symbols(&mut rng, 400);
        let y: Vec<f64> = noiseless(&s, 0.55, None)
            .iter()
            .map(|v| v + rng.random_range(-0.5..0.5))
            .collect();
        let r = viterbi_detect_serial(&y, AlphaCoeff(0.55), 16, 8).unwrap();
        assert_eq!(r.decoded.len(), y.len());
        let re = path_metric(&y, AlphaCoeff(0.55), &r.decoded, Boundary::FreeInitial);
        assert!((re - r.survivor_metric).abs() <= 1e-9 * re);
        let again = viterbi_detect_serial(&y, AlphaCoeff(0.55), 16, 8).unwrap();
        assert_eq!(again.decoded, r.decoded);
    }

    #[test]
    fn brute_force_basics() {
        let o = brute_force_detect(&[0.9], AlphaCoeff(0.0), Boundary::FreeInitial).unwrap();
        assert_eq!(o.decoded(), &[Pos1]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = random_symbols(&mut rng, 8);
        let y = noiseless(&s, 0.55, Some(Neg1));
        let o = brute_force_detect(&y, AlphaCoeff(0.55), Boundary::FreeInitial).unwrap();
        assert_eq!(o.metric, 0.0);
        assert_eq!(o.decoded(), s.as_slice());
        assert_eq!(o.states[0], Neg1);
        let fixed = brute_force_detect(&y, AlphaCoeff(0.55), Boundary::FixedInitial(Pos3)).unwrap();
        assert_eq!(fixed.states[0], Pos3);
        assert!(fixed.metric > 0.0);
        assert_eq!(
            brute_force_detect(&[0.0; 13], AlphaCoeff(0.5), Boundary::FreeInitial),
            Err(MlseError::OracleTooLong { len: 13, max: 12 })
        );
    }

    #[test]
    fn brute_force_tie_is_lexicographic() {
        // alpha = 0, y = 0: -1 and 1 tie at every position
        let o = brute_force_detect(&[0.0, 0.0], AlphaCoeff(0.0), Boundary::FreeInitial).unwrap();
        assert_eq!(o.states, vec![Neg3, Neg1, Neg1]);
        assert!(!o.is_unique(1e-9));
    }
}
