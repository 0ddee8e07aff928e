//! Frame simulation and the BER, equivalence and sweep runs.
//!
//! Every (sigma, seed) point is simulated from scratch: the PRBS phase is
//! derived from the seed and the noise stream is seeded with it, so a point
//! can be reproduced on its own. Points are processed in sigma-major, then
//! seed order; block detection inside a point is parallel but reassembled in
//! frame order.

use crate::blocks::detect_frame;
use crate::error::{MlseError, Result};
use crate::signal::{
    apply_channel, ffe_apply, invert_post_filter, lms_ffe_train, post_filter, prbs_symbols,
    ChannelModel, FfeState,
};
use crate::symbol::{count_bit_errors, count_symbol_errors, demap_pam4, slice_pam4, Pam4Symbol};
use crate::trellis::{branch_metric, viterbi_detect_serial, AlphaCoeff};

use super::config::{ChainMode, ExperimentConfig, Receiver};

/// One simulated frame as the detectors see it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimFrame {
    pub symbols: Vec<Pam4Symbol>,
    /// Post-filter-domain samples fed to the trellis detectors.
    pub samples: Vec<f64>,
    /// Pre-decision signal, one value per symbol.
    pub pre: Vec<f64>,
    /// First scored symbol (training symbols are skipped).
    pub scored_from: usize,
}

fn prbs_seed(seed: u64) -> u32 {
    (seed % 0x7fff) as u32 + 1
}

pub fn simulate_frame(cfg: &ExperimentConfig, sigma: f64, seed: u64) -> Result<SimFrame> {
    let symbols = prbs_symbols(prbs_seed(seed), cfg.frame_symbols)?.into_inner();
    match cfg.chain_mode {
        ChainMode::DirectIsi => {
            let ch = ChannelModel::new(vec![1.0, cfg.channel_alpha()], sigma, seed)?;
            let y = apply_channel(&symbols, &ch)?;
            let pre = invert_post_filter(&y, cfg.alpha).samples;
            Ok(SimFrame {
                symbols,
                samples: y.samples,
                pre,
                scored_from: 0,
            })
        }
        ChainMode::FullFfeChain => {
            let ch = ChannelModel::new(cfg.channel_taps.clone(), sigma, seed)?;
            let r = apply_channel(&symbols, &ch)?;
            let train = &symbols[..cfg.training_symbols];
            let ffe = lms_ffe_train(train, &r, FfeState::new(cfg.ffe_taps, cfg.ffe_step)?, cfg.ffe_epochs)?;
            let x = ffe_apply(&ffe, &r);
            let y = post_filter(&x, cfg.alpha);
            Ok(SimFrame {
                symbols,
                samples: y.samples,
                pre: x.samples,
                scored_from: cfg.training_symbols,
            })
        }
    }
}

/// Runs the configured receiver on a frame.
pub fn detect(cfg: &ExperimentConfig, frame: &SimFrame) -> Result<Vec<Pam4Symbol>> {
    detect_with(cfg, cfg.receiver, frame)
}

fn detect_with(cfg: &ExperimentConfig, receiver: Receiver, frame: &SimFrame) -> Result<Vec<Pam4Symbol>> {
    let alpha = AlphaCoeff(cfg.alpha);
    match receiver {
        Receiver::Block(v) => {
            let mut c = cfg.clone();
            c.receiver = Receiver::Block(v);
            let det = c.detector()?.expect("block receiver");
            let pre = det.needs_pre_decisions().then_some(&frame.pre[..]);
            Ok(detect_frame(&frame.samples, alpha, cfg.block, det, pre)?.into_inner())
        }
        Receiver::Serial => Ok(viterbi_detect_serial(
            &frame.samples,
            alpha,
            cfg.block.data_len,
            cfg.block.overlap,
        )?
        .decoded),
        Receiver::FfeOnly => Ok(frame.pre.iter().map(|&v| slice_pam4(v)).collect()),
    }
}

/// Error counts of one receiver at one (sigma, seed) point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub variant: String,
    pub num_states: usize,
    pub alpha: f64,
    pub overlap: usize,
    pub data_len: usize,
    pub block_len: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub symbols: usize,
    pub bit_errors: usize,
    pub bits: usize,
    pub ber: f64,
    pub symbol_errors: usize,
}

pub const BER_HEADER: &str =
    "variant,num_states,alpha,O,R,N,sigma,seed,symbols,bit_errors,bits,ber,symbol_errors";

impl BerRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:e},{}",
            self.variant,
            self.num_states,
            self.alpha,
            self.overlap,
            self.data_len,
            self.block_len,
            self.noise_sigma,
            self.seed,
            self.symbols,
            self.bit_errors,
            self.bits,
            self.ber,
            self.symbol_errors
        )
    }
}

pub fn ber_csv(records: &[BerRecord]) -> String {
    let mut out = String::from(BER_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn score(cfg: &ExperimentConfig, frame: &SimFrame, decoded: &[Pam4Symbol], sigma: f64, seed: u64) -> BerRecord {
    let from = frame.scored_from;
    let truth = &frame.symbols[from..];
    let got = &decoded[from..];
    let bits = 2 * truth.len();
    let bit_errors = count_bit_errors(&demap_pam4(truth), &demap_pam4(got));
    BerRecord {
        variant: cfg.receiver.name().to_string(),
        num_states: cfg.reported_states(),
        alpha: cfg.alpha,
        overlap: cfg.block.overlap,
        data_len: cfg.block.data_len,
        block_len: cfg.block.block_len(),
        noise_sigma: sigma,
        seed,
        symbols: truth.len(),
        bit_errors,
        bits,
        ber: bit_errors as f64 / bits as f64,
        symbol_errors: count_symbol_errors(truth, got),
    }
}

fn write_output(cfg: &ExperimentConfig, text: &str) -> Result<()> {
    if let Some(p) = &cfg.output_path {
        std::fs::write(p, text).map_err(|e| MlseError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn ber_points(cfg: &ExperimentConfig) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.noise_sigmas.len() * cfg.seeds.len());
    for &sigma in &cfg.noise_sigmas {
        for &seed in &cfg.seeds {
            let frame = simulate_frame(cfg, sigma, seed)?;
            let decoded = detect(cfg, &frame)?;
            out.push(score(cfg, &frame, &decoded, sigma, seed));
        }
    }
    Ok(out)
}

/// BER over every (sigma, seed) point; writes the CSV when `output_path` is set.
pub fn run_ber(cfg: &ExperimentConfig) -> Result<Vec<BerRecord>> {
    let records = ber_points(cfg)?;
    write_output(cfg, &ber_csv(&records))?;
    Ok(records)
}

/// Sums the records of each sigma across seeds (in first-seen sigma order).
pub fn aggregate_by_sigma(records: &[BerRecord]) -> Vec<BerRecord> {
    let mut out: Vec<BerRecord> = Vec::new();
    for r in records {
        match out
            .iter_mut()
            .find(|o| o.noise_sigma == r.noise_sigma && o.variant == r.variant && o.alpha == r.alpha && o.overlap == r.overlap && o.num_states == r.num_states)
        {
            Some(o) => {
                o.symbols += r.symbols;
                o.bits += r.bits;
                o.bit_errors += r.bit_errors;
                o.symbol_errors += r.symbol_errors;
                o.ber = o.bit_errors as f64 / o.bits as f64;
            }
            None => out.push(r.clone()),
        }
    }
    out
}

/// A maximal run of positions where two receivers disagree, with the branch
/// metric sums of both decisions over the transitions the run touches.
#[derive(Debug, Clone, PartialEq)]
pub struct TieDiagnostic {
    pub noise_sigma: f64,
    pub seed: u64,
    pub start: usize,
    pub len: usize,
    pub metric_variant: f64,
    pub metric_reference: f64,
    /// Whether the two metrics agree within 1e-9 relative.
    pub tie: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivPoint {
    pub noise_sigma: f64,
    pub seed: u64,
    pub symbols: usize,
    pub mismatches: usize,
    pub runs: usize,
    pub tie_runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivReport {
    pub variant: String,
    pub reference: String,
    pub points: Vec<EquivPoint>,
    pub diagnostics: Vec<TieDiagnostic>,
}

impl EquivReport {
    pub fn total_mismatches(&self) -> usize {
        self.points.iter().map(|p| p.mismatches).sum()
    }

    pub fn total_symbols(&self) -> usize {
        self.points.iter().map(|p| p.symbols).sum()
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("variant,reference,sigma,seed,symbols,mismatches,mismatch_rate,runs,tie_runs\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:e},{},{}\n",
                self.variant,
                self.reference,
                p.noise_sigma,
                p.seed,
                p.symbols,
                p.mismatches,
                p.mismatches as f64 / p.symbols as f64,
                p.runs,
                p.tie_runs
            ));
        }
        out
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("variant,reference,sigma,seed,start,len,metric_variant,metric_reference,tie\n");
        for d in &self.diagnostics {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                self.variant,
                self.reference,
                d.noise_sigma,
                d.seed,
                d.start,
                d.len,
                d.metric_variant,
                d.metric_reference,
                d.tie
            ));
        }
        out
    }
}

/// Branch metrics of transitions `start ..= end` (clipped to the frame) along
/// `d`; the first sample of the frame takes its best predecessor.
fn local_metric(y: &[f64], alpha: AlphaCoeff, d: &[Pam4Symbol], start: usize, end: usize) -> f64 {
    (start..=end.min(y.len() - 1))
        .map(|k| {
            if k == 0 {
                Pam4Symbol::ALL
                    .iter()
                    .map(|&p| branch_metric(y[0], alpha, p, d[0]))
                    .fold(f64::INFINITY, f64::min)
            } else {
                branch_metric(y[k], alpha, d[k - 1], d[k])
            }
        })
        .sum()
}

/// Compares the configured receiver with `reference` on every (sigma, seed)
/// point. Every disagreement run is reported with its local metrics.
pub fn run_equiv(cfg: &ExperimentConfig, reference: Receiver) -> Result<EquivReport> {
    cfg.validate()?;
    let alpha = AlphaCoeff(cfg.alpha);
    let mut report = EquivReport {
        variant: cfg.receiver.name().to_string(),
        reference: reference.name().to_string(),
        points: Vec::new(),
        diagnostics: Vec::new(),
    };
    for &sigma in &cfg.noise_sigmas {
        for &seed in &cfg.seeds {
            let frame = simulate_frame(cfg, sigma, seed)?;
            let a = detect(cfg, &frame)?;
            let b = detect_with(cfg, reference, &frame)?;
            let mut point = EquivPoint {
                noise_sigma: sigma,
                seed,
                symbols: a.len(),
                mismatches: 0,
                runs: 0,
                tie_runs: 0,
            };
            let mut k = 0;
            while k < a.len() {
                if a[k] == b[k] {
                    k += 1;
                    continue;
                }
                let start = k;
                while k < a.len() && a[k] != b[k] {
                    k += 1;
                }
                let ma = local_metric(&frame.samples, alpha, &a, start, k);
                let mb = local_metric(&frame.samples, alpha, &b, start, k);
                let tie = (ma - mb).abs() <= 1e-9 * ma.abs().max(mb.abs()).max(1e-12);
                point.mismatches += k - start;
                point.runs += 1;
                point.tie_runs += tie as usize;
                report.diagnostics.push(TieDiagnostic {
                    noise_sigma: sigma,
                    seed,
                    start,
                    len: k - start,
                    metric_variant: ma,
                    metric_reference: mb,
                    tie,
                });
            }
            report.points.push(point);
        }
    }
    write_output(cfg, &report.summary_csv())?;
    Ok(report)
}

/// Parameter varied by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Detector `alpha`; the channel keeps the base configuration's value.
    Alpha,
    /// Overlap `O`, with `R` fixed.
    Overlap,
    /// States per epoch of the simplified detector.
    States,
}

impl std::str::FromStr for SweepParam {
    type Err = MlseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParam::Alpha),
            "overlap" => Ok(SweepParam::Overlap),
            "states" => Ok(SweepParam::States),
            _ => Err(MlseError::InvalidConfig {
                field: "param".into(),
                reason: format!("unknown sweep parameter `{s}`"),
            }),
        }
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Overlap => "overlap",
            SweepParam::States => "states",
        }
    }
}

/// Parallel-versus-serial disagreement at one overlap value.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMismatch {
    pub overlap: usize,
    pub symbols: usize,
    pub mismatches: usize,
}

impl OverlapMismatch {
    pub fn rate(&self) -> f64 {
        self.mismatches as f64 / self.symbols as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param: SweepParam,
    pub records: Vec<BerRecord>,
    /// Overlap sweeps only.
    pub mismatch: Vec<OverlapMismatch>,
}

impl SweepResult {
    pub fn mismatch_csv(&self) -> String {
        let mut out = String::from("O,symbols,mismatches,mismatch_rate\n");
        for m in &self.mismatch {
            out.push_str(&format!("{},{},{},{:e}\n", m.overlap, m.symbols, m.mismatches, m.rate()));
        }
        out
    }
}

fn swept_config(base: &ExperimentConfig, param: SweepParam, v: f64) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    let bad = |reason: String| MlseError::InvalidConfig {
        field: param.name().into(),
        reason,
    };
    match param {
        SweepParam::Alpha => {
            cfg.channel_alpha = Some(base.channel_alpha());
            cfg.alpha = v;
        }
        SweepParam::Overlap | SweepParam::States => {
            if v < 0.0 || v.fract() != 0.0 {
                return Err(bad(format!("{v} is not a non-negative integer")));
            }
            if param == SweepParam::Overlap {
                cfg.block.overlap = v as usize;
            } else {
                cfg.num_states = v as usize;
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// One BER run per value of `param`. Overlap sweeps also compare each
/// parallel result with the serial detector run at the base configuration's
/// `R` and `O`.
pub fn run_sweep(param: SweepParam, values: &[f64], base: &ExperimentConfig) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(MlseError::InvalidConfig {
            field: param.name().into(),
            reason: "no sweep values".into(),
        });
    }
    base.validate()?;
    let configs = values
        .iter()
        .map(|&v| swept_config(base, param, v))
        .collect::<Result<Vec<_>>>()?;
    let mut result = SweepResult {
        param,
        records: Vec::new(),
        mismatch: Vec::new(),
    };
    if param != SweepParam::Overlap {
        for cfg in &configs {
            result.records.extend(ber_points(cfg)?);
        }
    } else {
        // frames do not depend on O: simulate once per point
        let mut mismatch: Vec<OverlapMismatch> = configs
            .iter()
            .map(|c| OverlapMismatch {
                overlap: c.block.overlap,
                symbols: 0,
                mismatches: 0,
            })
            .collect();
        let mut per_cfg: Vec<Vec<BerRecord>> = vec![Vec::new(); configs.len()];
        for &sigma in &base.noise_sigmas {
            for &seed in &base.seeds {
                let frame = simulate_frame(base, sigma, seed)?;
                let serial = detect_with(base, Receiver::Serial, &frame)?;
                for (i, cfg) in configs.iter().enumerate() {
                    let d = detect(cfg, &frame)?;
                    per_cfg[i].push(score(cfg, &frame, &d, sigma, seed));
                    mismatch[i].symbols += d.len();
                    mismatch[i].mismatches += d.iter().zip(&serial).filter(|(x, y)| x != y).count();
                }
            }
        }
        result.records = per_cfg.concat();
        result.mismatch = mismatch;
    }
    write_output(base, &ber_csv(&result.records))?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::VariantId;

    fn small(receiver: &str) -> ExperimentConfig {
        ExperimentConfig {
            receiver: receiver.parse().unwrap(),
            frame_symbols: 4000,
            noise_sigmas: vec![0.0],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn noiseless_runs_are_error_free() {
        for r in ["1s", "1s-simplified", "l2s", "l2s-simplified", "serial", "ffe-only"] {
            let recs = run_ber(&small(r)).unwrap();
            assert_eq!(recs.len(), 1);
            assert_eq!(recs[0].bit_errors, 0, "{r}");
            assert_eq!(recs[0].bits, 8000);
        }
    }

    #[test]
    fn huge_noise_is_uninformative() {
        let mut cfg = small("l2s");
        cfg.noise_sigmas = vec![100.0];
        let r = &run_ber(&cfg).unwrap()[0];
        assert!((0.3..=0.7).contains(&r.ber), "ber {}", r.ber);
        assert_eq!(r.ber, r.bit_errors as f64 / r.bits as f64);
    }

    #[test]
    fn full_chain_runs() {
        let mut cfg = small("l2s-simplified");
        cfg.chain_mode = ChainMode::FullFfeChain;
        cfg.noise_sigmas = vec![0.05];
        let r = &run_ber(&cfg).unwrap()[0];
        assert_eq!(r.symbols, 3000);
        assert!(r.ber < 1e-2, "ber {}", r.ber);
    }

    #[test]
    fn aggregation_sums_seeds() {
        let mut cfg = small("1s");
        cfg.noise_sigmas = vec![0.5, 0.6];
        cfg.seeds = vec![1, 2, 3];
        let recs = run_ber(&cfg).unwrap();
        assert_eq!(recs.len(), 6);
        let agg = aggregate_by_sigma(&recs);
        assert_eq!(agg.len(), 2);
        let errs: usize = recs[..3].iter().map(|r| r.bit_errors).sum();
        assert_eq!(agg[0].bit_errors, errs);
        assert_eq!(agg[0].bits, 3 * 8000);
    }

    #[test]
    fn equivalence_reports_runs() {
        let mut cfg = small("l2s");
        cfg.noise_sigmas = vec![0.5];
        let rep = run_equiv(&cfg, Receiver::Block(VariantId::OneStep)).unwrap();
        assert_eq!(rep.total_mismatches(), 0);
        let mut cfg = small("l2s-simplified");
        cfg.noise_sigmas = vec![0.7];
        let rep = run_equiv(&cfg, Receiver::FfeOnly).unwrap();
        let runs: usize = rep.points.iter().map(|p| p.runs).sum();
        assert_eq!(runs, rep.diagnostics.len());
        assert!(rep.total_mismatches() > 0);
        assert_eq!(rep.diagnostics.iter().map(|d| d.len).sum::<usize>(), rep.total_mismatches());
    }

    #[test]
    fn sweeps() {
        let mut cfg = small("1s");
        cfg.noise_sigmas = vec![0.5];
        let s = run_sweep(SweepParam::Overlap, &[0.0, 8.0], &cfg).unwrap();
        assert_eq!(s.records.len(), 2);
        assert_eq!(s.mismatch.len(), 2);
        assert!(s.mismatch[1].rate() <= s.mismatch[0].rate());
        let s = run_sweep(SweepParam::Alpha, &[0.3, 0.55], &cfg).unwrap();
        assert_eq!(s.records[0].alpha, 0.3);
        assert!(s.mismatch.is_empty());
        assert!(run_sweep(SweepParam::States, &[2.5], &cfg).is_err());
        assert!(run_sweep(SweepParam::Overlap, &[], &cfg).is_err());
    }
}
