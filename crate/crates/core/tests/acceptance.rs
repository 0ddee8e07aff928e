//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Every criterion also yields a CSV so that the
//! determinism check can rerun everything with a different worker count.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use pam4_mlse::harness::{
    instrumented_counts, run_ber, run_sweep, ber_csv, ExperimentConfig, SweepParam,
};
use pam4_mlse::signal::{apply_channel, invert_post_filter, prbs_symbols, ChannelModel, GaussianSource};
use pam4_mlse::simplified::EfTables;
use pam4_mlse::{
    branch_metric, brute_force_detect, build_abcd, build_ef, build_f, detect_block_1s,
    detect_block_l2s, first_layer_counts, latency_units, segment_frame_with, stage_counts,
    static_counts, viterbi_detect_serial, with_workers, AlphaCoeff, BlockConfig, BlockDetector,
    Boundary, FirstLayerVariant, Pam4Symbol, ResourceCounts, VariantId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

const ALPHA: f64 = 0.55;
const FRAME: usize = 1_000_000;

struct Outcome {
    id: u8,
    pass: bool,
    detail: String,
    csv: String,
}

/// Criterion 1: exhaustive-search agreement on length-10 frames.
fn oracle_equivalence() -> Outcome {
    let a = AlphaCoeff(ALPHA);
    let mut csv = String::from("sigma,frame,unique,serial_match,block_1s_match,block_l2s_match,worst_rel_metric_err\n");
    let mut pass = true;
    let (mut unique, mut total) = (0, 0);
    for (si, &sigma) in [0.2, 0.5].iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + si as u64);
        let mut noise = GaussianSource::new(200 + si as u64);
        for f in 0..200 {
            let s: Vec<Pam4Symbol> = (0..11).map(|_| Pam4Symbol::from_index(rng.random_range(0..4))).collect();
            let y: Vec<f64> = (1..11)
                .map(|k| s[k].value() + ALPHA * s[k - 1].value() + sigma * noise.next_normal())
                .collect();
            let o = brute_force_detect(&y, a, Boundary::FreeInitial).unwrap();
            let ser = viterbi_detect_serial(&y, a, 10, 0).unwrap();
            let b1 = detect_block_1s(&y, a).unwrap();
            let bl = detect_block_l2s(&y, a).unwrap();
            let is_unique = o.is_unique(1e-9);
            let m = [
                ser.decoded == o.decoded(),
                b1.decoded == o.states,
                bl.decoded == o.states,
            ];
            let worst = [ser.survivor_metric, b1.survivor_metric, bl.survivor_metric]
                .iter()
                .map(|&v| (v - o.metric).abs() / o.metric.abs().max(1e-300))
                .fold(0.0, f64::max);
            pass &= worst <= 1e-9 && (!is_unique || m.iter().all(|&x| x));
            unique += is_unique as usize;
            total += 1;
            writeln!(csv, "{sigma},{f},{is_unique},{},{},{},{worst:e}", m[0], m[1], m[2]).unwrap();
        }
    }
    Outcome {
        id: 1,
        pass,
        detail: format!("{total} frames, {unique} with a unique minimizer; metric rel tol 1e-9"),
        csv,
    }
}

/// Criterion 2: the 4-state simplified detectors against the unsimplified ones.
fn simplification_exactness() -> Outcome {
    let a = AlphaCoeff(ALPHA);
    let symbols = prbs_symbols(77, 100_000).unwrap().into_inner();
    let y = apply_channel(&symbols, &ChannelModel::new(vec![1.0, ALPHA], 0.45, 21).unwrap()).unwrap();
    let pre = invert_post_filter(&y, ALPHA);
    let cfg = BlockConfig::new(8, 16).unwrap();
    let blocks = segment_frame_with(&y.samples, Some(&pre.samples), cfg).unwrap();
    let pairs = [
        (VariantId::OneStepSimplified, VariantId::OneStep),
        (VariantId::LayeredSimplified, VariantId::Layered),
    ];
    let mut csv = String::from("variant,reference,symbols,mismatches,worst_rel_metric_err\n");
    let mut pass = true;
    let mut detail = Vec::new();
    for (v, r) in pairs {
        let dv = BlockDetector::new(v, 4).unwrap();
        let dr = BlockDetector::full(r);
        let per_block: Vec<(usize, f64)> = blocks
            .par_iter()
            .map(|b| {
                let x = dv.detect(b, a, &mut ()).unwrap();
                let z = dr.detect(b, a, &mut ()).unwrap();
                let data = cfg.overlap + 1..cfg.overlap + 1 + b.data_count;
                let mism = x.decoded[data.clone()]
                    .iter()
                    .zip(&z.decoded[data])
                    .filter(|(p, q)| p != q)
                    .count();
                let err = (x.survivor_metric - z.survivor_metric).abs() / z.survivor_metric.abs().max(1e-300);
                (mism, err)
            })
            .collect();
        let mism: usize = per_block.iter().map(|p| p.0).sum();
        let worst = per_block.iter().map(|p| p.1).fold(0.0, f64::max);
        pass &= mism == 0 && worst <= 1e-9;
        detail.push(format!("{v}:4 vs {r}: {mism} mismatches, worst rel {worst:.1e}"));
        writeln!(csv, "{v},{r},{},{mism},{worst:e}", symbols.len()).unwrap();
    }
    Outcome {
        id: 2,
        pass,
        detail: format!("1e5 symbols; {}", detail.join("; ")),
        csv,
    }
}

/// Criterion 3: table sums against direct branch-metric sums minus the
/// dropped squared samples.
fn table_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    // mixed tolerance: |got - want| <= 1e-12 * (1 + |want|)
    let mut check = |got: f64, want: f64| {
        let e = (got - want).abs() / (1.0 + want.abs());
        worst = worst.max(e);
        pass &= e <= 1e-12;
    };
    for _ in 0..1000 {
        let al = rng.random_range(0.0..1.0);
        let alpha = AlphaCoeff(al);
        let (yn, yn1) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let t = build_abcd(alpha, yn, yn1);
        for p in Pam4Symbol::ALL {
            for q in Pam4Symbol::ALL {
                for r in Pam4Symbol::ALL {
                    let e1 = yn - (al * p.value() + q.value());
                    let e2 = yn1 - (al * q.value() + r.value());
                    check(t.path_sum(p.index(), q.index(), r.index()), e1 * e1 + e2 * e2 - yn * yn - yn1 * yn1);
                }
            }
        }
        let ef = EfTables {
            e: build_ef(alpha),
            f: build_f(alpha, yn),
        };
        for p in Pam4Symbol::ALL {
            for q in Pam4Symbol::ALL {
                let e1 = yn - (al * p.value() + q.value());
                check(ef.metric(p.index(), q.index()), e1 * e1 - yn * yn);
            }
        }
        // the library branch metric agrees with the expansion used above
        check(branch_metric(yn, alpha, Pam4Symbol::Neg3, Pam4Symbol::Pos1), (yn + 3.0 * al - 1.0).powi(2));
    }
    Outcome {
        id: 3,
        pass,
        detail: format!("1000 trials x (64 + 16) sums, worst mixed err {worst:.1e} (tol 1e-12)"),
        csv: format!("trials,sums_per_trial,worst_mixed_err\n1000,80,{worst:e}\n"),
    }
}

/// Criterion 4: the N=32 figures and instrumented multiplier counts.
fn complexity_reproduction() -> Outcome {
    let mut pass = true;
    let l = static_counts(VariantId::Layered, 32).unwrap();
    let ls = static_counts(VariantId::LayeredSimplified, 32).unwrap();
    let lat_1s = latency_units(VariantId::OneStep, 32).unwrap();
    let lat_l2s = latency_units(VariantId::Layered, 32).unwrap();
    let add_ratio = ls.adders as f64 / l.adders as f64;
    let cmp_ratio = ls.comparators as f64 / l.comparators as f64;
    pass &= (l.variable_multipliers, ls.variable_multipliers) == (512, 33);
    pass &= (l.adders, ls.adders) == (2512, 935);
    pass &= (l.comparators, ls.comparators) == (1503, 127);
    pass &= (lat_1s, lat_l2s) == (34, 7);
    pass &= (add_ratio * 1000.0).round() == 372.0 && (cmp_ratio * 10000.0).round() == 845.0;
    let mut csv = String::from("variant,N,static_var_mult,instrumented_var_mult\n");
    for v in VariantId::ALL {
        for n in [8, 16, 32] {
            let s = static_counts(v, n).unwrap().variable_multipliers;
            let d = instrumented_counts(v, n).unwrap().variable_multipliers;
            pass &= s == d;
            writeln!(csv, "{v},{n},{s},{d}").unwrap();
        }
    }
    Outcome {
        id: 4,
        pass,
        detail: format!(
            "var mult {}->{}, adders {}->{} ({add_ratio:.3}), comparators {}->{} ({cmp_ratio:.4}), latency {lat_1s}->{lat_l2s}; instrumented var mult equal at N=8,16,32",
            l.variable_multipliers, ls.variable_multipliers, l.adders, ls.adders, l.comparators, ls.comparators
        ),
        csv,
    }
}

/// Closed-form totals written out independently of the library.
fn table_one(v: VariantId, n: u64) -> ResourceCounts {
    match v {
        VariantId::OneStep => ResourceCounts::new(16 * n, 1, 32 * n, 12 * n + 3),
        VariantId::OneStepSimplified => ResourceCounts::new(n + 1, 2 * n + 3, 16 * n + 8, 2 * n + 1),
        VariantId::Layered => ResourceCounts::new(16 * n, 1, 80 * n - 48, 48 * n - 33),
        VariantId::LayeredSimplified => ResourceCounts::new(n + 1, 3 * n / 2 + 4, 57 * n / 2 + 23, 4 * n - 1),
    }
}

/// Criterion 5: stage decompositions add up to the totals.
fn formula_consistency() -> Outcome {
    let mut pass = true;
    let mut csv = String::from("variant,N,stage_sum_ok,first_layer_sum_ok,static_ok\n");
    for v in VariantId::ALL {
        for n in [8usize, 16, 32, 64] {
            let want = table_one(v, n as u64);
            let k = if v.is_simplified() { 2 } else { 4 };
            let stage_ok = stage_counts(v, n, k).unwrap().total() == want;
            let first_ok = match v {
                VariantId::Layered => {
                    first_layer_counts(FirstLayerVariant::Layered, n).unwrap()
                        + pam4_mlse::cost::merge_and_survivor_counts(n, 4).unwrap()
                        == want
                }
                VariantId::LayeredSimplified => {
                    first_layer_counts(FirstLayerVariant::LayeredSimplified2, n).unwrap()
                        + pam4_mlse::cost::merge_and_survivor_counts(n, 2).unwrap()
                        == want
                }
                _ => true,
            };
            let static_ok = static_counts(v, n).unwrap() == want;
            pass &= stage_ok && first_ok && static_ok;
            writeln!(csv, "{v},{n},{stage_ok},{first_ok},{static_ok}").unwrap();
        }
    }
    Outcome {
        id: 5,
        pass,
        detail: "4 variants x N in {8,16,32,64}, integer-exact".into(),
        csv,
    }
}

fn base_config(receiver: &str, sigma: f64, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        frame_symbols: FRAME,
        noise_sigmas: vec![sigma],
        seeds: vec![seed],
        alpha: ALPHA,
        block: BlockConfig::new(8, 16).unwrap(),
        ..ExperimentConfig::default()
    };
    cfg.set("variant", receiver).unwrap();
    cfg
}

/// Noise level where threshold slicing of the zero-forced signal gives BER
/// 1e-2: the slicer sees Gaussian noise of std `sigma / sqrt(1 - alpha^2)`
/// and errs on 3/2 neighbours per symbol, one bit each.
fn slicer_sigma() -> f64 {
    let q_inv = Normal::new(0.0, 1.0).unwrap().inverse_cdf(1.0 - 1e-2 / 0.75);
    (1.0 - ALPHA * ALPHA).sqrt() / q_inv
}

/// Noise level where the 4-state detector gives BER 1e-3, by bisection on a
/// calibration seed not used by the measurements.
fn mlse_sigma() -> f64 {
    let (mut lo, mut hi) = (0.25, 0.5);
    for _ in 0..12 {
        let mid = 0.5 * (lo + hi);
        let ber = run_ber(&base_config("serial", mid, 999)).unwrap()[0].ber;
        if ber < 1e-3 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Criterion 6: overlap sweep against the serial detector.
fn overlap_behavior(sigma: f64) -> Outcome {
    let res = run_sweep(SweepParam::Overlap, &[0.0, 2.0, 4.0, 8.0], &base_config("1s", sigma, 6)).unwrap();
    let rates: Vec<f64> = res.mismatch.iter().map(|m| m.rate()).collect();
    let monotone = rates.windows(2).all(|w| w[1] <= w[0]);
    let at8 = rates[3];
    let ber8 = res.records[3].ber;
    let ber_ok = (1e-3 / 3.0..=3e-3).contains(&ber8);
    Outcome {
        id: 6,
        pass: monotone && at8 < 1e-3 && ber_ok,
        detail: format!(
            "sigma={sigma:.4}, 1S BER at O=8 {ber8:.2e} (want 1e-3 within x3); mismatch rate O=0,2,4,8: {} (non-increasing, O=8 < 1e-3)",
            rates.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>().join(", ")
        ),
        csv: res.mismatch_csv() + &ber_csv(&res.records),
    }
}

/// Criterion 7: MLSE gain over slicing, and reduced-state robustness.
fn detection_gain(sigma_slicer: f64, sigma_mlse: f64) -> Outcome {
    let ber_of = |receiver: &str, states: usize, sigma: f64| {
        let mut cfg = base_config(receiver, sigma, 7);
        cfg.num_states = states;
        run_ber(&cfg).unwrap().remove(0)
    };
    let mut records = Vec::new();
    let slicer = ber_of("ffe-only", 2, sigma_slicer);
    let mut pass = (0.5e-2..=2e-2).contains(&slicer.ber);
    let mut gains = Vec::new();
    for (r, k) in [("serial", 4), ("1s", 4), ("1s-simplified", 2), ("l2s", 4), ("l2s-simplified", 2)] {
        let rec = ber_of(r, k, sigma_slicer);
        pass &= rec.ber < slicer.ber;
        gains.push(format!("{r}:{} {:.2e}", rec.num_states, rec.ber));
        records.push(rec);
    }
    records.insert(0, slicer.clone());
    let full = ber_of("l2s", 4, sigma_mlse);
    let reduced2 = ber_of("l2s-simplified", 2, sigma_mlse);
    let reduced3 = ber_of("l2s-simplified", 3, sigma_mlse);
    let ratio = reduced2.ber / full.ber;
    pass &= ratio <= 1.5;
    records.extend([full.clone(), reduced3.clone(), reduced2.clone()]);
    Outcome {
        id: 7,
        pass,
        detail: format!(
            "sigma={sigma_slicer:.4}: slicer {:.2e}, {}; sigma={sigma_mlse:.4}: l2s:4 {:.2e}, l2s-simplified:3 {:.2e}, :2 {:.2e} (ratio {ratio:.3} <= 1.5)",
            slicer.ber,
            gains.join(", "),
            full.ber,
            reduced3.ber,
            reduced2.ber
        ),
        csv: ber_csv(&records),
    }
}

fn run_all() -> Vec<Outcome> {
    let s7 = slicer_sigma();
    let s6 = mlse_sigma();
    vec![
        oracle_equivalence(),
        simplification_exactness(),
        table_fidelity(),
        complexity_reproduction(),
        formula_consistency(),
        overlap_behavior(s6),
        detection_gain(s7, s6),
    ]
}

fn main() -> ExitCode {
    // cargo passes harness flags such as --list; this target has no sub-tests
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let t = Instant::now();
    let first = with_workers(4, run_all).unwrap();
    let mut all_pass = true;
    for o in &first {
        println!("criterion {} {}: {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        all_pass &= o.pass;
    }
    let second = with_workers(1, run_all).unwrap();
    let differing: Vec<u8> = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a.csv != b.csv)
        .map(|(a, _)| a.id)
        .collect();
    let bytes: usize = first.iter().map(|o| o.csv.len()).sum();
    let det = differing.is_empty();
    println!(
        "criterion 8 {}: CSVs of criteria 1-7 with 4 workers vs 1 worker ({bytes} bytes) {}",
        if det { "PASS" } else { "FAIL" },
        if det { "byte-identical".to_string() } else { format!("differ for {differing:?}") }
    );
    all_pass &= det;
    println!("acceptance finished in {:.1}s", t.elapsed().as_secs_f64());
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
