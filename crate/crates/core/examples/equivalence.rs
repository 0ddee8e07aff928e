//! Decision equivalence between detector variants, with metric diagnostics
//! for every disagreement.

use pam4_mlse::harness::{run_equiv, ExperimentConfig, Receiver};
use pam4_mlse::VariantId;

fn main() -> pam4_mlse::Result<()> {
    let base = ExperimentConfig {
        frame_symbols: 100_000,
        noise_sigmas: vec![0.4, 0.5],
        ..ExperimentConfig::default()
    };
    let cases = [
        ("1s-simplified", 4, Receiver::Block(VariantId::OneStep)),
        ("l2s", 4, Receiver::Block(VariantId::OneStep)),
        ("l2s-simplified", 2, Receiver::Block(VariantId::Layered)),
    ];
    for (v, k, reference) in cases {
        let mut cfg = base.clone();
        cfg.set("variant", v)?;
        cfg.num_states = k;
        let rep = run_equiv(&cfg, reference)?;
        println!(
            "{v}:{k} vs {}: {} mismatches in {} symbols, {} runs",
            rep.reference,
            rep.total_mismatches(),
            rep.total_symbols(),
            rep.diagnostics.len()
        );
        for d in rep.diagnostics.iter().take(3) {
            println!(
                "  at {} (len {}): metric {:.4} vs {:.4}{}",
                d.start,
                d.len,
                d.metric_variant,
                d.metric_reference,
                if d.tie { " (tie)" } else { "" }
            );
        }
    }
    Ok(())
}
