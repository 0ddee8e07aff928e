//! BER against noise for every receiver, plus the full FFE chain for one of
//! them. Pass a directory to also write CSVs and plot scripts there.

use std::path::PathBuf;

use pam4_mlse::harness::{aggregate_by_sigma, plot, run_ber, ChainMode, ExperimentConfig};

fn main() -> pam4_mlse::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from);
    let receivers = ["ffe-only", "serial", "1s", "1s-simplified", "l2s", "l2s-simplified"];
    for r in receivers {
        let mut cfg = ExperimentConfig {
            frame_symbols: 200_000,
            noise_sigmas: vec![0.3, 0.35, 0.4, 0.45],
            seeds: vec![1, 2],
            ..ExperimentConfig::default()
        };
        cfg.set("variant", r)?;
        if let Some(d) = &dir {
            let p = d.join(format!("ber_{r}.csv"));
            std::fs::write(plot::script_path(&p), plot::ber_plot_script(&p))?;
            cfg.output_path = Some(p);
        }
        for rec in aggregate_by_sigma(&run_ber(&cfg)?) {
            println!("{:<16} sigma {:.2}  BER {:.3e}", r, rec.noise_sigma, rec.ber);
        }
    }

    let cfg = ExperimentConfig {
        chain_mode: ChainMode::FullFfeChain,
        frame_symbols: 200_000,
        noise_sigmas: vec![0.25, 0.3, 0.35],
        ..ExperimentConfig::default()
    };
    for rec in run_ber(&cfg)? {
        println!("full chain {:<6} sigma {:.2}  BER {:.3e}", rec.variant, rec.noise_sigma, rec.ber);
    }
    Ok(())
}
