use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pam4_mlse::harness::{
    aggregate_by_sigma, complexity_csv, plot, run_ber, run_complexity, run_equiv, run_sweep,
    ExperimentConfig, Receiver, SweepParam,
};
use pam4_mlse::{with_workers, MlseError, Result, VariantId};

#[derive(Parser)]
#[command(name = "mlse", about = "PAM4 MLSE detector experiments", version)]
struct Cli {
    /// Worker threads for block detection (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// BER for every (sigma, seed) point.
    Ber(Common),
    /// Decision mismatches between two receivers.
    Equiv {
        #[command(flatten)]
        common: Common,
        /// Receiver to compare against.
        #[arg(long, default_value = "1s")]
        reference: String,
    },
    /// Resource counts and latency per variant and block length.
    Complexity {
        /// Variants (repeatable; default: all four).
        #[arg(long)]
        variant: Vec<String>,
        /// Block lengths.
        #[arg(long = "n", value_delimiter = ',', default_values_t = [8usize, 16, 32, 64])]
        ns: Vec<usize>,
        /// Also run the instrumented detectors.
        #[arg(long)]
        instrument: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BER over a range of alpha, overlap or state-count values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// alpha | overlap | states
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    states: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<String>,
    /// Noise sigma (repeatable).
    #[arg(long, allow_negative_numbers = true)]
    sigma: Vec<String>,
    #[arg(long)]
    symbols: Option<String>,
    #[arg(long)]
    overlap: Option<String>,
    #[arg(long)]
    data_len: Option<String>,
    /// Seed (repeatable).
    #[arg(long)]
    seed: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let single = [
            ("variant", &self.variant),
            ("num_states", &self.states),
            ("alpha", &self.alpha),
            ("frame_symbols", &self.symbols),
            ("overlap", &self.overlap),
            ("data_len", &self.data_len),
        ];
        for (key, v) in single {
            if let Some(v) = v {
                cfg.set(key, v)?;
            }
        }
        if !self.sigma.is_empty() {
            cfg.set("noise_sigmas", &self.sigma.join(","))?;
        }
        if !self.seed.is_empty() {
            cfg.set("seeds", &self.seed.join(","))?;
        }
        if let Some(p) = &self.out {
            cfg.output_path = Some(p.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| MlseError::Io(format!("{}: {e}", path.display())))
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Ber(common) => {
            let cfg = common.config()?;
            let records = run_ber(&cfg)?;
            for r in aggregate_by_sigma(&records) {
                println!(
                    "{} sigma={} bits={} bit_errors={} ber={:e}",
                    r.variant, r.noise_sigma, r.bits, r.bit_errors, r.ber
                );
            }
            if let Some(p) = &cfg.output_path {
                write(&plot::script_path(p), &plot::ber_plot_script(p))?;
            }
        }
        Cmd::Equiv { common, reference } => {
            let cfg = common.config()?;
            let reference: Receiver = reference.parse()?;
            let rep = run_equiv(&cfg, reference)?;
            let ties: usize = rep.points.iter().map(|p| p.tie_runs).sum();
            println!(
                "{} vs {}: {} mismatches over {} symbols, {} runs, {} ties",
                rep.variant,
                rep.reference,
                rep.total_mismatches(),
                rep.total_symbols(),
                rep.diagnostics.len(),
                ties
            );
            if let Some(p) = &cfg.output_path {
                let mut s = p.as_os_str().to_owned();
                s.push(".ties.csv");
                write(Path::new(&s), &rep.diagnostics_csv())?;
            }
        }
        Cmd::Complexity {
            variant,
            ns,
            instrument,
            out,
        } => {
            let variants = if variant.is_empty() {
                VariantId::ALL.to_vec()
            } else {
                variant
                    .iter()
                    .map(|v| v.parse())
                    .collect::<Result<Vec<VariantId>>>()?
            };
            let csv = complexity_csv(&run_complexity(&ns, &variants, instrument)?);
            match out {
                Some(p) => {
                    write(&p, &csv)?;
                    write(&plot::script_path(&p), &plot::complexity_plot_script(&p))?;
                }
                None => print!("{csv}"),
            }
        }
        Cmd::Sweep {
            common,
            param,
            values,
        } => {
            let cfg = common.config()?;
            let param: SweepParam = param.parse()?;
            let res = run_sweep(param, &values, &cfg)?;
            for r in aggregate_by_sigma(&res.records) {
                println!(
                    "{} states={} alpha={} O={} sigma={} ber={:e}",
                    r.variant, r.num_states, r.alpha, r.overlap, r.noise_sigma, r.ber
                );
            }
            for m in &res.mismatch {
                println!("O={} mismatch_rate={:e}", m.overlap, m.rate());
            }
            if let Some(p) = &cfg.output_path {
                let column = match param {
                    SweepParam::Alpha => "alpha",
                    SweepParam::Overlap => "O",
                    SweepParam::States => "num_states",
                };
                write(&plot::script_path(p), &plot::sweep_plot_script(p, column))?;
                if param == SweepParam::Overlap {
                    let mut s = p.as_os_str().to_owned();
                    s.push(".mismatch.csv");
                    write(Path::new(&s), &res.mismatch_csv())?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.workers {
        Some(n) => with_workers(n, || run(cli.cmd)).and_then(|r| r),
        None => run(cli.cmd),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mlse: {e}");
            ExitCode::FAILURE
        }
    }
}
