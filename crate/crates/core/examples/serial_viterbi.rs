//! Serial sliding-block Viterbi on a noisy 2-tap ISI frame, compared with
//! symbol-by-symbol slicing of the zero-forced signal.

use pam4_mlse::signal::{apply_channel, invert_post_filter, prbs_symbols, ChannelModel};
use pam4_mlse::symbol::count_symbol_errors;
use pam4_mlse::{slice_pam4, viterbi_detect_serial, AlphaCoeff};

fn main() -> pam4_mlse::Result<()> {
    let alpha = 0.55;
    let sent = prbs_symbols(1, 200_000)?.into_inner();
    let y = apply_channel(&sent, &ChannelModel::new(vec![1.0, alpha], 0.38, 5)?)?;

    let mlse = viterbi_detect_serial(&y.samples, AlphaCoeff(alpha), 16, 8)?;
    let sliced: Vec<_> = invert_post_filter(&y, alpha).samples.iter().map(|&x| slice_pam4(x)).collect();

    println!("symbols        {}", sent.len());
    println!("slicer errors  {}", count_symbol_errors(&sent, &sliced));
    println!("viterbi errors {}", count_symbol_errors(&sent, &mlse.decoded));
    Ok(())
}
