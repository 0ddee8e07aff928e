//! Simplified detectors: shared-term metric tables and trellis pruning to
//! the 2 or 3 levels nearest a pre-decision.

use pam4_mlse::signal::{apply_channel, invert_post_filter, prbs_symbols, ChannelModel};
use pam4_mlse::symbol::count_bit_errors;
use pam4_mlse::{candidate_set, demap_pam4, detect_frame, AlphaCoeff, BlockConfig, BlockDetector, VariantId};

fn main() -> pam4_mlse::Result<()> {
    for d in [-2.4, -0.2, 0.7, 2.9] {
        let two = candidate_set(d, 2)?.levels();
        let three = candidate_set(d, 3)?.levels();
        println!("pre-decision {d:+.1}: 2-state {two:?}, 3-state {three:?}");
    }

    let alpha = 0.55;
    let sent = prbs_symbols(5, 500_000)?.into_inner();
    let y = apply_channel(&sent, &ChannelModel::new(vec![1.0, alpha], 0.37, 4)?)?;
    let pre = invert_post_filter(&y, alpha).samples;
    let cfg = BlockConfig::new(8, 16)?;
    let bits = demap_pam4(&sent);
    for k in [4, 3, 2] {
        let det = BlockDetector::new(VariantId::LayeredSimplified, k)?;
        let got = detect_frame(&y.samples, AlphaCoeff(alpha), cfg, det, Some(&pre))?;
        let errs = count_bit_errors(&bits, &demap_pam4(&got));
        println!("{det}: BER {:.3e}", errs as f64 / bits.len() as f64);
    }
    Ok(())
}
