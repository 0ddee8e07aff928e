//! LMS training of the feed-forward equalizer on a 3-tap channel, followed by
//! the post-filter that shapes the equalized signal into `[1, alpha]`.

use pam4_mlse::signal::{
    apply_channel, ffe_apply, lms_ffe_train, post_filter, prbs_symbols, ChannelModel, FfeState,
};
use pam4_mlse::{slice_pam4, viterbi_detect_serial, AlphaCoeff};

fn main() -> pam4_mlse::Result<()> {
    let sent = prbs_symbols(9, 50_000)?.into_inner();
    let r = apply_channel(&sent, &ChannelModel::new(vec![1.0, 0.6, 0.25], 0.2, 3)?)?;
    let ffe = lms_ffe_train(&sent[..2000], &r, FfeState::new(15, 1e-3)?, 8)?;
    for (i, mse) in ffe.epoch_mse.iter().enumerate() {
        println!("epoch {i}: training MSE {mse:.4}");
    }

    let x = ffe_apply(&ffe, &r);
    let y = post_filter(&x, 0.55);
    let sliced = x.samples.iter().skip(2000).zip(&sent[2000..]).filter(|(v, s)| slice_pam4(**v) != **s).count();
    let mlse = viterbi_detect_serial(&y.samples, AlphaCoeff(0.55), 16, 8)?.decoded;
    let mlse_err = mlse[2000..].iter().zip(&sent[2000..]).filter(|(a, b)| a != b).count();
    println!("after training: slicer {sliced} symbol errors, MLSE {mlse_err}");
    Ok(())
}
