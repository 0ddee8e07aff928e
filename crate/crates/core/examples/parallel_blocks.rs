//! Splitting a frame into overlapped blocks and detecting them in parallel.
//! The decisions match the serial detector and do not depend on the number
//! of worker threads.

use pam4_mlse::signal::{apply_channel, prbs_symbols, ChannelModel};
use pam4_mlse::{
    detect_frame, segment_frame, viterbi_detect_serial, with_workers, AlphaCoeff, BlockConfig,
    BlockDetector, VariantId,
};

fn main() -> pam4_mlse::Result<()> {
    let alpha = AlphaCoeff(0.55);
    let sent = prbs_symbols(3, 100_000)?.into_inner();
    let y = apply_channel(&sent, &ChannelModel::new(vec![1.0, 0.55], 0.4, 9)?)?.samples;

    let cfg = BlockConfig::new(8, 16)?;
    let blocks = segment_frame(&y, cfg)?;
    println!("{} blocks of N = {} (O = 8, R = 16)", blocks.len(), cfg.block_len());

    let det = BlockDetector::full(VariantId::OneStep);
    let one = with_workers(1, || detect_frame(&y, alpha, cfg, det, None))??;
    let many = with_workers(4, || detect_frame(&y, alpha, cfg, det, None))??;
    assert_eq!(one, many);

    let serial = viterbi_detect_serial(&y, alpha, 16, 8)?.decoded;
    let diff = one.iter().zip(&serial).filter(|(a, b)| a != b).count();
    println!("parallel vs serial mismatches: {diff} of {}", serial.len());
    Ok(())
}
