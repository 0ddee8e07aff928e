//! The layered detector: 2-step endpoint tables merged pairwise in a
//! min-plus tree, giving log2(N) ACS layers instead of N.

use pam4_mlse::signal::{apply_channel, prbs_symbols, ChannelModel};
use pam4_mlse::{detect_block_1s, detect_block_l2s, merge_tables, two_step_unit, AlphaCoeff, LayerPlan, Pam4Symbol};

fn main() -> pam4_mlse::Result<()> {
    let alpha = AlphaCoeff(0.55);
    let sent = prbs_symbols(11, 32)?.into_inner();
    let y = apply_channel(&sent, &ChannelModel::new(vec![1.0, 0.55], 0.3, 2)?)?.samples;

    // two units cover samples 0..4; merging gives the best path between any
    // pair of endpoint states
    let left = two_step_unit(y[0], y[1], alpha);
    let mut right = two_step_unit(y[2], y[3], alpha);
    // units are built at epoch 0; move the second one after the first
    right.span = (2, 4);
    let merged = merge_tables(&left, &right)?;
    let (a, c, m) = merged.best_entry();
    println!(
        "best 4-sample path: {:?} -> {:?}, metric {m:.4}",
        Pam4Symbol::from_index(a),
        Pam4Symbol::from_index(c)
    );

    let plan = LayerPlan::new(32)?;
    println!("N = 32: {} layers, tables per layer {:?}", plan.depth, plan.tables_per_layer);

    let l2s = detect_block_l2s(&y, alpha)?;
    let one = detect_block_1s(&y, alpha)?;
    assert_eq!(l2s.decoded, one.decoded);
    println!("layered and 1-step agree, survivor metric {:.4}", l2s.survivor_metric);
    Ok(())
}
