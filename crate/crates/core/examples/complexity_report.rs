//! Hardware resource table per detector and block length, with the
//! instrumented counts next to the closed forms.

use pam4_mlse::harness::{complexity_csv, run_complexity};
use pam4_mlse::{stage_counts, VariantId};

fn main() -> pam4_mlse::Result<()> {
    let rows = run_complexity(&[8, 16, 32, 64], &VariantId::ALL, true)?;
    print!("{}", complexity_csv(&rows));

    let s = stage_counts(VariantId::LayeredSimplified, 32, 2)?;
    println!("\nl2s-simplified, N = 32, 2 states");
    println!("  BM + first layer {:?}", s.front);
    println!("  later layers     {:?}", s.middle);
    println!("  survivor         {:?}", s.survivor);
    Ok(())
}
