//! Position-to-bits commitment after t steps.
//!
//! cargo run --example commitment_table -- [t]

use qwalk::extraction::{commit_coin, commit_position, CoinOutcome};
use qwalk::{CommitmentScheme, ZeroPolicy};

fn main() -> qwalk::Result<()> {
    let t: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let scheme = CommitmentScheme::new(t, ZeroPolicy::Skip, false)?;
    println!("t = {t}, {} bits per detection", scheme.n_bits);
    for x in -(t as i64)..=t as i64 {
        match commit_position(x, &scheme)? {
            Some(word) => println!("{x:>4}  {word}"),
            None => println!("{x:>4}  (skipped)"),
        }
    }
    for policy in [ZeroPolicy::AssignZero, ZeroPolicy::AssignOne] {
        let s = CommitmentScheme::new(t, policy, false)?;
        println!("x = 0 under {policy:?}: {}", commit_position(0, &s)?.unwrap());
    }
    println!(
        "coin bits: up -> {}, down -> {}",
        commit_coin(CoinOutcome::Up, false) as u8,
        commit_coin(CoinOutcome::Down, false) as u8
    );
    Ok(())
}
