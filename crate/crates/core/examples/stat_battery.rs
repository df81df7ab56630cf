//! The four-test battery on hand-made and seeded streams.
//!
//! cargo run --example stat_battery

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use qwalk::stattests::{block_frequency_test, run_battery, serial_test, write_report_csv};
use qwalk::BitBuffer;

fn main() -> qwalk::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let seeded: Vec<bool> = (0..200_000).map(|_| rng.random()).collect();
    let alternating = BitBuffer::parse(&"01".repeat(5_000))?.to_vec();
    let biased: Vec<bool> = (0..200_000).map(|_| rng.random_bool(0.505)).collect();

    for (name, bits) in [("chacha20", &seeded), ("0101...", &alternating), ("p(1)=0.505", &biased)] {
        println!("== {name}");
        write_report_csv(&mut std::io::stdout(), &run_battery(bits, 0.01)?).unwrap();
    }

    let r = block_frequency_test(&seeded, 1000, 0.01)?;
    println!("\nblock length 1000: chi2 {:.3}, p {:.4}", r.statistic, r.p_value);
    let r = serial_test(&seeded, 8, 0.01)?;
    println!("serial m=8: del psi2 {:.3}, p {:.4}", r.statistic, r.p_value);
    Ok(())
}
