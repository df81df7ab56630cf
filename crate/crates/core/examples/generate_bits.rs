//! Sample detections, commit them to bits, and run the test battery on both
//! the walk stream and the idealised uniform reference.
//!
//! cargo run --release --example generate_bits -- [out-dir]

use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use qwalk::stattests::run_battery;
use qwalk::{generate_bits, BitBuffer, CommitmentScheme, GenerationMode, InitialState, WalkSpec, ZeroPolicy};

fn main() -> qwalk::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let spec = WalkSpec::split_step(FRAC_PI_4, FRAC_PI_4, InitialState::new(0.0, 0.0), 8);
    let scheme = CommitmentScheme::new(8, ZeroPolicy::Skip, true)?;

    for mode in [GenerationMode::Walk, GenerationMode::UniformReference] {
        let buf = generate_bits(&spec, &scheme, 50_000, 2024, mode)?;
        let path = dir.join(format!("qwalk-{mode:?}.bin").to_lowercase());
        buf.write_files(&path)?;
        let again = BitBuffer::read_files(&path)?;
        assert_eq!(again, buf);

        println!("{mode:?}: {} bits, ones fraction {:.4} -> {}", buf.len(), buf.ones() as f64 / buf.len() as f64, path.display());
        for r in run_battery(&buf.to_vec(), 0.01)? {
            println!("  {:<16} stat {:>12.4} p {:.4} {}", r.test, r.statistic, r.p_value, if r.pass { "pass" } else { "FAIL" });
        }
    }
    Ok(())
}
