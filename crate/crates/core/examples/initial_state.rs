//! Coin preparation and the randomness it carries before any step.
//!
//! cargo run --example initial_state

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use qwalk::randomness::{coin_randomness, min_entropy, position_randomness, Measured};
use qwalk::state::make_initial_state;
use qwalk::InitialState;

fn main() {
    println!("{:>8} {:>8} {:>8} {:>8} {:>10} {:>10}", "delta", "eta", "P(up)", "R_coin", "R_pos", "H_min/bit");
    for (delta, eta) in [(0.0, 0.0), (FRAC_PI_4, 0.0), (FRAC_PI_4, FRAC_PI_2), (0.3, 1.1), (FRAC_PI_2, 0.0)] {
        let psi = make_initial_state(InitialState::new(delta, eta));
        let joint = psi.joint_distribution();
        let (up, _) = joint.coin();
        let h = min_entropy(&joint.flat()).unwrap();
        println!(
            "{delta:>8.4} {eta:>8.4} {up:>8.4} {:>8.4} {:>10.4} {:>10.4}",
            coin_randomness(&psi),
            position_randomness(&psi),
            h.h_min_bits
        );
    }
    // The phase eta never shows up in a single-site measurement.
}
