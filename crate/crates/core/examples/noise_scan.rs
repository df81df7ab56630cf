//! Bit-flip noise on the coin: measured randomness R, von Neumann entropy E,
//! and the remainder QR = R - E.
//!
//! cargo run --example noise_scan

use std::f64::consts::FRAC_PI_4;

use qwalk::density::{apply_bitflip_channel, DensityEvolution, DensityOperator};
use qwalk::randomness::von_neumann_entropy;
use qwalk::state::make_initial_state;
use qwalk::{InitialState, RandomnessReport, WalkSpec};

fn main() -> qwalk::Result<()> {
    // One channel application on |up><up| at the origin.
    let up = make_initial_state(InitialState::new(0.0, 0.0));
    let rho = DensityOperator::from_pure(&up, (0, 0));
    let mixed = apply_bitflip_channel(&rho, 0.5)?;
    println!("flip(0.5) of |up><up|: diag {:?}, S = {:.6}", mixed.diagonal(), von_neumann_entropy(&mixed)?);

    let steps = 50;
    println!("\n{:>4} {:>5} {:>10} {:>10} {:>10}", "t", "p", "R", "E", "QR");
    for p in [0.0, 0.1, 0.4] {
        let spec = WalkSpec::standard(FRAC_PI_4, InitialState::new(0.0, 0.0), steps).with_noise(p);
        let mut evo = DensityEvolution::new(&spec, qwalk::density::density_cap())?;
        while evo.t() < steps {
            evo.advance()?;
            if evo.t() % 10 == 0 {
                let r = RandomnessReport::for_density(evo.rho(), p)?;
                println!("{:>4} {p:>5.2} {:>10.6} {:>10.6} {:>10.6}", evo.t(), r.r_joint, r.e_vn, r.qr);
            }
        }
    }
    Ok(())
}
