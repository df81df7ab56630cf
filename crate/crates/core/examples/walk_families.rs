//! Probability profiles of the standard, split-step and directed walks.
//!
//! cargo run --example walk_families -- [steps]

use std::f64::consts::FRAC_PI_4;

use qwalk::randomness::{position_randomness, Measured};
use qwalk::{evolve, InitialState, WalkSpec};

fn main() -> qwalk::Result<()> {
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let init = InitialState::new(0.0, 0.0);
    let specs = [
        WalkSpec::standard(FRAC_PI_4, init, steps),
        WalkSpec::split_step(FRAC_PI_4, FRAC_PI_4, init, steps),
        WalkSpec::directed(2, init, steps),
    ];
    for spec in &specs {
        let psi = evolve(spec)?;
        let pos = psi.joint_distribution().position();
        println!(
            "{:<10} t={steps} norm={:.15} r_pos={:.6} support={}",
            spec.family.name(),
            psi.norm(),
            position_randomness(&psi),
            pos.support_size(1e-24)
        );
        for (x, p) in pos.iter().filter(|(_, p)| *p > 1e-24) {
            let bar = "#".repeat((p * 120.0).round() as usize);
            println!("  {x:>4} {p:.5} {bar}");
        }
    }
    Ok(())
}
