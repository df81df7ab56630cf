//! Closed-form one- and two-step randomness against simulation.
//!
//! cargo run --example analytic_check

use qwalk::harness::{verify_analytic, RunConfig, ANALYTIC_TOL};
use qwalk::randomness::{analytic_step1_randomness, analytic_step2_randomness};

fn main() -> qwalk::Result<()> {
    let q = std::f64::consts::FRAC_PI_4;
    let (c1, p1) = analytic_step1_randomness(0.0, 0.0, q);
    let (c2, p2) = analytic_step2_randomness(0.0, 0.0, q);
    println!("delta=0 theta=pi/4: step1 coin {c1:.12} pos {p1:.12}");
    println!("                    step2 coin {c2:.12} pos {p2:.12}");
    println!("ln 2 = {:.12}, 1.5 ln 2 = {:.12}", 2f64.ln(), 1.5 * 2f64.ln());

    let check = verify_analytic(&RunConfig::default())?;
    let worst = check
        .rows
        .iter()
        .max_by(|a, b| a.max_deviation().total_cmp(&b.max_deviation()))
        .unwrap();
    println!(
        "{} grid points, max |closed form - simulation| = {:.3e} at (delta, eta, theta) = ({:.4}, {:.4}, {:.4}); tol {ANALYTIC_TOL:e}",
        check.rows.len(),
        check.max_deviation,
        worst.delta,
        worst.eta,
        worst.theta
    );
    Ok(())
}
