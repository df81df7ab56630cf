//! Layering a JSON config under explicit settings, as the CLI does.
//!
//! cargo run --example custom_config

use qwalk::harness::{execute, Command, RunConfig};

fn main() -> qwalk::Result<()> {
    let file = RunConfig::from_json(
        r#"{ "family": ["split_step"], "theta": [0.3], "theta2": 1.2, "steps": "1..=5", "noise-p": [0.05] }"#,
    )?;
    let flags = RunConfig { steps: Some("0,5".parse().unwrap()), ..Default::default() };
    let cfg = flags.overlay(file);

    let mut out = Vec::new();
    execute(Command::NoiseScan, &cfg, None, &mut out, &mut std::io::stderr())?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
