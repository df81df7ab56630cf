//! Frequency, runs, block-frequency and serial tests for bitstreams.
//!
//! Statistics and p-values follow the usual SP 800-22 definitions. Each test
//! yields a [`TestReport`] whose `pass` flag is `p_value >= alpha`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{QwalkError, Result};

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_BLOCK_LEN: usize = 128;
pub const DEFAULT_SERIAL_M: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
    /// Set when a prerequisite failed and the test was not run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TestReport {
    fn new(test: &str, statistic: f64, p_value: f64, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            test: test.to_string(),
            statistic,
            p_value,
            pass: p_value >= alpha,
            note: None,
        }
    }
}

fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

fn require_bits(test: &'static str, bits: &[bool], needed: usize) -> Result<()> {
    if bits.len() < needed {
        return Err(QwalkError::TooFewBits {
            test,
            needed,
            got: bits.len(),
        });
    }
    Ok(())
}

/// Frequency test: `|S|/√n` with `S = Σ(2bᵢ − 1)`, `p = erfc(s/√2)`.
pub fn monobit_test(bits: &[bool], alpha: f64) -> Result<TestReport> {
    require_bits("monobit", bits, 100)?;
    let n = bits.len() as f64;
    let s: f64 = bits.iter().map(|&b| if b { 1.0 } else { -1.0 }).sum();
    let stat = s.abs() / n.sqrt();
    Ok(TestReport::new("monobit", stat, erfc(stat / std::f64::consts::SQRT_2), alpha))
}

/// Runs test on the total number of runs. Reported as failed with a note when
/// the ones-proportion already violates `|π − ½| < 2/√n`.
pub fn runs_test(bits: &[bool], alpha: f64) -> Result<TestReport> {
    require_bits("runs", bits, 100)?;
    let n = bits.len() as f64;
    let pi = bits.iter().filter(|&&b| b).count() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        let mut rep = TestReport::new("runs", pi, 0.0, alpha);
        rep.note = Some("not applicable: frequency prerequisite failed".into());
        return Ok(rep);
    }
    let runs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let v = runs as f64;
    let expected = 2.0 * n * pi * (1.0 - pi);
    let p = erfc((v - expected).abs() / (2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi)));
    Ok(TestReport::new("runs", v, p, alpha))
}

/// χ² over per-block ones-proportions, `p = Q(N/2, χ²/2)`.
pub fn block_frequency_test(bits: &[bool], block_len: usize, alpha: f64) -> Result<TestReport> {
    let blocks = bits.len().checked_div(block_len).unwrap_or(0);
    if blocks < 20 {
        return Err(QwalkError::InsufficientBlocks(blocks));
    }
    let m = block_len as f64;
    let chi2: f64 = bits
        .chunks_exact(block_len)
        .map(|block| {
            let pi = block.iter().filter(|&&b| b).count() as f64 / m;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * m;
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    Ok(TestReport::new("block_frequency", chi2, p, alpha))
}

// ψ²_m over overlapping m-bit patterns with wrap-around.
fn psi_sq(bits: &[bool], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len();
    let mut counts = vec![0u64; 1 << m];
    let mut word = 0usize;
    let mask = (1usize << m) - 1;
    for &b in bits.iter().take(m - 1) {
        word = (word << 1) | b as usize;
    }
    for i in 0..n {
        word = ((word << 1) | bits[(i + m - 1) % n] as usize) & mask;
        counts[word] += 1;
    }
    let sum_sq: f64 = counts.iter().map(|&c| (c as f64).powi(2)).sum();
    sum_sq * (1u64 << m) as f64 / n as f64 - n as f64
}

/// Serial test of order `m`. The statistic is `∇ψ²_m`; the reported p-value
/// is the smaller of the `∇ψ²_m` and `∇²ψ²_m` p-values.
pub fn serial_test(bits: &[bool], m: usize, alpha: f64) -> Result<TestReport> {
    let n = bits.len();
    let max_m = if n == 0 { 0 } else { n.ilog2() as usize };
    if m < 2 || m + 2 > max_m {
        return Err(QwalkError::SerialOrderInvalid { m, n });
    }
    let (a, b, c) = (psi_sq(bits, m), psi_sq(bits, m - 1), psi_sq(bits, m - 2));
    let del1 = a - b;
    let del2 = a - 2.0 * b + c;
    let p1 = igamc((1u64 << (m - 1)) as f64 / 2.0, del1 / 2.0);
    let p2 = igamc((1u64 << (m - 2)) as f64 / 2.0, del2 / 2.0);
    Ok(TestReport::new("serial", del1, p1.min(p2), alpha))
}

/// The four tests with default parameters, in a fixed order.
pub fn run_battery(bits: &[bool], alpha: f64) -> Result<Vec<TestReport>> {
    let ((mono, runs), (block, serial)) = rayon::join(
        || rayon::join(|| monobit_test(bits, alpha), || runs_test(bits, alpha)),
        || {
            rayon::join(
                || block_frequency_test(bits, DEFAULT_BLOCK_LEN, alpha),
                || serial_test(bits, DEFAULT_SERIAL_M, alpha),
            )
        },
    );
    Ok(vec![mono?, runs?, block?, serial?])
}

pub const REPORT_CSV_HEADER: &str = "test,statistic,p_value,pass";

pub fn write_report_csv<W: Write>(out: &mut W, reports: &[TestReport]) -> std::io::Result<()> {
    writeln!(out, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{},{:.16e},{:.16e},{}", r.test, r.statistic, r.p_value, r.pass)?;
    }
    Ok(())
}
