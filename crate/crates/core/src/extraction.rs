//! Bit commitment and bitstream generation from simulated detections.
//!
//! Detector outcomes are simulated with a seeded ChaCha20 generator. Each
//! round re-prepares the same state and measures it once; round `r` draws
//! from stream `r` of the generator so rounds can run in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bitbuf::{BitBuffer, GenerationMetadata, TOOL_VERSION};
use crate::density::evolve_density;
use crate::error::{QwalkError, Result};
use crate::randomness::{JointDistribution, Measured, PositionDistribution};
use crate::walk::{evolve, WalkSpec};

pub const PRNG_NAME: &str = "chacha20 (rand_chacha), stream = round index";

/// What to emit when the walker is found at the origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    /// Emit nothing for the round.
    #[default]
    Skip,
    /// Emit the single bit `0`.
    AssignZero,
    /// Emit the single bit `1`.
    AssignOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitmentScheme {
    pub t: usize,
    pub n_bits: u32,
    pub zero_policy: ZeroPolicy,
    /// Append one coin bit after the position bits of each round.
    pub include_coin_bit: bool,
    /// Use `↑ → 1, ↓ → 0` instead of the default `↑ → 0, ↓ → 1`.
    #[serde(default)]
    pub invert_coin: bool,
}

impl CommitmentScheme {
    pub fn new(t: usize, zero_policy: ZeroPolicy, include_coin_bit: bool) -> Result<Self> {
        Ok(Self {
            t,
            n_bits: bits_needed(t)?,
            zero_policy,
            include_coin_bit,
            invert_coin: false,
        })
    }

    pub fn inverted_coin(mut self) -> Self {
        self.invert_coin = !self.invert_coin;
        self
    }

    /// Positions that receive an `n_bits` codeword, in codeword order.
    pub fn committed_positions(&self) -> Vec<i64> {
        let t = self.t as i64;
        (-t..=t).filter(|&x| x != 0).collect()
    }
}

/// Smallest `n` with `2ⁿ ≥ 2t`.
pub fn bits_needed(t: usize) -> Result<u32> {
    if t < 1 {
        return Err(QwalkError::StepsTooSmall(t));
    }
    Ok((2 * t).next_power_of_two().trailing_zeros())
}

/// A fixed-width bit string, most significant bit first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Codeword {
    pub value: u64,
    pub width: u32,
}

impl Codeword {
    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).rev().map(move |k| (self.value >> k) & 1 == 1)
    }
}

impl std::fmt::Display for Codeword {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Codeword for a detection at `x`, or `None` when the scheme skips it.
///
/// `−t, …, −1, 1, …, t` map to `0, 1, …, 2t−1` in order; the origin follows
/// the zero policy and is encoded as a one-bit word when assigned.
pub fn commit_position(x: i64, scheme: &CommitmentScheme) -> Result<Option<Codeword>> {
    let t = scheme.t as i64;
    if x < -t || x > t {
        return Err(QwalkError::PositionOutOfRange { x, t: scheme.t });
    }
    let word = match x {
        0 => match scheme.zero_policy {
            ZeroPolicy::Skip => return Ok(None),
            ZeroPolicy::AssignZero => Codeword { value: 0, width: 1 },
            ZeroPolicy::AssignOne => Codeword { value: 1, width: 1 },
        },
        x if x < 0 => Codeword {
            value: (x + t) as u64,
            width: scheme.n_bits,
        },
        x => Codeword {
            value: (x + t - 1) as u64,
            width: scheme.n_bits,
        },
    };
    Ok(Some(word))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoinOutcome {
    Up,
    Down,
}

pub fn commit_coin(outcome: CoinOutcome, inverted: bool) -> bool {
    (outcome == CoinOutcome::Down) != inverted
}

/// Inverse-CDF draw of a position. Zero-probability positions are never returned.
pub fn sample_measurement<R: Rng + ?Sized>(dist: &PositionDistribution, rng: &mut R) -> i64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = None;
    for (x, p) in dist.iter() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_positive = Some(x);
        if u < acc {
            return x;
        }
    }
    // Rounding can leave the cumulative sum a hair below one.
    last_positive.expect("distribution has positive mass")
}

/// Position by inverse CDF, then the coin conditioned on that position.
pub fn sample_joint<R: Rng + ?Sized>(joint: &JointDistribution, rng: &mut R) -> (i64, CoinOutcome) {
    sample_joint_with(joint, &joint.position(), rng)
}

fn sample_joint_with<R: Rng + ?Sized>(
    joint: &JointDistribution,
    positions: &PositionDistribution,
    rng: &mut R,
) -> (i64, CoinOutcome) {
    let x = sample_measurement(positions, rng);
    let [up, down] = joint.at(x);
    let u: f64 = rng.random();
    let coin = if u * (up + down) < up {
        CoinOutcome::Up
    } else {
        CoinOutcome::Down
    };
    (x, coin)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// Measure the simulated walk.
    #[default]
    Walk,
    /// Idealised uniform detector statistics over the committed positions.
    UniformReference,
}

/// Joint distribution with uniform position over the committed sites and a fair coin.
pub fn uniform_reference(scheme: &CommitmentScheme) -> Result<JointDistribution> {
    let positions = scheme.committed_positions();
    let pd = PositionDistribution::uniform_over(&positions)?;
    Ok(JointDistribution::new(
        pd.offset_min(),
        pd.probs().iter().map(|&p| [p / 2.0, p / 2.0]).collect(),
    ))
}

pub fn round_rng(seed: u64, round: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

fn round_bits(
    joint: &JointDistribution,
    positions: &PositionDistribution,
    scheme: &CommitmentScheme,
    seed: u64,
    round: u64,
) -> Result<Vec<bool>> {
    let mut rng = round_rng(seed, round);
    let (x, coin) = if scheme.include_coin_bit {
        sample_joint_with(joint, positions, &mut rng)
    } else {
        (sample_measurement(positions, &mut rng), CoinOutcome::Up)
    };
    let Some(word) = commit_position(x, scheme)? else {
        return Ok(Vec::new());
    };
    let mut bits: Vec<bool> = word.bits().collect();
    if scheme.include_coin_bit {
        bits.push(commit_coin(coin, scheme.invert_coin));
    }
    Ok(bits)
}

/// Bits from `rounds` independent detections of `joint`.
pub fn generate_from_distribution(
    joint: &JointDistribution,
    scheme: &CommitmentScheme,
    rounds: usize,
    seed: u64,
) -> Result<BitBuffer> {
    if rounds < 1 {
        return Err(QwalkError::RoundsTooSmall);
    }
    let total: f64 = joint.flat().iter().sum();
    if total.is_nan() || (total - 1.0).abs() > crate::randomness::SUM_TOL {
        return Err(QwalkError::InvalidDistribution(format!("sums to {total}")));
    }
    let positions = joint.position();
    let chunks: Vec<Vec<bool>> = (0..rounds as u64)
        .into_par_iter()
        .map(|r| round_bits(joint, &positions, scheme, seed, r))
        .collect::<Result<_>>()?;
    Ok(BitBuffer::from_bits(chunks.into_iter().flatten()))
}

pub fn spec_digest(spec: &WalkSpec) -> Result<String> {
    let canonical = serde_json::to_string(spec)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Measurement statistics the generator samples from for `spec` in `mode`.
pub fn detection_distribution(
    spec: &WalkSpec,
    scheme: &CommitmentScheme,
    mode: GenerationMode,
) -> Result<JointDistribution> {
    match mode {
        GenerationMode::UniformReference => uniform_reference(scheme),
        GenerationMode::Walk if spec.noise_p > 0.0 => Ok(evolve_density(spec)?.joint_distribution()),
        GenerationMode::Walk => Ok(evolve(spec)?.joint_distribution()),
    }
}

/// Full generation run with replay metadata attached.
pub fn generate_bits(
    spec: &WalkSpec,
    scheme: &CommitmentScheme,
    rounds: usize,
    seed: u64,
    mode: GenerationMode,
) -> Result<BitBuffer> {
    spec.validate()?;
    if rounds < 1 {
        return Err(QwalkError::RoundsTooSmall);
    }
    let joint = detection_distribution(spec, scheme, mode)?;
    let mut buf = generate_from_distribution(&joint, scheme, rounds, seed)?;
    buf.set_metadata(GenerationMetadata {
        spec: *spec,
        spec_digest: spec_digest(spec)?,
        scheme: *scheme,
        seed,
        rounds,
        bit_count: buf.len(),
        mode,
        tool_version: TOOL_VERSION.to_string(),
        prng: PRNG_NAME.to_string(),
    });
    Ok(buf)
}
