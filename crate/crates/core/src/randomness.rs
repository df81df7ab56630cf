//! Intrinsic randomness of coin, position and joint measurements.
//!
//! Shannon-type quantities are in nats; min-entropy is in bits. The analytic
//! one- and two-step formulas are kept here as independent closed forms for
//! cross-checking the simulators.

use serde::{Deserialize, Serialize};

use crate::density::DensityOperator;
use crate::error::{QwalkError, Result};
use crate::state::WalkerState;

/// Entries above `-NEG_TOL` are treated as rounding noise and clamped to zero.
pub const NEG_TOL: f64 = 1e-14;
/// Allowed deviation of a distribution's total from one.
pub const SUM_TOL: f64 = 1e-10;
/// Eigenvalues below `-EIGEN_NEG_TOL` indicate a corrupted density matrix.
pub const EIGEN_NEG_TOL: f64 = 1e-10;
/// Eigenvalues at or below this are numerically zero.
pub const SPECTRAL_CUTOFF: f64 = 1e-12;

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

// A probability of 1 + ε would otherwise yield −ε.
fn entropy_nats(probs: impl IntoIterator<Item = f64>) -> f64 {
    (-probs.into_iter().map(plogp).sum::<f64>()).max(0.0)
}

fn validate(dist: &[f64]) -> Result<()> {
    if dist.is_empty() {
        return Err(QwalkError::InvalidDistribution("empty".into()));
    }
    if let Some(p) = dist.iter().find(|p| !p.is_finite() || **p < -NEG_TOL) {
        return Err(QwalkError::InvalidDistribution(format!("entry {p}")));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(QwalkError::InvalidDistribution(format!("sums to {total}")));
    }
    Ok(())
}

/// `−Σ pᵢ ln pᵢ` with `0 ln 0 = 0`.
pub fn intrinsic_randomness(dist: &[f64]) -> Result<f64> {
    validate(dist)?;
    Ok(entropy_nats(dist.iter().copied()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinEntropy {
    pub h_min_bits: f64,
    pub p_guess: f64,
}

/// Guessing probability `max pᵢ` and `H_min = −log₂ max pᵢ`.
pub fn min_entropy(dist: &[f64]) -> Result<MinEntropy> {
    validate(dist)?;
    let p_guess = dist.iter().copied().fold(0.0, f64::max);
    Ok(MinEntropy {
        h_min_bits: -p_guess.log2() + 0.0,
        p_guess,
    })
}

/// Position probabilities over a contiguous window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionDistribution {
    offset_min: i64,
    probs: Vec<f64>,
}

impl PositionDistribution {
    pub fn new(offset_min: i64, probs: Vec<f64>) -> Result<Self> {
        validate(&probs)?;
        let probs = probs.into_iter().map(|p| p.max(0.0)).collect();
        Ok(Self { offset_min, probs })
    }

    pub fn point_mass(x: i64) -> Self {
        Self {
            offset_min: x,
            probs: vec![1.0],
        }
    }

    /// Uniform over the listed positions, zero elsewhere in their span.
    pub fn uniform_over(positions: &[i64]) -> Result<Self> {
        let lo = *positions
            .iter()
            .min()
            .ok_or_else(|| QwalkError::InvalidDistribution("no positions".into()))?;
        let hi = *positions.iter().max().expect("non-empty");
        let mut probs = vec![0.0; (hi - lo + 1) as usize];
        let w = 1.0 / positions.len() as f64;
        for &x in positions {
            probs[(x - lo) as usize] += w;
        }
        Self::new(lo, probs)
    }

    pub fn offset_min(&self) -> i64 {
        self.offset_min
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_at(&self, x: i64) -> f64 {
        let k = x - self.offset_min;
        if k < 0 {
            return 0.0;
        }
        self.probs.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(k, &p)| (self.offset_min + k as i64, p))
    }

    /// Number of positions with probability above `threshold`.
    pub fn support_size(&self, threshold: f64) -> usize {
        self.probs.iter().filter(|&&p| p > threshold).count()
    }

    pub fn entropy(&self) -> f64 {
        entropy_nats(self.probs.iter().copied())
    }
}

/// Outcome probabilities `(P(↑, x), P(↓, x))` of a joint coin-and-position measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    offset_min: i64,
    probs: Vec<[f64; 2]>,
}

impl JointDistribution {
    pub fn new(offset_min: i64, probs: Vec<[f64; 2]>) -> Self {
        let probs = probs
            .into_iter()
            .map(|[u, d]| [u.max(0.0), d.max(0.0)])
            .collect();
        Self { offset_min, probs }
    }

    pub fn offset_min(&self) -> i64 {
        self.offset_min
    }

    pub fn probs(&self) -> &[[f64; 2]] {
        &self.probs
    }

    pub fn at(&self, x: i64) -> [f64; 2] {
        let k = x - self.offset_min;
        if k < 0 {
            return [0.0; 2];
        }
        self.probs.get(k as usize).copied().unwrap_or([0.0; 2])
    }

    pub fn coin(&self) -> (f64, f64) {
        self.probs
            .iter()
            .fold((0.0, 0.0), |(u, d), p| (u + p[0], d + p[1]))
    }

    pub fn position(&self) -> PositionDistribution {
        PositionDistribution {
            offset_min: self.offset_min,
            probs: self.probs.iter().map(|p| p[0] + p[1]).collect(),
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.probs.iter().flat_map(|p| p.iter().copied()).collect()
    }

    pub fn entropy(&self) -> f64 {
        entropy_nats(self.probs.iter().flat_map(|p| p.iter().copied()))
    }
}

/// Anything whose computational-basis measurement statistics can be read off.
pub trait Measured {
    fn joint_distribution(&self) -> JointDistribution;
}

impl Measured for WalkerState {
    fn joint_distribution(&self) -> JointDistribution {
        JointDistribution::new(
            self.offset_min(),
            self.amps().iter().map(|p| [p.prob_up(), p.prob_down()]).collect(),
        )
    }
}

impl Measured for DensityOperator {
    fn joint_distribution(&self) -> JointDistribution {
        JointDistribution::new(self.offset_min(), self.diagonal())
    }
}

impl Measured for JointDistribution {
    fn joint_distribution(&self) -> JointDistribution {
        self.clone()
    }
}

/// `(P_↑, P_↓)` after tracing out position.
pub fn coin_distribution<M: Measured + ?Sized>(m: &M) -> (f64, f64) {
    m.joint_distribution().coin()
}

pub fn position_distribution<M: Measured + ?Sized>(m: &M) -> PositionDistribution {
    m.joint_distribution().position()
}

pub fn coin_randomness<M: Measured + ?Sized>(m: &M) -> f64 {
    let (u, d) = coin_distribution(m);
    entropy_nats([u, d])
}

pub fn position_randomness<M: Measured + ?Sized>(m: &M) -> f64 {
    position_distribution(m).entropy()
}

pub fn joint_randomness<M: Measured + ?Sized>(m: &M) -> f64 {
    m.joint_distribution().entropy()
}

/// `−tr ρ ln ρ`.
///
/// Eigenvalues in `[−1e-10, 1e-12]` are numerical zeros; the remaining
/// spectrum is renormalised to unit trace before the sum.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    spectral_entropy(&rho.eigenvalues())
}

/// Von Neumann entropy from a precomputed spectrum.
pub fn spectral_entropy(eigenvalues: &[f64]) -> Result<f64> {
    if let Some(&bad) = eigenvalues.iter().find(|&&l| l < -EIGEN_NEG_TOL) {
        return Err(QwalkError::NegativeEigenvalue(bad));
    }
    let kept: Vec<f64> = eigenvalues
        .iter()
        .copied()
        .filter(|&l| l > SPECTRAL_CUTOFF)
        .collect();
    let total: f64 = kept.iter().sum();
    if total <= 0.0 {
        return Ok(0.0);
    }
    Ok(entropy_nats(kept.iter().map(|l| l / total)))
}

/// `QR = R − E`; negative values are reported as-is.
pub fn quantum_randomness(r: f64, e: f64) -> f64 {
    r - e
}

/// Which measurement the `qr` figure of a report refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Coin,
    Position,
    Joint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub r_coin: f64,
    pub r_pos: f64,
    pub r_joint: f64,
    pub e_vn: f64,
    pub qr: f64,
    pub qr_target: Target,
    /// Min-entropy of the joint outcome, in bits.
    pub h_min_bits: f64,
    pub p_guess: f64,
    /// Set when a nominally noiseless run shows non-zero von Neumann entropy,
    /// in which case `qr` is not meaningful.
    pub impure_without_noise: bool,
}

impl RandomnessReport {
    fn build(joint: &JointDistribution, e_vn: f64, noiseless: bool) -> Result<Self> {
        let r_joint = joint.entropy();
        let me = min_entropy(&joint.flat())?;
        let (u, d) = joint.coin();
        Ok(Self {
            r_coin: entropy_nats([u, d]),
            r_pos: joint.position().entropy(),
            r_joint,
            e_vn,
            qr: quantum_randomness(r_joint, e_vn),
            qr_target: Target::Joint,
            h_min_bits: me.h_min_bits,
            p_guess: me.p_guess,
            impure_without_noise: noiseless && e_vn > 0.0,
        })
    }

    /// Report for a pure state; its von Neumann entropy is zero.
    pub fn for_state(state: &WalkerState) -> Result<Self> {
        Self::build(&state.joint_distribution(), 0.0, true)
    }

    pub fn for_density(rho: &DensityOperator, noise_p: f64) -> Result<Self> {
        let e = von_neumann_entropy(rho)?;
        Self::build(&rho.joint_distribution(), e, noise_p == 0.0)
    }
}

/// Closed-form `(r_coin, r_pos)` after one standard step from `(δ, η)` with coin `θ`.
pub fn analytic_step1_randomness(delta: f64, eta: f64, theta: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let (sd, cd) = delta.sin_cos();
    let se = eta.sin();
    let cross = 2.0 * st * ct * sd * cd;
    let p_up = (ct * cd + st * sd).powi(2) - cross * (1.0 - se);
    let p_down = (ct * sd + st * cd).powi(2) - cross * (1.0 + se);
    let r = entropy_nats([p_up, p_down]);
    (r, r)
}

/// Closed-form `(r_coin, r_pos)` after two standard steps.
pub fn analytic_step2_randomness(delta: f64, eta: f64, theta: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let (sd, cd) = delta.sin_cos();
    let se = eta.sin();
    let (s2, c2) = (st * st, ct * ct);
    let (sd2, cd2) = (sd * sd, cd * cd);

    let phase_coin = se * (2.0 * theta).sin() * (2.0 * theta).cos() * sd * cd;
    let p_up = c2 * c2 * cd2 + phase_coin + 2.0 * s2 * c2 * sd2 + s2 * s2 * cd2;
    let p_down = c2 * c2 * sd2 - phase_coin + 2.0 * s2 * c2 * cd2 + s2 * s2 * sd2;

    let phase_pos = 2.0 * se * st * c2 * ct * sd * cd;
    let p_left = c2 * c2 * cd2 + phase_pos + s2 * c2 * sd2;
    let p_mid = s2;
    let p_right = c2 * c2 * sd2 - phase_pos + s2 * c2 * cd2;

    (
        entropy_nats([p_up, p_down]),
        entropy_nats([p_left, p_mid, p_right]),
    )
}
