//! Pure-state evolution for the standard, split-step and directed walks.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QwalkError, Result};
use crate::state::{coin_matrix, make_initial_state, CoinMatrix, CoinPair, InitialState, WalkerState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WalkFamily {
    /// Coin `C(θ)` followed by the conditional shift (↑ left, ↓ right).
    Standard { theta: f64 },
    /// `C(θ₂)·S₋·C(θ₁)·S₊`, applied right to left.
    SplitStep { theta1: f64, theta2: f64 },
    /// Forward edge plus an aggregated self-loop sector, coin built from `n`.
    Directed { loop_count: u32 },
}

impl WalkFamily {
    pub fn name(&self) -> &'static str {
        match self {
            WalkFamily::Standard { .. } => "standard",
            WalkFamily::SplitStep { .. } => "split_step",
            WalkFamily::Directed { .. } => "directed",
        }
    }

    /// Positions reachable after `steps` steps from the origin.
    pub fn reachable_window(&self, steps: usize) -> (i64, i64) {
        let t = steps as i64;
        match self {
            WalkFamily::Directed { .. } => (0, t),
            _ => (-t, t),
        }
    }

    /// Advances `state` by one step of this family.
    pub fn step(&self, state: &WalkerState) -> Result<WalkerState> {
        match *self {
            WalkFamily::Standard { theta } => Ok(step_dtqw(state, theta)),
            WalkFamily::SplitStep { theta1, theta2 } => Ok(step_ssqw(state, theta1, theta2)),
            WalkFamily::Directed { loop_count } => step_dqw(state, loop_count),
        }
    }

    fn validate(&self) -> Result<()> {
        if let WalkFamily::Directed { loop_count } = *self {
            if loop_count < 2 {
                return Err(QwalkError::InvalidLoopCount(loop_count));
            }
        }
        Ok(())
    }
}

impl Default for WalkFamily {
    fn default() -> Self {
        WalkFamily::Standard { theta: FRAC_PI_4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    #[serde(flatten)]
    pub family: WalkFamily,
    pub init: InitialState,
    pub steps: usize,
    #[serde(default)]
    pub noise_p: f64,
}

impl WalkSpec {
    pub fn new(family: WalkFamily, init: InitialState, steps: usize) -> Self {
        Self {
            family,
            init,
            steps,
            noise_p: 0.0,
        }
    }

    pub fn standard(theta: f64, init: InitialState, steps: usize) -> Self {
        Self::new(WalkFamily::Standard { theta }, init, steps)
    }

    pub fn split_step(theta1: f64, theta2: f64, init: InitialState, steps: usize) -> Self {
        Self::new(WalkFamily::SplitStep { theta1, theta2 }, init, steps)
    }

    pub fn directed(loop_count: u32, init: InitialState, steps: usize) -> Self {
        Self::new(WalkFamily::Directed { loop_count }, init, steps)
    }

    pub fn with_noise(mut self, p: f64) -> Self {
        self.noise_p = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.noise_p) {
            return Err(QwalkError::NoiseOutOfRange(self.noise_p));
        }
        self.family.validate()
    }
}

/// One standard step: coin on every site, then ↑ moves to `x-1` and ↓ to `x+1`.
pub fn step_dtqw(state: &WalkerState, theta: f64) -> WalkerState {
    let coin = coin_matrix(theta);
    let mut out = vec![CoinPair::ZERO; state.amps().len() + 2];
    // out[i] is position offset_min - 1 + i, so site i shifts to out[i] (up) and out[i + 2] (down).
    for (i, pair) in state.amps().iter().enumerate() {
        let c = coin.apply(*pair);
        out[i].up += c.up;
        out[i + 2].down += c.down;
    }
    WalkerState::from_parts(state.offset_min() - 1, out, state.t() + 1)
}

/// One split-step: `S₊`, `C(θ₁)`, `S₋`, `C(θ₂)` in that order.
pub fn step_ssqw(state: &WalkerState, theta1: f64, theta2: f64) -> WalkerState {
    let (c1, c2) = (coin_matrix(theta1), coin_matrix(theta2));
    let n = state.amps().len();

    // After S₊ the window is [min, max + 1].
    let mut plus = vec![CoinPair::ZERO; n + 1];
    for (i, pair) in state.amps().iter().enumerate() {
        plus[i].up += pair.up;
        plus[i + 1].down += pair.down;
    }
    for pair in plus.iter_mut() {
        *pair = c1.apply(*pair);
    }

    // After S₋ the window is [min - 1, max + 1]; plus[i] sits at out[i + 1].
    let mut out = vec![CoinPair::ZERO; n + 2];
    for (i, pair) in plus.iter().enumerate() {
        out[i].up += pair.up;
        out[i + 1].down += pair.down;
    }
    for pair in out.iter_mut() {
        *pair = c2.apply(*pair);
    }
    WalkerState::from_parts(state.offset_min() - 1, out, state.t() + 1)
}

/// Coin of the directed walk: `[[α, β], [β, −α]]`, `α = 1/√n`, `β = √((n−1)/n)`.
pub fn directed_coin(loop_count: u32) -> CoinMatrix {
    let n = f64::from(loop_count);
    let alpha = Complex64::new(1.0 / n.sqrt(), 0.0);
    let beta = Complex64::new(((n - 1.0) / n).sqrt(), 0.0);
    CoinMatrix([[alpha, beta], [beta, -alpha]])
}

/// One directed step: coin, then `|→, x⟩ → |→, x+1⟩` while the loop sector stays put.
pub fn step_dqw(state: &WalkerState, loop_count: u32) -> Result<WalkerState> {
    if loop_count < 2 {
        return Err(QwalkError::InvalidLoopCount(loop_count));
    }
    if let Some((x, _)) = state.iter().find(|(x, p)| *x < 0 && p.prob() > 0.0) {
        return Err(QwalkError::NegativeSupport(x));
    }
    let coin = directed_coin(loop_count);
    let mut out = vec![CoinPair::ZERO; state.amps().len() + 1];
    for (i, pair) in state.amps().iter().enumerate() {
        let c = coin.apply(*pair);
        out[i + 1].up += c.up;
        out[i].down += c.down;
    }
    Ok(WalkerState::from_parts(state.offset_min(), out, state.t() + 1))
}

/// `W^t |ψ_in⟩` for a noiseless spec.
pub fn evolve(spec: &WalkSpec) -> Result<WalkerState> {
    spec.validate()?;
    if spec.noise_p > 0.0 {
        return Err(QwalkError::NoisyPureEvolution(spec.noise_p));
    }
    let mut state = make_initial_state(spec.init);
    for _ in 0..spec.steps {
        state = spec.family.step(&state)?;
    }
    Ok(state)
}

/// Every intermediate state `|ψ_0⟩ … |ψ_steps⟩`.
pub fn evolve_trajectory(spec: &WalkSpec) -> Result<Vec<WalkerState>> {
    spec.validate()?;
    if spec.noise_p > 0.0 {
        return Err(QwalkError::NoisyPureEvolution(spec.noise_p));
    }
    let mut states = Vec::with_capacity(spec.steps + 1);
    states.push(make_initial_state(spec.init));
    for _ in 0..spec.steps {
        let next = spec.family.step(states.last().expect("non-empty"))?;
        states.push(next);
    }
    Ok(states)
}
