//! Walker state representation and the single-qubit coin.
//!
//! Tensor ordering is coin ⊗ position throughout the crate. A [`WalkerState`]
//! stores a dense window of `(up, down)` amplitude pairs starting at
//! `offset_min`; positions outside the window have zero amplitude.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Amplitude = Complex64;

const ZERO: Amplitude = Complex64::new(0.0, 0.0);

/// Coin-space amplitudes at one lattice site.
///
/// For the directed walk the `up` slot holds the forward edge `|→⟩` and the
/// `down` slot holds the aggregated self-loop sector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CoinPair {
    pub up: Amplitude,
    pub down: Amplitude,
}

impl CoinPair {
    pub const ZERO: CoinPair = CoinPair { up: ZERO, down: ZERO };

    pub fn new(up: Amplitude, down: Amplitude) -> Self {
        Self { up, down }
    }

    pub fn prob_up(&self) -> f64 {
        self.up.norm_sqr()
    }

    pub fn prob_down(&self) -> f64 {
        self.down.norm_sqr()
    }

    pub fn prob(&self) -> f64 {
        self.prob_up() + self.prob_down()
    }
}

/// A 2×2 complex matrix acting on the coin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinMatrix(pub [[Complex64; 2]; 2]);

impl CoinMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        CoinMatrix([[one, ZERO], [ZERO, one]])
    }

    #[inline]
    pub fn apply(&self, v: CoinPair) -> CoinPair {
        let m = &self.0;
        CoinPair {
            up: m[0][0] * v.up + m[0][1] * v.down,
            down: m[1][0] * v.up + m[1][1] * v.down,
        }
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        CoinMatrix([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    /// Largest entrywise deviation of `C·C†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let prod = *self * self.adjoint();
        let id = CoinMatrix::identity();
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((prod.0[i][j] - id.0[i][j]).norm());
            }
        }
        worst
    }
}

impl Mul for CoinMatrix {
    type Output = CoinMatrix;

    fn mul(self, rhs: CoinMatrix) -> CoinMatrix {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        CoinMatrix(out)
    }
}

/// The walk coin `[[cos θ, −i sin θ], [−i sin θ, cos θ]]`.
pub fn coin_matrix(theta: f64) -> CoinMatrix {
    let (s, c) = theta.sin_cos();
    let off = Complex64::new(0.0, -s);
    let diag = Complex64::new(c, 0.0);
    CoinMatrix([[diag, off], [off, diag]])
}

/// Initial coin parameters: `cos δ |↑⟩ + e^{iη} sin δ |↓⟩` at the origin.
///
/// Angles are taken as given; no reduction modulo 2π is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub delta: f64,
    pub eta: f64,
}

impl InitialState {
    pub fn new(delta: f64, eta: f64) -> Self {
        Self { delta, eta }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkerState {
    offset_min: i64,
    amps: Vec<CoinPair>,
    t: usize,
}

impl WalkerState {
    /// Builds a state from a dense window. An empty `amps` is normalised to a
    /// single zero site so the window is never empty.
    pub fn from_parts(offset_min: i64, mut amps: Vec<CoinPair>, t: usize) -> Self {
        if amps.is_empty() {
            amps.push(CoinPair::ZERO);
        }
        Self { offset_min, amps, t }
    }

    pub fn offset_min(&self) -> i64 {
        self.offset_min
    }

    pub fn offset_max(&self) -> i64 {
        self.offset_min + self.amps.len() as i64 - 1
    }

    pub fn amps(&self) -> &[CoinPair] {
        &self.amps
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn at(&self, x: i64) -> CoinPair {
        if x < self.offset_min || x > self.offset_max() {
            return CoinPair::ZERO;
        }
        self.amps[(x - self.offset_min) as usize]
    }

    /// Iterates `(position, amplitudes)` across the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, CoinPair)> + '_ {
        let base = self.offset_min;
        self.amps
            .iter()
            .enumerate()
            .map(move |(i, pair)| (base + i as i64, *pair))
    }

    /// Smallest and largest positions whose probability exceeds `threshold`.
    pub fn support(&self, threshold: f64) -> Option<(i64, i64)> {
        let mut occupied = self.iter().filter(|(_, p)| p.prob() > threshold).map(|(x, _)| x);
        let first = occupied.next()?;
        let last = occupied.last().unwrap_or(first);
        Some((first, last))
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|p| {
            p.up.re.is_finite() && p.up.im.is_finite() && p.down.re.is_finite() && p.down.im.is_finite()
        })
    }
}

pub fn make_initial_state(init: InitialState) -> WalkerState {
    let (s, c) = init.delta.sin_cos();
    let phase = Complex64::from_polar(1.0, init.eta);
    let pair = CoinPair::new(Complex64::new(c, 0.0), phase * s);
    WalkerState::from_parts(0, vec![pair], 0)
}

/// Total probability `Σ_x |a_x|² + |b_x|²`.
pub fn norm(state: &WalkerState) -> f64 {
    state.amps.iter().map(CoinPair::prob).sum()
}
