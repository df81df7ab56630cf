//! Mixed-state evolution under the coin bit-flip channel.
//!
//! The density matrix is materialised over the final reachable window so its
//! dimension stays fixed for the whole run. Basis index of `|c⟩⊗|x⟩` is
//! `c · n_pos + (x − offset_min)` with `c = 0` for ↑ and `c = 1` for ↓.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QwalkError, Result};
use crate::state::{make_initial_state, CoinPair, WalkerState};
use crate::walk::{WalkFamily, WalkSpec};

pub const DEFAULT_DENSITY_CAP: usize = 200;
pub const DENSITY_CAP_ENV: &str = "QWALK_DENSITY_CAP";

/// Step cap for density evolution, overridable through `QWALK_DENSITY_CAP`.
pub fn density_cap() -> usize {
    std::env::var(DENSITY_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSITY_CAP)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    offset_min: i64,
    n_pos: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// `|ψ⟩⟨ψ|` embedded in the window `[lo, hi]`.
    ///
    /// # Panics
    /// If the state carries amplitude outside the window.
    pub fn from_pure(state: &WalkerState, window: (i64, i64)) -> Self {
        let v = embed(state, window);
        let n_pos = (window.1 - window.0 + 1) as usize;
        let matrix = DMatrix::from_fn(2 * n_pos, 2 * n_pos, |i, j| v[i] * v[j].conj());
        Self {
            offset_min: window.0,
            n_pos,
            matrix,
        }
    }

    /// Wraps a raw matrix in the coin ⊗ position layout.
    pub fn from_matrix(offset_min: i64, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(QwalkError::Config(format!(
                "density matrix must be square with even dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            offset_min,
            n_pos: matrix.nrows() / 2,
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n_pos
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn offset_min(&self) -> i64 {
        self.offset_min
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn index(&self, coin: usize, x: i64) -> Option<usize> {
        let off = x - self.offset_min;
        (coin < 2 && off >= 0 && (off as usize) < self.n_pos).then(|| coin * self.n_pos + off as usize)
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Diagonal `(P(↑, x), P(↓, x))` per window position, lowest position first.
    pub fn diagonal(&self) -> Vec<[f64; 2]> {
        (0..self.n_pos)
            .map(|k| {
                [
                    self.matrix[(k, k)].re,
                    self.matrix[(self.n_pos + k, self.n_pos + k)].re,
                ]
            })
            .collect()
    }

    /// Eigenvalues in ascending order.
    ///
    /// Basis vectors with exactly zero population are dropped first: for a
    /// positive semidefinite matrix their rows and columns vanish, so they
    /// only contribute zero eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&i| self.matrix[(i, i)].re > 0.0)
            .collect();
        if keep.is_empty() {
            return Vec::new();
        }
        let sub = DMatrix::from_fn(keep.len(), keep.len(), |i, j| self.matrix[(keep[i], keep[j])]);
        let mut ev: Vec<f64> = sub.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn map_columns(&self, family: &WalkFamily, m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let window = (self.offset_min, self.offset_min + self.n_pos as i64 - 1);
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for j in 0..self.dim() {
            let col = m.column(j);
            if col.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            let pairs = (0..self.n_pos)
                .map(|k| CoinPair::new(col[k], col[self.n_pos + k]))
                .collect();
            let stepped = family.step(&WalkerState::from_parts(self.offset_min, pairs, 0))?;
            out.set_column(j, &nalgebra::DVector::from_vec(embed(&stepped, window)));
        }
        Ok(out)
    }

    /// `W ρ W†` for one step of `family`.
    pub fn apply_walk(&self, family: &WalkFamily) -> Result<DensityOperator> {
        let left = self.map_columns(family, &self.matrix)?;
        let both = self.map_columns(family, &left.adjoint())?.adjoint();
        Ok(DensityOperator {
            offset_min: self.offset_min,
            n_pos: self.n_pos,
            matrix: both,
        })
    }

    /// Convex combination `w·self + (1−w)·other` on the same window.
    pub fn mix(&self, other: &DensityOperator, w: f64) -> DensityOperator {
        assert_eq!(self.dim(), other.dim());
        assert_eq!(self.offset_min, other.offset_min);
        DensityOperator {
            offset_min: self.offset_min,
            n_pos: self.n_pos,
            matrix: self.matrix.map(|z| z * w) + other.matrix.map(|z| z * (1.0 - w)),
        }
    }
}

// Dense coin ⊗ position vector of `state` over `window`; amplitude outside
// the window must be exactly zero.
fn embed(state: &WalkerState, window: (i64, i64)) -> Vec<Complex64> {
    let n_pos = (window.1 - window.0 + 1) as usize;
    let mut v = vec![Complex64::new(0.0, 0.0); 2 * n_pos];
    for (x, pair) in state.iter() {
        if x < window.0 || x > window.1 {
            assert!(
                pair.prob() == 0.0,
                "amplitude at x = {x} outside window [{}, {}]",
                window.0,
                window.1
            );
            continue;
        }
        let k = (x - window.0) as usize;
        v[k] = pair.up;
        v[n_pos + k] = pair.down;
    }
    v
}

/// `p (σx⊗1) ρ (σx⊗1) + (1−p) ρ`.
pub fn apply_bitflip_channel(rho: &DensityOperator, p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QwalkError::NoiseOutOfRange(p));
    }
    if p == 0.0 {
        return Ok(rho.clone());
    }
    let n = rho.n_pos;
    let flip = |i: usize| if i < n { i + n } else { i - n };
    let m = &rho.matrix;
    let matrix = DMatrix::from_fn(rho.dim(), rho.dim(), |i, j| {
        m[(flip(i), flip(j))] * p + m[(i, j)] * (1.0 - p)
    });
    Ok(DensityOperator {
        offset_min: rho.offset_min,
        n_pos: n,
        matrix,
    })
}

/// Stepwise noisy evolution: `ρ → W ρ W†` followed by the bit-flip channel.
#[derive(Clone, Debug)]
pub struct DensityEvolution {
    family: WalkFamily,
    noise_p: f64,
    t: usize,
    rho: DensityOperator,
}

impl DensityEvolution {
    /// Prepares `|ψ_in⟩⟨ψ_in|` on the window reachable after `spec.steps` steps.
    pub fn new(spec: &WalkSpec, cap: usize) -> Result<Self> {
        spec.validate()?;
        if spec.steps > cap {
            return Err(QwalkError::DensityCapExceeded {
                steps: spec.steps,
                cap,
            });
        }
        let window = spec.family.reachable_window(spec.steps);
        Ok(Self {
            family: spec.family,
            noise_p: spec.noise_p,
            t: 0,
            rho: DensityOperator::from_pure(&make_initial_state(spec.init), window),
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn advance(&mut self) -> Result<()> {
        let unitary = self.rho.apply_walk(&self.family)?;
        self.rho = apply_bitflip_channel(&unitary, self.noise_p)?;
        self.t += 1;
        Ok(())
    }

    pub fn into_rho(self) -> DensityOperator {
        self.rho
    }
}

pub fn evolve_density(spec: &WalkSpec) -> Result<DensityOperator> {
    evolve_density_with_cap(spec, density_cap())
}

pub fn evolve_density_with_cap(spec: &WalkSpec, cap: usize) -> Result<DensityOperator> {
    let mut evo = DensityEvolution::new(spec, cap)?;
    for _ in 0..spec.steps {
        evo.advance()?;
    }
    Ok(evo.into_rho())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use proptest::prelude::*;

    use super::*;
    use crate::state::InitialState;
    use crate::walk::evolve;

    fn up_projector() -> DensityOperator {
        DensityOperator::from_pure(&make_initial_state(InitialState::default()), (0, 0))
    }

    fn max_entry_diff(a: &DensityOperator, b: &DensityOperator) -> f64 {
        (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn random_pure(seed: u64, n_pos: usize) -> DensityOperator {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut pairs: Vec<CoinPair> = (0..n_pos)
            .map(|_| {
                CoinPair::new(
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                )
            })
            .collect();
        let norm: f64 = pairs.iter().map(CoinPair::prob).sum::<f64>().sqrt();
        for p in pairs.iter_mut() {
            p.up /= norm;
            p.down /= norm;
        }
        let state = WalkerState::from_parts(0, pairs, 0);
        DensityOperator::from_pure(&state, (0, n_pos as i64 - 1))
    }

    #[test]
    fn zero_noise_is_identity() {
        let rho = random_pure(1, 4);
        assert_eq!(apply_bitflip_channel(&rho, 0.0).unwrap(), rho);
    }

    #[test]
    fn half_flip_mixes_coin() {
        let out = apply_bitflip_channel(&up_projector(), 0.5).unwrap();
        let m = out.matrix();
        assert_eq!(m[(0, 0)], Complex64::new(0.5, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(0.5, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(m[(1, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn channel_keeps_trace() {
        for seed in 0..20 {
            let rho = random_pure(seed, 7);
            let out = apply_bitflip_channel(&rho, 0.1).unwrap();
            // Direct oracle: sum of diagonal entries.
            let tr: f64 = (0..out.dim()).map(|i| out.matrix()[(i, i)].re).sum();
            assert!((tr - 1.0).abs() <= 1e-14);
            assert!(out.hermiticity_error() <= 1e-15);
        }
    }

    #[test]
    fn channel_rejects_bad_p() {
        assert!(apply_bitflip_channel(&up_projector(), -0.1).is_err());
        assert!(apply_bitflip_channel(&up_projector(), 1.01).is_err());
    }

    #[test]
    fn channel_is_linear() {
        for seed in 0..10 {
            let (a, b) = (random_pure(seed, 5), random_pure(seed + 100, 5));
            for &w in &[0.0, 0.25, 0.7, 1.0] {
                let lhs = apply_bitflip_channel(&a.mix(&b, w), 0.3).unwrap();
                let rhs = apply_bitflip_channel(&a, 0.3)
                    .unwrap()
                    .mix(&apply_bitflip_channel(&b, 0.3).unwrap(), w);
                assert!(max_entry_diff(&lhs, &rhs) <= 1e-13);
            }
        }
    }

    #[test]
    fn noiseless_density_matches_projector() {
        let families = [
            WalkFamily::Standard { theta: 0.6 },
            WalkFamily::SplitStep { theta1: FRAC_PI_4, theta2: 1.1 },
            WalkFamily::Directed { loop_count: 3 },
        ];
        for family in families {
            for steps in [0, 1, 7, 30] {
                let spec = WalkSpec::new(family, InitialState::new(0.4, 0.9), steps);
                let rho = evolve_density(&spec).unwrap();
                let pure = DensityOperator::from_pure(
                    &evolve(&spec).unwrap(),
                    family.reachable_window(steps),
                );
                assert!(max_entry_diff(&rho, &pure) <= 1e-12, "{family:?} t={steps}");
            }
        }
    }

    #[test]
    fn zero_steps_ignore_noise() {
        let spec = WalkSpec::standard(FRAC_PI_4, InitialState::new(0.3, 0.0), 0).with_noise(0.4);
        let rho = evolve_density(&spec).unwrap();
        let pure = DensityOperator::from_pure(&make_initial_state(spec.init), (0, 0));
        assert_eq!(rho, pure);
    }

    #[test]
    fn one_noisy_step_mixes_coin() {
        // Hand computation: after one step |ψ₁⟩ = (1/√2)(|↑,-1⟩ - i|↓,1⟩); the flip
        // channel at p = ½ moves half of each coin population onto the other coin
        // value at the same site, so the coin marginal is (½, ½) with no coherence.
        let spec = WalkSpec::standard(FRAC_PI_4, InitialState::default(), 1).with_noise(0.5);
        let rho = evolve_density(&spec).unwrap();
        let n = rho.n_pos();
        let mut coin = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (a, row) in coin.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                for k in 0..n {
                    *cell += rho.matrix()[(a * n + k, b * n + k)];
                }
            }
        }
        assert!((coin[0][0].re - 0.5).abs() < 1e-15);
        assert!((coin[1][1].re - 0.5).abs() < 1e-15);
        assert!(coin[0][1].norm() < 1e-15);
        let diag = rho.diagonal();
        assert!((diag[0][0] - 0.25).abs() < 1e-15 && (diag[0][1] - 0.25).abs() < 1e-15);
        assert!((diag[2][0] - 0.25).abs() < 1e-15 && (diag[2][1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let spec = WalkSpec::standard(FRAC_PI_4, InitialState::default(), 11);
        assert!(matches!(
            evolve_density_with_cap(&spec, 10),
            Err(QwalkError::DensityCapExceeded { steps: 11, cap: 10 })
        ));
        assert!(evolve_density_with_cap(&spec, 11).is_ok());
    }

    #[test]
    fn noisy_invariants_hold() {
        let spec = WalkSpec::standard(0.8, InitialState::new(0.5, 0.3), 20).with_noise(0.2);
        let rho = evolve_density(&spec).unwrap();
        assert!((rho.trace().re - 1.0).abs() <= 1e-12);
        assert!(rho.trace().im.abs() <= 1e-12);
        assert!(rho.hermiticity_error() <= 1e-12);
        assert!(rho.eigenvalues().iter().all(|&l| l >= -1e-10));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn trace_preserved(seed in 0u64..1000, p in 0.0f64..=1.0) {
            let rho = random_pure(seed, 6);
            let out = apply_bitflip_channel(&rho, p).unwrap();
            prop_assert!((out.trace().re - 1.0).abs() <= 1e-14);
        }
    }
}
