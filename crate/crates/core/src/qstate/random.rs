//! Seeded generators for states, permutations and unit vectors.
//!
//! Every generator is driven by a ChaCha8 stream seeded from a 64-bit value,
//! so draws are bit-reproducible on a given build. Parallel callers derive
//! independent child seeds with [`derive_seed`] instead of sharing a stream.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use super::permutation::Permutation;
use super::state::{DensityMatrix, PureState};
use crate::error::{Error, Result};

/// 64-bit seed for a generator stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RngSeed(pub u64);

impl From<u64> for RngSeed {
    fn from(s: u64) -> Self {
        Self(s)
    }
}

pub type StateRng = ChaCha8Rng;

pub fn rng_from_seed(seed: impl Into<RngSeed>) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed.into().0)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for the stream identified by `path` under `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector in `C^n` (any `n >= 1`).
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let mut v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-150 {
            for z in &mut v {
                *z /= norm;
            }
            return v;
        }
    }
}

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Permutation {
    let mut map: Vec<usize> = (0..d).collect();
    map.shuffle(rng);
    Permutation::new(map).expect("shuffle yields a bijection")
}

pub fn random_pure_state_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    PureState::normalize(random_unit_vector(rng, d))
}

/// Ginibre construction `G G^dag / tr(G G^dag)` with `G` a `d x rank` Gaussian matrix.
pub fn random_mixed_state_with<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    rank: usize,
) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if rank == 0 || rank > d {
        return Err(Error::InvalidRank { rank, dim: d });
    }
    let g = ComplexMatrix::new(d, rank, (0..d * rank).map(|_| complex_gaussian(rng)).collect())?;
    let ggt = &g * &g.adjoint();
    DensityMatrix::normalized(&ggt)
}

pub fn random_pure_state(d: usize, seed: impl Into<RngSeed>) -> Result<PureState> {
    random_pure_state_with(&mut rng_from_seed(seed), d)
}

pub fn random_mixed_state(d: usize, rank: usize, seed: impl Into<RngSeed>) -> Result<DensityMatrix> {
    random_mixed_state_with(&mut rng_from_seed(seed), d, rank)
}
