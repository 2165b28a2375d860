//! Complex linear-algebra substrate: matrices, pure and mixed states,
//! permutations and seeded random generation.

pub mod matrix;
pub mod permutation;
pub mod random;
pub mod state;

pub use matrix::ComplexMatrix;
pub use permutation::Permutation;
pub use random::{derive_seed, random_mixed_state, random_pure_state, rng_from_seed, RngSeed, StateRng};
pub use state::{
    eigendecompose_hermitian, maximally_coherent_state, DensityMatrix, Eigendecomposition,
    PureState, StateInput, StateTolerances,
};
