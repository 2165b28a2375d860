use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Basis relabeling stored as an index map: column `i` is sent to row `map[i]`.
/// Indices are 0-based in memory and 1-based in JSON.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let d = map.len();
        let mut seen = vec![false; d];
        for (i, &p) in map.iter().enumerate() {
            if p >= d {
                return Err(Error::InvalidPermutation(format!(
                    "image {p} of {i} out of range 0..{d}"
                )));
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidPermutation(format!("row {p} hit twice")));
            }
        }
        Ok(Self { map })
    }

    /// Parses a 1-based image list such as `[2, 1, 3]`.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let map = images
            .iter()
            .map(|&p| {
                p.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("index 0 in 1-based list".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(map)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            map: (0..d).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|p| p + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &p) in self.map.iter().enumerate() {
            inv[p] = i;
        }
        Self { map: inv }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            map: other.map.iter().map(|&j| self.map[j]).collect(),
        }
    }

    /// Dense `U_pi = sum_i |pi(i)><i|`.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (i, &p) in self.map.iter().enumerate() {
            m[(p, i)] = ONE;
        }
        m
    }

    /// `U_pi v`.
    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; v.len()];
        for (i, &p) in self.map.iter().enumerate() {
            out[p] = v[i];
        }
        out
    }

    /// `U_pi M U_pi^dag` without forming `U_pi`.
    pub fn conjugate_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out[(self.map[i], self.map[j])] = m[(i, j)];
            }
        }
        out
    }

    pub fn conjugate(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::new(self.conjugate_matrix(rho.matrix()))
            .expect("permutation conjugation preserves density-matrix invariants")
    }
}
