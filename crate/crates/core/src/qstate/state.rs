use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Absolute tolerances used when validating states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerances {
    pub normalization: f64,
    pub hermitian: f64,
    pub trace: f64,
    /// Smallest admissible eigenvalue is `-psd`.
    pub psd: f64,
}

impl Default for StateTolerances {
    fn default() -> Self {
        Self {
            normalization: 1e-12,
            hermitian: 1e-12,
            trace: 1e-12,
            psd: 1e-10,
        }
    }
}

/// Eigenvalues below this are clamped to zero before renormalizing.
pub const EIGEN_CLAMP: f64 = 1e-12;

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// Normalized state vector in the reference basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(amplitudes, StateTolerances::default().normalization)
    }

    pub fn with_tolerance(amplitudes: Vec<Complex64>, tol: f64) -> Result<Self> {
        check_dim(amplitudes.len())?;
        for (i, a) in amplitudes.iter().enumerate() {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: 0 });
            }
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalize(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::new(amplitudes)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

/// The uniform superposition with all amplitudes `1/sqrt(d)`.
pub fn maximally_coherent_state(d: usize) -> Result<PureState> {
    check_dim(d)?;
    let a = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    PureState::new(vec![a; d])
}

/// A state given either as a vector or as a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateInput {
    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(psi) => psi.dim(),
            Self::Mixed(rho) => rho.dim(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            Self::Pure(psi) => psi.projector(),
            Self::Mixed(rho) => rho.clone(),
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &StateTolerances::default())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &StateTolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        check_dim(matrix.rows())?;
        for i in 0..matrix.rows() {
            for j in 0..matrix.cols() {
                let z = matrix[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let (row, col, deviation) = matrix.hermitian_defect();
        if deviation > tol.hermitian {
            return Err(Error::NotHermitian {
                row,
                col,
                deviation,
            });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::TraceNotOne { trace });
        }
        let min_eigenvalue = raw_eigenvalues(&matrix.hermitian_part())
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    /// Hermitizes and trace-normalizes `m` before validating it.
    /// Used for channel outputs and post-measurement states.
    pub fn normalized(m: &ComplexMatrix) -> Result<Self> {
        let h = m.hermitian_part();
        let trace = h.trace().re;
        if !(trace > 0.0 && trace.is_finite()) {
            return Err(Error::TraceNotOne { trace });
        }
        Self::new(h.scale_real(1.0 / trace))
    }

    pub fn from_diagonal(probabilities: &[f64]) -> Result<Self> {
        let diag: Vec<Complex64> = probabilities
            .iter()
            .map(|&p| Complex64::new(p, 0.0))
            .collect();
        Self::new(ComplexMatrix::from_diagonal(&diag))
    }

    /// Convex combination `sum_k w_k rho_k`.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let d = parts.first().map_or(0, |(_, r)| r.dim());
        let mut acc = ComplexMatrix::zeros(d, d);
        for (w, rho) in parts {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: rho.dim(),
                });
            }
            acc = &acc + &rho.matrix.scale_real(*w);
        }
        Self::normalized(&acc)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigendecompose(&self) -> Eigendecomposition {
        eigendecompose_hermitian(&self.matrix).expect("validated density matrix is Hermitian")
    }
}

/// Spectral data of a density matrix: eigenvalues sorted descending,
/// clamped below [`EIGEN_CLAMP`] and renormalized to sum 1.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors; `vectors[k]` belongs to `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
}

impl Eigendecomposition {
    /// Number of strictly positive (post-clamp) eigenvalues.
    pub fn rank(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.vectors.first().map_or(0, Vec::len);
        let mut m = ComplexMatrix::zeros(d, d);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            m = &m + &ComplexMatrix::outer(v, v).scale_real(*lambda);
        }
        m
    }
}

fn raw_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    SymmetricEigen::new(h.to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Eigendecomposition of a Hermitian trace-one matrix.
pub fn eigendecompose_hermitian(m: &ComplexMatrix) -> Result<Eigendecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let tol = StateTolerances::default();
    let (row, col, deviation) = m.hermitian_defect();
    if deviation > tol.hermitian {
        return Err(Error::NotHermitian {
            row,
            col,
            deviation,
        });
    }
    let d = m.rows();
    let eig = SymmetricEigen::new(m.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut values: Vec<f64> = order
        .iter()
        .map(|&k| {
            let v = eig.eigenvalues[k];
            if v < EIGEN_CLAMP {
                0.0
            } else {
                v
            }
        })
        .collect();
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        for v in &mut values {
            *v /= total;
        }
    }
    let vectors = order
        .iter()
        .map(|&k| {
            let col = eig.eigenvectors.column(k);
            let mut v: Vec<Complex64> = col.iter().copied().collect();
            // fix the global phase: largest component real positive
            let (_, pivot) = v
                .iter()
                .enumerate()
                .fold((0.0, ZERO), |(best, z), (_, &c)| {
                    if c.norm() > best {
                        (c.norm(), c)
                    } else {
                        (best, z)
                    }
                });
            if pivot.norm() > 0.0 {
                let phase = pivot.conj() / pivot.norm();
                for c in &mut v {
                    *c *= phase;
                }
            }
            v
        })
        .collect();
    Ok(Eigendecomposition { values, vectors })
}
