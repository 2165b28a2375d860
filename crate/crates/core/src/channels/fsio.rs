use num_complex::Complex64;
use rand::Rng;

use super::kraus::{KrausSet, COMPLETENESS_TOL};
use crate::error::{Error, Result};
use crate::qstate::random::{random_permutation, random_unit_vector};
use crate::qstate::{rng_from_seed, ComplexMatrix, Permutation, RngSeed};

/// Fully and strictly incoherent channel `K_n = U_pi A_n` with a shared
/// permutation and diagonal `A_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FsioChannel {
    permutation: Permutation,
    /// `factors[n][i] = a_ii^(n)`.
    factors: Vec<Vec<Complex64>>,
}

impl FsioChannel {
    pub fn new(permutation: Permutation, factors: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = permutation.dim();
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if factors.is_empty() {
            return Err(Error::EmptyKraus);
        }
        for a in &factors {
            if a.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.len(),
                });
            }
        }
        for i in 0..d {
            let sum: f64 = factors.iter().map(|a| a[i].norm_sqr()).sum();
            if !((sum - 1.0).abs() <= COMPLETENESS_TOL) {
                return Err(Error::InvalidFactors { index: i, sum });
            }
        }
        Ok(Self {
            permutation,
            factors,
        })
    }

    pub fn dim(&self) -> usize {
        self.permutation.dim()
    }

    pub fn n_kraus(&self) -> usize {
        self.factors.len()
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    pub fn factors(&self) -> &[Vec<Complex64>] {
        &self.factors
    }

    /// `Phi(M) = U_pi (sum_n A_n M A_n^dag) U_pi^dag`, entrywise
    /// `[Phi(M)]_{pi(i) pi(j)} = M_ij sum_n a_i^(n) conj(a_j^(n))`.
    pub fn apply_structured(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut inner = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                inner[(i, j)] = m[(i, j)] * self.overlap(i, j);
            }
        }
        self.permutation.conjugate_matrix(&inner)
    }

    /// `sum_n a_i^(n) conj(a_j^(n))`.
    pub fn overlap(&self, i: usize, j: usize) -> Complex64 {
        self.factors.iter().map(|a| a[i] * a[j].conj()).sum()
    }

    /// Closed form of `G[Phi(|psi+><psi+|)] = prod_{i != j} |sum_n a_i^(n) conj(a_j^(n))|^(1/(d(d-1)))`.
    pub fn phi_plus_g_closed_form(&self) -> f64 {
        let d = self.dim();
        let mut log_sum = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let r = self.overlap(i, j).norm();
                if r < crate::measures::ZERO_MODULUS {
                    return 0.0;
                }
                log_sum += r.ln();
            }
        }
        (log_sum / (d * (d - 1)) as f64).exp()
    }

    /// `sum_n prod_i (|a_ii^(n)|^2)^(1/d)`, bounded by 1 through AM-GM.
    pub fn amgm_sum(&self) -> f64 {
        amgm_sum(&self.factors)
    }

    pub fn to_kraus(&self) -> Result<KrausSet> {
        fsio_to_kraus(self)
    }
}

/// `sum_n prod_i (|a_i^(n)|^2)^(1/d)` for raw diagonal factors.
pub fn amgm_sum(factors: &[Vec<Complex64>]) -> f64 {
    factors
        .iter()
        .map(|a| {
            let d = a.len() as f64;
            a.iter().map(|z| z.norm_sqr().powf(1.0 / d)).product::<f64>()
        })
        .sum()
}

/// `K_n[pi(i), i] = a_ii^(n)`, zero elsewhere.
pub fn fsio_to_kraus(ch: &FsioChannel) -> Result<KrausSet> {
    let d = ch.dim();
    let ops = ch
        .factors
        .iter()
        .map(|a| {
            let mut k = ComplexMatrix::zeros(d, d);
            for (i, &z) in a.iter().enumerate() {
                k[(ch.permutation.image(i), i)] = z;
            }
            k
        })
        .collect();
    KrausSet::new(ops)
}

pub fn random_fsio_with<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    n_kraus: usize,
) -> Result<FsioChannel> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if n_kraus == 0 {
        return Err(Error::EmptyKraus);
    }
    let permutation = random_permutation(rng, d);
    // column i of the factor table is a Haar unit vector in C^n_kraus
    let columns: Vec<Vec<Complex64>> = (0..d).map(|_| random_unit_vector(rng, n_kraus)).collect();
    let factors = (0..n_kraus)
        .map(|n| columns.iter().map(|c| c[n]).collect())
        .collect();
    FsioChannel::new(permutation, factors)
}

/// Uniform permutation with Haar-random factor columns.
pub fn random_fsio(d: usize, n_kraus: usize, seed: impl Into<RngSeed>) -> Result<FsioChannel> {
    random_fsio_with(&mut rng_from_seed(seed), d, n_kraus)
}

/// Orthonormalizes `count` Gaussian vectors in `C^n` (requires `count <= n`).
fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = random_unit_vector(rng, n);
        for u in &out {
            let ip: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= ip * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|z| *z /= norm);
            out.push(v);
        }
    }
    out
}

/// Fully incoherent but not strictly incoherent channel: every operator maps
/// column `i` to the shared row `f(i)`, where `f` is not injective.
///
/// Columns that share a target row receive orthonormal coefficient vectors,
/// which is what completeness requires. The Kraus count is raised to the size
/// of the largest shared group when needed.
pub fn random_fio_probe_with<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    n_kraus: usize,
) -> Result<KrausSet> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let map: Vec<usize> = loop {
        let f: Vec<usize> = (0..d).map(|_| rng.random_range(0..d)).collect();
        let mut seen = vec![false; d];
        if f.iter().any(|&r| std::mem::replace(&mut seen[r], true)) {
            break f;
        }
    };
    let group_size = |row: usize| map.iter().filter(|&&r| r == row).count();
    let n = n_kraus.max((0..d).map(group_size).max().unwrap_or(1));

    let mut coeffs: Vec<Vec<Complex64>> = vec![Vec::new(); d];
    for row in 0..d {
        let cols: Vec<usize> = (0..d).filter(|&c| map[c] == row).collect();
        for (c, v) in cols.iter().zip(random_orthonormal(rng, n, cols.len())) {
            coeffs[*c] = v;
        }
    }
    let ops = (0..n)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(d, d);
            for (c, &row) in map.iter().enumerate() {
                m[(row, c)] = coeffs[c][k];
            }
            m
        })
        .collect();
    KrausSet::new(ops)
}

pub fn random_fio_probe(d: usize, n_kraus: usize, seed: impl Into<RngSeed>) -> Result<KrausSet> {
    random_fio_probe_with(&mut rng_from_seed(seed), d, n_kraus)
}
