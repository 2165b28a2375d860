use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{ComplexMatrix, DensityMatrix};

/// Completeness tolerance on `max |sum_n K_n^dag K_n - I|`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Trace-preserving channel given by Kraus operators `{K_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(operators, COMPLETENESS_TOL)
    }

    pub fn with_tolerance(operators: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let first = operators.first().ok_or(Error::EmptyKraus)?;
        let dim = first.rows();
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        for k in &operators {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: if k.rows() != dim { k.rows() } else { k.cols() },
                });
            }
        }
        let residual = completeness_residual(&operators);
        if !(residual <= tol) {
            return Err(Error::IncompleteKraus { residual });
        }
        Ok(Self { dim, operators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `sum_n K_n M K_n^dag` on an arbitrary square matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, k| {
                &acc + &k.conjugate(m)
            })
    }

    /// `Phi(rho) = sum_n K_n rho K_n^dag`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply_channel(self, rho)
    }
}

/// `max |sum_n K_n^dag K_n - I|`.
pub fn completeness_residual(operators: &[ComplexMatrix]) -> f64 {
    let Some(first) = operators.first() else {
        return f64::INFINITY;
    };
    let d = first.cols();
    let sum = operators
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, k| &acc + &(&k.adjoint() * k));
    sum.max_abs_diff(&ComplexMatrix::identity(d))
}

pub fn apply_channel(kraus: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if kraus.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: kraus.dim(),
            found: rho.dim(),
        });
    }
    DensityMatrix::normalized(&kraus.apply_matrix(rho.matrix()))
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

/// Qubit generalized amplitude damping channel with mixing `p` and damping `eps`:
///
/// ```text
/// K0 = sqrt(p)   [[1, 0], [0, sqrt(1-eps)]]   K1 = sqrt(p)   [[0, sqrt(eps)], [0, 0]]
/// K2 = sqrt(1-p) [[sqrt(1-eps), 0], [0, 1]]   K3 = sqrt(1-p) [[0, 0], [sqrt(eps), 0]]
/// ```
pub fn gad_channel(p: f64, eps: f64) -> Result<KrausSet> {
    check_unit("p", p)?;
    check_unit("eps", eps)?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    let (se, sd) = (eps.sqrt(), (1.0 - eps).sqrt());
    let ops = vec![
        ComplexMatrix::from_rows(&[vec![c(sp), c(0.0)], vec![c(0.0), c(sp * sd)]])?,
        ComplexMatrix::from_rows(&[vec![c(0.0), c(sp * se)], vec![c(0.0), c(0.0)]])?,
        ComplexMatrix::from_rows(&[vec![c(sq * sd), c(0.0)], vec![c(0.0), c(sq)]])?,
        ComplexMatrix::from_rows(&[vec![c(0.0), c(0.0)], vec![c(sq * se), c(0.0)]])?,
    ];
    KrausSet::new(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::g_coherence;
    use crate::qstate::{maximally_coherent_state, random_mixed_state};
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_leaves_state_unchanged() {
        let rho = random_mixed_state(3, 2, 8).unwrap();
        let id = KrausSet::new(vec![ComplexMatrix::identity(3)]).unwrap();
        let out = apply_channel(&id, &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) <= 1e-15);
    }

    #[test]
    fn full_dephasing_kills_coherence() {
        let p0 = ComplexMatrix::from_diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let p1 = ComplexMatrix::from_diagonal(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let ch = KrausSet::new(vec![p0, p1]).unwrap();
        let out = apply_channel(&ch, &maximally_coherent_state(2).unwrap().projector()).unwrap();
        assert_abs_diff_eq!(out.get(0, 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.get(1, 1).re, 0.5, epsilon = 1e-15);
        assert_eq!(out.get(0, 1).norm(), 0.0);
    }

    #[test]
    fn amplitude_damping_on_plus() {
        let ch = gad_channel(1.0, 0.36).unwrap();
        let out = apply_channel(&ch, &maximally_coherent_state(2).unwrap().projector()).unwrap();
        assert_abs_diff_eq!(out.get(0, 1).re, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(g_coherence(&out), 0.8, epsilon = 1e-14);
    }

    #[test]
    fn gad_mixed_p_keeps_off_diagonal() {
        let ch = gad_channel(0.5, 0.36).unwrap();
        let out = apply_channel(&ch, &maximally_coherent_state(2).unwrap().projector()).unwrap();
        assert_abs_diff_eq!(out.get(0, 1).re, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn gad_without_damping_is_identity() {
        let ch = gad_channel(0.3, 0.0).unwrap();
        assert!(ch.operators()[1].entries().iter().all(|z| z.norm() == 0.0));
        assert!(ch.operators()[3].entries().iter().all(|z| z.norm() == 0.0));
        let rho = random_mixed_state(2, 2, 1).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) <= 1e-15);
    }

    #[test]
    fn gad_rejects_out_of_range() {
        assert!(gad_channel(1.1, 0.5).is_err());
        assert!(gad_channel(0.5, -0.1).is_err());
        assert!(gad_channel(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn rejects_incomplete_and_mismatched_sets() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(
            KrausSet::new(vec![half]),
            Err(Error::IncompleteKraus { .. })
        ));
        assert_eq!(KrausSet::new(vec![]), Err(Error::EmptyKraus));
        let id = KrausSet::new(vec![ComplexMatrix::identity(2)]).unwrap();
        let rho = random_mixed_state(3, 3, 0).unwrap();
        assert!(apply_channel(&id, &rho).is_err());
    }
}
