//! Coherence quantifiers: l1-norm coherence, the G-coherence (d times the
//! geometric mean of the off-diagonal moduli) and its convex roof.

pub mod roof;
mod simplex;

use num_complex::Complex64;

use crate::channels::KrausSet;
use crate::error::{Error, Result};
use crate::qstate::{ComplexMatrix, DensityMatrix, PureState};

pub use roof::{convex_roof_g, RoofConfig, RoofResult};

/// Moduli below this are treated as exact zeros by the G formulas.
pub const ZERO_MODULUS: f64 = 1e-300;

/// Channel branches with probability at or below this are skipped in
/// monotonicity sums.
pub const BRANCH_CUTOFF: f64 = 1e-14;

/// Slack allowed in `sum_n q_n G(sigma_n) <= G(rho)`.
pub const MONOTONICITY_SLACK: f64 = 1e-9;

/// `sum_{i != j} |rho_ij|`.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let d = rho.dim();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    total
}

/// G-coherence of a density matrix.
pub fn g_coherence(rho: &DensityMatrix) -> f64 {
    g_formula(rho.matrix())
}

/// Evaluates `d * prod_{i != j} |m_ij|^(1/(d(d-1)))` on any square matrix,
/// normalized or not. Degree-one homogeneous: `g_formula(s m) = s g_formula(m)`.
pub fn g_formula(m: &ComplexMatrix) -> f64 {
    assert!(m.is_square() && m.rows() >= 2, "G needs a square matrix with d >= 2");
    let d = m.rows();
    let mut log_sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let r = m[(i, j)].norm();
            if r < ZERO_MODULUS {
                return 0.0;
            }
            log_sum += r.ln();
        }
    }
    d as f64 * (log_sum / (d * (d - 1)) as f64).exp()
}

/// `d * prod_i |v_i|^(2/d)` for a possibly unnormalized vector `v`.
///
/// For a unit vector this is the G-coherence of `|v><v|`; for `v = sqrt(p) psi`
/// it is `p G(psi)`, which is the form the roof optimizer works with.
pub fn g_homogeneous(v: &[Complex64]) -> f64 {
    let d = v.len();
    let mut log_sum = 0.0;
    for z in v {
        let r = z.norm();
        if r < ZERO_MODULUS {
            return 0.0;
        }
        log_sum += r.ln();
    }
    d as f64 * (2.0 * log_sum / d as f64).exp()
}

/// Closed form of the G-coherence on a pure state.
pub fn g_coherence_pure(psi: &PureState) -> f64 {
    g_homogeneous(psi.amplitudes())
}

/// Pure-state decomposition `{p_k, psi_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub const WEIGHT_TOL: f64 = 1e-10;

    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let d = members.first().map(|(_, s)| s.dim()).ok_or(Error::InvalidParameter {
            name: "ensemble size",
            value: 0.0,
        })?;
        for (p, s) in &members {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.dim(),
                });
            }
            if !(-Self::WEIGHT_TOL..=1.0 + Self::WEIGHT_TOL).contains(p) {
                return Err(Error::InvalidParameter {
                    name: "ensemble weight",
                    value: *p,
                });
            }
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > Self::WEIGHT_TOL {
            return Err(Error::InvalidParameter {
                name: "ensemble total weight",
                value: total,
            });
        }
        Ok(Self { members })
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `sum_k p_k |psi_k><psi_k|`.
    pub fn mixture(&self) -> ComplexMatrix {
        let d = self.dim();
        self.members
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, (p, psi)| {
                let a = psi.amplitudes();
                &acc + &ComplexMatrix::outer(a, a).scale_real(*p)
            })
    }

    /// Whether the mixture matches `rho` entrywise within `tol`.
    pub fn reproduces(&self, rho: &DensityMatrix, tol: f64) -> bool {
        self.dim() == rho.dim() && self.mixture().max_abs_diff(rho.matrix()) <= tol
    }
}

/// `sum_k p_k G(psi_k)`.
pub fn average_g(ensemble: &Ensemble) -> f64 {
    ensemble
        .members()
        .iter()
        .map(|(p, psi)| p * g_coherence_pure(psi))
        .sum()
}

/// Outcome of a strong-monotonicity check `G(rho) >= sum_n q_n G(sigma_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityCheck {
    /// `G(rho)`.
    pub lhs: f64,
    /// `sum_n q_n G(K_n rho K_n^dag / q_n)` over branches with `q_n > 1e-14`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_strong_monotonicity_g(
    rho: &DensityMatrix,
    kraus: &KrausSet,
) -> Result<MonotonicityCheck> {
    if kraus.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: kraus.dim(),
            found: rho.dim(),
        });
    }
    let lhs = g_coherence(rho);
    let mut rhs = 0.0;
    for k in kraus.operators() {
        let branch = k.conjugate(rho.matrix());
        let q = branch.trace().re;
        if q > BRANCH_CUTOFF {
            rhs += q * g_formula(&branch.scale_real(1.0 / q));
        }
    }
    Ok(MonotonicityCheck {
        lhs,
        rhs,
        holds: rhs <= lhs + MONOTONICITY_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{fsio_to_kraus, random_fsio};
    use crate::qstate::{maximally_coherent_state, random_mixed_state, random_pure_state, Permutation};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn skewed_qubit() -> PureState {
        PureState::from_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_coherence(&DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap()), 0.0);
        let plus = maximally_coherent_state(2).unwrap().projector();
        assert_abs_diff_eq!(l1_coherence(&plus), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l1_coherence(&skewed_qubit().projector()), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn g_examples() {
        for d in 2..=8 {
            let psi = maximally_coherent_state(d).unwrap();
            assert_abs_diff_eq!(g_coherence(&psi.projector()), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(g_coherence_pure(&psi), 1.0, epsilon = 1e-12);
        }
        assert_eq!(g_coherence(&DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap()), 0.0);
        assert_abs_diff_eq!(g_coherence(&skewed_qubit().projector()), 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(g_coherence_pure(&skewed_qubit()), 0.8, epsilon = 1e-14);
        assert_eq!(g_coherence_pure(&PureState::from_real(&[1.0, 0.0, 0.0]).unwrap()), 0.0);
    }

    #[test]
    fn qubit_g_equals_l1() {
        for seed in 0..1000u64 {
            let rho = random_mixed_state(2, 1 + (seed % 2) as usize, seed).unwrap();
            assert_abs_diff_eq!(g_coherence(&rho), l1_coherence(&rho), epsilon = 1e-12);
        }
    }

    #[test]
    fn g_is_zero_with_single_vanishing_coherence() {
        // full coherence only: one zero off-diagonal pair kills G but not l1
        let psi = PureState::from_real(&[0.6, 0.8, 0.0]).unwrap();
        let rho = psi.projector();
        assert_eq!(g_coherence(&rho), 0.0);
        assert!(l1_coherence(&rho) > 0.9);
    }

    #[test]
    fn log_domain_survives_tiny_entries() {
        // d = 12 product of 132 moduli ~1e-4 underflows nothing in log form
        let d = 12;
        let mut amps = vec![Complex64::new(1e-4, 0.0); d];
        amps[0] = Complex64::new(1.0, 0.0);
        let psi = PureState::normalize(amps).unwrap();
        let direct: f64 = d as f64
            * psi
                .amplitudes()
                .iter()
                .map(|a| a.norm().powf(2.0 / d as f64))
                .product::<f64>();
        assert_abs_diff_eq!(g_coherence(&psi.projector()), direct, epsilon = 1e-14);
    }

    #[test]
    fn average_g_examples() {
        let psi = skewed_qubit();
        let single = Ensemble::new(vec![(1.0, psi.clone())]).unwrap();
        assert_abs_diff_eq!(average_g(&single), 0.8, epsilon = 1e-14);

        let basis = Ensemble::new(vec![
            (0.5, PureState::from_real(&[1.0, 0.0]).unwrap()),
            (0.5, PureState::from_real(&[0.0, 1.0]).unwrap()),
        ])
        .unwrap();
        assert_eq!(average_g(&basis), 0.0);

        let plus = maximally_coherent_state(2).unwrap();
        let twice = Ensemble::new(vec![(0.5, plus.clone()), (0.5, plus)]).unwrap();
        assert_abs_diff_eq!(average_g(&twice), 1.0, epsilon = 1e-14);
        assert!(basis.reproduces(&DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap(), 1e-12));
    }

    #[test]
    fn ensemble_rejects_bad_weights() {
        let psi = skewed_qubit();
        assert!(Ensemble::new(vec![(0.7, psi.clone())]).is_err());
        assert!(Ensemble::new(vec![(1.5, psi.clone()), (-0.5, psi)]).is_err());
        assert!(Ensemble::new(vec![]).is_err());
    }

    #[test]
    fn identity_channel_is_tight() {
        let rho = random_mixed_state(3, 3, 1).unwrap();
        let id = KrausSet::new(vec![ComplexMatrix::identity(3)]).unwrap();
        let check = check_strong_monotonicity_g(&rho, &id).unwrap();
        assert_abs_diff_eq!(check.lhs, check.rhs, epsilon = 1e-14);
        assert!(check.holds);
    }

    #[test]
    fn monotonicity_under_random_fsio() {
        let ch = fsio_to_kraus(&random_fsio(3, 4, 77).unwrap()).unwrap();
        for seed in 0..1000u64 {
            let rho = random_mixed_state(3, 1 + (seed % 3) as usize, seed).unwrap();
            assert!(check_strong_monotonicity_g(&rho, &ch).unwrap().holds);
        }
    }

    #[test]
    fn monotonicity_rejects_dimension_mismatch() {
        let rho = random_mixed_state(2, 2, 1).unwrap();
        let id = KrausSet::new(vec![ComplexMatrix::identity(3)]).unwrap();
        assert!(check_strong_monotonicity_g(&rho, &id).is_err());
    }

    fn arb_state() -> impl Strategy<Value = DensityMatrix> {
        (2usize..=6, any::<u64>())
            .prop_flat_map(|(d, seed)| (Just(d), 1..=d, Just(seed)))
            .prop_map(|(d, r, seed)| random_mixed_state(d, r, seed).unwrap())
    }

    proptest! {
        #[test]
        fn g_permutation_invariant(rho in arb_state(), pseed in any::<u64>()) {
            let mut rng = crate::qstate::rng_from_seed(pseed);
            let p: Permutation = crate::qstate::random::random_permutation(&mut rng, rho.dim());
            let g0 = g_coherence(&rho);
            let g1 = g_coherence(&p.conjugate(&rho));
            prop_assert!((g0 - g1).abs() <= 1e-12);
        }

        #[test]
        fn g_scaling_homogeneous(rho in arb_state(), s in 1e-3f64..1e3) {
            let g = g_coherence(&rho);
            let gs = g_formula(&rho.matrix().scale_real(s));
            prop_assert!((gs - s * g).abs() <= 1e-12 * (s * g).max(1e-300));
        }

        #[test]
        fn pure_closed_form_matches_matrix_form(d in 2usize..=8, seed in any::<u64>()) {
            let psi = random_pure_state(d, seed).unwrap();
            let a = g_coherence_pure(&psi);
            let b = g_coherence(&psi.projector());
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
