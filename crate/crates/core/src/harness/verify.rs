use num_complex::Complex64;

use super::{Category, RoofCheckConfig, Status, TheoremId, Tolerances, VerificationRecord};
use crate::channels::{FsioChannel, KrausSet};
use crate::error::{Error, Result};
use crate::measures::{
    check_strong_monotonicity_g, convex_roof_g, g_coherence, g_coherence_pure, g_formula,
    RoofConfig, BRANCH_CUTOFF,
};
use crate::qstate::{
    derive_seed, maximally_coherent_state, ComplexMatrix, DensityMatrix, PureState, StateInput,
};

/// `S = diag(a_i sqrt(d))`, the incoherent operator with `|psi> = S |psi+>`.
pub fn s_matrix(psi: &PureState) -> ComplexMatrix {
    let scale = (psi.dim() as f64).sqrt();
    let diag: Vec<Complex64> = psi.amplitudes().iter().map(|a| a * scale).collect();
    ComplexMatrix::from_diagonal(&diag)
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn phi_plus_output(kraus: &KrausSet) -> Result<DensityMatrix> {
    let plus = maximally_coherent_state(kraus.dim())?.projector();
    kraus.apply(&plus)
}

fn equality_record(
    theorem: TheoremId,
    dim: usize,
    lhs: f64,
    rhs: f64,
    tol: &Tolerances,
) -> VerificationRecord {
    let status = if tol.equality_holds(lhs, rhs) {
        Status::Pass
    } else {
        Status::Fail
    };
    VerificationRecord {
        theorem,
        dim,
        seed: 0,
        lhs,
        rhs,
        deviation: (lhs - rhs).abs(),
        status,
        category: Category::Suite,
    }
}

fn inequality_record(
    theorem: TheoremId,
    dim: usize,
    lhs: f64,
    rhs: f64,
    status: Status,
) -> VerificationRecord {
    VerificationRecord {
        theorem,
        dim,
        seed: 0,
        lhs,
        rhs,
        deviation: (lhs - rhs).max(0.0),
        status,
        category: Category::Suite,
    }
}

/// Strong monotonicity of G, stored as `sum_n q_n G(sigma_n) <= G(rho)`.
pub fn verify_t1(rho: &DensityMatrix, kraus: &KrausSet, tol: &Tolerances) -> Result<VerificationRecord> {
    let check = check_strong_monotonicity_g(rho, kraus)?;
    let status = if check.rhs <= check.lhs + tol.ineq {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(inequality_record(TheoremId::T1, rho.dim(), check.rhs, check.lhs, status))
}

/// `sum_n prod_i |a_ii^(n)|^(2/d) <= 1`.
pub fn verify_amgm(channel: &FsioChannel, tol: &Tolerances) -> VerificationRecord {
    let lhs = channel.amgm_sum();
    let status = if lhs <= 1.0 + tol.amgm {
        Status::Pass
    } else {
        Status::Fail
    };
    inequality_record(TheoremId::Amgm, channel.dim(), lhs, 1.0, status)
}

/// `G[Phi(|psi><psi|)] = G(psi) G[Phi(psi+)]` for an arbitrary channel.
pub fn verify_t3(psi: &PureState, kraus: &KrausSet, tol: &Tolerances) -> Result<VerificationRecord> {
    check_dims(kraus.dim(), psi.dim())?;
    let lhs = g_formula(&kraus.apply_matrix(psi.projector().matrix()));
    let rhs = g_coherence_pure(psi) * g_coherence(&phi_plus_output(kraus)?);
    Ok(equality_record(TheoremId::T3, psi.dim(), lhs, rhs, tol))
}

/// `G[Phi(rho)] = G(rho) G[Phi(psi+)]` for an arbitrary channel.
pub fn verify_t5(rho: &DensityMatrix, kraus: &KrausSet, tol: &Tolerances) -> Result<VerificationRecord> {
    check_dims(kraus.dim(), rho.dim())?;
    let lhs = g_formula(&kraus.apply_matrix(rho.matrix()));
    let rhs = g_coherence(rho) * g_coherence(&phi_plus_output(kraus)?);
    Ok(equality_record(TheoremId::T5, rho.dim(), lhs, rhs, tol))
}

/// Fails the record when the evolved `G[Phi(psi+)]` disagrees with the
/// closed form built from the diagonal factors.
pub(crate) fn cross_check_closed_form(
    mut record: VerificationRecord,
    channel: &FsioChannel,
    kraus: &KrausSet,
    tol: &Tolerances,
) -> Result<VerificationRecord> {
    let evolved = g_coherence(&phi_plus_output(kraus)?);
    if (evolved - channel.phi_plus_g_closed_form()).abs() > tol.closed_form {
        record.status = Status::Fail;
    }
    Ok(record)
}

fn roof_of(rho: &DensityMatrix, cfg: &RoofConfig) -> Result<(f64, bool)> {
    let r = convex_roof_g(rho, cfg)?;
    Ok((r.value, r.converged))
}

/// Roof config for the `k`-th optimizer call of one check on attempt `attempt`.
fn sub_config(rc: &RoofCheckConfig, k: u64, attempt: u64) -> RoofConfig {
    let restarts = rc.roof.restarts << attempt;
    RoofConfig {
        restarts,
        seed: derive_seed(rc.roof.seed, &[k, attempt]),
        ..rc.roof
    }
}

/// Turns an optimizer failure into an inconclusive record and propagates anything else.
fn roof_guard(
    theorem: TheoremId,
    dim: usize,
    result: Result<VerificationRecord>,
) -> Result<VerificationRecord> {
    match result {
        Err(Error::OptimizerFailure { .. }) => {
            Ok(VerificationRecord::unevaluated(theorem, dim, Status::Inconclusive))
        }
        other => other,
    }
}

/// One-sided check `lhs <= rhs + slack` where `lhs` is a roof upper bound.
///
/// A violation triggers one retry of `lhs` with doubled restarts and fresh
/// seeds; the best value found is kept. Surviving violations within the
/// optimizer-gap band, or from non-converged runs, are inconclusive.
fn roof_inequality<F>(
    theorem: TheoremId,
    dim: usize,
    rc: &RoofCheckConfig,
    slack: f64,
    rhs: (f64, bool),
    lhs_at: F,
) -> Result<VerificationRecord>
where
    F: Fn(u64) -> Result<(f64, bool)>,
{
    let (rhs, rhs_converged) = rhs;
    let (mut lhs, mut lhs_converged) = lhs_at(0)?;
    if lhs - rhs > slack {
        let (retry, retry_converged) = lhs_at(1)?;
        if retry < lhs {
            lhs = retry;
            lhs_converged = retry_converged;
        }
    }
    let violation = lhs - rhs;
    let status = if violation <= slack {
        Status::Pass
    } else if violation <= rc.band() || !(lhs_converged && rhs_converged) {
        Status::Inconclusive
    } else {
        Status::Fail
    };
    Ok(inequality_record(theorem, dim, lhs, rhs, status))
}

/// Slack used for roof inequalities: two optimizer tolerances.
fn roof_slack(rc: &RoofCheckConfig) -> f64 {
    2.0 * rc.roof.tol
}

/// `G~[Phi(|psi><psi|)] = G(psi) G~[Phi(psi+)]`.
pub fn verify_t4(psi: &PureState, kraus: &KrausSet, rc: &RoofCheckConfig) -> Result<VerificationRecord> {
    check_dims(kraus.dim(), psi.dim())?;
    let d = psi.dim();
    let out = kraus.apply(&psi.projector())?;
    let plus_out = phi_plus_output(kraus)?;
    let g_psi = g_coherence_pure(psi);
    let evaluate = |attempt: u64| -> Result<(f64, f64, bool)> {
        let (lhs, c1) = roof_of(&out, &sub_config(rc, 0, attempt))?;
        let (plus, c2) = roof_of(&plus_out, &sub_config(rc, 1, attempt))?;
        Ok((lhs, g_psi * plus, c1 && c2))
    };
    let run = || -> Result<VerificationRecord> {
        let close = |lhs: f64, rhs: f64| (lhs - rhs).abs() <= rc.eq * rhs.abs().max(1.0);
        let (mut lhs, mut rhs, mut converged) = evaluate(0)?;
        if !close(lhs, rhs) {
            let (l2, r2, c2) = evaluate(1)?;
            lhs = lhs.min(l2);
            rhs = rhs.min(r2);
            converged = converged && c2;
        }
        let status = if close(lhs, rhs) {
            Status::Pass
        } else if converged {
            Status::Fail
        } else {
            Status::Inconclusive
        };
        Ok(VerificationRecord {
            theorem: TheoremId::T4,
            dim: d,
            seed: 0,
            lhs,
            rhs,
            deviation: (lhs - rhs).abs(),
            status,
            category: Category::Suite,
        })
    };
    roof_guard(TheoremId::T4, d, run())
}

/// `G~[Phi(rho)] <= G~(rho) G~[Phi(psi+)]`.
pub fn verify_t6(rho: &DensityMatrix, kraus: &KrausSet, rc: &RoofCheckConfig) -> Result<VerificationRecord> {
    check_dims(kraus.dim(), rho.dim())?;
    let d = rho.dim();
    let out = kraus.apply(rho)?;
    let plus_out = phi_plus_output(kraus)?;
    let run = || -> Result<VerificationRecord> {
        let (g_rho, c1) = roof_of(rho, &sub_config(rc, 1, 0))?;
        let (g_plus, c2) = roof_of(&plus_out, &sub_config(rc, 2, 0))?;
        roof_inequality(
            TheoremId::T6,
            d,
            rc,
            roof_slack(rc),
            (g_rho * g_plus, c1 && c2),
            |attempt| roof_of(&out, &sub_config(rc, 0, attempt)),
        )
    };
    roof_guard(TheoremId::T6, d, run())
}

/// Strong monotonicity of the roof: `sum_n q_n G~(sigma_n) <= G~(rho)`.
pub fn verify_c3(rho: &DensityMatrix, kraus: &KrausSet, rc: &RoofCheckConfig) -> Result<VerificationRecord> {
    check_dims(kraus.dim(), rho.dim())?;
    let d = rho.dim();
    let mut branches = Vec::new();
    for k in kraus.operators() {
        let branch = k.conjugate(rho.matrix());
        let q = branch.trace().re;
        if q > BRANCH_CUTOFF {
            branches.push((q, DensityMatrix::normalized(&branch)?));
        }
    }
    let run = || -> Result<VerificationRecord> {
        let rhs = roof_of(rho, &sub_config(rc, 0, 0))?;
        roof_inequality(TheoremId::T2C3, d, rc, roof_slack(rc), rhs, |attempt| {
            let mut total = 0.0;
            let mut converged = true;
            for (n, (q, sigma)) in branches.iter().enumerate() {
                let (v, c) = roof_of(sigma, &sub_config(rc, 1 + n as u64, attempt))?;
                total += q * v;
                converged &= c;
            }
            Ok((total, converged))
        })
    };
    roof_guard(TheoremId::T2C3, d, run())
}

/// Convexity of the roof: `G~(l rho1 + (1-l) rho2) <= l G~(rho1) + (1-l) G~(rho2)`.
pub fn verify_c4(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    lambda: f64,
    rc: &RoofCheckConfig,
) -> Result<VerificationRecord> {
    check_dims(rho1.dim(), rho2.dim())?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
        });
    }
    let d = rho1.dim();
    let mixed = DensityMatrix::mixture(&[(lambda, rho1), (1.0 - lambda, rho2)])?;
    let run = || -> Result<VerificationRecord> {
        let (g1, c1) = roof_of(rho1, &sub_config(rc, 1, 0))?;
        let (g2, c2) = roof_of(rho2, &sub_config(rc, 2, 0))?;
        roof_inequality(
            TheoremId::T2C4,
            d,
            rc,
            roof_slack(rc),
            (lambda * g1 + (1.0 - lambda) * g2, c1 && c2),
            |attempt| roof_of(&mixed, &sub_config(rc, 0, attempt)),
        )
    };
    roof_guard(TheoremId::T2C4, d, run())
}

fn relabel(record: VerificationRecord, theorem: TheoremId) -> VerificationRecord {
    VerificationRecord { theorem, ..record }
}

/// Factorization checks with the generalized amplitude damping channel in
/// place of an FSIO channel. Pure inputs run the pure-state checks, mixed
/// inputs the mixed-state ones; roof checks run when `roof` is given.
pub fn verify_gad(
    input: &StateInput,
    p: f64,
    eps: f64,
    tol: &Tolerances,
    roof: Option<&RoofCheckConfig>,
) -> Result<Vec<VerificationRecord>> {
    if input.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: input.dim(),
        });
    }
    let channel = crate::channels::gad_channel(p, eps)?;
    let mut records = Vec::new();
    match input {
        StateInput::Pure(psi) => {
            records.push(relabel(verify_t3(psi, &channel, tol)?, TheoremId::GadT3));
            if let Some(rc) = roof {
                records.push(relabel(verify_t4(psi, &channel, rc)?, TheoremId::GadT4));
            }
        }
        StateInput::Mixed(rho) => {
            records.push(relabel(verify_t5(rho, &channel, tol)?, TheoremId::GadT5));
            if let Some(rc) = roof {
                records.push(relabel(verify_t6(rho, &channel, rc)?, TheoremId::GadT6));
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{gad_channel, random_fsio};
    use crate::measures::l1_coherence;
    use crate::qstate::{random_mixed_state, random_pure_state, Permutation};
    use approx::assert_abs_diff_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn s_matrix_maps_plus_to_psi() {
        let psi = random_pure_state(4, 2).unwrap();
        let plus = maximally_coherent_state(4).unwrap();
        let out = s_matrix(&psi).mul_vec(plus.amplitudes());
        for (a, b) in out.iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn gio_example_gives_0_64() {
        let psi = PureState::from_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap();
        let ch = FsioChannel::new(
            Permutation::identity(2),
            vec![vec![c(1.0), c(0.8)], vec![c(0.0), c(0.6)]],
        )
        .unwrap();
        let kraus = ch.to_kraus().unwrap();
        let rec = verify_t3(&psi, &kraus, &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(rec.lhs, 0.64, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.rhs, 0.64, epsilon = 1e-12);
        assert!(rec.passed());
    }

    #[test]
    fn plus_state_is_trivial() {
        let kraus = random_fsio(3, 3, 5).unwrap().to_kraus().unwrap();
        let plus = maximally_coherent_state(3).unwrap();
        let rec = verify_t3(&plus, &kraus, &Tolerances::default()).unwrap();
        assert!(rec.deviation <= 1e-14);
    }

    #[test]
    fn zero_amplitude_gives_zero_on_both_sides() {
        let psi = PureState::from_real(&[0.6, 0.0, 0.8]).unwrap();
        let kraus = random_fsio(3, 2, 1).unwrap().to_kraus().unwrap();
        let rec = verify_t3(&psi, &kraus, &Tolerances::default()).unwrap();
        assert_eq!(rec.lhs, 0.0);
        assert_eq!(rec.rhs, 0.0);
        assert!(rec.passed());
    }

    #[test]
    fn t5_on_pure_agrees_with_t3() {
        let psi = random_pure_state(3, 9).unwrap();
        let kraus = random_fsio(3, 4, 9).unwrap().to_kraus().unwrap();
        let t3 = verify_t3(&psi, &kraus, &Tolerances::default()).unwrap();
        let t5 = verify_t5(&psi.projector(), &kraus, &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(t3.lhs, t5.lhs, epsilon = 1e-14);
        assert_abs_diff_eq!(t3.rhs, t5.rhs, epsilon = 1e-14);
    }

    #[test]
    fn t5_rank_three_five_kraus() {
        let tol = Tolerances::default();
        for seed in 0..20 {
            let rho = random_mixed_state(3, 3, seed).unwrap();
            let ch = random_fsio(3, 5, seed).unwrap();
            let kraus = ch.to_kraus().unwrap();
            let rec = verify_t5(&rho, &kraus, &tol).unwrap();
            let rec = cross_check_closed_form(rec, &ch, &kraus, &tol).unwrap();
            assert!(rec.passed(), "{rec:?}");
        }
    }

    #[test]
    fn t5_incoherent_is_zero() {
        let rho = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let kraus = random_fsio(3, 2, 3).unwrap().to_kraus().unwrap();
        let rec = verify_t5(&rho, &kraus, &Tolerances::default()).unwrap();
        assert_eq!((rec.lhs, rec.rhs), (0.0, 0.0));
        assert!(rec.passed());
    }

    #[test]
    fn qubit_t3_matches_l1_factorization() {
        for seed in 0..50 {
            let psi = random_pure_state(2, seed).unwrap();
            let kraus = random_fsio(2, 3, seed).unwrap().to_kraus().unwrap();
            let rec = verify_t3(&psi, &kraus, &Tolerances::default()).unwrap();
            let out = kraus.apply(&psi.projector()).unwrap();
            let plus = kraus
                .apply(&maximally_coherent_state(2).unwrap().projector())
                .unwrap();
            let l1_rhs = l1_coherence(&psi.projector()) * l1_coherence(&plus);
            assert_abs_diff_eq!(rec.lhs, l1_coherence(&out), epsilon = 1e-12);
            assert_abs_diff_eq!(rec.rhs, l1_rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn t1_orientation() {
        let rho = random_mixed_state(3, 2, 4).unwrap();
        let kraus = random_fsio(3, 3, 4).unwrap().to_kraus().unwrap();
        let rec = verify_t1(&rho, &kraus, &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(rec.rhs, g_coherence(&rho), epsilon = 1e-15);
        assert!(rec.lhs <= rec.rhs + 1e-9);
        assert!(rec.passed());
    }

    #[test]
    fn gad_anchor() {
        let psi = PureState::from_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap();
        let recs = verify_gad(&StateInput::Pure(psi), 1.0, 0.36, &Tolerances::default(), None).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].theorem, TheoremId::GadT3);
        assert_abs_diff_eq!(recs[0].lhs, 0.64, epsilon = 1e-12);
        assert!(recs[0].passed());
    }

    #[test]
    fn gad_rejects_qutrits() {
        let rho = random_mixed_state(3, 2, 0).unwrap();
        assert!(verify_gad(&StateInput::Mixed(rho), 0.5, 0.5, &Tolerances::default(), None).is_err());
    }

    #[test]
    fn gad_mixed_records() {
        let rho = random_mixed_state(2, 2, 12).unwrap();
        let recs = verify_gad(&StateInput::Mixed(rho), 0.3, 0.5, &Tolerances::default(), None).unwrap();
        assert_eq!(recs[0].theorem, TheoremId::GadT5);
        assert!(recs[0].passed());
        assert!(gad_channel(0.3, 0.5).is_ok());
    }

    #[test]
    fn t4_single_unitary_reduces_to_t3() {
        let psi = random_pure_state(3, 6).unwrap();
        let ch = random_fsio(3, 1, 6).unwrap();
        let kraus = ch.to_kraus().unwrap();
        let t4 = verify_t4(&psi, &kraus, &RoofCheckConfig::default()).unwrap();
        let t3 = verify_t3(&psi, &kraus, &Tolerances::default()).unwrap();
        assert!(t4.passed());
        assert_abs_diff_eq!(t4.lhs, t3.lhs, epsilon = 1e-10);
        assert_abs_diff_eq!(t4.rhs, t3.rhs, epsilon = 1e-10);
    }

    #[test]
    fn qubit_roof_checks_pass() {
        let rc = RoofCheckConfig::default();
        for seed in 0..3 {
            let psi = random_pure_state(2, seed).unwrap();
            let rho = random_mixed_state(2, 2, seed).unwrap();
            let kraus = random_fsio(2, 2, seed).unwrap().to_kraus().unwrap();
            let rc = rc.with_seed(seed);
            assert!(verify_t4(&psi, &kraus, &rc).unwrap().passed());
            assert_ne!(verify_t6(&rho, &kraus, &rc).unwrap().status, Status::Fail);
            assert_ne!(verify_c3(&rho, &kraus, &rc).unwrap().status, Status::Fail);
            let other = random_mixed_state(2, 2, seed + 100).unwrap();
            assert_ne!(verify_c4(&rho, &other, 0.3, &rc).unwrap().status, Status::Fail);
        }
    }

    #[test]
    fn c4_rejects_bad_lambda() {
        let rho = random_mixed_state(2, 1, 0).unwrap();
        assert!(verify_c4(&rho, &rho, 1.5, &RoofCheckConfig::default()).is_err());
    }
}
