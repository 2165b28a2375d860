use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::verify::{self, cross_check_closed_form};
use super::{RoofCheckConfig, Status, TheoremId, Tolerances, VerificationRecord};
use crate::channels::fixtures::fio_example;
use crate::channels::fsio::{random_fio_probe_with, random_fsio_with};
use crate::channels::KrausSet;
use crate::error::{Error, Result};
use crate::measures::RoofConfig;
use crate::qstate::random::{random_mixed_state_with, random_pure_state_with};
use crate::qstate::{derive_seed, rng_from_seed, DensityMatrix, StateRng};

/// Roof-based checks (T4, T6, C3, C4) inside a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoofChecks {
    pub enabled: bool,
    pub restarts: usize,
    pub tol: f64,
    pub max_evals: usize,
    /// Largest dimension that receives roof checks.
    pub max_dim: usize,
    /// Largest rank of any state handed to the optimizer.
    pub max_rank: usize,
    pub eq_tol: f64,
    pub band_factor: f64,
}

impl Default for RoofChecks {
    fn default() -> Self {
        let roof = RoofConfig::default();
        let check = RoofCheckConfig::default();
        Self {
            enabled: false,
            restarts: roof.restarts,
            tol: roof.tol,
            max_evals: roof.max_evals,
            max_dim: 3,
            max_rank: 2,
            eq_tol: check.eq,
            band_factor: check.band_factor,
        }
    }
}

impl RoofChecks {
    pub fn check_config(&self, seed: u64) -> RoofCheckConfig {
        RoofCheckConfig {
            roof: RoofConfig {
                restarts: self.restarts,
                tol: self.tol,
                seed,
                max_evals: self.max_evals,
            },
            eq: self.eq_tol,
            band_factor: self.band_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub n_kraus_min: usize,
    pub n_kraus_max: usize,
    pub eq_tol: f64,
    pub eq_abs_floor: f64,
    pub ineq_tol: f64,
    pub roof: RoofChecks,
    /// Also run T3/T5 on FIO channels that are not FSIO.
    pub probe_fio: bool,
    pub master_seed: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        let tol = Tolerances::default();
        Self {
            dims: vec![2, 3, 4, 5],
            trials: 500,
            n_kraus_min: 1,
            n_kraus_max: 6,
            eq_tol: tol.eq_rel,
            eq_abs_floor: tol.eq_abs_floor,
            ineq_tol: tol.ineq,
            roof: RoofChecks::default(),
            probe_fio: false,
            master_seed: 0,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(&d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(d));
        }
        if self.n_kraus_min == 0 || self.n_kraus_min > self.n_kraus_max {
            return Err(Error::InvalidParameter {
                name: "n_kraus_min",
                value: self.n_kraus_min as f64,
            });
        }
        positive("eq_tol", self.eq_tol)?;
        positive("eq_abs_floor", self.eq_abs_floor)?;
        positive("ineq_tol", self.ineq_tol)?;
        if self.roof.enabled {
            positive("roof.tol", self.roof.tol)?;
            positive("roof.eq_tol", self.roof.eq_tol)?;
            positive("roof.band_factor", self.roof.band_factor)?;
            if self.roof.max_rank == 0 {
                return Err(Error::InvalidParameter {
                    name: "roof.max_rank",
                    value: 0.0,
                });
            }
            if self.roof.restarts == 0 {
                return Err(Error::InvalidParameter {
                    name: "roof.restarts",
                    value: 0.0,
                });
            }
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            eq_rel: self.eq_tol,
            eq_abs_floor: self.eq_abs_floor,
            ineq: self.ineq_tol,
            ..Tolerances::default()
        }
    }

    pub fn trial_seed(&self, dim: usize, trial: usize) -> u64 {
        derive_seed(self.master_seed, &[dim as u64, trial as u64])
    }
}

/// Runs every configured trial. Trials execute in parallel; the returned
/// records are ordered by dimension, then trial index, then check.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<VerificationRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .dims
        .iter()
        .flat_map(|&d| (0..cfg.trials).map(move |t| (d, t)))
        .collect();
    let per_trial: Vec<Vec<VerificationRecord>> = jobs
        .par_iter()
        .map(|&(d, t)| run_trial(cfg, d, t))
        .collect();
    Ok(per_trial.into_iter().flatten().collect())
}

fn push(
    out: &mut Vec<VerificationRecord>,
    theorem: TheoremId,
    dim: usize,
    on_error: Status,
    result: Result<VerificationRecord>,
) {
    out.push(result.unwrap_or_else(|_| VerificationRecord::unevaluated(theorem, dim, on_error)));
}

fn run_trial(cfg: &CampaignConfig, d: usize, trial: usize) -> Vec<VerificationRecord> {
    let seed = cfg.trial_seed(d, trial);
    let tol = cfg.tolerances();
    let mut out = Vec::new();
    let mut rng = rng_from_seed(seed);

    let drawn = (|| -> Result<_> {
        let rank = rng.random_range(1..=d);
        let rho = random_mixed_state_with(&mut rng, d, rank)?;
        let psi = random_pure_state_with(&mut rng, d)?;
        let n = rng.random_range(cfg.n_kraus_min..=cfg.n_kraus_max);
        let channel = random_fsio_with(&mut rng, d, n)?;
        let kraus = channel.to_kraus()?;
        Ok((rho, psi, channel, kraus))
    })();
    match drawn {
        Ok((rho, psi, channel, kraus)) => {
            push(&mut out, TheoremId::T1, d, Status::Fail, verify::verify_t1(&rho, &kraus, &tol));
            out.push(verify::verify_amgm(&channel, &tol));
            let t3 = verify::verify_t3(&psi, &kraus, &tol)
                .and_then(|r| cross_check_closed_form(r, &channel, &kraus, &tol));
            push(&mut out, TheoremId::T3, d, Status::Fail, t3);
            let t5 = verify::verify_t5(&rho, &kraus, &tol)
                .and_then(|r| cross_check_closed_form(r, &channel, &kraus, &tol));
            push(&mut out, TheoremId::T5, d, Status::Fail, t5);
        }
        Err(_) => {
            for theorem in [TheoremId::T1, TheoremId::Amgm, TheoremId::T3, TheoremId::T5] {
                out.push(VerificationRecord::unevaluated(theorem, d, Status::Fail));
            }
        }
    }

    if cfg.roof.enabled && d <= cfg.roof.max_dim {
        roof_trial(cfg, d, seed, &mut out);
    }
    if cfg.probe_fio {
        probe_trial(cfg, d, trial, seed, &tol, &mut out);
    }
    for r in &mut out {
        r.seed = seed;
    }
    out
}

/// Draws a state of rank at most `max_rank` (capped by `d`).
fn bounded_state(rng: &mut StateRng, d: usize, max_rank: usize) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=max_rank.min(d));
    random_mixed_state_with(rng, d, rank)
}

fn roof_trial(cfg: &CampaignConfig, d: usize, seed: u64, out: &mut Vec<VerificationRecord>) {
    let mut rng = rng_from_seed(derive_seed(seed, &[1]));
    let rc = cfg.roof.check_config(derive_seed(seed, &[2]));
    let max_rank = cfg.roof.max_rank;
    let n_max = cfg.n_kraus_max;

    // T4: the outputs have rank at most the Kraus count.
    let t4 = (|| {
        let psi = random_pure_state_with(&mut rng, d)?;
        let n = rng.random_range(cfg.n_kraus_min.min(max_rank)..=max_rank.min(n_max));
        let kraus = random_fsio_with(&mut rng, d, n)?.to_kraus()?;
        verify::verify_t4(&psi, &kraus, &rc.with_seed(derive_seed(rc.roof.seed, &[4])))
    })();
    push(out, TheoremId::T4, d, Status::Inconclusive, t4);

    // T6 and C3 share a state and channel whose output rank stays within bounds.
    let shapes: Vec<(usize, usize)> = (1..=max_rank.min(d))
        .flat_map(|r| (cfg.n_kraus_min..=n_max).map(move |n| (r, n)))
        .filter(|&(r, n)| d <= max_rank || (r * n <= max_rank && n <= max_rank))
        .collect();
    let pair = (|| -> Result<(DensityMatrix, KrausSet)> {
        let &(r, n) = shapes
            .get(rng.random_range(0..shapes.len().max(1)))
            .ok_or(Error::InvalidParameter {
                name: "roof.max_rank",
                value: max_rank as f64,
            })?;
        let rho = random_mixed_state_with(&mut rng, d, r)?;
        let kraus = random_fsio_with(&mut rng, d, n)?.to_kraus()?;
        Ok((rho, kraus))
    })();
    match pair {
        Ok((rho, kraus)) => {
            let t6 = verify::verify_t6(&rho, &kraus, &rc.with_seed(derive_seed(rc.roof.seed, &[6])));
            push(out, TheoremId::T6, d, Status::Inconclusive, t6);
            let c3 = verify::verify_c3(&rho, &kraus, &rc.with_seed(derive_seed(rc.roof.seed, &[3])));
            push(out, TheoremId::T2C3, d, Status::Inconclusive, c3);
        }
        Err(_) => {
            out.push(VerificationRecord::unevaluated(TheoremId::T6, d, Status::Inconclusive));
            out.push(VerificationRecord::unevaluated(TheoremId::T2C3, d, Status::Inconclusive));
        }
    }

    // C4: pure components keep the mixture within rank 2.
    let c4 = (|| {
        let (rho1, rho2) = if d <= max_rank {
            (bounded_state(&mut rng, d, max_rank)?, bounded_state(&mut rng, d, max_rank)?)
        } else {
            (
                random_pure_state_with(&mut rng, d)?.projector(),
                random_pure_state_with(&mut rng, d)?.projector(),
            )
        };
        let lambda: f64 = rng.random();
        verify::verify_c4(&rho1, &rho2, lambda, &rc.with_seed(derive_seed(rc.roof.seed, &[5])))
    })();
    push(out, TheoremId::T2C4, d, Status::Inconclusive, c4);
}

fn probe_trial(
    cfg: &CampaignConfig,
    d: usize,
    trial: usize,
    seed: u64,
    tol: &Tolerances,
    out: &mut Vec<VerificationRecord>,
) {
    let mut rng = rng_from_seed(derive_seed(seed, &[3]));
    let records = (|| -> Result<Vec<VerificationRecord>> {
        let rank = rng.random_range(1..=d);
        let rho = random_mixed_state_with(&mut rng, d, rank)?;
        let psi = random_pure_state_with(&mut rng, d)?;
        let kraus = if d == 3 && trial % 2 == 0 {
            fio_example()
        } else {
            let n = rng.random_range(cfg.n_kraus_min..=cfg.n_kraus_max);
            random_fio_probe_with(&mut rng, d, n)?
        };
        Ok(vec![
            verify::verify_t3(&psi, &kraus, tol)?,
            verify::verify_t5(&rho, &kraus, tol)?,
        ])
    })()
    .unwrap_or_else(|_| {
        vec![
            VerificationRecord::unevaluated(TheoremId::T3, d, Status::Fail),
            VerificationRecord::unevaluated(TheoremId::T5, d, Status::Fail),
        ]
    });
    out.extend(records.into_iter().map(VerificationRecord::as_probe));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Category;

    fn small(seed: u64) -> CampaignConfig {
        CampaignConfig {
            dims: vec![2, 3],
            trials: 20,
            master_seed: seed,
            ..CampaignConfig::default()
        }
    }

    #[test]
    fn exact_checks_pass() {
        let records = run_campaign(&small(3)).unwrap();
        assert_eq!(records.len(), 2 * 20 * 4);
        assert!(records.iter().all(|r| r.passed()), "{:?}", records.iter().find(|r| !r.passed()));
    }

    #[test]
    fn deterministic_and_ordered() {
        let a = run_campaign(&small(11)).unwrap();
        let b = run_campaign(&small(11)).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].dim <= w[1].dim));
        assert_ne!(a, run_campaign(&small(12)).unwrap());
    }

    #[test]
    fn probes_are_labelled() {
        let cfg = CampaignConfig {
            probe_fio: true,
            ..small(5)
        };
        let records = run_campaign(&cfg).unwrap();
        let probes: Vec<_> = records
            .iter()
            .filter(|r| r.category == Category::CounterexampleProbe)
            .collect();
        assert_eq!(probes.len(), 2 * 20 * 2);
        // a non-injective column map misses an output row, so G vanishes on both sides
        assert!(probes.iter().all(|r| r.lhs == 0.0 && r.rhs == 0.0));
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = small(0);
        cfg.dims = vec![1];
        assert!(run_campaign(&cfg).is_err());
        let mut cfg = small(0);
        cfg.n_kraus_min = 0;
        assert!(run_campaign(&cfg).is_err());
    }

    #[test]
    fn config_defaults_fill_missing_fields() {
        let cfg: CampaignConfig = serde_json::from_str(r#"{"dims": [2], "roof": {"enabled": true}}"#).unwrap();
        assert_eq!(cfg.trials, 500);
        assert!(cfg.roof.enabled);
        assert_eq!(cfg.roof.max_rank, 2);
        assert!(serde_json::from_str::<CampaignConfig>(r#"{"dimz": [2]}"#).is_err());
    }
}
