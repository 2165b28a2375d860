//! Exact and Monte Carlo checks of the G-coherence factorization laws,
//! the monotonicity properties and the amplitude-damping special case.
//!
//! Every check produces a [`VerificationRecord`]. Inequality records are
//! stored in `lhs <= rhs` orientation, so `deviation = max(0, lhs - rhs)`
//! is the violation; equality records carry `|lhs - rhs|`.

pub mod campaign;
pub mod report;
pub mod verify;

use std::fmt;

use crate::measures::RoofConfig;

pub use campaign::{run_campaign, CampaignConfig, RoofChecks};
pub use report::{records_to_csv, CampaignSummary, TheoremSummary};
pub use verify::{
    s_matrix, verify_amgm, verify_c3, verify_c4, verify_gad, verify_t1, verify_t3, verify_t4,
    verify_t5, verify_t6,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    /// Strong monotonicity of G under FSIO.
    T1,
    /// Strong monotonicity of the roof.
    T2C3,
    /// Convexity of the roof.
    T2C4,
    /// Pure-state factorization of G.
    T3,
    /// Pure-state factorization of the roof.
    T4,
    /// Mixed-state factorization of G.
    T5,
    /// Mixed-state factorization inequality of the roof.
    T6,
    GadT3,
    GadT4,
    GadT5,
    GadT6,
    /// `sum_n prod_i |a_ii^(n)|^(2/d) <= 1`.
    Amgm,
}

impl TheoremId {
    pub const ALL: [TheoremId; 12] = [
        Self::T1,
        Self::T2C3,
        Self::T2C4,
        Self::T3,
        Self::T4,
        Self::T5,
        Self::T6,
        Self::GadT3,
        Self::GadT4,
        Self::GadT5,
        Self::GadT6,
        Self::Amgm,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Self::T1 => "T1",
            Self::T2C3 => "T2_C3",
            Self::T2C4 => "T2_C4",
            Self::T3 => "T3",
            Self::T4 => "T4",
            Self::T5 => "T5",
            Self::T6 => "T6",
            Self::GadT3 => "GAD_T3",
            Self::GadT4 => "GAD_T4",
            Self::GadT5 => "GAD_T5",
            Self::GadT6 => "GAD_T6",
            Self::Amgm => "AMGM",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.label() == s)
    }

    pub fn is_equality(&self) -> bool {
        matches!(
            self,
            Self::T3 | Self::T4 | Self::T5 | Self::GadT3 | Self::GadT4 | Self::GadT5
        )
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Whether a record tests a claimed theorem or probes a channel outside its hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Category {
    #[default]
    Suite,
    CounterexampleProbe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationRecord {
    pub theorem: TheoremId,
    pub dim: usize,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
    pub status: Status,
    pub category: Category,
}

impl VerificationRecord {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn as_probe(mut self) -> Self {
        self.category = Category::CounterexampleProbe;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Record for a check that could not be evaluated.
    pub(crate) fn unevaluated(theorem: TheoremId, dim: usize, status: Status) -> Self {
        Self {
            theorem,
            dim,
            seed: 0,
            lhs: f64::NAN,
            rhs: f64::NAN,
            deviation: f64::NAN,
            status,
            category: Category::Suite,
        }
    }
}

/// Pass/fail thresholds shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for the exact equalities (T3, T5 and GAD variants).
    pub eq_rel: f64,
    /// Absolute floor under `eq_rel * |rhs|`.
    pub eq_abs_floor: f64,
    /// Slack for the exact inequalities (T1).
    pub ineq: f64,
    /// Slack for the AM-GM kernel.
    pub amgm: f64,
    /// Agreement required between `G[Phi(psi+)]` and its diagonal-factor closed form.
    pub closed_form: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eq_rel: 1e-8,
            eq_abs_floor: 1e-12,
            ineq: 1e-9,
            amgm: 1e-12,
            closed_form: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn equality_holds(&self, lhs: f64, rhs: f64) -> bool {
        (lhs - rhs).abs() <= (self.eq_rel * rhs.abs()).max(self.eq_abs_floor)
    }
}

/// Settings for checks that go through the convex-roof optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoofCheckConfig {
    pub roof: RoofConfig,
    /// Equality tolerance for roof factorization (`|lhs - rhs| <= eq * max(1, |rhs|)`).
    pub eq: f64,
    /// Violations up to `band_factor * roof.tol` are inconclusive rather than failures.
    pub band_factor: f64,
}

impl Default for RoofCheckConfig {
    fn default() -> Self {
        Self {
            roof: RoofConfig::default(),
            eq: 1e-6,
            band_factor: 1e3,
        }
    }
}

impl RoofCheckConfig {
    pub fn band(&self) -> f64 {
        self.band_factor * self.roof.tol
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self {
            roof: self.roof.with_seed(seed),
            ..self
        }
    }
}
