use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::{Category, Status, TheoremId, VerificationRecord};
use crate::io::fmt_real;

pub const CSV_HEADER: &str = "theorem_id,d,seed,lhs,rhs,deviation,status";

/// CSV with one row per record, in the given order. Byte-identical for identical input.
pub fn records_to_csv<'a>(records: impl IntoIterator<Item = &'a VerificationRecord>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.theorem,
            r.dim,
            r.seed,
            fmt_real(r.lhs),
            fmt_real(r.rhs),
            fmt_real(r.deviation),
            r.status
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TheoremSummary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    /// Largest finite deviation, `None` when no record had one.
    pub max_deviation: Option<f64>,
}

impl TheoremSummary {
    fn add(&mut self, r: &VerificationRecord) {
        match r.status {
            Status::Pass => self.pass += 1,
            Status::Fail => self.fail += 1,
            Status::Inconclusive => self.inconclusive += 1,
        }
        if r.deviation.is_finite() {
            self.max_deviation = Some(self.max_deviation.map_or(r.deviation, |m| m.max(r.deviation)));
        }
    }

    pub fn total(&self) -> usize {
        self.pass + self.fail + self.inconclusive
    }
}

/// Per-theorem counts, kept apart for suite records and counterexample probes.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub records: usize,
    pub suite: BTreeMap<String, TheoremSummary>,
    pub counterexample_probe: BTreeMap<String, TheoremSummary>,
}

impl CampaignSummary {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a VerificationRecord>) -> Self {
        let mut s = Self::default();
        for r in records {
            s.records += 1;
            let bucket = match r.category {
                Category::Suite => &mut s.suite,
                Category::CounterexampleProbe => &mut s.counterexample_probe,
            };
            bucket.entry(r.theorem.label().to_string()).or_default().add(r);
        }
        s
    }

    pub fn suite_failures(&self) -> usize {
        self.suite.values().map(|t| t.fail).sum()
    }

    pub fn theorem(&self, id: TheoremId) -> Option<&TheoremSummary> {
        self.suite.get(id.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(theorem: TheoremId, deviation: f64, status: Status, category: Category) -> VerificationRecord {
        VerificationRecord {
            theorem,
            dim: 2,
            seed: 7,
            lhs: 0.64,
            rhs: 0.64 + deviation,
            deviation,
            status,
            category,
        }
    }

    #[test]
    fn csv_layout() {
        let r = record(TheoremId::T3, 0.0, Status::Pass, Category::Suite);
        assert_eq!(
            records_to_csv([&r]),
            "theorem_id,d,seed,lhs,rhs,deviation,status\nT3,2,7,0.64,0.64,0.0,pass\n"
        );
    }

    #[test]
    fn summary_separates_probes() {
        let rs = [
            record(TheoremId::T3, 1e-15, Status::Pass, Category::Suite),
            record(TheoremId::T3, 3e-15, Status::Pass, Category::Suite),
            record(TheoremId::T3, 0.2, Status::Fail, Category::CounterexampleProbe),
            record(TheoremId::T6, f64::NAN, Status::Inconclusive, Category::Suite),
        ];
        let s = CampaignSummary::from_records(&rs);
        assert_eq!(s.records, 4);
        assert_eq!(s.suite_failures(), 0);
        let t3 = s.theorem(TheoremId::T3).unwrap();
        assert_eq!((t3.pass, t3.max_deviation), (2, Some(3e-15)));
        assert_eq!(s.counterexample_probe["T3"].fail, 1);
        assert_eq!(s.theorem(TheoremId::T6).unwrap().max_deviation, None);
    }
}
