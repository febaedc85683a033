//! Per-input sensitivity records, rankings, screening, and reproduction of
//! published reference tables.

mod reproduce;

use alloc::string::String;
use alloc::vec::Vec;

use libm::fabs;

use crate::distributions::{ConstantPolicy, PoincareConstant};
use crate::estimators::ReplicateSummary;
use crate::sampling::Generator;
use crate::{Error, Result};

pub use reproduce::{
    compare, reference_setup, reproduce_table, reproduction_options, same_three_decimals, Check,
    ReferenceRow, ReferenceTable, Reproduction,
};

/// Default screening threshold on `Υ_j`.
pub const DEFAULT_SCREENING_THRESHOLD: f64 = 0.02;
/// A bound above this value says nothing about a sensitivity index.
pub const UNINFORMATIVE_BOUND: f64 = 1.0;

/// Results for one input.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InputRecord {
    pub name: String,
    pub first_order: ReplicateSummary,
    pub total: ReplicateSummary,
    pub nu: f64,
    pub nu_std_error: f64,
    pub tau: Option<f64>,
    pub constant: PoincareConstant,
    pub upsilon: f64,
    pub upsilon_std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunMetadata {
    pub model: String,
    /// Output variance `D` over the replicates.
    pub variance: ReplicateSummary,
    pub n_sobol: usize,
    pub n_dgsm: usize,
    pub replicates: usize,
    pub seed: u64,
    pub sampler: Generator,
    pub dgsm_sampler: Generator,
    pub policy: ConstantPolicy,
    /// Set by callers that have a clock.
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SensitivityReport {
    pub meta: RunMetadata,
    pub inputs: Vec<InputRecord>,
}

impl SensitivityReport {
    /// Build a report, checking `Υ_j = C_j·ν_j/D` for every input.
    pub fn assemble(meta: RunMetadata, inputs: Vec<InputRecord>) -> Result<Self> {
        let report = Self { meta, inputs };
        report.validate()?;
        Ok(report)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.meta.variance.mean;
        for rec in &self.inputs {
            let expected = rec.constant.c * rec.nu / d;
            if fabs(rec.upsilon - expected) > 1e-12 * fabs(expected) {
                return Err(Error::Shape(alloc::format!(
                    "input {}: Υ = {} but C·ν/D = {expected}",
                    rec.name,
                    rec.upsilon
                )));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.inputs.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().map(|r| r.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|r| r.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankKey {
    FirstOrder,
    Total,
    Nu,
    Upsilon,
}

impl RankKey {
    pub fn value(self, rec: &InputRecord) -> f64 {
        match self {
            RankKey::FirstOrder => rec.first_order.mean,
            RankKey::Total => rec.total.mean,
            RankKey::Nu => rec.nu,
            RankKey::Upsilon => rec.upsilon,
        }
    }
}

/// Input indices in descending order of `key`; ties keep input order.
pub fn rank(report: &SensitivityReport, key: RankKey) -> Vec<usize> {
    let mut order: Vec<usize> = (0..report.inputs.len()).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (key.value(&report.inputs[a]), key.value(&report.inputs[b]));
        vb.total_cmp(&va)
    });
    order
}

/// Input names in descending order of `key`.
pub fn rank_names(report: &SensitivityReport, key: RankKey) -> Vec<&str> {
    rank(report, key).into_iter().map(|j| report.inputs[j].name.as_str()).collect()
}

/// A partition of the inputs by their bound `Υ_j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Screening {
    pub influential: Vec<usize>,
    /// `Υ_j < threshold`: the total index is below the threshold up to
    /// estimation error.
    pub negligible: Vec<usize>,
    /// Influential inputs whose bound exceeds one.
    pub uninformative: Vec<usize>,
}

pub fn screen(report: &SensitivityReport, threshold: f64) -> Result<Screening> {
    if !(threshold > 0.0) {
        return Err(Error::Domain(alloc::format!("screening threshold must be positive, got {threshold}")));
    }
    let mut out = Screening::default();
    for (j, rec) in report.inputs.iter().enumerate() {
        if rec.upsilon < threshold {
            out.negligible.push(j);
        } else {
            out.influential.push(j);
            if rec.upsilon > UNINFORMATIVE_BOUND {
                out.uninformative.push(j);
            }
        }
    }
    Ok(out)
}

/// Spearman rank correlation of two orderings of the same items.
pub fn ranking_agreement<T: PartialEq>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::MismatchedSets);
    }
    let n = a.len();
    let mut sum_sq = 0.0;
    for (i, item) in a.iter().enumerate() {
        let k = b.iter().position(|x| x == item).ok_or(Error::MismatchedSets)?;
        if a.iter().filter(|x| *x == item).count() != 1 {
            return Err(Error::MismatchedSets);
        }
        let diff = i as f64 - k as f64;
        sum_sq += diff * diff;
    }
    if n < 2 {
        return Ok(1.0);
    }
    let n = n as f64;
    Ok(1.0 - 6.0 * sum_sq / (n * (n * n - 1.0)))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::distributions::CheegerMethod;
    use alloc::string::ToString;
    use alloc::vec;

    pub(crate) fn record(name: &str, s: f64, st: f64, nu: f64, c: f64, d: f64) -> InputRecord {
        let summary = |m| ReplicateSummary::from_values(&[m]);
        InputRecord {
            name: name.to_string(),
            first_order: summary(s),
            total: summary(st),
            nu,
            nu_std_error: 0.0,
            tau: None,
            constant: PoincareConstant { c1: 0.0, c, method: CheegerMethod::SharpKnown },
            upsilon: c * nu / d,
            upsilon_std_error: 0.0,
        }
    }

    pub(crate) fn meta(d: f64) -> RunMetadata {
        RunMetadata {
            model: "test".to_string(),
            variance: ReplicateSummary::from_values(&[d]),
            n_sobol: 10,
            n_dgsm: 10,
            replicates: 1,
            seed: 0,
            sampler: Generator::MonteCarlo,
            dgsm_sampler: Generator::SobolSequence,
            policy: ConstantPolicy::PreferSharp,
            timestamp: None,
        }
    }

    fn flood_like() -> SensitivityReport {
        let d = 1.0;
        let rows = [
            ("Q", 0.343, 0.353, 1.296e-06, 2.807 / 1.296e-06),
            ("Ks", 0.130, 0.139, 3.286e-03, 0.198 / 3.286e-03),
            ("Zv", 0.185, 0.186, 1.123, 0.561 / 1.123),
            ("Zm", 0.003, 0.003, 2.279e-02, 0.011 / 2.279e-02),
            ("Hd", 0.276, 0.276, 0.8389, 0.340 / 0.8389),
            ("Cb", 0.036, 0.036, 0.8389, 0.105 / 0.8389),
            ("L", 0.0, 0.0, 2.147e-08, 0.0),
            ("B", 0.0, 0.0, 2.386e-05, 0.0),
        ];
        let inputs = rows.iter().map(|&(n, s, st, nu, c)| record(n, s, st, nu, c, d)).collect();
        SensitivityReport::assemble(meta(d), inputs).unwrap()
    }

    #[test]
    fn rank_examples() {
        let r = flood_like();
        assert_eq!(&rank_names(&r, RankKey::Total)[..4], ["Q", "Hd", "Zv", "Ks"]);
        assert_eq!(rank_names(&r, RankKey::Nu)[0], "Zv");
        let flat: Vec<_> = (0..4).map(|j| record(&alloc::format!("X{j}"), 0.1, 0.1, 1.0, 1.0, 1.0)).collect();
        let flat = SensitivityReport::assemble(meta(1.0), flat).unwrap();
        assert_eq!(rank(&flat, RankKey::Upsilon), vec![0, 1, 2, 3]);
    }

    #[test]
    fn screen_examples() {
        let r = flood_like();
        let s = screen(&r, DEFAULT_SCREENING_THRESHOLD).unwrap();
        assert_eq!(s.negligible, vec![3, 6, 7]);
        assert_eq!(s.uninformative, vec![0]);

        let x3 = record("X3", 0.066, 0.165, 31653.27, 0.25, 991.521);
        assert!(x3.upsilon > 7.98 && x3.upsilon < 7.99);
        let one = SensitivityReport::assemble(meta(991.521), vec![x3]).unwrap();
        let s = screen(&one, 1.0).unwrap();
        assert_eq!((s.influential.as_slice(), s.uninformative.as_slice()), (&[0][..], &[0][..]));

        let empty = SensitivityReport::assemble(meta(1.0), vec![]).unwrap();
        assert_eq!(screen(&empty, 0.02).unwrap(), Screening::default());
        assert!(screen(&empty, 0.0).is_err());
    }

    #[test]
    fn agreement_examples() {
        let a = ["a", "b", "c", "d"];
        let rev = ["d", "c", "b", "a"];
        assert_eq!(ranking_agreement(&a, &a).unwrap(), 1.0);
        assert_eq!(ranking_agreement(&a, &rev).unwrap(), -1.0);
        assert!(matches!(ranking_agreement(&a, &["a", "b", "c", "e"]), Err(Error::MismatchedSets)));
        assert!(matches!(ranking_agreement(&a, &a[..3]), Err(Error::MismatchedSets)));
        assert!(matches!(ranking_agreement(&["a", "a"], &["a", "b"]), Err(Error::MismatchedSets)));

        let r = flood_like();
        let total = rank_names(&r, RankKey::Total);
        let bound = rank_names(&r, RankKey::Upsilon);
        assert!(ranking_agreement(&total, &bound).unwrap() > 0.0);
    }

    #[test]
    fn inconsistent_upsilon_is_rejected() {
        let mut rec = record("X1", 0.1, 0.2, 2.0, 0.5, 4.0);
        rec.upsilon *= 1.001;
        assert!(SensitivityReport::assemble(meta(4.0), vec![rec]).is_err());
    }
}
