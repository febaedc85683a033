//! The end-to-end pipeline: sample, evaluate, estimate, assemble a report.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::distributions::{ConstantPolicy, InputSpace};
use crate::estimators::{
    dgsm_estimate, dgsm_nu, dgsm_tau, evaluate_design, linear_uniform_weight, sobol_indices,
    ReplicateSummary,
};
use crate::models::{gradient_matrix, GradientMethod, Model};
use crate::report::{InputRecord, RunMetadata, SensitivityReport};
use crate::sampling::{
    generate_unit_with, pick_freeze, pick_freeze_units, replicate_seeds, transform, Generator,
    SobolOptions,
};
use crate::{Error, Result};

/// Settings for [`analyze`].
#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    /// Rows of each pick-freeze matrix.
    pub n_sobol: usize,
    /// Points of the derivative sample.
    pub n_dgsm: usize,
    pub replicates: usize,
    pub seed: u64,
    pub sampler: Generator,
    pub dgsm_sampler: Generator,
    pub gradient: GradientMethod,
    pub policy: ConstantPolicy,
    /// Digital shift of Sobol' pick-freeze designs; `None` shifts only when
    /// there is more than one replicate.
    pub sobol_shift: Option<bool>,
    pub tau_weight: fn(f64) -> f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            n_sobol: 10_000,
            n_dgsm: 10_000,
            replicates: 20,
            seed: 0,
            sampler: Generator::MonteCarlo,
            dgsm_sampler: Generator::SobolSequence,
            gradient: GradientMethod::default(),
            policy: ConstantPolicy::PreferSharp,
            sobol_shift: None,
            tau_weight: linear_uniform_weight,
        }
    }
}

impl AnalysisOptions {
    fn validate(&self) -> Result<()> {
        if self.n_sobol < 2 || self.n_dgsm < 1 || self.replicates < 1 {
            return Err(Error::Domain(alloc::format!(
                "need n_sobol ≥ 2, n_dgsm ≥ 1 and replicates ≥ 1 (got {}, {}, {})",
                self.n_sobol,
                self.n_dgsm,
                self.replicates
            )));
        }
        Ok(())
    }

    /// Seed of the derivative sample: the stream after the last replicate.
    pub fn dgsm_seed(&self) -> u64 {
        replicate_seeds(self.seed, self.replicates as u64).0
    }
}

/// Sobol' indices over `replicates` pick-freeze designs, then `ν`, `τ`, `Υ`
/// from one independent derivative sample.
///
/// `D` in `Υ = C·ν/D` is the mean of the replicate variance estimates.
pub fn analyze<M: Model + ?Sized>(
    model: &M,
    space: &InputSpace,
    opts: &AnalysisOptions,
) -> Result<SensitivityReport> {
    opts.validate()?;
    let d = space.dimension();
    if model.dimension() != d {
        return Err(Error::Shape(alloc::format!(
            "model {} takes {} inputs, the input space has {d}",
            model.name(),
            model.dimension()
        )));
    }
    let constants = space.constants(opts.policy)?;
    let shift = opts.sobol_shift.unwrap_or(opts.replicates > 1);

    let r_total = opts.replicates;
    let mut variances = Vec::with_capacity(r_total);
    let mut first = alloc::vec![Vec::with_capacity(r_total); d];
    let mut total = alloc::vec![Vec::with_capacity(r_total); d];
    let mut first_se = alloc::vec![0.0; d];
    let mut total_se = alloc::vec![0.0; d];
    for r in 0..r_total {
        let (ua, ub) = pick_freeze_units(opts.sampler, opts.n_sobol, d, opts.seed, r as u64, shift)?;
        let design = pick_freeze(&ua, &ub, space)?;
        let est = sobol_indices(&evaluate_design(model, &design)?)?;
        variances.push(est.variance);
        for j in 0..d {
            first[j].push(est.first_order[j].value);
            total[j].push(est.total[j].value);
            first_se[j] += est.first_order[j].std_error / r_total as f64;
            total_se[j] += est.total[j].std_error / r_total as f64;
        }
    }
    let variance = ReplicateSummary::from_values(&variances);

    let u = generate_unit_with(
        opts.dgsm_sampler,
        opts.n_dgsm,
        d,
        opts.dgsm_seed(),
        SobolOptions::default(),
    )?;
    let x = transform(&u, space)?;
    let g = gradient_matrix(model, &x, opts.gradient)?;
    let nu = dgsm_nu(&g);
    let tau = dgsm_tau(&g, &x, opts.tau_weight)?;
    let dgsm = dgsm_estimate(&nu, Some(&tau), &constants, variance.mean, opts.n_dgsm)?;

    let inputs = (0..d)
        .map(|j| {
            let mut s = ReplicateSummary::from_values(&first[j]);
            let mut st = ReplicateSummary::from_values(&total[j]);
            // identical replicates say nothing; fall back to the in-sample error
            for (summary, within) in [(&mut s, first_se[j]), (&mut st, total_se[j])] {
                if summary.degenerate {
                    summary.std_error = within;
                }
            }
            let dj = &dgsm.inputs[j];
            InputRecord {
                name: space.names()[j].clone(),
                first_order: s,
                total: st,
                nu: dj.nu.value,
                nu_std_error: dj.nu.std_error,
                tau: dj.tau.map(|t| t.value),
                constant: dj.constant,
                upsilon: dj.upsilon.value,
                upsilon_std_error: dj.upsilon.std_error,
            }
        })
        .collect();

    SensitivityReport::assemble(
        RunMetadata {
            model: model.name().to_string(),
            variance,
            n_sobol: opts.n_sobol,
            n_dgsm: opts.n_dgsm,
            replicates: opts.replicates,
            seed: opts.seed,
            sampler: opts.sampler,
            dgsm_sampler: opts.dgsm_sampler,
            policy: opts.policy,
            timestamp: None,
        },
        inputs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Marginal;
    use crate::models::{FnModel, Linear};
    use alloc::vec;

    fn unit(d: usize) -> InputSpace {
        InputSpace::iid(d, Marginal::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    fn small() -> AnalysisOptions {
        AnalysisOptions { n_sobol: 2000, n_dgsm: 512, replicates: 4, ..Default::default() }
    }

    #[test]
    fn linear_report_is_consistent() {
        let model = Linear::new(vec![1.0, 2.0, 0.0]);
        let report = analyze(&model, &unit(3), &small()).unwrap();
        assert_eq!(report.inputs.len(), 3);
        assert!((report.meta.variance.mean - 5.0 / 12.0).abs() < 0.03);
        let x2 = &report.inputs[1];
        assert!((x2.total.mean - 0.8).abs() < 0.05);
        assert!((x2.nu - 4.0).abs() < 1e-6);
        assert_eq!(report.inputs[2].total.mean, 0.0);
        assert_eq!(report.inputs[2].upsilon, 0.0);
        report.validate().unwrap();
    }

    #[test]
    fn deterministic_given_seed() {
        let model = Linear::new(vec![1.0, -1.0]);
        let a = analyze(&model, &unit(2), &small()).unwrap();
        let b = analyze(&model, &unit(2), &small()).unwrap();
        assert_eq!(a, b);
        let c = analyze(&model, &unit(2), &AnalysisOptions { seed: 7, ..small() }).unwrap();
        assert_ne!(a.inputs[0].first_order.mean, c.inputs[0].first_order.mean);
    }

    #[test]
    fn unshifted_sobol_replicates_are_flagged() {
        let opts = AnalysisOptions {
            sampler: Generator::SobolSequence,
            sobol_shift: Some(false),
            ..small()
        };
        let report = analyze(&Linear::new(vec![1.0, 3.0]), &unit(2), &opts).unwrap();
        let s = report.inputs[0].first_order;
        assert_eq!(s.sd, 0.0);
        assert!(s.degenerate);
        assert!(s.std_error > 0.0);
    }

    #[test]
    fn rejects_bad_setups() {
        let model = Linear::new(vec![1.0, 1.0]);
        assert!(matches!(analyze(&model, &unit(3), &small()), Err(Error::Shape(_))));
        let zero = AnalysisOptions { replicates: 0, ..small() };
        assert!(matches!(analyze(&model, &unit(2), &zero), Err(Error::Domain(_))));
        let flat = FnModel::new("flat", 2, |_: &[f64]| Ok(1.0));
        assert!(matches!(analyze(&flat, &unit(2), &small()), Err(Error::DegenerateModel)));
        let no_grad = AnalysisOptions { gradient: GradientMethod::Analytic, ..small() };
        let opaque = FnModel::new("opaque", 2, |x: &[f64]| Ok(x[0] * x[1]));
        assert!(matches!(analyze(&opaque, &unit(2), &no_grad), Err(Error::Capability(_))));
    }
}
