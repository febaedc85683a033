//! Estimators for the output variance, first-order and total Sobol' indices,
//! the derivative-based measures `ν_j`, `τ_j`, the bound `Υ_j`, and replicate
//! statistics.
//!
//! Every estimator returns a point value and the Monte Carlo standard error
//! of the underlying sample mean (`sd/√n`, normalised by `D` where relevant).

mod oracle;

use alloc::vec::Vec;

use libm::sqrt;

use crate::distributions::PoincareConstant;
use crate::models::Model;
use crate::sampling::PickFreezeDesign;
use crate::{Error, Matrix, Result};

pub use oracle::{
    anova_oracle, quadrature_dgsm, quadrature_total_variance, AnovaDecomposition,
    DEFAULT_ORACLE_NODES, ORACLE_MAX_DIMENSION,
};

/// A point estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexEstimate {
    pub value: f64,
    pub std_error: f64,
}

// Mean and standard error of the mean, summed left to right.
fn mean_and_se(terms: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = terms.len() as f64;
    let mean = terms.clone().sum::<f64>() / n;
    if terms.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = terms.map(|t| (t - mean) * (t - mean)).sum();
    (mean, sqrt(ss / (n - 1.0) / n))
}

fn check_lengths(expected: usize, others: &[&[f64]]) -> Result<()> {
    for o in others {
        if o.len() != expected {
            return Err(Error::Shape(alloc::format!(
                "evaluation vectors of length {expected} and {}",
                o.len()
            )));
        }
    }
    Ok(())
}

fn pooled_mean(ya: &[f64], yb: &[f64]) -> f64 {
    (ya.iter().sum::<f64>() + yb.iter().sum::<f64>()) / (ya.len() + yb.len()) as f64
}

/// Unbiased sample variance of the `2n` pooled evaluations `yA ∪ yB`.
pub fn estimate_variance(ya: &[f64], yb: &[f64]) -> Result<f64> {
    check_lengths(ya.len(), &[yb])?;
    if ya.len() < 2 {
        return Err(Error::Shape(alloc::format!("variance needs n ≥ 2, got {}", ya.len())));
    }
    let mean = pooled_mean(ya, yb);
    let ss: f64 = ya.iter().chain(yb).map(|y| (y - mean) * (y - mean)).sum();
    Ok(ss / (ya.len() + yb.len() - 1) as f64)
}

fn check_variance(variance: f64) -> Result<()> {
    if variance > 0.0 && variance.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateModel)
    }
}

/// First-order index `S_j = (1/n) Σ (yB − ȳ)(yAB_j − yA) / D`.
///
/// `ȳ` is the pooled mean of `yA` and `yB`; centring leaves the estimator's
/// expectation unchanged and makes it invariant to output shifts.
pub fn first_order_sobol(ya: &[f64], yb: &[f64], yab: &[f64], variance: f64) -> Result<IndexEstimate> {
    check_lengths(ya.len(), &[yb, yab])?;
    check_variance(variance)?;
    let centre = pooled_mean(ya, yb);
    let terms = (0..ya.len()).map(|i| (yb[i] - centre) * (yab[i] - ya[i]));
    let (mean, se) = mean_and_se(terms);
    Ok(IndexEstimate { value: mean / variance, std_error: se / variance })
}

/// Total index `ST_j = (1/2n) Σ (yA − yAB_j)² / D`.
pub fn total_sobol(ya: &[f64], yab: &[f64], variance: f64) -> Result<IndexEstimate> {
    check_lengths(ya.len(), &[yab])?;
    check_variance(variance)?;
    let terms = (0..ya.len()).map(|i| 0.5 * (ya[i] - yab[i]) * (ya[i] - yab[i]));
    let (mean, se) = mean_and_se(terms);
    Ok(IndexEstimate { value: mean / variance, std_error: se / variance })
}

/// Model outputs on a pick-freeze design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignEvaluations {
    pub ya: Vec<f64>,
    pub yb: Vec<f64>,
    pub yab: Vec<Vec<f64>>,
}

/// Evaluate the whole bundle in a single [`Model::evaluate_batch`] call.
pub fn evaluate_design<M: Model + ?Sized>(
    model: &M,
    design: &PickFreezeDesign,
) -> Result<DesignEvaluations> {
    // one batch of n(d + 2) rows: A, B, then each A_B^(j)
    let (n, d) = (design.n(), design.d());
    if n == 0 {
        return Err(Error::Shape("empty design".into()));
    }
    let mut data = Vec::with_capacity(design.evaluation_count() * d);
    for m in core::iter::once(&design.a).chain(core::iter::once(&design.b)).chain(&design.ab) {
        data.extend_from_slice(m.as_slice());
    }
    let y = model.evaluate_batch(&Matrix::from_vec(n * (d + 2), d, data)?)?;
    if y.len() != n * (d + 2) {
        return Err(Error::Evaluation(alloc::format!(
            "{} outputs for {} design points",
            y.len(),
            n * (d + 2)
        )));
    }
    let mut blocks = y.chunks_exact(n).map(<[f64]>::to_vec);
    let ya = blocks.next().unwrap_or_default();
    let yb = blocks.next().unwrap_or_default();
    Ok(DesignEvaluations { ya, yb, yab: blocks.collect() })
}

/// First-order and total indices for every input, from one design.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolEstimate {
    pub first_order: Vec<IndexEstimate>,
    pub total: Vec<IndexEstimate>,
    pub variance: f64,
    pub n: usize,
}

pub fn sobol_indices(evals: &DesignEvaluations) -> Result<SobolEstimate> {
    let variance = estimate_variance(&evals.ya, &evals.yb)?;
    let first_order = evals
        .yab
        .iter()
        .map(|yab| first_order_sobol(&evals.ya, &evals.yb, yab, variance))
        .collect::<Result<_>>()?;
    let total = evals
        .yab
        .iter()
        .map(|yab| total_sobol(&evals.ya, yab, variance))
        .collect::<Result<_>>()?;
    Ok(SobolEstimate { first_order, total, variance, n: evals.ya.len() })
}

/// `ν̂_j = (1/n) Σ_i (∂f/∂x_j)²` over the rows of `gradients`.
pub fn dgsm_nu(gradients: &Matrix) -> Vec<IndexEstimate> {
    dgsm_weighted(gradients, None::<(&Matrix, fn(f64) -> f64)>)
}

/// `τ̂_j = (1/n) Σ_i (∂f/∂x_j)² w(x_ij)`; `points` are the (unscaled) inputs
/// at which the gradients were taken.
pub fn dgsm_tau(
    gradients: &Matrix,
    points: &Matrix,
    weight: impl Fn(f64) -> f64,
) -> Result<Vec<IndexEstimate>> {
    if gradients.nrows() != points.nrows() || gradients.ncols() != points.ncols() {
        return Err(Error::Shape(alloc::format!(
            "gradients {}x{} vs points {}x{}",
            gradients.nrows(),
            gradients.ncols(),
            points.nrows(),
            points.ncols()
        )));
    }
    Ok(dgsm_weighted(gradients, Some((points, weight))))
}

fn dgsm_weighted(
    gradients: &Matrix,
    weighting: Option<(&Matrix, impl Fn(f64) -> f64)>,
) -> Vec<IndexEstimate> {
    (0..gradients.ncols())
        .map(|j| {
            let terms = (0..gradients.nrows()).map(|i| {
                let g = gradients.get(i, j);
                match &weighting {
                    Some((x, w)) => g * g * w(x.get(i, j)),
                    None => g * g,
                }
            });
            let (value, std_error) = mean_and_se(terms);
            IndexEstimate { value, std_error }
        })
        .collect()
}

/// `w(x) = (1 − 3x + 3x²)/6`: with this weight, `τ_j = D_j^tot` for models
/// linear in `x_j` with `x_j ~ U[0, 1]`.
pub fn linear_uniform_weight(x: f64) -> f64 {
    (1.0 - 3.0 * x + 3.0 * x * x) / 6.0
}

/// `Υ_j = C·ν_j / D`.
pub fn upsilon(nu: f64, constant: &PoincareConstant, variance: f64) -> Result<f64> {
    check_variance(variance)?;
    Ok(constant.c * nu / variance)
}

/// Derivative-based measures and the bound for one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgsmInput {
    pub nu: IndexEstimate,
    pub tau: Option<IndexEstimate>,
    pub upsilon: IndexEstimate,
    pub constant: PoincareConstant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgsmEstimate {
    pub inputs: Vec<DgsmInput>,
    pub n: usize,
}

/// Combine `ν` (and optionally `τ`) with the Poincaré constants and `D`.
pub fn dgsm_estimate(
    nu: &[IndexEstimate],
    tau: Option<&[IndexEstimate]>,
    constants: &[PoincareConstant],
    variance: f64,
    n: usize,
) -> Result<DgsmEstimate> {
    if nu.len() != constants.len() || tau.is_some_and(|t| t.len() != nu.len()) {
        return Err(Error::Shape(alloc::format!(
            "{} ν values for {} constants",
            nu.len(),
            constants.len()
        )));
    }
    let inputs = nu
        .iter()
        .enumerate()
        .map(|(j, &nu)| {
            let constant = constants[j];
            Ok(DgsmInput {
                nu,
                tau: tau.map(|t| t[j]),
                upsilon: IndexEstimate {
                    value: upsilon(nu.value, &constant, variance)?,
                    std_error: upsilon(nu.std_error, &constant, variance)?,
                },
                constant,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DgsmEstimate { inputs, n })
}

/// Mean and sample standard deviation of an index over replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicateSummary {
    pub mean: f64,
    pub sd: f64,
    /// Standard error of `mean`; `sd/√R` unless overridden.
    pub std_error: f64,
    pub replicates: usize,
    /// `sd` carries no information: a single replicate, or identical replicates.
    pub degenerate: bool,
}

impl ReplicateSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let r = values.len();
        let mean = values.iter().sum::<f64>() / r as f64;
        let sd = if r > 1 {
            sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1) as f64)
        } else {
            0.0
        };
        let std_error = sd / sqrt(r as f64);
        Self { mean, sd, std_error, replicates: r, degenerate: r < 2 || sd == 0.0 }
    }
}

/// Run `estimate(r, seed)` for `r = 0..R` and summarise each reported index.
///
/// Replicate `r` receives `seed_base + 2r`, the seed of its `A` stream; its
/// `B` stream is that seed plus one (see [`crate::sampling::replicate_seeds`]).
pub fn replicate(
    replicates: usize,
    seed_base: u64,
    mut estimate: impl FnMut(usize, u64) -> Result<Vec<f64>>,
) -> Result<Vec<ReplicateSummary>> {
    if replicates == 0 {
        return Err(Error::Domain("at least one replicate is required".into()));
    }
    let mut runs: Vec<Vec<f64>> = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let seed = crate::sampling::replicate_seeds(seed_base, r as u64).0;
        let values = estimate(r, seed)?;
        if let Some(first) = runs.first() {
            if first.len() != values.len() {
                return Err(Error::Shape("replicates report different index counts".into()));
            }
        }
        runs.push(values);
    }
    let k = runs[0].len();
    Ok((0..k)
        .map(|i| {
            let column: Vec<f64> = runs.iter().map(|run| run[i]).collect();
            ReplicateSummary::from_values(&column)
        })
        .collect())
}
