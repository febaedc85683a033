//! Tensor Gauss–Legendre quadrature of the ANOVA (Hoeffding) decomposition
//! and of total variances and DGSM, for small input dimensions.
//!
//! Each axis uses Gauss–Legendre nodes in probability space mapped through the
//! marginal quantile, so the rule integrates against `μ_j` directly. Infinite
//! tails are cut at `1e-8` and the weights renormalised.

use alloc::vec;
use alloc::vec::Vec;

use libm::fabs;

use crate::distributions::InputSpace;
use crate::models::{gradient_matrix, GradientMethod, Model};
use crate::quadrature::GaussLegendre;
use crate::{Error, Matrix, Result};

pub const DEFAULT_ORACLE_NODES: usize = 64;
/// Largest `d` accepted by [`anova_oracle`].
pub const ORACLE_MAX_DIMENSION: usize = 3;

const TAIL_CUT: f64 = 1e-8;
const MAX_GRID_POINTS: usize = 1 << 24;

struct TensorGrid {
    n: usize,
    d: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
}

impl TensorGrid {
    fn new(space: &InputSpace, n: usize) -> Result<Self> {
        let d = space.dimension();
        if n == 0 {
            return Err(Error::Domain("quadrature needs at least one node per axis".into()));
        }
        let total = (0..d).try_fold(1usize, |acc, _| acc.checked_mul(n));
        if !total.is_some_and(|t| t <= MAX_GRID_POINTS) {
            return Err(Error::Capacity(alloc::format!(
                "{n}^{d} quadrature points exceed the limit of {MAX_GRID_POINTS}"
            )));
        }
        let rule = GaussLegendre::new(n);
        let mut nodes = Vec::with_capacity(d);
        let mut weights = Vec::with_capacity(d);
        for m in space.marginals() {
            let (lo, hi) = m.support();
            let p_lo = if lo.is_finite() { 0.0 } else { TAIL_CUT };
            let p_hi = if hi.is_finite() { 1.0 } else { 1.0 - TAIL_CUT };
            let mass = p_hi - p_lo;
            let mut xs = Vec::with_capacity(n);
            let mut ws = Vec::with_capacity(n);
            for (p, w) in rule.on_interval(p_lo, p_hi) {
                xs.push(m.quantile(p)?);
                ws.push(w / mass);
            }
            nodes.push(xs);
            weights.push(ws);
        }
        Ok(Self { n, d, nodes, weights })
    }

    fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    fn stride(&self, dim: usize) -> usize {
        self.n.pow((self.d - 1 - dim) as u32)
    }

    fn digit(&self, idx: usize, dim: usize) -> usize {
        idx / self.stride(dim) % self.n
    }

    fn points(&self) -> Matrix {
        let mut m = Matrix::zeros(self.len(), self.d);
        for idx in 0..self.len() {
            for j in 0..self.d {
                m.set(idx, j, self.nodes[j][self.digit(idx, j)]);
            }
        }
        m
    }

    fn point_weights(&self) -> Vec<f64> {
        (0..self.len())
            .map(|idx| (0..self.d).map(|j| self.weights[j][self.digit(idx, j)]).product())
            .collect()
    }

    /// Replace `values` by their weighted mean along `dim`, broadcast back.
    fn average_along(&self, values: &[f64], dim: usize) -> Vec<f64> {
        let stride = self.stride(dim);
        let mut out = vec![0.0; values.len()];
        for base in 0..values.len() {
            if self.digit(base, dim) != 0 {
                continue;
            }
            let mean: f64 =
                (0..self.n).map(|k| self.weights[dim][k] * values[base + k * stride]).sum();
            for k in 0..self.n {
                out[base + k * stride] = mean;
            }
        }
        out
    }

    /// `E[f | x_j, j ∈ mask]` on the grid.
    fn conditional_mean(&self, values: &[f64], mask: usize) -> Vec<f64> {
        let mut out = values.to_vec();
        for dim in 0..self.d {
            if mask & (1 << dim) == 0 {
                out = self.average_along(&out, dim);
            }
        }
        out
    }
}

fn weighted_sum(w: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    w.iter().zip(values).map(|(w, v)| w * v).sum()
}

/// The Hoeffding decomposition of a model with at most three inputs.
///
/// Subsets `u` of the inputs are bit masks: bit `j` set means input `j ∈ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnovaDecomposition {
    pub dimension: usize,
    /// `f₀ = E[f]`.
    pub mean: f64,
    /// `D = Var f`.
    pub variance: f64,
    /// `D_u` indexed by mask; entry 0 is unused and zero.
    pub partial_variances: Vec<f64>,
    /// Largest `|⟨f_u, f_v⟩|` over distinct non-empty `u, v`.
    pub max_cross_product: f64,
}

impl AnovaDecomposition {
    pub fn partial_variance(&self, mask: usize) -> f64 {
        self.partial_variances[mask]
    }

    /// `D_u^tot = Σ_{v ⊇ u} D_v`.
    pub fn total_variance(&self, mask: usize) -> f64 {
        (1..self.partial_variances.len())
            .filter(|v| v & mask == mask)
            .map(|v| self.partial_variances[v])
            .sum()
    }

    /// `S_u = D_u / D`.
    pub fn sobol(&self, mask: usize) -> f64 {
        self.partial_variance(mask) / self.variance
    }

    /// `S_Tu = D_u^tot / D`.
    pub fn total_sobol(&self, mask: usize) -> f64 {
        self.total_variance(mask) / self.variance
    }

    pub fn first_order(&self, j: usize) -> f64 {
        self.sobol(1 << j)
    }

    pub fn total(&self, j: usize) -> f64 {
        self.total_sobol(1 << j)
    }
}

/// ANOVA decomposition by tensor quadrature with `nodes_per_dim` points per axis.
pub fn anova_oracle<M: Model + ?Sized>(
    model: &M,
    space: &InputSpace,
    nodes_per_dim: usize,
) -> Result<AnovaDecomposition> {
    let d = space.dimension();
    if d > ORACLE_MAX_DIMENSION {
        return Err(Error::Capacity(alloc::format!(
            "the ANOVA oracle handles at most {ORACLE_MAX_DIMENSION} inputs, got {d}"
        )));
    }
    if model.dimension() != d {
        return Err(Error::Shape(alloc::format!(
            "model takes {} inputs, space has {d}",
            model.dimension()
        )));
    }
    let grid = TensorGrid::new(space, nodes_per_dim)?;
    let f = model.evaluate_batch(&grid.points())?;
    let w = grid.point_weights();
    let subsets = 1usize << d;

    let conditional: Vec<Vec<f64>> = (0..subsets).map(|u| grid.conditional_mean(&f, u)).collect();
    let mean = conditional[0][0];
    // f_u = Σ_{v ⊆ u} (−1)^{|u \ v|} E[f | x_v]
    let components: Vec<Vec<f64>> = (0..subsets)
        .map(|u| {
            let mut fu = vec![0.0; f.len()];
            for v in (0..subsets).filter(|v| v & u == *v) {
                let sign = if (u & !v).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                for (acc, e) in fu.iter_mut().zip(&conditional[v]) {
                    *acc += sign * e;
                }
            }
            fu
        })
        .collect();

    let variance = weighted_sum(&w, f.iter().map(|y| (y - mean) * (y - mean)));
    if !(variance > 0.0) {
        return Err(Error::DegenerateModel);
    }
    let mut partial_variances = vec![0.0; subsets];
    for u in 1..subsets {
        partial_variances[u] = weighted_sum(&w, components[u].iter().map(|c| c * c));
    }
    let mut max_cross_product: f64 = 0.0;
    for u in 1..subsets {
        for v in (u + 1)..subsets {
            let ip = weighted_sum(&w, components[u].iter().zip(&components[v]).map(|(a, b)| a * b));
            max_cross_product = max_cross_product.max(fabs(ip));
        }
    }
    Ok(AnovaDecomposition { dimension: d, mean, variance, partial_variances, max_cross_product })
}

/// `D` and every `D_j^tot = E[Var(f | x_~j)]` by tensor quadrature.
///
/// Works for any `d` whose grid `nodes_per_dim^d` stays below `2^24` points.
pub fn quadrature_total_variance<M: Model + ?Sized>(
    model: &M,
    space: &InputSpace,
    nodes_per_dim: usize,
) -> Result<(f64, Vec<f64>)> {
    let grid = TensorGrid::new(space, nodes_per_dim)?;
    let f = model.evaluate_batch(&grid.points())?;
    let w = grid.point_weights();
    let mean = weighted_sum(&w, f.iter().copied());
    let variance = weighted_sum(&w, f.iter().map(|y| (y - mean) * (y - mean)));
    let totals = (0..grid.d)
        .map(|j| {
            let cond = grid.average_along(&f, j);
            weighted_sum(&w, f.iter().zip(&cond).map(|(y, m)| (y - m) * (y - m)))
        })
        .collect();
    Ok((variance, totals))
}

/// `(ν_j, τ_j)` for every input by tensor quadrature.
pub fn quadrature_dgsm<M: Model + ?Sized>(
    model: &M,
    space: &InputSpace,
    nodes_per_dim: usize,
    method: GradientMethod,
    weight: impl Fn(f64) -> f64,
) -> Result<Vec<(f64, f64)>> {
    let grid = TensorGrid::new(space, nodes_per_dim)?;
    let x = grid.points();
    let g = gradient_matrix(model, &x, method)?;
    let w = grid.point_weights();
    Ok((0..grid.d)
        .map(|j| {
            let nu = weighted_sum(&w, g.column(j).map(|v| v * v));
            let tau =
                weighted_sum(&w, g.column(j).zip(x.column(j)).map(|(v, xj)| v * v * weight(xj)));
            (nu, tau)
        })
        .collect())
}
