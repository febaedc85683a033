//! Model interface, gradient evaluation and the built-in test functions.

mod flood;
mod morris;
mod simple;

use alloc::vec::Vec;

use libm::fabs;

use crate::{Error, Matrix, Result};

pub use flood::{flood_inputs, FloodCost, FloodOverflow, FLOOD_INPUTS};
pub use morris::{morris_inputs, Morris, CLASSICAL_OFFSET, DEFAULT_COEFF_SEED, MORRIS_DIMENSION};
pub use simple::{FnModel, Interaction, Linear};

/// A deterministic scalar function of `d` inputs.
///
/// `evaluate` must be pure: the same point always yields the same value, and
/// concurrent calls do not interfere.
pub trait Model {
    fn name(&self) -> &str;

    fn dimension(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    fn has_gradient(&self) -> bool {
        false
    }

    /// Analytic gradient; models without one report a capability error.
    fn gradient(&self, _x: &[f64]) -> Result<Vec<f64>> {
        Err(Error::Capability(alloc::format!("{} has no analytic gradient", self.name())))
    }

    /// Evaluate every row of `points`, preserving order.
    fn evaluate_batch(&self, points: &Matrix) -> Result<Vec<f64>> {
        check_width(self.dimension(), points)?;
        points.rows().map(|x| self.evaluate(x)).collect()
    }
}

impl<M: Model + ?Sized> Model for &M {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        (**self).evaluate(x)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).gradient(x)
    }
    fn evaluate_batch(&self, points: &Matrix) -> Result<Vec<f64>> {
        (**self).evaluate_batch(points)
    }
}

impl<M: Model + ?Sized> Model for alloc::boxed::Box<M> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        (**self).evaluate(x)
    }
    fn has_gradient(&self) -> bool {
        (**self).has_gradient()
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).gradient(x)
    }
    fn evaluate_batch(&self, points: &Matrix) -> Result<Vec<f64>> {
        (**self).evaluate_batch(points)
    }
}

pub(crate) fn check_width(d: usize, points: &Matrix) -> Result<()> {
    if points.ncols() != d {
        return Err(Error::Shape(alloc::format!(
            "model takes {d} inputs, points have {} columns",
            points.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn check_point(d: usize, x: &[f64]) -> Result<()> {
    if x.len() != d {
        return Err(Error::Shape(alloc::format!("model takes {d} inputs, got {}", x.len())));
    }
    Ok(())
}

/// Default relative finite-difference step: a 0.01 % perturbation.
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-4;
/// Smallest step used when `x_j` is at or near zero.
pub const DEFAULT_ABSOLUTE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "method", rename_all = "kebab-case"))]
pub enum GradientMethod {
    Analytic,
    /// `(f(x + h e_j) − f(x)) / h` with `h = max(relative_step·|x_j|, absolute_floor)`.
    ForwardFd {
        #[cfg_attr(feature = "serde", serde(default = "default_relative_step"))]
        relative_step: f64,
        #[cfg_attr(feature = "serde", serde(default = "default_absolute_floor"))]
        absolute_floor: f64,
    },
    /// `(f(x + h e_j) − f(x − h e_j)) / 2h`, same step rule.
    CentralFd {
        #[cfg_attr(feature = "serde", serde(default = "default_relative_step"))]
        relative_step: f64,
        #[cfg_attr(feature = "serde", serde(default = "default_absolute_floor"))]
        absolute_floor: f64,
    },
}

#[cfg(feature = "serde")]
fn default_relative_step() -> f64 {
    DEFAULT_RELATIVE_STEP
}

#[cfg(feature = "serde")]
fn default_absolute_floor() -> f64 {
    DEFAULT_ABSOLUTE_FLOOR
}

impl Default for GradientMethod {
    fn default() -> Self {
        GradientMethod::ForwardFd {
            relative_step: DEFAULT_RELATIVE_STEP,
            absolute_floor: DEFAULT_ABSOLUTE_FLOOR,
        }
    }
}

impl GradientMethod {
    pub fn central() -> Self {
        GradientMethod::CentralFd {
            relative_step: DEFAULT_RELATIVE_STEP,
            absolute_floor: DEFAULT_ABSOLUTE_FLOOR,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            GradientMethod::Analytic => Ok(()),
            GradientMethod::ForwardFd { relative_step, absolute_floor }
            | GradientMethod::CentralFd { relative_step, absolute_floor } => {
                if relative_step > 0.0 && absolute_floor >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(alloc::format!(
                        "finite-difference step must be positive (relative {relative_step}, floor {absolute_floor})"
                    )))
                }
            }
        }
    }

    /// Model evaluations per gradient, including the base point.
    pub fn evaluations_per_point(&self, d: usize) -> usize {
        match self {
            GradientMethod::Analytic => 0,
            GradientMethod::ForwardFd { .. } => d + 1,
            GradientMethod::CentralFd { .. } => 2 * d,
        }
    }
}

fn step(relative: f64, floor: f64, x: f64) -> f64 {
    (relative * fabs(x)).max(floor)
}

/// Gradient of `model` at a single point.
pub fn gradient<M: Model + ?Sized>(model: &M, x: &[f64], method: GradientMethod) -> Result<Vec<f64>> {
    check_point(model.dimension(), x)?;
    let m = Matrix::from_vec(1, x.len(), x.to_vec())?;
    let g = gradient_matrix(model, &m, method)?;
    Ok(g.into_vec())
}

/// Gradients at every row of `points` (one row per point).
///
/// Finite differences stack all perturbed points into one batch so that
/// black-box models see a single `evaluate_batch` call.
pub fn gradient_matrix<M: Model + ?Sized>(
    model: &M,
    points: &Matrix,
    method: GradientMethod,
) -> Result<Matrix> {
    method.validate()?;
    let d = model.dimension();
    check_width(d, points)?;
    let n = points.nrows();
    match method {
        GradientMethod::Analytic => {
            if !model.has_gradient() {
                return Err(Error::Capability(alloc::format!(
                    "{} has no analytic gradient",
                    model.name()
                )));
            }
            let mut out = Matrix::zeros(n, d);
            for i in 0..n {
                let g = model.gradient(points.row(i))?;
                out.row_mut(i).copy_from_slice(&g);
            }
            Ok(out)
        }
        GradientMethod::ForwardFd { relative_step, absolute_floor } => {
            // rows: base point, then x + h_j e_j for j = 0..d
            let mut stacked = Matrix::zeros(n * (d + 1), d);
            let mut steps = Matrix::zeros(n, d);
            for i in 0..n {
                let x = points.row(i);
                stacked.row_mut(i * (d + 1)).copy_from_slice(x);
                for j in 0..d {
                    let h = step(relative_step, absolute_floor, x[j]);
                    let row = stacked.row_mut(i * (d + 1) + 1 + j);
                    row.copy_from_slice(x);
                    row[j] = x[j] + h;
                    // the representable step, not the nominal one
                    steps.set(i, j, row[j] - x[j]);
                }
            }
            let y = model.evaluate_batch(&stacked)?;
            let mut out = Matrix::zeros(n, d);
            for i in 0..n {
                let base = y[i * (d + 1)];
                for j in 0..d {
                    out.set(i, j, (y[i * (d + 1) + 1 + j] - base) / steps.get(i, j));
                }
            }
            Ok(out)
        }
        GradientMethod::CentralFd { relative_step, absolute_floor } => {
            let mut stacked = Matrix::zeros(n * 2 * d, d);
            let mut spans = Matrix::zeros(n, d);
            for i in 0..n {
                let x = points.row(i);
                for j in 0..d {
                    let h = step(relative_step, absolute_floor, x[j]);
                    let up = stacked.row_mut(i * 2 * d + 2 * j);
                    up.copy_from_slice(x);
                    up[j] = x[j] + h;
                    let hi = up[j];
                    let down = stacked.row_mut(i * 2 * d + 2 * j + 1);
                    down.copy_from_slice(x);
                    down[j] = x[j] - h;
                    spans.set(i, j, hi - down[j]);
                }
            }
            let y = model.evaluate_batch(&stacked)?;
            let mut out = Matrix::zeros(n, d);
            for i in 0..n {
                for j in 0..d {
                    let k = i * 2 * d + 2 * j;
                    out.set(i, j, (y[k] - y[k + 1]) / spans.get(i, j));
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn forward_difference_is_exact_for_linear_models() {
        let model = Linear::new(vec![1.5, -2.0, 0.25]);
        let g = gradient(&model, &[0.3, 10.0, -4.0], GradientMethod::default()).unwrap();
        for (gj, aj) in g.iter().zip([1.5, -2.0, 0.25]) {
            assert!((gj - aj).abs() < 1e-9 * aj.abs().max(1.0));
        }
    }

    #[test]
    fn floor_step_at_zero() {
        let square = FnModel::new("square", 1, |x: &[f64]| Ok(x[0] * x[0]));
        let g = gradient(&square, &[0.0], GradientMethod::default()).unwrap();
        assert!((g[0] - 1e-8).abs() < 1e-12);
    }

    #[test]
    fn analytic_requires_capability() {
        let f = FnModel::new("f", 1, |x: &[f64]| Ok(x[0]));
        assert!(matches!(
            gradient(&f, &[0.0], GradientMethod::Analytic),
            Err(Error::Capability(_))
        ));
        assert!(matches!(FloodCost.gradient(&[0.0; 8]), Err(Error::Capability(_))));
    }

    #[test]
    fn invalid_step_rejected() {
        let m = Linear::new(vec![1.0]);
        let bad = GradientMethod::ForwardFd { relative_step: 0.0, absolute_floor: 1e-8 };
        assert!(matches!(gradient(&m, &[1.0], bad), Err(Error::Domain(_))));
    }

    #[test]
    fn central_difference_second_order() {
        let cube = FnModel::new("cube", 1, |x: &[f64]| Ok(x[0] * x[0] * x[0]));
        let g = gradient(&cube, &[2.0], GradientMethod::central()).unwrap();
        // truncation error h² = (2e-4)² for x³
        assert!((g[0] - 12.0).abs() < 1e-7);
    }

    #[test]
    fn dimension_checked() {
        let m = Linear::new(vec![1.0, 2.0]);
        assert!(matches!(gradient(&m, &[1.0], GradientMethod::Analytic), Err(Error::Shape(_))));
        assert!(matches!(m.evaluate_batch(&Matrix::zeros(2, 3)), Err(Error::Shape(_))));
    }
}
