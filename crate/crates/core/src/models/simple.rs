use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::{check_point, Model};
use crate::Result;

/// `f(x) = Σ a_j x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    coefficients: Vec<f64>,
}

impl Linear {
    pub fn new(coefficients: Vec<f64>) -> Self {
        assert!(!coefficients.is_empty(), "a linear model needs at least one coefficient");
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

impl Model for Linear {
    fn name(&self) -> &str {
        "linear"
    }

    fn dimension(&self) -> usize {
        self.coefficients.len()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_point(self.dimension(), x)?;
        Ok(self.coefficients.iter().zip(x).map(|(a, x)| a * x).sum())
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(self.dimension(), x)?;
        Ok(self.coefficients.clone())
    }
}

/// `f(x₁, x₂) = x₁ + x₂ + x₁x₂`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Interaction;

impl Model for Interaction {
    fn name(&self) -> &str {
        "interaction"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_point(2, x)?;
        Ok(x[0] + x[1] + x[0] * x[1])
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(2, x)?;
        Ok(alloc::vec![1.0 + x[1], 1.0 + x[0]])
    }
}

type Scalar = dyn Fn(&[f64]) -> Result<f64> + Send + Sync;
type Vector = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;

/// A model backed by closures.
pub struct FnModel {
    name: String,
    dimension: usize,
    f: Box<Scalar>,
    grad: Option<Box<Vector>>,
}

impl FnModel {
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        f: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), dimension, f: Box::new(f), grad: None }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Box::new(grad));
        self
    }
}

impl core::fmt::Debug for FnModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnModel")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("gradient", &self.grad.is_some())
            .finish()
    }
}

impl Model for FnModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_point(self.dimension, x)?;
        (self.f)(x)
    }

    fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(self.dimension, x)?;
        match &self.grad {
            Some(g) => g(x),
            None => Err(crate::Error::Capability(alloc::format!(
                "{} has no analytic gradient",
                self.name
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_examples() {
        let m = Linear::new(alloc::vec![1.0, 1.0]);
        assert_eq!(m.evaluate(&[0.3, 0.7]).unwrap(), 1.0);
        assert_eq!(m.gradient(&[5.0, -3.0]).unwrap(), alloc::vec![1.0, 1.0]);
    }

    #[test]
    fn interaction_examples() {
        assert_eq!(Interaction.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(Interaction.evaluate(&[0.5, 2.0]).unwrap(), 3.5);
        assert_eq!(Interaction.gradient(&[0.5, 2.0]).unwrap(), alloc::vec![3.0, 1.5]);
    }
}
