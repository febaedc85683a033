//! Simplified river-overflow model and the associated dyke cost.
//!
//! Inputs, in order: flow rate `Q`, Strickler coefficient `Ks`, downstream
//! and upstream river levels `Zv`, `Zm`, dyke height `Hd`, bank level `Cb`,
//! stretch length `L` and river width `B`.

use alloc::vec::Vec;

use libm::{exp, pow, sqrt};

use super::{check_point, Model};
use crate::distributions::{InputSpace, Marginal};
use crate::error::domain;
use crate::Result;

pub const FLOOD_INPUTS: [&str; 8] = ["Q", "Ks", "Zv", "Zm", "Hd", "Cb", "L", "B"];

const Q: usize = 0;
const KS: usize = 1;
const ZV: usize = 2;
const ZM: usize = 3;
const HD: usize = 4;
const CB: usize = 5;
const L: usize = 6;
const B: usize = 7;

/// River height `H = (Q / (B·Ks·√((Zm − Zv)/L)))^0.6`.
fn river_height(x: &[f64]) -> Result<f64> {
    if x[ZM] <= x[ZV] {
        return Err(domain!("upstream level {} not above downstream level {}", x[ZM], x[ZV]));
    }
    if x[Q] <= 0.0 || x[KS] <= 0.0 || x[B] <= 0.0 || x[L] <= 0.0 {
        return Err(domain!("Q, Ks, B and L must be positive"));
    }
    let slope = (x[ZM] - x[ZV]) / x[L];
    Ok(pow(x[Q] / (x[B] * x[KS] * sqrt(slope)), 0.6))
}

fn overflow(x: &[f64]) -> Result<f64> {
    Ok(x[ZV] + river_height(x)? - x[HD] - x[CB])
}

/// Maximal annual overflow `S = Zv + H − Hd − Cb` (metres).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FloodOverflow;

impl Model for FloodOverflow {
    fn name(&self) -> &str {
        "flood-overflow"
    }

    fn dimension(&self) -> usize {
        8
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_point(8, x)?;
        overflow(x)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(8, x)?;
        let h = river_height(x)?;
        let dz = x[ZM] - x[ZV];
        let mut g = alloc::vec![0.0; 8];
        g[Q] = 0.6 * h / x[Q];
        g[KS] = -0.6 * h / x[KS];
        g[ZV] = 1.0 + 0.3 * h / dz;
        g[ZM] = -0.3 * h / dz;
        g[HD] = -1.0;
        g[CB] = -1.0;
        g[L] = 0.3 * h / x[L];
        g[B] = -0.6 * h / x[B];
        Ok(g)
    }
}

/// Dyke cost in million euros:
/// `1{S>0} + [0.2 + 0.8(1 − exp(−1000/S⁴))]·1{S≤0} + max(Hd, 8)/20`.
///
/// At `S = 0` the bracket takes its limit value 1. Only finite-difference
/// gradients are available.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FloodCost;

pub(crate) fn dyke_cost(s: f64, hd: f64) -> f64 {
    let damage = if s > 0.0 {
        1.0
    } else {
        let s4 = s * s * s * s;
        // 1000/0 = inf and exp(-inf) = 0, which is the S → 0 limit
        0.2 + 0.8 * (1.0 - exp(-1000.0 / s4))
    };
    let investment = if hd > 8.0 { hd } else { 8.0 };
    damage + investment / 20.0
}

impl Model for FloodCost {
    fn name(&self) -> &str {
        "flood-cost"
    }

    fn dimension(&self) -> usize {
        8
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_point(8, x)?;
        Ok(dyke_cost(overflow(x)?, x[HD]))
    }
}

/// The input laws of the flood study, in [`FLOOD_INPUTS`] order.
pub fn flood_inputs() -> InputSpace {
    let marginals = [
        Marginal::TruncatedGumbel { mu: 1013.0, beta: 558.0, lo: 500.0, hi: 3000.0 },
        Marginal::TruncatedNormal { mu: 30.0, sigma: 8.0, lo: 15.0, hi: f64::INFINITY },
        Marginal::Triangular { a: 49.0, c: 50.0, b: 51.0 },
        Marginal::Triangular { a: 54.0, c: 55.0, b: 56.0 },
        Marginal::Uniform { a: 7.0, b: 9.0 },
        Marginal::Triangular { a: 55.0, c: 55.5, b: 56.0 },
        Marginal::Triangular { a: 4990.0, c: 5000.0, b: 5010.0 },
        Marginal::Triangular { a: 295.0, c: 300.0, b: 305.0 },
    ];
    InputSpace::new(FLOOD_INPUTS.into_iter().zip(marginals)).expect("valid flood marginals")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gradient, GradientMethod};

    const NOMINAL: [f64; 8] = [1013.0, 30.0, 50.0, 55.0, 8.0, 55.5, 5000.0, 300.0];

    #[test]
    fn overflow_at_nominal_point() {
        // H = (1013 / (300·30·√0.001))^0.6, evaluated independently
        let h = (1013.0f64 / (300.0 * 30.0 * 0.001f64.sqrt())).powf(0.6);
        assert!((h - 2.1421).abs() < 1e-4);
        let s = FloodOverflow.evaluate(&NOMINAL).unwrap();
        assert!((s - (50.0 + h - 8.0 - 55.5)).abs() < 1e-12);
        assert!((s + 11.358).abs() < 1e-3);
    }

    #[test]
    fn linear_terms_have_unit_slope() {
        let g = FloodOverflow.gradient(&NOMINAL).unwrap();
        assert_eq!(g[HD], -1.0);
        assert_eq!(g[CB], -1.0);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let exact = FloodOverflow.gradient(&NOMINAL).unwrap();
        let fine = GradientMethod::ForwardFd { relative_step: 1e-6, absolute_floor: 1e-8 };
        // the default 1e-4 step moves Zm − Zv by 0.1 %, hence the looser bound
        for (method, tol) in [(fine, 1e-4), (GradientMethod::central(), 1e-6), (GradientMethod::default(), 1e-3)] {
            let fd = gradient(&FloodOverflow, &NOMINAL, method).unwrap();
            for (e, f) in exact.iter().zip(&fd) {
                assert!((e - f).abs() <= tol * e.abs(), "{method:?}: {e} vs {f}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        let mut x = NOMINAL;
        x[ZM] = 49.0;
        assert!(FloodOverflow.evaluate(&x).is_err());
        let mut x = NOMINAL;
        x[Q] = 0.0;
        assert!(FloodOverflow.evaluate(&x).is_err());
        assert!(FloodCost.evaluate(&x).is_err());
    }

    #[test]
    fn cost_examples() {
        let c = FloodCost.evaluate(&NOMINAL).unwrap();
        let s: f64 = -11.357_996_571_882;
        let expected = 0.2 + 0.8 * (1.0 - (-1000.0 / s.powi(4)).exp()) + 0.4;
        assert!((c - expected).abs() < 1e-6);
        assert!((c - 0.6467).abs() < 1e-4);
        assert_eq!(dyke_cost(0.3, 7.5), 1.4);
        assert_eq!(dyke_cost(0.3, 9.0), 1.45);
        assert_eq!(dyke_cost(0.0, 8.0), 1.4);
        assert_eq!(dyke_cost(-0.0, 8.0), 1.4);
    }
}
