//! The 20-input Morris test function.
//!
//! `y = β₀ + Σ βᵢwᵢ + Σ βᵢⱼwᵢwⱼ + Σ βᵢⱼₗwᵢwⱼwₗ + Σ βᵢⱼₗₛwᵢwⱼwₗwₛ` with
//! `wᵢ = 2(xᵢ − 1/2)`, except for inputs 3, 5 and 7 (1-based) where
//! `wᵢ = 2(1.1·xᵢ/(xᵢ + δ) − 1/2)`. The classical definition uses `δ = 0.1`.
//!
//! Fixed coefficients: `βᵢ = 20` for `i ≤ 10`, `βᵢⱼ = −15` for `i < j ≤ 6`,
//! `βᵢⱼₗ = −10` for `i < j < l ≤ 5`, `β₁₂₃₄ = 5`. The other first- and
//! second-order coefficients are standard normal draws from a seeded stream;
//! remaining third- and fourth-order coefficients are zero, and `β₀ = 0`.

use alloc::vec::Vec;

use super::{check_point, Model};
use crate::distributions::{InputSpace, Marginal};
use crate::sampling::UniformStream;
use crate::special::normal_quantile;
use crate::Result;

pub const MORRIS_DIMENSION: usize = 20;
pub const DEFAULT_COEFF_SEED: u64 = 42;
/// `δ` in the rational transform of inputs 3, 5 and 7.
pub const CLASSICAL_OFFSET: f64 = 0.1;

const D: usize = MORRIS_DIMENSION;
const RATIONAL: [usize; 3] = [2, 4, 6];

#[derive(Debug, Clone, PartialEq)]
pub struct Morris {
    first: [f64; D],
    // upper triangle, second[i * D + j] for i < j
    second: Vec<f64>,
    offset: f64,
    coeff_seed: u64,
}

impl Morris {
    pub fn new(coeff_seed: u64) -> Self {
        Self::with_offset(coeff_seed, CLASSICAL_OFFSET)
    }

    /// Morris function with `wᵢ = 2(1.1·xᵢ/(xᵢ + offset) − 1/2)` for inputs 3, 5, 7.
    pub fn with_offset(coeff_seed: u64, offset: f64) -> Self {
        assert!(offset > 0.0, "offset must be positive");
        // Standard normals by inverse CDF of the seeded uniform stream:
        // first-order β₁₁..β₂₀, then second-order pairs in lexicographic order.
        let mut stream = UniformStream::new(coeff_seed);
        let mut normal = move || loop {
            let u = stream.next_f64();
            if u > 0.0 {
                return normal_quantile(u);
            }
        };
        let mut first = [20.0; D];
        for b in first.iter_mut().skip(10) {
            *b = normal();
        }
        let mut second = alloc::vec![0.0; D * D];
        for i in 0..D {
            for j in (i + 1)..D {
                second[i * D + j] = if j < 6 { -15.0 } else { normal() };
            }
        }
        Self { first, second, offset, coeff_seed }
    }

    pub fn coeff_seed(&self) -> u64 {
        self.coeff_seed
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `βᵢ` (0-based).
    pub fn first_order(&self, i: usize) -> f64 {
        self.first[i]
    }

    /// `βᵢⱼ` (0-based, symmetric).
    pub fn second_order(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if a == b {
            0.0
        } else {
            self.second[a * D + b]
        }
    }

    fn transformed(&self, x: &[f64]) -> ([f64; D], [f64; D]) {
        let mut w = [0.0; D];
        let mut dw = [2.0; D];
        for i in 0..D {
            w[i] = 2.0 * (x[i] - 0.5);
        }
        for &i in &RATIONAL {
            let denom = x[i] + self.offset;
            w[i] = 2.0 * (1.1 * x[i] / denom - 0.5);
            dw[i] = 2.2 * self.offset / (denom * denom);
        }
        (w, dw)
    }
}

impl Default for Morris {
    fn default() -> Self {
        Self::new(DEFAULT_COEFF_SEED)
    }
}

impl Model for Morris {
    fn name(&self) -> &str {
        "morris"
    }

    fn dimension(&self) -> usize {
        D
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_point(D, x)?;
        let (w, _) = self.transformed(x);
        let mut y = 0.0;
        for i in 0..D {
            let row = &self.second[i * D..(i + 1) * D];
            let mut inner = 0.0;
            for j in (i + 1)..D {
                inner += row[j] * w[j];
            }
            y += w[i] * (self.first[i] + inner);
        }
        for i in 0..5 {
            for j in (i + 1)..5 {
                for l in (j + 1)..5 {
                    y -= 10.0 * w[i] * w[j] * w[l];
                }
            }
        }
        y += 5.0 * w[0] * w[1] * w[2] * w[3];
        Ok(y)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_point(D, x)?;
        let (w, dw) = self.transformed(x);
        let mut g = alloc::vec![0.0; D];
        for k in 0..D {
            let mut dy = self.first[k];
            for j in 0..D {
                if j != k {
                    dy += self.second_order(k, j) * w[j];
                }
            }
            if k < 5 {
                for i in 0..5 {
                    for j in (i + 1)..5 {
                        if i != k && j != k {
                            dy -= 10.0 * w[i] * w[j];
                        }
                    }
                }
            }
            if k < 4 {
                dy += 5.0 * (0..4).filter(|&i| i != k).map(|i| w[i]).product::<f64>();
            }
            g[k] = dy * dw[k];
        }
        Ok(g)
    }
}

/// Input laws for the Morris study: the pattern uniform, normal, exponential,
/// Gumbel, Weibull, then five uniforms, repeated for inputs 11–20.
pub fn morris_inputs() -> InputSpace {
    let pattern = [
        Marginal::Uniform { a: 0.0, b: 1.0 },
        Marginal::Normal { mu: 0.5, sigma: 0.1 },
        Marginal::Exponential { lambda: 4.0 },
        Marginal::Gumbel { mu: 0.2, beta: 0.2 },
        Marginal::Weibull { k: 2.0, lambda: 0.5 },
    ];
    let uniform = Marginal::Uniform { a: 0.0, b: 1.0 };
    InputSpace::new((0..D).map(|i| {
        let m = if i % 10 < 5 { pattern[i % 10] } else { uniform };
        (alloc::format!("X{}", i + 1), m)
    }))
    .expect("valid Morris marginals")
}
