//! Marginal input laws and their Cheeger / Poincaré constants.
//!
//! A measure `ρ(x)dx = c·exp(−v(x))dx` on the real line satisfies the
//! one-dimensional Poincaré inequality `Var(u) ≤ C·E[u′²]` with
//! `C = 4·C₁²`, where `C₁ = sup_x min(F(x), 1 − F(x)) / ρ(x)` is the Cheeger
//! constant. For log-concave laws the supremum sits at the median, so
//! `C₁ = 1 / (2ρ(m))`. Closed forms exist for a handful of families; the rest
//! go through [`Marginal::cheeger_supremum`].

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use libm::{exp, expm1, log, log1p, pow, sqrt};

use crate::error::domain;
use crate::special::{
    beta_inc, gamma_p, gamma_q, invert_monotone, ln_gamma, normal_cdf, normal_pdf,
    normal_quantile, normal_sf, LN_LN_2,
};
use crate::{Error, Result};

/// Tolerance used by [`Marginal::poincare_constant`] when it has to fall back
/// to the numeric Cheeger constant.
pub const DEFAULT_CHEEGER_TOL: f64 = 1e-10;

/// Number of grid points scanned by the numeric Cheeger search.
pub const CHEEGER_GRID_POINTS: usize = 4096;

/// Tail mass excluded from the numeric Cheeger grid on each side.
pub const CHEEGER_GRID_TAIL: f64 = 1e-6;

/// A one-dimensional input distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Uniform { a: f64, b: f64 },
    Normal { mu: f64, sigma: f64 },
    /// Normal law restricted to `[lo, hi]`; `hi` may be `+∞`, `lo` may be `−∞`.
    TruncatedNormal { mu: f64, sigma: f64, lo: f64, hi: f64 },
    /// Rate parameterisation: mean `1/λ`.
    Exponential { lambda: f64 },
    Beta { alpha: f64, beta: f64 },
    /// Shape `alpha`, scale `beta`.
    Gamma { alpha: f64, beta: f64 },
    /// Maximum-value Gumbel with location `mu` and scale `beta`.
    Gumbel { mu: f64, beta: f64 },
    TruncatedGumbel { mu: f64, beta: f64, lo: f64, hi: f64 },
    /// Shape `k`, scale `lambda`.
    Weibull { k: f64, lambda: f64 },
    /// Support `[a, b]` with mode `c`.
    Triangular { a: f64, c: f64, b: f64 },
}

/// How a [`PoincareConstant`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CheegerMethod {
    /// A known optimal constant (Wirtinger for the uniform law, `σ²` for the Gaussian).
    SharpKnown,
    /// `4·C₁²` with a closed-form Cheeger constant.
    AnalyticCheeger,
    /// `4·C₁²` with the Cheeger constant located numerically.
    NumericCheeger,
}

/// Which constant to prefer when a sharper one than `4·C₁²` is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ConstantPolicy {
    #[default]
    PreferSharp,
    CheegerOnly,
}

/// Cheeger constant `c1` and the Poincaré constant `c` used in the bound.
///
/// Unless `method` is [`CheegerMethod::SharpKnown`], `c == 4·c1²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoincareConstant {
    pub c1: f64,
    pub c: f64,
    pub method: CheegerMethod,
}

impl PoincareConstant {
    fn from_cheeger(c1: f64, method: CheegerMethod) -> Self {
        Self { c1, c: 4.0 * c1 * c1, method }
    }
}

/// Result of the numeric Cheeger search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheegerSupremum {
    /// `sup_x min(F, 1 − F) / ρ`.
    pub value: f64,
    /// Where the supremum was found.
    pub location: f64,
    /// Spacing of the scan grid around `location`.
    pub grid_step: f64,
}

impl Marginal {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::Uniform { a, b }.validated()
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::Normal { mu, sigma }.validated()
    }

    pub fn truncated_normal(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::TruncatedNormal { mu, sigma, lo, hi }.validated()
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::Exponential { lambda }.validated()
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Self::Beta { alpha, beta }.validated()
    }

    pub fn gamma(alpha: f64, beta: f64) -> Result<Self> {
        Self::Gamma { alpha, beta }.validated()
    }

    pub fn gumbel(mu: f64, beta: f64) -> Result<Self> {
        Self::Gumbel { mu, beta }.validated()
    }

    pub fn truncated_gumbel(mu: f64, beta: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::TruncatedGumbel { mu, beta, lo, hi }.validated()
    }

    pub fn weibull(k: f64, lambda: f64) -> Result<Self> {
        Self::Weibull { k, lambda }.validated()
    }

    pub fn triangular(a: f64, c: f64, b: f64) -> Result<Self> {
        Self::Triangular { a, c, b }.validated()
    }

    /// Check the parameter constraints of the family.
    pub fn validated(self) -> Result<Self> {
        let finite = |v: f64| v.is_finite();
        let ok = match self {
            Marginal::Uniform { a, b } => finite(a) && finite(b) && a < b,
            Marginal::Normal { mu, sigma } => finite(mu) && finite(sigma) && sigma > 0.0,
            Marginal::TruncatedNormal { mu, sigma, lo, hi } => {
                finite(mu)
                    && finite(sigma)
                    && sigma > 0.0
                    && !lo.is_nan()
                    && !hi.is_nan()
                    && lo < hi
                    && normal_mass(mu, sigma, lo, hi) > 0.0
            }
            Marginal::Exponential { lambda } => finite(lambda) && lambda > 0.0,
            Marginal::Beta { alpha, beta } => {
                finite(alpha) && finite(beta) && alpha >= 1.0 && beta >= 1.0
            }
            Marginal::Gamma { alpha, beta } => {
                finite(alpha) && finite(beta) && alpha > 0.0 && beta > 0.0
            }
            Marginal::Gumbel { mu, beta } => finite(mu) && finite(beta) && beta > 0.0,
            Marginal::TruncatedGumbel { mu, beta, lo, hi } => {
                finite(mu)
                    && finite(beta)
                    && beta > 0.0
                    && !lo.is_nan()
                    && !hi.is_nan()
                    && lo < hi
                    && gumbel_cdf(mu, beta, hi) - gumbel_cdf(mu, beta, lo) > 0.0
            }
            Marginal::Weibull { k, lambda } => {
                finite(k) && finite(lambda) && k >= 1.0 && lambda > 0.0
            }
            Marginal::Triangular { a, c, b } => {
                finite(a) && finite(b) && finite(c) && a < b && a <= c && c <= b
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(domain!("invalid parameters for {}: {:?}", self.family(), self))
        }
    }

    /// Lower-case family name, as used in configuration files.
    pub fn family(&self) -> &'static str {
        match self {
            Marginal::Uniform { .. } => "uniform",
            Marginal::Normal { .. } => "normal",
            Marginal::TruncatedNormal { .. } => "truncated_normal",
            Marginal::Exponential { .. } => "exponential",
            Marginal::Beta { .. } => "beta",
            Marginal::Gamma { .. } => "gamma",
            Marginal::Gumbel { .. } => "gumbel",
            Marginal::TruncatedGumbel { .. } => "truncated_gumbel",
            Marginal::Weibull { .. } => "weibull",
            Marginal::Triangular { .. } => "triangular",
        }
    }

    /// Closed support `[lower, upper]`; bounds may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Marginal::Uniform { a, b } | Marginal::Triangular { a, b, .. } => (a, b),
            Marginal::Normal { .. } | Marginal::Gumbel { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Marginal::TruncatedNormal { lo, hi, .. } | Marginal::TruncatedGumbel { lo, hi, .. } => {
                (lo, hi)
            }
            Marginal::Exponential { .. } | Marginal::Gamma { .. } | Marginal::Weibull { .. } => {
                (0.0, f64::INFINITY)
            }
            Marginal::Beta { .. } => (0.0, 1.0),
        }
    }

    /// Whether the density is log-concave (convex potential).
    pub fn is_log_concave(&self) -> bool {
        match *self {
            Marginal::Gamma { alpha, .. } => alpha >= 1.0,
            // Beta and Weibull parameters are already restricted to the log-concave range.
            _ => true,
        }
    }

    /// Probability density; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        match *self {
            Marginal::Uniform { a, b } => 1.0 / (b - a),
            Marginal::Normal { mu, sigma } => normal_pdf((x - mu) / sigma) / sigma,
            Marginal::TruncatedNormal { mu, sigma, lo, hi } => {
                normal_pdf((x - mu) / sigma) / sigma / normal_mass(mu, sigma, lo, hi)
            }
            Marginal::Exponential { lambda } => lambda * exp(-lambda * x),
            Marginal::Beta { alpha, beta } => exp(
                (alpha - 1.0) * log(x) + (beta - 1.0) * log1p(-x) - ln_beta(alpha, beta),
            )
            .min(f64::MAX),
            Marginal::Gamma { alpha, beta } => {
                if x == 0.0 {
                    return if alpha == 1.0 {
                        1.0 / beta
                    } else if alpha < 1.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                }
                exp((alpha - 1.0) * log(x) - x / beta - ln_gamma(alpha) - alpha * log(beta))
            }
            Marginal::Gumbel { mu, beta } => gumbel_pdf(mu, beta, x),
            Marginal::TruncatedGumbel { mu, beta, lo, hi } => {
                gumbel_pdf(mu, beta, x) / (gumbel_cdf(mu, beta, hi) - gumbel_cdf(mu, beta, lo))
            }
            Marginal::Weibull { k, lambda } => {
                let t = x / lambda;
                k / lambda * pow(t, k - 1.0) * exp(-pow(t, k))
            }
            Marginal::Triangular { a, c, b } => {
                if x < c {
                    2.0 * (x - a) / ((b - a) * (c - a))
                } else if x > c {
                    2.0 * (b - x) / ((b - a) * (b - c))
                } else {
                    2.0 / (b - a)
                }
            }
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match *self {
            Marginal::Uniform { a, b } => (x - a) / (b - a),
            Marginal::Normal { mu, sigma } => normal_cdf((x - mu) / sigma),
            Marginal::TruncatedNormal { mu, sigma, lo, hi } => {
                let (zl, z) = ((lo - mu) / sigma, (x - mu) / sigma);
                if zl > 0.0 {
                    // upper tail: difference of survival functions keeps precision
                    (normal_sf(zl) - normal_sf(z)) / normal_mass(mu, sigma, lo, hi)
                } else {
                    (normal_cdf(z) - normal_cdf(zl)) / normal_mass(mu, sigma, lo, hi)
                }
            }
            Marginal::Exponential { lambda } => -expm1(-lambda * x),
            Marginal::Beta { alpha, beta } => beta_inc(alpha, beta, x),
            Marginal::Gamma { alpha, beta } => gamma_p(alpha, x / beta),
            Marginal::Gumbel { mu, beta } => gumbel_cdf(mu, beta, x),
            Marginal::TruncatedGumbel { mu, beta, lo, hi } => {
                let flo = gumbel_cdf(mu, beta, lo);
                (gumbel_cdf(mu, beta, x) - flo) / (gumbel_cdf(mu, beta, hi) - flo)
            }
            Marginal::Weibull { k, lambda } => -expm1(-pow(x / lambda, k)),
            Marginal::Triangular { a, c, b } => {
                if x <= c {
                    (x - a) * (x - a) / ((b - a) * (c - a))
                } else {
                    1.0 - (b - x) * (b - x) / ((b - a) * (b - c))
                }
            }
        }
    }

    /// Survival function `1 − F(x)`, computed directly where cancellation matters.
    pub fn sf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        match *self {
            Marginal::Normal { mu, sigma } => normal_sf((x - mu) / sigma),
            Marginal::TruncatedNormal { mu, sigma, lo, hi } => {
                let (z, zh) = ((x - mu) / sigma, (hi - mu) / sigma);
                if z > 0.0 {
                    (normal_sf(z) - normal_sf(zh)) / normal_mass(mu, sigma, lo, hi)
                } else {
                    (normal_cdf(zh) - normal_cdf(z)) / normal_mass(mu, sigma, lo, hi)
                }
            }
            Marginal::Exponential { lambda } => exp(-lambda * x),
            Marginal::Gamma { alpha, beta } => gamma_q(alpha, x / beta),
            Marginal::Gumbel { mu, beta } => -expm1(-exp(-(x - mu) / beta)),
            Marginal::Weibull { k, lambda } => exp(-pow(x / lambda, k)),
            Marginal::Triangular { a, c, b } if x > c => (b - x) * (b - x) / ((b - a) * (b - c)),
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Inverse CDF for `p ∈ (0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain!("quantile level {p} outside (0, 1)"));
        }
        Ok(match *self {
            Marginal::Uniform { a, b } => a + p * (b - a),
            Marginal::Normal { mu, sigma } => mu + sigma * normal_quantile(p),
            Marginal::TruncatedNormal { mu, sigma, lo, hi } => {
                let (zl, zh) = ((lo - mu) / sigma, (hi - mu) / sigma);
                let z = if zl > 0.0 {
                    let s = normal_sf(zl) - p * (normal_sf(zl) - normal_sf(zh));
                    -normal_quantile(s)
                } else {
                    let q = normal_cdf(zl) + p * (normal_cdf(zh) - normal_cdf(zl));
                    normal_quantile(q)
                };
                // a Newton polish in x-space removes the cancellation in q
                let x = (mu + sigma * z).clamp(lo, hi);
                self.polish(p, x)
            }
            Marginal::Exponential { lambda } => -log1p(-p) / lambda,
            Marginal::Beta { .. } => invert_monotone(|x| self.cdf(x), |x| self.pdf(x), p, 0.0, 1.0),
            Marginal::Gamma { alpha, beta } => {
                let mut hi = beta * (alpha + 10.0 * sqrt(alpha) + 10.0);
                while self.cdf(hi) < p {
                    hi *= 2.0;
                }
                invert_monotone(|x| self.cdf(x), |x| self.pdf(x), p, 0.0, hi)
            }
            Marginal::Gumbel { mu, beta } => mu - beta * log(-log(p)),
            Marginal::TruncatedGumbel { mu, beta, lo, hi } => {
                let flo = gumbel_cdf(mu, beta, lo);
                let q = flo + p * (gumbel_cdf(mu, beta, hi) - flo);
                let x = (mu - beta * log(-log(q))).clamp(lo, hi);
                self.polish(p, x)
            }
            Marginal::Weibull { k, lambda } => lambda * pow(-log1p(-p), 1.0 / k),
            Marginal::Triangular { a, c, b } => {
                let fc = (c - a) / (b - a);
                if p < fc {
                    a + sqrt(p * (b - a) * (c - a))
                } else {
                    b - sqrt((1.0 - p) * (b - a) * (b - c))
                }
            }
        })
    }

    // One Newton step on F(x) = p, used after transformations that lose digits.
    fn polish(&self, p: f64, x: f64) -> f64 {
        let density = self.pdf(x);
        if density > 0.0 && density.is_finite() {
            let (lo, hi) = self.support();
            (x - (self.cdf(x) - p) / density).clamp(lo, hi)
        } else {
            x
        }
    }

    /// Inverse-CDF sampling: maps a uniform draw `u ∈ (0, 1)` to the law.
    pub fn sample(&self, u: f64) -> Result<f64> {
        self.quantile(u)
    }

    /// The potential `v` with `ρ = c·exp(−v)`.
    ///
    /// Normal, exponential, beta, gamma, Gumbel and Weibull use the customary
    /// normalisation in which `exp(v(m))/2` is the Cheeger constant of a
    /// log-concave law; other families return `−ln ρ(x)`.
    pub fn potential(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return Err(domain!("{x} outside the support of {}", self.family()));
        }
        let v = match *self {
            Marginal::Normal { mu, sigma } => {
                (x - mu) * (x - mu) / (2.0 * sigma * sigma) + log(sigma)
            }
            Marginal::Exponential { lambda } => lambda * x - log(lambda),
            Marginal::Beta { alpha, beta } => (1.0 - alpha) * log(x) + (1.0 - beta) * log1p(-x),
            Marginal::Gamma { alpha, beta } => {
                (1.0 - alpha) * log(x) + ln_gamma(alpha) + x / beta + alpha * log(beta)
            }
            Marginal::Gumbel { mu, beta } => {
                let z = (x - mu) / beta;
                z + log(beta) + exp(-z)
            }
            Marginal::Weibull { k, lambda } => {
                log(lambda / k) + (1.0 - k) * log(x / lambda) + pow(x / lambda, k)
            }
            _ => -log(self.pdf(x)),
        };
        if v.is_nan() {
            return Err(domain!("potential undefined at {x}"));
        }
        Ok(v)
    }

    /// Median, from closed forms where they exist.
    pub fn median(&self) -> f64 {
        match *self {
            Marginal::Uniform { a, b } => 0.5 * (a + b),
            Marginal::Normal { mu, .. } => mu,
            Marginal::Exponential { lambda } => LN_2 / lambda,
            Marginal::Gumbel { mu, beta } => mu - beta * LN_LN_2,
            Marginal::Weibull { k, lambda } => lambda * pow(LN_2, 1.0 / k),
            // 0.5 is always a valid level
            _ => self.quantile(0.5).unwrap_or(f64::NAN),
        }
    }

    /// Closed-form Cheeger constant for the families that have one.
    ///
    /// The normal entry is the tabulated `σ/2`, which is `exp(v(m))/2` with
    /// `v` missing the `√(2π)` normalisation; the supremum formula itself
    /// gives `σ·√(π/2)`. Callers wanting a valid constant for the Gaussian
    /// should use [`Marginal::poincare_constant`].
    pub fn cheeger_analytic(&self) -> Option<f64> {
        match *self {
            Marginal::Normal { sigma, .. } => Some(sigma / 2.0),
            Marginal::Exponential { lambda } => Some(1.0 / lambda),
            Marginal::Gumbel { beta, .. } => Some(beta / LN_2),
            Marginal::Weibull { k, lambda } => Some(lambda * pow(LN_2, (1.0 - k) / k) / k),
            _ => None,
        }
    }

    /// `min(F(x), 1 − F(x)) / ρ(x)`.
    pub fn cheeger_ratio(&self, x: f64) -> f64 {
        let f = self.cdf(x);
        let tail = if f <= 0.5 { f } else { self.sf(x) };
        tail / self.pdf(x)
    }

    /// Numeric Cheeger constant `sup_x min(F, 1 − F)/ρ`.
    pub fn cheeger_numeric(&self, tol: f64) -> Result<f64> {
        self.cheeger_supremum(tol).map(|s| s.value)
    }

    /// Locate `sup_x min(F, 1 − F)/ρ`: a dense scan over the central quantile
    /// range, then golden-section refinement inside the two grid cells
    /// adjacent to the best node.
    pub fn cheeger_supremum(&self, tol: f64) -> Result<CheegerSupremum> {
        if let Marginal::Gamma { alpha, .. } = *self {
            if alpha < 1.0 {
                return Err(Error::UnsupportedMeasure(alloc::format!(
                    "gamma shape {alpha} < 1 has an unbounded density at 0"
                )));
            }
        }
        if !(tol > 0.0) {
            return Err(domain!("tolerance must be positive, got {tol}"));
        }
        let lo = self.quantile(CHEEGER_GRID_TAIL)?;
        let hi = self.quantile(1.0 - CHEEGER_GRID_TAIL)?;
        let grid = self.cheeger_grid(lo, hi);

        let mut ratios = Vec::with_capacity(grid.len());
        for &x in &grid {
            let h = self.cheeger_ratio(x);
            if !h.is_finite() {
                return Err(Error::UnsupportedMeasure(alloc::format!(
                    "density of {} vanishes at interior point {x}",
                    self.family()
                )));
            }
            ratios.push(h);
        }
        let best = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // leftmost node within round-off of the maximum, so flat tops
        // (the exponential upper half) resolve to their left edge
        let i = ratios.iter().position(|&h| h >= best * (1.0 - 1e-12)).unwrap_or(0);

        let mut value = ratios[i];
        let mut location = grid[i];
        if i > 0 {
            let (x, h) = golden_max(|x| self.cheeger_ratio(x), grid[i - 1], grid[i], tol);
            if h > value {
                value = h;
                location = x;
            }
        }
        if i + 1 < grid.len() {
            let (x, h) = golden_max(|x| self.cheeger_ratio(x), grid[i], grid[i + 1], tol);
            if h > value {
                value = h;
                location = x;
            }
        }
        let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
        let right = if i + 1 < grid.len() { grid[i + 1] - grid[i] } else { 0.0 };
        Ok(CheegerSupremum { value, location, grid_step: left.max(right) })
    }

    // Uniform grid on [lo, hi], with the density's kink (triangular mode)
    // inserted as a node so no refinement cell straddles it.
    fn cheeger_grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = CHEEGER_GRID_POINTS;
        let step = (hi - lo) / (n - 1) as f64;
        let mut grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        grid[n - 1] = hi;
        if let Marginal::Triangular { c, .. } = *self {
            if c > lo && c < hi {
                let pos = grid.partition_point(|&x| x < c);
                if grid[pos] != c {
                    grid.insert(pos, c);
                }
            }
        }
        grid
    }

    /// Poincaré constant `C(μ)` used in the bound `D_j^tot ≤ C·ν_j`.
    ///
    /// * `PreferSharp`: uniform → `(b − a)²/π²`, normal → `σ²`; everything else
    ///   `4·C₁²` from the closed form if any, otherwise numeric.
    /// * `CheegerOnly`: `4·C₁²` from the supremum formula for every law except
    ///   the uniform, which keeps `(b − a)²/π²`.
    pub fn poincare_constant(&self, policy: ConstantPolicy) -> Result<PoincareConstant> {
        match (*self, policy) {
            (Marginal::Uniform { a, b }, _) => Ok(PoincareConstant {
                c1: 0.5 * (b - a),
                c: (b - a) * (b - a) / (PI * PI),
                method: CheegerMethod::SharpKnown,
            }),
            (Marginal::Normal { sigma, .. }, ConstantPolicy::PreferSharp) => Ok(PoincareConstant {
                c1: sigma * sqrt(0.5 * PI),
                c: sigma * sigma,
                method: CheegerMethod::SharpKnown,
            }),
            (Marginal::Normal { .. }, ConstantPolicy::CheegerOnly) => {
                let c1 = self.cheeger_numeric(DEFAULT_CHEEGER_TOL)?;
                Ok(PoincareConstant::from_cheeger(c1, CheegerMethod::NumericCheeger))
            }
            _ => match self.cheeger_analytic() {
                Some(c1) => Ok(PoincareConstant::from_cheeger(c1, CheegerMethod::AnalyticCheeger)),
                None => {
                    let c1 = self.cheeger_numeric(DEFAULT_CHEEGER_TOL)?;
                    Ok(PoincareConstant::from_cheeger(c1, CheegerMethod::NumericCheeger))
                }
            },
        }
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let width0 = b - a;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a <= tol * width0 {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn normal_mass(mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let (zl, zh) = ((lo - mu) / sigma, (hi - mu) / sigma);
    if zl > 0.0 {
        normal_sf(zl) - normal_sf(zh)
    } else {
        normal_cdf(zh) - normal_cdf(zl)
    }
}

fn gumbel_pdf(mu: f64, beta: f64, x: f64) -> f64 {
    let z = (x - mu) / beta;
    exp(-z - exp(-z)) / beta
}

fn gumbel_cdf(mu: f64, beta: f64, x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    exp(-exp(-(x - mu) / beta))
}

/// `d` independent named marginals, `μ(x) = ∏ μ_j(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpace {
    names: Vec<String>,
    marginals: Vec<Marginal>,
}

impl InputSpace {
    pub fn new<S: Into<String>>(inputs: impl IntoIterator<Item = (S, Marginal)>) -> Result<Self> {
        let (names, marginals): (Vec<String>, Vec<Marginal>) =
            inputs.into_iter().map(|(n, m)| (n.into(), m)).unzip();
        if marginals.is_empty() {
            return Err(domain!("an input space needs at least one input"));
        }
        for m in &marginals {
            m.validated()?;
        }
        Ok(Self { names, marginals })
    }

    /// `d` inputs named `X1..Xd`, all following `marginal`.
    pub fn iid(d: usize, marginal: Marginal) -> Result<Self> {
        Self::new((1..=d).map(|j| (alloc::format!("X{j}"), marginal)))
    }

    pub fn dimension(&self) -> usize {
        self.marginals.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn marginal(&self, j: usize) -> &Marginal {
        &self.marginals[j]
    }

    pub fn constants(&self, policy: ConstantPolicy) -> Result<Vec<PoincareConstant>> {
        self.marginals.iter().map(|m| m.poincare_constant(policy)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use libm::fabs;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        fabs(a - b) <= tol
    }

    fn families() -> Vec<Marginal> {
        alloc::vec![
            Marginal::uniform(7.0, 9.0).unwrap(),
            Marginal::normal(0.5, 0.1).unwrap(),
            Marginal::truncated_normal(30.0, 8.0, 15.0, f64::INFINITY).unwrap(),
            Marginal::exponential(4.0).unwrap(),
            Marginal::beta(2.0, 3.5).unwrap(),
            Marginal::beta(1.0, 1.0).unwrap(),
            Marginal::gamma(2.5, 0.7).unwrap(),
            Marginal::gamma(1.0, 2.0).unwrap(),
            Marginal::gumbel(0.2, 0.2).unwrap(),
            Marginal::truncated_gumbel(1013.0, 558.0, 500.0, 3000.0).unwrap(),
            Marginal::weibull(2.0, 0.5).unwrap(),
            Marginal::weibull(1.0, 3.0).unwrap(),
            Marginal::triangular(49.0, 50.0, 51.0).unwrap(),
            Marginal::triangular(0.0, 0.2, 1.0).unwrap(),
        ]
    }

    #[test]
    fn pdf_examples() {
        let n = Marginal::normal(0.0, 1.0).unwrap();
        assert!(close(n.pdf(0.0), 0.398_942_280_4, 1e-10));
        let e = Marginal::exponential(4.0).unwrap();
        let m = LN_2 / 4.0;
        assert!(close(e.pdf(m), 2.0, 1e-12));
        assert_eq!(Marginal::uniform(0.0, 1.0).unwrap().pdf(0.5), 1.0);
        assert_eq!(e.pdf(-1.0), 0.0);
    }

    #[test]
    fn cdf_examples() {
        let e = Marginal::exponential(4.0).unwrap();
        assert!(close(e.cdf(0.25), 1.0 - (-1.0f64).exp(), 1e-15));
        assert_eq!(Marginal::uniform(7.0, 9.0).unwrap().cdf(8.0), 0.5);
        for m in families() {
            assert!(close(m.cdf(m.median()), 0.5, 1e-10), "{m:?}");
        }
    }

    #[test]
    fn quantile_examples() {
        let u = Marginal::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.quantile(0.25).unwrap(), 0.25);
        let w = Marginal::weibull(2.0, 0.5).unwrap();
        assert!(close(w.quantile(0.5).unwrap(), 0.5 * LN_2.sqrt(), 1e-15));
        assert!(close(w.quantile(0.5).unwrap(), 0.41628, 1e-5));
        let g = Marginal::gumbel(0.2, 0.2).unwrap();
        assert!(close(g.quantile(0.5).unwrap(), 0.273_303, 1e-6));
        assert!(matches!(u.quantile(0.0), Err(Error::Domain(_))));
        assert!(matches!(u.quantile(1.0), Err(Error::Domain(_))));
        assert!(u.quantile(f64::NAN).is_err());
    }

    #[test]
    fn sample_examples() {
        assert_eq!(Marginal::uniform(2.0, 4.0).unwrap().sample(0.5).unwrap(), 3.0);
        assert_eq!(Marginal::normal(0.5, 0.1).unwrap().sample(0.5).unwrap(), 0.5);
        let e = Marginal::exponential(4.0).unwrap().sample(0.5).unwrap();
        assert!(close(e, 0.17329, 1e-5));
    }

    #[test]
    fn potential_examples() {
        let (mu, sigma) = (1.3, 0.4);
        let n = Marginal::normal(mu, sigma).unwrap();
        assert!(close(n.potential(mu).unwrap(), sigma.ln(), 1e-15));
        let e = Marginal::exponential(3.0).unwrap();
        assert!(close(e.potential(0.0).unwrap(), -(3.0f64).ln(), 1e-15));
        let g = Marginal::gumbel(0.2, 0.2).unwrap();
        assert!(close(g.potential(0.2).unwrap(), (0.2f64).ln() + 1.0, 1e-15));
        assert!(e.potential(-1.0).is_err());
        // non-tabulated family falls back to −ln ρ
        let t = Marginal::triangular(0.0, 1.0, 2.0).unwrap();
        assert!(close(t.potential(1.0).unwrap(), 0.0, 1e-15));
    }

    #[test]
    fn tabulated_potentials_reproduce_cheeger_constants() {
        // exp(v(m))/2 equals C₁ for the families whose row normalises v like ρ
        for m in [
            Marginal::exponential(4.0).unwrap(),
            Marginal::gumbel(0.2, 0.2).unwrap(),
            Marginal::weibull(2.0, 0.5).unwrap(),
        ] {
            let c1 = exp(m.potential(m.median()).unwrap()) / 2.0;
            assert!(close(c1, m.cheeger_analytic().unwrap(), 1e-12), "{m:?}");
        }
    }

    #[test]
    fn median_examples() {
        assert!(close(Marginal::gumbel(0.2, 0.2).unwrap().median(), 0.273_303, 1e-6));
        assert!(close(Marginal::weibull(2.0, 0.5).unwrap().median(), 0.41628, 1e-5));
        assert!(close(Marginal::triangular(49.0, 50.0, 51.0).unwrap().median(), 50.0, 1e-12));
    }

    #[test]
    fn cheeger_analytic_examples() {
        assert_eq!(Marginal::normal(0.5, 0.1).unwrap().cheeger_analytic(), Some(0.05));
        assert_eq!(Marginal::exponential(4.0).unwrap().cheeger_analytic(), Some(0.25));
        let w = Marginal::weibull(2.0, 0.5).unwrap().cheeger_analytic().unwrap();
        assert!(close(w, 0.25 / LN_2.sqrt(), 1e-15));
        assert!(close(4.0 * w * w, 0.360, 1e-3));
        assert_eq!(Marginal::beta(2.0, 2.0).unwrap().cheeger_analytic(), None);
        assert_eq!(Marginal::gamma(2.0, 1.0).unwrap().cheeger_analytic(), None);
        assert_eq!(Marginal::uniform(0.0, 1.0).unwrap().cheeger_analytic(), None);
        let tn = Marginal::truncated_normal(0.0, 1.0, -1.0, 2.0).unwrap();
        assert_eq!(tn.cheeger_analytic(), None);
    }

    #[test]
    fn cheeger_numeric_examples() {
        let e = Marginal::exponential(1.0).unwrap();
        assert!(close(e.cheeger_numeric(1e-8).unwrap(), 1.0, 1e-8));
        let n = Marginal::normal(0.0, 1.0).unwrap();
        assert!(close(n.cheeger_numeric(1e-8).unwrap(), (PI / 2.0).sqrt(), 1e-8));
        let g = Marginal::gumbel(0.2, 0.2).unwrap();
        assert!(close(g.cheeger_numeric(1e-8).unwrap(), 0.2 / LN_2, 1e-8));
    }

    #[test]
    fn cheeger_numeric_unsupported_measure() {
        let g = Marginal::gamma(0.5, 1.0).unwrap();
        assert!(matches!(g.cheeger_numeric(1e-8), Err(Error::UnsupportedMeasure(_))));
    }

    #[test]
    fn log_concave_supremum_at_median() {
        for m in families() {
            if matches!(m, Marginal::Uniform { .. }) {
                continue;
            }
            let sup = m.cheeger_supremum(1e-10).unwrap();
            let at_median = 0.5 / m.pdf(m.median());
            assert!(
                fabs(sup.value - at_median) <= 1e-6 * at_median,
                "{m:?}: {} vs {at_median}",
                sup.value
            );
            assert!(fabs(sup.location - m.median()) <= sup.grid_step, "{m:?}");
        }
    }

    #[test]
    fn poincare_constant_examples() {
        let pc = |m: Marginal| m.poincare_constant(ConstantPolicy::PreferSharp).unwrap();
        let u = pc(Marginal::uniform(0.0, 1.0).unwrap());
        assert!(close(u.c, 0.101, 5e-4));
        assert_eq!(u.method, CheegerMethod::SharpKnown);
        let g = pc(Marginal::gumbel(0.2, 0.2).unwrap());
        assert!(close(g.c, 0.333, 5e-4));
        assert_eq!(pc(Marginal::exponential(4.0).unwrap()).c, 0.25);
        assert_eq!(pc(Marginal::normal(0.5, 0.1).unwrap()).c, 0.1 * 0.1);
    }

    #[test]
    fn cheeger_methods_satisfy_c_equals_four_c1_squared() {
        for policy in [ConstantPolicy::PreferSharp, ConstantPolicy::CheegerOnly] {
            for m in families() {
                let k = m.poincare_constant(policy).unwrap();
                assert!(k.c > 0.0);
                if k.method != CheegerMethod::SharpKnown {
                    assert_eq!(k.c, 4.0 * k.c1 * k.c1);
                }
            }
        }
    }

    #[test]
    fn sharp_never_exceeds_cheeger_only() {
        for m in [
            Marginal::normal(0.0, 2.0).unwrap(),
            Marginal::exponential(4.0).unwrap(),
            Marginal::gumbel(0.2, 0.2).unwrap(),
            Marginal::weibull(2.0, 0.5).unwrap(),
        ] {
            let sharp = m.poincare_constant(ConstantPolicy::PreferSharp).unwrap().c;
            let cheeger = m.poincare_constant(ConstantPolicy::CheegerOnly).unwrap().c;
            if matches!(m, Marginal::Normal { .. }) {
                assert!(sharp < cheeger);
                assert!(close(cheeger, 2.0 * PI * 4.0, 1e-6));
            } else {
                assert_eq!(sharp, cheeger);
            }
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        for m in families() {
            let (lo, hi) = m.support();
            let lo = if lo.is_finite() { lo } else { m.quantile(1e-17).unwrap() };
            let hi = if hi.is_finite() { hi } else { m.quantile(1.0 - 1e-16).unwrap() };
            // split at the median so kinks and peaks land on panel edges
            let med = m.median();
            let mut edges = alloc::vec![lo, med, hi];
            if let Marginal::Triangular { c, .. } = m {
                edges.push(c);
            }
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let total: f64 =
                edges.windows(2).map(|w| integrate_adaptive(|x| m.pdf(x), w[0], w[1], 1e-13)).sum();
            assert!(fabs(total - 1.0) < 1e-9, "{m:?}: {total}");
        }
    }

    #[test]
    fn quantile_cdf_round_trip() {
        for m in families() {
            let mut worst = 0.0f64;
            for k in 1..2000 {
                let p = k as f64 / 2000.0;
                let x = m.quantile(p).unwrap();
                worst = worst.max(fabs(m.cdf(x) - p));
            }
            for p in [1e-9, 1e-6, 1.0 - 1e-6, 1.0 - 1e-9] {
                worst = worst.max(fabs(m.cdf(m.quantile(p).unwrap()) - p));
            }
            assert!(worst < 1e-10, "{m:?}: {worst}");
        }
    }

    #[test]
    fn cdf_monotone_pdf_nonnegative() {
        for m in families() {
            let lo = m.quantile(1e-6).unwrap();
            let hi = m.quantile(1.0 - 1e-6).unwrap();
            let mut prev = 0.0;
            for i in 0..=500 {
                let x = lo + (hi - lo) * i as f64 / 500.0;
                let f = m.cdf(x);
                assert!(f >= prev, "{m:?}");
                assert!(m.pdf(x) >= 0.0);
                prev = f;
            }
        }
    }

    #[test]
    fn truncated_pdf_is_renormalised_parent() {
        let parent = Marginal::gumbel(1013.0, 558.0).unwrap();
        let t = Marginal::truncated_gumbel(1013.0, 558.0, 500.0, 3000.0).unwrap();
        let mass = parent.cdf(3000.0) - parent.cdf(500.0);
        assert!(close(t.pdf(1500.0), parent.pdf(1500.0) / mass, 1e-18));
        assert_eq!(t.pdf(499.0), 0.0);
        let parent = Marginal::normal(30.0, 8.0).unwrap();
        let t = Marginal::truncated_normal(30.0, 8.0, 15.0, f64::INFINITY).unwrap();
        let mass = 1.0 - parent.cdf(15.0);
        assert!(close(t.pdf(31.0), parent.pdf(31.0) / mass, 1e-16));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Marginal::uniform(1.0, 1.0).is_err());
        assert!(Marginal::normal(0.0, 0.0).is_err());
        assert!(Marginal::beta(0.5, 2.0).is_err());
        assert!(Marginal::weibull(0.5, 1.0).is_err());
        assert!(Marginal::triangular(0.0, 2.0, 1.0).is_err());
        assert!(Marginal::truncated_normal(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(InputSpace::new(Vec::<(String, Marginal)>::new()).is_err());
    }
}
