//! Unit-cube designs and the pick-freeze bundle built on them.

mod sobol_table;

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::distributions::InputSpace;
use crate::{Error, Matrix, Result};

pub use sobol_table::MAX_DIM as SOBOL_MAX_DIMENSION;

/// Values of exactly 0 or 1 are moved this far inside before the inverse CDF.
pub const TRANSFORM_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Generator {
    #[default]
    MonteCarlo,
    LatinHypercube,
    #[cfg_attr(feature = "serde", serde(alias = "sobol"))]
    SobolSequence,
}

/// Options for the Sobol' generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SobolOptions {
    /// Drop the all-zero first point.
    pub skip_first: bool,
    /// XOR every coordinate with a seeded random 32-bit mask (digital shift).
    pub digital_shift: bool,
}

impl Default for SobolOptions {
    fn default() -> Self {
        Self { skip_first: true, digital_shift: false }
    }
}

/// An `n × d` point set in `[0, 1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSample {
    pub points: Matrix,
    pub generator: Generator,
    pub seed: u64,
}

impl UnitSample {
    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn d(&self) -> usize {
        self.points.ncols()
    }
}

/// Seeded stream of `f64` in `[0, 1)` with 53 random bits each.
#[derive(Debug, Clone)]
pub struct UniformStream(ChaCha8Rng);

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        loop {
            let m = (self.0.next_u64() as u128) * (bound as u128);
            let low = m as u64;
            if low >= bound.wrapping_neg() % bound {
                return (m >> 64) as u64;
            }
        }
    }
}

/// Generate `n` points in `[0, 1)^d`; Sobol' points use [`SobolOptions::default`].
pub fn generate_unit(generator: Generator, n: usize, d: usize, seed: u64) -> Result<UnitSample> {
    generate_unit_with(generator, n, d, seed, SobolOptions::default())
}

pub fn generate_unit_with(
    generator: Generator,
    n: usize,
    d: usize,
    seed: u64,
    sobol: SobolOptions,
) -> Result<UnitSample> {
    if n == 0 || d == 0 {
        return Err(Error::Shape(alloc::format!("a design needs n, d ≥ 1 (got {n}x{d})")));
    }
    let points = match generator {
        Generator::MonteCarlo => monte_carlo(n, d, seed),
        Generator::LatinHypercube => latin_hypercube(n, d, seed),
        Generator::SobolSequence => sobol_points(n, d, seed, sobol)?,
    };
    Ok(UnitSample { points, generator, seed })
}

fn monte_carlo(n: usize, d: usize, seed: u64) -> Matrix {
    let mut rng = UniformStream::new(seed);
    let data = (0..n * d).map(|_| rng.next_f64()).collect();
    Matrix::from_vec(n, d, data).expect("shape is n*d")
}

fn latin_hypercube(n: usize, d: usize, seed: u64) -> Matrix {
    let mut rng = UniformStream::new(seed);
    let mut m = Matrix::zeros(n, d);
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..d {
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        // Fisher–Yates
        for i in (1..n).rev() {
            let k = rng.below(i as u64 + 1) as usize;
            perm.swap(i, k);
        }
        for i in 0..n {
            let u = (perm[i] as f64 + rng.next_f64()) / n as f64;
            // (k + u)/n can round up to 1.0 for the top stratum
            m.set(i, j, if u < 1.0 { u } else { 1.0 - f64::EPSILON / 2.0 });
        }
    }
    m
}

const SOBOL_BITS: usize = 32;

/// Direction numbers `v_k = m_k · 2^(32−k)` for one dimension (0-based).
fn direction_numbers(dim: usize) -> [u32; SOBOL_BITS] {
    let mut v = [0u32; SOBOL_BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1u32 << (31 - k);
        }
        return v;
    }
    let (s, a, m) = sobol_table::DIRECTIONS[dim - 1];
    let s = s as usize;
    for k in 0..s.min(SOBOL_BITS) {
        v[k] = m[k] << (31 - k);
    }
    for k in s..SOBOL_BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for l in 1..s {
            if (a >> (s - 1 - l)) & 1 == 1 {
                x ^= v[k - l];
            }
        }
        v[k] = x;
    }
    v
}

fn sobol_points(n: usize, d: usize, seed: u64, opts: SobolOptions) -> Result<Matrix> {
    if d > sobol_table::MAX_DIM {
        return Err(Error::Capacity(alloc::format!(
            "Sobol' direction numbers cover {} dimensions, {d} requested",
            sobol_table::MAX_DIM
        )));
    }
    let skip = usize::from(opts.skip_first);
    if (n + skip) as u64 > 1u64 << SOBOL_BITS {
        return Err(Error::Capacity(alloc::format!("{n} Sobol' points exceed 2^32")));
    }
    let directions: Vec<[u32; SOBOL_BITS]> = (0..d).map(direction_numbers).collect();
    let masks: Vec<u32> = if opts.digital_shift {
        let mut rng = UniformStream::new(seed);
        (0..d).map(|_| rng.next_u32()).collect()
    } else {
        alloc::vec![0; d]
    };

    let scale = 1.0 / (1u64 << SOBOL_BITS) as f64;
    let mut state = alloc::vec![0u32; d];
    let mut m = Matrix::zeros(n, d);
    // Gray-code order: point i+1 flips the direction number indexed by the
    // lowest zero bit of i.
    for i in 0..(n + skip) {
        if i >= skip {
            let row = m.row_mut(i - skip);
            for j in 0..d {
                row[j] = (state[j] ^ masks[j]) as f64 * scale;
            }
        }
        let c = (!(i as u64)).trailing_zeros() as usize;
        if c < SOBOL_BITS {
            for j in 0..d {
                state[j] ^= directions[j][c];
            }
        }
    }
    Ok(m)
}

/// Inverse-CDF transform of a unit sample through the marginals of `space`.
pub fn transform(u: &UnitSample, space: &InputSpace) -> Result<Matrix> {
    transform_points(&u.points, space)
}

pub fn transform_points(u: &Matrix, space: &InputSpace) -> Result<Matrix> {
    if u.ncols() != space.dimension() {
        return Err(Error::Shape(alloc::format!(
            "sample has {} columns, input space {}",
            u.ncols(),
            space.dimension()
        )));
    }
    let mut out = Matrix::zeros(u.nrows(), u.ncols());
    for i in 0..u.nrows() {
        let (src, dst) = (u.row(i), out.row_mut(i));
        for (j, (&p, x)) in src.iter().zip(dst.iter_mut()).enumerate() {
            let p = p.clamp(TRANSFORM_CLAMP, 1.0 - TRANSFORM_CLAMP);
            *x = space.marginal(j).quantile(p)?;
        }
    }
    Ok(out)
}

/// `A`, `B` and the `d` hybrids `A_B^(j)` (A with column `j` from B).
#[derive(Debug, Clone, PartialEq)]
pub struct PickFreezeDesign {
    pub a: Matrix,
    pub b: Matrix,
    pub ab: Vec<Matrix>,
}

impl PickFreezeDesign {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn d(&self) -> usize {
        self.a.ncols()
    }

    /// Model evaluations needed for the whole bundle: `n·(d + 2)`.
    pub fn evaluation_count(&self) -> usize {
        self.n() * (self.d() + 2)
    }
}

pub fn pick_freeze(
    u_a: &UnitSample,
    u_b: &UnitSample,
    space: &InputSpace,
) -> Result<PickFreezeDesign> {
    if u_a.points.nrows() != u_b.points.nrows() || u_a.points.ncols() != u_b.points.ncols() {
        return Err(Error::Shape(alloc::format!(
            "A is {}x{}, B is {}x{}",
            u_a.n(),
            u_a.d(),
            u_b.n(),
            u_b.d()
        )));
    }
    let a = transform(u_a, space)?;
    let b = transform(u_b, space)?;
    let ab = (0..a.ncols()).map(|j| a.with_column_from(&b, j)).collect::<Result<Vec<_>>>()?;
    Ok(PickFreezeDesign { a, b, ab })
}

/// Seeds of the `A` and `B` streams for replicate `r`.
pub fn replicate_seeds(seed_base: u64, r: u64) -> (u64, u64) {
    (seed_base.wrapping_add(2 * r), seed_base.wrapping_add(2 * r + 1))
}

/// Unit samples `(A, B)` for replicate `r`.
///
/// Random generators draw `A` and `B` from the two replicate seeds. The
/// Sobol' sequence instead takes one `2d`-dimensional point set and splits it
/// into halves, so `A` and `B` come from distinct coordinates of the same
/// low-discrepancy sequence; `shift` applies a digital shift seeded by the
/// replicate's `A` seed.
pub fn pick_freeze_units(
    generator: Generator,
    n: usize,
    d: usize,
    seed_base: u64,
    r: u64,
    shift: bool,
) -> Result<(UnitSample, UnitSample)> {
    let (seed_a, seed_b) = replicate_seeds(seed_base, r);
    match generator {
        Generator::SobolSequence => {
            let opts = SobolOptions { skip_first: true, digital_shift: shift };
            let both = generate_unit_with(generator, n, 2 * d, seed_a, opts)?;
            let (a, b) = both.points.split_columns(d);
            Ok((
                UnitSample { points: a, generator, seed: seed_a },
                UnitSample { points: b, generator, seed: seed_a },
            ))
        }
        _ => Ok((
            generate_unit(generator, n, d, seed_a)?,
            generate_unit(generator, n, d, seed_b)?,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Marginal;

    #[test]
    fn sobol_first_points_one_dimension() {
        let opts = SobolOptions { skip_first: false, digital_shift: false };
        let s = generate_unit_with(Generator::SobolSequence, 2, 1, 0, opts).unwrap();
        assert_eq!(s.points.as_slice(), &[0.0, 0.5]);
    }

    #[test]
    fn sobol_matches_reference_points() {
        // scipy.stats.qmc.Sobol(d=4, scramble=False).random(8), rows 1..7
        let expected = [
            [0.5, 0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25, 0.25],
            [0.25, 0.75, 0.75, 0.75],
            [0.375, 0.375, 0.625, 0.875],
            [0.875, 0.875, 0.125, 0.375],
            [0.625, 0.125, 0.875, 0.625],
            [0.125, 0.625, 0.375, 0.125],
        ];
        let s = generate_unit(Generator::SobolSequence, 7, 4, 0).unwrap();
        for (i, row) in expected.iter().enumerate() {
            assert_eq!(s.points.row(i), row, "row {i}");
        }
        // deeper into the table: point 1000, dimensions 21, 34 and 40
        let s = generate_unit(Generator::SobolSequence, 1000, 40, 0).unwrap();
        let row = s.points.row(999);
        assert_eq!([row[20], row[33], row[39]], [0.5224609375, 0.5927734375, 0.4794921875]);
    }

    #[test]
    fn sobol_capacity_error() {
        let r = generate_unit(Generator::SobolSequence, 4, SOBOL_MAX_DIMENSION + 1, 0);
        assert!(matches!(r, Err(Error::Capacity(_))));
    }

    #[test]
    fn latin_hypercube_stratification() {
        let s = generate_unit(Generator::LatinHypercube, 10, 3, 7).unwrap();
        for j in 0..3 {
            let mut strata: Vec<usize> = s.points.column(j).map(|u| (u * 10.0) as usize).collect();
            strata.sort_unstable();
            assert_eq!(strata, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn monte_carlo_mean() {
        let s = generate_unit(Generator::MonteCarlo, 10_000, 2, 11).unwrap();
        let mean = s.points.column(0).sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.015);
        assert!(s.points.as_slice().iter().all(|&u| (0.0..1.0).contains(&u)));
    }

    #[test]
    fn sobol_balance() {
        let s = generate_unit(Generator::SobolSequence, 1024, 5, 0).unwrap();
        for j in 0..5 {
            let mean = s.points.column(j).sum::<f64>() / 1024.0;
            assert!((mean - 0.5).abs() < 1e-3, "column {j}: {mean}");
        }
    }

    #[test]
    fn reproducible_for_identical_seeds() {
        for g in [Generator::MonteCarlo, Generator::LatinHypercube, Generator::SobolSequence] {
            let opts = SobolOptions { skip_first: true, digital_shift: true };
            let a = generate_unit_with(g, 100, 6, 5, opts).unwrap();
            let b = generate_unit_with(g, 100, 6, 5, opts).unwrap();
            assert_eq!(a, b);
        }
        let a = generate_unit(Generator::MonteCarlo, 10, 2, 1).unwrap();
        let b = generate_unit(Generator::MonteCarlo, 10, 2, 2).unwrap();
        assert_ne!(a.points, b.points);
    }

    #[test]
    fn transform_examples() {
        let mut u = Matrix::zeros(4, 3);
        for i in 0..4 {
            u.row_mut(i).copy_from_slice(&[0.5, 0.5, 0.841_344_746_068_542_9]);
        }
        let space = InputSpace::new([
            ("a", Marginal::uniform(7.0, 9.0).unwrap()),
            ("b", Marginal::exponential(4.0).unwrap()),
            ("c", Marginal::normal(0.0, 1.0).unwrap()),
        ])
        .unwrap();
        let x = transform_points(&u, &space).unwrap();
        for i in 0..4 {
            assert_eq!(x.get(i, 0), 8.0);
            assert!((x.get(i, 1) - 0.17329).abs() < 1e-5);
            assert!((x.get(i, 2) - 1.0).abs() < 1e-12);
        }
        // exact 0 and 1 are clamped rather than rejected
        let edge = Matrix::from_rows(&[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]).unwrap();
        let x = transform_points(&edge, &space).unwrap();
        assert!(x.as_slice().iter().all(|v| v.is_finite()));
        assert!(transform_points(&Matrix::zeros(1, 2), &space).is_err());
    }

    #[test]
    fn pick_freeze_examples() {
        let space = InputSpace::iid(2, Marginal::uniform(0.0, 1.0).unwrap()).unwrap();
        let ua = UnitSample {
            points: Matrix::from_rows(&[[0.1, 0.2]]).unwrap(),
            generator: Generator::MonteCarlo,
            seed: 0,
        };
        let ub = UnitSample {
            points: Matrix::from_rows(&[[0.3, 0.4]]).unwrap(),
            generator: Generator::MonteCarlo,
            seed: 1,
        };
        let pf = pick_freeze(&ua, &ub, &space).unwrap();
        assert_eq!(pf.ab[0].row(0), &[0.3, 0.2]);
        assert_eq!(pf.ab[1].row(0), &[0.1, 0.4]);
        assert_eq!(pf.evaluation_count(), 4);

        let space1 = InputSpace::iid(1, Marginal::uniform(0.0, 1.0).unwrap()).unwrap();
        let (ua, ub) = pick_freeze_units(Generator::MonteCarlo, 5, 1, 3, 0, false).unwrap();
        let pf = pick_freeze(&ua, &ub, &space1).unwrap();
        assert_eq!(pf.ab[0], pf.b);

        let short = generate_unit(Generator::MonteCarlo, 4, 2, 0).unwrap();
        let long = generate_unit(Generator::MonteCarlo, 5, 2, 0).unwrap();
        assert!(matches!(pick_freeze(&short, &long, &space), Err(Error::Shape(_))));
    }

    #[test]
    fn replicate_seed_policy() {
        assert_eq!(replicate_seeds(100, 0), (100, 101));
        assert_eq!(replicate_seeds(100, 3), (106, 107));
    }
}
