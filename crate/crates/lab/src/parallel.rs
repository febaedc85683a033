//! Row-partitioned parallel evaluation.

use std::sync::Arc;

use dgsm_core::{Error, Matrix, Model, Result};
use rayon::prelude::*;

/// Wraps a model so that `evaluate_batch` splits the rows into one
/// contiguous chunk per worker and evaluates the chunks on a thread pool.
///
/// Outputs keep row order, and each value depends only on its own row, so
/// results do not depend on the worker count.
pub struct Parallel<M> {
    inner: M,
    workers: usize,
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl<M: Model + Sync> Parallel<M> {
    pub fn new(inner: M, workers: usize) -> Result<Self> {
        let workers = workers.max(1);
        let pool = if workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Capacity(format!("cannot start {workers} workers: {e}")))?;
            Some(Arc::new(pool))
        } else {
            None
        };
        Ok(Self { inner, workers, pool })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn into_inner(self) -> M {
        self.inner
    }
}

/// Default worker count: the number of available processors.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl<M: Model + Sync> Model for Parallel<M> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.inner.evaluate(x)
    }

    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner.gradient(x)
    }

    fn evaluate_batch(&self, points: &Matrix) -> Result<Vec<f64>> {
        let Some(pool) = &self.pool else {
            return self.inner.evaluate_batch(points);
        };
        let (n, d) = (points.nrows(), points.ncols());
        if n < 2 * self.workers {
            return self.inner.evaluate_batch(points);
        }
        let rows_per_chunk = n.div_ceil(self.workers);
        let chunks: Vec<Matrix> = points
            .as_slice()
            .chunks(rows_per_chunk * d)
            .map(|c| Matrix::from_vec(c.len() / d, d, c.to_vec()))
            .collect::<Result<_>>()?;
        let parts: Vec<Vec<f64>> =
            pool.install(|| chunks.par_iter().map(|c| self.inner.evaluate_batch(c)).collect::<Result<_>>())?;
        Ok(parts.concat())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dgsm_core::models::{FloodOverflow, Linear};

    #[test]
    fn same_values_for_any_worker_count() {
        let points = Matrix::from_vec(
            997,
            8,
            (0..997 * 8)
                .map(|k| {
                    let base = [1013.0, 30.0, 50.0, 55.0, 8.0, 55.5, 5000.0, 300.0][k % 8];
                    base * (1.0 + 1e-3 * ((k * 37 % 101) as f64 / 101.0))
                })
                .collect(),
        )
        .unwrap();
        let serial = FloodOverflow.evaluate_batch(&points).unwrap();
        for workers in [1, 2, 3, 8] {
            let par = Parallel::new(FloodOverflow, workers).unwrap();
            assert_eq!(par.evaluate_batch(&points).unwrap(), serial, "{workers} workers");
        }
    }

    #[test]
    fn errors_propagate() {
        let par = Parallel::new(Linear::new(vec![1.0, 2.0]), 4).unwrap();
        assert!(par.evaluate_batch(&Matrix::zeros(100, 3)).is_err());
        assert_eq!(par.evaluate_batch(&Matrix::zeros(0, 2)).unwrap(), Vec::<f64>::new());
    }
}
