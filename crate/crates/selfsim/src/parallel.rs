//! Worker pool. Every job is keyed by its index and results come back in
//! index order, so the worker count never changes the output.

use rayon::prelude::*;

use crate::error::CliError;

pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `workers = 0` picks the number of available cores.
    pub fn new(workers: usize) -> Result<Self, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// `f(0), .., f(n-1)` in order; the first error by index wins.
    pub fn map<T, E, F>(&self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync,
    {
        let all: Vec<Result<T, E>> = self.pool.install(|| (0..n).into_par_iter().map(&f).collect());
        all.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let out: Vec<usize> = Pool::new(4).unwrap().map(1000, |i| Ok::<_, ()>(i * i)).unwrap();
        assert!(out.iter().enumerate().all(|(i, v)| *v == i * i));
    }
}
