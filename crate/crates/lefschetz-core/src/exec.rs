//! Deterministic data-parallel helpers.
//!
//! Hot loops (quadrature grids, group-tuple sweeps) are expressed as indexed
//! maps. With the `parallel` feature the map runs on rayon; reduction always
//! happens afterwards in index order with compensated summation, so results
//! are bit-stable across thread counts and identical to the sequential path.

use num_complex::Complex64;

/// Execution strategy for indexed sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Plain sequential loop.
    Sequential,
    /// Rayon work-stealing loop (falls back to sequential without the
    /// `parallel` feature).
    #[default]
    Parallel,
}

/// Evaluate `f(0..n)` into a vector, in parallel when requested.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Neumaier-compensated sum in slice order.
pub fn sum_compensated(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated complex sum in slice order.
pub fn sum_compensated_c(xs: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = xs.iter().map(|z| z.re).collect();
    let im: Vec<f64> = xs.iter().map(|z| z.im).collect();
    Complex64::new(sum_compensated(&re), sum_compensated(&im))
}

/// Indexed map followed by deterministic compensated reduction.
pub fn map_sum<F>(mode: ExecMode, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    sum_compensated(&map_indexed(mode, n, f))
}

/// Complex variant of [`map_sum`].
pub fn map_sum_c<F>(mode: ExecMode, n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    sum_compensated_c(&map_indexed(mode, n, f))
}
