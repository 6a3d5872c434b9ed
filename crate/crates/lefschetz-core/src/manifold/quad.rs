//! Quadrature: tensor midpoint and Gauss-Legendre rules over boxes, plus a
//! deterministic low-discrepancy sequence for dimensions where tensor grids
//! are too expensive.

use num_complex::Complex64;

use crate::exec::{map_sum, map_sum_c, ExecMode};
use crate::{Error, Result};

/// Quadrature rule selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Midpoint,
    /// Tensor Gauss-Legendre of the given order per axis.
    GaussLegendre(usize),
}

/// A tensor grid over a compact box, or a quasi-Monte Carlo sample.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub bounds: Vec<(f64, f64)>,
    pub rule: Rule,
    /// Points per axis for midpoint; panels per axis for Gauss-Legendre.
    pub resolution: usize,
    pub mode: ExecMode,
}

impl QuadratureGrid {
    pub fn midpoint(bounds: Vec<(f64, f64)>, resolution: usize) -> Self {
        Self { bounds, rule: Rule::Midpoint, resolution, mode: ExecMode::default() }
    }

    pub fn gauss(bounds: Vec<(f64, f64)>, order: usize, panels: usize) -> Self {
        Self { bounds, rule: Rule::GaussLegendre(order), resolution: panels, mode: ExecMode::default() }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// 1-d nodes/weights per axis.
    fn axis(&self, ax: usize) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.bounds[ax];
        match self.rule {
            Rule::Midpoint => {
                let m = self.resolution.max(1);
                let h = (b - a) / m as f64;
                let nodes = (0..m).map(|i| a + (i as f64 + 0.5) * h).collect();
                let weights = vec![h; m];
                (nodes, weights)
            }
            Rule::GaussLegendre(order) => {
                let (xs, ws) = gauss_legendre(order);
                let m = self.resolution.max(1);
                let h = (b - a) / m as f64;
                let mut nodes = Vec::with_capacity(order * m);
                let mut weights = Vec::with_capacity(order * m);
                for p in 0..m {
                    let (pa, pb) = (a + p as f64 * h, a + (p + 1) as f64 * h);
                    for (x, w) in xs.iter().zip(&ws) {
                        nodes.push(0.5 * (pb - pa) * x + 0.5 * (pa + pb));
                        weights.push(0.5 * (pb - pa) * w);
                    }
                }
                (nodes, weights)
            }
        }
    }

    fn axes(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, usize) {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut total = 1usize;
        for ax in 0..self.dim() {
            let (n, w) = self.axis(ax);
            total *= n.len();
            nodes.push(n);
            weights.push(w);
        }
        (nodes, weights, total)
    }

    /// Integrate a real integrand over the box.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let (nodes, weights, total) = self.axes();
        let dim = self.dim();
        let lens: Vec<usize> = nodes.iter().map(Vec::len).collect();
        let sum = map_sum(self.mode, total, |mut idx| {
            let mut x = vec![0.0; dim];
            let mut w = 1.0;
            for ax in 0..dim {
                let i = idx % lens[ax];
                idx /= lens[ax];
                x[ax] = nodes[ax][i];
                w *= weights[ax][i];
            }
            w * f(&x)
        });
        if sum.is_finite() {
            Ok(sum)
        } else {
            Err(Error::NonFinite("quadrature sum".into()))
        }
    }

    /// Integrate a complex integrand over the box.
    pub fn integrate_c<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let (nodes, weights, total) = self.axes();
        let dim = self.dim();
        let lens: Vec<usize> = nodes.iter().map(Vec::len).collect();
        let sum = map_sum_c(self.mode, total, |mut idx| {
            let mut x = vec![0.0; dim];
            let mut w = 1.0;
            for ax in 0..dim {
                let i = idx % lens[ax];
                idx /= lens[ax];
                x[ax] = nodes[ax][i];
                w *= weights[ax][i];
            }
            f(&x) * w
        });
        if sum.re.is_finite() && sum.im.is_finite() {
            Ok(sum)
        } else {
            Err(Error::NonFinite("quadrature sum".into()))
        }
    }

    /// Value together with an error estimate from resolution doubling.
    pub fn integrate_with_error<F>(&self, f: F) -> Result<(f64, f64)>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let coarse = self.integrate(&f)?;
        let fine = Self { resolution: self.resolution * 2, ..self.clone() }.integrate(&f)?;
        Ok((fine, (fine - coarse).abs()))
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }
}

/// Low-discrepancy points in a box from the additive golden-ratio recurrence
/// in `d` dimensions; `seed` offsets the sequence deterministically.
pub fn qmc_points(bounds: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = bounds.len();
    // generalized golden ratio: unique positive root of x^{d+1} = x + 1
    let mut phi = 1.5f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=d).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
    let shift = (seed as f64 * 0.754_877_666_246_692_9).fract();
    (0..count)
        .map(|k| {
            (0..d)
                .map(|j| {
                    let u = (shift + (k as f64 + 1.0) * alphas[j]).fract();
                    bounds[j].0 + (bounds[j].1 - bounds[j].0) * u
                })
                .collect()
        })
        .collect()
}

/// QMC integral of a complex integrand over a box.
pub fn qmc_integrate_c<F>(bounds: &[(f64, f64)], count: usize, seed: u64, mode: ExecMode, f: F) -> Complex64
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let pts = qmc_points(bounds, count, seed);
    let vol: f64 = bounds.iter().map(|(a, b)| b - a).product();
    let sum = map_sum_c(mode, pts.len(), |i| f(&pts[i]));
    sum * (vol / count as f64)
}

/// Nodes and weights of `n`-point Gauss-Legendre on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        // Newton from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // ascending nodes
    let mut pairs: Vec<(f64, f64)> = xs.into_iter().zip(ws).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function_integrates_to_zero() {
        let g = QuadratureGrid::midpoint(vec![(0.0, 1.0)], 16);
        assert_eq!(g.integrate(|_| 0.0).unwrap(), 0.0);
    }

    #[test]
    fn gauss_is_exact_on_polynomials() {
        // order-8 rule integrates degree <= 15 exactly
        let g = QuadratureGrid::gauss(vec![(0.0, 1.0)], 8, 1);
        let v = g.integrate(|x| x[0].powi(11)).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_normalization_2d() {
        // ∫ (4πt)^{-1} e^{-|x|²/4t} = 1 at t = 0.1
        let t = 0.1;
        let g = QuadratureGrid::gauss(vec![(-6.0, 6.0), (-6.0, 6.0)], 24, 3);
        let v = g
            .integrate(|x| {
                (-(x[0] * x[0] + x[1] * x[1]) / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t)
            })
            .unwrap();
        assert!((v - 1.0).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn midpoint_error_estimate_orders() {
        // halving the step shrinks the Gaussian-integral change like h^2
        let f = |x: &[f64]| (-x[0] * x[0]).exp();
        let coarse = QuadratureGrid::midpoint(vec![(-3.0, 3.0)], 50);
        let (_, e1) = coarse.integrate_with_error(f).unwrap();
        let fine = QuadratureGrid::midpoint(vec![(-3.0, 3.0)], 100);
        let (_, e2) = fine.integrate_with_error(f).unwrap();
        assert!(e2 < e1 / 3.0, "e1={e1}, e2={e2}");
    }

    #[test]
    fn qmc_hits_a_smooth_integral() {
        let v = qmc_integrate_c(&[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], 1 << 14, 7, ExecMode::default(), |x| {
            Complex64::new(x[0] * x[1] + x[2], 0.0)
        });
        assert!((v.re - 0.75).abs() < 2e-3, "got {v}");
    }

    #[test]
    fn non_finite_sample_is_an_error() {
        let g = QuadratureGrid::midpoint(vec![(0.0, 1.0)], 4);
        assert!(g.integrate(|x| 1.0 / (x[0] - x[0])).is_err());
    }
}
