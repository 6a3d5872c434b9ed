//! Analytic functions of nilpotent form-valued arguments.
//!
//! Every function here reduces to a finite sum: a scalar form splits as
//! `z_0 + ν` with `ν` nilpotent, so `f(z_0 + ν) = Σ_j f^{(j)}(z_0) ν^j / j!`
//! stops at the ambient cap. Matrix arguments go through power series whose
//! numeric tails converge under a norm guard.

use num_complex::Complex64;

use super::{ExteriorElement, FormMatrix, MatC};
use crate::{Error, Result};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Taylor coefficients of `sinh(z)/z` (even series, returned as coefficients
/// of `z^{2k}`).
fn sinh_over_z(terms: usize) -> Vec<f64> {
    let mut out = vec![0.0; terms];
    let mut fact = 1.0f64; // (2k+1)!
    for (k, o) in out.iter_mut().enumerate() {
        if k > 0 {
            fact *= (2 * k) as f64 * (2 * k + 1) as f64;
        }
        *o = 1.0 / fact;
    }
    out
}

/// Taylor coefficients of `cosh(z)` in `z^{2k}`.
fn cosh_series(terms: usize) -> Vec<f64> {
    let mut out = vec![0.0; terms];
    let mut fact = 1.0f64; // (2k)!
    for (k, o) in out.iter_mut().enumerate() {
        if k > 0 {
            fact *= (2 * k - 1) as f64 * (2 * k) as f64;
        }
        *o = 1.0 / fact;
    }
    out
}

/// Multiplicative inverse of an even power series with `a_0 ≠ 0`.
fn series_inverse(a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; a.len()];
    b[0] = 1.0 / a[0];
    for n in 1..a.len() {
        let mut acc = 0.0;
        for k in 1..=n {
            acc += a[k] * b[n - k];
        }
        b[n] = -acc / a[0];
    }
    b
}

fn series_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for i in 0..a.len() {
        for j in 0..a.len() - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// Coefficients of `z/sinh(z)` in `z^{2k}`.
pub fn z_over_sinh_coeffs(terms: usize) -> Vec<f64> {
    series_inverse(&sinh_over_z(terms))
}

/// Coefficients of `z/tanh(z) = cosh(z) · (z/sinh(z))` in `z^{2k}`.
pub fn z_over_tanh_coeffs(terms: usize) -> Vec<f64> {
    series_product(&cosh_series(terms), &z_over_sinh_coeffs(terms))
}

/// Number of series terms needed for the numeric part plus the nilpotent cap.
fn term_budget(x: &FormMatrix) -> Result<usize> {
    let numeric_norm = x
        .entries
        .iter()
        .map(|e| e.numeric_part().norm())
        .fold(0.0, f64::max)
        * x.m as f64;
    if numeric_norm > 2.8 {
        return Err(Error::Degenerate(format!(
            "matrix series argument too large (norm ~ {numeric_norm:.3}); reduce t or the curvature scale"
        )));
    }
    Ok(40 + x.cap)
}

/// `X / sinh(X)` of a form-valued matrix, evaluated as an even series in `X²`.
pub fn x_over_sinh(x: &FormMatrix) -> Result<FormMatrix> {
    let budget = term_budget(x)?;
    let x2 = x.mul(x)?;
    let coeffs: Vec<Complex64> = z_over_sinh_coeffs(budget).into_iter().map(c).collect();
    x2.apply_series(&coeffs)
}

/// `X / tanh(X)` of a form-valued matrix.
pub fn x_over_tanh(x: &FormMatrix) -> Result<FormMatrix> {
    let budget = term_budget(x)?;
    let x2 = x.mul(x)?;
    let coeffs: Vec<Complex64> = z_over_tanh_coeffs(budget).into_iter().map(c).collect();
    x2.apply_series(&coeffs)
}

/// Matrix exponential `e^X` of a form-valued matrix.
pub fn exp_matrix(x: &FormMatrix) -> Result<FormMatrix> {
    let budget = 2 * term_budget(x)?;
    let mut coeffs = Vec::with_capacity(budget);
    let mut f = 1.0f64;
    for k in 0..budget {
        if k > 0 {
            f *= k as f64;
        }
        coeffs.push(c(1.0 / f));
    }
    x.apply_series(&coeffs)
}

/// `f(z_0 + ν) = Σ_j f^{(j)}(z_0) ν^j / j!` for a scalar form, with the
/// derivative callback supplying `f^{(j)}(z_0)`.
pub fn scalar_analytic<F>(omega: &ExteriorElement, derivs: F) -> Result<ExteriorElement>
where
    F: Fn(usize, Complex64) -> Complex64,
{
    assert_eq!(omega.d, 1);
    let z0 = omega.numeric_part().get(0, 0);
    let mut nil = omega.clone();
    nil.set_coeff(0, MatC::zeros(1));
    let mut out = ExteriorElement::zero(omega.cap, 1);
    let mut power = ExteriorElement::one(omega.cap, 1);
    let mut fact = 1.0;
    let steps = if nil.max_norm() == 0.0 {
        1
    } else {
        omega.cap / nil.min_degree(0.0).max(1) + 1
    };
    for j in 0..steps {
        if j > 0 {
            fact *= j as f64;
            power = power.wedge(&nil)?;
            if power.max_norm() == 0.0 {
                break;
            }
        }
        out = out.add(&power.scale(derivs(j, z0) / c(fact)))?;
    }
    Ok(out)
}

/// Principal square root: branch continuous to `+1` at argument 1, i.e. the
/// positive root on the positive reals.
pub fn sqrt_form(omega: &ExteriorElement) -> Result<ExteriorElement> {
    scalar_analytic(omega, |j, z| {
        // d^j/dz^j z^{1/2} = (1/2)(1/2-1)...(1/2-j+1) z^{1/2-j}
        let mut coef = c(1.0);
        for i in 0..j {
            coef *= c(0.5 - i as f64);
        }
        coef * z.powf(0.5 - j as f64)
    })
}

/// Inverse square root with the same branch convention.
pub fn inv_sqrt_form(omega: &ExteriorElement) -> Result<ExteriorElement> {
    scalar_analytic(omega, |j, z| {
        let mut coef = c(1.0);
        for i in 0..j {
            coef *= c(-0.5 - i as f64);
        }
        coef * z.powf(-0.5 - j as f64)
    })
}

/// Scalar exponential of a form.
pub fn exp_form(omega: &ExteriorElement) -> Result<ExteriorElement> {
    scalar_analytic(omega, |_, z| z.exp())
}

/// Scalar logarithm (principal branch at the numeric part).
pub fn log_form(omega: &ExteriorElement) -> Result<ExteriorElement> {
    scalar_analytic(omega, |j, z| match j {
        0 => z.ln(),
        _ => {
            // d^j/dz^j log z = (-1)^{j-1} (j-1)! z^{-j}
            let sgn = if (j - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let mut f = 1.0;
            for i in 1..j {
                f *= i as f64;
            }
            c(sgn * f) * z.powi(-(j as i32))
        }
    })
}

/// `det^{1/2}( X / sinh X )`, the square-rooted Jacobian factor of the
/// A-hat genus once `X` is the suitably scaled curvature.
pub fn det_sqrt_x_over_sinh(x: &FormMatrix) -> Result<ExteriorElement> {
    let f = x_over_sinh(x)?;
    sqrt_form(&f.det()?)
}

/// `det^{-1/2}(1 - Q e^{-Y})` with `Q` a numeric orthogonal matrix without
/// +1 eigenvalue and `Y` a form-valued matrix.
pub fn det_inv_sqrt_one_minus(q: &[f64], y: &FormMatrix) -> Result<ExteriorElement> {
    let m = y.m;
    let qm = FormMatrix::from_numeric(m, y.cap, q);
    let ey = exp_matrix(&y.scale(c(-1.0)))?;
    let mut one_minus = FormMatrix::identity(m, y.cap);
    one_minus = one_minus.add(&qm.mul(&ey)?.scale(c(-1.0)))?;
    let det = one_minus.det()?;
    let base = det.numeric_part().get(0, 0);
    if base.norm() < 1e-10 {
        return Err(Error::Degenerate(
            "degenerate normal action: det(1 - Q e^{-Y}) has vanishing numeric part".into(),
        ));
    }
    inv_sqrt_form(&det)
}
