//! Mehler kernels for the curvature harmonic oscillator and the closed-form
//! model fixed-point integral.
//!
//! The kernel is evaluated through the exterior-algebra engine, so one code
//! path serves both numeric antisymmetric `R` (embedded as degree-0 forms)
//! and nilpotent form-valued `R`.

use num_complex::Complex64;

use crate::forms::series::{det_inv_sqrt_one_minus, det_sqrt_x_over_sinh, exp_form, exp_matrix, x_over_sinh, x_over_tanh};
use crate::forms::{ExteriorElement, FormMatrix};
use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Harmonic-oscillator model: dimension, antisymmetric curvature matrix.
#[derive(Debug, Clone)]
pub struct MehlerModel {
    pub n: usize,
    /// `n×n` antisymmetric matrix with scalar-form entries.
    pub r: FormMatrix,
}

impl MehlerModel {
    pub fn numeric(n: usize, r: &[f64]) -> Result<Self> {
        for i in 0..n {
            for j in 0..n {
                if (r[i * n + j] + r[j * n + i]).abs() > 1e-13 {
                    return Err(Error::Degenerate("Mehler curvature must be antisymmetric".into()));
                }
            }
        }
        Ok(Self { n, r: FormMatrix::from_numeric(n, 0, r) })
    }

    pub fn form_valued(n: usize, r: FormMatrix) -> Self {
        Self { n, r }
    }
}

fn quad_form(m: &FormMatrix, x: &[f64], y: &[f64]) -> Result<ExteriorElement> {
    // <M x, y> = Σ_ij M_ij x_j y_i
    let mut acc = ExteriorElement::zero(m.cap, 1);
    for i in 0..m.m {
        for j in 0..m.m {
            let c = Complex64::new(x[j] * y[i], 0.0);
            acc = acc.add(&m.get(i, j).scale(c))?;
        }
    }
    Ok(acc)
}

/// Matrix functions of `tR/2` precomputed at fixed time, so quadrature loops
/// pay only the quadratic-form cost per point.
pub struct MehlerEval {
    n: usize,
    t: f64,
    a: FormMatrix,
    beu: FormMatrix,
    det_factor: ExteriorElement,
}

impl MehlerEval {
    pub fn prepare(model: &MehlerModel, t: f64) -> Result<Self> {
        if t <= 0.0 {
            return Err(Error::Degenerate("Mehler kernel needs t > 0".into()));
        }
        let u = model.r.scale(Complex64::new(t / 2.0, 0.0));
        let a = x_over_tanh(&u)?;
        let b = x_over_sinh(&u)?;
        let eu = exp_matrix(&u)?;
        let beu = b.mul(&eu)?;
        let det_factor = det_sqrt_x_over_sinh(&u)?;
        Ok(Self { n: model.n, t, a, beu, det_factor })
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<ExteriorElement> {
        let mut theta = quad_form(&self.a, x, x)?;
        theta = theta.add(&quad_form(&self.a, y, y)?)?;
        theta = theta.add(&quad_form(&self.beu, x, y)?.scale(Complex64::new(-2.0, 0.0)))?;
        let gauss = exp_form(&theta.scale(Complex64::new(-1.0 / (4.0 * self.t), 0.0)))?;
        let norm = (4.0 * PI * self.t).powf(-(self.n as f64) / 2.0);
        self.det_factor.wedge(&gauss).map(|e| e.scale(Complex64::new(norm, 0.0)))
    }
}

/// The Mehler kernel
/// `G_R(x,y,t) = (4πt)^{-n/2} det^{1/2}((tR/2)/sinh(tR/2)) e^{-Θ(x,y,t)/4t}`
/// with
/// `Θ = <(tR/2)/tanh(tR/2) x, x> + <(tR/2)/tanh(tR/2) y, y> - 2 <(tR/2)/sinh(tR/2) e^{tR/2} x, y>`.
///
/// At `R = 0` this is exactly the flat heat kernel.
pub fn mehler_kernel(model: &MehlerModel, x: &[f64], y: &[f64], t: f64) -> Result<ExteriorElement> {
    MehlerEval::prepare(model, t)?.eval(x, y)
}

/// Numeric-R fast path: the degree-0 value of [`mehler_kernel`].
pub fn mehler_numeric(model: &MehlerModel, x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    Ok(mehler_kernel(model, x, y, t)?.numeric_part().get(0, 0).re)
}

/// Apply the model harmonic oscillator `H_R = -Σ_i (∂_i + ¼ (Rx)_i)²` to a
/// numeric function by central finite differences.
///
/// This is the operator whose heat kernel is [`mehler_kernel`]; the oscillator
/// printed with the `√-1 R_{ij} x^j` convention matches it after the
/// curvature rescaling `R → -iR/4`. The PDE residual test pins the
/// normalization.
pub fn oscillator_apply<F>(r: &[f64], n: usize, f: F, x: &[f64], h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let rx = |x: &[f64], i: usize| -> f64 {
        (0..n).map(|j| r[i * n + j] * x[j]).sum::<f64>()
    };
    let mut acc = 0.0;
    for i in 0..n {
        // (∂_i + a_i)² f = ∂²_i f + ∂_i(a_i f) + a_i ∂_i f + a_i² f
        let mut xp = x.to_vec();
        xp[i] += h;
        let mut xm = x.to_vec();
        xm[i] -= h;
        let fpp = f(&xp);
        let fmm = f(&xm);
        let f0 = f(x);
        let d2 = (fpp - 2.0 * f0 + fmm) / (h * h);
        let d1 = (fpp - fmm) / (2.0 * h);
        let a_here = 0.25 * rx(x, i);
        let a_plus = 0.25 * rx(&xp, i);
        let a_minus = 0.25 * rx(&xm, i);
        let d_af = (a_plus * fpp - a_minus * fmm) / (2.0 * h);
        acc += d2 + d_af + a_here * d1 + a_here * a_here * f0;
    }
    -acc
}

/// Closed-form model fixed-point integral
/// `(4πst)^{-a/2} / det^{1/2}(1-γ|_N) · det^{1/2}((stR'/2)/sinh(stR'/2)) · det^{-1/2}(1-γ|_N e^{-stR''})`.
///
/// Cross-checkable against direct quadrature of the Mehler kernel over the
/// normal fiber.
pub fn model_fixed_point_integral(
    r_tan: &FormMatrix,
    r_norm: &FormMatrix,
    gamma_n: &[f64],
    s: f64,
    t: f64,
) -> Result<ExteriorElement> {
    if s <= 0.0 || t <= 0.0 {
        return Err(Error::Degenerate("model integral needs s, t > 0".into()));
    }
    let a = r_tan.m;
    let b = (gamma_n.len() as f64).sqrt().round() as usize;
    // det^{1/2}(1 - γ|_N) of the numeric rotation, positive root
    let mut one_minus = vec![0.0; b * b];
    for i in 0..b {
        for j in 0..b {
            one_minus[i * b + j] = if i == j { 1.0 } else { 0.0 } - gamma_n[i * b + j];
        }
    }
    let det_n = crate::group::det_f64(&one_minus, b);
    if det_n <= 1e-12 {
        return Err(Error::Degenerate("degenerate normal action in the model integral".into()));
    }
    let st = s * t;
    let tangential = det_sqrt_x_over_sinh(&r_tan.scale(Complex64::new(st / 2.0, 0.0)))?;
    let normal = det_inv_sqrt_one_minus(gamma_n, &r_norm.scale(Complex64::new(st, 0.0)))?;
    let prefactor = (4.0 * PI * st).powf(-(a as f64) / 2.0) / det_n.sqrt();
    tangential.wedge(&normal).map(|e| e.scale(Complex64::new(prefactor, 0.0)))
}
