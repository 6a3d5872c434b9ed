//! The equivariant fixed-point integrand
//! `Â(M^γ) ∧ det^{-1/2}(1 - γ|_N e^{-R^⊥/2πi}) ∧ Tr(γ|_V e^{-F^V/2πi})`
//! assembled from curvature data in the exterior algebra of the fixed set.

use num_complex::Complex64;

use super::series::{det_inv_sqrt_one_minus, det_sqrt_x_over_sinh, exp_matrix};
use super::{ExteriorElement, FormMatrix, MatC};
use crate::Result;

/// Curvature data of one fixed-point component.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    /// Dimension of the component (exterior cap).
    pub a: usize,
    /// `a×a` antisymmetric matrix of 2-forms: curvature of the tangent bundle.
    pub r_tangent: FormMatrix,
    /// `b×b` antisymmetric matrix of 2-forms: curvature of the normal bundle.
    pub r_normal: FormMatrix,
    /// Numeric orthogonal action of `γ` on the normal space (`b×b`,
    /// row-major), with no +1 eigenvalue.
    pub normal_rotation: Vec<f64>,
    /// `d×d` matrix of 2-forms: curvature of the auxiliary twist bundle.
    pub f_v: Vec<ExteriorElement>,
    /// Numeric action of `γ` on the twist fiber.
    pub gamma_v: MatC,
}

impl CurvatureData {
    /// Flat data: zero curvatures, given normal rotation and twist action.
    pub fn flat(a: usize, normal_rotation: Vec<f64>, gamma_v: MatC) -> Self {
        let b = (normal_rotation.len() as f64).sqrt().round() as usize;
        let d = gamma_v.d;
        Self {
            a,
            r_tangent: FormMatrix::zeros(a, a),
            r_normal: FormMatrix::zeros(b, a),
            normal_rotation,
            f_v: vec![ExteriorElement::zero(a, 1); d * d],
            gamma_v,
        }
    }

    fn antisymmetry_defect(m: &FormMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..m.m {
            for j in 0..m.m {
                let s = m
                    .get(i, j)
                    .add(m.get(j, i))
                    .map(|e| e.max_norm())
                    .unwrap_or(f64::INFINITY);
                worst = worst.max(s);
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        if Self::antisymmetry_defect(&self.r_tangent) > 1e-12
            || Self::antisymmetry_defect(&self.r_normal) > 1e-12
        {
            return Err(crate::Error::Degenerate("curvature matrices must be antisymmetric".into()));
        }
        Ok(())
    }
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `Â` factor: `det^{1/2}((R^T/4πi)/sinh(R^T/4πi))`.
pub fn a_hat(r_tangent: &FormMatrix) -> Result<ExteriorElement> {
    let scale = Complex64::new(0.0, -1.0 / (2.0 * TWO_PI)); // 1/(4πi)
    det_sqrt_x_over_sinh(&r_tangent.scale(scale))
}

/// Normal factor: `det^{-1/2}(1 - γ|_N e^{-R^⊥/2πi})`.
pub fn normal_factor(normal_rotation: &[f64], r_normal: &FormMatrix) -> Result<ExteriorElement> {
    let scale = Complex64::new(0.0, -1.0 / TWO_PI); // 1/(2πi)
    det_inv_sqrt_one_minus(normal_rotation, &r_normal.scale(scale))
}

/// Twist factor: `Tr(γ|_V e^{-F^V/2πi})`.
pub fn twist_factor(gamma_v: &MatC, f_v: &[ExteriorElement], a: usize) -> Result<ExteriorElement> {
    let d = gamma_v.d;
    // exponentiate the d×d matrix of forms entrywise via a FormMatrix
    let mut fm = FormMatrix::zeros(d, a);
    for i in 0..d {
        for j in 0..d {
            fm.set(i, j, f_v[i * d + j].scale(Complex64::new(0.0, -1.0 / TWO_PI)));
        }
    }
    let em = exp_matrix(&fm.scale(Complex64::new(-1.0, 0.0)))?;
    let mut tr = ExteriorElement::zero(a, 1);
    for i in 0..d {
        for k in 0..d {
            let g = gamma_v.get(i, k);
            if g.norm() == 0.0 {
                continue;
            }
            tr = tr.add(&em.get(k, i).scale(g))?;
        }
    }
    Ok(tr)
}

/// The full fixed-point integrand as an exterior element of cap `a`.
///
/// At zero curvature this reduces to
/// `det^{-1/2}(1 - γ|_N) · tr(γ_V)`.
pub fn as_gamma_form(cd: &CurvatureData) -> Result<ExteriorElement> {
    cd.validate()?;
    let ahat = a_hat(&cd.r_tangent)?;
    let norm = normal_factor(&cd.normal_rotation, &cd.r_normal)?;
    let tw = twist_factor(&cd.gamma_v, &cd.f_v, cd.a)?;
    ahat.wedge(&norm)?.wedge(&tw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn flat_point_reflection_gives_one_half() {
        // all curvatures 0, γ|_N = -1 in 2 normal dims, trivial twist
        let cd = CurvatureData::flat(0, vec![-1.0, 0.0, 0.0, -1.0], MatC::identity(1));
        let v = as_gamma_form(&cd).unwrap();
        assert!((v.numeric_part().get(0, 0) - c(0.5)).norm() < 1e-13);
    }

    #[test]
    fn identity_on_flat_space_gives_one() {
        let cd = CurvatureData::flat(2, vec![], MatC::identity(1));
        let v = as_gamma_form(&cd).unwrap();
        assert!((v.numeric_part().get(0, 0) - c(1.0)).norm() < 1e-13);
        assert_eq!(v.degree_part(2).max_norm(), 0.0);
    }

    #[test]
    fn quarter_rotation_gives_inverse_root_two() {
        // (2 sin(π/4))^{-1} = 1/sqrt(2)
        let th = std::f64::consts::FRAC_PI_2;
        let q = vec![th.cos(), -th.sin(), th.sin(), th.cos()];
        let cd = CurvatureData::flat(0, q, MatC::identity(1));
        let v = as_gamma_form(&cd).unwrap();
        assert!((v.numeric_part().get(0, 0) - c(1.0 / 2.0f64.sqrt())).norm() < 1e-13);
    }

    #[test]
    fn degenerate_normal_action_rejected() {
        let cd = CurvatureData::flat(0, vec![1.0, 0.0, 0.0, 1.0], MatC::identity(1));
        assert!(as_gamma_form(&cd).is_err());
    }

    #[test]
    fn twist_trace_scales_with_dimension() {
        let cd = CurvatureData::flat(0, vec![-1.0, 0.0, 0.0, -1.0], MatC::identity(3));
        let v = as_gamma_form(&cd).unwrap();
        assert!((v.numeric_part().get(0, 0) - c(1.5)).norm() < 1e-13);
    }
}
