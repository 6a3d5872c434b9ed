//! Localization of invariant Alexander-Spanier cochains to differential
//! forms on the fixed set.
//!
//! `Λ^γ(f)(x)(v_1…v_q) = (1/q!) Σ_τ sgn(τ) ∂_{ε_1}⋯∂_{ε_q}
//! f(x, x+ε_1 v_{τ(1)}, …, x+ε_q v_{τ(q)})|_0` (flat space, so `exp_x` is the
//! identity), computed by antisymmetrized mixed central differences with one
//! Richardson step. The composite `Ψ^γ = Λ^γ ∘ Ψ_inv` also has the analytic
//! closed form `Σ c(γ_0…γ_k) χ(γ_0^{-1}x) dχ(γ_1^{-1}x) ∧ ⋯ ∧ dχ(γ_k^{-1}x)`
//! on the fixed set, which is what the fixed-point evaluator uses.

use std::sync::Arc;

use num_complex::Complex64;

use crate::cochain::{permutations_signed, GroupCochain};
use crate::forms::{ExteriorElement, MatC};
use crate::manifold::{BumpCutoff, FixedComponent};
use crate::{Error, Result};

use super::InvariantASCochain;

/// Mixed first partial `∂_{ε_1}…∂_{ε_q} f(x, x+ε_1 w_1, …)|_0` by the
/// `2^q`-point central stencil at step `h`.
fn mixed_partial(
    f: &InvariantASCochain,
    x: &[f64],
    ws: &[Vec<f64>],
    h: f64,
) -> Complex64 {
    let q = ws.len();
    let n = x.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for signs in 0..(1usize << q) {
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(q + 1);
        pts.push(x.to_vec());
        let mut sgn = 1.0;
        for (i, w) in ws.iter().enumerate() {
            let s = if signs >> i & 1 == 0 { 1.0 } else { -1.0 };
            sgn *= s;
            let mut p = vec![0.0; n];
            for j in 0..n {
                p[j] = x[j] + s * h * w[j];
            }
            pts.push(p);
        }
        acc += f.eval(&pts) * sgn;
    }
    acc / Complex64::new((2.0 * h).powi(q as i32), 0.0)
}

/// `Λ^γ(f)` evaluated at `x ∈ M^γ` on tangent vectors of the component, with
/// Richardson extrapolation over steps `h` and `h/2`.
///
/// Degrees above the component dimension give the zero form; off-fixed-set
/// points are rejected.
pub fn lambda_fixed(
    f: &InvariantASCochain,
    comp: &FixedComponent,
    x: &[f64],
    vs: &[Vec<f64>],
    h: f64,
    gamma_act: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<Complex64> {
    let q = f.degree;
    if vs.len() != q {
        return Err(Error::Config(format!("Λ^γ in degree {q} needs {q} tangent vectors")));
    }
    let moved = gamma_act(x);
    if crate::group::dist(x, &moved) > 1e-9 {
        return Err(Error::Degenerate("Λ^γ evaluated off the fixed set".into()));
    }
    if q > comp.dim() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if q == 0 {
        return Ok(f.eval(&[x.to_vec()]));
    }
    let value_at = |h: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (perm, sgn) in permutations_signed(q) {
            let ws: Vec<Vec<f64>> = perm.iter().map(|&i| vs[i].clone()).collect();
            acc += mixed_partial(f, x, &ws, h) * sgn;
        }
        acc / Complex64::new(factorial(q), 0.0)
    };
    // central differences are O(h²): one Richardson step
    let d1 = value_at(h);
    let d2 = value_at(h / 2.0);
    Ok((d2 * 4.0 - d1) / 3.0)
}

fn factorial(q: usize) -> f64 {
    (1..=q).map(|i| i as f64).product::<f64>().max(1.0)
}

/// Value of `Ψ^γ(c)(x)(v_1…v_k)` from the analytic product rule: the sum of
/// `c(γ_0…γ_k) χ(γ_0^{-1}x) det[<∇(χ∘γ_i^{-1})(x), v_j>]` over carrier
/// tuples.
pub fn psi_gamma_value(
    c: &GroupCochain,
    chi: &Arc<BumpCutoff>,
    x: &[f64],
    vs: &[Vec<f64>],
) -> Result<Complex64> {
    let k = c.degree;
    if vs.len() != k {
        return Err(Error::Config("tangent vector count must match the degree".into()));
    }
    let carriers: Vec<crate::group::GroupElement> =
        chi.relevant_at(x).into_iter().cloned().collect();
    let m = carriers.len();
    // gradients paired against the frame, and weights, computed once
    let weights: Vec<f64> = carriers.iter().map(|g| chi.eval_translate(g, x)).collect();
    let pairings: Vec<Vec<f64>> = carriers
        .iter()
        .map(|g| {
            let grad = chi.grad_translate(g, x);
            vs.iter().map(|v| grad.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
        })
        .collect();
    let perms = permutations_signed(k);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut tuple = vec![0usize; k + 1];
    // odometer over carrier tuples (γ_0, …, γ_k)
    loop {
        let w0 = weights[tuple[0]];
        if w0 != 0.0 {
            let mut det = 0.0;
            for (perm, sgn) in &perms {
                let mut prod = *sgn;
                for (row, &col) in perm.iter().enumerate() {
                    prod *= pairings[tuple[row + 1]][col];
                    if prod == 0.0 {
                        break;
                    }
                }
                det += prod;
            }
            if det != 0.0 || k == 0 {
                let elems: Vec<crate::group::GroupElement> =
                    tuple.iter().map(|&i| carriers[i].clone()).collect();
                let factor = if k == 0 { w0 } else { w0 * det };
                acc += c.eval(&elems) * factor;
            }
        }
        let mut slot = 0;
        loop {
            tuple[slot] += 1;
            if tuple[slot] < m {
                break;
            }
            tuple[slot] = 0;
            slot += 1;
            if slot == k + 1 {
                return Ok(acc);
            }
        }
    }
}

/// `Ψ^γ(c)` as an exterior element in the tangent frame of a fixed
/// component: the coefficient on the index set `S` is the value on the frame
/// vectors indexed by `S`.
pub fn psi_gamma_form(
    c: &GroupCochain,
    chi: &Arc<BumpCutoff>,
    comp: &FixedComponent,
    x: &[f64],
) -> Result<ExteriorElement> {
    let a = comp.dim();
    let k = c.degree;
    let mut out = ExteriorElement::zero(a, 1);
    if k > a {
        return Ok(out);
    }
    // all index subsets of size k
    for mask in 0u32..(1 << a) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let vs: Vec<Vec<f64>> = (0..a)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| comp.tangent[i].clone())
            .collect();
        let v = psi_gamma_value(c, chi, x, &vs)?;
        out.set_coeff(mask, MatC::from_rows(1, vec![v]));
    }
    Ok(out)
}
