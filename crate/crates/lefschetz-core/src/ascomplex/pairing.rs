//! Kernel pairings of the Alexander-Spanier complexes: `ρ`, `ρ_inv`, and the
//! cyclic-side `Φ`, with certified truncation tails.
//!
//! Every group sum is truncated at a word radius; the discarded tail is
//! bounded by the geometric-series estimate assembled from the kernels'
//! exponential-control certificates, the Milnor-Svarc constants of the
//! cutoff box, the tuple-counting constants, and the cochain's growth
//! certificate. The bound is conservative and printed alongside results.

use num_complex::Complex64;

use crate::cochain::{CyclicCochain, GrowthCertificate};
use crate::exec::ExecMode;
use crate::group::{ConjugacyContext, GroupElement, MilnorSvarc};
use crate::manifold::{BumpCutoff, QuadratureGrid};
use crate::{Error, Result};

use super::kernels::EquivariantKernel;
use super::{ExtendedASCochain, InvariantASCochain};

/// Quadrature and truncation budget for a pairing evaluation.
#[derive(Debug, Clone)]
pub struct PairingBudget {
    /// Gauss-Legendre order per axis.
    pub gl_order: usize,
    /// Panels per axis.
    pub panels: usize,
    /// Extra reach added around support boxes for inner integration
    /// variables, covering the kernel decay range.
    pub reach: f64,
    /// Word-length truncation radius for group sums.
    pub trunc_radius: usize,
    pub mode: ExecMode,
}

impl Default for PairingBudget {
    fn default() -> Self {
        Self { gl_order: 16, panels: 2, reach: 3.0, trunc_radius: 6, mode: ExecMode::default() }
    }
}

/// Conservative tail bound
/// `A(N, t) = V^{k+1} A_c Πα_i · t^{-Σβ_i} e^{ηκ/t} C_γ Σ_{n>N} e^{(K_c+K_γ - ητ/t) n}`
/// for the group-tuple sum truncated at `|I|_γ ≤ N`.
#[derive(Debug, Clone)]
pub struct TailModel {
    pub growth: GrowthCertificate,
    pub ms: MilnorSvarc,
    /// Counting constants `(C_γ, K_γ)` for the tuple count.
    pub count_c: f64,
    pub count_k: f64,
    /// Product of kernel `α_i`, sum of `β_i`, min of `η_i`.
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    /// `vol(supp χ)^{k+1}`.
    pub volume: f64,
}

impl TailModel {
    pub fn assemble(
        ctx: &ConjugacyContext,
        growth: GrowthCertificate,
        ms: MilnorSvarc,
        kernels: &[EquivariantKernel],
        chi_volume: f64,
        k: usize,
    ) -> Self {
        let (count_c, count_k) = ctx.counting_constants(k, growth.validation_radius.max(4));
        let alpha = kernels.iter().map(|kk| kk.decay.alpha).product();
        let beta = kernels.iter().map(|kk| kk.decay.beta).sum();
        let eta = kernels.iter().map(|kk| kk.decay.eta).fold(f64::INFINITY, f64::min);
        Self {
            growth,
            ms,
            count_c,
            count_k,
            alpha,
            beta,
            eta,
            volume: chi_volume.powi(k as i32 + 1),
        }
    }

    /// The certified bound on the discarded `|I|_γ > n` tail at time `t`, or
    /// an error when the geometric series does not contract.
    pub fn bound(&self, n: usize, t: f64) -> Result<f64> {
        let rate = self.growth.k + self.count_k - self.eta * self.ms.tau / t;
        if rate >= -1e-9 {
            return Err(Error::TailBudget { bound: f64::INFINITY, budget: 0.0 });
        }
        let prefactor = self.volume
            * self.growth.a
            * self.alpha
            * t.powf(-self.beta)
            * (self.eta * self.ms.kappa * (self.growth.validation_radius as f64 + 1.0).min(4.0) / t).exp()
            * self.count_c;
        let r = rate.exp();
        Ok(prefactor * r.powi(n as i32 + 1) / (1.0 - r))
    }
}

/// Affine image of a box under a group element, re-boxed.
fn transform_box(g: &GroupElement, bounds: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let n = bounds.len();
    // transform all corners
    let mut out = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
    for corner in 0..(1usize << n) {
        let pt: Vec<f64> = (0..n)
            .map(|i| if corner >> i & 1 == 0 { bounds[i].0 } else { bounds[i].1 })
            .collect();
        let y = g.act(&pt);
        for i in 0..n {
            out[i].0 = out[i].0.min(y[i]);
            out[i].1 = out[i].1.max(y[i]);
        }
    }
    out
}

fn pad_box(bounds: &[(f64, f64)], pad: f64) -> Vec<(f64, f64)> {
    bounds.iter().map(|&(a, b)| (a - pad, b + pad)).collect()
}

/// `ρ(F)(A_0,…,A_k) = Σ_{ν ∈ Z_γ\Γ} ∫ F(ν, x_0…x_k) A_0(x_0,x_1) ⋯ A_k(x_k, γ x_0)`,
/// truncated to coset representatives inside the word ball of the budget.
pub fn rho_ext(
    f: &ExtendedASCochain,
    ctx: &ConjugacyContext,
    kernels: &[EquivariantKernel],
    t: f64,
    budget: &PairingBudget,
) -> Result<Complex64> {
    let k1 = f.degree + 1;
    if kernels.len() != k1 {
        return Err(Error::Config(format!(
            "degree {} pairing needs {} kernels, got {}",
            f.degree,
            k1,
            kernels.len()
        )));
    }
    let cosets = ctx.coset_section(budget.trunc_radius)?;
    let gamma = &ctx.gamma;
    let mut acc = Complex64::new(0.0, 0.0);
    for nu in &cosets {
        // x_0 ranges over ν · (support box); the other variables over the
        // reach-padded version of the same region
        let x0_box = transform_box(nu, &f.support);
        let xi_box = pad_box(&x0_box, budget.reach);
        let mut bounds = x0_box.clone();
        for _ in 1..k1 {
            bounds.extend_from_slice(&xi_box);
        }
        let n = f.group.dim;
        let grid = QuadratureGrid {
            mode: budget.mode,
            ..QuadratureGrid::gauss(bounds, budget.gl_order, budget.panels)
        };
        let term = grid.integrate_c(|z| {
            let pts: Vec<Vec<f64>> = (0..k1).map(|i| z[i * n..(i + 1) * n].to_vec()).collect();
            let fv = f.eval(nu, &pts);
            if fv.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // matrix product A_0(x_0,x_1)…A_k(x_k, γx_0), then trace
            let m = if k1 == 1 {
                kernels[0].eval(&pts[0], &gamma.act(&pts[0]), t)
            } else {
                let mut m = kernels[0].eval(&pts[0], &pts[1], t);
                for i in 1..k1 - 1 {
                    m = m.mul(&kernels[i].eval(&pts[i], &pts[i + 1], t));
                }
                m.mul(&kernels[k1 - 1].eval(&pts[k1 - 1], &gamma.act(&pts[0]), t))
            };
            fv * m.trace()
        })?;
        acc += term;
    }
    Ok(acc)
}

/// `ρ_inv(f)(A_0,…,A_k) = Σ_{η ∈ <γ>} ∫ χ(x_0) f(x_0…x_k) A_0(x_0,x_1) ⋯ A_k(x_k, η x_0)`,
/// with `<γ>` the conjugacy class, truncated to the word ball.
pub fn rho_inv(
    f: &InvariantASCochain,
    ctx: &ConjugacyContext,
    chi: &BumpCutoff,
    kernels: &[EquivariantKernel],
    t: f64,
    budget: &PairingBudget,
) -> Result<Complex64> {
    let k1 = f.degree + 1;
    if kernels.len() != k1 {
        return Err(Error::Config("kernel count must match degree + 1".into()));
    }
    let class = ctx.class_in_ball(budget.trunc_radius)?;
    let n = chi.group.dim;
    let r = chi.support_radius;
    let x0_box = vec![(-r, r); n];
    let xi_box = pad_box(&x0_box, budget.reach);
    let mut acc = Complex64::new(0.0, 0.0);
    for eta in &class {
        let mut bounds = x0_box.clone();
        for _ in 1..k1 {
            bounds.extend_from_slice(&xi_box);
        }
        let grid = QuadratureGrid {
            mode: budget.mode,
            ..QuadratureGrid::gauss(bounds, budget.gl_order, budget.panels)
        };
        acc += grid.integrate_c(|z| {
            let pts: Vec<Vec<f64>> = (0..k1).map(|i| z[i * n..(i + 1) * n].to_vec()).collect();
            let w = chi.eval(&pts[0]);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let fv = f.eval(&pts);
            if fv.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut m = if k1 == 1 {
                kernels[0].eval(&pts[0], &eta.act(&pts[0]), t)
            } else {
                let mut m = kernels[0].eval(&pts[0], &pts[1], t);
                for i in 1..k1 - 1 {
                    m = m.mul(&kernels[i].eval(&pts[i], &pts[i + 1], t));
                }
                m.mul(&kernels[k1 - 1].eval(&pts[k1 - 1], &eta.act(&pts[0]), t))
            };
            m = m.scale(Complex64::new(w, 0.0));
            fv * m.trace()
        })?;
    }
    Ok(acc)
}

/// `Φ(φ)(A_0,…,A_k) = Σ_{g_0…g_k} φ(δ_{g_0},…,δ_{g_k}) ∫ χ(x_0) A_0(x_0, g_0 x_1) ⋯ χ(x_k) A_k(x_k, g_k x_0)`,
/// truncated to tuples from the word ball of the budget.
pub fn phi_pairing(
    phi: &CyclicCochain,
    ctx: &ConjugacyContext,
    chi: &BumpCutoff,
    kernels: &[EquivariantKernel],
    t: f64,
    budget: &PairingBudget,
) -> Result<Complex64> {
    let k1 = phi.degree + 1;
    if kernels.len() != k1 {
        return Err(Error::Config("kernel count must match degree + 1".into()));
    }
    let ball = ctx.group.enumerate_ball(budget.trunc_radius);
    let n = chi.group.dim;
    let r = chi.support_radius;
    // enumerate tuples with nonzero φ first
    let mut tuples: Vec<(Vec<GroupElement>, Complex64)> = Vec::new();
    let mut idx = vec![0usize; k1];
    loop {
        let tuple: Vec<GroupElement> = idx.iter().map(|&i| ball[i].clone()).collect();
        let v = phi.eval(&tuple);
        if v.norm() > 0.0 {
            tuples.push((tuple, v));
        }
        let mut c = 0;
        loop {
            idx[c] += 1;
            if idx[c] < ball.len() {
                break;
            }
            idx[c] = 0;
            c += 1;
            if c == k1 {
                // finished odometer
                return phi_sum(&tuples, chi, kernels, t, n, r, k1, budget);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn phi_sum(
    tuples: &[(Vec<GroupElement>, Complex64)],
    chi: &BumpCutoff,
    kernels: &[EquivariantKernel],
    t: f64,
    n: usize,
    r: f64,
    k1: usize,
    budget: &PairingBudget,
) -> Result<Complex64> {
    let mut bounds = Vec::new();
    for _ in 0..k1 {
        bounds.extend(std::iter::repeat((-r, r)).take(n));
    }
    let values = crate::exec::map_indexed(budget.mode, tuples.len(), |ti| {
        let (tuple, coef) = &tuples[ti];
        let grid = QuadratureGrid::gauss(bounds.clone(), budget.gl_order, budget.panels);
        let grid = QuadratureGrid { mode: ExecMode::Sequential, ..grid };
        let term = grid
            .integrate_c(|z| {
                let pts: Vec<Vec<f64>> = (0..k1).map(|i| z[i * n..(i + 1) * n].to_vec()).collect();
                let mut w = 1.0;
                for p in &pts {
                    w *= chi.eval(p);
                    if w == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                }
                let mut m = kernels[0].eval(&pts[0], &tuple[0].act(&pts[1 % k1]), t);
                for i in 1..k1 {
                    m = m.mul(&kernels[i].eval(&pts[i], &tuple[i].act(&pts[(i + 1) % k1]), t));
                }
                m.trace() * w
            })
            .unwrap_or(Complex64::new(f64::NAN, 0.0));
        term * *coef
    });
    let total = crate::exec::sum_compensated_c(&values);
    if total.re.is_finite() && total.im.is_finite() {
        Ok(total)
    } else {
        Err(Error::NonFinite("phi pairing".into()))
    }
}

/// Hochschild coboundary on the kernel side:
/// `(bψ)(A_0,…,A_{k+1}) = Σ (-1)^i ψ(…, A_i * A_{i+1}, …) + (-1)^{k+1} ψ(A_{k+1} * A_0, …)`,
/// with `*` the numeric kernel composition.
pub fn hochschild_b_kernels<F>(
    psi: F,
    kernels: &[EquivariantKernel],
    pad: f64,
    order: usize,
) -> Result<Complex64>
where
    F: Fn(&[EquivariantKernel]) -> Result<Complex64>,
{
    let k2 = kernels.len();
    let k = k2 - 2; // ψ has degree k, b ψ has degree k+1
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=k {
        let mut args: Vec<EquivariantKernel> = Vec::with_capacity(k2 - 1);
        args.extend(kernels[..i].iter().cloned());
        args.push(kernels[i].compose_numeric(&kernels[i + 1], pad, order));
        args.extend(kernels[i + 2..].iter().cloned());
        acc += psi(&args)? * if i % 2 == 0 { 1.0 } else { -1.0 };
    }
    let mut args: Vec<EquivariantKernel> = Vec::with_capacity(k2 - 1);
    args.push(kernels[k2 - 1].compose_numeric(&kernels[0], pad, order));
    args.extend(kernels[1..k2 - 1].iter().cloned());
    acc += psi(&args)? * if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ascomplex::kernels::DecayCertificate;
    use crate::ascomplex::{psi_ext, psi_inv};
    use crate::cochain::{library, lott_to_cyclic, ClassTable};
    use crate::group::builtin_group;
    use crate::manifold::BumpProfile;
    use std::sync::Arc;

    fn setup() -> (Arc<crate::group::CrystallographicGroup>, ConjugacyContext, Arc<BumpCutoff>) {
        let g = Arc::new(builtin_group("dinf").unwrap());
        let r = g.generators[2].clone();
        let ctx = ConjugacyContext::new(g.clone(), r, 8).unwrap();
        let chi = Arc::new(
            BumpCutoff::build(g.clone(), BumpProfile::Quartic, 0.7, vec![(-4.0, 4.0)]).unwrap(),
        );
        (g, ctx, chi)
    }

    fn heat_kernel(g: &Arc<crate::group::CrystallographicGroup>, scale: f64) -> EquivariantKernel {
        EquivariantKernel::heat_scaled(
            g.clone(),
            scale,
            DecayCertificate { alpha: 40.0, beta: 1.0, eta: 0.4, valid_beyond: 1.5 },
        )
    }

    #[test]
    fn zero_kernel_pairs_to_zero() {
        let (g, ctx, chi) = setup();
        let f = psi_ext(&library::constant(1.0), &chi);
        let k = heat_kernel(&g, 1.0).zero_like();
        let budget = PairingBudget { trunc_radius: 4, ..Default::default() };
        let v = rho_ext(&f, &ctx, &[k], 0.2, &budget).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn degree0_rho_matches_direct_gaussian_sum() {
        // ρ(Ψ(1))(K_t) = Σ_{ν∈Z_γ\Γ} ∫ Ψ(1)(ν,x) K_t(x, γx) dx; the direct
        // oracle computes the same delocalized trace as Σ_{η∈<γ>}∫χ k_t(x,ηx)
        let (g, ctx, chi) = setup();
        let f = psi_ext(&library::constant(1.0), &chi);
        let k = heat_kernel(&g, 1.0);
        let t = 0.05;
        let budget = PairingBudget { trunc_radius: 8, gl_order: 20, panels: 3, ..Default::default() };
        let v = rho_ext(&f, &ctx, &[k.clone()], t, &budget).unwrap();
        // independent Gaussian-sum oracle over the conjugacy class
        let class = ctx.class_in_ball(10).unwrap();
        let grid = QuadratureGrid::gauss(vec![(-0.7, 0.7)], 24, 3);
        let mut oracle = 0.0;
        for eta in &class {
            oracle += grid
                .integrate(|x| {
                    let y = eta.act(x);
                    chi.eval(x) * k.eval(x, &y, t).get(0, 0).re
                })
                .unwrap();
        }
        assert!(
            (v.re - oracle).abs() < 1e-6,
            "rho {v} vs oracle {oracle}"
        );
    }

    #[test]
    fn rho_inv_agrees_with_phi_in_degree_zero() {
        let (g, ctx, chi) = setup();
        let class = Arc::new(ClassTable::build(&ctx, 10).unwrap());
        let tau = lott_to_cyclic(&ctx, &library::constant(1.0), class);
        let k = heat_kernel(&g, 1.0);
        let t = 0.08;
        let budget = PairingBudget { trunc_radius: 6, gl_order: 20, panels: 2, ..Default::default() };
        let via_phi = phi_pairing(&tau, &ctx, &chi, &[k.clone()], t, &budget).unwrap();
        let f = psi_inv(&library::constant(1.0), &chi);
        let via_rho = rho_inv(&f, &ctx, &chi, &[k], t, &budget).unwrap();
        assert!(
            (via_phi - via_rho).norm() < 1e-6,
            "phi {via_phi} vs rho_inv {via_rho}"
        );
    }

    #[test]
    fn tail_bound_contracts_with_radius() {
        let (g, ctx, chi) = setup();
        let growth = GrowthCertificate { a: 1.0, k: 0.05, validation_radius: 4, max_ratio: 1.0 };
        let ms = MilnorSvarc { tau: 0.4, kappa: 2.0, validation_radius: 10 };
        let k = heat_kernel(&g, 1.0);
        let tm = TailModel::assemble(&ctx, growth, ms, &[k], chi.volume_estimate(), 0);
        let t = 0.05;
        let b4 = tm.bound(4, t).unwrap();
        let b6 = tm.bound(6, t).unwrap();
        assert!(b6 < b4 && b6 > 0.0);
        // too-large t breaks contraction
        assert!(tm.bound(4, 1e6).is_err());
    }
}
