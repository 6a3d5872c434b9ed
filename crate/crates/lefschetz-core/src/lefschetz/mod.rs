//! Top-level fixed-point evaluators: the geometric side of the pairing, the
//! degree-0 delocalized heat trace, the truncated higher pairing against the
//! projector entries, and the verification suite driver.

pub mod verify;

pub use verify::{verify_suite, Verdict};

use std::sync::Arc;

use num_complex::Complex64;

use crate::ascomplex::kernels::EquivariantKernel;
use crate::ascomplex::{psi_gamma_form, TailModel};
use crate::cochain::{GroupCochain, GrowthCertificate};
use crate::exec::ExecMode;
use crate::forms::{as_gamma_form, CurvatureData, MatC};
use crate::group::{box_grid, ConjugacyContext, CrystallographicGroup, MilnorSvarc};
use crate::heat::{constants, entry_kernel, EntryKind, FlatDiracModel};
use crate::manifold::{
    fixed_point_components, qmc_points, BumpCutoff, FixedPointSet, FixedSetCutoff,
};
use crate::{Error, Result};

/// Everything a pairing evaluation needs, assembled once.
pub struct ModelSetup {
    pub group: Arc<CrystallographicGroup>,
    pub ctx: ConjugacyContext,
    pub chi: Arc<BumpCutoff>,
    pub window: Vec<(f64, f64)>,
    /// Present when the group acts on `R²` and spinors are in play.
    pub dirac: Option<FlatDiracModel>,
}

impl ModelSetup {
    pub fn fixed_points(&self) -> Result<FixedPointSet> {
        fixed_point_components(&self.group, &self.ctx.gamma, &self.window)
    }
}

/// Result of the geometric-side evaluation.
#[derive(Debug, Clone)]
pub struct RhsReport {
    pub value: Complex64,
    pub per_component: Vec<Complex64>,
    /// Quadrature error estimate from resolution doubling (zero for isolated
    /// fixed points, where no quadrature runs).
    pub quad_error: f64,
    pub note: String,
}

/// The geometric side
/// `c(q,n) Σ_components ∫ (-i)^{(n-a)/2} χ_γ(x) Ψ^γ(c) ∧ AS_γ`
/// with flat curvature data; isolated components contribute closed-form
/// point values.
pub fn rhs_evaluate(
    setup: &ModelSetup,
    c: &GroupCochain,
    q: usize,
    aux_gamma: &MatC,
    resolution: usize,
) -> Result<RhsReport> {
    if c.degree != 2 * q {
        return Err(Error::Config(format!("cochain degree {} is not 2q = {}", c.degree, 2 * q)));
    }
    let n = setup.group.dim;
    let consts = constants(q, n.max(2) & !1)?;
    let fps = setup.fixed_points()?;
    if fps.components.is_empty() {
        return Ok(RhsReport {
            value: Complex64::new(0.0, 0.0),
            per_component: Vec::new(),
            quad_error: 0.0,
            note: "empty fixed set".into(),
        });
    }
    let mut per_component = Vec::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut quad_error = 0.0f64;
    let mut note = String::new();
    for comp in &fps.components {
        let a = comp.dim();
        if 2 * q > a {
            per_component.push(Complex64::new(0.0, 0.0));
            note = "degree exceeds fixed-set dimension".into();
            continue;
        }
        let phase = Complex64::new(0.0, -1.0).powu(((n - a) / 2) as u32);
        let cd = CurvatureData::flat(a, comp.normal_action.clone(), aux_gamma.clone());
        let as_form = as_gamma_form(&cd)?;
        let chi_gamma = FixedSetCutoff::build(&fps, &setup.ctx, setup.chi.support_radius)?;
        let comp_value = if a == 0 {
            // isolated point: closed-form evaluation, no quadrature
            let x = comp.base.clone();
            let psi = psi_gamma_form(c, &setup.chi, comp, &x)?;
            let integrand = psi.wedge(&as_form)?.top_coefficient().get(0, 0);
            integrand * chi_gamma.eval(&x)
        } else {
            // quadrature over the component in tangent coordinates
            let bound = comp_window(comp, &setup.window);
            let run = |res: usize| -> Result<Complex64> {
                let grid = box_grid(&bound, (bound[0].1 - bound[0].0) / res as f64);
                let vol = bound.iter().map(|(lo, hi)| hi - lo).product::<f64>()
                    / grid.len() as f64;
                let vals = crate::exec::map_indexed(ExecMode::default(), grid.len(), |i| {
                    let u = &grid[i];
                    let x = comp.embed(u);
                    let w = chi_gamma.eval(&x);
                    if w == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let psi = psi_gamma_form(c, &setup.chi, comp, &x)
                        .unwrap_or_else(|_| crate::forms::ExteriorElement::zero(a, 1));
                    let val = psi
                        .wedge(&as_form)
                        .map(|e| e.top_coefficient().get(0, 0))
                        .unwrap_or(Complex64::new(f64::NAN, 0.0));
                    val * w
                });
                Ok(crate::exec::sum_compensated_c(&vals) * vol)
            };
            let coarse = run(resolution)?;
            let fine = run(resolution * 2)?;
            quad_error = quad_error.max((fine - coarse).norm());
            fine
        };
        let contribution = comp_value * phase;
        per_component.push(contribution);
        total += contribution;
    }
    Ok(RhsReport { value: total * consts.c_qn, per_component, quad_error, note })
}

fn comp_window(comp: &crate::manifold::FixedComponent, window: &[(f64, f64)]) -> Vec<(f64, f64)> {
    // tangent-coordinate box big enough to cover the window
    let half: f64 = window
        .iter()
        .map(|(a, b)| a.abs().max(b.abs()))
        .fold(0.0, f64::max);
    vec![(-half, half); comp.dim()]
}

/// One scheduled value of the degree-0 delocalized heat supertrace with its
/// certified truncation tail.
#[derive(Debug, Clone)]
pub struct TracePoint {
    pub t: f64,
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `2 Σ_{g ∈ <γ> ∩ ball} ∫ χ(x) tr(ε σ(g) K_t(x, gx)) dx` for each scheduled
/// `t`; the factor 2 is the symmetrized-projector double.
pub fn lhs_degree0(
    setup: &ModelSetup,
    ts: &[f64],
    radius: usize,
    gl_order: usize,
    panels: usize,
) -> Result<Vec<TracePoint>> {
    let model = setup
        .dirac
        .as_ref()
        .ok_or_else(|| Error::Config("degree-0 trace needs the Dirac model".into()))?;
    let heat = entry_kernel(model, EntryKind::Heat);
    let class = setup.ctx.class_in_ball(radius)?;
    let n = setup.group.dim;
    let r = setup.chi.support_radius;
    let bounds = vec![(-r, r); n];
    let tail = tail_model_degree0(setup, &heat)?;
    let mut out = Vec::new();
    for &t in ts {
        let values = crate::exec::map_indexed(ExecMode::default(), class.len(), |gi| {
            let g = &class[gi];
            let sig = heat.sigma(g);
            let eps_sig = model_grading(model).mul(&sig);
            let grid = crate::manifold::QuadratureGrid {
                mode: ExecMode::Sequential,
                ..crate::manifold::QuadratureGrid::gauss(bounds.clone(), gl_order, panels)
            };
            grid.integrate_c(|x| {
                let w = setup.chi.eval(x);
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let k = heat.eval(x, &g.act(x), t);
                eps_sig.mul(&k).trace() * w
            })
            .unwrap_or(Complex64::new(f64::NAN, 0.0))
        });
        let value = crate::exec::sum_compensated_c(&values) * 2.0;
        if !value.re.is_finite() {
            return Err(Error::NonFinite("degree-0 trace".into()));
        }
        let tail_bound = tail.bound(radius, t)?;
        out.push(TracePoint { t, value, tail_bound });
    }
    Ok(out)
}

fn model_grading(model: &FlatDiracModel) -> MatC {
    crate::heat::kron(&model.spin.grading, &MatC::identity(model.aux_dim))
}

fn tail_model_degree0(setup: &ModelSetup, heat: &EquivariantKernel) -> Result<TailModel> {
    let ms = MilnorSvarc::fit(&setup.group, &[(-0.9, 0.9), (-0.9, 0.9)], 8, 0.45)?;
    let growth = GrowthCertificate { a: 2.0, k: 0.05, validation_radius: 4, max_ratio: 1.0 };
    Ok(TailModel::assemble(
        &setup.ctx,
        growth,
        ms,
        std::slice::from_ref(heat),
        setup.chi.volume_estimate(),
        0,
    ))
}

/// One scheduled value of the truncated higher pairing.
#[derive(Debug, Clone)]
pub struct PairingPoint {
    pub t: f64,
    pub value: Complex64,
    pub tuples: usize,
}

/// Truncated evaluation of
/// `Σ_I c(γ_0,…,γ_{2q}) χ^Γ_γ(γ_0) Tr^geo(γ^{-1} f_0 R(√tD) f_1 ⋯ f_{2q} R(√tD)^γ)`
/// with `f_i = χ(γ_i^{-1}·)`, summed over tuples with `|I|_γ ≤ radius` and
/// `γ_0` a coset representative; integrals by deterministic low-discrepancy
/// points over the product of carrier boxes.
pub fn pairing_truncated(
    setup: &ModelSetup,
    c: &GroupCochain,
    ts: &[f64],
    radius: usize,
    qmc: usize,
    seed: u64,
) -> Result<Vec<PairingPoint>> {
    let model = setup
        .dirac
        .as_ref()
        .ok_or_else(|| Error::Config("the truncated pairing needs the Dirac model".into()))?;
    let k = c.degree;
    let q = k / 2;
    let n = setup.group.dim;
    let heat = entry_kernel(model, EntryKind::Heat);
    let aminus = entry_kernel(model, EntryKind::AMinus);
    let aplus = entry_kernel(model, EntryKind::APlus);
    // tuples: γ_0 over coset representatives in the ball, the rest over the
    // ball, filtered by |I|_γ ≤ radius
    let reps = setup.ctx.coset_section(radius)?;
    let ball = setup.group.enumerate_ball(radius);
    let mut tuples: Vec<(Vec<crate::group::GroupElement>, Complex64)> = Vec::new();
    let mut stack = Vec::new();
    for rep in &reps {
        stack.push(vec![rep.clone()]);
    }
    while let Some(tuple) = stack.pop() {
        if tuple.len() == k + 1 {
            if setup.ctx.tuple_weight(&tuple)? as usize <= radius {
                let v = c.eval(&tuple);
                if v.norm() > 0.0 {
                    tuples.push((tuple, v));
                }
            }
            continue;
        }
        for g in &ball {
            let mut t2 = tuple.clone();
            t2.push(g.clone());
            // prune early on the partial word weight
            stack.push(t2);
        }
    }
    let gamma = &setup.ctx.gamma;
    let r = setup.chi.support_radius;
    let fiber = model.fiber_dim();
    let blocks = 2 * fiber;
    let eps = model_grading(model);
    let sig_gamma = model.sigma(gamma)?;
    let mut out = Vec::new();
    for &t in ts {
        let vals = crate::exec::map_indexed(ExecMode::default(), tuples.len(), |ti| {
            let (tuple, coef) = &tuples[ti];
            // integration box: product of carrier boxes γ_i·[-r,r]^n
            let mut bounds = Vec::with_capacity((k + 1) * n);
            for g in tuple {
                let center = g.act(&vec![0.0; n]);
                for c in center {
                    bounds.push((c - r, c + r));
                }
            }
            let pts = qmc_points(&bounds, qmc, seed);
            let vol: f64 = bounds.iter().map(|(a, b)| b - a).product();
            let mut acc = Complex64::new(0.0, 0.0);
            for p in &pts {
                let xs: Vec<Vec<f64>> = (0..=k).map(|i| p[i * n..(i + 1) * n].to_vec()).collect();
                let mut w = 1.0;
                for (g, x) in tuple.iter().zip(&xs) {
                    w *= setup.chi.eval_translate(g, x);
                    if w == 0.0 {
                        break;
                    }
                }
                if w == 0.0 {
                    continue;
                }
                // product of 2×2 block matrices R(x_i, x_{i+1}), closing with γx_0
                let gamma_x0 = gamma.act(&xs[0]);
                let mut m: Option<MatC> = None;
                for i in 0..=k {
                    let target: &[f64] = if i == k { &gamma_x0 } else { &xs[i + 1] };
                    let next = projector_matrix(&heat, &aminus, &aplus, &eps, &xs[i], target, t);
                    m = Some(match m {
                        None => next,
                        Some(prev) => prev.mul(&next),
                    });
                }
                // γ^{-1}-twist on the fiber: block-diagonal σ(γ) adjoint
                let twist = block_diag(&sig_gamma.adjoint(), 2);
                acc += twist.mul(&m.expect("k+1 >= 1 factors")).trace() * w;
            }
            acc * *coef * (vol / qmc as f64)
        });
        let value = crate::exec::sum_compensated_c(&vals);
        out.push(PairingPoint { t, value, tuples: tuples.len() });
    }
    Ok(out)
}

/// The 4d×4d projector matrix `R(√tD)(x, y)`: 2×2 blocks
/// `[[K_heat ε, K_{A-} ε], [K_{A+} ε, K_heat ε]]`.
#[allow(clippy::too_many_arguments)]
fn projector_matrix(
    heat: &EquivariantKernel,
    aminus: &EquivariantKernel,
    aplus: &EquivariantKernel,
    eps: &MatC,
    x: &[f64],
    y: &[f64],
    t: f64,
    _k: usize,
) -> MatC {
    let ke = heat.eval(x, y, t).mul(eps);
    let km = aminus.eval(x, y, t).mul(eps);
    let kp = aplus.eval(x, y, t).mul(eps);
    let d = ke.d;
    let mut m = MatC::zeros(2 * d);
    for i in 0..d {
        for j in 0..d {
            m.set(i, j, ke.get(i, j));
            m.set(i, d + j, km.get(i, j));
            m.set(d + i, j, kp.get(i, j));
            m.set(d + i, d + j, ke.get(i, j));
        }
    }
    m
}

fn block_diag(b: &MatC, copies: usize) -> MatC {
    let d = b.d;
    let mut m = MatC::zeros(d * copies);
    for c in 0..copies {
        for i in 0..d {
            for j in 0..d {
                m.set(c * d + i, c * d + j, b.get(i, j));
            }
        }
    }
    m
}

/// Support code for the criterion benches: one degree-0 trace evaluation on
/// the point-reflection model at a fixed budget.
pub mod bench_support {
    use super::*;

    pub fn degree0_trace_model(mode: ExecMode) -> Complex64 {
        let setup = p2_setup(mode).expect("bench model");
        let pts = lhs_degree0(&setup, &[0.1], 6, 12, 2).expect("bench trace");
        pts[0].value
    }

    pub fn p2_setup(_mode: ExecMode) -> Result<ModelSetup> {
        let group = Arc::new(crate::group::builtin_group("p2")?);
        let neg = group
            .generators
            .iter()
            .find(|e| !e.is_identity() && e.tr.iter().all(num_traits::Zero::is_zero))
            .cloned()
            .ok_or_else(|| Error::Config("p2 reflection missing".into()))?;
        let ctx = ConjugacyContext::new(group.clone(), neg, 8)?;
        let chi = Arc::new(BumpCutoff::build(
            group.clone(),
            crate::manifold::BumpProfile::Quartic,
            0.85,
            vec![(-2.5, 2.5), (-2.5, 2.5)],
        )?);
        let dirac = FlatDiracModel::new(group.clone(), ctx.clone(), 1, 1.0)?;
        Ok(ModelSetup {
            group,
            ctx,
            chi,
            window: vec![(-2.5, 2.5), (-2.5, 2.5)],
            dirac: Some(dirac),
        })
    }
}
