//! Invariant and extended Alexander-Spanier complexes with the connecting
//! chain maps.
//!
//! The extended complex lives on `Γ × M^{k+1}` with a compact-support
//! certificate for `p_0(η, x_0, …) = η^{-1} x_0`; the differential is
//!
//! `ε(F)(η, x_0…x_{k+1}) = Σ_h F(ηh, x_1…)χ(η^{-1}x_0) + Σ_{i≥1} (-1)^i F(η, …x̂_i…)`.
//!
//! `Ψ` sends a group cochain to the extended complex, `Ψ_inv` to the
//! invariant one; `I`, `P` connect the two with `P∘I = id` and
//! `I∘P - id = εH + Hε`.

pub mod kernels;
pub mod localize;
pub mod pairing;

pub use kernels::{DecayCertificate, EquivariantKernel};
pub use localize::{lambda_fixed, psi_gamma_form, psi_gamma_value};
pub use pairing::{phi_pairing, rho_ext, rho_inv, PairingBudget, TailModel};

use std::sync::Arc;

use num_complex::Complex64;

use crate::cochain::GroupCochain;
use crate::group::{CrystallographicGroup, GroupElement};
use crate::manifold::BumpCutoff;
use crate::{Error, Result};

type InvEval = Arc<dyn Fn(&[Vec<f64>]) -> Complex64 + Send + Sync>;
type ExtEval = Arc<dyn Fn(&GroupElement, &[Vec<f64>]) -> Complex64 + Send + Sync>;

/// Antisymmetric `Z_γ`-invariant cochain on `M^{k+1}`.
#[derive(Clone)]
pub struct InvariantASCochain {
    pub degree: usize,
    pub name: String,
    eval: InvEval,
}

impl InvariantASCochain {
    pub fn new(degree: usize, name: &str, eval: InvEval) -> Self {
        Self { degree, name: name.to_string(), eval }
    }

    pub fn eval(&self, pts: &[Vec<f64>]) -> Complex64 {
        debug_assert_eq!(pts.len(), self.degree + 1);
        (self.eval)(pts)
    }

    /// Alexander-Spanier coboundary `Σ (-1)^i f(…, x̂_i, …)`.
    pub fn delta(&self) -> InvariantASCochain {
        let inner = self.eval.clone();
        let k1 = self.degree + 1;
        InvariantASCochain::new(
            k1,
            &format!("delta({})", self.name),
            Arc::new(move |pts: &[Vec<f64>]| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..=k1 {
                    let sub: Vec<Vec<f64>> = pts
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, p)| p.clone())
                        .collect();
                    acc += inner(&sub) * if i % 2 == 0 { 1.0 } else { -1.0 };
                }
                acc
            }),
        )
    }
}

/// Cochain on `Γ × M^{k+1}` with compact `p_0`-support certificate.
#[derive(Clone)]
pub struct ExtendedASCochain {
    pub degree: usize,
    pub name: String,
    pub group: Arc<CrystallographicGroup>,
    /// `p_0(supp)` is contained in this box around the origin.
    pub support: Vec<(f64, f64)>,
    eval: ExtEval,
}

impl ExtendedASCochain {
    pub fn new(
        degree: usize,
        name: &str,
        group: Arc<CrystallographicGroup>,
        support: Vec<(f64, f64)>,
        eval: ExtEval,
    ) -> Self {
        Self { degree, name: name.to_string(), group, support, eval }
    }

    pub fn eval(&self, eta: &GroupElement, pts: &[Vec<f64>]) -> Complex64 {
        debug_assert_eq!(pts.len(), self.degree + 1);
        (self.eval)(eta, pts)
    }

    fn in_support(&self, y: &[f64]) -> bool {
        y.iter().zip(&self.support).all(|(c, (a, b))| *c >= a - 1e-12 && *c <= b + 1e-12)
    }

    /// Group elements `g` with `g^{-1} x` inside the support box, drawn from
    /// a shared relevant list.
    pub fn carriers<'a>(&self, relevant: &'a [GroupElement], x: &[f64]) -> Vec<&'a GroupElement> {
        relevant
            .iter()
            .filter(|g| self.in_support(&self.group.inverse(g).act(x)))
            .collect()
    }
}

/// `Ψ_inv(c)(x_0…x_k) = Σ c(γ_0…γ_k) χ(γ_0^{-1}x_0)⋯χ(γ_k^{-1}x_k)`;
/// properness of the cutoff makes the sum finite pointwise.
pub fn psi_inv(c: &GroupCochain, chi: &Arc<BumpCutoff>) -> InvariantASCochain {
    let c = c.clone();
    let chi = chi.clone();
    InvariantASCochain::new(
        c.degree,
        &format!("psi_inv({})", c.name),
        Arc::new(move |pts: &[Vec<f64>]| {
            let carriers: Vec<Vec<&GroupElement>> = pts.iter().map(|x| chi.relevant_at(x)).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut tuple: Vec<GroupElement> = Vec::with_capacity(pts.len());
            cutoff_sum(&c, &chi, pts, &carriers, 0, &mut tuple, 1.0, &mut acc);
            acc
        }),
    )
}

/// Shared recursion: sum `c(tuple) Π χ(γ_i^{-1} x_i)` over carrier tuples,
/// starting at `slot`.
fn cutoff_sum(
    c: &GroupCochain,
    chi: &BumpCutoff,
    pts: &[Vec<f64>],
    carriers: &[Vec<&GroupElement>],
    slot0: usize,
    tuple: &mut Vec<GroupElement>,
    weight: f64,
    acc: &mut Complex64,
) {
    let slot = tuple.len();
    if slot == pts.len() {
        *acc += c.eval(tuple) * weight;
        return;
    }
    for g in &carriers[slot - slot0] {
        let w = chi.eval_translate(g, &pts[slot]);
        if w == 0.0 {
            continue;
        }
        tuple.push((*g).clone());
        cutoff_sum(c, chi, pts, carriers, slot0, tuple, weight * w, acc);
        tuple.pop();
    }
}

/// `Ψ(c)(γ_0, x_0…x_k) = Σ_{γ_1…γ_k} c(γ_0,…,γ_k) χ(γ_0^{-1}x_0)⋯χ(γ_k^{-1}x_k)`.
pub fn psi_ext(c: &GroupCochain, chi: &Arc<BumpCutoff>) -> ExtendedASCochain {
    let group = chi.group.clone();
    let r = chi.support_radius;
    let support = vec![(-r, r); group.dim];
    let c = c.clone();
    let chi2 = chi.clone();
    ExtendedASCochain::new(
        c.degree,
        &format!("psi({})", c.name),
        group,
        support,
        Arc::new(move |eta: &GroupElement, pts: &[Vec<f64>]| {
            let w0 = chi2.eval_translate(eta, &pts[0]);
            if w0 == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let carriers: Vec<Vec<&GroupElement>> =
                pts[1..].iter().map(|x| chi2.relevant_at(x)).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut tuple: Vec<GroupElement> = vec![eta.clone()];
            cutoff_sum(&c, &chi2, pts, &carriers, 1, &mut tuple, w0, &mut acc);
            acc
        }),
    )
}

/// The differential of the extended complex.
pub fn eps_ext(f: &ExtendedASCochain, chi: &Arc<BumpCutoff>) -> Result<ExtendedASCochain> {
    if f.support.is_empty() {
        return Err(Error::Degenerate("extended cochain without support certificate".into()));
    }
    let inner = f.clone();
    let chi = chi.clone();
    let group = f.group.clone();
    let k1 = f.degree + 1;
    // ε can spread the support to the cutoff box
    let r = chi.support_radius;
    let support: Vec<(f64, f64)> = f.support.iter().map(|&(a, b)| (a.min(-r), b.max(r))).collect();
    Ok(ExtendedASCochain::new(
        k1,
        &format!("eps({})", f.name),
        group,
        support,
        Arc::new(move |eta: &GroupElement, pts: &[Vec<f64>]| {
            let mut acc = Complex64::new(0.0, 0.0);
            // Σ_h F(ηh, x_1, …, x_{k+1}) χ(η^{-1}x_0): ηh must carry x_1
            let w0 = chi.eval_translate(eta, &pts[0]);
            if w0 != 0.0 {
                let rest: Vec<Vec<f64>> = pts[1..].to_vec();
                for gh in inner.carriers(chi.relevant(), &pts[1]) {
                    acc += inner.eval(gh, &rest) * w0;
                }
            }
            for i in 1..=k1 {
                let sub: Vec<Vec<f64>> = pts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, p)| p.clone())
                    .collect();
                acc += inner.eval(eta, &sub) * if i % 2 == 0 { 1.0 } else { -1.0 };
            }
            acc
        }),
    ))
}

/// `(If)(η, x_0…x_k) = f(x_0…x_k) χ(η^{-1}x_0)`.
pub fn map_i(f: &InvariantASCochain, chi: &Arc<BumpCutoff>) -> ExtendedASCochain {
    let chi = chi.clone();
    let f = f.clone();
    let group = chi.group.clone();
    let r = chi.support_radius;
    let support = vec![(-r, r); group.dim];
    ExtendedASCochain::new(
        f.degree,
        &format!("I({})", f.name),
        group,
        support,
        Arc::new(move |eta: &GroupElement, pts: &[Vec<f64>]| {
            let w = chi.eval_translate(eta, &pts[0]);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            f.eval(pts) * w
        }),
    )
}

/// `(PF)(x_0…x_k) = Σ_h F(h, x_0…x_k)`.
pub fn map_p(f: &ExtendedASCochain, chi: &Arc<BumpCutoff>) -> InvariantASCochain {
    let f = f.clone();
    let chi = chi.clone();
    InvariantASCochain::new(
        f.degree,
        &format!("P({})", f.name),
        Arc::new(move |pts: &[Vec<f64>]| {
            let mut acc = Complex64::new(0.0, 0.0);
            for h in f.carriers(chi.relevant(), &pts[0]) {
                acc += f.eval(h, pts);
            }
            acc
        }),
    )
}

/// `HF(η, x_0…x_{k-1}) = Σ (-1)^i F(η, x_0…x_i, x_i…x_{k-1})`; zero in
/// degree 0.
pub fn homotopy_h(f: &ExtendedASCochain) -> ExtendedASCochain {
    let inner = f.clone();
    let k = f.degree;
    ExtendedASCochain::new(
        k.saturating_sub(1),
        &format!("H({})", f.name),
        f.group.clone(),
        f.support.clone(),
        Arc::new(move |eta: &GroupElement, pts: &[Vec<f64>]| {
            if k == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..pts.len() {
                let mut doubled: Vec<Vec<f64>> = Vec::with_capacity(pts.len() + 1);
                doubled.extend_from_slice(&pts[..=i]);
                doubled.push(pts[i].clone());
                doubled.extend_from_slice(&pts[i + 1..]);
                acc += inner.eval(eta, &doubled) * if i % 2 == 0 { 1.0 } else { -1.0 };
            }
            acc
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::library;
    use crate::group::{builtin_group, ConjugacyContext};
    use crate::manifold::BumpProfile;

    fn dinf_setup() -> (Arc<CrystallographicGroup>, ConjugacyContext, Arc<BumpCutoff>) {
        let g = Arc::new(builtin_group("dinf").unwrap());
        let r = g.generators[2].clone();
        let ctx = ConjugacyContext::new(g.clone(), r, 8).unwrap();
        let chi = Arc::new(
            BumpCutoff::build(g.clone(), BumpProfile::Quartic, 0.7, vec![(-3.0, 3.0)]).unwrap(),
        );
        (g, ctx, chi)
    }

    fn sample_points(k1: usize, shift: f64) -> Vec<Vec<f64>> {
        (0..k1).map(|i| vec![0.31 * (i as f64 + 1.0).sin() + shift]).collect()
    }

    #[test]
    fn psi_inv_of_constant_is_one() {
        let (_, _, chi) = dinf_setup();
        let f = psi_inv(&library::constant(1.0), &chi);
        for &x in &[0.0, 0.37, -1.2, 2.4] {
            let v = f.eval(&[vec![x]]);
            assert!((v.re - 1.0).abs() < 1e-12, "at {x}: {v}");
        }
    }

    #[test]
    fn psi_inv_chain_map() {
        // δ ∘ Ψ_inv = Ψ_inv ∘ δ on sample tuples
        let (g, _, chi) = dinf_setup();
        let c = library::marker_coboundary(&g, 0);
        let lhs = psi_inv(&c, &chi).delta();
        let rhs = psi_inv(&c.delta(), &chi);
        for s in 0..20 {
            let pts = sample_points(3, 0.13 * s as f64 - 1.0);
            let d = (lhs.eval(&pts) - rhs.eval(&pts)).norm();
            assert!(d < 1e-12, "defect {d}");
        }
    }

    #[test]
    fn psi_ext_sums_to_one_in_degree_zero() {
        let (_, _, chi) = dinf_setup();
        let f = psi_ext(&library::constant(1.0), &chi);
        for &x in &[0.2, -0.9, 1.4] {
            let mut total = Complex64::new(0.0, 0.0);
            for h in f.carriers(chi.relevant(), &[x]) {
                total += f.eval(h, &[vec![x]]);
            }
            assert!((total.re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn p_of_psi_is_psi_inv() {
        // left triangle of the diagram: P(Ψ(c)) = Ψ_inv(c) pointwise
        let (g, _, chi) = dinf_setup();
        let c = library::marker_coboundary(&g, 0);
        let lhs = map_p(&psi_ext(&c, &chi), &chi);
        let rhs = psi_inv(&c, &chi);
        for s in 0..20 {
            let pts = sample_points(2, 0.17 * s as f64 - 1.4);
            let d = (lhs.eval(&pts) - rhs.eval(&pts)).norm();
            assert!(d < 1e-12, "defect {d} at {pts:?}");
        }
    }

    #[test]
    fn eps_squared_vanishes_on_psi() {
        let (g, _, chi) = dinf_setup();
        let c = library::marker_coboundary(&g, 0);
        let f = psi_ext(&c, &chi);
        let ee = eps_ext(&eps_ext(&f, &chi).unwrap(), &chi).unwrap();
        let ball = g.enumerate_ball(2);
        for s in 0..12 {
            let pts = sample_points(4, 0.19 * s as f64 - 1.1);
            for eta in ball.iter().step_by(3) {
                let v = ee.eval(eta, &pts).norm();
                assert!(v < 1e-11, "ε² = {v} at shift {s}");
            }
        }
    }

    #[test]
    fn eps_of_zero_is_zero() {
        let (g, _, chi) = dinf_setup();
        let zero = ExtendedASCochain::new(
            1,
            "zero",
            g.clone(),
            vec![(-0.7, 0.7)],
            Arc::new(|_, _| Complex64::new(0.0, 0.0)),
        );
        let e = eps_ext(&zero, &chi).unwrap();
        let pts = sample_points(3, 0.1);
        assert_eq!(e.eval(&g.identity(), &pts).norm(), 0.0);
    }

    #[test]
    fn psi_is_a_chain_map_to_the_extended_complex() {
        // ε_AS(Ψ(c)) = Ψ(δc)
        let (g, _, chi) = dinf_setup();
        let c = library::marker_coboundary(&g, 0);
        let lhs = eps_ext(&psi_ext(&c, &chi), &chi).unwrap();
        let rhs = psi_ext(&c.delta(), &chi);
        let ball = g.enumerate_ball(2);
        for s in 0..10 {
            let pts = sample_points(3, 0.21 * s as f64 - 1.0);
            for eta in ball.iter().step_by(2) {
                let d = (lhs.eval(eta, &pts) - rhs.eval(eta, &pts)).norm();
                assert!(d < 1e-12, "defect {d}");
            }
        }
    }

    #[test]
    fn p_after_i_is_identity() {
        let (g, _, chi) = dinf_setup();
        let c = library::marker_coboundary(&g, 0);
        let f = psi_inv(&c, &chi);
        let back = map_p(&map_i(&f, &chi), &chi);
        for s in 0..20 {
            let pts = sample_points(2, 0.23 * s as f64 - 2.0);
            let d = (back.eval(&pts) - f.eval(&pts)).norm();
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn h_of_degree_zero_vanishes() {
        let (g, _, chi) = dinf_setup();
        let f = psi_ext(&library::constant(1.0), &chi);
        let h = homotopy_h(&f);
        assert_eq!(h.eval(&g.identity(), &[vec![0.3]]).norm(), 0.0);
    }

    #[test]
    fn homotopy_identity() {
        // I∘P - id = ε_AS∘H + H∘ε_AS on F = Ψ(c)
        let (g, _, chi) = dinf_setup();
        for c in [library::marker_coboundary(&g, 0), library::constant(1.0).delta()] {
            let f = psi_ext(&c, &chi);
            let ip = map_i(&map_p(&f, &chi), &chi);
            let eh = eps_ext(&homotopy_h(&f), &chi).unwrap();
            let he = homotopy_h(&eps_ext(&f, &chi).unwrap());
            let ball = g.enumerate_ball(2);
            for s in 0..10 {
                let pts = sample_points(f.degree + 1, 0.29 * s as f64 - 1.2);
                for eta in ball.iter().step_by(3) {
                    let lhs = ip.eval(eta, &pts) - f.eval(eta, &pts);
                    let rhs = eh.eval(eta, &pts) + he.eval(eta, &pts);
                    let d = (lhs - rhs).norm();
                    assert!(d < 1e-11, "homotopy defect {d} for {}", c.name);
                }
            }
        }
    }
}
