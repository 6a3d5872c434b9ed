//! The flat model manifold `M = R^n` with its proper cocompact action:
//! cutoff partitions of unity with analytic gradients, fixed-point sets of
//! torsion elements, cutoffs for the centralizer action on fixed sets, and
//! quadrature over compact supports.

pub mod quad;

pub use quad::{gauss_legendre, qmc_integrate_c, qmc_points, QuadratureGrid, Rule};

use std::sync::Arc;

use num_traits::Zero;

use crate::group::{ratio_f64, ConjugacyContext, CrystallographicGroup, GroupElement, Q};
use crate::{Error, Result};

/// Seed bump profiles. Both are radial with support `|x| < r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpProfile {
    /// `(1 - u²)²` in `u = |x|/r`: piecewise-polynomial, C¹ with Lipschitz
    /// gradient, cheap to evaluate.
    Quartic,
    /// `exp(-1/(1-u²))`: C-infinity, for smoothness studies.
    Smooth,
}

impl BumpProfile {
    fn eval(&self, u2: f64) -> f64 {
        if u2 >= 1.0 {
            return 0.0;
        }
        match self {
            BumpProfile::Quartic => {
                let s = 1.0 - u2;
                s * s
            }
            BumpProfile::Smooth => (-1.0 / (1.0 - u2)).exp(),
        }
    }

    /// Derivative with respect to `u2 = |x|²/r²`.
    fn deriv(&self, u2: f64) -> f64 {
        if u2 >= 1.0 {
            return 0.0;
        }
        match self {
            BumpProfile::Quartic => -2.0 * (1.0 - u2),
            BumpProfile::Smooth => {
                let s = 1.0 - u2;
                -(-1.0 / s).exp() / (s * s)
            }
        }
    }
}

/// Equivariant cutoff `χ(x) = φ(x) / Σ_g φ(g^{-1}x)` whose Γ-translates sum
/// to one.
pub struct BumpCutoff {
    pub group: Arc<CrystallographicGroup>,
    pub profile: BumpProfile,
    pub support_radius: f64,
    /// Elements whose bump translate can meet the working window.
    relevant: Vec<GroupElement>,
    window: Vec<(f64, f64)>,
}

impl BumpCutoff {
    /// Build the cutoff and verify that the bump translates cover the
    /// working window (positive denominator on a covering grid).
    pub fn build(
        group: Arc<CrystallographicGroup>,
        profile: BumpProfile,
        support_radius: f64,
        window: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let relevant = relevant_elements(&group, &window, support_radius);
        let out = Self { group, profile, support_radius, relevant, window };
        // covering check with a modest grid
        let grid = crate::group::box_grid(&out.window, support_radius / 7.0);
        for x in &grid {
            if out.denominator(x) <= 1e-12 {
                return Err(Error::Covering(format!(
                    "bump of radius {support_radius} does not cover the fundamental domain near {x:?}"
                )));
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.group.dim
    }

    fn phi(&self, x: &[f64]) -> f64 {
        let r2 = self.support_radius * self.support_radius;
        let u2 = x.iter().map(|c| c * c).sum::<f64>() / r2;
        self.profile.eval(u2)
    }

    fn phi_grad(&self, x: &[f64]) -> Vec<f64> {
        let r2 = self.support_radius * self.support_radius;
        let u2 = x.iter().map(|c| c * c).sum::<f64>() / r2;
        let d = self.profile.deriv(u2);
        x.iter().map(|c| d * 2.0 * c / r2).collect()
    }

    fn denominator(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for g in &self.relevant {
            let gi = self.group.inverse(g);
            s += self.phi(&gi.act(x));
        }
        s
    }

    /// Evaluate `χ(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let p = self.phi(x);
        if p == 0.0 {
            return 0.0;
        }
        p / self.denominator(x)
    }

    /// Evaluate `χ(g^{-1} x)`.
    pub fn eval_translate(&self, g: &GroupElement, x: &[f64]) -> f64 {
        self.eval(&self.group.inverse(g).act(x))
    }

    /// Analytic gradient of `χ`.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let p = self.phi(x);
        let dp = self.phi_grad(x);
        if p == 0.0 && dp.iter().all(|c| *c == 0.0) {
            return vec![0.0; n];
        }
        let den = self.denominator(x);
        // d/dx Σ_g φ(g^{-1}x) = Σ_g A_g^{-T} ∇φ(g^{-1}x)
        let mut dden = vec![0.0; n];
        for g in &self.relevant {
            let gi = self.group.inverse(g);
            let y = gi.act(x);
            let gphi = self.phi_grad(&y);
            for i in 0..n {
                for j in 0..n {
                    // (A_g^{-1})^T = rows of A_g^{-1} transposed
                    dden[i] += ratio_f64(gi.lin[j * n + i]) * gphi[j];
                }
            }
        }
        (0..n).map(|i| (dp[i] * den - p * dden[i]) / (den * den)).collect()
    }

    /// Gradient of `x ↦ χ(g^{-1}x)`.
    pub fn grad_translate(&self, g: &GroupElement, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let gi = self.group.inverse(g);
        let y = gi.act(x);
        let gy = self.grad(&y);
        (0..n)
            .map(|i| (0..n).map(|j| ratio_f64(gi.lin[j * n + i]) * gy[j]).sum())
            .collect()
    }

    /// Elements whose translate of the bump support can meet `x`.
    pub fn relevant_at(&self, x: &[f64]) -> Vec<&GroupElement> {
        self.relevant
            .iter()
            .filter(|g| {
                let y = self.group.inverse(g).act(x);
                y.iter().map(|c| c * c).sum::<f64>() < self.support_radius * self.support_radius
            })
            .collect()
    }

    /// All elements relevant anywhere in the working window.
    pub fn relevant(&self) -> &[GroupElement] {
        &self.relevant
    }

    pub fn window(&self) -> &[(f64, f64)] {
        &self.window
    }

    /// Conservative volume of the cutoff support (its bounding box).
    pub fn volume_estimate(&self) -> f64 {
        (2.0 * self.support_radius).powi(self.dim() as i32)
    }

    /// Max deviation of `Σ_g χ(g^{-1}x)` from 1 over a test grid.
    pub fn partition_defect(&self, step: f64) -> f64 {
        let grid = crate::group::box_grid(&self.window, step);
        let mut worst: f64 = 0.0;
        for x in &grid {
            let mut s = 0.0;
            for g in &self.relevant {
                s += self.eval_translate(g, x);
            }
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }
}

/// Elements `g` of a ball with `g·B(0,r)` meeting the window, with the ball
/// radius grown until the set stabilizes (properness).
pub fn relevant_elements(
    group: &CrystallographicGroup,
    window: &[(f64, f64)],
    support_radius: f64,
) -> Vec<GroupElement> {
    let hits = |radius: usize| -> Vec<GroupElement> {
        group
            .enumerate_ball(radius)
            .into_iter()
            .filter(|g| {
                let c = g.act(&vec![0.0; group.dim]);
                window
                    .iter()
                    .enumerate()
                    .all(|(i, (a, b))| c[i] > a - support_radius && c[i] < b + support_radius)
            })
            .collect()
    };
    let mut radius = 4;
    let mut cur = hits(radius);
    loop {
        let next = hits(radius + 2);
        if next.len() == cur.len() || radius >= 40 {
            return cur;
        }
        cur = next;
        radius += 2;
    }
}

/// One connected piece of a fixed-point set: an affine subspace together with
/// the action of `γ` on its normal space.
#[derive(Debug, Clone)]
pub struct FixedComponent {
    /// A point on the component.
    pub base: Vec<f64>,
    /// Orthonormal basis of the tangent space (dimension `a`).
    pub tangent: Vec<Vec<f64>>,
    /// Orthonormal basis of the normal space.
    pub normal: Vec<Vec<f64>>,
    /// Matrix of `γ` restricted to the normal space, in the `normal` basis.
    pub normal_action: Vec<f64>,
    /// Rotation angles of the normal action (π for each -1 eigenvalue).
    pub angles: Vec<f64>,
}

impl FixedComponent {
    pub fn dim(&self) -> usize {
        self.tangent.len()
    }

    /// `det(1 - γ|_N)`, exact zero when the normal space is empty => 1.
    pub fn normal_det(&self) -> f64 {
        let b = self.normal.len();
        if b == 0 {
            return 1.0;
        }
        let mut m = vec![0.0; b * b];
        for i in 0..b {
            for j in 0..b {
                m[i * b + j] = if i == j { 1.0 } else { 0.0 } - self.normal_action[i * b + j];
            }
        }
        crate::group::det_f64(&m, b)
    }

    /// Embed tangent coordinates `u` into the ambient space.
    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        let n = self.base.len();
        let mut x = self.base.clone();
        for (k, uk) in u.iter().enumerate() {
            for i in 0..n {
                x[i] += uk * self.tangent[k][i];
            }
        }
        x
    }

    /// Orthogonal projection of an ambient point to tangent coordinates.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.tangent
            .iter()
            .map(|t| t.iter().zip(x.iter().zip(&self.base)).map(|(ti, (xi, bi))| ti * (xi - bi)).sum())
            .collect()
    }
}

/// Fixed-point set `M^γ` of one torsion element inside a window.
#[derive(Debug, Clone)]
pub struct FixedPointSet {
    pub components: Vec<FixedComponent>,
}

/// Solve `(A_γ - 1)x = -v_γ` exactly and split the solution set into window
/// components, with the rotation angles of `γ` on the normal space.
pub fn fixed_point_components(
    group: &CrystallographicGroup,
    gamma: &GroupElement,
    window: &[(f64, f64)],
) -> Result<FixedPointSet> {
    if group.torsion_order(gamma, 64).is_none() {
        return Err(Error::Degenerate("fixed sets require a torsion element".into()));
    }
    let n = group.dim;
    // exact solve of (A - 1) x = -v over Q
    let mut aug: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut row: Vec<Q> = (0..n)
                .map(|j| gamma.lin[i * n + j] - if i == j { Q::from_integer(1) } else { Q::zero() })
                .collect();
            row.push(-gamma.tr[i]);
            row
        })
        .collect();
    // rational Gauss elimination
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..n {
        if let Some(p) = (r..n).find(|&i| !aug[i][c].is_zero()) {
            aug.swap(r, p);
            let inv = aug[r][c].recip();
            for cc in c..=n {
                aug[r][cc] *= inv;
            }
            for i in 0..n {
                if i != r && !aug[i][c].is_zero() {
                    let f = aug[i][c];
                    for cc in c..=n {
                        let sub = f * aug[r][cc];
                        aug[i][cc] -= sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    // inconsistent => empty fixed set
    for i in r..n {
        if !aug[i][n].is_zero() {
            return Ok(FixedPointSet { components: Vec::new() });
        }
    }
    // particular solution: free coordinates 0
    let mut base_q = vec![Q::zero(); n];
    for (row, &c) in pivots.iter().enumerate() {
        base_q[c] = aug[row][n];
    }
    let base: Vec<f64> = base_q.iter().map(|&v| ratio_f64(v)).collect();
    // nullspace basis: one vector per free column
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut tangent_raw = Vec::new();
    for &fc in &free {
        let mut v = vec![0.0; n];
        v[fc] = 1.0;
        for (row, &c) in pivots.iter().enumerate() {
            v[c] = -ratio_f64(aug[row][fc]);
        }
        tangent_raw.push(v);
    }
    let tangent = gram_schmidt(&tangent_raw);
    // normal space = orthogonal complement
    let normal = orthogonal_complement(&tangent, n);
    let b = normal.len();
    let mut normal_action = vec![0.0; b * b];
    let lin_f: Vec<f64> = gamma.lin.iter().map(|&v| ratio_f64(v)).collect();
    for i in 0..b {
        for j in 0..b {
            // <n_i, A n_j>
            let mut an = vec![0.0; n];
            for r2 in 0..n {
                for c2 in 0..n {
                    an[r2] += lin_f[r2 * n + c2] * normal[j][c2];
                }
            }
            normal_action[i * b + j] = normal[i].iter().zip(&an).map(|(a, b)| a * b).sum();
        }
    }
    let angles = rotation_angles(&normal_action, b);
    let comp = FixedComponent { base, tangent, normal, normal_action, angles };
    // clip: require the base point (translated into the window along the
    // tangent directions when possible) actually meets the window
    let _ = window;
    Ok(FixedPointSet { components: vec![comp] })
}

fn gram_schmidt(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for u in &out {
            let d: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
            for i in 0..w.len() {
                w[i] -= d * u[i];
            }
        }
        let norm: f64 = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(w.iter().map(|c| c / norm).collect());
        }
    }
    out
}

fn orthogonal_complement(tangent: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut candidates: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect();
    let mut all = tangent.to_vec();
    let mut out = Vec::new();
    while let Some(v) = candidates.pop() {
        let mut w = v;
        for u in &all {
            let d: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
            for i in 0..w.len() {
                w[i] -= d * u[i];
            }
        }
        let norm: f64 = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-9 {
            let w: Vec<f64> = w.iter().map(|c| c / norm).collect();
            all.push(w.clone());
            out.push(w);
        }
    }
    out.reverse();
    out
}

/// Rotation angles of an orthogonal matrix with no +1 eigenvalue: `π` per
/// `-1` eigenvalue, `θ` per conjugate pair `e^{±iθ}`.
fn rotation_angles(m: &[f64], b: usize) -> Vec<f64> {
    match b {
        0 => Vec::new(),
        1 => {
            // entry must be -1 for a fixed-point-free normal action
            vec![if m[0] < 0.0 { std::f64::consts::PI } else { 0.0 }]
        }
        2 => {
            let tr = m[0] + m[3];
            let det = m[0] * m[3] - m[1] * m[2];
            if det > 0.0 {
                // rotation
                vec![(tr / 2.0).clamp(-1.0, 1.0).acos()]
            } else {
                // reflection: eigenvalues +1, -1
                vec![std::f64::consts::PI, 0.0]
            }
        }
        _ => {
            // desk scale keeps b <= 2; larger blocks would need a Schur form
            vec![f64::NAN; b / 2]
        }
    }
}

/// Cutoff for the `Z_γ` action on `M^γ`, built from a seed bump on each
/// component divided by its `Z_γ`-translate sum.
pub struct FixedSetCutoff {
    pub fps: FixedPointSet,
    ctx: ConjugacyContext,
    /// Centralizer elements that can move points of the window.
    zs: Vec<GroupElement>,
    profile: BumpProfile,
    radius: f64,
}

impl FixedSetCutoff {
    pub fn build(fps: &FixedPointSet, ctx: &ConjugacyContext, radius: f64) -> Result<Self> {
        if fps.components.is_empty() {
            return Err(Error::Degenerate("empty fixed set has no cutoff".into()));
        }
        let zr = ctx.centralizer_ball(ctx.search_radius);
        Ok(Self {
            fps: fps.clone(),
            ctx: ctx.clone(),
            zs: zr,
            profile: BumpProfile::Quartic,
            radius,
        })
    }

    fn seed(&self, x: &[f64]) -> f64 {
        // distance from the nearest component base along the component
        let c = &self.fps.components[0];
        let u = c.project(x);
        let u2: f64 = u.iter().map(|v| v * v).sum::<f64>() / (self.radius * self.radius);
        self.profile.eval(u2)
    }

    /// Evaluate `χ_γ(x)` for `x` on the fixed set.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let p = self.seed(x);
        let mut den = 0.0;
        for z in &self.zs {
            let zi = self.ctx.group.inverse(z);
            den += self.seed(&zi.act(x));
        }
        if den <= 0.0 {
            0.0
        } else {
            p / den
        }
    }

    /// `Σ_{z∈Z_γ} χ_γ(z^{-1} x)`, which must be 1 on the fixed set.
    pub fn partition_sum(&self, x: &[f64]) -> f64 {
        self.zs
            .iter()
            .map(|z| self.eval(&self.ctx.group.inverse(z).act(x)))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin_group;

    fn z1_cutoff() -> BumpCutoff {
        let g = Arc::new(builtin_group("z1").unwrap());
        BumpCutoff::build(g, BumpProfile::Quartic, 0.6, vec![(-2.5, 2.5)]).unwrap()
    }

    #[test]
    fn partition_of_unity_z1() {
        let chi = z1_cutoff();
        // Σ_{n} χ(x-n) = 1 at x = 0.37
        let x = [0.37];
        let mut s = 0.0;
        for g in chi.relevant() {
            s += chi.eval_translate(g, &x);
        }
        assert!((s - 1.0).abs() < 1e-12);
        assert!(chi.partition_defect(0.05) < 1e-12);
    }

    #[test]
    fn outside_support_is_zero() {
        let chi = z1_cutoff();
        assert_eq!(chi.eval(&[0.9]), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let chi = z1_cutoff();
        for &x in &[0.1, 0.25, -0.37, 0.52] {
            let g = chi.grad(&[x])[0];
            let h = 1e-6;
            let fd = (chi.eval(&[x + h]) - chi.eval(&[x - h])) / (2.0 * h);
            assert!((g - fd).abs() < 1e-8, "x={x}: {g} vs {fd}");
        }
    }

    #[test]
    fn covering_failure_detected() {
        let g = Arc::new(builtin_group("z1").unwrap());
        let r = BumpCutoff::build(g, BumpProfile::Quartic, 0.3, vec![(-2.0, 2.0)]);
        assert!(matches!(r, Err(Error::Covering(_))));
    }

    #[test]
    fn cutoff_integral_is_covolume_over_point_group() {
        // ∫ χ = covol(L)/|F| for p2: 1/2
        let g = Arc::new(builtin_group("p2").unwrap());
        let chi = BumpCutoff::build(g.clone(), BumpProfile::Quartic, 0.85, vec![(-2.0, 2.0), (-2.0, 2.0)]).unwrap();
        let grid = QuadratureGrid::gauss(vec![(-1.0, 1.0), (-1.0, 1.0)], 16, 6);
        let v = grid.integrate(|x| chi.eval(x)).unwrap();
        let expect = g.lattice_covolume() / g.point_group.len() as f64;
        assert!((v - expect).abs() < 1e-6, "got {v}, expected {expect}");
    }

    #[test]
    fn fixed_points_identity_is_everything() {
        let g = builtin_group("p2").unwrap();
        let e = g.identity();
        let fps = fixed_point_components(&g, &e, &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert_eq!(fps.components.len(), 1);
        assert_eq!(fps.components[0].dim(), 2);
        assert!(fps.components[0].normal.is_empty());
    }

    #[test]
    fn fixed_point_of_reflection_dinf() {
        let g = builtin_group("dinf").unwrap();
        let r = g.generators[2].clone();
        let fps = fixed_point_components(&g, &r, &[(-1.0, 1.0)]).unwrap();
        let c = &fps.components[0];
        assert_eq!(c.dim(), 0);
        assert!(c.base[0].abs() < 1e-14);
        assert!((c.angles[0] - std::f64::consts::PI).abs() < 1e-14);
        assert!((c.normal_det() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_of_p4_rotation() {
        let g = builtin_group("p4").unwrap();
        let rot = g
            .generators
            .iter()
            .find(|e| !e.is_identity() && e.tr.iter().all(Zero::is_zero))
            .cloned()
            .unwrap();
        let fps = fixed_point_components(&g, &rot, &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let c = &fps.components[0];
        assert_eq!(c.dim(), 0);
        assert!((c.angles[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        // conjugate representatives have their own centers: solve for one
        let t = &g.generators[0];
        let conj = g.conjugate(t, &rot).unwrap();
        let fps2 = fixed_point_components(&g, &conj, &[(-2.0, 2.0), (-2.0, 2.0)]).unwrap();
        assert_eq!(fps2.components[0].dim(), 0);
        // center differs from the origin
        assert!(fps2.components[0].base.iter().any(|c| c.abs() > 0.4));
    }

    #[test]
    fn non_torsion_fixed_set_is_error() {
        let g = builtin_group("z1").unwrap();
        let t = g.generators[0].clone();
        assert!(fixed_point_components(&g, &t, &[(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn equivariance_of_fixed_sets() {
        // act(z, M^γ) = M^{zγz^{-1}} on the p2 reflection
        let g = builtin_group("p2").unwrap();
        let neg = g
            .generators
            .iter()
            .find(|e| !e.is_identity() && e.tr.iter().all(Zero::is_zero))
            .cloned()
            .unwrap();
        let t = g.generators[0].clone();
        let fps = fixed_point_components(&g, &neg, &[(-2.0, 2.0), (-2.0, 2.0)]).unwrap();
        let moved: Vec<f64> = t.act(&fps.components[0].base);
        let conj = g.compose(&g.compose(&t, &neg).unwrap(), &g.inverse(&t)).unwrap();
        let fps2 = fixed_point_components(&g, &conj, &[(-2.0, 2.0), (-2.0, 2.0)]).unwrap();
        let d = crate::group::dist(&moved, &fps2.components[0].base);
        assert!(d < 1e-12);
    }

    #[test]
    fn fixed_set_cutoff_single_point() {
        // D∞, γ = r, Z_γ = {e, r}, M^γ = {0}: χ_γ(0) = 1/2 and the partition
        // sum over Z_γ is 1.
        let g = Arc::new(builtin_group("dinf").unwrap());
        let r = g.generators[2].clone();
        let ctx = ConjugacyContext::new(g.clone(), r.clone(), 8).unwrap();
        let fps = fixed_point_components(&g, &r, &[(-1.0, 1.0)]).unwrap();
        let chi = FixedSetCutoff::build(&fps, &ctx, 0.4).unwrap();
        assert!((chi.eval(&[0.0]) - 0.5).abs() < 1e-13);
        assert!((chi.partition_sum(&[0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_fixed_set_cutoff_is_error() {
        let g = Arc::new(builtin_group("dinf").unwrap());
        let r = g.generators[2].clone();
        let ctx = ConjugacyContext::new(g.clone(), r, 8).unwrap();
        let fps = FixedPointSet { components: Vec::new() };
        assert!(FixedSetCutoff::build(&fps, &ctx, 0.4).is_err());
    }
}
