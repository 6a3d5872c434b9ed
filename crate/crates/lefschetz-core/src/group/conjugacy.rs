//! Conjugacy data for a torsion element: centralizer membership, canonical
//! coset sections of `Z_γ\Γ`, the 0/1 cutoff `χ^Γ_γ` on `Γ`, conjugacy-class
//! enumeration, and empirical Milnor-Svarc constants for the orbit map.

use std::collections::HashSet;
use std::sync::Arc;

use super::{dist, CrystallographicGroup, GroupElement};
use crate::{Error, Result};

/// Conjugacy context for a fixed torsion element `γ`.
///
/// The cutoff `χ^Γ_γ` is realized as the 0/1 section selecting the minimal
/// element of each coset `Z_γ g` under the deterministic `(length, lex)`
/// order, which makes every report reproducible.
#[derive(Clone)]
pub struct ConjugacyContext {
    pub group: Arc<CrystallographicGroup>,
    pub gamma: GroupElement,
    pub order: usize,
    /// Search radius used when minimizing over a coset.
    pub search_radius: usize,
}

impl ConjugacyContext {
    pub fn new(group: Arc<CrystallographicGroup>, gamma: GroupElement, search_radius: usize) -> Result<Self> {
        let order = group
            .torsion_order(&gamma, 64)
            .ok_or_else(|| Error::Degenerate("gamma is not a torsion element".into()))?;
        Ok(Self { group, gamma, order, search_radius })
    }

    /// Exact centralizer test `gγ = γg`.
    pub fn in_centralizer(&self, g: &GroupElement) -> bool {
        self.group.commutes(g, &self.gamma).unwrap_or(false)
    }

    /// Centralizer elements within the word ball of the given radius.
    pub fn centralizer_ball(&self, radius: usize) -> Vec<GroupElement> {
        self.group
            .enumerate_ball(radius)
            .into_iter()
            .filter(|g| self.in_centralizer(g))
            .collect()
    }

    /// Minimal element of the coset `Z_γ g` under `(length, lex)`.
    ///
    /// Any `z` with `l(z) > l(g) + l(best)` satisfies `l(zg) ≥ l(z) − l(g) >
    /// l(best)`, so the scan over the centralizer ball below is exhaustive.
    pub fn coset_representative(&self, g: &GroupElement) -> Result<GroupElement> {
        let lg = self.group.word_length(g, self.search_radius)? as usize;
        let mut best = g.clone();
        let mut best_len = lg;
        let scan = lg + best_len + 1;
        let scan = scan.min(self.search_radius + lg + 1);
        for z in self.centralizer_ball(scan) {
            let zg = self.group.compose(&z, g)?;
            let l = self.group.word_length(&zg, self.search_radius + lg + 1)? as usize;
            if l < best_len || (l == best_len && zg.lex_key() < best.lex_key()) {
                best_len = l;
                best = zg;
            }
        }
        Ok(best)
    }

    /// The group cutoff `χ^Γ_γ(g)`: 1 on the chosen representative of
    /// `Z_γ g`, 0 elsewhere.
    pub fn group_cutoff(&self, g: &GroupElement) -> Result<f64> {
        Ok(if self.coset_representative(g)? == *g { 1.0 } else { 0.0 })
    }

    /// Coset representatives of `Z_γ\Γ` found inside the ball.
    pub fn coset_section(&self, radius: usize) -> Result<Vec<GroupElement>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for g in self.group.enumerate_ball(radius) {
            let rep = self.coset_representative(&g)?;
            if seen.insert(rep.clone()) && rep == g {
                out.push(g);
            }
        }
        Ok(out)
    }

    /// Conjugacy class of `γ` intersected with the ball of the given radius.
    pub fn class_in_ball(&self, radius: usize) -> Result<Vec<GroupElement>> {
        let mut set = HashSet::new();
        let mut out = Vec::new();
        for h in self.group.enumerate_ball(radius) {
            let c = self.group.conjugate(&h, &self.gamma)?;
            if set.insert(c.clone()) {
                out.push(c);
            }
        }
        out.sort_by_key(|g| g.lex_key());
        Ok(out)
    }

    /// `|I|_γ = Σ l(γ_i^{-1} γ_{i+1}) + l(γ_k^{-1} γ γ_0)` for a tuple.
    pub fn tuple_weight(&self, tuple: &[GroupElement]) -> Result<u32> {
        let g = &self.group;
        let k = tuple.len() - 1;
        let mut w = 0u32;
        for i in 0..k {
            let step = g.compose(&g.inverse(&tuple[i]), &tuple[i + 1])?;
            w += g.word_length(&step, self.search_radius * 4 + 8)?;
        }
        let close = g.compose(&g.compose(&g.inverse(&tuple[k]), &self.gamma)?, &tuple[0])?;
        w += g.word_length(&close, self.search_radius * 4 + 8)?;
        Ok(w)
    }

    /// Fit of the counting bound `#{I : |I|_γ ≤ n, γ_0 ∈ supp χ^Γ_γ} ≤ C e^{Kn}`
    /// from the one-variable ball growth, as in the triangle-inequality proof.
    pub fn counting_constants(&self, k: usize, radius: usize) -> (f64, f64) {
        let sizes: Vec<usize> = (0..=radius).map(|r| self.group.ball_size(r)).collect();
        let last = *sizes.last().unwrap() as f64;
        let kk = (last.ln() / radius.max(1) as f64).max(0.05);
        let mut c: f64 = 1.0;
        for (r, s) in sizes.iter().enumerate() {
            c = c.max(*s as f64 / (kk * r as f64).exp());
        }
        (c.powi(2 * k as i32 + 1) * 1.0000001, (2 * k + 1) as f64 * kk)
    }
}

/// Empirically validated Milnor-Svarc constants for the orbit map of a
/// compact box `F`: `(1/τ)·l(g) + κ > d(x, g·y) ≥ τ·l(g) − κ` on `F × F`.
#[derive(Debug, Clone, Copy)]
pub struct MilnorSvarc {
    pub tau: f64,
    pub kappa: f64,
    pub validation_radius: usize,
}

impl MilnorSvarc {
    /// Fit `(τ, κ)` on a grid over `F` against every element of the
    /// validation ball, then verify both inequalities exhaustively.
    pub fn fit(
        group: &CrystallographicGroup,
        fbox: &[(f64, f64)],
        validation_radius: usize,
        grid_step: f64,
    ) -> Result<Self> {
        if fbox.is_empty() || fbox.iter().any(|(a, b)| b < a) {
            return Err(Error::Degenerate("empty fundamental box".into()));
        }
        let grid = box_grid(fbox, grid_step);
        let ball = group.enumerate_ball(validation_radius);
        // per-element min/max of d(x, gy) over the grid
        let mut rows = Vec::new();
        for g in &ball {
            let l = group.word_length(g, validation_radius)? as f64;
            let mut dmin = f64::INFINITY;
            let mut dmax: f64 = 0.0;
            for x in &grid {
                for y in &grid {
                    let d = dist(x, &g.act(y));
                    dmin = dmin.min(d);
                    dmax = dmax.max(d);
                }
            }
            rows.push((l, dmin, dmax));
        }
        // slope from the outer half of the ball, capped at 1
        let lmax = rows.iter().map(|r| r.0).fold(0.0f64, f64::max);
        let mut tau: f64 = 1.0;
        for (l, dmin, _) in &rows {
            if *l >= (lmax / 2.0).max(1.0) {
                tau = tau.min(dmin / l * 0.95);
            }
        }
        if !(tau > 0.0) || !tau.is_finite() {
            tau = 0.5;
        }
        let mut kappa: f64 = 0.0;
        for (l, dmin, dmax) in &rows {
            kappa = kappa.max(tau * l - dmin);
            kappa = kappa.max(dmax - l / tau);
        }
        let out = Self { tau, kappa: kappa + 0.5, validation_radius };
        if out.validate(group, fbox, validation_radius, grid_step)? {
            Ok(out)
        } else {
            Err(Error::Degenerate("milnor-svarc fit failed its own validation".into()))
        }
    }

    /// Exhaustive check of both inequalities over ball × grid².
    pub fn validate(
        &self,
        group: &CrystallographicGroup,
        fbox: &[(f64, f64)],
        radius: usize,
        grid_step: f64,
    ) -> Result<bool> {
        let grid = box_grid(fbox, grid_step);
        for g in group.enumerate_ball(radius) {
            let l = group.word_length(&g, radius)? as f64;
            for x in &grid {
                for y in &grid {
                    let d = dist(x, &g.act(y));
                    if !(l / self.tau + self.kappa > d && d >= self.tau * l - self.kappa) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Regular grid over a box with approximately the given step.
pub fn box_grid(fbox: &[(f64, f64)], step: f64) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = fbox
        .iter()
        .map(|&(a, b)| {
            let m = (((b - a) / step).ceil() as usize).max(1);
            (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect()
        })
        .collect();
    let mut pts = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(pts.len() * axis.len());
        for p in &pts {
            for &v in axis {
                let mut p2 = p.clone();
                p2.push(v);
                next.push(p2);
            }
        }
        pts = next;
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin_group;

    fn dinf_ctx() -> ConjugacyContext {
        let g = Arc::new(builtin_group("dinf").unwrap());
        let r = g.generators[2].clone();
        ConjugacyContext::new(g, r, 10).unwrap()
    }

    #[test]
    fn centralizer_of_reflection_is_order_two() {
        let ctx = dinf_ctx();
        let z = ctx.centralizer_ball(6);
        assert_eq!(z.len(), 2);
    }

    #[test]
    fn cutoff_is_a_partition_over_cosets() {
        let ctx = dinf_ctx();
        // For every g in a medium ball, exactly one z in Z_γ has χ(z^{-1}g) = 1.
        let zs = ctx.centralizer_ball(8);
        for g in ctx.group.enumerate_ball(4) {
            let mut total = 0.0;
            for z in &zs {
                let zg = ctx.group.compose(&ctx.group.inverse(z), &g).unwrap();
                total += ctx.group_cutoff(&zg).unwrap();
            }
            assert_eq!(total, 1.0, "partition of unity fails at {g:?}");
        }
    }

    #[test]
    fn representative_is_idempotent() {
        let ctx = dinf_ctx();
        for g in ctx.group.enumerate_ball(3) {
            let rep = ctx.coset_representative(&g).unwrap();
            assert_eq!(ctx.coset_representative(&rep).unwrap(), rep);
            assert_eq!(ctx.group_cutoff(&rep).unwrap(), 1.0);
        }
    }

    #[test]
    fn class_of_point_reflection_in_p2() {
        let g = Arc::new(builtin_group("p2").unwrap());
        let neg = g
            .generators
            .iter()
            .find(|e| !e.is_identity() && e.tr.iter().all(num_traits::Zero::is_zero))
            .cloned()
            .unwrap();
        let ctx = ConjugacyContext::new(g.clone(), neg, 10).unwrap();
        let class = ctx.class_in_ball(4).unwrap();
        // conjugates are point reflections about lattice points: centers 2w/2 = w
        for c in &class {
            assert_eq!(c.lin, ctx.gamma.lin);
            for coord in &c.tr {
                assert_eq!(*coord.denom(), 1, "translation parts stay even-integral");
            }
        }
        assert!(class.len() > 5);
    }

    #[test]
    fn tuple_weight_invariant_under_diagonal_centralizer_action() {
        let ctx = dinf_ctx();
        let ball = ctx.group.enumerate_ball(2);
        let zs = ctx.centralizer_ball(4);
        for a in ball.iter().step_by(2) {
            for b in ball.iter().step_by(3) {
                let t = vec![a.clone(), b.clone()];
                let w = ctx.tuple_weight(&t).unwrap();
                for z in &zs {
                    let t2 = vec![
                        ctx.group.compose(z, a).unwrap(),
                        ctx.group.compose(z, b).unwrap(),
                    ];
                    assert_eq!(ctx.tuple_weight(&t2).unwrap(), w);
                }
            }
        }
    }

    #[test]
    fn milnor_svarc_z_example() {
        // Z on R, F = [0,1]: tau = 1/2, kappa = 2 validated on ball(20)
        let g = builtin_group("z1").unwrap();
        let ms = MilnorSvarc { tau: 0.5, kappa: 2.0, validation_radius: 20 };
        assert!(ms.validate(&g, &[(0.0, 1.0)], 20, 0.1).unwrap());
    }

    #[test]
    fn milnor_svarc_fit_dinf() {
        let g = builtin_group("dinf").unwrap();
        let ms = MilnorSvarc::fit(&g, &[(-0.6, 0.6)], 15, 0.2).unwrap();
        assert!(ms.validate(&g, &[(-0.6, 0.6)], 15, 0.2).unwrap());
        assert!(ms.tau > 0.0 && ms.kappa > 0.0);
    }

    #[test]
    fn milnor_svarc_rejects_empty_box() {
        let g = builtin_group("z1").unwrap();
        assert!(MilnorSvarc::fit(&g, &[], 5, 0.1).is_err());
    }
}
