//! Built-in cochains: constants, translation markers on reflection groups,
//! pullbacks of lattice homomorphisms, the lattice area cocycle, a bounded
//! non-cocycle for negative controls, and table-backed cochains from config.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::{permutations_signed, GroupCochain};
use crate::group::{ratio_f64, ConjugacyContext, CrystallographicGroup, GroupElement};
use crate::{Error, Result};

/// Constant cochain in degree 0.
pub fn constant(value: f64) -> GroupCochain {
    let integral = value.fract() == 0.0;
    GroupCochain::new(
        0,
        &format!("const({value})"),
        integral,
        Arc::new(move |_: &[GroupElement]| Complex64::new(value, 0.0)),
    )
}

/// The reflection-invariant translation marker `s(g) = <e_axis, A_g v_g>`
/// in degree 0.
///
/// For a point reflection `γ = (-1, 0)` the marker satisfies both Lott
/// invariances: `s(zg) = s(g)` for `z ∈ Z_γ` and `s(γg) = s(g)`, because
/// negating both the linear and translation part leaves `A_g v_g` fixed.
pub fn translation_marker(group: &Arc<CrystallographicGroup>, axis: usize) -> GroupCochain {
    let n = group.dim;
    GroupCochain::new(
        0,
        &format!("marker0[{axis}]"),
        true,
        Arc::new(move |t: &[GroupElement]| {
            let g = &t[0];
            let mut v = 0.0;
            for j in 0..n {
                v += ratio_f64(g.lin[axis * n + j]) * ratio_f64(g.tr[j]);
            }
            Complex64::new(v, 0.0)
        }),
    )
}

/// Degree-1 coboundary of the translation marker:
/// `c(γ_0, γ_1) = s(γ_1) - s(γ_0)`.
pub fn marker_coboundary(group: &Arc<CrystallographicGroup>, axis: usize) -> GroupCochain {
    let s = translation_marker(group, axis);
    let d = s.delta();
    GroupCochain::new(1, &format!("marker1[{axis}]"), true, Arc::new(move |t: &[GroupElement]| d.eval(t)))
}

/// Degree-1 cocycle on a lattice group from a linear functional on
/// translations: `c(γ_0, γ_1) = <λ, v_1 - v_0>`. Valid for `γ = e`.
pub fn lattice_hom(lambda: Vec<f64>) -> GroupCochain {
    GroupCochain::new(
        1,
        "hom1",
        lambda.iter().all(|c| c.fract() == 0.0),
        Arc::new(move |t: &[GroupElement]| {
            let v: f64 = lambda
                .iter()
                .enumerate()
                .map(|(i, l)| l * (ratio_f64(t[1].tr[i]) - ratio_f64(t[0].tr[i])))
                .sum();
            Complex64::new(v, 0.0)
        }),
    )
}

/// The lattice area cocycle on `Z²` (γ = e):
/// `c(γ_0, γ_1, γ_2) = det(v_1 - v_0, v_2 - v_0)`.
///
/// Antisymmetric, translation-invariant, and closed; it generates `H²(Z²)`.
pub fn area_cocycle() -> GroupCochain {
    GroupCochain::new(
        2,
        "area",
        true,
        Arc::new(|t: &[GroupElement]| {
            let v = |g: &GroupElement, i: usize| ratio_f64(g.tr[i]);
            let a = [v(&t[1], 0) - v(&t[0], 0), v(&t[1], 1) - v(&t[0], 1)];
            let b = [v(&t[2], 0) - v(&t[0], 0), v(&t[2], 1) - v(&t[0], 1)];
            Complex64::new(a[0] * b[1] - a[1] * b[0], 0.0)
        }),
    )
}

/// Bounded degree-1 non-cocycle on a lattice group (γ = e): `u(v_1 - v_0)`
/// with `u` odd and saturating, so `δc ≠ 0` while EG holds trivially.
pub fn bounded_noncocycle(axis: usize) -> GroupCochain {
    GroupCochain::new(
        1,
        &format!("nc1[{axis}]"),
        false,
        Arc::new(move |t: &[GroupElement]| {
            let d = ratio_f64(t[1].tr[axis]) - ratio_f64(t[0].tr[axis]);
            Complex64::new(d.tanh(), 0.0)
        }),
    )
}

/// Degree-2 cocycle `δ(nc1)` used where an inhomogeneous closed 2-cochain is
/// needed on the line.
pub fn noncocycle_coboundary(axis: usize) -> GroupCochain {
    let c = bounded_noncocycle(axis);
    let d = c.delta();
    GroupCochain::new(2, &format!("dnc2[{axis}]"), false, Arc::new(move |t: &[GroupElement]| d.eval(t)))
}

/// Table-backed cochain: explicit values on seed tuples, closed under signed
/// permutations and the diagonal action of the centralizer ball. Build fails
/// when two seeds land in the same orbit with conflicting values.
pub fn from_table(
    ctx: &ConjugacyContext,
    degree: usize,
    name: &str,
    seeds: Vec<(Vec<GroupElement>, Complex64)>,
    closure_radius: usize,
) -> Result<GroupCochain> {
    let group = ctx.group.clone();
    let zs: Vec<GroupElement> = ctx.centralizer_ball(closure_radius);
    let gamma_powers: Vec<GroupElement> = {
        let mut ps = vec![group.identity()];
        let mut acc = ctx.gamma.clone();
        for _ in 1..ctx.order {
            ps.push(acc.clone());
            acc = group.compose(&acc, &ctx.gamma)?;
        }
        ps
    };
    let perms = permutations_signed(degree + 1);
    let mut table: HashMap<Vec<GroupElement>, Complex64> = HashMap::new();
    let insert = |t: Vec<GroupElement>,
                      v: Complex64,
                      table: &mut HashMap<Vec<GroupElement>, Complex64>|
     -> Result<()> {
        if let Some(old) = table.get(&t) {
            if (*old - v).norm() > 1e-12 {
                return Err(Error::Config(format!("inconsistent table closure for `{name}` at {t:?}")));
            }
        } else {
            table.insert(t, v);
        }
        Ok(())
    };
    for (seed, value) in seeds {
        if seed.len() != degree + 1 {
            return Err(Error::Config(format!("seed arity mismatch in `{name}`")));
        }
        for z in &zs {
            for gp in &gamma_powers {
                // z-diagonal then γ-power in slot 0
                let mut base: Vec<GroupElement> =
                    seed.iter().map(|g| group.compose(z, g).unwrap()).collect();
                base[0] = group.compose(gp, &base[0])?;
                for (perm, sgn) in &perms {
                    let t: Vec<GroupElement> = perm.iter().map(|&i| base[i].clone()).collect();
                    insert(t, value * *sgn, &mut table)?;
                }
            }
        }
    }
    let table = Arc::new(table);
    Ok(GroupCochain::new(
        degree,
        name,
        false,
        Arc::new(move |t: &[GroupElement]| {
            table.get(t).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0))
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::{lott_check, sample_tuples};
    use crate::group::builtin_group;

    #[test]
    fn area_cocycle_is_closed_and_invariant() {
        let g = Arc::new(builtin_group("z2").unwrap());
        let ctx = ConjugacyContext::new(g.clone(), g.identity(), 6).unwrap();
        let c = area_cocycle();
        assert!(lott_check(&ctx, &c, 2, 1e-12).passed());
        let dc = c.delta();
        for t in sample_tuples(&g.enumerate_ball(2), 4, 80) {
            assert_eq!(dc.eval(&t).norm(), 0.0, "area cocycle not closed at {t:?}");
        }
    }

    #[test]
    fn lattice_hom_is_a_cocycle() {
        let g = Arc::new(builtin_group("z2").unwrap());
        let ctx = ConjugacyContext::new(g.clone(), g.identity(), 6).unwrap();
        let c = lattice_hom(vec![1.0, 2.0]);
        assert!(lott_check(&ctx, &c, 2, 1e-12).passed());
        let dc = c.delta();
        for t in sample_tuples(&g.enumerate_ball(2), 3, 60) {
            assert!(dc.eval(&t).norm() < 1e-13);
        }
    }

    #[test]
    fn noncocycle_is_invariant_but_not_closed() {
        let g = Arc::new(builtin_group("z1").unwrap());
        let ctx = ConjugacyContext::new(g.clone(), g.identity(), 6).unwrap();
        let c = bounded_noncocycle(0);
        assert!(lott_check(&ctx, &c, 2, 1e-12).passed());
        let dc = c.delta();
        let ball = g.enumerate_ball(3);
        let nonzero = sample_tuples(&ball, 3, 200)
            .iter()
            .any(|t| dc.eval(t).norm() > 1e-6);
        assert!(nonzero, "δ(nc1) should not vanish");
    }

    #[test]
    fn table_cochain_closure_and_inconsistency() {
        let g = Arc::new(builtin_group("dinf").unwrap());
        let r = g.generators[2].clone();
        let ctx = ConjugacyContext::new(g.clone(), r, 8).unwrap();
        let t1 = g.generators[0].clone();
        let e = g.identity();
        let c = from_table(
            &ctx,
            1,
            "tbl",
            vec![(vec![e.clone(), t1.clone()], Complex64::new(2.0, 0.0))],
            4,
        )
        .unwrap();
        assert_eq!(c.eval(&[e.clone(), t1.clone()]).re, 2.0);
        assert_eq!(c.eval(&[t1.clone(), e.clone()]).re, -2.0);
        assert!(lott_check(&ctx, &c, 2, 1e-12).passed());
        // conflicting closure: value on (e, t1) and its swap with the same sign
        let bad = from_table(
            &ctx,
            1,
            "bad",
            vec![
                (vec![e.clone(), t1.clone()], Complex64::new(1.0, 0.0)),
                (vec![t1, e], Complex64::new(1.0, 0.0)),
            ],
            4,
        );
        assert!(bad.is_err());
    }
}
