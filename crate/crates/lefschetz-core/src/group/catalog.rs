//! Built-in group catalog: `Z^n`, the infinite dihedral group on the line,
//! and the wallpaper groups p2 and p4. Other groups load from config.

use num_rational::Ratio;

use super::{CrystallographicGroup, PointGroupRep, Q};
use crate::{Error, Result};

fn q(n: i64) -> Q {
    Ratio::from_integer(n)
}

fn ident(n: usize) -> Vec<Q> {
    let mut m = vec![q(0); n * n];
    for i in 0..n {
        m[i * n + i] = q(1);
    }
    m
}

fn unit_lattice(n: usize) -> Vec<Vec<Q>> {
    (0..n)
        .map(|j| (0..n).map(|i| if i == j { q(1) } else { q(0) }).collect())
        .collect()
}

fn translation_gens(n: usize) -> Vec<(Vec<Q>, Vec<Q>)> {
    let mut gens = Vec::new();
    for j in 0..n {
        for sgn in [1i64, -1] {
            let mut tr = vec![q(0); n];
            tr[j] = q(sgn);
            gens.push((ident(n), tr));
        }
    }
    gens
}

/// Look up a catalog group by name.
///
/// Known names: `z1`, `z2`, `dinf` (= `Z ⋊ Z/2` on the line), `p2`
/// (= `Z² ⋊ Z/2` by point reflection), `p4` (= `Z² ⋊ Z/4`).
pub fn builtin_group(name: &str) -> Result<CrystallographicGroup> {
    match name {
        "z1" => CrystallographicGroup::new(
            "z1",
            1,
            unit_lattice(1),
            vec![PointGroupRep { lin: ident(1), frac: vec![q(0)] }],
            translation_gens(1),
        ),
        "z2" => CrystallographicGroup::new(
            "z2",
            2,
            unit_lattice(2),
            vec![PointGroupRep { lin: ident(2), frac: vec![q(0); 2] }],
            translation_gens(2),
        ),
        "dinf" => {
            let refl = vec![q(-1)];
            let mut gens = translation_gens(1);
            gens.push((refl.clone(), vec![q(0)]));
            CrystallographicGroup::new(
                "dinf",
                1,
                unit_lattice(1),
                vec![
                    PointGroupRep { lin: ident(1), frac: vec![q(0)] },
                    PointGroupRep { lin: refl, frac: vec![q(0)] },
                ],
                gens,
            )
        }
        "p2" => {
            let neg = vec![q(-1), q(0), q(0), q(-1)];
            let mut gens = translation_gens(2);
            gens.push((neg.clone(), vec![q(0); 2]));
            CrystallographicGroup::new(
                "p2",
                2,
                unit_lattice(2),
                vec![
                    PointGroupRep { lin: ident(2), frac: vec![q(0); 2] },
                    PointGroupRep { lin: neg, frac: vec![q(0); 2] },
                ],
                gens,
            )
        }
        "p4" => {
            let rot = vec![q(0), q(-1), q(1), q(0)]; // rotation by pi/2
            let rot3 = vec![q(0), q(1), q(-1), q(0)];
            let neg = vec![q(-1), q(0), q(0), q(-1)];
            let mut gens = translation_gens(2);
            gens.push((rot.clone(), vec![q(0); 2]));
            gens.push((rot3.clone(), vec![q(0); 2]));
            CrystallographicGroup::new(
                "p4",
                2,
                unit_lattice(2),
                vec![
                    PointGroupRep { lin: ident(2), frac: vec![q(0); 2] },
                    PointGroupRep { lin: rot, frac: vec![q(0); 2] },
                    PointGroupRep { lin: neg, frac: vec![q(0); 2] },
                    PointGroupRep { lin: rot3, frac: vec![q(0); 2] },
                ],
                gens,
            )
        }
        other => Err(Error::Config(format!("unknown builtin group `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_groups_build() {
        for name in ["z1", "z2", "dinf", "p2", "p4"] {
            let g = builtin_group(name).unwrap();
            assert!(g.ball_size(2) > 1);
        }
    }

    #[test]
    fn p4_point_group_has_order_four_rotation() {
        let g = builtin_group("p4").unwrap();
        let rot = g
            .generators
            .iter()
            .find(|e| !e.is_identity() && e.tr.iter().all(num_traits::Zero::is_zero))
            .unwrap();
        assert_eq!(g.torsion_order(rot, 8), Some(4));
    }

    #[test]
    fn properness_on_fundamental_box() {
        // {g : g·box ∩ box ≠ ∅} is finite and stable under radius growth.
        let g = builtin_group("p2").unwrap();
        let hits = |radius: usize| {
            g.enumerate_ball(radius)
                .into_iter()
                .filter(|el| {
                    let c = el.act(&[0.5, 0.5]);
                    c[0] > -1.2 && c[0] < 2.2 && c[1] > -1.2 && c[1] < 2.2
                })
                .count()
        };
        let h6 = hits(6);
        let h8 = hits(8);
        assert_eq!(h6, h8);
        assert!(h6 > 0 && h6 < 200);
    }
}
