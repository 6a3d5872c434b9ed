//! Getzler-order bookkeeping.
//!
//! The grading assigns `deg ∂_j = ½ deg ∂_t = deg c(dx_j) = -deg x_j = 1`.
//! Orders compose additively along operator products; the commutators
//! `[D², f]` and `[D², c(df)]` carry the improved orders 1 and 2 rather than
//! the naive sums. This module only bookkeeps degrees — it does not build
//! symbols — which is enough to reproduce the projector-entry table and to
//! drive the small-time vanishing criterion `Σ m_i < -2k`.

use crate::{Error, Result};

/// Catalogued atoms with their Getzler orders.
#[derive(Debug, Clone, PartialEq)]
pub enum GetzlerAtom {
    /// Spatial derivative `∂_j`: order 1.
    SpatialDeriv,
    /// Time derivative `∂_t`: order 2.
    TimeDeriv,
    /// Clifford multiplication `c(dx_j)` or `c(df)`: order 1.
    Clifford,
    /// Coordinate multiplication `x_j`: order -1.
    Coordinate,
    /// Compactly supported smooth factor `f`: order 0.
    SmoothFunction,
    /// The Dirac operator `D = Σ c(e_i) ∇_i`: order 2.
    Dirac,
    /// `D²` (Lichnerowicz form): order 2.
    DiracSquared,
    /// Heat semigroup factor, Volterra `(a D² + ∂_t)^{-1}`: order -2.
    HeatResolvent,
    /// Forward heat operator `a D² + ∂_t`: order 2.
    HeatOperator,
    /// Commutator of two words, with the two special cases of the lemma
    /// upgraded: `[D², f] -> 1`, `[D², c(df)] -> 2`.
    Commutator(Box<GetzlerWord>, Box<GetzlerWord>),
}

impl GetzlerAtom {
    pub fn order(&self) -> Result<i64> {
        Ok(match self {
            GetzlerAtom::SpatialDeriv => 1,
            GetzlerAtom::TimeDeriv => 2,
            GetzlerAtom::Clifford => 1,
            GetzlerAtom::Coordinate => -1,
            GetzlerAtom::SmoothFunction => 0,
            GetzlerAtom::Dirac => 2,
            GetzlerAtom::DiracSquared => 2,
            GetzlerAtom::HeatResolvent => -2,
            GetzlerAtom::HeatOperator => 2,
            GetzlerAtom::Commutator(a, b) => {
                // the two upgraded cases of the commutator lemma
                let fa = (a.atoms.as_slice(), b.atoms.as_slice());
                match fa {
                    ([GetzlerAtom::DiracSquared], [GetzlerAtom::SmoothFunction]) => 1,
                    ([GetzlerAtom::DiracSquared], [GetzlerAtom::Clifford]) => 2,
                    _ => a.order()? + b.order()?,
                }
            }
        })
    }
}

/// A word in the catalogued atoms: the Getzler order of the product is the
/// sum of the atom orders.
#[derive(Debug, Clone, PartialEq)]
pub struct GetzlerWord {
    pub atoms: Vec<GetzlerAtom>,
}

impl GetzlerWord {
    pub fn new(atoms: Vec<GetzlerAtom>) -> Self {
        Self { atoms }
    }

    pub fn order(&self) -> Result<i64> {
        if self.atoms.is_empty() {
            return Err(Error::Degenerate("empty Getzler word".into()));
        }
        self.atoms.iter().map(GetzlerAtom::order).sum()
    }

    pub fn concat(&self, other: &GetzlerWord) -> GetzlerWord {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        GetzlerWord::new(atoms)
    }
}

/// Order of a word (sum of atom orders with the commutator upgrades).
pub fn getzler_order(w: &GetzlerWord) -> Result<i64> {
    w.order()
}

/// `Σ m_i < -2k` forces the small-time limit of the geometric trace to
/// vanish.
pub fn vanishing_criterion(orders: &[i64]) -> bool {
    let sum: i64 = orders.iter().sum();
    sum < -2 * orders.len() as i64
}

fn word(atoms: Vec<GetzlerAtom>) -> GetzlerWord {
    GetzlerWord::new(atoms)
}

fn commutator(a: GetzlerWord, b: GetzlerWord) -> GetzlerAtom {
    GetzlerAtom::Commutator(Box::new(a), Box::new(b))
}

/// The eight Volterra compositions of the projector-entry table, in row
/// order, with their expected orders.
pub fn table_words() -> Vec<(String, GetzlerWord, i64)> {
    use GetzlerAtom as A;
    let heat = || word(vec![A::HeatResolvent]); // (D² + ∂_t)^{-1}
    let double_heat = || word(vec![A::HeatResolvent, A::HeatResolvent]); // (½D²+∂_t)^{-1}(3/2 D²+∂_t)^{-1}
    let f = || word(vec![A::SmoothFunction]);
    let cdf = || word(vec![A::Clifford]);
    let d2f = || word(vec![A::DiracSquared]);
    vec![
        (
            "heat * f".into(),
            heat().concat(&f()),
            -2,
        ),
        (
            "[heat, f]".into(),
            word(vec![A::HeatResolvent, commutator(d2f(), f()), A::HeatResolvent]),
            -3,
        ),
        (
            "double-heat * f".into(),
            double_heat().concat(&f()),
            -4,
        ),
        (
            "[double-heat, f]".into(),
            word(vec![
                A::HeatResolvent,
                A::HeatResolvent,
                commutator(d2f(), f()),
                A::HeatOperator,
                A::HeatResolvent,
                A::HeatResolvent,
            ]),
            -5,
        ),
        (
            "heat * c(df)".into(),
            heat().concat(&cdf()),
            -1,
        ),
        (
            "[heat, c(df)]".into(),
            word(vec![A::HeatResolvent, commutator(d2f(), cdf()), A::HeatResolvent]),
            -2,
        ),
        (
            "double-heat * c(df)".into(),
            double_heat().concat(&cdf()),
            -3,
        ),
        (
            "[double-heat, c(df)]".into(),
            word(vec![
                A::HeatResolvent,
                A::HeatResolvent,
                commutator(d2f(), cdf()),
                A::HeatOperator,
                A::HeatResolvent,
                A::HeatResolvent,
            ]),
            -4,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use GetzlerAtom as A;

    #[test]
    fn commutator_upgrades() {
        // [D², f] has order 1 and [D², c(df)] has order 2
        let d2 = GetzlerWord::new(vec![A::DiracSquared]);
        let f = GetzlerWord::new(vec![A::SmoothFunction]);
        let cdf = GetzlerWord::new(vec![A::Clifford]);
        assert_eq!(commutator(d2.clone(), f).order().unwrap(), 1);
        assert_eq!(commutator(d2, cdf).order().unwrap(), 2);
    }

    #[test]
    fn all_table_rows_match() {
        for (name, w, expect) in table_words() {
            assert_eq!(getzler_order(&w).unwrap(), expect, "row `{name}`");
        }
    }

    #[test]
    fn concatenation_is_additive_without_commutators() {
        let a = GetzlerWord::new(vec![A::HeatResolvent, A::Clifford]);
        let b = GetzlerWord::new(vec![A::SpatialDeriv, A::Coordinate, A::TimeDeriv]);
        let oa = a.order().unwrap();
        let ob = b.order().unwrap();
        assert_eq!(a.concat(&b).order().unwrap(), oa + ob);
    }

    #[test]
    fn grading_of_the_basic_atoms() {
        assert_eq!(A::SpatialDeriv.order().unwrap(), 1);
        assert_eq!(A::TimeDeriv.order().unwrap(), 2);
        assert_eq!(A::Clifford.order().unwrap(), 1);
        assert_eq!(A::Coordinate.order().unwrap(), -1);
    }

    #[test]
    fn vanishing_criterion_threshold() {
        assert!(vanishing_criterion(&[-3, -3])); // -6 < -4
        assert!(!vanishing_criterion(&[-2, -2])); // -4 is not < -4
    }
}
