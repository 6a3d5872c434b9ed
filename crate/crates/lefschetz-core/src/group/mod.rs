//! Crystallographic groups `Γ = L ⋊ F` acting by affine isometries on `R^n`.
//!
//! Elements are stored in exact rational form `x ↦ A x + v` with `A` an
//! orthogonal rational matrix and `v` a rational vector, so composition,
//! inverses, conjugacy and centralizer tests are free of float drift. The
//! word metric is a breadth-first search over a configured symmetric
//! generating set, memoized in ball tables that are grown on demand.

mod catalog;
mod conjugacy;

pub use catalog::builtin_group;
pub use conjugacy::{box_grid, ConjugacyContext, MilnorSvarc};

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use num_rational::Ratio;
use num_traits::Zero;

use crate::{Error, Result};

/// Exact scalar used for group data.
pub type Q = Ratio<i64>;

fn q(n: i64) -> Q {
    Ratio::from_integer(n)
}

static GROUP_IDS: AtomicU64 = AtomicU64::new(1);

/// Affine isometry `x ↦ A x + v` in exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    /// Row-major `n×n` orthogonal matrix.
    pub lin: Vec<Q>,
    /// Translation part.
    pub tr: Vec<Q>,
    /// Stamp of the owning group, used to reject cross-group arithmetic.
    pub group_id: u64,
}

impl GroupElement {
    pub fn dim(&self) -> usize {
        self.tr.len()
    }

    /// Apply to a float point.
    pub fn act(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n, "point dimension mismatch");
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = ratio_f64(self.tr[i]);
            for j in 0..n {
                acc += ratio_f64(self.lin[i * n + j]) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// Apply to an exact rational point.
    pub fn act_exact(&self, x: &[Q]) -> Vec<Q> {
        let n = self.dim();
        let mut y = self.tr.clone();
        for i in 0..n {
            for j in 0..n {
                y[i] += self.lin[i * n + j] * x[j];
            }
        }
        y
    }

    pub fn is_identity(&self) -> bool {
        let n = self.dim();
        self.tr.iter().all(|c| c.is_zero())
            && (0..n).all(|i| (0..n).all(|j| self.lin[i * n + j] == if i == j { q(1) } else { q(0) }))
    }

    /// Total order used for canonical coset representatives: lexicographic on
    /// the exact matrix and translation entries. Word length is compared
    /// separately by callers.
    pub fn lex_key(&self) -> (Vec<Q>, Vec<Q>) {
        (self.lin.clone(), self.tr.clone())
    }
}

pub(crate) fn ratio_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A point-group representative: orthogonal matrix plus fractional translation.
#[derive(Debug, Clone)]
pub struct PointGroupRep {
    pub lin: Vec<Q>,
    pub frac: Vec<Q>,
}

/// Finitely generated crystallographic group with its word-metric state.
#[derive(Debug)]
pub struct CrystallographicGroup {
    pub dim: usize,
    /// Columns of the translation lattice basis.
    pub lattice: Vec<Vec<Q>>,
    /// Point group `F` with fractional translations.
    pub point_group: Vec<PointGroupRep>,
    /// Symmetric generating set.
    pub generators: Vec<GroupElement>,
    pub name: String,
    id: u64,
    bfs: Mutex<BfsState>,
}

#[derive(Debug)]
struct BfsState {
    /// Canonical element -> word length.
    table: HashMap<GroupElement, u32>,
    /// Frontier of the last completed radius.
    frontier: Vec<GroupElement>,
    /// Elements ordered by (length, lex), per completed radius.
    layers: Vec<Vec<GroupElement>>,
    radius_done: i64,
}

impl Default for BfsState {
    fn default() -> Self {
        Self { table: HashMap::new(), frontier: Vec::new(), layers: Vec::new(), radius_done: -1 }
    }
}

impl CrystallographicGroup {
    /// Build a group from raw data; validates orthogonality and symmetry of
    /// the generating set.
    pub fn new(
        name: &str,
        dim: usize,
        lattice: Vec<Vec<Q>>,
        point_group: Vec<PointGroupRep>,
        generators: Vec<(Vec<Q>, Vec<Q>)>,
    ) -> Result<Self> {
        let id = GROUP_IDS.fetch_add(1, Ordering::Relaxed);
        let g = Self {
            dim,
            lattice,
            point_group,
            generators: Vec::new(),
            name: name.to_string(),
            id,
            bfs: Mutex::new(BfsState::default()),
        };
        let mut gens = Vec::new();
        for (lin, tr) in generators {
            let e = GroupElement { lin, tr, group_id: id };
            if e.lin.len() != dim * dim || e.tr.len() != dim {
                return Err(Error::Config(format!("generator shape mismatch in {name}")));
            }
            if !is_orthogonal(&e.lin, dim) {
                return Err(Error::Config(format!("non-orthogonal generator in {name}")));
            }
            gens.push(e);
        }
        let g = Self { generators: gens, ..g };
        // S = S^{-1}
        for e in &g.generators {
            let inv = g.inverse(e);
            if !g.generators.contains(&inv) {
                return Err(Error::Config(format!("generating set of {name} is not symmetric")));
            }
        }
        Ok(g)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn identity(&self) -> GroupElement {
        let n = self.dim;
        let mut lin = vec![q(0); n * n];
        for i in 0..n {
            lin[i * n + i] = q(1);
        }
        GroupElement { lin, tr: vec![q(0); n], group_id: self.id }
    }

    /// Affine composition `(A_a A_b, A_a v_b + v_a)`.
    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        if a.group_id != self.id || b.group_id != self.id {
            return Err(Error::GroupMismatch(format!(
                "elements of groups {}/{} composed in group {}",
                a.group_id, b.group_id, self.id
            )));
        }
        let n = self.dim;
        let mut lin = vec![q(0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = q(0);
                for k in 0..n {
                    acc += a.lin[i * n + k] * b.lin[k * n + j];
                }
                lin[i * n + j] = acc;
            }
        }
        let mut tr = a.tr.clone();
        for i in 0..n {
            for j in 0..n {
                tr[i] += a.lin[i * n + j] * b.tr[j];
            }
        }
        Ok(GroupElement { lin, tr, group_id: self.id })
    }

    /// Exact inverse. Orthogonality gives `A^{-1} = A^T`.
    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        let n = self.dim;
        let mut lin = vec![q(0); n * n];
        for i in 0..n {
            for j in 0..n {
                lin[i * n + j] = a.lin[j * n + i];
            }
        }
        let mut tr = vec![q(0); n];
        for i in 0..n {
            let mut acc = q(0);
            for j in 0..n {
                acc += lin[i * n + j] * a.tr[j];
            }
            tr[i] = -acc;
        }
        GroupElement { lin, tr, group_id: self.id }
    }

    pub fn conjugate(&self, h: &GroupElement, g: &GroupElement) -> Result<GroupElement> {
        // h^{-1} g h
        let hi = self.inverse(h);
        self.compose(&self.compose(&hi, g)?, h)
    }

    pub fn commutes(&self, a: &GroupElement, b: &GroupElement) -> Result<bool> {
        Ok(self.compose(a, b)? == self.compose(b, a)?)
    }

    /// Order of a torsion element, or `None` if no power up to `max` is the
    /// identity.
    pub fn torsion_order(&self, g: &GroupElement, max: usize) -> Option<usize> {
        let mut p = g.clone();
        for k in 1..=max {
            if p.is_identity() {
                return Some(k);
            }
            p = self.compose(&p, g).ok()?;
        }
        None
    }

    /// Covolume of the translation lattice (|det| of the basis).
    pub fn lattice_covolume(&self) -> f64 {
        let n = self.dim;
        let mut m = vec![0.0; n * n];
        for (j, col) in self.lattice.iter().enumerate() {
            for i in 0..n {
                m[i * n + j] = ratio_f64(col[i]);
            }
        }
        det_f64(&m, n).abs()
    }

    fn grow_ball(&self, radius: usize) {
        let mut st = self.bfs.lock().unwrap();
        if st.radius_done < 0 {
            let e = self.identity();
            st.table.insert(e.clone(), 0);
            st.frontier = vec![e.clone()];
            st.layers = vec![vec![e]];
            st.radius_done = 0;
        }
        while (st.radius_done as usize) < radius {
            let mut next = Vec::new();
            let frontier = std::mem::take(&mut st.frontier);
            let new_len = st.radius_done as u32 + 1;
            for g in &frontier {
                for s in &self.generators {
                    let h = self.compose(g, s).expect("same group");
                    if !st.table.contains_key(&h) {
                        st.table.insert(h.clone(), new_len);
                        next.push(h);
                    }
                }
            }
            next.sort_by(|a, b| a.lex_key().cmp(&b.lex_key()));
            st.layers.push(next.clone());
            st.frontier = next;
            st.radius_done += 1;
        }
    }

    /// Graph distance from the identity in the Cayley graph over `S`.
    pub fn word_length(&self, g: &GroupElement, max_radius: usize) -> Result<u32> {
        self.grow_ball(0);
        {
            let st = self.bfs.lock().unwrap();
            if let Some(&l) = st.table.get(g) {
                return Ok(l);
            }
        }
        let mut r = {
            let st = self.bfs.lock().unwrap();
            st.radius_done as usize
        };
        while r < max_radius {
            r += 1;
            self.grow_ball(r);
            let st = self.bfs.lock().unwrap();
            if let Some(&l) = st.table.get(g) {
                return Ok(l);
            }
        }
        Err(Error::RadiusExceeded { what: format!("element of {}", self.name), radius: max_radius })
    }

    /// All `g` with `l(g) <= radius`, deterministically ordered by
    /// `(l(g), lexicographic canonical form)`.
    pub fn enumerate_ball(&self, radius: usize) -> Vec<GroupElement> {
        self.grow_ball(radius);
        let st = self.bfs.lock().unwrap();
        let mut out = Vec::new();
        for layer in st.layers.iter().take(radius + 1) {
            out.extend(layer.iter().cloned());
        }
        out
    }

    /// Size of the ball of the given radius.
    pub fn ball_size(&self, radius: usize) -> usize {
        self.enumerate_ball(radius).len()
    }
}

pub(crate) fn is_orthogonal(lin: &[Q], n: usize) -> bool {
    for i in 0..n {
        for j in 0..n {
            let mut acc = q(0);
            for k in 0..n {
                acc += lin[k * n + i] * lin[k * n + j];
            }
            if acc != if i == j { q(1) } else { q(0) } {
                return false;
            }
        }
    }
    true
}

/// Determinant of a small dense float matrix by partial-pivot elimination.
pub fn det_f64(m: &[f64], n: usize) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-14 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            det = -det;
        }
        det *= a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
        }
    }
    det
}

/// Parse an exact rational written as `p/q` or a plain integer.
pub fn parse_ratio(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((p, qq)) = s.split_once('/') {
        let num: i64 = p.trim().parse().map_err(|_| Error::Config(format!("bad rational {s}")))?;
        let den: i64 = qq.trim().parse().map_err(|_| Error::Config(format!("bad rational {s}")))?;
        if den == 0 {
            return Err(Error::Config(format!("zero denominator in {s}")));
        }
        Ok(Ratio::new(num, den))
    } else {
        let num: i64 = s.parse().map_err(|_| Error::Config(format!("bad rational {s}")))?;
        Ok(Ratio::from_integer(num))
    }
}

/// Euclidean distance between float points.
pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_identity_and_involution() {
        let g = builtin_group("dinf").unwrap();
        let e = g.identity();
        let r = &g.generators[2]; // x -> -x
        assert_eq!(g.compose(r, &e).unwrap(), *r);
        assert!(g.compose(r, r).unwrap().is_identity());
    }

    #[test]
    fn affine_arithmetic_on_points() {
        let g = builtin_group("dinf").unwrap();
        let t1 = &g.generators[0];
        let r = &g.generators[2];
        // t1 ∘ r applied to 0.3 -> 0.7
        let tr = g.compose(t1, r).unwrap();
        let y = tr.act(&[0.3]);
        assert!((y[0] - 0.7).abs() < 1e-15);
        assert!((r.act(&[0.4])[0] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn p4_rotation_acts() {
        let g = builtin_group("p4").unwrap();
        let rot = g
            .generators
            .iter()
            .find(|e| e.tr.iter().all(|c| c.is_zero()) && !e.is_identity())
            .unwrap();
        let y = rot.act(&[1.0, 0.0]);
        assert!((y[0].abs() < 1e-15 && (y[1].abs() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn word_lengths_match_bfs_oracle() {
        let g = builtin_group("dinf").unwrap();
        // independent oracle: brute-force product enumeration up to length 4
        let mut reached: HashMap<GroupElement, u32> = HashMap::new();
        reached.insert(g.identity(), 0);
        let mut frontier = vec![g.identity()];
        for l in 1..=4u32 {
            let mut next = Vec::new();
            for h in &frontier {
                for s in &g.generators {
                    let p = g.compose(h, s).unwrap();
                    reached.entry(p.clone()).or_insert_with(|| {
                        next.push(p.clone());
                        l
                    });
                }
            }
            frontier = next;
        }
        for (el, l) in reached {
            assert_eq!(g.word_length(&el, 8).unwrap(), l);
        }
        // t3 and t2∘r both have length 3 in S = {t1, t-1, r}
        let t1 = &g.generators[0];
        let r = &g.generators[2];
        let t2 = g.compose(t1, t1).unwrap();
        let t3 = g.compose(&t2, t1).unwrap();
        let t2r = g.compose(&t2, r).unwrap();
        assert_eq!(g.word_length(&t3, 8).unwrap(), 3);
        assert_eq!(g.word_length(&t2r, 8).unwrap(), 3);
        assert_eq!(g.word_length(&g.identity(), 8).unwrap(), 0);
    }

    #[test]
    fn ball_enumeration_z() {
        let g = builtin_group("z1").unwrap();
        assert_eq!(g.ball_size(0), 1);
        assert_eq!(g.ball_size(2), 5);
        let ball = g.enumerate_ball(2);
        // deterministic order and uniqueness
        let set: std::collections::HashSet<_> = ball.iter().cloned().collect();
        assert_eq!(set.len(), ball.len());
    }

    #[test]
    fn word_length_is_symmetric_metric() {
        let g = builtin_group("p2").unwrap();
        for el in g.enumerate_ball(3) {
            let l = g.word_length(&el, 6).unwrap();
            let li = g.word_length(&g.inverse(&el), 6).unwrap();
            assert_eq!(l, li);
        }
        // triangle inequality on sampled pairs
        let ball = g.enumerate_ball(2);
        for a in &ball {
            for b in &ball {
                let ab = g.compose(&g.inverse(a), b).unwrap();
                let l = g.word_length(&ab, 8).unwrap() as i64;
                let la = g.word_length(a, 8).unwrap() as i64;
                let lb = g.word_length(b, 8).unwrap() as i64;
                assert!((la - lb).abs() <= l && l <= la + lb);
            }
        }
    }

    #[test]
    fn associativity_exact() {
        let g = builtin_group("p4").unwrap();
        let ball = g.enumerate_ball(2);
        for a in ball.iter().step_by(3) {
            for b in ball.iter().step_by(4) {
                for c in ball.iter().step_by(5) {
                    let ab_c = g.compose(&g.compose(a, b).unwrap(), c).unwrap();
                    let a_bc = g.compose(a, &g.compose(b, c).unwrap()).unwrap();
                    assert_eq!(ab_c, a_bc);
                    let inv = g.compose(&g.inverse(a), a).unwrap();
                    assert!(inv.is_identity());
                }
            }
        }
    }

    #[test]
    fn cross_group_composition_rejected() {
        let g1 = builtin_group("z1").unwrap();
        let g2 = builtin_group("z1").unwrap();
        let a = g1.identity();
        let b = g2.identity();
        assert!(g1.compose(&a, &b).is_err());
    }

    #[test]
    fn ball_growth_bound_fits_exponential() {
        let g = builtin_group("dinf").unwrap();
        let sizes: Vec<usize> = (0..=6).map(|r| g.ball_size(r)).collect();
        for w in sizes.windows(2) {
            assert!(w[1] >= w[0]);
        }
        // fitted constants C, K with |ball(r)| <= C e^{K r} on the sample
        let k = ((sizes[6] as f64).ln() / 6.0).max(0.05);
        let mut c: f64 = 1.0;
        for (r, s) in sizes.iter().enumerate() {
            c = c.max(*s as f64 / (k * r as f64).exp());
        }
        assert!(c.is_finite() && c >= 1.0);
        for (r, s) in sizes.iter().enumerate() {
            assert!((*s as f64) <= c * (k * r as f64).exp() * (1.0 + 1e-12));
        }
    }
}
