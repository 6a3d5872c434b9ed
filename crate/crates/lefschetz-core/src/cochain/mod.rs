//! The delocalized group-cochain complex and the cyclic complex of the group
//! algebra.
//!
//! A degree-`k` group cochain is an antisymmetric function on `Γ^{k+1}`,
//! invariant under the diagonal left action of the centralizer `Z_γ` and
//! under left multiplication by `γ` in slot 0. Cochains are evaluator-backed
//! closures over group data; tabulation happens only inside validation balls.
//! The chain map `τ` sends such a cochain to a cyclic cochain on the group
//! algebra supported on the conjugacy class of `γ`.

pub mod library;

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::group::{ConjugacyContext, GroupElement};
use crate::{Error, Result};

type Eval = Arc<dyn Fn(&[GroupElement]) -> Complex64 + Send + Sync>;

/// Antisymmetric `Z_γ`- and `γ`-invariant cochain on `Γ^{k+1}`.
#[derive(Clone)]
pub struct GroupCochain {
    pub degree: usize,
    pub name: String,
    /// Evaluators declaring integrality get exact-cancellation treatment in
    /// chain-identity tests.
    pub integer_valued: bool,
    eval: Eval,
}

impl GroupCochain {
    pub fn new(degree: usize, name: &str, integer_valued: bool, eval: Eval) -> Self {
        Self { degree, name: name.to_string(), integer_valued, eval }
    }

    pub fn eval(&self, tuple: &[GroupElement]) -> Complex64 {
        debug_assert_eq!(tuple.len(), self.degree + 1);
        (self.eval)(tuple)
    }

    /// Simplicial coboundary `(δc)(γ_0,…,γ_{k+1}) = Σ (-1)^i c(…, γ̂_i, …)`.
    pub fn delta(&self) -> GroupCochain {
        let inner = self.eval.clone();
        let k1 = self.degree + 1;
        GroupCochain {
            degree: k1,
            name: format!("delta({})", self.name),
            integer_valued: self.integer_valued,
            eval: Arc::new(move |tuple: &[GroupElement]| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..=k1 {
                    let sub: Vec<GroupElement> = tuple
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, g)| g.clone())
                        .collect();
                    let sgn = if i % 2 == 0 { 1.0 } else { -1.0 };
                    acc += inner(&sub) * sgn;
                }
                acc
            }),
        }
    }

    /// Antisymmetrize over the `k+1` slots. Idempotent on cochains that are
    /// already antisymmetric.
    pub fn antisymmetrize(&self) -> GroupCochain {
        let inner = self.eval.clone();
        let k1 = self.degree + 1;
        GroupCochain {
            degree: self.degree,
            name: format!("asym({})", self.name),
            integer_valued: false,
            eval: Arc::new(move |tuple: &[GroupElement]| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut count = 0.0;
                for (perm, sgn) in permutations_signed(k1) {
                    let t: Vec<GroupElement> = perm.iter().map(|&i| tuple[i].clone()).collect();
                    acc += inner(&t) * sgn;
                    count += 1.0;
                }
                acc / count
            }),
        }
    }
}

/// Outcome of an exhaustive invariance sweep.
#[derive(Debug, Clone)]
pub enum CheckOutcome {
    Pass,
    /// The violated law and a witness tuple.
    Fail { law: String, witness: Vec<GroupElement>, defect: f64 },
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }
}

/// Exhaustively test antisymmetry and both Lott invariances on tuples from
/// the ball of the given radius.
pub fn lott_check(ctx: &ConjugacyContext, c: &GroupCochain, radius: usize, tol: f64) -> CheckOutcome {
    let g = &ctx.group;
    let ball = g.enumerate_ball(radius);
    let zs: Vec<GroupElement> = ctx.centralizer_ball(radius);
    let tuples = sample_tuples(&ball, c.degree + 1, 400);
    for t in &tuples {
        let v = c.eval(t);
        // antisymmetry against adjacent transpositions
        for i in 0..c.degree {
            let mut s = t.clone();
            s.swap(i, i + 1);
            let w = c.eval(&s);
            if (v + w).norm() > tol {
                return CheckOutcome::Fail {
                    law: format!("antisymmetry in slots {i},{}", i + 1),
                    witness: t.clone(),
                    defect: (v + w).norm(),
                };
            }
        }
        // diagonal Z_γ-invariance
        for z in zs.iter().take(6) {
            let s: Vec<GroupElement> = t.iter().map(|gi| g.compose(z, gi).unwrap()).collect();
            let w = c.eval(&s);
            if (v - w).norm() > tol {
                return CheckOutcome::Fail {
                    law: "Z_gamma diagonal invariance".into(),
                    witness: t.clone(),
                    defect: (v - w).norm(),
                };
            }
        }
        // γ-invariance in slot 0
        let mut s = t.clone();
        s[0] = g.compose(&ctx.gamma, &t[0]).unwrap();
        let w = c.eval(&s);
        if (v - w).norm() > tol {
            return CheckOutcome::Fail {
                law: "gamma invariance in slot 0".into(),
                witness: t.clone(),
                defect: (v - w).norm(),
            };
        }
    }
    CheckOutcome::Pass
}

/// Cyclic cochain on the group algebra, evaluated on basis tuples
/// `(δ_{g_0},…,δ_{g_k})`.
#[derive(Clone)]
pub struct CyclicCochain {
    pub degree: usize,
    pub name: String,
    /// Whether the cochain is supported on the conjugacy class of a fixed γ.
    pub delocalized: bool,
    eval: Eval,
}

impl CyclicCochain {
    pub fn new(degree: usize, name: &str, delocalized: bool, eval: Eval) -> Self {
        Self { degree, name: name.to_string(), delocalized, eval }
    }

    pub fn eval(&self, tuple: &[GroupElement]) -> Complex64 {
        debug_assert_eq!(tuple.len(), self.degree + 1);
        (self.eval)(tuple)
    }

    /// Defect of `φ(a_k, a_0, …, a_{k-1}) = (-1)^k φ(a_0,…,a_k)` on a tuple.
    pub fn cyclicity_defect(&self, tuple: &[GroupElement]) -> f64 {
        let k = self.degree;
        let mut rot = tuple.to_vec();
        rot.rotate_right(1);
        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
        (self.eval(&rot) - self.eval(tuple) * sgn).norm()
    }

    /// Hochschild coboundary
    /// `bφ(a_0,…,a_{k+1}) = Σ (-1)^i φ(…, a_i a_{i+1}, …) + (-1)^{k+1} φ(a_{k+1}a_0,…)`.
    pub fn hochschild_b(&self, ctx: &ConjugacyContext) -> CyclicCochain {
        let inner = self.eval.clone();
        let k = self.degree;
        let group = ctx.group.clone();
        CyclicCochain {
            degree: k + 1,
            name: format!("b({})", self.name),
            delocalized: self.delocalized,
            eval: Arc::new(move |tuple: &[GroupElement]| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..=k {
                    let mut t: Vec<GroupElement> = Vec::with_capacity(k + 1);
                    t.extend_from_slice(&tuple[..i]);
                    t.push(group.compose(&tuple[i], &tuple[i + 1]).unwrap());
                    t.extend_from_slice(&tuple[i + 2..]);
                    let sgn = if i % 2 == 0 { 1.0 } else { -1.0 };
                    acc += inner(&t) * sgn;
                }
                let mut t: Vec<GroupElement> = Vec::with_capacity(k + 1);
                t.push(group.compose(&tuple[k + 1], &tuple[0]).unwrap());
                t.extend_from_slice(&tuple[1..=k]);
                let sgn = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
                acc + inner(&t) * sgn
            }),
        }
    }
}

/// Conjugacy-class table with the witness `η` for each class element
/// (`element = η^{-1} γ η`), certified complete inside `safe_length`.
pub struct ClassTable {
    map: HashMap<GroupElement, GroupElement>,
    pub safe_length: u32,
}

impl ClassTable {
    /// Build from conjugating elements in a ball, growing the ball until the
    /// class content inside the certified length range stabilizes.
    pub fn build(ctx: &ConjugacyContext, safe_length: u32) -> Result<ClassTable> {
        let g = &ctx.group;
        let mut radius = safe_length as usize + 2;
        let collect = |radius: usize| -> Result<HashMap<GroupElement, GroupElement>> {
            let mut map = HashMap::new();
            for h in g.enumerate_ball(radius) {
                let c = g.conjugate(&h, &ctx.gamma)?;
                map.entry(c).or_insert(h);
            }
            Ok(map)
        };
        loop {
            let cur = collect(radius)?;
            let next = collect(radius + 2)?;
            let in_range = |m: &HashMap<GroupElement, GroupElement>| -> Result<usize> {
                let mut n = 0;
                for k in m.keys() {
                    if g.word_length(k, radius + 8).unwrap_or(u32::MAX) <= safe_length {
                        n += 1;
                    }
                }
                Ok(n)
            };
            if in_range(&cur)? == in_range(&next)? {
                return Ok(ClassTable { map: cur, safe_length });
            }
            radius += 2;
            if radius > 40 {
                return Err(Error::RadiusExceeded { what: "conjugacy class table".into(), radius });
            }
        }
    }

    /// Witness for `p = η^{-1} γ η`, or `None` when `p` is (certifiedly) not
    /// in the class.
    pub fn eta_for(&self, p: &GroupElement) -> Option<&GroupElement> {
        self.map.get(p)
    }

    pub fn contains(&self, p: &GroupElement) -> bool {
        self.map.contains_key(p)
    }

    pub fn elements(&self) -> impl Iterator<Item = &GroupElement> {
        self.map.keys()
    }
}

/// The chain map `τ` from the delocalized complex to the cyclic complex.
///
/// `τ_c(δ_{g_0},…,δ_{g_k})` is `c(η, ηg_0, …, ηg_0⋯g_{k-1})` when
/// `g_0⋯g_k = η^{-1}γη` and zero when the product is outside the conjugacy
/// class. The value does not depend on the choice of `η`; see
/// [`check_eta_independence`].
pub fn lott_to_cyclic(ctx: &ConjugacyContext, c: &GroupCochain, class: Arc<ClassTable>) -> CyclicCochain {
    let group = ctx.group.clone();
    let k = c.degree;
    let c = c.clone();
    let safe = class.safe_length;
    CyclicCochain {
        degree: k,
        name: format!("tau({})", c.name),
        delocalized: true,
        eval: Arc::new(move |tuple: &[GroupElement]| {
            let mut p = tuple[0].clone();
            for gi in &tuple[1..] {
                p = group.compose(&p, gi).unwrap();
            }
            if group.word_length(&p, safe as usize + 8).map(|l| l > safe).unwrap_or(true) {
                // outside the certified range: treat as not in the class
                return Complex64::new(0.0, 0.0);
            }
            match class.eta_for(&p) {
                None => Complex64::new(0.0, 0.0),
                Some(eta) => {
                    let mut args = Vec::with_capacity(k + 1);
                    let mut acc = eta.clone();
                    args.push(acc.clone());
                    for gi in tuple.iter().take(k) {
                        acc = group.compose(&acc, gi).unwrap();
                        args.push(acc.clone());
                    }
                    c.eval(&args)
                }
            }
        }),
    }
}

/// Compare the two branch evaluations of `τ_c` for two distinct witnesses of
/// the same class element; the difference must vanish by `Z_γ`-invariance.
pub fn check_eta_independence(
    ctx: &ConjugacyContext,
    c: &GroupCochain,
    class: &ClassTable,
    tuple: &[GroupElement],
) -> Result<f64> {
    let group = &ctx.group;
    let mut p = tuple[0].clone();
    for gi in &tuple[1..] {
        p = group.compose(&p, gi)?;
    }
    let Some(eta1) = class.eta_for(&p) else {
        return Ok(0.0);
    };
    // a second witness: z·η for the first nontrivial centralizer element
    let z = ctx
        .centralizer_ball(4)
        .into_iter()
        .find(|z| !z.is_identity())
        .ok_or_else(|| Error::Degenerate("trivial centralizer ball".into()))?;
    let eta2 = group.compose(&z, eta1)?;
    let value = |eta: &GroupElement| -> Result<Complex64> {
        let mut args = Vec::with_capacity(c.degree + 1);
        let mut acc = eta.clone();
        args.push(acc.clone());
        for gi in tuple.iter().take(c.degree) {
            acc = group.compose(&acc, gi)?;
            args.push(acc.clone());
        }
        Ok(c.eval(&args))
    };
    Ok((value(eta1)? - value(&eta2)?).norm())
}

/// Exponential-growth certificate `|c| ≤ A e^{K |I|_γ}` validated on a ball.
#[derive(Debug, Clone, Copy)]
pub struct GrowthCertificate {
    pub a: f64,
    pub k: f64,
    pub validation_radius: usize,
    pub max_ratio: f64,
}

/// Check the bound `|c(γ_0,…,γ_k)| ≤ A e^{K |I|_γ}` on every sampled tuple
/// with entries in the ball; returns the certificate (with the attained max
/// ratio) or the witness of failure.
pub fn eg_verify(
    ctx: &ConjugacyContext,
    c: &GroupCochain,
    a: f64,
    k: f64,
    radius: usize,
) -> std::result::Result<GrowthCertificate, (Vec<GroupElement>, f64)> {
    assert!(a > 0.0 && k > 0.0);
    let ball = ctx.group.enumerate_ball(radius);
    let tuples = sample_tuples(&ball, c.degree + 1, 4000);
    let mut max_ratio: f64 = 0.0;
    for t in &tuples {
        let w = ctx.tuple_weight(t).expect("weight within radius") as f64;
        let bound = a * (k * w).exp();
        let v = c.eval(t).norm();
        max_ratio = max_ratio.max(v / bound);
        if v > bound {
            return Err((t.clone(), v / bound));
        }
    }
    Ok(GrowthCertificate { a, k, validation_radius: radius, max_ratio })
}

/// Deterministic tuple sample: full cartesian enumeration when small enough,
/// otherwise a strided slice of it.
pub fn sample_tuples(ball: &[GroupElement], len: usize, cap: usize) -> Vec<Vec<GroupElement>> {
    let total: usize = ball.len().pow(len as u32);
    let stride = (total / cap.max(1)).max(1);
    let mut out = Vec::new();
    let mut idx = 0usize;
    while idx < total {
        let mut t = Vec::with_capacity(len);
        let mut rem = idx;
        for _ in 0..len {
            t.push(ball[rem % ball.len()].clone());
            rem /= ball.len();
        }
        out.push(t);
        idx += stride;
    }
    out
}

/// All permutations of `0..n` with signs from inversion counts.
pub fn permutations_signed(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            let mut inv = 0usize;
            for i in 0..prefix.len() {
                for j in i + 1..prefix.len() {
                    if prefix[i] > prefix[j] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cochain::library;
    use crate::group::builtin_group;

    fn dinf_ctx() -> ConjugacyContext {
        let g = Arc::new(builtin_group("dinf").unwrap());
        let r = g.generators[2].clone();
        ConjugacyContext::new(g, r, 10).unwrap()
    }

    #[test]
    fn permutation_signs_are_consistent() {
        let ps = permutations_signed(3);
        assert_eq!(ps.len(), 6);
        let total: f64 = ps.iter().map(|(_, s)| s).sum();
        assert_eq!(total, 0.0);
        // identity permutation has sign +1
        let id = ps.iter().find(|(p, _)| p == &vec![0, 1, 2]).unwrap();
        assert_eq!(id.1, 1.0);
    }

    #[test]
    fn delta_of_constant_vanishes() {
        let ctx = dinf_ctx();
        let c = library::constant(1.0);
        let dc = c.delta();
        for t in sample_tuples(&ctx.group.enumerate_ball(2), 2, 50) {
            assert_eq!(dc.eval(&t), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn delta_squared_is_exactly_zero() {
        let ctx = dinf_ctx();
        let c = library::translation_marker(&ctx.group, 0);
        let ddc = c.delta().delta();
        for t in sample_tuples(&ctx.group.enumerate_ball(4), 3, 50) {
            // integer-valued marker: cancellation is exact in f64
            assert_eq!(ddc.eval(&t), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn marker_coboundary_is_closed_and_lott_valid() {
        let ctx = dinf_ctx();
        let c1 = library::marker_coboundary(&ctx.group, 0);
        assert!(lott_check(&ctx, &c1, 3, 1e-12).passed());
        let dc1 = c1.delta();
        for t in sample_tuples(&ctx.group.enumerate_ball(3), 3, 80) {
            assert_eq!(dc1.eval(&t), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn lott_check_catches_violations() {
        let ctx = dinf_ctx();
        // deliberately non-antisymmetric
        let bad = GroupCochain::new(
            1,
            "bad",
            false,
            Arc::new(|t: &[GroupElement]| {
                let m = crate::group::ratio_f64(t[1].tr[0]);
                Complex64::new(m * m, 0.0)
            }),
        );
        match lott_check(&ctx, &bad, 2, 1e-12) {
            CheckOutcome::Fail { law, witness, .. } => {
                assert!(law.contains("antisymmetry") || law.contains("invariance"));
                assert_eq!(witness.len(), 2);
            }
            CheckOutcome::Pass => panic!("negative control passed"),
        }
    }

    #[test]
    fn tau_of_constant_is_delocalized_trace() {
        let ctx = dinf_ctx();
        let class = Arc::new(ClassTable::build(&ctx, 8).unwrap());
        let tau = lott_to_cyclic(&ctx, &library::constant(1.0), class.clone());
        for g in ctx.group.enumerate_ball(5) {
            let expected = if class.contains(&g) { 1.0 } else { 0.0 };
            assert_eq!(tau.eval(&[g]).re, expected);
        }
        // reflections about integer points are exactly the class of r
        let r = &ctx.gamma;
        let t1 = &ctx.group.generators[0];
        let conj = ctx.group.conjugate(t1, r).unwrap();
        assert_eq!(tau.eval(&[conj]).re, 1.0);
    }

    #[test]
    fn tau_vanishes_off_class() {
        let ctx = dinf_ctx();
        let class = Arc::new(ClassTable::build(&ctx, 8).unwrap());
        let tau = lott_to_cyclic(&ctx, &library::constant(1.0), class);
        // product of two translations is a translation: not conjugate to r
        let t1 = ctx.group.generators[0].clone();
        assert_eq!(tau.eval(&[t1.clone()]).norm(), 0.0);
    }

    #[test]
    fn eta_independence() {
        let ctx = dinf_ctx();
        let class = ClassTable::build(&ctx, 8).unwrap();
        let c = library::marker_coboundary(&ctx.group, 0);
        let ball = ctx.group.enumerate_ball(3);
        for t in sample_tuples(&ball, 2, 60) {
            let d = check_eta_independence(&ctx, &c, &class, &t).unwrap();
            assert!(d < 1e-12, "eta dependence {d}");
        }
    }

    #[test]
    fn b_squared_vanishes() {
        let ctx = dinf_ctx();
        let class = Arc::new(ClassTable::build(&ctx, 8).unwrap());
        let tau = lott_to_cyclic(&ctx, &library::marker_coboundary(&ctx.group, 0), class);
        let bb = tau.hochschild_b(&ctx).hochschild_b(&ctx);
        for t in sample_tuples(&ctx.group.enumerate_ball(2), 4, 60) {
            assert!(bb.eval(&t).norm() == 0.0, "b² ≠ 0 on {t:?}");
        }
    }

    #[test]
    fn trace_property_of_delocalized_trace() {
        let ctx = dinf_ctx();
        let class = Arc::new(ClassTable::build(&ctx, 8).unwrap());
        let tau = lott_to_cyclic(&ctx, &library::constant(1.0), class);
        let b = tau.hochschild_b(&ctx);
        // b(trace)(δ_a, δ_{a^{-1}}) = τ(δ_e) - τ(δ_e) = 0
        let a = ctx.group.generators[0].clone();
        let ai = ctx.group.inverse(&a);
        assert_eq!(b.eval(&[a, ai]).norm(), 0.0);
    }

    #[test]
    fn tau_is_a_chain_map() {
        // b ∘ τ = τ ∘ δ on sampled basis tuples
        let ctx = dinf_ctx();
        let class = Arc::new(ClassTable::build(&ctx, 10).unwrap());
        let c = library::marker_coboundary(&ctx.group, 0);
        let lhs = lott_to_cyclic(&ctx, &c, class.clone()).hochschild_b(&ctx);
        let rhs = lott_to_cyclic(&ctx, &c.delta(), class);
        for t in sample_tuples(&ctx.group.enumerate_ball(2), 3, 100) {
            let d = (lhs.eval(&t) - rhs.eval(&t)).norm();
            assert!(d < 1e-12, "chain map defect {d} at {t:?}");
        }
    }

    #[test]
    fn cyclicity_of_tau() {
        let ctx = dinf_ctx();
        let class = Arc::new(ClassTable::build(&ctx, 10).unwrap());
        let c = library::marker_coboundary(&ctx.group, 0);
        let tau = lott_to_cyclic(&ctx, &c, class);
        for t in sample_tuples(&ctx.group.enumerate_ball(2), 2, 60) {
            assert!(tau.cyclicity_defect(&t) < 1e-12);
        }
    }

    #[test]
    fn antisymmetrization_is_idempotent() {
        let ctx = dinf_ctx();
        let c = library::marker_coboundary(&ctx.group, 0);
        let ca = c.antisymmetrize();
        for t in sample_tuples(&ctx.group.enumerate_ball(2), 2, 40) {
            assert!((c.eval(&t) - ca.eval(&t)).norm() < 1e-13);
        }
    }

    #[test]
    fn eg_verify_accepts_bounded_and_rejects_fast_growth() {
        let ctx = dinf_ctx();
        let c = library::constant(1.0);
        let cert = eg_verify(&ctx, &c, 1.0, 0.5, 3).unwrap();
        assert!(cert.max_ratio <= 1.0);
        // zero cochain passes with ratio 0
        let zero = library::constant(0.0);
        let cert0 = eg_verify(&ctx, &zero, 1.0, 0.5, 3).unwrap();
        assert_eq!(cert0.max_ratio, 0.0);
        // c(γ_0) = e^{2 l(γ_0^{-1} γ γ_0)} violates A=1, K=1
        let group = ctx.group.clone();
        let gamma = ctx.gamma.clone();
        let fast = GroupCochain::new(
            0,
            "fast",
            false,
            Arc::new(move |t: &[GroupElement]| {
                let conj = group
                    .compose(&group.compose(&group.inverse(&t[0]), &gamma).unwrap(), &t[0])
                    .unwrap();
                let l = group.word_length(&conj, 64).unwrap() as f64;
                Complex64::new((2.0 * l).exp(), 0.0)
            }),
        );
        assert!(eg_verify(&ctx, &fast, 1.0, 1.0, 4).is_err());
    }

    #[test]
    fn eg_closure_under_delta() {
        // if c is EG(A,K) then δc is EG(A(k+2), K) on the validation set
        let ctx = dinf_ctx();
        let c = library::marker_coboundary(&ctx.group, 0);
        let cert = eg_verify(&ctx, &c, 3.0, 1.0, 3).unwrap();
        let dc = c.delta();
        let cert2 = eg_verify(&ctx, &dc, cert.a * (c.degree as f64 + 2.0), cert.k, 3).unwrap();
        assert!(cert2.max_ratio <= 1.0);
    }
}
