//! Graded exterior algebra `Λ•(R^a) ⊗ M_d(C)` with sparse coefficients.
//!
//! Coefficients are keyed by sorted index subsets of `{0..a}` encoded as bit
//! masks; anything above the ambient cap `a` is dropped, which is what makes
//! every analytic series here terminate exactly.

pub mod as_form;
pub mod getzler;
pub mod series;

pub use as_form::{as_gamma_form, CurvatureData};
pub use getzler::{getzler_order, table_words, vanishing_criterion, GetzlerAtom, GetzlerWord};

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::{Error, Result};

/// Small dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatC {
    pub d: usize,
    pub a: Vec<Complex64>,
}

impl MatC {
    pub fn zeros(d: usize) -> Self {
        Self { d, a: vec![Complex64::new(0.0, 0.0); d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.a[i * d + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(d: usize, rows: Vec<Complex64>) -> Self {
        assert_eq!(rows.len(), d * d);
        Self { d, a: rows }
    }

    pub fn scalar(d: usize, z: Complex64) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.a[i * d + i] = z;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.d + j] = v;
    }

    pub fn add(&self, o: &MatC) -> MatC {
        assert_eq!(self.d, o.d);
        MatC { d: self.d, a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect() }
    }

    pub fn scale(&self, z: Complex64) -> MatC {
        MatC { d: self.d, a: self.a.iter().map(|x| x * z).collect() }
    }

    pub fn mul(&self, o: &MatC) -> MatC {
        assert_eq!(self.d, o.d);
        let d = self.d;
        let mut m = MatC::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let v = self.a[i * d + k];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    m.a[i * d + j] += v * o.a[k * d + j];
                }
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.d).map(|i| self.a[i * self.d + i]).sum()
    }

    /// Conjugate transpose; the inverse for unitary matrices.
    pub fn adjoint(&self) -> MatC {
        let d = self.d;
        let mut m = MatC::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.a[i * d + j] = self.a[j * d + i].conj();
            }
        }
        m
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.a.iter().all(|z| z.norm() <= tol)
    }
}

/// Element of `Λ•(R^a) ⊗ M_d(C)`, nilpotent-truncated above degree `cap`.
#[derive(Debug, Clone)]
pub struct ExteriorElement {
    /// Number of exterior generators (top form degree).
    pub cap: usize,
    /// Matrix coefficient dimension.
    pub d: usize,
    coeffs: BTreeMap<u32, MatC>,
}

impl ExteriorElement {
    pub fn zero(cap: usize, d: usize) -> Self {
        Self { cap, d, coeffs: BTreeMap::new() }
    }

    pub fn one(cap: usize, d: usize) -> Self {
        let mut e = Self::zero(cap, d);
        e.coeffs.insert(0, MatC::identity(d));
        e
    }

    pub fn from_scalar(cap: usize, d: usize, z: Complex64) -> Self {
        let mut e = Self::zero(cap, d);
        e.set_coeff(0, MatC::scalar(d, z));
        e
    }

    /// The generator `dx_i` (degree-1, identity matrix coefficient).
    pub fn generator(cap: usize, d: usize, i: usize) -> Self {
        assert!(i < cap, "generator index out of range");
        let mut e = Self::zero(cap, d);
        e.coeffs.insert(1 << i, MatC::identity(d));
        e
    }

    pub fn set_coeff(&mut self, mask: u32, m: MatC) {
        assert_eq!(m.d, self.d);
        if mask.count_ones() as usize > self.cap {
            return;
        }
        if m.is_zero(0.0) {
            self.coeffs.remove(&mask);
        } else {
            self.coeffs.insert(mask, m);
        }
    }

    pub fn coeff(&self, mask: u32) -> MatC {
        self.coeffs.get(&mask).cloned().unwrap_or_else(|| MatC::zeros(self.d))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&u32, &MatC)> {
        self.coeffs.iter()
    }

    pub fn add(&self, o: &ExteriorElement) -> Result<ExteriorElement> {
        self.check_compat(o)?;
        let mut out = self.clone();
        for (mask, m) in &o.coeffs {
            let cur = out.coeff(*mask).add(m);
            out.set_coeff(*mask, cur);
        }
        Ok(out)
    }

    pub fn scale(&self, z: Complex64) -> ExteriorElement {
        let mut out = Self::zero(self.cap, self.d);
        for (mask, m) in &self.coeffs {
            out.set_coeff(*mask, m.scale(z));
        }
        out
    }

    fn check_compat(&self, o: &ExteriorElement) -> Result<()> {
        if self.cap != o.cap || self.d != o.d {
            return Err(Error::Degenerate(format!(
                "exterior algebra mismatch: cap {} vs {}, d {} vs {}",
                self.cap, o.cap, self.d, o.d
            )));
        }
        Ok(())
    }

    /// Graded product with matrix-coefficient multiplication; masks above the
    /// cap or with repeated generators vanish.
    pub fn wedge(&self, o: &ExteriorElement) -> Result<ExteriorElement> {
        self.check_compat(o)?;
        let mut out = Self::zero(self.cap, self.d);
        for (ma, ca) in &self.coeffs {
            for (mb, cb) in &o.coeffs {
                if ma & mb != 0 {
                    continue;
                }
                let mask = ma | mb;
                if mask.count_ones() as usize > self.cap {
                    continue;
                }
                let sgn = merge_sign(*ma, *mb);
                let term = ca.mul(cb).scale(Complex64::new(sgn, 0.0));
                out.set_coeff(mask, out.coeff(mask).add(&term));
            }
        }
        Ok(out)
    }

    /// Matrix trace, yielding a scalar-coefficient form.
    pub fn trace(&self) -> ExteriorElement {
        let mut out = ExteriorElement::zero(self.cap, 1);
        for (mask, m) in &self.coeffs {
            out.set_coeff(*mask, MatC::from_rows(1, vec![m.trace()]));
        }
        out
    }

    /// The degree-0 matrix coefficient.
    pub fn numeric_part(&self) -> MatC {
        self.coeff(0)
    }

    /// Component of homogeneous degree `k`.
    pub fn degree_part(&self, k: usize) -> ExteriorElement {
        let mut out = Self::zero(self.cap, self.d);
        for (mask, m) in &self.coeffs {
            if mask.count_ones() as usize == k {
                out.set_coeff(*mask, m.clone());
            }
        }
        out
    }

    /// Coefficient of the top form `dx_0 ∧ … ∧ dx_{cap-1}`.
    pub fn top_coefficient(&self) -> MatC {
        let mask = if self.cap == 0 { 0 } else { (1u32 << self.cap) - 1 };
        self.coeff(mask)
    }

    pub fn max_norm(&self) -> f64 {
        self.coeffs.values().map(MatC::norm).fold(0.0, f64::max)
    }

    pub fn sub(&self, o: &ExteriorElement) -> Result<ExteriorElement> {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Lowest nonzero homogeneous degree (cap+1 for the zero element).
    pub fn min_degree(&self, tol: f64) -> usize {
        self.coeffs
            .iter()
            .filter(|(_, m)| !m.is_zero(tol))
            .map(|(mask, _)| mask.count_ones() as usize)
            .min()
            .unwrap_or(self.cap + 1)
    }
}

/// Sign of merging two disjoint sorted index sets (Koszul sign of the shuffle).
pub fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        // bits of a strictly greater than j
        inversions += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Square matrix with scalar-form entries. Even-degree entries commute, which
/// is what determinant and analytic-series evaluation below rely on.
#[derive(Debug, Clone)]
pub struct FormMatrix {
    pub m: usize,
    pub cap: usize,
    pub entries: Vec<ExteriorElement>,
}

impl FormMatrix {
    pub fn zeros(m: usize, cap: usize) -> Self {
        Self { m, cap, entries: vec![ExteriorElement::zero(cap, 1); m * m] }
    }

    pub fn identity(m: usize, cap: usize) -> Self {
        let mut out = Self::zeros(m, cap);
        for i in 0..m {
            out.entries[i * m + i] = ExteriorElement::one(cap, 1);
        }
        out
    }

    pub fn from_numeric(m: usize, cap: usize, vals: &[f64]) -> Self {
        let mut out = Self::zeros(m, cap);
        for i in 0..m * m {
            out.entries[i] = ExteriorElement::from_scalar(cap, 1, Complex64::new(vals[i], 0.0));
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> &ExteriorElement {
        &self.entries[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ExteriorElement) {
        self.entries[i * self.m + j] = v;
    }

    pub fn add(&self, o: &FormMatrix) -> Result<FormMatrix> {
        let mut out = Self::zeros(self.m, self.cap);
        for i in 0..self.m * self.m {
            out.entries[i] = self.entries[i].add(&o.entries[i])?;
        }
        Ok(out)
    }

    pub fn scale(&self, z: Complex64) -> FormMatrix {
        FormMatrix {
            m: self.m,
            cap: self.cap,
            entries: self.entries.iter().map(|e| e.scale(z)).collect(),
        }
    }

    pub fn mul(&self, o: &FormMatrix) -> Result<FormMatrix> {
        let m = self.m;
        let mut out = Self::zeros(m, self.cap);
        for i in 0..m {
            for j in 0..m {
                let mut acc = ExteriorElement::zero(self.cap, 1);
                for k in 0..m {
                    acc = acc.add(&self.get(i, k).wedge(o.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Largest entry max-norm, used for series convergence guards.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(ExteriorElement::max_norm).fold(0.0, f64::max)
    }

    /// Leibniz determinant over the commutative even subalgebra.
    pub fn det(&self) -> Result<ExteriorElement> {
        let m = self.m;
        let mut acc = ExteriorElement::zero(self.cap, 1);
        for (perm, sgn) in crate::cochain::permutations_signed(m) {
            let mut prod = ExteriorElement::from_scalar(self.cap, 1, Complex64::new(sgn, 0.0));
            for (i, &pi) in perm.iter().enumerate() {
                prod = prod.wedge(self.get(i, pi))?;
            }
            acc = acc.add(&prod)?;
        }
        Ok(acc)
    }

    /// Evaluate a scalar power series `Σ c_k X^k` of the matrix; terminates
    /// by nilpotency once pure-form powers exceed the cap, and truncates the
    /// numeric tail when it stops contributing.
    pub fn apply_series(&self, coeffs: &[Complex64]) -> Result<FormMatrix> {
        let mut out = Self::zeros(self.m, self.cap).scale(Complex64::new(0.0, 0.0));
        let mut power = Self::identity(self.m, self.cap);
        for (k, c) in coeffs.iter().enumerate() {
            if k > 0 {
                power = power.mul(self)?;
            }
            if power.max_norm() == 0.0 {
                break;
            }
            out = out.add(&power.scale(*c))?;
            if power.max_norm() * c.norm() < 1e-18 && k > 4 {
                break;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn wedge_unit_and_antisymmetry() {
        let cap = 3;
        let one = ExteriorElement::one(cap, 1);
        let dx0 = ExteriorElement::generator(cap, 1, 0);
        let dx1 = ExteriorElement::generator(cap, 1, 1);
        let w = dx0.wedge(&one).unwrap();
        assert_eq!(w.coeff(0b001).get(0, 0), c(1.0));
        // dx0∧dx1 + dx1∧dx0 = 0
        let s = dx0.wedge(&dx1).unwrap().add(&dx1.wedge(&dx0).unwrap()).unwrap();
        assert_eq!(s.max_norm(), 0.0);
        // repeated index vanishes
        let z = dx0.wedge(&dx1).unwrap().wedge(&dx0).unwrap();
        assert_eq!(z.max_norm(), 0.0);
    }

    #[test]
    fn graded_commutativity_signs() {
        let cap = 4;
        let dx = |i| ExteriorElement::generator(cap, 1, i);
        let a = dx(0).wedge(&dx(1)).unwrap(); // degree 2
        let b = dx(2).wedge(&dx(3)).unwrap(); // degree 2
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        assert_eq!(ab.sub(&ba).unwrap().max_norm(), 0.0);
        // odd/odd anticommute
        let ab2 = dx(0).wedge(&dx(2)).unwrap();
        let ba2 = dx(2).wedge(&dx(0)).unwrap();
        assert_eq!(ab2.add(&ba2).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn cap_mismatch_is_error() {
        let a = ExteriorElement::one(2, 1);
        let b = ExteriorElement::one(3, 1);
        assert!(a.wedge(&b).is_err());
    }

    #[test]
    fn nilpotency_drops_above_cap() {
        let cap = 2;
        let dx0 = ExteriorElement::generator(cap, 1, 0);
        let dx1 = ExteriorElement::generator(cap, 1, 1);
        let omega = dx0.wedge(&dx1).unwrap();
        let sq = omega.wedge(&omega).unwrap();
        assert_eq!(sq.max_norm(), 0.0);
    }

    #[test]
    fn determinant_of_numeric_matrix() {
        let m = FormMatrix::from_numeric(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let d = m.det().unwrap();
        assert_eq!(d.numeric_part().get(0, 0), c(4.0));
    }

    #[test]
    fn series_is_exact_under_truncation_refinement() {
        // doubling the number of series terms never changes any coefficient
        let cap = 2;
        let mut x = FormMatrix::zeros(2, cap);
        let omega = ExteriorElement::generator(cap, 1, 0)
            .wedge(&ExteriorElement::generator(cap, 1, 1))
            .unwrap();
        x.set(0, 1, omega.scale(c(0.7)));
        x.set(1, 0, omega.scale(c(-0.7)));
        let coeffs: Vec<Complex64> = (0..6).map(|k| c(1.0 / (1 + k) as f64)).collect();
        let short = x.apply_series(&coeffs[..3]).unwrap();
        let long = x.apply_series(&coeffs).unwrap();
        for i in 0..4 {
            let d = short.entries[i].sub(&long.entries[i]).unwrap().max_norm();
            assert_eq!(d, 0.0);
        }
    }
}
