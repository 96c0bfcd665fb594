//! Functions on a degree-1 N-manifold.
//!
//! A chart is fixed by a [`Signature`]: `n` even coordinates `x1..xn` of
//! degree 0 and `r` odd generators `xi1..xir` of degree 1. A
//! [`GradedFunction`] is a sparse map from odd monomials to polynomial
//! coefficients; the odd indices of every stored monomial are strictly
//! increasing (the bitmask representation makes this automatic), signs from
//! reordering are absorbed into the coefficient, and zero coefficients are
//! never stored. Equality is therefore structural.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Rat;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Chart dimensions: `n` even coordinates, `r` odd generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Signature {
    pub n: usize,
    pub r: usize,
}

impl Signature {
    pub fn new(n: usize, r: usize) -> Self {
        assert!(r <= 63, "at most 63 odd generators supported");
        Signature { n, r }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "base={}, rank={}", self.n, self.r)
    }
}

/// Product of distinct odd generators, stored as a bitmask (bit `a` set means
/// `xi_{a+1}` is a factor). The empty monomial is the unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OddMonomial(u64);

impl OddMonomial {
    pub fn unit() -> Self {
        OddMonomial(0)
    }

    /// Single generator `xi_{idx+1}` (0-based index).
    pub fn gen(idx: usize) -> Self {
        OddMonomial(1 << idx)
    }

    /// Build from 0-based indices in any order. Returns the sorted monomial
    /// and the sign of the sorting permutation, or `None` when an index
    /// repeats (the product vanishes).
    pub fn from_indices(indices: &[usize]) -> Option<(Self, i8)> {
        let mut acc = OddMonomial::unit();
        let mut sign = 1i8;
        for &i in indices {
            let (m, s) = acc.mul_gen(i)?;
            acc = m;
            sign *= s;
        }
        Some((acc, sign))
    }

    pub fn degree(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.0 & (1 << idx) != 0
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..64).filter(|&i| self.contains(i)).collect()
    }

    pub fn max_index(&self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros() as usize)
        }
    }

    /// Right-multiply by a single generator, with Koszul sign.
    fn mul_gen(&self, idx: usize) -> Option<(Self, i8)> {
        if self.contains(idx) {
            return None;
        }
        // Moving xi_idx left past every factor with a larger index.
        let higher = (self.0 >> (idx + 1)).count_ones();
        let sign = if higher % 2 == 0 { 1 } else { -1 };
        Some((OddMonomial(self.0 | (1 << idx)), sign))
    }

    /// Product with Koszul sign; `None` when a generator repeats.
    pub fn mul(&self, other: &OddMonomial) -> Option<(Self, i8)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut sign = 1i8;
        for idx in other.indices() {
            let higher = (self.0 >> (idx + 1)).count_ones();
            if higher % 2 == 1 {
                sign = -sign;
            }
        }
        Some((OddMonomial(self.0 | other.0), sign))
    }

    /// Left derivative by `xi_{idx+1}`: removes the generator and reports the
    /// sign `(-1)^(number of factors with smaller index)`.
    pub fn left_derivative(&self, idx: usize) -> Option<(Self, i8)> {
        if !self.contains(idx) {
            return None;
        }
        let lower = (self.0 & ((1u64 << idx) - 1)).count_ones();
        let sign = if lower % 2 == 0 { 1 } else { -1 };
        Some((OddMonomial(self.0 & !(1 << idx)), sign))
    }

    pub fn render(&self) -> String {
        if self.0 == 0 {
            return "1".to_string();
        }
        self.indices()
            .iter()
            .map(|i| format!("xi{}", i + 1))
            .collect::<Vec<_>>()
            .join("^")
    }
}

/// All odd monomials of a given xi-degree over `r` generators, ascending.
pub fn odd_monomials_of_degree(r: usize, k: usize) -> Vec<OddMonomial> {
    fn rec(r: usize, k: usize, start: usize, acc: &mut Vec<usize>, out: &mut Vec<OddMonomial>) {
        if acc.len() == k {
            out.push(OddMonomial::from_indices(acc).unwrap().0);
            return;
        }
        for i in start..r {
            acc.push(i);
            rec(r, k, i + 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if k <= r {
        rec(r, k, 0, &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

// Degree-major order so that rendering lists low xi-degree terms first.
impl Ord for OddMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), self.0).cmp(&(other.degree(), other.0))
    }
}

impl PartialOrd for OddMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Element of the function algebra: polynomial coefficients indexed by odd
/// monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedFunction {
    sig: Signature,
    terms: BTreeMap<OddMonomial, Poly>,
}

impl GradedFunction {
    pub fn zero(sig: Signature) -> Self {
        GradedFunction {
            sig,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(sig: Signature, c: Rat) -> Self {
        GradedFunction::from_poly(sig, Poly::constant(sig.n, c))
    }

    pub fn one(sig: Signature) -> Self {
        GradedFunction::constant(sig, Rat::from_integer(1.into()))
    }

    /// The even coordinate `x_{i+1}` (0-based).
    pub fn base_var(sig: Signature, i: usize) -> Self {
        GradedFunction::from_poly(sig, Poly::var(sig.n, i))
    }

    /// The odd generator `xi_{a+1}` (0-based).
    pub fn odd_var(sig: Signature, a: usize) -> Self {
        assert!(a < sig.r, "odd index out of range");
        GradedFunction::monomial(sig, OddMonomial::gen(a), Poly::one(sig.n))
    }

    pub fn from_poly(sig: Signature, p: Poly) -> Self {
        assert_eq!(p.n_vars(), sig.n);
        let mut f = GradedFunction::zero(sig);
        f.add_term(OddMonomial::unit(), p);
        f
    }

    pub fn monomial(sig: Signature, odd: OddMonomial, coeff: Poly) -> Self {
        assert_eq!(coeff.n_vars(), sig.n);
        assert!(odd.max_index().map_or(true, |m| m < sig.r));
        let mut f = GradedFunction::zero(sig);
        f.add_term(odd, coeff);
        f
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OddMonomial, &Poly)> {
        self.terms.iter()
    }

    /// Coefficient of an odd monomial (zero polynomial if absent).
    pub fn coeff(&self, odd: &OddMonomial) -> Poly {
        self.terms
            .get(odd)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.sig.n))
    }

    pub fn add_term(&mut self, odd: OddMonomial, p: Poly) {
        if p.is_zero() {
            return;
        }
        match self.terms.entry(odd) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &p;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p);
            }
        }
    }

    fn check_sig(&self, other: &GradedFunction) -> Result<()> {
        if self.sig != other.sig {
            Err(Error::SignatureMismatch(self.sig, other.sig))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &GradedFunction) -> Result<GradedFunction> {
        self.check_sig(other)?;
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &GradedFunction) -> Result<GradedFunction> {
        self.check_sig(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, c: &Rat) -> GradedFunction {
        if c.is_zero() {
            return GradedFunction::zero(self.sig);
        }
        GradedFunction {
            sig: self.sig,
            terms: self
                .terms
                .iter()
                .map(|(m, p)| (*m, p.scale(c)))
                .collect(),
        }
    }

    pub fn scale_poly(&self, p: &Poly) -> GradedFunction {
        let mut out = GradedFunction::zero(self.sig);
        for (m, q) in &self.terms {
            out.add_term(*m, p * q);
        }
        out
    }

    /// Split into xi-degree homogeneous components.
    pub fn degree_parts(&self) -> BTreeMap<usize, GradedFunction> {
        let mut parts: BTreeMap<usize, GradedFunction> = BTreeMap::new();
        for (m, p) in &self.terms {
            parts
                .entry(m.degree())
                .or_insert_with(|| GradedFunction::zero(self.sig))
                .add_term(*m, p.clone());
        }
        parts
    }

    /// The component of xi-degree `k`.
    pub fn degree_part(&self, k: usize) -> GradedFunction {
        let mut out = GradedFunction::zero(self.sig);
        for (m, p) in &self.terms {
            if m.degree() == k {
                out.add_term(*m, p.clone());
            }
        }
        out
    }

    /// `Some(k)` when every term has xi-degree `k`. Zero is homogeneous of
    /// every degree; by convention it reports `Some(0)`.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut deg = None;
        for m in self.terms.keys() {
            match deg {
                None => deg = Some(m.degree()),
                Some(d) if d == m.degree() => {}
                _ => return None,
            }
        }
        Some(deg.unwrap_or(0))
    }

    pub fn max_xi_degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Specialize the even coordinates at a rational point; the result has
    /// constant coefficients.
    pub fn eval_base(&self, point: &[Rat]) -> GradedFunction {
        let mut out = GradedFunction::zero(self.sig);
        for (m, p) in &self.terms {
            out.add_term(*m, Poly::constant(self.sig.n, p.eval(point)));
        }
        out
    }

    /// Partial derivative in the even coordinate `x_{i+1}` (an even
    /// derivation of degree 0).
    pub fn deriv_x(&self, i: usize) -> GradedFunction {
        let mut out = GradedFunction::zero(self.sig);
        for (m, p) in &self.terms {
            out.add_term(*m, p.deriv(i));
        }
        out
    }

    /// Left derivative in the odd generator `xi_{a+1}` (an odd derivation of
    /// degree -1).
    pub fn deriv_xi(&self, a: usize) -> GradedFunction {
        let mut out = GradedFunction::zero(self.sig);
        for (m, p) in &self.terms {
            if let Some((m2, sign)) = m.left_derivative(a) {
                out.add_term(m2, if sign < 0 { -p } else { p.clone() });
            }
        }
        out
    }

    /// Canonical rendering, xi-degree ascending: `x3 + 3/2*x1^2*xi1^xi3`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (m, p) in &self.terms {
            let piece = if m.degree() == 0 {
                p.render()
            } else if p.num_terms() == 1 {
                let rendered = p.render();
                if rendered == "1" {
                    m.render()
                } else if rendered == "-1" {
                    format!("-{}", m.render())
                } else {
                    format!("{}*{}", rendered, m.render())
                }
            } else {
                format!("({})*{}", p.render(), m.render())
            };
            if out.is_empty() {
                out.push_str(&piece);
            } else if let Some(rest) = piece.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&piece);
            }
        }
        out
    }
}

impl fmt::Display for GradedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Add for &GradedFunction {
    type Output = GradedFunction;
    fn add(self, rhs: &GradedFunction) -> GradedFunction {
        assert_eq!(self.sig, rhs.sig, "signature mismatch");
        let mut out = self.clone();
        for (m, p) in &rhs.terms {
            out.add_term(*m, p.clone());
        }
        out
    }
}

impl Sub for &GradedFunction {
    type Output = GradedFunction;
    fn sub(self, rhs: &GradedFunction) -> GradedFunction {
        self + &(-rhs)
    }
}

impl Neg for &GradedFunction {
    type Output = GradedFunction;
    fn neg(self) -> GradedFunction {
        GradedFunction {
            sig: self.sig,
            terms: self.terms.iter().map(|(m, p)| (*m, -p)).collect(),
        }
    }
}

impl Mul for &GradedFunction {
    type Output = GradedFunction;
    fn mul(self, rhs: &GradedFunction) -> GradedFunction {
        assert_eq!(self.sig, rhs.sig, "signature mismatch");
        let mut out = GradedFunction::zero(self.sig);
        for (m1, p1) in &self.terms {
            for (m2, p2) in &rhs.terms {
                if let Some((m, sign)) = m1.mul(m2) {
                    let prod = p1 * p2;
                    out.add_term(m, if sign < 0 { -&prod } else { prod });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};

    fn sig() -> Signature {
        Signature::new(3, 3)
    }

    fn xi(a: usize) -> GradedFunction {
        GradedFunction::odd_var(sig(), a)
    }

    fn x(i: usize) -> GradedFunction {
        GradedFunction::base_var(sig(), i)
    }

    #[test]
    fn odd_anticommutativity() {
        let a = &xi(0) * &xi(1);
        let b = &xi(1) * &xi(0);
        assert_eq!(b, -&a);
        assert!((&xi(0) * &xi(0)).is_zero());
    }

    #[test]
    fn koszul_expansion() {
        // (x1 + xi1 xi2) * xi3 = x1 xi3 + xi1 xi2 xi3
        let f = &x(0) + &(&xi(0) * &xi(1));
        let prod = &f * &xi(2);
        let expected = &(&x(0) * &xi(2)) + &(&(&xi(0) * &xi(1)) * &xi(2));
        assert_eq!(prod, expected);
        assert_eq!(prod.coeff(&OddMonomial::gen(2)), Poly::var(3, 0));
    }

    #[test]
    fn addition_normalizes() {
        assert!((&xi(0) + &xi(0).scale(&rat(-1))).is_zero());
        let f = &(&x(0) * &xi(1)) + &(&x(0) * &xi(1));
        assert_eq!(f, (&x(0) * &xi(1)).scale(&rat(2)));
        // (xi1 xi2 + x3) + xi2 xi1 = x3
        let g = &(&(&xi(0) * &xi(1)) + &x(2)) + &(&xi(1) * &xi(0));
        assert_eq!(g, x(2));
    }

    #[test]
    fn degree_parts_split() {
        let f = &(&x(0) + &xi(0)) + &(&xi(0) * &xi(1));
        let parts = f.degree_parts();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[&0], x(0));
        assert_eq!(parts[&1], xi(0));
        assert_eq!(parts[&2], &xi(0) * &xi(1));
        assert!(GradedFunction::zero(sig()).degree_parts().is_empty());
        let g = &xi(1) * &xi(2);
        assert_eq!(g.degree_parts()[&2], g);
    }

    #[test]
    fn eval_base_specializes() {
        let f = &x(0) * &xi(2);
        let at = f.eval_base(&[rat(2), rat(0), rat(0)]);
        assert_eq!(at, xi(2).scale(&rat(2)));

        let s1 = Signature::new(1, 1);
        let g = GradedFunction::from_poly(s1, Poly::var(1, 0).pow(2));
        assert_eq!(g.eval_base(&[rat(3)]), GradedFunction::constant(s1, rat(9)));

        // coefficient x1^2/2 at x1 = 2, as in the quadratic action example
        let h = GradedFunction::monomial(sig(), OddMonomial::gen(0), Poly::var(3, 0).pow(2).scale(&ratio(1, 2)));
        assert_eq!(h.eval_base(&[rat(2), rat(0), rat(0)]), xi(0).scale(&rat(2)));
    }

    #[test]
    fn eval_base_is_multiplicative() {
        let f = &(&x(0) * &xi(0)) + &x(1);
        let g = &(&x(1) * &xi(1)) + &GradedFunction::one(sig());
        let p = [rat(2), ratio(1, 2), rat(-3)];
        assert_eq!(
            (&f * &g).eval_base(&p),
            &f.eval_base(&p) * &g.eval_base(&p)
        );
    }

    #[test]
    fn odd_derivative_signs() {
        let m = &(&xi(0) * &xi(1)) * &xi(2);
        assert_eq!(m.deriv_xi(0), &xi(1) * &xi(2));
        assert_eq!(m.deriv_xi(1), -&(&xi(0) * &xi(2)));
        assert_eq!(m.deriv_xi(2), &xi(0) * &xi(1));
    }

    #[test]
    fn render_round_shape() {
        let f = &(&x(2) + &(&xi(0) * &xi(1))) - &(&x(0) * &xi(2));
        assert_eq!(f.render(), "x3 - x1*xi3 + xi1^xi2");
        let g = GradedFunction::monomial(
            sig(),
            OddMonomial::from_indices(&[0, 2]).unwrap().0,
            Poly::var(3, 0).pow(2).scale(&ratio(3, 2)),
        );
        assert_eq!(g.render(), "3/2*x1^2*xi1^xi3");
    }

    #[test]
    fn signature_mismatch_rejected() {
        let other = GradedFunction::one(Signature::new(2, 2));
        assert!(xi(0).checked_add(&other).is_err());
        assert!(xi(0).checked_mul(&other).is_err());
    }
}
