//! Sparse multivariate polynomials over the rationals.
//!
//! `Poly` is the coefficient ring for everything of degree zero: structure
//! functions, anchors, connection matrices, symbols. Terms live in a
//! `BTreeMap` from exponent vectors to nonzero rational coefficients, so the
//! representation is canonical and equality is structural.
//!
//! Invariants: no zero coefficients are stored, and every exponent vector has
//! length `n_vars`.

use crate::scalar::{render_rat, Rat};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Poly {
    n_vars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn zero(n_vars: usize) -> Self {
        Poly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: Rat) -> Self {
        let mut p = Poly::zero(n_vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; n_vars], c);
        }
        p
    }

    pub fn one(n_vars: usize) -> Self {
        Poly::constant(n_vars, Rat::one())
    }

    /// The variable `x_{idx}` (0-based).
    pub fn var(n_vars: usize, idx: usize) -> Self {
        assert!(idx < n_vars, "variable index out of range");
        let mut exps = vec![0; n_vars];
        exps[idx] = 1;
        let mut p = Poly::zero(n_vars);
        p.terms.insert(exps, Rat::one());
        p
    }

    pub fn monomial(n_vars: usize, exps: Vec<u32>, c: Rat) -> Self {
        assert_eq!(exps.len(), n_vars);
        let mut p = Poly::zero(n_vars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    /// Constant term (zero if absent).
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&vec![0; self.n_vars])
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rat) {
        debug_assert_eq!(exps.len(), self.n_vars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Poly::zero(self.n_vars);
        }
        Poly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Poly::one(self.n_vars);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to `x_{idx}`.
    pub fn deriv(&self, idx: usize) -> Self {
        assert!(idx < self.n_vars);
        let mut out = Poly::zero(self.n_vars);
        for (exps, c) in &self.terms {
            let k = exps[idx];
            if k == 0 {
                continue;
            }
            let mut e = exps.clone();
            e[idx] = k - 1;
            out.add_term(e, c * Rat::from_integer(k.into()));
        }
        out
    }

    /// Antiderivative in `x_{idx}` with zero constant of integration.
    pub fn antideriv(&self, idx: usize) -> Self {
        assert!(idx < self.n_vars);
        let mut out = Poly::zero(self.n_vars);
        for (exps, c) in &self.terms {
            let mut e = exps.clone();
            e[idx] += 1;
            let k = e[idx];
            out.add_term(e, c / Rat::from_integer(k.into()));
        }
        out
    }

    /// Evaluate at a rational point.
    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.n_vars, "point dimension mismatch");
        let mut acc = Rat::zero();
        for (exps, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in exps.iter().enumerate() {
                for _ in 0..k {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Exact division: returns `Some(q)` with `self = q * d`, or `None` when
    /// `d` does not divide `self`. Uses leading-term reduction in lex order.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert_eq!(self.n_vars, d.n_vars);
        if d.is_zero() {
            return None;
        }
        let (dlead, dcoef) = d.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quo = Poly::zero(self.n_vars);
        while let Some((rlead, rcoef)) = rem.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            let mut q_exps = Vec::with_capacity(self.n_vars);
            for (a, b) in rlead.iter().zip(dlead.iter()) {
                if a < b {
                    return None;
                }
                q_exps.push(a - b);
            }
            let q_coef = rcoef / &dcoef;
            let t = Poly::monomial(self.n_vars, q_exps, q_coef);
            rem = &rem - &(&t * d);
            quo = &quo + &t;
        }
        Some(quo)
    }

    /// Keep only the variables in `keep` (in the given order), failing when a
    /// discarded variable actually occurs.
    pub fn project_vars(&self, keep: &[usize]) -> Option<Poly> {
        let mut out = Poly::zero(keep.len());
        for (exps, c) in &self.terms {
            let mut new_exps = vec![0u32; keep.len()];
            for (new_i, &old_i) in keep.iter().enumerate() {
                new_exps[new_i] = exps[old_i];
            }
            let kept_total: u32 = new_exps.iter().sum();
            if kept_total != exps.iter().sum::<u32>() {
                return None;
            }
            out.add_term(new_exps, c.clone());
        }
        Some(out)
    }

    /// Reinterpret in a larger variable set, sending old variable `i` to
    /// `embed[i]`.
    pub fn embed_vars(&self, n_vars: usize, embed: &[usize]) -> Poly {
        assert_eq!(embed.len(), self.n_vars);
        let mut out = Poly::zero(n_vars);
        for (exps, c) in &self.terms {
            let mut new_exps = vec![0u32; n_vars];
            for (i, &k) in exps.iter().enumerate() {
                new_exps[embed[i]] = k;
            }
            out.add_term(new_exps, c.clone());
        }
        out
    }

    /// Canonical rendering, leading terms first: `3/2*x1^2*x2 - x3 + 1`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (exps, c)) in self.terms.iter().rev().enumerate() {
            let mut factors: Vec<String> = Vec::new();
            for (v, &k) in exps.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(format!("x{}", v + 1)),
                    _ => factors.push(format!("x{}^{}", v + 1, k)),
                }
            }
            let abs = if c < &Rat::zero() { -c.clone() } else { c.clone() };
            let body = if factors.is_empty() {
                render_rat(&abs)
            } else if abs.is_one() {
                factors.join("*")
            } else {
                format!("{}*{}", render_rat(&abs), factors.join("*"))
            };
            if i == 0 {
                if c < &Rat::zero() {
                    out.push('-');
                }
            } else if c < &Rat::zero() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&body);
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.n_vars, rhs.n_vars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.n_vars, rhs.n_vars, "variable count mismatch");
        let mut out = Poly::zero(self.n_vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let exps: Vec<u32> = e1.iter().zip(e2.iter()).map(|(a, b)| a + b).collect();
                out.add_term(exps, c1 * c2);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};

    fn x(i: usize) -> Poly {
        Poly::var(3, i)
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let p = &(&x(0) + &x(1)) * &(&x(0) - &x(1));
        let q = &x(0).pow(2) - &x(1).pow(2);
        assert_eq!(p, q);
        assert!((&p - &q).is_zero());
    }

    #[test]
    fn derivative_and_antiderivative() {
        let p = &x(0).pow(3) + &x(1);
        assert_eq!(p.deriv(0), x(0).pow(2).scale(&rat(3)));
        assert_eq!(p.deriv(0).antideriv(0), x(0).pow(3));
        assert_eq!(p.deriv(2), Poly::zero(3));
    }

    #[test]
    fn eval_at_point() {
        let p = &x(0).pow(2).scale(&ratio(1, 2)) + &x(2);
        let v = p.eval(&[rat(2), rat(0), rat(5)]);
        assert_eq!(v, rat(7));
    }

    #[test]
    fn exact_division() {
        let p = &(&x(0) + &x(1)) * &(&x(0).pow(2) + &x(2));
        assert_eq!(p.div_exact(&(&x(0) + &x(1))), Some(&x(0).pow(2) + &x(2)));
        assert_eq!(p.div_exact(&x(2)), None);
        assert_eq!(Poly::zero(3).div_exact(&x(0)), Some(Poly::zero(3)));
    }

    #[test]
    fn rendering() {
        let p = &(&x(0).pow(2).scale(&ratio(3, 2)) * &x(1)) - &(&x(2) - &Poly::one(3));
        assert_eq!(p.render(), "3/2*x1^2*x2 - x3 + 1");
        assert_eq!(Poly::zero(3).render(), "0");
    }
}
