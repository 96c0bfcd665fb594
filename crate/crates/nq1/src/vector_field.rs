//! Graded vector fields on a degree-1 N-manifold.
//!
//! A derivation of the function algebra is determined by its values on the
//! chart generators, so a [`VectorField`] stores `X(x_i)` and `X(xi_a)` as
//! graded functions. Commutators, applications and evaluations are then
//! finite symbolic computations.
//!
//! Degree bookkeeping: a homogeneous field of degree `d` has `deg X(x_i) = d`
//! and `deg X(xi_a) = d + 1`. Degree -1 fields are constant-in-xi
//! combinations of `d/dxi_a`; degree 0 fields have polynomial `d/dx` parts
//! and xi-linear `d/dxi` parts.

use crate::error::{Error, Result};
use crate::graded::{GradedFunction, OddMonomial, Signature};
use crate::poly::Poly;
use crate::scalar::Rat;
use num_traits::Zero;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    sig: Signature,
    /// Images of the even coordinates: `X(x_i)`.
    x_images: Vec<GradedFunction>,
    /// Images of the odd generators: `X(xi_a)`.
    xi_images: Vec<GradedFunction>,
}

/// Evaluation of a vector field at a base point: its class modulo fields
/// with coefficients of positive xi-degree, an element of `E_p (+) T_p M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFiberVector {
    pub point: Vec<Rat>,
    /// Fiber component (from degree -1 fields).
    pub e_part: Vec<Rat>,
    /// Tangent component (from symbols of degree 0 fields).
    pub tm_part: Vec<Rat>,
}

impl TangentFiberVector {
    pub fn is_zero(&self) -> bool {
        self.e_part.iter().all(Rat::is_zero) && self.tm_part.iter().all(Rat::is_zero)
    }
}

/// Outcome of the `[Q,Q] = 0` check.
#[derive(Debug, Clone)]
pub enum HomologicalCheck {
    Homological,
    /// First nonzero coefficient of `[Q,Q]`, as (generator name, value).
    Failed {
        generator: String,
        coefficient: GradedFunction,
    },
}

impl HomologicalCheck {
    pub fn is_homological(&self) -> bool {
        matches!(self, HomologicalCheck::Homological)
    }
}

impl VectorField {
    pub fn zero(sig: Signature) -> Self {
        VectorField {
            sig,
            x_images: vec![GradedFunction::zero(sig); sig.n],
            xi_images: vec![GradedFunction::zero(sig); sig.r],
        }
    }

    /// The coordinate field `d/dx_{i+1}`.
    pub fn d_dx(sig: Signature, i: usize) -> Self {
        let mut v = VectorField::zero(sig);
        v.x_images[i] = GradedFunction::one(sig);
        v
    }

    /// The odd coordinate field `d/dxi_{a+1}`.
    pub fn d_dxi(sig: Signature, a: usize) -> Self {
        let mut v = VectorField::zero(sig);
        v.xi_images[a] = GradedFunction::one(sig);
        v
    }

    pub fn from_components(
        sig: Signature,
        x_images: Vec<GradedFunction>,
        xi_images: Vec<GradedFunction>,
    ) -> Self {
        assert_eq!(x_images.len(), sig.n);
        assert_eq!(xi_images.len(), sig.r);
        VectorField {
            sig,
            x_images,
            xi_images,
        }
    }

    /// Section of `E` as the degree -1 field `sum p_a d/dxi_a`.
    pub fn from_section(sig: Signature, polys: &[Poly]) -> Self {
        assert_eq!(polys.len(), sig.r);
        let xi_images = polys
            .iter()
            .map(|p| GradedFunction::from_poly(sig, p.clone()))
            .collect();
        VectorField {
            sig,
            x_images: vec![GradedFunction::zero(sig); sig.n],
            xi_images,
        }
    }

    /// Vector field on the base as the degree 0 field `sum p_i d/dx_i`.
    pub fn from_base_field(sig: Signature, polys: &[Poly]) -> Self {
        assert_eq!(polys.len(), sig.n);
        let x_images = polys
            .iter()
            .map(|p| GradedFunction::from_poly(sig, p.clone()))
            .collect();
        VectorField {
            sig,
            x_images,
            xi_images: vec![GradedFunction::zero(sig); sig.r],
        }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// `X(x_{i+1})`.
    pub fn x_image(&self, i: usize) -> &GradedFunction {
        &self.x_images[i]
    }

    /// `X(xi_{a+1})`.
    pub fn xi_image(&self, a: usize) -> &GradedFunction {
        &self.xi_images[a]
    }

    pub fn is_zero(&self) -> bool {
        self.x_images.iter().all(GradedFunction::is_zero)
            && self.xi_images.iter().all(GradedFunction::is_zero)
    }

    fn check_sig(&self, other: &VectorField) -> Result<()> {
        if self.sig != other.sig {
            Err(Error::SignatureMismatch(self.sig, other.sig))
        } else {
            Ok(())
        }
    }

    /// True when every `d/dxi` coefficient vanishes; degree 0 fields of this
    /// shape are base vector fields.
    pub fn is_base_field(&self) -> bool {
        self.xi_images.iter().all(GradedFunction::is_zero)
    }

    /// Apply the derivation to a function.
    pub fn apply(&self, f: &GradedFunction) -> GradedFunction {
        let mut out = GradedFunction::zero(self.sig);
        for (i, a) in self.x_images.iter().enumerate() {
            if !a.is_zero() {
                out = &out + &(a * &f.deriv_x(i));
            }
        }
        for (al, b) in self.xi_images.iter().enumerate() {
            if !b.is_zero() {
                out = &out + &(b * &f.deriv_xi(al));
            }
        }
        out
    }

    pub fn checked_apply(&self, f: &GradedFunction) -> Result<GradedFunction> {
        if self.sig != f.signature() {
            return Err(Error::SignatureMismatch(self.sig, f.signature()));
        }
        Ok(self.apply(f))
    }

    /// Left module action `h * X` of a graded function on a vector field.
    pub fn module_mul(&self, h: &GradedFunction) -> VectorField {
        VectorField {
            sig: self.sig,
            x_images: self.x_images.iter().map(|a| h * a).collect(),
            xi_images: self.xi_images.iter().map(|b| h * b).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> VectorField {
        VectorField {
            sig: self.sig,
            x_images: self.x_images.iter().map(|a| a.scale(c)).collect(),
            xi_images: self.xi_images.iter().map(|b| b.scale(c)).collect(),
        }
    }

    /// True when every coefficient is zero or homogeneous of the degree
    /// matching a total degree `d`.
    pub fn is_homogeneous_of_degree(&self, d: i64) -> bool {
        let coeff_ok = |g: &GradedFunction, want: i64| -> bool {
            if g.is_zero() {
                return true;
            }
            if want < 0 {
                return false;
            }
            g.homogeneous_degree() == Some(want as usize)
        };
        self.x_images.iter().all(|a| coeff_ok(a, d))
            && self.xi_images.iter().all(|b| coeff_ok(b, d + 1))
    }

    /// The unique degree of a nonzero homogeneous field; `Some(0)` for zero.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        if self.is_zero() {
            return Some(0);
        }
        let mut deg: Option<i64> = None;
        let mut merge = |d: i64| -> bool {
            match deg {
                None => {
                    deg = Some(d);
                    true
                }
                Some(existing) => existing == d,
            }
        };
        for a in &self.x_images {
            if !a.is_zero() {
                match a.homogeneous_degree() {
                    Some(k) => {
                        if !merge(k as i64) {
                            return None;
                        }
                    }
                    None => return None,
                }
            }
        }
        for b in &self.xi_images {
            if !b.is_zero() {
                match b.homogeneous_degree() {
                    Some(k) => {
                        if !merge(k as i64 - 1) {
                            return None;
                        }
                    }
                    None => return None,
                }
            }
        }
        deg
    }

    /// Split into homogeneous parts, degree ascending. Degrees range over
    /// `-1 ..= r`.
    pub fn homogeneous_parts(&self) -> Vec<(i64, VectorField)> {
        let mut parts: Vec<(i64, VectorField)> = Vec::new();
        for d in -1..=(self.sig.r as i64) {
            let x_images: Vec<GradedFunction> = self
                .x_images
                .iter()
                .map(|a| {
                    if d < 0 {
                        GradedFunction::zero(self.sig)
                    } else {
                        a.degree_part(d as usize)
                    }
                })
                .collect();
            let xi_images: Vec<GradedFunction> = self
                .xi_images
                .iter()
                .map(|b| b.degree_part((d + 1) as usize))
                .collect();
            let part = VectorField::from_components(self.sig, x_images, xi_images);
            if !part.is_zero() {
                parts.push((d, part));
            }
        }
        parts
    }

    /// Graded commutator `[X, Y] = X Y - (-1)^{|X||Y|} Y X`, computed via the
    /// action on generators. Non-homogeneous inputs are split into
    /// homogeneous parts first.
    pub fn commutator(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        let mut out = VectorField::zero(self.sig);
        for (dx, px) in self.homogeneous_parts() {
            for (dy, py) in other.homogeneous_parts() {
                out = &out + &commutator_homogeneous(&px, dx, &py, dy);
            }
        }
        out
    }

    pub fn checked_commutator(&self, other: &VectorField) -> Result<VectorField> {
        self.check_sig(other)?;
        Ok(self.commutator(other))
    }

    /// Evaluate a homogeneous field of degree -1 or 0 at a base point.
    pub fn evaluate(&self, point: &[Rat]) -> Result<TangentFiberVector> {
        if point.len() != self.sig.n {
            return Err(Error::InvalidInput(format!(
                "point has {} components, base dimension is {}",
                point.len(),
                self.sig.n
            )));
        }
        let zero_e = vec![Rat::zero(); self.sig.r];
        let zero_tm = vec![Rat::zero(); self.sig.n];
        if self.is_homogeneous_of_degree(-1) {
            let e_part = self
                .xi_images
                .iter()
                .map(|b| b.coeff(&OddMonomial::unit()).eval(point))
                .collect();
            return Ok(TangentFiberVector {
                point: point.to_vec(),
                e_part,
                tm_part: zero_tm,
            });
        }
        if self.is_homogeneous_of_degree(0) {
            let tm_part = self
                .x_images
                .iter()
                .map(|a| a.coeff(&OddMonomial::unit()).eval(point))
                .collect();
            return Ok(TangentFiberVector {
                point: point.to_vec(),
                e_part: zero_e,
                tm_part,
            });
        }
        match self.homogeneous_degree() {
            Some(d) => Err(Error::WrongDegree {
                expected: "-1 or 0".into(),
                found: d.to_string(),
            }),
            None => Err(Error::NotHomogeneous(
                "evaluation needs a homogeneous field of degree -1 or 0".into(),
            )),
        }
    }

    /// Check `[Q,Q] = 0` for a degree 1 field, returning a witness on
    /// failure.
    pub fn is_homological(&self) -> Result<HomologicalCheck> {
        if !self.is_homogeneous_of_degree(1) {
            return Err(Error::WrongDegree {
                expected: "1".into(),
                found: self
                    .homogeneous_degree()
                    .map(|d| d.to_string())
                    .unwrap_or_else(|| "non-homogeneous".into()),
            });
        }
        let qq = self.commutator(self);
        Ok(first_nonzero_coefficient(&qq)
            .map(|(generator, coefficient)| HomologicalCheck::Failed {
                generator,
                coefficient,
            })
            .unwrap_or(HomologicalCheck::Homological))
    }

    /// xi-degree-0 parts of the `d/dx` coefficients, as polynomials. This is
    /// the symbol of a degree 0 field.
    pub fn symbol_polys(&self) -> Vec<Poly> {
        self.x_images
            .iter()
            .map(|a| a.coeff(&OddMonomial::unit()))
            .collect()
    }

    /// xi-degree-0 parts of the `d/dxi` coefficients. For a degree -1 field
    /// these are the components of the corresponding section of `E`.
    pub fn section_polys(&self) -> Vec<Poly> {
        self.xi_images
            .iter()
            .map(|b| b.coeff(&OddMonomial::unit()))
            .collect()
    }

    pub fn render(&self) -> String {
        let mut pieces: Vec<String> = Vec::new();
        for (i, a) in self.x_images.iter().enumerate() {
            if !a.is_zero() {
                pieces.push(render_term(a, &format!("d/dx{}", i + 1)));
            }
        }
        for (al, b) in self.xi_images.iter().enumerate() {
            if !b.is_zero() {
                pieces.push(render_term(b, &format!("d/dxi{}", al + 1)));
            }
        }
        if pieces.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for piece in pieces {
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

fn render_term(coeff: &GradedFunction, gen: &str) -> String {
    let rendered = coeff.render();
    if rendered == "1" {
        gen.to_string()
    } else if rendered == "-1" {
        format!("-{}", gen)
    } else if coeff.terms().count() == 1 && coeff.coeff(&OddMonomial::unit()).num_terms() <= 1 {
        format!("{}*{}", rendered, gen)
    } else {
        format!("({})*{}", rendered, gen)
    }
}

fn commutator_homogeneous(x: &VectorField, dx: i64, y: &VectorField, dy: i64) -> VectorField {
    let sig = x.signature();
    let sign_flip = (dx * dy).rem_euclid(2) == 1;
    let mut x_images = Vec::with_capacity(sig.n);
    let mut xi_images = Vec::with_capacity(sig.r);
    for i in 0..sig.n {
        let fwd = x.apply(y.x_image(i));
        let bwd = y.apply(x.x_image(i));
        x_images.push(if sign_flip { &fwd + &bwd } else { &fwd - &bwd });
    }
    for a in 0..sig.r {
        let fwd = x.apply(y.xi_image(a));
        let bwd = y.apply(x.xi_image(a));
        xi_images.push(if sign_flip { &fwd + &bwd } else { &fwd - &bwd });
    }
    VectorField::from_components(sig, x_images, xi_images)
}

/// First nonzero coefficient of a vector field, with its generator name.
pub fn first_nonzero_coefficient(v: &VectorField) -> Option<(String, GradedFunction)> {
    for i in 0..v.signature().n {
        if !v.x_image(i).is_zero() {
            return Some((format!("d/dx{}", i + 1), v.x_image(i).clone()));
        }
    }
    for a in 0..v.signature().r {
        if !v.xi_image(a).is_zero() {
            return Some((format!("d/dxi{}", a + 1), v.xi_image(a).clone()));
        }
    }
    None
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        assert_eq!(self.sig, rhs.sig, "signature mismatch");
        VectorField {
            sig: self.sig,
            x_images: self
                .x_images
                .iter()
                .zip(&rhs.x_images)
                .map(|(a, b)| a + b)
                .collect(),
            xi_images: self
                .xi_images
                .iter()
                .zip(&rhs.xi_images)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        self + &(-rhs)
    }
}

impl Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        VectorField {
            sig: self.sig,
            x_images: self.x_images.iter().map(|a| -a).collect(),
            xi_images: self.xi_images.iter().map(|b| -b).collect(),
        }
    }
}

/// Left module action written as `f * X`.
impl Mul<&VectorField> for &GradedFunction {
    type Output = VectorField;
    fn mul(self, rhs: &VectorField) -> VectorField {
        rhs.module_mul(self)
    }
}
