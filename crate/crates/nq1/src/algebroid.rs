//! The dictionary between Lie algebroid data and homological vector fields.
//!
//! A Lie algebroid on a trivialized bundle is a table of structure functions
//! `c_ij^k(x)` (antisymmetric in `i, j`) and anchor components `rho_i^a(x)`.
//! [`build_q`](LieAlgebroidData::build_q) assembles the degree 1 field
//!
//! ```text
//! Q = 1/2 xi_j xi_i c_ij^k d/dxi_k + rho_i^a xi_i d/dx_a
//! ```
//!
//! and [`extract_algebroid_raw`] reads the data back through derived
//! brackets: `c_ij^k` from `[[Q, d/dxi_i], d/dxi_j]` and `rho_i^a` from
//! `[[Q, d/dxi_i], x_a]`. The two directions are exact inverses for any
//! degree 1 field, homological or not.
//!
//! [`verify_algebroid_axioms`](LieAlgebroidData::verify_algebroid_axioms)
//! checks the Lie algebroid axioms directly on sections, without touching
//! the graded side; it must agree with `[Q,Q] = 0` on every instance.

use crate::error::{Error, Result};
use crate::graded::{GradedFunction, OddMonomial, Signature};
use crate::poly::Poly;
use crate::scalar::Rat;
use crate::vector_field::{HomologicalCheck, VectorField};
use serde::Serialize;

/// Structure functions and anchor of a Lie algebroid in a fixed frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebroidData {
    sig: Signature,
    /// `c[i][j][k]` with `[e_i, e_j] = sum_k c[i][j][k] e_k`; kept
    /// antisymmetric in `(i, j)` by the setter.
    c: Vec<Vec<Vec<Poly>>>,
    /// `rho[i][a]`: the anchor of `e_i` is `sum_a rho[i][a] d/dx_a`.
    rho: Vec<Vec<Poly>>,
}

/// A section of `A` in the fixed frame, as its `r` polynomial components.
pub type Section = Vec<Poly>;

/// One named axiom check with an optional counterexample.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl AxiomCheck {
    pub fn pass(axiom: impl Into<String>) -> Self {
        AxiomCheck {
            axiom: axiom.into(),
            status: "pass".into(),
            witness: None,
        }
    }

    pub fn fail(axiom: impl Into<String>, witness: impl Into<String>) -> Self {
        AxiomCheck {
            axiom: axiom.into(),
            status: "fail".into(),
            witness: Some(witness.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(AxiomCheck::passed)
    }
}

impl LieAlgebroidData {
    pub fn new(sig: Signature) -> Self {
        let zero = Poly::zero(sig.n);
        LieAlgebroidData {
            sig,
            c: vec![vec![vec![zero.clone(); sig.r]; sig.r]; sig.r],
            rho: vec![vec![zero; sig.n]; sig.r],
        }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// Set `c_ij^k` and `c_ji^k = -c_ij^k` (0-based indices).
    pub fn set_c(&mut self, i: usize, j: usize, k: usize, p: Poly) {
        assert!(i != j || p.is_zero(), "c_ii^k must vanish");
        self.c[i][j][k] = p.clone();
        if i != j {
            self.c[j][i][k] = -&p;
        }
    }

    pub fn set_rho(&mut self, i: usize, a: usize, p: Poly) {
        self.rho[i][a] = p;
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> &Poly {
        &self.c[i][j][k]
    }

    pub fn rho(&self, i: usize, a: usize) -> &Poly {
        &self.rho[i][a]
    }

    /// Anchor of a section, as a base vector field's components.
    pub fn anchor_of_section(&self, s: &Section) -> Vec<Poly> {
        let mut out = vec![Poly::zero(self.sig.n); self.sig.n];
        for (i, si) in s.iter().enumerate() {
            for (a, out_a) in out.iter_mut().enumerate() {
                *out_a = &*out_a + &(si * &self.rho[i][a]);
            }
        }
        out
    }

    /// Action of the anchor of `s` on a base function.
    pub fn anchor_derivative(&self, s: &Section, f: &Poly) -> Poly {
        let v = self.anchor_of_section(s);
        let mut out = Poly::zero(self.sig.n);
        for (a, va) in v.iter().enumerate() {
            out = &out + &(va * &f.deriv(a));
        }
        out
    }

    /// Bracket of sections via structure functions and the Leibniz rule:
    /// `[s, t]^k = s_i t_j c_ij^k + rho(s)(t_k) - rho(t)(s_k)`.
    pub fn section_bracket(&self, s: &Section, t: &Section) -> Section {
        let r = self.sig.r;
        let mut out = vec![Poly::zero(self.sig.n); r];
        for i in 0..r {
            if s[i].is_zero() {
                continue;
            }
            for j in 0..r {
                if t[j].is_zero() {
                    continue;
                }
                let st = &s[i] * &t[j];
                for (k, out_k) in out.iter_mut().enumerate() {
                    if !self.c[i][j][k].is_zero() {
                        *out_k = &*out_k + &(&st * &self.c[i][j][k]);
                    }
                }
            }
        }
        for (k, out_k) in out.iter_mut().enumerate() {
            *out_k = &*out_k + &self.anchor_derivative(s, &t[k]);
            *out_k = &*out_k - &self.anchor_derivative(t, &s[k]);
        }
        out
    }

    /// The homological-vector-field side of the dictionary.
    pub fn build_q(&self) -> VectorField {
        let sig = self.sig;
        let half = Rat::new(1.into(), 2.into());
        let mut xi_images = Vec::with_capacity(sig.r);
        for k in 0..sig.r {
            let mut img = GradedFunction::zero(sig);
            for i in 0..sig.r {
                for j in 0..sig.r {
                    if self.c[i][j][k].is_zero() {
                        continue;
                    }
                    let wedge = &GradedFunction::odd_var(sig, j) * &GradedFunction::odd_var(sig, i);
                    img = &img + &wedge.scale_poly(&self.c[i][j][k]).scale(&half);
                }
            }
            xi_images.push(img);
        }
        let mut x_images = Vec::with_capacity(sig.n);
        for a in 0..sig.n {
            let mut img = GradedFunction::zero(sig);
            for i in 0..sig.r {
                if self.rho[i][a].is_zero() {
                    continue;
                }
                img = &img + &GradedFunction::odd_var(sig, i).scale_poly(&self.rho[i][a]);
            }
            x_images.push(img);
        }
        VectorField::from_components(sig, x_images, xi_images)
    }

    /// Direct verification of the Lie algebroid axioms on sections: frame
    /// Jacobi, anchor bracket-compatibility, and the Leibniz rule on monomial
    /// test functions of degree <= 2. Independent of the graded `[Q,Q]`
    /// computation.
    pub fn verify_algebroid_axioms(&self) -> AxiomReport {
        let sig = self.sig;
        let r = sig.r;
        let mut checks = Vec::new();

        let frame = |i: usize| -> Section {
            let mut s = vec![Poly::zero(sig.n); r];
            s[i] = Poly::one(sig.n);
            s
        };

        // Jacobi on frame triples.
        let mut jacobi_witness: Option<String> = None;
        'jacobi: for i in 0..r {
            for j in (i + 1)..r {
                for k in (j + 1)..r {
                    let (ei, ej, ek) = (frame(i), frame(j), frame(k));
                    let mut jac = self.section_bracket(&self.section_bracket(&ei, &ej), &ek);
                    let t2 = self.section_bracket(&self.section_bracket(&ej, &ek), &ei);
                    let t3 = self.section_bracket(&self.section_bracket(&ek, &ei), &ej);
                    for l in 0..r {
                        jac[l] = &(&jac[l] + &t2[l]) + &t3[l];
                    }
                    if jac.iter().any(|p| !p.is_zero()) {
                        jacobi_witness = Some(format!(
                            "Jacobiator(e{}, e{}, e{}) = [{}]",
                            i + 1,
                            j + 1,
                            k + 1,
                            jac.iter().map(Poly::render).collect::<Vec<_>>().join(", ")
                        ));
                        break 'jacobi;
                    }
                }
            }
        }
        checks.push(match jacobi_witness {
            None => AxiomCheck::pass("jacobi"),
            Some(w) => AxiomCheck::fail("jacobi", w),
        });

        // Anchor is bracket-compatible: rho([e_i, e_j]) = [rho(e_i), rho(e_j)].
        let mut anchor_witness: Option<String> = None;
        'anchor: for i in 0..r {
            for j in (i + 1)..r {
                let lhs = self.anchor_of_section(&self.section_bracket(&frame(i), &frame(j)));
                for a in 0..sig.n {
                    let mut rhs = Poly::zero(sig.n);
                    for b in 0..sig.n {
                        rhs = &rhs + &(&self.rho[i][b] * &self.rho[j][a].deriv(b));
                        rhs = &rhs - &(&self.rho[j][b] * &self.rho[i][a].deriv(b));
                    }
                    if lhs[a] != rhs {
                        anchor_witness = Some(format!(
                            "rho[e{},e{}] and [rho e{}, rho e{}] differ in d/dx{}: {} vs {}",
                            i + 1,
                            j + 1,
                            i + 1,
                            j + 1,
                            a + 1,
                            lhs[a].render(),
                            rhs.render()
                        ));
                        break 'anchor;
                    }
                }
            }
        }
        checks.push(match anchor_witness {
            None => AxiomCheck::pass("anchor-morphism"),
            Some(w) => AxiomCheck::fail("anchor-morphism", w),
        });

        // Leibniz rule on monomial test functions of degree <= 2.
        let mut leibniz_witness: Option<String> = None;
        let mut test_functions = vec![Poly::one(sig.n)];
        for a in 0..sig.n {
            test_functions.push(Poly::var(sig.n, a));
            for b in a..sig.n {
                test_functions.push(&Poly::var(sig.n, a) * &Poly::var(sig.n, b));
            }
        }
        'leibniz: for i in 0..r {
            for j in 0..r {
                for f in &test_functions {
                    let scaled: Section = frame(j).iter().map(|p| p * f).collect();
                    let lhs = self.section_bracket(&frame(i), &scaled);
                    let base = self.section_bracket(&frame(i), &frame(j));
                    let drv = self.anchor_derivative(&frame(i), f);
                    for k in 0..r {
                        let mut rhs = &base[k] * f;
                        if k == j {
                            rhs = &rhs + &drv;
                        }
                        if lhs[k] != rhs {
                            leibniz_witness = Some(format!(
                                "[e{}, {} e{}] violates Leibniz in component {}",
                                i + 1,
                                f.render(),
                                j + 1,
                                k + 1
                            ));
                            break 'leibniz;
                        }
                    }
                }
            }
        }
        checks.push(match leibniz_witness {
            None => AxiomCheck::pass("leibniz"),
            Some(w) => AxiomCheck::fail("leibniz", w),
        });

        AxiomReport { checks }
    }
}

/// Read structure functions and anchor off any degree 1 field. Purely
/// linear; does not require `[Q,Q] = 0`.
pub fn extract_algebroid_raw(q: &VectorField) -> Result<LieAlgebroidData> {
    if !q.is_homogeneous_of_degree(1) {
        return Err(Error::WrongDegree {
            expected: "1".into(),
            found: q
                .homogeneous_degree()
                .map(|d| d.to_string())
                .unwrap_or_else(|| "non-homogeneous".into()),
        });
    }
    let sig = q.signature();
    let mut data = LieAlgebroidData::new(sig);
    for i in 0..sig.r {
        let qi = q.commutator(&VectorField::d_dxi(sig, i));
        for a in 0..sig.n {
            data.rho[i][a] = qi.x_image(a).coeff(&OddMonomial::unit());
        }
        for j in 0..sig.r {
            let qij = qi.commutator(&VectorField::d_dxi(sig, j));
            for k in 0..sig.r {
                data.c[i][j][k] = qij.xi_image(k).coeff(&OddMonomial::unit());
            }
        }
    }
    Ok(data)
}

/// As [`extract_algebroid_raw`], but demands `[Q,Q] = 0` first.
pub fn extract_algebroid(q: &VectorField) -> Result<LieAlgebroidData> {
    match q.is_homological()? {
        HomologicalCheck::Homological => extract_algebroid_raw(q),
        HomologicalCheck::Failed {
            generator,
            coefficient,
        } => Err(Error::NotHomological {
            witness: format!("{} on {}", coefficient.render(), generator),
        }),
    }
}

/// Derived bracket `[[Q, a], b]` of two degree -1 fields.
pub fn derived_bracket(q: &VectorField, a: &VectorField, b: &VectorField) -> Result<VectorField> {
    ensure_homological(q)?;
    for (name, v) in [("first", a), ("second", b)] {
        if !v.is_homogeneous_of_degree(-1) {
            return Err(Error::WrongDegree {
                expected: format!("-1 for the {} argument", name),
                found: v
                    .homogeneous_degree()
                    .map(|d| d.to_string())
                    .unwrap_or_else(|| "non-homogeneous".into()),
            });
        }
    }
    Ok(q.commutator(a).commutator(b))
}

/// Anchor action `[[Q, a], f]` on a xi-degree-0 function.
pub fn anchor_apply(q: &VectorField, a: &VectorField, f: &GradedFunction) -> Result<GradedFunction> {
    ensure_homological(q)?;
    if !a.is_homogeneous_of_degree(-1) {
        return Err(Error::WrongDegree {
            expected: "-1".into(),
            found: "other".into(),
        });
    }
    if f.max_xi_degree() != 0 {
        return Err(Error::WrongDegree {
            expected: "xi-degree 0 function".into(),
            found: format!("xi-degree {}", f.max_xi_degree()),
        });
    }
    Ok(q.commutator(a).apply(f))
}

fn ensure_homological(q: &VectorField) -> Result<()> {
    match q.is_homological()? {
        HomologicalCheck::Homological => Ok(()),
        HomologicalCheck::Failed {
            generator,
            coefficient,
        } => Err(Error::NotHomological {
            witness: format!("{} on {}", coefficient.render(), generator),
        }),
    }
}

// ---------------------------------------------------------------------------
// Covariant differential operators
// ---------------------------------------------------------------------------

/// A CDO on the trivialized bundle: symbol plus matrix part.
///
/// Convention: the matrix `M` is defined by `[X0, d/dxi_b] = - sum_g M[b][g]
/// d/dxi_g`, equivalently the operator acts on frame sections by
/// `X0(e_b) = - sum_g M[b][g] e_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct CDORep {
    pub sig: Signature,
    pub symbol: Vec<Poly>,
    pub matrix: Vec<Vec<Poly>>,
}

impl CDORep {
    /// Apply to a section of the bundle.
    pub fn apply(&self, s: &Section) -> Section {
        let r = self.sig.r;
        let mut out = vec![Poly::zero(self.sig.n); r];
        for (b, sb) in s.iter().enumerate() {
            // symbol acts on the coefficient
            let mut sym = Poly::zero(self.sig.n);
            for (a, va) in self.symbol.iter().enumerate() {
                sym = &sym + &(va * &sb.deriv(a));
            }
            out[b] = &out[b] + &sym;
            // matrix part: X0(e_b) = - sum_g M[b][g] e_g
            for g in 0..r {
                out[g] = &out[g] - &(sb * &self.matrix[b][g]);
            }
        }
        out
    }

    /// The dual operator on `E*`: same symbol, matrix `-M^T`.
    pub fn dual(&self) -> CDORep {
        let r = self.sig.r;
        let matrix = (0..r)
            .map(|b| (0..r).map(|g| -&self.matrix[g][b]).collect())
            .collect();
        CDORep {
            sig: self.sig,
            symbol: self.symbol.clone(),
            matrix,
        }
    }

    /// Commutator of CDOs: symbol is the bracket of symbols, matrix is
    /// `s_X(M_Y) - s_Y(M_X) + [M_X, M_Y]`.
    pub fn commutator(&self, other: &CDORep) -> CDORep {
        let (n, r) = (self.sig.n, self.sig.r);
        let mut symbol = vec![Poly::zero(n); n];
        for (a, sym_a) in symbol.iter_mut().enumerate() {
            for b in 0..n {
                *sym_a = &*sym_a + &(&self.symbol[b] * &other.symbol[a].deriv(b));
                *sym_a = &*sym_a - &(&other.symbol[b] * &self.symbol[a].deriv(b));
            }
        }
        let mut matrix = vec![vec![Poly::zero(n); r]; r];
        for b in 0..r {
            for g in 0..r {
                let mut entry = Poly::zero(n);
                for a in 0..n {
                    entry = &entry + &(&self.symbol[a] * &other.matrix[b][g].deriv(a));
                    entry = &entry - &(&other.symbol[a] * &self.matrix[b][g].deriv(a));
                }
                for d in 0..r {
                    entry = &entry + &(&self.matrix[b][d] * &other.matrix[d][g]);
                    entry = &entry - &(&other.matrix[b][d] * &self.matrix[d][g]);
                }
                matrix[b][g] = entry;
            }
        }
        CDORep {
            sig: self.sig,
            symbol,
            matrix,
        }
    }

    /// The defining pairing identity of the dual, checked on all frame
    /// pairs: `<D*(xi^g), e_b> + <xi^g, D(e_b)> = symbol(<xi^g, e_b>) = 0`.
    pub fn verify_dual_pairing(&self) -> bool {
        let dual = self.dual();
        for g in 0..self.sig.r {
            for b in 0..self.sig.r {
                // <D*(xi^g), e_b> = -dual.matrix[g][b]; <xi^g, D(e_b)> = -M[b][g]
                let lhs = &(-&dual.matrix[g][b]) + &(-&self.matrix[b][g]);
                if !lhs.is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// The identification of degree 0 fields with CDOs via `X0 -> [X0, .]` on
/// degree -1 fields.
pub fn cdo_from_degree0(x0: &VectorField) -> Result<CDORep> {
    if !x0.is_homogeneous_of_degree(0) {
        return Err(Error::WrongDegree {
            expected: "0".into(),
            found: x0
                .homogeneous_degree()
                .map(|d| d.to_string())
                .unwrap_or_else(|| "non-homogeneous".into()),
        });
    }
    let sig = x0.signature();
    let symbol = x0.symbol_polys();
    let mut matrix = vec![vec![Poly::zero(sig.n); sig.r]; sig.r];
    for b in 0..sig.r {
        let bracket = x0.commutator(&VectorField::d_dxi(sig, b));
        let comps = bracket.section_polys();
        for (g, comp) in comps.iter().enumerate() {
            matrix[b][g] = -comp;
        }
    }
    Ok(CDORep {
        sig,
        symbol,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn sig33() -> Signature {
        Signature::new(3, 3)
    }

    /// su(2) over a point: n = 0, r = 3, cyclic constants.
    pub(crate) fn su2() -> LieAlgebroidData {
        let sig = Signature::new(0, 3);
        let mut a = LieAlgebroidData::new(sig);
        let one = Poly::one(0);
        a.set_c(0, 1, 2, one.clone());
        a.set_c(1, 2, 0, one.clone());
        a.set_c(2, 0, 1, one);
        a
    }

    /// Tangent algebroid of R^3: c = 0, anchor identity.
    pub(crate) fn tangent_r3() -> LieAlgebroidData {
        let sig = sig33();
        let mut a = LieAlgebroidData::new(sig);
        for i in 0..3 {
            a.set_rho(i, i, Poly::one(3));
        }
        a
    }

    #[test]
    fn su2_q_matches_printed_form() {
        let sig = Signature::new(0, 3);
        let xi = |a: usize| GradedFunction::odd_var(sig, a);
        let q = su2().build_q();
        // Q = xi2 xi1 d/dxi3 + xi1 xi3 d/dxi2 + xi3 xi2 d/dxi1
        assert_eq!(*q.xi_image(2), &xi(1) * &xi(0));
        assert_eq!(*q.xi_image(1), &xi(0) * &xi(2));
        assert_eq!(*q.xi_image(0), &xi(2) * &xi(1));
        assert!(q.is_homological().unwrap().is_homological());
    }

    #[test]
    fn tangent_q_is_derham() {
        let q = tangent_r3().build_q();
        for i in 0..3 {
            assert_eq!(*q.x_image(i), GradedFunction::odd_var(sig33(), i));
            assert!(q.xi_image(i).is_zero());
        }
    }

    #[test]
    fn abelian_q_is_zero() {
        let a = LieAlgebroidData::new(Signature::new(0, 2));
        assert!(a.build_q().is_zero());
        let back = extract_algebroid(&a.build_q()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn extraction_round_trips() {
        for data in [su2(), tangent_r3()] {
            let q = data.build_q();
            assert_eq!(extract_algebroid(&q).unwrap(), data);
        }
        // with polynomial structure functions and anchor
        let sig = Signature::new(2, 2);
        let mut a = LieAlgebroidData::new(sig);
        a.set_c(0, 1, 0, Poly::var(2, 0));
        a.set_c(0, 1, 1, &Poly::var(2, 1) * &Poly::var(2, 1));
        a.set_rho(0, 0, Poly::one(2));
        a.set_rho(1, 1, Poly::var(2, 0));
        assert_eq!(extract_algebroid_raw(&a.build_q()).unwrap(), a);
    }

    #[test]
    fn su2_axioms_pass_and_match_q() {
        let report = su2().verify_algebroid_axioms();
        assert!(report.passes());
        assert!(su2().build_q().is_homological().unwrap().is_homological());
    }

    #[test]
    fn euclidean_type_constants_satisfy_jacobi() {
        // c_12^3 = 1, c_23^1 = 1, c_31^2 = 0: every Jacobiator term hits a
        // repeated frame vector, so both verification routes accept it.
        let sig = Signature::new(0, 3);
        let mut a = LieAlgebroidData::new(sig);
        a.set_c(0, 1, 2, Poly::one(0));
        a.set_c(1, 2, 0, Poly::one(0));
        assert!(a.verify_algebroid_axioms().passes());
        assert!(a.build_q().is_homological().unwrap().is_homological());
    }

    #[test]
    fn broken_jacobi_detected_by_both_routes() {
        // [e1,e2] = e1, [e2,e3] = e2, [e3,e1] = e3
        let sig = Signature::new(0, 3);
        let mut a = LieAlgebroidData::new(sig);
        a.set_c(0, 1, 0, Poly::one(0));
        a.set_c(1, 2, 1, Poly::one(0));
        a.set_c(2, 0, 2, Poly::one(0));
        let report = a.verify_algebroid_axioms();
        assert!(!report.passes());
        assert!(report.checks.iter().any(|c| c.axiom == "jacobi" && !c.passed()));
        assert!(!a.build_q().is_homological().unwrap().is_homological());
    }

    #[test]
    fn rank_one_polynomial_anchor_passes() {
        // n = 1, r = 1, rho_1^1 = x1: single section, bracket zero.
        let sig = Signature::new(1, 1);
        let mut a = LieAlgebroidData::new(sig);
        a.set_rho(0, 0, Poly::var(1, 0));
        assert!(a.verify_algebroid_axioms().passes());
        assert!(a.build_q().is_homological().unwrap().is_homological());
    }

    #[test]
    fn derived_bracket_recovers_su2() {
        let sig = Signature::new(0, 3);
        let q = su2().build_q();
        let a1 = VectorField::d_dxi(sig, 0);
        let a2 = VectorField::d_dxi(sig, 1);
        assert_eq!(
            derived_bracket(&q, &a1, &a2).unwrap(),
            VectorField::d_dxi(sig, 2)
        );
        assert!(derived_bracket(&q, &a1, &a1).unwrap().is_zero());
    }

    #[test]
    fn anchor_apply_tangent() {
        let q = tangent_r3().build_q();
        let a = VectorField::d_dxi(sig33(), 0);
        let f = GradedFunction::base_var(sig33(), 0);
        assert_eq!(
            anchor_apply(&q, &a, &f).unwrap(),
            GradedFunction::one(sig33())
        );
    }

    #[test]
    fn cdo_conventions() {
        let sig = sig33();
        // X0 = d/dx1: symbol d/dx1, matrix 0
        let d = cdo_from_degree0(&VectorField::d_dx(sig, 0)).unwrap();
        assert_eq!(d.symbol[0], Poly::one(3));
        assert!(d.matrix.iter().flatten().all(Poly::is_zero));
        assert_eq!(d.dual(), d);

        // X0 = xi1 d/dxi3: M[1][3] = 1 (1-based)
        let x0 = VectorField::d_dxi(sig, 2).module_mul(&GradedFunction::odd_var(sig, 0));
        let d = cdo_from_degree0(&x0).unwrap();
        assert_eq!(d.matrix[0][2], Poly::one(3));
        assert_eq!(
            d.matrix.iter().flatten().filter(|p| !p.is_zero()).count(),
            1
        );
        assert!(d.verify_dual_pairing());
        // dual has matrix -M^T
        assert_eq!(d.dual().matrix[2][0], Poly::constant(3, rat(-1)));
    }

    #[test]
    fn cdo_from_mu_e0_prime() {
        // X0 = [Q_deRham, x1 d/dxi3 - d/dxi2]
        let sig = sig33();
        let q = tangent_r3().build_q();
        let w = &VectorField::d_dxi(sig, 2)
            .module_mul(&GradedFunction::base_var(sig, 0))
            - &VectorField::d_dxi(sig, 1);
        let x0 = q.commutator(&w);
        let d = cdo_from_degree0(&x0).unwrap();
        assert_eq!(d.symbol, vec![Poly::zero(3), Poly::constant(3, rat(-1)), Poly::var(3, 0)]);
        assert_eq!(d.matrix[0][2], Poly::one(3));
        assert!(d.verify_dual_pairing());
    }

    #[test]
    fn cdo_commutator_intertwines() {
        let sig = sig33();
        let x0 = &VectorField::d_dx(sig, 0)
            + &VectorField::d_dxi(sig, 2).module_mul(&GradedFunction::odd_var(sig, 0))
                .module_mul(&GradedFunction::base_var(sig, 0));
        let y0 = &VectorField::d_dx(sig, 2).module_mul(&GradedFunction::base_var(sig, 0))
            + &VectorField::d_dxi(sig, 1).module_mul(&GradedFunction::odd_var(sig, 1));
        let lhs = cdo_from_degree0(&x0.commutator(&y0)).unwrap();
        let rhs = cdo_from_degree0(&x0).unwrap().commutator(&cdo_from_degree0(&y0).unwrap());
        assert_eq!(lhs, rhs);
    }
}
