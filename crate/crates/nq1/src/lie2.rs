//! Strict Lie 2-algebras and their non-strict actions.
//!
//! A strict Lie 2-algebra is a DGLA concentrated in degrees -1 and 0, given
//! by rational structure tensors on chosen bases. An action is a pair
//! `(mu, eta)` of basis images in the vector fields, constrained by four
//! exact identities checked on basis tuples (multilinearity extends them;
//! that is the verification contract).
//!
//! The module also assembles the completed distribution spanned by
//! `mu(L)`, `eta(L_0 ^ L_0)` and `[Q, eta(L_0 ^ L_0)]`, decides the closure
//! hypothesis `[D_0, D_-1] <= D_-1`, and runs the quotient pipeline.
//! Negative outcomes are first-class: failed checks carry the offending
//! bracket as a witness.

use crate::algebroid::{AxiomCheck, AxiomReport, Section};
use crate::distribution::{Distribution, InvolutivityReport, QInvarianceReport, ValidationReport};
use crate::error::{Error, Result};
use crate::graded::Signature;
use crate::poly::Poly;
use crate::reduction::{reduce, QuotientResult, ReductionSetting};
use crate::sample::{sample_points, SampleConfig};
use crate::scalar::Rat;
use crate::vector_field::VectorField;
use num_traits::Zero;
use std::collections::BTreeMap;

/// A DGLA concentrated in degrees -1 and 0, with rational structure tensors.
///
/// Bases: `x_1..x_{dim0}` for the degree 0 part, `w_1..w_{dim_m1}` for the
/// degree -1 part. The bracket on two degree -1 elements vanishes for degree
/// reasons and is not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictLie2Algebra {
    dim_m1: usize,
    dim0: usize,
    /// `delta(w_j) = sum_i delta[i][j] x_i`.
    delta: Vec<Vec<Rat>>,
    /// `[x_i, x_j] = sum_k bracket0[i][j][k] x_k`, antisymmetric in `(i, j)`.
    bracket0: Vec<Vec<Vec<Rat>>>,
    /// `[x_i, w_j] = sum_m act[i][j][m] w_m`.
    act: Vec<Vec<Vec<Rat>>>,
}

impl StrictLie2Algebra {
    pub fn new(dim_m1: usize, dim0: usize) -> Self {
        StrictLie2Algebra {
            dim_m1,
            dim0,
            delta: vec![vec![Rat::zero(); dim_m1]; dim0],
            bracket0: vec![vec![vec![Rat::zero(); dim0]; dim0]; dim0],
            act: vec![vec![vec![Rat::zero(); dim_m1]; dim_m1]; dim0],
        }
    }

    pub fn dim_m1(&self) -> usize {
        self.dim_m1
    }

    pub fn dim0(&self) -> usize {
        self.dim0
    }

    pub fn set_delta(&mut self, target: usize, source: usize, value: Rat) {
        self.delta[target][source] = value;
    }

    pub fn delta(&self, target: usize, source: usize) -> &Rat {
        &self.delta[target][source]
    }

    /// Set `[x_i, x_j]`-component on `x_k`, keeping antisymmetry.
    pub fn set_bracket(&mut self, i: usize, j: usize, k: usize, value: Rat) {
        assert!(i != j || value.is_zero(), "diagonal bracket must vanish");
        self.bracket0[i][j][k] = value.clone();
        if i != j {
            self.bracket0[j][i][k] = -value;
        }
    }

    pub fn set_act(&mut self, i: usize, j: usize, m: usize, value: Rat) {
        self.act[i][j][m] = value;
    }

    pub fn bracket(&self, i: usize, j: usize, k: usize) -> &Rat {
        &self.bracket0[i][j][k]
    }

    pub fn act(&self, i: usize, j: usize, m: usize) -> &Rat {
        &self.act[i][j][m]
    }

    /// Bracket of degree 0 basis vectors as a coefficient vector.
    fn bracket_xx(&self, i: usize, j: usize) -> Vec<Rat> {
        (0..self.dim0).map(|k| self.bracket0[i][j][k].clone()).collect()
    }

    /// Action `[x_i, w_j]` as a coefficient vector on the degree -1 basis.
    fn bracket_xw(&self, i: usize, j: usize) -> Vec<Rat> {
        (0..self.dim_m1).map(|m| self.act[i][j][m].clone()).collect()
    }

    /// Verify the DGLA axioms on basis tuples.
    pub fn verify(&self) -> AxiomReport {
        let mut checks = Vec::new();

        // Jacobi on the degree 0 part.
        let mut witness = None;
        'jac: for i in 0..self.dim0 {
            for j in (i + 1)..self.dim0 {
                for k in (j + 1)..self.dim0 {
                    for m in 0..self.dim0 {
                        let mut total = Rat::zero();
                        for l in 0..self.dim0 {
                            total += &self.bracket0[i][j][l] * &self.bracket0[l][k][m];
                            total += &self.bracket0[j][k][l] * &self.bracket0[l][i][m];
                            total += &self.bracket0[k][i][l] * &self.bracket0[l][j][m];
                        }
                        if !total.is_zero() {
                            witness = Some(format!(
                                "Jacobiator(x{}, x{}, x{}) has x{}-component {}",
                                i + 1,
                                j + 1,
                                k + 1,
                                m + 1,
                                total
                            ));
                            break 'jac;
                        }
                    }
                }
            }
        }
        checks.push(match witness {
            None => AxiomCheck::pass("jacobi-L0"),
            Some(w) => AxiomCheck::fail("jacobi-L0", w),
        });

        // Mixed Jacobi: [x_i, [x_j, w]] - [x_j, [x_i, w]] = [[x_i,x_j], w].
        let mut witness = None;
        'mixed: for i in 0..self.dim0 {
            for j in (i + 1)..self.dim0 {
                for w in 0..self.dim_m1 {
                    for m in 0..self.dim_m1 {
                        let mut lhs = Rat::zero();
                        for l in 0..self.dim_m1 {
                            lhs += &self.act[j][w][l] * &self.act[i][l][m];
                            lhs -= &self.act[i][w][l] * &self.act[j][l][m];
                        }
                        let mut rhs = Rat::zero();
                        for l in 0..self.dim0 {
                            rhs += &self.bracket0[i][j][l] * &self.act[l][w][m];
                        }
                        if lhs != rhs {
                            witness = Some(format!(
                                "module Jacobi fails on (x{}, x{}, w{})",
                                i + 1,
                                j + 1,
                                w + 1
                            ));
                            break 'mixed;
                        }
                    }
                }
            }
        }
        checks.push(match witness {
            None => AxiomCheck::pass("jacobi-mixed"),
            Some(w) => AxiomCheck::fail("jacobi-mixed", w),
        });

        // delta is a derivation: delta[x, w] = [x, delta w].
        let mut witness = None;
        'der: for i in 0..self.dim0 {
            for j in 0..self.dim_m1 {
                for k in 0..self.dim0 {
                    let mut lhs = Rat::zero();
                    for m in 0..self.dim_m1 {
                        lhs += &self.act[i][j][m] * &self.delta[k][m];
                    }
                    let mut rhs = Rat::zero();
                    for l in 0..self.dim0 {
                        rhs += &self.delta[l][j] * &self.bracket0[i][l][k];
                    }
                    if lhs != rhs {
                        witness =
                            Some(format!("delta[x{}, w{}] != [x{}, delta w{}]", i + 1, j + 1, i + 1, j + 1));
                        break 'der;
                    }
                }
            }
        }
        checks.push(match witness {
            None => AxiomCheck::pass("delta-derivation"),
            Some(w) => AxiomCheck::fail("delta-derivation", w),
        });

        // [delta w, w'] + [delta w', w] = 0 (from delta on [w, w'] = 0).
        let mut witness = None;
        'pf: for j in 0..self.dim_m1 {
            for jp in j..self.dim_m1 {
                for m in 0..self.dim_m1 {
                    let mut total = Rat::zero();
                    for i in 0..self.dim0 {
                        total += &self.delta[i][j] * &self.act[i][jp][m];
                        total += &self.delta[i][jp] * &self.act[i][j][m];
                    }
                    if !total.is_zero() {
                        witness = Some(format!(
                            "[delta w{}, w{}] + [delta w{}, w{}] != 0",
                            j + 1,
                            jp + 1,
                            jp + 1,
                            j + 1
                        ));
                        break 'pf;
                    }
                }
            }
        }
        checks.push(match witness {
            None => AxiomCheck::pass("delta-squares"),
            Some(w) => AxiomCheck::fail("delta-squares", w),
        });

        AxiomReport { checks }
    }
}

/// Basis images of an action: `mu` on both degrees and `eta` on the exterior
/// square of the degree 0 part. Antisymmetry of `eta` is structural (stored
/// on pairs `i < j`).
#[derive(Debug, Clone)]
pub struct Lie2Action {
    sig: Signature,
    mu0: Vec<VectorField>,
    mu_m1: Vec<VectorField>,
    eta: BTreeMap<(usize, usize), VectorField>,
}

impl Lie2Action {
    pub fn new(
        sig: Signature,
        l: &StrictLie2Algebra,
        mu0: Vec<VectorField>,
        mu_m1: Vec<VectorField>,
    ) -> Result<Lie2Action> {
        if mu0.len() != l.dim0 || mu_m1.len() != l.dim_m1 {
            return Err(Error::Dimension(format!(
                "expected {} degree 0 and {} degree -1 images, got {} and {}",
                l.dim0,
                l.dim_m1,
                mu0.len(),
                mu_m1.len()
            )));
        }
        for v in &mu0 {
            if !v.is_homogeneous_of_degree(0) {
                return Err(Error::WrongDegree {
                    expected: "0 for mu(L_0)".into(),
                    found: v.render(),
                });
            }
        }
        for v in &mu_m1 {
            if !v.is_homogeneous_of_degree(-1) {
                return Err(Error::WrongDegree {
                    expected: "-1 for mu(L_-1)".into(),
                    found: v.render(),
                });
            }
        }
        Ok(Lie2Action {
            sig,
            mu0,
            mu_m1,
            eta: BTreeMap::new(),
        })
    }

    pub fn set_eta(&mut self, i: usize, j: usize, v: VectorField) -> Result<()> {
        if i == j {
            if !v.is_zero() {
                return Err(Error::InvalidInput("eta(x ^ x) must vanish".into()));
            }
            return Ok(());
        }
        if !v.is_homogeneous_of_degree(-1) {
            return Err(Error::WrongDegree {
                expected: "-1 for eta".into(),
                found: v.render(),
            });
        }
        if i < j {
            self.eta.insert((i, j), v);
        } else {
            self.eta.insert((j, i), -&v);
        }
        Ok(())
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn mu0(&self) -> &[VectorField] {
        &self.mu0
    }

    pub fn mu_m1(&self) -> &[VectorField] {
        &self.mu_m1
    }

    /// `eta(x_i ^ x_j)` for arbitrary index order.
    pub fn eta(&self, i: usize, j: usize) -> VectorField {
        if i == j {
            return VectorField::zero(self.sig);
        }
        let (key, flip) = if i < j { ((i, j), false) } else { ((j, i), true) };
        match self.eta.get(&key) {
            Some(v) => {
                if flip {
                    -v
                } else {
                    v.clone()
                }
            }
            None => VectorField::zero(self.sig),
        }
    }

    /// `mu` extended to a coefficient vector on the degree 0 basis.
    fn mu0_of(&self, coeffs: &[Rat]) -> VectorField {
        let mut out = VectorField::zero(self.sig);
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &self.mu0[i].scale(c);
            }
        }
        out
    }

    fn mu_m1_of(&self, coeffs: &[Rat]) -> VectorField {
        let mut out = VectorField::zero(self.sig);
        for (j, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &self.mu_m1[j].scale(c);
            }
        }
        out
    }

    /// `eta(v ^ x_j)` for a coefficient vector `v` on the degree 0 basis.
    fn eta_of_left(&self, coeffs: &[Rat], j: usize) -> VectorField {
        let mut out = VectorField::zero(self.sig);
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &self.eta(i, j).scale(c);
            }
        }
        out
    }
}

/// Check the four action constraints on all basis tuples. One report entry
/// per equation instance, with the nonzero difference as witness.
pub fn action_check_constraints(
    l: &StrictLie2Algebra,
    action: &Lie2Action,
    q: &VectorField,
) -> Result<AxiomReport> {
    if !q.is_homological()?.is_homological() {
        return Err(Error::NotHomological {
            witness: "action constraints are relative to a homological field".into(),
        });
    }
    let mut checks = Vec::new();
    let mut push = |name: String, diff: VectorField| {
        if diff.is_zero() {
            checks.push(AxiomCheck::pass(name));
        } else {
            checks.push(AxiomCheck::fail(name, diff.render()));
        }
    };

    // constr1: d_Q mu = mu delta.
    for j in 0..l.dim_m1 {
        let lhs = q.commutator(&action.mu_m1[j]);
        let delta_w: Vec<Rat> = (0..l.dim0).map(|i| l.delta[i][j].clone()).collect();
        let rhs = action.mu0_of(&delta_w);
        push(format!("constr1(w{})", j + 1), &lhs - &rhs);
    }
    for i in 0..l.dim0 {
        let lhs = q.commutator(&action.mu0[i]);
        push(format!("constr1(e{})", i + 1), lhs);
    }

    // constr2: mu[x,y] - [mu x, mu y] = d_Q eta(x ^ y).
    for i in 0..l.dim0 {
        for j in (i + 1)..l.dim0 {
            let lhs = &action.mu0_of(&l.bracket_xx(i, j))
                - &action.mu0[i].commutator(&action.mu0[j]);
            let rhs = q.commutator(&action.eta(i, j));
            push(format!("constr2(e{},e{})", i + 1, j + 1), &lhs - &rhs);
        }
    }

    // constr3: mu[w,x] - [mu w, mu x] = eta(delta w ^ x).
    for j in 0..l.dim_m1 {
        for i in 0..l.dim0 {
            // [w, x] = -[x, w]
            let neg_xw = l.bracket_xw(i, j).iter().map(|c| -c).collect::<Vec<_>>();
            let lhs = &action.mu_m1_of(&neg_xw)
                - &action.mu_m1[j].commutator(&action.mu0[i]);
            let delta_w: Vec<Rat> = (0..l.dim0).map(|ii| l.delta[ii][j].clone()).collect();
            let rhs = action.eta_of_left(&delta_w, i);
            push(format!("constr3(w{},e{})", j + 1, i + 1), &lhs - &rhs);
        }
    }

    // constr4: the eta Jacobiator identity on degree 0 triples.
    for i in 0..l.dim0 {
        for j in (i + 1)..l.dim0 {
            for k in (j + 1)..l.dim0 {
                let mut total = VectorField::zero(action.sig);
                // eta(x ^ [y,z]) - eta(y ^ [x,z]) + eta(z ^ [x,y])
                for (sign, a, b, c) in [(1, i, j, k), (-1, j, i, k), (1, k, i, j)] {
                    let br = l.bracket_xx(b, c);
                    let mut term = VectorField::zero(action.sig);
                    for (m, cm) in br.iter().enumerate() {
                        if !cm.is_zero() {
                            term = &term + &action.eta(a, m).scale(cm);
                        }
                    }
                    total = if sign > 0 { &total + &term } else { &total - &term };
                }
                // + [mu x, eta(y ^ z)] - [mu y, eta(x ^ z)] + [mu z, eta(x ^ y)]
                for (sign, a, b, c) in [(1, i, j, k), (-1, j, i, k), (1, k, i, j)] {
                    let term = action.mu0[a].commutator(&action.eta(b, c));
                    total = if sign > 0 { &total + &term } else { &total - &term };
                }
                push(format!("constr4(e{},e{},e{})", i + 1, j + 1, k + 1), total);
            }
        }
    }

    Ok(AxiomReport { checks })
}

/// The raw module spanned by the action image `mu(L)` and `eta`, without the
/// `d_Q` completion. Often fails involutivity and Q-invariance.
pub fn action_image_span(action: &Lie2Action) -> Result<Distribution> {
    let mut gens: Vec<VectorField> = Vec::new();
    gens.extend(action.mu_m1.iter().cloned());
    gens.extend(action.eta.values().cloned());
    gens.extend(action.mu0.iter().cloned());
    Distribution::from_generators(action.sig, gens)
}

/// The completed module `Span{mu(L), eta, d_Q eta}`, validated pointwise.
pub fn action_distribution(
    action: &Lie2Action,
    q: &VectorField,
    cfg: &SampleConfig,
) -> Result<(Distribution, ValidationReport)> {
    let mut gens: Vec<VectorField> = Vec::new();
    gens.extend(action.mu_m1.iter().cloned());
    gens.extend(action.eta.values().cloned());
    gens.extend(action.mu0.iter().cloned());
    gens.extend(action.eta.values().map(|e| q.commutator(e)));
    let d = Distribution::from_generators(action.sig, gens)?;
    let report = d.validate(cfg);
    Ok((d, report))
}

/// Outcome of the closure hypothesis `[D_0, D_-1] <= D_-1` and, when it
/// holds, the instance-level verification of its two consequences.
#[derive(Debug, Clone)]
pub struct ClosureReport {
    pub closed: bool,
    /// `(degree 0 generator, degree -1 generator, bracket)` for the first
    /// failing pair.
    pub witness: Option<(VectorField, VectorField, VectorField)>,
    pub q_invariance: Option<QInvarianceReport>,
    pub involutivity: Option<InvolutivityReport>,
}

pub fn action_closure_check(
    action: &Lie2Action,
    q: &VectorField,
    cfg: &SampleConfig,
) -> Result<ClosureReport> {
    let (d, _) = action_distribution(action, q, cfg)?;
    for x0 in d.gens_0() {
        for xm in d.gens_m1() {
            let bracket = x0.commutator(xm);
            if bracket.is_zero() {
                continue;
            }
            if !d.membership(&bracket, cfg)?.member {
                return Ok(ClosureReport {
                    closed: false,
                    witness: Some((x0.clone(), xm.clone(), bracket)),
                    q_invariance: None,
                    involutivity: None,
                });
            }
        }
    }
    let q_invariance = d.is_q_invariant(q, cfg)?;
    let involutivity = d.is_involutive(cfg)?;
    Ok(ClosureReport {
        closed: true,
        witness: None,
        q_invariance: Some(q_invariance),
        involutivity: Some(involutivity),
    })
}

/// Quotient by the action, with the ideal-system data of the corollary:
/// `B = span{mu(L_-1), eta}` and `F = span{symbols of mu(L_0), rho(eta)}`.
#[derive(Debug, Clone)]
pub struct ActionQuotient {
    pub quotient: QuotientResult,
    pub ideal_b_columns: Vec<Section>,
    pub ideal_f_fields: Vec<Vec<Poly>>,
}

pub fn action_quotient(
    action: &Lie2Action,
    q: &VectorField,
    setting: &ReductionSetting,
    cfg: &SampleConfig,
) -> Result<ActionQuotient> {
    let closure = action_closure_check(action, q, cfg)?;
    if !closure.closed {
        return Err(Error::InvalidInput(
            "the action distribution is not closed under [D_0, D_-1]".into(),
        ));
    }
    let (d, _) = action_distribution(action, q, cfg)?;
    let quotient = reduce(q, &d, setting, cfg)?;

    let mut ideal_b_columns: Vec<Section> = Vec::new();
    for v in action.mu_m1.iter().chain(action.eta.values()) {
        ideal_b_columns.push(v.section_polys());
    }
    let mut ideal_f_fields: Vec<Vec<Poly>> = Vec::new();
    for v in &action.mu0 {
        ideal_f_fields.push(v.symbol_polys());
    }
    for e in action.eta.values() {
        // rho of the section underlying eta: the symbol of [Q, eta]
        ideal_f_fields.push(q.commutator(e).symbol_polys());
    }
    Ok(ActionQuotient {
        quotient,
        ideal_b_columns,
        ideal_f_fields,
    })
}

/// Report for a strict action (`eta = 0`): DGLA-morphism identities plus
/// the almost-freeness rank test at the sample points.
#[derive(Debug, Clone)]
pub struct StrictActionReport {
    pub morphism: AxiomReport,
    pub almost_free: bool,
    pub failing_point: Option<Vec<Rat>>,
}

pub fn strict_action_check(
    l: &StrictLie2Algebra,
    action: &Lie2Action,
    q: &VectorField,
    cfg: &SampleConfig,
) -> Result<StrictActionReport> {
    if action.eta.values().any(|v| !v.is_zero()) {
        return Err(Error::InvalidInput(
            "strict action check requires eta = 0".into(),
        ));
    }
    let morphism = action_check_constraints(l, action, q)?;

    let points = sample_points(action.sig.n, cfg);
    let mut almost_free = true;
    let mut failing_point = None;
    for p in &points {
        let fiber: Vec<Vec<Rat>> = action
            .mu_m1
            .iter()
            .map(|v| {
                v.section_polys()
                    .iter()
                    .map(|poly| poly.eval(p))
                    .collect()
            })
            .collect();
        let tangent: Vec<Vec<Rat>> = action
            .mu0
            .iter()
            .map(|v| v.symbol_polys().iter().map(|poly| poly.eval(p)).collect())
            .collect();
        let ok = crate::linalg::rat_rank(&fiber) == l.dim_m1
            && crate::linalg::rat_rank(&tangent) == l.dim0;
        if !ok {
            almost_free = false;
            failing_point = Some(p.clone());
            break;
        }
    }
    Ok(StrictActionReport {
        morphism,
        almost_free,
        failing_point,
    })
}

/// The truncation property of actions: `[Q, mu(x)]` lies in the span of
/// `mu(delta(L_-1))` for every degree 0 basis vector. For a valid action the
/// bracket is zero outright, which is the strongest form.
pub fn verify_truncation(action: &Lie2Action, q: &VectorField) -> bool {
    action
        .mu0
        .iter()
        .all(|x| q.commutator(x).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graded::GradedFunction;
    use crate::reduction::ReductionMode;
    use crate::scalar::{rat, ratio};

    fn cfg() -> SampleConfig {
        SampleConfig::default()
    }

    fn sig33() -> Signature {
        Signature::new(3, 3)
    }

    /// The abelian R^2 action on T[1]R^3 whose image span is neither
    /// involutive nor Q-invariant.
    pub(crate) fn notinv_action() -> (StrictLie2Algebra, Lie2Action, VectorField) {
        let sig = sig33();
        let q = catalog::derham(3);
        let l = StrictLie2Algebra::new(0, 2);
        let mu0 = vec![VectorField::d_dx(sig, 0), catalog::mu_e0_prime()];
        let mut action = Lie2Action::new(sig, &l, mu0, vec![]).unwrap();
        action
            .set_eta(0, 1, -&VectorField::d_dxi(sig, 2))
            .unwrap();
        (l, action, q)
    }

    /// The R[1] (+) R^2 action on T[1]R^3 whose completed module is not
    /// involutive: X = d/dx1, Y = (x1^2/2) d/dx3 - x1 d/dx2.
    pub(crate) fn notin_action() -> (StrictLie2Algebra, Lie2Action, VectorField) {
        let sig = sig33();
        let q = catalog::derham(3);
        let mut l = StrictLie2Algebra::new(1, 2);
        l.set_delta(0, 0, rat(1)); // delta(w1) = e1

        let xbar = VectorField::d_dxi(sig, 0);
        let ybar = &VectorField::d_dxi(sig, 2).module_mul(&GradedFunction::from_poly(
            sig,
            Poly::var(3, 0).pow(2).scale(&ratio(1, 2)),
        )) - &VectorField::d_dxi(sig, 1).module_mul(&GradedFunction::base_var(sig, 0));
        let mu0 = vec![q.commutator(&xbar), q.commutator(&ybar)];
        let mu_m1 = vec![xbar];
        let mut action = Lie2Action::new(sig, &l, mu0, mu_m1).unwrap();
        // eta(e1 ^ e2) = -overline{[X,Y]} = -(x1 d/dxi3 - d/dxi2)
        let xy = &VectorField::d_dxi(sig, 2).module_mul(&GradedFunction::base_var(sig, 0))
            - &VectorField::d_dxi(sig, 1);
        action.set_eta(0, 1, -&xy).unwrap();
        (l, action, q)
    }

    #[test]
    fn notinv_constraints_pass() {
        let (l, action, q) = notinv_action();
        assert!(l.verify().passes());
        let report = action_check_constraints(&l, &action, &q).unwrap();
        assert!(report.passes(), "{:?}", report);
        assert!(verify_truncation(&action, &q));
    }

    #[test]
    fn notinv_image_fails_but_completion_works() {
        let (_, action, q) = notinv_action();
        let image = action_image_span(&action).unwrap();
        assert!(!image.is_involutive(&cfg()).unwrap().involutive);
        assert!(!image.is_q_invariant(&q, &cfg()).unwrap().invariant);

        let closure = action_closure_check(&action, &q, &cfg()).unwrap();
        assert!(closure.closed);
        assert!(closure.q_invariance.unwrap().invariant);
        assert!(closure.involutivity.unwrap().involutive);
    }

    #[test]
    fn notinv_quotient_is_abelian_r2() {
        let (_, action, q) = notinv_action();
        let setting = ReductionSetting::adapted_chart(vec![0, 1, 2]);
        let out = action_quotient(&action, &q, &setting, &cfg()).unwrap();
        assert_eq!(out.quotient.reduced.as_ref().unwrap(), &catalog::abelian(2));
        // ideal-system data: B is the e3 line, F spans all of TM
        assert_eq!(out.ideal_b_columns.len(), 1);
        assert_eq!(out.ideal_f_fields.len(), 3);
    }

    #[test]
    fn notin_constraints_pass_but_closure_fails() {
        let (l, action, q) = notin_action();
        assert!(l.verify().passes());
        let report = action_check_constraints(&l, &action, &q).unwrap();
        assert!(report.passes(), "{:?}", report);

        let closure = action_closure_check(&action, &q, &cfg()).unwrap();
        assert!(!closure.closed);
        let (_, _, bracket) = closure.witness.unwrap();
        // the witness is -overline{[X,[X,Y]]} = -d/dxi3
        assert_eq!(bracket, -&VectorField::d_dxi(sig33(), 2));

        // the completed module itself is not involutive
        let (d, _) = action_distribution(&action, &q, &cfg()).unwrap();
        assert!(!d.is_involutive(&cfg()).unwrap().involutive);
    }

    #[test]
    fn translation_action_is_strict_almost_free() {
        let sig = Signature::new(1, 1);
        let q = catalog::derham(1);
        let mut l = StrictLie2Algebra::new(1, 1);
        l.set_delta(0, 0, rat(1));
        let mu_m1 = vec![VectorField::d_dxi(sig, 0)];
        let mu0 = vec![q.commutator(&mu_m1[0])];
        let action = Lie2Action::new(sig, &l, mu0, mu_m1).unwrap();
        let report = strict_action_check(&l, &action, &q, &cfg()).unwrap();
        assert!(report.morphism.passes());
        assert!(report.almost_free);

        let setting = ReductionSetting::adapted_chart(vec![0]);
        let out = action_quotient(&action, &q, &setting, &cfg()).unwrap();
        let reduced = out.quotient.reduced.unwrap();
        assert_eq!(reduced.signature(), Signature::new(0, 0));
    }

    #[test]
    fn notinv_with_eta_zeroed_fails_constr2() {
        let (l, action, q) = notinv_action();
        let stripped = Lie2Action::new(sig33(), &l, action.mu0().to_vec(), vec![]).unwrap();
        let report = action_check_constraints(&l, &stripped, &q).unwrap();
        let c2 = report
            .checks
            .iter()
            .find(|c| c.axiom.starts_with("constr2"))
            .unwrap();
        assert!(!c2.passed());
        // the obstruction is exactly d_Q eta = -d/dx3
        assert_eq!(c2.witness.as_deref(), Some("-d/dx3"));
    }

    #[test]
    fn zero_action_passes_not_almost_free() {
        let sig = sig33();
        let q = catalog::derham(3);
        let l = StrictLie2Algebra::new(1, 2);
        let action = Lie2Action::new(
            sig,
            &l,
            vec![VectorField::zero(sig); 2],
            vec![VectorField::zero(sig)],
        )
        .unwrap();
        let report = strict_action_check(&l, &action, &q, &cfg()).unwrap();
        assert!(report.morphism.passes());
        assert!(!report.almost_free);

        // zero action: quotient = input
        let setting = ReductionSetting::infer(&action_image_span(&action).unwrap(), &cfg()).unwrap();
        assert_eq!(setting.mode, ReductionMode::AdaptedChart);
        let out = action_quotient(&action, &q, &setting, &cfg()).unwrap();
        assert_eq!(out.quotient.reduced.unwrap(), catalog::tangent(3));
    }

    #[test]
    fn broken_lie2_data_detected() {
        let mut l = StrictLie2Algebra::new(1, 2);
        l.set_delta(0, 0, rat(1));
        // make delta fail the derivation rule: [x1, w1] = w1 but all brackets 0
        l.set_act(0, 0, 0, rat(1));
        assert!(!l.verify().passes());
    }
}
