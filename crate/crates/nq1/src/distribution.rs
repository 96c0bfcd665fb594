//! Distributions on a degree-1 N-manifold.
//!
//! A distribution is presented by homogeneous generators in degrees -1 and 0.
//! Being an honest distribution (rather than just a submodule) is a pointwise
//! condition: evaluations of the generators at base points must stay linearly
//! independent. We certify this on a deterministic sample set on top of a
//! symbolic rank computation, and the report says which level was reached.
//!
//! Membership of a vector field in the module splits into one linear system
//! per xi-degree over the rational function field. A positive answer is
//! `polynomial-exact` when the solved coefficients are polynomials, and
//! `sample-certified` when they are rational functions whose denominators do
//! not vanish on the sample set.

use crate::error::{Error, Result};
use crate::graded::{odd_monomials_of_degree, GradedFunction, OddMonomial, Signature};
use crate::linalg::{rat_rank, rat_rref, PolyMatrix, SolveResult};
use crate::poly::Poly;
use crate::sample::{sample_points, SampleConfig};
use crate::scalar::Rat;
use crate::vector_field::VectorField;

/// A graded submodule of vector fields presented by homogeneous generators.
#[derive(Debug, Clone)]
pub struct Distribution {
    sig: Signature,
    gens_m1: Vec<VectorField>,
    gens_0: Vec<VectorField>,
}

/// Pointwise certification level.
#[derive(Debug, Clone, PartialEq)]
pub enum Certification {
    /// Symbolic rank is full and the evaluations are independent at every
    /// sample point.
    Certified,
    /// Only a submodule: some evaluation degenerates.
    ModuleOnly {
        failing_point: Option<Vec<Rat>>,
        detail: String,
    },
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified)
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub certification: Certification,
    pub points_checked: usize,
}

/// Confidence attached to a positive membership answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    PolynomialExact,
    SampleCertified,
}

/// Coefficient of one generator in a membership decomposition, as
/// `numerator / denominator` with a xi-free denominator.
#[derive(Debug, Clone)]
pub struct MemberCoefficient {
    pub numerator: GradedFunction,
    pub denominator: Poly,
}

#[derive(Debug, Clone)]
pub struct Membership {
    pub member: bool,
    pub certainty: Option<Certainty>,
    /// Per generator, ordered as degree -1 generators then degree 0.
    pub coefficients: Option<Vec<MemberCoefficient>>,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct PairFailure {
    pub left: VectorField,
    pub right: VectorField,
    pub bracket: VectorField,
}

#[derive(Debug, Clone)]
pub struct InvolutivityReport {
    pub involutive: bool,
    pub failure: Option<PairFailure>,
}

#[derive(Debug, Clone)]
pub struct QInvarianceReport {
    pub invariant: bool,
    /// Failing generator and its bracket with Q.
    pub failure: Option<(VectorField, VectorField)>,
}

impl Distribution {
    /// Split homogeneous generators into the degree -1 and degree 0 lists,
    /// preserving input order. Rejects non-homogeneous generators and
    /// degrees other than -1 and 0.
    pub fn from_generators(sig: Signature, gens: Vec<VectorField>) -> Result<Distribution> {
        let mut gens_m1 = Vec::new();
        let mut gens_0 = Vec::new();
        for g in gens {
            if g.signature() != sig {
                return Err(Error::SignatureMismatch(sig, g.signature()));
            }
            if g.is_zero() {
                continue;
            }
            if g.is_homogeneous_of_degree(-1) {
                gens_m1.push(g);
            } else if g.is_homogeneous_of_degree(0) {
                gens_0.push(g);
            } else {
                return Err(Error::NotHomogeneous(format!(
                    "distribution generators must be homogeneous of degree -1 or 0, got {}",
                    g.render()
                )));
            }
        }
        Ok(Distribution {
            sig,
            gens_m1,
            gens_0,
        })
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn gens_m1(&self) -> &[VectorField] {
        &self.gens_m1
    }

    pub fn gens_0(&self) -> &[VectorField] {
        &self.gens_0
    }

    /// All generators, degree -1 first (the coefficient order used by
    /// membership answers).
    pub fn all_gens(&self) -> Vec<&VectorField> {
        self.gens_m1.iter().chain(self.gens_0.iter()).collect()
    }

    /// Matrix of degree -1 generators as sections (r x k).
    pub fn section_matrix(&self) -> Vec<Vec<Poly>> {
        (0..self.sig.r)
            .map(|al| {
                self.gens_m1
                    .iter()
                    .map(|g| g.xi_image(al).coeff(&OddMonomial::unit()))
                    .collect()
            })
            .collect()
    }

    /// Matrix of degree 0 generator symbols (n x l).
    pub fn symbol_matrix(&self) -> Vec<Vec<Poly>> {
        (0..self.sig.n)
            .map(|i| {
                self.gens_0
                    .iter()
                    .map(|g| g.x_image(i).coeff(&OddMonomial::unit()))
                    .collect()
            })
            .collect()
    }

    /// Certify pointwise linear independence of the generator evaluations:
    /// degree -1 images in the fiber and degree 0 symbols in the tangent
    /// must each have full column rank, symbolically and at every sample
    /// point.
    pub fn validate(&self, cfg: &SampleConfig) -> ValidationReport {
        let points = sample_points(self.sig.n, cfg);
        let certification = self.certify_at(&points);
        ValidationReport {
            certification,
            points_checked: points.len(),
        }
    }

    fn certify_at(&self, points: &[Vec<Rat>]) -> Certification {
        let k = self.gens_m1.len();
        let l = self.gens_0.len();
        let sec = PolyMatrix::from_rows(self.sig.n, self.section_matrix());
        let sym = PolyMatrix::from_rows(self.sig.n, self.symbol_matrix());
        for p in points {
            if k > 0 && rat_rank(&sec.eval(p)) < k {
                return Certification::ModuleOnly {
                    failing_point: Some(p.clone()),
                    detail: "degree -1 generator evaluations degenerate".into(),
                };
            }
            if l > 0 && rat_rank(&sym.eval(p)) < l {
                return Certification::ModuleOnly {
                    failing_point: Some(p.clone()),
                    detail: "degree 0 generator symbols degenerate".into(),
                };
            }
        }
        if k > 0 && sec.rank() < k {
            return Certification::ModuleOnly {
                failing_point: None,
                detail: "degree -1 generators are dependent over the function field".into(),
            };
        }
        if l > 0 && sym.rank() < l {
            return Certification::ModuleOnly {
                failing_point: None,
                detail: "degree 0 generator symbols are dependent over the function field".into(),
            };
        }
        Certification::Certified
    }

    /// Decide whether `v = sum_j h_j G_j` with graded-function coefficients.
    pub fn membership(&self, v: &VectorField, cfg: &SampleConfig) -> Result<Membership> {
        if v.signature() != self.sig {
            return Err(Error::SignatureMismatch(self.sig, v.signature()));
        }
        let Some(degree) = v.homogeneous_degree() else {
            return Err(Error::NotHomogeneous(
                "membership test needs a homogeneous field".into(),
            ));
        };
        if v.is_zero() {
            let coefficients = self
                .all_gens()
                .iter()
                .map(|_| MemberCoefficient {
                    numerator: GradedFunction::zero(self.sig),
                    denominator: Poly::one(self.sig.n),
                })
                .collect();
            return Ok(Membership {
                member: true,
                certainty: Some(Certainty::PolynomialExact),
                coefficients: Some(coefficients),
                detail: "zero field".into(),
            });
        }

        // Unknowns: one polynomial per (generator, odd monomial of degree
        // deg(v) - deg(G)).
        let gens = self.all_gens();
        let mut unknowns: Vec<(usize, OddMonomial)> = Vec::new();
        for (j, g) in gens.iter().enumerate() {
            let gd = if g.is_homogeneous_of_degree(-1) { -1 } else { 0 };
            let hd = degree - gd;
            if hd < 0 {
                continue;
            }
            for m in odd_monomials_of_degree(self.sig.r, hd as usize) {
                unknowns.push((j, m));
            }
        }
        if unknowns.is_empty() {
            return Ok(Membership {
                member: false,
                certainty: None,
                coefficients: None,
                detail: "no coefficient degrees available".into(),
            });
        }

        // Rows: coefficient of xi^T on each chart generator.
        let mut rows: Vec<Vec<Poly>> = Vec::new();
        let mut rhs: Vec<Poly> = Vec::new();
        enum Target {
            X(usize),
            Xi(usize),
        }
        let mut targets: Vec<(Target, OddMonomial)> = Vec::new();
        if degree >= 0 {
            for i in 0..self.sig.n {
                for m in odd_monomials_of_degree(self.sig.r, degree as usize) {
                    targets.push((Target::X(i), m));
                }
            }
        }
        let xi_deg = degree + 1;
        if xi_deg >= 0 && (xi_deg as usize) <= self.sig.r {
            for a in 0..self.sig.r {
                for m in odd_monomials_of_degree(self.sig.r, xi_deg as usize) {
                    targets.push((Target::Xi(a), m));
                }
            }
        }
        for (target, t_mon) in &targets {
            let coeff_of = |g: &GradedFunction| -> Vec<(OddMonomial, Poly)> {
                g.terms().map(|(m, p)| (*m, p.clone())).collect()
            };
            let (v_coeff, gen_coeff): (Poly, Vec<Vec<(OddMonomial, Poly)>>) = match target {
                Target::X(i) => (
                    v.x_image(*i).coeff(t_mon),
                    gens.iter().map(|g| coeff_of(g.x_image(*i))).collect(),
                ),
                Target::Xi(a) => (
                    v.xi_image(*a).coeff(t_mon),
                    gens.iter().map(|g| coeff_of(g.xi_image(*a))).collect(),
                ),
            };
            let mut row = Vec::with_capacity(unknowns.len());
            for (j, s_mon) in &unknowns {
                let mut entry = Poly::zero(self.sig.n);
                for (u_mon, p) in &gen_coeff[*j] {
                    if let Some((prod, sign)) = s_mon.mul(u_mon) {
                        if prod == *t_mon {
                            entry = if sign < 0 { &entry - p } else { &entry + p };
                        }
                    }
                }
                row.push(entry);
            }
            rows.push(row);
            rhs.push(v_coeff);
        }

        let mat = PolyMatrix::from_rows(self.sig.n, rows);
        match mat.solve(&rhs) {
            SolveResult::Inconsistent => Ok(Membership {
                member: false,
                certainty: None,
                coefficients: None,
                detail: "no solution over the rational function field".into(),
            }),
            SolveResult::Solved(sol) => {
                let points = sample_points(self.sig.n, cfg);
                let (certainty, numerators, denominator) =
                    if let Some(polys) = sol.as_polynomials() {
                        (Certainty::PolynomialExact, polys, Poly::one(self.sig.n))
                    } else if sol.denominator_nonzero_at(&points) {
                        (
                            Certainty::SampleCertified,
                            sol.numerators.clone(),
                            sol.denominator.clone(),
                        )
                    } else {
                        return Ok(Membership {
                            member: false,
                            certainty: None,
                            coefficients: None,
                            detail:
                                "solutions exist over the function field but the computed \
                                 denominator vanishes at a sample point (conservative answer)"
                                    .into(),
                        });
                    };
                let mut coeffs: Vec<MemberCoefficient> = gens
                    .iter()
                    .map(|_| MemberCoefficient {
                        numerator: GradedFunction::zero(self.sig),
                        denominator: denominator.clone(),
                    })
                    .collect();
                for ((j, s_mon), num) in unknowns.iter().zip(numerators.iter()) {
                    if !num.is_zero() {
                        coeffs[*j]
                            .numerator
                            .add_term(*s_mon, num.clone());
                    }
                }
                Ok(Membership {
                    member: true,
                    certainty: Some(certainty),
                    coefficients: Some(coeffs),
                    detail: "solved".into(),
                })
            }
        }
    }

    /// Closure under brackets, checked on all generator pairs. Brackets of
    /// two degree -1 generators vanish for degree reasons and are skipped.
    pub fn is_involutive(&self, cfg: &SampleConfig) -> Result<InvolutivityReport> {
        let gens = self.all_gens();
        for (i, left) in gens.iter().enumerate() {
            for right in gens.iter().skip(i + 1) {
                if left.is_homogeneous_of_degree(-1) && right.is_homogeneous_of_degree(-1) {
                    continue;
                }
                let bracket = left.commutator(right);
                if bracket.is_zero() {
                    continue;
                }
                let m = self.membership(&bracket, cfg)?;
                if !m.member {
                    return Ok(InvolutivityReport {
                        involutive: false,
                        failure: Some(PairFailure {
                            left: (*left).clone(),
                            right: (*right).clone(),
                            bracket,
                        }),
                    });
                }
            }
        }
        Ok(InvolutivityReport {
            involutive: true,
            failure: None,
        })
    }

    /// `[Q, D] <= D`, checked on generators (sufficient: `[Q, -]` acts as a
    /// derivation over the module structure).
    pub fn is_q_invariant(&self, q: &VectorField, cfg: &SampleConfig) -> Result<QInvarianceReport> {
        if !q.is_homological()?.is_homological() {
            return Err(Error::NotHomological {
                witness: "Q-invariance requires a homological field".into(),
            });
        }
        for g in self.all_gens() {
            let bracket = q.commutator(g);
            if bracket.is_zero() {
                continue;
            }
            let m = self.membership(&bracket, cfg)?;
            if !m.member {
                return Ok(QInvarianceReport {
                    invariant: false,
                    failure: Some((g.clone(), bracket)),
                });
            }
        }
        Ok(QInvarianceReport {
            invariant: true,
            failure: None,
        })
    }

    /// Mutual membership of generators: the two presentations span the same
    /// module.
    pub fn module_equal(&self, other: &Distribution, cfg: &SampleConfig) -> Result<bool> {
        for g in self.all_gens() {
            if !other.membership(g, cfg)?.member {
                return Ok(false);
            }
        }
        for g in other.all_gens() {
            if !self.membership(g, cfg)?.member {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// Classical data: (B, F, nabla)
// ---------------------------------------------------------------------------

/// The classical triple behind a certified involutive distribution.
///
/// `B` is spanned by the degree -1 generator images, `F` by the symbols of
/// the degree 0 generators, and `nabla` is the induced flat `F`-connection on
/// `E/B` written in the chosen complement frame: for the `g`-th degree 0
/// generator `X0` and complement index `c`,
/// `[X0, e_{complement[c]}] = sum_d nabla[g][d][c] e_{complement[d]} mod B`.
#[derive(Debug, Clone)]
pub struct ClassicalTriple {
    pub sig: Signature,
    /// Columns spanning `B` (each of length `r`).
    pub b_columns: Vec<Vec<Poly>>,
    /// Base fields spanning `F` (each of length `n`).
    pub f_fields: Vec<Vec<Poly>>,
    /// Frame indices complementing `B` in `E`.
    pub complement: Vec<usize>,
    /// One connection matrix per `F` generator, sized by the complement.
    pub nabla: Vec<Vec<Vec<Poly>>>,
}

impl ClassicalTriple {
    pub fn rank_b(&self) -> usize {
        self.b_columns.len()
    }

    pub fn rank_quotient(&self) -> usize {
        self.complement.len()
    }

    /// Reduce a section modulo `B` to complement coordinates. Requires the
    /// combined matrix `[B | complement]` to be invertible over the function
    /// field and the result to be polynomial.
    pub fn complement_coordinates(&self, section: &[Poly]) -> Result<Vec<Poly>> {
        let sig = self.sig;
        let k = self.b_columns.len();
        let rows: Vec<Vec<Poly>> = (0..sig.r)
            .map(|al| {
                let mut row: Vec<Poly> =
                    self.b_columns.iter().map(|col| col[al].clone()).collect();
                for &c in &self.complement {
                    row.push(if c == al {
                        Poly::one(sig.n)
                    } else {
                        Poly::zero(sig.n)
                    });
                }
                row
            })
            .collect();
        let mat = PolyMatrix::from_rows(sig.n, rows);
        match mat.solve(section) {
            SolveResult::Inconsistent => Err(Error::InternalConsistency(
                "[B | complement] failed to span a section of E".into(),
            )),
            SolveResult::Solved(sol) => {
                let polys = sol.as_polynomials().ok_or_else(|| {
                    Error::UnsupportedSetting(
                        "mod-B reduction produced non-polynomial coefficients; \
                         choose a different frame"
                            .into(),
                    )
                })?;
                Ok(polys[k..].to_vec())
            }
        }
    }

    /// `nabla` applied to a quotient section written in complement
    /// coordinates, along the `g`-th `F` generator.
    pub fn nabla_apply(&self, g: usize, coords: &[Poly]) -> Vec<Poly> {
        let sig = self.sig;
        let q = self.complement.len();
        let mut out = vec![Poly::zero(sig.n); q];
        for d in 0..q {
            // derivative along the symbol
            for (a, fa) in self.f_fields[g].iter().enumerate() {
                out[d] = &out[d] + &(fa * &coords[d].deriv(a));
            }
            for c in 0..q {
                out[d] = &out[d] + &(&self.nabla[g][d][c] * &coords[c]);
            }
        }
        out
    }

    /// Check that a lift's class is `nabla`-flat.
    pub fn is_flat_section(&self, section: &[Poly]) -> Result<bool> {
        let coords = self.complement_coordinates(section)?;
        for g in 0..self.f_fields.len() {
            if self.nabla_apply(g, &coords).iter().any(|p| !p.is_zero()) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Extract `(B, F, nabla)` from a certified involutive distribution.
///
/// The complement frame is chosen by greedy pivoting on the degree -1
/// coefficient matrix at the first sample point, so the answer is
/// deterministic. Well-definedness of `nabla` (the degree 0 part preserves
/// `Gamma(B)`) and flatness are re-verified symbolically.
pub fn dist_to_classical(d: &Distribution, cfg: &SampleConfig) -> Result<ClassicalTriple> {
    let sig = d.signature();
    let points = sample_points(sig.n, cfg);
    let report = d.validate(cfg);
    if let Certification::ModuleOnly { detail, .. } = report.certification {
        return Err(Error::InvalidInput(format!(
            "not a certified distribution: {}",
            detail
        )));
    }

    let b_columns: Vec<Vec<Poly>> = d
        .gens_m1
        .iter()
        .map(|g| g.section_polys())
        .collect();
    let f_fields: Vec<Vec<Poly>> = d.gens_0.iter().map(|g| g.symbol_polys()).collect();

    // Pivot rows of B at the first sample point; the complement is the rest.
    let k = b_columns.len();
    let mut eval_rows: Vec<Vec<Rat>> = (0..k)
        .map(|j| {
            (0..sig.r)
                .map(|al| b_columns[j][al].eval(&points[0]))
                .collect()
        })
        .collect();
    let pivot_cols = rat_rref(&mut eval_rows);
    if pivot_cols.len() < k {
        return Err(Error::InternalConsistency(
            "certified distribution lost rank at the base sample point".into(),
        ));
    }
    let complement: Vec<usize> = (0..sig.r).filter(|al| !pivot_cols.contains(al)).collect();

    // Well-definedness: [X0, b] stays in the B-span for every generator pair.
    let b_matrix_rows: Vec<Vec<Poly>> = (0..sig.r)
        .map(|al| b_columns.iter().map(|col| col[al].clone()).collect())
        .collect();
    let b_mat = PolyMatrix::from_rows(sig.n, b_matrix_rows);
    for (g_idx, x0) in d.gens_0.iter().enumerate() {
        for (j, b) in d.gens_m1.iter().enumerate() {
            let bracket = x0.commutator(b);
            let target = bracket.section_polys();
            let ok = if k == 0 {
                target.iter().all(Poly::is_zero)
            } else {
                match b_mat.solve(&target) {
                    SolveResult::Inconsistent => false,
                    SolveResult::Solved(sol) => {
                        sol.as_polynomials().is_some() || sol.denominator_nonzero_at(&points)
                    }
                }
            };
            if !ok {
                return Err(Error::IllDefinedConnection(format!(
                    "[generator {} of degree 0, generator {} of degree -1] = {} \
                     does not lie in Gamma(B)",
                    g_idx + 1,
                    j + 1,
                    bracket.render()
                )));
            }
        }
    }

    // Connection matrices on the complement frame.
    let q = complement.len();
    let mut nabla = Vec::with_capacity(d.gens_0.len());
    let mut triple = ClassicalTriple {
        sig,
        b_columns: b_columns.clone(),
        f_fields: f_fields.clone(),
        complement: complement.clone(),
        nabla: Vec::new(),
    };
    for x0 in &d.gens_0 {
        let mut matrix = vec![vec![Poly::zero(sig.n); q]; q];
        for (c, &gamma) in complement.iter().enumerate() {
            let bracket = x0.commutator(&VectorField::d_dxi(sig, gamma));
            let coords = triple.complement_coordinates(&bracket.section_polys())?;
            for (dd, coord) in coords.iter().enumerate() {
                matrix[dd][c] = coord.clone();
            }
        }
        nabla.push(matrix);
    }
    triple.nabla = nabla;

    verify_triple(&triple)?;
    Ok(triple)
}

/// Symbolic verification of the triple invariants: `F` is involutive and
/// `nabla` is flat.
pub fn verify_triple(t: &ClassicalTriple) -> Result<()> {
    let sig = t.sig;
    let l = t.f_fields.len();
    let q = t.complement.len();
    let f_rows: Vec<Vec<Poly>> = (0..sig.n)
        .map(|a| t.f_fields.iter().map(|f| f[a].clone()).collect())
        .collect();
    let f_mat = PolyMatrix::from_rows(sig.n, f_rows);
    for g in 0..l {
        for h in (g + 1)..l {
            // base bracket of the two symbols
            let mut bracket = vec![Poly::zero(sig.n); sig.n];
            for (a, br) in bracket.iter_mut().enumerate() {
                for b in 0..sig.n {
                    *br = &*br + &(&t.f_fields[g][b] * &t.f_fields[h][a].deriv(b));
                    *br = &*br - &(&t.f_fields[h][b] * &t.f_fields[g][a].deriv(b));
                }
            }
            let coeffs = if bracket.iter().all(Poly::is_zero) {
                vec![Poly::zero(sig.n); l]
            } else {
                match f_mat.solve(&bracket) {
                    SolveResult::Inconsistent => {
                        return Err(Error::InvalidInput(format!(
                            "F is not involutive: [F_{}, F_{}] leaves the span",
                            g + 1,
                            h + 1
                        )))
                    }
                    SolveResult::Solved(sol) => sol.as_polynomials().ok_or_else(|| {
                        Error::UnsupportedSetting(
                            "F-bracket coefficients are not polynomial".into(),
                        )
                    })?,
                }
            };
            // curvature = nabla_g nabla_h - nabla_h nabla_g - nabla_{[g,h]}
            for c in 0..q {
                let mut basis = vec![Poly::zero(sig.n); q];
                basis[c] = Poly::one(sig.n);
                let gh = t.nabla_apply(g, &t.nabla_apply(h, &basis));
                let hg = t.nabla_apply(h, &t.nabla_apply(g, &basis));
                let mut curv: Vec<Poly> = gh.iter().zip(hg.iter()).map(|(a, b)| a - b).collect();
                for (e, ce) in coeffs.iter().enumerate() {
                    if ce.is_zero() {
                        continue;
                    }
                    let ne = t.nabla_apply(e, &basis);
                    for (dd, cv) in curv.iter_mut().enumerate() {
                        *cv = &*cv - &(ce * &ne[dd]);
                    }
                }
                if curv.iter().any(|p| !p.is_zero()) {
                    return Err(Error::InternalConsistency(format!(
                        "nabla has curvature along F generators {} and {}",
                        g + 1,
                        h + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Rebuild a distribution from classical data and a `nabla`-flat frame of
/// `E/B` (lifts to sections of `E`). The degree 0 generators are the lifts
/// `X0` with symbol `F_g` annihilating both the `B`-frame and the flat
/// lifts.
pub fn classical_to_dist(t: &ClassicalTriple, flat_frame: &[Vec<Poly>]) -> Result<Distribution> {
    let sig = t.sig;
    let k = t.b_columns.len();
    let q = t.complement.len();
    if flat_frame.len() != q {
        return Err(Error::NoFlatFrame(format!(
            "expected {} flat sections for the quotient frame, got {}",
            q,
            flat_frame.len()
        )));
    }
    // frame = B columns then flat lifts; must be a frame of E
    let mut frame_cols: Vec<Vec<Poly>> = t.b_columns.clone();
    frame_cols.extend(flat_frame.iter().cloned());
    let frame_rows: Vec<Vec<Poly>> = (0..sig.r)
        .map(|al| frame_cols.iter().map(|col| col[al].clone()).collect())
        .collect();
    let frame_mat = PolyMatrix::from_rows(sig.n, frame_rows);
    if sig.r > 0 && frame_mat.rank() < sig.r {
        return Err(Error::NotAFrame(
            "B columns plus flat lifts do not span E".into(),
        ));
    }
    for (idx, s) in flat_frame.iter().enumerate() {
        if !t.is_flat_section(s)? {
            return Err(Error::NoFlatFrame(format!(
                "supplied section {} is not nabla-flat",
                idx + 1
            )));
        }
    }

    let mut gens: Vec<VectorField> = t
        .b_columns
        .iter()
        .map(|col| VectorField::from_section(sig, col))
        .collect();

    // One lift per F generator: X0 with symbol F_g and X0(frame) = 0.
    for f in &t.f_fields {
        let mut matrix = vec![vec![Poly::zero(sig.n); sig.r]; sig.r]; // M[al][be]
        if sig.r > 0 {
            // Solve P^T u_be = rhs_be where P columns are the frame sections:
            // sum_al M[al][be] P[al][j] = F_g(P[be][j]) for every j.
            let pt_rows: Vec<Vec<Poly>> = (0..k + q)
                .map(|j| (0..sig.r).map(|al| frame_cols[j][al].clone()).collect())
                .collect();
            let pt = PolyMatrix::from_rows(sig.n, pt_rows);
            for be in 0..sig.r {
                let rhs: Vec<Poly> = (0..k + q)
                    .map(|j| {
                        let mut acc = Poly::zero(sig.n);
                        for (a, fa) in f.iter().enumerate() {
                            acc = &acc + &(fa * &frame_cols[j][be].deriv(a));
                        }
                        acc
                    })
                    .collect();
                match pt.solve(&rhs) {
                    SolveResult::Inconsistent => {
                        return Err(Error::InternalConsistency(
                            "lift construction failed on a spanning frame".into(),
                        ))
                    }
                    SolveResult::Solved(sol) => {
                        let u = sol.as_polynomials().ok_or_else(|| {
                            Error::UnsupportedSetting(
                                "lift coefficients are not polynomial; supply an adapted frame"
                                    .into(),
                            )
                        })?;
                        for al in 0..sig.r {
                            matrix[al][be] = u[al].clone();
                        }
                    }
                }
            }
        }
        // X0(xi_g) = sum_al M[al][g] xi_al
        let mut xi_images = Vec::with_capacity(sig.r);
        for g in 0..sig.r {
            let mut img = GradedFunction::zero(sig);
            for al in 0..sig.r {
                if !matrix[al][g].is_zero() {
                    img = &img + &GradedFunction::odd_var(sig, al).scale_poly(&matrix[al][g]);
                }
            }
            xi_images.push(img);
        }
        let x_images = f
            .iter()
            .map(|p| GradedFunction::from_poly(sig, p.clone()))
            .collect();
        gens.push(VectorField::from_components(sig, x_images, xi_images));
    }

    let dist = Distribution::from_generators(sig, gens)?;
    // sanity: the lifts must annihilate the flat lifts
    for x0 in dist.gens_0() {
        for s in flat_frame {
            let br = x0.commutator(&VectorField::from_section(sig, s));
            if !br.is_zero() {
                return Err(Error::InternalConsistency(
                    "constructed lift does not annihilate the flat frame".into(),
                ));
            }
        }
    }
    Ok(dist)
}

// ---------------------------------------------------------------------------
// Degree 1 Taylor expansion
// ---------------------------------------------------------------------------

/// `P = sum_i xi^i X^i + 1/2 sum_{i,k} xi^i xi^k b^{ik}` with
/// `X^i = [P, a_i]` and `b^{ik} = [[P, a_i], a_k]`, for a frame `a_i` with
/// dual degree 1 coordinates `xi^i`.
#[derive(Debug, Clone)]
pub struct TaylorDecomposition {
    pub x_parts: Vec<VectorField>,
    pub b_parts: Vec<Vec<VectorField>>,
    pub duals: Vec<GradedFunction>,
}

pub fn taylor_expand_degree1(
    p: &VectorField,
    frame: &[Vec<Poly>],
) -> Result<TaylorDecomposition> {
    let sig = p.signature();
    if !p.is_homogeneous_of_degree(1) {
        return Err(Error::WrongDegree {
            expected: "1".into(),
            found: p
                .homogeneous_degree()
                .map(|d| d.to_string())
                .unwrap_or_else(|| "non-homogeneous".into()),
        });
    }
    if frame.len() != sig.r {
        return Err(Error::NotAFrame(format!(
            "expected {} frame sections, got {}",
            sig.r,
            frame.len()
        )));
    }
    // Dual coordinates: xi^i = sum_al u[i][al] xi_al with <xi^i, a_j> = delta.
    let rows: Vec<Vec<Poly>> = (0..sig.r)
        .map(|j| (0..sig.r).map(|al| frame[j][al].clone()).collect())
        .collect();
    let mat = PolyMatrix::from_rows(sig.n, rows);
    let mut duals = Vec::with_capacity(sig.r);
    for i in 0..sig.r {
        let mut rhs = vec![Poly::zero(sig.n); sig.r];
        rhs[i] = Poly::one(sig.n);
        match mat.solve(&rhs) {
            SolveResult::Inconsistent => {
                return Err(Error::NotAFrame("sections do not span E".into()))
            }
            SolveResult::Solved(sol) => {
                let u = sol.as_polynomials().ok_or_else(|| {
                    Error::NotAFrame("dual frame is not polynomial".into())
                })?;
                let mut dual = GradedFunction::zero(sig);
                for (al, ua) in u.iter().enumerate() {
                    if !ua.is_zero() {
                        dual = &dual + &GradedFunction::odd_var(sig, al).scale_poly(ua);
                    }
                }
                duals.push(dual);
            }
        }
    }

    let fields: Vec<VectorField> = frame
        .iter()
        .map(|s| VectorField::from_section(sig, s))
        .collect();
    let x_parts: Vec<VectorField> = fields.iter().map(|a| p.commutator(a)).collect();
    let b_parts: Vec<Vec<VectorField>> = x_parts
        .iter()
        .map(|xi| fields.iter().map(|a| xi.commutator(a)).collect())
        .collect();

    // Reassemble and compare exactly.
    let mut rebuilt = VectorField::zero(sig);
    for (i, x) in x_parts.iter().enumerate() {
        rebuilt = &rebuilt + &x.module_mul(&duals[i]);
    }
    let half = Rat::new(1.into(), 2.into());
    for (i, row) in b_parts.iter().enumerate() {
        for (kk, b) in row.iter().enumerate() {
            let wedge = &duals[i] * &duals[kk];
            rebuilt = &rebuilt + &b.module_mul(&wedge).scale(&half);
        }
    }
    if &rebuilt != p {
        return Err(Error::InternalConsistency(
            "Taylor reassembly did not reproduce the input".into(),
        ));
    }
    Ok(TaylorDecomposition {
        x_parts,
        b_parts,
        duals,
    })
}
