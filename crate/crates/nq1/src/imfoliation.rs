//! IM-foliations: the classical counterpart of involutive Q-invariant
//! distributions.
//!
//! An [`IMFoliation`] packages a Lie algebroid with a triple `(B, F, nabla)`
//! and checks the four defining axioms on flat-frame representatives. The
//! flat sections `Gamma_nabla(A)` are the sections whose class modulo `B` is
//! `nabla`-parallel; they are represented by `Gamma(B)` plus finitely many
//! frame lifts, which determines them completely in the supported settings
//! (point bodies, adapted charts, constant-coefficient connections).
//!
//! The two directions of the bijection with distributions are
//! [`imf_from_distribution`] and [`distribution_from_imf`]; the latter
//! re-verifies involutivity and `[Q, D] <= D` on the instance rather than
//! trusting the general proposition.

use crate::algebroid::{extract_algebroid, AxiomCheck, AxiomReport, LieAlgebroidData, Section};
use crate::distribution::{
    classical_to_dist, dist_to_classical, verify_triple, ClassicalTriple, Distribution,
    InvolutivityReport, QInvarianceReport,
};
use crate::error::{Error, Result};
use crate::linalg::{rat_rref, PolyMatrix, SolveResult};
use crate::poly::Poly;
use crate::reduction::flat_frame_solve;
use crate::sample::{sample_points, SampleConfig};
use crate::scalar::Rat;
use crate::vector_field::VectorField;

#[derive(Debug, Clone)]
pub struct IMFoliation {
    pub algebroid: LieAlgebroidData,
    pub triple: ClassicalTriple,
    /// Optional user-supplied representatives of `Gamma_nabla(A)`.
    pub flat_frame: Option<Vec<Section>>,
}

/// A distribution together with the instance-level certificates that the
/// bijection promises.
#[derive(Debug, Clone)]
pub struct CertifiedDistribution {
    pub distribution: Distribution,
    pub involutive: InvolutivityReport,
    pub q_invariant: QInvarianceReport,
}

impl IMFoliation {
    /// Assemble from raw data. The complement frame of `B` (on which the
    /// `nabla` matrices act) is chosen by greedy pivoting at the origin, the
    /// same deterministic rule used when extracting a triple from a
    /// distribution.
    pub fn from_data(
        algebroid: LieAlgebroidData,
        b_columns: Vec<Section>,
        f_fields: Vec<Vec<Poly>>,
        nabla: Option<Vec<Vec<Vec<Poly>>>>,
        flat_frame: Option<Vec<Section>>,
    ) -> Result<IMFoliation> {
        let sig = algebroid.signature();
        let k = b_columns.len();
        let mut rows: Vec<Vec<Rat>> = b_columns
            .iter()
            .map(|col| {
                col.iter()
                    .map(Poly::constant_term)
                    .collect()
            })
            .collect();
        let pivots = rat_rref(&mut rows);
        if pivots.len() < k {
            return Err(Error::InvalidInput(
                "B columns are dependent at the origin; supply an independent spanning set".into(),
            ));
        }
        let complement: Vec<usize> = (0..sig.r).filter(|a| !pivots.contains(a)).collect();
        let q = complement.len();
        let nabla = match nabla {
            Some(n) => {
                if n.len() != f_fields.len()
                    || n.iter().any(|m| m.len() != q || m.iter().any(|r| r.len() != q))
                {
                    return Err(Error::Dimension(format!(
                        "expected {} connection matrices of size {}x{}",
                        f_fields.len(),
                        q,
                        q
                    )));
                }
                n
            }
            None => vec![vec![vec![Poly::zero(sig.n); q]; q]; f_fields.len()],
        };
        Ok(IMFoliation {
            algebroid,
            triple: ClassicalTriple {
                sig,
                b_columns,
                f_fields,
                complement,
                nabla,
            },
            flat_frame,
        })
    }

    /// The flat-frame representatives: supplied ones (verified), or solved
    /// from the connection.
    pub fn resolve_flat_frame(&self, cfg: &SampleConfig) -> Result<Vec<Section>> {
        if let Some(frame) = &self.flat_frame {
            if frame.len() != self.triple.rank_quotient() {
                return Err(Error::NoFlatFrame(format!(
                    "expected {} flat sections, got {}",
                    self.triple.rank_quotient(),
                    frame.len()
                )));
            }
            for (i, s) in frame.iter().enumerate() {
                if !self.triple.is_flat_section(s)? {
                    return Err(Error::NoFlatFrame(format!(
                        "supplied section {} is not nabla-flat",
                        i + 1
                    )));
                }
            }
            return Ok(frame.clone());
        }
        let f_coords = infer_f_coords(&self.triple, cfg);
        flat_frame_solve(&self.triple, &f_coords).map_err(|e| {
            Error::NoFlatFrame(format!(
                "{}; alternatively run the distribution-side checks via \
                 distribution_from_imf with an explicit frame",
                e
            ))
        })
    }

    /// Check the four IM-foliation axioms plus the structural invariants
    /// (B is a subalgebroid, F involutive, nabla flat).
    pub fn check_axioms(&self, cfg: &SampleConfig) -> Result<AxiomReport> {
        let sig = self.algebroid.signature();
        let points = sample_points(sig.n, cfg);
        let frame = self.resolve_flat_frame(cfg)?;
        let t = &self.triple;
        let mut checks = Vec::new();

        // structural: F involutive and nabla flat
        match verify_triple(t) {
            Ok(()) => {
                checks.push(AxiomCheck::pass("f-involutive"));
                checks.push(AxiomCheck::pass("nabla-flat"));
            }
            Err(e) => {
                checks.push(AxiomCheck::fail("triple-structure", e.to_string()));
            }
        }

        let b_rows: Vec<Vec<Poly>> = (0..sig.r)
            .map(|al| t.b_columns.iter().map(|c| c[al].clone()).collect())
            .collect();
        let b_mat = PolyMatrix::from_rows(sig.n, b_rows);
        let in_b_span = |target: &Section| -> bool {
            if target.iter().all(Poly::is_zero) {
                return true;
            }
            if t.b_columns.is_empty() {
                return false;
            }
            match b_mat.solve(target) {
                SolveResult::Inconsistent => false,
                SolveResult::Solved(sol) => {
                    sol.as_polynomials().is_some() || sol.denominator_nonzero_at(&points)
                }
            }
        };
        let f_rows: Vec<Vec<Poly>> = (0..sig.n)
            .map(|a| t.f_fields.iter().map(|f| f[a].clone()).collect())
            .collect();
        let f_mat = PolyMatrix::from_rows(sig.n, f_rows);
        let in_f_span = |target: &[Poly]| -> bool {
            if target.iter().all(Poly::is_zero) {
                return true;
            }
            if t.f_fields.is_empty() {
                return false;
            }
            match f_mat.solve(target) {
                SolveResult::Inconsistent => false,
                SolveResult::Solved(sol) => {
                    sol.as_polynomials().is_some() || sol.denominator_nonzero_at(&points)
                }
            }
        };

        // structural: B is closed under the bracket
        let mut witness = None;
        'outer: for (i, b1) in t.b_columns.iter().enumerate() {
            for b2 in t.b_columns.iter().skip(i + 1) {
                let br = self.algebroid.section_bracket(b1, b2);
                if !in_b_span(&br) {
                    witness = Some(format!(
                        "[B_{}, B_{}] = {} leaves Gamma(B)",
                        i + 1,
                        i + 2,
                        render_section(&br)
                    ));
                    break 'outer;
                }
            }
        }
        checks.push(match witness {
            None => AxiomCheck::pass("b-subalgebroid"),
            Some(w) => AxiomCheck::fail("b-subalgebroid", w),
        });

        // Gamma_nabla(A) representatives: B columns and the flat frame.
        let mut flat_reps: Vec<Section> = t.b_columns.clone();
        flat_reps.extend(frame.iter().cloned());

        // (i) flat sections are closed under the bracket
        let is_flat = |s: &Section| -> Result<bool> { self.triple.is_flat_section(s) };
        let mut witness = None;
        'ax1: for (i, a1) in flat_reps.iter().enumerate() {
            for a2 in flat_reps.iter().skip(i + 1) {
                let br = self.algebroid.section_bracket(a1, a2);
                if !is_flat(&br)? {
                    witness = Some(format!(
                        "[{}, {}] = {} is not nabla-flat",
                        render_section(a1),
                        render_section(a2),
                        render_section(&br)
                    ));
                    break 'ax1;
                }
            }
        }
        checks.push(match witness {
            None => AxiomCheck::pass("axiom-i"),
            Some(w) => AxiomCheck::fail("axiom-i", w),
        });

        // (ii) [Gamma(B), Gamma_nabla(A)] stays in Gamma(B)
        let mut witness = None;
        'ax2: for (j, b) in t.b_columns.iter().enumerate() {
            for a in &frame {
                let br = self.algebroid.section_bracket(b, a);
                if !in_b_span(&br) {
                    witness = Some(format!(
                        "[B_{}, {}] = {} leaves Gamma(B)",
                        j + 1,
                        render_section(a),
                        render_section(&br)
                    ));
                    break 'ax2;
                }
            }
        }
        checks.push(match witness {
            None => AxiomCheck::pass("axiom-ii"),
            Some(w) => AxiomCheck::fail("axiom-ii", w),
        });

        // (iii) the anchor maps B into F
        let mut witness = None;
        for (j, b) in t.b_columns.iter().enumerate() {
            let rho_b = self.algebroid.anchor_of_section(b);
            if !in_f_span(&rho_b) {
                witness = Some(format!(
                    "rho(B_{}) = {} leaves Gamma(F)",
                    j + 1,
                    render_base(&rho_b)
                ));
                break;
            }
        }
        checks.push(match witness {
            None => AxiomCheck::pass("axiom-iii"),
            Some(w) => AxiomCheck::fail("axiom-iii", w),
        });

        // (iv) anchors of flat sections normalize F
        let mut witness = None;
        'ax4: for a in &frame {
            let rho_a = self.algebroid.anchor_of_section(a);
            for (g, z) in t.f_fields.iter().enumerate() {
                let br = base_bracket(sig.n, &rho_a, z);
                if !in_f_span(&br) {
                    witness = Some(format!(
                        "[rho({}), F_{}] = {} leaves Gamma(F)",
                        render_section(a),
                        g + 1,
                        render_base(&br)
                    ));
                    break 'ax4;
                }
            }
        }
        checks.push(match witness {
            None => AxiomCheck::pass("axiom-iv"),
            Some(w) => AxiomCheck::fail("axiom-iv", w),
        });

        Ok(AxiomReport { checks })
    }
}

fn render_section(s: &Section) -> String {
    let body: Vec<String> = s
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(i, p)| format!("({})*e{}", p.render(), i + 1))
        .collect();
    if body.is_empty() {
        "0".into()
    } else {
        body.join(" + ")
    }
}

fn render_base(v: &[Poly]) -> String {
    let body: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(i, p)| format!("({})*d/dx{}", p.render(), i + 1))
        .collect();
    if body.is_empty() {
        "0".into()
    } else {
        body.join(" + ")
    }
}

/// Commutator of base vector fields given by polynomial components.
pub fn base_bracket(n: usize, v: &[Poly], w: &[Poly]) -> Vec<Poly> {
    let mut out = vec![Poly::zero(n); n];
    for (a, out_a) in out.iter_mut().enumerate() {
        for b in 0..n {
            *out_a = &*out_a + &(&v[b] * &w[a].deriv(b));
            *out_a = &*out_a - &(&w[b] * &v[a].deriv(b));
        }
    }
    out
}

/// Coordinates whose fields lie in the span of the triple's `F` generators.
fn infer_f_coords(t: &ClassicalTriple, cfg: &SampleConfig) -> Vec<usize> {
    let sig = t.sig;
    let points = sample_points(sig.n, cfg);
    let f_rows: Vec<Vec<Poly>> = (0..sig.n)
        .map(|a| t.f_fields.iter().map(|f| f[a].clone()).collect())
        .collect();
    let f_mat = PolyMatrix::from_rows(sig.n, f_rows);
    (0..sig.n)
        .filter(|&c| {
            if t.f_fields.is_empty() {
                return false;
            }
            let mut unit = vec![Poly::zero(sig.n); sig.n];
            unit[c] = Poly::one(sig.n);
            match f_mat.solve(&unit) {
                SolveResult::Inconsistent => false,
                SolveResult::Solved(sol) => {
                    sol.as_polynomials().is_some() || sol.denominator_nonzero_at(&points)
                }
            }
        })
        .collect()
}

/// Forward direction of the bijection: package the classical data of a
/// certified involutive Q-invariant distribution, together with the axiom
/// report for the resulting IM-foliation.
pub fn imf_from_distribution(
    d: &Distribution,
    q: &VectorField,
    cfg: &SampleConfig,
) -> Result<(IMFoliation, AxiomReport)> {
    let triple = dist_to_classical(d, cfg)?;
    let algebroid = extract_algebroid(q)?;
    let imf = IMFoliation {
        algebroid,
        triple,
        flat_frame: None,
    };
    let report = imf.check_axioms(cfg)?;
    Ok((imf, report))
}

/// Reverse direction: rebuild the distribution and re-verify, on the
/// instance, that it is involutive and preserved by `Q`.
pub fn distribution_from_imf(
    imf: &IMFoliation,
    cfg: &SampleConfig,
) -> Result<CertifiedDistribution> {
    let frame = imf.resolve_flat_frame(cfg)?;
    let distribution = classical_to_dist(&imf.triple, &frame)?;
    let q = imf.algebroid.build_q();
    let involutive = distribution.is_involutive(cfg)?;
    let q_invariant = distribution.is_q_invariant(&q, cfg)?;
    if !involutive.involutive || !q_invariant.invariant {
        return Err(Error::InternalConsistency(
            "reconstructed distribution failed involutivity or Q-invariance; \
             the input triple does not satisfy the IM-foliation axioms"
                .into(),
        ));
    }
    Ok(CertifiedDistribution {
        distribution,
        involutive,
        q_invariant,
    })
}
