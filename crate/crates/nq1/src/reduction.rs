//! Invariant functions and quotients.
//!
//! Reduction is exact in two regular situations: point bodies (`n = 0`,
//! where the function algebra is finite dimensional) and adapted charts
//! (the base splits into `F`-coordinates and transverse coordinates, and a
//! flat frame of `E/B` is available). The quotient manifold is presented by
//! degree 1 invariants `theta_m` (duals of the flat frame inside the
//! annihilator of `B`) and the transverse coordinates; restricting `Q` to
//! these and re-extracting structure functions yields the reduced algebroid.
//!
//! Singular modules over a point body (generators whose evaluations vanish
//! somewhere) still have a computable invariant subalgebra; when it is not
//! generated in degrees 0 and 1 the result reports the generator degrees
//! instead of pretending to be a vector bundle.

use crate::algebroid::{extract_algebroid_raw, LieAlgebroidData};
use crate::distribution::{dist_to_classical, ClassicalTriple, Distribution};
use crate::error::{Error, Result};
use crate::graded::{odd_monomials_of_degree, GradedFunction, OddMonomial, Signature};
use crate::linalg::{rat_kernel, rat_solve, PolyMatrix, SolveResult};
use crate::poly::Poly;
use crate::sample::SampleConfig;
use crate::scalar::Rat;
use crate::vector_field::VectorField;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMode {
    PointBody,
    AdaptedChart,
}

/// Declared regularity data for a reduction. The artifact verifies what is
/// symbolically checkable (flatness, closure, homologicity of the reduced
/// field); simplicity of `F` and absence of holonomy are declarations.
#[derive(Debug, Clone)]
pub struct ReductionSetting {
    pub mode: ReductionMode,
    /// 0-based indices of the coordinates spanning `F` (adapted charts).
    pub f_coords: Vec<usize>,
    /// Optional user-supplied flat frame of `E/B`, as lifts to sections.
    pub flat_frame: Option<Vec<Vec<Poly>>>,
    /// xi-degree cutoff for invariant bases (defaults to the full rank).
    pub max_xi_degree: Option<usize>,
    /// Base-degree cutoff for invariant bases in adapted charts.
    pub max_base_degree: usize,
}

impl ReductionSetting {
    pub fn point_body() -> Self {
        ReductionSetting {
            mode: ReductionMode::PointBody,
            f_coords: Vec::new(),
            flat_frame: None,
            max_xi_degree: None,
            max_base_degree: 6,
        }
    }

    pub fn adapted_chart(f_coords: Vec<usize>) -> Self {
        ReductionSetting {
            mode: ReductionMode::AdaptedChart,
            f_coords,
            flat_frame: None,
            max_xi_degree: None,
            max_base_degree: 6,
        }
    }

    /// Choose a mode automatically: point body when `n = 0`, otherwise an
    /// adapted chart whose `F`-coordinates are those spanned by the degree 0
    /// symbols.
    pub fn infer(d: &Distribution, cfg: &SampleConfig) -> Result<Self> {
        let sig = d.signature();
        if sig.n == 0 {
            return Ok(ReductionSetting::point_body());
        }
        let sym_rows: Vec<Vec<Poly>> = d.symbol_matrix();
        let sym = PolyMatrix::from_rows(sig.n, sym_rows);
        let mut f_coords = Vec::new();
        for c in 0..sig.n {
            let mut unit = vec![Poly::zero(sig.n); sig.n];
            unit[c] = Poly::one(sig.n);
            let member = match sym.solve(&unit) {
                SolveResult::Inconsistent => false,
                SolveResult::Solved(sol) => {
                    sol.as_polynomials().is_some()
                        || sol.denominator_nonzero_at(&crate::sample::sample_points(sig.n, cfg))
                }
            };
            if member {
                f_coords.push(c);
            }
        }
        Ok(ReductionSetting::adapted_chart(f_coords))
    }

    fn transverse(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|c| !self.f_coords.contains(c)).collect()
    }
}

/// Basis of the invariant functions up to the reported cutoffs, graded by
/// xi-degree.
#[derive(Debug, Clone)]
pub struct InvariantBasis {
    pub basis: Vec<GradedFunction>,
    pub xi_cutoff: usize,
    /// `None` when no base-degree truncation applies (point bodies).
    pub base_cutoff: Option<usize>,
    /// True when the basis is the complete answer, not a truncation.
    pub complete: bool,
}

impl InvariantBasis {
    pub fn of_xi_degree(&self, k: usize) -> Vec<&GradedFunction> {
        self.basis
            .iter()
            .filter(|f| f.homogeneous_degree() == Some(k))
            .collect()
    }
}

/// Result of a reduction.
#[derive(Debug, Clone)]
pub struct QuotientResult {
    /// The reduced algebroid; `None` when the invariant algebra is not
    /// generated in degrees 0 and 1 (singular case).
    pub reduced: Option<LieAlgebroidData>,
    pub reduced_q: Option<VectorField>,
    /// Degree 1 invariants embedding the reduced odd generators.
    pub theta_embeddings: Vec<GradedFunction>,
    /// Transverse coordinates embedding the reduced base coordinates.
    pub base_embeddings: Vec<GradedFunction>,
    pub invariants: InvariantBasis,
    /// xi-degrees in which the invariant algebra needs generators beyond
    /// degree 0 (one entry per generator; `[1, 1]` for a rank 2 quotient,
    /// `[2]` for the singular su(2) module).
    pub generator_degrees: Vec<usize>,
}

// ---------------------------------------------------------------------------
// Invariant functions
// ---------------------------------------------------------------------------

fn transverse_monomials(n: usize, transverse: &[usize], max_deg: usize) -> Vec<Vec<u32>> {
    fn rec(
        transverse: &[usize],
        pos: usize,
        left: usize,
        acc: &mut Vec<u32>,
        n: usize,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos == transverse.len() {
            let mut exps = vec![0u32; n];
            for (i, &v) in acc.iter().enumerate() {
                exps[transverse[i]] = v;
            }
            out.push(exps);
            return;
        }
        for d in 0..=left {
            acc.push(d as u32);
            rec(transverse, pos + 1, left - d, acc, n, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(transverse, 0, max_deg, &mut Vec::new(), n, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Kernel of all generator actions on the span of candidate monomials with
/// coefficients in the transverse coordinates, computed separately per
/// xi-degree.
pub fn invariant_functions(
    d: &Distribution,
    setting: &ReductionSetting,
) -> Result<InvariantBasis> {
    let sig = d.signature();
    match setting.mode {
        ReductionMode::PointBody => {
            if sig.n != 0 {
                return Err(Error::UnsupportedSetting(format!(
                    "point-body mode requires base dimension 0, got {}",
                    sig.n
                )));
            }
        }
        ReductionMode::AdaptedChart => {
            for &c in &setting.f_coords {
                if c >= sig.n {
                    return Err(Error::UnsupportedSetting(format!(
                        "F-coordinate index {} out of range",
                        c + 1
                    )));
                }
            }
        }
    }
    let transverse = setting.transverse(sig.n);
    let max_xi = setting.max_xi_degree.unwrap_or(sig.r).min(sig.r);
    let max_base = if sig.n == 0 { 0 } else { setting.max_base_degree };
    let gens = d.all_gens();

    let mut basis: Vec<GradedFunction> = Vec::new();
    for k in 0..=max_xi {
        // Candidates of xi-degree k.
        let mut candidates: Vec<(OddMonomial, Vec<u32>)> = Vec::new();
        for m in odd_monomials_of_degree(sig.r, k) {
            for exps in transverse_monomials(sig.n, &transverse, max_base) {
                candidates.push((m, exps.clone()));
            }
        }
        if candidates.is_empty() {
            continue;
        }
        // Images under every generator, in shared output coordinates.
        let mut coord_index: BTreeMap<(OddMonomial, Vec<u32>), usize> = BTreeMap::new();
        let mut images: Vec<Vec<(usize, Rat)>> = Vec::new();
        for (m, exps) in &candidates {
            let f = GradedFunction::monomial(
                sig,
                *m,
                Poly::monomial(sig.n, exps.clone(), Rat::one()),
            );
            let mut image_entries = Vec::new();
            for (g_idx, g) in gens.iter().enumerate() {
                let img = g.apply(&f);
                for (om, p) in img.terms() {
                    for (e, c) in p.terms() {
                        let key = (*om, e.clone());
                        let next = coord_index.len();
                        let row = *coord_index.entry(key).or_insert(next);
                        image_entries.push((g_idx * 1_000_000 + row, c.clone()));
                    }
                }
            }
            images.push(image_entries);
        }
        // Re-map sparse row ids to dense rows.
        let mut row_ids: Vec<usize> = images
            .iter()
            .flat_map(|ent| ent.iter().map(|(rid, _)| *rid))
            .collect();
        row_ids.sort_unstable();
        row_ids.dedup();
        let row_of: BTreeMap<usize, usize> =
            row_ids.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut matrix = vec![vec![Rat::zero(); candidates.len()]; row_ids.len()];
        for (col, entries) in images.iter().enumerate() {
            for (rid, c) in entries {
                let row = row_of[rid];
                matrix[row][col] = &matrix[row][col] + c;
            }
        }
        let kernel = if matrix.is_empty() {
            // no constraints at this degree: every candidate is invariant
            (0..candidates.len())
                .map(|j| {
                    let mut v = vec![Rat::zero(); candidates.len()];
                    v[j] = Rat::one();
                    v
                })
                .collect()
        } else {
            rat_kernel(&matrix)
        };
        for v in kernel {
            let mut f = GradedFunction::zero(sig);
            for ((m, exps), coeff) in candidates.iter().zip(v.iter()) {
                if !coeff.is_zero() {
                    f.add_term(*m, Poly::monomial(sig.n, exps.clone(), coeff.clone()));
                }
            }
            basis.push(f);
        }
    }

    // the base cutoff truncates nothing when there are no transverse
    // coordinates to build monomials from
    let complete = transverse.is_empty() && max_xi == sig.r;
    Ok(InvariantBasis {
        basis,
        xi_cutoff: max_xi,
        base_cutoff: if transverse.is_empty() { None } else { Some(max_base) },
        complete,
    })
}

// ---------------------------------------------------------------------------
// Flat frames
// ---------------------------------------------------------------------------

fn matrix_is_zero(m: &[Vec<Poly>]) -> bool {
    m.iter().flatten().all(Poly::is_zero)
}

/// Solve for a `nabla`-flat frame of `E/B`, lifted to sections of `E` with
/// zero `B`-part in the complement frame.
///
/// Supported: zero connection matrices (the complement lifts are flat), and
/// connection matrices along the `F`-coordinates whose antiderivatives are
/// nilpotent, where a finite product of exponentials works. The candidate
/// frame is always verified symbolically; anything else fails cleanly and
/// asks for a user-supplied frame.
pub fn flat_frame_solve(t: &ClassicalTriple, f_coords: &[usize]) -> Result<Vec<Vec<Poly>>> {
    let sig = t.sig;
    let q = t.complement.len();
    let lift = |coords: &[Poly]| -> Vec<Poly> {
        let mut s = vec![Poly::zero(sig.n); sig.r];
        for (d, &gamma) in t.complement.iter().enumerate() {
            s[gamma] = coords[d].clone();
        }
        s
    };
    if q == 0 {
        return Ok(Vec::new());
    }
    if t.nabla.iter().all(|m| matrix_is_zero(m)) {
        let mut id = vec![vec![Poly::zero(sig.n); q]; q];
        for (c, row) in id.iter_mut().enumerate() {
            row[c] = Poly::one(sig.n);
        }
        return finish_frame(t, &id, lift);
    }

    // Re-express the connection along the F-coordinate directions.
    let l = t.f_fields.len();
    let f_rows: Vec<Vec<Poly>> = (0..sig.n)
        .map(|a| t.f_fields.iter().map(|f| f[a].clone()).collect())
        .collect();
    let f_mat = PolyMatrix::from_rows(sig.n, f_rows);
    let mut gamma_by_coord: Vec<Vec<Vec<Poly>>> = Vec::new();
    for &c in f_coords {
        let mut unit = vec![Poly::zero(sig.n); sig.n];
        unit[c] = Poly::one(sig.n);
        let coeffs = match f_mat.solve(&unit) {
            SolveResult::Inconsistent => {
                return Err(Error::NoFlatFrame(format!(
                    "d/dx{} is not in the span of the F generators",
                    c + 1
                )))
            }
            SolveResult::Solved(sol) => sol.as_polynomials().ok_or_else(|| {
                Error::NoFlatFrame(
                    "coordinate directions have non-polynomial coefficients in F".into(),
                )
            })?,
        };
        let mut gamma = vec![vec![Poly::zero(sig.n); q]; q];
        for g in 0..l {
            if coeffs[g].is_zero() {
                continue;
            }
            for dd in 0..q {
                for cc in 0..q {
                    gamma[dd][cc] = &gamma[dd][cc] + &(&coeffs[g] * &t.nabla[g][dd][cc]);
                }
            }
        }
        gamma_by_coord.push(gamma);
    }

    // S = prod_c exp(-P_c) with P_c the antiderivative of Gamma^(c) in x_c.
    let mut s_mat = vec![vec![Poly::zero(sig.n); q]; q];
    for (c, row) in s_mat.iter_mut().enumerate() {
        row[c] = Poly::one(sig.n);
    }
    for (idx, &c) in f_coords.iter().enumerate() {
        let gamma = &gamma_by_coord[idx];
        if matrix_is_zero(gamma) {
            continue;
        }
        let p: Vec<Vec<Poly>> = gamma
            .iter()
            .map(|row| row.iter().map(|e| e.antideriv(c)).collect())
            .collect();
        let exp = matrix_exp_neg(&p, sig.n).ok_or_else(|| {
            Error::NoFlatFrame(format!(
                "connection along x{} is not nilpotent; supply a flat frame explicitly",
                c + 1
            ))
        })?;
        s_mat = mat_mul(&exp, &s_mat, sig.n);
    }
    finish_frame(t, &s_mat, lift)
}

fn finish_frame(
    t: &ClassicalTriple,
    s_mat: &[Vec<Poly>],
    lift: impl Fn(&[Poly]) -> Vec<Poly>,
) -> Result<Vec<Vec<Poly>>> {
    let q = t.complement.len();
    let mut frame = Vec::with_capacity(q);
    for m in 0..q {
        let coords: Vec<Poly> = (0..q).map(|d| s_mat[d][m].clone()).collect();
        for g in 0..t.f_fields.len() {
            if t.nabla_apply(g, &coords).iter().any(|p| !p.is_zero()) {
                return Err(Error::NoFlatFrame(
                    "candidate frame is not flat (non-commuting connection?); \
                     supply a flat frame explicitly"
                        .into(),
                ));
            }
        }
        frame.push(lift(&coords));
    }
    Ok(frame)
}

fn mat_mul(a: &[Vec<Poly>], b: &[Vec<Poly>], n_vars: usize) -> Vec<Vec<Poly>> {
    let q = a.len();
    let mut out = vec![vec![Poly::zero(n_vars); q]; q];
    for i in 0..q {
        for j in 0..q {
            for k in 0..q {
                out[i][j] = &out[i][j] + &(&a[i][k] * &b[k][j]);
            }
        }
    }
    out
}

/// `exp(-P)` as a finite sum; `None` when `P` is not nilpotent.
fn matrix_exp_neg(p: &[Vec<Poly>], n_vars: usize) -> Option<Vec<Vec<Poly>>> {
    let q = p.len();
    let neg: Vec<Vec<Poly>> = p
        .iter()
        .map(|row| row.iter().map(|e| -e).collect())
        .collect();
    let mut out = vec![vec![Poly::zero(n_vars); q]; q];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Poly::one(n_vars);
    }
    let mut power = out.clone();
    let mut factorial = Rat::one();
    for k in 1..=q {
        power = mat_mul(&power, &neg, n_vars);
        factorial = factorial * Rat::from_integer((k as i64).into());
        if matrix_is_zero(&power) {
            return Some(out);
        }
        let inv = Rat::one() / factorial.clone();
        for i in 0..q {
            for j in 0..q {
                out[i][j] = &out[i][j] + &power[i][j].scale(&inv);
            }
        }
    }
    // power = (-P)^q; by Cayley-Hamilton a nilpotent q x q matrix satisfies
    // P^q = 0, so anything nonzero here means P is not nilpotent.
    power = mat_mul(&power, &neg, n_vars);
    if matrix_is_zero(&power) {
        Some(out)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

/// Express a graded function as a rational linear combination of candidates;
/// all functions are compared coefficientwise on their monomial support.
fn express_in_span(target: &GradedFunction, candidates: &[GradedFunction]) -> Option<Vec<Rat>> {
    let mut coord_index: BTreeMap<(OddMonomial, Vec<u32>), usize> = BTreeMap::new();
    let index_of = |m: OddMonomial, e: Vec<u32>, coord_index: &mut BTreeMap<(OddMonomial, Vec<u32>), usize>| -> usize {
        let next = coord_index.len();
        *coord_index.entry((m, e)).or_insert(next)
    };
    let mut cand_entries: Vec<Vec<(usize, Rat)>> = Vec::new();
    for cand in candidates {
        let mut entries = Vec::new();
        for (m, p) in cand.terms() {
            for (e, c) in p.terms() {
                entries.push((index_of(*m, e.clone(), &mut coord_index), c.clone()));
            }
        }
        cand_entries.push(entries);
    }
    let mut target_entries = Vec::new();
    for (m, p) in target.terms() {
        for (e, c) in p.terms() {
            target_entries.push((index_of(*m, e.clone(), &mut coord_index), c.clone()));
        }
    }
    let rows = coord_index.len();
    let mut matrix = vec![vec![Rat::zero(); candidates.len()]; rows];
    for (col, entries) in cand_entries.iter().enumerate() {
        for (row, c) in entries {
            matrix[*row][col] = &matrix[*row][col] + c;
        }
    }
    let mut rhs = vec![Rat::zero(); rows];
    for (row, c) in target_entries {
        rhs[row] = &rhs[row] + &c;
    }
    rat_solve(&matrix, &rhs)
}

/// Quotient of `(M, Q)` by an involutive `Q`-invariant distribution (or
/// singular module over a point body).
///
/// Regular outputs carry the reduced algebroid, its homological field, and
/// the embeddings of the reduced generators as invariants of the original
/// manifold. The singular point-body path reports the invariant algebra and
/// its generator degrees instead.
pub fn reduce(
    q: &VectorField,
    d: &Distribution,
    setting: &ReductionSetting,
    cfg: &SampleConfig,
) -> Result<QuotientResult> {
    let sig = d.signature();
    if q.signature() != sig {
        return Err(Error::SignatureMismatch(sig, q.signature()));
    }
    let inv_report = d.is_involutive(cfg)?;
    if !inv_report.involutive {
        return Err(Error::InvalidInput(
            "reduction requires an involutive distribution".into(),
        ));
    }
    let q_report = d.is_q_invariant(q, cfg)?;
    if !q_report.invariant {
        return Err(Error::InvalidInput(
            "reduction requires a Q-invariant distribution".into(),
        ));
    }

    match setting.mode {
        ReductionMode::PointBody => reduce_point_body(q, d, setting),
        ReductionMode::AdaptedChart => reduce_adapted_chart(q, d, setting, cfg),
    }
}

fn reduce_point_body(
    q: &VectorField,
    d: &Distribution,
    setting: &ReductionSetting,
) -> Result<QuotientResult> {
    let sig = d.signature();
    if sig.n != 0 {
        return Err(Error::UnsupportedSetting(
            "point-body mode requires base dimension 0".into(),
        ));
    }
    let invariants = invariant_functions(d, setting)?;

    // theta candidates: duals of a complement of the degree -1 span.
    let b_cols: Vec<Vec<Rat>> = d
        .gens_m1()
        .iter()
        .map(|g| {
            g.section_polys()
                .iter()
                .map(Poly::constant_term)
                .collect()
        })
        .collect();
    let mut b_rows: Vec<Vec<Rat>> = b_cols.clone();
    let pivot_frame = crate::linalg::rat_rref(&mut b_rows);
    let pivot_cols: Vec<usize> = (0..b_cols.len())
        .filter(|&j| {
            // columns of B corresponding to independent generators
            let sub: Vec<Vec<Rat>> = b_cols[..=j].to_vec();
            crate::linalg::rat_rank(&sub) > crate::linalg::rat_rank(&b_cols[..j].to_vec())
        })
        .collect();
    let complement: Vec<usize> = (0..sig.r).filter(|a| !pivot_frame.contains(a)).collect();

    let mut thetas: Vec<GradedFunction> = Vec::new();
    let k = pivot_cols.len();
    let qt = sig.r - k;
    if qt > 0 {
        // [B_pivots | complement] ^ T theta = (0, .., delta_m)
        for m in 0..qt {
            let mut rows: Vec<Vec<Rat>> = Vec::new();
            let mut rhs: Vec<Rat> = Vec::new();
            for &j in &pivot_cols {
                rows.push(b_cols[j].clone());
                rhs.push(Rat::zero());
            }
            for (c_idx, &gamma) in complement.iter().enumerate() {
                let mut row = vec![Rat::zero(); sig.r];
                row[gamma] = Rat::one();
                rows.push(row);
                rhs.push(if c_idx == m { Rat::one() } else { Rat::zero() });
            }
            let t = rat_solve(&rows, &rhs).ok_or_else(|| {
                Error::InternalConsistency("dual covector solve failed".into())
            })?;
            let mut theta = GradedFunction::zero(sig);
            for (al, c) in t.iter().enumerate() {
                if !c.is_zero() {
                    theta = &theta + &GradedFunction::odd_var(sig, al).scale(c);
                }
            }
            thetas.push(theta);
        }
    }

    // Regular iff every theta is killed by every generator.
    let regular = thetas
        .iter()
        .all(|th| d.all_gens().iter().all(|g| g.apply(th).is_zero()));

    if regular {
        let reduced_sig = Signature::new(0, qt);
        let mut theta_products: Vec<GradedFunction> = Vec::new();
        let mut product_labels: Vec<(usize, usize)> = Vec::new();
        for i in 0..qt {
            for j in (i + 1)..qt {
                theta_products.push(&thetas[i] * &thetas[j]);
                product_labels.push((i, j));
            }
        }
        let mut xi_images = Vec::with_capacity(qt);
        for th in &thetas {
            let qth = q.apply(th);
            let coeffs = if qth.is_zero() {
                vec![Rat::zero(); theta_products.len()]
            } else {
                express_in_span(&qth, &theta_products).ok_or_else(|| {
                    Error::InternalConsistency(
                        "Q(theta) is not a combination of theta products".into(),
                    )
                })?
            };
            let mut img = GradedFunction::zero(reduced_sig);
            for (c, &(i, j)) in coeffs.iter().zip(&product_labels) {
                if !c.is_zero() {
                    let wedge = &GradedFunction::odd_var(reduced_sig, i)
                        * &GradedFunction::odd_var(reduced_sig, j);
                    img = &img + &wedge.scale(c);
                }
            }
            xi_images.push(img);
        }
        let reduced_q = VectorField::from_components(reduced_sig, Vec::new(), xi_images);
        if !reduced_q.is_homological()?.is_homological() {
            return Err(Error::InternalConsistency(
                "reduced field failed [Q,Q] = 0".into(),
            ));
        }
        let reduced = extract_algebroid_raw(&reduced_q)?;
        return Ok(QuotientResult {
            reduced: Some(reduced),
            reduced_q: Some(reduced_q),
            theta_embeddings: thetas,
            base_embeddings: Vec::new(),
            generator_degrees: vec![1; qt],
            invariants,
        });
    }

    // Singular path: report the invariant algebra and its generator degrees.
    for f in &invariants.basis {
        let qf = q.apply(f);
        if !qf.is_zero() && express_in_span(&qf, &invariants.basis).is_none() {
            return Err(Error::InternalConsistency(
                "Q does not preserve the invariant algebra".into(),
            ));
        }
    }
    let generator_degrees = invariant_generator_degrees(&invariants, sig);
    Ok(QuotientResult {
        reduced: None,
        reduced_q: None,
        theta_embeddings: Vec::new(),
        base_embeddings: Vec::new(),
        generator_degrees,
        invariants,
    })
}

/// Degrees in which the invariant algebra needs new multiplicative
/// generators (constants excluded).
fn invariant_generator_degrees(invariants: &InvariantBasis, sig: Signature) -> Vec<usize> {
    let mut degrees = Vec::new();
    let mut generators: Vec<GradedFunction> = Vec::new();
    // span of products of already-chosen generators, per degree
    let mut products: Vec<Vec<GradedFunction>> = vec![Vec::new(); sig.r + 1];
    products[0].push(GradedFunction::one(sig));
    for k in 1..=sig.r {
        let inv_k: Vec<GradedFunction> = invariants
            .basis
            .iter()
            .filter(|f| f.homogeneous_degree() == Some(k) && !f.is_zero())
            .cloned()
            .collect();
        // grow the product span at degree k from lower generators
        let mut prod_k: Vec<GradedFunction> = Vec::new();
        for g in &generators {
            let dg = g.homogeneous_degree().unwrap();
            if dg <= k {
                for p in &products[k - dg] {
                    let gp = g * p;
                    if !gp.is_zero() {
                        prod_k.push(gp);
                    }
                }
            }
        }
        for f in &inv_k {
            if express_in_span(f, &prod_k).is_none() {
                degrees.push(k);
                generators.push(f.clone());
                prod_k.push(f.clone());
            }
        }
        products[k] = prod_k;
    }
    degrees
}

fn reduce_adapted_chart(
    q: &VectorField,
    d: &Distribution,
    setting: &ReductionSetting,
    cfg: &SampleConfig,
) -> Result<QuotientResult> {
    let sig = d.signature();
    let points = crate::sample::sample_points(sig.n, cfg);
    let transverse = setting.transverse(sig.n);

    // The chart must be adapted: degree 0 symbols live along the declared
    // F-coordinates, and span each of them over the function field.
    for g in d.gens_0() {
        let sym = g.symbol_polys();
        for &t in &transverse {
            if !sym[t].is_zero() {
                return Err(Error::UnsupportedSetting(format!(
                    "chart is not adapted: a degree 0 symbol has a d/dx{} component",
                    t + 1
                )));
            }
        }
    }
    let sym_mat = PolyMatrix::from_rows(sig.n, d.symbol_matrix());
    for &c in &setting.f_coords {
        let mut unit = vec![Poly::zero(sig.n); sig.n];
        unit[c] = Poly::one(sig.n);
        let ok = match sym_mat.solve(&unit) {
            SolveResult::Inconsistent => false,
            SolveResult::Solved(sol) => {
                sol.as_polynomials().is_some() || sol.denominator_nonzero_at(&points)
            }
        };
        if !ok {
            return Err(Error::UnsupportedSetting(format!(
                "declared F-coordinate x{} is not spanned by the degree 0 symbols",
                c + 1
            )));
        }
    }

    let triple = dist_to_classical(d, cfg)?;
    let flat_frame = match &setting.flat_frame {
        Some(frame) => {
            for (i, s) in frame.iter().enumerate() {
                if !triple.is_flat_section(s)? {
                    return Err(Error::NoFlatFrame(format!(
                        "supplied section {} is not nabla-flat",
                        i + 1
                    )));
                }
            }
            frame.clone()
        }
        None => flat_frame_solve(&triple, &setting.f_coords)?,
    };

    let k = triple.rank_b();
    let qt = triple.rank_quotient();

    // theta_m: duals of the flat frame inside the annihilator of B.
    let mut frame_cols: Vec<Vec<Poly>> = triple.b_columns.clone();
    frame_cols.extend(flat_frame.iter().cloned());
    let rows: Vec<Vec<Poly>> = (0..k + qt)
        .map(|j| (0..sig.r).map(|al| frame_cols[j][al].clone()).collect())
        .collect();
    let pairing = PolyMatrix::from_rows(sig.n, rows);
    let mut thetas: Vec<GradedFunction> = Vec::new();
    for m in 0..qt {
        let mut rhs = vec![Poly::zero(sig.n); k + qt];
        rhs[k + m] = Poly::one(sig.n);
        let t = match pairing.solve(&rhs) {
            SolveResult::Inconsistent => {
                return Err(Error::NotAFrame(
                    "B columns plus flat lifts do not form a frame".into(),
                ))
            }
            SolveResult::Solved(sol) => sol.as_polynomials().ok_or_else(|| {
                Error::UnsupportedSetting(
                    "dual covectors are not polynomial; choose a different frame".into(),
                )
            })?,
        };
        let mut theta = GradedFunction::zero(sig);
        for (al, c) in t.iter().enumerate() {
            if !c.is_zero() {
                theta = &theta + &GradedFunction::odd_var(sig, al).scale_poly(c);
            }
        }
        thetas.push(theta);
    }

    // Invariance of the reduced generators.
    for th in &thetas {
        for g in d.all_gens() {
            if !g.apply(th).is_zero() {
                return Err(Error::InternalConsistency(format!(
                    "theta = {} is not invariant",
                    th.render()
                )));
            }
        }
    }
    for &t in &transverse {
        let xt = GradedFunction::base_var(sig, t);
        for g in d.all_gens() {
            if !g.apply(&xt).is_zero() {
                return Err(Error::InternalConsistency(format!(
                    "transverse coordinate x{} is not invariant",
                    t + 1
                )));
            }
        }
    }

    // Reduced manifold and rewriting candidates.
    let reduced_sig = Signature::new(transverse.len(), qt);
    let cutoff = setting.max_base_degree;
    let t_monomials = transverse_monomials(sig.n, &transverse, cutoff);
    let project = |e: &Vec<u32>| -> Vec<u32> {
        transverse.iter().map(|&t| e[t]).collect()
    };

    // candidates of xi-degree 1: t-monomial * theta_m
    let mut cand1: Vec<GradedFunction> = Vec::new();
    let mut lab1: Vec<(Vec<u32>, usize)> = Vec::new();
    for e in &t_monomials {
        let p = Poly::monomial(sig.n, e.clone(), Rat::one());
        for (m, th) in thetas.iter().enumerate() {
            cand1.push(th.scale_poly(&p));
            lab1.push((e.clone(), m));
        }
    }
    // candidates of xi-degree 2: t-monomial * theta_i theta_j
    let mut cand2: Vec<GradedFunction> = Vec::new();
    let mut lab2: Vec<(Vec<u32>, usize, usize)> = Vec::new();
    for e in &t_monomials {
        let p = Poly::monomial(sig.n, e.clone(), Rat::one());
        for i in 0..qt {
            for j in (i + 1)..qt {
                cand2.push((&thetas[i] * &thetas[j]).scale_poly(&p));
                lab2.push((e.clone(), i, j));
            }
        }
    }

    // Q on the base embeddings.
    let mut x_images = Vec::with_capacity(transverse.len());
    for &t in &transverse {
        let target = q.apply(&GradedFunction::base_var(sig, t));
        let mut img = GradedFunction::zero(reduced_sig);
        if !target.is_zero() {
            let coeffs = express_in_span(&target, &cand1).ok_or_else(|| {
                Error::InternalConsistency(format!(
                    "Q(x{}) is not expressible in the reduced generators (cutoff {})",
                    t + 1,
                    cutoff
                ))
            })?;
            for (c, (e, m)) in coeffs.iter().zip(&lab1) {
                if !c.is_zero() {
                    let p = Poly::monomial(reduced_sig.n, project(e), c.clone());
                    img = &img + &GradedFunction::odd_var(reduced_sig, *m).scale_poly(&p);
                }
            }
        }
        x_images.push(img);
    }
    // Q on the thetas.
    let mut xi_images = Vec::with_capacity(qt);
    for th in &thetas {
        let target = q.apply(th);
        let mut img = GradedFunction::zero(reduced_sig);
        if !target.is_zero() {
            let coeffs = express_in_span(&target, &cand2).ok_or_else(|| {
                Error::InternalConsistency(format!(
                    "Q(theta) = {} is not expressible in the reduced generators",
                    target.render()
                ))
            })?;
            for (c, (e, i, j)) in coeffs.iter().zip(&lab2) {
                if !c.is_zero() {
                    let wedge = &GradedFunction::odd_var(reduced_sig, *i)
                        * &GradedFunction::odd_var(reduced_sig, *j);
                    let p = Poly::monomial(reduced_sig.n, project(e), c.clone());
                    img = &img + &wedge.scale_poly(&p);
                }
            }
        }
        xi_images.push(img);
    }

    let reduced_q = VectorField::from_components(reduced_sig, x_images, xi_images);
    if !reduced_q.is_homological()?.is_homological() {
        return Err(Error::InternalConsistency(
            "reduced field failed [Q,Q] = 0".into(),
        ));
    }
    let reduced = extract_algebroid_raw(&reduced_q)?;
    let invariants = invariant_functions(d, setting)?;
    let base_embeddings = transverse
        .iter()
        .map(|&t| GradedFunction::base_var(sig, t))
        .collect();
    Ok(QuotientResult {
        reduced: Some(reduced),
        reduced_q: Some(reduced_q),
        theta_embeddings: thetas,
        base_embeddings,
        generator_degrees: vec![1; qt],
        invariants,
    })
}
