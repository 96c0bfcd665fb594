//! Command dispatch: one entry point per CLI subcommand, all reading a
//! parsed [`Document`] and returning a [`Report`].
//!
//! Exit-code contract: a returned report with status `fail` means a
//! mathematical check failed (exit 1); an `Err` is an input or usage
//! problem (exit 2).

use crate::algebroid::extract_algebroid_raw;
use crate::distribution::{dist_to_classical, Certification, Distribution};
use crate::dsl::{render_algebroid, ActionData, Document};
use crate::error::{Error, Result};
use crate::graded::Signature;
use crate::imfoliation::IMFoliation;
use crate::lie2::{
    action_check_constraints, action_closure_check, action_distribution, action_image_span,
    Lie2Action, StrictLie2Algebra,
};
use crate::reduction::{reduce, QuotientResult, ReductionSetting};
use crate::report::Report;
use crate::sample::SampleConfig;
use crate::scalar::render_rat;
use crate::vector_field::{HomologicalCheck, VectorField};
use serde_json::json;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub samples: usize,
    pub seed: u64,
    pub max_xi_degree: Option<usize>,
    pub max_base_degree: Option<usize>,
    /// Select a named block when a document has several.
    pub name: Option<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            samples: 8,
            seed: 0,
            max_xi_degree: None,
            max_base_degree: None,
            name: None,
        }
    }
}

impl RunOptions {
    fn sample_config(&self) -> SampleConfig {
        SampleConfig {
            seed: self.seed,
            count: self.samples,
        }
    }
}

pub const COMMANDS: &[&str] = &[
    "check-q",
    "build-q",
    "extract-algebroid",
    "analyze-distribution",
    "check-imfoliation",
    "check-action",
    "reduce",
];

pub fn run_command(command: &str, doc: &Document, opts: &RunOptions) -> Result<Report> {
    match command {
        "check-q" => check_q(doc),
        "build-q" => build_q(doc),
        "extract-algebroid" => extract_algebroid_cmd(doc),
        "analyze-distribution" => analyze_distribution(doc, opts),
        "check-imfoliation" => check_imfoliation(doc, opts),
        "check-action" => check_action(doc, opts),
        "reduce" => reduce_cmd(doc, opts),
        other => Err(Error::InvalidInput(format!(
            "unknown command '{}'; known commands: {}",
            other,
            COMMANDS.join(", ")
        ))),
    }
}

fn homological_item(report: &mut Report, q: &VectorField) -> Result<bool> {
    match q.is_homological()? {
        HomologicalCheck::Homological => {
            report.push_pass("q-homological");
            Ok(true)
        }
        HomologicalCheck::Failed {
            generator,
            coefficient,
        } => {
            report.push_fail(
                "q-homological",
                Some(format!("[Q,Q] has coefficient {} on {}", coefficient.render(), generator)),
            );
            Ok(false)
        }
    }
}

fn check_q(doc: &Document) -> Result<Report> {
    let mut report = Report::new("check-q");
    let q = doc.resolve_q()?;
    let homological = homological_item(&mut report, &q)?;
    if let Some(a) = &doc.algebroid {
        let axioms = a.verify_algebroid_axioms();
        for c in &axioms.checks {
            report.push(format!("axiom:{}", c.axiom), c.passed(), c.witness.clone());
        }
        // the two verification routes must agree on the built field (the
        // document's q_field, if explicit, may be a different object)
        let built_homological = if doc.q_field.is_some() {
            a.build_q().is_homological()?.is_homological()
        } else {
            homological
        };
        let agree = axioms.passes() == built_homological;
        report.push(
            "oracle-agreement",
            agree,
            Some("derived-bracket route and section-bracket route disagree".into()).filter(|_| !agree),
        );
        report.set_output(json!({
            "q": q.render(),
            "axioms": serde_json::to_value(&axioms.checks).expect("axiom checks serialize"),
        }));
        return Ok(report);
    }
    report.set_output(json!({ "q": q.render() }));
    Ok(report)
}

fn build_q(doc: &Document) -> Result<Report> {
    let mut report = Report::new("build-q");
    let a = doc
        .algebroid
        .as_ref()
        .ok_or_else(|| Error::UnresolvedReference("build-q needs an algebroid block".into()))?;
    let q = a.build_q();
    report.push_pass("built");
    let sig = a.signature();
    report.set_output(json!({
        "manifold": format!("manifold {{ base = {}; rank = {} }}", sig.n, sig.r),
        "q_field": format!("q_field {{ q = {} }}", q.render()),
        "q": q.render(),
    }));
    Ok(report)
}

fn extract_algebroid_cmd(doc: &Document) -> Result<Report> {
    let mut report = Report::new("extract-algebroid");
    let q = doc.resolve_q()?;
    if !homological_item(&mut report, &q)? {
        return Ok(report);
    }
    let a = extract_algebroid_raw(&q)?;
    let round_trip = a.build_q() == q;
    report.push(
        "round-trip",
        round_trip,
        Some("rebuilt field differs from input".into()).filter(|_| !round_trip),
    );
    report.set_output(json!({ "algebroid": render_algebroid(&a) }));
    Ok(report)
}

fn select_distribution(doc: &Document, opts: &RunOptions) -> Result<Distribution> {
    let sig = doc.require_signature()?;
    let entry = match &opts.name {
        Some(name) => doc
            .distributions
            .iter()
            .find(|d| d.name.as_deref() == Some(name.as_str()))
            .ok_or_else(|| {
                Error::UnresolvedReference(format!("no distribution named '{}'", name))
            })?,
        None => doc.distributions.first().ok_or_else(|| {
            Error::UnresolvedReference("document has no distribution block".into())
        })?,
    };
    Distribution::from_generators(sig, entry.generators.clone())
}

fn certification_item(report: &mut Report, d: &Distribution, cfg: &SampleConfig) -> bool {
    let validation = d.validate(cfg);
    match &validation.certification {
        Certification::Certified => {
            report.push_pass("certified-distribution");
            true
        }
        Certification::ModuleOnly {
            failing_point,
            detail,
        } => {
            let at = failing_point
                .as_ref()
                .map(|p| {
                    format!(
                        " at point ({})",
                        p.iter().map(render_rat).collect::<Vec<_>>().join(", ")
                    )
                })
                .unwrap_or_default();
            report.push_fail(
                "certified-distribution",
                Some(format!("module-only: {}{}", detail, at)),
            );
            false
        }
    }
}

fn triple_json(t: &crate::distribution::ClassicalTriple) -> serde_json::Value {
    let section = |col: &Vec<crate::poly::Poly>| -> String {
        crate::vector_field::VectorField::from_section(t.sig, col).render()
    };
    let base = |f: &Vec<crate::poly::Poly>| -> String {
        crate::vector_field::VectorField::from_base_field(t.sig, f).render()
    };
    json!({
        "B": t.b_columns.iter().map(section).collect::<Vec<_>>(),
        "F": t.f_fields.iter().map(base).collect::<Vec<_>>(),
        "complement_frame": t.complement.iter().map(|c| c + 1).collect::<Vec<_>>(),
        "nabla": t
            .nabla
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| row.iter().map(|p| p.render()).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>(),
    })
}

fn analyze_distribution(doc: &Document, opts: &RunOptions) -> Result<Report> {
    let mut report = Report::new("analyze-distribution");
    let cfg = opts.sample_config();
    let d = select_distribution(doc, opts)?;
    let certified = certification_item(&mut report, &d, &cfg);

    let inv = d.is_involutive(&cfg)?;
    report.push(
        "involutive",
        inv.involutive,
        inv.failure.as_ref().map(|f| {
            format!(
                "[{}, {}] = {} is not a member",
                f.left.render(),
                f.right.render(),
                f.bracket.render()
            )
        }),
    );

    let mut q_invariant = None;
    let mut q_witness = None;
    if let Ok(q) = doc.resolve_q() {
        let qi = d.is_q_invariant(&q, &cfg)?;
        report.push(
            "q-invariant",
            qi.invariant,
            qi.failure.as_ref().map(|(g, br)| {
                format!("[Q, {}] = {} is not a member", g.render(), br.render())
            }),
        );
        q_invariant = Some(qi.invariant);
        q_witness = qi.failure;
    }

    let mut output = json!({
        "certified": certified,
        "involutive": inv.involutive,
        "q_invariant": q_invariant,
        "witnesses": {},
    });
    if let Some(f) = &inv.failure {
        output["witnesses"]["involutivity"] = json!({
            "left": f.left.render(),
            "right": f.right.render(),
            "bracket": f.bracket.render(),
        });
    }
    if let Some((g, br)) = &q_witness {
        output["witnesses"]["q_invariance"] = json!({
            "generator": g.render(),
            "bracket": br.render(),
        });
    }
    if certified && inv.involutive {
        let triple = dist_to_classical(&d, &cfg)?;
        output["triple"] = triple_json(&triple);
    }
    report.set_output(output);
    Ok(report)
}

fn build_imfoliation(doc: &Document, opts: &RunOptions) -> Result<IMFoliation> {
    let a = doc.algebroid.clone().ok_or_else(|| {
        Error::UnresolvedReference("check-imfoliation needs an algebroid block".into())
    })?;
    let data = match &opts.name {
        Some(name) => doc
            .imfoliations
            .iter()
            .find(|i| i.name.as_deref() == Some(name.as_str()))
            .ok_or_else(|| {
                Error::UnresolvedReference(format!("no imfoliation named '{}'", name))
            })?,
        None => doc.imfoliations.first().ok_or_else(|| {
            Error::UnresolvedReference("document has no imfoliation block".into())
        })?,
    };
    // assemble nabla matrices over the computed complement
    let k = data.b_sections.len();
    let q = a.signature().r - k;
    let n_gens = data.f_fields.len();
    let mut nabla = vec![vec![vec![crate::poly::Poly::zero(a.signature().n); q]; q]; n_gens];
    for ((g, i, j), p) in &data.nabla {
        if *g >= n_gens || *i >= q || *j >= q {
            return Err(Error::Dimension(format!(
                "nabla[{}][{},{}] is out of range for {} F-generators and quotient rank {}",
                g + 1,
                i + 1,
                j + 1,
                n_gens,
                q
            )));
        }
        nabla[*g][*i][*j] = p.clone();
    }
    IMFoliation::from_data(
        a,
        data.b_sections.clone(),
        data.f_fields.clone(),
        Some(nabla),
        data.flat_frame.clone(),
    )
}

fn check_imfoliation(doc: &Document, opts: &RunOptions) -> Result<Report> {
    let mut report = Report::new("check-imfoliation");
    let cfg = opts.sample_config();
    let imf = build_imfoliation(doc, opts)?;
    let axioms = imf.check_axioms(&cfg)?;
    for c in &axioms.checks {
        report.push(c.axiom.clone(), c.passed(), c.witness.clone());
    }
    report.set_output(json!({
        "axioms": serde_json::to_value(&axioms.checks).expect("axiom checks serialize"),
    }));
    Ok(report)
}

fn build_action(sig: Signature, l: &StrictLie2Algebra, data: &ActionData) -> Result<Lie2Action> {
    let mut mu0 = vec![VectorField::zero(sig); l.dim0()];
    for (i, v) in &data.mu0 {
        if *i >= l.dim0() {
            return Err(Error::Dimension(format!(
                "mu[e{}] exceeds dim0 = {}",
                i + 1,
                l.dim0()
            )));
        }
        mu0[*i] = v.clone();
    }
    let mut mu_m1 = vec![VectorField::zero(sig); l.dim_m1()];
    for (j, v) in &data.mu_m1 {
        if *j >= l.dim_m1() {
            return Err(Error::Dimension(format!(
                "mu[w{}] exceeds dim_minus1 = {}",
                j + 1,
                l.dim_m1()
            )));
        }
        mu_m1[*j] = v.clone();
    }
    let mut action = Lie2Action::new(sig, l, mu0, mu_m1)?;
    for ((i, j), v) in &data.eta {
        if *i >= l.dim0() || *j >= l.dim0() {
            return Err(Error::Dimension("eta index exceeds dim0".into()));
        }
        action.set_eta(*i, *j, v.clone())?;
    }
    Ok(action)
}

fn check_action(doc: &Document, opts: &RunOptions) -> Result<Report> {
    let mut report = Report::new("check-action");
    let cfg = opts.sample_config();
    let sig = doc.require_signature()?;
    let l = doc.lie2.clone().ok_or_else(|| {
        Error::UnresolvedReference("check-action needs a lie2algebra block".into())
    })?;
    let data = doc
        .action
        .as_ref()
        .ok_or_else(|| Error::UnresolvedReference("check-action needs an action block".into()))?;
    let q = doc.resolve_q()?;
    let action = build_action(sig, &l, data)?;

    for c in &l.verify().checks {
        report.push(format!("dgla:{}", c.axiom), c.passed(), c.witness.clone());
    }
    for c in &action_check_constraints(&l, &action, &q)?.checks {
        report.push(c.axiom.clone(), c.passed(), c.witness.clone());
    }

    let closure = action_closure_check(&action, &q, &cfg)?;
    report.push(
        "closure",
        closure.closed,
        closure.witness.as_ref().map(|(x0, xm, br)| {
            format!(
                "[{}, {}] = {} is not a member",
                x0.render(),
                xm.render(),
                br.render()
            )
        }),
    );
    if let Some(qi) = &closure.q_invariance {
        report.push("q-invariant", qi.invariant, None);
    }
    if let Some(iv) = &closure.involutivity {
        report.push("involutive", iv.involutive, None);
    }

    let image = action_image_span(&action)?;
    let image_validation = image.validate(&cfg);
    let (_, validation) = action_distribution(&action, &q, &cfg)?;
    let mut output = json!({
        "image_span_certified": image_validation.certification.is_certified(),
        "completed_certified": validation.certification.is_certified(),
    });
    if let Some((x0, xm, br)) = &closure.witness {
        output["closure_witness"] = json!({
            "left": x0.render(),
            "right": xm.render(),
            "bracket": br.render(),
        });
    }
    report.set_output(output);
    Ok(report)
}

fn resolve_setting(doc: &Document, d: &Distribution, opts: &RunOptions) -> Result<ReductionSetting> {
    let mut setting = match doc.settings.mode.as_deref() {
        Some("point-body") => ReductionSetting::point_body(),
        Some("adapted-chart") => {
            let f_coords = doc.settings.f_coords.clone().unwrap_or_default();
            if f_coords.is_empty() && d.signature().n > 0 {
                // fall back to inference when no coordinates were declared
                ReductionSetting::infer(d, &opts.sample_config())?
            } else {
                ReductionSetting::adapted_chart(f_coords)
            }
        }
        Some(other) => {
            return Err(Error::UnsupportedSetting(format!(
                "unknown mode '{}'; use \"point-body\" or \"adapted-chart\"",
                other
            )))
        }
        None => ReductionSetting::infer(d, &opts.sample_config())?,
    };
    setting.flat_frame = doc.settings.flat_frame.clone();
    setting.max_xi_degree = opts.max_xi_degree.or(doc.settings.max_xi_degree);
    if let Some(b) = opts.max_base_degree.or(doc.settings.max_base_degree) {
        setting.max_base_degree = b;
    }
    Ok(setting)
}

fn quotient_output(out: &QuotientResult, sig_reduced: Option<Signature>) -> serde_json::Value {
    let mut o = json!({
        "singular": out.reduced.is_none(),
        "generator_degrees": out.generator_degrees,
        "theta_embeddings": out
            .theta_embeddings
            .iter()
            .map(|f| f.render())
            .collect::<Vec<_>>(),
        "base_embeddings": out
            .base_embeddings
            .iter()
            .map(|f| f.render())
            .collect::<Vec<_>>(),
        "invariants": {
            "basis": out.invariants.basis.iter().map(|f| f.render()).collect::<Vec<_>>(),
            "xi_cutoff": out.invariants.xi_cutoff,
            "base_cutoff": out.invariants.base_cutoff,
            "complete": out.invariants.complete,
        },
    });
    if let (Some(a), Some(q)) = (&out.reduced, &out.reduced_q) {
        let sig = sig_reduced.unwrap_or(a.signature());
        o["reduced"] = json!({
            "manifold": format!("manifold {{ base = {}; rank = {} }}", sig.n, sig.r),
            "algebroid": render_algebroid(a),
            "q": q.render(),
        });
    }
    o
}

fn reduce_cmd(doc: &Document, opts: &RunOptions) -> Result<Report> {
    let mut report = Report::new("reduce");
    let cfg = opts.sample_config();
    let q = doc.resolve_q()?;
    if !homological_item(&mut report, &q)? {
        return Ok(report);
    }

    // the distribution to reduce by: an explicit block, or the completed
    // action distribution
    let d = if !doc.distributions.is_empty() {
        select_distribution(doc, opts)?
    } else if let (Some(l), Some(data)) = (&doc.lie2, &doc.action) {
        let sig = doc.require_signature()?;
        let action = build_action(sig, l, data)?;
        let (d, _) = action_distribution(&action, &q, &cfg)?;
        d
    } else {
        return Err(Error::UnresolvedReference(
            "reduce needs a distribution block or an action".into(),
        ));
    };

    let inv = d.is_involutive(&cfg)?;
    report.push(
        "involutive",
        inv.involutive,
        inv.failure.as_ref().map(|f| {
            format!(
                "[{}, {}] = {} is not a member",
                f.left.render(),
                f.right.render(),
                f.bracket.render()
            )
        }),
    );
    let qi = d.is_q_invariant(&q, &cfg)?;
    report.push(
        "q-invariant",
        qi.invariant,
        qi.failure
            .as_ref()
            .map(|(g, br)| format!("[Q, {}] = {} is not a member", g.render(), br.render())),
    );
    if !report.passed() {
        return Ok(report);
    }

    let setting = resolve_setting(doc, &d, opts)?;
    let out = reduce(&q, &d, &setting, &cfg)?;
    if let Some(rq) = &out.reduced_q {
        report.push(
            "reduced-q-homological",
            rq.is_homological()?.is_homological(),
            None,
        );
    }
    let reduced_sig = out.reduced.as_ref().map(|a| a.signature());
    report.set_output(quotient_output(&out, reduced_sig));
    Ok(report)
}
