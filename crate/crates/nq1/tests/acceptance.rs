//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use nq1::algebroid::{extract_algebroid, LieAlgebroidData};
use nq1::catalog;
use nq1::distribution::{Certification, Distribution};
use nq1::graded::{GradedFunction, Signature};
use nq1::imfoliation::{distribution_from_imf, imf_from_distribution, IMFoliation};
use nq1::lie2::{
    action_check_constraints, action_closure_check, action_distribution, action_image_span,
    Lie2Action, StrictLie2Algebra,
};
use nq1::poly::Poly;
use nq1::reduction::{invariant_functions, reduce, ReductionSetting};
use nq1::sample::SampleConfig;
use nq1::scalar::{rat, ratio, Rat};
use nq1::vector_field::VectorField;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn cfg() -> SampleConfig {
    SampleConfig::default()
}

fn report(criterion: &str, start: Instant, budget_ms: u128) {
    let elapsed = start.elapsed().as_millis();
    println!("criterion {}: pass ({} ms)", criterion, elapsed);
    assert!(
        elapsed <= budget_ms,
        "criterion {} exceeded its {} ms budget: {} ms",
        criterion,
        budget_ms,
        elapsed
    );
}

fn unit_section(sig: Signature, i: usize) -> Vec<Poly> {
    let mut s = vec![Poly::zero(sig.n); sig.r];
    s[i] = Poly::one(sig.n);
    s
}

/// Criterion 1: su(2) round-trip, exactly the printed coordinate form,
/// homological, and recovered exactly.
#[test]
fn criterion_1_su2_round_trip() {
    let start = Instant::now();
    let sig = Signature::new(0, 3);
    let xi = |a: usize| GradedFunction::odd_var(sig, a);
    let a = catalog::su2();
    let q = a.build_q();
    // Q = xi2 xi1 d/dxi3 + xi1 xi3 d/dxi2 + xi3 xi2 d/dxi1
    assert_eq!(*q.xi_image(2), &xi(1) * &xi(0));
    assert_eq!(*q.xi_image(1), &xi(0) * &xi(2));
    assert_eq!(*q.xi_image(0), &xi(2) * &xi(1));
    assert!(q.commutator(&q).is_zero());
    assert!(q.is_homological().unwrap().is_homological());
    assert_eq!(extract_algebroid(&q).unwrap(), a);
    report("1 (su(2) round-trip)", start, 1000);
}

/// Criterion 2: su(2) invariants of the singular module are exactly
/// {1, xi2 xi3}, the reduced differential vanishes, and validation says
/// module-only.
#[test]
fn criterion_2_su2_invariants() {
    let start = Instant::now();
    let sig = Signature::new(0, 3);
    let q = catalog::su2().build_q();
    let a1 = VectorField::d_dxi(sig, 0);
    let d = Distribution::from_generators(sig, vec![a1.clone(), q.commutator(&a1)]).unwrap();

    let inv = invariant_functions(&d, &ReductionSetting::point_body()).unwrap();
    let expected = vec![
        GradedFunction::one(sig),
        &GradedFunction::odd_var(sig, 1) * &GradedFunction::odd_var(sig, 2),
    ];
    assert_eq!(inv.basis, expected);

    for f in &inv.basis {
        assert!(q.apply(f).is_zero(), "Q must vanish on the invariants");
    }

    match d.validate(&cfg()).certification {
        Certification::ModuleOnly { .. } => {}
        Certification::Certified => panic!("expected module-only"),
    }

    let out = reduce(&q, &d, &ReductionSetting::point_body(), &cfg()).unwrap();
    assert!(out.reduced.is_none());
    assert_eq!(out.generator_degrees, vec![2]);
    report("2 (su(2) invariants)", start, 1000);
}

fn notinv_action() -> (StrictLie2Algebra, Lie2Action, VectorField) {
    let sig = Signature::new(3, 3);
    let q = catalog::derham(3);
    let l = StrictLie2Algebra::new(0, 2);
    let mu0 = vec![VectorField::d_dx(sig, 0), catalog::mu_e0_prime()];
    let mut action = Lie2Action::new(sig, &l, mu0, vec![]).unwrap();
    action.set_eta(0, 1, -&VectorField::d_dxi(sig, 2)).unwrap();
    (l, action, q)
}

/// Criterion 3: the full pipeline on the abelian R^2 action over T[1]R^3.
#[test]
fn criterion_3_notinv_pipeline() {
    let start = Instant::now();
    let (l, action, q) = notinv_action();

    let constraints = action_check_constraints(&l, &action, &q).unwrap();
    assert!(constraints.passes(), "{:?}", constraints);

    let image = action_image_span(&action).unwrap();
    let inv = image.is_involutive(&cfg()).unwrap();
    assert!(!inv.involutive);
    assert!(inv.failure.is_some(), "needs a witness");
    let qi = image.is_q_invariant(&q, &cfg()).unwrap();
    assert!(!qi.invariant);
    assert!(qi.failure.is_some(), "needs a witness");

    let (d, validation) = action_distribution(&action, &q, &cfg()).unwrap();
    assert!(validation.certification.is_certified());
    assert!(d.is_involutive(&cfg()).unwrap().involutive);
    assert!(d.is_q_invariant(&q, &cfg()).unwrap().invariant);

    let setting = ReductionSetting::adapted_chart(vec![0, 1, 2]);
    let out = reduce(&q, &d, &setting, &cfg()).unwrap();
    let reduced = out.reduced.unwrap();
    assert_eq!(reduced.signature(), Signature::new(0, 2));
    assert_eq!(reduced, catalog::abelian(2));
    assert!(out.reduced_q.unwrap().is_zero());
    report("3 (non-involutive image pipeline)", start, 5000);
}

/// Criterion 4: the counterexample action where the completed module fails
/// closure, with the witness -d/dxi3.
#[test]
fn criterion_4_notin_counterexample() {
    let start = Instant::now();
    let sig = Signature::new(3, 3);
    let q = catalog::derham(3);
    let mut l = StrictLie2Algebra::new(1, 2);
    l.set_delta(0, 0, rat(1));
    let xbar = VectorField::d_dxi(sig, 0);
    let ybar = &VectorField::d_dxi(sig, 2).module_mul(&GradedFunction::from_poly(
        sig,
        Poly::var(3, 0).pow(2).scale(&ratio(1, 2)),
    )) - &VectorField::d_dxi(sig, 1).module_mul(&GradedFunction::base_var(sig, 0));
    let mu0 = vec![q.commutator(&xbar), q.commutator(&ybar)];
    let mut action = Lie2Action::new(sig, &l, mu0, vec![xbar]).unwrap();
    let xy = &VectorField::d_dxi(sig, 2).module_mul(&GradedFunction::base_var(sig, 0))
        - &VectorField::d_dxi(sig, 1);
    action.set_eta(0, 1, -&xy).unwrap();

    let constraints = action_check_constraints(&l, &action, &q).unwrap();
    assert!(constraints.passes(), "{:?}", constraints);

    let closure = action_closure_check(&action, &q, &cfg()).unwrap();
    assert!(!closure.closed);
    let (_, _, bracket) = closure.witness.unwrap();
    // -(the degree -1 image of [X,[X,Y]] = d/dx3)
    assert_eq!(bracket, -&VectorField::d_dxi(sig, 2));

    let (d, _) = action_distribution(&action, &q, &cfg()).unwrap();
    let membership = d.membership(&bracket, &cfg()).unwrap();
    assert!(!membership.member);
    report("4 (non-closed action counterexample)", start, 5000);
}

/// Criterion 5: the bijection with IM-foliations, instance-checked on
/// corpus cases.
#[test]
fn criterion_5_bijection_instances() {
    let start = Instant::now();
    let mut cases: Vec<IMFoliation> = Vec::new();

    // tangent algebroid of R^3 with the e3-line, full base foliation
    let sig33 = Signature::new(3, 3);
    let coord_fields: Vec<Vec<Poly>> = (0..3)
        .map(|c| {
            (0..3)
                .map(|a| if a == c { Poly::one(3) } else { Poly::zero(3) })
                .collect()
        })
        .collect();
    cases.push(
        IMFoliation::from_data(
            catalog::tangent(3),
            vec![unit_section(sig33, 2)],
            coord_fields.clone(),
            None,
            None,
        )
        .unwrap(),
    );
    // su(2) with B = 0
    cases.push(IMFoliation::from_data(catalog::su2(), vec![], vec![], None, None).unwrap());
    // su(2) with B = g
    let sig03 = Signature::new(0, 3);
    cases.push(
        IMFoliation::from_data(
            catalog::su2(),
            (0..3).map(|i| unit_section(sig03, i)).collect(),
            vec![],
            None,
            None,
        )
        .unwrap(),
    );
    // Heisenberg with the central ideal
    cases.push(
        IMFoliation::from_data(
            catalog::heisenberg(),
            vec![unit_section(sig03, 2)],
            vec![],
            None,
            None,
        )
        .unwrap(),
    );
    // abelian R^2 with a line
    let sig02 = Signature::new(0, 2);
    cases.push(
        IMFoliation::from_data(
            catalog::abelian(2),
            vec![unit_section(sig02, 0)],
            vec![],
            None,
            None,
        )
        .unwrap(),
    );
    assert!(cases.len() >= 4);

    for (idx, imf) in cases.iter().enumerate() {
        let axioms = imf.check_axioms(&cfg()).unwrap();
        assert!(axioms.passes(), "case {} fails axioms: {:?}", idx, axioms);

        let cert = distribution_from_imf(imf, &cfg()).unwrap();
        assert!(cert.involutive.involutive, "case {}", idx);
        assert!(cert.q_invariant.invariant, "case {}", idx);

        // round trip through the distribution side
        let q = imf.algebroid.build_q();
        let (imf2, report2) = imf_from_distribution(&cert.distribution, &q, &cfg()).unwrap();
        assert!(report2.passes(), "case {}", idx);
        let cert2 = distribution_from_imf(&imf2, &cfg()).unwrap();
        assert!(
            cert.distribution
                .module_equal(&cert2.distribution, &cfg())
                .unwrap(),
            "case {} round trip is not module-equal",
            idx
        );
    }
    report("5 (IM-foliation bijection instances)", start, 10_000);
}

// ---------------------------------------------------------------------------
// Random instance generators
// ---------------------------------------------------------------------------

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_deg: u32) -> Poly {
    let mut p = Poly::zero(n);
    let terms = rng.gen_range(1..=2);
    for _ in 0..terms {
        let mut exps = vec![0u32; n];
        let mut left = max_deg;
        for e in exps.iter_mut() {
            *e = rng.gen_range(0..=left);
            left -= *e;
        }
        p.add_term(exps, rat(rng.gen_range(-3i64..=3)));
    }
    p
}

fn random_algebroid(rng: &mut ChaCha8Rng, n: usize, r: usize) -> LieAlgebroidData {
    let sig = Signature::new(n, r);
    let mut a = LieAlgebroidData::new(sig);
    for i in 0..r {
        for j in (i + 1)..r {
            for k in 0..r {
                if rng.gen_bool(0.7) {
                    a.set_c(i, j, k, random_poly(rng, n, 2));
                }
            }
        }
    }
    for i in 0..r {
        for al in 0..n {
            if rng.gen_bool(0.4) {
                a.set_rho(i, al, random_poly(rng, n, 2));
            }
        }
    }
    a
}

/// A unimodular change of frame applied to constant structure tensors.
fn change_basis(a: &LieAlgebroidData, t: &[Vec<Rat>], t_inv: &[Vec<Rat>]) -> LieAlgebroidData {
    let sig = a.signature();
    let r = sig.r;
    let mut out = LieAlgebroidData::new(sig);
    for i in 0..r {
        for j in (i + 1)..r {
            for k in 0..r {
                let mut total = Poly::zero(sig.n);
                for ai in 0..r {
                    for bj in 0..r {
                        for ck in 0..r {
                            let coeff = &(&t[ai][i] * &t[bj][j]) * &t_inv[k][ck];
                            if coeff.is_zero() {
                                continue;
                            }
                            total = &total + &a.c(ai, bj, ck).scale(&coeff);
                        }
                    }
                }
                out.set_c(i, j, k, total);
            }
        }
    }
    out
}

fn random_unimodular(rng: &mut ChaCha8Rng, r: usize) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>) {
    // upper triangular, +-1 diagonal: exactly invertible
    let mut t = vec![vec![Rat::zero(); r]; r];
    for i in 0..r {
        t[i][i] = if rng.gen_bool(0.5) { rat(1) } else { rat(-1) };
        for j in (i + 1)..r {
            t[i][j] = rat(rng.gen_range(-2i64..=2));
        }
    }
    // invert by back substitution on columns
    let mut inv = vec![vec![Rat::zero(); r]; r];
    for col in 0..r {
        let mut x = vec![Rat::zero(); r];
        for i in (0..r).rev() {
            let mut acc = if i == col { Rat::one() } else { Rat::zero() };
            for j in (i + 1)..r {
                acc -= &t[i][j] * &x[j];
            }
            x[i] = acc / &t[i][i];
        }
        for i in 0..r {
            inv[i][col] = x[i].clone();
        }
    }
    (t, inv)
}

/// Criterion 6: two independent verification routes agree on >= 200 random
/// instances.
#[test]
fn criterion_6_oracle_agreement() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut total = 0usize;
    let mut homological_count = 0usize;

    let mut check = |a: &LieAlgebroidData| {
        let via_q = a.build_q().is_homological().unwrap().is_homological();
        let via_axioms = a.verify_algebroid_axioms().passes();
        assert_eq!(
            via_q, via_axioms,
            "verification routes disagree on {:?}",
            a
        );
        total += 1;
        if via_q {
            homological_count += 1;
        }
    };

    // raw random data (mostly fails the axioms)
    for _ in 0..120 {
        let n = rng.gen_range(0..=3);
        let r = rng.gen_range(2..=3);
        let a = random_algebroid(&mut rng, n, r);
        check(&a);
    }
    // known-good families in random frames (always passes)
    for _ in 0..60 {
        let base = match rng.gen_range(0..3) {
            0 => catalog::su2(),
            1 => catalog::heisenberg(),
            _ => catalog::abelian(3),
        };
        let (t, t_inv) = random_unimodular(&mut rng, 3);
        check(&change_basis(&base, &t, &t_inv));
    }
    // anchored rank-1 data (Leibniz exercises the anchor)
    for _ in 0..20 {
        let sig = Signature::new(1, 1);
        let mut a = LieAlgebroidData::new(sig);
        a.set_rho(0, 0, random_poly(&mut rng, 1, 2));
        check(&a);
    }

    assert!(total >= 200);
    assert!(homological_count >= 60, "want a good mix of positives");
    assert!(
        total - homological_count >= 60,
        "want a good mix of negatives"
    );
    println!(
        "criterion 6: {} instances, {} homological, 100% agreement",
        total, homological_count
    );
    report("6 (oracle agreement)", start, 60_000);
}

fn random_graded(rng: &mut ChaCha8Rng, sig: Signature, xi_deg: usize) -> GradedFunction {
    let mut f = GradedFunction::zero(sig);
    let monomials = nq1::graded::odd_monomials_of_degree(sig.r, xi_deg);
    for m in monomials {
        if rng.gen_bool(0.5) {
            f.add_term(m, random_poly(rng, sig.n, 2));
        }
    }
    f
}

fn random_homogeneous_field(rng: &mut ChaCha8Rng, sig: Signature, degree: i64) -> VectorField {
    let mut x_images = Vec::with_capacity(sig.n);
    for _ in 0..sig.n {
        x_images.push(if degree >= 0 {
            random_graded(rng, sig, degree as usize)
        } else {
            GradedFunction::zero(sig)
        });
    }
    let mut xi_images = Vec::with_capacity(sig.r);
    for _ in 0..sig.r {
        let d = degree + 1;
        xi_images.push(if (0..=(sig.r as i64)).contains(&d) {
            random_graded(rng, sig, d as usize)
        } else {
            GradedFunction::zero(sig)
        });
    }
    VectorField::from_components(sig, x_images, xi_images)
}

/// Criterion 7: the exact algebra property suite, >= 500 instances each.
#[test]
fn criterion_7_property_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sig = Signature::new(2, 3);

    // graded commutativity: fg = (-1)^{|f||g|} gf
    for _ in 0..500 {
        let df = rng.gen_range(0..=3);
        let dg = rng.gen_range(0..=3);
        let f = random_graded(&mut rng, sig, df);
        let g = random_graded(&mut rng, sig, dg);
        let fg = &f * &g;
        let gf = &g * &f;
        if (df * dg) % 2 == 0 {
            assert_eq!(fg, gf);
        } else {
            assert_eq!(fg, -&gf);
        }
    }

    // associativity and distributivity
    for _ in 0..500 {
        let (df, dg, dh) = (
            rng.gen_range(0..=2),
            rng.gen_range(0..=2),
            rng.gen_range(0..=2),
        );
        let f = random_graded(&mut rng, sig, df);
        let g = random_graded(&mut rng, sig, dg);
        let h = random_graded(&mut rng, sig, dh);
        assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
    }

    // graded Leibniz for vector fields
    for _ in 0..500 {
        let dx = rng.gen_range(-1..=2);
        let x = random_homogeneous_field(&mut rng, sig, dx);
        let df = rng.gen_range(0..=2);
        let f = random_graded(&mut rng, sig, df);
        let dg = rng.gen_range(0..=2);
        let g = random_graded(&mut rng, sig, dg);
        let lhs = x.apply(&(&f * &g));
        let mut rhs = &x.apply(&f) * &g;
        let sign = (dx * df as i64).rem_euclid(2) == 1;
        let second = &f * &x.apply(&g);
        rhs = if sign { &rhs - &second } else { &rhs + &second };
        assert_eq!(lhs, rhs);
    }

    // graded antisymmetry and Jacobi for the commutator
    for _ in 0..500 {
        let da = rng.gen_range(-1..=2);
        let db = rng.gen_range(-1..=2);
        let dc = rng.gen_range(-1..=2);
        let a = random_homogeneous_field(&mut rng, sig, da);
        let b = random_homogeneous_field(&mut rng, sig, db);
        let c = random_homogeneous_field(&mut rng, sig, dc);
        let sign_ab = (da * db).rem_euclid(2) == 1;
        let ab = a.commutator(&b);
        let ba = b.commutator(&a);
        assert_eq!(ab, if sign_ab { ba } else { -&ba });

        let lhs = a.commutator(&b.commutator(&c));
        let mut rhs = a.commutator(&b).commutator(&c);
        let second = b.commutator(&a.commutator(&c));
        rhs = if sign_ab { &rhs - &second } else { &rhs + &second };
        assert_eq!(lhs, rhs);
    }

    // d_Q^2 = 0 for homological Q
    let su2_q = catalog::su2().build_q();
    let derham_q = catalog::derham(2);
    for i in 0..500 {
        let (q, qsig) = if i % 2 == 0 {
            (&su2_q, Signature::new(0, 3))
        } else {
            (&derham_q, Signature::new(2, 2))
        };
        let dx = rng.gen_range(-1..=1);
        let x = random_homogeneous_field(&mut rng, qsig, dx);
        assert!(q.commutator(&q.commutator(&x)).is_zero());
    }

    report("7 (algebra property suite)", start, 60_000);
}

/// Criterion 8: quotient structure constants match an independent
/// brute-force computation on >= 50 (algebra, ideal) pairs.
#[test]
fn criterion_8_quotient_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut count = 0usize;

    // independent quotient: same greedy complement, classes reduced by
    // rational elimination
    fn brute_force_quotient(
        a: &LieAlgebroidData,
        ideal: &[Vec<Rat>],
    ) -> Option<LieAlgebroidData> {
        let r = a.signature().r;
        let k = ideal.len();
        let mut rows: Vec<Vec<Rat>> = ideal.to_vec();
        let pivots = nq1::linalg::rat_rref(&mut rows);
        if pivots.len() < k {
            return None;
        }
        let complement: Vec<usize> = (0..r).filter(|i| !pivots.contains(i)).collect();
        let qd = complement.len();
        // express a vector in ideal + complement coordinates
        let solve = |v: &[Rat]| -> Vec<Rat> {
            let mut mat: Vec<Vec<Rat>> = Vec::new();
            for row in 0..r {
                let mut line: Vec<Rat> = ideal.iter().map(|col| col[row].clone()).collect();
                for &c in &complement {
                    line.push(if c == row { Rat::one() } else { Rat::zero() });
                }
                mat.push(line);
            }
            let u = nq1::linalg::rat_solve(&mat, v).expect("ideal + complement spans");
            u[k..].to_vec()
        };
        let mut out = LieAlgebroidData::new(Signature::new(0, qd));
        for (ia, &ga) in complement.iter().enumerate() {
            for (ib, &gb) in complement.iter().enumerate().skip(ia + 1) {
                let mut v = vec![Rat::zero(); r];
                for (m, vm) in v.iter_mut().enumerate() {
                    *vm = a.c(ga, gb, m).constant_term();
                }
                let w = solve(&v);
                for (ic, wc) in w.iter().enumerate() {
                    if !wc.is_zero() {
                        out.set_c(ia, ib, ic, Poly::constant(0, wc.clone()));
                    }
                }
            }
        }
        Some(out)
    }

    let mut run_case = |a: &LieAlgebroidData, ideal_cols: Vec<Vec<Rat>>| {
        let sig = a.signature();
        let q = a.build_q();
        let gens: Vec<VectorField> = ideal_cols
            .iter()
            .map(|col| {
                let polys: Vec<Poly> = col.iter().map(|c| Poly::constant(0, c.clone())).collect();
                VectorField::from_section(sig, &polys)
            })
            .collect();
        let d = Distribution::from_generators(sig, gens).unwrap();
        let out = reduce(&q, &d, &ReductionSetting::point_body(), &cfg()).unwrap();
        let reduced = out.reduced.expect("regular quotient");
        let oracle = brute_force_quotient(a, &ideal_cols).expect("independent ideal basis");
        assert_eq!(reduced, oracle, "quotient mismatch");
        count += 1;
    };

    // su(2) with B in {0, g}, random frames
    for _ in 0..10 {
        let (t, t_inv) = random_unimodular(&mut rng, 3);
        let a = change_basis(&catalog::su2(), &t, &t_inv);
        run_case(&a, vec![]);
        let full: Vec<Vec<Rat>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        run_case(&a, full);
    }
    // Heisenberg in random frames with the (transformed) center and planes
    for _ in 0..10 {
        let (t, t_inv) = random_unimodular(&mut rng, 3);
        let a = change_basis(&catalog::heisenberg(), &t, &t_inv);
        // center e3 in the new frame: coordinates T^{-1} e3
        let center: Vec<Rat> = (0..3).map(|i| t_inv[i][2].clone()).collect();
        run_case(&a, vec![center.clone()]);
        // a plane containing the center
        let second: Vec<Rat> = (0..3).map(|i| t_inv[i][1].clone()).collect();
        run_case(&a, vec![center, second]);
    }
    // su(2) (+) R with the abelian factor as the ideal: nonzero quotient
    // constants together with a nonzero ideal
    for _ in 0..8 {
        let sig4 = Signature::new(0, 4);
        let mut su2_plus_line = LieAlgebroidData::new(sig4);
        su2_plus_line.set_c(0, 1, 2, Poly::one(0));
        su2_plus_line.set_c(1, 2, 0, Poly::one(0));
        su2_plus_line.set_c(2, 0, 1, Poly::one(0));
        let (t, t_inv) = random_unimodular(&mut rng, 4);
        let a = change_basis(&su2_plus_line, &t, &t_inv);
        let line: Vec<Rat> = (0..4).map(|i| t_inv[i][3].clone()).collect();
        run_case(&a, vec![line]);
    }
    // abelian with random subspaces
    for _ in 0..10 {
        let r = rng.gen_range(2..=4);
        let a = catalog::abelian(r);
        let k = rng.gen_range(0..=r);
        let mut cols = Vec::new();
        for _ in 0..k {
            cols.push((0..r).map(|_| rat(rng.gen_range(-2i64..=2))).collect());
        }
        // drop dependent columns
        let mut rows: Vec<Vec<Rat>> = cols.clone();
        let pivots = nq1::linalg::rat_rref(&mut rows);
        let cols: Vec<Vec<Rat>> = pivots
            .iter()
            .enumerate()
            .filter_map(|(idx, _)| cols.get(idx).cloned())
            .collect();
        // keep only an independent prefix
        let mut independent: Vec<Vec<Rat>> = Vec::new();
        for c in cols {
            let mut trial = independent.clone();
            trial.push(c.clone());
            if nq1::linalg::rat_rank(&trial) == trial.len() {
                independent.push(c);
            }
        }
        run_case(&a, independent);
    }

    assert!(count >= 50, "only {} quotient cases ran", count);
    println!("criterion 8: {} quotient cases agree with the oracle", count);
    report("8 (quotient oracle)", start, 30_000);
}
