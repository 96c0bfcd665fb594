//! Property tests for the exact-algebra invariants: canonical forms,
//! graded identities, the derived-bracket Leibniz rule, and bit-exact
//! parser round-trips.

use nq1::algebroid::{anchor_apply, derived_bracket, extract_algebroid_raw};
use nq1::catalog;
use nq1::distribution::taylor_expand_degree1;
use nq1::dsl::{parse_graded_function, parse_vector_field};
use nq1::graded::{GradedFunction, OddMonomial, Signature};
use nq1::poly::Poly;
use nq1::scalar::{ratio, Rat};
use nq1::vector_field::VectorField;
use proptest::prelude::*;

const N: usize = 2;
const R: usize = 3;

fn sig() -> Signature {
    Signature::new(N, R)
}

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=3).prop_map(|(n, d)| ratio(n, d))
}

fn arb_poly() -> impl Strategy<Value = Poly> {
    proptest::collection::vec(
        (proptest::collection::vec(0u32..=2, N), arb_rat()),
        0..=3,
    )
    .prop_map(|terms| {
        let mut p = Poly::zero(N);
        for (exps, c) in terms {
            p.add_term(exps, c);
        }
        p
    })
}

fn arb_graded() -> impl Strategy<Value = GradedFunction> {
    proptest::collection::vec((0u64..(1 << R), arb_poly()), 0..=4).prop_map(|terms| {
        let mut f = GradedFunction::zero(sig());
        for (mask, p) in terms {
            let indices: Vec<usize> = (0..R).filter(|i| mask & (1 << i) != 0).collect();
            let (m, _) = OddMonomial::from_indices(&indices).unwrap();
            f.add_term(m, p);
        }
        f
    })
}

fn arb_graded_homogeneous(k: usize) -> impl Strategy<Value = GradedFunction> {
    proptest::collection::vec(arb_poly(), nq1::graded::odd_monomials_of_degree(R, k).len())
        .prop_map(move |polys| {
            let mut f = GradedFunction::zero(sig());
            for (m, p) in nq1::graded::odd_monomials_of_degree(R, k)
                .into_iter()
                .zip(polys)
            {
                f.add_term(m, p);
            }
            f
        })
}

fn arb_field_of_degree(d: i64) -> BoxedStrategy<VectorField> {
    let x_part = if d >= 0 {
        proptest::collection::vec(arb_graded_homogeneous(d as usize), N).boxed()
    } else {
        Just(vec![GradedFunction::zero(sig()); N]).boxed()
    };
    let xi_deg = d + 1;
    let xi_part = if (0..=(R as i64)).contains(&xi_deg) {
        proptest::collection::vec(arb_graded_homogeneous(xi_deg as usize), R).boxed()
    } else {
        Just(vec![GradedFunction::zero(sig()); R]).boxed()
    };
    (x_part, xi_part)
        .prop_map(|(x, xi)| VectorField::from_components(sig(), x, xi))
        .boxed()
}

fn arb_homogeneous_field() -> impl Strategy<Value = (i64, VectorField)> {
    (-1i64..=2).prop_flat_map(|d| arb_field_of_degree(d).prop_map(move |v| (d, v)))
}

proptest! {
    // canonical form: adding and removing the same thing is the identity,
    // and equality is structural
    #[test]
    fn normal_form_uniqueness(f in arb_graded(), g in arb_graded()) {
        let sum = &(&f + &g) - &g;
        prop_assert_eq!(&sum, &f);
        prop_assert_eq!(sum.render(), f.render());
    }

    #[test]
    fn graded_commutativity(
        (df, f) in (0usize..=R).prop_flat_map(|d| arb_graded_homogeneous(d).prop_map(move |f| (d, f))),
        (dg, g) in (0usize..=R).prop_flat_map(|d| arb_graded_homogeneous(d).prop_map(move |g| (d, g))),
    ) {
        let fg = &f * &g;
        let gf = &g * &f;
        if (df * dg) % 2 == 0 {
            prop_assert_eq!(fg, gf);
        } else {
            prop_assert_eq!(fg, -&gf);
        }
    }

    #[test]
    fn mul_is_associative_and_distributive(f in arb_graded(), g in arb_graded(), h in arb_graded()) {
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
    }

    #[test]
    fn eval_base_is_a_homomorphism(f in arb_graded(), g in arb_graded(), px in arb_rat(), py in arb_rat()) {
        let p = [px, py];
        prop_assert_eq!(
            (&f * &g).eval_base(&p),
            &f.eval_base(&p) * &g.eval_base(&p)
        );
    }

    #[test]
    fn commutator_is_the_operator_commutator(
        (dx, x) in arb_homogeneous_field(),
        (dy, y) in arb_homogeneous_field(),
        f in arb_graded(),
    ) {
        let lhs = x.commutator(&y).apply(&f);
        let fwd = x.apply(&y.apply(&f));
        let bwd = y.apply(&x.apply(&f));
        let rhs = if (dx * dy).rem_euclid(2) == 1 { &fwd + &bwd } else { &fwd - &bwd };
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn field_rebuilds_from_generator_images((_, x) in arb_homogeneous_field()) {
        let rebuilt = VectorField::from_components(
            sig(),
            (0..N).map(|i| x.apply(&GradedFunction::base_var(sig(), i))).collect(),
            (0..R).map(|a| x.apply(&GradedFunction::odd_var(sig(), a))).collect(),
        );
        prop_assert_eq!(rebuilt, x);
    }

    // raw extraction inverts building for arbitrary (not necessarily
    // homological) degree 1 data
    #[test]
    fn algebroid_extraction_round_trips(
        c_polys in proptest::collection::vec(arb_poly(), 3 * 3),
        rho_polys in proptest::collection::vec(arb_poly(), 3 * N),
    ) {
        let mut a = nq1::algebroid::LieAlgebroidData::new(sig());
        let mut it = c_polys.into_iter();
        for i in 0..R {
            for j in (i + 1)..R {
                for k in 0..R {
                    if (i + j + k) % 2 == 0 {
                        if let Some(p) = it.next() {
                            a.set_c(i, j, k, p);
                        }
                    }
                }
            }
        }
        let mut it = rho_polys.into_iter();
        for i in 0..R {
            for al in 0..N {
                if let Some(p) = it.next() {
                    a.set_rho(i, al, p);
                }
            }
        }
        prop_assert_eq!(extract_algebroid_raw(&a.build_q()).unwrap(), a);
    }

    // Leibniz rule of the derived bracket over function coefficients
    #[test]
    fn derived_bracket_leibniz(
        a_polys in proptest::collection::vec(arb_poly(), R),
        b_polys in proptest::collection::vec(arb_poly(), R),
        f in arb_poly(),
    ) {
        let q = catalog::tangent(N).build_q();
        let tangent_sig = Signature::new(N, N);
        let a = VectorField::from_section(tangent_sig, &a_polys[..N]);
        let b = VectorField::from_section(tangent_sig, &b_polys[..N]);
        let f_fun = GradedFunction::from_poly(tangent_sig, f);
        let fb = b.module_mul(&f_fun);
        let lhs = derived_bracket(&q, &a, &fb).unwrap();
        let first = derived_bracket(&q, &a, &b).unwrap().module_mul(&f_fun);
        let anchor_f = anchor_apply(&q, &a, &f_fun).unwrap();
        let rhs = &first + &b.module_mul(&anchor_f);
        prop_assert_eq!(lhs, rhs);
    }

    // Taylor reassembly is the identity on random degree 1 fields (the
    // function asserts reassembly internally)
    #[test]
    fn taylor_reassembles(p in arb_field_of_degree(1)) {
        let frame: Vec<Vec<Poly>> = (0..R)
            .map(|c| (0..R).map(|al| if al == c { Poly::one(N) } else { Poly::zero(N) }).collect())
            .collect();
        prop_assert!(taylor_expand_degree1(&p, &frame).is_ok());
    }

    // canonical renderings round-trip bit-exactly through the parser
    #[test]
    fn graded_render_parse_round_trip(f in arb_graded()) {
        let rendered = f.render();
        let parsed = parse_graded_function(&rendered, sig()).unwrap();
        prop_assert_eq!(&parsed, &f);
        prop_assert_eq!(parsed.render(), rendered);
    }

    #[test]
    fn field_render_parse_round_trip((_, x) in arb_homogeneous_field()) {
        let rendered = x.render();
        let parsed = parse_vector_field(&rendered, sig()).unwrap();
        prop_assert_eq!(&parsed, &x);
        prop_assert_eq!(parsed.render(), rendered);
    }
}
