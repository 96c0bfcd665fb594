//! Ready-made standard instances: small Lie algebras, tangent algebroids,
//! and their homological vector fields. Handy as fixtures and as starting
//! points for experiments.

use crate::algebroid::LieAlgebroidData;
use crate::graded::{GradedFunction, Signature};
use crate::poly::Poly;
use crate::vector_field::VectorField;

/// su(2) over a point: `[e1,e2] = e3, [e2,e3] = e1, [e3,e1] = e2`.
pub fn su2() -> LieAlgebroidData {
    let sig = Signature::new(0, 3);
    let mut a = LieAlgebroidData::new(sig);
    a.set_c(0, 1, 2, Poly::one(0));
    a.set_c(1, 2, 0, Poly::one(0));
    a.set_c(2, 0, 1, Poly::one(0));
    a
}

/// The abelian Lie algebra of rank `r` over a point.
pub fn abelian(r: usize) -> LieAlgebroidData {
    LieAlgebroidData::new(Signature::new(0, r))
}

/// The Heisenberg algebra `[e1, e2] = e3` over a point.
pub fn heisenberg() -> LieAlgebroidData {
    let sig = Signature::new(0, 3);
    let mut a = LieAlgebroidData::new(sig);
    a.set_c(0, 1, 2, Poly::one(0));
    a
}

/// Tangent algebroid of `R^n`: zero bracket constants, identity anchor.
pub fn tangent(n: usize) -> LieAlgebroidData {
    let sig = Signature::new(n, n);
    let mut a = LieAlgebroidData::new(sig);
    for i in 0..n {
        a.set_rho(i, i, Poly::one(n));
    }
    a
}

/// The de Rham field `sum_i xi_i d/dx_i` on `T[1]R^n`.
pub fn derham(n: usize) -> VectorField {
    tangent(n).build_q()
}

/// `mu(e_0') = x1 d/dx3 - d/dx2 + xi1 d/dxi3` from the non-involutive
/// action example on `T[1]R^3`.
pub fn mu_e0_prime() -> VectorField {
    let sig = Signature::new(3, 3);
    let w = &VectorField::d_dxi(sig, 2).module_mul(&GradedFunction::base_var(sig, 0))
        - &VectorField::d_dxi(sig, 1);
    derham(3).commutator(&w)
}
