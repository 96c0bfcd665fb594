//! Exact linear algebra, in two layers.
//!
//! Rational matrices (`rat_*`) handle pointwise independence checks and
//! kernel computations over monomial bases. Polynomial matrices
//! ([`PolyMatrix`]) are treated as matrices over the rational function field:
//! rank and determinants come from fraction-free Bareiss elimination (all
//! intermediate divisions are exact), and linear systems are solved by Cramer
//! expansion on a maximal pivot block, yielding a particular solution with a
//! single polynomial denominator.

use crate::poly::Poly;
use crate::scalar::Rat;
use num_traits::{One, Zero};

// ---------------------------------------------------------------------------
// Rational matrices
// ---------------------------------------------------------------------------

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rat_rref(rows: &mut [Vec<Rat>]) -> Vec<usize> {
    let m = rows.len();
    if m == 0 {
        return Vec::new();
    }
    let cols = rows[0].len();
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for j in 0..cols {
        let Some(p) = (rank..m).find(|&i| !rows[i][j].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][j].clone();
        for k in 0..cols {
            rows[rank][k] = &rows[rank][k] / &inv;
        }
        for i in 0..m {
            if i != rank && !rows[i][j].is_zero() {
                let f = rows[i][j].clone();
                for k in 0..cols {
                    let sub = &rows[rank][k] * &f;
                    rows[i][k] = &rows[i][k] - &sub;
                }
            }
        }
        pivots.push(j);
        rank += 1;
        if rank == m {
            break;
        }
    }
    pivots
}

pub fn rat_rank(rows: &[Vec<Rat>]) -> usize {
    let mut work: Vec<Vec<Rat>> = rows.to_vec();
    rat_rref(&mut work).len()
}

/// Particular solution of `A u = b` with free unknowns set to zero.
pub fn rat_solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let m = a.len();
    assert_eq!(m, b.len());
    let cols = if m == 0 { 0 } else { a[0].len() };
    let mut work: Vec<Vec<Rat>> = a
        .iter()
        .zip(b.iter())
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rat_rref(&mut work);
    if pivots.contains(&cols) {
        return None; // pivot in the augmented column
    }
    let mut u = vec![Rat::zero(); cols];
    for (i, &j) in pivots.iter().enumerate() {
        u[j] = work[i][cols].clone();
    }
    Some(u)
}

/// Basis of the kernel of `A` (vectors indexed by columns), ordered by free
/// column. Each basis vector has entry 1 in its free column.
pub fn rat_kernel(a: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let m = a.len();
    if m == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let mut work: Vec<Vec<Rat>> = a.to_vec();
    let pivots = rat_rref(&mut work);
    let mut basis = Vec::new();
    for j in 0..cols {
        if pivots.contains(&j) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[j] = Rat::one();
        for (i, &pj) in pivots.iter().enumerate() {
            v[pj] = -work[i][j].clone();
        }
        basis.push(v);
    }
    basis
}

// ---------------------------------------------------------------------------
// Polynomial matrices over the rational function field
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PolyMatrix {
    pub rows: usize,
    pub cols: usize,
    n_vars: usize,
    data: Vec<Poly>,
}

/// Outcome of a linear solve over the rational function field.
#[derive(Debug, Clone)]
pub enum SolveResult {
    /// No solution exists, even with rational-function coefficients.
    Inconsistent,
    Solved(PolySolution),
}

/// Particular solution `u_i = numerators_i / denominator` with free unknowns
/// set to zero.
#[derive(Debug, Clone)]
pub struct PolySolution {
    pub numerators: Vec<Poly>,
    pub denominator: Poly,
}

impl PolySolution {
    /// The solution as honest polynomials, when the denominator divides
    /// every numerator.
    pub fn as_polynomials(&self) -> Option<Vec<Poly>> {
        self.numerators
            .iter()
            .map(|n| n.div_exact(&self.denominator))
            .collect()
    }

    pub fn denominator_nonzero_at(&self, points: &[Vec<Rat>]) -> bool {
        points.iter().all(|p| !self.denominator.eval(p).is_zero())
    }
}

impl PolyMatrix {
    pub fn from_rows(n_vars: usize, rows: Vec<Vec<Poly>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged matrix");
            for p in row {
                assert_eq!(p.n_vars(), n_vars);
                data.push(p);
            }
        }
        PolyMatrix {
            rows: nrows,
            cols: ncols,
            n_vars,
            data,
        }
    }

    pub fn zero(n_vars: usize, rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            n_vars,
            data: vec![Poly::zero(n_vars); rows * cols],
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &Poly {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.data[i * self.cols + j] = p;
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Evaluate every entry at a point.
    pub fn eval(&self, point: &[Rat]) -> Vec<Vec<Rat>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j).eval(point)).collect())
            .collect()
    }

    /// Fraction-free forward elimination. Returns (pivot (row, col) list,
    /// echelon matrix, sign of the row permutation).
    fn bareiss(&self) -> (Vec<(usize, usize)>, PolyMatrix, i8) {
        let mut m = self.clone();
        let mut prev = Poly::one(self.n_vars);
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut sign = 1i8;
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&i| !m.at(i, col).is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..m.cols {
                    let a = m.at(row, j).clone();
                    let b = m.at(p, j).clone();
                    m.set(row, j, b);
                    m.set(p, j, a);
                }
                sign = -sign;
            }
            let pivot = m.at(row, col).clone();
            for i in (row + 1)..m.rows {
                let head = m.at(i, col).clone();
                for j in 0..m.cols {
                    let num = &(&pivot * m.at(i, j)) - &(&head * m.at(row, j));
                    let q = num
                        .div_exact(&prev)
                        .expect("Bareiss division is exact by construction");
                    m.set(i, j, q);
                }
            }
            prev = pivot;
            pivots.push((row, col));
            row += 1;
        }
        (pivots, m, sign)
    }

    /// Rank over the rational function field.
    pub fn rank(&self) -> usize {
        self.bareiss().0.len()
    }

    /// Determinant of a square matrix.
    pub fn determinant(&self) -> Poly {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        if self.rows == 0 {
            return Poly::one(self.n_vars);
        }
        let (pivots, m, sign) = self.bareiss();
        if pivots.len() < self.rows {
            return Poly::zero(self.n_vars);
        }
        let last = m.at(self.rows - 1, self.cols - 1).clone();
        if sign < 0 {
            -&last
        } else {
            last
        }
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        let data = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| self.at(i, j).clone()))
            .collect();
        PolyMatrix {
            rows: rows.len(),
            cols: cols.len(),
            n_vars: self.n_vars,
            data,
        }
    }

    /// Solve `A u = b` over the rational function field. Free unknowns are
    /// set to zero; the pivot block is solved by Cramer expansion, so the
    /// denominator is the pivot-block determinant.
    pub fn solve(&self, rhs: &[Poly]) -> SolveResult {
        assert_eq!(rhs.len(), self.rows);
        // Consistency: rank must not grow when the right-hand side is
        // adjoined.
        let mut aug_rows: Vec<Vec<Poly>> = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row: Vec<Poly> = (0..self.cols).map(|j| self.at(i, j).clone()).collect();
            row.push(rhs[i].clone());
            aug_rows.push(row);
        }
        let aug = PolyMatrix::from_rows(self.n_vars, aug_rows);
        let (pivots, _, _) = self.bareiss();
        if aug.rank() > pivots.len() {
            return SolveResult::Inconsistent;
        }
        let pivot_rows: Vec<usize> = bareiss_pivot_rows(self, &pivots);
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let block = self.submatrix(&pivot_rows, &pivot_cols);
        let den = block.determinant();
        debug_assert!(!den.is_zero());
        let rhs_block: Vec<Poly> = pivot_rows.iter().map(|&i| rhs[i].clone()).collect();
        let mut numerators = vec![Poly::zero(self.n_vars); self.cols];
        for (k, &col) in pivot_cols.iter().enumerate() {
            let mut replaced = block.clone();
            for (i, value) in rhs_block.iter().enumerate() {
                replaced.set(i, k, value.clone());
            }
            numerators[col] = replaced.determinant();
        }
        SolveResult::Solved(PolySolution {
            numerators,
            denominator: den,
        })
    }
}

/// Row indices (in the original matrix) of the pivot block found by Bareiss.
/// Forward elimination only swaps rows at or below the current one, so the
/// pivot submatrix can be recovered by re-running the column selection on
/// rational rank checks; instead we simply select, for each pivot column in
/// order, the first original row that extends the previous rows to a larger
/// rank.
fn bareiss_pivot_rows(m: &PolyMatrix, pivots: &[(usize, usize)]) -> Vec<usize> {
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut chosen: Vec<usize> = Vec::new();
    for k in 0..pivot_cols.len() {
        let cols = &pivot_cols[..=k];
        for row in 0..m.rows {
            if chosen.contains(&row) {
                continue;
            }
            let mut rows = chosen.clone();
            rows.push(row);
            let sub = m.submatrix(&rows, cols);
            if sub.rank() == rows.len() {
                chosen.push(row);
                break;
            }
        }
    }
    assert_eq!(chosen.len(), pivot_cols.len());
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};

    #[test]
    fn rat_rank_and_kernel() {
        let a = vec![
            vec![rat(1), rat(2), rat(3)],
            vec![rat(2), rat(4), rat(6)],
            vec![rat(0), rat(1), rat(1)],
        ];
        assert_eq!(rat_rank(&a), 2);
        let ker = rat_kernel(&a);
        assert_eq!(ker.len(), 1);
        for row in &a {
            let dot: Rat = row.iter().zip(&ker[0]).map(|(x, y)| x * y).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn rat_solve_consistency() {
        let a = vec![vec![rat(1), rat(1)], vec![rat(1), rat(-1)]];
        let u = rat_solve(&a, &[rat(3), rat(1)]).unwrap();
        assert_eq!(u, vec![rat(2), rat(1)]);
        let b = vec![vec![rat(1), rat(1)], vec![rat(2), rat(2)]];
        assert!(rat_solve(&b, &[rat(1), rat(3)]).is_none());
    }

    fn x(i: usize) -> Poly {
        Poly::var(2, i)
    }

    #[test]
    fn poly_rank_and_determinant() {
        // [[x1, 1], [x1^2, x1]] has rank 1
        let m = PolyMatrix::from_rows(
            2,
            vec![
                vec![x(0), Poly::one(2)],
                vec![x(0).pow(2), x(0)],
            ],
        );
        assert_eq!(m.rank(), 1);
        assert!(m.determinant().is_zero());

        let m2 = PolyMatrix::from_rows(
            2,
            vec![
                vec![x(0), Poly::one(2)],
                vec![Poly::one(2), x(1)],
            ],
        );
        assert_eq!(m2.rank(), 2);
        assert_eq!(m2.determinant(), &(&x(0) * &x(1)) - &Poly::one(2));
    }

    #[test]
    fn poly_solve_polynomial_solution() {
        // [[1, x1], [0, 1]] u = [x1 x2 + 1, x2]  =>  u = (1, x2)
        let m = PolyMatrix::from_rows(
            2,
            vec![
                vec![Poly::one(2), x(0)],
                vec![Poly::zero(2), Poly::one(2)],
            ],
        );
        let rhs = vec![&(&x(0) * &x(1)) + &Poly::one(2), x(1)];
        match m.solve(&rhs) {
            SolveResult::Solved(sol) => {
                let u = sol.as_polynomials().unwrap();
                assert_eq!(u, vec![Poly::one(2), x(1)]);
            }
            SolveResult::Inconsistent => panic!("expected a solution"),
        }
    }

    #[test]
    fn poly_solve_rational_solution() {
        // x1 * u = 1 has only the rational solution 1/x1
        let m = PolyMatrix::from_rows(2, vec![vec![x(0)]]);
        match m.solve(&[Poly::one(2)]) {
            SolveResult::Solved(sol) => {
                assert!(sol.as_polynomials().is_none());
                assert!(sol.denominator_nonzero_at(&[vec![rat(2), rat(0)]]));
                assert!(!sol.denominator_nonzero_at(&[vec![rat(0), rat(5)]]));
            }
            SolveResult::Inconsistent => panic!("expected a rational solution"),
        }
    }

    #[test]
    fn poly_solve_inconsistent() {
        // u = 0 and u = 1 simultaneously
        let m = PolyMatrix::from_rows(2, vec![vec![x(0)], vec![x(0)]]);
        let rhs = vec![Poly::zero(2), Poly::one(2)];
        assert!(matches!(m.solve(&rhs), SolveResult::Inconsistent));
    }

    #[test]
    fn poly_solve_underdetermined() {
        // u1 + u2 = x1: particular solution with u2 free -> u = (x1, 0)
        let m = PolyMatrix::from_rows(2, vec![vec![Poly::one(2), Poly::one(2)]]);
        match m.solve(&[x(0)]) {
            SolveResult::Solved(sol) => {
                let u = sol.as_polynomials().unwrap();
                assert_eq!(u, vec![x(0), Poly::zero(2)]);
            }
            SolveResult::Inconsistent => panic!(),
        }
    }

    #[test]
    fn cramer_matches_elimination_scale() {
        let m = PolyMatrix::from_rows(
            2,
            vec![
                vec![x(0), x(1)],
                vec![x(1), Poly::one(2)],
            ],
        );
        let rhs = vec![&x(0) - &x(1).pow(2).scale(&ratio(1, 1)), Poly::zero(2)];
        match m.solve(&rhs) {
            SolveResult::Solved(sol) => {
                // verify A * num = den * rhs
                for i in 0..2 {
                    let lhs = &(m.at(i, 0) * &sol.numerators[0])
                        + &(m.at(i, 1) * &sol.numerators[1]);
                    let want = &sol.denominator * &rhs[i];
                    assert_eq!(lhs, want);
                }
            }
            SolveResult::Inconsistent => panic!(),
        }
    }
}
