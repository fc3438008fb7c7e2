//! Exact linear programming over the rationals.
//!
//! Two-phase tableau simplex with Bland's rule, for problems in standard
//! form `min c·x` subject to `A x = b`, `x ≥ 0`. Every pivot is exact, so
//! there are no tolerances; Bland's rule rules out cycling.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    /// Constraint rows, each of length `c.len()`.
    pub a: Vec<Vec<BigRational>>,
    pub b: Vec<BigRational>,
    /// Objective to minimise.
    pub c: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: BigRational, x: Vec<BigRational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(a: Vec<Vec<BigRational>>, b: Vec<BigRational>, c: Vec<BigRational>) -> Result<Self> {
        Error::check_dim(a.len(), b.len())?;
        if let Some(row) = a.iter().find(|row| row.len() != c.len()) {
            return Err(Error::DimensionMismatch { expected: c.len(), found: row.len() });
        }
        Ok(LinearProgram { a, b, c })
    }

    pub fn variables(&self) -> usize {
        self.c.len()
    }

    pub fn constraints(&self) -> usize {
        self.b.len()
    }

    /// Whether `x` satisfies `A x = b`, `x ≥ 0`.
    pub fn is_feasible(&self, x: &[BigRational]) -> bool {
        x.len() == self.variables()
            && x.iter().all(|v| !v.is_negative())
            && self.a.iter().zip(&self.b).all(|(row, rhs)| dot(row, x) == *rhs)
    }

    pub fn objective(&self, x: &[BigRational]) -> BigRational {
        dot(&self.c, x)
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        Tableau::new(self).run()
    }
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).filter(|(p, q)| !p.is_zero() && !q.is_zero()).map(|(p, q)| p * q).sum()
}

struct Tableau {
    /// `m` rows of `cols + 1` entries, last entry the right-hand side.
    rows: Vec<Vec<BigRational>>,
    /// Reduced-cost row, last entry minus the current objective.
    cost: Vec<BigRational>,
    basis: Vec<usize>,
    structural: usize,
    cols: usize,
    objective: Vec<BigRational>,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.constraints();
        let structural = lp.variables();
        let cols = structural + m;
        let mut rows = Vec::with_capacity(m);
        for (i, (row, rhs)) in lp.a.iter().zip(&lp.b).enumerate() {
            let flip = rhs.is_negative();
            let mut r: Vec<BigRational> = row.iter().map(|v| if flip { -v } else { v.clone() }).collect();
            r.extend((0..m).map(|j| if i == j { BigRational::from_integer(1.into()) } else { BigRational::zero() }));
            r.push(if flip { -rhs } else { rhs.clone() });
            rows.push(r);
        }
        // phase one: minimise the sum of artificials
        let mut cost = vec![BigRational::zero(); cols + 1];
        for r in &rows {
            for (c, v) in cost.iter_mut().zip(r).take(structural) {
                *c -= v;
            }
            cost[cols] -= &r[cols];
        }
        Tableau { rows, cost, basis: (structural..cols).collect(), structural, cols, objective: lp.c.clone() }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[row].clone();
        let eliminate = |target: &mut Vec<BigRational>| {
            let f = target[col].clone();
            if f.is_zero() {
                return;
            }
            for (t, s) in target.iter_mut().zip(&pivot_row) {
                if !s.is_zero() {
                    *t -= &f * s;
                }
            }
        };
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i != row {
                eliminate(r);
            }
        }
        eliminate(&mut self.cost);
        self.basis[row] = col;
    }

    /// Runs simplex iterations over columns `< limit`. Returns false when
    /// unbounded.
    fn iterate(&mut self, limit: usize) -> bool {
        loop {
            let Some(col) = (0..limit).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, BigRational)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                if !r[col].is_positive() {
                    continue;
                }
                let ratio = &r[self.cols] / &r[col];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    fn run(mut self) -> Result<LpOutcome> {
        let cols = self.cols;
        if !self.iterate(self.structural) {
            return Err(Error::Internal("phase one of the simplex cannot be unbounded".into()));
        }
        if !self.cost[cols].is_zero() {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis; rows where that is
        // impossible are redundant and dropped.
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.structural {
                match (0..self.structural).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        // phase two: reduced costs of the real objective in the current basis
        let mut cost: Vec<BigRational> = self.objective.clone();
        cost.resize(cols + 1, BigRational::zero());
        for (r, &bv) in self.rows.iter().zip(&self.basis) {
            let cb = self.objective[bv].clone();
            if cb.is_zero() {
                continue;
            }
            for (c, v) in cost.iter_mut().zip(r) {
                if !v.is_zero() {
                    *c -= &cb * v;
                }
            }
        }
        self.cost = cost;
        if !self.iterate(self.structural) {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![BigRational::zero(); self.structural];
        for (r, &bv) in self.rows.iter().zip(&self.basis) {
            x[bv] = r[cols].clone();
        }
        let value = dot(&self.objective, &x);
        Ok(LpOutcome::Optimal { value, x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(v: i64) -> BigRational {
        rat(v, 1)
    }

    fn rows(a: &[&[i64]]) -> Vec<Vec<BigRational>> {
        a.iter().map(|row| row.iter().map(|&v| r(v)).collect()).collect()
    }

    #[test]
    fn small_program() {
        // min -x - y  s.t. x + s1 = 2, y + s2 = 3, x + y + s3 = 4
        let lp = LinearProgram::new(
            rows(&[&[1, 0, 1, 0, 0], &[0, 1, 0, 1, 0], &[1, 1, 0, 0, 1]]),
            vec![r(2), r(3), r(4)],
            vec![r(-1), r(-1), r(0), r(0), r(0)],
        )
        .unwrap();
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, r(-4));
                assert!(lp.is_feasible(&x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram::new(rows(&[&[1, 1], &[1, 1]]), vec![r(1), r(2)], vec![r(0), r(0)]).unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);
        let lp = LinearProgram::new(rows(&[&[1, -1]]), vec![r(1)], vec![r(0), r(-1)]).unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let lp = LinearProgram::new(
            rows(&[&[1, 1, 0], &[1, 1, 0], &[-1, 0, -1]]),
            vec![r(1), r(1), r(-1)],
            vec![r(1), r(2), r(3)],
        )
        .unwrap();
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, r(1));
                assert_eq!(x, vec![r(1), r(0), r(0)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let q = |a, b| rat(a, b);
        let lp = LinearProgram::new(
            vec![
                vec![q(1, 4), q(-8, 1), q(-1, 1), q(9, 1), q(1, 1), q(0, 1), q(0, 1)],
                vec![q(1, 2), q(-12, 1), q(-1, 2), q(3, 1), q(0, 1), q(1, 1), q(0, 1)],
                vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(1, 1)],
            ],
            vec![q(0, 1), q(0, 1), q(1, 1)],
            vec![q(-3, 4), q(20, 1), q(-1, 2), q(6, 1), q(0, 1), q(0, 1), q(0, 1)],
        )
        .unwrap();
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(-5, 4)),
            other => panic!("{other:?}"),
        }
    }

    /// Vertex enumeration: every choice of `m` columns whose submatrix is
    /// invertible and gives a nonnegative solution.
    fn brute_force(lp: &LinearProgram) -> Option<BigRational> {
        let (m, nv) = (lp.constraints(), lp.variables());
        let mut best: Option<BigRational> = None;
        for mask in 0u32..1 << nv {
            if mask.count_ones() as usize != m {
                continue;
            }
            let cols: Vec<usize> = (0..nv).filter(|&j| mask >> j & 1 == 1).collect();
            let mut aug: Vec<Vec<BigRational>> = (0..m)
                .map(|i| cols.iter().map(|&j| lp.a[i][j].clone()).chain([lp.b[i].clone()]).collect())
                .collect();
            let mut ok = true;
            for c in 0..m {
                let Some(p) = (c..m).find(|&i| !aug[i][c].is_zero()) else {
                    ok = false;
                    break;
                };
                aug.swap(c, p);
                let pv = aug[c][c].clone();
                for v in aug[c].iter_mut() {
                    *v /= &pv;
                }
                for i in 0..m {
                    if i != c {
                        let f = aug[i][c].clone();
                        for j in 0..=m {
                            let s = &f * &aug[c][j];
                            aug[i][j] -= s;
                        }
                    }
                }
            }
            if !ok || aug.iter().any(|row| row[m].is_negative()) {
                continue;
            }
            let mut x = vec![BigRational::zero(); nv];
            for (i, &j) in cols.iter().enumerate() {
                x[j] = aug[i][m].clone();
            }
            let v = lp.objective(&x);
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        best
    }

    #[test]
    fn agrees_with_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut compared = 0;
        for _ in 0..200 {
            let m = rng.random_range(1..=3);
            let nv = rng.random_range(m..=6);
            let a: Vec<Vec<BigRational>> =
                (0..m).map(|_| (0..nv).map(|_| r(rng.random_range(0..4))).collect()).collect();
            // bounded feasible region: positive rows, rhs from a positive point
            let point: Vec<BigRational> = (0..nv).map(|_| r(rng.random_range(0..3))).collect();
            let b: Vec<BigRational> = a.iter().map(|row| dot(row, &point)).collect();
            let c: Vec<BigRational> = (0..nv).map(|_| r(rng.random_range(-3..4))).collect();
            let lp = LinearProgram::new(a, b, c).unwrap();
            let bounded = (0..nv).all(|j| lp.a.iter().any(|row| row[j].is_positive()));
            match lp.solve().unwrap() {
                LpOutcome::Optimal { value, x } => {
                    assert!(lp.is_feasible(&x));
                    assert_eq!(lp.objective(&x), value);
                    // rank-deficient systems have no square basis to enumerate
                    if let (true, Some(best)) = (bounded, brute_force(&lp)) {
                        assert_eq!(value, best);
                        compared += 1;
                    }
                }
                LpOutcome::Unbounded => assert!(!bounded),
                LpOutcome::Infeasible => panic!("constructed feasible"),
            }
        }
        assert!(compared > 100, "only {compared} programs compared");
    }
}
