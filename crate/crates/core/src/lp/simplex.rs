//! Dense two-phase simplex over exact rationals with Bland's rule.

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// `max` or `min` of `objective · x` subject to `rows`, `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub maximize: bool,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub value: Rational,
    pub x: Vec<Rational>,
    /// Optimal dual multipliers, one per row, signed so that the dual of a
    /// maximization has `y ≥ 0` on `≤` rows and the dual of a minimization
    /// has `y ≥ 0` on `≥` rows. Strong duality: `value = Σ y_i rhs_i`.
    pub duals: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, maximize: bool) -> Self {
        LinearProgram { num_vars, objective: vec![Rational::zero(); num_vars], maximize, rows: Vec::new() }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, sense: Sense, rhs: Rational) {
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn solve(&self) -> Result<Solution> {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    /// `m` rows of `ncols + 1` entries; the last entry is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
    artificial_start: usize,
    /// Column that started as the identity column of each row.
    identity_col: Vec<usize>,
    /// Rows whose sign was flipped to make the right-hand side non-negative.
    flipped: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars;
        let mut flipped = vec![false; m];
        let mut senses = Vec::with_capacity(m);
        for (i, r) in lp.rows.iter().enumerate() {
            let mut s = r.sense;
            if r.rhs.is_negative() {
                flipped[i] = true;
                s = match s {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
            senses.push(s);
        }
        let num_slack = senses.iter().filter(|s| **s != Sense::Eq).count();
        let num_art = senses.iter().filter(|s| **s != Sense::Le).count();
        let artificial_start = n + num_slack;
        let ncols = artificial_start + num_art;

        let mut t = vec![vec![Rational::zero(); ncols + 1]; m];
        let mut basis = vec![0; m];
        let mut identity_col = vec![0; m];
        let (mut slack, mut art) = (n, artificial_start);
        for (i, r) in lp.rows.iter().enumerate() {
            let sign = if flipped[i] { -Rational::one() } else { Rational::one() };
            for (j, c) in &r.coeffs {
                t[i][*j] += &(c * &sign);
            }
            t[i][ncols] = &r.rhs * &sign;
            match senses[i] {
                Sense::Le => {
                    t[i][slack] = Rational::one();
                    basis[i] = slack;
                    identity_col[i] = slack;
                    slack += 1;
                }
                Sense::Ge => {
                    t[i][slack] = -Rational::one();
                    slack += 1;
                    t[i][art] = Rational::one();
                    basis[i] = art;
                    identity_col[i] = art;
                    art += 1;
                }
                Sense::Eq => {
                    t[i][art] = Rational::one();
                    basis[i] = art;
                    identity_col[i] = art;
                    art += 1;
                }
            }
        }
        Tableau { t, basis, ncols, artificial_start, identity_col, flipped }
    }

    /// Reduced-cost row `r_j = c_B B⁻¹ A_j − c_j` (plus the objective value in
    /// the last slot) for maximizing `costs`.
    fn cost_row(&self, costs: &[Rational]) -> Vec<Rational> {
        let mut z: Vec<Rational> = costs.iter().map(|c| -c).collect();
        z.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if costs[b].is_zero() {
                continue;
            }
            for (j, v) in self.t[i].iter().enumerate() {
                if !v.is_zero() {
                    z[j] += &(&costs[b] * v);
                }
            }
        }
        z
    }

    fn pivot(&mut self, z: &mut [Rational], row: usize, col: usize) {
        let p = self.t[row][col].clone();
        if p != Rational::one() {
            for v in self.t[row].iter_mut() {
                if !v.is_zero() {
                    *v = &*v / &p;
                }
            }
        }
        let nz: Vec<usize> = (0..=self.ncols).filter(|&j| !self.t[row][j].is_zero()).collect();
        let prow: Vec<Rational> = nz.iter().map(|&j| self.t[row][j].clone()).collect();
        for i in 0..self.t.len() {
            if i == row || self.t[i][col].is_zero() {
                continue;
            }
            let f = self.t[i][col].clone();
            for (&j, pv) in nz.iter().zip(&prow) {
                let d = &f * pv;
                self.t[i][j] -= &d;
            }
        }
        if !z[col].is_zero() {
            let f = z[col].clone();
            for (&j, pv) in nz.iter().zip(&prow) {
                let d = &f * pv;
                z[j] -= &d;
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes with Bland's rule over columns allowed to enter.
    fn optimize(&mut self, z: &mut [Rational], allowed: impl Fn(usize) -> bool) -> Result<()> {
        loop {
            let Some(col) = (0..self.ncols).find(|&j| allowed(j) && z[j].is_negative()) else {
                return Ok(());
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.t[i][self.ncols] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((row, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(z, row, col);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<Solution> {
        let n = lp.num_vars;
        let ncols = self.ncols;
        let art = self.artificial_start;

        if art < ncols {
            let costs: Vec<Rational> =
                (0..ncols).map(|j| if j >= art { -Rational::one() } else { Rational::zero() }).collect();
            let mut z = self.cost_row(&costs);
            self.optimize(&mut z, |_| true)?;
            if !z[ncols].is_zero() {
                return Err(Error::Infeasible);
            }
            // Drive zero-valued artificials out of the basis where possible.
            for i in 0..self.t.len() {
                if self.basis[i] >= art {
                    if let Some(j) = (0..art).find(|&j| !self.t[i][j].is_zero()) {
                        self.pivot(&mut z, i, j);
                    }
                }
            }
        }

        let sign = if lp.maximize { Rational::one() } else { -Rational::one() };
        let mut costs = vec![Rational::zero(); ncols];
        for (j, c) in lp.objective.iter().enumerate() {
            costs[j] = c * &sign;
        }
        let mut z = self.cost_row(&costs);
        self.optimize(&mut z, |j| j < art)?;

        let mut x = vec![Rational::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.t[i][ncols].clone();
            }
        }
        let value = &z[ncols] * &sign;
        let duals = (0..lp.rows.len())
            .map(|i| {
                let mut y = z[self.identity_col[i]].clone();
                // Artificial columns carry cost 0 in phase two, so the reduced
                // cost equals c_B B⁻¹ e_i. Undo the row flip and the sign change
                // used to turn a minimization into a maximization.
                if self.flipped[i] {
                    y = -y;
                }
                &y * &sign
            })
            .collect();
        Ok(Solution { value, x, duals })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6).
        let mut lp = LinearProgram::new(2, true);
        lp.objective = vec![r(3, 1), r(5, 1)];
        lp.add_row(vec![(0, r(1, 1))], Sense::Le, r(4, 1));
        lp.add_row(vec![(1, r(2, 1))], Sense::Le, r(12, 1));
        lp.add_row(vec![(0, r(3, 1)), (1, r(2, 1))], Sense::Le, r(18, 1));
        let s = lp.solve().unwrap();
        assert_eq!(s.value, r(36, 1));
        assert_eq!(s.x, vec![r(2, 1), r(6, 1)]);
        assert_eq!(s.duals, vec![r(0, 1), r(3, 2), r(1, 1)]);
    }

    #[test]
    fn minimum_with_ge_rows() {
        // Fractional edge cover of a triangle: min x+y+z, each vertex covered.
        let mut lp = LinearProgram::new(3, false);
        lp.objective = vec![r(1, 1); 3];
        lp.add_row(vec![(0, r(1, 1)), (2, r(1, 1))], Sense::Ge, r(1, 1));
        lp.add_row(vec![(0, r(1, 1)), (1, r(1, 1))], Sense::Ge, r(1, 1));
        lp.add_row(vec![(1, r(1, 1)), (2, r(1, 1))], Sense::Ge, r(1, 1));
        let s = lp.solve().unwrap();
        assert_eq!(s.value, r(3, 2));
        let dual_value: Rational = s.duals.iter().cloned().sum();
        assert_eq!(dual_value, r(3, 2));
        assert!(s.duals.iter().all(|y| !y.is_negative()));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1, true);
        lp.objective = vec![r(1, 1)];
        lp.add_row(vec![(0, r(1, 1))], Sense::Le, r(1, 1));
        lp.add_row(vec![(0, r(1, 1))], Sense::Ge, r(2, 1));
        assert!(matches!(lp.solve(), Err(Error::Infeasible)));

        let mut lp = LinearProgram::new(2, true);
        lp.objective = vec![r(1, 1), r(0, 1)];
        lp.add_row(vec![(0, r(1, 1)), (1, r(-1, 1))], Sense::Le, r(1, 1));
        assert!(matches!(lp.solve(), Err(Error::Unbounded)));
    }

    #[test]
    fn equality_and_negative_rhs() {
        // min x + y, x - y = -1, x + y ≥ 3 → (1, 2), value 3.
        let mut lp = LinearProgram::new(2, false);
        lp.objective = vec![r(1, 1), r(1, 1)];
        lp.add_row(vec![(0, r(1, 1)), (1, r(-1, 1))], Sense::Eq, r(-1, 1));
        lp.add_row(vec![(0, r(1, 1)), (1, r(1, 1))], Sense::Ge, r(3, 1));
        let s = lp.solve().unwrap();
        assert_eq!(s.value, r(3, 1));
        let dual_value = &(&s.duals[0] * &r(-1, 1)) + &(&s.duals[1] * &r(3, 1));
        assert_eq!(dual_value, r(3, 1));
    }
}
