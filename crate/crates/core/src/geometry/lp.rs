//! Dense two-phase simplex over exact rationals (Bland's rule).

use num_traits::{One, Signed, Zero};

use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rel: Relation,
    pub rhs: Rational,
}

/// Variables are nonnegative unless marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub free: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub optimum: Rational,
    pub witness: Vec<Rational>,
    /// One multiplier per constraint; `rhs · dual == optimum`.
    pub dual: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense, objective: Vec<Rational>) -> Self {
        LinearProgram {
            num_vars,
            sense,
            objective,
            constraints: Vec::new(),
            free: vec![false; num_vars],
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, rel: Relation, rhs: Rational) -> &mut Self {
        self.constraints.push(Constraint { coeffs, rel, rhs });
        self
    }

    pub fn set_free(&mut self, j: usize) -> &mut Self {
        self.free[j] = true;
        self
    }

    fn check_dims(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        if self.free.len() != self.num_vars {
            return Err(Error::DimensionMismatch("free-variable mask".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {i} has {} coefficients for {} variables",
                    c.coeffs.len(),
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        if x.iter().zip(&self.free).any(|(v, f)| !f && v.is_negative()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            match c.rel {
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
                Relation::Ge => lhs >= c.rhs,
            }
        })
    }

    /// Checks dual feasibility of `y` and that its value equals `optimum`.
    pub fn verify_dual(&self, y: &[Rational], optimum: &Rational) -> bool {
        if y.len() != self.constraints.len() {
            return false;
        }
        let max = self.sense == Sense::Maximize;
        for (c, yi) in self.constraints.iter().zip(y) {
            let ok = match (c.rel, max) {
                (Relation::Eq, _) => true,
                (Relation::Le, true) | (Relation::Ge, false) => !yi.is_negative(),
                (Relation::Ge, true) | (Relation::Le, false) => !yi.is_positive(),
            };
            if !ok {
                return false;
            }
        }
        for j in 0..self.num_vars {
            let col: Rational = self
                .constraints
                .iter()
                .zip(y)
                .map(|(c, yi)| &c.coeffs[j] * yi)
                .sum();
            let cj = &self.objective[j];
            let ok = if self.free[j] {
                col == *cj
            } else if max {
                col >= *cj
            } else {
                col <= *cj
            };
            if !ok {
                return false;
            }
        }
        let dual_value: Rational = self.constraints.iter().zip(y).map(|(c, yi)| &c.rhs * yi).sum();
        dual_value == *optimum
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    obj: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    fn load_objective(&mut self, cost: &[Rational]) {
        let mut obj = cost.to_vec();
        obj.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            let cb = cost[b].clone();
            for (v, a) in obj.iter_mut().zip(&self.rows[i]) {
                *v -= &cb * a;
            }
        }
        self.obj = obj;
    }

    /// Maximizes the loaded objective; `Ok(false)` means unbounded.
    fn run(&mut self, allowed: &[bool]) -> bool {
        let rhs = self.width;
        loop {
            let enter = (0..self.width).find(|&j| allowed[j] && self.obj[j].is_positive());
            let Some(c) = enter else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Solves `lp` exactly and verifies the primal witness and dual certificate.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.check_dims()?;
    let m = lp.constraints.len();

    // structural columns: one per nonnegative variable, two per free variable
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(lp.num_vars);
    let mut ncols = 0;
    for j in 0..lp.num_vars {
        if lp.free[j] {
            col_of.push((ncols, Some(ncols + 1)));
            ncols += 2;
        } else {
            col_of.push((ncols, None));
            ncols += 1;
        }
    }
    let mut slack_of = vec![None; m];
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.rel != Relation::Eq {
            slack_of[i] = Some(ncols);
            ncols += 1;
        }
    }
    let n_std = ncols;
    let width = n_std + m;

    let mut rows = Vec::with_capacity(m);
    let mut flipped = vec![false; m];
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut row = vec![Rational::zero(); width + 1];
        for j in 0..lp.num_vars {
            let (pos, neg) = col_of[j];
            row[pos] = c.coeffs[j].clone();
            if let Some(neg) = neg {
                row[neg] = -&c.coeffs[j];
            }
        }
        if let Some(s) = slack_of[i] {
            row[s] = match c.rel {
                Relation::Le => Rational::one(),
                _ => -Rational::one(),
            };
        }
        row[width] = c.rhs.clone();
        if c.rhs.is_negative() {
            flipped[i] = true;
            for v in row.iter_mut() {
                *v = -&*v;
            }
        }
        row[n_std + i] = Rational::one();
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        obj: Vec::new(),
        basis: (n_std..n_std + m).collect(),
        width,
    };

    // phase 1
    let mut cost1 = vec![Rational::zero(); width];
    for c in cost1.iter_mut().skip(n_std) {
        *c = -Rational::one();
    }
    t.load_objective(&cost1);
    let all = vec![true; width];
    t.run(&all);
    if !t.obj[width].is_zero() {
        return Ok(LpOutcome::Infeasible);
    }
    for r in 0..m {
        if t.basis[r] >= n_std {
            if let Some(c) = (0..n_std).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, c);
            }
        }
    }

    // phase 2, always as a maximization
    let sign = match lp.sense {
        Sense::Maximize => Rational::one(),
        Sense::Minimize => -Rational::one(),
    };
    let mut cost2 = vec![Rational::zero(); width];
    for j in 0..lp.num_vars {
        let (pos, neg) = col_of[j];
        cost2[pos] = &lp.objective[j] * &sign;
        if let Some(neg) = neg {
            cost2[neg] = -&cost2[pos];
        }
    }
    t.load_objective(&cost2);
    let mut allowed = vec![true; width];
    for a in allowed.iter_mut().skip(n_std) {
        *a = false;
    }
    if !t.run(&allowed) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut xs = vec![Rational::zero(); n_std];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n_std {
            xs[b] = t.rows[i][width].clone();
        }
    }
    let witness: Vec<Rational> = (0..lp.num_vars)
        .map(|j| {
            let (pos, neg) = col_of[j];
            match neg {
                Some(neg) => &xs[pos] - &xs[neg],
                None => xs[pos].clone(),
            }
        })
        .collect();

    let mut dual = vec![Rational::zero(); m];
    for (k, y) in dual.iter_mut().enumerate() {
        let mut acc = Rational::zero();
        for (i, &b) in t.basis.iter().enumerate() {
            if b < width && !cost2[b].is_zero() {
                acc += &cost2[b] * &t.rows[i][n_std + k];
            }
        }
        if flipped[k] {
            acc = -acc;
        }
        *y = &acc * &sign;
    }

    let optimum = lp.value(&witness);
    if !lp.is_feasible(&witness) {
        return Err(Error::Numerical("simplex witness infeasible".into()));
    }
    if !lp.verify_dual(&dual, &optimum) {
        return Err(Error::Numerical("dual certificate failed verification".into()));
    }
    Ok(LpOutcome::Optimal(LpSolution {
        optimum,
        witness,
        dual,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational::{int, rat};

    fn r(n: i64) -> Rational {
        int(n)
    }

    #[test]
    fn single_variable() {
        let mut lp = LinearProgram::new(1, Sense::Maximize, vec![r(1)]);
        lp.constrain(vec![r(1)], Relation::Le, r(3));
        lp.constrain(vec![r(1)], Relation::Ge, r(0));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.optimal().unwrap().optimum, r(3));
    }

    #[test]
    fn simplex_corner() {
        let mut lp = LinearProgram::new(2, Sense::Maximize, vec![r(1), r(1)]);
        lp.constrain(vec![r(1), r(1)], Relation::Le, r(1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.optimal().unwrap().optimum, r(1));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1, Sense::Maximize, vec![r(1)]);
        lp.constrain(vec![r(1)], Relation::Le, r(-1));
        assert!(matches!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible));
        let mut lp = LinearProgram::new(2, Sense::Maximize, vec![r(1), r(0)]);
        lp.constrain(vec![r(1), r(-1)], Relation::Le, r(1));
        assert!(matches!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn free_variables_and_minimize() {
        // min x + 2y, x free, y >= 0, x + y = -3, x >= -5
        let mut lp = LinearProgram::new(2, Sense::Minimize, vec![r(1), r(2)]);
        lp.set_free(0);
        lp.constrain(vec![r(1), r(1)], Relation::Eq, r(-3));
        lp.constrain(vec![r(1), r(0)], Relation::Ge, r(-5));
        let s = solve_lp(&lp).unwrap();
        let s = s.optimal().unwrap();
        assert_eq!(s.optimum, r(-3));
        assert_eq!(s.witness, vec![r(-3), r(0)]);
    }

    #[test]
    fn redundant_tight_constraint() {
        // max 2x + 3y s.t. x + y <= 4, x + 3y <= 6, x <= 3; plus duplicate of the second row
        let mut base = LinearProgram::new(2, Sense::Maximize, vec![r(2), r(3)]);
        base.constrain(vec![r(1), r(1)], Relation::Le, r(4));
        base.constrain(vec![r(1), r(3)], Relation::Le, r(6));
        base.constrain(vec![r(1), r(0)], Relation::Le, r(3));
        let mut dup = base.clone();
        dup.constrain(vec![r(2), r(6)], Relation::Le, r(12));
        dup.constrain(vec![r(1), r(1)], Relation::Eq, r(4));
        let a = solve_lp(&base).unwrap().optimal().unwrap().optimum.clone();
        let b = solve_lp(&dup).unwrap().optimal().unwrap().optimum.clone();
        assert_eq!(a, rat(9, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch() {
        let mut lp = LinearProgram::new(2, Sense::Maximize, vec![r(1), r(1)]);
        lp.constrain(vec![r(1)], Relation::Le, r(1));
        assert!(solve_lp(&lp).is_err());
    }
}
