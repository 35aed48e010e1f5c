//! Exact rational linear programming.
//!
//! A dense bounded-variable primal simplex over [`Rational`]. Every variable
//! carries finite box bounds; each constraint row gets a slack whose bounds
//! encode the relation. Entering and leaving choices follow Bland's rule
//! (lowest index first), which both guarantees termination and makes the
//! returned vertex deterministic.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::number::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    lower: Vec<Rational>,
    upper: Vec<Rational>,
    constraints: Vec<Constraint>,
    objective: Option<Vec<Rational>>,
}

impl LinearProgram {
    /// An LP with every variable boxed in `[lo, hi]` and no constraints.
    pub fn with_box(num_vars: usize, lo: Rational, hi: Rational) -> Self {
        LinearProgram {
            num_vars,
            lower: vec![lo; num_vars],
            upper: vec![hi; num_vars],
            constraints: Vec::new(),
            objective: None,
        }
    }

    pub fn set_bounds(&mut self, var: usize, lo: Rational, hi: Rational) {
        self.lower[var] = lo;
        self.upper[var] = hi;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn maximize(&mut self, objective: Vec<Rational>) {
        self.objective = Some(objective);
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self, var: usize) -> (&Rational, &Rational) {
        (&self.lower[var], &self.upper[var])
    }

    pub fn objective(&self) -> Option<&[Rational]> {
        self.objective.as_deref()
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedLp(msg));
        if self.lower.len() != self.num_vars || self.upper.len() != self.num_vars {
            return bad("bound vectors do not match num_vars".into());
        }
        if let Some(v) = (0..self.num_vars).find(|&v| self.lower[v] > self.upper[v]) {
            return bad(format!("variable {v} has lo > hi"));
        }
        if let Some(i) = self.constraints.iter().position(|c| c.coeffs.len() != self.num_vars) {
            return bad(format!("constraint {i} has the wrong number of coefficients"));
        }
        if self.objective.as_ref().is_some_and(|o| o.len() != self.num_vars) {
            return bad("objective has the wrong number of coefficients".into());
        }
        Ok(())
    }

    pub fn row_activity(&self, row: usize, x: &[Rational]) -> Rational {
        dot(&self.constraints[row].coeffs, x)
    }

    /// Exact check of every constraint and box bound.
    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && (0..self.num_vars).all(|v| self.lower[v] <= x[v] && x[v] <= self.upper[v])
            && self.constraints.iter().all(|c| {
                let lhs = dot(&c.coeffs, x);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    pub fn objective_value(&self, x: &[Rational]) -> Option<Rational> {
        self.objective.as_ref().map(|o| dot(o, x))
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(c, _)| !c.is_zero()).map(|(c, v)| c * v).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    OptimalExtreme,
}

#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Structural variable values; empty when infeasible.
    pub values: Vec<Rational>,
    /// Indices of constraints holding with equality.
    pub tight_constraints: Vec<usize>,
    /// Indices of variables sitting at one of their box bounds.
    pub tight_bounds: Vec<usize>,
    pub objective: Option<Rational>,
}

impl LpOutcome {
    fn infeasible() -> Self {
        LpOutcome {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            tight_constraints: Vec::new(),
            tight_bounds: Vec::new(),
            objective: None,
        }
    }

    fn at_point(lp: &LinearProgram, status: LpStatus, values: Vec<Rational>) -> Self {
        let tight_constraints = (0..lp.constraints.len())
            .filter(|&i| lp.row_activity(i, &values) == lp.constraints[i].rhs)
            .collect();
        let tight_bounds = (0..lp.num_vars)
            .filter(|&v| values[v] == lp.lower[v] || values[v] == lp.upper[v])
            .collect();
        let objective = lp.objective_value(&values);
        LpOutcome { status, values, tight_constraints, tight_bounds, objective }
    }

    /// Variables strictly inside their box.
    pub fn fractional_vars(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|v| !self.tight_bounds.contains(v)).collect()
    }
}

pub fn count_fractional(out: &LpOutcome) -> usize {
    out.values.len() - out.tight_bounds.len()
}

/// Finds some exactly-feasible point, or reports infeasibility.
pub fn solve_feasible(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let mut tab = Tableau::new(lp);
    if !tab.phase_one()? {
        return Ok(LpOutcome::infeasible());
    }
    Ok(LpOutcome::at_point(lp, LpStatus::Feasible, tab.structural_values()))
}

/// Maximizes the objective and returns an optimal basic feasible solution.
pub fn solve_extreme_optimal(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let objective = lp
        .objective
        .clone()
        .ok_or_else(|| Error::MalformedLp("no objective to optimize".into()))?;
    let mut tab = Tableau::new(lp);
    if !tab.phase_one()? {
        return Ok(LpOutcome::infeasible());
    }
    tab.fix_artificials();
    let mut costs = vec![Rational::zero(); tab.num_cols];
    costs[..lp.num_vars].clone_from_slice(&objective);
    tab.optimize(&costs)?;
    Ok(LpOutcome::at_point(lp, LpStatus::OptimalExtreme, tab.structural_values()))
}

/// Dense tableau `B^-1 [A | I | art]` with explicit variable values.
struct Tableau {
    num_structural: usize,
    num_cols: usize,
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    lower: Vec<Option<Rational>>,
    upper: Vec<Option<Rational>>,
    value: Vec<Rational>,
    artificials: Vec<usize>,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let m = lp.constraints.len();
        let mut lower: Vec<Option<Rational>> = lp.lower.iter().cloned().map(Some).collect();
        let mut upper: Vec<Option<Rational>> = lp.upper.iter().cloned().map(Some).collect();
        let mut value: Vec<Rational> = lp.lower.clone();
        for c in &lp.constraints {
            let (lo, hi) = match c.relation {
                Relation::Le => (Some(Rational::zero()), None),
                Relation::Ge => (None, Some(Rational::zero())),
                Relation::Eq => (Some(Rational::zero()), Some(Rational::zero())),
            };
            lower.push(lo);
            upper.push(hi);
            value.push(Rational::zero());
        }

        // Residuals decide which rows start with a basic slack and which
        // need an artificial variable.
        let residuals: Vec<Rational> =
            lp.constraints.iter().map(|c| &c.rhs - dot(&c.coeffs, &lp.lower)).collect();
        let slack_fits = |i: usize, r: &Rational| {
            lower[n + i].as_ref().is_none_or(|lo| r >= lo) && upper[n + i].as_ref().is_none_or(|hi| r <= hi)
        };
        let needs_art: Vec<bool> = residuals.iter().enumerate().map(|(i, r)| !slack_fits(i, r)).collect();
        let num_art = needs_art.iter().filter(|&&b| b).count();
        let num_cols = n + m + num_art;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut artificials = Vec::with_capacity(num_art);
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); num_cols];
            row[..n].clone_from_slice(&c.coeffs);
            row[n + i] = Rational::one();
            if needs_art[i] {
                let col = n + m + artificials.len();
                // Scale the row by sign(residual) so the artificial enters with
                // coefficient +1 and a non-negative value.
                if residuals[i].is_negative() {
                    for x in row.iter_mut() {
                        *x = -x.clone();
                    }
                }
                row[col] = Rational::one();
                lower.push(Some(Rational::zero()));
                upper.push(None);
                value.push(residuals[i].abs());
                artificials.push(col);
                basis.push(col);
            } else {
                value[n + i] = residuals[i].clone();
                basis.push(n + i);
            }
            rows.push(row);
        }
        let mut is_basic = vec![false; num_cols];
        for &b in &basis {
            is_basic[b] = true;
        }
        Tableau { num_structural: n, num_cols, rows, basis, is_basic, lower, upper, value, artificials }
    }

    /// Drives artificials to zero. Returns false if that is impossible.
    fn phase_one(&mut self) -> Result<bool> {
        if self.artificials.is_empty() {
            return Ok(true);
        }
        let mut costs = vec![Rational::zero(); self.num_cols];
        for &a in &self.artificials {
            costs[a] = -Rational::one();
        }
        self.optimize(&costs)?;
        Ok(self.artificials.iter().all(|&a| self.value[a].is_zero()))
    }

    fn fix_artificials(&mut self) {
        for &a in &self.artificials {
            self.upper[a] = Some(Rational::zero());
        }
    }

    fn structural_values(&self) -> Vec<Rational> {
        self.value[..self.num_structural].to_vec()
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!((&self.lower[j], &self.upper[j]), (Some(lo), Some(hi)) if lo == hi)
    }

    fn reduced_costs(&self, costs: &[Rational]) -> Vec<Rational> {
        let mut d = costs.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if costs[b].is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row) {
                if !a.is_zero() {
                    *dj -= &costs[b] * a;
                }
            }
        }
        d
    }

    fn entering(&self, d: &[Rational]) -> Option<(usize, bool)> {
        (0..self.num_cols).find_map(|j| {
            if self.is_basic[j] || self.is_fixed(j) || d[j].is_zero() {
                return None;
            }
            let increase = d[j].is_positive();
            let room = if increase {
                self.upper[j].as_ref().is_none_or(|hi| &self.value[j] < hi)
            } else {
                self.lower[j].as_ref().is_none_or(|lo| &self.value[j] > lo)
            };
            room.then_some((j, increase))
        })
    }

    /// Maximizes `costs . x` from the current basic feasible point.
    fn optimize(&mut self, costs: &[Rational]) -> Result<()> {
        loop {
            let d = self.reduced_costs(costs);
            let Some((j, increase)) = self.entering(&d) else {
                return Ok(());
            };
            // Candidate steps: (step length, variable index, pivot row).
            let mut best: Option<(Rational, usize, Option<usize>)> = None;
            let mut offer = |t: Rational, var: usize, row: Option<usize>| {
                let better = match &best {
                    None => true,
                    Some((bt, bv, _)) => t < *bt || (t == *bt && var < *bv),
                };
                if better {
                    best = Some((t, var, row));
                }
            };
            if increase {
                if let Some(hi) = &self.upper[j] {
                    offer(hi - &self.value[j], j, None);
                }
            } else if let Some(lo) = &self.lower[j] {
                offer(&self.value[j] - lo, j, None);
            }
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[j];
                if a.is_zero() {
                    continue;
                }
                let b = self.basis[i];
                // x_b moves at rate -a per unit increase of x_j.
                let rate = if increase { -a.clone() } else { a.clone() };
                if rate.is_negative() {
                    if let Some(lo) = &self.lower[b] {
                        offer((&self.value[b] - lo) / -&rate, b, Some(i));
                    }
                } else if let Some(hi) = &self.upper[b] {
                    offer((hi - &self.value[b]) / &rate, b, Some(i));
                }
            }
            let Some((step, _, pivot_row)) = best else {
                return Err(Error::Unbounded);
            };
            let signed_step = if increase { step } else { -step };
            if !signed_step.is_zero() {
                self.value[j] += &signed_step;
                for i in 0..self.rows.len() {
                    let a = &self.rows[i][j];
                    if !a.is_zero() {
                        let delta = a * &signed_step;
                        self.value[self.basis[i]] -= delta;
                    }
                }
            }
            if let Some(r) = pivot_row {
                self.pivot(r, j);
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let inv = Rational::one() / &self.rows[r][j];
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let factor = row[j].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        self.rows[r] = pivot_row;
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }
}
