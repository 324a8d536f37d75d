use std::time::Instant;

use crate::error::{Error, Result};
use crate::formulations::{MipModel, Relation};

use super::simplex::{self, Limits, Problem, Simplex};

/// Feasibility tolerance guaranteed for optimal LP solutions.
pub const LP_FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; meaningful only when optimal.
    pub objective: f64,
    /// Value per model variable.
    pub values: Vec<f64>,
    pub iterations: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    pub max_iterations: u64,
    pub deadline: Option<Instant>,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1_000_000,
            deadline: None,
        }
    }
}

pub(crate) fn to_problem(model: &MipModel) -> Problem {
    let n = model.num_vars();
    let mut cost = vec![0.0; n];
    for &(v, c) in &model.objective {
        cost[v] += c;
    }
    let mut rows = Vec::with_capacity(model.num_constraints());
    let mut row_lo = Vec::with_capacity(model.num_constraints());
    let mut row_hi = Vec::with_capacity(model.num_constraints());
    for c in &model.constraints {
        rows.push(c.terms.clone());
        let (lo, hi) = match c.relation {
            Relation::Le => (f64::NEG_INFINITY, c.rhs),
            Relation::Ge => (c.rhs, f64::INFINITY),
            Relation::Eq => (c.rhs, c.rhs),
        };
        row_lo.push(lo);
        row_hi.push(hi);
    }
    Problem {
        num_cols: n,
        rows,
        row_lo,
        row_hi,
        col_lo: model.variables.iter().map(|v| v.lower).collect(),
        col_hi: model.variables.iter().map(|v| v.upper).collect(),
        cost,
    }
}

pub(crate) fn status_of(o: simplex::Outcome) -> LpStatus {
    match o {
        simplex::Outcome::Optimal => LpStatus::Optimal,
        simplex::Outcome::Infeasible => LpStatus::Infeasible,
        simplex::Outcome::Unbounded => LpStatus::Unbounded,
        simplex::Outcome::Limit => LpStatus::IterationLimit,
    }
}

pub(crate) fn solution_of(s: &Simplex, status: LpStatus) -> LpSolution {
    LpSolution {
        status,
        objective: s.objective(),
        values: s.structural_values().to_vec(),
        iterations: s.iterations,
    }
}

/// Solves the linear relaxation of `model` (integrality is ignored).
pub fn solve_lp(model: &MipModel) -> Result<LpSolution> {
    solve_lp_with(model, LpOptions::default())
}

pub fn solve_lp_with(model: &MipModel, opts: LpOptions) -> Result<LpSolution> {
    if let Some(v) = model.variables.iter().find(|v| !v.lower.is_finite()) {
        return Err(Error::Lp(format!("variable `{}` needs a finite lower bound", v.name)));
    }
    let mut s = Simplex::new(&to_problem(model));
    let outcome = s.solve_primal(&Limits {
        max_iterations: opts.max_iterations,
        deadline: opts.deadline,
    });
    Ok(solution_of(&s, status_of(outcome)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(vars: &[(f64, f64)], obj: &[f64]) -> MipModel {
        let mut m = MipModel::default();
        for (k, &(lo, hi)) in vars.iter().enumerate() {
            m.add_var(format!("v{k}"), lo, hi, false);
        }
        m.objective = obj.iter().cloned().enumerate().collect();
        m
    }

    #[test]
    fn no_constraints_sits_at_bounds() {
        let m = model(&[(0.0, 3.0), (1.0, 4.0), (-2.0, 5.0)], &[2.0, -1.0, 0.5]);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.values, vec![3.0, 1.0, 5.0]);
        assert!((s.objective - (6.0 - 1.0 + 2.5)).abs() < 1e-12);
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut m = model(&[(0.0, f64::INFINITY), (0.0, f64::INFINITY)], &[3.0, 5.0]);
        m.add_constraint("a".into(), vec![(0, 1.0)], Relation::Le, 4.0);
        m.add_constraint("b".into(), vec![(1, 2.0)], Relation::Le, 12.0);
        m.add_constraint("c".into(), vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.values[0] - 2.0).abs() < 1e-9 && (s.values[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn needs_phase_one() {
        // max -x - y, x + y >= 2, x - y = 1 -> (1.5, 0.5)
        let mut m = model(&[(0.0, f64::INFINITY), (0.0, f64::INFINITY)], &[-1.0, -1.0]);
        m.add_constraint("a".into(), vec![(0, 1.0), (1, 1.0)], Relation::Ge, 2.0);
        m.add_constraint("b".into(), vec![(0, 1.0), (1, -1.0)], Relation::Eq, 1.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 2.0).abs() < 1e-9);
        assert!((s.values[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = model(&[(0.0, 1.0)], &[1.0]);
        m.add_constraint("a".into(), vec![(0, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);

        let mut m = model(&[(0.0, f64::INFINITY), (0.0, f64::INFINITY)], &[1.0, 1.0]);
        m.add_constraint("a".into(), vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn rejects_free_lower_bound() {
        let m = model(&[(f64::NEG_INFINITY, 1.0)], &[1.0]);
        assert!(solve_lp(&m).is_err());
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's cycling example, as a maximization
        let mut m = model(&[(0.0, f64::INFINITY); 4], &[0.75, -150.0, 0.02, -6.0]);
        m.add_constraint("a".into(), vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Relation::Le, 0.0);
        m.add_constraint("b".into(), vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Relation::Le, 0.0);
        m.add_constraint("c".into(), vec![(2, 1.0)], Relation::Le, 1.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.05).abs() < 1e-9, "{}", s.objective);
    }
}
