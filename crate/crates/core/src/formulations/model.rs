use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded above.
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v]).sum()
    }

    /// How far `values` is from satisfying the row, zero when satisfied.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let act = self.activity(values);
        match self.relation {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// A maximization MIP: variables with bounds, a linear objective and
/// linear constraints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MipModel {
    pub variables: Vec<Variable>,
    /// Coefficients of the objective to maximize.
    pub objective: Vec<(VarId, f64)>,
    pub constraints: Vec<Constraint>,
}

impl MipModel {
    pub fn add_var(&mut self, name: String, lower: f64, upper: f64, integer: bool) -> VarId {
        self.variables.push(Variable {
            name,
            lower,
            upper,
            integer,
        });
        self.variables.len() - 1
    }

    pub fn add_binary(&mut self, name: String) -> VarId {
        self.add_var(name, 0.0, 1.0, true)
    }

    /// Adds a constraint, dropping zero coefficients.
    pub fn add_constraint(
        &mut self,
        name: String,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        let terms = terms.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.constraints.push(Constraint {
            name,
            terms,
            relation,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_integer(&self) -> usize {
        self.variables.iter().filter(|v| v.integer).count()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Structural checks: unique names, declared variables only, binary
    /// bounds, finite lower bounds.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Lp(msg));
        let mut names = HashSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return bad(format!("duplicate variable name `{}`", v.name));
            }
            if !v.lower.is_finite() {
                return bad(format!("variable `{}` needs a finite lower bound", v.name));
            }
            if v.upper < v.lower {
                return bad(format!("variable `{}` has empty bounds", v.name));
            }
        }
        let mut cnames = HashSet::new();
        for c in &self.constraints {
            if !cnames.insert(c.name.as_str()) {
                return bad(format!("duplicate constraint name `{}`", c.name));
            }
            if let Some(&(v, _)) = c.terms.iter().find(|&&(v, _)| v >= self.variables.len()) {
                return bad(format!("constraint `{}` references unknown variable {v}", c.name));
            }
        }
        if let Some(&(v, _)) = self.objective.iter().find(|&&(v, _)| v >= self.variables.len()) {
            return bad(format!("objective references unknown variable {v}"));
        }
        Ok(())
    }

    /// The most violated constraint or bound, if any exceeds `tol`.
    pub fn worst_violation(&self, values: &[f64], tol: f64) -> Option<(String, f64)> {
        let mut worst: Option<(String, f64)> = None;
        let mut consider = |name: &str, viol: f64| {
            if viol > tol && worst.as_ref().is_none_or(|w| viol > w.1) {
                worst = Some((name.to_string(), viol));
            }
        };
        for (v, &x) in self.variables.iter().zip(values) {
            consider(&v.name, (v.lower - x).max(x - v.upper).max(0.0));
            if v.integer {
                consider(&v.name, (x - x.round()).abs());
            }
        }
        for c in &self.constraints {
            consider(&c.name, c.violation(values));
        }
        worst
    }
}

impl fmt::Display for MipModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} variables ({} integer), {} constraints",
            self.num_vars(),
            self.num_integer(),
            self.num_constraints()
        )
    }
}
