//! LP and MIP solving.
//!
//! [`solve_lp`] runs a bounded-variable primal simplex on a dense tableau.
//! [`solve_mip`] is best-bound branch-and-bound on top of it: children
//! re-optimize their parent's final tableau with the dual simplex, and every
//! node's prices are rounded to an envy-free outcome to improve the
//! incumbent. [`compare_relaxations`] solves the five relaxations of one
//! market side by side.

mod bnb;
mod lp;
mod relax;
mod simplex;

pub use bnb::{primal_heuristic, relative_gap, solve_mip, MipLimits, MipResult, MipStatus, GAP_TOL};
pub use lp::{solve_lp, solve_lp_with, LpOptions, LpSolution, LpStatus, LP_FEAS_TOL};
pub use relax::{
    check_i_to_stm, check_l_to_p, check_p_to_u, compare_relaxations, compare_relaxations_with,
    relaxed_residual, MappingCheck, RelaxationReport, ORDER_TOL,
};
