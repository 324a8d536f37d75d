//! The five MIP formulations of unit-demand envy-free pricing, a
//! solver-agnostic model type and LP text export.
//!
//! All formulations share binary `x_i_b` (bidder `b` receives item `i`) and
//! price variables `p_i`:
//!
//! | kind | extra variables | objective |
//! |------|-----------------|-----------|
//! | STM  | `ph_i_b` price paid | sum of `ph` |
//! | I    | `ph_i_b` | sum of `ph` |
//! | L    | `ph_i_b` | sum of `ph` |
//! | P    | `z_b` profit per bidder | sum of `z` |
//! | U    | `u_b` utility per bidder | `sum v x - sum u` |
//!
//! Big-M constants are the item maxima `R_i` and bidder maxima `S_b`.

mod build;
mod lp_format;
mod model;

pub use build::{
    build, build_with, embed_outcome, extract_outcome, BuildOptions, FormulationKind, Layout,
    ASSIGNMENT_TOL,
};
pub(crate) use build::{embed_with_layout, outcome_from_layout};
pub use lp_format::{export_lp_text, format_number, parse_lp_text};
pub use model::{Constraint, MipModel, Relation, VarId, Variable};
