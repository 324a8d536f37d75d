//! Unit-demand envy-free pricing.
//!
//! A market is a sparse valuation matrix over items and bidders
//! ([`Instance`]). Each bidder buys at most one item and supply is
//! unlimited. Given item prices, every bidder takes an item of maximum
//! non-negative utility; the seller wants the prices that maximize the
//! resulting revenue.
//!
//! * [`allocation`] computes the revenue-maximizing envy-free allocation for
//!   fixed prices.
//! * [`generators`] draws random markets from three economic models.
//! * [`formulations`] builds five MIP formulations of the pricing problem.
//! * [`solver`] holds a simplex LP solver and branch-and-bound on top of it.
//! * [`geometric`] rounds prices onto geometric grids with bounded loss.
//! * [`oracle`], [`io`], [`bench`] and [`cli`] support the `efp` binary.

// index loops mirror the model's subscripts; negated float comparisons
// deliberately treat NaN as failing
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod bench;
pub mod cli;
pub mod error;
pub mod formulations;
pub mod generators;
pub mod geometric;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
pub use instance::{Allocation, DerivedConstants, Edge, Instance, Pricing, TAU};
