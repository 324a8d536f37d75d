//! Exhaustive search over valuation-valued price vectors.
//!
//! Prices range over `{v_ib : b} ∪ {0}` per item. Optimal prices need not lie
//! in that set, so the result is a lower bound on the optimum.

use crate::allocation::{envy_free_allocation, Outcome};
use crate::error::{Error, Result};
use crate::instance::{Instance, Pricing, TAU};

pub const MAX_ITEMS: usize = 4;
pub const MAX_CANDIDATES: f64 = 1e7;

/// Candidate prices of each item, ascending and distinct.
pub fn candidate_prices(inst: &Instance) -> Vec<Vec<f64>> {
    let mut cands = vec![vec![0.0]; inst.num_items()];
    for e in inst.edges() {
        cands[e.item].push(e.value);
    }
    for c in &mut cands {
        c.sort_by(f64::total_cmp);
        c.dedup();
    }
    cands
}

/// The best outcome over all candidate price vectors. Among equally good
/// vectors the first in lexicographic candidate order wins.
pub fn brute_force_optimal(inst: &Instance) -> Result<Outcome> {
    let cands = candidate_prices(inst);
    let size: f64 = cands.iter().map(|c| c.len() as f64).product();
    if inst.num_items() > MAX_ITEMS {
        return Err(Error::TooLarge {
            what: "items for the candidate-price oracle",
            size: inst.num_items() as f64,
            limit: MAX_ITEMS as f64,
        });
    }
    if size > MAX_CANDIDATES {
        return Err(Error::TooLarge {
            what: "candidate price vectors",
            size,
            limit: MAX_CANDIDATES,
        });
    }
    let m = inst.num_items();
    let mut idx = vec![0usize; m];
    let mut best: Option<Outcome> = None;
    loop {
        let prices = idx.iter().zip(&cands).map(|(&k, c)| c[k]).collect();
        let out = envy_free_allocation(inst, &Pricing::new(prices)?)?;
        if best.as_ref().is_none_or(|b| out.profit > b.profit + TAU) {
            best = Some(out);
        }
        // odometer step, last item fastest
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(best.expect("at least one vector is enumerated"));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cands[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}
