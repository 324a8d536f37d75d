//! Envy-free allocations for a fixed pricing.
//!
//! For every pricing there is a canonical profit-maximizing envy-free
//! allocation `x_p`: each bidder takes an item of maximum non-negative
//! utility, preferring the more expensive item on utility ties and the lower
//! item index after that. Bidders only consider items they value positively.

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance, Pricing, TAU};

/// Pricing plus allocation, with the induced profit and bidder utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pricing: Pricing,
    pub allocation: Allocation,
    pub profit: f64,
    pub utilities: Vec<f64>,
}

impl Outcome {
    /// Computes profit and utilities for an arbitrary (not necessarily
    /// envy-free) allocation.
    pub fn evaluate(inst: &Instance, pricing: Pricing, allocation: Allocation) -> Self {
        let mut profit = 0.0;
        let mut utilities = vec![0.0; inst.num_bidders()];
        for (b, i) in allocation.served() {
            profit += pricing[i];
            utilities[b] = inst.value(i, b) - pricing[i];
        }
        Self {
            pricing,
            allocation,
            profit,
            utilities,
        }
    }

    pub fn empty(inst: &Instance, pricing: Pricing) -> Self {
        Self::evaluate(inst, pricing, Allocation::empty(inst.num_bidders()))
    }
}

/// Best item for `bidder` at prices `p` together with its utility, or `None`
/// when every valued item has negative utility.
pub fn best_response(inst: &Instance, p: &Pricing, bidder: usize) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(item, value) in inst.bidder_valuations(bidder) {
        let utility = value - p[item];
        if utility < -TAU {
            continue;
        }
        best = match best {
            None => Some((item, utility)),
            Some((cur, cur_u)) => {
                let better = utility > cur_u + TAU
                    || (utility >= cur_u - TAU && p[item] > p[cur] + TAU);
                if better {
                    Some((item, utility))
                } else {
                    Some((cur, cur_u))
                }
            }
        };
    }
    best
}

/// The canonical allocation `x_p` and its outcome.
pub fn envy_free_allocation(inst: &Instance, p: &Pricing) -> Result<Outcome> {
    p.check_len(inst)?;
    let mut allocation = Allocation::empty(inst.num_bidders());
    for b in 0..inst.num_bidders() {
        allocation.assign(b, best_response(inst, p, b).map(|(i, _)| i));
    }
    Ok(Outcome::evaluate(inst, p.clone(), allocation))
}

/// Auctioneer's profit under `p` and `x_p`.
pub fn profit(inst: &Instance, p: &Pricing) -> Result<f64> {
    envy_free_allocation(inst, p).map(|o| o.profit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// The bidder pays more than its valuation for the assigned item.
    NegativeUtility,
    /// The bidder would strictly prefer the named item.
    Envies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvyViolation {
    pub bidder: usize,
    pub item: usize,
    pub kind: ViolationKind,
}

/// Checks both envy-freeness conditions for every bidder within `TAU`.
pub fn envy_violations(inst: &Instance, p: &Pricing, x: &Allocation) -> Vec<EnvyViolation> {
    let mut out = Vec::new();
    for b in 0..inst.num_bidders() {
        let own = match x.item_of(b) {
            Some(i) => {
                let u = inst.value(i, b) - p[i];
                if u < -TAU {
                    out.push(EnvyViolation {
                        bidder: b,
                        item: i,
                        kind: ViolationKind::NegativeUtility,
                    });
                }
                u
            }
            None => 0.0,
        };
        for &(k, v) in inst.bidder_valuations(b) {
            if v - p[k] > own + TAU {
                out.push(EnvyViolation {
                    bidder: b,
                    item: k,
                    kind: ViolationKind::Envies,
                });
            }
        }
    }
    out
}

pub fn is_envy_free(inst: &Instance, p: &Pricing, x: &Allocation) -> (bool, Vec<EnvyViolation>) {
    let v = envy_violations(inst, p, x);
    (v.is_empty(), v)
}

const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Exhaustive search over all allocations for the most profitable envy-free
/// one. Only for tiny markets: `(m + 1)^n` must not exceed 10^7.
pub fn allocation_brute_force(inst: &Instance, p: &Pricing) -> Result<Outcome> {
    p.check_len(inst)?;
    let m = inst.num_items();
    let n = inst.num_bidders();
    let size = ((m + 1) as f64).powi(n as i32);
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "allocation enumeration",
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    // choice[b] == m encodes "no item"
    let mut choice = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let envy_free = (0..n).all(|b| {
            let own = if choice[b] == m {
                0.0
            } else {
                inst.value(choice[b], b) - p[choice[b]]
            };
            own >= -TAU
                && inst
                    .bidder_valuations(b)
                    .iter()
                    .all(|&(k, v)| v - p[k] <= own + TAU)
        });
        if envy_free {
            let profit: f64 = choice.iter().filter(|&&i| i < m).map(|&i| p[i]).sum();
            if best.as_ref().is_none_or(|(bp, _)| profit > *bp + TAU) {
                best = Some((profit, choice.clone()));
            }
        }

        let mut pos = 0;
        loop {
            if pos == n {
                let (_, c) = best.expect("x_p is envy-free, so some allocation qualifies");
                let assignment = c.into_iter().map(|i| (i < m).then_some(i)).collect();
                let allocation = Allocation::new(inst, assignment)?;
                return Ok(Outcome::evaluate(inst, p.clone(), allocation));
            }
            choice[pos] += 1;
            if choice[pos] <= m {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}
