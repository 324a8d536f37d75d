//! Market instances: a sparse valuation matrix over items and bidders, plus
//! the pricing and allocation types that live on top of it.
//!
//! Indices are 0-based here. Zero valuations are never stored; an absent
//! `(item, bidder)` pair means the bidder has no interest in the item.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Absolute tolerance for equality tests on valuations, prices and utilities.
pub const TAU: f64 = 1e-9;

/// Fractional decimal digits kept by the instance file format.
pub const VALUE_DIGITS: i32 = 9;

/// Rounds a positive valuation to [`VALUE_DIGITS`] fractional digits, so that
/// writing and re-reading an instance is lossless. Never returns zero.
pub fn quantize(v: f64) -> f64 {
    let scale = 10f64.powi(VALUE_DIGITS);
    ((v * scale).round() / scale).max(1.0 / scale)
}

/// One stored valuation `v[item][bidder] > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub item: usize,
    pub bidder: usize,
    pub value: f64,
}

impl Edge {
    pub fn new(item: usize, bidder: usize, value: f64) -> Self {
        Self {
            item,
            bidder,
            value,
        }
    }
}

/// A validated unit-demand market.
///
/// Immutable after construction. Edges are kept sorted by `(item, bidder)`,
/// which makes equality independent of the order the edges were supplied in.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    num_items: usize,
    num_bidders: usize,
    edges: Vec<Edge>,
    // (item, value) per bidder, sorted by item.
    by_bidder: Vec<Vec<(usize, f64)>>,
}

impl Instance {
    /// Validates a raw edge list and builds the instance.
    pub fn new(num_items: usize, num_bidders: usize, raw: &[Edge]) -> Result<Self> {
        if num_items == 0 || num_bidders == 0 {
            return Err(Error::EmptyMarket);
        }
        let mut seen = HashSet::with_capacity(raw.len());
        for e in raw {
            if e.item >= num_items || e.bidder >= num_bidders {
                return Err(Error::IndexOutOfRange {
                    item: e.item,
                    bidder: e.bidder,
                    items: num_items,
                    bidders: num_bidders,
                });
            }
            if !(e.value > 0.0) || !e.value.is_finite() {
                return Err(Error::NonPositiveValue {
                    item: e.item,
                    bidder: e.bidder,
                    value: e.value,
                });
            }
            if !seen.insert((e.item, e.bidder)) {
                return Err(Error::DuplicateEdge {
                    item: e.item,
                    bidder: e.bidder,
                });
            }
        }

        let mut edges = raw.to_vec();
        edges.sort_by_key(|e| (e.item, e.bidder));
        let mut by_bidder = vec![Vec::new(); num_bidders];
        for e in &edges {
            by_bidder[e.bidder].push((e.item, e.value));
        }
        Ok(Self {
            num_items,
            num_bidders,
            edges,
            by_bidder,
        })
    }

    /// Builds an instance from `(item, bidder, value)` triples.
    pub fn from_triples(
        num_items: usize,
        num_bidders: usize,
        triples: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let raw: Vec<Edge> = triples
            .iter()
            .map(|&(i, b, v)| Edge::new(i, b, v))
            .collect();
        Self::new(num_items, num_bidders, &raw)
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn num_bidders(&self) -> usize {
        self.num_bidders
    }

    /// Stored edges sorted by `(item, bidder)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Items valued by `bidder`, as `(item, value)` sorted by item.
    pub fn bidder_valuations(&self, bidder: usize) -> &[(usize, f64)] {
        &self.by_bidder[bidder]
    }

    /// `v[item][bidder]`, zero when the pair is not stored.
    pub fn value(&self, item: usize, bidder: usize) -> f64 {
        let row = &self.by_bidder[bidder];
        match row.binary_search_by_key(&item, |&(i, _)| i) {
            Ok(pos) => row[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn bidder_degree(&self, bidder: usize) -> usize {
        self.by_bidder[bidder].len()
    }

    pub fn item_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_items];
        for e in &self.edges {
            deg[e.item] += 1;
        }
        deg
    }

    pub fn mean_bidder_degree(&self) -> f64 {
        self.edges.len() as f64 / self.num_bidders as f64
    }

    pub fn derive_constants(&self) -> DerivedConstants {
        DerivedConstants::new(self)
    }
}

/// The big-M constants `R_i`, `S_b` and the global maximum `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    /// Largest valuation of each item over all bidders.
    pub item_max: Vec<f64>,
    /// Largest valuation of each bidder over all items.
    pub bidder_max: Vec<f64>,
    /// Largest valuation overall, zero for a market without edges.
    pub global_max: f64,
}

impl DerivedConstants {
    pub fn new(inst: &Instance) -> Self {
        let mut item_max = vec![0.0_f64; inst.num_items()];
        let mut bidder_max = vec![0.0_f64; inst.num_bidders()];
        let mut global_max = 0.0_f64;
        for e in inst.edges() {
            item_max[e.item] = item_max[e.item].max(e.value);
            bidder_max[e.bidder] = bidder_max[e.bidder].max(e.value);
            global_max = global_max.max(e.value);
        }
        Self {
            item_max,
            bidder_max,
            global_max,
        }
    }
}

/// A non-negative price per item.
#[derive(Debug, Clone, PartialEq)]
pub struct Pricing(Vec<f64>);

impl Pricing {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = prices.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidPrice(bad));
        }
        Ok(Self(prices))
    }

    pub fn zeros(num_items: usize) -> Self {
        Self(vec![0.0; num_items])
    }

    /// Validates the pricing against an instance's item count.
    pub fn for_instance(inst: &Instance, prices: Vec<f64>) -> Result<Self> {
        if prices.len() != inst.num_items() {
            return Err(Error::DimensionMismatch {
                expected: inst.num_items(),
                found: prices.len(),
            });
        }
        Self::new(prices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, item: usize) -> f64 {
        self.0[item]
    }

    pub(crate) fn check_len(&self, inst: &Instance) -> Result<()> {
        if self.0.len() != inst.num_items() {
            return Err(Error::DimensionMismatch {
                expected: inst.num_items(),
                found: self.0.len(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for Pricing {
    type Output = f64;

    fn index(&self, item: usize) -> &f64 {
        &self.0[item]
    }
}

/// Which item, if any, each bidder receives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation(Vec<Option<usize>>);

impl Allocation {
    pub fn empty(num_bidders: usize) -> Self {
        Self(vec![None; num_bidders])
    }

    pub fn new(inst: &Instance, assignment: Vec<Option<usize>>) -> Result<Self> {
        if assignment.len() != inst.num_bidders() {
            return Err(Error::DimensionMismatch {
                expected: inst.num_bidders(),
                found: assignment.len(),
            });
        }
        for (b, item) in assignment.iter().enumerate() {
            if let Some(i) = *item {
                if i >= inst.num_items() {
                    return Err(Error::IndexOutOfRange {
                        item: i,
                        bidder: b,
                        items: inst.num_items(),
                        bidders: inst.num_bidders(),
                    });
                }
            }
        }
        Ok(Self(assignment))
    }

    pub fn item_of(&self, bidder: usize) -> Option<usize> {
        self.0[bidder]
    }

    pub fn assign(&mut self, bidder: usize, item: Option<usize>) {
        self.0[bidder] = item;
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.0
    }

    pub fn served(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(b, i)| i.map(|i| (b, i)))
    }

    pub fn num_served(&self) -> usize {
        self.0.iter().filter(|i| i.is_some()).count()
    }
}

/// A small worked market with 3 items, 4 bidders and 8 valuations.
/// Optimal profit is 21 at prices (6, 6, 3).
pub fn worked_example() -> Instance {
    Instance::from_triples(
        3,
        4,
        &[
            (0, 0, 4.0),
            (0, 1, 5.0),
            (0, 2, 6.0),
            (1, 1, 7.0),
            (1, 3, 6.0),
            (2, 0, 3.0),
            (2, 2, 2.0),
            (2, 3, 2.0),
        ],
    )
    .expect("worked example is valid")
}
