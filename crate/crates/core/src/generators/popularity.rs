use crate::error::{Error, Result};
use crate::instance::{quantize, Edge, Instance};

use super::rng::Stream;
use super::{check_dims, Seed};

/// Preferential-attachment market.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityConfig {
    pub m: usize,
    pub n: usize,
    /// Number of distinct edges.
    pub e: usize,
    /// Largest item quality.
    pub q_max: f64,
    /// Relative standard deviation of valuations around the market price.
    pub d: f64,
}

impl PopularityConfig {
    pub fn validate(&self) -> Result<()> {
        check_dims(self.m, self.n)?;
        if self.e > self.m * self.n {
            return Err(Error::EdgeBudgetInfeasible {
                edges: self.e,
                capacity: self.m * self.n,
            });
        }
        if !(self.q_max > 0.0 && self.q_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("quality bound must be positive, got {}", self.q_max)));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidConfig(format!("deviation must be positive, got {}", self.d)));
        }
        Ok(())
    }
}

/// Market price `quality / degree`; items nobody values have none.
pub fn popularity_market_price(quality: f64, degree: usize) -> Option<f64> {
    (degree > 0).then(|| quality / degree as f64)
}

/// Draw order: edge pairs (bidder, then degree-weighted item; duplicates
/// redraw both), one quality per item, then one valuation per edge in
/// `(item, bidder)` order.
pub fn gen_popularity(cfg: &PopularityConfig, seed: Seed) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = Stream::new(seed.0);

    let mut present = vec![false; cfg.m * cfg.n];
    let mut degree = vec![0usize; cfg.m];
    let mut placed = 0;
    while placed < cfg.e {
        let b = rng.index(cfg.n);
        // total weight sum(d_i + 1) = placed + m
        let mut ticket = rng.index(placed + cfg.m);
        let mut item = 0;
        while ticket > degree[item] {
            ticket -= degree[item] + 1;
            item += 1;
        }
        let cell = item * cfg.n + b;
        if present[cell] {
            continue;
        }
        present[cell] = true;
        degree[item] += 1;
        placed += 1;
    }

    let quality: Vec<f64> = (0..cfg.m).map(|_| rng.uniform_open_zero(cfg.q_max)).collect();

    let mut edges = Vec::with_capacity(cfg.e);
    for i in 0..cfg.m {
        let Some(price) = popularity_market_price(quality[i], degree[i]) else {
            continue;
        };
        for b in 0..cfg.n {
            if present[i * cfg.n + b] {
                edges.push(Edge::new(i, b, quantize(rng.valuation_near(price, cfg.d))));
            }
        }
    }
    Instance::new(cfg.m, cfg.n, &edges)
}
