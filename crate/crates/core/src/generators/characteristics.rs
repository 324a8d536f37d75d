use crate::error::{Error, Result};
use crate::instance::{quantize, Edge, Instance};

use super::rng::Stream;
use super::{check_dims, Seed};

/// Option-profile market.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicsConfig {
    pub m: usize,
    pub n: usize,
    /// Characteristics per item.
    pub c: usize,
    /// Options per characteristic.
    pub o: usize,
    /// Options a bidder accepts per characteristic.
    pub p_pref: usize,
    /// Lowest market price.
    pub ell: f64,
    /// Highest market price.
    pub h: f64,
    /// Relative standard deviation of valuations around the market price.
    pub d: f64,
}

impl CharacteristicsConfig {
    pub fn validate(&self) -> Result<()> {
        check_dims(self.m, self.n)?;
        if self.o == 0 || self.p_pref == 0 || self.p_pref > self.o {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= p <= o, got p={} o={}",
                self.p_pref, self.o
            )));
        }
        if !(self.ell.is_finite() && self.h.is_finite() && self.ell >= 0.0 && self.ell <= self.h) {
            return Err(Error::InvalidConfig(format!(
                "need 0 <= l <= h, got l={} h={}",
                self.ell, self.h
            )));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidConfig(format!("deviation must be positive, got {}", self.d)));
        }
        Ok(())
    }
}

/// Draw order: item profiles, bidder preference rows, market prices, then one
/// valuation per edge in `(item, bidder)` order.
pub fn gen_characteristics(cfg: &CharacteristicsConfig, seed: Seed) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = Stream::new(seed.0);

    let profiles: Vec<Vec<usize>> = (0..cfg.m)
        .map(|_| (0..cfg.c).map(|_| rng.index(cfg.o)).collect())
        .collect();

    // accepts[b][k * o + option]
    let accepts: Vec<Vec<bool>> = (0..cfg.n)
        .map(|_| {
            let mut row = vec![false; cfg.c * cfg.o];
            for k in 0..cfg.c {
                for opt in rng.choose(cfg.o, cfg.p_pref) {
                    row[k * cfg.o + opt] = true;
                }
            }
            row
        })
        .collect();

    let market: Vec<f64> = (0..cfg.m).map(|_| rng.uniform(cfg.ell, cfg.h)).collect();

    let mut edges = Vec::new();
    for (i, profile) in profiles.iter().enumerate() {
        for (b, acc) in accepts.iter().enumerate() {
            let matches = profile
                .iter()
                .enumerate()
                .all(|(k, &opt)| acc[k * cfg.o + opt]);
            if matches {
                edges.push(Edge::new(i, b, quantize(rng.valuation_near(market[i], cfg.d))));
            }
        }
    }
    Instance::new(cfg.m, cfg.n, &edges)
}
