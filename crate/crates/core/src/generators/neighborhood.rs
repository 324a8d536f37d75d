use crate::error::{Error, Result};
use crate::instance::{quantize, Edge, Instance};

use super::rng::Stream;
use super::{check_dims, Seed};

/// Points closer than this are treated as coincident.
const COINCIDENT: f64 = 1e-12;

/// Geometric market on the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodConfig {
    pub m: usize,
    pub n: usize,
    /// Interest radius.
    pub r: f64,
    /// Largest bidder multiplier; multipliers are uniform on `[1, h]`.
    pub h: f64,
    /// Scaling factor `M`.
    pub scale: f64,
}

impl NeighborhoodConfig {
    pub fn validate(&self) -> Result<()> {
        check_dims(self.m, self.n)?;
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidConfig(format!("radius must be non-negative, got {}", self.r)));
        }
        if !(self.h >= 1.0 && self.h.is_finite()) {
            return Err(Error::InvalidConfig(format!("multiplier bound must be >= 1, got {}", self.h)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidConfig(format!("scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

/// Draw order: item points, then per bidder its point (redrawn while it
/// coincides with an item) and its multiplier.
pub fn gen_neighborhood(cfg: &NeighborhoodConfig, seed: Seed) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = Stream::new(seed.0);

    let items: Vec<(f64, f64)> = (0..cfg.m).map(|_| (rng.unit(), rng.unit())).collect();

    let mut edges = Vec::new();
    for b in 0..cfg.n {
        let at = loop {
            let pt = (rng.unit(), rng.unit());
            if items.iter().all(|&it| dist(it, pt) >= COINCIDENT) {
                break pt;
            }
        };
        let k = rng.uniform(1.0, cfg.h);
        for (i, &it) in items.iter().enumerate() {
            let d = dist(it, at);
            if d <= cfg.r {
                edges.push(Edge::new(i, b, quantize(1.0 + cfg.scale * k / d)));
            }
        }
    }
    Instance::new(cfg.m, cfg.n, &edges)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}
