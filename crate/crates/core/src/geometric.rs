//! Prices restricted to a geometric grid.
//!
//! The grid `D(V, 1+eps)` holds `d_k = V / (1+eps)^k` for `k >= 0`.
//! Rounding a pricing down onto the grid loses at most a constant factor of
//! the profit: [`round_pricing_half`] keeps at least a quarter of it and
//! [`round_pricing_eps`] keeps at least [`guarantee_factor`]`(eps)`.
//!
//! Two conventions extend the floor beyond the grid: arguments at or above
//! `V` map to `V`, and zero maps to zero.

use crate::error::{Error, Result};
use crate::instance::{Instance, Pricing};

/// Profit fraction kept by [`round_pricing_half`].
pub const HALF_GUARANTEE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricGrid {
    apex: f64,
    ratio: f64,
}

impl GeometricGrid {
    pub fn new(apex: f64, eps: f64) -> Result<Self> {
        if !(apex > 0.0 && apex.is_finite()) {
            return Err(Error::NonPositiveApex(apex));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidEpsilon(eps));
        }
        Ok(Self {
            apex,
            ratio: 1.0 + eps,
        })
    }

    /// The grid anchored at the largest valuation of `inst`.
    pub fn for_instance(inst: &Instance, eps: f64) -> Result<Self> {
        Self::new(inst.derive_constants().global_max, eps)
    }

    pub fn apex(&self) -> f64 {
        self.apex
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// `d_k`.
    pub fn element(&self, k: u32) -> f64 {
        self.apex / self.ratio.powi(k as i32)
    }

    /// The index `k` with `x = d_k` up to `tol` in log space, if any.
    pub fn index_of(&self, x: f64, tol: f64) -> Option<u32> {
        if x <= 0.0 {
            return None;
        }
        let k = (self.apex / x).ln() / self.ratio.ln();
        let r = k.round();
        ((k - r).abs() <= tol && r >= 0.0).then_some(r as u32)
    }

    /// Largest grid element `d_r <= x`, so that `d_r <= x < d_{r-1}`.
    pub fn floor(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.apex {
            return self.apex;
        }
        let mut r = ((self.apex / x).ln() / self.ratio.ln()).ceil().max(0.0) as u32;
        // the logarithm can land one step off near grid points
        while r > 0 && self.element(r - 1) <= x {
            r -= 1;
        }
        while self.element(r) > x {
            r += 1;
        }
        self.element(r)
    }
}

/// [`GeometricGrid::floor`] as a free function.
pub fn floor_geometric(x: f64, grid: &GeometricGrid) -> f64 {
    grid.floor(x)
}

/// `p~_i = floor(2 p_i / 3)` on the grid with ratio 2 anchored at the
/// largest valuation.
pub fn round_pricing_half(inst: &Instance, p: &Pricing) -> Result<Pricing> {
    p.check_len(inst)?;
    let grid = GeometricGrid::for_instance(inst, 1.0)?;
    Pricing::new(p.as_slice().iter().map(|&x| grid.floor(2.0 * x / 3.0)).collect())
}

/// Divisor applied to prices before flooring onto the `1+eps` grid.
pub fn eps_divisor(eps: f64) -> f64 {
    1.0 + (eps / (1.0 + eps)).sqrt()
}

/// `p~_i = floor(p_i / r)` on the grid with ratio `1+eps`, where
/// `r = 1 + sqrt(eps / (1+eps))`.
pub fn round_pricing_eps(inst: &Instance, p: &Pricing, eps: f64) -> Result<Pricing> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    p.check_len(inst)?;
    let grid = GeometricGrid::for_instance(inst, eps)?;
    let r = eps_divisor(eps);
    Pricing::new(p.as_slice().iter().map(|&x| grid.floor(x / r)).collect())
}

/// Profit fraction kept by [`round_pricing_eps`]:
/// `1 / (2 sqrt(eps (1+eps)) + 2 eps + 1)`.
pub fn guarantee_factor(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    Ok(1.0 / (2.0 * (eps * (1.0 + eps)).sqrt() + 2.0 * eps + 1.0))
}
