//! Bounded-variable simplex over a dense tableau.
//!
//! Every row `r` of the constraint matrix gets a logical variable
//! `w_r = a_r . x` carrying the row's bounds, so the system is
//! `[A | -I] (x; w) = 0` and all limits live in variable bounds. The tableau
//! `T = B^-1 [A | -I]` is stored row-major; the reduced-cost row is updated
//! with every pivot.
//!
//! The primal method handles any starting basis: while some basic variable
//! is out of bounds it maximizes the (negated) sum of infeasibilities with
//! breakpoint-limited steps, then optimizes the real objective. A dual
//! simplex is available for re-optimizing after bound changes, which is how
//! branch-and-bound warm-starts child nodes.

use std::sync::Arc;
use std::time::Instant;

/// Entries below this magnitude are not used as pivots.
const PIVOT_TOL: f64 = 1e-9;
/// Tableau entries below this magnitude are flushed to zero.
const DROP_TOL: f64 = 1e-14;
/// Base primal feasibility tolerance, scaled by `1 + |bound|`.
const FEAS_TOL: f64 = 1e-9;
/// Base dual (reduced-cost) tolerance, scaled by the largest cost magnitude.
const DUAL_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const BLAND_AFTER: usize = 1000;
/// Pivots between refreshes of the basic values from the nonbasic ones.
const REFRESH_EVERY: usize = 200;
/// Tableau rebuilds allowed per primal pass before giving up.
const MAX_REBUILDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Limits {
    pub max_iterations: u64,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_iterations: 1_000_000,
            deadline: None,
        }
    }
}

/// Row-wise sparse constraint matrix with row and column bounds.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub num_cols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub row_lo: Vec<f64>,
    pub row_hi: Vec<f64>,
    pub col_lo: Vec<f64>,
    pub col_hi: Vec<f64>,
    /// Objective to maximize.
    pub cost: Vec<f64>,
}

const NOT_BASIC: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    m: usize,
    n: usize,
    width: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    row_of: Vec<usize>,
    rows: Arc<Vec<Vec<(usize, f64)>>>,
    dual_tol: f64,
    degenerate_run: usize,
    since_refresh: usize,
    pub iterations: u64,
}

impl Simplex {
    /// Slack basis: all logicals basic, structurals at a finite bound.
    pub fn new(p: &Problem) -> Self {
        let m = p.rows.len();
        let n = p.num_cols;
        let width = n + m;
        let mut t = vec![0.0; m * width];
        for (r, row) in p.rows.iter().enumerate() {
            for &(j, a) in row {
                t[r * width + j] -= a;
            }
            t[r * width + n + r] = 1.0;
        }
        let mut lo = p.col_lo.clone();
        lo.extend_from_slice(&p.row_lo);
        let mut hi = p.col_hi.clone();
        hi.extend_from_slice(&p.row_hi);
        let mut cost = p.cost.clone();
        cost.resize(width, 0.0);

        let mut x = vec![0.0; width];
        for j in 0..n {
            x[j] = resting_value(lo[j], hi[j]);
        }
        let max_cost = cost.iter().fold(1.0_f64, |a, c| a.max(c.abs()));
        let mut s = Self {
            m,
            n,
            width,
            t,
            d: cost.clone(),
            cost,
            lo,
            hi,
            x,
            head: (n..width).collect(),
            row_of: (0..width).map(|j| if j >= n { j - n } else { NOT_BASIC }).collect(),
            rows: Arc::new(p.rows.clone()),
            dual_tol: DUAL_TOL * max_cost,
            degenerate_run: 0,
            since_refresh: 0,
            iterations: 0,
        };
        s.refresh_basic_values();
        s
    }

    pub fn structural_values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub fn memory_bytes(&self) -> usize {
        (self.t.len() + 5 * self.width) * std::mem::size_of::<f64>()
    }

    /// Replaces the bounds of structural column `j`, keeping the basis.
    pub fn set_column_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.row_of[j] == NOT_BASIC {
            let old = self.x[j];
            let new = if old <= lo {
                lo
            } else if old >= hi {
                hi
            } else if lo == hi {
                lo
            } else {
                old
            };
            let delta = new - old;
            if delta != 0.0 {
                self.x[j] = new;
                for r in 0..self.m {
                    let a = self.t[r * self.width + j];
                    if a != 0.0 {
                        self.x[self.head[r]] -= a * delta;
                    }
                }
            }
        }
    }

    /// Runs the primal method to optimality from the current basis.
    pub fn solve_primal(&mut self, limits: &Limits) -> Outcome {
        let mut repairs = 0;
        loop {
            let res = self.primal_loop(limits);
            if res != Outcome::Optimal && res != Outcome::Infeasible {
                return res;
            }
            // verify against the original rows; rebuild the tableau on drift
            if self.max_residual() <= 1e-9 || repairs >= 3 {
                return res;
            }
            repairs += 1;
            // a singular basis falls back to the slack basis, which is always valid
            self.reinvert();
        }
    }

    /// Re-optimizes after bound changes: dual simplex when the basis is dual
    /// feasible, then a primal pass to clean up.
    pub fn resolve(&mut self, limits: &Limits) -> Outcome {
        if self.is_dual_feasible() {
            let cap = Limits {
                max_iterations: limits
                    .max_iterations
                    .min(self.iterations + 20 * (self.m + self.n) as u64),
                deadline: limits.deadline,
            };
            match self.dual_loop(&cap) {
                Outcome::Infeasible => {
                    if self.max_residual() <= 1e-9 {
                        return Outcome::Infeasible;
                    }
                    self.reinvert();
                }
                Outcome::Limit if self.iterations >= limits.max_iterations => return Outcome::Limit,
                Outcome::Limit if deadline_passed(limits) => return Outcome::Limit,
                _ => {}
            }
        }
        self.solve_primal(limits)
    }

    fn tol(bound: f64) -> f64 {
        FEAS_TOL * (1.0 + bound.abs())
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.hi[j] - self.lo[j] <= 0.0
    }

    fn is_dual_feasible(&self) -> bool {
        (0..self.width).all(|j| {
            if self.row_of[j] != NOT_BASIC || self.is_fixed(j) {
                return true;
            }
            let dj = self.d[j];
            let at_lo = self.x[j] <= self.lo[j];
            let at_hi = self.x[j] >= self.hi[j];
            (!(dj > self.dual_tol) || at_hi) && (!(dj < -self.dual_tol) || at_lo)
        })
    }

    /// Infeasibility direction of the basic variable in row `r`: +1 below
    /// its lower bound, -1 above its upper bound.
    fn infeasibility(&self, r: usize) -> f64 {
        let j = self.head[r];
        let v = self.x[j];
        if v < self.lo[j] - Self::tol(self.lo[j]) {
            1.0
        } else if v > self.hi[j] + Self::tol(self.hi[j]) {
            -1.0
        } else {
            0.0
        }
    }

    fn primal_loop(&mut self, limits: &Limits) -> Outcome {
        let mut phase_costs = vec![0.0; self.width];
        let mut rebuilds = 0;
        loop {
            if self.iterations >= limits.max_iterations || deadline_passed(limits) {
                return Outcome::Limit;
            }
            if self.since_refresh >= REFRESH_EVERY {
                self.refresh_basic_values();
            }

            let infeasible: Vec<(usize, f64)> = (0..self.m)
                .filter_map(|r| {
                    let g = self.infeasibility(r);
                    (g != 0.0).then_some((r, g))
                })
                .collect();
            let phase_one = !infeasible.is_empty();
            let bland = self.degenerate_run >= BLAND_AFTER;

            let dj_of: &[f64] = if phase_one {
                phase_costs.iter_mut().for_each(|c| *c = 0.0);
                for &(r, g) in &infeasible {
                    let row = &self.t[r * self.width..(r + 1) * self.width];
                    for (c, &a) in phase_costs.iter_mut().zip(row) {
                        if a != 0.0 {
                            *c -= g * a;
                        }
                    }
                }
                &phase_costs
            } else {
                &self.d
            };
            let tol = if phase_one { 1e-11 } else { self.dual_tol };

            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.width {
                if self.row_of[j] != NOT_BASIC || self.is_fixed(j) {
                    continue;
                }
                let dj = dj_of[j];
                let dir = if dj > tol && self.x[j] < self.hi[j] {
                    1.0
                } else if dj < -tol && self.x[j] > self.lo[j] {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return if phase_one {
                    Outcome::Infeasible
                } else {
                    Outcome::Optimal
                };
            };

            match self.primal_ratio(q, dir, phase_one, bland) {
                Step::Unlimited => {
                    if phase_one {
                        // cannot happen in exact arithmetic; rebuild and retry
                        rebuilds += 1;
                        if rebuilds > MAX_REBUILDS {
                            return Outcome::Limit;
                        }
                        self.reinvert();
                        continue;
                    }
                    return Outcome::Unbounded;
                }
                Step::Flip(theta) => {
                    self.move_nonbasic(q, dir * theta);
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                    self.iterations += 1;
                    self.degenerate_run = 0;
                }
                Step::Pivot { row, theta, target } => {
                    self.move_nonbasic(q, dir * theta);
                    let leaving = self.head[row];
                    self.x[leaving] = target;
                    self.pivot(row, q);
                    if theta <= 1e-12 {
                        self.degenerate_run += 1;
                    } else {
                        self.degenerate_run = 0;
                    }
                }
            }
        }
    }

    fn primal_ratio(&self, q: usize, dir: f64, phase_one: bool, bland: bool) -> Step {
        let w = self.width;
        let flip = self.hi[q] - self.lo[q];
        // candidates: (row, exact ratio, relaxed ratio, |alpha|, target)
        let mut cands: Vec<(usize, f64, f64, f64, f64)> = Vec::new();
        for r in 0..self.m {
            let alpha = self.t[r * w + q] * dir;
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.head[r];
            let (v, lo, hi) = (self.x[j], self.lo[j], self.hi[j]);
            let (tl, th) = (Self::tol(lo), Self::tol(hi));
            if alpha > 0.0 {
                // basic value decreases
                let target = if phase_one && v > hi + th {
                    hi
                } else if v >= lo - tl {
                    lo
                } else {
                    continue;
                };
                if !target.is_finite() {
                    continue;
                }
                let slack = if target == lo { tl } else { th };
                cands.push((r, ((v - target) / alpha).max(0.0), (v - target + slack) / alpha, alpha, target));
            } else {
                let target = if phase_one && v < lo - tl {
                    lo
                } else if v <= hi + th {
                    hi
                } else {
                    continue;
                };
                if !target.is_finite() {
                    continue;
                }
                let slack = if target == hi { th } else { tl };
                cands.push((r, ((target - v) / -alpha).max(0.0), (target - v + slack) / -alpha, -alpha, target));
            }
        }

        let chosen = if bland {
            let min = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            cands
                .iter()
                .filter(|c| c.1 <= min + 1e-12)
                .min_by_key(|c| self.head[c.0])
                .copied()
        } else {
            // Harris: widest pivot among rows within the relaxed step
            let bound = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            cands
                .iter()
                .filter(|c| c.1 <= bound)
                .max_by(|a, b| a.3.total_cmp(&b.3))
                .copied()
        };

        match chosen {
            Some((row, theta, _, _, target)) => {
                if flip.is_finite() && flip <= theta {
                    Step::Flip(flip)
                } else {
                    Step::Pivot { row, theta, target }
                }
            }
            None if flip.is_finite() => Step::Flip(flip),
            None => Step::Unlimited,
        }
    }

    fn dual_loop(&mut self, limits: &Limits) -> Outcome {
        loop {
            if self.iterations >= limits.max_iterations || deadline_passed(limits) {
                return Outcome::Limit;
            }
            if self.since_refresh >= REFRESH_EVERY {
                self.refresh_basic_values();
            }

            // leaving row: largest bound violation
            let mut leave: Option<(usize, f64)> = None;
            let mut worst = 0.0;
            for r in 0..self.m {
                let j = self.head[r];
                let v = self.x[j];
                let (viol, target) = if v < self.lo[j] - Self::tol(self.lo[j]) {
                    (self.lo[j] - v, self.lo[j])
                } else if v > self.hi[j] + Self::tol(self.hi[j]) {
                    (v - self.hi[j], self.hi[j])
                } else {
                    continue;
                };
                if viol > worst {
                    worst = viol;
                    leave = Some((r, target));
                }
            }
            let Some((r, target)) = leave else {
                return Outcome::Optimal;
            };
            let delta = target - self.x[self.head[r]];
            let s = delta.signum();

            let w = self.width;
            let row = &self.t[r * w..(r + 1) * w];
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..w {
                if self.row_of[j] != NOT_BASIC || self.is_fixed(j) {
                    continue;
                }
                let a = row[j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let can_up = self.x[j] < self.hi[j];
                let can_down = self.x[j] > self.lo[j];
                let ok = (can_up && a * s < 0.0) || (can_down && a * s > 0.0);
                if ok {
                    cands.push((j, self.d[j].abs() / a.abs(), a.abs()));
                }
            }
            if cands.is_empty() {
                return Outcome::Infeasible;
            }
            let min = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            let slack = self.dual_tol / cands.iter().map(|c| c.2).fold(0.0, f64::max).max(1e-300);
            let q = cands
                .iter()
                .filter(|c| c.1 <= min + slack.max(1e-12))
                .max_by(|a, b| a.2.total_cmp(&b.2))
                .map(|c| c.0)
                .expect("non-empty");

            let alpha = self.t[r * w + q];
            let step = -delta / alpha;
            let leaving = self.head[r];
            self.move_nonbasic(q, step);
            self.x[leaving] = target;
            self.pivot(r, q);
        }
    }

    /// Moves nonbasic `q` by `delta` and updates the basic values.
    fn move_nonbasic(&mut self, q: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        self.x[q] += delta;
        for r in 0..self.m {
            let a = self.t[r * self.width + q];
            if a != 0.0 {
                self.x[self.head[r]] -= a * delta;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.t[r * w + q];
        let mut prow: Vec<(usize, f64)> = Vec::new();
        for j in 0..w {
            let v = self.t[r * w + j];
            if v != 0.0 {
                let nv = v / piv;
                self.t[r * w + j] = nv;
                prow.push((j, nv));
            }
        }
        self.t[r * w + q] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for &(j, v) in &prow {
                let nv = row[j] - f * v;
                row[j] = if nv.abs() < DROP_TOL { 0.0 } else { nv };
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(j, v) in &prow {
                self.d[j] -= f * v;
            }
        }
        self.d[q] = 0.0;

        let leaving = self.head[r];
        self.row_of[leaving] = NOT_BASIC;
        self.row_of[q] = r;
        self.head[r] = q;
        self.iterations += 1;
        self.since_refresh += 1;
    }

    /// Recomputes the basic values from the nonbasic ones.
    fn refresh_basic_values(&mut self) {
        let w = self.width;
        for r in 0..self.m {
            let row = &self.t[r * w..(r + 1) * w];
            let mut v = 0.0;
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 && self.row_of[j] == NOT_BASIC {
                    v -= a * self.x[j];
                }
            }
            self.x[self.head[r]] = v;
        }
        self.since_refresh = 0;
    }

    /// Largest violation of `a_r . x = w_r` measured on the original rows,
    /// relative to the row activity.
    fn max_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (r, row) in self.rows.iter().enumerate() {
            let act: f64 = row.iter().map(|&(j, a)| a * self.x[j]).sum();
            let wv = self.x[self.n + r];
            worst = worst.max((act - wv).abs() / (1.0 + wv.abs()));
        }
        worst
    }

    /// Rebuilds the tableau from the original matrix for the current basis.
    /// A numerically singular basis is replaced by the slack basis.
    fn reinvert(&mut self) {
        let (m, w, n) = (self.m, self.width, self.n);
        let mut t = vec![0.0; m * w];
        for (r, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                t[r * w + j] = a;
            }
            t[r * w + n + r] = -1.0;
        }
        let basics = self.head.clone();
        let mut assigned = vec![false; m];
        let mut head = vec![NOT_BASIC; m];
        for &c in &basics {
            let mut best = (0.0, NOT_BASIC);
            for r in 0..m {
                if !assigned[r] && t[r * w + c].abs() > best.0 {
                    best = (t[r * w + c].abs(), r);
                }
            }
            if best.0 < 1e-11 {
                self.reset_to_slack_basis();
                return;
            }
            let r = best.1;
            assigned[r] = true;
            head[r] = c;
            let piv = t[r * w + c];
            let mut prow = Vec::new();
            for j in 0..w {
                let v = t[r * w + j];
                if v != 0.0 {
                    t[r * w + j] = v / piv;
                    prow.push((j, v / piv));
                }
            }
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = t[i * w + c];
                if f == 0.0 {
                    continue;
                }
                for &(j, v) in &prow {
                    t[i * w + j] -= f * v;
                }
                t[i * w + c] = 0.0;
            }
        }
        self.t = t;
        self.head = head;
        self.row_of = vec![NOT_BASIC; w];
        for (r, &j) in self.head.iter().enumerate() {
            self.row_of[j] = r;
        }
        self.recompute_reduced_costs();
        self.refresh_basic_values();
        self.degenerate_run = 0;
    }

    fn reset_to_slack_basis(&mut self) {
        let (m, w, n) = (self.m, self.width, self.n);
        let mut t = vec![0.0; m * w];
        for (r, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                t[r * w + j] -= a;
            }
            t[r * w + n + r] = 1.0;
        }
        self.t = t;
        self.head = (n..w).collect();
        self.row_of = (0..w).map(|j| if j >= n { j - n } else { NOT_BASIC }).collect();
        for j in 0..n {
            if self.x[j] < self.lo[j] || self.x[j] > self.hi[j] || !self.x[j].is_finite() {
                self.x[j] = resting_value(self.lo[j], self.hi[j]);
            }
        }
        self.d = self.cost.clone();
        self.refresh_basic_values();
        self.degenerate_run = 0;
    }

    fn recompute_reduced_costs(&mut self) {
        let w = self.width;
        let mut d = self.cost.clone();
        for r in 0..self.m {
            let cb = self.cost[self.head[r]];
            if cb == 0.0 {
                continue;
            }
            for (dj, &a) in d.iter_mut().zip(&self.t[r * w..(r + 1) * w]) {
                *dj -= cb * a;
            }
        }
        for &j in &self.head {
            d[j] = 0.0;
        }
        self.d = d;
    }
}

enum Step {
    Unlimited,
    Flip(f64),
    Pivot { row: usize, theta: f64, target: f64 },
}

fn resting_value(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

fn deadline_passed(limits: &Limits) -> bool {
    limits.deadline.is_some_and(|d| Instant::now() >= d)
}
