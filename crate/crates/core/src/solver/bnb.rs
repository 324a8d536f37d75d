use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, info};

use crate::allocation::{envy_free_allocation, Outcome};
use crate::error::{Error, Result};
use crate::formulations::{embed_with_layout, outcome_from_layout, Layout, MipModel, VarId, ASSIGNMENT_TOL};
use crate::instance::{Instance, Pricing};

use super::lp::{to_problem, LpSolution};
use super::simplex::{self, Limits, Problem, Simplex};

/// Relative gap at or below which a solve counts as optimal.
pub const GAP_TOL: f64 = 1e-6;
/// Nodes whose bound is within this relative margin of the incumbent are
/// pruned. Kept well below [`GAP_TOL`] so that optimal values from
/// different formulations agree tightly.
const PRUNE_TOL: f64 = 1e-9;
/// Fractionality below which an integer variable counts as integral.
const INT_TOL: f64 = 1e-6;
/// Open-node count beyond which new children are explored depth first.
const DEPTH_FIRST_AFTER: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct MipLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Bytes of parent tableaus kept around to warm-start children.
    pub warm_start_budget: usize,
}

impl Default for MipLimits {
    fn default() -> Self {
        Self {
            time_limit: None,
            node_limit: None,
            warm_start_budget: 512 << 20,
        }
    }
}

impl MipLimits {
    pub fn with_time_limit(secs: f64) -> Self {
        Self {
            time_limit: Some(Duration::from_secs_f64(secs.max(0.0))),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    /// Proven within [`GAP_TOL`].
    Optimal,
    /// Stopped at a limit with an incumbent.
    Feasible,
    /// Proven infeasible.
    Infeasible,
    /// Stopped at a limit without any incumbent.
    Unknown,
}

impl MipStatus {
    pub fn name(self) -> &'static str {
        match self {
            MipStatus::Optimal => "optimal",
            MipStatus::Feasible => "feasible",
            MipStatus::Infeasible => "infeasible",
            MipStatus::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MipResult {
    pub status: MipStatus,
    /// Pricing and allocation of the incumbent, when the model has the
    /// standard variable layout.
    pub incumbent: Option<Outcome>,
    /// Model assignment of the incumbent.
    pub values: Option<Vec<f64>>,
    /// Incumbent objective, `-inf` without one.
    pub objective: f64,
    /// Proven upper bound on the optimum.
    pub bound: f64,
    /// `(bound - objective) / max(1, |objective|)`.
    pub gap: f64,
    pub nodes: u64,
    pub lp_iterations: u64,
    pub wall: Duration,
    /// Root relaxation value, if the root LP finished.
    pub root_bound: Option<f64>,
    pub root_seconds: f64,
}

pub fn relative_gap(bound: f64, incumbent: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    ((bound - incumbent) / incumbent.abs().max(1.0)).max(0.0)
}

struct Node {
    bound: f64,
    depth: u32,
    id: u64,
    /// Bound changes `(var, lower, upper)` from the root, latest last.
    fixes: Vec<(VarId, f64, f64)>,
    warm: Option<Arc<Simplex>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: higher bound, then deeper, then older
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

struct Incumbent {
    objective: f64,
    values: Option<Vec<f64>>,
    outcome: Option<Outcome>,
}

impl Incumbent {
    fn offer(&mut self, objective: f64, values: Vec<f64>, outcome: Option<Outcome>) -> bool {
        if objective > self.objective + PRUNE_TOL * self.objective.abs().max(1.0) || self.values.is_none() {
            debug!("incumbent {objective}");
            self.objective = objective;
            self.values = Some(values);
            self.outcome = outcome;
            true
        } else {
            false
        }
    }

    fn prunes(&self, bound: f64) -> bool {
        self.values.is_some() && bound <= self.objective + PRUNE_TOL * self.objective.abs().max(1.0)
    }
}

/// Rounds an LP point to an envy-free outcome: reads its prices and lets
/// every bidder take its preferred item. Returns the outcome together with
/// its embedding in `model`, or `None` if the embedding is infeasible.
fn heuristic_point(
    inst: &Instance,
    model: &MipModel,
    layout: &Layout,
    lp_values: &[f64],
) -> Option<(Outcome, Vec<f64>, f64)> {
    let prices = layout.p.iter().map(|&id| lp_values[id].max(0.0)).collect();
    let pricing = Pricing::for_instance(inst, prices).ok()?;
    let outcome = envy_free_allocation(inst, &pricing).ok()?;
    let values = embed_with_layout(inst, model, layout, &outcome);
    if model.worst_violation(&values, ASSIGNMENT_TOL).is_some() {
        return None;
    }
    let obj = model.objective_value(&values);
    Some((outcome, values, obj))
}

/// The envy-free outcome obtained from the prices of an LP solution.
pub fn primal_heuristic(inst: &Instance, model: &MipModel, lp: &LpSolution) -> Result<Outcome> {
    let layout = Layout::detect(model, inst.num_items(), inst.num_bidders())?;
    let prices = layout.p.iter().map(|&id| lp.values[id].max(0.0)).collect();
    envy_free_allocation(inst, &Pricing::for_instance(inst, prices)?)
}

/// Picks the integer variable to branch on: most fractional, ties to the
/// larger value, then the lower index.
fn branching_variable(model: &MipModel, values: &[f64]) -> Option<VarId> {
    let mut best: Option<(VarId, f64, f64)> = None;
    for (j, v) in model.variables.iter().enumerate() {
        if !v.integer {
            continue;
        }
        let x = values[j];
        let frac = (x - x.floor()).min(x.ceil() - x);
        if frac <= INT_TOL {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, bf, bx)) => frac > bf + 1e-12 || ((frac - bf).abs() <= 1e-12 && x > bx),
        };
        if better {
            best = Some((j, frac, x));
        }
    }
    best.map(|b| b.0)
}

/// Solves `model` by LP-based branch-and-bound.
///
/// `inst` supplies the market behind the model. When the model has the
/// standard variable names, every node's LP prices are turned into an
/// envy-free outcome to find incumbents early.
pub fn solve_mip(model: &MipModel, inst: &Instance, limits: &MipLimits) -> Result<MipResult> {
    model.validate()?;
    let start = Instant::now();
    let deadline = limits.time_limit.map(|t| start + t);
    let lp_limits = Limits {
        max_iterations: u64::MAX,
        deadline,
    };
    let layout = Layout::detect(model, inst.num_items(), inst.num_bidders()).ok();
    let trivial_bound = match &layout {
        Some(_) => inst.derive_constants().bidder_max.iter().sum(),
        None => f64::INFINITY,
    };
    let problem: Problem = to_problem(model);

    let mut inc = Incumbent {
        objective: f64::NEG_INFINITY,
        values: None,
        outcome: None,
    };
    if let Some(layout) = &layout {
        // selling every item at its highest valuation is always feasible
        let top: Vec<f64> = inst.derive_constants().item_max;
        let seed: Vec<f64> = {
            let mut v = vec![0.0; model.num_vars()];
            for (i, &id) in layout.p.iter().enumerate() {
                v[id] = top[i];
            }
            v
        };
        if let Some((outcome, values, obj)) = heuristic_point(inst, model, layout, &seed) {
            inc.offer(obj, values, Some(outcome));
        }
    }

    let mut heap = BinaryHeap::new();
    let mut dive: Vec<Node> = Vec::new();
    let mut next_id = 0u64;
    heap.push(Node {
        bound: f64::INFINITY,
        depth: 0,
        id: 0,
        fixes: Vec::new(),
        warm: None,
    });
    let mut closed_bound = f64::NEG_INFINITY;
    let mut leftover_bound = f64::NEG_INFINITY;
    let mut warm_bytes = 0usize;
    let mut nodes = 0u64;
    let mut lp_iterations = 0u64;
    let mut root_bound = None;
    let mut root_seconds = 0.0;
    let mut stopped = false;

    while let Some(node) = dive.pop().or_else(|| heap.pop()) {
        if inc.prunes(node.bound) {
            closed_bound = closed_bound.max(node.bound);
            if let Some(w) = node.warm {
                if Arc::strong_count(&w) == 1 {
                    warm_bytes -= w.memory_bytes();
                }
            }
            continue;
        }
        let out_of_time = deadline.is_some_and(|d| Instant::now() >= d);
        let out_of_nodes = limits.node_limit.is_some_and(|k| nodes >= k);
        if out_of_time || out_of_nodes {
            leftover_bound = leftover_bound.max(node.bound);
            stopped = true;
            break;
        }
        nodes += 1;

        let t0 = Instant::now();
        let (mut lp, mut outcome) = match node.warm {
            Some(w) => {
                let mut lp = match Arc::try_unwrap(w) {
                    Ok(s) => {
                        warm_bytes -= s.memory_bytes();
                        s
                    }
                    Err(shared) => (*shared).clone(),
                };
                let before = lp.iterations;
                let &(j, lo, hi) = node.fixes.last().expect("warm nodes carry a branching decision");
                lp.set_column_bounds(j, lo, hi);
                let o = lp.resolve(&lp_limits);
                lp_iterations += lp.iterations - before;
                (lp, o)
            }
            None => {
                let mut lp = Simplex::new(&problem);
                for &(j, lo, hi) in &node.fixes {
                    lp.set_column_bounds(j, lo, hi);
                }
                let o = lp.solve_primal(&lp_limits);
                lp_iterations += lp.iterations;
                (lp, o)
            }
        };
        if outcome == simplex::Outcome::Limit && node.depth > 0 && !deadline.is_some_and(|d| Instant::now() >= d) {
            // numerical trouble on a warm start: retry from scratch
            lp = Simplex::new(&problem);
            for &(j, lo, hi) in &node.fixes {
                lp.set_column_bounds(j, lo, hi);
            }
            outcome = lp.solve_primal(&lp_limits);
            lp_iterations += lp.iterations;
        }
        if node.depth == 0 {
            root_seconds = t0.elapsed().as_secs_f64();
        }

        match outcome {
            simplex::Outcome::Infeasible => continue,
            simplex::Outcome::Unbounded => {
                return Err(Error::Lp("linear relaxation is unbounded".into()));
            }
            simplex::Outcome::Limit => {
                leftover_bound = leftover_bound.max(node.bound);
                stopped = true;
                break;
            }
            simplex::Outcome::Optimal => {}
        }
        let z = lp.objective().min(node.bound);
        if node.depth == 0 {
            root_bound = Some(z);
            info!("root relaxation {z:.6} in {root_seconds:.3}s");
        }
        let values = lp.structural_values().to_vec();

        if let Some(layout) = &layout {
            if let Some((outcome, point, obj)) = heuristic_point(inst, model, layout, &values) {
                inc.offer(obj, point, Some(outcome));
            }
        }
        if inc.prunes(z) {
            closed_bound = closed_bound.max(z);
            continue;
        }

        let Some(j) = branching_variable(model, &values) else {
            // integral: the LP point itself is feasible

            if model.worst_violation(&values, ASSIGNMENT_TOL).is_none() {
                let mut point = values.clone();
                for (k, v) in model.variables.iter().enumerate() {
                    if v.integer {
                        point[k] = point[k].round();
                    }
                }
                let outcome = layout
                    .as_ref()
                    .and_then(|l| outcome_from_layout(inst, l, &point).ok());
                let obj = model.objective_value(&point);
                inc.offer(obj, point, outcome);
            }
            closed_bound = closed_bound.max(z);
            continue;
        };

        let warm = if warm_bytes + lp.memory_bytes() <= limits.warm_start_budget {
            warm_bytes += lp.memory_bytes();
            Some(Arc::new(lp))
        } else {
            None
        };
        let go_deep = heap.len() + dive.len() > DEPTH_FIRST_AFTER;
        let x = values[j];
        let (lo, hi) = node
            .fixes
            .iter()
            .rev()
            .find(|f| f.0 == j)
            .map_or((model.variables[j].lower, model.variables[j].upper), |f| (f.1, f.2));
        let down = (j, lo, x.floor());
        let up = (j, x.ceil(), hi);
        // the child nearer the LP value comes first
        let order = if x - x.floor() >= 0.5 { [up, down] } else { [down, up] };
        let mut children = Vec::with_capacity(2);
        for fix in order {
            next_id += 1;
            let mut fixes = node.fixes.clone();
            fixes.push(fix);
            let child = Node {
                bound: z,
                depth: node.depth + 1,
                id: next_id,
                fixes,
                warm: warm.clone(),
            };
            children.push(child);
        }
        if go_deep {
            dive.extend(children.into_iter().rev());
        } else {
            heap.extend(children);
        }
    }

    let open_bound = heap
        .iter()
        .chain(dive.iter())
        .map(|n| n.bound)
        .fold(leftover_bound, f64::max);
    let mut bound = closed_bound.max(open_bound).max(inc.objective);
    if stopped && root_bound.is_none() {
        bound = trivial_bound.max(inc.objective);
    }
    bound = bound.min(trivial_bound.max(inc.objective));
    let gap = relative_gap(bound, inc.objective);
    let status = match (&inc.values, stopped) {
        (None, false) => MipStatus::Infeasible,
        (None, true) => MipStatus::Unknown,
        (Some(_), _) if gap <= GAP_TOL => MipStatus::Optimal,
        (Some(_), _) => MipStatus::Feasible,
    };
    let wall = start.elapsed();
    info!(
        "{} after {nodes} nodes in {:.3}s: incumbent {}, bound {bound}",
        status.name(),
        wall.as_secs_f64(),
        inc.objective
    );
    Ok(MipResult {
        status,
        incumbent: inc.outcome,
        values: inc.values,
        objective: inc.objective,
        bound: if status == MipStatus::Infeasible { f64::NEG_INFINITY } else { bound },
        gap,
        nodes,
        lp_iterations,
        wall,
        root_bound,
        root_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{build, FormulationKind, Relation};
    use crate::instance::worked_example;

    #[test]
    fn worked_example_optimum_in_every_formulation() {
        let inst = worked_example();
        for kind in FormulationKind::ALL {
            let model = build(&inst, kind);
            let r = solve_mip(&model, &inst, &MipLimits::default()).unwrap();
            assert_eq!(r.status, MipStatus::Optimal, "{kind}");
            assert!((r.objective - 21.0).abs() < 1e-6, "{kind}: {}", r.objective);
            assert!((r.incumbent.unwrap().profit - 21.0).abs() < 1e-6);
            assert!(model.worst_violation(r.values.as_ref().unwrap(), 1e-6).is_none());
        }
    }

    #[test]
    fn pure_integer_knapsack() {
        // max 5a + 4b + 3c, 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        let mut m = MipModel::default();
        for name in ["a", "b", "c"] {
            m.add_var(name.into(), 0.0, 10.0, true);
        }
        m.objective = vec![(0, 5.0), (1, 4.0), (2, 3.0)];
        m.add_constraint("r1".into(), vec![(0, 2.0), (1, 3.0), (2, 1.0)], Relation::Le, 5.0);
        m.add_constraint("r2".into(), vec![(0, 4.0), (1, 1.0), (2, 2.0)], Relation::Le, 11.0);
        m.add_constraint("r3".into(), vec![(0, 3.0), (1, 4.0), (2, 2.0)], Relation::Le, 8.0);
        let inst = worked_example();
        let r = solve_mip(&m, &inst, &MipLimits::default()).unwrap();
        assert_eq!(r.status, MipStatus::Optimal);
        assert!((r.objective - 13.0).abs() < 1e-9, "{}", r.objective);
        assert!(r.incumbent.is_none());
    }

    #[test]
    fn fractional_branching_reaches_integer_optimum() {
        // max x + y, 2x + 2y <= 3 with binaries: LP 1.5, MIP 1
        let mut m = MipModel::default();
        m.add_binary("x".into());
        m.add_binary("y".into());
        m.objective = vec![(0, 1.0), (1, 1.0)];
        m.add_constraint("r".into(), vec![(0, 2.0), (1, 2.0)], Relation::Le, 3.0);
        let r = solve_mip(&m, &worked_example(), &MipLimits::default()).unwrap();
        assert_eq!(r.status, MipStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-9);
        assert!((r.root_bound.unwrap() - 1.5).abs() < 1e-9);
        assert!(r.nodes >= 3);
    }

    #[test]
    fn infeasible_model() {
        let mut m = MipModel::default();
        m.add_binary("x".into());
        m.add_constraint("r".into(), vec![(0, 2.0)], Relation::Eq, 1.0);
        let r = solve_mip(&m, &worked_example(), &MipLimits::default()).unwrap();
        assert_eq!(r.status, MipStatus::Infeasible);
        assert!(r.values.is_none());
    }

    #[test]
    fn node_limit_keeps_bound_honest() {
        let inst = worked_example();
        let model = build(&inst, FormulationKind::Stm);
        let r = solve_mip(
            &model,
            &inst,
            &MipLimits {
                node_limit: Some(1),
                ..MipLimits::default()
            },
        )
        .unwrap();
        assert!(r.bound >= 21.0 - 1e-9);
        assert!(r.objective <= 21.0 + 1e-9);
        assert!(r.nodes <= 1);
    }

    #[test]
    fn branching_rule() {
        let mut m = MipModel::default();
        for k in 0..4 {
            m.add_binary(format!("v{k}"));
        }
        assert_eq!(branching_variable(&m, &[0.0, 0.3, 0.7, 0.5]), Some(3));
        assert_eq!(branching_variable(&m, &[0.0, 0.3, 0.7, 1.0]), Some(2));
        assert_eq!(branching_variable(&m, &[0.0, 1.0, 0.0, 1.0]), None);
    }

    #[test]
    fn gap_definition() {
        assert_eq!(relative_gap(10.0, 10.0), 0.0);
        assert!((relative_gap(11.0, 10.0) - 0.1).abs() < 1e-15);
        assert!((relative_gap(0.5, 0.0) - 0.5).abs() < 1e-15);
        assert!(relative_gap(1.0, f64::NEG_INFINITY).is_infinite());
    }

    #[test]
    fn singular_warm_bases_do_not_end_the_search() {
        // this instance used to hit a singular basis deep in the STM tree
        let inst = crate::generators::preset(crate::generators::Model::Characteristics, 8)
            .unwrap()
            .generate(crate::generators::Seed(5))
            .unwrap();
        let stm = solve_mip(&build(&inst, FormulationKind::Stm), &inst, &MipLimits::default()).unwrap();
        let u = solve_mip(&build(&inst, FormulationKind::U), &inst, &MipLimits::default()).unwrap();
        assert_eq!(stm.status, MipStatus::Optimal);
        assert!((stm.objective - u.objective).abs() <= 1e-6, "{} vs {}", stm.objective, u.objective);
    }
}
