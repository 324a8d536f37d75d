use std::fmt;
use std::str::FromStr;

use crate::allocation::Outcome;
use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance, Pricing};

use super::model::{MipModel, Relation, VarId};

/// Tolerance for accepting a variable assignment as a MIP solution.
pub const ASSIGNMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormulationKind {
    /// Price-paid variables with envy rows over the other items.
    Stm,
    /// Price-paid variables with envy rows summed over all items.
    I,
    /// `I` without the `ph <= p` rows.
    L,
    /// One profit variable per bidder.
    P,
    /// One utility variable per bidder.
    U,
}

impl FormulationKind {
    pub const ALL: [FormulationKind; 5] = [
        FormulationKind::Stm,
        FormulationKind::I,
        FormulationKind::L,
        FormulationKind::P,
        FormulationKind::U,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulationKind::Stm => "STM",
            FormulationKind::I => "I",
            FormulationKind::L => "L",
            FormulationKind::P => "P",
            FormulationKind::U => "U",
        }
    }
}

impl fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "STM" | "S" => Ok(FormulationKind::Stm),
            "I" => Ok(FormulationKind::I),
            "L" => Ok(FormulationKind::L),
            "P" => Ok(FormulationKind::P),
            "U" | "F" => Ok(FormulationKind::U),
            other => Err(Error::InvalidConfig(format!("unknown formulation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Bound each price `p_i` above by the item's largest valuation. A price
    /// above it sells nothing, so no optimal outcome is lost.
    pub price_upper_bound: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            price_upper_bound: true,
        }
    }
}

/// Where each family of variables lives in a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub num_items: usize,
    pub num_bidders: usize,
    /// `x[item * n + bidder]`.
    pub x: Vec<VarId>,
    pub p: Vec<VarId>,
    pub ph: Option<Vec<VarId>>,
    pub z: Option<Vec<VarId>>,
    pub u: Option<Vec<VarId>>,
}

impl Layout {
    pub fn x(&self, item: usize, bidder: usize) -> VarId {
        self.x[item * self.num_bidders + bidder]
    }

    /// Recovers the layout from variable names (`x_i_b`, `p_i`, `ph_i_b`,
    /// `z_b`, `u_b`, 1-based), so models read back from text work too.
    pub fn detect(model: &MipModel, num_items: usize, num_bidders: usize) -> Result<Self> {
        let (m, n) = (num_items, num_bidders);
        let mut x = vec![usize::MAX; m * n];
        let mut p = vec![usize::MAX; m];
        let mut ph = vec![usize::MAX; m * n];
        let mut z = vec![usize::MAX; n];
        let mut u = vec![usize::MAX; n];
        let bad = |name: &str| Error::Lp(format!("variable `{name}` does not fit a {m}x{n} market"));
        for (id, v) in model.variables.iter().enumerate() {
            let mut parts = v.name.split('_');
            let family = parts.next().unwrap_or("");
            let idx: Vec<usize> = parts
                .map(|s| s.parse::<usize>().map_err(|_| bad(&v.name)))
                .collect::<Result<_>>()?;
            let slot = match (family, idx.as_slice()) {
                ("x", &[i, b]) if (1..=m).contains(&i) && (1..=n).contains(&b) => &mut x[(i - 1) * n + b - 1],
                ("ph", &[i, b]) if (1..=m).contains(&i) && (1..=n).contains(&b) => &mut ph[(i - 1) * n + b - 1],
                ("p", &[i]) if (1..=m).contains(&i) => &mut p[i - 1],
                ("z", &[b]) if (1..=n).contains(&b) => &mut z[b - 1],
                ("u", &[b]) if (1..=n).contains(&b) => &mut u[b - 1],
                _ => return Err(bad(&v.name)),
            };
            *slot = id;
        }
        let complete = |v: &[usize]| v.iter().all(|&id| id != usize::MAX);
        let family = |v: Vec<usize>| if complete(&v) { Some(v) } else { None };
        if !complete(&x) || !complete(&p) {
            return Err(Error::Lp("model lacks allocation or price variables".into()));
        }
        Ok(Self {
            num_items: m,
            num_bidders: n,
            x,
            p,
            ph: family(ph),
            z: family(z),
            u: family(u),
        })
    }
}

/// Builds formulation `kind` for `inst` with the default options.
pub fn build(inst: &Instance, kind: FormulationKind) -> MipModel {
    build_with(inst, kind, BuildOptions::default())
}

pub fn build_with(inst: &Instance, kind: FormulationKind, opts: BuildOptions) -> MipModel {
    Builder::new(inst, opts).build(kind)
}

struct Builder<'a> {
    inst: &'a Instance,
    opts: BuildOptions,
    r: Vec<f64>,
    s: Vec<f64>,
    // dense valuations, item-major
    v: Vec<f64>,
    model: MipModel,
}

impl<'a> Builder<'a> {
    fn new(inst: &'a Instance, opts: BuildOptions) -> Self {
        let c = inst.derive_constants();
        let n = inst.num_bidders();
        let mut v = vec![0.0; inst.num_items() * n];
        for e in inst.edges() {
            v[e.item * n + e.bidder] = e.value;
        }
        Self {
            inst,
            opts,
            r: c.item_max,
            s: c.bidder_max,
            v,
            model: MipModel::default(),
        }
    }

    fn v(&self, i: usize, b: usize) -> f64 {
        self.v[i * self.inst.num_bidders() + b]
    }

    fn build(mut self, kind: FormulationKind) -> MipModel {
        let (m, n) = (self.inst.num_items(), self.inst.num_bidders());
        let mut x = Vec::with_capacity(m * n);
        for i in 0..m {
            for b in 0..n {
                x.push(self.model.add_binary(format!("x_{}_{}", i + 1, b + 1)));
            }
        }
        let p: Vec<VarId> = (0..m)
            .map(|i| {
                let ub = if self.opts.price_upper_bound { self.r[i] } else { f64::INFINITY };
                self.model.add_var(format!("p_{}", i + 1), 0.0, ub, false)
            })
            .collect();
        let xv = |i: usize, b: usize| x[i * n + b];

        match kind {
            FormulationKind::Stm | FormulationKind::I | FormulationKind::L => {
                let mut ph = Vec::with_capacity(m * n);
                for i in 0..m {
                    for b in 0..n {
                        ph.push(self.model.add_var(format!("ph_{}_{}", i + 1, b + 1), 0.0, f64::INFINITY, false));
                    }
                }
                let phv = |i: usize, b: usize| ph[i * n + b];
                self.model.objective = ph.iter().map(|&id| (id, 1.0)).collect();
                self.assignment_rows(&x);

                for k in 0..m {
                    for b in 0..n {
                        let vkb = self.v(k, b);
                        let mut terms = Vec::with_capacity(2 * m);
                        if kind == FormulationKind::Stm {
                            // sum_{i != k} (v_ib x_ib - ph_ib) - v_kb sum_{i != k} x_ib + p_k >= 0
                            for i in (0..m).filter(|&i| i != k) {
                                terms.push((xv(i, b), self.v(i, b) - vkb));
                                terms.push((phv(i, b), -1.0));
                            }
                            terms.push((p[k], 1.0));
                            self.model
                                .add_constraint(format!("envy_{}_{}", k + 1, b + 1), terms, Relation::Ge, 0.0);
                        } else {
                            // sum_i (v_ib x_ib - ph_ib) + p_k >= v_kb
                            for i in 0..m {
                                terms.push((xv(i, b), self.v(i, b)));
                                terms.push((phv(i, b), -1.0));
                            }
                            terms.push((p[k], 1.0));
                            self.model
                                .add_constraint(format!("envy_{}_{}", k + 1, b + 1), terms, Relation::Ge, vkb);
                        }
                    }
                }
                for i in 0..m {
                    for b in 0..n {
                        self.model.add_constraint(
                            format!("surplus_{}_{}", i + 1, b + 1),
                            vec![(xv(i, b), self.v(i, b)), (phv(i, b), -1.0)],
                            Relation::Ge,
                            0.0,
                        );
                    }
                }
                if kind != FormulationKind::L {
                    for i in 0..m {
                        for b in 0..n {
                            self.model.add_constraint(
                                format!("ub_price_{}_{}", i + 1, b + 1),
                                vec![(phv(i, b), 1.0), (p[i], -1.0)],
                                Relation::Le,
                                0.0,
                            );
                        }
                    }
                }
                for i in 0..m {
                    for b in 0..n {
                        // ph_ib >= p_i - R_i (1 - x_ib)
                        self.model.add_constraint(
                            format!("lb_price_{}_{}", i + 1, b + 1),
                            vec![(phv(i, b), 1.0), (p[i], -1.0), (xv(i, b), -self.r[i])],
                            Relation::Ge,
                            -self.r[i],
                        );
                    }
                }
            }
            FormulationKind::P => {
                let z: Vec<VarId> = (0..n)
                    .map(|b| self.model.add_var(format!("z_{}", b + 1), 0.0, f64::INFINITY, false))
                    .collect();
                self.model.objective = z.iter().map(|&id| (id, 1.0)).collect();
                self.assignment_rows(&x);
                for k in 0..m {
                    for b in 0..n {
                        // sum_i v_ib x_ib - z_b + p_k >= v_kb
                        let mut terms: Vec<_> = (0..m).map(|i| (xv(i, b), self.v(i, b))).collect();
                        terms.push((z[b], -1.0));
                        terms.push((p[k], 1.0));
                        self.model
                            .add_constraint(format!("envy_{}_{}", k + 1, b + 1), terms, Relation::Ge, self.v(k, b));
                    }
                }
                for b in 0..n {
                    let mut terms: Vec<_> = (0..m).map(|i| (xv(i, b), self.v(i, b))).collect();
                    terms.push((z[b], -1.0));
                    self.model
                        .add_constraint(format!("surplus_{}", b + 1), terms, Relation::Ge, 0.0);
                }
                for i in 0..m {
                    for b in 0..n {
                        // z_b >= p_i - R_i (1 - x_ib)
                        self.model.add_constraint(
                            format!("lb_profit_{}_{}", i + 1, b + 1),
                            vec![(z[b], 1.0), (p[i], -1.0), (xv(i, b), -self.r[i])],
                            Relation::Ge,
                            -self.r[i],
                        );
                    }
                }
            }
            FormulationKind::U => {
                let u: Vec<VarId> = (0..n)
                    .map(|b| self.model.add_var(format!("u_{}", b + 1), 0.0, f64::INFINITY, false))
                    .collect();
                let mut obj: Vec<(VarId, f64)> = Vec::new();
                for i in 0..m {
                    for b in 0..n {
                        if self.v(i, b) != 0.0 {
                            obj.push((xv(i, b), self.v(i, b)));
                        }
                    }
                }
                obj.extend(u.iter().map(|&id| (id, -1.0)));
                self.model.objective = obj;
                self.assignment_rows(&x);
                for i in 0..m {
                    for b in 0..n {
                        // u_b + p_i >= v_ib
                        self.model.add_constraint(
                            format!("util_lb_{}_{}", i + 1, b + 1),
                            vec![(u[b], 1.0), (p[i], 1.0)],
                            Relation::Ge,
                            self.v(i, b),
                        );
                    }
                }
                for i in 0..m {
                    for b in 0..n {
                        // u_b <= v_ib x_ib - p_i + (1 - x_ib)(R_i + S_b)
                        let big = self.r[i] + self.s[b];
                        self.model.add_constraint(
                            format!("util_ub_{}_{}", i + 1, b + 1),
                            vec![(u[b], 1.0), (p[i], 1.0), (xv(i, b), big - self.v(i, b))],
                            Relation::Le,
                            big,
                        );
                    }
                }
                for b in 0..n {
                    // u_b <= sum_i v_ib x_ib
                    let mut terms = vec![(u[b], 1.0)];
                    terms.extend((0..m).map(|i| (xv(i, b), -self.v(i, b))));
                    self.model
                        .add_constraint(format!("util_cap_{}", b + 1), terms, Relation::Le, 0.0);
                }
            }
        }
        self.model
    }

    fn assignment_rows(&mut self, x: &[VarId]) {
        let (m, n) = (self.inst.num_items(), self.inst.num_bidders());
        for b in 0..n {
            let terms = (0..m).map(|i| (x[i * n + b], 1.0)).collect();
            self.model
                .add_constraint(format!("assign_{}", b + 1), terms, Relation::Le, 1.0);
        }
    }
}

/// Reads pricing and allocation out of a MIP assignment after checking it is
/// feasible within [`ASSIGNMENT_TOL`].
pub fn extract_outcome(inst: &Instance, model: &MipModel, values: &[f64]) -> Result<Outcome> {
    if values.len() != model.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: model.num_vars(),
            found: values.len(),
        });
    }
    if let Some((constraint, violation)) = model.worst_violation(values, ASSIGNMENT_TOL) {
        return Err(Error::InfeasibleAssignment {
            constraint,
            violation,
        });
    }
    let layout = Layout::detect(model, inst.num_items(), inst.num_bidders())?;
    outcome_from_layout(inst, &layout, values)
}

pub(crate) fn outcome_from_layout(inst: &Instance, layout: &Layout, values: &[f64]) -> Result<Outcome> {
    let prices: Vec<f64> = layout.p.iter().map(|&id| values[id].max(0.0)).collect();
    let pricing = Pricing::for_instance(inst, prices)?;
    let mut assignment = vec![None; inst.num_bidders()];
    for (b, slot) in assignment.iter_mut().enumerate() {
        *slot = (0..inst.num_items()).find(|&i| values[layout.x(i, b)] > 0.5);
    }
    let allocation = Allocation::new(inst, assignment)?;
    Ok(Outcome::evaluate(inst, pricing, allocation))
}

/// The integral point of `model` representing an outcome: `x` from the
/// allocation, prices (capped at the variable bound), and the derived
/// paid-price, profit or utility variables.
pub fn embed_outcome(inst: &Instance, model: &MipModel, outcome: &Outcome) -> Result<Vec<f64>> {
    let layout = Layout::detect(model, inst.num_items(), inst.num_bidders())?;
    Ok(embed_with_layout(inst, model, &layout, outcome))
}

pub(crate) fn embed_with_layout(inst: &Instance, model: &MipModel, layout: &Layout, outcome: &Outcome) -> Vec<f64> {
    let n = inst.num_bidders();
    let mut values = vec![0.0; model.num_vars()];
    let mut price = vec![0.0; inst.num_items()];
    for (i, &id) in layout.p.iter().enumerate() {
        price[i] = outcome.pricing[i].min(model.variables[id].upper);
        values[id] = price[i];
    }
    for (b, i) in outcome.allocation.served() {
        values[layout.x(i, b)] = 1.0;
        if let Some(ph) = &layout.ph {
            values[ph[i * n + b]] = price[i];
        }
        if let Some(z) = &layout.z {
            values[z[b]] = price[i];
        }
        if let Some(u) = &layout.u {
            values[u[b]] = (inst.value(i, b) - price[i]).max(0.0);
        }
    }
    values
}
