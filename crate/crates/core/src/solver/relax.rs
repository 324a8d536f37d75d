use std::fmt;

use log::info;

use crate::error::{Error, Result};
use crate::formulations::{build_with, BuildOptions, FormulationKind, Layout, MipModel};
use crate::instance::Instance;

use super::lp::{solve_lp, LpSolution, LpStatus};

/// Slack allowed in the ordering checks.
pub const ORDER_TOL: f64 = 1e-6;

/// The five relaxation values of one instance, in [`FormulationKind::ALL`]
/// order. `None` marks a failed solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationReport {
    pub values: [Option<f64>; 5],
    pub mip_optimum: Option<f64>,
}

fn slot(kind: FormulationKind) -> usize {
    FormulationKind::ALL.iter().position(|&k| k == kind).expect("listed kind")
}

impl RelaxationReport {
    pub fn get(&self, kind: FormulationKind) -> Option<f64> {
        self.values[slot(kind)]
    }

    pub fn all_solved(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Broken links of the chain I <= STM and I <= L <= P <= U.
    pub fn violations(&self) -> Vec<String> {
        use FormulationKind::*;
        let mut out = Vec::new();
        for (lo, hi) in [(I, Stm), (I, L), (L, P), (P, U)] {
            if let (Some(a), Some(b)) = (self.get(lo), self.get(hi)) {
                if a > b + ORDER_TOL {
                    out.push(format!("LR_{lo} = {a} exceeds LR_{hi} = {b}"));
                }
            }
        }
        if let Some(opt) = self.mip_optimum {
            for kind in FormulationKind::ALL {
                if let Some(v) = self.get(kind) {
                    if v < opt - ORDER_TOL {
                        out.push(format!("LR_{kind} = {v} is below the integer optimum {opt}"));
                    }
                }
            }
        }
        out
    }

    /// LR_I < LR_STM by more than the tolerance.
    pub fn separates_stm(&self) -> bool {
        matches!((self.get(FormulationKind::I), self.get(FormulationKind::Stm)),
            (Some(i), Some(s)) if i < s - ORDER_TOL)
    }

    /// LR_L < LR_P - tol < LR_U - 2 tol.
    pub fn separates_l_p_u(&self) -> bool {
        use FormulationKind::*;
        match (self.get(L), self.get(P), self.get(U)) {
            (Some(l), Some(p), Some(u)) => l < p - ORDER_TOL && p - ORDER_TOL < u - 2.0 * ORDER_TOL,
            _ => false,
        }
    }

    /// LR_I < LR_L by more than the tolerance; not known to ever happen.
    pub fn separates_i_l(&self) -> bool {
        use FormulationKind::*;
        matches!((self.get(I), self.get(L)), (Some(i), Some(l)) if i < l - ORDER_TOL)
    }

    pub fn csv_header() -> &'static str {
        "instance,lr_stm,lr_i,lr_l,lr_p,lr_u,mip_optimum,violations"
    }

    pub fn csv_row(&self, id: &str) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "failed".to_string(), |x| format!("{x:.9}"));
        let mut row = id.to_string();
        for v in self.values {
            row.push(',');
            row.push_str(&cell(v));
        }
        row.push(',');
        row.push_str(&self.mip_optimum.map_or(String::new(), |x| format!("{x:.9}")));
        row.push_str(&format!(",{}", self.violations().len()));
        row
    }
}

impl fmt::Display for RelaxationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (kind, v) in FormulationKind::ALL.iter().zip(self.values) {
            match v {
                Some(x) => writeln!(f, "LR_{kind:<3} {x:.9}")?,
                None => writeln!(f, "LR_{kind:<3} failed")?,
            }
        }
        if let Some(opt) = self.mip_optimum {
            writeln!(f, "MIP    {opt:.9}")?;
        }
        Ok(())
    }
}

fn optimal_relaxation(model: &MipModel) -> Result<LpSolution> {
    let s = solve_lp(model)?;
    if s.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("relaxation ended {:?}", s.status)));
    }
    Ok(s)
}

/// Solves the five linear relaxations of `inst`.
pub fn compare_relaxations(inst: &Instance) -> Result<RelaxationReport> {
    compare_relaxations_with(inst, BuildOptions::default())
}

pub fn compare_relaxations_with(inst: &Instance, opts: BuildOptions) -> Result<RelaxationReport> {
    let mut values = [None; 5];
    for (k, kind) in FormulationKind::ALL.into_iter().enumerate() {
        match optimal_relaxation(&build_with(inst, kind, opts)) {
            Ok(s) => values[k] = Some(s.objective),
            Err(e) => info!("LR_{kind} failed: {e}"),
        }
    }
    let report = RelaxationReport {
        values,
        mip_optimum: None,
    };
    if report.separates_i_l() {
        info!("instance with LR_I < LR_L found:\n{report}");
    }
    Ok(report)
}

/// How well a relaxation point carried into another formulation fits it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingCheck {
    /// Largest bound or constraint violation of the mapped point.
    pub residual: f64,
    /// Objective of the mapped point minus the source optimum, in absolute value.
    pub objective_delta: f64,
}

/// Largest violation of bounds and rows, ignoring integrality.
pub fn relaxed_residual(model: &MipModel, values: &[f64]) -> f64 {
    let bounds = model
        .variables
        .iter()
        .zip(values)
        .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0));
    let rows = model.constraints.iter().map(|c| c.violation(values));
    bounds.chain(rows).fold(0.0, f64::max)
}

fn layout_of(inst: &Instance, model: &MipModel) -> Result<Layout> {
    Layout::detect(model, inst.num_items(), inst.num_bidders())
}

fn check(target: &MipModel, point: &[f64], source_value: f64) -> MappingCheck {
    MappingCheck {
        residual: relaxed_residual(target, point),
        objective_delta: (target.objective_value(point) - source_value).abs(),
    }
}

/// Optimal relaxation point of I, checked against STM's relaxation as is.
pub fn check_i_to_stm(inst: &Instance, opts: BuildOptions) -> Result<MappingCheck> {
    let i_model = build_with(inst, FormulationKind::I, opts);
    let stm = build_with(inst, FormulationKind::Stm, opts);
    let sol = optimal_relaxation(&i_model)?;
    let (li, ls) = (layout_of(inst, &i_model)?, layout_of(inst, &stm)?);
    let mut point = vec![0.0; stm.num_vars()];
    let (src_ph, dst_ph) = (li.ph.as_ref(), ls.ph.as_ref());
    let (src_ph, dst_ph) = src_ph.zip(dst_ph).ok_or_else(|| Error::Lp("missing paid-price variables".into()))?;
    for (a, b) in li.x.iter().zip(&ls.x).chain(li.p.iter().zip(&ls.p)).chain(src_ph.iter().zip(dst_ph)) {
        point[*b] = sol.values[*a];
    }
    Ok(check(&stm, &point, sol.objective))
}

/// Optimal relaxation point of L carried to P with `z_b = sum_i ph_ib`.
pub fn check_l_to_p(inst: &Instance, opts: BuildOptions) -> Result<MappingCheck> {
    let l_model = build_with(inst, FormulationKind::L, opts);
    let p_model = build_with(inst, FormulationKind::P, opts);
    let sol = optimal_relaxation(&l_model)?;
    let (ll, lp) = (layout_of(inst, &l_model)?, layout_of(inst, &p_model)?);
    let ph = ll.ph.as_ref().ok_or_else(|| Error::Lp("missing paid-price variables".into()))?;
    let z = lp.z.as_ref().ok_or_else(|| Error::Lp("missing profit variables".into()))?;
    let n = inst.num_bidders();
    let mut point = vec![0.0; p_model.num_vars()];
    for (a, b) in ll.x.iter().zip(&lp.x).chain(ll.p.iter().zip(&lp.p)) {
        point[*b] = sol.values[*a];
    }
    for b in 0..n {
        point[z[b]] = (0..inst.num_items()).map(|i| sol.values[ph[i * n + b]]).sum();
    }
    Ok(check(&p_model, &point, sol.objective))
}

/// Optimal relaxation point of P carried to U with
/// `u_b = sum_i v_ib x_ib - z_b`.
pub fn check_p_to_u(inst: &Instance, opts: BuildOptions) -> Result<MappingCheck> {
    let p_model = build_with(inst, FormulationKind::P, opts);
    let u_model = build_with(inst, FormulationKind::U, opts);
    let sol = optimal_relaxation(&p_model)?;
    let (lp, lu) = (layout_of(inst, &p_model)?, layout_of(inst, &u_model)?);
    let z = lp.z.as_ref().ok_or_else(|| Error::Lp("missing profit variables".into()))?;
    let u = lu.u.as_ref().ok_or_else(|| Error::Lp("missing utility variables".into()))?;
    let mut point = vec![0.0; u_model.num_vars()];
    for (a, b) in lp.x.iter().zip(&lu.x).chain(lp.p.iter().zip(&lu.p)) {
        point[*b] = sol.values[*a];
    }
    for b in 0..inst.num_bidders() {
        let spend: f64 = inst
            .bidder_valuations(b)
            .iter()
            .map(|&(i, v)| v * sol.values[lp.x(i, b)])
            .sum();
        point[u[b]] = spend - sol.values[z[b]];
    }
    Ok(check(&u_model, &point, sol.objective))
}
