//! Benchmark rows, the CSV schema and the sweep harness.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use log::{info, warn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formulations::{build_with, BuildOptions, FormulationKind};
use crate::generators::{preset, Model, Seed};
use crate::instance::Instance;
use crate::solver::{solve_mip, MipLimits, MipResult};

/// One solve. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub instance_id: String,
    pub model: String,
    pub formulation: String,
    pub size: usize,
    pub status: String,
    pub incumbent: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: u64,
    pub wall_seconds: f64,
    pub root_relaxation: Option<f64>,
    pub root_relaxation_seconds: f64,
}

pub const CSV_HEADER: &str = "instance_id,model,formulation,size,status,incumbent,bound,gap,nodes,wall_seconds,root_relaxation,root_relaxation_seconds";

impl BenchmarkRow {
    pub fn from_result(id: &str, model: &str, kind: FormulationKind, size: usize, r: &MipResult) -> Self {
        Self {
            instance_id: id.to_string(),
            model: model.to_string(),
            formulation: kind.name().to_string(),
            size,
            status: r.status.name().to_string(),
            incumbent: r.objective,
            bound: r.bound,
            gap: r.gap,
            nodes: r.nodes,
            wall_seconds: r.wall.as_secs_f64(),
            root_relaxation: r.root_bound,
            root_relaxation_seconds: r.root_seconds,
        }
    }

    fn failed(id: &str, model: &str, kind: FormulationKind, size: usize) -> Self {
        Self {
            instance_id: id.to_string(),
            model: model.to_string(),
            formulation: kind.name().to_string(),
            size,
            status: "error".to_string(),
            incumbent: f64::NAN,
            bound: f64::NAN,
            gap: f64::NAN,
            nodes: 0,
            wall_seconds: 0.0,
            root_relaxation: None,
            root_relaxation_seconds: f64::NAN,
        }
    }
}

/// Builds and solves `kind` on `inst`, recording the outcome as a row.
pub fn solve_row(
    inst: &Instance,
    id: &str,
    model: &str,
    kind: FormulationKind,
    limits: &MipLimits,
    opts: BuildOptions,
) -> Result<(BenchmarkRow, MipResult)> {
    let mip = build_with(inst, kind, opts);
    let r = solve_mip(&mip, inst, limits)?;
    Ok((BenchmarkRow::from_result(id, model, kind, inst.num_bidders(), &r), r))
}

/// Writes rows as CSV with the header.
pub fn write_rows<W: Write>(out: W, rows: &[BenchmarkRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))
            .map_err(|e| Error::Io(e.into()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

/// Per `(size, formulation)` summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub size: usize,
    pub formulation: String,
    pub runs: usize,
    pub solved: usize,
    pub mean_gap: f64,
    pub mean_root_relaxation_seconds: f64,
}

pub const AGGREGATE_HEADER: &str = "size,formulation,runs,solved,mean_gap,mean_root_relaxation_seconds";

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.filter(|x| x.is_finite()).fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        f64::NAN
    } else {
        s / k as f64
    }
}

/// Aggregates in first-appearance order of `(size, formulation)`.
pub fn aggregate(rows: &[BenchmarkRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(usize, String)> = Vec::new();
    for r in rows {
        let key = (r.size, r.formulation.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(size, formulation)| {
            let group: Vec<&BenchmarkRow> = rows
                .iter()
                .filter(|r| r.size == size && r.formulation == formulation)
                .collect();
            AggregateRow {
                size,
                runs: group.len(),
                solved: group.iter().filter(|r| r.status == "optimal").count(),
                mean_gap: mean(group.iter().map(|r| r.gap)),
                mean_root_relaxation_seconds: mean(
                    group.iter().filter(|r| r.root_relaxation.is_some()).map(|r| r.root_relaxation_seconds),
                ),
                formulation,
            }
        })
        .collect()
}

pub fn write_aggregates<W: Write>(out: W, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(AGGREGATE_HEADER.split(','))
            .map_err(|e| Error::Io(e.into()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

/// A sweep over sizes, seeds and formulations of one generator model.
#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub model: Model,
    pub sizes: Vec<usize>,
    /// Seeds `first_seed .. first_seed + seeds`.
    pub seeds: u64,
    pub first_seed: u64,
    pub formulations: Vec<FormulationKind>,
    pub limits: MipLimits,
    pub build: BuildOptions,
    /// Generator parameter overrides applied on top of the presets.
    pub overrides: Vec<(String, String)>,
    /// Worker threads; 1 runs everything in order on the calling thread.
    pub jobs: usize,
}

pub fn instance_id(model: Model, size: usize, seed: u64) -> String {
    format!("{}-n{size}-s{seed}", model.name())
}

struct Task {
    size: usize,
    seed: u64,
    kind: FormulationKind,
}

fn run_task(plan: &BenchmarkPlan, t: &Task) -> BenchmarkRow {
    let id = instance_id(plan.model, t.size, t.seed);
    let model = plan.model.name();
    let solved = (|| {
        let mut cfg = preset(plan.model, t.size)?;
        for (k, v) in &plan.overrides {
            cfg.set(k, v)?;
        }
        let inst = cfg.generate(Seed(t.seed))?;
        solve_row(&inst, &id, model, t.kind, &plan.limits, plan.build)
    })();
    match solved {
        Ok((row, _)) => {
            info!("{id} {}: {} {} gap {:.2e}", t.kind, row.status, row.incumbent, row.gap);
            row
        }
        Err(e) => {
            warn!("{id} {}: {e}", t.kind);
            BenchmarkRow::failed(&id, model, t.kind, t.size)
        }
    }
}

/// Runs the plan. Rows come back in plan order (size, seed, formulation)
/// whatever the number of workers; `on_row` sees them in completion order.
pub fn run_benchmark(plan: &BenchmarkPlan, mut on_row: impl FnMut(&BenchmarkRow)) -> Vec<BenchmarkRow> {
    let mut tasks = Vec::new();
    for &size in &plan.sizes {
        for seed in plan.first_seed..plan.first_seed + plan.seeds {
            for &kind in &plan.formulations {
                tasks.push(Task { size, seed, kind });
            }
        }
    }
    if plan.jobs <= 1 {
        return tasks
            .iter()
            .map(|t| {
                let row = run_task(plan, t);
                on_row(&row);
                row
            })
            .collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<BenchmarkRow>> = vec![None; tasks.len()];
    thread::scope(|s| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..plan.jobs.min(tasks.len()) {
            let tx = tx.clone();
            let (next, tasks) = (&next, &tasks);
            s.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(t) = tasks.get(k) else { break };
                if tx.send((k, run_task(plan, t))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (k, row) in rx {
            on_row(&row);
            slots[k] = Some(row);
        }
    });
    slots.into_iter().map(|r| r.expect("every task reports")).collect()
}
