//! The `efp` command line.
//!
//! Exit codes: 0 on success, 1 for usage or input errors, 2 when a checked
//! invariant fails (relaxation ordering, rounding guarantee, oracle
//! dominance, envy-freeness of a reported outcome).

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use log::info;

use crate::allocation::{is_envy_free, profit, Outcome};
use crate::bench::{self, BenchmarkPlan, BenchmarkRow};
use crate::formulations::{build_with, export_lp_text, BuildOptions, FormulationKind};
use crate::generators::{preset, GeneratorConfig, Model, Seed};
use crate::geometric::{guarantee_factor, round_pricing_eps, round_pricing_half, HALF_GUARANTEE};
use crate::instance::{Instance, Pricing};
use crate::io::{format_value, parse_instance, serialize_instance};
use crate::oracle::brute_force_optimal;
use crate::solver::{compare_relaxations_with, MipLimits, MipStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "efp", version, about = "Unit-demand envy-free pricing laboratory")]
pub struct Cli {
    /// Seed for instance generation.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Time limit per MIP solve, in seconds.
    #[arg(long, global = true, default_value_t = 60.0)]
    time_limit: f64,
    /// Slack for the invariant checks.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tolerance: f64,
    /// Leave price variables unbounded above instead of capping them at the
    /// item's highest valuation.
    #[arg(long, global = true)]
    no_price_bound: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a preset market.
    Generate {
        #[arg(long)]
        model: Model,
        /// Number of bidders (and items).
        #[arg(long)]
        n: usize,
        /// Generator parameter override, e.g. `--set e=100`.
        #[arg(long = "set", value_parser = parse_key_value)]
        set: Vec<(String, String)>,
    },
    /// Solve a market with one or all formulations.
    Solve {
        instance: PathBuf,
        /// STM, I, L, P, U or all.
        #[arg(long, default_value = "U")]
        formulation: String,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Also write the model in LP text format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
    },
    /// Solve the five linear relaxations and check their ordering.
    #[command(alias = "compare-relaxations")]
    Relax {
        instances: Vec<PathBuf>,
        /// Search generated markets for strict separations instead.
        #[arg(long)]
        find_strict: bool,
        /// Model to search; all three in turn when absent.
        #[arg(long)]
        model: Option<Model>,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Markets to try in search mode.
        #[arg(long, default_value_t = 500)]
        budget: u64,
    },
    /// Round a pricing onto a geometric grid and compare profits.
    Round {
        instance: PathBuf,
        /// Comma-separated prices; the optimal pricing is used when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        prices: Option<Vec<f64>>,
        /// Grid ratio minus one; 1 selects the factor-4 rounding.
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
    /// Exhaustive search over valuation-valued prices.
    Oracle {
        instance: PathBuf,
        /// Also solve the MIP and check it is at least as good.
        #[arg(long)]
        compare: bool,
    },
    /// Sweep sizes, seeds and formulations of one model.
    Benchmark {
        #[arg(long)]
        model: Model,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Number of seeds, starting at `--seed`.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_value = "STM,I,L,P,U")]
        formulations: Vec<FormulationKind>,
        /// File for the per-size aggregates; appended to the output when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long = "set", value_parser = parse_key_value)]
        set: Vec<(String, String)>,
    },
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected key=value, got `{s}`")),
    }
}

fn parse_formulations(s: &str) -> anyhow::Result<Vec<FormulationKind>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(FormulationKind::ALL.to_vec());
    }
    s.split(',')
        .map(|k| k.trim().parse().map_err(anyhow::Error::from))
        .collect()
}

impl Cli {
    fn build_options(&self) -> BuildOptions {
        BuildOptions {
            price_upper_bound: !self.no_price_bound,
        }
    }

    fn limits(&self) -> anyhow::Result<MipLimits> {
        if !(self.time_limit >= 0.0 && self.time_limit.is_finite()) {
            bail!("--time-limit must be a non-negative number of seconds");
        }
        Ok(MipLimits::with_time_limit(self.time_limit))
    }

    /// Writes to `--output` or to `out`.
    fn emit(&self, out: &mut dyn Write, text: &str) -> anyhow::Result<()> {
        match &self.output {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => out.write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn describe(out: &mut dyn Write, inst: &Instance, o: &Outcome) -> io::Result<()> {
    let prices: Vec<String> = o.pricing.as_slice().iter().map(|&p| format_value(p)).collect();
    writeln!(out, "  prices: {}", prices.join(" "))?;
    for b in 0..inst.num_bidders() {
        match o.allocation.item_of(b) {
            Some(i) => writeln!(
                out,
                "  bidder {} <- item {} (value {}, price {}, utility {})",
                b + 1,
                i + 1,
                format_value(inst.value(i, b)),
                format_value(o.pricing[i]),
                format_value(o.utilities[b])
            )?,
            None => writeln!(out, "  bidder {} unserved", b + 1)?,
        }
    }
    writeln!(out, "  profit: {}", format_value(o.profit))
}

fn generate(cli: &Cli, out: &mut dyn Write, model: Model, n: usize, set: &[(String, String)]) -> anyhow::Result<i32> {
    let mut cfg: GeneratorConfig = preset(model, n)?;
    for (k, v) in set {
        cfg.set(k, v)?;
    }
    let inst = cfg.generate(Seed(cli.seed))?;
    info!("{model} n={n} seed={}: {} edges", cli.seed, inst.num_edges());
    cli.emit(out, &serialize_instance(&inst))?;
    Ok(EXIT_OK)
}

fn append_rows(path: &Path, rows: &[BenchmarkRow]) -> anyhow::Result<()> {
    let fresh = fs::metadata(path).map_or(true, |m| m.len() == 0);
    let mut buf = Vec::new();
    bench::write_rows(&mut buf, rows)?;
    let text = String::from_utf8(buf)?;
    let body = if fresh {
        text.as_str()
    } else {
        text.split_once('\n').map_or("", |(_, rest)| rest)
    };
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

fn solve(
    cli: &Cli,
    out: &mut dyn Write,
    path: &Path,
    formulation: &str,
    node_limit: Option<u64>,
    export_lp: Option<&Path>,
) -> anyhow::Result<i32> {
    let inst = load(path)?;
    let kinds = parse_formulations(formulation)?;
    let mut limits = cli.limits()?;
    limits.node_limit = node_limit;
    let id = instance_name(path);
    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for kind in kinds {
        let mip = build_with(&inst, kind, cli.build_options());
        if let Some(lp) = export_lp {
            let target = if formulation.eq_ignore_ascii_case("all") {
                lp.with_extension(format!("{}.lp", kind.name()))
            } else {
                lp.to_path_buf()
            };
            fs::write(&target, export_lp_text(&mip))?;
        }
        let (row, result) = bench::solve_row(&inst, &id, "file", kind, &limits, cli.build_options())?;
        writeln!(
            out,
            "{kind}: {} incumbent {} bound {} gap {:.3e} nodes {} in {:.3}s",
            row.status, row.incumbent, row.bound, row.gap, row.nodes, row.wall_seconds
        )?;
        if let Some(o) = &result.incumbent {
            describe(out, &inst, o)?;
            let (ok, violations) = is_envy_free(&inst, &o.pricing, &o.allocation);
            if !ok {
                writeln!(out, "  NOT envy-free: {violations:?}")?;
                code = EXIT_INVARIANT;
            }
        }
        if result.status != MipStatus::Infeasible && result.bound < result.objective - cli.tolerance {
            writeln!(out, "  bound below incumbent")?;
            code = EXIT_INVARIANT;
        }
        rows.push(row);
    }
    match &cli.output {
        Some(p) => append_rows(p, &rows)?,
        None => bench::write_rows(&mut *out, &rows)?,
    }
    Ok(code)
}

fn relax(cli: &Cli, out: &mut dyn Write, paths: &[PathBuf]) -> anyhow::Result<i32> {
    let mut text = format!("{}\n", crate::solver::RelaxationReport::csv_header());
    let mut violations = 0;
    for path in paths {
        let inst = load(path)?;
        let report = compare_relaxations_with(&inst, cli.build_options())?;
        for v in report.violations() {
            log::error!("{}: {v}", path.display());
            violations += 1;
        }
        if !report.all_solved() {
            violations += 1;
        }
        text.push_str(&report.csv_row(&instance_name(path)));
        text.push('\n');
    }
    cli.emit(out, &text)?;
    Ok(if violations > 0 { EXIT_INVARIANT } else { EXIT_OK })
}

fn find_strict(cli: &Cli, out: &mut dyn Write, model: Option<Model>, n: usize, budget: u64) -> anyhow::Result<i32> {
    let mut stm: Option<String> = None;
    let mut chain: Option<String> = None;
    let mut violations = 0;
    for k in 0..budget {
        let m = model.unwrap_or(Model::ALL[(k % 3) as usize]);
        let seed = cli.seed + k;
        let inst = preset(m, n)?.generate(Seed(seed))?;
        let r = compare_relaxations_with(&inst, cli.build_options())?;
        violations += r.violations().len();
        let id = bench::instance_id(m, n, seed);
        if stm.is_none() && r.separates_stm() {
            writeln!(out, "LR_I < LR_STM on {id} (attempt {})\n{r}", k + 1)?;
            stm = Some(id.clone());
        }
        if chain.is_none() && r.separates_l_p_u() {
            writeln!(out, "LR_L < LR_P < LR_U on {id} (attempt {})\n{r}", k + 1)?;
            chain = Some(id);
        }
        if stm.is_some() && chain.is_some() {
            break;
        }
    }
    if stm.is_none() {
        writeln!(out, "no instance with LR_I < LR_STM within {budget} attempts")?;
    }
    if chain.is_none() {
        writeln!(out, "no instance with LR_L < LR_P < LR_U within {budget} attempts")?;
    }
    if violations > 0 {
        writeln!(out, "{violations} ordering violations")?;
        return Ok(EXIT_INVARIANT);
    }
    Ok(EXIT_OK)
}

fn round(cli: &Cli, out: &mut dyn Write, path: &Path, prices: Option<&[f64]>, eps: f64) -> anyhow::Result<i32> {
    let inst = load(path)?;
    let p = match prices {
        Some(v) => Pricing::for_instance(&inst, v.to_vec())?,
        None => {
            let (_, r) = bench::solve_row(&inst, "", "", FormulationKind::U, &cli.limits()?, cli.build_options())?;
            r.incumbent.context("no incumbent to round")?.pricing
        }
    };
    let (q, factor) = if eps == 1.0 {
        (round_pricing_half(&inst, &p)?, HALF_GUARANTEE)
    } else {
        (round_pricing_eps(&inst, &p, eps)?, guarantee_factor(eps)?)
    };
    let (before, after) = (profit(&inst, &p)?, profit(&inst, &q)?);
    let ratio = if before <= crate::instance::TAU { 1.0 } else { after / before };
    let fmt = |x: &Pricing| x.as_slice().iter().map(|&v| format_value(v)).collect::<Vec<_>>().join(",");
    let mut text = String::new();
    text.push_str(&format!("p         {}\n", fmt(&p)));
    text.push_str(&format!("rounded   {}\n", fmt(&q)));
    text.push_str(&format!("sol(p)    {}\n", format_value(before)));
    text.push_str(&format!("sol(p~)   {}\n", format_value(after)));
    text.push_str(&format!("ratio     {ratio:.9}\n"));
    text.push_str(&format!("guarantee {factor:.9}\n"));
    let broken = ratio < factor - cli.tolerance;
    if broken {
        text.push_str("VIOLATION: ratio below the guarantee\n");
    }
    cli.emit(out, &text)?;
    Ok(if broken { EXIT_INVARIANT } else { EXIT_OK })
}

fn oracle(cli: &Cli, out: &mut dyn Write, path: &Path, compare: bool) -> anyhow::Result<i32> {
    let inst = load(path)?;
    let best = brute_force_optimal(&inst)?;
    let mut buf = Vec::new();
    writeln!(buf, "candidate-price optimum {}", format_value(best.profit))?;
    describe(&mut buf, &inst, &best)?;
    let mut code = EXIT_OK;
    if compare {
        let (row, _) = bench::solve_row(&inst, "", "", FormulationKind::U, &cli.limits()?, cli.build_options())?;
        writeln!(buf, "MIP {} {}", row.status, row.incumbent)?;
        if row.status == "optimal" && row.incumbent < best.profit - cli.tolerance {
            writeln!(buf, "VIOLATION: MIP optimum below the oracle")?;
            code = EXIT_INVARIANT;
        } else if (row.incumbent - best.profit).abs() <= cli.tolerance {
            writeln!(buf, "equal")?;
        }
    }
    cli.emit(out, &String::from_utf8(buf)?)?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn benchmark(
    cli: &Cli,
    out: &mut dyn Write,
    model: Model,
    sizes: &[usize],
    seeds: u64,
    formulations: &[FormulationKind],
    summary: Option<&Path>,
    jobs: usize,
    set: &[(String, String)],
) -> anyhow::Result<i32> {
    let plan = BenchmarkPlan {
        model,
        sizes: sizes.to_vec(),
        seeds,
        first_seed: cli.seed,
        formulations: formulations.to_vec(),
        limits: cli.limits()?,
        build: cli.build_options(),
        overrides: set.to_vec(),
        jobs: jobs.max(1),
    };
    let rows = bench::run_benchmark(&plan, |r| {
        info!("{} {}: {} gap {:.2e}", r.instance_id, r.formulation, r.status, r.gap)
    });
    let mut text = Vec::new();
    bench::write_rows(&mut text, &rows)?;
    let mut agg = Vec::new();
    bench::write_aggregates(&mut agg, &bench::aggregate(&rows))?;
    match summary {
        Some(p) => {
            fs::write(p, &agg)?;
        }
        None => {
            text.push(b'\n');
            text.extend_from_slice(&agg);
        }
    }
    cli.emit(out, &String::from_utf8(text)?)?;
    Ok(EXIT_OK)
}

/// Runs the command line `args` (program name first), writing reports to
/// `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Generate { model, n, set } => generate(&cli, out, *model, *n, set),
        Command::Solve {
            instance,
            formulation,
            node_limit,
            export_lp,
        } => solve(&cli, out, instance, formulation, *node_limit, export_lp.as_deref()),
        Command::Relax {
            instances,
            find_strict: true,
            model,
            n,
            budget,
        } => {
            if !instances.is_empty() {
                Err(anyhow::anyhow!("--find-strict takes no instance files"))
            } else {
                find_strict(&cli, out, *model, *n, *budget)
            }
        }
        Command::Relax { instances, .. } => relax(&cli, out, instances),
        Command::Round { instance, prices, eps } => round(&cli, out, instance, prices.as_deref(), *eps),
        Command::Oracle { instance, compare } => oracle(&cli, out, instance, *compare),
        Command::Benchmark {
            model,
            sizes,
            seeds,
            formulations,
            summary,
            jobs,
            set,
        } => benchmark(&cli, out, *model, sizes, *seeds, formulations, summary.as_deref(), *jobs, set),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
