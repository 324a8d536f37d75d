//! Cross-checks the simplex engine against a deliberately plain second
//! implementation: textbook two-phase tableau simplex with Bland's rule on
//! the standard form `A y = b, y >= 0`, fed from the exported LP text.

use efp_core::formulations::{build, export_lp_text, parse_lp_text, FormulationKind, MipModel, Relation};
use efp_core::generators::{preset, Model, Seed};
use efp_core::instance::worked_example;
use efp_core::solver::{solve_lp, solve_mip, LpStatus, MipLimits, MipStatus};
use efp_core::Instance;

#[derive(Debug, PartialEq)]
enum RefOutcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Maximizes the relaxation of `model` with a dense two-phase simplex.
fn reference_lp(model: &MipModel) -> RefOutcome {
    let n = model.num_vars();
    // shift x = y + lower, so y >= 0; upper bounds become rows
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &model.constraints {
        let mut a = vec![0.0; n];
        let mut shift = 0.0;
        for &(j, v) in &c.terms {
            a[j] += v;
            shift += v * lower[j];
        }
        rows.push((a, c.relation, c.rhs - shift));
    }
    for (j, v) in model.variables.iter().enumerate() {
        if v.upper.is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, Relation::Le, v.upper - v.lower));
        }
    }
    // make every right-hand side non-negative
    for (a, rel, b) in &mut rows {
        if *b < 0.0 {
            a.iter_mut().for_each(|x| *x = -*x);
            *b = -*b;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let arts = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n + slacks + arts;
    // tableau rows: m constraint rows, then the objective row; last column is rhs
    let mut t = vec![vec![0.0; width + 1]; m + 1];
    let mut basis = vec![0usize; m];
    let (mut s, mut a) = (n, n + slacks);
    let mut artificial = vec![false; width];
    for (r, (coef, rel, b)) in rows.iter().enumerate() {
        t[r][..n].copy_from_slice(coef);
        t[r][width] = *b;
        match rel {
            Relation::Le => {
                t[r][s] = 1.0;
                basis[r] = s;
                s += 1;
            }
            Relation::Ge => {
                t[r][s] = -1.0;
                s += 1;
                t[r][a] = 1.0;
                artificial[a] = true;
                basis[r] = a;
                a += 1;
            }
            Relation::Eq => {
                t[r][a] = 1.0;
                artificial[a] = true;
                basis[r] = a;
                a += 1;
            }
        }
    }

    fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
        let p = t[r][c];
        t[r].iter_mut().for_each(|x| *x /= p);
        let row = t[r].clone();
        for (k, other) in t.iter_mut().enumerate() {
            if k != r && other[c] != 0.0 {
                let f = other[c];
                other.iter_mut().zip(&row).for_each(|(x, y)| *x -= f * y);
            }
        }
        basis[r] = c;
    }

    /// Minimizes the objective row (reduced costs stored in the last row,
    /// value in its rhs slot, negated). Returns false when unbounded.
    fn run(t: &mut [Vec<f64>], basis: &mut [usize], allowed: &[bool]) -> bool {
        let m = basis.len();
        let width = t[0].len() - 1;
        loop {
            // Bland: lowest index with negative reduced cost
            let Some(c) = (0..width).find(|&j| allowed[j] && t[m][j] < -1e-9) else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                if t[r][c] > 1e-9 {
                    let ratio = t[r][width] / t[r][c];
                    match best {
                        Some((br, bv)) if ratio > bv + 1e-12 || (ratio >= bv - 1e-12 && basis[r] > basis[br]) => {}
                        _ => best = Some((r, ratio)),
                    }
                }
            }
            let Some((r, _)) = best else { return false };
            pivot(t, basis, r, c);
        }
    }

    // phase 1: minimize the sum of artificials
    for j in 0..width {
        if artificial[j] {
            t[m][j] = 1.0;
        }
    }
    for r in 0..m {
        if artificial[basis[r]] {
            let row = t[r].clone();
            t[m].iter_mut().zip(&row).for_each(|(x, y)| *x -= y);
        }
    }
    let all = vec![true; width];
    run(&mut t, &mut basis, &all);
    if -t[m][width] > 1e-7 {
        return RefOutcome::Infeasible;
    }
    // drive remaining artificials out of the basis where possible
    for r in 0..m {
        if artificial[basis[r]] {
            if let Some(c) = (0..width).find(|&j| !artificial[j] && t[r][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, r, c);
            }
        }
    }
    // phase 2: minimize -objective
    let mut cost = vec![0.0; width];
    for &(j, v) in &model.objective {
        cost[j] -= v;
    }
    t[m] = vec![0.0; width + 1];
    t[m][..width].copy_from_slice(&cost);
    for r in 0..m {
        let c = cost[basis[r]];
        if c != 0.0 {
            let row = t[r].clone();
            t[m].iter_mut().zip(&row).for_each(|(x, y)| *x -= c * y);
        }
    }
    let allowed: Vec<bool> = (0..width).map(|j| !artificial[j]).collect();
    if !run(&mut t, &mut basis, &allowed) {
        return RefOutcome::Unbounded;
    }
    let constant: f64 = model.objective.iter().map(|&(j, v)| v * lower[j]).sum();
    RefOutcome::Optimal(t[m][width] + constant)
}

fn assert_agree(model: &MipModel, label: &str) {
    let ours = solve_lp(model).unwrap();
    assert_eq!(ours.status, LpStatus::Optimal, "{label}");
    let reparsed = parse_lp_text(&export_lp_text(model)).unwrap();
    match reference_lp(&reparsed) {
        RefOutcome::Optimal(v) => assert!(
            (v - ours.objective).abs() <= 1e-6 * ours.objective.abs().max(1.0),
            "{label}: reference {v}, simplex {}",
            ours.objective
        ),
        other => panic!("{label}: reference solver says {other:?}"),
    }
}

#[test]
fn reference_solver_sanity() {
    let mut m = MipModel::default();
    m.add_var("x".into(), 0.0, f64::INFINITY, false);
    m.add_var("y".into(), 1.0, 3.0, false);
    m.objective = vec![(0, 3.0), (1, 5.0)];
    m.add_constraint("a".into(), vec![(0, 1.0)], Relation::Le, 4.0);
    m.add_constraint("c".into(), vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
    // y <= 3 binds: x = 4, y = 3 -> 27
    assert_eq!(reference_lp(&m), RefOutcome::Optimal(27.0));
    m.add_constraint("d".into(), vec![(0, 1.0), (1, 1.0)], Relation::Ge, 10.0);
    assert_eq!(reference_lp(&m), RefOutcome::Infeasible);
}

#[test]
fn worked_example_relaxations_match_reference() {
    let inst = worked_example();
    for kind in FormulationKind::ALL {
        assert_agree(&build(&inst, kind), kind.name());
    }
}

#[test]
fn generated_relaxations_match_reference() {
    for (k, model) in Model::ALL.into_iter().enumerate() {
        for seed in 0..2 {
            let inst = preset(model, 4).unwrap().generate(Seed(seed + 10 * k as u64)).unwrap();
            for kind in FormulationKind::ALL {
                assert_agree(&build(&inst, kind), &format!("{model} seed {seed} {kind}"));
            }
        }
    }
}

#[test]
fn parsed_models_solve_to_the_same_optimum() {
    let inst = worked_example();
    for kind in FormulationKind::ALL {
        let text = export_lp_text(&build(&inst, kind));
        let parsed = parse_lp_text(&text).unwrap();
        let r = solve_mip(&parsed, &inst, &MipLimits::default()).unwrap();
        assert_eq!(r.status, MipStatus::Optimal, "{kind}");
        assert!((r.objective - 21.0).abs() <= 1e-6, "{kind}: {}", r.objective);
        assert!((r.incumbent.unwrap().profit - 21.0).abs() <= 1e-6);
    }
}

#[test]
fn empty_market_has_zero_optimum() {
    let inst = Instance::new(2, 3, &[]).unwrap();
    for kind in FormulationKind::ALL {
        let model = build(&inst, kind);
        let lp = solve_lp(&model).unwrap();
        assert_eq!(lp.status, LpStatus::Optimal);
        assert!(lp.objective.abs() < 1e-12);
        let r = solve_mip(&model, &inst, &MipLimits::default()).unwrap();
        assert_eq!(r.status, MipStatus::Optimal);
        assert!(r.objective.abs() < 1e-12);
    }
}

#[test]
fn binaries_section_lists_every_assignment_variable() {
    let text = export_lp_text(&build(&worked_example(), FormulationKind::Stm));
    let section = text.split("Binaries").nth(1).unwrap().split("End").next().unwrap();
    assert_eq!(section.split_whitespace().count(), 12);
}
