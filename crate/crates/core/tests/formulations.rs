use efp_core::allocation::envy_free_allocation;
use efp_core::formulations::{build, build_with, embed_outcome, extract_outcome, BuildOptions, FormulationKind};
use efp_core::instance::worked_example;
use efp_core::solver::{solve_mip, MipLimits, MipStatus};
use efp_core::{Edge, Instance, Pricing};
use proptest::prelude::*;

/// Dense instance sizes: every formulation builds its rows over all
/// item-bidder pairs.
fn expected_counts(kind: FormulationKind, m: usize, n: usize) -> (usize, usize) {
    let mn = m * n;
    match kind {
        FormulationKind::Stm | FormulationKind::I => (2 * mn + m, n + 4 * mn),
        FormulationKind::L => (2 * mn + m, n + 3 * mn),
        FormulationKind::P | FormulationKind::U => (mn + m + n, 2 * n + 2 * mn),
    }
}

fn arb_instance(max_m: usize, max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_m, 1..=max_n)
        .prop_flat_map(|(m, n)| {
            (
                Just(m),
                Just(n),
                proptest::collection::vec(proptest::option::weighted(0.7, 1u32..=40), m * n),
            )
        })
        .prop_map(|(m, n, cells)| {
            let edges: Vec<Edge> = cells
                .iter()
                .enumerate()
                .filter_map(|(k, v)| v.map(|v| Edge::new(k / n, k % n, v as f64 / 4.0)))
                .collect();
            Instance::new(m, n, &edges).unwrap()
        })
}

fn arb_instance_and_pricing() -> impl Strategy<Value = (Instance, Pricing)> {
    arb_instance(4, 5).prop_flat_map(|inst| {
        let m = inst.num_items();
        (Just(inst), proptest::collection::vec(0.0f64..12.0, m))
            .prop_map(|(inst, p)| (inst, Pricing::new(p).unwrap()))
    })
}

#[test]
fn worked_example_counts() {
    let inst = worked_example();
    let stm = build(&inst, FormulationKind::Stm);
    assert_eq!((stm.num_vars(), stm.num_constraints(), stm.num_integer()), (27, 52, 12));
    let l = build(&inst, FormulationKind::L);
    assert_eq!((l.num_vars(), l.num_constraints()), (27, 40));
    let u = build(&inst, FormulationKind::U);
    assert_eq!((u.num_vars(), u.num_constraints()), (19, 32));
}

#[test]
fn worked_example_outcome_round_trip() {
    let inst = worked_example();
    let p = Pricing::new(vec![6.0, 6.0, 3.0]).unwrap();
    let out = envy_free_allocation(&inst, &p).unwrap();
    assert_eq!(out.profit, 21.0);
    for kind in FormulationKind::ALL {
        let model = build(&inst, kind);
        let values = embed_outcome(&inst, &model, &out).unwrap();
        let back = extract_outcome(&inst, &model, &values).unwrap();
        assert_eq!(back.pricing, p, "{kind}");
        assert_eq!(back.allocation, out.allocation, "{kind}");
        assert_eq!(model.objective_value(&values), 21.0, "{kind}");
    }
}

#[test]
fn nothing_sold_at_top_prices_is_feasible() {
    // every bidder priced out: x = 0 and p_i = R_i
    let inst = worked_example();
    let r = inst.derive_constants();
    let p = Pricing::new(r.item_max.clone()).unwrap();
    let out = envy_free_allocation(&inst, &p).unwrap();
    for kind in FormulationKind::ALL {
        let model = build(&inst, kind);
        let values = embed_outcome(&inst, &model, &out).unwrap();
        let back = extract_outcome(&inst, &model, &values).unwrap();
        assert_eq!(back.profit, out.profit, "{kind}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constraint_counts_follow_closed_forms(inst in arb_instance(6, 6)) {
        let (m, n) = (inst.num_items(), inst.num_bidders());
        for kind in FormulationKind::ALL {
            let model = build(&inst, kind);
            prop_assert_eq!((model.num_vars(), model.num_constraints()), expected_counts(kind, m, n), "{}", kind);
            prop_assert_eq!(model.num_integer(), m * n);
            model.validate().unwrap();
        }
    }

    #[test]
    fn envy_free_outcomes_embed_feasibly((inst, p) in arb_instance_and_pricing()) {
        let out = envy_free_allocation(&inst, &p).unwrap();
        for kind in FormulationKind::ALL {
            // prices above R_i sell nothing and are embedded at the cap
            let model = build(&inst, kind);
            let values = embed_outcome(&inst, &model, &out).unwrap();
            prop_assert!(model.worst_violation(&values, 1e-9).is_none(), "{} {:?}", kind, model.worst_violation(&values, 1e-9));
            prop_assert!((model.objective_value(&values) - out.profit).abs() <= 1e-9);
        }
    }

    #[test]
    fn uncapped_models_embed_prices_up_to_item_maxima((inst, p) in arb_instance_and_pricing()) {
        let r = inst.derive_constants().item_max;
        let clipped = Pricing::new(p.as_slice().iter().zip(&r).map(|(&a, &b)| a.min(b)).collect()).unwrap();
        let out = envy_free_allocation(&inst, &clipped).unwrap();
        for kind in FormulationKind::ALL {
            let model = build_with(&inst, kind, BuildOptions { price_upper_bound: false });
            let values = embed_outcome(&inst, &model, &out).unwrap();
            prop_assert!(model.worst_violation(&values, 1e-9).is_none(), "{}", kind);
            prop_assert!((model.objective_value(&values) - out.profit).abs() <= 1e-9);
        }
    }

    #[test]
    fn extracted_assignments_are_envy_free((inst, p) in arb_instance_and_pricing()) {
        let out = envy_free_allocation(&inst, &p).unwrap();
        for kind in FormulationKind::ALL {
            let model = build(&inst, kind);
            let values = embed_outcome(&inst, &model, &out).unwrap();
            let back = extract_outcome(&inst, &model, &values).unwrap();
            let (ok, v) = efp_core::allocation::is_envy_free(&inst, &back.pricing, &back.allocation);
            prop_assert!(ok, "{} {:?}", kind, v);
            prop_assert_eq!(back.allocation, out.allocation.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn formulations_agree_and_bound_dominates(inst in arb_instance(3, 4)) {
        let mut optima = Vec::new();
        for kind in FormulationKind::ALL {
            let r = solve_mip(&build(&inst, kind), &inst, &MipLimits::default()).unwrap();
            prop_assert_eq!(r.status, MipStatus::Optimal);
            prop_assert!(r.bound >= r.objective - 1e-9);
            let inc = r.incumbent.unwrap();
            prop_assert!((inc.profit - r.objective).abs() <= 1e-6);
            optima.push(r.objective);
        }
        for w in optima.windows(2) {
            prop_assert!((w[0] - w[1]).abs() <= 1e-6, "{:?}", optima);
        }
    }
}
