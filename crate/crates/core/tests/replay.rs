use lunar_logistics::network::ids;
use lunar_logistics::replay::{byproduct_totals, replay, ViolationKind};
use lunar_logistics::scenario::{replay_context, solve_scenario, ScenarioConfig, ScenarioOutcome};

fn solved(isru: bool) -> ScenarioOutcome {
    let config = ScenarioConfig {
        isru_enabled: isru,
        ..ScenarioConfig::default()
    };
    solve_scenario(&config).unwrap()
}

fn flows(o: &ScenarioOutcome) -> Vec<f64> {
    o.solution.values[..o.model.graph.instances.len() * o.model.graph.commodity_count()].to_vec()
}

fn instance(o: &ScenarioOutcome, label: &str, departure: usize) -> usize {
    let g = &o.model.graph;
    g.instances
        .iter()
        .position(|i| g.arcs[i.spec].label == label && i.departure == departure)
        .unwrap()
}

#[test]
fn optimal_plans_pass() {
    for isru in [true, false] {
        let o = solved(isru);
        let out = replay(&flows(&o), &o.model.graph, &replay_context(&o.model));
        assert!(out.verdict.passed, "{:?}", out.verdict.first_violation);
    }
}

#[test]
fn perturbed_flow_fails_where_it_was_changed() {
    let o = solved(true);
    let mut x = flows(&o);
    let n = o.model.graph.commodity_count();
    let i = instance(&o, "LS->HB", 2);
    x[i * n + ids::O2.0] += 1.0;
    let out = replay(&x, &o.model.graph, &replay_context(&o.model));
    assert!(!out.verdict.passed);
    let v = out.verdict.first_violation.unwrap();
    assert_eq!(v.commodity, "O2");
    assert!(v.node == "LS" || v.node == "HB", "{v:?}");
    assert!(v.timestep == 2 || v.timestep == 3, "{v:?}");
}

#[test]
fn removing_generation_is_a_power_deficit() {
    let o = solved(true);
    let mut x = flows(&o);
    let n = o.model.graph.commodity_count();
    let i = instance(&o, "isru", 0);
    x[i * n + ids::FSPS.0] *= 0.5;
    let out = replay(&x, &o.model.graph, &replay_context(&o.model));
    assert!(!out.verdict.passed);
    let v = out.verdict.first_violation.unwrap();
    assert_eq!(v.kind, ViolationKind::PowerDeficit, "{v:?}");
    assert_eq!((v.node.as_str(), v.timestep), ("LS", 0));
}

#[test]
fn cargo_without_vehicles_breaks_capacity() {
    let o = solved(false);
    let mut x = flows(&o);
    let n = o.model.graph.commodity_count();
    let g = &o.model.graph;
    let leg = (0..g.instances.len())
        .filter(|&i| g.spec_of(i).label == "LEO->LS")
        .max_by(|&a, &b| x[a * n + ids::SPACECRAFT.0].total_cmp(&x[b * n + ids::SPACECRAFT.0]))
        .unwrap();
    assert!(x[leg * n + ids::SPACECRAFT.0] >= 1.0);
    x[leg * n + ids::SPACECRAFT.0] -= 1.0;
    let out = replay(&x, g, &replay_context(&o.model));
    let v = out.verdict.first_violation.unwrap();
    assert_eq!(v.kind, ViolationKind::PropellantCapacity, "{v:?}");
    assert_eq!((v.node.as_str(), v.timestep), ("LEO", g.instances[leg].departure));
}

#[test]
fn window_closed_flow_is_flagged() {
    let o = solved(false);
    let mut x = flows(&o);
    let n = o.model.graph.commodity_count();
    let i = instance(&o, "Earth->LEO", 0);
    x[i * n + ids::MRE.0] = 1e-12;
    let out = replay(&x, &o.model.graph, &replay_context(&o.model));
    assert_eq!(out.verdict.first_violation.unwrap().kind, ViolationKind::WindowClosedFlow);
}

#[test]
fn byproducts_from_the_replayed_ledger() {
    let o = solved(true);
    let out = replay(&flows(&o), &o.model.graph, &replay_context(&o.model));
    let b = byproduct_totals(&out.ledger, &o.model.graph);
    let within = |got: f64, want: f64| (got - want).abs() <= 0.005 * want;
    assert!(within(b.slag, 10_905.82), "{b:?}");
    assert!(within(b.metals, 27_282.54), "{b:?}");
    assert!(within(b.emissions, 5_028.57), "{b:?}");

    let e = solved(false);
    let out = replay(&flows(&e), &e.model.graph, &replay_context(&e.model));
    let b = byproduct_totals(&out.ledger, &e.model.graph);
    assert_eq!((b.slag, b.metals, b.emissions, b.dsoil_surplus), (0.0, 0.0, 0.0, 0.0));
}
