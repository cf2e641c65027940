use hsnet::closed_form;
use hsnet::designer::build_cycle;
use hsnet::oracle::{enumerate_graphs, exhaustive_optimum, graph_count, is_maximal_core_periphery};
use hsnet::rational::{int, rat};
use hsnet::{Utility, UtilitySpec};

#[test]
fn unlabeled_graph_counts_through_seven() {
    let counts: Vec<usize> = (1..=7).map(|n| graph_count(n).unwrap()).collect();
    assert_eq!(counts, vec![1, 2, 4, 11, 34, 156, 1044]);
    assert_eq!(enumerate_graphs(3).unwrap().len(), 4);
}

#[test]
#[ignore = "long run: 12346 graphs"]
fn unlabeled_graph_count_eight() {
    assert_eq!(graph_count(8).unwrap(), 12346);
}

#[test]
fn seven_node_cycle_is_optimal_under_square_utility() {
    let u = UtilitySpec::square(rat(1, 2));
    assert_eq!(closed_form::threshold_t(7, 0, &u).unwrap(), int(19));
    let report = exhaustive_optimum(7, &u).unwrap();
    let c7 = build_cycle(7).unwrap().canonical_form().unwrap();
    assert!(report.argmax.iter().any(|a| a.key == c7));
    assert_eq!(report.best_value, report.closed_form_value);
    assert!(report.passed(), "{:#?}", report.structural_checks);
}

#[test]
fn no_small_components_from_five_to_seven_nodes() {
    for n in 5..=7 {
        for beta in [0, 1, 5] {
            let report = exhaustive_optimum(n, &UtilitySpec::identity(int(beta))).unwrap();
            let check = report.check("no_small_components").unwrap();
            assert!(check.passed, "n={n} beta={beta}: {:?}", check.failures);
        }
    }
}

#[test]
fn six_nodes_high_penalty_has_a_unique_core_periphery_optimum() {
    let u = UtilitySpec::identity(int(5));
    assert_eq!(closed_form::threshold_t(6, 0, &u).unwrap(), int(-1));
    let report = exhaustive_optimum(6, &u).unwrap();
    assert_eq!(report.argmax.len(), 1);
    assert!(is_maximal_core_periphery(&report.argmax[0].graph));
    assert!(report.check("maximal_core_periphery").unwrap().passed);
}

#[test]
fn six_nodes_square_utility_degree_two_and_support() {
    let u = UtilitySpec::square(int(0));
    assert_eq!(closed_form::threshold_t(6, 0, &u).unwrap(), int(11));
    let report = exhaustive_optimum(6, &u).unwrap();
    for name in ["two_connected_degree_two", "hider_support"] {
        let check = report.check(name).unwrap();
        assert!(check.passed && check.examined > 0, "{name}: {check:?}");
    }
}

#[test]
fn six_nodes_identity_value_agreement() {
    let report = exhaustive_optimum(6, &UtilitySpec::identity(int(2))).unwrap();
    assert_eq!(report.best_value, report.closed_form_value);
}

#[test]
#[ignore = "long run: LP on all 12346 graphs"]
fn eight_nodes_identity_beta_two() {
    let u = UtilitySpec::identity(int(2));
    let report = exhaustive_optimum(8, &u).unwrap();
    let (optimal_s, qbar) = closed_form::optimal_singletons(8, &u).unwrap();
    assert_eq!(optimal_s, vec![0]);
    assert_eq!(report.best_value, -qbar);
    assert!(report.passed(), "{:#?}", report.structural_checks);
}

#[test]
fn three_nodes_edge_plus_singleton_beats_the_closed_form() {
    let report = exhaustive_optimum(3, &UtilitySpec::square(int(0))).unwrap();
    assert_eq!(report.best_value, rat(4, 5));
    assert_eq!(report.closed_form_value, rat(2, 3));
    assert_eq!(report.argmax.len(), 1);
    assert_eq!(report.argmax[0].graph.edge_count(), 1);
}

#[test]
fn steep_ratio_power_prefers_the_cycle() {
    let u = UtilitySpec::new(Utility::ratio_power(int(3)).unwrap(), int(0)).unwrap();
    assert_eq!(closed_form::threshold_t(5, 0, &u).unwrap(), rat(23, 400));
    let report = exhaustive_optimum(5, &u).unwrap();
    let c5 = build_cycle(5).unwrap().canonical_form().unwrap();
    assert_eq!(report.argmax.iter().map(|a| a.key).collect::<Vec<_>>(), vec![c5]);
    assert_eq!(report.best_value, rat(128, 125));
    assert!(report.passed(), "{:#?}", report.structural_checks);
}
