//! Closed-form values and constructed strategies checked against the exact
//! game solver on concrete networks.

use hsnet::closed_form::{self, lower_bound_m, lower_bound_r};
use hsnet::designer::{self, build_cycle, build_maximal_cp, seeker_strategy, Topology};
use hsnet::game::{best_response_gap, row_payoffs_by_row, solve_zero_sum};
use hsnet::oracle::enumerate_graphs;
use hsnet::rational::{int, rat, Rational};
use hsnet::{payoff_matrix, Graph, UtilitySpec};

fn lp_value(g: &Graph, u: &UtilitySpec) -> Rational {
    solve_zero_sum(&payoff_matrix(g, u).unwrap()).value
}

fn betas() -> Vec<Rational> {
    vec![int(0), rat(1, 2), int(1), int(2), int(5), int(50)]
}

#[test]
fn periphery_rows_of_eight_node_core_periphery() {
    let cp = build_maximal_cp(8).unwrap();
    let m = payoff_matrix(&cp.graph, &UtilitySpec::identity(int(2))).unwrap();
    for (i, &p) in cp.periphery.iter().enumerate() {
        let anchor = cp.core[i];
        for &c in &cp.core {
            let expected = if c == anchor { int(-2) } else { int(6) };
            assert_eq!(*m.entry(p, c), expected);
        }
        assert_eq!(*m.entry(p, p), int(-2));
    }
}

#[test]
fn cycle_value_matches_a_with_no_leaves() {
    let u = UtilitySpec::identity(int(1));
    assert_eq!(closed_form::value_a(4, 0, 0, &u, false).unwrap(), int(0));
    assert_eq!(lp_value(&build_cycle(4).unwrap(), &u), int(0));
}

#[test]
fn core_periphery_value_matches_a() {
    let u = UtilitySpec::identity(int(2));
    let a = closed_form::value_a(8, 4, 0, &u, true).unwrap();
    assert_eq!(a, int(-4));
    assert_eq!(lp_value(&build_maximal_cp(8).unwrap().graph, &u), -a);
    assert_eq!(closed_form::bound_qbar(8, 0, &u).unwrap(), int(-4));
}

#[test]
fn rho_balances_both_lower_bounds() {
    let u = UtilitySpec::identity(int(1));
    let rho = closed_form::rho(8, 2, 0, &u).unwrap();
    assert_eq!(rho, rat(7, 19));
    let zero = int(0);
    assert_eq!(
        lower_bound_r(8, 2, 0, &u, &zero, &rho).unwrap(),
        lower_bound_m(8, 2, 0, &u, &zero, &rho).unwrap()
    );
}

#[test]
fn twelve_cycle_under_square_utility() {
    let u = UtilitySpec::square(int(1));
    assert_eq!(closed_form::threshold_t(12, 0, &u).unwrap(), int(89));
    let qbar = closed_form::bound_qbar(12, 0, &u).unwrap();
    assert_eq!(qbar, closed_form::bound_q(12, 0, 0, &u).unwrap());
    assert_eq!(lp_value(&build_cycle(12).unwrap(), &u), -qbar);
}

#[test]
fn odd_core_periphery_value_and_mu_guarantee() {
    let u = UtilitySpec::identity(int(10));
    let net = designer::design_network(9, 0, &u).unwrap();
    assert_eq!(net.topology, Topology::MaximalCpOdd);
    let qbar = closed_form::bound_qbar(9, 0, &u).unwrap();
    assert_eq!(lp_value(&net.graph, &u), -qbar.clone());
    assert_eq!(closed_form::mixing_mu(9, 0, &u).unwrap(), rat(51, 71));
    let hider = designer::hider_strategy(&net, &u).unwrap();
    let seeker = seeker_strategy(&net.graph, &u).unwrap();
    let m = payoff_matrix(&net.graph, &u).unwrap();
    assert_eq!(best_response_gap(&m, &hider, &seeker).unwrap(), (int(0), int(0)));
}

#[test]
fn eight_node_design_has_zero_regret() {
    let u = UtilitySpec::identity(int(2));
    let d = designer::design_optimal(8, &u).unwrap();
    let m = payoff_matrix(d.graph(), &u).unwrap();
    assert_eq!(best_response_gap(&m, &d.hider, &d.seeker).unwrap(), (int(0), int(0)));
    assert_eq!(d.hider.support(), d.network.periphery);
}

#[test]
fn four_node_zero_penalty_design_is_a_path() {
    let u = UtilitySpec::identity(int(0));
    assert_eq!(closed_form::threshold_t(4, 0, &u).unwrap(), int(-1));
    assert!(closed_form::bound_qbar(4, 0, &u).unwrap() < closed_form::value_b(4, &u).unwrap());
    let d = designer::design_optimal(4, &u).unwrap();
    assert_eq!(d.graph().edge_count(), 3);
    assert!(d.graph().is_connected());
    assert_eq!(lp_value(d.graph(), &u), int(1));
}

#[test]
fn every_design_matches_its_lp_value() {
    for n in 4..=10 {
        for beta in betas() {
            for u in [UtilitySpec::identity(beta.clone()), UtilitySpec::square(beta.clone())] {
                for s in (0..=n - 4).chain([n]) {
                    let net = designer::design_network(n, s, &u).unwrap();
                    let qbar = closed_form::bound_qbar(n, s, &u).unwrap();
                    assert_eq!(lp_value(&net.graph, &u), -qbar, "n={n} s={s} {u}");
                }
            }
        }
    }
}

/// On every graph with a valid singleton count, the seeker's constructed
/// strategy holds the hider to at most `-Q(n, m, s)`.
#[test]
fn seeker_strategy_secures_q_on_all_small_graphs() {
    for n in 1..=6 {
        for g in enumerate_graphs(n).unwrap() {
            let part = g.classify();
            let (s, m) = (part.s(), part.m());
            if closed_form::check_singletons(n, s).is_err() {
                continue;
            }
            for beta in betas() {
                for u in [UtilitySpec::identity(beta.clone()), UtilitySpec::square(beta.clone())] {
                    let sigma = seeker_strategy(&g, &u).unwrap();
                    let matrix = payoff_matrix(&g, &u).unwrap();
                    let worst = row_payoffs_by_row(&matrix, &sigma).into_iter().max().unwrap();
                    let bound = closed_form::bound_q(n, m, s, &u).unwrap();
                    assert!(worst <= -bound, "{:?} {u}", g.edges());
                }
            }
        }
    }
}
