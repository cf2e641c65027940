//! Brute-force verification: every graph on `n <= 8` nodes up to isomorphism,
//! each game solved exactly, compared against the closed-form optimum.
//!
//! Work is spread over a rayon pool (capped by `HSNET_THREADS`); results are
//! collected in canonical-key order, so reports do not depend on the worker
//! count.

use crate::closed_form::{self, ClosedFormError};
use crate::designer::{self, DesignError};
use crate::formats::GraphJson;
use crate::game::{self, GameSolution};
use crate::graph::{CanonicalKey, Graph, GraphError, MAX_CANONICAL_NODES};
use crate::payoff::{self, PayoffError, UtilitySpec};
use crate::rational::{format_rational, Rational};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::sync::OnceLock;
use thiserror::Error;

/// Largest `n` enumerated by default; `n = 8` must be requested explicitly.
pub const DEFAULT_MAX_NODES: usize = 7;
/// Largest `n` at which every optimal hider strategy is checked, not just the
/// solver's vertex solution.
pub const FULL_SUPPORT_CHECK_MAX_NODES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration supports n <= {max}, got {n}")]
    BoundExceeded { n: usize, max: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

type Result<T> = std::result::Result<T, OracleError>;

/// Runs `op` on a pool sized by `HSNET_THREADS` when that is set to a
/// positive integer, otherwise on the global pool.
pub fn with_worker_pool<R: Send>(op: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("HSNET_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0);
    match cap.and_then(|t| rayon::ThreadPoolBuilder::new().num_threads(t).build().ok()) {
        Some(pool) => pool.install(op),
        None => op(),
    }
}

fn catalog(n: usize) -> &'static [CanonicalKey] {
    static CATALOG: [OnceLock<Vec<CanonicalKey>>; MAX_CANONICAL_NODES + 1] =
        [const { OnceLock::new() }; MAX_CANONICAL_NODES + 1];
    CATALOG[n].get_or_init(|| {
        if n == 0 {
            return vec![Graph::empty(0).canonical_form().expect("small")];
        }
        let smaller = catalog(n - 1);
        let keys: BTreeSet<CanonicalKey> = smaller
            .par_iter()
            .flat_map_iter(|key| {
                let base = key.to_graph();
                (0u32..1 << (n - 1)).map(move |mask| {
                    let mut g = Graph::empty(n);
                    for (i, j) in base.edges() {
                        g.add_edge(i, j).expect("valid edge");
                    }
                    for v in (0..n - 1).filter(|v| mask >> v & 1 == 1) {
                        g.add_edge(v, n - 1).expect("valid edge");
                    }
                    g.canonical_form().expect("small")
                })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect();
        keys.into_iter().collect()
    })
}

fn check_bound(n: usize) -> Result<()> {
    if n > MAX_CANONICAL_NODES {
        return Err(OracleError::BoundExceeded { n, max: MAX_CANONICAL_NODES });
    }
    Ok(())
}

/// Every graph on `n` nodes up to isomorphism, canonically labelled and in
/// canonical-key order. Built by attaching a new node to each graph on
/// `n - 1` nodes in every possible way, then deduplicating.
pub fn enumerate_graphs(n: usize) -> Result<Vec<Graph>> {
    check_bound(n)?;
    Ok(with_worker_pool(|| catalog(n).iter().map(CanonicalKey::to_graph).collect()))
}

pub fn graph_count(n: usize) -> Result<usize> {
    check_bound(n)?;
    Ok(with_worker_pool(|| catalog(n).len()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgmaxGraph {
    pub key: CanonicalKey,
    pub graph: Graph,
    pub solution: GameSolution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Graphs or cells the check examined.
    pub examined: usize,
    pub failures: Vec<String>,
}

impl CheckResult {
    fn new(name: &str) -> Self {
        CheckResult { name: name.to_string(), passed: true, examined: 0, failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.examined += 1;
        if !ok {
            self.passed = false;
            self.failures.push(describe());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationReport {
    pub n: usize,
    pub utility: UtilitySpec,
    pub graph_count: usize,
    pub best_value: Rational,
    pub argmax: Vec<ArgmaxGraph>,
    pub closed_form_value: Rational,
    pub structural_checks: Vec<CheckResult>,
}

impl EnumerationReport {
    pub fn passed(&self) -> bool {
        self.structural_checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.structural_checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "utility": serde_json::to_value(self.utility.to_json()).expect("serializable"),
            "graph_count": self.graph_count,
            "best_value": format_rational(&self.best_value),
            "closed_form_value": format_rational(&self.closed_form_value),
            "argmax_graphs": self.argmax.iter().map(|a| GraphJson::from(&a.graph)).collect::<Vec<_>>(),
            "structural_checks": self.structural_checks,
            "passed": self.passed(),
        })
    }
}

/// Maximum over all graphs on `n` nodes of the hider's game value, with the
/// graphs attaining it, checked against `-min_s Q-bar(n, s)`.
pub fn exhaustive_optimum(n: usize, u: &UtilitySpec) -> Result<EnumerationReport> {
    exhaustive_optimum_against(n, u, |n, u| {
        let (_, qbar) = closed_form::optimal_singletons(n, u)?;
        Ok(-qbar)
    })
}

/// As [`exhaustive_optimum`], comparing against an arbitrary prediction.
pub fn exhaustive_optimum_against<F>(n: usize, u: &UtilitySpec, predicted: F) -> Result<EnumerationReport>
where
    F: Fn(usize, &UtilitySpec) -> std::result::Result<Rational, ClosedFormError>,
{
    check_bound(n)?;
    if n == 0 {
        return Err(OracleError::Payoff(PayoffError::EmptyGraph));
    }
    u.validate(n).map_err(PayoffError::from)?;
    let solved: Vec<(CanonicalKey, Graph, GameSolution)> = with_worker_pool(|| {
        catalog(n)
            .par_iter()
            .map(|key| {
                let g = key.to_graph();
                let matrix = payoff::payoff_matrix(&g, u)?;
                Ok((*key, g, game::solve_zero_sum(&matrix)))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let best_value = solved
        .iter()
        .map(|(_, _, sol)| &sol.value)
        .max()
        .expect("at least one graph")
        .clone();
    let argmax = solved
        .into_iter()
        .filter(|(_, _, sol)| sol.value == best_value)
        .map(|(key, graph, solution)| ArgmaxGraph { key, graph, solution })
        .collect();
    let mut report = EnumerationReport {
        n,
        utility: u.clone(),
        graph_count: catalog(n).len(),
        best_value,
        argmax,
        closed_form_value: predicted(n, u)?,
        structural_checks: Vec::new(),
    };
    report.structural_checks = check_structure(&report)?;
    Ok(report)
}

/// Is `g` connected and maximal core-periphery? Even size: half the nodes are
/// leaves on distinct neighbours and the rest form a 2-connected core (a
/// single edge at size 4). Odd size: `(k-3)/2` such leaves, and among the
/// three orphaned core nodes one is adjacent to exactly the other two.
pub fn is_maximal_core_periphery(g: &Graph) -> bool {
    let k = g.node_count();
    if k < 4 || !g.is_connected() {
        return false;
    }
    let leaves: Vec<usize> = (0..k).filter(|&v| g.degree(v) == 1).collect();
    let anchors: BTreeSet<usize> = leaves.iter().map(|&v| *g.neighbors(v).first().unwrap()).collect();
    let expected_leaves = if k.is_multiple_of(2) { k / 2 } else { (k - 3) / 2 };
    if leaves.len() != expected_leaves || anchors.len() != leaves.len() {
        return false;
    }
    let core: Vec<usize> = (0..k).filter(|&v| g.degree(v) != 1).collect();
    let core_graph = g.induced_subgraph(&core).expect("valid nodes");
    let core_ok = if core.len() == 2 { core_graph.edge_count() == 1 } else { core_graph.is_two_connected() };
    if !core_ok {
        return false;
    }
    if k.is_multiple_of(2) {
        return true;
    }
    let orphans: Vec<usize> = core.iter().copied().filter(|v| !anchors.contains(v)).collect();
    orphans.iter().any(|&mid| {
        let others: BTreeSet<usize> = orphans.iter().copied().filter(|&o| o != mid).collect();
        *g.neighbors(mid) == others
    })
}

fn non_singleton_part(g: &Graph) -> (usize, Graph) {
    let nodes: Vec<usize> = (0..g.node_count()).filter(|&v| g.degree(v) > 0).collect();
    let s = g.node_count() - nodes.len();
    (s, g.induced_subgraph(&nodes).expect("valid nodes"))
}

fn describe(a: &ArgmaxGraph) -> String {
    let edges: Vec<String> = a.graph.edges().iter().map(|(i, j)| format!("{i}-{j}")).collect();
    format!("[{}]", edges.join(" "))
}

/// Named checks over every graph in the argmax set:
///
/// * `closed_form_value`: best value equals the prediction;
/// * `designs_in_argmax`: each constructed design for `s` in `S*(n)` is optimal;
/// * `no_small_components`: no component of size 2 or 3;
/// * `maximal_core_periphery`: when `T < beta` and `n - s >= 4`, the
///   non-singleton part is maximal core-periphery;
/// * `two_connected_degree_two`: when `T > beta`, the non-singleton part is
///   2-connected with at least `ceil((n-s)/3)` nodes of degree 2;
/// * `hider_support`: under `T > beta`, the solver's hider strategy puts no
///   mass on nodes of degree above 2, and for `n <= 6` no optimal strategy does.
pub fn check_structure(report: &EnumerationReport) -> Result<Vec<CheckResult>> {
    let (n, u) = (report.n, &report.utility);

    let mut value = CheckResult::new("closed_form_value");
    value.record(report.best_value == report.closed_form_value, || {
        format!(
            "oracle {} vs closed form {}",
            format_rational(&report.best_value),
            format_rational(&report.closed_form_value)
        )
    });

    let keys: BTreeSet<CanonicalKey> = report.argmax.iter().map(|a| a.key).collect();
    let mut designs = CheckResult::new("designs_in_argmax");
    let (optimal_s, _) = closed_form::optimal_singletons(n, u)?;
    for s in optimal_s {
        let net = designer::design_network(n, s, u)?;
        let key = net.graph.canonical_form()?;
        designs.record(keys.contains(&key), || format!("{} design with s = {s} is not optimal", net.topology));
    }

    let mut small = CheckResult::new("no_small_components");
    let mut cp = CheckResult::new("maximal_core_periphery");
    let mut two_conn = CheckResult::new("two_connected_degree_two");
    let mut support = CheckResult::new("hider_support");
    for a in &report.argmax {
        let comps = a.graph.components();
        let sizes: Vec<usize> = comps.components.iter().map(Vec::len).collect();
        small.record(!sizes.iter().any(|&c| c == 2 || c == 3), || {
            format!("{} has component sizes {sizes:?}", describe(a))
        });

        let (s, part) = non_singleton_part(&a.graph);
        let k = n - s;
        if k < 4 {
            continue;
        }
        let t = closed_form::threshold_t(n, s, u)?;
        if t < u.beta {
            cp.record(is_maximal_core_periphery(&part), || {
                format!("{} is not maximal core-periphery", describe(a))
            });
        } else if t > u.beta {
            let deg_two = (0..k).filter(|&v| part.degree(v) == 2).count();
            two_conn.record(part.is_two_connected() && deg_two >= k.div_ceil(3), || {
                format!("{} fails 2-connectivity or has {deg_two} degree-2 nodes", describe(a))
            });
            let heavy: Vec<usize> = (0..n).filter(|&v| a.graph.degree(v) > 2).collect();
            let vertex_ok = heavy.iter().all(|&v| a.solution.row_strategy.probs()[v].is_zero());
            let all_ok = vertex_ok
                && (n > FULL_SUPPORT_CHECK_MAX_NODES || {
                    let matrix = payoff::payoff_matrix(&a.graph, u)?;
                    heavy
                        .iter()
                        .all(|&v| game::max_optimal_row_mass(&matrix, &a.solution.value, v).is_zero())
                });
            support.record(all_ok, || format!("{} admits hiding on a node of degree > 2", describe(a)));
        }
    }
    Ok(vec![value, designs, small, cp, two_conn, support])
}

/// Raising `beta` must never raise the hider's optimum. `reports` must share
/// `n` and the component-value function.
pub fn check_beta_monotonicity(reports: &[&EnumerationReport]) -> CheckResult {
    let mut sorted: Vec<&EnumerationReport> = reports.to_vec();
    sorted.sort_by(|a, b| a.utility.beta.cmp(&b.utility.beta));
    let mut check = CheckResult::new("beta_monotonicity");
    for pair in sorted.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        check.record(hi.best_value <= lo.best_value, || {
            format!(
                "n = {}: value {} at beta {} exceeds {} at beta {}",
                lo.n,
                format_rational(&hi.best_value),
                format_rational(&hi.utility.beta),
                format_rational(&lo.best_value),
                format_rational(&lo.utility.beta)
            )
        });
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designer::build_maximal_cp;
    use crate::rational::{int, rat};

    #[test]
    fn small_graph_counts() {
        let counts: Vec<usize> = (0..=6).map(|n| graph_count(n).unwrap()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 11, 34, 156]);
        assert!(enumerate_graphs(9).is_err());
    }

    #[test]
    fn enumerated_graphs_are_canonical_and_distinct() {
        let graphs = enumerate_graphs(5).unwrap();
        let keys: BTreeSet<CanonicalKey> = graphs.iter().map(|g| g.canonical_form().unwrap()).collect();
        assert_eq!(keys.len(), graphs.len());
        assert!(graphs.iter().all(|g| g.canonical_form().unwrap().to_graph() == *g));
    }

    #[test]
    fn recognizes_maximal_core_periphery() {
        for k in 4..=9 {
            assert!(is_maximal_core_periphery(&build_maximal_cp(k).unwrap().graph), "k = {k}");
        }
        assert!(!is_maximal_core_periphery(&designer::build_cycle(6).unwrap()));
    }

    #[test]
    fn four_nodes_zero_penalty() {
        // Two disjoint edges tie the path on four nodes: both are worth 1.
        let report = exhaustive_optimum(4, &UtilitySpec::identity(int(0))).unwrap();
        assert_eq!(report.graph_count, 11);
        assert_eq!(report.best_value, int(1));
        assert!(report.check("closed_form_value").unwrap().passed);
        assert!(report.check("designs_in_argmax").unwrap().passed);
        let two_edges = Graph::from_edges(4, [(0, 3), (1, 2)]).unwrap().canonical_form().unwrap();
        assert_eq!(report.argmax.len(), 2);
        assert!(report.argmax.iter().any(|a| a.key == two_edges));
        assert!(!report.check("no_small_components").unwrap().passed);
    }

    #[test]
    fn six_nodes_identity() {
        let report = exhaustive_optimum(6, &UtilitySpec::identity(int(2))).unwrap();
        assert_eq!(report.best_value, report.closed_form_value);
        assert!(report.passed(), "{:#?}", report.structural_checks);
        let unique = exhaustive_optimum(6, &UtilitySpec::identity(int(5))).unwrap();
        assert!(unique.passed(), "{:#?}", unique.structural_checks);
    }

    #[test]
    fn mutated_prediction_is_caught() {
        let report = exhaustive_optimum_against(5, &UtilitySpec::identity(int(1)), |_, _| Ok(rat(99, 1))).unwrap();
        assert!(!report.check("closed_form_value").unwrap().passed);
        assert!(!report.passed());
    }

    #[test]
    fn beta_monotonicity() {
        let reports: Vec<EnumerationReport> = [0, 1, 5]
            .iter()
            .map(|&b| exhaustive_optimum(5, &UtilitySpec::identity(int(b))).unwrap())
            .collect();
        let refs: Vec<&EnumerationReport> = reports.iter().collect();
        assert!(check_beta_monotonicity(&refs).passed);
    }

    #[test]
    fn worker_count_does_not_change_reports() {
        let u = UtilitySpec::square(rat(1, 2));
        let a = exhaustive_optimum(5, &u).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| exhaustive_optimum(5, &u).unwrap());
        assert_eq!(a, b);
    }
}
