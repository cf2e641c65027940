//! Optimal network constructors and the equilibrium strategies played on them.

use crate::closed_form::{self, ClosedFormError};
use crate::game::{self, GameError, MixedStrategy};
use crate::graph::{Graph, GraphError};
use crate::payoff::{self, PayoffError, UtilitySpec, UtilityError};
use crate::rational::{self, Rational};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("cycle needs at least 3 nodes, got {0}")]
    CycleTooSmall(usize),
    #[error("maximal core-periphery component needs at least 4 nodes, got {0}")]
    ComponentTooSmall(usize),
    #[error("core-periphery spec: {0}")]
    InvalidCorePeriphery(String),
    #[error("chorded cycle: {0}")]
    InvalidChord(String),
    #[error("constructed strategies are not an equilibrium (regrets {row}, {col})")]
    NotEquilibrium { row: String, col: String },
    #[error("equilibrium payoff {got} differs from the predicted {expected}")]
    ValueMismatch { expected: String, got: String },
}

type Result<T> = std::result::Result<T, DesignError>;

/// Shape of the non-singleton component of a designed network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Cycle,
    MaximalCpEven,
    MaximalCpOdd,
    AllSingletons,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Cycle => "cycle",
            Topology::MaximalCpEven => "maximal_cp_even",
            Topology::MaximalCpOdd => "maximal_cp_odd",
            Topology::AllSingletons => "all_singletons",
        })
    }
}

/// Core-periphery layout: core nodes `0..q` joined by `core_edges`, and
/// periphery node `q + i` attached to core node `pairing[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorePeripherySpec {
    pub q: usize,
    pub m: usize,
    pub core_edges: Vec<(usize, usize)>,
    pub pairing: Vec<usize>,
}

pub fn build_cycle(k: usize) -> Result<Graph> {
    if k < 3 {
        return Err(DesignError::CycleTooSmall(k));
    }
    Ok(Graph::from_edges(k, (0..k).map(|i| (i, (i + 1) % k)))?)
}

pub fn build_core_periphery(spec: &CorePeripherySpec) -> Result<Graph> {
    let bad = |msg: String| Err(DesignError::InvalidCorePeriphery(msg));
    if spec.q == 0 {
        return bad("core must be nonempty".into());
    }
    if spec.m > spec.q {
        return bad(format!("periphery {} exceeds core {}", spec.m, spec.q));
    }
    if spec.pairing.len() != spec.m {
        return bad(format!("pairing has {} entries for {} periphery nodes", spec.pairing.len(), spec.m));
    }
    let distinct: BTreeSet<usize> = spec.pairing.iter().copied().collect();
    if distinct.len() != spec.m || distinct.iter().any(|&c| c >= spec.q) {
        return bad("periphery nodes must attach to distinct core nodes".into());
    }
    let core = Graph::from_edges(spec.q, spec.core_edges.iter().copied())?;
    if !core.is_connected() {
        return bad("core graph is disconnected".into());
    }
    let mut g = Graph::from_edges(spec.q + spec.m, spec.core_edges.iter().copied())?;
    for (i, &c) in spec.pairing.iter().enumerate() {
        g.add_edge(c, spec.q + i)?;
    }
    Ok(g)
}

/// A maximal core-periphery component and the role of each node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalCp {
    pub graph: Graph,
    pub core: Vec<usize>,
    pub periphery: Vec<usize>,
    pub orphans: Vec<usize>,
    /// The orphan adjacent to exactly the two other orphans (odd sizes only).
    pub middle_orphan: Option<usize>,
}

/// Maximal core-periphery network on `k >= 4` nodes.
///
/// Even `k`: `k/2` periphery nodes on a cycle core (a single edge when
/// `k = 4`). Odd `k`: `(k-3)/2` periphery nodes and three orphans placed
/// consecutively on the core cycle, so the middle one touches only the
/// other two orphans. Core nodes come first, then periphery nodes.
pub fn build_maximal_cp(k: usize) -> Result<MaximalCp> {
    if k < 4 {
        return Err(DesignError::ComponentTooSmall(k));
    }
    let (q, m) = if k.is_multiple_of(2) { (k / 2, k / 2) } else { ((k + 3) / 2, (k - 3) / 2) };
    let core_edges: Vec<(usize, usize)> = if q == 2 {
        vec![(0, 1)]
    } else {
        (0..q).map(|i| (i, (i + 1) % q)).collect()
    };
    let spec = CorePeripherySpec {
        q,
        m,
        core_edges,
        pairing: (0..m).collect(),
    };
    let graph = build_core_periphery(&spec)?;
    let orphans: Vec<usize> = (m..q).collect();
    Ok(MaximalCp {
        graph,
        core: (0..q).collect(),
        periphery: (q..q + m).collect(),
        middle_orphan: (k % 2 == 1).then_some(m + 1),
        orphans,
    })
}

/// Cycle on `3t` nodes where the nodes `0, 3, 6, ...` form the set `T`
/// (consecutive members separated by two other nodes), plus `chords`
/// between nodes outside `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChordedCycle {
    pub graph: Graph,
    pub t_nodes: Vec<usize>,
}

pub fn build_chorded_cycle(t: usize, chords: &[(usize, usize)]) -> Result<ChordedCycle> {
    if t < 2 {
        return Err(DesignError::InvalidChord(format!("t = {t} must be at least 2")));
    }
    let k = 3 * t;
    let mut graph = build_cycle(k)?;
    let t_nodes: Vec<usize> = (0..t).map(|i| 3 * i).collect();
    for &(a, b) in chords {
        if a >= k || b >= k {
            return Err(DesignError::InvalidChord(format!("chord {a}-{b} leaves the cycle")));
        }
        if a % 3 == 0 || b % 3 == 0 {
            return Err(DesignError::InvalidChord(format!("chord {a}-{b} touches T")));
        }
        if graph.has_edge(a, b) {
            return Err(DesignError::InvalidChord(format!("chord {a}-{b} already present")));
        }
        graph.add_edge(a, b)?;
    }
    Ok(ChordedCycle { graph, t_nodes })
}

/// Every chord allowed on the `3t`-cycle: pairs outside `T` not already
/// adjacent on the cycle.
pub fn admissible_chords(t: usize) -> Vec<(usize, usize)> {
    let k = 3 * t;
    let free: Vec<usize> = (0..k).filter(|v| v % 3 != 0).collect();
    let mut out = Vec::new();
    for (i, &a) in free.iter().enumerate() {
        for &b in &free[i + 1..] {
            if b != a + 1 && !(a == 0 && b == k - 1) {
                out.push((a, b));
            }
        }
    }
    out
}

/// The seeker's strategy built from the node classification of `g`:
/// `lambda_S` on singletons, then `lambda_R` on `R(G)` (weighted by leaf
/// neighbours inside `G[R]`) and the rest uniformly on `M(G)`.
pub fn seeker_strategy(g: &Graph, u: &UtilitySpec) -> Result<MixedStrategy> {
    let n = g.node_count();
    if n == 0 {
        return Err(PayoffError::EmptyGraph.into());
    }
    u.validate(n)?;
    let part = g.classify();
    let (s, m) = (part.s(), part.m());
    if s == n {
        return Ok(MixedStrategy::uniform(n));
    }
    let k = n - s;
    let r_empty = part.r_nodes.is_empty();
    let lambda_s = closed_form::lambda_s_unchecked(n, m, s, u)?;
    let lambda_r = closed_form::lambda_r_unchecked(n, m, s, u, r_empty)?;
    let one = Rational::one();
    let mut probs = vec![Rational::zero(); n];

    if s > 0 && !lambda_s.is_zero() {
        let w = &lambda_s / rational::int(s as i64);
        for &v in &part.singletons {
            probs[v] += &w;
        }
    }
    let outside = &one - &lambda_s;
    if m > 0 && lambda_r != one {
        let w = &outside * (&one - &lambda_r) / rational::int(m as i64);
        for &v in &part.m_nodes {
            probs[v] += &w;
        }
    }
    if !r_empty && !lambda_r.is_zero() {
        let r_size = rational::int((k - 2 * m) as i64);
        let base = &outside * &lambda_r / r_size;
        let gr = &part.gr;
        for (local, &v) in part.gr_nodes.iter().enumerate() {
            let weight = if part.d_gr.contains(&v) {
                one.clone()
            } else if gr.degree(local) == 1 {
                Rational::zero()
            } else {
                let leaf_nbrs = gr.neighbors(local).iter().filter(|&&w| gr.degree(w) == 1).count();
                rational::int(leaf_nbrs as i64 + 1)
            };
            probs[v] += &base * weight;
        }
    }
    Ok(MixedStrategy::new(probs)?)
}

/// The optimal network for a fixed singleton count, with node
/// roles recorded at construction time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignedNetwork {
    pub n: usize,
    pub s: usize,
    pub topology: Topology,
    pub graph: Graph,
    /// Non-singleton nodes occupy `0..n-s`; singletons follow.
    pub component: Vec<usize>,
    pub singletons: Vec<usize>,
    pub core: Vec<usize>,
    pub periphery: Vec<usize>,
    pub orphans: Vec<usize>,
    pub middle_orphan: Option<usize>,
}

/// Builds the optimal network with exactly `s` singletons: a cycle when
/// `T(n, s) >= beta`, a maximal core-periphery component otherwise.
pub fn design_network(n: usize, s: usize, u: &UtilitySpec) -> Result<DesignedNetwork> {
    closed_form::check_singletons(n, s)?;
    let k = n - s;
    let singletons: Vec<usize> = (k..n).collect();
    let mut net = DesignedNetwork {
        n,
        s,
        topology: Topology::AllSingletons,
        graph: Graph::empty(n),
        component: (0..k).collect(),
        singletons,
        core: Vec::new(),
        periphery: Vec::new(),
        orphans: Vec::new(),
        middle_orphan: None,
    };
    if k == 0 {
        return Ok(net);
    }
    let component = if closed_form::threshold_t(n, s, u)? >= u.beta {
        net.topology = Topology::Cycle;
        build_cycle(k)?
    } else {
        let cp = build_maximal_cp(k)?;
        net.topology = if k.is_multiple_of(2) { Topology::MaximalCpEven } else { Topology::MaximalCpOdd };
        net.core = cp.core;
        net.periphery = cp.periphery;
        net.orphans = cp.orphans;
        net.middle_orphan = cp.middle_orphan;
        cp.graph
    };
    for (i, j) in component.edges() {
        net.graph.add_edge(i, j)?;
    }
    Ok(net)
}

/// Equilibrium hiding strategy on a designed network: weight `kappa` on the
/// component (uniform on a cycle, uniform on the periphery of an even
/// core-periphery component, periphery versus middle orphan by `mu` on an
/// odd one) and `1 - kappa` uniformly on singletons.
pub fn hider_strategy(net: &DesignedNetwork, u: &UtilitySpec) -> Result<MixedStrategy> {
    let (n, s) = (net.n, net.s);
    if net.topology == Topology::AllSingletons {
        return Ok(MixedStrategy::uniform(n));
    }
    let abar = closed_form::value_abar(n, s, u)?;
    let kappa = closed_form::mixing_kappa(n, s, u, &abar)?;
    let one = Rational::one();
    let mut probs = vec![Rational::zero(); n];
    let spread = |probs: &mut Vec<Rational>, nodes: &[usize], mass: &Rational| {
        if nodes.is_empty() || mass.is_zero() {
            return;
        }
        let w = mass / rational::int(nodes.len() as i64);
        for &v in nodes {
            probs[v] += &w;
        }
    };
    match net.topology {
        Topology::Cycle => spread(&mut probs, &net.component, &kappa),
        Topology::MaximalCpEven => spread(&mut probs, &net.periphery, &kappa),
        Topology::MaximalCpOdd => {
            let mu = closed_form::mixing_mu(n, s, u)?;
            spread(&mut probs, &net.periphery, &(&kappa * &mu));
            let middle = net.middle_orphan.expect("odd design records its middle orphan");
            probs[middle] += &kappa * (&one - &mu);
        }
        Topology::AllSingletons => unreachable!(),
    }
    spread(&mut probs, &net.singletons, &(&one - &kappa));
    Ok(MixedStrategy::new(probs)?)
}

/// Probability that the hider is caught, conditional on both players acting
/// inside `region` (all nodes when `None`).
pub fn capture_probability(
    g: &Graph,
    hider: &MixedStrategy,
    seeker: &MixedStrategy,
    region: Option<&[usize]>,
) -> Rational {
    let all: Vec<usize> = (0..g.node_count()).collect();
    let nodes = region.unwrap_or(&all);
    let mut caught = Rational::zero();
    for &h in nodes {
        for &k in nodes {
            if h == k || g.has_edge(h, k) {
                caught += &hider.probs()[h] * &seeker.probs()[k];
            }
        }
    }
    let mass = hider.mass_on(nodes.iter().copied()) * seeker.mass_on(nodes.iter().copied());
    if mass.is_zero() {
        Rational::zero()
    } else {
        caught / mass
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignResult {
    pub n: usize,
    pub s_star: usize,
    /// Full optimal set `S*(n)`; `s_star` is its smallest element.
    pub optimal_s: Vec<usize>,
    pub topology: Topology,
    pub network: DesignedNetwork,
    pub hider: MixedStrategy,
    pub seeker: MixedStrategy,
    /// Hider's equilibrium payoff `-Q-bar(n, s_star)`.
    pub predicted_value: Rational,
}

impl DesignResult {
    pub fn graph(&self) -> &Graph {
        &self.network.graph
    }
}

/// Checks that `(hider, seeker)` is an equilibrium of the game on `g` worth
/// `expected` to the hider.
pub fn verify_equilibrium(
    g: &Graph,
    u: &UtilitySpec,
    hider: &MixedStrategy,
    seeker: &MixedStrategy,
    expected: &Rational,
) -> Result<()> {
    let matrix = payoff::payoff_matrix(g, u)?;
    let (row, col) = game::best_response_gap(&matrix, hider, seeker)?;
    if !row.is_zero() || !col.is_zero() {
        return Err(DesignError::NotEquilibrium {
            row: rational::format_rational(&row),
            col: rational::format_rational(&col),
        });
    }
    let value = game::expected_payoff(&matrix, hider, seeker)?;
    if value != *expected {
        return Err(DesignError::ValueMismatch {
            expected: rational::format_rational(expected),
            got: rational::format_rational(&value),
        });
    }
    Ok(())
}

/// Optimal design for `n` nodes: smallest `s` in `S*(n)`, the matching
/// network, both equilibrium strategies, and a zero-regret check.
pub fn design_optimal(n: usize, u: &UtilitySpec) -> Result<DesignResult> {
    u.validate(n)?;
    let (optimal_s, min_qbar) = closed_form::optimal_singletons(n, u)?;
    let s_star = optimal_s[0];
    let network = design_network(n, s_star, u)?;
    let hider = hider_strategy(&network, u)?;
    let seeker = seeker_strategy(&network.graph, u)?;
    let predicted_value = -min_qbar;
    verify_equilibrium(&network.graph, u, &hider, &seeker, &predicted_value)?;
    Ok(DesignResult {
        n,
        s_star,
        optimal_s,
        topology: network.topology,
        network,
        hider,
        seeker,
        predicted_value,
    })
}
