//! Undirected simple graphs, connectivity queries, and the seeker-side node
//! classification used to build the seeking strategy.

use std::collections::{BTreeSet, HashMap, VecDeque};
use thiserror::Error;

/// Largest node count accepted by [`Graph::canonical_form`].
pub const MAX_CANONICAL_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node {node} out of range for a graph on {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("canonical form supports at most {max} nodes, got {node_count}")]
    TooLarge { node_count: usize, max: usize },
}

/// Undirected simple graph over nodes `0..node_count`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

/// Connected components, ordered by their smallest node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn size_of(&self, node: usize) -> usize {
        self.components[self.component_of[node]].len()
    }
}

/// Node classes driving the seeker's strategy.
///
/// `singletons`, `singleton_leaves`, `m_nodes` and `r_nodes` partition the
/// node set. `gr` is the subgraph induced by `r_nodes`; its local node `i`
/// is original node `gr_nodes[i]`. `d_gr` holds the (original ids of) nodes
/// lying in two-node components of `gr`.
///
/// A component that is a single edge has two leaves each adjacent to a leaf.
/// Its lower endpoint is put in `m_nodes` and the upper one in
/// `singleton_leaves`, which keeps the classes disjoint and pairs every
/// `m_nodes` entry with exactly one singleton leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeekerPartition {
    pub singletons: BTreeSet<usize>,
    pub leaves: BTreeSet<usize>,
    pub leaf_neighbor_count: Vec<usize>,
    pub m_nodes: BTreeSet<usize>,
    pub singleton_leaves: BTreeSet<usize>,
    pub r_nodes: BTreeSet<usize>,
    pub gr: Graph,
    pub gr_nodes: Vec<usize>,
    pub d_gr: BTreeSet<usize>,
}

impl SeekerPartition {
    pub fn s(&self) -> usize {
        self.singletons.len()
    }

    pub fn m(&self) -> usize {
        self.m_nodes.len()
    }
}

/// Isomorphism-invariant key: node count plus the minimal upper-triangle
/// adjacency bitmask over the admissible relabelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub node_count: usize,
    pub bits: u64,
}

impl CanonicalKey {
    /// Rebuilds the canonically labeled graph this key encodes.
    pub fn to_graph(&self) -> Graph {
        let n = self.node_count;
        let mut g = Graph::empty(n);
        for j in 1..n {
            for i in 0..j {
                if self.bits >> pair_index(i, j) & 1 == 1 {
                    g.adj[i].insert(j);
                    g.adj[j].insert(i);
                }
            }
        }
        g
    }
}

fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

impl Graph {
    pub fn empty(node_count: usize) -> Self {
        Graph {
            adj: vec![BTreeSet::new(); node_count],
        }
    }

    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(node_count);
        for (i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<(), GraphError> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        if !self.adj[i].insert(j) {
            return Err(GraphError::DuplicateEdge(i.min(j), i.max(j)));
        }
        self.adj[j].insert(i);
        Ok(())
    }

    pub fn check_node(&self, node: usize) -> Result<(), GraphError> {
        if node < self.node_count() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                node,
                node_count: self.node_count(),
            })
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, nbrs)| nbrs.range(i + 1..).map(move |&j| (i, j)))
            .collect()
    }

    pub fn neighbors(&self, node: usize) -> &BTreeSet<usize> {
        &self.adj[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj.get(i).is_some_and(|n| n.contains(&j))
    }

    pub fn components(&self) -> ComponentPartition {
        let n = self.node_count();
        let mut component_of = vec![usize::MAX; n];
        let mut components = Vec::new();
        for start in 0..n {
            if component_of[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = vec![start];
            component_of[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if component_of[w] == usize::MAX {
                        component_of[w] = id;
                        members.push(w);
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        ComponentPartition {
            components,
            component_of,
        }
    }

    /// Size of `node`'s component once `removed` (and its edges) is deleted.
    /// Returns 0 when `node == removed`.
    pub fn component_size_without(&self, node: usize, removed: usize) -> usize {
        if node == removed {
            return 0;
        }
        let mut seen = vec![false; self.node_count()];
        seen[node] = true;
        seen[removed] = true;
        let mut stack = vec![node];
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        size
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Residual network `G - k`. Survivors keep their relative order and are
    /// renumbered `0..n-1`; the returned vector maps old ids to new ones.
    pub fn remove_node(&self, k: usize) -> Result<(Graph, Vec<Option<usize>>), GraphError> {
        self.check_node(k)?;
        let old_to_new: Vec<Option<usize>> = (0..self.node_count())
            .map(|v| match v.cmp(&k) {
                std::cmp::Ordering::Less => Some(v),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(v - 1),
            })
            .collect();
        let mut g = Graph::empty(self.node_count() - 1);
        for (i, j) in self.edges() {
            if let (Some(a), Some(b)) = (old_to_new[i], old_to_new[j]) {
                g.adj[a].insert(b);
                g.adj[b].insert(a);
            }
        }
        Ok((g, old_to_new))
    }

    /// Subgraph induced by `nodes`, renumbered in ascending order of the
    /// original ids. Duplicates in `nodes` are ignored.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph, GraphError> {
        self.induced_subgraph_with_map(nodes).map(|(g, _)| g)
    }

    /// Like [`Graph::induced_subgraph`], also returning new id -> old id.
    pub fn induced_subgraph_with_map(
        &self,
        nodes: &[usize],
    ) -> Result<(Graph, Vec<usize>), GraphError> {
        let kept: BTreeSet<usize> = nodes.iter().copied().collect();
        for &v in &kept {
            self.check_node(v)?;
        }
        let new_to_old: Vec<usize> = kept.into_iter().collect();
        let old_to_new: HashMap<usize, usize> =
            new_to_old.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let mut g = Graph::empty(new_to_old.len());
        for (new_i, &old_i) in new_to_old.iter().enumerate() {
            for old_j in &self.adj[old_i] {
                if let Some(&new_j) = old_to_new.get(old_j) {
                    g.adj[new_i].insert(new_j);
                }
            }
        }
        Ok((g, new_to_old))
    }

    /// Connected on at least three nodes and still connected after deleting
    /// any single node. Graphs with two or fewer nodes are never 2-connected.
    pub fn is_two_connected(&self) -> bool {
        let n = self.node_count();
        if n < 3 || !self.is_connected() {
            return false;
        }
        (0..n).all(|k| {
            let start = if k == 0 { 1 } else { 0 };
            self.component_size_without(start, k) == n - 1
        })
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.node_count(), "permutation length mismatch");
        let mut g = Graph::empty(self.node_count());
        for (i, j) in self.edges() {
            g.adj[perm[i]].insert(perm[j]);
            g.adj[perm[j]].insert(perm[i]);
        }
        g
    }

    pub fn classify(&self) -> SeekerPartition {
        let n = self.node_count();
        let singletons: BTreeSet<usize> = (0..n).filter(|&v| self.degree(v) == 0).collect();
        let leaves: BTreeSet<usize> = (0..n).filter(|&v| self.degree(v) == 1).collect();
        let leaf_neighbor_count: Vec<usize> = (0..n)
            .map(|v| self.adj[v].iter().filter(|w| leaves.contains(w)).count())
            .collect();

        // Upper endpoints of isolated edges are demoted to singleton leaves.
        let m_nodes: BTreeSet<usize> = (0..n)
            .filter(|&v| leaf_neighbor_count[v] == 1)
            .filter(|&v| {
                !(self.degree(v) == 1 && self.adj[v].iter().all(|&w| self.degree(w) == 1 && w < v))
            })
            .collect();
        let singleton_leaves: BTreeSet<usize> = leaves
            .iter()
            .copied()
            .filter(|v| !m_nodes.contains(v))
            .filter(|&v| self.adj[v].iter().any(|w| m_nodes.contains(w)))
            .collect();
        let r_nodes: BTreeSet<usize> = (0..n)
            .filter(|v| {
                !singletons.contains(v) && !singleton_leaves.contains(v) && !m_nodes.contains(v)
            })
            .collect();

        let r_list: Vec<usize> = r_nodes.iter().copied().collect();
        let (gr, gr_nodes) = self
            .induced_subgraph_with_map(&r_list)
            .expect("R(G) nodes are valid");
        let gr_parts = gr.components();
        let d_gr: BTreeSet<usize> = gr_parts
            .components
            .iter()
            .filter(|c| c.len() == 2)
            .flatten()
            .map(|&local| gr_nodes[local])
            .collect();

        SeekerPartition {
            singletons,
            leaves,
            leaf_neighbor_count,
            m_nodes,
            singleton_leaves,
            r_nodes,
            gr,
            gr_nodes,
            d_gr,
        }
    }

    /// Canonical key for isomorphism testing on at most
    /// [`MAX_CANONICAL_NODES`] nodes.
    ///
    /// Nodes are first split into cells by iterated degree refinement; the key
    /// is the minimum adjacency bitmask over all labelings that place cells in
    /// refinement order and permute nodes freely inside each cell.
    pub fn canonical_form(&self) -> Result<CanonicalKey, GraphError> {
        let n = self.node_count();
        if n > MAX_CANONICAL_NODES {
            return Err(GraphError::TooLarge {
                node_count: n,
                max: MAX_CANONICAL_NODES,
            });
        }
        let colors = self.refined_colors();
        let mut cells: Vec<Vec<usize>> = Vec::new();
        let color_count = colors.iter().max().map_or(0, |c| c + 1);
        cells.resize(color_count, Vec::new());
        for (v, &c) in colors.iter().enumerate() {
            cells[c].push(v);
        }
        let edges = self.edges();
        let mut position = vec![0usize; n];
        let mut best = u64::MAX;
        assign_cells(&cells, 0, 0, &mut position, &mut |pos| {
            let bits = edges.iter().fold(0u64, |acc, &(i, j)| {
                let (a, b) = (pos[i].min(pos[j]), pos[i].max(pos[j]));
                acc | 1 << pair_index(a, b)
            });
            best = best.min(bits);
        });
        Ok(CanonicalKey {
            node_count: n,
            bits: if n == 0 || edges.is_empty() { 0 } else { best },
        })
    }

    /// Stable colour refinement; colours are ranks of invariant signatures.
    fn refined_colors(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut colors: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        colors = rank(&colors);
        loop {
            let signatures: Vec<(usize, Vec<usize>)> = (0..n)
                .map(|v| {
                    let mut nbr: Vec<usize> = self.adj[v].iter().map(|&w| colors[w]).collect();
                    nbr.sort_unstable();
                    (colors[v], nbr)
                })
                .collect();
            let next = rank(&signatures);
            let before = colors.iter().collect::<BTreeSet<_>>().len();
            let after = next.iter().collect::<BTreeSet<_>>().len();
            colors = next;
            if after == before {
                return colors;
            }
        }
    }
}

fn rank<T: Ord + Clone>(values: &[T]) -> Vec<usize> {
    let distinct: Vec<T> = values
        .iter()
        .cloned()
        .collect::<BTreeSet<T>>()
        .into_iter()
        .collect();
    values
        .iter()
        .map(|v| distinct.binary_search(v).expect("value present"))
        .collect()
}

/// Enumerates every assignment of positions that keeps each cell on its own
/// contiguous block, invoking `visit` with the full node -> position map.
fn assign_cells<F: FnMut(&[usize])>(
    cells: &[Vec<usize>],
    cell: usize,
    offset: usize,
    position: &mut Vec<usize>,
    visit: &mut F,
) {
    if cell == cells.len() {
        visit(position);
        return;
    }
    let members = &cells[cell];
    let mut order: Vec<usize> = members.clone();
    permute_into(&mut order, 0, &mut |perm| {
        for (slot, &v) in perm.iter().enumerate() {
            position[v] = offset + slot;
        }
        assign_cells(cells, cell + 1, offset + members.len(), position, visit);
    });
}

fn permute_into<F: FnMut(&[usize])>(items: &mut Vec<usize>, k: usize, visit: &mut F) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute_into(items, k + 1, visit);
        items.swap(k, i);
    }
}
