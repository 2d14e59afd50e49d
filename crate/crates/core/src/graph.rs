//! Directed multigraphs and Eulerian multi-edge sets.
//!
//! Edges are identified by their position in the edge list; a
//! [`MultiEdgeSet`] is an integer multiplicity per edge id (the incidence
//! vector of a multi-subset). All costs are exact rationals.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::ratio::{format_rat, rat_zero, Rat};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub cost: Rat,
}

/// A directed multigraph with nonnegative rational edge costs.
///
/// Immutable after construction; adjacency lists are kept sorted by edge id
/// so every traversal in the crate is deterministic.
#[derive(Debug, Clone)]
pub struct MultiDigraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
}

impl MultiDigraph {
    pub fn new(vertex_count: usize, edge_list: Vec<(VertexId, VertexId, Rat)>) -> Result<Self> {
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut out_edges = vec![Vec::new(); vertex_count];
        let mut in_edges = vec![Vec::new(); vertex_count];
        for (id, (tail, head, cost)) in edge_list.into_iter().enumerate() {
            if tail >= vertex_count || head >= vertex_count {
                return Err(Error::InvalidInput(format!(
                    "edge {} endpoints ({}, {}) outside vertex range 0..{}",
                    id, tail, head, vertex_count
                )));
            }
            if cost.is_negative() {
                return Err(Error::InvalidInput(format!(
                    "edge {} has negative cost {}",
                    id,
                    format_rat(&cost)
                )));
            }
            out_edges[tail].push(id);
            in_edges[head].push(id);
            edges.push(Edge { tail, head, cost });
        }
        Ok(MultiDigraph {
            vertex_count,
            edges,
            out_edges,
            in_edges,
        })
    }

    /// Unit-cost convenience constructor.
    pub fn unit(vertex_count: usize, arcs: &[(VertexId, VertexId)]) -> Result<Self> {
        Self::new(
            vertex_count,
            arcs.iter()
                .map(|&(t, h)| (t, h, Rat::from_integer(1.into())))
                .collect(),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn cost(&self, e: EdgeId) -> &Rat {
        &self.edges[e].cost
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.vertex_count
    }

    fn check_edge_id(&self, e: EdgeId) -> Result<()> {
        if e >= self.edges.len() {
            Err(Error::InvalidInput(format!(
                "edge id {} out of range (graph has {} edges)",
                e,
                self.edges.len()
            )))
        } else {
            Ok(())
        }
    }
}

/// Multiplicity map edge id → count: the incidence vector of a multi-subset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiEdgeSet {
    mult: BTreeMap<EdgeId, u64>,
}

impl MultiEdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edge_ids<I: IntoIterator<Item = EdgeId>>(ids: I) -> Self {
        let mut s = Self::new();
        for e in ids {
            s.add(e, 1);
        }
        s
    }

    pub fn add(&mut self, e: EdgeId, k: u64) {
        if k > 0 {
            *self.mult.entry(e).or_insert(0) += k;
        }
    }

    /// Removes up to `k` copies; returns how many were actually removed.
    pub fn remove(&mut self, e: EdgeId, k: u64) -> u64 {
        match self.mult.get_mut(&e) {
            None => 0,
            Some(m) => {
                let taken = k.min(*m);
                *m -= taken;
                if *m == 0 {
                    self.mult.remove(&e);
                }
                taken
            }
        }
    }

    pub fn multiplicity(&self, e: EdgeId) -> u64 {
        self.mult.get(&e).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, u64)> + '_ {
        self.mult.iter().map(|(&e, &m)| (e, m))
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    /// Total number of edges counting multiplicity.
    pub fn total_edges(&self) -> u64 {
        self.mult.values().sum()
    }

    pub fn add_set(&mut self, other: &MultiEdgeSet) {
        for (e, m) in other.iter() {
            self.add(e, m);
        }
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a MultiEdgeSet>>(parts: I) -> MultiEdgeSet {
        let mut out = MultiEdgeSet::new();
        for p in parts {
            out.add_set(p);
        }
        out
    }

    pub fn cost(&self, g: &MultiDigraph) -> Rat {
        let mut total = rat_zero();
        for (e, m) in self.iter() {
            total += g.cost(e) * Rat::from_integer(m.into());
        }
        total
    }

    /// Edges of the multiset with both endpoints inside `verts` (the
    /// induced multi-subset `E[V']`).
    pub fn restrict_to(&self, g: &MultiDigraph, verts: &BTreeSet<VertexId>) -> MultiEdgeSet {
        let mut out = MultiEdgeSet::new();
        for (e, m) in self.iter() {
            let edge = g.edge(e);
            if verts.contains(&edge.tail) && verts.contains(&edge.head) {
                out.add(e, m);
            }
        }
        out
    }

    /// Endpoints of all edges with positive multiplicity.
    pub fn touched_vertices(&self, g: &MultiDigraph) -> BTreeSet<VertexId> {
        let mut vs = BTreeSet::new();
        for (e, _) in self.iter() {
            vs.insert(g.edge(e).tail);
            vs.insert(g.edge(e).head);
        }
        vs
    }

    /// Multiplicity-weighted number of edges of the set entering `v`.
    pub fn in_degree(&self, g: &MultiDigraph, v: VertexId) -> u64 {
        g.in_edges(v).iter().map(|&e| self.multiplicity(e)).sum()
    }

    pub fn out_degree(&self, g: &MultiDigraph, v: VertexId) -> u64 {
        g.out_edges(v).iter().map(|&e| self.multiplicity(e)).sum()
    }
}

/// A simple directed cycle, stored as a cyclically ordered edge sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    edges: Vec<EdgeId>,
}

impl Circuit {
    /// Validates that `edges` is a closed edge sequence visiting no vertex
    /// twice.
    pub fn new(g: &MultiDigraph, edges: Vec<EdgeId>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidInput("empty circuit".into()));
        }
        let mut seen = BTreeSet::new();
        for (i, &e) in edges.iter().enumerate() {
            g.check_edge_id(e)?;
            let next = edges[(i + 1) % edges.len()];
            if g.edge(e).head != g.edge(next).tail {
                return Err(Error::InvalidInput(format!(
                    "circuit breaks between edges {} and {}",
                    e, next
                )));
            }
            if !seen.insert(g.edge(e).tail) {
                return Err(Error::InvalidInput(format!(
                    "circuit revisits vertex {}",
                    g.edge(e).tail
                )));
            }
        }
        Ok(Circuit { edges })
    }

    pub fn edge_ids(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn vertices(&self, g: &MultiDigraph) -> BTreeSet<VertexId> {
        self.edges.iter().map(|&e| g.edge(e).tail).collect()
    }

    pub fn cost(&self, g: &MultiDigraph) -> Rat {
        self.edges.iter().map(|&e| g.cost(e).clone()).sum()
    }

    pub fn to_edge_set(&self) -> MultiEdgeSet {
        MultiEdgeSet::from_edge_ids(self.edges.iter().copied())
    }

    /// Canonical rotation starting at the smallest vertex, for dedup in
    /// tests and searches.
    pub fn canonical_key(&self, g: &MultiDigraph) -> Vec<EdgeId> {
        let start = self
            .edges
            .iter()
            .enumerate()
            .min_by_key(|(_, &e)| (g.edge(e).tail, e))
            .map(|(i, _)| i)
            .unwrap();
        let mut key = Vec::with_capacity(self.edges.len());
        for i in 0..self.edges.len() {
            key.push(self.edges[(start + i) % self.edges.len()]);
        }
        key
    }
}

/// True iff multiplicity-weighted in-degree equals out-degree everywhere.
pub fn is_eulerian(g: &MultiDigraph, s: &MultiEdgeSet) -> Result<bool> {
    let mut balance = vec![0i64; g.vertex_count()];
    for (e, m) in s.iter() {
        g.check_edge_id(e)?;
        let m = i64::try_from(m)
            .map_err(|_| Error::InvalidInput(format!("multiplicity of edge {} too large", e)))?;
        balance[g.edge(e).tail] += m;
        balance[g.edge(e).head] -= m;
    }
    Ok(balance.iter().all(|&b| b == 0))
}

/// Weak connected components of `(restrict, s)`.
///
/// Every vertex of the restriction appears in exactly one component
/// (isolated vertices form singletons); edges with an endpoint outside the
/// restriction are ignored.
pub fn connected_components(
    g: &MultiDigraph,
    s: &MultiEdgeSet,
    restrict: Option<&BTreeSet<VertexId>>,
) -> Vec<(BTreeSet<VertexId>, MultiEdgeSet)> {
    let verts: Vec<VertexId> = match restrict {
        Some(r) => r.iter().copied().collect(),
        None => (0..g.vertex_count()).collect(),
    };
    let inside = |v: VertexId| match restrict {
        Some(r) => r.contains(&v),
        None => true,
    };
    let mut uf = UnionFind::new(g.vertex_count());
    for (e, _) in s.iter() {
        let edge = g.edge(e);
        if inside(edge.tail) && inside(edge.head) {
            uf.union(edge.tail, edge.head);
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<VertexId>> = BTreeMap::new();
    for &v in &verts {
        groups.entry(uf.find(v)).or_default().insert(v);
    }
    let mut comps: Vec<(BTreeSet<VertexId>, MultiEdgeSet)> = groups
        .into_values()
        .map(|vs| {
            let edges = s.restrict_to(g, &vs);
            (vs, edges)
        })
        .collect();
    comps.sort_by_key(|(vs, _)| *vs.iter().next().unwrap());
    comps
}

/// Decomposes an Eulerian multiset into simple circuits whose incidence
/// vectors sum exactly to the input.
///
/// Deterministic: the walk starts at the tail of the lowest remaining edge
/// id and always follows the lowest-id unused out-edge; whenever the walk
/// returns to a vertex already on it, the enclosed cycle is peeled off.
pub fn decompose_into_circuits(g: &MultiDigraph, s: &MultiEdgeSet) -> Result<Vec<Circuit>> {
    if !is_eulerian(g, s)? {
        return Err(Error::ContractViolation(
            "decompose_into_circuits requires an Eulerian multiset".into(),
        ));
    }
    let mut remaining = s.clone();
    let mut circuits = Vec::new();
    let mut pos_on_path = vec![usize::MAX; g.vertex_count()];

    while let Some((&start_edge, _)) = remaining.mult.iter().next() {
        let start = g.edge(start_edge).tail;
        let mut path_verts = vec![start];
        let mut path_edges: Vec<EdgeId> = Vec::new();
        pos_on_path[start] = 0;

        loop {
            let cur = *path_verts.last().unwrap();
            let next_edge = g
                .out_edges(cur)
                .iter()
                .copied()
                .find(|&e| remaining.multiplicity(e) > 0);
            let e = match next_edge {
                Some(e) => e,
                None => {
                    // Balance guarantees the walk can only stall back at its
                    // start with every detour already peeled off.
                    debug_assert_eq!(path_verts.len(), 1);
                    pos_on_path[path_verts[0]] = usize::MAX;
                    break;
                }
            };
            remaining.remove(e, 1);
            let w = g.edge(e).head;
            if pos_on_path[w] != usize::MAX {
                let j = pos_on_path[w];
                let mut cyc: Vec<EdgeId> = path_edges.split_off(j);
                cyc.push(e);
                for v in path_verts.drain(j + 1..) {
                    pos_on_path[v] = usize::MAX;
                }
                circuits.push(Circuit::new(g, cyc)?);
            } else {
                pos_on_path[w] = path_verts.len();
                path_verts.push(w);
                path_edges.push(e);
            }
        }
    }
    Ok(circuits)
}

/// Strong connectivity of the (induced) digraph. A single vertex counts as
/// strongly connected; an empty restriction is an input error.
pub fn strongly_connected(g: &MultiDigraph, restrict: Option<&BTreeSet<VertexId>>) -> Result<bool> {
    let verts: Vec<VertexId> = match restrict {
        Some(r) => r.iter().copied().collect(),
        None => (0..g.vertex_count()).collect(),
    };
    if verts.is_empty() {
        return Err(Error::InvalidInput(
            "strong connectivity of an empty vertex set is undefined".into(),
        ));
    }
    if verts.len() == 1 {
        return Ok(true);
    }
    let inside = |v: VertexId| match restrict {
        Some(r) => r.contains(&v),
        None => true,
    };
    let root = verts[0];
    let reach = |forward: bool| -> usize {
        let mut seen = vec![false; g.vertex_count()];
        let mut stack = vec![root];
        seen[root] = true;
        let mut count = 0;
        while let Some(v) = stack.pop() {
            count += 1;
            let nbrs = if forward { g.out_edges(v) } else { g.in_edges(v) };
            for &e in nbrs {
                let w = if forward { g.edge(e).head } else { g.edge(e).tail };
                if inside(w) && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        count
    };
    Ok(reach(true) == verts.len() && reach(false) == verts.len())
}

/// All-pairs shortest paths over a filtered edge set, with parent pointers
/// so reconstructed paths are always simple (Dijkstra trees).
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    dist: Vec<Vec<Option<Rat>>>,
    parent: Vec<Vec<Option<EdgeId>>>,
}

impl ShortestPaths {
    pub fn dist(&self, from: VertexId, to: VertexId) -> Option<&Rat> {
        self.dist[from][to].as_ref()
    }

    /// Edge ids of a shortest `from → to` path (empty when `from == to`).
    /// Paths come from a Dijkstra tree, so they are always simple.
    pub fn path_edges(&self, g: &MultiDigraph, from: VertexId, to: VertexId) -> Option<Vec<EdgeId>> {
        self.dist[from][to].as_ref()?;
        let mut edges = Vec::new();
        let mut cur = to;
        while cur != from {
            let e = self.parent[from][cur]?;
            edges.push(e);
            cur = g.edge(e).tail;
        }
        edges.reverse();
        Some(edges)
    }
}

/// Computes shortest paths from every vertex over edges accepted by
/// `allowed`, with exact rational distances.
pub fn shortest_paths(g: &MultiDigraph, allowed: &dyn Fn(EdgeId) -> bool) -> ShortestPaths {
    let n = g.vertex_count();
    let mut dist = vec![vec![None; n]; n];
    let mut parent = vec![vec![None; n]; n];
    for src in 0..n {
        dijkstra(g, allowed, src, &mut dist[src], &mut parent[src]);
    }
    ShortestPaths { dist, parent }
}

fn dijkstra(
    g: &MultiDigraph,
    allowed: &dyn Fn(EdgeId) -> bool,
    src: VertexId,
    dist: &mut [Option<Rat>],
    parent: &mut [Option<EdgeId>],
) {
    use std::cmp::Reverse;
    let mut heap: BinaryHeap<Reverse<(Rat, VertexId)>> = BinaryHeap::new();
    dist[src] = Some(rat_zero());
    heap.push(Reverse((rat_zero(), src)));
    let mut settled = vec![false; g.vertex_count()];
    while let Some(Reverse((d, v))) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        for &e in g.out_edges(v) {
            if !allowed(e) {
                continue;
            }
            let w = g.edge(e).head;
            if settled[w] {
                continue;
            }
            let nd = &d + g.cost(e);
            let better = match &dist[w] {
                None => true,
                Some(old) => nd < *old,
            };
            if better {
                dist[w] = Some(nd.clone());
                parent[w] = Some(e);
                heap.push(Reverse((nd, w)));
            }
        }
    }
}

/// Minimum-cost circuit using only allowed edges with at least one edge in
/// `δ(cut_set)`, or `None` when no allowed circuit crosses the cut.
///
/// For each allowed crossing edge `e` the closed walk `e` + shortest
/// allowed path from `head(e)` to `tail(e)` is a simple circuit through the
/// cut of cost `c(e) + dist(head(e), tail(e))`; every crossing circuit
/// contains some such `e` and costs at least that, so the minimum over `e`
/// is the exact optimum.
pub fn min_cost_crossing_circuit(
    g: &MultiDigraph,
    allowed: &dyn Fn(EdgeId) -> bool,
    cut_set: &BTreeSet<VertexId>,
) -> Option<(Circuit, Rat)> {
    let sp = shortest_paths(g, allowed);
    min_cost_crossing_circuit_with(g, allowed, cut_set, &sp)
}

/// Same as [`min_cost_crossing_circuit`] against precomputed shortest paths
/// (they must have been computed over the same allowed edge set).
pub fn min_cost_crossing_circuit_with(
    g: &MultiDigraph,
    allowed: &dyn Fn(EdgeId) -> bool,
    cut_set: &BTreeSet<VertexId>,
    sp: &ShortestPaths,
) -> Option<(Circuit, Rat)> {
    let mut best: Option<(Rat, EdgeId)> = None;
    for e in 0..g.edge_count() {
        if !allowed(e) {
            continue;
        }
        let edge = g.edge(e);
        if cut_set.contains(&edge.tail) == cut_set.contains(&edge.head) {
            continue;
        }
        let back = match sp.dist(edge.head, edge.tail) {
            Some(d) => d,
            None => continue,
        };
        let total = edge.cost.clone() + back;
        let better = match &best {
            None => true,
            Some((cost, _)) => total < *cost,
        };
        if better {
            best = Some((total, e));
        }
    }
    let (cost, e) = best?;
    let edge = g.edge(e);
    let mut edges = vec![e];
    edges.extend(
        sp.path_edges(g, edge.head, edge.tail)
            .expect("distance exists"),
    );
    let circuit = Circuit::new(g, edges).expect("closing edge plus simple path is a circuit");
    Some((circuit, cost))
}

/// Enumerates simple circuits over allowed edges, each exactly once
/// (anchored at its smallest vertex). Returns `(circuits, complete)`;
/// `complete` is false when the cap was hit.
pub fn enumerate_simple_circuits(
    g: &MultiDigraph,
    allowed: &dyn Fn(EdgeId) -> bool,
    cap: usize,
) -> (Vec<Circuit>, bool) {
    let n = g.vertex_count();
    let mut found = Vec::new();
    let mut on_path = vec![false; n];
    for anchor in 0..n {
        let mut path: Vec<EdgeId> = Vec::new();
        // stack of (vertex, next index into its out-edge list)
        let mut stack: Vec<(VertexId, usize)> = vec![(anchor, 0)];
        on_path[anchor] = true;
        while !stack.is_empty() {
            let top = stack.len() - 1;
            let (v, idx) = stack[top];
            if idx >= g.out_edges(v).len() {
                stack.pop();
                if let Some(e) = path.pop() {
                    on_path[g.edge(e).head] = false;
                } else {
                    on_path[v] = false;
                }
                continue;
            }
            stack[top].1 += 1;
            let e = g.out_edges(v)[idx];
            if !allowed(e) {
                continue;
            }
            let w = g.edge(e).head;
            if w < anchor {
                continue;
            }
            if w == anchor {
                let mut cyc = path.clone();
                cyc.push(e);
                found.push(Circuit::new(g, cyc).expect("DFS path is simple"));
                if found.len() >= cap {
                    return (found, false);
                }
                continue;
            }
            if on_path[w] {
                continue;
            }
            path.push(e);
            on_path[w] = true;
            stack.push((w, 0));
        }
    }
    (found, true)
}

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, v: usize) -> usize {
        if self.parent[v] != v {
            let root = self.find(self.parent[v]);
            self.parent[v] = root;
        }
        self.parent[v]
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}
