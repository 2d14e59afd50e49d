//! Subtour covers: Eulerian multi-edge sets crossing every component of
//! `(V∖V(B), H)`, with locality at the backbone, a per-vertex in-degree
//! bound, and (in general mode) a total cost bound.
//!
//! The primary constructor is a greedy over minimum-cost crossing circuits
//! in the support of `x`, with per-vertex in-degree allowances. Its output
//! is always checked by the verifier; on failure an exact branch-and-bound
//! search over local circuits takes over (small instances only). Covers
//! returned from this module therefore always satisfy the contract.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::graph::{
    connected_components, enumerate_simple_circuits, is_eulerian, min_cost_crossing_circuit_with,
    shortest_paths, Circuit, EdgeId, MultiEdgeSet, VertexId,
};
use crate::instance::{is_local, Backbone, Mode, StronglyLaminarInstance};
use crate::ratio::{format_rat, rat_int, rat_zero, Rat};
use crate::report::Report;

/// Largest instance the exact fallback search will attempt.
const FALLBACK_MAX_VERTICES: usize = 16;
const FALLBACK_NODE_BUDGET: usize = 500_000;
const FALLBACK_CIRCUIT_CAP: usize = 100_000;

#[derive(Debug, Clone)]
pub struct SubtourCover {
    pub f: MultiEdgeSet,
    /// For each component id (index into the sorted component list of
    /// `(V∖V(B), H)`), one witness edge of `F ∩ δ(W)`.
    pub per_component_hits: BTreeMap<usize, EdgeId>,
}

/// Components of `(V∖V(B), H)`, sorted by smallest vertex; the indices are
/// the component ids used in cover reports.
pub fn cover_targets(
    inst: &StronglyLaminarInstance,
    b: &Backbone,
    h: &MultiEdgeSet,
) -> Vec<BTreeSet<VertexId>> {
    let outside = inst.outside_vertices(b);
    connected_components(&inst.g, h, Some(&outside))
        .into_iter()
        .map(|(vs, _)| vs)
        .collect()
}

/// Computes a verified subtour cover for `h`.
///
/// `h` must be an Eulerian multi-subset of `E[V∖V(B)]`. The result has been
/// passed through [`verify_subtour_cover`]; if neither the greedy
/// constructor nor the exact search can produce a contract-satisfying
/// cover, an error with diagnostics is returned.
pub fn compute_subtour_cover(
    inst: &StronglyLaminarInstance,
    b: &Backbone,
    h: &MultiEdgeSet,
) -> Result<SubtourCover> {
    let g = &inst.g;
    if !is_eulerian(g, h)? {
        return Err(Error::ContractViolation(
            "subtour cover input H must be Eulerian".into(),
        ));
    }
    for (e, _) in h.iter() {
        let edge = g.edge(e);
        if b.verts.contains(&edge.tail) || b.verts.contains(&edge.head) {
            return Err(Error::ContractViolation(format!(
                "H edge {} touches the backbone",
                e
            )));
        }
    }
    // A component equal to the whole vertex set has an empty boundary, so
    // no cover exists; the algorithm only asks for covers while the graph
    // is still disconnected.
    if b.verts.is_empty() && connected_components(g, h, None).len() == 1 {
        return Err(Error::InvalidInput(
            "H already spans all vertices; a subtour cover needs a proper component".into(),
        ));
    }

    if let Some(cover) = greedy_cover(inst, b, h) {
        let report = verify_subtour_cover(inst, b, h, &cover.f);
        if report.all_passed() {
            return Ok(cover);
        }
    }

    let cover = exact_cover_search(inst, b, h)?;
    let report = verify_subtour_cover(inst, b, h, &cover.f);
    if report.all_passed() {
        Ok(cover)
    } else {
        Err(Error::SearchExhausted(format!(
            "exact cover search produced an invalid cover: {}",
            report.failure_summary()
        )))
    }
}

/// Greedy: components in decreasing size, minimum-cost crossing circuit in
/// the support of `x` under remaining in-degree allowances `⌊2·x(δ⁻(v))⌋`.
fn greedy_cover(
    inst: &StronglyLaminarInstance,
    b: &Backbone,
    h: &MultiEdgeSet,
) -> Option<SubtourCover> {
    let g = &inst.g;
    let targets = cover_targets(inst, b, h);
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(targets[i].len()), i));

    let mut allowance: Vec<u64> = (0..g.vertex_count())
        .map(|v| {
            let twice = rat_int(2) * inst.x_in_degree(v);
            let fl = twice.floor().to_integer();
            u64::try_from(&fl).unwrap_or(0)
        })
        .collect();
    // In general mode every circuit stays local so components never violate
    // the backbone locality condition.
    let require_local = inst.mode == Mode::General;
    let mut chosen: Vec<Circuit> = Vec::new();
    let mut covered = vec![false; targets.len()];
    let mut hits: BTreeMap<usize, EdgeId> = BTreeMap::new();

    let mut sp = None;
    for &ci in &order {
        if covered[ci] {
            continue;
        }
        let allowed = |e: EdgeId| {
            inst.x.x[e].is_positive()
                && allowance[g.edge(e).head] >= 1
                && (!require_local || is_local(inst, e))
        };
        if sp.is_none() {
            sp = Some(shortest_paths(g, &allowed));
        }
        let found = min_cost_crossing_circuit_with(g, &allowed, &targets[ci], sp.as_ref().unwrap());
        let (circuit, _) = found?;
        let mut zeroed = false;
        for v in circuit.vertices(g) {
            allowance[v] -= 1;
            if allowance[v] == 0 {
                zeroed = true;
            }
        }
        if zeroed {
            sp = None; // allowed edge set changed
        }
        for (i, target) in targets.iter().enumerate() {
            if covered[i] {
                continue;
            }
            if let Some(&e) = circuit
                .edge_ids()
                .iter()
                .find(|&&e| target.contains(&g.edge(e).tail) != target.contains(&g.edge(e).head))
            {
                covered[i] = true;
                hits.insert(i, e);
            }
        }
        chosen.push(circuit);
    }

    let f = MultiEdgeSet::sum(chosen.iter().map(|c| c.to_edge_set()).collect::<Vec<_>>().iter());
    Some(SubtourCover {
        f,
        per_component_hits: hits,
    })
}

/// Exact branch-and-bound over local simple circuits: picks, for each still
/// uncovered component in turn, a crossing circuit subject to per-edge
/// multiplicity caps `⌈2·x_e⌉ + 1`, and keeps the cheapest selection whose
/// union passes the full verifier.
fn exact_cover_search(
    inst: &StronglyLaminarInstance,
    b: &Backbone,
    h: &MultiEdgeSet,
) -> Result<SubtourCover> {
    let g = &inst.g;
    let n = g.vertex_count();
    if n > FALLBACK_MAX_VERTICES {
        return Err(Error::SearchExhausted(format!(
            "greedy cover construction failed and the instance has {} > {} vertices",
            n, FALLBACK_MAX_VERTICES
        )));
    }
    let targets = cover_targets(inst, b, h);
    if targets.is_empty() {
        return Ok(SubtourCover {
            f: MultiEdgeSet::new(),
            per_component_hits: BTreeMap::new(),
        });
    }

    // Circuits avoiding the backbone must be local for the main algorithm;
    // backbone-touching circuits must be local by the cover contract. So
    // the search space is local circuits.
    let (mut circuits, complete) =
        enumerate_simple_circuits(g, &|e| is_local(inst, e), FALLBACK_CIRCUIT_CAP);
    if !complete {
        return Err(Error::SearchExhausted(
            "too many local circuits to enumerate for the exact cover search".into(),
        ));
    }
    circuits.sort_by(|a, b| a.cost(g).cmp(&b.cost(g)));
    let costs: Vec<Rat> = circuits.iter().map(|c| c.cost(g)).collect();

    let caps: Vec<u64> = (0..g.edge_count())
        .map(|e| {
            let twice = rat_int(2) * &inst.x.x[e];
            let c = twice.ceil().to_integer();
            u64::try_from(&c).unwrap_or(0) + 1
        })
        .collect();

    struct Search<'s> {
        inst: &'s StronglyLaminarInstance,
        b: &'s Backbone,
        h: &'s MultiEdgeSet,
        targets: &'s [BTreeSet<VertexId>],
        circuits: &'s [Circuit],
        costs: &'s [Rat],
        caps: &'s [u64],
        used: Vec<u64>,
        chosen: Vec<usize>,
        best: Option<(Rat, Vec<usize>)>,
        nodes: usize,
    }

    impl Search<'_> {
        fn crosses(&self, c: &Circuit, target: &BTreeSet<VertexId>) -> bool {
            let g = &self.inst.g;
            c.edge_ids()
                .iter()
                .any(|&e| target.contains(&g.edge(e).tail) != target.contains(&g.edge(e).head))
        }

        fn fits_caps(&self, c: &Circuit) -> bool {
            c.edge_ids().iter().all(|&e| self.used[e] < self.caps[e])
        }

        fn recurse(&mut self, cost_so_far: Rat) {
            self.nodes += 1;
            if self.nodes > FALLBACK_NODE_BUDGET {
                return;
            }
            if let Some((best, _)) = &self.best {
                if cost_so_far >= *best {
                    return;
                }
            }
            let uncovered = self.targets.iter().position(|t| {
                !self
                    .chosen
                    .iter()
                    .any(|&ci| self.crosses(&self.circuits[ci], t))
            });
            let target = match uncovered {
                None => {
                    let f = MultiEdgeSet::sum(
                        self.chosen
                            .iter()
                            .map(|&ci| self.circuits[ci].to_edge_set())
                            .collect::<Vec<_>>()
                            .iter(),
                    );
                    if verify_subtour_cover(self.inst, self.b, self.h, &f).all_passed() {
                        self.best = Some((cost_so_far, self.chosen.clone()));
                    }
                    return;
                }
                Some(i) => &self.targets[i],
            };
            for ci in 0..self.circuits.len() {
                if self.chosen.contains(&ci) {
                    continue;
                }
                if !self.crosses(&self.circuits[ci], target) || !self.fits_caps(&self.circuits[ci])
                {
                    continue;
                }
                for &e in self.circuits[ci].edge_ids() {
                    self.used[e] += 1;
                }
                self.chosen.push(ci);
                self.recurse(cost_so_far.clone() + &self.costs[ci]);
                self.chosen.pop();
                for &e in self.circuits[ci].edge_ids() {
                    self.used[e] -= 1;
                }
            }
        }
    }

    let mut search = Search {
        inst,
        b,
        h,
        targets: &targets,
        circuits: &circuits,
        costs: &costs,
        caps: &caps,
        used: vec![0; g.edge_count()],
        chosen: Vec::new(),
        best: None,
        nodes: 0,
    };
    search.recurse(rat_zero());

    let (_, chosen) = search.best.ok_or_else(|| {
        Error::SearchExhausted(format!(
            "no contract-satisfying cover found for {} components ({} local circuits, {} nodes explored)",
            targets.len(),
            circuits.len(),
            search.nodes
        ))
    })?;

    let f = MultiEdgeSet::sum(
        chosen
            .iter()
            .map(|&ci| circuits[ci].to_edge_set())
            .collect::<Vec<_>>()
            .iter(),
    );
    let mut hits = BTreeMap::new();
    for (i, target) in targets.iter().enumerate() {
        let hit = f
            .iter()
            .map(|(e, _)| e)
            .find(|&e| target.contains(&g.edge(e).tail) != target.contains(&g.edge(e).head));
        if let Some(e) = hit {
            hits.insert(i, e);
        }
    }
    Ok(SubtourCover {
        f,
        per_component_hits: hits,
    })
}

/// Checks the subtour-cover contract for `f` against `h`:
/// Eulerian-ness, coverage of every component of `(V∖V(B), H)`, locality of
/// backbone-touching components of `(V, F)`, the in-degree bound
/// `|F ∩ δ⁻(v)| ≤ 2·x(δ⁻(v))` on backbone-free components at vertices with
/// `y_v > 0`, and in general mode the total cost bound
/// `c(F) ≤ 2·LP + Σ 2·y_v`.
pub fn verify_subtour_cover(
    inst: &StronglyLaminarInstance,
    b: &Backbone,
    h: &MultiEdgeSet,
    f: &MultiEdgeSet,
) -> Report {
    let g = &inst.g;
    let mut report = Report::new();

    match is_eulerian(g, f) {
        Ok(true) => report.pass("cover Eulerian", ""),
        Ok(false) => report.fail("cover Eulerian", "in-degree != out-degree somewhere"),
        Err(e) => report.fail("cover Eulerian", e.to_string()),
    }

    let targets = cover_targets(inst, b, h);
    let mut coverage_witness = None;
    for (i, target) in targets.iter().enumerate() {
        let hit = f
            .iter()
            .any(|(e, _)| target.contains(&g.edge(e).tail) != target.contains(&g.edge(e).head));
        if !hit {
            coverage_witness = Some(format!("component {} {:?} not crossed", i, target));
            break;
        }
    }
    match coverage_witness {
        Some(w) => report.fail("coverage", w),
        None => report.pass("coverage", format!("{} components", targets.len())),
    }

    let f_components = connected_components(g, f, None);
    let mut locality_witness = None;
    let mut degree_witness = None;
    for (verts, edges) in &f_components {
        if edges.is_empty() {
            continue;
        }
        let touches_backbone = verts.iter().any(|v| b.verts.contains(v));
        if touches_backbone {
            if let Some((e, _)) = edges.iter().find(|(e, _)| !is_local(inst, *e)) {
                locality_witness = Some(format!(
                    "backbone-touching component {:?} contains non-local edge {}",
                    verts, e
                ));
            }
        } else {
            for &v in verts {
                if !inst.y_vertex(v).is_positive() {
                    continue;
                }
                let indeg = Rat::from_integer(f.in_degree(g, v).into());
                let bound = rat_int(2) * inst.x_in_degree(v);
                if indeg > bound {
                    degree_witness = Some(format!(
                        "vertex {}: |F ∩ δ⁻(v)| = {} > 2·x(δ⁻(v)) = {}",
                        v,
                        format_rat(&indeg),
                        format_rat(&bound)
                    ));
                    break;
                }
            }
        }
        if locality_witness.is_some() || degree_witness.is_some() {
            break;
        }
    }
    match locality_witness {
        Some(w) => report.fail("backbone components local", w),
        None => report.pass("backbone components local", ""),
    }
    match degree_witness {
        Some(w) => report.fail("in-degree bound", w),
        None => report.pass("in-degree bound", ""),
    }

    if inst.mode == Mode::General {
        let cost = f.cost(g);
        let outside = inst.outside_vertices(b);
        let budget: Rat = rat_int(2) * inst.lp_value()
            + outside.iter().map(|&v| inst.two_y(v)).sum::<Rat>();
        report.check(
            "cost bound",
            cost <= budget,
            format!("c(F) = {} vs 2·LP + Σ2y = {}", format_rat(&cost), format_rat(&budget)),
        );
    }

    report
}
