//! Strongly laminar ATSP instances, backbones, validation, and the on-disk
//! format.
//!
//! An instance carries a digraph, a laminar family with nonnegative weights
//! `y`, an LP solution `x`, and a mode. Graph-TSP mode is the unit-cost
//! specialization (all singletons, `y_v = 1/2`, empty backbone); general
//! mode instances cannot be derived here and are supplied as data files.

use std::collections::BTreeSet;
use std::path::Path;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    connected_components, is_eulerian, strongly_connected, EdgeId, MultiDigraph, MultiEdgeSet,
    VertexId,
};
use crate::lp::{certify_feasible, solve_atsp_lp, LpSolution};
use crate::ratio::{format_rat, parse_rat, rat, rat_int, rat_zero, Rat};
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    GraphTsp,
    General,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::GraphTsp => "graph-tsp",
            Mode::General => "general",
        }
    }
}

/// A laminar family of vertex subsets with nonnegative weights.
#[derive(Debug, Clone)]
pub struct LaminarFamily {
    pub sets: Vec<BTreeSet<VertexId>>,
    pub y: Vec<Rat>,
}

impl LaminarFamily {
    pub fn new(sets: Vec<BTreeSet<VertexId>>, y: Vec<Rat>) -> Result<Self> {
        if sets.len() != y.len() {
            return Err(Error::InvalidInput(
                "laminar sets and weights differ in length".into(),
            ));
        }
        Ok(LaminarFamily { sets, y })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Indices of the non-singleton sets (ℒ with at least two vertices).
    pub fn large_sets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.sets.len()).filter(|&i| self.sets[i].len() >= 2)
    }

    /// Laminarity check: processes sets in decreasing size and requires
    /// every vertex of a set to have the same innermost processed owner.
    /// Equivalent to the pairwise disjoint-or-nested definition.
    pub fn check_laminar(&self) -> std::result::Result<(), (usize, usize)> {
        let mut order: Vec<usize> = (0..self.sets.len()).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(self.sets[i].len()), i));
        let mut owner: std::collections::BTreeMap<VertexId, usize> = Default::default();
        for &i in &order {
            let mut iter = self.sets[i].iter();
            let first_owner = iter.next().and_then(|v| owner.get(v)).copied();
            for v in self.sets[i].iter() {
                let o = owner.get(v).copied();
                if o != first_owner {
                    let witness = o.or(first_owner).expect("one side differs");
                    return Err((i, witness));
                }
            }
            for &v in self.sets[i].iter() {
                owner.insert(v, i);
            }
        }
        Ok(())
    }
}

/// Connected Eulerian multi-subgraph intersecting every non-singleton
/// laminar set; empty in graph-TSP mode.
#[derive(Debug, Clone)]
pub struct Backbone {
    pub verts: BTreeSet<VertexId>,
    pub edges: MultiEdgeSet,
}

impl Backbone {
    pub fn empty() -> Self {
        Backbone {
            verts: BTreeSet::new(),
            edges: MultiEdgeSet::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty() && self.edges.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct StronglyLaminarInstance {
    pub g: MultiDigraph,
    pub family: LaminarFamily,
    pub x: LpSolution,
    pub mode: Mode,
    y_vertex: Vec<Rat>,
    local_edge: Vec<bool>,
    x_in: Vec<Rat>,
    x_out: Vec<Rat>,
}

impl StronglyLaminarInstance {
    pub fn new(
        g: MultiDigraph,
        family: LaminarFamily,
        x: LpSolution,
        mode: Mode,
    ) -> Result<Self> {
        if x.x.len() != g.edge_count() {
            return Err(Error::InvalidInput(
                "x vector length does not match edge count".into(),
            ));
        }
        let n = g.vertex_count();
        let mut y_vertex = vec![rat_zero(); n];
        for (i, set) in family.sets.iter().enumerate() {
            if set.len() == 1 {
                let v = *set.iter().next().unwrap();
                if v < n {
                    y_vertex[v] = family.y[i].clone();
                }
            }
        }
        let mut local_edge = vec![true; g.edge_count()];
        for i in family.large_sets() {
            let set = &family.sets[i];
            for (e, edge) in g.edges().iter().enumerate() {
                if set.contains(&edge.tail) != set.contains(&edge.head) {
                    local_edge[e] = false;
                }
            }
        }
        let mut x_in = vec![rat_zero(); n];
        let mut x_out = vec![rat_zero(); n];
        for e in 0..g.edge_count() {
            let edge = g.edge(e);
            x_out[edge.tail] += &x.x[e];
            x_in[edge.head] += &x.x[e];
        }
        Ok(StronglyLaminarInstance {
            g,
            family,
            x,
            mode,
            y_vertex,
            local_edge,
            x_in,
            x_out,
        })
    }

    /// `y_v`: the weight of the singleton `{v}`, zero when absent.
    pub fn y_vertex(&self, v: VertexId) -> &Rat {
        &self.y_vertex[v]
    }

    pub fn two_y(&self, v: VertexId) -> Rat {
        rat_int(2) * &self.y_vertex[v]
    }

    /// `x(δ⁻(v))`, multiplicity-free sum over incoming edge values.
    pub fn x_in_degree(&self, v: VertexId) -> &Rat {
        &self.x_in[v]
    }

    pub fn x_out_degree(&self, v: VertexId) -> &Rat {
        &self.x_out[v]
    }

    /// Value of the LP solution this instance carries. For graph-TSP
    /// instances built by [`from_unit_graph`] this is the exact optimum.
    pub fn lp_value(&self) -> &Rat {
        &self.x.value
    }

    /// Vertices outside the backbone, in order.
    pub fn outside_vertices(&self, b: &Backbone) -> BTreeSet<VertexId> {
        (0..self.g.vertex_count())
            .filter(|v| !b.verts.contains(v))
            .collect()
    }
}

/// True iff the edge crosses no non-singleton laminar set.
pub fn is_local(inst: &StronglyLaminarInstance, e: EdgeId) -> bool {
    inst.local_edge[e]
}

/// Builds the graph-TSP specialization of a strongly connected unit-cost
/// digraph: all singletons with `y_v = 1/2`, `x` from the exact LP solver.
pub fn from_unit_graph(g: MultiDigraph) -> Result<StronglyLaminarInstance> {
    let one = rat_int(1);
    if let Some(e) = (0..g.edge_count()).find(|&e| *g.cost(e) != one) {
        return Err(Error::InvalidInput(format!(
            "graph-TSP requires unit costs; edge {} has cost {}",
            e,
            format_rat(g.cost(e))
        )));
    }
    if !strongly_connected(&g, None)? {
        return Err(Error::InvalidInput(
            "graph-TSP instance must be strongly connected".into(),
        ));
    }
    let x = solve_atsp_lp(&g)?;
    let n = g.vertex_count();
    let family = LaminarFamily::new(
        (0..n).map(|v| BTreeSet::from([v])).collect(),
        vec![rat(1, 2); n],
    )?;
    let inst = StronglyLaminarInstance::new(g, family, x, Mode::GraphTsp)?;
    let report = validate(&inst, &Backbone::empty());
    if !report.all_passed() {
        return Err(Error::Validation(report.failure_summary()));
    }
    Ok(inst)
}

/// Checks every structural invariant of the instance and backbone, one
/// report item per condition, with a witness for each failure.
pub fn validate(inst: &StronglyLaminarInstance, b: &Backbone) -> Report {
    let mut report = Report::new();
    let g = &inst.g;
    let n = g.vertex_count();
    let fam = &inst.family;

    match fam.check_laminar() {
        Ok(()) => report.pass("laminarity", ""),
        Err((i, j)) => report.fail(
            "laminarity",
            format!("sets {:?} and {:?} cross", fam.sets[i], fam.sets[j]),
        ),
    }

    match fam.sets.iter().position(|s| s.is_empty() || s.iter().any(|&v| v >= n)) {
        Some(i) => report.fail(
            "set ranges",
            format!("set {} empty or out of vertex range", i),
        ),
        None => report.pass("set ranges", ""),
    }

    match fam.y.iter().position(|y| y.is_negative()) {
        Some(i) => report.fail("weights nonnegative", format!("y[{}] < 0", i)),
        None => report.pass("weights nonnegative", ""),
    }

    // cost decomposition: c(e) = Σ { y_L : e ∈ δ(L) }
    let mut decomposition_witness = None;
    for e in 0..g.edge_count() {
        let edge = g.edge(e);
        let mut total = rat_zero();
        for (i, set) in fam.sets.iter().enumerate() {
            if set.contains(&edge.tail) != set.contains(&edge.head) {
                total += &fam.y[i];
            }
        }
        if total != edge.cost {
            decomposition_witness = Some(format!(
                "edge {} ({} -> {}): cost {} but Σ y over crossed sets is {}",
                e,
                edge.tail,
                edge.head,
                format_rat(&edge.cost),
                format_rat(&total)
            ));
            break;
        }
    }
    match decomposition_witness {
        Some(w) => report.fail("cost decomposition", w),
        None => report.pass("cost decomposition", ""),
    }

    match inst.mode {
        Mode::GraphTsp => {
            let singleton_ok = fam.sets.len() == n
                && (0..n).all(|v| fam.sets.iter().any(|s| s.len() == 1 && s.contains(&v)))
                && fam.sets.iter().all(|s| s.len() == 1);
            report.check(
                "graph-tsp family",
                singleton_ok,
                "family must be exactly all singletons",
            );
            let half = rat(1, 2);
            report.check(
                "graph-tsp weights",
                fam.y.iter().all(|y| *y == half),
                "y_v must be 1/2 for every vertex",
            );
            let one = rat_int(1);
            report.check(
                "graph-tsp unit costs",
                (0..g.edge_count()).all(|e| *g.cost(e) == one),
                "all edge costs must be 1",
            );
            report.check(
                "graph-tsp empty backbone",
                b.is_empty(),
                "graph-TSP runs with the empty backbone",
            );
        }
        Mode::General => {
            let mut witness = None;
            for (i, set) in fam.sets.iter().enumerate() {
                let crossing: Rat = (0..g.edge_count())
                    .filter(|&e| {
                        set.contains(&g.edge(e).tail) != set.contains(&g.edge(e).head)
                    })
                    .map(|e| inst.x.x[e].clone())
                    .sum();
                if crossing != rat_int(2) {
                    witness = Some(format!(
                        "x(δ(L)) = {} for set {} {:?}",
                        format_rat(&crossing),
                        i,
                        set
                    ));
                    break;
                }
            }
            match witness {
                Some(w) => report.fail("x(δ(L)) = 2", w),
                None => report.pass("x(δ(L)) = 2", ""),
            }
        }
    }

    let mut strong_witness = None;
    for (i, set) in fam.sets.iter().enumerate() {
        match strongly_connected(g, Some(set)) {
            Ok(true) => {}
            Ok(false) => {
                strong_witness = Some(format!("G[L] not strongly connected for set {} {:?}", i, set));
                break;
            }
            Err(e) => {
                strong_witness = Some(format!("set {}: {}", i, e));
                break;
            }
        }
    }
    match strong_witness {
        Some(w) => report.fail("G[L] strongly connected", w),
        None => report.pass("G[L] strongly connected", ""),
    }

    // x feasibility for the cut relaxation
    let lp_report = certify_feasible(g, &inst.x);
    report.check(
        "x feasible for the cut relaxation",
        lp_report.all_passed(),
        lp_report.failure_summary(),
    );

    // backbone structure
    if b.is_empty() {
        report.pass("backbone structure", "empty backbone");
    } else {
        let mut ok = true;
        let mut detail = String::new();
        for (e, _) in b.edges.iter() {
            if e >= g.edge_count() {
                ok = false;
                detail = format!("backbone edge id {} out of range", e);
                break;
            }
            let edge = g.edge(e);
            if !b.verts.contains(&edge.tail) || !b.verts.contains(&edge.head) {
                ok = false;
                detail = format!("backbone edge {} leaves the backbone vertex set", e);
                break;
            }
        }
        if ok {
            match is_eulerian(g, &b.edges) {
                Ok(true) => {}
                _ => {
                    ok = false;
                    detail = "backbone edges are not Eulerian".into();
                }
            }
        }
        if ok {
            let comps = connected_components(g, &b.edges, Some(&b.verts));
            if comps.len() != 1 {
                ok = false;
                detail = format!("backbone has {} components", comps.len());
            }
        }
        report.check("backbone structure", ok, detail);
    }

    let mut hit_witness = None;
    for i in fam.large_sets() {
        if fam.sets[i].iter().all(|v| !b.verts.contains(v)) {
            hit_witness = Some(format!("backbone misses non-singleton set {:?}", fam.sets[i]));
            break;
        }
    }
    match hit_witness {
        Some(w) => report.fail("backbone hits every non-singleton set", w),
        None => report.pass("backbone hits every non-singleton set", ""),
    }

    report
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct LaminarSetFile {
    verts: Vec<usize>,
    y: String,
}

#[derive(Serialize, Deserialize)]
struct BackboneFile {
    verts: Vec<usize>,
    edge_ids: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    mode: String,
    edges: Vec<(usize, usize, String)>,
    laminar: Vec<LaminarSetFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<Vec<String>>,
    backbone: BackboneFile,
}

/// Loads an instance from either the JSON format or, for unit digraphs, a
/// DIMACS-like arc list (`p <name> <n> <m>` header, `a <tail> <head>` lines,
/// 1-indexed).
pub fn load(path: &Path) -> Result<(StronglyLaminarInstance, Backbone)> {
    let text = std::fs::read_to_string(path)?;
    load_str(&text)
}

pub fn load_str(text: &str) -> Result<(StronglyLaminarInstance, Backbone)> {
    if text.trim_start().starts_with('{') {
        load_json(text)
    } else {
        load_dimacs(text)
    }
}

fn load_json(text: &str) -> Result<(StronglyLaminarInstance, Backbone)> {
    let file: InstanceFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("instance JSON: {}", e)))?;
    let mode = match file.mode.as_str() {
        "graph-tsp" => Mode::GraphTsp,
        "general" => Mode::General,
        other => {
            return Err(Error::Parse(format!(
                "field mode: expected \"graph-tsp\" or \"general\", got {:?}",
                other
            )))
        }
    };
    let mut edge_list = Vec::with_capacity(file.edges.len());
    for (i, (t, h, c)) in file.edges.iter().enumerate() {
        let cost = parse_rat(c).map_err(|e| Error::Parse(format!("edges[{}].cost: {}", i, e)))?;
        edge_list.push((*t, *h, cost));
    }
    let g = MultiDigraph::new(file.n, edge_list)?;
    let mut sets = Vec::with_capacity(file.laminar.len());
    let mut weights = Vec::with_capacity(file.laminar.len());
    for (i, ls) in file.laminar.iter().enumerate() {
        sets.push(ls.verts.iter().copied().collect::<BTreeSet<_>>());
        weights
            .push(parse_rat(&ls.y).map_err(|e| Error::Parse(format!("laminar[{}].y: {}", i, e)))?);
    }
    let family = LaminarFamily::new(sets, weights)?;
    let x = match &file.x {
        Some(values) => {
            if values.len() != g.edge_count() {
                return Err(Error::Validation(format!(
                    "x has {} entries for {} edges",
                    values.len(),
                    g.edge_count()
                )));
            }
            let mut xs = Vec::with_capacity(values.len());
            for (i, s) in values.iter().enumerate() {
                xs.push(parse_rat(s).map_err(|e| Error::Parse(format!("x[{}]: {}", i, e)))?);
            }
            let value: Rat = (0..g.edge_count()).map(|e| g.cost(e) * &xs[e]).sum();
            LpSolution { x: xs, value }
        }
        None => {
            if mode == Mode::General {
                return Err(Error::Validation(
                    "general-mode instance file must carry the x vector".into(),
                ));
            }
            solve_atsp_lp(&g)?
        }
    };
    let backbone = Backbone {
        verts: file.backbone.verts.iter().copied().collect(),
        edges: MultiEdgeSet::from_edge_ids(file.backbone.edge_ids.iter().copied()),
    };
    let inst = StronglyLaminarInstance::new(g, family, x, mode)?;
    let report = validate(&inst, &backbone);
    if !report.all_passed() {
        return Err(Error::Validation(report.failure_summary()));
    }
    Ok((inst, backbone))
}

fn load_dimacs(text: &str) -> Result<(StronglyLaminarInstance, Backbone)> {
    let mut n: Option<usize> = None;
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("p") => {
                let rest: Vec<&str> = tok.collect();
                if rest.len() < 2 {
                    return Err(Error::Parse(format!(
                        "line {}: p line needs vertex and edge counts",
                        lineno + 1
                    )));
                }
                n = Some(rest[rest.len() - 2].parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad vertex count", lineno + 1))
                })?);
            }
            Some("a") | Some("e") => {
                let t: usize = tok
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("line {}: bad arc tail", lineno + 1)))?;
                let h: usize = tok
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("line {}: bad arc head", lineno + 1)))?;
                if t == 0 || h == 0 {
                    return Err(Error::Parse(format!(
                        "line {}: DIMACS vertices are 1-indexed",
                        lineno + 1
                    )));
                }
                arcs.push((t - 1, h - 1));
            }
            Some(other) => {
                return Err(Error::Parse(format!(
                    "line {}: unknown record {:?}",
                    lineno + 1,
                    other
                )))
            }
            None => {}
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing p line".into()))?;
    let g = MultiDigraph::unit(n, &arcs)?;
    let inst = from_unit_graph(g)?;
    Ok((inst, Backbone::empty()))
}

pub fn store(path: &Path, inst: &StronglyLaminarInstance, b: &Backbone) -> Result<()> {
    std::fs::write(path, store_string(inst, b))?;
    Ok(())
}

/// Canonical JSON rendering; `store_string ∘ load_str` is the identity on
/// canonical files and field-exact on all valid JSON instances.
pub fn store_string(inst: &StronglyLaminarInstance, b: &Backbone) -> String {
    let g = &inst.g;
    let file = InstanceFile {
        n: g.vertex_count(),
        mode: inst.mode.as_str().to_string(),
        edges: g
            .edges()
            .iter()
            .map(|e| (e.tail, e.head, format_rat(&e.cost)))
            .collect(),
        laminar: inst
            .family
            .sets
            .iter()
            .zip(inst.family.y.iter())
            .map(|(s, y)| LaminarSetFile {
                verts: s.iter().copied().collect(),
                y: format_rat(y),
            })
            .collect(),
        x: Some(inst.x.x.iter().map(format_rat).collect()),
        backbone: BackboneFile {
            verts: b.verts.iter().copied().collect(),
            edge_ids: b
                .edges
                .iter()
                .flat_map(|(e, m)| std::iter::repeat(e).take(m as usize))
                .collect(),
        },
    };
    let mut out = serde_json::to_string_pretty(&file).expect("serializable");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MultiDigraph;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn unit(n: usize, arcs: &[(usize, usize)]) -> MultiDigraph {
        MultiDigraph::unit(n, arcs).unwrap()
    }

    #[test]
    fn unit_three_cycle() {
        let inst = from_unit_graph(unit(3, &[(0, 1), (1, 2), (2, 0)])).unwrap();
        assert_eq!(inst.family.len(), 3);
        assert!(inst.family.sets.iter().all(|s| s.len() == 1));
        assert!(inst.family.y.iter().all(|y| *y == rat(1, 2)));
        assert_eq!(*inst.lp_value(), rat_int(3));
        assert!((0..3).all(|e| is_local(&inst, e)));
    }

    #[test]
    fn unit_two_cycle() {
        let inst = from_unit_graph(unit(2, &[(0, 1), (1, 0)])).unwrap();
        assert_eq!(*inst.lp_value(), rat_int(2));
        // every local edge (v,w) has c(e) = y_v + y_w = 1
        for e in 0..inst.g.edge_count() {
            let edge = inst.g.edge(e);
            assert_eq!(
                inst.y_vertex(edge.tail).clone() + inst.y_vertex(edge.head),
                rat_int(1)
            );
        }
    }

    #[test]
    fn unit_graph_rejects_bad_input() {
        let g = MultiDigraph::new(2, vec![(0, 1, rat(1, 2)), (1, 0, rat_int(1))]).unwrap();
        assert!(from_unit_graph(g).is_err());
        assert!(from_unit_graph(unit(2, &[(0, 1)])).is_err());
    }

    #[test]
    fn cost_decomposition_failure_witnessed() {
        // y_0 = 1 and y_1 = 1/2 force c(0,1) = 3/2, but the edge costs 1
        let g = unit(2, &[(0, 1), (1, 0)]);
        let family = LaminarFamily::new(
            vec![BTreeSet::from([0]), BTreeSet::from([1])],
            vec![rat_int(1), rat(1, 2)],
        )
        .unwrap();
        let x = LpSolution {
            x: vec![rat_int(1), rat_int(1)],
            value: rat_int(2),
        };
        let inst = StronglyLaminarInstance::new(g, family, x, Mode::General).unwrap();
        let report = validate(&inst, &Backbone::empty());
        let item = report
            .items
            .iter()
            .find(|i| i.name == "cost decomposition")
            .unwrap();
        assert!(!item.pass);
        assert!(item.detail.contains("edge 0"));
    }

    #[test]
    fn general_mode_requires_tight_cuts() {
        // x = 5/4 on both arcs gives x(δ({v})) = 5/2 for the singletons
        let g = unit(2, &[(0, 1), (1, 0)]);
        let family = LaminarFamily::new(
            vec![BTreeSet::from([0]), BTreeSet::from([1])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let x = LpSolution {
            x: vec![rat(5, 4), rat(5, 4)],
            value: rat(5, 2),
        };
        let inst = StronglyLaminarInstance::new(g, family, x, Mode::General).unwrap();
        let report = validate(&inst, &Backbone::empty());
        let item = report.items.iter().find(|i| i.name == "x(δ(L)) = 2").unwrap();
        assert!(!item.pass);
        assert!(item.detail.contains("5/2"));
    }

    #[test]
    fn is_local_general_mode() {
        // L = {0,1}: the crossing arcs (1,2) and (2,0) are not local
        let g = MultiDigraph::new(
            3,
            vec![
                (0, 1, rat_int(1)),
                (1, 0, rat_int(1)),
                (1, 2, rat_int(2)),
                (2, 0, rat_int(2)),
            ],
        )
        .unwrap();
        let family = LaminarFamily::new(
            vec![
                BTreeSet::from([0]),
                BTreeSet::from([1]),
                BTreeSet::from([2]),
                BTreeSet::from([0, 1]),
            ],
            vec![rat(1, 2), rat(1, 2), rat(1, 2), rat_int(1)],
        )
        .unwrap();
        let x = LpSolution {
            x: vec![rat_int(0), rat_int(0), rat_int(0), rat_int(0)],
            value: rat_int(0),
        };
        let inst = StronglyLaminarInstance::new(g, family, x, Mode::General).unwrap();
        assert!(is_local(&inst, 0));
        assert!(is_local(&inst, 1));
        assert!(!is_local(&inst, 2));
        assert!(!is_local(&inst, 3));
    }

    #[test]
    fn laminarity_matches_pairwise_oracle() {
        fn pairwise_laminar(sets: &[BTreeSet<usize>]) -> bool {
            for i in 0..sets.len() {
                for j in (i + 1)..sets.len() {
                    let inter = sets[i].intersection(&sets[j]).count();
                    if inter == 0 {
                        continue;
                    }
                    if !sets[i].is_subset(&sets[j]) && !sets[j].is_subset(&sets[i]) {
                        return false;
                    }
                }
            }
            true
        }
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(2..10usize);
            let k = rng.gen_range(1..8usize);
            let mut sets = Vec::new();
            for _ in 0..k {
                let mut s = BTreeSet::new();
                let lo = rng.gen_range(0..n);
                let hi = rng.gen_range(lo..n);
                for v in lo..=hi {
                    s.insert(v);
                }
                // intervals are sometimes laminar, sometimes crossing
                if rng.gen_bool(0.3) {
                    s.remove(&lo);
                    if s.is_empty() {
                        s.insert(hi);
                    }
                }
                sets.push(s);
            }
            let fam = LaminarFamily::new(sets.clone(), vec![rat_int(0); sets.len()]).unwrap();
            assert_eq!(
                fam.check_laminar().is_ok(),
                pairwise_laminar(&sets),
                "disagreement on {:?}",
                sets
            );
        }
    }

    #[test]
    fn validate_passes_on_random_unit_instances() {
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..100 {
            let n = rng.gen_range(3..9usize);
            let mut arcs: Vec<(usize, usize)> = (0..n).map(|v| (v, (v + 1) % n)).collect();
            for u in 0..n {
                for v in 0..n {
                    if u != v && (u, v) != (u, (u + 1) % n) && rng.gen_bool(0.25) {
                        arcs.push((u, v));
                    }
                }
            }
            arcs.dedup();
            let inst = from_unit_graph(unit(n, &arcs)).unwrap();
            assert!(validate(&inst, &Backbone::empty()).all_passed());
        }
    }

    #[test]
    fn json_round_trip_exact_rationals() {
        let text = r#"{
  "n": 2,
  "mode": "general",
  "edges": [[0, 1, "1/3"], [1, 0, "1/3"]],
  "laminar": [
    {"verts": [0], "y": "1/6"},
    {"verts": [1], "y": "1/6"}
  ],
  "x": ["1", "1"],
  "backbone": {"verts": [], "edge_ids": []}
}"#;
        let (inst, b) = load_str(text).unwrap();
        assert_eq!(*inst.g.cost(0), rat(1, 3));
        assert_eq!(*inst.lp_value(), rat(2, 3));
        let stored = store_string(&inst, &b);
        let (inst2, b2) = load_str(&stored).unwrap();
        assert_eq!(inst2.g.cost(0), inst.g.cost(0));
        assert_eq!(inst2.family.y, inst.family.y);
        assert_eq!(inst2.x.x, inst.x.x);
        assert_eq!(inst2.mode, inst.mode);
        assert_eq!(b2.verts, b.verts);
        // canonical form is a fixed point
        assert_eq!(store_string(&inst2, &b2), stored);
    }

    #[test]
    fn general_mode_file_requires_x() {
        let text = r#"{
  "n": 2,
  "mode": "general",
  "edges": [[0, 1, "1"], [1, 0, "1"]],
  "laminar": [
    {"verts": [0], "y": "1/2"},
    {"verts": [1], "y": "1/2"}
  ],
  "backbone": {"verts": [], "edge_ids": []}
}"#;
        let err = load_str(text).unwrap_err();
        assert!(err.to_string().contains("x vector"));
    }

    #[test]
    fn graph_mode_file_x_optional() {
        let text = r#"{
  "n": 3,
  "mode": "graph-tsp",
  "edges": [[0, 1, "1"], [1, 2, "1"], [2, 0, "1"]],
  "laminar": [
    {"verts": [0], "y": "1/2"},
    {"verts": [1], "y": "1/2"},
    {"verts": [2], "y": "1/2"}
  ],
  "backbone": {"verts": [], "edge_ids": []}
}"#;
        let (inst, _) = load_str(text).unwrap();
        assert_eq!(*inst.lp_value(), rat_int(3));
    }

    #[test]
    fn dimacs_format_accepted() {
        let text = "c three cycle\np atsp 3 3\na 1 2\na 2 3\na 3 1\n";
        let (inst, b) = load_str(text).unwrap();
        assert!(b.is_empty());
        assert_eq!(inst.g.vertex_count(), 3);
        assert_eq!(*inst.lp_value(), rat_int(3));
        assert!(load_str("a 1 2\n").is_err());
        assert!(load_str("p atsp 2 1\na 0 1\n").is_err());
    }

    #[test]
    fn malformed_json_diagnostics() {
        let err = load_str("{\"n\": 2").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        let text = r#"{
  "n": 2,
  "mode": "general",
  "edges": [[0, 1, "1/0"]],
  "laminar": [],
  "x": ["1"],
  "backbone": {"verts": [], "edge_ids": []}
}"#;
        let err = load_str(text).unwrap_err();
        assert!(err.to_string().contains("edges[0]"));
    }
}
