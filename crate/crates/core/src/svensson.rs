//! The main algorithm: extend a backbone to a tour by repeatedly computing
//! a subtour cover, scanning its circuits for a significantly better
//! initialization (restarting when one is found), and otherwise extending
//! the partial solution with cover edges and cheap connector circuits.
//!
//! Every inequality the analysis relies on is asserted at runtime in exact
//! arithmetic: the potential jump at each restart, the per-circuit slack
//! bound and the per-index cover cost bound certified by step 2, the
//! connector-circuit budgets of step 3, and the final cost bound. A failed
//! assertion aborts the run; it can only mean an implementation bug.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cover::{compute_subtour_cover, SubtourCover};
use crate::error::{Error, Result};
use crate::graph::{
    connected_components, decompose_into_circuits, is_eulerian, min_cost_crossing_circuit_with,
    shortest_paths, Circuit, EdgeId, MultiDigraph, MultiEdgeSet, ShortestPaths, VertexId,
};
use crate::instance::{is_local, validate, Backbone, Mode, StronglyLaminarInstance};
use crate::ratio::{format_rat, rat, rat_int, rat_pow, rat_zero, Rat};

/// Algorithm parameters. `p` is derived: the smallest integer `>= 2/ε`.
#[derive(Debug, Clone)]
pub struct Config {
    pub gamma: Rat,
    pub epsilon: Rat,
    pub p: usize,
    pub relaxed_step3_threshold: bool,
}

impl Config {
    pub fn new(gamma: Rat, epsilon: Rat, relaxed_step3_threshold: bool) -> Result<Self> {
        if !epsilon.is_positive() || epsilon > rat(1, 4) {
            return Err(Error::InvalidInput(format!(
                "epsilon must satisfy 0 < ε ≤ 1/4, got {}",
                format_rat(&epsilon)
            )));
        }
        let lower = rat_int(2) / (rat_int(1) - &epsilon);
        if gamma < lower {
            return Err(Error::InvalidInput(format!(
                "gamma must satisfy γ ≥ 2/(1−ε) = {}, got {}",
                format_rat(&lower),
                format_rat(&gamma)
            )));
        }
        let p = crate::ratio::ceil_two_over(&epsilon)?;
        Ok(Config {
            gamma,
            epsilon,
            p,
            relaxed_step3_threshold,
        })
    }

    /// Default parameters: γ = 169/70 (a rational slightly above 1 + √2)
    /// and ε = 1/10, hence p = 20.
    pub fn default_params() -> Self {
        Config::new(rat(169, 70), rat(1, 10), false).expect("default parameters are valid")
    }

    fn gamma_one_minus_eps_minus_one(&self) -> Rat {
        &self.gamma * (rat_int(1) - &self.epsilon) - rat_int(1)
    }

    /// `1 + 1/(γ(1−ε)−1)`: circuits whose cost exceeds this multiple of the
    /// weight they meet in their index component witness a better
    /// initialization.
    pub fn exploring_coefficient(&self) -> Rat {
        rat_int(1) + rat_int(1) / self.gamma_one_minus_eps_minus_one()
    }

    /// `2(1−ε)/(γ(1−ε)−1)`: per-index bound multiplier for certified cover
    /// parts.
    pub fn f_edge_coefficient(&self) -> Rat {
        rat_int(2) * (rat_int(1) - &self.epsilon) / self.gamma_one_minus_eps_minus_one()
    }

    /// `(1 + 2(1−ε)/(γ(1−ε)−1))·γ`: the certified tour-cost multiple of the
    /// LP value in graph-TSP mode (with the default step-3 threshold).
    pub fn guarantee_coefficient(&self) -> Rat {
        (rat_int(1) + self.f_edge_coefficient()) * &self.gamma
    }

    /// Step-3 admission threshold multiplier: 1 by default; with the
    /// relaxed flag, `1/(q − 3ε)` where `q = 99/70 > √2` (rounding the
    /// irrational constant towards a stricter threshold keeps every proof
    /// obligation intact).
    pub fn x_threshold_multiplier(&self) -> Rat {
        if self.relaxed_step3_threshold {
            rat_int(1) / (rat(99, 70) - rat_int(3) * &self.epsilon)
        } else {
            rat_int(1)
        }
    }

    /// Multiplier used in the connector-circuit budget certificates; the
    /// admission threshold never exceeds this multiple of the slack.
    pub fn x_cert_multiplier(&self) -> Rat {
        let m = self.x_threshold_multiplier();
        if m > rat_int(1) {
            m
        } else {
            rat_int(1)
        }
    }
}

/// Per-vertex budgets on `V∖V(B)` paying for local edges.
#[derive(Debug, Clone)]
pub struct Budgets {
    ell: BTreeMap<VertexId, Rat>,
    pub total: Rat,
    pub min: Rat,
    pub min_pow_p: Rat,
}

impl Budgets {
    pub fn new(
        inst: &StronglyLaminarInstance,
        b: &Backbone,
        cfg: &Config,
    ) -> Result<Self> {
        let outside = inst.outside_vertices(b);
        if outside.is_empty() {
            return Err(Error::InvalidInput(
                "budgets are undefined when the backbone spans every vertex".into(),
            ));
        }
        let n = Rat::from_integer(inst.g.vertex_count().into());
        let mut ell = BTreeMap::new();
        match inst.mode {
            Mode::GraphTsp => {
                for &v in &outside {
                    ell.insert(v, &cfg.gamma * inst.x_in_degree(v));
                }
            }
            Mode::General => {
                let sum_2y: Rat = outside.iter().map(|&v| inst.two_y(v)).sum();
                let floor_term = &cfg.epsilon / &n * &sum_2y;
                for &v in &outside {
                    let own = &cfg.gamma * inst.two_y(v);
                    ell.insert(v, own.max(floor_term.clone()));
                }
            }
        }
        if let Some((v, l)) = ell.iter().find(|(_, l)| !l.is_positive()) {
            return Err(Error::InvalidInput(format!(
                "budget ℓ({}) = {} is not positive",
                v,
                format_rat(l)
            )));
        }
        let total: Rat = ell.values().cloned().sum();
        let min = ell.values().min().cloned().expect("nonempty");

        // Certified structural facts about the budgets.
        let spread_cap = (&cfg.gamma + &cfg.epsilon) * &n * &n / &cfg.epsilon * &min;
        if total > spread_cap {
            return Err(Error::CertificationFailed(format!(
                "budget spread: ℓ(V∖V(B)) = {} exceeds ((γ+ε)n²/ε)·min ℓ = {}",
                format_rat(&total),
                format_rat(&spread_cap)
            )));
        }
        for (&v, l) in &ell {
            let lower = &cfg.gamma * inst.x_in_degree(v) * inst.two_y(v);
            if *l < lower {
                return Err(Error::CertificationFailed(format!(
                    "budget lower bound: ℓ({}) = {} < γ·x(δ⁻(v))·2y_v = {}",
                    v,
                    format_rat(l),
                    format_rat(&lower)
                )));
            }
        }
        if inst.mode == Mode::GraphTsp {
            let gamma_lp = &cfg.gamma * inst.lp_value();
            if total != gamma_lp {
                return Err(Error::CertificationFailed(format!(
                    "graph-TSP budgets must total γ·LP: {} vs {}",
                    format_rat(&total),
                    format_rat(&gamma_lp)
                )));
            }
        }
        let min_pow_p = rat_pow(&min, cfg.p);
        Ok(Budgets {
            ell,
            total,
            min,
            min_pow_p,
        })
    }

    pub fn ell(&self, v: VertexId) -> Result<&Rat> {
        self.ell.get(&v).ok_or_else(|| {
            Error::InvalidInput(format!("vertex {} has no budget (backbone vertex?)", v))
        })
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a VertexId>>(&self, verts: I) -> Result<Rat> {
        let mut total = rat_zero();
        for v in verts {
            total += self.ell(*v)?;
        }
        Ok(total)
    }
}

/// One component of the current initialization, with its slack.
#[derive(Debug, Clone)]
pub struct InitComponent {
    pub verts: BTreeSet<VertexId>,
    pub slack: Rat,
}

/// A light, local, Eulerian initialization together with its sorted
/// components and potential.
#[derive(Debug, Clone)]
pub struct InitState {
    pub h_tilde: MultiEdgeSet,
    /// Sorted by nonincreasing slack, ties by smallest vertex id;
    /// `comps[i]` is component index `i + 1` (index 0 is the backbone).
    pub comps: Vec<InitComponent>,
    pub phi: Rat,
    /// Backbone vertex set (component index 0).
    pub w0: BTreeSet<VertexId>,
    comp_of: Vec<usize>,
}

impl InitState {
    pub fn component_count(&self) -> usize {
        self.comps.len()
    }

    /// Component index of a vertex: 0 for backbone vertices, else 1..=k.
    pub fn component_of(&self, v: VertexId) -> usize {
        self.comp_of[v]
    }

    pub fn component_verts(&self, index: usize) -> &BTreeSet<VertexId> {
        &self.comps[index - 1].verts
    }

    pub fn component_slack(&self, index: usize) -> &Rat {
        &self.comps[index - 1].slack
    }

    /// Edges of the initialization inside component `index`.
    pub fn h_tilde_inside(&self, g: &MultiDigraph, index: usize) -> MultiEdgeSet {
        self.h_tilde.restrict_to(g, &self.comps[index - 1].verts)
    }
}

/// A connected Eulerian multi-subgraph of `G[V∖V(B)]` (the shape handed to
/// the improved-initialization lemma).
#[derive(Debug, Clone)]
pub struct EulerianSubgraph {
    pub verts: BTreeSet<VertexId>,
    pub edges: MultiEdgeSet,
}

impl EulerianSubgraph {
    pub fn from_circuit(g: &MultiDigraph, c: &Circuit) -> Self {
        EulerianSubgraph {
            verts: c.vertices(g),
            edges: c.to_edge_set(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitBranch {
    /// The index component's slack was below the minimum budget: its edges
    /// are dropped, splitting it into singletons.
    DropComponent,
    /// General case: merge `E(D)` with the kept intersected components.
    MergeComponents,
}

/// Connector circuit added in step 3 and paid from a component's slack.
#[derive(Debug, Clone)]
pub struct XEntry {
    pub circuit_edges: Vec<EdgeId>,
    pub cost: Rat,
    pub payer: usize,
    /// Exact budget the entry was certified against
    /// (threshold multiplier × slack of the payer component).
    pub budget: Rat,
}

/// Cover part `F_i` added to `H` during step 3 of iteration `iteration`.
#[derive(Debug, Clone)]
pub struct FEntry {
    pub iteration: usize,
    pub index: usize,
    pub cost: Rat,
    /// Exact bound the entry was certified against: the cover-part
    /// coefficient times ℓ(W̃_index) for positive indices, and the
    /// cover total-cost budget for index 0.
    pub cap: Rat,
}

/// Mutable state of one execution (between restarts).
#[derive(Debug, Clone)]
pub struct RunState {
    pub h: MultiEdgeSet,
    pub x_ledger: Vec<XEntry>,
    pub f_ledger: Vec<FEntry>,
    pub iteration: usize,
}

/// Cover circuits partitioned by index after the step-2 checks passed.
#[derive(Debug, Clone)]
pub struct CertifiedCover {
    pub circuits_by_index: BTreeMap<usize, Vec<Circuit>>,
    pub f_by_index: BTreeMap<usize, MultiEdgeSet>,
    pub f_total: MultiEdgeSet,
}

#[derive(Debug)]
pub enum Step2Outcome {
    Restart(InitState),
    Certified(CertifiedCover),
}

/// One record per outer iteration, for the run trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub restart: usize,
    pub iteration: usize,
    pub phi: String,
    pub restarted: bool,
    pub cover_cost: String,
    pub f_added: Vec<(usize, String)>,
    pub x_added: Vec<String>,
    pub components_before: usize,
    pub components_after: usize,
}

/// Everything a run certifies, plus the ledgers and trace.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub restarts: usize,
    pub phi_history: Vec<Rat>,
    pub x_ledger: Vec<XEntry>,
    pub f_ledger: Vec<FEntry>,
    pub iterations: usize,
    pub tour: MultiEdgeSet,
    pub tour_cost: Rat,
    pub h_cost: Rat,
    pub lp_value: Rat,
    pub bound_value: Rat,
    /// ℓ(V∖V(B)) of the final execution's budgets.
    pub budget_total: Rat,
    /// min ℓ(v) over V∖V(B).
    pub budget_min: Rat,
    /// Cost of the final initialization H̃.
    pub h_tilde_cost: Rat,
    pub certified: Vec<(String, String)>,
    pub trace: Vec<TraceRecord>,
}

enum ExecOutcome {
    Tour(RunState),
    Restart(InitState),
}

/// The algorithm with its per-run context: instance, backbone, budgets,
/// current initialization and the cached local shortest paths.
pub struct Algorithm<'a> {
    pub inst: &'a StronglyLaminarInstance,
    pub backbone: &'a Backbone,
    pub cfg: Config,
    pub budgets: Budgets,
    pub init: InitState,
    outside: BTreeSet<VertexId>,
    local_sp: ShortestPaths,
}

impl<'a> Algorithm<'a> {
    /// Sets up the run with the empty initialization.
    pub fn new(
        inst: &'a StronglyLaminarInstance,
        backbone: &'a Backbone,
        cfg: Config,
    ) -> Result<Self> {
        Self::with_initialization(inst, backbone, cfg, MultiEdgeSet::new())
    }

    /// Sets up the run with a caller-provided initialization (it must be a
    /// light local Eulerian multi-subset of `E[V∖V(B)]`).
    pub fn with_initialization(
        inst: &'a StronglyLaminarInstance,
        backbone: &'a Backbone,
        cfg: Config,
        h_tilde: MultiEdgeSet,
    ) -> Result<Self> {
        let budgets = Budgets::new(inst, backbone, &cfg)?;
        let outside = inst.outside_vertices(backbone);
        let local_sp = shortest_paths(&inst.g, &|e| is_local(inst, e));
        let init = build_init(inst, backbone, &budgets, cfg.p, &outside, h_tilde)?;
        Ok(Algorithm {
            inst,
            backbone,
            cfg,
            budgets,
            init,
            outside,
            local_sp,
        })
    }

    pub fn outside(&self) -> &BTreeSet<VertexId> {
        &self.outside
    }

    /// `slack(Ṽ, Ẽ) = ℓ(Ṽ) − c(Ẽ[Ṽ])` for `Ṽ ⊆ V∖V(B)`.
    pub fn slack(&self, vset: &BTreeSet<VertexId>, eset: &MultiEdgeSet) -> Result<Rat> {
        if let Some(v) = vset.iter().find(|v| !self.outside.contains(v)) {
            return Err(Error::InvalidInput(format!(
                "slack is only defined outside the backbone; vertex {} is in V(B)",
                v
            )));
        }
        let ell = self.budgets.sum(vset.iter())?;
        Ok(ell - eset.restrict_to(&self.inst.g, vset).cost(&self.inst.g))
    }

    /// `Φ = Σ slack(W̃_i, H̃)^p` of the current initialization.
    pub fn potential(&self) -> Rat {
        self.init.phi.clone()
    }

    /// Strict test `phi_new − Φ > min ℓ(v)^p`.
    pub fn significantly_better(&self, phi_new: &Rat) -> bool {
        phi_new - &self.init.phi > self.budgets.min_pow_p
    }

    /// Smallest `j` with `vset ∩ W̃_j ≠ ∅`, where `W̃_0 = V(B)`.
    pub fn index(&self, vset: &BTreeSet<VertexId>) -> Result<usize> {
        vset.iter()
            .map(|&v| self.init.component_of(v))
            .min()
            .ok_or_else(|| {
                Error::ContractViolation("index of an empty vertex set is undefined".into())
            })
    }

    fn require_local_outside_circuit(&self, c: &Circuit) -> Result<()> {
        for &e in c.edge_ids() {
            if !is_local(self.inst, e) {
                return Err(Error::InvalidInput(format!(
                    "circuit edge {} is not local",
                    e
                )));
            }
        }
        if let Some(v) = c
            .vertices(&self.inst.g)
            .iter()
            .find(|v| !self.outside.contains(v))
        {
            return Err(Error::InvalidInput(format!(
                "circuit visits backbone vertex {}",
                v
            )));
        }
        Ok(())
    }

    /// Strict test of the exploring-circuit inequality
    /// `c(E(C)) > (1 + 1/(γ(1−ε)−1)) · Σ_{v ∈ V(C)∩W̃_ind(C)} 2y_v`.
    /// Circuits lying inside their index component can never pass.
    pub fn check_exploring_circuit(&self, c: &Circuit) -> Result<bool> {
        self.require_local_outside_circuit(c)?;
        let verts = c.vertices(&self.inst.g);
        let ind = self.index(&verts)?;
        if ind == 0 {
            return Err(Error::InvalidInput(
                "exploring-circuit check applies to circuits with positive index only".into(),
            ));
        }
        let w_ind = self.init.component_verts(ind);
        if verts.iter().all(|v| w_ind.contains(v)) {
            return Ok(false);
        }
        let weight: Rat = verts
            .iter()
            .filter(|v| w_ind.contains(v))
            .map(|&v| self.inst.two_y(v))
            .sum();
        Ok(c.cost(&self.inst.g) > self.cfg.exploring_coefficient() * weight)
    }

    /// Strict test of the large-and-light inequality
    /// `slack(V(D),E(D)) > slack(W̃_ind(D),H̃) + ε·ℓ(V(D)∖W̃_ind(D))`.
    pub fn check_large_and_light(&self, d: &EulerianSubgraph) -> Result<bool> {
        self.validate_subgraph(d)?;
        let ind = self.index(&d.verts)?;
        if ind == 0 {
            return Err(Error::InvalidInput(
                "large-and-light check applies to subgraphs with positive index only".into(),
            ));
        }
        let w_ind = self.init.component_verts(ind);
        let extra: Vec<VertexId> = d
            .verts
            .iter()
            .copied()
            .filter(|v| !w_ind.contains(v))
            .collect();
        if extra.is_empty() {
            return Ok(false);
        }
        let lhs = self.slack(&d.verts, &d.edges)?;
        let rhs = self.init.component_slack(ind).clone()
            + &self.cfg.epsilon * self.budgets.sum(extra.iter())?;
        Ok(lhs > rhs)
    }

    fn validate_subgraph(&self, d: &EulerianSubgraph) -> Result<()> {
        if let Some(v) = d.verts.iter().find(|v| !self.outside.contains(v)) {
            return Err(Error::InvalidInput(format!(
                "subgraph vertex {} lies on the backbone",
                v
            )));
        }
        for (e, _) in d.edges.iter() {
            if !is_local(self.inst, e) {
                return Err(Error::InvalidInput(format!("subgraph edge {} is not local", e)));
            }
            let edge = self.inst.g.edge(e);
            if !d.verts.contains(&edge.tail) || !d.verts.contains(&edge.head) {
                return Err(Error::InvalidInput(format!(
                    "subgraph edge {} leaves the declared vertex set",
                    e
                )));
            }
        }
        if !is_eulerian(&self.inst.g, &d.edges)? {
            return Err(Error::InvalidInput("subgraph is not Eulerian".into()));
        }
        let comps = connected_components(&self.inst.g, &d.edges, Some(&d.verts));
        if comps.len() != 1 {
            return Err(Error::InvalidInput(format!(
                "subgraph is not connected ({} components)",
                comps.len()
            )));
        }
        Ok(())
    }

    /// Lifts an exploring circuit to the subgraph
    /// `V(D) = W̃_ind(C) ∪ V(C)`, `E(D) = H̃[W̃_ind(C)] ⊎ E(C)`.
    pub fn circuit_to_d(&self, c: &Circuit) -> Result<EulerianSubgraph> {
        self.require_local_outside_circuit(c)?;
        let cverts = c.vertices(&self.inst.g);
        let ind = self.index(&cverts)?;
        if ind == 0 {
            return Err(Error::InvalidInput(
                "circuit_to_d applies to circuits with positive index only".into(),
            ));
        }
        let mut verts = self.init.component_verts(ind).clone();
        verts.extend(cverts.iter().copied());
        let mut edges = self.init.h_tilde_inside(&self.inst.g, ind);
        edges.add_set(&c.to_edge_set());
        Ok(EulerianSubgraph { verts, edges })
    }

    /// Builds a significantly better initialization from a large-and-light
    /// subgraph, following the two proof branches, and certifies the
    /// potential increase exactly.
    pub fn improved_initialization(
        &self,
        d: &EulerianSubgraph,
    ) -> Result<(InitState, InitBranch)> {
        if !self.check_large_and_light(d)? {
            return Err(Error::ContractViolation(
                "improved_initialization requires the large-and-light inequality".into(),
            ));
        }
        let g = &self.inst.g;
        let ind = self.index(&d.verts)?;
        let branch;
        let h_new = if *self.init.component_slack(ind) < self.budgets.min {
            branch = InitBranch::DropComponent;
            let mut h = self.init.h_tilde.clone();
            for (e, m) in self.init.h_tilde_inside(g, ind).iter() {
                h.remove(e, m);
            }
            h
        } else {
            branch = InitBranch::MergeComponents;
            let intersected: Vec<usize> = (1..=self.init.component_count())
                .filter(|&j| {
                    self.init
                        .component_verts(j)
                        .iter()
                        .any(|v| d.verts.contains(v))
                })
                .collect();
            let kept: Vec<usize> = intersected
                .iter()
                .copied()
                .filter(|&j| {
                    let overlap: Vec<VertexId> = self
                        .init
                        .component_verts(j)
                        .iter()
                        .copied()
                        .filter(|v| d.verts.contains(v))
                        .collect();
                    let ell_overlap = self.budgets.sum(overlap.iter()).expect("outside vertices");
                    ell_overlap <= *self.init.component_slack(j)
                })
                .collect();
            let mut h = MultiEdgeSet::new();
            for j in 1..=self.init.component_count() {
                if !intersected.contains(&j) {
                    h.add_set(&self.init.h_tilde_inside(g, j));
                }
            }
            h.add_set(&d.edges);
            for &j in &kept {
                h.add_set(&self.init.h_tilde_inside(g, j));
            }
            h
        };
        let new_init = build_init(
            self.inst,
            self.backbone,
            &self.budgets,
            self.cfg.p,
            &self.outside,
            h_new,
        )?;
        let gain = &new_init.phi - &self.init.phi;
        if gain <= self.budgets.min_pow_p {
            return Err(Error::CertificationFailed(format!(
                "improved initialization must raise Φ by more than min ℓ^p: gain {} vs {}",
                format_rat(&gain),
                format_rat(&self.budgets.min_pow_p)
            )));
        }
        Ok((new_init, branch))
    }

    /// Step 2: decompose the cover, drop circuits inside one component of
    /// `(V∖V(B), H)`, scan for a better initialization (exploring-circuit
    /// test first, then large-and-light), and otherwise certify the
    /// per-circuit slack bound and the per-index cost bound.
    pub fn step2(&self, run: &RunState, cover: &SubtourCover) -> Result<Step2Outcome> {
        let g = &self.inst.g;
        let circuits = decompose_into_circuits(g, &cover.f)?;

        let h_comps = connected_components(g, &run.h, Some(&self.outside));
        let mut comp_of_vertex: BTreeMap<VertexId, usize> = BTreeMap::new();
        for (i, (vs, _)) in h_comps.iter().enumerate() {
            for &v in vs {
                comp_of_vertex.insert(v, i);
            }
        }
        let kept: Vec<&Circuit> = circuits
            .iter()
            .filter(|c| {
                let verts = c.vertices(g);
                let mut comps = verts.iter().map(|v| comp_of_vertex.get(v));
                match comps.next().unwrap() {
                    None => true, // touches the backbone: not inside any outside component
                    Some(first) => !comps.all(|c| c == Some(first)),
                }
            })
            .collect();

        // Exploring-circuit scan.
        for c in &kept {
            let verts = c.vertices(g);
            let ind = self.index(&verts)?;
            if ind == 0 {
                continue;
            }
            if c.edge_ids().iter().any(|&e| !is_local(self.inst, e)) {
                return Err(Error::CertificationFailed(format!(
                    "cover circuit with positive index contains a non-local edge: {:?}",
                    c.edge_ids()
                )));
            }
            if self.check_exploring_circuit(c)? {
                let d = self.circuit_to_d(c)?;
                let (init, _) = self.improved_initialization(&d)?;
                return Ok(Step2Outcome::Restart(init));
            }
        }

        // Large-and-light scan with D = C.
        for c in &kept {
            let verts = c.vertices(g);
            if self.index(&verts)? == 0 {
                continue;
            }
            let d = EulerianSubgraph::from_circuit(g, c);
            if self.check_large_and_light(&d)? {
                let (init, _) = self.improved_initialization(&d)?;
                return Ok(Step2Outcome::Restart(init));
            }
        }

        // No restart: certify the theorem bounds and partition by index.
        let eps_cap = &self.cfg.epsilon;
        let mut circuits_by_index: BTreeMap<usize, Vec<Circuit>> = BTreeMap::new();
        for c in &kept {
            let verts = c.vertices(g);
            let ind = self.index(&verts)?;
            if ind >= 1 {
                let lhs = self.slack(&verts, &c.to_edge_set())?;
                let rhs = self.init.component_slack(ind).clone()
                    + eps_cap * self.budgets.sum(verts.iter())?;
                if lhs > rhs {
                    return Err(Error::CertificationFailed(format!(
                        "circuit slack bound violated at index {}: slack {} > {}",
                        ind,
                        format_rat(&lhs),
                        format_rat(&rhs)
                    )));
                }
            }
            circuits_by_index
                .entry(ind)
                .or_default()
                .push((*c).clone());
        }

        let mut f_by_index: BTreeMap<usize, MultiEdgeSet> = BTreeMap::new();
        for (&ind, cs) in &circuits_by_index {
            let f_i =
                MultiEdgeSet::sum(cs.iter().map(|c| c.to_edge_set()).collect::<Vec<_>>().iter());
            f_by_index.insert(ind, f_i);
        }
        let fcoef = self.cfg.f_edge_coefficient();
        for (&ind, f_i) in &f_by_index {
            if ind == 0 {
                continue;
            }
            let cost = f_i.cost(g);
            let cap = &fcoef * self.budgets.sum(self.init.component_verts(ind).iter())?;
            if cost > cap {
                return Err(Error::CertificationFailed(format!(
                    "cover part bound violated: c(F_{}) = {} > {}",
                    ind,
                    format_rat(&cost),
                    format_rat(&cap)
                )));
            }
        }
        let f_total = MultiEdgeSet::sum(f_by_index.values().collect::<Vec<_>>().into_iter());
        Ok(Step2Outcome::Certified(CertifiedCover {
            circuits_by_index,
            f_by_index,
            f_total,
        }))
    }

    /// Step 3: repeatedly pick the component with the largest index in the
    /// augmented graph and admit a cheapest local circuit crossing it while
    /// one fits within the payer component's slack; then add the part of
    /// the cover and the admitted circuits inside the final component.
    pub fn step3(&self, run: &mut RunState, certified: &CertifiedCover) -> Result<()> {
        let g = &self.inst.g;
        let mut pending: Vec<(Circuit, Rat, usize)> = Vec::new();
        let mut last_count = usize::MAX;
        let multiplier = self.cfg.x_threshold_multiplier();

        let (z_verts, _) = loop {
            let mut all = self.backbone.edges.clone();
            all.add_set(&run.h);
            all.add_set(&certified.f_total);
            for (c, _, _) in &pending {
                all.add_set(&c.to_edge_set());
            }
            let comps = connected_components(g, &all, None);
            if comps.len() >= last_count {
                return Err(Error::CertificationFailed(
                    "step-3 circuit failed to merge components".into(),
                ));
            }
            last_count = comps.len();

            let mut inds: Vec<usize> = Vec::with_capacity(comps.len());
            for (vs, _) in &comps {
                inds.push(
                    vs.iter()
                        .map(|&v| self.init.component_of(v))
                        .min()
                        .expect("components are nonempty"),
                );
            }
            let (zi, z_ind) = inds
                .iter()
                .enumerate()
                .max_by_key(|(_, &ind)| ind)
                .map(|(i, &ind)| (i, ind))
                .expect("at least one component");
            if inds.iter().filter(|&&x| x == z_ind).count() > 1 {
                return Err(Error::CertificationFailed(format!(
                    "two components share the largest index {}",
                    z_ind
                )));
            }
            let z = comps[zi].0.clone();
            if z.len() == g.vertex_count() {
                break (z, z_ind);
            }
            if z_ind == 0 {
                return Err(Error::CertificationFailed(
                    "a proper component has index 0 while others avoid the backbone".into(),
                ));
            }

            let threshold = &multiplier * self.init.component_slack(z_ind);
            let found = min_cost_crossing_circuit_with(
                g,
                &|e| is_local(self.inst, e),
                &z,
                &self.local_sp,
            );
            match found {
                Some((c, cost)) if cost <= threshold => {
                    pending.push((c, cost, z_ind));
                }
                _ => break (z, z_ind),
            }
        };

        // Add (F ⊎ X)[V(Z)] to H, ledger only what is actually added.
        let cert_mult = self.cfg.x_cert_multiplier();
        for (ind, circuits) in &certified.circuits_by_index {
            if circuits.is_empty() {
                continue;
            }
            let inside: Vec<bool> = circuits
                .iter()
                .map(|c| c.vertices(g).iter().all(|v| z_verts.contains(v)))
                .collect();
            if inside.iter().any(|&b| b) != inside.iter().all(|&b| b) {
                return Err(Error::CertificationFailed(format!(
                    "cover part F_{} straddles the final component",
                    ind
                )));
            }
            if inside[0] {
                let f_i = &certified.f_by_index[ind];
                let cap = if *ind >= 1 {
                    self.cfg.f_edge_coefficient()
                        * self.budgets.sum(self.init.component_verts(*ind).iter())?
                } else {
                    let outside_2y: Rat =
                        self.outside.iter().map(|&v| self.inst.two_y(v)).sum();
                    rat_int(2) * self.inst.lp_value() + outside_2y
                };
                run.h.add_set(f_i);
                run.f_ledger.push(FEntry {
                    iteration: run.iteration,
                    index: *ind,
                    cost: f_i.cost(g),
                    cap,
                });
            }
        }
        for (c, cost, payer) in pending {
            let verts = c.vertices(g);
            let all_in = verts.iter().all(|v| z_verts.contains(v));
            let any_in = verts.iter().any(|v| z_verts.contains(v));
            if all_in != any_in {
                return Err(Error::CertificationFailed(
                    "connector circuit straddles the final component".into(),
                ));
            }
            if all_in {
                let cap = &cert_mult * self.init.component_slack(payer);
                if cost > cap {
                    return Err(Error::CertificationFailed(format!(
                        "connector circuit cost {} exceeds its budget {} (payer {})",
                        format_rat(&cost),
                        format_rat(&cap),
                        payer
                    )));
                }
                run.h.add_set(&c.to_edge_set());
                run.x_ledger.push(XEntry {
                    circuit_edges: c.edge_ids().to_vec(),
                    cost,
                    payer,
                    budget: cap,
                });
            }
        }

        // Ledger invariants that must hold at all times.
        let mut payers = BTreeSet::new();
        for entry in &run.x_ledger {
            if !payers.insert(entry.payer) {
                return Err(Error::CertificationFailed(format!(
                    "component {} paid for two connector circuits",
                    entry.payer
                )));
            }
        }
        let mut f_indices = BTreeSet::new();
        for entry in &run.f_ledger {
            if entry.index >= 1 && !f_indices.insert(entry.index) {
                return Err(Error::CertificationFailed(format!(
                    "index {} contributed a nonempty cover part twice",
                    entry.index
                )));
            }
        }
        Ok(())
    }

    fn execute(&self, restart: usize, trace: &mut Vec<TraceRecord>) -> Result<ExecOutcome> {
        let g = &self.inst.g;
        let mut run = RunState {
            h: self.init.h_tilde.clone(),
            x_ledger: Vec::new(),
            f_ledger: Vec::new(),
            iteration: 0,
        };
        loop {
            let mut base = self.backbone.edges.clone();
            base.add_set(&run.h);
            let comps_before = connected_components(g, &base, None).len();
            if comps_before == 1 {
                if !is_eulerian(g, &base)? {
                    return Err(Error::CertificationFailed(
                        "connected multigraph is not Eulerian at termination".into(),
                    ));
                }
                return Ok(ExecOutcome::Tour(run));
            }

            let cover = compute_subtour_cover(self.inst, self.backbone, &run.h)?;
            let cover_cost = cover.f.cost(g);
            run.iteration += 1;
            match self.step2(&run, &cover)? {
                Step2Outcome::Restart(init) => {
                    trace.push(TraceRecord {
                        restart,
                        iteration: run.iteration,
                        phi: format_rat(&self.init.phi),
                        restarted: true,
                        cover_cost: format_rat(&cover_cost),
                        f_added: Vec::new(),
                        x_added: Vec::new(),
                        components_before: comps_before,
                        components_after: comps_before,
                    });
                    return Ok(ExecOutcome::Restart(init));
                }
                Step2Outcome::Certified(cc) => {
                    let f_before = run.f_ledger.len();
                    let x_before = run.x_ledger.len();
                    self.step3(&mut run, &cc)?;

                    let mut base = self.backbone.edges.clone();
                    base.add_set(&run.h);
                    let comps_after = connected_components(g, &base, None).len();
                    if comps_after >= comps_before {
                        return Err(Error::CertificationFailed(format!(
                            "outer iteration failed to reduce components: {} -> {}",
                            comps_before, comps_after
                        )));
                    }
                    if !is_eulerian(g, &base)? {
                        return Err(Error::CertificationFailed(
                            "E(B) ⊎ H must stay Eulerian at iteration boundaries".into(),
                        ));
                    }
                    trace.push(TraceRecord {
                        restart,
                        iteration: run.iteration,
                        phi: format_rat(&self.init.phi),
                        restarted: false,
                        cover_cost: format_rat(&cover_cost),
                        f_added: run.f_ledger[f_before..]
                            .iter()
                            .map(|e| (e.index, format_rat(&e.cost)))
                            .collect(),
                        x_added: run.x_ledger[x_before..]
                            .iter()
                            .map(|e| format_rat(&e.cost))
                            .collect(),
                        components_before: comps_before,
                        components_after: comps_after,
                    });
                }
            }
        }
    }
}

fn build_init(
    inst: &StronglyLaminarInstance,
    backbone: &Backbone,
    budgets: &Budgets,
    p: usize,
    outside: &BTreeSet<VertexId>,
    h_tilde: MultiEdgeSet,
) -> Result<InitState> {
    let g = &inst.g;
    for (e, _) in h_tilde.iter() {
        if e >= g.edge_count() {
            return Err(Error::InvalidInput(format!("initialization edge id {} invalid", e)));
        }
        let edge = g.edge(e);
        if !outside.contains(&edge.tail) || !outside.contains(&edge.head) {
            return Err(Error::ContractViolation(format!(
                "initialization edge {} touches the backbone",
                e
            )));
        }
        if !is_local(inst, e) {
            return Err(Error::ContractViolation(format!(
                "initialization edge {} is not local",
                e
            )));
        }
    }
    if !is_eulerian(g, &h_tilde)? {
        return Err(Error::ContractViolation(
            "initialization must be Eulerian".into(),
        ));
    }
    let raw = connected_components(g, &h_tilde, Some(outside));
    let mut comps = Vec::with_capacity(raw.len());
    for (verts, edges) in raw {
        let ell = budgets.sum(verts.iter())?;
        let slack = ell - edges.cost(g);
        if slack.is_negative() {
            return Err(Error::ContractViolation(format!(
                "initialization is not light: component {:?} has slack {}",
                verts,
                format_rat(&slack)
            )));
        }
        comps.push(InitComponent { verts, slack });
    }
    comps.sort_by(|a, b| {
        b.slack
            .cmp(&a.slack)
            .then_with(|| a.verts.iter().next().cmp(&b.verts.iter().next()))
    });
    let phi: Rat = comps.iter().map(|c| rat_pow(&c.slack, p)).sum();
    let mut comp_of = vec![0usize; g.vertex_count()];
    for (i, comp) in comps.iter().enumerate() {
        for &v in &comp.verts {
            comp_of[v] = i + 1;
        }
    }
    Ok(InitState {
        h_tilde,
        comps,
        phi,
        w0: backbone.verts.clone(),
        comp_of,
    })
}

/// Runs the algorithm on a validated instance and backbone, returning the
/// tour `E(B) ⊎ H` and a report with the certified ledgers and trace.
pub fn run(
    inst: &StronglyLaminarInstance,
    backbone: &Backbone,
    cfg: &Config,
) -> Result<(MultiEdgeSet, RunReport)> {
    let validation = validate(inst, backbone);
    if !validation.all_passed() {
        return Err(Error::Validation(validation.failure_summary()));
    }
    let g = &inst.g;

    // Trivial case: the backbone (or a single vertex) already spans.
    let base_comps = connected_components(g, &backbone.edges, None).len();
    if base_comps == 1 {
        let tour = backbone.edges.clone();
        if !is_eulerian(g, &tour)? {
            return Err(Error::Validation("backbone is not Eulerian".into()));
        }
        let cost = tour.cost(g);
        return Ok((
            tour.clone(),
            RunReport {
                restarts: 0,
                phi_history: Vec::new(),
                x_ledger: Vec::new(),
                f_ledger: Vec::new(),
                iterations: 0,
                tour_cost: cost.clone(),
                h_cost: rat_zero(),
                lp_value: inst.lp_value().clone(),
                bound_value: cost.clone(),
                budget_total: rat_zero(),
                budget_min: rat_zero(),
                h_tilde_cost: rat_zero(),
                certified: vec![("tour structure".into(), "backbone spans all vertices".into())],
                tour,
                trace: Vec::new(),
            },
        ));
    }

    let outside = inst.outside_vertices(backbone);
    if inst.mode == Mode::General {
        let sum_2y: Rat = outside.iter().map(|&v| inst.two_y(v)).sum();
        if sum_2y.is_zero() {
            return zero_budget_run(inst, backbone, cfg);
        }
    }

    let mut alg = Algorithm::new(inst, backbone, cfg.clone())?;
    let mut phi_history = vec![alg.init.phi.clone()];
    let mut restarts = 0usize;
    let n_rat = Rat::from_integer(g.vertex_count().into());
    let restart_bound = rat_pow(
        &((&cfg.gamma + &cfg.epsilon) * &n_rat * &n_rat / &cfg.epsilon),
        cfg.p,
    );
    let mut trace: Vec<TraceRecord> = Vec::new();

    loop {
        match alg.execute(restarts, &mut trace)? {
            ExecOutcome::Restart(new_init) => {
                let gain = &new_init.phi - &alg.init.phi;
                if gain <= alg.budgets.min_pow_p {
                    return Err(Error::CertificationFailed(format!(
                        "restart {} potential gain {} not above min ℓ^p = {}",
                        restarts + 1,
                        format_rat(&gain),
                        format_rat(&alg.budgets.min_pow_p)
                    )));
                }
                restarts += 1;
                if Rat::from_integer(restarts.into()) > restart_bound {
                    return Err(Error::CertificationFailed(format!(
                        "restart count {} exceeds the certified bound",
                        restarts
                    )));
                }
                phi_history.push(new_init.phi.clone());
                alg.init = new_init;
            }
            ExecOutcome::Tour(run_state) => {
                return finish(inst, backbone, cfg, alg, run_state, restarts, phi_history, trace);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    inst: &StronglyLaminarInstance,
    backbone: &Backbone,
    cfg: &Config,
    alg: Algorithm<'_>,
    run_state: RunState,
    restarts: usize,
    phi_history: Vec<Rat>,
    trace: Vec<TraceRecord>,
) -> Result<(MultiEdgeSet, RunReport)> {
    let g = &inst.g;
    let mut certified: Vec<(String, String)> = Vec::new();

    let mut tour = backbone.edges.clone();
    tour.add_set(&run_state.h);
    let comps = connected_components(g, &tour, None).len();
    if comps != 1 || !is_eulerian(g, &tour)? {
        return Err(Error::CertificationFailed(format!(
            "output is not a tour: {} components",
            comps
        )));
    }
    certified.push((
        "tour structure".into(),
        "E(B) ⊎ H is connected, spanning and Eulerian".into(),
    ));

    let h_cost = run_state.h.cost(g);
    let h_tilde_cost = alg.init.h_tilde.cost(g);

    // Connector-circuit ledger: distinct payers, per-entry budget, total.
    let cert_mult = cfg.x_cert_multiplier();
    let x_total: Rat = run_state.x_ledger.iter().map(|e| e.cost.clone()).sum();
    let x_cap = &cert_mult * (&alg.budgets.total - &h_tilde_cost);
    if x_total > x_cap {
        return Err(Error::CertificationFailed(format!(
            "connector-circuit total {} exceeds ℓ(V∖V(B)) − c(H̃) = {}",
            format_rat(&x_total),
            format_rat(&x_cap)
        )));
    }
    certified.push((
        "connector-circuit budget".into(),
        format!("total {} ≤ {}", format_rat(&x_total), format_rat(&x_cap)),
    ));

    // Cover-part ledger: one contribution per positive index, each within
    // the certified coefficient times the component budget.
    let fcoef = cfg.f_edge_coefficient();
    let mut seen = BTreeSet::new();
    let mut f_total = rat_zero();
    for entry in &run_state.f_ledger {
        f_total += &entry.cost;
        if entry.index >= 1 {
            if !seen.insert(entry.index) {
                return Err(Error::CertificationFailed(format!(
                    "index {} contributed twice",
                    entry.index
                )));
            }
            let cap = &fcoef
                * alg
                    .budgets
                    .sum(alg.init.component_verts(entry.index).iter())?;
            if entry.cost > cap {
                return Err(Error::CertificationFailed(format!(
                    "cover part at index {} costs {} > {}",
                    entry.index,
                    format_rat(&entry.cost),
                    format_rat(&cap)
                )));
            }
        } else if entry.iteration != run_state.iteration {
            return Err(Error::CertificationFailed(
                "backbone-index cover part added before the final iteration".into(),
            ));
        }
    }
    certified.push((
        "cover-part ledger".into(),
        format!(
            "{} entries, one per positive index, total {}",
            run_state.f_ledger.len(),
            format_rat(&f_total)
        ),
    ));

    // Final cost bound.
    let mut bound_value = (&cert_mult + &fcoef) * &alg.budgets.total;
    if inst.mode == Mode::General {
        let outside_2y: Rat = alg.outside().iter().map(|&v| inst.two_y(v)).sum();
        bound_value += rat_int(2) * inst.lp_value() + outside_2y;
    }
    if h_cost > bound_value {
        return Err(Error::CertificationFailed(format!(
            "final cost {} exceeds the certified bound {}",
            format_rat(&h_cost),
            format_rat(&bound_value)
        )));
    }
    certified.push((
        "final cost bound".into(),
        format!("c(H) = {} ≤ {}", format_rat(&h_cost), format_rat(&bound_value)),
    ));

    if inst.mode == Mode::GraphTsp && !cfg.relaxed_step3_threshold {
        let guarantee = cfg.guarantee_coefficient() * inst.lp_value();
        if h_cost > guarantee {
            return Err(Error::CertificationFailed(format!(
                "graph-TSP guarantee violated: {} > {}",
                format_rat(&h_cost),
                format_rat(&guarantee)
            )));
        }
        certified.push((
            "graph-TSP guarantee".into(),
            format!(
                "c(H) = {} ≤ B·LP = {}",
                format_rat(&h_cost),
                format_rat(&guarantee)
            ),
        ));
    }

    let tour_cost = tour.cost(g);
    Ok((
        tour.clone(),
        RunReport {
            restarts,
            phi_history,
            x_ledger: run_state.x_ledger,
            f_ledger: run_state.f_ledger,
            iterations: run_state.iteration,
            tour_cost,
            h_cost,
            lp_value: inst.lp_value().clone(),
            bound_value,
            budget_total: alg.budgets.total.clone(),
            budget_min: alg.budgets.min.clone(),
            h_tilde_cost,
            certified,
            tour,
            trace: trace.clone(),
        },
    ))
}

/// Degenerate general-mode case `Σ_{v∉V(B)} 2y_v = 0`: every local edge in
/// `E[V∖V(B)]` is free, budgets are undefined, and the run short-circuits:
/// zero-cost local circuits merge components, then a single subtour cover
/// finishes the connection. The final bound `c(H) ≤ 2·LP` is certified.
fn zero_budget_run(
    inst: &StronglyLaminarInstance,
    backbone: &Backbone,
    _cfg: &Config,
) -> Result<(MultiEdgeSet, RunReport)> {
    let g = &inst.g;
    let outside = inst.outside_vertices(backbone);
    let free = |e: EdgeId| {
        is_local(inst, e)
            && g.cost(e).is_zero()
            && outside.contains(&g.edge(e).tail)
            && outside.contains(&g.edge(e).head)
    };
    let sp = shortest_paths(g, &free);
    let mut h = MultiEdgeSet::new();

    let free_sweep = |h: &mut MultiEdgeSet| -> Result<()> {
        loop {
            let mut base = backbone.edges.clone();
            base.add_set(h);
            let comps = connected_components(g, &base, None);
            if comps.len() == 1 {
                return Ok(());
            }
            let mut added = false;
            for (vs, _) in &comps {
                if let Some((c, cost)) = min_cost_crossing_circuit_with(g, &free, vs, &sp) {
                    if cost.is_zero() {
                        h.add_set(&c.to_edge_set());
                        added = true;
                        break;
                    }
                }
            }
            if !added {
                return Ok(());
            }
        }
    };

    free_sweep(&mut h)?;
    let mut base = backbone.edges.clone();
    base.add_set(&h);
    let mut iterations = 0usize;
    if connected_components(g, &base, None).len() > 1 {
        let cover = compute_subtour_cover(inst, backbone, &h)?;
        h.add_set(&cover.f);
        iterations = 1;
        free_sweep(&mut h)?;
    }

    let mut tour = backbone.edges.clone();
    tour.add_set(&h);
    let comps = connected_components(g, &tour, None).len();
    if comps != 1 || !is_eulerian(g, &tour)? {
        return Err(Error::CertificationFailed(format!(
            "zero-budget short-circuit left {} components; one cover was not enough",
            comps
        )));
    }
    let h_cost = h.cost(g);
    let bound_value = rat_int(2) * inst.lp_value();
    if h_cost > bound_value {
        return Err(Error::CertificationFailed(format!(
            "zero-budget run cost {} exceeds 2·LP = {}",
            format_rat(&h_cost),
            format_rat(&bound_value)
        )));
    }
    let tour_cost = tour.cost(g);
    Ok((
        tour.clone(),
        RunReport {
            restarts: 0,
            phi_history: Vec::new(),
            x_ledger: Vec::new(),
            f_ledger: Vec::new(),
            iterations,
            tour_cost,
            h_cost: h_cost.clone(),
            lp_value: inst.lp_value().clone(),
            bound_value,
            budget_total: rat_zero(),
            budget_min: rat_zero(),
            h_tilde_cost: rat_zero(),
            certified: vec![
                ("tour structure".into(), "zero-budget short-circuit".into()),
                (
                    "final cost bound".into(),
                    format!("c(H) = {} ≤ 2·LP", format_rat(&h_cost)),
                ),
            ],
            tour,
            trace: Vec::new(),
        },
    ))
}
