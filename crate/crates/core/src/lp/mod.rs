//! The cut relaxation of ATSP, solved exactly by cutting planes.
//!
//! `min Σ c(e)·x_e` subject to `x(δ(U)) ≥ 2` for every proper nonempty `U`,
//! flow balance at every vertex, and `x ≥ 0`. The loop starts from balance
//! plus all singleton cuts and adds most-violated cuts found by an exact
//! max-flow separation oracle until none exists. All arithmetic is
//! rational, so the returned value and the feasibility certificate are
//! exact.

pub mod maxflow;
mod simplex;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{strongly_connected, MultiDigraph, VertexId};
use crate::ratio::{format_rat, rat_int, rat_zero, Rat};
use crate::report::Report;

use maxflow::FlowNetwork;
use simplex::StandardLp;

/// A feasible (and, from [`solve_atsp_lp`], optimal) point of the cut
/// relaxation: one value per edge id plus the objective value.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<Rat>,
    pub value: Rat,
}

/// Solves the relaxation exactly. Errors if the digraph is not strongly
/// connected (no tour exists, and singleton cuts would be unsatisfiable
/// within the support of any circulation).
pub fn solve_atsp_lp(g: &MultiDigraph) -> Result<LpSolution> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::InvalidInput("empty graph".into()));
    }
    if !strongly_connected(g, None)? {
        return Err(Error::InvalidInput(
            "LP relaxation requires a strongly connected digraph".into(),
        ));
    }
    if n == 1 {
        return Ok(LpSolution {
            x: vec![rat_zero(); g.edge_count()],
            value: rat_zero(),
        });
    }

    let mut cut_sets: Vec<BTreeSet<VertexId>> =
        (0..n).map(|v| BTreeSet::from([v])).collect();
    let mut seen: BTreeSet<BTreeSet<VertexId>> = cut_sets.iter().cloned().collect();

    loop {
        let lp = build_standard(g, &cut_sets);
        let sol = simplex::solve_exact(&lp)?;
        match separate_cut(g, &sol.x)? {
            None => {
                return Ok(LpSolution {
                    x: sol.x,
                    value: sol.value,
                })
            }
            Some((u, _)) => {
                // The solution satisfies every present constraint, so a
                // violated cut is necessarily new; anything else is a bug.
                if !seen.insert(u.clone()) {
                    return Err(Error::CertificationFailed(format!(
                        "separation returned an already-present cut {:?}",
                        u
                    )));
                }
                cut_sets.push(u);
            }
        }
    }
}

fn build_standard(g: &MultiDigraph, cut_sets: &[BTreeSet<VertexId>]) -> StandardLp {
    let n = g.vertex_count();
    let m = g.edge_count();
    let nrows = n + cut_sets.len();
    let mut cols: Vec<Vec<(usize, Rat)>> = Vec::with_capacity(m + cut_sets.len());
    for e in 0..m {
        let edge = g.edge(e);
        let mut col: BTreeMap<usize, Rat> = BTreeMap::new();
        // balance rows: +1 leaving the tail, -1 entering the head
        *col.entry(edge.tail).or_insert_with(rat_zero) += rat_int(1);
        *col.entry(edge.head).or_insert_with(rat_zero) -= rat_int(1);
        for (k, u) in cut_sets.iter().enumerate() {
            if u.contains(&edge.tail) != u.contains(&edge.head) {
                *col.entry(n + k).or_insert_with(rat_zero) += rat_int(1);
            }
        }
        cols.push(col.into_iter().filter(|(_, v)| !v.is_zero()).collect());
    }
    let mut obj: Vec<Rat> = (0..m).map(|e| g.cost(e).clone()).collect();
    // surplus columns for the >= cut rows
    for k in 0..cut_sets.len() {
        cols.push(vec![(n + k, rat_int(-1))]);
        obj.push(rat_zero());
    }
    let mut rhs = vec![rat_zero(); n];
    rhs.extend((0..cut_sets.len()).map(|_| rat_int(2)));
    StandardLp {
        nrows,
        cols,
        obj,
        rhs,
        nvars: m,
    }
}

/// Returns a most-violated cut `U` (one minimizing `x(δ(U))`) when some cut
/// has `x(δ(U)) < 2`, or `None` when `x` satisfies all cut constraints.
///
/// Requires flow balance: under balance `x(δ(U)) = 2·x(δ⁺(U))`, so the
/// minimum cut value is found by max-flows from a fixed root to every other
/// vertex and back.
pub fn separate_cut(
    g: &MultiDigraph,
    x: &[Rat],
) -> Result<Option<(BTreeSet<VertexId>, Rat)>> {
    let n = g.vertex_count();
    if x.len() != g.edge_count() {
        return Err(Error::InvalidInput(
            "solution vector length does not match edge count".into(),
        ));
    }
    for v in 0..n {
        let out: Rat = g.out_edges(v).iter().map(|&e| x[e].clone()).sum();
        let inn: Rat = g.in_edges(v).iter().map(|&e| x[e].clone()).sum();
        if out != inn {
            return Err(Error::ContractViolation(format!(
                "flow balance violated at vertex {}: out {} vs in {}",
                v,
                format_rat(&out),
                format_rat(&inn)
            )));
        }
    }
    if n < 2 {
        return Ok(None);
    }

    let support: Vec<(usize, usize, Rat)> = (0..g.edge_count())
        .filter(|&e| x[e].is_positive())
        .map(|e| (g.edge(e).tail, g.edge(e).head, x[e].clone()))
        .collect();
    let root = 0;
    let mut best: Option<(Rat, BTreeSet<VertexId>)> = None;
    for v in 1..n {
        for (s, t) in [(root, v), (v, root)] {
            let mut net = FlowNetwork::new(n);
            for (a, b, cap) in &support {
                net.add_arc(*a, *b, cap.clone());
            }
            let flow = net.max_flow(s, t);
            let better = match &best {
                None => true,
                Some((bf, _)) => flow < *bf,
            };
            if better {
                let side = net.source_side(s);
                let u: BTreeSet<VertexId> = (0..n).filter(|&w| side[w]).collect();
                best = Some((flow, u));
            }
        }
    }
    let (flow, u) = best.expect("n >= 2 yields at least one cut");
    let crossing = Rat::from_integer(2.into()) * &flow;
    if crossing < rat_int(2) {
        Ok(Some((u, crossing)))
    } else {
        Ok(None)
    }
}

/// Checks balance, nonnegativity, the declared objective value, and all cut
/// constraints; the report lists each with a witness on failure.
pub fn certify_feasible(g: &MultiDigraph, sol: &LpSolution) -> Report {
    let mut report = Report::new();
    let n = g.vertex_count();

    if sol.x.len() != g.edge_count() {
        report.fail(
            "dimension",
            format!("{} values for {} edges", sol.x.len(), g.edge_count()),
        );
        return report;
    }
    report.pass("dimension", "");

    match sol.x.iter().position(|v| v.is_negative()) {
        Some(e) => report.fail(
            "nonnegativity",
            format!("x[{}] = {}", e, format_rat(&sol.x[e])),
        ),
        None => report.pass("nonnegativity", ""),
    }

    let mut balanced = true;
    for v in 0..n {
        let out: Rat = g.out_edges(v).iter().map(|&e| sol.x[e].clone()).sum();
        let inn: Rat = g.in_edges(v).iter().map(|&e| sol.x[e].clone()).sum();
        if out != inn {
            report.fail(
                "flow balance",
                format!(
                    "vertex {}: out {} vs in {}",
                    v,
                    format_rat(&out),
                    format_rat(&inn)
                ),
            );
            balanced = false;
            break;
        }
    }
    if balanced {
        report.pass("flow balance", "");
    }

    let value: Rat = (0..g.edge_count()).map(|e| g.cost(e) * &sol.x[e]).sum();
    report.check(
        "objective value",
        value == sol.value,
        format!(
            "recomputed {} vs declared {}",
            format_rat(&value),
            format_rat(&sol.value)
        ),
    );

    if balanced && n >= 2 {
        match separate_cut(g, &sol.x) {
            Ok(None) => report.pass("cut constraints", "minimum cut value >= 2"),
            Ok(Some((u, val))) => report.fail(
                "cut constraints",
                format!("x(δ({:?})) = {} < 2", u, format_rat(&val)),
            ),
            Err(e) => report.fail("cut constraints", e.to_string()),
        }
    } else if n < 2 {
        report.pass("cut constraints", "no proper nonempty cuts");
    } else {
        report.fail("cut constraints", "skipped: flow balance does not hold");
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MultiDigraph;
    use crate::ratio::{rat, rat_int, rat_zero};

    fn unit(n: usize, arcs: &[(usize, usize)]) -> MultiDigraph {
        MultiDigraph::unit(n, arcs).unwrap()
    }

    #[test]
    fn three_cycle_value_three() {
        let g = unit(3, &[(0, 1), (1, 2), (2, 0)]);
        let sol = solve_atsp_lp(&g).unwrap();
        assert_eq!(sol.value, rat_int(3));
        assert!(sol.x.iter().all(|v| *v == rat_int(1)));
        assert!(certify_feasible(&g, &sol).all_passed());
    }

    #[test]
    fn two_cycle_value_two() {
        let g = unit(2, &[(0, 1), (1, 0)]);
        let sol = solve_atsp_lp(&g).unwrap();
        assert_eq!(sol.value, rat_int(2));
    }

    #[test]
    fn complete_bidirected_k4_value_four() {
        let mut arcs = Vec::new();
        for u in 0..4 {
            for v in 0..4 {
                if u != v {
                    arcs.push((u, v));
                }
            }
        }
        let g = unit(4, &arcs);
        let sol = solve_atsp_lp(&g).unwrap();
        assert_eq!(sol.value, rat_int(4));
        // independent check: summing x(δ⁺(v)) >= 1 over vertices shows any
        // feasible point has value >= n, and a Hamiltonian circulation
        // attains it
        for v in 0..4 {
            let out: Rat = g.out_edges(v).iter().map(|&e| sol.x[e].clone()).sum();
            assert!(out >= rat_int(1));
        }
        // exhaustive cut check at n = 4
        for mask in 1u32..(1 << 4) - 1 {
            let u: BTreeSet<usize> = (0..4).filter(|&v| mask & (1 << v) != 0).collect();
            let cross: Rat = (0..g.edge_count())
                .filter(|&e| u.contains(&g.edge(e).tail) != u.contains(&g.edge(e).head))
                .map(|e| sol.x[e].clone())
                .sum();
            assert!(cross >= rat_int(2));
        }
    }

    #[test]
    fn not_strongly_connected_rejected() {
        let g = unit(2, &[(0, 1)]);
        assert!(solve_atsp_lp(&g).is_err());
    }

    #[test]
    fn separation_examples() {
        // Hamiltonian cycle incidence: no violated cut
        let g = unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let x = vec![rat_int(1); 4];
        assert!(separate_cut(&g, &x).unwrap().is_none());

        // two vertex-disjoint 2-cycles: x(δ(U)) = 0 for one cycle's vertices
        let g = unit(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let x = vec![rat_int(1); 4];
        let (u, val) = separate_cut(&g, &x).unwrap().unwrap();
        assert_eq!(val, rat_int(0));
        assert!(u == BTreeSet::from([0, 1]) || u == BTreeSet::from([2, 3]));

        // unbalanced x rejected
        let x = vec![rat_int(1), rat_int(0), rat_int(1), rat_int(1)];
        assert!(separate_cut(&g, &x).is_err());
    }

    #[test]
    fn separation_fractional_cut() {
        // two disjoint 2-cycles joined by a bidirected bridge; scale one
        // cycle and the bridge so the cut between them has value 3/2
        let g = unit(
            6,
            &[
                (0, 1),
                (1, 0), // cycle A
                (2, 3),
                (3, 2), // cycle B
                (1, 2),
                (2, 1), // bridge
                (4, 5),
                (5, 4), // unused cycle C edges (x = 0 on these)
            ],
        );
        let x = vec![
            rat_int(1),
            rat_int(1),
            rat_int(1),
            rat_int(1),
            rat(3, 4),
            rat(3, 4),
            rat_int(1),
            rat_int(1),
        ];
        let (u, val) = separate_cut(&g, &x).unwrap().unwrap();
        // most-violated cut isolates {4,5} entirely (value 0)
        assert_eq!(val, rat_int(0));
        assert!(u == BTreeSet::from([4, 5]) || u == BTreeSet::from([0, 1, 2, 3]));

        // without the x = 0 cycle, the 3/2 bridge cut is the winner
        let g = unit(4, &[(0, 1), (1, 0), (2, 3), (3, 2), (1, 2), (2, 1)]);
        let x = vec![
            rat_int(1),
            rat_int(1),
            rat_int(1),
            rat_int(1),
            rat(3, 4),
            rat(3, 4),
        ];
        let (u, val) = separate_cut(&g, &x).unwrap().unwrap();
        assert_eq!(val, rat(3, 2));
        assert!(u == BTreeSet::from([0, 1]) || u == BTreeSet::from([2, 3]));
        // exhaustive verification over all proper nonempty subsets
        let mut best = None::<Rat>;
        for mask in 1u32..(1 << 4) - 1 {
            let s: BTreeSet<usize> = (0..4).filter(|&v| mask & (1 << v) != 0).collect();
            let cross: Rat = (0..g.edge_count())
                .filter(|&e| s.contains(&g.edge(e).tail) != s.contains(&g.edge(e).head))
                .map(|e| x[e].clone())
                .sum();
            best = Some(match best {
                None => cross,
                Some(b) => b.min(cross),
            });
        }
        assert_eq!(best.unwrap(), rat(3, 2));
    }

    #[test]
    fn certify_rejects_zero_vector() {
        let g = unit(3, &[(0, 1), (1, 2), (2, 0)]);
        let sol = LpSolution {
            x: vec![rat_zero(); 3],
            value: rat_zero(),
        };
        let report = certify_feasible(&g, &sol);
        assert!(!report.all_passed());
        assert!(report
            .items
            .iter()
            .any(|i| i.name == "cut constraints" && !i.pass));
    }

    #[test]
    fn certify_accepts_integral_tour() {
        let g = unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 0)]);
        let sol = LpSolution {
            x: vec![rat_int(1), rat_int(1), rat_int(1), rat_int(1), rat_zero()],
            value: rat_int(4),
        };
        assert!(certify_feasible(&g, &sol).all_passed());
    }

    #[test]
    fn value_invariant_under_edge_permutation() {
        let arcs = [(0, 1), (1, 2), (2, 0), (0, 2), (2, 1), (1, 0)];
        let g1 = unit(3, &arcs);
        let mut permuted = arcs;
        permuted.reverse();
        let g2 = unit(3, &permuted);
        let v1 = solve_atsp_lp(&g1).unwrap().value;
        let v2 = solve_atsp_lp(&g2).unwrap().value;
        assert_eq!(v1, v2);
    }


}
