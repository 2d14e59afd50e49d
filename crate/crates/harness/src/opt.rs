//! Exact minimum tour cost by subset dynamic programming.
//!
//! A tour is a connected Eulerian multi-edge set, equivalently a closed
//! walk visiting all vertices, so the optimum equals the cheapest
//! Hamiltonian cycle of the all-pairs shortest-path closure. The DP runs on
//! integers when every distance is integral (the unit-cost case), and on
//! exact rationals otherwise.

use atsp_core::error::{Error, Result};
use atsp_core::graph::{shortest_paths, strongly_connected, MultiDigraph};
use atsp_core::ratio::{rat_zero, Rat};
use num_traits::{One, ToPrimitive};

/// Hard size limit: the DP is Θ(2ⁿ·n²).
pub const OPT_MAX_VERTICES: usize = 15;

pub fn exact_opt(g: &MultiDigraph) -> Result<Rat> {
    let n = g.vertex_count();
    if n > OPT_MAX_VERTICES {
        return Err(Error::InvalidInput(format!(
            "exact optimum limited to {} vertices, got {}",
            OPT_MAX_VERTICES, n
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty graph".into()));
    }
    if !strongly_connected(g, None)? {
        return Err(Error::InvalidInput(
            "exact optimum requires a strongly connected digraph".into(),
        ));
    }
    if n == 1 {
        return Ok(rat_zero());
    }

    let sp = shortest_paths(g, &|_| true);
    let dist =
        |u: usize, v: usize| -> Rat { sp.dist(u, v).expect("strongly connected").clone() };

    let integral = (0..n)
        .all(|u| (0..n).all(|v| u == v || sp.dist(u, v).unwrap().denom().is_one()));
    if integral {
        let d: Vec<Vec<i128>> = (0..n)
            .map(|u| {
                (0..n)
                    .map(|v| {
                        if u == v {
                            0
                        } else {
                            sp.dist(u, v).unwrap().numer().to_i128().expect("small")
                        }
                    })
                    .collect()
            })
            .collect();
        return Ok(Rat::from_integer(held_karp_int(n, &d).into()));
    }
    Ok(held_karp_rat(n, &dist))
}

/// Minimum Hamiltonian cycle cost on the metric closure, integer costs.
fn held_karp_int(n: usize, d: &[Vec<i128>]) -> i128 {
    // dp[mask][v]: cheapest path from 0 through exactly {0} ∪ mask ending
    // at v, where mask ranges over subsets of {1..n-1}
    let full = 1usize << (n - 1);
    const INF: i128 = i128::MAX / 4;
    let mut dp = vec![vec![INF; n - 1]; full];
    for v in 1..n {
        dp[1 << (v - 1)][v - 1] = d[0][v];
    }
    for mask in 1..full {
        for last in 0..n - 1 {
            let cur = dp[mask][last];
            if cur >= INF || mask & (1 << last) == 0 {
                continue;
            }
            for next in 0..n - 1 {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nmask = mask | (1 << next);
                let cand = cur + d[last + 1][next + 1];
                if cand < dp[nmask][next] {
                    dp[nmask][next] = cand;
                }
            }
        }
    }
    (0..n - 1)
        .map(|last| dp[full - 1][last] + d[last + 1][0])
        .min()
        .expect("n >= 2")
}

fn held_karp_rat(n: usize, d: &dyn Fn(usize, usize) -> Rat) -> Rat {
    let full = 1usize << (n - 1);
    let mut dp: Vec<Vec<Option<Rat>>> = vec![vec![None; n - 1]; full];
    for v in 1..n {
        dp[1 << (v - 1)][v - 1] = Some(d(0, v));
    }
    for mask in 1..full {
        for last in 0..n - 1 {
            let cur = match &dp[mask][last] {
                Some(c) if mask & (1 << last) != 0 => c.clone(),
                _ => continue,
            };
            for next in 0..n - 1 {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nmask = mask | (1 << next);
                let cand = &cur + d(last + 1, next + 1);
                let better = match &dp[nmask][next] {
                    None => true,
                    Some(old) => cand < *old,
                };
                if better {
                    dp[nmask][next] = Some(cand);
                }
            }
        }
    }
    (0..n - 1)
        .filter_map(|last| dp[full - 1][last].as_ref().map(|c| c + d(last + 1, 0)))
        .min()
        .expect("n >= 2")
}
