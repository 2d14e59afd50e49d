//! Random strongly connected unit-cost digraphs, deterministic per seed.

use atsp_core::error::{Error, Result};
use atsp_core::graph::MultiDigraph;
use atsp_core::ratio::Rat;
use num_traits::{Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A random Hamiltonian directed cycle plus every other ordered pair
/// independently with probability `extra_edge_prob` (an exact rational in
/// [0, 1]; the draw compares a uniform integer below the denominator to the
/// numerator, so the probability is honored exactly).
pub fn generate_unit_instance(
    n: usize,
    extra_edge_prob: &Rat,
    seed: u64,
) -> Result<MultiDigraph> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "instance generation needs n >= 2, got {}",
            n
        )));
    }
    if extra_edge_prob.is_negative() || *extra_edge_prob > Rat::from_integer(1.into()) {
        return Err(Error::InvalidInput(
            "extra edge probability must lie in [0, 1]".into(),
        ));
    }
    let numer = extra_edge_prob
        .numer()
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("probability numerator too large".into()))?;
    let denom = extra_edge_prob
        .denom()
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("probability denominator too large".into()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);

    let mut arcs: Vec<(usize, usize)> = Vec::new();
    let mut on_cycle = vec![vec![false; n]; n];
    for i in 0..n {
        let (t, h) = (perm[i], perm[(i + 1) % n]);
        arcs.push((t, h));
        on_cycle[t][h] = true;
    }
    for u in 0..n {
        for v in 0..n {
            if u == v || on_cycle[u][v] {
                continue;
            }
            if rng.gen_range(0..denom) < numer {
                arcs.push((u, v));
            }
        }
    }
    MultiDigraph::unit(n, &arcs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use atsp_core::graph::strongly_connected;
    use atsp_core::ratio::{rat, rat_int, rat_zero};

    #[test]
    fn prob_zero_gives_a_cycle() {
        let g = generate_unit_instance(3, &rat_zero(), 1).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(strongly_connected(&g, None).unwrap());
    }

    #[test]
    fn prob_one_gives_complete_bidirected() {
        let g = generate_unit_instance(5, &rat_int(1), 7).unwrap();
        assert_eq!(g.edge_count(), 5 * 4);
    }

    #[test]
    fn same_seed_same_edges() {
        let a = generate_unit_instance(9, &rat(3, 10), 42).unwrap();
        let b = generate_unit_instance(9, &rat(3, 10), 42).unwrap();
        let arcs = |g: &MultiDigraph| {
            g.edges()
                .iter()
                .map(|e| (e.tail, e.head))
                .collect::<Vec<_>>()
        };
        assert_eq!(arcs(&a), arcs(&b));
        let c = generate_unit_instance(9, &rat(3, 10), 43).unwrap();
        assert_ne!(arcs(&a), arcs(&c));
    }

    #[test]
    fn small_n_rejected() {
        assert!(generate_unit_instance(1, &rat_zero(), 1).is_err());
        assert!(generate_unit_instance(4, &rat(3, 2), 1).is_err());
    }
}
