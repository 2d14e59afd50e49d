//! Exact-rational max flow (Dinic) used by the cut separation oracle.

use num_traits::Zero;

use crate::ratio::{rat_zero, Rat};

pub struct FlowNetwork {
    n: usize,
    to: Vec<usize>,
    cap: Vec<Rat>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            n,
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: Rat) {
        let id = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.adj[from].push(id);
        self.to.push(from);
        self.cap.push(rat_zero());
        self.adj[to].push(id + 1);
    }

    /// Runs Dinic to completion; the network afterwards holds the residual.
    pub fn max_flow(&mut self, s: usize, t: usize) -> Rat {
        let mut total = rat_zero();
        loop {
            let level = match self.bfs_levels(s, t) {
                Some(l) => l,
                None => return total,
            };
            let mut iter = vec![0usize; self.n];
            loop {
                let pushed = self.dfs(s, t, None, &level, &mut iter);
                if pushed.is_zero() {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn bfs_levels(&self, s: usize, t: usize) -> Option<Vec<i32>> {
        let mut level = vec![-1; self.n];
        let mut queue = std::collections::VecDeque::new();
        level[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &a in &self.adj[v] {
                let w = self.to[a];
                if level[w] < 0 && !self.cap[a].is_zero() {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if level[t] >= 0 {
            Some(level)
        } else {
            None
        }
    }

    fn dfs(
        &mut self,
        v: usize,
        t: usize,
        limit: Option<Rat>,
        level: &[i32],
        iter: &mut [usize],
    ) -> Rat {
        if v == t {
            return limit.expect("limit set below the source");
        }
        while iter[v] < self.adj[v].len() {
            let a = self.adj[v][iter[v]];
            let w = self.to[a];
            if level[w] == level[v] + 1 && !self.cap[a].is_zero() {
                let next_limit = match &limit {
                    None => self.cap[a].clone(),
                    Some(l) => l.clone().min(self.cap[a].clone()),
                };
                let pushed = self.dfs(w, t, Some(next_limit), level, iter);
                if !pushed.is_zero() {
                    self.cap[a] -= &pushed;
                    self.cap[a ^ 1] += &pushed;
                    return pushed;
                }
            }
            iter[v] += 1;
        }
        rat_zero()
    }

    /// Residual-reachable set from `s`; after `max_flow` this is the source
    /// side of a minimum cut.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for &a in &self.adj[v] {
                let w = self.to[a];
                if !seen[w] && !self.cap[a].is_zero() {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}
