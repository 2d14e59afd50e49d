//! Linear program solver: a floating-point simplex discovers a candidate
//! optimal basis, and an exact rational layer verifies it and finishes with
//! exact pivots when needed. Every solution this module returns has been
//! proven optimal in exact arithmetic; the float pass is only a speedup.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ratio::{approx_f64, rat_zero, Rat};

/// Equality-standard-form LP: `A x = b`, `x >= 0`, minimize `obj · x`.
/// Columns `0..nvars` are the original variables, the rest are surplus
/// columns added for `>=` rows. Artificial columns are implicit: column id
/// `cols.len() + r` is the identity column of row `r`.
pub(crate) struct StandardLp {
    pub nrows: usize,
    pub cols: Vec<Vec<(usize, Rat)>>,
    pub obj: Vec<Rat>,
    pub rhs: Vec<Rat>,
    pub nvars: usize,
}

pub(crate) struct ExactSolution {
    /// Values of the original variables only.
    pub x: Vec<Rat>,
    pub value: Rat,
}

impl StandardLp {
    fn structural(&self) -> usize {
        self.cols.len()
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.cols.len()
    }

    fn column(&self, col: usize) -> Vec<(usize, Rat)> {
        if col < self.cols.len() {
            self.cols[col].clone()
        } else {
            vec![(col - self.cols.len(), Rat::one())]
        }
    }
}

pub(crate) fn solve_exact(lp: &StandardLp) -> Result<ExactSolution> {
    if let Some(basis) = float_basis(lp) {
        if let Ok(sol) = exact_finish(lp, basis) {
            return Ok(sol);
        }
    }
    exact_from_scratch(lp)
}

// ---------------------------------------------------------------------------
// Floating-point warm start
// ---------------------------------------------------------------------------

const FLOAT_EPS: f64 = 1e-9;
const FLOAT_COST_EPS: f64 = 1e-7;

fn float_basis(lp: &StandardLp) -> Option<Vec<usize>> {
    let m = lp.nrows;
    let s = lp.structural();
    let total = s + m;
    let mut a = vec![vec![0f64; total]; m];
    for (j, col) in lp.cols.iter().enumerate() {
        for (r, v) in col {
            a[*r][j] = approx_f64(v);
        }
    }
    for r in 0..m {
        a[r][s + r] = 1.0;
    }
    let mut b: Vec<f64> = lp.rhs.iter().map(approx_f64).collect();
    let mut basis: Vec<usize> = (s..total).collect();

    // Phase 1: drive artificials to zero.
    let mut c1 = vec![0f64; total];
    for item in c1.iter_mut().skip(s) {
        *item = 1.0;
    }
    if !float_run(&mut a, &mut b, &mut basis, &c1, |_| true) {
        return None;
    }
    let art_sum: f64 = basis
        .iter()
        .zip(b.iter())
        .filter(|(col, _)| **col >= s)
        .map(|(_, v)| v.abs())
        .sum();
    if art_sum > 1e-6 {
        return None;
    }

    // Phase 2: real objective, artificials may not re-enter.
    let mut c2 = vec![0f64; total];
    for (j, v) in lp.obj.iter().enumerate() {
        c2[j] = approx_f64(v);
    }
    if !float_run(&mut a, &mut b, &mut basis, &c2, |j| j < s) {
        return None;
    }
    Some(basis)
}

fn float_run(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    basis: &mut [usize],
    c: &[f64],
    allow: impl Fn(usize) -> bool,
) -> bool {
    let m = a.len();
    if m == 0 {
        return true;
    }
    let total = a[0].len();
    let mut in_basis = vec![false; total];
    for &col in basis.iter() {
        in_basis[col] = true;
    }
    let mut z: Vec<f64> = (0..total)
        .map(|j| c[j] - (0..m).map(|r| c[basis[r]] * a[r][j]).sum::<f64>())
        .collect();
    let mut obj: f64 = (0..m).map(|r| c[basis[r]] * b[r]).sum();
    let mut stall = 0usize;
    let cap = 60 * (m + total) + 2000;
    for _ in 0..cap {
        let bland = stall > 100;
        let mut enter: Option<usize> = None;
        let mut best = -FLOAT_COST_EPS;
        for (j, &zj) in z.iter().enumerate() {
            if !allow(j) || in_basis[j] {
                continue;
            }
            if zj < best {
                enter = Some(j);
                if bland {
                    break;
                }
                best = zj;
            }
        }
        let j = match enter {
            Some(j) => j,
            None => return true,
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..m {
            if a[r][j] > FLOAT_EPS {
                let ratio = b[r] / a[r][j];
                if ratio < best_ratio - FLOAT_EPS
                    || (ratio < best_ratio + FLOAT_EPS
                        && leave.map_or(true, |lr| a[r][j] > a[lr][j]))
                {
                    best_ratio = ratio;
                    leave = Some(r);
                }
            }
        }
        let r = match leave {
            Some(r) => r,
            None => return false, // unbounded: give up on the float pass
        };
        let piv = a[r][j];
        for v in a[r].iter_mut() {
            *v /= piv;
        }
        b[r] /= piv;
        for rr in 0..m {
            if rr != r && a[rr][j].abs() > 1e-12 {
                let f = a[rr][j];
                for jj in 0..total {
                    a[rr][jj] -= f * a[r][jj];
                }
                b[rr] -= f * b[r];
            }
        }
        let zf = z[j];
        if zf.abs() > 1e-12 {
            for jj in 0..total {
                z[jj] -= zf * a[r][jj];
            }
        }
        in_basis[basis[r]] = false;
        in_basis[j] = true;
        basis[r] = j;
        let new_obj: f64 = (0..m).map(|rr| c[basis[rr]] * b[rr]).sum();
        if new_obj < obj - 1e-9 {
            stall = 0;
        } else {
            stall += 1;
        }
        obj = new_obj;
    }
    false
}

// ---------------------------------------------------------------------------
// Exact layer
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    One,
    Two,
}

fn exact_finish(lp: &StandardLp, mut basis: Vec<usize>) -> Result<ExactSolution> {
    let x_b = exact_loop(lp, &mut basis, Phase::Two)?;
    Ok(assemble(lp, &basis, &x_b))
}

fn exact_from_scratch(lp: &StandardLp) -> Result<ExactSolution> {
    let s = lp.structural();
    let mut basis: Vec<usize> = (s..s + lp.nrows).collect();
    let x_b = exact_loop(lp, &mut basis, Phase::One)?;
    let art_sum: Rat = basis
        .iter()
        .zip(x_b.iter())
        .filter(|(col, _)| lp.is_artificial(**col))
        .map(|(_, v)| v.clone())
        .sum();
    if !art_sum.is_zero() {
        return Err(Error::InvalidInput(
            "linear program is infeasible".to_string(),
        ));
    }
    let x_b = exact_loop(lp, &mut basis, Phase::Two)?;
    Ok(assemble(lp, &basis, &x_b))
}

fn phase_cost(lp: &StandardLp, phase: Phase, col: usize) -> Rat {
    match phase {
        Phase::One => {
            if lp.is_artificial(col) {
                Rat::one()
            } else {
                rat_zero()
            }
        }
        Phase::Two => {
            if lp.is_artificial(col) {
                rat_zero()
            } else {
                lp.obj[col].clone()
            }
        }
    }
}

/// Primal simplex with exact arithmetic, refactorizing every iteration.
/// Entering rule is most-negative reduced cost for a while, then Bland's
/// rule, which guarantees termination. Returns the final basic values.
fn exact_loop(lp: &StandardLp, basis: &mut Vec<usize>, phase: Phase) -> Result<Vec<Rat>> {
    let s = lp.structural();
    let cap = 20_000usize;
    for iteration in 0..cap {
        let bland = iteration > 60;
        let bcols: Vec<Vec<(usize, Rat)>> = basis.iter().map(|&c| lp.column(c)).collect();
        let x_b = solve_columns(lp.nrows, &bcols, &lp.rhs)
            .ok_or_else(|| Error::InvalidInput("singular basis".to_string()))?;
        if x_b.iter().any(|v| v.is_negative()) {
            return Err(Error::InvalidInput("basis not primal feasible".to_string()));
        }
        if phase == Phase::Two {
            // Artificials may linger in the basis (redundant rows) but must
            // carry value zero.
            for (p, &col) in basis.iter().enumerate() {
                if lp.is_artificial(col) && !x_b[p].is_zero() {
                    return Err(Error::InvalidInput(
                        "artificial variable stuck at nonzero value".to_string(),
                    ));
                }
            }
        }

        let c_b: Vec<Rat> = basis.iter().map(|&c| phase_cost(lp, phase, c)).collect();
        let y = solve_transposed(lp.nrows, &bcols, &c_b)
            .ok_or_else(|| Error::InvalidInput("singular basis (dual)".to_string()))?;

        let in_basis: std::collections::BTreeSet<usize> = basis.iter().copied().collect();
        let mut entering: Option<(Rat, usize)> = None;
        for j in 0..s {
            if in_basis.contains(&j) {
                continue;
            }
            let mut red = phase_cost(lp, phase, j);
            for (r, aval) in &lp.cols[j] {
                red -= &y[*r] * aval;
            }
            if red.is_negative() {
                match &entering {
                    _ if bland => {
                        entering = Some((red, j));
                        break;
                    }
                    None => entering = Some((red, j)),
                    Some((best, _)) if red < *best => entering = Some((red, j)),
                    _ => {}
                }
            }
        }
        let j = match entering {
            Some((_, j)) => j,
            None => return Ok(x_b),
        };

        let a_j: Vec<Rat> = {
            let mut dense = vec![rat_zero(); lp.nrows];
            for (r, v) in &lp.cols[j] {
                dense[*r] = v.clone();
            }
            dense
        };
        let d = solve_columns(lp.nrows, &bcols, &a_j)
            .ok_or_else(|| Error::InvalidInput("singular basis (direction)".to_string()))?;

        // In phase 2, any basic artificial whose direction component is
        // nonzero is pivoted out immediately at step length zero; its value
        // is zero, so feasibility is preserved and it can never grow.
        let mut leave: Option<usize> = None;
        if phase == Phase::Two {
            for (p, &col) in basis.iter().enumerate() {
                if lp.is_artificial(col) && !d[p].is_zero() {
                    leave = Some(p);
                    break;
                }
            }
        }
        if leave.is_none() {
            let mut best: Option<(Rat, usize)> = None;
            for (p, dp) in d.iter().enumerate() {
                if dp.is_positive() {
                    let ratio = &x_b[p] / dp;
                    let better = match &best {
                        None => true,
                        Some((r, bp)) => {
                            ratio < *r || (ratio == *r && basis[p] < basis[*bp])
                        }
                    };
                    if better {
                        best = Some((ratio, p));
                    }
                }
            }
            leave = best.map(|(_, p)| p);
        }
        let p = leave.ok_or_else(|| {
            Error::InvalidInput("linear program unbounded below".to_string())
        })?;
        basis[p] = j;
    }
    Err(Error::InvalidInput(
        "exact simplex iteration cap exceeded".to_string(),
    ))
}

fn assemble(lp: &StandardLp, basis: &[usize], x_b: &[Rat]) -> ExactSolution {
    let mut x = vec![rat_zero(); lp.structural()];
    for (p, &col) in basis.iter().enumerate() {
        if col < lp.structural() {
            x[col] = x_b[p].clone();
        }
    }
    let value: Rat = lp
        .obj
        .iter()
        .zip(x.iter())
        .map(|(c, v)| c * v)
        .sum();
    x.truncate(lp.nvars);
    ExactSolution { x, value }
}

// ---------------------------------------------------------------------------
// Sparse exact linear solves
// ---------------------------------------------------------------------------

/// Solves `B x = rhs` where `B` is given by columns. Returns the solution
/// indexed by column position, or `None` if singular.
fn solve_columns(m: usize, bcols: &[Vec<(usize, Rat)>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    gaussian_solve(m, bcols, rhs)
}

/// Solves `Bᵀ y = c` by eliminating on the transposed matrix.
fn solve_transposed(m: usize, bcols: &[Vec<(usize, Rat)>], c: &[Rat]) -> Option<Vec<Rat>> {
    let mut tcols: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); m];
    for (p, col) in bcols.iter().enumerate() {
        for (r, v) in col {
            tcols[*r].push((p, v.clone()));
        }
    }
    gaussian_solve(m, &tcols, c)
}

fn gaussian_solve(m: usize, cols: &[Vec<(usize, Rat)>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    debug_assert_eq!(cols.len(), m);
    debug_assert_eq!(rhs.len(), m);
    let mut rows: Vec<BTreeMap<usize, Rat>> = vec![BTreeMap::new(); m];
    for (cpos, col) in cols.iter().enumerate() {
        for (r, v) in col {
            if !v.is_zero() {
                rows[*r].insert(cpos, v.clone());
            }
        }
    }
    let mut b: Vec<Rat> = rhs.to_vec();
    let mut row_used = vec![false; m];
    let mut pivots: Vec<(usize, usize)> = Vec::with_capacity(m); // (row, colpos)

    for cpos in 0..m {
        let pivot_row = (0..m)
            .filter(|&r| !row_used[r] && rows[r].get(&cpos).is_some_and(|v| !v.is_zero()))
            .min_by_key(|&r| (rows[r].len(), r))?;
        row_used[pivot_row] = true;
        pivots.push((pivot_row, cpos));
        let piv_row_snapshot: Vec<(usize, Rat)> =
            rows[pivot_row].iter().map(|(c, v)| (*c, v.clone())).collect();
        let piv_val = rows[pivot_row].get(&cpos).unwrap().clone();
        let piv_b = b[pivot_row].clone();
        for r in 0..m {
            if row_used[r] {
                continue;
            }
            let factor = match rows[r].get(&cpos) {
                Some(v) if !v.is_zero() => v / &piv_val,
                _ => continue,
            };
            for (c, v) in &piv_row_snapshot {
                let entry = rows[r].entry(*c).or_insert_with(rat_zero);
                *entry -= &factor * v;
                if entry.is_zero() {
                    rows[r].remove(c);
                }
            }
            b[r] -= &factor * &piv_b;
        }
    }

    let mut x = vec![rat_zero(); m];
    for &(r, cpos) in pivots.iter().rev() {
        let mut val = b[r].clone();
        for (c, v) in &rows[r] {
            if *c != cpos {
                val -= v * &x[*c];
            }
        }
        x[cpos] = val / rows[r].get(&cpos).unwrap();
    }
    Some(x)
}
