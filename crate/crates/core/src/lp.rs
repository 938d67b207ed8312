//! Exact two-phase simplex and a branch-and-bound search for the integer
//! program  min Σ|xⱼ|  subject to  A x = b,  x ∈ ℤⁿ.

use std::cmp::Ordering;

use num_traits::ToPrimitive;

use crate::rational::Q;

/// Equality system over integer variables, stored by rows.
#[derive(Clone, Debug, Default)]
pub struct IntProgram {
    pub num_vars: usize,
    pub rows: Vec<Vec<(usize, i64)>>,
    pub rhs: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IlpOutcome {
    Optimal { x: Vec<i64>, value: i64, nodes: usize },
    Infeasible { nodes: usize },
    NodeLimit { incumbent: Option<Vec<i64>>, nodes: usize },
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal { value: Q, y: Vec<Q> },
    Infeasible,
    Unbounded,
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

struct Tableau {
    a: Vec<Vec<Q>>,
    b: Vec<Q>,
    basis: Vec<usize>,
    /// Reduced costs.
    d: Vec<Q>,
    /// Current objective value.
    z: Q,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        if p != Q::ONE {
            for x in self.a[r].iter_mut().filter(|x| !x.is_zero()) {
                *x = x.div(&p);
            }
            self.b[r] = self.b[r].div(&p);
        }
        let nz: Vec<usize> = (0..self.cols).filter(|&j| !self.a[r][j].is_zero()).collect();
        let (row_r, b_r) = (self.a[r].clone(), self.b[r].clone());
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for &j in &nz {
                self.a[i][j] = self.a[i][j].sub(&f.mul(&row_r[j]));
            }
            self.b[i] = self.b[i].sub(&f.mul(&b_r));
        }
        if !self.d[c].is_zero() {
            let f = self.d[c].clone();
            for &j in &nz {
                self.d[j] = self.d[j].sub(&f.mul(&row_r[j]));
            }
            self.z = self.z.add(&f.mul(&b_r));
        }
        self.basis[r] = c;
    }

    /// Minimize; returns false if unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        let mut streak = 0;
        loop {
            let bland = streak > DEGENERATE_STREAK;
            let mut enter: Option<usize> = None;
            for j in 0..allowed {
                if self.d[j].is_negative() {
                    match enter {
                        None => enter = Some(j),
                        Some(e) if !bland && self.d[j] < self.d[e] => enter = Some(j),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some(c) = enter else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][c].is_positive() {
                    continue;
                }
                let ratio = self.b[i].div(&self.a[i][c]);
                let better = match &leave {
                    None => true,
                    Some((l, best)) => match ratio.cmp(best) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[i] < self.basis[*l],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else { return false };
            streak = if ratio.is_zero() { streak + 1 } else { 0 };
            self.pivot(r, c);
        }
    }
}

/// Minimize cᵀy subject to A y = b, y ≥ 0, exactly. `rows` are sparse over
/// `n` structural columns.
pub fn solve_lp(n: usize, rows: &[Vec<(usize, i64)>], rhs: &[i64], cost: &[i64]) -> LpOutcome {
    let m = rows.len();
    let cols = n + m;
    let mut a = vec![vec![Q::ZERO; cols]; m];
    let mut b = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        let flip = if rhs[i] < 0 { -1 } else { 1 };
        for &(j, v) in row {
            a[i][j] = a[i][j].add(&Q::int(flip * v));
        }
        a[i][n + i] = Q::ONE;
        b.push(Q::int(flip * rhs[i]));
    }
    // Phase 1: minimize the sum of artificials.
    let mut d = vec![Q::ZERO; cols];
    for j in 0..n {
        let mut s = Q::ZERO;
        for row in &a {
            if !row[j].is_zero() {
                s = s.sub(&row[j]);
            }
        }
        d[j] = s;
    }
    let z = b.iter().fold(Q::ZERO, |acc, x| acc.add(x));
    let mut t = Tableau { a, b, basis: (n..cols).collect(), d, z, cols };
    t.run(cols);
    if !t.z.is_zero() {
        return LpOutcome::Infeasible;
    }
    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.a.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.a[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.a.remove(i);
                    t.b.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    // Phase 2 with the real costs; artificial columns may no longer enter.
    let mut d: Vec<Q> = (0..cols).map(|j| if j < n { Q::int(cost[j]) } else { Q::ZERO }).collect();
    let mut z = Q::ZERO;
    for (i, &bj) in t.basis.iter().enumerate() {
        let cb = Q::int(cost[bj]);
        if cb.is_zero() {
            continue;
        }
        for (j, dj) in d.iter_mut().enumerate() {
            if !t.a[i][j].is_zero() {
                *dj = dj.sub(&cb.mul(&t.a[i][j]));
            }
        }
        z = z.add(&cb.mul(&t.b[i]));
    }
    t.d = d;
    t.z = z;
    if !t.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut y = vec![Q::ZERO; n];
    for (i, &bj) in t.basis.iter().enumerate() {
        y[bj] = t.b[i].clone();
    }
    LpOutcome::Optimal { value: t.z, y }
}

#[derive(Clone, Copy, Debug)]
struct Bound {
    var: usize,
    upper: bool,
    value: i64,
}

/// Relaxation at a node, with the split xⱼ = pⱼ − qⱼ (columns 2j and 2j+1).
fn relax(p: &IntProgram, bounds: &[Bound]) -> Option<(Q, Vec<Q>)> {
    let n = 2 * p.num_vars + bounds.len();
    let mut rows: Vec<Vec<(usize, i64)>> = p
        .rows
        .iter()
        .map(|row| row.iter().flat_map(|&(j, v)| [(2 * j, v), (2 * j + 1, -v)]).collect())
        .collect();
    let mut rhs = p.rhs.clone();
    for (k, bd) in bounds.iter().enumerate() {
        let slack = 2 * p.num_vars + k;
        let s = if bd.upper { 1 } else { -1 };
        rows.push(vec![(2 * bd.var, 1), (2 * bd.var + 1, -1), (slack, s)]);
        rhs.push(bd.value);
    }
    let cost: Vec<i64> = (0..n).map(|j| i64::from(j < 2 * p.num_vars)).collect();
    match solve_lp(n, &rows, &rhs, &cost) {
        LpOutcome::Optimal { value, y } => {
            let x = (0..p.num_vars).map(|j| y[2 * j].sub(&y[2 * j + 1])).collect();
            Some((value, x))
        }
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("objective is bounded below by zero"),
    }
}

/// Depth-first branch and bound on the most fractional variable (lowest
/// index on ties), exploring the floor branch first.
pub fn minimize_l1(p: &IntProgram, node_limit: usize) -> IlpOutcome {
    let mut stack: Vec<Vec<Bound>> = vec![Vec::new()];
    let mut best: Option<(i64, Vec<i64>)> = None;
    let mut nodes = 0;
    while let Some(bounds) = stack.pop() {
        if nodes >= node_limit {
            return IlpOutcome::NodeLimit { incumbent: best.map(|b| b.1), nodes };
        }
        nodes += 1;
        let Some((value, x)) = relax(p, &bounds) else { continue };
        let lower = value.ceil().to_i64().unwrap_or(i64::MAX);
        if best.as_ref().is_some_and(|(v, _)| lower >= *v) {
            continue;
        }
        let mut branch: Option<(usize, Q)> = None;
        for (j, xj) in x.iter().enumerate() {
            if xj.is_integer() {
                continue;
            }
            let f = xj.fractionality();
            if branch.as_ref().map_or(true, |(_, bf)| f > *bf) {
                branch = Some((j, f));
            }
        }
        match branch {
            None => {
                let xi: Vec<i64> = x.iter().map(|q| q.to_i64().expect("integral value fits")).collect();
                let v = xi.iter().map(|k| k.abs()).sum();
                if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
                    best = Some((v, xi));
                }
            }
            Some((j, _)) => {
                let fl = x[j].floor().to_i64().expect("bounded coefficient");
                let mut up = bounds.clone();
                up.push(Bound { var: j, upper: false, value: fl + 1 });
                let mut down = bounds;
                down.push(Bound { var: j, upper: true, value: fl });
                stack.push(up);
                stack.push(down);
            }
        }
    }
    match best {
        Some((value, x)) => IlpOutcome::Optimal { x, value, nodes },
        None => IlpOutcome::Infeasible { nodes },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min y0 + y1, y0 + 2 y1 = 4, y ≥ 0 → y1 = 2, value 2
        match solve_lp(2, &[vec![(0, 1), (1, 2)]], &[4], &[1, 1]) {
            LpOutcome::Optimal { value, y } => {
                assert_eq!(value, Q::int(2));
                assert_eq!(y, vec![Q::ZERO, Q::int(2)]);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(solve_lp(1, &[vec![(0, 1)]], &[-1], &[1]), LpOutcome::Infeasible));
        assert!(matches!(solve_lp(2, &[vec![(0, 1), (1, -1)]], &[0], &[-1, 0]), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_rows() {
        let rows = vec![vec![(0, 1), (1, 1)], vec![(0, 2), (1, 2)], vec![(0, 1), (1, -1)]];
        match solve_lp(2, &rows, &[2, 4, 0], &[1, 3]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, Q::int(4)),
            other => panic!("{other:?}"),
        }
    }

    // Exhaustive search over a box for the integer optimum.
    fn brute(p: &IntProgram, bound: i64) -> Option<i64> {
        let n = p.num_vars;
        let mut x = vec![-bound; n];
        let mut best: Option<i64> = None;
        loop {
            let ok = p
                .rows
                .iter()
                .zip(&p.rhs)
                .all(|(row, &r)| row.iter().map(|&(j, v)| v * x[j]).sum::<i64>() == r);
            if ok {
                let v: i64 = x.iter().map(|k| k.abs()).sum();
                best = Some(best.map_or(v, |b: i64| b.min(v)));
            }
            let mut k = 0;
            loop {
                if k == n {
                    return best;
                }
                if x[k] < bound {
                    x[k] += 1;
                    break;
                }
                x[k] = -bound;
                k += 1;
            }
        }
    }

    #[test]
    fn fractional_relaxation_needs_branching() {
        // 2x0 + 2x1 = 3 has no integer point; the unbounded search can only
        // stop at its node budget.
        let p = IntProgram { num_vars: 2, rows: vec![vec![(0, 2), (1, 2)]], rhs: vec![3] };
        assert!(matches!(minimize_l1(&p, 200), IlpOutcome::NodeLimit { incumbent: None, .. }));
        // 2x0 + 3x1 = 1 has x = (-1, 1).
        let p = IntProgram { num_vars: 2, rows: vec![vec![(0, 2), (1, 3)]], rhs: vec![1] };
        match minimize_l1(&p, 1000) {
            IlpOutcome::Optimal { x, value, .. } => {
                assert_eq!(value, 2);
                assert_eq!(x, vec![-1, 1]);
            }
            other => panic!("{other:?}"),
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn matches_box_search(
                coeffs in proptest::collection::vec(-3i64..=3, 6),
                sol in proptest::collection::vec(-2i64..=2, 3),
            ) {
                let rows: Vec<Vec<(usize, i64)>> = coeffs.chunks(3)
                    .map(|c| c.iter().enumerate().map(|(j, &v)| (j, v)).collect())
                    .collect();
                let rhs: Vec<i64> = rows.iter().map(|r| r.iter().map(|&(j, v)| v * sol[j]).sum()).collect();
                let p = IntProgram { num_vars: 3, rows, rhs };
                let exact = brute(&p, 8).unwrap();
                match minimize_l1(&p, 10_000) {
                    IlpOutcome::Optimal { value, x, .. } => {
                        prop_assert_eq!(value, exact);
                        for (row, &r) in p.rows.iter().zip(&p.rhs) {
                            prop_assert_eq!(row.iter().map(|&(j, v)| v * x[j]).sum::<i64>(), r);
                        }
                    }
                    other => prop_assert!(false, "{:?}", other),
                }
            }
        }
    }
}
