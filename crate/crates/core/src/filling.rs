//! Minimal-area homological fillings, FA tables, superadditive closure and
//! finite-range comparison of filling functions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::GroupBackend;
use crate::cayley::CayleyBall;
use crate::chain::{OneCycle, TwoChain};
use crate::error::{Error, Result};
use crate::lp::{minimize_l1, IlpOutcome, IntProgram};
use crate::presentation::HomPresentation;
use crate::word::{Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    ExactIlp,
    BruteForce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillStatus {
    Optimal,
    InfeasibleInBall,
    BudgetExceeded,
}

/// Result of a filling search. Areas are minimal among chains supported in
/// the ball, not in the whole complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingResult {
    pub chain: TwoChain,
    pub area: i64,
    pub status: FillStatus,
    pub ball_radius: usize,
    pub solver: Solver,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceConfig {
    /// Largest |coefficient| considered; defaults to max(1, max|γ coefficient|).
    pub coefficient_bound: Option<i64>,
    /// Largest area tried before giving up.
    pub max_area: i64,
    /// Search nodes before giving up.
    pub node_limit: usize,
    /// Cells the chain may use; all ball cells when absent.
    pub support: Option<Vec<usize>>,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        BruteForceConfig { coefficient_bound: None, max_area: 16, node_limit: 5_000_000, support: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillConfig {
    pub solver: Solver,
    /// Branch-and-bound node budget for the exact solver.
    pub node_limit: usize,
    pub brute: BruteForceConfig,
}

impl Default for FillConfig {
    fn default() -> Self {
        FillConfig { solver: Solver::ExactIlp, node_limit: 20_000, brute: BruteForceConfig::default() }
    }
}

impl FillConfig {
    pub fn with_solver(solver: Solver) -> FillConfig {
        FillConfig { solver, ..FillConfig::default() }
    }
}

pub fn harea_fill(ball: &CayleyBall, gamma: &OneCycle, solver: Solver) -> Result<FillingResult> {
    harea_fill_with(ball, gamma, &FillConfig::with_solver(solver))
}

pub fn harea_fill_with(ball: &CayleyBall, gamma: &OneCycle, cfg: &FillConfig) -> Result<FillingResult> {
    if !ball.is_cycle(gamma) {
        return Err(Error::NotACycle(format!("vertex boundary {:?}", ball.vertex_boundary(gamma))));
    }
    let (status, chain) = match cfg.solver {
        Solver::ExactIlp => fill_ilp(ball, gamma, cfg.node_limit),
        Solver::BruteForce => fill_brute(ball, gamma, &cfg.brute),
    };
    let chain = chain.unwrap_or_default();
    if status == FillStatus::Optimal && ball.boundary_2(&chain) != *gamma {
        return Err(Error::Invariant("solver returned a chain with the wrong boundary".into()));
    }
    Ok(FillingResult { area: chain.l1_norm(), chain, status, ball_radius: ball.radius(), solver: cfg.solver })
}

fn fill_ilp(ball: &CayleyBall, gamma: &OneCycle, node_limit: usize) -> (FillStatus, Option<TwoChain>) {
    if gamma.is_zero() {
        return (FillStatus::Optimal, Some(TwoChain::zero()));
    }
    let mut row_of: BTreeMap<usize, usize> = BTreeMap::new();
    for cell in ball.cells() {
        for &(e, _) in &cell.boundary {
            let next = row_of.len();
            row_of.entry(e).or_insert(next);
        }
    }
    if gamma.indices().any(|e| !row_of.contains_key(&e)) {
        return (FillStatus::InfeasibleInBall, None);
    }
    let mut rows: Vec<BTreeMap<usize, i64>> = vec![BTreeMap::new(); row_of.len()];
    for (c, cell) in ball.cells().iter().enumerate() {
        for &(e, s) in &cell.boundary {
            *rows[row_of[&e]].entry(c).or_insert(0) += s;
        }
    }
    let mut rhs = vec![0; row_of.len()];
    for (e, k) in gamma.iter() {
        rhs[row_of[&e]] = k;
    }
    let program = IntProgram {
        num_vars: ball.cell_count(),
        rows: rows.into_iter().map(|r| r.into_iter().filter(|&(_, v)| v != 0).collect()).collect(),
        rhs,
    };
    match minimize_l1(&program, node_limit) {
        IlpOutcome::Optimal { x, .. } => (FillStatus::Optimal, Some(TwoChain::from_terms(x.into_iter().enumerate()))),
        IlpOutcome::Infeasible { .. } => (FillStatus::InfeasibleInBall, None),
        IlpOutcome::NodeLimit { .. } => (FillStatus::BudgetExceeded, None),
    }
}

struct BruteSearch<'a> {
    bounds: &'a [Vec<(usize, i64)>],
    touching: HashMap<usize, Vec<usize>>,
    coefficient_bound: i64,
    rho: i64,
    residual: HashMap<usize, i64>,
    nonzero: BTreeSet<usize>,
    res_l1: i64,
    coefs: BTreeMap<usize, i64>,
    used: i64,
    seen: HashSet<Vec<(usize, i64)>>,
    nodes: usize,
    node_limit: usize,
}

enum Search {
    Found,
    Exhausted,
    OutOfBudget,
}

impl BruteSearch<'_> {
    fn apply(&mut self, cell: usize, s: i64) {
        for &(e, k) in &self.bounds[cell] {
            let r = self.residual.entry(e).or_insert(0);
            self.res_l1 -= r.abs();
            *r -= s * k;
            self.res_l1 += r.abs();
            if *r == 0 {
                self.nonzero.remove(&e);
            } else {
                self.nonzero.insert(e);
            }
        }
        let c = self.coefs.entry(cell).or_insert(0);
        *c += s;
        if *c == 0 {
            self.coefs.remove(&cell);
        }
    }

    // Coefficients only grow in absolute value, so every state is a
    // sign-compatible part of any solution it can reach.
    fn dfs(&mut self, area: i64) -> Search {
        if self.res_l1 == 0 {
            return Search::Found;
        }
        if self.used + (self.res_l1 + self.rho - 1) / self.rho > area {
            return Search::Exhausted;
        }
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Search::OutOfBudget;
        }
        let key: Vec<(usize, i64)> = self.coefs.iter().map(|(&c, &k)| (c, k)).collect();
        if !self.seen.insert(key) {
            return Search::Exhausted;
        }
        let e = *self.nonzero.iter().next().expect("nonzero residual");
        let Some(cells) = self.touching.get(&e).cloned() else { return Search::Exhausted };
        for cell in cells {
            for s in [1, -1] {
                let cur = self.coefs.get(&cell).copied().unwrap_or(0);
                if cur * s < 0 || (cur + s).abs() > self.coefficient_bound {
                    continue;
                }
                self.apply(cell, s);
                self.used += 1;
                let r = self.dfs(area);
                if matches!(r, Search::Found) {
                    return r;
                }
                self.used -= 1;
                self.apply(cell, -s);
                if matches!(r, Search::OutOfBudget) {
                    return r;
                }
            }
        }
        Search::Exhausted
    }
}

/// Iterative deepening on the area over chains with bounded coefficients.
fn fill_brute(ball: &CayleyBall, gamma: &OneCycle, cfg: &BruteForceConfig) -> (FillStatus, Option<TwoChain>) {
    if gamma.is_zero() {
        return (FillStatus::Optimal, Some(TwoChain::zero()));
    }
    let support: Vec<usize> = cfg.support.clone().unwrap_or_else(|| (0..ball.cell_count()).collect());
    let mut bounds = vec![Vec::new(); ball.cell_count()];
    let mut touching: HashMap<usize, Vec<usize>> = HashMap::new();
    for &c in &support {
        let b = ball.cell_boundary(c);
        for (e, _) in b.iter() {
            touching.entry(e).or_default().push(c);
        }
        bounds[c] = b.iter().collect();
    }
    if gamma.indices().any(|e| !touching.contains_key(&e)) {
        return (FillStatus::InfeasibleInBall, None);
    }
    let rho = support.iter().map(|&c| bounds[c].iter().map(|(_, k)| k.abs()).sum::<i64>()).max().unwrap_or(1).max(1);
    let mut search = BruteSearch {
        bounds: &bounds,
        touching,
        coefficient_bound: cfg.coefficient_bound.unwrap_or_else(|| gamma.max_abs_coeff().max(1)),
        rho,
        residual: gamma.iter().collect(),
        nonzero: gamma.indices().collect(),
        res_l1: gamma.l1_norm(),
        coefs: BTreeMap::new(),
        used: 0,
        seen: HashSet::new(),
        nodes: 0,
        node_limit: cfg.node_limit,
    };
    for area in 1..=cfg.max_area {
        search.seen.clear();
        match search.dfs(area) {
            Search::Found => {
                let chain = TwoChain::from_terms(search.coefs.iter().map(|(&c, &k)| (c, k)));
                return (FillStatus::Optimal, Some(chain));
            }
            Search::OutOfBudget => return (FillStatus::BudgetExceeded, None),
            Search::Exhausted => {}
        }
    }
    (FillStatus::BudgetExceeded, None)
}

/// Cyclically reduced closed words at the identity of length ≤ `max_len`
/// whose path stays in the ball, one per rotation class (the lexicographically
/// least rotation), sorted by length and then lexicographically.
pub fn enumerate_loops(ball: &CayleyBall, max_len: usize) -> Vec<Word> {
    let n_letters = 2 * ball.presentation().rank();
    let mut out = Vec::new();
    let mut word: Vec<Letter> = Vec::new();
    fn go(
        ball: &CayleyBall,
        v: usize,
        max_len: usize,
        n_letters: usize,
        word: &mut Vec<Letter>,
        out: &mut Vec<Word>,
    ) {
        if v == 0 && !word.is_empty() {
            let w = Word::new(word.clone());
            if w.is_cyclically_reduced() && w.min_rotation() == w {
                out.push(w);
            }
        }
        let remaining = max_len - word.len();
        for k in 0..n_letters {
            let l = Letter::from_order_key(k);
            if word.last() == Some(&l.inverse()) {
                continue;
            }
            // The rotation-least word starts with its least letter.
            if word.first().is_some_and(|f| l < *f) {
                continue;
            }
            let Some(next) = ball.step(v, l) else { continue };
            if ball.distance(next) + 1 > remaining {
                continue;
            }
            word.push(l);
            go(ball, next, max_len, n_letters, word, out);
            word.pop();
        }
    }
    go(ball, 0, max_len, n_letters, &mut word, &mut out);
    out.sort_by(|a, b| a.shortlex_cmp(b));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationScope {
    LoopsOnly,
    LoopsPlusSuperadditive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaEntry {
    pub n: usize,
    pub value: i64,
    /// Index into the loop list of a loop attaining `value`.
    pub witness: Option<usize>,
    pub witness_word: Option<String>,
    /// Loops of length ≤ n examined.
    pub cycles_examined: usize,
}

/// FA values restricted to a ball: lower bounds for the true function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FATable {
    pub values: Vec<FaEntry>,
    /// Superadditive closure of the loop values (present for that scope).
    pub closure: Option<Vec<i64>>,
    pub ball_radius: usize,
    pub scope: EnumerationScope,
    pub solver: Solver,
    /// Loops whose filling was not found within the budgets or the ball.
    pub gaps: Vec<String>,
    pub loops: Vec<LoopFill>,
}

impl FATable {
    /// The reported values: loop maxima, or their closure when requested.
    pub fn value_array(&self) -> Vec<i64> {
        match &self.closure {
            Some(c) => c.clone(),
            None => self.values.iter().map(|e| e.value).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopFill {
    pub word: String,
    pub length: usize,
    pub area: Option<i64>,
    pub status: FillStatus,
}

pub fn fa_estimate(
    backend: &GroupBackend,
    pres: &HomPresentation,
    n_max: usize,
    ball_radius: usize,
) -> Result<FATable> {
    let ball = CayleyBall::build(backend, pres, ball_radius)?;
    fa_table(&ball, n_max, &FillConfig::default(), EnumerationScope::LoopsOnly)
}

pub fn fa_table(ball: &CayleyBall, n_max: usize, cfg: &FillConfig, scope: EnumerationScope) -> Result<FATable> {
    if n_max == 0 {
        return Err(Error::Unsupported("n_max must be at least 1".into()));
    }
    let loops = enumerate_loops(ball, n_max);
    let fills: Vec<Result<FillingResult>> = loops
        .par_iter()
        .map(|w| harea_fill_with(ball, &ball.loop_to_cycle(0, w)?, cfg))
        .collect();
    let pres = ball.presentation();
    let mut records = Vec::with_capacity(loops.len());
    let mut gaps = Vec::new();
    for (w, r) in loops.iter().zip(fills) {
        let r = r?;
        let name = pres.format_word(w);
        let area = (r.status == FillStatus::Optimal).then_some(r.area);
        if area.is_none() {
            gaps.push(name.clone());
        }
        records.push(LoopFill { word: name, length: w.len(), area, status: r.status });
    }
    let mut values = Vec::with_capacity(n_max + 1);
    let (mut best, mut witness, mut examined) = (0i64, None, 0usize);
    let mut k = 0;
    for n in 0..=n_max {
        while k < records.len() && records[k].length <= n {
            if let Some(a) = records[k].area {
                if a > best {
                    best = a;
                    witness = Some(k);
                }
            }
            examined += 1;
            k += 1;
        }
        values.push(FaEntry {
            n,
            value: best,
            witness,
            witness_word: witness.map(|i| records[i].word.clone()),
            cycles_examined: examined,
        });
    }
    let closure = (scope == EnumerationScope::LoopsPlusSuperadditive)
        .then(|| superadditive_closure(&values.iter().map(|e| e.value).collect::<Vec<_>>()));
    Ok(FATable { values, closure, ball_radius: ball.radius(), scope, solver: cfg.solver, gaps, loops: records })
}

/// f̄(n) = max(f(n), max over 1 ≤ k < n of f̄(k) + f̄(n−k)).
pub fn superadditive_closure(f: &[i64]) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::with_capacity(f.len());
    for n in 0..f.len() {
        let mut v = f[n];
        for k in 1..n {
            v = v.max(out[k] + out[n - k]);
        }
        out.push(v);
    }
    out
}

/// Outcome of a finite-range comparison. `constant` is the least admissible
/// C, if any; a C is admissible when the inequality holds at every sample it
/// can check and it can check at least half of the samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeCheck {
    pub constant: Option<i64>,
    pub samples: usize,
    pub checked: usize,
    pub skipped: usize,
    pub caveat: String,
}

impl RangeCheck {
    pub fn holds(&self) -> bool {
        self.constant.is_some()
    }
}

const RANGE_CAVEAT: &str = "finite-range check on sampled values only; not a proof of asymptotic domination";

fn scan(samples: usize, c_max: i64, mut test: impl FnMut(i64) -> (bool, usize, usize)) -> RangeCheck {
    let needed = samples.div_ceil(2);
    let mut last = (0, samples);
    for c in 1..=c_max {
        let (ok, checked, skipped) = test(c);
        if c == 1 {
            last = (checked, skipped);
        }
        if ok && checked >= needed {
            return RangeCheck { constant: Some(c), samples, checked, skipped, caveat: RANGE_CAVEAT.into() };
        }
    }
    RangeCheck { constant: None, samples, checked: last.0, skipped: last.1, caveat: RANGE_CAVEAT.into() }
}

/// f ≼ g on the sampled range: f(n) ≤ C·g(Cn+C) + Cn + C for n ≥ 1. Arrays are
/// indexed by n; values of g beyond f's range may be supplied by passing a
/// longer array.
pub fn check_preceq(f: &[i64], g: &[i64], c_max: i64) -> RangeCheck {
    let samples = f.len().saturating_sub(1);
    scan(samples, c_max, |c| {
        let (mut checked, mut skipped) = (0, 0);
        for (n, &fv) in f.iter().enumerate().skip(1) {
            let idx = c as usize * (n + 1);
            let Some(&gv) = g.get(idx) else {
                skipped += 1;
                continue;
            };
            checked += 1;
            if fv > c * gv + c * n as i64 + c {
                return (false, checked, skipped);
            }
        }
        (true, checked, skipped)
    })
}

/// One direction of the affine relation: g(n) ≤ C·h(Cn) + C.
fn affine_le(g: &[i64], h: &[i64], c_max: i64) -> RangeCheck {
    let samples = g.len().saturating_sub(1);
    scan(samples, c_max, |c| {
        let (mut checked, mut skipped) = (0, 0);
        for (n, &gv) in g.iter().enumerate().skip(1) {
            let Some(&hv) = h.get(c as usize * n) else {
                skipped += 1;
                continue;
            };
            checked += 1;
            if gv > c * hv + c {
                return (false, checked, skipped);
            }
        }
        (true, checked, skipped)
    })
}

/// Two-sided affine equivalence g ≅ h on the sampled range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineCheck {
    pub forward: RangeCheck,
    pub backward: RangeCheck,
}

impl AffineCheck {
    pub fn holds(&self) -> bool {
        self.forward.holds() && self.backward.holds()
    }

    pub fn constant(&self) -> Option<i64> {
        Some(self.forward.constant?.max(self.backward.constant?))
    }
}

pub fn check_affine_equiv(g: &[i64], h: &[i64], c_max: i64) -> AffineCheck {
    AffineCheck { forward: affine_le(g, h, c_max), backward: affine_le(h, g, c_max) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Presentation;

    fn w(raw: &[i32]) -> Word {
        Word::from_raw(raw).unwrap()
    }

    fn z2_pres() -> HomPresentation {
        HomPresentation::new(Presentation::new(vec!["a".into(), "b".into()], vec![w(&[1, 2, -1, -2])]).unwrap())
    }

    fn z2_ball(r: usize) -> CayleyBall {
        CayleyBall::build(&GroupBackend::free_abelian(2), &z2_pres(), r).unwrap()
    }

    #[test]
    fn fill_examples() {
        let b = z2_ball(3);
        for solver in [Solver::ExactIlp, Solver::BruteForce] {
            let comm = b.loop_to_cycle(0, &w(&[1, 2, -1, -2])).unwrap();
            let r = harea_fill(&b, &comm, solver).unwrap();
            assert_eq!((r.area, r.status), (1, FillStatus::Optimal));
            assert_eq!(r.chain, TwoChain::single(b.cell_at(0, 0).unwrap(), 1));
            let z = harea_fill(&b, &OneCycle::zero(), solver).unwrap();
            assert_eq!((z.area, z.status), (0, FillStatus::Optimal));
        }
        let b4 = z2_ball(4);
        let sq = b4.loop_to_cycle(0, &w(&[1, 1, 2, 2, -1, -1, -2, -2])).unwrap();
        // the brute-force oracle restricted to coefficients in {-1,0,1}
        let brute = FillConfig {
            solver: Solver::BruteForce,
            brute: BruteForceConfig { coefficient_bound: Some(1), ..BruteForceConfig::default() },
            ..FillConfig::default()
        };
        assert_eq!(harea_fill_with(&b4, &sq, &brute).unwrap().area, 4);
        assert_eq!(harea_fill(&b4, &sq, Solver::ExactIlp).unwrap().area, 4);
    }

    #[test]
    fn non_cycle_rejected() {
        let b = z2_ball(2);
        let e = b.edge_between(0, 0).unwrap();
        assert!(matches!(harea_fill(&b, &OneCycle::single(e, 1), Solver::ExactIlp), Err(Error::NotACycle(_))));
    }

    #[test]
    fn tree_has_no_loops() {
        let free = CayleyBall::build(
            &GroupBackend::free(2),
            &HomPresentation::new(Presentation::new(vec!["a".into(), "b".into()], vec![]).unwrap()),
            3,
        )
        .unwrap();
        assert!(enumerate_loops(&free, 6).is_empty());
    }

    #[test]
    fn infeasible_without_cells() {
        // radius 1 has the commutator's edges only partially and no cells
        let b = z2_ball(2);
        let small = z2_ball(1);
        assert_eq!(small.cell_count(), 0);
        let comm = b.loop_to_cycle(0, &w(&[1, 2, -1, -2])).unwrap();
        assert_eq!(harea_fill(&b, &comm, Solver::ExactIlp).unwrap().area, 1);
        // a cycle made of two unit squares placed where no cell fits
        let rim = b.vertex_of(&w(&[1, 1])).unwrap();
        assert!(b.cell_at(rim, 0).is_none());
    }

    #[test]
    fn loop_enumeration_counts() {
        let b = z2_ball(3);
        let loops = enumerate_loops(&b, 4);
        // one cyclic word per orientation of the unit square
        assert_eq!(loops, vec![w(&[1, 2, -1, -2]), w(&[1, -2, -1, 2])]);
        assert!(loops.iter().all(|l| l.len() == 4));
        assert_eq!(loops[0], w(&[1, 2, -1, -2]));
    }

    #[test]
    fn z2_fa_values() {
        let t = fa_estimate(&GroupBackend::free_abelian(2), &z2_pres(), 8, 5).unwrap();
        let v: Vec<i64> = t.values.iter().map(|e| e.value).collect();
        assert_eq!(v, vec![0, 0, 0, 0, 1, 1, 2, 2, 4]);
        assert_eq!(t.values[8].witness_word.as_deref(), Some("a a b b a' a' b' b'"));
        assert!(t.gaps.is_empty());
    }

    #[test]
    fn free_group_fa_is_zero() {
        let pres = HomPresentation::new(Presentation::new(vec!["a".into(), "b".into()], vec![]).unwrap());
        let t = fa_estimate(&GroupBackend::free(2), &pres, 10, 5).unwrap();
        assert!(t.values.iter().all(|e| e.value == 0));
    }

    #[test]
    fn closure_examples() {
        assert_eq!(superadditive_closure(&[0, 1, 3]), vec![0, 1, 3]);
        assert_eq!(superadditive_closure(&[0, 2, 3]), vec![0, 2, 4]);
        assert_eq!(superadditive_closure(&[0, 0, 0, 0]), vec![0, 0, 0, 0]);
    }

    #[test]
    fn preceq_examples() {
        let lin: Vec<i64> = (0..=20).collect();
        let sq: Vec<i64> = (0..=20).map(|n| n * n).collect();
        assert_eq!(check_preceq(&lin, &lin, 50).constant, Some(1));
        let r = check_preceq(&sq, &lin, 50);
        assert!(!r.holds());
        assert_eq!(r.samples, 20);
        assert_eq!(check_preceq(&lin, &sq, 50).constant, Some(1));
        let g: Vec<i64> = (0..=8).map(|n| n / 2).collect();
        assert_eq!(check_affine_equiv(&g, &g, 64).constant(), Some(1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn closure_superadditive(f in proptest::collection::vec(0i64..20, 1..25)) {
                let c = superadditive_closure(&f);
                for n in 0..f.len() {
                    prop_assert!(c[n] >= f[n]);
                    for m in 1..n {
                        prop_assert!(c[n] >= c[m] + c[n - m]);
                    }
                }
            }

            #[test]
            fn preceq_reflexive(f in proptest::collection::vec(0i64..50, 3..30)) {
                let mut sorted = f.clone();
                sorted.sort();
                prop_assert_eq!(check_preceq(&sorted, &sorted, 8).constant, Some(1));
            }
        }
    }
}
