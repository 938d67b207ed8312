//! Seeded random inputs: 2-chains in a ball and routed fillings in an
//! extension. Everything derives from one ChaCha seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::CayleyBall;
use crate::chain::TwoChain;
use crate::error::{Error, Result};
use crate::extension::{route_filling, FreeExtension, TransferConstants, WordCells};
use crate::format::{parse_group, GroupSpec};
use crate::word::{Letter, Word};

/// Bundled group files, by name.
pub const GROUPS: &[(&str, &str)] = &[
    ("z2", include_str!("../groups/z2.grp")),
    ("z2_three", include_str!("../groups/z2_three.grp")),
    ("f2", include_str!("../groups/f2.grp")),
    ("klein", include_str!("../groups/klein.grp")),
    ("z3", include_str!("../groups/z3.grp")),
    ("shear", include_str!("../groups/shear.grp")),
    ("z2_two_lifts", include_str!("../groups/z2_two_lifts.grp")),
];

pub fn bundled_group(name: &str) -> Result<GroupSpec> {
    let text = GROUPS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Unsupported(format!("no bundled group named {name:?}")))?;
    parse_group(text)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainShape {
    /// Terms drawn per chain; repeats merge, so the support can be smaller.
    pub max_terms: usize,
    pub max_coeff: i64,
}

impl Default for ChainShape {
    fn default() -> Self {
        ChainShape { max_terms: 6, max_coeff: 2 }
    }
}

/// A nonzero chain on cells of the ball, or zero when the ball has none.
pub fn random_two_chain(ball: &CayleyBall, shape: ChainShape, rng: &mut impl Rng) -> TwoChain {
    let mut c = TwoChain::zero();
    if ball.cell_count() == 0 {
        return c;
    }
    while c.is_zero() {
        for _ in 0..rng.gen_range(1..=shape.max_terms.max(1)) {
            let mut k = rng.gen_range(1..=shape.max_coeff.max(1));
            if rng.gen_bool(0.5) {
                k = -k;
            }
            c.add_term(rng.gen_range(0..ball.cell_count()), k);
        }
    }
    c
}

pub fn random_two_chains(ball: &CayleyBall, count: usize, shape: ChainShape, seed: u64) -> Vec<TwoChain> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| random_two_chain(ball, shape, &mut rng)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteShape {
    /// Kernel cells in the starting chain.
    pub kernel_terms: usize,
    /// Length bound for the words placing those cells.
    pub kernel_span: usize,
    /// Length bound for the stable-letter path.
    pub max_path: usize,
    /// Chance of adding a closed bubble routed two ways.
    pub bubble_rate: f64,
}

impl Default for RouteShape {
    fn default() -> Self {
        RouteShape { kernel_terms: 2, kernel_span: 1, max_path: 2, bubble_rate: 0.3 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutedSample {
    pub kernel_chain: WordCells,
    pub path: Word,
    /// Two paths whose routed chains differ by a cycle, when a bubble was added.
    pub bubble: Option<(Word, Word)>,
    pub chain: WordCells,
}

fn random_kernel_chain(ext: &FreeExtension, shape: RouteShape, rng: &mut impl Rng) -> Result<WordCells> {
    let k = ext.kernel();
    let mut c = WordCells::zero();
    if k.marked_count() == 0 {
        return Ok(c);
    }
    while c.is_zero() {
        for _ in 0..shape.kernel_terms.max(1) {
            let len = rng.gen_range(0..=shape.kernel_span);
            let w = Word::new((0..len).map(|_| Letter::new(rng.gen_range(0..k.rank()), rng.gen_bool(0.5))).collect());
            let kappa = ext.kernel_backend().normal_form(&w)?;
            let s = if rng.gen_bool(0.5) { 1 } else { -1 };
            c.add_term((kappa, rng.gen_range(0..k.marked_count())), s);
        }
    }
    Ok(c)
}

fn random_stable_path(ext: &FreeExtension, max_len: usize, rng: &mut impl Rng) -> Word {
    let kr = ext.kernel().rank();
    let n = ext.lifts().len();
    let mut w = Word::empty();
    let len = rng.gen_range(0..=max_len);
    while w.len() < len {
        let l = Letter::new(kr + rng.gen_range(0..n), rng.gen_bool(0.5));
        if w.last() != Some(l.inverse()) {
            w.push(l);
        }
    }
    w
}

/// Fillings of kernel cycles that wander through the stable cosets.
pub fn random_routed_fillings(
    ext: &FreeExtension,
    constants: &TransferConstants,
    count: usize,
    shape: RouteShape,
    seed: u64,
) -> Result<Vec<RoutedSample>> {
    if ext.kernel().marked_count() == 0 {
        return Err(Error::Unsupported("the kernel has no relators to route".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let kernel_chain = random_kernel_chain(ext, shape, &mut rng)?;
        let path = random_stable_path(ext, shape.max_path, &mut rng);
        let mut chain = route_filling(ext, constants, &kernel_chain, path.letters())?;
        let mut bubble = None;
        if shape.max_path > 0 && rng.gen_bool(shape.bubble_rate) {
            let b = random_kernel_chain(ext, shape, &mut rng)?;
            let mut paths = [random_stable_path(ext, shape.max_path, &mut rng), random_stable_path(ext, shape.max_path, &mut rng)];
            if paths[0] == paths[1] {
                paths.shuffle(&mut rng);
                paths[1] = Word::empty();
            }
            if paths[0] != paths[1] {
                chain.add_scaled(&route_filling(ext, constants, &b, paths[0].letters())?, 1);
                chain.add_scaled(&route_filling(ext, constants, &b, paths[1].letters())?, -1);
                let [p, q] = paths;
                bubble = Some((p, q));
            }
        }
        out.push(RoutedSample { kernel_chain, path, bubble, chain });
    }
    Ok(out)
}
