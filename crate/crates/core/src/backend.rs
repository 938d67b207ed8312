//! Normal-form oracles for the supported groups.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::presentation::{check_range, AutLift, LiftDirection};
use crate::word::{Letter, Word};

pub const DEFAULT_VERTEX_BUDGET: usize = 200_000;
pub const BUDGET_ENV: &str = "HOMFILL_BUDGET_VERTICES";

/// The vertex budget, honouring the environment override.
pub fn vertex_budget() -> usize {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&b: &usize| b > 0)
        .unwrap_or(DEFAULT_VERTEX_BUDGET)
}

#[derive(Clone, Debug)]
pub enum GroupBackend {
    Free { rank: usize },
    FreeAbelian(FreeAbelian),
    DirectTable(FiniteGroup),
    Extension(Box<ExtensionBackend>),
}

impl GroupBackend {
    pub fn free(rank: usize) -> GroupBackend {
        GroupBackend::Free { rank }
    }

    pub fn free_abelian(rank: usize) -> GroupBackend {
        GroupBackend::FreeAbelian(FreeAbelian::standard(rank))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GroupBackend::Free { .. } => "free",
            GroupBackend::FreeAbelian(_) => "free_abelian",
            GroupBackend::DirectTable(_) => "direct_table",
            GroupBackend::Extension(_) => "extension",
        }
    }

    /// Number of generators the backend understands.
    pub fn rank(&self) -> usize {
        match self {
            GroupBackend::Free { rank } => *rank,
            GroupBackend::FreeAbelian(fa) => fa.images.len(),
            GroupBackend::DirectTable(g) => g.generators,
            GroupBackend::Extension(e) => e.kernel_rank + e.lifts.len(),
        }
    }

    pub fn as_extension(&self) -> Option<&ExtensionBackend> {
        match self {
            GroupBackend::Extension(e) => Some(e),
            _ => None,
        }
    }

    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        check_range(w, self.rank())?;
        Ok(match self {
            GroupBackend::Free { .. } => w.free_reduce(),
            GroupBackend::FreeAbelian(fa) => fa.word_of(&fa.vector_of(w)),
            GroupBackend::DirectTable(g) => g.words[g.element_of(w)].clone(),
            GroupBackend::Extension(e) => {
                let mut nf = Word::empty();
                for &l in w.letters() {
                    nf = e.multiply(&nf, l)?;
                }
                nf
            }
        })
    }

    /// Normal form of `nf · l` where `nf` is already a normal form.
    pub fn multiply(&self, nf: &Word, l: Letter) -> Result<Word> {
        if l.generator() >= self.rank() {
            return Err(Error::LetterOutOfRange { letter: l.raw(), rank: self.rank() });
        }
        Ok(match self {
            GroupBackend::Free { .. } => {
                let mut v = nf.clone();
                if v.last() == Some(l.inverse()) {
                    v = Word::new(v.letters()[..v.len() - 1].to_vec());
                } else {
                    v.push(l);
                }
                v
            }
            GroupBackend::FreeAbelian(fa) => {
                let mut v = fa.vector_of(nf);
                for (x, d) in v.iter_mut().zip(&fa.images[l.generator()]) {
                    *x += l.sign() * d;
                }
                fa.word_of(&v)
            }
            GroupBackend::DirectTable(g) => {
                let e = g.word_index.get(nf).copied().unwrap_or_else(|| g.element_of(nf));
                g.words[g.right_mul[e][l.order_key()]].clone()
            }
            GroupBackend::Extension(e) => e.multiply(nf, l)?,
        })
    }

    pub fn equal_in_group(&self, u: &Word, v: &Word) -> Result<bool> {
        Ok(self.normal_form(u)? == self.normal_form(v)?)
    }

    /// Normal forms of all elements within `radius` of the identity, in
    /// breadth-first discovery order (letters tried as g₀, g₀⁻¹, g₁, …).
    pub fn enumerate_ball_vertices(&self, radius: usize, budget: usize) -> Result<Vec<Word>> {
        Ok(bfs_ball(self, radius, budget)?.vertices)
    }
}

pub(crate) struct BfsBall {
    pub vertices: Vec<Word>,
    pub distance: Vec<usize>,
    pub index: HashMap<Word, usize>,
}

pub(crate) fn bfs_ball(backend: &GroupBackend, radius: usize, budget: usize) -> Result<BfsBall> {
    let letters: Vec<Letter> = (0..2 * backend.rank()).map(Letter::from_order_key).collect();
    let mut vertices = vec![Word::empty()];
    let mut distance = vec![0];
    let mut index = HashMap::from([(Word::empty(), 0usize)]);
    let mut frontier = vec![0usize];
    for d in 1..=radius {
        // Neighbour normal forms are computed in parallel; insertion stays sequential.
        let expanded: Vec<Vec<Word>> = frontier
            .par_iter()
            .map(|&v| letters.iter().map(|&l| backend.multiply(&vertices[v], l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::new();
        for words in expanded {
            for w in words {
                if index.contains_key(&w) {
                    continue;
                }
                if vertices.len() >= budget {
                    return Err(Error::VertexBudget { budget });
                }
                index.insert(w.clone(), vertices.len());
                next.push(vertices.len());
                vertices.push(w);
                distance.push(d);
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(BfsBall { vertices, distance, index })
}

/// A finitely generated free abelian group; every generator maps to an
/// integer vector and some generator maps to each unit vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeAbelian {
    images: Vec<Vec<i64>>,
    basis: Vec<usize>,
}

impl FreeAbelian {
    pub fn standard(rank: usize) -> FreeAbelian {
        let images = (0..rank)
            .map(|i| (0..rank).map(|j| i64::from(i == j)).collect())
            .collect();
        FreeAbelian { images, basis: (0..rank).collect() }
    }

    /// Generators with arbitrary images in ℤ^dim. The first generator mapping
    /// to each unit vector spells normal forms.
    pub fn with_images(images: Vec<Vec<i64>>) -> Result<FreeAbelian> {
        let dim = images.first().map_or(0, Vec::len);
        if images.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidPresentation("generator images have different dimensions".into()));
        }
        let mut basis = Vec::with_capacity(dim);
        for j in 0..dim {
            let unit = |v: &Vec<i64>| v.iter().enumerate().all(|(k, &x)| x == i64::from(k == j));
            match images.iter().position(unit) {
                Some(g) => basis.push(g),
                None => {
                    return Err(Error::InvalidPresentation(format!("no generator maps to basis vector {j}")))
                }
            }
        }
        Ok(FreeAbelian { images, basis })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn vector_of(&self, w: &Word) -> Vec<i64> {
        let mut v = vec![0; self.dimension()];
        for &l in w.letters() {
            for (x, d) in v.iter_mut().zip(&self.images[l.generator()]) {
                *x += l.sign() * d;
            }
        }
        v
    }

    pub fn word_of(&self, v: &[i64]) -> Word {
        let mut out = Vec::new();
        for (j, &x) in v.iter().enumerate() {
            let l = Letter::new(self.basis[j], x < 0);
            out.extend(std::iter::repeat(l).take(x.unsigned_abs() as usize));
        }
        Word::new(out)
    }
}

/// A finite group given by permutations; normal forms are shortlex-least words.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    generators: usize,
    right_mul: Vec<Vec<usize>>,
    words: Vec<Word>,
    word_index: HashMap<Word, usize>,
}

const FINITE_ORDER_LIMIT: usize = 100_000;

impl FiniteGroup {
    /// `perms[g][i]` is the image of point `i` under generator `g`; the
    /// product `x·y` applies `x` first.
    pub fn from_permutations(perms: &[Vec<usize>]) -> Result<FiniteGroup> {
        let degree = perms.first().map_or(0, Vec::len);
        for p in perms {
            let mut seen = vec![false; degree];
            if p.len() != degree || p.iter().any(|&x| x >= degree || std::mem::replace(&mut seen[x], true)) {
                return Err(Error::InvalidPresentation(format!("not a permutation of 0..{degree}: {p:?}")));
            }
        }
        let mut letter_perms = Vec::with_capacity(2 * perms.len());
        for p in perms {
            let mut inv = vec![0; degree];
            for (i, &x) in p.iter().enumerate() {
                inv[x] = i;
            }
            letter_perms.push(p.clone());
            letter_perms.push(inv);
        }
        let identity: Vec<usize> = (0..degree).collect();
        let mut elements = vec![identity.clone()];
        let mut index = HashMap::from([(identity, 0usize)]);
        let mut words = vec![Word::empty()];
        let mut right_mul: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(e) = queue.pop_front() {
            let mut row = Vec::with_capacity(letter_perms.len());
            for (key, lp) in letter_perms.iter().enumerate() {
                let prod: Vec<usize> = elements[e].iter().map(|&i| lp[i]).collect();
                let id = match index.get(&prod) {
                    Some(&id) => id,
                    None => {
                        if elements.len() >= FINITE_ORDER_LIMIT {
                            return Err(Error::VertexBudget { budget: FINITE_ORDER_LIMIT });
                        }
                        let id = elements.len();
                        let mut w = words[e].clone();
                        w.push(Letter::from_order_key(key));
                        words.push(w);
                        index.insert(prod.clone(), id);
                        elements.push(prod);
                        queue.push_back(id);
                        id
                    }
                };
                row.push(id);
            }
            right_mul.push(row);
        }
        let word_index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        Ok(FiniteGroup { generators: perms.len(), right_mul, words, word_index })
    }

    pub fn order(&self) -> usize {
        self.words.len()
    }

    fn element_of(&self, w: &Word) -> usize {
        w.letters().iter().fold(0, |e, l| self.right_mul[e][l.order_key()])
    }
}

/// K ⋊ Fₙ with Fₙ acting through the given lifts. Normal forms are k·w with
/// k a K-normal form over generators `0..kernel_rank` and w a reduced word in
/// the stable letters.
#[derive(Clone, Debug)]
pub struct ExtensionBackend {
    kernel: GroupBackend,
    kernel_rank: usize,
    lifts: Vec<AutLift>,
}

/// The split form h = k·w of an extension element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtensionNormalForm {
    pub k_part: Word,
    pub t_part: Word,
}

impl ExtensionBackend {
    pub fn new(kernel: GroupBackend, lifts: Vec<AutLift>) -> Result<ExtensionBackend> {
        let kernel_rank = kernel.rank();
        if let Some(l) = lifts.iter().find(|l| l.rank() != kernel_rank) {
            return Err(Error::InvalidPresentation(format!(
                "lift {} has {} images, kernel has {} generators",
                l.name(),
                l.rank(),
                kernel_rank
            )));
        }
        Ok(ExtensionBackend { kernel, kernel_rank, lifts })
    }

    pub fn kernel(&self) -> &GroupBackend {
        &self.kernel
    }

    pub fn kernel_rank(&self) -> usize {
        self.kernel_rank
    }

    pub fn lifts(&self) -> &[AutLift] {
        &self.lifts
    }

    pub fn is_stable(&self, l: Letter) -> bool {
        l.generator() >= self.kernel_rank
    }

    pub fn split(&self, nf: &Word) -> ExtensionNormalForm {
        let cut = nf.letters().iter().position(|&l| self.is_stable(l)).unwrap_or(nf.len());
        ExtensionNormalForm {
            k_part: Word::new(nf.letters()[..cut].to_vec()),
            t_part: Word::new(nf.letters()[cut..].to_vec()),
        }
    }

    pub fn join(&self, f: &ExtensionNormalForm) -> Word {
        f.k_part.concat(&f.t_part)
    }

    /// w·x·w⁻¹ as a K-normal form, for a K-word x and a stable-letter word w.
    pub fn conjugate(&self, w: &Word, x: &Word) -> Result<Word> {
        let mut image = self.kernel.normal_form(x)?;
        for &s in w.letters().iter().rev() {
            let lift = &self.lifts[s.generator() - self.kernel_rank];
            // t x t⁻¹ = Ψ(x) and t⁻¹ x t = Φ(x)
            let dir = if s.is_inverse() { LiftDirection::Forward } else { LiftDirection::Backward };
            image = self.kernel.normal_form(&lift.apply(dir, &image)?)?;
        }
        Ok(image)
    }

    fn multiply(&self, nf: &Word, l: Letter) -> Result<Word> {
        let ExtensionNormalForm { k_part, t_part } = self.split(nf);
        if self.is_stable(l) {
            let mut t = t_part;
            t.push(l);
            Ok(k_part.concat(&t.free_reduce()))
        } else {
            let image = self.conjugate(&t_part, &Word::new(vec![l]))?;
            let k = self.kernel.normal_form(&k_part.concat(&image))?;
            Ok(k.concat(&t_part))
        }
    }
}
