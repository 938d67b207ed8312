//! Finite balls in the Cayley 2-complex of a presentation, with the cellular
//! boundary maps.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{bfs_ball, vertex_budget, GroupBackend};
use crate::chain::{OneCycle, TwoChain};
use crate::error::{Error, Result};
use crate::presentation::{HomPresentation, RelatorRole};
use crate::word::{Letter, Word};

/// Edge from `source` to `source·g`, always stored with positive orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub generator: usize,
    pub target: usize,
}

/// The 2-cell reading relator `relator` from vertex `base`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub base: usize,
    pub relator: usize,
    /// One (edge, ±1) per relator letter, in reading order.
    pub boundary: Vec<(usize, i64)>,
    /// Vertex at the start of each letter; `corners[0] == base`.
    pub corners: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CayleyBall {
    radius: usize,
    backend: GroupBackend,
    pres: HomPresentation,
    vertices: Vec<Word>,
    distance: Vec<usize>,
    vertex_index: HashMap<Word, usize>,
    steps: Vec<Vec<Option<usize>>>,
    edges: Vec<Edge>,
    edge_index: HashMap<(usize, usize), usize>,
    cells: Vec<Cell>,
    cell_index: HashMap<(usize, usize), usize>,
    coset: Vec<Word>,
}

impl CayleyBall {
    pub fn build(backend: &GroupBackend, pres: &HomPresentation, radius: usize) -> Result<CayleyBall> {
        Self::build_with_budget(backend, pres, radius, vertex_budget())
    }

    pub fn build_with_budget(
        backend: &GroupBackend,
        pres: &HomPresentation,
        radius: usize,
        budget: usize,
    ) -> Result<CayleyBall> {
        if backend.rank() != pres.rank() {
            return Err(Error::InvalidPresentation(format!(
                "backend has {} generators, presentation {}",
                backend.rank(),
                pres.rank()
            )));
        }
        let bfs = bfs_ball(backend, radius, budget)?;
        let n_letters = 2 * pres.rank();
        let steps: Vec<Vec<Option<usize>>> = bfs
            .vertices
            .par_iter()
            .map(|v| {
                (0..n_letters)
                    .map(|k| Ok(bfs.index.get(&backend.multiply(v, Letter::from_order_key(k))?).copied()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let mut edges = Vec::new();
        let mut edge_index = HashMap::new();
        for (v, row) in steps.iter().enumerate() {
            for g in 0..pres.rank() {
                if let Some(t) = row[2 * g] {
                    edge_index.insert((v, g), edges.len());
                    edges.push(Edge { source: v, generator: g, target: t });
                }
            }
        }

        let coset = match backend.as_extension() {
            Some(ext) => bfs.vertices.iter().map(|v| ext.split(v).t_part).collect(),
            None => vec![Word::empty(); bfs.vertices.len()],
        };

        let mut ball = CayleyBall {
            radius,
            backend: backend.clone(),
            pres: pres.clone(),
            vertices: bfs.vertices,
            distance: bfs.distance,
            vertex_index: bfs.index,
            steps,
            edges,
            edge_index,
            cells: Vec::new(),
            cell_index: HashMap::new(),
            coset,
        };

        let relators = pres.marked_relators();
        for v in 0..ball.vertices.len() {
            for (r, rel) in relators.iter().enumerate() {
                if let Some((boundary, corners, end)) = ball.trace(v, rel) {
                    if end != v {
                        return Err(Error::InvalidPresentation(format!(
                            "relator {} is not trivial in the {} backend",
                            pres.format_word(rel),
                            backend.kind()
                        )));
                    }
                    ball.cell_index.insert((v, r), ball.cells.len());
                    ball.cells.push(Cell { base: v, relator: r, boundary, corners });
                }
            }
        }
        Ok(ball)
    }

    /// Follow `w` from `start`: signed edges, visited vertices and the end
    /// vertex. `None` if the path leaves the ball.
    fn trace(&self, start: usize, w: &Word) -> Option<(SignedPath, Vec<usize>, usize)> {
        let mut at = start;
        let mut boundary = Vec::with_capacity(w.len());
        let mut corners = Vec::with_capacity(w.len());
        for &l in w.letters() {
            corners.push(at);
            let next = self.step(at, l)?;
            let e = if l.is_inverse() {
                self.edge_index[&(next, l.generator())]
            } else {
                self.edge_index[&(at, l.generator())]
            };
            boundary.push((e, l.sign()));
            at = next;
        }
        Some((boundary, corners, at))
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn backend(&self) -> &GroupBackend {
        &self.backend
    }

    pub fn presentation(&self) -> &HomPresentation {
        &self.pres
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn vertex_word(&self, v: usize) -> &Word {
        &self.vertices[v]
    }

    pub fn distance(&self, v: usize) -> usize {
        self.distance[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &Cell {
        &self.cells[c]
    }

    pub fn relator_role(&self, c: usize) -> RelatorRole {
        self.pres.role(self.cells[c].relator)
    }

    /// Reduced stable-letter word of the coset containing `v` (empty outside extensions).
    pub fn coset_label(&self, v: usize) -> &Word {
        &self.coset[v]
    }

    /// Vertex with the given normal form.
    pub fn vertex_of(&self, nf: &Word) -> Option<usize> {
        self.vertex_index.get(nf).copied()
    }

    /// Vertex representing an arbitrary word.
    pub fn locate(&self, w: &Word) -> Result<Option<usize>> {
        Ok(self.vertex_of(&self.backend.normal_form(w)?))
    }

    pub fn step(&self, v: usize, l: Letter) -> Option<usize> {
        self.steps[v].get(l.order_key()).copied().flatten()
    }

    pub fn edge_between(&self, source: usize, generator: usize) -> Option<usize> {
        self.edge_index.get(&(source, generator)).copied()
    }

    pub fn cell_at(&self, base: usize, relator: usize) -> Option<usize> {
        self.cell_index.get(&(base, relator)).copied()
    }

    pub fn is_stable_edge(&self, e: usize) -> bool {
        self.pres.is_stable_generator(self.edges[e].generator)
    }

    /// Signed incidence sum at each vertex; empty exactly for cycles.
    pub fn vertex_boundary(&self, c: &OneCycle) -> BTreeMap<usize, i64> {
        let mut out = BTreeMap::new();
        for (e, k) in c.iter() {
            let edge = &self.edges[e];
            *out.entry(edge.target).or_insert(0) += k;
            *out.entry(edge.source).or_insert(0) -= k;
        }
        out.retain(|_, v| *v != 0);
        out
    }

    pub fn is_cycle(&self, c: &OneCycle) -> bool {
        c.indices().all(|e| e < self.edges.len()) && self.vertex_boundary(c).is_empty()
    }

    pub fn cell_boundary(&self, c: usize) -> OneCycle {
        OneCycle::from_terms(self.cells[c].boundary.iter().copied())
    }

    pub fn boundary_2(&self, c: &TwoChain) -> OneCycle {
        let mut out = OneCycle::zero();
        for (cell, k) in c.iter() {
            for &(e, s) in &self.cells[cell].boundary {
                out.add_term(e, s * k);
            }
        }
        out
    }

    /// Signed edge chain of the path reading `w` from `start`, and its end.
    pub fn path_chain(&self, start: usize, w: &Word) -> Result<(OneCycle, usize)> {
        let mut at = start;
        let mut chain = OneCycle::zero();
        for (i, &l) in w.letters().iter().enumerate() {
            let next = self.step(at, l).ok_or_else(|| Error::LeavesBall {
                radius: self.radius,
                prefix: format!(
                    "{} from {}",
                    self.pres.format_word(&Word::new(w.letters()[..=i].to_vec())),
                    self.pres.format_word(&self.vertices[start])
                ),
            })?;
            if l.is_inverse() {
                chain.add_term(self.edge_index[&(next, l.generator())], -1);
            } else {
                chain.add_term(self.edge_index[&(at, l.generator())], 1);
            }
            at = next;
        }
        Ok((chain, at))
    }

    pub fn loop_to_cycle(&self, base: usize, w: &Word) -> Result<OneCycle> {
        let start = self.backend.normal_form(&self.vertices[base].concat(w))?;
        if start != self.vertices[base] {
            return Err(Error::NotClosed(self.pres.format_word(w)));
        }
        let (chain, end) = self.path_chain(base, w)?;
        debug_assert_eq!(end, base);
        Ok(chain)
    }

    /// Cell index of g·D where D is `cell`, if it lies in the ball.
    pub fn translate_cell(&self, g: &Word, cell: usize) -> Result<Option<usize>> {
        let c = &self.cells[cell];
        Ok(self.locate(&g.concat(&self.vertices[c.base]))?.and_then(|b| self.cell_at(b, c.relator)))
    }

    pub fn export(&self) -> BallExport {
        let names = self.pres.generators();
        BallExport {
            radius: self.radius,
            generators: names.to_vec(),
            relators: self.pres.marked_relators().iter().map(|r| self.pres.format_word(r)).collect(),
            vertices: self.vertices.iter().map(|v| self.pres.format_word(v)).collect(),
            edges: self.edges.iter().map(|e| (e.source, names[e.generator].clone(), e.target)).collect(),
            cells: self.cells.iter().map(|c| (c.base, c.relator, c.boundary.clone())).collect(),
        }
    }
}

/// Σ|coefficients| of a 1-chain.
pub fn cycle_length(c: &OneCycle) -> i64 {
    c.l1_norm()
}

/// Edge indices with orientation signs.
pub type SignedPath = Vec<(usize, i64)>;

/// JSON form of a ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallExport {
    pub radius: usize,
    pub generators: Vec<String>,
    pub relators: Vec<String>,
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, String, usize)>,
    pub cells: Vec<(usize, usize, SignedPath)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Presentation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(raw: &[i32]) -> Word {
        Word::from_raw(raw).unwrap()
    }

    fn z2_pres() -> HomPresentation {
        HomPresentation::new(Presentation::new(vec!["a".into(), "b".into()], vec![w(&[1, 2, -1, -2])]).unwrap())
    }

    fn z2_ball(r: usize) -> CayleyBall {
        CayleyBall::build(&GroupBackend::free_abelian(2), &z2_pres(), r).unwrap()
    }

    // Lattice oracle: points with |x|+|y| ≤ r, horizontal/vertical unit
    // edges with both ends inside, unit squares with all four corners inside.
    fn lattice_counts(r: i64) -> (usize, usize, usize) {
        let inside = |x: i64, y: i64| x.abs() + y.abs() <= r;
        let (mut v, mut e, mut c) = (0, 0, 0);
        for x in -r..=r {
            for y in -r..=r {
                if !inside(x, y) {
                    continue;
                }
                v += 1;
                e += usize::from(inside(x + 1, y)) + usize::from(inside(x, y + 1));
                c += usize::from(inside(x + 1, y) && inside(x + 1, y + 1) && inside(x, y + 1));
            }
        }
        (v, e, c)
    }

    #[test]
    fn z2_counts_match_lattice() {
        for r in 1..=5 {
            let b = z2_ball(r);
            assert_eq!((b.vertex_count(), b.edge_count(), b.cell_count()), lattice_counts(r as i64), "radius {r}");
        }
        assert_eq!(lattice_counts(2), (13, 16, 4));
    }

    #[test]
    fn free_ball_counts() {
        let pres = HomPresentation::new(Presentation::new(vec!["a".into(), "b".into()], vec![]).unwrap());
        let b = CayleyBall::build(&GroupBackend::free(2), &pres, 2).unwrap();
        assert_eq!((b.vertex_count(), b.edge_count(), b.cell_count()), (17, 16, 0));
    }

    #[test]
    fn long_relator_no_cells_at_radius_one() {
        let pres = HomPresentation::new(Presentation::new(vec!["a".into()], vec![w(&[1, 1, 1, 1, 1])]).unwrap());
        let fa = crate::backend::FiniteGroup::from_permutations(&[vec![1, 2, 3, 4, 0]]).unwrap();
        let b = CayleyBall::build(&GroupBackend::DirectTable(fa), &pres, 1).unwrap();
        assert_eq!(b.cell_count(), 0);
    }

    #[test]
    fn boundary_examples() {
        let b = z2_ball(3);
        let id = b.vertex_of(&Word::empty()).unwrap();
        let sq = b.cell_at(id, 0).unwrap();
        let d = b.boundary_2(&TwoChain::single(sq, 1));
        assert_eq!(d, b.loop_to_cycle(id, &w(&[1, 2, -1, -2])).unwrap());
        assert_eq!(cycle_length(&d), 4);
        assert_eq!(cycle_length(&d.scaled(2)), 8);
        assert!(b.boundary_2(&TwoChain::single(sq, 1).minus(&TwoChain::single(sq, 1))).is_zero());

        let a = b.vertex_of(&w(&[1])).unwrap();
        let sq2 = b.cell_at(a, 0).unwrap();
        let d2 = b.boundary_2(&TwoChain::from_terms([(sq, 1), (sq2, 1)]));
        assert_eq!(cycle_length(&d2), 6);
        let shared = b.edge_between(a, 1).unwrap();
        assert_eq!(d2.coeff(shared), 0);
        assert_eq!(d2, b.loop_to_cycle(id, &w(&[1, 1, 2, -1, -1, -2])).unwrap());
    }

    #[test]
    fn loop_tracing() {
        let b = z2_ball(4);
        let id = 0;
        assert!(b.loop_to_cycle(id, &w(&[1, -1])).unwrap().is_zero());
        let big = b.loop_to_cycle(id, &w(&[1, 1, 2, 2, -1, -1, -2, -2])).unwrap();
        assert_eq!(cycle_length(&big), 8);
        assert!(b.is_cycle(&big));
        assert!(matches!(b.loop_to_cycle(id, &w(&[1, 2])), Err(Error::NotClosed(_))));
        let small = z2_ball(1);
        assert!(matches!(small.loop_to_cycle(0, &w(&[1, 1, -1, -1])), Err(Error::LeavesBall { .. })));
    }

    // Incidence matrix times coefficient vector, computed densely.
    fn dense_boundary(b: &CayleyBall, coeffs: &[i64]) -> Vec<i64> {
        let mut m = vec![vec![0i64; b.cell_count()]; b.edge_count()];
        for (c, cell) in b.cells().iter().enumerate() {
            for &(e, s) in &cell.boundary {
                m[e][c] += s;
            }
        }
        m.iter().map(|row| row.iter().zip(coeffs).map(|(a, x)| a * x).sum()).collect()
    }

    #[test]
    fn boundary_is_cycle_on_random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pres3 = HomPresentation::new(
            Presentation::new(
                vec!["a".into(), "b".into(), "c".into()],
                vec![w(&[1, 2, -1, -2]), w(&[1, 3, -1, -3]), w(&[2, 3, -2, -3])],
            )
            .unwrap(),
        );
        let balls = [z2_ball(3), CayleyBall::build(&GroupBackend::free_abelian(3), &pres3, 2).unwrap()];
        for b in &balls {
            for _ in 0..500 {
                let coeffs: Vec<i64> = (0..b.cell_count())
                    .map(|_| if rng.gen_bool(0.3) { rng.gen_range(-3..=3) } else { 0 })
                    .collect();
                let c = TwoChain::from_terms(coeffs.iter().copied().enumerate());
                let d = b.boundary_2(&c);
                assert!(b.is_cycle(&d));
                let dense = dense_boundary(b, &coeffs);
                for (e, &x) in dense.iter().enumerate() {
                    assert_eq!(d.coeff(e), x);
                }
            }
        }
    }

    #[test]
    fn translation_equivariance() {
        let b = z2_ball(4);
        let g = w(&[1, -2]);
        for c in 0..b.cell_count() {
            if let Some(t) = b.translate_cell(&g, c).unwrap() {
                let base = b.cell(c).base;
                let moved = b.locate(&g.concat(b.vertex_word(base))).unwrap().unwrap();
                assert_eq!(b.cell(t).base, moved);
                // boundary edges translate edge by edge
                for (&(e1, s1), &(e2, s2)) in b.cell(c).boundary.iter().zip(&b.cell(t).boundary) {
                    assert_eq!(s1, s2);
                    let src = b.locate(&g.concat(b.vertex_word(b.edge(e1).source))).unwrap().unwrap();
                    assert_eq!(b.edge(e2).source, src);
                }
            }
        }
    }

    #[test]
    fn deterministic_indexing() {
        let a = z2_ball(4);
        let b = z2_ball(4);
        assert_eq!(a.export(), b.export());
        let json = serde_json::to_value(a.export()).unwrap();
        assert_eq!(json["vertices"][0], "1");
        assert_eq!(json["edges"][0], serde_json::json!([0, "a", 1]));
    }
}
