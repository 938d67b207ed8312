//! Surface diagrams: faces glued along slots, assembled from 2-chains.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cayley::CayleyBall;
use crate::chain::{OneCycle, TwoChain};
use crate::error::{Error, Result};
use crate::word::Letter;

/// One side of a face: a signed generator label running from local vertex
/// `source` to local vertex `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub label: Letter,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub slots: Vec<Slot>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlotRef {
    pub face: usize,
    pub slot: usize,
}

impl SlotRef {
    pub fn new(face: usize, slot: usize) -> SlotRef {
        SlotRef { face, slot }
    }
}

/// Where the diagram maps into a ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Ball vertex of each local vertex.
    pub vertex_images: Vec<usize>,
    /// Ball cell of each face and ±1 for orientation.
    pub face_cells: Vec<(usize, i64)>,
    /// Ball edge and sign of each slot, per face.
    pub slot_images: Vec<Vec<(usize, i64)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceDiagram {
    pub vertex_count: usize,
    pub faces: Vec<Face>,
    pub gluing: Vec<(SlotRef, SlotRef)>,
    pub boundary_paths: Vec<Vec<SlotRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    SlotOutOfRange,
    SlotMatchedTwice,
    SelfGluedSlot,
    LabelsNotInverse,
    EndpointsNotReversed,
    FaceNotClosed,
    VertexOutOfRange,
    IsolatedVertex,
    LinkNotConnected,
    BoundaryPathNotClosed,
    BoundaryMismatch,
    ProvenanceMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, detail: String) {
        self.violations.push(Violation { kind, detail });
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceMetrics {
    pub area: usize,
    /// Largest distance from a vertex to the boundary; `None` when some
    /// vertex cannot reach the boundary (a closed component).
    pub radius: Option<usize>,
    pub boundary_length: usize,
    pub boundary_components: usize,
    pub component_count: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub interior_vertices: usize,
    pub euler_characteristic: i64,
    /// Genus of each component, in order of its lowest vertex.
    pub genus: Vec<i64>,
    pub orientable: bool,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    /// Union keeping the smaller root, so roots are class minima.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

impl SurfaceDiagram {
    pub fn area(&self) -> usize {
        self.faces.len()
    }

    fn slot(&self, r: SlotRef) -> Option<&Slot> {
        self.faces.get(r.face).and_then(|f| f.slots.get(r.slot))
    }

    /// Slots not matched by the gluing, in (face, slot) order.
    pub fn unmatched_slots(&self) -> Vec<SlotRef> {
        let matched: BTreeSet<SlotRef> = self.gluing.iter().flat_map(|&(a, b)| [a, b]).collect();
        let mut out = Vec::new();
        for (f, face) in self.faces.iter().enumerate() {
            for j in 0..face.slots.len() {
                let r = SlotRef::new(f, j);
                if !matched.contains(&r) {
                    out.push(r);
                }
            }
        }
        out
    }
}

/// Check every surface-diagram invariant; the report is empty iff valid.
pub fn verify_surface(s: &SurfaceDiagram) -> VerificationReport {
    let mut rep = VerificationReport::default();
    let nv = s.vertex_count;
    for (f, face) in s.faces.iter().enumerate() {
        let n = face.slots.len();
        if n == 0 {
            rep.push(ViolationKind::FaceNotClosed, format!("face {f} has no slots"));
        }
        for (j, sl) in face.slots.iter().enumerate() {
            if sl.source >= nv || sl.target >= nv {
                rep.push(ViolationKind::VertexOutOfRange, format!("slot ({f},{j}) names a missing vertex"));
            }
            if face.slots[(j + 1) % n].source != sl.target {
                rep.push(ViolationKind::FaceNotClosed, format!("face {f}: slot {j} does not meet slot {}", (j + 1) % n));
            }
        }
    }
    if !rep.is_valid() {
        return rep;
    }

    // each slot in at most one pair
    let mut partner: HashMap<SlotRef, SlotRef> = HashMap::new();
    for &(a, b) in &s.gluing {
        let (Some(sa), Some(sb)) = (s.slot(a), s.slot(b)) else {
            rep.push(ViolationKind::SlotOutOfRange, format!("gluing names missing slot {a:?} or {b:?}"));
            continue;
        };
        if a == b {
            rep.push(ViolationKind::SelfGluedSlot, format!("slot {a:?} glued to itself"));
            continue;
        }
        for (x, y) in [(a, b), (b, a)] {
            if let Some(prev) = partner.insert(x, y) {
                rep.push(
                    ViolationKind::SlotMatchedTwice,
                    format!("slot matched twice: ({},{}) with {prev:?} and {y:?}", x.face, x.slot),
                );
            }
        }
        if sa.label != sb.label.inverse() {
            rep.push(ViolationKind::LabelsNotInverse, format!("slots {a:?} and {b:?} have labels that are not inverse"));
        }
        if sa.source != sb.target || sa.target != sb.source {
            rep.push(ViolationKind::EndpointsNotReversed, format!("slots {a:?} and {b:?} do not run in opposite directions"));
        }
    }
    if !rep.is_valid() {
        return rep;
    }

    // link graph: corners are (face, slot) at the slot's source
    let mut offset = Vec::with_capacity(s.faces.len());
    let mut total = 0;
    for face in &s.faces {
        offset.push(total);
        total += face.slots.len();
    }
    let corner = |r: SlotRef| offset[r.face] + r.slot;
    let next_corner = |r: SlotRef| offset[r.face] + (r.slot + 1) % s.faces[r.face].slots.len();
    let mut uf = UnionFind::new(total);
    for &(a, b) in &s.gluing {
        uf.union(corner(a), next_corner(b));
        uf.union(next_corner(a), corner(b));
    }
    let mut comps: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (f, face) in s.faces.iter().enumerate() {
        for (j, sl) in face.slots.iter().enumerate() {
            let root = uf.find(corner(SlotRef::new(f, j)));
            comps.entry(sl.source).or_default().insert(root);
        }
    }
    for v in 0..nv {
        match comps.get(&v) {
            None => rep.push(ViolationKind::IsolatedVertex, format!("vertex {v} has no corners")),
            Some(c) if c.len() > 1 => rep.push(
                ViolationKind::LinkNotConnected,
                format!("link not connected at vertex {v}: {} corner groups", c.len()),
            ),
            _ => {}
        }
    }

    // boundary paths cover the unmatched slots exactly, each closing up
    let unmatched: BTreeSet<SlotRef> = s.unmatched_slots().into_iter().collect();
    let mut listed: BTreeSet<SlotRef> = BTreeSet::new();
    for (p, path) in s.boundary_paths.iter().enumerate() {
        for (k, &r) in path.iter().enumerate() {
            let Some(sl) = s.slot(r) else {
                rep.push(ViolationKind::SlotOutOfRange, format!("boundary path {p} names missing slot {r:?}"));
                continue;
            };
            if !listed.insert(r) || !unmatched.contains(&r) {
                rep.push(ViolationKind::BoundaryMismatch, format!("boundary path {p} repeats or uses glued slot {r:?}"));
            }
            if let Some(next) = s.slot(path[(k + 1) % path.len()]) {
                if next.source != sl.target {
                    rep.push(ViolationKind::BoundaryPathNotClosed, format!("boundary path {p} breaks after slot {r:?}"));
                }
            }
        }
    }
    if listed != unmatched {
        rep.push(
            ViolationKind::BoundaryMismatch,
            format!("{} unmatched slots, {} listed on boundary paths", unmatched.len(), listed.len()),
        );
    }

    if let Some(prov) = &s.provenance {
        check_provenance(s, prov, &mut rep);
    }
    rep
}

fn check_provenance(s: &SurfaceDiagram, prov: &Provenance, rep: &mut VerificationReport) {
    if prov.vertex_images.len() != s.vertex_count
        || prov.face_cells.len() != s.faces.len()
        || prov.slot_images.len() != s.faces.len()
        || prov.slot_images.iter().zip(&s.faces).any(|(im, f)| im.len() != f.slots.len())
    {
        rep.push(ViolationKind::ProvenanceMismatch, "provenance shape differs from the diagram".into());
        return;
    }
    for &(a, b) in &s.gluing {
        let (ea, sa) = prov.slot_images[a.face][a.slot];
        let (eb, sb) = prov.slot_images[b.face][b.slot];
        if ea != eb || sa != -sb {
            rep.push(ViolationKind::ProvenanceMismatch, format!("glued slots {a:?}, {b:?} map to different edge traversals"));
        }
    }
}

/// Refuses invalid diagrams.
pub fn measure(s: &SurfaceDiagram) -> Result<SurfaceMetrics> {
    let rep = verify_surface(s);
    if !rep.is_valid() {
        return Err(Error::InvalidSurface(format!(
            "{} violation(s), first: {}",
            rep.violations.len(),
            rep.violations[0].detail
        )));
    }
    let nv = s.vertex_count;
    let unmatched = s.unmatched_slots();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut uf = UnionFind::new(nv);
    for face in &s.faces {
        for sl in &face.slots {
            adj[sl.source].push(sl.target);
            adj[sl.target].push(sl.source);
            uf.union(sl.source, sl.target);
        }
    }
    let mut dist: Vec<Option<usize>> = vec![None; nv];
    let mut queue = VecDeque::new();
    for r in &unmatched {
        let v = s.faces[r.face].slots[r.slot].source;
        if dist[v].is_none() {
            dist[v] = Some(0);
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("queued vertices have distances");
        for &u in &adj[v] {
            if dist[u].is_none() {
                dist[u] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }
    let radius = if nv == 0 {
        Some(0)
    } else {
        dist.iter().try_fold(0usize, |m, d| d.map(|d| m.max(d)))
    };
    let interior_vertices = dist.iter().filter(|d| **d != Some(0)).count();

    // per component: V, E, F, boundary paths
    let roots: Vec<usize> = (0..nv).map(|v| uf.find(v)).collect();
    let mut comp_index: BTreeMap<usize, usize> = BTreeMap::new();
    for &r in &roots {
        let next = comp_index.len();
        comp_index.entry(r).or_insert(next);
    }
    let k = comp_index.len();
    let (mut cv, mut ce, mut cf, mut cb) = (vec![0i64; k], vec![0i64; k], vec![0i64; k], vec![0i64; k]);
    let comp_of_vertex = |v: usize| comp_index[&roots[v]];
    for v in 0..nv {
        cv[comp_of_vertex(v)] += 1;
    }
    for face in &s.faces {
        cf[comp_of_vertex(face.slots[0].source)] += 1;
    }
    for &(a, _) in &s.gluing {
        ce[comp_of_vertex(s.faces[a.face].slots[a.slot].source)] += 1;
    }
    for r in &unmatched {
        ce[comp_of_vertex(s.faces[r.face].slots[r.slot].source)] += 1;
    }
    for path in &s.boundary_paths {
        if let Some(r) = path.first() {
            cb[comp_of_vertex(s.faces[r.face].slots[r.slot].source)] += 1;
        }
    }
    let genus = (0..k).map(|c| (2 - (cv[c] - ce[c] + cf[c]) - cb[c]) / 2).collect();
    let edge_count = s.gluing.len() + unmatched.len();
    Ok(SurfaceMetrics {
        area: s.faces.len(),
        radius,
        boundary_length: unmatched.len(),
        boundary_components: s.boundary_paths.len(),
        component_count: k,
        vertex_count: nv,
        edge_count,
        interior_vertices,
        euler_characteristic: nv as i64 - edge_count as i64 + s.faces.len() as i64,
        genus,
        // glued slots always run in opposite directions, so the stored face
        // orientations are coherent
        orientable: true,
    })
}

/// Signed sum of the image edges of the unmatched slots.
pub fn project_boundary(s: &SurfaceDiagram) -> Result<OneCycle> {
    let prov = s.provenance.as_ref().ok_or_else(|| Error::InvalidSurface("diagram has no provenance".into()))?;
    let mut out = OneCycle::zero();
    for r in s.unmatched_slots() {
        let (e, sign) = prov.slot_images[r.face][r.slot];
        out.add_term(e, sign);
    }
    Ok(out)
}

struct FaceCopy {
    cell: usize,
    orientation: i64,
    /// (edge, sign, label, start ball vertex, end ball vertex) per slot.
    slots: Vec<(usize, i64, Letter, usize, usize)>,
}

fn face_copy(ball: &CayleyBall, cell: usize, orientation: i64) -> FaceCopy {
    let c = ball.cell(cell);
    let rel = ball.presentation().marked_relator(c.relator);
    let n = c.boundary.len();
    let forward: Vec<(usize, i64, Letter, usize, usize)> = (0..n)
        .map(|j| (c.boundary[j].0, c.boundary[j].1, rel.letters()[j], c.corners[j], c.corners[(j + 1) % n]))
        .collect();
    let slots = if orientation > 0 {
        forward
    } else {
        forward.iter().rev().map(|&(e, s, l, a, b)| (e, -s, l.inverse(), b, a)).collect()
    };
    FaceCopy { cell, orientation, slots }
}

/// Glue |aᵢ| copies of each cell of `c` (reversed for negative coefficients)
/// into a surface diagram whose boundary projects to ∂c. The gluing order is
/// fixed: repeatedly take the lowest boundary vertex that has a gluable slot
/// and glue its lowest such slot, preferring a partner on an unplaced face;
/// seed a new component when nothing on the placed faces can be glued.
pub fn assemble_surface(ball: &CayleyBall, c: &TwoChain) -> Result<SurfaceDiagram> {
    let mut copies = Vec::new();
    for (cell, k) in c.iter() {
        for _ in 0..k.abs() {
            copies.push(face_copy(ball, cell, k.signum()));
        }
    }
    let nf = copies.len();
    let lens: Vec<usize> = copies.iter().map(|f| f.slots.len()).collect();
    let max_len = lens.iter().copied().max().unwrap_or(1);
    let mut offset = Vec::with_capacity(nf);
    let mut total = 0;
    for &l in &lens {
        offset.push(total);
        total += l;
    }
    let mut available: HashMap<(usize, i64), BTreeSet<SlotRef>> = HashMap::new();
    for (f, copy) in copies.iter().enumerate() {
        for (j, &(e, s, ..)) in copy.slots.iter().enumerate() {
            available.entry((e, s)).or_default().insert(SlotRef::new(f, j));
        }
    }
    let mut placed: Vec<Option<usize>> = vec![None; nf];
    let mut placed_order: Vec<usize> = Vec::new();
    let mut matched: Vec<Vec<Option<SlotRef>>> = lens.iter().map(|&l| vec![None; l]).collect();
    let mut uf = UnionFind::new(total);
    let mut gluing = Vec::new();
    // Corners are ranked by placement order so "lowest vertex" follows the
    // order in which the diagram grows.
    let corner = |r: SlotRef| offset[r.face] + r.slot;
    let next_corner = |r: SlotRef| offset[r.face] + (r.slot + 1) % lens[r.face];

    let place = |f: usize, placed: &mut Vec<Option<usize>>, order: &mut Vec<usize>| {
        placed[f] = Some(order.len());
        order.push(f);
    };
    if nf > 0 {
        place(0, &mut placed, &mut placed_order);
    }
    loop {
        let mut class_key: HashMap<usize, usize> = HashMap::new();
        for &f in &placed_order {
            let rank = placed[f].expect("placed");
            for j in 0..lens[f] {
                let root = uf.find(offset[f] + j);
                let key = rank * max_len + j;
                class_key.entry(root).and_modify(|k| *k = (*k).min(key)).or_insert(key);
            }
        }
        let mut best: Option<(usize, usize, usize)> = None;
        for &f in &placed_order {
            for (j, m) in matched[f].iter().enumerate().take(lens[f]) {
                if m.is_some() {
                    continue;
                }
                let (e, s, ..) = copies[f].slots[j];
                if available.get(&(e, -s)).map_or(true, BTreeSet::is_empty) {
                    continue;
                }
                let r = SlotRef::new(f, j);
                let ka = class_key[&uf.find(corner(r))];
                let kb = class_key[&uf.find(next_corner(r))];
                let cand = (ka.min(kb), f, j);
                if best.map_or(true, |b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        let Some((_, f, j)) = best else {
            match placed.iter().position(Option::is_none) {
                Some(next) => {
                    place(next, &mut placed, &mut placed_order);
                    continue;
                }
                None => break,
            }
        };
        let a = SlotRef::new(f, j);
        let (e, s, ..) = copies[f].slots[j];
        let pool = available.get(&(e, -s)).expect("checked above");
        let b = pool
            .iter()
            .find(|r| placed[r.face].is_none())
            .or_else(|| pool.iter().next())
            .copied()
            .expect("nonempty pool");
        if placed[b.face].is_none() {
            place(b.face, &mut placed, &mut placed_order);
        }
        available.get_mut(&(e, s)).expect("slot listed").remove(&a);
        available.get_mut(&(e, -s)).expect("slot listed").remove(&b);
        matched[a.face][a.slot] = Some(b);
        matched[b.face][b.slot] = Some(a);
        uf.union(corner(a), next_corner(b));
        uf.union(next_corner(a), corner(b));
        gluing.push(if a < b { (a, b) } else { (b, a) });
    }

    // local vertices in order of their least corner key
    let mut class_key: BTreeMap<usize, usize> = BTreeMap::new();
    for f in 0..nf {
        let rank = placed[f].expect("all faces placed");
        for j in 0..lens[f] {
            let root = uf.find(offset[f] + j);
            let key = rank * max_len + j;
            class_key.entry(root).and_modify(|k| *k = (*k).min(key)).or_insert(key);
        }
    }
    let mut roots: Vec<(usize, usize)> = class_key.iter().map(|(&r, &k)| (k, r)).collect();
    roots.sort();
    let local: HashMap<usize, usize> = roots.iter().enumerate().map(|(i, &(_, r))| (r, i)).collect();
    let mut vertex_images = vec![usize::MAX; roots.len()];
    let mut faces = Vec::with_capacity(nf);
    let mut slot_images = Vec::with_capacity(nf);
    for (f, copy) in copies.iter().enumerate() {
        let mut slots = Vec::with_capacity(lens[f]);
        let mut images = Vec::with_capacity(lens[f]);
        for (j, &(e, s, label, from, to)) in copy.slots.iter().enumerate() {
            let r = SlotRef::new(f, j);
            let src = local[&uf.find(corner(r))];
            let tgt = local[&uf.find(next_corner(r))];
            for (v, img) in [(src, from), (tgt, to)] {
                if vertex_images[v] != usize::MAX && vertex_images[v] != img {
                    return Err(Error::Invariant(format!("local vertex {v} maps to two ball vertices")));
                }
                vertex_images[v] = img;
            }
            slots.push(Slot { label, source: src, target: tgt });
            images.push((e, s));
        }
        faces.push(Face { slots });
        slot_images.push(images);
    }
    gluing.sort();

    // boundary paths: at each boundary vertex exactly one unmatched slot leaves
    let mut leaving: HashMap<usize, SlotRef> = HashMap::new();
    let mut unmatched = Vec::new();
    for (f, face) in faces.iter().enumerate() {
        for (j, sl) in face.slots.iter().enumerate() {
            if matched[f][j].is_none() {
                let r = SlotRef::new(f, j);
                if leaving.insert(sl.source, r).is_some() {
                    return Err(Error::Invariant(format!("two boundary slots leave vertex {}", sl.source)));
                }
                unmatched.push(r);
            }
        }
    }
    let mut visited: BTreeSet<SlotRef> = BTreeSet::new();
    let mut boundary_paths = Vec::new();
    for &start in &unmatched {
        if visited.contains(&start) {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            visited.insert(cur);
            path.push(cur);
            let t = faces[cur.face].slots[cur.slot].target;
            cur = *leaving
                .get(&t)
                .ok_or_else(|| Error::Invariant(format!("boundary path stops at vertex {t}")))?;
            if cur == start {
                break;
            }
            if visited.contains(&cur) {
                return Err(Error::Invariant("boundary paths overlap".into()));
            }
        }
        boundary_paths.push(path);
    }

    let diagram = SurfaceDiagram {
        vertex_count: roots.len(),
        faces,
        gluing,
        boundary_paths,
        provenance: Some(Provenance {
            vertex_images,
            face_cells: copies.iter().map(|c| (c.cell, c.orientation)).collect(),
            slot_images,
        }),
    };
    let rep = verify_surface(&diagram);
    if !rep.is_valid() {
        return Err(Error::Invariant(format!("assembled diagram is invalid: {:?}", rep.violations[0])));
    }
    if project_boundary(&diagram)? != ball.boundary_2(c) {
        return Err(Error::Invariant("assembled boundary differs from the chain boundary".into()));
    }
    Ok(diagram)
}

/// JSON document for a diagram together with its metrics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramDocument {
    #[serde(flatten)]
    pub diagram: SurfaceDiagram,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<SurfaceMetrics>,
}

/// Graphviz rendering of the 1-skeleton; boundary edges are drawn bold red.
pub fn to_dot(s: &SurfaceDiagram, names: &[String]) -> String {
    let mut out = String::from("graph surface {\n  node [shape=point];\n");
    for v in 0..s.vertex_count {
        let _ = writeln!(out, "  v{v};");
    }
    let label = |l: Letter| {
        let base = names.get(l.generator()).cloned().unwrap_or_else(|| format!("g{}", l.generator()));
        if l.is_inverse() {
            format!("{base}'")
        } else {
            base
        }
    };
    for &(a, _) in &s.gluing {
        let sl = s.faces[a.face].slots[a.slot];
        let _ = writeln!(out, "  v{} -- v{} [label=\"{}\"];", sl.source, sl.target, label(sl.label));
    }
    for r in s.unmatched_slots() {
        let sl = s.faces[r.face].slots[r.slot];
        let _ = writeln!(
            out,
            "  v{} -- v{} [label=\"{}\", color=red, penwidth=2];",
            sl.source,
            sl.target,
            label(sl.label)
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::GroupBackend;
    use crate::presentation::{HomPresentation, Presentation};
    use crate::word::Word;

    fn w(raw: &[i32]) -> Word {
        Word::from_raw(raw).unwrap()
    }

    fn z2_ball(r: usize) -> CayleyBall {
        let pres =
            HomPresentation::new(Presentation::new(vec!["a".into(), "b".into()], vec![w(&[1, 2, -1, -2])]).unwrap());
        CayleyBall::build(&GroupBackend::free_abelian(2), &pres, r).unwrap()
    }

    fn grid(ball: &CayleyBall) -> TwoChain {
        let cells = [&[][..], &[1], &[2], &[1, 2]]
            .into_iter()
            .map(|raw| ball.cell_at(ball.vertex_of(&w(raw)).unwrap(), 0).unwrap());
        TwoChain::from_terms(cells.map(|c| (c, 1)))
    }

    #[test]
    fn single_cell_disk() {
        let b = z2_ball(3);
        let c = TwoChain::single(b.cell_at(0, 0).unwrap(), 1);
        let s = assemble_surface(&b, &c).unwrap();
        assert!(verify_surface(&s).is_valid());
        let m = measure(&s).unwrap();
        assert_eq!((m.area, m.radius, m.boundary_length, m.euler_characteristic), (1, Some(0), 4, 1));
        assert_eq!(s.boundary_paths.len(), 1);
        assert_eq!(project_boundary(&s).unwrap(), b.boundary_2(&c));
    }

    #[test]
    fn grid_disk() {
        let b = z2_ball(4);
        let c = grid(&b);
        let s = assemble_surface(&b, &c).unwrap();
        let m = measure(&s).unwrap();
        assert_eq!((m.vertex_count, m.edge_count, m.area), (9, 12, 4));
        assert_eq!((m.euler_characteristic, m.radius, m.boundary_length), (1, Some(1), 8));
        assert_eq!(m.interior_vertices, 1);
        assert_eq!(m.genus, vec![0]);
        let big = b.loop_to_cycle(0, &w(&[1, 1, 2, 2, -1, -1, -2, -2])).unwrap();
        assert_eq!(project_boundary(&s).unwrap(), big);
    }

    #[test]
    fn doubled_cell_gives_two_disks() {
        let b = z2_ball(3);
        let c = TwoChain::single(b.cell_at(0, 0).unwrap(), 2);
        let s = assemble_surface(&b, &c).unwrap();
        let m = measure(&s).unwrap();
        assert_eq!((m.area, m.component_count, m.euler_characteristic), (2, 2, 2));
        assert_eq!(project_boundary(&s).unwrap(), b.boundary_2(&c));
    }

    #[test]
    fn cancelling_pair_closes_up() {
        let b = z2_ball(3);
        let cell = b.cell_at(0, 0).unwrap();
        let other = b.cell_at(1, 0).unwrap();
        // σ + τ − τ is not a chain, but σ and −σ as separate terms cannot be
        // written either; use σ − σ' where σ' shares no edges to keep two disks,
        // and 2σ − σ to get a disk plus nothing closed.
        let c = TwoChain::from_terms([(cell, 1), (other, -1)]);
        let s = assemble_surface(&b, &c).unwrap();
        assert!(verify_surface(&s).is_valid());
        assert_eq!(project_boundary(&s).unwrap(), b.boundary_2(&c));
    }

    fn square(v: [usize; 4]) -> Face {
        let labels = [Letter::pos(0), Letter::pos(1), Letter::neg(0), Letter::neg(1)];
        Face {
            slots: (0..4).map(|j| Slot { label: labels[j], source: v[j], target: v[(j + 1) % 4] }).collect(),
        }
    }

    #[test]
    fn slot_matched_twice_reported() {
        // three faces all glued along the same slot of face 0
        let s = SurfaceDiagram {
            vertex_count: 8,
            faces: vec![square([0, 1, 2, 3]), square([4, 0, 3, 5]), square([6, 0, 3, 7])],
            gluing: vec![(SlotRef::new(0, 3), SlotRef::new(1, 1)), (SlotRef::new(0, 3), SlotRef::new(2, 1))],
            boundary_paths: vec![],
            provenance: None,
        };
        let rep = verify_surface(&s);
        assert!(rep.has(ViolationKind::SlotMatchedTwice));
        assert!(rep.violations[0].detail.contains("slot matched twice"));
    }

    #[test]
    fn pinch_point_reported() {
        // two disks sharing only a vertex: vertex 0's corners split in two
        let s = SurfaceDiagram {
            vertex_count: 7,
            faces: vec![square([0, 1, 2, 3]), square([0, 4, 5, 6])],
            gluing: vec![],
            boundary_paths: vec![
                vec![SlotRef::new(0, 0), SlotRef::new(0, 1), SlotRef::new(0, 2), SlotRef::new(0, 3)],
                vec![SlotRef::new(1, 0), SlotRef::new(1, 1), SlotRef::new(1, 2), SlotRef::new(1, 3)],
            ],
            provenance: None,
        };
        let rep = verify_surface(&s);
        assert!(rep.has(ViolationKind::LinkNotConnected), "{rep:?}");
        assert!(measure(&s).is_err());
    }

    #[test]
    fn bad_boundary_paths_reported() {
        let mut s = SurfaceDiagram {
            vertex_count: 4,
            faces: vec![square([0, 1, 2, 3])],
            gluing: vec![],
            boundary_paths: vec![vec![SlotRef::new(0, 0), SlotRef::new(0, 2)]],
            provenance: None,
        };
        let rep = verify_surface(&s);
        assert!(rep.has(ViolationKind::BoundaryPathNotClosed));
        assert!(rep.has(ViolationKind::BoundaryMismatch));
        s.boundary_paths = vec![(0..4).map(|j| SlotRef::new(0, j)).collect()];
        assert!(verify_surface(&s).is_valid());
        assert!(project_boundary(&s).is_err());
    }

    #[test]
    fn two_disjoint_disks() {
        let s = SurfaceDiagram {
            vertex_count: 8,
            faces: vec![square([0, 1, 2, 3]), square([4, 5, 6, 7])],
            gluing: vec![],
            boundary_paths: vec![
                (0..4).map(|j| SlotRef::new(0, j)).collect(),
                (0..4).map(|j| SlotRef::new(1, j)).collect(),
            ],
            provenance: None,
        };
        let m = measure(&s).unwrap();
        assert_eq!((m.component_count, m.euler_characteristic), (2, 2));
    }

    #[test]
    fn torus_is_closed() {
        // one square with opposite sides glued: a torus with one vertex
        let s = SurfaceDiagram {
            vertex_count: 1,
            faces: vec![square([0, 0, 0, 0])],
            gluing: vec![(SlotRef::new(0, 0), SlotRef::new(0, 2)), (SlotRef::new(0, 1), SlotRef::new(0, 3))],
            boundary_paths: vec![],
            provenance: None,
        };
        let m = measure(&s).unwrap();
        assert_eq!((m.euler_characteristic, m.radius, m.genus.clone()), (0, None, vec![1]));
    }

    #[test]
    fn json_round_trip() {
        let b = z2_ball(4);
        let s = assemble_surface(&b, &grid(&b)).unwrap();
        let doc = DiagramDocument { diagram: s.clone(), metrics: Some(measure(&s).unwrap()) };
        let text = serde_json::to_string(&doc).unwrap();
        let back: DiagramDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back.diagram, s);
        let dot = to_dot(&s, &["a".to_string(), "b".to_string()]);
        assert_eq!(dot.matches("color=red").count(), 8);
    }
}
