//! Kernels of free extensions H = K ⋊ Fₙ: coset coordinates, transfer of
//! fillings along the lifts Φ/Ψ, t-cycles and the push-down to K.
//!
//! A vertex x of the coset Kw is written x = w·κ with κ ∈ K; left
//! multiplication by w carries the Cayley complex of K onto the coset, so
//! chains inside a coset are handled in κ-coordinates and keyed by normal
//! forms rather than ball indices.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{ExtensionBackend, GroupBackend};
use crate::cayley::CayleyBall;
use crate::chain::{OneCycle, TwoChain};
use crate::error::{Error, Result};
use crate::filling::{harea_fill, FillStatus, Solver};
use crate::presentation::{build_extension_presentation, AutLift, HomPresentation, LiftDirection, RelatorRole};
use crate::surface::SurfaceDiagram;
use crate::word::{Letter, Word};

/// Sparse integer chain over arbitrary ordered keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyedChain<K: Ord>(BTreeMap<K, i64>);

// Stored as a list of [key, coefficient] pairs since keys need not be strings.
impl<K: Ord + Serialize> Serialize for KeyedChain<K> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl<'de, K: Ord + Deserialize<'de>> Deserialize<'de> for KeyedChain<K> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(K, i64)> = Vec::deserialize(d)?;
        let mut c = KeyedChain(BTreeMap::new());
        for (k, v) in pairs {
            *c.0.entry(k).or_insert(0) += v;
        }
        c.0.retain(|_, v| *v != 0);
        Ok(c)
    }
}

impl<K: Ord> Default for KeyedChain<K> {
    fn default() -> Self {
        KeyedChain(BTreeMap::new())
    }
}

impl<K: Ord + Clone> KeyedChain<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, key: K, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let e = self.0.entry(key.clone()).or_insert(0);
        *e += coeff;
        if *e == 0 {
            self.0.remove(&key);
        }
    }

    pub fn add_scaled(&mut self, other: &Self, factor: i64) {
        for (k, c) in other.iter() {
            self.add_term(k.clone(), c * factor);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, i64)> + '_ {
        self.0.iter().map(|(k, &c)| (k, c))
    }

    pub fn coeff(&self, key: &K) -> i64 {
        self.0.get(key).copied().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.values().map(|c| c.abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, -1);
        out
    }
}

/// 2-chain on cells (base normal form, relator index).
pub type WordCells = KeyedChain<(Word, usize)>;
/// 1-chain on edges (source normal form, generator index).
pub type WordEdges = KeyedChain<(Word, usize)>;

/// Add `coeff` times the path reading `w` from `start`; returns the endpoint.
fn add_path(backend: &GroupBackend, start: &Word, w: &Word, coeff: i64, out: &mut WordEdges) -> Result<Word> {
    let mut at = start.clone();
    for &l in w.letters() {
        let next = backend.multiply(&at, l)?;
        if l.is_inverse() {
            out.add_term((next.clone(), l.generator()), -coeff);
        } else {
            out.add_term((at, l.generator()), coeff);
        }
        at = next;
    }
    Ok(at)
}

pub fn word_boundary(backend: &GroupBackend, pres: &HomPresentation, c: &WordCells) -> Result<WordEdges> {
    let mut out = WordEdges::zero();
    for ((base, r), k) in c.iter() {
        add_path(backend, base, pres.marked_relator(*r), k, &mut out)?;
    }
    Ok(out)
}

pub fn ball_cells_to_words(ball: &CayleyBall, c: &TwoChain) -> WordCells {
    let mut out = WordCells::zero();
    for (cell, k) in c.iter() {
        let cell = ball.cell(cell);
        out.add_term((ball.vertex_word(cell.base).clone(), cell.relator), k);
    }
    out
}

pub fn ball_edges_to_words(ball: &CayleyBall, g: &OneCycle) -> WordEdges {
    let mut out = WordEdges::zero();
    for (e, k) in g.iter() {
        let edge = ball.edge(e);
        out.add_term((ball.vertex_word(edge.source).clone(), edge.generator), k);
    }
    out
}

fn outside(ball: &CayleyBall, what: String, base: &Word, extra: usize) -> Error {
    Error::LeavesBall {
        radius: ball.radius(),
        prefix: format!("{what} (needs radius about {})", base.len() + extra),
    }
}

pub fn words_to_ball_cells(ball: &CayleyBall, c: &WordCells) -> Result<TwoChain> {
    let pres = ball.presentation();
    let mut out = TwoChain::zero();
    for ((base, r), k) in c.iter() {
        let cell = ball.vertex_of(base).and_then(|v| ball.cell_at(v, *r)).ok_or_else(|| {
            outside(
                ball,
                format!("cell {} at {}", pres.format_word(pres.marked_relator(*r)), pres.format_word(base)),
                base,
                pres.marked_relator(*r).len(),
            )
        })?;
        out.add_term(cell, k);
    }
    Ok(out)
}

pub fn words_to_ball_edges(ball: &CayleyBall, g: &WordEdges) -> Result<OneCycle> {
    let pres = ball.presentation();
    let mut out = OneCycle::zero();
    for ((source, gen), k) in g.iter() {
        let e = ball.vertex_of(source).and_then(|v| ball.edge_between(v, *gen)).ok_or_else(|| {
            outside(ball, format!("edge {} at {}", pres.generators()[*gen], pres.format_word(source)), source, 1)
        })?;
        out.add_term(e, k);
    }
    Ok(out)
}

/// K together with its lifts and the extension built from them.
#[derive(Clone, Debug)]
pub struct FreeExtension {
    kernel: HomPresentation,
    kernel_backend: GroupBackend,
    lifts: Vec<AutLift>,
    presentation: HomPresentation,
    backend: GroupBackend,
}

impl FreeExtension {
    pub fn new(kernel: HomPresentation, kernel_backend: GroupBackend, lifts: Vec<AutLift>) -> Result<FreeExtension> {
        if lifts.is_empty() {
            return Err(Error::InvalidPresentation("an extension needs at least one lift".into()));
        }
        let presentation = build_extension_presentation(&kernel, &lifts, &kernel_backend)?;
        let backend = GroupBackend::Extension(Box::new(ExtensionBackend::new(kernel_backend.clone(), lifts.clone())?));
        Ok(FreeExtension { kernel, kernel_backend, lifts, presentation, backend })
    }

    pub fn kernel(&self) -> &HomPresentation {
        &self.kernel
    }

    pub fn kernel_backend(&self) -> &GroupBackend {
        &self.kernel_backend
    }

    pub fn lifts(&self) -> &[AutLift] {
        &self.lifts
    }

    /// Presentation of H.
    pub fn presentation(&self) -> &HomPresentation {
        &self.presentation
    }

    /// Backend of H.
    pub fn backend(&self) -> &GroupBackend {
        &self.backend
    }

    fn split_backend(&self) -> &ExtensionBackend {
        self.backend.as_extension().expect("extension backend")
    }

    pub fn conjugation_relator(&self, stable: usize, generator: usize) -> usize {
        self.kernel.marked_count() + stable * self.kernel.rank() + generator
    }

    pub fn stable_letter(&self, stable: usize, inverse: bool) -> Letter {
        Letter::new(self.kernel.rank() + stable, inverse)
    }

    /// Reduced stable word of the coset of a normal form.
    pub fn coset_of(&self, nf: &Word) -> Word {
        self.split_backend().split(nf).t_part
    }

    /// κ with x = w·κ for x in the coset Kw.
    pub fn coordinate(&self, coset: &Word, x: &Word) -> Result<Word> {
        let nf = self.backend.normal_form(&coset.inverse().concat(x))?;
        let f = self.split_backend().split(&nf);
        if !f.t_part.is_empty() {
            return Err(Error::Invariant(format!(
                "{} is not in the coset of {}",
                self.presentation.format_word(x),
                self.presentation.format_word(coset)
            )));
        }
        Ok(f.k_part)
    }

    /// Normal form of w·κ.
    pub fn place(&self, coset: &Word, kappa: &Word) -> Result<Word> {
        self.backend.normal_form(&coset.concat(kappa))
    }

    /// Image of a kernel element under a lift, as a K normal form.
    pub fn lift_vertex(&self, lift: usize, dir: LiftDirection, kappa: &Word) -> Result<Word> {
        self.kernel_backend.normal_form(&self.lifts[lift].apply(dir, kappa)?)
    }

    /// Edge (κ, a) goes to the path reading the image of a from the image of κ.
    pub fn map_cycle(&self, lift: usize, dir: LiftDirection, g: &WordEdges) -> Result<WordEdges> {
        let mut out = WordEdges::zero();
        for ((kappa, a), k) in g.iter() {
            let start = self.lift_vertex(lift, dir, kappa)?;
            add_path(&self.kernel_backend, &start, &self.lifts[lift].image(dir, Letter::pos(*a)), k, &mut out)?;
        }
        Ok(out)
    }

    /// Left translate of a kernel chain by g ∈ K.
    pub fn translate(&self, g: &Word, c: &WordCells) -> Result<WordCells> {
        let mut out = WordCells::zero();
        for ((base, r), k) in c.iter() {
            out.add_term((self.kernel_backend.normal_form(&g.concat(base))?, *r), k);
        }
        Ok(out)
    }

    /// Kernel chain in κ-coordinates moved onto the coset Kw as H cells.
    pub fn into_coset(&self, coset: &Word, c: &WordCells) -> Result<WordCells> {
        let mut out = WordCells::zero();
        for ((kappa, r), k) in c.iter() {
            out.add_term((self.place(coset, kappa)?, *r), k);
        }
        Ok(out)
    }

    /// The conjugation cell for (stable, generator) whose a-edge starts at
    /// w·κ in the coset Kw.
    pub fn conjugation_cell(&self, a_side: &Word, kappa: &Word, stable: usize, generator: usize) -> Result<(Word, usize)> {
        let t = Word::new(vec![self.stable_letter(stable, false)]);
        let base = self.backend.normal_form(&a_side.concat(kappa).concat(&t))?;
        Ok((base, self.conjugation_relator(stable, generator)))
    }

    pub fn kernel_boundary(&self, c: &WordCells) -> Result<WordEdges> {
        word_boundary(&self.kernel_backend, &self.kernel, c)
    }

    pub fn boundary(&self, c: &WordCells) -> Result<WordEdges> {
        word_boundary(&self.backend, &self.presentation, c)
    }

    /// Cosets met by a cell of H: one for kernel cells, the a-side and the
    /// Φ-side for conjugation cells.
    fn cell_cosets(&self, base: &Word, relator: usize) -> Vec<Word> {
        let here = self.coset_of(base);
        match self.presentation.role(relator) {
            RelatorRole::Kernel => vec![here],
            RelatorRole::Conjugation { stable, .. } => {
                let mut a_side = here.clone();
                a_side.push(self.stable_letter(stable, true));
                vec![a_side.free_reduce(), here]
            }
        }
    }

    pub fn cosets_of(&self, c: &WordCells) -> BTreeSet<Word> {
        c.iter().flat_map(|((base, r), _)| self.cell_cosets(base, *r)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Φ(r) for a kernel relator r.
    PhiRelator,
    /// Ψ(r).
    PsiRelator,
    /// Ψ(Φ(r)).
    PsiPhiRelator,
    /// a⁻¹·Ψ(Φ(a)) for a kernel generator a.
    PsiPhiCollar,
    /// a⁻¹·Φ(Ψ(a)).
    PhiPsiCollar,
}

/// A filling of a fixed loop at the identity of K.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub lift: usize,
    pub kind: CertificateKind,
    /// Relator index or generator index, depending on the kind.
    pub index: usize,
    pub word: String,
    pub area: i64,
    /// (base normal form, relator, coefficient).
    pub chain: Vec<(Word, usize, i64)>,
}

impl Certificate {
    pub fn cells(&self) -> WordCells {
        let mut out = WordCells::zero();
        for (base, r, k) in &self.chain {
            out.add_term((base.clone(), *r), *k);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferConstants {
    #[serde(rename = "C")]
    pub c: i64,
    #[serde(rename = "C_prime")]
    pub c_prime: i64,
    #[serde(rename = "C_double_prime")]
    pub c_double_prime: i64,
    pub rho: usize,
    #[serde(rename = "M")]
    pub m: i64,
    pub ball_radius: usize,
    pub certificates: Vec<Certificate>,
}

impl TransferConstants {
    pub fn certificate(&self, lift: usize, kind: CertificateKind, index: usize) -> Result<&Certificate> {
        self.certificates
            .iter()
            .find(|c| c.lift == lift && c.kind == kind && c.index == index)
            .ok_or_else(|| Error::Invariant(format!("missing {kind:?} certificate {index} for lift {lift}")))
    }
}

/// M = max{C, C′, C″(2ρ+1), 1}.
pub fn combine_constants(c: i64, c_prime: i64, c_double_prime: i64, rho: usize) -> i64 {
    c.max(c_prime).max(c_double_prime * (2 * rho as i64 + 1)).max(1)
}

/// Fill every certificate loop inside the K ball of the given radius and
/// take the maxima of their areas.
pub fn compute_constants(ext: &FreeExtension, ball_radius: usize) -> Result<TransferConstants> {
    use CertificateKind::*;
    use LiftDirection::{Backward, Forward};
    let ball = CayleyBall::build(ext.kernel_backend(), ext.kernel(), ball_radius)?;
    let mut jobs = Vec::new();
    for (i, lift) in ext.lifts().iter().enumerate() {
        for r in 0..ext.kernel().marked_count() {
            let rel = ext.kernel().marked_relator(r);
            let phi = lift.apply(Forward, rel)?;
            jobs.push((i, PhiRelator, r, phi.clone()));
            jobs.push((i, PsiRelator, r, lift.apply(Backward, rel)?));
            jobs.push((i, PsiPhiRelator, r, lift.apply(Backward, &phi)?));
        }
        for a in 0..ext.kernel().rank() {
            let aw = Word::new(vec![Letter::pos(a)]);
            let psiphi = lift.apply(Backward, &lift.apply(Forward, &aw)?)?;
            let phipsi = lift.apply(Forward, &lift.apply(Backward, &aw)?)?;
            jobs.push((i, PsiPhiCollar, a, aw.inverse().concat(&psiphi)));
            jobs.push((i, PhiPsiCollar, a, aw.inverse().concat(&phipsi)));
        }
    }
    let certificates = jobs
        .par_iter()
        .map(|(lift, kind, index, word)| certify(ext, &ball, *lift, *kind, *index, word))
        .collect::<Result<Vec<_>>>()?;
    let max_of = |kinds: &[CertificateKind]| {
        certificates.iter().filter(|c| kinds.contains(&c.kind)).map(|c| c.area).max().unwrap_or(0)
    };
    let c = max_of(&[PhiRelator]);
    // Ψ is applied to the cells of the given filling, so the Ψ(r)
    // certificates bound the area as well as the ΨΦ(r) ones.
    let c_prime = max_of(&[PsiRelator, PsiPhiRelator]);
    let c_double_prime = max_of(&[PsiPhiCollar]);
    let rho = ext.presentation().rho();
    Ok(TransferConstants {
        c,
        c_prime,
        c_double_prime,
        rho,
        m: combine_constants(c, c_prime, c_double_prime, rho),
        ball_radius,
        certificates,
    })
}

fn certify(
    ext: &FreeExtension,
    ball: &CayleyBall,
    lift: usize,
    kind: CertificateKind,
    index: usize,
    word: &Word,
) -> Result<Certificate> {
    let w = word.free_reduce();
    let text = ext.kernel().format_word(&w);
    let mut cert = Certificate { lift, kind, index, word: text.clone(), area: 0, chain: Vec::new() };
    if w.is_empty() {
        return Ok(cert);
    }
    let too_small = |why: &str| Error::Infeasible {
        radius: ball.radius(),
        detail: format!("certificate loop {text} {why}; use a larger radius"),
    };
    let gamma = ball.loop_to_cycle(0, &w).map_err(|e| match e {
        Error::LeavesBall { .. } => too_small("leaves the ball"),
        other => other,
    })?;
    let fill = harea_fill(ball, &gamma, Solver::ExactIlp)?;
    if fill.status != FillStatus::Optimal {
        return Err(too_small("has no optimal filling inside the ball"));
    }
    cert.area = fill.area;
    cert.chain = fill
        .chain
        .iter()
        .map(|(cell, k)| {
            let c = ball.cell(cell);
            (ball.vertex_word(c.base).clone(), c.relator, k)
        })
        .collect();
    Ok(cert)
}

/// Replace each cell of a kernel chain at κ by the certificate of the lift
/// image of its relator, translated to the image of κ.
pub fn transport_filling(
    ext: &FreeExtension,
    constants: &TransferConstants,
    lift: usize,
    dir: LiftDirection,
    c: &WordCells,
) -> Result<WordCells> {
    let kind = match dir {
        LiftDirection::Forward => CertificateKind::PhiRelator,
        LiftDirection::Backward => CertificateKind::PsiRelator,
    };
    let mut out = WordCells::zero();
    for ((kappa, r), k) in c.iter() {
        let cert = constants.certificate(lift, kind, *r)?.cells();
        let g = ext.lift_vertex(lift, dir, kappa)?;
        out.add_scaled(&ext.translate(&g, &cert)?, k);
    }
    Ok(out)
}

/// Chain with boundary ΨΦ(γ) − γ (or ΦΨ(γ) − γ): one translated collar
/// certificate per edge of γ.
pub fn collar_chain(
    ext: &FreeExtension,
    constants: &TransferConstants,
    lift: usize,
    kind: CertificateKind,
    g: &WordEdges,
) -> Result<WordCells> {
    let mut out = WordCells::zero();
    for ((kappa, a), k) in g.iter() {
        let start = ext.kernel_backend().multiply(kappa, Letter::pos(*a))?;
        let cert = constants.certificate(lift, kind, *a)?.cells();
        out.add_scaled(&ext.translate(&start, &cert)?, k);
    }
    Ok(out)
}

/// Filling of Φ(γ) from a filling c of γ, in κ-coordinates.
pub fn push_forward_words(ext: &FreeExtension, constants: &TransferConstants, lift: usize, c: &WordCells) -> Result<WordCells> {
    transport_filling(ext, constants, lift, LiftDirection::Forward, c)
}

/// Filling of γ from a filling c′ of Φ(γ): Ψ(c′) minus the collar of γ.
pub fn pull_back_words(
    ext: &FreeExtension,
    constants: &TransferConstants,
    lift: usize,
    c_prime: &WordCells,
    gamma: &WordEdges,
) -> Result<WordCells> {
    let mut out = transport_filling(ext, constants, lift, LiftDirection::Backward, c_prime)?;
    out.add_scaled(&collar_chain(ext, constants, lift, CertificateKind::PsiPhiCollar, gamma)?, -1);
    Ok(out)
}

/// Ball version of [`push_forward_words`]; checks ∂c′ = Φ(∂c) and
/// Area(c′) ≤ C·Area(c).
pub fn push_forward_filling(
    ext: &FreeExtension,
    k_ball: &CayleyBall,
    c: &TwoChain,
    lift: usize,
    constants: &TransferConstants,
) -> Result<TwoChain> {
    let cw = ball_cells_to_words(k_ball, c);
    let out = push_forward_words(ext, constants, lift, &cw)?;
    let expect = ext.map_cycle(lift, LiftDirection::Forward, &ext.kernel_boundary(&cw)?)?;
    if ext.kernel_boundary(&out)? != expect {
        return Err(Error::Invariant("pushed-forward chain has the wrong boundary".into()));
    }
    if out.l1_norm() > constants.c * c.l1_norm() {
        return Err(Error::Invariant(format!(
            "pushed-forward area {} exceeds C·{} with C = {}",
            out.l1_norm(),
            c.l1_norm(),
            constants.c
        )));
    }
    words_to_ball_cells(k_ball, &out)
}

/// Ball version of [`pull_back_words`]; checks ∂c″ = γ and
/// Area(c″) ≤ C′·Area(c′) + C″·|γ|.
pub fn pull_back_filling(
    ext: &FreeExtension,
    k_ball: &CayleyBall,
    c_prime: &TwoChain,
    gamma: &OneCycle,
    lift: usize,
    constants: &TransferConstants,
) -> Result<TwoChain> {
    let cw = ball_cells_to_words(k_ball, c_prime);
    let gw = ball_edges_to_words(k_ball, gamma);
    if ext.kernel_boundary(&cw)? != ext.map_cycle(lift, LiftDirection::Forward, &gw)? {
        return Err(Error::Unsupported("the chain does not fill the lift image of the cycle".into()));
    }
    let out = pull_back_words(ext, constants, lift, &cw, &gw)?;
    if ext.kernel_boundary(&out)? != gw {
        return Err(Error::Invariant("pulled-back chain has the wrong boundary".into()));
    }
    let bound = constants.c_prime * c_prime.l1_norm() + constants.c_double_prime * gamma.l1_norm();
    if out.l1_norm() > bound {
        return Err(Error::Invariant(format!("pulled-back area {} exceeds {bound}", out.l1_norm())));
    }
    words_to_ball_cells(k_ball, &out)
}

/// Conjugation faces of one stable letter joining a coset pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TCycle {
    pub stable_letter: usize,
    /// Coset holding the a-edges of the faces.
    pub a_side: Word,
    /// a_side·t, holding the Φ(a) paths.
    pub phi_side: Word,
    /// The shorter of the two coset words.
    pub inner_coset: Word,
    pub outer_coset: Word,
    pub faces: Vec<usize>,
    pub inner_boundary: OneCycle,
    pub outer_boundary: OneCycle,
}

/// Group the stable-letter faces of a diagram by (stable letter, coset pair)
/// and split each group's boundary between its two cosets.
pub fn detect_t_cycles(h_ball: &CayleyBall, s: &SurfaceDiagram) -> Result<Vec<TCycle>> {
    if h_ball.backend().as_extension().is_none() {
        return Err(Error::Unsupported("t-cycles need an extension backend".into()));
    }
    let prov = s.provenance.as_ref().ok_or_else(|| Error::InvalidSurface("diagram has no provenance".into()))?;
    for r in s.unmatched_slots() {
        if h_ball.is_stable_edge(prov.slot_images[r.face][r.slot].0) {
            return Err(Error::Unsupported("the diagram boundary contains a stable-letter edge".into()));
        }
    }
    type Group = (Word, Vec<usize>, OneCycle, OneCycle);
    let mut groups: BTreeMap<(usize, Word), Group> = BTreeMap::new();
    for (f, &(cell, _)) in prov.face_cells.iter().enumerate() {
        let RelatorRole::Conjugation { stable, .. } = h_ball.relator_role(cell) else {
            continue;
        };
        let c = h_ball.cell(cell);
        let a_side = h_ball.coset_label(c.corners[1]).clone();
        let phi_side = h_ball.coset_label(c.base).clone();
        let g = groups
            .entry((stable, a_side.clone()))
            .or_insert_with(|| (phi_side.clone(), Vec::new(), OneCycle::zero(), OneCycle::zero()));
        g.1.push(f);
        for &(e, sign) in &prov.slot_images[f] {
            if h_ball.is_stable_edge(e) {
                continue;
            }
            let coset = h_ball.coset_label(h_ball.edge(e).source);
            if *coset == a_side {
                g.2.add_term(e, sign);
            } else if *coset == phi_side {
                g.3.add_term(e, sign);
            } else {
                return Err(Error::Invariant(format!("face {f} has an edge outside its coset pair")));
            }
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((stable, a_side), (phi_side, faces, a_bd, phi_bd)) in groups {
        let a_inner = a_side.len() < phi_side.len();
        let (inner_coset, outer_coset, inner_boundary, outer_boundary) = if a_inner {
            (a_side.clone(), phi_side.clone(), a_bd, phi_bd)
        } else {
            (phi_side.clone(), a_side.clone(), phi_bd, a_bd)
        };
        if !h_ball.is_cycle(&inner_boundary) || !h_ball.is_cycle(&outer_boundary) {
            return Err(Error::Invariant(format!("t-cycle boundary at coset {a_side:?} is not closed")));
        }
        out.push(TCycle {
            stable_letter: stable,
            a_side,
            phi_side,
            inner_coset,
            outer_coset,
            faces,
            inner_boundary,
            outer_boundary,
        });
    }
    Ok(out)
}

/// Area function values by length, with where they came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AreaTable {
    pub values: Vec<i64>,
    pub source: String,
}

impl AreaTable {
    pub fn new(values: Vec<i64>, source: impl Into<String>) -> AreaTable {
        AreaTable { values, source: source.into() }
    }

    pub fn at(&self, n: usize) -> Result<i64> {
        self.values
            .get(n)
            .copied()
            .ok_or_else(|| Error::Coverage(format!("area table stops at {}, needs {n}", self.values.len().saturating_sub(1))))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepDirection {
    /// Coset word ends in t⁻¹: the coset chain is pushed forward.
    PushForward,
    /// Coset word ends in t: the coset chain is pulled back.
    PullBack,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushdownStep {
    pub coset: String,
    pub coset_length: usize,
    pub stable_letter: usize,
    pub direction: StepDirection,
    pub area_before: i64,
    pub area_after: i64,
    /// Kernel cells in the eliminated coset.
    pub coset_area: i64,
    pub t_cycle_area: i64,
    pub transferred_area: i64,
    /// C·coset_area, or C′·coset_area + C″·inner_length.
    pub lemma_bound: i64,
    pub inner_length: i64,
    /// Exact length of the boundary inside the eliminated coset.
    pub outer_length: i64,
    /// |γ| + 2ρ·area_before, which must dominate `outer_length`.
    pub outer_length_bound: i64,
    /// M·area_before + M·f(|γ|).
    pub step_bound: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushdownTrace {
    pub input_cycle: OneCycle,
    pub cycle_length: i64,
    pub input_area: i64,
    /// Cosets met by the input chain, by length then lexicographically.
    pub cosets: Vec<String>,
    pub depth: usize,
    #[serde(rename = "M")]
    pub m: i64,
    pub f_value: i64,
    pub f_source: String,
    pub steps: Vec<PushdownStep>,
    pub final_chain: TwoChain,
    pub final_area: i64,
    pub surviving_cosets: Vec<String>,
    /// M^(depth+1)·f(|γ|).
    pub final_bound: String,
    pub final_holds: bool,
}

fn sorted_cosets(ext: &FreeExtension, set: &BTreeSet<Word>) -> Vec<String> {
    let mut v: Vec<&Word> = set.iter().collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    v.into_iter().map(|w| ext.presentation().format_word(w)).collect()
}

/// Turn an H-filling of a kernel cycle into a kernel filling by eliminating
/// the deepest coset repeatedly (lexicographically smallest among equals).
pub fn push_down(
    ext: &FreeExtension,
    h_ball: &CayleyBall,
    gamma: &OneCycle,
    c: &TwoChain,
    constants: &TransferConstants,
    f_table: &AreaTable,
) -> Result<PushdownTrace> {
    if h_ball.boundary_2(c) != *gamma {
        return Err(Error::Unsupported("the chain does not fill the cycle".into()));
    }
    if gamma.indices().any(|e| h_ball.is_stable_edge(e) || !h_ball.coset_label(h_ball.edge(e).source).is_empty()) {
        return Err(Error::Unsupported("the cycle must lie in the kernel coset".into()));
    }
    let cycle_length = gamma.l1_norm();
    let f = f_table.at(cycle_length as usize)?;
    let m = constants.m;
    let mut cur = ball_cells_to_words(h_ball, c);
    let initial = ext.cosets_of(&cur);
    let depth = initial.iter().map(Word::len).max().unwrap_or(0);
    let kr = ext.kernel().rank();
    let mut steps = Vec::new();

    loop {
        let cosets = ext.cosets_of(&cur);
        let Some(w) = cosets.iter().filter(|w| !w.is_empty()).max_by(|a, b| a.len().cmp(&b.len()).then(b.cmp(a))) else {
            break;
        };
        let w = w.clone();
        let last = w.last().expect("nonempty coset word");
        let stable = last.generator() - kr;
        let parent = Word::new(w.letters()[..w.len() - 1].to_vec());

        let mut coset_chain = WordCells::zero();
        let mut t_cycle = WordCells::zero();
        let mut a_edges = WordEdges::zero();
        for ((base, r), k) in cur.iter() {
            match ext.presentation().role(*r) {
                RelatorRole::Kernel => {
                    if ext.coset_of(base) == w {
                        coset_chain.add_term((ext.coordinate(&w, base)?, *r), k);
                    }
                }
                RelatorRole::Conjugation { stable: s, generator } => {
                    let touched = ext.cell_cosets(base, *r);
                    if !touched.contains(&w) {
                        continue;
                    }
                    if s != stable || !touched.contains(&parent) {
                        return Err(Error::Invariant("a deeper coset survived the elimination order".into()));
                    }
                    t_cycle.add_term((base.clone(), *r), k);
                    let corner = ext.backend().multiply(base, ext.stable_letter(s, true))?;
                    a_edges.add_term((ext.coordinate(&touched[0], &corner)?, generator), k);
                }
            }
        }

        let outer_length = ext.kernel_boundary(&coset_chain)?.l1_norm();
        let (direction, transferred, inner, lemma_bound) = if last.is_inverse() {
            // Kw is the a-side: the coset chain fills −(a-edges), its push
            // forward fills Φ of that, which is the boundary left in Kp.
            let d = push_forward_words(ext, constants, stable, &coset_chain)?;
            let inner = ext.map_cycle(stable, LiftDirection::Forward, &a_edges.negated())?;
            let bound = constants.c * coset_chain.l1_norm();
            (StepDirection::PushForward, d, inner, bound)
        } else {
            // Kw is the Φ-side: the coset chain fills Φ(a-edges in Kp).
            if ext.kernel_boundary(&coset_chain)? != ext.map_cycle(stable, LiftDirection::Forward, &a_edges)? {
                return Err(Error::Invariant("coset chain does not fill the outer t-cycle boundary".into()));
            }
            let d = pull_back_words(ext, constants, stable, &coset_chain, &a_edges)?;
            let bound = constants.c_prime * coset_chain.l1_norm() + constants.c_double_prime * a_edges.l1_norm();
            (StepDirection::PullBack, d, a_edges, bound)
        };
        if ext.kernel_boundary(&transferred)? != inner {
            return Err(Error::Invariant("transferred chain misses the inner t-cycle boundary".into()));
        }
        if transferred.l1_norm() > lemma_bound {
            return Err(Error::Invariant(format!(
                "transferred area {} exceeds the lemma bound {lemma_bound}",
                transferred.l1_norm()
            )));
        }

        let area_before = cur.l1_norm();
        cur.add_scaled(&ext.into_coset(&w, &coset_chain)?, -1);
        cur.add_scaled(&t_cycle, -1);
        cur.add_scaled(&ext.into_coset(&parent, &transferred)?, 1);
        let area_after = cur.l1_norm();
        let step = PushdownStep {
            coset: ext.presentation().format_word(&w),
            coset_length: w.len(),
            stable_letter: stable,
            direction,
            area_before,
            area_after,
            coset_area: coset_chain.l1_norm(),
            t_cycle_area: t_cycle.l1_norm(),
            transferred_area: transferred.l1_norm(),
            lemma_bound,
            inner_length: inner.l1_norm(),
            outer_length,
            outer_length_bound: cycle_length + 2 * constants.rho as i64 * area_before,
            step_bound: m * area_before + m * f,
        };
        if step.area_after > step.step_bound || step.outer_length > step.outer_length_bound {
            return Err(Error::Invariant(format!("push-down step at coset {} breaks its bound", step.coset)));
        }
        steps.push(step);
    }

    let surviving = ext.cosets_of(&cur);
    if surviving.iter().any(|w| !w.is_empty()) {
        return Err(Error::Invariant("push-down left cells outside the kernel".into()));
    }
    let final_chain = words_to_ball_cells(h_ball, &cur)?;
    if h_ball.boundary_2(&final_chain) != *gamma {
        return Err(Error::Invariant("push-down output does not fill the cycle".into()));
    }
    let final_area = final_chain.l1_norm();
    let bound = power(m, depth as u32 + 1) * BigUint::from(f.max(0) as u64);
    Ok(PushdownTrace {
        input_cycle: gamma.clone(),
        cycle_length,
        input_area: c.l1_norm(),
        cosets: sorted_cosets(ext, &initial),
        depth,
        m,
        f_value: f,
        f_source: f_table.source.clone(),
        steps,
        final_holds: BigUint::from(final_area as u64) <= bound,
        final_bound: bound.to_string(),
        final_chain,
        final_area,
        surviving_cosets: sorted_cosets(ext, &surviving),
    })
}

fn power(base: i64, exp: u32) -> BigUint {
    BigUint::from(base.max(0) as u64).pow(exp)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundLine {
    pub label: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub f_source: String,
    pub g_value: usize,
    pub lines: Vec<BoundLine>,
    pub holds: bool,
    /// Index of the first failing step, if a step fails.
    pub failed_step: Option<usize>,
}

/// Re-evaluate every inequality of a trace numerically.
pub fn verify_theorem_bound(trace: &PushdownTrace, f_table: &AreaTable, g_value: usize) -> Result<BoundReport> {
    if g_value < trace.depth {
        return Err(Error::Coverage(format!("g value {g_value} is below the coset depth {}", trace.depth)));
    }
    let f = f_table.at(trace.cycle_length as usize)?;
    let m = trace.m;
    let mut lines = Vec::new();
    let mut failed_step = None;
    let line = |label: String, lhs: String, rhs: String, holds: bool| BoundLine { label, lhs, rhs, holds };
    for (k, s) in trace.steps.iter().enumerate() {
        let rhs = m * s.area_before + m * f;
        let ok = s.area_after <= rhs;
        if !ok && failed_step.is_none() {
            failed_step = Some(k);
        }
        lines.push(line(
            format!("step {k} at {}: area after <= M*area before + M*f(|gamma|)", s.coset),
            s.area_after.to_string(),
            rhs.to_string(),
            ok,
        ));
        lines.push(line(
            format!("step {k} at {}: transferred area <= lemma bound", s.coset),
            s.transferred_area.to_string(),
            s.lemma_bound.to_string(),
            s.transferred_area <= s.lemma_bound,
        ));
        lines.push(line(
            format!("step {k} at {}: outer length <= |gamma| + 2*rho*area", s.coset),
            s.outer_length.to_string(),
            s.outer_length_bound.to_string(),
            s.outer_length <= s.outer_length_bound,
        ));
    }
    // μ(x) = Mx + M·f applied once per step
    let mut mu = BigUint::from(trace.input_area.max(0) as u64);
    for _ in &trace.steps {
        mu = mu * BigUint::from(m.max(0) as u64) + BigUint::from((m * f).max(0) as u64);
    }
    let final_area = BigUint::from(trace.final_area.max(0) as u64);
    lines.push(line(
        "final area <= mu iterated over the steps".into(),
        trace.final_area.to_string(),
        mu.to_string(),
        final_area <= mu,
    ));
    let fb = BigUint::from(f.max(0) as u64);
    let depth_bound = power(m, trace.depth as u32 + 1) * fb.clone();
    lines.push(line(
        "final area <= M^(k+1)*f(|gamma|)".into(),
        trace.final_area.to_string(),
        depth_bound.to_string(),
        final_area <= depth_bound,
    ));
    let g_bound = power(m, 2 * g_value as u32) * fb;
    lines.push(line(
        format!("final area <= (M^2)^g*f(|gamma|), g = {g_value}"),
        trace.final_area.to_string(),
        g_bound.to_string(),
        final_area <= g_bound,
    ));
    let holds = lines.iter().all(|l| l.holds);
    Ok(BoundReport { f_source: f_table.source.clone(), g_value, lines, holds, failed_step })
}

/// An H-filling of ∂c₀ (c₀ a kernel chain) that climbs through the cosets
/// along `path`: each stable letter adds the conjugation cells over the
/// current boundary and moves the filling across with the lift.
pub fn route_filling(ext: &FreeExtension, constants: &TransferConstants, c0: &WordCells, path: &[Letter]) -> Result<WordCells> {
    let kr = ext.kernel().rank();
    if path.iter().any(|l| l.generator() < kr || l.generator() >= ext.presentation().rank()) {
        return Err(Error::Unsupported("route paths use stable letters only".into()));
    }
    if !Word::new(path.to_vec()).is_reduced() {
        return Err(Error::Unsupported("route path must be freely reduced".into()));
    }
    let mut coset = Word::empty();
    let mut fill = c0.clone();
    let mut gamma = ext.kernel_boundary(c0)?;
    let mut out = WordCells::zero();
    for &s in path {
        let i = s.generator() - kr;
        let mut next = coset.clone();
        next.push(s);
        if !s.is_inverse() {
            for ((kappa, j), m) in gamma.iter() {
                out.add_term(ext.conjugation_cell(&coset, kappa, i, *j)?, m);
            }
            gamma = ext.map_cycle(i, LiftDirection::Forward, &gamma)?;
            fill = transport_filling(ext, constants, i, LiftDirection::Forward, &fill)?;
        } else {
            let beta = ext.map_cycle(i, LiftDirection::Backward, &gamma)?;
            for ((kappa, j), m) in beta.iter() {
                out.add_term(ext.conjugation_cell(&next, kappa, i, *j)?, -m);
            }
            let collar = collar_chain(ext, constants, i, CertificateKind::PhiPsiCollar, &gamma)?;
            out.add_scaled(&ext.into_coset(&coset, &collar)?, -1);
            fill = transport_filling(ext, constants, i, LiftDirection::Backward, &fill)?;
            gamma = beta;
        }
        coset = next;
    }
    out.add_scaled(&ext.into_coset(&coset, &fill)?, 1);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filling::{harea_fill_with, BruteForceConfig, FillConfig};
    use crate::presentation::Presentation;
    use crate::surface::assemble_surface;
    use proptest::prelude::*;

    fn w(raw: &[i32]) -> Word {
        Word::from_raw(raw).unwrap()
    }

    fn z2() -> HomPresentation {
        HomPresentation::new(Presentation::new(vec!["a".into(), "b".into()], vec![w(&[1, 2, -1, -2])]).unwrap())
    }

    fn identity_ext() -> FreeExtension {
        FreeExtension::new(z2(), GroupBackend::free_abelian(2), vec![AutLift::identity("t", 0, 2)]).unwrap()
    }

    fn shear_ext() -> FreeExtension {
        let lift = AutLift::new("t", 0, vec![w(&[1, 2]), w(&[2])], vec![w(&[1, -2]), w(&[2])]).unwrap();
        FreeExtension::new(z2(), GroupBackend::free_abelian(2), vec![lift]).unwrap()
    }

    fn commutator_cell() -> WordCells {
        let mut c = WordCells::zero();
        c.add_term((Word::empty(), 0), 1);
        c
    }

    #[test]
    fn identity_constants() {
        let ext = identity_ext();
        let k = compute_constants(&ext, 3).unwrap();
        assert_eq!((k.c, k.c_prime, k.c_double_prime, k.rho, k.m), (1, 1, 0, 4, 1));
    }

    #[test]
    fn shear_constants_match_brute_force() {
        let ext = shear_ext();
        let k = compute_constants(&ext, 4).unwrap();
        assert_eq!(k.rho, 5);
        assert_eq!(k.c_double_prime, 0);
        let ball = CayleyBall::build(ext.kernel_backend(), ext.kernel(), 4).unwrap();
        let mut cfg = FillConfig::with_solver(Solver::BruteForce);
        cfg.brute = BruteForceConfig { coefficient_bound: Some(1), ..BruteForceConfig::default() };
        for cert in &k.certificates {
            let word = ext.kernel().parse_word(&cert.word).unwrap();
            let gamma = ball.loop_to_cycle(0, &word).unwrap();
            let oracle = harea_fill_with(&ball, &gamma, &cfg).unwrap();
            assert_eq!(oracle.area, cert.area, "{:?} {}", cert.kind, cert.word);
        }
        let phi = k.certificate(0, CertificateKind::PhiRelator, 0).unwrap();
        assert_eq!(phi.area, 1);
    }

    #[test]
    fn transfers_on_identity_lift_are_identity() {
        let ext = identity_ext();
        let k = compute_constants(&ext, 3).unwrap();
        let ball = CayleyBall::build(ext.kernel_backend(), ext.kernel(), 4).unwrap();
        let c = TwoChain::from_terms([(ball.cell_at(0, 0).unwrap(), 1), (ball.cell_at(1, 0).unwrap(), -2)]);
        assert_eq!(push_forward_filling(&ext, &ball, &c, 0, &k).unwrap(), c);
        let gamma = ball.boundary_2(&c);
        assert_eq!(pull_back_filling(&ext, &ball, &c, &gamma, 0, &k).unwrap(), c);
        assert!(push_forward_filling(&ext, &ball, &TwoChain::zero(), 0, &k).unwrap().is_zero());
    }

    #[test]
    fn shear_transfers_respect_bounds() {
        let ext = shear_ext();
        let k = compute_constants(&ext, 4).unwrap();
        let ball = CayleyBall::build(ext.kernel_backend(), ext.kernel(), 6).unwrap();
        let c = TwoChain::single(ball.cell_at(0, 0).unwrap(), 1);
        let pushed = push_forward_filling(&ext, &ball, &c, 0, &k).unwrap();
        assert!(pushed.l1_norm() <= k.c);
        let direct = harea_fill(&ball, &ball.boundary_2(&pushed), Solver::ExactIlp).unwrap();
        assert!(direct.area <= pushed.l1_norm());

        let gamma = ball.loop_to_cycle(0, &w(&[1, 2, -1, -2])).unwrap();
        let image = words_to_ball_edges(
            &ball,
            &ext.map_cycle(0, LiftDirection::Forward, &ball_edges_to_words(&ball, &gamma)).unwrap(),
        )
        .unwrap();
        let c_prime = harea_fill(&ball, &image, Solver::ExactIlp).unwrap().chain;
        let back = pull_back_filling(&ext, &ball, &c_prime, &gamma, 0, &k).unwrap();
        assert_eq!(ball.boundary_2(&back), gamma);
        assert!(back.l1_norm() <= k.c_prime * c_prime.l1_norm() + k.c_double_prime * 4);
        assert!(harea_fill(&ball, &gamma, Solver::ExactIlp).unwrap().area <= back.l1_norm());
    }

    fn worked_example() -> (FreeExtension, TransferConstants, CayleyBall, TwoChain, OneCycle) {
        let ext = identity_ext();
        let k = compute_constants(&ext, 3).unwrap();
        let h_ball = CayleyBall::build(ext.backend(), ext.presentation(), 5).unwrap();
        let routed = route_filling(&ext, &k, &commutator_cell(), &[Letter::pos(2)]).unwrap();
        let c = words_to_ball_cells(&h_ball, &routed).unwrap();
        let gamma = h_ball.loop_to_cycle(0, &w(&[1, 2, -1, -2])).unwrap();
        (ext, k, h_ball, c, gamma)
    }

    #[test]
    fn routed_filling_has_area_five() {
        let (_, _, h_ball, c, gamma) = worked_example();
        assert_eq!(c.l1_norm(), 5);
        assert_eq!(h_ball.boundary_2(&c), gamma);
    }

    #[test]
    fn t_cycle_of_worked_example() {
        let (_, _, h_ball, c, _) = worked_example();
        let s = assemble_surface(&h_ball, &c).unwrap();
        let cycles = detect_t_cycles(&h_ball, &s).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].faces.len(), 4);
        assert!(cycles[0].inner_coset.is_empty());
        assert_eq!(cycles[0].inner_boundary.l1_norm(), 4);

        let doubled = assemble_surface(&h_ball, &c.scaled(2)).unwrap();
        let cycles = detect_t_cycles(&h_ball, &doubled).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].faces.len(), 8);

        let k_only = assemble_surface(&h_ball, &TwoChain::single(h_ball.cell_at(0, 0).unwrap(), 1)).unwrap();
        assert!(detect_t_cycles(&h_ball, &k_only).unwrap().is_empty());
        let conj = h_ball.cell_at(h_ball.vertex_of(&w(&[3])).unwrap(), 1).unwrap();
        let single = assemble_surface(&h_ball, &TwoChain::single(conj, 1)).unwrap();
        assert!(matches!(detect_t_cycles(&h_ball, &single), Err(Error::Unsupported(_))));
    }

    #[test]
    fn worked_push_down() {
        let (ext, k, h_ball, c, gamma) = worked_example();
        let f = AreaTable::new(vec![0, 0, 0, 0, 1, 1, 2, 2, 4], "test");
        let trace = push_down(&ext, &h_ball, &gamma, &c, &k, &f).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].direction, StepDirection::PullBack);
        assert_eq!((trace.input_area, trace.final_area, trace.depth), (5, 1, 1));
        assert_eq!(trace.surviving_cosets, vec!["1".to_string()]);
        assert!(trace.final_holds);
        assert_eq!(harea_fill(&h_ball, &gamma, Solver::ExactIlp).unwrap().area, 1);
        let report = verify_theorem_bound(&trace, &f, 1).unwrap();
        assert!(report.holds, "{report:?}");

        let mut bad = trace.clone();
        bad.steps[0].area_after = 100;
        let report = verify_theorem_bound(&bad, &f, 1).unwrap();
        assert!(!report.holds);
        assert_eq!(report.failed_step, Some(0));
        assert!(matches!(verify_theorem_bound(&trace, &AreaTable::new(vec![0; 3], "short"), 1), Err(Error::Coverage(_))));
    }

    #[test]
    fn push_down_of_kernel_chain_is_trivial() {
        let (ext, k, h_ball, _, gamma) = worked_example();
        let c = TwoChain::single(h_ball.cell_at(0, 0).unwrap(), 1);
        let f = AreaTable::new(vec![0, 0, 0, 0, 1], "test");
        let trace = push_down(&ext, &h_ball, &gamma, &c, &k, &f).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(trace.final_chain, c);
        assert!(verify_theorem_bound(&trace, &f, 0).unwrap().holds);
    }

    #[test]
    fn two_stable_letters_eliminate_deepest_first() {
        let ext = FreeExtension::new(
            z2(),
            GroupBackend::free_abelian(2),
            vec![AutLift::identity("t", 0, 2), AutLift::identity("u", 1, 2)],
        )
        .unwrap();
        let k = compute_constants(&ext, 3).unwrap();
        let h_ball = CayleyBall::build(ext.backend(), ext.presentation(), 5).unwrap();
        let routed = route_filling(&ext, &k, &commutator_cell(), &[Letter::pos(2), Letter::pos(3)]).unwrap();
        let c = words_to_ball_cells(&h_ball, &routed).unwrap();
        let gamma = h_ball.loop_to_cycle(0, &w(&[1, 2, -1, -2])).unwrap();
        let f = AreaTable::new(vec![1; 5], "test");
        let trace = push_down(&ext, &h_ball, &gamma, &c, &k, &f).unwrap();
        assert_eq!(trace.cosets, vec!["1", "t", "t u"]);
        let order: Vec<&str> = trace.steps.iter().map(|s| s.coset.as_str()).collect();
        assert_eq!(order, vec!["t u", "t"]);
        assert_eq!(trace.final_area, 1);
    }

    fn shear_setup() -> &'static (FreeExtension, TransferConstants, CayleyBall) {
        use std::sync::OnceLock;
        static SETUP: OnceLock<(FreeExtension, TransferConstants, CayleyBall)> = OnceLock::new();
        SETUP.get_or_init(|| {
            let ext = shear_ext();
            let k = compute_constants(&ext, 4).unwrap();
            let h_ball = CayleyBall::build(ext.backend(), ext.presentation(), 7).unwrap();
            (ext, k, h_ball)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn shear_push_down_returns_kernel_filling(
            cells in proptest::collection::vec((-1i64..=1, -1i64..=1, prop_oneof![Just(1i64), Just(-1i64)]), 1..3),
            path in prop_oneof![Just(vec![3]), Just(vec![-3]), Just(vec![3, 3])],
        ) {
            let (ext, k, h_ball) = shear_setup();
            let mut c0 = WordCells::zero();
            for (x, y, s) in cells {
                let kappa = ext.kernel_backend().normal_form(&Word::new(
                    std::iter::repeat(Letter::new(0, x < 0)).take(x.unsigned_abs() as usize)
                        .chain(std::iter::repeat(Letter::new(1, y < 0)).take(y.unsigned_abs() as usize))
                        .collect(),
                )).unwrap();
                c0.add_term((kappa, 0), s);
            }
            prop_assume!(!c0.is_zero());
            let path: Vec<Letter> = path.iter().map(|&r| Letter::from_raw(r).unwrap()).collect();
            let routed = route_filling(ext, k, &c0, &path).unwrap();
            let h = words_to_ball_cells(h_ball, &routed).unwrap();
            let gamma = h_ball.boundary_2(&h);
            prop_assert_eq!(&ball_edges_to_words(h_ball, &gamma), &ext.kernel_boundary(&c0).unwrap());
            let f = AreaTable::new(vec![h.l1_norm(); gamma.l1_norm() as usize + 1], "input area");
            let trace = push_down(ext, h_ball, &gamma, &h, k, &f).unwrap();
            prop_assert_eq!(h_ball.boundary_2(&trace.final_chain), gamma.clone());
            prop_assert!(trace.final_holds);
            prop_assert!(verify_theorem_bound(&trace, &f, trace.depth).unwrap().holds);
            let s = assemble_surface(h_ball, &h).unwrap();
            for tc in detect_t_cycles(h_ball, &s).unwrap() {
                prop_assert!(h_ball.is_cycle(&tc.inner_boundary) && h_ball.is_cycle(&tc.outer_boundary));
            }
        }
    }
}
