//! Finite presentations, marked relator sets, automorphism lifts and the
//! presentation of an extension by a free group.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::backend::GroupBackend;
use crate::error::{Error, Result};
use crate::word::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    /// Relators are stored cyclically reduced; one that reduces to the empty
    /// word is rejected.
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Presentation> {
        let mut seen = HashSet::new();
        for g in &generators {
            if !valid_name(g) {
                return Err(Error::InvalidPresentation(format!("bad generator name {g:?}")));
            }
            if !seen.insert(g.as_str()) {
                return Err(Error::InvalidPresentation(format!("duplicate generator {g}")));
            }
        }
        let rank = generators.len();
        let mut reduced = Vec::with_capacity(relators.len());
        for r in relators {
            check_range(&r, rank)?;
            let c = r.cyclic_reduce();
            if c.is_empty() {
                return Err(Error::InvalidPresentation(format!(
                    "relator {} is trivial in the free group",
                    r.display_with(&generators)
                )));
            }
            reduced.push(c);
        }
        Ok(Presentation { generators, relators: reduced })
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        parse_word(text, &self.generators, 1, 1)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.display_with(&self.generators).to_string()
    }

    pub fn max_relator_length(&self) -> usize {
        self.relators.iter().map(Word::len).max().unwrap_or(0)
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.chars().all(|c| c.is_alphanumeric() || c == '_')
        && name.chars().next().is_some_and(|c| c.is_alphabetic())
}

pub(crate) fn check_range(w: &Word, rank: usize) -> Result<()> {
    match w.letters().iter().find(|l| l.generator() >= rank) {
        Some(l) => Err(Error::LetterOutOfRange { letter: l.raw(), rank }),
        None => Ok(()),
    }
}

/// Parse a word. Accepted tokens, separated by whitespace or dots:
/// `a`, `a'` or `a^-1` (inverse), `a^3`, `a^-2`, and `1` (empty). A token that
/// is not a generator name is read as a run of one-character names where an
/// uppercase letter stands for the inverse of its lowercase generator, so
/// `abAB` is the commutator. `line`/`column` locate the text for errors.
pub fn parse_word(text: &str, names: &[String], line: usize, column: usize) -> Result<Word> {
    let mut out = Vec::new();
    let mut offset = 0;
    for token in text.split(|c: char| c.is_whitespace() || c == '.') {
        let col = column + text.get(..offset).map_or(offset, |s| s.chars().count());
        offset += token.len() + 1;
        if token.is_empty() || token == "1" {
            continue;
        }
        let err = |message: String| Error::Parse { line, column: col, message };
        let (base, exponent) = match token.split_once('^') {
            Some((b, e)) => {
                let e: i64 = e.parse().map_err(|_| err(format!("bad exponent in {token:?}")))?;
                (b, e)
            }
            None => (token, 1),
        };
        let (base, exponent) = match base.strip_suffix('\'') {
            Some(b) => (b, -exponent),
            None => (base, exponent),
        };
        let letters: Vec<Letter> = if let Some(i) = names.iter().position(|n| n == base) {
            vec![Letter::pos(i)]
        } else {
            compact_letters(base, names).ok_or_else(|| err(format!("unknown generator {base:?}")))?
        };
        let unit = Word::new(letters);
        let piece = if exponent < 0 { unit.inverse() } else { unit };
        for _ in 0..exponent.unsigned_abs() {
            out.extend_from_slice(piece.letters());
        }
    }
    Ok(Word::new(out))
}

fn compact_letters(token: &str, names: &[String]) -> Option<Vec<Letter>> {
    token
        .chars()
        .map(|c| {
            let s = c.to_string();
            if let Some(i) = names.iter().position(|n| *n == s) {
                return Some(Letter::pos(i));
            }
            if c.is_uppercase() {
                let lower: String = c.to_lowercase().collect();
                if let Some(i) = names.iter().position(|n| *n == lower) {
                    return Some(Letter::neg(i));
                }
            }
            None
        })
        .collect()
}

/// How a relator of a presentation arose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RelatorRole {
    /// A relator of the kernel (or of a presentation with no stable letters).
    Kernel,
    /// tᵢ⁻¹ aⱼ tᵢ Φᵢ(aⱼ)⁻¹.
    Conjugation { stable: usize, generator: usize },
}

/// A presentation together with the marked relators that span the 2-cells
/// of its Cayley complex. Here every relator is marked; the marked list is
/// kept so that cells can index it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomPresentation {
    base: Presentation,
    marked: Vec<usize>,
    roles: Vec<RelatorRole>,
    kernel_rank: usize,
}

impl HomPresentation {
    pub fn new(base: Presentation) -> HomPresentation {
        let n = base.relators().len();
        let kernel_rank = base.rank();
        HomPresentation { base, marked: (0..n).collect(), roles: vec![RelatorRole::Kernel; n], kernel_rank }
    }

    pub fn with_marked(base: Presentation, marked: Vec<usize>) -> Result<HomPresentation> {
        let n = base.relators().len();
        if marked.iter().any(|&m| m >= n) {
            return Err(Error::InvalidPresentation("marked relator index out of range".into()));
        }
        if n > 0 && marked.is_empty() {
            return Err(Error::InvalidPresentation("no marked relators".into()));
        }
        let roles = vec![RelatorRole::Kernel; marked.len()];
        let kernel_rank = base.rank();
        Ok(HomPresentation { base, marked, roles, kernel_rank })
    }

    pub fn base(&self) -> &Presentation {
        &self.base
    }

    pub fn generators(&self) -> &[String] {
        self.base.generators()
    }

    pub fn rank(&self) -> usize {
        self.base.rank()
    }

    /// Generators `0..kernel_rank` belong to the kernel; the rest are stable letters.
    pub fn kernel_rank(&self) -> usize {
        self.kernel_rank
    }

    pub fn stable_count(&self) -> usize {
        self.rank() - self.kernel_rank
    }

    pub fn is_stable_generator(&self, g: usize) -> bool {
        g >= self.kernel_rank
    }

    /// Marked relators in cell-index order.
    pub fn marked_relators(&self) -> Vec<Word> {
        self.marked.iter().map(|&i| self.base.relators()[i].clone()).collect()
    }

    pub fn marked_relator(&self, k: usize) -> &Word {
        &self.base.relators()[self.marked[k]]
    }

    pub fn marked_count(&self) -> usize {
        self.marked.len()
    }

    pub fn role(&self, k: usize) -> RelatorRole {
        self.roles[k]
    }

    /// ρ: the longest marked relator.
    pub fn rho(&self) -> usize {
        self.marked.iter().map(|&i| self.base.relators()[i].len()).max().unwrap_or(0)
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        self.base.parse_word(text)
    }

    pub fn format_word(&self, w: &Word) -> String {
        self.base.format_word(w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftDirection {
    Forward,
    Backward,
}

/// Chosen words Φ(a) and Ψ(a) for an automorphism of K and its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutLift {
    name: String,
    stable_index: usize,
    forward: Vec<Word>,
    backward: Vec<Word>,
}

impl AutLift {
    pub fn new(name: impl Into<String>, stable_index: usize, forward: Vec<Word>, backward: Vec<Word>) -> Result<AutLift> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(Error::InvalidPresentation(format!("bad stable letter name {name:?}")));
        }
        if forward.len() != backward.len() {
            return Err(Error::InvalidPresentation(format!(
                "lift {name}: forward defines {} images, backward {}",
                forward.len(),
                backward.len()
            )));
        }
        let rank = forward.len();
        for w in forward.iter().chain(&backward) {
            check_range(w, rank)?;
        }
        Ok(AutLift { name, stable_index, forward, backward })
    }

    pub fn identity(name: impl Into<String>, stable_index: usize, rank: usize) -> AutLift {
        let words: Vec<Word> = (0..rank).map(|i| Word::new(vec![Letter::pos(i)])).collect();
        AutLift { name: name.into(), stable_index, forward: words.clone(), backward: words }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stable_index(&self) -> usize {
        self.stable_index
    }

    pub fn rank(&self) -> usize {
        self.forward.len()
    }

    pub fn forward_images(&self) -> &[Word] {
        &self.forward
    }

    pub fn backward_images(&self) -> &[Word] {
        &self.backward
    }

    pub fn image(&self, dir: LiftDirection, l: Letter) -> Word {
        let table = match dir {
            LiftDirection::Forward => &self.forward,
            LiftDirection::Backward => &self.backward,
        };
        let w = &table[l.generator()];
        if l.is_inverse() {
            w.inverse()
        } else {
            w.clone()
        }
    }

    pub fn apply(&self, dir: LiftDirection, w: &Word) -> Result<Word> {
        check_range(w, self.rank())?;
        Ok(w.substitute(|l| self.image(dir, l)))
    }

    pub fn is_identity(&self) -> bool {
        (0..self.rank()).all(|i| {
            let a = Word::new(vec![Letter::pos(i)]);
            self.forward[i] == a && self.backward[i] == a
        })
    }

    /// Φ(Ψ(a)) = a and Ψ(Φ(a)) = a in K for every generator, and Φ, Ψ send
    /// every relator of K to the identity.
    pub fn check(&self, kernel: &HomPresentation, backend: &GroupBackend) -> Result<()> {
        let fail = |generator: String, detail: String| Error::LiftInverse {
            stable: self.stable_index + 1,
            generator,
            detail,
        };
        if self.rank() != kernel.rank() {
            return Err(fail(
                "-".into(),
                format!("lift has {} images but the kernel has {} generators", self.rank(), kernel.rank()),
            ));
        }
        for i in 0..self.rank() {
            let a = Word::new(vec![Letter::pos(i)]);
            let name = kernel.generators()[i].clone();
            let pf = self.apply(LiftDirection::Forward, &self.apply(LiftDirection::Backward, &a)?)?;
            if !backend.equal_in_group(&pf, &a)? {
                return Err(fail(name, format!("Φ(Ψ(a)) = {}", kernel.format_word(&pf))));
            }
            let fp = self.apply(LiftDirection::Backward, &self.apply(LiftDirection::Forward, &a)?)?;
            if !backend.equal_in_group(&fp, &a)? {
                return Err(fail(name, format!("Ψ(Φ(a)) = {}", kernel.format_word(&fp))));
            }
        }
        for r in kernel.marked_relators() {
            for dir in [LiftDirection::Forward, LiftDirection::Backward] {
                let img = self.apply(dir, &r)?;
                if !backend.equal_in_group(&img, &Word::empty())? {
                    return Err(fail(
                        "-".into(),
                        format!("relator {} maps to a nontrivial element", kernel.format_word(&r)),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Free function form of [`AutLift::apply`].
pub fn apply_lift(lift: &AutLift, dir: LiftDirection, w: &Word) -> Result<Word> {
    lift.apply(dir, w)
}

/// Generators A then t₁…tₙ; relators the marked K relators followed by
/// tᵢ⁻¹ aⱼ tᵢ Φᵢ(aⱼ)⁻¹ for i, then j.
pub fn build_extension_presentation(
    kernel: &HomPresentation,
    lifts: &[AutLift],
    kernel_backend: &GroupBackend,
) -> Result<HomPresentation> {
    let m = kernel.rank();
    for (i, lift) in lifts.iter().enumerate() {
        if lift.stable_index() != i {
            return Err(Error::InvalidPresentation(format!(
                "lift {} has stable index {}, expected {}",
                lift.name(),
                lift.stable_index(),
                i
            )));
        }
        lift.check(kernel, kernel_backend)?;
    }
    let mut generators = kernel.generators().to_vec();
    generators.extend(lifts.iter().map(|l| l.name().to_string()));

    let mut relators = kernel.marked_relators();
    let mut roles = vec![RelatorRole::Kernel; relators.len()];
    for (i, lift) in lifts.iter().enumerate() {
        let t = Letter::pos(m + i);
        for j in 0..m {
            let a = Letter::pos(j);
            let phi = lift.image(LiftDirection::Forward, a).free_reduce();
            let mut r = Word::new(vec![t.inverse(), a, t]);
            r = r.concat(&phi.inverse());
            if !r.is_cyclically_reduced() {
                return Err(Error::InvalidPresentation(format!(
                    "lift {}: image of {} is trivial",
                    lift.name(),
                    kernel.generators()[j]
                )));
            }
            relators.push(r);
            roles.push(RelatorRole::Conjugation { stable: i, generator: j });
        }
    }
    let base = Presentation::new(generators, relators)?;
    let n = base.relators().len();
    Ok(HomPresentation { base, marked: (0..n).collect(), roles, kernel_rank: m })
}
