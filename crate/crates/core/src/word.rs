//! Words over a signed generator alphabet.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A generator or its formal inverse, stored as a signed 1-based index:
/// `+(i+1)` is generator `i`, `-(i+1)` its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(i32);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        let v = generator as i32 + 1;
        Letter(if inverse { -v } else { v })
    }

    pub fn pos(generator: usize) -> Letter {
        Letter::new(generator, false)
    }

    pub fn neg(generator: usize) -> Letter {
        Letter::new(generator, true)
    }

    /// Build from the raw signed index; `None` for zero.
    pub fn from_raw(raw: i32) -> Option<Letter> {
        (raw != 0).then_some(Letter(raw))
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    pub fn generator(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// +1 for a generator, -1 for an inverse.
    pub fn sign(self) -> i64 {
        if self.0 < 0 {
            -1
        } else {
            1
        }
    }

    /// Position in the letter order a < a⁻¹ < b < b⁻¹ < …
    pub fn order_key(self) -> usize {
        2 * self.generator() + usize::from(self.is_inverse())
    }

    pub fn from_order_key(key: usize) -> Letter {
        Letter::new(key / 2, key % 2 == 1)
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A word in the free monoid on generators and inverses. Ordering is
/// lexicographic in the letter order; use [`Word::shortlex_cmp`] for shortlex.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    pub fn empty() -> Word {
        Word(Vec::new())
    }

    /// Build from raw signed indices; `None` if any index is zero.
    pub fn from_raw(raw: &[i32]) -> Option<Word> {
        raw.iter().map(|&r| Letter::from_raw(r)).collect::<Option<Vec<_>>>().map(Word)
    }

    pub fn raw(&self) -> Vec<i32> {
        self.0.iter().map(|l| l.raw()).collect()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    /// Formal inverse: reverse and invert every letter.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Largest generator index used, plus one (0 for the empty word).
    pub fn alphabet_size(&self) -> usize {
        self.0.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[0] != p[1].inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.first(), self.last()) {
                (Some(f), Some(l)) if self.len() > 1 => f != l.inverse(),
                _ => true,
            }
    }

    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn cyclic_reduce(&self) -> Word {
        let w = self.free_reduce();
        let n = w.len();
        let mut i = 0;
        while n >= 2 * (i + 1) && w.0[i] == w.0[n - 1 - i].inverse() {
            i += 1;
        }
        Word(w.0[i..n - i].to_vec())
    }

    /// Rotation starting at position `k`.
    pub fn rotate(&self, k: usize) -> Word {
        if self.is_empty() {
            return Word::empty();
        }
        let k = k % self.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    /// Lexicographically least rotation.
    pub fn min_rotation(&self) -> Word {
        (0..self.len().max(1)).map(|k| self.rotate(k)).min().unwrap_or_default()
    }

    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.cmp(other))
    }

    /// Keep only the letters whose generator passes `keep`.
    pub fn filter_generators(&self, keep: impl Fn(usize) -> bool) -> Word {
        Word(self.0.iter().copied().filter(|l| keep(l.generator())).collect())
    }

    /// Substitute each letter by a word, then freely reduce.
    pub fn substitute(&self, image: impl Fn(Letter) -> Word) -> Word {
        let mut v = Vec::new();
        for &l in &self.0 {
            v.extend(image(l).0);
        }
        Word(v).free_reduce()
    }

    /// Render with generator names; inverses get an apostrophe suffix.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> WordDisplay<'a> {
        WordDisplay { word: self, names }
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<T: IntoIterator<Item = Letter>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    names: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.word.letters().iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match self.names.get(l.generator()) {
                Some(n) => write!(f, "{n}")?,
                None => write!(f, "g{}", l.generator())?,
            }
            if l.is_inverse() {
                write!(f, "'")?;
            }
        }
        Ok(())
    }
}
