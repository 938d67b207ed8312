//! Sparse integer chains over edges and 2-cells.

use std::collections::BTreeMap;
use std::marker::PhantomData;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Edges;
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Cells;

/// Sparse map index → nonzero integer. Zero coefficients are never stored.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Chain<D> {
    terms: BTreeMap<usize, i64>,
    _dim: PhantomData<D>,
}

/// An integer 1-chain on ball edges. Produced as a cycle by the boundary map
/// and by loop tracing; [`crate::cayley::CayleyBall::is_cycle`] checks it.
pub type OneCycle = Chain<Edges>;
/// An integer 2-chain on ball cells.
pub type TwoChain = Chain<Cells>;

impl<D> Clone for Chain<D> {
    fn clone(&self) -> Self {
        Chain { terms: self.terms.clone(), _dim: PhantomData }
    }
}

impl<D> Default for Chain<D> {
    fn default() -> Self {
        Chain { terms: BTreeMap::new(), _dim: PhantomData }
    }
}

impl<D> Chain<D> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(index: usize, coeff: i64) -> Self {
        let mut c = Self::zero();
        c.add_term(index, coeff);
        c
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut c = Self::zero();
        for (i, k) in terms {
            c.add_term(i, k);
        }
        c
    }

    pub fn add_term(&mut self, index: usize, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let e = self.terms.entry(index).or_insert(0);
        *e += coeff;
        if *e == 0 {
            self.terms.remove(&index);
        }
    }

    pub fn coeff(&self, index: usize) -> i64 {
        self.terms.get(&index).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.terms.iter().map(|(&i, &k)| (i, k))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.keys().copied()
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    /// Σ|coefficients|: the area of a 2-chain, the length of a 1-chain.
    pub fn l1_norm(&self) -> i64 {
        self.terms.values().map(|k| k.abs()).sum()
    }

    pub fn max_abs_coeff(&self) -> i64 {
        self.terms.values().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn add_scaled(&mut self, other: &Self, factor: i64) {
        for (i, k) in other.iter() {
            self.add_term(i, k * factor);
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut c = self.clone();
        c.add_scaled(other, 1);
        c
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut c = self.clone();
        c.add_scaled(other, -1);
        c
    }

    pub fn scaled(&self, factor: i64) -> Self {
        let mut c = Self::zero();
        c.add_scaled(self, factor);
        c
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1)
    }

    /// Terms whose index passes `keep`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        Self::from_terms(self.iter().filter(|&(i, _)| keep(i)))
    }

    pub fn to_pairs(&self) -> Vec<[i64; 2]> {
        self.iter().map(|(i, k)| [i as i64, k]).collect()
    }
}

impl<D> Serialize for Chain<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de, D> Deserialize<'de> for Chain<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        let pairs: Vec<(usize, i64)> = Vec::deserialize(d)?;
        Ok(Self::from_terms(pairs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_arithmetic() {
        let a = TwoChain::from_terms([(0, 1), (3, -2)]);
        let b = TwoChain::from_terms([(0, -1), (1, 1)]);
        let s = a.plus(&b);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![(1, 1), (3, -2)]);
        assert_eq!(s.l1_norm(), 3);
        assert!(a.minus(&a).is_zero());
        assert_eq!(a.scaled(2).l1_norm(), 6);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[[0,1],[3,-2]]");
        let back: TwoChain = serde_json::from_str("[[0,1],[3,-2]]").unwrap();
        assert_eq!(back, a);
    }
}
