//! Dense bit sets over cell indices.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type CellId = usize;

const WORD: usize = 64;

/// A subset of `0..universe` stored as a dense bit vector.
///
/// Two sets compare equal only if they share the same universe size; every
/// set built from one [`TransitionSystem`](crate::transition::TransitionSystem)
/// has that system's cell count as its universe.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellSet {
    universe: usize,
    words: Vec<u64>,
}

impl CellSet {
    pub fn new(universe: usize) -> Self {
        CellSet {
            universe,
            words: vec![0; universe.div_ceil(WORD)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::new(universe);
        for w in s.words.iter_mut() {
            *w = !0;
        }
        s.trim();
        s
    }

    pub fn from_cells<I: IntoIterator<Item = CellId>>(universe: usize, cells: I) -> Self {
        let mut s = Self::new(universe);
        for c in cells {
            s.insert(c);
        }
        s
    }

    fn trim(&mut self) {
        let rem = self.universe % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, c: CellId) -> bool {
        c < self.universe && self.words[c / WORD] & (1 << (c % WORD)) != 0
    }

    /// Inserts `c`, returning `true` if it was absent.
    #[inline]
    pub fn insert(&mut self, c: CellId) -> bool {
        assert!(c < self.universe, "cell {c} outside universe {}", self.universe);
        let w = &mut self.words[c / WORD];
        let bit = 1 << (c % WORD);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, c: CellId) -> bool {
        if c >= self.universe {
            return false;
        }
        let w = &mut self.words[c / WORD];
        let bit = 1 << (c % WORD);
        let had = *w & bit != 0;
        *w &= !bit;
        had
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    fn check_universe(&self, other: &CellSet) {
        assert_eq!(self.universe, other.universe, "cell sets over different universes");
    }

    pub fn union_with(&mut self, other: &CellSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &CellSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &CellSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &CellSet) -> CellSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn complement(&self) -> CellSet {
        let mut s = self.clone();
        for w in s.words.iter_mut() {
            *w = !*w;
        }
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &CellSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn first(&self) -> Option<CellId> {
        self.iter().next()
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<CellId> {
        self.iter().collect()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = CellId;

    fn next(&mut self) -> Option<CellId> {
        loop {
            if self.cur != 0 {
                let tz = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * WORD + tz);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

impl<'a> IntoIterator for &'a CellSet {
    type Item = CellId;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

// Serialized as the sorted index list; the universe comes from context.
impl Serialize for CellSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Sorted index list, used where a [`CellSet`] must be read back without
/// knowing its universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellList(pub Vec<CellId>);

impl CellList {
    pub fn into_set(self, universe: usize) -> Option<CellSet> {
        if self.0.iter().any(|&c| c >= universe) {
            return None;
        }
        Some(CellSet::from_cells(universe, self.0))
    }
}

impl<'de> Deserialize<'de> for CellSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let cells = Vec::<CellId>::deserialize(d)?;
        let universe = cells.iter().max().map_or(0, |m| m + 1);
        Ok(CellSet::from_cells(universe, cells))
    }
}
