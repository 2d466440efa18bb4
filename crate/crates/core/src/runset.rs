//! Dense bitsets over the run indices of one system.

use smallvec::{smallvec, SmallVec};

/// A set of run indices `0..len`.
///
/// Systems used by the sweeps have a handful of runs, so the first 128 runs
/// live inline without touching the heap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RunSet {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

impl RunSet {
    pub fn empty(len: usize) -> Self {
        RunSet {
            len,
            words: smallvec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = RunSet {
            len,
            words: smallvec![u64::MAX; len.div_ceil(64)],
        };
        s.trim();
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, idx: usize) {
        debug_assert!(idx < self.len);
        self.words[idx / 64] |= 1 << (idx % 64);
    }

    pub fn contains(&self, idx: usize) -> bool {
        idx < self.len && self.words[idx / 64] & (1 << (idx % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_full(&self) -> bool {
        self.first_missing().is_none()
    }

    /// Lowest index not in the set.
    pub fn first_missing(&self) -> Option<usize> {
        for (wi, w) in self.words.iter().enumerate() {
            if *w != u64::MAX {
                let idx = wi * 64 + (!w).trailing_zeros() as usize;
                return (idx < self.len).then_some(idx);
            }
        }
        None
    }

    pub fn is_subset(&self, other: &RunSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &RunSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn and_with(&mut self, other: &RunSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_with(&mut self, other: &RunSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn complement(&mut self) {
        for w in self.words.iter_mut() {
            *w = !*w;
        }
        self.trim();
    }

    /// `self := !self | other`
    pub fn implies_with(&mut self, other: &RunSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a = !*a | b;
        }
        self.trim();
    }

    /// `self := !(self ^ other)`
    pub fn iff_with(&mut self, other: &RunSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a = !(*a ^ b);
        }
        self.trim();
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |i| self.contains(*i))
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl FromIterator<usize> for RunSet {
    /// Collects into a set sized by the largest element; prefer
    /// [`RunSet::empty`] plus `insert` when the universe is known.
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let items: Vec<usize> = iter.into_iter().collect();
        let len = items.iter().max().map_or(0, |m| m + 1);
        let mut s = RunSet::empty(len);
        for i in items {
            s.insert(i);
        }
        s
    }
}
