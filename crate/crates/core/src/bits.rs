//! Small growable bitsets used for token sets, cliques and point sets.

use smallvec::SmallVec;
use std::cmp::Ordering;
use std::fmt;

/// A set of naturals stored as a bitmask.
///
/// Trailing zero words are always trimmed so that equality and hashing are
/// structural. The order is size first, then lexicographic on the sorted
/// elements, which is the canonical order for finite cliques.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: SmallVec<[u64; 2]>,
}

impl BitSet {
    pub fn new() -> Self {
        BitSet {
            words: SmallVec::new(),
        }
    }

    pub fn singleton(i: usize) -> Self {
        let mut s = BitSet::new();
        s.insert(i);
        s
    }

    /// The set {0, .., n-1}.
    pub fn full(n: usize) -> Self {
        let mut s = BitSet::new();
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn from_mask(mask: u64) -> Self {
        let mut s = BitSet::new();
        if mask != 0 {
            s.words.push(mask);
        }
        s
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, i % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        let had = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn remove(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, i % 64);
        if w >= self.words.len() {
            return false;
        }
        let had = self.words[w] >> b & 1 == 1;
        self.words[w] &= !(1 << b);
        self.trim();
        had
    }

    pub fn with(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.insert(i);
        s
    }

    pub fn without(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.remove(i);
        s
    }

    pub fn contains(&self, i: usize) -> bool {
        let (w, b) = (i / 64, i % 64);
        w < self.words.len() && self.words[w] >> b & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union(&self, other: &BitSet) -> BitSet {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = long.clone();
        for (i, w) in short.words.iter().enumerate() {
            out.words[i] |= w;
        }
        out
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        let mut out = BitSet {
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(a, b)| a & b)
                .collect(),
        };
        out.trim();
        out
    }

    pub fn difference(&self, other: &BitSet) -> BitSet {
        let mut out = self.clone();
        for (i, w) in other.words.iter().enumerate() {
            if i < out.words.len() {
                out.words[i] &= !w;
            }
        }
        out.trim();
        out
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    /// Size of the intersection without allocating.
    pub fn meet_count(&self, other: &BitSet) -> usize {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn last(&self) -> Option<usize> {
        let last = self.words.len().checked_sub(1)?;
        Some(last * 64 + 63 - self.words[last].leading_zeros() as usize)
    }

    pub fn iter(&self) -> BitIter<'_> {
        BitIter {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for BitSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = BitSet::new();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl<'a> IntoIterator for &'a BitSet {
    type Item = usize;
    type IntoIter = BitIter<'a>;
    fn into_iter(self) -> BitIter<'a> {
        self.iter()
    }
}

pub struct BitIter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for BitIter<'_> {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let b = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * 64 + b);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

impl Ord for BitSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for BitSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimmed_equality() {
        let mut a = BitSet::singleton(130);
        a.remove(130);
        assert_eq!(a, BitSet::new());
        assert!(a.is_empty());
    }

    #[test]
    fn canonical_order_is_size_then_lex() {
        let mut v = [
            BitSet::from_iter([1, 2]),
            BitSet::singleton(2),
            BitSet::new(),
            BitSet::from_iter([0, 2]),
            BitSet::singleton(0),
        ];
        v.sort();
        let got: Vec<Vec<usize>> = v.iter().map(|s| s.to_vec()).collect();
        assert_eq!(got, vec![vec![], vec![0], vec![2], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn max_and_iter_cross_words() {
        let s = BitSet::from_iter([3, 64, 127, 200]);
        assert_eq!(s.last(), Some(200));
        assert_eq!(s.to_vec(), vec![3, 64, 127, 200]);
        assert_eq!(s.len(), 4);
    }

    proptest::proptest! {
        /// Set algebra agrees with a BTreeSet model.
        #[test]
        fn agrees_with_btreeset(a in proptest::collection::btree_set(0usize..200, 0..20),
                                b in proptest::collection::btree_set(0usize..200, 0..20)) {
            let sa: BitSet = a.iter().copied().collect();
            let sb: BitSet = b.iter().copied().collect();
            let u: Vec<usize> = a.union(&b).copied().collect();
            let i: Vec<usize> = a.intersection(&b).copied().collect();
            let d: Vec<usize> = a.difference(&b).copied().collect();
            proptest::prop_assert_eq!(sa.union(&sb).to_vec(), u);
            proptest::prop_assert_eq!(sa.intersection(&sb).to_vec(), i.clone());
            proptest::prop_assert_eq!(sa.difference(&sb).to_vec(), d);
            proptest::prop_assert_eq!(sa.meet_count(&sb), i.len());
            proptest::prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
        }
    }
}
