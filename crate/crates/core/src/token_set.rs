//! Ordered sets of 1-based token indexes, used for constituent yields.

use std::cmp::Ordering;
use std::fmt;

const WORD_BITS: usize = 64;

/// A set of token indexes stored as a bitset.
///
/// Minimum, maximum and cardinality are cached, so boundary lookups used by
/// feature extraction are O(1); union and subset tests are O(n / 64).
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSet {
    words: Vec<u64>,
    len: usize,
    min: usize,
    max: usize,
}

impl TokenSet {
    pub fn new() -> Self {
        TokenSet::default()
    }

    pub fn singleton(index: usize) -> Self {
        let mut set = TokenSet::new();
        set.insert(index);
        set
    }

    /// The contiguous set `{start, ..., end}` (inclusive).
    pub fn range(start: usize, end: usize) -> Self {
        (start..=end).collect()
    }

    pub fn insert(&mut self, index: usize) -> bool {
        let (w, b) = (index / WORD_BITS, index % WORD_BITS);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        let mask = 1u64 << b;
        if self.words[w] & mask != 0 {
            return false;
        }
        self.words[w] |= mask;
        if self.len == 0 {
            self.min = index;
            self.max = index;
        } else {
            self.min = self.min.min(index);
            self.max = self.max.max(index);
        }
        self.len += 1;
        true
    }

    pub fn remove(&mut self, index: usize) -> bool {
        if !self.contains(index) {
            return false;
        }
        self.words[index / WORD_BITS] &= !(1u64 << (index % WORD_BITS));
        self.len -= 1;
        self.trim();
        self.recompute_bounds();
        true
    }

    pub fn contains(&self, index: usize) -> bool {
        let w = index / WORD_BITS;
        w < self.words.len() && self.words[w] & (1u64 << (index % WORD_BITS)) != 0
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn first(&self) -> Option<usize> {
        (self.len > 0).then_some(self.min)
    }

    pub fn last(&self) -> Option<usize> {
        (self.len > 0).then_some(self.max)
    }

    /// True iff the set is nonempty and has no holes between its bounds.
    pub fn is_contiguous(&self) -> bool {
        self.len > 0 && self.max - self.min + 1 == self.len
    }

    pub fn union(&self, other: &TokenSet) -> TokenSet {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(&short.words) {
            *w |= s;
        }
        let mut out = TokenSet {
            words,
            len: 0,
            min: 0,
            max: 0,
        };
        out.len = out.words.iter().map(|w| w.count_ones() as usize).sum();
        out.recompute_bounds();
        out
    }

    pub fn is_disjoint(&self, other: &TokenSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &TokenSet) -> bool {
        self.words.iter().enumerate().all(|(i, w)| {
            let o = other.words.get(i).copied().unwrap_or(0);
            w & !o == 0
        })
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            word: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    fn recompute_bounds(&mut self) {
        self.trim();
        if self.len == 0 {
            self.min = 0;
            self.max = 0;
            return;
        }
        let first = self.words.iter().position(|&w| w != 0).unwrap();
        self.min = first * WORD_BITS + self.words[first].trailing_zeros() as usize;
        let last = self.words.len() - 1;
        self.max = last * WORD_BITS + (WORD_BITS - 1 - self.words[last].leading_zeros() as usize);
    }
}

impl FromIterator<usize> for TokenSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = TokenSet::new();
        for i in iter {
            set.insert(i);
        }
        set
    }
}

impl<'a> IntoIterator for &'a TokenSet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

/// Lexicographic order on the ascending index sequences.
impl Ord for TokenSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for TokenSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for TokenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for TokenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i)?;
        }
        write!(f, "}}")
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    word: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word * WORD_BITS + bit);
            }
            self.word += 1;
            if self.word >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn bounds_and_contiguity() {
        let s: TokenSet = [1, 2, 3, 4, 6].into_iter().collect();
        assert_eq!(s.first(), Some(1));
        assert_eq!(s.last(), Some(6));
        assert_eq!(s.len(), 5);
        assert!(!s.is_contiguous());
        assert!(TokenSet::range(3, 7).is_contiguous());
        assert!(!TokenSet::new().is_contiguous());
        assert_eq!(s.to_string(), "{1,2,3,4,6}");
    }

    #[test]
    fn remove_updates_bounds() {
        let mut s: TokenSet = [3, 70, 130].into_iter().collect();
        s.remove(130);
        assert_eq!(s.last(), Some(70));
        s.remove(3);
        assert_eq!(s.first(), Some(70));
        s.remove(70);
        assert!(s.is_empty());
        assert_eq!(s, TokenSet::new());
    }

    proptest! {
        #[test]
        fn matches_btreeset(a in prop::collection::btree_set(1usize..200, 0..20),
                            b in prop::collection::btree_set(1usize..200, 0..20)) {
            let sa: TokenSet = a.iter().copied().collect();
            let sb: TokenSet = b.iter().copied().collect();
            let u: BTreeSet<usize> = a.union(&b).copied().collect();
            prop_assert_eq!(sa.union(&sb).to_vec(), u.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.is_disjoint(&sb), a.is_disjoint(&b));
            prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
            prop_assert_eq!(sa.first(), a.iter().next().copied());
            prop_assert_eq!(sa.last(), a.iter().next_back().copied());
            prop_assert_eq!(sa.cmp(&sb), a.iter().cmp(b.iter()));
            prop_assert_eq!(sa.union(&sb), sb.union(&sa));
        }
    }
}
