//! Teams of agents as compact bitsets.
//!
//! A team fits in a single machine word for `n <= 64`, which is the regime
//! of every brute-force routine; larger teams spill into additional words.
//! Trailing zero words are always trimmed so that equality and hashing are
//! structural.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

const WORD: usize = 64;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct AgentSet {
    words: SmallVec<[u64; 1]>,
}

impl AgentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The prefix team `{0, 1, .., k-1}`.
    pub fn full(k: usize) -> Self {
        let mut words: SmallVec<[u64; 1]> = SmallVec::new();
        let whole = k / WORD;
        let rest = k % WORD;
        words.extend(std::iter::repeat_n(u64::MAX, whole));
        if rest > 0 {
            words.push((1u64 << rest) - 1);
        }
        Self { words }
    }

    pub fn singleton(i: usize) -> Self {
        let mut s = Self::new();
        s.insert(i);
        s
    }

    pub fn from_mask(mask: u64) -> Self {
        let mut words = SmallVec::new();
        if mask != 0 {
            words.push(mask);
        }
        Self { words }
    }

    /// The single-word encoding, if every member is below 64.
    pub fn as_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn insert(&mut self, i: usize) {
        let w = i / WORD;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        let w = i / WORD;
        if w < self.words.len() {
            self.words[w] &= !(1u64 << (i % WORD));
            self.trim();
        }
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
        let w = i / WORD;
        w < self.words.len() && self.words[w] & (1u64 << (i % WORD)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * WORD + (WORD - 1 - last.leading_zeros() as usize))
    }

    pub fn iter(&self) -> Members<'_> {
        Members {
            words: &self.words,
            word: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn is_subset(&self, other: &AgentSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(k, w)| w & !other.words.get(k).copied().unwrap_or(0) == 0)
    }

    pub fn union(&self, other: &AgentSet) -> AgentSet {
        let len = self.words.len().max(other.words.len());
        let words = (0..len)
            .map(|k| self.word(k) | other.word(k))
            .collect::<SmallVec<_>>();
        AgentSet { words }
    }

    pub fn intersection(&self, other: &AgentSet) -> AgentSet {
        let len = self.words.len().min(other.words.len());
        let mut s = AgentSet {
            words: (0..len).map(|k| self.word(k) & other.word(k)).collect(),
        };
        s.trim();
        s
    }

    pub fn difference(&self, other: &AgentSet) -> AgentSet {
        let mut s = AgentSet {
            words: (0..self.words.len())
                .map(|k| self.word(k) & !other.word(k))
                .collect(),
        };
        s.trim();
        s
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn word(&self, k: usize) -> u64 {
        self.words.get(k).copied().unwrap_or(0)
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl FromIterator<usize> for AgentSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = AgentSet::new();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

pub struct Members<'a> {
    words: &'a [u64],
    word: usize,
    current: u64,
}

impl Iterator for Members<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word * WORD + bit);
            }
            self.word += 1;
            if self.word >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word];
        }
    }
}

impl<'a> IntoIterator for &'a AgentSet {
    type Item = usize;
    type IntoIter = Members<'a>;

    fn into_iter(self) -> Members<'a> {
        self.iter()
    }
}

/// Lexicographic order on the ascending member lists; a proper prefix sorts first.
impl Ord for AgentSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for AgentSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Same order as [`AgentSet`]'s `Ord`, computed directly on single-word masks.
pub fn lex_cmp_masks(a: u64, b: u64) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        return Ordering::Equal;
    }
    let p = diff.trailing_zeros();
    let above = if p == 63 { 0 } else { !0u64 << (p + 1) };
    // Members below p agree. The set holding p sorts first unless the other set
    // has nothing left, in which case the other set is a prefix.
    if a & (1u64 << p) != 0 {
        if b & above != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    } else if a & above != 0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

impl fmt::Debug for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for AgentSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for AgentSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(deserializer)?;
        let set: AgentSet = members.iter().copied().collect();
        if set.len() != members.len() {
            return Err(serde::de::Error::custom("duplicate agent index"));
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_and_prefix() {
        assert_eq!(AgentSet::full(0), AgentSet::new());
        assert_eq!(AgentSet::full(3).to_vec(), vec![0, 1, 2]);
        assert_eq!(AgentSet::full(64).len(), 64);
        assert_eq!(AgentSet::full(70).len(), 70);
        assert_eq!(AgentSet::full(70).max_index(), Some(69));
    }

    #[test]
    fn removal_trims_words() {
        let mut s = AgentSet::singleton(100);
        s.insert(3);
        s.remove(100);
        assert_eq!(s, AgentSet::singleton(3));
        assert_eq!(s.as_mask(), Some(8));
    }

    #[test]
    fn lexicographic_order() {
        let a: AgentSet = [0, 1].into_iter().collect();
        let b: AgentSet = [0, 2].into_iter().collect();
        let c: AgentSet = [0].into_iter().collect();
        assert!(a < b);
        assert!(c < a);
        assert!(AgentSet::new() < c);
    }

    #[test]
    fn serde_rejects_duplicates() {
        let ok: AgentSet = serde_json::from_str("[2, 0]").unwrap();
        assert_eq!(ok.to_vec(), vec![0, 2]);
        assert!(serde_json::from_str::<AgentSet>("[1, 1]").is_err());
    }

    proptest! {
        #[test]
        fn mask_order_matches_set_order(a in any::<u64>(), b in any::<u64>()) {
            let sa = AgentSet::from_mask(a);
            let sb = AgentSet::from_mask(b);
            prop_assert_eq!(lex_cmp_masks(a, b), sa.cmp(&sb));
        }

        #[test]
        fn set_algebra_agrees_with_vectors(
            a in proptest::collection::btree_set(0usize..150, 0..20),
            b in proptest::collection::btree_set(0usize..150, 0..20),
        ) {
            let sa: AgentSet = a.iter().copied().collect();
            let sb: AgentSet = b.iter().copied().collect();
            prop_assert_eq!(sa.union(&sb).to_vec(), a.union(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.intersection(&sb).to_vec(), a.intersection(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.difference(&sb).to_vec(), a.difference(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
            prop_assert_eq!(sa.len(), a.len());
        }
    }
}
