//! Compact bitset over variable indices.

use std::cmp::Ordering;
use std::fmt;

/// Set of variable indices stored as 64-bit words.
///
/// Trailing zero words are always trimmed so that equal sets compare and
/// hash equal regardless of how they were built.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct VarSet {
    words: Vec<u64>,
}

impl VarSet {
    pub fn new() -> Self {
        VarSet { words: Vec::new() }
    }

    pub fn singleton(var: u32) -> Self {
        let mut s = VarSet::new();
        s.insert(var);
        s
    }

    pub fn insert(&mut self, var: u32) -> bool {
        let (w, b) = ((var / 64) as usize, var % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn contains(&self, var: u32) -> bool {
        let (w, b) = ((var / 64) as usize, var % 64);
        self.words.get(w).is_some_and(|x| x & (1 << b) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        let n = self.words.len().max(other.words.len());
        let words = (0..n)
            .map(|i| self.word(i) | other.word(i))
            .collect::<Vec<_>>();
        VarSet::from_words(words)
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        let n = self.words.len().min(other.words.len());
        VarSet::from_words((0..n).map(|i| self.word(i) & other.word(i)).collect())
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        VarSet::from_words(
            (0..self.words.len())
                .map(|i| self.word(i) & !other.word(i))
                .collect(),
        )
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        (0..self.words.len()).all(|i| self.word(i) & !other.word(i) == 0)
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some(wi as u32 * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }

    fn word(&self, i: usize) -> u64 {
        self.words.get(i).copied().unwrap_or(0)
    }

    fn from_words(mut words: Vec<u64>) -> VarSet {
        while words.last() == Some(&0) {
            words.pop();
        }
        VarSet { words }
    }
}

impl FromIterator<u32> for VarSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut s = VarSet::new();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl<'a> FromIterator<&'a u32> for VarSet {
    fn from_iter<I: IntoIterator<Item = &'a u32>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

/// Lexicographic order on the sorted element lists.
impl Ord for VarSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for VarSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_ops() {
        let a: VarSet = [1u32, 2, 70].iter().collect();
        let b: VarSet = [2u32, 3].iter().collect();
        assert_eq!(a.len(), 3);
        assert!(a.contains(70));
        assert_eq!(a.intersection(&b).to_vec(), vec![2]);
        assert_eq!(a.union(&b).to_vec(), vec![1, 2, 3, 70]);
        assert_eq!(a.difference(&b).to_vec(), vec![1, 70]);
        assert!(!a.is_disjoint(&b));
        // trimming keeps equality structural
        assert_eq!(
            a.difference(&VarSet::singleton(70)),
            [1u32, 2].iter().collect()
        );
    }

    #[test]
    fn lex_order() {
        let a: VarSet = [1u32, 5].iter().collect();
        let b: VarSet = [1u32, 2, 9].iter().collect();
        let c: VarSet = [1u32].iter().collect();
        assert!(b < a);
        assert!(c < b);
    }

    proptest! {
        #[test]
        fn matches_sorted_vec(xs in proptest::collection::btree_set(0u32..200, 0..20),
                              ys in proptest::collection::btree_set(0u32..200, 0..20)) {
            let a: VarSet = xs.iter().collect();
            let b: VarSet = ys.iter().collect();
            prop_assert_eq!(a.to_vec(), xs.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(a.is_subset(&b), xs.is_subset(&ys));
            prop_assert_eq!(a.is_disjoint(&b), xs.is_disjoint(&ys));
            prop_assert_eq!(a.cmp(&b), xs.iter().cmp(ys.iter()));
            prop_assert_eq!(a.union(&b).len(), xs.union(&ys).count());
        }
    }
}
