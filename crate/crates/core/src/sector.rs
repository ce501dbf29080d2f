//! Species-word bases. A sector is the set of all distinct rearrangements of
//! one species multiset, listed lexicographically; every operator in this
//! crate maps a sector to itself.

use std::collections::HashMap;
use std::ops::Deref;

use itertools::Itertools;

use crate::error::{Error, Result};

/// An ordered list of species words of a common length with index lookup
/// and per-slot swap tables.
#[derive(Debug, Clone, PartialEq)]
pub struct WordBasis {
    word_len: usize,
    words: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
    // swaps[l][w] = index of w with slots l, l+1 exchanged (0-based l)
    swaps: Vec<Vec<Option<usize>>>,
}

impl WordBasis {
    /// Builds a basis from arbitrary words; they are sorted and deduplicated.
    pub fn from_words(mut words: Vec<Vec<usize>>) -> Self {
        words.sort();
        words.dedup();
        let word_len = words.first().map_or(0, Vec::len);
        assert!(
            words.iter().all(|w| w.len() == word_len),
            "words must share one length"
        );
        let lookup: HashMap<_, _> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let swaps = (0..word_len.saturating_sub(1))
            .map(|l| {
                words
                    .iter()
                    .map(|w| {
                        let mut s = w.clone();
                        s.swap(l, l + 1);
                        lookup.get(&s).copied()
                    })
                    .collect()
            })
            .collect();
        Self {
            word_len,
            words,
            lookup,
            swaps,
        }
    }

    /// All `n^n` words over `{1..n}` in lexicographic order.
    pub fn full(n: usize) -> Self {
        let words = (0..n)
            .map(|_| 1..=n)
            .multi_cartesian_product()
            .collect::<Vec<_>>();
        Self::from_words(if n == 0 { vec![] } else { words })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn word(&self, index: usize) -> &[usize] {
        &self.words[index]
    }

    pub fn index_of(&self, word: &[usize]) -> Option<usize> {
        self.lookup.get(word).copied()
    }

    /// Index of word `index` with slots `slot`, `slot + 1` exchanged
    /// (`slot` is 0-based).
    #[inline]
    pub fn swapped(&self, slot: usize, index: usize) -> Option<usize> {
        self.swaps[slot][index]
    }
}

/// The block of one species multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorIndex {
    multiset: Vec<usize>,
    basis: WordBasis,
}

impl SectorIndex {
    pub fn multiset(&self) -> &[usize] {
        &self.multiset
    }

    pub fn basis(&self) -> &WordBasis {
        &self.basis
    }
}

impl Deref for SectorIndex {
    type Target = WordBasis;

    fn deref(&self) -> &WordBasis {
        &self.basis
    }
}

/// Enumerates the distinct rearrangements of `multiset` in lexicographic
/// order. Entries must lie in `1..=multiset.len()`; the input need not be
/// sorted.
pub fn build_sector(multiset: &[usize]) -> Result<SectorIndex> {
    let n = multiset.len();
    if let Some(&label) = multiset.iter().find(|&&l| l == 0 || l > n) {
        return Err(Error::SpeciesOutOfRange { label, max: n });
    }
    let mut current = multiset.to_vec();
    current.sort_unstable();
    let sorted = current.clone();
    let mut words = vec![current.clone()];
    while next_permutation(&mut current) {
        words.push(current.clone());
    }
    Ok(SectorIndex {
        multiset: sorted,
        basis: WordBasis::from_words(words),
    })
}

/// All sorted multisets of size `n` drawn from `{1..n}`.
pub fn all_multisets(n: usize) -> Vec<Vec<usize>> {
    (1..=n).combinations_with_replacement(n).collect()
}

/// `n! / (m_1! ... m_k!)` for the multiplicities of `multiset`.
pub fn multinomial(multiset: &[usize]) -> u64 {
    let counts = multiset.iter().counts();
    let mut result: u64 = 1;
    let mut placed: u64 = 0;
    for &m in counts.values() {
        // accumulate C(placed + m, m) one factor at a time to stay exact
        for j in 1..=m as u64 {
            placed += 1;
            result = result * placed / j;
        }
    }
    result
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let pivot = i - 1;
    let j = (i..v.len()).rev().find(|&j| v[j] > v[pivot]).unwrap();
    v.swap(pivot, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_element_sector() {
        let s = build_sector(&[1, 2]).unwrap();
        assert_eq!(s.words(), &[vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn single_species_sector() {
        let s = build_sector(&[1, 1]).unwrap();
        assert_eq!(s.words(), &[vec![1, 1]]);
        assert_eq!(s.swapped(0, 0), Some(0));
    }

    #[test]
    fn full_symmetric_sector_is_lexicographic() {
        let s = build_sector(&[3, 1, 2]).unwrap();
        let expected: Vec<Vec<usize>> = vec![
            vec![1, 2, 3],
            vec![1, 3, 2],
            vec![2, 1, 3],
            vec![2, 3, 1],
            vec![3, 1, 2],
            vec![3, 2, 1],
        ];
        assert_eq!(s.words(), expected.as_slice());
        assert_eq!(s.index_of(&[2, 3, 1]), Some(3));
        assert_eq!(s.multiset(), &[1, 2, 3]);
    }

    #[test]
    fn out_of_range_multiset() {
        assert!(build_sector(&[1, 3]).is_err());
        assert!(build_sector(&[0, 1]).is_err());
    }

    #[test]
    fn sector_sizes_partition_full_space() {
        for n in 1..=5 {
            let total: u64 = all_multisets(n)
                .iter()
                .map(|m| {
                    let s = build_sector(m).unwrap();
                    assert_eq!(s.len() as u64, multinomial(m));
                    s.len() as u64
                })
                .sum();
            assert_eq!(total, (n as u64).pow(n as u32));
        }
    }

    #[test]
    fn sector_order_matches_full_space_order() {
        let full = WordBasis::full(3);
        for m in all_multisets(3) {
            let s = build_sector(&m).unwrap();
            let positions: Vec<usize> = s
                .words()
                .iter()
                .map(|w| full.index_of(w).unwrap())
                .collect();
            assert!(positions.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn swap_tables() {
        let s = build_sector(&[1, 2, 3]).unwrap();
        let i = s.index_of(&[1, 2, 3]).unwrap();
        let j = s.swapped(1, i).unwrap();
        assert_eq!(s.word(j), &[1, 3, 2]);
        let full = WordBasis::from_words(vec![vec![1, 2]]);
        assert_eq!(full.swapped(0, 0), None);
    }
}
