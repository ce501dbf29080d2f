//! The symmetric group `S_N` enumerated breadth-first from the identity by
//! simple transpositions, so every element carries one canonical reduced
//! word.

use std::collections::HashMap;
use std::collections::VecDeque;

/// A permutation in one-line notation: `image[i] = sigma(i + 1)`, values
/// 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationElem {
    pub image: Vec<usize>,
    pub inversions: usize,
}

impl PermutationElem {
    pub fn identity(n: usize) -> Self {
        Self {
            image: (1..=n).collect(),
            inversions: 0,
        }
    }

    /// Builds from one-line notation, returning `None` unless `image` is a
    /// bijection on `1..=n`.
    pub fn from_image(image: Vec<usize>) -> Option<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v == 0 || v > n || seen[v - 1] {
                return None;
            }
            seen[v - 1] = true;
        }
        let inversions = count_inversions(&image);
        Some(Self { image, inversions })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// `+1` for even permutations, `-1` for odd.
    pub fn sign(&self) -> i32 {
        if self.inversions.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// `sigma(i)` for 1-based `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1]
    }

    /// One-line notation of the inverse.
    pub fn inverse_image(&self) -> Vec<usize> {
        let mut inv = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        inv
    }

    /// `T_slot sigma`: exchanges the entries at 1-based slots `slot` and
    /// `slot + 1`.
    pub fn swap_slot(&self, slot: usize) -> Self {
        let mut image = self.image.clone();
        image.swap(slot - 1, slot);
        let inversions = if self.image[slot - 1] < self.image[slot] {
            self.inversions + 1
        } else {
            self.inversions - 1
        };
        Self { image, inversions }
    }
}

fn count_inversions(image: &[usize]) -> usize {
    let mut count = 0;
    for i in 0..image.len() {
        for j in i + 1..image.len() {
            if image[i] > image[j] {
                count += 1;
            }
        }
    }
    count
}

/// Link from a permutation back towards the identity: `sigma = T_slot pred`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Predecessor {
    pub pred: usize,
    /// 1-based slot.
    pub slot: usize,
}

/// All of `S_N` in breadth-first order; index 0 is the identity.
#[derive(Debug, Clone)]
pub struct SymmetricGroup {
    n: usize,
    elems: Vec<PermutationElem>,
    links: Vec<Option<Predecessor>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl SymmetricGroup {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[PermutationElem] {
        &self.elems
    }

    pub fn elem(&self, index: usize) -> &PermutationElem {
        &self.elems[index]
    }

    pub fn link(&self, index: usize) -> Option<Predecessor> {
        self.links[index]
    }

    pub fn index_of(&self, image: &[usize]) -> Option<usize> {
        self.lookup.get(image).copied()
    }

    /// The canonical reduced word of element `index`, as the slots applied
    /// to the identity in order (first entry applied first).
    pub fn reduced_word(&self, index: usize) -> Vec<usize> {
        let mut word = Vec::with_capacity(self.elems[index].inversions);
        let mut cur = index;
        while let Some(link) = self.links[cur] {
            word.push(link.slot);
            cur = link.pred;
        }
        word.reverse();
        word
    }
}

/// Breadth-first enumeration of `S_n` from the identity. Each new element is
/// reached by a simple transposition that raises the inversion count by one,
/// so depth equals length and every predecessor chain is a reduced word.
pub fn enumerate_sn(n: usize) -> SymmetricGroup {
    assert!(n >= 1, "S_N needs N >= 1");
    let id = PermutationElem::identity(n);
    let mut lookup = HashMap::new();
    lookup.insert(id.image.clone(), 0);
    let mut elems = vec![id];
    let mut links = vec![None];
    let mut queue = VecDeque::from([0usize]);
    while let Some(cur) = queue.pop_front() {
        for slot in 1..n {
            let sigma = &elems[cur];
            if sigma.image[slot - 1] > sigma.image[slot] {
                continue;
            }
            let next = sigma.swap_slot(slot);
            if lookup.contains_key(&next.image) {
                continue;
            }
            let idx = elems.len();
            lookup.insert(next.image.clone(), idx);
            elems.push(next);
            links.push(Some(Predecessor { pred: cur, slot }));
            queue.push_back(idx);
        }
    }
    SymmetricGroup {
        n,
        elems,
        links,
        lookup,
    }
}
