//! Fixed-width bit sets and the flat per-vertex label arrays built on them.
//!
//! All set algebra works on whole `u64` words. Bits at positions `>= width`
//! are kept zero.

use std::fmt;

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(width: usize) -> usize {
    width.div_ceil(WORD_BITS)
}

#[inline]
pub fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

#[inline]
pub fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

#[inline]
pub fn is_empty(a: &[u64]) -> bool {
    a.iter().all(|&w| w == 0)
}

/// `dst |= src`; returns whether `dst` changed.
#[inline]
pub fn union_into(dst: &mut [u64], src: &[u64]) -> bool {
    let mut changed = false;
    for (d, s) in dst.iter_mut().zip(src) {
        let before = *d;
        *d |= s;
        changed |= *d != before;
    }
    changed
}

/// `dst &= !src`; returns whether `dst` changed.
#[inline]
pub fn subtract_from(dst: &mut [u64], src: &[u64]) -> bool {
    let mut changed = false;
    for (d, s) in dst.iter_mut().zip(src) {
        let before = *d;
        *d &= !s;
        changed |= *d != before;
    }
    changed
}

#[inline]
pub fn contains(a: &[u64], bit: usize) -> bool {
    a[bit / WORD_BITS] >> (bit % WORD_BITS) & 1 == 1
}

#[inline]
pub fn set(a: &mut [u64], bit: usize) -> bool {
    let w = &mut a[bit / WORD_BITS];
    let mask = 1u64 << (bit % WORD_BITS);
    let was = *w & mask != 0;
    *w |= mask;
    !was
}

#[inline]
pub fn clear(a: &mut [u64], bit: usize) {
    a[bit / WORD_BITS] &= !(1u64 << (bit % WORD_BITS));
}

pub fn ones(a: &[u64]) -> impl Iterator<Item = usize> + '_ {
    a.iter().enumerate().flat_map(|(wi, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let tz = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(wi * WORD_BITS + tz)
        })
    })
}

/// An owned bit set of fixed width.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitLabel {
    width: usize,
    words: Vec<u64>,
}

impl BitLabel {
    pub fn new(width: usize) -> Self {
        BitLabel {
            width,
            words: vec![0; words_for(width)],
        }
    }

    pub fn from_words(width: usize, words: &[u64]) -> Self {
        debug_assert_eq!(words.len(), words_for(width));
        BitLabel {
            width,
            words: words.to_vec(),
        }
    }

    pub fn from_bits(width: usize, bits: impl IntoIterator<Item = usize>) -> Self {
        let mut l = Self::new(width);
        for b in bits {
            l.insert(b);
        }
        l
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn insert(&mut self, bit: usize) -> bool {
        assert!(bit < self.width, "bit {bit} outside width {}", self.width);
        set(&mut self.words, bit)
    }

    pub fn remove(&mut self, bit: usize) {
        assert!(bit < self.width, "bit {bit} outside width {}", self.width);
        clear(&mut self.words, bit)
    }

    pub fn contains(&self, bit: usize) -> bool {
        bit < self.width && contains(&self.words, bit)
    }

    pub fn is_empty(&self) -> bool {
        is_empty(&self.words)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn clear_all(&mut self) {
        self.words.fill(0);
    }

    pub fn intersects(&self, other: &[u64]) -> bool {
        intersects(&self.words, other)
    }

    pub fn is_subset_of(&self, other: &[u64]) -> bool {
        is_subset(&self.words, other)
    }

    pub fn union_with(&mut self, other: &[u64]) -> bool {
        union_into(&mut self.words, other)
    }

    pub fn subtract(&mut self, other: &[u64]) -> bool {
        subtract_from(&mut self.words, other)
    }

    pub fn intersect_with(&mut self, other: &[u64]) {
        for (d, s) in self.words.iter_mut().zip(other) {
            *d &= s;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        ones(&self.words)
    }
}

impl fmt::Debug for BitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// One label per vertex, stored contiguously.
#[derive(Clone, PartialEq, Eq)]
pub struct LabelArray {
    width: usize,
    stride: usize,
    n: usize,
    words: Vec<u64>,
}

impl LabelArray {
    pub fn new(width: usize, n: usize) -> Self {
        let stride = words_for(width);
        LabelArray {
            width,
            stride,
            n,
            words: vec![0; stride * n],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, v: usize) -> &[u64] {
        &self.words[v * self.stride..(v + 1) * self.stride]
    }

    #[inline]
    pub fn get_mut(&mut self, v: usize) -> &mut [u64] {
        &mut self.words[v * self.stride..(v + 1) * self.stride]
    }

    pub fn to_label(&self, v: usize) -> BitLabel {
        BitLabel::from_words(self.width, self.get(v))
    }

    pub fn push_empty(&mut self) {
        self.words.extend(std::iter::repeat_n(0, self.stride));
        self.n += 1;
    }

    pub fn raw_words(&self) -> &[u64] {
        &self.words
    }

    pub fn raw_words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn clear_all(&mut self) {
        self.words.fill(0);
    }
}

impl fmt::Debug for LabelArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabelArray(width={}, stride={})", self.width, self.stride)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_ops() {
        let mut a = BitLabel::from_bits(130, [0, 64, 129]);
        assert_eq!(a.words().len(), 3);
        assert!(a.contains(129));
        assert!(!a.contains(128));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        let b = BitLabel::from_bits(130, [64]);
        assert!(b.is_subset_of(a.words()));
        assert!(!a.is_subset_of(b.words()));
        assert!(a.intersects(b.words()));
        assert!(a.subtract(b.words()));
        assert!(!a.subtract(b.words()));
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn zero_width() {
        let a = BitLabel::new(0);
        assert!(a.is_empty());
        assert!(a.is_subset_of(&[]));
        assert!(!a.intersects(&[]));
    }

    fn label(width: usize) -> impl Strategy<Value = BitLabel> {
        proptest::collection::btree_set(0..width, 0..width.min(40))
            .prop_map(move |s| BitLabel::from_bits(width, s))
    }

    proptest! {
        #[test]
        fn algebra_matches_sets((a, b) in (1usize..200).prop_flat_map(|w| (label(w), label(w)))) {
            let sa: std::collections::BTreeSet<_> = a.iter().collect();
            let sb: std::collections::BTreeSet<_> = b.iter().collect();
            prop_assert_eq!(a.intersects(b.words()), !sa.is_disjoint(&sb));
            prop_assert_eq!(a.is_subset_of(b.words()), sa.is_subset(&sb));
            let mut u = a.clone();
            let changed = u.union_with(b.words());
            prop_assert_eq!(changed, !sb.is_subset(&sa));
            prop_assert_eq!(u.iter().collect::<std::collections::BTreeSet<_>>(), &sa | &sb);
            let mut d = a.clone();
            d.subtract(b.words());
            prop_assert_eq!(d.iter().collect::<std::collections::BTreeSet<_>>(), &sa - &sb);
        }
    }
}
