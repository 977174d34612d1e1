use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest supported item count. Every verification routine enumerates
/// subsets, so an `ItemSet` always fits in one word.
pub const MAX_ITEMS: usize = 16;

/// A subset of the items `{0, .., m-1}` stored as a bitmask.
///
/// Serialized as the sorted list of 0-based item indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct ItemSet(u32);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    /// All of `{0, .., m-1}`.
    pub fn full(m: usize) -> Self {
        debug_assert!(m <= MAX_ITEMS);
        ItemSet(((1u64 << m) - 1) as u32)
    }

    pub fn from_bits(bits: u32) -> Self {
        ItemSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Index into a `2^m` value table.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn singleton(item: usize) -> Self {
        debug_assert!(item < MAX_ITEMS);
        ItemSet(1 << item)
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Self {
        items.into_iter().fold(ItemSet::EMPTY, |s, j| s.with(j))
    }

    pub fn contains(self, item: usize) -> bool {
        item < 32 && self.0 & (1 << item) != 0
    }

    #[must_use]
    pub fn with(self, item: usize) -> Self {
        ItemSet(self.0 | (1 << item))
    }

    #[must_use]
    pub fn without(self, item: usize) -> Self {
        ItemSet(self.0 & !(1 << item))
    }

    #[must_use]
    pub fn union(self, other: ItemSet) -> Self {
        ItemSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: ItemSet) -> Self {
        ItemSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: ItemSet) -> Self {
        ItemSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: ItemSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// True when no bit at or above `m` is set.
    pub fn fits(self, m: usize) -> bool {
        m >= 32 || self.0 >> m == 0
    }

    /// Items in ascending order.
    pub fn iter(self) -> Items {
        Items(self.0)
    }

    /// Every subset of `self`, in ascending bitmask order, starting with the
    /// empty set and ending with `self`.
    pub fn subsets(self) -> Subsets {
        Subsets {
            set: self.0,
            next: Some(0),
        }
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, j) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

impl From<ItemSet> for Vec<usize> {
    fn from(s: ItemSet) -> Self {
        s.iter().collect()
    }
}

impl TryFrom<Vec<usize>> for ItemSet {
    type Error = String;

    fn try_from(items: Vec<usize>) -> Result<Self, Self::Error> {
        if let Some(&bad) = items.iter().find(|&&j| j >= MAX_ITEMS) {
            return Err(format!("item index {bad} exceeds the {MAX_ITEMS}-item cap"));
        }
        Ok(ItemSet::from_items(items))
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        ItemSet::from_items(iter)
    }
}

pub struct Items(u32);

impl Iterator for Items {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let j = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(j)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Items {}

/// Carry-rippler subset walk.
pub struct Subsets {
    set: u32,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        let cur = self.next?;
        let succ = cur.wrapping_sub(self.set) & self.set;
        self.next = if succ == 0 { None } else { Some(succ) };
        Some(ItemSet(cur))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_of_sparse_mask() {
        let got: Vec<u32> = ItemSet::from_bits(0b1010)
            .subsets()
            .map(ItemSet::bits)
            .collect();
        assert_eq!(got, vec![0, 0b10, 0b1000, 0b1010]);
        assert_eq!(ItemSet::EMPTY.subsets().count(), 1);
        assert_eq!(ItemSet::full(4).subsets().count(), 16);
    }

    #[test]
    fn set_algebra() {
        let a = ItemSet::from_items([0, 2]);
        let b = ItemSet::from_items([2, 3]);
        assert_eq!(a.union(b), ItemSet::from_items([0, 2, 3]));
        assert_eq!(a.intersection(b), ItemSet::singleton(2));
        assert_eq!(a.difference(b), ItemSet::singleton(0));
        assert!(ItemSet::singleton(2).is_subset_of(a));
        assert!(!a.fits(2));
        assert!(a.fits(3));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(ItemSet::full(16).len(), 16);
    }

    #[test]
    fn serde_as_item_list() {
        let s = ItemSet::from_items([1, 4]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,4]");
        let back: ItemSet = serde_json::from_str("[4,1]").unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<ItemSet>("[16]").is_err());
    }
}
