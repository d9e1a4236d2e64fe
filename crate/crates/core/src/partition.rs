//! Integer partitions, the index set of every Jack expansion.

use std::fmt;

use crate::error::{Error, Result};

/// A non-increasing tuple of positive integers. Trailing zeros are never
/// stored, so `(2, 1, 0)` and `(2, 1)` are the same partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// The empty partition of weight zero.
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Parameter(format!("partition parts must be non-increasing: {parts:?}")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition(parts))
    }

    pub(crate) fn from_sorted_unchecked(mut parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Partition(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Part `i` (0-based), zero beyond the last nonzero part.
    #[inline]
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// The conjugate partition (column lengths of the Young diagram).
    pub fn conjugate(&self) -> Partition {
        let first = self.part(0) as usize;
        let conj = (0..first).map(|j| self.0.iter().filter(|&&k| k as usize > j).count() as u32).collect();
        Partition(conj)
    }

    /// True when `self` dominates `other` (both of equal weight).
    pub fn dominates(&self, other: &Partition) -> bool {
        let n = self.len().max(other.len());
        let (mut a, mut b) = (0u32, 0u32);
        for i in 0..n {
            a += self.part(i);
            b += other.part(i);
            if a < b {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl From<&[u32]> for Partition {
    /// Sorts the given parts into non-increasing order.
    fn from(parts: &[u32]) -> Self {
        let mut v = parts.to_vec();
        v.sort_unstable_by(|a, b| b.cmp(a));
        Partition::from_sorted_unchecked(v)
    }
}

/// All partitions of `k` with at most `max_parts` parts, in lexicographically
/// decreasing order.
pub fn enumerate_partitions(k: u32, max_parts: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(max_parts);
    fill(k, k, max_parts, &mut current, &mut out);
    out
}

fn fill(remaining: u32, cap: u32, slots: usize, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    if slots == 0 {
        return;
    }
    for p in (1..=cap.min(remaining)).rev() {
        // the remaining slots must be able to absorb what is left
        if (p as u64) * (slots as u64) < remaining as u64 {
            break;
        }
        current.push(p);
        fill(remaining - p, p, slots - 1, current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_count(k: u32, max_parts: usize, max_part: u32) -> usize {
        if k == 0 {
            return 1;
        }
        if max_parts == 0 {
            return 0;
        }
        (1..=max_part.min(k)).map(|p| brute_force_count(k - p, max_parts - 1, p)).sum()
    }

    #[test]
    fn empty_partition_for_zero_weight() {
        assert_eq!(enumerate_partitions(0, 3), vec![Partition::empty()]);
    }

    #[test]
    fn weight_three_two_parts() {
        let got = enumerate_partitions(3, 2);
        let want = vec![Partition(vec![3]), Partition(vec![2, 1])];
        assert_eq!(got, want);
    }

    #[test]
    fn four_has_five_partitions() {
        let got = enumerate_partitions(4, 4);
        assert_eq!(got.len(), 5);
        assert_eq!(
            got,
            vec![
                Partition(vec![4]),
                Partition(vec![3, 1]),
                Partition(vec![2, 2]),
                Partition(vec![2, 1, 1]),
                Partition(vec![1, 1, 1, 1]),
            ]
        );
    }

    #[test]
    fn counts_match_recursive_generator() {
        for k in 0..=10 {
            for m in 1..=6 {
                let parts = enumerate_partitions(k, m);
                assert_eq!(parts.len(), brute_force_count(k, m, k), "k={k} m={m}");
                for w in parts.windows(2) {
                    assert!(w[0] > w[1], "not strictly decreasing: {} {}", w[0], w[1]);
                }
                for p in &parts {
                    assert_eq!(p.weight(), k);
                    assert!(p.len() <= m);
                }
            }
        }
    }

    #[test]
    fn conjugate_and_dominance() {
        let p = Partition::new(vec![3, 1, 1]).unwrap();
        assert_eq!(p.conjugate(), Partition(vec![3, 1, 1]));
        let q = Partition::new(vec![4, 2]).unwrap();
        assert_eq!(q.conjugate(), Partition(vec![2, 2, 1, 1]));
        assert_eq!(q.conjugate().conjugate(), q);
        assert!(Partition(vec![3, 1]).dominates(&Partition(vec![2, 2])));
        assert!(!Partition(vec![2, 2]).dominates(&Partition(vec![3, 1])));
        assert!(!Partition(vec![3, 1, 1, 1]).dominates(&Partition(vec![2, 2, 2])));
        assert!(!Partition(vec![2, 2, 2]).dominates(&Partition(vec![3, 1, 1, 1])));
    }

    #[test]
    fn rejects_increasing_parts() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert_eq!(Partition::new(vec![2, 1, 0, 0]).unwrap().len(), 2);
    }
}
