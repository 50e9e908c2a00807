//! Index subsets of `{0..L−1}` or `{1..L−1}` and their lexicographic ranks.
//!
//! A subset names the indices *removed* from the ground set; the remaining
//! indices, in increasing order, are the arguments of a function `F_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroundSet {
    /// Indices `0..L−1`.
    Full,
    /// Indices `1..L−1`.
    Tail,
}

impl GroundSet {
    pub fn first(self) -> usize {
        match self {
            GroundSet::Full => 0,
            GroundSet::Tail => 1,
        }
    }

    pub fn size(self, l: usize) -> usize {
        l.saturating_sub(self.first())
    }

    pub fn indices(self, l: usize) -> std::ops::Range<usize> {
        self.first()..l.max(self.first())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSubset {
    ground: GroundSet,
    removed: Vec<usize>,
    l: usize,
}

impl IndexSubset {
    pub fn new(ground: GroundSet, removed: Vec<usize>, l: usize) -> Result<Self> {
        if removed.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(format!(
                "removed indices must be strictly increasing: {removed:?}"
            )));
        }
        if let Some(&bad) = removed.iter().find(|&&r| !ground.indices(l).contains(&r)) {
            return Err(Error::IndexOutOfRange { what: "ground set", index: bad });
        }
        Ok(IndexSubset { ground, removed, l })
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    pub fn lattice_len(&self) -> usize {
        self.l
    }

    /// Ground-set indices not removed, increasing. `l` may be smaller than
    /// the lattice length used at construction only if no removed index
    /// exceeds it.
    pub fn complement(&self, l: usize) -> Vec<usize> {
        self.ground
            .indices(l)
            .filter(|i| self.removed.binary_search(i).is_err())
            .collect()
    }

    /// Lexicographic rank among subsets of the same size.
    pub fn rank(&self) -> usize {
        let n = self.ground.size(self.l);
        let k = self.removed.len();
        let off = self.ground.first();
        let mut rank = 0;
        let mut next = 0;
        for (i, &r) in self.removed.iter().enumerate() {
            let pos = r - off;
            for v in next..pos {
                rank += binomial(n - 1 - v, k - 1 - i);
            }
            next = pos + 1;
        }
        rank
    }

    /// Inverse of [`IndexSubset::rank`].
    pub fn unrank(ground: GroundSet, l: usize, size: usize, mut rank: usize) -> Result<Self> {
        let n = ground.size(l);
        let count = binomial(n, size);
        if rank >= count {
            return Err(Error::RankOutOfRange { rank, count });
        }
        let mut removed = Vec::with_capacity(size);
        let mut v = 0;
        for i in 0..size {
            loop {
                let block = binomial(n - 1 - v, size - 1 - i);
                if rank < block {
                    break;
                }
                rank -= block;
                v += 1;
            }
            removed.push(v + ground.first());
            v += 1;
        }
        Ok(IndexSubset { ground, removed, l })
    }

    /// All subsets of the given size in lexicographic order.
    pub fn all(ground: GroundSet, l: usize, size: usize) -> Vec<IndexSubset> {
        combinations(ground.indices(l).collect(), size)
            .into_iter()
            .map(|removed| IndexSubset { ground, removed, l })
            .collect()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Size-`k` subsets of `items` in lexicographic order.
pub fn combinations(items: Vec<usize>, k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(&items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}
