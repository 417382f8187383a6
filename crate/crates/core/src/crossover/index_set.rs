//! Set of small integers with rank selection, backed by a Fenwick tree.
//!
//! Keys iterate in ascending order, and `nth` picks the k-th smallest in
//! `O(log n)`, so a uniformly random member can be drawn in canonical order
//! without materializing the set.

#[derive(Debug, Clone)]
pub(crate) struct IndexSet {
    present: Vec<bool>,
    tree: Vec<u32>,
    len: usize,
    top_bit: usize,
}

impl IndexSet {
    pub fn new(capacity: usize) -> Self {
        let top_bit = if capacity == 0 {
            0
        } else {
            1 << (usize::BITS - 1 - capacity.leading_zeros())
        };
        Self {
            present: vec![false; capacity],
            tree: vec![0; capacity + 1],
            len: 0,
            top_bit,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, key: usize) -> bool {
        self.present.get(key).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, key: usize) -> bool {
        if self.present[key] {
            return false;
        }
        self.present[key] = true;
        self.len += 1;
        self.add(key, 1);
        true
    }

    pub fn remove(&mut self, key: usize) -> bool {
        if !self.contains(key) {
            return false;
        }
        self.present[key] = false;
        self.len -= 1;
        self.add(key, u32::MAX); // wrapping -1
        true
    }

    fn add(&mut self, key: usize, delta: u32) {
        let mut i = key + 1;
        while i < self.tree.len() {
            self.tree[i] = self.tree[i].wrapping_add(delta);
            i += i & i.wrapping_neg();
        }
    }

    /// The `rank`-th smallest key (0-based). Panics if `rank >= len()`.
    pub fn nth(&self, rank: usize) -> usize {
        assert!(rank < self.len, "rank {rank} out of {}", self.len);
        let mut pos = 0;
        let mut remaining = rank as u32 + 1;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] < remaining {
                pos = next;
                remaining -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.present.iter().enumerate().filter(|(_, &p)| p).map(|(k, _)| k)
    }
}
