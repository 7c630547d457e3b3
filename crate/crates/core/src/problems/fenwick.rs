use crate::fft::OpCounter;

/// Fenwick tree over 0/1 flags with rank and select in `O(log n)`.
///
/// Every loop iteration is charged one unit to the supplied counter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    pub fn from_flags(flags: &[bool]) -> Self {
        let n = flags.len();
        let mut tree = vec![0u32; n + 1];
        for (i, &f) in flags.iter().enumerate() {
            tree[i + 1] += u32::from(f);
            let j = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if j <= n {
                tree[j] += tree[i + 1];
            }
        }
        Self { tree }
    }

    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    /// Flips flag `i` on (`delta = 1`) or off (`delta = −1`).
    pub fn update(&mut self, i: usize, delta: i32, ops: &OpCounter) {
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] = (self.tree[k] as i64 + delta as i64) as u32;
            k += k & k.wrapping_neg();
            ops.add(1);
        }
    }

    /// Number of set flags among `0..i`.
    pub fn rank(&self, i: usize, ops: &OpCounter) -> usize {
        let mut k = i.min(self.len());
        let mut s = 0;
        while k > 0 {
            s += self.tree[k] as usize;
            k -= k & k.wrapping_neg();
            ops.add(1);
        }
        s
    }

    pub fn total(&self, ops: &OpCounter) -> usize {
        self.rank(self.len(), ops)
    }

    /// Index of the set flag of rank `r` (0-based).
    pub fn select(&self, r: usize, ops: &OpCounter) -> usize {
        let n = self.len();
        let mut pos = 0;
        let mut rem = r;
        let mut step = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        while step > 0 {
            let next = pos + step;
            if next <= n && (self.tree[next] as usize) <= rem {
                pos = next;
                rem -= self.tree[next] as usize;
            }
            step >>= 1;
            ops.add(1);
        }
        pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rank_and_select_match_a_scan(flags in proptest::collection::vec(any::<bool>(), 1..70), flips in proptest::collection::vec(0usize..70, 0..10)) {
            let mut flags = flags;
            let ops = OpCounter::new();
            let mut f = Fenwick::from_flags(&flags);
            for i in flips {
                let i = i % flags.len();
                f.update(i, if flags[i] { -1 } else { 1 }, &ops);
                flags[i] = !flags[i];
            }
            for i in 0..=flags.len() {
                prop_assert_eq!(f.rank(i, &ops), flags[..i].iter().filter(|&&b| b).count());
            }
            let set: Vec<usize> = (0..flags.len()).filter(|&i| flags[i]).collect();
            for (r, &i) in set.iter().enumerate() {
                prop_assert_eq!(f.select(r, &ops), i);
            }
        }
    }
}
