//! Partitions of `{0, ..., n-1}` in least-element order.

use crate::error::{FvError, Result};

/// A partition of `{0, ..., n-1}` whose blocks are sorted internally and
/// ordered by their least elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<u32>>,
}

impl Partition {
    /// Build from blocks, normalizing order and validating that the blocks
    /// are disjoint and cover `{0, ..., n-1}`.
    pub fn new(n: usize, mut blocks: Vec<Vec<u32>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(FvError::Domain("empty block in partition".into()));
            }
            block.sort_unstable();
            for &x in block.iter() {
                let i = x as usize;
                if i >= n || seen[i] {
                    return Err(FvError::Domain(format!(
                        "element {x} out of range or repeated"
                    )));
                }
                seen[i] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(FvError::Domain(
                "partition does not cover the ground set".into(),
            ));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { n, blocks })
    }

    /// The partition into singletons.
    pub fn singletons(n: usize) -> Self {
        Self {
            n,
            blocks: (0..n as u32).map(|i| vec![i]).collect(),
        }
    }

    /// Build from a label-to-block-id map (ids need not be contiguous).
    pub fn from_assignment(assignment: &[usize]) -> Self {
        let n = assignment.len();
        let mut ids: Vec<usize> = assignment.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut blocks: Vec<Vec<u32>> = vec![Vec::new(); ids.len()];
        for (label, id) in assignment.iter().enumerate() {
            let slot = ids.binary_search(id).unwrap();
            blocks[slot].push(label as u32);
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Self { n, blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    /// Index (in least-element order) of the block containing `label`.
    pub fn block_of(&self, label: u32) -> usize {
        self.blocks
            .iter()
            .position(|b| b.binary_search(&label).is_ok())
            .expect("label within ground set")
    }

    pub fn same_block(&self, a: u32, b: u32) -> bool {
        self.block_of(a) == self.block_of(b)
    }

    /// Merge the blocks at the given indices into the one with the smallest
    /// least element, keeping least-element order.
    pub fn merge_blocks(&mut self, indices: &[usize]) {
        if indices.len() < 2 {
            return;
        }
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        let target = idx[0];
        let mut absorbed: Vec<u32> = Vec::new();
        for &i in idx[1..].iter().rev() {
            absorbed.extend(self.blocks.remove(i));
        }
        self.blocks[target].extend(absorbed);
        self.blocks[target].sort_unstable();
    }

    /// True if every block of `self` is contained in a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        if self.n != other.n {
            return false;
        }
        self.blocks.iter().all(|b| {
            let host = other.block_of(b[0]);
            b.iter().all(|&x| other.block_of(x) == host)
        })
    }

    /// Sizes of the blocks, in least-element order.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Number of blocks whose relative size is at least `threshold`.
    pub fn blocks_with_frequency(&self, threshold: f64) -> usize {
        let n = self.n as f64;
        self.blocks
            .iter()
            .filter(|b| b.len() as f64 / n >= threshold)
            .count()
    }

    /// Canonical string form `{0,3}{1}{2,4}` for hashing and chi-square bins.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        for b in &self.blocks {
            s.push('{');
            for (i, x) in b.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&x.to_string());
            }
            s.push('}');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_validation() {
        let p = Partition::new(5, vec![vec![3, 1], vec![0], vec![2, 4]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0], vec![1, 3], vec![2, 4]]);
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1, 3], vec![2]]).is_err());
    }

    #[test]
    fn merge_keeps_least_element_order() {
        let mut p = Partition::singletons(5);
        p.merge_blocks(&[1, 3]);
        assert_eq!(p.blocks(), &[vec![0], vec![1, 3], vec![2], vec![4]]);
        p.merge_blocks(&[0, 2]);
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3], vec![4]]);
        assert!(p.same_block(0, 2));
        assert!(!p.same_block(0, 1));
    }

    #[test]
    fn refinement() {
        let fine = Partition::new(4, vec![vec![0], vec![1], vec![2, 3]]).unwrap();
        let coarse = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(fine.refines(&fine));
    }

    #[test]
    fn frequency_count() {
        let p = Partition::new(4, vec![vec![0, 1, 2], vec![3]]).unwrap();
        assert_eq!(p.blocks_with_frequency(0.5), 1);
        assert_eq!(p.blocks_with_frequency(0.25), 2);
        assert_eq!(p.blocks_with_frequency(0.8), 0);
    }

    #[test]
    fn assignment_roundtrip() {
        let p = Partition::from_assignment(&[7, 2, 7, 5]);
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1], vec![3]]);
    }
}
