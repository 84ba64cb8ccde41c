//! Read-k sequences and their structure theory.
//!
//! A [`ReadKSequence`] lists variable reads; every variable in its support
//! occurs exactly `k` times. Variables are 0-based labels compared by their
//! natural order. Restrictions keep the original labels, so the support of a
//! restricted sequence is an arbitrary sorted set rather than `0..n`.
//!
//! Read indices (`read`, `i`, `j`) are 0-based throughout the API.

mod head;
mod interleave;
mod io;
mod lis;
mod monotone;
mod partition;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use head::{head_visit_profile, HeadWalkProfile};
pub use interleave::{
    is_2_regularly_interleaving, is_k_regularly_interleaving, Block, InterleavingCertificate,
    InterleavingViolation, PairCertificate, PairViolation, ViolationKind,
};
pub use io::{format_sequence_file, parse_sequence_file, parse_sequence_file_general};
pub use lis::{longest_monotone, longest_monotone_subsequence};
pub use monotone::{
    is_per_read_monotone, monotone_decomposition, Direction, MonotoneDecomposition, NonMonotone,
    Segment,
};
pub use partition::{
    extract_monotone_subset, partition_bound, partition_variables, Part, PartitionDefect,
    VariablePartition,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SequenceError {
    #[error("variable {} out of range for n = {n}", .var.wrapping_add(1))]
    VariableOutOfRange { var: usize, n: usize },
    #[error("wrong multiplicity: variable {} appears {count} time(s), expected {expected}", .var + 1)]
    WrongMultiplicity {
        var: usize,
        count: usize,
        expected: usize,
    },
    #[error("sequence has length {len}, expected k*n = {expected}")]
    LengthMismatch { len: usize, expected: usize },
    #[error("read multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("read index {index} out of range for k = {k}")]
    ReadIndexOutOfRange { index: usize, k: usize },
    #[error("tape order is not a permutation of the sequence support")]
    TapeMismatch,
    #[error("read {read} is not monotone")]
    NotPerReadMonotone { read: usize },
    #[error("reads cannot be assigned to contiguous segments (read {read})")]
    AmbiguousBoundary { read: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A sequence over a sorted support in which every variable occurs exactly
/// `k` times.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReadKSequence {
    k: usize,
    support: Vec<usize>,
    elems: Vec<usize>,
}

/// An occurrence view `S^(i)`: the support ordered by the position of each
/// variable's `read`-th occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceView {
    pub read: usize,
    pub order: Vec<usize>,
}

/// The bijection applied by [`ReadKSequence::canonical_relabel`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabeling {
    /// `original[new]` is the original label renamed to `new`.
    original: Vec<usize>,
}

impl Relabeling {
    pub fn to_original(&self, new: usize) -> usize {
        self.original[new]
    }

    pub fn to_canonical(&self, original: usize) -> Option<usize> {
        self.original.iter().position(|&v| v == original)
    }

    /// `(original, new)` pairs in order of new label.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.original.iter().enumerate().map(|(new, &v)| (v, new))
    }

    pub fn is_identity(&self) -> bool {
        self.original.iter().enumerate().all(|(i, &v)| i == v)
    }
}

impl ReadKSequence {
    /// Validates `elems` as a read-`k` sequence over `0..n`.
    pub fn new(elems: Vec<usize>, n: usize, k: usize) -> Result<Self, SequenceError> {
        if k == 0 {
            return Err(SequenceError::ZeroMultiplicity);
        }
        if let Some(&var) = elems.iter().find(|&&v| v >= n) {
            return Err(SequenceError::VariableOutOfRange { var, n });
        }
        if elems.len() != k * n {
            return Err(SequenceError::LengthMismatch {
                len: elems.len(),
                expected: k * n,
            });
        }
        let mut counts = vec![0usize; n];
        for &v in &elems {
            counts[v] += 1;
        }
        if let Some((var, &count)) = counts.iter().enumerate().find(|(_, &c)| c != k) {
            return Err(SequenceError::WrongMultiplicity {
                var,
                count,
                expected: k,
            });
        }
        Ok(ReadKSequence {
            k,
            support: (0..n).collect(),
            elems,
        })
    }

    /// Convenience constructor from 1-based labels.
    pub fn from_one_based(elems: &[usize], n: usize, k: usize) -> Result<Self, SequenceError> {
        if let Some(&var) = elems.iter().find(|&&v| v == 0 || v > n) {
            return Err(SequenceError::VariableOutOfRange {
                var: var.wrapping_sub(1),
                n,
            });
        }
        Self::new(elems.iter().map(|v| v - 1).collect(), n, k)
    }

    /// Validates `elems` as a read-`k` sequence over the given support
    /// (which need not be `0..n`).
    pub fn with_support(
        elems: Vec<usize>,
        support: Vec<usize>,
        k: usize,
    ) -> Result<Self, SequenceError> {
        if k == 0 {
            return Err(SequenceError::ZeroMultiplicity);
        }
        let mut support = support;
        support.sort_unstable();
        support.dedup();
        let universe = support.last().map_or(0, |&m| m + 1);
        let index = dense_index(&support, universe);
        let mut counts = vec![0usize; support.len()];
        for &v in &elems {
            match index.get(v).copied().filter(|&i| i != usize::MAX) {
                Some(i) => counts[i] += 1,
                None => {
                    return Err(SequenceError::VariableOutOfRange {
                        var: v,
                        n: universe,
                    });
                }
            }
        }
        if elems.len() != k * support.len() {
            return Err(SequenceError::LengthMismatch {
                len: elems.len(),
                expected: k * support.len(),
            });
        }
        if let Some((i, &count)) = counts.iter().enumerate().find(|(_, &c)| c != k) {
            return Err(SequenceError::WrongMultiplicity {
                var: support[i],
                count,
                expected: k,
            });
        }
        Ok(ReadKSequence { k, support, elems })
    }

    /// The `k`-pass sequence `0..n` followed by each permutation in `passes`.
    pub fn k_pass(passes: &[Vec<usize>], n: usize) -> Result<Self, SequenceError> {
        let mut elems: Vec<usize> = (0..n).collect();
        for p in passes {
            elems.extend_from_slice(p);
        }
        Self::new(elems, n, passes.len() + 1)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of variables in the support.
    pub fn n(&self) -> usize {
        self.support.len()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    /// Sorted variable labels that occur in the sequence.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// One past the largest label in the support.
    pub fn universe(&self) -> usize {
        self.support.last().map_or(0, |&m| m + 1)
    }

    /// `index[label]` is the label's position in the support, or `usize::MAX`.
    pub(crate) fn support_index(&self) -> Vec<usize> {
        dense_index(&self.support, self.universe())
    }

    /// For every position, which occurrence (0-based) of its variable it is.
    pub fn occurrence_ranks(&self) -> Vec<usize> {
        let index = self.support_index();
        let mut seen = vec![0usize; self.support.len()];
        self.elems
            .iter()
            .map(|&v| {
                let slot = &mut seen[index[v]];
                let r = *slot;
                *slot += 1;
                r
            })
            .collect()
    }

    /// `positions[i * k + r]` is where support variable `i` occurs for the
    /// `r`-th time.
    pub(crate) fn occurrence_positions(&self) -> Vec<usize> {
        let index = self.support_index();
        let k = self.k;
        let mut seen = vec![0usize; self.support.len()];
        let mut pos = vec![0usize; self.support.len() * k];
        for (p, &v) in self.elems.iter().enumerate() {
            let i = index[v];
            pos[i * k + seen[i]] = p;
            seen[i] += 1;
        }
        pos
    }

    pub fn occurrence_view(&self, read: usize) -> Result<OccurrenceView, SequenceError> {
        if read >= self.k {
            return Err(SequenceError::ReadIndexOutOfRange {
                index: read,
                k: self.k,
            });
        }
        let ranks = self.occurrence_ranks();
        let order = self
            .elems
            .iter()
            .zip(&ranks)
            .filter(|(_, &r)| r == read)
            .map(|(&v, _)| v)
            .collect();
        Ok(OccurrenceView { read, order })
    }

    /// `S|_Y`: the subsequence of reads of variables in `keep`. Labels outside
    /// the support are ignored.
    pub fn restrict(&self, keep: &[usize]) -> ReadKSequence {
        let universe = self.universe();
        let mut mask = vec![false; universe];
        for &v in keep {
            if v < universe {
                mask[v] = true;
            }
        }
        ReadKSequence {
            k: self.k,
            support: self.support.iter().copied().filter(|&v| mask[v]).collect(),
            elems: self.elems.iter().copied().filter(|&v| mask[v]).collect(),
        }
    }

    pub fn restrict_set(&self, keep: &BTreeSet<usize>) -> ReadKSequence {
        let keep: Vec<usize> = keep.iter().copied().collect();
        self.restrict(&keep)
    }

    /// `S^(i,j)`: the read-2 subsequence of the `i`-th and `j`-th occurrences.
    pub fn pair_view(&self, i: usize, j: usize) -> Result<ReadKSequence, SequenceError> {
        if j >= self.k {
            return Err(SequenceError::ReadIndexOutOfRange {
                index: j,
                k: self.k,
            });
        }
        if i >= j {
            return Err(SequenceError::ReadIndexOutOfRange {
                index: i,
                k: self.k,
            });
        }
        let ranks = self.occurrence_ranks();
        let elems = self
            .elems
            .iter()
            .zip(&ranks)
            .filter(|(_, &r)| r == i || r == j)
            .map(|(&v, _)| v)
            .collect();
        Ok(ReadKSequence {
            k: 2,
            support: self.support.clone(),
            elems,
        })
    }

    /// Renames variables so that the first-occurrence order is `0, 1, ..., n-1`.
    pub fn canonical_relabel(&self) -> (ReadKSequence, Relabeling) {
        let universe = self.universe();
        let mut new_label = vec![usize::MAX; universe];
        let mut original = Vec::with_capacity(self.support.len());
        for &v in &self.elems {
            if new_label[v] == usize::MAX {
                new_label[v] = original.len();
                original.push(v);
            }
        }
        let elems = self.elems.iter().map(|&v| new_label[v]).collect();
        (
            ReadKSequence {
                k: self.k,
                support: (0..original.len()).collect(),
                elems,
            },
            Relabeling { original },
        )
    }

    /// Order-preserving relabeling of the support onto `0..n`.
    pub fn compact(&self) -> ReadKSequence {
        let index = self.support_index();
        ReadKSequence {
            k: self.k,
            support: (0..self.support.len()).collect(),
            elems: self.elems.iter().map(|&v| index[v]).collect(),
        }
    }

    /// True when the `r`-th occurrences occupy exactly positions
    /// `[r*n, (r+1)*n)` for every read `r`.
    pub fn is_k_pass(&self) -> bool {
        let n = self.n();
        self.occurrence_ranks()
            .iter()
            .enumerate()
            .all(|(p, &r)| p / n.max(1) == r)
    }

    /// The sequence in 1-based labels, for display.
    pub fn one_based(&self) -> Vec<usize> {
        self.elems.iter().map(|v| v + 1).collect()
    }
}

pub(crate) fn dense_index(support: &[usize], universe: usize) -> Vec<usize> {
    let mut index = vec![usize::MAX; universe];
    for (i, &v) in support.iter().enumerate() {
        index[v] = i;
    }
    index
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn seq(elems: &[usize], n: usize, k: usize) -> ReadKSequence {
        ReadKSequence::from_one_based(elems, n, k).unwrap()
    }

    pub(crate) fn random_sequence(n: usize, k: usize, rng: &mut ChaCha8Rng) -> ReadKSequence {
        let mut elems: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
        elems.shuffle(rng);
        ReadKSequence::new(elems, n, k).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(ReadKSequence::from_one_based(&[1, 2, 1, 2], 2, 2).is_ok());
        assert!(ReadKSequence::from_one_based(&[1, 1, 1], 1, 3).is_ok());
        assert_eq!(
            ReadKSequence::from_one_based(&[1, 2, 2, 2], 2, 2),
            Err(SequenceError::WrongMultiplicity {
                var: 0,
                count: 1,
                expected: 2
            })
        );
        assert!(matches!(
            ReadKSequence::from_one_based(&[1, 2, 1], 2, 2),
            Err(SequenceError::LengthMismatch {
                len: 3,
                expected: 4
            })
        ));
        assert!(matches!(
            ReadKSequence::new(vec![0, 2], 2, 1),
            Err(SequenceError::VariableOutOfRange { var: 2, n: 2 })
        ));
    }

    #[test]
    fn canonical_relabel_examples() {
        let (c, map) = seq(&[2, 1, 2, 1], 2, 2).canonical_relabel();
        assert_eq!(c.one_based(), vec![1, 2, 1, 2]);
        // 1-based {2->1, 1->2}
        assert_eq!(map.to_canonical(1), Some(0));
        assert_eq!(map.to_canonical(0), Some(1));

        let (c, map) = seq(&[1, 2, 1, 2], 2, 2).canonical_relabel();
        assert_eq!(c.one_based(), vec![1, 2, 1, 2]);
        assert!(map.is_identity());

        let (c, map) = seq(&[3, 1, 2, 3, 1, 2], 3, 2).canonical_relabel();
        assert_eq!(c.one_based(), vec![1, 2, 3, 1, 2, 3]);
        let pairs: Vec<_> = map.pairs().map(|(o, n)| (o + 1, n + 1)).collect();
        assert_eq!(pairs, vec![(3, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn occurrence_view_examples() {
        let v = seq(&[1, 2, 1, 2], 2, 2).occurrence_view(1).unwrap();
        assert_eq!(v.order, vec![0, 1]);
        let v = seq(&[1, 2, 2, 1], 2, 2).occurrence_view(1).unwrap();
        assert_eq!(v.order, vec![1, 0]);
        assert!(matches!(
            seq(&[1, 2, 2, 1], 2, 2).occurrence_view(2),
            Err(SequenceError::ReadIndexOutOfRange { index: 2, k: 2 })
        ));
    }

    #[test]
    fn restrict_examples() {
        let s = seq(&[1, 2, 3, 1, 2, 3], 3, 2);
        let r = s.restrict(&[0, 2]);
        assert_eq!(r.one_based(), vec![1, 3, 1, 3]);
        assert_eq!(r.support(), &[0, 2]);
        assert_eq!(s.restrict(&[0, 1, 2]), s);
        let e = s.restrict(&[]);
        assert!(e.is_empty());
        assert_eq!(e.n(), 0);
    }

    #[test]
    fn pair_view_examples() {
        let s = seq(&[1, 2, 1, 2], 2, 2);
        assert_eq!(s.pair_view(0, 1).unwrap(), s);
        let s = seq(&[1, 2, 1, 2, 2, 1], 2, 3);
        assert_eq!(s.pair_view(0, 2).unwrap().one_based(), vec![1, 2, 2, 1]);
        let s = seq(&[1, 1, 1], 1, 3);
        assert_eq!(s.pair_view(1, 2).unwrap().one_based(), vec![1, 1]);
        assert!(s.pair_view(2, 1).is_err());
        assert!(s.pair_view(1, 3).is_err());
    }

    #[test]
    fn k_pass_detection() {
        assert!(seq(&[1, 2, 3, 3, 1, 2], 3, 2).is_k_pass());
        assert!(!seq(&[1, 2, 1, 3, 2, 3], 3, 2).is_k_pass());
        assert!(seq(&[1, 1, 1], 1, 3).is_k_pass());
    }

    fn arb_sequence() -> impl Strategy<Value = ReadKSequence> {
        (1usize..7, 1usize..4, any::<u64>()).prop_map(|(n, k, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            random_sequence(n, k, &mut rng)
        })
    }

    proptest! {
        #[test]
        fn restrict_composes(s in arb_sequence(), y in proptest::collection::vec(0usize..7, 0..7), z in proptest::collection::vec(0usize..7, 0..7)) {
            let both: Vec<usize> = y.iter().copied().filter(|v| z.contains(v)).collect();
            prop_assert_eq!(s.restrict(&y).restrict(&z), s.restrict(&both));
        }

        #[test]
        fn restrict_union_then_part(s in arb_sequence(), split in any::<u64>()) {
            let y: Vec<usize> = s.support().iter().copied().filter(|v| (split >> v) & 1 == 1).collect();
            let z: Vec<usize> = s.support().iter().copied().filter(|v| (split >> v) & 3 == 2).collect();
            let mut yz = y.clone();
            yz.extend(&z);
            prop_assert_eq!(s.restrict(&yz).restrict(&y), s.restrict(&y));
        }

        #[test]
        fn views_are_permutations(s in arb_sequence()) {
            for r in 0..s.k() {
                let mut order = s.occurrence_view(r).unwrap().order;
                order.sort_unstable();
                prop_assert_eq!(order, s.support().to_vec());
            }
        }

        #[test]
        fn canonical_first_view_is_identity(s in arb_sequence()) {
            let (c, map) = s.canonical_relabel();
            prop_assert_eq!(c.occurrence_view(0).unwrap().order, (0..s.n()).collect::<Vec<_>>());
            let back: Vec<usize> = c.elems().iter().map(|&v| map.to_original(v)).collect();
            prop_assert_eq!(back, s.elems().to_vec());
        }
    }

    #[test]
    fn views_are_permutations_exhaustive_read2_n4() {
        let all = crate::harness::enumerate_read_k(4, 2);
        assert_eq!(all.len(), 2520);
        for s in all {
            for r in 0..2 {
                let mut order = s.occurrence_view(r).unwrap().order;
                order.sort_unstable();
                assert_eq!(order, vec![0, 1, 2, 3]);
            }
        }
    }
}
