use serde::{Deserialize, Serialize};

use super::{dense_index, ReadKSequence, SequenceError};

/// Visit counts of a tape head executing a read sequence.
///
/// A cell is visited once for every read that stops on it and once for every
/// move between consecutive reads that passes strictly over it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadWalkProfile {
    pub tape_order: Vec<usize>,
    /// `visits[c]` for tape cell `c`.
    pub visits: Vec<usize>,
    pub max_visits: usize,
}

pub fn head_visit_profile(
    s: &ReadKSequence,
    tape_order: &[usize],
) -> Result<HeadWalkProfile, SequenceError> {
    let mut sorted = tape_order.to_vec();
    sorted.sort_unstable();
    if sorted != s.support() {
        return Err(SequenceError::TapeMismatch);
    }
    let cell_of = dense_index(tape_order, s.universe());
    let cells = tape_order.len();
    let positions: Vec<usize> = s.elems().iter().map(|&v| cell_of[v]).collect();

    let mut visits = vec![0usize; cells];
    // diff[c] accumulates pass-throughs over open ranges.
    let mut diff = vec![0isize; cells + 1];
    for &p in &positions {
        visits[p] += 1;
    }
    for w in positions.windows(2) {
        let (lo, hi) = if w[0] < w[1] {
            (w[0], w[1])
        } else {
            (w[1], w[0])
        };
        if hi > lo + 1 {
            diff[lo + 1] += 1;
            diff[hi] -= 1;
        }
    }
    let mut run = 0isize;
    for c in 0..cells {
        run += diff[c];
        visits[c] += run as usize;
    }
    let max_visits = visits.iter().copied().max().unwrap_or(0);
    Ok(HeadWalkProfile {
        tape_order: tape_order.to_vec(),
        visits,
        max_visits,
    })
}

impl ReadKSequence {
    /// Head walk with the sorted support as tape order.
    pub fn identity_head_profile(&self) -> HeadWalkProfile {
        head_visit_profile(self, self.support()).expect("support is a valid tape")
    }
}
