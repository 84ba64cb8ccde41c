use serde::{Deserialize, Serialize};

use super::{ReadKSequence, SequenceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn holds(self, a: usize, b: usize) -> bool {
        match self {
            Direction::Increasing => a < b,
            Direction::Decreasing => a > b,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Direction::Increasing => "inc",
            Direction::Decreasing => "dec",
        }
    }
}

/// Witness that some occurrence view is not monotone: the first adjacent pair
/// fixes a direction and a later adjacent pair contradicts it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonMonotone {
    pub read: usize,
    pub established: (usize, usize),
    pub violating: (usize, usize),
}

/// Direction of one view; views of length at most one count as increasing.
fn view_direction(order: &[usize]) -> Result<Direction, ((usize, usize), (usize, usize))> {
    if order.len() < 2 {
        return Ok(Direction::Increasing);
    }
    let first = (order[0], order[1]);
    let dir = if first.0 < first.1 {
        Direction::Increasing
    } else {
        Direction::Decreasing
    };
    for w in order.windows(2) {
        if !dir.holds(w[0], w[1]) {
            return Err((first, (w[0], w[1])));
        }
    }
    Ok(dir)
}

/// Directions of every occurrence view, or the first read whose view is not
/// monotone.
pub fn is_per_read_monotone(s: &ReadKSequence) -> Result<Vec<Direction>, NonMonotone> {
    let ranks = s.occurrence_ranks();
    let mut views: Vec<Vec<usize>> = vec![Vec::with_capacity(s.n()); s.k()];
    for (&v, &r) in s.elems().iter().zip(&ranks) {
        views[r].push(v);
    }
    views
        .iter()
        .enumerate()
        .map(|(read, order)| {
            view_direction(order).map_err(|(established, violating)| NonMonotone {
                read,
                established,
                violating,
            })
        })
        .collect()
}

/// A maximal run of reads sharing one direction, together with the
/// contiguous stretch of positions `[start, end)` holding exactly those reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub direction: Direction,
    /// Reads `first_read..end_read` belong to this segment.
    pub first_read: usize,
    pub end_read: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneDecomposition {
    pub segments: Vec<Segment>,
}

impl MonotoneDecomposition {
    /// First read of every segment (`i_1 < i_2 < ...`).
    pub fn read_boundaries(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.first_read).collect()
    }
}

/// Splits a per-read-monotone sequence into segments of alternating
/// direction. Each read is assigned to the unique segment containing all of
/// its occurrences; inputs where that is impossible are rejected.
pub fn monotone_decomposition(s: &ReadKSequence) -> Result<MonotoneDecomposition, SequenceError> {
    let dirs =
        is_per_read_monotone(s).map_err(|w| SequenceError::NotPerReadMonotone { read: w.read })?;
    if s.is_empty() {
        return Ok(MonotoneDecomposition { segments: vec![] });
    }
    let ranks = s.occurrence_ranks();

    // Runs of equal direction over read indices.
    let mut runs: Vec<(usize, usize, Direction)> = Vec::new();
    for (r, &d) in dirs.iter().enumerate() {
        match runs.last_mut() {
            Some(last) if last.2 == d => last.1 = r + 1,
            _ => runs.push((r, r + 1, d)),
        }
    }

    let run_of_read: Vec<usize> = runs
        .iter()
        .enumerate()
        .flat_map(|(j, &(a, b, _))| std::iter::repeat_n(j, b - a))
        .collect();

    let mut segments = Vec::with_capacity(runs.len());
    let mut start = 0;
    for (j, &(first_read, end_read, direction)) in runs.iter().enumerate() {
        let mut end = start;
        while end < ranks.len() && run_of_read[ranks[end]] == j {
            end += 1;
        }
        if end == start {
            return Err(SequenceError::AmbiguousBoundary { read: first_read });
        }
        segments.push(Segment {
            start,
            end,
            direction,
            first_read,
            end_read,
        });
        start = end;
    }
    if start != ranks.len() {
        return Err(SequenceError::AmbiguousBoundary { read: ranks[start] });
    }
    Ok(MonotoneDecomposition { segments })
}
