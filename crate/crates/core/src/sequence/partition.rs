use serde::{Deserialize, Serialize};

use super::interleave::{
    is_2_regularly_interleaving, is_k_regularly_interleaving, PairCertificate,
};
use super::lis::longest_monotone;
use super::monotone::{is_per_read_monotone, Direction};
use super::ReadKSequence;

/// Variables `Y` such that `S|_Y` is per-read-monotone.
///
/// Iterated Erdős–Szekeres: the candidate set is narrowed read by read to a
/// longest monotone subsequence of its occurrence view. Restricting a
/// monotone view keeps it monotone, so earlier reads stay monotone. When the
/// first view is already monotone (canonical input) the result has at least
/// `ceil(m^(1/2^(k-1)))` variables for support size `m`.
pub fn extract_monotone_subset(s: &ReadKSequence) -> Vec<usize> {
    let k = s.k();
    let positions = s.occurrence_positions();
    let support = s.support();
    let mut candidates: Vec<usize> = (0..support.len()).collect();
    for read in 0..k {
        candidates.sort_by_key(|&i| positions[i * k + read]);
        let labels: Vec<usize> = candidates.iter().map(|&i| support[i]).collect();
        let (_, keep) = longest_monotone(&labels);
        candidates = keep.into_iter().map(|p| candidates[p]).collect();
    }
    let mut out: Vec<usize> = candidates.into_iter().map(|i| support[i]).collect();
    out.sort_unstable();
    out
}

/// One part of a [`VariablePartition`] together with its certificates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub vars: Vec<usize>,
    pub directions: Vec<Direction>,
    pub interleaving: Vec<PairCertificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariablePartition {
    pub parts: Vec<Part>,
    /// Whether the k-pass fast path applied.
    pub k_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionDefect {
    #[error("variable {0} is covered more than once")]
    Overlap(usize),
    #[error("variable {0} is not covered")]
    Uncovered(usize),
    #[error("part {0} contains a variable outside the support")]
    Foreign(usize),
    #[error("part {0} is empty")]
    Empty(usize),
    #[error("part {0} is not per-read-monotone")]
    NotMonotone(usize),
    #[error("part {0} is not k-regularly-interleaving")]
    NotInterleaving(usize),
    #[error("part {0} carries a certificate that does not match a fresh check")]
    StaleCertificate(usize),
}

impl VariablePartition {
    pub fn t(&self) -> usize {
        self.parts.len()
    }

    /// Re-derives every certificate from `s` and checks disjoint cover.
    pub fn verify(&self, s: &ReadKSequence) -> Result<(), PartitionDefect> {
        let universe = s.universe();
        let index = s.support_index();
        let mut seen = vec![false; universe];
        for (pi, part) in self.parts.iter().enumerate() {
            if part.vars.is_empty() {
                return Err(PartitionDefect::Empty(pi));
            }
            for &v in &part.vars {
                if v >= universe || index[v] == usize::MAX {
                    return Err(PartitionDefect::Foreign(pi));
                }
                if seen[v] {
                    return Err(PartitionDefect::Overlap(v));
                }
                seen[v] = true;
            }
        }
        if let Some(&v) = s.support().iter().find(|&&v| !seen[v]) {
            return Err(PartitionDefect::Uncovered(v));
        }
        for (pi, part) in self.parts.iter().enumerate() {
            let r = s.restrict(&part.vars);
            let dirs = is_per_read_monotone(&r).map_err(|_| PartitionDefect::NotMonotone(pi))?;
            let certs = is_k_regularly_interleaving(&r)
                .map_err(|_| PartitionDefect::NotInterleaving(pi))?;
            if dirs != part.directions || certs != part.interleaving {
                return Err(PartitionDefect::StaleCertificate(pi));
            }
        }
        Ok(())
    }
}

/// `exp(k^2) * n^(1 - 1/2^(k-1))`, the part-count envelope for read-k inputs.
pub fn partition_bound(k: usize, n: usize) -> f64 {
    let k = k as f64;
    let exponent = 1.0 - 1.0 / 2f64.powf(k - 1.0);
    (k * k).exp() * (n as f64).powf(exponent)
}

/// Splits `vars` until every piece is k-regularly-interleaving. `vars` must
/// already be per-read-monotone under `s`, which every subset inherits.
fn refine(s: &ReadKSequence, vars: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let mut stack = vec![vars];
    while let Some(vars) = stack.pop() {
        if vars.len() <= 1 {
            out.push(vars);
            continue;
        }
        let r = s.restrict(&vars);
        let Err(bad) = is_k_regularly_interleaving(&r) else {
            out.push(vars);
            continue;
        };
        // Split at the forced-block failure: variables whose first occurrence
        // in the failing pair view precedes the failure position go left.
        let view = r.pair_view(bad.i, bad.j).expect("valid pair");
        debug_assert!(is_2_regularly_interleaving(&view).is_err());
        let cut = bad.violation.position;
        let ranks = view.occurrence_ranks();
        let mut left: Vec<usize> = view.elems()[..cut]
            .iter()
            .zip(&ranks[..cut])
            .filter(|(_, &rk)| rk == 0)
            .map(|(&v, _)| v)
            .collect();
        left.sort_unstable();
        let mut right: Vec<usize> = vars
            .iter()
            .copied()
            .filter(|v| left.binary_search(v).is_err())
            .collect();
        if left.is_empty() || right.is_empty() {
            let half = vars.len() / 2;
            left = vars[..half].to_vec();
            right = vars[half..].to_vec();
        }
        stack.push(right);
        stack.push(left);
    }
}

/// Partitions the support into parts whose restrictions are per-read-monotone
/// and k-regularly-interleaving.
///
/// k-pass inputs take the fast path: iterated monotone extraction on the
/// remaining variables (every restriction of a k-pass sequence is k-pass and
/// hence interleaving). Other inputs additionally split each extracted set at
/// interleaving failures, bottoming out at singletons, which always qualify.
/// The result is verified before it is returned.
pub fn partition_variables(s: &ReadKSequence) -> VariablePartition {
    let k_pass = s.is_k_pass();
    let mut remaining: Vec<usize> = s.support().to_vec();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    while !remaining.is_empty() {
        let sub = s.restrict(&remaining);
        let y = extract_monotone_subset(&sub);
        debug_assert!(!y.is_empty());
        remaining.retain(|v| y.binary_search(v).is_err());
        if k_pass {
            groups.push(y);
        } else {
            refine(s, y, &mut groups);
        }
    }
    groups.sort_by_key(|g| g[0]);
    let parts = groups
        .into_iter()
        .map(|vars| {
            let r = s.restrict(&vars);
            let directions = is_per_read_monotone(&r).expect("extracted set is monotone");
            let interleaving = is_k_regularly_interleaving(&r).expect("refined set interleaves");
            Part {
                vars,
                directions,
                interleaving,
            }
        })
        .collect();
    let partition = VariablePartition { parts, k_pass };
    if let Err(defect) = partition.verify(s) {
        panic!("partition_variables produced an invalid partition: {defect}");
    }
    partition
}
