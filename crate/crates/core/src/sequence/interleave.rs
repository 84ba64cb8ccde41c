use serde::{Deserialize, Serialize};

use super::ReadKSequence;

/// One complete block `[start, end)` of a read-2 sequence: all first
/// occurrences of `vars` followed by all their second occurrences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    pub vars: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleavingCertificate {
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A first occurrence arrived after second occurrences began, while some
    /// variable of the open block was still missing its second occurrence.
    FirstAfterSeconds,
    /// The sequence ended inside an incomplete block.
    UnclosedBlock,
    /// The input is not a read-2 sequence.
    NotReadTwo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleavingViolation {
    /// Position in the read-2 sequence where the forced block failed.
    pub position: usize,
    pub kind: ViolationKind,
    /// Start of the block that could not be closed.
    pub block_start: usize,
}

/// Decides 2-regular interleaving of a read-2 sequence.
///
/// Block boundaries are forced: a block accumulates first occurrences until a
/// second occurrence appears, then only second occurrences, and must close
/// exactly when a new first occurrence shows up. The scan therefore either
/// produces the unique block decomposition or proves none exists.
pub fn is_2_regularly_interleaving(
    s: &ReadKSequence,
) -> Result<InterleavingCertificate, InterleavingViolation> {
    if s.k() != 2 {
        return Err(InterleavingViolation {
            position: 0,
            kind: ViolationKind::NotReadTwo,
            block_start: 0,
        });
    }
    let ranks = s.occurrence_ranks();
    let elems = s.elems();
    let mut blocks = Vec::new();
    let mut block_start = 0;
    let mut firsts = 0usize;
    let mut seconds = 0usize;

    let close = |blocks: &mut Vec<Block>, start: usize, end: usize| {
        let mut vars: Vec<usize> = elems[start..end]
            .iter()
            .zip(&ranks[start..end])
            .filter(|(_, &r)| r == 0)
            .map(|(&v, _)| v)
            .collect();
        vars.sort_unstable();
        blocks.push(Block { start, end, vars });
    };

    for (p, &r) in ranks.iter().enumerate() {
        if r == 0 {
            if seconds > 0 {
                if seconds != firsts {
                    return Err(InterleavingViolation {
                        position: p,
                        kind: ViolationKind::FirstAfterSeconds,
                        block_start,
                    });
                }
                close(&mut blocks, block_start, p);
                block_start = p;
                firsts = 0;
                seconds = 0;
            }
            firsts += 1;
        } else {
            // A second occurrence always belongs to the open block: closed
            // blocks are complete, so its first occurrence is still open.
            seconds += 1;
        }
    }
    if seconds != firsts {
        return Err(InterleavingViolation {
            position: ranks.len(),
            kind: ViolationKind::UnclosedBlock,
            block_start,
        });
    }
    if !ranks.is_empty() {
        close(&mut blocks, block_start, ranks.len());
    }
    Ok(InterleavingCertificate { blocks })
}

/// Certificate for one pair of reads `(i, j)`, `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCertificate {
    pub i: usize,
    pub j: usize,
    pub certificate: InterleavingCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairViolation {
    pub i: usize,
    pub j: usize,
    pub violation: InterleavingViolation,
}

/// Checks every pair view `S^(i,j)`. Sequences with `k = 1` have no pairs and
/// are accepted vacuously.
pub fn is_k_regularly_interleaving(
    s: &ReadKSequence,
) -> Result<Vec<PairCertificate>, PairViolation> {
    let mut out = Vec::new();
    for i in 0..s.k() {
        for j in i + 1..s.k() {
            let view = s.pair_view(i, j).expect("indices in range");
            match is_2_regularly_interleaving(&view) {
                Ok(certificate) => out.push(PairCertificate { i, j, certificate }),
                Err(violation) => return Err(PairViolation { i, j, violation }),
            }
        }
    }
    Ok(out)
}
