//! Input fixtures shared by the benchmarks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use readk_core::ReadKSequence;

/// Identity pass followed by a random permutation.
pub fn two_pass(n: usize, seed: u64) -> ReadKSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pi: Vec<usize> = (0..n).collect();
    pi.shuffle(&mut rng);
    ReadKSequence::k_pass(&[pi], n).expect("permutation of 0..n")
}

/// Uniformly shuffled multiset with every variable `k` times.
pub fn shuffled_read_k(n: usize, k: usize, seed: u64) -> ReadKSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elems: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    elems.shuffle(&mut rng);
    ReadKSequence::new(elems, n, k).expect("every variable k times")
}
