//! The seed-expansion interface shared by every generator.

use crate::bits::BitString;

/// Reusable scratch space for [`Generator::expand_with`]. A workspace may be
/// reused across calls and generators; hot loops keep one per thread.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    pub(crate) levels: Vec<Vec<u64>>,
    pub(crate) tmp: Vec<u64>,
    pub(crate) seeds: Vec<BitString>,
    pub(crate) bits: Vec<bool>,
    pub(crate) children: Vec<Workspace>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("seed has {got} bits, generator expects {expected}")]
pub struct SeedLengthMismatch {
    pub got: usize,
    pub expected: usize,
}

pub trait Generator: Send + Sync {
    fn seed_len(&self) -> usize;

    fn output_len(&self) -> usize;

    /// Error parameter the generator was built for.
    fn eps(&self) -> f64;

    /// Short human-readable name.
    fn label(&self) -> String;

    /// Writes the expansion of `seed` into `out`. Panics when the lengths
    /// disagree with [`seed_len`](Self::seed_len) and
    /// [`output_len`](Self::output_len).
    fn expand_with(&self, seed: &BitString, out: &mut [bool], ws: &mut Workspace);

    fn expand(&self, seed: &BitString) -> Result<Vec<bool>, SeedLengthMismatch> {
        if seed.len() != self.seed_len() {
            return Err(SeedLengthMismatch {
                got: seed.len(),
                expected: self.seed_len(),
            });
        }
        let mut out = vec![false; self.output_len()];
        self.expand_with(seed, &mut out, &mut Workspace::new());
        Ok(out)
    }
}

/// The identity map on `n` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformGenerator {
    pub n: usize,
}

impl Generator for UniformGenerator {
    fn seed_len(&self) -> usize {
        self.n
    }

    fn output_len(&self) -> usize {
        self.n
    }

    fn eps(&self) -> f64 {
        0.0
    }

    fn label(&self) -> String {
        format!("uniform(n={})", self.n)
    }

    fn expand_with(&self, seed: &BitString, out: &mut [bool], _ws: &mut Workspace) {
        assert_eq!(seed.len(), self.n, "seed length");
        assert_eq!(out.len(), self.n, "output length");
        for (i, o) in out.iter_mut().enumerate() {
            *o = seed.get(i);
        }
    }
}
