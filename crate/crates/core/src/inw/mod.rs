//! Recursive seed-expansion generator.
//!
//! Outputs sit at the leaves of a balanced binary tree of height
//! `h = ceil(log2 n_out)`. The seed is laid out as
//! `[leaf block][aux_1]...[aux_h]`; the generator of height `j` reads the
//! prefix of length `s_j`. A node of height `j` hands its prefix `s_{j-1}`
//! unchanged to the left child and a mixed copy to the right child, the mix
//! keyed by `aux_j`. A leaf outputs bit 0 of its seed. An interval of length
//! `len` splits as `ceil(len/2)` / `floor(len/2)`.
//!
//! Mixing per mode:
//! - expander: a walk on the degree-8 grid expander over `{0,1}^{s_{j-1}}`,
//!   labelled by `aux_j`;
//! - hash: the leaf block `x` (of `r` bits) is replaced by `T x + b` for the
//!   Toeplitz matrix `T` and offset `b` in `aux_j`, keeping the other bits;
//! - toy: the prefix XOR the short word `aux_j` tiled or folded to fit;
//! - uniform: no tree, the seed is the output.

pub mod expander;
pub mod hash;

use serde::{Deserialize, Serialize};

use crate::bits::{copy_range, BitString};
use crate::generator::{Generator, Workspace};
use expander::{expander_neighbor_into, ExpanderSpec, LABEL_BITS};
use hash::{hash_key_bits, toeplitz_hash, xor_fold_into};

pub use expander::expander_neighbor;

pub const DEFAULT_TOY_AUX_BITS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InwMode {
    Expander,
    Hash,
    Toy { aux_bits: usize },
    Uniform,
}

impl InwMode {
    pub fn toy() -> Self {
        InwMode::Toy {
            aux_bits: DEFAULT_TOY_AUX_BITS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InwMode::Expander => "expander",
            InwMode::Hash => "hash",
            InwMode::Toy { .. } => "toy",
            InwMode::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InwError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("descriptor does not match its parameters: {0}")]
    Inconsistent(String),
}

/// `d * ceil(log2 w) + ceil(log2(2 n_out / eps))`: bits of error control each
/// level must buy.
pub fn level_budget(n_out: usize, d: usize, w: usize, eps: f64) -> usize {
    let lw = (w as f64).log2().ceil() as usize;
    let le = (2.0 * n_out as f64 / eps).log2().ceil().max(0.0) as usize;
    d * lw + le
}

/// Walk length per level: one 3-bit label per started group of three budget
/// bits.
pub fn expander_steps(budget: usize) -> usize {
    budget.div_ceil(LABEL_BITS)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InwFile {
    n_out: usize,
    d: usize,
    w: usize,
    eps: f64,
    mode: InwMode,
    height: usize,
    leaf_bits: usize,
    level_aux_bits: Vec<usize>,
    seed_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InwFile", into = "InwFile")]
pub struct InwDescriptor {
    n_out: usize,
    d: usize,
    w: usize,
    eps: f64,
    mode: InwMode,
    height: usize,
    leaf_bits: usize,
    level_aux_bits: Vec<usize>,
    seed_len: usize,
    /// `prefix[j] = s_j`.
    prefix: Vec<usize>,
}

impl TryFrom<InwFile> for InwDescriptor {
    type Error = InwError;

    fn try_from(f: InwFile) -> Result<Self, Self::Error> {
        let g = build_inw(f.n_out, f.d, f.w, f.eps, f.mode)?;
        let check = |what: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(InwError::Inconsistent(what.to_string()))
            }
        };
        check("height", g.height == f.height)?;
        check("leaf_bits", g.leaf_bits == f.leaf_bits)?;
        check("level_aux_bits", g.level_aux_bits == f.level_aux_bits)?;
        check("seed_len", g.seed_len == f.seed_len)?;
        Ok(g)
    }
}

impl From<InwDescriptor> for InwFile {
    fn from(g: InwDescriptor) -> Self {
        InwFile {
            n_out: g.n_out,
            d: g.d,
            w: g.w,
            eps: g.eps,
            mode: g.mode,
            height: g.height,
            leaf_bits: g.leaf_bits,
            level_aux_bits: g.level_aux_bits,
            seed_len: g.seed_len,
        }
    }
}

pub fn tree_height(n_out: usize) -> usize {
    n_out.next_power_of_two().trailing_zeros() as usize
}

pub fn build_inw(
    n_out: usize,
    d: usize,
    w: usize,
    eps: f64,
    mode: InwMode,
) -> Result<InwDescriptor, InwError> {
    if n_out == 0 {
        return Err(InwError::InvalidParams("n_out must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(InwError::InvalidParams(format!(
            "eps = {eps} outside (0, 1)"
        )));
    }
    if w < 2 {
        return Err(InwError::InvalidParams(format!("w = {w}, need w >= 2")));
    }
    if d < 1 {
        return Err(InwError::InvalidParams("d must be at least 1".into()));
    }
    let height = tree_height(n_out);
    let budget = level_budget(n_out, d, w, eps);
    let (height, leaf_bits, aux) = match mode {
        InwMode::Uniform => (0, n_out, 0),
        InwMode::Expander => (height, 1, LABEL_BITS * expander_steps(budget)),
        InwMode::Hash if height == 0 => (0, 1, 0),
        InwMode::Hash => (height, budget, hash_key_bits(budget)),
        InwMode::Toy { aux_bits } => {
            if aux_bits == 0 {
                return Err(InwError::InvalidParams(
                    "toy mode needs aux_bits >= 1".into(),
                ));
            }
            (height, 1, aux_bits)
        }
    };
    let level_aux_bits = vec![aux; height];
    let mut prefix = vec![leaf_bits];
    for &a in &level_aux_bits {
        prefix.push(prefix.last().unwrap() + a);
    }
    let seed_len = *prefix.last().unwrap();
    Ok(InwDescriptor {
        n_out,
        d,
        w,
        eps,
        mode,
        height,
        leaf_bits,
        level_aux_bits,
        seed_len,
        prefix,
    })
}

impl InwDescriptor {
    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn mode(&self) -> InwMode {
        self.mode
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn leaf_bits(&self) -> usize {
        self.leaf_bits
    }

    /// `level_aux_bits()[j - 1]` is the width of `aux_j`.
    pub fn level_aux_bits(&self) -> &[usize] {
        &self.level_aux_bits
    }

    /// Recomputes `s` from the layout.
    pub fn layout_seed_len(&self) -> usize {
        self.leaf_bits + self.level_aux_bits.iter().sum::<usize>()
    }

    /// The expander used at level `j >= 1`, in expander mode.
    pub fn expander_spec(&self, j: usize) -> Option<ExpanderSpec> {
        match self.mode {
            InwMode::Expander if (1..=self.height).contains(&j) => Some(ExpanderSpec {
                bits: self.prefix[j - 1],
                steps: self.level_aux_bits[j - 1] / LABEL_BITS,
            }),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Writes the seed handed to the right child of a height-`j` node.
    fn mix(&self, j: usize, buf: &[u64], dst: &mut Vec<u64>, tmp: &mut Vec<u64>) {
        let len = self.prefix[j - 1];
        let aux = self.level_aux_bits[j - 1];
        match self.mode {
            InwMode::Expander => {
                let spec = ExpanderSpec {
                    bits: len,
                    steps: aux / LABEL_BITS,
                };
                expander_neighbor_into(buf, buf, len, spec, dst, tmp);
            }
            InwMode::Hash => {
                copy_range(buf, 0, len, dst);
                toeplitz_hash(buf, buf, len, self.leaf_bits, dst);
            }
            InwMode::Toy { .. } => {
                copy_range(buf, 0, len, dst);
                xor_fold_into(dst, len, buf, len, aux);
            }
            InwMode::Uniform => unreachable!("uniform mode has no tree"),
        }
    }

    fn node(
        &self,
        j: usize,
        buf: &[u64],
        out: &mut [bool],
        levels: &mut [Vec<u64>],
        tmp: &mut Vec<u64>,
    ) {
        if j == 0 {
            debug_assert_eq!(out.len(), 1);
            out[0] = buf[0] & 1 == 1;
            return;
        }
        let left = out.len().div_ceil(2);
        let (lo, hi) = out.split_at_mut(left);
        self.node(j - 1, buf, lo, levels, tmp);
        if !hi.is_empty() {
            let (lower, upper) = levels.split_at_mut(j - 1);
            let dst = &mut upper[0];
            self.mix(j, buf, dst, tmp);
            self.node(j - 1, dst, hi, lower, tmp);
        }
    }
}

impl Generator for InwDescriptor {
    fn seed_len(&self) -> usize {
        self.seed_len
    }

    fn output_len(&self) -> usize {
        self.n_out
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn label(&self) -> String {
        format!(
            "inw({}, n={}, d={}, w={}, s={})",
            self.mode.name(),
            self.n_out,
            self.d,
            self.w,
            self.seed_len
        )
    }

    fn expand_with(&self, seed: &BitString, out: &mut [bool], ws: &mut Workspace) {
        assert_eq!(seed.len(), self.seed_len, "seed length");
        assert_eq!(out.len(), self.n_out, "output length");
        if self.mode == InwMode::Uniform {
            for (i, o) in out.iter_mut().enumerate() {
                *o = seed.get(i);
            }
            return;
        }
        if ws.levels.len() < self.height {
            ws.levels.resize(self.height, Vec::new());
        }
        self.node(self.height, seed.words(), out, &mut ws.levels, &mut ws.tmp);
    }
}
