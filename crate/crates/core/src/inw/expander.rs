//! Degree-8 affine expander on a grid of bit strings.
//!
//! A vertex is an `s`-bit string split into `u` (low `ceil(s/2)` bits) and
//! `v` (the remaining high bits), read as elements of `Z_{2^a}` and
//! `Z_{2^b}`. For `a = b` this is the `Z_m x Z_m` grid with `m = 2^a`. The
//! eight labels act as
//!
//! ```text
//! 0: (u+v, v)    1: (u-v, v)    2: (u+v+1, v)    3: (u-v-1, v)
//! 4: (u, v+u)    5: (u, v-u)    6: (u, v+u+1)    7: (u, v-u-1)
//! ```
//!
//! Each label is a bijection and labels pair up as inverses, so the graph is
//! 8-regular and undirected.

use serde::{Deserialize, Serialize};

use crate::bits::{low_mask, read_bits, words_for, write_bits};

/// Second-eigenvalue bound used to size walks.
pub const BASE_SPECTRAL_BOUND: f64 = 0.883_883_476_483_184_4; // 5*sqrt(2)/8

pub const BASE_DEGREE: usize = 8;

pub const LABEL_BITS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpanderSpec {
    /// Vertex width; the vertex set is `{0,1}^bits`.
    pub bits: usize,
    /// Powering exponent: base steps per neighbor query.
    pub steps: usize,
}

impl ExpanderSpec {
    pub fn u_bits(&self) -> usize {
        self.bits.div_ceil(2)
    }

    pub fn v_bits(&self) -> usize {
        self.bits / 2
    }

    pub fn label_bits(&self) -> usize {
        LABEL_BITS * self.steps
    }

    pub fn degree(&self) -> f64 {
        (BASE_DEGREE as f64).powi(self.steps as i32)
    }

    pub fn spectral_bound(&self) -> f64 {
        BASE_SPECTRAL_BOUND.powi(self.steps as i32)
    }
}

/// One powered step: walks `spec.steps` base edges from `vertex`, the `j`-th
/// edge labelled by bits `label_start + [3j, 3j+3)` of `label`. Both are little-endian word
/// slices; the result is written to `out` (resized to the vertex width).
pub fn expander_neighbor_into(
    vertex: &[u64],
    label: &[u64],
    label_start: usize,
    spec: ExpanderSpec,
    out: &mut Vec<u64>,
    scratch: &mut Vec<u64>,
) {
    let (a, b) = (spec.u_bits(), spec.v_bits());
    out.clear();
    out.resize(words_for(spec.bits), 0);
    if spec.bits == 0 {
        return;
    }
    if a <= 64 {
        let u0 = read_bits(vertex, 0, a);
        let v0 = read_bits(vertex, a, b);
        let (u, v) = walk_small(u0, v0, a, b, label, label_start, spec.steps);
        write_bits(out, 0, a, u);
        write_bits(out, a, b, v);
        return;
    }
    walk_multi(vertex, label, label_start, spec, out, scratch);
}

fn walk_multi(
    vertex: &[u64],
    label: &[u64],
    label_start: usize,
    spec: ExpanderSpec,
    out: &mut [u64],
    scratch: &mut Vec<u64>,
) {
    let (a, b) = (spec.u_bits(), spec.v_bits());
    let (wa, wb) = (words_for(a), words_for(b));
    scratch.clear();
    scratch.resize(wa + wb, 0);
    let (u, v) = scratch.split_at_mut(wa);
    for (i, word) in u.iter_mut().enumerate() {
        *word = read_bits(vertex, 64 * i, (a - 64 * i).min(64));
    }
    for (i, word) in v.iter_mut().enumerate() {
        *word = read_bits(vertex, a + 64 * i, (b - 64 * i).min(64));
    }
    for step in 0..spec.steps {
        let l = read_bits(label, label_start + LABEL_BITS * step, LABEL_BITS);
        let (invert, carry) = match l & 3 {
            0 => (false, 0),
            1 => (true, 1),
            2 => (false, 1),
            _ => (true, 0),
        };
        if l < 4 {
            add_masked(u, a, v, invert, carry);
        } else {
            add_masked(v, b, u, invert, carry);
        }
    }
    for (i, &word) in u.iter().enumerate() {
        write_bits(out, 64 * i, (a - 64 * i).min(64), word);
    }
    for (i, &word) in v.iter().enumerate() {
        write_bits(out, a + 64 * i, (b - 64 * i).min(64), word);
    }
}

/// `dst = dst + (src or !src) + carry (mod 2^bits)`, with `src` reduced or
/// zero-extended to `bits` first.
fn add_masked(dst: &mut [u64], bits: usize, src: &[u64], invert: bool, carry: u64) {
    let mut c = carry;
    for (i, d) in dst.iter_mut().enumerate() {
        let mut s = src.get(i).copied().unwrap_or(0);
        if invert {
            s = !s;
        }
        let (x, o1) = d.overflowing_add(s);
        let (x, o2) = x.overflowing_add(c);
        *d = x;
        c = (o1 || o2) as u64;
    }
    if bits % 64 != 0 {
        if let Some(last) = dst.last_mut() {
            *last &= low_mask(bits % 64);
        }
    }
}

#[inline]
fn walk_small(
    mut u: u64,
    mut v: u64,
    a: usize,
    b: usize,
    label: &[u64],
    label_start: usize,
    steps: usize,
) -> (u64, u64) {
    let (ma, mb) = (low_mask(a), low_mask(b));
    for step in 0..steps {
        let l = read_bits(label, label_start + LABEL_BITS * step, LABEL_BITS);
        match l {
            0 => u = u.wrapping_add(v) & ma,
            1 => u = u.wrapping_sub(v) & ma,
            2 => u = u.wrapping_add(v).wrapping_add(1) & ma,
            3 => u = u.wrapping_sub(v).wrapping_sub(1) & ma,
            4 => v = v.wrapping_add(u) & mb,
            5 => v = v.wrapping_sub(u) & mb,
            6 => v = v.wrapping_add(u).wrapping_add(1) & mb,
            _ => v = v.wrapping_sub(u).wrapping_sub(1) & mb,
        }
    }
    (u, v)
}

/// Convenience wrapper over [`expander_neighbor_into`].
pub fn expander_neighbor(vertex: &[u64], label: &[u64], spec: ExpanderSpec) -> Vec<u64> {
    let mut out = Vec::new();
    expander_neighbor_into(vertex, label, 0, spec, &mut out, &mut Vec::new());
    out
}
