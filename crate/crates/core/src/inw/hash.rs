//! Mixing maps for hash and toy modes.

use crate::bits::{read_bits, words_for, write_bits};

/// Auxiliary bits consumed by one affine Toeplitz hash on `r` bits.
pub fn hash_key_bits(r: usize) -> usize {
    if r == 0 {
        0
    } else {
        3 * r - 1
    }
}

/// `y = T x + b` over GF(2) where `T` is the `r x r` Toeplitz matrix whose
/// row `i` is key bits `[i, i+r)` and `b` is key bits `[2r-1, 3r-1)`. The
/// family is pairwise independent. `x` and the result occupy bits `[0, r)`.
pub fn toeplitz_hash(x: &[u64], key: &[u64], key_start: usize, r: usize, out: &mut [u64]) {
    let words = words_for(r);
    let offset = key_start + 2 * r - 1;
    for i in 0..r {
        let mut acc = 0u64;
        for c in 0..words {
            let width = (r - 64 * c).min(64);
            acc ^= read_bits(key, key_start + i + 64 * c, width) & x[c];
        }
        let bit = (acc.count_ones() as u64 & 1) ^ read_bits(key, offset + i, 1);
        write_bits(out, i, 1, bit);
    }
}

/// XORs into `target[0..len)` the auxiliary word `key[start..start+a)`
/// stretched or folded to `len` bits: tiled cyclically when `a < len`,
/// xor-folded in `len`-bit chunks otherwise.
pub fn xor_fold_into(target: &mut [u64], len: usize, key: &[u64], start: usize, a: usize) {
    if a == 0 || len == 0 {
        return;
    }
    if a >= len {
        let mut off = 0;
        while off < a {
            let chunk = (a - off).min(len);
            let mut done = 0;
            while done < chunk {
                let width = (chunk - done).min(64);
                let bits = read_bits(key, start + off + done, width);
                let cur = read_bits(target, done, width);
                write_bits(target, done, width, cur ^ bits);
                done += width;
            }
            off += chunk;
        }
    } else {
        let mut pos = 0;
        while pos < len {
            let phase = pos % a;
            let width = (len - pos).min(a - phase).min(64);
            let bits = read_bits(key, start + phase, width);
            let cur = read_bits(target, pos, width);
            write_bits(target, pos, width, cur ^ bits);
            pos += width;
        }
    }
}
