//! Fixed-length bit strings used for seeds and generator internals.
//!
//! Bits are stored little-endian: bit `i` lives in word `i / 64` at
//! position `i % 64`. Bits past `len` are always zero.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

#[inline]
pub(crate) fn low_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Reads `width <= 64` bits starting at `start`.
#[inline]
pub(crate) fn read_bits(words: &[u64], start: usize, width: usize) -> u64 {
    debug_assert!(width <= 64);
    if width == 0 {
        return 0;
    }
    let w = start / 64;
    let off = start % 64;
    let mut v = words.get(w).copied().unwrap_or(0) >> off;
    if off != 0 && off + width > 64 {
        v |= words.get(w + 1).copied().unwrap_or(0) << (64 - off);
    }
    v & low_mask(width)
}

/// Writes the low `width <= 64` bits of `value` at `start`.
#[inline]
pub(crate) fn write_bits(words: &mut [u64], start: usize, width: usize, value: u64) {
    debug_assert!(width <= 64);
    if width == 0 {
        return;
    }
    let value = value & low_mask(width);
    let w = start / 64;
    let off = start % 64;
    let m = low_mask(width);
    words[w] = (words[w] & !(m << off)) | (value << off);
    if off != 0 && off + width > 64 {
        let spill = off + width - 64;
        let hm = low_mask(spill);
        words[w + 1] = (words[w + 1] & !hm) | (value >> (64 - off));
    }
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i / 64] >> (i % 64)) & 1 == 1
}

/// Copies `len` bits of `src` starting at `start` into `dst[0..len)`,
/// zeroing everything above. `dst` is resized as needed.
pub(crate) fn copy_range(src: &[u64], start: usize, len: usize, dst: &mut Vec<u64>) {
    let nw = words_for(len);
    dst.clear();
    dst.resize(nw, 0);
    if start % 64 == 0 {
        let w0 = start / 64;
        dst.copy_from_slice(&src[w0..w0 + nw]);
    } else {
        for (i, d) in dst.iter_mut().enumerate() {
            let width = (len - i * 64).min(64);
            *d = read_bits(src, start + i * 64, width);
        }
    }
    if len % 64 != 0 {
        dst[nw - 1] &= low_mask(len % 64);
    }
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                s.words[i / 64] |= 1 << (i % 64);
            }
        }
        s
    }

    /// The low `len <= 64` bits of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = value & low_mask(len);
        }
        s
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(len);
        s.fill_random(rng);
        s
    }

    /// Overwrites every bit with fresh randomness, keeping the length.
    pub fn fill_random<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        for w in self.words.iter_mut() {
            *w = rng.next_u64();
        }
        self.clear_tail();
    }

    /// Overwrites the contents with the low bits of `value`.
    pub fn set_from_u64(&mut self, value: u64) {
        for w in self.words.iter_mut() {
            *w = 0;
        }
        if let Some(w) = self.words.first_mut() {
            *w = value;
        }
        self.clear_tail();
    }

    fn clear_tail(&mut self) {
        if self.len % 64 != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= low_mask(self.len % 64);
            }
        }
    }

    /// Overwrites `self` with `src[start..start+len)`, reusing storage.
    pub(crate) fn assign_range(&mut self, src: &BitString, start: usize, len: usize) {
        assert!(start + len <= src.len, "range outside source");
        self.len = len;
        copy_range(&src.words, start, len, &mut self.words);
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        get_bit(&self.words, i)
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let m = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    /// Bits `[start, start + len)` as a new string.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice out of range");
        let mut words = Vec::new();
        copy_range(&self.words, start, len, &mut words);
        BitString { len, words }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = BitString::zeros(self.len + other.len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        for i in 0..other.words.len() {
            let width = (other.len - i * 64).min(64);
            write_bits(&mut out.words, self.len + i * 64, width, other.words[i]);
        }
        out
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| get_bit(&self.words, i)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl fmt::Display for BitString {
    /// Bit 0 first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if get_bit(&self.words, i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid bit character {0:?}")]
pub struct ParseBitsError(pub char);

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ParseBitsError(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BitString::from_bools(&bits))
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
