//! Exact check of the one-step hybrid inequality
//! `|Pr_{U^Y x D'^Z}[B] - Pr_{D^Y x D'^Z}[B]| <= max_b |Pr_U[B|_{Z=b}] - Pr_D[B|_{Z=b}]|`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{Caps, HarnessError};
use crate::bits::BitString;
use crate::generator::{Generator, Workspace};
use crate::program::{ObliviousBranchingProgram, Restriction};

/// A distribution on `{0,1}^bits` given by integer weights; bit `i` of an
/// outcome index is coordinate `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerableDistribution {
    bits: usize,
    weights: Vec<u64>,
    total: u64,
}

impl EnumerableDistribution {
    pub const MAX_BITS: usize = 26;

    pub fn from_weights(bits: usize, weights: Vec<u64>) -> Result<Self, HarnessError> {
        if bits > Self::MAX_BITS || weights.len() != 1 << bits {
            return Err(HarnessError::Invalid(format!(
                "expected {} weights for {bits} bits",
                1u64 << bits.min(63)
            )));
        }
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return Err(HarnessError::Invalid("all weights are zero".into()));
        }
        Ok(EnumerableDistribution {
            bits,
            weights,
            total,
        })
    }

    pub fn uniform(bits: usize) -> Result<Self, HarnessError> {
        Self::from_weights(bits, vec![1; 1usize << bits.min(Self::MAX_BITS + 1)])
    }

    /// Output distribution of `g` under a uniform seed.
    pub fn from_generator(g: &dyn Generator, seed_cap: usize) -> Result<Self, HarnessError> {
        let (s, m) = (g.seed_len(), g.output_len());
        if s > seed_cap || s >= 64 {
            return Err(HarnessError::TooLargeForExhaustive {
                what: "seed length",
                size: s,
                cap: seed_cap,
            });
        }
        if m > Self::MAX_BITS {
            return Err(HarnessError::TooLargeForExhaustive {
                what: "output length",
                size: m,
                cap: Self::MAX_BITS,
            });
        }
        let mut weights = vec![0u64; 1 << m];
        let mut ws = Workspace::new();
        let mut seed = BitString::zeros(s);
        let mut out = vec![false; m];
        for x in 0..1u64 << s {
            seed.set_from_u64(x);
            g.expand_with(&seed, &mut out, &mut ws);
            let code = out
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &b)| acc | (b as usize) << i);
            weights[code] += 1;
        }
        Self::from_weights(m, weights)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn weight(&self, code: usize) -> u64 {
        self.weights[code]
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridReport {
    pub n: usize,
    pub y: Vec<usize>,
    pub pr_mu1: String,
    pub pr_mu2: String,
    /// `|Pr_mu1 - Pr_mu2|`.
    pub lhs: String,
    /// `max_b` restricted error.
    pub rhs: String,
    pub lhs_f64: f64,
    pub rhs_f64: f64,
    /// A restriction attaining the maximum, over `Z` in increasing order.
    pub argmax: Vec<bool>,
    pub holds: bool,
}

fn frac(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn rat(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `d` is over the variables `y` (sorted), `d_prime` over the rest.
pub fn hybrid_check(
    b: &ObliviousBranchingProgram,
    y: &[usize],
    d: &EnumerableDistribution,
    d_prime: &EnumerableDistribution,
    caps: Caps,
) -> Result<HybridReport, HarnessError> {
    let n = b.n();
    if n > caps.input || n > EnumerableDistribution::MAX_BITS {
        return Err(HarnessError::TooLargeForExhaustive {
            what: "input length",
            size: n,
            cap: caps.input.min(EnumerableDistribution::MAX_BITS),
        });
    }
    let mut ys = y.to_vec();
    ys.sort_unstable();
    ys.dedup();
    if ys.len() != y.len() || ys.iter().any(|&v| v >= n) {
        return Err(HarnessError::Invalid(
            "Y must be distinct variables of the program".into(),
        ));
    }
    let z: Vec<usize> = (0..n).filter(|v| ys.binary_search(v).is_err()).collect();
    if d.bits() != ys.len() || d_prime.bits() != z.len() {
        return Err(HarnessError::Invalid(format!(
            "distribution widths {} / {} do not match |Y| = {}, |Z| = {}",
            d.bits(),
            d_prime.bits(),
            ys.len(),
            z.len()
        )));
    }
    let m = ys.len();
    let mut mu1 = BigRational::zero();
    let mut mu2 = BigRational::zero();
    let mut best = BigRational::zero();
    let mut argmax = 0usize;
    for bz in 0..1usize << z.len() {
        let values: Vec<bool> = (0..z.len()).map(|i| bz >> i & 1 == 1).collect();
        let restricted = b.restrict_program(&Restriction::new(z.clone(), values)?)?;
        let mut u_count = 0u128;
        let mut d_count = 0u128;
        for code in 0..1usize << m {
            if restricted.eval_mask(code as u64) {
                u_count += 1;
                d_count += d.weight(code) as u128;
            }
        }
        let pu = rat(u_count, 1u128 << m);
        let pd = rat(d_count, d.total() as u128);
        let e = (&pu - &pd).abs();
        if e > best {
            best = e;
            argmax = bz;
        }
        let wz = rat(d_prime.weight(bz) as u128, d_prime.total() as u128);
        mu1 += &wz * &pu;
        mu2 += &wz * &pd;
    }
    let lhs = (&mu1 - &mu2).abs();
    Ok(HybridReport {
        n,
        y: ys,
        pr_mu1: frac(&mu1),
        pr_mu2: frac(&mu2),
        lhs_f64: lhs.to_f64().unwrap_or(f64::NAN),
        rhs_f64: best.to_f64().unwrap_or(f64::NAN),
        holds: lhs <= best,
        lhs: frac(&lhs),
        rhs: frac(&best),
        argmax: (0..z.len()).map(|i| argmax >> i & 1 == 1).collect(),
    })
}
