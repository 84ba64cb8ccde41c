use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ObliviousBranchingProgram, ProgramError};

/// Largest `n` enumerated by default when a program reads some variable
/// more than once.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 24;

/// Exact count of accepted inputs out of `2^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceResult {
    #[serde(with = "decimal")]
    pub accepting: BigUint,
    #[serde(with = "decimal")]
    pub total: BigUint,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        BigUint::parse_bytes(text.as_bytes(), 10)
            .ok_or_else(|| serde::de::Error::custom(format!("not a decimal integer: {text}")))
    }
}

impl AcceptanceResult {
    pub fn probability(&self) -> BigRational {
        BigRational::new(self.accepting.clone().into(), self.total.clone().into())
    }

    pub fn to_f64(&self) -> f64 {
        self.probability().to_f64().unwrap_or(f64::NAN)
    }
}

impl ObliviousBranchingProgram {
    /// `Pr_x[B(x) = 1]` under uniform `x`. Read-once programs use a layer DP
    /// for any `n`; otherwise inputs are enumerated when `n <= cap`.
    pub fn acceptance_probability_uniform(
        &self,
        cap: usize,
    ) -> Result<AcceptanceResult, ProgramError> {
        if self.read_profile().is_read_once() {
            return Ok(self.count_read_once());
        }
        if self.n() > cap || self.n() >= 64 {
            return Err(ProgramError::TooLargeForExhaustive { n: self.n(), cap });
        }
        Ok(self.count_exhaustive())
    }

    fn count_read_once(&self) -> AcceptanceResult {
        let w = self.w();
        let mut dist = vec![BigUint::zero(); w];
        dist[self.start()] = BigUint::from(1u8);
        let mut next = vec![BigUint::zero(); w];
        for layer in self.layers() {
            for x in next.iter_mut() {
                x.set_zero();
            }
            for (s, c) in dist.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                next[layer.t0[s]] += c;
                next[layer.t1[s]] += c;
            }
            std::mem::swap(&mut dist, &mut next);
        }
        let unread = self.n() - self.length();
        let mut accepting = BigUint::zero();
        for (s, c) in dist.iter().enumerate() {
            if self.is_accepting(s) {
                accepting += c;
            }
        }
        accepting <<= unread;
        AcceptanceResult {
            accepting,
            total: BigUint::from(1u8) << self.n(),
        }
    }

    fn count_exhaustive(&self) -> AcceptanceResult {
        const CHUNK: u64 = 1 << 14;
        let total = 1u64 << self.n();
        let chunks = total.div_ceil(CHUNK);
        let accepting: u64 = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(total);
                (lo..hi).filter(|&m| self.eval_mask(m)).count() as u64
            })
            .sum();
        AcceptanceResult {
            accepting: accepting.into(),
            total: total.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{mod_counter, parity, random_obp};
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn parity_is_half() {
        let p = parity(&[0, 1, 2, 3], 4);
        let r = p
            .acceptance_probability_uniform(DEFAULT_EXHAUSTIVE_CAP)
            .unwrap();
        assert_eq!(
            r.probability(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
    }

    #[test]
    fn read_once_dp_matches_enumeration() {
        for seed in 0..20 {
            let order = [3, 0, 5, 1];
            let p = random_obp(&order, 6, 4, seed).unwrap();
            let fast = p.acceptance_probability_uniform(0).unwrap();
            assert_eq!(fast, p.count_exhaustive());
        }
    }

    #[test]
    fn read_once_dp_scales() {
        let order: Vec<usize> = (0..200).collect();
        let p = parity(&order, 200);
        let r = p.acceptance_probability_uniform(0).unwrap();
        assert_eq!(r.total, BigUint::from(1u8) << 200);
        assert_eq!(r.accepting, BigUint::from(1u8) << 199);
    }

    #[test]
    fn multi_read_respects_cap() {
        let order: Vec<usize> = (0..30).chain(0..30).collect();
        let p = parity(&order, 30);
        assert_eq!(
            p.acceptance_probability_uniform(24),
            Err(ProgramError::TooLargeForExhaustive { n: 30, cap: 24 })
        );
        let q = mod_counter(&[0, 1, 0, 1], 2, 3, 1).unwrap();
        // ones counted twice: 0 -> 0, 1 -> 2, 2 -> 4 = 1 (mod 3).
        let r = q.acceptance_probability_uniform(24).unwrap();
        assert_eq!(r.accepting, BigUint::from(1u8));
        assert_eq!(r.total, BigUint::from(4u8));
    }

    #[test]
    fn serializes_as_decimal_strings() {
        let r = AcceptanceResult {
            accepting: BigUint::from(3u8),
            total: BigUint::from(1u8) << 80,
        };
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"1208925819614629174706176\""));
        assert_eq!(serde_json::from_str::<AcceptanceResult>(&text).unwrap(), r);
    }
}
