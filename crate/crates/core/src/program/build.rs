//! Standard program families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Layer, ObliviousBranchingProgram, ProgramError};

/// Width-1 program reading each variable once and returning `value`.
pub fn constant(n: usize, value: bool) -> ObliviousBranchingProgram {
    let layers = (0..n).map(|v| Layer::identity(v, 1)).collect();
    let accepting = if value { vec![0] } else { vec![] };
    ObliviousBranchingProgram::new(n, 1, layers, 0, accepting).expect("valid constant program")
}

/// XOR of the bits read along `order`; a variable read twice cancels.
pub fn parity(order: &[usize], n: usize) -> ObliviousBranchingProgram {
    let layers = order
        .iter()
        .map(|&var| Layer {
            var,
            t0: vec![0, 1],
            t1: vec![1, 0],
        })
        .collect();
    ObliviousBranchingProgram::new(n, 2, layers, 0, vec![1]).expect("order within range")
}

/// Counts ones along `order` modulo `q` and accepts on residue `target`.
pub fn mod_counter(
    order: &[usize],
    n: usize,
    q: usize,
    target: usize,
) -> Result<ObliviousBranchingProgram, ProgramError> {
    weighted_mod_counter(order, n, q, &vec![1; order.len()], target)
}

/// Like [`mod_counter`], with layer `l` adding `weights[l]` on a one.
pub fn weighted_mod_counter(
    order: &[usize],
    n: usize,
    q: usize,
    weights: &[usize],
    target: usize,
) -> Result<ObliviousBranchingProgram, ProgramError> {
    if q == 0 {
        return Err(ProgramError::ZeroModulus);
    }
    if weights.len() != order.len() {
        return Err(ProgramError::WeightLength {
            got: weights.len(),
            expected: order.len(),
        });
    }
    let layers = order
        .iter()
        .zip(weights)
        .map(|(&var, &wt)| Layer {
            var,
            t0: (0..q).collect(),
            t1: (0..q).map(|s| (s + wt) % q).collect(),
        })
        .collect();
    ObliviousBranchingProgram::new(n, q, layers, 0, vec![target % q])
}

/// Address function on `N = n_addr` data bits `y` (variables `0..N`) and
/// `L = log2 N` address bits `z` (variables `N..N+L`, `z_1` most
/// significant). Returns `y_z`. Layer order is `y, z, y`; the first pass over
/// `y` is idle. Width `N + 2`.
pub fn address_function(n_addr: usize) -> Result<ObliviousBranchingProgram, ProgramError> {
    if !n_addr.is_power_of_two() {
        return Err(ProgramError::NotPowerOfTwo(n_addr));
    }
    let big_n = n_addr;
    let l = big_n.trailing_zeros() as usize;
    let w = big_n + 2;
    let (acc, rej) = (big_n, big_n + 1);
    let mut layers: Vec<Layer> = (0..big_n).map(|v| Layer::identity(v, w)).collect();
    for i in 0..l {
        let shift = |b: usize| -> Vec<usize> {
            (0..w)
                .map(|s| if s < big_n { (2 * s + b) % big_n } else { s })
                .collect()
        };
        layers.push(Layer {
            var: big_n + i,
            t0: shift(0),
            t1: shift(1),
        });
    }
    for j in 0..big_n {
        let mut t0: Vec<usize> = (0..w).collect();
        let mut t1 = t0.clone();
        t0[j] = rej;
        t1[j] = acc;
        layers.push(Layer { var: j, t0, t1 });
    }
    ObliviousBranchingProgram::new(big_n + l, w, layers, 0, vec![acc])
}

/// Uniformly random transition tables over layer order `order`, start state
/// 0, each state accepting with probability 1/2 (at least one accepting).
pub fn random_obp(
    order: &[usize],
    n: usize,
    w: usize,
    seed: u64,
) -> Result<ObliviousBranchingProgram, ProgramError> {
    if w < 2 {
        return Err(ProgramError::InvalidWidth { w, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = order
        .iter()
        .map(|&var| Layer {
            var,
            t0: (0..w).map(|_| rng.gen_range(0..w)).collect(),
            t1: (0..w).map(|_| rng.gen_range(0..w)).collect(),
        })
        .collect();
    let mut accepting: Vec<usize> = (0..w).filter(|_| rng.gen_bool(0.5)).collect();
    if accepting.is_empty() {
        accepting.push(rng.gen_range(0..w));
    }
    ObliviousBranchingProgram::new(n, w, layers, 0, accepting)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod_counter_counts() {
        let order = [0, 1, 2, 0, 1, 2];
        let p = mod_counter(&order, 3, 3, 0).unwrap();
        for m in 0..8u64 {
            let ones = (m.count_ones() * 2) as usize;
            assert_eq!(p.eval_mask(m), ones % 3 == 0);
        }
        let one = mod_counter(&order, 3, 1, 0).unwrap();
        assert!((0..8).all(|m| one.eval_mask(m)));
        assert!(mod_counter(&order, 3, 0, 0).is_err());
    }

    #[test]
    fn address_function_selects_bit() {
        for n_addr in [1usize, 2, 4, 8] {
            let p = address_function(n_addr).unwrap();
            let l = n_addr.trailing_zeros() as usize;
            assert_eq!(p.n(), n_addr + l);
            assert_eq!(p.w(), n_addr + 2);
            for m in 0..(1u64 << p.n()) {
                let mut z = 0usize;
                for i in 0..l {
                    z = 2 * z + ((m >> (n_addr + i)) & 1) as usize;
                }
                assert_eq!(p.eval_mask(m), (m >> z) & 1 == 1);
            }
        }
        assert_eq!(address_function(6), Err(ProgramError::NotPowerOfTwo(6)));
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_obp(&[0, 1, 2], 3, 4, 8).unwrap();
        assert_eq!(a, random_obp(&[0, 1, 2], 3, 4, 8).unwrap());
        assert_ne!(a, random_obp(&[0, 1, 2], 3, 4, 9).unwrap());
        assert!(random_obp(&[0], 1, 1, 0).is_err());
    }
}
