use super::Direction;

// Patience sorting: `tails[l]` holds the index of the smallest possible last
// element of a monotone subsequence of length `l + 1` seen so far, and each
// index remembers the tail it extended. Following those links back from the
// last pile yields one longest subsequence.

/// Indices of a longest strictly monotone subsequence of `values`, in
/// increasing index order. `O(m log m)`.
pub fn longest_monotone_subsequence(values: &[usize], direction: Direction) -> Vec<usize> {
    if values.is_empty() {
        return Vec::new();
    }
    let key = |i: usize| -> isize {
        match direction {
            Direction::Increasing => values[i] as isize,
            Direction::Decreasing => -(values[i] as isize),
        }
    };
    let mut tails: Vec<usize> = Vec::new();
    let mut prev: Vec<Option<usize>> = vec![None; values.len()];
    for i in 0..values.len() {
        let k = key(i);
        let pos = tails.partition_point(|&t| key(t) < k);
        prev[i] = if pos > 0 { Some(tails[pos - 1]) } else { None };
        if pos == tails.len() {
            tails.push(i);
        } else {
            tails[pos] = i;
        }
    }
    let mut out = Vec::with_capacity(tails.len());
    let mut cur = tails.last().copied();
    while let Some(i) = cur {
        out.push(i);
        cur = prev[i];
    }
    out.reverse();
    out
}

/// The longer of the increasing and decreasing answers; increasing wins ties.
pub fn longest_monotone(values: &[usize]) -> (Direction, Vec<usize>) {
    let inc = longest_monotone_subsequence(values, Direction::Increasing);
    let dec = longest_monotone_subsequence(values, Direction::Decreasing);
    if dec.len() > inc.len() {
        (Direction::Decreasing, dec)
    } else {
        (Direction::Increasing, inc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(values: &[usize], direction: Direction) -> usize {
        let m = values.len();
        let mut best = 0;
        for mask in 0u32..(1 << m) {
            let picked: Vec<usize> = (0..m)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| values[i])
                .collect();
            if picked.windows(2).all(|w| direction.holds(w[0], w[1])) {
                best = best.max(picked.len());
            }
        }
        best
    }

    fn is_monotone(values: &[usize], idx: &[usize], direction: Direction) -> bool {
        idx.windows(2)
            .all(|w| w[0] < w[1] && direction.holds(values[w[0]], values[w[1]]))
    }

    #[test]
    fn examples() {
        let v = [3, 1, 4, 2];
        let lis = longest_monotone_subsequence(&v, Direction::Increasing);
        assert_eq!(lis.len(), 2);
        assert_eq!(brute_force(&v, Direction::Increasing), 2);
        let id: Vec<usize> = (0..9).collect();
        assert_eq!(longest_monotone_subsequence(&id, Direction::Increasing), id);
        assert!(longest_monotone_subsequence(&[], Direction::Decreasing).is_empty());
    }

    #[test]
    fn every_length_five_permutation_has_monotone_three() {
        fn perms(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
            if k == v.len() {
                out.push(v.clone());
                return;
            }
            for i in k..v.len() {
                v.swap(k, i);
                perms(v, k + 1, out);
                v.swap(k, i);
            }
        }
        let mut all = Vec::new();
        perms(&mut (0..5).collect(), 0, &mut all);
        assert_eq!(all.len(), 120);
        for p in all {
            assert!(longest_monotone(&p).1.len() >= 3, "{p:?}");
        }
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(perm in Just((0..12usize).collect::<Vec<_>>()).prop_shuffle(), len in 0usize..=12) {
            let v = &perm[..len];
            for d in [Direction::Increasing, Direction::Decreasing] {
                let got = longest_monotone_subsequence(v, d);
                prop_assert!(is_monotone(v, &got, d));
                prop_assert_eq!(got.len(), brute_force(v, d));
            }
        }

        #[test]
        fn erdos_szekeres_bound(perm in Just((0..200usize).collect::<Vec<_>>()).prop_shuffle(), len in 1usize..=200) {
            let v = &perm[..len];
            let (_, best) = longest_monotone(v);
            let bound = (len as f64).sqrt().ceil() as usize;
            prop_assert!(best.len() >= bound);
        }
    }
}
