//! Exhaustive structural checks over all small read-k sequences.

use serde::{Deserialize, Serialize};

use crate::sequence::{
    is_2_regularly_interleaving, is_per_read_monotone, monotone_decomposition, Direction,
    ReadKSequence,
};

/// Every read-k sequence over `0..n` (distinct multiset permutations), in
/// lexicographic order.
pub fn enumerate_read_k(n: usize, k: usize) -> Vec<ReadKSequence> {
    fn rec(
        remaining: &mut [usize],
        cur: &mut Vec<usize>,
        n: usize,
        k: usize,
        out: &mut Vec<ReadKSequence>,
    ) {
        if cur.len() == n * k {
            out.push(ReadKSequence::new(cur.clone(), n, k).expect("valid multiset"));
            return;
        }
        for v in 0..n {
            if remaining[v] > 0 {
                remaining[v] -= 1;
                cur.push(v);
                rec(remaining, cur, n, k, out);
                cur.pop();
                remaining[v] += 1;
            }
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    rec(
        &mut vec![k; n],
        &mut Vec::with_capacity(n * k),
        n,
        k,
        &mut out,
    );
    out
}

/// `(kn)! / (k!)^n`.
fn multiset_count(n: usize, k: usize) -> u128 {
    let mut count = 1u128;
    let mut placed = 0u128;
    for _ in 0..n {
        // Choose positions for the next variable among the placed + k slots.
        for j in 1..=k as u128 {
            placed += 1;
            count = count * placed / j;
        }
    }
    count
}

/// Read-2 interleaving by brute force: tries every way of cutting the
/// sequence into consecutive blocks.
pub fn exhaustive_2_interleaving(s: &ReadKSequence) -> bool {
    if s.k() != 2 {
        return false;
    }
    let len = s.len();
    if len == 0 {
        return true;
    }
    let ranks = s.occurrence_ranks();
    let index = s.support_index();
    let pos: Vec<usize> = s.elems().iter().map(|&v| index[v]).collect();
    let mut opened = vec![false; s.n()];
    let block_ok = |start: usize, end: usize, opened: &mut Vec<bool>| -> bool {
        let mut seen_second = false;
        let mut balance = 0isize;
        let mut ok = true;
        for p in start..end {
            if ranks[p] == 0 {
                if seen_second {
                    ok = false;
                    break;
                }
                opened[pos[p]] = true;
                balance += 1;
            } else {
                if !opened[pos[p]] {
                    ok = false;
                    break;
                }
                seen_second = true;
                balance -= 1;
            }
        }
        for p in start..end {
            opened[pos[p]] = false;
        }
        ok && balance == 0
    };
    'cuts: for cuts in 0u64..1 << (len - 1) {
        let mut start = 0;
        for p in 1..=len {
            if p == len || cuts >> (p - 1) & 1 == 1 {
                if !block_ok(start, p, &mut opened) {
                    continue 'cuts;
                }
                start = p;
            }
        }
        return true;
    }
    false
}

/// Deliberate checker defects for negative-control runs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mutation {
    #[default]
    None,
    /// The interleaving checker accepts everything.
    AcceptAll,
    /// The interleaving checker lets a block close while one second
    /// occurrence is still missing.
    OffByOne,
    /// The given sequence (1-based) is added to the instances and reported
    /// as interleaving.
    Planted {
        elems: Vec<usize>,
        n: usize,
        k: usize,
    },
}

impl Mutation {
    fn planted(&self) -> Option<ReadKSequence> {
        match self {
            Mutation::Planted { elems, n, k } => ReadKSequence::from_one_based(elems, *n, *k).ok(),
            _ => None,
        }
    }

    fn pair_check(&self, view: &ReadKSequence, whole: &ReadKSequence) -> bool {
        match self {
            Mutation::None => is_2_regularly_interleaving(view).is_ok(),
            Mutation::AcceptAll => true,
            Mutation::OffByOne => off_by_one_check(view),
            Mutation::Planted { .. } => {
                Some(whole) == self.planted().as_ref() || is_2_regularly_interleaving(view).is_ok()
            }
        }
    }

    fn interleaves(&self, s: &ReadKSequence) -> bool {
        pairs(s.k()).all(|(i, j)| self.pair_check(&s.pair_view(i, j).expect("valid pair"), s))
    }
}

/// The forced-block scan with a tolerance of one missing second occurrence
/// when a new block opens.
fn off_by_one_check(view: &ReadKSequence) -> bool {
    let (mut firsts, mut seconds) = (0usize, 0usize);
    for r in view.occurrence_ranks() {
        if r == 0 {
            if seconds > 0 {
                if seconds + 1 < firsts {
                    return false;
                }
                firsts = 0;
                seconds = 0;
            }
            firsts += 1;
        } else {
            seconds += 1;
        }
    }
    true
}

fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Minimized failing sequence, 1-based.
    pub sequence: Vec<usize>,
    pub n: usize,
    pub k: usize,
    /// The first failing instance found, 1-based.
    pub original: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceCount {
    pub n: usize,
    pub enumerated: usize,
    pub expected: String,
    /// Instances passing both checkers.
    pub good: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub n_max: usize,
    pub k: usize,
    pub mutation: Mutation,
    pub instances: Vec<InstanceCount>,
    pub properties: Vec<PropertyResult>,
    pub passed: bool,
}

impl SuiteResult {
    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Deletes variables while `fails` keeps holding.
fn minimize(s: &ReadKSequence, fails: &dyn Fn(&ReadKSequence) -> bool) -> ReadKSequence {
    let mut cur = s.compact();
    'outer: loop {
        for v in 0..cur.n() {
            let keep: Vec<usize> = (0..cur.n()).filter(|&u| u != v).collect();
            if keep.is_empty() {
                continue;
            }
            let smaller = cur.restrict(&keep).compact();
            if fails(&smaller) {
                cur = smaller;
                continue 'outer;
            }
        }
        return cur;
    }
}

struct Tracker {
    name: &'static str,
    checked: usize,
    violations: usize,
    first: Option<(ReadKSequence, String)>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Tracker {
            name,
            checked: 0,
            violations: 0,
            first: None,
        }
    }

    fn record(&mut self, s: &ReadKSequence, failure: Option<String>) {
        self.checked += 1;
        if let Some(detail) = failure {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some((s.clone(), detail));
            }
        }
    }

    fn finish(self, fails: &dyn Fn(&ReadKSequence) -> Option<String>) -> PropertyResult {
        let counterexample = self.first.map(|(s, detail)| {
            let small = minimize(&s, &|t| fails(t).is_some());
            let detail = fails(&small).unwrap_or(detail);
            Counterexample {
                sequence: small.one_based(),
                n: small.n(),
                k: small.k(),
                original: s.compact().one_based(),
                detail,
            }
        });
        PropertyResult {
            name: self.name.to_string(),
            checked: self.checked,
            violations: self.violations,
            passed: self.violations == 0,
            counterexample,
        }
    }
}

fn checker_disagreement(m: &Mutation, s: &ReadKSequence) -> Option<String> {
    for (i, j) in pairs(s.k()) {
        let view = s.pair_view(i, j).expect("valid pair");
        let fast = m.pair_check(&view, s);
        let slow = exhaustive_2_interleaving(&view);
        if fast != slow {
            return Some(format!(
                "reads ({},{}): greedy says {fast}, exhaustive search says {slow}",
                i + 1,
                j + 1
            ));
        }
    }
    None
}

/// Good = per-read-monotone and (per `m`) k-regularly-interleaving.
fn is_good(m: &Mutation, s: &ReadKSequence) -> bool {
    is_per_read_monotone(s).is_ok() && m.interleaves(s)
}

fn visit_failure(m: &Mutation, s: &ReadKSequence) -> Option<String> {
    if !is_good(m, s) {
        return None;
    }
    let p = s.identity_head_profile();
    (p.max_visits > 2 * s.k())
        .then(|| format!("max visits {} exceeds 2k = {}", p.max_visits, 2 * s.k()))
}

fn jump_failure(m: &Mutation, s: &ReadKSequence) -> Option<String> {
    if !is_good(m, s) {
        return None;
    }
    let dec = match monotone_decomposition(s) {
        Ok(d) => d,
        Err(e) => return Some(format!("no monotone decomposition: {e}")),
    };
    let index = s.support_index();
    let e = s.elems();
    for seg in &dec.segments {
        for p in seg.start..seg.end.saturating_sub(1) {
            let (a, b) = (index[e[p]], index[e[p + 1]]);
            let bad = match seg.direction {
                Direction::Increasing => b > a && b != a + 1,
                Direction::Decreasing => b < a && b + 1 != a,
            };
            if bad {
                return Some(format!(
                    "position {}: jump from x{} to x{} inside a {} segment",
                    p + 1,
                    e[p] + 1,
                    e[p + 1] + 1,
                    seg.direction.short()
                ));
            }
        }
    }
    None
}

pub fn structural_suite(n_max: usize, k: usize) -> SuiteResult {
    structural_suite_with(n_max, k, &Mutation::None)
}

/// Runs every structural property over all read-k sequences with
/// `1 <= n <= n_max`, using the (possibly mutated) interleaving checker.
pub fn structural_suite_with(n_max: usize, k: usize, mutation: &Mutation) -> SuiteResult {
    let mut instances = Vec::new();
    let mut count_failures = Vec::new();
    let mut agree = Tracker::new("greedy_matches_exhaustive");
    let mut visits = Tracker::new("visit_bound_2k");
    let mut jumps = Tracker::new("no_upward_jump");
    let mut all: Vec<ReadKSequence> = Vec::new();
    for n in 1..=n_max {
        let seqs = enumerate_read_k(n, k);
        let expected = multiset_count(n, k);
        if seqs.len() as u128 != expected {
            count_failures.push(n);
        }
        let good = seqs.iter().filter(|s| is_good(mutation, s)).count();
        instances.push(InstanceCount {
            n,
            enumerated: seqs.len(),
            expected: expected.to_string(),
            good,
        });
        all.extend(seqs);
    }
    if let Some(p) = mutation.planted() {
        all.push(p);
    }
    for s in &all {
        if k >= 2 {
            agree.record(s, checker_disagreement(mutation, s));
        }
        visits.record(s, visit_failure(mutation, s));
        jumps.record(s, jump_failure(mutation, s));
    }
    let count_prop = PropertyResult {
        name: "enumeration_count".into(),
        checked: n_max,
        violations: count_failures.len(),
        passed: count_failures.is_empty(),
        counterexample: None,
    };
    let mut properties = vec![count_prop];
    if k >= 2 {
        properties.push(agree.finish(&|s| checker_disagreement(mutation, s)));
    }
    properties.push(visits.finish(&|s| visit_failure(mutation, s)));
    properties.push(jumps.finish(&|s| jump_failure(mutation, s)));
    let passed = properties.iter().all(|p| p.passed);
    SuiteResult {
        suite: format!("structural(n<={n_max}, k={k})"),
        n_max,
        k,
        mutation: mutation.clone(),
        instances,
        properties,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::tests::seq;

    #[test]
    fn counts() {
        assert_eq!(enumerate_read_k(3, 2).len(), 90);
        assert_eq!(multiset_count(3, 2), 90);
        assert_eq!(multiset_count(4, 2), 2520);
        assert_eq!(multiset_count(3, 3), 1680);
        assert_eq!(enumerate_read_k(2, 1).len(), 2);
    }

    #[test]
    fn exhaustive_oracle_examples() {
        assert!(exhaustive_2_interleaving(&seq(&[1, 2, 1, 2], 2, 2)));
        assert!(exhaustive_2_interleaving(&seq(&[1, 1, 2, 2], 2, 2)));
        assert!(exhaustive_2_interleaving(&seq(&[1, 2, 2, 1], 2, 2)));
        assert!(!exhaustive_2_interleaving(&seq(&[1, 2, 1, 3, 3, 2], 3, 2)));
        assert!(!exhaustive_2_interleaving(&seq(&[1, 2, 1, 3, 2, 3], 3, 2)));
        assert!(exhaustive_2_interleaving(&seq(&[1, 2, 3, 3, 2, 1], 3, 2)));
    }

    #[test]
    fn read_two_suite_is_green() {
        let r = structural_suite(4, 2);
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.instances[2].enumerated, 90);
        assert_eq!(r.instances[3].enumerated, 2520);
    }

    #[test]
    fn read_once_and_read_three() {
        let r = structural_suite(4, 1);
        assert!(r.passed);
        assert!(r.property("greedy_matches_exhaustive").is_none());
        let r = structural_suite(3, 3);
        assert!(r.passed, "{r:#?}");
    }

    #[test]
    fn negative_controls_fail_with_counterexamples() {
        for m in [Mutation::AcceptAll, Mutation::OffByOne] {
            let r = structural_suite_with(3, 2, &m);
            assert!(!r.passed, "{m:?}");
            let p = r.property("greedy_matches_exhaustive").unwrap();
            let cx = p.counterexample.as_ref().unwrap();
            assert!(cx.sequence.len() <= cx.original.len());
            let s = ReadKSequence::from_one_based(&cx.sequence, cx.n, cx.k).unwrap();
            assert!(checker_disagreement(&m, &s).is_some());
        }
        let planted = Mutation::Planted {
            elems: vec![1, 2, 1, 3, 2, 3],
            n: 3,
            k: 2,
        };
        let r = structural_suite_with(2, 2, &planted);
        assert!(!r.passed);
        let cx = r
            .property("greedy_matches_exhaustive")
            .unwrap()
            .counterexample
            .clone()
            .unwrap();
        assert_eq!(cx.original, vec![1, 2, 1, 3, 2, 3]);
    }
}
