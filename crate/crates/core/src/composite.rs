//! Generators assembled from per-part INW generators.
//!
//! The read-k generator partitions the variables of a known read sequence
//! into parts that are per-read-monotone and k-regularly-interleaving, gives
//! each part its own INW generator (visit bound `2k`, error `eps/n`), and
//! concatenates the part seeds. The linear-length generator draws the
//! frequent variables (read more than `k(n)` times) from raw seed bits and
//! the rest from a read-k generator.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::generator::{Generator, Workspace};
use crate::inw::{build_inw, InwDescriptor, InwError, InwMode};
use crate::sequence::{
    head_visit_profile, is_k_regularly_interleaving, is_per_read_monotone, partition_variables,
    ReadKSequence, SequenceError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompositeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("part {part}: {reason}")]
    PreconditionViolated { part: usize, reason: String },
    #[error(transparent)]
    Inw(#[from] InwError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("descriptor does not match its source: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeKind {
    ReadK,
    LinearLength,
}

/// One part `Y_i`: its INW generator writes output `j` to `vars[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositePart {
    /// Variables in tape order (order of first occurrence in the sequence).
    pub vars: Vec<usize>,
    pub inw: InwDescriptor,
    pub seed_start: usize,
    pub max_visits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedLengthReport {
    pub kind: CompositeKind,
    pub n: usize,
    pub k: usize,
    pub w: usize,
    pub eps: f64,
    pub t: usize,
    pub part_seed_lens: Vec<usize>,
    pub frequent_bits: usize,
    pub total: usize,
    /// `t * log2 n * (log2(n/eps) + k log2 w)`.
    pub envelope: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompositeFile {
    kind: CompositeKind,
    n: usize,
    source: Vec<usize>,
    w: usize,
    eps: f64,
    mode: InwMode,
    k: usize,
    threshold: Option<usize>,
    parts: Vec<CompositePart>,
    frequent: Vec<usize>,
    frequent_start: usize,
    seed_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CompositeFile", into = "CompositeFile")]
pub struct CompositeDescriptor {
    kind: CompositeKind,
    n: usize,
    source: Vec<usize>,
    w: usize,
    eps: f64,
    mode: InwMode,
    /// Read multiplicity handed to the per-part generators (`d = 2k`).
    k: usize,
    /// `k(n)` for the linear-length generator.
    threshold: Option<usize>,
    parts: Vec<CompositePart>,
    frequent: Vec<usize>,
    frequent_start: usize,
    seed_len: usize,
}

impl TryFrom<CompositeFile> for CompositeDescriptor {
    type Error = CompositeError;

    fn try_from(f: CompositeFile) -> Result<Self, Self::Error> {
        let built = match f.kind {
            CompositeKind::ReadK => {
                let s = ReadKSequence::new(f.source.clone(), f.n, f.k)?;
                build_read_k_generator(&s, f.w, f.eps, f.mode)?
            }
            CompositeKind::LinearLength => {
                build_linear_length_generator(&f.source, f.n, f.w, f.eps, f.mode)?
            }
        };
        let file = CompositeFile::from(built.clone());
        let check = |what: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(CompositeError::Inconsistent(what.to_string()))
            }
        };
        check("k", file.k == f.k)?;
        check("threshold", file.threshold == f.threshold)?;
        check("parts", file.parts == f.parts)?;
        check("frequent", file.frequent == f.frequent)?;
        check("frequent_start", file.frequent_start == f.frequent_start)?;
        check("seed_len", file.seed_len == f.seed_len)?;
        Ok(built)
    }
}

impl From<CompositeDescriptor> for CompositeFile {
    fn from(g: CompositeDescriptor) -> Self {
        CompositeFile {
            kind: g.kind,
            n: g.n,
            source: g.source,
            w: g.w,
            eps: g.eps,
            mode: g.mode,
            k: g.k,
            threshold: g.threshold,
            parts: g.parts,
            frequent: g.frequent,
            frequent_start: g.frequent_start,
            seed_len: g.seed_len,
        }
    }
}

fn check_params(w: usize, eps: f64) -> Result<(), CompositeError> {
    if w < 2 {
        return Err(CompositeError::InvalidParams(format!(
            "w = {w}, need w >= 2"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CompositeError::InvalidParams(format!(
            "eps = {eps} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Parts for `s`, in original labels, ordered by smallest variable; seeds
/// laid out from `seed_start`.
fn read_k_parts(
    s: &ReadKSequence,
    w: usize,
    eps: f64,
    mode: InwMode,
    seed_start: usize,
) -> Result<Vec<CompositePart>, CompositeError> {
    let k = s.k();
    let n = s.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (canon, relabel) = s.canonical_relabel();
    let partition = partition_variables(&canon);
    let mut staged = Vec::with_capacity(partition.t());
    for (idx, part) in partition.parts.iter().enumerate() {
        let r = canon.restrict(&part.vars);
        let violated = |reason: String| CompositeError::PreconditionViolated { part: idx, reason };
        is_per_read_monotone(&r).map_err(|e| violated(format!("read {} not monotone", e.read)))?;
        is_k_regularly_interleaving(&r)
            .map_err(|e| violated(format!("reads {} and {} do not interleave", e.i, e.j)))?;
        let profile = head_visit_profile(&r, r.support())?;
        if profile.max_visits > 2 * k {
            return Err(violated(format!(
                "head visits a cell {} times, bound is {}",
                profile.max_visits,
                2 * k
            )));
        }
        let vars: Vec<usize> = part.vars.iter().map(|&v| relabel.to_original(v)).collect();
        staged.push((vars, profile.max_visits));
    }
    staged.sort_by_key(|(vars, _)| *vars.iter().min().expect("parts are non-empty"));
    let mut parts = Vec::with_capacity(staged.len());
    let mut offset = seed_start;
    for (vars, max_visits) in staged {
        let inw = build_inw(vars.len(), 2 * k, w, eps / n as f64, mode)?;
        let len = inw.seed_len();
        parts.push(CompositePart {
            vars,
            inw,
            seed_start: offset,
            max_visits,
        });
        offset += len;
    }
    Ok(parts)
}

/// `G^k`: per-part INW generators over the partition of `s`.
pub fn build_read_k_generator(
    s: &ReadKSequence,
    w: usize,
    eps: f64,
    mode: InwMode,
) -> Result<CompositeDescriptor, CompositeError> {
    check_params(w, eps)?;
    let parts = read_k_parts(s, w, eps, mode, 0)?;
    let seed_len = parts.iter().map(|p| p.inw.seed_len()).sum();
    Ok(CompositeDescriptor {
        kind: CompositeKind::ReadK,
        n: s.universe(),
        source: s.elems().to_vec(),
        w,
        eps,
        mode,
        k: s.k(),
        threshold: None,
        parts,
        frequent: Vec::new(),
        frequent_start: seed_len,
        seed_len,
    })
}

/// `k(n) = max(1, floor(log2(log2 n) / 2))`.
pub fn frequency_threshold(n: usize) -> usize {
    let ll = (n as f64).log2().log2();
    ((ll / 2.0).floor() as usize).max(1)
}

/// Frequent-variable split of a general sequence over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencySplit {
    pub threshold: usize,
    pub counts: Vec<usize>,
    /// Variables read more than `threshold` times, sorted.
    pub frequent: Vec<usize>,
    /// The rest, sorted (including unread variables).
    pub rare: Vec<usize>,
    /// Largest read count among `rare`, at least 1.
    pub rare_k: usize,
}

pub fn frequency_split(elems: &[usize], n: usize) -> Result<FrequencySplit, CompositeError> {
    if n < 4 {
        return Err(CompositeError::InvalidParams(format!(
            "n = {n}, need n >= 4"
        )));
    }
    let mut counts = vec![0usize; n];
    for &v in elems {
        if v >= n {
            return Err(SequenceError::VariableOutOfRange { var: v, n }.into());
        }
        counts[v] += 1;
    }
    let threshold = frequency_threshold(n);
    let (frequent, rare): (Vec<usize>, Vec<usize>) = (0..n).partition(|&v| counts[v] > threshold);
    let rare_k = rare.iter().map(|&v| counts[v]).max().unwrap_or(0).max(1);
    Ok(FrequencySplit {
        threshold,
        counts,
        frequent,
        rare,
        rare_k,
    })
}

/// The rare variables' reads in their original order, followed by rounds of
/// missing reads (round `c` appends, in increasing order, each variable read
/// at most `c` times) so that every rare variable occurs exactly `rare_k`
/// times.
pub fn padded_rare_sequence(
    elems: &[usize],
    split: &FrequencySplit,
) -> Result<Option<ReadKSequence>, SequenceError> {
    if split.rare.is_empty() {
        return Ok(None);
    }
    let is_rare = |v: usize| split.counts[v] <= split.threshold;
    let mut out: Vec<usize> = elems.iter().copied().filter(|&v| is_rare(v)).collect();
    for round in 0..split.rare_k {
        for &v in &split.rare {
            if split.counts[v] <= round {
                out.push(v);
            }
        }
    }
    ReadKSequence::with_support(out, split.rare.clone(), split.rare_k).map(Some)
}

/// `G^lin` for a general sequence `elems` over `0..n`.
pub fn build_linear_length_generator(
    elems: &[usize],
    n: usize,
    w: usize,
    eps: f64,
    mode: InwMode,
) -> Result<CompositeDescriptor, CompositeError> {
    check_params(w, eps)?;
    let split = frequency_split(elems, n)?;
    let bound = elems.len() / split.threshold;
    if split.frequent.len() > bound {
        return Err(CompositeError::PreconditionViolated {
            part: 0,
            reason: format!(
                "{} frequent variables exceed {}",
                split.frequent.len(),
                bound
            ),
        });
    }
    let rare = padded_rare_sequence(elems, &split)?;
    let parts = match &rare {
        Some(r) => read_k_parts(r, w, eps, mode, 0)?,
        None => Vec::new(),
    };
    let frequent_start: usize = parts.iter().map(|p| p.inw.seed_len()).sum();
    let seed_len = frequent_start + split.frequent.len();
    Ok(CompositeDescriptor {
        kind: CompositeKind::LinearLength,
        n,
        source: elems.to_vec(),
        w,
        eps,
        mode,
        k: split.rare_k,
        threshold: Some(split.threshold),
        parts,
        frequent: split.frequent,
        frequent_start,
        seed_len,
    })
}

impl CompositeDescriptor {
    pub fn kind(&self) -> CompositeKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn mode(&self) -> InwMode {
        self.mode
    }

    pub fn source(&self) -> &[usize] {
        &self.source
    }

    pub fn threshold(&self) -> Option<usize> {
        self.threshold
    }

    pub fn parts(&self) -> &[CompositePart] {
        &self.parts
    }

    pub fn t(&self) -> usize {
        self.parts.len()
    }

    pub fn frequent(&self) -> &[usize] {
        &self.frequent
    }

    pub fn frequent_start(&self) -> usize {
        self.frequent_start
    }

    /// Seed range `[start, end)` of part `i`.
    pub fn segment(&self, i: usize) -> (usize, usize) {
        let p = &self.parts[i];
        (p.seed_start, p.seed_start + p.inw.seed_len())
    }

    pub fn seed_report(&self) -> SeedLengthReport {
        let part_seed_lens: Vec<usize> = self.parts.iter().map(|p| p.inw.seed_len()).collect();
        let t = self.parts.len();
        let n = self.n.max(2) as f64;
        let envelope =
            t as f64 * n.log2() * ((n / self.eps).log2() + self.k as f64 * (self.w as f64).log2());
        SeedLengthReport {
            kind: self.kind,
            n: self.n,
            k: self.k,
            w: self.w,
            eps: self.eps,
            t,
            total: part_seed_lens.iter().sum::<usize>() + self.frequent.len(),
            part_seed_lens,
            frequent_bits: self.frequent.len(),
            envelope,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

impl Generator for CompositeDescriptor {
    fn seed_len(&self) -> usize {
        self.seed_len
    }

    fn output_len(&self) -> usize {
        self.n
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn label(&self) -> String {
        let kind = match self.kind {
            CompositeKind::ReadK => "read_k",
            CompositeKind::LinearLength => "linear_length",
        };
        format!(
            "{kind}({}, n={}, k={}, w={}, t={}, s={})",
            self.mode.name(),
            self.n,
            self.k,
            self.w,
            self.parts.len(),
            self.seed_len
        )
    }

    fn expand_with(&self, seed: &BitString, out: &mut [bool], ws: &mut Workspace) {
        assert_eq!(seed.len(), self.seed_len, "seed length");
        assert_eq!(out.len(), self.n, "output length");
        out.iter_mut().for_each(|b| *b = false);
        if ws.children.is_empty() {
            ws.children.push(Workspace::new());
        }
        let Workspace {
            seeds,
            bits,
            children,
            ..
        } = ws;
        if seeds.is_empty() {
            seeds.push(BitString::zeros(0));
        }
        let (sub_seed, sub_ws) = (&mut seeds[0], &mut children[0]);
        for part in &self.parts {
            let len = part.inw.seed_len();
            sub_seed.assign_range(seed, part.seed_start, len);
            bits.clear();
            bits.resize(part.vars.len(), false);
            part.inw.expand_with(sub_seed, bits, sub_ws);
            for (&v, &b) in part.vars.iter().zip(bits.iter()) {
                out[v] = b;
            }
        }
        for (i, &v) in self.frequent.iter().enumerate() {
            out[v] = seed.get(self.frequent_start + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy() -> InwMode {
        InwMode::Toy { aux_bits: 2 }
    }

    #[test]
    fn monotone_read_once_is_single_inw() {
        let s = ReadKSequence::new((0..10).collect(), 10, 1).unwrap();
        let g = build_read_k_generator(&s, 4, 0.1, InwMode::Hash).unwrap();
        assert_eq!(g.t(), 1);
        let single = build_inw(10, 2, 4, 0.1 / 10.0, InwMode::Hash).unwrap();
        assert_eq!(g.parts()[0].inw, single);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let seed = BitString::random(g.seed_len(), &mut rng);
            assert_eq!(g.expand(&seed), single.expand(&seed));
        }
    }

    #[test]
    fn single_variable() {
        for k in 1..4 {
            let s = ReadKSequence::new(vec![0; k], 1, k).unwrap();
            let g = build_read_k_generator(&s, 4, 0.1, InwMode::Expander).unwrap();
            assert_eq!(g.t(), 1);
            assert_eq!(g.seed_len(), 1);
        }
    }

    #[test]
    fn reversal_gives_one_part_with_d4() {
        let n = 12;
        let s = ReadKSequence::k_pass(&[(0..n).rev().collect()], n).unwrap();
        let g = build_read_k_generator(&s, 4, 0.1, InwMode::Expander).unwrap();
        assert_eq!(g.t(), 1);
        assert_eq!(g.parts()[0].inw.d(), 4);
    }

    #[test]
    fn rejects_bad_params() {
        let s = ReadKSequence::new(vec![0, 1], 2, 1).unwrap();
        assert!(build_read_k_generator(&s, 1, 0.1, InwMode::Hash).is_err());
        assert!(build_read_k_generator(&s, 2, 1.5, InwMode::Hash).is_err());
        assert!(build_linear_length_generator(&[0, 1, 2], 3, 2, 0.1, InwMode::Hash).is_err());
    }

    #[test]
    fn layout_is_a_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &(n, k) in &[(8, 2), (20, 3), (40, 2)] {
            let mut elems: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
            elems.shuffle(&mut rng);
            let s = ReadKSequence::new(elems, n, k).unwrap();
            let g = build_read_k_generator(&s, 4, 0.1, InwMode::Hash).unwrap();
            let mut covered = vec![0; n];
            let mut next = 0;
            for (i, p) in g.parts().iter().enumerate() {
                assert_eq!(g.segment(i).0, next);
                next = g.segment(i).1;
                assert!(p.max_visits <= 2 * k);
                for &v in &p.vars {
                    covered[v] += 1;
                }
            }
            assert_eq!(next, g.seed_len());
            assert!(covered.iter().all(|&c| c == 1));
            let mins: Vec<usize> = g
                .parts()
                .iter()
                .map(|p| *p.vars.iter().min().unwrap())
                .collect();
            assert!(mins.windows(2).all(|w| w[0] < w[1]));
            assert!(g.t() <= n);
            let report = g.seed_report();
            assert_eq!(report.total, report.part_seed_lens.iter().sum::<usize>());
            assert_eq!(report.total, g.seed_len());
        }
    }

    #[test]
    fn product_independence_exhaustive_toy() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let mut elems: Vec<usize> = (0..8).flat_map(|v| [v, v]).collect();
            elems.shuffle(&mut rng);
            let s = ReadKSequence::new(elems, 8, 2).unwrap();
            let g = build_read_k_generator(&s, 4, 0.1, toy()).unwrap();
            assert!(g.seed_len() <= 20);
            let mut ws = Workspace::new();
            let mut seed = BitString::zeros(g.seed_len());
            let table: Vec<Vec<bool>> = (0..1u64 << g.seed_len())
                .map(|m| {
                    seed.set_from_u64(m);
                    let mut out = vec![false; 8];
                    g.expand_with(&seed, &mut out, &mut ws);
                    out
                })
                .collect();
            for (i, p) in g.parts().iter().enumerate() {
                let (a, b) = g.segment(i);
                for m in 0..table.len() {
                    for bit in (0..g.seed_len()).filter(|x| !(a..b).contains(x)) {
                        let other = &table[m ^ (1 << bit)];
                        for &v in &p.vars {
                            assert_eq!(table[m][v], other[v]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn uniform_parts_are_exactly_uniform() {
        let s = ReadKSequence::new(vec![2, 0, 1, 0, 2, 1], 3, 2).unwrap();
        let g = build_read_k_generator(&s, 4, 0.1, InwMode::Uniform).unwrap();
        assert_eq!(g.seed_len(), 3);
        let mut seen = [0usize; 8];
        for m in 0..8u64 {
            let out = g.expand(&BitString::from_u64(m, 3)).unwrap();
            let code = out
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &b)| acc | (b as usize) << i);
            seen[code] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn frequent_variable_uses_its_own_bit() {
        // One variable read 6 times, the others once.
        let n = 16;
        let mut elems: Vec<usize> = (0..n).collect();
        elems.extend([5; 5]);
        let g = build_linear_length_generator(&elems, n, 4, 0.1, InwMode::Hash).unwrap();
        assert_eq!(g.frequent(), &[5]);
        assert_eq!(g.seed_len(), g.frequent_start() + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let mut seed = BitString::random(g.seed_len(), &mut rng);
            let a = g.expand(&seed).unwrap();
            assert_eq!(a[5], seed.get(g.frequent_start()));
            seed.flip(g.frequent_start());
            let b = g.expand(&seed).unwrap();
            assert_ne!(a[5], b[5]);
            let diff: Vec<usize> = (0..n).filter(|&i| a[i] != b[i]).collect();
            assert_eq!(diff, vec![5]);
        }
    }

    #[test]
    fn read_once_reduces_to_read_k() {
        let n = 32;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut elems: Vec<usize> = (0..n).collect();
        elems.shuffle(&mut rng);
        let g = build_linear_length_generator(&elems, n, 4, 0.1, InwMode::Hash).unwrap();
        assert!(g.frequent().is_empty());
        assert_eq!(g.k(), 1);
        let s = ReadKSequence::new(elems, n, 1).unwrap();
        let direct = build_read_k_generator(&s, 4, 0.1, InwMode::Hash).unwrap();
        assert_eq!(g.parts(), direct.parts());
    }

    #[test]
    fn frequent_set_bound_random() {
        let n = 256;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let elems: Vec<usize> = (0..3 * n).map(|_| rng.gen_range(0..n)).collect();
            let split = frequency_split(&elems, n).unwrap();
            assert!(split.frequent.len() <= 3 * n / split.threshold);
            let rare = padded_rare_sequence(&elems, &split).unwrap().unwrap();
            assert!(rare.k() <= split.threshold);
            let g = build_linear_length_generator(&elems, n, 4, 0.1, InwMode::Hash).unwrap();
            let r = g.seed_report();
            assert_eq!(
                r.total,
                r.part_seed_lens.iter().sum::<usize>() + r.frequent_bits
            );
        }
    }

    #[test]
    fn threshold_values() {
        assert_eq!(frequency_threshold(4), 1);
        assert_eq!(frequency_threshold(16), 1);
        assert_eq!(frequency_threshold(256), 1);
        assert_eq!(frequency_threshold(1 << 16), 2);
    }

    #[test]
    fn descriptor_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut elems: Vec<usize> = (0..10).flat_map(|v| [v, v]).collect();
        elems.shuffle(&mut rng);
        let s = ReadKSequence::new(elems.clone(), 10, 2).unwrap();
        let g = build_read_k_generator(&s, 4, 0.1, InwMode::Expander).unwrap();
        let back = CompositeDescriptor::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let lin = build_linear_length_generator(&elems, 10, 4, 0.1, InwMode::Hash).unwrap();
        assert_eq!(CompositeDescriptor::from_json(&lin.to_json()).unwrap(), lin);
        for _ in 0..5 {
            let seed = BitString::random(g.seed_len(), &mut rng);
            assert_eq!(back.expand(&seed), g.expand(&seed));
        }
        let tampered = g.to_json().replace("\"seed_len\":", "\"seed_len\":1");
        assert!(CompositeDescriptor::from_json(&tampered).is_err());
    }
}
