//! Layered oblivious branching programs.
//!
//! Every level has the same number of states `w` (numbered `0..w`). Layer
//! `l` reads variable `layers[l].var` and moves state `s` to `t0[s]` or
//! `t1[s]`. The program accepts when the final state is in `accepting`.

mod build;
mod count;

use serde::{Deserialize, Serialize};

use crate::sequence::{ReadKSequence, SequenceError};

pub use build::{
    address_function, constant, mod_counter, parity, random_obp, weighted_mod_counter,
};
pub use count::{AcceptanceResult, DEFAULT_EXHAUSTIVE_CAP};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("input has {got} bits, program expects {expected}")]
    InputLengthMismatch { got: usize, expected: usize },
    #[error("layer {layer} reads variable {var}, but n = {n}")]
    VariableOutOfRange { layer: usize, var: usize, n: usize },
    #[error("layer {layer}: transition table has length {len}, width is {w}")]
    TableLength { layer: usize, len: usize, w: usize },
    #[error("layer {layer}: transition target {target} outside width {w}")]
    StateOutOfRange {
        layer: usize,
        target: usize,
        w: usize,
    },
    #[error("state {state} outside width {w}")]
    BadState { state: usize, w: usize },
    #[error("width must be at least {min}, got {w}")]
    InvalidWidth { w: usize, min: usize },
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("restriction fixes variable {var}, but n = {n}")]
    RestrictionOutOfRange { var: usize, n: usize },
    #[error("restriction lists {vars} variables but {values} values")]
    RestrictionShape { vars: usize, values: usize },
    #[error("restriction fixes variable {0} twice")]
    RestrictionDuplicate(usize),
    #[error("n = {n} too large for exhaustive counting (cap {cap})")]
    TooLargeForExhaustive { n: usize, cap: usize },
    #[error("layer-weight list has length {got}, expected {expected}")]
    WeightLength { got: usize, expected: usize },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("malformed program file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layer {
    pub var: usize,
    pub t0: Vec<usize>,
    pub t1: Vec<usize>,
}

impl Layer {
    pub fn identity(var: usize, w: usize) -> Self {
        let id: Vec<usize> = (0..w).collect();
        Layer {
            var,
            t0: id.clone(),
            t1: id,
        }
    }

    #[inline]
    pub fn step(&self, state: usize, bit: bool) -> usize {
        if bit {
            self.t1[state]
        } else {
            self.t0[state]
        }
    }
}

/// On-disk shape; validated into [`ObliviousBranchingProgram`].
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgramFile {
    n: usize,
    w: usize,
    layers: Vec<Layer>,
    start: usize,
    accepting: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ProgramFile", into = "ProgramFile")]
pub struct ObliviousBranchingProgram {
    n: usize,
    w: usize,
    layers: Vec<Layer>,
    start: usize,
    accepting: Vec<usize>,
    accept_mask: Vec<bool>,
}

impl TryFrom<ProgramFile> for ObliviousBranchingProgram {
    type Error = ProgramError;

    fn try_from(f: ProgramFile) -> Result<Self, Self::Error> {
        ObliviousBranchingProgram::new(f.n, f.w, f.layers, f.start, f.accepting)
    }
}

impl From<ObliviousBranchingProgram> for ProgramFile {
    fn from(p: ObliviousBranchingProgram) -> Self {
        ProgramFile {
            n: p.n,
            w: p.w,
            layers: p.layers,
            start: p.start,
            accepting: p.accepting,
        }
    }
}

/// Fixed values for a subset `Z` of the variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restriction {
    fixed_vars: Vec<usize>,
    values: Vec<bool>,
}

impl Restriction {
    pub fn new(fixed_vars: Vec<usize>, values: Vec<bool>) -> Result<Self, ProgramError> {
        if fixed_vars.len() != values.len() {
            return Err(ProgramError::RestrictionShape {
                vars: fixed_vars.len(),
                values: values.len(),
            });
        }
        let mut pairs: Vec<(usize, bool)> = fixed_vars.into_iter().zip(values).collect();
        pairs.sort_by_key(|p| p.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(ProgramError::RestrictionDuplicate(w[0].0));
        }
        let (fixed_vars, values) = pairs.into_iter().unzip();
        Ok(Restriction { fixed_vars, values })
    }

    pub fn empty() -> Self {
        Restriction {
            fixed_vars: vec![],
            values: vec![],
        }
    }

    /// Sorted fixed variables.
    pub fn fixed_vars(&self) -> &[usize] {
        &self.fixed_vars
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// Variables of `0..n` left free, in increasing order.
    pub fn free_vars(&self, n: usize) -> Vec<usize> {
        (0..n)
            .filter(|v| self.fixed_vars.binary_search(v).is_err())
            .collect()
    }

    /// Full input over `0..n` from free-variable values `y` (in free-variable
    /// order) and the fixed values.
    pub fn merge(&self, y: &[bool], n: usize) -> Vec<bool> {
        let mut x = vec![false; n];
        for (&v, &b) in self.fixed_vars.iter().zip(&self.values) {
            x[v] = b;
        }
        for (v, &b) in self.free_vars(n).into_iter().zip(y) {
            x[v] = b;
        }
        x
    }
}

/// Layer labels of a program with per-variable read counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadProfile {
    pub n: usize,
    pub order: Vec<usize>,
    pub counts: Vec<usize>,
    /// Largest read count.
    pub k: usize,
    /// Every variable is read exactly `k` times.
    pub exact: bool,
}

impl ReadProfile {
    pub fn is_read_once(&self) -> bool {
        self.k <= 1
    }

    pub fn to_sequence(&self) -> Result<ReadKSequence, SequenceError> {
        ReadKSequence::new(self.order.clone(), self.n, self.k.max(1))
    }
}

impl ObliviousBranchingProgram {
    pub fn new(
        n: usize,
        w: usize,
        layers: Vec<Layer>,
        start: usize,
        accepting: Vec<usize>,
    ) -> Result<Self, ProgramError> {
        if w == 0 {
            return Err(ProgramError::InvalidWidth { w, min: 1 });
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.var >= n {
                return Err(ProgramError::VariableOutOfRange {
                    layer: l,
                    var: layer.var,
                    n,
                });
            }
            for t in [&layer.t0, &layer.t1] {
                if t.len() != w {
                    return Err(ProgramError::TableLength {
                        layer: l,
                        len: t.len(),
                        w,
                    });
                }
                if let Some(&target) = t.iter().find(|&&s| s >= w) {
                    return Err(ProgramError::StateOutOfRange {
                        layer: l,
                        target,
                        w,
                    });
                }
            }
        }
        if start >= w {
            return Err(ProgramError::BadState { state: start, w });
        }
        let mut accepting = accepting;
        accepting.sort_unstable();
        accepting.dedup();
        if let Some(&state) = accepting.iter().find(|&&s| s >= w) {
            return Err(ProgramError::BadState { state, w });
        }
        let mut accept_mask = vec![false; w];
        for &s in &accepting {
            accept_mask[s] = true;
        }
        Ok(ObliviousBranchingProgram {
            n,
            w,
            layers,
            start,
            accepting,
            accept_mask,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ProgramError> {
        serde_json::from_str(text).map_err(|e| ProgramError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// Number of layers.
    pub fn length(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn accepting(&self) -> &[usize] {
        &self.accepting
    }

    #[inline]
    pub fn is_accepting(&self, state: usize) -> bool {
        self.accept_mask[state]
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<bool, ProgramError> {
        if x.len() != self.n {
            return Err(ProgramError::InputLengthMismatch {
                got: x.len(),
                expected: self.n,
            });
        }
        Ok(self.eval_with(|v| x[v]))
    }

    /// Evaluates with bit lookups delegated to `bit`.
    #[inline]
    pub fn eval_with(&self, bit: impl Fn(usize) -> bool) -> bool {
        let mut s = self.start;
        for layer in &self.layers {
            s = layer.step(s, bit(layer.var));
        }
        self.accept_mask[s]
    }

    /// Evaluates on the input whose bit `v` is `(mask >> v) & 1`; `n <= 64`.
    #[inline]
    pub fn eval_mask(&self, mask: u64) -> bool {
        self.eval_with(|v| (mask >> v) & 1 == 1)
    }

    pub fn read_profile(&self) -> ReadProfile {
        let order: Vec<usize> = self.layers.iter().map(|l| l.var).collect();
        let mut counts = vec![0usize; self.n];
        for &v in &order {
            counts[v] += 1;
        }
        let k = counts.iter().copied().max().unwrap_or(0);
        let exact = counts.iter().all(|&c| c == k);
        ReadProfile {
            n: self.n,
            order,
            counts,
            k,
            exact,
        }
    }

    /// `B|_{Z=b}` over the free variables, relabeled `0..n-|Z|` in increasing
    /// order. Fixed layers are folded into the next free layer, or into the
    /// accepting set when no free layer follows.
    pub fn restrict_program(&self, r: &Restriction) -> Result<Self, ProgramError> {
        if let Some(&var) = r.fixed_vars.iter().find(|&&v| v >= self.n) {
            return Err(ProgramError::RestrictionOutOfRange { var, n: self.n });
        }
        let mut fixed = vec![None; self.n];
        for (&v, &b) in r.fixed_vars.iter().zip(&r.values) {
            fixed[v] = Some(b);
        }
        let mut relabel = vec![usize::MAX; self.n];
        let mut next = 0;
        for (v, f) in fixed.iter().enumerate() {
            if f.is_none() {
                relabel[v] = next;
                next += 1;
            }
        }
        let w = self.w;
        let mut pending: Vec<usize> = (0..w).collect();
        let mut pending_is_identity = true;
        let mut layers = Vec::new();
        for layer in &self.layers {
            match fixed[layer.var] {
                Some(b) => {
                    let t = if b { &layer.t1 } else { &layer.t0 };
                    for p in pending.iter_mut() {
                        *p = t[*p];
                    }
                    pending_is_identity = false;
                }
                None => {
                    let (t0, t1) = if pending_is_identity {
                        (layer.t0.clone(), layer.t1.clone())
                    } else {
                        (
                            pending.iter().map(|&p| layer.t0[p]).collect(),
                            pending.iter().map(|&p| layer.t1[p]).collect(),
                        )
                    };
                    layers.push(Layer {
                        var: relabel[layer.var],
                        t0,
                        t1,
                    });
                    if !pending_is_identity {
                        pending = (0..w).collect();
                        pending_is_identity = true;
                    }
                }
            }
        }
        let accepting = (0..w).filter(|&s| self.accept_mask[pending[s]]).collect();
        ObliviousBranchingProgram::new(next, w, layers, self.start, accepting)
    }

    /// Appends identity layers so that every variable is read exactly `k`
    /// times, `k` being the current maximum. Missing reads are appended in
    /// rounds, each round in increasing variable order.
    pub fn pad_to_exact_k(&self) -> Self {
        let profile = self.read_profile();
        let mut layers = self.layers.clone();
        for round in 0..profile.k {
            for (v, &c) in profile.counts.iter().enumerate() {
                if c <= round {
                    layers.push(Layer::identity(v, self.w));
                }
            }
        }
        ObliviousBranchingProgram::new(self.n, self.w, layers, self.start, self.accepting.clone())
            .expect("padding keeps the program valid")
    }

    /// Same program with the per-level state space widened to `w`; extra
    /// states are dead self-loops.
    pub fn widen(&self, w: usize) -> Result<Self, ProgramError> {
        if w < self.w {
            return Err(ProgramError::InvalidWidth { w, min: self.w });
        }
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut t0 = l.t0.clone();
                let mut t1 = l.t1.clone();
                t0.extend(self.w..w);
                t1.extend(self.w..w);
                Layer { var: l.var, t0, t1 }
            })
            .collect();
        ObliviousBranchingProgram::new(self.n, w, layers, self.start, self.accepting.clone())
    }
}
