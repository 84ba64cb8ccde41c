//! Measurement: fooling errors, the hybrid check, exhaustive structural
//! suites and corpus runs.

mod corpus;
mod hybrid;
mod suite;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::generator::{Generator, Workspace};
use crate::program::{ObliviousBranchingProgram, ProgramError};

pub use corpus::{
    build_corpus_programs, build_generator_for, desk_programs, program_sequence, report_table,
    reports_to_csv, run_corpus, CorpusConfig, CorpusEntry, CorpusError, CorpusOutput,
    CorpusProgram, GeneratorKind, GeneratorSpec, MethodKind, ModeName, OrderKind, ProgramKind,
    ProgramSpec, DESK_TOY_AUX_BITS,
};
pub use hybrid::{hybrid_check, EnumerableDistribution, HybridReport};
pub use suite::{
    enumerate_read_k, exhaustive_2_interleaving, structural_suite, structural_suite_with,
    Counterexample, Mutation, PropertyResult, SuiteResult,
};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

pub const MIN_SAMPLES: u64 = 10_000;

const SAMPLE_CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest `n` enumerated for multi-read programs.
    pub input: usize,
    /// Largest seed length enumerated.
    pub seed: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            input: 24,
            seed: 26,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("program reads {program} variables, generator outputs {generator}")]
    IncompatibleDimensions { program: usize, generator: usize },
    #[error("{what} = {size} exceeds the exhaustive cap {cap}; use sampling (--samples)")]
    TooLargeForExhaustive {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("at least {MIN_SAMPLES} samples required, got {0}")]
    TooFewSamples(u64),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoolingReport {
    pub program_id: String,
    pub generator_id: String,
    pub method: Method,
    pub n: usize,
    pub seed_len: usize,
    /// Accepted inputs out of `uniform_total` (exact), or accepted samples.
    pub uniform_accepting: String,
    pub uniform_total: String,
    pub uniform_exact: bool,
    pub generator_accepting: String,
    pub generator_total: String,
    pub pr_uniform: f64,
    pub pr_generator: f64,
    pub error: f64,
    /// `|difference|` as a reduced fraction, exhaustive only.
    pub error_exact: Option<String>,
    pub samples: Option<u64>,
    pub rng_seed: Option<u64>,
    pub confidence: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub eps: f64,
    /// Measured error strictly above `eps` (point estimate).
    pub exceeds_eps: bool,
    /// `eps` lies inside `error ± ci_half_width`.
    pub eps_inside_ci: bool,
    #[serde(skip)]
    pub runtime_ms: u128,
}

impl FoolingReport {
    /// Upper end of the confidence interval (the exact error when exhaustive).
    pub fn upper(&self) -> f64 {
        self.error + self.ci_half_width.unwrap_or(0.0)
    }
}

fn check_dims(b: &ObliviousBranchingProgram, g: &dyn Generator) -> Result<(), HarnessError> {
    if b.n() != g.output_len() {
        return Err(HarnessError::IncompatibleDimensions {
            program: b.n(),
            generator: g.output_len(),
        });
    }
    Ok(())
}

pub fn program_label(b: &ObliviousBranchingProgram) -> String {
    format!("obp(n={}, w={}, len={})", b.n(), b.w(), b.length())
}

/// Accepted seeds when expanding every seed in `0..2^s`.
pub fn count_generator_accepting(
    b: &ObliviousBranchingProgram,
    g: &dyn Generator,
    seed_cap: usize,
) -> Result<u64, HarnessError> {
    check_dims(b, g)?;
    let s = g.seed_len();
    if s > seed_cap || s >= 64 {
        return Err(HarnessError::TooLargeForExhaustive {
            what: "seed length",
            size: s,
            cap: seed_cap,
        });
    }
    let total = 1u64 << s;
    let chunk = 1u64 << 12;
    let chunks = total.div_ceil(chunk);
    let accepted = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut ws = Workspace::new();
            let mut seed = BitString::zeros(s);
            let mut out = vec![false; g.output_len()];
            let mut count = 0u64;
            for m in c * chunk..((c + 1) * chunk).min(total) {
                seed.set_from_u64(m);
                g.expand_with(&seed, &mut out, &mut ws);
                count += b.eval_with(|v| out[v]) as u64;
            }
            count
        })
        .sum();
    Ok(accepted)
}

fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// Exact `|Pr[B(G(U_s))] - Pr[B(U_n)]|` by full enumeration of both sides.
pub fn exact_fooling_error(
    b: &ObliviousBranchingProgram,
    g: &dyn Generator,
    caps: Caps,
) -> Result<FoolingReport, HarnessError> {
    let started = std::time::Instant::now();
    check_dims(b, g)?;
    let uniform = b
        .acceptance_probability_uniform(caps.input)
        .map_err(|e| match e {
            ProgramError::TooLargeForExhaustive { n, cap } => HarnessError::TooLargeForExhaustive {
                what: "input length",
                size: n,
                cap,
            },
            other => other.into(),
        })?;
    let accepted = count_generator_accepting(b, g, caps.seed)?;
    let gen_total = BigUint::from(1u8) << g.seed_len();
    let pu = uniform.probability();
    let pg = ratio(&BigUint::from(accepted), &gen_total);
    let err = (&pg - &pu).abs();
    let error = err.to_f64().unwrap_or(f64::NAN);
    Ok(FoolingReport {
        program_id: program_label(b),
        generator_id: g.label(),
        method: Method::Exhaustive,
        n: b.n(),
        seed_len: g.seed_len(),
        uniform_accepting: uniform.accepting.to_string(),
        uniform_total: uniform.total.to_string(),
        uniform_exact: true,
        generator_accepting: accepted.to_string(),
        generator_total: gen_total.to_string(),
        pr_uniform: pu.to_f64().unwrap_or(f64::NAN),
        pr_generator: pg.to_f64().unwrap_or(f64::NAN),
        error,
        error_exact: Some(format!("{}/{}", err.numer(), err.denom())),
        samples: None,
        rng_seed: None,
        confidence: None,
        ci_half_width: None,
        eps: g.eps(),
        exceeds_eps: error > g.eps(),
        eps_inside_ci: false,
        runtime_ms: started.elapsed().as_millis(),
    })
}

/// Counts accepted samples over `samples` draws. Draw chunk `c` uses stream
/// `stream_base + c` of a ChaCha8 generator seeded with `rng_seed`, so the
/// result does not depend on the thread count.
fn sample_accepting<F: FnMut(&BitString) -> bool>(
    samples: u64,
    rng_seed: u64,
    stream_base: u64,
    seed_len: usize,
    make: impl Fn() -> F + Sync,
) -> u64 {
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(stream_base + c);
            let mut seed = BitString::zeros(seed_len);
            let mut f = make();
            let mut count = 0u64;
            let end = ((c + 1) * SAMPLE_CHUNK).min(samples);
            for _ in c * SAMPLE_CHUNK..end {
                seed.fill_random(&mut rng);
                count += f(&seed) as u64;
            }
            count
        })
        .sum()
}

/// Monte Carlo estimate of the fooling error with a two-sided 99% normal
/// interval. The uniform side is exact whenever it can be counted.
pub fn sampled_fooling_error(
    b: &ObliviousBranchingProgram,
    g: &dyn Generator,
    samples: u64,
    rng_seed: u64,
    caps: Caps,
) -> Result<FoolingReport, HarnessError> {
    let started = std::time::Instant::now();
    check_dims(b, g)?;
    if samples < MIN_SAMPLES {
        return Err(HarnessError::TooFewSamples(samples));
    }
    let n = b.n();
    let exact_uniform = b.acceptance_probability_uniform(caps.input).ok();

    let gen_accepted = sample_accepting(samples, rng_seed, 0, g.seed_len(), || {
        let mut ws = Workspace::new();
        let mut out = vec![false; g.output_len()];
        move |seed: &BitString| {
            g.expand_with(seed, &mut out, &mut ws);
            b.eval_with(|v| out[v])
        }
    });
    let pg = gen_accepted as f64 / samples as f64;
    let mut var = pg * (1.0 - pg) / samples as f64;

    let (pu, ua, ut, uniform_exact) = match &exact_uniform {
        Some(r) => (
            r.to_f64(),
            r.accepting.to_string(),
            r.total.to_string(),
            true,
        ),
        None => {
            let acc = sample_accepting(samples, rng_seed, 1 << 40, n, || {
                |x: &BitString| b.eval_with(|v| x.get(v))
            });
            let pu = acc as f64 / samples as f64;
            var += pu * (1.0 - pu) / samples as f64;
            (pu, acc.to_string(), samples.to_string(), false)
        }
    };
    let error = (pg - pu).abs();
    let hw = Z_99 * var.sqrt();
    let eps = g.eps();
    Ok(FoolingReport {
        program_id: program_label(b),
        generator_id: g.label(),
        method: Method::Sampled,
        n,
        seed_len: g.seed_len(),
        uniform_accepting: ua,
        uniform_total: ut,
        uniform_exact,
        generator_accepting: gen_accepted.to_string(),
        generator_total: samples.to_string(),
        pr_uniform: pu,
        pr_generator: pg,
        error,
        error_exact: None,
        samples: Some(samples),
        rng_seed: Some(rng_seed),
        confidence: Some(0.99),
        ci_half_width: Some(hw),
        eps,
        exceeds_eps: error > eps,
        eps_inside_ci: (error - hw..=error + hw).contains(&eps),
        runtime_ms: started.elapsed().as_millis(),
    })
}
