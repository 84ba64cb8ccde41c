//! Config-driven distinguisher corpora.
//!
//! A corpus config (TOML) lists program families and generator families.
//! Every program is paired with every generator; generators that depend on
//! the reading order are rebuilt from each program's layer labels.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{exact_fooling_error, sampled_fooling_error, Caps, FoolingReport, HarnessError};
use crate::composite::{build_linear_length_generator, build_read_k_generator, CompositeError};
use crate::generator::{Generator, UniformGenerator};
use crate::inw::{build_inw, InwError, InwMode, DEFAULT_TOY_AUX_BITS};
use crate::program::{
    address_function, mod_counter, random_obp, weighted_mod_counter, ObliviousBranchingProgram,
    ProgramError, Restriction,
};
use crate::sequence::ReadKSequence;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("{context}: {source}")]
    Harness {
        context: String,
        source: HarnessError,
    },
}

fn field_err(field: impl Into<String>, message: impl ToString) -> CorpusError {
    CorpusError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramKind {
    Random,
    Parity,
    ModCounter,
    Address,
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    /// Each variable `k` times, uniformly shuffled.
    #[default]
    Shuffled,
    /// Identity pass followed by `k - 1` random permutations.
    KPass,
    /// Identity pass repeated `k` times.
    Identity,
    /// Identity and reversed passes alternating.
    Reversal,
    /// The 1-based list in `sequence`.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramSpec {
    pub kind: ProgramKind,
    #[serde(default)]
    pub n: usize,
    #[serde(default = "default_w")]
    pub w: usize,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default)]
    pub order: OrderKind,
    #[serde(default = "two")]
    pub k: usize,
    #[serde(default)]
    pub sequence: Vec<usize>,
    #[serde(default = "three")]
    pub modulus: usize,
    #[serde(default)]
    pub target: usize,
    /// Data bits of the address function.
    #[serde(default)]
    pub n_addr: usize,
    /// Variables fixed by a random restriction (restricted kind).
    #[serde(default)]
    pub fixed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    ReadK,
    LinearLength,
    Inw,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    #[default]
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Expander,
    Hash,
    Toy,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    #[serde(default = "default_aux")]
    pub aux_bits: usize,
    /// Width parameter; defaults to the program's width.
    #[serde(default)]
    pub w: Option<usize>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub method: MethodKind,
    #[serde(default = "default_samples")]
    pub samples: u64,
}

fn default_w() -> usize {
    4
}
fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn three() -> usize {
    3
}
fn default_mode() -> ModeName {
    ModeName::Hash
}
fn default_aux() -> usize {
    DEFAULT_TOY_AUX_BITS
}
fn default_eps() -> f64 {
    0.1
}
fn default_samples() -> u64 {
    1_000_000
}

impl GeneratorSpec {
    pub fn inw_mode(&self) -> InwMode {
        match self.mode {
            ModeName::Expander => InwMode::Expander,
            ModeName::Hash => InwMode::Hash,
            ModeName::Toy => InwMode::Toy {
                aux_bits: self.aux_bits,
            },
            ModeName::Uniform => InwMode::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub programs: Vec<ProgramSpec>,
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

impl CorpusConfig {
    pub fn from_toml(text: &str) -> Result<Self, CorpusError> {
        let config: CorpusConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            CorpusError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (i, p) in self.programs.iter().enumerate() {
            let f = |name: &str| format!("programs[{i}].{name}");
            match p.kind {
                ProgramKind::Address => {
                    if !p.n_addr.is_power_of_two() {
                        return Err(field_err(f("n_addr"), "must be a power of two"));
                    }
                }
                _ => {
                    if p.n == 0 {
                        return Err(field_err(f("n"), "must be at least 1"));
                    }
                    if p.k == 0 {
                        return Err(field_err(f("k"), "must be at least 1"));
                    }
                }
            }
            if matches!(p.kind, ProgramKind::Random | ProgramKind::Restricted) && p.w < 2 {
                return Err(field_err(f("w"), "must be at least 2"));
            }
            if p.kind == ProgramKind::ModCounter && p.modulus == 0 {
                return Err(field_err(f("modulus"), "must be at least 1"));
            }
            if p.order == OrderKind::Explicit && p.sequence.is_empty() {
                return Err(field_err(f("sequence"), "explicit order needs a sequence"));
            }
            if p.order == OrderKind::Explicit {
                ReadKSequence::from_one_based(&p.sequence, p.n + p.fixed, p.k)
                    .map_err(|e| field_err(f("sequence"), e))?;
            }
        }
        for (i, g) in self.generators.iter().enumerate() {
            let f = |name: &str| format!("generators[{i}].{name}");
            if !(g.eps > 0.0 && g.eps < 1.0) {
                return Err(field_err(f("eps"), "must lie in (0, 1)"));
            }
            if g.method == MethodKind::Sampled && g.samples < super::MIN_SAMPLES {
                return Err(field_err(
                    f("samples"),
                    format!("must be at least {}", super::MIN_SAMPLES),
                ));
            }
            if g.mode == ModeName::Toy && g.aux_bits == 0 {
                return Err(field_err(f("aux_bits"), "must be at least 1"));
            }
        }
        Ok(())
    }

    /// 50 seeded random read-2 width-4 programs on 8 variables plus a parity
    /// and a mod-3 counter, against the toy read-k generator (exact) and the
    /// hash read-k generator (sampled).
    pub fn desk_default() -> Self {
        CorpusConfig {
            name: "desk".into(),
            rng_seed: 2024,
            caps: Caps::default(),
            programs: desk_programs(),
            generators: vec![
                GeneratorSpec {
                    kind: GeneratorKind::ReadK,
                    mode: ModeName::Toy,
                    aux_bits: DESK_TOY_AUX_BITS,
                    w: Some(4),
                    eps: 0.1,
                    method: MethodKind::Exact,
                    samples: default_samples(),
                },
                GeneratorSpec {
                    kind: GeneratorKind::ReadK,
                    mode: ModeName::Hash,
                    aux_bits: DEFAULT_TOY_AUX_BITS,
                    w: Some(4),
                    eps: 0.1,
                    method: MethodKind::Sampled,
                    samples: default_samples(),
                },
            ],
        }
    }
}

/// Toy aux width of the desk corpus. With two bits per level the small
/// parts of shuffled read-2 orders on 8 variables get exactly uniform
/// output and every error is 0; one bit leaves measurable errors.
pub const DESK_TOY_AUX_BITS: usize = 1;

/// The fixed read-2 corpus on `n = 8`, width 4.
pub fn desk_programs() -> Vec<ProgramSpec> {
    let base = ProgramSpec {
        kind: ProgramKind::Random,
        n: 8,
        w: 4,
        count: 50,
        order: OrderKind::Shuffled,
        k: 2,
        sequence: vec![],
        modulus: 3,
        target: 0,
        n_addr: 0,
        fixed: 0,
    };
    vec![
        base.clone(),
        ProgramSpec {
            kind: ProgramKind::Parity,
            count: 1,
            order: OrderKind::KPass,
            ..base.clone()
        },
        ProgramSpec {
            kind: ProgramKind::ModCounter,
            count: 1,
            order: OrderKind::KPass,
            ..base
        },
    ]
}

/// One program of the corpus with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusProgram {
    pub spec_index: usize,
    pub instance: usize,
    pub id: String,
    pub program: ObliviousBranchingProgram,
}

fn build_order(spec: &ProgramSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let k = spec.k;
    match spec.order {
        OrderKind::Shuffled => {
            let mut e: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
            e.shuffle(rng);
            e
        }
        OrderKind::KPass => {
            let mut e: Vec<usize> = (0..n).collect();
            for _ in 1..k {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                e.extend(p);
            }
            e
        }
        OrderKind::Identity => (0..k).flat_map(|_| 0..n).collect(),
        OrderKind::Reversal => (0..k)
            .flat_map(|r| {
                let pass: Vec<usize> = if r % 2 == 0 {
                    (0..n).collect()
                } else {
                    (0..n).rev().collect()
                };
                pass
            })
            .collect(),
        OrderKind::Explicit => spec.sequence.iter().map(|v| v - 1).collect(),
    }
}

fn program_error(field: String) -> impl Fn(ProgramError) -> CorpusError {
    move |e| field_err(field.clone(), e)
}

/// Instantiates every program family of `config` deterministically from
/// `config.rng_seed`: family `i` draws from stream `i`.
pub fn build_corpus_programs(config: &CorpusConfig) -> Result<Vec<CorpusProgram>, CorpusError> {
    let mut out = Vec::new();
    for (si, spec) in config.programs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        rng.set_stream(si as u64);
        let err = program_error(format!("programs[{si}]"));
        for inst in 0..spec.count {
            let (program, tag) = match spec.kind {
                ProgramKind::Random => {
                    let order = build_order(spec, spec.n, &mut rng);
                    let seed = rng.gen();
                    (
                        random_obp(&order, spec.n, spec.w, seed).map_err(&err)?,
                        "random",
                    )
                }
                ProgramKind::Parity => {
                    let order = build_order(spec, spec.n, &mut rng);
                    let mut seen = vec![false; spec.n];
                    let weights: Vec<usize> = order
                        .iter()
                        .map(|&v| !std::mem::replace(&mut seen[v], true) as usize)
                        .collect();
                    (
                        weighted_mod_counter(&order, spec.n, 2, &weights, 1).map_err(&err)?,
                        "parity",
                    )
                }
                ProgramKind::ModCounter => {
                    let order = build_order(spec, spec.n, &mut rng);
                    (
                        mod_counter(&order, spec.n, spec.modulus, spec.target).map_err(&err)?,
                        "mod_counter",
                    )
                }
                ProgramKind::Address => (address_function(spec.n_addr).map_err(&err)?, "address"),
                ProgramKind::Restricted => {
                    let total = spec.n + spec.fixed;
                    let order = build_order(spec, total, &mut rng);
                    let seed = rng.gen();
                    let full = random_obp(&order, total, spec.w, seed).map_err(&err)?;
                    let mut vars: Vec<usize> = (0..total).collect();
                    vars.shuffle(&mut rng);
                    let fixed = vars[..spec.fixed].to_vec();
                    let values = (0..spec.fixed).map(|_| rng.gen()).collect();
                    let r = Restriction::new(fixed, values).map_err(&err)?;
                    (full.restrict_program(&r).map_err(&err)?, "restricted")
                }
            };
            out.push(CorpusProgram {
                spec_index: si,
                instance: inst,
                id: format!("p{si}.{inst}:{tag}"),
                program,
            });
        }
    }
    Ok(out)
}

/// The read sequence a generator is built for: the program's layer labels,
/// padded to an exact read count.
pub fn program_sequence(b: &ObliviousBranchingProgram) -> ReadKSequence {
    b.pad_to_exact_k()
        .read_profile()
        .to_sequence()
        .expect("padded programs read every variable equally often")
}

fn composite_err(field: String) -> impl Fn(CompositeError) -> CorpusError {
    move |e| field_err(field.clone(), e)
}

fn inw_err(field: String) -> impl Fn(InwError) -> CorpusError {
    move |e| field_err(field.clone(), e)
}

/// Builds the generator described by `spec` for program `b`.
pub fn build_generator_for(
    spec: &GeneratorSpec,
    b: &ObliviousBranchingProgram,
    field: String,
) -> Result<Box<dyn Generator>, CorpusError> {
    let w = spec.w.unwrap_or(b.w()).max(2);
    let mode = spec.inw_mode();
    Ok(match spec.kind {
        GeneratorKind::ReadK => Box::new(
            build_read_k_generator(&program_sequence(b), w, spec.eps, mode)
                .map_err(composite_err(field))?,
        ),
        GeneratorKind::LinearLength => {
            let order: Vec<usize> = b.layers().iter().map(|l| l.var).collect();
            Box::new(
                build_linear_length_generator(&order, b.n(), w, spec.eps, mode)
                    .map_err(composite_err(field))?,
            )
        }
        GeneratorKind::Inw => {
            let d = 2 * b.read_profile().k.max(1);
            Box::new(build_inw(b.n(), d, w, spec.eps, mode).map_err(inw_err(field))?)
        }
        GeneratorKind::Uniform => Box::new(UniformGenerator { n: b.n() }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub program_index: usize,
    pub generator_index: usize,
    pub report: FoolingReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusOutput {
    pub config: CorpusConfig,
    pub entries: Vec<CorpusEntry>,
}

/// Runs every program against every generator. Entries are ordered by
/// program, then generator. Sampled runs for pair `(p, g)` use rng seed
/// `config.rng_seed + 1 + p * G + g` where `G` is the number of generators.
pub fn run_corpus(config: &CorpusConfig) -> Result<CorpusOutput, CorpusError> {
    config.validate()?;
    let programs = build_corpus_programs(config)?;
    let g_count = config.generators.len() as u64;
    let mut entries = Vec::new();
    for (pi, cp) in programs.iter().enumerate() {
        for (gi, spec) in config.generators.iter().enumerate() {
            let field = format!("generators[{gi}] for {}", cp.id);
            let g = build_generator_for(spec, &cp.program, field.clone())?;
            let harness = |source| CorpusError::Harness {
                context: field.clone(),
                source,
            };
            let mut report = match spec.method {
                MethodKind::Exact => exact_fooling_error(&cp.program, g.as_ref(), config.caps),
                MethodKind::Sampled => {
                    let seed = config
                        .rng_seed
                        .wrapping_add(1 + pi as u64 * g_count + gi as u64);
                    sampled_fooling_error(&cp.program, g.as_ref(), spec.samples, seed, config.caps)
                }
            }
            .map_err(harness)?;
            report.program_id = cp.id.clone();
            report.generator_id = format!("g{gi}:{}", g.label());
            entries.push(CorpusEntry {
                program_index: pi,
                generator_index: gi,
                report,
            });
        }
    }
    Ok(CorpusOutput {
        config: config.clone(),
        entries,
    })
}

const CSV_COLUMNS: [&str; 16] = [
    "program_id",
    "generator_id",
    "method",
    "n",
    "seed_len",
    "pr_uniform",
    "pr_generator",
    "error",
    "error_exact",
    "samples",
    "rng_seed",
    "ci_half_width",
    "eps",
    "exceeds_eps",
    "eps_inside_ci",
    "uniform_exact",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// Column names and rows of the per-report table.
pub fn report_table(reports: &[FoolingReport]) -> (Vec<String>, Vec<Vec<String>>) {
    let headers = CSV_COLUMNS.iter().map(|c| c.to_string()).collect();
    let rows = reports
        .iter()
        .map(|r| {
            let method = match r.method {
                super::Method::Exhaustive => "exhaustive",
                super::Method::Sampled => "sampled",
            };
            vec![
                r.program_id.clone(),
                r.generator_id.clone(),
                method.to_string(),
                r.n.to_string(),
                r.seed_len.to_string(),
                format!("{:.12}", r.pr_uniform),
                format!("{:.12}", r.pr_generator),
                format!("{:.12}", r.error),
                opt(&r.error_exact),
                opt(&r.samples),
                opt(&r.rng_seed),
                r.ci_half_width
                    .map(|h| format!("{h:.12}"))
                    .unwrap_or_default(),
                r.eps.to_string(),
                r.exceeds_eps.to_string(),
                r.eps_inside_ci.to_string(),
                r.uniform_exact.to_string(),
            ]
        })
        .collect();
    (headers, rows)
}

/// CSV with one row per program x generator, preceded by `# `-prefixed
/// provenance lines.
pub fn reports_to_csv(reports: &[FoolingReport], provenance: &[String]) -> String {
    let mut out = String::new();
    for line in provenance {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    let (headers, rows) = report_table(reports);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&headers).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
    out
}

impl CorpusOutput {
    pub fn reports(&self) -> Vec<FoolingReport> {
        self.entries.iter().map(|e| e.report.clone()).collect()
    }

    /// Provenance lines: tool version and the full corpus config as JSON.
    pub fn provenance(&self) -> Vec<String> {
        vec![
            format!("readk {}", crate::VERSION),
            format!(
                "corpus: {}",
                serde_json::to_string(&self.config).expect("config serializes")
            ),
        ]
    }

    pub fn to_csv(&self, extra: &[String]) -> String {
        let mut lines = self.provenance();
        lines.extend_from_slice(extra);
        reports_to_csv(&self.reports(), &lines)
    }

    pub fn to_json(&self, run_config: serde_json::Value) -> String {
        let doc = serde_json::json!({
            "version": crate::VERSION,
            "run_config": run_config,
            "corpus": self.config,
            "entries": self.entries,
        });
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }
}
