use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use readk_core::composite::{
    build_linear_length_generator, build_read_k_generator, frequency_split,
};
use readk_core::harness::{
    exact_fooling_error, hybrid_check, report_table, run_corpus, sampled_fooling_error,
    structural_suite_with, CorpusConfig, EnumerableDistribution, GeneratorKind, GeneratorSpec,
    HarnessError, MethodKind, ModeName, Mutation,
};
use readk_core::inw::build_inw;
use readk_core::program::{mod_counter, random_obp, weighted_mod_counter};
use readk_core::sequence::{
    is_2_regularly_interleaving, is_per_read_monotone, monotone_decomposition, parse_sequence_file,
    parse_sequence_file_general, partition_bound, partition_variables,
};
use readk_core::{
    CompositeDescriptor, Generator, InwDescriptor, InwMode, ObliviousBranchingProgram,
    ReadKSequence,
};

use crate::config::Settings;
use crate::output::Output;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_sequence(path: &Path) -> Result<ReadKSequence> {
    parse_sequence_file(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn one_based(vars: &[usize]) -> Vec<usize> {
    vars.iter().map(|v| v + 1).collect()
}

fn join(vars: &[usize]) -> String {
    vars.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn kv(rows: &[(&str, String)]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|(k, v)| vec![k.to_string(), v.clone()])
        .collect()
}

pub fn analyze(file: &Path) -> Result<Output> {
    let s = load_sequence(file)?;
    let k = s.k();
    let monotone = is_per_read_monotone(&s);
    let directions: Option<Vec<&str>> = monotone
        .as_ref()
        .ok()
        .map(|d| d.iter().map(|x| x.short()).collect());
    let mut pairs = Vec::new();
    let mut all_interleave = true;
    for i in 0..k {
        for j in i + 1..k {
            let view = s.pair_view(i, j).expect("valid pair");
            let v = match is_2_regularly_interleaving(&view) {
                Ok(cert) => json!({
                    "i": i + 1, "j": j + 1, "verdict": "accept",
                    "blocks": cert.blocks.iter().map(|b| one_based(&b.vars)).collect::<Vec<_>>(),
                }),
                Err(v) => {
                    all_interleave = false;
                    json!({
                        "i": i + 1, "j": j + 1, "verdict": "reject",
                        "violation": v,
                    })
                }
            };
            pairs.push(v);
        }
    }
    let decomposition = monotone_decomposition(&s).ok();
    let head = s.identity_head_profile();
    let partition = partition_variables(&s);
    let mono_text = match &directions {
        Some(d) => format!("[{}]", d.join(",")),
        None => "no".into(),
    };
    let inter_text = if k < 2 {
        "vacuous"
    } else if all_interleave {
        "accept"
    } else {
        "reject"
    };
    let result = json!({
        "n": s.universe(),
        "k": k,
        "length": s.len(),
        "k_pass": s.is_k_pass(),
        "per_read_monotone": directions,
        "monotone_witness": monotone.as_ref().err(),
        "interleaving": pairs,
        "decomposition": decomposition,
        "head_visits": {
            "tape_order": one_based(&head.tape_order),
            "visits": head.visits,
            "max_visits": head.max_visits,
            "bound_2k": 2 * k,
        },
        "partition_t": partition.t(),
    });
    let rows = kv(&[
        ("n", s.universe().to_string()),
        ("k", k.to_string()),
        ("k_pass", s.is_k_pass().to_string()),
        ("per_read_monotone", mono_text.clone()),
        ("interleaving", inter_text.to_string()),
        ("max_visits", head.max_visits.to_string()),
        ("bound_2k", (2 * k).to_string()),
        ("partition_t", partition.t().to_string()),
    ]);
    let mut out = Output::new(result).table(&["field", "value"], rows);
    out.say(format!("n={} k={k} k-pass={}", s.universe(), s.is_k_pass()));
    out.say(format!("monotone {mono_text}, interleaving: {inter_text}"));
    out.say(format!(
        "t={} partition, visits={} (bound {})",
        partition.t(),
        head.max_visits,
        2 * k
    ));
    Ok(out)
}

pub fn partition(file: &Path) -> Result<Output> {
    let s = load_sequence(file)?;
    let p = partition_variables(&s);
    let n = s.support().len();
    let bound = partition_bound(s.k(), n);
    let sqrt_n = (n as f64).sqrt();
    let result = json!({
        "n": s.universe(),
        "k": s.k(),
        "k_pass": p.k_pass,
        "t": p.t(),
        "bound": bound,
        "t_over_bound": p.t() as f64 / bound,
        "t_over_sqrt_n": p.t() as f64 / sqrt_n,
        "parts": p.parts.iter().map(|q| json!({
            "vars": one_based(&q.vars),
            "directions": q.directions,
            "interleaving": q.interleaving,
        })).collect::<Vec<_>>(),
    });
    let rows = p
        .parts
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let dirs: Vec<&str> = q.directions.iter().map(|d| d.short()).collect();
            vec![
                (i + 1).to_string(),
                q.vars.len().to_string(),
                join(&one_based(&q.vars)),
                dirs.join(" "),
            ]
        })
        .collect();
    let mut out = Output::new(result).table(&["part", "size", "vars", "directions"], rows);
    out.say(format!(
        "t={} k-pass={} bound={bound:.3e} t/sqrt(n)={:.3}",
        p.t(),
        p.k_pass,
        p.t() as f64 / sqrt_n
    ));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenKind {
    ReadK,
    LinearLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Expander,
    Hash,
    Toy,
    Uniform,
}

impl ModeArg {
    pub fn to_mode(self, aux_bits: usize) -> InwMode {
        match self {
            ModeArg::Expander => InwMode::Expander,
            ModeArg::Hash => InwMode::Hash,
            ModeArg::Toy => InwMode::Toy { aux_bits },
            ModeArg::Uniform => InwMode::Uniform,
        }
    }
}

pub struct BuildArgs<'a> {
    pub kind: GenKind,
    pub file: &'a Path,
    pub w: usize,
    pub eps: f64,
    pub mode: InwMode,
    pub descriptor_out: Option<PathBuf>,
}

pub fn build_gen(a: BuildArgs<'_>, settings: &Settings) -> Result<Output> {
    let text = read(a.file)?;
    let (g, extra) = match a.kind {
        GenKind::ReadK => {
            let s = parse_sequence_file(&text).map_err(|e| anyhow!("{}: {e}", a.file.display()))?;
            (build_read_k_generator(&s, a.w, a.eps, a.mode)?, Value::Null)
        }
        GenKind::LinearLength => {
            let (n, _, elems) = parse_sequence_file_general(&text)
                .map_err(|e| anyhow!("{}: {e}", a.file.display()))?;
            let g = build_linear_length_generator(&elems, n, a.w, a.eps, a.mode)?;
            let split = frequency_split(&elems, n)?;
            let extra = json!({
                "length": elems.len(),
                "threshold": split.threshold,
                "frequent": split.frequent.len(),
                "frequent_bound": elems.len() / split.threshold,
                "rare_k": split.rare_k,
            });
            (g, extra)
        }
    };
    let report = g.seed_report();
    let sum: usize = report.part_seed_lens.iter().sum::<usize>() + report.frequent_bits;
    let path = a
        .descriptor_out
        .or_else(|| settings.out_dir.as_ref().map(|d| d.join("descriptor.json")));
    if let Some(p) = &path {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(p, g.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    let descriptor: Value = serde_json::from_str(&g.to_json()).expect("descriptor json");
    let result = json!({
        "seed_report": report,
        "linear_length": extra,
        "descriptor": descriptor,
    });
    let mut rows = vec![vec![
        "total".to_string(),
        String::new(),
        report.total.to_string(),
    ]];
    for (i, (part, len)) in g.parts().iter().zip(&report.part_seed_lens).enumerate() {
        rows.push(vec![
            format!("part {}", i + 1),
            part.vars.len().to_string(),
            len.to_string(),
        ]);
    }
    if report.frequent_bits > 0 {
        rows.push(vec![
            "frequent".into(),
            report.frequent_bits.to_string(),
            report.frequent_bits.to_string(),
        ]);
    }
    let mut out = Output::new(result).table(&["segment", "outputs", "seed_bits"], rows);
    out.say(format!(
        "s = {} (parts {} + frequent {} = {sum}), t = {}, mode {}",
        report.total,
        report.part_seed_lens.iter().sum::<usize>(),
        report.frequent_bits,
        report.t,
        g.mode().name()
    ));
    if let Some(f) = extra.get("frequent") {
        out.say(format!(
            "|F| = {f} <= {} (length / k(n))",
            extra["frequent_bound"]
        ));
    }
    if let Some(p) = path {
        out.say(format!("descriptor written to {}", p.display()));
    }
    Ok(out)
}

/// Reads a raw composite or INW descriptor, or the `build-gen` document that
/// embeds one.
pub fn load_generator(path: &Path) -> Result<Box<dyn Generator>> {
    let text = read(path)?;
    let inner = serde_json::from_str::<Value>(&text)
        .ok()
        .and_then(|v| v.pointer("/result/descriptor").cloned())
        .map(|d| d.to_string());
    let text = inner.unwrap_or(text);
    let composite = match CompositeDescriptor::from_json(&text) {
        Ok(g) => return Ok(Box::new(g)),
        Err(e) => e,
    };
    match InwDescriptor::from_json(&text) {
        Ok(g) => Ok(Box::new(g)),
        Err(e) => bail!(
            "{}: not a generator descriptor ({composite}; as INW: {e})",
            path.display()
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    Exact,
    Sampled,
}

pub fn fool(
    program: &Path,
    descriptor: &Path,
    method: Option<MethodArg>,
    settings: &Settings,
) -> Result<Output> {
    let b = ObliviousBranchingProgram::from_json(&read(program)?)
        .map_err(|e| anyhow!("{}: {e}", program.display()))?;
    let g = load_generator(descriptor)?;
    let sampled = match method {
        Some(m) => m == MethodArg::Sampled,
        None => settings.samples.is_some(),
    };
    let report = if sampled {
        let samples = settings.samples.unwrap_or(1_000_000);
        sampled_fooling_error(&b, g.as_ref(), samples, settings.rng_seed, settings.caps)?
    } else {
        exact_fooling_error(&b, g.as_ref(), settings.caps)?
    };
    let (headers, rows) = report_table(std::slice::from_ref(&report));
    let headers: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut out = Output::new(serde_json::to_value(&report)?).table(&headers, rows);
    match report.ci_half_width {
        Some(hw) => out.say(format!(
            "error {:.6} +/- {hw:.6} (99%), eps {}",
            report.error, report.eps
        )),
        None => out.say(format!(
            "error {} = {:.6}, eps {}",
            report.error_exact.as_deref().unwrap_or("?"),
            report.error,
            report.eps
        )),
    }
    if !sampled && report.exceeds_eps {
        out.say("exact error exceeds the descriptor's eps");
        out.failed = true;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MutateArg {
    None,
    AcceptAll,
    OffByOne,
}

pub struct SuiteArgs<'a> {
    pub n_max: usize,
    pub k: usize,
    pub mutation: Mutation,
    pub hybrid_trials: usize,
    pub corpus: Option<&'a Path>,
}

/// Corpus run as part of the suite: the desk programs against the toy
/// read-k generator (reported) and the uniform generator (must be exact).
fn suite_corpus(rng_seed: u64, settings: &Settings) -> CorpusConfig {
    let mut c = CorpusConfig::desk_default();
    c.name = "suite".into();
    c.rng_seed = rng_seed;
    c.caps = settings.caps;
    let toy = c.generators[0].clone();
    c.generators = vec![
        toy.clone(),
        GeneratorSpec {
            kind: GeneratorKind::Uniform,
            mode: ModeName::Uniform,
            ..toy
        },
    ];
    c
}

pub fn suite(a: SuiteArgs<'_>, settings: &Settings) -> Result<Output> {
    let structural = structural_suite_with(a.n_max, a.k, &a.mutation);

    // Hybrid battery: read-2 programs on 6 variables, a random half Y fed
    // from a toy generator and the rest uniform.
    let mut rng = ChaCha8Rng::seed_from_u64(settings.rng_seed);
    let mut hybrids = Vec::new();
    let n = 6;
    for trial in 0..a.hybrid_trials {
        let mut order: Vec<usize> = (0..n).chain(0..n).collect();
        order.shuffle(&mut rng);
        let b = random_obp(&order, n, 4, settings.rng_seed ^ trial as u64)?;
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(&mut rng);
        let mut y = vars[..n / 2].to_vec();
        y.sort_unstable();
        let g = build_inw(y.len(), 4, 4, 0.1, InwMode::Toy { aux_bits: 1 })?;
        let d = EnumerableDistribution::from_generator(&g, settings.caps.seed)?;
        let d_prime = EnumerableDistribution::uniform(n - y.len())?;
        hybrids.push(hybrid_check(&b, &y, &d, &d_prime, settings.caps)?);
    }
    let hybrid_failures = hybrids.iter().filter(|h| !h.holds).count();

    let corpus_config = match a.corpus {
        Some(p) => {
            CorpusConfig::from_toml(&read(p)?).map_err(|e| anyhow!("{}: {e}", p.display()))?
        }
        None => suite_corpus(2024, settings),
    };
    let corpus = run_corpus(&corpus_config)?;
    let mut corpus_failures = Vec::new();
    for e in &corpus.entries {
        let spec = &corpus_config.generators[e.generator_index];
        let r = &e.report;
        let bad = match (spec.kind, spec.method, spec.mode) {
            (GeneratorKind::Uniform, _, _) => r.error != 0.0 && r.ci_half_width.is_none(),
            (_, MethodKind::Exact, ModeName::Toy) => false,
            (_, MethodKind::Exact, _) => r.exceeds_eps,
            (_, MethodKind::Sampled, _) => r.error - r.ci_half_width.unwrap_or(0.0) > r.eps,
        };
        if bad {
            corpus_failures.push(format!("{} vs {}", r.program_id, r.generator_id));
        }
    }

    let passed = structural.passed && hybrid_failures == 0 && corpus_failures.is_empty();
    let mut rows: Vec<Vec<String>> = structural
        .properties
        .iter()
        .map(|p| {
            let detail = p
                .counterexample
                .as_ref()
                .map(|c| format!("counterexample {}", join(&c.sequence)))
                .unwrap_or_default();
            vec![
                "structural".into(),
                p.name.clone(),
                p.checked.to_string(),
                p.violations.to_string(),
                p.passed.to_string(),
                detail,
            ]
        })
        .collect();
    rows.push(vec![
        "hybrid".into(),
        "hybrid_inequality".into(),
        hybrids.len().to_string(),
        hybrid_failures.to_string(),
        (hybrid_failures == 0).to_string(),
        String::new(),
    ]);
    rows.push(vec![
        "corpus".into(),
        corpus_config.name.clone(),
        corpus.entries.len().to_string(),
        corpus_failures.len().to_string(),
        corpus_failures.is_empty().to_string(),
        corpus_failures.join("; "),
    ]);
    let max_toy_error = corpus
        .entries
        .iter()
        .filter(|e| corpus_config.generators[e.generator_index].mode == ModeName::Toy)
        .map(|e| e.report.error)
        .fold(0.0f64, f64::max);
    let result = json!({
        "passed": passed,
        "structural": structural,
        "hybrid": {
            "trials": hybrids.len(),
            "failures": hybrid_failures,
            "reports": hybrids,
        },
        "corpus": {
            "config": corpus_config,
            "entries": corpus.entries,
            "failures": corpus_failures,
            "max_toy_error": max_toy_error,
        },
    });
    let mut out = Output::new(result).table(
        &[
            "group",
            "check",
            "checked",
            "violations",
            "passed",
            "detail",
        ],
        rows,
    );
    for p in &structural.properties {
        out.say(format!(
            "{:<28} {:>6} checked, {} violations",
            p.name, p.checked, p.violations
        ));
        if let Some(c) = &p.counterexample {
            out.say(format!(
                "  counterexample: {} ({})",
                join(&c.sequence),
                c.detail
            ));
        }
    }
    out.say(format!(
        "hybrid inequality: {} trials, {hybrid_failures} failures",
        hybrids.len()
    ));
    out.say(format!(
        "corpus: {} runs, {} failures, max toy error {max_toy_error:.4}",
        corpus.entries.len(),
        corpus_failures.len()
    ));
    out.say(if passed { "suite: PASS" } else { "suite: FAIL" });
    out.failed = !passed;
    Ok(out)
}

/// End-to-end tour at n = 8 on the two-pass reversal order.
pub fn demo(settings: &Settings) -> Result<Output> {
    let n = 8;
    let order: Vec<usize> = (0..n).chain((0..n).rev()).collect();
    let s = ReadKSequence::new(order.clone(), n, 2)?;
    let p = partition_variables(&s);
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for mode in [InwMode::toy(), InwMode::Hash] {
        let g = build_read_k_generator(&s, 4, 0.1, mode)?;
        let mut weights = vec![0; 2 * n];
        weights[..n].fill(1);
        let programs = [
            ("parity", weighted_mod_counter(&order, n, 2, &weights, 1)?),
            ("mod3", mod_counter(&order, n, 3, 0)?),
            ("random", random_obp(&order, n, 4, settings.rng_seed)?),
        ];
        for (name, b) in &programs {
            let r = match exact_fooling_error(b, &g, settings.caps) {
                Ok(r) => r,
                Err(HarnessError::TooLargeForExhaustive { .. }) => {
                    sampled_fooling_error(b, &g, 100_000, settings.rng_seed, settings.caps)?
                }
                Err(e) => return Err(e.into()),
            };
            rows.push(vec![
                name.to_string(),
                mode.name().to_string(),
                g.seed_len().to_string(),
                format!("{:.6}", r.error),
                r.error_exact.clone().unwrap_or_default(),
            ]);
            details.push(json!({"program": name, "mode": mode.name(), "report": r}));
        }
    }
    let result = json!({
        "sequence": s.one_based(),
        "t": p.t(),
        "k_pass": p.k_pass,
        "fooling": details,
    });
    let mut out = Output::new(result).table(
        &["program", "mode", "seed_len", "error", "exact"],
        rows.clone(),
    );
    out.say(format!(
        "two-pass reversal on n={n}: t={} k-pass={}",
        p.t(),
        p.k_pass
    ));
    for r in rows {
        out.say(format!(
            "{:<7} {:<5} s={:<4} error {}",
            r[0], r[1], r[2], r[3]
        ));
    }
    Ok(out)
}
