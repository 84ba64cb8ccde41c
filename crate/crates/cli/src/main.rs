//! `readk`: batch front end for the read-k toolkit.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use readk_core::harness::{Caps, Mutation};

use commands::{BuildArgs, GenKind, MethodArg, ModeArg, MutateArg, SuiteArgs};
use config::{Format, RunConfig, Settings, SettingsFile};

#[derive(Parser)]
#[command(
    name = "readk",
    version,
    about = "Read-k sequence analysis and pseudorandom generators for oblivious branching programs"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    rng_seed: Option<u64>,
    /// Worker threads for enumeration and sampling (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// TOML file with defaults for these flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write `<command>.<ext>` here instead of printing to stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Largest input length enumerated exhaustively.
    #[arg(long, global = true)]
    input_cap: Option<usize>,
    /// Largest seed length enumerated exhaustively.
    #[arg(long, global = true)]
    seed_cap: Option<usize>,
    /// Sample count; selects sampling in `fool`.
    #[arg(long, global = true)]
    samples: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Structure report for a sequence file.
    Analyze { file: PathBuf },
    /// Partition into monotone interleaving parts.
    Partition { file: PathBuf },
    /// Build a read-k or linear-length generator for a sequence file.
    BuildGen {
        #[arg(long, value_enum, default_value = "read-k")]
        kind: GenKind,
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        w: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, value_enum, default_value = "expander")]
        mode: ModeArg,
        /// Per-level seed bits in toy mode.
        #[arg(long, default_value_t = readk_core::inw::DEFAULT_TOY_AUX_BITS)]
        aux_bits: usize,
        /// Where to write the descriptor (default: `<out-dir>/descriptor.json`).
        #[arg(long)]
        descriptor_out: Option<PathBuf>,
    },
    /// Measure how well a generator fools a program.
    Fool {
        program: PathBuf,
        descriptor: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Exhaustive structural suite, hybrid battery and corpus run.
    Suite {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Deliberately broken checker, for negative controls.
        #[arg(long, value_enum, default_value = "none")]
        mutate: MutateArg,
        /// Plant a sequence (comma-separated, 1-based) reported as interleaving.
        #[arg(long, value_delimiter = ',')]
        plant: Option<Vec<usize>>,
        #[arg(long, default_value_t = 20)]
        hybrid_trials: usize,
        /// Corpus config (TOML) replacing the built-in one.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Small end-to-end tour.
    Demo,
}

fn resolve(g: &GlobalArgs) -> Result<Settings> {
    let file = match &g.config {
        Some(p) => SettingsFile::load(p)?,
        None => SettingsFile::default(),
    };
    let defaults = Caps::default();
    Ok(Settings {
        format: g.format.or(file.format).unwrap_or_default(),
        rng_seed: g.rng_seed.or(file.rng_seed).unwrap_or(0),
        threads: g.threads.or(file.threads),
        out_dir: g.out_dir.clone().or(file.out_dir),
        caps: Caps {
            input: g.input_cap.or(file.input_cap).unwrap_or(defaults.input),
            seed: g.seed_cap.or(file.seed_cap).unwrap_or(defaults.seed),
        },
        samples: g.samples.or(file.samples),
    })
}

fn run(cli: Cli) -> Result<bool> {
    let settings = resolve(&cli.global)?;
    if let Some(t) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()?;
    }
    let (name, params, result) = match &cli.command {
        Command::Analyze { file } => ("analyze", json!({ "file": file }), commands::analyze(file)),
        Command::Partition { file } => (
            "partition",
            json!({ "file": file }),
            commands::partition(file),
        ),
        Command::BuildGen {
            kind,
            file,
            w,
            eps,
            mode,
            aux_bits,
            descriptor_out,
        } => {
            let mode = mode.to_mode(*aux_bits);
            let params = json!({
                "kind": format!("{kind:?}"), "file": file, "w": w, "eps": eps,
                "mode": mode, "descriptor_out": descriptor_out,
            });
            let args = BuildArgs {
                kind: *kind,
                file,
                w: *w,
                eps: *eps,
                mode,
                descriptor_out: descriptor_out.clone(),
            };
            ("build-gen", params, commands::build_gen(args, &settings))
        }
        Command::Fool {
            program,
            descriptor,
            method,
        } => (
            "fool",
            json!({ "program": program, "descriptor": descriptor, "method": method.map(|m| format!("{m:?}")) }),
            commands::fool(program, descriptor, *method, &settings),
        ),
        Command::Suite {
            n_max,
            k,
            mutate,
            plant,
            hybrid_trials,
            corpus,
        } => {
            let mutation = match (plant, mutate) {
                (Some(elems), _) => {
                    let len = elems.len();
                    let n = elems.iter().copied().max().unwrap_or(0);
                    Mutation::Planted {
                        elems: elems.clone(),
                        n,
                        k: len.checked_div(n).unwrap_or(1),
                    }
                }
                (None, MutateArg::None) => Mutation::None,
                (None, MutateArg::AcceptAll) => Mutation::AcceptAll,
                (None, MutateArg::OffByOne) => Mutation::OffByOne,
            };
            let params = json!({
                "n_max": n_max, "k": k, "mutation": mutation,
                "hybrid_trials": hybrid_trials, "corpus": corpus,
            });
            let args = SuiteArgs {
                n_max: *n_max,
                k: *k,
                mutation,
                hybrid_trials: *hybrid_trials,
                corpus: corpus.as_deref(),
            };
            ("suite", params, commands::suite(args, &settings))
        }
        Command::Demo => ("demo", json!({}), commands::demo(&settings)),
    };
    let out = result?;
    let run = RunConfig {
        version: readk_core::VERSION,
        command: name.to_string(),
        params,
        settings,
    };
    out.emit(&run)?;
    Ok(!out.failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
