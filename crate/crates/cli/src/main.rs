//! `memenet` command-line driver.

mod config;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use memenet::kb::conceptnet::convert_conceptnet;
use memenet::{best_gmap, load_kb, run, EvolutionConfig, SemanticNetwork};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::FileConfig;

#[derive(Parser)]
#[command(
    name = "memenet",
    version,
    about = "Evolve semantic networks analogous to a base network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the memetic algorithm and write run artifacts.
    Evolve(EvolveArgs),
    /// Convert a ConceptNet CSV dump to the knowledge base TSV format.
    ConvertConceptnet {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        r_min: f64,
    },
    /// Print the best analogical mapping between two networks as JSON.
    Match { base: PathBuf, target: PathBuf },
}

#[derive(Args)]
struct EvolveArgs {
    /// Knowledge base TSV file.
    #[arg(long)]
    kb: PathBuf,
    /// Base network JSON file.
    #[arg(long)]
    base: PathBuf,
    /// Flat TOML file overriding the default parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum number of generations after the initial population.
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    pop_size: Option<usize>,
    #[arg(long)]
    pc: Option<f64>,
    #[arg(long)]
    pm: Option<f64>,
    /// Evaluate fitness on all cores.
    #[arg(long)]
    parallel: bool,
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    config: EvolutionConfig,
    kb: FileDigest,
    base: FileDigest,
    generations_evaluated: usize,
    best_generation: usize,
    best_fitness: f64,
    matched_relations: usize,
    duration_secs: f64,
}

fn digest(path: &Path) -> anyhow::Result<FileDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
    })
}

fn read_network(path: &Path) -> anyhow::Result<SemanticNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SemanticNetwork::from_json(&text).with_context(|| format!("parsing network {}", path.display()))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn evolve(args: EvolveArgs) -> anyhow::Result<()> {
    let mut cfg = EvolutionConfig::default();
    if let Some(path) = &args.config {
        FileConfig::load(path)?.apply(&mut cfg);
    }
    if let Some(seed) = args.seed {
        cfg.rng_seed = seed;
    }
    if let Some(g) = args.generations {
        cfg.max_generations = g;
    }
    if let Some(n) = args.pop_size {
        cfg.pop_size = n;
    }
    if let Some(p) = args.pc {
        cfg.p_c = p;
    }
    if let Some(p) = args.pm {
        cfg.p_m = p;
    }
    if args.parallel {
        cfg.parallel = true;
    }
    cfg.validate()?;

    let kb = load_kb(&args.kb, cfg.r_min)?;
    if kb.is_empty() {
        bail!(
            "knowledge base {} has no assertions with score >= {}",
            args.kb.display(),
            cfg.r_min
        );
    }
    let base = read_network(&args.base)?;
    let kb_digest = digest(&args.kb)?;
    let base_digest = digest(&args.base)?;

    let started = Instant::now();
    let outcome = run(&base, &cfg, &kb)?;
    let duration = started.elapsed();

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_file(&args.out, "stats.csv", &outcome.stats.to_csv())?;
    write_file(
        &args.out,
        "best.json",
        &(outcome.best.genome.to_json() + "\n"),
    )?;
    write_file(&args.out, "best.dot", &outcome.best.genome.to_dot("best"))?;
    write_file(
        &args.out,
        "mapping.json",
        &(outcome.mapping.report().to_json() + "\n"),
    )?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        kb: kb_digest,
        base: base_digest,
        generations_evaluated: outcome.stats.generations.len(),
        best_generation: outcome.best_generation,
        best_fitness: outcome.mapping.fitness,
        matched_relations: outcome.mapping.matched_relations(),
        duration_secs: duration.as_secs_f64(),
    };
    write_file(
        &args.out,
        "manifest.json",
        &(serde_json::to_string_pretty(&manifest)? + "\n"),
    )?;

    println!("best fitness: {}", outcome.mapping.fitness);
    println!("mapped relations: {}", outcome.mapping.matched_relations());
    println!("found in generation: {}", outcome.best_generation);
    println!("artifacts: {}", args.out.display());
    Ok(())
}

fn convert(input: &Path, output: &Path, r_min: f64) -> anyhow::Result<()> {
    let reader =
        BufReader::new(File::open(input).with_context(|| format!("opening {}", input.display()))?);
    let mut writer = BufWriter::new(
        File::create(output).with_context(|| format!("creating {}", output.display()))?,
    );
    let report = convert_conceptnet(reader, &mut writer, r_min)?;
    writer.flush()?;
    if report.rows == 0 {
        log::warn!("{} contains no rows", input.display());
    }
    eprintln!(
        "rows {}, written {}, malformed {}, below r_min {}, self-loops {}, duplicates {}",
        report.rows,
        report.written,
        report.malformed,
        report.below_threshold,
        report.self_loops,
        report.duplicates
    );
    Ok(())
}

fn match_networks(base: &Path, target: &Path) -> anyhow::Result<()> {
    let base = read_network(base)?;
    let target = read_network(target)?;
    let result = best_gmap(&base, &target, &Default::default(), &Default::default());
    writeln!(std::io::stdout().lock(), "{}", result.report().to_json())?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evolve(args) => evolve(args),
        Command::ConvertConceptnet {
            input,
            output,
            r_min,
        } => convert(&input, &output, r_min),
        Command::Match { base, target } => match_networks(&base, &target),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
