use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pinninglab::acceptance::{run_criterion, Mutation, SuiteOptions};
use pinninglab::{run, ExperimentConfig, LabError};

#[derive(Parser)]
#[command(
    name = "pinninglab",
    version,
    about = "Batch experiments for disordered pinning models"
)]
struct Cli {
    /// Overrides the seed of the config (or of the suite).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs one experiment config and writes its record and CSV tables.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the acceptance suite. Reads `suite.json` from the directory if
    /// present and writes the summary there.
    Acceptance {
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
        /// Negative control: corrupt part of the pipeline on purpose.
        #[arg(long, value_enum, hide = true)]
        mutate: Option<MutateArg>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum MutateArg {
    Overlap,
}

fn run_command(config: &Path, out: &Path, seed: Option<u64>, threads: usize) -> Result<bool, LabError> {
    let mut cfg = ExperimentConfig::load(config)?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    let result = run(&cfg, threads)?;
    let dir = cfg.output.as_ref().map_or_else(|| out.to_path_buf(), |o| out.join(o));
    for path in result.write(&dir)? {
        println!("wrote {}", path.display());
    }
    for (name, ok) in &result.record.flags {
        println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    Ok(result.record.passed())
}

fn acceptance_command(
    dir: &Path,
    only: Option<Vec<u8>>,
    mutate: Option<MutateArg>,
    seed: Option<u64>,
    threads: usize,
) -> Result<bool, LabError> {
    let suite_file = dir.join("suite.json");
    let mut opts: SuiteOptions = if suite_file.exists() {
        serde_json::from_str(&std::fs::read_to_string(&suite_file)?)
            .map_err(|e| LabError::Config(format!("{}: {e}", suite_file.display())))?
    } else {
        SuiteOptions::default()
    };
    if let Some(s) = seed {
        opts.seed = s;
    }
    opts.threads = threads;
    if only.is_some() {
        opts.criteria = only;
    }
    if let Some(MutateArg::Overlap) = mutate {
        opts.mutation = Some(Mutation::OverlapNormalization);
    }
    std::fs::create_dir_all(dir)?;
    let mut summary = csv::Writer::from_path(dir.join("acceptance.csv"))?;
    summary.write_record(["criterion", "title", "pass", "wall_time_s", "time_limit_s", "measured"])?;
    let mut all = true;
    for id in opts.criteria.clone().unwrap_or_else(|| (1..=15).collect()) {
        let r = run_criterion(id, &opts);
        println!("{}", r.line());
        all &= r.pass;
        summary.write_record([
            r.id.to_string(),
            r.title.to_string(),
            r.pass.to_string(),
            format!("{:.3}", r.wall_time_s),
            r.time_limit_s.to_string(),
            r.measured.clone(),
        ])?;
        summary.flush()?;
    }
    println!("{}", if all { "all criteria PASS" } else { "some criteria FAIL" });
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run_command(&config, &out, cli.seed, cli.threads),
        Command::Acceptance { dir, only, mutate } => acceptance_command(&dir, only, mutate, cli.seed, cli.threads),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
