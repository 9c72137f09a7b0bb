use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lexfoundry::pipeline::{Pipeline, RunConfig, StageSummary, Task};
use lexfoundry::synth::{write_fixture, LabeledConfig, MarketConfig};
use lexfoundry::taxonomy::Dictionary;
use lexfoundry::{par, Error, Result};

#[derive(Parser)]
#[command(name = "lexfoundry", version, about = "Build review dictionaries and measure their adoption")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Single-threaded execution.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest, filter and tokenize the review files.
    Clean,
    /// Induce seed lexicons from the labeled sentences.
    Induce,
    /// Train (or load) word embeddings.
    Embed,
    /// Expand the seed lexicons through the embeddings.
    Expand,
    /// Cluster the expanded lexicons into a dictionary.
    Cluster,
    /// Run analyses over the cleaned corpus (all when none are named).
    Analyze {
        /// temporal, nullmodel, confounds, roomtype, segments, neighbourhoods, tfgain
        tasks: Vec<String>,
    },
    /// Labeled-set and room-type checks of the dictionary.
    ValidateDictionary,
    /// Every stage in order.
    Run,
    /// Write a synthetic project (data files and config.toml).
    Synth {
        /// Target directory.
        dir: PathBuf,
        #[arg(long, default_value_t = 150)]
        hosts: usize,
        #[arg(long, default_value_t = 200)]
        sentences: usize,
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
    },
}

fn load_config(g: &Global) -> Result<RunConfig> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = &g.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn report(s: &StageSummary) {
    println!("{}", s.stage.name());
    for f in &s.outputs {
        println!("  {}  {}", &f.sha256[..12], f.path.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if g.deterministic {
        par::force_sequential(true);
    } else if let Some(n) = g.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        par::set_threads(n);
    }

    if let Command::Synth {
        dir,
        hosts,
        sentences,
        noise,
    } = &cli.command
    {
        let mut market = MarketConfig {
            hosts_per_city: *hosts,
            noise_rate: *noise,
            ..Default::default()
        };
        if let Some(s) = g.seed {
            market.seed = s;
        }
        let labeled = LabeledConfig {
            n_sentences: *sentences,
            ..Default::default()
        };
        write_fixture(dir, &market, &labeled, &Dictionary::reference())?;
        println!("{}", dir.join("config.toml").display());
        return Ok(());
    }

    let mut p = Pipeline::new(load_config(g)?)?;
    let summaries = match &cli.command {
        Command::Clean => vec![p.clean()?],
        Command::Induce => vec![p.induce()?],
        Command::Embed => vec![p.embed()?],
        Command::Expand => vec![p.expand()?],
        Command::Cluster => vec![p.cluster()?],
        Command::Analyze { tasks } => {
            let tasks = if tasks.is_empty() {
                p.config().analysis.tasks.clone()
            } else {
                tasks.iter().map(|t| t.parse()).collect::<Result<Vec<Task>>>()?
            };
            vec![p.analyze(&tasks)?]
        }
        Command::ValidateDictionary => vec![p.validate_dictionary()?],
        Command::Run => p.run_all()?,
        Command::Synth { .. } => unreachable!(),
    };
    summaries.iter().for_each(report);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LEXFOUNDRY_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
