//! The `coedit` command line.
//!
//! Exit status: 0 on success, 1 on usage errors (synopsis on stderr), 2 on
//! data errors. Machine-readable output goes to stdout or `--out`; logs go
//! to stderr.

use crate::config::{ConfigError, RunConfig};
use crate::context::{load_tokenizer, Tokenizer};
use crate::edit::{enc_input, enc_output, split_lines, line_diff};
use crate::instance::{read_instances, write_instances, ProblemInstance};
use crate::metrics::{keystroke_cost, levenshtein, lines_cost, KeystrokeParams};
use crate::miner::{
    dataset_stats, discover_repositories, make_completion_instances, mine_repository, synthesize_multiround,
    DatasetStats, MineOptions, MinedRepo,
};
use crate::sim::{self, EchoOracle, NullOracle, Oracle, Predictor, ProtocolClient, Report, TruthOracle};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::ffi::OsString;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Parser)]
#[command(name = "coedit", version, about = "Mine, encode and evaluate multi-round code edits")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// vocab.json (with merges.txt beside it) or a directory holding both.
    #[arg(long, global = true)]
    pub tokenizer: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine problem instances from git histories.
    Mine {
        /// Repositories, or directories whose subdirectories are repositories.
        #[arg(long, required = true, num_args = 1..)]
        repos: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        max_commits: Option<usize>,
        /// Also write dataset statistics here.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Derive multi-round or one-line completion instances.
    Instances {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        kind: InstanceKind,
    },
    /// Encode the edit between two versions of a unit.
    Encode {
        #[arg(long)]
        before: PathBuf,
        #[arg(long)]
        after: PathBuf,
    },
    /// Run the multi-round editing simulation.
    Simulate {
        #[arg(long)]
        instances: PathBuf,
        /// null | truth | echo | cmd:<command line> | tcp:<host:port>
        #[arg(long)]
        oracle: String,
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Per-request oracle timeout in seconds.
        #[arg(long)]
        timeout: Option<f64>,
    },
    /// Dataset statistics of an instance file.
    Stats {
        #[arg(long)]
        instances: PathBuf,
        /// Write JSON here and print a table; without it JSON goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Editing cost between two files.
    Metric {
        #[arg(long, value_enum)]
        kind: MetricKind,
        #[arg(long)]
        before: PathBuf,
        #[arg(long)]
        after: PathBuf,
        #[arg(long)]
        jump: Option<u32>,
        #[arg(long)]
        init: Option<u32>,
    },
    /// Serve a built-in oracle over the oracle protocol (stdio or TCP).
    ServeOracle {
        #[arg(long, value_enum, default_value = "echo")]
        oracle: ServedOracle,
        /// Listen on this address instead of standard streams.
        #[arg(long)]
        listen: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InstanceKind {
    Multiround,
    Completion,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricKind {
    Lines,
    Lev,
    Keys,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ServedOracle {
    Null,
    Echo,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Invalid(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let _ = e.print();
                    eprintln!("\n{}", synopsis());
                    1
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", synopsis());
            1
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

pub fn synopsis() -> String {
    "usage: coedit [--config FILE] [--jobs N] [--seed N] [--tokenizer PATH] <command>\n\
     \n\
     commands:\n\
     \x20 mine       --repos DIR... --out FILE [--max-commits 1000] [--stats FILE]\n\
     \x20 instances  --input FILE --out FILE --kind {multiround|completion}\n\
     \x20 encode     --before FILE --after FILE\n\
     \x20 simulate   --instances FILE --oracle {null|truth|echo|cmd:<argv>|tcp:<addr>} [--max-rounds 6] --out FILE\n\
     \x20 stats      --instances FILE [--out FILE]\n\
     \x20 metric     --kind {lines|lev|keys} --before FILE --after FILE [--jump 4] [--init 4]\n\
     \x20 serve-oracle [--oracle {null|echo}] [--listen ADDR]"
        .to_string()
}

fn load_config(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut config = match &global.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    }
    .with_env();
    if let Some(j) = global.jobs {
        config.jobs = Some(j);
    }
    if let Some(s) = global.seed {
        config.seed = s;
    }
    if let Some(t) = &global.tokenizer {
        config.tokenizer = Some(t.clone());
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = load_config(&cli.global)?;
    match &cli.command {
        Command::Mine { max_commits: Some(n), .. } => config.max_commits = *n,
        Command::Simulate { max_rounds, timeout, .. } => {
            if let Some(r) = max_rounds {
                config.max_rounds = *r;
            }
            if let Some(t) = timeout {
                config.oracle_timeout_secs = *t;
            }
        }
        Command::Metric { jump, init, .. } => {
            if let Some(j) = jump {
                config.keystrokes.cursor_jump_cost = *j;
            }
            if let Some(i) = init {
                config.keystrokes.init_cursor_dis = *i;
            }
        }
        _ => {}
    }
    config.validate()?;
    if let Some(jobs) = config.jobs {
        // fails only if a pool already exists, e.g. on repeated calls in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match cli.command {
        Command::Mine { repos, out, stats, .. } => mine(&config, &repos, &out, stats.as_deref()),
        Command::Instances { input, out, kind } => instances(&config, &input, &out, kind),
        Command::Encode { before, after } => encode(&before, &after),
        Command::Simulate {
            instances, oracle, out, ..
        } => simulate(&config, &instances, &oracle, &out),
        Command::Stats { instances, out } => stats(&config, &instances, out.as_deref()),
        Command::Metric { kind, before, after, .. } => metric(config.keystrokes, kind, &before, &after),
        Command::ServeOracle { oracle, listen } => serve_oracle(oracle, listen.as_deref()),
    }
}

fn tokenizer(config: &RunConfig) -> Result<Arc<dyn Tokenizer>, CliError> {
    load_tokenizer(config.tokenizer.as_deref()).map_err(data)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn load_instances(path: &Path) -> Result<Vec<ProblemInstance>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    read_instances(BufReader::new(file)).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>, CliError> {
    std::fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| data(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(data)?;
    writeln!(w).and_then(|_| w.flush()).map_err(data)
}

fn stdout_line(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(data)
}

fn mine(config: &RunConfig, roots: &[PathBuf], out: &Path, stats_out: Option<&Path>) -> Result<(), CliError> {
    let mut repos = Vec::new();
    for root in roots {
        repos.extend(discover_repositories(root).map_err(data)?);
    }
    if repos.is_empty() {
        return Err(data("no git repositories found"));
    }
    let options = MineOptions {
        max_commits: config.max_commits,
    };
    let mined: Vec<MinedRepo> = repos
        .par_iter()
        .map(|r| {
            log::info!("mining {}", r.display());
            mine_repository(r, options)
        })
        .collect::<Result<_, _>>()
        .map_err(data)?;
    let instances: Vec<ProblemInstance> = mined.iter().flat_map(|r| r.instances().cloned()).collect();
    let mut w = create(out)?;
    write_instances(&mut w, &instances).and_then(|_| w.flush()).map_err(data)?;
    let tok = tokenizer(config)?;
    let s = dataset_stats(&instances, tok.as_ref()).with_mining(&mined);
    if let Some(path) = stats_out {
        write_json(path, &s)?;
    }
    stdout_line(&stats_table(&s))
}

fn instances(config: &RunConfig, input: &Path, out: &Path, kind: InstanceKind) -> Result<(), CliError> {
    let source = load_instances(input)?;
    let mut w = create(out)?;
    let written = match kind {
        InstanceKind::Multiround => {
            let derived: Vec<ProblemInstance> = source
                .iter()
                .enumerate()
                .filter_map(|(i, inst)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream(i as u64);
                    synthesize_multiround(inst, &mut rng)
                        .map_err(|e| log::info!("instance {i} skipped: {e}"))
                        .ok()
                })
                .collect();
            write_instances(&mut w, &derived).map_err(data)?;
            derived.len()
        }
        InstanceKind::Completion => {
            let derived = make_completion_instances(&source);
            for c in &derived {
                serde_json::to_writer(&mut w, &c.to_record()).map_err(data)?;
                writeln!(w).map_err(data)?;
            }
            derived.len()
        }
    };
    w.flush().map_err(data)?;
    stdout_line(&format!("{written} of {} instances written to {}", source.len(), out.display()))
}

fn encode(before: &Path, after: &Path) -> Result<(), CliError> {
    let (b, a) = (split_lines(&read_text(before)?), split_lines(&read_text(after)?));
    let inst = ProblemInstance::from_texts(&b, &a);
    let diff = line_diff(&b, &a);
    let value = serde_json::json!({
        "query": enc_input(&inst.query, inst.region).map_err(data)?.render(),
        "region": inst.region,
        "output": enc_output(&inst.ground_truth, inst.region).render(),
        "changed_lines": lines_cost(&diff),
    });
    stdout_line(&serde_json::to_string_pretty(&value).map_err(data)?)
}

fn simulate(config: &RunConfig, path: &Path, oracle_name: &str, out: &Path) -> Result<(), CliError> {
    let source = load_instances(path)?;
    let tok = tokenizer(config)?;
    let oracle: Box<dyn Oracle> = match oracle_name {
        "null" => Box::new(NullOracle),
        "truth" => Box::new(TruthOracle),
        "echo" => Box::new(EchoOracle),
        s if s.starts_with("cmd:") => Box::new(ProtocolClient::spawn(&s[4..], config.oracle_timeout()).map_err(data)?),
        s if s.starts_with("tcp:") => Box::new(ProtocolClient::connect(&s[4..], config.oracle_timeout()).map_err(data)?),
        other => return Err(CliError::Usage(format!("unknown oracle {other:?}"))),
    };
    let report = sim::simulate(&source, oracle.as_ref(), tok.as_ref(), &config.sim(), oracle_name);
    write_json(out, &report)?;
    stdout_line(&report_table(&report))
}

fn stats(config: &RunConfig, path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let source = load_instances(path)?;
    let tok = tokenizer(config)?;
    let s = dataset_stats(&source, tok.as_ref());
    match out {
        Some(p) => {
            write_json(p, &s)?;
            stdout_line(&stats_table(&s))
        }
        None => stdout_line(&serde_json::to_string_pretty(&s).map_err(data)?),
    }
}

fn metric(params: KeystrokeParams, kind: MetricKind, before: &Path, after: &Path) -> Result<(), CliError> {
    let (b, a) = (read_text(before)?, read_text(after)?);
    let cost = match kind {
        MetricKind::Lines => lines_cost(&line_diff(&split_lines(&b), &split_lines(&a))),
        MetricKind::Lev => levenshtein(&b, &a),
        MetricKind::Keys => u64::from(keystroke_cost(&b, &a, params)),
    };
    stdout_line(&cost.to_string())
}

fn serve_oracle(which: ServedOracle, listen: Option<&str>) -> Result<(), CliError> {
    let predictor: Arc<dyn Predictor> = match which {
        ServedOracle::Null => Arc::new(NullOracle),
        ServedOracle::Echo => Arc::new(EchoOracle),
    };
    match listen {
        Some(addr) => {
            let listener = std::net::TcpListener::bind(addr).map_err(|e| data(format!("{addr}: {e}")))?;
            eprintln!("listening on {}", listener.local_addr().map_err(data)?);
            sim::serve_tcp(predictor, listener).map_err(data)
        }
        None => {
            let stdin = std::io::stdin().lock();
            let stdout = std::io::stdout().lock();
            sim::serve(predictor.as_ref(), stdin, stdout).map_err(data)
        }
    }
}

fn stats_table(s: &DatasetStats) -> String {
    let c = &s.counts;
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
    let mut t = String::new();
    t += &format!("{:<20}{:>10}\n", "projects", c.projects);
    t += &format!("{:<20}{:>10}\n", "used commits", c.commits);
    t += &format!("{:<20}{:>10}\n", "modified files", c.modified_files);
    t += &format!("{:<20}{:>10}\n", "modified functions", c.modified_functions);
    t += &format!("{:<20}{:>10}\n", "modified units", c.modified_units);
    t += &format!("{:<20}{:>10}\n", "modified lines", c.modified_lines);
    t += &format!("{:<20}{:>10}\n", "added units", opt(c.added_units));
    t += &format!("{:<20}{:>10}\n\n", "deleted units", opt(c.deleted_units));
    t += &format!("{:<20}{:>10}{:>10}{:>8}{:>8}\n", "tokens", "median", "mean", "max", ">=cap");
    for (name, d) in [
        ("query", &s.query_tokens),
        ("output", &s.output_tokens),
        ("prev change", &s.prev_change_tokens),
        ("signature", &s.signature_tokens),
    ] {
        t += &format!(
            "{:<20}{:>10.1}{:>10.1}{:>8}{:>7.1}%\n",
            name,
            d.median,
            d.mean,
            d.max,
            100.0 * d.at_cap
        );
    }
    t.trim_end().to_string()
}

fn report_table(r: &Report) -> String {
    let s = &r.summary;
    let row = |name: &str, g: &sim::GainSummary, rounds: String| {
        format!(
            "{:<12}{:>10.1}{:>13.1}{:>13.1}{:>8}",
            name, g.lines, g.levenshtein, g.keystrokes, rounds
        )
    };
    [
        format!("oracle {} on {} episodes ({} skipped)", r.oracle, s.episodes, r.skipped.len()),
        format!("{:<12}{:>10}{:>13}{:>13}{:>8}", "setting", "lines %", "levenshtein %", "keystrokes %", "rounds"),
        row("single", &s.single_round, "1".into()),
        row("multi", &s.multi_round, format!("{:.2}", s.mean_rounds)),
    ]
    .join("\n")
}
