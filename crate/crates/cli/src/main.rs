use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rpldpc::decoder::lifted_diversity_check;
use rpldpc::harness::config::{parse_count, parse_grid};
use rpldpc::harness::report::{self, Row};
use rpldpc::harness::{
    build_code, estimate_diversity_order, hash_text, load_code, run_wer_sweep_with, BuildOptions,
    CodeSource, SweepConfig, SweepError, SweepScenario,
};
use rpldpc::outage::{outage, InputModel, OutageQuery, Scenario};
use rpldpc::protograph::protograph_diversity_check;
use rpldpc::{builtin, Fading, Rate};

#[derive(Parser)]
#[command(name = "rpldpc", version, about = "Root-protograph LDPC codes for block-fading and relay channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lift a builtin protograph and write the QC code file.
    Build(BuildArgs),
    /// Run a word-error-rate sweep.
    Simulate(SimulateArgs),
    /// Monte-Carlo outage probability.
    Outage(OutageArgs),
    /// Post-process result files.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Structural checks on a code.
    #[command(subcommand)]
    Check(CheckCommand),
}

#[derive(Args)]
struct BuildArgs {
    /// Builtin name: rp_a, rcrp_a, rp_b, rcrp_b, rcrp_c or reg36.
    name: String,
    #[arg(long, default_value_t = 384)]
    z: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Lift seeds to try.
    #[arg(long, default_value_t = 32)]
    attempts: usize,
    /// Reject lifts with shorter cycles.
    #[arg(long, default_value_t = 6)]
    min_girth: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    P2p,
    Cc,
}

#[derive(Args)]
struct SimulateArgs {
    mode: Mode,
    /// QC code file; overrides the config's code.
    #[arg(long)]
    code: Option<PathBuf>,
    /// Sweep config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// SNR grid, `start:step:stop` or a comma list.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    max_words: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutageScenario {
    P2p,
    DistributedCc,
    MrcCc,
}

#[derive(Clone, Copy, ValueEnum)]
enum FadingArg {
    Nakagami,
    Rayleigh,
    Awgn,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputArg {
    Bpsk,
    Gaussian,
}

#[derive(Args)]
struct OutageArgs {
    #[arg(long, value_enum, default_value = "p2p")]
    scenario: OutageScenario,
    /// Fading blocks (p2p) or relays (relay scenarios).
    #[arg(long, default_value_t = 2)]
    blocks: usize,
    /// Code rate as a fraction, e.g. 1/2.
    #[arg(long, default_value = "1/2")]
    rate: String,
    #[arg(long, value_enum, default_value = "nakagami")]
    fading: FadingArg,
    #[arg(long, default_value_t = 1.5)]
    m: f64,
    #[arg(long, default_value = "0:2.5:40")]
    snr: String,
    #[arg(long, default_value = "1000000", value_parser = parse_count)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "bpsk")]
    input: InputArg,
    /// Relay decoding threshold in bits per use.
    #[arg(long)]
    broadcast_rate: Option<f64>,
    /// Error-free source-relay links.
    #[arg(long)]
    perfect_relays: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Diversity order from the high-SNR slope of a result file.
    Slope {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        tail: usize,
        /// Row kind to fit.
        #[arg(long, default_value = "wer")]
        kind: String,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Protograph and lifted erasure diversity tests.
    Diversity {
        #[arg(long)]
        code: PathBuf,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn config(msg: impl ToString) -> Self {
        Self { code: 2, msg: msg.to_string() }
    }
    fn build(msg: impl ToString) -> Self {
        Self { code: 3, msg: msg.to_string() }
    }
    fn other(msg: impl ToString) -> Self {
        Self { code: 1, msg: msg.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Outage(a) => cmd_outage(a),
        Command::Analyze(AnalyzeCommand::Slope { file, tail, kind }) => cmd_slope(&file, tail, &kind),
        Command::Check(CheckCommand::Diversity { code }) => cmd_diversity(&code),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_build(a: BuildArgs) -> Result<(), Failure> {
    let spec = builtin(&a.name).map_err(Failure::config)?;
    let opts = BuildOptions {
        attempts: a.attempts,
        min_girth: a.min_girth,
        ..BuildOptions::new(a.z, a.seed)
    };
    let built = build_code(&spec, &opts).map_err(Failure::build)?;
    std::fs::write(&a.output, built.code.to_text()).map_err(|e| Failure::other(format!("{}: {e}", a.output.display())))?;
    let girth = built.code.girth().map_or("none".to_string(), |g| g.to_string());
    println!(
        "{}: n={} m={} z={} girth={} lift_seed={} attempts={} payload={} dependent_info_bits={} relay_ready={}",
        a.name,
        built.code.n(),
        built.code.m(),
        built.code.z(),
        girth,
        built.lift_seed,
        built.attempts,
        built.encoder.k(),
        built.encoder.dependent_info_bits(),
        built.coop.is_some()
    );
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
            SweepConfig::parse(&text).map_err(Failure::config)?
        }
        None => SweepConfig::default(),
    };
    if let Some(p) = &a.code {
        cfg.code = CodeSource::File(p.clone());
    }
    if let Some(g) = &a.snr {
        cfg.snr_db = parse_grid(g).map_err(Failure::config)?;
    }
    if let Some(v) = a.min_errors {
        cfg.min_word_errors = v;
    }
    if let Some(v) = a.max_words {
        cfg.max_words = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    let built = match &cfg.code {
        CodeSource::File(p) => load_code(p).map_err(Failure::build)?,
        CodeSource::Builtin(name) => {
            let spec = builtin(name).map_err(Failure::config)?;
            build_code(&spec, &BuildOptions::new(cfg.z, cfg.lift_seed)).map_err(Failure::build)?
        }
    };
    match (a.mode, cfg.scenario) {
        (Mode::P2p, _) => cfg.scenario = SweepScenario::P2p,
        (Mode::Cc, SweepScenario::P2p) => {
            cfg.scenario = SweepScenario::DistributedCc {
                relays: built.code.num_blocks().saturating_sub(1),
            }
        }
        (Mode::Cc, _) => {}
    }
    cfg.validate().map_err(Failure::config)?;
    let hash = cfg.config_hash();
    let file = File::create(&a.output).map_err(|e| Failure::other(format!("{}: {e}", a.output.display())))?;
    let mut out = report::RowWriter::new(BufWriter::new(file)).map_err(Failure::other)?;
    let mut write_err = None;
    run_wer_sweep_with(&cfg, &built, |p| {
        eprintln!(
            "snr {:>6.2} dB  words {:>10}  errors {:>5}  wer {:.3e}",
            p.snr_db, p.words, p.word_errors, p.wer
        );
        if let Err(e) = out.push(&report::wer_rows(p, &hash)) {
            write_err.get_or_insert(e);
        }
    })
    .map_err(|e| match e {
        SweepError::Config(e) => Failure::config(e),
        SweepError::Coop(e) => Failure::config(e),
        other => Failure::other(other),
    })?;
    match write_err {
        Some(e) => Err(Failure::other(e)),
        None => Ok(()),
    }
}

fn cmd_outage(a: OutageArgs) -> Result<(), Failure> {
    let rate: Rate = a.rate.parse().map_err(|e| Failure::config(format!("rate `{}`: {e}", a.rate)))?;
    let scenario = match a.scenario {
        OutageScenario::P2p => Scenario::P2p { blocks: a.blocks },
        OutageScenario::DistributedCc => Scenario::DistributedCc { relays: a.blocks },
        OutageScenario::MrcCc => Scenario::MrcCc { relays: a.blocks },
    };
    let fading = match a.fading {
        FadingArg::Nakagami => Fading::nakagami(a.m).map_err(Failure::config)?,
        FadingArg::Rayleigh => Fading::Rayleigh,
        FadingArg::Awgn => Fading::AwgnOnly,
    };
    let snr_db = parse_grid(&a.snr).map_err(Failure::config)?;
    let mut q = OutageQuery::new(scenario, rate, fading, snr_db);
    q.samples = a.samples as usize;
    q.seed = a.seed;
    q.input = match a.input {
        InputArg::Bpsk => InputModel::Bpsk,
        InputArg::Gaussian => InputModel::Gaussian,
    };
    q.broadcast_rate = a.broadcast_rate;
    q.perfect_source_relay = a.perfect_relays;
    let hash = hash_text(&format!("{q:?}"));
    let points = outage(&q).map_err(Failure::config)?;
    let rows: Vec<Row> = points.iter().map(|p| report::outage_row(p, q.seed, &hash)).collect();
    for p in &points {
        eprintln!("snr {:>6.2} dB  p_out {:.3e} ± {:.1e}", p.snr_db, p.p_out, p.ci);
    }
    write_csv(&a.output, &rows)
}

fn cmd_slope(file: &Path, tail: usize, kind: &str) -> Result<(), Failure> {
    let f = File::open(file).map_err(|e| Failure::config(format!("{}: {e}", file.display())))?;
    let rows = report::read_rows(f).map_err(Failure::config)?;
    let curve = report::curve(&rows, kind);
    let fit = estimate_diversity_order(&curve, tail).map_err(Failure::other)?;
    println!(
        "kind={kind} points={} slope={:.3} stderr={:.3} diversity={:.3}",
        fit.points_used, fit.slope, fit.stderr, fit.diversity
    );
    Ok(())
}

fn cmd_diversity(path: &Path) -> Result<(), Failure> {
    let built = load_code(path).map_err(Failure::build)?;
    let proto = protograph_diversity_check(built.code.spec());
    let lifted = lifted_diversity_check(&built.code);
    println!("protograph full diversity: {}", proto.full_diversity);
    for (b, ok) in proto.recovered_from_block.iter().enumerate() {
        println!("  block {b} alone recovers the information: {ok}");
    }
    println!("lifted single-block erasures resolved: {:?}", lifted.single_erasure);
    println!("lifted keep-one-block resolved: {:?}", lifted.keep_one);
    println!("lifted full diversity: {}", lifted.full_diversity());
    if proto.full_diversity && lifted.full_diversity() {
        Ok(())
    } else {
        Err(Failure::other("code is not full diversity"))
    }
}

fn write_csv(path: &Path, rows: &[Row]) -> Result<(), Failure> {
    let f = File::create(path).map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    report::write_rows(&mut w, rows).map_err(Failure::other)?;
    w.flush().map_err(Failure::other)
}
