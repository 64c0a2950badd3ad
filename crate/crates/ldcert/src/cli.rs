//! Command-line front end. Every subcommand is a pure function of its flags
//! and `--seed`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::circuits::CircuitDag;
use crate::cliffordsim::Engine;
use crate::entropy::{self, EntropyParams};
use crate::game_engine::{self, CircuitGameInstance, ProtocolConfig, Transcript, Variant};
use crate::games::{self, GameDef, StabilizerGame};
use crate::grid;
use crate::seeds::{self, Seed};

#[derive(Debug, Parser)]
#[command(name = "ldcert", version, about = "Planted shallow-circuit games on a 2D grid")]
pub struct Cli {
    /// Worker threads; defaults to $LDCERT_THREADS, then all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Grid side.
    #[arg(short = 'N', long = "n", default_value_t = 32)]
    pub n: usize,
    /// Box radius; the largest feasible one by default.
    #[arg(short = 'L', long = "l")]
    pub l: Option<usize>,
    /// Number of planted instances.
    #[arg(short, long, default_value_t = 2)]
    pub r: usize,
    /// `ghz`, `magic-square`, or a game JSON file.
    #[arg(long, default_value = "ghz")]
    pub game: String,
    /// `c` in the pattern seed length `c * ceil(log2 N)^2`.
    #[arg(long, default_value_t = grid::DEFAULT_SEED_CONSTANT)]
    pub seed_constant: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TestSetArgs {
    /// Test-set probability.
    #[arg(short, long, default_value_t = 1.0)]
    pub p: f64,
    /// Tolerated loss fraction on the test set.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EntropyArgs {
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Probability of the conditioning event.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Constant of the second-order term.
    #[arg(long = "c2", default_value_t = 1.0)]
    pub c2: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Master seed: a decimal integer or 64 hex digits.
    #[arg(long, default_value = "0")]
    pub seed: String,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an input pattern from the derandomized sampler.
    SamplePattern {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Simulate the honest circuit and write the transcript.
    RunHonest {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        test: TestSetArgs,
        #[arg(long, default_value = "fast")]
        engine: Engine,
        #[command(flatten)]
        out: Output,
    },
    /// Check a transcript; exit code 1 on reject.
    Verify {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        test: TestSetArgs,
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo run of a classical circuit against the verifier.
    Adversary {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        test: TestSetArgs,
        /// Circuit JSON file.
        #[arg(long, conflicts_with = "constant")]
        adversary: Option<PathBuf>,
        /// Use the circuit writing this symbol everywhere.
        #[arg(long)]
        constant: Option<u32>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Markov threshold for bad inputs; `2 / N^2` by default.
        #[arg(long)]
        mu: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Exact classical value by enumeration.
    ClassicalValue {
        #[arg(long, default_value = "ghz")]
        game: String,
        /// Refuse strategy spaces larger than this.
        #[arg(long, default_value_t = 1 << 40)]
        cap: u128,
    },
    /// Entropy bound and randomness accounting.
    Entropy {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        test: TestSetArgs,
        #[command(flatten)]
        entropy: EntropyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Toeplitz extraction; bits in and out as hex.
    Extract {
        /// Raw bits as hex: nibbles in order, low bit first within each.
        #[arg(long)]
        raw: String,
        #[arg(long)]
        raw_bits: usize,
        /// Seed of `raw_bits + m - 1` bits, as hex (same layout as `--raw`).
        #[arg(long = "extractor-seed")]
        extractor_seed: String,
        #[arg(short, long)]
        m: usize,
        /// Claimed min-entropy of the raw bits; must be at least 2m.
        #[arg(long)]
        claimed: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assembly, circuit, verification, entropy and extraction in one report.
    FullProtocol {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        test: TestSetArgs,
        #[command(flatten)]
        entropy: EntropyArgs,
        #[arg(long, default_value = "fast")]
        engine: Engine,
        /// Run this circuit JSON instead of the honest one.
        #[arg(long)]
        adversary: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

type CmdResult = Result<ExitCode, String>;

pub fn load_game(s: &str) -> Result<StabilizerGame, String> {
    match s {
        "ghz" => Ok(games::ghz_game()),
        "magic-square" => Ok(games::magic_square_game()),
        path => {
            let text = fs::read_to_string(path).map_err(|e| format!("reading game {path}: {e}"))?;
            let def: GameDef = serde_json::from_str(&text).map_err(|e| format!("parsing game {path}: {e}"))?;
            StabilizerGame::from_def(&def).map_err(|e| format!("game {path}: {e}"))
        }
    }
}

fn parse_seed(s: &str) -> Result<Seed, String> {
    seeds::parse(s).ok_or_else(|| format!("--seed {s:?}: expected a decimal integer or 64 hex digits"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| format!("writing {}: {e}", p.display())),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
                _ => Ok(()),
            }
        }
    }
}

fn emit<T: Serialize>(out: Option<&Path>, v: &T) -> Result<(), String> {
    emit_text(out, &serde_json::to_string_pretty(v).map_err(|e| e.to_string())?)
}

fn instance(grid: &GridArgs, test: &TestSetArgs) -> Result<CircuitGameInstance, String> {
    let game = load_game(&grid.game)?;
    let fixed = game.support[0].x.clone();
    let variant = Variant::Randomness { p: test.p, gamma: test.gamma, fixed_query: fixed };
    let mut inst = CircuitGameInstance::new(game, grid.n, grid.l, grid.r, variant).map_err(|e| e.to_string())?;
    inst.seed_constant = grid.seed_constant;
    Ok(inst)
}

fn protocol_config(grid: &GridArgs, test: &TestSetArgs, ent: &EntropyArgs, engine: Engine) -> ProtocolConfig {
    ProtocolConfig {
        n: grid.n,
        l: grid.l,
        r: grid.r,
        p: test.p,
        gamma: test.gamma,
        eps: ent.eps,
        c2: ent.c2,
        success_prob_floor: ent.delta,
        seed_constant: grid.seed_constant,
        engine,
    }
}

fn entropy_params(r: usize, test: &TestSetArgs, ent: &EntropyArgs) -> EntropyParams {
    EntropyParams { r, p: test.p, gamma: test.gamma, eps: ent.eps, success_prob_floor: ent.delta, c2: ent.c2 }
}

pub fn execute(cli: Cli) -> CmdResult {
    let threads = cli.threads.or_else(|| std::env::var("LDCERT_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::SamplePattern { grid, out } => {
            let game = load_game(&grid.game)?;
            let master = parse_seed(&out.seed)?;
            let l = match grid.l {
                Some(l) => l,
                None => grid::SamplerLayout::max_l(grid.n, grid.r, game.ell).ok_or("no box radius fits these parameters")?,
            };
            let bits = grid::pattern_seed_bits(grid.n, grid.seed_constant);
            let seed: Vec<u8> = (0..bits.div_ceil(256)).flat_map(|c| seeds::derive(&master, "pattern", c as u64)).collect();
            let pattern = grid::sample_pattern_derandomized(grid.n, l, grid.r, game.ell, &seed, grid.seed_constant).map_err(|e| e.to_string())?;
            emit(out.out.as_deref(), &pattern)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::RunHonest { grid, test, engine, out } => {
            let inst = instance(&grid, &test)?;
            let master = parse_seed(&out.seed)?;
            let asm = game_engine::assemble_input(&inst, &master).map_err(|e| e.to_string())?;
            let output = game_engine::run_honest_transcript(&inst, &asm, &master, engine).map_err(|e| e.to_string())?;
            let t = Transcript { input_grid: asm.input_grid, output_grid: output, seed: seeds::to_hex(&master), engine };
            emit(out.out.as_deref(), &t)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { grid, test, transcript, out } => {
            let inst = instance(&grid, &test)?;
            let t: Transcript = read_json(&transcript)?;
            let master = parse_seed(&t.seed)?;
            let asm = game_engine::assemble_input(&inst, &master).map_err(|e| e.to_string())?;
            let mut verdict = if t.input_grid != asm.input_grid {
                let mut v = game_engine::verify(&inst, &asm, &[]);
                v.reason = Some("input grid does not match the seed and parameters".into());
                v
            } else {
                game_engine::verify(&inst, &asm, &t.output_grid)
            };
            // Timing is the only run-dependent field; keep reports reproducible.
            verdict.wall_time_us = 0;
            emit(out.as_deref(), &verdict)?;
            Ok(if verdict.accept { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Adversary { grid, test, adversary, constant, trials, mu, out } => {
            let inst = instance(&grid, &test)?;
            let master = parse_seed(&out.seed)?;
            let circuit: CircuitDag = match (adversary, constant) {
                (Some(p), _) => read_json(&p)?,
                (None, Some(s)) => game_engine::constant_circuit(grid.n, inst.sigma.width, s),
                (None, None) => return Err("give --adversary FILE or --constant SYMBOL".into()),
            };
            let mu = mu.unwrap_or(2.0 / (grid.n * grid.n) as f64);
            let rep = game_engine::run_adversary_experiment(&inst, &circuit, trials, mu, &master).map_err(|e| e.to_string())?;
            emit(out.out.as_deref(), &rep)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ClassicalValue { game, cap } => {
            let g = load_game(&game)?;
            let v = g.classical_value_bruteforce(cap).map_err(|e| e.to_string())?;
            println!("{}", games::format_rational(&v));
            Ok(ExitCode::SUCCESS)
        }
        Command::Entropy { grid, test, entropy: ent, out } => {
            let game = load_game(&grid.game)?;
            let ledger = game_engine::planned_ledger(&game, grid.n, grid.r, test.p, grid.seed_constant);
            let raw = grid.r * game.m.iter().sum::<usize>();
            let rep = entropy::expansion_report(&ledger, &entropy_params(grid.r, &test, &ent), raw).map_err(|e| e.to_string())?;
            emit(out.as_deref(), &rep)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Extract { raw, raw_bits, extractor_seed, m, claimed, out } => {
            let raw = entropy::hex_to_bits(&raw, raw_bits).ok_or("--raw: not a hex string of --raw-bits bits")?;
            let need = entropy::toeplitz_seed_bits(raw_bits, m) as usize;
            let seed = entropy::hex_to_bits(&extractor_seed, need).ok_or(format!("--extractor-seed: need {need} bits of hex"))?;
            let bits = entropy::extract(&raw, &seed, m, claimed).map_err(|e| e.to_string())?;
            emit_text(out.as_deref(), &entropy::bits_to_hex(&bits))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FullProtocol { grid, test, entropy: ent, engine, adversary, out } => {
            let game = load_game(&grid.game)?;
            let master = parse_seed(&out.seed)?;
            let circuit: Option<CircuitDag> = adversary.as_deref().map(read_json).transpose()?;
            let cfg = protocol_config(&grid, &test, &ent, engine);
            let mut rep = game_engine::full_protocol(&game, &cfg, circuit.as_ref(), &master).map_err(|e| e.to_string())?;
            rep.verdict.wall_time_us = 0;
            emit(out.out.as_deref(), &rep)?;
            Ok(if rep.verdict.accept { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

/// Parses the process arguments and runs; exit 2 on configuration errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
