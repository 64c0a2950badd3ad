//! The circuit game: input assembly and encoding, the verifier, adversary
//! experiments and the end-to-end protocol.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{reduce_to_players, CircuitDag, CircuitError};
use crate::cliffordsim::{self, build_honest_circuit, Engine, InstanceOutcome, SimError};
use crate::entropy::{self, EntropyError, EntropyParams, ExpansionReport, RandomnessLedger};
use crate::games::{Answers, DerandomizedRepetitionSpec, GameError, Query, RotatedAnswer, StabilizerGame, StretchSpec};
use crate::grid::{self, GridError, GridPoint, InputPattern, SamplerLayout};
use crate::pauli::PauliLabel;
use crate::seeds::{self, Seed};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Variant {
    /// Every instance must win.
    Plain,
    /// A `p`-random test set must win on a `1 - gamma` fraction; the other
    /// instances get the fixed query.
    Randomness { p: f64, gamma: f64, fixed_query: Query },
}

/// Symbol alphabet of width `2 m k ceil(log2 d)` bits.
///
/// Inputs put a tag in the top bit: tag 1 carries a question in the low
/// bits, tag 0 with low bits 1 marks a path vertex, 0 is blank. Outputs at a
/// path vertex hold `(x, z)` per slot at bits `2s` and `2s + 1` (each
/// `ceil(log2 d)` wide); at an input location they hold the answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sigma {
    pub width: u32,
    pub digit: u32,
    pub d: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSymbol {
    Blank,
    Marker,
    Question(usize),
}

impl Sigma {
    pub fn for_game(game: &StabilizerGame) -> Result<Self, EngineError> {
        let k = *game.k.iter().max().unwrap_or(&1) as u32;
        let m = *game.m.iter().max().unwrap_or(&1) as u32;
        let digit = u32::BITS - (game.d - 1).leading_zeros();
        let width = 2 * m * k * digit;
        let questions = game.questions.iter().map(|q| q.len()).max().unwrap_or(0) as u64;
        if width < 2 || width > 31 || questions > 1u64 << (width - 1) {
            return Err(EngineError::Config(format!("alphabet of {width} bits cannot carry {questions} questions")));
        }
        Ok(Sigma { width, digit, d: game.d })
    }

    fn tag(&self) -> u32 {
        1 << (self.width - 1)
    }

    pub fn marker(&self) -> u32 {
        1
    }

    pub fn question(&self, x: usize) -> u32 {
        self.tag() | x as u32
    }

    pub fn decode_input(&self, s: u32) -> Option<InputSymbol> {
        if s >> self.width != 0 {
            None
        } else if s & self.tag() != 0 {
            Some(InputSymbol::Question((s & !self.tag()) as usize))
        } else {
            match s {
                0 => Some(InputSymbol::Blank),
                1 => Some(InputSymbol::Marker),
                _ => None,
            }
        }
    }

    fn mask(&self) -> u32 {
        (1 << self.digit) - 1
    }

    pub fn encode_bell(&self, outcomes: &[(bool, bool)]) -> u32 {
        outcomes.iter().enumerate().fold(0, |acc, (s, &(x, z))| {
            acc | (x as u32) << (2 * s as u32 * self.digit) | (z as u32) << ((2 * s as u32 + 1) * self.digit)
        })
    }

    /// `(x, z)` exponents per slot.
    pub fn decode_bell(&self, sym: u32, k: usize) -> Option<Vec<(u32, u32)>> {
        let mut out = Vec::with_capacity(k);
        self.decode_bell_into(sym, k, &mut out).then_some(out)
    }

    /// Appends the `k` slot outcomes of `sym` to `out`; false (and `out`
    /// possibly extended) if the symbol is not canonical.
    pub fn decode_bell_into(&self, sym: u32, k: usize, out: &mut Vec<(u32, u32)>) -> bool {
        let used = 2 * k as u32 * self.digit;
        if used < 32 && sym >> used != 0 {
            return false;
        }
        for s in 0..k as u32 {
            let (x, z) = ((sym >> (2 * s * self.digit)) & self.mask(), (sym >> ((2 * s + 1) * self.digit)) & self.mask());
            if x >= self.d || z >= self.d {
                return false;
            }
            out.push((x, z));
        }
        true
    }

    pub fn encode_answers(&self, a: &[u32]) -> u32 {
        a.iter().enumerate().fold(0, |acc, (t, &v)| acc | v << (t as u32 * self.digit))
    }

    pub fn decode_answers(&self, sym: u32, m: usize) -> Option<Vec<u32>> {
        let out: Vec<u32> = (0..m as u32).map(|t| (sym >> (t * self.digit)) & self.mask()).collect();
        let used = m as u32 * self.digit;
        let ok = (used >= 32 || sym >> used == 0) && out.iter().all(|&v| v < self.d);
        ok.then_some(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGameInstance {
    pub game: StabilizerGame,
    pub n: usize,
    pub l: usize,
    pub r: usize,
    pub variant: Variant,
    /// `c` in the `c * ceil(log2 N)^2` pattern seed length.
    pub seed_constant: usize,
    pub sigma: Sigma,
}

impl CircuitGameInstance {
    /// `l = None` picks the largest feasible box radius.
    pub fn new(game: StabilizerGame, n: usize, l: Option<usize>, r: usize, variant: Variant) -> Result<Self, EngineError> {
        game.validate()?;
        let l = match l {
            Some(l) => l,
            None => SamplerLayout::max_l(n, r, game.ell)
                .ok_or_else(|| EngineError::Config(format!("no box radius fits N = {n}, r = {r}, ell = {}", game.ell)))?,
        };
        SamplerLayout::new(n, l, r, game.ell)?;
        if let Variant::Randomness { p, gamma, fixed_query } = &variant {
            DerandomizedRepetitionSpec { r, p: *p, gamma: *gamma, fixed_query: fixed_query.clone() }.validate(&game)?;
        }
        let sigma = Sigma::for_game(&game)?;
        Ok(CircuitGameInstance { game, n, l, r, variant, seed_constant: grid::DEFAULT_SEED_CONSTANT, sigma })
    }

    fn repetition(&self) -> DerandomizedRepetitionSpec {
        match &self.variant {
            Variant::Plain => DerandomizedRepetitionSpec { r: self.r, p: 1.0, gamma: 0.0, fixed_query: self.game.support[0].x.clone() },
            Variant::Randomness { p, gamma, fixed_query } => {
                DerandomizedRepetitionSpec { r: self.r, p: *p, gamma: *gamma, fixed_query: fixed_query.clone() }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assembled {
    pub input_grid: Vec<u32>,
    pub pattern: InputPattern,
    pub queries: Vec<Query>,
    /// Test set, ascending.
    pub s: Vec<usize>,
    pub ledger: RandomnessLedger,
}

fn seed_bytes(master: &Seed, label: &str, bits: usize) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ctr = 0;
    while out.len() * 8 < bits {
        out.extend_from_slice(&seeds::derive(master, label, ctr));
        ctr += 1;
    }
    out.truncate(bits.div_ceil(8));
    out
}

/// Samples the pattern from its short seed, the test set and the queries,
/// and writes them onto the grid.
pub fn assemble_input(inst: &CircuitGameInstance, master: &Seed) -> Result<Assembled, EngineError> {
    let game = &inst.game;
    let seed_bits = grid::pattern_seed_bits(inst.n, inst.seed_constant);
    let pattern = grid::sample_pattern_derandomized(inst.n, inst.l, inst.r, game.ell, &seed_bytes(master, "pattern", seed_bits), inst.seed_constant)?;
    let rep = inst.repetition();
    let mut rng = seeds::rng(master, "test-set", 0);
    let s: Vec<usize> = match inst.variant {
        Variant::Plain => (0..inst.r).collect(),
        Variant::Randomness { p, .. } => (0..inst.r).filter(|_| rng.gen_bool(p)).collect(),
    };
    let mut qrng = seeds::rng(master, "queries", 0);
    let mut in_s = vec![false; inst.r];
    for &i in &s {
        in_s[i] = true;
    }
    let queries: Vec<Query> =
        (0..inst.r).map(|i| if in_s[i] { game.sample_query(&mut qrng) } else { rep.fixed_query.clone() }).collect();
    let test_set_bits = match inst.variant {
        Variant::Plain => 0,
        Variant::Randomness { p, .. } => (inst.r as f64 * entropy::binary_entropy(p)).ceil() as u64,
    };
    let ledger = RandomnessLedger {
        pattern_seed_bits: seed_bits as u64,
        test_set_bits,
        query_bits: s.len() as u64 * game.query_bits() as u64,
    };
    let input_grid = encode_input(inst, &pattern, &queries);
    Ok(Assembled { input_grid, pattern, queries, s, ledger })
}

/// Ledger of one assembly with the expected test-set size, without sampling.
pub fn planned_ledger(game: &StabilizerGame, n: usize, r: usize, p: f64, seed_constant: usize) -> RandomnessLedger {
    RandomnessLedger {
        pattern_seed_bits: grid::pattern_seed_bits(n, seed_constant) as u64,
        test_set_bits: (r as f64 * entropy::binary_entropy(p)).ceil() as u64,
        query_bits: (p * r as f64).ceil() as u64 * game.query_bits() as u64,
    }
}

pub fn encode_input(inst: &CircuitGameInstance, pattern: &InputPattern, queries: &[Query]) -> Vec<u32> {
    let n = inst.n;
    let mut grid = vec![0u32; n * n];
    for (i, pair) in pattern.pairs.iter().enumerate() {
        for path in &pair.star.paths {
            for v in path {
                grid[v.index(n)] = inst.sigma.marker();
            }
        }
        for (j, u) in pair.inputs.iter().enumerate() {
            grid[u.index(n)] = inst.sigma.question(queries[i][j]);
        }
    }
    grid
}

/// Writes simulated outcomes onto the output grid; everything else is blank.
pub fn encode_output(inst: &CircuitGameInstance, pattern: &InputPattern, outcomes: &[InstanceOutcome]) -> Vec<u32> {
    let n = inst.n;
    let mut grid = vec![0u32; n * n];
    for (pair, out) in pattern.pairs.iter().zip(outcomes) {
        for (j, path) in pair.star.paths.iter().enumerate() {
            for (t, v) in path[..path.len() - 1].iter().enumerate() {
                grid[v.index(n)] = inst.sigma.encode_bell(&out.bell[j][t]);
            }
            grid[pair.inputs[j].index(n)] = inst.sigma.encode_answers(&out.answers[j]);
        }
    }
    grid
}

/// Honest output grid; measurement coins come from `master` under their own label.
pub fn run_honest_transcript(inst: &CircuitGameInstance, asm: &Assembled, master: &Seed, engine: Engine) -> Result<Vec<u32>, EngineError> {
    let plan = build_honest_circuit(&inst.game, &asm.pattern)?;
    let coins = seeds::derive(master, "measurements", 0);
    let outcomes = cliffordsim::run_honest(&plan, &inst.game, &asm.queries, &coins, engine)?;
    Ok(encode_output(inst, &asm.pattern, &outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub accept: bool,
    /// Why the transcript was rejected before any game check, if it was.
    pub reason: Option<String>,
    pub wins: Vec<bool>,
    pub s: Vec<usize>,
    pub rotated: Vec<Vec<RotatedAnswer>>,
    /// Answers with the rotation corrections removed.
    pub answers: Vec<Answers>,
    pub ledger: RandomnessLedger,
    pub wall_time_us: u128,
}

impl VerdictReport {
    fn reject(asm: &Assembled, reason: String, start: Instant) -> Self {
        VerdictReport {
            accept: false,
            reason: Some(reason),
            wins: Vec::new(),
            s: asm.s.clone(),
            rotated: Vec::new(),
            answers: Vec::new(),
            ledger: asm.ledger.clone(),
            wall_time_us: start.elapsed().as_micros(),
        }
    }
}

/// Stretch of player `j`'s observables over a path of `len` edges: one
/// block of `k` sites per Bell-measuring vertex plus the endpoint block,
/// which is where the observables act.
pub fn path_stretch(game: &StabilizerGame, lens: &[usize]) -> StretchSpec {
    StretchSpec {
        size: (0..game.ell).map(|j| game.k[j] * (lens[j] + 1)).collect(),
        designated: (0..game.ell).map(|j| (0..game.k[j]).map(|s| lens[j] * game.k[j] + s).collect()).collect(),
    }
}

/// Rotation string of one path: the Bell outcomes at each vertex, then
/// their sum at the endpoint block. `bell` lists `k` slot outcomes per
/// vertex, vertex by vertex.
pub fn path_rotation(d: u32, k: usize, bell: &[(u32, u32)]) -> PauliLabel {
    let mut x = Vec::with_capacity(bell.len() + k);
    let mut z = Vec::with_capacity(bell.len() + k);
    x.extend(bell.iter().map(|b| b.0));
    z.extend(bell.iter().map(|b| b.1));
    // Entries are already reduced mod d, so one conditional subtraction keeps the sums reduced.
    let add = |acc: u32, v: u32| if acc + v >= d { acc + v - d } else { acc + v };
    for s in 0..k {
        let sx = bell.iter().skip(s).step_by(k).fold(0, |acc, b| add(acc, b.0));
        // The frame is X^x Z^(-z).
        let sz = bell.iter().skip(s).step_by(k).fold(0, |acc, b| add(acc, if b.1 == 0 { 0 } else { d - b.1 }));
        x.push(sx);
        z.push(sz);
    }
    PauliLabel::new(d, x, z).expect("consistent lengths")
}

/// Single pass over both grids, then the rotated win check per instance.
pub fn verify(inst: &CircuitGameInstance, asm: &Assembled, output: &[u32]) -> VerdictReport {
    let start = Instant::now();
    let n = inst.n;
    let sig = inst.sigma;
    let game = &inst.game;
    if asm.input_grid.len() != n * n || output.len() != n * n {
        return VerdictReport::reject(asm, "grid size mismatch".into(), start);
    }
    for (idx, (&a, &b)) in asm.input_grid.iter().zip(output).enumerate() {
        if sig.decode_input(a).is_none() {
            return VerdictReport::reject(asm, format!("input symbol {a} at {idx} does not decode"), start);
        }
        if b >> sig.width != 0 {
            return VerdictReport::reject(asm, format!("output symbol {b} at {idx} exceeds {} bits", sig.width), start);
        }
    }
    if asm.pattern.n != n || asm.pattern.pairs.len() != inst.r {
        return VerdictReport::reject(asm, "pattern does not match the instance".into(), start);
    }
    let mut wins = Vec::with_capacity(inst.r);
    let mut rotated = Vec::with_capacity(inst.r);
    let mut answers = Vec::with_capacity(inst.r);
    let mut queries = Vec::with_capacity(inst.r);
    let mut bell = Vec::new();
    for (i, pair) in asm.pattern.pairs.iter().enumerate() {
        let mut x = Vec::with_capacity(game.ell);
        let mut ra = Vec::with_capacity(game.ell);
        for (j, path) in pair.star.paths.iter().enumerate() {
            let u = pair.inputs[j];
            match sig.decode_input(asm.input_grid[u.index(n)]) {
                Some(InputSymbol::Question(q)) => x.push(q),
                _ => return VerdictReport::reject(asm, format!("no question at input {j} of instance {i}"), start),
            }
            bell.clear();
            for v in &path[..path.len() - 1] {
                if !sig.decode_bell_into(output[v.index(n)], game.k[j], &mut bell) {
                    return VerdictReport::reject(asm, format!("rotation symbol at {v:?} does not decode"), start);
                }
            }
            let a = match sig.decode_answers(output[u.index(n)], game.m[j]) {
                Some(a) => a,
                None => return VerdictReport::reject(asm, format!("answer symbol at {u:?} does not decode"), start),
            };
            ra.push(RotatedAnswer { answers: a, rotation: path_rotation(game.d, game.k[j], &bell) });
        }
        let lens: Vec<usize> = pair.star.paths.iter().map(|p| p.len() - 1).collect();
        let stretch = path_stretch(game, &lens);
        let un = match game.unrotate(&stretch, &x, &ra) {
            Ok(a) => a,
            Err(e) => return VerdictReport::reject(asm, format!("instance {i}: {e}"), start),
        };
        match game.check_win(&x, &un) {
            Ok(w) => wins.push(w),
            Err(e) => return VerdictReport::reject(asm, format!("instance {i}: {e}"), start),
        }
        rotated.push(ra);
        answers.push(un);
        queries.push(x);
    }
    let accept = match game.check_win_repeated(&inst.repetition(), &asm.s, &queries, &answers) {
        Ok(a) => a,
        Err(e) => return VerdictReport::reject(asm, e.to_string(), start),
    };
    VerdictReport {
        accept,
        reason: None,
        wins,
        s: asm.s.clone(),
        rotated,
        answers,
        ledger: asm.ledger.clone(),
        wall_time_us: start.elapsed().as_micros(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub input_grid: Vec<u32>,
    pub output_grid: Vec<u32>,
    pub seed: String,
    pub engine: Engine,
}

/// Circuit whose every output is the same symbol.
pub fn constant_circuit(n: usize, sigma_bits: u32, symbol: u32) -> CircuitDag {
    let mut c = CircuitDag::identity(n, sigma_bits);
    let g = c.constant(symbol);
    c.outputs = vec![g; n * n];
    c
}

/// Depth-1 circuit answering `answers` at every question vertex and
/// writing blank (zero rotation) everywhere else.
pub fn fixed_answer_circuit(n: usize, sigma: &Sigma, answers: u32) -> CircuitDag {
    let mut c = CircuitDag::identity(n, sigma.width);
    let table: Vec<u32> = (0..1u32 << sigma.width)
        .map(|s| if matches!(sigma.decode_input(s), Some(InputSymbol::Question(_))) { answers } else { 0 })
        .collect();
    for v in 0..n * n {
        let g = c.push(crate::circuits::GateKind::Table { table: table.clone() }, vec![v]);
        c.outputs[v] = g;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryReport {
    pub trials: usize,
    pub wins: usize,
    pub win_rate: f64,
    /// Standard error of `win_rate`.
    pub sigma: f64,
    pub causal: usize,
    pub causal_rate: f64,
    pub reduction_checked: usize,
    pub reduction_failures: usize,
    pub reduction_check: bool,
    pub adversary_depth: usize,
    pub adversary_fan_in: usize,
}

/// Runs `adversary` on fresh inputs. For causal patterns the distributed
/// player simulation is compared against direct evaluation on every star
/// and input vertex.
pub fn run_adversary_experiment(inst: &CircuitGameInstance, adversary: &CircuitDag, trials: usize, mu: f64, master: &Seed) -> Result<AdversaryReport, EngineError> {
    adversary.validate()?;
    if adversary.n != inst.n || adversary.sigma_bits != inst.sigma.width {
        return Err(EngineError::Config(format!(
            "adversary is N = {}, {} bits; instance needs N = {}, {} bits",
            adversary.n, adversary.sigma_bits, inst.n, inst.sigma.width
        )));
    }
    let per_trial: Vec<(bool, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, bool, bool), EngineError> {
            let m = seeds::derive(master, "trial", t as u64);
            let asm = assemble_input(inst, &m)?;
            let out = adversary.evaluate(&asm.input_grid)?;
            let win = verify(inst, &asm, &out).accept;
            match reduce_to_players(adversary, &asm.pattern, &asm.input_grid, mu) {
                Ok(sim) => {
                    let symbols: Vec<u32> =
                        asm.pattern.pairs.iter().flat_map(|p| p.inputs.iter().map(|u| asm.input_grid[u.index(inst.n)])).collect();
                    let got = sim.simulate(adversary, &symbols)?;
                    let ok = got.iter().all(|&(v, s): &(GridPoint, u32)| out[v.index(inst.n)] == s);
                    Ok((win, true, ok))
                }
                Err(CircuitError::NonCausal) => Ok((win, false, true)),
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<_, _>>()?;
    let wins = per_trial.iter().filter(|t| t.0).count();
    let causal = per_trial.iter().filter(|t| t.1).count();
    let failures = per_trial.iter().filter(|t| t.1 && !t.2).count();
    let rate = wins as f64 / trials.max(1) as f64;
    Ok(AdversaryReport {
        trials,
        wins,
        win_rate: rate,
        sigma: (rate * (1.0 - rate) / trials.max(1) as f64).sqrt(),
        causal,
        causal_rate: causal as f64 / trials.max(1) as f64,
        reduction_checked: causal,
        reduction_failures: failures,
        reduction_check: failures == 0,
        adversary_depth: adversary.depth,
        adversary_fan_in: adversary.k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub r: usize,
    pub p: f64,
    pub gamma: f64,
    pub eps: f64,
    pub c2: f64,
    /// Probability of the conditioning event in the entropy bound.
    pub success_prob_floor: f64,
    pub seed_constant: usize,
    pub engine: Engine,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            n: 32,
            l: None,
            r: 2,
            p: 1.0,
            gamma: 0.0,
            eps: 0.01,
            c2: 1.0,
            success_prob_floor: 1.0,
            seed_constant: grid::DEFAULT_SEED_CONSTANT,
            engine: Engine::Fast,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub ledger: RandomnessLedger,
    pub verdict: VerdictReport,
    pub entropy: ExpansionReport,
    /// Extracted bits as hex, empty on reject.
    pub extracted: String,
    pub extracted_bits: usize,
    pub transcript: Transcript,
}

/// Raw bits fed to the extractor: every decoded answer, instance order.
pub fn raw_answer_bits(verdict: &VerdictReport, digit: u32) -> Vec<bool> {
    verdict.answers.iter().flatten().flatten().flat_map(|&a| (0..digit).map(move |b| (a >> b) & 1 == 1)).collect()
}

/// Assembly, honest or adversarial circuit, verification, entropy
/// accounting and extraction, all from one master seed.
pub fn full_protocol(game: &StabilizerGame, cfg: &ProtocolConfig, adversary: Option<&CircuitDag>, master: &Seed) -> Result<ProtocolReport, EngineError> {
    let fixed = game.support[0].x.clone();
    let mut inst = CircuitGameInstance::new(game.clone(), cfg.n, cfg.l, cfg.r, Variant::Randomness { p: cfg.p, gamma: cfg.gamma, fixed_query: fixed })?;
    inst.seed_constant = cfg.seed_constant;
    let params = EntropyParams { r: cfg.r, p: cfg.p, gamma: cfg.gamma, eps: cfg.eps, success_prob_floor: cfg.success_prob_floor, c2: cfg.c2 };
    params.validate()?;
    let asm = assemble_input(&inst, master)?;
    let output = match adversary {
        Some(c) => c.evaluate(&asm.input_grid)?,
        None => run_honest_transcript(&inst, &asm, master, cfg.engine)?,
    };
    let verdict = verify(&inst, &asm, &output);
    let raw_len: usize = inst.r * game.m.iter().sum::<usize>() * inst.sigma.digit as usize;
    let report = entropy::expansion_report(&asm.ledger, &params, raw_len)?;
    let (extracted, extracted_bits) = if verdict.accept {
        let raw = raw_answer_bits(&verdict, inst.sigma.digit);
        let m = (report.certified_bits / 2.0).floor() as usize;
        let seed_len = entropy::toeplitz_seed_bits(raw.len(), m) as usize;
        let sb = seed_bytes(master, "extractor", seed_len);
        let seed: Vec<bool> = (0..seed_len).map(|i| (sb[i / 8] >> (i % 8)) & 1 == 1).collect();
        let bits = entropy::extract(&raw, &seed, m, report.certified_bits)?;
        (entropy::bits_to_hex(&bits), m)
    } else {
        (String::new(), 0)
    };
    Ok(ProtocolReport {
        ledger: asm.ledger.clone(),
        verdict,
        entropy: report,
        extracted,
        extracted_bits,
        transcript: Transcript { input_grid: asm.input_grid, output_grid: output, seed: seeds::to_hex(master), engine: cfg.engine },
    })
}
