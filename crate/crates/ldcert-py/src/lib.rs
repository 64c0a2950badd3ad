//! Python bindings. Structured results cross the boundary as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ldcert::cli::load_game;
use ldcert::cliffordsim::Engine;
use ldcert::entropy::{self, EntropyParams};
use ldcert::game_engine::{self, CircuitGameInstance, ProtocolConfig, Transcript, Variant};
use ldcert::games::format_rational;
use ldcert::seeds::{self, Seed};

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn seed(s: &str) -> PyResult<Seed> {
    seeds::parse(s).ok_or_else(|| err(format!("bad seed {s:?}")))
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(err)
}

fn plain_instance(game: &str, n: usize, r: usize, l: Option<usize>) -> PyResult<CircuitGameInstance> {
    let game = load_game(game).map_err(err)?;
    CircuitGameInstance::new(game, n, l, r, Variant::Plain).map_err(err)
}

/// Exact classical value of a game ("ghz", "magic-square" or a JSON path).
#[pyfunction]
#[pyo3(signature = (game = "ghz"))]
pub fn classical_value(game: &str) -> PyResult<String> {
    let g = load_game(game).map_err(err)?;
    Ok(format_rational(&g.classical_value_bruteforce(1 << 40).map_err(err)?))
}

/// Input pattern drawn from `seed`, as JSON.
#[pyfunction]
#[pyo3(signature = (n, r, game = "ghz", seed = "0", l = None))]
pub fn sample_pattern(n: usize, r: usize, game: &str, seed: &str, l: Option<usize>) -> PyResult<String> {
    let inst = plain_instance(game, n, r, l)?;
    let asm = game_engine::assemble_input(&inst, &self::seed(seed)?).map_err(err)?;
    to_json(&asm.pattern)
}

/// Honest transcript for the plain repeated game, as JSON.
#[pyfunction]
#[pyo3(signature = (n, r, game = "ghz", seed = "0", engine = "fast", l = None))]
pub fn run_honest(n: usize, r: usize, game: &str, seed: &str, engine: &str, l: Option<usize>) -> PyResult<String> {
    let inst = plain_instance(game, n, r, l)?;
    let master = self::seed(seed)?;
    let engine: Engine = engine.parse().map_err(err)?;
    let asm = game_engine::assemble_input(&inst, &master).map_err(err)?;
    let output = game_engine::run_honest_transcript(&inst, &asm, &master, engine).map_err(err)?;
    to_json(&Transcript { input_grid: asm.input_grid, output_grid: output, seed: seeds::to_hex(&master), engine })
}

/// Verdict on a transcript produced by `run_honest` (or tampered with), as JSON.
#[pyfunction]
#[pyo3(signature = (transcript, n, r, game = "ghz", l = None))]
pub fn verify(transcript: &str, n: usize, r: usize, game: &str, l: Option<usize>) -> PyResult<String> {
    let inst = plain_instance(game, n, r, l)?;
    let t: Transcript = serde_json::from_str(transcript).map_err(err)?;
    let asm = game_engine::assemble_input(&inst, &seed(&t.seed)?).map_err(err)?;
    let out = if t.input_grid == asm.input_grid { t.output_grid.as_slice() } else { &[] };
    let mut v = game_engine::verify(&inst, &asm, out);
    v.wall_time_us = 0;
    to_json(&v)
}

/// Planned randomness ledger and entropy bound, as JSON.
#[pyfunction]
#[pyo3(signature = (n, r, p = 1.0, gamma = 0.0, eps = 0.01, c2 = 1.0, game = "ghz"))]
pub fn entropy_report(n: usize, r: usize, p: f64, gamma: f64, eps: f64, c2: f64, game: &str) -> PyResult<String> {
    let g = load_game(game).map_err(err)?;
    let ledger = game_engine::planned_ledger(&g, n, r, p, ldcert::grid::DEFAULT_SEED_CONSTANT);
    let params = EntropyParams { r, p, gamma, eps, c2, ..Default::default() };
    let raw = r * g.m.iter().sum::<usize>();
    to_json(&entropy::expansion_report(&ledger, &params, raw).map_err(err)?)
}

/// Toeplitz extraction over bit lists.
#[pyfunction]
pub fn extract(raw: Vec<bool>, seed: Vec<bool>, m: usize, claimed: f64) -> PyResult<Vec<bool>> {
    entropy::extract(&raw, &seed, m, claimed).map_err(err)
}

/// End-to-end run with honest devices, as JSON.
#[pyfunction]
#[pyo3(signature = (n, r, game = "ghz", seed = "0", engine = "fast", p = 1.0, gamma = 0.0, c2 = 1.0))]
#[allow(clippy::too_many_arguments)]
pub fn full_protocol(n: usize, r: usize, game: &str, seed: &str, engine: &str, p: f64, gamma: f64, c2: f64) -> PyResult<String> {
    let g = load_game(game).map_err(err)?;
    let cfg = ProtocolConfig { n, r, p, gamma, c2, engine: engine.parse().map_err(err)?, ..Default::default() };
    let mut rep = game_engine::full_protocol(&g, &cfg, None, &self::seed(seed)?).map_err(err)?;
    rep.verdict.wall_time_us = 0;
    to_json(&rep)
}

#[pymodule]
fn ldcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(classical_value, m)?)?;
    m.add_function(wrap_pyfunction!(sample_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(run_honest, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_report, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(full_protocol, m)?)?;
    Ok(())
}
