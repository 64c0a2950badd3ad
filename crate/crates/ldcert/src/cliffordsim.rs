//! Qubit stabilizer simulation of the honest circuit.
//!
//! Each grid vertex carries four groups of `k` qubits, one facing each
//! neighbour. Only qubits on star paths are simulated: the EPR pairs on the
//! remaining edges are never measured and factor out of every output.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{PrepGate, StabilizerGame};
use crate::grid::{GridPoint, InputPattern};
use crate::pauli::PauliLabel;
use crate::seeds::{self, Seed};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("qubit {0} out of range")]
    OutOfRange(usize),
    #[error("only qubit games are simulated (d = {0})")]
    UnsupportedModulus(u32),
    #[error("game has no honest state preparation")]
    NoPrep,
    #[error("missing Bell outcome for path {path}, edge {edge}")]
    MissingOutcome { path: usize, edge: usize },
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
}

/// Aaronson-Gottesman tableau: rows `0..n` destabilizers, `n..2n`
/// stabilizers, row `2n` scratch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<u8>,
}

/// A signed Pauli product in packed form (`(1,1)` at a qubit means `Y`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedPauli {
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PackedPauli {
    pub fn new(n: usize, terms: &[(usize, bool, bool)]) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut p = PackedPauli { x: vec![0; words], z: vec![0; words] };
        for &(q, xb, zb) in terms {
            if xb {
                p.x[q / 64] |= 1 << (q % 64);
            }
            if zb {
                p.z[q / 64] |= 1 << (q % 64);
            }
        }
        p
    }
}

impl Tableau {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau { n, words, x: vec![0; rows * words], z: vec![0; rows * words], r: vec![0; rows] };
        for i in 0..n {
            t.x[i * words + i / 64] |= 1 << (i % 64);
            t.z[(i + n) * words + i / 64] |= 1 << (i % 64);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, q: usize) -> Result<(), SimError> {
        if q >= self.n {
            Err(SimError::OutOfRange(q))
        } else {
            Ok(())
        }
    }

    #[inline]
    fn bit(v: &[u64], row: usize, words: usize, q: usize) -> u64 {
        (v[row * words + q / 64] >> (q % 64)) & 1
    }

    pub fn h(&mut self, a: usize) -> Result<(), SimError> {
        self.check(a)?;
        let (w, m) = (a / 64, 1u64 << (a % 64));
        for i in 0..2 * self.n {
            let xi = &mut self.x[i * self.words + w];
            let zi = &mut self.z[i * self.words + w];
            if (*xi & m != 0) && (*zi & m != 0) {
                self.r[i] ^= 1;
            }
            let xb = *xi & m;
            let zb = *zi & m;
            *xi = (*xi & !m) | zb;
            *zi = (*zi & !m) | xb;
        }
        Ok(())
    }

    pub fn s(&mut self, a: usize) -> Result<(), SimError> {
        self.check(a)?;
        let (w, m) = (a / 64, 1u64 << (a % 64));
        for i in 0..2 * self.n {
            let xb = self.x[i * self.words + w] & m;
            let zi = &mut self.z[i * self.words + w];
            if xb != 0 && (*zi & m != 0) {
                self.r[i] ^= 1;
            }
            *zi ^= xb;
        }
        Ok(())
    }

    pub fn cnot(&mut self, c: usize, t: usize) -> Result<(), SimError> {
        self.check(c)?;
        self.check(t)?;
        let words = self.words;
        for i in 0..2 * self.n {
            let xc = Self::bit(&self.x, i, words, c);
            let zc = Self::bit(&self.z, i, words, c);
            let xt = Self::bit(&self.x, i, words, t);
            let zt = Self::bit(&self.z, i, words, t);
            if xc & zt & (xt ^ zc ^ 1) == 1 {
                self.r[i] ^= 1;
            }
            self.x[i * words + t / 64] ^= xc << (t % 64);
            self.z[i * words + c / 64] ^= zt << (c % 64);
        }
        Ok(())
    }

    pub fn pauli_x(&mut self, a: usize) -> Result<(), SimError> {
        self.check(a)?;
        for i in 0..2 * self.n {
            self.r[i] ^= Self::bit(&self.z, i, self.words, a) as u8;
        }
        Ok(())
    }

    pub fn pauli_z(&mut self, a: usize) -> Result<(), SimError> {
        self.check(a)?;
        for i in 0..2 * self.n {
            self.r[i] ^= Self::bit(&self.x, i, self.words, a) as u8;
        }
        Ok(())
    }

    /// Row `h` <- row `h` * row `i`, with the phase tracked mod 4.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut pos = 0u32;
        let mut neg = 0u32;
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            pos += ((y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2)).count_ones();
            neg += ((y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2)).count_ones();
        }
        let total = (2 * self.r[h] as i64 + 2 * self.r[i] as i64 + pos as i64 - neg as i64).rem_euclid(4);
        debug_assert!(total == 0 || total == 2);
        self.r[h] = (total == 2) as u8;
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
    }

    fn anticommutes(&self, row: usize, p: &PackedPauli) -> bool {
        let w = self.words;
        let mut par = 0u32;
        for k in 0..w {
            par += (self.x[row * w + k] & p.z[k]).count_ones() + (self.z[row * w + k] & p.x[k]).count_ones();
        }
        par & 1 == 1
    }

    fn set_row(&mut self, row: usize, p: &PackedPauli, phase: u8) {
        let w = self.words;
        self.x[row * w..(row + 1) * w].copy_from_slice(&p.x);
        self.z[row * w..(row + 1) * w].copy_from_slice(&p.z);
        self.r[row] = phase;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.x.copy_within(src * w..(src + 1) * w, dst * w);
        self.z.copy_within(src * w..(src + 1) * w, dst * w);
        self.r[dst] = self.r[src];
    }

    /// Measures a Pauli product. Returns `(outcome, was_random)`; outcome 1
    /// means eigenvalue -1. A random outcome is one fair coin from `rng`.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, p: &PackedPauli, rng: &mut R) -> (bool, bool) {
        let n = self.n;
        if let Some(pr) = (n..2 * n).find(|&i| self.anticommutes(i, p)) {
            for i in 0..2 * n {
                if i != pr && i != pr - n && self.anticommutes(i, p) {
                    self.rowsum(i, pr);
                }
            }
            self.copy_row(pr - n, pr);
            let coin: bool = rng.gen();
            self.set_row(pr, p, coin as u8);
            (coin, true)
        } else {
            (self.deterministic_sign(p), false)
        }
    }

    /// Sign of `p` when `+-p` is in the stabilizer group (caller's duty).
    fn deterministic_sign(&mut self, p: &PackedPauli) -> bool {
        let n = self.n;
        let s = 2 * n;
        let w = self.words;
        self.x[s * w..(s + 1) * w].fill(0);
        self.z[s * w..(s + 1) * w].fill(0);
        self.r[s] = 0;
        for i in 0..n {
            if self.anticommutes(i, p) {
                self.rowsum(s, i + n);
            }
        }
        self.r[s] == 1
    }

    pub fn measure_z<R: Rng + ?Sized>(&mut self, a: usize, rng: &mut R) -> Result<(bool, bool), SimError> {
        self.check(a)?;
        Ok(self.measure_pauli(&PackedPauli::new(self.n, &[(a, false, true)]), rng))
    }

    /// `Some(sign)` if `+-p` stabilizes the state, without collapsing it.
    pub fn stabilizer_sign(&mut self, p: &PackedPauli) -> Option<bool> {
        let n = self.n;
        if (n..2 * n).any(|i| self.anticommutes(i, p)) {
            return None;
        }
        Some(self.deterministic_sign(p))
    }

    /// Checks the commutation relations of a valid tableau.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        let w = self.words;
        let sym = |a: usize, b: usize| {
            let mut par = 0u32;
            for k in 0..w {
                par += (self.x[a * w + k] & self.z[b * w + k]).count_ones() + (self.z[a * w + k] & self.x[b * w + k]).count_ones();
            }
            par & 1
        };
        for i in 0..n {
            for j in 0..n {
                if sym(i, j + n) != u32::from(i == j) || (i < j && (sym(i, j) != 0 || sym(i + n, j + n) != 0)) {
                    return false;
                }
            }
        }
        true
    }

    /// Measures a Bell pair: CNOT, H on the control, then both in Z. Returns
    /// `(x, z)` with the pair found in `X^x (x) Z^z |EPR>` form, i.e. `z`
    /// from the control and `x` from the target.
    pub fn bell_measure<R: Rng + ?Sized>(&mut self, c: usize, t: usize, rng: &mut R) -> Result<(bool, bool), SimError> {
        self.cnot(c, t)?;
        self.h(c)?;
        let (z, _) = self.measure_z(c, rng)?;
        let (x, _) = self.measure_z(t, rng)?;
        Ok((x, z))
    }

    /// Returns a measured qubit to |0>. The qubit must be in a Z eigenstate.
    fn reset_measured(&mut self, a: usize, outcome: bool) -> Result<(), SimError> {
        if outcome {
            self.pauli_x(a)?;
        }
        Ok(())
    }
}

/// Converts a single-player observable label on `qubits` to a packed Pauli.
pub fn packed_observable(n: usize, qubits: &[usize], label: &PauliLabel) -> PackedPauli {
    let terms: Vec<(usize, bool, bool)> =
        qubits.iter().enumerate().map(|(i, &q)| (q, label.x_exps()[i] % 2 == 1, label.z_exps()[i] % 2 == 1)).collect();
    PackedPauli::new(n, &terms)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitInfo {
    pub instance: usize,
    pub vertex: GridPoint,
    /// Facing direction of the group: 0 left, 1 right, 2 up, 3 down.
    pub group: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    H(usize),
    S(usize),
    Cnot(usize, usize),
    /// Bell-basis measurement of `(control, target)`.
    Bell(usize, usize),
    /// Honest game measurement of one player, fixed by the query at run time.
    GameMeasure { instance: usize, player: usize },
}

/// One player's route through the star and the qubits along it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub vertices: Vec<GridPoint>,
    /// Honest-state qubits at the route start.
    pub source: Vec<usize>,
    /// `out_q[t]`: the `k` qubits at `v_t` facing `v_{t+1}`.
    pub out_q: Vec<Vec<usize>>,
    /// `in_q[t]`: the `k` qubits at `v_{t+1}` facing `v_t`.
    pub in_q: Vec<Vec<usize>>,
}

impl RoutePlan {
    pub fn len(&self) -> usize {
        self.out_q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out_q.is_empty()
    }

    /// Qubits held at the endpoint once teleportation is done.
    pub fn endpoint(&self) -> &[usize] {
        self.in_q.last().map(|v| v.as_slice()).unwrap_or(&self.source)
    }

    /// Control qubits of the Bell measurements at `v_t`.
    pub fn bell_controls(&self, t: usize) -> &[usize] {
        if t == 0 {
            &self.source
        } else {
            &self.in_q[t - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstancePlan {
    /// Honest-state qubits, player blocks in order.
    pub state: Vec<usize>,
    pub routes: Vec<RoutePlan>,
    /// Qubit range `[start, end)` owned by this instance.
    pub qubits: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HonestCircuitPlan {
    pub k: usize,
    pub qubits: Vec<QubitInfo>,
    pub instances: Vec<InstancePlan>,
    pub layers: Vec<Vec<Op>>,
    pub declared_depth: usize,
    /// EPR pairs on edges off every path: prepared but never measured.
    pub background_epr_pairs: usize,
    pub grid_n: usize,
}

impl HonestCircuitPlan {
    pub fn gate_count(&self) -> usize {
        let active: usize = self
            .layers
            .iter()
            .flatten()
            .map(|op| match op {
                Op::Bell(..) => 3,
                _ => 1,
            })
            .sum();
        active + 2 * self.background_epr_pairs
    }

    fn op_qubits(&self, op: &Op) -> Vec<usize> {
        match op {
            Op::H(a) | Op::S(a) => vec![*a],
            Op::Cnot(a, b) | Op::Bell(a, b) => vec![*a, *b],
            Op::GameMeasure { instance, player } => self.instances[*instance].routes[*player].endpoint().to_vec(),
        }
    }

    /// Layer-disjointness and geometric locality.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.layers.len() != self.declared_depth {
            return Err(SimError::InvalidPlan("layer count differs from declared depth".into()));
        }
        for (li, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.qubits.len()];
            for op in layer {
                let qs = self.op_qubits(op);
                for &q in &qs {
                    if std::mem::replace(&mut used[q], true) {
                        return Err(SimError::InvalidPlan(format!("qubit {q} used twice in layer {li}")));
                    }
                }
                for &a in &qs {
                    for &b in &qs {
                        let (va, vb) = (self.qubits[a].vertex, self.qubits[b].vertex);
                        if va != vb && va.direction_to(&vb, self.grid_n).is_none() {
                            return Err(SimError::InvalidPlan(format!("op {op:?} in layer {li} is not local")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Lays out the honest circuit: honest-state preparation at the path
/// starts, EPR pairs along every path edge, then one layer of Bell and game
/// measurements. Depth is `max(2, prep depth) + 1`.
pub fn build_honest_circuit(game: &StabilizerGame, pattern: &InputPattern) -> Result<HonestCircuitPlan, SimError> {
    if game.d != 2 {
        return Err(SimError::UnsupportedModulus(game.d));
    }
    let prep = game.honest_prep.as_ref().ok_or(SimError::NoPrep)?;
    let n = pattern.n;
    let k = *game.k.iter().max().unwrap_or(&1);
    let d_prep = prep.len().max(2);
    let mut layers: Vec<Vec<Op>> = vec![Vec::new(); d_prep + 1];
    let mut qubits = Vec::new();
    let mut instances = Vec::new();
    let mut path_edges = 0usize;
    let alloc = |qubits: &mut Vec<QubitInfo>, instance, vertex, group, slot| {
        qubits.push(QubitInfo { instance, vertex, group, slot });
        qubits.len() - 1
    };
    for (i, pair) in pattern.pairs.iter().enumerate() {
        let start = qubits.len();
        let star = &pair.star;
        let mut routes = Vec::new();
        let mut state = Vec::new();
        for j in 0..game.ell {
            let path = &star.paths[j];
            let kj = game.k[j];
            let next_dir = path[0].direction_to(&path[1], n).expect("adjacent path steps");
            // Face another start vertex if possible, never the next path vertex.
            let spine_dir = (0..game.ell)
                .filter(|&o| o != j)
                .filter_map(|o| path[0].direction_to(&star.paths[o][0], n))
                .find(|&dir| dir != next_dir);
            let src_dir = spine_dir.unwrap_or_else(|| (0..4).find(|&dir| dir != next_dir).unwrap());
            let source: Vec<usize> = (0..kj).map(|s| alloc(&mut qubits, i, path[0], src_dir, s)).collect();
            state.extend(source.iter().copied());
            let mut out_q = Vec::new();
            let mut in_q = Vec::new();
            for t in 0..path.len() - 1 {
                let (a, b) = (path[t], path[t + 1]);
                let da = a.direction_to(&b, n).expect("adjacent");
                let db = b.direction_to(&a, n).expect("adjacent");
                out_q.push((0..kj).map(|s| alloc(&mut qubits, i, a, da, s)).collect::<Vec<_>>());
                in_q.push((0..kj).map(|s| alloc(&mut qubits, i, b, db, s)).collect::<Vec<_>>());
                path_edges += 1;
            }
            routes.push(RoutePlan { vertices: path.clone(), source, out_q, in_q });
        }
        // Honest-state preparation, padded at the front to the full prep depth.
        let pad = d_prep - prep.len();
        for (li, layer) in prep.iter().enumerate() {
            for g in layer {
                layers[pad + li].push(match *g {
                    PrepGate::H(a) => Op::H(state[a]),
                    PrepGate::S(a) => Op::S(state[a]),
                    PrepGate::Cnot(a, b) => Op::Cnot(state[a], state[b]),
                });
            }
        }
        // EPR pairs on path edges in the last two prep layers.
        for route in &routes {
            for t in 0..route.len() {
                for s in 0..route.out_q[t].len() {
                    layers[d_prep - 2].push(Op::H(route.out_q[t][s]));
                    layers[d_prep - 1].push(Op::Cnot(route.out_q[t][s], route.in_q[t][s]));
                }
            }
        }
        for route in &routes {
            for t in 0..route.len() {
                for s in 0..route.out_q[t].len() {
                    layers[d_prep].push(Op::Bell(route.bell_controls(t)[s], route.out_q[t][s]));
                }
            }
        }
        for j in 0..game.ell {
            layers[d_prep].push(Op::GameMeasure { instance: i, player: j });
        }
        instances.push(InstancePlan { state, routes, qubits: (start, qubits.len()) });
    }
    let total_edges = 2 * n * n;
    let background = k * total_edges.saturating_sub(path_edges);
    let plan = HonestCircuitPlan {
        k,
        qubits,
        instances,
        declared_depth: layers.len(),
        layers,
        background_epr_pairs: background,
        grid_n: n,
    };
    Ok(plan)
}

/// Bell outcomes along one path: `outcomes[t][s] = (x, z)`.
pub type PathOutcomes = Vec<Vec<(bool, bool)>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub bell: Vec<PathOutcomes>,
    pub answers: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Gate-level tableau simulation.
    Tableau,
    /// Closed-form teleportation corrections plus a tableau on the honest state only.
    Fast,
}

impl std::str::FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tableau" => Ok(Engine::Tableau),
            "fast" => Ok(Engine::Fast),
            _ => Err(format!("unknown engine {s:?}")),
        }
    }
}

/// Endpoint frame `X^(sum x) Z^(sum z)` for each path, one label of
/// `k` sites per path.
pub fn teleport_corrections_fast(bell: &[PathOutcomes], lengths: &[usize], k: &[usize]) -> Result<Vec<PauliLabel>, SimError> {
    let mut out = Vec::with_capacity(bell.len());
    for (j, path) in bell.iter().enumerate() {
        if path.len() < lengths[j] {
            return Err(SimError::MissingOutcome { path: j, edge: path.len() });
        }
        let mut x = vec![0u32; k[j]];
        let mut z = vec![0u32; k[j]];
        for (t, edge) in path.iter().enumerate() {
            if edge.len() != k[j] {
                return Err(SimError::MissingOutcome { path: j, edge: t });
            }
            for (s, &(xb, zb)) in edge.iter().enumerate() {
                x[s] += xb as u32;
                z[s] += zb as u32;
            }
        }
        out.push(PauliLabel::new(2, x, z).expect("k sites"));
    }
    Ok(out)
}

fn prep_state(t: &mut Tableau, prep: &[Vec<PrepGate>], map: &dyn Fn(usize) -> usize) -> Result<(), SimError> {
    for layer in prep {
        for g in layer {
            match *g {
                PrepGate::H(a) => t.h(map(a))?,
                PrepGate::S(a) => t.s(map(a))?,
                PrepGate::Cnot(a, b) => t.cnot(map(a), map(b))?,
            }
        }
    }
    Ok(())
}

fn measure_answers<R: Rng + ?Sized>(
    t: &mut Tableau,
    game: &StabilizerGame,
    query: &[usize],
    endpoint: &dyn Fn(usize) -> Vec<usize>,
    rng: &mut R,
) -> Vec<Vec<u32>> {
    (0..game.ell)
        .map(|j| {
            let qs = endpoint(j);
            game.questions[j][query[j]]
                .iter()
                .map(|obs| t.measure_pauli(&packed_observable(t.n(), &qs, obs), rng).0 as u32)
                .collect()
        })
        .collect()
}

/// Full tableau over every qubit of one instance, executed layer by layer.
/// With no query the game measurements are skipped, leaving the
/// teleported state on the endpoint qubits.
pub fn run_instance_full<R: Rng + ?Sized>(plan: &HonestCircuitPlan, game: &StabilizerGame, i: usize, query: Option<&[usize]>, rng: &mut R) -> Result<(InstanceOutcome, Tableau), SimError> {
    let inst = &plan.instances[i];
    let (lo, hi) = inst.qubits;
    let mut t = Tableau::new(hi - lo);
    let in_range = |q: usize| q >= lo && q < hi;
    let mut bell: Vec<PathOutcomes> = inst.routes.iter().map(|r| vec![Vec::new(); r.len()]).collect();
    // Map each Bell op back to its (player, edge) slot.
    let mut where_bell = std::collections::HashMap::new();
    for (j, r) in inst.routes.iter().enumerate() {
        for e in 0..r.len() {
            for (s, &q) in r.out_q[e].iter().enumerate() {
                where_bell.insert(q, (j, e, s));
            }
        }
    }
    let mut answers = vec![Vec::new(); game.ell];
    for layer in &plan.layers {
        for op in layer {
            match *op {
                Op::H(a) if in_range(a) => t.h(a - lo)?,
                Op::S(a) if in_range(a) => t.s(a - lo)?,
                Op::Cnot(a, b) if in_range(a) => t.cnot(a - lo, b - lo)?,
                Op::Bell(a, b) if in_range(a) => {
                    let (j, e, s) = where_bell[&b];
                    let out = t.bell_measure(a - lo, b - lo, rng)?;
                    debug_assert_eq!(bell[j][e].len(), s);
                    bell[j][e].push(out);
                }
                Op::GameMeasure { instance, player } if instance == i => {
                    let Some(query) = query else { continue };
                    let qs: Vec<usize> = inst.routes[player].endpoint().iter().map(|q| q - lo).collect();
                    answers[player] = game.questions[player][query[player]]
                        .iter()
                        .map(|obs| t.measure_pauli(&packed_observable(t.n(), &qs, obs), rng).0 as u32)
                        .collect();
                }
                _ => {}
            }
        }
    }
    Ok((InstanceOutcome { bell, answers }, t))
}

/// Gate-level tableau with qubit recycling: each EPR pair is prepared just
/// before its Bell measurement, and the two measured qubits go back to |0>
/// for the next hop. Measurements run in the same order as the layered plan.
pub fn run_instance_windowed<R: Rng + ?Sized>(game: &StabilizerGame, inst: &InstancePlan, query: &[usize], rng: &mut R) -> Result<InstanceOutcome, SimError> {
    let prep = game.honest_prep.as_ref().ok_or(SimError::NoPrep)?;
    let ks: usize = game.k.iter().sum();
    let mut t = Tableau::new(ks + 2);
    prep_state(&mut t, prep, &|a| a)?;
    let mut holder: Vec<Vec<usize>> = (0..game.ell).map(|j| (0..game.k[j]).map(|s| game.qubit_offset(j) + s).collect()).collect();
    let mut free = vec![ks, ks + 1];
    let mut bell = Vec::with_capacity(game.ell);
    for (j, route) in inst.routes.iter().enumerate() {
        let mut path = Vec::with_capacity(route.len());
        for _ in 0..route.len() {
            let mut edge = Vec::with_capacity(game.k[j]);
            for s in 0..game.k[j] {
                let (out, inn) = (free[0], free[1]);
                t.h(out)?;
                t.cnot(out, inn)?;
                let c = holder[j][s];
                let (x, z) = t.bell_measure(c, out, rng)?;
                edge.push((x, z));
                t.reset_measured(c, z)?;
                t.reset_measured(out, x)?;
                holder[j][s] = inn;
                free = vec![c, out];
            }
            path.push(edge);
        }
        bell.push(path);
    }
    let answers = measure_answers(&mut t, game, query, &|j| holder[j].clone(), rng);
    Ok(InstanceOutcome { bell, answers })
}

/// Draws the Bell coins in plan order, applies the accumulated frame to the
/// honest state and measures. Agrees bit for bit with the tableau engines
/// under the same RNG stream.
pub fn run_instance_fast<R: Rng + ?Sized>(game: &StabilizerGame, inst: &InstancePlan, query: &[usize], rng: &mut R) -> Result<InstanceOutcome, SimError> {
    let prep = game.honest_prep.as_ref().ok_or(SimError::NoPrep)?;
    let ks: usize = game.k.iter().sum();
    let mut t = Tableau::new(ks);
    prep_state(&mut t, prep, &|a| a)?;
    let mut bell = Vec::with_capacity(game.ell);
    for (j, route) in inst.routes.iter().enumerate() {
        let path: PathOutcomes = (0..route.len())
            .map(|_| {
                (0..game.k[j])
                    .map(|_| {
                        let z: bool = rng.gen();
                        let x: bool = rng.gen();
                        (x, z)
                    })
                    .collect()
            })
            .collect();
        bell.push(path);
    }
    let lengths: Vec<usize> = inst.routes.iter().map(|r| r.len()).collect();
    let frames = teleport_corrections_fast(&bell, &lengths, &game.k)?;
    for (j, f) in frames.iter().enumerate() {
        for s in 0..game.k[j] {
            let q = game.qubit_offset(j) + s;
            if f.x_exps()[s] % 2 == 1 {
                t.pauli_x(q)?;
            }
            if f.z_exps()[s] % 2 == 1 {
                t.pauli_z(q)?;
            }
        }
    }
    let answers = measure_answers(&mut t, game, query, &|j| (0..game.k[j]).map(|s| game.qubit_offset(j) + s).collect(), rng);
    Ok(InstanceOutcome { bell, answers })
}

/// Per-instance RNG stream for the honest run.
pub fn instance_rng(master: &Seed, i: usize) -> rand_chacha::ChaCha20Rng {
    seeds::rng(master, "honest-instance", i as u64)
}

/// Runs every instance of the honest circuit on the given queries.
pub fn run_honest(plan: &HonestCircuitPlan, game: &StabilizerGame, queries: &[Vec<usize>], master: &Seed, engine: Engine) -> Result<Vec<InstanceOutcome>, SimError> {
    use rayon::prelude::*;
    if queries.len() != plan.instances.len() {
        return Err(SimError::InvalidPlan(format!("{} queries for {} instances", queries.len(), plan.instances.len())));
    }
    plan.instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut rng = instance_rng(master, i);
            match engine {
                Engine::Tableau => run_instance_windowed(game, inst, &queries[i], &mut rng),
                Engine::Fast => run_instance_fast(game, inst, &queries[i], &mut rng),
            }
        })
        .collect()
}
