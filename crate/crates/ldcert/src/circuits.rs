//! Layered bounded-fan-in circuits on the grid: lightcones, `CircuitSpec`
//! extraction, evaluation and the reduction to non-communicating players.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{classify_pattern, CircuitSpec, GridPoint, InputPattern};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("input grid has {got} symbols, expected {expected}")]
    BadInputShape { got: usize, expected: usize },
    #[error("symbol {symbol} at vertex {index} does not fit in {bits} bits")]
    BadSymbol { index: usize, symbol: u32, bits: u32 },
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("pattern is not causal for this circuit")]
    NonCausal,
    #[error("quantum gate {0} cannot be evaluated classically")]
    QuantumGate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CliffordTag {
    H,
    S,
    Cnot,
    Pauli,
    Bell,
    Measure,
    Epr,
    Ghz,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum GateKind {
    /// The input symbol at a grid vertex.
    Input,
    /// Lookup table indexed by `sum_i s_i * |Sigma|^i` over the inputs.
    Table { table: Vec<u32> },
    Clifford { tag: CliffordTag },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: usize,
    pub layer: usize,
    #[serde(flatten)]
    pub kind: GateKind,
    pub inputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitDag {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "D")]
    pub depth: usize,
    pub sigma_bits: u32,
    /// Nodes `0..N^2` are the inputs, in row-major grid order.
    pub gates: Vec<Gate>,
    /// Node read out at each grid vertex.
    pub outputs: Vec<usize>,
}

impl CircuitDag {
    /// Empty circuit whose only nodes are the inputs; outputs wire through.
    pub fn identity(n: usize, sigma_bits: u32) -> Self {
        let gates = (0..n * n).map(|id| Gate { id, layer: 0, kind: GateKind::Input, inputs: Vec::new() }).collect();
        CircuitDag { n, k: 0, depth: 0, sigma_bits, gates, outputs: (0..n * n).collect() }
    }

    pub fn sigma_size(&self) -> usize {
        1usize << self.sigma_bits
    }

    /// Appends a gate and returns its id; the layer is one past its deepest input.
    pub fn push(&mut self, kind: GateKind, inputs: Vec<usize>) -> usize {
        let id = self.gates.len();
        let layer = inputs.iter().map(|&i| self.gates[i].layer + 1).max().unwrap_or(1);
        self.k = self.k.max(inputs.len());
        self.depth = self.depth.max(layer);
        self.gates.push(Gate { id, layer, kind, inputs });
        id
    }

    pub fn constant(&mut self, symbol: u32) -> usize {
        self.push(GateKind::Table { table: vec![symbol] }, Vec::new())
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let nn = self.n * self.n;
        if self.gates.len() < nn || self.outputs.len() != nn {
            return Err(CircuitError::Invalid("input or output count differs from N^2".into()));
        }
        let sig = self.sigma_size();
        for (id, g) in self.gates.iter().enumerate() {
            if g.id != id {
                return Err(CircuitError::Invalid(format!("gate {id} has id {}", g.id)));
            }
            let is_input = matches!(g.kind, GateKind::Input);
            if is_input != (id < nn) {
                return Err(CircuitError::Invalid(format!("gate {id}: input nodes must come first")));
            }
            if g.inputs.len() > self.k {
                return Err(CircuitError::Invalid(format!("gate {id}: fan-in {} above K", g.inputs.len())));
            }
            if g.layer > self.depth || (!is_input && g.layer == 0) {
                return Err(CircuitError::Invalid(format!("gate {id}: bad layer {}", g.layer)));
            }
            for &p in &g.inputs {
                if p >= id || self.gates[p].layer >= g.layer {
                    return Err(CircuitError::Invalid(format!("gate {id}: predecessor {p} not in an earlier layer")));
                }
            }
            if let GateKind::Table { table } = &g.kind {
                if table.len() != sig.pow(g.inputs.len() as u32) || table.iter().any(|&s| s as usize >= sig) {
                    return Err(CircuitError::Invalid(format!("gate {id}: table shape")));
                }
            }
        }
        if self.outputs.iter().any(|&o| o >= self.gates.len()) {
            return Err(CircuitError::Invalid("output refers to a missing node".into()));
        }
        Ok(())
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.gates.len()];
        for g in &self.gates {
            for &p in &g.inputs {
                succ[p].push(g.id);
            }
        }
        succ
    }

    /// Output vertices read from each node.
    fn readers(&self) -> Vec<Vec<usize>> {
        let mut r = vec![Vec::new(); self.gates.len()];
        for (v, &o) in self.outputs.iter().enumerate() {
            r[o].push(v);
        }
        r
    }

    /// Grid vertices (as indices) whose output depends on input `u`.
    pub fn forward_lightcone(&self, u: GridPoint) -> Vec<GridPoint> {
        let succ = self.successors();
        let readers = self.readers();
        let mut seen = vec![false; self.gates.len()];
        self.forward_from(u.index(self.n), &succ, &readers, &mut seen)
    }

    fn forward_from(&self, start: usize, succ: &[Vec<usize>], readers: &[Vec<usize>], seen: &mut [bool]) -> Vec<GridPoint> {
        let mut stack = vec![start];
        let mut touched = vec![start];
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(x) = stack.pop() {
            out.extend(readers[x].iter().map(|&v| GridPoint::from_index(v, self.n)));
            for &s in &succ[x] {
                if !seen[s] {
                    seen[s] = true;
                    touched.push(s);
                    stack.push(s);
                }
            }
        }
        for t in touched {
            seen[t] = false;
        }
        out.sort_unstable();
        out
    }

    /// Grid inputs on which the output at `v` depends.
    pub fn backward_lightcone(&self, v: GridPoint) -> Vec<GridPoint> {
        let nn = self.n * self.n;
        let start = self.outputs[v.index(self.n)];
        let mut seen = HashSet::from([start]);
        let mut stack = vec![start];
        let mut out = Vec::new();
        while let Some(x) = stack.pop() {
            if x < nn {
                out.push(GridPoint::from_index(x, self.n));
            }
            for &p in &self.gates[x].inputs {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Forward lightcones of every input, indexed by `row * N + col`.
    pub fn all_forward_lightcones(&self) -> Vec<Vec<GridPoint>> {
        let succ = self.successors();
        let readers = self.readers();
        let mut seen = vec![false; self.gates.len()];
        (0..self.n * self.n).map(|u| self.forward_from(u, &succ, &readers, &mut seen)).collect()
    }

    /// `K^D`, the bound on every backward lightcone (1 for depth 0).
    pub fn lightcone_bound(&self) -> f64 {
        (self.k.max(1) as f64).powi(self.depth as i32)
    }

    /// Lightcone summary with `bad_in = { u : |L_f(u)| > K^D / mu }` and no bad outputs.
    pub fn extract_spec(&self, mu: f64) -> CircuitSpec {
        assert!(mu > 0.0 && mu < 1.0, "mu must lie in (0, 1)");
        let forward = self.all_forward_lightcones();
        let threshold = self.lightcone_bound() / mu;
        let bad_in = forward
            .iter()
            .enumerate()
            .filter(|(_, l)| l.len() as f64 > threshold)
            .map(|(u, _)| GridPoint::from_index(u, self.n))
            .collect();
        CircuitSpec { n: self.n, forward, bad_in, bad_out: HashSet::new() }
    }

    fn check_input(&self, input: &[u32]) -> Result<(), CircuitError> {
        let nn = self.n * self.n;
        if input.len() != nn {
            return Err(CircuitError::BadInputShape { got: input.len(), expected: nn });
        }
        if let Some((index, &symbol)) = input.iter().enumerate().find(|(_, &s)| (s as usize) >= self.sigma_size()) {
            return Err(CircuitError::BadSymbol { index, symbol, bits: self.sigma_bits });
        }
        Ok(())
    }

    fn eval_gate(&self, g: &Gate, values: &[u32]) -> Result<u32, CircuitError> {
        self.apply(g, g.inputs.iter().map(|&p| values[p]))
    }

    /// Applies gate `g` to the values of its inputs, given in order.
    fn apply(&self, g: &Gate, ins: impl DoubleEndedIterator<Item = u32>) -> Result<u32, CircuitError> {
        match &g.kind {
            GateKind::Input => unreachable!("inputs are preset"),
            GateKind::Clifford { .. } => Err(CircuitError::QuantumGate(g.id)),
            GateKind::Table { table } => {
                let sig = self.sigma_size();
                let idx = ins.rev().fold(0usize, |acc, v| acc * sig + v as usize);
                Ok(table[idx])
            }
        }
    }

    /// Evaluates a classical circuit on an input grid.
    pub fn evaluate(&self, input: &[u32]) -> Result<Vec<u32>, CircuitError> {
        self.check_input(input)?;
        let nn = self.n * self.n;
        let mut values = vec![0u32; self.gates.len()];
        values[..nn].copy_from_slice(input);
        for g in &self.gates[nn..] {
            values[g.id] = self.eval_gate(g, &values)?;
        }
        Ok(self.outputs.iter().map(|&o| values[o]).collect())
    }
}

/// Random layered circuit: each layer holds one gate per grid vertex, fed
/// by up to `k` gates of the previous layer within L-infinity `radius`.
pub fn random_local_circuit<R: Rng + ?Sized>(n: usize, sigma_bits: u32, k: usize, depth: usize, radius: usize, rng: &mut R) -> CircuitDag {
    let mut c = CircuitDag::identity(n, sigma_bits);
    let sig = c.sigma_size();
    let mut prev: Vec<usize> = (0..n * n).collect();
    let side = 2 * radius as isize + 1;
    for _ in 0..depth {
        let mut cur = Vec::with_capacity(n * n);
        for v in 0..n * n {
            let p = GridPoint::from_index(v, n);
            let fan = rng.gen_range(1..=k);
            let mut ins = Vec::with_capacity(fan);
            while ins.len() < fan {
                let dr = rng.gen_range(0..side) - radius as isize;
                let dc = rng.gen_range(0..side) - radius as isize;
                let q = GridPoint::new(
                    (p.row as isize + dr).rem_euclid(n as isize) as usize,
                    (p.col as isize + dc).rem_euclid(n as isize) as usize,
                );
                let id = prev[q.index(n)];
                if !ins.contains(&id) {
                    ins.push(id);
                }
                if fan > side as usize * side as usize {
                    break;
                }
            }
            let table = (0..sig.pow(ins.len() as u32)).map(|_| rng.gen_range(0..sig as u32)).collect();
            let id = c.gates.len();
            c.gates.push(Gate { id, layer: 0, kind: GateKind::Table { table }, inputs: ins });
            cur.push(id);
        }
        prev = cur;
    }
    c.outputs = prev;
    relayer(&mut c);
    c
}

/// Recomputes layers, fan-in and depth from the gate list.
pub fn relayer(c: &mut CircuitDag) {
    let nn = c.n * c.n;
    c.k = 0;
    c.depth = 0;
    for i in 0..c.gates.len() {
        let layer = if i < nn { 0 } else { c.gates[i].inputs.iter().map(|&p| c.gates[p].layer + 1).max().unwrap_or(1) };
        c.gates[i].layer = layer;
        c.k = c.k.max(c.gates[i].inputs.len());
        c.depth = c.depth.max(layer);
    }
}

/// One player of the distributed simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerSim {
    pub instance: usize,
    pub player: usize,
    pub input: GridPoint,
    /// Nodes this player evaluates, in topological order.
    pub schedule: Vec<usize>,
    /// Star vertices whose output this player reports (its share of the star).
    pub outputs: Vec<GridPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerStrategySim {
    /// Values of nodes that no input location reaches, fixed before play.
    pub constants: Vec<Option<u32>>,
    pub players: Vec<PlayerSim>,
    /// Nodes reached by two or more input locations; evaluated by nobody.
    pub traced_out: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Owner {
    Free,
    One(usize),
    Many,
}

/// Builds the distributed simulation of a classical circuit on a causal
/// pattern. Inputs other than input locations are hard-wired to their value
/// in `base_input`.
pub fn reduce_to_players(c: &CircuitDag, pattern: &InputPattern, base_input: &[u32], mu: f64) -> Result<PlayerStrategySim, CircuitError> {
    c.check_input(base_input)?;
    if c.gates.iter().any(|g| matches!(g.kind, GateKind::Clifford { .. })) {
        return Err(CircuitError::Invalid("reduction is defined for classical circuits only".into()));
    }
    let spec = c.extract_spec(mu);
    if !classify_pattern(pattern, &spec).is_causal {
        return Err(CircuitError::NonCausal);
    }
    let n = c.n;
    let nn = n * n;
    let mut locations = Vec::new();
    for (i, pair) in pattern.pairs.iter().enumerate() {
        for (j, u) in pair.inputs.iter().enumerate() {
            locations.push((i, j, *u));
        }
    }
    let mut owner = vec![Owner::Free; c.gates.len()];
    for (p, &(_, _, u)) in locations.iter().enumerate() {
        owner[u.index(n)] = Owner::One(p);
    }
    for g in &c.gates[nn..] {
        let mut o = Owner::Free;
        for &q in &g.inputs {
            o = match (o, owner[q]) {
                (x, Owner::Free) => x,
                (Owner::Free, y) => y,
                (Owner::One(a), Owner::One(b)) if a == b => Owner::One(a),
                _ => Owner::Many,
            };
        }
        owner[g.id] = o;
    }
    let mut constants = vec![None; c.gates.len()];
    let mut values = vec![0u32; c.gates.len()];
    for id in 0..c.gates.len() {
        if owner[id] != Owner::Free {
            continue;
        }
        values[id] = if id < nn { base_input[id] } else { c.eval_gate(&c.gates[id], &values)? };
        constants[id] = Some(values[id]);
    }
    let mut players: Vec<PlayerSim> = locations
        .iter()
        .map(|&(instance, player, input)| PlayerSim { instance, player, input, schedule: Vec::new(), outputs: Vec::new() })
        .collect();
    let mut traced_out = Vec::new();
    for id in 0..c.gates.len() {
        match owner[id] {
            Owner::One(p) => players[p].schedule.push(id),
            Owner::Many => traced_out.push(id),
            Owner::Free => {}
        }
    }
    // Share out each star: by the owner of the output node, else the lowest
    // player whose path holds the vertex, else round-robin in vertex order.
    let first_of: Vec<usize> = {
        let mut f = Vec::new();
        let mut acc = 0;
        for pair in &pattern.pairs {
            f.push(acc);
            acc += pair.inputs.len();
        }
        f
    };
    for (i, pair) in pattern.pairs.iter().enumerate() {
        let mut verts: Vec<GridPoint> = pair.star.vertices(n).into_iter().collect();
        verts.sort_unstable();
        let ell = pair.inputs.len();
        let mut rr = 0usize;
        for v in verts {
            let p = match owner[c.outputs[v.index(n)]] {
                Owner::One(p) => p,
                Owner::Many => return Err(CircuitError::NonCausal),
                Owner::Free => match (0..ell).find(|&j| pair.star.paths[j].contains(&v)) {
                    Some(j) => first_of[i] + j,
                    None => {
                        rr += 1;
                        first_of[i] + (rr - 1) % ell
                    }
                },
            };
            if players[p].instance != i {
                return Err(CircuitError::NonCausal);
            }
            players[p].outputs.push(v);
        }
    }
    Ok(PlayerStrategySim { constants, players, traced_out })
}

impl PlayerStrategySim {
    /// Runs every player on its own input symbol and collects the reported
    /// star outputs. `symbols[p]` is the symbol at player `p`'s input location.
    pub fn simulate(&self, c: &CircuitDag, symbols: &[u32]) -> Result<Vec<(GridPoint, u32)>, CircuitError> {
        let n = c.n;
        let nn = n * n;
        let mut out = Vec::new();
        for (p, player) in self.players.iter().enumerate() {
            // Each player has a private frame: constants plus its own wires.
            let mut frame: Vec<Option<u32>> = self.constants.clone();
            for &id in &player.schedule {
                let v = if id < nn {
                    symbols[p]
                } else {
                    let g = &c.gates[id];
                    let vals = g
                        .inputs
                        .iter()
                        .map(|&q| frame[q].ok_or_else(|| CircuitError::Invalid(format!("player {p} reads foreign wire {q}"))))
                        .collect::<Result<Vec<u32>, _>>()?;
                    c.apply(g, vals.into_iter())?
                };
                frame[id] = Some(v);
            }
            for v in &player.outputs {
                let o = c.outputs[v.index(n)];
                let val = frame[o].ok_or_else(|| CircuitError::Invalid(format!("player {p} cannot produce output at {v:?}")))?;
                out.push((*v, val));
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}
