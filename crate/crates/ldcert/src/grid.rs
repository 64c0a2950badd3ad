//! Toroidal grid geometry, stars, input patterns and their sampler, plus
//! causality classification against a circuit's lightcone summary.

use std::collections::{HashSet, VecDeque};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("sampler constraint violated: {0}")]
    Constraint(String),
    #[error("seed has {got} bits, need {need}")]
    SeedTooShort { got: usize, need: usize },
    #[error("no routable star found after {0} box draws")]
    Unroutable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub row: usize,
    pub col: usize,
}

impl GridPoint {
    pub fn new(row: usize, col: usize) -> Self {
        GridPoint { row, col }
    }

    pub fn index(&self, n: usize) -> usize {
        self.row * n + self.col
    }

    pub fn from_index(i: usize, n: usize) -> Self {
        GridPoint { row: i / n, col: i % n }
    }

    /// Toroidal L-infinity distance.
    pub fn linf(&self, other: &GridPoint, n: usize) -> usize {
        let dr = self.row.abs_diff(other.row);
        let dc = self.col.abs_diff(other.col);
        dr.min(n - dr).max(dc.min(n - dc))
    }

    /// 4-neighbours on the torus: left, right, up, down.
    pub fn neighbours(&self, n: usize) -> [GridPoint; 4] {
        let (r, c) = (self.row, self.col);
        [
            GridPoint::new(r, (c + n - 1) % n),
            GridPoint::new(r, (c + 1) % n),
            GridPoint::new((r + n - 1) % n, c),
            GridPoint::new((r + 1) % n, c),
        ]
    }

    /// Direction index (as in `neighbours`) of an adjacent point, if any.
    pub fn direction_to(&self, other: &GridPoint, n: usize) -> Option<usize> {
        self.neighbours(n).iter().position(|p| p == other)
    }
}

/// `bx_L(center)`, the closed L-infinity ball of radius `radius`, mod N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridBox {
    pub center: GridPoint,
    pub radius: usize,
}

impl GridBox {
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn contains(&self, p: &GridPoint, n: usize) -> bool {
        self.center.linf(p, n) <= self.radius
    }

    pub fn points(&self, n: usize) -> Vec<GridPoint> {
        let l = self.radius as isize;
        let ni = n as isize;
        let mut out = Vec::with_capacity(self.side() * self.side());
        for dr in -l..=l {
            for dc in -l..=l {
                let r = (self.center.row as isize + dr).rem_euclid(ni) as usize;
                let c = (self.center.col as isize + dc).rem_euclid(ni) as usize;
                out.push(GridPoint::new(r, c));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A central box, `ell` further boxes, and one route per player running
/// from `g_j` inside the central box to the input location `u_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Star {
    pub central_box: GridBox,
    pub boxes: Vec<GridBox>,
    pub paths: Vec<Vec<GridPoint>>,
    /// Index of this star within its family, and the family size.
    pub index: usize,
    pub family: usize,
}

impl Star {
    pub fn ell(&self) -> usize {
        self.boxes.len()
    }

    pub fn g(&self, j: usize) -> GridPoint {
        self.paths[j][0]
    }

    pub fn endpoint(&self, j: usize) -> GridPoint {
        *self.paths[j].last().expect("nonempty path")
    }

    /// Every vertex of the star: box cells and path cells.
    pub fn vertices(&self, n: usize) -> HashSet<GridPoint> {
        let mut s: HashSet<GridPoint> = self.central_box.points(n).into_iter().collect();
        for b in &self.boxes {
            s.extend(b.points(n));
        }
        for p in &self.paths {
            s.extend(p.iter().copied());
        }
        s
    }

    pub fn total_path_length(&self) -> usize {
        self.paths.iter().map(|p| p.len() - 1).sum()
    }

    /// Structural invariants; returns a description of the first violation.
    pub fn check(&self, n: usize) -> Result<(), String> {
        let mut all = vec![self.central_box];
        all.extend(self.boxes.iter().copied());
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let (a, b) = (all[i], all[j]);
                if a.center.linf(&b.center, n) <= a.radius + b.radius {
                    return Err(format!("boxes {i} and {j} overlap"));
                }
            }
        }
        let mut seen = HashSet::new();
        for (j, p) in self.paths.iter().enumerate() {
            if p.len() < 2 {
                return Err(format!("path {j} is too short"));
            }
            if !self.central_box.contains(&p[0], n) || !self.boxes[j].contains(p.last().unwrap(), n) {
                return Err(format!("path {j} endpoints are not in its boxes"));
            }
            for w in p.windows(2) {
                if w[0].direction_to(&w[1], n).is_none() {
                    return Err(format!("path {j} has a non-adjacent step"));
                }
            }
            for v in p {
                if !seen.insert(*v) {
                    return Err(format!("path {j} revisits or crosses at {v:?}"));
                }
                for (k, b) in self.boxes.iter().enumerate() {
                    if k != j && b.contains(v, n) {
                        return Err(format!("path {j} enters box {k}"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternPair {
    pub inputs: Vec<GridPoint>,
    pub star: Star,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomnessEntry {
    pub source: String,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputPattern {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub r: usize,
    pub ell: usize,
    pub pairs: Vec<PatternPair>,
    /// Top-left corners of the squares, one per pair.
    pub squares: Vec<GridPoint>,
    pub square_side: usize,
    pub ledger: Vec<RandomnessEntry>,
}

impl InputPattern {
    pub fn check(&self) -> Result<(), String> {
        if self.pairs.len() != self.r {
            return Err("pair count differs from r".into());
        }
        let m = self.square_side;
        for (i, pair) in self.pairs.iter().enumerate() {
            pair.star.check(self.n).map_err(|e| format!("pair {i}: {e}"))?;
            if pair.inputs.len() != self.ell || pair.star.ell() != self.ell {
                return Err(format!("pair {i}: wrong number of inputs"));
            }
            for (j, u) in pair.inputs.iter().enumerate() {
                if !pair.star.boxes[j].contains(u, self.n) || pair.star.endpoint(j) != *u {
                    return Err(format!("pair {i}: input {j} not at its box endpoint"));
                }
            }
            let sq = self.squares[i];
            let inside = |p: &GridPoint| p.row >= sq.row && p.row < sq.row + m && p.col >= sq.col && p.col < sq.col + m;
            if !pair.star.vertices(self.n).iter().all(inside) {
                return Err(format!("pair {i}: star leaves its square"));
            }
        }
        Ok(())
    }

    /// Every vertex of every star, as a membership mask over the grid.
    pub fn star_mask(&self) -> Vec<Option<usize>> {
        let mut mask = vec![None; self.n * self.n];
        for (i, pair) in self.pairs.iter().enumerate() {
            for v in pair.star.vertices(self.n) {
                mask[v.index(self.n)] = Some(i);
            }
        }
        mask
    }
}

/// Sampler layout derived from `(N, L, r, ell)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerLayout {
    pub n: usize,
    pub l: usize,
    pub r: usize,
    pub ell: usize,
    /// Side of each square.
    pub m: usize,
    /// Squares per row of the square arrangement.
    pub per_row: usize,
    /// Boxes per row of a square; `T = t * t`.
    pub t: usize,
    pub stars_per_family: usize,
}

impl SamplerLayout {
    pub fn new(n: usize, l: usize, r: usize, ell: usize) -> Result<Self, GridError> {
        if r == 0 || ell == 0 || l == 0 {
            return Err(GridError::Constraint("r, ell and L must be positive".into()));
        }
        let per_row = (r as f64).sqrt().ceil() as usize;
        let per_row = if (per_row - 1) * (per_row - 1) >= r { per_row - 1 } else { per_row };
        let m = n / per_row;
        if 3.0 * l as f64 * ((ell + 1) as f64).sqrt() > m as f64 {
            return Err(GridError::Constraint(format!("3L*sqrt(ell+1) = {:.2} exceeds M = {m}", 3.0 * l as f64 * ((ell + 1) as f64).sqrt())));
        }
        let t = m / (2 * l + 1);
        if t * t < ell + 1 {
            return Err(GridError::Constraint(format!("only {} boxes per square, need {}", t * t, ell + 1)));
        }
        Ok(SamplerLayout { n, l, r, ell, m, per_row, t, stars_per_family: (l / ell).max(1) })
    }

    /// The largest `L` satisfying the sampler constraint for `(N, r, ell)`.
    pub fn max_l(n: usize, r: usize, ell: usize) -> Option<usize> {
        (1..=n).rev().find(|&l| SamplerLayout::new(n, l, r, ell).is_ok())
    }

    pub fn boxes_per_square(&self) -> usize {
        self.t * self.t
    }

    pub fn square_origin(&self, i: usize) -> GridPoint {
        GridPoint::new((i / self.per_row) * self.m, (i % self.per_row) * self.m)
    }

    /// Box `b` (row-major) of square `i`.
    pub fn box_of(&self, i: usize, b: usize) -> GridBox {
        let o = self.square_origin(i);
        let s = 2 * self.l + 1;
        let (br, bc) = (b / self.t, b % self.t);
        GridBox { center: GridPoint::new(o.row + br * s + self.l, o.col + bc * s + self.l), radius: self.l }
    }
}

/// Enumerates up to `limit` distinct routable stars for the chosen boxes.
///
/// Family members are enumerated over spine orientation, player routing
/// order and BFS neighbour order; each member routes its paths one after
/// another along shortest paths that avoid the other boxes and the paths
/// already laid.
pub fn star_family(layout: &SamplerLayout, square: usize, b0: GridBox, boxes: &[GridBox], inputs: &[GridPoint], limit: usize) -> Vec<Star> {
    let mut orders: Vec<Vec<usize>> = Vec::new();
    permutations(&mut (0..boxes.len()).collect(), 0, &mut orders);
    let neighbour_orders: [[usize; 4]; 4] = [[1, 3, 0, 2], [3, 1, 2, 0], [0, 2, 1, 3], [2, 0, 3, 1]];
    let mut seen: Vec<Vec<Vec<GridPoint>>> = Vec::new();
    'outer: for orient in 0..2 {
        for order in &orders {
            for nb in &neighbour_orders {
                if let Some(paths) = try_route(layout, square, b0, boxes, inputs, orient, order, nb) {
                    if !seen.contains(&paths) {
                        seen.push(paths);
                        if seen.len() >= limit {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    let family = seen.len();
    seen.into_iter()
        .enumerate()
        .map(|(index, paths)| Star { central_box: b0, boxes: boxes.to_vec(), paths, index, family })
        .collect()
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

/// Spine of `ell` adjacent vertices through the centre of `b0`.
pub fn spine(b0: &GridBox, ell: usize, orient: usize) -> Vec<GridPoint> {
    let c = b0.center;
    let half = (ell / 2) as isize;
    (0..ell as isize)
        .map(|i| {
            let off = i - half;
            if orient == 0 {
                GridPoint::new(c.row, (c.col as isize + off) as usize)
            } else {
                GridPoint::new((c.row as isize + off) as usize, c.col)
            }
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn try_route(
    layout: &SamplerLayout,
    square: usize,
    b0: GridBox,
    boxes: &[GridBox],
    inputs: &[GridPoint],
    orient: usize,
    order: &[usize],
    nb: &[usize; 4],
) -> Option<Vec<Vec<GridPoint>>> {
    let ell = boxes.len();
    if 2 * (ell / 2) > 2 * b0.radius {
        return None;
    }
    let m = layout.m;
    let o = layout.square_origin(square);
    let local = |p: &GridPoint| (p.row - o.row) * m + (p.col - o.col);
    let sp = spine(&b0, ell, orient);
    // Cells claimed by each box, and cells not usable by anyone.
    let mut owner = vec![usize::MAX; m * m];
    for (j, b) in boxes.iter().enumerate() {
        for p in b.points(layout.n) {
            owner[local(&p)] = j;
        }
    }
    let mut blocked = vec![false; m * m];
    for p in sp.iter().chain(inputs) {
        blocked[local(p)] = true;
    }
    let mut paths = vec![Vec::new(); ell];
    let mut total = 0usize;
    for &j in order {
        let start = sp[j];
        let goal = inputs[j];
        blocked[local(&start)] = false;
        blocked[local(&goal)] = false;
        let path = bfs(m, o, &blocked, &owner, j, start, goal, nb)?;
        for p in &path {
            blocked[local(p)] = true;
        }
        total += path.len() - 1;
        paths[j] = path;
    }
    if total > 2 * ell * m {
        return None;
    }
    Some(paths)
}

#[allow(clippy::too_many_arguments)]
fn bfs(
    m: usize,
    o: GridPoint,
    blocked: &[bool],
    owner: &[usize],
    j: usize,
    start: GridPoint,
    goal: GridPoint,
    nb: &[usize; 4],
) -> Option<Vec<GridPoint>> {
    let idx = |r: usize, c: usize| r * m + c;
    let (sr, sc) = (start.row - o.row, start.col - o.col);
    let (gr, gc) = (goal.row - o.row, goal.col - o.col);
    let mut prev = vec![usize::MAX; m * m];
    let mut q = VecDeque::new();
    prev[idx(sr, sc)] = idx(sr, sc);
    q.push_back((sr, sc));
    while let Some((r, c)) = q.pop_front() {
        if (r, c) == (gr, gc) {
            break;
        }
        for &dir in nb {
            let (nr, nc) = match dir {
                0 if c > 0 => (r, c - 1),
                1 if c + 1 < m => (r, c + 1),
                2 if r > 0 => (r - 1, c),
                3 if r + 1 < m => (r + 1, c),
                _ => continue,
            };
            let i = idx(nr, nc);
            if prev[i] != usize::MAX || blocked[i] || (owner[i] != usize::MAX && owner[i] != j) {
                continue;
            }
            prev[i] = idx(r, c);
            q.push_back((nr, nc));
        }
    }
    let gi = idx(gr, gc);
    if prev[gi] == usize::MAX {
        return None;
    }
    let mut path = vec![gi];
    let mut cur = gi;
    while cur != idx(sr, sc) {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    Some(path.into_iter().map(|i| GridPoint::new(o.row + i / m, o.col + i % m)).collect())
}

const MAX_BOX_DRAWS: usize = 10_000;

/// Samples a pattern from the random-pattern distribution: one square per
/// pair, `ell + 1` distinct boxes, uniform input locations, then a uniform
/// member of the star family.
pub fn sample_pattern<R: Rng + ?Sized>(n: usize, l: usize, r: usize, ell: usize, rng: &mut R) -> Result<InputPattern, GridError> {
    let layout = SamplerLayout::new(n, l, r, ell)?;
    let mut pairs = Vec::with_capacity(r);
    let mut squares = Vec::with_capacity(r);
    for i in 0..r {
        pairs.push(sample_pair(&layout, i, rng)?);
        squares.push(layout.square_origin(i));
    }
    Ok(InputPattern { n, l, r, ell, pairs, squares, square_side: layout.m, ledger: Vec::new() })
}

pub fn sample_pair<R: Rng + ?Sized>(layout: &SamplerLayout, i: usize, rng: &mut R) -> Result<PatternPair, GridError> {
    let tt = layout.boxes_per_square();
    for _ in 0..MAX_BOX_DRAWS {
        let chosen = rand::seq::index::sample(rng, tt, layout.ell + 1).into_vec();
        let b0 = layout.box_of(i, chosen[0]);
        let boxes: Vec<GridBox> = chosen[1..].iter().map(|&b| layout.box_of(i, b)).collect();
        let inputs: Vec<GridPoint> = boxes
            .iter()
            .map(|b| {
                let dr = rng.gen_range(0..b.side());
                let dc = rng.gen_range(0..b.side());
                GridPoint::new(b.center.row - b.radius + dr, b.center.col - b.radius + dc)
            })
            .collect();
        let mut family = star_family(layout, i, b0, &boxes, &inputs, layout.stars_per_family);
        if family.is_empty() {
            continue;
        }
        let t = rng.gen_range(0..family.len());
        return Ok(PatternPair { inputs, star: family.swap_remove(t) });
    }
    Err(GridError::Unroutable(MAX_BOX_DRAWS))
}

/// Seed-expanding generator used by the derandomized sampler.
pub trait Prg: RngCore {
    /// Name reported in randomness ledgers.
    fn name(&self) -> &'static str;
    fn seed_bits(&self) -> usize;
}

/// Counter-mode SHA-256 expansion of a bit seed: block `i` is
/// `SHA256(seed || bit_len || i)`.
pub struct Sha256CounterPrg {
    seed: Vec<u8>,
    bits: usize,
    counter: u64,
    block: [u8; 32],
    pos: usize,
}

impl Sha256CounterPrg {
    /// Uses the first `bits` bits of `seed` (little-endian bit order within bytes).
    pub fn new(seed: &[u8], bits: usize) -> Result<Self, GridError> {
        if seed.len() * 8 < bits {
            return Err(GridError::SeedTooShort { got: seed.len() * 8, need: bits });
        }
        let mut s = seed[..bits.div_ceil(8)].to_vec();
        if bits % 8 != 0 {
            let last = s.len() - 1;
            s[last] &= (1u8 << (bits % 8)) - 1;
        }
        Ok(Sha256CounterPrg { seed: s, bits, counter: 0, block: [0; 32], pos: 32 })
    }

    fn refill(&mut self) {
        let mut h = Sha256::new();
        h.update(&self.seed);
        h.update((self.bits as u64).to_le_bytes());
        h.update(self.counter.to_le_bytes());
        self.block.copy_from_slice(&h.finalize());
        self.counter += 1;
        self.pos = 0;
    }
}

impl RngCore for Sha256CounterPrg {
    fn next_u32(&mut self) -> u32 {
        let mut b = [0u8; 4];
        self.fill_bytes(&mut b);
        u32::from_le_bytes(b)
    }

    fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.fill_bytes(&mut b);
        u64::from_le_bytes(b)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for d in dest {
            if self.pos == 32 {
                self.refill();
            }
            *d = self.block[self.pos];
            self.pos += 1;
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

impl Prg for Sha256CounterPrg {
    fn name(&self) -> &'static str {
        "sha256-ctr"
    }

    fn seed_bits(&self) -> usize {
        self.bits
    }
}

pub const DEFAULT_SEED_CONSTANT: usize = 4;

/// `c * ceil(log2 N)^2`.
pub fn pattern_seed_bits(n: usize, c: usize) -> usize {
    let lg = (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize;
    c * lg * lg
}

/// Derandomized sampler: the whole pattern is a deterministic function of
/// a `c * ceil(log2 N)^2`-bit seed expanded by a PRG.
pub fn sample_pattern_derandomized(n: usize, l: usize, r: usize, ell: usize, seed: &[u8], c: usize) -> Result<InputPattern, GridError> {
    let need = pattern_seed_bits(n, c);
    let mut prg = Sha256CounterPrg::new(seed, need)?;
    sample_pattern_with_prg(n, l, r, ell, &mut prg)
}

pub fn sample_pattern_with_prg<P: Prg>(n: usize, l: usize, r: usize, ell: usize, prg: &mut P) -> Result<InputPattern, GridError> {
    let mut p = sample_pattern(n, l, r, ell, prg)?;
    p.ledger.push(RandomnessEntry { source: format!("pattern-seed/{}", prg.name()), bits: prg.seed_bits() as u64 });
    Ok(p)
}

/// `(L_f, bad_in, bad_out)` over the vertices of an N x N grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitSpec {
    pub n: usize,
    /// Forward lightcone of each input location, indexed by `row * N + col`.
    pub forward: Vec<Vec<GridPoint>>,
    pub bad_in: HashSet<GridPoint>,
    pub bad_out: HashSet<GridPoint>,
}

impl CircuitSpec {
    pub fn empty(n: usize) -> Self {
        CircuitSpec { n, forward: vec![Vec::new(); n * n], bad_in: HashSet::new(), bad_out: HashSet::new() }
    }

    pub fn lightcone(&self, u: &GridPoint) -> &[GridPoint] {
        &self.forward[u.index(self.n)]
    }
}

pub fn spec_is_bounded(spec: &CircuitSpec, b: usize, r_in: usize, r_out: usize) -> bool {
    spec.bad_in.len() <= r_in
        && spec.bad_out.len() <= r_out
        && (0..spec.n * spec.n).all(|i| spec.bad_in.contains(&GridPoint::from_index(i, spec.n)) || spec.forward[i].len() <= b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFlags {
    pub valid: bool,
    pub individually_causal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub pairs: Vec<PairFlags>,
    pub pattern_val: Vec<usize>,
    pub pattern_caus: Vec<usize>,
    pub is_causal: bool,
}

/// Evaluates conditions (a) to (d) per pair. `pattern_caus` is the set of
/// pairs in `pattern_val` that are individually causal with respect to the
/// sub-pattern `pattern_val`; `is_causal` asks the same of the full pattern.
pub fn classify_pattern(pattern: &InputPattern, spec: &CircuitSpec) -> Classification {
    let n = pattern.n;
    let stars: Vec<HashSet<GridPoint>> = pattern.pairs.iter().map(|p| p.star.vertices(n)).collect();
    let valid: Vec<bool> = pattern.pairs.iter().map(|p| p.inputs.iter().all(|u| !spec.bad_in.contains(u))).collect();
    // own[i]: conditions (a) and (c); hits[i][j]: some input of pair j reaches star i.
    let own: Vec<bool> = pattern
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let a = p.inputs.iter().enumerate().all(|(k, u)| {
                spec.lightcone(u).iter().all(|v| !stars[i].contains(v) || p.star.boxes[k].contains(v, n))
            });
            let c = stars[i].iter().all(|v| !spec.bad_out.contains(v));
            a && c
        })
        .collect();
    let r = pattern.pairs.len();
    let mut hits = vec![vec![false; r]; r];
    for (j, pj) in pattern.pairs.iter().enumerate() {
        for u in &pj.inputs {
            for v in spec.lightcone(u) {
                for i in 0..r {
                    if i != j && stars[i].contains(v) {
                        hits[i][j] = true;
                    }
                }
            }
        }
    }
    let causal_wrt = |i: usize, members: &[usize]| own[i] && members.iter().all(|&j| j == i || !hits[i][j]);
    let all: Vec<usize> = (0..r).collect();
    let pairs: Vec<PairFlags> = (0..r).map(|i| PairFlags { valid: valid[i], individually_causal: causal_wrt(i, &all) }).collect();
    let pattern_val: Vec<usize> = (0..r).filter(|&i| valid[i]).collect();
    let pattern_caus: Vec<usize> = pattern_val.iter().copied().filter(|&i| causal_wrt(i, &pattern_val)).collect();
    let is_causal = pairs.iter().all(|f| f.valid && f.individually_causal);
    Classification { pairs, pattern_val, pattern_caus, is_causal }
}
