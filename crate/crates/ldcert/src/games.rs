//! Stabilizer games: definitions, query sampling, win checks and
//! brute-force classical values.

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{commutation_phase, site_phase, PauliError, PauliLabel};

pub type Rational = Ratio<u64>;
pub type Query = Vec<usize>;
/// Per-player answer vectors over Z_d.
pub type Answers = Vec<Vec<u32>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("query {0:?} is not in the support of the game")]
    UnsupportedQuery(Query),
    #[error("malformed answer: {0}")]
    MalformedAnswer(String),
    #[error("invalid game: {0}")]
    Invalid(String),
    #[error("strategy space has {size} deterministic strategies, above the cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("bad rational string {0:?}")]
    BadRational(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportEntry {
    pub x: Query,
    pub w: Vec<u32>,
    pub b: u32,
    pub prob: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerGame {
    pub ell: usize,
    pub d: u32,
    pub k: Vec<usize>,
    pub m: Vec<usize>,
    /// `questions[j][q]` lists the `m[j]` observables of question `q` for player `j`.
    pub questions: Vec<Vec<Vec<PauliLabel>>>,
    pub support: Vec<SupportEntry>,
    /// Layered Clifford circuit preparing the honest state from |0..0>, on
    /// `sum k_j` qubits with player `j` holding a contiguous block.
    pub honest_prep: Option<Vec<Vec<PrepGate>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrepGate {
    H(usize),
    S(usize),
    Cnot(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotatedAnswer {
    pub answers: Vec<u32>,
    pub rotation: PauliLabel,
}

/// Per-player stretched qudit sets. `size[j]` is `|Gamma_j|`, and
/// `designated[j]` lists where the `k_j` original qudits sit inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StretchSpec {
    pub size: Vec<usize>,
    pub designated: Vec<Vec<usize>>,
}

impl StretchSpec {
    /// No stretching: every player keeps exactly its own qudits.
    pub fn trivial(game: &StabilizerGame) -> Self {
        StretchSpec { size: game.k.clone(), designated: game.k.iter().map(|&k| (0..k).collect()).collect() }
    }

    pub fn validate(&self, game: &StabilizerGame) -> Result<(), GameError> {
        if self.size.len() != game.ell || self.designated.len() != game.ell {
            return Err(GameError::Invalid("stretch spec has wrong player count".into()));
        }
        for j in 0..game.ell {
            let des = &self.designated[j];
            if des.len() != game.k[j] || self.size[j] < game.k[j] {
                return Err(GameError::Invalid(format!("player {j}: designated positions do not match k")));
            }
            let mut seen = des.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != des.len() || des.iter().any(|&p| p >= self.size[j]) {
                return Err(GameError::Invalid(format!("player {j}: designated positions invalid")));
            }
        }
        Ok(())
    }

    /// Embeds a `k_j`-qudit observable into the stretched set, identity elsewhere.
    pub fn stretch(&self, j: usize, obs: &PauliLabel) -> PauliLabel {
        let n = self.size[j];
        let mut x = vec![0; n];
        let mut z = vec![0; n];
        for (i, &pos) in self.designated[j].iter().enumerate() {
            x[pos] = obs.x_exps()[i];
            z[pos] = obs.z_exps()[i];
        }
        PauliLabel::new(obs.d(), x, z).expect("valid embedding")
    }

    /// `commutation_phase(&self.stretch(j, obs), rot)` without building the
    /// stretched label: sites outside the designated ones carry identity and
    /// contribute nothing. `rot` must have length `size[j]`.
    pub fn phase_against(&self, j: usize, obs: &PauliLabel, rot: &PauliLabel) -> u32 {
        let d = obs.d();
        self.designated[j]
            .iter()
            .enumerate()
            .map(|(i, &pos)| site_phase(d, obs.x_exps()[i], obs.z_exps()[i], rot.x_exps()[pos], rot.z_exps()[pos]))
            .fold(0, |acc, c| (acc + c) % d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerandomizedRepetitionSpec {
    pub r: usize,
    pub p: f64,
    pub gamma: f64,
    pub fixed_query: Query,
}

impl DerandomizedRepetitionSpec {
    pub fn validate(&self, game: &StabilizerGame) -> Result<(), GameError> {
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.gamma) {
            return Err(GameError::Invalid("p and gamma must lie in [0,1]".into()));
        }
        game.entry(&self.fixed_query)?;
        Ok(())
    }

    /// `ceil((1 - gamma) * s)` with a small tolerance against float noise.
    pub fn threshold(&self, s: usize) -> usize {
        let t = (1.0 - self.gamma) * s as f64;
        (t - 1e-9).ceil().max(0.0) as usize
    }
}

impl StabilizerGame {
    pub fn entry(&self, x: &[usize]) -> Result<&SupportEntry, GameError> {
        self.support.iter().find(|e| e.x == x).ok_or_else(|| GameError::UnsupportedQuery(x.to_vec()))
    }

    pub fn prep_depth(&self) -> Option<usize> {
        self.honest_prep.as_ref().map(|p| p.len())
    }

    /// First qubit of player `j` in the honest state.
    pub fn qubit_offset(&self, j: usize) -> usize {
        self.k[..j].iter().sum()
    }

    pub fn total_m(&self) -> usize {
        self.m.iter().sum()
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.k.len() != self.ell || self.m.len() != self.ell || self.questions.len() != self.ell {
            return Err(GameError::Invalid("per-player vectors have wrong length".into()));
        }
        let total: Rational = self.support.iter().map(|e| e.prob).sum();
        if total != Rational::from_integer(1) {
            return Err(GameError::Invalid(format!("query distribution sums to {total}")));
        }
        for e in &self.support {
            if e.x.len() != self.ell || e.w.len() != self.total_m() {
                return Err(GameError::Invalid(format!("support entry {:?} malformed", e.x)));
            }
            for (j, &q) in e.x.iter().enumerate() {
                if q >= self.questions[j].len() {
                    return Err(GameError::Invalid(format!("question {q} out of range for player {j}")));
                }
            }
        }
        for (j, qs) in self.questions.iter().enumerate() {
            for obs in qs {
                if obs.len() != self.m[j] {
                    return Err(GameError::Invalid(format!("player {j}: question has wrong arity")));
                }
                for a in obs {
                    if a.len() != self.k[j] || a.d() != self.d {
                        return Err(GameError::Invalid(format!("player {j}: observable shape")));
                    }
                    for b in obs {
                        if commutation_phase(a, b)? != 0 {
                            return Err(GameError::Invalid(format!("player {j}: observables do not commute")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Common denominator of the query distribution; one query costs
    /// `ceil(log2)` of it in uniform bits.
    pub fn query_denominator(&self) -> u64 {
        self.support.iter().fold(1u64, |acc, e| lcm(acc, *e.prob.denom()))
    }

    pub fn query_bits(&self) -> u32 {
        let d = self.query_denominator();
        if d <= 1 {
            0
        } else {
            u64::BITS - (d - 1).leading_zeros()
        }
    }

    pub fn sample_query<R: Rng + ?Sized>(&self, rng: &mut R) -> Query {
        let denom = self.query_denominator();
        let mut t = rng.gen_range(0..denom);
        for e in &self.support {
            let w = e.prob.numer() * (denom / e.prob.denom());
            if t < w {
                return e.x.clone();
            }
            t -= w;
        }
        self.support.last().expect("nonempty support").x.clone()
    }

    fn check_shape(&self, a: &Answers) -> Result<(), GameError> {
        if a.len() != self.ell {
            return Err(GameError::MalformedAnswer(format!("expected {} players, got {}", self.ell, a.len())));
        }
        for (j, aj) in a.iter().enumerate() {
            if aj.len() != self.m[j] {
                return Err(GameError::MalformedAnswer(format!("player {j}: expected {} answers", self.m[j])));
            }
        }
        Ok(())
    }

    pub fn check_win(&self, x: &[usize], a: &Answers) -> Result<bool, GameError> {
        self.check_shape(a)?;
        let e = self.entry(x)?;
        Ok(self.wins(e, a.iter().flatten().copied()))
    }

    fn wins(&self, e: &SupportEntry, flat: impl Iterator<Item = u32>) -> bool {
        let d = self.d as u64;
        let s: u64 = e.w.iter().zip(flat).map(|(w, a)| *w as u64 * (a as u64 % d)).sum();
        (s % d) as u32 == e.b
    }

    /// Win condition of the rotated (and possibly stretched) game: each
    /// answer is shifted back by the commutation phase of its stretched
    /// observable with the player's rotation string.
    pub fn check_win_rotated(
        &self,
        stretch: &StretchSpec,
        x: &[usize],
        ra: &[RotatedAnswer],
    ) -> Result<bool, GameError> {
        let corrected = self.unrotate(stretch, x, ra)?;
        self.check_win(x, &corrected)
    }

    /// Answers of the underlying plain game after removing the rotation.
    pub fn unrotate(&self, stretch: &StretchSpec, x: &[usize], ra: &[RotatedAnswer]) -> Result<Answers, GameError> {
        if ra.len() != self.ell || x.len() != self.ell {
            return Err(GameError::MalformedAnswer("wrong player count".into()));
        }
        let d = self.d;
        let mut out = Vec::with_capacity(self.ell);
        for j in 0..self.ell {
            let r = &ra[j];
            if r.rotation.len() != stretch.size[j] {
                return Err(GameError::Pauli(PauliError::LengthMismatch(r.rotation.len(), stretch.size[j])));
            }
            if r.rotation.d() != d {
                return Err(GameError::Pauli(PauliError::ModulusMismatch(r.rotation.d(), d)));
            }
            if r.answers.len() != self.m[j] {
                return Err(GameError::MalformedAnswer(format!("player {j}: expected {} answers", self.m[j])));
            }
            let obs = self
                .questions
                .get(j)
                .and_then(|qs| qs.get(x[j]))
                .ok_or_else(|| GameError::UnsupportedQuery(x.to_vec()))?;
            let mut aj = Vec::with_capacity(self.m[j]);
            for (t, o) in obs.iter().enumerate() {
                if o.d() != d || o.len() != stretch.designated[j].len() {
                    return Err(GameError::Pauli(PauliError::LengthMismatch(o.len(), stretch.designated[j].len())));
                }
                let c = stretch.phase_against(j, o, &r.rotation);
                aj.push((r.answers[t] % d + d - c) % d);
            }
            out.push(aj);
        }
        Ok(out)
    }

    /// Derandomized repeated game: at least `ceil((1-gamma)|S|)` of the
    /// instances in `s` must win; the rest are ignored.
    pub fn check_win_repeated(
        &self,
        spec: &DerandomizedRepetitionSpec,
        s: &[usize],
        x: &[Query],
        a: &[Answers],
    ) -> Result<bool, GameError> {
        if x.len() != spec.r || a.len() != spec.r {
            return Err(GameError::MalformedAnswer("repetition count mismatch".into()));
        }
        let mut wins = 0usize;
        for &i in s {
            if i >= spec.r {
                return Err(GameError::MalformedAnswer(format!("index {i} outside the repetition")));
            }
            if self.check_win(&x[i], &a[i])? {
                wins += 1;
            }
        }
        Ok(wins >= spec.threshold(s.len()))
    }

    /// Exact classical value by enumerating deterministic strategies of all
    /// players but the last; the last player best-responds per question.
    pub fn classical_value_bruteforce(&self, cap: u128) -> Result<Rational, GameError> {
        self.validate()?;
        let d = self.d as u128;
        let answers_per: Vec<u128> = self.m.iter().map(|&m| d.pow(m as u32)).collect();
        let mut size: u128 = 1;
        for j in 0..self.ell {
            let nq = self.questions[j].len() as u32;
            size = answers_per[j]
                .checked_pow(nq)
                .and_then(|v| size.checked_mul(v))
                .ok_or(GameError::CapExceeded { size: u128::MAX, cap })?;
        }
        if size > cap {
            return Err(GameError::CapExceeded { size, cap });
        }
        let last = self.ell - 1;
        let mut head_size: u128 = 1;
        for j in 0..last {
            head_size *= answers_per[j].pow(self.questions[j].len() as u32);
        }
        let decode = |mut code: u64, m: usize| -> Vec<u32> {
            (0..m)
                .map(|_| {
                    let v = (code % self.d as u64) as u32;
                    code /= self.d as u64;
                    v
                })
                .collect()
        };
        let last_answers: Vec<Vec<u32>> = (0..answers_per[last] as u64).map(|c| decode(c, self.m[last])).collect();
        let best = (0..head_size as u64)
            .into_par_iter()
            .map(|mut code| {
                // Decode the head strategies: answer table per player and question.
                let mut tables: Vec<Vec<Vec<u32>>> = Vec::with_capacity(last);
                for j in 0..last {
                    let ap = answers_per[j] as u64;
                    let t = (0..self.questions[j].len())
                        .map(|_| {
                            let c = code % ap;
                            code /= ap;
                            decode(c, self.m[j])
                        })
                        .collect();
                    tables.push(t);
                }
                let mut total = Rational::from_integer(0);
                for q in 0..self.questions[last].len() {
                    let mut best_q = Rational::from_integer(0);
                    for al in &last_answers {
                        let mut v = Rational::from_integer(0);
                        for e in self.support.iter().filter(|e| e.x[last] == q) {
                            let flat = (0..last).flat_map(|j| tables[j][e.x[j]].iter().copied()).chain(al.iter().copied());
                            if self.wins(e, flat) {
                                v += e.prob;
                            }
                        }
                        if v > best_q {
                            best_q = v;
                        }
                    }
                    total += best_q;
                }
                total
            })
            .max()
            .unwrap_or_else(|| Rational::from_integer(0));
        Ok(best)
    }

    pub fn to_def(&self) -> GameDef {
        GameDef {
            ell: self.ell,
            d: self.d,
            k: self.k.clone(),
            m: self.m.clone(),
            questions: self.questions.clone(),
            support: self
                .support
                .iter()
                .map(|e| SupportDef { x: e.x.clone(), w: e.w.clone(), b: e.b, prob: format_rational(&e.prob) })
                .collect(),
        }
    }

    pub fn from_def(def: &GameDef) -> Result<Self, GameError> {
        let support = def
            .support
            .iter()
            .map(|s| Ok(SupportEntry { x: s.x.clone(), w: s.w.clone(), b: s.b, prob: parse_rational(&s.prob)? }))
            .collect::<Result<Vec<_>, GameError>>()?;
        let g = StabilizerGame {
            ell: def.ell,
            d: def.d,
            k: def.k.clone(),
            m: def.m.clone(),
            questions: def.questions.clone(),
            support,
            honest_prep: None,
        };
        g.validate()?;
        Ok(g)
    }
}

/// Serialized game definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameDef {
    pub ell: usize,
    pub d: u32,
    pub k: Vec<usize>,
    pub m: Vec<usize>,
    pub questions: Vec<Vec<Vec<PauliLabel>>>,
    pub support: Vec<SupportDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportDef {
    pub x: Query,
    pub w: Vec<u32>,
    pub b: u32,
    pub prob: String,
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational, GameError> {
    let bad = || GameError::BadRational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
        None => (s.trim().parse().map_err(|_| bad())?, 1u64),
    };
    if d == 0 {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn label(s: &str) -> PauliLabel {
    // Two-qubit labels like "xz"; y is taken as X^1 Z^1.
    let mut x = Vec::new();
    let mut z = Vec::new();
    for c in s.chars() {
        let (a, b) = match c {
            'i' => (0, 0),
            'x' => (1, 0),
            'z' => (0, 1),
            'y' => (1, 1),
            _ => unreachable!(),
        };
        x.push(a);
        z.push(b);
    }
    PauliLabel::new(2, x, z).unwrap()
}

/// The three-player GHZ game with the Mermin query set. Question 0 asks
/// for X, question 1 for Y.
pub fn ghz_game() -> StabilizerGame {
    let qs = vec![vec![label("x")], vec![label("y")]];
    let support = [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]]
        .iter()
        .map(|x| SupportEntry {
            x: x.to_vec(),
            w: vec![1, 1, 1],
            b: if x == &[0, 0, 0] { 0 } else { 1 },
            prob: Rational::new(1, 4),
        })
        .collect();
    StabilizerGame {
        ell: 3,
        d: 2,
        k: vec![1; 3],
        m: vec![1; 3],
        questions: vec![qs.clone(), qs.clone(), qs],
        support,
        honest_prep: Some(vec![vec![PrepGate::H(1)], vec![PrepGate::Cnot(1, 0)], vec![PrepGate::Cnot(1, 2)]]),
    }
}

pub const MAGIC_SQUARE: [[&str; 3]; 3] = [["xi", "ix", "xx"], ["iz", "zi", "zz"], ["xz", "zx", "yy"]];

/// The Magic Square game. Questions 0..3 are rows, 3..6 are columns; each
/// carries the first two entries of its line.
pub fn magic_square_game() -> StabilizerGame {
    let mut qs = Vec::new();
    for i in 0..3 {
        qs.push(vec![label(MAGIC_SQUARE[i][0]), label(MAGIC_SQUARE[i][1])]);
    }
    for j in 0..3 {
        qs.push(vec![label(MAGIC_SQUARE[0][j]), label(MAGIC_SQUARE[1][j])]);
    }
    // Coefficients (over the two answer bits) and constant giving the value
    // of entry `pos` of a line.
    let row_entry = |pos: usize| -> ([u32; 2], u32) {
        match pos {
            0 => ([1, 0], 0),
            1 => ([0, 1], 0),
            _ => ([1, 1], 0),
        }
    };
    let col_entry = |pos: usize, col: usize| -> ([u32; 2], u32) {
        match pos {
            0 => ([1, 0], 0),
            1 => ([0, 1], 0),
            _ => ([1, 1], u32::from(col == 2)),
        }
    };
    let mut support = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let (rw, rc) = row_entry(j);
            let (cw, cc) = col_entry(i, j);
            // row player first, then column player, and the mirrored query.
            support.push(SupportEntry {
                x: vec![i, 3 + j],
                w: vec![rw[0], rw[1], cw[0], cw[1]],
                b: (rc + cc) % 2,
                prob: Rational::new(1, 18),
            });
            support.push(SupportEntry {
                x: vec![3 + j, i],
                w: vec![cw[0], cw[1], rw[0], rw[1]],
                b: (rc + cc) % 2,
                prob: Rational::new(1, 18),
            });
        }
    }
    StabilizerGame {
        ell: 2,
        d: 2,
        k: vec![2, 2],
        m: vec![2, 2],
        questions: vec![qs.clone(), qs],
        support,
        // One EPR pair per qubit position, shared between the players.
        honest_prep: Some(vec![vec![PrepGate::H(0), PrepGate::H(1)], vec![PrepGate::Cnot(0, 2), PrepGate::Cnot(1, 3)]]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn ghz_examples() {
        let g = ghz_game();
        g.validate().unwrap();
        assert_eq!(g.support.len(), 4);
        assert!(g.check_win(&[0, 0, 0], &vec![vec![0], vec![1], vec![1]]).unwrap());
        assert!(!g.check_win(&[0, 0, 0], &vec![vec![1], vec![1], vec![1]]).unwrap());
        assert!(g.check_win(&[1, 0, 1], &vec![vec![1], vec![0], vec![0]]).unwrap());
        assert!(g.check_win(&[0, 1, 0], &vec![vec![0], vec![0], vec![0]]).is_err());
        assert!(g.check_win(&[0, 0, 0], &vec![vec![0], vec![1]]).is_err());
    }

    #[test]
    fn classical_values() {
        assert_eq!(ghz_game().classical_value_bruteforce(1 << 20).unwrap(), Rational::new(3, 4));
        let ms = magic_square_game();
        ms.validate().unwrap();
        assert_eq!(ms.classical_value_bruteforce(1 << 30).unwrap(), Rational::new(8, 9));
        assert!(matches!(ms.classical_value_bruteforce(1000), Err(GameError::CapExceeded { .. })));
    }

    #[test]
    fn trivial_game_value_one() {
        let g = StabilizerGame {
            ell: 1,
            d: 2,
            k: vec![1],
            m: vec![1],
            questions: vec![vec![vec![PauliLabel::identity(2, 1)]]],
            support: vec![SupportEntry { x: vec![0], w: vec![0], b: 0, prob: Rational::new(1, 1) }],
            honest_prep: None,
        };
        assert_eq!(g.classical_value_bruteforce(100).unwrap(), Rational::from_integer(1));
    }

    #[test]
    fn point_mass_and_frequencies() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mut g = ghz_game();
        g.support = vec![SupportEntry { prob: Rational::new(1, 1), ..g.support[2].clone() }];
        for _ in 0..100 {
            assert_eq!(g.sample_query(&mut rng), vec![1, 0, 1]);
        }
        let g = ghz_game();
        let n = 100_000usize;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let x = g.sample_query(&mut rng);
            counts[g.support.iter().position(|e| e.x == x).unwrap()] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn repeated_threshold() {
        let g = ghz_game();
        let win = vec![vec![0], vec![0], vec![0]];
        let lose = vec![vec![1], vec![0], vec![0]];
        let mk = |r, gamma| DerandomizedRepetitionSpec { r, p: 1.0, gamma, fixed_query: vec![0, 0, 0] };
        let xs = vec![vec![0, 0, 0]; 10];
        let spec = mk(10, 0.0);
        let all: Vec<usize> = (0..10).collect();
        assert!(g.check_win_repeated(&spec, &all, &xs, &vec![win.clone(); 10]).unwrap());
        let mut a = vec![win.clone(); 10];
        a[3] = lose.clone();
        assert!(!g.check_win_repeated(&spec, &all, &xs, &a).unwrap());
        // The losing instance is ignored when outside S.
        let s: Vec<usize> = (0..10).filter(|&i| i != 3).collect();
        assert!(g.check_win_repeated(&spec, &s, &xs, &a).unwrap());
        let spec = mk(10, 0.2);
        a[5] = lose.clone();
        assert!(g.check_win_repeated(&spec, &all, &xs, &a).unwrap());
        a[6] = lose;
        assert!(!g.check_win_repeated(&spec, &all, &xs, &a).unwrap());
    }

    #[test]
    fn stretched_phase_matches_full_label() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for d in [2u32, 3, 5] {
            for _ in 0..200 {
                let k = rng.gen_range(1..=3);
                let size = k * rng.gen_range(1..=6);
                let mut pos: Vec<usize> = (0..size).collect();
                pos.sort_by_key(|_| rng.gen::<u32>());
                pos.truncate(k);
                let spec = StretchSpec { size: vec![size], designated: vec![pos] };
                let rnd = |n: usize, rng: &mut ChaCha20Rng| (0..n).map(|_| rng.gen_range(0..d)).collect::<Vec<u32>>();
                let obs = PauliLabel::new(d, rnd(k, &mut rng), rnd(k, &mut rng)).unwrap();
                let rot = PauliLabel::new(d, rnd(size, &mut rng), rnd(size, &mut rng)).unwrap();
                assert_eq!(spec.phase_against(0, &obs, &rot), commutation_phase(&spec.stretch(0, &obs), &rot).unwrap());
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let g = magic_square_game();
        let s = serde_json::to_string(&g.to_def()).unwrap();
        let back = StabilizerGame::from_def(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back.support, g.support);
        assert_eq!(parse_rational("3/4").unwrap(), Rational::new(3, 4));
        assert!(parse_rational("1/0").is_err());
    }
}
