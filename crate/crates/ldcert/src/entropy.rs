//! GHZ min-tradeoff function, the accumulated entropy bound, randomness
//! accounting and a Toeplitz extractor.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("winning probability {0} outside [7/8, 1]")]
    OutOfRange(f64),
    #[error("tangent point {0} must lie strictly inside (7/8, 1)")]
    TangentBoundary(f64),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("seed has {got} bits, need n + m - 1 = {need}")]
    SeedLength { got: usize, need: usize },
    #[error("output length {m} exceeds half the claimed min-entropy {claimed}")]
    TooLong { m: usize, claimed: f64 },
}

pub const OMEGA_MIN: f64 = 7.0 / 8.0;

fn inner(omega: f64) -> f64 {
    5.0 / 4.0 - omega + 3f64.sqrt() * ((omega - 0.5) * (1.0 - omega)).max(0.0).sqrt()
}

/// Bits of entropy per round certified by GHZ winning probability `omega`.
pub fn f_ghz(omega: f64) -> Result<f64, EntropyError> {
    if !(OMEGA_MIN..=1.0).contains(&omega) {
        return Err(EntropyError::OutOfRange(omega));
    }
    Ok(-inner(omega).log2())
}

/// Closed-form derivative of `f_ghz` on the open interval.
pub fn f_ghz_derivative(omega: f64) -> Result<f64, EntropyError> {
    if !(omega > OMEGA_MIN && omega < 1.0) {
        return Err(EntropyError::TangentBoundary(omega));
    }
    let h = (omega - 0.5) * (1.0 - omega);
    let dg = -1.0 + 3f64.sqrt() * (1.5 - 2.0 * omega) / (2.0 * h.sqrt());
    Ok(-dg / (inner(omega) * std::f64::consts::LN_2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub slope: f64,
    pub intercept: f64,
}

impl Affine {
    pub fn at(&self, q: f64) -> f64 {
        self.slope * q + self.intercept
    }
}

/// Tangent of `f_ghz` at `p_s`. Lies below the curve since `f_ghz` is convex.
pub fn min_tradeoff_tangent(p_s: f64) -> Result<Affine, EntropyError> {
    let slope = f_ghz_derivative(p_s)?;
    let f = f_ghz(p_s)?;
    Ok(Affine { slope, intercept: f - slope * p_s })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyParams {
    pub r: usize,
    pub p: f64,
    pub gamma: f64,
    pub eps: f64,
    /// Probability of the conditioning event, supplied by the caller.
    pub success_prob_floor: f64,
    /// Constant in front of the second-order term.
    pub c2: f64,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams { r: 1, p: 1.0, gamma: 0.0, eps: 0.01, success_prob_floor: 1.0, c2: 1.0 }
    }
}

impl EntropyParams {
    pub fn validate(&self) -> Result<(), EntropyError> {
        let bad = |s: &str| Err(EntropyError::Params(s.into()));
        if self.r == 0 {
            return bad("r must be positive");
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad("p must lie in (0, 1]");
        }
        if !(self.gamma >= 0.0 && 1.0 - self.gamma > OMEGA_MIN) {
            return bad("need 7/8 < 1 - gamma <= 1");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if !(self.success_prob_floor > 0.0 && self.success_prob_floor <= 1.0) {
            return bad("success probability floor must lie in (0, 1]");
        }
        if !(self.c2 >= 0.0 && self.c2.is_finite()) {
            return bad("C2 must be a nonnegative number");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EatBound {
    pub first_order_bits: f64,
    pub correction_bits: f64,
    /// `first - correction`, clamped to `[0, 2r]`.
    pub certified_bits: f64,
    /// Set when the correction swallows the first-order term.
    pub vacuous: bool,
}

/// `f_ghz(1 - gamma) r - C2 (r / sqrt p) sqrt(ln(1 / (eps delta)))`.
pub fn eat_lower_bound(params: &EntropyParams) -> Result<EatBound, EntropyError> {
    params.validate()?;
    let r = params.r as f64;
    let first = f_ghz(1.0 - params.gamma)? * r;
    let log_term = (1.0 / (params.eps * params.success_prob_floor)).ln();
    let correction = params.c2 * (r / params.p.sqrt()) * log_term.sqrt();
    let raw = first - correction;
    Ok(EatBound {
        first_order_bits: first,
        correction_bits: correction,
        certified_bits: raw.clamp(0.0, 2.0 * r),
        vacuous: raw <= 0.0,
    })
}

/// Bits consumed per source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomnessLedger {
    pub pattern_seed_bits: u64,
    pub test_set_bits: u64,
    pub query_bits: u64,
}

impl RandomnessLedger {
    pub fn total(&self) -> u64 {
        self.pattern_seed_bits + self.test_set_bits + self.query_bits
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractorInfo {
    pub kind: String,
    pub seed_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub consumed_bits: u64,
    pub certified_bits: f64,
    pub expansion_ratio: f64,
    pub first_order_bits: f64,
    pub correction_bits: f64,
    pub vacuous: bool,
    pub constants: Constants,
    pub extractor: ExtractorInfo,
    pub ledger: RandomnessLedger,
    /// Rate used for the main randomness statement.
    pub rate_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "C2")]
    pub c2: f64,
}

/// Toeplitz seed cost for `raw_bits` in and `out_bits` out.
pub fn toeplitz_seed_bits(raw_bits: usize, out_bits: usize) -> u64 {
    if out_bits == 0 {
        0
    } else {
        (raw_bits + out_bits - 1) as u64
    }
}

pub fn expansion_report(ledger: &RandomnessLedger, params: &EntropyParams, raw_bits: usize) -> Result<ExpansionReport, EntropyError> {
    let bound = eat_lower_bound(params)?;
    let out_bits = (bound.certified_bits / 2.0).floor() as usize;
    let seed_bits = toeplitz_seed_bits(raw_bits, out_bits);
    let consumed = ledger.total() + seed_bits;
    Ok(ExpansionReport {
        consumed_bits: consumed,
        certified_bits: bound.certified_bits,
        expansion_ratio: if consumed == 0 { f64::INFINITY } else { bound.certified_bits / consumed as f64 },
        first_order_bits: bound.first_order_bits,
        correction_bits: bound.correction_bits,
        vacuous: bound.vacuous,
        constants: Constants { c2: params.c2 },
        extractor: ExtractorInfo { kind: "toeplitz".into(), seed_bits },
        ledger: ledger.clone(),
        rate_note: "per-round rate f_ghz(1 - gamma) with the second-order correction above".into(),
    })
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Toeplitz hash `{0,1}^n -> {0,1}^m` with `T[i][j] = seed[i + n - 1 - j]`.
#[derive(Debug, Clone)]
pub struct Toeplitz {
    n: usize,
    m: usize,
    /// Seed bits packed little-endian into words.
    seed: Vec<u64>,
}

fn pack(bits: &[bool]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64).max(1)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

/// Bits `start..start+len` of a packed string, reversed, packed again.
fn window_reversed(words: &[u64], start: usize, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len.div_ceil(64).max(1)];
    for j in 0..len {
        let pos = start + len - 1 - j;
        if (words[pos / 64] >> (pos % 64)) & 1 == 1 {
            out[j / 64] |= 1 << (j % 64);
        }
    }
    out
}

impl Toeplitz {
    pub fn new(seed: &[bool], n: usize, m: usize) -> Result<Self, EntropyError> {
        let need = if m == 0 { 0 } else { n + m - 1 };
        if seed.len() != need {
            return Err(EntropyError::SeedLength { got: seed.len(), need });
        }
        Ok(Toeplitz { n, m, seed: pack(seed) })
    }

    fn rows(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.m).map(move |i| window_reversed(&self.seed, i, self.n))
    }

    pub fn hash(&self, raw: &[bool]) -> Vec<bool> {
        assert_eq!(raw.len(), self.n, "raw length");
        let x = pack(raw);
        self.rows().map(|row| row.iter().zip(&x).map(|(a, b)| (a & b).count_ones()).sum::<u32>() & 1 == 1).collect()
    }

    /// Precomputed rows for repeated hashing of inputs with `n <= 64`.
    pub fn small(&self) -> Option<SmallToeplitz> {
        (self.n <= 64 && self.m <= 64).then(|| SmallToeplitz { rows: self.rows().map(|r| r[0]).collect() })
    }
}

#[derive(Debug, Clone)]
pub struct SmallToeplitz {
    rows: Vec<u64>,
}

impl SmallToeplitz {
    /// `raw` bit `j` is bit `j` of the word; output bit `i` is bit `i`.
    pub fn hash(&self, raw: u64) -> u64 {
        self.rows.iter().enumerate().fold(0, |acc, (i, r)| acc | (((r & raw).count_ones() as u64) & 1) << i)
    }
}

/// Extracts `m` bits from `raw` with a Toeplitz seed of `n + m - 1` bits.
/// `claimed_min_entropy` must be at least `2m`.
pub fn extract(raw: &[bool], seed: &[bool], m: usize, claimed_min_entropy: f64) -> Result<Vec<bool>, EntropyError> {
    if (2 * m) as f64 > claimed_min_entropy {
        return Err(EntropyError::TooLong { m, claimed: claimed_min_entropy });
    }
    Ok(Toeplitz::new(seed, raw.len(), m)?.hash(raw))
}

pub fn bits_to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().enumerate().fold(0u8, |a, (i, &b)| a | (b as u8) << i);
            char::from_digit(v as u32, 16).unwrap()
        })
        .collect()
}

/// Inverse of `bits_to_hex` for a known bit count.
pub fn hex_to_bits(s: &str, len: usize) -> Option<Vec<bool>> {
    let mut out = Vec::with_capacity(len);
    for ch in s.trim().chars() {
        let v = ch.to_digit(16)?;
        for i in 0..4 {
            out.push((v >> i) & 1 == 1);
        }
    }
    if out.len() < len || out[len..].iter().any(|&b| b) {
        return None;
    }
    out.truncate(len);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        assert!((f_ghz(1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((f_ghz(0.875).unwrap() + (0.75f64).log2()).abs() < 1e-12);
        // 2 - O(sqrt(eps)) near the top: at eps = 1e-3 the value is about 1.787.
        let v = f_ghz(0.999).unwrap();
        assert!(v > 1.78 && v < 1.79, "{v}");
        let w = f_ghz(1.0 - 1e-6).unwrap();
        assert!((2.0 - w) / 1e-3 < 10.0);
        assert!(f_ghz(0.8).is_err());
        assert!(min_tradeoff_tangent(1.0).is_err());
    }

    #[test]
    fn slope_matches_finite_difference() {
        let h = 1e-6;
        let d = (f_ghz(0.95 + h).unwrap() - f_ghz(0.95 - h).unwrap()) / (2.0 * h);
        let a = f_ghz_derivative(0.95).unwrap();
        assert!(((a - d) / d).abs() < 1e-6, "{a} {d}");
    }

    #[test]
    fn tangent_below_curve() {
        for &ps in &[0.88, 0.9, 0.95, 0.99] {
            let g = min_tradeoff_tangent(ps).unwrap();
            assert!((g.at(ps) - f_ghz(ps).unwrap()).abs() < 1e-12);
            for i in 0..=1000 {
                let q = OMEGA_MIN + (1.0 - OMEGA_MIN) * i as f64 / 1000.0;
                assert!(g.at(q) <= f_ghz(q).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn eat_degenerate_and_expansion() {
        let p = EntropyParams { r: 100, c2: 0.0, ..Default::default() };
        let b = eat_lower_bound(&p).unwrap();
        assert!((b.certified_bits - 200.0).abs() < 1e-9);
        let ledger = RandomnessLedger { pattern_seed_bits: 300, test_set_bits: 0, query_bits: 0 };
        let rep = expansion_report(&ledger, &p, 0).unwrap();
        // No raw bits means no extractor seed here.
        assert_eq!(rep.consumed_bits, 300 + toeplitz_seed_bits(0, 100));
        let rep = expansion_report(&ledger, &EntropyParams { r: 100, c2: 0.0, ..Default::default() }, 1).unwrap();
        assert_eq!(rep.consumed_bits, 400);
        assert!((rep.expansion_ratio - 0.5).abs() < 1e-12);
        let vac = eat_lower_bound(&EntropyParams { r: 10, p: 0.01, ..Default::default() }).unwrap();
        assert!(vac.vacuous && vac.certified_bits == 0.0);
    }

    #[test]
    fn toeplitz_contract() {
        let raw: Vec<bool> = (0..12).map(|i| i % 3 == 0).collect();
        let s1: Vec<bool> = (0..15).map(|i| i % 2 == 0).collect();
        let s2: Vec<bool> = (0..15).map(|i| i % 5 == 1).collect();
        assert!(extract(&raw, &[], 0, 0.0).unwrap().is_empty());
        assert_eq!(extract(&raw, &s1, 4, 8.0).unwrap(), extract(&raw, &s1, 4, 8.0).unwrap());
        assert_ne!(extract(&raw, &s1, 4, 8.0).unwrap(), extract(&raw, &s2, 4, 8.0).unwrap());
        assert!(matches!(extract(&raw, &s1[..14], 4, 8.0), Err(EntropyError::SeedLength { .. })));
        assert!(matches!(extract(&raw, &s1, 4, 7.0), Err(EntropyError::TooLong { .. })));
        let t = Toeplitz::new(&s1, 12, 4).unwrap();
        let word = raw.iter().enumerate().fold(0u64, |a, (i, &b)| a | (b as u64) << i);
        let h = t.small().unwrap().hash(word);
        let bits: Vec<bool> = (0..4).map(|i| (h >> i) & 1 == 1).collect();
        assert_eq!(bits, t.hash(&raw));
        assert_eq!(hex_to_bits(&bits_to_hex(&s2), 15), Some(s2));
    }
}
