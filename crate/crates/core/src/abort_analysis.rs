//! When does the simulator survive?
//!
//! The simulator draws `X = (x', x_1..x_n)` uniformly from `[0, m)^(n+1)` and
//! `k` uniformly from `[0, n * 2^ell)`, and defines
//!
//! ```text
//! S(v) = x' + sum v_i x_i        F(v) = S(v) - m k
//! ```
//!
//! It survives a run with key queries `v^1..v^q` and challenge `v*` iff
//! `F(v*) = 0` over the integers and `F(v^j) != 0 (mod m)` for every query.
//! The relaxed condition drops `k` and asks only `F(v*) = 0 (mod m)`.
//!
//! This module evaluates both indicators, counts them exactly by enumeration
//! when the state space is small enough, falls back to Monte Carlo
//! otherwise, and reports how the survival probability compares with the
//! lower bound `lambda = 1 / (4 q 2^ell n)`.
//!
//! The bound is derived from a pairwise-independence claim about `S mod m`
//! that only holds when the two identities differ in a coordinate coprime
//! to `m`. Reports therefore always carry the per-query conditional
//! collision rates, so deviations are visible instead of averaged away.

use std::fmt::Write as _;

use num_rational::{BigRational, Ratio};
use num_traits::ToPrimitive;
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::ibe::EncodedIdentity;
use crate::reduction::lambda;

/// Largest state space enumerated exactly.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("enumeration needs {size} points, above the limit of {limit}")]
    Infeasible { size: u128, limit: u128 },
    #[error("identity {index} has {actual} blocks, expected {expected}")]
    IdentityLength { index: usize, expected: usize, actual: usize },
    #[error("identity {index} has a block >= 2^{ell}")]
    BlockOutOfRange { index: usize, ell: u32 },
    #[error("{count} queries exceed the query budget q = {q}")]
    TooManyQueries { count: usize, q: usize },
    #[error("challenge identity is among the queries")]
    ChallengeQueried,
    #[error("modulus m must be at least 2")]
    BadModulus,
    #[error("the two identities must differ")]
    IdenticalIdentities,
    #[error("parameters must be positive")]
    ZeroParameter,
    #[error("only {available} distinct identities exist, {needed} needed")]
    TooFewIdentities { available: u128, needed: u128 },
}

impl AsRef<[u64]> for EncodedIdentity {
    fn as_ref(&self) -> &[u64] {
        self.blocks()
    }
}

/// `x' + sum v_i x_i`, the `k`-free part of `F(v)`.
pub fn identity_sum(x_prime: u64, x: &[u64], v: &[u64]) -> u128 {
    v.iter()
        .zip(x)
        .fold(x_prime as u128, |acc, (&vi, &xi)| acc + vi as u128 * xi as u128)
}

fn queries_avoid_zero<Q: AsRef<[u64]>>(x_prime: u64, x: &[u64], queries: &[Q], m: u64) -> bool {
    queries
        .iter()
        .all(|v| identity_sum(x_prime, x, v.as_ref()) % m as u128 != 0)
}

/// Abort indicator of the simulator: `false` (survive) iff `F(v*) = 0` over
/// the integers and every query has `F(v^j) != 0 (mod m)`.
pub fn abort_indicator<Q: AsRef<[u64]>>(
    x_prime: u64,
    x: &[u64],
    queries: &[Q],
    v_star: &[u64],
    k: u64,
    m: u64,
) -> bool {
    let target = m as u128 * k as u128;
    let survives =
        identity_sum(x_prime, x, v_star) == target && queries_avoid_zero(x_prime, x, queries, m);
    !survives
}

/// The `k`-free relaxation: `false` iff `F(v*) = 0 (mod m)` and every query
/// has `F(v^j) != 0 (mod m)`.
pub fn abort_indicator_mod_m<Q: AsRef<[u64]>>(
    x_prime: u64,
    x: &[u64],
    queries: &[Q],
    v_star: &[u64],
    m: u64,
) -> bool {
    let survives = identity_sum(x_prime, x, v_star) % m as u128 == 0
        && queries_avoid_zero(x_prime, x, queries, m);
    !survives
}

/// The `k` making `F(v*) = 0` over the integers, when `S(v*)` is a multiple
/// of `m`. Such a `k` is unique and always below `n * 2^ell` because
/// `S(v*) < m n 2^ell`.
pub fn unique_k(x_prime: u64, x: &[u64], v_star: &[u64], m: u64, ell: u32, n: usize) -> Option<u64> {
    let s = identity_sum(x_prime, x, v_star);
    if s % m as u128 != 0 {
        return None;
    }
    let k = s / m as u128;
    (k < n as u128 * (1u128 << ell)).then_some(k as u64)
}

/// Number of `k` in `[0, n * 2^ell)` for which the simulator survives a
/// fixed `X`, found by trying every `k`.
pub fn count_surviving_k<Q: AsRef<[u64]>>(
    x_prime: u64,
    x: &[u64],
    queries: &[Q],
    v_star: &[u64],
    m: u64,
    ell: u32,
    n: usize,
) -> u64 {
    (0..k_range(ell, n))
        .filter(|&k| !abort_indicator(x_prime, x, queries, v_star, k, m))
        .count() as u64
}

fn k_range(ell: u32, n: usize) -> u64 {
    (n as u64) << ell
}

fn checked_pow(base: u64, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base as u128))
}

/// Size of the full `(X, k)` state space, `m^(n+1) * n * 2^ell`.
pub fn enumeration_size(m: u64, n: usize, ell: u32) -> Option<u128> {
    checked_pow(m, n + 1)?.checked_mul(k_range(ell, n) as u128)
}

fn ensure_feasible(size: Option<u128>) -> Result<u128, AnalysisError> {
    match size {
        Some(s) if s <= ENUMERATION_LIMIT => Ok(s),
        Some(s) => Err(AnalysisError::Infeasible {
            size: s,
            limit: ENUMERATION_LIMIT,
        }),
        None => Err(AnalysisError::Infeasible {
            size: u128::MAX,
            limit: ENUMERATION_LIMIT,
        }),
    }
}

/// Visits every `X` in `[0, m)^(n+1)`.
fn for_each_assignment(m: u64, n: usize, mut visit: impl FnMut(u64, &[u64])) {
    let mut digits = vec![0u64; n + 1];
    loop {
        visit(digits[0], &digits[1..]);
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return;
            }
            digits[pos] += 1;
            if digits[pos] < m {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

fn sample_assignment<R: RngCore + ?Sized>(m: u64, n: usize, rng: &mut R) -> (u64, Vec<u64>) {
    let x_prime = rng.gen_range(0..m);
    let x = (0..n).map(|_| rng.gen_range(0..m)).collect();
    (x_prime, x)
}

/// Exact survival counts from one pass over the state space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactCounts {
    /// `(X, k)` points where the simulator survives.
    pub survive: u64,
    /// Size of the `(X, k)` space.
    pub total: u64,
    /// `X` points where the relaxed indicator survives.
    pub survive_mod_m: u64,
    /// Size of the `X` space.
    pub total_x: u64,
    /// `X` points with `S(v*) = 0 (mod m)`.
    pub challenge_zero: u64,
    /// Per query, `X` points with `S(v*) = 0` and `S(v^j) = 0 (mod m)`.
    pub query_collisions: Vec<u64>,
}

impl ExactCounts {
    pub fn survival(&self) -> Ratio<u64> {
        Ratio::new(self.survive, self.total)
    }

    pub fn survival_mod_m(&self) -> Ratio<u64> {
        Ratio::new(self.survive_mod_m, self.total_x)
    }

    pub fn challenge_zero_probability(&self) -> Ratio<u64> {
        Ratio::new(self.challenge_zero, self.total_x)
    }

    /// `Pr[S(v^j) = 0 (mod m) | S(v*) = 0 (mod m)]` per query.
    pub fn conditional_collision_rates(&self) -> Vec<Ratio<u64>> {
        self.query_collisions
            .iter()
            .map(|&c| {
                if self.challenge_zero == 0 {
                    Ratio::new(0, 1)
                } else {
                    Ratio::new(c, self.challenge_zero)
                }
            })
            .collect()
    }
}

/// Enumerates every `(X, k)` and counts survivals, trying each `k`
/// explicitly.
pub fn exact_counts<Q: AsRef<[u64]>>(
    queries: &[Q],
    v_star: &[u64],
    m: u64,
    ell: u32,
    n: usize,
) -> Result<ExactCounts, AnalysisError> {
    let total = ensure_feasible(enumeration_size(m, n, ell))? as u64;
    let mut counts = ExactCounts {
        survive: 0,
        total,
        survive_mod_m: 0,
        total_x: 0,
        challenge_zero: 0,
        query_collisions: vec![0; queries.len()],
    };
    for_each_assignment(m, n, |x_prime, x| {
        counts.total_x += 1;
        counts.survive += count_surviving_k(x_prime, x, queries, v_star, m, ell, n);
        if !abort_indicator_mod_m(x_prime, x, queries, v_star, m) {
            counts.survive_mod_m += 1;
        }
        if identity_sum(x_prime, x, v_star) % m as u128 == 0 {
            counts.challenge_zero += 1;
            for (j, v) in queries.iter().enumerate() {
                if identity_sum(x_prime, x, v.as_ref()) % m as u128 == 0 {
                    counts.query_collisions[j] += 1;
                }
            }
        }
    });
    Ok(counts)
}

/// Exact `Pr[S(v) = a and S(v') = a' (mod m)]` over uniform `X`, by
/// enumerating all `m^(n+1)` assignments.
pub fn lemma1_exact(
    v: &[u64],
    v_prime: &[u64],
    a: u64,
    a_prime: u64,
    m: u64,
    n: usize,
) -> Result<Ratio<u64>, AnalysisError> {
    if m < 2 {
        return Err(AnalysisError::BadModulus);
    }
    if v == v_prime {
        return Err(AnalysisError::IdenticalIdentities);
    }
    for (index, id) in [v, v_prime].iter().enumerate() {
        if id.len() != n {
            return Err(AnalysisError::IdentityLength {
                index,
                expected: n,
                actual: id.len(),
            });
        }
    }
    let total = ensure_feasible(checked_pow(m, n + 1))? as u64;
    let mut hits = 0u64;
    for_each_assignment(m, n, |x_prime, x| {
        if identity_sum(x_prime, x, v) % m as u128 == (a % m) as u128
            && identity_sum(x_prime, x, v_prime) % m as u128 == (a_prime % m) as u128
        {
            hits += 1;
        }
    });
    Ok(Ratio::new(hits, total))
}

/// A pair of identities whose joint distribution of `(S(v), S(v')) mod m`
/// is not uniform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma1Deviation {
    pub v: Vec<u64>,
    pub v_prime: Vec<u64>,
    /// Smallest and largest cell probability over all `(a, a')`.
    pub min: Ratio<u64>,
    pub max: Ratio<u64>,
}

/// Exhaustive check of the pairwise claim over every ordered pair of
/// distinct identities and every target `(a, a')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma1Sweep {
    pub m: u64,
    pub n: usize,
    pub ell: u32,
    pub coprime_pairs: u64,
    /// Coprime pairs where some cell differs from `1/m^2`; the claim says
    /// this is zero.
    pub coprime_failures: u64,
    pub other_pairs: u64,
    pub other_deviations: Vec<Lemma1Deviation>,
}

impl Lemma1Sweep {
    pub fn holds_where_claimed(&self) -> bool {
        self.coprime_failures == 0
    }

    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "m={}", self.m);
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "ell={}", self.ell);
        let _ = writeln!(out, "target=1/{}", self.m * self.m);
        let _ = writeln!(out, "coprime_pairs={}", self.coprime_pairs);
        let _ = writeln!(out, "coprime_failures={}", self.coprime_failures);
        let _ = writeln!(out, "other_pairs={}", self.other_pairs);
        let _ = writeln!(out, "other_deviating_pairs={}", self.other_deviations.len());
        for d in self.other_deviations.iter().take(8) {
            let _ = writeln!(
                out,
                "deviation v={:?} v_prime={:?} min={} max={}",
                d.v, d.v_prime, d.min, d.max
            );
        }
        let _ = writeln!(out, "pass={}", self.holds_where_claimed());
        out
    }
}

fn all_identities(ell: u32, n: usize) -> Vec<Vec<u64>> {
    let base = 1u64 << ell;
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..base).map(move |b| {
                    let mut v = prefix.clone();
                    v.push(b);
                    v
                })
            })
            .collect();
    }
    out
}

/// Runs the pairwise check for every ordered pair `v != v'` of identities
/// with `n` blocks of `ell` bits. Work is `4^(ell n) m^(n+1)`.
pub fn lemma1_sweep(m: u64, n: usize, ell: u32) -> Result<Lemma1Sweep, AnalysisError> {
    if m < 2 {
        return Err(AnalysisError::BadModulus);
    }
    if n == 0 || ell == 0 {
        return Err(AnalysisError::ZeroParameter);
    }
    let ids = 1u128.checked_shl(ell * n as u32).filter(|&c| c <= u32::MAX as u128);
    let work = ids.and_then(|c| c.checked_mul(c)).and_then(|c| c.checked_mul(checked_pow(m, n + 1)?));
    let total = ensure_feasible(checked_pow(m, n + 1))? as u64;
    ensure_feasible(work)?;

    let ids = all_identities(ell, n);
    let mm = m as usize;
    let target = Ratio::new(1u64, m * m);
    let mut sweep = Lemma1Sweep {
        m,
        n,
        ell,
        coprime_pairs: 0,
        coprime_failures: 0,
        other_pairs: 0,
        other_deviations: Vec::new(),
    };
    let mut cells = vec![0u64; mm * mm];
    for v in &ids {
        for w in &ids {
            if v == w {
                continue;
            }
            cells.iter_mut().for_each(|c| *c = 0);
            for_each_assignment(m, n, |x_prime, x| {
                let a = (identity_sum(x_prime, x, v) % m as u128) as usize;
                let b = (identity_sum(x_prime, x, w) % m as u128) as usize;
                cells[a * mm + b] += 1;
            });
            let min = Ratio::new(*cells.iter().min().unwrap(), total);
            let max = Ratio::new(*cells.iter().max().unwrap(), total);
            let uniform = min == target && max == target;
            if has_coprime_difference(v, w, m) {
                sweep.coprime_pairs += 1;
                sweep.coprime_failures += u64::from(!uniform);
            } else {
                sweep.other_pairs += 1;
                if !uniform {
                    sweep.other_deviations.push(Lemma1Deviation {
                        v: v.clone(),
                        v_prime: w.clone(),
                        min,
                        max,
                    });
                }
            }
        }
    }
    Ok(sweep)
}

/// Exact `Pr[S(v*) = 0 (mod m)]`.
pub fn challenge_zero_probability(v_star: &[u64], m: u64, n: usize) -> Result<Ratio<u64>, AnalysisError> {
    if m < 2 {
        return Err(AnalysisError::BadModulus);
    }
    let total = ensure_feasible(checked_pow(m, n + 1))? as u64;
    let mut hits = 0u64;
    for_each_assignment(m, n, |x_prime, x| {
        if identity_sum(x_prime, x, v_star) % m as u128 == 0 {
            hits += 1;
        }
    });
    Ok(Ratio::new(hits, total))
}

/// `true` when some coordinate difference of `v` and `v'` is a unit mod `m`,
/// the condition under which the pairwise-independence claim holds.
pub fn has_coprime_difference(v: &[u64], v_prime: &[u64], m: u64) -> bool {
    v.iter().zip(v_prime).any(|(&a, &b)| gcd(a.abs_diff(b) % m, m) == 1)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A fixed set of key queries and a challenge identity, over which the
/// simulator's randomness is analysed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbortExperiment {
    q: usize,
    ell: u32,
    n: usize,
    m: u64,
    queries: Vec<Vec<u64>>,
    v_star: Vec<u64>,
    trials: u64,
}

impl AbortExperiment {
    /// Experiment with the simulator's modulus `m = 2q`.
    pub fn new(
        q: usize,
        ell: u32,
        n: usize,
        queries: Vec<Vec<u64>>,
        v_star: Vec<u64>,
        trials: u64,
    ) -> Result<Self, AnalysisError> {
        if q == 0 || ell == 0 || n == 0 || ell > 63 {
            return Err(AnalysisError::ZeroParameter);
        }
        if queries.len() > q {
            return Err(AnalysisError::TooManyQueries {
                count: queries.len(),
                q,
            });
        }
        for (index, id) in queries.iter().chain(std::iter::once(&v_star)).enumerate() {
            if id.len() != n {
                return Err(AnalysisError::IdentityLength {
                    index,
                    expected: n,
                    actual: id.len(),
                });
            }
            if id.iter().any(|&b| b >> ell != 0) {
                return Err(AnalysisError::BlockOutOfRange { index, ell });
            }
        }
        if queries.contains(&v_star) {
            return Err(AnalysisError::ChallengeQueried);
        }
        Ok(AbortExperiment {
            q,
            ell,
            n,
            m: 2 * q as u64,
            queries,
            v_star,
            trials,
        })
    }

    /// `q` distinct queries and a distinct challenge, uniformly drawn.
    pub fn random<R: RngCore + ?Sized>(
        q: usize,
        ell: u32,
        n: usize,
        trials: u64,
        rng: &mut R,
    ) -> Result<Self, AnalysisError> {
        let ids = distinct_identities(q + 1, ell, n, rng)?;
        let (v_star, queries) = ids.split_last().expect("q + 1 >= 1 identities");
        Self::new(q, ell, n, queries.to_vec(), v_star.clone(), trials)
    }

    /// Replaces `m = 2q` by another modulus; used to probe odd moduli.
    pub fn with_modulus(mut self, m: u64) -> Result<Self, AnalysisError> {
        if m < 2 {
            return Err(AnalysisError::BadModulus);
        }
        self.m = m;
        Ok(self)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn queries(&self) -> &[Vec<u64>] {
        &self.queries
    }

    pub fn v_star(&self) -> &[u64] {
        &self.v_star
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn lambda(&self) -> BigRational {
        lambda(self.q as u64, self.ell, self.n as u64)
    }

    /// Exhaustive enumeration is used when the `(X, k)` space has at most
    /// [`ENUMERATION_LIMIT`] points.
    pub fn is_enumerable(&self) -> bool {
        matches!(enumeration_size(self.m, self.n, self.ell), Some(s) if s <= ENUMERATION_LIMIT)
    }

    pub fn exact_counts(&self) -> Result<ExactCounts, AnalysisError> {
        exact_counts(&self.queries, &self.v_star, self.m, self.ell, self.n)
    }

    fn k_range(&self) -> u64 {
        k_range(self.ell, self.n)
    }
}

/// Draws `count` distinct identities of `n` blocks of `ell` bits.
pub fn distinct_identities<R: RngCore + ?Sized>(
    count: usize,
    ell: u32,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<u64>>, AnalysisError> {
    let available = 1u128
        .checked_shl(ell * n as u32)
        .filter(|_| ell as u64 * (n as u64) < 128)
        .unwrap_or(u128::MAX);
    if (count as u128) > available {
        return Err(AnalysisError::TooFewIdentities {
            available,
            needed: count as u128,
        });
    }
    let mut out: Vec<Vec<u64>> = Vec::with_capacity(count);
    while out.len() < count {
        let id: Vec<u64> = (0..n)
            .map(|_| if ell == 64 { rng.gen() } else { rng.gen_range(0..1u64 << ell) })
            .collect();
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(out)
}

/// Monte Carlo estimate of the survival probability over fresh `(X, k)`.
pub fn estimate_survival<Q: AsRef<[u64]>, R: RngCore + ?Sized>(
    queries: &[Q],
    v_star: &[u64],
    m: u64,
    ell: u32,
    n: usize,
    samples: u64,
    rng: &mut R,
) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    let k_max = k_range(ell, n);
    let hits = (0..samples)
        .filter(|_| {
            let (x_prime, x) = sample_assignment(m, n, rng);
            let k = rng.gen_range(0..k_max);
            !abort_indicator(x_prime, &x, queries, v_star, k, m)
        })
        .count();
    hits as f64 / samples as f64
}

fn binomial_std_error(p: f64, samples: u64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / samples as f64).sqrt()
}

/// Both sides of `Pr[survive] = Pr[survive mod m] / (n 2^ell)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport {
    pub lhs: f64,
    pub rhs: f64,
    pub scale: u64,
    pub exact: Option<(Ratio<u64>, Ratio<u64>)>,
    pub lhs_std_error: f64,
    pub rhs_std_error: f64,
}

impl DecompositionReport {
    /// Exact equality when enumerated, otherwise agreement within three
    /// combined standard errors.
    pub fn holds(&self) -> bool {
        match &self.exact {
            Some((lhs, rhs)) => *lhs * self.scale == *rhs,
            None => {
                let sigma = (self.lhs_std_error.powi(2)
                    + (self.rhs_std_error / self.scale as f64).powi(2))
                .sqrt();
                (self.lhs - self.rhs / self.scale as f64).abs() <= 3.0 * sigma
            }
        }
    }
}

/// Compares the survival probability with the relaxed one scaled by the
/// number of possible `k`. Exact when enumerable.
pub fn decomposition_check<R: RngCore + ?Sized>(
    experiment: &AbortExperiment,
    rng: &mut R,
) -> DecompositionReport {
    let scale = experiment.k_range();
    if experiment.is_enumerable() {
        let counts = experiment.exact_counts().expect("enumerable");
        let (lhs, rhs) = (counts.survival(), counts.survival_mod_m());
        return DecompositionReport {
            lhs: ratio_f64(&lhs),
            rhs: ratio_f64(&rhs),
            scale,
            exact: Some((lhs, rhs)),
            lhs_std_error: 0.0,
            rhs_std_error: 0.0,
        };
    }
    let trials = experiment.trials;
    let (m, n) = (experiment.m, experiment.n);
    let lhs = estimate_survival(
        &experiment.queries,
        &experiment.v_star,
        m,
        experiment.ell,
        n,
        trials,
        rng,
    );
    let rhs_hits = (0..trials)
        .filter(|_| {
            let (x_prime, x) = sample_assignment(m, n, rng);
            !abort_indicator_mod_m(x_prime, &x, &experiment.queries, &experiment.v_star, m)
        })
        .count();
    let rhs = if trials == 0 { 0.0 } else { rhs_hits as f64 / trials as f64 };
    DecompositionReport {
        lhs,
        rhs,
        scale,
        exact: None,
        lhs_std_error: binomial_std_error(lhs, trials),
        rhs_std_error: binomial_std_error(rhs, trials),
    }
}

fn ratio_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Outcome of comparing the survival probability with `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub q: usize,
    pub ell: u32,
    pub n: usize,
    pub m: u64,
    pub exact: bool,
    pub trials: u64,
    pub estimate: f64,
    pub exact_value: Option<Ratio<u64>>,
    pub std_error: f64,
    pub lambda: BigRational,
    pub pass: bool,
    /// `Pr[S(v^j) = 0 (mod m) | S(v*) = 0 (mod m)]` per query.
    pub conditional_collision_rates: Vec<f64>,
    /// `Pr[no query collides | S(v*) = 0 (mod m)]`.
    pub conditional_survival: f64,
    /// `1 - sum` of the conditional collision rates.
    pub union_bound: f64,
    /// Some conditional collision rate exceeds `1/m`.
    pub rates_exceed_one_over_m: bool,
}

impl BoundReport {
    pub fn lambda_f64(&self) -> f64 {
        self.lambda.to_f64().unwrap_or(0.0)
    }

    /// `key=value` lines.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "q={}", self.q);
        let _ = writeln!(out, "ell={}", self.ell);
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "m={}", self.m);
        let _ = writeln!(out, "method={}", if self.exact { "enumeration" } else { "monte-carlo" });
        let _ = writeln!(out, "trials={}", self.trials);
        if let Some(v) = &self.exact_value {
            let _ = writeln!(out, "survival_exact={v}");
        }
        let _ = writeln!(out, "survival_estimate={:.9}", self.estimate);
        let _ = writeln!(out, "std_error={:.9}", self.std_error);
        let _ = writeln!(out, "lambda={}", self.lambda);
        let _ = writeln!(out, "lambda_value={:.9}", self.lambda_f64());
        for (j, r) in self.conditional_collision_rates.iter().enumerate() {
            let _ = writeln!(out, "conditional_collision_rate_{j}={r:.9}");
        }
        let _ = writeln!(out, "one_over_m={:.9}", 1.0 / self.m as f64);
        let _ = writeln!(out, "rates_exceed_one_over_m={}", self.rates_exceed_one_over_m);
        let _ = writeln!(out, "conditional_survival={:.9}", self.conditional_survival);
        let _ = writeln!(out, "union_bound={:.9}", self.union_bound);
        let _ = writeln!(out, "pass={}", self.pass);
        out
    }
}

/// Estimates the survival probability (exactly when enumerable) and checks
/// it against `lambda` with a three-sigma allowance.
pub fn bound_check<R: RngCore + ?Sized>(experiment: &AbortExperiment, rng: &mut R) -> BoundReport {
    let lam = experiment.lambda();
    let lam_f = lam.to_f64().unwrap_or(0.0);
    let m = experiment.m;
    let one_over_m = Ratio::new(1u64, m);

    let (exact, estimate, exact_value, std_error, rates, rates_exceed, conditional_survival) =
        if experiment.is_enumerable() {
            let counts = experiment.exact_counts().expect("enumerable");
            let survival = counts.survival();
            let exact_rates = counts.conditional_collision_rates();
            let exceed = exact_rates.iter().any(|r| *r > one_over_m);
            let cond = if counts.challenge_zero == 0 {
                0.0
            } else {
                counts.survive_mod_m as f64 / counts.challenge_zero as f64
            };
            (
                true,
                ratio_f64(&survival),
                Some(survival),
                0.0,
                exact_rates.iter().map(ratio_f64).collect::<Vec<_>>(),
                exceed,
                cond,
            )
        } else {
            let trials = experiment.trials;
            let estimate = estimate_survival(
                &experiment.queries,
                &experiment.v_star,
                m,
                experiment.ell,
                experiment.n,
                trials,
                rng,
            );
            let mut zero = 0u64;
            let mut all_avoid = 0u64;
            let mut collisions = vec![0u64; experiment.queries.len()];
            for _ in 0..trials {
                let (x_prime, x) = sample_assignment(m, experiment.n, rng);
                if identity_sum(x_prime, &x, &experiment.v_star) % m as u128 != 0 {
                    continue;
                }
                zero += 1;
                let mut avoided = true;
                for (j, v) in experiment.queries.iter().enumerate() {
                    if identity_sum(x_prime, &x, v) % m as u128 == 0 {
                        collisions[j] += 1;
                        avoided = false;
                    }
                }
                if avoided {
                    all_avoid += 1;
                }
            }
            let rates: Vec<f64> = collisions
                .iter()
                .map(|&c| if zero == 0 { 0.0 } else { c as f64 / zero as f64 })
                .collect();
            let exceed = rates.iter().zip(&collisions).any(|(&r, _)| {
                let se = binomial_std_error(r, zero.max(1));
                r - 3.0 * se > 1.0 / m as f64
            });
            let cond = if zero == 0 { 0.0 } else { all_avoid as f64 / zero as f64 };
            (
                false,
                estimate,
                None,
                binomial_std_error(estimate, trials),
                rates,
                exceed,
                cond,
            )
        };

    let pass = match &exact_value {
        Some(v) => BigRational::new((*v.numer()).into(), (*v.denom()).into()) >= lam,
        None => estimate >= lam_f - 3.0 * std_error,
    };
    BoundReport {
        q: experiment.q,
        ell: experiment.ell,
        n: experiment.n,
        m,
        exact,
        trials: if exact { 0 } else { experiment.trials },
        estimate,
        exact_value,
        std_error,
        lambda: lam,
        pass,
        union_bound: 1.0 - rates.iter().sum::<f64>(),
        conditional_collision_rates: rates,
        conditional_survival,
        rates_exceed_one_over_m: rates_exceed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn indicator_examples() {
        // m = 4, x' = 1, x = (3): S((1)) = 4 = m * 1, S((0)) = 1 is nonzero mod 4.
        assert!(!abort_indicator(1, &[3], &[[0u64]], &[1], 1, 4));
        assert!(abort_indicator(1, &[3], &[[0u64]], &[1], 0, 4));
        // Challenge in the queries: the two clauses contradict each other.
        for k in 0..4 {
            assert!(abort_indicator(1, &[3], &[[1u64]], &[1], k, 4));
        }
        // F(v*) = m rather than zero.
        assert!(abort_indicator(1, &[3], &[[0u64]], &[1], 0, 4));
        assert!(!abort_indicator_mod_m(1, &[3], &[[0u64]], &[1], 4));
        assert!(abort_indicator_mod_m(1, &[3], &[[1u64]], &[1], 4));
        assert!(abort_indicator_mod_m(0, &[3], &[[0u64]], &[1], 4));
    }

    #[test]
    fn unique_k_examples() {
        // 3 + 2 * 3 + 1 * 3 = 12 = 3m with m = 4.
        assert_eq!(unique_k(3, &[3, 3], &[2, 1], 4, 2, 2), Some(3));
        assert_eq!(unique_k(3, &[3, 3], &[2, 2], 4, 2, 2), None);
        assert_eq!(unique_k(0, &[0, 0], &[3, 3], 4, 2, 2), Some(0));
    }

    #[test]
    fn unique_k_is_bounded_on_random_draws() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..100_000 {
            let ell = rng.gen_range(1..=8);
            let n = rng.gen_range(1..=6);
            let m = 2 * rng.gen_range(1..=16u64);
            let (x_prime, x) = sample_assignment(m, n, &mut rng);
            let v: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1u64 << ell)).collect();
            let s = identity_sum(x_prime, &x, &v);
            assert!(s < m as u128 * n as u128 * (1u128 << ell));
            if s % m as u128 == 0 {
                let k = unique_k(x_prime, &x, &v, m, ell, n).expect("k exists");
                assert!((k as u128) < n as u128 * (1u128 << ell));
            }
        }
    }

    #[test]
    fn decomposition_exhaustive_small() {
        // For every X the number of surviving k is 1 exactly when the
        // relaxed indicator survives.
        for m in 2..=4u64 {
            for n in 1..=2usize {
                for ell in 1..=2u32 {
                    let ids = all_identities(ell, n);
                    for v_star in &ids {
                        for query in &ids {
                            let queries = [query.clone()];
                            for_each_assignment(m, n, |x_prime, x| {
                                let c = count_surviving_k(x_prime, x, &queries, v_star, m, ell, n);
                                let relaxed = !abort_indicator_mod_m(x_prime, x, &queries, v_star, m);
                                assert_eq!(c, relaxed as u64);
                            });
                        }
                    }
                }
            }
        }
    }

    fn all_identities(ell: u32, n: usize) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..1u64 << ell).map(move |b| {
                        let mut q = p.clone();
                        q.push(b);
                        q
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn lemma1_examples() {
        // Difference 1 is a unit mod 4.
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(lemma1_exact(&[0], &[1], a, b, 4, 1).unwrap(), Ratio::new(1, 16));
            }
        }
        // Difference 1 again for (1) vs (2).
        assert_eq!(lemma1_exact(&[1], &[2], 0, 0, 4, 1).unwrap(), Ratio::new(1, 16));
        // Difference 2 shares a factor with 4: mass sits on a coset.
        assert_eq!(lemma1_exact(&[0], &[2], 0, 0, 4, 1).unwrap(), Ratio::new(2, 16));
        assert_eq!(lemma1_exact(&[0], &[2], 0, 1, 4, 1).unwrap(), Ratio::new(0, 1));
        // Odd modulus, every nonzero difference is a unit.
        for v in all_identities(2, 2) {
            for w in all_identities(2, 2) {
                if v != w && has_coprime_difference(&v, &w, 3) {
                    assert_eq!(lemma1_exact(&v, &w, 1, 2, 3, 2).unwrap(), Ratio::new(1, 9));
                }
            }
        }
        assert_eq!(lemma1_exact(&[1], &[1], 0, 0, 4, 1), Err(AnalysisError::IdenticalIdentities));
        assert!(matches!(
            lemma1_exact(&[1; 8], &[0; 8], 0, 0, 10, 8),
            Err(AnalysisError::Infeasible { .. })
        ));
    }

    #[test]
    fn challenge_zero_is_one_over_m() {
        for m in 2..=6u64 {
            for v in all_identities(2, 2) {
                assert_eq!(challenge_zero_probability(&v, m, 2).unwrap(), Ratio::new(1, m));
            }
        }
    }

    #[test]
    fn tiny_survival_matches_hand_count() {
        // q = 1, n = 1, ell = 1, m = 2: the single survivor is x' = 1, x1 = 1, k = 1.
        let exp = AbortExperiment::new(1, 1, 1, vec![vec![0]], vec![1], 0).unwrap();
        let c = exp.exact_counts().unwrap();
        assert_eq!(c.survival(), Ratio::new(1, 8));
        assert_eq!(c.survival_mod_m(), Ratio::new(1, 4));
    }

    #[test]
    fn degenerate_challenge_in_queries() {
        let c = exact_counts(&[vec![1u64, 2]], &[1, 2], 4, 2, 2).unwrap();
        assert_eq!(c.survive, 0);
        assert_eq!(c.survive_mod_m, 0);
        assert_eq!(
            AbortExperiment::new(2, 2, 2, vec![vec![1, 2]], vec![1, 2], 0),
            Err(AnalysisError::ChallengeQueried)
        );
    }

    #[test]
    fn even_differences_are_flagged() {
        // Every query differs from v* by even amounts in every block.
        let exp = AbortExperiment::new(2, 2, 2, vec![vec![2, 0], vec![0, 2]], vec![0, 0], 0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let report = bound_check(&exp, &mut rng);
        assert!(report.exact);
        assert!(report.rates_exceed_one_over_m);
        assert_eq!(report.conditional_collision_rates, vec![0.5, 0.5]);
        // Survival 1/128 falls below lambda = 1/64 for this adversarial choice.
        assert_eq!(report.exact_value, Some(Ratio::new(1, 128)));
        assert!(!report.pass);
        assert!(report.to_report().contains("lambda=1/64\n"));
    }

    #[test]
    fn monte_carlo_matches_enumeration() {
        let exp = AbortExperiment::new(1, 2, 1, vec![vec![2]], vec![1], 200_000).unwrap();
        let exact = ratio_f64(&exp.exact_counts().unwrap().survival());
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let est = estimate_survival(exp.queries(), exp.v_star(), exp.m(), 2, 1, 200_000, &mut rng);
        let se = binomial_std_error(exact, 200_000);
        assert!((est - exact).abs() <= 4.0 * se, "{est} vs {exact}");
    }

    #[test]
    fn monte_carlo_decomposition_large_space() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let exp = AbortExperiment::random(8, 4, 4, 200_000, &mut rng).unwrap();
        assert!(!exp.is_enumerable());
        let rep = decomposition_check(&exp, &mut rng);
        assert!(rep.exact.is_none());
        assert!(rep.holds(), "{rep:?}");
        let bound = bound_check(&exp, &mut rng);
        assert!(!bound.exact);
        assert_eq!(bound.conditional_collision_rates.len(), 8);
    }

    #[test]
    fn lemma1_sweep_agrees_with_pointwise_counts() {
        let sweep = lemma1_sweep(4, 1, 2).unwrap();
        // Ordered pairs among 4 identities: 12. Differences 1 and 3 are
        // units mod 4; differences of 2 are not.
        assert_eq!(sweep.coprime_pairs + sweep.other_pairs, 12);
        assert_eq!(sweep.other_pairs, 4);
        assert!(sweep.holds_where_claimed());
        assert_eq!(sweep.other_deviations.len(), 4);
        let d = &sweep.other_deviations[0];
        assert_eq!(d.max, Ratio::new(2, 16));
        assert_eq!(d.min, Ratio::new(0, 16));
        assert_eq!(lemma1_exact(&d.v, &d.v_prime, 0, 0, 4, 1).unwrap(), Ratio::new(2, 16));

        for m in 2..=4 {
            for n in 1..=2 {
                let s = lemma1_sweep(m, n, 2).unwrap();
                assert!(s.holds_where_claimed(), "m={m} n={n}");
            }
        }
        assert!(matches!(lemma1_sweep(4, 4, 8), Err(AnalysisError::Infeasible { .. })));
    }
}
