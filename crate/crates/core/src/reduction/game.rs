use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use super::bounds::{artificial_abort, eta_sample_count, lambda_f64, SampleBudget};
use super::dbdh::{gen_dbdh, DbdhTuple};
use super::simulator::{sim_challenge, sim_keygen, sim_setup};
use super::{AbortKind, Outcome, ReductionError};
use crate::abort_analysis::estimate_survival;
use crate::bilinear::PairingGroup;
use crate::ibe::{encrypt, keygen, Ciphertext, EncodedIdentity, MasterSecret, PrivateKey, PublicParams, SchemeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    BeforeChallenge,
    AfterChallenge,
}

/// The adversary's challenge: an identity never queried and two messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChallengeRequest<G: PairingGroup> {
    pub v_star: EncodedIdentity,
    pub m0: G::Target,
    pub m1: G::Target,
}

/// An IND-ID-CPA adversary, driven by the game harness.
///
/// `begin` starts a fresh game and must reset any per-game state, so one
/// value can play many games.
pub trait Adversary<G: PairingGroup> {
    fn begin(&mut self, group: &G, params: &PublicParams<G>, rng: &mut dyn RngCore);

    /// The next key query, or `None` to move on.
    fn next_query(&mut self, phase: Phase, rng: &mut dyn RngCore) -> Option<EncodedIdentity>;

    fn receive_key(&mut self, key: &PrivateKey<G>);

    fn challenge(&mut self, rng: &mut dyn RngCore) -> ChallengeRequest<G>;

    fn receive_challenge(&mut self, ct: &Ciphertext<G>);

    /// The guess for which message was encrypted (`true` for `m1`).
    fn guess(&mut self, rng: &mut dyn RngCore) -> bool;
}

/// Parameters of the simulated game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionParams {
    pub config: SchemeConfig,
    pub q: usize,
    /// The adversary advantage the survival estimator is tuned for.
    pub epsilon: f64,
    pub budget: SampleBudget,
}

impl ReductionParams {
    pub fn new(config: SchemeConfig, q: usize, epsilon: f64) -> Self {
        ReductionParams {
            config,
            q,
            epsilon,
            budget: SampleBudget::default(),
        }
    }

    pub fn lambda(&self) -> f64 {
        lambda_f64(self.q as u64, self.config.ell(), self.config.n() as u64)
    }

    pub fn eta_samples(&self) -> u64 {
        eta_sample_count(self.epsilon, self.lambda(), self.budget)
    }
}

/// Everything that happened in one simulated game.
///
/// `query_f` and `challenge_f` expose the hidden `F` values so that abort
/// decisions can be audited after the fact.
#[derive(Clone, Debug, PartialEq)]
pub struct GameTranscript {
    pub queries: Vec<EncodedIdentity>,
    pub challenge_identity: Option<EncodedIdentity>,
    pub gamma: bool,
    pub gamma_guess: Option<bool>,
    pub aborted: bool,
    pub abort_kind: AbortKind,
    pub eta_prime: Option<f64>,
    pub query_f: Vec<i128>,
    pub challenge_f: Option<i128>,
    pub m: u64,
}

impl GameTranscript {
    fn new(gamma: bool, m: u64) -> Self {
        GameTranscript {
            queries: Vec::new(),
            challenge_identity: None,
            gamma,
            gamma_guess: None,
            aborted: false,
            abort_kind: AbortKind::None,
            eta_prime: None,
            query_f: Vec::new(),
            challenge_f: None,
            m,
        }
    }

    fn abort(&mut self, kind: AbortKind) {
        self.aborted = true;
        self.abort_kind = kind;
    }
}

fn violation(msg: impl Into<String>) -> ReductionError {
    ReductionError::ProtocolViolation(msg.into())
}

fn check_query<G: PairingGroup>(
    params: &PublicParams<G>,
    asked: &[EncodedIdentity],
    q: usize,
    v: &EncodedIdentity,
    v_star: Option<&EncodedIdentity>,
) -> Result<(), ReductionError> {
    if asked.len() >= q {
        return Err(violation(format!("more than {q} key queries")));
    }
    EncodedIdentity::new(v.blocks().to_vec(), params.config())
        .map_err(|e| violation(format!("malformed key query: {e}")))?;
    if v_star == Some(v) {
        return Err(violation("key query for the challenge identity"));
    }
    Ok(())
}

fn check_challenge<G: PairingGroup>(
    params: &PublicParams<G>,
    asked: &[EncodedIdentity],
    req: &ChallengeRequest<G>,
) -> Result<(), ReductionError> {
    EncodedIdentity::new(req.v_star.blocks().to_vec(), params.config())
        .map_err(|e| violation(format!("malformed challenge identity: {e}")))?;
    if asked.contains(&req.v_star) {
        return Err(violation("challenge identity was queried in phase 1"));
    }
    Ok(())
}

/// Survival estimate for the identities of a finished game: the fraction of
/// fresh trapdoors `(x', x, k)` under which nothing would have aborted.
pub fn estimate_eta<R: RngCore + ?Sized>(
    queries: &[EncodedIdentity],
    v_star: &EncodedIdentity,
    q: usize,
    config: &SchemeConfig,
    samples: u64,
    rng: &mut R,
) -> f64 {
    estimate_survival(
        queries,
        v_star.blocks(),
        2 * q as u64,
        config.ell(),
        config.n(),
        samples,
        rng,
    )
}

/// Plays one game as the DBDH distinguisher built from `adversary` and
/// returns the distinguisher's guess for `beta`.
///
/// On any abort the guess is a fresh fair coin.
pub fn run_reduction<G: PairingGroup, A: Adversary<G> + ?Sized, R: RngCore>(
    adversary: &mut A,
    group: &G,
    tuple: &DbdhTuple<G>,
    params: &ReductionParams,
    rng: &mut R,
) -> Result<(bool, GameTranscript), ReductionError> {
    let (pp, state) = sim_setup(group, tuple, params.q, params.config, rng)?;
    let gamma: bool = rng.gen();
    let mut tr = GameTranscript::new(gamma, state.m());

    adversary.begin(group, &pp, rng);
    while let Some(v) = adversary.next_query(Phase::BeforeChallenge, rng) {
        check_query(&pp, &tr.queries, params.q, &v, None)?;
        tr.query_f.push(state.f(&v));
        tr.queries.push(v.clone());
        match sim_keygen(group, &state, &pp, &v, rng)? {
            Outcome::Answered(key) => adversary.receive_key(&key),
            Outcome::Aborted(kind) => {
                tr.abort(kind);
                return Ok((rng.gen(), tr));
            }
        }
    }

    let req = adversary.challenge(rng);
    check_challenge(&pp, &tr.queries, &req)?;
    tr.challenge_f = Some(state.f(&req.v_star));
    tr.challenge_identity = Some(req.v_star.clone());
    let ct = match sim_challenge(group, &state, &pp, tuple, &req.v_star, &req.m0, &req.m1, gamma)? {
        Outcome::Answered(ct) => ct,
        Outcome::Aborted(kind) => {
            tr.abort(kind);
            return Ok((rng.gen(), tr));
        }
    };
    adversary.receive_challenge(&ct);

    while let Some(v) = adversary.next_query(Phase::AfterChallenge, rng) {
        check_query(&pp, &tr.queries, params.q, &v, Some(&req.v_star))?;
        tr.query_f.push(state.f(&v));
        tr.queries.push(v.clone());
        match sim_keygen(group, &state, &pp, &v, rng)? {
            Outcome::Answered(key) => adversary.receive_key(&key),
            Outcome::Aborted(kind) => {
                tr.abort(kind);
                return Ok((rng.gen(), tr));
            }
        }
    }

    let gamma_guess = adversary.guess(rng);
    tr.gamma_guess = Some(gamma_guess);

    let eta = estimate_eta(&tr.queries, &req.v_star, params.q, &params.config, params.eta_samples(), rng);
    tr.eta_prime = Some(eta);
    if artificial_abort(eta, params.lambda(), rng) {
        tr.abort(AbortKind::Artificial);
        return Ok((rng.gen(), tr));
    }
    Ok((gamma_guess == gamma, tr))
}

/// One game as an exportable line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameRecord {
    pub seed: u64,
    pub abort_kind: AbortKind,
    pub gamma: bool,
    pub gamma_guess: Option<bool>,
    pub beta: bool,
    pub beta_guess: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed game record: {0}")]
pub struct ParseRecordError(String);

fn bit(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

impl GameRecord {
    pub fn to_line(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "seed={} abort={} gamma={} gamma_guess={} beta={} beta_guess={}",
            self.seed,
            self.abort_kind,
            bit(self.gamma),
            self.gamma_guess.map_or('-', bit),
            bit(self.beta),
            bit(self.beta_guess)
        );
        s
    }

    pub fn parse_line(line: &str) -> Result<Self, ParseRecordError> {
        let err = || ParseRecordError(line.to_string());
        let mut fields = std::collections::HashMap::new();
        for part in line.split_whitespace() {
            let (k, v) = part.split_once('=').ok_or_else(err)?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(err);
        let parse_bit = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(err()),
        };
        let gamma_guess = match get("gamma_guess")? {
            "-" => None,
            s => Some(parse_bit(s)?),
        };
        Ok(GameRecord {
            seed: u64::from_str(get("seed")?).map_err(|_| err())?,
            abort_kind: AbortKind::from_name(get("abort")?).ok_or_else(err)?,
            gamma: parse_bit(get("gamma")?)?,
            gamma_guess,
            beta: parse_bit(get("beta")?)?,
            beta_guess: parse_bit(get("beta_guess")?)?,
        })
    }
}

/// Aggregate of many simulated games.
#[derive(Clone, Debug, PartialEq)]
pub struct DbdhMeasurement {
    pub games: u64,
    pub correct: u64,
    pub beta_zero_games: u64,
    pub beta_zero_ones: u64,
    pub aborts: [u64; 4],
    pub records: Vec<GameRecord>,
}

impl DbdhMeasurement {
    /// `Pr[beta' = beta] - 1/2`.
    pub fn advantage(&self) -> f64 {
        self.correct as f64 / self.games as f64 - 0.5
    }

    pub fn std_error(&self) -> f64 {
        (0.25 / self.games as f64).sqrt()
    }

    /// `Pr[beta' = 1 | beta = 0]`.
    pub fn beta_zero_rate(&self) -> f64 {
        self.beta_zero_ones as f64 / self.beta_zero_games as f64
    }

    pub fn beta_zero_std_error(&self) -> f64 {
        (0.25 / self.beta_zero_games as f64).sqrt()
    }

    pub fn abort_count(&self, kind: AbortKind) -> u64 {
        self.aborts[kind as usize]
    }

    pub fn to_report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "games={}", self.games);
        let _ = writeln!(s, "correct={}", self.correct);
        let _ = writeln!(s, "advantage={:.6}", self.advantage());
        let _ = writeln!(s, "std_error={:.6}", self.std_error());
        let _ = writeln!(s, "beta0_rate={:.6}", self.beta_zero_rate());
        for kind in [AbortKind::None, AbortKind::KeyQuery, AbortKind::Challenge, AbortKind::Artificial] {
            let _ = writeln!(s, "abort_{}={}", kind, self.abort_count(kind));
        }
        s
    }
}

/// Plays `games` independent reductions on fresh DBDH tuples with a fair
/// coin `beta`. Each game runs on its own generator seeded from `rng`; the
/// seed is kept in the record.
pub fn measure_dbdh_advantage<G: PairingGroup, A: Adversary<G> + ?Sized, R: RngCore + ?Sized>(
    adversary: &mut A,
    group: &G,
    params: &ReductionParams,
    games: u64,
    rng: &mut R,
) -> Result<DbdhMeasurement, ReductionError> {
    let mut out = DbdhMeasurement {
        games,
        correct: 0,
        beta_zero_games: 0,
        beta_zero_ones: 0,
        aborts: [0; 4],
        records: Vec::with_capacity(games as usize),
    };
    for _ in 0..games {
        let seed = rng.next_u64();
        let mut game_rng = ChaCha20Rng::seed_from_u64(seed);
        let beta: bool = game_rng.gen();
        let tuple = gen_dbdh(group, beta, &mut game_rng).without_oracle();
        let (beta_guess, tr) = run_reduction(adversary, group, &tuple, params, &mut game_rng)?;
        out.correct += u64::from(beta_guess == beta);
        if !beta {
            out.beta_zero_games += 1;
            out.beta_zero_ones += u64::from(beta_guess);
        }
        out.aborts[tr.abort_kind as usize] += 1;
        out.records.push(GameRecord {
            seed,
            abort_kind: tr.abort_kind,
            gamma: tr.gamma,
            gamma_guess: tr.gamma_guess,
            beta,
            beta_guess,
        });
    }
    Ok(out)
}

/// Empirical advantage against the real scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpaEstimate {
    pub trials: u64,
    pub wins: u64,
}

impl CpaEstimate {
    /// `|Pr[b' = b] - 1/2|`.
    pub fn advantage(&self) -> f64 {
        (self.wins as f64 / self.trials as f64 - 0.5).abs()
    }

    pub fn std_error(&self) -> f64 {
        (0.25 / self.trials as f64).sqrt()
    }
}

/// Plays the IND-ID-CPA game against the real scheme `trials` times with
/// fixed parameters. `q` bounds the key queries per game.
pub fn run_ind_id_cpa_game<G: PairingGroup, A: Adversary<G> + ?Sized, R: RngCore>(
    group: &G,
    params: &PublicParams<G>,
    master: &MasterSecret<G>,
    adversary: &mut A,
    q: usize,
    trials: u64,
    rng: &mut R,
) -> Result<CpaEstimate, ReductionError> {
    let mut wins = 0;
    for _ in 0..trials {
        let b: bool = rng.gen();
        let mut asked = Vec::new();
        adversary.begin(group, params, rng);
        while let Some(v) = adversary.next_query(Phase::BeforeChallenge, rng) {
            check_query(params, &asked, q, &v, None)?;
            adversary.receive_key(&keygen(group, params, master, &v, rng)?);
            asked.push(v);
        }
        let req = adversary.challenge(rng);
        check_challenge(params, &asked, &req)?;
        let m = if b { &req.m1 } else { &req.m0 };
        adversary.receive_challenge(&encrypt(group, params, &req.v_star, m, rng)?);
        while let Some(v) = adversary.next_query(Phase::AfterChallenge, rng) {
            check_query(params, &asked, q, &v, Some(&req.v_star))?;
            adversary.receive_key(&keygen(group, params, master, &v, rng)?);
            asked.push(v);
        }
        wins += u64::from(adversary.guess(rng) == b);
    }
    Ok(CpaEstimate { trials, wins })
}

#[cfg(test)]
mod tests {
    use super::super::{RandomGuesser, ScriptedAdversary, ToyDlogAdversary};
    use super::*;
    use crate::bilinear::ToyPairing;
    use crate::ibe::{setup, HashId};

    fn cfg(n: u16, ell: u16) -> SchemeConfig {
        SchemeConfig::new(n, ell, HashId::Sha256).unwrap()
    }

    #[test]
    fn record_lines_round_trip() {
        let r = GameRecord {
            seed: 42,
            abort_kind: AbortKind::Challenge,
            gamma: true,
            gamma_guess: None,
            beta: false,
            beta_guess: true,
        };
        let line = r.to_line();
        assert_eq!(line, "seed=42 abort=challenge gamma=1 gamma_guess=- beta=0 beta_guess=1");
        assert_eq!(GameRecord::parse_line(&line).unwrap(), r);
        assert!(GameRecord::parse_line("seed=1 abort=bogus").is_err());
    }

    #[test]
    fn real_game_advantages() {
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(50);
        let (pp, msk) = setup(&grp, cfg(2, 2), &mut rng).unwrap();

        let est = run_ind_id_cpa_game(&grp, &pp, &msk, &mut RandomGuesser::new(), 0, 10_000, &mut rng).unwrap();
        assert!(est.advantage() <= 3.0 * est.std_error());

        let est = run_ind_id_cpa_game(&grp, &pp, &msk, &mut ToyDlogAdversary::new(), 0, 2_000, &mut rng).unwrap();
        assert_eq!(est.wins, est.trials);
    }

    #[test]
    fn contract_violations_are_reported() {
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(51);
        let config = cfg(1, 1);
        let (pp, msk) = setup(&grp, config, &mut rng).unwrap();
        let v = EncodedIdentity::new(vec![1], &config).unwrap();
        let w = EncodedIdentity::new(vec![0], &config).unwrap();

        let mut queried_star = ScriptedAdversary::new(vec![v.clone()], vec![], v.clone());
        let err = run_ind_id_cpa_game(&grp, &pp, &msk, &mut queried_star, 1, 1, &mut rng).unwrap_err();
        assert!(matches!(err, ReductionError::ProtocolViolation(_)));

        let mut late_star = ScriptedAdversary::new(vec![], vec![v.clone()], v.clone());
        let err = run_ind_id_cpa_game(&grp, &pp, &msk, &mut late_star, 1, 1, &mut rng).unwrap_err();
        assert!(matches!(err, ReductionError::ProtocolViolation(_)));

        let mut greedy = ScriptedAdversary::new(vec![w.clone(), w.clone()], vec![], v.clone());
        let err = run_ind_id_cpa_game(&grp, &pp, &msk, &mut greedy, 1, 1, &mut rng).unwrap_err();
        assert!(matches!(err, ReductionError::ProtocolViolation(_)));

        let params = ReductionParams::new(config, 1, 0.5);
        let tuple = gen_dbdh(&grp, true, &mut rng);
        let mut queried_star = ScriptedAdversary::new(vec![v.clone()], vec![], v.clone());
        // The query itself may abort before the challenge is seen; retry
        // until the contract check is reached.
        let mut saw_violation = false;
        for _ in 0..64 {
            match run_reduction(&mut queried_star, &grp, &tuple, &params, &mut rng) {
                Err(ReductionError::ProtocolViolation(_)) => {
                    saw_violation = true;
                    break;
                }
                Ok((_, tr)) => assert_eq!(tr.abort_kind, AbortKind::KeyQuery),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(saw_violation);
    }

    #[test]
    fn abort_accounting_matches_f() {
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(52);
        let config = cfg(2, 2);
        let params = ReductionParams::new(config, 2, 0.5);
        let v1 = EncodedIdentity::new(vec![1, 2], &config).unwrap();
        let v2 = EncodedIdentity::new(vec![3, 0], &config).unwrap();
        let star = EncodedIdentity::new(vec![2, 1], &config).unwrap();
        let mut adv = ScriptedAdversary::new(vec![v1], vec![v2], star);
        for _ in 0..3000 {
            let tuple = gen_dbdh(&grp, rng.gen(), &mut rng);
            let (_, tr) = run_reduction(&mut adv, &grp, &tuple, &params, &mut rng).unwrap();
            let m = tr.m as i128;
            let first_bad_query = tr.query_f.iter().position(|f| f.rem_euclid(m) == 0);
            match tr.abort_kind {
                AbortKind::KeyQuery => assert_eq!(first_bad_query, Some(tr.query_f.len() - 1)),
                AbortKind::Challenge => {
                    assert_eq!(first_bad_query, None);
                    assert_ne!(tr.challenge_f, Some(0));
                }
                AbortKind::None | AbortKind::Artificial => {
                    assert_eq!(first_bad_query, None);
                    assert_eq!(tr.challenge_f, Some(0));
                    assert_eq!(tr.queries.len(), 2);
                }
            }
        }
    }

    #[test]
    fn key_query_aborts_give_fair_coins() {
        // With m = 2 and x' = x_1 = ... every identity whose F is even is
        // refused; force that by querying until aborts accumulate.
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(53);
        let config = cfg(1, 1);
        let params = ReductionParams::new(config, 1, 0.5);
        let v = EncodedIdentity::new(vec![0], &config).unwrap();
        let star = EncodedIdentity::new(vec![1], &config).unwrap();
        let mut adv = ScriptedAdversary::new(vec![v], vec![], star);
        let (mut aborts, mut ones) = (0u64, 0u64);
        while aborts < 10_000 {
            let tuple = gen_dbdh(&grp, true, &mut rng);
            let (guess, tr) = run_reduction(&mut adv, &grp, &tuple, &params, &mut rng).unwrap();
            if tr.abort_kind == AbortKind::KeyQuery {
                aborts += 1;
                ones += u64::from(guess);
            }
        }
        let rate = ones as f64 / aborts as f64;
        assert!((rate - 0.5).abs() <= 3.0 * (0.25 / aborts as f64).sqrt(), "rate {rate}");
    }

    #[test]
    fn measured_advantage_with_perfect_adversary() {
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(54);
        let params = ReductionParams::new(cfg(1, 1), 1, 0.5);
        let m = measure_dbdh_advantage(&mut ToyDlogAdversary::new(), &grp, &params, 20_000, &mut rng).unwrap();
        assert!(m.advantage() >= 1.0 / 64.0 - 3.0 * m.std_error(), "{}", m.to_report());
        assert!((m.beta_zero_rate() - 0.5).abs() <= 3.0 * m.beta_zero_std_error());
        assert_eq!(m.records.len(), 20_000);
    }
}
